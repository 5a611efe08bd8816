//! Enumeration ground truth.
//!
//! Everything here counts by exhausting field elements; no character sums
//! and no closed forms. These counts are the reference that every analytic
//! route in the crate is checked against.
//!
//! The joint census sweeps the cyclic group F_{q^n}^* once with a running
//! generator power. The norm of g^k cycles with period q-1, so the norm
//! index is tracked incrementally; the trace is recomputed per element
//! through the precomputed trace basis.

use crate::error::{Error, Result};
use crate::fieldtower::FieldTower;

/// Default cap on the number of elements an enumeration may touch.
pub const DEFAULT_ENUM_CAP: u128 = 300_000;

/// Joint distribution of (norm, trace) over the nonzero elements of the
/// top field: `counts[a_idx * q + b_idx]` with both values addressed by
/// mid element index (row a_idx = 0 stays empty; the norm of a nonzero
/// element is nonzero).
pub struct CensusTable {
    pub q: u64,
    counts: Vec<u64>,
}

impl CensusTable {
    /// N_n(a, b) by mid element indices. a must be nonzero.
    pub fn get(&self, a_idx: u64, b_idx: u64) -> Result<u64> {
        if a_idx == 0 || a_idx >= self.q || b_idx >= self.q {
            return Err(Error::InvalidParameter(format!(
                "census lookup needs 1 <= a < q and 0 <= b < q, got a={a_idx}, b={b_idx}"
            )));
        }
        Ok(self.counts[(a_idx * self.q + b_idx) as usize])
    }

    /// Sum over all a of N_n(a, b): the size of the trace-b fiber, minus
    /// the zero element when b = 0.
    pub fn trace_fiber_total(&self, b_idx: u64) -> u64 {
        (1..self.q).map(|a| self.counts[(a * self.q + b_idx) as usize]).sum()
    }

    /// Sum over all b of N_n(a, b): the size of the norm-a fiber.
    pub fn norm_fiber_total(&self, a_idx: u64) -> u64 {
        (0..self.q).map(|b| self.counts[(a_idx * self.q + b) as usize]).sum()
    }
}

fn check_cap(work: u128, cap: u128) -> Result<()> {
    if work > cap {
        return Err(Error::ScaleExceeded { size: work, cap });
    }
    Ok(())
}

/// Exhaustive joint (norm, trace) census of the top field's nonzero
/// elements. Work is q^n - 1 group steps.
pub fn census(tower: &FieldTower, cap: u128) -> Result<CensusTable> {
    check_cap(tower.qn as u128, cap)?;
    let (q, e) = (tower.q, tower.e);
    let mut counts = vec![0u64; (q * q) as usize];
    let g = tower.g_top_v().to_vec();
    let mut z = tower.top_one_v();
    let mut out = tower.top_zero_v();
    let mut acc = vec![0u64; e * (2 * tower.n - 1)];
    // dlog of norm(g^k) advances by norm_g_step per step
    let step = tower.norm_g_step();
    let mut norm_dlog = 0u64;
    for k in 0..tower.qn - 1 {
        let a_idx = tower.mid_exp_idx(norm_dlog);
        let b_idx = tower.mid_index(&tower.trace_flat_v(&z));
        counts[(a_idx * q + b_idx) as usize] += 1;
        if k + 1 < tower.qn - 1 {
            if tower.n == 1 {
                z = tower.mid().mul_v(&z, &g);
            } else {
                tower.top_mul_flat(&z, &g, &mut out, &mut acc);
                std::mem::swap(&mut z, &mut out);
            }
            norm_dlog += step;
            if norm_dlog >= q - 1 {
                norm_dlog -= q - 1;
            }
        }
    }
    Ok(CensusTable { q, counts })
}

/// N_n(a, b) by direct scan, independent of the census bookkeeping: walks
/// all q^n elements by odometer and tests norm and trace per element.
pub fn nn_direct(tower: &FieldTower, a_idx: u64, b_idx: u64, cap: u128) -> Result<u64> {
    if a_idx == 0 || a_idx >= tower.q || b_idx >= tower.q {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= a < q and 0 <= b < q, got a={a_idx}, b={b_idx}"
        )));
    }
    check_cap(tower.qn as u128, cap)?;
    let a = tower.mid_from_index_v(a_idx);
    let b = tower.mid_from_index_v(b_idx);
    let mut z = tower.top_zero_v();
    let mut count = 0u64;
    loop {
        if !tower.top_is_zero(&z)
            && tower.trace_flat_v(&z) == b
            && tower.norm_flat_v(&z) == a
        {
            count += 1;
        }
        if !tower.next_flat(&mut z) {
            break;
        }
    }
    Ok(count)
}

/// Affine point count of the curve y^q - y = alpha x^(q-1) - gamma with
/// both coordinates in the top field, by brute scan over all (x, y) pairs.
/// Work is q^(2n) equation tests.
pub fn curve_points_naive(
    tower: &FieldTower,
    alpha: &[u64],
    gamma: &[u64],
    cap: u128,
) -> Result<u128> {
    check_cap((tower.qn as u128).pow(2), cap)?;
    if tower.top_is_zero(alpha) {
        return Err(Error::ZeroAlpha);
    }
    let qm1 = tower.q - 1;
    let mut count = 0u128;
    let mut x = tower.top_zero_v();
    loop {
        // rhs = alpha * x^(q-1) - gamma
        let xp = tower.top_pow_v(&x, qm1);
        let rhs = tower.top_sub_v(&tower.top_mul_v(alpha, &xp), gamma);
        let mut y = tower.top_zero_v();
        loop {
            let lhs = tower.top_sub_v(&tower.top_pow_v(&y, tower.q), &y);
            if lhs == rhs {
                count += 1;
            }
            if !tower.next_flat(&mut y) {
                break;
            }
        }
        if !tower.next_flat(&mut x) {
            break;
        }
    }
    Ok(count)
}

/// Same count via the substitution structure: for fixed x the map
/// y -> y^q - y is F_q-linear with kernel F_q, so the fiber over each
/// reachable value has exactly q points and reachability is a trace
/// condition. Work is q^n odometer steps, each with one short power.
pub fn curve_points_fibered(
    tower: &FieldTower,
    alpha: &[u64],
    gamma: &[u64],
    cap: u128,
) -> Result<u128> {
    check_cap(tower.qn as u128, cap)?;
    if tower.top_is_zero(alpha) {
        return Err(Error::ZeroAlpha);
    }
    let qm1 = tower.q - 1;
    let mut count = 0u128;
    let mut x = tower.top_zero_v();
    loop {
        let xp = tower.top_pow_v(&x, qm1);
        let rhs = tower.top_sub_v(&tower.top_mul_v(alpha, &xp), gamma);
        if tower.mid().is_zero(&tower.trace_flat_v(&rhs)) {
            count += tower.q as u128;
        }
        if !tower.next_flat(&mut x) {
            break;
        }
    }
    Ok(count)
}

/// Same count via the multiplicative structure: x^(q-1) sweeps the index-
/// (q-1) subgroup U as x sweeps F_{q^n}^*, each value hit q-1 times, so it
/// suffices to histogram the trace of alpha*u over u in U. Work is
/// (q^n - 1)/(q - 1) group steps plus the x = 0 column.
pub fn curve_points_subgroup(
    tower: &FieldTower,
    alpha: &[u64],
    gamma: &[u64],
    cap: u128,
) -> Result<u128> {
    let subgroup = ((tower.qn - 1) / (tower.q - 1)) as u128;
    check_cap(subgroup, cap)?;
    if tower.top_is_zero(alpha) {
        return Err(Error::ZeroAlpha);
    }
    let gamma_tr = tower.trace_flat_v(gamma);
    // step through U = <g^(q-1)>
    let gstep = tower.top_pow_v(tower.g_top_v(), tower.q - 1);
    let mut u = alpha.to_vec();
    let mut out = tower.top_zero_v();
    let mut acc = vec![0u64; tower.e * (2 * tower.n - 1)];
    let mut hits = 0u128;
    for k in 0..subgroup {
        if tower.trace_flat_v(&u) == gamma_tr {
            hits += 1;
        }
        if k + 1 < subgroup {
            if tower.n == 1 {
                u = tower.mid().mul_v(&u, &gstep);
            } else {
                tower.top_mul_flat(&u, &gstep, &mut out, &mut acc);
                std::mem::swap(&mut u, &mut out);
            }
        }
    }
    // nonzero x contribute q-1 each per subgroup hit, times the q-sized
    // y-fiber; x = 0 contributes its fiber iff trace(gamma) = 0
    let mut count = hits * (tower.q - 1) as u128 * tower.q as u128;
    if tower.mid().is_zero(&gamma_tr) {
        count += tower.q as u128;
    }
    Ok(count)
}

/// N_n(a, b) recovered from a projective curve count through the incidence
/// identity #X = q(q-1) N + 1 + q[b = 0]. The caller passes the projective
/// count (affine + 1).
pub fn nn_from_curve_projective(
    tower: &FieldTower,
    projective: u128,
    b_is_zero: bool,
) -> Result<u64> {
    let extra = if b_is_zero { tower.q as u128 } else { 0 };
    let num = projective
        .checked_sub(1 + extra)
        .ok_or_else(|| Error::NonIntegerResult { residual: projective as f64 })?;
    let den = tower.q as u128 * (tower.q - 1) as u128;
    if num % den != 0 {
        return Err(Error::DivisibilityViolation {
            value: num.to_string(),
            divisor: den.to_string(),
        });
    }
    Ok((num / den) as u64)
}

/// Count monic irreducible polynomials t^n - a t^(n-1) + ... + (-1)^n b
/// over F_q by exhausting all monic degree-n polynomials with the given
/// second and last coefficients and testing irreducibility. Work is
/// q^(n-2) candidates (n >= 2).
pub fn pn_direct(tower: &FieldTower, a_idx: u64, b_idx: u64, cap: u128) -> Result<u64> {
    let n = tower.n;
    if b_idx == 0 || b_idx >= tower.q || a_idx >= tower.q {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= a < q and 1 <= b < q, got a={a_idx}, b={b_idx}"
        )));
    }
    let mid = tower.mid();
    let a = tower.mid_from_index_v(a_idx);
    let b = tower.mid_from_index_v(b_idx);
    if n == 1 {
        // t - a with constant term (-1)^1 b = -b: the polynomial is t - a,
        // so it matches iff a = b, and a degree-1 polynomial is irreducible.
        return Ok(u64::from(a == b));
    }
    check_cap((tower.qn as u128) / (tower.q as u128).pow(2.min(n as u32)), cap)?;
    // coefficient of t^(n-1) is -a; constant coefficient is (-1)^n b
    let c_top = mid.neg_v(&a);
    let c0 = if n % 2 == 0 { b.clone() } else { mid.neg_v(&b) };
    let free = n - 2;
    let mut digits = vec![0u64; free];
    let mut count = 0u64;
    loop {
        // poly = c0 + (free middle coefficients) + c_top t^(n-1) + t^n
        let mut coeffs: Vec<crate::fieldtower::FieldElement> =
            Vec::with_capacity(n + 1);
        coeffs.push(mid_el(tower, &c0));
        for d in &digits {
            coeffs.push(tower.from_index(crate::fieldtower::Level::Mid, *d).unwrap());
        }
        coeffs.push(mid_el(tower, &c_top));
        coeffs.push(tower.one(crate::fieldtower::Level::Mid));
        if tower.is_irreducible(&coeffs).unwrap() {
            count += 1;
        }
        // odometer over the free middle coefficients, by mid index
        let mut done = true;
        for slot in digits.iter_mut() {
            *slot += 1;
            if *slot < tower.q {
                done = false;
                break;
            }
            *slot = 0;
        }
        if done {
            break;
        }
    }
    Ok(count)
}

fn mid_el(tower: &FieldTower, v: &[u64]) -> crate::fieldtower::FieldElement {
    tower.from_index(crate::fieldtower::Level::Mid, tower.mid_index(v)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldtower::Level;

    const CAP: u128 = DEFAULT_ENUM_CAP;

    fn tower(p: u64, e: usize, n: usize) -> FieldTower {
        FieldTower::build(p, e, n, 0).unwrap()
    }

    #[test]
    fn census_matches_direct_scan_on_small_fields() {
        for (p, e, n) in [(2, 1, 3), (3, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 2)] {
            let t = tower(p, e, n);
            let c = census(&t, CAP).unwrap();
            for a in 1..t.q {
                for b in 0..t.q {
                    assert_eq!(
                        c.get(a, b).unwrap(),
                        nn_direct(&t, a, b, CAP).unwrap(),
                        "q={} n={} a={} b={}",
                        t.q,
                        n,
                        a,
                        b
                    );
                }
            }
        }
    }

    #[test]
    fn census_totals_are_fiber_sizes() {
        for (p, e, n) in [(3, 1, 3), (2, 2, 2), (5, 1, 2)] {
            let t = tower(p, e, n);
            let c = census(&t, CAP).unwrap();
            // norm fibers: (q^n - 1)/(q - 1) each
            for a in 1..t.q {
                assert_eq!(c.norm_fiber_total(a), (t.qn - 1) / (t.q - 1));
            }
            // trace fibers: q^(n-1), minus the zero element in the b = 0 fiber
            for b in 0..t.q {
                let expect = t.qn / t.q - u64::from(b == 0);
                assert_eq!(c.trace_fiber_total(b), expect);
            }
        }
    }

    #[test]
    fn frozen_small_field_counts() {
        // over F_3, n = 2: N(1,1) = 1, N(2,1) = 2; trace-zero elements are
        // c*y with y^2 = -1, all of norm c^4 = 1, so N(1,0) = 2, N(2,0) = 0
        let t = tower(3, 1, 2);
        let c = census(&t, CAP).unwrap();
        assert_eq!(c.get(1, 1).unwrap(), 1);
        assert_eq!(c.get(2, 1).unwrap(), 2);
        assert_eq!(c.get(1, 0).unwrap(), 2);
        assert_eq!(c.get(2, 0).unwrap(), 0);
        // over F_3, n = 3: N(1,1) = 3, N(1,2) = 6, N(1,0) = 4
        let t = tower(3, 1, 3);
        let c = census(&t, CAP).unwrap();
        assert_eq!(c.get(1, 1).unwrap(), 3);
        assert_eq!(c.get(1, 2).unwrap(), 6);
        assert_eq!(c.get(1, 0).unwrap(), 4);
        // over F_5, n = 2: N(1,1) = 2
        let t = tower(5, 1, 2);
        let c = census(&t, CAP).unwrap();
        assert_eq!(c.get(1, 1).unwrap(), 2);
        // over F_2: N_n(1, 1) = 2^(n-1) pattern at n = 5
        let t = tower(2, 1, 5);
        let c = census(&t, CAP).unwrap();
        assert_eq!(c.get(1, 1).unwrap(), 16);
    }

    #[test]
    fn curve_routes_agree_and_match_the_incidence_identity() {
        for (p, e, n) in [(3, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 2), (2, 1, 4)] {
            let t = tower(p, e, n);
            let c = census(&t, CAP).unwrap();
            for a in 1..t.q {
                for b in 0..t.q {
                    let ael = t.from_index(Level::Mid, a).unwrap();
                    let bel = t.from_index(Level::Mid, b).unwrap();
                    let alpha = &t.norm_preimages(&ael, 1).unwrap()[0];
                    let gamma = &t.trace_preimages(&bel, 1).unwrap()[0];
                    let naive = curve_points_naive(&t, alpha.coeffs(), gamma.coeffs(), CAP)
                        .unwrap();
                    let fib =
                        curve_points_fibered(&t, alpha.coeffs(), gamma.coeffs(), CAP).unwrap();
                    let sub =
                        curve_points_subgroup(&t, alpha.coeffs(), gamma.coeffs(), CAP).unwrap();
                    assert_eq!(naive, fib);
                    assert_eq!(naive, sub);
                    let nn = nn_from_curve_projective(&t, naive + 1, b == 0).unwrap();
                    assert_eq!(nn, c.get(a, b).unwrap(), "q={} n={} a={} b={}", t.q, n, a, b);
                }
            }
        }
    }

    #[test]
    fn frozen_curve_counts_over_f3() {
        // n = 2, b = 1: affine counts 6 (a = 1) and 12 (a = 2); projective 7, 13
        let t = tower(3, 1, 2);
        let one = t.from_index(Level::Mid, 1).unwrap();
        let two = t.from_index(Level::Mid, 2).unwrap();
        let zero = t.zero(Level::Mid);
        let g1 = &t.trace_preimages(&one, 1).unwrap()[0];
        let g0 = &t.trace_preimages(&zero, 1).unwrap()[0];
        let a1 = &t.norm_preimages(&one, 1).unwrap()[0];
        let a2 = &t.norm_preimages(&two, 1).unwrap()[0];
        assert_eq!(curve_points_naive(&t, a1.coeffs(), g1.coeffs(), CAP).unwrap() + 1, 7);
        assert_eq!(curve_points_naive(&t, a2.coeffs(), g1.coeffs(), CAP).unwrap() + 1, 13);
        // b = 0: projective 16 (a = 1) and 4 (a = 2)
        assert_eq!(curve_points_naive(&t, a1.coeffs(), g0.coeffs(), CAP).unwrap() + 1, 16);
        assert_eq!(curve_points_naive(&t, a2.coeffs(), g0.coeffs(), CAP).unwrap() + 1, 4);
    }

    #[test]
    fn curve_count_is_independent_of_preimage_choice() {
        let t = tower(3, 1, 3);
        let a = t.from_index(Level::Mid, 2).unwrap();
        let b = t.from_index(Level::Mid, 1).unwrap();
        let alphas = t.norm_preimages(&a, 3).unwrap();
        let gammas = t.trace_preimages(&b, 3).unwrap();
        let reference =
            curve_points_fibered(&t, alphas[0].coeffs(), gammas[0].coeffs(), CAP).unwrap();
        for al in &alphas {
            for ga in &gammas {
                assert_eq!(
                    curve_points_fibered(&t, al.coeffs(), ga.coeffs(), CAP).unwrap(),
                    reference
                );
            }
        }
    }

    #[test]
    fn scale_cap_is_enforced() {
        let t = tower(2, 1, 10);
        assert!(matches!(
            census(&t, 100),
            Err(Error::ScaleExceeded { .. })
        ));
        let alpha = t.top_one_v();
        let gamma = t.top_zero_v();
        assert!(matches!(
            curve_points_naive(&t, &alpha, &gamma, 1000),
            Err(Error::ScaleExceeded { .. })
        ));
    }

    #[test]
    fn pn_direct_small_anchors() {
        // over F_2: P_3(1,1) = 1 (t^3 + t^2 + 1), P_5(1,1) = 3
        let t = tower(2, 1, 3);
        assert_eq!(pn_direct(&t, 1, 1, CAP).unwrap(), 1);
        let t = tower(2, 1, 5);
        assert_eq!(pn_direct(&t, 1, 1, CAP).unwrap(), 3);
        // over F_3, n = 3, trace 1, norm 1
        let t = tower(3, 1, 3);
        assert_eq!(pn_direct(&t, 1, 1, CAP).unwrap(), 1);
        // n = 1: t - a, norm constraint means a = b
        let t = tower(3, 1, 1);
        assert_eq!(pn_direct(&t, 2, 2, CAP).unwrap(), 1);
        assert_eq!(pn_direct(&t, 2, 1, CAP).unwrap(), 0);
    }

    #[test]
    fn pn_matches_root_bookkeeping_over_f2_n2() {
        // t^2 + t + 1 is the only irreducible quadratic over F_2
        let t = tower(2, 1, 2);
        assert_eq!(pn_direct(&t, 1, 1, CAP).unwrap(), 1);
    }
}
