//! Character sums over the mid field and the point-count identities built
//! from them.
//!
//! Multiplicative characters are indexed by j in 0..q-1 through the
//! canonical generator: lambda_j(g^k) = exp(2 pi i jk/(q-1)). Additive
//! characters are indexed by a field element t: chi_t(x) =
//! exp(2 pi i AbsTr(t x)/p), with chi = chi_1 the canonical one.
//!
//! Everything that leaves this module is an integer; complex arithmetic is
//! internal and every count is rounded under an explicit residual check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldtower::FieldTower;

/// Character tables for the mid field of a tower: roots of unity, discrete
/// logs, absolute traces, and the full Gauss sum table.
pub struct CharTable {
    pub q: u64,
    pub p: u64,
    zeta_p: Vec<Complex64>,
    zeta_m: Vec<Complex64>,
    /// dlog base g_mid by element index; u32::MAX at zero.
    dlog: Vec<u32>,
    /// element index of g_mid^t
    exp: Vec<u64>,
    /// absolute trace by element index
    abstr: Vec<u64>,
    /// negation by element index
    neg: Vec<u64>,
    /// gauss[j * q + t_idx] = G(lambda_j, chi_t)
    gauss: Vec<Complex64>,
}

/// Largest mid field the character tables are built for (q^2 complex
/// entries).
pub const CHAR_TABLE_Q_CAP: u64 = 4096;

impl CharTable {
    pub fn new(tower: &FieldTower) -> Result<Self> {
        let (q, p) = (tower.q, tower.p);
        if q > CHAR_TABLE_Q_CAP {
            return Err(Error::ScaleExceeded { size: q as u128, cap: CHAR_TABLE_Q_CAP as u128 });
        }
        let tau = std::f64::consts::TAU;
        let zeta_p: Vec<Complex64> =
            (0..p).map(|r| Complex64::from_polar(1.0, tau * r as f64 / p as f64)).collect();
        let m = q - 1;
        let zeta_m: Vec<Complex64> =
            (0..m).map(|k| Complex64::from_polar(1.0, tau * k as f64 / m as f64)).collect();
        let mut dlog = vec![u32::MAX; q as usize];
        let mut exp = vec![0u64; m as usize];
        let mut abstr = vec![0u64; q as usize];
        let mut neg = vec![0u64; q as usize];
        for idx in 0..q {
            let v = tower.mid_from_index_v(idx);
            if idx != 0 {
                dlog[idx as usize] = tower.mid_dlog_idx(idx).unwrap() as u32;
                exp[dlog[idx as usize] as usize] = idx;
            }
            abstr[idx as usize] = tower.mid_abs_trace_v(&v);
            neg[idx as usize] = tower.mid_index(&tower.mid().neg_v(&v));
        }
        // Base column G(lambda_j, chi) by direct summation, then
        // G(lambda_j, chi_t) = conj(lambda_j)(t) G(lambda_j, chi) for t != 0
        // (substitute c -> c/t in the defining sum), and the degenerate
        // t = 0 column.
        let mut gauss = vec![Complex64::new(0.0, 0.0); (m * q) as usize];
        for j in 0..m {
            let mut base = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let c_idx = exp[k as usize];
                base += zeta_m[(j * k % m) as usize] * zeta_p[abstr[c_idx as usize] as usize];
            }
            for t_idx in 0..q {
                gauss[(j * q + t_idx) as usize] = if t_idx == 0 {
                    if j == 0 {
                        Complex64::new(m as f64, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                } else {
                    let dt = dlog[t_idx as usize] as u64;
                    let lam_bar_t = zeta_m[((m - j * dt % m) % m) as usize];
                    lam_bar_t * base
                };
            }
        }
        Ok(CharTable { q, p, zeta_p, zeta_m, dlog, exp, abstr, neg, gauss })
    }

    /// lambda_j at the element with the given index (nonzero).
    pub fn lambda(&self, j: u64, idx: u64) -> Result<Complex64> {
        if idx == 0 || idx >= self.q {
            return Err(Error::ZeroArgument);
        }
        let k = self.dlog[idx as usize] as u64;
        let m = self.q - 1;
        Ok(self.zeta_m[(j % m * k % m) as usize])
    }

    /// chi_t at the element with the given index.
    pub fn chi(&self, t_idx: u64, x_idx: u64) -> Complex64 {
        if t_idx == 0 || x_idx == 0 {
            return Complex64::new(1.0, 0.0);
        }
        let m = self.q - 1;
        let k = (self.dlog[t_idx as usize] as u64 + self.dlog[x_idx as usize] as u64) % m;
        let prod_idx = self.exp[k as usize];
        self.zeta_p[self.abstr[prod_idx as usize] as usize]
    }

    /// G(lambda_j, chi_t) from the table.
    pub fn gauss_sum(&self, j: u64, t_idx: u64) -> Complex64 {
        let m = self.q - 1;
        self.gauss[((j % m) * self.q + t_idx) as usize]
    }

    /// G(lambda_j, chi_t) by direct summation, bypassing the table fill
    /// rule; kept for cross-checks.
    pub fn gauss_sum_direct(&self, j: u64, t_idx: u64) -> Complex64 {
        let m = self.q - 1;
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..m {
            let c_idx = self.exp[k as usize];
            s += self.zeta_m[(j % m * k % m) as usize] * self.chi(t_idx, c_idx);
        }
        s
    }

    pub fn neg_idx(&self, idx: u64) -> u64 {
        self.neg[idx as usize]
    }

    fn dlog_of(&self, idx: u64) -> u64 {
        self.dlog[idx as usize] as u64
    }
}

/// Round a complex value that should be a (possibly large) integer. The
/// tolerance scales with sqrt of `magnitude`, the natural size of the
/// quantity being rounded.
pub fn round_integral(z: Complex64, magnitude: f64) -> Result<i128> {
    let tolerance = 1e-6 * magnitude.sqrt().max(1.0);
    let nearest = z.re.round();
    let residual = (z.re - nearest).abs().max(z.im.abs());
    if !residual.is_finite() || residual > tolerance {
        return Err(Error::RoundingTooLarge { residual, tolerance });
    }
    Ok(nearest as i128)
}

/// Affine point count of y^q - y = alpha x^(q-1) - gamma via Gauss sums:
///
///   #X = q^n + sum over nontrivial lambda of
///          (-1)^(n-1) G(lambda, chi)^n conj(lambda)(a) G(lambda^(-n), chi_(-b))
///
/// The first factor is the top-field Gauss sum of the norm-lifted
/// character; the last reduces the additive twist by gamma to mid data.
/// Only (a, b) = (norm(alpha), trace(gamma)) enter, as the count is
/// independent of the preimage choice.
pub fn curve_points_char(
    tower: &FieldTower,
    table: &CharTable,
    a_idx: u64,
    b_idx: u64,
) -> Result<u128> {
    let q = tower.q;
    if a_idx == 0 || a_idx >= q || b_idx >= q {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= a < q and 0 <= b < q, got a={a_idx}, b={b_idx}"
        )));
    }
    let n = tower.n as u64;
    let m = q - 1;
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    let minus_b = table.neg_idx(b_idx);
    let da = table.dlog_of(a_idx);
    let mut sum = Complex64::new(tower.qn as f64, 0.0);
    for j in 1..m {
        let lift = table.gauss_sum(j, 1).powu(n as u32) * sign;
        let lam_bar_a = table.zeta_m[((m - j * da % m) % m) as usize];
        let jn = (m - j * n % m) % m;
        sum += lift * lam_bar_a * table.gauss_sum(jn, minus_b);
    }
    let v = round_integral(sum, tower.qn as f64)?;
    u128::try_from(v).map_err(|_| Error::NonIntegerResult { residual: v as f64 })
}

/// N_n(a, b) through the curve count and the incidence identity.
pub fn nn_char(tower: &FieldTower, table: &CharTable, a_idx: u64, b_idx: u64) -> Result<u64> {
    let affine = curve_points_char(tower, table, a_idx, b_idx)?;
    crate::oracle::nn_from_curve_projective(tower, affine + 1, b_idx == 0)
}

/// Number of points on the toric hypersurface
/// x_1 + ... + x_(n-1) + u/(x_1 ... x_(n-1)) = 1 over the nonzero mid
/// elements, by enumeration. Work is (q-1)^(n-1) tuples.
pub fn toric_points_enum(tower: &FieldTower, u_idx: u64, cap: u128) -> Result<u64> {
    let q = tower.q;
    if u_idx == 0 || u_idx >= q {
        return Err(Error::ZeroU);
    }
    let vars = tower.n - 1;
    let work = (q as u128 - 1).pow(vars as u32);
    if work > cap {
        return Err(Error::ScaleExceeded { size: work, cap });
    }
    let mid = tower.mid();
    let u = tower.mid_from_index_v(u_idx);
    let one = mid.one_v();
    // odometer over dlogs of the variables
    let mut ks = vec![0u64; vars];
    let mut count = 0u64;
    loop {
        let mut s = mid.zero_v();
        let mut prod = one.clone();
        for &k in &ks {
            let x = tower.mid_from_index_v(tower.mid_exp_idx(k));
            s = mid.add_v(&s, &x);
            prod = mid.mul_v(&prod, &x);
        }
        let lhs = mid.add_v(&s, &mid.mul_v(&u, &mid.inv_v(&prod)?));
        if lhs == one {
            count += 1;
        }
        let mut done = true;
        for slot in ks.iter_mut() {
            *slot += 1;
            if *slot < q - 1 {
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

/// The same count via Gauss sums:
///
///   q(q-1) #Y_u = (q-1)^n + sum over all lambda of
///                   conj(lambda)((-1)^n u) G(lambda, chi)^n G(lambda^(-n), chi)
///
/// with the trivial-character convention G(lambda_0, chi) = -1.
pub fn toric_points_char(tower: &FieldTower, table: &CharTable, u_idx: u64) -> Result<u64> {
    let q = tower.q;
    if u_idx == 0 || u_idx >= q {
        return Err(Error::ZeroU);
    }
    let n = tower.n as u64;
    let m = q - 1;
    let trivial = Complex64::new(-1.0, 0.0);
    let sign_u = if n % 2 == 0 { u_idx } else { table.neg_idx(u_idx) };
    let du = table.dlog_of(sign_u);
    let mut sum = Complex64::new(((q - 1) as f64).powi(tower.n as i32), 0.0);
    for j in 0..m {
        let g1 = if j == 0 { trivial } else { table.gauss_sum(j, 1) };
        let jn = (m - j * n % m) % m;
        let g2 = if jn == 0 { trivial } else { table.gauss_sum(jn, 1) };
        let lam_bar_u = table.zeta_m[((m - j * du % m) % m) as usize];
        sum += lam_bar_u * g1.powu(n as u32) * g2;
    }
    let v = round_integral(sum, (q as f64).powi(tower.n as i32))?;
    let den = (q * (q - 1)) as i128;
    if v < 0 || v % den != 0 {
        return Err(Error::NonIntegerResult { residual: v as f64 });
    }
    Ok((v / den) as u64)
}

/// N_n(a, b) for b != 0 through the toric count at u = a / b^n:
///
///   N = (q^(n-1) - 1)/(q - 1)
///       + (-1)^(n-1) (#Y_u - ((q-1)^(n-1) - (-1)^(n-1))/q)
pub fn nn_via_toric(
    tower: &FieldTower,
    table: &CharTable,
    a_idx: u64,
    b_idx: u64,
    enumerate: bool,
    cap: u128,
) -> Result<u64> {
    let q = tower.q;
    if a_idx == 0 || a_idx >= q || b_idx >= q {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= a < q and 0 <= b < q, got a={a_idx}, b={b_idx}"
        )));
    }
    if b_idx == 0 {
        return Err(Error::InvalidParameter(
            "the toric route is defined for b != 0 only".into(),
        ));
    }
    let mid = tower.mid();
    let b = tower.mid_from_index_v(b_idx);
    let bn = mid.pow_v(&b, tower.n as u64);
    let u = mid.mul_v(&tower.mid_from_index_v(a_idx), &mid.inv_v(&bn)?);
    let u_idx = tower.mid_index(&u);
    let y = if enumerate {
        toric_points_enum(tower, u_idx, cap)?
    } else {
        toric_points_char(tower, table, u_idx)?
    };
    let n = tower.n as u32;
    let sign: i128 = if n % 2 == 0 { -1 } else { 1 };
    let base = ((q as i128).pow(n - 1) - 1) / (q as i128 - 1);
    let centered = ((q as i128 - 1).pow(n - 1) - sign) / q as i128;
    let v = base + sign * (y as i128 - centered);
    u64::try_from(v).map_err(|_| Error::NonIntegerResult { residual: v as f64 })
}

/// Gauss sum of the norm lift of lambda_j over the top field, by direct
/// summation (q^n - 1 terms). Diagnostic companion to the lifting identity
/// G(lift lambda) = (-1)^(n-1) G(lambda)^n.
pub fn lifted_gauss_direct(tower: &FieldTower, table: &CharTable, j: u64, cap: u128) -> Result<Complex64> {
    if tower.qn as u128 > cap {
        return Err(Error::ScaleExceeded { size: tower.qn as u128, cap });
    }
    let m = tower.q - 1;
    let g = tower.g_top_v().to_vec();
    let mut z = tower.top_one_v();
    let mut out = tower.top_zero_v();
    let mut acc = vec![0u64; tower.e * (2 * tower.n - 1)];
    let step = tower.norm_g_step();
    let mut norm_dlog = 0u64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..tower.qn - 1 {
        let lam = table.zeta_m[(j % m * norm_dlog % m) as usize];
        let tr = tower.mid_abs_trace_v(&tower.trace_flat_v(&z));
        sum += lam * table.zeta_p[tr as usize];
        if k + 1 < tower.qn - 1 {
            if tower.n == 1 {
                z = tower.mid().mul_v(&z, &g);
            } else {
                tower.top_mul_flat(&z, &g, &mut out, &mut acc);
                std::mem::swap(&mut z, &mut out);
            }
            norm_dlog += step;
            if norm_dlog >= m {
                norm_dlog -= m;
            }
        }
    }
    Ok(sum)
}
