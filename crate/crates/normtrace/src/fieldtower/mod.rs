//! Two-level finite field tower F_p < F_q < F_{q^n} with explicit,
//! reproducible construction.
//!
//! Both extension moduli are found by a canonical search: among monic
//! polynomials of the required degree, candidates are ordered by the index
//! `sum_i c_i * r^i` of their low coefficient vector (r = p for the base
//! step, r = q for the top step) and the first irreducible one wins. The
//! construction therefore depends only on (p, e, n); the seed is recorded
//! for output provenance but never consulted.
//!
//! Element representation is a flattened little-endian coefficient vector
//! over F_p: length 1 (base), e (mid, coefficients of x), or e*n (top,
//! n chunks of e, chunk i holding the F_q coefficient of y^i).

pub mod poly;

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use poly::CoeffField;

/// Largest supported base-extension degree e.
pub const E_MAX: usize = 12;
/// Scratch length for an unreduced mid product (degree 2e-2).
const MID_TMP: usize = 2 * E_MAX - 1;
/// Hard cap on q^n; keeps every index and exponent comfortably in u64.
const QN_CAP: u128 = 1 << 40;
/// Hard cap on q itself (table sizes are O(q)).
const Q_CAP: u64 = 1 << 20;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum Level {
    Base,
    Mid,
    Top,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Base => "base",
            Level::Mid => "mid",
            Level::Top => "top",
        }
    }
}

/// An element of one level of the tower. Only meaningful together with the
/// tower that produced it; mixing towers is a caller error.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct FieldElement {
    pub level: Level,
    pub(crate) coeffs: Vec<u64>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
}

pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d as u128 * d as u128 <= m as u128 {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Inverse of x modulo m for gcd(x, m) = 1, via extended Euclid.
fn inv_mod_u64(x: u64, m: u64) -> u64 {
    let (mut a, mut b) = (x as i128, m as i128);
    let (mut u, mut v) = (1i128, 0i128);
    while b != 0 {
        let t = a / b;
        a -= t * b;
        std::mem::swap(&mut a, &mut b);
        u -= t * v;
        std::mem::swap(&mut u, &mut v);
    }
    debug_assert_eq!(a, 1);
    (u.rem_euclid(m as i128)) as u64
}

fn decode_digits(mut idx: u64, radix: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for slot in out.iter_mut() {
        *slot = idx % radix;
        idx /= radix;
    }
    debug_assert_eq!(idx, 0);
    out
}

fn encode_digits(digits: &[u64], radix: u64) -> u64 {
    let mut idx = 0u64;
    for &d in digits.iter().rev() {
        idx = idx * radix + d;
    }
    idx
}

/// F_p as a coefficient field for the base modulus search.
struct PrimeCtx {
    p: u64,
}

impl CoeffField for PrimeCtx {
    type El = u64;

    fn order(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        (x + y) % self.p
    }
    fn sub(&self, x: &u64, y: &u64) -> u64 {
        (x + self.p - y) % self.p
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        x * y % self.p
    }
    fn inv(&self, x: &u64) -> u64 {
        pow_mod_u64(*x, self.p - 2, self.p)
    }
}

/// Arithmetic in F_q = F_p[x]/(base modulus); elements are fixed-length
/// coefficient slices of length e.
pub(crate) struct MidOps {
    pub p: u64,
    pub e: usize,
    /// Low e coefficients of the monic base modulus.
    pub base_low: Vec<u64>,
}

impl MidOps {
    /// Reduced product of two mid elements, left in tmp[..e].
    fn mul_into(&self, a: &[u64], b: &[u64], tmp: &mut [u64; MID_TMP]) {
        let (e, p) = (self.e, self.p);
        tmp[..2 * e - 1].fill(0);
        for i in 0..e {
            if a[i] == 0 {
                continue;
            }
            for j in 0..e {
                tmp[i + j] = (tmp[i + j] + a[i] * b[j]) % p;
            }
        }
        for k in (e..2 * e - 1).rev() {
            let c = tmp[k];
            if c == 0 {
                continue;
            }
            tmp[k] = 0;
            for j in 0..e {
                tmp[k - e + j] = (tmp[k - e + j] + c * (p - self.base_low[j]) % p) % p;
            }
        }
    }

    pub fn mul_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut tmp = [0u64; MID_TMP];
        self.mul_into(a, b, &mut tmp);
        tmp[..self.e].to_vec()
    }

    pub fn add_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub fn sub_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub fn neg_v(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    pub fn scale_v(&self, a: &[u64], c: u64) -> Vec<u64> {
        a.iter().map(|x| x * c % self.p).collect()
    }

    pub fn zero_v(&self) -> Vec<u64> {
        vec![0; self.e]
    }

    pub fn one_v(&self) -> Vec<u64> {
        let mut v = vec![0; self.e];
        v[0] = 1;
        v
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn pow_v(&self, a: &[u64], mut exp: u64) -> Vec<u64> {
        let mut result = self.one_v();
        let mut base = a.to_vec();
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul_v(&result, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul_v(&base, &base);
            }
        }
        result
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.e as u32)
    }

    pub fn inv_v(&self, a: &[u64]) -> Result<Vec<u64>> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow_v(a, self.q() - 2))
    }
}

/// View of MidOps as a coefficient field (for the top modulus search and
/// irreducibility tests over F_q). Elements are length-e vectors.
struct MidCtxView<'a>(&'a MidOps);

impl CoeffField for MidCtxView<'_> {
    type El = Vec<u64>;

    fn order(&self) -> u64 {
        self.0.q()
    }
    fn zero(&self) -> Vec<u64> {
        self.0.zero_v()
    }
    fn one(&self) -> Vec<u64> {
        self.0.one_v()
    }
    fn is_zero(&self, x: &Vec<u64>) -> bool {
        self.0.is_zero(x)
    }
    fn add(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        self.0.add_v(x, y)
    }
    fn sub(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        self.0.sub_v(x, y)
    }
    fn mul(&self, x: &Vec<u64>, y: &Vec<u64>) -> Vec<u64> {
        self.0.mul_v(x, y)
    }
    fn inv(&self, x: &Vec<u64>) -> Vec<u64> {
        self.0.inv_v(x).expect("inverse of zero coefficient")
    }
}

pub struct FieldTower {
    pub p: u64,
    pub e: usize,
    pub n: usize,
    pub q: u64,
    pub qn: u64,
    pub seed: u64,
    mid: MidOps,
    /// Monic base modulus, all e+1 coefficients.
    base_full: Vec<u64>,
    /// Monic top modulus, all n+1 coefficients as mid vectors.
    top_full: Vec<Vec<u64>>,
    /// Low n chunks of the top modulus, flattened (length e*n).
    top_low_flat: Vec<u64>,
    /// Canonical generator of the mid multiplicative group.
    g_mid: Vec<u64>,
    /// Canonical generator of the top multiplicative group (flattened).
    g_top: Vec<u64>,
    /// trace(y^i) for i < n, flattened mid vectors (length e*n).
    trace_basis_flat: Vec<u64>,
    /// AbsTrace(x^i) for i < e, as scalars mod p.
    abstr_basis: Vec<u64>,
    /// Discrete log base g_mid by mid element index; u32::MAX at index 0.
    mid_dlog: Vec<u32>,
    /// Inverse table: t -> index of g_mid^t (length q-1).
    mid_exp: Vec<u64>,
    /// dlog of norm(g_top) base g_mid; coprime to q-1.
    norm_g_step: u64,
    fact_qn1: Vec<u64>,
    /// Baby-step table for top discrete logs, built on first use.
    bsgs: OnceLock<(u64, HashMap<u64, u64>)>,
}

impl FieldTower {
    pub fn build(p: u64, e: usize, n: usize, seed: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p >= Q_CAP {
            return Err(Error::InvalidParameter(format!(
                "characteristic {p} too large; this tower supports p < 2^20"
            )));
        }
        if e == 0 || e > E_MAX {
            return Err(Error::InvalidParameter(format!(
                "extension degree e={e} outside 1..={E_MAX}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("top degree n must be >= 1".into()));
        }
        let mut q: u64 = 1;
        for _ in 0..e {
            q = q.checked_mul(p).filter(|&v| v <= Q_CAP).ok_or_else(|| {
                Error::InvalidParameter(format!("q = p^e exceeds 2^20 for p={p}, e={e}"))
            })?;
        }
        let mut qn_big: u128 = 1;
        for _ in 0..n {
            qn_big = qn_big
                .checked_mul(q as u128)
                .filter(|&v| v <= QN_CAP)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "q^n exceeds 2^40 for q={q}, n={n}; tower would be unusable"
                    ))
                })?;
        }
        let qn = qn_big as u64;

        // Base modulus: first irreducible monic degree-e polynomial over F_p
        // by low-coefficient index.
        let pctx = PrimeCtx { p };
        let mut base_full = Vec::new();
        for idx in 0..p.pow(e as u32) {
            let mut cand = decode_digits(idx, p, e);
            cand.push(1);
            if poly::is_irreducible(&pctx, &cand) {
                base_full = cand;
                break;
            }
        }
        assert!(!base_full.is_empty(), "no irreducible base modulus found");
        let mid = MidOps { p, e, base_low: base_full[..e].to_vec() };

        // Top modulus: same search over F_q.
        let view = MidCtxView(&mid);
        let mut top_full: Vec<Vec<u64>> = Vec::new();
        for idx in 0..qn {
            let digits = decode_digits(idx, q, n);
            let mut cand: Vec<Vec<u64>> =
                digits.iter().map(|&d| decode_digits(d, p, e)).collect();
            cand.push(mid.one_v());
            if poly::is_irreducible(&view, &cand) {
                top_full = cand;
                break;
            }
        }
        assert!(!top_full.is_empty(), "no irreducible top modulus found");
        let mut top_low_flat = Vec::with_capacity(e * n);
        for chunk in &top_full[..n] {
            top_low_flat.extend_from_slice(chunk);
        }

        let mut tower = FieldTower {
            p,
            e,
            n,
            q,
            qn,
            seed,
            mid,
            base_full,
            top_full,
            top_low_flat,
            g_mid: Vec::new(),
            g_top: Vec::new(),
            trace_basis_flat: Vec::new(),
            abstr_basis: Vec::new(),
            mid_dlog: Vec::new(),
            mid_exp: Vec::new(),
            norm_g_step: 0,
            fact_qn1: prime_factors(qn - 1),
            bsgs: OnceLock::new(),
        };

        // Smallest-index generators of both multiplicative groups.
        let fact_q1 = prime_factors(q - 1);
        tower.g_mid = (1..q)
            .map(|idx| decode_digits(idx, p, e))
            .find(|el| {
                fact_q1
                    .iter()
                    .all(|&l| !tower.mid.is_zero(&tower.mid.sub_v(&tower.mid.pow_v(el, (q - 1) / l), &tower.mid.one_v())))
            })
            .expect("multiplicative group of the mid field has a generator");
        let fact_qn1 = tower.fact_qn1.clone();
        tower.g_top = (1..qn)
            .map(|idx| decode_digits(idx, p, e * n))
            .find(|el| {
                fact_qn1.iter().all(|&l| {
                    let w = tower.top_pow_v(el, (qn - 1) / l);
                    !tower.top_is_one(&w)
                })
            })
            .expect("multiplicative group of the top field has a generator");

        // Trace basis: trace(y^i) via explicit Frobenius orbit sums. The
        // subfield assertion doubles as a consistency check on the tower.
        let mut yi = tower.top_one_v();
        let y = tower.y_v();
        let mut trace_basis_flat = Vec::with_capacity(e * n);
        for i in 0..n {
            if i > 0 {
                yi = tower.top_mul_v(&yi, &y);
            }
            let mut s = yi.clone();
            let mut t = yi.clone();
            for _ in 1..n {
                t = tower.top_frob_v(&t);
                s = tower.top_add_v(&s, &t);
            }
            assert!(
                s[e..].iter().all(|&c| c == 0),
                "trace of a top element must lie in the mid field"
            );
            trace_basis_flat.extend_from_slice(&s[..e]);
        }
        tower.trace_basis_flat = trace_basis_flat;

        // AbsTrace basis: trace of x^i from F_q down to F_p.
        let mut abstr_basis = Vec::with_capacity(e);
        for i in 0..e {
            let mut xi = tower.mid.zero_v();
            xi[i] = 1;
            let mut s = xi.clone();
            let mut t = xi;
            for _ in 1..e {
                t = tower.mid.pow_v(&t, p);
                s = tower.mid.add_v(&s, &t);
            }
            assert!(
                s[1..].iter().all(|&c| c == 0),
                "absolute trace of a mid element must lie in the prime field"
            );
            abstr_basis.push(s[0]);
        }
        tower.abstr_basis = abstr_basis;

        // Discrete log and exponent tables for the mid group.
        let mut mid_dlog = vec![u32::MAX; q as usize];
        let mut mid_exp = vec![0u64; (q - 1) as usize];
        let mut cur = tower.mid.one_v();
        for t in 0..q - 1 {
            let idx = encode_digits(&cur, p);
            assert_eq!(mid_dlog[idx as usize], u32::MAX, "generator order defect");
            mid_dlog[idx as usize] = t as u32;
            mid_exp[t as usize] = idx;
            cur = tower.mid.mul_v(&cur, &tower.g_mid);
        }
        tower.mid_dlog = mid_dlog;
        tower.mid_exp = mid_exp;

        // norm(g_top) generates the mid group; record its dlog.
        let ng = tower.norm_flat_v(&tower.g_top);
        let ng_idx = encode_digits(&ng, p);
        let step = tower.mid_dlog[ng_idx as usize];
        assert_ne!(step, u32::MAX, "norm of the top generator must be nonzero");
        tower.norm_g_step = step as u64;
        if q > 2 {
            assert_eq!(
                num_integer::gcd(tower.norm_g_step, q - 1),
                1,
                "norm of a top generator must generate the mid group"
            );
        }

        Ok(tower)
    }

    // ----- flattened internal operations -----

    pub(crate) fn mid(&self) -> &MidOps {
        &self.mid
    }

    pub(crate) fn top_len(&self) -> usize {
        self.e * self.n
    }

    pub(crate) fn top_zero_v(&self) -> Vec<u64> {
        vec![0; self.top_len()]
    }

    pub(crate) fn top_one_v(&self) -> Vec<u64> {
        let mut v = self.top_zero_v();
        v[0] = 1;
        v
    }

    /// The top generator element y (the class of the top variable); for
    /// n = 1 the top field is the mid field and y is its constant image,
    /// i.e. -top_full[0].
    fn y_v(&self) -> Vec<u64> {
        if self.n == 1 {
            return self.mid.neg_v(&self.top_full[0]);
        }
        let mut v = self.top_zero_v();
        v[self.e] = 1;
        v
    }

    pub(crate) fn top_is_one(&self, a: &[u64]) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub(crate) fn top_is_zero(&self, a: &[u64]) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub(crate) fn top_add_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }

    pub(crate) fn top_sub_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + self.p - y) % self.p).collect()
    }

    pub(crate) fn top_neg_v(&self, a: &[u64]) -> Vec<u64> {
        a.iter().map(|x| (self.p - x) % self.p).collect()
    }

    /// Reduced top product. `acc` is scratch of length e*(2n-1).
    pub(crate) fn top_mul_flat(&self, a: &[u64], b: &[u64], out: &mut [u64], acc: &mut [u64]) {
        let (e, n, p) = (self.e, self.n, self.p);
        acc.fill(0);
        let mut tmp = [0u64; MID_TMP];
        for i in 0..n {
            let ai = &a[i * e..(i + 1) * e];
            if ai.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..n {
                let bj = &b[j * e..(j + 1) * e];
                if bj.iter().all(|&c| c == 0) {
                    continue;
                }
                self.mid.mul_into(ai, bj, &mut tmp);
                let dst = &mut acc[(i + j) * e..(i + j + 1) * e];
                for t in 0..e {
                    dst[t] = (dst[t] + tmp[t]) % p;
                }
            }
        }
        for k in (n..2 * n - 1).rev() {
            let c: Vec<u64> = acc[k * e..(k + 1) * e].to_vec();
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            acc[k * e..(k + 1) * e].fill(0);
            for j in 0..n {
                let mj = &self.top_low_flat[j * e..(j + 1) * e];
                if mj.iter().all(|&v| v == 0) {
                    continue;
                }
                self.mid.mul_into(&c, mj, &mut tmp);
                let dst = &mut acc[(k - n + j) * e..(k - n + j + 1) * e];
                for t in 0..e {
                    dst[t] = (dst[t] + p - tmp[t]) % p;
                }
            }
        }
        out.copy_from_slice(&acc[..e * n]);
    }

    pub(crate) fn top_mul_v(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if self.n == 1 {
            return self.mid.mul_v(a, b);
        }
        let mut out = self.top_zero_v();
        let mut acc = vec![0u64; self.e * (2 * self.n - 1)];
        self.top_mul_flat(a, b, &mut out, &mut acc);
        out
    }

    pub(crate) fn top_pow_v(&self, a: &[u64], mut exp: u64) -> Vec<u64> {
        let mut result = self.top_one_v();
        let mut base = a.to_vec();
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.top_mul_v(&result, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.top_mul_v(&base, &base);
            }
        }
        result
    }

    pub(crate) fn top_inv_v(&self, a: &[u64]) -> Result<Vec<u64>> {
        if self.top_is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(self.top_pow_v(a, self.qn - 2))
    }

    pub(crate) fn top_frob_v(&self, a: &[u64]) -> Vec<u64> {
        self.top_pow_v(a, self.q)
    }

    /// Trace to the mid field, linear in the chunk decomposition.
    pub(crate) fn trace_flat_v(&self, z: &[u64]) -> Vec<u64> {
        let e = self.e;
        let mut tmp = [0u64; MID_TMP];
        let mut s = self.mid.zero_v();
        for i in 0..self.n {
            let zi = &z[i * e..(i + 1) * e];
            if zi.iter().all(|&c| c == 0) {
                continue;
            }
            self.mid.mul_into(zi, &self.trace_basis_flat[i * e..(i + 1) * e], &mut tmp);
            for t in 0..e {
                s[t] = (s[t] + tmp[t]) % self.p;
            }
        }
        s
    }

    /// Norm to the mid field via the Frobenius conjugate product.
    pub(crate) fn norm_flat_v(&self, z: &[u64]) -> Vec<u64> {
        let mut acc = z.to_vec();
        let mut t = z.to_vec();
        for _ in 1..self.n {
            t = self.top_frob_v(&t);
            acc = self.top_mul_v(&acc, &t);
        }
        assert!(
            acc[self.e..].iter().all(|&c| c == 0),
            "norm of a top element must lie in the mid field"
        );
        acc.truncate(self.e);
        acc
    }

    pub(crate) fn mid_abs_trace_v(&self, a: &[u64]) -> u64 {
        let mut s = 0u64;
        for i in 0..self.e {
            s = (s + a[i] * self.abstr_basis[i]) % self.p;
        }
        s
    }

    pub(crate) fn mid_index(&self, a: &[u64]) -> u64 {
        encode_digits(a, self.p)
    }

    pub(crate) fn mid_from_index_v(&self, idx: u64) -> Vec<u64> {
        decode_digits(idx, self.p, self.e)
    }

    pub(crate) fn top_index(&self, a: &[u64]) -> u64 {
        encode_digits(a, self.p)
    }

    pub(crate) fn top_from_index_v(&self, idx: u64) -> Vec<u64> {
        decode_digits(idx, self.p, self.top_len())
    }

    /// Base-p odometer over a flattened coefficient vector; returns false
    /// once the vector wraps back to zero.
    pub(crate) fn next_flat(&self, z: &mut [u64]) -> bool {
        for slot in z.iter_mut() {
            *slot += 1;
            if *slot < self.p {
                return true;
            }
            *slot = 0;
        }
        false
    }

    pub(crate) fn mid_dlog_idx(&self, idx: u64) -> Option<u64> {
        let t = self.mid_dlog[idx as usize];
        if t == u32::MAX {
            None
        } else {
            Some(t as u64)
        }
    }

    /// Index of g_mid^t.
    pub(crate) fn mid_exp_idx(&self, t: u64) -> u64 {
        self.mid_exp[(t % (self.q - 1)) as usize]
    }

    pub(crate) fn g_mid_v(&self) -> &[u64] {
        &self.g_mid
    }

    pub(crate) fn g_top_v(&self) -> &[u64] {
        &self.g_top
    }

    /// dlog of norm(g_top) base g_mid.
    pub(crate) fn norm_g_step(&self) -> u64 {
        self.norm_g_step
    }

    // ----- public element API -----

    pub fn element_count(&self, level: Level) -> u64 {
        match level {
            Level::Base => self.p,
            Level::Mid => self.q,
            Level::Top => self.qn,
        }
    }

    fn level_len(&self, level: Level) -> usize {
        match level {
            Level::Base => 1,
            Level::Mid => self.e,
            Level::Top => self.top_len(),
        }
    }

    fn check_level(&self, el: &FieldElement, want: Level) -> Result<()> {
        if el.level != want {
            return Err(Error::LevelMismatch { expected: want.name(), got: el.level.name() });
        }
        debug_assert_eq!(el.coeffs.len(), self.level_len(want));
        Ok(())
    }

    fn check_same(&self, a: &FieldElement, b: &FieldElement) -> Result<Level> {
        if a.level != b.level {
            return Err(Error::LevelMismatch { expected: a.level.name(), got: b.level.name() });
        }
        Ok(a.level)
    }

    pub fn zero(&self, level: Level) -> FieldElement {
        FieldElement { level, coeffs: vec![0; self.level_len(level)] }
    }

    pub fn one(&self, level: Level) -> FieldElement {
        let mut coeffs = vec![0; self.level_len(level)];
        coeffs[0] = 1;
        FieldElement { level, coeffs }
    }

    pub fn from_index(&self, level: Level, idx: u64) -> Result<FieldElement> {
        if idx >= self.element_count(level) {
            return Err(Error::InvalidParameter(format!(
                "element index {idx} out of range for the {} level",
                level.name()
            )));
        }
        Ok(FieldElement { level, coeffs: decode_digits(idx, self.p, self.level_len(level)) })
    }

    pub fn index(&self, el: &FieldElement) -> u64 {
        encode_digits(&el.coeffs, self.p)
    }

    pub fn is_zero(&self, el: &FieldElement) -> bool {
        el.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let level = self.check_same(a, b)?;
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + y) % self.p).collect();
        Ok(FieldElement { level, coeffs })
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let level = self.check_same(a, b)?;
        let coeffs =
            a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x + self.p - y) % self.p).collect();
        Ok(FieldElement { level, coeffs })
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        FieldElement {
            level: a.level,
            coeffs: a.coeffs.iter().map(|x| (self.p - x) % self.p).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let level = self.check_same(a, b)?;
        let coeffs = match level {
            Level::Base => vec![a.coeffs[0] * b.coeffs[0] % self.p],
            Level::Mid => self.mid.mul_v(&a.coeffs, &b.coeffs),
            Level::Top => self.top_mul_v(&a.coeffs, &b.coeffs),
        };
        Ok(FieldElement { level, coeffs })
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        let coeffs = match a.level {
            Level::Base => vec![pow_mod_u64(a.coeffs[0], self.p - 2, self.p)],
            Level::Mid => self.mid.inv_v(&a.coeffs)?,
            Level::Top => self.top_inv_v(&a.coeffs)?,
        };
        Ok(FieldElement { level: a.level, coeffs })
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        let bi = self.inv(b)?;
        self.mul(a, &bi)
    }

    pub fn pow(&self, a: &FieldElement, exp: u64) -> FieldElement {
        let coeffs = match a.level {
            Level::Base => vec![pow_mod_u64(a.coeffs[0], exp, self.p)],
            Level::Mid => self.mid.pow_v(&a.coeffs, exp),
            Level::Top => self.top_pow_v(&a.coeffs, exp),
        };
        FieldElement { level: a.level, coeffs }
    }

    /// Raise an element one or two levels (base -> mid -> top) as a
    /// subfield constant.
    pub fn embed(&self, a: &FieldElement, target: Level) -> Result<FieldElement> {
        let order = |l: Level| match l {
            Level::Base => 0,
            Level::Mid => 1,
            Level::Top => 2,
        };
        if order(a.level) > order(target) {
            return Err(Error::LevelMismatch { expected: target.name(), got: a.level.name() });
        }
        let mut coeffs = vec![0; self.level_len(target)];
        coeffs[..a.coeffs.len()].copy_from_slice(&a.coeffs);
        Ok(FieldElement { level: target, coeffs })
    }

    pub fn frobenius(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check_level(a, Level::Top)?;
        Ok(FieldElement { level: Level::Top, coeffs: self.top_frob_v(&a.coeffs) })
    }

    pub fn trace(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check_level(a, Level::Top)?;
        Ok(FieldElement { level: Level::Mid, coeffs: self.trace_flat_v(&a.coeffs) })
    }

    pub fn norm(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check_level(a, Level::Top)?;
        Ok(FieldElement { level: Level::Mid, coeffs: self.norm_flat_v(&a.coeffs) })
    }

    /// Absolute trace down to F_p, as a scalar in 0..p.
    pub fn abs_trace(&self, a: &FieldElement) -> Result<u64> {
        match a.level {
            Level::Base => Ok(a.coeffs[0]),
            Level::Mid => Ok(self.mid_abs_trace_v(&a.coeffs)),
            Level::Top => Ok(self.mid_abs_trace_v(&self.trace_flat_v(&a.coeffs))),
        }
    }

    pub fn generator(&self, level: Level) -> Result<FieldElement> {
        match level {
            Level::Base => Err(Error::InvalidParameter(
                "canonical generators are kept for the mid and top levels".into(),
            )),
            Level::Mid => Ok(FieldElement { level, coeffs: self.g_mid.clone() }),
            Level::Top => Ok(FieldElement { level, coeffs: self.g_top.clone() }),
        }
    }

    /// Discrete log base the canonical generator of the element's level.
    pub fn discrete_log(&self, a: &FieldElement) -> Result<u64> {
        if self.is_zero(a) {
            return Err(Error::ZeroArgument);
        }
        match a.level {
            Level::Base => Err(Error::InvalidParameter(
                "discrete logs are kept for the mid and top levels".into(),
            )),
            Level::Mid => Ok(self.mid_dlog_idx(self.mid_index(&a.coeffs)).unwrap()),
            Level::Top => Ok(self.top_dlog_v(&a.coeffs)),
        }
    }

    /// Baby-step/giant-step over the top group.
    pub(crate) fn top_dlog_v(&self, z: &[u64]) -> u64 {
        let ord = self.qn - 1;
        if ord == 1 {
            return 0;
        }
        let (m, baby) = self.bsgs.get_or_init(|| {
            let m = (ord as f64).sqrt().ceil() as u64;
            let mut table = HashMap::with_capacity(m as usize);
            let mut cur = self.top_one_v();
            for j in 0..m {
                table.entry(self.top_index(&cur)).or_insert(j);
                cur = self.top_mul_v(&cur, &self.g_top);
            }
            (m, table)
        });
        // giant factor g^(-m)
        let giant = self.top_pow_v(&self.top_inv_v(&self.g_top).unwrap(), *m);
        let mut cur = z.to_vec();
        for i in 0..=(ord / m + 1) {
            if let Some(&j) = baby.get(&self.top_index(&cur)) {
                return (i * m + j) % ord;
            }
            cur = self.top_mul_v(&cur, &giant);
        }
        unreachable!("discrete log search exhausted the group");
    }

    /// Irreducibility of a polynomial with all coefficients at the base or
    /// mid level (little-endian coefficient order).
    pub fn is_irreducible(&self, coeffs: &[FieldElement]) -> Result<bool> {
        if coeffs.is_empty() {
            return Ok(false);
        }
        let level = coeffs[0].level;
        if level == Level::Top {
            return Err(Error::InvalidParameter(
                "irreducibility testing covers base- and mid-level coefficients".into(),
            ));
        }
        for c in coeffs {
            self.check_level(c, level)?;
        }
        match level {
            Level::Base => {
                let pctx = PrimeCtx { p: self.p };
                let v: Vec<u64> = coeffs.iter().map(|c| c.coeffs[0]).collect();
                Ok(poly::is_irreducible(&pctx, &v))
            }
            Level::Mid => {
                let view = MidCtxView(&self.mid);
                let v: Vec<Vec<u64>> = coeffs.iter().map(|c| c.coeffs.clone()).collect();
                Ok(poly::is_irreducible(&view, &v))
            }
            Level::Top => unreachable!(),
        }
    }

    /// `count` distinct top elements of norm `a` (mid level, nonzero).
    pub fn norm_preimages(&self, a: &FieldElement, count: usize) -> Result<Vec<FieldElement>> {
        self.check_level(a, Level::Mid)?;
        if self.is_zero(a) {
            return Err(Error::ZeroArgument);
        }
        let fiber = (self.qn - 1) / (self.q - 1);
        if count as u64 > fiber {
            return Err(Error::InvalidParameter(format!(
                "norm fiber has only {fiber} elements, {count} requested"
            )));
        }
        let da = self.mid_dlog_idx(self.mid_index(&a.coeffs)).unwrap();
        let m0 = if self.q == 2 {
            0
        } else {
            da * inv_mod_u64(self.norm_g_step, self.q - 1) % (self.q - 1)
        };
        let mut out = Vec::with_capacity(count);
        for k in 0..count as u64 {
            let z = self.top_pow_v(&self.g_top, (m0 + k * (self.q - 1)) % (self.qn - 1).max(1));
            out.push(FieldElement { level: Level::Top, coeffs: z });
        }
        Ok(out)
    }

    /// `count` distinct top elements of trace `b` (mid level).
    pub fn trace_preimages(&self, b: &FieldElement, count: usize) -> Result<Vec<FieldElement>> {
        self.check_level(b, Level::Mid)?;
        let fiber = self.qn / self.q;
        if count as u64 > fiber {
            return Err(Error::InvalidParameter(format!(
                "trace fiber has only {fiber} elements, {count} requested"
            )));
        }
        // Seed preimage: (b / trace(y^i)) * y^i for the first basis element
        // with nonvanishing trace; the rest differ by trace-kernel elements.
        let e = self.e;
        let i0 = (0..self.n)
            .find(|&i| !self.mid.is_zero(&self.trace_basis_flat[i * e..(i + 1) * e]))
            .expect("trace form is nonzero on some power basis element");
        let ti = self.trace_basis_flat[i0 * e..(i0 + 1) * e].to_vec();
        let scale = self.mid.mul_v(&b.coeffs, &self.mid.inv_v(&ti)?);
        let mut seed = self.top_zero_v();
        seed[i0 * e..(i0 + 1) * e].copy_from_slice(&scale);
        debug_assert_eq!(self.trace_flat_v(&seed), b.coeffs);

        let mut out = Vec::with_capacity(count);
        let mut w = self.top_zero_v();
        loop {
            if self.mid.is_zero(&self.trace_flat_v(&w)) {
                out.push(FieldElement { level: Level::Top, coeffs: self.top_add_v(&seed, &w) });
                if out.len() == count {
                    break;
                }
            }
            if !self.next_flat(&mut w) {
                unreachable!("trace kernel smaller than its cardinality");
            }
        }
        Ok(out)
    }

    // ----- provenance display -----

    pub fn base_modulus_index(&self) -> u64 {
        encode_digits(&self.base_full[..self.e], self.p)
    }

    pub fn top_modulus_index(&self) -> u64 {
        let digits: Vec<u64> =
            self.top_full[..self.n].iter().map(|c| encode_digits(c, self.p)).collect();
        encode_digits(&digits, self.q)
    }

    pub fn base_modulus_display(&self) -> String {
        let mut terms = Vec::new();
        for k in (0..=self.e).rev() {
            let c = self.base_full.get(k).copied().unwrap_or(0);
            let c = if k == self.e { 1 } else { c };
            if c == 0 {
                continue;
            }
            terms.push(scalar_term(c, "x", k));
        }
        terms.join(" + ")
    }

    pub fn top_modulus_display(&self) -> String {
        let mut terms = Vec::new();
        for k in (0..=self.n).rev() {
            let c = &self.top_full[k];
            if self.mid.is_zero(c) && k != self.n {
                continue;
            }
            if k == self.n {
                terms.push(scalar_term(1, "y", k));
            } else if self.e == 1 {
                terms.push(scalar_term(c[0], "y", k));
            } else {
                let idx = encode_digits(c, self.p);
                match k {
                    0 => terms.push(format!("({idx})")),
                    _ => terms.push(format!("({idx}){}", var_pow("y", k))),
                }
            }
        }
        terms.join(" + ")
    }
}

fn var_pow(var: &str, k: usize) -> String {
    match k {
        0 => "1".to_string(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

fn scalar_term(c: u64, var: &str, k: usize) -> String {
    match (c, k) {
        (_, 0) => format!("{c}"),
        (1, _) => var_pow(var, k),
        _ => format!("{c}{}", var_pow(var, k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_moduli_for_f27() {
        let t = FieldTower::build(3, 1, 3, 0).unwrap();
        assert_eq!(t.base_modulus_index(), 0); // base step is x itself for e = 1
        assert_eq!(t.top_modulus_index(), 7); // y^3 + 2y + 1
        assert_eq!(t.top_modulus_display(), "y^3 + 2y + 1");
    }

    #[test]
    fn irreducibility_matches_root_scan_for_cubics_over_f3() {
        let t = FieldTower::build(3, 1, 1, 0).unwrap();
        // A cubic over F_3 is irreducible iff it has no roots.
        for idx in 0..27u64 {
            let mut coeffs: Vec<FieldElement> = (0..3)
                .map(|i| t.from_index(Level::Base, idx / 3u64.pow(i) % 3).unwrap())
                .collect();
            coeffs.push(t.one(Level::Base));
            let has_root = (0..3u64).any(|r| {
                let mut acc = 0u64;
                for (k, c) in coeffs.iter().enumerate() {
                    acc = (acc + c.coeffs[0] * pow_mod_u64(r, k as u64, 3)) % 3;
                }
                acc == 0
            });
            assert_eq!(t.is_irreducible(&coeffs).unwrap(), !has_root, "index {idx}");
        }
        // Spot checks: x^3 + 2x^2 + 2x + 2 has no roots; x^2 + 1 splits over
        // F_5 but not over F_3.
        let mk = |v: &[u64]| -> Vec<FieldElement> {
            v.iter().map(|&c| t.from_index(Level::Base, c).unwrap()).collect()
        };
        assert!(t.is_irreducible(&mk(&[2, 2, 2, 1])).unwrap());
        assert!(t.is_irreducible(&mk(&[1, 0, 1])).unwrap());
        let t5 = FieldTower::build(5, 1, 1, 0).unwrap();
        let mk5 = |v: &[u64]| -> Vec<FieldElement> {
            v.iter().map(|&c| t5.from_index(Level::Base, c).unwrap()).collect()
        };
        assert!(!t5.is_irreducible(&mk5(&[1, 0, 1])).unwrap());
    }

    #[test]
    fn trace_and_norm_match_their_definitions() {
        for (p, e, n) in [(2, 1, 4), (3, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 2), (3, 2, 2)] {
            let t = FieldTower::build(p, e, n, 0).unwrap();
            let fiber_exp = (t.qn - 1) / (t.q - 1);
            for idx in 0..t.qn {
                let z = t.from_index(Level::Top, idx).unwrap();
                // trace = sum of Frobenius conjugates
                let mut s = z.clone();
                let mut c = z.clone();
                for _ in 1..n {
                    c = t.frobenius(&c).unwrap();
                    s = t.add(&s, &c).unwrap();
                }
                let tr = t.trace(&z).unwrap();
                assert_eq!(t.embed(&tr, Level::Top).unwrap(), s);
                // norm = power map with exponent (q^n-1)/(q-1)
                if idx != 0 {
                    let nm = t.norm(&z).unwrap();
                    let pw = t.pow(&z, fiber_exp);
                    assert_eq!(t.embed(&nm, Level::Top).unwrap(), pw);
                }
            }
        }
    }

    #[test]
    fn f9_trace_basis_and_norm_fibers() {
        let t = FieldTower::build(3, 1, 2, 0).unwrap();
        // modulus y^2 + 1: trace(c0 + c1 y) = 2 c0
        for idx in 0..9 {
            let z = t.from_index(Level::Top, idx).unwrap();
            let tr = t.trace(&z).unwrap();
            assert_eq!(t.index(&tr), 2 * z.coeffs[0] % 3);
        }
        // every nonzero norm value is hit by exactly (q^n-1)/(q-1) = 4 elements
        let mut counts = [0u64; 3];
        for idx in 1..9 {
            let z = t.from_index(Level::Top, idx).unwrap();
            counts[t.index(&t.norm(&z).unwrap()) as usize] += 1;
        }
        assert_eq!(counts, [0, 4, 4]);
    }

    #[test]
    fn preimage_postconditions() {
        let t = FieldTower::build(3, 1, 3, 0).unwrap();
        let a = t.from_index(Level::Mid, 2).unwrap();
        let pre = t.norm_preimages(&a, 3).unwrap();
        assert_eq!(pre.len(), 3);
        for z in &pre {
            assert_eq!(t.norm(z).unwrap(), a);
        }
        assert!(pre[0] != pre[1] && pre[1] != pre[2] && pre[0] != pre[2]);

        for bidx in 0..3 {
            let b = t.from_index(Level::Mid, bidx).unwrap();
            let pre = t.trace_preimages(&b, 3).unwrap();
            assert_eq!(pre.len(), 3);
            for z in &pre {
                assert_eq!(t.trace(z).unwrap(), b);
            }
            assert!(pre[0] != pre[1] && pre[1] != pre[2] && pre[0] != pre[2]);
        }
    }

    #[test]
    fn discrete_log_roundtrip() {
        let t = FieldTower::build(5, 1, 3, 0).unwrap();
        assert_eq!(t.index(&t.generator(Level::Mid).unwrap()), 2); // 2 generates F_5^*
        let g = t.generator(Level::Top).unwrap();
        for k in [0u64, 1, 2, 17, 61, 123] {
            let z = t.pow(&g, k);
            assert_eq!(t.discrete_log(&z).unwrap(), k % (t.qn - 1));
        }
        for idx in 1..t.q {
            let a = t.from_index(Level::Mid, idx).unwrap();
            let k = t.discrete_log(&a).unwrap();
            let gm = t.generator(Level::Mid).unwrap();
            assert_eq!(t.pow(&gm, k), a);
        }
    }

    #[test]
    fn inverses_over_f16() {
        let t = FieldTower::build(2, 2, 2, 0).unwrap();
        let one = t.one(Level::Top);
        for idx in 1..16 {
            let z = t.from_index(Level::Top, idx).unwrap();
            let zi = t.inv(&z).unwrap();
            assert_eq!(t.mul(&z, &zi).unwrap(), one);
        }
        assert!(matches!(t.inv(&t.zero(Level::Top)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn frobenius_fixes_the_mid_field() {
        let t = FieldTower::build(2, 2, 3, 0).unwrap();
        for idx in 0..4 {
            let c = t.from_index(Level::Mid, idx).unwrap();
            let z = t.embed(&c, Level::Top).unwrap();
            assert_eq!(t.frobenius(&z).unwrap(), z);
        }
    }

    #[test]
    fn degenerate_tower_q2_n1() {
        let t = FieldTower::build(2, 1, 1, 0).unwrap();
        assert_eq!(t.qn, 2);
        let g = t.generator(Level::Top).unwrap();
        assert_eq!(t.index(&g), 1);
        assert_eq!(t.discrete_log(&g).unwrap(), 0);
        let z = t.from_index(Level::Top, 1).unwrap();
        assert_eq!(t.index(&t.norm(&z).unwrap()), 1);
        assert_eq!(t.index(&t.trace(&z).unwrap()), 1);
    }

    #[test]
    fn level_mismatch_is_reported() {
        let t = FieldTower::build(3, 1, 2, 0).unwrap();
        let a = t.one(Level::Mid);
        let b = t.one(Level::Top);
        assert!(matches!(t.add(&a, &b), Err(Error::LevelMismatch { .. })));
        assert!(matches!(t.trace(&a), Err(Error::LevelMismatch { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(FieldTower::build(4, 1, 2, 0), Err(Error::NotPrime(4))));
        assert!(matches!(FieldTower::build(2, 0, 2, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(FieldTower::build(2, 1, 0, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(FieldTower::build(2, 1, 50, 0), Err(Error::InvalidParameter(_))));
    }

    proptest! {
        #[test]
        fn top_arithmetic_laws_f125(ai in 0u64..125, bi in 0u64..125, ci in 0u64..125) {
            let t = FieldTower::build(5, 1, 3, 0).unwrap();
            let a = t.from_index(Level::Top, ai).unwrap();
            let b = t.from_index(Level::Top, bi).unwrap();
            let c = t.from_index(Level::Top, ci).unwrap();
            prop_assert_eq!(t.mul(&a, &b).unwrap(), t.mul(&b, &a).unwrap());
            let ab_c = t.mul(&t.mul(&a, &b).unwrap(), &c).unwrap();
            let a_bc = t.mul(&a, &t.mul(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let dist_l = t.mul(&a, &t.add(&b, &c).unwrap()).unwrap();
            let dist_r = t.add(&t.mul(&a, &b).unwrap(), &t.mul(&a, &c).unwrap()).unwrap();
            prop_assert_eq!(dist_l, dist_r);
        }

        #[test]
        fn norm_and_trace_are_multiplicative_additive_f64(ai in 0u64..64, bi in 0u64..64) {
            let t = FieldTower::build(2, 2, 3, 0).unwrap();
            let a = t.from_index(Level::Top, ai).unwrap();
            let b = t.from_index(Level::Top, bi).unwrap();
            let tr_sum = t.trace(&t.add(&a, &b).unwrap()).unwrap();
            let sum_tr = t.add(&t.trace(&a).unwrap(), &t.trace(&b).unwrap()).unwrap();
            prop_assert_eq!(tr_sum, sum_tr);
            if ai != 0 && bi != 0 {
                let nm_prod = t.norm(&t.mul(&a, &b).unwrap()).unwrap();
                let prod_nm = t.mul(&t.norm(&a).unwrap(), &t.norm(&b).unwrap()).unwrap();
                prop_assert_eq!(nm_prod, prod_nm);
            }
        }
    }
}
