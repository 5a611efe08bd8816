//! Dense univariate polynomial helpers over a small coefficient field.
//!
//! Polynomials are little-endian coefficient vectors with no trailing zeros
//! (the zero polynomial is the empty vector). The same routines serve both
//! tower levels: coefficients in F_p and coefficients in F_q.

/// Arithmetic context for polynomial coefficients.
pub trait CoeffField {
    type El: Clone + PartialEq + std::fmt::Debug;

    /// Number of elements in the coefficient field.
    fn order(&self) -> u64;
    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn is_zero(&self, x: &Self::El) -> bool;
    fn add(&self, x: &Self::El, y: &Self::El) -> Self::El;
    fn sub(&self, x: &Self::El, y: &Self::El) -> Self::El;
    fn mul(&self, x: &Self::El, y: &Self::El) -> Self::El;
    /// Multiplicative inverse; caller guarantees `x` is nonzero.
    fn inv(&self, x: &Self::El) -> Self::El;
}

pub fn trim<F: CoeffField>(f: &F, mut v: Vec<F::El>) -> Vec<F::El> {
    while v.last().map(|c| f.is_zero(c)).unwrap_or(false) {
        v.pop();
    }
    v
}

pub fn deg<F: CoeffField>(v: &[F::El]) -> Option<usize> {
    if v.is_empty() { None } else { Some(v.len() - 1) }
}

pub fn add<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.add(&x, &y));
    }
    trim(f, out)
}

pub fn sub<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).cloned().unwrap_or_else(|| f.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| f.zero());
        out.push(f.sub(&x, &y));
    }
    trim(f, out)
}

pub fn mul<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![f.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if f.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = f.add(&out[i + j], &f.mul(x, y));
        }
    }
    trim(f, out)
}

/// Remainder of `a` modulo monic `m`.
pub fn rem<F: CoeffField>(f: &F, a: &[F::El], m: &[F::El]) -> Vec<F::El> {
    assert!(m.len() >= 2 || (m.len() == 1 && !f.is_zero(&m[0])), "modulus must be nonzero");
    let md = m.len() - 1;
    let mut r: Vec<F::El> = a.to_vec();
    while r.len() > md {
        let lead = r.last().unwrap().clone();
        let k = r.len() - 1 - md;
        if !f.is_zero(&lead) {
            for j in 0..md {
                let t = f.mul(&lead, &m[j]);
                r[k + j] = f.sub(&r[k + j], &t);
            }
        }
        r.pop();
        r = trim(f, r);
        if r.is_empty() {
            break;
        }
    }
    r
}

pub fn mulmod<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El], m: &[F::El]) -> Vec<F::El> {
    rem(f, &mul(f, a, b), m)
}

/// `a^e mod m` with a u64 exponent (square-and-multiply).
pub fn powmod<F: CoeffField>(f: &F, a: &[F::El], e: u64, m: &[F::El]) -> Vec<F::El> {
    let mut result = vec![f.one()];
    result = rem(f, &result, m);
    let mut base = rem(f, a, m);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(f, &result, &base, m);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(f, &base, &base, m);
        }
    }
    result
}

pub fn gcd<F: CoeffField>(f: &F, a: &[F::El], b: &[F::El]) -> Vec<F::El> {
    let mut x = trim(f, a.to_vec());
    let mut y = trim(f, b.to_vec());
    while !y.is_empty() {
        let ylead = f.inv(y.last().unwrap());
        let ymonic: Vec<F::El> = y.iter().map(|c| f.mul(c, &ylead)).collect();
        let r = rem(f, &x, &ymonic);
        x = y;
        y = r;
    }
    // normalize to monic
    if let Some(lead) = x.last().cloned() {
        let li = f.inv(&lead);
        x = x.iter().map(|c| f.mul(c, &li)).collect();
    }
    x
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
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

/// Irreducibility over the coefficient field of order q, via the Frobenius
/// criterion: x^(q^m) = x mod f, and gcd(x^(q^(m/l)) - x, f) = 1 for every
/// prime l dividing m = deg f.
pub fn is_irreducible<F: CoeffField>(f: &F, poly: &[F::El]) -> bool {
    let poly = trim(f, poly.to_vec());
    let m = match deg::<F>(&poly) {
        None | Some(0) => return false,
        Some(d) => d,
    };
    // normalize to monic
    let lead_inv = f.inv(poly.last().unwrap());
    let poly: Vec<F::El> = poly.iter().map(|c| f.mul(c, &lead_inv)).collect();
    if m == 1 {
        return true;
    }
    let q = f.order();
    let x = vec![f.zero(), f.one()];
    // iterated Frobenius images x^(q^i) mod poly
    let mut frob = vec![rem(f, &x, &poly)];
    for _ in 1..=m {
        let next = powmod(f, frob.last().unwrap(), q, &poly);
        frob.push(next);
    }
    if frob[m] != rem(f, &x, &poly) {
        return false;
    }
    for l in prime_factors(m as u64) {
        let i = m / l as usize;
        let diff = sub(f, &frob[i], &x);
        let g = gcd(f, &diff, &poly);
        if deg::<F>(&g) != Some(0) {
            return false;
        }
    }
    true
}
