//! Counting monic irreducible polynomials with both end coefficients
//! prescribed: P_n(a, b) is the number of monic irreducibles of degree n
//! over F_q whose roots have trace a and norm b.
//!
//! The working inversion here decomposes F_{q^m} windows by exact root
//! degree. An element z of degree m sits inside F_{q^n} with
//! Tr_n(z) = (n/m mod p) * Tr_m(z) and Norm_n(z) = Norm_m(z)^{n/m}, so the
//! divisor-m term of the Mobius sum is a sum of N_m values over twisted
//! arguments, not N_m(a, b) itself. The single-argument inversion
//! [`pn_printed_lemma`] is kept verbatim as published; it returns
//! non-integral sums (as [`Error::DivisibilityViolation`]) on many grid
//! points and those findings are part of the verification report.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::charsum::{self, CharTable};
use crate::closedforms::{self, Source};
use crate::error::{Error, Result};
use crate::fieldtower::{FieldTower, Level};
use crate::oracle::{self, CensusTable};

/// Mobius function by trial division.
pub fn mobius(t: u64) -> i64 {
    assert!(t >= 1, "mobius is defined on positive integers");
    let mut t = t;
    let mut factors = 0u32;
    let mut d = 2u64;
    while d * d <= t {
        if t % d == 0 {
            t /= d;
            if t % d == 0 {
                return 0;
            }
            factors += 1;
        }
        d += 1;
    }
    if t > 1 {
        factors += 1;
    }
    if factors % 2 == 0 { 1 } else { -1 }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    out.sort_unstable();
    out
}

/// Monic irreducible count over all (a, b), the necklace number
/// (1/n) sum_{t|n} mu(t) q^{n/t}.
pub fn necklace_total(q: u64, n: u64) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut total: i128 = 0;
    for t in divisors(n) {
        let pw = u128::from(q).checked_pow((n / t) as u32).ok_or(
            Error::ScaleExceeded { size: u128::from(q), cap: u128::MAX },
        )?;
        let pw = i128::try_from(pw).map_err(|_| Error::ScaleExceeded {
            size: pw,
            cap: i128::MAX as u128,
        })?;
        total += i128::from(mobius(t)) * pw;
    }
    let n = i128::from(n);
    if total % n != 0 || total < 0 {
        return Err(Error::DivisibilityViolation {
            value: total.to_string(),
            divisor: n.to_string(),
        });
    }
    Ok((total / n) as u128)
}

/// A strategy for evaluating N_m(a, b) at the divisor levels the
/// inversion visits. All strategies must agree wherever they are defined.
pub trait NnProvider {
    /// (p, e) of the base field F_q, q = p^e.
    fn field_shape(&self) -> (u64, usize);

    /// N_m(a, b) with a the norm index and b the trace index.
    fn nn(&self, m: u64, a_idx: u64, b_idx: u64) -> Result<u128>;

    fn q(&self) -> u64 {
        let (p, e) = self.field_shape();
        p.pow(e as u32)
    }
}

/// Exhaustive enumeration, one cached census table per extension degree.
pub struct OracleProvider {
    p: u64,
    e: usize,
    cap: u128,
    cache: RefCell<HashMap<u64, CensusTable>>,
}

impl OracleProvider {
    pub fn new(p: u64, e: usize) -> Self {
        OracleProvider { p, e, cap: oracle::DEFAULT_ENUM_CAP, cache: RefCell::new(HashMap::new()) }
    }
}

impl NnProvider for OracleProvider {
    fn field_shape(&self) -> (u64, usize) {
        (self.p, self.e)
    }

    fn nn(&self, m: u64, a_idx: u64, b_idx: u64) -> Result<u128> {
        let mut cache = self.cache.borrow_mut();
        if !cache.contains_key(&m) {
            let tower = FieldTower::build(self.p, self.e, m as usize, 0)?;
            cache.insert(m, oracle::census(&tower, self.cap)?);
        }
        Ok(u128::from(cache[&m].get(a_idx, b_idx)?))
    }
}

/// Character-sum evaluation, one cached tower and character table per
/// extension degree.
pub struct GaussProvider {
    p: u64,
    e: usize,
    cache: RefCell<HashMap<u64, (FieldTower, CharTable)>>,
}

impl GaussProvider {
    pub fn new(p: u64, e: usize) -> Self {
        GaussProvider { p, e, cache: RefCell::new(HashMap::new()) }
    }
}

impl NnProvider for GaussProvider {
    fn field_shape(&self) -> (u64, usize) {
        (self.p, self.e)
    }

    fn nn(&self, m: u64, a_idx: u64, b_idx: u64) -> Result<u128> {
        let mut cache = self.cache.borrow_mut();
        if !cache.contains_key(&m) {
            let tower = FieldTower::build(self.p, self.e, m as usize, 0)?;
            let table = CharTable::new(&tower)?;
            cache.insert(m, (tower, table));
        }
        let (tower, table) = &cache[&m];
        if a_idx == 0 {
            return Ok(u128::from(b_idx == 0));
        }
        Ok(u128::from(charsum::nn_char(tower, table, a_idx, b_idx)?))
    }
}

/// Closed-form evaluation for q in {2, 3, 4, 5}.
pub struct ClosedProvider {
    p: u64,
    e: usize,
    source: Source,
}

impl ClosedProvider {
    pub fn new(q: u64, source: Source) -> Result<Self> {
        let (p, e) = match q {
            2 => (2, 1),
            3 => (3, 1),
            4 => (2, 2),
            5 => (5, 1),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no closed form for q={q}"
                )))
            }
        };
        Ok(ClosedProvider { p, e, source })
    }
}

impl NnProvider for ClosedProvider {
    fn field_shape(&self) -> (u64, usize) {
        (self.p, self.e)
    }

    fn nn(&self, m: u64, a_idx: u64, b_idx: u64) -> Result<u128> {
        Ok(closedforms::nn_closed(self.q(), m, a_idx, b_idx, self.source)?.value)
    }
}

fn check_provider_field<P: NnProvider>(base: &FieldTower, provider: &P) -> Result<()> {
    if provider.field_shape() != (base.p, base.e) {
        return Err(Error::InvalidParameter(format!(
            "provider field F_{} does not match the supplied field F_{}",
            provider.q(),
            base.q
        )));
    }
    Ok(())
}

/// P_n(a, b) by Mobius inversion over exact root degree.
///
/// `base` supplies F_q arithmetic (only its middle level is used); a is
/// the trace coefficient target and b the norm coefficient target. The
/// divisor-m term sums N_m over all beta in F_q^* with beta^{n/m} = b,
/// with the trace target scaled by the inverse of (n/m mod p); degrees
/// where p divides n/m contribute only when a = 0, through full norm
/// fibers.
pub fn pn<P: NnProvider>(
    base: &FieldTower,
    provider: &P,
    n: u64,
    a_idx: u64,
    b_idx: u64,
) -> Result<u128> {
    check_provider_field(base, provider)?;
    let q = base.q;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if a_idx >= q || b_idx >= q {
        return Err(Error::InvalidParameter(format!(
            "element indices out of range for q={q}: a={a_idx}, b={b_idx}"
        )));
    }
    if n == 1 {
        return Ok(u128::from(a_idx == b_idx));
    }
    let p = base.p;
    let b_el = base.from_index(Level::Mid, b_idx)?;
    let a_el = base.from_index(Level::Mid, a_idx)?;
    let mut total: i128 = 0;
    for m in divisors(n) {
        let mu = mobius(n / m);
        if mu == 0 {
            continue;
        }
        let k = n / m;
        let mut term: i128 = 0;
        if k % p == 0 {
            if a_idx == 0 {
                // trace constraint vanishes; every norm fiber over a k-th
                // root of b contributes whole
                let fiber = (pow_u128(q, m)? - 1) / u128::from(q - 1);
                let fiber = to_i128(fiber)?;
                for beta in 1..q {
                    let root = base.pow(&base.from_index(Level::Mid, beta)?, k);
                    if base.index(&root) == b_idx {
                        term += fiber;
                    }
                }
            }
        } else {
            let kbar = base.from_index(Level::Mid, k % p)?;
            let scale = base.inv(&kbar)?;
            let twisted = base.index(&base.mul(&a_el, &scale)?);
            for beta in 1..q {
                let root = base.pow(&base.from_index(Level::Mid, beta)?, k);
                if base.index(&root) == base.index(&b_el) {
                    term += to_i128(provider.nn(m, beta, twisted)?)?;
                }
            }
        }
        total += i128::from(mu) * term;
    }
    let n = i128::from(n);
    if total % n != 0 || total < 0 {
        return Err(Error::DivisibilityViolation {
            value: total.to_string(),
            divisor: n.to_string(),
        });
    }
    Ok((total / n) as u128)
}

fn pow_u128(q: u64, m: u64) -> Result<u128> {
    u128::from(q)
        .checked_pow(m as u32)
        .ok_or(Error::ScaleExceeded { size: u128::from(q), cap: u128::MAX })
}

fn to_i128(x: u128) -> Result<i128> {
    i128::try_from(x).map_err(|_| Error::ScaleExceeded {
        size: x,
        cap: i128::MAX as u128,
    })
}

/// The single-argument inversion exactly as published:
/// P_n(a, b) = (1/n) sum_{t|n} mu(t) N_{n/t}(a, b).
///
/// Valid only where every contributing subfield level happens to carry
/// the same (a, b) constraint; elsewhere the sum is not divisible by n
/// and the call fails with [`Error::DivisibilityViolation`].
pub fn pn_printed_lemma<P: NnProvider>(
    provider: &P,
    n: u64,
    a_idx: u64,
    b_idx: u64,
) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut total: i128 = 0;
    for t in divisors(n) {
        let mu = mobius(t);
        if mu == 0 {
            continue;
        }
        total += i128::from(mu) * to_i128(provider.nn(n / t, a_idx, b_idx)?)?;
    }
    let n = i128::from(n);
    if total % n != 0 || total < 0 {
        return Err(Error::DivisibilityViolation {
            value: total.to_string(),
            divisor: n.to_string(),
        });
    }
    Ok((total / n) as u128)
}

/// Published per-q proposition tables for the divisor terms, kept
/// verbatim; `n_outer` is needed because the q = 4 statement references
/// the outer degree inside a divisor term.
fn printed_term(q: u64, t: u64, n_outer: u64, a: u64, b: u64) -> Result<u128> {
    match q {
        2 => Ok(1u128 << (t - 1)),
        3 => {
            let eta: i128 = if a == 1 { 1 } else { -1 };
            let p3 = to_i128(pow_u128(3, t)?)?;
            let neg3 = |m: u64| -> i128 { (-3i128).pow(m as u32) };
            let num = if t % 2 == 0 {
                p3 + neg3(t / 2) * eta
            } else if b == 1 {
                p3 + neg3((t + 1) / 2) * eta
            } else {
                p3 - neg3((t + 1) / 2) * eta
            };
            if num % 6 != 0 || num < 0 {
                return Err(Error::DivisibilityViolation {
                    value: num.to_string(),
                    divisor: "6".into(),
                });
            }
            Ok((num / 6) as u128)
        }
        4 => {
            let p4 = to_i128(pow_u128(4, t)?)?;
            let pow2 = |k: u64| -> i128 { 1i128 << k };
            if t % 3 == 0 {
                if t % 2 == 1 && b == 1 {
                    // sign exponent is the outer degree in the published
                    // statement
                    let sign: i128 = if n_outer % 2 == 0 { 1 } else { -1 };
                    let num = p4 + sign * pow2(t + 1);
                    if num % 12 != 0 || num < 0 {
                        return Err(Error::DivisibilityViolation {
                            value: num.to_string(),
                            divisor: "12".into(),
                        });
                    }
                    Ok((num / 12) as u128)
                } else {
                    // the published statement is silent here; corrected
                    // table fills the gap
                    Ok(closedforms::nn_q4(t, a, b, Source::ErrataCorrected)?.value)
                }
            } else {
                let aligned = (a == 1 && b == 1) || (a == 2 && b == 3) || (a == 3 && b == 2);
                let sign_t: i128 = if t % 2 == 0 { 1 } else { -1 };
                let num = if aligned {
                    p4 - sign_t * pow2(t + 2)
                } else {
                    p4 + sign_t * pow2(t + 1)
                };
                if num % 12 != 0 || num < 0 {
                    return Err(Error::DivisibilityViolation {
                        value: num.to_string(),
                        divisor: "12".into(),
                    });
                }
                Ok((num / 12) as u128)
            }
        }
        5 => Ok(closedforms::nn_q5(t, a, b, Source::PaperStated)?.value),
        _ => Err(Error::InvalidParameter(format!("no closed form for q={q}"))),
    }
}

/// Closed-form P_n(a, b) for q in {2, 3, 4, 5} and ab != 0.
///
/// The corrected source runs the degree-twisted inversion over the
/// corrected N tables and matches enumeration everywhere. The published
/// source evaluates the printed proposition sums verbatim; non-integral
/// sums fail with [`Error::DivisibilityViolation`].
pub fn pn_closed(q: u64, n: u64, a_idx: u64, b_idx: u64, source: Source) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if a_idx == 0 || a_idx >= q || b_idx == 0 || b_idx >= q {
        return Err(Error::InvalidParameter(format!(
            "closed-form P_n needs nonzero indices below q={q}: a={a_idx}, b={b_idx}"
        )));
    }
    match source {
        Source::ErrataCorrected => {
            let provider = ClosedProvider::new(q, source)?;
            let (p, e) = provider.field_shape();
            let base = FieldTower::build(p, e, 1, 0)?;
            pn(&base, &provider, n, a_idx, b_idx)
        }
        Source::PaperStated => {
            if n == 1 {
                return Ok(u128::from(a_idx == b_idx));
            }
            let mut total: i128 = 0;
            for t in divisors(n) {
                let mu = mobius(n / t);
                if mu == 0 {
                    continue;
                }
                total += i128::from(mu) * to_i128(printed_term(q, t, n, a_idx, b_idx)?)?;
            }
            let n = i128::from(n);
            if total % n != 0 || total < 0 {
                return Err(Error::DivisibilityViolation {
                    value: total.to_string(),
                    divisor: n.to_string(),
                });
            }
            Ok((total / n) as u128)
        }
    }
}
