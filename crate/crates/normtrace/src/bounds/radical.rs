//! Exact arithmetic in Q(base^(1/4)) for bound radii.
//!
//! Every radius in the bounds module is a rational combination of
//! quarter powers of a single field size q, so values are kept as four
//! rational coefficients over a normalized base. Perfect-square bases
//! fold down (q = s^2 turns q^(1/4) into s^(1/2)) until the base is 1 or
//! squarefree-enough that x^4 - base is irreducible over Q; coefficient
//! vectors are then canonical and equality is componentwise. Signs are
//! decided by interval refinement around an integer fourth root, never
//! by floating point.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Radical {
    base: u64,
    coeffs: [BigRational; 4],
}

fn ratio_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn ratio_u(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Largest s with s*s = n, if any.
fn perfect_sqrt(n: u64) -> Option<u64> {
    let s = n.sqrt();
    if s * s == n { Some(s) } else { None }
}

impl Radical {
    /// value = sum coeffs[k] * base^(k/4), normalized.
    pub fn new(base: u64, coeffs: [BigRational; 4]) -> Self {
        assert!(base >= 1, "radical base must be positive");
        let mut base = base;
        let mut coeffs = coeffs;
        while base > 1 {
            match perfect_sqrt(base) {
                Some(s) => {
                    let sv = ratio_u(s);
                    let [c0, c1, c2, c3] = coeffs;
                    coeffs = [
                        c0 + &c2 * &sv,
                        BigRational::zero(),
                        c1 + &c3 * &sv,
                        BigRational::zero(),
                    ];
                    base = s;
                }
                None => break,
            }
        }
        if base == 1 {
            let total = coeffs.iter().sum::<BigRational>();
            coeffs = [total, BigRational::zero(), BigRational::zero(), BigRational::zero()];
        } else if coeffs[1..].iter().all(|c| c.is_zero()) {
            base = 1;
        }
        Radical { base, coeffs }
    }

    pub fn zero() -> Self {
        Radical::rational(BigRational::zero())
    }

    pub fn rational(r: BigRational) -> Self {
        Radical {
            base: 1,
            coeffs: [r, BigRational::zero(), BigRational::zero(), BigRational::zero()],
        }
    }

    pub fn from_int(n: i64) -> Self {
        Radical::rational(ratio_int(n))
    }

    /// base^(j/4) for any integer j; negative j goes into the rational
    /// coefficient as an inverse power.
    pub fn quarter_pow(base: u64, j: i64) -> Self {
        assert!(base >= 1, "radical base must be positive");
        let m = j.div_euclid(4);
        let r = j.rem_euclid(4) as usize;
        let scale = if m >= 0 {
            BigRational::from_integer(BigInt::from(base).pow(m as u32))
        } else {
            BigRational::new(BigInt::one(), BigInt::from(base).pow((-m) as u32))
        };
        let mut coeffs = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        coeffs[r] = scale;
        Radical::new(base, coeffs)
    }

    /// base^(j/2) for any integer j.
    pub fn sqrt_pow(base: u64, j: i64) -> Self {
        Radical::quarter_pow(base, 2 * j)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn neg(&self) -> Self {
        Radical { base: self.base, coeffs: self.coeffs.clone().map(|c| -c) }
    }

    fn unify(&self, other: &Self) -> u64 {
        if self.base == 1 {
            other.base
        } else if other.base == 1 || other.base == self.base {
            self.base
        } else {
            panic!(
                "cannot mix radicals over bases {} and {}",
                self.base, other.base
            );
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let base = self.unify(other);
        let mut coeffs = self.coeffs.clone();
        for (c, o) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += o;
        }
        Radical::new(base, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        Radical {
            base: self.base,
            coeffs: self.coeffs.clone().map(|c| c * factor),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let base = self.unify(other);
        let fold = ratio_u(base);
        let mut out = [
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
            BigRational::zero(),
        ];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let prod = a * b;
                if i + j < 4 {
                    out[i + j] += prod;
                } else {
                    // r^4 = base
                    out[i + j - 4] += prod * &fold;
                }
            }
        }
        Radical::new(base, out)
    }

    /// Sign of the real value, decided exactly.
    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        if self.base == 1 {
            return self.coeffs[0].cmp(&BigRational::zero());
        }
        for bits in [32u32, 64, 128, 256, 512, 1024, 2048, 4096] {
            // floor((base * 2^(4*bits))^(1/4)) brackets base^(1/4)
            let scaled = BigUint::from(self.base) << (4 * bits);
            let root = scaled.nth_root(4);
            let denom = BigInt::one() << bits;
            let lo = BigRational::new(BigInt::from(root.clone()), denom.clone());
            let hi = BigRational::new(BigInt::from(root + 1u32), denom);
            let mut acc_lo = BigRational::zero();
            let mut acc_hi = BigRational::zero();
            let mut pow_lo = BigRational::one();
            let mut pow_hi = BigRational::one();
            for (k, c) in self.coeffs.iter().enumerate() {
                if k > 0 {
                    pow_lo *= &lo;
                    pow_hi *= &hi;
                }
                if c.is_zero() {
                    continue;
                }
                if c.is_positive() {
                    acc_lo += c * &pow_lo;
                    acc_hi += c * &pow_hi;
                } else {
                    acc_lo += c * &pow_hi;
                    acc_hi += c * &pow_lo;
                }
            }
            if acc_lo.is_positive() {
                return Ordering::Greater;
            }
            if acc_hi.is_negative() {
                return Ordering::Less;
            }
        }
        unreachable!("sign refinement exhausted for nonzero radical {self:?}");
    }

    pub fn cmp_value(&self, other: &Self) -> Ordering {
        self.sub(other).sign()
    }

    /// Outward double-precision estimate, for human-readable report rows
    /// only (all decisions use exact arithmetic).
    pub fn to_f64(&self) -> f64 {
        let base = self.base as f64;
        let r = base.powf(0.25);
        let ratio = |x: &BigRational| -> f64 {
            let n = x.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
            let d = x.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
            n / d
        };
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| ratio(c) * r.powi(k as i32))
            .sum()
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag}*{}^(1/4)", self.base)?,
                2 => write!(f, "{mag}*{}^(1/2)", self.base)?,
                _ => write!(f, "{mag}*{}^(3/4)", self.base)?,
            }
        }
        Ok(())
    }
}
