//! Exact rationals, rigorous enclosures for expressions involving `e`, and
//! decimal rendering.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `x^n` for a signed exponent.
pub fn powi(x: &BigRational, n: i64) -> BigRational {
    let p = num_traits::pow(x.clone(), n.unsigned_abs() as usize);
    if n < 0 {
        p.recip()
    } else {
        p
    }
}

/// Decimal expansion of `x` truncated toward zero after `digits` fractional digits.
pub fn to_decimal(x: &BigRational, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (ip, fp) = scaled.div_rem(&scale);
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&ip.to_string());
    if digits > 0 {
        let f = fp.to_string();
        s.push('.');
        s.push_str(&"0".repeat(digits - f.len()));
        s.push_str(&f);
    }
    s
}

pub fn to_f64(x: &BigRational) -> f64 {
    // Shift to keep both parts inside f64 range for tiny or huge values.
    let nb = x.numer().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (x.numer().clone(), x.denom() << shift as usize)
    } else {
        (x.numer() << (-shift) as usize, x.denom().clone())
    };
    let q = n.div_floor(&d).to_f64().unwrap_or(f64::NAN);
    q * 2f64.powi(shift as i32)
}

/// A closed interval `[lo, hi]` of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn exact(x: BigRational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval::new(lo, hi)
    }

    /// Reciprocal of an interval not containing zero.
    pub fn recip(&self) -> Interval {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "interval straddles zero"
        );
        Interval::new(self.hi.recip(), self.lo.recip())
    }

    pub fn div(&self, o: &Interval) -> Interval {
        self.mul(&o.recip())
    }

    /// Integer power of a positive interval.
    pub fn powi(&self, n: i64) -> Interval {
        assert!(self.lo.is_positive(), "powi needs a positive interval");
        let (a, b) = (powi(&self.lo, n), powi(&self.hi, n));
        if n >= 0 {
            Interval::new(a, b)
        } else {
            Interval::new(b, a)
        }
    }

    /// Definitely below `o`.
    pub fn lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    /// Definitely at most `o`.
    pub fn le(&self, o: &Interval) -> bool {
        self.hi <= o.lo
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.mid())
    }

    /// Digits shared by both ends, truncated; enough to print the value honestly.
    pub fn decimal(&self, digits: usize) -> String {
        to_decimal(&self.lo, digits)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.decimal(20))
    }
}

/// Enclosure of `e` from the partial sums of `1/k!`; width below `10^-80`.
pub fn e_interval() -> Interval {
    const K: u64 = 64;
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for k in 0..=K {
        if k > 0 {
            fact *= k;
        }
        sum += BigRational::new(BigInt::one(), fact.clone());
    }
    // Tail after 1/K! is below 1/(K! * K).
    let tail = BigRational::new(BigInt::one(), fact * BigInt::from(K));
    Interval::new(sum.clone(), sum + tail)
}

/// Unsigned fixed-point number with `FRAC_BITS` fractional bits, used where
/// exponents are too large for exact rationals.
pub const FRAC_BITS: u64 = 320;

/// Fixed-point `[lo, hi]` enclosure of `base^exp` for `0 < base <= 1`, where `base`
/// is given exactly.
pub fn pow_enclosure(base: &BigRational, exp: u64) -> Interval {
    assert!(base.is_positive() && base <= &BigRational::one());
    let one = BigUint::one() << FRAC_BITS;
    let scaled = |x: &BigRational, up: bool| -> BigUint {
        let n = x.numer().to_biguint().expect("positive") << FRAC_BITS;
        let d = x.denom().to_biguint().expect("positive");
        let (q, r) = n.div_rem(&d);
        if up && !r.is_zero() {
            q + 1u32
        } else {
            q
        }
    };
    let mul = |a: &BigUint, b: &BigUint, up: bool| -> BigUint {
        let p = a * b;
        let q = &p >> FRAC_BITS;
        if up && (q.clone() << FRAC_BITS) != p {
            q + 1u32
        } else {
            q
        }
    };
    let pow = |b0: BigUint, up: bool| -> BigUint {
        let mut result = one.clone();
        let mut b = b0;
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = mul(&result, &b, up);
            }
            b = mul(&b, &b, up);
            e >>= 1;
        }
        result
    };
    let lo = pow(scaled(base, false), false);
    let hi = pow(scaled(base, true), true).min(one.clone());
    let denom = BigInt::from_biguint(Sign::Plus, one);
    Interval::new(
        BigRational::new(BigInt::from_biguint(Sign::Plus, lo), denom.clone()),
        BigRational::new(BigInt::from_biguint(Sign::Plus, hi), denom),
    )
}

/// Serializes a rational as `"num/den"`.
pub fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", x.numer(), x.denom()))
}

/// A value reported both as an enclosure and as decimals.
#[derive(Clone, Debug, Serialize)]
pub struct Reported {
    pub decimal: String,
    pub approx: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub lo: String,
    pub hi: String,
}

impl Reported {
    pub const DIGITS: usize = 50;

    pub fn of(iv: &Interval) -> Self {
        let exact = (iv.lo == iv.hi).then(|| format!("{}/{}", iv.lo.numer(), iv.lo.denom()));
        Reported {
            decimal: to_decimal(&iv.lo, Self::DIGITS),
            approx: iv.to_f64(),
            exact,
            lo: to_decimal(&iv.lo, Self::DIGITS),
            hi: to_decimal(&iv.hi, Self::DIGITS),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(91854, 78125), 7), "1.1757312");
        assert_eq!(to_decimal(&rat(1, 8), 3), "0.125");
        assert_eq!(to_decimal(&rat(-1, 3), 4), "-0.3333");
        assert_eq!(to_decimal(&rat(1, 100), 1), "0.0");
        assert_eq!(to_decimal(&int(7), 0), "7");
    }

    #[test]
    fn e_enclosure() {
        let e = e_interval();
        assert!(e.width() < rat(1, 10).pow(80));
        assert_eq!(e.decimal(30), "2.718281828459045235360287471352");
    }

    #[test]
    fn float_conversion() {
        assert!((to_f64(&rat(1, 3)) - 1.0 / 3.0).abs() < 1e-15);
        let tiny = powi(&int(3), -200);
        assert!((to_f64(&tiny) / 3f64.powi(-200) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pow_enclosure_brackets_exact() {
        let b = rat(3, 4);
        let iv = pow_enclosure(&b, 37);
        assert!(iv.contains(&powi(&b, 37)));
        assert!(iv.width() < powi(&int(2), -300));
        let near_one = int(1) - powi(&int(2), -40);
        let big = pow_enclosure(&near_one, 1 << 30);
        assert!(big.lo.is_positive() && big.hi < int(1));
        assert_eq!(big.decimal(6), "0.999023");
    }

    #[test]
    fn interval_ops() {
        let a = Interval::new(rat(1, 2), rat(3, 4));
        let b = Interval::exact(rat(2, 1));
        assert_eq!(a.mul(&b), Interval::new(int(1), rat(3, 2)));
        assert_eq!(a.recip(), Interval::new(rat(4, 3), int(2)));
        assert_eq!(a.powi(-1), a.recip());
        assert!(a.lt(&b));
    }
}
