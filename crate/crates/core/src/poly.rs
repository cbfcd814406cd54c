//! Dense univariate polynomials over a [`FieldCtx`].
//!
//! Coefficients are little-endian and trimmed, so the zero polynomial is the
//! empty vector. All operations take the field context explicitly.

use crate::gf::{FieldCtx, FieldElem};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(FieldElem::ONE)
    }

    pub fn constant(c: FieldElem) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// `c * x^n`.
    pub fn monomial(c: FieldElem, n: usize) -> Self {
        let mut v = vec![FieldElem::ZERO; n + 1];
        v[n] = c;
        Poly::from_coeffs(v)
    }

    pub fn from_coeffs(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lead(&self) -> FieldElem {
        self.coeffs.last().copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn add(&self, f: &FieldCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, f: &FieldCtx, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn scale(&self, f: &FieldCtx, c: FieldElem) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &FieldCtx, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![FieldElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }

    /// Quotient and remainder; panics if `divisor` is zero.
    pub fn divrem(&self, f: &FieldCtx, divisor: &Poly) -> (Poly, Poly) {
        let db = divisor.degree().expect("division by the zero polynomial");
        let inv_lead = f.inv(divisor.lead()).expect("nonzero leading coefficient");
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![FieldElem::ZERO; r.len() - db];
        for i in (db..r.len()).rev() {
            let c = f.mul(r[i], inv_lead);
            if c.is_zero() {
                continue;
            }
            q[i - db] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                let t = i - db + j;
                r[t] = f.sub(r[t], f.mul(c, b));
            }
        }
        r.truncate(db);
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }

    pub fn rem(&self, f: &FieldCtx, divisor: &Poly) -> Poly {
        self.divrem(f, divisor).1
    }

    pub fn monic(&self, f: &FieldCtx) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = f.inv(self.lead()).expect("nonzero leading coefficient");
        self.scale(f, inv)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, f: &FieldCtx, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Returns `(g, s)` with `g = gcd(self, m)` monic and `s * self = g mod m`.
    pub fn ext_gcd(&self, f: &FieldCtx, m: &Poly) -> (Poly, Poly) {
        let (mut r0, mut r1) = (m.clone(), self.rem(f, m));
        let (mut s0, mut s1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(f, &r1);
            let s = s0.sub(f, &q.mul(f, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.is_zero() {
            return (Poly::zero(), Poly::zero());
        }
        let inv = f.inv(r0.lead()).expect("nonzero");
        (r0.scale(f, inv), s0.scale(f, inv))
    }

    pub fn derivative(&self, f: &FieldCtx) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(f.from_int(i as i64), c))
                .collect(),
        )
    }

    pub fn eval(&self, f: &FieldCtx, x: FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Coefficients mapped through a field embedding.
    pub fn map(&self, g: impl Fn(FieldElem) -> FieldElem) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&c| g(c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_ctx;

    fn p(f: &FieldCtx, v: &[i64]) -> Poly {
        Poly::from_coeffs(v.iter().map(|&c| f.from_int(c)).collect())
    }

    #[test]
    fn division_identity() {
        let f = field_ctx(5, 1).unwrap();
        let a = p(&f, &[1, 2, 3, 4, 1, 2]);
        let b = p(&f, &[3, 0, 2]);
        let (q, r) = a.divrem(&f, &b);
        assert_eq!(q.mul(&f, &b).add(&f, &r), a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_and_inverse() {
        let f = field_ctx(3, 1).unwrap();
        // (x+1)(x+2) and (x+1)x
        let a = p(&f, &[1, 1]).mul(&f, &p(&f, &[2, 1]));
        let b = p(&f, &[1, 1]).mul(&f, &p(&f, &[0, 1]));
        assert_eq!(a.gcd(&f, &b), p(&f, &[1, 1]));
        let m = p(&f, &[1, 0, 1]); // x^2 + 1, irreducible over F_3
        let x = p(&f, &[0, 1]);
        let (g, s) = x.ext_gcd(&f, &m);
        assert_eq!(g, Poly::one());
        assert_eq!(s.mul(&f, &x).rem(&f, &m), Poly::one());
    }

    #[test]
    fn char_p_derivative() {
        let f = field_ctx(2, 1).unwrap();
        assert!(p(&f, &[1, 0, 1]).derivative(&f).is_zero());
        assert_eq!(p(&f, &[0, 1, 1, 1]).derivative(&f), p(&f, &[1, 0, 1]));
    }
}
