//! Exact arithmetic in small finite fields `F_{p^n}`.
//!
//! Elements are encoded as integers `idx = c_0 + c_1 p + ... + c_{n-1} p^{n-1}`
//! where `c_0 + c_1 u + ... + c_{n-1} u^{n-1}` is the residue modulo a fixed
//! monic irreducible polynomial in `u`. The modulus is the smallest monic
//! irreducible of the required degree in that same integer encoding, so the
//! encoding of every element is reproducible.
//!
//! A field over `F_q` (with `q = p^m`) of extension degree `k` is built
//! directly as a degree `m * k` extension of `F_p`; the copy of `F_q` inside
//! it is located explicitly and exposed through [`FieldCtx::embed`].

use std::fmt;

use thiserror::Error;

/// Largest field order supported.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

/// Fields up to this order use exp/log tables for multiplication.
pub const TABLE_LIMIT: u64 = 1 << 16;

const ADD_TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field order {size} exceeds the cap {cap}")]
    SizeCap { size: u64, cap: u64 },
    #[error("no monic irreducible polynomial of degree {0} found")]
    NoIrreducible(u32),
    #[error("inversion of zero")]
    DivisionByZero,
    #[error("extension must be built over a base field (k = 1)")]
    NotBaseField,
    #[error("extension degree must be positive")]
    ZeroDegree,
    #[error("element index {idx} out of range for field of order {size}")]
    OutOfRange { idx: u64, size: u32 },
}

/// A field element, encoded in the fixed `F_p`-basis of its context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(pub(crate) u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    #[inline]
    pub fn idx(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Inv,
    Pow(u64),
}

/// Arithmetic context for `F_{q^k}` with `q = p^m`.
#[derive(Clone)]
pub struct FieldCtx {
    p: u32,
    m: u32,
    k: u32,
    q: u32,
    size: u32,
    modulus: Vec<u32>,
    modbits: u64,
    generator: FieldElem,
    // exp has length 2(size-1) so products of logs need no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Vec<u32>,
    neg_table: Vec<u32>,
    embedding: Vec<FieldElem>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("k", &self.k)
            .field("size", &self.size)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.k == other.k
    }
}

impl Eq for FieldCtx {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q` as `p^m`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut m = 0;
    let mut r = q;
    while r > 1 {
        r /= p;
        m += 1;
    }
    Some((p as u32, m))
}

/// Creates the context for `F_{p^m}`.
pub fn field_ctx(p: u32, m: u32) -> Result<FieldCtx, GfError> {
    if !is_prime(p as u64) {
        return Err(GfError::NotPrime(p));
    }
    if m == 0 {
        return Err(GfError::ZeroDegree);
    }
    FieldCtx::build(p, m, 1, None)
}

/// Creates `F_{q^k}` for the base field `F_q` described by `base`.
pub fn ext_field(base: &FieldCtx, k: u32) -> Result<FieldCtx, GfError> {
    if base.k != 1 {
        return Err(GfError::NotBaseField);
    }
    if k == 0 {
        return Err(GfError::ZeroDegree);
    }
    if k == 1 {
        return Ok(base.clone());
    }
    FieldCtx::build(base.p, base.m, k, Some(base))
}

/// Convenience: the base field `F_q` for a prime power `q`.
pub fn field_for_order(q: u32) -> Result<FieldCtx, GfError> {
    match prime_power(q as u64) {
        Some((p, m)) => field_ctx(p, m),
        None => Err(GfError::NotPrime(q)),
    }
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

// Dense polynomials over F_p as little-endian digit vectors, used only while
// constructing a context.
mod fp_poly {
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    /// Remainder of `a` modulo the monic `b`.
    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let db = b.len() - 1;
        while r.len() > db {
            let lead = *r.last().unwrap();
            let shift = r.len() - 1 - db;
            for (i, &bc) in b.iter().enumerate() {
                let sub = (lead as u64 * bc as u64 % p as u64) as u32;
                r[shift + i] = (r[shift + i] + p - sub) % p;
            }
            trim(&mut r);
        }
        r
    }

    pub fn from_code(mut code: u64, p: u32, len: usize) -> Vec<u32> {
        let mut v = Vec::with_capacity(len);
        for _ in 0..len {
            v.push((code % p as u64) as u32);
            code /= p as u64;
        }
        v
    }

    /// Irreducibility by trial division against every monic polynomial of
    /// degree `1..=n/2`.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        for deg in 1..=n / 2 {
            let count = (p as u64).pow(deg as u32);
            for low in 0..count {
                let mut g = from_code(low, p, deg);
                g.push(1);
                if rem(f, &g, p).is_empty() {
                    return false;
                }
            }
        }
        true
    }

    /// Smallest monic irreducible of degree `n` in the integer encoding.
    pub fn smallest_irreducible(n: u32, p: u32) -> Option<Vec<u32>> {
        let count = (p as u64).pow(n);
        (0..count).find_map(|low| {
            let mut f = from_code(low, p, n as usize);
            f.push(1);
            is_irreducible(&f, p).then_some(f)
        })
    }
}

impl FieldCtx {
    fn build(p: u32, m: u32, k: u32, base: Option<&FieldCtx>) -> Result<Self, GfError> {
        let n = m * k;
        let q = checked_pow(p as u64, m).unwrap_or(u64::MAX);
        let size = checked_pow(p as u64, n).unwrap_or(u64::MAX);
        if size > MAX_FIELD_SIZE {
            return Err(GfError::SizeCap {
                size,
                cap: MAX_FIELD_SIZE,
            });
        }
        let modulus = fp_poly::smallest_irreducible(n, p).ok_or(GfError::NoIrreducible(n))?;
        debug_assert!(fp_poly::is_irreducible(&modulus, p));
        let size = size as u32;
        let mut ctx = FieldCtx {
            p,
            m,
            k,
            q: q as u32,
            size,
            modbits: modulus
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &c)| acc | ((c as u64) << i)),
            modulus,
            generator: FieldElem::ONE,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: Vec::new(),
            neg_table: Vec::new(),
            embedding: Vec::new(),
        };
        if p != 2 && size <= ADD_TABLE_LIMIT {
            let s = size as usize;
            ctx.add_table = (0..s * s)
                .map(|i| ctx.add_digits((i / s) as u32, (i % s) as u32))
                .collect();
            ctx.neg_table = (0..size).map(|a| ctx.neg_digits(a)).collect();
        }
        ctx.generator = ctx.find_generator();
        if (size as u64) <= TABLE_LIMIT && size > 1 {
            let order = (size - 1) as usize;
            let mut exp = vec![0u32; 2 * order];
            let mut log = vec![0u32; size as usize];
            let mut cur = 1u32;
            for (i, e) in exp.iter_mut().take(order).enumerate() {
                *e = cur;
                log[cur as usize] = i as u32;
                cur = ctx.mul_slow(cur, ctx.generator.0);
            }
            for i in order..2 * order {
                exp[i] = exp[i - order];
            }
            ctx.exp = exp;
            ctx.log = log;
        }
        ctx.embedding = match base {
            None => (0..size).map(FieldElem).collect(),
            Some(b) => ctx.locate_subfield(b),
        };
        Ok(ctx)
    }

    fn find_generator(&self) -> FieldElem {
        if self.size == 2 {
            return FieldElem::ONE;
        }
        let order = (self.size - 1) as u64;
        let factors = prime_factors(order);
        (2..self.size)
            .map(FieldElem)
            .find(|&g| factors.iter().all(|&l| self.pow_slow(g, order / l) != FieldElem::ONE))
            .expect("multiplicative group of a finite field is cyclic")
    }

    // Finds the copy of the base field: the smallest root of the base modulus
    // among elements fixed by the q-power map.
    fn locate_subfield(&self, base: &FieldCtx) -> Vec<FieldElem> {
        let q = base.size;
        let beta = if base.m == 1 {
            FieldElem::ZERO
        } else {
            let step = ((self.size - 1) / (q - 1)) as u64;
            let gamma = self.pow_slow(self.generator, step);
            let mut cands: Vec<FieldElem> = (0..q - 1).map(|j| self.pow_slow(gamma, j as u64)).collect();
            cands.sort();
            *cands
                .iter()
                .find(|&&b| {
                    let mut acc = FieldElem::ZERO;
                    for &c in base.modulus.iter().rev() {
                        acc = self.add(self.mul_slow_e(acc, b), FieldElem(c));
                    }
                    acc.is_zero()
                })
                .expect("base modulus splits in the extension")
        };
        (0..q)
            .map(|a| {
                // a = sum c_i u^i in base encoding; map u -> beta.
                let digits = fp_poly::from_code(a as u64, self.p, base.m as usize);
                let mut acc = FieldElem::ZERO;
                for &c in digits.iter().rev() {
                    acc = self.add(self.mul_slow_e(acc, beta), FieldElem(c));
                }
                acc
            })
            .collect()
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// `q` of the base field `F_q` this context extends.
    #[inline]
    pub fn base_order(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn base_exponent(&self) -> u32 {
        self.m
    }

    /// Extension degree over `F_q`.
    #[inline]
    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Number of elements, `q^k`.
    #[inline]
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Monic modulus over `F_p`, little-endian.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FieldElem {
        self.generator
    }

    pub fn elem(&self, idx: u64) -> Result<FieldElem, GfError> {
        if idx < self.size as u64 {
            Ok(FieldElem(idx as u32))
        } else {
            Err(GfError::OutOfRange { idx, size: self.size })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.size).map(FieldElem)
    }

    /// Integer `n` mapped into the prime field.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u32)
    }

    /// Image of a base-field element in this field.
    #[inline]
    pub fn embed(&self, a: FieldElem) -> FieldElem {
        self.embedding[a.0 as usize]
    }

    /// Images of all base-field elements, indexed by base encoding.
    pub fn embedding(&self) -> &[FieldElem] {
        &self.embedding
    }

    /// Inverse of [`embed`](Self::embed), if `a` lies in the base field.
    pub fn to_base(&self, a: FieldElem) -> Option<FieldElem> {
        self.embedding.iter().position(|&e| e == a).map(|i| FieldElem(i as u32))
    }

    pub fn in_base(&self, a: FieldElem) -> bool {
        self.frobenius(a) == a
    }

    fn add_digits(&self, mut a: u32, mut b: u32) -> u32 {
        let p = self.p;
        let mut out = 0;
        let mut scale = 1;
        while a > 0 || b > 0 {
            out += ((a % p + b % p) % p) * scale;
            a /= p;
            b /= p;
            scale *= p;
        }
        out
    }

    fn neg_digits(&self, mut a: u32) -> u32 {
        let p = self.p;
        let mut out = 0;
        let mut scale = 1;
        while a > 0 {
            out += ((p - a % p) % p) * scale;
            a /= p;
            scale *= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.p == 2 {
            FieldElem(a.0 ^ b.0)
        } else if !self.add_table.is_empty() {
            FieldElem(self.add_table[(a.0 * self.size + b.0) as usize])
        } else {
            FieldElem(self.add_digits(a.0, b.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if self.p == 2 {
            a
        } else if !self.neg_table.is_empty() {
            FieldElem(self.neg_table[a.0 as usize])
        } else {
            FieldElem(self.neg_digits(a.0))
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        if !self.log.is_empty() {
            let s = self.log[a.0 as usize] + self.log[b.0 as usize];
            FieldElem(self.exp[s as usize])
        } else {
            FieldElem(self.mul_slow(a.0, b.0))
        }
    }

    fn mul_slow_e(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.mul_slow(a.0, b.0))
    }

    /// Polynomial multiplication modulo the modulus, without tables.
    pub fn mul_poly(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.mul_slow_e(a, b)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let n = self.modulus.len() - 1;
        if self.p == 2 {
            let mut prod: u64 = 0;
            let (a, mut b) = (a as u64, b as u64);
            let mut shift = 0;
            while b != 0 {
                if b & 1 == 1 {
                    prod ^= a << shift;
                }
                b >>= 1;
                shift += 1;
            }
            for bit in (n..2 * n).rev() {
                if prod >> bit & 1 == 1 {
                    prod ^= self.modbits << (bit - n);
                }
            }
            return prod as u32;
        }
        let p = self.p;
        let da = fp_poly::from_code(a as u64, p, n);
        let db = fp_poly::from_code(b as u64, p, n);
        let mut prod = vec![0u64; 2 * n];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] += x as u64 * y as u64;
            }
        }
        let prod: Vec<u32> = prod.iter().map(|&c| (c % p as u64) as u32).collect();
        let r = fp_poly::rem(&prod, &self.modulus, p);
        r.iter().rev().fold(0u32, |acc, &c| acc * p + c)
    }

    fn pow_slow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let mut base = a.0;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            e >>= 1;
        }
        FieldElem(acc)
    }

    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        if !self.log.is_empty() {
            let order = (self.size - 1) as u64;
            let l = (self.log[a.0 as usize] as u64 * (e % order)) % order;
            return FieldElem(self.exp[l as usize]);
        }
        self.pow_slow(a, e)
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, GfError> {
        if a.0 == 0 {
            return Err(GfError::DivisionByZero);
        }
        if !self.log.is_empty() {
            let order = self.size - 1;
            let l = self.log[a.0 as usize];
            return Ok(FieldElem(self.exp[((order - l) % order) as usize]));
        }
        Ok(self.pow_slow(a, (self.size - 2) as u64))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Dispatches one arithmetic operation; `b` is ignored for `Inv` and `Pow`.
    pub fn arith(&self, op: ArithOp, a: FieldElem, b: FieldElem) -> Result<FieldElem, GfError> {
        match op {
            ArithOp::Add => Ok(self.add(a, b)),
            ArithOp::Mul => Ok(self.mul(a, b)),
            ArithOp::Inv => self.inv(a),
            ArithOp::Pow(e) => Ok(self.pow(a, e)),
        }
    }

    /// The `q`-power Frobenius over the base field `F_q`.
    #[inline]
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.q as u64)
    }

    /// Discrete log to the fixed generator, for nonzero `a` (table fields only).
    pub fn log(&self, a: FieldElem) -> Option<u32> {
        if a.0 == 0 || self.log.is_empty() {
            None
        } else {
            Some(self.log[a.0 as usize])
        }
    }

    /// Degree over `F_q` of the smallest subfield containing `a`.
    pub fn elem_degree(&self, a: FieldElem) -> u32 {
        let mut b = self.frobenius(a);
        let mut d = 1;
        while b != a {
            b = self.frobenius(b);
            d += 1;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_fields() {
        assert_eq!(field_ctx(2, 1).unwrap().size(), 2);
        assert_eq!(field_ctx(3, 1).unwrap().size(), 3);
        assert!(matches!(field_ctx(4, 1), Err(GfError::NotPrime(4))));
        assert!(matches!(field_ctx(2, 21), Err(GfError::SizeCap { .. })));
    }

    #[test]
    fn f4_modulus_and_relation() {
        let f4 = field_ctx(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);
        let u = FieldElem(2);
        assert_eq!(f4.mul(u, u), FieldElem(3)); // u^2 = u + 1
                                                // As a base field F_4 is fixed by its own q-power map; over F_2 it is not.
        assert_eq!(f4.frobenius(u), u);
        let f4_over_f2 = ext_field(&field_ctx(2, 1).unwrap(), 2).unwrap();
        assert_eq!(f4_over_f2.modulus(), f4.modulus());
        assert_eq!(f4_over_f2.frobenius(u), FieldElem(3));
    }

    #[test]
    fn small_ops() {
        let f5 = field_ctx(5, 1).unwrap();
        assert_eq!(f5.inv(FieldElem(2)).unwrap(), FieldElem(3));
        assert_eq!(f5.inv(FieldElem::ZERO), Err(GfError::DivisionByZero));
        let f2 = field_ctx(2, 1).unwrap();
        assert_eq!(f2.add(FieldElem(1), FieldElem(1)), FieldElem::ZERO);
        assert_eq!(
            f5.arith(ArithOp::Pow(3), FieldElem(2), FieldElem::ZERO).unwrap(),
            FieldElem(3)
        );
    }

    #[test]
    fn extensions() {
        let f2 = field_ctx(2, 1).unwrap();
        let f8 = ext_field(&f2, 3).unwrap();
        assert_eq!(f8.size(), 8);
        let f4 = ext_field(&f2, 2).unwrap();
        assert_eq!(f4.size(), 4);
        let fixed: Vec<_> = f4.elements().filter(|&a| f4.frobenius(a) == a).collect();
        assert_eq!(fixed, vec![FieldElem(0), FieldElem(1)]);
        let f3 = field_ctx(3, 1).unwrap();
        let f9 = ext_field(&f3, 2).unwrap();
        assert_eq!(f9.size(), 9);
        for a in f9.elements() {
            assert_eq!(f9.frobenius(f9.frobenius(a)), a);
        }
        assert_eq!(ext_field(&f9, 2), Err(GfError::NotBaseField));
    }

    #[test]
    fn embedding_is_a_ring_map() {
        for (p, m, k) in [(2, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 2)] {
            let base = field_ctx(p, m).unwrap();
            let ext = ext_field(&base, k).unwrap();
            for a in base.elements() {
                assert!(ext.in_base(ext.embed(a)));
                for b in base.elements() {
                    assert_eq!(ext.embed(base.add(a, b)), ext.add(ext.embed(a), ext.embed(b)));
                    assert_eq!(ext.embed(base.mul(a, b)), ext.mul(ext.embed(a), ext.embed(b)));
                }
                assert_eq!(ext.to_base(ext.embed(a)), Some(a));
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (p, m) in [
            (2, 1),
            (3, 1),
            (2, 2),
            (5, 1),
            (7, 1),
            (2, 3),
            (3, 2),
            (2, 4),
            (3, 3),
            (3, 4),
        ] {
            let f = field_ctx(p, m).unwrap();
            if f.size() > 81 {
                continue;
            }
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), FieldElem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElem::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_is_automorphism_fixing_base() {
        let cases = [
            (2, 1, 2),
            (2, 1, 3),
            (2, 1, 4),
            (3, 1, 2),
            (3, 1, 3),
            (2, 2, 2),
            (3, 1, 4),
        ];
        for (p, m, k) in cases {
            let base = field_ctx(p, m).unwrap();
            let f = ext_field(&base, k).unwrap();
            if f.size() > 81 {
                continue;
            }
            let mut fixed = 0;
            for a in f.elements() {
                if f.frobenius(a) == a {
                    fixed += 1;
                }
                for b in f.elements() {
                    assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                }
            }
            assert_eq!(fixed, base.size());
        }
    }

    #[test]
    fn tables_match_polynomial_multiplication() {
        for (p, m) in [(2, 8), (3, 5), (2, 5), (5, 3), (7, 2)] {
            let f = field_ctx(p, m).unwrap();
            assert!(f.size() <= 256);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul_poly(a, b));
                }
            }
        }
    }

    #[test]
    fn large_field_falls_back() {
        let f2 = field_ctx(2, 1).unwrap();
        let big = ext_field(&f2, 20).unwrap();
        assert_eq!(big.size(), 1 << 20);
        let g = big.generator();
        let x = big.pow(g, 12345);
        assert_eq!(big.mul(x, big.inv(x).unwrap()), FieldElem::ONE);
        assert_eq!(big.pow(g, (1 << 20) - 1), FieldElem::ONE);
        let f3 = field_ctx(3, 1).unwrap();
        let big3 = ext_field(&f3, 12).unwrap();
        let y = big3.pow(big3.generator(), 777);
        assert_eq!(big3.mul(y, big3.inv(y).unwrap()), FieldElem::ONE);
    }
}
