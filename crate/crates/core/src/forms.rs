//! Dense ternary forms (plane curves) and binary forms (their restrictions to lines).
//!
//! Ternary coefficients are indexed by exponent triples `(i, j, k)` with
//! `i + j + k = d` in graded-lexicographic order `x > y > z`:
//! `x^d, x^{d-1}y, x^{d-1}z, x^{d-2}y^2, ...`.
//! Binary form coefficients `a_0..a_d` belong to `s^{d-j} t^j`.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::gf::{FieldCtx, FieldElem};
use crate::pg2::{ProjLine, ProjPoint};
use crate::poly::Poly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("coefficient vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("binary form is zero")]
    ZeroForm,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("census size q^{exponent} exceeds the cap 2^{cap_log2}")]
    SizeCap { exponent: u32, cap_log2: u32 },
}

/// Number of monomials of degree `d` in three variables.
#[inline]
pub fn monomial_count(d: u32) -> usize {
    ((d + 1) * (d + 2) / 2) as usize
}

/// Exponent triples of degree `d` in coefficient order.
pub fn monomials(d: u32) -> Vec<[u32; 3]> {
    let mut out = Vec::with_capacity(monomial_count(d));
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push([i, j, d - i - j]);
        }
    }
    out
}

/// Position of `x^i y^j z^k` (with `i + j + k = d`) in coefficient order.
#[inline]
pub fn monomial_index(d: u32, i: u32, j: u32) -> usize {
    let a = d - i;
    (a * (a + 1) / 2 + (a - j)) as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TernaryForm {
    d: u32,
    coeffs: Vec<FieldElem>,
}

impl TernaryForm {
    pub fn new(d: u32, coeffs: Vec<FieldElem>) -> Result<Self, FormError> {
        let expected = monomial_count(d);
        if coeffs.len() != expected {
            return Err(FormError::Length {
                got: coeffs.len(),
                expected,
            });
        }
        Ok(TernaryForm { d, coeffs })
    }

    pub fn zero(d: u32) -> Self {
        TernaryForm {
            d,
            coeffs: vec![FieldElem::ZERO; monomial_count(d)],
        }
    }

    /// Builds a form from `(coefficient, [i, j, k])` terms; repeated monomials add up.
    pub fn from_terms(ctx: &FieldCtx, d: u32, terms: &[(i64, [u32; 3])]) -> Self {
        let mut f = TernaryForm::zero(d);
        for &(c, [i, j, k]) in terms {
            assert_eq!(i + j + k, d, "monomial degree mismatch");
            let idx = monomial_index(d, i, j);
            f.coeffs[idx] = ctx.add(f.coeffs[idx], ctx.from_int(c));
        }
        f
    }

    /// The form whose coefficient digits (base `q`) spell `index`.
    pub fn from_index(ctx: &FieldCtx, d: u32, mut index: u64) -> Self {
        let q = ctx.size() as u64;
        let coeffs = (0..monomial_count(d))
            .map(|_| {
                let c = FieldElem((index % q) as u32);
                index /= q;
                c
            })
            .collect();
        TernaryForm { d, coeffs }
    }

    pub fn random<R: Rng + ?Sized>(ctx: &FieldCtx, d: u32, rng: &mut R) -> Self {
        let q = ctx.size();
        TernaryForm {
            d,
            coeffs: (0..monomial_count(d)).map(|_| FieldElem(rng.gen_range(0..q))).collect(),
        }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.d
    }

    /// Steps to the form with index one larger, wrapping to zero.
    pub(crate) fn increment(&mut self, q: u32) {
        for c in self.coeffs.iter_mut() {
            if c.0 + 1 < q {
                c.0 += 1;
                return;
            }
            c.0 = 0;
        }
    }

    #[inline]
    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: u32, j: u32, k: u32) -> FieldElem {
        debug_assert_eq!(i + j + k, self.d);
        self.coeffs[monomial_index(self.d, i, j)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn terms(&self) -> impl Iterator<Item = (FieldElem, [u32; 3])> + '_ {
        self.coeffs
            .iter()
            .copied()
            .zip(monomials(self.d))
            .filter(|(c, _)| !c.is_zero())
    }

    /// Value at a point whose coordinates live in `ctx`, an extension of the
    /// coefficient field (or the coefficient field itself).
    pub fn evaluate(&self, ctx: &FieldCtx, p: &ProjPoint) -> FieldElem {
        let powers = coord_powers(ctx, p, self.d);
        let mut acc = FieldElem::ZERO;
        for (c, [i, j, k]) in self.terms() {
            let m = ctx.mul(
                ctx.mul(powers[0][i as usize], powers[1][j as usize]),
                powers[2][k as usize],
            );
            acc = ctx.add(acc, ctx.mul(ctx.embed(c), m));
        }
        acc
    }

    /// Formal partial derivatives `(f_x, f_y, f_z)` of degree `d - 1`.
    pub fn partials(&self, ctx: &FieldCtx) -> [TernaryForm; 3] {
        assert!(self.d >= 1, "partials need degree at least one");
        let mut out = [
            TernaryForm::zero(self.d - 1),
            TernaryForm::zero(self.d - 1),
            TernaryForm::zero(self.d - 1),
        ];
        for (c, e) in self.terms() {
            for (var, slot) in out.iter_mut().enumerate() {
                if e[var] == 0 {
                    continue;
                }
                let mut e2 = e;
                e2[var] -= 1;
                let v = ctx.mul(ctx.from_int(e[var] as i64), c);
                let idx = monomial_index(self.d - 1, e2[0], e2[1]);
                slot.coeffs[idx] = ctx.add(slot.coeffs[idx], v);
            }
        }
        out
    }

    pub fn add(&self, ctx: &FieldCtx, other: &TernaryForm) -> TernaryForm {
        assert_eq!(self.d, other.d);
        TernaryForm {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| ctx.add(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, ctx: &FieldCtx, c: FieldElem) -> TernaryForm {
        TernaryForm {
            d: self.d,
            coeffs: self.coeffs.iter().map(|&a| ctx.mul(a, c)).collect(),
        }
    }

    pub fn mul(&self, ctx: &FieldCtx, other: &TernaryForm) -> TernaryForm {
        let d = self.d + other.d;
        let mut out = TernaryForm::zero(d);
        for (a, ea) in self.terms() {
            for (b, eb) in other.terms() {
                let idx = monomial_index(d, ea[0] + eb[0], ea[1] + eb[1]);
                out.coeffs[idx] = ctx.add(out.coeffs[idx], ctx.mul(a, b));
            }
        }
        out
    }

    /// `f(M (x, y, z)^T)`: each variable is replaced by the corresponding row of `m`.
    pub fn compose_linear(&self, ctx: &FieldCtx, m: &[[FieldElem; 3]; 3]) -> TernaryForm {
        let lin: Vec<TernaryForm> = m
            .iter()
            .map(|row| TernaryForm {
                d: 1,
                coeffs: row.to_vec(),
            })
            .collect();
        let pow = |f: &TernaryForm, e: u32| {
            let mut acc = TernaryForm::from_terms(ctx, 0, &[(1, [0, 0, 0])]);
            for _ in 0..e {
                acc = acc.mul(ctx, f);
            }
            acc
        };
        let mut out = TernaryForm::zero(self.d);
        for (c, [i, j, k]) in self.terms() {
            let t = pow(&lin[0], i).mul(ctx, &pow(&lin[1], j)).mul(ctx, &pow(&lin[2], k));
            out = out.add(ctx, &t.scale(ctx, c));
        }
        out
    }

    /// Restriction `g(s, t) = f(s B0 + t B1)` to a line with its basis pair.
    pub fn restrict_to_line(&self, ctx: &FieldCtx, l: &ProjLine) -> BinaryForm {
        LineRestriction::new(ctx, l, self.d).apply(ctx, self)
    }

    /// Text form `c*x^i*y^j*z^k+...`, coefficients as basis encodings.
    pub fn to_text(&self) -> String {
        let terms: Vec<String> = self
            .terms()
            .map(|(c, [i, j, k])| format!("{}*x^{}*y^{}*z^{}", c.idx(), i, j, k))
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }

    /// Parses [`to_text`](Self::to_text) output. `degree` is required for `"0"`
    /// and otherwise checked against the terms.
    pub fn parse(ctx: &FieldCtx, text: &str, degree: Option<u32>) -> Result<Self, FormError> {
        let text = text.trim();
        if text == "0" {
            let d = degree.ok_or_else(|| FormError::Parse("degree needed for the zero form".into()))?;
            return Ok(TernaryForm::zero(d));
        }
        let mut parsed = Vec::new();
        for term in text.split('+') {
            let parts: Vec<&str> = term.trim().split('*').collect();
            if parts.len() != 4 {
                return Err(FormError::Parse(format!("bad term `{term}`")));
            }
            let c: u64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| FormError::Parse(format!("bad coefficient in `{term}`")))?;
            let c = ctx.elem(c).map_err(|e| FormError::Parse(e.to_string()))?;
            let mut e = [0u32; 3];
            for (slot, (part, var)) in e.iter_mut().zip(parts[1..].iter().zip(["x", "y", "z"])) {
                let exp = part
                    .trim()
                    .strip_prefix(var)
                    .and_then(|r| r.strip_prefix('^'))
                    .ok_or_else(|| FormError::Parse(format!("expected {var}^n in `{term}`")))?;
                *slot = exp
                    .parse()
                    .map_err(|_| FormError::Parse(format!("bad exponent in `{term}`")))?;
            }
            parsed.push((c, e));
        }
        let d = parsed[0].1.iter().sum::<u32>();
        if let Some(h) = degree {
            if h != d {
                return Err(FormError::Parse(format!("degree {d} does not match {h}")));
            }
        }
        let mut f = TernaryForm::zero(d);
        for (c, e) in parsed {
            if e.iter().sum::<u32>() != d {
                return Err(FormError::Parse("terms of mixed degree".into()));
            }
            let idx = monomial_index(d, e[0], e[1]);
            f.coeffs[idx] = ctx.add(f.coeffs[idx], c);
        }
        Ok(f)
    }
}

impl fmt::Display for TernaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn coord_powers(ctx: &FieldCtx, p: &ProjPoint, d: u32) -> [Vec<FieldElem>; 3] {
    p.coords().map(|c| {
        let mut v = Vec::with_capacity(d as usize + 1);
        let mut cur = FieldElem::ONE;
        for _ in 0..=d {
            v.push(cur);
            cur = ctx.mul(cur, c);
        }
        v
    })
}

/// Binary form `a_0 s^d + a_1 s^{d-1} t + ... + a_d t^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    d: u32,
    coeffs: Vec<FieldElem>,
}

impl BinaryForm {
    pub fn new(d: u32, coeffs: Vec<FieldElem>) -> Result<Self, FormError> {
        if coeffs.len() != d as usize + 1 {
            return Err(FormError::Length {
                got: coeffs.len(),
                expected: d as usize + 1,
            });
        }
        Ok(BinaryForm { d, coeffs })
    }

    pub fn from_ints(ctx: &FieldCtx, coeffs: &[i64]) -> Self {
        BinaryForm {
            d: coeffs.len() as u32 - 1,
            coeffs: coeffs.iter().map(|&c| ctx.from_int(c)).collect(),
        }
    }

    /// The form whose coefficient digits (base `q`) spell `index`.
    pub fn from_index(ctx: &FieldCtx, d: u32, mut index: u64) -> Self {
        let q = ctx.size() as u64;
        BinaryForm {
            d,
            coeffs: (0..=d)
                .map(|_| {
                    let c = FieldElem((index % q) as u32);
                    index /= q;
                    c
                })
                .collect(),
        }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Dehomogenization `g(s, 1)` as a polynomial in `s`.
    pub fn dehomogenize(&self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().rev().copied().collect())
    }

    /// `(g_s, g_t)`, each of degree `d - 1`.
    pub fn partials(&self, ctx: &FieldCtx) -> (BinaryForm, BinaryForm) {
        let d = self.d;
        let gs = (0..d)
            .map(|j| ctx.mul(ctx.from_int((d - j) as i64), self.coeffs[j as usize]))
            .collect();
        let gt = (1..=d)
            .map(|j| ctx.mul(ctx.from_int(j as i64), self.coeffs[j as usize]))
            .collect();
        (BinaryForm { d: d - 1, coeffs: gs }, BinaryForm { d: d - 1, coeffs: gt })
    }

    /// Multiplicity of the root `[1 : 0]`, i.e. the power of `t` dividing `g`.
    fn t_multiplicity(&self) -> u32 {
        self.coeffs.iter().take_while(|c| c.is_zero()).count() as u32
    }
}

/// True iff `g` is nonzero with `d` distinct roots in `P^1` over the closure.
pub fn binary_squarefree(ctx: &FieldCtx, g: &BinaryForm) -> bool {
    if g.is_zero() {
        return false;
    }
    if g.d == 0 {
        return true;
    }
    let (gs, gt) = g.partials(ctx);
    if gs.is_zero() && gt.is_zero() {
        // Every exponent is divisible by p, so g is a p-th power.
        return false;
    }
    if g.t_multiplicity() >= 2 {
        return false;
    }
    let h = g.dehomogenize();
    h.gcd(ctx, &h.derivative(ctx)).is_constant()
}

/// Largest `m` with `(t0 s - s0 t)^m` dividing `g`; `root` lives in `ext`,
/// which must contain the coefficient field of `g`.
pub fn linear_factor_multiplicity(
    ext: &FieldCtx,
    g: &BinaryForm,
    root: (FieldElem, FieldElem),
) -> Result<u32, FormError> {
    if g.is_zero() {
        return Err(FormError::ZeroForm);
    }
    let (s0, t0) = root;
    if t0.is_zero() {
        assert!(!s0.is_zero(), "root must be a projective point");
        return Ok(g.t_multiplicity());
    }
    let lambda = ext.div(s0, t0).expect("t0 nonzero");
    let mut h = g.dehomogenize().map(|c| ext.embed(c));
    let lin = Poly::from_coeffs(vec![ext.neg(lambda), FieldElem::ONE]);
    let mut m = 0;
    while !h.is_zero() && h.eval(ext, lambda).is_zero() {
        h = h.divrem(ext, &lin).0;
        m += 1;
    }
    Ok(m)
}

/// Largest exponent `e` with `q^e <= 2^24`, the exhaustive binary-form cap.
pub const BINARY_CENSUS_CAP_LOG2: u32 = 24;

/// Exact number of degree-`d` binary forms (zero included) with a repeated root.
pub fn count_nonsquarefree(ctx: &FieldCtx, d: u32) -> Result<u64, FormError> {
    let q = ctx.size() as u64;
    let total = q
        .checked_pow(d + 1)
        .filter(|&t| t <= 1 << BINARY_CENSUS_CAP_LOG2)
        .ok_or(FormError::SizeCap {
            exponent: d + 1,
            cap_log2: BINARY_CENSUS_CAP_LOG2,
        })?;
    Ok((0..total)
        .filter(|&i| !binary_squarefree(ctx, &BinaryForm::from_index(ctx, d, i)))
        .count() as u64)
}

/// Precomputed restriction map `R_d -> F_q[s, t]_d` for one line.
///
/// `rows[j][m]` is the coefficient of `s^{d-j} t^j` in the image of monomial `m`.
#[derive(Clone, Debug)]
pub struct LineRestriction {
    d: u32,
    rows: Vec<Vec<FieldElem>>,
}

impl LineRestriction {
    pub fn new(ctx: &FieldCtx, l: &ProjLine, d: u32) -> Self {
        let [b0, b1] = l.basis();
        let (c0, c1) = (b0.coords(), b1.coords());
        // Powers of the linear forms c0[v] s + c1[v] t, as polynomials in t.
        let powers: Vec<Vec<Poly>> = (0..3)
            .map(|v| {
                let lin = Poly::from_coeffs(vec![c0[v], c1[v]]);
                let mut out = vec![Poly::one()];
                for e in 1..=d as usize {
                    out.push(out[e - 1].mul(ctx, &lin));
                }
                out
            })
            .collect();
        let mons = monomials(d);
        let mut rows = vec![vec![FieldElem::ZERO; mons.len()]; d as usize + 1];
        for (m, [i, j, k]) in mons.iter().enumerate() {
            let img = powers[0][*i as usize]
                .mul(ctx, &powers[1][*j as usize])
                .mul(ctx, &powers[2][*k as usize]);
            for (t, row) in rows.iter_mut().enumerate() {
                row[m] = img.coeff(t);
            }
        }
        LineRestriction { d, rows }
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    /// `rows[j]` gives the linear functional for the coefficient of `s^{d-j} t^j`.
    pub fn rows(&self) -> &[Vec<FieldElem>] {
        &self.rows
    }

    pub fn apply(&self, ctx: &FieldCtx, f: &TernaryForm) -> BinaryForm {
        debug_assert_eq!(f.degree(), self.d);
        let coeffs = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .zip(f.coeffs())
                    .fold(FieldElem::ZERO, |acc, (&r, &c)| ctx.add(acc, ctx.mul(r, c)))
            })
            .collect();
        BinaryForm { d: self.d, coeffs }
    }
}
