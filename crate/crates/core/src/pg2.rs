//! The projective plane over `F_q` and its extensions.
//!
//! Points and lines are normalized so the first nonzero coordinate is one, and
//! are ordered lexicographically by coordinate encodings. Points may live over
//! any extension `F_{q^k}`; lines are always defined over `F_q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::gf::{ext_field, field_for_order, FieldCtx, FieldElem, GfError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Pg2Error {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("point is not defined over the base field")]
    NotRational,
    #[error("point does not lie on the line")]
    NotOnLine,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A normalized homogeneous triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: [FieldElem; 3],
}

impl ProjPoint {
    /// Normalizes `v` so its first nonzero entry is one.
    pub fn new(ctx: &FieldCtx, v: [FieldElem; 3]) -> Result<Self, Pg2Error> {
        let lead = v.iter().copied().find(|c| !c.is_zero()).ok_or(Pg2Error::ZeroVector)?;
        let inv = ctx.inv(lead)?;
        Ok(ProjPoint {
            coords: v.map(|c| ctx.mul(c, inv)),
        })
    }

    /// Builds a point from raw coordinate indices in `ctx`.
    pub fn from_indices(ctx: &FieldCtx, v: [u32; 3]) -> Result<Self, Pg2Error> {
        let mut e = [FieldElem::ZERO; 3];
        for (slot, &i) in e.iter_mut().zip(v.iter()) {
            *slot = ctx.elem(i as u64)?;
        }
        ProjPoint::new(ctx, e)
    }

    pub(crate) fn raw(coords: [FieldElem; 3]) -> Self {
        ProjPoint { coords }
    }

    #[inline]
    pub fn coords(&self) -> [FieldElem; 3] {
        self.coords
    }

    /// Coordinate-wise Frobenius.
    pub fn frobenius(&self, ctx: &FieldCtx) -> ProjPoint {
        ProjPoint {
            coords: self.coords.map(|c| ctx.frobenius(c)),
        }
    }

    /// Re-expresses a point with coordinates in `from` inside the extension `to`.
    /// Both contexts must share the base field, and `from` must be `F_q`.
    pub fn embed(&self, to: &FieldCtx) -> ProjPoint {
        ProjPoint {
            coords: self.coords.map(|c| to.embed(c)),
        }
    }
}

/// An `F_q`-line `ax + by + cz = 0` with its deterministic basis pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProjLine {
    coeffs: [FieldElem; 3],
    basis: [ProjPoint; 2],
}

impl ProjLine {
    #[inline]
    pub fn coeffs(&self) -> [FieldElem; 3] {
        self.coeffs
    }

    /// The first two incident `F_q`-points in global order.
    #[inline]
    pub fn basis(&self) -> [ProjPoint; 2] {
        self.basis
    }
}

/// Every normalized point of `P^2` over `ctx`, in global order.
pub fn enumerate_points(ctx: &FieldCtx) -> Vec<ProjPoint> {
    let n = ctx.size();
    let e = |i: u32| ctx.elem(i as u64).expect("in range");
    let mut out = Vec::with_capacity((n as usize) * (n as usize) + n as usize + 1);
    out.push(ProjPoint::raw([FieldElem::ZERO, FieldElem::ZERO, FieldElem::ONE]));
    for z in 0..n {
        out.push(ProjPoint::raw([FieldElem::ZERO, FieldElem::ONE, e(z)]));
    }
    for y in 0..n {
        for z in 0..n {
            out.push(ProjPoint::raw([FieldElem::ONE, e(y), e(z)]));
        }
    }
    out
}

#[inline]
fn dot(ctx: &FieldCtx, a: [FieldElem; 3], b: [FieldElem; 3]) -> FieldElem {
    let mut acc = FieldElem::ZERO;
    for i in 0..3 {
        acc = ctx.add(acc, ctx.mul(a[i], b[i]));
    }
    acc
}

/// Incidence of a point over `ctx` with an `F_q`-line.
pub fn incident(ctx: &FieldCtx, p: &ProjPoint, l: &ProjLine) -> bool {
    let c = l.coeffs.map(|a| ctx.embed(a));
    dot(ctx, c, p.coords).is_zero()
}

/// Size of the Frobenius orbit of `p`; always divides the degree of `ctx`.
pub fn point_degree(ctx: &FieldCtx, p: &ProjPoint) -> u32 {
    let mut cur = p.frobenius(ctx);
    let mut d = 1;
    while cur != *p {
        cur = cur.frobenius(ctx);
        d += 1;
    }
    d
}

/// Möbius function.
pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Numbers `a_1..a_r` of closed points of each degree on a line (`P^1` over `F_q`),
/// from `sum_{m | e} m a_m = q^e + 1`.
pub fn closed_point_counts(q: u64, r: u32) -> Vec<u64> {
    (1..=r as u64)
        .map(|e| {
            let total: i128 = (1..=e)
                .filter(|m| e % m == 0)
                .map(|m| mobius(e / m) as i128 * (q as i128).pow(m as u32) + mobius(e / m) as i128)
                .sum();
            (total / e as i128) as u64
        })
        .collect()
}

/// `P^2(F_q)` with its points and lines in global order.
pub struct Plane {
    field: Arc<FieldCtx>,
    points: Vec<ProjPoint>,
    lines: Vec<ProjLine>,
    exts: Mutex<HashMap<u32, Arc<FieldCtx>>>,
}

impl std::fmt::Debug for Plane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plane").field("q", &self.q()).finish()
    }
}

impl Plane {
    pub fn new(q: u32) -> Result<Self, Pg2Error> {
        Ok(Plane::over(field_for_order(q)?))
    }

    pub fn over(field: FieldCtx) -> Self {
        let points = enumerate_points(&field);
        let lines = points
            .iter()
            .map(|c| {
                let coeffs = c.coords;
                let mut on = points.iter().filter(|p| dot(&field, coeffs, p.coords).is_zero());
                let b0 = *on.next().expect("a line has q+1 points");
                let b1 = *on.next().expect("a line has q+1 points");
                ProjLine {
                    coeffs,
                    basis: [b0, b1],
                }
            })
            .collect();
        Plane {
            field: Arc::new(field),
            points,
            lines,
            exts: Mutex::new(HashMap::new()),
        }
    }

    pub fn q(&self) -> u32 {
        self.field.size()
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<FieldCtx> {
        self.field.clone()
    }

    /// `F_{q^k}`, built once and cached.
    pub fn ext(&self, k: u32) -> Result<Arc<FieldCtx>, Pg2Error> {
        if k == 1 {
            return Ok(self.field.clone());
        }
        let mut cache = self.exts.lock().expect("cache lock");
        if let Some(f) = cache.get(&k) {
            return Ok(f.clone());
        }
        let f = Arc::new(ext_field(&self.field, k)?);
        cache.insert(k, f.clone());
        Ok(f)
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn lines(&self) -> &[ProjLine] {
        &self.lines
    }

    /// Alias of [`lines`](Self::lines), matching the enumeration vocabulary.
    pub fn enumerate_lines(&self) -> &[ProjLine] {
        &self.lines
    }

    pub fn point_index(&self, p: &ProjPoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn line_index(&self, l: &ProjLine) -> Option<usize> {
        self.lines.iter().position(|x| x.coeffs == l.coeffs)
    }

    /// The line with normalized coefficients `coeffs`.
    pub fn line_with_coeffs(&self, coeffs: [u32; 3]) -> Result<ProjLine, Pg2Error> {
        let target = ProjPoint::from_indices(&self.field, coeffs)?;
        Ok(self.lines[self.point_index(&target).expect("lines mirror points")])
    }

    pub fn is_incident(&self, p: &ProjPoint, l: &ProjLine) -> bool {
        dot(&self.field, l.coeffs, p.coords).is_zero()
    }

    /// The `q + 1` lines through an `F_q`-rational point given over `ctx`.
    pub fn lines_through(&self, ctx: &FieldCtx, p: &ProjPoint) -> Result<Vec<ProjLine>, Pg2Error> {
        let base = self.rational_point(ctx, p)?;
        Ok(self
            .lines
            .iter()
            .filter(|l| self.is_incident(&base, l))
            .copied()
            .collect())
    }

    /// Brings a point whose coordinates lie in `F_q` back to base encoding.
    pub fn rational_point(&self, ctx: &FieldCtx, p: &ProjPoint) -> Result<ProjPoint, Pg2Error> {
        let mut out = [FieldElem::ZERO; 3];
        for (o, &c) in out.iter_mut().zip(p.coords.iter()) {
            *o = ctx.to_base(c).ok_or(Pg2Error::NotRational)?;
        }
        Ok(ProjPoint::raw(out))
    }

    pub fn points_on(&self, l: &ProjLine) -> Vec<ProjPoint> {
        self.points.iter().filter(|p| self.is_incident(p, l)).copied().collect()
    }

    /// The point `s * B0 + t * B1` of `l` over `ctx`.
    pub fn point_at(ctx: &FieldCtx, l: &ProjLine, s: FieldElem, t: FieldElem) -> Result<ProjPoint, Pg2Error> {
        let [b0, b1] = l.basis;
        let v: [FieldElem; 3] =
            std::array::from_fn(|i| ctx.add(ctx.mul(s, ctx.embed(b0.coords[i])), ctx.mul(t, ctx.embed(b1.coords[i]))));
        ProjPoint::new(ctx, v)
    }

    /// Parameters `(s, t)`, normalized with first nonzero entry one, such that
    /// `p` is proportional to `s * B0 + t * B1`.
    pub fn line_params(ctx: &FieldCtx, l: &ProjLine, p: &ProjPoint) -> Result<(FieldElem, FieldElem), Pg2Error> {
        if !incident(ctx, p, l) {
            return Err(Pg2Error::NotOnLine);
        }
        let b0 = l.basis[0].coords.map(|c| ctx.embed(c));
        let b1 = l.basis[1].coords.map(|c| ctx.embed(c));
        let v = p.coords;
        // Pick a 2x2 minor of [b0 b1] that is invertible and solve by Cramer.
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let det = ctx.sub(ctx.mul(b0[i], b1[j]), ctx.mul(b0[j], b1[i]));
            if det.is_zero() {
                continue;
            }
            let inv = ctx.inv(det)?;
            let s = ctx.mul(ctx.sub(ctx.mul(v[i], b1[j]), ctx.mul(v[j], b1[i])), inv);
            let t = ctx.mul(ctx.sub(ctx.mul(b0[i], v[j]), ctx.mul(b0[j], v[i])), inv);
            let lead = if s.is_zero() { t } else { s };
            let li = ctx.inv(lead)?;
            return Ok((ctx.mul(s, li), ctx.mul(t, li)));
        }
        unreachable!("basis points are distinct")
    }
}
