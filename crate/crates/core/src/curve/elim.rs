//! Exact smoothness by elimination.
//!
//! Singular points are the common zeros of `f, f_x, f_y, f_z`. On the line
//! `z = 0` this is a univariate gcd. On the chart `z = 1` the four polynomials
//! live in `F[x][y]`; an eliminant `E(x)` in the ideal they generate bounds the
//! possible `x`-coordinates, and a gcd over `(F[x] / rad E)[y]` with dynamic
//! splitting of the modulus decides whether a common `y`-root sits over any of
//! them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::TernaryForm;
use crate::gf::{FieldCtx, FieldElem};
use crate::pg2::Plane;
use crate::poly::Poly;

/// Polynomial in `y` with coefficients in `F[x]`, trimmed.
type Biv = Vec<Poly>;

fn trim(mut a: Biv) -> Biv {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn ydeg(a: &Biv) -> Option<usize> {
    a.len().checked_sub(1)
}

fn poly_is_unit(p: &Poly) -> bool {
    p.degree() == Some(0)
}

fn exact_div(ctx: &FieldCtx, a: &Poly, b: &Poly) -> Poly {
    let (q, r) = a.divrem(ctx, b);
    debug_assert!(r.is_zero(), "inexact division");
    q
}

/// Affine chart `z = 1` of `f`, coefficients mapped into `ext`.
fn chart(ext: &FieldCtx, f: &TernaryForm) -> Biv {
    let d = f.degree() as usize;
    let mut dense = vec![vec![FieldElem::ZERO; d + 1]; d + 1];
    for (c, [i, j, _]) in f.terms() {
        dense[j as usize][i as usize] = ext.embed(c);
    }
    trim(dense.into_iter().map(Poly::from_coeffs).collect())
}

/// `f(1, y, 0)` as a polynomial in `y`.
fn at_infinity(f: &TernaryForm) -> Poly {
    let d = f.degree() as usize;
    let mut v = vec![FieldElem::ZERO; d + 1];
    for (c, [_, j, k]) in f.terms() {
        if k == 0 {
            v[j as usize] = c;
        }
    }
    Poly::from_coeffs(v)
}

fn content(ctx: &FieldCtx, a: &Biv) -> Poly {
    a.iter().fold(Poly::zero(), |g, c| g.gcd(ctx, c))
}

fn prim_part(ctx: &FieldCtx, a: &Biv) -> Biv {
    let c = content(ctx, a);
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|x| exact_div(ctx, x, &c)).collect()
}

/// A nonzero `F[x]`-multiple of the remainder of `a` by `b` in `F(x)[y]`.
fn prem(ctx: &FieldCtx, a: &Biv, b: &Biv) -> Biv {
    let n = ydeg(b).expect("nonzero divisor");
    let lb = b[n].clone();
    let mut r = a.clone();
    while let Some(m) = ydeg(&r) {
        if m < n {
            break;
        }
        let lr = r[m].clone();
        let shift = m - n;
        let mut next: Biv = r.iter().map(|c| c.mul(ctx, &lb)).collect();
        for (j, bj) in b.iter().enumerate() {
            next[j + shift] = next[j + shift].sub(ctx, &bj.mul(ctx, &lr));
        }
        next.pop();
        r = trim(next);
    }
    r
}

/// Primitive gcd in `F[x][y]` of two primitive polynomials; only its
/// `y`-degree is used by callers.
fn prim_gcd(ctx: &FieldCtx, a: &Biv, b: &Biv) -> Biv {
    let (mut a, mut b) = (a.clone(), b.clone());
    if b.is_empty() {
        return a;
    }
    if a.is_empty() {
        return b;
    }
    if ydeg(&a) < ydeg(&b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        if ydeg(&b) == Some(0) {
            return vec![Poly::one()];
        }
        let r = prem(ctx, &a, &b);
        if r.is_empty() {
            return b;
        }
        a = b;
        b = prim_part(ctx, &r);
    }
}

/// True when the polynomials share a nonconstant factor in `F[x][y]`
/// (or are all zero).
fn share_factor(ctx: &FieldCtx, polys: &[Biv]) -> bool {
    let c = polys.iter().fold(Poly::zero(), |g, p| g.gcd(ctx, &content(ctx, p)));
    if !poly_is_unit(&c) {
        return true;
    }
    let mut g: Biv = Vec::new();
    for p in polys {
        g = prim_gcd(ctx, &g, &prim_part(ctx, p));
        if ydeg(&g) == Some(0) {
            return false;
        }
    }
    ydeg(&g) != Some(0)
}

/// Determinant by fraction-free (Bareiss) elimination over `F[x]`.
fn det(ctx: &FieldCtx, mut m: Vec<Vec<Poly>>) -> Poly {
    let n = m.len();
    let mut negate = false;
    let mut prev = Poly::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return Poly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[k][k].mul(ctx, &m[i][j]).sub(ctx, &m[i][k].mul(ctx, &m[k][j]));
                m[i][j] = exact_div(ctx, &v, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        d.scale(ctx, ctx.neg(FieldElem::ONE))
    } else {
        d
    }
}

/// `Res_y(a, b)` for `a`, `b` of positive `y`-degree.
fn resultant(ctx: &FieldCtx, a: &Biv, b: &Biv) -> Poly {
    let (m, n) = (a.len() - 1, b.len() - 1);
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![Poly::zero(); size];
        for (j, c) in a.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![Poly::zero(); size];
        for (j, c) in b.iter().rev().enumerate() {
            row[i + j] = c.clone();
        }
        rows.push(row);
    }
    det(ctx, rows)
}

/// `g` with `g(x)^p = f(x)`, for `f` with zero derivative.
fn pth_root(ctx: &FieldCtx, f: &Poly) -> Poly {
    let p = ctx.characteristic() as usize;
    let e = (ctx.size() / ctx.characteristic()) as u64;
    Poly::from_coeffs(f.coeffs().iter().step_by(p).map(|&c| ctx.pow(c, e)).collect())
}

/// Monic radical (product of the distinct monic irreducible factors).
fn radical(ctx: &FieldCtx, f: &Poly) -> Poly {
    if f.degree().unwrap_or(0) == 0 {
        return Poly::one();
    }
    let df = f.derivative(ctx);
    if df.is_zero() {
        return radical(ctx, &pth_root(ctx, f));
    }
    let g = f.gcd(ctx, &df);
    let w = exact_div(ctx, f, &g).monic(ctx);
    let rg = radical(ctx, &g);
    let common = w.gcd(ctx, &rg);
    exact_div(ctx, &w.mul(ctx, &rg), &common).monic(ctx)
}

enum Monic {
    Done(Biv),
    Split(Poly, Poly),
}

fn reduce(ctx: &FieldCtx, r: &Poly, a: &Biv) -> Biv {
    trim(a.iter().map(|c| c.rem(ctx, r)).collect())
}

/// Makes `a` (reduced, nonzero) monic over `F[x]/r`, or splits `r`.
fn make_monic(ctx: &FieldCtx, r: &Poly, a: &Biv) -> Monic {
    let lc = a.last().expect("nonzero");
    let (g, inv) = lc.ext_gcd(ctx, r);
    if poly_is_unit(&g) {
        return Monic::Done(a.iter().map(|c| c.mul(ctx, &inv).rem(ctx, r)).collect());
    }
    let other = exact_div(ctx, r, &g);
    Monic::Split(g, other)
}

/// Remainder of `a` by a monic `b` over `F[x]/r`.
fn rem_monic(ctx: &FieldCtx, r: &Poly, a: &Biv, b: &Biv) -> Biv {
    let n = b.len() - 1;
    let mut a = a.clone();
    while a.len() > n {
        let m = a.len() - 1;
        let lc = a[m].clone();
        for (j, bj) in b.iter().enumerate() {
            let t = m - n + j;
            a[t] = a[t].sub(ctx, &bj.mul(ctx, &lc)).rem(ctx, r);
        }
        a = trim(a);
    }
    a
}

/// Whether some root `x0` of the squarefree `r` carries a common `y`-root of
/// every polynomial (an identically vanishing fibre counts).
fn common_root_over(ctx: &FieldCtx, r: &Poly, polys: &[Biv]) -> bool {
    if r.degree().unwrap_or(0) == 0 {
        return false;
    }
    let mut g: Biv = Vec::new();
    for p in polys {
        let (mut a, mut b) = (g, reduce(ctx, r, p));
        loop {
            if b.is_empty() {
                break;
            }
            b = match make_monic(ctx, r, &b) {
                Monic::Done(m) => m,
                Monic::Split(r1, r2) => return common_root_over(ctx, &r1, polys) || common_root_over(ctx, &r2, polys),
            };
            if b.len() == 1 {
                return false;
            }
            let next = rem_monic(ctx, r, &a, &b);
            a = b;
            b = next;
        }
        g = a;
    }
    // All zero, or a monic gcd of positive degree.
    g.len() != 1
}

fn combine(ctx: &FieldCtx, polys: &[Biv], w: &[FieldElem]) -> Biv {
    let len = polys.iter().map(|p| p.len()).max().unwrap_or(0);
    let mut out = vec![Poly::zero(); len];
    for (p, &c) in polys.iter().zip(w) {
        if c.is_zero() {
            continue;
        }
        for (j, pj) in p.iter().enumerate() {
            out[j] = out[j].add(ctx, &pj.scale(ctx, c));
        }
    }
    trim(out)
}

/// A nonzero element of `(a, b) ∩ F[x]`, if the pair yields one directly.
fn eliminant(ctx: &FieldCtx, a: &Biv, b: &Biv) -> Option<Poly> {
    for p in [a, b] {
        if ydeg(p) == Some(0) {
            return Some(p[0].clone());
        }
    }
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some(resultant(ctx, a, b)).filter(|r| !r.is_zero())
}

fn affine_singular(ctx: &FieldCtx, polys: &[Biv]) -> Option<bool> {
    let nonzero: Vec<&Biv> = polys.iter().filter(|p| !p.is_empty()).collect();
    for i in 0..nonzero.len() {
        for j in i + 1..nonzero.len() {
            if let Some(e) = eliminant(ctx, nonzero[i], nonzero[j]) {
                return Some(common_root_over(ctx, &radical(ctx, &e), polys));
            }
        }
    }
    if nonzero.len() == 1 {
        if let Some(e) = eliminant(ctx, nonzero[0], nonzero[0]) {
            return Some(common_root_over(ctx, &radical(ctx, &e), polys));
        }
    }
    None
}

/// Exact test for a singular point of `f` anywhere in `P^2` over the closure.
pub(crate) fn has_singular_point(plane: &Plane, f: &TernaryForm) -> bool {
    let base = plane.field();
    let [fx, fy, fz] = f.partials(base);
    let forms = [f, &fx, &fy, &fz];

    // The point [0:1:0].
    let top = |g: &TernaryForm| {
        let e = g.degree();
        g.coeff(0, e, 0)
    };
    if forms.iter().all(|g| top(g).is_zero()) {
        return true;
    }
    // Points [1:y:0].
    let inf = forms.iter().fold(Poly::zero(), |g, h| g.gcd(base, &at_infinity(h)));
    if inf.degree() != Some(0) {
        return true;
    }

    let polys: Vec<Biv> = forms.iter().map(|g| chart(base, g)).collect();
    if share_factor(base, &polys) {
        return true;
    }
    if let Some(v) = affine_singular(base, &polys) {
        return v;
    }
    // No coprime pair among the four; a generic combination over a large
    // enough field always is one.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut k = 1;
    loop {
        let ext = match plane.ext(k) {
            Ok(e) => e,
            Err(_) => panic!("no eliminant found below the field-size cap"),
        };
        let lifted: Vec<Biv> = forms.iter().map(|g| chart(&ext, g)).collect();
        for _ in 0..16 {
            let mut w = || -> Vec<FieldElem> { (0..4).map(|_| FieldElem(rng.gen_range(0..ext.size()))).collect() };
            let (wa, wb) = (w(), w());
            let a = combine(&ext, &lifted, &wa);
            let b = combine(&ext, &lifted, &wb);
            if let Some(e) = eliminant(&ext, &a, &b) {
                return common_root_over(&ext, &radical(&ext, &e), &lifted);
            }
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_ctx;

    fn p(ctx: &FieldCtx, v: &[i64]) -> Poly {
        Poly::from_coeffs(v.iter().map(|&c| ctx.from_int(c)).collect())
    }

    #[test]
    fn radical_examples() {
        let f2 = field_ctx(2, 1).unwrap();
        // (x+1)^2 x^3 -> x(x+1)
        let f = p(&f2, &[1, 1])
            .mul(&f2, &p(&f2, &[1, 1]))
            .mul(&f2, &p(&f2, &[0, 0, 0, 1]));
        assert_eq!(radical(&f2, &f), p(&f2, &[0, 1, 1]));
        let f3 = field_ctx(3, 1).unwrap();
        // (x^2+1)^3 (x+1) over F_3
        let a = p(&f3, &[1, 0, 1]);
        let f = a.mul(&f3, &a).mul(&f3, &a).mul(&f3, &p(&f3, &[1, 1]));
        assert_eq!(radical(&f3, &f), a.mul(&f3, &p(&f3, &[1, 1])));
    }

    #[test]
    fn resultant_of_linear_pair() {
        let f5 = field_ctx(5, 1).unwrap();
        // y - x and y - x^2: resultant vanishes where x = x^2.
        let a = vec![p(&f5, &[0, 4]), Poly::one()];
        let b = vec![p(&f5, &[0, 0, 4]), Poly::one()];
        let r = resultant(&f5, &a, &b).monic(&f5);
        assert_eq!(r, p(&f5, &[0, 4, 1]));
    }

    #[test]
    fn common_roots_via_splitting() {
        let f3 = field_ctx(3, 1).unwrap();
        // Over x in {0, 1}: y - x and y share the root only at x = 0.
        let r = p(&f3, &[0, 2, 1]);
        let a = vec![p(&f3, &[0, 2]), Poly::one()];
        let b = vec![Poly::zero(), Poly::one()];
        assert!(common_root_over(&f3, &r, &[a.clone(), b.clone()]));
        let r1 = p(&f3, &[2, 1]);
        assert!(!common_root_over(&f3, &r1, &[a, b]));
    }
}
