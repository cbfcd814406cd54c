//! Geometric predicates on plane curves: transversality, tangency,
//! singularity and smoothness.

mod elim;

use thiserror::Error;

use crate::forms::{binary_squarefree, linear_factor_multiplicity, FormError, LineRestriction, TernaryForm};
use crate::gf::{FieldCtx, FieldElem};
use crate::pg2::{enumerate_points, Pg2Error, Plane, ProjLine, ProjPoint};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("the zero form has no smoothness verdict")]
    ZeroForm,
    #[error("restriction to the line is zero")]
    ZeroRestriction,
    #[error("extension degree {k} needs a field of size q^{k} beyond the cap {cap}")]
    Cap { k: u32, cap: u64 },
    #[error("degree {d} exceeds the enumeration cap {cap}")]
    DegreeCap { d: u32, cap: u32 },
    #[error(transparent)]
    Plane(#[from] Pg2Error),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// True iff the restriction of `f` to `l` is squarefree. `f = 0` is never transverse.
pub fn is_transverse(plane: &Plane, f: &TernaryForm, l: &ProjLine) -> bool {
    let ctx = plane.field();
    binary_squarefree(ctx, &f.restrict_to_line(ctx, l))
}

/// True iff no `F_q`-line is transverse to `f`.
pub fn is_transverse_free(plane: &Plane, f: &TernaryForm) -> bool {
    plane.lines().iter().all(|l| !is_transverse(plane, f, l))
}

/// True iff `f` and all three partials vanish at `p` (a point over `ctx`).
pub fn is_singular_at(base: &FieldCtx, ctx: &FieldCtx, f: &TernaryForm, p: &ProjPoint) -> bool {
    if !f.evaluate(ctx, p).is_zero() {
        return false;
    }
    if f.degree() == 0 {
        return true;
    }
    f.partials(base).iter().all(|g| g.evaluate(ctx, p).is_zero())
}

/// True iff `l` meets `f` with multiplicity at least two at `p`, a point over
/// `ctx` (an extension of the plane's field). A zero restriction counts as tangent.
pub fn is_tangent_at(
    plane: &Plane,
    ctx: &FieldCtx,
    f: &TernaryForm,
    l: &ProjLine,
    p: &ProjPoint,
) -> Result<bool, CurveError> {
    let root = Plane::line_params(ctx, l, p)?;
    let g = f.restrict_to_line(plane.field(), l);
    if g.is_zero() {
        return Ok(true);
    }
    Ok(linear_factor_multiplicity(ctx, &g, root)? >= 2)
}

/// A point of a line where a curve meets it with multiplicity at least two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangencyPoint {
    /// Degree of the point; its coordinates live in `F_{q^degree}`.
    pub degree: u32,
    pub point: ProjPoint,
    pub multiplicity: u32,
}

/// Every point of degree at most `r` on `l` with intersection multiplicity at
/// least two, in order of degree then parameter.
pub fn tangency_points(plane: &Plane, f: &TernaryForm, l: &ProjLine, r: u32) -> Result<Vec<TangencyPoint>, CurveError> {
    let g = f.restrict_to_line(plane.field(), l);
    if g.is_zero() {
        return Err(CurveError::ZeroRestriction);
    }
    let mut out = Vec::new();
    for e in 1..=r {
        let ext = plane.ext(e)?;
        let mut params: Vec<(FieldElem, FieldElem)> = Vec::new();
        if e == 1 {
            params.push((FieldElem::ONE, FieldElem::ZERO));
        }
        params.extend(
            ext.elements()
                .filter(|&a| ext.elem_degree(a) == e)
                .map(|a| (a, FieldElem::ONE)),
        );
        for (s, t) in params {
            let m = linear_factor_multiplicity(&ext, &g, (s, t))?;
            if m >= 2 {
                out.push(TangencyPoint {
                    degree: e,
                    point: Plane::point_at(&ext, l, s, t)?,
                    multiplicity: m,
                });
            }
        }
    }
    Ok(out)
}

/// Exact smoothness over the algebraic closure. The zero form is not smooth.
pub fn is_smooth(plane: &Plane, f: &TernaryForm) -> bool {
    if f.is_zero() {
        return false;
    }
    if f.degree() == 0 {
        return true;
    }
    let [fx, fy, fz] = f.partials(plane.field());
    if fx.is_zero() && fy.is_zero() && fz.is_zero() {
        return false;
    }
    !elim::has_singular_point(plane, f)
}

/// Limits for [`is_smooth_by_enumeration`].
#[derive(Clone, Copy, Debug)]
pub struct EnumCaps {
    pub max_degree: u32,
    pub max_field: u64,
    /// Largest extension degree scanned; `None` means the Bézout bound.
    pub max_ext: Option<u32>,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_degree: 4,
            max_field: 1 << 12,
            max_ext: None,
        }
    }
}

/// Reference smoothness test by scanning `P^2(F_{q^k})` for singular points,
/// `k` up to `max((d-1)^2, d(d-1))` unless capped.
pub fn is_smooth_by_enumeration(plane: &Plane, f: &TernaryForm, caps: EnumCaps) -> Result<bool, CurveError> {
    if f.is_zero() {
        return Err(CurveError::ZeroForm);
    }
    let d = f.degree();
    if d > caps.max_degree {
        return Err(CurveError::DegreeCap {
            d,
            cap: caps.max_degree,
        });
    }
    if d <= 1 {
        return Ok(true);
    }
    let bound = ((d - 1) * (d - 1)).max(d * (d - 1));
    let kmax = caps.max_ext.map_or(bound, |c| c.min(bound));
    // F_{q^k} for k in (kmax/2, kmax] contains every point of degree <= kmax.
    for k in (kmax / 2 + 1)..=kmax {
        let size = (plane.q() as u64).checked_pow(k).unwrap_or(u64::MAX);
        if size > caps.max_field {
            return Err(CurveError::Cap { k, cap: caps.max_field });
        }
        let ext = plane.ext(k)?;
        let base = plane.field();
        if enumerate_points(&ext).iter().any(|p| is_singular_at(base, &ext, f, p)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cached per-line restriction maps for one degree; the census fast path.
#[derive(Clone, Debug)]
pub struct CurveTester<'a> {
    plane: &'a Plane,
    d: u32,
    restrictions: Vec<LineRestriction>,
}

impl<'a> CurveTester<'a> {
    pub fn new(plane: &'a Plane, d: u32) -> Self {
        let restrictions = plane
            .lines()
            .iter()
            .map(|l| LineRestriction::new(plane.field(), l, d))
            .collect();
        CurveTester { plane, d, restrictions }
    }

    pub fn plane(&self) -> &'a Plane {
        self.plane
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn restriction(&self, line: usize) -> &LineRestriction {
        &self.restrictions[line]
    }

    pub fn is_transverse(&self, f: &TernaryForm, line: usize) -> bool {
        let ctx = self.plane.field();
        binary_squarefree(ctx, &self.restrictions[line].apply(ctx, f))
    }

    pub fn is_transverse_free(&self, f: &TernaryForm) -> bool {
        (0..self.restrictions.len()).all(|i| !self.is_transverse(f, i))
    }

    /// Smooth and transverse-free.
    pub fn in_f(&self, f: &TernaryForm) -> bool {
        self.is_transverse_free(f) && is_smooth(self.plane, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::field_ctx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane(q: u32) -> Plane {
        Plane::new(q).unwrap()
    }

    fn conic(ctx: &FieldCtx) -> TernaryForm {
        TernaryForm::from_terms(ctx, 2, &[(1, [2, 0, 0]), (1, [0, 1, 1])])
    }

    fn pt(ctx: &FieldCtx, v: [u32; 3]) -> ProjPoint {
        ProjPoint::from_indices(ctx, v).unwrap()
    }

    #[test]
    fn transversality_examples() {
        let pl = plane(2);
        let ctx = pl.field();
        let f = conic(ctx);
        let z0 = pl.line_with_coeffs([0, 0, 1]).unwrap();
        let x0 = pl.line_with_coeffs([1, 0, 0]).unwrap();
        assert!(!is_transverse(&pl, &f, &z0));
        assert!(is_transverse(&pl, &f, &x0));
        assert!(!is_transverse(&pl, &TernaryForm::zero(3), &x0));
        assert!(is_transverse_free(&pl, &TernaryForm::zero(3)));
        assert!(!is_transverse_free(&pl, &f));
    }

    #[test]
    fn singularity_examples() {
        let f2 = field_ctx(2, 1).unwrap();
        let yz = TernaryForm::from_terms(&f2, 2, &[(1, [0, 1, 1])]);
        assert!(is_singular_at(&f2, &f2, &yz, &pt(&f2, [1, 0, 0])));
        assert!(!is_singular_at(&f2, &f2, &conic(&f2), &pt(&f2, [1, 0, 0])));
        assert!(is_singular_at(&f2, &f2, &TernaryForm::zero(3), &pt(&f2, [0, 1, 1])));
    }

    #[test]
    fn tangency_examples() {
        let pl = plane(2);
        let ctx = pl.field();
        let f = conic(ctx);
        let z0 = pl.line_with_coeffs([0, 0, 1]).unwrap();
        assert!(is_tangent_at(&pl, ctx, &f, &z0, &pt(ctx, [0, 1, 0])).unwrap());
        assert!(!is_tangent_at(&pl, ctx, &f, &z0, &pt(ctx, [1, 0, 0])).unwrap());
        assert!(matches!(
            is_tangent_at(&pl, ctx, &f, &z0, &pt(ctx, [0, 0, 1])),
            Err(CurveError::Plane(Pg2Error::NotOnLine))
        ));
        let tp = tangency_points(&pl, &f, &z0, 1).unwrap();
        assert_eq!(
            tp,
            vec![TangencyPoint {
                degree: 1,
                point: pt(ctx, [0, 1, 0]),
                multiplicity: 2
            }]
        );
        let x0 = pl.line_with_coeffs([1, 0, 0]).unwrap();
        assert!(tangency_points(&pl, &f, &x0, 3).unwrap().is_empty());
        // x^2 + xz + z^2 (times y^0) meets y = 0 in a conjugate pair over F_4:
        // the square (x^2+xz+z^2)^2 is tangent there but only at degree 2.
        let h = TernaryForm::from_terms(ctx, 2, &[(1, [2, 0, 0]), (1, [1, 0, 1]), (1, [0, 0, 2])]);
        let h2 = h.mul(ctx, &h);
        let y0 = pl.line_with_coeffs([0, 1, 0]).unwrap();
        assert!(tangency_points(&pl, &h2, &y0, 1).unwrap().is_empty());
        let deg2 = tangency_points(&pl, &h2, &y0, 2).unwrap();
        assert_eq!(deg2.len(), 2);
        assert!(deg2.iter().all(|t| t.degree == 2 && t.multiplicity == 2));
        assert_eq!(
            tangency_points(&pl, &TernaryForm::zero(2), &y0, 1),
            Err(CurveError::ZeroRestriction)
        );
    }

    #[test]
    fn smoothness_examples() {
        let pl = plane(2);
        let ctx = pl.field();
        assert!(is_smooth(&pl, &conic(ctx)));
        assert!(!is_smooth(&pl, &TernaryForm::from_terms(ctx, 2, &[(1, [0, 1, 1])])));
        assert!(!is_smooth(&pl, &TernaryForm::zero(3)));
        // Fermat cubic over F_2 is smooth; over F_3 it is a cube.
        let fermat = TernaryForm::from_terms(ctx, 3, &[(1, [3, 0, 0]), (1, [0, 3, 0]), (1, [0, 0, 3])]);
        assert!(is_smooth(&pl, &fermat));
        let pl3 = plane(3);
        let c3 = pl3.field();
        let fermat3 = TernaryForm::from_terms(c3, 3, &[(1, [3, 0, 0]), (1, [0, 3, 0]), (1, [0, 0, 3])]);
        assert!(!is_smooth(&pl3, &fermat3));
        // Nodal cubic y^2 z = x^3 + x^2 z is singular at [0:0:1].
        let nodal = TernaryForm::from_terms(c3, 3, &[(1, [0, 2, 1]), (-1, [3, 0, 0]), (-1, [2, 0, 1])]);
        assert!(!is_smooth(&pl3, &nodal));
        // Singular only at a conjugate pair: (x^2+xz+z^2)^2 + y^4 over F_2 is singular on C∩{y=0}.
        let h = TernaryForm::from_terms(ctx, 2, &[(1, [2, 0, 0]), (1, [1, 0, 1]), (1, [0, 0, 2])]);
        let quartic = h
            .mul(ctx, &h)
            .add(ctx, &TernaryForm::from_terms(ctx, 4, &[(1, [0, 4, 0])]));
        assert!(!is_smooth(&pl, &quartic));
    }

    #[test]
    fn smoothness_matches_enumeration_cubics_q2() {
        let pl = plane(2);
        let ctx = pl.field();
        let caps = EnumCaps {
            max_ext: Some(4),
            ..EnumCaps::default()
        };
        let mut smooth = 0;
        for i in 1..1024 {
            let f = TernaryForm::from_index(ctx, 3, i);
            let fast = is_smooth(&pl, &f);
            assert_eq!(fast, is_smooth_by_enumeration(&pl, &f, caps).unwrap(), "{f}");
            smooth += fast as u32;
        }
        // 0.328125 is the limiting fraction; the exact d = 3 count sits near it.
        let frac = smooth as f64 / 1024.0;
        assert!((frac - 0.328125).abs() < 0.1, "{frac}");
    }

    #[test]
    fn smoothness_matches_enumeration_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // (q, d, extension cap); None scans up to the full Bezout bound.
        for (q, d, max_ext) in [
            (3, 3, None),
            (5, 2, None),
            (2, 4, Some(6)),
            (4, 3, Some(3)),
            (3, 4, Some(3)),
        ] {
            let pl = plane(q);
            let caps = EnumCaps {
                max_ext,
                max_field: 1 << 12,
                ..EnumCaps::default()
            };
            for _ in 0..30 {
                let f = TernaryForm::random(pl.field(), d, &mut rng);
                if f.is_zero() {
                    continue;
                }
                let fast = is_smooth(&pl, &f);
                let slow = is_smooth_by_enumeration(&pl, &f, caps).unwrap();
                if max_ext.is_none() {
                    assert_eq!(fast, slow, "{f}");
                } else if !slow {
                    // A capped scan can miss high-degree singular points, never invent them.
                    assert!(!fast, "{f}");
                }
            }
        }
    }

    #[test]
    fn enumeration_caps() {
        let pl = plane(2);
        let f = TernaryForm::random(pl.field(), 5, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(
            is_smooth_by_enumeration(&pl, &f, EnumCaps::default()),
            Err(CurveError::DegreeCap { .. })
        ));
        let g = conic(pl.field());
        assert!(matches!(
            is_smooth_by_enumeration(
                &pl,
                &g,
                EnumCaps {
                    max_field: 2,
                    ..EnumCaps::default()
                }
            ),
            Err(CurveError::Cap { .. })
        ));
        assert_eq!(
            is_smooth_by_enumeration(&pl, &TernaryForm::zero(2), EnumCaps::default()),
            Err(CurveError::ZeroForm)
        );
    }

    #[test]
    fn nontransverse_iff_tangency_or_singular_point() {
        let pl = plane(2);
        let ctx = pl.field();
        for i in 0..1024 {
            let f = TernaryForm::from_index(ctx, 3, i);
            for l in pl.lines() {
                let transverse = is_transverse(&pl, &f, l);
                let witness = match tangency_points(&pl, &f, l, 3) {
                    Err(CurveError::ZeroRestriction) => true,
                    Ok(tp) => !tp.is_empty(),
                    Err(e) => panic!("{e}"),
                };
                assert_eq!(!transverse, witness, "{f} on {:?}", l.coeffs());
            }
        }
    }

    #[test]
    fn two_tangents_iff_singular() {
        let pl = plane(2);
        let ctx = pl.field();
        for d in [3u32, 4] {
            let n = 1u64 << crate::forms::monomial_count(d);
            for i in 0..n {
                let f = TernaryForm::from_index(ctx, d, i);
                for q in pl.points() {
                    let lines = pl.lines_through(ctx, q).unwrap();
                    let sing = is_singular_at(ctx, ctx, &f, q);
                    for a in 0..lines.len() {
                        for b in a + 1..lines.len() {
                            let t1 = is_tangent_at(&pl, ctx, &f, &lines[a], q).unwrap();
                            let t2 = is_tangent_at(&pl, ctx, &f, &lines[b], q).unwrap();
                            assert_eq!(t1 && t2, sing, "{f} at {q:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn singular_implies_tangent_to_every_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for q in [2, 3, 4] {
            let pl = plane(q);
            let ctx = pl.field();
            for _ in 0..200 {
                let d = rng.gen_range(2..6);
                let f = TernaryForm::random(ctx, d, &mut rng);
                for p in pl.points() {
                    if is_singular_at(ctx, ctx, &f, p) {
                        for l in pl.lines_through(ctx, p).unwrap() {
                            assert!(is_tangent_at(&pl, ctx, &f, &l, p).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn smooth_curves_have_one_tangent_per_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pl = plane(2);
        let ctx = pl.field();
        let mut checked = 0;
        while checked < 50 {
            let f = TernaryForm::random(ctx, 4, &mut rng);
            if !is_smooth(&pl, &f) {
                continue;
            }
            checked += 1;
            let mut seen = Vec::new();
            for l in pl.lines() {
                for t in tangency_points(&pl, &f, l, 2).unwrap() {
                    let key = (t.degree, t.point);
                    assert!(!seen.contains(&key), "{f}");
                    seen.push(key);
                }
            }
        }
    }

    fn random_invertible(ctx: &FieldCtx, rng: &mut ChaCha8Rng) -> [[FieldElem; 3]; 3] {
        loop {
            let mut m = [[FieldElem::ZERO; 3]; 3];
            for row in m.iter_mut() {
                for c in row.iter_mut() {
                    *c = ctx.elem(rng.gen_range(0..ctx.size() as u64)).unwrap();
                }
            }
            let minor =
                |a: usize, b: usize, c: usize, d: usize| ctx.sub(ctx.mul(m[1][a], m[2][b]), ctx.mul(m[1][c], m[2][d]));
            let det = ctx.add(
                ctx.sub(ctx.mul(m[0][0], minor(1, 2, 2, 1)), ctx.mul(m[0][1], minor(0, 2, 2, 0))),
                ctx.mul(m[0][2], minor(0, 1, 1, 0)),
            );
            if !det.is_zero() {
                return m;
            }
        }
    }

    #[test]
    fn transverse_free_is_projectively_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for q in [2, 3] {
            let pl = plane(q);
            let ctx = pl.field();
            let tf: Vec<TernaryForm> = (0..)
                .map(|i| TernaryForm::from_index(ctx, 4, i * 7919 % (q as u64).pow(15)))
                .take(4000)
                .collect();
            for f in tf {
                let m = random_invertible(ctx, &mut rng);
                let g = f.compose_linear(ctx, &m);
                assert_eq!(is_transverse_free(&pl, &f), is_transverse_free(&pl, &g));
                assert_eq!(is_smooth(&pl, &f), is_smooth(&pl, &g));
            }
        }
    }

    #[test]
    fn tester_agrees_with_free_functions() {
        let pl = plane(3);
        let t = CurveTester::new(&pl, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let f = TernaryForm::random(pl.field(), 3, &mut rng);
            assert_eq!(t.is_transverse_free(&f), is_transverse_free(&pl, &f));
            for (i, l) in pl.lines().iter().enumerate() {
                assert_eq!(t.is_transverse(&f, i), is_transverse(&pl, &f, l));
            }
        }
    }
}
