//! Exact censuses, Monte Carlo estimates, and closed-form evaluation of the
//! densities and bounds attached to transverse-free curves.
//!
//! Predicates are conjunctions of (possibly negated) atoms:
//!
//! | atom | meaning |
//! |------|---------|
//! | `tL(l)` | no transversality along line `l` |
//! | `sQ(p)` | singular at `p` |
//! | `tLP(l,p)` | tangent to `l` at `p` (multiplicity at least two) |
//! | `A0(p)` | tangent at rational `p` to none of the lines through it |
//! | `AL(l,p)` | tangent to `l` at rational `p` and not singular there |
//! | `smooth`, `tfree`, `F` | smooth, transverse-free, both |
//! | `true` | everything |
//!
//! Lines and rational points are indices into [`Plane::lines`] and
//! [`Plane::points`]. A point over `F_{q^k}` is written `e{k}:{i}`, the `i`-th
//! entry of `enumerate_points` for that field. Bare `tL`, `sQ`, `tLP`, `A0`
//! and `AL` use line 0 and its first point.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{is_smooth, CurveTester};
use crate::exec::{split_range, Exec};
use crate::forms::{monomials, LineRestriction, TernaryForm};
use crate::gf::{FieldCtx, FieldElem};
use crate::pg2::{closed_point_counts, enumerate_points, point_degree, Pg2Error, Plane, ProjPoint};
use crate::precise::{e_interval, int, pow_enclosure, powi, rat, ser_rational, Interval, Reported};

/// Default census cap: at most `2^34` coefficient vectors.
pub const CENSUS_CAP_LOG2: u32 = 34;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("census of q^{exponent} forms exceeds the cap 2^{cap_log2}; use monte-carlo sampling")]
    SizeCap { exponent: u32, cap_log2: u32 },
    #[error("cannot parse predicate {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Plane(#[from] Pg2Error),
}

/// A point of `P^2` over `F_{q^k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeoPoint {
    pub k: u32,
    pub index: usize,
    pub point: ProjPoint,
    /// Size of the Frobenius orbit.
    pub degree: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    True,
    TangentLine(usize),
    Singular(GeoPoint),
    TangentAt(usize, GeoPoint),
    A0(usize),
    AL(usize, usize),
    Smooth,
    TransverseFree,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

/// A finite intersection of atoms and complements of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    literals: Vec<Literal>,
}

fn fmt_point(p: &GeoPoint) -> String {
    if p.k == 1 {
        p.index.to_string()
    } else {
        format!("e{}:{}", p.k, p.index)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => write!(f, "true"),
            Atom::TangentLine(l) => write!(f, "tL({l})"),
            Atom::Singular(p) => write!(f, "sQ({})", fmt_point(p)),
            Atom::TangentAt(l, p) => write!(f, "tLP({},{})", l, fmt_point(p)),
            Atom::A0(p) => write!(f, "A0({p})"),
            Atom::AL(l, p) => write!(f, "AL({l},{p})"),
            Atom::Smooth => write!(f, "smooth"),
            Atom::TransverseFree => write!(f, "tfree"),
            Atom::F => write!(f, "F"),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            if lit.negated {
                write!(f, "!")?;
            }
            write!(f, "{}", lit.atom)?;
        }
        Ok(())
    }
}

impl Predicate {
    pub fn new(literals: Vec<Literal>) -> Self {
        Predicate { literals }
    }

    pub fn atom(atom: Atom) -> Self {
        Predicate::new(vec![Literal { atom, negated: false }])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// Intersection with another predicate.
    pub fn and(mut self, other: Predicate) -> Self {
        self.literals.extend(other.literals);
        self
    }

    pub fn not_atom(atom: Atom) -> Self {
        Predicate::new(vec![Literal { atom, negated: true }])
    }

    pub fn parse(plane: &Plane, text: &str) -> Result<Self, DensityError> {
        let err = |reason: String| DensityError::Parse {
            text: text.to_string(),
            reason,
        };
        let mut literals = Vec::new();
        for raw in text.split('&') {
            let mut s = raw.trim();
            let mut negated = false;
            while let Some(rest) = s.strip_prefix('!') {
                negated = !negated;
                s = rest.trim_start();
            }
            if s.is_empty() {
                return Err(err("empty term".into()));
            }
            let (name, args) = match s.find('(') {
                Some(open) => {
                    let close = s.strip_suffix(')').ok_or_else(|| err(format!("unclosed {s:?}")))?;
                    let args: Vec<&str> = close[open + 1..].split(',').map(str::trim).collect();
                    (s[..open].trim(), args)
                }
                None => (s, Vec::new()),
            };
            let atom = parse_atom(plane, name, &args).map_err(err)?;
            literals.push(Literal { atom, negated });
        }
        Ok(Predicate { literals })
    }

    /// Product of the limiting densities of the literals, when each has one.
    /// By the independence lemmas this is the limit of the whole intersection
    /// when the points involved are distinct.
    pub fn product_density(&self, q: u32) -> Option<BigRational> {
        let mut out = BigRational::one();
        for lit in &self.literals {
            let v = atom_density(q, &lit.atom)?;
            out *= if lit.negated { BigRational::one() - v } else { v };
        }
        Some(out)
    }

    /// `sum of scheme lengths - 1` over the local conditions: the degree from
    /// which restriction onto their union is surjective. `None` if a literal is
    /// not a local condition.
    pub fn surjectivity_degree(&self) -> Option<u32> {
        let mut len = 0;
        for lit in &self.literals {
            len += match lit.atom {
                Atom::True => 0,
                Atom::TangentAt(_, p) => 2 * p.degree,
                Atom::Singular(p) => 3 * p.degree,
                Atom::A0(_) | Atom::AL(..) => 3,
                _ => return None,
            };
        }
        Some(len.max(1) - 1)
    }
}

fn parse_index(s: &str, what: &str, bound: usize) -> Result<usize, String> {
    let i: usize = s.parse().map_err(|_| format!("bad {what} index {s:?}"))?;
    if i >= bound {
        return Err(format!("{what} index {i} out of range 0..{bound}"));
    }
    Ok(i)
}

fn parse_point(plane: &Plane, s: &str) -> Result<GeoPoint, String> {
    if let Some(rest) = s.strip_prefix('e') {
        let (k, i) = rest
            .split_once(':')
            .ok_or_else(|| format!("extension point {s:?} should look like e2:5"))?;
        let k: u32 = k.parse().map_err(|_| format!("bad extension degree in {s:?}"))?;
        if k == 0 {
            return Err("extension degree must be positive".into());
        }
        let ext = plane.ext(k).map_err(|e| e.to_string())?;
        let pts = enumerate_points(&ext);
        let index = parse_index(i, "point", pts.len())?;
        return Ok(GeoPoint {
            k,
            index,
            point: pts[index],
            degree: point_degree(&ext, &pts[index]),
        });
    }
    let index = parse_index(s, "point", plane.points().len())?;
    Ok(rational_point(plane, index))
}

fn rational_point(plane: &Plane, index: usize) -> GeoPoint {
    GeoPoint {
        k: 1,
        index,
        point: plane.points()[index],
        degree: 1,
    }
}

fn first_point_on(plane: &Plane, l: usize) -> usize {
    let p = plane.points_on(&plane.lines()[l])[0];
    plane.point_index(&p).expect("rational point")
}

fn parse_atom(plane: &Plane, name: &str, args: &[&str]) -> Result<Atom, String> {
    let nl = plane.lines().len();
    let np = plane.points().len();
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{name} takes {n} argument(s), got {}", args.len()))
        }
    };
    let atom = match name {
        "true" => Atom::True,
        "smooth" => Atom::Smooth,
        "tfree" | "transverse-free" => Atom::TransverseFree,
        "F" => Atom::F,
        "tL" if args.is_empty() => Atom::TangentLine(0),
        "tL" => {
            arity(1)?;
            Atom::TangentLine(parse_index(args[0], "line", nl)?)
        }
        "sQ" if args.is_empty() => Atom::Singular(rational_point(plane, 0)),
        "sQ" => {
            arity(1)?;
            Atom::Singular(parse_point(plane, args[0])?)
        }
        "tLP" | "AL" if args.is_empty() => {
            let p = first_point_on(plane, 0);
            if name == "AL" {
                Atom::AL(0, p)
            } else {
                Atom::TangentAt(0, parse_point(plane, &p.to_string())?)
            }
        }
        "tLP" => {
            arity(2)?;
            let l = parse_index(args[0], "line", nl)?;
            let p = parse_point(plane, args[1])?;
            let ext = plane.ext(p.k).map_err(|e| e.to_string())?;
            Plane::line_params(&ext, &plane.lines()[l], &p.point)
                .map_err(|_| format!("point {} is not on line {l}", args[1]))?;
            Atom::TangentAt(l, p)
        }
        "A0" if args.is_empty() => Atom::A0(0),
        "A0" => {
            arity(1)?;
            Atom::A0(parse_index(args[0], "point", np)?)
        }
        "AL" => {
            arity(2)?;
            let l = parse_index(args[0], "line", nl)?;
            let p = parse_index(args[1], "point", np)?;
            if !plane.is_incident(&plane.points()[p], &plane.lines()[l]) {
                return Err(format!("point {p} is not on line {l}"));
            }
            Atom::AL(l, p)
        }
        _ => return Err(format!("unknown atom {name:?}")),
    };
    if !args.is_empty() && matches!(atom, Atom::True | Atom::Smooth | Atom::TransverseFree | Atom::F) {
        return Err(format!("{name} takes no arguments"));
    }
    Ok(atom)
}

fn atom_density(q: u32, atom: &Atom) -> Option<BigRational> {
    let qq = int(q as i64);
    Some(match *atom {
        Atom::True => BigRational::one(),
        Atom::TangentLine(_) => tangent_line_density(q),
        Atom::Singular(p) => powi(&qq, -3 * p.degree as i64),
        Atom::TangentAt(_, p) => powi(&qq, -2 * p.degree as i64),
        Atom::A0(_) => point_lines(q).a0,
        Atom::AL(..) => point_lines(q).al,
        _ => return None,
    })
}

/// `q^-1 + q^-2 - q^-3`, the density of curves tangent to a fixed line.
pub fn tangent_line_density(q: u32) -> BigRational {
    let qq = int(q as i64);
    powi(&qq, -1) + powi(&qq, -2) - powi(&qq, -3)
}

/// Limiting densities for the pencil of lines through one rational point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointLines {
    /// Density of `A_0(Q)`: `1 - q^-3 - (q+1)(q^-2 - q^-3)`.
    pub a0: BigRational,
    /// `(1 - q^-2)^{-1} * (1 - q^-2)^{q+1}`, the bound for `A_0(Q)`.
    pub a0_bound: BigRational,
    /// Density of `A_L(Q)`: `q^-2 - q^-3`.
    pub al: BigRational,
    /// `q^-2 (1 - q^-2)^q`, the bound for `A_L(Q)`.
    pub al_bound: BigRational,
}

pub fn point_lines(q: u32) -> PointLines {
    let qq = int(q as i64);
    let (q2, q3) = (powi(&qq, -2), powi(&qq, -3));
    let one = BigRational::one();
    let al = &q2 - &q3;
    let a0 = &one - &q3 - int(q as i64 + 1) * &al;
    let a0_bound = powi(&(&one - &q2), q as i64);
    let al_bound = &q2 * &a0_bound;
    PointLines {
        a0,
        a0_bound,
        al,
        al_bound,
    }
}

/// `F_q`-linear functionals `F_q^N -> F_{q^k}`, stored as lookup tables
/// `table[c * N + m] = c * w_m`.
struct LinearCondition {
    ext: Arc<FieldCtx>,
    n: usize,
    tables: Vec<Vec<FieldElem>>,
}

impl LinearCondition {
    fn new(ext: Arc<FieldCtx>, q: u32, weights: Vec<Vec<FieldElem>>) -> Self {
        let n = weights.first().map_or(0, Vec::len);
        let tables = weights
            .iter()
            .map(|w| {
                let mut t = Vec::with_capacity(q as usize * n);
                for c in 0..q {
                    let ce = ext.embed(FieldElem(c));
                    t.extend(w.iter().map(|&x| ext.mul(ce, x)));
                }
                t
            })
            .collect();
        LinearCondition { ext, n, tables }
    }

    /// All functionals vanish.
    fn holds(&self, coeffs: &[FieldElem]) -> bool {
        self.tables.iter().all(|t| {
            coeffs
                .iter()
                .enumerate()
                .fold(FieldElem::ZERO, |acc, (m, c)| {
                    self.ext.add(acc, t[c.0 as usize * self.n + m])
                })
                .is_zero()
        })
    }
}

/// Values of every degree-`d` monomial at `p`, and of its three partials.
fn monomial_weights(ext: &FieldCtx, d: u32, p: &ProjPoint) -> [Vec<FieldElem>; 4] {
    let c = p.coords();
    let pw: Vec<Vec<FieldElem>> = c
        .iter()
        .map(|&x| (0..=d as u64).map(|e| ext.pow(x, e)).collect())
        .collect();
    let mons = monomials(d);
    let mut out: [Vec<FieldElem>; 4] = Default::default();
    for e in mons {
        let val = |ex: [u32; 3]| {
            ext.mul(
                ext.mul(pw[0][ex[0] as usize], pw[1][ex[1] as usize]),
                pw[2][ex[2] as usize],
            )
        };
        out[0].push(val(e));
        for v in 0..3 {
            let w = if e[v] == 0 {
                FieldElem::ZERO
            } else {
                let mut ex = e;
                ex[v] -= 1;
                ext.mul(ext.from_int(e[v] as i64), val(ex))
            };
            out[v + 1].push(w);
        }
    }
    out
}

fn singular_condition(plane: &Plane, d: u32, p: &GeoPoint) -> Result<LinearCondition, DensityError> {
    let ext = plane.ext(p.k)?;
    let w = monomial_weights(&ext, d, &p.point);
    Ok(LinearCondition::new(ext, plane.q(), w.to_vec()))
}

/// `g(root) = g_s(root) = g_t(root) = 0` for the restriction `g` to the line,
/// which holds exactly when the root has multiplicity at least two.
fn tangent_condition(plane: &Plane, d: u32, l: usize, p: &GeoPoint) -> Result<LinearCondition, DensityError> {
    let ext = plane.ext(p.k)?;
    let line = &plane.lines()[l];
    let (s0, t0) = Plane::line_params(&ext, line, &p.point)?;
    let rest = LineRestriction::new(plane.field(), line, d);
    let n = rest.rows()[0].len();
    let du = d as u64;
    let mut w = vec![vec![FieldElem::ZERO; n]; 3];
    for (j, row) in rest.rows().iter().enumerate() {
        let j64 = j as u64;
        let mono = ext.mul(ext.pow(s0, du - j64), ext.pow(t0, j64));
        let ds = if j64 < du {
            ext.mul(
                ext.from_int((du - j64) as i64),
                ext.mul(ext.pow(s0, du - j64 - 1), ext.pow(t0, j64)),
            )
        } else {
            FieldElem::ZERO
        };
        let dt = if j64 > 0 {
            ext.mul(
                ext.from_int(j64 as i64),
                ext.mul(ext.pow(s0, du - j64), ext.pow(t0, j64 - 1)),
            )
        } else {
            FieldElem::ZERO
        };
        for (m, &r) in row.iter().enumerate() {
            let r = ext.embed(r);
            w[0][m] = ext.add(w[0][m], ext.mul(r, mono));
            w[1][m] = ext.add(w[1][m], ext.mul(r, ds));
            w[2][m] = ext.add(w[2][m], ext.mul(r, dt));
        }
    }
    Ok(LinearCondition::new(ext, plane.q(), w))
}

enum Check {
    True,
    Linear(LinearCondition),
    TangentLine(usize),
    /// Tangent to none of these.
    A0(Vec<LinearCondition>),
    AL(LinearCondition, LinearCondition),
    Smooth,
    TransverseFree,
    F,
}

impl Check {
    fn cost(&self) -> u32 {
        match self {
            Check::True => 0,
            Check::Linear(_) | Check::AL(..) => 1,
            Check::A0(_) => 2,
            Check::TangentLine(_) => 3,
            Check::TransverseFree => 4,
            Check::F => 5,
            Check::Smooth => 6,
        }
    }
}

/// A predicate specialized to one plane and degree.
pub struct CompiledPredicate<'a> {
    tester: CurveTester<'a>,
    checks: Vec<(Check, bool)>,
}

impl<'a> CompiledPredicate<'a> {
    pub fn new(plane: &'a Plane, d: u32, pred: &Predicate) -> Result<Self, DensityError> {
        let mut checks = Vec::new();
        for lit in pred.literals() {
            let rational = |i: usize| rational_point(plane, i);
            let check = match lit.atom {
                Atom::True => Check::True,
                Atom::TangentLine(l) => Check::TangentLine(l),
                Atom::Singular(p) => Check::Linear(singular_condition(plane, d, &p)?),
                Atom::TangentAt(l, p) => Check::Linear(tangent_condition(plane, d, l, &p)?),
                Atom::A0(p) => {
                    let pt = rational(p);
                    let mut conds = Vec::new();
                    for (li, l) in plane.lines().iter().enumerate() {
                        if plane.is_incident(&pt.point, l) {
                            conds.push(tangent_condition(plane, d, li, &pt)?);
                        }
                    }
                    Check::A0(conds)
                }
                Atom::AL(l, p) => {
                    let pt = rational(p);
                    Check::AL(tangent_condition(plane, d, l, &pt)?, singular_condition(plane, d, &pt)?)
                }
                Atom::Smooth => Check::Smooth,
                Atom::TransverseFree => Check::TransverseFree,
                Atom::F => Check::F,
            };
            checks.push((check, lit.negated));
        }
        checks.sort_by_key(|(c, _)| c.cost());
        Ok(CompiledPredicate {
            tester: CurveTester::new(plane, d),
            checks,
        })
    }

    pub fn eval(&self, f: &TernaryForm) -> bool {
        let c = f.coeffs();
        self.checks.iter().all(|(check, negated)| {
            let v = match check {
                Check::True => true,
                Check::Linear(lc) => lc.holds(c),
                Check::TangentLine(l) => !self.tester.is_transverse(f, *l),
                Check::A0(conds) => !conds.iter().any(|lc| lc.holds(c)),
                Check::AL(t, s) => t.holds(c) && !s.holds(c),
                Check::Smooth => is_smooth(self.tester.plane(), f),
                Check::TransverseFree => self.tester.is_transverse_free(f),
                Check::F => self.tester.in_f(f),
            };
            v != *negated
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Census,
    MonteCarlo,
}

/// Result of a census or a Monte Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct DensityEstimate {
    pub kind: Method,
    pub q: u32,
    pub d: u32,
    pub predicate: String,
    pub hits: u64,
    pub total: u64,
    pub estimate: f64,
    /// `hits/total` in lowest terms (census only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// 95% Wilson interval (Monte Carlo only).
    pub ci: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub elapsed_ms: u64,
}

impl DensityEstimate {
    pub fn ratio(&self) -> BigRational {
        rat(self.hits as i64, self.total as i64)
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci.is_some_and(|[lo, hi]| lo <= x && x <= hi)
    }
}

/// 95% Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: u64, n: u64) -> [f64; 2] {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if hits as f64 == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    [lo, hi]
}

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    pub cap_log2: u32,
    pub exec: Exec,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            cap_log2: CENSUS_CAP_LOG2,
            exec: Exec::Parallel,
        }
    }
}

/// Number of forms in `R_d`, zero included, if within `2^cap_log2`.
pub fn census_size(q: u32, d: u32, cap_log2: u32) -> Result<u64, DensityError> {
    let exponent = (d + 1) * (d + 2) / 2;
    (q as u64)
        .checked_pow(exponent)
        .filter(|&t| t <= 1u64 << cap_log2.min(63))
        .ok_or(DensityError::SizeCap { exponent, cap_log2 })
}

/// Exact count of degree-`d` forms (zero included) satisfying `pred`.
pub fn census(plane: &Plane, d: u32, pred: &Predicate, opts: &CensusOptions) -> Result<DensityEstimate, DensityError> {
    let start = Instant::now();
    let q = plane.q();
    let total = census_size(q, d, opts.cap_log2)?;
    let compiled = CompiledPredicate::new(plane, d, pred)?;
    let parts = split_range(total, 256);
    let counts = opts.exec.map(parts.len(), |i| {
        let r = parts[i].clone();
        let mut f = TernaryForm::from_index(plane.field(), d, r.start);
        let mut hits = 0u64;
        for _ in r {
            hits += compiled.eval(&f) as u64;
            f.increment(q);
        }
        hits
    });
    let hits: u64 = counts.iter().sum();
    let ratio = rat(hits as i64, total as i64);
    Ok(DensityEstimate {
        kind: Method::Census,
        q,
        d,
        predicate: pred.to_string(),
        hits,
        total,
        estimate: hits as f64 / total as f64,
        exact: Some(format!("{}/{}", ratio.numer(), ratio.denom())),
        ci: None,
        seed: None,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// The form drawn for sample `i` of a run seeded with `seed`.
pub fn sample_form(plane: &Plane, d: u32, seed: u64, i: u64) -> TernaryForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    TernaryForm::random(plane.field(), d, &mut rng)
}

/// Estimates the density of `pred` from `samples` uniform forms.
pub fn monte_carlo(
    plane: &Plane,
    d: u32,
    pred: &Predicate,
    samples: u64,
    seed: u64,
    exec: Exec,
) -> Result<DensityEstimate, DensityError> {
    if samples == 0 {
        return Err(DensityError::NoSamples);
    }
    let start = Instant::now();
    let compiled = CompiledPredicate::new(plane, d, pred)?;
    let parts = split_range(samples, 256);
    let counts = exec.map(parts.len(), |i| {
        parts[i]
            .clone()
            .filter(|&s| compiled.eval(&sample_form(plane, d, seed, s)))
            .count() as u64
    });
    let hits: u64 = counts.iter().sum();
    Ok(DensityEstimate {
        kind: Method::MonteCarlo,
        q: plane.q(),
        d,
        predicate: pred.to_string(),
        hits,
        total: samples,
        estimate: hits as f64 / samples as f64,
        exact: None,
        ci: Some(wilson_interval(hits, samples)),
        seed: Some(seed),
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// A degree where the census of `pred` first equals `expected`, scanning `degrees`.
pub fn first_exact_degree(
    plane: &Plane,
    pred: &Predicate,
    expected: &BigRational,
    degrees: std::ops::RangeInclusive<u32>,
    opts: &CensusOptions,
) -> Result<Option<u32>, DensityError> {
    for d in degrees {
        if census(plane, d, pred, opts)?.ratio() == *expected {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

fn ser_interval<S: serde::Serializer>(x: &Interval, s: S) -> Result<S::Ok, S::Error> {
    Reported::of(x).serialize(s)
}

/// Closed-form density bounds for one `q`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub q: u32,
    /// `(1 - q^-1)(1 - q^-2)(1 - q^-3)`.
    #[serde(serialize_with = "ser_interval")]
    pub smooth_density: Interval,
    /// `e^{-N} r^N` with `N = q^2 + q + 1` and `r = q^-1 + q^-2 - q^-3`.
    #[serde(serialize_with = "ser_interval")]
    pub lower: Interval,
    /// `7.5 r^N`.
    #[serde(serialize_with = "ser_interval")]
    pub upper75: Interval,
    /// `(1 - q^-2)^{-N} r^N`.
    #[serde(serialize_with = "ser_interval")]
    pub upper_precise: Interval,
    /// `1 - 7.5 r^N / smooth_density`, a lower bound for the chance that a
    /// smooth curve has a transverse line.
    #[serde(serialize_with = "ser_interval")]
    pub bertini_lower: Interval,
}

impl BoundsReport {
    /// `lower <= upper_precise <= upper75`, decided rigorously.
    pub fn is_ordered(&self) -> bool {
        self.lower.le(&self.upper_precise) && self.upper_precise.le(&self.upper75)
    }
}

pub fn plane_size(q: u32) -> i64 {
    let q = q as i64;
    q * q + q + 1
}

pub fn bounds_report(q: u32) -> BoundsReport {
    assert!(q >= 2, "q must be at least 2");
    let n = plane_size(q);
    let qq = int(q as i64);
    let one = BigRational::one();
    let zeta_inv = smooth_density(q);
    let rn = powi(&tangent_line_density(q), n);
    let upper75 = rat(15, 2) * &rn;
    let xi = powi(&(&one - powi(&qq, -2)), -n);
    let lower = e_interval().powi(-n).mul(&Interval::exact(rn.clone()));
    BoundsReport {
        q,
        bertini_lower: Interval::exact(&one - &upper75 / &zeta_inv),
        smooth_density: Interval::exact(zeta_inv),
        lower,
        upper75: Interval::exact(upper75),
        upper_precise: Interval::exact(xi * rn),
    }
}

/// `h(q) = (1 + 1/(q^2+q-1))^N (1 - q^-1)(1 - q^-2)(1 - q^-3)`.
pub fn h_value(q: u32) -> BigRational {
    let qq = q as i64;
    let base = BigRational::one() + rat(1, qq * qq + qq - 1);
    powi(&base, plane_size(q)) * smooth_density(q)
}

/// `(1 - q^-1)(1 - q^-2)(1 - q^-3)`, the density of smooth curves.
pub fn smooth_density(q: u32) -> BigRational {
    let qq = int(q as i64);
    let one = BigRational::one();
    (&one - powi(&qq, -1)) * (&one - powi(&qq, -2)) * (&one - powi(&qq, -3))
}

/// `psi(q) = (1 - q^-2)^q / (1 - q^-1)`.
pub fn psi_value(q: u32) -> BigRational {
    let qq = int(q as i64);
    let one = BigRational::one();
    powi(&(&one - powi(&qq, -2)), q as i64) / (&one - powi(&qq, -1))
}

/// `xi(q) = (1 - q^-2)^{-(q^2+q+1)}`.
pub fn xi_value(q: u32) -> BigRational {
    let qq = int(q as i64);
    powi(&(BigRational::one() - powi(&qq, -2)), -plane_size(q))
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub q: u32,
    #[serde(serialize_with = "ser_rational_reported")]
    pub h: BigRational,
    #[serde(serialize_with = "ser_rational_reported")]
    pub psi: BigRational,
    #[serde(serialize_with = "ser_rational_reported")]
    pub xi: BigRational,
}

fn ser_rational_reported<S: serde::Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    Reported::of(&Interval::exact(x.clone())).serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
    pub checks: Vec<CheckResult>,
}

impl InequalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Prime powers in `2..=q_max`.
pub fn prime_powers(q_max: u32) -> Vec<u32> {
    (2..=q_max)
        .filter(|&q| crate::gf::prime_power(q as u64).is_some())
        .collect()
}

/// Evaluates `h`, `psi`, `xi` at every prime power up to `q_max` and checks
/// `h >= 1`, `psi >= 1`, `xi < 7.5`, and that `psi` and `xi` decrease.
pub fn inequality_suite(q_max: u32) -> InequalityReport {
    let rows: Vec<InequalityRow> = prime_powers(q_max)
        .into_iter()
        .map(|q| InequalityRow {
            q,
            h: h_value(q),
            psi: psi_value(q),
            xi: xi_value(q),
        })
        .collect();
    let one = BigRational::one();
    let mut checks = Vec::new();
    let mut push = |name: String, pass: bool| checks.push(CheckResult { name, pass });
    for r in &rows {
        push(format!("h({}) >= 1", r.q), r.h >= one);
        push(format!("psi({}) >= 1", r.q), r.psi >= one);
        push(format!("xi({}) < 7.5", r.q), r.xi < rat(15, 2));
    }
    for w in rows.windows(2) {
        push(format!("psi({}) > psi({})", w[0].q, w[1].q), w[0].psi > w[1].psi);
        push(format!("xi({}) > xi({})", w[0].q, w[1].q), w[0].xi > w[1].xi);
    }
    InequalityReport { rows, checks }
}

/// Enclosure of `1 - prod_{e<=r} (1 - q^{-2e})^{a_e}`, where `a_e` counts the
/// closed points of degree `e` on a line: the density of curves tangent to a
/// fixed line at some point of degree at most `r`.
pub fn truncated_tangency_product(q: u32, r: u32) -> Interval {
    assert!(r >= 1, "r must be positive");
    let qq = int(q as i64);
    let counts = closed_point_counts(q as u64, r);
    let mut prod = Interval::exact(BigRational::one());
    for (e, &a) in counts.iter().enumerate() {
        let base = BigRational::one() - powi(&qq, -2 * (e as i64 + 1));
        prod = prod.mul(&pow_enclosure(&base, a));
    }
    Interval::exact(BigRational::one()).sub(&prod)
}

/// Serializable companion of [`truncated_tangency_product`].
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedRow {
    pub q: u32,
    pub r: u32,
    #[serde(serialize_with = "ser_interval")]
    pub value: Interval,
    #[serde(serialize_with = "ser_rational")]
    pub limit: BigRational,
}

pub fn truncated_rows(q: u32, r_max: u32) -> Vec<TruncatedRow> {
    (1..=r_max)
        .map(|r| TruncatedRow {
            q,
            r,
            value: truncated_tangency_product(q, r),
            limit: tangent_line_density(q),
        })
        .collect()
}

/// `q^{-3 sum deg Q_j - 2 sum deg P_i}`: the limiting density of curves
/// singular at the `Q_j` and tangent to given lines at the `P_i`.
pub fn independence_product(q: u32, singular_degrees: &[u32], tangent_degrees: &[u32]) -> BigRational {
    let s: i64 = singular_degrees.iter().map(|&k| 3 * k as i64).sum();
    let t: i64 = tangent_degrees.iter().map(|&k| 2 * k as i64).sum();
    if s + t == 0 {
        return BigRational::one();
    }
    powi(&int(q as i64), -(s + t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{is_singular_at, is_tangent_at};
    use crate::precise::to_decimal;
    use rand::Rng;

    fn plane(q: u32) -> Plane {
        Plane::new(q).unwrap()
    }

    fn seq() -> CensusOptions {
        CensusOptions {
            exec: Exec::Sequential,
            ..CensusOptions::default()
        }
    }

    fn census_of(p: &Plane, d: u32, text: &str) -> DensityEstimate {
        census(p, d, &Predicate::parse(p, text).unwrap(), &CensusOptions::default()).unwrap()
    }

    #[test]
    fn linear_conditions_match_geometric_predicates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (q, d, k) in [(2, 3, 1), (2, 4, 2), (2, 3, 3), (3, 3, 1), (3, 4, 2), (4, 3, 1)] {
            let p = plane(q);
            let ext = p.ext(k).unwrap();
            let pts = enumerate_points(&ext);
            for _ in 0..12 {
                let idx = rng.gen_range(0..pts.len());
                let gp = GeoPoint {
                    k,
                    index: idx,
                    point: pts[idx],
                    degree: point_degree(&ext, &pts[idx]),
                };
                let sing = singular_condition(&p, d, &gp).unwrap();
                let lines: Vec<usize> = (0..p.lines().len())
                    .filter(|&l| crate::pg2::incident(&ext, &pts[idx], &p.lines()[l]))
                    .collect();
                let tans: Vec<_> = lines
                    .iter()
                    .map(|&l| tangent_condition(&p, d, l, &gp).unwrap())
                    .collect();
                for _ in 0..40 {
                    // Bias toward forms vanishing at the point so both outcomes occur.
                    let mut f = TernaryForm::random(p.field(), d, &mut rng);
                    for _ in 0..8 {
                        if f.evaluate(&ext, &pts[idx]).is_zero() {
                            break;
                        }
                        f = TernaryForm::random(p.field(), d, &mut rng);
                    }
                    assert_eq!(
                        sing.holds(f.coeffs()),
                        is_singular_at(p.field(), &ext, &f, &pts[idx]),
                        "q={q} d={d} f={f}"
                    );
                    for (t, &l) in tans.iter().zip(&lines) {
                        let want = is_tangent_at(&p, &ext, &f, &p.lines()[l], &pts[idx]).unwrap();
                        assert_eq!(t.holds(f.coeffs()), want, "q={q} d={d} f={f} line {l}");
                    }
                }
            }
        }
    }

    #[test]
    fn pencil_atoms_match_definitions() {
        let p = plane(2);
        let d = 3;
        let q0 = 4;
        let pt = p.points()[q0];
        let through: Vec<usize> = (0..7).filter(|&l| p.is_incident(&pt, &p.lines()[l])).collect();
        let l0 = through[0];
        let a0 = CompiledPredicate::new(&p, d, &Predicate::parse(&p, &format!("A0({q0})")).unwrap()).unwrap();
        let al = CompiledPredicate::new(&p, d, &Predicate::parse(&p, &format!("AL({l0},{q0})")).unwrap()).unwrap();
        for i in 0..1024 {
            let f = TernaryForm::from_index(p.field(), d, i);
            let tan: Vec<bool> = through
                .iter()
                .map(|&l| is_tangent_at(&p, p.field(), &f, &p.lines()[l], &pt).unwrap())
                .collect();
            let sing = is_singular_at(p.field(), p.field(), &f, &pt);
            assert_eq!(a0.eval(&f), !tan.iter().any(|&t| t));
            assert_eq!(al.eval(&f), tan[0] && !sing);
        }
    }

    #[test]
    fn parse_and_display() {
        let p = plane(2);
        let pred = Predicate::parse(&p, " tLP(0, 1) & !sQ(e2:7) & A0(3)&AL(0,1) & !!F").unwrap();
        assert_eq!(pred.to_string(), "tLP(0,1) & !sQ(e2:7) & A0(3) & AL(0,1) & F");
        assert_eq!(Predicate::parse(&p, &pred.to_string()).unwrap(), pred);
        assert_eq!(Predicate::parse(&p, "tL").unwrap().to_string(), "tL(0)");
        let first = p.point_index(&p.points_on(&p.lines()[0])[0]).unwrap();
        assert_eq!(
            Predicate::parse(&p, "tLP").unwrap().to_string(),
            format!("tLP(0,{first})")
        );
        for bad in [
            "", "tL(7)", "tLP(0,6)", "AL(0,6)", "x", "sQ(e0:1)", "tL(1", "F(1)", "tL(0) &",
        ] {
            assert!(Predicate::parse(&p, bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn tangent_line_censuses_are_exact() {
        for (q, d) in [(2, 3), (2, 4), (3, 3)] {
            let p = plane(q);
            let est = census_of(&p, d, "tL(0)");
            assert_eq!(est.ratio(), tangent_line_density(q), "q={q} d={d}");
        }
        let est = census_of(&plane(2), 3, "tL(0)");
        assert_eq!((est.hits, est.total), (640, 1024));
        assert_eq!(est.exact.as_deref(), Some("5/8"));
    }

    #[test]
    fn census_matches_naive_loop_and_exec_paths() {
        let p = plane(2);
        let on0 = p.point_index(&p.points_on(&p.lines()[0])[1]).unwrap();
        let pred = Predicate::parse(&p, &format!("tLP(0,{on0}) & !sQ(6) & tL(3)")).unwrap();
        let c = CompiledPredicate::new(&p, 3, &pred).unwrap();
        let naive = (0..1024u64)
            .filter(|&i| c.eval(&TernaryForm::from_index(p.field(), 3, i)))
            .count() as u64;
        let a = census(&p, 3, &pred, &seq()).unwrap();
        let b = census(&p, 3, &pred, &CensusOptions::default()).unwrap();
        assert_eq!(a.hits, naive);
        assert_eq!(b.hits, naive);
    }

    #[test]
    fn singular_point_census() {
        let est = census_of(&plane(2), 3, "sQ(0)");
        assert_eq!((est.hits, est.total), (128, 1024));
        // A degree-2 point: q^{-6} once d is large enough.
        let p = plane(2);
        let ext = p.ext(2).unwrap();
        let idx = enumerate_points(&ext)
            .iter()
            .position(|x| point_degree(&ext, x) == 2)
            .unwrap();
        let est = census_of(&p, 4, &format!("sQ(e2:{idx})"));
        assert_eq!(est.ratio(), rat(1, 64));
    }

    #[test]
    fn census_cap() {
        let p = plane(2);
        let pred = Predicate::parse(&p, "tL").unwrap();
        assert!(matches!(
            census(&p, 9, &pred, &CensusOptions::default()),
            Err(DensityError::SizeCap { exponent: 55, .. })
        ));
        let tight = CensusOptions { cap_log2: 9, ..seq() };
        assert!(census(&p, 3, &pred, &tight).is_err());
    }

    #[test]
    fn wilson_values() {
        let [lo, hi] = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277533).abs() < 1e-6);
        let [lo, hi] = wilson_interval(50, 100);
        assert!((lo - 0.403832).abs() < 1e-6 && (hi - 0.596168).abs() < 1e-6);
        assert_eq!(wilson_interval(10, 10)[1], 1.0);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let p = plane(3);
        let pred = Predicate::parse(&p, "tL").unwrap();
        let a = monte_carlo(&p, 4, &pred, 3000, 5, Exec::Sequential).unwrap();
        let b = monte_carlo(&p, 4, &pred, 3000, 5, Exec::Parallel).unwrap();
        assert_eq!(a.hits, b.hits);
        assert!(a.ci_contains(11.0 / 27.0));
        let c = monte_carlo(&p, 4, &pred, 3000, 6, Exec::Sequential).unwrap();
        assert_ne!(a.hits, c.hits);
        let all = monte_carlo(&p, 4, &Predicate::parse(&p, "true").unwrap(), 100, 1, Exec::Parallel).unwrap();
        assert_eq!(all.estimate, 1.0);
        assert_eq!(all.ci.unwrap()[1], 1.0);
        assert!(monte_carlo(&p, 4, &pred, 0, 1, Exec::Parallel).is_err());
    }

    #[test]
    fn bounds_values() {
        let b2 = bounds_report(2);
        assert_eq!(b2.smooth_density, Interval::exact(rat(21, 64)));
        assert_eq!(b2.upper_precise, Interval::exact(powi(&rat(5, 6), 7)));
        assert_eq!(b2.upper_precise.decimal(6), "0.279081");
        assert_eq!(b2.bertini_lower.decimal(4), "0.1485");
        assert_eq!(b2.lower.decimal(12), "0.000033970250");
        assert!(b2.lower.width() < powi(&int(10), -60));
        assert_eq!(bounds_report(3).bertini_lower.decimal(8), "0.99988803");
        for q in [2, 3, 4, 5, 7, 8, 9] {
            assert!(bounds_report(q).is_ordered(), "q={q}");
        }
    }

    #[test]
    fn inequality_values() {
        assert_eq!(h_value(2), rat(91854, 78125));
        assert_eq!(to_decimal(&h_value(2), 7), "1.1757312");
        assert_eq!(xi_value(2), powi(&rat(4, 3), 7));
        assert_eq!(to_decimal(&xi_value(2), 7), "7.4915409");
        assert_eq!(psi_value(2), rat(9, 8));
        let rep = inequality_suite(32);
        assert_eq!(rep.rows.len(), prime_powers(32).len());
        assert_eq!(prime_powers(10), vec![2, 3, 4, 5, 7, 8, 9]);
        assert!(
            rep.all_pass(),
            "{:?}",
            rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
    }

    #[test]
    fn pencil_limits() {
        let v = point_lines(2);
        assert_eq!(v.a0, rat(1, 2));
        assert_eq!(v.al, rat(1, 8));
        assert_eq!(v.a0_bound, rat(9, 16));
        // The complement of A0 splits into S_Q and the q+1 sets A_L(Q).
        for q in [2, 3, 4, 5] {
            let v = point_lines(q);
            let s = powi(&int(q as i64), -3);
            assert_eq!(v.a0 + s + int(q as i64 + 1) * v.al, BigRational::one());
        }
    }

    #[test]
    fn truncated_product_values() {
        assert_eq!(truncated_tangency_product(2, 1), Interval::exact(rat(37, 64)));
        assert_eq!(truncated_tangency_product(2, 4).decimal(6), "0.621228");
        for q in [2, 3] {
            let limit = tangent_line_density(q);
            let rows = truncated_rows(q, 20);
            for w in rows.windows(2) {
                assert!(w[0].value.lt(&w[1].value));
            }
            let last = &rows[19].value;
            assert!(last.hi < limit);
            assert!(&limit - &last.lo < rat(1, 1_000_000));
        }
    }

    #[test]
    fn truncated_r1_matches_census() {
        // Not tangent to line 0 at any rational point. A cubic meets the line
        // in three points, so it cannot be tangent at two of them and the
        // product value needs the three double points to impose independent
        // conditions: d >= 5.
        let p = plane(2);
        let terms: Vec<String> = p
            .points_on(&p.lines()[0])
            .iter()
            .map(|x| format!("!tLP(0,{})", p.point_index(x).unwrap()))
            .collect();
        let pred = Predicate::parse(&p, &terms.join(" & ")).unwrap();
        assert_eq!(pred.surjectivity_degree(), Some(5));
        let limit = BigRational::one() - truncated_tangency_product(2, 1).lo;
        assert_eq!(pred.product_density(2), Some(limit.clone()));
        let at = |d| census(&p, d, &pred, &CensusOptions::default()).unwrap().ratio();
        assert_eq!(at(3), rat(3, 8));
        assert_ne!(at(4), limit);
        assert_eq!(at(5), limit);
    }

    #[test]
    fn product_density_and_surjectivity() {
        let p = plane(2);
        let pred = Predicate::parse(&p, "tLP(0,1) & sQ(0) & !A0(6)").unwrap();
        assert_eq!(pred.product_density(2), Some(rat(1, 4) * rat(1, 8) * rat(1, 2)));
        assert_eq!(pred.surjectivity_degree(), Some(7));
        assert_eq!(Predicate::parse(&p, "F").unwrap().product_density(2), None);
        assert_eq!(independence_product(2, &[1], &[1, 2]), powi(&int(2), -9));
    }
}
