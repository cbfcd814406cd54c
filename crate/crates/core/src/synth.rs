//! Curves tangent to every line by construction: a perfect point-line
//! matching `P_i <-> L_i` gives two linear conditions per pair, and smooth
//! members of the solution space are transverse-free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::curve::{is_smooth, is_transverse_free};
use crate::density::smooth_density;
use crate::forms::{monomial_count, LineRestriction, TernaryForm};
use crate::gf::{FieldCtx, FieldElem};
use crate::levi::{IncidenceMatrix, Matching};
use crate::pg2::Plane;
use crate::precise::to_f64;

pub const DEFAULT_MAX_ATTEMPTS: u64 = 1000;

/// Kernels larger than `2^KERNEL_SCAN_CAP_LOG2` are not scanned exhaustively.
pub const KERNEL_SCAN_CAP_LOG2: u32 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("sigma is not a perfect point-line matching of PG(2,{q})")]
    InvalidMatching { q: u32 },
    #[error("degree must be at least 1")]
    Degree,
    #[error("kernel of size q^{dim} is too large to scan")]
    ScanCap { dim: usize },
}

/// Rank-nullity data for the tangency conditions of one matching.
#[derive(Clone, Debug)]
pub struct TangencySystem {
    pub q: u32,
    pub d: u32,
    pub sigma: Vec<usize>,
    /// Two functionals per matched pair, over the monomial basis.
    pub rows: Vec<Vec<FieldElem>>,
    pub rank: usize,
    pub kernel_basis: Vec<Vec<FieldElem>>,
}

/// Value and one partial of the restriction at the parameter `(s0, t0)` of
/// `P`; together they vanish exactly when `P` is a root of multiplicity two.
fn pair_rows(ctx: &FieldCtx, rest: &LineRestriction, d: u32, s0: FieldElem, t0: FieldElem) -> [Vec<FieldElem>; 2] {
    let n = rest.rows()[0].len();
    let du = d as u64;
    // g = (t0 s - s0 t) h gives g_s = t0 h and g_t = -s0 h at the root.
    let use_s = !t0.is_zero();
    let mut val = vec![FieldElem::ZERO; n];
    let mut der = vec![FieldElem::ZERO; n];
    for (j, row) in rest.rows().iter().enumerate() {
        let j = j as u64;
        let mono = ctx.mul(ctx.pow(s0, du - j), ctx.pow(t0, j));
        let dmono = if use_s {
            if j == du {
                FieldElem::ZERO
            } else {
                ctx.mul(
                    ctx.from_int((du - j) as i64),
                    ctx.mul(ctx.pow(s0, du - j - 1), ctx.pow(t0, j)),
                )
            }
        } else if j == 0 {
            FieldElem::ZERO
        } else {
            ctx.mul(ctx.from_int(j as i64), ctx.mul(ctx.pow(s0, du - j), ctx.pow(t0, j - 1)))
        };
        for (m, &r) in row.iter().enumerate() {
            val[m] = ctx.add(val[m], ctx.mul(r, mono));
            der[m] = ctx.add(der[m], ctx.mul(r, dmono));
        }
    }
    [val, der]
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(ctx: &FieldCtx, m: &mut [Vec<FieldElem>]) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = ctx.inv(m[r][c]).expect("nonzero pivot");
        for x in m[r].iter_mut() {
            *x = ctx.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = ctx.sub(*x, ctx.mul(f, y));
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

/// Builds and solves the tangency conditions "tangent to line `sigma[i]` at
/// point `i`" for degree `d`.
pub fn tangency_system(plane: &Plane, matching: &Matching, d: u32) -> Result<TangencySystem, SynthError> {
    if d == 0 {
        return Err(SynthError::Degree);
    }
    let ctx = plane.field();
    let inc = IncidenceMatrix::of_plane(plane);
    let sigma = matching.sigma().to_vec();
    if Matching::new(&inc, sigma.clone()).is_none() {
        return Err(SynthError::InvalidMatching { q: plane.q() });
    }
    let mut rows = Vec::with_capacity(2 * sigma.len());
    for (i, &l) in sigma.iter().enumerate() {
        let line = &plane.lines()[l];
        let (s0, t0) = Plane::line_params(ctx, line, &plane.points()[i]).expect("matched point lies on its line");
        let rest = LineRestriction::new(ctx, line, d);
        rows.extend(pair_rows(ctx, &rest, d, s0, t0));
    }
    let n = monomial_count(d);
    let mut ech = rows.clone();
    let pivots = rref(ctx, &mut ech);
    let mut kernel_basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![FieldElem::ZERO; n];
        v[free] = FieldElem::ONE;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = ctx.neg(ech[r][free]);
        }
        kernel_basis.push(v);
    }
    Ok(TangencySystem {
        q: plane.q(),
        d,
        sigma,
        rows,
        rank: pivots.len(),
        kernel_basis,
    })
}

impl TangencySystem {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.len()
    }

    /// The kernel element with base-`q` digits `index` in the kernel basis.
    pub fn kernel_element(&self, ctx: &FieldCtx, mut index: u64) -> TernaryForm {
        let q = self.q as u64;
        let n = monomial_count(self.d);
        let mut coeffs = vec![FieldElem::ZERO; n];
        for b in &self.kernel_basis {
            let c = FieldElem((index % q) as u32);
            index /= q;
            if c.is_zero() {
                continue;
            }
            for (x, &y) in coeffs.iter_mut().zip(b) {
                *x = ctx.add(*x, ctx.mul(c, y));
            }
        }
        TernaryForm::new(self.d, coeffs).expect("length matches")
    }

    /// Number of kernel elements, if it fits in a `u64`.
    pub fn kernel_size(&self) -> Option<u64> {
        (self.q as u64).checked_pow(self.kernel_dim() as u32)
    }

    /// Every row vanishes on `f`.
    pub fn satisfied_by(&self, ctx: &FieldCtx, f: &TernaryForm) -> bool {
        self.rows.iter().all(|row| {
            row.iter()
                .zip(f.coeffs())
                .fold(FieldElem::ZERO, |acc, (&r, &c)| ctx.add(acc, ctx.mul(r, c)))
                .is_zero()
        })
    }
}

/// A verified smooth transverse-free form with its provenance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Synthesized {
    #[serde(skip)]
    pub form: TernaryForm,
    pub text: String,
    pub q: u32,
    pub d: u32,
    pub sigma: Vec<usize>,
    pub seed: u64,
    pub attempts: u64,
    pub kernel_dim: usize,
}

/// Why sampling produced nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SynthFailure {
    /// Only the zero form satisfies the conditions.
    TrivialKernel,
    /// Every draw was rejected.
    Exhausted {
        attempts: u64,
        non_smooth: u64,
        /// All nonzero kernel elements were tried.
        kernel_exhausted: bool,
    },
}

/// Draws nonzero kernel elements until one passes the independent smoothness
/// and transverse-freeness checks. Small kernels are walked exhaustively from
/// a seeded starting point.
pub fn sample_transverse_free(
    plane: &Plane,
    system: &TangencySystem,
    seed: u64,
    max_attempts: u64,
) -> Result<Synthesized, SynthFailure> {
    let ctx = plane.field();
    if system.kernel_dim() == 0 {
        return Err(SynthFailure::TrivialKernel);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nonzero = system.kernel_size().map(|s| s - 1);
    let walk = nonzero.filter(|&m| m <= max_attempts);
    let offset = walk.map_or(0, |m| rng.gen_range(0..m));
    let mut non_smooth = 0;
    let limit = walk.unwrap_or(max_attempts);
    for attempt in 1..=limit {
        let index = match (walk, nonzero) {
            (Some(m), _) => (offset + attempt - 1) % m + 1,
            (None, Some(m)) => rng.gen_range(1..=m),
            (None, None) => loop {
                let i: u64 = rng.gen();
                if i != 0 {
                    break i;
                }
            },
        };
        let f = match nonzero {
            Some(_) => system.kernel_element(ctx, index),
            None => random_kernel_element(ctx, system, &mut rng),
        };
        if is_smooth(plane, &f) && is_transverse_free(plane, &f) {
            return Ok(Synthesized {
                text: f.to_text(),
                form: f,
                q: system.q,
                d: system.d,
                sigma: system.sigma.clone(),
                seed,
                attempts: attempt,
                kernel_dim: system.kernel_dim(),
            });
        }
        non_smooth += 1;
    }
    Err(SynthFailure::Exhausted {
        attempts: limit,
        non_smooth,
        kernel_exhausted: walk.is_some(),
    })
}

fn random_kernel_element(ctx: &FieldCtx, system: &TangencySystem, rng: &mut ChaCha8Rng) -> TernaryForm {
    assert!(system.kernel_dim() > 0, "trivial kernel has no nonzero element");
    loop {
        let mut coeffs = vec![FieldElem::ZERO; monomial_count(system.d)];
        for b in &system.kernel_basis {
            let c = FieldElem(rng.gen_range(0..system.q));
            for (x, &y) in coeffs.iter_mut().zip(b) {
                *x = ctx.add(*x, ctx.mul(c, y));
            }
        }
        let f = TernaryForm::new(system.d, coeffs).expect("length matches");
        if !f.is_zero() {
            return f;
        }
    }
}

/// Result of checking every kernel element for smoothness.
#[derive(Clone, Debug, Serialize)]
pub struct KernelScan {
    pub sigma: Vec<usize>,
    pub kernel_dim: usize,
    pub smooth: u64,
    pub first_smooth: Option<String>,
    /// Smooth fraction of the nonzero kernel elements.
    pub rate: f64,
    /// Limiting smooth fraction as `d` grows, `(1 - q^-1)(1 - q^-2)(1 - q^-3)`.
    pub predicted_rate: f64,
}

pub fn scan_kernel(plane: &Plane, system: &TangencySystem) -> Result<KernelScan, SynthError> {
    let dim = system.kernel_dim();
    let size = system
        .kernel_size()
        .filter(|&s| s <= 1 << KERNEL_SCAN_CAP_LOG2)
        .ok_or(SynthError::ScanCap { dim })?;
    let mut smooth = 0;
    let mut first_smooth = None;
    for i in 1..size {
        let f = system.kernel_element(plane.field(), i);
        if is_smooth(plane, &f) {
            smooth += 1;
            first_smooth.get_or_insert_with(|| f.to_text());
        }
    }
    Ok(KernelScan {
        sigma: system.sigma.clone(),
        kernel_dim: dim,
        smooth,
        first_smooth,
        rate: smooth as f64 / (size - 1).max(1) as f64,
        predicted_rate: to_f64(&smooth_density(system.q)),
    })
}
