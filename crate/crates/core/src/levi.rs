//! The Levi graph of `PG(2, q)`: incidence matrices, exact permanents and
//! perfect matchings.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exec::Exec;
use crate::pg2::{Pg2Error, Plane};
use crate::precise::{e_interval, int, powi, Interval};

pub const PERMANENT_CAP: usize = 34;
pub const BACKTRACK_CAP: usize = 21;

#[derive(Debug, Error)]
pub enum LeviError {
    #[error("dimension {n} exceeds the cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("row and column sums are not all {expected}")]
    NotRegular { expected: u32 },
    #[error("matrix text: {0}")]
    Parse(String),
    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Plane(#[from] Pg2Error),
}

/// A square 0/1 matrix; bit `j` of `rows[i]` is entry `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IncidenceMatrix {
    n: usize,
    rows: Vec<u64>,
}

impl IncidenceMatrix {
    pub fn from_rows(n: usize, rows: Vec<u64>) -> Result<Self, LeviError> {
        if n > 64 {
            return Err(LeviError::DimensionCap { n, cap: 64 });
        }
        if rows.len() != n || rows.iter().any(|&r| n < 64 && r >> n != 0) {
            return Err(LeviError::Parse("row masks do not match the dimension".into()));
        }
        Ok(IncidenceMatrix { n, rows })
    }

    /// Points of `plane` index rows, lines index columns.
    pub fn of_plane(plane: &Plane) -> Self {
        let rows = plane
            .points()
            .iter()
            .map(|p| {
                plane
                    .lines()
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| plane.is_incident(p, l))
                    .fold(0u64, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        IncidenceMatrix {
            n: plane.points().len(),
            rows,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i] >> j & 1 == 1
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.rows.iter().map(|r| r.count_ones()).collect()
    }

    pub fn col_sums(&self) -> Vec<u32> {
        (0..self.n)
            .map(|j| self.rows.iter().filter(|&&r| r >> j & 1 == 1).count() as u32)
            .collect()
    }

    /// Row `i` of the result is row `rp[i]` of `self`; column `j` is column `cp[j]`.
    pub fn permuted(&self, rp: &[usize], cp: &[usize]) -> Self {
        let rows = rp
            .iter()
            .map(|&i| {
                cp.iter()
                    .enumerate()
                    .filter(|(_, &c)| self.get(i, c))
                    .fold(0u64, |acc, (j, _)| acc | 1 << j)
            })
            .collect();
        IncidenceMatrix { n: self.n, rows }
    }

    /// `n` lines of `n` characters `0`/`1`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n + 1));
        for i in 0..self.n {
            for j in 0..self.n {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, LeviError> {
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let n = lines.len();
        let mut rows = Vec::with_capacity(n);
        for (i, l) in lines.iter().enumerate() {
            if l.len() != n {
                return Err(LeviError::Parse(format!(
                    "row {i} has length {}, expected {n}",
                    l.len()
                )));
            }
            let mut r = 0u64;
            for (j, ch) in l.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => r |= 1 << j,
                    _ => return Err(LeviError::Parse(format!("bad character {ch:?} in row {i}"))),
                }
            }
            rows.push(r);
        }
        IncidenceMatrix::from_rows(n, rows)
    }
}

/// Incidence matrix of `PG(2, q)`, checked to be `(q+1)`-regular.
pub fn incidence_matrix(q: u32) -> Result<IncidenceMatrix, LeviError> {
    let plane = Plane::new(q)?;
    let m = IncidenceMatrix::of_plane(&plane);
    let k = plane.q() + 1;
    if m.row_sums().iter().chain(m.col_sums().iter()).any(|&s| s != k) {
        return Err(LeviError::NotRegular { expected: k });
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kernel {
    /// Factored kernel when every row sum is at most 6, general otherwise.
    #[default]
    Auto,
    General,
    Factored,
}

#[derive(Clone, Debug, Default)]
pub struct PermanentOptions {
    /// Number of fixed high bits; `2^bits` partitions. Default `min(n - 1, 8)`.
    pub partition_bits: Option<u32>,
    pub exec: Exec,
    pub kernel: Kernel,
    pub checkpoint: Option<PathBuf>,
}

/// Exact permanent by Ryser's formula with Gray-code updates.
pub fn permanent_ryser(m: &IncidenceMatrix) -> Result<BigInt, LeviError> {
    permanent_with(m, &PermanentOptions::default())
}

pub fn permanent_with(m: &IncidenceMatrix, opts: &PermanentOptions) -> Result<BigInt, LeviError> {
    let n = m.n;
    if n > PERMANENT_CAP {
        return Err(LeviError::DimensionCap { n, cap: PERMANENT_CAP });
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let bits = opts.partition_bits.unwrap_or(8).min(n as u32 - 1);
    let parts = 1usize << bits;
    let factored = match opts.kernel {
        Kernel::General => false,
        Kernel::Factored => {
            assert!(
                m.row_sums().iter().all(|&s| s <= 6),
                "factored kernel needs row sums <= 6"
            );
            true
        }
        Kernel::Auto => m.row_sums().iter().all(|&s| s <= 6),
    };

    let mut done: HashMap<usize, BigInt> = HashMap::new();
    let writer = match &opts.checkpoint {
        Some(path) => {
            done = read_checkpoint(path, m, bits)?;
            Some(Mutex::new(open_checkpoint(path, m, bits)?))
        }
        None => None,
    };

    let cols = columns(m);
    let results: Vec<Result<BigInt, LeviError>> = opts.exec.map(parts, |p| {
        if let Some(v) = done.get(&p) {
            return Ok(v.clone());
        }
        let low = n - bits as usize;
        let v = if factored {
            ryser_factored(m, &cols, p as u64, low)
        } else {
            ryser_general(m, &cols, p as u64, low)
        };
        if let Some(w) = &writer {
            let mut f = w.lock().expect("checkpoint lock");
            writeln!(f, "{p} {v}")?;
            f.flush()?;
        }
        Ok(v)
    });
    let mut total = BigInt::zero();
    for r in results {
        total += r?;
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

fn columns(m: &IncidenceMatrix) -> Vec<Vec<usize>> {
    (0..m.n).map(|j| (0..m.n).filter(|&i| m.get(i, j)).collect()).collect()
}

/// Signed sum over subsets whose high bits spell `part`, of `(-1)^|S| prod_i r_i(S)`.
fn ryser_general(m: &IncidenceMatrix, cols: &[Vec<usize>], part: u64, low: usize) -> BigInt {
    let high = part << low;
    let mut sums: Vec<i64> = m.rows.iter().map(|r| (r & high).count_ones() as i64).collect();
    let mut zeros = sums.iter().filter(|&&s| s == 0).count();
    let mut odd = high.count_ones() % 2 == 1;
    let max_prod: f64 = m.row_sums().iter().map(|&s| (s.max(1)) as f64).product();
    let wide = max_prod * 2f64.powi(low as i32) < 2f64.powi(120);

    let mut acc128: i128 = 0;
    let mut acc_big = BigInt::zero();
    let mut term = |sums: &[i64], odd: bool| {
        if wide {
            let p: i128 = sums.iter().map(|&s| s as i128).product();
            acc128 += if odd { -p } else { p };
        } else {
            let p: BigInt = sums.iter().map(|&s| BigInt::from(s)).product();
            if odd {
                acc_big -= p;
            } else {
                acc_big += p;
            }
        }
    };
    if zeros == 0 {
        term(&sums, odd);
    }
    let mut in_set = 0u64;
    for k in 1u64..(1u64 << low) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        in_set ^= bit;
        let delta = if in_set & bit != 0 { 1 } else { -1 };
        for &i in &cols[j] {
            let before = sums[i];
            sums[i] += delta;
            if before == 0 {
                zeros -= 1;
            } else if sums[i] == 0 {
                zeros += 1;
            }
        }
        odd = !odd;
        if zeros == 0 {
            term(&sums, odd);
        }
    }
    acc_big + BigInt::from(acc128)
}

/// Exponents of 2, 3, 5 in `v` for `1 <= v <= 6`.
const FACTORS: [[usize; 3]; 7] = [
    [0, 0, 0],
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [2, 0, 0],
    [0, 0, 1],
    [1, 1, 0],
];

/// As [`ryser_general`], for row sums at most 6: each product `prod_i r_i` is
/// tracked as an index `(a, b, c)` for `2^a 3^b 5^c` into a signed histogram.
fn ryser_factored(m: &IncidenceMatrix, cols: &[Vec<usize>], part: u64, low: usize) -> BigInt {
    let n = m.n;
    let (db, dc) = (n + 1, n + 1);
    let da = 2 * n + 1;
    let index = |f: [usize; 3]| (f[0] * db + f[1]) * dc + f[2];
    // up[v] moves the histogram index when a row sum goes from v to v + 1.
    let mut up = [0isize; 7];
    for v in 1..6 {
        up[v] = index(FACTORS[v + 1]) as isize - index(FACTORS[v]) as isize;
    }
    let high = part << low;
    let mut sums: Vec<u8> = m.rows.iter().map(|r| (r & high).count_ones() as u8).collect();
    let mut zeros = sums.iter().filter(|&&s| s == 0).count();
    let mut idx: isize = 0;
    for &s in &sums {
        if s > 0 {
            idx += index(FACTORS[s as usize]) as isize;
        }
    }
    let mut hist = vec![0i64; da * db * dc];
    let mut sign: i64 = if high.count_ones() % 2 == 1 { -1 } else { 1 };
    if zeros == 0 {
        hist[idx as usize] += sign;
    }
    let mut in_set = 0u64;
    for k in 1u64..(1u64 << low) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        in_set ^= bit;
        if in_set & bit != 0 {
            for &i in &cols[j] {
                let s = sums[i];
                if s == 0 {
                    zeros -= 1;
                } else {
                    idx += up[s as usize];
                }
                sums[i] = s + 1;
            }
        } else {
            for &i in &cols[j] {
                let s = sums[i] - 1;
                if s == 0 {
                    zeros += 1;
                } else {
                    idx -= up[s as usize];
                }
                sums[i] = s;
            }
        }
        sign = -sign;
        if zeros == 0 {
            hist[idx as usize] += sign;
        }
    }
    let mut total = BigInt::zero();
    for (i, &c) in hist.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let (a, rest) = (i / (db * dc), i % (db * dc));
        let (b, cc) = (rest / dc, rest % dc);
        let v = num_traits::pow(BigInt::from(2), a)
            * num_traits::pow(BigInt::from(3), b)
            * num_traits::pow(BigInt::from(5), cc);
        total += v * c;
    }
    total
}

fn matrix_tag(m: &IncidenceMatrix, bits: u32) -> String {
    // FNV-1a over the row masks identifies the matrix a checkpoint belongs to.
    let mut h: u64 = 0xcbf29ce484222325;
    for r in &m.rows {
        for b in r.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    format!("# n {} bits {} matrix {:016x}", m.n, bits, h)
}

fn read_checkpoint(path: &Path, m: &IncidenceMatrix, bits: u32) -> Result<HashMap<usize, BigInt>, LeviError> {
    let mut out = HashMap::new();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(e.into()),
    };
    let bad = |reason: String| LeviError::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let tag = matrix_tag(m, bits);
    for (no, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if line != tag {
                return Err(bad(format!("header `{line}` does not match `{tag}`")));
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(bad(format!("line {}: expected `index partial_sum`", no + 1)));
        };
        let idx: usize = a.parse().map_err(|_| bad(format!("line {}: bad index", no + 1)))?;
        let val: BigInt = b.parse().map_err(|_| bad(format!("line {}: bad sum", no + 1)))?;
        if idx >= 1 << bits {
            return Err(bad(format!("line {}: partition {idx} out of range", no + 1)));
        }
        if let Some(prev) = out.insert(idx, val.clone()) {
            if prev != val {
                return Err(bad(format!("partition {idx} recorded twice with different sums")));
            }
        }
    }
    Ok(out)
}

fn open_checkpoint(path: &Path, m: &IncidenceMatrix, bits: u32) -> Result<File, LeviError> {
    let fresh = std::fs::metadata(path).map(|md| md.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{}", matrix_tag(m, bits))?;
    }
    Ok(f)
}

/// Number of perfect matchings by row-by-row backtracking.
pub fn count_matchings_backtrack(m: &IncidenceMatrix) -> Result<u128, LeviError> {
    if m.n > BACKTRACK_CAP {
        return Err(LeviError::DimensionCap {
            n: m.n,
            cap: BACKTRACK_CAP,
        });
    }
    fn go(rows: &[u64], used: u64) -> u128 {
        let Some((first, rest)) = rows.split_first() else {
            return 1;
        };
        let mut free = first & !used;
        let mut total = 0;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            total += go(rest, used | bit);
            free ^= bit;
        }
        total
    }
    Ok(go(&m.rows, 0))
}

/// A perfect matching: row `i` is matched to column `sigma[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    sigma: Vec<usize>,
}

impl Matching {
    pub fn new(m: &IncidenceMatrix, sigma: Vec<usize>) -> Option<Self> {
        let mut seen = 0u64;
        if sigma.len() != m.n {
            return None;
        }
        for (i, &j) in sigma.iter().enumerate() {
            if j >= m.n || seen >> j & 1 == 1 || !m.get(i, j) {
                return None;
            }
            seen |= 1 << j;
        }
        Some(Matching { sigma })
    }

    pub fn sigma(&self) -> &[usize] {
        &self.sigma
    }
}

/// Matchings in lexicographic order of `sigma`.
pub struct MatchingIter<'a> {
    m: &'a IncidenceMatrix,
    cand: Vec<u64>,
    sigma: Vec<usize>,
    used: u64,
    depth: usize,
    left: usize,
    done: bool,
}

impl Iterator for MatchingIter<'_> {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done || self.left == 0 {
            return None;
        }
        let n = self.m.n;
        if n == 0 {
            self.done = true;
            return Some(Matching { sigma: Vec::new() });
        }
        loop {
            let c = self.cand[self.depth];
            if c == 0 {
                if self.depth == 0 {
                    self.done = true;
                    return None;
                }
                self.depth -= 1;
                self.used &= !(1 << self.sigma[self.depth]);
                continue;
            }
            let j = c.trailing_zeros() as usize;
            self.cand[self.depth] &= c - 1;
            self.sigma[self.depth] = j;
            if self.depth + 1 == n {
                self.left -= 1;
                return Some(Matching {
                    sigma: self.sigma.clone(),
                });
            }
            self.used |= 1 << j;
            self.depth += 1;
            self.cand[self.depth] = self.m.rows[self.depth] & !self.used;
        }
    }
}

pub fn enumerate_matchings(m: &IncidenceMatrix, limit: usize) -> MatchingIter<'_> {
    let mut cand = vec![0; m.n.max(1)];
    if m.n > 0 {
        cand[0] = m.rows[0];
    }
    MatchingIter {
        m,
        cand,
        sigma: vec![0; m.n],
        used: 0,
        depth: 0,
        left: limit,
        done: false,
    }
}

/// `((k-1)^(k-1) / k^(k-2))^n`, the lower bound for `k`-regular `n x n` 0/1 matrices.
pub fn schrijver_bound(n: u32, k: u32) -> BigRational {
    assert!(k >= 2);
    let k = k as i64;
    let base = powi(&int(k - 1), k - 1) / powi(&int(k), k - 2);
    powi(&base, n as i64)
}

/// Enclosure of `((q+1)/e)^(q^2+q+1)`, the van der Waerden-type lower bound for
/// `(q+1)`-regular matrices of size `q^2+q+1`.
pub fn van_der_waerden_bound(q: u32) -> Interval {
    let n = (q * q + q + 1) as i64;
    Interval::exact(int(q as i64 + 1)).div(&e_interval()).powi(n)
}
