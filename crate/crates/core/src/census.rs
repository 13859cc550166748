//! Counting primitive isotropic vectors with bounded projection onto a
//! positive plane.
//!
//! The indefinite counting condition is turned into a definite one through the
//! majorant `M(v) = Q(v_P) − Q(v_Perp)`, which equals `2·Q(v_P)` on the
//! isotropic cone. Points are then found by Fincke–Pohst enumeration over the
//! Cholesky factor of `M`.

use std::time::Instant;

use nalgebra::DMatrix;
use num_integer::Roots;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{least_squares, FitResult};
use crate::lattice::{is_primitive, GramLattice, PositivePlane};

/// Relative slack on floating bounds, so that points exactly on the boundary
/// (common with integer-spanned planes) are kept.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct MajorantForm {
    matrix: DMatrix<f64>,
    /// Upper-triangular `R` with `M = RᵀR`.
    cholesky: DMatrix<f64>,
}

impl MajorantForm {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let chol = sym.clone().cholesky().ok_or(Error::MajorantNotDefinite)?;
        Ok(Self { matrix: sym, cholesky: chol.l().transpose() })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.cholesky
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn value(&self, v: &[i64]) -> f64 {
        let n = self.rank();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * v[j] as f64;
            }
            acc += v[i] as f64 * row;
        }
        acc
    }

    fn upper(&self) -> Vec<Vec<f64>> {
        let n = self.rank();
        (0..n).map(|i| (0..n).map(|j| self.cholesky[(i, j)]).collect()).collect()
    }
}

/// `M = Π_PᵀQΠ_P − Π_⊥ᵀQΠ_⊥`; requires `dim P = n_plus`.
pub fn build_majorant(lattice: &GramLattice, plane: &PositivePlane) -> Result<MajorantForm> {
    if plane.lattice().rank() != lattice.rank() {
        return Err(Error::DimensionMismatch { expected: lattice.rank(), got: plane.lattice().rank() });
    }
    let n_plus = lattice.signature().0;
    if plane.dim() != n_plus {
        return Err(Error::PlaneDimension { expected: n_plus, got: plane.dim() });
    }
    let q = lattice.gram_f64();
    let pp = plane.projector();
    let pc = plane.complement_projector();
    let m = pp.transpose() * &q * pp - pc.transpose() * &q * &pc;
    MajorantForm::from_matrix(m)
}

/// Lazy Fincke–Pohst enumeration of nonzero `v` with `M(v) ≤ bound`.
///
/// The deepest coordinate is fixed first and each coordinate runs in
/// ascending order, so the output is in lexicographic order of the reversed
/// coordinate tuple. Both `v` and `−v` are produced.
pub struct BallEnumerator {
    r: Vec<Vec<f64>>,
    n: usize,
    bound: f64,
    x: Vec<i64>,
    hi: Vec<i64>,
    center: Vec<f64>,
    partial: Vec<f64>,
    level: usize,
    state: EnumState,
    fixed_top: Option<i64>,
}

#[derive(PartialEq, Eq)]
enum EnumState {
    Fresh,
    Running,
    Done,
}

impl BallEnumerator {
    fn new(m: &MajorantForm, bound: f64, fixed_top: Option<i64>) -> Self {
        let n = m.rank();
        Self {
            r: m.upper(),
            n,
            bound: bound * (1.0 + BOUND_SLACK) + 1e-12,
            x: vec![0; n],
            hi: vec![0; n],
            center: vec![0.0; n],
            partial: vec![0.0; n + 1],
            level: n.saturating_sub(1),
            state: if n == 0 || !(bound > 0.0) { EnumState::Done } else { EnumState::Fresh },
            fixed_top,
        }
    }

    fn open_level(&mut self, k: usize) {
        let rkk = self.r[k][k];
        let s: f64 = (k + 1..self.n).map(|j| self.r[k][j] * self.x[j] as f64).sum();
        let c = -s / rkk;
        let rem = (self.bound - self.partial[k + 1]).max(0.0);
        let w = rem.sqrt() / rkk;
        self.center[k] = c;
        self.x[k] = (c - w).ceil() as i64;
        self.hi[k] = (c + w).floor() as i64;
        if k == self.n - 1 {
            if let Some(t) = self.fixed_top {
                if t < self.x[k] || t > self.hi[k] {
                    self.hi[k] = self.x[k] - 1;
                } else {
                    self.x[k] = t;
                    self.hi[k] = t;
                }
            }
        }
    }

    fn top_range(m: &MajorantForm, bound: f64) -> (i64, i64) {
        let n = m.rank();
        let b = bound * (1.0 + BOUND_SLACK) + 1e-12;
        let w = b.sqrt() / m.cholesky[(n - 1, n - 1)];
        ((-w).ceil() as i64, w.floor() as i64)
    }
}

impl Iterator for BallEnumerator {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        match self.state {
            EnumState::Done => return None,
            EnumState::Fresh => {
                self.state = EnumState::Running;
                self.level = self.n - 1;
                self.open_level(self.level);
            }
            EnumState::Running => {}
        }
        loop {
            let k = self.level;
            if self.x[k] > self.hi[k] {
                if k == self.n - 1 {
                    self.state = EnumState::Done;
                    return None;
                }
                self.level += 1;
                self.x[self.level] += 1;
                continue;
            }
            let d = self.r[k][k] * (self.x[k] as f64 - self.center[k]);
            let total = self.partial[k + 1] + d * d;
            if total > self.bound {
                self.x[k] += 1;
                continue;
            }
            if k == 0 {
                let out = self.x.clone();
                self.x[0] += 1;
                if out.iter().any(|&c| c != 0) {
                    return Some(out);
                }
                continue;
            }
            self.partial[k] = total;
            self.level = k - 1;
            self.open_level(k - 1);
        }
    }
}

pub fn enumerate_ball(m: &MajorantForm, bound: f64) -> BallEnumerator {
    BallEnumerator::new(m, bound, None)
}

/// Same vectors and order as [`enumerate_ball`], with the outermost coordinate
/// split across threads and merged in ascending order.
pub fn enumerate_ball_collect(m: &MajorantForm, bound: f64) -> Vec<Vec<i64>> {
    if m.rank() == 0 || !(bound > 0.0) {
        return Vec::new();
    }
    let (lo, hi) = BallEnumerator::top_range(m, bound);
    let chunk = |t: i64| BallEnumerator::new(m, bound, Some(t)).collect::<Vec<_>>();
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<Vec<i64>>> = {
        use rayon::prelude::*;
        (lo..=hi).into_par_iter().map(chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<Vec<i64>>> = (lo..=hi).map(chunk).collect();
    parts.into_iter().flatten().collect()
}

/// Receives search-tree events from [`IsotropicSearch`].
trait Sink {
    /// A visited node (prefix or candidate vector) with its majorant value.
    fn node(&mut self, norm: f64);
    /// A primitive isotropic vector inside the bound.
    fn hit(&mut self, v: &[i64], norm: f64);
}

/// Fincke–Pohst over all coordinates but the first; the first coordinate is
/// then solved exactly from `Q(v) = 0`.
struct IsotropicSearch<'a> {
    n: usize,
    r: Vec<Vec<f64>>,
    gram: &'a [Vec<i64>],
    bound: f64,
    x: Vec<i64>,
    /// `lin[k][i] = Σ_{j ≥ k} g_ij x_j`.
    lin: Vec<Vec<i128>>,
    /// `qpart[k] = Σ_{i,j ≥ k} g_ij x_i x_j`.
    qpart: Vec<i128>,
    /// `fsum[k][i] = Σ_{j ≥ k} r_ij x_j`.
    fsum: Vec<Vec<f64>>,
    partial: Vec<f64>,
}

impl<'a> IsotropicSearch<'a> {
    fn new(m: &MajorantForm, gram: &'a [Vec<i64>], bound: f64) -> Self {
        let n = m.rank();
        Self {
            n,
            r: m.upper(),
            gram,
            bound: bound * (1.0 + BOUND_SLACK) + 1e-12,
            x: vec![0; n],
            lin: vec![vec![0; n]; n + 1],
            qpart: vec![0; n + 1],
            fsum: vec![vec![0.0; n]; n + 1],
            partial: vec![0.0; n + 1],
        }
    }

    fn top_range(&self) -> (i64, i64) {
        let k = self.n - 1;
        let w = self.bound.sqrt() / self.r[k][k];
        ((-w).ceil() as i64, w.floor() as i64)
    }

    fn set(&mut self, k: usize, xk: i64) {
        self.x[k] = xk;
        let (below, above) = self.lin.split_at_mut(k + 1);
        let cur = &mut below[k];
        let prev = &above[0];
        let xk128 = xk as i128;
        for i in 0..self.n {
            cur[i] = prev[i] + self.gram[i][k] as i128 * xk128;
        }
        self.qpart[k] = self.qpart[k + 1] + xk128 * (self.gram[k][k] as i128 * xk128 + 2 * prev[k]);
        let (fb, fa) = self.fsum.split_at_mut(k + 1);
        let fcur = &mut fb[k];
        let fprev = &fa[0];
        let xf = xk as f64;
        for i in 0..k {
            fcur[i] = fprev[i] + self.r[i][k] * xf;
        }
    }

    fn run<S: Sink>(&mut self, top: Option<i64>, sink: &mut S) {
        if self.n < 2 {
            return;
        }
        self.descend(self.n - 1, top, sink);
    }

    fn descend<S: Sink>(&mut self, k: usize, fixed: Option<i64>, sink: &mut S) {
        if k == 1 {
            self.level_one(fixed, sink);
            return;
        }
        let Some((lo, hi, c)) = self.range(k, fixed) else { return };
        let rkk = self.r[k][k];
        for xk in lo..=hi {
            let d = rkk * (xk as f64 - c);
            let total = self.partial[k + 1] + d * d;
            if total > self.bound {
                continue;
            }
            self.set(k, xk);
            self.partial[k] = total;
            sink.node(total);
            self.descend(k - 1, None, sink);
        }
    }

    /// Integer range and center for coordinate `k` given the deeper ones.
    fn range(&self, k: usize, fixed: Option<i64>) -> Option<(i64, i64, f64)> {
        let rkk = self.r[k][k];
        let c = -self.fsum[k + 1][k] / rkk;
        let rem = self.bound - self.partial[k + 1];
        if rem < 0.0 {
            return None;
        }
        let w = rem.sqrt() / rkk;
        let (lo, hi) = ((c - w).ceil() as i64, (c + w).floor() as i64);
        match fixed {
            Some(t) if t < lo || t > hi => None,
            Some(t) => Some((t, t, c)),
            None => Some((lo, hi, c)),
        }
    }

    /// Innermost enumerated level, with scalar updates only: this loop
    /// carries nearly all of the work.
    fn level_one<S: Sink>(&mut self, fixed: Option<i64>, sink: &mut S) {
        let Some((lo, hi, c)) = self.range(1, fixed) else { return };
        let r11 = self.r[1][1];
        let r01 = self.r[0][1];
        let g01 = self.gram[0][1] as i128;
        let g11 = self.gram[1][1] as i128;
        let (b2, l21, q2) = (self.lin[2][0], self.lin[2][1], self.qpart[2]);
        let (f20, p2) = (self.fsum[2][0], self.partial[2]);
        for x1 in lo..=hi {
            let d = r11 * (x1 as f64 - c);
            let total = p2 + d * d;
            if total > self.bound {
                continue;
            }
            sink.node(total);
            let x = x1 as i128;
            self.x[1] = x1;
            let b = b2 + g01 * x;
            let q1 = q2 + x * (g11 * x + 2 * l21);
            self.solve_first(b, q1, f20 + r01 * x1 as f64, total, sink);
        }
    }

    /// Solves `g00·x0² + 2b·x0 + q1 = 0` for integer `x0` inside the ball.
    fn solve_first<S: Sink>(&mut self, b: i128, q1: i128, fsum0: f64, partial1: f64, sink: &mut S) {
        let g00 = self.gram[0][0] as i128;
        let r00 = self.r[0][0];
        let center = -fsum0 / r00;
        let rem = self.bound - partial1;
        if rem < 0.0 {
            return;
        }
        let w = rem.sqrt() / r00;
        let (lo, hi) = ((center - w).ceil() as i64, (center + w).floor() as i64);
        if g00 == 0 {
            if b != 0 {
                if q1 % (2 * b) == 0 {
                    if let Ok(x0) = i64::try_from(-q1 / (2 * b)) {
                        if x0 >= lo && x0 <= hi {
                            self.emit(x0, center, partial1, sink);
                        }
                    }
                }
            } else if q1 == 0 {
                for x0 in lo..=hi {
                    self.emit(x0, center, partial1, sink);
                }
            }
            return;
        }
        // (g00·x0 + b)² = b² − g00·q1
        let disc = b * b - g00 * q1;
        if disc < 0 {
            return;
        }
        let sf = (disc as f64).sqrt();
        let (gf, bf) = (g00 as f64, b as f64);
        let near = |x: f64| x >= lo as f64 - 1.0 && x <= hi as f64 + 1.0;
        if !near((-bf - sf) / gf) && !near((-bf + sf) / gf) {
            return;
        }
        let s = exact_sqrt(disc, sf);
        let Some(s) = s else { return };
        let mut roots = [(-b - s, true), (-b + s, s != 0)];
        if g00 < 0 {
            roots.swap(0, 1);
        }
        for (num, keep) in roots {
            if keep && num % g00 == 0 {
                if let Ok(x0) = i64::try_from(num / g00) {
                    if x0 >= lo && x0 <= hi {
                        self.emit(x0, center, partial1, sink);
                    }
                }
            }
        }
    }

    fn emit<S: Sink>(&mut self, x0: i64, center: f64, partial1: f64, sink: &mut S) {
        let d = self.r[0][0] * (x0 as f64 - center);
        let norm = partial1 + d * d;
        if norm > self.bound {
            return;
        }
        self.x[0] = x0;
        sink.node(norm);
        if is_primitive(&self.x) {
            sink.hit(&self.x, norm);
        }
    }
}

/// `Some(s)` with `s² = n`, starting from a floating estimate.
fn exact_sqrt(n: i128, estimate: f64) -> Option<i128> {
    let mut s = estimate.round() as i128;
    if s < 0 || (s > 0 && s.checked_mul(s).is_none()) {
        s = n.sqrt();
    }
    while s > 0 && s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    (s * s == n).then_some(s)
}

/// Per-bucket tallies; bucket `i` holds events with norm in `(t_{i−1}, t_i]`.
struct Histogram<'b> {
    thresholds: &'b [f64],
    hits: Vec<u64>,
    nodes: Vec<u64>,
}

impl<'b> Histogram<'b> {
    fn new(thresholds: &'b [f64]) -> Self {
        let k = thresholds.len();
        Self { thresholds, hits: vec![0; k], nodes: vec![0; k] }
    }

    fn bucket(&self, norm: f64) -> Option<usize> {
        let i = self.thresholds.partition_point(|&t| t < norm);
        (i < self.thresholds.len()).then_some(i)
    }

    fn merge(&mut self, other: &Histogram, weight: u64) {
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += weight * b;
        }
        for (a, b) in self.nodes.iter_mut().zip(&other.nodes) {
            *a += weight * b;
        }
    }
}

impl Sink for Histogram<'_> {
    fn node(&mut self, norm: f64) {
        if let Some(i) = self.bucket(norm) {
            self.nodes[i] += 1;
        }
    }

    fn hit(&mut self, _v: &[i64], norm: f64) {
        if let Some(i) = self.bucket(norm) {
            self.hits[i] += 1;
        }
    }
}

struct Collector(Vec<(Vec<i64>, f64)>);

impl Sink for Collector {
    fn node(&mut self, _norm: f64) {}

    fn hit(&mut self, v: &[i64], norm: f64) {
        self.0.push((v.to_vec(), norm));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensusRecord {
    #[serde(rename = "V")]
    pub v: f64,
    /// Vectors counted with sign (`v` and `−v` separately).
    pub count: u64,
    pub count_up_to_sign: u64,
    /// Search-tree nodes an enumeration at this bound visits.
    pub enumerated: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusOptions {
    pub record_timing: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self { record_timing: true }
    }
}

fn check_bounds(v_list: &[f64]) -> Result<()> {
    if v_list.is_empty() {
        return Err(Error::InvalidArgument("V list is empty".into()));
    }
    if v_list.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("V values must be positive and finite".into()));
    }
    if v_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("V list must be ascending".into()));
    }
    Ok(())
}

/// Counts primitive isotropic `v` with `Q(v_P) ≤ V²` for every `V` in the
/// list, from a single enumeration at the largest bound.
pub fn census(lattice: &GramLattice, plane: &PositivePlane, v_list: &[f64]) -> Result<Vec<CensusRecord>> {
    census_with(lattice, plane, v_list, CensusOptions::default())
}

pub fn census_with(
    lattice: &GramLattice,
    plane: &PositivePlane,
    v_list: &[f64],
    opts: CensusOptions,
) -> Result<Vec<CensusRecord>> {
    check_bounds(v_list)?;
    let majorant = build_majorant(lattice, plane)?;
    // clocks are unavailable on some targets, so only read one when asked
    let start = opts.record_timing.then(Instant::now);
    let (n_plus, n_minus) = lattice.signature();
    let thresholds: Vec<f64> = v_list.iter().map(|v| 2.0 * v * v * (1.0 + BOUND_SLACK)).collect();
    let mut hist = Histogram::new(&thresholds);
    // definite forms have no nonzero isotropic vectors
    if n_plus > 0 && n_minus > 0 {
        let max_bound = 2.0 * v_list[v_list.len() - 1].powi(2);
        run_census_search(&majorant, lattice, max_bound, &mut hist);
    }
    let elapsed_ms = start.map_or(0, |s| s.elapsed().as_millis() as u64);
    let mut count = 0;
    let mut enumerated = 0;
    Ok(v_list
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            count += hist.hits[i];
            enumerated += hist.nodes[i];
            CensusRecord { v, count, count_up_to_sign: count / 2, enumerated, elapsed_ms }
        })
        .collect())
}

fn run_census_search(m: &MajorantForm, lattice: &GramLattice, bound: f64, hist: &mut Histogram) {
    let gram = lattice.gram();
    let probe = IsotropicSearch::new(m, gram, bound);
    if probe.n < 2 {
        return;
    }
    // v ↦ −v mirrors the search tree bit for bit (negation is exact in
    // floating point), so only tops t ≥ 0 are searched and t > 0 counts twice
    let (_, hi) = probe.top_range();
    let thresholds = hist.thresholds;
    let chunk = |t: i64| {
        let mut h = Histogram::new(thresholds);
        IsotropicSearch::new(m, gram, bound).run(Some(t), &mut h);
        h
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Histogram> = {
        use rayon::prelude::*;
        (0..=hi).into_par_iter().map(chunk).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Histogram> = (0..=hi).map(chunk).collect();
    for (t, part) in parts.iter().enumerate() {
        hist.merge(part, if t == 0 { 1 } else { 2 });
    }
}

/// All primitive isotropic vectors with `Q(v_P) ≤ V²`, with their majorant
/// values, in enumeration order.
pub fn isotropic_vectors(lattice: &GramLattice, plane: &PositivePlane, v: f64) -> Result<Vec<(Vec<i64>, f64)>> {
    check_bounds(&[v])?;
    let majorant = build_majorant(lattice, plane)?;
    let bound = 2.0 * v * v;
    let mut out = Collector(Vec::new());
    IsotropicSearch::new(&majorant, lattice.gram(), bound).run(None, &mut out);
    Ok(out.0)
}

/// Least squares on `(log V, log count)`. Records with zero count are
/// ignored; with five or more usable points the smallest `V` is dropped.
pub fn fit_exponent(records: &[CensusRecord]) -> Result<FitResult> {
    let mut usable: Vec<&CensusRecord> = records.iter().filter(|r| r.count > 0).collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 records with positive count, got {}",
            usable.len()
        )));
    }
    usable.sort_by(|a, b| a.v.total_cmp(&b.v));
    if usable.len() >= 5 {
        usable.remove(0);
    }
    let xs: Vec<f64> = usable.iter().map(|r| r.v.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| (r.count as f64).ln()).collect();
    least_squares(&xs, &ys)
}

pub const CSV_HEADER: &str = "V,count,count_up_to_sign,enumerated,elapsed_ms";

pub fn to_csv(records: &[CensusRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{},{},{}\n", r.v, r.count, r.count_up_to_sign, r.enumerated, r.elapsed_ms));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensusFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub expected_slope: f64,
}

impl CensusFit {
    pub fn new(fit: FitResult, rank: usize) -> Self {
        Self {
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            expected_slope: rank as f64 - 2.0,
        }
    }
}
