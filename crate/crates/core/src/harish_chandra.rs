//! Iwasawa decomposition for small `O(p,q)` and quadrature for the
//! Harish-Chandra function `Ξ(g) = ∫_K e^{−ρ(H(k g⁻¹))} dk`.
//!
//! Coordinates: the diagonal basis `u_1, …, u_n` carries the form
//! `diag(1^p, (−1)^q)`. The hyperbolic basis is the ordered flag basis
//! `f_1, …, f_p, u_{2p+1}, …, u_n, f′_p, …, f′_1` with
//! `f_i = (u_i + u_{p+i})/√2` and `f′_i = (u_i − u_{p+i})/√2`. In it the
//! torus acts as `diag(e^{−h_1}, …, e^{−h_p}, 1, …, 1, e^{h_p}, …, e^{h_1})`
//! and `N` is unit upper triangular.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{least_squares, FitResult};
use crate::lie::{root_datum, GroupSpec};

/// Largest `p + q` the decomposition accepts.
pub const MAX_SIZE: u32 = 6;
pub const MIN_NODES_PER_CIRCLE: usize = 256;
/// Successive quadrature refinements must agree to this absolute tolerance.
pub const REFINEMENT_TOL: f64 = 1e-6;
const MEMBERSHIP_TOL: f64 = 1e-9;
const MAX_CONDITION: f64 = 1e12;
/// Half-width of the tanh-sinh parameter interval.
const TANH_SINH_SPAN: f64 = 3.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Diagonal,
    Hyperbolic,
}

/// Form matrix `J` in the given basis.
pub fn form_matrix(spec: GroupSpec, basis: Basis) -> DMatrix<f64> {
    let diag = diagonal_form(spec);
    match basis {
        Basis::Diagonal => diag,
        Basis::Hyperbolic => {
            let s = change_of_basis(spec);
            s.transpose() * diag * s
        }
    }
}

fn diagonal_form(spec: GroupSpec) -> DMatrix<f64> {
    let (p, n) = (spec.p as usize, spec.n() as usize);
    DMatrix::from_fn(n, n, |i, j| match (i == j, i < p) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => -1.0,
    })
}

/// Orthogonal `S` whose columns are the hyperbolic basis vectors written in
/// the diagonal basis.
pub fn change_of_basis(spec: GroupSpec) -> DMatrix<f64> {
    let (p, n) = (spec.p as usize, spec.n() as usize);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = DMatrix::zeros(n, n);
    for i in 0..p {
        s[(i, i)] = r;
        s[(p + i, i)] = r;
        s[(i, n - 1 - i)] = r;
        s[(p + i, n - 1 - i)] = -r;
    }
    for (col, u) in (p..n - p).zip(2 * p..n) {
        s[(u, col)] = 1.0;
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    spec: GroupSpec,
    basis: Basis,
}

impl GroupElement {
    /// Checks `gᵀJg = J` to a tolerance relative to `‖g‖²`.
    pub fn new(spec: GroupSpec, matrix: DMatrix<f64>, basis: Basis) -> Result<Self> {
        let n = spec.n() as usize;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        let j = form_matrix(spec, basis);
        let defect = (matrix.transpose() * &j * &matrix - &j).amax();
        let scale = matrix.norm_squared().max(1.0);
        if !defect.is_finite() || defect > MEMBERSHIP_TOL * scale {
            return Err(Error::NotInGroup(defect));
        }
        Ok(Self { matrix, spec, basis })
    }

    fn unchecked(spec: GroupSpec, matrix: DMatrix<f64>, basis: Basis) -> Self {
        Self { matrix, spec, basis }
    }

    pub fn identity(spec: GroupSpec, basis: Basis) -> Self {
        let n = spec.n() as usize;
        Self::unchecked(spec, DMatrix::identity(n, n), basis)
    }

    /// `exp(H)` for `H = (h_1, …, h_p)`, in the diagonal basis.
    pub fn torus(spec: GroupSpec, h: &[f64]) -> Result<Self> {
        let (p, n) = (spec.p as usize, spec.n() as usize);
        if h.len() != p {
            return Err(Error::DimensionMismatch { expected: p, got: h.len() });
        }
        let mut a = DMatrix::identity(n, n);
        for (i, &x) in h.iter().enumerate() {
            a[(i, i)] = (-x).exp();
            a[(n - 1 - i, n - 1 - i)] = x.exp();
        }
        Ok(Self::unchecked(spec, a, Basis::Hyperbolic).in_basis(Basis::Diagonal))
    }

    /// `a_t`: the torus element with `H = t` in the first coordinate.
    pub fn boost(spec: GroupSpec, t: f64) -> Self {
        let mut h = vec![0.0; spec.p as usize];
        h[0] = t;
        Self::torus(spec, &h).expect("length matches")
    }

    /// Identity-component element of `K` from rotation angles: for `(1,2)`
    /// one angle in the `(u_2, u_3)` plane, for `(2,2)` angles in the
    /// `(u_1, u_2)` and `(u_3, u_4)` planes.
    pub fn compact(spec: GroupSpec, angles: &[f64]) -> Result<Self> {
        let planes: &[(usize, usize)] = match (spec.p, spec.q) {
            (1, 2) => &[(1, 2)],
            (2, 2) => &[(0, 1), (2, 3)],
            _ => return Err(unsupported_quadrature(spec)),
        };
        if angles.len() != planes.len() {
            return Err(Error::DimensionMismatch { expected: planes.len(), got: angles.len() });
        }
        let n = spec.n() as usize;
        let mut k = DMatrix::identity(n, n);
        for (&(i, j), &th) in planes.iter().zip(angles) {
            let (s, c) = th.sin_cos();
            k[(i, i)] = c;
            k[(i, j)] = -s;
            k[(j, i)] = s;
            k[(j, j)] = c;
        }
        Ok(Self::unchecked(spec, k, Basis::Diagonal))
    }

    /// Random element of `SO(p)×SO(q)`.
    pub fn random_compact<R: Rng + ?Sized>(spec: GroupSpec, rng: &mut R) -> Self {
        let (p, n) = (spec.p as usize, spec.n() as usize);
        let mut k = DMatrix::zeros(n, n);
        k.view_mut((0, 0), (p, p)).copy_from(&random_rotation(p, rng));
        k.view_mut((p, p), (n - p, n - p)).copy_from(&random_rotation(n - p, rng));
        Self::unchecked(spec, k, Basis::Diagonal)
    }

    /// Random element of `N` of roughly the given entry size, in the
    /// hyperbolic basis.
    pub fn random_unipotent<R: Rng + ?Sized>(spec: GroupSpec, scale: f64, rng: &mut R) -> Self {
        let (p, n) = (spec.p as usize, spec.n() as usize);
        let middle = |i: usize| i >= p && i < n - p;
        let mut y = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                if !(middle(i) && middle(j)) {
                    y[(i, j)] = scale * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        // project onto the Lie algebra: X = (Y − J⁻¹YᵀJ)/2 stays strictly upper
        let j = form_matrix(spec, Basis::Hyperbolic);
        let jinv = j.clone().try_inverse().expect("form is invertible");
        let x = (&y - &jinv * y.transpose() * &j) * 0.5;
        // nilpotent, so the exponential series is finite
        let mut out = DMatrix::identity(n, n);
        let mut term = DMatrix::identity(n, n);
        for k in 1..n {
            term = &term * &x / k as f64;
            out += &term;
        }
        Self::unchecked(spec, out, Basis::Hyperbolic)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn in_basis(&self, basis: Basis) -> Self {
        if basis == self.basis {
            return self.clone();
        }
        let s = change_of_basis(self.spec);
        let matrix = match basis {
            Basis::Hyperbolic => s.transpose() * &self.matrix * &s,
            Basis::Diagonal => &s * &self.matrix * s.transpose(),
        };
        Self::unchecked(self.spec, matrix, basis)
    }

    /// Product in this element's basis.
    pub fn mul(&self, other: &Self) -> Self {
        let rhs = other.in_basis(self.basis);
        Self::unchecked(self.spec, &self.matrix * rhs.matrix, self.basis)
    }

    /// `J⁻¹gᵀJ`, exact for form-preserving `g` up to rounding.
    pub fn inverse(&self) -> Self {
        let j = form_matrix(self.spec, self.basis);
        let jinv = j.clone().try_inverse().expect("form is invertible");
        Self::unchecked(self.spec, jinv * self.matrix.transpose() * j, self.basis)
    }
}

fn random_rotation<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IwasawaTriple {
    /// Unit upper triangular, hyperbolic basis.
    #[serde(skip)]
    pub n: GroupElement,
    #[serde(rename = "H")]
    pub h: Vec<f64>,
    /// Orthogonal, diagonal basis.
    #[serde(skip)]
    pub k: GroupElement,
}

impl IwasawaTriple {
    /// `n·exp(H)·k` in the diagonal basis.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let a = GroupElement::torus(self.n.spec, &self.h).expect("length matches");
        self.n.in_basis(Basis::Diagonal).mul(&a).mul(&self.k).matrix
    }
}

fn unsupported_size(spec: GroupSpec) -> Error {
    Error::Unsupported(format!(
        "Iwasawa decomposition is implemented for p+q <= {MAX_SIZE}, got ({},{})",
        spec.p, spec.q
    ))
}

fn unsupported_quadrature(spec: GroupSpec) -> Error {
    Error::Unsupported(format!(
        "Xi quadrature needs dim K <= 2, i.e. (p,q) in {{(1,2), (2,2)}}, got ({},{}); \
         use rho(H) from the roots data for the analytic decay rate",
        spec.p, spec.q
    ))
}

/// `g = n·a·k` via an RQ factorization in the hyperbolic basis.
pub fn iwasawa(g: &GroupElement) -> Result<IwasawaTriple> {
    let spec = g.spec;
    if spec.n() > MAX_SIZE {
        return Err(unsupported_size(spec));
    }
    let checked = GroupElement::new(spec, g.matrix.clone(), g.basis)?;
    let gh = checked.in_basis(Basis::Hyperbolic).matrix;
    let n = gh.nrows();
    let (r, qh) = rq(&gh);
    let d: Vec<f64> = (0..n).map(|i| r[(i, i)]).collect();
    let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let cond = hi / lo;
    if !cond.is_finite() || lo <= 0.0 || cond > MAX_CONDITION {
        return Err(Error::NumericalDegeneracy(cond));
    }
    let mut unip = r;
    for j in 0..n {
        let dj = d[j];
        unip.column_mut(j).scale_mut(1.0 / dj);
    }
    let h = (0..spec.p as usize).map(|i| d[n - 1 - i].ln()).collect();
    let k = GroupElement::unchecked(spec, qh, Basis::Hyperbolic).in_basis(Basis::Diagonal);
    Ok(IwasawaTriple { n: GroupElement::unchecked(spec, unip, Basis::Hyperbolic), h, k })
}

/// `A = R·Q` with `R` upper triangular with positive diagonal and `Q`
/// orthogonal, from the QR factorization of the row-reversed transpose.
fn rq(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let rev = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, j)]);
    let qr = rev(a).transpose().qr();
    let (q1, r1) = (qr.q(), qr.r());
    // A = P·R1ᵀ·Q1ᵀ = (P·R1ᵀ·P)·(P·Q1ᵀ)
    let mut r = DMatrix::from_fn(n, n, |i, j| r1[(n - 1 - j, n - 1 - i)]);
    let mut q = rev(&q1.transpose());
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            r.column_mut(i).neg_mut();
            q.row_mut(i).neg_mut();
        }
    }
    (r, q)
}

/// Torus logarithm `H(g)` alone. The trailing rows of `SᵀgS` are
/// `f′_iᵀ·g·S`; their Gram–Schmidt norms from the bottom give `e^{h_i}`, and
/// the orthogonal `S` on the right does not change them.
fn torus_log(g: &DMatrix<f64>, p: usize, out: &mut [f64]) {
    let n = g.nrows();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows: Vec<DVector<f64>> = Vec::with_capacity(p);
    for i in 0..p {
        // f′_i = (u_i − u_{p+i})/√2
        let mut w = DVector::from_fn(n, |c, _| r * (g[(i, c)] - g[(p + i, c)]));
        for prev in &rows {
            let c = w.dot(prev);
            w.axpy(-c, prev, 1.0);
        }
        let norm = w.norm();
        out[i] = norm.ln();
        rows.push(w / norm);
    }
}

/// Nodes in `K` (rotation angles) with weights of total mass 1.
///
/// The integrand concentrates on a set of width about `e^{−|t|}` at
/// angles that are multiples of `π` (one circle) or on the lines
/// `α ± β ∈ πℤ` (two circles). Uniform grids resolve that only for small
/// `t`, so each circle is split into panels with those lines on panel
/// endpoints and integrated by the tanh-sinh rule, which clusters nodes
/// doubly exponentially at panel ends.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureGrid {
    pub spec: GroupSpec,
    pub nodes_per_circle: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(spec: GroupSpec, nodes_per_circle: usize) -> Result<Self> {
        if nodes_per_circle < MIN_NODES_PER_CIRCLE {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_NODES_PER_CIRCLE} nodes per circle, got {nodes_per_circle}"
            )));
        }
        let (nodes, mut weights) = match (spec.p, spec.q) {
            (1, 2) => {
                let (xs, ws) = panels(0.0, 2.0 * PI, 2, nodes_per_circle / 2);
                (xs.into_iter().map(|x| vec![x]).collect::<Vec<_>>(), ws)
            }
            (2, 2) => {
                // α = σ + τ, β = σ − τ; (σ, τ) ∈ [0, 2π) × [0, π) is a
                // fundamental domain of the torus, with constant Jacobian
                let (ss, sw) = panels(0.0, 2.0 * PI, 4, nodes_per_circle / 4);
                let (ts, tw) = panels(0.0, PI, 2, nodes_per_circle / 4);
                let mut nodes = Vec::with_capacity(ss.len() * ts.len());
                let mut weights = Vec::with_capacity(ss.len() * ts.len());
                for (s, ws) in ss.iter().zip(&sw) {
                    for (t, wt) in ts.iter().zip(&tw) {
                        nodes.push(vec![s + t, s - t]);
                        weights.push(ws * wt);
                    }
                }
                (nodes, weights)
            }
            _ => return Err(unsupported_quadrature(spec)),
        };
        let total = pairwise_sum(&weights);
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { spec, nodes_per_circle, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn refined(&self) -> Result<Self> {
        Self::new(self.spec, 2 * self.nodes_per_circle)
    }
}

/// Tanh-sinh rule on `count` equal panels of `[a, b]`, `per_panel` nodes each.
fn panels(a: f64, b: f64, count: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let width = (b - a) / count as f64;
    let h = 2.0 * TANH_SINH_SPAN / per_panel as f64;
    let mut xs = Vec::with_capacity(count * per_panel);
    let mut ws = Vec::with_capacity(count * per_panel);
    for c in 0..count {
        let left = a + c as f64 * width;
        for j in 0..per_panel {
            let u = -TANH_SINH_SPAN + (j as f64 + 0.5) * h;
            let s = 0.5 * PI * u.sinh();
            let x = s.tanh();
            let w = 0.5 * PI * u.cosh() / s.cosh().powi(2);
            xs.push(left + 0.5 * width * (1.0 + x));
            ws.push(0.5 * width * h * w);
        }
    }
    (xs, ws)
}

/// Recursive pairwise summation; fixed order, so results do not depend on
/// thread count.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn check_quadrature_spec(spec: GroupSpec) -> Result<()> {
    match (spec.p, spec.q) {
        (1, 2) | (2, 2) => Ok(()),
        _ => Err(unsupported_quadrature(spec)),
    }
}

/// Quadrature of `e^{−ρ(H(k·a_t⁻¹))}` over the grid, without refinement.
pub fn xi_quadrature(spec: GroupSpec, t: f64, grid: &QuadratureGrid) -> Result<f64> {
    check_quadrature_spec(spec)?;
    if grid.spec != spec {
        return Err(Error::InvalidArgument("grid was built for a different group".into()));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be finite, got {t}")));
    }
    let p = spec.p as usize;
    let rho = root_datum(spec).rho_f64();
    let a_inv = GroupElement::boost(spec, -t).matrix;
    let value = |(angles, w): (&Vec<f64>, &f64)| {
        let k = GroupElement::compact(spec, angles).expect("spec checked").matrix;
        let g = k * &a_inv;
        let mut h = [0.0; MAX_SIZE as usize];
        torus_log(&g, p, &mut h[..p]);
        let rho_h: f64 = rho.iter().zip(&h).map(|(r, x)| r * x).sum();
        w * (-rho_h).exp()
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<f64> = {
        use rayon::prelude::*;
        grid.nodes.par_iter().zip(grid.weights.par_iter()).map(value).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<f64> = grid.nodes.iter().zip(grid.weights.iter()).map(value).collect();
    Ok(pairwise_sum(&terms))
}

/// `Ξ(a_t)` on the grid, confirmed against a grid of twice the resolution.
pub fn xi_value(spec: GroupSpec, t: f64, grid: &QuadratureGrid) -> Result<f64> {
    let coarse = xi_quadrature(spec, t, grid)?;
    let fine = xi_quadrature(spec, t, &grid.refined()?)?;
    let diff = (coarse - fine).abs();
    if !(diff <= REFINEMENT_TOL) {
        return Err(Error::NonConvergence(diff));
    }
    Ok(coarse)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted rate in `log Ξ ≈ −r·t + log t + c`.
    pub r: f64,
    /// Regression of `log Ξ − log t` on `t`; `slope = −r`.
    pub log_corrected: FitResult,
    /// Fitted rate in `log Ξ ≈ −r·t + c`.
    pub r_pure: f64,
    pub pure_exponential: FitResult,
}

/// Fits both decay models to `(t, Ξ)` samples.
pub fn fit_decay(ts: &[f64], xis: &[f64]) -> Result<DecayFit> {
    if xis.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("Xi samples must be positive".into()));
    }
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("t samples must be positive".into()));
    }
    let logs: Vec<f64> = xis.iter().map(|x| x.ln()).collect();
    let corrected: Vec<f64> = logs.iter().zip(ts).map(|(l, t)| l - t.ln()).collect();
    let log_corrected = least_squares(ts, &corrected)?;
    let pure_exponential = least_squares(ts, &logs)?;
    Ok(DecayFit { r: -log_corrected.slope, log_corrected, r_pure: -pure_exponential.slope, pure_exponential })
}

/// Evenly spaced sample points including both ends.
pub fn sample_points(t_min: f64, t_max: f64, samples: usize) -> Vec<f64> {
    let step = (t_max - t_min) / (samples - 1) as f64;
    (0..samples).map(|i| t_min + i as f64 * step).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiSample {
    pub t: f64,
    pub xi: f64,
    pub log_xi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiDecayReport {
    pub spec: GroupSpec,
    pub nodes_per_circle: usize,
    pub samples: Vec<XiSample>,
    pub fit: DecayFit,
    pub rho_h: f64,
}

pub fn xi_decay_fit(spec: GroupSpec, t_range: [f64; 2], samples: usize) -> Result<XiDecayReport> {
    xi_decay_fit_with(spec, t_range, samples, MIN_NODES_PER_CIRCLE)
}

pub fn xi_decay_fit_with(
    spec: GroupSpec,
    t_range: [f64; 2],
    samples: usize,
    nodes_per_circle: usize,
) -> Result<XiDecayReport> {
    let [t_min, t_max] = t_range;
    if !(t_min >= 4.0) {
        return Err(Error::InvalidArgument(format!("t-min must be >= 4, got {t_min}")));
    }
    if !(t_max > t_min) || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("t-max must exceed t-min, got {t_max}")));
    }
    if samples < 8 {
        return Err(Error::InvalidArgument(format!("samples must be >= 8, got {samples}")));
    }
    check_quadrature_spec(spec)?;
    let grid = QuadratureGrid::new(spec, nodes_per_circle)?;
    let ts = sample_points(t_min, t_max, samples);
    let xis = ts.iter().map(|&t| xi_value(spec, t, &grid)).collect::<Result<Vec<_>>>()?;
    let fit = fit_decay(&ts, &xis)?;
    let samples = ts.iter().zip(&xis).map(|(&t, &xi)| XiSample { t, xi, log_xi: xi.ln() }).collect();
    let rho_h = crate::exponents::approx(&crate::lie::rho_h(spec));
    Ok(XiDecayReport { spec, nodes_per_circle, samples, fit, rho_h })
}
