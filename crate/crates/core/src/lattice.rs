//! Integer lattices with indefinite forms, positive planes and the boost subgroup.
//!
//! The K3 lattice `3U+2E8m` has signature (3,19). A [`PositivePlane`] splits
//! every real vector as `v = v_P + v_Perp`; reflecting the `P⊥` part of an
//! isotropic `e` gives the partner `e'`, and [`boost_matrix`] builds the
//! element acting by `λ⁻¹` on `e`, `λ` on `e'` and trivially on their
//! orthogonal complement.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{int, RatMatrix, Rational};

/// Gram matrix of the negative-definite E8 lattice: the E8 Cartan matrix
/// (Bourbaki labelling 1-3-4-5-6-7-8 with 2 attached to 4), negated.
const E8_NEG: [[i64; 8]; 8] = [
    [-2, 0, 1, 0, 0, 0, 0, 0],
    [0, -2, 0, 1, 0, 0, 0, 0],
    [1, 0, -2, 1, 0, 0, 0, 0],
    [0, 1, 1, -2, 1, 0, 0, 0],
    [0, 0, 0, 1, -2, 1, 0, 0],
    [0, 0, 0, 0, 1, -2, 1, 0],
    [0, 0, 0, 0, 0, 1, -2, 1],
    [0, 0, 0, 0, 0, 0, 1, -2],
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GramLattice {
    gram: Vec<Vec<i64>>,
    rank: usize,
    signature: (usize, usize),
}

impl GramLattice {
    /// Validates symmetry and nondegeneracy, and computes the signature exactly.
    pub fn from_gram(gram: Vec<Vec<i64>>) -> Result<Self> {
        let rank = gram.len();
        for row in &gram {
            if row.len() != rank {
                return Err(Error::DimensionMismatch { expected: rank, got: row.len() });
            }
        }
        for i in 0..rank {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        let signature = exact_signature(&gram)?;
        Ok(Self { gram, rank, signature })
    }

    /// The hyperbolic plane `[[0,1],[1,0]]`.
    pub fn hyperbolic() -> Self {
        Self::from_gram(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    pub fn e8_negative() -> Self {
        Self::from_gram(E8_NEG.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// The K3 lattice `U³ ⊕ E8(−1)²`.
    pub fn k3() -> Self {
        Self::parse("3U+2E8m").unwrap()
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.rank + other.rank;
        let mut gram = vec![vec![0; n]; n];
        for i in 0..self.rank {
            gram[i][..self.rank].copy_from_slice(&self.gram[i]);
        }
        for i in 0..other.rank {
            gram[self.rank + i][self.rank..].copy_from_slice(&other.gram[i]);
        }
        Self {
            gram,
            rank: n,
            signature: (self.signature.0 + other.signature.0, self.signature.1 + other.signature.1),
        }
    }

    /// Parses `"U"`, `"E8m"` and `+`-joined multiples such as `"3U+2E8m"`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = || Error::LatticeSpec(spec.to_string());
        let mut acc: Option<Self> = None;
        for term in spec.split('+') {
            let term = term.trim();
            let digits = term.chars().take_while(char::is_ascii_digit).count();
            let (count, name) = term.split_at(digits);
            let count: usize = if count.is_empty() { 1 } else { count.parse().map_err(|_| bad())? };
            let block = match name.trim() {
                "U" => Self::hyperbolic(),
                "E8m" => Self::e8_negative(),
                _ => return Err(bad()),
            };
            if count == 0 {
                return Err(bad());
            }
            for _ in 0..count {
                acc = Some(match acc {
                    None => block.clone(),
                    Some(l) => l.direct_sum(&block),
                });
            }
        }
        acc.ok_or_else(bad)
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `(n_plus, n_minus)`.
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank).all(|i| self.gram[i][i] % 2 == 0)
    }

    pub fn determinant(&self) -> Rational {
        exact_determinant(&self.gram)
    }

    pub fn gram_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rank, self.rank, |i, j| self.gram[i][j] as f64)
    }

    pub fn gram_rational(&self) -> RatMatrix {
        RatMatrix::from_integers(&self.gram)
    }

    /// Gram matrix as a JSON array of integer rows.
    pub fn gram_json(&self) -> String {
        serde_json::to_string(&self.gram).expect("integer rows serialize")
    }

    pub fn pairing(&self, u: &LatticeVector, v: &LatticeVector) -> Result<i128> {
        self.check_len(u.len())?;
        self.check_len(v.len())?;
        Ok(self.pairing_slices(&u.coords, &v.coords))
    }

    pub(crate) fn pairing_slices(&self, u: &[i64], v: &[i64]) -> i128 {
        let mut acc = 0i128;
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            let row: i128 = self.gram[i].iter().zip(v).map(|(&g, &x)| g as i128 * x as i128).sum();
            acc += ui as i128 * row;
        }
        acc
    }

    pub fn pairing_rational(&self, u: &[Rational], v: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.rank {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..self.rank {
                if self.gram[i][j] != 0 && !v[j].is_zero() {
                    acc += &u[i] * &v[j] * int(self.gram[i][j]);
                }
            }
        }
        acc
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rank {
            return Err(Error::DimensionMismatch { expected: self.rank, got: len });
        }
        Ok(())
    }
}

impl fmt::Display for GramLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {} lattice of signature {:?}", self.rank, self.signature)
    }
}

/// `vᵀ·gram·v`.
pub fn q_value(lattice: &GramLattice, v: &LatticeVector) -> Result<i128> {
    lattice.pairing(v, v)
}

pub fn signature(lattice: &GramLattice) -> (usize, usize) {
    lattice.signature
}

/// Sylvester inertia by symmetric rational pivoting. Zero diagonals are
/// repaired by the congruence `row_i += row_j, col_i += col_j`, which turns
/// an off-diagonal `a_ij` into the pivot `2·a_ij`.
fn exact_signature(gram: &[Vec<i64>]) -> Result<(usize, usize)> {
    let n = gram.len();
    let mut a = RatMatrix::from_integers(gram);
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !a[(i, i)].is_zero());
        let i = match pivot_row {
            Some(i) => i,
            None => {
                let pair = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[(i, j)].is_zero());
                let (i, j) = pair.ok_or(Error::DegenerateForm)?;
                for c in 0..n {
                    let t = a[(j, c)].clone();
                    a[(i, c)] += t;
                }
                for r in 0..n {
                    let t = a[(r, j)].clone();
                    a[(r, i)] += t;
                }
                i
            }
        };
        if i != k {
            for c in 0..n {
                let t = a[(i, c)].clone();
                a[(i, c)] = a[(k, c)].clone();
                a[(k, c)] = t;
            }
            for r in 0..n {
                let t = a[(r, i)].clone();
                a[(r, i)] = a[(r, k)].clone();
                a[(r, k)] = t;
            }
        }
        let p = a[(k, k)].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for r in k + 1..n {
            if a[(r, k)].is_zero() {
                continue;
            }
            let f = &a[(r, k)] / &p;
            for c in k + 1..n {
                let t = &f * &a[(k, c)];
                a[(r, c)] -= t;
            }
            a[(r, k)] = Rational::zero();
            a[(k, r)] = Rational::zero();
        }
    }
    Ok((pos, neg))
}

fn exact_determinant(gram: &[Vec<i64>]) -> Rational {
    let n = gram.len();
    let mut a = RatMatrix::from_integers(gram);
    let mut det = Rational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[(r, k)].is_zero()) else {
            return Rational::zero();
        };
        if p != k {
            for c in 0..n {
                let t = a[(p, c)].clone();
                a[(p, c)] = a[(k, c)].clone();
                a[(k, c)] = t;
            }
            det = -det;
        }
        let pivot = a[(k, k)].clone();
        det *= &pivot;
        for r in k + 1..n {
            let f = &a[(r, k)] / &pivot;
            for c in k..n {
                let t = &f * &a[(k, c)];
                a[(r, c)] -= t;
            }
        }
    }
    det
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
}

impl LatticeVector {
    pub fn new(coords: Vec<i64>) -> Self {
        Self { coords }
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut coords = vec![0; rank];
        coords[i] = 1;
        Self { coords }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// gcd of the coordinates is 1; the zero vector is not primitive.
    pub fn is_primitive(&self) -> bool {
        is_primitive(&self.coords)
    }

    pub fn is_isotropic(&self, lattice: &GramLattice) -> Result<bool> {
        Ok(q_value(lattice, self)? == 0)
    }

    pub fn to_f64(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.coords.iter().map(|&x| x as f64))
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.coords.iter().map(|&x| int(x)).collect()
    }
}

pub(crate) fn is_primitive(coords: &[i64]) -> bool {
    coords.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

/// A positive-definite subspace `P` of `Λ_R`, given by a basis of columns.
#[derive(Clone, Debug)]
pub struct PositivePlane {
    lattice: GramLattice,
    q: DMatrix<f64>,
    basis: DMatrix<f64>,
    exact_basis: Option<RatMatrix>,
    projector: DMatrix<f64>,
}

impl PositivePlane {
    /// Wraps a real basis (rank × p), checking that `BᵀQB` is positive definite.
    pub fn new(lattice: &GramLattice, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != lattice.rank() {
            return Err(Error::DimensionMismatch { expected: lattice.rank(), got: basis.nrows() });
        }
        let q = lattice.gram_f64();
        let projector = real_projector(&q, &basis)?;
        Ok(Self { lattice: lattice.clone(), q, basis, exact_basis: None, projector })
    }

    /// Span of integer vectors, orthogonalized exactly with respect to `Q`.
    /// Planes built this way keep rational data, which the exact boost uses.
    pub fn from_integer_vectors(lattice: &GramLattice, vectors: &[Vec<i64>]) -> Result<Self> {
        let mut cols: Vec<Vec<Rational>> = Vec::new();
        for v in vectors {
            lattice.check_len(v.len())?;
            let mut w: Vec<Rational> = v.iter().map(|&x| int(x)).collect();
            for b in &cols {
                let coef = lattice.pairing_rational(&w, b) / lattice.pairing_rational(b, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= &coef * bi;
                }
            }
            if !lattice.pairing_rational(&w, &w).is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
            cols.push(w);
        }
        let exact = RatMatrix::from_columns(&cols);
        let exact = if cols.is_empty() { RatMatrix::zeros(lattice.rank(), 0) } else { exact };
        let mut plane = Self::new(lattice, exact.to_f64())?;
        plane.exact_basis = Some(exact);
        Ok(plane)
    }

    /// Parses `"e1+e2,2e3-e4"`: comma-separated integer combinations of the
    /// 1-based standard basis vectors.
    pub fn parse(lattice: &GramLattice, spec: &str) -> Result<Self> {
        let vectors = parse_plane_vectors(lattice.rank(), spec)?;
        Self::from_integer_vectors(lattice, &vectors)
    }

    /// Seeded generic plane of dimension `n_plus`.
    ///
    /// Candidates are Gaussian combinations in an eigenframe of `Q`, with the
    /// negative directions damped, then orthonormalized with respect to `Q`;
    /// `BᵀQB` is checked and the draw repeated on failure (up to 100 times).
    pub fn random(lattice: &GramLattice, seed: u64) -> Result<Self> {
        const ATTEMPTS: usize = 100;
        let n = lattice.rank();
        let p = lattice.signature().0;
        let q = lattice.gram_f64();
        let eig = SymmetricEigen::new(q.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let frame: Vec<DVector<f64>> = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i) / eig.eigenvalues[i].abs().sqrt())
            .collect();
        let damp = 0.5 / ((n - p).max(1) as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..ATTEMPTS {
            let mut cols: Vec<DVector<f64>> = Vec::with_capacity(p);
            let mut ok = true;
            for _ in 0..p {
                let mut w = DVector::zeros(n);
                for (k, f) in frame.iter().enumerate() {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    let scale = if k < p { 1.0 } else { damp };
                    w += f * (g * scale);
                }
                for b in &cols {
                    let c = b.dot(&(&q * &w));
                    w -= b * c;
                }
                let norm2 = w.dot(&(&q * &w));
                if !(norm2 > 1e-6) {
                    ok = false;
                    break;
                }
                cols.push(w / norm2.sqrt());
            }
            if !ok {
                continue;
            }
            let basis = if p == 0 { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
            if let Ok(plane) = Self::new(lattice, basis) {
                return Ok(plane);
            }
        }
        Err(Error::PlaneSampling(ATTEMPTS))
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn exact_basis(&self) -> Option<&RatMatrix> {
        self.exact_basis.as_ref()
    }

    /// `Π_P = B(BᵀQB)⁻¹BᵀQ`.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn complement_projector(&self) -> DMatrix<f64> {
        DMatrix::identity(self.lattice.rank(), self.lattice.rank()) - &self.projector
    }

    /// Image of the plane under a linear map (applied to the basis columns).
    pub fn transformed(&self, map: &DMatrix<f64>) -> Result<Self> {
        Self::new(&self.lattice, map * &self.basis)
    }

    pub fn pairing(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.q * v))
    }

    pub fn project(&self, v: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if v.len() != self.lattice.rank() {
            return Err(Error::DimensionMismatch { expected: self.lattice.rank(), got: v.len() });
        }
        let vp = &self.projector * v;
        let vperp = v - &vp;
        Ok((vp, vperp))
    }

    /// `v_P − v_Perp`.
    pub fn reflect(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (vp, vperp) = self.project(v)?;
        Ok(vp - vperp)
    }

    /// `e' = (e)_P − (e)_{P⊥}` for an isotropic lattice vector `e`.
    pub fn reflect_e_prime(&self, e: &LatticeVector) -> Result<DVector<f64>> {
        let qe = q_value(&self.lattice, e)?;
        if qe != 0 {
            return Err(Error::NotIsotropic(qe));
        }
        self.reflect(&e.to_f64())
    }

    /// Exact projector over the rationals, available for integer-spanned planes.
    pub fn exact_projector(&self) -> Option<RatMatrix> {
        let b = self.exact_basis.as_ref()?;
        let n = self.lattice.rank();
        if b.cols() == 0 {
            return Some(RatMatrix::zeros(n, n));
        }
        let q = self.lattice.gram_rational();
        let bt_q = b.transpose().mul(&q);
        let inner = bt_q.mul(b).inverse()?;
        Some(b.mul(&inner).mul(&bt_q))
    }

    pub fn project_exact(&self, v: &[Rational]) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let pi = self.exact_projector().ok_or_else(|| {
            Error::Unsupported("exact projection needs an integer-spanned plane".into())
        })?;
        if v.len() != self.lattice.rank() {
            return Err(Error::DimensionMismatch { expected: self.lattice.rank(), got: v.len() });
        }
        let vp = pi.mul_vec(v);
        let vperp = v.iter().zip(&vp).map(|(a, b)| a - b).collect();
        Ok((vp, vperp))
    }

    pub fn reflect_e_prime_exact(&self, e: &LatticeVector) -> Result<Vec<Rational>> {
        let qe = q_value(&self.lattice, e)?;
        if qe != 0 {
            return Err(Error::NotIsotropic(qe));
        }
        let (vp, vperp) = self.project_exact(&e.to_rational())?;
        Ok(vp.iter().zip(&vperp).map(|(a, b)| a - b).collect())
    }
}

fn real_projector(q: &DMatrix<f64>, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    if basis.ncols() == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let bt_q = basis.transpose() * q;
    let inner = &bt_q * basis;
    let inner = (&inner + inner.transpose()) * 0.5;
    let chol = inner.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(basis * chol.solve(&bt_q))
}

fn parse_plane_vectors(rank: usize, spec: &str) -> Result<Vec<Vec<i64>>> {
    let bad = || Error::PlaneSpec(spec.to_string());
    let mut out = Vec::new();
    for part in spec.split(',') {
        let compact: String = part.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut v = vec![0i64; rank];
        // split into signed terms like "+2e3", "-e1"
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, c) in compact.char_indices() {
            if (c == '+' || c == '-') && i > start {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, term.strip_prefix('+').unwrap_or(term)),
            };
            let (coef, idx) = body.split_once('e').ok_or_else(bad)?;
            let coef: i64 = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
            let idx: usize = idx.parse().map_err(|_| bad())?;
            if idx == 0 || idx > rank {
                return Err(bad());
            }
            v[idx - 1] += sign * coef;
        }
        out.push(v);
    }
    Ok(out)
}

/// The boost `A_λ`: `A e = λ⁻¹e`, `A e' = λe'`, identity on `(e ⊕ e')^⊥`.
/// Parameterizing by `λ = exp(t)` keeps rational `λ` exact in [`boost_matrix_exact`].
pub fn boost_matrix(plane: &PositivePlane, e: &LatticeVector, lambda: &Rational) -> Result<DMatrix<f64>> {
    boost_matrix_f64(plane, e, crate::rational::to_f64(lambda))
}

/// `a_t` itself, i.e. `λ = exp(t)`.
pub fn boost_matrix_t(plane: &PositivePlane, e: &LatticeVector, t: f64) -> Result<DMatrix<f64>> {
    boost_matrix_f64(plane, e, t.exp())
}

pub fn boost_matrix_f64(plane: &PositivePlane, e: &LatticeVector, lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let e_prime = plane.reflect_e_prime(e)?;
    let e = e.to_f64();
    let c = plane.pairing(&e, &e_prime);
    if c.abs() < 1e-12 {
        return Err(Error::DegeneratePairing);
    }
    let n = e.len();
    let q = &plane.q;
    let qe = q * &e;
    let qe_prime = q * &e_prime;
    let a = (1.0 / lambda - 1.0) / c;
    let b = (lambda - 1.0) / c;
    Ok(DMatrix::identity(n, n) + &e * qe_prime.transpose() * a + &e_prime * qe.transpose() * b)
}

/// Exact boost over the rationals for integer-spanned planes.
pub fn boost_matrix_exact(plane: &PositivePlane, e: &LatticeVector, lambda: &Rational) -> Result<RatMatrix> {
    if !lambda.is_positive() {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    let lattice = plane.lattice();
    let e_prime = plane.reflect_e_prime_exact(e)?;
    let e = e.to_rational();
    let c = lattice.pairing_rational(&e, &e_prime);
    if c.is_zero() {
        return Err(Error::DegeneratePairing);
    }
    let q = lattice.gram_rational();
    let qe = q.mul_vec(&e);
    let qe_prime = q.mul_vec(&e_prime);
    let a = (lambda.recip() - Rational::one()) / &c;
    let b = (lambda - Rational::one()) / &c;
    let n = e.len();
    let mut m = RatMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let t = &a * &e[i] * &qe_prime[j] + &b * &e_prime[i] * &qe[j];
            m[(i, j)] += t;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn u() -> GramLattice {
        GramLattice::hyperbolic()
    }

    #[test]
    fn q_value_examples() {
        assert_eq!(q_value(&u(), &LatticeVector::new(vec![1, 1])).unwrap(), 2);
        assert_eq!(q_value(&u(), &LatticeVector::new(vec![1, 0])).unwrap(), 0);
        let k3 = GramLattice::k3();
        // coordinate 6 is the first basis vector of the first E8(-1) block
        assert_eq!(q_value(&k3, &LatticeVector::unit(22, 6)).unwrap(), -2);
        assert_eq!(k3.gram()[6][6], -2);
        assert!(matches!(
            q_value(&u(), &LatticeVector::new(vec![1, 0, 0])),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn signatures() {
        assert_eq!(signature(&u()), (1, 1));
        assert_eq!(signature(&GramLattice::k3()), (3, 19));
        assert_eq!(signature(&GramLattice::e8_negative()), (0, 8));
        // all-zero diagonal exercises the congruence repair
        let l = GramLattice::parse("3U").unwrap();
        assert_eq!(l.signature(), (3, 3));
        assert_eq!(
            GramLattice::from_gram(vec![vec![1, 1], vec![1, 1]]),
            Err(Error::DegenerateForm)
        );
        assert_eq!(GramLattice::from_gram(vec![vec![0, 1], vec![2, 0]]), Err(Error::NotSymmetric));
    }

    #[test]
    fn signature_agrees_with_eigenvalues() {
        for spec in ["U", "2U", "U+E8m", "3U+2E8m", "E8m+E8m"] {
            let l = GramLattice::parse(spec).unwrap();
            let eig = SymmetricEigen::new(l.gram_f64()).eigenvalues;
            let pos = eig.iter().filter(|&&x| x > 0.0).count();
            let neg = eig.iter().filter(|&&x| x < 0.0).count();
            assert_eq!(l.signature(), (pos, neg), "{spec}");
        }
    }

    #[test]
    fn e8_is_even_unimodular() {
        let e8 = GramLattice::e8_negative();
        assert!(e8.is_even());
        assert_eq!(e8.determinant(), int(1));
        let k3 = GramLattice::k3();
        assert!(k3.is_even());
        assert_eq!(k3.rank(), 22);
        assert_eq!(k3.determinant().abs(), int(1));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(GramLattice::parse("3X").is_err());
        assert!(GramLattice::parse("").is_err());
        assert!(GramLattice::parse("0U").is_err());
        assert_eq!(GramLattice::parse("2U").unwrap().rank(), 4);
        assert_eq!(u().gram_json(), "[[0,1],[1,0]]");
    }

    #[test]
    fn primitivity() {
        assert!(LatticeVector::new(vec![2, 3]).is_primitive());
        assert!(!LatticeVector::new(vec![2, 4]).is_primitive());
        assert!(!LatticeVector::new(vec![0, 0]).is_primitive());
        assert!(LatticeVector::new(vec![0, -1]).is_primitive());
    }

    #[test]
    fn projection_in_u() {
        let plane = PositivePlane::parse(&u(), "e1+e2").unwrap();
        let (vp, vperp) = plane.project(&DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!((vp - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-12);
        assert!((vperp - DVector::from_vec(vec![0.5, -0.5])).amax() < 1e-12);
        let (zp, zperp) = plane.project(&DVector::zeros(2)).unwrap();
        assert_eq!(zp.amax(), 0.0);
        assert_eq!(zperp.amax(), 0.0);
        let (bp, bperp) = plane.project(&DVector::from_vec(vec![3.0, 3.0])).unwrap();
        assert!((bp - DVector::from_vec(vec![3.0, 3.0])).amax() < 1e-12);
        assert!(bperp.amax() < 1e-12);

        let (ep, eperp) = plane.project_exact(&[int(1), int(0)]).unwrap();
        assert_eq!(ep, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(eperp, vec![rat(1, 2), rat(-1, 2)]);
    }

    #[test]
    fn e_prime_in_u() {
        let plane = PositivePlane::parse(&u(), "e1+e2").unwrap();
        let e = LatticeVector::new(vec![1, 0]);
        let ep = plane.reflect_e_prime(&e).unwrap();
        assert!((ep - DVector::from_vec(vec![0.0, 1.0])).amax() < 1e-12);
        assert_eq!(plane.reflect_e_prime_exact(&e).unwrap(), vec![int(0), int(1)]);
        assert!(matches!(
            plane.reflect_e_prime(&LatticeVector::new(vec![1, 1])),
            Err(Error::NotIsotropic(2))
        ));
        // the zero vector is the only isotropic vector fixed by the reflection
        let zero = LatticeVector::new(vec![0, 0]);
        assert_eq!(plane.reflect_e_prime(&zero).unwrap().amax(), 0.0);
    }

    #[test]
    fn e_prime_random_plane_2u() {
        let l = GramLattice::parse("2U").unwrap();
        let plane = PositivePlane::random(&l, 7).unwrap();
        let e = LatticeVector::new(vec![1, 0, 0, 0]);
        let ep = plane.reflect_e_prime(&e).unwrap();
        assert!(plane.pairing(&ep, &ep).abs() < 1e-9);
        assert!(plane.pairing(&e.to_f64(), &ep) > 0.0);
        let back = plane.reflect(&ep).unwrap();
        assert!((back - e.to_f64()).amax() < 1e-10);
    }

    #[test]
    fn boost_in_u() {
        let plane = PositivePlane::parse(&u(), "e1+e2").unwrap();
        let e = LatticeVector::new(vec![1, 0]);
        let a = boost_matrix_exact(&plane, &e, &int(2)).unwrap();
        let mut expected = RatMatrix::zeros(2, 2);
        expected[(0, 0)] = rat(1, 2);
        expected[(1, 1)] = int(2);
        assert_eq!(a, expected);
        assert_eq!(boost_matrix_exact(&plane, &e, &int(1)).unwrap(), RatMatrix::identity(2));
        let af = boost_matrix(&plane, &e, &int(2)).unwrap();
        assert!((af - expected.to_f64()).amax() < 1e-12);
        assert!(boost_matrix_exact(&plane, &e, &int(0)).is_err());
        let at = boost_matrix_t(&plane, &e, 2f64.ln()).unwrap();
        assert!((at - expected.to_f64()).amax() < 1e-12);
    }

    #[test]
    fn boost_random_plane_2u() {
        let l = GramLattice::parse("2U").unwrap();
        let plane = PositivePlane::random(&l, 11).unwrap();
        let e = LatticeVector::new(vec![0, 0, 1, 0]);
        let a3 = boost_matrix(&plane, &e, &int(3)).unwrap();
        let a13 = boost_matrix(&plane, &e, &rat(1, 3)).unwrap();
        let q = l.gram_f64();
        assert!((a3.transpose() * &q * &a3 - &q).amax() < 1e-10);
        assert!((&a3 * &a13 - DMatrix::identity(4, 4)).amax() < 1e-10);
    }

    #[test]
    fn random_plane_k3() {
        let k3 = GramLattice::k3();
        let plane = PositivePlane::random(&k3, 3).unwrap();
        assert_eq!(plane.dim(), 3);
        let pi = plane.projector();
        assert!((pi * pi - pi).amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_planes() {
        let l = GramLattice::parse("2U").unwrap();
        assert!(matches!(PositivePlane::parse(&l, "e1"), Err(Error::NotPositiveDefinite)));
        assert!(matches!(PositivePlane::parse(&l, "e1-e2"), Err(Error::NotPositiveDefinite)));
        assert!(matches!(PositivePlane::parse(&l, "e1+e2,2e1+2e2"), Err(Error::NotPositiveDefinite)));
        assert!(matches!(PositivePlane::parse(&l, "e5"), Err(Error::PlaneSpec(_))));
        assert!(matches!(PositivePlane::parse(&l, "x1"), Err(Error::PlaneSpec(_))));
        let p = PositivePlane::parse(&l, "e1+e2, e3+2e4").unwrap();
        assert_eq!(p.dim(), 2);
    }
}
