//! Dimension and restricted-root data for `O(p,q)`.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupSpec {
    pub p: u32,
    pub q: u32,
}

impl GroupSpec {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 || p > q {
            return Err(Error::InvalidArgument(format!("need 1 <= p <= q, got ({p},{q})")));
        }
        Ok(Self { p, q })
    }

    pub fn real_rank(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.p + self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GroupDimensions {
    pub dim_g: u64,
    pub dim_k: u64,
    pub dim_he: u64,
    pub dim_x: u64,
    pub dim_y: u64,
}

/// `dim G = n(n−1)/2`, `dim K = p(p−1)/2 + q(q−1)/2`, and the stabilizer of an
/// isotropic vector has codimension `n − 1`. Quotients by discrete groups keep
/// dimension, so `dim X = dim G` and `dim Y = dim H_e`.
pub fn dimensions(spec: GroupSpec) -> GroupDimensions {
    let (p, q) = (spec.p as u64, spec.q as u64);
    let n = p + q;
    let dim_g = n * (n - 1) / 2;
    let dim_k = p * (p - 1) / 2 + q * (q - 1) / 2;
    let dim_he = dim_g - (n - 1);
    GroupDimensions { dim_g, dim_k, dim_he, dim_x: dim_g, dim_y: dim_he }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedRoot {
    /// Coefficients over the standard basis `e_1, …, e_p` of the torus dual.
    pub coefficients: Vec<i64>,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedRootDatum {
    pub spec: GroupSpec,
    /// `"B"` when `q > p`, `"D"` when `q = p`.
    pub root_type: String,
    pub positive_roots: Vec<RestrictedRoot>,
    #[serde(with = "crate::rational::fraction_vec")]
    pub rho: Vec<Rational>,
}

impl RestrictedRootDatum {
    /// Positive roots counted with multiplicity.
    pub fn total_multiplicity(&self) -> u64 {
        self.positive_roots.iter().map(|r| r.multiplicity as u64).sum()
    }

    /// `ρ` evaluated on a torus element given in the standard basis.
    pub fn rho_at(&self, h: &[Rational]) -> Rational {
        self.rho.iter().zip(h).map(|(r, x)| r * x).sum()
    }

    pub fn rho_f64(&self) -> Vec<f64> {
        self.rho.iter().map(crate::rational::to_f64).collect()
    }
}

/// Positive restricted roots of `so(p,q)`: `e_i ± e_j` (i < j) with
/// multiplicity 1 and, when `q > p`, `e_i` with multiplicity `q − p`.
pub fn root_datum(spec: GroupSpec) -> RestrictedRootDatum {
    let p = spec.p as usize;
    let mut roots = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            let mut minus = vec![0; p];
            minus[i] = 1;
            minus[j] = -1;
            roots.push(RestrictedRoot { coefficients: minus, multiplicity: 1 });
            let mut plus = vec![0; p];
            plus[i] = 1;
            plus[j] = 1;
            roots.push(RestrictedRoot { coefficients: plus, multiplicity: 1 });
        }
    }
    if spec.q > spec.p {
        for i in 0..p {
            let mut short = vec![0; p];
            short[i] = 1;
            roots.push(RestrictedRoot { coefficients: short, multiplicity: spec.q - spec.p });
        }
    }
    let mut rho = vec![Rational::zero(); p];
    for root in &roots {
        for (r, &c) in rho.iter_mut().zip(&root.coefficients) {
            *r += int(c * root.multiplicity as i64);
        }
    }
    for r in &mut rho {
        *r /= int(2);
    }
    let root_type = if spec.q > spec.p { "B" } else { "D" }.to_string();
    RestrictedRootDatum { spec, root_type, positive_roots: roots, rho }
}

/// `ρ(H)` for `H` the first torus coordinate, the generator of the boost `a_t`.
pub fn rho_h(spec: GroupSpec) -> Rational {
    let datum = root_datum(spec);
    let mut h = vec![Rational::zero(); spec.p as usize];
    h[0] = int(1);
    datum.rho_at(&h)
}

/// Table of integrability exponents `p(π)` keyed by `(p, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrabilityTable {
    entries: BTreeMap<(u32, u32), u32>,
}

impl Default for IntegrabilityTable {
    /// Ships the single entry `(3,19) → 20`.
    fn default() -> Self {
        Self { entries: BTreeMap::from([((3, 19), 20)]) }
    }
}

impl IntegrabilityTable {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn insert(&mut self, spec: GroupSpec, value: u32) {
        self.entries.insert((spec.p, spec.q), value);
    }

    pub fn get(&self, spec: GroupSpec) -> Option<u32> {
        self.entries.get(&(spec.p, spec.q)).copied()
    }

    /// Adds `[p, q, value]` triples from a JSON array on top of the current table.
    pub fn extend_from_json(&mut self, text: &str) -> Result<()> {
        let triples: Vec<[u32; 3]> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("p(pi) table: {e}")))?;
        for [p, q, value] in triples {
            let spec = GroupSpec::new(p, q)?;
            if value < 2 {
                return Err(Error::InvalidArgument(format!("p(pi) must be >= 2, got {value}")));
            }
            self.insert(spec, value);
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let mut table = Self::default();
        table.extend_from_json(&text)?;
        Ok(table)
    }
}

pub fn integrability_constant(spec: GroupSpec) -> Option<u32> {
    IntegrabilityTable::default().get(spec)
}

/// Closed form `(p+q−2)/2`, used only to cross-check [`rho_h`].
pub fn rho_h_closed_form(spec: GroupSpec) -> Rational {
    rat(spec.n() as i64 - 2, 2)
}
