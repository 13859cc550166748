//! Exact exponent bookkeeping for the equidistribution rate.
//!
//! Error terms are tracked as monomials `ε^a · e^{−b t} · e^{g t}` (optionally
//! tagged with the Sobolev index of the norm they carry). Choosing
//! `ε = e^{−s t}` turns each into a pure exponential; [`balance`] finds the
//! `s` at which two terms decay at the same rate. [`delta_chain`] composes
//! the whole chain from group dimensions to the final exponent `δ`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie::{dimensions, rho_h, GroupDimensions, GroupSpec, IntegrabilityTable};
use crate::rational::{int, rat, Rational};
use crate::symbolic::{ExponentScalar, RatFn};

/// Symbol name used for the wavefront parameter `0 < p' < 1`.
pub const P_PRIME: &str = "p'";

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticMonomial<F = Rational> {
    /// Exponent of the thickening parameter `ε`.
    pub eps_exp: F,
    /// `b` in `e^{−bt}`.
    pub decay_exp: F,
    /// `l` in `‖w‖_l`, when the term carries a Sobolev norm.
    pub sobolev_index: Option<F>,
    /// Exponent of `e^{t}` coming from volume/count growth.
    pub growth_exp: F,
}

impl<F: ExponentScalar> AsymptoticMonomial<F> {
    pub fn new(eps_exp: F, decay_exp: F, growth_exp: F) -> Self {
        Self { eps_exp, decay_exp, sobolev_index: None, growth_exp }
    }

    pub fn one() -> Self {
        Self::new(F::from_int(0), F::from_int(0), F::from_int(0))
    }

    pub fn with_sobolev(mut self, l: F) -> Self {
        self.sobolev_index = Some(l);
        self
    }

    /// Exponents add; a product of Sobolev norms is controlled by the larger
    /// index (kept as the first one when the order is undetermined).
    pub fn mul(&self, other: &Self) -> Self {
        let sobolev_index = match (&self.sobolev_index, &other.sobolev_index) {
            (None, x) | (x, None) => x.clone(),
            (Some(a), Some(b)) => match (a.clone() - b.clone()).sign() {
                Some(Ordering::Less) => Some(b.clone()),
                _ => Some(a.clone()),
            },
        };
        Self {
            eps_exp: self.eps_exp.clone() + other.eps_exp.clone(),
            decay_exp: self.decay_exp.clone() + other.decay_exp.clone(),
            sobolev_index,
            growth_exp: self.growth_exp.clone() + other.growth_exp.clone(),
        }
    }

    /// Exponential rate `r` with the term equal to `e^{r t}` once `ε = e^{−s t}`.
    pub fn rate(&self, s: &F) -> F {
        self.growth_exp.clone() - self.decay_exp.clone() - self.eps_exp.clone() * s.clone()
    }
}

/// Substitution rate `s` making both terms decay equally fast under `ε = e^{−s t}`.
pub fn balance<F: ExponentScalar>(a: &AsymptoticMonomial<F>, b: &AsymptoticMonomial<F>) -> Result<F> {
    let de = a.eps_exp.clone() - b.eps_exp.clone();
    if de.is_zero_value() {
        return Err(Error::ParallelExponents);
    }
    let lhs = (a.growth_exp.clone() - a.decay_exp.clone()) - (b.growth_exp.clone() - b.decay_exp.clone());
    let s = lhs / de;
    if s.sign() == Some(Ordering::Less) {
        return Err(Error::NegativeRate(s.to_string()));
    }
    Ok(s)
}

/// Which term dominates after `ε = e^{−s t}`: `Greater` means `a` decays slower.
pub fn compare_after(a: &AsymptoticMonomial, b: &AsymptoticMonomial, s: &Rational) -> Ordering {
    a.rate(s).cmp(&b.rate(s))
}

/// The two error terms of the equidistribution step: the wavefront term
/// `ε^{p_cusp·p'}` and the mixing term `ε^{−C_l} e^{−δ₀' t}`.
pub fn equidistribution_error_terms<F: ExponentScalar>(
    p_prime: &F,
    p_cusp: &F,
    c_l: &F,
    delta0_prime: &F,
) -> (AsymptoticMonomial<F>, AsymptoticMonomial<F>) {
    let zero = F::from_int(0);
    let wavefront = AsymptoticMonomial::new(p_cusp.clone() * p_prime.clone(), zero.clone(), zero.clone());
    let mixing = AsymptoticMonomial::new(-c_l.clone(), delta0_prime.clone(), zero);
    (wavefront, mixing)
}

/// The two error terms of the counting step, in the variable `T`:
/// `ε·e^{gT}` and `ε^{−d}·e^{(g−δ₀)T}` where `g` is the growth exponent.
pub fn counting_error_terms<F: ExponentScalar>(
    delta0: &F,
    d: &F,
    growth: &F,
) -> (AsymptoticMonomial<F>, AsymptoticMonomial<F>) {
    let zero = F::from_int(0);
    let smoothing = AsymptoticMonomial::new(F::from_int(1), zero.clone(), growth.clone());
    let equidist = AsymptoticMonomial::new(-d.clone(), delta0.clone(), growth.clone());
    (smoothing, equidist)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConstants {
    /// Exponent in `μ_Y(Y∖Y_ε) = O(ε^p)`.
    #[serde(with = "crate::rational::fraction_str")]
    pub p_cusp: Rational,
    /// Value `p'` is sent to (a supremum: `p' < 1`).
    #[serde(with = "crate::rational::fraction_str")]
    pub p_prime_limit: Rational,
    /// `dim G − dim K`.
    #[serde(with = "crate::rational::fraction_str")]
    pub c1: Rational,
    /// `dim K`.
    pub d: u64,
    pub spec: GroupSpec,
    pub dims: GroupDimensions,
}

impl PipelineConstants {
    pub fn new(spec: GroupSpec) -> Self {
        let dims = dimensions(spec);
        Self {
            p_cusp: int(1),
            p_prime_limit: int(1),
            c1: int(dims.dim_g as i64 - dims.dim_k as i64),
            d: dims.dim_k,
            spec,
            dims,
        }
    }

    pub fn with_p_cusp(mut self, p_cusp: Rational) -> Result<Self> {
        if !p_cusp.is_positive() || p_cusp > int(1) {
            return Err(Error::InvalidArgument(format!("p_cusp must lie in (0,1], got {p_cusp}")));
        }
        self.p_cusp = p_cusp;
        Ok(self)
    }

    fn dim_x(&self) -> Rational {
        int(self.dims.dim_x as i64)
    }

    fn dim_y(&self) -> Rational {
        int(self.dims.dim_y as i64)
    }
}

/// `d_l = l + (dim G − dim K)/2`.
pub fn d_l<F: ExponentScalar>(l: &F, consts: &PipelineConstants) -> F {
    l.clone() + F::from_rational(&(&consts.c1 / int(2)))
}

/// `C_l = 2l + 4·dim Y + dim X/2`.
pub fn c_l<F: ExponentScalar>(l: &F, consts: &PipelineConstants) -> F {
    let offset = int(4) * consts.dim_y() + consts.dim_x() / int(2);
    F::from_int(2) * l.clone() + F::from_rational(&offset)
}

/// Whether `l > dim X / 2`, the range where `C_l` is established.
pub fn c_l_threshold_met(l: &Rational, consts: &PipelineConstants) -> bool {
    *l > consts.dim_x() / int(2)
}

/// `ε`-exponents of the Sobolev norms of the thickening bump functions, plus
/// the cardinality exponents of the point sets used to build `τ_ε`.
pub fn thickening_norm_exponents(l: &Rational, consts: &PipelineConstants) -> BTreeMap<&'static str, Rational> {
    let x = consts.dim_x();
    let y = consts.dim_y();
    let half = rat(1, 2);
    BTreeMap::from([
        ("rho", -l - (&x - &y) * &half),
        ("beta", -l + &y * &half),
        ("tau", -l - int(9) * &y * &half),
        ("phi", -c_l(l, consts)),
        ("G_ball", -int(2) * &y),
        ("F_total", -int(3) * &y),
    ])
}

/// Supremum of admissible mixing rates `ρ(H)/k` with `k = ⌈p(π)/2⌉`.
pub fn mixing_rate_sup(rho_h: &Rational, p_pi: u32) -> Result<Rational> {
    if p_pi < 2 {
        return Err(Error::InvalidArgument(format!("p(pi) must be >= 2, got {p_pi}")));
    }
    let k = p_pi.div_ceil(2);
    Ok(rho_h / int(k as i64))
}

/// `(l₀', l₀)` with `l₀' = ⌊dim K/2⌋ + 1` and `l₀ = max(l₀', ⌊dim X/2⌋ + 2)`.
pub fn sobolev_thresholds(consts: &PipelineConstants) -> (u64, u64) {
    let l0_prime = consts.dims.dim_k / 2 + 1;
    let l0 = l0_prime.max(consts.dims.dim_x / 2 + 2);
    (l0_prime, l0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpenIntervalFlags {
    pub delta0_prime: bool,
    pub p_prime: bool,
    pub delta0: bool,
    pub delta: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaReport {
    pub spec: GroupSpec,
    pub dims: GroupDimensions,
    pub p_pi: u32,
    #[serde(with = "crate::rational::fraction_str")]
    pub rho_h: Rational,
    pub l0_prime: u64,
    pub l0: u64,
    #[serde(with = "crate::rational::fraction_str")]
    pub delta0_prime_sup: Rational,
    #[serde(rename = "C_l0", with = "crate::rational::fraction_str")]
    pub c_l0: Rational,
    pub c_l0_threshold_met: bool,
    /// `δ₀` as a function of `p'` before the limit, rendered.
    pub delta0_of_p_prime: String,
    #[serde(with = "crate::rational::fraction_str")]
    pub delta0_sup: Rational,
    #[serde(with = "crate::rational::fraction_str")]
    pub d_l0: Rational,
    /// `δ₀ / d_{l₀}`, the value obtained by the final arithmetic of the chain.
    #[serde(with = "crate::rational::fraction_str")]
    pub delta_section5: Rational,
    /// `δ₀ / (d_{l₀} + 1)`, the value given by balancing the counting terms.
    #[serde(with = "crate::rational::fraction_str")]
    pub delta_eq22: Rational,
    pub open_interval_flags: OpenIntervalFlags,
}

/// Runs the chain with `p(π)` looked up in `table`.
pub fn delta_chain(spec: GroupSpec, table: &IntegrabilityTable) -> Result<DeltaReport> {
    let p_pi = table.get(spec).ok_or(Error::NotTabulated { p: spec.p, q: spec.q })?;
    delta_chain_with(&PipelineConstants::new(spec), p_pi)
}

pub fn delta_chain_with(consts: &PipelineConstants, p_pi: u32) -> Result<DeltaReport> {
    let rho = rho_h(consts.spec);
    let delta0_prime = mixing_rate_sup(&rho, p_pi)?;
    let (l0_prime, l0) = sobolev_thresholds(consts);
    let l0_r = int(l0 as i64);
    let c = c_l(&l0_r, consts);

    // p' stays symbolic through the balancing and is only then sent to its limit
    let p_prime = RatFn::var(P_PRIME);
    let (wavefront, mixing) = equidistribution_error_terms(
        &p_prime,
        &RatFn::constant(consts.p_cusp.clone()),
        &RatFn::constant(c.clone()),
        &RatFn::constant(delta0_prime.clone()),
    );
    let s = balance(&wavefront, &mixing)?;
    let delta0_sym = -wavefront.rate(&s);
    let delta0 = delta0_sym
        .substitute(P_PRIME, &consts.p_prime_limit)
        .and_then(|f| f.as_constant())
        .ok_or_else(|| Error::InvalidArgument("delta0 does not reduce to a constant".into()))?;

    let d = d_l(&l0_r, consts);
    let (smoothing, equidist) = counting_error_terms(&delta0, &d, &int(consts.spec.n() as i64 - 2));
    let delta_eq22 = balance(&smoothing, &equidist)?;
    let delta_section5 = &delta0 / &d;

    Ok(DeltaReport {
        spec: consts.spec,
        dims: consts.dims,
        p_pi,
        rho_h: rho,
        l0_prime,
        l0,
        delta0_prime_sup: delta0_prime,
        c_l0_threshold_met: c_l_threshold_met(&l0_r, consts),
        c_l0: c,
        delta0_of_p_prime: delta0_sym.to_string(),
        delta0_sup: delta0,
        d_l0: d,
        delta_section5,
        delta_eq22,
        open_interval_flags: OpenIntervalFlags { delta0_prime: true, p_prime: true, delta0: true, delta: true },
    })
}

/// Decimal approximation for display; exact values stay in the report.
pub fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl DeltaReport {
    /// Exponent of the error term in the count, `(rank − 2) − δ`.
    pub fn error_exponent(&self, growth: u64) -> Rational {
        int(growth as i64) - &self.delta_section5
    }

    pub fn is_positive(&self) -> bool {
        [&self.delta0_prime_sup, &self.c_l0, &self.delta0_sup, &self.d_l0, &self.delta_section5, &self.delta_eq22]
            .iter()
            .all(|x| x.is_positive())
    }
}
