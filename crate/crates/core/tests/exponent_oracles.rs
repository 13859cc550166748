use proptest::prelude::*;
use slag_core::exponents::*;
use slag_core::lie::{dimensions, GroupSpec, IntegrabilityTable};
use slag_core::rational::{int, rat, Rational};
use slag_core::symbolic::RatFn;

/// Minimal fraction type so the chain can be recomputed without the crate's
/// rational backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Frac(i128, i128);

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Frac {
    fn new(n: i128, d: i128) -> Self {
        let g = gcd(n, d) * d.signum();
        Frac(n / g, d / g)
    }
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
    fn as_rational(self) -> Rational {
        rat(self.0 as i64, self.1 as i64)
    }
}

/// The chain written out directly from the definitions.
fn hand_chain(p: i128, q: i128, p_pi: i128) -> (Frac, Frac, Frac, Frac) {
    let n = p + q;
    let dim_g = n * (n - 1) / 2;
    let dim_k = p * (p - 1) / 2 + q * (q - 1) / 2;
    let dim_y = dim_g - (n - 1);
    let l0 = (dim_k / 2 + 1).max(dim_g / 2 + 2);
    let rho = Frac::new(n - 2, 2);
    let delta0_prime = rho.div(Frac::new((p_pi + 1) / 2, 1));
    let c = Frac::new(2 * l0 + 4 * dim_y, 1).add(Frac::new(dim_g, 2));
    let delta0 = delta0_prime.div(Frac::new(1, 1).add(c));
    let d = Frac::new(l0, 1).add(Frac::new(dim_g - dim_k, 2));
    (delta0, d, delta0.div(d), delta0.div(d.add(Frac::new(1, 1))))
}

#[test]
fn k3_values_from_the_text() {
    let spec = GroupSpec::new(3, 19).unwrap();
    let r = delta_chain(spec, &IntegrabilityTable::default()).unwrap();
    let d = dimensions(spec);
    assert_eq!((d.dim_g, d.dim_k, d.dim_y), (231, 174, 210));
    assert_eq!(r.l0, 117);
    assert_eq!(r.rho_h, int(10));
    assert_eq!(r.p_pi, 20);
    assert_eq!(r.delta0_sup, rat(2, 2381));
    assert_eq!(r.delta_section5, rat(4, 692871));
    // d_{l0} = l0 + 57/2
    assert_eq!(r.d_l0, int(117) + rat(57, 2));
    assert_eq!(r.error_exponent(20), rat(13857416, 692871));
}

#[test]
fn k3_matches_hand_computation() {
    let r = delta_chain(GroupSpec::new(3, 19).unwrap(), &IntegrabilityTable::default()).unwrap();
    let (delta0, d, delta, delta_eq22) = hand_chain(3, 19, 20);
    assert_eq!(r.delta0_sup, delta0.as_rational());
    assert_eq!(r.d_l0, d.as_rational());
    assert_eq!(r.delta_section5, delta.as_rational());
    assert_eq!(r.delta_eq22, delta_eq22.as_rational());
    assert_eq!(delta_eq22, Frac(4, 697633));
}

#[test]
fn counting_pair_balances_to_delta0_over_d_plus_one() {
    let (delta0, d, g) = (RatFn::var("delta0"), RatFn::var("d"), RatFn::var("g"));
    let (a, b) = counting_error_terms(&delta0, &d, &g);
    let s = balance(&a, &b).unwrap();
    assert_eq!(s, delta0 / (d + RatFn::constant(int(1))));
}

#[test]
fn equidistribution_pair_balances_symbolically() {
    let (pp, c, d0) = (RatFn::var(P_PRIME), RatFn::var("C"), RatFn::var("delta0'"));
    let one = RatFn::constant(int(1));
    let (a, b) = equidistribution_error_terms(&pp, &one, &c, &d0);
    let s = balance(&a, &b).unwrap();
    assert_eq!(s, d0.clone() / (pp.clone() + c.clone()));
    let decay = -a.rate(&s);
    assert_eq!(decay, pp.clone() * d0.clone() / (pp + c.clone()));
    let limit = decay.substitute(P_PRIME, &int(1)).unwrap();
    assert_eq!(limit, d0 / (one + c));
}

#[test]
fn chain_errors() {
    let spec = GroupSpec::new(2, 2).unwrap();
    assert!(matches!(
        delta_chain(spec, &IntegrabilityTable::default()),
        Err(slag_core::Error::NotTabulated { p: 2, q: 2 })
    ));
    assert!(PipelineConstants::new(spec).with_p_cusp(int(0)).is_err());
    assert!(PipelineConstants::new(spec).with_p_cusp(int(2)).is_err());
}

fn small_spec() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=8).prop_flat_map(|p| (Just(p), p..=20))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn chain_matches_hand_computation((p, q) in small_spec(), p_pi in 2u32..40) {
        let spec = GroupSpec::new(p, q).unwrap();
        let r = delta_chain_with(&PipelineConstants::new(spec), p_pi).unwrap();
        let (delta0, d, delta, delta_eq22) = hand_chain(p as i128, q as i128, p_pi as i128);
        prop_assert_eq!(r.delta0_sup, delta0.as_rational());
        prop_assert_eq!(r.d_l0, d.as_rational());
        prop_assert_eq!(&r.delta_section5, &delta.as_rational());
        prop_assert_eq!(r.delta_eq22.clone(), delta_eq22.as_rational());
        // rank-one groups with n = 2 have ρ = 0 and both variants vanish
        if p + q > 2 {
            prop_assert!(r.delta_eq22 < r.delta_section5);
        } else {
            prop_assert_eq!(&r.delta_eq22, &r.delta_section5);
        }
    }

    #[test]
    fn balance_is_scale_covariant(
        a in (-20i64..20, 0i64..20, 0i64..20),
        b in (-20i64..20, 0i64..20, 0i64..20),
        k in 1i64..9,
    ) {
        prop_assume!(a.0 != b.0);
        let m = |x: (i64, i64, i64)| AsymptoticMonomial::new(int(x.0), int(x.1), int(x.2));
        let Ok(s) = balance(&m(a), &m(b)) else { return Ok(()) };
        // stretching time multiplies every rate by k
        let stretch = |x: (i64, i64, i64)| AsymptoticMonomial::new(int(x.0), int(k * x.1), int(k * x.2));
        prop_assert_eq!(balance(&stretch(a), &stretch(b)).unwrap(), &s * int(k));
        // replacing ε by ε^k divides the substitution rate by k
        let power = |x: (i64, i64, i64)| AsymptoticMonomial::new(int(k * x.0), int(x.1), int(x.2));
        prop_assert_eq!(balance(&power(a), &power(b)).unwrap(), &s / int(k));
        prop_assert_eq!(m(a).rate(&s), m(b).rate(&s));
    }

    #[test]
    fn delta_decreases_with_d(d1 in 1i64..500, extra in 1i64..500) {
        let delta0 = rat(2, 2381);
        let growth = int(20);
        let at = |d: i64| {
            let (a, b) = counting_error_terms(&delta0, &int(d), &growth);
            balance(&a, &b).unwrap()
        };
        prop_assert!(at(d1 + extra) < at(d1));
    }

    #[test]
    fn delta_increases_with_p_cusp(num in 1i64..50, den in 50i64..100) {
        let spec = GroupSpec::new(3, 19).unwrap();
        let lower = PipelineConstants::new(spec).with_p_cusp(rat(num, den)).unwrap();
        let r_lower = delta_chain_with(&lower, 20).unwrap();
        let r_full = delta_chain_with(&PipelineConstants::new(spec), 20).unwrap();
        prop_assert!(r_lower.delta_section5 < r_full.delta_section5);
        prop_assert!(r_lower.is_positive());
    }
}
