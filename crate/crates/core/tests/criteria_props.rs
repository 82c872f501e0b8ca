use proptest::prelude::*;
use standbyrel_core::criteria::{
    analytic_verdicts, CriterionResult, Rule, SharedRepairPair, Verdict,
};
use standbyrel_core::order::{self, check_order, OrderVerdict, TOL_CLOSED_FORM};
use standbyrel_core::{ColdConfig, InitialState, MarkovSystem, OrderRelation, WarmConfig};

fn rate() -> impl Strategy<Value = f64> {
    (0.05f64.ln()..20f64.ln()).prop_map(f64::exp)
}

fn state() -> impl Strategy<Value = InitialState> {
    prop_oneof![
        Just(InitialState::FreshPair),
        Just(InitialState::DegradedStart)
    ]
}

fn warm(l1: f64, l2: f64, mu: f64, state: InitialState) -> MarkovSystem {
    MarkovSystem::warm(WarmConfig::new(l1, l2, mu).unwrap(), state)
}

fn cold(l: f64, mu: f64, state: InitialState) -> MarkovSystem {
    MarkovSystem::cold(ColdConfig::new(l, mu).unwrap(), state)
}

/// Pairs drawn so that every rule family gets exercised: unrelated warm or
/// cold pairs, pairs sharing failure rates, and pairs sharing a repair rate.
fn pair() -> impl Strategy<Value = (MarkovSystem, MarkovSystem)> {
    prop_oneof![
        (rate(), rate(), rate(), rate(), rate(), rate(), state())
            .prop_map(|(a, b, c, d, e, f, s)| (warm(a, b, c, s), warm(d, e, f, s))),
        (rate(), rate(), rate(), rate(), state())
            .prop_map(|(a, b, c, d, s)| (cold(a, b, s), cold(c, d, s))),
        (rate(), rate(), rate(), rate(), state())
            .prop_map(|(l1, l2, m1, m2, s)| (warm(l1, l2, m1, s), warm(l1, l2, m2, s))),
        (rate(), rate(), rate(), state())
            .prop_map(|(l, m1, m2, s)| (cold(l, m1, s), cold(l, m2, s))),
        (rate(), rate(), rate(), rate(), rate(), state())
            .prop_map(|(a, b, c, d, mu, s)| (warm(a, b, mu, s), warm(c, d, mu, s))),
    ]
}

fn numeric(a: &MarkovSystem, b: &MarkovSystem, rel: OrderRelation) -> OrderVerdict {
    let grid = order::default_grid(&[a, b]).unwrap();
    check_order(a, b, rel, &grid, TOL_CLOSED_FORM).unwrap()
}

/// Why an analytic result contradicts the numeric verdict, if it does.
fn contradiction(
    r: &CriterionResult,
    a: &MarkovSystem,
    num: &OrderVerdict,
) -> Option<&'static str> {
    let claims_holds = match r.verdict {
        Verdict::Holds if r.rule == Rule::LargeRepairLr => {
            r.threshold.is_some_and(|th| a.config().mu() >= th)
        }
        Verdict::Holds => true,
        _ => false,
    };
    if claims_holds && num.fails() {
        return Some("analytic Holds, numeric Fails");
    }
    if r.necessary_and_sufficient && r.verdict == Verdict::DoesNotHold && num.holds() {
        return Some("analytic DoesNotHold, numeric Holds");
    }
    None
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn analytic_and_numeric_verdicts_agree((a, b) in pair()) {
        for rel in [OrderRelation::Lr, OrderRelation::Hr] {
            let num = numeric(&a, &b, rel);
            for r in analytic_verdicts(&a, &b, rel) {
                if let Some(why) = contradiction(&r, &a, &num) {
                    prop_assert!(false, "{} on {rel}: {why}; {:?}", r.rule.name(), num.status);
                }
            }
        }
    }

    #[test]
    fn threshold_is_final_on_the_sampled_ray(
        (principal1, standby1, principal2, standby2) in (rate(), rate(), rate(), rate())
    ) {
        let pair = SharedRepairPair { principal1, standby1, principal2, standby2 };
        if let Some(th) = pair.lr_threshold().filter(|&th| th <= 1e3) {
            for i in 0..=200 {
                let mu = th.max(1e-6) * (1e3 / th.max(1e-6)).powf(i as f64 / 200.0);
                prop_assert!(pair.lr_holds(mu), "mu={mu} threshold={th}");
            }
        }
    }
}

#[test]
fn example_threshold_ray() {
    let pair = SharedRepairPair {
        principal1: 1.5,
        standby1: 1.0,
        principal2: 1.0,
        standby2: 3.0,
    };
    let th = pair.lr_threshold().unwrap();
    assert!((th - 11.25).abs() < 0.01, "{th}");
    let mut mu = th;
    while mu <= 1e3 {
        assert!(pair.gap(mu) <= 1.0 + 1e-12, "mu={mu}");
        mu *= 1.01;
    }
    let tp = pair.gap_turning_point().unwrap();
    assert!((tp - 26.49).abs() < 0.01, "{tp}");
}
