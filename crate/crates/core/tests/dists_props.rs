use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use standbyrel_core::quad::{self, Tolerance};
use standbyrel_core::{prob_greater, Distribution};

fn law() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|r| Distribution::exponential(r).unwrap()),
        (0.0f64..10.0).prop_map(|t| Distribution::deterministic(t).unwrap()),
        (0.5f64..4.0, 0.1f64..5.0).prop_map(|(k, s)| Distribution::weibull(k, s).unwrap()),
        prop::collection::vec(0.0f64..10.0, 1..40)
            .prop_map(|v| Distribution::empirical(v).unwrap()),
    ]
}

fn continuous() -> impl Strategy<Value = Distribution> {
    prop_oneof![
        (0.05f64..20.0).prop_map(|r| Distribution::exponential(r).unwrap()),
        (0.5f64..4.0, 0.1f64..5.0).prop_map(|(k, s)| Distribution::weibull(k, s).unwrap()),
    ]
}

/// `P(X > Y)` estimated from paired draws, with its standard error.
fn monte_carlo(x: &Distribution, y: &Distribution, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..n)
        .filter(|_| x.sample(&mut rng) > y.sample(&mut rng))
        .count();
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

#[test]
fn prob_greater_examples() {
    let e1 = Distribution::exponential(1.0).unwrap();
    let e2 = Distribution::exponential(2.0).unwrap();
    assert_eq!(prob_greater(&e1, &e1).unwrap(), 0.5);
    let p = prob_greater(&e2, &Distribution::deterministic(0.4).unwrap()).unwrap();
    assert!((p - (-0.8f64).exp()).abs() < 1e-15);
    assert_eq!(
        prob_greater(&e1, &Distribution::deterministic(0.0).unwrap()).unwrap(),
        1.0
    );
    let d = Distribution::deterministic(1.5).unwrap();
    assert_eq!(prob_greater(&d, &d).unwrap(), 0.0);
}

#[test]
fn mass_near_origin_is_not_missed() {
    let x = Distribution::weibull(0.5, 2.75).unwrap();
    let y = Distribution::exponential(18.5).unwrap();
    let p = prob_greater(&x, &y).unwrap() + prob_greater(&y, &x).unwrap();
    assert!((p - 1.0).abs() < 1e-9, "{p}");
}

#[test]
fn closed_forms_match_paired_draws() {
    let cases = [
        (
            Distribution::exponential(1.0).unwrap(),
            Distribution::exponential(3.0).unwrap(),
        ),
        (
            Distribution::exponential(2.0).unwrap(),
            Distribution::deterministic(0.4).unwrap(),
        ),
        (
            Distribution::weibull(2.0, 1.0).unwrap(),
            Distribution::deterministic(0.7).unwrap(),
        ),
        (
            Distribution::deterministic(0.5).unwrap(),
            Distribution::exponential(1.0).unwrap(),
        ),
    ];
    for (i, (x, y)) in cases.iter().enumerate() {
        let exact = prob_greater(x, y).unwrap();
        let (p, se) = monte_carlo(x, y, 100_000, 17 + i as u64);
        assert!(
            (p - exact).abs() <= 4.0 * se,
            "case {i}: {p} vs {exact} (se {se})"
        );
    }
}

#[test]
fn exponential_sample_mean() {
    let d = Distribution::exponential(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
    assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
}

#[test]
fn sampling_is_reproducible() {
    let d = Distribution::weibull(1.5, 2.0).unwrap();
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..8).map(|_| d.sample(&mut rng)).collect::<Vec<_>>()
    };
    assert_eq!(draw(9), draw(9));
    assert_ne!(draw(9), draw(10));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(
        Distribution::deterministic(2.0).unwrap().sample(&mut rng),
        2.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn survival_integrates_to_mean(d in law()) {
        let mean = d.mean();
        let hi = d.upper_time(1e-16);
        let tol = Tolerance { abs: 1e-12, rel: 1e-10, max_intervals: 4000 };
        let area = quad::integrate(|t| d.survival(t).unwrap(), 0.0, hi, &d.atoms(), tol).unwrap().value;
        prop_assert!((area - mean).abs() <= 1e-6 * mean.max(1e-12), "{area} vs {mean}");
    }

    #[test]
    fn survival_is_monotone_and_complements_cdf(d in law(), a in 0.0f64..20.0, b in 0.0f64..20.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (slo, shi) = (d.survival(lo).unwrap(), d.survival(hi).unwrap());
        prop_assert!(shi <= slo);
        prop_assert!((0.0..=1.0).contains(&slo));
        prop_assert_eq!(slo + d.cdf(lo).unwrap(), 1.0);
    }

    #[test]
    fn continuous_pairs_are_complementary(x in continuous(), y in continuous()) {
        let p = prob_greater(&x, &y).unwrap() + prob_greater(&y, &x).unwrap();
        prop_assert!((p - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn samples_are_nonnegative(d in law(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            let x = d.sample(&mut rng);
            prop_assert!(x.is_finite() && x >= 0.0);
        }
    }
}
