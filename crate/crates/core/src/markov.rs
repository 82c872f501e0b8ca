//! Closed-form lifetime curves of the Markovian two-unit standby systems.
//!
//! A warm system has principal failure rate `λ₁`, standby failure rate `λ₂`
//! and repair rate `μ`; a cold system is the same chain with `λ₂ = 0`.
//! With `c = 2λ₁ + λ₂ + μ` and `a = √((λ₂+μ)² + 4λ₁μ)` the fresh-pair
//! survival is
//!
//! ```text
//! Φ(t) = e^{-ct/2} [cosh(at/2) + (c/a) sinh(at/2)]
//! ```
//!
//! Everything here is evaluated in the factored form
//! `e^{-(c-a)t/2} · (bounded terms)`, with `c - a = 4λ₁(λ₁+λ₂)/(c+a)`, so
//! nothing overflows for large `t` and nothing cancels when `a → 0`.

use alloc::format;

use crate::error::{Error, Result};
use crate::fm;
use crate::law::LifetimeLaw;
use crate::order;
use crate::poly::{Poly, RationalLT};

/// Rates of a warm standby system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmConfig {
    lambda1: f64,
    lambda2: f64,
    mu: f64,
}

impl WarmConfig {
    /// `λ₁ > 0` is required (otherwise the system never fails); `λ₂ = 0`
    /// gives the cold system and `μ = 0` a system without repair.
    pub fn new(lambda1: f64, lambda2: f64, mu: f64) -> Result<Self> {
        check_rate("lambda1", lambda1, true)?;
        check_rate("lambda2", lambda2, false)?;
        check_rate("mu", mu, false)?;
        Ok(Self {
            lambda1,
            lambda2,
            mu,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `a = √((λ₂+μ)² + 4λ₁μ)`.
    pub fn a(&self) -> f64 {
        let s = self.lambda2 + self.mu;
        fm::sqrt(s * s + 4.0 * self.lambda1 * self.mu)
    }

    /// `c = 2λ₁ + λ₂ + μ`.
    pub fn c(&self) -> f64 {
        2.0 * self.lambda1 + self.lambda2 + self.mu
    }

    /// `2λ₁(λ₁+λ₂)`, the numerator of the fresh-pair density and hazard.
    pub fn k(&self) -> f64 {
        2.0 * self.lambda1 * (self.lambda1 + self.lambda2)
    }

    /// `c - a`, computed without cancellation. Twice the limiting hazard.
    pub fn decay(&self) -> f64 {
        4.0 * self.lambda1 * (self.lambda1 + self.lambda2) / (self.c() + self.a())
    }

    pub fn max_rate(&self) -> f64 {
        self.lambda1.max(self.lambda2).max(self.mu)
    }
}

/// Rates of a cold standby system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColdConfig {
    lambda: f64,
    mu: f64,
}

impl ColdConfig {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        check_rate("lambda", lambda, true)?;
        check_rate("mu", mu, false)?;
        Ok(Self { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `b = √(μ(4λ+μ))`.
    pub fn b(&self) -> f64 {
        fm::sqrt(self.mu * (4.0 * self.lambda + self.mu))
    }

    pub fn as_warm(&self) -> WarmConfig {
        WarmConfig {
            lambda1: self.lambda,
            lambda2: 0.0,
            mu: self.mu,
        }
    }
}

fn check_rate(name: &'static str, value: f64, strictly_positive: bool) -> Result<()> {
    let ok = value.is_finite()
        && if strictly_positive {
            value > 0.0
        } else {
            value >= 0.0
        };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: if strictly_positive {
                "rate must be finite and positive"
            } else {
                "rate must be finite and nonnegative"
            },
        })
    }
}

/// State of the chain at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialState {
    /// One unit working, the other waiting in standby.
    FreshPair,
    /// One unit working, the other under repair.
    DegradedStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    Warm,
    Cold,
}

/// `(1 - e^{-at}) / (2a)`, i.e. `e^{-at/2} sinh(at/2) / a`.
fn sinhc(a: f64, t: f64) -> f64 {
    let x = a * t;
    if x < 1e-6 {
        0.5 * t * (1.0 - 0.5 * x + x * x / 6.0)
    } else {
        -fm::expm1(-x) / (2.0 * a)
    }
}

/// `(1 + e^{-at}) / 2`, i.e. `e^{-at/2} cosh(at/2)`.
fn coshc(a: f64, t: f64) -> f64 {
    0.5 * (1.0 + fm::exp(-a * t))
}

impl WarmConfig {
    fn survival_core(&self, state: InitialState, t: f64) -> f64 {
        let a = self.a();
        let weight = match state {
            InitialState::FreshPair => self.c(),
            InitialState::DegradedStart => self.lambda2 + self.mu,
        };
        coshc(a, t) + weight * sinhc(a, t)
    }

    /// `e^{(c-a)t/2} φ*(t) / λ₁ = coshc + (λ₂-μ) sinhc`, kept positive and
    /// free of cancellation when `λ₂ - μ ≈ -a`.
    fn degraded_bracket(&self, t: f64) -> f64 {
        let a = self.a();
        let d = self.lambda2 - self.mu;
        if a * t < 1.0 {
            return coshc(a, t) + d * sinhc(a, t);
        }
        // (a + d) + e^{-at}(a - d), over 2a; a² - d² = 4μ(λ₁+λ₂).
        let cross = 4.0 * self.mu * (self.lambda1 + self.lambda2);
        let (plus, minus) = if d >= 0.0 {
            (a + d, cross / (a + d))
        } else {
            (cross / (a - d), a - d)
        };
        (plus + fm::exp(-a * t) * minus) / (2.0 * a)
    }

    fn density_core(&self, state: InitialState, t: f64) -> f64 {
        match state {
            InitialState::FreshPair => self.k() * sinhc(self.a(), t),
            InitialState::DegradedStart => self.lambda1 * self.degraded_bracket(t),
        }
    }

    fn envelope(&self, t: f64) -> f64 {
        fm::exp(-0.5 * self.decay() * t)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Survival `Φ^W(t)` (fresh pair) or `Φ^{W*}(t)` (degraded start).
pub fn warm_survival(cfg: &WarmConfig, state: InitialState, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(cfg.envelope(t) * cfg.survival_core(state, t))
}

/// Density `φ^W(t)` or `φ^{W*}(t)`.
pub fn warm_density(cfg: &WarmConfig, state: InitialState, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(cfg.envelope(t) * cfg.density_core(state, t))
}

/// `ln φ`, finite far beyond the point where the density underflows.
pub fn warm_ln_density(cfg: &WarmConfig, state: InitialState, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(-0.5 * cfg.decay() * t + fm::ln(cfg.density_core(state, t)))
}

/// Hazard rate. For the fresh pair this is
/// `2λ₁(λ₁+λ₂) / (c + a coth(at/2))`, extended continuously by `0` at
/// `t = 0`; for the degraded start it starts at `λ₁`.
pub fn warm_hazard(cfg: &WarmConfig, state: InitialState, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(cfg.density_core(state, t) / cfg.survival_core(state, t))
}

pub fn cold_survival(cfg: &ColdConfig, state: InitialState, t: f64) -> Result<f64> {
    warm_survival(&cfg.as_warm(), state, t)
}

pub fn cold_density(cfg: &ColdConfig, state: InitialState, t: f64) -> Result<f64> {
    warm_density(&cfg.as_warm(), state, t)
}

pub fn cold_hazard(cfg: &ColdConfig, state: InitialState, t: f64) -> Result<f64> {
    warm_hazard(&cfg.as_warm(), state, t)
}

/// A Markovian system together with its initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovSystem {
    cfg: WarmConfig,
    state: InitialState,
    kind: SystemKind,
}

impl MarkovSystem {
    pub fn warm(cfg: WarmConfig, state: InitialState) -> Self {
        Self {
            cfg,
            state,
            kind: SystemKind::Warm,
        }
    }

    pub fn cold(cfg: ColdConfig, state: InitialState) -> Self {
        Self {
            cfg: cfg.as_warm(),
            state,
            kind: SystemKind::Cold,
        }
    }

    pub fn config(&self) -> &WarmConfig {
        &self.cfg
    }

    pub fn state(&self) -> InitialState {
        self.state
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn survival(&self, t: f64) -> Result<f64> {
        warm_survival(&self.cfg, self.state, t)
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        warm_density(&self.cfg, self.state, t)
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        warm_hazard(&self.cfg, self.state, t)
    }

    /// Limit of the hazard rate as `t → ∞`, `(c - a)/2`.
    pub fn limiting_hazard(&self) -> f64 {
        0.5 * self.cfg.decay()
    }

    pub fn mean(&self) -> f64 {
        let WarmConfig {
            lambda1,
            lambda2,
            mu,
        } = self.cfg;
        let num = match self.state {
            InitialState::FreshPair => self.cfg.c(),
            InitialState::DegradedStart => lambda1 + lambda2 + mu,
        };
        num / (lambda1 * (lambda1 + lambda2))
    }

    /// Closed-form Laplace transform of the survival function,
    /// `(s + w) / (s² + cs + λ₁(λ₁+λ₂))` with `w = c` for the fresh pair and
    /// `w = λ₁+λ₂+μ` for the degraded start.
    pub fn laplace_survival(&self, s: f64) -> f64 {
        let WarmConfig {
            lambda1,
            lambda2,
            mu,
        } = self.cfg;
        let w = match self.state {
            InitialState::FreshPair => self.cfg.c(),
            InitialState::DegradedStart => lambda1 + lambda2 + mu,
        };
        (s + w) / (s * s + self.cfg.c() * s + lambda1 * (lambda1 + lambda2))
    }

    /// The same transform as a rational function, for exact inversion.
    pub fn laplace_rational(&self) -> Result<RationalLT> {
        let WarmConfig {
            lambda1,
            lambda2,
            mu,
        } = self.cfg;
        let w = match self.state {
            InitialState::FreshPair => self.cfg.c(),
            InitialState::DegradedStart => lambda1 + lambda2 + mu,
        };
        RationalLT::new(
            Poly::linear(w, 1.0),
            Poly::new(alloc::vec![
                lambda1 * (lambda1 + lambda2),
                self.cfg.c(),
                1.0
            ]),
        )
    }
}

impl LifetimeLaw for MarkovSystem {
    fn sf(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        self.cfg.envelope(t) * self.cfg.survival_core(self.state, t)
    }

    fn pdf(&self, t: f64) -> Option<f64> {
        let t = t.max(0.0);
        Some(self.cfg.envelope(t) * self.cfg.density_core(self.state, t))
    }

    fn ln_pdf(&self, t: f64) -> Option<f64> {
        warm_ln_density(&self.cfg, self.state, t.max(0.0)).ok()
    }

    fn hazard(&self, t: f64) -> Option<f64> {
        warm_hazard(&self.cfg, self.state, t.max(0.0)).ok()
    }

    fn rate_scale(&self) -> f64 {
        self.cfg.max_rate()
    }

    fn tail_time(&self, eps: f64) -> f64 {
        // Φ(t) ≤ K e^{-(c-a)t/2} with K ≤ 1 + c·t/2 bounded crudely; refine
        // by doubling from the asymptotic guess.
        let rate = self.limiting_hazard();
        let mut t = -fm::ln(eps) / rate;
        while self.sf(t) >= eps {
            t *= 1.5;
        }
        t
    }
}

/// Aging class of a lifetime density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgingClass {
    /// Increasing likelihood ratio: `φ(x+t)/φ(x)` decreasing in `x`.
    Ilr,
    /// Decreasing likelihood ratio: `φ(x+t)/φ(x)` increasing in `x`.
    Dlr,
}

/// The analytic aging class with the numeric evidence that backs it.
#[derive(Debug, Clone, PartialEq)]
pub struct AgingReport {
    pub class: AgingClass,
    pub shifts: [f64; 3],
    pub grid_points: usize,
    /// Smallest slope of the shifted log-ratio in the asserted direction.
    pub min_margin: f64,
}

pub const CERTIFICATE_SHIFTS: [f64; 3] = [0.1, 1.0, 10.0];
const CERTIFICATE_TOL: f64 = 1e-9;

/// Fresh-pair lifetimes are ILR, degraded-start lifetimes are DLR, for every
/// choice of rates. The answer is certified by checking that
/// `ln φ(x+t) - ln φ(x)` moves in the asserted direction along the default
/// grid for `t ∈ {0.1, 1, 10}`.
pub fn aging_class(system: &MarkovSystem) -> Result<AgingReport> {
    let class = match system.state {
        InitialState::FreshPair => AgingClass::Ilr,
        InitialState::DegradedStart => AgingClass::Dlr,
    };
    let grid = order::default_grid(&[system])?;
    let cfg = &system.cfg;
    let mut min_margin = f64::INFINITY;
    for &shift in &CERTIFICATE_SHIFTS {
        let ratio = |x: f64| -> Result<f64> {
            Ok(warm_ln_density(cfg, system.state, x + shift)?
                - warm_ln_density(cfg, system.state, x)?)
        };
        let mut prev = ratio(grid[0])?;
        for pair in grid.windows(2) {
            let next = ratio(pair[1])?;
            let slope = match class {
                AgingClass::Ilr => prev - next,
                AgingClass::Dlr => next - prev,
            };
            let scale = CERTIFICATE_TOL * (1.0 + prev.abs() + next.abs());
            if slope < -scale {
                return Err(Error::CertificateFailed {
                    shift,
                    x: pair[0],
                    detail: format!("{class:?} ratio moved the wrong way by {slope:e}"),
                });
            }
            min_margin = min_margin.min(slope);
            prev = next;
        }
    }
    Ok(AgingReport {
        class,
        shifts: CERTIFICATE_SHIFTS,
        grid_points: grid.len(),
        min_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warm(l1: f64, l2: f64, mu: f64) -> WarmConfig {
        WarmConfig::new(l1, l2, mu).unwrap()
    }

    /// Textbook form of the fresh-pair survival, fine for moderate t.
    fn naive_survival(cfg: &WarmConfig, t: f64) -> f64 {
        let (a, c) = (cfg.a(), cfg.c());
        fm::exp(-c * t / 2.0) * (libm::cosh(a * t / 2.0) + c / a * libm::sinh(a * t / 2.0))
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(WarmConfig::new(0.0, 1.0, 1.0).is_err());
        assert!(WarmConfig::new(1.0, -1.0, 1.0).is_err());
        assert!(ColdConfig::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn fresh_survival_examples() {
        let cfg = warm(1.0, 1.0, 1.0);
        assert_eq!(
            warm_survival(&cfg, InitialState::FreshPair, 0.0).unwrap(),
            1.0
        );
        // Matrix-exponential oracle value (see tests/markov_oracle.rs).
        let s1 = warm_survival(&cfg, InitialState::FreshPair, 1.0).unwrap();
        assert!((s1 - 0.665_143_319_366_193).abs() < 1e-12, "{s1}");
        assert!((s1 - naive_survival(&cfg, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn no_repair_reduces_to_two_stage_model() {
        // Without repair the chain is 0 --(λ₁+λ₂)--> 1 --λ₁--> failed.
        let cfg = warm(1.0, 1.0, 0.0);
        for &t in &[0.1, 0.7, 2.0, 9.0] {
            let direct = 2.0 * fm::exp(-t) - fm::exp(-2.0 * t);
            let s = warm_survival(&cfg, InitialState::FreshPair, t).unwrap();
            assert!((s - direct).abs() < 1e-14, "t={t}: {s} vs {direct}");
        }
    }

    #[test]
    fn cold_without_repair_is_erlang() {
        let cfg = ColdConfig::new(1.7, 0.0).unwrap();
        assert_eq!(cfg.b(), 0.0);
        for &t in &[0.0, 1e-8, 0.3, 4.0, 40.0] {
            let erlang = fm::exp(-1.7 * t) * (1.0 + 1.7 * t);
            let s = cold_survival(&cfg, InitialState::FreshPair, t).unwrap();
            assert!((s - erlang).abs() < 1e-14 * (1.0 + erlang), "t={t}");
        }
    }

    #[test]
    fn cold_example_value() {
        let cfg = ColdConfig::new(1.0, 1.0).unwrap();
        let s = cold_survival(&cfg, InitialState::FreshPair, 1.0).unwrap();
        assert!((s - 0.786_645_599_303_368).abs() < 1e-12, "{s}");
    }

    #[test]
    fn density_at_origin() {
        let cfg = warm(1.3, 0.4, 2.0);
        assert_eq!(
            warm_density(&cfg, InitialState::FreshPair, 0.0).unwrap(),
            0.0
        );
        assert!(
            (warm_density(&cfg, InitialState::DegradedStart, 0.0).unwrap() - 1.3).abs() < 1e-15
        );
    }

    #[test]
    fn density_matches_finite_difference() {
        let cfg = warm(1.0, 1.0, 1.0);
        let h = 1e-5;
        let s = |t| warm_survival(&cfg, InitialState::FreshPair, t).unwrap();
        let fd = -(s(1.0 + h) - s(1.0 - h)) / (2.0 * h);
        let f = warm_density(&cfg, InitialState::FreshPair, 1.0).unwrap();
        assert!((fd - f).abs() < 1e-6);
    }

    #[test]
    fn hazard_limits() {
        let cfg = warm(1.0, 1.0, 1.0);
        assert_eq!(
            warm_hazard(&cfg, InitialState::FreshPair, 0.0).unwrap(),
            0.0
        );
        let limit = 4.0 / (4.0 + fm::sqrt(8.0));
        assert!((limit - 0.585_786_437_626_905).abs() < 1e-12);
        let r50 = warm_hazard(&cfg, InitialState::FreshPair, 50.0).unwrap();
        assert!((r50 - limit).abs() < 1e-12);
        let sys = MarkovSystem::warm(cfg, InitialState::FreshPair);
        assert!((sys.limiting_hazard() - limit).abs() < 1e-15);
        assert_eq!(
            warm_hazard(&cfg, InitialState::DegradedStart, 0.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn hazard_matches_paper_coth_form() {
        let cfg = warm(0.7, 0.2, 3.1);
        let (a, c, k) = (cfg.a(), cfg.c(), cfg.k());
        for &t in &[0.05, 0.5, 2.0, 7.0] {
            let coth = 1.0 / libm::tanh(a * t / 2.0);
            let paper = k / (c + a * coth);
            let r = warm_hazard(&cfg, InitialState::FreshPair, t).unwrap();
            assert!((r - paper).abs() < 1e-13 * paper, "t={t}");
            let tanh = libm::tanh(a * t / 2.0);
            let (l1, l2, mu) = (0.7, 0.2, 3.1);
            let star = l1 * (a + (l2 - mu) * tanh) / (a + (l2 + mu) * tanh);
            let r_star = warm_hazard(&cfg, InitialState::DegradedStart, t).unwrap();
            assert!((r_star - star).abs() < 1e-13 * star, "t={t}");
        }
    }

    #[test]
    fn no_overflow_at_extreme_arguments() {
        let cfg = warm(1000.0, 1000.0, 1000.0);
        for state in [InitialState::FreshPair, InitialState::DegradedStart] {
            for &t in &[1e-9, 1.0, 1e2, 1e4] {
                let s = warm_survival(&cfg, state, t).unwrap();
                let f = warm_density(&cfg, state, t).unwrap();
                let r = warm_hazard(&cfg, state, t).unwrap();
                let lf = warm_ln_density(&cfg, state, t).unwrap();
                assert!(s.is_finite() && f.is_finite() && r.is_finite() && lf.is_finite());
            }
        }
        // Very slow failure, fast repair: a is close to c.
        let slow = warm(1e-3, 0.0, 1e3);
        let r = warm_hazard(&slow, InitialState::DegradedStart, 1e4).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn degraded_density_has_no_cancellation() {
        // λ₂ - μ ≈ -a: the bracket is tiny relative to its two terms.
        let cfg = warm(1e-4, 0.0, 50.0);
        let t = 10.0;
        let f = warm_density(&cfg, InitialState::DegradedStart, t).unwrap();
        // λ₁ P(one unit down at t) from a 50-digit matrix exponential.
        let oracle = 1.999_987_996_080_039_4e-10;
        assert!((f - oracle).abs() < 1e-12 * oracle, "{f} vs {oracle}");
    }

    #[test]
    fn rational_transform_inverts_to_closed_form() {
        for state in [InitialState::FreshPair, InitialState::DegradedStart] {
            let sys = MarkovSystem::warm(warm(0.7, 0.3, 2.5), state);
            let lt = sys.laplace_rational().unwrap();
            assert!((lt.eval(0.4) - sys.laplace_survival(0.4)).abs() < 1e-15);
            for &t in &[0.0, 0.5, 3.0, 20.0] {
                assert!((lt.invert(t).unwrap() - sys.survival(t).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplace_transform_gives_mean() {
        let sys = MarkovSystem::warm(warm(1.0, 1.0, 1.0), InitialState::FreshPair);
        assert!((sys.laplace_survival(0.0) - sys.mean()).abs() < 1e-15);
        assert_eq!(sys.mean(), 2.0);
    }

    #[test]
    fn aging_examples() {
        let w = MarkovSystem::warm(warm(1.0, 2.0, 3.0), InitialState::FreshPair);
        assert_eq!(aging_class(&w).unwrap().class, AgingClass::Ilr);
        let c = MarkovSystem::cold(
            ColdConfig::new(1.0, 1.0).unwrap(),
            InitialState::DegradedStart,
        );
        assert_eq!(aging_class(&c).unwrap().class, AgingClass::Dlr);
        let via_warm = MarkovSystem::warm(warm(1.0, 0.0, 1.0), InitialState::DegradedStart);
        assert_eq!(
            aging_class(&via_warm).unwrap().class,
            aging_class(&c).unwrap().class
        );
    }
}
