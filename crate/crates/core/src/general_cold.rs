//! Cold standby system of two units with arbitrary lifetime and repair laws.
//!
//! Unit `Cᵢ` has lifetime `Xᵢ ~ Fᵢ` and repair time `Yᵢ ~ Gᵢ`. The system
//! fails when the working unit fails while the other one is still under
//! repair. The four initial conditions are
//!
//! * `Tau0`: `C₁` works, `C₂` waits;
//! * `Tau1`: `C₂` works, `C₁` is under repair;
//! * `Tau2`: `C₁` works, `C₂` is under repair;
//! * `Tau3`: `C₂` works, `C₁` waits;
//!
//! and their survival functions satisfy the renewal system
//!
//! ```text
//! Φ₀(t) = F̄₁(t) + ∫₀ᵗ Φ₁(t-x) dF₁(x)
//! Φ₁(t) = F̄₂(t) + ∫₀ᵗ G₁(x⁻) Φ₂(t-x) dF₂(x)
//! Φ₂(t) = F̄₁(t) + ∫₀ᵗ G₂(x⁻) Φ₁(t-x) dF₁(x)
//! Φ₃(t) = F̄₂(t) + ∫₀ᵗ Φ₂(t-x) dF₂(x)
//! ```
//!
//! A repair finishing at the same instant as a failure counts as too late,
//! hence the left limits `G(x⁻)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::criteria::{CriterionResult, Rule};
use crate::curve::Curve;
use crate::dists::{prob_greater, Distribution};
use crate::error::{Error, Result};
use crate::fm;
use crate::law::LifetimeLaw;
use crate::order::{self, Method, OrderRelation, OrderVerdict, Status};
use crate::poly::{self, Poly, RationalLT};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColdStart {
    Tau0,
    Tau1,
    Tau2,
    Tau3,
}

impl ColdStart {
    pub const ALL: [ColdStart; 4] = [Self::Tau0, Self::Tau1, Self::Tau2, Self::Tau3];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The same initial condition after relabelling `C₁ ↔ C₂`.
    pub fn swapped(self) -> Self {
        match self {
            Self::Tau0 => Self::Tau3,
            Self::Tau1 => Self::Tau2,
            Self::Tau2 => Self::Tau1,
            Self::Tau3 => Self::Tau0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Tau0 => "tau0",
            Self::Tau1 => "tau1",
            Self::Tau2 => "tau2",
            Self::Tau3 => "tau3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralColdConfig {
    pub lifetime1: Distribution,
    pub lifetime2: Distribution,
    pub repair1: Distribution,
    pub repair2: Distribution,
    pub start: ColdStart,
}

impl GeneralColdConfig {
    pub fn new(
        lifetime1: Distribution,
        lifetime2: Distribution,
        repair1: Distribution,
        repair2: Distribution,
        start: ColdStart,
    ) -> Result<Self> {
        for d in [&lifetime1, &lifetime2, &repair1, &repair2] {
            d.validate()?;
        }
        Ok(Self {
            lifetime1,
            lifetime2,
            repair1,
            repair2,
            start,
        })
    }

    /// All four laws exponential, with rates `λ₁ = 1/E[X₁]` etc.
    pub fn exponential(
        lambda1: f64,
        lambda2: f64,
        mu1: f64,
        mu2: f64,
        start: ColdStart,
    ) -> Result<Self> {
        Self::new(
            Distribution::exponential(lambda1)?,
            Distribution::exponential(lambda2)?,
            Distribution::exponential(mu1)?,
            Distribution::exponential(mu2)?,
            start,
        )
    }

    pub fn with_start(&self, start: ColdStart) -> Self {
        Self {
            start,
            ..self.clone()
        }
    }

    /// Relabels the units; the physical system is unchanged.
    pub fn swapped(&self) -> Self {
        Self {
            lifetime1: self.lifetime2.clone(),
            lifetime2: self.lifetime1.clone(),
            repair1: self.repair2.clone(),
            repair2: self.repair1.clone(),
            start: self.start.swapped(),
        }
    }

    pub fn exponential_rates(&self) -> Option<ExponentialRates> {
        Some(ExponentialRates {
            lambda1: self.lifetime1.exponential_rate()?,
            lambda2: self.lifetime2.exponential_rate()?,
            mu1: self.repair1.exponential_rate()?,
            mu2: self.repair2.exponential_rate()?,
        })
    }

    fn laws(&self) -> [&Distribution; 4] {
        [
            &self.lifetime1,
            &self.lifetime2,
            &self.repair1,
            &self.repair2,
        ]
    }

    fn all_smooth(&self) -> bool {
        self.laws().iter().all(|d| d.has_density())
    }
}

/// Rates of an all-exponential configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialRates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl ExponentialRates {
    pub fn new(lambda1: f64, lambda2: f64, mu1: f64, mu2: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda1", lambda1),
            ("lambda2", lambda2),
            ("mu1", mu1),
            ("mu2", mu2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "rate must be finite and positive",
                });
            }
        }
        Ok(Self {
            lambda1,
            lambda2,
            mu1,
            mu2,
        })
    }

    pub fn swapped(&self) -> Self {
        Self {
            lambda1: self.lambda2,
            lambda2: self.lambda1,
            mu1: self.mu2,
            mu2: self.mu1,
        }
    }
}

/// Mean lifetimes for the four initial conditions, with the two race
/// probabilities they are built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MttfReport {
    pub means: [f64; 4],
    /// `P(X₂ > Y₁)`: `C₂` outlives the repair of `C₁`.
    pub p21: f64,
    /// `P(X₁ > Y₂)`.
    pub p12: f64,
}

impl MttfReport {
    pub fn get(&self, start: ColdStart) -> f64 {
        self.means[start.index()]
    }
}

/// Solves the mean system
///
/// ```text
/// E₀ = E[X₁] + E₁,   E₁ = E[X₂] + P(X₂>Y₁) E₂,
/// E₃ = E[X₂] + E₂,   E₂ = E[X₁] + P(X₁>Y₂) E₁.
/// ```
pub fn mttf(cfg: &GeneralColdConfig) -> Result<MttfReport> {
    let p21 = prob_greater(&cfg.lifetime2, &cfg.repair1)?;
    let p12 = prob_greater(&cfg.lifetime1, &cfg.repair2)?;
    let den = 1.0 - p12 * p21;
    if den <= 1e-12 {
        return Err(Error::DivergentMttf(den));
    }
    let (m1, m2) = (cfg.lifetime1.mean(), cfg.lifetime2.mean());
    let e1 = (m2 + p21 * m1) / den;
    let e2 = (m1 + p12 * m2) / den;
    Ok(MttfReport {
        means: [m1 + e1, e1, e2, m2 + e2],
        p21,
        p12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preference {
    Tau0,
    Tau3,
    Tie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationRule {
    /// `E[X₁] ≥ E[X₂]` and `P(X₂>Y₁) ≥ P(X₁>Y₂)`.
    MeanAndRace,
    /// Exponential lifetimes, fixed repair times, `λ₁ ≥ λ₂` and `T₁ ≤ T₂`.
    ExpDetDecreasingQ,
    /// Exponential lifetimes, fixed repair times, `T₁/T₂ ≤ min(1, λ₁/λ₂)`.
    ExpDetRatio,
}

impl AllocationRule {
    pub fn name(self) -> &'static str {
        match self {
            Self::MeanAndRace => "mean-and-race",
            Self::ExpDetDecreasingQ => "exp-det-decreasing-q",
            Self::ExpDetRatio => "exp-det-ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationReport {
    pub preferred: Preference,
    pub mttf: MttfReport,
    /// `E[τ₀] - E[τ₃]`.
    pub margin: f64,
    /// `E[X₁] P(X₂>Y₁)(1-P(X₁>Y₂))`, which is at least `reduced_rhs` exactly
    /// when starting with `C₁` is no worse.
    pub reduced_lhs: f64,
    /// `E[X₂] P(X₁>Y₂)(1-P(X₂>Y₁))`.
    pub reduced_rhs: f64,
    /// Sufficient rules (for `E[τ₀] ≥ E[τ₃]`) that apply to this
    /// configuration, with whether each fired.
    pub rules: Vec<(AllocationRule, bool)>,
}

/// Which unit should start working while the other waits.
pub fn allocation_compare(cfg: &GeneralColdConfig) -> Result<AllocationReport> {
    let report = mttf(cfg)?;
    let (m1, m2) = (cfg.lifetime1.mean(), cfg.lifetime2.mean());
    let (p21, p12) = (report.p21, report.p12);
    let reduced_lhs = m1 * p21 * (1.0 - p12);
    let reduced_rhs = m2 * p12 * (1.0 - p21);
    let (e0, e3) = (report.means[0], report.means[3]);
    let margin = e0 - e3;
    let preferred = if margin.abs() <= 1e-12 * (e0 + e3) {
        Preference::Tie
    } else if margin > 0.0 {
        Preference::Tau0
    } else {
        Preference::Tau3
    };
    let mut rules = vec![(AllocationRule::MeanAndRace, m1 >= m2 && p21 >= p12)];
    if let (Some(l1), Some(l2), Some(t1), Some(t2)) = (
        cfg.lifetime1.exponential_rate(),
        cfg.lifetime2.exponential_rate(),
        cfg.repair1.deterministic_time(),
        cfg.repair2.deterministic_time(),
    ) {
        rules.push((AllocationRule::ExpDetDecreasingQ, l1 >= l2 && t1 <= t2));
        rules.push((AllocationRule::ExpDetRatio, t1 <= t2 && t1 * l2 <= l1 * t2));
    }
    Ok(AllocationReport {
        preferred,
        mttf: report,
        margin,
        reduced_lhs,
        reduced_rhs,
        rules,
    })
}

/// `q(x) = x e^{-x} / (1 - e^{-x})`, decreasing on `x ≥ 0` with `q(0) = 1`.
pub fn q_function(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        -x * fm::exp(-x) / fm::expm1(-x)
    }
}

/// Numerator of `Φ̂₀` for exponential laws: a monic cubic in `s`.
fn tau0_numerator(r: &ExponentialRates) -> Poly {
    let ExponentialRates {
        lambda1: l1,
        lambda2: l2,
        mu1: m1,
        mu2: m2,
    } = *r;
    let a = Poly::from_shifts(&[l2, l1 + m2, l2 + m1]);
    let b = Poly::from_shifts(&[l2, l1 + m2]).scale(l1);
    let c = Poly::linear(l1 + l2 + m2, 1.0).scale(l1 * m1);
    a.add(&b).add(&c)
}

/// `(s+λ₁)(s+λ₂)(s+λ₁+μ₂)(s+λ₂+μ₁) - λ₁λ₂μ₁μ₂`, symmetric under the swap.
fn common_denominator(r: &ExponentialRates) -> Poly {
    let ExponentialRates {
        lambda1: l1,
        lambda2: l2,
        mu1: m1,
        mu2: m2,
    } = *r;
    Poly::from_shifts(&[l1, l2, l1 + m2, l2 + m1]).sub(&Poly::constant(l1 * l2 * m1 * m2))
}

/// Numerator of `Φ̂₁`: `(s+λ₁)(s+λ₁+μ₂)(s+λ₂+μ₁) + λ₂μ₁(s+λ₁+μ₂)`.
fn tau1_numerator(r: &ExponentialRates) -> Poly {
    let ExponentialRates {
        lambda1: l1,
        lambda2: l2,
        mu1: m1,
        mu2: m2,
    } = *r;
    Poly::from_shifts(&[l1, l1 + m2, l2 + m1]).add(&Poly::linear(l1 + m2, 1.0).scale(l2 * m1))
}

/// Exact Laplace transform of `Φ_start` for all-exponential laws.
pub fn laplace_phi(rates: &ExponentialRates, start: ColdStart) -> Result<RationalLT> {
    let r = ExponentialRates::new(rates.lambda1, rates.lambda2, rates.mu1, rates.mu2)?;
    let num = match start {
        ColdStart::Tau0 => tau0_numerator(&r),
        ColdStart::Tau1 => tau1_numerator(&r),
        ColdStart::Tau2 => tau1_numerator(&r.swapped()),
        ColdStart::Tau3 => tau0_numerator(&r.swapped()),
    };
    RationalLT::new(num, common_denominator(&r))
}

/// Laplace transforms of `Φ₀ … Φ₃` at `s ≥ 0` for arbitrary laws, by
/// quadrature of the unit transforms and the algebraic solution of the
/// transformed system.
pub fn transform_general(cfg: &GeneralColdConfig, s: f64) -> Result<[f64; 4]> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "transform argument must be nonnegative",
        });
    }
    let f1 = cfg.lifetime1.laplace_sf(s)?;
    let f2 = cfg.lifetime2.laplace_sf(s)?;
    // Ĝ₁f₂(s) = E[G₁(X₂⁻) e^{-sX₂}], Ĝ₂f₁ likewise.
    let a = cfg.lifetime2.expect(
        |x| cfg.repair1.cdf_left(x) * fm::exp(-s * x),
        &cfg.repair1.atoms(),
    )?;
    let b = cfg.lifetime1.expect(
        |x| cfg.repair2.cdf_left(x) * fm::exp(-s * x),
        &cfg.repair2.atoms(),
    )?;
    let den = 1.0 - a * b;
    if den <= 1e-12 {
        return Err(Error::DivergentMttf(den));
    }
    let phi1 = (f2 + a * f1) / den;
    let phi2 = (f1 + b * f2) / den;
    let phi0 = f1 + phi1 * (1.0 - s * f1);
    let phi3 = f2 + phi2 * (1.0 - s * f2);
    Ok([phi0, phi1, phi2, phi3])
}

/// `Φ_start(t)` by Laplace inversion: exact partial fractions for
/// exponential laws, Gaver–Stehfest otherwise. Atoms and sharply peaked
/// laws push the Stehfest error up to about `1e-3`; prefer
/// [`solve_volterra`] for those.
pub fn survival_by_inversion(cfg: &GeneralColdConfig, t: f64) -> Result<f64> {
    match cfg.exponential_rates() {
        Some(r) => laplace_phi(&r, cfg.start)?.invert(t),
        None => {
            let idx = cfg.start.index();
            let mut failure = None;
            let value = poly::invert_survival_generic(
                |s| match transform_general(cfg, s) {
                    Ok(v) => v[idx],
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                t,
            );
            match failure {
                Some(e) => Err(e),
                None => value,
            }
        }
    }
}

/// Exponential configurations: decides `τ₀ ≥_lt τ₃` (or equality in law).
///
/// * `μ₁ = μ₂`: `τ₀` and `τ₃` are equal in law whatever the lifetimes.
/// * `λ₁ = λ₂`: `τ₀ ≥_lt τ₃` iff `μ₁ ≥ μ₂`.
/// * otherwise the transforms share a positive denominator and their
///   numerators differ by the constant `λ₁λ₂(μ₁-μ₂)`, so again
///   `τ₀ ≥_lt τ₃` iff `μ₁ ≥ μ₂`.
pub fn lt_allocation_criteria(
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
) -> Result<CriterionResult> {
    ExponentialRates::new(lambda1, lambda2, mu1, mu2)?;
    if mu1 == mu2 {
        return Ok(CriterionResult::decided(
            Rule::StEqualityEqualRepairs,
            Some(OrderRelation::St),
            true,
            true,
        ));
    }
    let (rule, margin) = if lambda1 == lambda2 {
        (Rule::LtAllocationEqualLifetimes, mu1 - mu2)
    } else {
        (
            Rule::LtAllocationRepairRates,
            lambda1 * lambda2 * (mu1 - mu2),
        )
    };
    let mut out = CriterionResult::decided(rule, Some(OrderRelation::Lt), margin >= 0.0, true);
    out.margin = Some(margin);
    Ok(out)
}

/// Which repair-order hypothesis established the lt order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepairBranch {
    /// `Y₁ ≤_st Y₂`.
    Stochastic,
    /// `Y₁ ≤_icv Y₂` with a decreasing lifetime density.
    IncreasingConcave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairOrderOutcome {
    pub verdict: OrderVerdict,
    pub branch: RepairBranch,
}

/// Units with identical lifetime laws: `τ₀ ≥_lt τ₃` when `Y₁ ≤_st Y₂`, or
/// when `Y₁ ≤_icv Y₂` and the lifetime density is decreasing. The
/// hypotheses are checked on `grid`.
pub fn lt_allocation_general(cfg: &GeneralColdConfig, grid: &[f64]) -> Result<RepairOrderOutcome> {
    if cfg.lifetime1 != cfg.lifetime2 {
        return Err(Error::NotApplicable(
            "lifetime laws of the two units differ",
        ));
    }
    let tol = order::TOL_CLOSED_FORM;
    let holds = |branch| {
        Ok(RepairOrderOutcome {
            verdict: OrderVerdict {
                relation: OrderRelation::Lt,
                status: Status::Holds,
                method: Method::Analytic,
                min_margin: 0.0,
                points: grid.len(),
            },
            branch,
        })
    };
    if order::check_order(&cfg.repair2, &cfg.repair1, OrderRelation::St, grid, tol)?.holds() {
        return holds(RepairBranch::Stochastic);
    }
    let icv = order::check_order(&cfg.repair2, &cfg.repair1, OrderRelation::Icv, grid, tol)?;
    let decreasing = cfg.lifetime1.has_density()
        && grid.windows(2).all(|w| {
            let (a, b) = (cfg.lifetime1.density(w[0]), cfg.lifetime1.density(w[1]));
            matches!((a, b), (Some(a), Some(b)) if b <= a * (1.0 + 1e-12))
        });
    if icv.holds() && decreasing {
        return holds(RepairBranch::IncreasingConcave);
    }
    Err(Error::NotApplicable(
        "neither repair-order hypothesis holds",
    ))
}

/// Two systems each started with a chosen unit: the one whose working unit
/// and waiting unit live longer and win their repair races more often has
/// the larger mean lifetime.
pub fn mttf_compare(a: &GeneralColdConfig, b: &GeneralColdConfig) -> Result<CriterionResult> {
    let (a, b) = (first_unit_working(a)?, first_unit_working(b)?);
    let rule = match (a.exponential_rates(), b.exponential_rates()) {
        (Some(_), Some(_)) => Rule::MttfExponentialRates,
        _ => Rule::MttfGeneral,
    };
    let fired = match (a.exponential_rates(), b.exponential_rates()) {
        (Some(r1), Some(r2)) => {
            r1.lambda1 <= r2.lambda1
                && r1.lambda2 <= r2.lambda2
                && r1.lambda1 * r2.mu2 <= r2.lambda1 * r1.mu2
                && r1.lambda2 * r2.mu1 <= r2.lambda2 * r1.mu1
        }
        _ => {
            a.lifetime1.mean() >= b.lifetime1.mean()
                && a.lifetime2.mean() >= b.lifetime2.mean()
                && prob_greater(&a.lifetime1, &a.repair2)?
                    >= prob_greater(&b.lifetime1, &b.repair2)?
                && prob_greater(&a.lifetime2, &a.repair1)?
                    >= prob_greater(&b.lifetime2, &b.repair1)?
        }
    };
    let (ea, eb) = (mttf(&a)?.means[0], mttf(&b)?.means[0]);
    if fired && ea < eb * (1.0 - 1e-12) {
        return Err(Error::Consistency(alloc::format!(
            "mean comparison rule fired but E[τ] = {ea} < {eb}"
        )));
    }
    let mut out = CriterionResult::decided(rule, None, fired, false);
    out.margin = Some(ea - eb);
    Ok(out)
}

fn first_unit_working(cfg: &GeneralColdConfig) -> Result<GeneralColdConfig> {
    match cfg.start {
        ColdStart::Tau0 => Ok(cfg.clone()),
        ColdStart::Tau3 => Ok(cfg.swapped()),
        _ => Err(Error::NotApplicable(
            "mean comparison needs a system started with one unit waiting",
        )),
    }
}

/// Step and extrapolation settings for [`solve_volterra`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolterraOptions {
    /// Grid step; defaults to `0.01 / (largest rate)`.
    pub step: Option<f64>,
    /// Combine the solutions at `h` and `h/2`; defaults to on when every
    /// law has a density.
    pub richardson: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub step: f64,
    pub extrapolated: bool,
    pub curves: [Curve; 4],
}

impl VolterraSolution {
    pub fn get(&self, start: ColdStart) -> &Curve {
        &self.curves[start.index()]
    }
}

pub const VOLTERRA_STEP_FACTOR: f64 = 0.01;
const MONOTONE_TOL: f64 = 1e-9;

/// Solves the renewal system on the uniform grid `0, h, …, horizon` by
/// product-integration trapezoid: the unknown survival is interpolated
/// linearly between nodes and integrated exactly against each measure,
/// so atoms of the laws are placed where they fall.
pub fn solve_volterra(
    cfg: &GeneralColdConfig,
    horizon: f64,
    options: VolterraOptions,
) -> Result<VolterraSolution> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be finite and positive",
        });
    }
    let rate = cfg
        .laws()
        .iter()
        .map(|d| d.rate_scale())
        .fold(0.0, f64::max);
    let target = options.step.unwrap_or(VOLTERRA_STEP_FACTOR / rate);
    if !(target > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: target,
            reason: "must be positive",
        });
    }
    let n = fm::ceil(horizon / target).max(1.0) as usize;
    let h = horizon / n as f64;
    let richardson = options.richardson.unwrap_or_else(|| cfg.all_smooth());
    let coarse = march(cfg, h, n)?;
    let values = if richardson {
        let fine = march(cfg, 0.5 * h, 2 * n)?;
        let mut out: [Vec<f64>; 4] = Default::default();
        for k in 0..4 {
            out[k] = (0..=n)
                .map(|i| ((4.0 * fine[k][2 * i] - coarse[k][i]) / 3.0).clamp(0.0, 1.0))
                .collect();
        }
        out
    } else {
        coarse
    };
    for v in &values {
        if let Some(i) = v.windows(2).position(|w| w[1] > w[0] + MONOTONE_TOL) {
            let _ = i;
            return Err(Error::RefineStep { suggested: 0.5 * h });
        }
    }
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let [v0, v1, v2, v3] = values;
    Ok(VolterraSolution {
        step: h,
        extrapolated: richardson,
        curves: [
            Curve::new(grid.clone(), v0)?,
            Curve::new(grid.clone(), v1)?,
            Curve::new(grid.clone(), v2)?,
            Curve::new(grid, v3)?,
        ],
    })
}

/// Per-lag weights of `∫ K(x) Φ(t - x) dF(x)` with `Φ` linear on cells.
/// `combined[m]` multiplies `Φ(t_n - m h)` for lags inside the support;
/// `w0[n]` is removed again at lag `n` because the cell `[t_n, t_{n+1}]`
/// lies beyond the integration range.
struct Kernel {
    combined: Vec<f64>,
    w0: Vec<f64>,
}

impl Kernel {
    fn build(
        measure: &Distribution,
        multiplier: Option<&Distribution>,
        h: f64,
        n: usize,
    ) -> Result<Self> {
        let k = |x: f64| multiplier.map_or(1.0, |g| g.cdf_left(x));
        let mut w0 = Vec::new();
        let mut w1 = Vec::new();
        let put = |j: usize, a: f64, b: f64, w0: &mut Vec<f64>, w1: &mut Vec<f64>| {
            if w0.len() <= j {
                w0.resize(j + 1, 0.0);
                w1.resize(j + 1, 0.0);
            }
            w0[j] += a;
            w1[j] += b;
        };
        let atoms = multiplier.map(|g| g.atoms()).unwrap_or_default();
        match measure {
            Distribution::Deterministic { .. } | Distribution::Empirical(_) => {
                let support = measure.atoms();
                let count = match measure {
                    Distribution::Empirical(e) => e.values().len() as f64,
                    _ => 1.0,
                };
                for a in support {
                    let j = fm::floor(a / h) as usize;
                    if j >= n {
                        continue;
                    }
                    let mass = match measure {
                        Distribution::Empirical(e) => {
                            e.values().iter().filter(|&&v| v == a).count() as f64 / count
                        }
                        _ => 1.0,
                    };
                    let frac = a / h - j as f64;
                    let kv = mass * k(a);
                    put(j, kv * (1.0 - frac), kv * frac, &mut w0, &mut w1);
                }
            }
            _ => {
                let tail = measure.upper_time(1e-17);
                let cells = (fm::ceil(tail / h) as usize).min(n);
                for j in 0..cells {
                    let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
                    let mut pts = vec![lo];
                    pts.extend(atoms.iter().copied().filter(|&a| a > lo && a < hi));
                    pts.push(hi);
                    let (mut a0, mut a1) = (0.0, 0.0);
                    for seg in pts.windows(2) {
                        let mut f0 =
                            |x: f64| k(x) * measure.density(x).unwrap_or(0.0) * (hi - x) / h;
                        a0 += quad::gk15(&mut f0, seg[0], seg[1]).value;
                        let mut f1 =
                            |x: f64| k(x) * measure.density(x).unwrap_or(0.0) * (x - lo) / h;
                        a1 += quad::gk15(&mut f1, seg[0], seg[1]).value;
                    }
                    put(j, a0, a1, &mut w0, &mut w1);
                }
            }
        }
        let len = w0.len();
        let mut combined = vec![0.0; len + 1];
        for m in 0..=len {
            combined[m] = w0.get(m).copied().unwrap_or(0.0) + if m > 0 { w1[m - 1] } else { 0.0 };
        }
        Ok(Self { combined, w0 })
    }

    /// `Σ_{m≥1} weight(m) Φ[n-m]` at step `n`.
    fn history(&self, phi: &[f64], n: usize) -> f64 {
        let top = n.min(self.combined.len() - 1);
        let mut acc = 0.0;
        for m in 1..=top {
            acc += self.combined[m] * phi[n - m];
        }
        if n < self.w0.len() {
            acc -= self.w0[n] * phi[0];
        }
        acc
    }

    fn implicit(&self) -> f64 {
        self.combined[0]
    }
}

fn march(cfg: &GeneralColdConfig, h: f64, n: usize) -> Result<[Vec<f64>; 4]> {
    let k0 = Kernel::build(&cfg.lifetime1, None, h, n)?;
    let k1 = Kernel::build(&cfg.lifetime2, Some(&cfg.repair1), h, n)?;
    let k2 = Kernel::build(&cfg.lifetime1, Some(&cfg.repair2), h, n)?;
    let k3 = Kernel::build(&cfg.lifetime2, None, h, n)?;
    let mut phi = [
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        vec![0.0; n + 1],
    ];
    let (a0, b0) = (k1.implicit(), k2.implicit());
    let det = 1.0 - a0 * b0;
    if det <= 0.0 {
        return Err(Error::RefineStep { suggested: 0.5 * h });
    }
    for i in 0..=n {
        let t = i as f64 * h;
        let (s1, s2) = (cfg.lifetime1.sf(t), cfg.lifetime2.sf(t));
        let r1 = s2 + k1.history(&phi[2], i);
        let r2 = s1 + k2.history(&phi[1], i);
        let p1 = (r1 + a0 * r2) / det;
        let p2 = r2 + b0 * p1;
        phi[1][i] = p1;
        phi[2][i] = p2;
        phi[0][i] = s1 + k0.implicit() * p1 + k0.history(&phi[1], i);
        phi[3][i] = s2 + k3.implicit() * p2 + k3.history(&phi[2], i);
    }
    Ok(phi)
}

/// Mean lifetime estimated from a survival curve on a uniform grid:
/// trapezoid over the grid plus an exponential tail fitted to the last
/// tenth of the points. An estimate only; [`mttf`] is exact.
pub fn mean_by_integration(curve: &Curve) -> f64 {
    let (g, v) = (curve.grid(), curve.values());
    let body: f64 = g
        .windows(2)
        .zip(v.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum();
    let last = g.len() - 1;
    let first = last - (g.len() / 10).max(1).min(last);
    let (s0, s1) = (v[first], v[last]);
    if s1 <= 0.0 || s0 <= s1 {
        return body;
    }
    let decay = fm::ln(s0 / s1) / (g[last] - g[first]);
    body + s1 / decay
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Verdict;

    fn exp(r: f64) -> Distribution {
        Distribution::exponential(r).unwrap()
    }

    fn det(t: f64) -> Distribution {
        Distribution::deterministic(t).unwrap()
    }

    fn example_config() -> GeneralColdConfig {
        GeneralColdConfig::new(exp(1.0), exp(2.0), det(0.4), det(1.0), ColdStart::Tau0).unwrap()
    }

    #[test]
    fn all_unit_rates_give_mean_three() {
        let cfg = GeneralColdConfig::exponential(1.0, 1.0, 1.0, 1.0, ColdStart::Tau0).unwrap();
        let m = mttf(&cfg).unwrap();
        assert!((m.means[0] - 3.0).abs() < 1e-12);
        assert_eq!(m.means[0], m.means[3]);
        assert_eq!(m.means[1], m.means[2]);
    }

    #[test]
    fn deterministic_repair_example() {
        let m = mttf(&example_config()).unwrap();
        // Plug-in oracle with P(X₂>Y₁) = e^{-0.8}, P(X₁>Y₂) = e^{-1}.
        let (p21, p12) = (fm::exp(-0.8), fm::exp(-1.0));
        let den = 1.0 - p12 * p21;
        let e0 = 1.0 + (0.5 + p21) / den;
        let e3 = 0.5 + (1.0 + 0.5 * p12) / den;
        assert!((m.means[0] - e0).abs() < 1e-14 && (m.means[3] - e3).abs() < 1e-14);
        assert!(
            (e0 - 2.13733).abs() < 5e-6 && (e3 - 1.91840).abs() < 5e-6,
            "{e0} {e3}"
        );
    }

    #[test]
    fn allocation_example() {
        let a = allocation_compare(&example_config()).unwrap();
        assert_eq!(a.preferred, Preference::Tau0);
        assert!((a.margin - 0.21893).abs() < 1e-5);
        let den = 1.0 - a.mttf.p12 * a.mttf.p21;
        assert!((a.margin * den - (a.reduced_lhs - a.reduced_rhs)).abs() < 1e-14);
        assert!(a.rules.contains(&(AllocationRule::ExpDetRatio, true)));
        let sym = GeneralColdConfig::new(exp(1.0), exp(1.0), det(0.3), det(0.3), ColdStart::Tau0)
            .unwrap();
        assert_eq!(allocation_compare(&sym).unwrap().preferred, Preference::Tie);
    }

    #[test]
    fn q_function_is_decreasing() {
        assert_eq!(q_function(0.0), 1.0);
        let xs = [1e-9, 0.1, 1.0, 5.0, 40.0];
        for w in xs.windows(2) {
            assert!(q_function(w[1]) < q_function(w[0]));
        }
    }

    #[test]
    fn divergent_mean_is_reported() {
        let cfg = GeneralColdConfig::new(exp(1.0), exp(1.0), det(0.0), det(0.0), ColdStart::Tau0)
            .unwrap();
        assert!(matches!(mttf(&cfg), Err(Error::DivergentMttf(_))));
    }

    #[test]
    fn exponential_transform_matches_mean_and_structure() {
        let r = ExponentialRates::new(1.3, 0.7, 2.1, 0.4).unwrap();
        let cfg = GeneralColdConfig::exponential(1.3, 0.7, 2.1, 0.4, ColdStart::Tau0).unwrap();
        let m = mttf(&cfg).unwrap();
        for start in ColdStart::ALL {
            let lt = laplace_phi(&r, start).unwrap();
            assert!(
                (lt.eval(0.0) - m.get(start)).abs() < 1e-12 * m.get(start),
                "{start:?}"
            );
            for &s in &[0.0, 0.3, 2.0, 11.0] {
                let generic = transform_general(&cfg, s).unwrap()[start.index()];
                assert!((lt.eval(s) - generic).abs() < 1e-9, "{start:?} s={s}");
            }
            assert!(lt.is_stable().unwrap());
        }
        // The closed mean formula with all rates one.
        let ones = laplace_phi(
            &ExponentialRates::new(1.0, 1.0, 1.0, 1.0).unwrap(),
            ColdStart::Tau0,
        )
        .unwrap();
        assert!((ones.eval(0.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tau0_relation_to_tau1() {
        // Φ̂₀ = (1 + λ₁ Φ̂₁) / (s + λ₁).
        let r = ExponentialRates::new(0.6, 1.9, 0.8, 3.0).unwrap();
        let t0 = laplace_phi(&r, ColdStart::Tau0).unwrap();
        let t1 = laplace_phi(&r, ColdStart::Tau1).unwrap();
        for &s in &[0.0, 0.5, 4.0] {
            let via = (1.0 + 0.6 * t1.eval(s)) / (s + 0.6);
            assert!((t0.eval(s) - via).abs() < 1e-13);
        }
    }

    #[test]
    fn equal_repairs_give_equal_transforms() {
        let r = ExponentialRates::new(1.0, 3.0, 2.0, 2.0).unwrap();
        let a = laplace_phi(&r, ColdStart::Tau0).unwrap().normalized();
        let b = laplace_phi(&r, ColdStart::Tau3).unwrap().normalized();
        for (x, y) in a.numerator().coeffs().iter().zip(b.numerator().coeffs()) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
        assert_eq!(a.denominator(), b.denominator());
    }

    #[test]
    fn lt_allocation_rules() {
        assert_eq!(
            lt_allocation_criteria(1.0, 1.0, 1.0, 1.0).unwrap().rule,
            Rule::StEqualityEqualRepairs
        );
        let r = lt_allocation_criteria(1.0, 1.0, 2.0, 1.0).unwrap();
        assert!(r.holds() && r.necessary_and_sufficient);
        assert_eq!(
            lt_allocation_criteria(1.0, 1.0, 1.0, 2.0).unwrap().verdict,
            Verdict::DoesNotHold
        );
        assert!(lt_allocation_criteria(1.0, 3.0, 2.0, 2.0).unwrap().holds());
        // The decision agrees with transform values on a grid.
        for &(l1, l2, m1, m2) in &[
            (1.0, 2.0, 3.0, 1.0),
            (2.0, 1.0, 1.0, 3.0),
            (0.5, 4.0, 1.0, 1.5),
        ] {
            let r = ExponentialRates::new(l1, l2, m1, m2).unwrap();
            let a = laplace_phi(&r, ColdStart::Tau0).unwrap();
            let b = laplace_phi(&r, ColdStart::Tau3).unwrap();
            let grid_holds = (0..200).all(|i| {
                let s = 1e-3 * fm::powf(1e6, i as f64 / 199.0);
                a.eval(s) >= b.eval(s)
            });
            let decided = lt_allocation_criteria(l1, l2, m1, m2).unwrap().holds();
            assert_eq!(decided, grid_holds, "({l1},{l2},{m1},{m2})");
        }
    }

    #[test]
    fn numerators_differ_by_a_constant() {
        for &(l1, l2, m1, m2) in &[(1.0, 2.0, 3.0, 1.0), (0.3, 7.0, 0.2, 11.0)] {
            let r = ExponentialRates::new(l1, l2, m1, m2).unwrap();
            let diff = tau0_numerator(&r).sub(&tau0_numerator(&r.swapped()));
            let c = diff.coeffs();
            assert!((c[0] - l1 * l2 * (m1 - m2)).abs() < 1e-12 * (1.0 + c[0].abs()));
            for &x in &c[1..] {
                assert!(x.abs() < 1e-12, "{c:?}");
            }
        }
    }

    #[test]
    fn lt_allocation_general_branches() {
        let grid = crate::curve::log_grid(1e-4, 60.0, 600).unwrap();
        let same = GeneralColdConfig::new(exp(1.0), exp(1.0), exp(2.0), exp(2.0), ColdStart::Tau0)
            .unwrap();
        assert_eq!(
            lt_allocation_general(&same, &grid).unwrap().branch,
            RepairBranch::Stochastic
        );
        let st = GeneralColdConfig::new(exp(1.0), exp(1.0), exp(2.0), exp(1.0), ColdStart::Tau0)
            .unwrap();
        assert_eq!(
            lt_allocation_general(&st, &grid).unwrap().branch,
            RepairBranch::Stochastic
        );
        let icv = GeneralColdConfig::new(exp(1.0), exp(1.0), exp(1.0), det(1.0), ColdStart::Tau0)
            .unwrap();
        assert_eq!(
            lt_allocation_general(&icv, &grid).unwrap().branch,
            RepairBranch::IncreasingConcave
        );
        let t = transform_general(&icv, 0.7).unwrap();
        assert!(t[0] >= t[3]);
        let mixed = GeneralColdConfig::new(exp(1.0), exp(2.0), exp(1.0), exp(1.0), ColdStart::Tau0)
            .unwrap();
        assert!(lt_allocation_general(&mixed, &grid).is_err());
    }

    #[test]
    fn mttf_compare_examples() {
        let a = GeneralColdConfig::exponential(1.0, 1.0, 2.0, 2.0, ColdStart::Tau0).unwrap();
        let b = GeneralColdConfig::exponential(2.0, 2.0, 1.0, 1.0, ColdStart::Tau0).unwrap();
        assert!(mttf_compare(&a, &b).unwrap().holds());
        assert!(mttf_compare(&a, &a).unwrap().holds());
        assert!(!mttf_compare(&b, &a).unwrap().is_conclusive());
        let g = example_config();
        assert!(mttf_compare(&g, &g).unwrap().holds());
    }

    #[test]
    fn volterra_matches_inversion_for_exponentials() {
        let cfg = GeneralColdConfig::exponential(1.0, 1.0, 1.0, 1.0, ColdStart::Tau0).unwrap();
        let sol = solve_volterra(&cfg, 12.0, VolterraOptions::default()).unwrap();
        assert!(sol.extrapolated);
        let lt = laplace_phi(
            &ExponentialRates::new(1.0, 1.0, 1.0, 1.0).unwrap(),
            ColdStart::Tau0,
        )
        .unwrap();
        let pf = lt.partial_fractions().unwrap();
        let mut worst: f64 = 0.0;
        for (t, v) in sol.get(ColdStart::Tau0).iter() {
            worst = worst.max((v - pf.eval(t).unwrap()).abs());
        }
        assert!(worst < 1e-6, "{worst}");
        for c in &sol.curves {
            assert_eq!(c.values()[0], 1.0);
        }
        let long = solve_volterra(&cfg, 60.0, VolterraOptions::default()).unwrap();
        let mean = mean_by_integration(long.get(ColdStart::Tau0));
        assert!((mean - 3.0).abs() < 1e-4, "{mean}");
    }

    #[test]
    fn volterra_with_deterministic_repairs() {
        let cfg = example_config();
        let sol = solve_volterra(&cfg, 40.0, VolterraOptions::default()).unwrap();
        assert!(!sol.extrapolated);
        let mean = mean_by_integration(sol.get(ColdStart::Tau0));
        assert!((mean - mttf(&cfg).unwrap().means[0]).abs() < 1e-3, "{mean}");
    }

    #[test]
    fn swap_symmetry_of_means() {
        let cfg = example_config();
        let (m, s) = (mttf(&cfg).unwrap(), mttf(&cfg.swapped()).unwrap());
        assert_eq!(m.means[0], s.means[3]);
        assert_eq!(m.means[1], s.means[2]);
    }
}
