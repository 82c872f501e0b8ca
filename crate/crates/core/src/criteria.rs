//! Closed-form ordering criteria in terms of the rates alone.
//!
//! Each function returns a [`CriterionResult`]. Rules that are only
//! sufficient answer `Holds` or `NotApplicable`, never `DoesNotHold`; a
//! `DoesNotHold` comes from an if-and-only-if rule or from a condition that
//! is known to be necessary.

use alloc::vec::Vec;

use crate::error::Result;
use crate::fm;
use crate::markov::{ColdConfig, InitialState, MarkovSystem, SystemKind, WarmConfig};
use crate::order::OrderRelation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    DoesNotHold,
    NotApplicable(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    WarmLrIff,
    WarmLrSufficient,
    WarmHrEqualLifetimes,
    WarmHrSufficient,
    ColdLrIff,
    ColdLrRepairDominance,
    ColdLrFastCompetitor,
    ColdHrEqualLifetimes,
    ColdHrRateRatio,
    ColdHrQuarticCertificate,
    DegradedHrSufficient,
    LargeRepairLr,
    LtAllocationEqualLifetimes,
    StEqualityEqualRepairs,
    LtAllocationRepairRates,
    LtAllocationRepairOrder,
    MttfAllocation,
    MttfExponentialRates,
    MttfGeneral,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Self::WarmLrIff => "warm-lr-iff",
            Self::WarmLrSufficient => "warm-lr-sufficient",
            Self::WarmHrEqualLifetimes => "warm-hr-equal-lifetimes",
            Self::WarmHrSufficient => "warm-hr-sufficient",
            Self::ColdLrIff => "cold-lr-iff",
            Self::ColdLrRepairDominance => "cold-lr-repair-dominance",
            Self::ColdLrFastCompetitor => "cold-lr-fast-competitor",
            Self::ColdHrEqualLifetimes => "cold-hr-equal-lifetimes",
            Self::ColdHrRateRatio => "cold-hr-rate-ratio",
            Self::ColdHrQuarticCertificate => "cold-hr-quartic-certificate",
            Self::DegradedHrSufficient => "degraded-hr-sufficient",
            Self::LargeRepairLr => "large-repair-lr",
            Self::LtAllocationEqualLifetimes => "lt-allocation-equal-lifetimes",
            Self::StEqualityEqualRepairs => "st-equality-equal-repairs",
            Self::LtAllocationRepairRates => "lt-allocation-repair-rates",
            Self::LtAllocationRepairOrder => "lt-allocation-repair-order",
            Self::MttfAllocation => "mttf-allocation",
            Self::MttfExponentialRates => "mttf-exponential-rates",
            Self::MttfGeneral => "mttf-general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionResult {
    pub verdict: Verdict,
    pub rule: Rule,
    /// `None` for comparisons of means.
    pub relation: Option<OrderRelation>,
    pub necessary_and_sufficient: bool,
    /// `lhs - rhs` of the deciding inequality, when there is a single one.
    pub margin: Option<f64>,
    /// For asymptotic rules, the repair rate beyond which the verdict is exact.
    pub threshold: Option<f64>,
}

impl CriterionResult {
    fn new(rule: Rule, relation: OrderRelation, verdict: Verdict, iff: bool) -> Self {
        Self {
            verdict,
            rule,
            relation: Some(relation),
            necessary_and_sufficient: iff,
            margin: None,
            threshold: None,
        }
    }

    pub(crate) fn decided(
        rule: Rule,
        relation: Option<OrderRelation>,
        holds: bool,
        iff: bool,
    ) -> Self {
        Self {
            verdict: if holds {
                Verdict::Holds
            } else if iff {
                Verdict::DoesNotHold
            } else {
                Verdict::NotApplicable("hypotheses not satisfied")
            },
            rule,
            relation,
            necessary_and_sufficient: iff,
            margin: None,
            threshold: None,
        }
    }

    fn with_margin(mut self, margin: f64) -> Self {
        self.margin = Some(margin);
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// `true` for `Holds` and `DoesNotHold`.
    pub fn is_conclusive(&self) -> bool {
        !matches!(self.verdict, Verdict::NotApplicable(_))
    }
}

/// `max(x, 0)`.
pub fn positive_part(x: f64) -> f64 {
    x.max(0.0)
}

fn not_applicable(rule: Rule, relation: OrderRelation, reason: &'static str) -> CriterionResult {
    CriterionResult::new(rule, relation, Verdict::NotApplicable(reason), false)
}

fn sufficient(rule: Rule, relation: OrderRelation, fired: bool) -> CriterionResult {
    CriterionResult::decided(rule, Some(relation), fired, false)
}

/// `2(λ₂₁-λ₁₁) - λ₁₂ + λ₂₂ + μ₂ - μ₁`, the left side of the lr condition.
fn lr_drift(c1: &WarmConfig, c2: &WarmConfig) -> f64 {
    2.0 * (c2.lambda1() - c1.lambda1()) - c1.lambda2() + c2.lambda2() + c2.mu() - c1.mu()
}

/// Fresh-pair warm systems: system 1 ≥_lr system 2 iff
/// `2(λ₂₁-λ₁₁) - λ₁₂ + λ₂₂ + μ₂ - μ₁ ≥ (a₂ - a₁)⁺`.
pub fn warm_lr_iff(c1: &WarmConfig, c2: &WarmConfig) -> CriterionResult {
    let margin = lr_drift(c1, c2) - positive_part(c2.a() - c1.a());
    CriterionResult::decided(
        Rule::WarmLrIff,
        Some(OrderRelation::Lr),
        margin >= 0.0,
        true,
    )
    .with_margin(margin)
}

/// `μ₁ ≥ μ₂`, `λ₁₁ ≤ λ₂₁` and `2(λ₂₁-λ₁₁) - λ₁₂ + λ₂₂ + μ₂ - μ₁ ≥ 0`.
pub fn warm_lr_sufficient(c1: &WarmConfig, c2: &WarmConfig) -> CriterionResult {
    let drift = lr_drift(c1, c2);
    let fired = c1.mu() >= c2.mu() && c1.lambda1() <= c2.lambda1() && drift >= 0.0;
    sufficient(Rule::WarmLrSufficient, OrderRelation::Lr, fired).with_margin(drift)
}

/// Shared failure rates: system 1 ≥_hr system 2 iff `μ₁ ≥ μ₂`.
pub fn warm_hr_iff_equal_lifetimes(
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
) -> Result<CriterionResult> {
    WarmConfig::new(lambda1, lambda2, mu1)?;
    WarmConfig::new(lambda1, lambda2, mu2)?;
    Ok(CriterionResult::decided(
        Rule::WarmHrEqualLifetimes,
        Some(OrderRelation::Hr),
        mu1 >= mu2,
        true,
    )
    .with_margin(mu1 - mu2))
}

/// `λ₁₁ ≤ λ₂₁`, `μ₁ ≥ μ₂` and `2(λ₂₁-λ₁₁) ≥ λ₁₂ - λ₂₂`.
pub fn warm_hr_sufficient(c1: &WarmConfig, c2: &WarmConfig) -> CriterionResult {
    let fired = c1.lambda1() <= c2.lambda1()
        && c1.mu() >= c2.mu()
        && 2.0 * (c2.lambda1() - c1.lambda1()) >= c1.lambda2() - c2.lambda2();
    sufficient(Rule::WarmHrSufficient, OrderRelation::Hr, fired)
}

/// Cold systems: system 1 ≥_lr system 2 iff
/// `2(λ₂-λ₁) + μ₂ - μ₁ ≥ (b₂ - b₁)⁺`.
pub fn cold_lr_iff(c1: &ColdConfig, c2: &ColdConfig) -> CriterionResult {
    let margin =
        2.0 * (c2.lambda() - c1.lambda()) + c2.mu() - c1.mu() - positive_part(c2.b() - c1.b());
    CriterionResult::decided(
        Rule::ColdLrIff,
        Some(OrderRelation::Lr),
        margin >= 0.0,
        true,
    )
    .with_margin(margin)
}

/// Either `2(λ₂-λ₁) ≥ μ₁-μ₂` with `μ₁ ≥ μ₂`, or `μ₁ ≤ μ₂` with
/// `λ₂ ≥ 2 max(λ₁, μ₂)`. The rule that fired is reported.
pub fn cold_lr_sufficient_rules(c1: &ColdConfig, c2: &ColdConfig) -> CriterionResult {
    let (l1, l2, m1, m2) = (c1.lambda(), c2.lambda(), c1.mu(), c2.mu());
    if m1 >= m2 && 2.0 * (l2 - l1) >= m1 - m2 {
        return sufficient(Rule::ColdLrRepairDominance, OrderRelation::Lr, true);
    }
    if m1 <= m2 && l2 >= 2.0 * l1.max(m2) {
        return sufficient(Rule::ColdLrFastCompetitor, OrderRelation::Lr, true);
    }
    not_applicable(
        Rule::ColdLrRepairDominance,
        OrderRelation::Lr,
        "no sufficient rule fires",
    )
}

/// Shared failure rate: cold system 1 ≥_hr system 2 iff `μ₁ ≥ μ₂`.
pub fn cold_hr_iff_equal_lifetimes(lambda: f64, mu1: f64, mu2: f64) -> Result<CriterionResult> {
    ColdConfig::new(lambda, mu1)?;
    ColdConfig::new(lambda, mu2)?;
    Ok(CriterionResult::decided(
        Rule::ColdHrEqualLifetimes,
        Some(OrderRelation::Hr),
        mu1 >= mu2,
        true,
    )
    .with_margin(mu1 - mu2))
}

/// `λ₁ ≤ λ₂` and `μ₁ λ₂² ≥ μ₂ λ₁²`; failing that, `λ₁ ≤ λ₂` together with
/// `λ₁²(2λ₂+μ₂) ≤ λ₂²(2λ₁+μ₁)` and `λ₁⁴ b₂² ≤ λ₂⁴ b₁²`, which bound the two
/// limits of the hazard ratio.
pub fn cold_hr_sufficient(c1: &ColdConfig, c2: &ColdConfig) -> CriterionResult {
    let (l1, l2, m1, m2) = (c1.lambda(), c2.lambda(), c1.mu(), c2.mu());
    if l1 > l2 {
        return not_applicable(Rule::ColdHrRateRatio, OrderRelation::Hr, "needs λ₁ ≤ λ₂");
    }
    if m1 * l2 * l2 >= m2 * l1 * l1 {
        return sufficient(Rule::ColdHrRateRatio, OrderRelation::Hr, true);
    }
    let (q1, q2) = (l1 * l1, l2 * l2);
    let constant_part = q1 * (2.0 * l2 + m2) <= q2 * (2.0 * l1 + m1);
    let limit_part = q1 * q1 * (m2 * m2 + 4.0 * l2 * m2) <= q2 * q2 * (m1 * m1 + 4.0 * l1 * m1);
    sufficient(
        Rule::ColdHrQuarticCertificate,
        OrderRelation::Hr,
        constant_part && limit_part,
    )
}

/// Degraded-start warm systems: `λ₁₁ ≤ λ₂₁`, `μ₁ ≥ μ₂` and
/// `λ₁₂ μ₂ ≤ μ₁ λ₂₂` give system 1 ≥_hr system 2. Since the hazards start
/// at `λ₁₁` and `λ₂₁`, `λ₁₁ > λ₂₁` rules the order out.
pub fn warm_star_hr_sufficient(c1: &WarmConfig, c2: &WarmConfig) -> CriterionResult {
    let rule = Rule::DegradedHrSufficient;
    if c1.lambda1() > c2.lambda1() {
        return CriterionResult::new(rule, OrderRelation::Hr, Verdict::DoesNotHold, false);
    }
    let fired = c1.mu() >= c2.mu() && c1.lambda2() * c2.mu() <= c1.mu() * c2.lambda2();
    sufficient(rule, OrderRelation::Hr, fired)
}

/// Two warm systems sharing a repair rate `μ`, viewed as functions of `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedRepairPair {
    pub principal1: f64,
    pub standby1: f64,
    pub principal2: f64,
    pub standby2: f64,
}

pub const THRESHOLD_RANGE: (f64, f64) = (1e-6, 1e6);
pub const THRESHOLD_TOL: f64 = 1e-6;

impl SharedRepairPair {
    fn a(principal: f64, standby: f64, mu: f64) -> f64 {
        let s = standby + mu;
        fm::sqrt(s * s + 4.0 * principal * mu)
    }

    /// `a₂(μ) - a₁(μ)`.
    pub fn gap(&self, mu: f64) -> f64 {
        Self::a(self.principal2, self.standby2, mu) - Self::a(self.principal1, self.standby1, mu)
    }

    /// `d/dμ (a₂(μ) - a₁(μ))`.
    pub fn gap_slope(&self, mu: f64) -> f64 {
        (mu + self.standby2 + 2.0 * self.principal2) / Self::a(self.principal2, self.standby2, mu)
            - (mu + self.standby1 + 2.0 * self.principal1)
                / Self::a(self.principal1, self.standby1, mu)
    }

    /// `2(λ₂₁-λ₁₁) - λ₁₂ + λ₂₂`, the `μ`-free part of the lr condition.
    pub fn drift(&self) -> f64 {
        2.0 * (self.principal2 - self.principal1) - self.standby1 + self.standby2
    }

    pub fn lr_holds(&self, mu: f64) -> bool {
        self.drift() >= positive_part(self.gap(mu))
    }

    /// Smallest `μ` (to within `1e-6`) from which the lr condition holds,
    /// by bisection on `[1e-6, 1e6]`. `Some(0.0)` when it already holds at
    /// the left end, `None` when it fails at the right end.
    pub fn lr_threshold(&self) -> Option<f64> {
        let (mut lo, mut hi) = THRESHOLD_RANGE;
        if self.lr_holds(lo) {
            return Some(0.0);
        }
        if !self.lr_holds(hi) {
            return None;
        }
        while hi - lo > THRESHOLD_TOL {
            let mid = 0.5 * (lo + hi);
            if self.lr_holds(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    /// First `μ` in `[1e-6, 1e6]` where the gap turns from decreasing to
    /// increasing, located to within `1e-6`.
    pub fn gap_turning_point(&self) -> Option<f64> {
        let (lo_end, hi_end) = THRESHOLD_RANGE;
        let steps = 2400;
        let ratio = fm::powf(hi_end / lo_end, 1.0 / steps as f64);
        let mut prev = lo_end;
        for i in 1..=steps {
            let next = lo_end * fm::powf(ratio, i as f64);
            if self.gap_slope(prev) < 0.0 && self.gap_slope(next) >= 0.0 {
                let (mut lo, mut hi) = (prev, next);
                while hi - lo > THRESHOLD_TOL {
                    let mid = 0.5 * (lo + hi);
                    if self.gap_slope(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev = next;
        }
        None
    }
}

/// For a shared, large repair rate the lr order between fresh-pair warm
/// systems holds iff `2(λ₂₁-λ₁₁) - λ₁₂ + λ₂₂ ≥ 0`. The threshold beyond
/// which this is exact is reported alongside.
pub fn large_mu_asymptotic_lr(c1: &WarmConfig, c2: &WarmConfig) -> CriterionResult {
    let rule = Rule::LargeRepairLr;
    if c1.mu() != c2.mu() {
        return not_applicable(rule, OrderRelation::Lr, "repair rates differ");
    }
    let pair = SharedRepairPair {
        principal1: c1.lambda1(),
        standby1: c1.lambda2(),
        principal2: c2.lambda1(),
        standby2: c2.lambda2(),
    };
    let drift = pair.drift();
    let mut out = CriterionResult::decided(rule, Some(OrderRelation::Lr), drift >= 0.0, true)
        .with_margin(drift);
    if drift >= 0.0 {
        out.threshold = pair.lr_threshold();
    }
    out
}

/// Every rule that speaks to `a ≥ b` in `rel`, iff rules first.
pub fn analytic_verdicts(
    a: &MarkovSystem,
    b: &MarkovSystem,
    rel: OrderRelation,
) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    let (c1, c2) = (a.config(), b.config());
    let same_lambdas = c1.lambda1() == c2.lambda1() && c1.lambda2() == c2.lambda2();
    let both_cold = a.kind() == SystemKind::Cold && b.kind() == SystemKind::Cold;
    match (a.state(), b.state()) {
        (InitialState::FreshPair, InitialState::FreshPair) => match rel {
            OrderRelation::Lr => {
                out.push(warm_lr_iff(c1, c2));
                if both_cold {
                    let (k1, k2) = (cold_of(c1), cold_of(c2));
                    out.push(cold_lr_iff(&k1, &k2));
                    out.push(cold_lr_sufficient_rules(&k1, &k2));
                } else {
                    out.push(warm_lr_sufficient(c1, c2));
                }
                if c1.mu() == c2.mu() {
                    out.push(large_mu_asymptotic_lr(c1, c2));
                }
            }
            OrderRelation::Hr => {
                if same_lambdas {
                    let r = if both_cold {
                        cold_hr_iff_equal_lifetimes(c1.lambda1(), c1.mu(), c2.mu())
                    } else {
                        warm_hr_iff_equal_lifetimes(c1.lambda1(), c1.lambda2(), c1.mu(), c2.mu())
                    };
                    out.extend(r.ok());
                }
                if both_cold {
                    out.push(cold_hr_sufficient(&cold_of(c1), &cold_of(c2)));
                }
                out.push(warm_hr_sufficient(c1, c2));
            }
            _ => {}
        },
        (InitialState::DegradedStart, InitialState::DegradedStart) if rel == OrderRelation::Hr => {
            out.push(warm_star_hr_sufficient(c1, c2));
        }
        _ => {}
    }
    out
}

fn cold_of(c: &WarmConfig) -> ColdConfig {
    ColdConfig::new(c.lambda1(), c.mu()).expect("validated rates")
}

/// Folds several results for the same question into one verdict: the
/// first conclusive answer wins.
pub fn combine(results: &[CriterionResult]) -> Option<&CriterionResult> {
    results.iter().find(|r| r.is_conclusive())
}
