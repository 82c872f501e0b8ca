//! Numeric checks of the five stochastic orders on time (or transform) grids.
//!
//! [`check_order`] answers "is `A` at least `B`" in the given relation:
//!
//! | relation | `A ≥ B` means                                  |
//! |----------|------------------------------------------------|
//! | `st`     | `S_A(t) ≥ S_B(t)`                              |
//! | `hr`     | `r_A(t) ≤ r_B(t)`                              |
//! | `lr`     | `f_A(t) / f_B(t)` nondecreasing                |
//! | `icv`    | `∫₀ᵗ F_A ≤ ∫₀ᵗ F_B`                            |
//! | `lt`     | `∫₀^∞ e^{-st} S_A ≥ ∫₀^∞ e^{-st} S_B`          |
//!
//! and `lr ⇒ hr ⇒ st ⇒ icv ⇒ lt`.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::curve::{log_grid, validate_grid};
use crate::error::{Error, Result};
use crate::law::LifetimeLaw;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderRelation {
    Lt,
    Icv,
    St,
    Hr,
    Lr,
}

impl OrderRelation {
    /// Strongest first, so each relation implies every later one.
    pub const CHAIN: [OrderRelation; 5] = [Self::Lr, Self::Hr, Self::St, Self::Icv, Self::Lt];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lt => "lt",
            Self::Icv => "icv",
            Self::St => "st",
            Self::Hr => "hr",
            Self::Lr => "lr",
        }
    }

    /// Position in the implication chain, `lt = 0` up to `lr = 4`.
    pub fn strength(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for OrderRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lt" => Ok(Self::Lt),
            "icv" => Ok(Self::Icv),
            "st" => Ok(Self::St),
            "hr" => Ok(Self::Hr),
            "lr" => Ok(Self::Lr),
            _ => Err(Error::InvalidSpec(
                "relation must be one of lt, icv, st, hr, lr",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    Holds,
    /// The defining inequality is violated beyond tolerance at `witness`, a
    /// time (or a transform argument for `lt`).
    Fails {
        witness: f64,
        lhs: f64,
        rhs: f64,
    },
    /// No violation beyond tolerance, but some margin is negative.
    Inconclusive {
        min_margin: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderVerdict {
    pub relation: OrderRelation,
    pub status: Status,
    pub method: Method,
    /// Smallest `lhs - rhs` over all checked points; negative margins within
    /// rounding noise are reported as `0`.
    pub min_margin: f64,
    pub points: usize,
}

impl OrderVerdict {
    pub fn holds(&self) -> bool {
        matches!(self.status, Status::Holds)
    }

    pub fn fails(&self) -> bool {
        matches!(self.status, Status::Fails { .. })
    }

    pub fn is_conclusive(&self) -> bool {
        !matches!(self.status, Status::Inconclusive { .. })
    }
}

/// Default tolerance for laws evaluated in closed form.
pub const TOL_CLOSED_FORM: f64 = 1e-9;
/// Floor applied to the tolerance of quadrature-backed comparisons.
pub const TOL_QUADRATURE: f64 = 1e-6;
pub const DEFAULT_GRID_POINTS: usize = 400;
pub const LT_GRID_POINTS: usize = 49;

/// 400 log-spaced times from `1e-4 / max rate` to the point where every
/// survival function is below `1e-8`.
pub fn default_grid(laws: &[&dyn LifetimeLaw]) -> Result<Vec<f64>> {
    grid_with_points(laws, DEFAULT_GRID_POINTS)
}

pub fn grid_with_points(laws: &[&dyn LifetimeLaw], n: usize) -> Result<Vec<f64>> {
    if laws.is_empty() {
        return Err(Error::InvalidGrid("no laws to build a grid for"));
    }
    let rate = laws.iter().map(|l| l.rate_scale()).fold(0.0, f64::max);
    let hi = laws.iter().map(|l| l.tail_time(1e-8)).fold(0.0, f64::max);
    let lo = 1e-4 / rate;
    log_grid(lo, hi.max(2.0 * lo), n)
}

/// Transform arguments for the `lt` check, log-spaced over `[1e-3, 1e3]`.
pub fn lt_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, LT_GRID_POINTS).expect("constant grid is valid")
}

const NOISE: f64 = 16.0 * f64::EPSILON;

struct Tally {
    relation: OrderRelation,
    tol: f64,
    min_margin: f64,
    points: usize,
    inconclusive: bool,
    failure: Option<(f64, f64, f64)>,
}

impl Tally {
    fn new(relation: OrderRelation, tol: f64) -> Self {
        Self {
            relation,
            tol,
            min_margin: f64::INFINITY,
            points: 0,
            inconclusive: false,
            failure: None,
        }
    }

    /// Records the requirement `lhs ≥ rhs` at `at`; `magnitude` sizes the
    /// rounding noise of the two operands.
    fn push(&mut self, at: f64, lhs: f64, rhs: f64, magnitude: f64) {
        self.points += 1;
        let mut margin = lhs - rhs;
        if margin.abs() <= NOISE * magnitude {
            margin = 0.0;
        }
        self.min_margin = self.min_margin.min(margin);
        if margin < -self.tol * (1.0 + lhs.abs() + rhs.abs()) {
            if self.failure.is_none() {
                self.failure = Some((at, lhs, rhs));
            }
        } else if margin < 0.0 {
            self.inconclusive = true;
        }
    }

    fn finish(self) -> OrderVerdict {
        let status = match self.failure {
            Some((witness, lhs, rhs)) => Status::Fails { witness, lhs, rhs },
            None if self.inconclusive => Status::Inconclusive {
                min_margin: self.min_margin,
            },
            None => Status::Holds,
        };
        OrderVerdict {
            relation: self.relation,
            status,
            method: Method::Numeric,
            min_margin: self.min_margin,
            points: self.points,
        }
    }
}

/// Decides `A ≥ B` in `rel` on `grid` (times; the `lt` check uses its own
/// transform grid from [`lt_grid`]).
///
/// A deficit counts as a violation when it exceeds
/// `tol · (1 + |lhs| + |rhs|)`. `lt` is quadrature-backed, so its tolerance
/// is never taken below [`TOL_QUADRATURE`].
pub fn check_order<A, B>(
    a: &A,
    b: &B,
    rel: OrderRelation,
    grid: &[f64],
    tol: f64,
) -> Result<OrderVerdict>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    validate_grid(grid)?;
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be nonnegative",
        });
    }
    let verdict = match rel {
        OrderRelation::St => {
            let mut tally = Tally::new(rel, tol);
            for &t in grid {
                let (sa, sb) = (a.sf(t), b.sf(t));
                tally.push(t, sa, sb, sa + sb);
            }
            tally.finish()
        }
        OrderRelation::Hr => check_hr(a, b, grid, tol),
        OrderRelation::Lr => check_lr(a, b, grid, tol)?,
        OrderRelation::Icv => {
            let (ia, ib) = (integrated_cdf(a, grid), integrated_cdf(b, grid));
            let mut tally = Tally::new(rel, tol);
            for ((&t, &la), &lb) in grid.iter().zip(&ia).zip(&ib) {
                tally.push(t, lb, la, la + lb);
            }
            tally.finish()
        }
        OrderRelation::Lt => {
            let mut tally = Tally::new(rel, tol.max(TOL_QUADRATURE));
            for s in lt_grid() {
                let (la, lb) = (a.laplace_sf(s)?, b.laplace_sf(s)?);
                tally.push(s, la, lb, la + lb);
            }
            tally.finish()
        }
    };
    Ok(verdict)
}

fn check_hr<A, B>(a: &A, b: &B, grid: &[f64], tol: f64) -> OrderVerdict
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    let mut tally = Tally::new(OrderRelation::Hr, tol);
    let both_smooth = a.pdf(grid[0]).is_some() && b.pdf(grid[0]).is_some();
    if both_smooth {
        for &t in grid {
            let ra = a.hazard(t).unwrap_or(f64::INFINITY);
            let rb = b.hazard(t).unwrap_or(f64::INFINITY);
            tally.push(t, rb, ra, ra + rb);
        }
    } else {
        // S_A / S_B nondecreasing, cross-multiplied.
        for w in grid.windows(2) {
            let lhs = a.sf(w[1]) * b.sf(w[0]);
            let rhs = a.sf(w[0]) * b.sf(w[1]);
            tally.push(w[0], lhs, rhs, lhs + rhs);
        }
    }
    tally.finish()
}

fn log_ratio<A, B>(a: &A, b: &B, t: f64) -> Result<(f64, f64)>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    match (a.ln_pdf(t), b.ln_pdf(t)) {
        (Some(la), Some(lb)) => Ok((la - lb, la.abs() + lb.abs())),
        _ => Err(Error::UnsupportedRelation(OrderRelation::Lr)),
    }
}

fn check_lr<A, B>(a: &A, b: &B, grid: &[f64], tol: f64) -> Result<OrderVerdict>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    let mut tally = Tally::new(OrderRelation::Lr, tol);
    let (mut prev, mut prev_mag) = log_ratio(a, b, grid[0])?;
    for w in grid.windows(2) {
        let (next, next_mag) = log_ratio(a, b, w[1])?;
        tally.push(w[0], next, prev, prev_mag + next_mag);
        prev = next;
        prev_mag = next_mag;
    }
    Ok(tally.finish())
}

/// `∫₀ᵗ F` at every grid time, by the trapezoid rule on `[0, t₀] ∪ grid`.
fn integrated_cdf<L: LifetimeLaw + ?Sized>(law: &L, grid: &[f64]) -> Vec<f64> {
    let breaks = law.breakpoints();
    let mut cdf = |x: f64| 1.0 - law.sf(x);
    let mut out = Vec::with_capacity(grid.len());
    let mut lo = 0.0;
    let mut acc = 0.0;
    for &t in grid {
        let mut from = lo;
        for &b in breaks.iter().filter(|&&b| b > lo && b < t) {
            acc += quad::gk15(&mut cdf, from, b).value;
            from = b;
        }
        acc += quad::gk15(&mut cdf, from, t).value;
        out.push(acc);
        lo = t;
    }
    out
}

/// Number of sign changes, beyond tolerance, of the discrete slope of
/// `ln f_A - ln f_B` along the grid.
pub fn lr_slope_sign_changes<A, B>(a: &A, b: &B, grid: &[f64], tol: f64) -> Result<usize>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    validate_grid(grid)?;
    let mut changes = 0;
    let mut last_sign = 0i8;
    let (mut prev, mut prev_mag) = log_ratio(a, b, grid[0])?;
    for w in grid.windows(2) {
        let (next, next_mag) = log_ratio(a, b, w[1])?;
        let slope = next - prev;
        let threshold = (tol * (1.0 + prev.abs() + next.abs())).max(NOISE * (prev_mag + next_mag));
        let sign = if slope > threshold {
            1
        } else if slope < -threshold {
            -1
        } else {
            0
        };
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                changes += 1;
            }
            last_sign = sign;
        }
        prev = next;
        prev_mag = next_mag;
    }
    Ok(changes)
}

/// Verdicts for every relation of the chain, strongest first. `lr` is
/// `None` when a law has no density.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub verdicts: [Option<OrderVerdict>; 5],
}

impl AuditReport {
    pub fn get(&self, rel: OrderRelation) -> Option<&OrderVerdict> {
        self.verdicts.iter().flatten().find(|v| v.relation == rel)
    }

    /// Fails if a stronger relation holds while a weaker one fails.
    pub fn check_chain(&self) -> Result<()> {
        let present: Vec<&OrderVerdict> = self.verdicts.iter().flatten().collect();
        for (i, strong) in present.iter().enumerate() {
            if !strong.holds() {
                continue;
            }
            if let Some(weak) = present[i + 1..].iter().find(|v| v.fails()) {
                let detail = match weak.status {
                    Status::Fails { witness, lhs, rhs } => format!(
                        "{} margin {:e} everywhere, {} violated at {witness}: {lhs} < {rhs}",
                        strong.relation, strong.min_margin, weak.relation
                    ),
                    _ => unreachable!(),
                };
                return Err(Error::ChainViolation {
                    stronger: strong.relation,
                    weaker: weak.relation,
                    detail,
                });
            }
        }
        Ok(())
    }
}

/// Runs all five checks without judging the chain.
pub fn audit_verdicts<A, B>(a: &A, b: &B, grid: &[f64], tol: f64) -> Result<AuditReport>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    let mut verdicts = [None; 5];
    for (slot, rel) in verdicts.iter_mut().zip(OrderRelation::CHAIN) {
        *slot = match check_order(a, b, rel, grid, tol) {
            Ok(v) => Some(v),
            Err(Error::UnsupportedRelation(_)) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(AuditReport { verdicts })
}

/// All five verdicts, or a chain-violation error naming both relations.
pub fn implication_audit<A, B>(a: &A, b: &B, grid: &[f64], tol: f64) -> Result<AuditReport>
where
    A: LifetimeLaw + ?Sized,
    B: LifetimeLaw + ?Sized,
{
    let report = audit_verdicts(a, b, grid, tol)?;
    report.check_chain()?;
    Ok(report)
}
