//! Lifetime and repair-time laws, and the probability primitives built on
//! them.

use alloc::vec::Vec;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::fm;
use crate::law::LifetimeLaw;
use crate::quad::{self, Tolerance};

const QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-12,
    max_intervals: 4000,
};

/// A nonnegative random time.
///
/// `Deterministic` survival is right-continuous: `P(X > t) = 1` for `t < T`
/// and `0` otherwise. `Empirical` is the uniform law on a measured sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Exponential { rate: f64 },
    Deterministic { at: f64 },
    Weibull { shape: f64, scale: f64 },
    Empirical(EmpiricalSample),
}

/// A sorted, nonempty sample of nonnegative times.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
    mean: f64,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "sample",
                value: 0.0,
                reason: "empirical sample is empty",
            });
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter {
                name: "sample",
                value: bad,
                reason: "sample values must be finite and nonnegative",
            });
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            sorted: values,
            mean,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    fn count_greater(&self, t: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&x| x <= t)
    }

    fn count_less(&self, t: f64) -> usize {
        self.sorted.partition_point(|&x| x < t)
    }
}

impl Distribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        let d = Self::Exponential { rate };
        d.validate()?;
        Ok(d)
    }

    pub fn deterministic(at: f64) -> Result<Self> {
        let d = Self::Deterministic { at };
        d.validate()?;
        Ok(d)
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        let d = Self::Weibull { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        EmpiricalSample::new(values).map(Self::Empirical)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and positive",
                })
            }
        };
        match *self {
            Self::Exponential { rate } => positive("rate", rate),
            Self::Deterministic { at } => {
                if at.is_finite() && at >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "T",
                        value: at,
                        reason: "must be finite and nonnegative",
                    })
                }
            }
            Self::Weibull { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            Self::Empirical(_) => Ok(()),
        }
    }

    /// `P(X > t)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.sf_unchecked(t))
    }

    /// `P(X <= t)`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        self.survival(t).map(|s| 1.0 - s)
    }

    /// `P(X < t)`, the left limit of the distribution function.
    pub fn cdf_left(&self, t: f64) -> f64 {
        match self {
            Self::Deterministic { at } => {
                if *at < t {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Empirical(e) => e.count_less(t) as f64 / e.sorted.len() as f64,
            _ if t <= 0.0 => 0.0,
            _ => 1.0 - self.sf_unchecked(t),
        }
    }

    fn sf_unchecked(&self, t: f64) -> f64 {
        match self {
            Self::Exponential { rate } => fm::exp(-rate * t.max(0.0)),
            Self::Deterministic { at } => {
                if t < *at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Weibull { shape, scale } => {
                if t <= 0.0 {
                    1.0
                } else {
                    fm::exp(-fm::powf(t / scale, *shape))
                }
            }
            Self::Empirical(e) => {
                if t < 0.0 {
                    1.0
                } else {
                    e.count_greater(t) as f64 / e.sorted.len() as f64
                }
            }
        }
    }

    /// Density, for laws without atoms.
    pub fn density(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return self.has_density().then_some(0.0);
        }
        match *self {
            Self::Exponential { rate } => Some(rate * fm::exp(-rate * t)),
            Self::Weibull { shape, scale } => {
                let z = t / scale;
                let zk = fm::powf(z, shape);
                Some(shape / scale * fm::powf(z, shape - 1.0) * fm::exp(-zk))
            }
            Self::Deterministic { .. } | Self::Empirical(_) => None,
        }
    }

    pub fn has_density(&self) -> bool {
        matches!(self, Self::Exponential { .. } | Self::Weibull { .. })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::Deterministic { at } => *at,
            Self::Weibull { shape, scale } => scale * fm::gamma(1.0 + 1.0 / shape),
            Self::Empirical(e) => e.mean,
        }
    }

    /// `∫₀ᵗ F(x) dx`.
    pub fn integrated_cdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            Self::Exponential { rate } => t + fm::expm1(-rate * t) / rate,
            Self::Deterministic { at } => (t - at).max(0.0),
            Self::Empirical(e) => {
                e.sorted.iter().map(|x| (t - x).max(0.0)).sum::<f64>() / e.sorted.len() as f64
            }
            Self::Weibull { .. } => {
                let s = quad::integrate(|x| self.sf_unchecked(x), 0.0, t, &[], QUAD_TOL)?;
                t - s.value
            }
        })
    }

    /// A time beyond which `P(X > t) < eps`; for laws with bounded support
    /// it is the supremum of the support.
    pub fn upper_time(&self, eps: f64) -> f64 {
        let eps = eps.clamp(f64::MIN_POSITIVE, 0.5);
        match self {
            Self::Exponential { rate } => -fm::ln(eps) / rate,
            Self::Deterministic { at } => *at,
            Self::Weibull { shape, scale } => scale * fm::powf(-fm::ln(eps), 1.0 / shape),
            Self::Empirical(e) => *e.sorted.last().unwrap_or(&0.0),
        }
    }

    /// Locations of probability atoms.
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            Self::Deterministic { at } => alloc::vec![*at],
            Self::Empirical(e) => {
                let mut v = e.sorted.clone();
                v.dedup();
                v
            }
            _ => Vec::new(),
        }
    }

    /// `E[h(X)]`. `breaks` marks points where `h` is discontinuous so the
    /// quadrature can split there.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut h: F, breaks: &[f64]) -> Result<f64> {
        match self {
            Self::Deterministic { at } => Ok(h(*at)),
            Self::Empirical(e) => {
                Ok(e.sorted.iter().map(|&x| h(x)).sum::<f64>() / e.sorted.len() as f64)
            }
            Self::Exponential { .. } | Self::Weibull { .. } => {
                // Substitute u = F(t) so mass near the origin or deep in the
                // tail is seen by the first panels.
                let mut cuts: Vec<f64> = breaks.iter().map(|&b| self.cdf_left(b)).collect();
                cuts.extend((1..=16).map(|k| fm::powf(10.0, -(k as f64))));
                let est = quad::integrate(|u| h(self.quantile(u)), 0.0, 1.0, &cuts, QUAD_TOL)?;
                Ok(est.value)
            }
        }
    }

    /// Inverse of the continuous cdf on `[0, 1)`; only for `Exponential`
    /// and `Weibull`.
    fn quantile(&self, u: f64) -> f64 {
        let e = -fm::ln1p(-u);
        match *self {
            Self::Exponential { rate } => e / rate,
            Self::Weibull { shape, scale } => scale * fm::powf(e, 1.0 / shape),
            _ => unreachable!("quantile of a law with atoms"),
        }
    }

    /// One draw by inverse transform (empirical: uniform resampling).
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Exponential { rate } => -fm::ln(open_unit(rng)) / rate,
            Self::Deterministic { at } => *at,
            Self::Weibull { shape, scale } => {
                scale * fm::powf(-fm::ln(open_unit(rng)), 1.0 / shape)
            }
            Self::Empirical(e) => e.sorted[rng.random_range(0..e.sorted.len())],
        }
    }

    pub fn exponential_rate(&self) -> Option<f64> {
        match self {
            Self::Exponential { rate } => Some(*rate),
            _ => None,
        }
    }

    pub fn deterministic_time(&self) -> Option<f64> {
        match self {
            Self::Deterministic { at } => Some(*at),
            _ => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        !self.has_density()
    }
}

/// Uniform on `(0, 1]`, so the logarithm is finite.
fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

impl LifetimeLaw for Distribution {
    fn sf(&self, t: f64) -> f64 {
        self.sf_unchecked(t)
    }

    fn pdf(&self, t: f64) -> Option<f64> {
        self.density(t)
    }

    fn rate_scale(&self) -> f64 {
        let m = self.mean();
        if m > 0.0 {
            1.0 / m
        } else {
            1.0
        }
    }

    fn ln_pdf(&self, t: f64) -> Option<f64> {
        match *self {
            Self::Exponential { rate } => Some(fm::ln(rate) - rate * t),
            _ => self.density(t).map(fm::ln),
        }
    }

    fn tail_time(&self, eps: f64) -> f64 {
        self.upper_time(eps)
    }

    fn laplace_sf(&self, s: f64) -> Result<f64> {
        match *self {
            Self::Exponential { rate } => Ok(1.0 / (s + rate)),
            Self::Deterministic { at } if s * at < 1e-8 => Ok(at * (1.0 - 0.5 * s * at)),
            Self::Deterministic { at } => Ok(-fm::expm1(-s * at) / s),
            Self::Empirical(ref e) => Ok(e
                .sorted
                .iter()
                .map(|&x| {
                    if s * x < 1e-8 {
                        x * (1.0 - 0.5 * s * x)
                    } else {
                        -fm::expm1(-s * x) / s
                    }
                })
                .sum::<f64>()
                / e.sorted.len() as f64),
            Self::Weibull { .. } => {
                let hi = self.upper_time(1e-15);
                quad::integrate(
                    |t| fm::exp(-s * t) * self.sf_unchecked(t),
                    0.0,
                    hi,
                    &[],
                    QUAD_TOL,
                )
                .map(|e| e.value)
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.atoms()
    }
}

/// `P(X > Y)` for independent `X` and `Y`.
///
/// Ties between atoms count as `X <= Y`: a unit whose lifetime equals the
/// other unit's repair time fails before that repair completes.
pub fn prob_greater(x: &Distribution, y: &Distribution) -> Result<f64> {
    use Distribution::*;
    let p = match (x, y) {
        (Exponential { rate: lx }, Exponential { rate: ly }) => ly / (lx + ly),
        (_, Deterministic { at }) => x.sf_unchecked(*at),
        (_, Empirical(_)) => y.expect(|t| x.sf_unchecked(t), &[])?,
        (Deterministic { at }, _) => y.cdf_left(*at),
        (Empirical(_), _) => x.expect(|t| y.cdf_left(t), &[])?,
        _ => y.expect(|t| x.sf_unchecked(t), &[])?,
    };
    Ok(p.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp(rate: f64) -> Distribution {
        Distribution::exponential(rate).unwrap()
    }

    fn det(at: f64) -> Distribution {
        Distribution::deterministic(at).unwrap()
    }

    #[test]
    fn survival_examples() {
        assert_eq!(exp(1.0).survival(0.0).unwrap(), 1.0);
        assert!((exp(1.0).survival(1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert_eq!(det(2.0).survival(1.0).unwrap(), 1.0);
        assert_eq!(det(2.0).survival(3.0).unwrap(), 0.0);
        assert_eq!(det(0.0).survival(0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_time_rejected() {
        assert_eq!(exp(1.0).survival(-1.0), Err(Error::NegativeTime(-1.0)));
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Distribution::exponential(0.0).is_err());
        assert!(Distribution::exponential(f64::NAN).is_err());
        assert!(Distribution::deterministic(-1.0).is_err());
        assert!(Distribution::weibull(0.0, 1.0).is_err());
        assert!(Distribution::empirical(vec![]).is_err());
        assert!(Distribution::empirical(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn prob_greater_examples() {
        assert!((prob_greater(&exp(1.0), &exp(1.0)).unwrap() - 0.5).abs() < 1e-15);
        let p = prob_greater(&exp(2.0), &det(0.4)).unwrap();
        assert!((p - 0.449_328_964_117_221_6).abs() < 1e-15);
        assert_eq!(prob_greater(&exp(1.0), &det(0.0)).unwrap(), 1.0);
        // Strict inequality: simultaneous events are failures.
        assert_eq!(prob_greater(&det(1.0), &det(1.0)).unwrap(), 0.0);
        assert_eq!(prob_greater(&det(1.5), &det(1.0)).unwrap(), 1.0);
    }

    #[test]
    fn prob_greater_weibull_matches_closed_form_when_exponential() {
        // Weibull with shape 1 is Exp(1/scale); the quadrature branch must
        // reproduce the closed form.
        let w = Distribution::weibull(1.0, 0.5).unwrap();
        let p = prob_greater(&exp(1.0), &w).unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-10, "{p}");
        let q = prob_greater(&w, &exp(1.0)).unwrap();
        assert!((p + q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_sample_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(det(2.0).sample(&mut rng), 2.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = exp(1.0);
        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(42));
        let b = d.sample(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn exponential_sample_mean() {
        let d = exp(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 3.0 / fm::sqrt(n as f64), "{mean}");
    }

    #[test]
    fn weibull_mean_matches_gamma() {
        let d = Distribution::weibull(2.0, 3.0).unwrap();
        // Γ(1.5) = √π / 2
        assert!((d.mean() - 3.0 * 0.886_226_925_452_758).abs() < 1e-12);
    }

    #[test]
    fn empirical_survival_and_mean() {
        let d = Distribution::empirical(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(d.survival(2.0).unwrap(), 0.25);
        assert_eq!(d.cdf_left(2.0), 0.25);
        assert_eq!(d.mean(), 2.0);
        assert_eq!(d.atoms(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn integrated_cdf_closed_forms() {
        let e = exp(2.0);
        let t: f64 = 1.3;
        let expected = t - (1.0 - fm::exp(-2.0 * t)) / 2.0;
        assert!((e.integrated_cdf(t).unwrap() - expected).abs() < 1e-14);
        assert_eq!(det(1.0).integrated_cdf(2.5).unwrap(), 1.5);
        let w = Distribution::weibull(1.0, 0.5).unwrap();
        assert!((w.integrated_cdf(t).unwrap() - expected).abs() < 1e-10);
    }
}
