//! Discrete-event simulation of the standby model, written directly from the
//! operating rules so that it can serve as an independent oracle.
//!
//! A working (principal) unit fails after a lifetime; a warm standby can also
//! fail while waiting, a cold one cannot. A failed unit goes to repair, which
//! restores it as good as new, and a repaired unit rejoins as standby. The
//! system fails the first time the working unit fails while the other unit is
//! still under repair; a failure and a repair completion at the same instant
//! count as a system failure.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::curve::Curve;
use crate::dists::Distribution;
use crate::error::{Error, Result};
use crate::fm;
use crate::general_cold::{ColdStart, GeneralColdConfig};
use crate::markov::{InitialState, MarkovSystem};

/// What happens to running lifetime clocks at events that do not end them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClockPolicy {
    /// Remaining lifetimes carry over; a promoted standby draws a fresh
    /// principal lifetime.
    #[default]
    CarryResidual,
    /// Every running lifetime is redrawn from its position's law at every
    /// event.
    RedrawEachEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Warm,
    Cold,
}

/// A system to simulate.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemSpec {
    /// Laws attached to positions rather than units: whichever unit works
    /// uses `principal`, the waiting one uses `standby` (absent for cold
    /// standby), and either unit is repaired according to `repair`.
    Positional {
        principal: Distribution,
        standby: Option<Distribution>,
        repair: Distribution,
        initial: InitialState,
    },
    /// Cold standby with laws attached to the two units.
    PerUnit(GeneralColdConfig),
}

impl SystemSpec {
    pub fn warm(
        principal: Distribution,
        standby: Distribution,
        repair: Distribution,
        initial: InitialState,
    ) -> Result<Self> {
        for d in [&principal, &standby, &repair] {
            d.validate()?;
        }
        Ok(Self::Positional {
            principal,
            standby: Some(standby),
            repair,
            initial,
        })
    }

    pub fn cold(
        principal: Distribution,
        repair: Distribution,
        initial: InitialState,
    ) -> Result<Self> {
        principal.validate()?;
        repair.validate()?;
        Ok(Self::Positional {
            principal,
            standby: None,
            repair,
            initial,
        })
    }

    pub fn per_unit(cfg: GeneralColdConfig) -> Self {
        Self::PerUnit(cfg)
    }

    /// The exponential system behind a Markovian model. A zero standby rate
    /// gives a cold system; a zero repair rate cannot be simulated.
    pub fn from_markov(system: &MarkovSystem) -> Result<Self> {
        let cfg = system.config();
        if cfg.mu() <= 0.0 {
            return Err(Error::InvalidSpec(
                "simulation needs a positive repair rate",
            ));
        }
        let principal = Distribution::exponential(cfg.lambda1())?;
        let repair = Distribution::exponential(cfg.mu())?;
        if cfg.lambda2() > 0.0 {
            Self::warm(
                principal,
                Distribution::exponential(cfg.lambda2())?,
                repair,
                system.state(),
            )
        } else {
            Self::cold(principal, repair, system.state())
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Self::Positional {
                standby: Some(_), ..
            } => Mode::Warm,
            _ => Mode::Cold,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Positional {
                principal,
                standby,
                repair,
                ..
            } => {
                principal.validate()?;
                repair.validate()?;
                standby.as_ref().map_or(Ok(()), Distribution::validate)
            }
            Self::PerUnit(cfg) => {
                for d in [&cfg.lifetime1, &cfg.lifetime2, &cfg.repair1, &cfg.repair2] {
                    d.validate()?;
                }
                Ok(())
            }
        }
    }
}

/// Sorted failure times of a batch of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    failure_times: Vec<f64>,
}

impl SimResult {
    pub fn from_times(mut failure_times: Vec<f64>) -> Self {
        failure_times.sort_by(f64::total_cmp);
        Self { failure_times }
    }

    pub fn n(&self) -> usize {
        self.failure_times.len()
    }

    pub fn failure_times(&self) -> &[f64] {
        &self.failure_times
    }

    pub fn mean(&self) -> f64 {
        self.failure_times.iter().sum::<f64>() / self.n() as f64
    }

    /// Sample standard deviation over `√n`.
    pub fn std_error(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return f64::NAN;
        }
        let m = self.mean();
        let ss: f64 = self.failure_times.iter().map(|x| (x - m) * (x - m)).sum();
        fm::sqrt(ss / (n - 1) as f64 / n as f64)
    }

    /// Fraction of replications still running at `t`.
    pub fn survival(&self, t: f64) -> f64 {
        let alive = self.failure_times.len() - self.failure_times.partition_point(|&x| x <= t);
        alive as f64 / self.n() as f64
    }

    pub fn empirical_survival(&self, grid: &[f64]) -> Result<Curve> {
        Curve::sample(grid, |t| self.survival(t))
    }

    /// Pools two batches. Merging is associative and, since the sample is
    /// kept sorted, independent of the order in which shards finish.
    pub fn merge(&self, other: &SimResult) -> SimResult {
        let (a, b) = (&self.failure_times, &other.failure_times);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].total_cmp(&b[j]).is_le() {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SimResult { failure_times: out }
    }
}

/// `n` replications from one generator stream seeded with `seed`.
pub fn simulate(spec: &SystemSpec, n: usize, seed: u64) -> Result<SimResult> {
    simulate_with(spec, n, seed, ClockPolicy::default())
}

pub fn simulate_with(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    policy: ClockPolicy,
) -> Result<SimResult> {
    if n == 0 {
        return Err(Error::InvalidSpec("replication count must be at least 1"));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(n);
    for _ in 0..n {
        let t = match spec {
            SystemSpec::Positional {
                principal,
                standby,
                repair,
                initial,
            } => run_positional(
                principal,
                standby.as_ref(),
                repair,
                *initial,
                policy,
                &mut rng,
            )?,
            SystemSpec::PerUnit(cfg) => run_per_unit(cfg, &mut rng)?,
        };
        times.push(t);
    }
    Ok(SimResult::from_times(times))
}

/// Seed of shard `index`, derived from the master seed by SplitMix64.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D1_049B_B133_111B);
    z ^ (z >> 31)
}

/// Sizes of `shards` near-equal parts of `n`, larger ones first.
pub fn shard_sizes(n: usize, shards: usize) -> Vec<usize> {
    let shards = shards.clamp(1, n.max(1));
    (0..shards)
        .map(|i| n / shards + usize::from(i < n % shards))
        .collect()
}

/// Shard `index` of a run split by [`shard_sizes`].
pub fn simulate_shard(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    shards: usize,
    index: usize,
) -> Result<SimResult> {
    let sizes = shard_sizes(n, shards);
    let size = *sizes
        .get(index)
        .ok_or(Error::InvalidSpec("shard index out of range"))?;
    simulate(spec, size, derive_seed(seed, index as u64))
}

/// All shards run in sequence and merged; the same result as running them
/// in parallel and merging in any order.
pub fn simulate_sharded(
    spec: &SystemSpec,
    n: usize,
    seed: u64,
    shards: usize,
) -> Result<SimResult> {
    let count = shard_sizes(n, shards).len();
    let mut out = simulate_shard(spec, n, seed, shards, 0)?;
    for i in 1..count {
        out = out.merge(&simulate_shard(spec, n, seed, shards, i)?);
    }
    Ok(out)
}

fn draw(law: &Distribution, rng: &mut ChaCha8Rng, what: &'static str) -> Result<f64> {
    let x = law.sample(rng);
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(Error::NonFiniteDraw(what))
    }
}

fn run_positional(
    principal: &Distribution,
    standby: Option<&Distribution>,
    repair: &Distribution,
    initial: InitialState,
    policy: ClockPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let mut now = 0.0;
    // Absolute times of the next principal failure, standby failure and
    // repair completion.
    let mut work = draw(principal, rng, "principal lifetime")?;
    let mut wait = f64::INFINITY;
    let mut fix = f64::INFINITY;
    let standby_clock = |rng: &mut ChaCha8Rng, now: f64| -> Result<f64> {
        match standby {
            Some(law) => Ok(now + draw(law, rng, "standby lifetime")?),
            None => Ok(f64::INFINITY),
        }
    };
    match initial {
        InitialState::FreshPair => wait = standby_clock(rng, now)?,
        InitialState::DegradedStart => fix = draw(repair, rng, "repair time")?,
    }
    loop {
        let in_repair = fix.is_finite();
        if in_repair && work <= fix {
            return Ok(work);
        }
        if in_repair {
            // Repair completes first; the unit rejoins as standby.
            now = fix;
            fix = f64::INFINITY;
            wait = standby_clock(rng, now)?;
        } else if wait < work {
            // The standby fails while waiting.
            now = wait;
            wait = f64::INFINITY;
            fix = now + draw(repair, rng, "repair time")?;
        } else {
            // The principal fails and the standby takes over.
            now = work;
            work = now + draw(principal, rng, "principal lifetime")?;
            wait = f64::INFINITY;
            fix = now + draw(repair, rng, "repair time")?;
            continue;
        }
        if policy == ClockPolicy::RedrawEachEvent {
            work = now + draw(principal, rng, "principal lifetime")?;
            if wait.is_finite() {
                wait = standby_clock(rng, now)?;
            }
        }
    }
}

fn run_per_unit(cfg: &GeneralColdConfig, rng: &mut ChaCha8Rng) -> Result<f64> {
    let lifetime = |unit: usize, rng: &mut ChaCha8Rng| {
        draw(
            if unit == 0 {
                &cfg.lifetime1
            } else {
                &cfg.lifetime2
            },
            rng,
            "unit lifetime",
        )
    };
    let repair = |unit: usize, rng: &mut ChaCha8Rng| {
        draw(
            if unit == 0 {
                &cfg.repair1
            } else {
                &cfg.repair2
            },
            rng,
            "unit repair time",
        )
    };
    // `working` fails at `work`; the other unit is back at `fix`
    // (already back when `fix <= now`).
    let (mut working, mut work, mut fix) = match cfg.start {
        ColdStart::Tau0 => (0, lifetime(0, rng)?, 0.0),
        ColdStart::Tau3 => (1, lifetime(1, rng)?, 0.0),
        ColdStart::Tau1 => (1, lifetime(1, rng)?, repair(0, rng)?),
        ColdStart::Tau2 => (0, lifetime(0, rng)?, repair(1, rng)?),
    };
    loop {
        if work <= fix {
            return Ok(work);
        }
        let now = work;
        let failed = working;
        working = 1 - working;
        work = now + lifetime(working, rng)?;
        fix = now + repair(failed, rng)?;
    }
}

/// Largest gap between the empirical survival of `result` and `reference`
/// over the reference grid.
pub fn ks_distance(result: &SimResult, reference: &Curve) -> f64 {
    reference
        .iter()
        .map(|(t, v)| (result.survival(t) - v).abs())
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample Kolmogorov–Smirnov critical value at level 1%.
pub const KS_COEFF_1PCT: f64 = 1.63;

pub fn ks_band(n: usize) -> f64 {
    KS_COEFF_1PCT / fm::sqrt(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::general_cold::mttf;
    use crate::markov::{ColdConfig, WarmConfig};

    fn exp(r: f64) -> Distribution {
        Distribution::exponential(r).unwrap()
    }

    #[test]
    fn seed_determinism() {
        let spec = SystemSpec::warm(exp(1.0), exp(1.0), exp(1.0), InitialState::FreshPair).unwrap();
        assert_eq!(
            simulate(&spec, 500, 7).unwrap(),
            simulate(&spec, 500, 7).unwrap()
        );
        assert_ne!(
            simulate(&spec, 500, 7).unwrap(),
            simulate(&spec, 500, 8).unwrap()
        );
    }

    #[test]
    fn merge_is_associative() {
        let spec = SystemSpec::cold(exp(1.0), exp(2.0), InitialState::FreshPair).unwrap();
        let parts: Vec<_> = (0..3)
            .map(|i| simulate(&spec, 50 + i, i as u64).unwrap())
            .collect();
        let left = parts[0].merge(&parts[1]).merge(&parts[2]);
        let right = parts[0].merge(&parts[1].merge(&parts[2]));
        assert_eq!(left, right);
        assert_eq!(parts[2].merge(&parts[0]).merge(&parts[1]), left);
    }

    #[test]
    fn shards_cover_the_count() {
        assert_eq!(shard_sizes(10, 3), [4, 3, 3]);
        assert_eq!(shard_sizes(2, 5), [1, 1]);
        let spec = SystemSpec::cold(exp(1.0), exp(1.0), InitialState::FreshPair).unwrap();
        assert_eq!(simulate_sharded(&spec, 1001, 3, 4).unwrap().n(), 1001);
    }

    #[test]
    fn cold_mean_matches_mean_system() {
        let cfg = GeneralColdConfig::exponential(1.0, 1.0, 1.0, 1.0, ColdStart::Tau0).unwrap();
        let r = simulate(&SystemSpec::per_unit(cfg), 40_000, 11).unwrap();
        assert!(
            (r.mean() - 3.0).abs() < 3.0 * r.std_error(),
            "{} ± {}",
            r.mean(),
            r.std_error()
        );
    }

    #[test]
    fn positional_and_per_unit_agree_for_cold_exponentials() {
        let sys = MarkovSystem::cold(ColdConfig::new(1.0, 1.0).unwrap(), InitialState::FreshPair);
        let r = simulate(&SystemSpec::from_markov(&sys).unwrap(), 40_000, 5).unwrap();
        assert!((r.mean() - sys.mean()).abs() < 3.0 * r.std_error());
    }

    #[test]
    fn warm_survival_matches_closed_form() {
        let sys = MarkovSystem::warm(
            WarmConfig::new(1.0, 1.0, 1.0).unwrap(),
            InitialState::FreshPair,
        );
        let n = 40_000;
        let r = simulate(&SystemSpec::from_markov(&sys).unwrap(), n, 1).unwrap();
        let p = sys.survival(1.0).unwrap();
        let band = 3.0 * fm::sqrt(p * (1.0 - p) / n as f64);
        assert!((r.survival(1.0) - p).abs() < band);
    }

    #[test]
    fn degraded_start_is_shorter() {
        let sys = MarkovSystem::warm(
            WarmConfig::new(1.0, 0.5, 2.0).unwrap(),
            InitialState::DegradedStart,
        );
        let r = simulate(&SystemSpec::from_markov(&sys).unwrap(), 40_000, 2).unwrap();
        assert!((r.mean() - sys.mean()).abs() < 3.0 * r.std_error());
    }

    #[test]
    fn deterministic_repairs_match_mean_system() {
        let cfg = GeneralColdConfig::new(
            exp(1.0),
            exp(2.0),
            Distribution::deterministic(0.4).unwrap(),
            Distribution::deterministic(1.0).unwrap(),
            ColdStart::Tau0,
        )
        .unwrap();
        let want = mttf(&cfg).unwrap();
        for start in ColdStart::ALL {
            let r = simulate(&SystemSpec::per_unit(cfg.with_start(start)), 40_000, 9).unwrap();
            assert!(
                (r.mean() - want.get(start)).abs() < 3.5 * r.std_error(),
                "{start:?}"
            );
        }
    }

    #[test]
    fn ks_guards() {
        let spec = SystemSpec::cold(exp(1.0), exp(1.0), InitialState::FreshPair).unwrap();
        let r = simulate(&spec, 2000, 4).unwrap();
        let grid = crate::curve::linear_grid(0.0, 10.0, 101).unwrap();
        let emp = r.empirical_survival(&grid).unwrap();
        assert_eq!(ks_distance(&r, &emp), 0.0);
        let cdf = Curve::sample(&grid, |t| 1.0 - r.survival(t)).unwrap();
        let worst = grid
            .iter()
            .map(|&t| (1.0 - 2.0 * r.survival(t)).abs())
            .fold(0.0, f64::max);
        assert_eq!(ks_distance(&r, &cdf), worst);
        assert!(worst > 0.9);
    }

    #[test]
    fn bad_inputs() {
        let spec = SystemSpec::cold(exp(1.0), exp(1.0), InitialState::FreshPair).unwrap();
        assert!(simulate(&spec, 0, 1).is_err());
        let no_repair = MarkovSystem::warm(
            WarmConfig::new(1.0, 1.0, 0.0).unwrap(),
            InitialState::FreshPair,
        );
        assert!(SystemSpec::from_markov(&no_repair).is_err());
    }
}
