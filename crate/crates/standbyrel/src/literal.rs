//! Parsing of the textual descriptors accepted on the command line.

use std::fs;
use std::path::Path;

use standbyrel_core::curve::{linear_grid, log_grid};
use standbyrel_core::Distribution;

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("unknown distribution literal `{0}` (expected exp:RATE, det:T, weibull:SHAPE,SCALE or emp:PATH)")]
    UnknownDistribution(String),

    #[error("`{token}` is not a number")]
    BadNumber { token: String },

    #[error("`{token}`: {reason}")]
    BadValue { token: String, reason: &'static str },

    #[error("`{token}`: expected {expected} comma-separated values")]
    WrongArity {
        token: String,
        expected: &'static str,
    },

    #[error("malformed grid `{token}`: {reason}")]
    BadGrid { token: String, reason: &'static str },

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("`{token}`: {source}")]
    Invalid {
        token: String,
        #[source]
        source: standbyrel_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, ParseError>;

pub fn parse_number(token: &str) -> Result<f64> {
    let value: f64 = token.trim().parse().map_err(|_| ParseError::BadNumber {
        token: token.to_string(),
    })?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParseError::BadValue {
            token: token.to_string(),
            reason: "must be finite",
        })
    }
}

fn list(token: &str) -> Result<Vec<f64>> {
    token.split(',').map(parse_number).collect()
}

/// `n` comma-separated rates, each finite and positive except where
/// `allow_zero[i]` permits zero.
pub fn parse_rates(token: &str, allow_zero: &[bool], expected: &'static str) -> Result<Vec<f64>> {
    let values = list(token)?;
    if values.len() != allow_zero.len() {
        return Err(ParseError::WrongArity {
            token: token.to_string(),
            expected,
        });
    }
    for (v, &zero_ok) in values.iter().zip(allow_zero) {
        if *v < 0.0 || (*v == 0.0 && !zero_ok) {
            return Err(ParseError::BadValue {
                token: token.to_string(),
                reason: if zero_ok {
                    "rates must be nonnegative"
                } else {
                    "rates must be positive"
                },
            });
        }
    }
    Ok(values)
}

/// `exp:RATE`, `det:T`, `weibull:SHAPE,SCALE` or `emp:PATH`.
pub fn parse_distribution(token: &str) -> Result<Distribution> {
    let (kind, args) = token
        .split_once(':')
        .ok_or_else(|| ParseError::UnknownDistribution(token.to_string()))?;
    let invalid = |source| ParseError::Invalid {
        token: token.to_string(),
        source,
    };
    match kind {
        "exp" => Distribution::exponential(parse_number(args)?).map_err(invalid),
        "det" => Distribution::deterministic(parse_number(args)?).map_err(invalid),
        "weibull" => match list(args)?.as_slice() {
            &[shape, scale] => Distribution::weibull(shape, scale).map_err(invalid),
            _ => Err(ParseError::WrongArity {
                token: token.to_string(),
                expected: "two (shape, scale)",
            }),
        },
        "emp" => Distribution::empirical(read_sample(Path::new(args))?).map_err(invalid),
        _ => Err(ParseError::UnknownDistribution(token.to_string())),
    }
}

/// One nonnegative float per line; blank lines and `#` comments are
/// skipped.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_sample(&text)
}

pub fn parse_sample(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_number(line)?;
        if v < 0.0 {
            return Err(ParseError::BadValue {
                token: line.to_string(),
                reason: "sample values must be nonnegative",
            });
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(ParseError::BadValue {
            token: text.chars().take(40).collect(),
            reason: "empirical sample is empty",
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> standbyrel_core::Result<Vec<f64>> {
        match self.spacing {
            Spacing::Linear => linear_grid(self.lo, self.hi, self.points),
            Spacing::Log => log_grid(self.lo, self.hi, self.points),
        }
    }
}

/// `tmin,tmax,n,log|lin`.
pub fn parse_grid(token: &str) -> Result<GridSpec> {
    let bad = |reason| ParseError::BadGrid {
        token: token.to_string(),
        reason,
    };
    let parts: Vec<&str> = token.split(',').map(str::trim).collect();
    let [lo, hi, n, spacing] = parts.as_slice() else {
        return Err(bad("expected tmin,tmax,n,log|lin"));
    };
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    let points: usize = n
        .parse()
        .map_err(|_| bad("point count must be an integer"))?;
    let spacing = match *spacing {
        "log" => Spacing::Log,
        "lin" => Spacing::Linear,
        _ => return Err(bad("spacing must be `log` or `lin`")),
    };
    if points < 2 {
        return Err(bad("need at least two points"));
    }
    if !(hi > lo) || lo < 0.0 {
        return Err(bad("need 0 <= tmin < tmax"));
    }
    if spacing == Spacing::Log && lo == 0.0 {
        return Err(bad("a log grid needs tmin > 0"));
    }
    Ok(GridSpec {
        lo,
        hi,
        points,
        spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribution_literals() {
        assert_eq!(
            parse_distribution("exp:2").unwrap(),
            Distribution::exponential(2.0).unwrap()
        );
        assert_eq!(
            parse_distribution("det:0.4").unwrap(),
            Distribution::deterministic(0.4).unwrap()
        );
        assert_eq!(
            parse_distribution("weibull:1.5,2").unwrap(),
            Distribution::weibull(1.5, 2.0).unwrap()
        );
        assert!(matches!(
            parse_distribution("gamma:1"),
            Err(ParseError::UnknownDistribution(_))
        ));
        assert!(matches!(
            parse_distribution("exp"),
            Err(ParseError::UnknownDistribution(_))
        ));
        assert!(matches!(
            parse_distribution("exp:-1"),
            Err(ParseError::Invalid { .. })
        ));
        assert!(matches!(
            parse_distribution("exp:x"),
            Err(ParseError::BadNumber { .. })
        ));
        assert!(matches!(
            parse_distribution("weibull:1"),
            Err(ParseError::WrongArity { .. })
        ));
    }

    #[test]
    fn errors_name_the_token() {
        let msg = parse_distribution("gamma:1").unwrap_err().to_string();
        assert!(msg.contains("gamma:1"));
        let msg = parse_rates("1,0,1", &[false, false, true], "three")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("1,0,1"));
    }

    #[test]
    fn rates() {
        assert_eq!(
            parse_rates("1,0,2", &[false, true, true], "three").unwrap(),
            [1.0, 0.0, 2.0]
        );
        assert!(parse_rates("1,2", &[false, true, true], "three").is_err());
        assert!(parse_rates("1,-2,2", &[false, true, true], "three").is_err());
        assert!(parse_rates("0,1", &[false, false], "two").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("0,10,11,lin").unwrap();
        assert_eq!(g.build().unwrap()[1], 1.0);
        assert!(parse_grid("0,10,11,log").is_err());
        assert!(parse_grid("1,10,1,lin").is_err());
        assert!(parse_grid("5,1,10,lin").is_err());
        assert!(parse_grid("1,10,10").is_err());
        assert!(parse_grid("1,10,ten,log").is_err());
    }

    #[test]
    fn samples() {
        assert_eq!(
            parse_sample("# header\n1.5\n\n2 # trailing\n0\n").unwrap(),
            [1.5, 2.0, 0.0]
        );
        assert!(parse_sample("1\n-2\n").is_err());
        assert!(parse_sample("\n# only\n").is_err());
    }
}
