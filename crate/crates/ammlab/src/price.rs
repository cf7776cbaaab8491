//! External market price paths sampled at block times.
//!
//! Supported generators: zero-drift geometric Brownian motion, a martingale
//! binomial walk, and deterministic sequences for exact replay. Paths are
//! reproducible from (spec, schedule, initial price, seed); distinct path
//! indices use independent substreams so generation can run in parallel.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rng::SplitMix64;

/// Block-time-aligned external prices. `p0` is the price at time zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricePath {
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
    pub p0: f64,
}

impl PricePath {
    pub fn new(times: Vec<f64>, prices: Vec<f64>, p0: f64) -> Result<Self, Error> {
        if times.len() != prices.len() {
            return Err(Error::PathMismatch(format!(
                "{} times vs {} prices",
                times.len(),
                prices.len()
            )));
        }
        if p0 <= 0.0 || prices.iter().any(|p| *p <= 0.0) {
            return Err(Error::config("prices must be strictly positive"));
        }
        let mut prev = 0.0;
        for t in &times {
            if *t <= prev {
                return Err(Error::config("block times must be strictly increasing"));
            }
            prev = *t;
        }
        Ok(Self { times, prices, p0 })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Price at block index (0-based position in the schedule).
    pub fn price_at(&self, block: usize) -> f64 {
        self.prices[block]
    }

    /// Read a deterministic path from CSV with `time,price` columns
    /// (header optional).
    pub fn from_csv_reader<R: std::io::Read>(reader: R, p0: f64) -> Result<Self, Error> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut times = Vec::new();
        let mut prices = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::config(format!("csv: {e}")))?;
            if record.len() != 2 {
                return Err(Error::config(format!(
                    "csv row {i}: expected 2 columns, got {}",
                    record.len()
                )));
            }
            // Tolerate a header row.
            if i == 0 && record[0].parse::<f64>().is_err() {
                continue;
            }
            let t: f64 = record[0]
                .parse()
                .map_err(|e| Error::config(format!("csv row {i} time: {e}")))?;
            let p: f64 = record[1]
                .parse()
                .map_err(|e| Error::config(format!("csv row {i} price: {e}")))?;
            times.push(t);
            prices.push(p);
        }
        Self::new(times, prices, p0)
    }
}

/// Price-process specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    /// `P_{t+d} = P_t * exp(sigma sqrt(d) Z - sigma^2 d / 2)`.
    GbmZeroDrift { sigma: f64 },
    /// Up factor `u` with the martingale probability `(1 - d) / (u - d)`.
    Binomial { u: f64, d: f64 },
    /// Fixed sequence, one price per block.
    Deterministic { prices: Vec<f64> },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            ProcessSpec::GbmZeroDrift { sigma } => {
                if !sigma.is_finite() || *sigma <= 0.0 {
                    return Err(Error::config("gbm sigma must be positive"));
                }
            }
            ProcessSpec::Binomial { u, d } => {
                if !(0.0 < *d && *d < 1.0 && 1.0 < *u) {
                    return Err(Error::config("binomial needs 0 < d < 1 < u"));
                }
                let p_up = (1.0 - d) / (u - d);
                if !(0.0 < p_up && p_up < 1.0) {
                    return Err(Error::config(
                        "binomial martingale probability not in (0,1)",
                    ));
                }
            }
            ProcessSpec::Deterministic { prices } => {
                if prices.iter().any(|p| *p <= 0.0) {
                    return Err(Error::config("deterministic prices must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn is_martingale(&self) -> bool {
        !matches!(self, ProcessSpec::Deterministic { .. })
    }

    /// Martingale up-probability for the binomial spec.
    pub fn binomial_p_up(&self) -> Option<f64> {
        match self {
            ProcessSpec::Binomial { u, d } => Some((1.0 - d) / (u - d)),
            _ => None,
        }
    }
}

/// Sample one path on `schedule`. Deterministic given all arguments; the
/// per-path substream is `SplitMix64(seed ^ path_index)` mixed once.
pub fn sample_path(
    spec: &ProcessSpec,
    schedule: &[f64],
    p0: f64,
    seed: u64,
    path_index: u64,
) -> Result<PricePath, Error> {
    spec.validate()?;
    if schedule.is_empty() {
        return Err(Error::config("schedule must be nonempty"));
    }
    if p0 <= 0.0 {
        return Err(Error::config("initial price must be positive"));
    }
    let mut rng = SplitMix64::substream(seed, path_index);
    let mut prices = Vec::with_capacity(schedule.len());
    match spec {
        ProcessSpec::GbmZeroDrift { sigma } => {
            let mut p = p0;
            let mut prev_t = 0.0;
            for &t in schedule {
                let dt = t - prev_t;
                let z = rng.next_standard_normal();
                p *= (sigma * dt.sqrt() * z - sigma * sigma * dt / 2.0).exp();
                prices.push(p);
                prev_t = t;
            }
        }
        ProcessSpec::Binomial { u, d } => {
            let p_up = (1.0 - d) / (u - d);
            let mut p = p0;
            for _ in schedule {
                p *= if rng.next_open01() < p_up { *u } else { *d };
                prices.push(p);
            }
        }
        ProcessSpec::Deterministic { prices: fixed } => {
            if fixed.len() != schedule.len() {
                return Err(Error::PathMismatch(format!(
                    "deterministic spec has {} prices for {} blocks",
                    fixed.len(),
                    schedule.len()
                )));
            }
            prices.extend_from_slice(fixed);
        }
    }
    PricePath::new(schedule.to_vec(), prices, p0)
}

/// Per-block verdict of the martingale diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct MartingaleBlockStat {
    pub block: usize,
    pub mean_increment: f64,
    pub stderr: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MartingaleDiagnostic {
    pub blocks: Vec<MartingaleBlockStat>,
}

impl MartingaleDiagnostic {
    pub fn any_flagged(&self) -> bool {
        self.blocks.iter().any(|b| b.flagged)
    }
}

/// Per-block mean price increment and its standard error across paths;
/// a block is flagged when `|mean| > 4 * stderr`, which a martingale sample
/// should essentially never trigger.
pub fn martingale_diagnostic(paths: &[PricePath]) -> Result<MartingaleDiagnostic, Error> {
    let Some(first) = paths.first() else {
        return Err(Error::config("diagnostic needs at least one path"));
    };
    let n_blocks = first.len();
    if paths.iter().any(|p| p.len() != n_blocks) {
        return Err(Error::PathMismatch("paths have differing lengths".into()));
    }
    let n = paths.len() as f64;
    let mut blocks = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for path in paths {
            let prev = if b == 0 { path.p0 } else { path.prices[b - 1] };
            let inc = path.prices[b] - prev;
            sum += inc;
            sumsq += inc * inc;
        }
        let mean = sum / n;
        let stderr = if paths.len() > 1 {
            let var = (sumsq - n * mean * mean) / (n - 1.0);
            (var.max(0.0) / n).sqrt()
        } else {
            0.0
        };
        blocks.push(MartingaleBlockStat {
            block: b + 1,
            mean_increment: mean,
            stderr,
            flagged: mean.abs() > 4.0 * stderr + crate::numeric::ABS_FLOOR,
        });
    }
    Ok(MartingaleDiagnostic { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(n: usize) -> Vec<f64> {
        (1..=n).map(|i| i as f64).collect()
    }

    #[test]
    fn deterministic_path_is_exact() {
        let spec = ProcessSpec::Deterministic {
            prices: vec![1.0, 100.0, 1.0, 100.0],
        };
        let path = sample_path(&spec, &schedule(4), 1.0, 0, 0).unwrap();
        assert_eq!(path.prices, vec![1.0, 100.0, 1.0, 100.0]);
    }

    #[test]
    fn deterministic_length_mismatch_errors() {
        let spec = ProcessSpec::Deterministic {
            prices: vec![1.0, 2.0],
        };
        assert!(sample_path(&spec, &schedule(3), 1.0, 0, 0).is_err());
    }

    #[test]
    fn binomial_martingale_probability() {
        let spec = ProcessSpec::Binomial { u: 1.25, d: 0.8 };
        assert!((spec.binomial_p_up().unwrap() - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gbm_paths_reproducible_and_positive() {
        let spec = ProcessSpec::GbmZeroDrift { sigma: 0.3 };
        let a = sample_path(&spec, &schedule(20), 100.0, 42, 3).unwrap();
        let b = sample_path(&spec, &schedule(20), 100.0, 42, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.prices.iter().all(|p| *p > 0.0));
        let c = sample_path(&spec, &schedule(20), 100.0, 42, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gbm_terminal_mean_is_initial_price() {
        // Zero-drift GBM is a martingale: mean of P_T / P_0 over many paths
        // should be 1 within a few standard errors.
        let spec = ProcessSpec::GbmZeroDrift { sigma: 0.3 };
        let n = 20_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..n {
            let path = sample_path(&spec, &[1.0], 1.0, 9, i).unwrap();
            let r = path.prices[0];
            sum += r;
            sumsq += r * r;
        }
        let mean = sum / n as f64;
        let var = (sumsq - n as f64 * mean * mean) / (n as f64 - 1.0);
        let stderr = (var / n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * stderr,
            "mean {mean} stderr {stderr}"
        );
    }

    #[test]
    fn diagnostic_flags_deterministic_alternation() {
        let path = PricePath::new(schedule(4), vec![100.0, 1.0, 100.0, 1.0], 1.0).unwrap();
        let diag = martingale_diagnostic(&[path]).unwrap();
        assert!(diag.any_flagged());
    }

    #[test]
    fn diagnostic_passes_binomial_sample() {
        let spec = ProcessSpec::Binomial { u: 1.25, d: 0.8 };
        let paths: Vec<PricePath> = (0..20_000)
            .map(|i| sample_path(&spec, &schedule(5), 100.0, 17, i).unwrap())
            .collect();
        let diag = martingale_diagnostic(&paths).unwrap();
        assert!(!diag.any_flagged());
    }

    #[test]
    fn diagnostic_passes_gbm_sample() {
        let spec = ProcessSpec::GbmZeroDrift { sigma: 0.3 };
        let paths: Vec<PricePath> = (0..20_000)
            .map(|i| sample_path(&spec, &schedule(5), 100.0, 23, i).unwrap())
            .collect();
        let diag = martingale_diagnostic(&paths).unwrap();
        assert!(!diag.any_flagged());
    }

    #[test]
    fn csv_ingestion() {
        let data = "time,price\n1.0,100.0\n2.0,1.0\n";
        let path = PricePath::from_csv_reader(data.as_bytes(), 1.0).unwrap();
        assert_eq!(path.times, vec![1.0, 2.0]);
        assert_eq!(path.prices, vec![100.0, 1.0]);
    }
}
