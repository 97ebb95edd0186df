use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::stats::RegionFractions;
use crate::{Error, Result};

/// Parameter varied in a sweep, in SI units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepVariable {
    /// Young's modulus of the wire [Pa].
    YoungsModulus,
    /// Wire diameter D2 [m].
    WireDiameter,
    /// Secondary coil diameter D3 [m].
    CoilDiameter,
}

impl SweepVariable {
    pub fn default_interval(self) -> (f64, f64) {
        match self {
            Self::YoungsModulus => (100e9, 1000e9),
            Self::WireDiameter => (0.255e-3, 0.505e-3),
            Self::CoilDiameter => (2e-3, 8e-3),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Self::YoungsModulus => "E",
            Self::WireDiameter => "D2",
            Self::CoilDiameter => "D3",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E" | "E_W" | "YOUNGS_MODULUS" => Ok(Self::YoungsModulus),
            "D2" | "WIRE_DIAMETER" => Ok(Self::WireDiameter),
            "D3" | "COIL_DIAMETER" => Ok(Self::CoilDiameter),
            _ => Err(Error::InvalidParameter(format!(
                "unknown sweep variable {s:?} (expected E, D2 or D3)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub variable: SweepVariable,
    pub interval: (f64, f64),
    pub samples: usize,
    pub bins: usize,
    pub min_per_bin: usize,
    pub seed: u64,
}

impl SweepPlan {
    pub fn new(variable: SweepVariable, samples: usize, seed: u64) -> Self {
        Self {
            variable,
            interval: variable.default_interval(),
            samples,
            bins: 5,
            min_per_bin: 30,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("empty sweep interval [{lo}, {hi}]")));
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter("sweep needs at least one bin".into()));
        }
        // With an even split the smallest bin holds floor(n / bins) samples.
        let per_bin = self.samples / self.bins;
        if per_bin < self.min_per_bin {
            return Err(Error::InsufficientSamples {
                bin: self.samples % self.bins,
                count: per_bin,
                min: self.min_per_bin,
            });
        }
        Ok(())
    }

    /// Stratified uniform draw: sample `j` falls in bin `j % bins`, uniform
    /// within the bin, so bin counts differ by at most one.
    pub fn draw(&self) -> Vec<f64> {
        let (lo, hi) = self.interval;
        let w = (hi - lo) / self.bins as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.samples)
            .map(|j| {
                let b = j % self.bins;
                lo + w * (b as f64 + rng.random::<f64>())
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub count: usize,
    pub mean: RegionFractions,
    /// Band half-width: one standard deviation.
    pub std: RegionFractions,
}

/// Bins `(value, fractions)` samples over `interval` and reports the mean and
/// standard deviation of each fraction per bin.
pub fn bin_curves(
    samples: &[(f64, RegionFractions)],
    interval: (f64, f64),
    bins: usize,
    min_per_bin: usize,
) -> Result<Vec<BinStats>> {
    let (lo, hi) = interval;
    if !(lo < hi) || bins == 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot bin [{lo}, {hi}] into {bins} bins"
        )));
    }
    let w = (hi - lo) / bins as f64;
    let mut groups: Vec<Vec<[f64; 4]>> = vec![Vec::new(); bins];
    for (v, f) in samples {
        if !(lo..=hi).contains(v) {
            return Err(Error::InvalidParameter(format!(
                "sample {v} lies outside [{lo}, {hi}]"
            )));
        }
        let b = (((v - lo) / w) as usize).min(bins - 1);
        groups[b].push(f.as_array());
    }
    groups
        .iter()
        .enumerate()
        .map(|(b, g)| {
            if g.len() < min_per_bin {
                return Err(Error::InsufficientSamples {
                    bin: b,
                    count: g.len(),
                    min: min_per_bin,
                });
            }
            let n = g.len().max(1) as f64;
            let mut mean = [0.0; 4];
            for f in g {
                for k in 0..4 {
                    mean[k] += f[k] / n;
                }
            }
            let mut var = [0.0; 4];
            for f in g {
                for k in 0..4 {
                    var[k] += (f[k] - mean[k]).powi(2) / n;
                }
            }
            let a = lo + w * b as f64;
            Ok(BinStats {
                lo: a,
                hi: a + w,
                center: a + w / 2.0,
                count: g.len(),
                mean: RegionFractions::from_array(mean),
                std: RegionFractions::from_array(var.map(f64::sqrt)),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub value: f64,
    pub outcome: std::result::Result<RegionFractions, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub plan: SweepPlan,
    pub runs: Vec<SweepRun>,
    pub curves: Vec<BinStats>,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.outcome.is_err()).count()
    }
}

/// Draws the plan's samples, evaluates `run` on each in order and bins the
/// successful ones. Failed runs are kept in the outcome; bins are computed
/// over successes only.
pub fn parameter_sweep<F>(plan: &SweepPlan, mut run: F) -> Result<SweepOutcome>
where
    F: FnMut(usize, f64) -> Result<RegionFractions>,
{
    plan.validate()?;
    let runs: Vec<SweepRun> = plan
        .draw()
        .into_iter()
        .enumerate()
        .map(|(j, value)| SweepRun {
            value,
            outcome: run(j, value).map_err(|e| e.to_string()),
        })
        .collect();
    let curves = curves_from_runs(plan, &runs)?;
    Ok(SweepOutcome {
        plan: *plan,
        runs,
        curves,
    })
}

pub fn curves_from_runs(plan: &SweepPlan, runs: &[SweepRun]) -> Result<Vec<BinStats>> {
    let ok: Vec<(f64, RegionFractions)> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|f| (r.value, *f)))
        .collect();
    bin_curves(&ok, plan.interval, plan.bins, plan.min_per_bin)
}

/// CSV with one row per bin: center, count, then mean and std of each fraction.
pub fn write_curves_csv<W: Write>(out: W, curves: &[BinStats]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["bin_center".to_string(), "count".to_string()];
    for n in RegionFractions::NAMES {
        header.push(format!("{n}_mean"));
        header.push(format!("{n}_std"));
    }
    w.write_record(&header).map_err(csv_err)?;
    for b in curves {
        let mut row = vec![format!("{:e}", b.center), b.count.to_string()];
        for (m, s) in b.mean.as_array().iter().zip(b.std.as_array()) {
            row.push(format!("{m:e}"));
            row.push(format!("{s:e}"));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> RegionFractions {
        RegionFractions {
            ba: 0.1,
            ca: 0.12,
            aa: 0.22,
            ss: 0.3,
        }
    }

    #[test]
    fn stratified_counts() {
        let plan = SweepPlan::new(SweepVariable::CoilDiameter, 150, 9);
        let out = parameter_sweep(&plan, |_, _| Ok(flat())).unwrap();
        assert_eq!(out.curves.len(), 5);
        for (b, c) in out.curves.iter().enumerate() {
            assert_eq!(c.count, 30);
            let mid = 2e-3 + 1.2e-3 * (b as f64 + 0.5);
            assert!((c.center - mid).abs() < 1e-15);
            for (m, f) in c.mean.as_array().iter().zip(flat().as_array()) {
                assert!((m - f).abs() < 1e-15);
            }
            assert!(c.std.as_array().iter().all(|s| *s < 1e-15));
        }
    }

    #[test]
    fn too_few_samples() {
        let plan = SweepPlan::new(SweepVariable::CoilDiameter, 10, 9);
        let mut calls = 0;
        let r = parameter_sweep(&plan, |_, _| {
            calls += 1;
            Ok(flat())
        });
        assert!(matches!(r, Err(Error::InsufficientSamples { .. })));
        assert_eq!(calls, 0);
    }

    #[test]
    fn failures_shrink_bins() {
        let plan = SweepPlan::new(SweepVariable::YoungsModulus, 150, 2);
        let r = parameter_sweep(&plan, |j, _| {
            if j == 0 {
                Err(Error::InvalidParameter("boom".into()))
            } else {
                Ok(flat())
            }
        });
        assert!(matches!(r, Err(Error::InsufficientSamples { bin: 0, count: 29, .. })));
        let plan = SweepPlan {
            min_per_bin: 29,
            ..plan
        };
        let out = parameter_sweep(&plan, |j, _| {
            if j == 0 {
                Err(Error::InvalidParameter("boom".into()))
            } else {
                Ok(flat())
            }
        })
        .unwrap();
        assert_eq!(out.failures(), 1);
        assert_eq!(out.curves[0].count, 29);
    }

    #[test]
    fn deterministic_draw() {
        let plan = SweepPlan::new(SweepVariable::WireDiameter, 150, 4);
        assert_eq!(plan.draw(), plan.draw());
        assert!(plan.draw().iter().all(|v| (0.255e-3..=0.505e-3).contains(v)));
        assert_ne!(plan.draw(), SweepPlan { seed: 5, ..plan }.draw());
    }

    #[test]
    fn linear_response_bins() {
        let plan = SweepPlan::new(SweepVariable::CoilDiameter, 150, 1);
        let out = parameter_sweep(&plan, |_, v| {
            Ok(RegionFractions {
                aa: v,
                ..Default::default()
            })
        })
        .unwrap();
        for c in &out.curves {
            assert!(c.mean.aa > c.lo && c.mean.aa < c.hi);
            // Uniform on a bin of width w: std close to w / sqrt(12).
            let w = c.hi - c.lo;
            assert!((c.std.aa / (w / 12f64.sqrt()) - 1.0).abs() < 0.3);
        }
    }

    #[test]
    fn csv_layout() {
        let plan = SweepPlan::new(SweepVariable::CoilDiameter, 150, 9);
        let out = parameter_sweep(&plan, |_, _| Ok(flat())).unwrap();
        let mut buf = Vec::new();
        write_curves_csv(&mut buf, &out.curves).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "bin_center,count,ba_mean,ba_std,ca_mean,ca_std,aa_mean,aa_std,ss_mean,ss_std");
    }

    #[test]
    fn parses_variables() {
        assert_eq!("d3".parse::<SweepVariable>().unwrap(), SweepVariable::CoilDiameter);
        assert_eq!("E".parse::<SweepVariable>().unwrap(), SweepVariable::YoungsModulus);
        assert!("x".parse::<SweepVariable>().is_err());
    }
}
