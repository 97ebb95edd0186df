use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classify::OcclusionClass;
use super::sweep::csv_err;
use crate::{Error, Result, Vec3};

/// `n` points uniform in the ball of `radius` around the origin, by rejection
/// from the enclosing cube.
pub fn ball_offsets(radius: f64, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "perturbation radius must be finite and non-negative, got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec3::new(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        );
        if p.norm_squared() <= 1.0 {
            out.push(p * radius);
        }
    }
    Ok(out)
}

/// Class counts of an ensemble, with runs that errored counted apart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassHistogram {
    /// Indexed like [`OcclusionClass::ALL`].
    pub counts: [usize; 5],
    pub errors: usize,
}

impl ClassHistogram {
    pub fn add(&mut self, class: OcclusionClass) {
        let i = OcclusionClass::ALL.iter().position(|&c| c == class).expect("listed class");
        self.counts[i] += 1;
    }

    pub fn count(&self, class: OcclusionClass) -> usize {
        let i = OcclusionClass::ALL.iter().position(|&c| c == class).expect("listed class");
        self.counts[i]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.errors
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbedRun {
    pub offset: Vec3,
    pub outcome: std::result::Result<OcclusionClass, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOutcome {
    pub runs: Vec<PerturbedRun>,
    pub histogram: ClassHistogram,
}

pub fn histogram_of(runs: &[PerturbedRun]) -> ClassHistogram {
    let mut h = ClassHistogram::default();
    for r in runs {
        match r.outcome {
            Ok(c) => h.add(c),
            Err(_) => h.errors += 1,
        }
    }
    h
}

/// Runs `deploy` once per catheter tip offset drawn uniformly in a ball and
/// tallies the classes. Failed runs are recorded with their message.
pub fn perturbation_ensemble<F>(radius: f64, n: usize, seed: u64, mut deploy: F) -> Result<PerturbationOutcome>
where
    F: FnMut(usize, Vec3) -> Result<OcclusionClass>,
{
    let runs: Vec<PerturbedRun> = ball_offsets(radius, n, seed)?
        .into_iter()
        .enumerate()
        .map(|(j, offset)| PerturbedRun {
            offset,
            outcome: deploy(j, offset).map_err(|e| e.to_string()),
        })
        .collect();
    Ok(PerturbationOutcome {
        histogram: histogram_of(&runs),
        runs,
    })
}

/// Class counts per scenario, one row each: `scenario,I,II,IIIa,IIIb,Fail,errors`.
pub fn write_class_histograms<W: Write>(out: W, rows: &[(String, ClassHistogram)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["scenario"];
    header.extend(OcclusionClass::ALL.iter().map(|c| c.name()));
    header.push("errors");
    w.write_record(&header).map_err(csv_err)?;
    for (name, h) in rows {
        let mut row = vec![name.clone()];
        row.extend(h.counts.iter().map(|c| c.to_string()));
        row.push(h.errors.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_inside_ball() {
        let pts = ball_offsets(1e-3, 2000, 5).unwrap();
        assert_eq!(pts.len(), 2000);
        let max = pts.iter().map(|p| p.norm()).fold(0.0, f64::max);
        assert!(max <= 1e-3 && max > 0.95e-3);
        // Uniform in volume: mean |p|^3 / r^3 is 1/2.
        let m = pts.iter().map(|p| (p.norm() / 1e-3).powi(3)).sum::<f64>() / 2000.0;
        assert!((m - 0.5).abs() < 0.03);
        assert!(ball_offsets(-1.0, 3, 0).is_err());
    }

    #[test]
    fn zero_radius_is_one_scenario() {
        let out = perturbation_ensemble(0.0, 12, 1, |_, off| {
            assert_eq!(off, Vec3::zeros());
            Ok(OcclusionClass::II)
        })
        .unwrap();
        assert_eq!(out.histogram.count(OcclusionClass::II), 12);
        assert_eq!(out.histogram.total(), 12);
    }

    #[test]
    fn errors_are_counted() {
        let out = perturbation_ensemble(1e-3, 10, 1, |j, _| {
            if j % 3 == 0 {
                Err(Error::InvalidParameter("stuck".into()))
            } else {
                Ok(OcclusionClass::Fail)
            }
        })
        .unwrap();
        assert_eq!(out.histogram.errors, 4);
        assert_eq!(out.histogram.count(OcclusionClass::Fail), 6);
        assert_eq!(out.runs[0].outcome, Err("invalid parameter: stuck".into()));
    }

    #[test]
    fn seeded_ensemble_repeats() {
        let classify = |_, off: Vec3| {
            Ok(if off.z > 0.0 {
                OcclusionClass::I
            } else {
                OcclusionClass::IIIa
            })
        };
        let a = perturbation_ensemble(1e-3, 50, 77, classify).unwrap();
        let b = perturbation_ensemble(1e-3, 50, 77, classify).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn histogram_csv() {
        let mut h = ClassHistogram::default();
        h.add(OcclusionClass::I);
        h.add(OcclusionClass::IIIb);
        h.errors = 2;
        let mut buf = Vec::new();
        write_class_histograms(&mut buf, &[("base".into(), h)]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "scenario,I,II,IIIa,IIIb,Fail,errors\nbase,1,0,0,1,0,2\n"
        );
    }
}
