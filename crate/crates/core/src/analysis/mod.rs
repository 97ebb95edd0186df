mod classify;
mod perturb;
mod stats;
mod sweep;
mod voxel;

pub use classify::{classify, classify_with, occlusion_report, OcclusionClass, OcclusionReport, Thresholds};
pub use perturb::{
    ball_offsets, histogram_of, perturbation_ensemble, write_class_histograms, ClassHistogram,
    PerturbationOutcome, PerturbedRun,
};
pub use stats::{
    ensemble_fractions, ensemble_stats, region_densities, region_fractions, region_integrals,
    EnsembleFractions, EnsembleStats, RegionDensities, RegionFractions, RegionIntegrals,
};
pub use sweep::{
    bin_curves, curves_from_runs, parameter_sweep, write_curves_csv, BinStats, SweepOutcome,
    SweepPlan, SweepRun, SweepVariable,
};
pub use voxel::{voxelize, voxelize_clipped, VoxelGrid};
