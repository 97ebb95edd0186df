use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use coilsim::analysis::{
    ensemble_fractions, ensemble_stats, histogram_of, occlusion_report, ball_offsets,
    curves_from_runs, write_class_histograms, write_curves_csv, ClassHistogram, OcclusionReport,
    PerturbedRun, SweepPlan, SweepRun, SweepVariable, Thresholds, VoxelGrid,
};
use coilsim::geometry::{read_raw_lattice, write_raw_lattice};
use coilsim::scenario::{Prepared, ScenarioConfig};
use coilsim::shapes::{read_centerline_csv, write_centerline_csv, ShapeSpec};
use coilsim::{Error, Vec3};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{new_run_dir, Diagnostics, Recorder};
use crate::{
    ClassifyArgs, PerturbArgs, ReportArgs, RunArgs, SimulateArgs, SweepArgs, ThresholdArgs,
    VoxelizeArgs, Workers,
};

/// Bad input that never reached the simulation.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Invalid(msg.into()))
}

/// 0 success, 1 simulation failure, 2 input validation failure.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.is::<Invalid>() || cause.is::<serde_json::Error>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::StepDiverged { .. }
                | Error::CoilStuck { .. }
                | Error::AntiParallelTangents { .. }
                | Error::Io(_) => 1,
                _ => 2,
            };
        }
    }
    1
}

fn load_config(path: &Path) -> Result<(ScenarioConfig, Option<PathBuf>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = ScenarioConfig::from_json(&text)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((cfg, path.parent().map(Path::to_path_buf)))
}

fn apply_run_args(cfg: &mut ScenarioConfig, run: &RunArgs) {
    if let Some(n) = run.snapshot_every {
        cfg.sim.snapshot_every = n;
    }
    if let ShapeSpec::Frame3d { seed } = &mut cfg.shape {
        *seed = run.seed;
    }
}

fn apply_thresholds(cfg: &mut ScenarioConfig, th: &ThresholdArgs) -> Result<()> {
    let t = &mut cfg.analysis.thresholds;
    if let Some(v) = th.core_th {
        t.core = v;
    }
    if let Some(v) = th.boundary_th {
        t.boundary = v;
    }
    if let Some(v) = th.sphere_th {
        t.sphere = v;
    }
    t.validate().map_err(|e| invalid(e.to_string()))
}

/// Mesh paths are made absolute so the config snapshot stays usable from
/// the run directory.
fn absolutize(cfg: &mut ScenarioConfig, base: Option<&Path>) {
    if let coilsim::scenario::CavitySpec::Mesh { necked, full, .. } = &mut cfg.cavity {
        for p in std::iter::once(necked).chain(full.iter_mut()) {
            if p.is_relative() {
                if let Some(b) = base {
                    *p = b.join(&*p);
                }
            }
            if let Ok(abs) = std::path::absolute(&*p) {
                *p = abs;
            }
        }
    }
}

fn prepare(cfg: &ScenarioConfig) -> Result<Prepared> {
    Ok(Prepared::new(cfg, None)?)
}

fn config_value(cfg: &ScenarioConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn pool(w: &Workers) -> Result<rayon::ThreadPool> {
    let n = match w.workers {
        Some(0) => return Err(invalid("--workers must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)
}

fn write_grid(rec: &mut Recorder, name: &str, grid: &VoxelGrid) -> Result<()> {
    write_raw_lattice(&rec.dir.join(name), &grid.lattice, &grid.values)?;
    rec.record(name)?;
    rec.record(&Path::new(name).with_extension("json").to_string_lossy())?;
    Ok(())
}

/// Deploys into `dir` and writes snapshots, final centerline, voxel grid,
/// summary and report. The manifest is written last, also on failure.
fn run_into(prepared: &Prepared, offset: &Vec3, dir: PathBuf, seed: u64) -> Result<(Diagnostics, OcclusionReport)> {
    let mut rec = Recorder::new(dir);
    rec.write_json("config.json", &prepared.config)?;
    let outcome = (|| -> Result<(Diagnostics, OcclusionReport)> {
        let (dep, analysis) = prepared.run(offset)?;
        let mut lines = Vec::new();
        for s in &dep.snapshots {
            serde_json::to_writer(&mut lines, s)?;
            lines.push(b'\n');
        }
        rec.write("snapshots.jsonl", &lines)?;
        let positions = dep.final_state.as_ref().map(|s| s.positions.clone()).unwrap_or_default();
        let mut csv = Vec::new();
        write_centerline_csv(&mut csv, &positions)?;
        rec.write("centerline.csv", &csv)?;
        write_grid(&mut rec, "voxels.raw", &analysis.grid)?;
        rec.write_json("summary.json", &dep.summary)?;
        rec.write_json("report.json", &analysis.report)?;
        let s = &dep.summary;
        let diag = Diagnostics {
            completed: s.completed,
            steps: s.steps,
            dt: s.dt,
            max_penetration: s.max_penetration,
            elastic_energy: s.elastic_energy,
            kinetic_energy: s.kinetic_energy,
            inserted_length: s.inserted_length,
            packing_density: s.packing_density,
            class: Some(analysis.report.class.to_string()),
        };
        Ok((diag, analysis.report))
    })();
    let cfg = config_value(&prepared.config);
    match outcome {
        Ok((diag, report)) => {
            rec.finish("simulate", seed, cfg, Some(diag.clone()), None, 0)?;
            Ok((diag, report))
        }
        Err(e) => {
            rec.finish("simulate", seed, cfg, None, Some(format!("{e:#}")), exit_code(&e))?;
            Err(e)
        }
    }
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let (mut cfg, base) = load_config(&a.common.config)?;
    apply_run_args(&mut cfg, &a.run);
    apply_thresholds(&mut cfg, &a.thresholds)?;
    absolutize(&mut cfg, base.as_deref());
    let prepared = prepare(&cfg)?;
    let dir = new_run_dir(&a.common.out, "", a.run.seed)?;
    eprintln!("simulating into {}", dir.display());
    let result = run_into(&prepared, &Vec3::zeros(), dir.clone(), a.run.seed);
    println!("{}", dir.display());
    let (diag, _) = result?;
    eprintln!(
        "done: {} steps, packing {:.4}, class {}",
        diag.steps,
        diag.packing_density,
        diag.class.unwrap_or_default()
    );
    Ok(())
}

fn with_variable(cfg: &ScenarioConfig, var: SweepVariable, value: f64) -> ScenarioConfig {
    let mut c = cfg.clone();
    match var {
        SweepVariable::YoungsModulus => c.coil.youngs_modulus = value,
        SweepVariable::WireDiameter => c.coil.d2 = value,
        SweepVariable::CoilDiameter => c.coil.d3 = value,
    }
    c
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run_dir_name(j: usize) -> String {
    format!("run-{j:04}")
}

/// Runs `job` for every index not yet marked done by `result.json` in its
/// run directory, in parallel, returning results in index order.
fn farm_out<T, F>(root: &Path, n: usize, workers: &Workers, job: F) -> Result<Vec<T>>
where
    T: Serialize + serde::de::DeserializeOwned + Send,
    F: Fn(usize, PathBuf) -> T + Sync,
{
    let pool = pool(workers)?;
    pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|j| -> Result<T> {
                let dir = root.join(run_dir_name(j));
                let done = dir.join("result.json");
                if done.exists() {
                    eprintln!("run {j}: already finished, skipping");
                    return read_json(&done);
                }
                if dir.exists() {
                    fs::remove_dir_all(&dir)?;
                }
                fs::create_dir_all(&dir)?;
                let out = job(j, dir.clone());
                let mut text = serde_json::to_vec_pretty(&out)?;
                text.push(b'\n');
                crate::output::write_atomic(&done, &text)?;
                Ok(out)
            })
            .collect()
    })
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let (root, cfg, plan, mut rec) = match &a.resume {
        Some(dir) => {
            let plan: SweepPlan = read_json(&dir.join("plan.json")).map_err(|e| invalid(format!("{e:#}")))?;
            let cfg: ScenarioConfig = read_json(&dir.join("config.json")).map_err(|e| invalid(format!("{e:#}")))?;
            let mut rec = Recorder::new(dir.clone());
            rec.record("plan.json")?;
            rec.record("config.json")?;
            (dir.clone(), cfg, plan, rec)
        }
        None => {
            let path = a.config.as_ref().ok_or_else(|| invalid("--config is required"))?;
            let (mut cfg, base) = load_config(path)?;
            apply_run_args(&mut cfg, &a.run);
            absolutize(&mut cfg, base.as_deref());
            let var: SweepVariable = a
                .variable
                .as_deref()
                .ok_or_else(|| invalid("--variable is required"))?
                .parse()?;
            let plan = SweepPlan {
                interval: match (a.min, a.max) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => var.default_interval(),
                },
                bins: a.bins,
                min_per_bin: a.min_per_bin,
                ..SweepPlan::new(var, a.samples, a.run.seed)
            };
            plan.validate()?;
            prepare(&cfg)?;
            let root = new_run_dir(&a.out, "sweep-", a.run.seed)?;
            let mut rec = Recorder::new(root.clone());
            rec.write_json("plan.json", &plan)?;
            rec.write_json("config.json", &cfg)?;
            (root, cfg, plan, rec)
        }
    };
    plan.validate()?;
    eprintln!("sweep of {} over {:?} in {}", plan.variable, plan.interval, root.display());
    println!("{}", root.display());
    let values = plan.draw();
    let runs: Vec<SweepRun> = farm_out(&root, values.len(), &a.workers, |j, dir| {
        let value = values[j];
        let cfg = with_variable(&cfg, plan.variable, value);
        let outcome = prepare(&cfg)
            .and_then(|p| run_into(&p, &Vec3::zeros(), dir, plan.seed))
            .map(|(_, report)| report.fractions)
            .map_err(|e| format!("{e:#}"));
        if let Err(msg) = &outcome {
            eprintln!("run {j} ({} = {value:e}) failed: {msg}", plan.variable);
        }
        SweepRun { value, outcome }
    })?;
    rec.write_json("runs.json", &runs)?;
    let failures = runs.iter().filter(|r| r.outcome.is_err()).count();
    let cfgv = config_value(&cfg);
    match curves_from_runs(&plan, &runs) {
        Ok(curves) => {
            let mut csv = Vec::new();
            write_curves_csv(&mut csv, &curves)?;
            rec.write("curves.csv", &csv)?;
            rec.finish("sweep", plan.seed, cfgv, None, None, 0)?;
            eprintln!("{} runs, {failures} failed", runs.len());
            Ok(())
        }
        Err(e) => {
            let msg = format!("{failures} of {} runs failed; {e}", runs.len());
            rec.finish("sweep", plan.seed, cfgv, None, Some(msg.clone()), 1)?;
            Err(anyhow!(msg))
        }
    }
}

pub fn perturb(a: PerturbArgs) -> Result<()> {
    let (mut cfg, base) = load_config(&a.common.config)?;
    apply_run_args(&mut cfg, &a.run);
    apply_thresholds(&mut cfg, &a.thresholds)?;
    absolutize(&mut cfg, base.as_deref());
    let offsets = ball_offsets(a.radius, a.runs, a.run.seed)?;
    let prepared = prepare(&cfg)?;
    let scenario = a.scenario.clone().unwrap_or_else(|| {
        a.common
            .config
            .file_stem()
            .map_or("scenario".into(), |s| s.to_string_lossy().into_owned())
    });
    let root = new_run_dir(&a.common.out, "perturb-", a.run.seed)?;
    eprintln!("{} perturbed deployments in {}", a.runs, root.display());
    println!("{}", root.display());
    let mut rec = Recorder::new(root.clone());
    rec.write_json("config.json", &cfg)?;
    let runs: Vec<PerturbedRun> = farm_out(&root, offsets.len(), &a.workers, |j, dir| {
        let offset = offsets[j];
        let outcome = run_into(&prepared, &offset, dir, a.run.seed)
            .map(|(_, r)| r.class)
            .map_err(|e| format!("{e:#}"));
        if let Err(msg) = &outcome {
            eprintln!("run {j} failed: {msg}");
        }
        PerturbedRun { offset, outcome }
    })?;
    let hist = histogram_of(&runs);
    rec.write_json("runs.json", &runs)?;
    let mut csv = Vec::new();
    write_class_histograms(&mut csv, &[(scenario, hist)])?;
    rec.write("histogram.csv", &csv)?;
    rec.finish("perturb", a.run.seed, config_value(&cfg), None, None, 0)?;
    eprintln!("classes {:?}, {} failed", hist.counts, hist.errors);
    Ok(())
}

pub fn voxelize(a: VoxelizeArgs) -> Result<()> {
    let (mut cfg, base) = load_config(&a.common.config)?;
    absolutize(&mut cfg, base.as_deref());
    let file = fs::File::open(&a.centerline)
        .map_err(|e| invalid(format!("cannot read centerline {}: {e}", a.centerline.display())))?;
    let pts = read_centerline_csv(file)?;
    let prepared = prepare(&cfg)?;
    let grid = coilsim::analysis::voxelize(&pts, prepared.coil.d2, prepared.lattice())?;
    let root = new_run_dir(&a.common.out, "voxelize-", 0)?;
    let mut rec = Recorder::new(root.clone());
    write_grid(&mut rec, "voxels.raw", &grid)?;
    rec.finish("voxelize", 0, config_value(&cfg), None, None, 0)?;
    println!("{}", root.display());
    Ok(())
}

fn read_grid(path: &Path) -> Result<VoxelGrid> {
    let (lattice, values) = read_raw_lattice(path)
        .map_err(|e| invalid(format!("cannot read voxel grid {}: {e}", path.display())))?;
    Ok(VoxelGrid { lattice, values })
}

pub fn classify(a: ClassifyArgs) -> Result<()> {
    let (mut cfg, base) = load_config(&a.common.config)?;
    apply_thresholds(&mut cfg, &a.thresholds)?;
    absolutize(&mut cfg, base.as_deref());
    let grid = read_grid(&a.voxels)?;
    let prepared = prepare(&cfg)?;
    let report = occlusion_report(&grid, &prepared.partition, &cfg.analysis.thresholds)?;
    let root = new_run_dir(&a.common.out, "classify-", 0)?;
    let mut rec = Recorder::new(root.clone());
    rec.write_json("report.json", &report)?;
    rec.finish("classify", 0, config_value(&cfg), None, None, 0)?;
    eprintln!("class {}", report.class);
    println!("{}", root.display());
    Ok(())
}

fn collect_runs(dirs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for d in dirs {
        if d.join("voxels.raw").exists() {
            out.push(d.clone());
            continue;
        }
        let mut subs: Vec<PathBuf> = fs::read_dir(d)
            .map_err(|e| invalid(format!("cannot list {}: {e}", d.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("voxels.raw").exists())
            .collect();
        subs.sort();
        if subs.is_empty() {
            return Err(invalid(format!("{} holds no voxel grids", d.display())));
        }
        out.extend(subs);
    }
    Ok(out)
}

#[derive(Serialize)]
struct RunEntry {
    dir: String,
    report: OcclusionReport,
}

#[derive(Serialize)]
struct EnsembleReport {
    runs: Vec<RunEntry>,
    fractions: coilsim::analysis::EnsembleFractions,
    thresholds: Thresholds,
    histogram: ClassHistogram,
}

pub fn report(a: ReportArgs) -> Result<()> {
    let (mut cfg, base) = load_config(&a.common.config)?;
    apply_thresholds(&mut cfg, &a.thresholds)?;
    absolutize(&mut cfg, base.as_deref());
    let prepared = prepare(&cfg)?;
    let run_dirs = collect_runs(&a.dirs)?;
    let grids: Vec<VoxelGrid> = run_dirs
        .iter()
        .map(|d| read_grid(&d.join("voxels.raw")))
        .collect::<Result<_>>()?;
    let th = cfg.analysis.thresholds;
    let mut hist = ClassHistogram::default();
    let mut runs = Vec::new();
    for (d, g) in run_dirs.iter().zip(&grids) {
        let report = occlusion_report(g, &prepared.partition, &th)?;
        hist.add(report.class);
        runs.push(RunEntry {
            dir: d.display().to_string(),
            report,
        });
    }
    let stats = ensemble_stats(&grids)?;
    let fractions = ensemble_fractions(&grids, &prepared.partition)?;
    let root = new_run_dir(&a.common.out, "report-", 0)?;
    let mut rec = Recorder::new(root.clone());
    write_grid(&mut rec, "mean.raw", &stats.mean)?;
    write_grid(&mut rec, "variance.raw", &stats.variance)?;
    let scenario = a
        .common
        .config
        .file_stem()
        .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    let mut csv = Vec::new();
    write_class_histograms(&mut csv, &[(scenario, hist)])?;
    rec.write("histogram.csv", &csv)?;
    rec.write_json(
        "report.json",
        &EnsembleReport {
            runs,
            fractions,
            thresholds: th,
            histogram: hist,
        },
    )?;
    rec.finish("report", 0, config_value(&cfg), None, None, 0)?;
    if grids.len() < 2 {
        eprintln!("note: a single run has zero ensemble spread");
    }
    println!("{}", root.display());
    Ok(())
}
