//! Experiment orchestration: single points, parameter sweeps, validation
//! against exact diagonalization, and entanglement analysis of bin dumps.

pub mod analyze;
pub mod config;
pub mod files;
pub mod validate;

pub use analyze::{analyze_point, AnalyzeOptions};
pub use config::{RunConfig, SweepAxis};
pub use validate::{validate_point, ChannelZ};

use crate::estimators::{jackknife, Accumulator, EstimateWithError, Measurer};
use crate::lattice::{LatticeGeometry, SepClasses, SeparationVector};
use crate::model::{directed_loop_table, fnv1a, Model};
use crate::sse::checkpoint;
use crate::sse::{Engine, SseState};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("configuration errors:\n{}", .0.join("\n"))]
    Config(Vec<String>),
    #[error(transparent)]
    File(#[from] files::FileError),
    #[error(transparent)]
    Checkpoint(#[from] checkpoint::CheckpointError),
    #[error("i/o on {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("analysis: {0}")]
    Analysis(String),
    #[error("oracle: {0}")]
    Oracle(#[from] crate::ed::EdError),
}

/// Worker-pool size: `SPINMC_WORKERS` if set, else available parallelism.
pub fn worker_pool_size() -> usize {
    std::env::var("SPINMC_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// One chain's full trajectory: thermalize, sample, checkpoint. Resuming
/// from a checkpoint continues the identical deterministic trajectory.
fn run_chain(
    cfg: &RunConfig,
    model: &Model,
    geom: &LatticeGeometry,
    seps: &[SeparationVector],
    chain: u64,
    dir: Option<&Path>,
    resume: bool,
) -> Result<Accumulator, RunnerError> {
    let fingerprint = model.fingerprint(geom.lx(), geom.ly());
    let rules = directed_loop_table(model);
    let mut measurer = Measurer::new(model, geom, seps, cfg.meas_levels);
    let mut engine = Engine::new(model, Some(&rules), SepClasses::new(geom, seps));

    let ckpt_path = dir.map(|d| d.join(format!("chain_{chain}.ckpt")));
    let bin_size = cfg.sweeps / cfg.bins;
    let (mut state, mut acc) = match (&ckpt_path, resume) {
        (Some(p), true) if p.exists() => checkpoint::load(p, fingerprint)?,
        _ => (
            SseState::init(model, cfg.seed, chain),
            Accumulator::new(measurer.schema.names.clone(), bin_size),
        ),
    };

    let therm = cfg.thermalization_sweeps();
    let total = therm + cfg.sweeps;
    let mut row = Vec::new();
    while state.sweep_count < total {
        let thermalizing = state.sweep_count < therm;
        engine.sweep(&mut state, thermalizing);
        if !thermalizing {
            measurer.measure(&state, model, &engine.trace, &mut row);
            acc.push(&row);
            if let Some(p) = &ckpt_path {
                let measured = state.sweep_count - therm;
                if cfg.checkpoint_every > 0
                    && measured % cfg.checkpoint_every == 0
                    && measured < cfg.sweeps
                {
                    checkpoint::save(p, &state, &acc, fingerprint)?;
                }
            }
        }
    }
    if let Some(p) = &ckpt_path {
        checkpoint::save(p, &state, &acc, fingerprint)?;
    }
    if let Some(d) = dir {
        let mut header = cfg.header_pairs();
        header.push(("chain".into(), chain.to_string()));
        files::write_bins(&d.join(format!("chain_{chain}.bins.tsv")), &header, &acc)?;
    }
    Ok(acc)
}

/// All chains of one parameter point, dispatched to a bounded worker pool;
/// merging happens afterwards in chain order, so results are independent
/// of scheduling.
pub fn run_chains(
    cfg: &RunConfig,
    dir: Option<&Path>,
    resume: bool,
) -> Result<Accumulator, RunnerError> {
    let (geom, model, seps) = cfg.build().map_err(RunnerError::Config)?;
    if let Some(d) = dir {
        std::fs::create_dir_all(d).map_err(|e| RunnerError::Io(d.to_path_buf(), e))?;
    }
    let n_chains = cfg.chains;
    let workers = worker_pool_size().min(n_chains as usize).max(1);

    let mut slots: Vec<Option<Result<Accumulator, RunnerError>>> =
        (0..n_chains).map(|_| None).collect();
    if workers == 1 {
        for (c, slot) in slots.iter_mut().enumerate() {
            *slot = Some(run_chain(cfg, &model, &geom, &seps, c as u64, dir, resume));
        }
    } else {
        let next = std::sync::atomic::AtomicU64::new(0);
        let slots_mutex = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let c = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if c >= n_chains {
                        break;
                    }
                    let r = run_chain(cfg, &model, &geom, &seps, c, dir, resume);
                    slots_mutex.lock().unwrap()[c as usize] = Some(r);
                });
            }
        });
    }

    let mut merged: Option<Accumulator> = None;
    for r in slots {
        let acc = r.expect("every chain ran")?;
        match &mut merged {
            None => merged = Some(acc),
            Some(m) => m
                .merge(&acc)
                .map_err(|e| RunnerError::Analysis(e.to_string()))?,
        }
    }
    Ok(merged.expect("at least one chain"))
}

#[derive(Debug)]
pub struct PointOutput {
    pub dir: PathBuf,
    pub merged: Accumulator,
    pub summary: Vec<(String, EstimateWithError)>,
}

/// Run one parameter point: raw bin dumps per chain plus a merged summary
/// with jackknife errors for every observable column.
pub fn run_point(cfg: &RunConfig, resume: bool) -> Result<PointOutput, RunnerError> {
    let dir = PathBuf::from(&cfg.out_dir);
    let merged = run_chains(cfg, Some(&dir), resume)?;
    merged
        .require_complete()
        .map_err(|e| RunnerError::Analysis(e.to_string()))?;
    let mut summary = Vec::with_capacity(merged.n_cols());
    for (c, name) in merged.names.iter().enumerate() {
        let est = jackknife(&[&merged.bins[c]], |m| m[0])
            .map_err(|e| RunnerError::Analysis(e.to_string()))?;
        summary.push((name.clone(), est));
    }
    files::write_summary(&dir.join("summary.tsv"), &cfg.header_pairs(), &summary)?;
    Ok(PointOutput {
        dir,
        merged,
        summary,
    })
}

/// Directory name of one sweep point.
pub fn sweep_point_dir(base: &Path, parameter: &str, value: f64) -> PathBuf {
    base.join(format!("{parameter}_{value:+.6}"))
}

/// Independent run_point per axis value with derived seeds. Finished
/// points (summary present) are skipped on resume; partially finished
/// points continue from their checkpoints.
pub fn run_sweep(cfg: &RunConfig, resume: bool) -> Result<Vec<(f64, PathBuf)>, RunnerError> {
    let axis = cfg
        .axis
        .clone()
        .ok_or_else(|| RunnerError::Config(vec!["sweep requires an [axis] section".into()]))?;
    cfg.build().map_err(RunnerError::Config)?;
    let base = PathBuf::from(&cfg.out_dir);
    let mut out = Vec::new();
    for (k, &v) in axis.values.iter().enumerate() {
        let mut sub = cfg.with_axis_value(&axis, v);
        let dir = sweep_point_dir(&base, &axis.parameter, v);
        sub.out_dir = dir.display().to_string();
        sub.seed = cfg.seed ^ fnv1a(format!("sweep-point-{k}").as_bytes());
        let summary_path = dir.join("summary.tsv");
        if resume && summary_path.exists() {
            out.push((v, dir));
            continue;
        }
        run_point(&sub, resume)?;
        out.push((v, dir));
    }
    Ok(out)
}
