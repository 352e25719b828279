//! Validation mode: run the Monte Carlo and exact diagonalization on the
//! same small system and compare every measured channel as a z-score.

use crate::channel::{Axis, ChannelId};
use crate::ed::EdOracle;
use crate::estimators::{jackknife, Accumulator, EstimateWithError};
use crate::lattice::SeparationVector;
use crate::model::ModelKind;
use crate::runner::{run_chains, RunConfig, RunnerError};

#[derive(Debug, Clone)]
pub struct ChannelZ {
    pub name: String,
    pub mc: EstimateWithError,
    pub exact: f64,
    pub z: f64,
}

impl ChannelZ {
    fn new(name: String, mc: EstimateWithError, exact: f64) -> Self {
        // A zero-variance estimator only passes on an exact match.
        let sigma = mc.sigma.max(1e-14);
        let z = (mc.value - exact).abs() / sigma;
        Self { name, mc, exact, z }
    }
}

pub const Z_FAIL: f64 = 4.0;

/// Compare a merged accumulator against the oracle; one entry per
/// measurable channel, single-site mean, and the energy.
pub fn compare_to_oracle(
    cfg: &RunConfig,
    acc: &Accumulator,
    seps: &[SeparationVector],
    ed: &EdOracle,
    kind: ModelKind,
) -> Result<Vec<ChannelZ>, RunnerError> {
    let schema = crate::estimators::Schema::new(kind, seps);
    let est = |colname: &str| -> Result<EstimateWithError, RunnerError> {
        let c = acc
            .col_index(colname)
            .ok_or_else(|| RunnerError::Analysis(format!("missing column {colname}")))?;
        jackknife(&[&acc.bins[c]], |m| m[0]).map_err(|e| RunnerError::Analysis(e.to_string()))
    };

    let mut rows = Vec::new();
    rows.push(ChannelZ::new(
        "energy".into(),
        est("energy")?,
        ed.energy_per_site(),
    ));

    let n_sites = (cfg.lx * cfg.ly) as f64;
    for axis in [Axis::X, Axis::Z] {
        if let Some(col) = schema.single_col(axis) {
            let exact = (0..cfg.lx * cfg.ly)
                .map(|i| ed.single(axis, i))
                .sum::<f64>()
                / n_sites;
            rows.push(ChannelZ::new(
                format!("<s{}>", axis.label()),
                est(&schema.names[col])?,
                exact,
            ));
        }
    }

    let channels = [
        ChannelId { alpha: Axis::Z, beta: Axis::Z },
        ChannelId { alpha: Axis::X, beta: Axis::X },
        ChannelId { alpha: Axis::Y, beta: Axis::Y },
        ChannelId { alpha: Axis::Z, beta: Axis::X },
        ChannelId { alpha: Axis::X, beta: Axis::Z },
    ];
    for (k, sep) in seps.iter().enumerate() {
        for ch in channels {
            let Some(col) = schema.channel_col(ch, k) else {
                continue;
            };
            // xx and yy share a column for XXZ; list each once.
            let name = format!("{ch}@{},{}", sep.dx, sep.dy);
            if kind == ModelKind::Xxz && ch.alpha == Axis::Y {
                continue;
            }
            rows.push(ChannelZ::new(name, est(&schema.names[col])?, ed.channel_at_sep(ch, *sep)));
        }
    }
    Ok(rows)
}

/// Run MC and ED on the config's system; fails (`Ok((rows, false))`) when
/// any |z| exceeds 4.
pub fn validate_point(cfg: &RunConfig) -> Result<(Vec<ChannelZ>, bool), RunnerError> {
    let (geom, model, seps) = cfg.build().map_err(RunnerError::Config)?;
    let ed = EdOracle::new(&model, &geom, cfg.beta)?;
    let acc = run_chains(cfg, None, false)?;
    let rows = compare_to_oracle(cfg, &acc, &seps, &ed, model.kind)?;
    let pass = rows.iter().all(|r| r.z <= Z_FAIL);
    Ok((rows, pass))
}

/// Worst offender first; used for reporting.
pub fn worst_channel(rows: &[ChannelZ]) -> Option<&ChannelZ> {
    rows.iter().max_by(|a, b| a.z.partial_cmp(&b.z).unwrap())
}
