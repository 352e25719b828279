//! Entanglement analysis of bin dumps: per separation, the concurrence of
//! formation (closed form and eigenvalue route), entanglement of formation,
//! concurrence of assistance, and both localizable-entanglement bounds,
//! all with jackknife errors propagated through the full pipeline.

use crate::channel::{Axis, ChannelId, PairChannels};
use crate::entanglement::{
    assemble_rho, concurrence_assistance, concurrence_formation, connected_q,
    ef_from_concurrence, project_psd, single_site_entropy, single_site_rho,
    tfim_concurrence_mc, xxz_assistance_mc, xxz_concurrence_mc,
};
use crate::estimators::{jackknife, Accumulator, EstimateWithError};
use crate::lattice::SeparationVector;
use crate::model::ModelKind;
use crate::runner::{files, RunnerError};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    /// Evaluate XXZ singles through the broken-symmetry reconstruction
    /// <sigma^z_i> -> +/- m_s by sublattice instead of the raw means.
    pub broken_symmetry: bool,
    /// Presentation multiplier applied to concurrence columns (chain
    /// comparison); never stored in raw data.
    pub d_factor: f64,
    /// Also report the concurrence of the PSD-projected density matrix.
    pub psd_project: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            broken_symmetry: false,
            d_factor: 1.0,
            psd_project: false,
        }
    }
}

/// Everything the analysis needs to interpret an accumulator.
#[derive(Debug, Clone)]
pub struct AnalysisInput {
    pub kind: ModelKind,
    pub h_stag: f64,
    pub lx: usize,
    pub ly: usize,
    pub seps: Vec<SeparationVector>,
}

#[derive(Debug, Clone)]
pub struct SepAnalysis {
    pub sep: SeparationVector,
    pub distance: f64,
    /// (label, estimate) for the channel means entering the formulas.
    pub channels: Vec<(String, EstimateWithError)>,
    pub cf: EstimateWithError,
    pub cf_unclamped: EstimateWithError,
    pub ef: EstimateWithError,
    pub ca: EstimateWithError,
    pub el_lower: EstimateWithError,
    pub el_upper: EstimateWithError,
    pub cf_eigen: EstimateWithError,
    pub cf_psd: Option<EstimateWithError>,
    pub min_rho_eigenvalue: f64,
    pub site_entropy: f64,
}

/// Column means layout used by the jackknife closures.
const M_ZZ: usize = 0;
const M_XX: usize = 1;
const M_YY: usize = 2;
const M_ZX: usize = 3;
const M_XZ: usize = 4;
const M_MAG: usize = 5;
const M_MAG_Z: usize = 6;
const M_MS2: usize = 7;
const M_MS_DIRECT: usize = 8;

fn staggered_m(h_stag: f64, means: &[f64]) -> f64 {
    if h_stag > 0.0 {
        means[M_MS_DIRECT].abs()
    } else {
        means[M_MS2].max(0.0).sqrt()
    }
}

/// Channel map for one pair from the column means, with the model's
/// symmetry-forced zeros filled in explicitly.
fn channels_from_means(
    kind: ModelKind,
    h_stag: f64,
    broken: bool,
    same_sublattice: bool,
    m: &[f64],
) -> PairChannels {
    match kind {
        ModelKind::Xxz => {
            let (z_i, z_j) = if broken {
                let ms = staggered_m(h_stag, m);
                (ms, if same_sublattice { ms } else { -ms })
            } else {
                (m[M_MAG], m[M_MAG])
            };
            crate::entanglement::xxz_symmetric_channels(m[M_XX], m[M_ZZ], z_i, z_j)
        }
        ModelKind::Tfim => crate::entanglement::tfim_symmetric_channels(
            m[M_XX],
            m[M_YY],
            m[M_ZZ],
            m[M_MAG],
            m[M_MAG],
            m[M_MAG_Z],
            m[M_MAG_Z],
            m[M_ZX],
            m[M_XZ],
        ),
    }
}

fn singles_from_channels(ch: &PairChannels) -> (f64, f64, f64, f64) {
    (
        ch.get_or_zero(ChannelId { alpha: Axis::Z, beta: Axis::I }),
        ch.get_or_zero(ChannelId { alpha: Axis::I, beta: Axis::Z }),
        ch.get_or_zero(ChannelId { alpha: Axis::X, beta: Axis::I }),
        ch.get_or_zero(ChannelId { alpha: Axis::I, beta: Axis::X }),
    )
}

/// Analyze a merged accumulator. Pure function of its inputs.
pub fn analyze_accumulator(
    input: &AnalysisInput,
    acc: &Accumulator,
    opts: &AnalyzeOptions,
) -> Result<Vec<SepAnalysis>, RunnerError> {
    let kind = input.kind;
    let col = |name: &str, needed_by: &str| -> Result<usize, RunnerError> {
        acc.col_index(name).ok_or_else(|| {
            RunnerError::Analysis(format!(
                "channel column '{name}' required by {needed_by} is missing from the bin data"
            ))
        })
    };

    let mut out = Vec::with_capacity(input.seps.len());
    for sep in &input.seps {
        let suffix = format!("@{},{}", sep.dx, sep.dy);
        let cols = [
            col(&format!("zz{suffix}"), "all entanglement formulas")?,
            col(&format!("xx{suffix}"), "all entanglement formulas")?,
            col(&format!("yy{suffix}"), "the Ising concurrence")?,
            col(&format!("zx{suffix}"), "the assisted-concurrence density matrix")?,
            col(&format!("xz{suffix}"), "the assisted-concurrence density matrix")?,
            col("mag", "single-site means")?,
            col("mag_z", "single-site means")?,
            col("ms2", "the staggered magnetization")?,
            col("ms_direct", "the staggered magnetization")?,
        ];
        let series: Vec<&[f64]> = cols.iter().map(|&c| acc.bins[c].as_slice()).collect();

        let same_sublattice = (sep.dx + sep.dy) % 2 == 0;
        let broken = opts.broken_symmetry;
        let h_stag = input.h_stag;

        // Noise scale for the eigenvalue tolerance: the largest single-
        // channel jackknife error.
        let mut sigma_scale = 0.0f64;
        for s in &series {
            let e = jackknife(&[s], |m| m[0]).map_err(|e| RunnerError::Analysis(e.to_string()))?;
            sigma_scale = sigma_scale.max(e.sigma);
        }
        let tol = (10.0 * sigma_scale).max(1e-9);

        let jk = |f: &dyn Fn(&PairChannels, &[f64]) -> f64| -> Result<EstimateWithError, RunnerError> {
            jackknife(&series, |m| {
                let ch = channels_from_means(kind, h_stag, broken, same_sublattice, m);
                f(&ch, m)
            })
            .map_err(|e| RunnerError::Analysis(e.to_string()))
        };

        let cf_pair = |ch: &PairChannels, _m: &[f64]| -> (f64, f64) {
            let (zi, zj, _, _) = singles_from_channels(ch);
            let xx = ch.get_or_zero(ChannelId { alpha: Axis::X, beta: Axis::X });
            let yy = ch.get_or_zero(ChannelId { alpha: Axis::Y, beta: Axis::Y });
            let zz = ch.get_or_zero(ChannelId { alpha: Axis::Z, beta: Axis::Z });
            match kind {
                ModelKind::Xxz => xxz_concurrence_mc(xx + yy, zz, zi, zj),
                ModelKind::Tfim => tfim_concurrence_mc(xx, yy, zz, zi, zj),
            }
        };

        let cf = jk(&|ch, m| cf_pair(ch, m).0)?;
        let cf_unclamped = jk(&|ch, m| cf_pair(ch, m).1)?;
        let ef = jk(&|ch, m| {
            ef_from_concurrence(cf_pair(ch, m).0.clamp(0.0, 1.0)).unwrap_or(f64::NAN)
        })?;
        let ca = jk(&|ch, _m| match kind {
            ModelKind::Xxz => {
                let (zi, zj, _, _) = singles_from_channels(ch);
                let zz = ch.get_or_zero(ChannelId { alpha: Axis::Z, beta: Axis::Z });
                xxz_assistance_mc(zz, zi, zj)
            }
            ModelKind::Tfim => assemble_rho(ch)
                .ok()
                .and_then(|rho| concurrence_assistance(&rho, tol).ok())
                .unwrap_or(f64::NAN),
        })?;
        let el_lower = jk(&|ch, _m| match connected_q(ch) {
            Ok((_, el)) => el,
            Err(_) => f64::NAN,
        })?;
        let cf_eigen = jk(&|ch, _m| {
            assemble_rho(ch)
                .ok()
                .and_then(|rho| concurrence_formation(&rho, tol).ok())
                .map(|c| c.value)
                .unwrap_or(f64::NAN)
        })?;
        let cf_psd = if opts.psd_project {
            Some(jk(&|ch, _m| {
                assemble_rho(ch)
                    .ok()
                    .map(|rho| project_psd(&rho))
                    .and_then(|rho| concurrence_formation(&rho, tol).ok())
                    .map(|c| c.value)
                    .unwrap_or(f64::NAN)
            })?)
        } else {
            None
        };

        // Diagnostics at the full means.
        let full_means: Vec<f64> = series
            .iter()
            .map(|s| s.iter().sum::<f64>() / s.len() as f64)
            .collect();
        let ch_full = channels_from_means(kind, h_stag, broken, same_sublattice, &full_means);
        let (min_rho_eigenvalue, site_entropy) = match assemble_rho(&ch_full) {
            Ok(rho) => {
                let min_eig = concurrence_formation(&rho, tol)
                    .map(|c| c.min_rho_eigenvalue)
                    .unwrap_or(f64::NAN);
                let (zi, _, xi, _) = singles_from_channels(&ch_full);
                let ent = single_site_entropy(&single_site_rho(xi, 0.0, zi)).unwrap_or(f64::NAN);
                (min_eig, ent)
            }
            Err(_) => (f64::NAN, f64::NAN),
        };

        // Channel means with their own errors, for the output table.
        let mut channels = Vec::new();
        let labels = ["zz", "xx", "yy", "zx", "xz"];
        for (k, label) in labels.iter().enumerate() {
            let e = jackknife(&[series[k]], |m| m[0])
                .map_err(|e| RunnerError::Analysis(e.to_string()))?;
            let e = if kind == ModelKind::Xxz && *label == "yy" {
                // Measured through the xx estimator.
                jackknife(&[series[M_XX]], |m| m[0])
                    .map_err(|e| RunnerError::Analysis(e.to_string()))?
            } else {
                e
            };
            channels.push((label.to_string(), e));
        }

        let scale = |mut e: EstimateWithError| {
            e.value *= opts.d_factor;
            e.sigma *= opts.d_factor;
            e
        };
        out.push(SepAnalysis {
            sep: *sep,
            distance: sep.min_image_distance(input.lx, input.ly),
            channels,
            cf: scale(cf),
            cf_unclamped: scale(cf_unclamped),
            ef,
            ca,
            el_lower,
            el_upper: ca,
            cf_eigen: scale(cf_eigen),
            cf_psd: cf_psd.map(scale),
            min_rho_eigenvalue,
            site_entropy,
        });
    }
    Ok(out)
}

fn parse_input(header: &BTreeMap<String, String>) -> Result<AnalysisInput, RunnerError> {
    let get = |k: &str| -> Result<&String, RunnerError> {
        header
            .get(k)
            .ok_or_else(|| RunnerError::Analysis(format!("bin header missing '{k}'")))
    };
    let kind = match get("model")?.as_str() {
        "xxz" => ModelKind::Xxz,
        "tfim" => ModelKind::Tfim,
        other => return Err(RunnerError::Analysis(format!("unknown model '{other}'"))),
    };
    let lx: usize = get("lx")?
        .parse()
        .map_err(|e| RunnerError::Analysis(format!("lx: {e}")))?;
    let ly: usize = get("ly")?
        .parse()
        .map_err(|e| RunnerError::Analysis(format!("ly: {e}")))?;
    let h_stag: f64 = get("h_stag")?
        .parse()
        .map_err(|e| RunnerError::Analysis(format!("h_stag: {e}")))?;
    let mut seps = Vec::new();
    for part in get("separations")?.split(';') {
        let (dx, dy) = part
            .split_once(',')
            .ok_or_else(|| RunnerError::Analysis(format!("bad separation '{part}'")))?;
        let dx: i64 = dx.parse().map_err(|e| RunnerError::Analysis(format!("{e}")))?;
        let dy: i64 = dy.parse().map_err(|e| RunnerError::Analysis(format!("{e}")))?;
        seps.push(
            SeparationVector::canonical(dx, dy, lx, ly)
                .map_err(|e| RunnerError::Analysis(e.to_string()))?,
        );
    }
    Ok(AnalysisInput {
        kind,
        h_stag,
        lx,
        ly,
        seps,
    })
}

/// Read all chain bin dumps in a point directory, merge them, and analyze.
/// Re-running on the same files yields byte-identical tables.
pub fn analyze_point(
    dir: &Path,
    opts: &AnalyzeOptions,
) -> Result<(BTreeMap<String, String>, Vec<SepAnalysis>), RunnerError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| RunnerError::Io(dir.to_path_buf(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("chain_") && n.ends_with(".bins.tsv"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(RunnerError::Analysis(format!(
            "no chain bin dumps found in {}",
            dir.display()
        )));
    }
    let mut header = None;
    let mut merged: Option<Accumulator> = None;
    for p in &paths {
        let (h, acc) = files::read_bins(p)?;
        match &mut merged {
            None => {
                header = Some(h);
                merged = Some(acc);
            }
            Some(m) => m
                .merge(&acc)
                .map_err(|e| RunnerError::Analysis(e.to_string()))?,
        }
    }
    let header = header.unwrap();
    let acc = merged.unwrap();
    let input = parse_input(&header)?;
    let reports = analyze_accumulator(&input, &acc, opts)?;
    Ok((header, reports))
}

/// Figure-ready table, one row per separation.
pub fn write_analysis_table(
    path: &Path,
    header: &BTreeMap<String, String>,
    reports: &[SepAnalysis],
    opts: &AnalyzeOptions,
) -> Result<(), RunnerError> {
    let mut hdr: Vec<(String, String)> = header
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    hdr.push(("broken_symmetry".into(), opts.broken_symmetry.to_string()));
    hdr.push(("d_factor".into(), format!("{:.17e}", opts.d_factor)));
    let mut columns: Vec<&str> = vec!["dx", "dy", "distance"];
    for c in [
        "zz", "zz_sigma", "xx", "xx_sigma", "yy", "yy_sigma", "zx", "zx_sigma", "xz", "xz_sigma",
    ] {
        columns.push(c);
    }
    for c in [
        "cf",
        "cf_sigma",
        "cf_unclamped",
        "cf_unclamped_sigma",
        "ef",
        "ef_sigma",
        "ca",
        "ca_sigma",
        "el_lower",
        "el_lower_sigma",
        "el_upper",
        "el_upper_sigma",
        "cf_eigen",
        "cf_eigen_sigma",
        "min_rho_eig",
        "site_entropy",
    ] {
        columns.push(c);
    }
    if opts.psd_project {
        columns.push("cf_psd");
        columns.push("cf_psd_sigma");
    }
    let fmt = |v: f64| format!("{v:.10e}");
    let mut rows = Vec::with_capacity(reports.len());
    for r in reports {
        let mut row = vec![r.sep.dx.to_string(), r.sep.dy.to_string(), fmt(r.distance)];
        for (_, e) in &r.channels {
            row.push(fmt(e.value));
            row.push(fmt(e.sigma));
        }
        for e in [
            r.cf,
            r.cf_unclamped,
            r.ef,
            r.ca,
            r.el_lower,
            r.el_upper,
            r.cf_eigen,
        ] {
            row.push(fmt(e.value));
            row.push(fmt(e.sigma));
        }
        row.push(fmt(r.min_rho_eigenvalue));
        row.push(fmt(r.site_entropy));
        if let Some(p) = r.cf_psd {
            row.push(fmt(p.value));
            row.push(fmt(p.sigma));
        }
        rows.push(row);
    }
    files::write_table(path, &hdr, &columns, &rows)?;
    Ok(())
}
