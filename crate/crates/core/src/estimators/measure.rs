//! Per-sweep measurement of correlator channels and scalar observables.
//!
//! Channels diagonal in the representation basis are averaged over evenly
//! spaced imaginary-time slices of the propagated configuration. XXZ
//! transverse correlators come from the directed-loop coincidence counts.
//! Off-diagonal Ising-representation channels use the exact operator-string
//! identities: for terms a, b of -H, <a> = <n_a>/beta and
//! <a b> = <(n-1) N[a->b]>/beta^2 with N counting cyclically adjacent
//! occurrences in the reduced string; a diagonal factor D evaluated at the
//! occurrences of a gives <a D> = <sum_p D(alpha_p)>/beta.

use crate::channel::{Axis, ChannelId};
use crate::lattice::{LatticeGeometry, SepClasses, SeparationVector};
use crate::model::{Model, ModelKind};
use crate::sse::loops::LoopTrace;
use crate::sse::state::{Op, SseState};

/// Number of imaginary-time slices sampled for diagonal channels.
pub const DEFAULT_MEAS_LEVELS: usize = 48;

pub const SC_ENERGY: usize = 0;
pub const SC_N: usize = 1;
pub const SC_MAG: usize = 2;
pub const SC_MAG_ABS: usize = 3;
pub const SC_MS2: usize = 4;
pub const SC_MS_DIRECT: usize = 5;
pub const SC_MAG_Z: usize = 6;
const N_SCALARS: usize = 7;

const CH_ZZ: usize = 0;
const CH_XX: usize = 1;
const CH_YY: usize = 2;
const CH_ZX: usize = 3;
const CH_XZ: usize = 4;
const N_CHANNELS: usize = 5;

/// Column layout of the per-sweep observable vector.
#[derive(Debug, Clone)]
pub struct Schema {
    pub kind: ModelKind,
    pub names: Vec<String>,
    pub seps: Vec<SeparationVector>,
}

impl Schema {
    pub fn new(kind: ModelKind, seps: &[SeparationVector]) -> Self {
        let mut names = vec![
            "energy".into(),
            "n".into(),
            "mag".into(),
            "mag_abs".into(),
            "ms2".into(),
            "ms_direct".into(),
            "mag_z".into(),
        ];
        for s in seps {
            for ch in ["zz", "xx", "yy", "zx", "xz"] {
                names.push(format!("{ch}@{},{}", s.dx, s.dy));
            }
        }
        Self {
            kind,
            names,
            seps: seps.to_vec(),
        }
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    #[inline]
    pub fn sep_col(&self, sep_idx: usize, slot: usize) -> usize {
        N_SCALARS + sep_idx * N_CHANNELS + slot
    }

    /// Column holding a measured two-site channel at a separation. Channels
    /// the model's symmetry forces to zero return None; xx = yy for XXZ.
    pub fn channel_col(&self, ch: ChannelId, sep_idx: usize) -> Option<usize> {
        use Axis::*;
        let slot = match (self.kind, ch.alpha, ch.beta) {
            (_, Z, Z) => CH_ZZ,
            (_, X, X) => CH_XX,
            (ModelKind::Xxz, Y, Y) => CH_XX,
            (ModelKind::Tfim, Y, Y) => CH_YY,
            (ModelKind::Tfim, Z, X) => CH_ZX,
            (ModelKind::Tfim, X, Z) => CH_XZ,
            _ => return None,
        };
        Some(self.sep_col(sep_idx, slot))
    }

    /// Column of a measured single-site mean (translation averaged).
    pub fn single_col(&self, axis: Axis) -> Option<usize> {
        match (self.kind, axis) {
            (ModelKind::Xxz, Axis::Z) => Some(SC_MAG),
            (ModelKind::Tfim, Axis::X) => Some(SC_MAG),
            (ModelKind::Tfim, Axis::Z) => Some(SC_MAG_Z),
            _ => None,
        }
    }
}

/// Measurement pass bound to one run's model, geometry, and separations.
pub struct Measurer {
    pub schema: Schema,
    pub classes: SepClasses,
    bonds: Vec<(u32, u32)>,
    disp: Vec<Vec<u32>>,
    disp_back: Vec<Vec<u32>>,
    stag_sign: Vec<i8>,
    meas_levels: usize,
    n_sites: usize,
    beta: f64,
    c_total: f64,
    /// Channel slot filled from the diagonal slices: zz in the z basis,
    /// xx in the Ising x basis.
    diag_slot: usize,
    spins: Vec<i8>,
    k_zz: Vec<f64>,
    k_yy: Vec<f64>,
    k_zx: Vec<f64>,
    k_xz: Vec<f64>,
}

impl Measurer {
    pub fn new(
        model: &Model,
        geom: &LatticeGeometry,
        seps: &[SeparationVector],
        meas_levels: usize,
    ) -> Self {
        let schema = Schema::new(model.kind, seps);
        let classes = SepClasses::new(geom, seps);
        let n = geom.num_sites();
        let mut disp = Vec::with_capacity(seps.len());
        let mut disp_back = Vec::with_capacity(seps.len());
        for s in seps {
            disp.push((0..n).map(|i| geom.translate(i, *s) as u32).collect());
            let conj = s.conjugate(geom.lx(), geom.ly());
            disp_back.push((0..n).map(|i| geom.translate(i, conj) as u32).collect());
        }
        Self {
            schema,
            classes,
            bonds: model.bonds.clone(),
            disp,
            disp_back,
            stag_sign: (0..n).map(|i| geom.sublattice_sign(i)).collect(),
            meas_levels: meas_levels.max(1),
            n_sites: n,
            beta: model.params.beta,
            c_total: model.c_total(),
            diag_slot: match model.kind {
                ModelKind::Xxz => CH_ZZ,
                ModelKind::Tfim => CH_XX,
            },
            spins: Vec::new(),
            k_zz: Vec::new(),
            k_yy: Vec::new(),
            k_zx: Vec::new(),
            k_xz: Vec::new(),
        }
    }

    /// One observable vector from the current configuration and the sweep's
    /// loop trace.
    pub fn measure(
        &mut self,
        state: &SseState,
        model: &Model,
        trace: &LoopTrace,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        out.resize(self.schema.n_cols(), 0.0);
        out[SC_N] = state.n as f64;
        out[SC_ENERGY] = (self.c_total - state.n as f64 / self.beta) / self.n_sites as f64;

        self.measure_diagonal_slices(state, out);

        match model.kind {
            ModelKind::Xxz => {
                // Transverse channels from head-tail coincidences: counts
                // per loop estimate <sigma^x_i sigma^x_j> directly, the
                // closing self-coincidence being the unit normalization.
                let loops = trace.loops.max(1) as f64;
                for (k, &c) in trace.sep_counts.iter().enumerate() {
                    out[self.schema.sep_col(k, CH_XX)] = c / loops;
                }
            }
            ModelKind::Tfim => self.measure_string_channels(state, out),
        }
    }

    fn measure_diagonal_slices(&mut self, state: &SseState, out: &mut [f64]) {
        let m_slots = state.opstring.len();
        let levels = self.meas_levels.min(m_slots.max(1));
        self.spins.clear();
        self.spins.extend_from_slice(&state.spins);
        let mut sampled = 0usize;
        let mut next_level = 0usize;

        for p in 0..m_slots {
            while p == next_level && sampled < levels {
                self.sample_slice(out);
                sampled += 1;
                next_level = (sampled * m_slots) / levels;
            }
            match state.opstring[p] {
                Op::BondOff(b) => {
                    let (i, j) = self.bonds[b as usize];
                    let (i, j) = (i as usize, j as usize);
                    self.spins[i] = -self.spins[i];
                    self.spins[j] = -self.spins[j];
                }
                Op::SiteFlip(s) => {
                    let s = s as usize;
                    self.spins[s] = -self.spins[s];
                }
                _ => {}
            }
        }
        while sampled < levels {
            self.sample_slice(out);
            sampled += 1;
        }

        let norm = 1.0 / levels as f64;
        out[SC_MAG] *= norm;
        out[SC_MAG_ABS] *= norm;
        out[SC_MS2] *= norm;
        out[SC_MS_DIRECT] *= norm;
        for k in 0..self.classes.len() {
            out[self.schema.sep_col(k, self.diag_slot)] *= norm;
        }
    }

    fn sample_slice(&self, out: &mut [f64]) {
        let n = self.n_sites as f64;
        let mut mag = 0i64;
        let mut stag = 0i64;
        for (i, &s) in self.spins.iter().enumerate() {
            mag += s as i64;
            stag += (self.stag_sign[i] * s) as i64;
        }
        let m = mag as f64 / n;
        let ms = stag as f64 / n;
        out[SC_MAG] += m;
        out[SC_MAG_ABS] += m.abs();
        out[SC_MS2] += ms * ms;
        out[SC_MS_DIRECT] += ms;
        for (k, fwd) in self.disp.iter().enumerate() {
            let mut acc = 0i64;
            for (i, &s) in self.spins.iter().enumerate() {
                acc += (s * self.spins[fwd[i] as usize]) as i64;
            }
            out[self.schema.sep_col(k, self.diag_slot)] += acc as f64 / n;
        }
    }

    /// Off-diagonal Ising-representation channels from the operator string.
    fn measure_string_channels(&mut self, state: &SseState, out: &mut [f64]) {
        let nsep = self.classes.len();
        for buf in [&mut self.k_zz, &mut self.k_yy, &mut self.k_zx, &mut self.k_xz] {
            buf.clear();
            buf.resize(nsep, 0.0);
        }

        self.spins.clear();
        self.spins.extend_from_slice(&state.spins);
        let mut n_flips = 0u64;
        // (site, sigma^x value below the flip); None when the previous
        // non-identity operator was not a site flip.
        let mut prev_flip: Option<(usize, i8)> = None;
        let mut first_flip: Option<usize> = None;
        let mut op_before_first_flip = false;
        let mut op_after_last_flip = false;

        for op in &state.opstring {
            match *op {
                Op::Id => {}
                Op::SiteFlip(site) => {
                    let a = site as usize;
                    let s_a = self.spins[a];
                    n_flips += 1;
                    for k in 0..nsep {
                        let j = self.disp[k][a] as usize;
                        self.k_zx[k] += self.spins[j] as f64;
                        let j2 = self.disp_back[k][a] as usize;
                        self.k_xz[k] += self.spins[j2] as f64;
                    }
                    if let Some((b_site, s_b)) = prev_flip {
                        self.record_flip_pair(b_site, s_b, a, s_a);
                    }
                    if first_flip.is_none() {
                        first_flip = Some(a);
                        op_before_first_flip = op_after_last_flip;
                    }
                    prev_flip = Some((a, s_a));
                    op_after_last_flip = false;
                    self.spins[a] = -self.spins[a];
                }
                Op::BondDiag(_) | Op::SiteConst(_) => {
                    prev_flip = None;
                    op_after_last_flip = true;
                }
                Op::BondOff(b) => {
                    prev_flip = None;
                    op_after_last_flip = true;
                    let (i, j) = self.bonds[b as usize];
                    let (i, j) = (i as usize, j as usize);
                    self.spins[i] = -self.spins[i];
                    self.spins[j] = -self.spins[j];
                }
            }
        }
        // Cyclic wrap pair: the last and first flips are adjacent in the
        // reduced string when nothing else lies between them.
        if let (Some((a, s_a)), Some(b)) = (prev_flip, first_flip) {
            if n_flips >= 2 && !op_after_last_flip && !op_before_first_flip {
                let s_b = self.spins[b];
                self.record_flip_pair(a, s_a, b, s_b);
            }
        }

        let n = state.n as f64;
        let beta = self.beta;
        let nsf = self.n_sites as f64;
        out[SC_MAG_Z] = n_flips as f64 / (beta * nsf);
        let pair_norm = (n - 1.0).max(0.0) / (beta * beta * nsf);
        for k in 0..nsep {
            out[self.schema.sep_col(k, CH_ZZ)] = self.k_zz[k] * pair_norm;
            out[self.schema.sep_col(k, CH_YY)] = -self.k_yy[k] * pair_norm;
            out[self.schema.sep_col(k, CH_ZX)] = self.k_zx[k] / (beta * nsf);
            out[self.schema.sep_col(k, CH_XZ)] = self.k_xz[k] / (beta * nsf);
        }
    }

    fn record_flip_pair(&mut self, a: usize, s_a: i8, b: usize, s_b: i8) {
        if a == b {
            return;
        }
        let w = (s_a * s_b) as f64;
        if let Some(k) = self.classes.class_of_pair(a, b) {
            self.k_zz[k] += 0.5;
            self.k_yy[k] += 0.5 * w;
        }
        if let Some(k) = self.classes.class_of_pair(b, a) {
            self.k_zz[k] += 0.5;
            self.k_yy[k] += 0.5 * w;
        }
    }
}
