//! Dense exact diagonalization for small systems: thermal expectation
//! values of arbitrary Pauli channels and direct two-site partial traces.
//! This is the ground truth every estimator is validated against.

use crate::channel::{Axis, ChannelId, PairChannels};
use crate::lattice::{LatticeGeometry, SeparationVector};
use crate::model::{Model, ModelKind};
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

pub const DEFAULT_SPIN_CAP: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum EdError {
    #[error("{n} spins exceeds the diagonalization cap of {cap} (dense matrix would need ~{mib} MiB)")]
    OverCap { n: usize, cap: usize, mib: u64 },
}

/// Basis the Hamiltonian matrix is written in. Physics is identical; the
/// x-basis build exists to cross-check basis independence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdBasis {
    ZDiagonal,
    XDiagonal,
}

/// Full spectrum plus thermal weights at a fixed inverse temperature.
#[derive(Debug)]
pub struct SpectralState {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub beta: f64,
    pub weights: Vec<f64>,
}

/// Exact thermal calculator for one model + geometry at one temperature.
#[derive(Debug)]
pub struct EdOracle {
    pub geom: LatticeGeometry,
    pub spectral: SpectralState,
    n_sites: usize,
}

/// Dense Hamiltonian in the requested basis. Basis states are indexed by
/// bitmask, bit i set meaning spin +1 at site i along the basis axis.
pub fn build_hamiltonian(model: &Model, geom: &LatticeGeometry, basis: EdBasis) -> DMatrix<f64> {
    let n = geom.num_sites();
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let spin = |state: usize, site: usize| -> f64 {
        if state & (1 << site) != 0 {
            1.0
        } else {
            -1.0
        }
    };
    match (model.kind, basis) {
        (ModelKind::Xxz, EdBasis::ZDiagonal) => {
            for b in 0..dim {
                let mut diag = 0.0;
                for &(i, j) in model.bonds.iter() {
                    let (i, j) = (i as usize, j as usize);
                    diag += model.params.delta * spin(b, i) * spin(b, j);
                    if spin(b, i) * spin(b, j) < 0.0 {
                        // -(sx sx + sy sy) = -2 (s+s- + s-s+)
                        let b2 = b ^ (1 << i) ^ (1 << j);
                        h[(b2, b)] += -2.0;
                    }
                }
                if model.params.h_stag > 0.0 {
                    for i in 0..n {
                        diag -= model.params.h_stag
                            * geom.sublattice_sign(i) as f64
                            * spin(b, i);
                    }
                }
                h[(b, b)] += diag;
            }
        }
        (ModelKind::Tfim, EdBasis::ZDiagonal) => {
            for b in 0..dim {
                let mut diag = 0.0;
                for i in 0..n {
                    diag -= spin(b, i);
                }
                h[(b, b)] += diag;
                for &(i, j) in model.bonds.iter() {
                    let b2 = b ^ (1 << i as usize) ^ (1 << j as usize);
                    h[(b2, b)] += -model.params.lambda;
                }
                if model.params.h_x > 0.0 {
                    for i in 0..n {
                        h[(b ^ (1 << i), b)] += -model.params.h_x;
                    }
                }
            }
        }
        (ModelKind::Tfim, EdBasis::XDiagonal) => {
            for b in 0..dim {
                let mut diag = 0.0;
                for &(i, j) in model.bonds.iter() {
                    diag -= model.params.lambda * spin(b, i as usize) * spin(b, j as usize);
                }
                for i in 0..n {
                    diag -= model.params.h_x * spin(b, i);
                    h[(b ^ (1 << i), b)] += -1.0;
                }
                h[(b, b)] += diag;
            }
        }
        (ModelKind::Xxz, EdBasis::XDiagonal) => {
            unimplemented!("XXZ is always diagonalized in the z basis")
        }
    }
    h
}

impl EdOracle {
    pub fn new(model: &Model, geom: &LatticeGeometry, beta: f64) -> Result<Self, EdError> {
        Self::with_cap(model, geom, beta, DEFAULT_SPIN_CAP)
    }

    pub fn with_cap(
        model: &Model,
        geom: &LatticeGeometry,
        beta: f64,
        cap: usize,
    ) -> Result<Self, EdError> {
        let n = geom.num_sites();
        if n > cap {
            let dim = 1u64 << n;
            return Err(EdError::OverCap {
                n,
                cap,
                mib: dim * dim * 8 / (1 << 20),
            });
        }
        let h = build_hamiltonian(model, geom, EdBasis::ZDiagonal);
        Ok(Self::from_hamiltonian(h, geom.clone(), beta))
    }

    pub fn from_hamiltonian(h: DMatrix<f64>, geom: LatticeGeometry, beta: f64) -> Self {
        let n_sites = geom.num_sites();
        let se = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let dim = eigenvalues.len();
        let mut eigenvectors = DMatrix::<f64>::zeros(dim, dim);
        for (col, &k) in order.iter().enumerate() {
            eigenvectors.set_column(col, &se.eigenvectors.column(k));
        }
        let e0 = eigenvalues[0];
        let mut weights: Vec<f64> = eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).collect();
        let z: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= z;
        }
        Self {
            geom,
            spectral: SpectralState {
                eigenvalues,
                eigenvectors,
                beta,
                weights,
            },
            n_sites,
        }
    }

    pub fn energy(&self) -> f64 {
        self.spectral
            .weights
            .iter()
            .zip(&self.spectral.eigenvalues)
            .map(|(w, e)| w * e)
            .sum()
    }

    pub fn energy_per_site(&self) -> f64 {
        self.energy() / self.n_sites as f64
    }

    /// Direct operator route: <sigma^alpha_i sigma^beta_j> as a thermal
    /// trace over eigenstates, without any partial-trace intermediate.
    pub fn channel_pair(&self, ch: ChannelId, i: usize, j: usize) -> f64 {
        let dim = 1usize << self.n_sites;
        let mut acc = 0.0;
        let mut buf = vec![0.0; dim];
        for (k, &w) in self.spectral.weights.iter().enumerate() {
            if w < 1e-18 {
                continue;
            }
            let v = self.spectral.eigenvectors.column(k);
            buf.iter_mut().for_each(|x| *x = 0.0);
            let mut y_count = 0usize;
            apply_channel(ch, i, j, v.as_slice(), &mut buf, &mut y_count);
            if y_count % 2 == 1 {
                continue; // purely imaginary matrix elements, zero on real states
            }
            let sign = if y_count == 2 { -1.0 } else { 1.0 };
            let dot: f64 = v.iter().zip(buf.iter()).map(|(a, b)| a * b).sum();
            acc += w * sign * dot;
        }
        acc
    }

    /// Translation-averaged channel over all ordered pairs at a separation.
    pub fn channel_at_sep(&self, ch: ChannelId, sep: SeparationVector) -> f64 {
        let pairs = self.geom.site_pairs_at_separation(sep);
        pairs
            .iter()
            .map(|&(i, j)| self.channel_pair(ch, i, j))
            .sum::<f64>()
            / pairs.len() as f64
    }

    /// All 15 channels at a separation (translation-averaged).
    pub fn pair_channels_at_sep(&self, sep: SeparationVector) -> PairChannels {
        let mut ch = PairChannels::new();
        for c in ChannelId::all() {
            ch.set(c, self.channel_at_sep(c, sep));
        }
        ch
    }

    pub fn single(&self, axis: Axis, site: usize) -> f64 {
        self.channel_pair(ChannelId { alpha: axis, beta: Axis::I }, site, site)
    }

    /// sqrt(<(sum_i eta_i sigma^z_i)^2>)/N, the symmetric-phase staggered
    /// magnetization estimate.
    pub fn staggered_m_structure(&self) -> f64 {
        let dim = 1usize << self.n_sites;
        let n = self.n_sites;
        let mut acc = 0.0;
        for (k, &w) in self.spectral.weights.iter().enumerate() {
            if w < 1e-18 {
                continue;
            }
            let v = self.spectral.eigenvectors.column(k);
            let mut exp = 0.0;
            for b in 0..dim {
                let amp2 = v[b] * v[b];
                if amp2 == 0.0 {
                    continue;
                }
                let mut stag = 0.0;
                for i in 0..n {
                    let s = if b & (1 << i) != 0 { 1.0 } else { -1.0 };
                    stag += self.geom.sublattice_sign(i) as f64 * s;
                }
                exp += amp2 * stag * stag;
            }
            acc += w * exp;
        }
        (acc / (n * n) as f64).sqrt()
    }

    /// Partial trace of the thermal state over all sites but (i, j), in the
    /// ordered product basis |uu>, |ud>, |du>, |dd>.
    pub fn two_site_rho(&self, i: usize, j: usize) -> Matrix4<Complex64> {
        assert_ne!(i, j);
        let dim = 1usize << self.n_sites;
        let bi = 1usize << i;
        let bj = 1usize << j;
        let mut rho = Matrix4::<f64>::zeros();
        let idx_of = |b: usize| -> usize {
            let a = if b & bi != 0 { 0 } else { 2 };
            let c = if b & bj != 0 { 0 } else { 1 };
            a + c
        };
        for (k, &w) in self.spectral.weights.iter().enumerate() {
            if w < 1e-18 {
                continue;
            }
            let v = self.spectral.eigenvectors.column(k);
            for b in 0..dim {
                let ab = v[b];
                if ab == 0.0 {
                    continue;
                }
                let row = idx_of(b);
                let env = b & !(bi | bj);
                for (col, (mi, mj)) in [(bi, bj), (bi, 0), (0, bj), (0, 0)].iter().enumerate() {
                    let b2 = env | mi | mj;
                    rho[(row, col)] += w * ab * v[b2];
                }
            }
        }
        rho.map(|x| Complex64::new(x, 0.0))
    }

    /// Probability distribution of the SSE expansion order n implied by the
    /// spectrum: P(n) proportional to beta^n Tr[(-H + C)^n] / n!.
    pub fn expansion_order_distribution(&self, c_total: f64, n_max: usize) -> Vec<f64> {
        let beta = self.spectral.beta;
        let mut p = vec![0.0; n_max + 1];
        let e0 = self.spectral.eigenvalues[0];
        for &e in &self.spectral.eigenvalues {
            // term_n = beta^n (C - E)^n / n!, damped by exp(-beta(C - E0))
            // so the sum over n is the relative thermal weight.
            let x = beta * (c_total - e);
            let mut term = (-beta * (c_total - e0)).exp();
            p[0] += term;
            for n in 1..=n_max {
                term *= x / n as f64;
                p[n] += term;
            }
        }
        let z: f64 = p.iter().sum();
        for v in &mut p {
            *v /= z;
        }
        p
    }
}

fn apply_channel(
    ch: ChannelId,
    i: usize,
    j: usize,
    v: &[f64],
    out: &mut [f64],
    y_count: &mut usize,
) {
    // Apply sigma^beta_j then sigma^alpha_i; sites differ or one axis is I,
    // so ordering never matters.
    let mut tmp = vec![0.0; v.len()];
    let first: &[f64] = if ch.beta == Axis::I {
        v
    } else {
        apply_pauli(ch.beta, j, v, &mut tmp, y_count);
        &tmp
    };
    if ch.alpha == Axis::I {
        out.copy_from_slice(first);
    } else {
        apply_pauli(ch.alpha, i, first, out, y_count);
    }
}

/// out = sigma^axis_site * v for real v; sigma^y contributions are recorded
/// as an overall power of i through `y_count`, with the real magnitude and
/// sign written to `out`.
fn apply_pauli(axis: Axis, site: usize, v: &[f64], out: &mut [f64], y_count: &mut usize) {
    let bit = 1usize << site;
    match axis {
        Axis::I => out.copy_from_slice(v),
        Axis::X => {
            for b in 0..v.len() {
                out[b ^ bit] = v[b];
            }
        }
        Axis::Y => {
            // sigma^y |up> = i |down>, sigma^y |down> = -i |up>
            *y_count += 1;
            for b in 0..v.len() {
                let sign = if b & bit != 0 { 1.0 } else { -1.0 };
                out[b ^ bit] = sign * v[b];
            }
        }
        Axis::Z => {
            for b in 0..v.len() {
                let sign = if b & bit != 0 { 1.0 } else { -1.0 };
                out[b] = sign * v[b];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, two_site_pair};
    use crate::model::ModelParams;
    use approx::assert_abs_diff_eq;

    fn xxz_model(geom: &LatticeGeometry, delta: f64, h_stag: f64) -> Model {
        Model::build(
            ModelKind::Xxz,
            ModelParams {
                delta,
                h_stag,
                beta: 1.0,
                epsilon: 0.1,
                ..Default::default()
            },
            geom,
        )
        .unwrap()
    }

    #[test]
    fn infinite_temperature_is_fully_mixed() {
        let geom = build_lattice(4, 1, true).unwrap();
        let model = xxz_model(&geom, 0.7, 0.0);
        let ed = EdOracle::new(&model, &geom, 0.0).unwrap();
        for ch in ChannelId::all() {
            let sep = SeparationVector::canonical(1, 0, 4, 1).unwrap();
            assert_abs_diff_eq!(ed.channel_at_sep(ch, sep), 0.0, epsilon = 1e-12);
        }
        let rho = ed.two_site_rho(0, 1);
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 0.25 } else { 0.0 };
                assert_abs_diff_eq!(rho[(r, c)].re, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_spin_in_field() {
        // One spin with H = -sigma^z at beta = 1: <sigma^z> = tanh(1).
        // Realized as the lambda = 0, h_x = 0 TFIM on the smallest ring;
        // sites decouple, so the single-site mean matches exactly.
        let geom = build_lattice(3, 1, true).unwrap();
        let model = Model::build(
            ModelKind::Tfim,
            ModelParams {
                lambda: 0.0,
                beta: 1.0,
                ..Default::default()
            },
            &geom,
        )
        .unwrap();
        let ed = EdOracle::new(&model, &geom, 1.0).unwrap();
        assert_abs_diff_eq!(ed.single(Axis::Z, 0), 1.0f64.tanh(), epsilon = 1e-12);
        assert_abs_diff_eq!(ed.single(Axis::X, 0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_site_heisenberg_ground_state() {
        let geom = two_site_pair();
        let model = xxz_model(&geom, 1.0, 0.0);
        let ed = EdOracle::new(&model, &geom, 20.0).unwrap();
        // Ground state (|ud> + |du>)/sqrt(2) at energy -3.
        assert_abs_diff_eq!(ed.spectral.eigenvalues[0], -3.0, epsilon = 1e-12);
        let sep = SeparationVector::canonical(1, 0, 2, 1).unwrap();
        let xx = ed.channel_at_sep(ChannelId { alpha: Axis::X, beta: Axis::X }, sep);
        let yy = ed.channel_at_sep(ChannelId { alpha: Axis::Y, beta: Axis::Y }, sep);
        let zz = ed.channel_at_sep(ChannelId { alpha: Axis::Z, beta: Axis::Z }, sep);
        assert_abs_diff_eq!(xx, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(yy, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(zz, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn hamiltonian_reconstruction_and_thermal_state() {
        let geom = build_lattice(4, 1, true).unwrap();
        let model = xxz_model(&geom, 0.5, 0.0);
        let h = build_hamiltonian(&model, &geom, EdBasis::ZDiagonal);
        // H must be symmetric.
        assert!((&h - &h.transpose()).norm() < 1e-12 * h.norm());
        let ed = EdOracle::new(&model, &geom, 2.0).unwrap();
        let recon = &ed.spectral.eigenvectors
            * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(ed.spectral.eigenvalues.clone()))
            * ed.spectral.eigenvectors.transpose();
        assert!((&recon - &h).norm() <= 1e-10 * h.norm());
        let wsum: f64 = ed.spectral.weights.iter().sum();
        assert_abs_diff_eq!(wsum, 1.0, epsilon = 1e-12);
        // Thermal two-site state: PSD and unit trace.
        let rho = ed.two_site_rho(0, 2);
        let herm = (rho - rho.adjoint()).norm();
        assert!(herm < 1e-12);
        let tr: Complex64 = rho.trace();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-12);
        let eig = nalgebra::SymmetricEigen::new(rho);
        for ev in eig.eigenvalues.iter() {
            assert!(*ev >= -1e-12);
        }
    }

    #[test]
    fn gapped_correlators_converge_monotonically_in_beta() {
        let geom = build_lattice(4, 1, true).unwrap();
        let model = Model::build(
            ModelKind::Tfim,
            ModelParams {
                lambda: 0.1,
                beta: 1.0,
                ..Default::default()
            },
            &geom,
        )
        .unwrap();
        let sep = SeparationVector::canonical(1, 0, 4, 1).unwrap();
        let ch = ChannelId { alpha: Axis::X, beta: Axis::X };
        let gs = EdOracle::new(&model, &geom, 200.0).unwrap().channel_at_sep(ch, sep);
        let mut prev_gap = f64::INFINITY;
        for beta in [4.0, 8.0, 16.0] {
            let v = EdOracle::new(&model, &geom, beta).unwrap().channel_at_sep(ch, sep);
            let gap = (v - gs).abs();
            assert!(gap <= prev_gap + 1e-13, "beta {beta}: {gap} > {prev_gap}");
            prev_gap = gap;
        }
    }

    #[test]
    fn tfim_basis_independence() {
        let geom = build_lattice(4, 1, true).unwrap();
        let model = Model::build(
            ModelKind::Tfim,
            ModelParams {
                lambda: 0.32841,
                h_x: 0.001,
                beta: 1.0,
                ..Default::default()
            },
            &geom,
        )
        .unwrap();
        let hz = build_hamiltonian(&model, &geom, EdBasis::ZDiagonal);
        let hx = build_hamiltonian(&model, &geom, EdBasis::XDiagonal);
        let beta = 6.0;
        let ed_z = EdOracle::from_hamiltonian(hz, geom.clone(), beta);
        let ed_x = EdOracle::from_hamiltonian(hx, geom.clone(), beta);
        for (a, b) in ed_z
            .spectral
            .eigenvalues
            .iter()
            .zip(ed_x.spectral.eigenvalues.iter())
        {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
        // Hadamard conjugation maps x<->z and y -> -y; channels must agree
        // after relabeling.
        let sep = SeparationVector::canonical(1, 0, 4, 1).unwrap();
        let pairs = [
            (ChannelId { alpha: Axis::X, beta: Axis::X }, ChannelId { alpha: Axis::Z, beta: Axis::Z }, 1.0),
            (ChannelId { alpha: Axis::Z, beta: Axis::Z }, ChannelId { alpha: Axis::X, beta: Axis::X }, 1.0),
            (ChannelId { alpha: Axis::Y, beta: Axis::Y }, ChannelId { alpha: Axis::Y, beta: Axis::Y }, 1.0),
            (ChannelId { alpha: Axis::Z, beta: Axis::X }, ChannelId { alpha: Axis::X, beta: Axis::Z }, 1.0),
        ];
        for (cz, cx, sign) in pairs {
            assert_abs_diff_eq!(
                ed_z.channel_at_sep(cz, sep),
                sign * ed_x.channel_at_sep(cx, sep),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn over_cap_is_rejected_with_memory_estimate() {
        let geom = build_lattice(4, 4, true).unwrap();
        let model = xxz_model(&geom, 1.0, 0.0);
        let err = EdOracle::new(&model, &geom, 1.0).unwrap_err();
        match err {
            EdError::OverCap { n, cap, mib } => {
                assert_eq!(n, 16);
                assert_eq!(cap, DEFAULT_SPIN_CAP);
                assert!(mib > 0);
            }
        }
    }
}
