//! Two-site entanglement kernels: density-matrix assembly from Pauli
//! channels, Wootters concurrence and concurrence of assistance (both the
//! eigenvalue route and the model closed forms), entanglement of formation,
//! and the connected-correlation bounds on localizable entanglement.

use crate::channel::{Axis, ChannelId, PairChannels};
use nalgebra::{Matrix2, Matrix3, Matrix4};
use num_complex::Complex64;
use thiserror::Error;

pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum EntanglementError {
    #[error("channel {0} is not finite")]
    NonFiniteChannel(ChannelId),
    #[error("missing channel: {0}")]
    MissingChannel(#[from] crate::channel::ChannelError),
    #[error("rho * rho~ eigenvalue {0} below the negativity tolerance")]
    NegativeSpectrum(f64),
    #[error("radicand {0} is negative beyond tolerance; input correlators are unphysical")]
    NegativeRadicand(f64),
    #[error("concurrence {0} outside [0, 1]")]
    ConcurrenceOutOfRange(f64),
    #[error("single-site matrix has trace {0}, expected 1")]
    BadTrace(f64),
    #[error("single-site eigenvalue {0} outside [0, 1]")]
    BadEigenvalue(f64),
    #[error("complex eigenvalue solve failed to converge")]
    EigenFailed,
}

type C64 = Complex64;
pub type Rho = Matrix4<C64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Pauli matrix along an axis (identity for `Axis::I`).
pub fn pauli(axis: Axis) -> Matrix2<C64> {
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::I => Matrix2::identity(),
        Axis::X => Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0)),
        Axis::Y => Matrix2::new(c(0.0), -i, i, c(0.0)),
        Axis::Z => Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0)),
    }
}

fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// rho = (1/4) sum_{alpha,beta} <sigma^alpha_i sigma^beta_j> sigma^alpha (x) sigma^beta,
/// identity channels included. All 15 nontrivial channels must be present
/// (symmetry-forced zeros are filled by the caller, explicitly per model).
pub fn assemble_rho(channels: &PairChannels) -> Result<Rho, EntanglementError> {
    channels.require_complete()?;
    let mut rho = kron2(&pauli(Axis::I), &pauli(Axis::I));
    for ch in ChannelId::all() {
        let v = channels.get_or_zero(ch);
        if !v.is_finite() {
            return Err(EntanglementError::NonFiniteChannel(ch));
        }
        rho += kron2(&pauli(ch.alpha), &pauli(ch.beta)) * c(v);
    }
    Ok(rho * c(0.25))
}

/// rho~ = (sigma^y (x) sigma^y) rho* (sigma^y (x) sigma^y).
pub fn time_reverse(rho: &Rho) -> Rho {
    let yy = kron2(&pauli(Axis::Y), &pauli(Axis::Y));
    let conj = rho.map(|z| z.conj());
    yy * conj * yy
}

/// Hermitian eigenvalues of rho, descending.
fn hermitian_eigenvalues4(m: &Rho) -> [f64; 4] {
    let se = nalgebra::SymmetricEigen::new(*m);
    let mut evs = [0.0; 4];
    for (k, v) in se.eigenvalues.iter().enumerate() {
        evs[k] = *v;
    }
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    evs
}

/// Square root of a PSD Hermitian matrix, with eigenvalues below `tol`
/// clipped to zero.
fn psd_sqrt(m: &Rho, tol: f64) -> Rho {
    let se = nalgebra::SymmetricEigen::new(*m);
    let mut out = Matrix4::zeros();
    for k in 0..4 {
        let ev = se.eigenvalues[k].max(0.0);
        let _ = tol;
        let s = ev.sqrt();
        let col = se.eigenvectors.column(k);
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] += col[i] * col[j].conj() * c(s);
            }
        }
    }
    out
}

/// Spectrum diagnostics shared by both concurrence routes.
#[derive(Debug, Clone, Copy)]
pub struct RhoRhoTildeSpectrum {
    /// Eigenvalues of rho rho~, descending, clipped at zero.
    pub lambdas: [f64; 4],
    /// Smallest eigenvalue of rho itself.
    pub min_rho_eigenvalue: f64,
    /// Most negative raw eigenvalue of rho rho~ before clipping.
    pub min_raw_lambda: f64,
}

/// Eigenvalues of rho rho~ for a Hermitian trace-1 rho. PSD inputs go
/// through the Hermitian problem sqrt(rho) rho~ sqrt(rho); slightly
/// indefinite Monte Carlo inputs fall back to a general eigensolve.
pub fn rho_rhotilde_spectrum(rho: &Rho, tol: f64) -> Result<RhoRhoTildeSpectrum, EntanglementError> {
    let tol = tol.max(EXACT_TOL);
    let rho_evs = hermitian_eigenvalues4(rho);
    let min_rho = rho_evs[3];
    let rhot = time_reverse(rho);

    let mut raw = [0.0f64; 4];
    if min_rho >= -tol {
        let s = psd_sqrt(rho, tol);
        let m = s * rhot * s;
        let evs = hermitian_eigenvalues4(&m);
        raw.copy_from_slice(&evs);
    } else {
        let prod = rho * rhot;
        let schur = nalgebra::Schur::try_new(prod, 1e-12, 100_000)
            .ok_or(EntanglementError::EigenFailed)?;
        let t = schur.unpack().1;
        for k in 0..4 {
            raw[k] = t[(k, k)].re;
        }
        raw.sort_by(|a, b| b.partial_cmp(a).unwrap());
    }

    let min_raw = raw[3];
    let neg_tol = tol.max(1e-6);
    if min_raw < -neg_tol {
        return Err(EntanglementError::NegativeSpectrum(min_raw));
    }
    let mut lambdas = raw;
    for l in &mut lambdas {
        *l = l.max(0.0);
    }
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(RhoRhoTildeSpectrum {
        lambdas,
        min_rho_eigenvalue: min_rho,
        min_raw_lambda: min_raw,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Concurrence {
    pub value: f64,
    /// sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4) before clamping at zero.
    pub unclamped: f64,
    pub min_rho_eigenvalue: f64,
}

/// Wootters concurrence of formation.
pub fn concurrence_formation(rho: &Rho, tol: f64) -> Result<Concurrence, EntanglementError> {
    let sp = rho_rhotilde_spectrum(rho, tol)?;
    let r: Vec<f64> = sp.lambdas.iter().map(|l| l.sqrt()).collect();
    let unclamped = r[0] - r[1] - r[2] - r[3];
    Ok(Concurrence {
        value: unclamped.max(0.0),
        unclamped,
        min_rho_eigenvalue: sp.min_rho_eigenvalue,
    })
}

/// Concurrence of assistance: sum of the square roots of the same spectrum.
pub fn concurrence_assistance(rho: &Rho, tol: f64) -> Result<f64, EntanglementError> {
    let sp = rho_rhotilde_spectrum(rho, tol)?;
    Ok(sp.lambdas.iter().map(|l| l.sqrt()).sum())
}

fn checked_sqrt(radicand: f64) -> Result<f64, EntanglementError> {
    if radicand < -1e-9 {
        return Err(EntanglementError::NegativeRadicand(radicand));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// XXZ closed form: C_F = (1/2) max{0, |<xx> + <yy>| - sqrt((1 + <zz>)^2 - <z_i + z_j>^2)}.
/// Returns (clamped value, unclamped argument).
pub fn xxz_concurrence(
    xx_plus_yy: f64,
    zz: f64,
    z_i: f64,
    z_j: f64,
) -> Result<(f64, f64), EntanglementError> {
    let root = checked_sqrt((1.0 + zz).powi(2) - (z_i + z_j).powi(2))?;
    let arg = 0.5 * (xx_plus_yy.abs() - root);
    Ok((arg.max(0.0), arg))
}

/// XXZ closed form for the concurrence of assistance.
pub fn xxz_assistance(zz: f64, z_i: f64, z_j: f64) -> Result<f64, EntanglementError> {
    let a = checked_sqrt((1.0 + zz).powi(2) - (z_i + z_j).powi(2))?;
    let b = checked_sqrt((1.0 - zz).powi(2) - (z_i - z_j).powi(2))?;
    Ok(0.5 * (a + b))
}

/// Transverse-field Ising closed form, valid regardless of symmetry
/// breaking; the first branch's subtracted term enters squared.
pub fn tfim_concurrence(
    xx: f64,
    yy: f64,
    zz: f64,
    z_i: f64,
    z_j: f64,
) -> Result<(f64, f64), EntanglementError> {
    let root1 = checked_sqrt((1.0 + zz).powi(2) - (z_i + z_j).powi(2))?;
    let branch1 = (xx + yy).abs() - root1;
    let branch2 = (xx - yy).abs() - (1.0 - zz).abs();
    let arg = 0.5 * branch1.max(branch2);
    Ok((arg.max(0.0), arg))
}

/// Closed forms for Monte Carlo inputs: statistical noise near physical
/// boundaries may drive a radicand slightly negative, which these variants
/// clamp to zero instead of rejecting. Exact inputs should use the checked
/// versions above.
pub fn xxz_concurrence_mc(xx_plus_yy: f64, zz: f64, z_i: f64, z_j: f64) -> (f64, f64) {
    let root = ((1.0 + zz).powi(2) - (z_i + z_j).powi(2)).max(0.0).sqrt();
    let arg = 0.5 * (xx_plus_yy.abs() - root);
    (arg.max(0.0), arg)
}

pub fn xxz_assistance_mc(zz: f64, z_i: f64, z_j: f64) -> f64 {
    let a = ((1.0 + zz).powi(2) - (z_i + z_j).powi(2)).max(0.0).sqrt();
    let b = ((1.0 - zz).powi(2) - (z_i - z_j).powi(2)).max(0.0).sqrt();
    0.5 * (a + b)
}

pub fn tfim_concurrence_mc(xx: f64, yy: f64, zz: f64, z_i: f64, z_j: f64) -> (f64, f64) {
    let root1 = ((1.0 + zz).powi(2) - (z_i + z_j).powi(2)).max(0.0).sqrt();
    let branch1 = (xx + yy).abs() - root1;
    let branch2 = (xx - yy).abs() - (1.0 - zz).abs();
    let arg = 0.5 * branch1.max(branch2);
    (arg.max(0.0), arg)
}

/// Connected-correlation matrix Q and its largest singular value, the lower
/// bound on localizable entanglement.
pub fn connected_q(channels: &PairChannels) -> Result<(Matrix3<f64>, f64), EntanglementError> {
    channels.require_complete()?;
    let axes = [Axis::X, Axis::Y, Axis::Z];
    let mut q = Matrix3::<f64>::zeros();
    for (r, &a) in axes.iter().enumerate() {
        for (col, &b) in axes.iter().enumerate() {
            let two = channels.get_or_zero(ChannelId { alpha: a, beta: b });
            let si = channels.get_or_zero(ChannelId { alpha: a, beta: Axis::I });
            let sj = channels.get_or_zero(ChannelId { alpha: Axis::I, beta: b });
            let v = two - si * sj;
            if !v.is_finite() || v.abs() > 2.0 + 1e-6 {
                return Err(EntanglementError::NonFiniteChannel(ChannelId { alpha: a, beta: b }));
            }
            q[(r, col)] = v;
        }
    }
    let sv = q.svd(false, false);
    let largest = sv.singular_values.iter().cloned().fold(0.0f64, f64::max);
    Ok((q, largest))
}

/// Entanglement of formation from a concurrence: binary entropy of
/// x = 1/2 + sqrt(1 - C^2)/2.
pub fn ef_from_concurrence(c_in: f64) -> Result<f64, EntanglementError> {
    if !(-1e-9..=1.0 + 1e-9).contains(&c_in) {
        return Err(EntanglementError::ConcurrenceOutOfRange(c_in));
    }
    let cc = c_in.clamp(0.0, 1.0);
    let x = 0.5 + 0.5 * (1.0 - cc * cc).sqrt();
    Ok(binary_entropy(x))
}

fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 || p >= 1.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Von Neumann entropy (bits) of a single-site density matrix.
pub fn single_site_entropy(rho_i: &Matrix2<C64>) -> Result<f64, EntanglementError> {
    let tr = rho_i.trace().re;
    if (tr - 1.0).abs() > 1e-6 {
        return Err(EntanglementError::BadTrace(tr));
    }
    let se = nalgebra::SymmetricEigen::new(*rho_i);
    let mut s = 0.0;
    for ev in se.eigenvalues.iter() {
        if !(-1e-9..=1.0 + 1e-9).contains(ev) {
            return Err(EntanglementError::BadEigenvalue(*ev));
        }
        let p = ev.clamp(0.0, 1.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    Ok(s)
}

/// Single-site density matrix from Bloch means.
pub fn single_site_rho(x: f64, y: f64, z: f64) -> Matrix2<C64> {
    (Matrix2::identity()
        + pauli(Axis::X) * c(x)
        + pauli(Axis::Y) * c(y)
        + pauli(Axis::Z) * c(z))
        * c(0.5)
}

/// Projection of a Hermitian matrix onto the PSD cone, renormalized to
/// unit trace. Reported alongside the raw result, never silently applied.
pub fn project_psd(rho: &Rho) -> Rho {
    let se = nalgebra::SymmetricEigen::new(*rho);
    let mut out = Matrix4::zeros();
    let mut tr = 0.0;
    for k in 0..4 {
        let ev = se.eigenvalues[k].max(0.0);
        tr += ev;
        let col = se.eigenvectors.column(k);
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] += col[i] * col[j].conj() * c(ev);
            }
        }
    }
    if tr > 0.0 {
        out /= c(tr);
    }
    out
}

/// Channel map of an XXZ-symmetric state: in-plane isotropy with all
/// transverse singles and mixed channels vanishing.
pub fn xxz_symmetric_channels(xx: f64, zz: f64, z_i: f64, z_j: f64) -> PairChannels {
    let mut ch = PairChannels::new();
    for id in ChannelId::all() {
        ch.set(id, 0.0);
    }
    ch.set(ChannelId { alpha: Axis::X, beta: Axis::X }, xx);
    ch.set(ChannelId { alpha: Axis::Y, beta: Axis::Y }, xx);
    ch.set(ChannelId { alpha: Axis::Z, beta: Axis::Z }, zz);
    ch.set(ChannelId { alpha: Axis::Z, beta: Axis::I }, z_i);
    ch.set(ChannelId { alpha: Axis::I, beta: Axis::Z }, z_j);
    ch
}

/// Channel map of a TFIM-symmetric state: all channels odd in sigma^y
/// vanish; mixed z-x channels are retained.
#[allow(clippy::too_many_arguments)]
pub fn tfim_symmetric_channels(
    xx: f64,
    yy: f64,
    zz: f64,
    x_i: f64,
    x_j: f64,
    z_i: f64,
    z_j: f64,
    zx: f64,
    xz: f64,
) -> PairChannels {
    let mut ch = PairChannels::new();
    for id in ChannelId::all() {
        ch.set(id, 0.0);
    }
    ch.set(ChannelId { alpha: Axis::X, beta: Axis::X }, xx);
    ch.set(ChannelId { alpha: Axis::Y, beta: Axis::Y }, yy);
    ch.set(ChannelId { alpha: Axis::Z, beta: Axis::Z }, zz);
    ch.set(ChannelId { alpha: Axis::X, beta: Axis::I }, x_i);
    ch.set(ChannelId { alpha: Axis::I, beta: Axis::X }, x_j);
    ch.set(ChannelId { alpha: Axis::Z, beta: Axis::I }, z_i);
    ch.set(ChannelId { alpha: Axis::I, beta: Axis::Z }, z_j);
    ch.set(ChannelId { alpha: Axis::Z, beta: Axis::X }, zx);
    ch.set(ChannelId { alpha: Axis::X, beta: Axis::Z }, xz);
    ch
}
