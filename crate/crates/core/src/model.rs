//! Model definitions and their SSE vertex structure.
//!
//! XXZ is represented in the sigma^z eigenbasis: the bond flip-flop term is
//! the only off-diagonal operator and carries weight 2, so all weights are
//! non-negative without any sublattice rotation. The transverse-field Ising
//! model is represented in the sigma^x eigenbasis: Ising coupling and the
//! longitudinal field are diagonal, the transverse field acts as a site flip
//! operator of weight 1.

use crate::lattice::LatticeGeometry;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("beta must be positive (got {0})")]
    BadBeta(f64),
    #[error("epsilon must be positive (got {0})")]
    BadEpsilon(f64),
    #[error("lambda must be non-negative (got {0})")]
    BadLambda(f64),
    #[error("longitudinal field must satisfy 0 <= h_x <= 0.5 so site weights stay positive (got {0})")]
    BadHx(f64),
    #[error("staggered field must be non-negative (got {0})")]
    BadHStag(f64),
    #[error("staggered field requires a bipartite periodic lattice (even lengths)")]
    NotBipartite,
    #[error("negative vertex weight {weight} for code {code}")]
    NegativeWeight { code: u8, weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ModelKind {
    Xxz,
    Tfim,
}

/// Physical and algorithmic parameters. XXZ reads `delta`/`h_stag`,
/// TFIM reads `lambda`/`h_x`; the others are ignored by each model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta: f64,
    pub lambda: f64,
    pub h_x: f64,
    pub h_stag: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            delta: 1.0,
            lambda: 0.0,
            h_x: 0.0,
            h_stag: 0.0,
            beta: 1.0,
            epsilon: 0.1,
        }
    }
}

/// Operator unit the diagonal update can act on: a bond, or (TFIM) a site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Unit {
    Bond(u32),
    Site(u32),
}

/// A model bound to a geometry, with its vertex weights resolved.
#[derive(Debug, Clone)]
pub struct Model {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// Bonds, oriented so the first site is on the + sublattice whenever a
    /// staggered field is active.
    pub bonds: Vec<(u32, u32)>,
    pub n_sites: usize,
    /// Constant folded into every bond operator.
    pub bond_const: f64,
    /// Constant folded into every site operator (TFIM only).
    pub site_const: f64,
    /// Staggered field share per bond leg, h_stag / coordination.
    stag_per_bond: f64,
    vertex: VertexTable,
}

/// Non-negative weights of all valid vertex states, indexed by the 4-bit
/// leg-spin code (bit set = spin up; legs 0,1 = in, legs 2,3 = out; site
/// vertices use legs 0 and 2).
#[derive(Debug, Clone, Default)]
pub struct VertexTable {
    pub bond: [f64; 16],
    pub site: [f64; 16],
}

pub const LEG_BOTTOM_LEFT: u8 = 0;
pub const LEG_BOTTOM_RIGHT: u8 = 1;
pub const LEG_TOP_LEFT: u8 = 2;
pub const LEG_TOP_RIGHT: u8 = 3;

#[inline]
pub fn flip_leg(code: u8, leg: u8) -> u8 {
    code ^ (1 << leg)
}

#[inline]
fn spin_of_bit(code: u8, leg: u8) -> i8 {
    if code & (1 << leg) != 0 {
        1
    } else {
        -1
    }
}

/// Pack two in / two out spins into a bond vertex code.
#[inline]
pub fn bond_code(s0: i8, s1: i8, s2: i8, s3: i8) -> u8 {
    let mut c = 0u8;
    if s0 > 0 {
        c |= 1;
    }
    if s1 > 0 {
        c |= 2;
    }
    if s2 > 0 {
        c |= 4;
    }
    if s3 > 0 {
        c |= 8;
    }
    c
}

/// Pack in/out spins of a site vertex (legs 0 and 2).
#[inline]
pub fn site_code(s_in: i8, s_out: i8) -> u8 {
    let mut c = 0u8;
    if s_in > 0 {
        c |= 1;
    }
    if s_out > 0 {
        c |= 4;
    }
    c
}

impl Model {
    pub fn build(
        kind: ModelKind,
        params: ModelParams,
        geom: &LatticeGeometry,
    ) -> Result<Self, ModelError> {
        if !(params.beta > 0.0) {
            return Err(ModelError::BadBeta(params.beta));
        }
        if !(params.epsilon > 0.0) {
            return Err(ModelError::BadEpsilon(params.epsilon));
        }
        match kind {
            ModelKind::Tfim => {
                if params.lambda < 0.0 {
                    return Err(ModelError::BadLambda(params.lambda));
                }
                if !(0.0..=0.5).contains(&params.h_x) {
                    return Err(ModelError::BadHx(params.h_x));
                }
            }
            ModelKind::Xxz => {
                if params.h_stag < 0.0 {
                    return Err(ModelError::BadHStag(params.h_stag));
                }
                if params.h_stag > 0.0 && !geom.is_bipartite() {
                    return Err(ModelError::NotBipartite);
                }
            }
        }

        let z = geom.coordination() as f64;
        let stag_per_bond = if kind == ModelKind::Xxz {
            params.h_stag / z
        } else {
            0.0
        };
        let mut bonds = geom.bonds().to_vec();
        if stag_per_bond > 0.0 {
            for b in &mut bonds {
                if geom.sublattice_sign(b.0 as usize) < 0 {
                    *b = (b.1, b.0);
                }
            }
        }

        let bond_const = match kind {
            ModelKind::Xxz => params.delta.abs() + 2.0 * stag_per_bond + params.epsilon,
            ModelKind::Tfim => params.lambda,
        };
        let site_const = match kind {
            ModelKind::Xxz => 0.0,
            ModelKind::Tfim => 1.0,
        };

        let mut model = Self {
            kind,
            params,
            bonds,
            n_sites: geom.num_sites(),
            bond_const,
            site_const,
            stag_per_bond,
            vertex: VertexTable::default(),
        };
        model.vertex = model.derive_vertex_table()?;
        Ok(model)
    }

    fn derive_vertex_table(&self) -> Result<VertexTable, ModelError> {
        let mut t = VertexTable::default();
        for code in 0u8..16 {
            let s0 = spin_of_bit(code, 0);
            let s1 = spin_of_bit(code, 1);
            let s2 = spin_of_bit(code, 2);
            let s3 = spin_of_bit(code, 3);
            let w = match self.kind {
                ModelKind::Xxz => {
                    if s2 == s0 && s3 == s1 {
                        self.bond_diag_weight(s0, s1)
                    } else if s2 == -s0 && s3 == -s1 && s1 == -s0 {
                        2.0
                    } else {
                        0.0
                    }
                }
                ModelKind::Tfim => {
                    if s2 == s0 && s3 == s1 {
                        self.params.lambda * (1.0 + (s0 * s1) as f64)
                    } else {
                        0.0
                    }
                }
            };
            if w < 0.0 {
                return Err(ModelError::NegativeWeight { code, weight: w });
            }
            t.bond[code as usize] = w;
        }
        if self.kind == ModelKind::Tfim {
            for code in [0u8, 5] {
                let s = spin_of_bit(code, 0);
                let w = 1.0 + self.params.h_x * s as f64;
                if w < 0.0 {
                    return Err(ModelError::NegativeWeight { code, weight: w });
                }
                t.site[code as usize] = w;
            }
            t.site[1] = 1.0;
            t.site[4] = 1.0;
        }
        Ok(t)
    }

    /// Diagonal bond weight for leg spins (first, second site of the bond).
    #[inline]
    pub fn bond_diag_weight(&self, s_first: i8, s_second: i8) -> f64 {
        match self.kind {
            ModelKind::Xxz => {
                self.bond_const - self.params.delta * (s_first * s_second) as f64
                    + self.stag_per_bond * (s_first - s_second) as f64
            }
            ModelKind::Tfim => self.params.lambda * (1.0 + (s_first * s_second) as f64),
        }
    }

    /// Diagonal site weight (TFIM).
    #[inline]
    pub fn site_diag_weight(&self, s: i8) -> f64 {
        self.site_const + self.params.h_x * s as f64
    }

    pub fn vertex_table(&self) -> &VertexTable {
        &self.vertex
    }

    pub fn n_bonds(&self) -> usize {
        self.bonds.len()
    }

    /// Units the diagonal update may insert: bonds, then (TFIM) sites.
    pub fn n_units(&self) -> usize {
        match self.kind {
            ModelKind::Xxz => self.bonds.len(),
            ModelKind::Tfim => self.bonds.len() + self.n_sites,
        }
    }

    #[inline]
    pub fn unit(&self, u: usize) -> Unit {
        if u < self.bonds.len() {
            Unit::Bond(u as u32)
        } else {
            Unit::Site((u - self.bonds.len()) as u32)
        }
    }

    /// Sum of constants folded into the operator string; the energy
    /// estimator is `<H> = C_total - <n>/beta`.
    pub fn c_total(&self) -> f64 {
        self.bonds.len() as f64 * self.bond_const + self.n_sites as f64 * self.site_const
    }

    /// Hash of everything that defines the Markov chain's stationary
    /// distribution; embedded in checkpoints.
    pub fn fingerprint(&self, lx: usize, ly: usize) -> u64 {
        let s = format!(
            "{:?}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{:.17e}|{}x{}",
            self.kind,
            self.params.delta,
            self.params.lambda,
            self.params.h_x,
            self.params.h_stag,
            self.params.beta,
            self.params.epsilon,
            lx,
            ly
        );
        fnv1a(s.as_bytes())
    }
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Probability table for one (vertex state, entrance leg) pair.
#[derive(Debug, Clone)]
pub struct ScatterDist {
    /// (cumulative probability, exit leg, resulting vertex code)
    pub entries: Vec<(f64, u8, u8)>,
}

impl ScatterDist {
    /// Sample an exit with a uniform draw in [0, 1).
    #[inline]
    pub fn sample(&self, u: f64) -> (u8, u8) {
        for &(cum, leg, code) in &self.entries {
            if u < cum {
                return (leg, code);
            }
        }
        let &(_, leg, code) = self.entries.last().expect("nonempty distribution");
        (leg, code)
    }

    pub fn prob_of_exit(&self, exit: u8) -> f64 {
        let mut prev = 0.0;
        for &(cum, leg, _) in &self.entries {
            if leg == exit {
                return cum - prev;
            }
            prev = cum;
        }
        0.0
    }

    pub fn bounce_prob(&self, entrance: u8) -> f64 {
        self.prob_of_exit(entrance)
    }
}

/// Directed-loop scattering rules: for every valid (vertex, entrance leg),
/// a distribution over (exit leg, transformed vertex) satisfying the
/// detailed-balance equations weight(v) P(v, in->out) = weight(v') P(v', out->in).
#[derive(Debug, Clone)]
pub struct LoopRules {
    /// Indexed by code*4 + entrance leg.
    bond: Vec<Option<ScatterDist>>,
    site: Vec<Option<ScatterDist>>,
    pub max_bounce: f64,
}

impl LoopRules {
    #[inline]
    pub fn bond_dist(&self, code: u8, leg: u8) -> &ScatterDist {
        self.bond[(code as usize) * 4 + leg as usize]
            .as_ref()
            .expect("entrance into invalid bond vertex")
    }

    #[inline]
    pub fn site_dist(&self, code: u8, leg: u8) -> &ScatterDist {
        self.site[(code as usize) * 4 + leg as usize]
            .as_ref()
            .expect("entrance into invalid site vertex")
    }

    pub fn has_site_rules(&self) -> bool {
        self.site.iter().any(|d| d.is_some())
    }
}

/// Solve the directed-loop equations for every scattering class of the
/// model's vertices, minimizing the bounce probability and falling back to
/// heat-bath flows when a class is larger than the closed forms cover.
pub fn directed_loop_table(model: &Model) -> LoopRules {
    let vt = model.vertex_table();
    let bond_legs: &[u8] = &[0, 1, 2, 3];
    let site_legs: &[u8] = &[0, 2];
    let mut max_bounce: f64 = 0.0;
    let bond = solve_ruleset(&vt.bond, bond_legs, &mut max_bounce);
    let site = if model.kind == ModelKind::Tfim {
        solve_ruleset(&vt.site, site_legs, &mut max_bounce)
    } else {
        vec![None; 64]
    };
    LoopRules {
        bond,
        site,
        max_bounce,
    }
}

fn solve_ruleset(weights: &[f64; 16], legs: &[u8], max_bounce: &mut f64) -> Vec<Option<ScatterDist>> {
    let mut table: Vec<Option<ScatterDist>> = vec![None; 64];
    let port_idx = |code: u8, leg: u8| (code as usize) * 4 + leg as usize;

    for code in 0u8..16 {
        if weights[code as usize] <= 0.0 {
            continue;
        }
        for &leg in legs {
            if table[port_idx(code, leg)].is_some() {
                continue;
            }
            // Gather the scattering class reachable from this port.
            let mut class: Vec<(u8, u8)> = vec![(code, leg)];
            let mut cursor = 0;
            while cursor < class.len() {
                let (c, e) = class[cursor];
                cursor += 1;
                let mid = flip_leg(c, e);
                for &x in legs {
                    let target = flip_leg(mid, x);
                    if weights[target as usize] > 0.0 && !class.contains(&(target, x)) {
                        class.push((target, x));
                    }
                }
            }
            class.sort();
            let w: Vec<f64> = class.iter().map(|&(c, _)| weights[c as usize]).collect();
            let flows = solve_class_flows(&w);

            // Port q is reached from port p by exiting toward it; the move
            // from (c,e) with exit x lands on (flip(flip(c,e),x), x).
            for (pi, &(c, e)) in class.iter().enumerate() {
                let mid = flip_leg(c, e);
                let mut entries: Vec<(f64, u8, u8)> = Vec::new();
                let mut cum = 0.0;
                for &x in legs {
                    let target = flip_leg(mid, x);
                    let qi = class.iter().position(|&p| p == (target, x));
                    let prob = match qi {
                        Some(qi) => flows[pi][qi] / w[pi],
                        None => 0.0,
                    };
                    if prob > 0.0 {
                        cum += prob;
                        entries.push((cum, x, target));
                    }
                    if x == e {
                        *max_bounce = max_bounce.max(prob);
                    }
                }
                debug_assert!((cum - 1.0).abs() < 1e-12, "row sum {cum}");
                if let Some(last) = entries.last_mut() {
                    last.0 = 1.0;
                }
                table[port_idx(c, e)] = Some(ScatterDist { entries });
            }
        }
    }
    table
}

/// Symmetric non-negative flow matrix with row sums equal to the weights,
/// minimizing the diagonal (bounce) flow for classes of size <= 3.
fn solve_class_flows(w: &[f64]) -> Vec<Vec<f64>> {
    let k = w.len();
    let mut a = vec![vec![0.0; k]; k];
    // Work on indices sorted by descending weight.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| w[j].partial_cmp(&w[i]).unwrap());
    match k {
        1 => {
            a[0][0] = w[0];
        }
        2 => {
            let (hi, lo) = (order[0], order[1]);
            a[hi][lo] = w[lo];
            a[lo][hi] = w[lo];
            a[hi][hi] = w[hi] - w[lo];
        }
        3 => {
            let (p, q, r) = (order[0], order[1], order[2]);
            if w[p] <= w[q] + w[r] {
                let apq = 0.5 * (w[p] + w[q] - w[r]);
                let apr = 0.5 * (w[p] - w[q] + w[r]);
                let aqr = 0.5 * (w[q] + w[r] - w[p]);
                a[p][q] = apq;
                a[q][p] = apq;
                a[p][r] = apr;
                a[r][p] = apr;
                a[q][r] = aqr;
                a[r][q] = aqr;
            } else {
                a[p][p] = w[p] - w[q] - w[r];
                a[p][q] = w[q];
                a[q][p] = w[q];
                a[p][r] = w[r];
                a[r][p] = w[r];
            }
        }
        _ => {
            // Heat bath: always a valid symmetric solution.
            let s: f64 = w.iter().sum();
            for i in 0..k {
                for j in 0..k {
                    a[i][j] = w[i] * w[j] / s;
                }
            }
        }
    }
    a
}

/// Exhaustive check of the directed-loop balance equations; returns the
/// largest absolute violation.
pub fn balance_violation(model: &Model, rules: &LoopRules) -> f64 {
    let vt = model.vertex_table();
    let mut worst: f64 = 0.0;
    let mut check = |weights: &[f64; 16], legs: &[u8], get: &dyn Fn(u8, u8) -> Option<ScatterDist>| {
        for code in 0u8..16 {
            if weights[code as usize] <= 0.0 {
                continue;
            }
            for &leg in legs {
                let dist = match get(code, leg) {
                    Some(d) => d,
                    None => continue,
                };
                let mut prev = 0.0;
                for &(cum, exit, target) in &dist.entries {
                    let p = cum - prev;
                    prev = cum;
                    let rev = get(target, exit).expect("reverse port must exist");
                    let p_rev = rev.prob_of_exit(leg);
                    let lhs = weights[code as usize] * p;
                    let rhs = weights[target as usize] * p_rev;
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    };
    check(&vt.bond, &[0, 1, 2, 3], &|c, l| {
        rules.bond.get((c as usize) * 4 + l as usize).cloned().flatten()
    });
    if model.kind == ModelKind::Tfim {
        check(&vt.site, &[0, 2], &|c, l| {
            rules.site.get((c as usize) * 4 + l as usize).cloned().flatten()
        });
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use approx::assert_abs_diff_eq;

    fn xxz(delta: f64, eps: f64) -> Model {
        let g = build_lattice(4, 4, true).unwrap();
        Model::build(
            ModelKind::Xxz,
            ModelParams {
                delta,
                epsilon: eps,
                beta: 1.0,
                ..Default::default()
            },
            &g,
        )
        .unwrap()
    }

    #[test]
    fn xxz_weights_delta_zero() {
        // Hand oracle: matrix elements of -H_bond + C in the z basis.
        let m = xxz(0.0, 0.1);
        for (a, b) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
            assert_abs_diff_eq!(m.bond_diag_weight(a, b), 0.1, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(m.vertex_table().bond[6], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.vertex_table().bond[9], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn xxz_weights_heisenberg() {
        let m = xxz(1.0, 0.1);
        assert_abs_diff_eq!(m.bond_diag_weight(1, 1), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.bond_diag_weight(-1, -1), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.bond_diag_weight(1, -1), 2.1, epsilon = 1e-15);
        assert_abs_diff_eq!(m.bond_diag_weight(-1, 1), 2.1, epsilon = 1e-15);
    }

    #[test]
    fn tfim_weights() {
        let g = build_lattice(4, 4, true).unwrap();
        let m = Model::build(
            ModelKind::Tfim,
            ModelParams {
                lambda: 0.32841,
                h_x: 0.001,
                beta: 1.0,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        // Flip operator weight 1 for both spin directions, diagonal site
        // operator carries the longitudinal-field share.
        assert_abs_diff_eq!(m.vertex_table().site[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.vertex_table().site[4], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.site_diag_weight(1), 1.001, epsilon = 1e-15);
        assert_abs_diff_eq!(m.site_diag_weight(-1), 0.999, epsilon = 1e-15);
        assert_abs_diff_eq!(m.bond_diag_weight(1, 1), 2.0 * 0.32841, epsilon = 1e-15);
        assert_abs_diff_eq!(m.bond_diag_weight(1, -1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn weight_positivity_scan() {
        let g = build_lattice(4, 4, true).unwrap();
        for k in 0..=100 {
            let delta = -5.0 + 0.1 * k as f64;
            let m = Model::build(
                ModelKind::Xxz,
                ModelParams {
                    delta,
                    epsilon: 0.1,
                    beta: 1.0,
                    ..Default::default()
                },
                &g,
            )
            .unwrap();
            for w in m.vertex_table().bond {
                assert!(w >= 0.0);
            }
        }
        for k in 0..=100 {
            let lambda = 0.1 * k as f64;
            let m = Model::build(
                ModelKind::Tfim,
                ModelParams {
                    lambda,
                    h_x: 0.001,
                    beta: 1.0,
                    ..Default::default()
                },
                &g,
            )
            .unwrap();
            for w in m.vertex_table().bond.iter().chain(m.vertex_table().site.iter()) {
                assert!(*w >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        let g = build_lattice(4, 4, true).unwrap();
        let base = ModelParams::default();
        assert!(matches!(
            Model::build(ModelKind::Xxz, ModelParams { beta: 0.0, ..base }, &g),
            Err(ModelError::BadBeta(_))
        ));
        assert!(matches!(
            Model::build(ModelKind::Xxz, ModelParams { epsilon: 0.0, ..base }, &g),
            Err(ModelError::BadEpsilon(_))
        ));
        assert!(matches!(
            Model::build(ModelKind::Tfim, ModelParams { h_x: 0.7, ..base }, &g),
            Err(ModelError::BadHx(_))
        ));
        let odd = build_lattice(5, 1, true).unwrap();
        assert!(matches!(
            Model::build(ModelKind::Xxz, ModelParams { h_stag: 0.1, ..base }, &odd),
            Err(ModelError::NotBipartite)
        ));
    }

    #[test]
    fn loop_distributions_normalized_and_balanced() {
        for (delta, eps, h_stag) in [(1.0, 0.1, 0.0), (0.0, 0.1, 0.0), (-0.5, 0.3, 0.0), (1.0, 0.1, 0.05)] {
            let g = build_lattice(4, 4, true).unwrap();
            let m = Model::build(
                ModelKind::Xxz,
                ModelParams {
                    delta,
                    epsilon: eps,
                    h_stag,
                    beta: 1.0,
                    ..Default::default()
                },
                &g,
            )
            .unwrap();
            let rules = directed_loop_table(&m);
            assert!(balance_violation(&m, &rules) < 1e-12);
        }
        let g = build_lattice(4, 4, true).unwrap();
        let m = Model::build(
            ModelKind::Tfim,
            ModelParams {
                lambda: 1.0,
                h_x: 0.001,
                beta: 1.0,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        let rules = directed_loop_table(&m);
        assert!(balance_violation(&m, &rules) < 1e-12);
    }

    #[test]
    fn heisenberg_small_eps_is_bounce_free() {
        // 3-channel balance solved by hand: weights (eps, 2 + eps, 2)
        // always satisfy the triangle condition, so no bounce.
        let m = xxz(1.0, 1e-9);
        let rules = directed_loop_table(&m);
        assert!(rules.max_bounce < 1e-10, "bounce {}", rules.max_bounce);
    }

    #[test]
    fn xy_exit_probabilities_reflect_symmetric() {
        // Delta = 0: the vertex weight table is invariant under swapping
        // the two sites (legs 0<->1, 2<->3); the rules must inherit that.
        let m = xxz(0.0, 0.1);
        let rules = directed_loop_table(&m);
        let reflect_leg = |l: u8| match l {
            0 => 1,
            1 => 0,
            2 => 3,
            3 => 2,
            _ => unreachable!(),
        };
        let reflect_code = |c: u8| {
            bond_code(
                spin_of_bit(c, 1),
                spin_of_bit(c, 0),
                spin_of_bit(c, 3),
                spin_of_bit(c, 2),
            )
        };
        let vt = m.vertex_table();
        for code in 0u8..16 {
            if vt.bond[code as usize] <= 0.0 {
                continue;
            }
            for leg in 0u8..4 {
                let d = rules.bond_dist(code, leg);
                let dr = rules.bond_dist(reflect_code(code), reflect_leg(leg));
                for &(_, exit, _) in &d.entries {
                    let p = d.prob_of_exit(exit);
                    let pr = dr.prob_of_exit(reflect_leg(exit));
                    assert_abs_diff_eq!(p, pr, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn fingerprint_distinguishes_models() {
        let g = build_lattice(4, 4, true).unwrap();
        let a = Model::build(ModelKind::Xxz, ModelParams::default(), &g).unwrap();
        let b = Model::build(
            ModelKind::Xxz,
            ModelParams {
                delta: 0.5,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        assert_ne!(a.fingerprint(4, 4), b.fingerprint(4, 4));
        assert_eq!(a.fingerprint(4, 4), a.fingerprint(4, 4));
    }
}
