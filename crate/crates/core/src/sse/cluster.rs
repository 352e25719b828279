//! Multibranch cluster update for the transverse-field Ising
//! representation.
//!
//! Clusters grow through worldline segments and across bond vertices (all
//! four legs belong to one cluster); site vertices terminate growth, so
//! flipping a cluster toggles the site operators on its boundary between
//! the constant and spin-flip kind. With no longitudinal field both kinds
//! have weight 1 and every flip is accepted; a longitudinal field enters
//! as a Metropolis ratio over the affected site vertices.

use crate::model::Model;
use crate::sse::linked::LinkedVertexList;
use crate::sse::state::{Op, SseState};
use rand::Rng;

#[derive(Debug, Clone, Copy, Default)]
pub struct ClusterStats {
    pub clusters: u64,
    pub flipped: u64,
}

pub fn cluster_update(
    state: &mut SseState,
    model: &Model,
    links: &mut LinkedVertexList,
    cluster_of: &mut Vec<u32>,
    stack: &mut Vec<u32>,
) -> ClusterStats {
    let n_legs = 4 * links.n_vertices;
    cluster_of.clear();
    cluster_of.resize(n_legs, u32::MAX);
    let mut stats = ClusterStats::default();
    let mut seen_vertex: Vec<u32> = vec![u32::MAX; links.n_vertices];

    let mut cluster_id = 0u32;
    for start in 0..n_legs as u32 {
        if links.leg_site[start as usize] == u32::MAX || cluster_of[start as usize] != u32::MAX {
            continue;
        }
        stack.clear();
        stack.push(start);
        let mut members: Vec<u32> = Vec::new();
        while let Some(leg) = stack.pop() {
            if cluster_of[leg as usize] != u32::MAX {
                continue;
            }
            cluster_of[leg as usize] = cluster_id;
            members.push(leg);
            let partner = links.link[leg as usize];
            if cluster_of[partner as usize] == u32::MAX {
                stack.push(partner);
            }
            let v = (leg / 4) as usize;
            if matches!(links.vertex_op[v], Op::BondDiag(_) | Op::BondOff(_)) {
                let base = (leg / 4) * 4;
                for l in 0..4u32 {
                    let sib = base + l;
                    if links.leg_site[sib as usize] != u32::MAX
                        && cluster_of[sib as usize] == u32::MAX
                    {
                        stack.push(sib);
                    }
                }
            }
        }
        stats.clusters += 1;

        // Propose the flip; accept with the product of site-vertex weight
        // ratios (all 1 when h_x = 0).
        if state.rng.gen::<bool>() {
            let mut ratio = 1.0;
            if model.params.h_x > 0.0 {
                for &leg in &members {
                    let v = (leg / 4) as usize;
                    if !matches!(links.vertex_op[v], Op::SiteConst(_) | Op::SiteFlip(_)) {
                        continue;
                    }
                    if seen_vertex[v] == cluster_id {
                        continue;
                    }
                    seen_vertex[v] = cluster_id;
                    let base = (4 * v) as u32;
                    let s_in = links.leg_spin[base as usize];
                    let s_out = links.leg_spin[base as usize + 2];
                    let flip_in = cluster_of[base as usize] == cluster_id;
                    let flip_out = cluster_of[base as usize + 2] == cluster_id;
                    let (n_in, n_out) = (
                        if flip_in { -s_in } else { s_in },
                        if flip_out { -s_out } else { s_out },
                    );
                    let w_old = site_weight(model, s_in, s_out);
                    let w_new = site_weight(model, n_in, n_out);
                    ratio *= w_new / w_old;
                }
            }
            if ratio >= 1.0 || state.rng.gen::<f64>() < ratio {
                stats.flipped += 1;
                for &leg in &members {
                    links.leg_spin[leg as usize] = -links.leg_spin[leg as usize];
                }
            }
        }
        cluster_id += 1;
    }

    // Operator-free worldlines flip freely.
    let free: Vec<usize> = links.free_sites().collect();
    for site in free {
        if state.rng.gen::<bool>() {
            state.spins[site] = -state.spins[site];
        }
    }
    stats
}

#[inline]
fn site_weight(model: &Model, s_in: i8, s_out: i8) -> f64 {
    if s_in == s_out {
        model.site_diag_weight(s_in)
    } else {
        1.0
    }
}
