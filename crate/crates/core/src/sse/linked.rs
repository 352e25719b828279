//! Linked vertex list built from the operator string once per sweep.
//!
//! Every non-identity operator becomes a vertex with four leg slots
//! (site operators use legs 0 and 2). Leg `4v + l` with l in {0,1} is an
//! in-leg (below the vertex), l in {2,3} an out-leg. Linked legs are the
//! two ends of one worldline segment and always hold equal spin values.

use crate::model::Model;
use crate::sse::state::{Op, SseState};

pub const NO_LEG: u32 = u32::MAX;

#[derive(Debug, Default)]
pub struct LinkedVertexList {
    /// Vertex index -> slot in the operator string.
    pub vertex_slot: Vec<u32>,
    /// Vertex index -> operator (copy, updated by loop/cluster moves).
    pub vertex_op: Vec<Op>,
    /// Leg -> linked partner leg (same worldline segment).
    pub link: Vec<u32>,
    /// Leg -> spin on that leg.
    pub leg_spin: Vec<i8>,
    /// Per site: vertices touching it, in slot order, as (vertex, in-leg, out-leg).
    pub site_ops: Vec<Vec<(u32, u32, u32)>>,
    /// Leg -> index into `site_ops[site_of_leg]` of its touch entry.
    pub touch_index: Vec<u32>,
    /// Leg -> site it lives on.
    pub leg_site: Vec<u32>,
    pub n_vertices: usize,
}

impl LinkedVertexList {
    /// Rebuild from the current state. Spins are propagated so leg states
    /// are consistent by construction.
    pub fn build(&mut self, state: &SseState, model: &Model) {
        let n = state.n;
        self.vertex_slot.clear();
        self.vertex_op.clear();
        self.link.clear();
        self.link.resize(4 * n, NO_LEG);
        self.leg_spin.clear();
        self.leg_spin.resize(4 * n, 0);
        self.touch_index.clear();
        self.touch_index.resize(4 * n, NO_LEG);
        self.leg_site.clear();
        self.leg_site.resize(4 * n, u32::MAX);
        if self.site_ops.len() != model.n_sites {
            self.site_ops = vec![Vec::new(); model.n_sites];
        } else {
            for v in &mut self.site_ops {
                v.clear();
            }
        }
        self.n_vertices = n;

        let mut spins: Vec<i8> = state.spins.clone();
        let mut v = 0u32;
        for (p, op) in state.opstring.iter().enumerate() {
            let (sites, flips): ([usize; 2], bool) = match *op {
                Op::Id => continue,
                Op::BondDiag(b) => {
                    let (i, j) = model.bonds[b as usize];
                    ([i as usize, j as usize], false)
                }
                Op::BondOff(b) => {
                    let (i, j) = model.bonds[b as usize];
                    ([i as usize, j as usize], true)
                }
                Op::SiteConst(s) => ([s as usize, usize::MAX], false),
                Op::SiteFlip(s) => ([s as usize, usize::MAX], true),
            };
            self.vertex_slot.push(p as u32);
            self.vertex_op.push(*op);
            let base = 4 * v;
            for (k, &site) in sites.iter().enumerate() {
                if site == usize::MAX {
                    continue;
                }
                let in_leg = base + k as u32;
                let out_leg = base + 2 + k as u32;
                self.leg_spin[in_leg as usize] = spins[site];
                if flips {
                    spins[site] = -spins[site];
                }
                self.leg_spin[out_leg as usize] = spins[site];
                self.touch_index[in_leg as usize] = self.site_ops[site].len() as u32;
                self.touch_index[out_leg as usize] = self.site_ops[site].len() as u32;
                self.leg_site[in_leg as usize] = site as u32;
                self.leg_site[out_leg as usize] = site as u32;
                self.site_ops[site].push((v, in_leg, out_leg));
            }
            v += 1;
        }
        debug_assert_eq!(v as usize, n);
        debug_assert_eq!(spins, state.spins, "string must close around the time circle");

        for ops in &self.site_ops {
            if ops.is_empty() {
                continue;
            }
            for k in 0..ops.len() {
                let next = (k + 1) % ops.len();
                let out_leg = ops[k].2;
                let in_leg = ops[next].1;
                self.link[out_leg as usize] = in_leg;
                self.link[in_leg as usize] = out_leg;
            }
        }
    }

    #[inline]
    pub fn slot_of_leg(&self, leg: u32) -> usize {
        self.vertex_slot[(leg / 4) as usize] as usize
    }

    /// Vertex state code from current leg spins (bond: 4 legs; site: legs 0, 2).
    #[inline]
    pub fn vertex_code(&self, v: u32) -> u8 {
        let base = (4 * v) as usize;
        let mut code = 0u8;
        for l in 0..4 {
            if self.leg_site[base + l] != u32::MAX && self.leg_spin[base + l] > 0 {
                code |= 1 << l;
            }
        }
        code
    }

    /// Write loop/cluster results back: operator kinds from final leg spins
    /// and level-0 spins from each site's first in-leg.
    pub fn write_back(&self, state: &mut SseState, model: &Model) {
        for v in 0..self.n_vertices {
            let slot = self.vertex_slot[v] as usize;
            let base = 4 * v;
            let new_op = match self.vertex_op[v] {
                Op::BondDiag(b) | Op::BondOff(b) => {
                    if self.leg_spin[base] == self.leg_spin[base + 2] {
                        debug_assert_eq!(self.leg_spin[base + 1], self.leg_spin[base + 3]);
                        Op::BondDiag(b)
                    } else {
                        Op::BondOff(b)
                    }
                }
                Op::SiteConst(s) | Op::SiteFlip(s) => {
                    if self.leg_spin[base] == self.leg_spin[base + 2] {
                        Op::SiteConst(s)
                    } else {
                        Op::SiteFlip(s)
                    }
                }
                Op::Id => unreachable!(),
            };
            state.opstring[slot] = new_op;
        }
        for site in 0..model.n_sites {
            if let Some(&(_, in_leg, _)) = self.site_ops[site].first() {
                state.spins[site] = self.leg_spin[in_leg as usize];
            }
        }
    }

    /// Sites with no operators acting on them.
    pub fn free_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.site_ops
            .iter()
            .enumerate()
            .filter(|(_, ops)| ops.is_empty())
            .map(|(s, _)| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::model::{ModelKind, ModelParams};

    #[test]
    fn links_pair_equal_spins() {
        let g = build_lattice(4, 1, true).unwrap();
        let m = Model::build(ModelKind::Xxz, ModelParams::default(), &g).unwrap();
        let mut st = SseState::init(&m, 1, 0);
        // Hand-built string: diagonal on bond 0, flip-flop pair on bond 1.
        st.spins = vec![1, -1, 1, -1];
        st.opstring = vec![
            Op::BondDiag(0),
            Op::BondOff(1),
            Op::Id,
            Op::BondOff(1),
            Op::Id,
        ];
        st.n = 3;
        st.validate(&m).unwrap();
        let mut links = LinkedVertexList::default();
        links.build(&st, &m);
        assert_eq!(links.n_vertices, 3);
        for leg in 0..(4 * links.n_vertices) as u32 {
            if links.leg_site[leg as usize] == u32::MAX {
                continue;
            }
            let partner = links.link[leg as usize];
            assert_ne!(partner, NO_LEG);
            assert_eq!(links.link[partner as usize], leg, "links are mutual");
            assert_eq!(
                links.leg_spin[leg as usize], links.leg_spin[partner as usize],
                "linked legs carry one segment"
            );
        }
    }
}
