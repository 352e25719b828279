//! Directed-loop (worm) update for the XXZ representation.
//!
//! A loop is anchored at a uniformly random space-time point (site, level).
//! The head travels along worldlines, scatters at vertices according to the
//! precomputed loop rules, and annihilates when it returns to the anchor.
//! While open, the head and tail act as raising/lowering operator
//! insertions: every time the head crosses the anchor's propagation level
//! at site j, that is an equal-time coincidence of the two insertions and
//! contributes one count to the <sigma^x_i sigma^x_j> estimator at the
//! separation j - anchor. The closing crossing at the anchor site itself
//! is the j = i coincidence, which is exactly 1 per loop and fixes the
//! normalization: counts per loop estimate the correlator directly.

use crate::lattice::SepClasses;
use crate::model::{LoopRules, Model};
use crate::sse::linked::LinkedVertexList;
use crate::sse::state::SseState;
use rand::Rng;

/// Per-sweep record of loop construction and coincidence counts.
#[derive(Debug, Clone, Default)]
pub struct LoopTrace {
    pub loops: u64,
    pub legs_visited: u64,
    pub aborts: u64,
    /// Anchor-level crossings per requested separation class.
    pub sep_counts: Vec<f64>,
}

impl LoopTrace {
    pub fn reset(&mut self, n_seps: usize) {
        self.loops = 0;
        self.legs_visited = 0;
        self.aborts = 0;
        self.sep_counts.clear();
        self.sep_counts.resize(n_seps, 0.0);
    }
}

/// True when moving up from slot `a`, the boundary level `level` lies in
/// the cyclic interval (a, b]; `b == a` means a full wrap of the circle.
#[inline]
fn crossed_up(a: usize, b: usize, level: usize, m: usize) -> bool {
    let bound = (b + m - a - 1) % m;
    let step = (level + m - a - 1) % m;
    step <= bound
}

/// Downward-motion counterpart: level in the cyclic interval [b+1, a].
#[inline]
fn crossed_down(a: usize, b: usize, level: usize, m: usize) -> bool {
    let bound = (a + m - b - 1) % m;
    let step = (a + m - level) % m;
    step <= bound
}

pub struct LoopUpdateParams {
    pub n_loops: u32,
    /// Abort a loop after this many visited legs and restore the state.
    pub max_legs_per_loop: u64,
}

/// Run directed loops over a freshly built linked list. Leg spins and
/// vertex kinds are mutated in place; the caller writes them back to the
/// state afterwards. Free worldlines are flipped directly in the state.
pub fn loop_update(
    state: &mut SseState,
    model: &Model,
    rules: &LoopRules,
    links: &mut LinkedVertexList,
    seps: &SepClasses,
    params: &LoopUpdateParams,
    trace: &mut LoopTrace,
    undo: &mut Vec<u32>,
) {
    let m_slots = state.opstring.len();
    let n_sites = model.n_sites;
    let mut local_counts = vec![0.0f64; seps.len()];

    for _ in 0..params.n_loops {
        let anchor_site = state.rng.gen_range(0..n_sites);
        let anchor_level = state.rng.gen_range(0..m_slots);
        let go_up = state.rng.gen::<bool>();
        trace.loops += 1;

        if links.site_ops[anchor_site].is_empty() {
            // Bare worldline: the head wraps the whole time circle and
            // closes; net effect is a free spin flip.
            state.spins[anchor_site] = -state.spins[anchor_site];
            continue;
        }

        // First leg in the travel direction from the anchor.
        let touches = &links.site_ops[anchor_site];
        let mut enter_leg = if go_up {
            let k = touches
                .partition_point(|&(v, _, _)| (links.vertex_slot[v as usize] as usize) < anchor_level);
            let idx = if k == touches.len() { 0 } else { k };
            touches[idx].1
        } else {
            let k = touches
                .partition_point(|&(v, _, _)| (links.vertex_slot[v as usize] as usize) < anchor_level);
            let idx = if k == 0 { touches.len() - 1 } else { k - 1 };
            touches[idx].2
        };

        undo.clear();
        for c in &mut local_counts {
            *c = 0.0;
        }
        let mut legs_this_loop: u64 = 0;
        let mut aborted = false;

        loop {
            let v = enter_leg / 4;
            let e = (enter_leg % 4) as u8;
            let code = links.vertex_code(v);
            let dist = rules.bond_dist(code, e);
            links.leg_spin[enter_leg as usize] = -links.leg_spin[enter_leg as usize];
            undo.push(enter_leg);
            let (exit, new_code) = dist.sample(state.rng.gen::<f64>());
            let exit_leg = 4 * v + exit as u32;
            links.leg_spin[exit_leg as usize] = -links.leg_spin[exit_leg as usize];
            undo.push(exit_leg);
            debug_assert_eq!(links.vertex_code(v), new_code);
            legs_this_loop += 2;
            trace.legs_visited += 2;
            if legs_this_loop > params.max_legs_per_loop {
                aborted = true;
                break;
            }

            // Travel along the worldline from the exit leg.
            let up = exit >= 2;
            let site = links.leg_site[exit_leg as usize] as usize;
            let a = links.slot_of_leg(exit_leg);
            let next_leg = links.link[exit_leg as usize];
            let b = links.slot_of_leg(next_leg);
            let crosses_anchor_level = if up {
                crossed_up(a, b, anchor_level, m_slots)
            } else {
                crossed_down(a, b, anchor_level, m_slots)
            };
            if crosses_anchor_level {
                if site == anchor_site {
                    break; // head meets the tail: loop closed
                }
                if let Some(k) = seps.class_of_pair(anchor_site, site) {
                    local_counts[k] += 1.0;
                }
            }
            enter_leg = next_leg;
        }

        if aborted {
            trace.aborts += 1;
            for &leg in undo.iter().rev() {
                links.leg_spin[leg as usize] = -links.leg_spin[leg as usize];
            }
        } else {
            for (k, c) in local_counts.iter().enumerate() {
                trace.sep_counts[k] += c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_intervals() {
        let m = 10;
        // Up from slot 2 to slot 5: levels 3,4,5.
        assert!(!crossed_up(2, 5, 2, m));
        assert!(crossed_up(2, 5, 3, m));
        assert!(crossed_up(2, 5, 5, m));
        assert!(!crossed_up(2, 5, 6, m));
        // Wrap: up from 8 to 1: levels 9, 0, 1.
        assert!(crossed_up(8, 1, 9, m));
        assert!(crossed_up(8, 1, 0, m));
        assert!(crossed_up(8, 1, 1, m));
        assert!(!crossed_up(8, 1, 2, m));
        // Single operator on the worldline: full circle.
        assert!(crossed_up(4, 4, 0, m));
        assert!(crossed_up(4, 4, 9, m));
        // Down from 5 to 2: levels 5,4,3.
        assert!(crossed_down(5, 2, 5, m));
        assert!(crossed_down(5, 2, 3, m));
        assert!(!crossed_down(5, 2, 2, m));
        // Down wrap from 1 to 8: levels 1, 0, 9.
        assert!(crossed_down(1, 8, 0, m));
        assert!(crossed_down(1, 8, 9, m));
        assert!(!crossed_down(1, 8, 8, m));
    }
}
