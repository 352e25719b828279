//! Sweep composition: one diagonal pass, a tuned number of off-diagonal
//! updates (directed loops for XXZ, clusters for the Ising representation),
//! and cutoff management during thermalization.

use crate::lattice::SepClasses;
use crate::model::{LoopRules, Model, ModelKind};
use crate::sse::cluster::cluster_update;
use crate::sse::diagonal::diagonal_update;
use crate::sse::linked::LinkedVertexList;
use crate::sse::loops::{loop_update, LoopTrace, LoopUpdateParams};
use crate::sse::state::SseState;

pub const CUTOFF_HEADROOM: f64 = 1.25;
pub const LOOP_CAP_FACTOR: u64 = 100;

/// Reusable buffers and per-sweep trace for one chain.
pub struct Engine<'a> {
    pub model: &'a Model,
    pub rules: Option<&'a LoopRules>,
    pub seps: SepClasses,
    pub links: LinkedVertexList,
    pub trace: LoopTrace,
    scratch_spins: Vec<i8>,
    undo: Vec<u32>,
    cluster_of: Vec<u32>,
    stack: Vec<u32>,
}

impl<'a> Engine<'a> {
    pub fn new(model: &'a Model, rules: Option<&'a LoopRules>, seps: SepClasses) -> Self {
        assert!(
            model.kind == ModelKind::Tfim || rules.is_some(),
            "XXZ updates need loop rules"
        );
        Self {
            model,
            rules,
            seps,
            links: LinkedVertexList::default(),
            trace: LoopTrace::default(),
            scratch_spins: Vec::new(),
            undo: Vec::new(),
            cluster_of: Vec::new(),
            stack: Vec::new(),
        }
    }

    /// One Monte Carlo sweep. During thermalization the cutoff grows with
    /// 25% headroom over the expansion order and the loop count is retuned;
    /// afterwards both are frozen so the chain is a fixed-kernel Markov
    /// chain.
    pub fn sweep(&mut self, state: &mut SseState, thermalizing: bool) {
        diagonal_update(state, self.model, &mut self.scratch_spins);
        if thermalizing {
            let target = (CUTOFF_HEADROOM * state.n as f64).ceil() as usize;
            state.grow_cutoff(target);
        }

        self.trace.reset(self.seps.len());
        match self.model.kind {
            ModelKind::Xxz => {
                self.links.build(state, self.model);
                let params = LoopUpdateParams {
                    n_loops: state.loops_per_sweep,
                    max_legs_per_loop: LOOP_CAP_FACTOR * state.opstring.len().max(1) as u64,
                };
                loop_update(
                    state,
                    self.model,
                    self.rules.expect("rules checked in new"),
                    &mut self.links,
                    &self.seps,
                    &params,
                    &mut self.trace,
                    &mut self.undo,
                );
                self.links.write_back(state, self.model);
                // Loops never touch operator-free worldlines except through
                // the wrap move; give every free site an unconditional
                // 50/50 refresh as well.
                let free: Vec<usize> = self.links.free_sites().collect();
                for site in free {
                    if rand::Rng::gen::<bool>(&mut state.rng) {
                        state.spins[site] = -state.spins[site];
                    }
                }
                if thermalizing {
                    self.retune_loops(state);
                }
            }
            ModelKind::Tfim => {
                self.links.build(state, self.model);
                let stats = cluster_update(
                    state,
                    self.model,
                    &mut self.links,
                    &mut self.cluster_of,
                    &mut self.stack,
                );
                self.trace.loops = stats.clusters;
                self.links.write_back(state, self.model);
            }
        }
        state.sweep_count += 1;
    }

    /// Tune the number of loops per sweep so the mean number of visited
    /// legs is about twice the expansion order.
    fn retune_loops(&mut self, state: &mut SseState) {
        if self.trace.loops == 0 {
            return;
        }
        let per_loop = self.trace.legs_visited as f64 / self.trace.loops as f64;
        let ema = &mut state.legs_per_loop_ema;
        *ema = 0.75 * *ema + 0.25 * per_loop.max(0.1);
        let target_legs = 2.0 * state.n.max(1) as f64;
        let loops = (target_legs / ema.max(0.5)).ceil();
        state.loops_per_sweep = (loops as u32).clamp(1, 4 * state.n.max(4) as u32);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, two_site_pair, SeparationVector};
    use crate::model::{directed_loop_table, ModelParams};
    use crate::sse::state::SseState;

    fn run_sweeps(
        kind: ModelKind,
        params: ModelParams,
        geom: &crate::lattice::LatticeGeometry,
        seed: u64,
        therm: usize,
        keep: usize,
    ) -> (Vec<usize>, SseState) {
        let model = Model::build(kind, params, geom).unwrap();
        let rules = directed_loop_table(&model);
        let seps = SepClasses::new(geom, &[]);
        let mut engine = Engine::new(&model, Some(&rules), seps);
        let mut state = SseState::init(&model, seed, 0);
        let mut ns = Vec::with_capacity(keep);
        for k in 0..(therm + keep) {
            engine.sweep(&mut state, k < therm);
            if k >= therm {
                ns.push(state.n);
            }
            if k % 64 == 0 {
                state.validate(&model).unwrap();
            }
        }
        state.validate(&model).unwrap();
        (ns, state)
    }

    #[test]
    fn invariants_hold_through_sweeps_xxz() {
        let g = build_lattice(4, 1, true).unwrap();
        let params = ModelParams {
            delta: 1.0,
            beta: 4.0,
            epsilon: 0.1,
            ..Default::default()
        };
        run_sweeps(ModelKind::Xxz, params, &g, 11, 200, 200);
    }

    #[test]
    fn invariants_hold_through_sweeps_tfim() {
        let g = build_lattice(2, 2, true).unwrap();
        let params = ModelParams {
            lambda: 1.0,
            h_x: 0.001,
            beta: 6.0,
            ..Default::default()
        };
        run_sweeps(ModelKind::Tfim, params, &g, 12, 200, 200);
    }

    #[test]
    fn cutoff_is_monotone_and_fills_up() {
        let g = build_lattice(4, 4, true).unwrap();
        let params = ModelParams {
            delta: 1.0,
            beta: 8.0,
            epsilon: 0.1,
            ..Default::default()
        };
        let model = Model::build(ModelKind::Xxz, params, &g).unwrap();
        let rules = directed_loop_table(&model);
        let mut engine = Engine::new(&model, Some(&rules), SepClasses::new(&g, &[]));
        let mut state = SseState::init(&model, 5, 0);
        let mut cutoff_prev = state.cutoff();
        for _ in 0..600 {
            engine.sweep(&mut state, true);
            assert!(state.cutoff() >= cutoff_prev, "cutoff never shrinks");
            cutoff_prev = state.cutoff();
        }
        let mut mean_n = 0.0;
        for _ in 0..400 {
            engine.sweep(&mut state, false);
            mean_n += state.n as f64;
        }
        mean_n /= 400.0;
        let ratio = mean_n / state.cutoff() as f64;
        assert!(
            (0.6..=0.9).contains(&ratio),
            "n/M = {ratio} outside the headroom band"
        );
    }

    #[test]
    fn sweeps_are_deterministic() {
        let g = two_site_pair();
        let params = ModelParams {
            delta: 0.0,
            beta: 2.0,
            epsilon: 0.1,
            ..Default::default()
        };
        let model = Model::build(ModelKind::Xxz, params, &g).unwrap();
        let rules = directed_loop_table(&model);
        let sep = SeparationVector::canonical(1, 0, 2, 1).unwrap();
        let run = || {
            let mut engine =
                Engine::new(&model, Some(&rules), SepClasses::new(&g, &[sep]));
            let mut state = SseState::init(&model, 77, 3);
            let mut counts = Vec::new();
            for k in 0..400 {
                engine.sweep(&mut state, k < 100);
                counts.push(engine.trace.sep_counts.clone());
            }
            (state.opstring.clone(), state.spins.clone(), counts)
        };
        let a = run();
        let b = run();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        assert_eq!(a.2, b.2);
    }
}
