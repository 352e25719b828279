//! SSE configuration: spins at propagation level 0, the padded operator
//! string, and the chain's random-number generator.

use crate::model::{Model, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// One slot of the operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Id,
    BondDiag(u32),
    BondOff(u32),
    SiteConst(u32),
    SiteFlip(u32),
}

impl Op {
    #[inline]
    pub fn is_identity(self) -> bool {
        self == Op::Id
    }

    /// Serialization tag; the payload is the unit index.
    pub fn tag(self) -> u8 {
        match self {
            Op::Id => 0,
            Op::BondDiag(_) => 1,
            Op::BondOff(_) => 2,
            Op::SiteConst(_) => 3,
            Op::SiteFlip(_) => 4,
        }
    }

    pub fn from_tag(tag: u8, unit: u32) -> Option<Op> {
        match tag {
            0 => Some(Op::Id),
            1 => Some(Op::BondDiag(unit)),
            2 => Some(Op::BondOff(unit)),
            3 => Some(Op::SiteConst(unit)),
            4 => Some(Op::SiteFlip(unit)),
            _ => None,
        }
    }

    pub fn unit(self) -> u32 {
        match self {
            Op::Id => 0,
            Op::BondDiag(u) | Op::BondOff(u) | Op::SiteConst(u) | Op::SiteFlip(u) => u,
        }
    }
}

pub const INITIAL_CUTOFF: usize = 20;

/// Markov-chain state. One `SseState` is confined to a single thread;
/// independent chains derive their RNG streams from a master seed.
#[derive(Debug, Clone)]
pub struct SseState {
    pub spins: Vec<i8>,
    pub opstring: Vec<Op>,
    pub n: usize,
    pub rng: ChaCha12Rng,
    pub sweep_count: u64,
    /// Directed loops (or clusters) launched per sweep; tuned during
    /// thermalization, frozen afterwards.
    pub loops_per_sweep: u32,
    /// Exponential moving average of legs visited per loop.
    pub legs_per_loop_ema: f64,
}

impl SseState {
    /// Deterministic initialization from a master seed and chain index.
    pub fn init(model: &Model, seed: u64, chain: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(chain);
        let spins = (0..model.n_sites)
            .map(|_| if rng.gen::<bool>() { 1i8 } else { -1i8 })
            .collect();
        Self {
            spins,
            opstring: vec![Op::Id; INITIAL_CUTOFF],
            n: 0,
            rng,
            sweep_count: 0,
            loops_per_sweep: 1,
            legs_per_loop_ema: 2.0,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.opstring.len()
    }

    /// Grow the cutoff to `target`, padding with identities.
    pub fn grow_cutoff(&mut self, target: usize) {
        if target > self.opstring.len() {
            self.opstring.resize(target, Op::Id);
        }
    }

    /// Walk the operator string and verify every invariant: leg-state
    /// consistency (diagonal operators sit on non-zero-weight spin
    /// configurations), imaginary-time periodicity, and the count `n`.
    pub fn validate(&self, model: &Model) -> Result<(), String> {
        let mut spins = self.spins.clone();
        let mut count = 0usize;
        for (p, op) in self.opstring.iter().enumerate() {
            match *op {
                Op::Id => continue,
                Op::BondDiag(b) => {
                    count += 1;
                    let (i, j) = model.bonds[b as usize];
                    let w = model.bond_diag_weight(spins[i as usize], spins[j as usize]);
                    if w <= 0.0 {
                        return Err(format!("slot {p}: diagonal bond on zero-weight spins"));
                    }
                }
                Op::BondOff(b) => {
                    count += 1;
                    let (i, j) = model.bonds[b as usize];
                    let (i, j) = (i as usize, j as usize);
                    if model.kind == ModelKind::Xxz && spins[i] == spins[j] {
                        return Err(format!("slot {p}: flip-flop on parallel spins"));
                    }
                    spins[i] = -spins[i];
                    spins[j] = -spins[j];
                }
                Op::SiteConst(s) => {
                    count += 1;
                    if model.site_diag_weight(spins[s as usize]) <= 0.0 {
                        return Err(format!("slot {p}: site operator on zero-weight spin"));
                    }
                }
                Op::SiteFlip(s) => {
                    count += 1;
                    spins[s as usize] = -spins[s as usize];
                }
            }
        }
        if count != self.n {
            return Err(format!("operator count {count} != recorded n {}", self.n));
        }
        if spins != self.spins {
            return Err("propagation around the time circle does not close".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::model::ModelParams;

    #[test]
    fn init_is_deterministic() {
        let g = build_lattice(4, 4, true).unwrap();
        let m = Model::build(crate::model::ModelKind::Xxz, ModelParams::default(), &g).unwrap();
        let a = SseState::init(&m, 42, 0);
        let b = SseState::init(&m, 42, 0);
        assert_eq!(a.spins, b.spins);
        assert_eq!(a.n, 0);
        assert_eq!(a.cutoff(), INITIAL_CUTOFF);
        a.validate(&m).unwrap();

        let c = SseState::init(&m, 43, 0);
        assert_ne!(a.spins, c.spins);
        let d = SseState::init(&m, 42, 1);
        assert_ne!(a.spins, d.spins);
    }
}
