//! Temporary driver comparing raw engine estimates against ED (printed).

use spinmc::ed::EdOracle;
use spinmc::estimators::{mean_with_error, Accumulator, Measurer};
use spinmc::lattice::{build_lattice, two_site_pair, SepClasses, SeparationVector};
use spinmc::model::{directed_loop_table, Model, ModelKind, ModelParams};
use spinmc::sse::{Engine, SseState};
use spinmc::{Axis, ChannelId};

fn run(
    kind: ModelKind,
    params: ModelParams,
    geom: &spinmc::LatticeGeometry,
    seps: &[SeparationVector],
    sweeps: usize,
    therm: usize,
    seed: u64,
) -> Accumulator {
    let model = Model::build(kind, params, geom).unwrap();
    let rules = directed_loop_table(&model);
    let mut engine = Engine::new(&model, Some(&rules), SepClasses::new(geom, seps));
    let mut meas = Measurer::new(&model, geom, seps, 16);
    let mut state = SseState::init(&model, seed, 0);
    let mut acc = Accumulator::new(meas.schema.names.clone(), (sweeps / 100).max(1) as u64);
    let mut row = Vec::new();
    for k in 0..(therm + sweeps) {
        engine.sweep(&mut state, k < therm);
        if k >= therm {
            meas.measure(&state, &model, &engine.trace, &mut row);
            acc.push(&row);
        }
    }
    state.validate(&model).unwrap();
    acc
}

#[test]
fn scratch_xxz_two_site() {
    let geom = two_site_pair();
    for (delta, beta, eps) in [(0.0, 2.0, 1.0), (1.0, 2.0, 0.1), (-0.5, 1.5, 0.6)] {
        let params = ModelParams {
            delta,
            beta,
            epsilon: eps,
            ..Default::default()
        };
        let sep = SeparationVector::canonical(1, 0, 2, 1).unwrap();
        let acc = run(ModelKind::Xxz, params, &geom, &[sep], 200_000, 5_000, 42);
        let model = Model::build(ModelKind::Xxz, params, &geom).unwrap();
        let ed = EdOracle::new(&model, &geom, beta).unwrap();

        let e = mean_with_error(&acc.bins[acc.col_index("energy").unwrap()]).unwrap();
        let e_ed = ed.energy_per_site();
        let zz = mean_with_error(&acc.bins[acc.col_index("zz@1,0").unwrap()]).unwrap();
        let zz_ed = ed.channel_at_sep(ChannelId { alpha: Axis::Z, beta: Axis::Z }, sep);
        let xx = mean_with_error(&acc.bins[acc.col_index("xx@1,0").unwrap()]).unwrap();
        let xx_ed = ed.channel_at_sep(ChannelId { alpha: Axis::X, beta: Axis::X }, sep);
        let mz = mean_with_error(&acc.bins[acc.col_index("mag").unwrap()]).unwrap();

        println!("XXZ d={delta} b={beta}: E {e} vs {e_ed:.6} | zz {zz} vs {zz_ed:.6} | xx {xx} vs {xx_ed:.6} | mz {mz}");
    }
}

#[test]
fn scratch_xxz_chain4() {
    let geom = build_lattice(4, 1, true).unwrap();
    let params = ModelParams {
        delta: 1.0,
        beta: 4.0,
        epsilon: 0.5,
        ..Default::default()
    };
    let seps: Vec<_> = [(1, 0), (2, 0)]
        .iter()
        .map(|&(dx, dy)| SeparationVector::canonical(dx, dy, 4, 1).unwrap())
        .collect();
    let acc = run(ModelKind::Xxz, params, &geom, &seps, 400_000, 10_000, 7);
    let model = Model::build(ModelKind::Xxz, params, &geom).unwrap();
    let ed = EdOracle::new(&model, &geom, 4.0).unwrap();
    let e = mean_with_error(&acc.bins[0]).unwrap();
    println!("chain4: E {e} vs {:.6}", ed.energy_per_site());
    for (k, sep) in seps.iter().enumerate() {
        let zz = mean_with_error(&acc.bins[acc.col_index(&format!("zz@{},0", sep.dx)).unwrap()]).unwrap();
        let zz_ed = ed.channel_at_sep(ChannelId { alpha: Axis::Z, beta: Axis::Z }, *sep);
        let xx = mean_with_error(&acc.bins[acc.col_index(&format!("xx@{},0", sep.dx)).unwrap()]).unwrap();
        let xx_ed = ed.channel_at_sep(ChannelId { alpha: Axis::X, beta: Axis::X }, *sep);
        println!("  sep{k}: zz {zz} vs {zz_ed:.6} | xx {xx} vs {xx_ed:.6}");
    }
}

#[test]
fn scratch_tfim() {
    for (geom, label) in [
        (build_lattice(2, 2, true).unwrap(), "2x2"),
        (build_lattice(4, 1, true).unwrap(), "1x4"),
    ] {
        let params = ModelParams {
            lambda: 1.0,
            h_x: 0.001,
            beta: 6.0,
            ..Default::default()
        };
        let sep = SeparationVector::canonical(1, 0, geom.lx(), geom.ly()).unwrap();
        let acc = run(ModelKind::Tfim, params, &geom, &[sep], 400_000, 10_000, 99);
        let model = Model::build(ModelKind::Tfim, params, &geom).unwrap();
        let ed = EdOracle::new(&model, &geom, 6.0).unwrap();
        let e = mean_with_error(&acc.bins[0]).unwrap();
        println!("TFIM {label}: E {e} vs {:.6}", ed.energy_per_site());
        for (name, a, b) in [
            ("xx", Axis::X, Axis::X),
            ("zz", Axis::Z, Axis::Z),
            ("yy", Axis::Y, Axis::Y),
            ("zx", Axis::Z, Axis::X),
            ("xz", Axis::X, Axis::Z),
        ] {
            let mc = mean_with_error(&acc.bins[acc.col_index(&format!("{name}@1,0")).unwrap()]).unwrap();
            let edv = ed.channel_at_sep(ChannelId { alpha: a, beta: b }, sep);
            println!("  {name}: {mc} vs {edv:.6}");
        }
        let mx = mean_with_error(&acc.bins[acc.col_index("mag").unwrap()]).unwrap();
        let mz = mean_with_error(&acc.bins[acc.col_index("mag_z").unwrap()]).unwrap();
        println!(
            "  mx {mx} vs {:.6} | mz {mz} vs {:.6}",
            ed.single(Axis::X, 0),
            ed.single(Axis::Z, 0)
        );
    }
}
