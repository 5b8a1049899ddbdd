use std::f64::consts::{PI, TAU};

use nessim::config::{PotentialSpec, RunConfig};
use nessim::evolve::{sigma_of_t, NmSchedule, Propagator, PropagatorState};
use nessim::grid::Grid;
use nessim::observables::{center_of_mass, energy, linear_fit};
use nessim::potential::ComplexPotential;
use nessim::potentials::{stationary_state, TrapFamily};
use nessim::field::WaveField;
use nessim::{run, Error};

fn grid() -> Grid<f64> {
    Grid::new(-20.0, 20.0, 1024).unwrap()
}

fn hermitian() -> TrapFamily<f64> {
    TrapFamily::Hermitian { omega0: 1.0 }
}

fn propagate(pot: &ComplexPotential<f64>, field: WaveField<f64>, sched: NmSchedule<f64>, dt: f64, steps: u64) -> WaveField<f64> {
    let mut prop = Propagator::new(pot.clone(), sched, dt).unwrap();
    let mut state = PropagatorState::new(field);
    prop.advance_n(&mut state, steps).unwrap();
    state.field
}

#[test]
fn schedule_is_continuous_at_switch_on() {
    for (s0, g, om) in [(-1.0f64, 2.0, 0.2), (1.0, 0.5, 0.4), (2.5, 1.5, 1.0)] {
        let s = NmSchedule::new(s0, 100.0, om, g).unwrap();
        let before = sigma_of_t(&s, 100.0);
        let after = sigma_of_t(&s, 100.0 + 1e-12);
        assert_eq!(before, s0);
        assert!((after - before).abs() < 1e-15, "{before} {after}");
    }
}

#[test]
fn managed_attractive_nonlinearity_turns_repulsive() {
    let s = NmSchedule::new(-1.0, 100.0, 0.2, 2.0).unwrap();
    let t = 100.0 + PI / 0.2;
    assert!((sigma_of_t(&s, t) - 1.0).abs() < 1e-14);
}

#[test]
fn full_modulation_averages_to_zero() {
    let s = NmSchedule::new(1.0, 80.0, 0.2, 2.0).unwrap();
    let n = 4096;
    let period = s.period().unwrap();
    let mean = (0..n).map(|i| s.sigma_at(80.0 + period * (i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 1e-12, "{mean}");
}

#[test]
fn schedule_rejects_bad_parameters() {
    assert!(NmSchedule::new(1.0, -1.0, 0.2, 2.0).is_err());
    assert!(NmSchedule::new(1.0, 0.0, 0.0, 2.0).is_err());
    assert!(NmSchedule::new(f64::NAN, 0.0, 0.2, 2.0).is_err());
    assert!(NmSchedule::new(1.0, 0.0, 0.0, 0.0).is_ok());
}

#[test]
fn coherent_state_returns_after_one_period() {
    let g = grid();
    let fam = hermitian();
    let pot = fam.potential(&g).unwrap();
    let psi0 = fam.displaced_state(&g, 0.5, true).unwrap();
    let steps = 6000;
    let psi = propagate(&pot, psi0, NmSchedule::constant(0.0), TAU / steps as f64, steps);
    let xc = center_of_mass(&psi).unwrap();
    assert!((xc - 0.5).abs() < 1e-6, "x_c = {xc}");
}

#[test]
fn pt_stationary_state_keeps_its_peak() {
    let g = grid();
    for c0 in [0.1, 0.2] {
        let fam = TrapFamily::PtSymmetric { omega0: 1.0, c0 };
        let pot = fam.potential(&g).unwrap();
        let mut state = PropagatorState::new(stationary_state(&fam, &g).unwrap());
        let mut prop = Propagator::new(pot, NmSchedule::constant(0.0), 1e-3).unwrap();
        let p0 = state.field.peak_density();
        let (mut ts, mut ps) = (vec![0.0], vec![p0]);
        for _ in 0..100 {
            prop.advance_n(&mut state, 1000).unwrap();
            ts.push(state.t);
            ps.push(state.field.peak_density());
        }
        let (slope, _) = linear_fit(&ts, &ps);
        let drift = (ps[100] - p0).abs() / 100.0;
        assert!(slope.abs() < 1e-8 && drift < 1e-8, "c0 = {c0}: slope {slope:e}, drift {drift:e}");
    }
}

#[test]
fn uniform_loss_decays_exactly() {
    let g = grid();
    let c = 0.3;
    let pot = ComplexPotential::from_fns(&g, |_| 0.0, |_| -c, None).unwrap();
    let mut state = PropagatorState::new(hermitian().displaced_state(&g, 1.0, true).unwrap());
    let dt = 1e-3;
    let mut prop = Propagator::new(pot, NmSchedule::constant(0.0), dt).unwrap();
    let expected = (-2.0 * c * dt).exp();
    for _ in 0..500 {
        let n0 = state.field.norm();
        prop.advance(&mut state).unwrap();
        let ratio = state.field.norm() / n0;
        assert!((ratio / expected - 1.0).abs() < 1e-10, "ratio {ratio}");
    }
}

#[test]
fn uniform_loss_with_nonlinearity_keeps_exact_decay() {
    let g = grid();
    let c = 0.1;
    let pot = ComplexPotential::from_fns(&g, |x| 0.5 * x * x, |_| -c, None).unwrap();
    let psi0 = hermitian().displaced_state(&g, 0.5, true).unwrap();
    let psi = propagate(&pot, psi0, NmSchedule::constant(-1.0), 1e-3, 2000);
    assert!((psi.norm() / (-2.0 * c * 2.0f64).exp() - 1.0).abs() < 1e-10);
}

fn damped_config(a: f64, x0: f64, sigma: f64, t_final: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.potential = PotentialSpec::DampedHo { omega0: 1.0, a1: a, a2: a };
    cfg.initial.x0 = x0;
    cfg.evolve.sigma0 = sigma;
    cfg.evolve.t_final = t_final;
    cfg
}

#[test]
fn norm_balance_on_sampled_intervals() {
    for (a, x0, sigma) in [(-0.02, 0.5, 0.0), (-0.1, 2.0, 1.0), (-0.1, 2.0, -1.0)] {
        let out = run(&damped_config(a, x0, sigma, 20.0)).unwrap();
        let worst = out.series.balance_errors().into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-4, "a = {a}, sigma = {sigma}: worst relative balance error {worst:e}");
        // during the transient dN/dt is large, so even the trapezoid
        // quadrature with its O(dt^2) splitting error meets the bound
        let trap = out.series.balance_errors_trapezoid().into_iter().fold(0.0, f64::max);
        assert!(trap < 1e-4, "a = {a}, sigma = {sigma}: trapezoid balance error {trap:e}");
    }
}

#[test]
fn hermitian_norm_and_energy_are_conserved() {
    let g = grid();
    let fam = hermitian();
    let pot = fam.potential(&g).unwrap();
    let psi0 = fam.displaced_state(&g, 0.5, true).unwrap();
    let (n0, e0) = (psi0.norm(), energy(&psi0, &pot, 0.0));
    let psi = propagate(&pot, psi0, NmSchedule::constant(0.0), 1e-3, 100_000);
    let dn = (psi.norm() - n0).abs() / n0;
    let de = (energy(&psi, &pot, 0.0) - e0).abs();
    assert!(dn < 1e-10, "norm drift {dn:e}");
    assert!(de < 1e-8, "energy drift {de:e}");
}

#[test]
fn strang_splitting_is_second_order() {
    for (a, x0, sigma) in [(-0.02, 0.5, 0.0), (-0.1, 2.0, -1.0)] {
        let g = grid();
        let fam = TrapFamily::Damped(nessim::potentials::DampedTrapParams::new(1.0, a, a).unwrap());
        let pot = fam.potential(&g).unwrap();
        let psi0 = fam.displaced_state(&g, x0, true).unwrap();
        let sched = NmSchedule::constant(sigma);
        let at = |dt: f64| propagate(&pot, psi0.clone(), sched, dt, (10.0 / dt).round() as u64);
        let dt = 0.01;
        let reference = at(dt / 8.0);
        let e1 = at(dt).l2_distance(&reference);
        let e2 = at(dt / 2.0).l2_distance(&reference);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "sigma = {sigma}: observed order {order}");
    }
}

#[test]
fn hermitian_flow_is_time_reversible() {
    let g = grid();
    let fam = hermitian();
    let pot = fam.potential(&g).unwrap();
    let psi0 = fam.displaced_state(&g, 0.5, true).unwrap();
    let there = propagate(&pot, psi0.clone(), NmSchedule::constant(0.0), 1e-3, 10_000);
    let back = propagate(&pot, there, NmSchedule::constant(0.0), -1e-3, 10_000);
    let err = back.linf_distance(&psi0);
    assert!(err < 1e-9, "{err:e}");
}

#[test]
fn single_precision_smoke() {
    let g = Grid::<f32>::new(-20.0, 20.0, 256).unwrap();
    let fam = TrapFamily::Hermitian { omega0: 1.0f32 };
    let pot = fam.potential(&g).unwrap();
    let mut state = PropagatorState::new(fam.displaced_state(&g, 0.5, true).unwrap());
    let mut prop = Propagator::new(pot, NmSchedule::constant(0.0f32), 1e-2).unwrap();
    prop.advance_n(&mut state, 628).unwrap();
    assert!((state.field.norm() - 1.0).abs() < 1e-4);
    assert!((center_of_mass(&state.field).unwrap() - 0.5).abs() < 2e-2);
}

#[test]
fn blow_up_is_reported_and_last_state_kept() {
    let g = grid();
    let pot = hermitian().potential(&g).unwrap();
    let mut field = hermitian().displaced_state(&g, 0.0, true).unwrap();
    field.values_mut()[10].re = f64::INFINITY;
    let state = PropagatorState::new(field);
    let mut prop = Propagator::new(pot, NmSchedule::constant(0.0), 1e-3).unwrap();
    let err = prop.step(&state).unwrap_err();
    assert!(matches!(err, Error::BlowUp { step: 1, .. }), "{err}");
    assert_eq!(state.step_count, 0);
}

#[test]
fn zero_time_step_is_rejected() {
    let g = grid();
    let pot = hermitian().potential(&g).unwrap();
    assert!(Propagator::new(pot, NmSchedule::constant(0.0), 0.0).is_err());
}
