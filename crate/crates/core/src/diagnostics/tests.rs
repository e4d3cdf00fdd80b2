use proptest::prelude::*;

use super::*;
use crate::grid_fields::{laplacian, ScalarField, TorusGrid};
use crate::initial_data::{build_phi0, Region};
use crate::solver::{potential_w_prime, rhs, Scheme};

fn params(n: usize, eps: f64) -> SolverParams<f64> {
    SolverParams::with_auto_dt(TorusGrid::new(2, n).unwrap(), eps, 0.5, 0.0, Scheme::Explicit).unwrap()
}

fn state_of(region: &Region<f64>, n: usize, eps: f64) -> (PhaseState<f64>, SolverParams<f64>) {
    let p = params(n, eps);
    let profile = build_phi0(region, eps, p.grid).unwrap();
    (PhaseState::initial(&profile, &p), p)
}

fn stripe() -> Region<f64> {
    Region::Stripe { center: 0.5, half_width: 0.2 }
}

fn ball() -> Region<f64> {
    Region::Ball { center: vec![0.5, 0.5], radius: 0.25 }
}

#[test]
fn pure_phase_energies() {
    let p = params(32, 0.1);
    let s = PhaseState::new(ScalarField::constant(p.grid, 1.0), 0, 0.3, &p);
    assert_eq!(surface_energy(&s, &p), 0.0);
    let expect = (0.3f64 - 2.0 / 3.0).powi(2) / (2.0 * 0.1f64.sqrt());
    assert!((penalty_energy(&s, &p) - expect).abs() < 1e-13);
    let e_p = penalty_energy(&s, &p);
    assert!((e_p - p.eps_alpha() * s.lambda * s.lambda / 2.0).abs() < 1e-12);
}

#[test]
fn stripe_surface_energy_is_two_sigma() {
    let (s, p) = state_of(&stripe(), 128, 0.04);
    let e = surface_energy(&s, &p);
    assert!((e / (8.0 / 3.0) - 1.0).abs() < 0.02, "E_S = {e}");
    let (_, xi) = discrepancy(&s, &p);
    assert!(xi <= 0.02 * e, "xi = {xi}");
}

#[test]
fn mu_of_ball_is_perimeter() {
    let (s, p) = state_of(&ball(), 128, 0.02);
    let one = ScalarField::constant(p.grid, 1.0);
    let mu = mu_measure(&s, &p, &one);
    assert!((mu / (std::f64::consts::PI * 0.5) - 1.0).abs() < 0.03, "mu = {mu}");
    assert_eq!(mu_measure(&s, &p, &ScalarField::zeros(p.grid)), 0.0);

    // test function supported where |x - c| < 0.25 - 10 eps
    let inner = ScalarField::from_fn(p.grid, |x: &[f64]| {
        let r = ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt();
        if r < 0.25 - 10.0 * 0.02 - 1e-9 { 1.0 } else { 0.0 }
    });
    assert!(inner.integrate() > 0.0);
    assert!(mu_measure(&s, &p, &inner) <= 1e-6);
}

#[test]
fn zero_field_discrepancy_closed_form() {
    let p = params(16, 0.2);
    let s = PhaseState::new(ScalarField::zeros(p.grid), 0, 0.0, &p);
    let (xi, total) = discrepancy(&s, &p);
    let expect = -1.0 / (2.0 * sigma::<f64>() * 0.2);
    assert!(xi.values().iter().all(|&v| (v - expect).abs() < 1e-14));
    assert!((total + expect).abs() < 1e-13);
}

#[test]
fn pure_phase_velocity_and_curvature_vanish() {
    let p = params(32, 0.1);
    let s = PhaseState::new(ScalarField::constant(p.grid, 1.0), 0, 2.0 / 3.0, &p);
    assert_eq!(approx_velocity(&s, &p).max_abs(), 0.0);
    assert_eq!(approx_curvature(&s, &p).max_abs(), 0.0);
}

#[test]
fn planar_curvature_is_second_order_small() {
    let eps = 0.04;
    let mut prev = f64::INFINITY;
    for n in [64usize, 128, 256] {
        let (s, p) = state_of(&stripe(), n, eps);
        let h = approx_curvature(&s, &p).max_abs();
        let hh = 1.0 / n as f64;
        // 1/(12 eps^2) * max|q''''| eps^2 ... bounded by 2 h^2 / eps^4 for tanh
        assert!(h <= 2.0 * hh * hh / eps.powi(4), "n = {n}: {h}");
        assert!(h < prev / 3.5);
        prev = h;
    }
}

#[test]
fn plain_allen_cahn_circle_shrinks_at_curvature_speed() {
    let eps = 0.01;
    let n = 256;
    let p = SolverParams::with_auto_dt(TorusGrid::new(2, n).unwrap(), eps, 0.5, 0.0, Scheme::Explicit).unwrap();
    let profile = build_phi0(&ball(), eps, p.grid).unwrap();
    let radius = |phi: &ScalarField<f64>| {
        let iface = extract_interface(phi);
        (iface.loops()[0].area() / std::f64::consts::PI).sqrt()
    };
    let mut phi = profile.phi0.clone();
    let steps = (0.01 / p.dt).round() as usize;
    let r0 = radius(&phi);
    for _ in 0..steps {
        let rate = rhs(&phi, 0.0, &p);
        phi = phi.zip_map(&rate, |a, b| a + p.dt * b).unwrap();
    }
    let r1 = radius(&phi);
    let elapsed = steps as f64 * p.dt;
    let speed = (r0 - r1) / elapsed;
    let law = 1.0 / (0.5 * (r0 + r1));
    assert!((speed / law - 1.0).abs() < 0.15, "speed {speed} vs {law}");
}

#[test]
fn density_ratio_examples() {
    let p = params(128, 0.02);
    let s = PhaseState::new(ScalarField::constant(p.grid, 1.0), 0, 2.0 / 3.0, &p);
    assert_eq!(density_ratio(&s, &p, &[0.3, 0.3], 0.1).unwrap(), 0.0);
    assert!(density_ratio(&s, &p, &[0.3, 0.3], 0.5).is_err());

    let (s, p) = state_of(&stripe(), 128, 0.02);
    let r = density_ratio(&s, &p, &[0.3, 0.41], 0.1).unwrap();
    assert!((r - 1.0).abs() < 0.1, "ratio {r}");
}

#[test]
fn record_identities() {
    let (s, p) = state_of(&ball(), 64, 0.04);
    let s = crate::solver::step(&s, &p).unwrap();
    let rec = DiagnosticsRecord::compute(&s, &p, &SampleDesign::standard(2)).unwrap();
    assert!((rec.e_total - rec.e_s - rec.e_p).abs() < 1e-12);
    assert!((rec.mu_total - rec.e_s / sigma::<f64>()).abs() < 1e-12);
    assert!((rec.e_p - p.eps_alpha() * rec.lambda * rec.lambda / 2.0).abs() < 1e-12);
    assert_eq!(rec.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    for name in CSV_HEADER.split(',') {
        assert!(rec.column(name).is_some());
    }
    assert!(rec.density_ratio_sup > 0.5 && rec.density_ratio_sup < 2.0);
}

#[test]
fn curvature_matches_its_definition() {
    let (s, p) = state_of(&ball(), 64, 0.04);
    let lap = laplacian(&s.phi);
    let h = approx_curvature(&s, &p);
    for i in (0..p.grid.len()).step_by(97) {
        let expect = lap.values()[i] - potential_w_prime(s.phi.values()[i]) / (0.04 * 0.04);
        assert!((h.values()[i] - expect).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn young_domination_is_pointwise(values in proptest::collection::vec(-1.2f64..1.2, 256), eps in 0.05f64..0.5) {
        let g = TorusGrid::new(2, 16).unwrap();
        let phi = ScalarField::new(g, values).unwrap();
        let mu = energy_density_of(&phi, eps).map(|v| v / sigma::<f64>());
        let xi = energy::discrepancy_density_of(&phi, eps);
        let y = interface_density(&phi);
        for i in 0..g.len() {
            prop_assert!(y.values()[i] <= mu.values()[i] + xi.values()[i].abs() + 1e-10);
            prop_assert!(y.values()[i] <= mu.values()[i] + 1e-10);
        }
    }
}
