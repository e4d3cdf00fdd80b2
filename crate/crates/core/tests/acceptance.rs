//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vpmcf::brakke::{BrakkeAccumulator, TestFunction, TimeProfile};
use vpmcf::cli_io::{cmd_run, parse_config, DIAGNOSTICS_FILE};
use vpmcf::diagnostics::{extract_interface, penalty_energy, surface_energy, Interface, SampleDesign};
use vpmcf::grid_fields::{forward_difference, laplacian};
use vpmcf::initial_data::{build_phi0, Region};
use vpmcf::oracle2d::{admissible, circle_rhs, compare_phase_field, evolve_circles, fit_circle, CircleSystem};
use vpmcf::solver::{rhs, run, Scheme, SolverParams};
use vpmcf::sweep::{run_sweep, resolution_for, standard_assertions, SweepPlan, SweepReport, TrendAssertion};
use vpmcf::{ScalarField, TorusGrid};

struct Verdict {
    pass: bool,
    detail: String,
}

type Check = fn() -> Verdict;

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn ball() -> Region<f64> {
    Region::Ball { center: vec![0.5, 0.5], radius: 0.25 }
}

fn ellipse() -> Region<f64> {
    Region::Ellipse { center: vec![0.5, 0.5], semi_axes: [0.3, 0.2] }
}

fn two_balls() -> Region<f64> {
    Region::TwoBalls { centers: [vec![0.2, 0.5], vec![0.7, 0.5]], radii: [0.12, 0.2] }
}

fn params(eps: f64, n: usize, t_final: f64, scheme: Scheme) -> SolverParams<f64> {
    let grid = TorusGrid::new(2, n).unwrap();
    SolverParams::with_auto_dt(grid, eps, 0.99, t_final, scheme).unwrap()
}

fn volume_bound(p: &SolverParams<f64>, e0: f64) -> f64 {
    2.0 * (2.0 * p.eps_alpha() * e0).sqrt()
}

// ---------------------------------------------------------------------------
// Shared runs

/// Per-step bookkeeping of one scenario at eps = 0.02, n = 128, t = 0.05.
struct Scenario {
    name: &'static str,
    steps: u64,
    /// Largest `E_{n+1} - E_n` over `tol_E`.
    rise: f64,
    /// Largest `|E_{n+1} - E_n + dt eps ∫phi_t^2|` over `tol_E`.
    balance: f64,
    /// Largest `|∫k(phi) - V0|` over the volume bound.
    volume: f64,
    density_max: f64,
    /// Fitted interface radius at each record (single loops only).
    radii: Vec<(f64, f64)>,
}

fn scenario(name: &'static str, region: Region<f64>) -> Scenario {
    let mut p = params(0.02, 128, 0.05, Scheme::Explicit);
    p.record_stride = 50;
    let profile = build_phi0(&region, p.epsilon, p.grid).unwrap();
    let design = SampleDesign::standard(2);
    let energy = |s: &vpmcf::solver::PhaseState<f64>| surface_energy(s, &p) + penalty_energy(s, &p);
    let mut prev: Option<(f64, f64)> = None;
    let mut out = Scenario { name, steps: 0, rise: 0.0, balance: 0.0, volume: 0.0, density_max: 0.0, radii: Vec::new() };
    let mut tol = 0.0;
    let mut vbound = 0.0;
    run_scenario_checked(&p, &profile, &design, |s, rec| {
        let e = energy(s);
        if s.step == 0 {
            tol = 10.0 * p.dt * p.dt * e / p.epsilon.powi(3);
            vbound = volume_bound(&p, e);
        }
        if let Some((e_prev, diss)) = prev {
            out.rise = out.rise.max((e - e_prev) / tol);
            out.balance = out.balance.max((e - e_prev + diss).abs() / tol);
        }
        let phi_t = rhs(&s.phi, s.lambda, &p);
        let diss = p.dt * p.epsilon * phi_t.integrate_with(|v| v * v);
        prev = Some((e, diss));
        out.volume = out.volume.max((s.volume_target - vpmcf::solver::volume_k(&s.phi)).abs() / vbound);
        out.steps = s.step;
        if let Some(r) = rec {
            out.density_max = out.density_max.max(r.density_ratio_sup);
            if let Interface::Loops(loops) = extract_interface(&s.phi) {
                if loops.len() == 1 {
                    if let Some((_, radius)) = fit_circle(&loops[0].points) {
                        out.radii.push((s.t, radius));
                    }
                }
            }
        }
    });
    out
}

fn run_scenario_checked<F>(
    p: &SolverParams<f64>,
    profile: &vpmcf::initial_data::InitialProfile<f64>,
    design: &SampleDesign<f64>,
    mut f: F,
) where
    F: FnMut(&vpmcf::solver::PhaseState<f64>, Option<&vpmcf::diagnostics::DiagnosticsRecord<f64>>),
{
    vpmcf::sweep::run_scenario(p, profile, &[], design, |s, r| {
        f(s, r);
        Ok(())
    })
    .unwrap();
}

fn scenarios() -> &'static [Scenario] {
    static CELL: OnceLock<Vec<Scenario>> = OnceLock::new();
    CELL.get_or_init(|| vec![scenario("ball", ball()), scenario("ellipse", ellipse()), scenario("two_balls", two_balls())])
}

const RADII: [f64; 3] = [0.1, 0.2, 0.4];

fn brakke_tests() -> Vec<TestFunction<f64>> {
    let mut tests = Vec::new();
    for (t1, t2, time) in [(0.0, 0.01, TimeProfile::Constant), (0.01, 0.05, TimeProfile::Hat)] {
        for r in RADII {
            tests.push(TestFunction::new(vec![0.75, 0.5], r, t1, t2, time).unwrap());
        }
    }
    tests
}

fn sweep_of(region: Region<f64>, tests: Vec<TestFunction<f64>>, assertions: Vec<TrendAssertion>) -> SweepReport<f64> {
    let plan = SweepPlan {
        dim: 2,
        region,
        alpha: 0.99,
        epsilons: vec![0.04, 0.02, 0.01],
        scheme: Scheme::Explicit,
        t_final: 0.05,
        record_stride: 100,
        tests,
        assertions,
        output_dir: None,
    };
    run_sweep(&plan).unwrap()
}

fn ball_sweep() -> &'static SweepReport<f64> {
    static CELL: OnceLock<SweepReport<f64>> = OnceLock::new();
    CELL.get_or_init(|| sweep_of(ball(), brakke_tests(), standard_assertions()))
}

fn two_ball_sweep() -> &'static SweepReport<f64> {
    static CELL: OnceLock<SweepReport<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let lambda = TrendAssertion::uniform("lambda_l2_ratio", "lambda L2 ratio uniform in epsilon");
        sweep_of(two_balls(), Vec::new(), vec![lambda])
    })
}

fn observable(report: &SweepReport<f64>, name: &str) -> Vec<f64> {
    report.configurations.iter().map(|c| c.observables[name]).collect()
}

fn assertion<'a>(report: &'a SweepReport<f64>, name: &str) -> &'a vpmcf::sweep::AssertionResult {
    report.assertions.iter().find(|a| a.observable == name).unwrap()
}

fn sci(values: &[f64]) -> String {
    let v: Vec<String> = values.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

// ---------------------------------------------------------------------------
// Criteria

fn c01_discrete_calculus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_sbp = 0.0f64;
    let mut worst_int = 0.0f64;
    for d in [2, 3] {
        let grid = TorusGrid::new(d, 32).unwrap();
        for _ in 0..50 {
            let mut field = || ScalarField::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let f = field();
            let g = field();
            let lap = laplacian(&g);
            let lhs = f.integrate_product(&lap).unwrap();
            let rhs: f64 = (0..d)
                .map(|a| forward_difference(&f, a).integrate_product(&forward_difference(&g, a)).unwrap())
                .sum();
            worst_sbp = worst_sbp.max((lhs + rhs).abs());
            worst_int = worst_int.max(lap.integrate().abs());
        }
    }
    verdict(
        worst_sbp <= 1e-10 && worst_int <= 1e-10,
        format!("max |sum f lap g + sum Df.Dg| = {worst_sbp:.2e}, max |int lap f| = {worst_int:.2e}"),
    )
}

fn c02_well_prepared() -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    let mut count = 0;
    for eps in [0.04, 0.02] {
        let n = resolution_for(eps);
        let regions: Vec<(usize, Region<f64>)> = vec![
            (2, ball()),
            (2, ellipse()),
            (2, two_balls()),
            (2, Region::Stripe { center: 0.5, half_width: 0.2 }),
            (3, Region::Ball { center: vec![0.5, 0.5, 0.5], radius: 0.25 }),
        ];
        for (d, region) in regions {
            let profile = build_phi0(&region, eps, TorusGrid::new(d, n).unwrap()).unwrap();
            let excess = profile.well_prepared_excess() / profile.tol_prep();
            worst = worst.max(excess);
            all &= profile.is_well_prepared();
            count += 1;
        }
    }
    verdict(all, format!("{count} profiles, max excess / tol_prep = {worst:.3}"))
}

fn c03_dissipation() -> Verdict {
    let s = scenarios();
    let pass = s.iter().all(|x| x.rise <= 1.0 && x.balance <= 1.0);
    let detail: Vec<String> = s
        .iter()
        .map(|x| format!("{} ({} steps): rise/tol {:.2e}, balance/tol {:.2e}", x.name, x.steps, x.rise, x.balance))
        .collect();
    verdict(pass, detail.join("; "))
}

fn c04_volume() -> Verdict {
    let mut worst = scenarios().iter().map(|x| x.volume).fold(0.0, f64::max);
    for report in [ball_sweep(), two_ball_sweep()] {
        for c in &report.configurations {
            let e0 = c.records[0].e_total;
            let eps = c.environment.epsilon;
            let bound = 2.0 * (2.0 * eps.powf(c.environment.alpha) * e0).sqrt();
            worst = worst.max(c.observables["vol_k_error_max"] / bound);
        }
    }
    let trend = assertion(ball_sweep(), "vol_psi_error");
    verdict(
        worst <= 1.0 && trend.pass,
        format!("max |vol_k - V0| / bound = {worst:.3}; |vol_psi - |U0|| over sweep {:?}: {}", trend.values, trend.detail),
    )
}

fn c05_lambda_l2() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, report) in [("ball", ball_sweep()), ("two_balls", two_ball_sweep())] {
        let v = observable(report, "lambda_l2_ratio");
        let ok = v.iter().all(|x| x.is_finite()) && spread(&v) <= 3.0;
        pass &= ok;
        parts.push(format!("{name} {} spread {:.2}", sci(&v), spread(&v)));
    }
    verdict(pass, parts.join("; "))
}

fn brakke_residuals(scheme: Scheme, scale: f64) -> Vec<f64> {
    let mut p = params(0.02, 128, 0.01, scheme);
    p.dt *= scale;
    let profile = build_phi0(&ball(), p.epsilon, p.grid).unwrap();
    let tests: Vec<_> = RADII
        .iter()
        .map(|&r| TestFunction::new(vec![0.75, 0.5], r, 0.0, 0.01, TimeProfile::Constant).unwrap())
        .collect();
    let mut acc = BrakkeAccumulator::new(&p, &tests).unwrap();
    run(&p, &profile, &mut [&mut acc]).unwrap();
    acc.finish().unwrap().iter().map(|r| r.normalized_residual).collect()
}

fn c06_brakke_identity() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for scheme in [Scheme::Explicit, Scheme::Imex] {
        let full = brakke_residuals(scheme, 1.0);
        let half = brakke_residuals(scheme, 0.5);
        let ratios: Vec<f64> = full.iter().zip(&half).map(|(a, b)| b / a).collect();
        pass &= full.iter().all(|&r| r <= 0.05) && ratios.iter().all(|&q| q <= 0.6);
        parts.push(format!("{scheme:?} residuals {}, ratios at dt/2 {ratios:.3?}", sci(&full)));
    }
    verdict(pass, parts.join("; "))
}

fn c07_weak_brakke() -> Verdict {
    let report = ball_sweep();
    let margin = observable(report, "weak_margin_min");
    let mut pass = margin.iter().all(|&m| m >= 0.0);
    let mut windows = Vec::new();
    for c in &report.configurations {
        for window in c.brakke.chunks(RADII.len()) {
            let v: Vec<f64> = window.iter().map(|b| b.c_emp).collect();
            pass &= spread(&v) < 3.0;
            windows.push(format!(
                "eps {} [{:.2}, {:.2}] {:.2}",
                c.environment.epsilon,
                window[0].test.t1,
                window[0].test.t2,
                spread(&v)
            ));
        }
    }
    let per_eps = observable(report, "c_emp_max");
    pass &= spread(&per_eps) < 3.0;
    verdict(
        pass,
        format!(
            "min weak margin {:.3e}; C_emp spread over r per window: {}; max C_emp per epsilon {} spread {:.2}",
            margin.iter().cloned().fold(f64::INFINITY, f64::min),
            windows.join(", "),
            sci(&per_eps),
            spread(&per_eps)
        ),
    )
}

fn c08_density() -> Verdict {
    let mut parts: Vec<String> = scenarios().iter().map(|x| format!("{} {:.3}", x.name, x.density_max)).collect();
    let mut worst = scenarios().iter().map(|x| x.density_max).fold(0.0, f64::max);
    for (name, report) in [("ball sweep", ball_sweep()), ("two_balls sweep", two_ball_sweep())] {
        let v = observable(report, "density_ratio_sup_max");
        worst = worst.max(v.iter().cloned().fold(0.0, f64::max));
        parts.push(format!("{name} {v:.3?}"));
    }
    verdict(worst <= 2.0, format!("max density ratio {worst:.3} ({})", parts.join(", ")))
}

fn c09_discrepancy() -> Verdict {
    let a = assertion(ball_sweep(), "xi_ratio");
    verdict(a.pass, format!("xi / E_S at t = 0.05 over epsilon 0.04, 0.02, 0.01: {}; {}", sci(&a.values), a.detail))
}

fn two_circle_error(eps: f64, n: usize) -> (f64, Option<f64>) {
    let region = two_balls();
    let system = CircleSystem::from_region(&region).unwrap();
    let probe = evolve_circles(&system, 1e-5, 0.2).unwrap();
    let t_ext = probe.extinctions.first().map_or(0.2, |e| e.t);
    let t_final = 0.6 * t_ext;
    let mut p = params(eps, n, t_final, Scheme::Explicit);
    let stride = ((0.1 * t_final / p.dt).round() as usize).max(1);
    p.record_stride = stride;
    let profile = build_phi0(&region, eps, p.grid).unwrap();
    let mut snaps = Vec::new();
    let mut obs = |s: &vpmcf::solver::PhaseState<f64>, _: &SolverParams<f64>| snaps.push((s.t, extract_interface(&s.phi)));
    run(&p, &profile, &mut [&mut obs]).unwrap();
    let oracle = evolve_circles(&system, 1e-5f64.min(0.5 * admissible(&system.radii)), p.t_final + p.dt).unwrap();
    let cmp = compare_phase_field(&snaps, &oracle, &system).unwrap();
    (cmp.max_error, cmp.event.map(|e| e.t))
}

fn c10_sharp_interface() -> Verdict {
    let h = 1.0 / 128.0;
    let ball = &scenarios()[0];
    let drift = ball.radii.iter().map(|&(_, r)| (r - 0.25).abs()).fold(0.0, f64::max);
    let end = ball.radii.last().map_or(f64::NAN, |x| x.1);
    let single = drift <= h && ball.radii.len() > 1;
    let (coarse, ev_c) = two_circle_error(0.02, 128);
    let (fine, ev_f) = two_circle_error(0.01, 256);
    let h_fine = 1.0 / 256.0;
    let two = ev_c.is_none() && ev_f.is_none() && fine <= 2.0 * h_fine && fine < coarse;
    verdict(
        single && two,
        format!(
            "single circle: max |R - 0.25| = {drift:.4} (h = {h:.4}), R(0.05) = {end:.4}; two circles: error {coarse:.4} at eps 0.02, {fine:.4} at eps 0.01 (2h = {:.4}), events {ev_c:?} {ev_f:?}",
            2.0 * h_fine
        ),
    )
}

fn c11_oracle() -> Verdict {
    let mut worst_area = 0.0f64;
    for radii in [[0.1, 0.2], [0.12, 0.2]] {
        let system = CircleSystem::new(radii.to_vec(), vec![[0.2, 0.5], [0.7, 0.5]]).unwrap();
        let a0 = system.area();
        let traj = evolve_circles(&system, 1e-5, 0.2).unwrap();
        let t_ext = traj.extinctions.first().map_or(f64::INFINITY, |e| e.t);
        for (t, r) in traj.times.iter().zip(&traj.radii) {
            if *t < t_ext {
                let a: f64 = r.iter().map(|x| std::f64::consts::PI * x * x).sum();
                worst_area = worst_area.max((a - a0).abs());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_flux = 0.0f64;
    for _ in 0..100 {
        let k = rng.gen_range(1..=6);
        let r: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..0.5)).collect();
        let flux: f64 = r.iter().zip(circle_rhs(&r)).map(|(a, b)| a * b).sum();
        worst_flux = worst_flux.max(flux.abs());
    }
    verdict(
        worst_area <= 1e-8 && worst_flux <= 1e-14,
        format!("max area drift {worst_area:.2e}, max |sum r r'| {worst_flux:.2e}"),
    )
}

fn c12_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let text = format!(
            "[solver]\ndim = 2\nn = 128\nepsilon = 0.02\nt_final = 0.005\n\n[region]\nkind = \"ball\"\ncenter = [0.5, 0.5]\nradius = 0.25\n\n[output]\ndir = {:?}\nrecord_stride = 20\n",
            out.display().to_string()
        );
        cmd_run(&parse_config(&text).unwrap()).unwrap();
        outputs.push(std::fs::read(out.join(DIAGNOSTICS_FILE)).unwrap());
    }
    verdict(
        outputs[0] == outputs[1] && !outputs[0].is_empty(),
        format!("{} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]),
    )
}

fn main() {
    let criteria: [(u32, &str, Check); 12] = [
        (1, "discrete calculus exactness", c01_discrete_calculus),
        (2, "well-prepared initial data", c02_well_prepared),
        (3, "energy dissipation", c03_dissipation),
        (4, "volume preservation", c04_volume),
        (5, "multiplier L2 bound", c05_lambda_l2),
        (6, "Brakke identity", c06_brakke_identity),
        (7, "weak Brakke inequality", c07_weak_brakke),
        (8, "density bound", c08_density),
        (9, "discrepancy trend", c09_discrepancy),
        (10, "sharp-interface agreement", c10_sharp_interface),
        (11, "oracle self-consistency", c11_oracle),
        (12, "determinism", c12_determinism),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let t0 = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {tag} {name} [{:.1}s]: {}", t0.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(id);
        }
    }
    println!("acceptance: {} of 12 passed in {:.0}s", 12 - failed.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
