//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! `ACCEPTANCE_ONLY=2,7` restricts the run to the listed criteria.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nsv4_core::inequality::{
    clr_count, constants, deep_well_family, dimension_bound, l_upper_4d, q_bound, rho_bound_nested, ClrSpec,
    WellProfile,
};
use nsv4_core::solver::{
    check_dissipativity, contraction_check, energy_residual, measure_embedding_constant, rhs, simulate,
    ForcingSpec, Simulation, SolverConfig,
};
use nsv4_core::spectral::{h1dot_inner, Complex64, leray_project, RandomSpectrum, SpectralVectorField, WaveGrid};
use nsv4_core::tangent::{
    dense_jacobian, dimension_crossing, frame_trace, q_sweep, trace_routes, Crossing, ModeBasis,
    TangentFrame, TraceConfig,
};
use nsv4_core::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn torus(n: usize) -> WaveGrid {
    WaveGrid::new(n, 2.0 * PI).expect("valid grid")
}

fn random_field(grid: &WaveGrid, seed: u64, h1: f64) -> SpectralVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralVectorField::random(grid, &mut rng, &RandomSpectrum::default());
    u.normalize_h1(h1);
    u
}

fn relative_l2(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
    let d = a.sub(b).expect("same grid").l2_norm();
    let s = a.l2_norm().max(b.l2_norm());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn c1_constant_chain() -> Result<Outcome> {
    let table = constants(4)?;
    let l = table.l_upper.as_ref().expect("d = 4 carries L_upper").value;
    let twelve_l = 12.0 * l;
    let chain_ok = (0.2290..=0.2295).contains(&twelve_l) && twelve_l <= 0.23;

    let out = Command::new(env!("CARGO_BIN_EXE_nsv4"))
        .args(["bound", "--g-norm", "1.0", "--nu", "1.0", "--print", "--out"])
        .arg(std::env::temp_dir().join("nsv4-acceptance"))
        .output()
        .expect("nsv4 binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let report: serde_json::Value = match serde_json::from_str(&stdout) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("bound output is not JSON: {e}")),
    };
    let result = &report["result"];
    let exact = result["bound_exact"].as_f64().unwrap_or(f64::NAN);
    let rounded = result["bound_rounded"].as_f64().unwrap_or(f64::NAN);
    let cli_ok = out.status.success() && rounded == 0.23 && (exact - twelve_l).abs() < 1e-15 && exact <= rounded;
    outcome(
        chain_ok && cli_ok,
        format!("12*L = {twelve_l:.6}; bound subcommand: exact {exact:.6}, rounded {rounded}"),
    )
}

fn c2_exact_decay() -> Result<Outcome> {
    let grid = torus(16);
    let u0 = random_field(&grid, 2, 40.0);
    let config = SolverConfig {
        nu: 0.5,
        dt: 1e-2,
        t_final: 10.0,
        forcing: ForcingSpec::Zero,
        save_every: 1,
    };
    let log = simulate(&u0, &config)?;
    let e0 = log.initial_enstrophy;
    let worst = log
        .times
        .iter()
        .zip(&log.enstrophy)
        .map(|(t, e)| (e - e0 * (-2.0 * config.nu * t).exp()).abs() / e0)
        .fold(0.0, f64::max);
    outcome(worst <= 1e-6, format!("16^4, {} samples, max relative error {worst:.3e}", log.len()))
}

fn c3_dissipativity() -> Result<Outcome> {
    let grid = torus(8);
    let (nu, g): (f64, f64) = (0.5, 1.0);
    let u0 = random_field(&grid, 3, (10.0 * g * g / (nu * nu)).sqrt());
    let config = SolverConfig {
        nu,
        dt: 1e-2,
        t_final: 40.0,
        forcing: ForcingSpec::RandomLowMode {
            k_max: 2.0,
            hminus1_norm: g,
            seed: 3,
        },
        save_every: 1,
    };
    let log = simulate(&u0, &config)?;
    let report = check_dissipativity(&log, 1e-8, 1e-3);
    let entered = report.entered_at.is_some();
    outcome(
        report.violations == 0 && entered && report.late_exits == 0,
        format!(
            "{} samples, {} violations, worst excess {:.3e}, entered ball at {:?} (predicted {:.2}), {} late exits",
            report.samples, report.violations, report.worst_excess, report.entered_at, report.predicted_entry,
            report.late_exits
        ),
    )
}

fn c4_residual_order() -> Result<Outcome> {
    let grid = torus(8);
    let u0 = random_field(&grid, 4, 20.0);
    let run = |dt: f64| -> Result<f64> {
        let config = SolverConfig {
            nu: 0.5,
            dt,
            t_final: 2.0,
            forcing: ForcingSpec::RandomLowMode {
                k_max: 2.0,
                hminus1_norm: 1.0,
                seed: 4,
            },
            save_every: 1,
        };
        let log = simulate(&u0, &config)?;
        let r = energy_residual(&log, config.nu)?;
        Ok(r.iter().map(|x| x.abs()).fold(0.0, f64::max))
    };
    let coarse = run(1e-2)?;
    let fine = run(5e-3)?;
    let factor = coarse / fine;
    outcome(
        (12.0..=20.0).contains(&factor),
        format!("max residual {coarse:.3e} -> {fine:.3e}, factor {factor:.2}"),
    )
}

fn gradient_field(grid: &WaveGrid, seed: u64) -> Result<SpectralVectorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomSpectrum {
        retained_only: false,
        solenoidal: false,
        ..Default::default()
    };
    let phi = SpectralVectorField::random(grid, &mut rng, &spec);
    let phi = phi.component(0);
    let coeffs = std::array::from_fn(|j| {
        (0..grid.len())
            .map(|s| Complex64::new(0.0, grid.kappa(s)[j]) * phi[s])
            .collect()
    });
    SpectralVectorField::from_coeffs(grid, coeffs)
}

fn c5_leray_suite() -> Result<Outcome> {
    let grid = torus(8);
    let spec = RandomSpectrum {
        retained_only: false,
        solenoidal: false,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut idem, mut grad, mut div) = (0.0_f64, 0.0_f64, 0.0_f64);
    for trial in 0..1000u64 {
        let f = SpectralVectorField::random(&grid, &mut rng, &spec);
        let p = leray_project(&f);
        idem = idem.max(relative_l2(&leray_project(&p), &p));
        div = div.max(p.divergence_defect());
        let gphi = gradient_field(&grid, 10_000 + trial)?;
        grad = grad.max(leray_project(&gphi).l2_norm() / gphi.l2_norm());
    }
    outcome(
        idem <= 1e-12 && grad <= 1e-12 && div <= 1e-12,
        format!("1000 fields: idempotence {idem:.2e}, gradient residue {grad:.2e}, divergence {div:.2e}"),
    )
}

fn c6_contraction() -> Result<Outcome> {
    let grid = torus(8);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = measure_embedding_constant(&grid, &mut rng, 8, 20)?;
    let config = SolverConfig {
        nu: 0.5,
        dt: 1e-2,
        t_final: 10.0,
        forcing: ForcingSpec::default(),
        save_every: 1,
    };
    let mut worst = 0.0_f64;
    for seed in 0..10u64 {
        let u1 = random_field(&grid, 600 + seed, 5.0);
        let v = random_field(&grid, 700 + seed, 1e-4);
        let mut u2 = u1.clone();
        u2.axpy(1.0, &v)?;
        let report = contraction_check(&u1, &u2, &config, c)?;
        worst = worst.max(report.max_ratio().unwrap_or(f64::INFINITY));
    }
    outcome(
        worst <= 1.0 + 1e-6,
        format!("10 seeds, embedding constant {c:.4}, worst Gronwall ratio {worst:.6}"),
    )
}

fn c7_trace_oracle() -> Result<Outcome> {
    let grid = torus(8);
    let basis = ModeBasis::new(&grid);
    let nu = 0.5;
    let (mut route_gap, mut oracle_gap) = (0.0_f64, 0.0_f64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for sample in 0..20u64 {
        let u = random_field(&grid, 7_000 + sample, 10.0);
        let n = 1 + (sample as usize % 4);
        let frame = TangentFrame::random(&grid, n, &mut rng, &RandomSpectrum::default())?;
        let routes = trace_routes(&u, &frame, nu)?;
        route_gap = route_gap.max(routes.relative_gap());
        let jac = dense_jacobian(&u, nu, &basis)?;
        let oracle = frame_trace(&jac, &basis, &frame)?;
        oracle_gap = oracle_gap.max((routes.definition - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE));
    }
    outcome(
        route_gap <= 1e-10 && oracle_gap <= 1e-8,
        format!("20 samples on 8^4: route gap {route_gap:.2e}, oracle gap {oracle_gap:.2e}"),
    )
}

fn c8_q_bound() -> Result<Outcome> {
    let grid = torus(8);
    let (nu, g) = (1.0, 1.0);
    let solver = SolverConfig {
        nu,
        dt: 0.05,
        t_final: 100.0,
        forcing: ForcingSpec::RandomLowMode {
            k_max: 2.0,
            hminus1_norm: g,
            seed: 8,
        },
        save_every: 1,
    };
    let config = TraceConfig {
        spin_up: Some(20.0),
        check_every: 50,
        frame_seed: 8,
        ..TraceConfig::new(solver, 8)
    };
    let u0 = random_field(&grid, 8, 1.0);
    let sweep = q_sweep(&u0, &config, None)?;
    let l = l_upper_4d();
    let within = sweep
        .reports
        .iter()
        .all(|r| r.bound_respected && r.q_n <= q_bound(r.n, nu, g, l) + 1e-8 * r.bound_q_n.abs().max(1.0));
    let limit = dimension_bound(g, nu, l)?.bound_exact.ceil() as usize + 1;
    let crossing = dimension_crossing(&sweep.reports);
    let crossing_ok = matches!(crossing, Crossing::At(n) if n <= limit);
    let checks = &sweep.checks;
    let checks_ok = checks.exact_link_failures == 0 && checks.rho_link_failures == 0 && checks.trace_bound_failures == 0;
    let q: Vec<String> = sweep.reports.iter().map(|r| format!("{:.4}", r.q_n)).collect();
    outcome(
        within && crossing_ok && checks_ok,
        format!(
            "q(1..8) = [{}]; crossing {crossing:?} (limit {limit}); {} chain checks, route gap {:.1e}",
            q.join(", "),
            checks.checks,
            checks.max_route_gap
        ),
    )
}

fn c9_rho_bound() -> Result<Outcome> {
    let grid = torus(16);
    let l = l_upper_4d();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0_f64;
    let mut worst_n = 0;
    for _ in 0..100 {
        let frame = TangentFrame::random(&grid, 8, &mut rng, &RandomSpectrum::default())?;
        for r in rho_bound_nested(&frame, l)? {
            if r.ratio > worst {
                worst = r.ratio;
                worst_n = r.n;
            }
        }
    }
    outcome(
        worst <= 1.0,
        format!("100 frames on 16^4, worst ||rho||/bound = {worst:.4} at n = {worst_n}"),
    )
}

fn c10_steady_shear() -> Result<Outcome> {
    let grid = torus(8);
    let (nu, a) = (0.5, 1.0);
    let config = SolverConfig {
        nu,
        dt: 0.02,
        t_final: 50.0 / nu,
        forcing: ForcingSpec::steady_shear(nu, a),
        save_every: 100,
    };
    let u_star = SpectralVectorField::shear(&grid, a, 0, 1);
    let mut sim = Simulation::new(&SpectralVectorField::zeros(&grid), &config)?;
    sim.advance(u64::MAX)?;
    let err = sim.state().sub(&u_star)?.h1_norm();
    let r = rhs(&u_star, sim.forcing(), nu)?;
    let residual = h1dot_inner(&r, &r)?.sqrt();
    outcome(
        err <= 1e-8 && residual <= 1e-12,
        format!("||grad(u(T) - u*)|| = {err:.2e} at T = {}, ||grad rhs(u*)|| = {residual:.2e}", config.t_final),
    )
}

fn c11_clr() -> Result<Outcome> {
    let l = l_upper_4d();
    let free = clr_count(
        &ClrSpec {
            profile: WellProfile::Zero,
            box_length: 8.0,
            points: 64,
        },
        l,
    )?;
    let mut worst = 0.0_f64;
    let mut failures = 0;
    let mut largest = 0;
    for spec in deep_well_family() {
        let r = clr_count(&spec, l)?;
        worst = worst.max(r.ratio);
        largest = largest.max(r.negative_count);
        if !r.holds {
            failures += 1;
        }
    }
    outcome(
        free.negative_count == 0 && failures == 0,
        format!(
            "V = 0 count {}; 12 deep wells, largest count {largest}, worst count/bound {worst:.4}",
            free.negative_count
        ),
    )
}

type Criterion = (usize, &'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "constant chain and bound subcommand", c1_constant_chain),
        (2, "exact energy decay without forcing", c2_exact_decay),
        (3, "dissipativity and absorbing ball", c3_dissipativity),
        (4, "fourth-order energy residual", c4_residual_order),
        (5, "Leray projector suite", c5_leray_suite),
        (6, "contraction of nearby solutions", c6_contraction),
        (7, "trace routes and dense-Jacobian oracle", c7_trace_oracle),
        (8, "q(n) bound and dimension crossing", c8_q_bound),
        (9, "rho bound on random frames", c9_rho_bound),
        (10, "steady shear fixed point", c10_steady_shear),
        (11, "CLR eigenvalue counts", c11_clr),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} ({name}): {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
