use std::fmt::Write as _;
use std::path::PathBuf;

use nsv4_core::inequality::{
    clr_count, constants, deep_well_family, dimension_bound, rho_bound_nested, trace_chain_nested, ClrReport,
    ClrSpec, WellProfile,
};
use nsv4_core::solver::{
    check_dissipativity, checkpoint, contraction_check, measure_embedding_constant, rhs, Simulation,
};
use nsv4_core::spectral::{hminus1_norm, io, leray_project, RandomSpectrum};
use nsv4_core::tangent::{
    dense_jacobian, dimension_crossing, frame_trace, q_sweep, trace_routes, ModeBasis, TraceConfig,
};
use nsv4_core::{h1dot_inner, ForcingSpec, SolverConfig, SpectralVectorField, TangentFrame, WaveGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{num, CsvTable, RunDir, Status};

pub struct Outcome {
    pub status: Status,
    pub result: serde_json::Value,
    pub summary: String,
}

/// Options that are not part of the hashed configuration.
#[derive(Default)]
pub struct Extras {
    pub resume: Option<PathBuf>,
}

fn pass_fail(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

/// The configured initial condition: a field file, or a seeded random
/// solenoidal field scaled to `initial.h1_norm`.
fn initial_field(cfg: &RunConfig, grid: &WaveGrid, seed: u64) -> Result<SpectralVectorField, CliError> {
    if let Some(path) = &cfg.initial.file {
        return Ok(io::load_field(path, Some(grid))?);
    }
    let spec = RandomSpectrum {
        slope: cfg.initial.slope,
        ..Default::default()
    };
    let mut u = SpectralVectorField::random(grid, &mut rng(seed), &spec);
    u.normalize_h1(cfg.initial.h1_norm);
    if cfg.initial.h1_norm == 0.0 {
        u.scale(0.0);
    }
    Ok(u)
}

pub fn simulate(cfg: &RunConfig, extras: &Extras, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let solver = cfg.solver(10.0);
    let mut sim = match &extras.resume {
        Some(path) => Simulation::resume(path, &solver, Some(&grid))?,
        None => Simulation::new(&initial_field(cfg, &grid, cfg.seed)?, &solver)?,
    };
    let start_step = sim.step_index();
    let chunk = cfg.output.checkpoint_every.unwrap_or(u64::MAX).max(1);
    while !sim.is_finished() {
        sim.advance(chunk)?;
        if !sim.is_finished() {
            sim.save_checkpoint(&dir.path, Some(cfg.seed))?;
        }
    }
    let last = sim.save_checkpoint(&dir.path, Some(cfg.seed))?;
    let final_time = sim.time();
    let log = sim.finish();
    log.write_csv(dir.writer("trajectory.csv")?)?;

    let diss = check_dissipativity(&log, 1e-8, 1e-3);
    let max_residual = log.residual.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let final_enstrophy = log.enstrophy.last().copied().unwrap_or(log.initial_enstrophy);
    let result = json!({
        "start_step": start_step,
        "t_final": final_time,
        "samples": log.len(),
        "initial_enstrophy": log.initial_enstrophy,
        "final_enstrophy": final_enstrophy,
        "g_hminus1": log.g_hminus1,
        "max_abs_residual": max_residual,
        "dissipativity": to_value(&diss)?,
        "checkpoint": last.file_name().map(|s| s.to_string_lossy().into_owned()),
    });
    let summary = format!(
        "simulated to t = {final_time} ({} samples)\nenstrophy {:.6e} -> {final_enstrophy:.6e}\n\
         max energy residual {max_residual:.3e}\ndissipativity inequality: {} violations\n",
        log.len(),
        log.initial_enstrophy,
        diss.violations
    );
    Ok(Outcome {
        status: Status::Ok,
        result,
        summary,
    })
}

pub fn decay_test(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let solver = SolverConfig {
        forcing: ForcingSpec::Zero,
        ..cfg.solver(10.0)
    };
    let u0 = initial_field(cfg, &grid, cfg.seed)?;
    let log = Simulation::new(&u0, &solver)?.run()?;
    log.write_csv(dir.writer("trajectory.csv")?)?;
    let e0 = log.initial_enstrophy;
    if e0 == 0.0 {
        return Err(CliError::Config("decay test needs a nonzero initial field".into()));
    }
    let worst = log
        .times
        .iter()
        .zip(&log.enstrophy)
        .map(|(t, e)| (e - e0 * (-2.0 * solver.nu * t).exp()).abs() / e0)
        .fold(0.0, f64::max);
    let tol = cfg.checks.decay_tolerance;
    let ok = worst <= tol;
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "samples": log.len(),
            "initial_enstrophy": e0,
            "max_relative_error": worst,
            "tolerance": tol,
        }),
        summary: format!(
            "{} exact decay: max relative enstrophy error {worst:.3e} (tolerance {tol:.1e})\n",
            status_word(ok)
        ),
    })
}

pub fn steady_test(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let nu = cfg.solver.nu;
    let a = cfg.checks.shear_amplitude;
    let solver = SolverConfig {
        forcing: ForcingSpec::steady_shear(nu, a),
        ..cfg.solver(50.0 / nu)
    };
    let u_star = SpectralVectorField::shear(&grid, a, 0, 1);
    let mut sim = Simulation::new(&SpectralVectorField::zeros(&grid), &solver)?;
    sim.advance(u64::MAX)?;
    let distance = sim.state().sub(&u_star)?.h1_norm();
    let r = rhs(&u_star, sim.forcing(), nu)?;
    let rhs_norm = h1dot_inner(&r, &r)?.sqrt();
    sim.finish().write_csv(dir.writer("trajectory.csv")?)?;
    let ok = distance <= cfg.checks.steady_tolerance && rhs_norm <= cfg.checks.rhs_tolerance;
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "t_final": solver.t_final,
            "amplitude": a,
            "distance": distance,
            "rhs_norm": rhs_norm,
            "distance_tolerance": cfg.checks.steady_tolerance,
            "rhs_tolerance": cfg.checks.rhs_tolerance,
        }),
        summary: format!(
            "{} steady shear: ||grad(u(T) - u*)|| = {distance:.3e}, ||grad rhs(u*)|| = {rhs_norm:.3e}\n",
            status_word(ok)
        ),
    })
}

pub fn contraction_test(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let solver = cfg.solver(10.0);
    let c = measure_embedding_constant(
        &grid,
        &mut rng(cfg.seed),
        cfg.checks.embedding_probes.max(1),
        cfg.checks.embedding_ascent,
    )?;
    let mut table = CsvTable::new(&["trial", "max_ratio", "max_difference", "final_difference"]);
    let mut trials = Vec::new();
    let mut worst = 0.0_f64;
    for trial in 0..cfg.checks.trials as u64 {
        let base = cfg.seed.wrapping_add(1 + 2 * trial);
        let u1 = initial_field(cfg, &grid, base)?;
        let mut v = SpectralVectorField::random(&grid, &mut rng(base + 1), &RandomSpectrum::default());
        v.normalize_h1(cfg.checks.perturbation);
        let mut u2 = u1.clone();
        u2.axpy(1.0, &v)?;
        let report = contraction_check(&u1, &u2, &solver, c)?;
        let ratio = report.max_ratio().unwrap_or(0.0);
        let last = report.difference.last().copied().unwrap_or(0.0);
        worst = worst.max(ratio);
        table.push(vec![trial.to_string(), num(ratio), num(report.max_difference()), num(last)]);
        trials.push(json!({
            "trial": trial,
            "max_ratio": ratio,
            "max_difference": report.max_difference(),
            "final_difference": last,
        }));
    }
    if cfg.output.format == Format::Csv {
        table.write(dir, "contraction.csv", cfg.seed)?;
    }
    let ok = worst <= 1.0 + cfg.checks.contraction_tolerance;
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "embedding_constant": c,
            "perturbation": cfg.checks.perturbation,
            "worst_ratio": worst,
            "trials": trials,
        }),
        summary: format!(
            "{} contraction: {} pairs, embedding constant {c:.4}, worst Gronwall ratio {worst:.6}\n",
            status_word(ok),
            cfg.checks.trials
        ),
    })
}

pub fn trace(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let solver = cfg.solver(100.0);
    let config = TraceConfig {
        solver: solver.clone(),
        n_max: cfg.trace.n_max,
        reortho_every: cfg.trace.reortho_every,
        spin_up: cfg.trace.spin_up,
        check_every: cfg.trace.check_every,
        // The CSV form of the trace report is one row per sample.
        keep_samples: cfg.trace.keep_samples || cfg.output.format == Format::Csv,
        frame_seed: cfg.seed,
    };
    let u0 = initial_field(cfg, &grid, cfg.seed)?;
    let sweep = q_sweep(&u0, &config, None)?;
    let reports: Vec<_> = sweep
        .reports
        .iter()
        .filter(|r| r.n >= cfg.trace.n_min)
        .cloned()
        .collect();
    let json_reports: Vec<_> = reports
        .iter()
        .cloned()
        .map(|mut r| {
            if !cfg.trace.keep_samples {
                r.samples = None;
            }
            r
        })
        .collect();
    let crossing = dimension_crossing(&sweep.reports);
    let g = reports.first().map_or(0.0, |r| r.g_hminus1);
    let bound = dimension_bound(g, solver.nu, cfg.bound.l_const)?;

    if cfg.output.format == Format::Csv {
        let mut table = CsvTable::new(&["n", "nu", "g_hminus1", "T", "spin_up", "q_n", "bound_q_n", "bound_respected"]);
        for r in &reports {
            table.push(vec![
                r.n.to_string(),
                num(r.nu),
                num(r.g_hminus1),
                num(r.t_window),
                num(r.spin_up),
                num(r.q_n),
                num(r.bound_q_n),
                r.bound_respected.to_string(),
            ]);
            if r.samples.is_some() {
                r.write_samples_csv(dir.writer(&format!("samples_n{}.csv", r.n))?)?;
            }
        }
        table.write(dir, "trace.csv", cfg.seed)?;
    }

    let checks = &sweep.checks;
    let respected = reports.iter().all(|r| r.bound_respected);
    let ok = respected
        && checks.exact_link_failures == 0
        && checks.rho_link_failures == 0
        && checks.trace_bound_failures == 0;
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(
            summary,
            "n = {:>2}  q(n) = {:>12.6}  bound {:>12.6}  {}",
            r.n,
            r.q_n,
            r.bound_q_n,
            if r.bound_respected { "ok" } else { "EXCEEDED" }
        );
    }
    let _ = writeln!(
        summary,
        "{} trace: crossing {crossing:?}, dimension bound {:.6}, {} chain checks",
        status_word(ok),
        bound.bound_exact,
        checks.checks
    );
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "reports": to_value(&json_reports)?,
            "crossing": to_value(&crossing)?,
            "monotone": sweep.monotone,
            "checks": to_value(checks)?,
            "dimension_bound": to_value(&bound)?,
        }),
        summary,
    })
}

pub fn rho_check(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let l = cfg.bound.l_const;
    let mut r = rng(cfg.seed);
    let mut table = CsvTable::new(&["trial", "n", "rho_l2", "bound", "ratio", "parseval_defect"]);
    let (mut worst, mut worst_at) = (0.0_f64, (0, 0));
    let mut max_parseval = 0.0_f64;
    for trial in 0..cfg.checks.trials {
        let frame = TangentFrame::random(&grid, cfg.trace.n_max, &mut r, &RandomSpectrum::default())?;
        for rep in rho_bound_nested(&frame, l)? {
            if rep.n < cfg.trace.n_min {
                continue;
            }
            if rep.ratio > worst {
                worst = rep.ratio;
                worst_at = (trial, rep.n);
            }
            max_parseval = max_parseval.max(rep.parseval_defect.abs());
            table.push(vec![
                trial.to_string(),
                rep.n.to_string(),
                num(rep.rho_l2),
                num(rep.bound),
                num(rep.ratio),
                num(rep.parseval_defect),
            ]);
        }
    }
    if cfg.output.format == Format::Csv {
        table.write(dir, "rho.csv", cfg.seed)?;
    }
    let ok = worst <= 1.0;
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "trials": cfg.checks.trials,
            "n_min": cfg.trace.n_min,
            "n_max": cfg.trace.n_max,
            "l_const": l,
            "worst_ratio": worst,
            "worst_trial": worst_at.0,
            "worst_n": worst_at.1,
            "max_parseval_defect": max_parseval,
        }),
        summary: format!(
            "{} rho bound: {} frames, worst ||rho||/bound = {worst:.4} (trial {}, n = {})\n",
            status_word(ok),
            cfg.checks.trials,
            worst_at.0,
            worst_at.1
        ),
    })
}

fn clr_row(r: &ClrReport) -> Vec<String> {
    let (kind, depth, radius) = match r.spec.profile {
        WellProfile::Zero => ("zero", 0.0, 0.0),
        WellProfile::Square { depth, radius } => ("square", depth, radius),
        WellProfile::Gaussian { depth, radius } => ("gaussian", depth, radius),
    };
    vec![
        kind.to_string(),
        num(depth),
        num(radius),
        num(r.spec.box_length),
        r.spec.points.to_string(),
        r.negative_count.to_string(),
        num(r.integral_v2),
        num(r.bound),
        num(r.ratio),
        r.holds.to_string(),
    ]
}

pub fn clr_check(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let l = cfg.bound.l_const;
    let free = ClrSpec {
        profile: WellProfile::Zero,
        box_length: 8.0,
        points: 64,
    };
    let mut specs = vec![free];
    match cfg.clr.potential {
        Some(spec) => specs.push(spec),
        None => specs.extend(deep_well_family()),
    }
    let reports = specs.iter().map(|s| clr_count(s, l)).collect::<Result<Vec<_>, _>>()?;
    if cfg.output.format == Format::Csv {
        let mut table = CsvTable::new(&[
            "profile",
            "depth",
            "radius",
            "box_length",
            "points",
            "negative_count",
            "integral_v2",
            "bound",
            "ratio",
            "holds",
        ]);
        for r in &reports {
            table.push(clr_row(r));
        }
        table.write(dir, "clr.csv", cfg.seed)?;
    }
    let worst = reports.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let ok = reports[0].negative_count == 0 && reports.iter().all(|r| r.holds);
    Ok(Outcome {
        status: pass_fail(ok),
        result: json!({
            "l_const": l,
            "worst_ratio": worst,
            "reports": to_value(&reports)?,
        }),
        summary: format!(
            "{} CLR: {} potentials, worst count/bound {worst:.4}\n",
            status_word(ok),
            reports.len()
        ),
    })
}

pub fn bound(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = match cfg.bound.g_norm {
        Some(g) => g,
        None => hminus1_norm(&cfg.solver.forcing.build(&cfg.grid()?)?)?,
    };
    let report = dimension_bound(g, cfg.solver.nu, cfg.bound.l_const)?;
    let table = constants(4)?;
    let summary = format!(
        "||g||_H^-1 = {g}, nu = {}\ndimension bound 12 L |g|^2/nu^4 = {:.6}\nrounded 0.23 |g|^2/nu^4 = {:.6}\n",
        cfg.solver.nu, report.bound_exact, report.bound_rounded
    );
    let mut result = to_value(&report)?;
    result["constants"] = to_value(&table)?;
    Ok(Outcome {
        status: Status::Ok,
        result,
        summary,
    })
}

struct Suite {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn suite(name: &'static str, f: impl FnOnce() -> Result<(bool, String), CliError>) -> Suite {
    match f() {
        Ok((pass, detail)) => Suite { name, pass, detail },
        Err(e) => Suite {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Fast versions of every invariant check on an `8^4` grid.
pub fn selftest(cfg: &RunConfig, dir: &RunDir) -> Result<Outcome, CliError> {
    let seed = cfg.seed;
    let grid = WaveGrid::new(8, 2.0 * std::f64::consts::PI)?;
    let l = cfg.bound.l_const;
    let mut suites = Vec::new();

    suites.push(suite("constants", || {
        let t = constants(4)?;
        let lu = t.l_upper.as_ref().map_or(f64::NAN, |c| c.value);
        let ok = (t.c_d.value - 0.75f64.sqrt()).abs() < 1e-15
            && t.l_cl.value < lu
            && (0.2290..=0.2295).contains(&(12.0 * lu));
        Ok((ok, format!("c4 = {:.6}, 12 L_upper = {:.6}", t.c_d.value, 12.0 * lu)))
    }));

    suites.push(suite("leray", || {
        let spec = RandomSpectrum {
            retained_only: false,
            solenoidal: false,
            ..Default::default()
        };
        let mut r = rng(seed);
        let mut worst = 0.0_f64;
        for _ in 0..100 {
            let f = SpectralVectorField::random(&grid, &mut r, &spec);
            let p = leray_project(&f);
            let pp = leray_project(&p);
            worst = worst.max(pp.sub(&p)?.l2_norm() / p.l2_norm()).max(p.divergence_defect());
        }
        Ok((worst <= 1e-12, format!("100 fields, worst defect {worst:.2e}")))
    }));

    suites.push(suite("decay", || {
        let solver = SolverConfig {
            nu: 0.5,
            dt: 1e-2,
            t_final: 1.0,
            forcing: ForcingSpec::Zero,
            save_every: 1,
        };
        let mut u0 = SpectralVectorField::random(&grid, &mut rng(seed), &RandomSpectrum::default());
        u0.normalize_h1(10.0);
        let log = Simulation::new(&u0, &solver)?.run()?;
        let e0 = log.initial_enstrophy;
        let worst = log
            .times
            .iter()
            .zip(&log.enstrophy)
            .map(|(t, e)| (e - e0 * (-t).exp()).abs() / e0)
            .fold(0.0, f64::max);
        Ok((worst <= 1e-6, format!("max relative error {worst:.2e}")))
    }));

    suites.push(suite("steady-shear", || {
        let nu = 1.0;
        let solver = SolverConfig {
            nu,
            dt: 0.05,
            t_final: 50.0,
            forcing: ForcingSpec::steady_shear(nu, 1.0),
            save_every: 100,
        };
        let u_star = SpectralVectorField::shear(&grid, 1.0, 0, 1);
        let mut sim = Simulation::new(&SpectralVectorField::zeros(&grid), &solver)?;
        sim.advance(u64::MAX)?;
        let d = sim.state().sub(&u_star)?.h1_norm();
        Ok((d <= 1e-8, format!("distance {d:.2e}")))
    }));

    suites.push(suite("checkpoint", || {
        let solver = SolverConfig {
            t_final: 0.05,
            ..SolverConfig::default()
        };
        let mut u0 = SpectralVectorField::random(&grid, &mut rng(seed), &RandomSpectrum::default());
        u0.normalize_h1(5.0);
        let mut sim = Simulation::new(&u0, &solver)?;
        sim.advance(u64::MAX)?;
        let path = sim.save_checkpoint(&dir.path, Some(seed))?;
        let (back, meta) = checkpoint::load(&path, Some(&grid))?;
        let same = (0..4).all(|c| {
            sim.state()
                .component(c)
                .iter()
                .zip(back.component(c))
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
        });
        std::fs::remove_file(&path)?;
        std::fs::remove_file(checkpoint::sidecar_path(&path))?;
        Ok((same && meta.config_hash == solver.hash(), format!("bit-exact {same}, step {}", meta.step)))
    }));

    suites.push(suite("trace-oracle", || {
        let mut r = rng(seed);
        let mut u = SpectralVectorField::random(&grid, &mut r, &RandomSpectrum::default());
        u.normalize_h1(10.0);
        let frame = TangentFrame::random(&grid, 3, &mut r, &RandomSpectrum::default())?;
        let routes = trace_routes(&u, &frame, 0.5)?;
        let basis = ModeBasis::new(&grid);
        let oracle = frame_trace(&dense_jacobian(&u, 0.5, &basis)?, &basis, &frame)?;
        let gap = (routes.definition - oracle).abs() / oracle.abs();
        Ok((
            routes.relative_gap() <= 1e-10 && gap <= 1e-8,
            format!("route gap {:.2e}, oracle gap {gap:.2e}", routes.relative_gap()),
        ))
    }));

    suites.push(suite("frame-inequalities", || {
        let mut r = rng(seed);
        let c4 = constants(4)?.c_d.value;
        let (mut worst_rho, mut failures) = (0.0_f64, 0);
        for _ in 0..10 {
            let frame = TangentFrame::random(&grid, 8, &mut r, &RandomSpectrum::default())?;
            let mut u = SpectralVectorField::random(&grid, &mut r, &RandomSpectrum::default());
            u.normalize_h1(10.0);
            for rep in rho_bound_nested(&frame, l)? {
                worst_rho = worst_rho.max(rep.ratio);
            }
            failures += trace_chain_nested(&u, &frame, c4, l)?
                .iter()
                .filter(|s| !s.exact_links_hold() || !s.rho_link_holds())
                .count();
        }
        Ok((
            worst_rho <= 1.0 && failures == 0,
            format!("worst rho ratio {worst_rho:.4}, chain failures {failures}"),
        ))
    }));

    suites.push(suite("clr", || {
        let free = clr_count(
            &ClrSpec {
                profile: WellProfile::Zero,
                box_length: 8.0,
                points: 32,
            },
            l,
        )?;
        let well = clr_count(
            &ClrSpec {
                profile: WellProfile::Square {
                    depth: 80.0,
                    radius: 1.0,
                },
                box_length: 8.0,
                points: 64,
            },
            l,
        )?;
        Ok((
            free.negative_count == 0 && well.holds,
            format!("free count {}, well count {} vs bound {:.1}", free.negative_count, well.negative_count, well.bound),
        ))
    }));

    let ok = suites.iter().all(|s| s.pass);
    let mut summary = String::new();
    for s in &suites {
        let _ = writeln!(summary, "{} {}: {}", status_word(s.pass), s.name, s.detail);
    }
    let result = json!({
        "suites": suites
            .iter()
            .map(|s| json!({"name": s.name, "pass": s.pass, "detail": s.detail}))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome {
        status: pass_fail(ok),
        result,
        summary,
    })
}

fn status_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
