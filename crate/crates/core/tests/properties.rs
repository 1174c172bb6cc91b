use std::f64::consts::PI;

use nsv4_core::inequality::{
    constants, l_upper_4d, matrix_bound_check, rho_bound, rho_bound_nested, trace_chain_nested,
};
use nsv4_core::solver::{checkpoint, Simulation};
use nsv4_core::spectral::{io, RandomSpectrum};
use nsv4_core::tangent::orthonormalize;
use nsv4_core::{
    h1dot_inner, leray_project, nonlinear_term, ForcingSpec, SolverConfig, SpectralVectorField, TangentFrame,
    WaveGrid,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn torus() -> WaveGrid {
    WaveGrid::new(8, 2.0 * PI).unwrap()
}

fn field(seed: u64, slope: f64, solenoidal: bool) -> SpectralVectorField {
    let spec = RandomSpectrum {
        slope,
        retained_only: solenoidal,
        solenoidal,
        ..Default::default()
    };
    SpectralVectorField::random(&torus(), &mut ChaCha8Rng::seed_from_u64(seed), &spec)
}

fn same_bits(a: &SpectralVectorField, b: &SpectralVectorField) -> bool {
    (0..4).all(|c| {
        a.component(c)
            .iter()
            .zip(b.component(c))
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_is_idempotent_and_solenoidal(seed in any::<u64>(), slope in 0.0..3.0f64) {
        let f = field(seed, slope, false);
        let p = leray_project(&f);
        let pp = leray_project(&p);
        prop_assert!(pp.sub(&p).unwrap().l2_norm() <= 1e-14 * p.l2_norm());
        prop_assert!(p.divergence_defect() <= 1e-12);
        prop_assert_eq!(p.hermitian_defect(), 0.0);
        // Orthogonal projection: (f - Pf, Pf) = 0.
        let r = f.sub(&p).unwrap();
        prop_assert!(r.l2_inner(&p).unwrap().abs() <= 1e-12 * f.l2_norm().powi(2));
    }

    #[test]
    fn h1_inner_product_axioms(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0..3.0f64) {
        let (u, v, w) = (field(s1, 1.0, true), field(s2, 1.0, true), field(s1 ^ s2 ^ 1, 2.0, true));
        let uv = h1dot_inner(&u, &v).unwrap();
        prop_assert_eq!(uv, h1dot_inner(&v, &u).unwrap());
        prop_assert!(h1dot_inner(&u, &u).unwrap() > 0.0);
        let lhs = h1dot_inner(&SpectralVectorField::lincomb(a, &u, 1.0, &w).unwrap(), &v).unwrap();
        let rhs = a * uv + h1dot_inner(&w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (u.h1_norm() * v.h1_norm() * a.abs() + w.h1_norm() * v.h1_norm()));
        prop_assert!(uv.abs() <= u.h1_norm() * v.h1_norm() * (1.0 + 1e-14));
    }

    #[test]
    fn nonlinear_term_keeps_reality_and_energy(seed in any::<u64>(), amp in 0.1..50.0f64) {
        let mut u = field(seed, 1.0, true);
        u.normalize_h1(amp);
        let n = nonlinear_term(&u).unwrap();
        prop_assert_eq!(n.hermitian_defect(), 0.0);
        prop_assert!(n.l2_inner(&u).unwrap().abs() <= 1e-12 * n.l2_norm() * u.l2_norm());
    }

    #[test]
    fn pointwise_matrix_bound(entries in prop::array::uniform16(-5.0..5.0f64), v in prop::array::uniform4(-1.0..1.0f64)) {
        let mut a = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = entries[4 * i + j];
            }
        }
        let tr: f64 = (0..4).map(|i| a[i][i]).sum::<f64>() / 4.0;
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= tr;
        }
        let c4 = constants(4).unwrap().c_d.value;
        prop_assert!(matrix_bound_check(&a, &v).unwrap() <= c4 + 1e-12);
    }

    #[test]
    fn field_file_round_trip(seed in any::<u64>()) {
        let u = field(seed, 1.0, true);
        let mut buf = Vec::new();
        io::write_field(&u, &mut buf).unwrap();
        let back = io::read_field(buf.as_slice(), None).unwrap();
        prop_assert!(same_bits(&u, &back));
        prop_assert_eq!(back.grid().box_length(), u.grid().box_length());
    }

    #[test]
    fn orthonormalized_frames_are_orthonormal(seed in any::<u64>(), n in 1usize..9) {
        let grid = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = TangentFrame::random(&grid, n, &mut rng, &RandomSpectrum::default()).unwrap();
        prop_assert!(frame.gram_deviation().unwrap() <= 1e-12);
        let scaled = orthonormalize(&frame.scaled(7.0)).unwrap();
        for (a, b) in scaled.fields().iter().zip(frame.fields()) {
            prop_assert!(a.sub(b).unwrap().h1_norm() <= 1e-12);
        }
    }
}

#[test]
fn matrix_bound_examples() {
    let zero = [[0.0; 4]; 4];
    assert_eq!(matrix_bound_check(&zero, &[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
    let not_trace_free = [[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0; 4]];
    assert!(matrix_bound_check(&not_trace_free, &[1.0, 0.0, 0.0, 0.0]).is_err());
}

/// The aggregate form used by the trace estimate,
/// `sum_i ((v_i . grad) u, v_i) <= c4 int rho |grad u|`, together with the
/// rest of the chain, over 100 random frames and flows.
#[test]
fn aggregate_matrix_bound_over_random_frames() {
    let grid = torus();
    let c4 = constants(4).unwrap().c_d.value;
    let l = l_upper_4d();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..100 {
        let spec = RandomSpectrum {
            slope: (trial % 4) as f64,
            ..Default::default()
        };
        let frame = TangentFrame::random(&grid, 1 + trial % 8, &mut rng, &spec).unwrap();
        let mut u = SpectralVectorField::random(&grid, &mut rng, &RandomSpectrum::default());
        u.normalize_h1(1.0 + trial as f64);
        for s in trace_chain_nested(&u, &frame, c4, l).unwrap() {
            assert!(s.exact_links_hold(), "trial {trial}: {s:?}");
            assert!(s.rho_link_holds(), "trial {trial}: {s:?}");
            worst = worst.max(s.advection / s.weighted);
        }
    }
    assert!(worst <= 1.0);
}

#[test]
fn rho_parseval_and_scaling() {
    let grid = torus();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let frame = TangentFrame::random(&grid, 8, &mut rng, &RandomSpectrum::default()).unwrap();
    for r in rho_bound_nested(&frame, l_upper_4d()).unwrap() {
        let l2: f64 = frame.fields()[..r.n].iter().map(|v| v.l2_norm().powi(2)).sum();
        assert!(r.parseval_defect.abs() <= 1e-12 * l2);
        assert!(r.ratio <= 1.0);
    }
    for n in [1, 2, 3, 5] {
        let ratio = rho_bound(2 * n, l_upper_4d()) / rho_bound(n, l_upper_4d());
        assert!((ratio - 2f64.sqrt()).abs() <= 1e-15);
    }
    assert!((rho_bound(1, l_upper_4d()) - 0.5530).abs() < 5e-4);
    assert!(rho_bound_nested(&TangentFrame::new(Vec::new()).unwrap(), l_upper_4d())
        .unwrap()
        .is_empty());
}

#[test]
fn unit_ball_constants_match_closed_forms() {
    let balls = [
        (3, 4.0 * PI / 3.0),
        (4, PI * PI / 2.0),
        (5, 8.0 * PI * PI / 15.0),
        (6, PI.powi(3) / 6.0),
        (8, PI.powi(4) / 24.0),
    ];
    let mut prev_c = 0.0;
    for (d, omega) in balls {
        let t = constants(d).unwrap();
        let l_cl = omega / (2.0 * PI).powi(d as i32);
        assert!((t.l_cl.value - l_cl).abs() <= 1e-12 * l_cl, "d = {d}");
        assert!(t.c_d.value > prev_c && t.c_d.value < 1.0);
        prev_c = t.c_d.value;
    }
    assert!((constants(3).unwrap().c_d.value - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    assert!(constants(2).is_err());
    let twelve_l = 12.0 * l_upper_4d();
    assert!(twelve_l <= 0.23 && 0.23 - twelve_l > 6e-4 && 0.23 - twelve_l < 8e-4);
}

fn forced_config(t_final: f64) -> SolverConfig {
    SolverConfig {
        nu: 0.5,
        dt: 0.01,
        t_final,
        forcing: ForcingSpec::RandomLowMode {
            k_max: 2.0,
            hminus1_norm: 1.0,
            seed: 9,
        },
        save_every: 1,
    }
}

#[test]
fn checkpoint_restart_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut u0 = field(31, 1.0, true);
    u0.normalize_h1(8.0);
    let config = forced_config(0.4);

    let mut straight = Simulation::new(&u0, &config).unwrap();
    straight.advance(u64::MAX).unwrap();

    let mut first = Simulation::new(&u0, &config).unwrap();
    first.advance(17).unwrap();
    let path = first.save_checkpoint(dir.path(), Some(31)).unwrap();
    let (saved, meta) = checkpoint::load(&path, None).unwrap();
    assert!(same_bits(&saved, first.state()));
    assert_eq!((meta.step, meta.seed), (17, Some(31)));
    assert_eq!(meta.config_hash, config.hash());

    let mut resumed = Simulation::resume(&path, &config, None).unwrap();
    resumed.advance(u64::MAX).unwrap();
    assert_eq!(resumed.step_index(), straight.step_index());
    assert!(same_bits(resumed.state(), straight.state()));

    let other = SolverConfig { nu: 0.6, ..config };
    assert!(Simulation::resume(&path, &other, None).is_err());
}

#[test]
fn evolution_is_a_semigroup() {
    let mut u0 = field(41, 1.0, true);
    u0.normalize_h1(8.0);
    let mut whole = Simulation::new(&u0, &forced_config(0.3)).unwrap();
    whole.advance(u64::MAX).unwrap();

    let mut a = Simulation::new(&u0, &forced_config(0.1)).unwrap();
    a.advance(u64::MAX).unwrap();
    let mut b = Simulation::new(a.state(), &forced_config(0.2)).unwrap();
    b.advance(u64::MAX).unwrap();
    assert!(same_bits(whole.state(), b.state()));
}

#[test]
fn trajectory_csv_schema() {
    let mut u0 = field(5, 1.0, true);
    u0.normalize_h1(3.0);
    let log = Simulation::new(&u0, &forced_config(0.05)).unwrap().run().unwrap();
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,enstrophy,g_dot_u,residual,bound_rhs"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for (row, t) in rows.iter().zip(&log.times) {
        assert_eq!(row.len(), 5);
        assert_eq!(row[0], *t);
    }
    assert_eq!(rows[0][1], log.initial_enstrophy);
}
