//! Leray projection, homogeneous Sobolev pairings and the dealiased
//! quadratic nonlinearity.

use rustfft::num_complex::Complex64;
use rustfft::num_traits::Zero;

use super::fft::Fft4;
use super::field::SpectralVectorField;
use super::grid::{site_of, WaveGrid};
use crate::error::{Error, Result};

/// Leray-Helmholtz projection `u(k) -> u(k) - k (k.u(k)) / |k|^2`. The mean
/// and Nyquist sites are zeroed.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let mut out = f.clone();
    leray_project_in_place(&mut out);
    out
}

pub(crate) fn leray_project_in_place(f: &mut SpectralVectorField) {
    let grid = f.grid().clone();
    let kap = grid.kappas();
    let inv = grid.inv_k2s();
    let [c0, c1, c2, c3] = f.components_mut();
    for site in 0..grid.len() {
        if grid.is_nyquist(site) {
            c0[site] = Complex64::zero();
            c1[site] = Complex64::zero();
            c2[site] = Complex64::zero();
            c3[site] = Complex64::zero();
            continue;
        }
        let k = kap[site];
        let d = (c0[site] * k[0] + c1[site] * k[1] + c2[site] * k[2] + c3[site] * k[3]) * inv[site];
        c0[site] -= d * k[0];
        c1[site] -= d * k[1];
        c2[site] -= d * k[2];
        c3[site] -= d * k[3];
    }
    for c in f.components_mut() {
        c[0] = Complex64::zero();
    }
    f.set_solenoidal_flag(true);
}

/// `(grad u, grad v)_{L^2} = L^4 sum_k |k|^2 Re(u(k) . conj v(k))`.
pub fn h1dot_inner(u: &SpectralVectorField, v: &SpectralVectorField) -> Result<f64> {
    u.grid().check_same(v.grid())?;
    let k2 = u.grid().k2s();
    let mut acc = 0.0;
    for c in 0..4 {
        let (a, b) = (u.component(c), v.component(c));
        for site in 0..k2.len() {
            acc += k2[site] * (a[site].re * b[site].re + a[site].im * b[site].im);
        }
    }
    Ok(acc * u.grid().volume())
}

/// `||g||_{H^-1} = (L^4 sum_k |g(k)|^2 / |k|^2)^{1/2}`. The field should be
/// solenoidal; project first otherwise.
pub fn hminus1_norm(g: &SpectralVectorField) -> Result<f64> {
    let mean = g.mean_mode_norm();
    if mean != 0.0 {
        return Err(Error::NonzeroMean(mean));
    }
    let inv = g.grid().inv_k2s();
    let mut acc = 0.0;
    for c in 0..4 {
        for (z, w) in g.component(c).iter().zip(inv) {
            acc += z.norm_sqr() * w;
        }
    }
    Ok((acc * g.grid().volume()).sqrt())
}

/// Dealiased `div(u (x) u) = (u . grad) u`, not projected.
///
/// The input is truncated to the dealiased modes; the ten products
/// `u_i u_j` are formed on the physical grid and only retained output modes
/// are kept, so the result equals the exact convolution restricted to the
/// retained modes.
pub fn nonlinear_term(u: &SpectralVectorField) -> Result<SpectralVectorField> {
    u.check_solenoidal()?;
    let phys = PackedPhysical::from_field(u);
    let coeffs = symmetric_divergence(u.grid(), &phys, None);
    Ok(SpectralVectorField::from_parts(u.grid(), coeffs, false))
}

/// Dealiased `(u . grad) v + (v . grad) u = div(u (x) v + v (x) u)` for
/// solenoidal `u`, `v`, not projected.
pub fn bilinear_term(u: &SpectralVectorField, v: &SpectralVectorField) -> Result<SpectralVectorField> {
    u.grid().check_same(v.grid())?;
    u.check_solenoidal()?;
    v.check_solenoidal()?;
    let pu = PackedPhysical::from_field(u);
    bilinear_with(&pu, v)
}

/// [`bilinear_term`] with the physical samples of `u` already computed.
pub(crate) fn bilinear_with(pu: &PackedPhysical, v: &SpectralVectorField) -> Result<SpectralVectorField> {
    v.check_solenoidal()?;
    let pv = PackedPhysical::from_field(v);
    let mut coeffs = symmetric_divergence(v.grid(), pu, Some(&pv));
    for c in coeffs.iter_mut() {
        c.iter_mut().for_each(|z| *z *= 2.0);
    }
    Ok(SpectralVectorField::from_parts(v.grid(), coeffs, false))
}

/// A retained field on the native physical grid, two real components per
/// complex array: `lo = u0 + i u1`, `hi = u2 + i u3`.
pub(crate) struct PackedPhysical {
    lo: Vec<Complex64>,
    hi: Vec<Complex64>,
}

impl PackedPhysical {
    pub(crate) fn from_field(u: &SpectralVectorField) -> Self {
        let grid = u.grid();
        let fft = grid.fft();
        PackedPhysical {
            lo: pack_inverse(grid, fft, u.component(0), u.component(1)),
            hi: pack_inverse(grid, fft, u.component(2), u.component(3)),
        }
    }

    #[inline]
    fn at(&self, x: usize) -> [f64; 4] {
        let (a, b) = (self.lo[x], self.hi[x]);
        [a.re, a.im, b.re, b.im]
    }
}

/// Inverse transform of `a + i b` restricted to the retained modes onto the
/// physical grid of `fft` (native or finer).
pub(crate) fn pack_inverse(
    grid: &WaveGrid,
    fft: &Fft4,
    a: &[Complex64],
    b: &[Complex64],
) -> Vec<Complex64> {
    let m = fft.n();
    let mut w = vec![Complex64::zero(); fft.len()];
    let native = m == grid.n_per_dim();
    for &site in grid.retained_sites() {
        let dst = if native {
            site
        } else {
            site_of(m, grid.wavevector(site))
        };
        let (x, y) = (a[site], b[site]);
        w[dst] = Complex64::new(x.re - y.im, x.im + y.re);
    }
    fft.inverse(&mut w, Some(grid.dealias_cutoff()));
    w
}

/// Inverse of [`pack_inverse`]: forward transform of a physical array
/// `a + i b` holding two real fields, returning the retained coefficients of
/// `a` and `b` separately.
pub(crate) fn pack_forward(
    grid: &WaveGrid,
    fft: &Fft4,
    mut w: Vec<Complex64>,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = fft.n();
    let native = m == grid.n_per_dim();
    fft.forward(&mut w, Some(grid.dealias_cutoff()));
    let len = grid.len();
    let mut a = vec![Complex64::zero(); len];
    let mut b = vec![Complex64::zero(); len];
    for &site in grid.retained_sites() {
        let (src, mirror) = if native {
            (site, grid.mirror(site))
        } else {
            let k = grid.wavevector(site);
            (site_of(m, k), site_of(m, k.map(|kj| -kj)))
        };
        let (z, zm) = (w[src], w[mirror].conj());
        a[site] = (z + zm) * 0.5;
        let diff = z - zm;
        b[site] = Complex64::new(0.5 * diff.im, -0.5 * diff.re);
    }
    (a, b)
}

/// `T = (a_i b_j + a_j b_i) / 2` (or `a_i a_j`), transformed and differentiated:
/// returns `i sum_j k_j T_ij(k)` on the retained sites.
pub(crate) fn symmetric_divergence(
    grid: &WaveGrid,
    a: &PackedPhysical,
    b: Option<&PackedPhysical>,
) -> [Vec<Complex64>; 4] {
    let len = grid.len();
    let fft = grid.fft();
    let mut w: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![Complex64::zero(); len]);
    for x in 0..len {
        let ua = a.at(x);
        let t = match b {
            None => sym_products(&ua, &ua),
            Some(b) => {
                let ub = b.at(x);
                let mut t = sym_products(&ua, &ub);
                let s = sym_products(&ub, &ua);
                for (ti, si) in t.iter_mut().zip(s) {
                    *ti = 0.5 * (*ti + si);
                }
                t
            }
        };
        for p in 0..5 {
            w[p][x] = Complex64::new(t[2 * p], t[2 * p + 1]);
        }
    }
    let cutoff = Some(grid.dealias_cutoff());
    for wp in w.iter_mut() {
        fft.forward(wp, cutoff);
    }

    let kap = grid.kappas();
    let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::zero(); len]);
    for &site in grid.retained_sites() {
        let mirror = grid.mirror(site);
        let mut t = [Complex64::zero(); 10];
        for p in 0..5 {
            let (z, zm) = (w[p][site], w[p][mirror].conj());
            let sum = z + zm;
            let diff = z - zm;
            t[2 * p] = Complex64::new(0.5 * sum.re, 0.5 * sum.im);
            // (z - conj z_m) / 2i
            t[2 * p + 1] = Complex64::new(0.5 * diff.im, -0.5 * diff.re);
        }
        let k = kap[site];
        for i in 0..4 {
            let mut acc = Complex64::zero();
            for (j, kj) in k.iter().enumerate() {
                acc += t[PAIR[i][j]] * *kj;
            }
            out[i][site] = Complex64::new(-acc.im, acc.re);
        }
    }
    out
}

/// Position of `(i, j)` in the packed upper triangle.
const PAIR: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

#[inline]
fn sym_products(a: &[f64; 4], b: &[f64; 4]) -> [f64; 10] {
    [
        a[0] * b[0],
        a[0] * b[1],
        a[0] * b[2],
        a[0] * b[3],
        a[1] * b[1],
        a[1] * b[2],
        a[1] * b[3],
        a[2] * b[2],
        a[2] * b[3],
        a[3] * b[3],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::RandomSpectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid8() -> WaveGrid {
        WaveGrid::new(8, 2.0 * PI).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn projector_hand_evaluated_modes() {
        let g = grid8();
        let z = c(0.0);
        let f = SpectralVectorField::single_mode(&g, [1, 0, 0, 0], [c(1.0), z, z, z]);
        let p = leray_project(&f);
        assert!(p.coeff(g.site([1, 0, 0, 0])).iter().all(|x| x.norm() == 0.0));
        let f = SpectralVectorField::single_mode(&g, [0, 1, 0, 0], [c(1.0), z, z, z]);
        let p = leray_project(&f);
        assert_eq!(p.coeff(g.site([0, 1, 0, 0])), [c(1.0), z, z, z]);
    }

    #[test]
    fn projector_kills_gradients() {
        let g = grid8();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = SpectralVectorField::random(
            &g,
            &mut rng,
            &RandomSpectrum {
                solenoidal: false,
                retained_only: false,
                ..Default::default()
            },
        );
        // gradient of the scalar stored in component 0
        let mut grad = SpectralVectorField::zeros(&g);
        for site in 0..g.len() {
            let k = g.kappa(site);
            for j in 0..4 {
                grad.component_mut(j)[site] = Complex64::new(0.0, k[j]) * phi.component(0)[site];
            }
        }
        let p = leray_project(&grad);
        assert!(p.max_abs() <= 1e-15 * grad.max_abs());
    }

    #[test]
    fn sobolev_single_mode_values() {
        let g = grid8();
        let u = SpectralVectorField::shear(&g, 3.0, 0, 1);
        let l2 = u.l2_norm().powi(2);
        let h1 = h1dot_inner(&u, &u).unwrap();
        assert!((h1 - l2).abs() < 1e-12 * l2);

        // unit L2 norm at |k| = 1 and |k| = 2
        let mut g1 = SpectralVectorField::shear(&g, 1.0, 0, 1);
        g1.scale(1.0 / g1.l2_norm());
        assert!((hminus1_norm(&g1).unwrap() - 1.0).abs() < 1e-14);
        let mut g2 = SpectralVectorField::single_mode(&g, [0, 2, 0, 0], [c(1.0), c(0.0), c(0.0), c(0.0)]);
        g2.scale(1.0 / g2.l2_norm());
        assert!((hminus1_norm(&g2).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn hminus1_rejects_mean() {
        let g = grid8();
        let mut f = SpectralVectorField::zeros(&g);
        f.component_mut(2)[0] = c(1.0);
        assert!(matches!(hminus1_norm(&f), Err(Error::NonzeroMean(_))));
    }

    #[test]
    fn nonlinear_vanishes_on_shear_and_zero() {
        let g = grid8();
        let u = SpectralVectorField::shear(&g, 1.7, 0, 1);
        let n = nonlinear_term(&u).unwrap();
        assert!(n.max_abs() < 1e-15);
        let n = nonlinear_term(&SpectralVectorField::zeros(&g)).unwrap();
        assert_eq!(n.max_abs(), 0.0);
    }

    #[test]
    fn nonlinear_rejects_compressible_input() {
        let g = grid8();
        let f = SpectralVectorField::single_mode(&g, [1, 0, 0, 0], [c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(matches!(nonlinear_term(&f), Err(Error::NotSolenoidal { .. })));
    }

    #[test]
    fn bilinear_term_on_diagonal_is_twice_nonlinear() {
        let g = grid8();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = SpectralVectorField::random(&g, &mut rng, &RandomSpectrum::default());
        let n = nonlinear_term(&u).unwrap();
        let b = bilinear_term(&u, &u).unwrap();
        let diff = SpectralVectorField::lincomb(1.0, &b, -2.0, &n).unwrap();
        assert!(diff.max_abs() <= 1e-13 * b.max_abs());
    }
}
