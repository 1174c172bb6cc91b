use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::num_traits::Zero;

use super::grid::WaveGrid;
use super::ops;
use crate::error::{Error, Result};

/// Tolerance on `|k.u(k)| / (|k| |u(k)|)` for a field to count as solenoidal.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// Real 4-component vector field on the torus, stored as Fourier
/// coefficients `u(x) = sum_k u(k) exp(i k.x)`, one contiguous array per
/// component.
///
/// Reality is encoded by Hermitian symmetry `u(-k) = conj(u(k))`; every
/// constructor and operation in this crate preserves it exactly.
#[derive(Clone, Debug)]
pub struct SpectralVectorField {
    grid: WaveGrid,
    coeffs: [Vec<Complex64>; 4],
    solenoidal: bool,
}

/// Shape of the random spectrum drawn by [`SpectralVectorField::random`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomSpectrum {
    /// Largest Euclidean `|k|` (integer units) that receives energy.
    pub k_max: f64,
    /// Coefficient amplitudes scale as `|k|^-slope`.
    pub slope: f64,
    /// Restrict to the dealiased modes.
    pub retained_only: bool,
    /// Leray-project the draw.
    pub solenoidal: bool,
}

impl Default for RandomSpectrum {
    fn default() -> Self {
        RandomSpectrum {
            k_max: f64::INFINITY,
            slope: 1.0,
            retained_only: true,
            solenoidal: true,
        }
    }
}

impl SpectralVectorField {
    pub fn zeros(grid: &WaveGrid) -> Self {
        let len = grid.len();
        SpectralVectorField {
            grid: grid.clone(),
            coeffs: std::array::from_fn(|_| vec![Complex64::zero(); len]),
            solenoidal: true,
        }
    }

    /// Wraps raw coefficients. The solenoidal flag is computed from the data.
    pub fn from_coeffs(grid: &WaveGrid, coeffs: [Vec<Complex64>; 4]) -> Result<Self> {
        if coeffs.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient arrays must have {} entries",
                grid.len()
            )));
        }
        let mut f = SpectralVectorField {
            grid: grid.clone(),
            coeffs,
            solenoidal: false,
        };
        f.refresh_solenoidal_flag();
        Ok(f)
    }

    pub(crate) fn from_parts(grid: &WaveGrid, coeffs: [Vec<Complex64>; 4], solenoidal: bool) -> Self {
        SpectralVectorField {
            grid: grid.clone(),
            coeffs,
            solenoidal,
        }
    }

    /// `amplitude * exp(i k.x) + c.c.`
    pub fn single_mode(grid: &WaveGrid, k: [i64; 4], amplitude: [Complex64; 4]) -> Self {
        let mut f = Self::zeros(grid);
        f.set_mode(k, amplitude);
        f.refresh_solenoidal_flag();
        f
    }

    /// The shear profile `(A sin x_axis) e_component` on a box of side `2 pi`
    /// (wavenumber 1 along `axis` in general).
    pub fn shear(grid: &WaveGrid, amplitude: f64, component: usize, axis: usize) -> Self {
        let mut k = [0i64; 4];
        k[axis] = 1;
        let mut amp = [Complex64::zero(); 4];
        // A sin(x) = (A / 2i) e^{ix} + c.c.
        amp[component] = Complex64::new(0.0, -amplitude / 2.0);
        Self::single_mode(grid, k, amp)
    }

    /// Gaussian random field with Hermitian symmetry and zero mean.
    pub fn random<R: Rng + ?Sized>(grid: &WaveGrid, rng: &mut R, spec: &RandomSpectrum) -> Self {
        let mut f = Self::zeros(grid);
        for site in 1..grid.len() {
            let mirror = grid.mirror(site);
            if mirror < site {
                continue;
            }
            if grid.is_nyquist(site) || (spec.retained_only && !grid.is_retained(site)) {
                continue;
            }
            let k = grid.wavevector(site);
            let kn = (k.iter().map(|x| (x * x) as f64).sum::<f64>()).sqrt();
            if kn > spec.k_max {
                continue;
            }
            let sigma = kn.powf(-spec.slope);
            for c in 0..4 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(re, im) * (sigma / 2f64.sqrt());
                f.coeffs[c][site] = z;
                f.coeffs[c][mirror] = z.conj();
            }
        }
        if spec.solenoidal {
            ops::leray_project_in_place(&mut f);
        } else {
            f.refresh_solenoidal_flag();
        }
        f
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    /// Mutable access to one component. Clears the solenoidal flag.
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        self.solenoidal = false;
        &mut self.coeffs[c]
    }

    /// Mutable access to all components. Clears the solenoidal flag.
    pub fn components_mut(&mut self) -> [&mut [Complex64]; 4] {
        self.solenoidal = false;
        self.coeffs.each_mut().map(|c| c.as_mut_slice())
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 4] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> [Vec<Complex64>; 4] {
        self.coeffs
    }

    pub fn coeff(&self, site: usize) -> [Complex64; 4] {
        std::array::from_fn(|c| self.coeffs[c][site])
    }

    /// Sets `u(k) = amplitude` and `u(-k) = conj(amplitude)`. Ignored for
    /// `k = 0` and Nyquist sites.
    pub fn set_mode(&mut self, k: [i64; 4], amplitude: [Complex64; 4]) {
        let site = self.grid.site(k);
        let mirror = self.grid.mirror(site);
        self.solenoidal = false;
        if site == 0 || self.grid.is_nyquist(site) {
            return;
        }
        for (c, a) in amplitude.iter().enumerate() {
            self.coeffs[c][site] = *a;
            self.coeffs[c][mirror] = a.conj();
        }
    }

    /// Value of the solenoidal flag. Set by Leray projection and preserved by
    /// linear combinations of solenoidal fields.
    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn set_solenoidal_flag(&mut self, flag: bool) {
        self.solenoidal = flag;
    }

    pub fn refresh_solenoidal_flag(&mut self) {
        self.solenoidal = self.divergence_defect() <= SOLENOIDAL_TOL;
    }

    /// `max_k |k.u(k)| / (|k| |u(k)|)` over sites with nonzero coefficients.
    pub fn divergence_defect(&self) -> f64 {
        let kap = self.grid.kappas();
        let mut worst = 0.0f64;
        for site in 1..self.grid.len() {
            let u = self.coeff(site);
            let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let k = kap[site];
            let div: Complex64 = (0..4).map(|j| u[j] * k[j]).sum();
            let kn = self.grid.k2(site).sqrt();
            worst = worst.max(div.norm() / (kn * norm));
        }
        worst
    }

    /// Largest `|u(-k) - conj(u(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for c in 0..4 {
            for site in 0..self.grid.len() {
                let m = self.grid.mirror(site);
                worst = worst.max((self.coeffs[c][m] - self.coeffs[c][site].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn mean_mode_norm(&self) -> f64 {
        self.coeff(0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Energy outside the dealiased modes, as a fraction of the total.
    pub fn unresolved_fraction(&self) -> f64 {
        let mask = self.grid.dealias_mask();
        let (mut outside, mut total) = (0.0, 0.0);
        for c in &self.coeffs {
            for (site, z) in c.iter().enumerate() {
                let e = z.norm_sqr();
                total += e;
                if !mask[site] {
                    outside += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }

    /// Zeroes every site outside the dealias mask, including `k = 0`.
    pub fn apply_mask(&mut self) {
        let mask = self.grid.dealias_mask();
        for c in self.coeffs.iter_mut() {
            for (z, keep) in c.iter_mut().zip(mask) {
                if !keep {
                    *z = Complex64::zero();
                }
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            c.iter_mut().for_each(|z| *z *= a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s * a;
            }
        }
        self.solenoidal = self.solenoidal && other.solenoidal;
        Ok(())
    }

    /// `a * x + b * y`
    pub fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        let mut out = x.scaled(a);
        out.axpy(b, y)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::lincomb(1.0, self, -1.0, other)
    }

    /// `(u, v)_{L^2}` with the box-volume normalization.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let mut acc = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            for (x, y) in a.iter().zip(b) {
                acc += x.re * y.re + x.im * y.im;
            }
        }
        Ok(acc * self.grid.volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_inner(self).expect("same grid").max(0.0).sqrt()
    }

    /// `||grad u||_{L^2}`.
    pub fn h1_norm(&self) -> f64 {
        ops::h1dot_inner(self, self).expect("same grid").max(0.0).sqrt()
    }

    /// Rescales to the given `||grad u||`. A zero field stays zero.
    pub fn normalize_h1(&mut self, target: f64) {
        let norm = self.h1_norm();
        if norm > 0.0 {
            self.scale(target / norm);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Checks the solenoidal invariant numerically.
    pub fn check_solenoidal(&self) -> Result<()> {
        if self.solenoidal {
            return Ok(());
        }
        let defect = self.divergence_defect();
        if defect <= SOLENOIDAL_TOL {
            Ok(())
        } else {
            Err(Error::NotSolenoidal {
                defect,
                tolerance: SOLENOIDAL_TOL,
            })
        }
    }
}
