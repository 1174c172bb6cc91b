//! Physical-space samples of retained fields on uniform grids.

use rustfft::num_complex::Complex64;
use rustfft::num_traits::Zero;

use super::field::SpectralVectorField;
use super::grid::WaveGrid;
use super::ops::{pack_forward, pack_inverse};
use crate::error::{Error, Result};

/// Real scalar samples on an `m^4` grid of the box `[0, L)^4`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub m: usize,
    pub box_length: f64,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(m: usize, box_length: f64) -> Self {
        ScalarField {
            m,
            box_length,
            values: vec![0.0; m.pow(4)],
        }
    }

    pub fn cell_volume(&self) -> f64 {
        (self.box_length / self.m as f64).powi(4)
    }

    /// Rectangle-rule integral; exact for trigonometric polynomials whose
    /// wavenumbers stay below `m` in magnitude.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        (s * self.cell_volume()).powf(1.0 / p)
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v * v).sum();
        (s * self.cell_volume()).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Real vector samples on an `m^4` grid.
#[derive(Clone, Debug)]
pub struct PhysicalVectorField {
    pub m: usize,
    pub box_length: f64,
    pub comps: [Vec<f64>; 4],
}

impl PhysicalVectorField {
    pub fn at(&self, x: usize) -> [f64; 4] {
        std::array::from_fn(|c| self.comps[c][x])
    }

    /// `|u(x)|^2` at every grid point.
    pub fn magnitude_squared(&self) -> ScalarField {
        let len = self.m.pow(4);
        let mut out = ScalarField::zeros(self.m, self.box_length);
        for x in 0..len {
            out.values[x] = self.comps.iter().map(|c| c[x] * c[x]).sum();
        }
        out
    }
}

/// Gradient samples, `grad[i][j] = d_j u_i`.
#[derive(Clone, Debug)]
pub struct PhysicalGradient {
    pub m: usize,
    pub box_length: f64,
    pub grad: [[Vec<f64>; 4]; 4],
}

impl PhysicalGradient {
    pub fn at(&self, x: usize) -> [[f64; 4]; 4] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.grad[i][j][x]))
    }

    /// Pointwise Frobenius norm `|grad u(x)|`, whose `L^2` norm is
    /// `||grad u||_{L^2}`.
    pub fn frobenius(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.m, self.box_length);
        for (x, v) in out.values.iter_mut().enumerate() {
            let mut s = 0.0;
            for row in &self.grad {
                for g in row {
                    s += g[x] * g[x];
                }
            }
            *v = s.sqrt();
        }
        out
    }
}

fn check_resolution(u: &SpectralVectorField, m: usize) -> Result<()> {
    let cutoff = u.grid().dealias_cutoff();
    if m < 2 * cutoff + 1 {
        return Err(Error::InvalidParameter(format!(
            "physical grid {m} cannot resolve wavenumbers up to {cutoff}"
        )));
    }
    Ok(())
}

/// Samples the dealias-truncated field on an `m^4` grid.
pub fn to_physical(u: &SpectralVectorField, m: usize) -> Result<PhysicalVectorField> {
    check_resolution(u, m)?;
    let grid = u.grid();
    let padded;
    let fft = if m == grid.n_per_dim() {
        grid.fft()
    } else {
        padded = grid.padded_fft(m);
        padded.as_ref()
    };
    let lo = pack_inverse(grid, fft, u.component(0), u.component(1));
    let hi = pack_inverse(grid, fft, u.component(2), u.component(3));
    Ok(PhysicalVectorField {
        m,
        box_length: grid.box_length(),
        comps: [
            lo.iter().map(|z| z.re).collect(),
            lo.iter().map(|z| z.im).collect(),
            hi.iter().map(|z| z.re).collect(),
            hi.iter().map(|z| z.im).collect(),
        ],
    })
}

/// Samples `d_j u_i` of the dealias-truncated field on an `m^4` grid.
pub fn gradient_physical(u: &SpectralVectorField, m: usize) -> Result<PhysicalGradient> {
    check_resolution(u, m)?;
    let grid = u.grid();
    let padded;
    let fft = if m == grid.n_per_dim() {
        grid.fft()
    } else {
        padded = grid.padded_fft(m);
        padded.as_ref()
    };
    let len = grid.len();
    let kap = grid.kappas();
    let derivative = |i: usize, j: usize| -> Vec<Complex64> {
        let src = u.component(i);
        let mut d = vec![Complex64::zero(); len];
        for &site in grid.retained_sites() {
            d[site] = src[site] * Complex64::new(0.0, kap[site][j]);
        }
        d
    };
    let mut grad: [[Vec<f64>; 4]; 4] = Default::default();
    for i in 0..4 {
        for j in (0..4).step_by(2) {
            let w = pack_inverse(grid, fft, &derivative(i, j), &derivative(i, j + 1));
            grad[i][j] = w.iter().map(|z| z.re).collect();
            grad[i][j + 1] = w.iter().map(|z| z.im).collect();
        }
    }
    Ok(PhysicalGradient {
        m,
        box_length: grid.box_length(),
        grad,
    })
}

/// Retained Fourier coefficients of physical samples, i.e. the
/// trigonometric interpolant truncated to the dealias mask. Exact when the
/// sampled function has no wavenumbers above `m - K - 1` in magnitude. The
/// result is not projected.
pub fn from_physical(p: &PhysicalVectorField, grid: &WaveGrid) -> Result<SpectralVectorField> {
    if p.box_length != grid.box_length() {
        return Err(Error::GridMismatch {
            left: format!("{grid:?}"),
            right: format!("physical samples with L = {}", p.box_length),
        });
    }
    let cutoff = grid.dealias_cutoff();
    if p.m < 2 * cutoff + 1 {
        return Err(Error::InvalidParameter(format!(
            "physical grid {} cannot resolve wavenumbers up to {cutoff}",
            p.m
        )));
    }
    let padded;
    let fft = if p.m == grid.n_per_dim() {
        grid.fft()
    } else {
        padded = grid.padded_fft(p.m);
        padded.as_ref()
    };
    let pack = |a: &[f64], b: &[f64]| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| Complex64::new(*x, *y)).collect()
    };
    let (c0, c1) = pack_forward(grid, fft, pack(&p.comps[0], &p.comps[1]));
    let (c2, c3) = pack_forward(grid, fft, pack(&p.comps[2], &p.comps[3]));
    let mut out = SpectralVectorField::from_parts(grid, [c0, c1, c2, c3], false);
    out.refresh_solenoidal_flag();
    Ok(out)
}
