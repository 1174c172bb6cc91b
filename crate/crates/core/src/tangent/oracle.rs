//! Brute-force n-trace: the dense Jacobian of the truncated system in an
//! explicit Ḣ¹-orthonormal real basis.

use rustfft::num_complex::Complex64;

use super::frame::TangentFrame;
use crate::error::{Error, Result};
use crate::solver::rhs;
use crate::spectral::{SpectralVectorField, WaveGrid};

/// Largest resolution for which the dense Jacobian is assembled.
pub const ORACLE_MAX_N_PER_DIM: usize = 8;

/// One real basis field `2 alpha a cos(k.x)` or `2 alpha a sin(k.x)` with `a`
/// a unit vector orthogonal to `k` and `alpha` fixing `||grad b|| = 1`.
#[derive(Clone, Copy, Debug)]
struct BasisMode {
    site: usize,
    polarization: [f64; 4],
    /// Coefficient at `site`; its conjugate sits at the mirror site.
    coeff: Complex64,
}

/// Real coordinates of retained solenoidal fields.
pub struct ModeBasis {
    grid: WaveGrid,
    modes: Vec<BasisMode>,
}

impl ModeBasis {
    pub fn new(grid: &WaveGrid) -> Self {
        let vol = grid.volume();
        let mut modes = Vec::new();
        for &site in grid.retained_sites() {
            let mirror = grid.mirror(site);
            if mirror < site || grid.is_nyquist(site) {
                continue;
            }
            let kappa = grid.kappa(site);
            let k_norm = grid.k2(site).sqrt();
            let alpha = 1.0 / (k_norm * (2.0 * vol).sqrt());
            for a in transverse_basis(kappa) {
                for coeff in [Complex64::new(alpha, 0.0), Complex64::new(0.0, -alpha)] {
                    modes.push(BasisMode {
                        site,
                        polarization: a,
                        coeff,
                    });
                }
            }
        }
        ModeBasis {
            grid: grid.clone(),
            modes,
        }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn field(&self, j: usize) -> SpectralVectorField {
        let m = self.modes[j];
        let mut f = SpectralVectorField::zeros(&self.grid);
        let mirror = self.grid.mirror(m.site);
        for c in 0..4 {
            let z = m.coeff * m.polarization[c];
            f.component_mut(c)[m.site] = z;
            f.component_mut(c)[mirror] = z.conj();
        }
        f.refresh_solenoidal_flag();
        f
    }

    /// `(grad b_j, grad f)` for every basis field.
    pub fn coordinates(&self, f: &SpectralVectorField) -> Vec<f64> {
        let vol = self.grid.volume();
        self.modes
            .iter()
            .map(|m| {
                let mut dot = Complex64::new(0.0, 0.0);
                for c in 0..4 {
                    dot += f.component(c)[m.site] * m.polarization[c];
                }
                2.0 * vol * self.grid.k2(m.site) * (m.coeff.conj() * dot).re
            })
            .collect()
    }
}

/// Orthonormal basis of the hyperplane orthogonal to `k`.
fn transverse_basis(k: [f64; 4]) -> [[f64; 4]; 3] {
    let mut basis: Vec<[f64; 4]> = Vec::with_capacity(4);
    let norm = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    basis.push(k.map(|x| x / norm));
    for axis in 0..4 {
        let mut e = [0.0; 4];
        e[axis] = 1.0;
        for b in &basis {
            let d: f64 = e.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in e.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let n = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(e.map(|x| x / n));
        }
        if basis.len() == 4 {
            break;
        }
    }
    [basis[1], basis[2], basis[3]]
}

/// Dense Jacobian of the unforced right-hand side at `u`, column `j` holding
/// the coordinates of `J b_j`. The right-hand side is quadratic, so the
/// central difference is exact up to rounding.
pub fn dense_jacobian(u: &SpectralVectorField, nu: f64, basis: &ModeBasis) -> Result<Vec<Vec<f64>>> {
    let grid = u.grid();
    if grid.n_per_dim() > ORACLE_MAX_N_PER_DIM {
        return Err(Error::Unsupported(format!(
            "dense Jacobian needs n_per_dim <= {ORACLE_MAX_N_PER_DIM}, got {}",
            grid.n_per_dim()
        )));
    }
    let zero = SpectralVectorField::zeros(grid);
    let eps = u.h1_norm().max(1.0);
    (0..basis.dim())
        .map(|j| {
            let b = basis.field(j);
            let plus = rhs(&SpectralVectorField::lincomb(1.0, u, eps, &b)?, &zero, nu)?;
            let minus = rhs(&SpectralVectorField::lincomb(1.0, u, -eps, &b)?, &zero, nu)?;
            let col = SpectralVectorField::lincomb(0.5 / eps, &plus, -0.5 / eps, &minus)?;
            Ok(basis.coordinates(&col))
        })
        .collect()
}

/// `sum_i <J c_i, c_i>` with `c_i` the coordinates of the frame fields.
pub fn trace_oracle(u: &SpectralVectorField, frame: &TangentFrame, nu: f64) -> Result<f64> {
    let basis = ModeBasis::new(u.grid());
    let jac = dense_jacobian(u, nu, &basis)?;
    frame_trace(&jac, &basis, frame)
}

/// The frame trace for an already assembled Jacobian.
pub fn frame_trace(jac: &[Vec<f64>], basis: &ModeBasis, frame: &TangentFrame) -> Result<f64> {
    frame.check_orthonormal()?;
    let mut total = 0.0;
    for v in frame.fields() {
        let c = basis.coordinates(v);
        // J c = sum_j c_j col_j
        let mut jc = vec![0.0; basis.dim()];
        for (cj, col) in c.iter().zip(jac) {
            if *cj != 0.0 {
                for (acc, x) in jc.iter_mut().zip(col) {
                    *acc += cj * x;
                }
            }
        }
        total += jc.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}
