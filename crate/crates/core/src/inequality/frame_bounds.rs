//! The pointwise and integrated inequalities behind the trace estimate.

use serde::{Deserialize, Serialize};

use super::constants::rho_bound;
use crate::error::{Error, Result};
use crate::spectral::{gradient_physical, to_physical, ScalarField, SpectralVectorField, WaveGrid};
use crate::tangent::TangentFrame;

/// Relative rounding allowance for inequalities that hold exactly on the
/// quadrature grid.
const ROUNDING: f64 = 1e-12;

/// `(A v, v) / (|A|_F |v|^2)` for a trace-free `A`, with `|.|_F` the
/// Frobenius norm. Never exceeds `sqrt((d-1)/d)`.
pub fn matrix_bound_check(a: &[[f64; 4]; 4], v: &[f64; 4]) -> Result<f64> {
    let frob = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let trace: f64 = (0..4).map(|i| a[i][i]).sum();
    if trace.abs() > 1e-12 * frob.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter(format!(
            "matrix is not trace-free (trace {trace:.3e}, norm {frob:.3e})"
        )));
    }
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if frob == 0.0 || vv == 0.0 {
        return Ok(0.0);
    }
    let mut q = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            q += v[i] * a[i][j] * v[j];
        }
    }
    Ok(q / (frob * vv))
}

/// `rho(x) = sum_i |v_i(x)|^2` on the `4K+1` grid, where `rho^2` integrates
/// exactly.
pub fn rho(frame: &TangentFrame, grid: &WaveGrid) -> Result<ScalarField> {
    let m = grid.exact_quadrature_points(4);
    let mut out = ScalarField::zeros(m, grid.box_length());
    for v in frame.fields() {
        grid.check_same(v.grid())?;
        let sq = to_physical(v, m)?.magnitude_squared();
        for (o, s) in out.values.iter_mut().zip(&sq.values) {
            *o += s;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoReport {
    pub n: usize,
    pub rho_l2: f64,
    pub bound: f64,
    /// `rho_l2 / bound`
    pub ratio: f64,
    /// `bound - rho_l2`
    pub margin: f64,
    /// `int rho - sum_i ||v_i||^2`, zero up to rounding.
    pub parseval_defect: f64,
}

/// `||rho_m||_{L^2}` against `2 (4L)^{1/2} sqrt(m)` for every leading
/// subframe `m = 1..=n` of an orthonormal frame.
pub fn rho_bound_nested(frame: &TangentFrame, l: f64) -> Result<Vec<RhoReport>> {
    frame.check_orthonormal()?;
    let Some(grid) = frame.grid() else {
        return Ok(Vec::new());
    };
    let m = grid.exact_quadrature_points(4);
    let mut acc = ScalarField::zeros(m, grid.box_length());
    let mut l2_sum = 0.0;
    let mut out = Vec::with_capacity(frame.len());
    for (i, v) in frame.fields().iter().enumerate() {
        let sq = to_physical(v, m)?.magnitude_squared();
        for (o, s) in acc.values.iter_mut().zip(&sq.values) {
            *o += s;
        }
        let l2 = v.l2_norm();
        l2_sum += l2 * l2;
        let n = i + 1;
        let rho_l2 = acc.l2_norm();
        let bound = rho_bound(n, l);
        out.push(RhoReport {
            n,
            rho_l2,
            bound,
            ratio: rho_l2 / bound,
            margin: bound - rho_l2,
            parseval_defect: acc.integral() - l2_sum,
        });
    }
    Ok(out)
}

pub fn rho_bound_check(frame: &TangentFrame, l: f64) -> Result<RhoReport> {
    rho_bound_nested(frame, l)?
        .pop()
        .ok_or_else(|| Error::InvalidParameter("empty frame".into()))
}

/// The chain `S <= c4 int rho |grad u| <= c4 ||grad u|| ||rho|| <= c4 ||grad u|| 2 (4L)^{1/2} sqrt(n)`
/// with `S = sum_i ((v_i . grad) u, v_i)`, evaluated for one leading subframe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSample {
    pub n: usize,
    pub advection: f64,
    pub weighted: f64,
    pub cauchy_schwarz: f64,
    pub rho_form: f64,
}

impl ChainSample {
    /// The first two links, which follow from the pointwise matrix bound and
    /// Cauchy-Schwarz and hold on the quadrature grid exactly.
    pub fn exact_links_hold(&self) -> bool {
        let tol = ROUNDING * self.cauchy_schwarz.abs().max(self.advection.abs());
        self.advection <= self.weighted + tol && self.weighted <= self.cauchy_schwarz + tol
    }

    /// The last link, which rests on the `rho` bound.
    pub fn rho_link_holds(&self) -> bool {
        self.cauchy_schwarz <= self.rho_form * (1.0 + ROUNDING)
    }
}

/// [`ChainSample`] for every leading subframe, all integrals on the `4K+1`
/// grid with `|grad u|` the pointwise Frobenius norm.
pub fn trace_chain_nested(
    u: &SpectralVectorField,
    frame: &TangentFrame,
    c4: f64,
    l: f64,
) -> Result<Vec<ChainSample>> {
    let grid = u.grid();
    let m = grid.exact_quadrature_points(4);
    let grad = gradient_physical(u, m)?;
    let frob = grad.frobenius();
    let grad_norm = u.h1_norm();
    let cell = frob.cell_volume();
    let points = m.pow(4);
    let mut rho_acc = vec![0.0; points];
    let mut advection = 0.0;
    let mut out = Vec::with_capacity(frame.len());
    for (i, v) in frame.fields().iter().enumerate() {
        grid.check_same(v.grid())?;
        let p = to_physical(v, m)?;
        for (x, r) in rho_acc.iter_mut().enumerate() {
            let vx = p.at(x);
            let mut q = 0.0;
            for j in 0..4 {
                for k in 0..4 {
                    q += vx[j] * grad.grad[k][j][x] * vx[k];
                }
            }
            advection += q * cell;
            *r += vx.iter().map(|c| c * c).sum::<f64>();
        }
        let weighted: f64 = rho_acc.iter().zip(&frob.values).map(|(r, f)| r * f).sum::<f64>() * cell;
        let rho_l2 = (rho_acc.iter().map(|r| r * r).sum::<f64>() * cell).sqrt();
        let n = i + 1;
        out.push(ChainSample {
            n,
            advection,
            weighted: c4 * weighted,
            cauchy_schwarz: c4 * grad_norm * rho_l2,
            rho_form: c4 * grad_norm * rho_bound(n, l),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::constants::l_upper_4d;
    use crate::spectral::RandomSpectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn trace_free_extremal_matrix() {
        let c4 = 3f64.sqrt() / 2.0;
        let a = [[1.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0; 4], [0.0; 4]];
        let r = matrix_bound_check(&a, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((r - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(r <= c4);
        // diag(3,-1,-1,-1) attains sqrt(3)/2 along e_1.
        let b = [[3.0, 0.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0], [0.0, 0.0, -1.0, 0.0], [0.0, 0.0, 0.0, -1.0]];
        let r = matrix_bound_check(&b, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((r - c4).abs() < 1e-15);
        assert_eq!(matrix_bound_check(&[[0.0; 4]; 4], &[1.0, 2.0, 3.0, 4.0]).unwrap(), 0.0);
        assert!(matrix_bound_check(&[[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0; 4]], &[1.0; 4]).is_err());
    }

    #[test]
    fn single_mode_rho() {
        let grid = WaveGrid::new(8, 2.0 * PI).unwrap();
        let mut v = SpectralVectorField::shear(&grid, 1.0, 0, 1);
        v.normalize_h1(1.0);
        // ||grad (A sin x_2)||^2 = A^2 V / 2 = 1
        let a2 = 2.0 / grid.volume();
        let frame = TangentFrame::new(vec![v]).unwrap();
        let r = rho(&frame, &grid).unwrap();
        let m = r.m;
        let h = 2.0 * PI / m as f64;
        for x in 0..m.pow(4) {
            let x1 = ((x / (m * m)) % m) as f64 * h;
            assert!((r.values[x] - a2 * x1.sin().powi(2)).abs() < 1e-15);
        }
        let empty = TangentFrame::new(vec![]).unwrap();
        assert_eq!(rho(&empty, &grid).unwrap().values.iter().fold(0.0_f64, |a, b| a.max(*b)), 0.0);
    }

    #[test]
    fn nested_reports_and_parseval() {
        let grid = WaveGrid::new(8, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = TangentFrame::random(&grid, 4, &mut rng, &RandomSpectrum::default()).unwrap();
        let reports = rho_bound_nested(&frame, l_upper_4d()).unwrap();
        assert_eq!(reports.len(), 4);
        for r in &reports {
            assert!(r.parseval_defect.abs() < 1e-12);
        }
        let last = rho_bound_check(&frame, l_upper_4d()).unwrap();
        assert_eq!(&last, reports.last().unwrap());
    }

    #[test]
    fn chain_exact_links() {
        let grid = WaveGrid::new(8, 2.0 * PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut u = SpectralVectorField::random(&grid, &mut rng, &RandomSpectrum::default());
        u.normalize_h1(5.0);
        let frame = TangentFrame::random(&grid, 3, &mut rng, &RandomSpectrum::default()).unwrap();
        let chain = trace_chain_nested(&u, &frame, 3f64.sqrt() / 2.0, l_upper_4d()).unwrap();
        let exact = crate::tangent::frame_advection(&u, &frame).unwrap();
        assert!((chain[2].advection - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        assert!(chain.iter().all(|c| c.exact_links_hold()));
    }
}
