use rand::Rng;

use crate::error::{Error, Result};
use crate::spectral::{h1dot_inner, RandomSpectrum, SpectralVectorField, WaveGrid};

/// Largest `|Gram - I|` entry accepted by operations that need an
/// orthonormal frame.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Relative residual below which a frame vector is treated as dependent on
/// its predecessors. Together with the determinant floor this rejects
/// frames whose normalized Gram determinant falls under `1e-28`.
const DEPENDENT_RESIDUAL: f64 = 1e-14;
const GRAM_DET_FLOOR: f64 = 1e-28;

/// An ordered set of solenoidal perturbation fields on one grid.
#[derive(Clone, Debug)]
pub struct TangentFrame {
    fields: Vec<SpectralVectorField>,
}

impl TangentFrame {
    pub fn new(fields: Vec<SpectralVectorField>) -> Result<Self> {
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                first.grid().check_same(f.grid())?;
            }
        }
        for f in &fields {
            f.check_solenoidal()?;
            if f.mean_mode_norm() != 0.0 {
                return Err(Error::NonzeroMean(f.mean_mode_norm()));
            }
        }
        Ok(TangentFrame { fields })
    }

    /// `n` random solenoidal fields drawn from `spec`, orthonormalized.
    pub fn random<R: Rng + ?Sized>(
        grid: &WaveGrid,
        n: usize,
        rng: &mut R,
        spec: &RandomSpectrum,
    ) -> Result<Self> {
        let spec = RandomSpectrum {
            solenoidal: true,
            ..*spec
        };
        let fields = (0..n)
            .map(|_| SpectralVectorField::random(grid, rng, &spec))
            .collect();
        orthonormalize(&TangentFrame { fields })
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn fields(&self) -> &[SpectralVectorField] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> &SpectralVectorField {
        &self.fields[i]
    }

    pub fn into_fields(self) -> Vec<SpectralVectorField> {
        self.fields
    }

    pub fn grid(&self) -> Option<&WaveGrid> {
        self.fields.first().map(|f| f.grid())
    }

    /// The first `n` fields.
    pub fn truncated(&self, n: usize) -> TangentFrame {
        TangentFrame {
            fields: self.fields[..n.min(self.len())].to_vec(),
        }
    }

    pub fn scaled(&self, a: f64) -> TangentFrame {
        TangentFrame {
            fields: self.fields.iter().map(|f| f.scaled(a)).collect(),
        }
    }

    /// `G_ij = (grad v_i, grad v_j)`.
    pub fn gram(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = h1dot_inner(&self.fields[i], &self.fields[j])?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }

    /// `max |G_ij - delta_ij|`
    pub fn gram_deviation(&self) -> Result<f64> {
        let g = self.gram()?;
        let mut worst = 0.0_f64;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok(worst)
    }

    pub fn check_orthonormal(&self) -> Result<()> {
        let dev = self.gram_deviation()?;
        if dev > ORTHONORMAL_TOL || dev.is_nan() {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(())
    }
}

/// Modified Gram-Schmidt in the `(grad ., grad .)` inner product, with one
/// reorthogonalization pass. The span of every leading subframe is kept.
pub fn orthonormalize(frame: &TangentFrame) -> Result<TangentFrame> {
    let mut out: Vec<SpectralVectorField> = Vec::with_capacity(frame.len());
    let mut det = 1.0;
    for (index, v) in frame.fields.iter().enumerate() {
        let norm0 = v.h1_norm();
        if !(norm0 > 0.0 && norm0.is_finite()) {
            return Err(Error::RankDeficient {
                index,
                residual: norm0,
            });
        }
        let mut w = v.scaled(1.0 / norm0);
        for _ in 0..2 {
            for q in &out {
                let c = h1dot_inner(&w, q)?;
                w.axpy(-c, q)?;
            }
        }
        let residual = w.h1_norm();
        det *= residual * residual;
        if residual < DEPENDENT_RESIDUAL || det < GRAM_DET_FLOOR {
            return Err(Error::RankDeficient { index, residual });
        }
        w.scale(1.0 / residual);
        w.set_solenoidal_flag(v.is_solenoidal());
        out.push(w);
    }
    Ok(TangentFrame { fields: out })
}
