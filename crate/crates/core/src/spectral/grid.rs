use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::fft::Fft4;
use crate::error::{Error, Result};

/// Fourier lattice of the periodic box `[0, L)^4` with `n` modes per axis.
///
/// Lattice sites are stored row-major, `site = ((i0*n + i1)*n + i2)*n + i3`,
/// with index `i` carrying the integer wavenumber `i` for `i < n/2` and
/// `i - n` otherwise. The set is closed under `k -> -k` modulo `n`.
///
/// The dealias mask keeps sites with `3|k_j| < n` on every axis, which makes
/// quadratic products alias-free on the retained modes. `k = 0` is never
/// retained. Sites on the Nyquist planes (`k_j = -n/2`) are kept at zero by
/// every operation. Cloning is cheap.
#[derive(Clone)]
pub struct WaveGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    box_length: f64,
    cutoff: usize,
    kappa: Vec<[f64; 4]>,
    k2: Vec<f64>,
    inv_k2: Vec<f64>,
    mirror: Vec<usize>,
    mask: Vec<bool>,
    nyquist: Vec<bool>,
    retained: Vec<usize>,
    fft: Fft4,
    padded: Mutex<HashMap<usize, Arc<Fft4>>>,
}

impl WaveGrid {
    pub fn new(n_per_dim: usize, box_length: f64) -> Result<Self> {
        if n_per_dim < 8 || n_per_dim % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_per_dim must be even and >= 8, got {n_per_dim}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive, got {box_length}"
            )));
        }
        let n = n_per_dim;
        let cutoff = (n - 1) / 3;
        let sites = n.pow(4);
        let scale = 2.0 * PI / box_length;
        let mut kappa = Vec::with_capacity(sites);
        let mut k2 = Vec::with_capacity(sites);
        let mut inv_k2 = Vec::with_capacity(sites);
        let mut mirror = Vec::with_capacity(sites);
        let mut mask = Vec::with_capacity(sites);
        let mut nyquist = Vec::with_capacity(sites);
        let mut retained = Vec::new();
        for site in 0..sites {
            let k = site_wavevector(n, site);
            let kap = k.map(|kj| kj as f64 * scale);
            let kk: f64 = kap.iter().map(|x| x * x).sum();
            kappa.push(kap);
            k2.push(kk);
            inv_k2.push(if site == 0 { 0.0 } else { 1.0 / kk });
            mirror.push(site_of(n, k.map(|kj| -kj)));
            let keep = site != 0 && k.iter().all(|kj| 3 * kj.unsigned_abs() < n as u64);
            mask.push(keep);
            nyquist.push(k.iter().any(|kj| *kj == -(n as i64) / 2));
            if keep {
                retained.push(site);
            }
        }
        Ok(WaveGrid {
            inner: Arc::new(GridInner {
                n,
                box_length,
                cutoff,
                kappa,
                k2,
                inv_k2,
                mirror,
                mask,
                nyquist,
                retained,
                fft: Fft4::new(n),
                padded: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn n_per_dim(&self) -> usize {
        self.inner.n
    }

    pub fn box_length(&self) -> f64 {
        self.inner.box_length
    }

    /// Box volume `L^4`; every physical integral carries this factor.
    pub fn volume(&self) -> f64 {
        self.inner.box_length.powi(4)
    }

    pub fn len(&self) -> usize {
        self.inner.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest retained `|k_j|`.
    pub fn dealias_cutoff(&self) -> usize {
        self.inner.cutoff
    }

    pub fn wavevector(&self, site: usize) -> [i64; 4] {
        site_wavevector(self.inner.n, site)
    }

    /// Site index of an integer wavevector, taken modulo `n`.
    pub fn site(&self, k: [i64; 4]) -> usize {
        site_of(self.inner.n, k)
    }

    /// Physical wavevector `2 pi k / L`.
    pub fn kappa(&self, site: usize) -> [f64; 4] {
        self.inner.kappa[site]
    }

    pub fn k2(&self, site: usize) -> f64 {
        self.inner.k2[site]
    }

    /// `1/|k|^2`, with the `k = 0` site mapped to zero.
    pub fn inv_k2(&self, site: usize) -> f64 {
        self.inner.inv_k2[site]
    }

    /// Site of `-k`.
    pub fn mirror(&self, site: usize) -> usize {
        self.inner.mirror[site]
    }

    pub fn is_retained(&self, site: usize) -> bool {
        self.inner.mask[site]
    }

    /// Sites with a component at the Nyquist wavenumber `-n/2`. These have
    /// no consistent real derivative and never carry data.
    pub fn is_nyquist(&self, site: usize) -> bool {
        self.inner.nyquist[site]
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.inner.mask
    }

    /// Retained sites in storage order. Excludes `k = 0`.
    pub fn retained_sites(&self) -> &[usize] {
        &self.inner.retained
    }

    pub(crate) fn kappas(&self) -> &[[f64; 4]] {
        &self.inner.kappa
    }

    pub(crate) fn k2s(&self) -> &[f64] {
        &self.inner.k2
    }

    pub(crate) fn inv_k2s(&self) -> &[f64] {
        &self.inner.inv_k2
    }

    pub(crate) fn fft(&self) -> &Fft4 {
        &self.inner.fft
    }

    /// FFT engine for a physical grid of `m` points per axis, used for
    /// quadrature of higher-degree products of retained fields.
    pub(crate) fn padded_fft(&self, m: usize) -> Arc<Fft4> {
        let mut cache = self.inner.padded.lock().expect("fft cache poisoned");
        cache
            .entry(m)
            .or_insert_with(|| Arc::new(Fft4::new(m)))
            .clone()
    }

    /// Smallest physical resolution on which products of `degree` retained
    /// fields are integrated exactly by the rectangle rule.
    pub fn exact_quadrature_points(&self, degree: usize) -> usize {
        (degree * self.inner.cutoff + 1).max(self.inner.n)
    }

    pub fn same_as(&self, other: &WaveGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.box_length == other.inner.box_length)
    }

    pub(crate) fn check_same(&self, other: &WaveGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: format!("{self:?}"),
                right: format!("{other:?}"),
            })
        }
    }
}

impl fmt::Debug for WaveGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WaveGrid({}^4, L = {})", self.inner.n, self.inner.box_length)
    }
}

impl PartialEq for WaveGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

pub(crate) fn wavenumber(n: usize, i: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub(crate) fn site_wavevector(n: usize, site: usize) -> [i64; 4] {
    [
        wavenumber(n, site / (n * n * n)),
        wavenumber(n, (site / (n * n)) % n),
        wavenumber(n, (site / n) % n),
        wavenumber(n, site % n),
    ]
}

pub(crate) fn site_of(n: usize, k: [i64; 4]) -> usize {
    let w = |kj: i64| kj.rem_euclid(n as i64) as usize;
    ((w(k[0]) * n + w(k[1])) * n + w(k[2])) * n + w(k[3])
}
