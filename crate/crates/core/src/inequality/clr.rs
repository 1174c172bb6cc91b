//! Negative-eigenvalue counts of `-Δ - V` for separable potentials.
//!
//! The operator lives on the Dirichlet box `[0, l]^4`, discretized by the
//! standard second-order stencil on `N` interior points per axis. With
//! `V(x) = sum_j W(x_j)` the discrete operator splits into four copies of a
//! one-dimensional tridiagonal matrix, so its spectrum is the set of sums
//! `mu_a + mu_b + mu_c + mu_d` of one-dimensional eigenvalues. Dirichlet
//! eigenvalues dominate whole-space ones, so the box count is a lower bound
//! for the count of `-Δ - V 1_box` on `R^4`, which the CLR inequality bounds
//! by `L int_box V^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues at or above this are not counted as negative.
pub const NEGATIVE_THRESHOLD: f64 = -1e-8;

/// Smallest number of interior points per axis.
pub const MIN_POINTS: usize = 16;
/// Grid points required across one well radius.
pub const POINTS_PER_RADIUS: f64 = 4.0;

/// One-dimensional well profile `W >= 0`, centered in the box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WellProfile {
    Zero,
    /// `depth` on `|x - l/2| < radius`.
    Square { depth: f64, radius: f64 },
    /// `depth * exp(-(x - l/2)^2 / radius^2)`.
    Gaussian { depth: f64, radius: f64 },
}

impl WellProfile {
    fn eval(&self, x: f64, box_length: f64) -> f64 {
        let y = x - 0.5 * box_length;
        match *self {
            WellProfile::Zero => 0.0,
            WellProfile::Square { depth, radius } => {
                if y.abs() < radius {
                    depth
                } else {
                    0.0
                }
            }
            WellProfile::Gaussian { depth, radius } => depth * (-(y * y) / (radius * radius)).exp(),
        }
    }

    fn radius(&self) -> Option<f64> {
        match *self {
            WellProfile::Zero => None,
            WellProfile::Square { radius, .. } | WellProfile::Gaussian { radius, .. } => Some(radius),
        }
    }

    fn depth(&self) -> f64 {
        match *self {
            WellProfile::Zero => 0.0,
            WellProfile::Square { depth, .. } | WellProfile::Gaussian { depth, .. } => depth,
        }
    }

    /// `(int W, int W^2)` over `[0, l]`.
    fn moments(&self, box_length: f64) -> (f64, f64) {
        match *self {
            WellProfile::Zero => (0.0, 0.0),
            WellProfile::Square { depth, radius } => {
                let width = (2.0 * radius).min(box_length);
                (depth * width, depth * depth * width)
            }
            WellProfile::Gaussian { .. } => {
                // Composite Simpson; the integrand is smooth and the panel
                // count far exceeds what double precision can distinguish.
                let panels = 20_000;
                let h = box_length / panels as f64;
                let (mut s1, mut s2) = (0.0, 0.0);
                for i in 0..=panels {
                    let w = if i == 0 || i == panels {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    let f = self.eval(i as f64 * h, box_length);
                    s1 += w * f;
                    s2 += w * f * f;
                }
                (s1 * h / 3.0, s2 * h / 3.0)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClrSpec {
    pub profile: WellProfile,
    pub box_length: f64,
    /// Interior grid points per axis.
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClrReport {
    pub spec: ClrSpec,
    pub negative_count: u64,
    /// `int_box V^2`
    pub integral_v2: f64,
    /// `L int_box V^2`
    pub bound: f64,
    /// `count / bound`, zero when both vanish.
    pub ratio: f64,
    pub holds: bool,
}

/// Symmetric tridiagonal matrix with constant off-diagonal `off`.
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, a) in self.diag.iter().enumerate() {
            d = if i == 0 { a - x } else { a - x - off2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + self.off.abs()).max(1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min) - r;
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + r;
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn one_dimensional(spec: &ClrSpec) -> Tridiagonal {
    let h = spec.box_length / (spec.points + 1) as f64;
    let inv_h2 = 1.0 / (h * h);
    Tridiagonal {
        diag: (1..=spec.points)
            .map(|i| 2.0 * inv_h2 - spec.profile.eval(i as f64 * h, spec.box_length))
            .collect(),
        off: -inv_h2,
    }
}

fn validate(spec: &ClrSpec) -> Result<()> {
    if !(spec.box_length > 0.0 && spec.box_length.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "box length must be positive, got {}",
            spec.box_length
        )));
    }
    if spec.points < MIN_POINTS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_POINTS} points per axis, got {}",
            spec.points
        )));
    }
    if !(spec.profile.depth() >= 0.0 && spec.profile.depth().is_finite()) {
        return Err(Error::InvalidParameter("well depth must be nonnegative".into()));
    }
    if let Some(radius) = spec.profile.radius() {
        let h = spec.box_length / (spec.points + 1) as f64;
        if !(radius > 0.0) || radius < POINTS_PER_RADIUS * h {
            return Err(Error::InvalidParameter(format!(
                "grid spacing {h:.3e} too coarse for well radius {radius}"
            )));
        }
    }
    Ok(())
}

/// Counts 4-tuples of one-dimensional eigenvalues with negative sum.
fn count_negative_sums(mu: &[f64]) -> u64 {
    let mut pairs: Vec<f64> = Vec::with_capacity(mu.len() * mu.len());
    for a in mu {
        for b in mu {
            pairs.push(a + b);
        }
    }
    pairs.sort_by(f64::total_cmp);
    // For each p, count q with p + q < threshold; q ranges shrink as p grows.
    let mut count = 0u64;
    let mut hi = pairs.len();
    for p in &pairs {
        while hi > 0 && p + pairs[hi - 1] >= NEGATIVE_THRESHOLD {
            hi -= 1;
        }
        count += hi as u64;
    }
    count
}

/// Number of eigenvalues of the discrete `-Δ - V` below
/// [`NEGATIVE_THRESHOLD`], compared with `l_const * int V^2`.
pub fn clr_count(spec: &ClrSpec, l_const: f64) -> Result<ClrReport> {
    validate(spec)?;
    let t = one_dimensional(spec);
    let mu0 = t.eigenvalue(0);
    // Only mu_a < threshold - 3 mu_0 can appear in a negative 4-sum.
    let cap = NEGATIVE_THRESHOLD - 3.0 * mu0;
    let k = t.count_below(cap);
    let mu: Vec<f64> = (0..k).map(|i| t.eigenvalue(i)).collect();
    let negative_count = count_negative_sums(&mu);
    let (i1, i2) = spec.profile.moments(spec.box_length);
    let lb = spec.box_length;
    let integral_v2 = 4.0 * lb.powi(3) * i2 + 12.0 * lb * lb * i1 * i1;
    let bound = l_const * integral_v2;
    let ratio = if negative_count == 0 {
        0.0
    } else {
        negative_count as f64 / bound
    };
    Ok(ClrReport {
        spec: *spec,
        negative_count,
        integral_v2,
        bound,
        ratio,
        holds: negative_count as f64 <= bound,
    })
}

/// Runs [`clr_count`] over a family of potentials in dimension `d`. Only
/// `d = 4` is supported.
pub fn clr_cross_check(d: u32, family: &[ClrSpec], l_const: f64) -> Result<Vec<ClrReport>> {
    if d != 4 {
        return Err(Error::Unsupported(format!("CLR cross-check is implemented for d = 4, got {d}")));
    }
    family.iter().map(|s| clr_count(s, l_const)).collect()
}

/// Square wells of growing depth and width in a box of side 8.
pub fn deep_well_family() -> Vec<ClrSpec> {
    let mut out = Vec::new();
    for radius in [0.5, 1.0, 2.0] {
        for depth in [5.0, 20.0, 80.0, 320.0] {
            out.push(ClrSpec {
                profile: WellProfile::Square { depth, radius },
                box_length: 8.0,
                points: 160,
            });
        }
    }
    out
}
