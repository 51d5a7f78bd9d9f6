use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::rng::{Domain, GaussianStream};

/// Law of `|N(0, scale^2)|`; `scale = 0` is the point mass at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FoldedNormal {
    scale: f64,
}

/// Marginal at time `t` of a driftless Brownian motion with volatility `sigma`
/// started at 0 and reflected at 0, i.e. `|N(0, sigma^2 t)|`.
pub fn analytic_rbm_marginal(t: f64, sigma: f64, drift: f64) -> Result<FoldedNormal> {
    if drift != 0.0 {
        return invalid(format!("closed form only holds without drift, got b = {drift}"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return invalid(format!("time must be nonnegative, got {t}"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return invalid(format!("volatility must be positive, got {sigma}"));
    }
    Ok(FoldedNormal {
        scale: sigma * t.sqrt(),
    })
}

impl FoldedNormal {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return invalid(format!("scale must be nonnegative, got {scale}"));
        }
        Ok(Self { scale })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_point_mass(&self) -> bool {
        self.scale == 0.0
    }

    /// `scale * sqrt(2 / pi)`.
    pub fn mean(&self) -> f64 {
        self.scale * (2.0 / std::f64::consts::PI).sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else if self.is_point_mass() {
            1.0
        } else {
            2.0 * std_normal().cdf(x / self.scale) - 1.0
        }
    }

    /// Inverse distribution function on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.is_point_mass() || u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            f64::INFINITY
        } else {
            let normal = std_normal();
            let target = 0.5 + 0.5 * u;
            let mut z = normal.inverse_cdf(target);
            // one Newton step tightens the library approximation
            z -= (normal.cdf(z) - target) / density(z);
            self.scale * z
        }
    }

    /// `E[X; X <= q]`.
    pub fn partial_mean(&self, q: f64) -> f64 {
        if self.is_point_mass() || q <= 0.0 {
            return 0.0;
        }
        2.0 * self.scale * (density(0.0) - density(q / self.scale))
    }

    pub fn sample(&self, seed: u64, count: usize) -> Vec<f64> {
        let mut g = GaussianStream::new(seed, Domain::Auxiliary, 0);
        (0..count).map(|_| (self.scale * g.next_standard()).abs()).collect()
    }
}

fn density(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}
