//! Problem constants for the symmetric minimal surface equation
//!
//! The equation is parametrized by two integers: the symmetry dimension
//! `m >= 2` appearing in the right-hand side `(m-1)/(u sqrt(1+|Du|^2))`,
//! and the base dimension `n >= 1` of the domain. The model singular
//! solution is the cone `u(x) = sqrt((m-1)/(n-1)) |x|` (defined for
//! `n >= 2`).

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    /// Symmetry dimension; the symmetric graph lives in `R^{n+m}`.
    pub m: u32,
    /// Base dimension. The grid solver requires `n = 2`; the radial
    /// module accepts any `n >= 1`.
    pub n: u32,
}

impl Params {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadParams(format!("m must be >= 2, got {m}")));
        }
        if n < 1 {
            return Err(Error::BadParams(format!("n must be >= 1, got {n}")));
        }
        Ok(Params { m, n })
    }

    /// Slope of the cone solution, `sqrt((m-1)/(n-1))`. Only defined for `n >= 2`.
    pub fn cone_slope(&self) -> f64 {
        assert!(self.n >= 2, "cone slope is undefined for n = {}", self.n);
        (((self.m - 1) as f64) / ((self.n - 1) as f64)).sqrt()
    }

    /// Area of the unit `(m-1)`-sphere, `2 pi^{m/2} / Gamma(m/2)`.
    pub fn sigma_m1(&self) -> f64 {
        let m = self.m as i64;
        2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / gamma_half(m)
    }

    pub fn m_f(&self) -> f64 {
        self.m as f64
    }

    pub fn n_f(&self) -> f64 {
        self.n as f64
    }
}

/// `Gamma(k/2)` for a positive integer `k`, exact up to f64 rounding.
///
/// Even `k = 2j`: `(j-1)!`. Odd `k = 2j+1`: `(2j)! sqrt(pi) / (4^j j!)`.
fn gamma_half(k: i64) -> f64 {
    assert!(k >= 1);
    if k % 2 == 0 {
        let j = k / 2;
        (1..j).map(|i| i as f64).product::<f64>()
    } else {
        let j = (k - 1) / 2;
        let mut val = std::f64::consts::PI.sqrt();
        // Gamma(x+1) = x Gamma(x), starting from Gamma(1/2) = sqrt(pi)
        for i in 0..j {
            val *= i as f64 + 0.5;
        }
        val
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Params::new(1, 2).is_err());
        assert!(Params::new(2, 0).is_err());
        assert!(Params::new(2, 1).is_ok());
    }

    #[test]
    fn cone_slope_identity() {
        for (m, n) in [(2, 2), (3, 2), (4, 4), (5, 3), (7, 2)] {
            let p = Params::new(m, n).unwrap();
            let a = p.cone_slope();
            // a^2 (n-1) = (m-1) exactly within floating tolerance
            assert!((a * a * (n as f64 - 1.0) - (m as f64 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        // circle, 2-sphere, 3-sphere
        assert!((Params::new(2, 2).unwrap().sigma_m1() - 2.0 * PI).abs() < 1e-12);
        assert!((Params::new(3, 2).unwrap().sigma_m1() - 4.0 * PI).abs() < 1e-12);
        assert!((Params::new(4, 2).unwrap().sigma_m1() - 2.0 * PI * PI).abs() < 1e-12);
    }
}
