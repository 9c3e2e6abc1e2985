//! Channel physics: Thorp absorption, spreading loss and the four-component
//! ambient noise model.
//!
//! Frequencies are in kHz and distances in km throughout. Everything is
//! evaluated in linear power internally; the `*_db` functions are thin
//! conversions at the API boundary.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Physical context of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Spreading factor: 1 cylindrical, 1.5 practical, 2 spherical.
    pub k: f64,
    /// Shipping activity in `[0, 1]`.
    pub s: f64,
    /// Wind speed in m/s.
    pub w: f64,
    /// Sound speed in m/s.
    pub c: f64,
    /// Power-amplifier and transducer efficiency in `(0, 1]`.
    pub eta: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Self {
            k: 1.5,
            s: 0.5,
            w: 0.0,
            c: 1500.0,
            eta: 0.25,
        }
    }
}

impl Environment {
    pub fn new(k: f64, s: f64, w: f64, c: f64, eta: f64) -> Result<Self> {
        let env = Self { k, s, w, c, eta };
        env.validate()?;
        Ok(env)
    }

    /// Rejects out-of-range fields. Values are never clamped.
    pub fn validate(&self) -> Result<()> {
        positive("k", self.k)?;
        if !(self.s.is_finite() && (0.0..=1.0).contains(&self.s)) {
            return Err(Error::domain("s", self.s, "must lie in [0, 1]"));
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return Err(Error::domain("w", self.w, "must be finite and >= 0"));
        }
        positive("c", self.c)?;
        if !(self.eta.is_finite() && self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain("eta", self.eta, "must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub(crate) fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thorp absorption coefficient in dB/km, without argument checks.
#[inline]
pub(crate) fn thorp(f: f64) -> f64 {
    let f2 = f * f;
    0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003
}

/// Absorption coefficient in dB/km at `f_khz`.
pub fn absorption_db_per_km(f_khz: f64) -> Result<f64> {
    positive("f", f_khz)?;
    Ok(thorp(f_khz))
}

#[inline]
pub(crate) fn path_loss_db_unchecked(l_km: f64, f_khz: f64, k: f64) -> f64 {
    k * 10.0 * (l_km * 1e3).log10() + l_km * thorp(f_khz)
}

/// Path loss `10 log10 A(l, f)` in dB: spreading relative to 1 m plus absorption.
pub fn path_loss_db(l_km: f64, f_khz: f64, env: &Environment) -> Result<f64> {
    positive("l", l_km)?;
    positive("f", f_khz)?;
    Ok(path_loss_db_unchecked(l_km, f_khz, env.k))
}

/// Inverse path loss `1 / A(l, f)` as a linear gain.
#[inline]
pub(crate) fn inverse_path_loss(l_km: f64, f_khz: f64, k: f64) -> f64 {
    db_to_linear(-path_loss_db_unchecked(l_km, f_khz, k))
}

/// Per-component noise spectral levels in dB re uPa^2/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseComponents {
    pub turbulence_db: f64,
    pub shipping_db: f64,
    pub wind_db: f64,
    pub thermal_db: f64,
}

impl NoiseComponents {
    pub fn total_linear(&self) -> f64 {
        db_to_linear(self.turbulence_db)
            + db_to_linear(self.shipping_db)
            + db_to_linear(self.wind_db)
            + db_to_linear(self.thermal_db)
    }
}

#[inline]
pub(crate) fn noise_components_unchecked(f: f64, s: f64, w: f64) -> NoiseComponents {
    let lf = f.log10();
    NoiseComponents {
        turbulence_db: 17.0 - 30.0 * lf,
        shipping_db: 40.0 + 20.0 * (s - 0.5) + 26.0 * lf - 60.0 * (f + 0.03).log10(),
        wind_db: 50.0 + 7.5 * w.sqrt() + 20.0 * lf - 40.0 * (f + 0.4).log10(),
        thermal_db: -15.0 + 20.0 * lf,
    }
}

pub fn noise_components(f_khz: f64, env: &Environment) -> Result<NoiseComponents> {
    positive("f", f_khz)?;
    Ok(noise_components_unchecked(f_khz, env.s, env.w))
}

/// Total ambient noise p.s.d. in linear units (uPa^2/Hz).
#[inline]
pub(crate) fn noise_psd_linear(f: f64, env: &Environment) -> f64 {
    noise_components_unchecked(f, env.s, env.w).total_linear()
}

/// Total ambient noise p.s.d. in dB re uPa^2/Hz.
pub fn noise_psd_db(f_khz: f64, env: &Environment) -> Result<f64> {
    Ok(linear_to_db(noise_components(f_khz, env)?.total_linear()))
}

/// `10 log10 [A(l, f) N(f)]`, the quantity whose minimum over `f` fixes the
/// best carrier for a given range.
pub fn attenuation_noise_product_db(l_km: f64, f_khz: f64, env: &Environment) -> Result<f64> {
    Ok(path_loss_db(l_km, f_khz, env)? + noise_psd_db(f_khz, env)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn attenuation_noise_product(l: f64, f: f64, env: &Environment) -> f64 {
        db_to_linear(path_loss_db_unchecked(l, f, env.k)) * noise_psd_linear(f, env)
    }

    #[test]
    fn thorp_reference_points() {
        assert_relative_eq!(absorption_db_per_km(1.0).unwrap(), 0.069004, epsilon = 1e-6);
        assert_relative_eq!(absorption_db_per_km(10.0).unwrap(), 1.18703, epsilon = 1e-5);
        assert!((absorption_db_per_km(1e-3).unwrap() - 0.003).abs() < 1e-6);
    }

    #[test]
    fn thorp_rejects_bad_frequency() {
        for f in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(absorption_db_per_km(f), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn thorp_strictly_increasing() {
        let mut prev = thorp(1e-3);
        let mut f = 1e-3;
        while f < 500.0 {
            f *= 1.01;
            let a = thorp(f);
            assert!(a > prev, "not increasing at {f}");
            prev = a;
        }
    }

    #[test]
    fn path_loss_reference_points() {
        let env = Environment::default();
        // 1 m: no spreading loss.
        let pl = path_loss_db(0.001, 20.0, &env).unwrap();
        assert_relative_eq!(pl, 0.001 * thorp(20.0), epsilon = 1e-12);
        assert_relative_eq!(path_loss_db(1.0, 1e-9, &env).unwrap(), 45.003, epsilon = 1e-9);
        let cyl = Environment { k: 1.0, ..env };
        assert_relative_eq!(path_loss_db(1.0, 1e-9, &cyl).unwrap(), 30.003, epsilon = 1e-9);
        assert!(path_loss_db(0.0, 1.0, &env).is_err());
        assert!(path_loss_db(1.0, -2.0, &env).is_err());
    }

    #[test]
    fn path_loss_separates_spreading_and_absorption() {
        let env = Environment::default();
        for &f in &[0.5, 3.0, 17.0, 80.0] {
            for &l in &[0.3, 2.0, 11.0, 75.0] {
                let lhs = path_loss_db(l, f, &env).unwrap() - path_loss_db(1.0, f, &env).unwrap();
                let rhs = env.k * 10.0 * l.log10() + (l - 1.0) * thorp(f);
                assert_relative_eq!(lhs, rhs, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn noise_components_at_one_khz() {
        let env = Environment::default();
        let c = noise_components(1.0, &env).unwrap();
        assert_relative_eq!(c.turbulence_db, 17.0, epsilon = 1e-12);
        assert_relative_eq!(c.shipping_db, 39.230, epsilon = 5e-4);
        assert_relative_eq!(c.wind_db, 44.155, epsilon = 5e-4);
        assert_relative_eq!(c.thermal_db, -15.0, epsilon = 1e-12);
        assert_relative_eq!(noise_psd_db(1.0, &env).unwrap(), 45.3726, epsilon = 1e-4);
    }

    #[test]
    fn noise_thermal_dominated_at_100_khz() {
        let env = Environment::default();
        let c = noise_components(100.0, &env).unwrap();
        assert_relative_eq!(c.thermal_db, 25.0, epsilon = 1e-12);
        assert_relative_eq!(noise_psd_db(100.0, &env).unwrap(), 25.1331, epsilon = 1e-4);
    }

    #[test]
    fn wind_raises_noise_everywhere() {
        let calm = Environment::default();
        let windy = Environment { w: 10.0, ..calm };
        let mut f = 0.1;
        while f <= 100.0 {
            assert!(noise_psd_db(f, &windy).unwrap() > noise_psd_db(f, &calm).unwrap());
            f *= 1.1;
        }
    }

    #[test]
    fn noise_summation_is_associative() {
        let env = Environment { s: 0.8, w: 4.0, ..Default::default() };
        for &f in &[0.05, 0.7, 4.0, 33.0, 150.0] {
            let c = noise_components(f, &env).unwrap();
            let parts = [c.turbulence_db, c.shipping_db, c.wind_db, c.thermal_db];
            let direct = noise_psd_linear(f, &env);
            let other: f64 = parts.iter().rev().map(|&d| 10f64.powf(d / 10.0)).sum();
            assert_relative_eq!(direct, other, max_relative = 1e-12);
        }
    }

    #[test]
    fn product_is_sum_of_parts() {
        let env = Environment::default();
        for &(l, f) in &[(1.0, 10.0), (10.0, 5.9), (50.0, 2.0)] {
            let p = attenuation_noise_product_db(l, f, &env).unwrap();
            let parts = path_loss_db(l, f, &env).unwrap() + noise_psd_db(f, &env).unwrap();
            assert!((p - parts).abs() < 1e-12);
            assert_relative_eq!(
                linear_to_db(attenuation_noise_product(l, f, &env)),
                p,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn product_increases_with_distance() {
        let env = Environment::default();
        let a = attenuation_noise_product_db(5.0, 7.0, &env).unwrap();
        let b = attenuation_noise_product_db(6.0, 7.0, &env).unwrap();
        assert!(a < b);
    }

    #[test]
    fn environment_rejects_out_of_range() {
        assert!(Environment::new(1.5, 1.2, 0.0, 1500.0, 0.25).is_err());
        assert!(Environment::new(1.5, -0.1, 0.0, 1500.0, 0.25).is_err());
        assert!(Environment::new(1.5, 0.5, -1.0, 1500.0, 0.25).is_err());
        assert!(Environment::new(1.5, 0.5, 0.0, 0.0, 0.25).is_err());
        assert!(Environment::new(1.5, 0.5, 0.0, 1500.0, 1.5).is_err());
        assert!(Environment::new(0.0, 0.5, 0.0, 1500.0, 0.25).is_err());
        assert!(Environment::new(2.0, 1.0, 12.0, 1520.0, 1.0).is_ok());
    }
}
