//! Distance-dependent carrier, 3-dB band and required transmit power.

use serde::{Deserialize, Serialize};

use crate::acoustics::{
    inverse_path_loss, linear_to_db, noise_psd_linear, path_loss_db_unchecked, Environment,
};
use crate::error::{positive, Error, Result};
use crate::numeric::{adaptive_simpson, bisect, golden_section};

/// Factor-two (3-dB) drop in the narrow-band SNR.
pub const THREE_DB: f64 = 3.010_299_956_639_812;

/// Converts acoustic source level units (uPa) to electrical Watts before
/// dividing by the efficiency.
pub const UPA_TO_WATT: f64 = 6.309_573_444_801_929e-18; // 10^-17.2

/// How the optimal carrier is located.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySearch {
    pub window_lo_khz: f64,
    pub window_hi_khz: f64,
    /// Coarse scan resolution.
    pub scan_step_khz: f64,
    /// Golden-section stopping width.
    pub refine_tol_khz: f64,
}

impl Default for FrequencySearch {
    fn default() -> Self {
        Self {
            window_lo_khz: 0.1,
            window_hi_khz: 200.0,
            scan_step_khz: 0.01,
            refine_tol_khz: 1e-4,
        }
    }
}

/// The 3-dB band around the optimal carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub f0_khz: f64,
    pub f_lo_khz: f64,
    pub f_hi_khz: f64,
    pub width_khz: f64,
}

/// Per-hop quantities used by the energy models. The transmit power scales
/// linearly with the target SNR, so it is stored per unit of linear SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopBudget {
    pub band: FrequencyBand,
    /// Acoustic transmit power in uPa needed for SNR = 1 (0 dB).
    pub acoustic_power_unit_snr: f64,
}

impl HopBudget {
    pub fn bandwidth_hz(&self) -> f64 {
        self.band.width_khz * 1e3
    }

    pub fn acoustic_power(&self, snr0_db: f64) -> f64 {
        self.acoustic_power_unit_snr * 10f64.powf(snr0_db / 10.0)
    }
}

/// Link-budget calculator for one environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub env: Environment,
    pub search: FrequencySearch,
    /// Relative tolerance of the band integrals.
    pub quad_rel_tol: f64,
}

impl LinkBudget {
    pub fn new(env: Environment) -> Self {
        Self {
            env,
            search: FrequencySearch::default(),
            quad_rel_tol: 1e-8,
        }
    }

    pub fn with_search(mut self, search: FrequencySearch) -> Self {
        self.search = search;
        self
    }

    #[inline]
    fn product_db(&self, l: f64, f: f64) -> f64 {
        path_loss_db_unchecked(l, f, self.env.k) + linear_to_db(noise_psd_linear(f, &self.env))
    }

    /// Optimal carrier and the product value (dB) there.
    fn optimum(&self, l: f64) -> Result<(f64, f64)> {
        positive("l", l)?;
        let FrequencySearch {
            window_lo_khz: lo,
            window_hi_khz: hi,
            scan_step_khz: step,
            refine_tol_khz: tol,
        } = self.search;
        positive("scan step", step)?;
        if !(lo > 0.0 && hi > lo + 2.0 * step) {
            return Err(Error::Config(format!("frequency window [{lo}, {hi}] kHz is too narrow")));
        }
        let n = ((hi - lo) / step).floor() as usize;
        let grid = |i: usize| if i > n { hi } else { lo + step * i as f64 };
        let last = if lo + step * n as f64 >= hi { n } else { n + 1 };

        let mut best = (0usize, f64::INFINITY);
        for i in 0..=last {
            let v = self.product_db(l, grid(i));
            if v < best.1 {
                best = (i, v);
            }
        }
        let (i, _) = best;
        if i == 0 || i == last {
            return Err(Error::BoundaryMinimizer {
                distance_km: l,
                frequency_khz: grid(i),
            });
        }
        let (f0, v0) = golden_section(|f| self.product_db(l, f), grid(i - 1), grid(i + 1), tol);
        Ok((f0, v0))
    }

    /// Frequency (kHz) minimising `A(l, f) N(f)` inside the search window.
    pub fn optimal_frequency(&self, l_km: f64) -> Result<f64> {
        self.optimum(l_km).map(|(f, _)| f)
    }

    /// Band where `1 / [A N]` stays within a factor two of its maximum.
    pub fn effective_band(&self, l_km: f64) -> Result<FrequencyBand> {
        let (f0, v0) = self.optimum(l_km)?;
        let target = v0 + THREE_DB;
        let g = |f: f64| self.product_db(l_km, f) - target;
        let (lo, hi) = (self.search.window_lo_khz, self.search.window_hi_khz);
        if g(lo) <= 0.0 {
            return Err(Error::BandTruncation {
                distance_km: l_km,
                edge: "lower",
            });
        }
        if g(hi) <= 0.0 {
            return Err(Error::BandTruncation {
                distance_km: l_km,
                edge: "upper",
            });
        }
        let f_lo = bisect(g, lo, f0, 1e-13);
        let f_hi = bisect(g, f0, hi, 1e-13);
        Ok(FrequencyBand {
            f0_khz: f0,
            f_lo_khz: f_lo,
            f_hi_khz: f_hi,
            width_khz: f_hi - f_lo,
        })
    }

    /// `(integral of N, integral of 1/A)` over the band, with `df` in kHz.
    pub fn band_integrals(&self, l_km: f64, band: &FrequencyBand) -> (f64, f64) {
        let env = &self.env;
        let noise = adaptive_simpson(
            |f| noise_psd_linear(f, env),
            band.f_lo_khz,
            band.f_hi_khz,
            self.quad_rel_tol,
        );
        let gain = adaptive_simpson(
            |f| inverse_path_loss(l_km, f, env.k),
            band.f_lo_khz,
            band.f_hi_khz,
            self.quad_rel_tol,
        );
        (noise, gain)
    }

    /// Band plus the transmit power per unit target SNR at distance `l_km`.
    pub fn hop_budget(&self, l_km: f64) -> Result<HopBudget> {
        let band = self.effective_band(l_km)?;
        let (noise, gain) = self.band_integrals(l_km, &band);
        Ok(HopBudget {
            band,
            acoustic_power_unit_snr: 1e3 * band.width_khz * noise / gain,
        })
    }

    /// Acoustic transmit power in uPa for target SNR `snr0_db` (dB) at `l_km`,
    /// assuming flat allocation over the 3-dB band.
    pub fn required_transmit_power_acoustic(&self, l_km: f64, snr0_db: f64) -> Result<f64> {
        if !snr0_db.is_finite() {
            return Err(Error::domain("snr0", snr0_db, "must be finite"));
        }
        Ok(self.hop_budget(l_km)?.acoustic_power(snr0_db))
    }

    /// Electrical transmit power in W.
    pub fn required_transmit_power_w(&self, l_km: f64, snr0_db: f64) -> Result<f64> {
        electrical_power(self.required_transmit_power_acoustic(l_km, snr0_db)?, &self.env)
    }
}

/// Electrical power in W drawn to radiate acoustic power `p_upa`.
pub fn electrical_power(p_upa: f64, env: &Environment) -> Result<f64> {
    if !(p_upa.is_finite() && p_upa >= 0.0) {
        return Err(Error::domain("p", p_upa, "must be finite and >= 0"));
    }
    Ok(p_upa * UPA_TO_WATT / env.eta)
}

pub fn optimal_frequency(l_km: f64, env: &Environment) -> Result<f64> {
    LinkBudget::new(*env).optimal_frequency(l_km)
}

pub fn effective_band(l_km: f64, env: &Environment) -> Result<FrequencyBand> {
    LinkBudget::new(*env).effective_band(l_km)
}

pub fn required_transmit_power_acoustic(l_km: f64, snr0_db: f64, env: &Environment) -> Result<f64> {
    LinkBudget::new(*env).required_transmit_power_acoustic(l_km, snr0_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::attenuation_noise_product_db;
    use crate::numeric::logspace;
    use approx::assert_relative_eq;

    fn lb() -> LinkBudget {
        LinkBudget::new(Environment::default())
    }

    /// Exhaustive 1 Hz scan over [0.1, 200] kHz.
    fn scan_argmin_1hz(l: f64, env: &Environment) -> f64 {
        (100..=200_000u32)
            .map(|i| i as f64 * 1e-3)
            .map(|f| (f, attenuation_noise_product_db(l, f, env).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    }

    #[test]
    fn optimal_frequency_matches_exhaustive_scan() {
        let env = Environment::default();
        // frozen from the 1 Hz scan oracle below (and an independent scipy run)
        let frozen = [(5.0, 8.625), (10.0, 5.922), (50.0, 2.076)];
        for (l, f_grid) in frozen {
            assert_relative_eq!(scan_argmin_1hz(l, &env), f_grid, epsilon = 1e-9);
            let f0 = lb().optimal_frequency(l).unwrap();
            assert!((f0 - f_grid).abs() <= 1e-3, "l = {l}: {f0} vs {f_grid}");
        }
        assert_relative_eq!(lb().optimal_frequency(10.0).unwrap(), 5.921_891_75, epsilon = 2e-4);
    }

    #[test]
    fn optimal_frequency_shifts_down_with_range() {
        let lb = lb();
        assert!(lb.optimal_frequency(5.0).unwrap() > lb.optimal_frequency(50.0).unwrap());
    }

    #[test]
    fn optimal_frequency_independent_of_scan_resolution() {
        let a = lb().with_search(FrequencySearch { scan_step_khz: 0.001, ..Default::default() });
        let b = lb().with_search(FrequencySearch { scan_step_khz: 0.0005, ..Default::default() });
        let fa = a.optimal_frequency(10.0).unwrap();
        let fb = b.optimal_frequency(10.0).unwrap();
        assert!((fa - fb).abs() < 2e-4);
    }

    #[test]
    fn narrow_window_reports_boundary_minimizer() {
        let lb = lb().with_search(FrequencySearch {
            window_lo_khz: 10.0,
            window_hi_khz: 30.0,
            ..Default::default()
        });
        assert!(matches!(lb.optimal_frequency(10.0), Err(Error::BoundaryMinimizer { .. })));
    }

    #[test]
    fn truncated_band_is_an_error() {
        let lb = lb().with_search(FrequencySearch {
            window_lo_khz: 4.0,
            window_hi_khz: 8.0,
            ..Default::default()
        });
        assert!(matches!(lb.effective_band(10.0), Err(Error::BandTruncation { .. })));
    }

    #[test]
    fn band_at_ten_km_matches_reference() {
        let b = lb().effective_band(10.0).unwrap();
        assert_relative_eq!(b.f_lo_khz, 2.464_035_87, epsilon = 1e-6);
        assert_relative_eq!(b.f_hi_khz, 10.133_110_65, epsilon = 1e-6);
    }

    #[test]
    fn band_edges_sit_three_db_up() {
        let env = Environment::default();
        let lb = lb();
        for l in logspace(1.0, 100.0, 15) {
            let b = lb.effective_band(l).unwrap();
            assert!(b.f_lo_khz < b.f0_khz && b.f0_khz < b.f_hi_khz && b.width_khz > 0.0);
            let p0 = attenuation_noise_product_db(l, b.f0_khz, &env).unwrap();
            for f in [b.f_lo_khz, b.f_hi_khz] {
                let p = attenuation_noise_product_db(l, f, &env).unwrap();
                assert!((p - p0 - THREE_DB).abs() < 1e-3, "l = {l}, f = {f}");
            }
        }
    }

    #[test]
    fn bandwidth_shrinks_with_range() {
        let lb = lb();
        let w1 = lb.effective_band(1.0).unwrap().width_khz;
        assert!(w1 > 20.0 && w1 < 40.0, "{w1}");
        assert!(lb.effective_band(11.0).unwrap().width_khz < 10.0);
        let widths: Vec<f64> = logspace(1.0, 100.0, 25)
            .into_iter()
            .map(|l| lb.effective_band(l).unwrap().width_khz)
            .collect();
        assert!(widths.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn power_scales_linearly_with_snr() {
        let lb = lb();
        let p = lb.required_transmit_power_acoustic(7.0, 12.0).unwrap();
        let p2 = lb.required_transmit_power_acoustic(7.0, 12.0 + 10.0 * 2f64.log10()).unwrap();
        assert_relative_eq!(p2, 2.0 * p, max_relative = 1e-12);
    }

    #[test]
    fn power_reference_values() {
        let lb = lb();
        // scipy quad reference
        assert_relative_eq!(lb.required_transmit_power_acoustic(10.0, 0.0).unwrap(), 6.783_028_7e13, max_relative = 1e-6);
        assert_relative_eq!(lb.required_transmit_power_w(50.0, 20.0).unwrap(), 7.601_117, max_relative = 1e-6);
        let p1 = lb.required_transmit_power_w(1.0, 20.0).unwrap();
        assert!(p1 < 1.0, "{p1}");
    }

    #[test]
    fn power_quadrature_converged() {
        let coarse = lb();
        let fine = LinkBudget { quad_rel_tol: 1e-8 / 4.0, ..coarse };
        for l in [1.0, 10.0, 60.0] {
            let a = coarse.required_transmit_power_acoustic(l, 15.0).unwrap();
            let b = fine.required_transmit_power_acoustic(l, 15.0).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-6);
        }
    }

    #[test]
    fn power_increases_with_range() {
        let lb = lb();
        let p: Vec<f64> = logspace(1.0, 100.0, 25)
            .into_iter()
            .map(|l| lb.required_transmit_power_w(l, 20.0).unwrap())
            .collect();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn hz_and_khz_integration_agree() {
        let lb = lb();
        let env = lb.env;
        for l in [2.0, 20.0, 90.0] {
            let band = lb.effective_band(l).unwrap();
            let (lo_hz, hi_hz) = (band.f_lo_khz * 1e3, band.f_hi_khz * 1e3);
            let noise = adaptive_simpson(|fh| noise_psd_linear(fh * 1e-3, &env), lo_hz, hi_hz, 1e-12);
            let gain = adaptive_simpson(|fh| inverse_path_loss(l, fh * 1e-3, env.k), lo_hz, hi_hz, 1e-12);
            let p_hz = (band.width_khz * 1e3) * noise / gain;
            let p_khz = LinkBudget { quad_rel_tol: 1e-12, ..lb }
                .required_transmit_power_acoustic(l, 0.0)
                .unwrap();
            assert_relative_eq!(p_hz, p_khz, max_relative = 1e-9);
        }
    }

    #[test]
    fn electrical_conversion() {
        let env = Environment::default();
        assert_eq!(electrical_power(0.0, &env).unwrap(), 0.0);
        let unity = Environment { eta: 1.0, ..env };
        assert_relative_eq!(electrical_power(10f64.powf(17.2), &unity).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(electrical_power(10f64.powf(17.2), &env).unwrap(), 4.0, max_relative = 1e-12);
        assert!(electrical_power(-1.0, &env).is_err());
    }
}
