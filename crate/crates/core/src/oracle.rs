//! Brute-force reference answers on the exact channel: every hop is priced
//! with its own optimal band and band-integrated transmit power instead of
//! the fitted power laws.

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::Environment;
use crate::error::{positive, Error, Result};
use crate::linkbudget::{electrical_power, HopBudget, LinkBudget};
use crate::planner::LinkSpec;

/// Hop distances are memoized on a 1e-9 km lattice.
const KEY_SCALE: f64 = 1e9;

/// Exact per-hop energy model with a concurrent memo of link budgets.
///
/// A [`HopBudget`] does not depend on the target SNR or the receive power,
/// so one model can serve sweeps over both.
#[derive(Debug)]
pub struct ExactModel {
    lb: LinkBudget,
    cache: DashMap<u64, HopBudget>,
}

impl ExactModel {
    pub fn new(env: Environment) -> Result<Self> {
        Self::with_link_budget(LinkBudget::new(env))
    }

    pub fn with_link_budget(lb: LinkBudget) -> Result<Self> {
        lb.env.validate()?;
        Ok(Self {
            lb,
            cache: DashMap::new(),
        })
    }

    pub fn env(&self) -> &Environment {
        &self.lb.env
    }

    pub fn link_budget(&self) -> &LinkBudget {
        &self.lb
    }

    /// Number of memoized hop distances.
    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    /// Link budget of a hop of `d` km, memoized.
    pub fn hop(&self, d_km: f64) -> Result<HopBudget> {
        positive("d", d_km)?;
        let key = (d_km * KEY_SCALE).round() as u64;
        if let Some(h) = self.cache.get(&key) {
            return Ok(*h);
        }
        // evaluate at the lattice point so results never depend on which
        // caller filled the entry first
        let h = self.lb.hop_budget(key as f64 / KEY_SCALE)?;
        self.cache.insert(key, h);
        Ok(h)
    }

    /// Energy of one hop of `d` km: radiation time times transmit plus
    /// receive power.
    pub fn hop_energy(&self, d_km: f64, spec: &LinkSpec) -> Result<f64> {
        let h = self.hop(d_km)?;
        let p_t = electrical_power(h.acoustic_power(spec.snr0_db), &self.lb.env)?;
        Ok(spec.bits() / (spec.alpha * h.bandwidth_hz()) * (p_t + spec.p_r_w))
    }

    fn hop_time(&self, d_km: f64, spec: &LinkSpec) -> Result<f64> {
        Ok(spec.bits() / (spec.alpha * self.hop(d_km)?.bandwidth_hz()))
    }

    /// Two-hop energy with the relay at `x_km`; `x = 0` or `x = l` is direct
    /// transmission.
    pub fn energy(&self, x_km: f64, spec: &LinkSpec) -> Result<f64> {
        spec.validate()?;
        let l = spec.l_km;
        if !(x_km >= 0.0 && x_km <= l) {
            return Err(Error::domain("x", x_km, "must lie in [0, l]"));
        }
        if x_km == 0.0 || x_km == l {
            return self.hop_energy(l, spec);
        }
        Ok(self.hop_energy(x_km, spec)? + self.hop_energy(l - x_km, spec)?)
    }

    /// End-to-end delay with the relay at `x_km` (direct at either end).
    pub fn delay(&self, x_km: f64, spec: &LinkSpec) -> Result<f64> {
        spec.validate()?;
        let l = spec.l_km;
        if !(x_km >= 0.0 && x_km <= l) {
            return Err(Error::domain("x", x_km, "must lie in [0, l]"));
        }
        let radiate = if x_km == 0.0 || x_km == l {
            self.hop_time(l, spec)?
        } else {
            self.hop_time(x_km, spec)? + self.hop_time(l - x_km, spec)?
        };
        Ok(radiate + l * 1e3 / self.lb.env.c)
    }

    /// Exhaustive search over `{0, step, 2 step, ..., l}`.
    pub fn grid_argmin_relay(&self, spec: &LinkSpec, step_km: f64) -> Result<OracleResult> {
        spec.validate()?;
        positive("step", step_km)?;
        if step_km > spec.l_km / 4.0 {
            return Err(Error::domain("step", step_km, "must be <= l/4"));
        }
        let xs = position_grid(spec.l_km, step_km);
        let energies = xs
            .par_iter()
            .map(|&x| self.energy(x, spec))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, e) in energies.iter().enumerate() {
            if *e < energies[best] {
                best = i;
            }
        }
        Ok(OracleResult {
            best_x: xs[best],
            best_energy_joule: energies[best],
            grid_step: step_km,
            energy_curve: xs.into_iter().zip(energies).collect(),
        })
    }

    /// [`grid_argmin_relay`](Self::grid_argmin_relay) with the default
    /// `l / 400` step.
    pub fn argmin_relay(&self, spec: &LinkSpec) -> Result<OracleResult> {
        self.grid_argmin_relay(spec, default_step(spec.l_km))
    }

    /// Direct energy minus the cheapest interior relay on an absolute
    /// position lattice. Positive once relaying pays off.
    pub fn relay_gain(&self, spec: &LinkSpec, x_step_km: f64) -> Result<f64> {
        spec.validate()?;
        positive("x step", x_step_km)?;
        let xs = position_grid(spec.l_km, x_step_km);
        let inner = &xs[1..xs.len() - 1];
        if inner.is_empty() {
            return Ok(f64::NEG_INFINITY);
        }
        let best = inner
            .par_iter()
            .map(|&x| self.energy(x, spec))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        Ok(self.hop_energy(spec.l_km, spec)? - best)
    }

    /// Smallest distance at which an interior relay beats direct
    /// transmission, interpolated linearly between the last grid distance
    /// where the optimum is an endpoint and the first where it is interior.
    pub fn realistic_open_distance(
        &self,
        snr0_db: f64,
        p_r_w: f64,
        l_grid: &[f64],
        sweep: &TurningPointSweep,
    ) -> Result<f64> {
        if l_grid.len() < 2 || l_grid.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::Bracket("distance grid must be strictly increasing with >= 2 points".into()));
        }
        let gain = |l: f64| {
            let spec = LinkSpec::new(l, snr0_db, p_r_w, sweep.packet_bits, sweep.alpha)?;
            self.relay_gain(&spec, sweep.x_step_km)
        };
        let mut prev = (l_grid[0], gain(l_grid[0])?);
        if prev.1 > 0.0 {
            return Err(Error::Bracket(format!(
                "relaying already optimal at the first grid distance {} km",
                l_grid[0]
            )));
        }
        for &l in &l_grid[1..] {
            let g = gain(l)?;
            if g > 0.0 {
                let (l0, g0) = prev;
                if !g0.is_finite() {
                    return Ok(l);
                }
                return Ok(l0 + (l - l0) * (-g0) / (g - g0));
            }
            prev = (l, g);
        }
        Err(Error::Bracket(format!(
            "no turning point below {} km for SNR {snr0_db} dB, P_R {p_r_w} W",
            l_grid[l_grid.len() - 1]
        )))
    }
}

/// Settings for the turning-point sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPointSweep {
    /// Relay position spacing, the same for every link length so that hop
    /// distances repeat across the sweep.
    pub x_step_km: f64,
    pub packet_bits: u64,
    pub alpha: f64,
}

impl Default for TurningPointSweep {
    fn default() -> Self {
        Self {
            x_step_km: 0.125,
            packet_bits: crate::planner::DEFAULT_PACKET_BITS,
            alpha: 1.0,
        }
    }
}

/// Link lengths `step, 2 step, ..., max` for turning-point sweeps.
pub fn distance_grid(step_km: f64, max_km: f64) -> Result<Vec<f64>> {
    positive("step", step_km)?;
    positive("max", max_km)?;
    let n = (max_km / step_km + 1e-9).floor() as usize;
    Ok((1..=n).map(|i| step_km * i as f64).collect())
}

/// Default grid: 0.25 km spacing up to 120 km.
pub fn default_distance_grid() -> Vec<f64> {
    (1..=480).map(|i| 0.25 * i as f64).collect()
}

pub fn default_step(l_km: f64) -> f64 {
    l_km / 400.0
}

/// `{0, step, ..., l}`. When `step` divides `l`, points are placed at
/// `l i / n` so the grid is exactly symmetric.
pub fn position_grid(l: f64, step: f64) -> Vec<f64> {
    let ratio = l / step;
    let n = ratio.round();
    if (ratio - n).abs() <= 1e-9 * ratio.max(1.0) {
        let n = n as usize;
        (0..=n).map(|i| if i == n { l } else { l * i as f64 / n as f64 }).collect()
    } else {
        let n = ratio.floor() as usize;
        (0..=n).map(|i| step * i as f64).chain(std::iter::once(l)).collect()
    }
}

/// Outcome of an exhaustive relay-position search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub best_x: f64,
    pub best_energy_joule: f64,
    pub grid_step: f64,
    /// `(x km, E J)` for every grid point.
    pub energy_curve: Vec<(f64, f64)>,
}

impl OracleResult {
    pub fn is_boundary(&self, l_km: f64) -> bool {
        self.best_x == 0.0 || self.best_x == l_km
    }
}

/// Exact two-hop energy with a throwaway model. Prefer [`ExactModel`] for
/// repeated calls.
pub fn numeric_energy(x_km: f64, spec: &LinkSpec, env: &Environment) -> Result<f64> {
    ExactModel::new(*env)?.energy(x_km, spec)
}

pub fn grid_argmin_relay(spec: &LinkSpec, env: &Environment, step_km: f64) -> Result<OracleResult> {
    ExactModel::new(*env)?.grid_argmin_relay(spec, step_km)
}

pub fn realistic_open_distance(snr0_db: f64, p_r_w: f64, env: &Environment, l_grid: &[f64]) -> Result<f64> {
    ExactModel::new(*env)?.realistic_open_distance(snr0_db, p_r_w, l_grid, &TurningPointSweep::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::sync::OnceLock;

    fn model() -> &'static ExactModel {
        static M: OnceLock<ExactModel> = OnceLock::new();
        M.get_or_init(|| ExactModel::new(Environment::default()).unwrap())
    }

    fn spec(l: f64, snr: f64, pr: f64) -> LinkSpec {
        LinkSpec::with_defaults(l, snr, pr).unwrap()
    }

    #[test]
    fn endpoints_are_direct() {
        let s = spec(10.0, 10.0, 0.5);
        let a = model().energy(0.0, &s).unwrap();
        assert_eq!(a, model().energy(10.0, &s).unwrap());
        assert_relative_eq!(a, 0.1381, max_relative = 0.05);
        assert!(model().energy(-0.1, &s).is_err());
        assert!(model().energy(10.1, &s).is_err());
    }

    #[test]
    fn midpoint_energy_reference() {
        let e = model().energy(25.0, &spec(50.0, 25.0, 0.5)).unwrap();
        assert_relative_eq!(e, 3.9979, max_relative = 0.05);
    }

    #[test]
    fn hop_energy_scales_with_snr() {
        // P_T is linear in linear SNR, P_R is not
        let s10 = spec(20.0, 10.0, 1e-12);
        let s20 = spec(20.0, 20.0, 1e-12);
        let r = model().hop_energy(20.0, &s20).unwrap() / model().hop_energy(20.0, &s10).unwrap();
        assert_relative_eq!(r, 10.0, max_relative = 1e-9);
    }

    #[test]
    fn delay_matches_fitted_within_one_percent() {
        let s = spec(10.0, 10.0, 0.5);
        assert_relative_eq!(model().delay(0.0, &s).unwrap(), 6.9338, max_relative = 0.01);
        assert_relative_eq!(model().delay(5.0, &s).unwrap(), 7.0423, max_relative = 0.01);
    }

    #[test]
    fn memo_is_keyed_by_distance() {
        let m = ExactModel::new(Environment::default()).unwrap();
        let s = spec(8.0, 15.0, 1.0);
        m.energy(3.0, &s).unwrap();
        m.energy(5.0, &s).unwrap();
        assert_eq!(m.cached(), 2);
        m.energy(0.0, &s).unwrap();
        assert_eq!(m.cached(), 3);
        let fresh = ExactModel::new(Environment::default()).unwrap();
        assert_eq!(fresh.energy(5.0, &s).unwrap(), m.energy(3.0, &s).unwrap());
    }

    #[test]
    fn trichotomy_at_fifteen_db() {
        for l in [5.0, 10.0, 15.0, 20.0, 25.0] {
            let r = model().argmin_relay(&spec(l, 15.0, 1.0)).unwrap();
            assert!(r.is_boundary(l), "l = {l}: best_x = {}", r.best_x);
            assert_eq!(r.best_x, 0.0);
        }
        let r = model().argmin_relay(&spec(30.0, 15.0, 1.0)).unwrap();
        assert_eq!(r.best_x, 15.0);
        assert!(r.energy_curve.iter().all(|&(_, e)| e >= r.best_energy_joule));
    }

    #[test]
    fn refinement_is_stable() {
        for l in [12.0, 30.0, 44.0] {
            let s = spec(l, 15.0, 1.0);
            let coarse = model().grid_argmin_relay(&s, l / 40.0).unwrap();
            let fine = model().grid_argmin_relay(&s, l / 80.0).unwrap();
            assert!((coarse.best_x - fine.best_x).abs() <= l / 40.0 + 1e-12);
        }
    }

    #[test]
    fn curve_is_symmetric() {
        let r = model().argmin_relay(&spec(36.0, 20.0, 0.5)).unwrap();
        let c = &r.energy_curve;
        for i in 0..c.len() {
            let (a, b) = (c[i].1, c[c.len() - 1 - i].1);
            assert!((a - b).abs() / a < 1e-9);
        }
    }

    #[test]
    fn step_bounds() {
        let s = spec(10.0, 15.0, 1.0);
        assert!(model().grid_argmin_relay(&s, 3.0).is_err());
        assert!(model().grid_argmin_relay(&s, 0.0).is_err());
        let r = model().grid_argmin_relay(&s, 0.3).unwrap();
        assert_eq!(r.energy_curve.last().unwrap().0, 10.0);
    }

    #[test]
    fn relative_position_jumps_to_half() {
        let m = model();
        let ratios: Vec<f64> = (1..=16)
            .map(|i| 4.0 * i as f64)
            .map(|l| m.argmin_relay(&spec(l, 20.0, 0.5)).unwrap().best_x / l)
            .collect();
        let first = ratios.iter().position(|&r| r > 0.0).unwrap();
        assert!(first > 0);
        assert!(ratios[..first].iter().all(|&r| r == 0.0));
        assert!(ratios[first..].iter().all(|&r| r == 0.5));
    }

    #[test]
    fn turning_point_grows_with_receive_power() {
        let grid = distance_grid(0.5, 60.0).unwrap();
        let sweep = TurningPointSweep::default();
        let pts: Vec<f64> = [0.1, 0.5, 1.0]
            .iter()
            .map(|&p| model().realistic_open_distance(15.0, p, &grid, &sweep).unwrap())
            .collect();
        assert!(pts.windows(2).all(|w| w[1] > w[0]), "{pts:?}");
        // same-order agreement with the analytic threshold at 1 W
        assert!(pts[2] > 24.0 && pts[2] < 32.0, "{pts:?}");
    }

    #[test]
    fn turning_point_brackets() {
        let sweep = TurningPointSweep::default();
        let short = distance_grid(0.5, 8.0).unwrap();
        assert!(matches!(
            model().realistic_open_distance(15.0, 1.0, &short, &sweep),
            Err(Error::Bracket(_))
        ));
        assert!(model().realistic_open_distance(15.0, 1.0, &[3.0, 2.0], &sweep).is_err());
        let late = [40.0, 41.0];
        assert!(matches!(
            model().realistic_open_distance(15.0, 1.0, &late, &sweep),
            Err(Error::Bracket(_))
        ));
    }
}
