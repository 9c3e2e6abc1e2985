//! Closed-form energy and delay of direct and relayed transmission on the
//! fitted power-law channel, the open distance, and multi-hop planning.
//!
//! A relay at `x` km from the source splits the link into hops of `x` and
//! `l - x`. Each hop costs `L (P_T(d) + P_R) / (alpha B(d))` joules; relaying
//! at either endpoint degenerates to direct transmission.

use serde::{Deserialize, Serialize};

use crate::acoustics::Environment;
use crate::error::{positive, Error, Result};
use crate::fitmodels::FitModel;

/// Packet size used throughout the reference scenario: 256 bytes.
pub const DEFAULT_PACKET_BITS: u64 = 2048;

/// One planning problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    /// Source-to-destination distance in km.
    pub l_km: f64,
    pub snr0_db: f64,
    /// Receive power in W.
    pub p_r_w: f64,
    pub packet_bits: u64,
    /// Bandwidth efficiency in bps/Hz.
    pub alpha: f64,
}

impl LinkSpec {
    pub fn new(l_km: f64, snr0_db: f64, p_r_w: f64, packet_bits: u64, alpha: f64) -> Result<Self> {
        let s = Self {
            l_km,
            snr0_db,
            p_r_w,
            packet_bits,
            alpha,
        };
        s.validate()?;
        Ok(s)
    }

    /// 256-byte packets with BPSK (1 bps/Hz).
    pub fn with_defaults(l_km: f64, snr0_db: f64, p_r_w: f64) -> Result<Self> {
        Self::new(l_km, snr0_db, p_r_w, DEFAULT_PACKET_BITS, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        positive("l", self.l_km)?;
        positive("p_r", self.p_r_w)?;
        positive("alpha", self.alpha)?;
        if !self.snr0_db.is_finite() {
            return Err(Error::domain("snr0", self.snr0_db, "must be finite"));
        }
        if self.packet_bits == 0 {
            return Err(Error::domain("packet_bits", 0.0, "must be >= 1"));
        }
        Ok(())
    }

    pub(crate) fn bits(&self) -> f64 {
        self.packet_bits as f64
    }
}

fn check(spec: &LinkSpec, model: &FitModel) -> Result<()> {
    spec.validate()?;
    if (model.snr0_db - spec.snr0_db).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "model fitted at SNR {} dB used for a {} dB link",
            model.snr0_db, spec.snr0_db
        )));
    }
    Ok(())
}

/// Radiation time of one packet over a hop of `d` km.
fn radiate_time(d: f64, spec: &LinkSpec, model: &FitModel) -> f64 {
    spec.bits() / (spec.alpha * model.bandwidth_khz(d) * 1e3)
}

/// Energy of one hop of `d` km.
fn hop_energy(d: f64, spec: &LinkSpec, model: &FitModel) -> f64 {
    let prefactor = spec.bits() / (spec.alpha * model.omega * 1e3);
    prefactor * (model.psi * d.powf(model.lambda + model.gamma) + spec.p_r_w * d.powf(model.lambda))
}

fn relay_position(x: f64, l: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 && x < l {
        Ok(x)
    } else {
        Err(Error::domain("x", x, "relay must lie strictly between source and destination"))
    }
}

/// End-to-end delay in seconds of direct transmission.
pub fn direct_delay(spec: &LinkSpec, model: &FitModel, env: &Environment) -> Result<f64> {
    check(spec, model)?;
    Ok(radiate_time(spec.l_km, spec, model) + spec.l_km * 1e3 / env.c)
}

/// Transmit plus receive energy in joules of direct transmission.
pub fn direct_energy(spec: &LinkSpec, model: &FitModel) -> Result<f64> {
    check(spec, model)?;
    Ok(hop_energy(spec.l_km, spec, model))
}

/// Two-hop delay with the relay at `x_km`.
pub fn relay_delay(x_km: f64, spec: &LinkSpec, model: &FitModel, env: &Environment) -> Result<f64> {
    check(spec, model)?;
    let x = relay_position(x_km, spec.l_km)?;
    Ok(radiate_time(x, spec, model) + radiate_time(spec.l_km - x, spec, model) + spec.l_km * 1e3 / env.c)
}

/// Two-hop energy with the relay at `x_km`, `0 < x < l`.
pub fn relay_energy(x_km: f64, spec: &LinkSpec, model: &FitModel) -> Result<f64> {
    check(spec, model)?;
    let x = relay_position(x_km, spec.l_km)?;
    Ok(hop_energy(x, spec, model) + hop_energy(spec.l_km - x, spec, model))
}

/// Two-hop energy on the closed interval: a relay at either end point is
/// direct transmission.
pub fn limit_energy(x_km: f64, spec: &LinkSpec, model: &FitModel) -> Result<f64> {
    if x_km == 0.0 || x_km == spec.l_km {
        direct_energy(spec, model)
    } else {
        relay_energy(x_km, spec, model)
    }
}

/// The two distance thresholds behind the open distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Below this the two-hop energy is concave in the relay position.
    pub t1_km: f64,
    /// Below this the endpoints beat the midpoint.
    pub t2_km: f64,
}

impl Thresholds {
    pub fn open_distance(&self) -> f64 {
        self.t1_km.max(self.t2_km)
    }
}

pub fn thresholds(model: &FitModel, p_r_w: f64) -> Result<Thresholds> {
    positive("p_r", p_r_w)?;
    model.validate()?;
    let FitModel { lambda, gamma, psi, .. } = *model;
    let s = lambda + gamma;
    let t1 = 2.0 * (p_r_w * lambda * (1.0 - lambda) / (psi * s * (s - 1.0))).powf(1.0 / gamma);
    let t2 = (p_r_w * (2.0 - 2f64.powf(lambda)) / (psi * (2f64.powf(lambda) - 2f64.powf(1.0 - gamma))))
        .powf(1.0 / gamma);
    Ok(Thresholds { t1_km: t1, t2_km: t2 })
}

/// Largest distance for which direct transmission is at least as cheap as
/// any two-hop split.
pub fn open_distance(model: &FitModel, p_r_w: f64) -> Result<f64> {
    Ok(thresholds(model, p_r_w)?.open_distance())
}

/// Shape of the two-hop energy landscape `E1(x)` for a link length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    /// `E1` concave: maximum at the midpoint, minimum at the endpoints.
    DirectConcave,
    /// Local minimum at the midpoint, but the endpoints are still lower.
    DirectMixed,
    /// Global minimum at the midpoint.
    RelayOptimal,
}

impl CaseLabel {
    pub fn relays(&self) -> bool {
        matches!(self, CaseLabel::RelayOptimal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: CaseLabel,
    pub thresholds: Thresholds,
}

pub fn classify_case(l_km: f64, model: &FitModel, p_r_w: f64) -> Result<Classification> {
    positive("l", l_km)?;
    let t = thresholds(model, p_r_w)?;
    let label = if l_km <= t.t1_km {
        CaseLabel::DirectConcave
    } else if l_km <= t.open_distance() {
        CaseLabel::DirectMixed
    } else {
        CaseLabel::RelayOptimal
    };
    Ok(Classification { label, thresholds: t })
}

/// Relay layout for a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    /// Distances from the source, strictly increasing.
    pub relay_positions: Vec<f64>,
    pub hop_length_km: f64,
    pub hop_count: u64,
    pub total_energy_joule: f64,
    pub total_delay_sec: f64,
    pub open_distance_km: f64,
}

/// Bisects the link (midpoint, then quarter points, ...) until no hop is
/// longer than the open distance. A link exactly at the open distance is
/// sent directly.
pub fn plan_link(spec: &LinkSpec, model: &FitModel, env: &Environment) -> Result<DeploymentPlan> {
    check(spec, model)?;
    let l_op = open_distance(model, spec.p_r_w)?;
    let mut hops: u64 = 1;
    while spec.l_km / hops as f64 > l_op {
        hops *= 2;
    }
    let hop = spec.l_km / hops as f64;
    let relay_positions = (1..hops).map(|k| spec.l_km * k as f64 / hops as f64).collect();
    Ok(DeploymentPlan {
        relay_positions,
        hop_length_km: hop,
        hop_count: hops,
        total_energy_joule: hops as f64 * hop_energy(hop, spec, model),
        total_delay_sec: hops as f64 * radiate_time(hop, spec, model) + spec.l_km * 1e3 / env.c,
        open_distance_km: l_op,
    })
}

/// Direct versus midpoint-relay comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDelayReport {
    pub e0_joule: f64,
    pub e1_mid_joule: f64,
    pub t0_sec: f64,
    pub t1_mid_sec: f64,
    /// `(E0 - E1) / E0`.
    pub energy_reduction_ratio: f64,
    /// `(t0 - t1) / t0`.
    pub delay_reduction_ratio: f64,
}

impl EnergyDelayReport {
    pub fn from_parts(e0: f64, e1: f64, t0: f64, t1: f64) -> Self {
        Self {
            e0_joule: e0,
            e1_mid_joule: e1,
            t0_sec: t0,
            t1_mid_sec: t1,
            energy_reduction_ratio: (e0 - e1) / e0,
            delay_reduction_ratio: (t0 - t1) / t0,
        }
    }
}

pub fn compare(spec: &LinkSpec, model: &FitModel, env: &Environment) -> Result<EnergyDelayReport> {
    model.validate()?;
    let mid = spec.l_km / 2.0;
    Ok(EnergyDelayReport::from_parts(
        direct_energy(spec, model)?,
        relay_energy(mid, spec, model)?,
        direct_delay(spec, model, env)?,
        relay_delay(mid, spec, model, env)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn env() -> Environment {
        Environment::default()
    }

    fn model(snr: f64) -> FitModel {
        FitModel::published(snr, &env())
    }

    fn spec(l: f64, snr: f64, pr: f64) -> LinkSpec {
        LinkSpec::with_defaults(l, snr, pr).unwrap()
    }

    #[test]
    fn direct_delay_reference_rows() {
        let d = direct_delay(&spec(10.0, 10.0, 0.5), &model(10.0), &env()).unwrap();
        assert_relative_eq!(d, 6.9338, max_relative = 0.01);
        let d = direct_delay(&spec(50.0, 10.0, 0.5), &model(10.0), &env()).unwrap();
        assert_relative_eq!(d, 33.9107, max_relative = 0.01);
        let tiny = LinkSpec::new(10.0, 10.0, 0.5, 1, 1.0).unwrap();
        let d = direct_delay(&tiny, &model(10.0), &env()).unwrap();
        assert!((d - 10_000.0 / 1500.0).abs() < 2e-4);
    }

    #[test]
    fn zero_bit_packets_rejected() {
        assert!(LinkSpec::new(10.0, 10.0, 0.5, 0, 1.0).is_err());
        assert!(LinkSpec::new(-1.0, 10.0, 0.5, 8, 1.0).is_err());
        assert!(LinkSpec::new(1.0, 10.0, 0.0, 8, 1.0).is_err());
        assert!(LinkSpec::new(1.0, 10.0, 1.0, 8, 0.0).is_err());
    }

    #[test]
    fn snr_mismatch_is_configuration_error() {
        let r = direct_energy(&spec(10.0, 10.0, 0.5), &model(15.0));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn direct_energy_hand_values() {
        // prefactor 2048 / (10^1.4291 * 1e3), psi = 10^-3.904
        let e = direct_energy(&spec(10.0, 10.0, 0.5), &model(10.0)).unwrap();
        assert_relative_eq!(e, 0.1372, epsilon = 1e-4);
        let e = direct_energy(&spec(50.0, 25.0, 0.5), &model(25.0)).unwrap();
        assert_relative_eq!(e, 14.26, max_relative = 0.01);
        let mut s = spec(20.0, 15.0, 0.8);
        let e1 = direct_energy(&s, &model(15.0)).unwrap();
        s.packet_bits *= 2;
        assert_relative_eq!(direct_energy(&s, &model(15.0)).unwrap(), 2.0 * e1, max_relative = 1e-14);
    }

    #[test]
    fn relay_delay_properties() {
        let (s, m) = (spec(10.0, 10.0, 0.5), model(10.0));
        assert_relative_eq!(relay_delay(5.0, &s, &m, &env()).unwrap(), 7.0423, max_relative = 0.01);
        for x in [0.3, 1.7, 4.2] {
            let a = relay_delay(x, &s, &m, &env()).unwrap();
            let b = relay_delay(10.0 - x, &s, &m, &env()).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-14);
            let radiate = radiate_time(x, &s, &m) + radiate_time(10.0 - x, &s, &m);
            assert_relative_eq!(a - radiate, 10_000.0 / 1500.0, max_relative = 1e-12);
        }
        assert!(relay_delay(0.0, &s, &m, &env()).is_err());
        assert!(relay_delay(10.0, &s, &m, &env()).is_err());
    }

    #[test]
    fn relay_energy_reference_and_limits() {
        let (s, m) = (spec(10.0, 10.0, 0.5), model(10.0));
        let e = relay_energy(5.0, &s, &m).unwrap();
        assert_relative_eq!(e, 0.183, epsilon = 1e-3);
        assert!(relay_energy(-1.0, &s, &m).is_err());
        assert!(relay_energy(11.0, &s, &m).is_err());
        let e0 = direct_energy(&s, &m).unwrap();
        let near = relay_energy(1e-6 * s.l_km, &s, &m).unwrap();
        assert!((near - e0).abs() / e0 < 1e-3);
        assert_eq!(limit_energy(0.0, &s, &m).unwrap(), e0);
        assert_eq!(limit_energy(10.0, &s, &m).unwrap(), e0);
    }

    #[test]
    fn open_distance_reference() {
        let t = thresholds(&model(15.0), 1.0).unwrap();
        assert_relative_eq!(t.t1_km, 18.2, epsilon = 0.05);
        assert_relative_eq!(t.t2_km, 26.3, epsilon = 0.05);
        assert_relative_eq!(t.open_distance(), t.t2_km);
        let l = open_distance(&model(10.0), 0.5).unwrap();
        assert_relative_eq!(l, 32.3, epsilon = 0.05);
        assert!(l > 30.0 && l < 40.0);
    }

    #[test]
    fn open_distance_rejects_out_of_range_model() {
        let bad = FitModel { gamma: 2.5, ..model(15.0) };
        assert!(matches!(open_distance(&bad, 1.0), Err(Error::Validation(_))));
        assert!(open_distance(&model(15.0), 0.0).is_err());
    }

    #[test]
    fn case_labels() {
        let m = model(15.0);
        assert_eq!(classify_case(10.0, &m, 1.0).unwrap().label, CaseLabel::DirectConcave);
        assert_eq!(classify_case(25.0, &m, 1.0).unwrap().label, CaseLabel::DirectMixed);
        assert_eq!(classify_case(30.0, &m, 1.0).unwrap().label, CaseLabel::RelayOptimal);
        let t = thresholds(&m, 1.0).unwrap();
        assert_eq!(classify_case(t.open_distance(), &m, 1.0).unwrap().label, CaseLabel::DirectMixed);
    }

    #[test]
    fn relay_optimal_argmin_at_midpoint() {
        let (s, m) = (spec(30.0, 15.0, 1.0), model(15.0));
        let e0 = direct_energy(&s, &m).unwrap();
        let best = (1..300)
            .map(|i| i as f64 * 0.1)
            .map(|x| (x, relay_energy(x, &s, &m).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_relative_eq!(best.0, 15.0, epsilon = 1e-9);
        assert!(best.1 < e0);
    }

    #[test]
    fn plans() {
        let m = model(15.0);
        let p = plan_link(&spec(10.0, 15.0, 1.0), &m, &env()).unwrap();
        assert_eq!(p.hop_count, 1);
        assert!(p.relay_positions.is_empty());
        let p = plan_link(&spec(30.0, 15.0, 1.0), &m, &env()).unwrap();
        assert_eq!(p.relay_positions, vec![15.0]);
        let p = plan_link(&spec(60.0, 15.0, 1.0), &m, &env()).unwrap();
        assert_eq!(p.hop_count, 4);
        assert_eq!(p.relay_positions, vec![15.0, 30.0, 45.0]);
        assert_eq!(p.hop_length_km, 15.0);
    }

    #[test]
    fn plan_at_exact_open_distance_is_direct() {
        let m = model(20.0);
        let l_op = open_distance(&m, 0.7).unwrap();
        let p = plan_link(&spec(l_op, 20.0, 0.7), &m, &env()).unwrap();
        assert_eq!(p.hop_count, 1);
    }

    #[test]
    fn table_rows_signs() {
        let s = spec(50.0, 25.0, 0.5);
        let r = compare(&s, &model(25.0), &env()).unwrap();
        assert!(r.energy_reduction_ratio > 0.6);
        assert!(r.delay_reduction_ratio < 0.0 && r.delay_reduction_ratio > -0.016);
        assert_relative_eq!(r.delay_reduction_ratio, -0.0072, epsilon = 5e-4);
        let r = compare(&spec(10.0, 10.0, 0.5), &model(10.0), &env()).unwrap();
        assert!(r.energy_reduction_ratio < 0.0);
    }

    // central finite differences with h = 1e-4 l
    fn d1(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }
    fn d2(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    }
    fn d3(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
    }

    #[test]
    fn midpoint_is_stationary() {
        for (l, snr, pr) in [(10.0, 15.0, 1.0), (30.0, 15.0, 1.0), (45.0, 20.0, 0.3)] {
            let (s, m) = (spec(l, snr, pr), model(snr));
            let f = |x: f64| relay_energy(x, &s, &m).unwrap();
            let h = 1e-4 * l;
            let scale = f(l / 2.0) / l;
            assert!(d1(&f, l / 2.0, h).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn concave_below_first_threshold() {
        let m = model(15.0);
        let t1 = thresholds(&m, 1.0).unwrap().t1_km;
        for l in [2.0, 8.0, 15.0, t1] {
            let s = spec(l, 15.0, 1.0);
            let f = |x: f64| relay_energy(x, &s, &m).unwrap();
            let h = 1e-4 * l;
            for i in 1..200 {
                let x = l * i as f64 / 200.0;
                assert!(d2(&f, x, h) <= 1e-9 * f(x) / (l * l), "l = {l}, x = {x}");
            }
        }
    }

    #[test]
    fn mixed_regime_curvature() {
        let m = model(15.0);
        let t = thresholds(&m, 1.0).unwrap();
        for l in [0.5 * (t.t1_km + t.t2_km), 25.0, 30.0, 50.0] {
            assert!(l > t.t1_km);
            let s = spec(l, 15.0, 1.0);
            let f = |x: f64| relay_energy(x, &s, &m).unwrap();
            let h = 1e-4 * l;
            assert!(d2(&f, 0.01 * l, h) < 0.0);
            assert!(d2(&f, 0.99 * l, h) < 0.0);
            assert!(d2(&f, 0.5 * l, h) > 0.0);
            let e0 = direct_energy(&s, &m).unwrap();
            let grid_min = (1..400)
                .map(|i| l * i as f64 / 400.0)
                .map(|x| (x, f(x)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if l <= t.t2_km {
                assert!(e0 <= grid_min.1, "l = {l}");
            } else {
                assert!(grid_min.1 < e0);
                assert_relative_eq!(grid_min.0, l / 2.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn third_difference_non_negative_on_left_half() {
        for (l, snr, pr) in [(10.0, 15.0, 1.0), (40.0, 15.0, 1.0), (25.0, 25.0, 0.1)] {
            let (s, m) = (spec(l, snr, pr), model(snr));
            let f = |x: f64| relay_energy(x, &s, &m).unwrap();
            let h = 1e-4 * l;
            let tol = 1e-4 * f(l / 2.0) / (l * l * l);
            for i in 1..=100 {
                let x = (l / 2.0) * i as f64 / 100.0;
                if x <= 2.0 * h {
                    continue;
                }
                assert!(d3(&f, x, h) >= -tol, "l = {l}, x = {x}: {}", d3(&f, x, h));
            }
        }
    }

    #[test]
    fn open_distance_monotone_in_power_and_snr() {
        let prs: Vec<f64> = (0..=19).map(|i| 0.1 + 0.1 * i as f64).collect();
        let snrs: Vec<f64> = (0..=15).map(|i| 10.0 + i as f64).collect();
        for &snr in &snrs {
            let row: Vec<f64> = prs.iter().map(|&p| open_distance(&model(snr), p).unwrap()).collect();
            assert!(row.windows(2).all(|w| w[1] > w[0]));
        }
        for &p in &prs {
            let col: Vec<f64> = snrs.iter().map(|&s| open_distance(&model(s), p).unwrap()).collect();
            assert!(col.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn open_distance_log_linear_in_receive_power() {
        let m = model(18.0);
        let pts: Vec<(f64, f64)> = [0.1, 0.3, 0.9, 1.7]
            .iter()
            .map(|&p| (f64::log10(p), open_distance(&m, p).unwrap().log10()))
            .collect();
        for w in pts.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert_relative_eq!(slope, 1.0 / m.gamma, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn two_hop_energy_is_symmetric(l in 0.5f64..120.0, frac in 0.001f64..0.999, snr in 5.0f64..30.0, pr in 0.05f64..3.0) {
            let (s, m) = (spec(l, snr, pr), model(snr));
            let x = frac * l;
            let a = relay_energy(x, &s, &m).unwrap();
            let b = relay_energy(l - x, &s, &m).unwrap();
            prop_assert!((a - b).abs() / a < 1e-12);
        }

        #[test]
        fn inclusivity_limit(l in 0.5f64..120.0, snr in 5.0f64..30.0, pr in 0.05f64..3.0) {
            let (s, m) = (spec(l, snr, pr), model(snr));
            let e0 = direct_energy(&s, &m).unwrap();
            let e = relay_energy(1e-6 * l, &s, &m).unwrap();
            prop_assert!((e - e0).abs() / e0 < 1e-3);
            let e = relay_energy(1e-10 * l, &s, &m).unwrap();
            prop_assert!((e - e0).abs() / e0 < 1e-5);
        }

        #[test]
        fn open_distance_scales_with_receive_power(pr in 0.01f64..5.0, snr in 5.0f64..30.0) {
            let m = model(snr);
            let a = open_distance(&m, pr).unwrap();
            let b = open_distance(&m, pr * 2f64.powf(m.gamma)).unwrap();
            prop_assert!((b / a - 2.0).abs() < 1e-12);
        }

        #[test]
        fn plan_terminates_within_bound(l in 0.5f64..400.0, snr in 5.0f64..30.0, pr in 0.05f64..3.0) {
            let (s, m) = (spec(l, snr, pr), model(snr));
            let p = plan_link(&s, &m, &env()).unwrap();
            let l_op = p.open_distance_km;
            prop_assert!(p.hop_count.is_power_of_two());
            prop_assert!(p.hop_length_km <= l_op || (p.hop_count == 1 && l <= l_op));
            let bound = if l <= l_op { 1 } else { 1u64 << (l / l_op).log2().ceil() as u32 };
            prop_assert!(p.hop_count <= bound);
            prop_assert_eq!(p.relay_positions.len() as u64, p.hop_count - 1);
            prop_assert!(p.relay_positions.windows(2).all(|w| w[1] > w[0]));
            prop_assert!(p.relay_positions.iter().all(|&x| x > 0.0 && x < l));
        }
    }
}
