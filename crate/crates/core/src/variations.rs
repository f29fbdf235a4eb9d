//! Measurement protocols built on the charged-particle model, and the
//! closed-form probability laws they should reproduce.
//!
//! The baseline protocol polarizes the particle and uses a fresh charge split
//! per measurement. The five variations drop or change one ingredient at a
//! time: no polarization with one shared device, no polarization with
//! independent devices, a known point position, a known interval, and known
//! fixed charges with polarization.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::{sign0, Angle};
use crate::error::{Error, Result};
use crate::mc::{run_trials, EstimatorSummary, Merge, RunningStats};
use crate::model::{collapse, sample_hidden, Device, HiddenState, Outcome, ParticleState};

/// How independent devices treat the particle between measurements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IndependenceMode {
    /// The particle is re-prepared uniformly before every measurement, which
    /// makes successive outcomes exactly independent.
    #[default]
    Reprepare,
    /// One particle position is held for the whole sequence.
    SharedPosition,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Protocol {
    /// Polarizing measurements, fresh device every step.
    Baseline,
    /// No polarization; one device (one charge split) rotated between steps.
    SameDevice,
    /// No polarization; a different device for every step.
    IndependentDevices(IndependenceMode),
    /// No polarization; particle at a known point.
    KnownPoint(Angle),
    /// No polarization; particle known to lie in an interval.
    KnownInterval { center: Angle, halfwidth: f64 },
    /// Polarizing measurements with known charges `q1 > q2 > 0`.
    FixedCharges { q1: f64, q2: f64 },
}

impl Protocol {
    pub fn known_interval(center: Angle, halfwidth: f64) -> Result<Self> {
        ParticleState::interval(center, halfwidth)?;
        Ok(Protocol::KnownInterval { center, halfwidth })
    }

    pub fn fixed_charges(q1: f64, q2: f64) -> Result<Self> {
        let p = Protocol::FixedCharges { q1, q2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Protocol::KnownInterval { center, halfwidth } => {
                ParticleState::interval(center, halfwidth).map(|_| ())
            }
            Protocol::FixedCharges { q1, q2 } => {
                Device::fixed_split(Angle::ZERO, q1, q2)?;
                if !(q1 > q2 && q2 > 0.0) {
                    return Err(Error::ChargeOrdering { q1, q2 });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn initial_state(&self) -> ParticleState {
        match *self {
            Protocol::KnownPoint(a) => ParticleState::PointAt(a),
            Protocol::KnownInterval { center, halfwidth } => {
                ParticleState::UniformOnInterval { center, halfwidth }
            }
            _ => ParticleState::UniformOnCircle,
        }
    }

    pub fn polarizes(&self) -> bool {
        matches!(self, Protocol::Baseline | Protocol::FixedCharges { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceResult {
    pub outcomes: Vec<Outcome>,
    pub final_state: ParticleState,
    /// Hidden state seen by each measurement. For fixed-charge devices `u` is
    /// drawn but unused.
    pub trace: Vec<HiddenState>,
}

/// Runs one particle through the devices at `angles`, in order.
pub fn run_sequence<R: Rng + ?Sized>(
    protocol: &Protocol,
    angles: &[Angle],
    rng: &mut R,
) -> Result<SequenceResult> {
    if angles.is_empty() {
        return Err(Error::EmptyAngles);
    }
    protocol.validate()?;

    let mut outcomes = Vec::with_capacity(angles.len());
    let mut trace = Vec::with_capacity(angles.len());
    let mut state = protocol.initial_state();

    match *protocol {
        Protocol::Baseline | Protocol::FixedCharges { .. } => {
            for &alpha in angles {
                let device = match *protocol {
                    Protocol::FixedCharges { q1, q2 } => Device::fixed_split(alpha, q1, q2)?,
                    _ => Device::random_split(alpha),
                };
                let hidden = sample_hidden(&state, rng);
                let outcome = device.respond(&hidden);
                state = collapse(alpha, outcome);
                outcomes.push(outcome);
                trace.push(hidden);
            }
        }
        Protocol::SameDevice => {
            let hidden = sample_hidden(&state, rng);
            for &alpha in angles {
                outcomes.push(Device::random_split(alpha).respond(&hidden));
                trace.push(hidden);
            }
            state = ParticleState::PointAt(hidden.phi());
        }
        Protocol::IndependentDevices(mode) => {
            let held = state.sample_position(rng);
            for &alpha in angles {
                let u = rng.random::<f64>();
                let phi = match mode {
                    IndependenceMode::Reprepare => state.sample_position(rng),
                    IndependenceMode::SharedPosition => held,
                };
                let hidden = HiddenState::new(u, phi)?;
                outcomes.push(Device::random_split(alpha).respond(&hidden));
                trace.push(hidden);
            }
            state = ParticleState::PointAt(trace.last().map_or(held, |h| h.phi()));
        }
        Protocol::KnownPoint(_) | Protocol::KnownInterval { .. } => {
            let phi = state.sample_position(rng);
            for &alpha in angles {
                let hidden = HiddenState::new(rng.random::<f64>(), phi)?;
                outcomes.push(Device::random_split(alpha).respond(&hidden));
                trace.push(hidden);
            }
            state = ParticleState::PointAt(phi);
        }
    }

    Ok(SequenceResult {
        outcomes,
        final_state: state,
        trace,
    })
}

/// Probability of `+1` for a particle at separation `theta` from the pole.
pub fn law_p_plus(theta: Angle) -> f64 {
    (theta.radians() / 2.0).cos().powi(2)
}

/// `P(f = +1 | g = +1)` for one device rotated from `theta_g` to `theta_f`
/// over a uniformly distributed particle that is not polarized.
pub fn law_var1_conditional(theta_f: Angle, theta_g: Angle) -> f64 {
    let delta = theta_g.signed_diff(theta_f);
    1.0 - FRAC_2_PI * sign0(delta) * (delta / 2.0).sin()
}

/// Independent devices: the conditioning measurement carries no information.
pub fn law_var2_conditional() -> f64 {
    0.5
}

/// Independent devices over one held particle position: `½ + ¼ cos Δ`.
pub fn law_var2_shared_conditional(theta_f: Angle, theta_g: Angle) -> f64 {
    0.5 + 0.25 * theta_f.signed_diff(theta_g).cos()
}

/// Particle at a known point at polar angle `alpha`.
pub fn law_var3(theta_f: Angle, alpha: Angle) -> f64 {
    (theta_f.signed_diff(alpha) / 2.0).cos().powi(2)
}

/// Particle uniform on `[alpha − x, alpha + x]`:
/// `½ (1 + cos(θ_f − α) sin x / x)`.
pub fn law_var4(theta_f: Angle, alpha: Angle, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= PI) {
        return Err(Error::InvalidHalfwidth(x));
    }
    Ok(0.5 * (1.0 + theta_f.signed_diff(alpha).cos() * x.sin() / x))
}

/// `P(+1 at beta | +1 at alpha)` after polarization.
pub fn law_sequential_conditional(alpha: Angle, beta: Angle) -> f64 {
    (alpha.signed_diff(beta) / 2.0).cos().powi(2)
}

/// First-measurement `P(+1)` for known charges over a uniform particle under
/// the chord-distance force law: `(2/π) arctan √(q1/q2)`.
pub fn var5_first_prob_oracle(q1: f64, q2: f64) -> Result<f64> {
    check_var5_first(q1, q2)?;
    Ok(FRAC_2_PI * (q1 / q2).sqrt().atan())
}

/// The literal `(1/π) arctan(½ √(q1/q2))` expression. It disagrees with the
/// simulated model and is kept only for side-by-side reporting.
pub fn var5_first_prob_literal(q1: f64, q2: f64) -> Result<f64> {
    check_var5_first(q1, q2)?;
    Ok((0.5 * (q1 / q2).sqrt()).atan() / PI)
}

fn check_var5_first(q1: f64, q2: f64) -> Result<()> {
    if !(q2 > 0.0) || !q2.is_finite() {
        return Err(Error::NonPositiveQ2(q2));
    }
    if !(q1 >= 0.0) || !q1.is_finite() {
        return Err(Error::NegativeCharge { q1, q2 });
    }
    Ok(())
}

/// Frequencies from the measurement-order experiment with devices at
/// `f = 0`, `g = π/2`, `h = π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderExperiment {
    /// `+1` on the first measurement `f`.
    pub p_f: EstimatorSummary,
    /// `+1` on each of `f`, `g`, `h` in that order.
    pub p_fgh: EstimatorSummary,
    /// `+1` on `f` then `+1` on `h`, on an independent particle.
    pub p_fh: EstimatorSummary,
    /// Count of trials with `f = +1` then `h = +1`.
    pub fh_hits: u64,
}

pub const VAR5_F: f64 = 0.0;
pub const VAR5_G: f64 = PI / 2.0;
pub const VAR5_H: f64 = PI;

pub fn var5_order_experiment(q1: f64, q2: f64, n_trials: u64, seed: u64) -> Result<OrderExperiment> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    let protocol = Protocol::fixed_charges(q1, q2)?;
    let fgh = [Angle::new(VAR5_F), Angle::new(VAR5_G), Angle::new(VAR5_H)];
    let fh = [Angle::new(VAR5_F), Angle::new(VAR5_H)];

    let acc: [RunningStats; 3] = run_trials(seed, n_trials, |rng, acc: &mut [RunningStats; 3]| {
        let a = run_sequence(&protocol, &fgh, rng).expect("validated protocol");
        let b = run_sequence(&protocol, &fh, rng).expect("validated protocol");
        let all_plus = |o: &[Outcome]| o.iter().all(|x| x.is_plus());
        acc[0].push(indicator(a.outcomes[0].is_plus()));
        acc[1].push(indicator(all_plus(&a.outcomes)));
        acc[2].push(indicator(all_plus(&b.outcomes)));
    });
    let [p_f, p_fgh, p_fh] = acc.map(|s| s.summary().expect("n_trials > 0"));
    let fh_hits = (p_fh.mean * n_trials as f64).round() as u64;
    Ok(OrderExperiment {
        p_f,
        p_fgh,
        p_fh,
        fh_hits,
    })
}

pub(crate) fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Conditional frequency estimator: counts how often the target event holds
/// on trials where the conditioning event held.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Conditional {
    pub hits: RunningStats,
    pub rejected: u64,
}

impl Conditional {
    pub fn record(&mut self, condition: bool, event: bool) {
        if condition {
            self.hits.push(indicator(event));
        } else {
            self.rejected += 1;
        }
    }

    pub fn summary(&self) -> Option<EstimatorSummary> {
        self.hits.summary()
    }
}

impl Merge for Conditional {
    fn merge(&mut self, other: Self) {
        self.hits.merge(other.hits);
        self.rejected += other.rejected;
    }
}

/// Estimates `P(+1 at second | +1 at first)` for a two-step sequence.
pub fn estimate_conditional(
    protocol: &Protocol,
    first: Angle,
    second: Angle,
    n_trials: u64,
    seed: u64,
) -> Result<Conditional> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    protocol.validate()?;
    let angles = [first, second];
    Ok(run_trials(seed, n_trials, |rng, acc: &mut Conditional| {
        let r = run_sequence(protocol, &angles, rng).expect("validated protocol");
        acc.record(r.outcomes[0].is_plus(), r.outcomes[1].is_plus());
    }))
}

/// Estimates `P(+1)` for a single measurement at `angle`.
pub fn estimate_first(protocol: &Protocol, angle: Angle, n_trials: u64, seed: u64) -> Result<EstimatorSummary> {
    if n_trials == 0 {
        return Err(Error::NoTrials);
    }
    protocol.validate()?;
    let angles = [angle];
    let s: RunningStats = run_trials(seed, n_trials, |rng, acc: &mut RunningStats| {
        let r = run_sequence(protocol, &angles, rng).expect("validated protocol");
        acc.push(indicator(r.outcomes[0].is_plus()));
    });
    Ok(s.summary().expect("n_trials > 0"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::substream;
    use proptest::prelude::*;

    const N: u64 = 100_000;

    /// Brute-force quadrature of the same-device conditional: the particle is
    /// uniform, one shared split `u`; both thresholds must be beaten.
    fn var1_quadrature(theta_f: f64, theta_g: f64) -> f64 {
        let m = 200_000;
        let mut joint = 0.0;
        let mut marg = 0.0;
        for i in 0..m {
            let phi = (i as f64 + 0.5) / m as f64 * 2.0 * PI;
            let tf = ((theta_f - phi) / 2.0).sin().powi(2);
            let tg = ((theta_g - phi) / 2.0).sin().powi(2);
            joint += 1.0 - tf.max(tg);
            marg += 1.0 - tg;
        }
        joint / marg
    }

    #[test]
    fn law_values() {
        assert_eq!(law_p_plus(Angle::ZERO), 1.0);
        assert!(law_p_plus(Angle::new(PI)).abs() < 1e-16);
        assert!((law_p_plus(Angle::new(PI / 2.0)) - 0.5).abs() < 1e-15);
        assert_eq!(law_var2_conditional(), 0.5);
        assert!((law_sequential_conditional(Angle::ZERO, Angle::new(PI / 2.0)) - 0.5).abs() < 1e-15);
        assert!(law_sequential_conditional(Angle::new(0.3), Angle::new(0.3 + PI)).abs() < 1e-15);
        assert_eq!(law_sequential_conditional(Angle::new(0.3), Angle::new(0.3)), 1.0);
    }

    #[test]
    fn var1_law_matches_quadrature() {
        assert_eq!(law_var1_conditional(Angle::ZERO, Angle::ZERO), 1.0);
        // frozen from var1_quadrature
        let at_pi = law_var1_conditional(Angle::ZERO, Angle::new(PI));
        assert!((at_pi - 0.363_380_227_632_418_6).abs() < 1e-12);
        let at_half = law_var1_conditional(Angle::ZERO, Angle::new(PI / 2.0));
        assert!((at_half - 0.549_841_841_921_447_5).abs() < 1e-12);
        for &(f, g) in &[(0.0, PI), (0.0, PI / 2.0), (1.0, 2.3), (2.0, 0.4), (5.9, 0.3)] {
            let q = var1_quadrature(f, g);
            let law = law_var1_conditional(Angle::new(f), Angle::new(g));
            assert!((q - law).abs() < 1e-6, "({f}, {g}): {q} vs {law}");
        }
    }

    #[test]
    fn var4_law() {
        for &(f, a) in &[(0.0, 0.0), (1.0, 2.5), (4.0, 0.1)] {
            let v = law_var4(Angle::new(f), Angle::new(a), PI).unwrap();
            assert!((v - 0.5).abs() < 1e-15);
        }
        let v = law_var4(Angle::ZERO, Angle::ZERO, PI / 2.0).unwrap();
        assert!((v - 0.5 * (1.0 + 2.0 / PI)).abs() < 1e-15);
        assert!((v - 0.818_309_886_183_791).abs() < 1e-12);
        let tiny = law_var4(Angle::ZERO, Angle::ZERO, 1e-9).unwrap();
        assert!((tiny - 1.0).abs() < 1e-12);
        assert_eq!(law_var4(Angle::ZERO, Angle::ZERO, 0.0), Err(Error::InvalidHalfwidth(0.0)));
        assert!(law_var4(Angle::ZERO, Angle::ZERO, -1.0).is_err());
    }

    #[test]
    fn var5_oracles() {
        assert!((var5_first_prob_oracle(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((var5_first_prob_oracle(3.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(var5_first_prob_oracle(1e12, 1.0).unwrap() > 0.999_999);
        assert_eq!(var5_first_prob_oracle(1.0, 0.0), Err(Error::NonPositiveQ2(0.0)));
        let literal = var5_first_prob_literal(3.0, 1.0).unwrap();
        assert!((literal - (0.5 * 3f64.sqrt()).atan() / PI).abs() < 1e-15);
        // the literal expression never exceeds 1/2
        assert!(var5_first_prob_literal(1e12, 1.0).unwrap() < 0.5);
    }

    #[test]
    fn var5_oracle_matches_coulomb_simulation() {
        let s = estimate_first(&Protocol::fixed_charges(3.0, 1.0).unwrap(), Angle::ZERO, 1_000_000, 77).unwrap();
        assert!(s.within(2.0 / 3.0, 4.0), "{} ± {}", s.mean, s.std_error);
    }

    #[test]
    fn empty_angles_rejected() {
        let mut rng = substream(1, 0);
        assert_eq!(run_sequence(&Protocol::Baseline, &[], &mut rng), Err(Error::EmptyAngles));
    }

    #[test]
    fn invalid_protocols_rejected() {
        assert!(matches!(Protocol::fixed_charges(1.0, 1.0), Err(Error::ChargeOrdering { .. })));
        assert!(Protocol::fixed_charges(1.0, 0.0).is_err());
        assert!(Protocol::known_interval(Angle::ZERO, 0.0).is_err());
        assert!(matches!(
            var5_order_experiment(1.0, 1.0, 10, 0),
            Err(Error::ChargeOrdering { .. })
        ));
    }

    #[test]
    fn baseline_repeat_is_certain() {
        let mut rng = substream(2, 0);
        let a = Angle::new(0.9);
        for _ in 0..10_000 {
            let r = run_sequence(&Protocol::Baseline, &[a, a], &mut rng).unwrap();
            assert_eq!(r.outcomes[0], r.outcomes[1]);
            assert_eq!(r.outcomes.len(), 2);
            assert_eq!(r.trace.len(), 2);
        }
    }

    #[test]
    fn baseline_antipodal_alternates() {
        let mut rng = substream(3, 0);
        let a = Angle::new(2.2);
        for _ in 0..10_000 {
            let r = run_sequence(&Protocol::Baseline, &[a, a.antipode()], &mut rng).unwrap();
            assert_eq!(r.outcomes[1], r.outcomes[0].flip());
        }
    }

    #[test]
    fn collapse_lands_on_winning_pole() {
        let mut rng = substream(4, 0);
        let a = Angle::new(1.1);
        for _ in 0..100 {
            let r = run_sequence(&Protocol::Baseline, &[a], &mut rng).unwrap();
            let expected = if r.outcomes[0].is_plus() { a } else { a.antipode() };
            assert_eq!(r.final_state, ParticleState::PointAt(expected));
        }
    }

    #[test]
    fn same_device_reuses_split() {
        let mut rng = substream(5, 0);
        let r = run_sequence(&Protocol::SameDevice, &[Angle::ZERO, Angle::new(1.0), Angle::new(2.0)], &mut rng).unwrap();
        assert!(r.trace.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn var5_order_dependence() {
        let e = var5_order_experiment(3.0, 1.0, N, 6).unwrap();
        assert_eq!(e.p_fh.mean, 0.0);
        assert_eq!(e.fh_hits, 0);
        let se = e.p_f.std_error;
        assert!((e.p_fgh.mean - e.p_f.mean).abs() <= 4.0 * se);
        assert!(e.p_fgh.mean > 0.0);
        assert!(e.p_f.within(2.0 / 3.0, 4.0));
    }

    #[test]
    fn var1_mc_matches_law() {
        for (k, delta) in [PI / 6.0, PI / 2.0, PI].into_iter().enumerate() {
            let c = estimate_conditional(&Protocol::SameDevice, Angle::ZERO, Angle::new(delta), N, 30 + k as u64).unwrap();
            let law = law_var1_conditional(Angle::new(delta), Angle::ZERO);
            let s = c.summary().unwrap();
            assert!(s.within(law, 4.0), "Δ = {delta}: {} vs {law}", s.mean);
        }
    }

    #[test]
    fn var2_modes() {
        let d = Angle::new(PI / 3.0);
        let reprepared = estimate_conditional(&Protocol::IndependentDevices(IndependenceMode::Reprepare), Angle::ZERO, d, N, 40).unwrap();
        assert!(reprepared.summary().unwrap().within(0.5, 4.0));
        let shared = estimate_conditional(&Protocol::IndependentDevices(IndependenceMode::SharedPosition), Angle::ZERO, d, N, 41).unwrap();
        let law = law_var2_shared_conditional(d, Angle::ZERO);
        assert!((law - 0.625).abs() < 1e-15);
        assert!(shared.summary().unwrap().within(law, 4.0));
    }

    #[test]
    fn var4_mc_grid_point() {
        let p = Protocol::known_interval(Angle::ZERO, PI / 2.0).unwrap();
        let s = estimate_first(&p, Angle::ZERO, N, 50).unwrap();
        assert!(s.within(0.5 * (1.0 + 2.0 / PI), 4.0));
    }

    proptest! {
        #[test]
        fn var1_law_depends_on_separation_only(f in 0f64..6.28, d in -3.1f64..3.1) {
            let g1 = Angle::new(f + d);
            let g2 = Angle::new(f - d);
            let a = law_var1_conditional(Angle::new(f), g1);
            let b = law_var1_conditional(Angle::new(f), g2);
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a >= 1.0 - 2.0 / PI - 1e-12 && a <= 1.0 + 1e-12);
        }

        #[test]
        fn var4_law_in_unit_interval(f in 0f64..6.28, a in 0f64..6.28, x in 1e-6f64..PI) {
            let v = law_var4(Angle::new(f), Angle::new(a), x).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn var5_oracle_monotone(r1 in 0.01f64..100.0, r2 in 0.01f64..100.0) {
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assume!(hi > lo * (1.0 + 1e-9));
            let a = var5_first_prob_oracle(lo, 1.0).unwrap();
            let b = var5_first_prob_oracle(hi, 1.0).unwrap();
            prop_assert!(a < b && a > 0.0 && b < 1.0);
        }
    }
}
