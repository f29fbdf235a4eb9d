//! The charged-particle spin model restricted to one great circle.
//!
//! A measuring device is a pair of charges `q1`, `q2` sitting at antipodal
//! points, `q1` at polar angle `alpha`. The total charge is normalized to one
//! so a random split is carried as the fraction `u = q1 / Q`. The particle
//! sits at polar angle `phi`; the device answers `+1` when the force from `q1`
//! wins. After a polarizing measurement the particle rests on the winning
//! charge.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }

    pub fn is_plus(self) -> bool {
        self == Outcome::Plus
    }

    pub fn flip(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }

    pub fn from_bool(plus: bool) -> Outcome {
        if plus {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

/// A point of the hidden-variable space `[0, 1] × [0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    u: f64,
    phi: Angle,
}

impl HiddenState {
    pub fn new(u: f64, phi: Angle) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::InvalidFraction(u));
        }
        Ok(HiddenState { u, phi })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn phi(&self) -> Angle {
        self.phi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ChargePolicy {
    /// `q1` uniform on `[0, Q]`, redrawn for every device.
    RandomSplit,
    /// Known charges.
    FixedSplit { q1: f64, q2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Device {
    alpha: Angle,
    policy: ChargePolicy,
}

impl Device {
    pub fn random_split(alpha: Angle) -> Self {
        Device {
            alpha,
            policy: ChargePolicy::RandomSplit,
        }
    }

    pub fn fixed_split(alpha: Angle, q1: f64, q2: f64) -> Result<Self> {
        check_charges(q1, q2)?;
        Ok(Device {
            alpha,
            policy: ChargePolicy::FixedSplit { q1, q2 },
        })
    }

    pub fn alpha(&self) -> Angle {
        self.alpha
    }

    pub fn policy(&self) -> ChargePolicy {
        self.policy
    }

    /// Outcome for a hidden state. A fixed-split device ignores `hidden.u`.
    pub fn respond(&self, hidden: &HiddenState) -> Outcome {
        match self.policy {
            ChargePolicy::RandomSplit => spin_response(hidden.u, hidden.phi, self.alpha),
            ChargePolicy::FixedSplit { q1, q2 } => {
                let theta = hidden.phi - self.alpha;
                // charges were validated at construction
                coulomb_outcome(theta, q1, q2).unwrap_or(Outcome::Minus)
            }
        }
    }
}

fn check_charges(q1: f64, q2: f64) -> Result<()> {
    if !(q1.is_finite() && q2.is_finite()) || q1 < 0.0 || q2 < 0.0 {
        return Err(Error::NegativeCharge { q1, q2 });
    }
    if q1 + q2 <= 0.0 {
        return Err(Error::ZeroTotalCharge { q1, q2 });
    }
    Ok(())
}

/// Where the particle may be found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParticleState {
    UniformOnCircle,
    /// Uniform on `[center − halfwidth, center + halfwidth]`, halfwidth in `(0, π]`.
    UniformOnInterval { center: Angle, halfwidth: f64 },
    PointAt(Angle),
}

impl ParticleState {
    pub fn interval(center: Angle, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0 && halfwidth <= PI) {
            return Err(Error::InvalidHalfwidth(halfwidth));
        }
        Ok(ParticleState::UniformOnInterval { center, halfwidth })
    }

    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Angle {
        match *self {
            ParticleState::UniformOnCircle => Angle::new(rng.random::<f64>() * TAU),
            ParticleState::UniformOnInterval { center, halfwidth } => {
                center + (2.0 * rng.random::<f64>() - 1.0) * halfwidth
            }
            ParticleState::PointAt(a) => a,
        }
    }
}

/// Comparisons closer than this are ties; `sin²(π/4)` is not exactly `½` in
/// binary floating point.
pub const TIE_TOLERANCE: f64 = 4.0 * f64::EPSILON;

/// `+1` iff `u > sin²((alpha − phi)/2)`; ties go to `−1`.
pub fn spin_response(u: f64, phi: Angle, alpha: Angle) -> Outcome {
    let half = alpha.signed_diff(phi) / 2.0;
    Outcome::from_bool(u - half.sin().powi(2) > TIE_TOLERANCE)
}

/// Compares the Coulomb forces of `q1` (at separation `theta` from the
/// particle) and `q2` (at `π − theta`) using chord distances `2 sin(θ/2)`.
/// Squared-distance inverses reduce the comparison to
/// `q1 cos²(θ/2) > q2 sin²(θ/2)`; a charge touching the particle wins outright.
pub fn coulomb_outcome(theta: Angle, q1: f64, q2: f64) -> Result<Outcome> {
    check_charges(q1, q2)?;
    let theta = theta.separation(Angle::ZERO);
    if theta == 0.0 && q1 > 0.0 {
        return Ok(Outcome::Plus);
    }
    if theta == PI && q2 > 0.0 {
        return Ok(Outcome::Minus);
    }
    let half = theta / 2.0;
    let (pull1, pull2) = (q1 * half.cos().powi(2), q2 * half.sin().powi(2));
    // relative, so a vanishing but uncontested pull still wins
    Ok(Outcome::from_bool(pull1 - pull2 > TIE_TOLERANCE * (pull1 + pull2)))
}

/// The particle falls onto the winning charge.
pub fn collapse(alpha: Angle, outcome: Outcome) -> ParticleState {
    match outcome {
        Outcome::Plus => ParticleState::PointAt(alpha),
        Outcome::Minus => ParticleState::PointAt(alpha.antipode()),
    }
}

/// Fresh charge fraction plus a position drawn from `state`.
pub fn sample_hidden<R: Rng + ?Sized>(state: &ParticleState, rng: &mut R) -> HiddenState {
    let u = rng.random::<f64>();
    let phi = state.sample_position(rng);
    HiddenState { u, phi }
}
