//! Classical-correlation diagnostics: three-variable joint-measure
//! feasibility, CHSH estimates, and a postselection harness in which outcomes
//! whose hidden angle falls in a rejection arc go undetected.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::mc::{mix_seed, run_trials, Merge};
use crate::model::Outcome;
use crate::variations::{run_sequence, IndependenceMode, Protocol};

/// Names of the three observables, in table order.
pub const LABELS: [&str; 3] = ["E", "F", "G"];
/// Pair order of [`JointTable::joints`].
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Marginals `P(X_i = +1)` and pairwise joints `P(X_i = +1, X_k = +1)` of three
/// ±1 observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTable {
    /// `[p_E, p_F, p_G]`
    pub marginals: [f64; 3],
    /// `[j_EF, j_EG, j_FG]`
    pub joints: [f64; 3],
}

impl JointTable {
    pub fn new(marginals: [f64; 3], joints: [f64; 3]) -> Result<Self> {
        const M: [&str; 3] = ["p_E", "p_F", "p_G"];
        const J: [&str; 3] = ["j_EF", "j_EG", "j_FG"];
        for (name, &v) in M.iter().zip(&marginals).chain(J.iter().zip(&joints)) {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProbability { name, value: v });
            }
        }
        Ok(JointTable { marginals, joints })
    }

    /// Table induced by a measure on the eight atoms.
    pub fn from_atoms(weights: &[f64; 8]) -> Self {
        let mut marginals = [0.0; 3];
        let mut joints = [0.0; 3];
        for (idx, &w) in weights.iter().enumerate() {
            let atom = Atom::from_index(idx);
            for i in 0..3 {
                if atom.0[i].is_plus() {
                    marginals[i] += w;
                }
            }
            for (k, &(i, l)) in PAIRS.iter().enumerate() {
                if atom.0[i].is_plus() && atom.0[l].is_plus() {
                    joints[k] += w;
                }
            }
        }
        JointTable { marginals, joints }
    }

    /// `P(X_i = +1, X_k = +1)`; the diagonal is the marginal.
    pub fn joint(&self, i: usize, k: usize) -> f64 {
        if i == k {
            return self.marginals[i];
        }
        let key = (i.min(k), i.max(k));
        let pos = PAIRS.iter().position(|&p| p == key).expect("index < 3");
        self.joints[pos]
    }

    /// `E[X_i X_k] = 1 − 2 P(X_i ≠ X_k)`.
    pub fn correlation(&self, i: usize, k: usize) -> f64 {
        2.0 * self.agreement(i, k) - 1.0
    }

    /// `P(X_i = X_k)`.
    pub fn agreement(&self, i: usize, k: usize) -> f64 {
        1.0 - self.marginals[i] - self.marginals[k] + 2.0 * self.joint(i, k)
    }

    /// `(1, p_E, p_F, p_G, j_EF, j_EG, j_FG)`
    fn data(&self) -> [f64; 7] {
        let [pe, pf, pg] = self.marginals;
        let [jef, jeg, jfg] = self.joints;
        [1.0, pe, pf, pg, jef, jeg, jfg]
    }
}

/// A joint assignment of the three observables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom(pub [Outcome; 3]);

impl Atom {
    /// Bit `i` of `idx` set means observable `i` is `−1`.
    pub fn from_index(idx: usize) -> Self {
        Atom(std::array::from_fn(|i| Outcome::from_bool(idx >> i & 1 == 0)))
    }

    pub fn index(&self) -> usize {
        (0..3).filter(|&i| !self.0[i].is_plus()).map(|i| 1 << i).sum()
    }

    /// Product of the three signs.
    pub fn parity(&self) -> i8 {
        self.0.iter().map(|o| o.value()).product()
    }

    pub fn all() -> impl Iterator<Item = Atom> {
        (0..8).map(Atom::from_index)
    }

    /// The atom's weight as an affine function of the table data plus
    /// `parity · τ`, where `τ = P(all three +1)` is the one quantity the table
    /// does not fix. Returned as coefficients over
    /// `(1, p_E, p_F, p_G, j_EF, j_EG, j_FG)`.
    fn expansion(&self) -> [f64; 7] {
        // inclusion-exclusion over supersets of the set of '+' coordinates
        let plus: Vec<usize> = (0..3).filter(|&i| self.0[i].is_plus()).collect();
        let mut coeffs = [0.0; 7];
        for mask in 0..8usize {
            let set: Vec<usize> = (0..3).filter(|&i| mask >> i & 1 == 1).collect();
            if !plus.iter().all(|p| set.contains(p)) || set.len() == 3 {
                continue;
            }
            let sign = if (set.len() - plus.len()) % 2 == 0 { 1.0 } else { -1.0 };
            let slot = match set.as_slice() {
                [] => 0,
                [i] => 1 + i,
                [i, k] => 4 + PAIRS.iter().position(|&p| p == (*i, *k)).expect("sorted pair"),
                _ => unreachable!(),
            };
            coeffs[slot] += sign;
        }
        coeffs
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, o) in LABELS.iter().zip(self.0) {
            write!(f, "{label}{}", if o.is_plus() { '+' } else { '-' })?;
        }
        Ok(())
    }
}

/// An explicit joint measure reproducing a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Atom weights indexed by [`Atom::index`].
    pub weights: [f64; 8],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    /// A two-variable cell `P(X_i = a, X_k = b)` is negative.
    FrechetBound,
    /// Two atoms of opposite parity whose combined weight is fixed by the
    /// table and negative.
    AtomPair,
}

/// Farkas-style infeasibility proof: a nonnegative combination of atom
/// weights (`atoms`, each with coefficient one) that the table forces to equal
/// `coefficients · (1, p_E, p_F, p_G, j_EF, j_EG, j_FG) = slack < 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub atoms: Vec<Atom>,
    pub coefficients: [f64; 7],
    pub slack: f64,
}

impl Certificate {
    /// Re-evaluates the certificate against a table.
    pub fn evaluate(&self, table: &JointTable) -> f64 {
        dot(&self.coefficients, &table.data())
    }

    pub fn describe(&self) -> String {
        const NAMES: [&str; 7] = ["1", "p_E", "p_F", "p_G", "j_EF", "j_EG", "j_FG"];
        let atoms: Vec<String> = self.atoms.iter().map(|a| format!("w[{a}]")).collect();
        let mut rhs = String::new();
        for (c, n) in self.coefficients.iter().zip(NAMES) {
            if *c == 0.0 {
                continue;
            }
            let sign = if *c > 0.0 { if rhs.is_empty() { "" } else { " + " } } else { " - " };
            let mag = c.abs();
            if mag == 1.0 {
                rhs.push_str(&format!("{sign}{n}"));
            } else {
                rhs.push_str(&format!("{sign}{mag}·{n}"));
            }
        }
        format!("{} = {} = {:.6e} < 0", atoms.join(" + "), rhs, self.slack)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Feasible(Witness),
    Infeasible(Certificate),
}

impl Verdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Verdict::Feasible(_))
    }
}

/// Absolute slack tolerated before a constraint counts as violated.
pub const FEASIBILITY_TOL: f64 = 1e-12;

fn dot(a: &[f64; 7], b: &[f64; 7]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64; 7], b: &[f64; 7]) -> [f64; 7] {
    std::array::from_fn(|i| a[i] + b[i])
}

/// Decides whether some probability measure on the eight atoms of three ±1
/// variables reproduces the table.
///
/// The seven table entries fix every atom weight up to one free parameter
/// `τ = P(+,+,+)`, which enters each atom with the sign of its parity. So the
/// table is feasible iff the lower bounds on `τ` from even atoms do not exceed
/// the upper bounds from odd atoms. When they cross, the two offending atoms
/// form the certificate.
pub fn feasibility(table: &JointTable) -> Verdict {
    let data = table.data();

    // Two-variable cells first: they are the Fréchet bounds.
    for &(i, k) in &PAIRS {
        for a in [Outcome::Plus, Outcome::Minus] {
            for b in [Outcome::Plus, Outcome::Minus] {
                let cell: Vec<Atom> = Atom::all()
                    .filter(|atom| atom.0[i] == a && atom.0[k] == b)
                    .collect();
                let coeffs = add(&cell[0].expansion(), &cell[1].expansion());
                let slack = dot(&coeffs, &data);
                if slack < -FEASIBILITY_TOL {
                    return Verdict::Infeasible(Certificate {
                        kind: CertificateKind::FrechetBound,
                        atoms: cell,
                        coefficients: coeffs,
                        slack,
                    });
                }
            }
        }
    }

    let mut lower = (f64::NEG_INFINITY, Atom::from_index(0));
    let mut upper = (f64::INFINITY, Atom::from_index(0));
    for atom in Atom::all() {
        let base = dot(&atom.expansion(), &data);
        if atom.parity() > 0 {
            // base + τ ≥ 0
            if -base > lower.0 {
                lower = (-base, atom);
            }
        } else if base < upper.0 {
            // base − τ ≥ 0
            upper = (base, atom);
        }
    }

    if lower.0 > upper.0 + FEASIBILITY_TOL {
        let atoms = vec![lower.1, upper.1];
        let coefficients = add(&lower.1.expansion(), &upper.1.expansion());
        return Verdict::Infeasible(Certificate {
            kind: CertificateKind::AtomPair,
            atoms,
            coefficients,
            slack: dot(&coefficients, &data),
        });
    }

    let tau = if lower.0 <= upper.0 {
        0.5 * (lower.0 + upper.0)
    } else {
        upper.0
    };
    let weights = std::array::from_fn(|idx| {
        let atom = Atom::from_index(idx);
        let w = dot(&atom.expansion(), &data) + atom.parity() as f64 * tau;
        w.max(0.0)
    });
    Verdict::Feasible(Witness { weights })
}

/// The table from the interval-conditioning analysis: `G` is the event that
/// the particle lies in an interval of halfwidth `x` around `θ_g`, `F` and `E`
/// are outcomes of independent devices at `θ_f` and `θ_e`. Entries:
///
/// * `p_E = p_F = ½`, `p_G = x/π`
/// * `μ(F₁∩G₁) = ½ (1 + cos(θ_f − θ_g) sin x / x) x/π`, likewise for `E`
/// * `μ(E₂∩F₁) = ¼`, hence `j_EF = ¼`
pub fn build_var4_table(x: f64, theta_f: Angle, theta_g: Angle, theta_e: Angle) -> Result<JointTable> {
    if !(x > 0.0 && x <= PI) {
        return Err(Error::InvalidHalfwidth(x));
    }
    let weight = x / PI;
    let sinc = x.sin() / x;
    let with_g = |theta: Angle| 0.5 * (1.0 + theta.signed_diff(theta_g).cos() * sinc) * weight;
    let p_f = 0.5;
    let e2_f1 = 0.25;
    JointTable::new([0.5, p_f, weight], [p_f - e2_f1, with_g(theta_e), with_g(theta_f)])
}

/// Sign agreement counts for a stream of detected or undetected pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationAccumulator {
    pub same: u64,
    pub different: u64,
    pub rejected: u64,
}

impl CorrelationAccumulator {
    pub fn push(&mut self, a: Outcome, b: Outcome) {
        if a == b {
            self.same += 1;
        } else {
            self.different += 1;
        }
    }

    pub fn push_detected(&mut self, a: Option<Outcome>, b: Option<Outcome>) {
        match (a, b) {
            (Some(a), Some(b)) => self.push(a, b),
            _ => self.rejected += 1,
        }
    }

    pub fn estimate(&self) -> CorrelationEstimate {
        let n = self.same + self.different;
        let (e_hat, std_error) = if n == 0 {
            (None, None)
        } else {
            let e = (self.same as f64 - self.different as f64) / n as f64;
            let se = if n > 1 {
                // sample variance of ±1 products is (1 − e²) n / (n − 1)
                ((1.0 - e * e).max(0.0) / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            (Some(e), Some(se))
        };
        CorrelationEstimate {
            e_hat,
            std_error,
            n_pairs: n,
            n_rejected: self.rejected,
            n_same: self.same,
        }
    }
}

impl Merge for CorrelationAccumulator {
    fn merge(&mut self, other: Self) {
        self.same += other.same;
        self.different += other.different;
        self.rejected += other.rejected;
    }
}

impl Merge for [CorrelationAccumulator; 4] {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    /// Mean product of signs over accepted pairs; `None` if nothing was accepted.
    pub e_hat: Option<f64>,
    pub std_error: Option<f64>,
    pub n_pairs: u64,
    pub n_rejected: u64,
    pub n_same: u64,
}

impl CorrelationEstimate {
    pub fn p_same(&self) -> Option<f64> {
        (self.n_pairs > 0).then(|| self.n_same as f64 / self.n_pairs as f64)
    }
}

pub fn correlation(pairs: &[(Outcome, Outcome)]) -> CorrelationEstimate {
    let mut acc = CorrelationAccumulator::default();
    for &(a, b) in pairs {
        acc.push(a, b);
    }
    acc.estimate()
}

/// Correlation over coincident detections only.
pub fn postselected_correlation(pairs: &[(Option<Outcome>, Option<Outcome>)]) -> CorrelationEstimate {
    let mut acc = CorrelationAccumulator::default();
    for &(a, b) in pairs {
        acc.push_detected(a, b);
    }
    acc.estimate()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshValue {
    pub s: f64,
    pub within_classical_bound: bool,
}

/// `S = E(a,b) − E(a,b') + E(a',b) + E(a',b')`.
pub fn chsh(e_ab: f64, e_ab2: f64, e_a2b: f64, e_a2b2: f64) -> ChshValue {
    let s = e_ab - e_ab2 + e_a2b + e_a2b2;
    ChshValue {
        s,
        within_classical_bound: s.abs() <= 2.0,
    }
}

/// Largest CHSH value reachable from a three-variable table by reusing one
/// variable on both sides (`a' = b`, so `E(a',b) = 1`) and flipping signs:
/// `1 + max(s₁E_EF + s₂E_EG + s₃E_FG)` over sign patterns with `s₁s₂s₃ = −1`.
/// Any table with a joint measure gives at most 2.
pub fn three_variable_chsh(table: &JointTable) -> f64 {
    let e = PAIRS.map(|(i, k)| table.correlation(i, k));
    const SIGNS: [[f64; 3]; 4] = [[1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, -1.0]];
    let best = SIGNS
        .iter()
        .map(|s| s[0] * e[0] + s[1] * e[1] + s[2] * e[2])
        .fold(f64::NEG_INFINITY, f64::max);
    1.0 + best
}

/// Sources of correlated ±1 pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairModel {
    /// Two polarizing measurements in sequence on one particle; the first
    /// outcome is side A, the second side B.
    SequentialAerts,
    /// Independent devices on independently prepared particles.
    ProductMeasure,
    /// One shared hidden angle `φ`; each side reports `+1` iff
    /// `cos(φ − setting) > 0`.
    DeterministicLocal,
}

impl PairModel {
    pub const ALL: [PairModel; 3] = [
        PairModel::SequentialAerts,
        PairModel::ProductMeasure,
        PairModel::DeterministicLocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairModel::SequentialAerts => "sequential-aerts",
            PairModel::ProductMeasure => "product-measure",
            PairModel::DeterministicLocal => "deterministic-local",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Analytic `E(a, b)` without postselection.
    pub fn correlation_law(self, a: Angle, b: Angle) -> f64 {
        let d = a.separation(b);
        match self {
            PairModel::SequentialAerts => d.cos(),
            PairModel::ProductMeasure => 0.0,
            PairModel::DeterministicLocal => 1.0 - 2.0 * d / PI,
        }
    }
}

/// One emitted pair with the hidden angle each side's detector sees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDraw {
    pub a: Outcome,
    pub b: Outcome,
    pub hidden_a: Angle,
    pub hidden_b: Angle,
}

pub fn sample_model_pair<R: Rng + ?Sized>(model: PairModel, a: Angle, b: Angle, rng: &mut R) -> PairDraw {
    let angles = [a, b];
    match model {
        PairModel::SequentialAerts | PairModel::ProductMeasure => {
            let protocol = if model == PairModel::SequentialAerts {
                Protocol::Baseline
            } else {
                Protocol::IndependentDevices(IndependenceMode::Reprepare)
            };
            let r = run_sequence(&protocol, &angles, rng).expect("two angles, valid protocol");
            PairDraw {
                a: r.outcomes[0],
                b: r.outcomes[1],
                hidden_a: r.trace[0].phi(),
                hidden_b: r.trace[1].phi(),
            }
        }
        PairModel::DeterministicLocal => {
            let phi = Angle::new(rng.random::<f64>() * TAU);
            PairDraw {
                a: deterministic_local_outcome(phi, a),
                b: deterministic_local_outcome(phi, b),
                hidden_a: phi,
                hidden_b: phi,
            }
        }
    }
}

pub fn deterministic_local_outcome(phi: Angle, setting: Angle) -> Outcome {
    Outcome::from_bool(phi.signed_diff(setting).cos() > 0.0)
}

/// Per-side rejection arcs. A side with analyzer angle `c` misses the particle
/// when its hidden angle lies within `επ/2` of `c ± π/2 + offset`, so each side
/// rejects a fraction `ε` of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionDomains {
    pub epsilon: f64,
    pub offset: f64,
}

impl DetectionDomains {
    pub fn new(epsilon: f64, offset: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(DetectionDomains { epsilon, offset })
    }

    pub fn detects(&self, hidden: Angle, setting: Angle) -> bool {
        if self.epsilon == 0.0 {
            return true;
        }
        let half = self.epsilon * PI / 2.0;
        let c1 = setting + (PI / 2.0 + self.offset);
        let c2 = setting + (-PI / 2.0 + self.offset);
        hidden.separation(c1) > half && hidden.separation(c2) > half
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting {
    pub a: Angle,
    pub a2: Angle,
    pub b: Angle,
    pub b2: Angle,
    pub detection: Option<DetectionDomains>,
}

impl ChshSetting {
    /// `a = 0, a' = π/2, b = π/4, b' = 3π/4`.
    pub fn standard() -> Self {
        ChshSetting {
            a: Angle::ZERO,
            a2: Angle::new(PI / 2.0),
            b: Angle::new(PI / 4.0),
            b2: Angle::new(3.0 * PI / 4.0),
            detection: None,
        }
    }

    pub fn with_detection(mut self, d: DetectionDomains) -> Self {
        self.detection = Some(d);
        self
    }

    /// Setting pairs in CHSH order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn pairs(&self) -> [(Angle, Angle); 4] {
        [(self.a, self.b), (self.a, self.b2), (self.a2, self.b), (self.a2, self.b2)]
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = self.detection {
            DetectionDomains::new(d.epsilon, d.offset)?;
        }
        Ok(())
    }

    /// Analytic `S` for a model with full detection.
    pub fn law_s(&self, model: PairModel) -> f64 {
        let e = self.pairs().map(|(x, y)| model.correlation_law(x, y));
        chsh(e[0], e[1], e[2], e[3]).s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub correlations: [CorrelationEstimate; 4],
    /// `None` if some setting pair had no coincidences.
    pub s: Option<f64>,
    /// Combined standard error of the four independent estimates.
    pub std_error: Option<f64>,
    /// Coincidences over emitted pairs.
    pub detection_rate: f64,
}

/// Estimates `S` from `n` emitted pairs per setting pair, counting only
/// coincident detections.
pub fn postselected_chsh(setting: &ChshSetting, model: PairModel, n: u64, seed: u64) -> Result<ChshEstimate> {
    setting.validate()?;
    if n == 0 {
        return Err(Error::NoTrials);
    }
    let detection = setting.detection;
    let accs = setting.pairs().map(|(x, y)| {
        // one independent stream family per setting pair
        let sub = mix_seed(seed, (x.radians().to_bits() >> 1) ^ y.radians().to_bits());
        run_trials(sub, n, |rng, acc: &mut CorrelationAccumulator| {
            let d = sample_model_pair(model, x, y, rng);
            match detection {
                None => acc.push(d.a, d.b),
                Some(dom) => {
                    let da = dom.detects(d.hidden_a, x).then_some(d.a);
                    let db = dom.detects(d.hidden_b, y).then_some(d.b);
                    acc.push_detected(da, db);
                }
            }
        })
    });
    let correlations = accs.map(|a| a.estimate());
    let coincidences: u64 = correlations.iter().map(|c| c.n_pairs).sum();
    let detection_rate = coincidences as f64 / (4 * n) as f64;
    let (s, std_error) = match correlations.map(|c| c.e_hat.zip(c.std_error)) {
        [Some(e0), Some(e1), Some(e2), Some(e3)] => {
            let s = chsh(e0.0, e1.0, e2.0, e3.0).s;
            let se = (e0.1.powi(2) + e1.1.powi(2) + e2.1.powi(2) + e3.1.powi(2)).sqrt();
            (Some(s), Some(se))
        }
        _ => (None, None),
    };
    Ok(ChshEstimate {
        correlations,
        s,
        std_error,
        detection_rate,
    })
}

/// Postselected `S` of the deterministic local model by midpoint quadrature
/// over the hidden angle with `grid` nodes.
pub fn deterministic_local_chsh_exact(setting: &ChshSetting, grid: usize) -> Option<f64> {
    let mut e = [0.0; 4];
    for (slot, (x, y)) in setting.pairs().into_iter().enumerate() {
        let (mut sum, mut count) = (0.0, 0u64);
        for i in 0..grid {
            let phi = Angle::new((i as f64 + 0.5) / grid as f64 * TAU);
            let seen = setting
                .detection
                .is_none_or(|d| d.detects(phi, x) && d.detects(phi, y));
            if seen {
                sum += deterministic_local_outcome(phi, x).as_f64() * deterministic_local_outcome(phi, y).as_f64();
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        e[slot] = sum / count as f64;
    }
    Some(chsh(e[0], e[1], e[2], e[3]).s)
}

/// Brute-force search over rejection-arc offsets for the deterministic local
/// model; returns the offset with the largest postselected `S` and that `S`.
pub fn search_rejection_offset(setting: &ChshSetting, epsilon: f64, offsets: usize, grid: usize) -> Result<(f64, f64)> {
    DetectionDomains::new(epsilon, 0.0)?;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..offsets.max(1) {
        let offset = k as f64 / offsets.max(1) as f64 * PI - PI / 2.0;
        let trial = setting.with_detection(DetectionDomains { epsilon, offset });
        if let Some(s) = deterministic_local_chsh_exact(&trial, grid) {
            if s > best.1 {
                best = (offset, s);
            }
        }
    }
    Ok(best)
}
