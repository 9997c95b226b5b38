//! Stage game between the cluster head and each cluster member: reliability,
//! punishment, utility, data trustworthiness, best responses and the
//! Nash / Pareto predicates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster head action toward one member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChAction {
    #[serde(rename = "B")]
    Beacon,
    #[serde(rename = "NB")]
    NoBeacon,
}

/// Cluster member action on its packet window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmAction {
    #[serde(rename = "D")]
    Drop,
    #[serde(rename = "ND")]
    NoDrop,
}

impl ChAction {
    pub fn as_str(self) -> &'static str {
        match self {
            ChAction::Beacon => "B",
            ChAction::NoBeacon => "NB",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            ChAction::Beacon => ChAction::NoBeacon,
            ChAction::NoBeacon => ChAction::Beacon,
        }
    }
}

impl CmAction {
    pub fn as_str(self) -> &'static str {
        match self {
            CmAction::Drop => "D",
            CmAction::NoDrop => "ND",
        }
    }

    pub fn flip(self) -> Self {
        match self {
            CmAction::Drop => CmAction::NoDrop,
            CmAction::NoDrop => CmAction::Drop,
        }
    }
}

impl fmt::Display for ChAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for CmAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionPair {
    pub ch: ChAction,
    pub cm: CmAction,
}

impl ActionPair {
    pub const fn new(ch: ChAction, cm: CmAction) -> Self {
        Self { ch, cm }
    }

    pub fn is_cooperative(&self) -> bool {
        self.ch == ChAction::Beacon && self.cm == CmAction::NoDrop
    }
}

/// Utility weights and the window/packet constants the punishment depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameWeights {
    pub alpha: f64,
    pub beta: f64,
    pub eb_joules_per_bit: f64,
    pub tp: u32,
    pub packet_len_bits: u32,
    /// Multiplier applied to the joule-valued punishment inside the utility.
    pub punishment_gain: f64,
}

impl Default for GameWeights {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            beta: 0.4,
            eb_joules_per_bit: 50e-9,
            tp: 100,
            packet_len_bits: 1024,
            punishment_gain: 1000.0,
        }
    }
}

impl GameWeights {
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !((self.alpha + self.beta - 1.0).abs() <= 1e-9) {
            v.push(("alpha", "alpha + beta = 1".to_string()));
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            v.push(("beta", "alpha, beta >= 0".to_string()));
        }
        if self.tp < 1 {
            v.push(("tp", "tp >= 1".to_string()));
        }
        if !(self.eb_joules_per_bit > 0.0) {
            v.push(("eb_joules", "eb > 0".to_string()));
        }
        if !(self.punishment_gain >= 0.0) {
            v.push(("punishment_gain", "punishment_gain >= 0".to_string()));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(
                v.into_iter()
                    .map(|(field, constraint)| crate::error::Violation { field, constraint })
                    .collect(),
            ))
        }
    }

    /// Energy charged per packet, `L * eb`.
    ///
    /// The low significand bits are cleared so that `k * packet_energy()` is
    /// exact for every packet count up to `4 * tp`. Per-window sums such as
    /// `x1 + x2` then equal the full-window energy bit for bit; the value moves
    /// by less than `2^-40` relative.
    pub fn packet_energy(&self) -> f64 {
        let raw = f64::from(self.packet_len_bits) * self.eb_joules_per_bit;
        let count_bits = 64 - (u64::from(self.tp) * 4).leading_zeros();
        f64::from_bits(raw.to_bits() & !((1u64 << count_bits) - 1))
    }

    /// Energy of a full window, `tp * L * eb`.
    pub fn window_energy(&self) -> f64 {
        f64::from(self.tp) * self.packet_energy()
    }
}

/// Packets delivered to the cluster head in one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowOutcome {
    pub forwarded: u32,
    pub tp: u32,
}

impl WindowOutcome {
    pub fn new(forwarded: u32, tp: u32) -> Self {
        Self { forwarded, tp }
    }

    pub fn is_over_transmission(&self) -> bool {
        self.forwarded > self.tp
    }

    pub fn has_drops(&self) -> bool {
        self.forwarded < self.tp
    }

    /// The action the cluster head infers from what it received.
    pub fn observed_action(&self) -> CmAction {
        if self.has_drops() {
            CmAction::Drop
        } else {
            CmAction::NoDrop
        }
    }
}

pub fn reliability(outcome: WindowOutcome) -> f64 {
    debug_assert!(outcome.tp >= 1);
    f64::from(outcome.forwarded) / f64::from(outcome.tp)
}

/// The two punishment components `(x1, x2)` for a window.
///
/// `x1` prices the delivered packets, `x2` the missing ones; over-transmitted
/// packets count in `x1` and leave `x2` at zero.
pub fn punishment_terms(outcome: WindowOutcome, weights: &GameWeights) -> (f64, f64) {
    let per_packet = weights.packet_energy();
    let missing = outcome.tp.saturating_sub(outcome.forwarded);
    (
        f64::from(outcome.forwarded) * per_packet,
        f64::from(missing) * per_packet,
    )
}

/// Punishment in joules for one action pair.
pub fn punishment(pair: ActionPair, outcome: WindowOutcome, weights: &GameWeights) -> f64 {
    let (x1, x2) = punishment_terms(outcome, weights);
    match (pair.ch, pair.cm) {
        (ChAction::Beacon, CmAction::NoDrop) => 0.0,
        (ChAction::NoBeacon, CmAction::NoDrop) => x1,
        (ChAction::Beacon, CmAction::Drop) => x2,
        (ChAction::NoBeacon, CmAction::Drop) => x1 + x2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityBreakdown {
    pub rssi_term: f64,
    pub rl_term: f64,
    /// Punishment in joules.
    pub xi: f64,
    /// Punishment as it enters the utility, `xi * punishment_gain`.
    pub xi_scaled: f64,
    pub u: f64,
}

pub fn utility(rssi_score: f64, rl: f64, xi: f64, weights: &GameWeights) -> UtilityBreakdown {
    let xi_scaled = xi * weights.punishment_gain;
    UtilityBreakdown {
        rssi_term: rssi_score,
        rl_term: rl,
        xi,
        xi_scaled,
        u: weights.alpha * rssi_score + weights.beta * rl - xi_scaled,
    }
}

/// Average over rounds of the summed member utilities.
pub fn data_trustworthiness<R: AsRef<[f64]>>(history: &[R]) -> Result<f64> {
    if history.is_empty() {
        return Err(Error::Domain("data trustworthiness of an empty history".into()));
    }
    let total: f64 = history.iter().map(|round| round.as_ref().iter().sum::<f64>()).sum();
    Ok(total / history.len() as f64)
}

/// Best response of a member given its utility under each of its actions.
/// Ties go to `NoDrop`.
pub fn best_response_cm(u_no_drop: f64, u_drop: f64) -> CmAction {
    if u_drop > u_no_drop {
        CmAction::Drop
    } else {
        CmAction::NoDrop
    }
}

/// Pure-strategy profile: the cluster head's action toward each member and each member's action.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile {
    pub ch: Vec<ChAction>,
    pub cms: Vec<CmAction>,
}

impl Profile {
    pub fn uniform(n: usize, ch: ChAction, cm: CmAction) -> Self {
        Self {
            ch: vec![ch; n],
            cms: vec![cm; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Payoffs {
    pub ch: f64,
    pub cms: Vec<f64>,
}

/// Largest cluster for which every cluster-head strategy is enumerated.
const MAX_ENUMERATED_CH: usize = 16;

/// True iff no single player gains strictly by deviating alone.
///
/// Each member's deviation flips its own action. The cluster head's strategy is
/// its whole beacon vector; every alternative vector is tried for clusters of up
/// to 16 members, single-member flips beyond that.
pub fn is_nash<F>(profile: &Profile, payoff: F) -> bool
where
    F: Fn(&Profile) -> Payoffs,
{
    let base = payoff(profile);
    let n = profile.cms.len();

    for i in 0..n {
        let mut dev = profile.clone();
        dev.cms[i] = dev.cms[i].flip();
        if payoff(&dev).cms[i] > base.cms[i] {
            return false;
        }
    }

    if n <= MAX_ENUMERATED_CH {
        for mask in 1u32..(1u32 << n) {
            let mut dev = profile.clone();
            for (i, a) in dev.ch.iter_mut().enumerate() {
                if mask & (1 << i) != 0 {
                    *a = a.flip();
                }
            }
            if payoff(&dev).ch > base.ch {
                return false;
            }
        }
    } else {
        for i in 0..n {
            let mut dev = profile.clone();
            dev.ch[i] = dev.ch[i].flip();
            if payoff(&dev).ch > base.ch {
                return false;
            }
        }
    }
    true
}

pub fn is_pareto_optimal_dt(candidate: f64, alternatives: &[f64]) -> bool {
    alternatives.iter().all(|&a| candidate >= a)
}

/// Stage payoffs of the cluster game with fixed per-member link scores.
///
/// A member playing `NoDrop` delivers its whole window, `Drop` delivers nothing.
/// The cluster head's payoff is the round's summed member utility.
#[derive(Debug, Clone)]
pub struct StagePayoffs {
    pub rssi: Vec<f64>,
    pub weights: GameWeights,
}

impl StagePayoffs {
    pub fn member_utility(&self, i: usize, pair: ActionPair) -> f64 {
        let tp = self.weights.tp;
        let outcome = match pair.cm {
            CmAction::NoDrop => WindowOutcome::new(tp, tp),
            CmAction::Drop => WindowOutcome::new(0, tp),
        };
        let xi = punishment(pair, outcome, &self.weights);
        utility(self.rssi[i], reliability(outcome), xi, &self.weights).u
    }

    pub fn evaluate(&self, profile: &Profile) -> Payoffs {
        let cms: Vec<f64> = (0..profile.cms.len())
            .map(|i| self.member_utility(i, ActionPair::new(profile.ch[i], profile.cms[i])))
            .collect();
        Payoffs {
            ch: cms.iter().sum(),
            cms,
        }
    }
}
