//! Round-based TDMA simulation of one cluster under the punish-and-forgive
//! beacon policy.
//!
//! Each round every member transmits its window in its own slot. The cluster
//! head inspects what arrived, then grants or withholds the beacon (which
//! doubles as acknowledgement and sleep permission). Members that drop are
//! designated malicious and denied the beacon until their forgiveness round
//! `i + i|N|`; from that round on, any drop or over-transmission by member `i`
//! is attributed to hardware failure and the member is listed in the HWL.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::baselines::ScenarioId;
use crate::config::{FaultModes, MaliciousSpec, ShadowingMode, SimConfig};
use crate::error::{Error, Result};
use crate::game::{
    best_response_cm, punishment, punishment_terms, reliability, utility, ActionPair, ChAction, CmAction, GameWeights,
    WindowOutcome,
};
use crate::radio::{self, LinkGeometry};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FaultMode {
    /// Each packet is lost with probability `p_drop`.
    Drop { p_drop: f64 },
    /// The window is sent with `round(tp * gamma)` extra packets.
    OverTransmit { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CmBehavior {
    Benevolent,
    RationalMalicious,
    HwFaulty(FaultMode),
}

/// The cluster head's current view of a member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Designation {
    Benevolent,
    Malicious,
    #[serde(rename = "HWL")]
    Hwl,
}

/// Final verdict on a member after a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Benevolent,
    Malicious,
    HwFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmState {
    pub id: u32,
    pub behavior: CmBehavior,
    /// Strategic intent; hardware faults may still alter what is delivered.
    pub current_action: CmAction,
    pub designation: Designation,
    pub energy_spent_joules: f64,
    pub pending_retransmissions: u32,
    pub theta_deg: f64,
    pub direction_draw: f64,
    pub punished_windows: u32,
}

impl CmState {
    pub fn new(id: u32, behavior: CmBehavior) -> Self {
        let current_action = match behavior {
            CmBehavior::RationalMalicious => CmAction::Drop,
            _ => CmAction::NoDrop,
        };
        Self {
            id,
            behavior,
            current_action,
            designation: Designation::Benevolent,
            energy_spent_joules: 0.0,
            pending_retransmissions: 0,
            theta_deg: 0.0,
            direction_draw: 0.5,
            punished_windows: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChState {
    pub beacon_grants: Vec<ChAction>,
    pub hwl: BTreeSet<u32>,
    pub forgiveness_schedule: Vec<u32>,
}

impl ChState {
    pub fn new(n_cms: u32) -> Self {
        Self {
            beacon_grants: vec![ChAction::Beacon; n_cms as usize],
            hwl: BTreeSet::new(),
            forgiveness_schedule: (1..=n_cms).map(|i| forgiveness_round(i, n_cms)).collect(),
        }
    }
}

/// Per-member slot of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmRound {
    pub cm_id: u32,
    pub ch_action: ChAction,
    /// Action as observed by the cluster head.
    pub cm_action: CmAction,
    pub forwarded: u32,
    pub sent: u32,
    pub rl: f64,
    pub rssi: f64,
    pub xi_joules: f64,
    pub utility: f64,
    /// Utility this member would have earned at (B, ND) on the same channel.
    pub optimum_utility: f64,
    pub norm_utility: f64,
    pub energy_j: f64,
    pub wasted_j: f64,
    pub designation: Designation,
    /// The round is at or after this member's forgiveness round.
    pub post_equilibrium: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub rd: u32,
    pub tp: u32,
    pub cms: Vec<CmRound>,
    /// Summed member utility of this round.
    pub dt_round: f64,
    /// Summed (B, ND) utility of this round.
    pub dt_optimum: f64,
    /// Average of `dt_round` over rounds `1..=rd`.
    pub dt_running: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: ScenarioId,
    pub config: SimConfig,
    pub rounds: Vec<RoundRecord>,
    pub malicious_ids: Vec<u32>,
    pub faulty: Vec<(u32, FaultMode)>,
    pub hwl: Vec<u32>,
    /// Empty unless the punish-and-forgive policy ran.
    pub classifications: Vec<Classification>,
    pub equilibrium_round: Option<u32>,
    /// Zero-shadowing link score of each member at start of run.
    pub nominal_rssi: Vec<f64>,
    pub final_states: Vec<CmState>,
}

impl SimResult {
    pub fn n_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Average summed utility per round over the whole run.
    pub fn dt(&self) -> Result<f64> {
        let per_round: Vec<[f64; 1]> = self.rounds.iter().map(|r| [r.dt_round]).collect();
        crate::game::data_trustworthiness(&per_round)
    }

    pub fn faulty_ids(&self) -> BTreeSet<u32> {
        self.faulty.iter().map(|(id, _)| *id).collect()
    }

    pub fn total_wasted_j(&self) -> f64 {
        self.rounds.iter().flat_map(|r| &r.cms).map(|c| c.wasted_j).sum()
    }

    pub fn total_energy_j(&self) -> f64 {
        self.final_states.iter().map(|c| c.energy_spent_joules).sum()
    }
}

/// Slot order of a round: member `k` transmits in slot `k`.
pub fn tdma_schedule(n_cms: u32) -> Vec<u32> {
    (1..=n_cms).collect()
}

/// Round at which member `id` may be forgiven, `id + id * |N|`.
pub fn forgiveness_round(id: u32, n_cms: u32) -> u32 {
    id + id * n_cms
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeaconDecision {
    pub action: ChAction,
    pub designation: Designation,
}

/// Cluster head response to the window it just received from member `id`.
pub fn beacon_policy(id: u32, designation: Designation, outcome: WindowOutcome, rd: u32, n_cms: u32) -> BeaconDecision {
    let forgive_at = forgiveness_round(id, n_cms);
    let anomalous = outcome.has_drops() || outcome.is_over_transmission();
    let (action, designation) = match designation {
        Designation::Hwl => (ChAction::Beacon, Designation::Hwl),
        _ if rd >= forgive_at && anomalous => (ChAction::Beacon, Designation::Hwl),
        Designation::Benevolent if outcome.has_drops() => (ChAction::NoBeacon, Designation::Malicious),
        Designation::Benevolent => (ChAction::Beacon, Designation::Benevolent),
        Designation::Malicious if rd >= forgive_at => (ChAction::Beacon, Designation::Benevolent),
        Designation::Malicious => (ChAction::NoBeacon, Designation::Malicious),
    };
    BeaconDecision { action, designation }
}

/// What one member puts on the air in its slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub outcome: WindowOutcome,
    pub sent: u32,
}

/// Transmit one window. `rng` is consumed only by drop-faulty members.
pub fn cm_transmit<R: Rng + ?Sized>(cm: &CmState, intent: CmAction, tp: u32, rng: &mut R) -> Transmission {
    match cm.behavior {
        CmBehavior::HwFaulty(FaultMode::Drop { p_drop }) => {
            let keep = (1.0 - p_drop).clamp(0.0, 1.0);
            let forwarded = Binomial::new(u64::from(tp), keep)
                .expect("probability clamped to [0, 1]")
                .sample(rng) as u32;
            Transmission {
                outcome: WindowOutcome::new(forwarded, tp),
                sent: tp,
            }
        }
        CmBehavior::HwFaulty(FaultMode::OverTransmit { gamma }) => {
            let n = (f64::from(tp) * (1.0 + gamma)).round() as u32;
            Transmission {
                outcome: WindowOutcome::new(n, tp),
                sent: n,
            }
        }
        _ => match intent {
            CmAction::NoDrop => Transmission {
                outcome: WindowOutcome::new(tp, tp),
                sent: tp,
            },
            CmAction::Drop => Transmission {
                outcome: WindowOutcome::new(0, tp),
                sent: 0,
            },
        },
    }
}

/// Verdict on a member from its `(rd, outcome)` history.
///
/// Windows from `equilibrium_round` on that drop or over-transmit mean
/// hardware failure; earlier drops alone mean a (rational) attacker.
pub fn classify_cm(history: &[(u32, WindowOutcome)], equilibrium_round: u32) -> Result<Classification> {
    if history.is_empty() {
        return Err(Error::Domain("cannot classify a member without any window".into()));
    }
    let anomalous_after = history
        .iter()
        .any(|(rd, o)| *rd >= equilibrium_round && (o.has_drops() || o.is_over_transmission()));
    let dropped_before = history.iter().any(|(rd, o)| *rd < equilibrium_round && o.has_drops());
    Ok(if anomalous_after {
        Classification::HwFailure
    } else if dropped_before {
        Classification::Malicious
    } else {
        Classification::Benevolent
    })
}

/// Run the punish-and-forgive game.
pub fn run_simulation(config: &SimConfig) -> Result<SimResult> {
    run_scenario(config, ScenarioId::Repeated)
}

/// Placement of attackers and faults for one run.
struct Cast {
    malicious: Vec<u32>,
    faulty: Vec<(u32, FaultMode)>,
}

fn draw_cast(config: &SimConfig, rng: &mut ChaCha8Rng) -> Cast {
    let n = config.n_cms;
    let mut free: Vec<u32> = (1..=n).collect();

    let pinned_faulty = config.hw_fault_ids.clone();
    if let Some(ids) = &pinned_faulty {
        free.retain(|i| !ids.contains(i));
    }

    let malicious = match &config.malicious {
        MaliciousSpec::Ids(ids) => ids.clone(),
        MaliciousSpec::Count(k) => {
            let picks = sample(rng, free.len(), *k as usize);
            picks.into_iter().map(|j| free[j]).collect()
        }
    };
    free.retain(|i| !malicious.contains(i));

    let faulty_ids = match pinned_faulty {
        Some(ids) => ids,
        None => {
            let k = (config.fault_count() as usize).min(free.len());
            let picks = sample(rng, free.len(), k);
            picks.into_iter().map(|j| free[j]).collect()
        }
    };
    let faulty = faulty_ids
        .into_iter()
        .enumerate()
        .map(|(k, id)| {
            let drop = FaultMode::Drop { p_drop: config.p_drop };
            let over = FaultMode::OverTransmit { gamma: config.gamma };
            let mode = match config.fault_modes {
                FaultModes::Drop => drop,
                FaultModes::Over => over,
                FaultModes::Mixed if k % 2 == 0 => drop,
                FaultModes::Mixed => over,
            };
            (id, mode)
        })
        .collect();

    let mut malicious = malicious;
    malicious.sort_unstable();
    Cast { malicious, faulty }
}

fn draw_orientation(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let theta = rng.random_range(0.0..360.0);
    let r: f64 = Open01.sample(rng);
    (theta, r)
}

pub(crate) fn run_scenario(config: &SimConfig, scenario: ScenarioId) -> Result<SimResult> {
    config.validate()?;
    let env = config.environment()?;
    let profile = config.radio_profile();
    let weights: GameWeights = config.weights();
    let n = config.n_cms;
    let tp = config.tp;
    let sigma = env.shadowing_sigma_db;

    let mut setup_rng = stream_rng(config.seed, config.run_index, Stream::Setup);
    let mut shadow_rng = stream_rng(config.seed, config.run_index, Stream::Shadow);
    let mut fault_rng = stream_rng(config.seed, config.run_index, Stream::Fault);
    let mut orient_rng = stream_rng(config.seed, config.run_index, Stream::Orientation);

    let cast = draw_cast(config, &mut setup_rng);
    let mut cms: Vec<CmState> = (1..=n)
        .map(|id| {
            let behavior = if cast.malicious.contains(&id) {
                CmBehavior::RationalMalicious
            } else if let Some((_, mode)) = cast.faulty.iter().find(|(f, _)| *f == id) {
                CmBehavior::HwFaulty(*mode)
            } else {
                CmBehavior::Benevolent
            };
            let mut cm = CmState::new(id, behavior);
            let (theta, r) = draw_orientation(&mut setup_rng);
            cm.theta_deg = theta;
            cm.direction_draw = r;
            cm
        })
        .collect();
    let mut ch = ChState::new(n);

    let tc_packet = radio::transmission_cost(&profile, config.power_level, config.packet_len_bits)?;
    let slot_s = f64::from(tp) * profile.airtime_s(config.packet_len_bits);
    let idle_j = profile.voltage_v * profile.radio_on_current_a * slot_s * f64::from(n.saturating_sub(1));

    let geometry = |cm: &CmState| LinkGeometry {
        distance_m: config.d_ich_m,
        theta_deg: cm.theta_deg,
        doi: config.doi(),
        isotropic: config.isotropic,
        direction_draw: cm.direction_draw,
    };
    let mut mean_pl: Vec<f64> = cms
        .iter()
        .map(|cm| radio::mean_path_loss(&env, &geometry(cm), &profile))
        .collect::<Result<_>>()?;
    let nominal_rssi: Vec<f64> = mean_pl
        .iter()
        .map(|pl| radio::rssi_score(tc_packet, *pl, env.noise_dbm, config.tc_reference_j))
        .collect::<Result<_>>()?;

    let n_rounds = config.n_rounds();
    let mut rounds = Vec::with_capacity(n_rounds as usize);
    let mut dt_sum = 0.0;

    for rd in 1..=n_rounds {
        // every member draws every round so scenarios stay paired
        let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut shadow_rng)).collect();
        if config.redraw_theta {
            for (k, cm) in cms.iter_mut().enumerate() {
                let (theta, r) = draw_orientation(&mut orient_rng);
                cm.theta_deg = theta;
                cm.direction_draw = r;
                mean_pl[k] = radio::mean_path_loss(&env, &geometry(cm), &profile)?;
            }
        }

        let mut slots = Vec::with_capacity(n as usize);
        for id in tdma_schedule(n) {
            let k = (id - 1) as usize;
            let cm = &mut cms[k];
            let is_attacker = cm.behavior == CmBehavior::RationalMalicious;

            let intent = match scenario {
                ScenarioId::Repeated => cm.current_action,
                ScenarioId::NoDefense => cm.current_action,
                one_shot => {
                    let pinned = one_shot.pinned_pair().expect("one-shot scenario").cm;
                    if is_attacker {
                        pinned
                    } else {
                        CmAction::NoDrop
                    }
                }
            };
            let tx = cm_transmit(cm, intent, tp, &mut fault_rng);
            let outcome = tx.outcome;
            let observed = outcome.observed_action();

            let ch_action = match scenario {
                ScenarioId::Repeated => {
                    let decision = beacon_policy(id, cm.designation, outcome, rd, n);
                    cm.designation = decision.designation;
                    if decision.designation == Designation::Hwl {
                        ch.hwl.insert(id);
                    }
                    decision.action
                }
                ScenarioId::NoDefense => {
                    if observed == CmAction::Drop {
                        ChAction::NoBeacon
                    } else {
                        ChAction::Beacon
                    }
                }
                one_shot => one_shot.pinned_pair().expect("one-shot scenario").ch,
            };
            ch.beacon_grants[k] = ch_action;

            let pair = ActionPair::new(ch_action, observed);
            let xi = if scenario == ScenarioId::NoDefense {
                0.0
            } else {
                punishment(pair, outcome, &weights)
            };
            let rl = reliability(outcome);

            let fading = match config.shadowing {
                ShadowingMode::Sampled => sigma * z[k],
                ShadowingMode::Fixed => 0.0,
            };
            let margin = match config.shadowing {
                ShadowingMode::Sampled => 0.0,
                ShadowingMode::Fixed => sigma,
            };
            let rssi = radio::rssi_score(
                tc_packet,
                mean_pl[k] + fading + margin,
                env.noise_dbm,
                config.tc_reference_j,
            )?;
            let reference_rssi = rssi + margin;
            let u = utility(rssi, rl, xi, &weights);
            let optimum = weights.alpha * rssi + weights.beta;
            let reference = weights.alpha * reference_rssi + weights.beta;
            if !(reference > 0.0) {
                return Err(Error::Domain(format!(
                    "link score {reference_rssi:.3} of member {id} leaves no positive reference utility"
                )));
            }

            let per_packet = tc_packet;
            let mut energy = f64::from(tx.sent) * per_packet;
            let mut wasted = f64::from(outcome.tp.saturating_sub(outcome.forwarded)) * per_packet
                + f64::from(outcome.forwarded.saturating_sub(outcome.tp)) * per_packet;
            if ch_action == ChAction::NoBeacon {
                // no acknowledgement: resend once; no sleep permission: stay awake
                let resend = f64::from(tx.sent) * per_packet;
                energy += resend + idle_j;
                wasted += resend + idle_j;
                cm.pending_retransmissions = tx.sent;
            } else {
                cm.pending_retransmissions = 0;
            }
            cm.energy_spent_joules += energy;

            if scenario == ScenarioId::Repeated && is_attacker && cm.current_action == CmAction::Drop {
                if ch_action == ChAction::NoBeacon {
                    cm.punished_windows += 1;
                }
                if cm.punished_windows >= 1 {
                    let r = nominal_rssi[k];
                    let full_drop = WindowOutcome::new(0, tp);
                    let (x1, x2) = punishment_terms(full_drop, &weights);
                    let u_forgiven = utility(r, 1.0, 0.0, &weights).u;
                    let u_punished = utility(r, 0.0, x1 + x2, &weights).u;
                    cm.current_action = best_response_cm(u_forgiven, u_punished);
                }
            }

            slots.push(CmRound {
                cm_id: id,
                ch_action,
                cm_action: observed,
                forwarded: outcome.forwarded,
                sent: tx.sent,
                rl,
                rssi,
                xi_joules: xi,
                utility: u.u,
                optimum_utility: optimum,
                norm_utility: u.u / reference,
                energy_j: energy,
                wasted_j: wasted,
                designation: cm.designation,
                post_equilibrium: rd >= forgiveness_round(id, n),
            });
        }

        let dt_round: f64 = slots.iter().map(|s| s.utility).sum();
        let dt_optimum: f64 = slots.iter().map(|s| s.optimum_utility).sum();
        dt_sum += dt_round;
        rounds.push(RoundRecord {
            rd,
            tp,
            cms: slots,
            dt_round,
            dt_optimum,
            dt_running: dt_sum / f64::from(rd),
        });
    }

    let classifications = if scenario == ScenarioId::Repeated {
        (1..=n)
            .map(|id| {
                let k = (id - 1) as usize;
                let history: Vec<(u32, WindowOutcome)> = rounds
                    .iter()
                    .map(|r| (r.rd, WindowOutcome::new(r.cms[k].forwarded, tp)))
                    .collect();
                classify_cm(&history, forgiveness_round(id, n))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let hwl: Vec<u32> = ch.hwl.iter().copied().collect();
    let equilibrium_round = equilibrium_round(&rounds, &ch.hwl);

    Ok(SimResult {
        scenario,
        config: config.clone(),
        rounds,
        malicious_ids: cast.malicious,
        faulty: cast.faulty,
        hwl,
        classifications,
        equilibrium_round,
        nominal_rssi,
        final_states: cms,
    })
}

/// First round from which every member outside `hwl` holds (B, ND) to the end of the run.
pub fn equilibrium_round(rounds: &[RoundRecord], hwl: &BTreeSet<u32>) -> Option<u32> {
    let cooperative = |r: &RoundRecord| {
        r.cms
            .iter()
            .filter(|c| !hwl.contains(&c.cm_id))
            .all(|c| c.ch_action == ChAction::Beacon && c.cm_action == CmAction::NoDrop)
    };
    let mut start = None;
    for r in rounds.iter().rev() {
        if cooperative(r) {
            start = Some(r.rd);
        } else {
            break;
        }
    }
    start
}
