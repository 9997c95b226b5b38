//! Comparison games: the three fixed-action one-shot scenarios and a cluster
//! head with no game-theoretic defense. All share the engine, the radio model
//! and the random streams of the repeated game, so results on the same seed
//! are paired draw for draw.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::game::{ActionPair, ChAction, CmAction};
use crate::sim::{run_scenario, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    /// CH withholds beacons, members forward everything.
    OneShotNbNd,
    /// CH grants beacons, attackers drop.
    OneShotBD,
    /// CH withholds beacons, attackers drop.
    OneShotNbD,
    Repeated,
    /// No incentive scheme: missing windows are never acknowledged and
    /// nobody is ever forgiven.
    NoDefense,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::Repeated,
        ScenarioId::OneShotNbNd,
        ScenarioId::OneShotBD,
        ScenarioId::OneShotNbD,
        ScenarioId::NoDefense,
    ];

    pub const ONE_SHOT: [ScenarioId; 3] = [ScenarioId::OneShotNbNd, ScenarioId::OneShotBD, ScenarioId::OneShotNbD];

    /// Actions fixed for the whole run, for the one-shot scenarios.
    pub fn pinned_pair(self) -> Option<ActionPair> {
        match self {
            ScenarioId::OneShotNbNd => Some(ActionPair::new(ChAction::NoBeacon, CmAction::NoDrop)),
            ScenarioId::OneShotBD => Some(ActionPair::new(ChAction::Beacon, CmAction::Drop)),
            ScenarioId::OneShotNbD => Some(ActionPair::new(ChAction::NoBeacon, CmAction::Drop)),
            ScenarioId::Repeated | ScenarioId::NoDefense => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::OneShotNbNd => "oneshot_nb_nd",
            ScenarioId::OneShotBD => "oneshot_b_d",
            ScenarioId::OneShotNbD => "oneshot_nb_d",
            ScenarioId::Repeated => "repeated",
            ScenarioId::NoDefense => "nodefense",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Usage(format!("unknown scenario {s:?}")))
    }
}

pub fn run_one_shot(scenario: ScenarioId, config: &SimConfig) -> Result<SimResult> {
    if scenario.pinned_pair().is_none() {
        return Err(Error::Usage(format!("{scenario} is not a one-shot scenario")));
    }
    run_scenario(config, scenario)
}

pub fn run_no_defense(config: &SimConfig) -> Result<SimResult> {
    run_scenario(config, ScenarioId::NoDefense)
}

/// Run any scenario by id.
pub fn run(scenario: ScenarioId, config: &SimConfig) -> Result<SimResult> {
    run_scenario(config, scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MaliciousSpec;

    #[test]
    fn rejects_non_one_shot_ids() {
        let cfg = SimConfig::default();
        assert!(matches!(run_one_shot(ScenarioId::Repeated, &cfg), Err(Error::Usage(_))));
        assert!(matches!(
            run_one_shot(ScenarioId::NoDefense, &cfg),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn scenario_names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.as_str().parse::<ScenarioId>().unwrap(), id);
        }
    }

    #[test]
    fn pinned_actions_hold_every_round() {
        let cfg = SimConfig::default();
        let res = run_one_shot(ScenarioId::OneShotNbD, &cfg).unwrap();
        for r in &res.rounds {
            for c in &r.cms {
                assert_eq!(c.ch_action, ChAction::NoBeacon);
                let attacker = res.malicious_ids.contains(&c.cm_id);
                assert_eq!(c.cm_action == CmAction::Drop, attacker);
            }
        }
    }

    #[test]
    fn scenario_one_delivers_everything_but_is_punished() {
        let cfg = SimConfig::default();
        let s1 = run_one_shot(ScenarioId::OneShotNbNd, &cfg).unwrap();
        let rep = run(ScenarioId::Repeated, &cfg).unwrap();
        assert!(s1
            .rounds
            .iter()
            .flat_map(|r| &r.cms)
            .all(|c| c.rl == 1.0 && c.xi_joules > 0.0));
        assert!(rep.dt().unwrap() > s1.dt().unwrap());
    }

    #[test]
    fn no_defense_equals_repeated_without_perturbation() {
        let cfg = SimConfig {
            malicious: MaliciousSpec::Count(0),
            ..SimConfig::default()
        };
        let nd = run_no_defense(&cfg).unwrap();
        let rep = run(ScenarioId::Repeated, &cfg).unwrap();
        assert_eq!(nd.total_wasted_j(), rep.total_wasted_j());
        assert_eq!(nd.total_wasted_j(), 0.0);
    }
}
