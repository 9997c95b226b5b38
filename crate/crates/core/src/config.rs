//! Simulation configuration: defaults, flat key-value file loading and validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::game::GameWeights;
use crate::radio::{Environment, EnvironmentParams, RadioProfile, DEFAULT_TC_REFERENCE_J, DOI_VALUES};

/// How the shadowing term enters the path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShadowingMode {
    /// Zero-mean normal draw with the environment's deviation, per member per round.
    #[default]
    Sampled,
    /// The environment's deviation added as a constant margin.
    Fixed,
}

/// Which fault each hardware-faulty member suffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FaultModes {
    /// Alternate drop and over-transmission faults over the faulty ids.
    #[default]
    Mixed,
    Drop,
    Over,
}

/// Malicious members: a count drawn by seed or explicit 1-based ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaliciousSpec {
    Count(u32),
    Ids(Vec<u32>),
}

impl std::str::FromStr for MaliciousSpec {
    type Err = Error;

    /// `"2"` is a count, `"3,7"` (or `"3,"`) an id list.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::config(
                "malicious",
                format!("expected a count or comma-separated ids, got {s:?}"),
            )
        };
        if s.contains(',') {
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()
                .map(MaliciousSpec::Ids)
        } else {
            s.parse::<u32>().map(MaliciousSpec::Count).map_err(|_| bad())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_cms: u32,
    pub c_factor: f64,
    pub tp: u32,
    pub packet_len_bits: u32,
    pub eb_joules: f64,
    pub alpha: f64,
    pub beta: f64,
    pub punishment_gain: f64,

    pub env: String,
    pub env_n: Option<f64>,
    pub env_sigma_db: Option<f64>,
    pub env_noise_dbm: Option<f64>,
    pub doi_index: Option<u8>,
    pub doi_value: Option<f64>,
    pub isotropic: bool,
    pub redraw_theta: bool,
    pub shadowing: ShadowingMode,

    pub d_ich_m: f64,
    pub d0_m: f64,
    pub pl_f_db: f64,
    pub power_level: u8,
    pub tx_current_ma: Option<f64>,
    pub supply_voltage_v: f64,
    pub radio_on_current_ua: f64,
    pub startup_time_us: f64,
    pub data_rate_bps: f64,
    pub tc_reference_j: f64,

    pub malicious: MaliciousSpec,
    pub hw_fault_fraction: f64,
    pub hw_fault_ids: Option<Vec<u32>>,
    pub fault_modes: FaultModes,
    pub p_drop: f64,
    pub gamma: f64,

    pub seed: u64,
    pub run_index: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_cms: 10,
            c_factor: 11.0,
            tp: 100,
            packet_len_bits: 1024,
            eb_joules: 50e-9,
            alpha: 0.6,
            beta: 0.4,
            punishment_gain: 1000.0,
            env: "ON".into(),
            env_n: None,
            env_sigma_db: None,
            env_noise_dbm: None,
            doi_index: Some(1),
            doi_value: None,
            isotropic: true,
            redraw_theta: false,
            shadowing: ShadowingMode::Sampled,
            d_ich_m: 125.0,
            d0_m: 10.0,
            pl_f_db: 55.0,
            power_level: 31,
            tx_current_ma: None,
            supply_voltage_v: 3.0,
            radio_on_current_ua: 20.0,
            startup_time_us: 580.0,
            data_rate_bps: 250_000.0,
            tc_reference_j: DEFAULT_TC_REFERENCE_J,
            malicious: MaliciousSpec::Count(2),
            hw_fault_fraction: 0.0,
            hw_fault_ids: None,
            fault_modes: FaultModes::Mixed,
            p_drop: 0.5,
            gamma: 0.1,
            seed: 0,
            run_index: 0,
        }
    }
}

impl SimConfig {
    /// Parse a flat key-value document; missing keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn n_rounds(&self) -> u32 {
        (self.c_factor * f64::from(self.n_cms)).round() as u32
    }

    pub fn environment(&self) -> Result<EnvironmentParams> {
        let mut p = self.env.parse::<Environment>()?.params();
        if let Some(n) = self.env_n {
            p.path_loss_exponent = n;
        }
        if let Some(s) = self.env_sigma_db {
            p.shadowing_sigma_db = s;
        }
        if let Some(pn) = self.env_noise_dbm {
            p.noise_dbm = pn;
        }
        Ok(p)
    }

    pub fn doi(&self) -> f64 {
        match (self.doi_value, self.doi_index) {
            (Some(v), _) => v,
            (None, Some(i)) if (1..=6).contains(&i) => DOI_VALUES[usize::from(i) - 1],
            _ => DOI_VALUES[0],
        }
    }

    /// Short label used in output file names.
    pub fn doi_label(&self) -> String {
        if self.isotropic {
            "iso".into()
        } else if let Some(v) = self.doi_value {
            format!("doi{v}")
        } else {
            format!("DOI{}", self.doi_index.unwrap_or(1))
        }
    }

    pub fn radio_profile(&self) -> RadioProfile {
        let mut profile = RadioProfile {
            voltage_v: self.supply_voltage_v,
            radio_on_current_a: self.radio_on_current_ua * 1e-6,
            startup_time_s: self.startup_time_us * 1e-6,
            data_rate_bps: self.data_rate_bps,
            free_space_loss_db: self.pl_f_db,
            reference_distance_m: self.d0_m,
            ..RadioProfile::default()
        };
        if let Some(ma) = self.tx_current_ma {
            for (h, c) in profile.currents_ma.iter_mut() {
                if *h == self.power_level {
                    *c = ma;
                }
            }
        }
        profile
    }

    pub fn weights(&self) -> GameWeights {
        GameWeights {
            alpha: self.alpha,
            beta: self.beta,
            eb_joules_per_bit: self.eb_joules,
            tp: self.tp,
            packet_len_bits: self.packet_len_bits,
            punishment_gain: self.punishment_gain,
        }
    }

    /// Check every constraint and report all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut v: Vec<Violation> = Vec::new();
        let mut fail = |field: &'static str, constraint: &str| {
            v.push(Violation {
                field,
                constraint: constraint.to_string(),
            })
        };

        if self.n_cms < 1 {
            fail("n_cms", "n_cms >= 1");
        }
        if !(self.c_factor > f64::from(self.n_cms)) {
            fail("c_factor", "c > |N|");
        }
        if self.tp < 1 {
            fail("tp", "tp >= 1");
        }
        if self.packet_len_bits < 1 {
            fail("packet_len_bits", "packet_len_bits >= 1");
        }
        if !(self.eb_joules > 0.0) {
            fail("eb_joules", "eb > 0");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            fail("alpha", "alpha, beta >= 0");
        }
        if !((self.alpha + self.beta - 1.0).abs() <= 1e-9) {
            fail("beta", "alpha + beta = 1");
        }
        if !(self.punishment_gain >= 0.0) {
            fail("punishment_gain", "punishment_gain >= 0");
        }

        if self.env.parse::<Environment>().is_err() {
            fail("env", "one of OL, ON, UL, UN, IL, IN");
        }
        if matches!(self.env_n, Some(n) if !(n > 0.0)) {
            fail("env_n", "n > 0");
        }
        if matches!(self.env_sigma_db, Some(s) if !(s >= 0.0)) {
            fail("env_sigma_db", "sigma >= 0");
        }
        if matches!(self.doi_index, Some(i) if !(1..=6).contains(&i)) {
            fail("doi_index", "doi_index in 1..=6");
        }
        if matches!(self.doi_value, Some(d) if !(d > 0.0 && d <= 1.0)) {
            fail("doi_value", "doi in (0, 1]");
        }

        if !(self.d0_m > 0.0) {
            fail("d0_m", "d0 > 0");
        }
        if !(self.d_ich_m >= self.d0_m) {
            fail("d_ich_m", "d_iCH >= d0");
        }
        if !crate::radio::TMOTE_CURRENTS_MA
            .iter()
            .any(|(h, _)| *h == self.power_level)
        {
            fail("power_level", "h in {3, 7, 11, 15, 19, 23, 27, 31}");
        }
        if matches!(self.tx_current_ma, Some(c) if !(c > 0.0)) {
            fail("tx_current_ma", "current > 0");
        }
        if !(self.supply_voltage_v > 0.0) {
            fail("supply_voltage_v", "V > 0");
        }
        if !(self.radio_on_current_ua >= 0.0) {
            fail("radio_on_current_ua", "I0 >= 0");
        }
        if !(self.startup_time_us >= 0.0) {
            fail("startup_time_us", "T0 >= 0");
        }
        if !(self.data_rate_bps > 0.0) {
            fail("data_rate_bps", "DR > 0");
        }
        if !(self.tc_reference_j > 0.0) {
            fail("tc_reference_j", "reference energy > 0");
        }

        let n = self.n_cms;
        let malicious_count = match &self.malicious {
            MaliciousSpec::Count(c) => {
                if *c > n {
                    fail("malicious", "malicious count <= |N|");
                }
                *c
            }
            MaliciousSpec::Ids(ids) => {
                if ids.iter().any(|&i| i < 1 || i > n) {
                    fail("malicious", "malicious ids in 1..=|N|");
                }
                if has_duplicates(ids) {
                    fail("malicious", "malicious ids distinct");
                }
                ids.len() as u32
            }
        };
        if !(0.0..=1.0).contains(&self.hw_fault_fraction) {
            fail("hw_fault_fraction", "fraction in [0, 1]");
        }
        let fault_count = match &self.hw_fault_ids {
            Some(ids) => {
                if ids.iter().any(|&i| i < 1 || i > n) {
                    fail("hw_fault_ids", "faulty ids in 1..=|N|");
                }
                if has_duplicates(ids) {
                    fail("hw_fault_ids", "faulty ids distinct");
                }
                if let MaliciousSpec::Ids(m) = &self.malicious {
                    if ids.iter().any(|i| m.contains(i)) {
                        fail("hw_fault_ids", "faulty and malicious ids disjoint");
                    }
                }
                ids.len() as u32
            }
            None => self.fault_count(),
        };
        if malicious_count + fault_count > n {
            fail("hw_fault_fraction", "malicious + faulty members <= |N|");
        }
        if !(self.p_drop > 0.0 && self.p_drop <= 1.0) {
            fail("p_drop", "p_drop in (0, 1]");
        }
        if !(self.gamma > 0.0) {
            fail("gamma", "gamma > 0");
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Number of hardware-faulty members implied by the fault fraction.
    pub fn fault_count(&self) -> u32 {
        match &self.hw_fault_ids {
            Some(ids) => ids.len() as u32,
            None => (self.hw_fault_fraction * f64::from(self.n_cms)).round().max(0.0) as u32,
        }
    }
}

fn has_duplicates(ids: &[u32]) -> bool {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).any(|w| w[0] == w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = SimConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        assert_eq!(cfg.n_cms, 10);
        assert_eq!(cfg.packet_len_bits, 1024);
        assert_eq!(cfg.startup_time_us, 580.0);
        assert_eq!(cfg.data_rate_bps, 250_000.0);
        assert_eq!(cfg.radio_profile().current_a(cfg.power_level).unwrap(), 17.4e-3);
        assert_eq!(cfg.supply_voltage_v, 3.0);
        assert_eq!((cfg.alpha, cfg.beta), (0.6, 0.4));
        assert_eq!(cfg.eb_joules, 50e-9);
        assert_eq!((cfg.d0_m, cfg.d_ich_m, cfg.pl_f_db), (10.0, 125.0, 55.0));
        assert_eq!((cfg.power_level, cfg.tp, cfg.c_factor), (31, 100, 11.0));
        assert_eq!(cfg.n_rounds(), 110);
    }

    #[test]
    fn c_not_above_n_is_rejected_by_name() {
        let err = SimConfig::from_toml_str("c_factor = 5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("c_factor") && msg.contains("c > |N|"), "{msg}");
    }

    #[test]
    fn environment_and_doi_selection() {
        let cfg = SimConfig::from_toml_str("env = \"UL\"\ndoi_index = 3").unwrap();
        let env = cfg.environment().unwrap();
        assert_eq!(
            (env.path_loss_exponent, env.shadowing_sigma_db, env.noise_dbm),
            (1.45, 2.45, -92.0)
        );
        assert_eq!(cfg.doi(), 0.004);
        let cfg = SimConfig::from_toml_str("doi_index = 4").unwrap();
        assert_eq!(cfg.doi(), 0.0045);
    }

    #[test]
    fn reports_every_violation() {
        let err = SimConfig::from_toml_str("env = \"XX\"\nalpha = 0.9\ntp = 0\np_drop = 0").unwrap_err();
        match err {
            Error::Config(v) => {
                let fields: Vec<_> = v.iter().map(|x| x.field).collect();
                for f in ["env", "beta", "tp", "p_drop"] {
                    assert!(fields.contains(&f), "{fields:?}");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_and_unknown_keys() {
        assert!(matches!(SimConfig::from_toml_str("n_cms = ["), Err(Error::Parse(_))));
        assert!(matches!(SimConfig::from_toml_str("bogus = 1"), Err(Error::Parse(_))));
    }

    #[test]
    fn malicious_spec_forms() {
        let cfg = SimConfig::from_toml_str("malicious = [3, 7]").unwrap();
        assert_eq!(cfg.malicious, MaliciousSpec::Ids(vec![3, 7]));
        assert_eq!("2".parse::<MaliciousSpec>().unwrap(), MaliciousSpec::Count(2));
        assert_eq!("3,7".parse::<MaliciousSpec>().unwrap(), MaliciousSpec::Ids(vec![3, 7]));
        assert!(SimConfig::from_toml_str("malicious = [11]").is_err());
        assert!(SimConfig::from_toml_str("malicious = 4\nhw_fault_fraction = 0.7").is_err());
    }

    #[test]
    fn fault_count_rounds_to_nearest() {
        let mut cfg = SimConfig {
            hw_fault_fraction: 0.2,
            ..SimConfig::default()
        };
        assert_eq!(cfg.fault_count(), 2);
        cfg.n_cms = 12;
        cfg.c_factor = 13.0;
        assert_eq!(cfg.fault_count(), 2);
        cfg.hw_fault_fraction = 0.0;
        assert_eq!(cfg.fault_count(), 0);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimConfig {
            malicious: MaliciousSpec::Ids(vec![1, 4]),
            shadowing: ShadowingMode::Fixed,
            ..SimConfig::default()
        };
        assert_eq!(SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}
