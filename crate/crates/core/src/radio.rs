//! Radio link model: per-packet transmission cost, directional log-distance
//! path loss with log-normal shadowing, and the RSSI score used by the
//! utility function.
//!
//! Everything here is a pure function of its inputs. Random quantities
//! (the shadowing draw and the direction draw `R`) are supplied by the
//! caller so that runs stay reproducible and paired across scenarios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured degree-of-irregularity values, in label order DOI1..DOI6.
pub const DOI_VALUES: [f64; 6] = [0.0055, 0.0035, 0.004, 0.0045, 0.006, 0.0085];

/// Energy that maps to 0 dB on the transmission-cost scale.
pub const DEFAULT_TC_REFERENCE_J: f64 = 1e-9;

/// Tmote Sky transmit power levels and their supply current in mA.
pub const TMOTE_CURRENTS_MA: [(u8, f64); 8] = [
    (3, 8.5),
    (7, 9.9),
    (11, 11.2),
    (15, 12.5),
    (19, 13.9),
    (23, 15.2),
    (27, 16.5),
    (31, 17.4),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Environment {
    /// Outdoor line-of-sight.
    OL,
    /// Outdoor non-line-of-sight.
    ON,
    /// Underground line-of-sight.
    UL,
    /// Underground non-line-of-sight.
    UN,
    /// Indoor line-of-sight.
    IL,
    /// Indoor non-line-of-sight.
    IN,
}

impl Environment {
    pub const ALL: [Environment; 6] = [
        Environment::OL,
        Environment::ON,
        Environment::UL,
        Environment::UN,
        Environment::IL,
        Environment::IN,
    ];

    pub fn params(self) -> EnvironmentParams {
        let (n, sigma, pn) = match self {
            Environment::OL => (2.42, 3.12, -93.0),
            Environment::ON => (3.51, 2.95, -93.0),
            Environment::UL => (1.45, 2.45, -92.0),
            Environment::UN => (3.15, 3.19, -92.0),
            Environment::IL => (1.64, 3.29, -88.0),
            Environment::IN => (2.38, 2.25, -88.0),
        };
        EnvironmentParams {
            name: self,
            path_loss_exponent: n,
            shadowing_sigma_db: sigma,
            noise_dbm: pn,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Environment::OL => "OL",
            Environment::ON => "ON",
            Environment::UL => "UL",
            Environment::UN => "UN",
            Environment::IL => "IL",
            Environment::IN => "IN",
        }
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Environment::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::config(
                    "env",
                    format!("unknown environment {s:?}, expected one of OL, ON, UL, UN, IL, IN"),
                )
            })
    }
}

/// Path-loss parameters of one deployment environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    pub name: Environment,
    pub path_loss_exponent: f64,
    pub shadowing_sigma_db: f64,
    pub noise_dbm: f64,
}

/// Electrical constants of a sensor node radio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioProfile {
    pub voltage_v: f64,
    /// `(power level h, current in mA)`, strictly increasing in both.
    pub currents_ma: Vec<(u8, f64)>,
    pub radio_on_current_a: f64,
    pub startup_time_s: f64,
    pub data_rate_bps: f64,
    pub free_space_loss_db: f64,
    pub reference_distance_m: f64,
}

impl Default for RadioProfile {
    fn default() -> Self {
        Self {
            voltage_v: 3.0,
            currents_ma: TMOTE_CURRENTS_MA.to_vec(),
            radio_on_current_a: 20e-6,
            startup_time_s: 580e-6,
            data_rate_bps: 250_000.0,
            free_space_loss_db: 55.0,
            reference_distance_m: 10.0,
        }
    }
}

impl RadioProfile {
    pub fn current_a(&self, level: u8) -> Result<f64> {
        self.currents_ma
            .iter()
            .find(|(h, _)| *h == level)
            .map(|(_, ma)| ma * 1e-3)
            .ok_or(Error::UnknownPowerLevel(level))
    }

    /// Startup energy `V * I0 * T0`, paid once per transmission.
    pub fn startup_cost(&self) -> f64 {
        self.voltage_v * self.radio_on_current_a * self.startup_time_s
    }

    /// Air time of one packet of `bits` length.
    pub fn airtime_s(&self, bits: u32) -> f64 {
        f64::from(bits) / self.data_rate_bps
    }
}

/// Energy in joules to send one packet of `packet_len_bits` at power `level`.
pub fn transmission_cost(profile: &RadioProfile, level: u8, packet_len_bits: u32) -> Result<f64> {
    let current = profile.current_a(level)?;
    let amplification = profile.voltage_v * current * profile.airtime_s(packet_len_bits);
    Ok(profile.startup_cost() + amplification)
}

/// Direction coefficient of the radiation pattern at angle `theta_deg`.
///
/// `draw` is the uniform random factor, which must lie strictly inside (0, 1).
pub fn direction_coefficient(theta_deg: f64, doi: f64, draw: f64) -> Result<f64> {
    if !(draw > 0.0 && draw < 1.0) {
        return Err(Error::Domain(format!("direction draw {draw} outside (0, 1)")));
    }
    if !(0.0..360.0).contains(&theta_deg) {
        return Err(Error::Domain(format!("angle {theta_deg} outside [0, 360)")));
    }
    if !(doi > 0.0 && doi <= 1.0) {
        return Err(Error::Domain(format!("degree of irregularity {doi} outside (0, 1]")));
    }
    if theta_deg == 0.0 {
        Ok(1.0)
    } else {
        Ok(draw * doi)
    }
}

/// Geometry of the link between one cluster member and its cluster head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub distance_m: f64,
    pub theta_deg: f64,
    pub doi: f64,
    pub isotropic: bool,
    /// The `R` factor of the direction coefficient, in (0, 1).
    pub direction_draw: f64,
}

impl LinkGeometry {
    pub fn isotropic(distance_m: f64) -> Self {
        Self {
            distance_m,
            theta_deg: 0.0,
            doi: DOI_VALUES[0],
            isotropic: true,
            direction_draw: 0.5,
        }
    }

    pub fn eta(&self) -> Result<f64> {
        if self.isotropic {
            Ok(1.0)
        } else {
            direction_coefficient(self.theta_deg, self.doi, self.direction_draw)
        }
    }
}

/// Path loss in dB before the shadowing term, already scaled by the direction coefficient.
pub fn mean_path_loss(env: &EnvironmentParams, geom: &LinkGeometry, profile: &RadioProfile) -> Result<f64> {
    let d0 = profile.reference_distance_m;
    if geom.distance_m < d0 {
        return Err(Error::Domain(format!(
            "distance {} m is inside the far-field reference distance {} m",
            geom.distance_m, d0
        )));
    }
    let log_distance = profile.free_space_loss_db + 10.0 * env.path_loss_exponent * (geom.distance_m / d0).log10();
    Ok(log_distance * geom.eta()?)
}

/// Directional log-distance path loss plus the caller's shadowing term.
pub fn path_loss(env: &EnvironmentParams, geom: &LinkGeometry, profile: &RadioProfile, shadow_db: f64) -> Result<f64> {
    Ok(mean_path_loss(env, geom, profile)? + shadow_db)
}

/// Link quality score: transmission cost on a dB scale minus path loss and noise.
///
/// `reference_j` is the energy that maps to 0 dB.
pub fn rssi_score(tc_joules: f64, pl_db: f64, noise_dbm: f64, reference_j: f64) -> Result<f64> {
    if !(tc_joules > 0.0) || !(reference_j > 0.0) {
        return Err(Error::Domain(format!(
            "transmission cost {tc_joules} J and reference {reference_j} J must be positive"
        )));
    }
    Ok(10.0 * (tc_joules / reference_j).log10() - pl_db - noise_dbm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn builtin_environments_match_table() {
        let ol = Environment::OL.params();
        assert_eq!(
            (ol.path_loss_exponent, ol.shadowing_sigma_db, ol.noise_dbm),
            (2.42, 3.12, -93.0)
        );
        let ul = Environment::UL.params();
        assert_eq!(
            (ul.path_loss_exponent, ul.shadowing_sigma_db, ul.noise_dbm),
            (1.45, 2.45, -92.0)
        );
        let inn = Environment::IN.params();
        assert_eq!(
            (inn.path_loss_exponent, inn.shadowing_sigma_db, inn.noise_dbm),
            (2.38, 2.25, -88.0)
        );
        for e in Environment::ALL {
            let p = e.params();
            assert!(p.path_loss_exponent > 0.0 && p.shadowing_sigma_db >= 0.0);
            assert_eq!(e.as_str().parse::<Environment>().unwrap(), e);
        }
        assert!("XX".parse::<Environment>().is_err());
    }

    #[test]
    fn currents_strictly_increasing() {
        let p = RadioProfile::default();
        assert!(p.currents_ma.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert_eq!(p.current_a(31).unwrap(), 17.4e-3);
    }

    #[test]
    fn transmission_cost_examples() {
        let p = RadioProfile::default();
        // 3 V * 17.4 mA * 1024 b / 250 kb/s
        let tc = transmission_cost(&p, 31, 1024).unwrap();
        assert!(close(tc - p.startup_cost(), 2.138112e-4, 1e-15));
        assert!(close(tc, 2.13846e-4, 1e-15));
        assert_eq!(transmission_cost(&p, 11, 0).unwrap(), p.startup_cost());
        assert!(matches!(
            transmission_cost(&p, 30, 1024),
            Err(Error::UnknownPowerLevel(30))
        ));
    }

    #[test]
    fn direction_coefficient_cases() {
        assert_eq!(direction_coefficient(0.0, 0.004, 0.3).unwrap(), 1.0);
        assert!(close(direction_coefficient(90.0, 0.0055, 0.5).unwrap(), 0.00275, 1e-15));
        assert!(direction_coefficient(90.0, 0.0055, 0.0).is_err());
        assert!(direction_coefficient(90.0, 0.0055, 1.0).is_err());
        let g = LinkGeometry {
            theta_deg: 123.0,
            ..LinkGeometry::isotropic(125.0)
        };
        assert_eq!(g.eta().unwrap(), 1.0);
    }

    #[test]
    fn path_loss_examples() {
        let p = RadioProfile::default();
        let g = LinkGeometry::isotropic(125.0);
        let ol = Environment::OL.params();
        assert!(close(path_loss(&ol, &g, &p, 0.0).unwrap(), 81.54522231479496, 1e-9));
        let at_ref = LinkGeometry::isotropic(10.0);
        for e in Environment::ALL {
            assert_eq!(path_loss(&e.params(), &at_ref, &p, 0.0).unwrap(), 55.0);
        }
        // eta = R * DOI = 0.003
        let directional = LinkGeometry {
            theta_deg: 45.0,
            doi: 0.006,
            isotropic: false,
            direction_draw: 0.5,
            distance_m: 125.0,
        };
        let ul = Environment::UL.params();
        assert!(close(
            path_loss(&ul, &directional, &p, 0.0).unwrap(),
            0.21271558556585046,
            1e-9
        ));
        assert!(path_loss(&ol, &LinkGeometry::isotropic(5.0), &p, 0.0).is_err());
    }

    #[test]
    fn rssi_examples() {
        assert_eq!(rssi_score(1e-3, 0.0, 0.0, 1e-3).unwrap(), 0.0);
        let tc = 2.13846e-4;
        let s = rssi_score(tc, 81.54522231479496, -93.0, 1e-3).unwrap();
        assert!(close(s, 4.755788996895589, 1e-9));
        let s_il = rssi_score(tc, 81.54522231479496, -88.0, 1e-3).unwrap();
        assert!(close(s - s_il, 5.0, 1e-12));
        // the default nJ reference shifts every score by +60 dB
        let s_nj = rssi_score(tc, 81.54522231479496, -93.0, DEFAULT_TC_REFERENCE_J).unwrap();
        assert!(close(s_nj - s, 60.0, 1e-9));
        assert!(rssi_score(0.0, 0.0, 0.0, 1e-3).is_err());
    }
}
