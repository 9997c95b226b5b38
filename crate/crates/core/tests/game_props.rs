use proptest::prelude::*;
use wsn_game::game::{
    best_response_cm, data_trustworthiness, punishment, punishment_terms, utility, ActionPair, ChAction, CmAction,
    GameWeights, WindowOutcome,
};

fn weights(tp: u32, l: u32, eb: f64) -> GameWeights {
    GameWeights {
        tp,
        packet_len_bits: l,
        eb_joules_per_bit: eb,
        ..GameWeights::default()
    }
}

fn pairs() -> [ActionPair; 4] {
    [
        ActionPair::new(ChAction::Beacon, CmAction::NoDrop),
        ActionPair::new(ChAction::Beacon, CmAction::Drop),
        ActionPair::new(ChAction::NoBeacon, CmAction::NoDrop),
        ActionPair::new(ChAction::NoBeacon, CmAction::Drop),
    ]
}

proptest! {
    #[test]
    fn punishment_identity(tp in 1u32..1000, frac in 0.0f64..=1.0, l in 1u32..4096, eb in 1e-10f64..1e-6) {
        let fwd = (f64::from(tp) * frac).floor() as u32;
        let w = weights(tp, l, eb);
        let o = WindowOutcome::new(fwd, tp);
        let (x1, x2) = punishment_terms(o, &w);
        let x3 = punishment(ActionPair::new(ChAction::NoBeacon, CmAction::Drop), o, &w);
        prop_assert_eq!(x3, x1 + x2);
        let per = w.packet_energy();
        prop_assert_eq!(x1, f64::from(fwd) * per);
        prop_assert_eq!(x2, f64::from(tp - fwd) * per);
        prop_assert_eq!(x1 + x2, w.window_energy());
        let naive = f64::from(l) * eb;
        prop_assert!((per - naive).abs() <= naive * 1e-10);
    }

    #[test]
    fn only_cooperation_is_unpunished(tp in 1u32..500, fwd in 0u32..500) {
        let w = weights(tp, 1024, 50e-9);
        let fwd = fwd.min(tp);
        let o = WindowOutcome::new(fwd, tp);
        for pair in pairs() {
            let xi = punishment(pair, o, &w);
            if pair.is_cooperative() {
                prop_assert_eq!(xi, 0.0);
            } else if pair.ch == ChAction::NoBeacon || fwd < tp {
                prop_assert!(xi > 0.0);
            }
        }
    }

    #[test]
    fn total_punishment_constant(tp in 1u32..500, a in 0u32..500, b in 0u32..500) {
        let w = weights(tp, 1024, 50e-9);
        let (a1, a2) = punishment_terms(WindowOutcome::new(a.min(tp), tp), &w);
        let (b1, b2) = punishment_terms(WindowOutcome::new(b.min(tp), tp), &w);
        prop_assert_eq!(a1 + a2, b1 + b2);
    }

    #[test]
    fn utility_monotone(rssi in -50.0f64..150.0, rl in 0.0f64..1.0, xi in 0.0f64..1.0, d in 1e-6f64..10.0) {
        let w = GameWeights::default();
        let base = utility(rssi, rl, xi, &w).u;
        prop_assert!(utility(rssi + d, rl, xi, &w).u > base);
        prop_assert!(utility(rssi, rl + d, xi, &w).u > base);
        prop_assert!(utility(rssi, rl, xi + d, &w).u < base);
    }

    #[test]
    fn dt_permutation_invariant(mut rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..20)) {
        let a = data_trustworthiness(&rows).unwrap();
        rows.reverse();
        for r in rows.iter_mut() {
            r.rotate_left(1);
        }
        let b = data_trustworthiness(&rows).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn best_response_scale_invariant(u_nd in -100.0f64..100.0, u_d in -100.0f64..100.0, k in 0.01f64..100.0) {
        prop_assert_eq!(best_response_cm(u_nd, u_d), best_response_cm(k * u_nd, k * u_d));
    }
}

#[test]
fn empty_history_is_an_error() {
    let empty: Vec<Vec<f64>> = Vec::new();
    assert!(data_trustworthiness(&empty).is_err());
}
