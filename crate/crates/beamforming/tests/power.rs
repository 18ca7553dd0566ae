use omnisurf_beamforming::*;
use proptest::prelude::*;

#[test]
fn single_user_closed_form() {
    let w = water_filling(&[2.5], 1.0, 4.0).unwrap();
    assert_eq!(w.level, 4.0 + 2.5);
    assert_eq!(w.powers, vec![4.0 / 2.5]);
}

#[test]
fn hand_solved_two_users() {
    let w = water_filling(&[1.0, 4.0], 1.0, 1.0).unwrap();
    assert_eq!(w.level, 2.0);
    assert_eq!(w.powers, vec![1.0, 0.0]);
    assert_eq!(w.active(), 1);
}

#[test]
fn equal_gains_share_equally() {
    let w = water_filling(&[3.0; 4], 0.5, 10.0).unwrap();
    for p in &w.powers {
        assert!((p * 3.0 - 2.5).abs() < 1e-12);
    }
}

#[test]
fn noiseless_level() {
    let w = water_filling(&[1.0, 2.0], 0.0, 2.0).unwrap();
    assert_eq!(w.level, 1.0);
    assert_eq!(w.powers, vec![1.0, 0.5]);
}

#[test]
fn input_validation() {
    assert!(matches!(water_filling(&[], 1.0, 1.0), Err(BeamformingError::EmptyGains)));
    assert!(water_filling(&[0.0], 1.0, 1.0).is_err());
    assert!(water_filling(&[1.0], 1.0, 0.0).is_err());
    assert!(water_filling(&[1.0], -1.0, 1.0).is_err());
}

#[test]
fn allocation_respects_budget() {
    // small gains make the raw powers exceed the budget
    let raw = water_filling(&[0.1, 0.2], 1.0, 1.0).unwrap();
    assert!(raw.powers.iter().sum::<f64>() > 1.0);
    let p = allocate_power(&[0.1, 0.2], 1.0, 1.0).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // large gains: untouched
    let big = allocate_power(&[100.0, 400.0], 1.0, 10.0).unwrap();
    assert_eq!(big, water_filling(&[100.0, 400.0], 1.0, 10.0).unwrap().powers);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn kkt_conditions(gains in prop::collection::vec(1e-3f64..1e4, 1..9), noise in 0.0f64..3.0, budget in 1e-2f64..1e3) {
        let w = water_filling(&gains, noise, budget).unwrap();
        let total: f64 = gains.iter().map(|g| (w.level - g * noise).max(0.0)).sum();
        prop_assert!((total - budget).abs() <= 1e-9 * budget.max(1.0));
        for (g, p) in gains.iter().zip(&w.powers) {
            prop_assert!(*p >= 0.0);
            if *p > 0.0 {
                prop_assert!((p * g + g * noise - w.level).abs() <= 1e-9 * w.level);
            } else {
                prop_assert!(g * noise >= w.level - 1e-12 * w.level);
            }
        }
    }
}
