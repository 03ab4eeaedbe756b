use std::f64::consts::PI;

use hardy_core::detection::{CountTable, DetectorModel, run_counts};
use hardy_core::experiment::*;
use hardy_core::fock::{ModeId, QuantumState};
use hardy_core::lhv::{
    JointProbabilities, StrategyDistribution, ViolationOptions, enumerate_strategies,
    evaluate_violation, threshold_scan, verify_inequality_chain,
};
use hardy_core::network::{Element, NetworkDescription, apply_network, parse_network};
use num_rational::Rational64;
use proptest::prelude::*;

const ARMS: [&str; 5] = ["a", "b", "c", "d", "sink"];

fn arm() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&ARMS[..4])
}

fn two_arms() -> impl Strategy<Value = (&'static str, &'static str)> {
    (arm(), arm()).prop_filter("distinct", |(x, y)| x != y)
}

fn element() -> impl Strategy<Value = Element> {
    prop_oneof![
        (two_arms(), 0.01f64..0.99).prop_map(|((x, y), t)| Element::beam_splitter(x, y, t)),
        (two_arms(), 0.05f64..0.95, any::<bool>()).prop_map(|((x, y), t, swap)| {
            if swap {
                Element::beam_splitter_to(x, y, t, y, x)
            } else {
                Element::beam_splitter_to(x, y, t, x, y)
            }
        }),
        (arm(), -10.0f64..10.0).prop_map(|(m, phi)| Element::phase(m, phi)),
        (arm(), any::<bool>()).prop_map(|(m, open)| Element::shutter(m, open, "sink")),
    ]
}

fn network() -> impl Strategy<Value = NetworkDescription> {
    prop::collection::vec(element(), 0..10)
        .prop_map(|els| NetworkDescription::new(ARMS.map(String::from).to_vec(), els).unwrap())
}

/// Two photons on random arms with random internal labels.
fn input(net: &NetworkDescription, placement: [(usize, u8); 2]) -> QuantumState {
    placement
        .iter()
        .fold(QuantumState::vacuum(net.state_registry()), |s, &(k, l)| {
            s.add_photon(&ModeId::new(ARMS[k], l)).unwrap()
        })
        .normalized()
        .unwrap()
}

fn placement() -> impl Strategy<Value = [(usize, u8); 2]> {
    [(0usize..4, 0u8..2), (0usize..4, 0u8..2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norm_and_photon_number_preserved(net in network(), place in placement()) {
        let out = apply_network(&net, &input(&net, place)).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(out.photon_number_range(), (2, 2));
    }

    #[test]
    fn network_text_round_trips(net in network()) {
        let text = net.to_string();
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back.elements(), net.elements());
    }

    #[test]
    fn dd_coincidence_independent_of_distinguishability(p in 0.0f64..=1.0) {
        let t = analytic_table(&HardyParams::with_p_disting(p)).unwrap();
        prop_assert!((t.pair(SettingName::Dd, DetectorPair::DD) - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn fringe_follows_sin_squared(phi in -2.0 * PI..2.0 * PI) {
        let params = HardyParams { phase_plus: phi, phase_minus: phi, ..HardyParams::default() };
        let expected = (phi / 2.0).sin().powi(2);
        prop_assert!((fringe_probability(&params, true).unwrap() - expected).abs() < 1e-12);
        prop_assert!((fringe_probability(&params, false).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn random_mixtures_satisfy_bound(raw in prop::array::uniform16(0i64..1000)) {
        let total: i64 = raw.iter().sum::<i64>().max(1);
        let mut weights = raw.map(|w| Rational64::new(w, total));
        if raw.iter().all(|&w| w == 0) {
            weights[0] = Rational64::from_integer(1);
        }
        let dist = StrategyDistribution::new(weights).unwrap();
        let report = verify_inequality_chain(&dist);
        prop_assert!(report.all_hold(), "{:?}", report.failures());
        prop_assert!(report.final_slack() >= Rational64::from_integer(0));
    }

    #[test]
    fn significance_monotone_in_dd(uu in 0u64..5000, dv in 0u64..500, vd in 0u64..500,
                                   dd in 1u64..20000, extra in 1u64..5000) {
        let report = |n_dd: u64| {
            let tables = vec![
                CountTable::from_array("dd", [0, 0, 0, n_dd], 1_000_000, 1),
                CountTable::from_array("dv", [0, 0, dv, 0], 1_000_000, 1),
                CountTable::from_array("vd", [0, vd, 0, 0], 1_000_000, 1),
                CountTable::from_array("uu", [uu, 0, 0, 0], 1_000_000, 1),
            ];
            evaluate_violation(&tables, &ViolationOptions::default()).unwrap()
        };
        let (a, b) = (report(dd), report(dd + extra));
        prop_assert!(b.significance().unwrap() >= a.significance().unwrap());
        prop_assert!(b.n_sigma.unwrap_or(0.0) >= a.n_sigma.unwrap_or(0.0));
    }
}

#[test]
fn fringe_at_quarter_turns() {
    for k in 0..=8 {
        let phi = k as f64 * PI / 4.0;
        let params = HardyParams {
            phase_plus: phi,
            ..HardyParams::default()
        };
        let expected = (phi / 2.0).sin().powi(2);
        assert!((fringe_probability(&params, true).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn deterministic_strategies_all_satisfy_bound() {
    for s in enumerate_strategies() {
        let report = verify_inequality_chain(&StrategyDistribution::<Rational64>::vertex(&s));
        assert!(report.all_hold(), "{s}: {:?}", report.failures());
    }
}

#[test]
fn threshold_margin_monotone_and_continuous() {
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
    let scan = threshold_scan(&grid, &HardyParams::default()).unwrap();
    for w in scan.points.windows(2) {
        assert!(w[1].margin > w[0].margin);
        // margin is linear in p with slope 1/8
        assert!((w[1].margin - w[0].margin - 0.005 / 8.0).abs() < 1e-12);
    }
}

#[test]
fn element_order_matters() {
    let net =
        |els: Vec<Element>| NetworkDescription::new(ARMS.map(String::from).to_vec(), els).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let forward = net(vec![
        Element::beam_splitter("a", "b", h),
        Element::phase("a", PI / 2.0),
    ]);
    let reverse = net(vec![
        Element::phase("a", PI / 2.0),
        Element::beam_splitter("a", "b", h),
    ]);
    let one = QuantumState::vacuum(forward.state_registry())
        .add_photon(&ModeId::new("a", 0))
        .unwrap()
        .add_photon(&ModeId::new("b", 0))
        .unwrap();
    let x = apply_network(&forward, &one).unwrap();
    let y = apply_network(&reverse, &one).unwrap();
    assert!(x.inner_product(&y).unwrap().norm() < 0.99);
}

#[test]
fn same_seed_same_counts() {
    let params = HardyParams::with_p_disting(0.08);
    let det = DetectorModel {
        efficiency: [0.9, 0.8, 0.85, 0.7],
        dark_prob: [1e-3; 4],
        number_resolving: false,
    };
    for name in SettingName::ALL {
        let a = run_counts(&params, name, &det, 50_000, 42).unwrap();
        let b = run_counts(&params, name, &det, 50_000, 42).unwrap();
        assert_eq!(a, b);
        let c = run_counts(&params, name, &det, 50_000, 43).unwrap();
        assert_ne!(a.counts, c.counts);
    }
}

#[test]
fn longer_runs_extend_shorter_ones() {
    // each trial owns its own keystream window, so the first n trials of a
    // longer run reproduce a run of length n
    let params = HardyParams::with_p_disting(0.3);
    let det = DetectorModel::default();
    let short = run_counts(&params, SettingName::Uu, &det, 20_000, 9).unwrap();
    let long = run_counts(&params, SettingName::Uu, &det, 20_001, 9).unwrap();
    let diff: u64 = long.as_array().iter().sum::<u64>() - short.as_array().iter().sum::<u64>();
    assert!(diff <= 1);
}

#[test]
fn quasi_distribution_matches_ideal_quantum_marginals() {
    let j = JointProbabilities {
        dd: 1.0 / 64.0,
        uu: 0.0,
        dv: 0.0,
        vd: 0.0,
    };
    let q = hardy_core::lhv::quasi_distribution_for(&j).unwrap();
    let report = verify_inequality_chain(&q);
    assert!(!report.all_hold());
    assert!(report.failures().contains(&"final_bound"));
}
