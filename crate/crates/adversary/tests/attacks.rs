use pvm_adversary::{execute, registry, AdversaryError, AttackParams};
use pvm_compliance::{check_tau_pi, check_tau_sleepiness, ComplianceReport, Participation};
use pvm_core::Bound;
use pvm_netsim::Scenario;
use pvm_properties::{check_asynchrony_resilience, check_reorg_resilience, check_safety, Outcome, TraceIndex};

fn compliance(sc: &Scenario) -> ComplianceReport {
    let ex = execute(sc).unwrap();
    let part = Participation::from_trace(&ex.trace).unwrap();
    match sc.pi {
        Some(pi) => check_tau_pi(&part, sc.tau, pi, sc.tpa).unwrap(),
        None => check_tau_sleepiness(&part, sc.tau),
    }
}

fn run(name: &str, p: AttackParams) -> (Scenario, TraceIndex) {
    let sc = registry().generate(name, &p).unwrap();
    let ex = execute(&sc).unwrap();
    let ix = TraceIndex::new(&ex.trace).unwrap();
    (sc, ix)
}

fn rejected(name: &str, p: AttackParams, needle: &str) {
    match registry().generate(name, &p) {
        Err(AdversaryError::Hypothesis { reason, .. }) => assert!(reason.contains(needle), "{reason}"),
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn every_attack_is_compliant_and_breaks_its_property() {
    let cases = [
        ("lmd_bait_and_switch", "safety"),
        ("rlmd_stale_votes", "reorg_resilience"),
        ("rlmd_da_cycle", "safety"),
        ("rlmd_async_wakeup", "asynchrony_resilience"),
        ("goldfish_one_slot_async", "asynchrony_resilience"),
    ];
    for (name, property) in cases {
        let (sc, mut ix) = run(name, AttackParams::default());
        assert!(compliance(&sc).compliant, "{name} not compliant");
        let v = match property {
            "safety" => check_safety(&mut ix),
            "reorg_resilience" => check_reorg_resilience(&mut ix),
            _ => check_asynchrony_resilience(&mut ix, sc.tpa.unwrap()),
        };
        assert_eq!(v.outcome, Outcome::Fail, "{name}: {property} held");
        assert_eq!(sc.expected.as_ref().unwrap().properties[property], "fail");
    }
}

#[test]
fn two_cycle_attack_stays_compliant() {
    let p = AttackParams { n: Some(13), kappa: Some(4), ..Default::default() };
    let (sc, mut ix) = run("rlmd_da_cycle", p);
    assert!(compliance(&sc).compliant);
    assert_eq!(check_safety(&mut ix).outcome, Outcome::Fail);
}

#[test]
fn builders_reject_violated_hypotheses() {
    let fin = |x| Some(Bound::Finite(x));
    rejected("rlmd_stale_votes", AttackParams { eta: fin(3), tau: fin(3), ..Default::default() }, "τ < η");
    rejected("goldfish_one_slot_async", AttackParams { pi: fin(1), ..Default::default() }, "π ≥ 2");
    rejected("rlmd_da_cycle", AttackParams { n: Some(9), kappa: Some(3), ..Default::default() }, "κ < ⌊(n − 5)/4⌋η = 3");
    rejected("rlmd_da_cycle", AttackParams { n: Some(8), ..Default::default() }, "2m + 1");
    rejected("lmd_bait_and_switch", AttackParams { wait: Some(4), ..Default::default() }, "N > τ + 1");
    rejected("rlmd_async_wakeup", AttackParams { eta: fin(2), tau: fin(2), ..Default::default() }, "τ > π");
}

#[test]
fn cycle_count_follows_validator_count() {
    let sc = registry().generate("rlmd_da_cycle", &AttackParams { n: Some(9), ..Default::default() }).unwrap();
    let cycles = sc.strategy_params["cycles"].as_array().unwrap();
    assert_eq!(cycles.len(), 1);
    let sc = registry().generate("rlmd_da_cycle", &AttackParams { n: Some(17), kappa: Some(5), ..Default::default() }).unwrap();
    assert_eq!(sc.strategy_params["cycles"].as_array().unwrap().len(), 3);
}

#[test]
fn generated_scenarios_round_trip() {
    for name in registry().names() {
        let Ok(sc) = registry().generate(name, &AttackParams::default()) else { continue };
        let text = serde_json::to_string_pretty(&sc).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sc, "{name}");
    }
}

#[test]
fn unknown_strategy_is_an_error() {
    let mut sc = registry().generate("goldfish_one_slot_async", &AttackParams::default()).unwrap();
    sc.strategy = "nope".into();
    assert!(matches!(execute(&sc), Err(AdversaryError::UnknownStrategy(_))));
}
