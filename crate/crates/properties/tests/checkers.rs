use pvm_adversary::{execute, registry, AttackParams};
use pvm_core::{BlockStore, ValidatorId};
use pvm_netsim::{Scenario, SleepSpan, Trace};
use pvm_properties::{
    check_fast_confirm, check_liveness, check_pivot_density, check_reorg_resilience, check_safety, check_view_merge,
    pivot_slots, Outcome, TraceIndex, Witness,
};

fn scenario(extra: serde_json::Value) -> Scenario {
    let mut v = serde_json::json!({
        "n": 4, "delta": 2, "eta": 2, "tau": 2, "kappa": 2, "horizon": 12,
        "fc_kind": "rlmd_ghost(2)", "seed": 5
    });
    v.as_object_mut().unwrap().extend(extra.as_object().unwrap().clone());
    serde_json::from_value(v).unwrap()
}

fn index(sc: &Scenario) -> (Trace, TraceIndex) {
    let trace = execute(sc).unwrap().trace;
    let ix = TraceIndex::new(&trace).unwrap();
    (trace, ix)
}

#[test]
fn an_honest_run_passes_everything() {
    let sc = scenario(serde_json::json!({}));
    let (_, mut ix) = index(&sc);
    assert_eq!(pivot_slots(&ix), (1..12).collect::<Vec<_>>());
    for v in [
        check_safety(&mut ix),
        check_liveness(&mut ix, 2 * sc.kappa).unwrap(),
        check_reorg_resilience(&mut ix),
        check_view_merge(&mut ix),
        check_pivot_density(&ix, sc.kappa),
    ] {
        assert_eq!(v.outcome, Outcome::Pass, "{}: {:?}", v.property, v.witness);
        assert!(v.checked > 0);
    }
}

#[test]
fn nothing_to_check_is_vacuous() {
    let sc = scenario(serde_json::json!({ "horizon": 1 }));
    let (_, mut ix) = index(&sc);
    assert_eq!(check_reorg_resilience(&mut ix).outcome, Outcome::VacuousPass);
    assert_eq!(check_view_merge(&mut ix).outcome, Outcome::VacuousPass);
    assert_eq!(check_pivot_density(&ix, sc.kappa).outcome, Outcome::VacuousPass);
    assert!(check_liveness(&mut ix, 2).is_err(), "the horizon must exceed T_conf");
    assert!(Outcome::VacuousPass.holds() && !Outcome::PreconditionExcluded.holds());
}

#[test]
fn a_sleeping_proposer_leaves_a_pivot_gap() {
    let overrides: serde_json::Map<String, serde_json::Value> = (3..6).map(|s| (s.to_string(), 3.into())).collect();
    let mut sc = scenario(serde_json::json!({ "proposer_schedule": { "overrides": overrides } }));
    sc.sleep_schedule.push(SleepSpan::asleep(ValidatorId(3), 17, Some(34)));
    let (_, mut ix) = index(&sc);
    assert!(!pivot_slots(&ix).iter().any(|s| (3..6).contains(s)));
    let v = check_pivot_density(&ix, 3);
    assert_eq!(v.witness, Some(Witness::PivotGap { from: 3, to: 5 }));
    assert_eq!(check_pivot_density(&ix, 4).outcome, Outcome::Pass);
    assert_eq!(check_reorg_resilience(&mut ix).outcome, Outcome::Pass, "missing proposals reorg nothing");
}

#[test]
fn safety_witness_names_two_conflicting_blocks() {
    let sc = registry().generate("lmd_bait_and_switch", &AttackParams::default()).unwrap();
    let (_, mut ix) = index(&sc);
    let v = check_safety(&mut ix);
    let Some(Witness::ConflictingConfirmations { first, second }) = v.witness else {
        panic!("expected conflicting confirmations, got {v:?}");
    };
    assert!(ix.tree.conflicting(first.block, second.block));
    assert!(first.round <= second.round);
}

#[test]
fn fast_confirmation_needs_the_variant() {
    let (_, mut ix) = index(&scenario(serde_json::json!({})));
    assert!(check_fast_confirm(&mut ix).is_err());
    let fast = scenario(serde_json::json!({ "variant": "fast_confirm", "latency": 1 }));
    let (_, mut ix) = index(&fast);
    let r = check_fast_confirm(&mut ix).unwrap();
    assert_eq!(r.liveness.outcome, Outcome::Pass, "{:?}", r.liveness.witness);
    assert_eq!(r.outcome(), Outcome::Pass);
}

#[test]
fn verdicts_survive_an_ndjson_round_trip() {
    let sc = registry().generate("rlmd_stale_votes", &AttackParams::default()).unwrap();
    let (trace, mut ix) = index(&sc);
    let back = Trace::read_ndjson(trace.to_ndjson().as_bytes()).unwrap();
    let mut ix2 = TraceIndex::new(&back).unwrap();
    assert_eq!(check_reorg_resilience(&mut ix), check_reorg_resilience(&mut ix2));
    assert_eq!(check_safety(&mut ix), check_safety(&mut ix2));
}
