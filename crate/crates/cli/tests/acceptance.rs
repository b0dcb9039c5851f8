//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use pvm_adversary::{execute, generate_trial, registry, AttackParams, RandomParams};
use pvm_cli::{analyze, cmd_run, run_trials, Analysis};
use pvm_compliance::{check_tau_pi, check_tau_sleepiness, Condition, Participation};
use pvm_core::{Block, BlockId, BlockStore, Bound, Slot, ValidatorId, View, Vote};
use pvm_forkchoice::filters::{fil_eq, fil_exp, fil_lmd};
use pvm_forkchoice::{ghost, instantiate, subtree_weights, ForkChoiceKind, TieBreak};
use pvm_netsim::{Corruption, Scenario, SleepSpan, Tpa, Trace, Variant};
use pvm_properties::{Outcome, TraceIndex, Witness};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let criteria: [(&str, fn() -> Check); 13] = [
        ("fork-choice oracle equivalence", oracle_equivalence),
        ("reduction identities", reductions),
        ("view-merge on synchronous runs", view_merge),
        ("reorg resilience, safety, liveness", dynamic_availability),
        ("asynchrony resilience", asynchrony_resilience),
        ("LMD-GHOST bait-and-switch", lmd_bait_and_switch),
        ("RLMD-GHOST stale votes", rlmd_stale_votes),
        ("RLMD-GHOST availability cycle", rlmd_da_cycle),
        ("RLMD-GHOST asynchronous wake-up", rlmd_async_wakeup),
        ("Goldfish one-slot asynchrony", goldfish_async),
        ("fast confirmation", fast_confirmation),
        ("compliance hierarchy", compliance_hierarchy),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// Brute-force fork choice, written from the definitions and sharing no code
// with the library.

fn o_eq(votes: &[Vote]) -> Vec<Vote> {
    let bad: BTreeSet<ValidatorId> = votes
        .iter()
        .filter(|a| votes.iter().any(|b| a.voter == b.voter && a.slot == b.slot && a.block != b.block))
        .map(|a| a.voter)
        .collect();
    votes.iter().filter(|v| !bad.contains(&v.voter)).copied().collect()
}

fn o_lmd(votes: &[Vote]) -> Vec<Vote> {
    votes
        .iter()
        .filter(|a| !votes.iter().any(|b| b.voter == a.voter && b.slot > a.slot))
        .copied()
        .collect()
}

fn o_exp(votes: &[Vote], t: Slot, eta: Bound) -> Vec<Vote> {
    votes
        .iter()
        .filter(|v| {
            let fresh = match eta {
                Bound::Finite(e) => v.slot as i64 >= t as i64 - e as i64,
                Bound::Infinite => true,
            };
            fresh && v.slot < t
        })
        .copied()
        .collect()
}

fn ancestry(blocks: &BTreeMap<BlockId, Block>, b: BlockId) -> Vec<BlockId> {
    let mut out = vec![b];
    let mut cur = b;
    while let Some(p) = blocks[&cur].parent {
        out.push(p);
        cur = p;
    }
    out.reverse();
    out
}

/// The leaf whose genesis path is lexicographically best, comparing
/// siblings by weight, then by lying on the pin's path, then by lowest id.
fn o_ghost(view: &View, votes: &[Vote], pin: Option<BlockId>) -> BlockId {
    let blocks: BTreeMap<BlockId, Block> = view.blocks().map(|b| (b.id, b.clone())).collect();
    let weight = |b: BlockId| votes.iter().filter(|v| ancestry(&blocks, v.block).contains(&b)).count();
    let pin_path: BTreeSet<BlockId> = pin.map(|p| ancestry(&blocks, p).into_iter().collect()).unwrap_or_default();
    let leaves = blocks.keys().filter(|b| !blocks.values().any(|c| c.parent == Some(**b)));
    leaves
        .map(|leaf| {
            let path = ancestry(&blocks, *leaf);
            let key: Vec<_> = path[1..]
                .iter()
                .map(|b| (std::cmp::Reverse(weight(*b)), !pin_path.contains(b), *b))
                .collect();
            (key, *leaf)
        })
        .min()
        .map(|(_, leaf)| leaf)
        .expect("genesis is a leaf of the empty tree")
}

struct Input {
    view: View,
    t: Slot,
    pin: Option<BlockId>,
}

/// Up to 8 blocks, up to 12 votes from up to 6 validators. With
/// `past_only`, every vote is older than `t`.
fn random_input(rng: &mut ChaCha8Rng, past_only: bool) -> Input {
    let n = rng.gen_range(1..=6u32);
    let mut blocks = vec![Block::genesis()];
    for i in 0..rng.gen_range(0..8) {
        let parent = blocks.choose(rng).unwrap().clone();
        let slot = parent.slot + rng.gen_range(1..=3);
        blocks.push(Block::new(&parent, slot, ValidatorId(rng.gen_range(0..n)), vec![i as u8]));
    }
    let mut votes = Vec::new();
    for _ in 0..rng.gen_range(0..=12) {
        let b = blocks.choose(rng).unwrap();
        votes.push(Vote { slot: b.slot + rng.gen_range(0..=3), voter: ValidatorId(rng.gen_range(0..n)), block: b.id });
    }
    let max_slot = votes.iter().map(|v| v.slot).chain(blocks.iter().map(|b| b.slot)).max().unwrap();
    let t = if past_only { max_slot + rng.gen_range(1..=2) } else { rng.gen_range(0..=max_slot + 2) };
    let pin = rng.gen_bool(0.3).then(|| blocks.choose(rng).unwrap().id);
    Input { view: View::from_parts(blocks, votes).expect("closed by construction"), t, pin }
}

fn sorted(mut v: Vec<Vote>) -> Vec<Vote> {
    v.sort();
    v
}

const ETAS: [Bound; 4] = [Bound::Finite(1), Bound::Finite(2), Bound::Finite(3), Bound::Infinite];

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let views = 10_000;
    let mut comparisons = 0usize;
    for _ in 0..views {
        let inp = random_input(&mut rng, false);
        let votes: Vec<Vote> = inp.view.votes().iter().copied().collect();
        let tb = TieBreak { pin: inp.pin };
        for eta in ETAS {
            // Every sub-composition of lmd ∘ exp ∘ eq.
            for mask in 0..8u8 {
                let (mut lib, mut ora) = (votes.clone(), votes.clone());
                if mask & 1 != 0 {
                    lib = fil_eq(&lib);
                    ora = o_eq(&ora);
                }
                if mask & 2 != 0 {
                    lib = fil_exp(&lib, inp.t, eta);
                    ora = o_exp(&ora, inp.t, eta);
                }
                if mask & 4 != 0 {
                    lib = fil_lmd(&lib);
                    ora = o_lmd(&ora);
                }
                ensure!(sorted(lib.clone()) == sorted(ora.clone()), "filter mask {mask} η = {eta} disagrees at t = {}", inp.t);
                ensure!(ghost(&inp.view, &lib, &tb) == o_ghost(&inp.view, &ora, inp.pin), "ghost disagrees (mask {mask})");
                comparisons += 1;
            }
        }
        let kinds = [ForkChoiceKind::Ghost, ForkChoiceKind::LmdGhost, ForkChoiceKind::GhostEph]
            .into_iter()
            .chain(ETAS.map(ForkChoiceKind::RlmdGhost));
        for kind in kinds {
            let ora = match kind {
                ForkChoiceKind::Ghost => o_eq(&votes),
                ForkChoiceKind::LmdGhost => o_lmd(&o_eq(&votes)),
                ForkChoiceKind::GhostEph => o_exp(&o_eq(&votes), inp.t, Bound::Finite(1)),
                ForkChoiceKind::RlmdGhost(eta) => o_lmd(&o_exp(&o_eq(&votes), inp.t, eta)),
            };
            let got = instantiate(kind).head(&inp.view, inp.t, &tb);
            ensure!(got == o_ghost(&inp.view, &ora, inp.pin), "{kind} head disagrees with the oracle");
            comparisons += 1;
        }
    }
    Ok(format!("{views} views, {comparisons} filter and head comparisons, all equal"))
}

fn reductions() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inputs = 1_000;
    let one = instantiate(ForkChoiceKind::RlmdGhost(Bound::Finite(1)));
    let inf = instantiate(ForkChoiceKind::RlmdGhost(Bound::Infinite));
    let eph = instantiate(ForkChoiceKind::GhostEph);
    let lmd = instantiate(ForkChoiceKind::LmdGhost);
    for _ in 0..inputs {
        let inp = random_input(&mut rng, true);
        let tb = TieBreak { pin: inp.pin };
        ensure!(one.head(&inp.view, inp.t, &tb) == eph.head(&inp.view, inp.t, &tb), "RLMD(1) differs from GHOST-Eph");
        ensure!(inf.head(&inp.view, inp.t, &tb) == lmd.head(&inp.view, inp.t, &tb), "RLMD(∞) differs from LMD-GHOST");
    }
    Ok(format!("{inputs} inputs, RLMD(1) = GHOST-Eph and RLMD(∞) = LMD-GHOST on all"))
}

fn template(params: AttackParams) -> Scenario {
    registry().generate("random_compliant", &params).expect("random template")
}

#[allow(dead_code)]
fn outcome(a: &Analysis, property: &str) -> Outcome {
    a.properties.outcome(property).unwrap_or(Outcome::PreconditionExcluded)
}

fn view_merge() -> Check {
    let runs = 200u64;
    let mut pivots = 0;
    let mut checked = 0;
    for (i, n) in (4..=10).cycle().take(7).enumerate() {
        let eta = Bound::Finite(1 + i as u64 % 3);
        let sc = template(AttackParams { n: Some(n), eta: Some(eta), horizon: Some(50), ..Default::default() });
        let count = runs / 7 + u64::from((i as u64) < runs % 7);
        for row in run_trials(&sc, count, 1_000 * n as u64).map_err(|e| e.to_string())? {
            let a = &row.report.analysis;
            ensure!(a.compliance.compliant, "n = {n} seed {} is not compliant", row.seed);
            let v = &a.properties.verdicts["view_merge"];
            ensure!(v.outcome == Outcome::Pass, "n = {n} seed {}: view_merge {:?} {:?}", row.seed, v.outcome, v.witness);
            pivots += a.stats.pivot_slots;
            checked += v.checked;
        }
    }
    Ok(format!("{runs} runs, n in 4..=10, {pivots} pivot slots, {checked} honest votes on the proposal"))
}

fn dynamic_availability() -> Check {
    let mut details = Vec::new();
    for eta in [1, 2, 4] {
        let sc = template(AttackParams {
            eta: Some(Bound::Finite(eta)),
            kappa: Some(5),
            horizon: Some(60),
            n: Some(7),
            ..Default::default()
        });
        let rows = run_trials(&sc, 200, 50_000 + eta * 1_000).map_err(|e| e.to_string())?;
        let mut substantive = [0usize; 3];
        for row in &rows {
            let a = &row.report.analysis;
            ensure!(a.compliance.compliant, "η = {eta} seed {} is not compliant", row.seed);
            for (k, p) in ["reorg_resilience", "safety", "liveness"].iter().enumerate() {
                let v = &a.properties.verdicts[p];
                ensure!(v.outcome.holds(), "η = {eta} seed {}: {p} {:?} {:?}", row.seed, v.outcome, v.witness);
                substantive[k] += usize::from(v.outcome == Outcome::Pass);
            }
        }
        details.push(format!("η = {eta}: 200 runs, substantive passes {substantive:?}"));
    }
    Ok(details.join("; "))
}

fn asynchrony_resilience() -> Check {
    let mut details = Vec::new();
    for eta in [3, 4] {
        let sc = template(AttackParams {
            eta: Some(Bound::Finite(eta)),
            pi: Some(Bound::Finite(eta - 1)),
            n: Some(7),
            ..Default::default()
        });
        let rows = run_trials(&sc, 200, 90_000 + eta * 1_000).map_err(|e| e.to_string())?;
        let mut checked = 0;
        for row in &rows {
            let a = &row.report.analysis;
            ensure!(a.compliance.compliant && a.compliance.tpa.is_some(), "η = {eta} seed {}: no compliant TPA", row.seed);
            let v = &a.properties.verdicts["asynchrony_resilience"];
            ensure!(v.outcome.holds(), "η = {eta} seed {}: {:?} {:?}", row.seed, v.outcome, v.witness);
            checked += v.checked;
        }
        details.push(format!("η = {eta}, π = {}: 200 runs, {checked} obligations", eta - 1));
    }
    Ok(details.join("; "))
}

struct Golden {
    sc: Scenario,
    trace: Trace,
    analysis: Analysis,
    ix: TraceIndex,
    views: Vec<View>,
}

fn golden(strategy: &str, params: AttackParams) -> Result<Golden, String> {
    let sc = registry().generate(strategy, &params).map_err(|e| e.to_string())?;
    let exec = execute(&sc).map_err(|e| e.to_string())?;
    let analysis = analyze(&exec.trace, sc.tau, sc.pi).map_err(|e| e.to_string())?;
    let ix = TraceIndex::new(&exec.trace).map_err(|e| e.to_string())?;
    let views = exec.validators.iter().map(|v| v.view().clone()).collect();
    Ok(Golden { sc, trace: exec.trace, analysis, ix, views })
}

/// Slot and body of the first adversarial ancestor of `b` with body `A` or `B`.
fn branch_of(ix: &TraceIndex, b: BlockId) -> Option<&'static str> {
    ix.tree.chain(b).into_iter().find_map(|id| match ix.tree.block(id)?.body.as_slice() {
        b"A" => Some("A"),
        b"B" => Some("B"),
        _ => None,
    })
}

fn lmd_bait_and_switch() -> Check {
    let (m, tau) = (2, 3);
    let g = golden(
        "lmd_bait_and_switch",
        AttackParams { m: Some(m), tau: Some(Bound::Finite(tau)), kappa: Some(3), ..Default::default() },
    )?;
    ensure!(g.sc.n == 5, "n = {}", g.sc.n);
    let c = &g.analysis.compliance;
    ensure!(c.compliant, "not τ-compliant: first failing row {:?}", c.first_failing_row());
    let t = 3;
    for s in t + 2..=t + tau {
        let row = c.rows.iter().find(|r| r.slot == s && r.condition == Condition::Sleepiness).ok_or("missing row")?;
        ensure!((row.lhs, row.rhs) == (m as u64 + 1, m as u64), "slot {s}: {} > {}", row.lhs, row.rhs);
    }
    let v = &g.analysis.properties.verdicts["safety"];
    let Some(Witness::ConflictingConfirmations { first, second }) = v.witness else {
        return Err(format!("safety {:?}", v.outcome));
    };
    let (a, b) = (branch_of(&g.ix, first.block), branch_of(&g.ix, second.block));
    ensure!(a == Some("A") && b == Some("B"), "confirmed {a:?} then {b:?}");
    Ok(format!(
        "n = 5, {} rows compliant, |H| = 3 > 2 on slots {}..={}; A confirmed at round {}, B at round {}",
        c.rows.len(),
        t + 2,
        t + tau,
        first.round,
        second.round
    ))
}

fn block_with_body(view: &View, body: &[u8]) -> Option<BlockId> {
    view.blocks().find(|b| b.body == body).map(|b| b.id)
}

fn rlmd_stale_votes() -> Check {
    let (m, eta) = (3, 3);
    let g = golden(
        "rlmd_stale_votes",
        AttackParams { m: Some(m), eta: Some(Bound::Finite(eta)), tau: Some(Bound::Finite(2)), ..Default::default() },
    )?;
    ensure!(g.sc.n == 7, "n = {}", g.sc.n);
    ensure!(g.analysis.compliance.compliant, "not τ-compliant: {:?}", g.analysis.compliance.first_failing_row());
    let t = 3;
    let c = g.ix.proposals.iter().find(|p| p.slot == t + 1).ok_or("no honest proposal in slot t + 1")?.block;
    let v = &g.analysis.properties.verdicts["reorg_resilience"];
    let Some(Witness::Reorged { block, .. }) = v.witness else {
        return Err(format!("reorg_resilience {:?}", v.outcome));
    };
    ensure!(block == c, "reorged block {block} is not C = {c}");
    let honest: Vec<usize> = (0..g.sc.n).filter(|i| !g.sc.corruption_schedule.iter().any(|x| x.validator.0 as usize == *i)).collect();
    let view = &g.views[honest[0]];
    let (a, b) = (block_with_body(view, b"A").ok_or("no A")?, block_with_body(view, b"B").ok_or("no B")?);
    let votes: Vec<Vote> = view.votes().iter().copied().collect();
    let fc = instantiate(ForkChoiceKind::RlmdGhost(Bound::Finite(eta)));
    let w = subtree_weights(view, &fc.filter(&votes, t + eta));
    ensure!((w[&b], w[&a]) == (m, m - 1), "weights B = {}, A = {}", w[&b], w[&a]);
    Ok(format!("τ = 2 compliant; C reorged; at slot {} weights B = {} vs A = {}", t + eta, w[&b], w[&a]))
}

fn rlmd_da_cycle() -> Check {
    let mut details = Vec::new();
    for kappa in [1, 2] {
        let g = golden(
            "rlmd_da_cycle",
            AttackParams { n: Some(9), eta: Some(Bound::Finite(3)), kappa: Some(kappa), ..Default::default() },
        )?;
        ensure!(g.analysis.compliance.compliant, "κ = {kappa}: not compliant: {:?}", g.analysis.compliance.first_failing_row());
        let cycles = g.sc.strategy_params["cycles"].as_array().ok_or("no cycles")?;
        ensure!(cycles.len() == 1, "κ = {kappa}: {} cycles", cycles.len());
        let cycle_slot = cycles[0]["slot"].as_u64().ok_or("cycle slot")?;
        let bound = (9 - 5) / 4 * 3;
        let timing = g.sc.timing();
        let at = match (&g.analysis.properties.verdicts["safety"].witness, &g.analysis.properties.verdicts["liveness"].witness) {
            (Some(Witness::ConflictingConfirmations { second, .. }), _) => ("safety", second.round),
            (_, Some(Witness::StaleConfirmation { at, .. })) => ("liveness", at.round),
            _ => return Err(format!("κ = {kappa}: neither safety nor liveness fails")),
        };
        let slot = timing.slot_of(at.1);
        ensure!(slot <= cycle_slot + bound, "κ = {kappa}: {} violation at slot {slot}, cycle at {cycle_slot}", at.0);
        details.push(format!("κ = {kappa}: {} violation at slot {slot} (cycle slot {cycle_slot})", at.0));
    }
    Ok(format!("n = 9, τ = 2 compliant, one cycle; {}", details.join("; ")))
}

fn final_heads(ix: &TraceIndex) -> BTreeMap<ValidatorId, BlockId> {
    ix.snapshots.iter().filter_map(|s| s.canonical.map(|c| (s.validator, c))).collect()
}

fn rlmd_async_wakeup() -> Check {
    let mut g = golden("rlmd_async_wakeup", AttackParams { eta: Some(Bound::Finite(2)), ..Default::default() })?;
    ensure!(g.sc.n == 3, "n = {}", g.sc.n);
    let tpa = g.sc.tpa.ok_or("no TPA")?;
    ensure!(tpa.len() == 2, "TPA length {}", tpa.len());
    ensure!(g.sc.tau.is_infinite() && g.sc.pi == Some(Bound::Finite(2)), "not (∞, η) parameters");
    ensure!(g.analysis.compliance.compliant, "not compliant: {:?}", g.analysis.compliance.first_failing_row());
    let v = &g.analysis.properties.verdicts["asynchrony_resilience"];
    ensure!(v.outcome == Outcome::Fail, "asynchrony_resilience {:?}", v.outcome);
    let pin = g.sc.tiebreak_pin.ok_or("no pin")?;
    ensure!(g.ix.parent(pin) == Some(Block::genesis().id), "pinned B is not on genesis");
    let heads = final_heads(&g.ix);
    ensure!(heads.len() == 3, "{} validators have a head", heads.len());
    for (v, h) in heads {
        ensure!(g.ix.is_prefix(pin, h), "{v} does not have B canonical");
    }
    let _ = &g.trace;
    Ok("(∞, 2)-compliant; asynchrony resilience fails; B on genesis canonical for all 3 validators".into())
}

fn goldfish_async() -> Check {
    let mut g = golden("goldfish_one_slot_async", AttackParams::default())?;
    let tpa = g.sc.tpa.ok_or("no TPA")?;
    ensure!(g.sc.corruption_schedule.len() == 1, "{} adversaries", g.sc.corruption_schedule.len());
    ensure!(g.sc.sleep_schedule.is_empty(), "someone sleeps");
    ensure!(tpa.t2 - tpa.t1 - 1 == 1, "{} asynchronous slots", tpa.t2 - tpa.t1 - 1);
    ensure!(g.analysis.compliance.compliant, "not (∞, 2)-compliant: {:?}", g.analysis.compliance.first_failing_row());
    let v = &g.analysis.properties.verdicts["asynchrony_resilience"];
    ensure!(v.outcome == Outcome::Fail, "asynchrony_resilience {:?}", v.outcome);
    let cutoff = g.sc.timing().propose_round(tpa.t1 + 1);
    let genesis = Block::genesis().id;
    let confirmed: BTreeSet<BlockId> = g
        .ix
        .snapshots
        .iter()
        .filter(|s| s.round < cutoff)
        .filter_map(|s| s.confirmed)
        .filter(|b| *b != genesis)
        .collect();
    ensure!(!confirmed.is_empty(), "nothing confirmed before the asynchronous slot");
    for (v, h) in final_heads(&g.ix) {
        for b in &confirmed {
            ensure!(!g.ix.is_prefix(*b, h), "{v} still has confirmed block {b}");
        }
    }
    Ok(format!("(∞, 2)-compliant; {} earlier confirmed blocks reorged out of every view", confirmed.len()))
}

fn fast_base(n: usize, seed: u64) -> Scenario {
    let mut sc = template(AttackParams {
        n: Some(n),
        eta: Some(Bound::Finite(2)),
        horizon: Some(20),
        seed: Some(seed),
        ..Default::default()
    });
    sc.variant = Variant::FastConfirm;
    sc.strategy = "null".into();
    sc.strategy_params = serde_json::Value::Null;
    sc.expected = None;
    sc
}

fn fast_confirmation() -> Check {
    // (a) everyone honest and awake, messages take Δ/2.
    let mut sc = fast_base(6, 1);
    sc.latency = Some(sc.delta / 2);
    let exec = execute(&sc).map_err(|e| e.to_string())?;
    let mut ix = TraceIndex::new(&exec.trace).map_err(|e| e.to_string())?;
    let report = pvm_properties::check_fast_confirm(&mut ix).map_err(|e| e.to_string())?;
    ensure!(report.liveness.outcome == Outcome::Pass, "(a) liveness {:?} {:?}", report.liveness.outcome, report.liveness.witness);
    for p in &ix.proposals {
        let want = ix.parent(p.block).expect("non-genesis");
        let vr = ix.timing.vote_round(p.slot);
        let at_vote_round = ix.fast_confirms.iter().filter(|(r, t, _, b)| *r == vr && *t == p.slot && *b == want).count();
        ensure!(at_vote_round == sc.n, "(a) slot {}: {at_vote_round} of {} fast-confirm at 3Δt + Δ", p.slot, sc.n);
    }
    let a = format!("(a) {} slots fast-confirmed by all at 3Δt + Δ", ix.proposals.len());

    // (b) random compliant runs with equivocating corrupted validators.
    let mut tpl = template(AttackParams { n: Some(7), eta: Some(Bound::Finite(2)), ..Default::default() });
    tpl.variant = Variant::FastConfirm;
    tpl.strategy_params = serde_json::to_value(RandomParams { equivocate_prob: 0.7, ..Default::default() }).unwrap();
    let rows = run_trials(&tpl, 100, 7_000).map_err(|e| e.to_string())?;
    let (mut checked, mut equivocating_runs) = (0, 0);
    for row in &rows {
        let fc = row.report.analysis.properties.fast_confirm.as_ref().ok_or("no fast-confirm report")?;
        ensure!(fc.equivocators * 3 < tpl.n, "seed {}: {} equivocators", row.seed, fc.equivocators);
        ensure!(fc.persistence.outcome.holds(), "(b) seed {}: {:?}", row.seed, fc.persistence.witness);
        checked += fc.persistence.checked;
        equivocating_runs += usize::from(fc.equivocators > 0);
    }
    ensure!(checked > 0, "(b) nothing fast-confirmed");
    let b = format!("(b) 100 runs ({equivocating_runs} with equivocators), {checked} persistence obligations");

    // (c) one short of the quorum.
    let mut total = 0;
    for n in [4usize, 6, 7, 9] {
        let awake = (2 * n).div_ceil(3) - 1;
        let mut sc = fast_base(n, 3);
        sc.latency = Some(1);
        sc.sleep_schedule = (awake..n).map(|v| SleepSpan::asleep(ValidatorId(v as u32), 0, None)).collect();
        let exec = execute(&sc).map_err(|e| e.to_string())?;
        let ix = TraceIndex::new(&exec.trace).map_err(|e| e.to_string())?;
        ensure!(ix.fast_confirms.is_empty(), "(c) n = {n} with {awake} awake fast-confirmed");
        total += ix.proposals.len();
    }
    Ok(format!("{a}; {b}; (c) no fast confirmation with ⌈2n/3⌉ − 1 awake over {total} slots"))
}

fn random_schedule(rng: &mut ChaCha8Rng) -> Scenario {
    let n = rng.gen_range(3..=9);
    let mut sc = template(AttackParams { n: Some(n), horizon: Some(rng.gen_range(12..=30)), ..Default::default() });
    let rounds = sc.total_rounds();
    for v in 0..n as u32 {
        for _ in 0..rng.gen_range(0..=2) {
            let from = rng.gen_range(0..rounds);
            sc.sleep_schedule.push(SleepSpan::asleep(ValidatorId(v), from, Some(from + rng.gen_range(1..30))));
        }
    }
    for v in 0..n as u32 {
        if rng.gen_bool(0.85) {
            continue;
        }
        sc.corruption_schedule.push(Corruption { validator: ValidatorId(v), round: rng.gen_range(0..rounds) });
    }
    let t1 = rng.gen_range(1..sc.horizon - 4);
    sc.tpa = Some(Tpa { t1, t2: t1 + rng.gen_range(2..=4) });
    sc
}

fn compliance_hierarchy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let taus = [1, 2, 3, 4, 6].map(Bound::Finite).into_iter().chain([Bound::Infinite]).collect::<Vec<_>>();
    let (mut tau_pairs, mut pi_pairs) = (0, 0);
    for _ in 0..500 {
        let sc = random_schedule(&mut rng);
        let part = Participation::from_schedule(&sc);
        let pass: HashMap<Bound, bool> = taus.iter().map(|t| (*t, check_tau_sleepiness(&part, *t).compliant)).collect();
        for t1 in &taus {
            for t2 in taus.iter().filter(|t2| *t2 < t1) {
                if pass[t1] {
                    tau_pairs += 1;
                    ensure!(pass[t2], "τ = {t1} passes but τ = {t2} fails");
                }
            }
        }
        for tau in &taus {
            let pis: Vec<Bound> = match tau {
                Bound::Finite(t) => (1..*t).map(Bound::Finite).collect(),
                Bound::Infinite => [1, 2, 3, 4, 5].map(Bound::Finite).into_iter().chain([Bound::Infinite]).collect(),
            };
            let ok: Vec<bool> = pis
                .iter()
                .map(|pi| check_tau_pi(&part, *tau, *pi, sc.tpa).map(|r| r.compliant).unwrap_or(false))
                .collect();
            for i in 0..pis.len() {
                for j in i..pis.len() {
                    if ok[i] {
                        pi_pairs += 1;
                        ensure!(ok[j], "(τ, π) = ({tau}, {}) passes but ({tau}, {}) fails", pis[i], pis[j]);
                    }
                }
            }
        }
    }
    ensure!(tau_pairs > 0 && pi_pairs > 0, "no passing schedules sampled");
    Ok(format!("500 schedules, {tau_pairs} τ and {pi_pairs} π implications with a passing premise"))
}

fn run_twice(dir: &Path, name: &str, sc: &Scenario) -> Result<(), String> {
    let file = dir.join(format!("{name}.json"));
    std::fs::write(&file, serde_json::to_string_pretty(sc).unwrap()).map_err(|e| e.to_string())?;
    let outs = [dir.join(format!("{name}-1")), dir.join(format!("{name}-2"))];
    for out in &outs {
        cmd_run(&file, out, None).map_err(|e| e.to_string())?;
    }
    for f in ["trace.ndjson", "compliance.json", "properties.json", "report.json"] {
        let a = std::fs::read(outs[0].join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(outs[1].join(f)).map_err(|e| e.to_string())?;
        ensure!(a == b, "{name}: {f} differs between runs");
    }
    Ok(())
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut names = Vec::new();
    for s in ["lmd_bait_and_switch", "rlmd_stale_votes", "rlmd_da_cycle", "rlmd_async_wakeup", "goldfish_one_slot_async"] {
        let sc = registry().generate(s, &AttackParams::default()).map_err(|e| e.to_string())?;
        run_twice(dir.path(), s, &sc)?;
        names.push(s.to_string());
    }
    let tpl = template(AttackParams { n: Some(7), eta: Some(Bound::Finite(3)), pi: Some(Bound::Finite(2)), ..Default::default() });
    for seed in [5, 6] {
        let sc = generate_trial(&tpl, seed).map_err(|e| e.to_string())?;
        run_twice(dir.path(), &format!("random_{seed}"), &sc)?;
        names.push(format!("random seed {seed}"));
    }
    Ok(format!("byte-identical trace and reports for {}", names.join(", ")))
}
