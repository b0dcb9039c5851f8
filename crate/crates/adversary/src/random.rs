use pvm_compliance::{check_tau_pi, check_tau_sleepiness, Participation, Status};
use pvm_core::{Block, Bound, Phase, Round, ValidatorId};
use pvm_netsim::{Action, Adversary, Corruption, Delivery, Scenario, SleepSpan, Tpa, World};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::script::{honest_ids, params, propose, vote};
use crate::AdversaryError;

/// Schedule and behaviour knobs of the randomized adversary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomParams {
    /// Chance that a validator gets sleep episodes at all.
    pub sleep_prob: f64,
    pub max_episodes: u32,
    pub max_sleep_slots: u64,
    /// Defaults to the largest count below `n / 3`.
    pub max_corrupt: Option<usize>,
    /// Length of the asynchronous period to place; `π` if unset and a `π`
    /// is declared, otherwise no period.
    pub tpa_len: Option<u64>,
    /// Every window of this many slots needs a pivot; `κ - 1` if unset.
    pub pivot_window: Option<u64>,
    pub max_attempts: usize,
    pub propose_prob: f64,
    pub vote_prob: f64,
    pub equivocate_prob: f64,
    pub retro_prob: f64,
    pub delay_prob: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            sleep_prob: 0.4,
            max_episodes: 2,
            max_sleep_slots: 6,
            max_corrupt: None,
            tpa_len: None,
            pivot_window: None,
            max_attempts: 20_000,
            propose_prob: 0.8,
            vote_prob: 0.7,
            equivocate_prob: 0.3,
            retro_prob: 0.2,
            delay_prob: 0.5,
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Copy of `template` with seed `seed` and sleep, corruption and
/// asynchrony schedules drawn until the result is compliant and dense in
/// pivot slots.
pub fn generate_trial(template: &Scenario, seed: u64) -> Result<Scenario, AdversaryError> {
    let p: RandomParams = params(template)?;
    let mut sc = template.clone();
    sc.seed = seed;
    sc.expected = template.expected.clone();
    let mut rng = rng_for(seed, 1);
    let n = sc.n;
    let timing = sc.timing();
    let slot_len = timing.slot_len();
    let max_corrupt = p.max_corrupt.unwrap_or((n.saturating_sub(1)) / 3);
    let tpa_len = p.tpa_len.or(match sc.pi {
        Some(Bound::Finite(pi)) if pi >= 2 => Some(pi),
        _ => None,
    });
    let window = p.pivot_window.unwrap_or(sc.kappa.saturating_sub(1).max(1));
    for _ in 0..p.max_attempts {
        sc.corruption_schedule.clear();
        sc.sleep_schedule.clear();
        sc.tpa = None;
        let mut order: Vec<ValidatorId> = sc.validators().collect();
        order.shuffle(&mut rng);
        let c = rng.gen_range(0..=max_corrupt);
        for v in &order[..c] {
            let round = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..sc.total_rounds()) };
            sc.corruption_schedule.push(Corruption { validator: *v, round });
        }
        for v in sc.validators().collect::<Vec<_>>() {
            if !rng.gen_bool(p.sleep_prob) {
                continue;
            }
            for _ in 0..rng.gen_range(1..=p.max_episodes) {
                let from = rng.gen_range(0..sc.total_rounds());
                let len = rng.gen_range(1..=p.max_sleep_slots) * slot_len + rng.gen_range(0..slot_len);
                sc.sleep_schedule.push(SleepSpan::asleep(v, from, Some(from + len)));
            }
        }
        if let Some(len) = tpa_len {
            if sc.horizon > len + 4 {
                let t1 = rng.gen_range(2..sc.horizon - len - 2);
                sc.tpa = Some(Tpa { t1, t2: t1 + len });
            }
        }
        let part = Participation::from_schedule(&sc);
        let compliant = match (sc.pi, sc.tpa) {
            (Some(pi), tpa) => check_tau_pi(&part, sc.tau, pi, tpa).map(|r| r.compliant).unwrap_or(false),
            (None, _) => check_tau_sleepiness(&part, sc.tau).compliant,
        };
        if compliant && dense_pivots(&sc, &part, window) {
            return Ok(sc);
        }
    }
    Err(AdversaryError::Exhausted(p.max_attempts))
}

fn dense_pivots(sc: &Scenario, part: &Participation, window: u64) -> bool {
    let timing = sc.timing();
    let pivot: Vec<bool> = (0..sc.horizon)
        .map(|t| t > 0 && part.status(sc.proposer(t), timing.propose_round(t)) == Status::Active)
        .collect();
    if sc.horizon <= window {
        return true;
    }
    (1..=sc.horizon - window).all(|s| (s..s + window).any(|t| pivot[t as usize]))
}

/// Adversary that proposes, votes, equivocates, votes retroactively and
/// reorders honest deliveries at random within the allowed bounds.
#[derive(Debug)]
pub struct RandomCompliant {
    p: RandomParams,
    rng: ChaCha8Rng,
}

impl RandomCompliant {
    pub fn build(sc: &Scenario) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(Box::new(RandomCompliant { p: params(sc)?, rng: rng_for(sc.seed, 2) }))
    }

    fn recipients(&mut self, world: &World<'_>, from: Round, spread: u64) -> Vec<(ValidatorId, Round)> {
        let mut out = Vec::new();
        for v in honest_ids(world) {
            if self.rng.gen_bool(0.75) {
                out.push((v, from + self.rng.gen_range(0..=spread)));
            }
        }
        out
    }
}

impl Adversary for RandomCompliant {
    fn name(&self) -> &str {
        "random_compliant"
    }

    fn on_round(&mut self, world: &World<'_>) -> Vec<Action> {
        let Some(phase) = world.timing.phase(world.round) else {
            return Vec::new();
        };
        let corrupted: Vec<ValidatorId> = world.corrupted.iter().copied().collect();
        if corrupted.is_empty() {
            return Vec::new();
        }
        let t = world.slot();
        let r = world.round;
        let delta = world.timing.delta;
        let view = world.union_view(honest_ids(world));
        let blocks: Vec<&Block> = view.blocks().collect();
        let mut out = Vec::new();
        match phase {
            Phase::Propose if t > 0 => {
                let proposer = world.proposer(t);
                if world.is_corrupted(proposer) && self.rng.gen_bool(self.p.propose_prob) {
                    let older: Vec<&&Block> = blocks.iter().filter(|b| b.slot < t).collect();
                    let parent: &Block = older.choose(&mut self.rng).expect("genesis");
                    let body = self.rng.gen::<[u8; 8]>().to_vec();
                    let block = Block::new(parent, t, proposer, body);
                    let mut pv = view.clone();
                    pv.insert_block(block.clone()).expect("parent in view");
                    let to = self.recipients(world, r, 2 * delta);
                    out.push(propose(proposer, t, block, pv, to));
                }
            }
            Phase::Vote => {
                for c in corrupted {
                    if !self.rng.gen_bool(self.p.vote_prob) {
                        continue;
                    }
                    let ballots = if self.rng.gen_bool(self.p.equivocate_prob) { 2 } else { 1 };
                    for _ in 0..ballots {
                        let slot = if t > 1 && self.rng.gen_bool(self.p.retro_prob) {
                            self.rng.gen_range(t.saturating_sub(3).max(1)..t)
                        } else {
                            t
                        };
                        let eligible: Vec<&&Block> = blocks.iter().filter(|b| b.slot <= slot).collect();
                        let target = eligible.choose(&mut self.rng).expect("genesis").id;
                        let to = self.recipients(world, r, 2 * delta);
                        out.push(vote(c, slot, target, to));
                    }
                }
            }
            _ => {}
        }
        out
    }

    fn delivery(&mut self, d: &Delivery<'_>) -> Option<Round> {
        self.rng.gen_bool(self.p.delay_prob).then(|| self.rng.gen_range(d.earliest..=d.latest))
    }
}
