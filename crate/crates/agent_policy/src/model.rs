use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use sslab_beliefs::{CountState, DirichletPrior};
use sslab_game::{BehaviorProfile, Game, GameTree, InfoSetId, NodeKind, PureStrategy, Role};

use crate::PolicyError;

/// Largest number of tracked (infoset, action) counters; each takes one byte of the state key.
pub const MAX_SLOTS: usize = 16;
/// Default bound on the number of reachable belief states.
pub const DEFAULT_MAX_STATES: usize = 4_000_000;
/// Profiles enumerated exactly when deciding which sets to track; beyond this a coarser test is used.
const PROFILE_ENUMERATION_LIMIT: u128 = 1_000_000;

/// One tracked counter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub infoset: String,
    pub action: String,
}

/// One terminal node inside an observation class.
#[derive(Clone, Debug)]
struct Term {
    /// Product of prior means over the untracked opponent pairs on the path.
    constant: f64,
    /// Tracked slots on the path.
    slots: Vec<u8>,
    /// All opponent pairs on the path.
    pairs: Vec<(InfoSetId, usize)>,
}

/// Outcomes the agent cannot tell apart for belief and payoff purposes.
#[derive(Clone, Debug)]
pub struct ObsClass {
    pub payoff: f64,
    /// Tracked slots incremented by this observation, before saturation.
    pub reveals: Vec<u8>,
    /// Terminal positions in the class.
    pub terminals: Vec<usize>,
    terms: Vec<Term>,
}

/// Finite belief MDP of one role: tracked counters, reachable states and the successor table.
#[derive(Clone, Debug)]
pub struct BeliefModel {
    pub role: Role,
    pub cap: u32,
    pub tracked: Vec<InfoSetId>,
    pub slots: Vec<Slot>,
    slot_set: Vec<usize>,
    set_slots: Vec<(usize, usize)>,
    set_owner: Vec<Role>,
    slot_infoset: Vec<(InfoSetId, usize)>,
    weight: Vec<f64>,
    set_weight: Vec<f64>,
    pub strategies: Vec<PureStrategy>,
    pub classes: Vec<Vec<ObsClass>>,
    offsets: Vec<usize>,
    /// Total number of classes across strategies; the successor-table stride.
    pub width: usize,
    pub states: Vec<u128>,
    index: HashMap<u128, u32>,
    succ: Vec<u32>,
}

fn x_of(tree: &GameTree, game: &Game, role: Role, tracked: &[bool], t: usize) -> (u64, Vec<(InfoSetId, usize)>) {
    let partition = game.partition(role);
    let cell = partition.cell_of[t];
    let pairs = partition.revealed[cell].iter().copied().filter(|&(h, _)| tracked[h]).collect();
    (tree.payoffs(tree.terminals()[t])[role].to_bits(), pairs)
}

fn walk(tree: &GameTree, profile: &[PureStrategy], mut v: usize) -> usize {
    loop {
        match &tree.node(v).kind {
            NodeKind::Terminal { .. } => return tree.terminal_pos(v).expect("terminal"),
            NodeKind::Decision { owner, infoset, children } => {
                v = children[profile[*owner].choice[tree.infoset_pos(*infoset)]];
            }
        }
    }
}

/// Opponent sets where a unilateral change of action can change `key` of the outcome.
fn influential<K: PartialEq>(game: &Game, role: Role, key: &dyn Fn(usize) -> K) -> Vec<bool> {
    let tree = &game.tree;
    let mut out = vec![false; tree.infosets().len()];
    let total: u128 = (0..tree.players()).map(|r| tree.strategy_count(r)).product();
    if total > PROFILE_ENUMERATION_LIMIT {
        // Coarse: any node of the set with differing keys below it.
        for (h, info) in tree.infosets().iter().enumerate() {
            if info.owner == role {
                continue;
            }
            out[h] = info.nodes.iter().any(|&v| {
                let ts: Vec<usize> = (0..tree.terminals().len())
                    .filter(|&t| {
                        let mut u = tree.terminals()[t];
                        loop {
                            if u == v {
                                return true;
                            }
                            match tree.node(u).parent {
                                Some(p) => u = p,
                                None => return false,
                            }
                        }
                    })
                    .collect();
                ts.iter().any(|&t| key(t) != key(ts[0]))
            });
        }
        return out;
    }
    let per_role: Vec<Vec<PureStrategy>> = (0..tree.players()).map(|r| PureStrategy::enumerate(tree, r)).collect();
    let mut idx = vec![0usize; tree.players()];
    loop {
        let profile: Vec<PureStrategy> = idx.iter().enumerate().map(|(r, &k)| per_role[r][k].clone()).collect();
        let mut v = tree.root();
        while let NodeKind::Decision { owner, infoset, children } = &tree.node(v).kind {
            let chosen = profile[*owner].choice[tree.infoset_pos(*infoset)];
            if *owner != role && !out[*infoset] {
                let base = key(walk(tree, &profile, children[chosen]));
                if children.iter().enumerate().any(|(b, &c)| b != chosen && key(walk(tree, &profile, c)) != base) {
                    out[*infoset] = true;
                }
            }
            v = children[chosen];
        }
        let mut r = 0;
        loop {
            if r == idx.len() {
                return out;
            }
            idx[r] += 1;
            if idx[r] < per_role[r].len() {
                break;
            }
            idx[r] = 0;
            r += 1;
        }
    }
}

/// Opponent sets whose counts can affect the role's predicted payoffs or tracked observations.
///
/// Starts from the sets that move the role's payoff and closes under "moves what a tracked
/// observation reveals". The rest keep their prior mean forever, which is exact because their
/// posterior never feeds back into a decision.
pub fn tracked_sets(game: &Game, role: Role) -> Vec<InfoSetId> {
    let tree = &game.tree;
    let mut tracked = vec![false; tree.infosets().len()];
    loop {
        let snapshot = tracked.clone();
        let found = influential(game, role, &|t| x_of(tree, game, role, &snapshot, t));
        let next: Vec<bool> = found.iter().zip(&tracked).map(|(a, b)| *a || *b).collect();
        if next == tracked {
            break;
        }
        tracked = next;
    }
    let mut sets: Vec<InfoSetId> = (0..tracked.len()).filter(|&h| tracked[h]).collect();
    sets.sort_by_key(|&h| (tree.infoset(h).owner, tree.infoset_pos(h)));
    sets
}

impl BeliefModel {
    /// Builds the model and enumerates every state reachable from the empty history.
    pub fn build(game: &Game, prior: &DirichletPrior, cap: u32, max_states: usize) -> Result<Self, PolicyError> {
        let tree = &game.tree;
        let role = prior.role;
        prior.check(tree)?;
        if cap == 0 || cap > u8::MAX as u32 {
            return Err(PolicyError::BadArgument(format!("count cap {cap} must lie in 1..=255")));
        }
        let tracked = tracked_sets(game, role);
        let mut slots = Vec::new();
        let mut slot_set = Vec::new();
        let mut set_slots = Vec::new();
        let mut slot_infoset = Vec::new();
        let mut weight = Vec::new();
        let mut set_weight = Vec::new();
        let mut slot_of: HashMap<(InfoSetId, usize), u8> = HashMap::new();
        for (k, &h) in tracked.iter().enumerate() {
            let info = tree.infoset(h);
            let start = slots.len();
            for (a, name) in info.actions.iter().enumerate() {
                slot_of.insert((h, a), slots.len() as u8);
                slots.push(Slot { infoset: info.id.clone(), action: name.clone() });
                slot_set.push(k);
                slot_infoset.push((h, a));
                weight.push(prior.weights[h][a]);
            }
            set_slots.push((start, slots.len()));
            set_weight.push(prior.weights[h].iter().sum());
        }
        if slots.len() > MAX_SLOTS {
            return Err(PolicyError::TooManySlots { slots: slots.len(), limit: MAX_SLOTS });
        }
        let set_owner = tracked.iter().map(|&h| tree.infoset(h).owner).collect();

        let strategies = PureStrategy::enumerate(tree, role);
        let partition = game.partition(role);
        let mut classes = Vec::with_capacity(strategies.len());
        for s in &strategies {
            let mut rows: Vec<(f64, Vec<u8>, usize, Term)> = Vec::new();
            for t in 0..tree.terminals().len() {
                let path = tree.path_pairs(t);
                let consistent = path
                    .iter()
                    .all(|&(h, a)| tree.infoset(h).owner != role || s.choice[tree.infoset_pos(h)] == a);
                if !consistent {
                    continue;
                }
                let pairs: Vec<(InfoSetId, usize)> =
                    path.iter().copied().filter(|&(h, _)| tree.infoset(h).owner != role).collect();
                let mut constant = 1.0;
                let mut on_path = Vec::new();
                for &(h, a) in &pairs {
                    match slot_of.get(&(h, a)) {
                        Some(&k) => on_path.push(k),
                        None => constant *= prior.mean(h)[a],
                    }
                }
                let cell = partition.cell_of[t];
                let mut reveals: Vec<u8> =
                    partition.revealed[cell].iter().filter_map(|p| slot_of.get(p).copied()).collect();
                reveals.sort_unstable();
                let payoff = tree.payoffs(tree.terminals()[t])[role];
                rows.push((payoff, reveals, t, Term { constant, slots: on_path, pairs }));
            }
            rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut list: Vec<ObsClass> = Vec::new();
            for (payoff, reveals, t, term) in rows {
                match list.last_mut() {
                    Some(c) if c.payoff.to_bits() == payoff.to_bits() && c.reveals == reveals => {
                        c.terminals.push(t);
                        c.terms.push(term);
                    }
                    _ => list.push(ObsClass { payoff, reveals, terminals: vec![t], terms: vec![term] }),
                }
            }
            classes.push(list);
        }
        let mut offsets = Vec::with_capacity(classes.len());
        let mut width = 0;
        for c in &classes {
            offsets.push(width);
            width += c.len();
        }

        let mut model = BeliefModel {
            role,
            cap,
            tracked,
            slots,
            slot_set,
            set_slots,
            set_owner,
            slot_infoset,
            weight,
            set_weight,
            strategies,
            classes,
            offsets,
            width,
            states: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
        };
        model.explore(max_states)?;
        Ok(model)
    }

    fn count(key: u128, slot: usize) -> u32 {
        ((key >> (8 * slot)) & 0xff) as u32
    }

    fn set_total(&self, key: u128, set: usize) -> u32 {
        let (a, b) = self.set_slots[set];
        (a..b).map(|k| Self::count(key, k)).sum()
    }

    /// Total number of recorded observations in a state.
    pub fn total(&self, key: u128) -> u32 {
        (0..self.slots.len()).map(|k| Self::count(key, k)).sum()
    }

    fn step(&self, key: u128, reveals: &[u8]) -> u128 {
        let mut next = key;
        let mut blocked: Vec<Role> = Vec::new();
        for &k in reveals {
            let set = self.slot_set[k as usize];
            if self.set_total(key, set) >= self.cap {
                blocked.push(self.set_owner[set]);
            }
        }
        for &k in reveals {
            if !blocked.contains(&self.set_owner[self.slot_set[k as usize]]) {
                next += 1u128 << (8 * k);
            }
        }
        next
    }

    fn explore(&mut self, max_states: usize) -> Result<(), PolicyError> {
        let mut queue = VecDeque::new();
        self.index.insert(0, 0);
        self.states.push(0);
        queue.push_back(0u128);
        while let Some(key) = queue.pop_front() {
            for s in 0..self.classes.len() {
                for c in 0..self.classes[s].len() {
                    let next = self.step(key, &self.classes[s][c].reveals);
                    let id = match self.index.get(&next) {
                        Some(&id) => id,
                        None => {
                            let id = self.states.len() as u32;
                            if self.states.len() >= max_states {
                                return Err(PolicyError::StateBudget {
                                    limit: max_states,
                                    cap: self.cap,
                                    slots: self.slots.len(),
                                });
                            }
                            self.index.insert(next, id);
                            self.states.push(next);
                            queue.push_back(next);
                            id
                        }
                    };
                    self.succ.push(id);
                }
            }
        }
        Ok(())
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn successor(&self, state: usize, strategy: usize, class: usize) -> usize {
        self.succ[state * self.width + self.offsets[strategy] + class] as usize
    }

    /// Posterior means of every slot at a state.
    pub fn means(&self, key: u128, out: &mut Vec<f64>) {
        out.clear();
        for k in 0..self.slots.len() {
            let set = self.slot_set[k];
            let n = f64::from(self.set_total(key, set));
            out.push((self.weight[k] + f64::from(Self::count(key, k))) / (self.set_weight[set] + n));
        }
    }

    /// Posterior-predictive probability of each class of `strategy`.
    pub fn predictive(&self, means: &[f64], strategy: usize, out: &mut Vec<f64>) {
        out.clear();
        for class in &self.classes[strategy] {
            let p = class
                .terms
                .iter()
                .map(|t| t.constant * t.slots.iter().map(|&k| means[k as usize]).product::<f64>())
                .sum();
            out.push(p);
        }
    }

    /// Class probabilities of `strategy` when opponents play `profile`.
    pub fn true_class_probs(&self, profile: &BehaviorProfile, strategy: usize) -> Vec<f64> {
        self.classes[strategy]
            .iter()
            .map(|c| c.terms.iter().map(|t| t.pairs.iter().map(|&(h, a)| profile.prob(h, a)).product::<f64>()).sum())
            .collect()
    }

    pub fn state_index(&self, key: u128) -> Option<usize> {
        self.index.get(&key).map(|&i| i as usize)
    }

    /// Packs the tracked counts of a belief state; `None` if some count exceeds the cap.
    pub fn key_of(&self, state: &CountState) -> Option<u128> {
        let mut key = 0u128;
        for (k, &(h, a)) in self.slot_infoset.iter().enumerate() {
            let c = *state.counts.get(h)?.get(a)?;
            if c > self.cap {
                return None;
            }
            key |= u128::from(c) << (8 * k);
        }
        Some(key)
    }

    /// Tracked counts of a state, by slot.
    pub fn counts(&self, key: u128) -> Vec<u32> {
        (0..self.slots.len()).map(|k| Self::count(key, k)).collect()
    }

    pub fn key_from_counts(&self, counts: &[u32]) -> u128 {
        counts.iter().enumerate().fold(0u128, |key, (k, &c)| key | (u128::from(c) << (8 * k)))
    }

    /// Expands a state into a full count state (untracked sets stay at zero).
    pub fn count_state(&self, tree: &GameTree, key: u128) -> CountState {
        let mut s = CountState::empty(tree, self.role);
        for (k, &(h, a)) in self.slot_infoset.iter().enumerate() {
            s.counts[h][a] = Self::count(key, k);
        }
        s
    }
}
