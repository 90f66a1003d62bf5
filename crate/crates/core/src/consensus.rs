//! Consensus rankings that minimise violated precedence pairs (weighted Kemeny).
//!
//! [`dcon`] is an exact depth-first branch-and-bound, [`ncon`] a best-improvement
//! insertion local search with seeded restarts. Both consume strict pairs only.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefs::PreferencePair;
use crate::ranking::{RankedPaper, RankingResult, SolverStatus};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConsensusConfig {
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
    /// Number of starts for the local search (the first is the net-wins order).
    pub restarts: usize,
    pub seed: u64,
    /// Optional cap on branch-and-bound nodes, for reproducible early stops.
    pub node_limit: Option<u64>,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            time_budget: 300.0,
            restarts: 10,
            seed: 0,
            node_limit: None,
        }
    }
}

impl ConsensusConfig {
    pub fn unlimited() -> Self {
        ConsensusConfig {
            time_budget: f64::INFINITY,
            ..Default::default()
        }
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        if self.time_budget.is_finite() {
            start.checked_add(Duration::from_secs_f64(self.time_budget.max(0.0)))
        } else {
            None
        }
    }
}

/// `counts[a][b]` = number of strict pairs asserting `a ≻ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationMatrix {
    ids: Vec<String>,
    counts: Vec<u32>,
}

impl ViolationMatrix {
    /// Builds the matrix over the papers mentioned by `pairs`, sorted by id.
    pub fn from_pairs(pairs: &[PreferencePair]) -> Result<Self> {
        let mut index = BTreeMap::new();
        for p in pairs {
            if p.is_tie() {
                return Err(Error::Config(
                    "consensus rankers take strict pairs only; drop ties first".into(),
                ));
            }
            if p.better == p.worse {
                return Err(Error::Validation(format!("pair compares `{}` with itself", p.better)));
            }
            index.entry(p.better.as_str()).or_insert(0);
            index.entry(p.worse.as_str()).or_insert(0);
        }
        for (i, v) in index.values_mut().enumerate() {
            *v = i;
        }
        let n = index.len();
        let mut counts = vec![0u32; n * n];
        for p in pairs {
            counts[index[p.better.as_str()] * n + index[p.worse.as_str()]] += 1;
        }
        let ids = index.into_keys().map(str::to_string).collect();
        Ok(ViolationMatrix { ids, counts })
    }

    pub fn from_counts(ids: Vec<String>, counts: Vec<u32>) -> Result<Self> {
        let n = ids.len();
        if counts.len() != n * n {
            return Err(Error::Validation("count matrix is not square".into()));
        }
        if (0..n).any(|i| counts[i * n + i] != 0) {
            return Err(Error::Validation("count matrix has a non-zero diagonal".into()));
        }
        Ok(ViolationMatrix { ids, counts })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.counts[a * self.ids.len() + b]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Wins minus losses per item.
    pub fn net_wins(&self) -> Vec<i64> {
        let n = self.len();
        (0..n)
            .map(|a| (0..n).map(|b| self.get(a, b) as i64 - self.get(b, a) as i64).sum())
            .collect()
    }

    /// Items by descending net wins, ties by index.
    fn net_wins_order(&self) -> Vec<usize> {
        let net = self.net_wins();
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| net[b].cmp(&net[a]).then(a.cmp(&b)));
        order
    }

    /// Violated pair count of an order given as item indices, best first.
    pub fn violations_of(&self, order: &[usize]) -> u64 {
        let mut total = 0u64;
        for (i, &above) in order.iter().enumerate() {
            for &below in &order[i + 1..] {
                total += self.get(below, above) as u64;
            }
        }
        total
    }
}

/// Number of strict pairs `a ≻ b` where `a` is ranked below `b` in `order`.
pub fn violations(order: &[&str], vm: &ViolationMatrix) -> Result<u64> {
    let index: BTreeMap<&str, usize> = vm
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    if order.len() != vm.len() {
        return Err(Error::Validation(format!(
            "order has {} papers, matrix has {}",
            order.len(),
            vm.len()
        )));
    }
    let mut seen = vec![false; vm.len()];
    let mut idx = Vec::with_capacity(order.len());
    for id in order {
        let &i = index
            .get(id)
            .ok_or_else(|| Error::Validation(format!("order mentions unknown paper `{id}`")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Validation(format!("order lists `{id}` twice")));
        }
        idx.push(i);
    }
    Ok(vm.violations_of(&idx))
}

/// Outcome of the branch-and-bound search.
#[derive(Debug, Clone, PartialEq)]
pub struct DconOutcome {
    pub result: RankingResult,
    pub status: SolverStatus,
    pub violations: u64,
    pub nodes: u64,
}

/// Exact consensus ranking by depth-first branch and bound.
///
/// A node's bound is the violations committed by its prefix plus, for every
/// undecided pair, the smaller of the two directed counts. The net-wins
/// insertion local optimum seeds the incumbent.
pub fn dcon(papers: &[String], pairs: &[PreferencePair], cfg: &ConsensusConfig) -> Result<DconOutcome> {
    let vm = ViolationMatrix::from_pairs(pairs)?;
    let start = Instant::now();
    let n = vm.len();

    let (seed_order, _) = insertion_search(&vm, vm.net_wins_order());
    let mut search = BranchAndBound {
        vm: &vm,
        order: vm.net_wins_order(),
        best: vm.violations_of(&seed_order),
        best_order: seed_order,
        prefix: Vec::with_capacity(n),
        remaining: vec![true; n],
        place_cost: (0..n)
            .map(|c| (0..n).map(|r| vm.get(r, c) as u64).sum())
            .collect(),
        nodes: 0,
        deadline: cfg.deadline(start),
        node_limit: cfg.node_limit,
        exhausted: false,
    };
    let pair_min: u64 = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .map(|(a, b)| vm.get(a, b).min(vm.get(b, a)) as u64)
        .sum();
    search.descend(0, pair_min);

    let status = if search.exhausted {
        SolverStatus::BudgetExhausted
    } else {
        SolverStatus::Optimal
    };
    log::debug!(
        "dcon: {} items, {} nodes, {} violations, {status}",
        n,
        search.nodes,
        search.best
    );
    let violations = search.best;
    let nodes = search.nodes;
    let config = serde_json::json!({ "consensus": cfg, "nodes": nodes });
    let result = consensus_result("DCON", papers, &vm, &search.best_order, status, config)?;
    Ok(DconOutcome {
        result,
        status,
        violations,
        nodes,
    })
}

struct BranchAndBound<'a> {
    vm: &'a ViolationMatrix,
    order: Vec<usize>,
    best: u64,
    best_order: Vec<usize>,
    prefix: Vec<usize>,
    remaining: Vec<bool>,
    /// Violations incurred by placing item `c` next: Σ over remaining r ≠ c of counts[r][c].
    place_cost: Vec<u64>,
    nodes: u64,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    exhausted: bool,
}

impl BranchAndBound<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.exhausted {
            return true;
        }
        if self.node_limit.is_some_and(|limit| self.nodes >= limit) {
            self.exhausted = true;
        } else if self.nodes % 1024 == 0 {
            if let Some(deadline) = self.deadline {
                self.exhausted = Instant::now() >= deadline;
            }
        }
        self.exhausted
    }

    /// `undecided` is Σ min(counts[a][b], counts[b][a]) over pairs of remaining items.
    fn descend(&mut self, committed: u64, undecided: u64) {
        self.nodes += 1;
        if self.out_of_budget() {
            return;
        }
        let n = self.vm.len();
        if self.prefix.len() == n {
            if committed < self.best {
                self.best = committed;
                self.best_order.clone_from(&self.prefix);
            }
            return;
        }
        if committed + undecided >= self.best {
            return;
        }
        for k in 0..n {
            let c = self.order[k];
            if !self.remaining[c] {
                continue;
            }
            let cost = committed + self.place_cost[c];
            let released: u64 = (0..n)
                .filter(|&r| r != c && self.remaining[r])
                .map(|r| self.vm.get(c, r).min(self.vm.get(r, c)) as u64)
                .sum();
            let rest = undecided - released;
            if cost + rest >= self.best {
                continue;
            }
            self.remaining[c] = false;
            self.prefix.push(c);
            for r in 0..n {
                self.place_cost[r] -= self.vm.get(c, r) as u64;
            }
            self.descend(cost, rest);
            for r in 0..n {
                self.place_cost[r] += self.vm.get(c, r) as u64;
            }
            self.prefix.pop();
            self.remaining[c] = true;
            if self.exhausted {
                return;
            }
        }
    }
}

/// Best-improvement single-item insertion search from `start`.
///
/// Returns the local optimum and the violation count after every move,
/// starting with the initial order.
pub fn insertion_search(vm: &ViolationMatrix, start: Vec<usize>) -> (Vec<usize>, Vec<u64>) {
    let mut order = start;
    let n = order.len();
    let mut current = vm.violations_of(&order);
    let mut trace = vec![current];
    loop {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..n {
            let x = order[i];
            let mut delta = 0i64;
            for j in (0..i).rev() {
                let y = order[j];
                delta += vm.get(y, x) as i64 - vm.get(x, y) as i64;
                if delta < best.map_or(0, |b| b.0) {
                    best = Some((delta, i, j));
                }
            }
            let mut delta = 0i64;
            for (j, &y) in order.iter().enumerate().skip(i + 1) {
                delta += vm.get(x, y) as i64 - vm.get(y, x) as i64;
                if delta < best.map_or(0, |b| b.0) {
                    best = Some((delta, i, j));
                }
            }
        }
        let Some((delta, from, to)) = best else {
            break;
        };
        let x = order.remove(from);
        order.insert(to, x);
        current = (current as i64 + delta) as u64;
        trace.push(current);
    }
    (order, trace)
}

/// Consensus ranking by insertion local search with seeded random restarts.
pub fn ncon(papers: &[String], pairs: &[PreferencePair], cfg: &ConsensusConfig) -> Result<RankingResult> {
    let vm = ViolationMatrix::from_pairs(pairs)?;
    let start = Instant::now();
    let deadline = cfg.deadline(start);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (mut best_order, trace) = insertion_search(&vm, vm.net_wins_order());
    let mut best = *trace.last().unwrap();
    for _ in 1..cfg.restarts.max(1) {
        if best == 0 || deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let mut init: Vec<usize> = (0..vm.len()).collect();
        init.shuffle(&mut rng);
        let (order, trace) = insertion_search(&vm, init);
        let v = *trace.last().unwrap();
        if v < best {
            best = v;
            best_order = order;
        }
    }
    let config = serde_json::json!({ "consensus": cfg, "violations": best });
    consensus_result("NCON", papers, &vm, &best_order, SolverStatus::LocalOptimum, config)
}

/// Ranked items first, then papers that no pair mentions, by id.
fn consensus_result(
    method: &str,
    papers: &[String],
    vm: &ViolationMatrix,
    order: &[usize],
    status: SolverStatus,
    config: serde_json::Value,
) -> Result<RankingResult> {
    let mut all: Vec<&str> = papers.iter().map(String::as_str).collect();
    all.sort_unstable();
    all.dedup();
    if let Some(id) = vm.ids.iter().find(|id| all.binary_search(&id.as_str()).is_err()) {
        return Err(Error::unknown_paper(id));
    }
    let compared: Vec<&str> = order.iter().map(|&i| vm.ids[i].as_str()).collect();
    let uncompared = all.iter().filter(|id| vm.ids.binary_search_by(|x| x.as_str().cmp(id)).is_err());
    let total = all.len();
    let entries = compared
        .iter()
        .map(|id| (id, true))
        .chain(uncompared.map(|id| (id, false)))
        .enumerate()
        .map(|(i, (id, compared))| RankedPaper {
            paper_id: id.to_string(),
            utility: (total - i) as f64,
            rank: i + 1,
            compared,
        })
        .collect();
    Ok(RankingResult {
        method: method.to_string(),
        entries,
        status: Some(status),
        config,
    })
}
