use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::policy::{Policy, PolicyKind};
use super::task::Task;
use crate::error::{Error, Result};
use crate::metrics::{validate_cluster, ServerSpec, UtilizationSample, WeightTriple};

/// Slack allowed when checking recorded utilizations against capacity.
const CAPACITY_SLACK: f64 = 1e-9;

/// Relative margin under which two candidate scores count as tied.
const TIE_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskCounters {
    pub arrived: u64,
    /// Tasks placed on a server, counted once each (migrations excluded).
    pub dispatched: u64,
    pub completed: u64,
    pub migrations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Migration {
    pub tick: usize,
    pub task_id: u64,
    pub from: u32,
    pub to: u32,
    pub max_sil_before: f64,
    pub max_sil_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Running {
    task: Task,
    remaining: u32,
}

/// Servers, their running tasks, the admission queue and the recent
/// utilization history.
///
/// Servers are kept sorted by id, so "lowest id" and "first index" coincide.
#[derive(Debug, Clone)]
pub struct ClusterState {
    specs: Vec<ServerSpec>,
    capacity: Vec<[f64; 3]>,
    capacity_total: [f64; 3],
    running: Vec<Vec<Running>>,
    /// Summed raw demand per server and resource.
    demand: Vec<[f64; 3]>,
    /// Migration traffic charged to each server's network for this tick.
    net_charge: Vec<f64>,
    queue: VecDeque<Task>,
    history: Vec<VecDeque<UtilizationSample>>,
    window: usize,
    tick: usize,
    round_robin_last: Option<usize>,
    counters: TaskCounters,
}

impl ClusterState {
    /// An idle cluster keeping `window` ticks of utilization history.
    pub fn new(mut specs: Vec<ServerSpec>, window: usize) -> Result<Self> {
        validate_cluster(&specs)?;
        if window == 0 {
            return Err(Error::validation("window must be positive"));
        }
        specs.sort_by_key(|s| s.id);
        let capacity: Vec<[f64; 3]> = specs
            .iter()
            .map(|s| [f64::from(s.cpu_count), s.ram_capacity, s.net_capacity])
            .collect();
        let mut capacity_total = [0.0; 3];
        for c in &capacity {
            for r in 0..3 {
                capacity_total[r] += c[r];
            }
        }
        let n = specs.len();
        Ok(ClusterState {
            specs,
            capacity,
            capacity_total,
            running: vec![Vec::new(); n],
            demand: vec![[0.0; 3]; n],
            net_charge: vec![0.0; n],
            queue: VecDeque::new(),
            history: vec![VecDeque::with_capacity(window); n],
            window,
            tick: 0,
            round_robin_last: None,
            counters: TaskCounters::default(),
        })
    }

    pub fn specs(&self) -> &[ServerSpec] {
        &self.specs
    }

    /// Number of completed steps.
    pub fn tick(&self) -> usize {
        self.tick
    }

    pub fn counters(&self) -> TaskCounters {
        self.counters
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn running_count(&self) -> usize {
        self.running.iter().map(Vec::len).sum()
    }

    /// Ids of the tasks running on the server at `index`.
    pub fn running_ids(&self, index: usize) -> Vec<u64> {
        self.running[index].iter().map(|r| r.task.id).collect()
    }

    /// The last `window` recorded utilizations of the server at `index`,
    /// oldest first.
    pub fn history(&self, index: usize) -> &VecDeque<UtilizationSample> {
        &self.history[index]
    }

    fn index_of(&self, id: u32) -> usize {
        self.specs
            .binary_search_by_key(&id, |s| s.id)
            .expect("ids come from this cluster")
    }

    fn util_of(&self, i: usize) -> [f64; 3] {
        let d = &self.demand[i];
        let c = &self.capacity[i];
        [d[0] / c[0], d[1] / c[1], (d[2] + self.net_charge[i]) / c[2]]
    }

    fn utils(&self) -> Vec<[f64; 3]> {
        (0..self.specs.len()).map(|i| self.util_of(i)).collect()
    }

    /// Instantaneous utilization of every server, in id order.
    pub fn utilizations(&self) -> Vec<UtilizationSample> {
        self.utils()
            .into_iter()
            .map(|[c, r, n]| UtilizationSample::new(c, r, n))
            .collect()
    }

    /// Instantaneous `SIL_i` of every server against the capacity-weighted
    /// instantaneous system averages.
    pub fn instantaneous_sil(&self, w: &WeightTriple) -> Vec<f64> {
        self.sils_for(&self.utils(), w)
    }

    fn sils_for(&self, utils: &[[f64; 3]], w: &WeightTriple) -> Vec<f64> {
        let mut avg = [0.0; 3];
        for (u, c) in utils.iter().zip(&self.capacity) {
            for r in 0..3 {
                avg[r] += u[r] * c[r];
            }
        }
        for (a, total) in avg.iter_mut().zip(&self.capacity_total) {
            *a /= total;
        }
        utils
            .iter()
            .map(|u| {
                w.a * (u[0] - avg[0]).powi(2)
                    + w.b * (u[1] - avg[1]).powi(2)
                    + w.c * (u[2] - avg[2]).powi(2)
            })
            .collect()
    }

    fn task_util(&self, task: &Task, i: usize) -> [f64; 3] {
        let c = &self.capacity[i];
        [
            task.cpu_demand / c[0],
            task.ram_demand / c[1],
            task.net_demand / c[2],
        ]
    }

    /// Whether `task` fits on the server at `index` without pushing any
    /// resource above capacity. `extra_net` is additional network demand
    /// charged alongside the task.
    fn fits(&self, task: &Task, index: usize, extra_net: f64) -> bool {
        let d = &self.demand[index];
        let c = &self.capacity[index];
        d[0] + task.cpu_demand <= c[0]
            && d[1] + task.ram_demand <= c[1]
            && d[2] + self.net_charge[index] + task.net_demand + extra_net <= c[2]
    }

    /// Whether the server with `id` can admit `task` right now.
    pub fn can_admit(&self, task: &Task, id: u32) -> bool {
        self.fits(task, self.index_of(id), 0.0)
    }

    /// The server `policy` would place `task` on, or `None` when no server
    /// can admit it. Ties go to the lowest id.
    pub fn choose_server(&self, task: &Task, policy: &Policy) -> Option<u32> {
        self.choose_index(task, policy).map(|i| self.specs[i].id)
    }

    fn choose_index(&self, task: &Task, policy: &Policy) -> Option<usize> {
        let n = self.specs.len();
        let admissible = |i: &usize| self.fits(task, *i, 0.0);
        let w = &policy.weights;
        match policy.kind {
            PolicyKind::RoundRobin => {
                let start = self.round_robin_last.map_or(0, |last| last + 1);
                (0..n).map(|k| (start + k) % n).find(admissible)
            }
            PolicyKind::LeastComposite | PolicyKind::ThresholdMigration => {
                argmin((0..n).filter(admissible).map(|i| {
                    let [c, r, net] = self.util_of(i);
                    (i, w.composite(c, r, net))
                }))
            }
            PolicyKind::LeastSil => {
                let base = self.utils();
                argmin((0..n).filter(admissible).map(|i| {
                    let mut utils = base.clone();
                    let add = self.task_util(task, i);
                    for r in 0..3 {
                        utils[i][r] += add[r];
                    }
                    let sils = self.sils_for(&utils, w);
                    (i, sils.iter().sum::<f64>() / n as f64)
                }))
            }
        }
    }

    fn place(&mut self, task: Task, index: usize) {
        let d = &mut self.demand[index];
        d[0] += task.cpu_demand;
        d[1] += task.ram_demand;
        d[2] += task.net_demand;
        let remaining = task.duration;
        self.running[index].push(Running { task, remaining });
    }

    fn assign(&mut self, task: Task, index: usize, policy: &Policy) {
        if policy.kind == PolicyKind::RoundRobin {
            self.round_robin_last = Some(index);
        }
        self.place(task, index);
        self.counters.dispatched += 1;
    }

    /// Places `task` according to `policy`, returning the chosen server id,
    /// or queues it when no server can admit it.
    pub fn dispatch(&mut self, task: Task, policy: &Policy) -> Option<u32> {
        match self.choose_index(&task, policy) {
            Some(i) => {
                self.assign(task, i, policy);
                Some(self.specs[i].id)
            }
            None => {
                self.queue.push_back(task);
                None
            }
        }
    }

    /// Utilizations after moving `task` from `source` to `target`, with the
    /// move's network charge on both.
    fn after_move(
        &self,
        utils: &[[f64; 3]],
        task: &Task,
        source: usize,
        target: usize,
    ) -> Vec<[f64; 3]> {
        let mut after = utils.to_vec();
        let from = self.task_util(task, source);
        let to = self.task_util(task, target);
        // the source keeps carrying the task's traffic this tick
        after[source][0] -= from[0];
        after[source][1] -= from[1];
        after[target][0] += to[0];
        after[target][1] += to[1];
        after[target][2] += 2.0 * to[2];
        after
    }

    /// Moves tasks off the most imbalanced server while the largest `SIL_i`
    /// exceeds the policy threshold and a single move strictly lowers it.
    ///
    /// The source is the highest-`SIL_i` server whose composite load is at
    /// or above the cluster mean and that runs at least one task; its
    /// smallest task (by composite demand) goes to the server that minimizes
    /// the largest `SIL_i` after the move. Each move charges the task's
    /// network demand to both servers for the current tick.
    pub fn rebalance(&mut self, policy: &Policy) -> Vec<Migration> {
        let mut moves = Vec::new();
        if policy.kind != PolicyKind::ThresholdMigration || self.specs.len() < 2 {
            return moves;
        }
        let w = policy.weights;
        let n = self.specs.len();
        for _ in 0..self.running_count() {
            let utils = self.utils();
            let sils = self.sils_for(&utils, &w);
            let max_before = sils.iter().cloned().fold(0.0, f64::max);
            if max_before <= policy.migration_threshold {
                break;
            }
            let composite: Vec<f64> = utils
                .iter()
                .map(|u| w.composite(u[0], u[1], u[2]))
                .collect();
            let mean_composite = composite.iter().sum::<f64>() / n as f64;
            let source = argmax(
                (0..n)
                    .filter(|&i| !self.running[i].is_empty() && composite[i] >= mean_composite)
                    .map(|i| (i, sils[i])),
            );
            let Some(source) = source else { break };
            let pick = argmin(
                self.running[source]
                    .iter()
                    .enumerate()
                    .map(|(k, r)| (k, r.task.composite_on(&self.specs[source], &w))),
            )
            .expect("source runs a task");
            let task = &self.running[source][pick].task;

            let best = argmin_with_score(
                (0..n)
                    .filter(|&j| j != source && self.fits(task, j, task.net_demand))
                    .map(|j| {
                        let after = self.after_move(&utils, task, source, j);
                        (j, self.sils_for(&after, &w).into_iter().fold(0.0, f64::max))
                    }),
            );
            let Some((target, max_after)) = best else {
                break;
            };
            if !(max_after < max_before) {
                break;
            }

            let moved = self.running[source].swap_remove(pick);
            let net = moved.task.net_demand;
            let d = &mut self.demand[source];
            d[0] -= moved.task.cpu_demand;
            d[1] -= moved.task.ram_demand;
            d[2] -= net;
            self.net_charge[source] += net;
            self.net_charge[target] += net;
            let d = &mut self.demand[target];
            d[0] += moved.task.cpu_demand;
            d[1] += moved.task.ram_demand;
            d[2] += net;
            moves.push(Migration {
                tick: self.tick,
                task_id: moved.task.id,
                from: self.specs[source].id,
                to: self.specs[target].id,
                max_sil_before: max_before,
                max_sil_after: max_after,
            });
            self.running[target].push(moved);
            self.counters.migrations += 1;
        }
        moves
    }

    /// Advances one tick: queued tasks and then `arrivals` are dispatched,
    /// the policy's rebalancing runs, utilizations are recorded, and tasks
    /// whose duration has elapsed leave.
    ///
    /// A task dispatched at tick `t` with duration `d` is counted in the
    /// utilization of ticks `t..t + d`. The queue is strictly FIFO: draining
    /// stops at the first queued task no server can admit, and arrivals join
    /// the back of a non-empty queue.
    pub fn step(&mut self, arrivals: Vec<Task>, policy: &Policy) -> Result<Vec<Migration>> {
        self.net_charge.iter_mut().for_each(|c| *c = 0.0);
        self.counters.arrived += arrivals.len() as u64;

        while let Some(task) = self.queue.pop_front() {
            if let Some(i) = self.choose_index(&task, policy) {
                self.assign(task, i, policy);
            } else {
                self.queue.push_front(task);
                break;
            }
        }
        for task in arrivals {
            if self.queue.is_empty() {
                self.dispatch(task, policy);
            } else {
                self.queue.push_back(task);
            }
        }
        let moves = self.rebalance(policy);

        for (i, u) in self.utils().into_iter().enumerate() {
            if u.iter().any(|v| *v > 1.0 + CAPACITY_SLACK) {
                return Err(Error::Internal(format!(
                    "server {} exceeds capacity at tick {}: {u:?}",
                    self.specs[i].id, self.tick
                )));
            }
            let h = &mut self.history[i];
            if h.len() == self.window {
                h.pop_front();
            }
            h.push_back(UtilizationSample::new(
                u[0].clamp(0.0, 1.0),
                u[1].clamp(0.0, 1.0),
                u[2].clamp(0.0, 1.0),
            ));
        }

        for i in 0..self.specs.len() {
            let before = self.running[i].len();
            self.running[i].retain_mut(|r| {
                r.remaining -= 1;
                r.remaining > 0
            });
            let finished = before - self.running[i].len();
            if finished > 0 {
                self.counters.completed += finished as u64;
                // recompute from scratch so rounding does not accumulate
                let mut d = [0.0; 3];
                for r in &self.running[i] {
                    d[0] += r.task.cpu_demand;
                    d[1] += r.task.ram_demand;
                    d[2] += r.task.net_demand;
                }
                self.demand[i] = d;
            }
        }
        self.tick += 1;
        Ok(moves)
    }
}

/// Index and score of the smallest score; near-ties keep the earlier index.
fn argmin_with_score(items: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in items {
        match best {
            Some((_, b)) if v >= b - TIE_MARGIN * b.abs().max(1.0) => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

fn argmin(items: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    argmin_with_score(items).map(|(i, _)| i)
}

fn argmax(items: impl Iterator<Item = (usize, f64)>) -> Option<usize> {
    argmin(items.map(|(i, v)| (i, -v)))
}
