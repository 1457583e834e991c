use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::Instant;

use crate::pddl::Plan;

use super::ground::GroundTask;
use super::heuristic::{HeuristicKind, Relaxation};
use super::{Outcome, PlanResult, SearchConfig, SearchStats, Strategy};

/// Finds the actions applicable in a state without scanning every action:
/// each action is filed under its first precondition fact.
struct Successors {
    by_trigger: Vec<Vec<u32>>,
    always: Vec<u32>,
}

impl Successors {
    fn new(t: &GroundTask) -> Self {
        let mut by_trigger = vec![Vec::new(); t.num_facts()];
        let mut always = Vec::new();
        for (i, a) in t.actions.iter().enumerate() {
            match a.pre.first() {
                Some(&f) => by_trigger[f as usize].push(i as u32),
                None => always.push(i as u32),
            }
        }
        Self { by_trigger, always }
    }

    fn applicable(&self, t: &GroundTask, bits: &[u64], out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self.always);
        for (w, &word) in bits.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let b = rest.trailing_zeros();
                rest &= rest - 1;
                let f = (w as u32) * 64 + b;
                for &a in &self.by_trigger[f as usize] {
                    if t.applicable(bits, &t.actions[a as usize]) {
                        out.push(a);
                    }
                }
            }
        }
        out.sort_unstable();
    }
}

struct Node {
    state: Box<[u64]>,
    parent: u32,
    action: u32,
    g: u32,
}

const ROOT: u32 = u32::MAX;

fn extract(t: &GroundTask, nodes: &[Node], mut id: u32) -> Plan {
    let mut steps = Vec::new();
    while nodes[id as usize].parent != ROOT {
        let n = &nodes[id as usize];
        steps.push(t.actions[n.action as usize].action.step());
        id = n.parent;
    }
    steps.reverse();
    Plan::new(steps)
}

/// Forward state-space search over a grounded task.
///
/// Ties between equally ranked open nodes are broken first-in first-out.
/// `bfs` ignores the heuristic except to prune relaxed dead ends.
pub fn search(t: &GroundTask, cfg: &SearchConfig) -> PlanResult {
    let start = Instant::now();
    let relax = Relaxation::new(t);
    let succ = Successors::new(t);
    let mut stats = SearchStats::default();
    let heuristic = match cfg.strategy {
        Strategy::Bfs => HeuristicKind::Blind,
        _ => cfg.heuristic,
    };

    let init: Box<[u64]> = t.init_bits().into_boxed_slice();
    let finish = |outcome: Outcome, mut stats: SearchStats| {
        stats.wall_ms = start.elapsed().as_millis() as u64;
        if let Outcome::Plan(p) = &outcome {
            stats.plan_length = Some(p.len());
        }
        PlanResult { outcome, stats }
    };

    let Some(h0) = relax.evaluate(heuristic, &init) else {
        return finish(Outcome::Unsolvable, stats);
    };

    let mut nodes: Vec<Node> = vec![Node {
        state: init.clone(),
        parent: ROOT,
        action: 0,
        g: 0,
    }];
    let mut seen: HashMap<Box<[u64]>, u32> = HashMap::new();
    seen.insert(init, 0);
    stats.generated = 1;

    // (primary key, insertion sequence, node); min-heap via Reverse
    let mut heap: BinaryHeap<Reverse<(u64, u64, u32)>> = BinaryHeap::new();
    let mut fifo: VecDeque<u32> = VecDeque::new();
    let mut seq: u64 = 0;
    let key = |g: u32, h: u32| -> u64 {
        match cfg.strategy {
            Strategy::Astar => g as u64 + h as u64,
            Strategy::Gbfs => h as u64,
            Strategy::Bfs => 0,
        }
    };
    match cfg.strategy {
        Strategy::Bfs => fifo.push_back(0),
        _ => heap.push(Reverse((key(0, h0), 0, 0))),
    }

    let mut buf = Vec::new();
    loop {
        let id = match cfg.strategy {
            Strategy::Bfs => match fifo.pop_front() {
                Some(id) => id,
                None => break,
            },
            _ => match heap.pop() {
                Some(Reverse((_, _, id))) => id,
                None => break,
            },
        };
        let (state, g) = {
            let n = &nodes[id as usize];
            (n.state.clone(), n.g)
        };
        // stale entry: a cheaper path to this state was found after pushing
        if seen.get(&state).copied() != Some(id) {
            continue;
        }
        if t.is_goal(&state) {
            return finish(Outcome::Plan(extract(t, &nodes, id)), stats);
        }
        if stats.expansions >= cfg.max_expansions {
            return finish(
                Outcome::ResourceLimit {
                    reason: format!("expansion limit {} reached", cfg.max_expansions),
                },
                stats,
            );
        }
        if stats.expansions % 256 == 0 && start.elapsed() >= cfg.time_limit() {
            return finish(
                Outcome::ResourceLimit {
                    reason: format!("time limit {}s reached", cfg.time_limit_secs),
                },
                stats,
            );
        }
        stats.expansions += 1;

        succ.applicable(t, &state, &mut buf);
        for &a in &buf {
            let next: Box<[u64]> = t.apply(&state, &t.actions[a as usize]).into_boxed_slice();
            let ng = g + 1;
            if let Some(&old) = seen.get(&next) {
                // only A* reopens, and only on strictly cheaper paths
                if cfg.strategy != Strategy::Astar || nodes[old as usize].g <= ng {
                    continue;
                }
            }
            let Some(h) = relax.evaluate(heuristic, &next) else {
                continue;
            };
            stats.generated += 1;
            let nid = nodes.len() as u32;
            nodes.push(Node {
                state: next.clone(),
                parent: id,
                action: a,
                g: ng,
            });
            seen.insert(next, nid);
            seq += 1;
            match cfg.strategy {
                Strategy::Bfs => fifo.push_back(nid),
                _ => heap.push(Reverse((key(ng, h), seq, nid))),
            }
        }
    }
    finish(Outcome::Unsolvable, stats)
}
