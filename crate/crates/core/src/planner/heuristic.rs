use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::ground::{test, FactId, GroundTask};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicKind {
    #[default]
    Hadd,
    Hmax,
    Blind,
}

const INF: u32 = u32::MAX;

/// Precomputed indices for evaluating delete-relaxation heuristics on one
/// task. Unit action costs.
#[derive(Debug)]
pub struct Relaxation<'t> {
    task: &'t GroundTask,
    /// fact -> actions having it as a precondition
    consumers: Vec<Vec<u32>>,
    pre_len: Vec<u32>,
    no_pre: Vec<u32>,
}

impl<'t> Relaxation<'t> {
    pub fn new(task: &'t GroundTask) -> Self {
        let mut consumers = vec![Vec::new(); task.num_facts()];
        let mut pre_len = Vec::with_capacity(task.actions.len());
        let mut no_pre = Vec::new();
        for (i, a) in task.actions.iter().enumerate() {
            for &f in &a.pre {
                consumers[f as usize].push(i as u32);
            }
            pre_len.push(a.pre.len() as u32);
            if a.pre.is_empty() {
                no_pre.push(i as u32);
            }
        }
        Self {
            task,
            consumers,
            pre_len,
            no_pre,
        }
    }

    /// Cost of each fact from `bits` under sum (`additive`) or max
    /// aggregation of precondition costs.
    pub fn fact_costs(&self, bits: &[u64], additive: bool) -> Vec<u32> {
        let t = self.task;
        let mut cost = vec![INF; t.num_facts()];
        let mut remaining = self.pre_len.clone();
        let mut acc = vec![0u32; t.actions.len()];
        let mut heap = BinaryHeap::new();
        for f in 0..t.num_facts() as FactId {
            if test(bits, f) {
                cost[f as usize] = 0;
                heap.push(Reverse((0u32, f)));
            }
        }
        let fire = |a: u32, c: u32, cost: &mut Vec<u32>, heap: &mut BinaryHeap<Reverse<(u32, FactId)>>| {
            let c = c.saturating_add(1);
            for &g in &t.actions[a as usize].add {
                if c < cost[g as usize] {
                    cost[g as usize] = c;
                    heap.push(Reverse((c, g)));
                }
            }
        };
        for &a in &self.no_pre {
            fire(a, 0, &mut cost, &mut heap);
        }
        while let Some(Reverse((c, f))) = heap.pop() {
            if c > cost[f as usize] {
                continue;
            }
            for &a in &self.consumers[f as usize] {
                let ai = a as usize;
                acc[ai] = if additive {
                    acc[ai].saturating_add(c)
                } else {
                    acc[ai].max(c)
                };
                remaining[ai] -= 1;
                if remaining[ai] == 0 {
                    fire(a, acc[ai], &mut cost, &mut heap);
                }
            }
        }
        cost
    }

    fn goal_value(&self, bits: &[u64], additive: bool) -> Option<u32> {
        let t = self.task;
        if t.is_goal(bits) {
            return Some(0);
        }
        let cost = self.fact_costs(bits, additive);
        let mut total = 0u32;
        for &g in &t.goal {
            let c = cost[g as usize];
            if c == INF {
                return None;
            }
            total = if additive { total.saturating_add(c) } else { total.max(c) };
        }
        // A goal state needs every fact of `goal`; `neg_goal` facts are
        // covered by their complements in `goal`.
        Some(total.max(1))
    }

    /// `None` means the goal is unreachable even ignoring deletes.
    pub fn h_add(&self, bits: &[u64]) -> Option<u32> {
        self.goal_value(bits, true)
    }

    pub fn h_max(&self, bits: &[u64]) -> Option<u32> {
        self.goal_value(bits, false)
    }

    pub fn evaluate(&self, kind: HeuristicKind, bits: &[u64]) -> Option<u32> {
        match kind {
            HeuristicKind::Hadd => self.h_add(bits),
            HeuristicKind::Hmax => self.h_max(bits),
            HeuristicKind::Blind => {
                if self.task.is_goal(bits) {
                    Some(0)
                } else {
                    Some(1)
                }
            }
        }
    }
}
