use std::collections::{BTreeSet, HashMap, HashSet};

use crate::pddl::{is_variable, Atom, DomainModel, Literal, ProblemSpec};
use crate::state::{instantiate_unchecked, GroundAction};

use super::PlannerError;

pub type FactId = u32;

/// A ground action with its literals mapped to fact indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskAction {
    pub action: GroundAction,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

/// Grounded, positive-STRIPS form of a planning task.
///
/// Each fact is a literal: positive literals are ordinary atoms, negative
/// literals are complement facts introduced for atoms that occur negated in
/// a precondition or the goal. Every action maintains both polarities.
#[derive(Clone, Debug)]
pub struct GroundTask {
    pub facts: Vec<Literal>,
    pub actions: Vec<TaskAction>,
    pub init: Vec<FactId>,
    pub goal: Vec<FactId>,
    /// Ordinary atoms that must be false in a goal state.
    pub neg_goal: Vec<FactId>,
    index: HashMap<Literal, FactId>,
}

impl GroundTask {
    pub fn fact_id(&self, lit: &Literal) -> Option<FactId> {
        self.index.get(lit).copied()
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn words(&self) -> usize {
        self.facts.len().div_ceil(64)
    }

    pub fn init_bits(&self) -> Vec<u64> {
        let mut bits = vec![0u64; self.words()];
        for &f in &self.init {
            set(&mut bits, f);
        }
        bits
    }

    pub fn bits_of(&self, facts: &[FactId]) -> Vec<u64> {
        let mut bits = vec![0u64; self.words()];
        for &f in facts {
            set(&mut bits, f);
        }
        bits
    }

    pub fn is_goal(&self, bits: &[u64]) -> bool {
        self.goal.iter().all(|&f| test(bits, f)) && self.neg_goal.iter().all(|&f| !test(bits, f))
    }

    pub fn applicable(&self, bits: &[u64], a: &TaskAction) -> bool {
        a.pre.iter().all(|&f| test(bits, f))
    }

    pub fn apply(&self, bits: &[u64], a: &TaskAction) -> Vec<u64> {
        let mut next = bits.to_vec();
        for &f in &a.del {
            clear(&mut next, f);
        }
        for &f in &a.add {
            set(&mut next, f);
        }
        next
    }
}

pub(crate) fn test(bits: &[u64], f: FactId) -> bool {
    bits[(f / 64) as usize] >> (f % 64) & 1 == 1
}

pub(crate) fn set(bits: &mut [u64], f: FactId) {
    bits[(f / 64) as usize] |= 1 << (f % 64);
}

fn clear(bits: &mut [u64], f: FactId) {
    bits[(f / 64) as usize] &= !(1 << (f % 64));
}

/// Objects usable for each parameter type, in declaration order.
fn candidates<'a>(d: &DomainModel, p: &'a ProblemSpec, ty: &str) -> Vec<&'a str> {
    p.objects
        .iter()
        .filter(|o| d.types.is_subtype(&o.ty, ty).unwrap_or(false))
        .map(|o| o.name.as_str())
        .collect()
}

/// Every type-consistent binding of every action that honours the
/// action's (in)equality constraints, in action then odometer order.
pub fn enumerate_bindings(
    d: &DomainModel,
    p: &ProblemSpec,
    cap: usize,
) -> Result<Vec<GroundAction>, PlannerError> {
    let mut total: usize = 0;
    let mut pools = Vec::with_capacity(d.actions.len());
    for a in &d.actions {
        let pool: Vec<Vec<&str>> = a.params.iter().map(|prm| candidates(d, p, &prm.ty)).collect();
        let count = pool
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
            .unwrap_or(usize::MAX);
        total = total.saturating_add(count);
        if total > cap {
            return Err(PlannerError::GroundingExplosion { count: total, cap });
        }
        pools.push(pool);
    }

    let mut out = Vec::with_capacity(total);
    for (a, pool) in d.actions.iter().zip(&pools) {
        if pool.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; pool.len()];
        'odometer: loop {
            let binding: Vec<(String, String)> = a
                .params
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(k, (prm, &i))| (prm.name.clone(), pool[k][i].to_string()))
                .collect();
            let value = |t: &str| -> String {
                if is_variable(t) {
                    binding
                        .iter()
                        .find(|(v, _)| v == t)
                        .map(|(_, o)| o.clone())
                        .unwrap_or_else(|| t.to_string())
                } else {
                    t.to_string()
                }
            };
            let ok = a
                .constraints
                .iter()
                .all(|c| (value(&c.left) == value(&c.right)) == c.equal);
            if ok {
                out.push(instantiate_unchecked(a, binding));
            }
            // last position turns fastest
            let mut k = idx.len();
            loop {
                if k == 0 {
                    break 'odometer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < pool[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    Ok(out)
}

struct Interner {
    facts: Vec<Literal>,
    index: HashMap<Literal, FactId>,
}

impl Interner {
    fn id(&mut self, lit: Literal) -> FactId {
        if let Some(&i) = self.index.get(&lit) {
            return i;
        }
        let i = self.facts.len() as FactId;
        self.facts.push(lit.clone());
        self.index.insert(lit, i);
        i
    }
}

fn push_unique(v: &mut Vec<FactId>, f: FactId) {
    if !v.contains(&f) {
        v.push(f);
    }
}

pub fn ground(
    d: &DomainModel,
    p: &ProblemSpec,
    cap: usize,
    prune_unreachable: bool,
) -> Result<GroundTask, PlannerError> {
    let mut actions = enumerate_bindings(d, p, cap)?;

    // atoms that need a complement fact
    let negated: HashSet<Atom> = actions
        .iter()
        .flat_map(|a| a.precondition.iter())
        .chain(p.goal.iter())
        .filter(|l| !l.positive)
        .map(|l| l.atom.clone())
        .collect();
    let in_init: HashSet<&Atom> = p.init.iter().collect();

    let mut it = Interner {
        facts: Vec::new(),
        index: HashMap::new(),
    };
    let mut init: BTreeSet<FactId> = BTreeSet::new();
    for a in &p.init {
        init.insert(it.id(Literal::pos(a.clone())));
    }
    for atom in p.goal.iter().map(|l| &l.atom).filter(|a| negated.contains(*a)) {
        if !in_init.contains(atom) {
            init.insert(it.id(Literal::neg(atom.clone())));
        }
    }

    if prune_unreachable {
        actions = relaxed_reachable(actions, &p.init);
    }

    let mut task_actions = Vec::with_capacity(actions.len());
    for ga in actions {
        let mut pre = Vec::new();
        for l in &ga.precondition {
            let f = it.id(l.clone());
            if !l.positive && !in_init.contains(&l.atom) {
                init.insert(f);
            }
            push_unique(&mut pre, f);
        }
        // delete-before-add: an atom both added and deleted stays true
        let net_del: Vec<&Atom> = ga.del.iter().filter(|a| !ga.add.contains(a)).collect();
        let mut add = Vec::new();
        let mut del = Vec::new();
        for a in &ga.add {
            push_unique(&mut add, it.id(Literal::pos(a.clone())));
            if negated.contains(a) {
                let c = it.id(Literal::neg(a.clone()));
                if !in_init.contains(a) {
                    init.insert(c);
                }
                push_unique(&mut del, c);
            }
        }
        for a in net_del {
            push_unique(&mut del, it.id(Literal::pos(a.clone())));
            if negated.contains(a) {
                let c = it.id(Literal::neg(a.clone()));
                if !in_init.contains(a) {
                    init.insert(c);
                }
                push_unique(&mut add, c);
            }
        }
        task_actions.push(TaskAction {
            action: ga,
            pre,
            add,
            del,
        });
    }

    let mut goal = Vec::new();
    let mut neg_goal = Vec::new();
    for l in &p.goal {
        push_unique(&mut goal, it.id(l.clone()));
        if !l.positive {
            push_unique(&mut neg_goal, it.id(Literal::pos(l.atom.clone())));
        }
    }
    let init: Vec<FactId> = init.into_iter().collect();

    Ok(GroundTask {
        facts: it.facts,
        actions: task_actions,
        init,
        goal,
        neg_goal,
        index: it.index,
    })
}

/// Keeps actions whose preconditions are reachable in the delete
/// relaxation. Negative preconditions are treated as always reachable.
fn relaxed_reachable(actions: Vec<GroundAction>, init: &[Atom]) -> Vec<GroundAction> {
    let mut reached: HashSet<Atom> = init.iter().cloned().collect();
    let mut keep = vec![false; actions.len()];
    loop {
        let mut changed = false;
        for (i, a) in actions.iter().enumerate() {
            if keep[i] {
                continue;
            }
            if a
                .precondition
                .iter()
                .all(|l| !l.positive || reached.contains(&l.atom))
            {
                keep[i] = true;
                changed = true;
                for ad in &a.add {
                    reached.insert(ad.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    actions
        .into_iter()
        .zip(keep)
        .filter_map(|(a, k)| k.then_some(a))
        .collect()
}
