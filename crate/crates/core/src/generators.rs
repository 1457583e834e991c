//! Seeded task and model generators for the fixture domains.
//!
//! Every generator takes an explicit RNG so suites are reproducible from a
//! recorded seed. Tasks carry the reply a scripted goal translator would
//! give, so pipelines can run end to end without a live model.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::orchestrator::Instruction;
use crate::pddl::{
    print_conjunction, ActionModel, Atom, DomainModel, Literal, ObjectDecl, Param, ParamConstraint, Plan,
    PlanStep, PredicateDef, ProblemSpec, Provenance, TypeHierarchy,
};
#[cfg(doc)]
use crate::planner::enumerate_bindings;
use crate::state::{apply, GroundAction, State};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A planning task with its English instruction and the goal a scripted
/// translator answers with.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedTask {
    pub id: String,
    pub text: String,
    /// Complete problem, goal included.
    pub problem: ProblemSpec,
    pub goal_reply: String,
    /// True when `goal_reply` is deliberately wrong and must be rejected.
    pub seeded_bad_translation: bool,
}

impl GeneratedTask {
    fn new(id: String, text: String, problem: ProblemSpec) -> Self {
        let goal_reply = print_conjunction(&problem.goal);
        Self {
            id,
            text,
            problem,
            goal_reply,
            seeded_bad_translation: false,
        }
    }

    /// The instruction as the pipeline sees it: no goal, only context.
    pub fn instruction(&self) -> Instruction {
        let mut context = self.problem.clone();
        context.goal.clear();
        Instruction::new(self.id.clone(), self.text.clone(), context)
    }
}

fn atom(pred: &str, args: &[&str]) -> Atom {
    Atom::new(pred, args.iter().copied())
}

// ---------------------------------------------------------------- blocksworld

/// A block configuration: `below[i]` is the block under block `i`, `None`
/// for the table.
pub type Tower = Vec<Option<usize>>;

/// Every legal configuration of `n` blocks, in a fixed order.
pub fn enumerate_block_states(n: usize) -> Vec<Tower> {
    let mut out = Vec::new();
    let mut below = vec![None; n];
    fill(0, n, &mut below, &mut out);
    out
}

fn fill(i: usize, n: usize, below: &mut Tower, out: &mut Vec<Tower>) {
    if i == n {
        if is_legal_tower(below) {
            out.push(below.clone());
        }
        return;
    }
    for choice in std::iter::once(None).chain((0..n).filter(|&j| j != i).map(Some)) {
        below[i] = choice;
        fill(i + 1, n, below, out);
    }
    below[i] = None;
}

fn is_legal_tower(below: &Tower) -> bool {
    let n = below.len();
    // at most one block directly on any block
    let mut supported = vec![false; n];
    for b in below.iter().flatten() {
        if std::mem::replace(&mut supported[*b], true) {
            return false;
        }
    }
    // no cycles
    (0..n).all(|start| {
        let mut cur = below[start];
        let mut steps = 0;
        while let Some(c) = cur {
            steps += 1;
            if steps > n {
                return false;
            }
            cur = below[c];
        }
        true
    })
}

pub fn block_name(i: usize) -> String {
    format!("b{}", i + 1)
}

fn tower_literals(t: &Tower) -> Vec<Literal> {
    t.iter()
        .enumerate()
        .map(|(i, b)| match b {
            Some(j) => Literal::pos(Atom::new("on", [block_name(i), block_name(*j)])),
            None => Literal::pos(Atom::new("on-table", [block_name(i)])),
        })
        .collect()
}

/// Blocksworld problem from an initial and a goal configuration; the goal
/// fixes the position of every block.
pub fn blocksworld_problem(name: &str, init: &Tower, goal: &Tower) -> ProblemSpec {
    let n = init.len();
    let mut p = ProblemSpec::new(name, "blocksworld");
    p.objects = (0..n).map(|i| ObjectDecl::new(block_name(i), "block")).collect();
    p.init = tower_literals(init).into_iter().map(|l| l.atom).collect();
    for i in 0..n {
        if !init.contains(&Some(i)) {
            p.init.push(Atom::new("clear", [block_name(i)]));
        }
    }
    p.init.push(atom("arm-empty", &[]));
    p.goal = tower_literals(goal);
    p
}

/// Every (init, goal) pair for 1..=`max_blocks` blocks.
pub fn all_blocksworld_instances(max_blocks: usize) -> Vec<ProblemSpec> {
    let mut out = Vec::new();
    for n in 1..=max_blocks {
        let states = enumerate_block_states(n);
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                out.push(blocksworld_problem(&format!("bw{n}-{i}-{j}"), a, b));
            }
        }
    }
    out
}

pub fn random_blocksworld(n: usize, rng: &mut impl Rng) -> GeneratedTask {
    let states = enumerate_block_states(n);
    let a = states.choose(rng).expect("at least one state");
    let b = states.choose(rng).expect("at least one state");
    let p = blocksworld_problem(&format!("bw{n}-random"), a, b);
    let text = describe_goal_plainly(&p.goal);
    GeneratedTask::new(p.name.clone(), text, p)
}

fn describe_goal_plainly(goal: &[Literal]) -> String {
    let parts: Vec<String> = goal
        .iter()
        .map(|l| match l.atom.args.as_slice() {
            [x, y] => format!("{x} on {y}"),
            [x] => format!("{x} on the table"),
            _ => l.to_string(),
        })
        .collect();
    format!("Arrange the blocks so that {}.", parts.join(", "))
}

// ----------------------------------------------------------------- logistics

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogisticsSize {
    pub cities: usize,
    pub locations_per_city: usize,
    pub packages: usize,
    pub planes: usize,
}

/// Each city gets one truck and an airport at its first location.
pub fn logistics_task(id: &str, size: LogisticsSize, rng: &mut impl Rng) -> GeneratedTask {
    let mut p = ProblemSpec::new(id, "logistics");
    let mut locations = Vec::new();
    let mut airports = Vec::new();
    for c in 1..=size.cities {
        let city = format!("c{c}");
        p.objects.push(ObjectDecl::new(&city, "city"));
        for l in 1..=size.locations_per_city {
            let loc = format!("l{c}-{l}");
            p.objects.push(ObjectDecl::new(&loc, "location"));
            p.init.push(Atom::new("location-in-city", [loc.clone(), city.clone()]));
            if l == 1 {
                p.init.push(Atom::new("airport", [loc.clone()]));
                airports.push(loc.clone());
            }
            locations.push((loc, c));
        }
        let truck = format!("t{c}");
        p.objects.push(ObjectDecl::new(&truck, "truck"));
        let start = format!("l{c}-{}", rng.random_range(1..=size.locations_per_city));
        p.init.push(Atom::new("truck-at", [truck, start]));
    }
    for a in 1..=size.planes {
        let plane = format!("a{a}");
        p.objects.push(ObjectDecl::new(&plane, "plane"));
        let at = airports.choose(rng).expect("one airport per city").clone();
        p.init.push(Atom::new("plane-at", [plane, at]));
    }
    let mut asks = Vec::new();
    for k in 1..=size.packages {
        let pkg = format!("p{k}");
        p.objects.push(ObjectDecl::new(&pkg, "package"));
        let (from, _) = locations.choose(rng).expect("locations").clone();
        let to = loop {
            let (to, _) = locations.choose(rng).expect("locations");
            if *to != from || locations.len() == 1 {
                break to.clone();
            }
        };
        p.init.push(Atom::new("package-at", [pkg.clone(), from]));
        p.goal.push(Literal::pos(Atom::new("package-at", [pkg.clone(), to.clone()])));
        asks.push(format!("package {pkg} to {to}"));
    }
    let text = format!("Deliver {}.", join_and(&asks));
    GeneratedTask::new(id.to_string(), text, p)
}

fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [rest @ .., last] => format!("{} and {last}", rest.join(", ")),
    }
}

/// Suite of logistics tasks with at most three cities and six packages.
pub fn logistics_suite(seed: u64, count: usize) -> Vec<GeneratedTask> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let cities = 1 + i % 3;
            let size = LogisticsSize {
                cities,
                locations_per_city: r.random_range(2..=3),
                packages: r.random_range(1..=6),
                planes: if cities > 1 { r.random_range(1..=2) } else { 1 },
            };
            logistics_task(&format!("logistics-{:02}", i + 1), size, &mut r)
        })
        .collect()
}

// ----------------------------------------------------------------- household

const FURNITURE: &[&str] = &[
    "countertop-1",
    "countertop-2",
    "dining-table-1",
    "fridge-1",
    "cabinet-1",
    "drawer-1",
    "sink-basin-1",
    "stove-burner-1",
    "microwave-1",
    "carpet-1",
    "trash-can-1",
];

const OBJECTS: &[&str] = &[
    "apple-1",
    "potato-1",
    "banana-1",
    "knife-1",
    "cloth-1",
    "vacuum-1",
    "book-1",
    "book-2",
];

const RECEPTACLES: &[&str] = &["pan-1", "bowl-1", "plate-1", "cutting-board-1", "blender-1", "lunch-box-1"];

/// The single kitchen-and-living-room scene all household tasks share.
pub fn household_scene() -> ProblemSpec {
    let mut p = ProblemSpec::new("household-scene", "household");
    p.objects.push(ObjectDecl::new("robot-1", "robot"));
    for f in FURNITURE {
        p.objects.push(ObjectDecl::new(*f, "furnitureAppliance"));
    }
    for o in OBJECTS {
        p.objects.push(ObjectDecl::new(*o, "householdObject"));
    }
    for r in RECEPTACLES {
        p.objects.push(ObjectDecl::new(*r, "smallReceptacle"));
    }
    let facts: &[(&str, &[&str])] = &[
        ("robot-at", &["countertop-1"]),
        ("hand-empty", &[]),
        ("openable", &["fridge-1"]),
        ("openable", &["cabinet-1"]),
        ("openable", &["drawer-1"]),
        ("openable", &["microwave-1"]),
        ("flat-surface", &["countertop-1"]),
        ("flat-surface", &["countertop-2"]),
        ("flat-surface", &["dining-table-1"]),
        ("flat-surface", &["stove-burner-1"]),
        ("is-sink", &["sink-basin-1"]),
        ("is-stove", &["stove-burner-1"]),
        ("is-microwave", &["microwave-1"]),
        ("is-carpet", &["carpet-1"]),
        ("is-trash-can", &["trash-can-1"]),
        ("object-on", &["apple-1", "fridge-1"]),
        ("object-on", &["potato-1", "countertop-2"]),
        ("object-on", &["banana-1", "dining-table-1"]),
        ("object-on", &["knife-1", "drawer-1"]),
        ("object-on", &["cloth-1", "countertop-2"]),
        ("object-on", &["vacuum-1", "carpet-1"]),
        ("object-on", &["book-1", "dining-table-1"]),
        ("object-on", &["book-2", "dining-table-1"]),
        ("object-on", &["pan-1", "stove-burner-1"]),
        ("object-on", &["bowl-1", "countertop-1"]),
        ("object-on", &["plate-1", "cabinet-1"]),
        ("object-on", &["cutting-board-1", "countertop-1"]),
        ("object-on", &["blender-1", "countertop-2"]),
        ("object-on", &["lunch-box-1", "dining-table-1"]),
        ("dirty", &["apple-1"]),
        ("dirty", &["potato-1"]),
        ("dirty", &["plate-1"]),
        ("sliceable", &["apple-1"]),
        ("sliceable", &["potato-1"]),
        ("mashable", &["potato-1"]),
        ("mashable", &["banana-1"]),
        ("mashable", &["apple-1"]),
        ("is-knife", &["knife-1"]),
        ("is-cloth", &["cloth-1"]),
        ("is-vacuum", &["vacuum-1"]),
        ("is-pan", &["pan-1"]),
        ("is-cutting-board", &["cutting-board-1"]),
        ("is-blender", &["blender-1"]),
        ("toggleable", &["blender-1"]),
        ("lidded", &["blender-1"]),
        ("lidded", &["lunch-box-1"]),
        ("receptacle-closed", &["blender-1"]),
        ("receptacle-closed", &["lunch-box-1"]),
    ];
    for (pred, args) in facts {
        p.init.push(atom(pred, args));
    }
    for f in FURNITURE {
        if !matches!(*f, "fridge-1" | "cabinet-1" | "drawer-1" | "microwave-1") {
            p.init.push(atom("accessible", &[f]));
        }
    }
    for o in OBJECTS.iter().chain(RECEPTACLES) {
        if *o != "blender-1" {
            p.init.push(atom("pickupable", &[o]));
        }
        p.init.push(atom("nothing-on", &[o]));
    }
    p
}

fn pos(pred: &str, args: &[&str]) -> Literal {
    Literal::pos(atom(pred, args))
}

/// One household request: its wording and goal literals.
fn household_request(kind: usize, rng: &mut impl Rng) -> (String, Vec<Literal>) {
    let food = ["apple-1", "potato-1", "banana-1"];
    match kind {
        0 => {
            let x = *food.choose(rng).expect("non-empty");
            (
                format!("Wash the {} and leave it in the fridge.", pretty(x)),
                vec![pos("washed", &[x]), pos("object-on", &[x, "fridge-1"])],
            )
        }
        1 => ("Cut the apple into slices.".into(), vec![pos("sliced", &["apple-1"])]),
        2 => {
            let x = *food.choose(rng).expect("non-empty");
            (format!("Warm up the {}.", pretty(x)), vec![pos("heated", &[x])])
        }
        3 => {
            let x = *["potato-1", "banana-1"].choose(rng).expect("non-empty");
            (format!("Make a mash out of the {}.", pretty(x)), vec![pos("mashed", &[x])])
        }
        4 => {
            let f = *["dining-table-1", "countertop-1"].choose(rng).expect("non-empty");
            (format!("Give the {} a wipe.", pretty(f)), vec![pos("surface-clean", &[f])])
        }
        5 => (
            "Vacuum the carpet and empty the vacuum afterwards.".into(),
            vec![
                pos("surface-clean", &["carpet-1"]),
                Literal::neg(atom("vacuum-full", &["vacuum-1"])),
            ],
        ),
        6 => (
            "Put the first book on top of the second one.".into(),
            vec![pos("stacked-on", &["book-1", "book-2"])],
        ),
        7 => {
            let x = *["apple-1", "banana-1"].choose(rng).expect("non-empty");
            (
                format!("Pack the {} into the lunch box and shut the lid.", pretty(x)),
                vec![pos("object-in", &[x, "lunch-box-1"]), pos("receptacle-closed", &["lunch-box-1"])],
            )
        }
        8 => (
            "Set a clean plate on the dining table.".into(),
            vec![pos("washed", &["plate-1"]), pos("object-on", &["plate-1", "dining-table-1"])],
        ),
        _ => ("Switch the blender on.".into(), vec![pos("switched-on", &["blender-1"])]),
    }
}

const HOUSEHOLD_REQUEST_KINDS: usize = 10;

fn pretty(name: &str) -> String {
    name.trim_end_matches(|c: char| c.is_ascii_digit())
        .trim_end_matches('-')
        .replace('-', " ")
}

fn goal_objects(goal: &[Literal]) -> std::collections::BTreeSet<&str> {
    goal.iter().flat_map(|l| l.atom.args.iter().map(String::as_str)).collect()
}

/// `count` household tasks over the shared scene, all with distinct
/// instructions: single requests first, then pairs of requests that touch
/// disjoint objects. Exactly one task has a seeded goal translation that
/// names an undefined predicate.
pub fn household_suite(seed: u64, count: usize) -> Vec<GeneratedTask> {
    let mut r = rng(seed);
    let mut seen = std::collections::HashSet::new();
    let mut requests: Vec<(String, Vec<Literal>)> = Vec::new();
    let mut kind = 0;
    while requests.len() < count {
        let (text, goal) = if kind < HOUSEHOLD_REQUEST_KINDS {
            kind += 1;
            household_request(kind - 1, &mut r)
        } else {
            let (ta, ga) = household_request(r.random_range(0..HOUSEHOLD_REQUEST_KINDS), &mut r);
            let (tb, gb) = household_request(r.random_range(0..HOUSEHOLD_REQUEST_KINDS), &mut r);
            if !goal_objects(&ga).is_disjoint(&goal_objects(&gb)) {
                continue;
            }
            (format!("{ta} {tb}"), ga.into_iter().chain(gb).collect())
        };
        if seen.insert(text.clone()) {
            requests.push((text, goal));
        }
    }
    requests.shuffle(&mut r);
    let bad = r.random_range(0..count.max(1));
    requests
        .into_iter()
        .enumerate()
        .map(|(i, (text, goal))| {
            let id = format!("household-{:02}", i + 1);
            let mut p = household_scene();
            p.name = id.clone();
            p.goal = goal;
            let mut t = GeneratedTask::new(id, text, p);
            if i == bad {
                // an adjective the domain never defined
                let first = t.problem.goal[0].atom.predicate.clone();
                t.goal_reply = t.goal_reply.replacen(&format!("({first} "), &format!("(freshly-{first} "), 1);
                t.seeded_bad_translation = true;
            }
            t
        })
        .collect()
}

// ----------------------------------------------------------------- tyreworld

/// Swap the flat tyre on each of `hubs` hubs for the spare in the boot.
pub fn tyreworld_task(id: &str, hubs: usize) -> GeneratedTask {
    let mut p = ProblemSpec::new(id, "tyreworld");
    p.objects.push(ObjectDecl::new("boot", "container"));
    for (t, kind) in [("wrench", "is-wrench"), ("jack", "is-jack"), ("pump", "is-pump")] {
        p.objects.push(ObjectDecl::new(t, "tool"));
        p.init.push(atom(kind, &[t]));
        p.init.push(atom("in-container", &[t, "boot"]));
    }
    let mut asks = Vec::new();
    for i in 1..=hubs {
        let (hub, nut, flat, spare) = (format!("hub{i}"), format!("nut{i}"), format!("flat{i}"), format!("spare{i}"));
        p.objects.push(ObjectDecl::new(&hub, "hub"));
        p.objects.push(ObjectDecl::new(&nut, "nut"));
        p.objects.push(ObjectDecl::new(&flat, "wheel"));
        p.objects.push(ObjectDecl::new(&spare, "wheel"));
        p.init.extend([
            atom("on-ground", &[&hub]),
            atom("hub-fastened", &[&hub]),
            atom("nut-on-hub", &[&nut, &hub]),
            atom("nut-tight", &[&nut]),
            atom("wheel-on-hub", &[&flat, &hub]),
            atom("in-container", &[&spare, "boot"]),
            atom("intact", &[&spare]),
        ]);
        p.goal.extend([
            pos("wheel-on-hub", &[&spare, &hub]),
            pos("inflated", &[&spare]),
            pos("nut-tight", &[&nut]),
            pos("in-container", &[&flat, "boot"]),
        ]);
        asks.push(hub);
    }
    p.goal.extend(["wrench", "jack", "pump"].map(|t| pos("in-container", &[t, "boot"])));
    p.goal.push(Literal::neg(atom("container-open", &["boot"])));
    let text = format!(
        "Replace the flat tyre on {} with an inflated spare, stow the old tyre and all tools, and close the boot.",
        join_and(&asks)
    );
    GeneratedTask::new(id.to_string(), text, p)
}

// ------------------------------------------------------------ fixture suites

pub const LOGISTICS_SEED: u64 = 2024;
pub const LOGISTICS_TASKS: usize = 21;
pub const HOUSEHOLD_SEED: u64 = 2024;
pub const HOUSEHOLD_TASKS: usize = 22;
pub const BLOCKSWORLD_SEED: u64 = 7;

/// Human message of the mashed-item scenario: the recorded construction of
/// `mash` forgets that a mashed object cannot be grasped any more.
pub const MASHED_ITEM_FEEDBACK: &str =
    "Mashing turns the object into a paste, so afterwards the robot should not be able to pick it up.";

/// The task suite shipped with a fixture project.
pub fn fixture_suite(domain: &str) -> Vec<GeneratedTask> {
    match domain {
        "logistics" => logistics_suite(LOGISTICS_SEED, LOGISTICS_TASKS),
        "household" => household_suite(HOUSEHOLD_SEED, HOUSEHOLD_TASKS),
        "tyreworld" => (1..=2).map(|n| tyreworld_task(&format!("tyreworld-{n:02}"), n)).collect(),
        "blocksworld" => {
            let mut r = rng(BLOCKSWORLD_SEED);
            (0..5)
                .map(|i| {
                    let mut t = random_blocksworld(3 + i % 2, &mut r);
                    t.id = format!("blocksworld-{:02}", i + 1);
                    t.problem.name = t.id.clone();
                    t
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

/// The model a construction run "remembers" for a fixture: the reference,
/// except that household `mash` lacks its delete effect.
pub fn recorded_reference(reference: &DomainModel) -> DomainModel {
    let mut d = reference.clone();
    if d.name == "household" {
        if let Some(m) = d.action_mut("mash") {
            m.effects.retain(|l| l.positive || l.atom.predicate != "pickupable");
        }
    }
    d
}

// ------------------------------------------------------------- random models

const WORDS: &[&str] = &[
    "red", "tall", "near", "open", "full", "warm", "held", "free", "lit", "wet", "stacked", "ready",
];

/// A random well-typed STRIPS domain for round-trip testing.
pub fn random_domain(rng: &mut impl Rng) -> DomainModel {
    let mut d = DomainModel::new(format!("random-{}", rng.random_range(0..10_000)));
    let mut h = TypeHierarchy::new();
    let ntypes = rng.random_range(1..=4);
    let mut types: Vec<String> = Vec::new();
    for i in 0..ntypes {
        let name = if rng.random_bool(0.3) { format!("kindOf{i}") } else { format!("kind{i}") };
        let parent = if types.is_empty() || rng.random_bool(0.5) {
            "object".to_string()
        } else {
            types.choose(rng).expect("non-empty").clone()
        };
        h.declare(&name, &parent).expect("fresh type name");
        types.push(name);
    }
    d.types = h;

    let npreds = rng.random_range(1..=6);
    for i in 0..npreds {
        let arity = rng.random_range(0..=3);
        let params: Vec<Param> = (0..arity)
            .map(|k| Param::new(format!("?x{k}"), types.choose(rng).expect("non-empty").clone()))
            .collect();
        let word = WORDS.choose(rng).expect("non-empty");
        let vars: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
        let description = if rng.random_bool(0.2) {
            String::new()
        } else {
            format!("true if {} is {word}", if vars.is_empty() { "the world".to_string() } else { vars.join(" and ") })
        };
        d.predicates.push(PredicateDef::new(format!("{word}-{i}"), params, description));
    }

    let nactions = rng.random_range(1..=4);
    for i in 0..nactions {
        d.actions.push(random_action(&format!("act-{i}"), &d, &types, rng));
    }
    d
}

fn random_action(name: &str, d: &DomainModel, types: &[String], rng: &mut impl Rng) -> ActionModel {
    let mut a = ActionModel::new(name);
    let nparams = rng.random_range(0..=4);
    for k in 0..nparams {
        let mut p = Param::new(format!("?p{k}"), types.choose(rng).expect("non-empty").clone());
        if rng.random_bool(0.3) {
            p = p.described(format!("the {} involved", WORDS.choose(rng).expect("non-empty")));
        }
        a.params.push(p);
    }
    if rng.random_bool(0.3) {
        a.provenance = Provenance::Message {
            conversation: format!("{name}-pass{}", rng.random_range(1..=2)),
            index: rng.random_range(1..20),
        };
    }
    let mut used = std::collections::HashSet::new();
    for _ in 0..rng.random_range(0..8) {
        let Some(lit) = random_literal(&a, d, rng) else { continue };
        if !used.insert(lit.atom.clone()) {
            continue;
        }
        if rng.random_bool(0.5) {
            a.precondition.push(lit);
        } else {
            a.effects.push(lit);
        }
    }
    if a.params.len() >= 2 && rng.random_bool(0.3) {
        a.constraints.push(ParamConstraint {
            left: a.params[0].name.clone(),
            right: a.params[1].name.clone(),
            equal: false,
        });
    }
    a
}

fn random_literal(a: &ActionModel, d: &DomainModel, rng: &mut impl Rng) -> Option<Literal> {
    let pred = d.predicates.choose(rng)?;
    let mut args = Vec::new();
    for p in &pred.params {
        let fits: Vec<&Param> = a
            .params
            .iter()
            .filter(|ap| d.types.is_subtype(&ap.ty, &p.ty).unwrap_or(false))
            .collect();
        args.push(fits.choose(rng)?.name.clone());
    }
    let atom = Atom::new(pred.name.clone(), args);
    Some(if rng.random_bool(0.7) { Literal::pos(atom) } else { Literal::neg(atom) })
}

// ----------------------------------------------------------- validator cases

/// Uniform choice among the applicable actions. Rejection sampling keeps
/// large groundings cheap; a full scan settles the case where few or none
/// apply.
fn pick_applicable<'g>(ground: &'g [GroundAction], state: &State, rng: &mut impl Rng) -> Option<&'g GroundAction> {
    let applicable = |g: &GroundAction| g.precondition.iter().all(|l| state.holds(l));
    for _ in 0..ground.len().min(4096) {
        let g = ground.choose(rng)?;
        if applicable(g) {
            return Some(g);
        }
    }
    let options: Vec<&GroundAction> = ground.iter().filter(|g| applicable(g)).collect();
    options.choose(rng).copied()
}

/// A task paired with an action sequence, valid or not.
#[derive(Clone, Debug)]
pub struct PlanCase {
    pub problem: ProblemSpec,
    pub plan: Plan,
}

/// Walks from the initial state through applicable actions, takes a goal
/// from facts seen along the way, then perturbs the sequence about half of
/// the time so every failure kind shows up. `ground` is the binding
/// enumeration of `base` (see [`enumerate_bindings`]).
pub fn random_plan_case(
    d: &DomainModel,
    base: &ProblemSpec,
    ground: &[GroundAction],
    rng: &mut impl Rng,
) -> PlanCase {
    let mut state = State::initial(base);
    let mut steps = Vec::new();
    let mut seen = vec![state.clone()];
    for _ in 0..rng.random_range(0..=8) {
        let Some(g) = pick_applicable(ground, &state, rng) else { break };
        state = apply(&state, g).expect("filtered applicable");
        steps.push(g.step());
        seen.push(state.clone());
    }

    let mut problem = base.clone();
    let target = seen.choose(rng).expect("non-empty");
    let facts: Vec<&Atom> = target.facts().collect();
    let k = rng.random_range(1..=3).min(facts.len());
    problem.goal = facts
        .choose_multiple(rng, k)
        .map(|a| Literal::pos((*a).clone()))
        .collect();
    if rng.random_bool(0.2) {
        if let Some(g) = ground.choose(rng) {
            if let Some(del) = g.del.first() {
                problem.goal.push(Literal::neg(del.clone()));
            }
        }
    }

    if !steps.is_empty() && rng.random_bool(0.5) {
        let i = rng.random_range(0..steps.len());
        match rng.random_range(0..5) {
            0 => {
                steps.remove(i);
            }
            1 => {
                let j = rng.random_range(0..steps.len());
                steps.swap(i, j);
            }
            2 => {
                let all: Vec<&str> = base.objects.iter().map(|o| o.name.as_str()).collect();
                for arg in steps[i].args.iter_mut() {
                    if rng.random_bool(0.5) {
                        *arg = all.choose(rng).expect("objects").to_string();
                    }
                }
            }
            3 => {
                steps[i].args.pop();
            }
            _ => {
                let name = if rng.random_bool(0.5) {
                    "teleport".to_string()
                } else {
                    d.actions.choose(rng).expect("actions").name.clone()
                };
                let args = steps[i].args.clone();
                steps.insert(i, PlanStep { action: name, args });
            }
        }
    }
    PlanCase {
        problem,
        plan: Plan::new(steps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_state_counts_match_known_sequence() {
        // labelled forests of linear towers: 1, 3, 13, 73, 501
        let counts: Vec<usize> = (1..=5).map(|n| enumerate_block_states(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 13, 73, 501]);
    }

    #[test]
    fn suites_are_reproducible() {
        assert_eq!(logistics_suite(7, 5), logistics_suite(7, 5));
        assert_eq!(household_suite(7, 5), household_suite(7, 5));
        let texts: std::collections::HashSet<String> = household_suite(7, 30).into_iter().map(|t| t.text).collect();
        assert_eq!(texts.len(), 30);
    }

    #[test]
    fn household_suite_seeds_exactly_one_bad_translation() {
        let s = household_suite(11, 22);
        assert_eq!(s.iter().filter(|t| t.seeded_bad_translation).count(), 1);
        let bad = s.iter().find(|t| t.seeded_bad_translation).unwrap();
        assert!(bad.goal_reply.contains("(freshly-"), "{}", bad.goal_reply);
    }

    #[test]
    fn logistics_bounds() {
        for t in logistics_suite(3, 21) {
            let count = |ty: &str| t.problem.objects.iter().filter(|o| o.ty == ty).count();
            assert!(count("city") <= 3 && count("package") <= 6 && count("package") >= 1);
            assert_eq!(count("city"), count("truck"));
        }
    }
}
