//! Worked example models and seeded generators.
//!
//! Everything here is deterministic: the examples are fixed values and the
//! generators draw from a caller-supplied ChaCha stream, so a seed pins the
//! whole corpus. The network generator keeps its output inside the
//! canonical-model size guard (counted on the marked characteristic
//! formula) and attaches every agent to the model through a base entry or a
//! relation edge, which is what makes the marked translation invertible on
//! generated models.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::deduction::{self, ProverConfig};
use crate::kripke::{subformulas, KripkeModel};
use crate::logic::{AgentId, Formula, Group, PredDecl, PredKind, Term, Vocabulary};
use crate::snm::Snm;
use crate::text::KripkeDocument;
use crate::translate::{characteristic_formula, characteristic_set};

/// A seeded deterministic stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// The running example network: three agents, a posting rule in Alice's
/// base, a library post in Charlie's, friendship both ways between Alice
/// and Bob, Bob blocking Charlie, and a pending friend request.
pub fn example_network() -> Snm {
    let mut vocab = Vocabulary::default();
    vocab
        .domains
        .insert("Time".to_string(), vec!["1".to_string(), "2".to_string()]);
    for (name, arity, kind) in [
        ("post", 3, PredKind::Regular),
        ("loc", 3, PredKind::Regular),
        ("Friend", 2, PredKind::Connection),
        ("Blocked", 2, PredKind::Connection),
        ("friendRequest", 2, PredKind::Action),
    ] {
        vocab
            .predicates
            .insert(name.to_string(), PredDecl { arity, kind });
    }
    let agents: BTreeSet<AgentId> = ["Alice", "Bob", "Charlie"]
        .iter()
        .map(|s| AgentId::new(*s))
        .collect();
    let mut snm = Snm::new(agents, vocab).expect("example agents are not reserved");
    for (rel, from, to) in [
        ("Friend", "Alice", "Bob"),
        ("Friend", "Bob", "Alice"),
        ("Blocked", "Bob", "Charlie"),
    ] {
        snm.add_connection(rel, AgentId::new(from), AgentId::new(to))
            .expect("example relations are declared");
    }
    snm.add_action("friendRequest", AgentId::new("Charlie"), AgentId::new("Alice"))
        .expect("example action is declared");

    let c = |s: &str| Term::Const(s.to_string());
    let v = |s: &str| Term::Var(s.to_string());
    let cfg = ProverConfig::default();
    let posted = Formula::pred(PredKind::Regular, "post", vec![c("Bob"), c("pub"), c("1")]);
    let rule = Formula::forall(
        "t",
        "Time",
        Formula::pred(PredKind::Regular, "post", vec![c("Bob"), c("pub"), v("t")]).implies(
            Formula::pred(PredKind::Regular, "loc", vec![c("Bob"), c("pub"), v("t")]),
        ),
    );
    let library = Formula::pred(
        PredKind::Regular,
        "post",
        vec![c("Bob"), c("library"), c("2")],
    );
    let snm = snm
        .kb_insert(&AgentId::new("Alice"), &posted, &cfg)
        .expect("consistent insertion");
    let snm = snm
        .kb_insert(&AgentId::new("Alice"), &rule, &cfg)
        .expect("consistent insertion");
    snm.kb_insert(&AgentId::new("Charlie"), &library, &cfg)
        .expect("consistent insertion")
}

/// The running example Kripke structure: three states in a line, `a`
/// hesitating between the first two, `b` between the last two, and `p(a)`
/// true everywhere except the end.
pub fn example_kripke() -> KripkeDocument {
    let mut model = KripkeModel::default();
    for s in ["s0", "s1", "s2"] {
        model.states.insert(s.to_string());
        model.val.insert(s.to_string(), BTreeSet::new());
    }
    let p_a = Formula::pred(PredKind::Regular, "p", vec![Term::Const("a".to_string())]);
    for s in ["s0", "s1"] {
        model.val.get_mut(s).expect("state added above").insert(p_a.clone());
    }
    model.rel.insert(
        AgentId::new("a"),
        [("s0", "s1"), ("s1", "s0")]
            .iter()
            .map(|(f, t)| (f.to_string(), t.to_string()))
            .collect(),
    );
    model.rel.insert(
        AgentId::new("b"),
        [("s1", "s2"), ("s2", "s1")]
            .iter()
            .map(|(f, t)| (f.to_string(), t.to_string()))
            .collect(),
    );
    KripkeDocument {
        model,
        characteristic: Vec::new(),
        distinguished: None,
    }
}

/// Shape limits for generated network models.
#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Agents beyond the first two, at most.
    pub max_extra_agents: usize,
    /// Base entries per agent, at most.
    pub max_kb_entries: usize,
    /// Relation edges, at most.
    pub max_edges: usize,
    /// Environment facts, at most.
    pub max_env_facts: usize,
    /// Ceiling on the subformula count of the marked characteristic
    /// formula; oversized samples are shrunk until they fit.
    pub sub_guard: usize,
    /// Ceiling on the free literals (atoms and knowledge subformulas) of
    /// the marked characteristic formula. Canonical states are sign
    /// choices over exactly these, so this caps the translated model at
    /// `2^free_guard` states.
    pub free_guard: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_extra_agents: 1,
            max_kb_entries: 2,
            max_edges: 2,
            max_env_facts: 1,
            sub_guard: 18,
            free_guard: 8,
        }
    }
}

const AGENT_POOL: [&str; 4] = ["a", "b", "c", "d"];

/// The fixed vocabulary generated models draw from. `q0` is declared but
/// never asserted anywhere, so it is false in every generated model; the
/// query generators use it as their reliable falsehood.
pub fn base_vocab() -> Vocabulary {
    let mut vocab = Vocabulary::default();
    vocab
        .domains
        .insert("T".to_string(), vec!["1".to_string(), "2".to_string()]);
    for (name, arity, kind) in [
        ("p", 1, PredKind::Regular),
        ("q", 0, PredKind::Regular),
        ("q0", 0, PredKind::Regular),
        ("F", 2, PredKind::Connection),
        ("act", 2, PredKind::Action),
    ] {
        vocab
            .predicates
            .insert(name.to_string(), PredDecl { arity, kind });
    }
    vocab
}

#[derive(Clone)]
enum Item {
    Connection(AgentId, AgentId),
    Action(AgentId, AgentId),
    Env(Formula),
    Entry(AgentId, Formula),
}

fn p_of(arg: &str) -> Formula {
    Formula::pred(PredKind::Regular, "p", vec![Term::Const(arg.to_string())])
}

fn assemble(agents: &BTreeSet<AgentId>, items: &[Item], cfg: &ProverConfig) -> Snm {
    let mut snm = Snm::new(agents.clone(), base_vocab()).expect("pool names are not reserved");
    for item in items {
        match item {
            Item::Connection(from, to) => {
                snm.add_connection("F", from.clone(), to.clone())
                    .expect("declared relation over declared agents");
            }
            Item::Action(from, to) => {
                snm.add_action("act", from.clone(), to.clone())
                    .expect("declared relation over declared agents");
            }
            Item::Env(atom) => {
                snm = snm
                    .kb_insert(&AgentId::new(crate::snm::ENV_AGENT), atom, cfg)
                    .expect("environment atoms are always insertable");
            }
            Item::Entry(agent, formula) => {
                // An entry clashing with what the base already derives is
                // dropped; the sample stays valid either way.
                if let Ok(next) = snm.kb_insert(agent, formula, cfg) {
                    snm = next;
                }
            }
        }
    }
    snm
}

/// A random valid network model within the configured shape, guaranteed to
/// sit inside the canonical size guard and to mention every agent.
pub fn gen_snm(rng: &mut ChaCha8Rng, gen: &GenConfig, cfg: &ProverConfig) -> Snm {
    let count = 2 + rng.gen_range(0..=gen.max_extra_agents);
    let agents: BTreeSet<AgentId> = AGENT_POOL[..count].iter().map(|s| AgentId::new(*s)).collect();
    let roster: Vec<AgentId> = agents.iter().cloned().collect();

    let mut items: Vec<Item> = Vec::new();
    for _ in 0..rng.gen_range(0..=gen.max_edges) {
        let from = roster.choose(rng).expect("roster is non-empty").clone();
        let to = roster.choose(rng).expect("roster is non-empty").clone();
        if from == to {
            continue;
        }
        if rng.gen_bool(0.5) {
            items.push(Item::Connection(from, to));
        } else {
            items.push(Item::Action(from, to));
        }
    }
    for _ in 0..rng.gen_range(0..=gen.max_env_facts) {
        let atom = match rng.gen_range(0..3) {
            0 => p_of("u"),
            1 => p_of("v"),
            _ => Formula::prop("q"),
        };
        items.push(Item::Env(atom));
    }
    for agent in &roster {
        for _ in 0..rng.gen_range(0..=gen.max_kb_entries) {
            let entry = match rng.gen_range(0..6) {
                0 => p_of("u"),
                1 => p_of("v"),
                2 => Formula::prop("q"),
                3 => p_of("u").implies(Formula::prop("q")),
                4 => {
                    let other = roster.choose(rng).expect("roster is non-empty").clone();
                    Formula::knows(other, p_of("u"))
                }
                _ => Formula::forall(
                    "t",
                    "T",
                    Formula::pred(PredKind::Regular, "p", vec![Term::Var("t".to_string())]),
                ),
            };
            items.push(Item::Entry(agent.clone(), entry));
        }
    }

    // Reconstruction can only see agents that occur in the characteristic
    // set, so attach untouched agents through a base entry.
    let touches = |item: &Item, agent: &AgentId| match item {
        Item::Connection(f, t) | Item::Action(f, t) => f == agent || t == agent,
        Item::Entry(owner, _) => owner == agent,
        Item::Env(_) => false,
    };
    for agent in &roster {
        if !items.iter().any(|item| touches(item, agent)) {
            items.push(Item::Entry(agent.clone(), p_of("u")));
        }
    }

    loop {
        let snm = assemble(&agents, &items, cfg);
        let phi = characteristic_formula(&characteristic_set(&snm, true));
        let subs = subformulas(&phi);
        let free = subs
            .iter()
            .filter(|f| matches!(f, Formula::Pred { .. } | Formula::Knows(..)))
            .count();
        if subs.len() <= gen.sub_guard && free <= gen.free_guard {
            return snm;
        }
        // Shrink: drop a random item that is not an agent's last trace.
        // The minimal covering set (one entry per agent) always fits the
        // guards, so a droppable item exists while we are over them.
        let droppable: Vec<usize> = (0..items.len())
            .filter(|&k| {
                roster.iter().all(|agent| {
                    !touches(&items[k], agent)
                        || items
                            .iter()
                            .enumerate()
                            .any(|(j, other)| j != k && touches(other, agent))
                })
            })
            .collect();
        let k = *droppable.choose(rng).expect("oversized samples have spare items");
        items.remove(k);
    }
}

fn group_of(rng: &mut ChaCha8Rng, roster: &[AgentId], must_have: Option<&AgentId>) -> Group {
    let mut group: Group = roster
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    if let Some(agent) = must_have {
        group.insert(agent.clone());
    }
    if group.is_empty() {
        group.insert(roster[rng.gen_range(0..roster.len())].clone());
    }
    group
}

/// A random closed query over the model's vocabulary and agents. Free of
/// common knowledge, whose three-valued verdicts the suites exercise
/// separately.
pub fn gen_query(rng: &mut ChaCha8Rng, snm: &Snm, depth: usize) -> Formula {
    let roster: Vec<AgentId> = snm.agents.iter().cloned().collect();
    let atom = |rng: &mut ChaCha8Rng| -> Formula {
        match rng.gen_range(0..5) {
            0 => p_of("u"),
            1 => p_of("v"),
            2 => Formula::prop("q"),
            3 => Formula::prop("q0"),
            _ => {
                let from = roster[rng.gen_range(0..roster.len())].clone();
                let to = roster[rng.gen_range(0..roster.len())].clone();
                let (kind, name) = if rng.gen_bool(0.5) {
                    (PredKind::Connection, "F")
                } else {
                    (PredKind::Action, "act")
                };
                Formula::pred(
                    kind,
                    name,
                    vec![
                        Term::Const(from.as_str().to_string()),
                        Term::Const(to.as_str().to_string()),
                    ],
                )
            }
        }
    };
    if depth == 0 {
        return atom(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| gen_query(rng, snm, depth - 1);
    match rng.gen_range(0..8) {
        0 => sub(rng).not(),
        1 => sub(rng).and(sub(rng)),
        2 => sub(rng).or(sub(rng)),
        3 => sub(rng).implies(sub(rng)),
        4 => Formula::knows(roster[rng.gen_range(0..roster.len())].clone(), sub(rng)),
        5 => Formula::everyone(group_of(rng, &roster, None), sub(rng)),
        6 => Formula::someone(group_of(rng, &roster, None), sub(rng)),
        _ => Formula::distributed(group_of(rng, &roster, None), sub(rng)),
    }
}

/// A query that holds in the model by construction: built from present
/// edges, environment facts, knowledge of own base entries, and boolean
/// combinations that preserve truth.
pub fn gen_true_query(rng: &mut ChaCha8Rng, snm: &Snm) -> Formula {
    let mut truths: Vec<Formula> = Vec::new();
    for (name, kind, rel) in snm
        .connections
        .iter()
        .map(|(n, r)| (n, PredKind::Connection, r))
        .chain(snm.actions.iter().map(|(n, r)| (n, PredKind::Action, r)))
    {
        for (from, to) in rel {
            truths.push(Formula::pred(
                kind,
                name,
                vec![
                    Term::Const(from.as_str().to_string()),
                    Term::Const(to.as_str().to_string()),
                ],
            ));
        }
    }
    truths.extend(snm.env().ground_formulas());
    let roster: Vec<AgentId> = snm.agents.iter().cloned().collect();
    for agent in &roster {
        for entry in snm.kb(agent).expect("declared agent").ground_formulas() {
            truths.push(Formula::knows(agent.clone(), entry.clone()));
            truths.push(Formula::someone(
                group_of(rng, &roster, Some(agent)),
                entry.clone(),
            ));
            truths.push(Formula::distributed(
                group_of(rng, &roster, Some(agent)),
                entry,
            ));
        }
    }
    // The reliable falsehoods: the never-asserted atom and knowledge of it.
    let falsehood = |rng: &mut ChaCha8Rng| -> Formula {
        if rng.gen_bool(0.5) {
            Formula::prop("q0")
        } else {
            Formula::knows(roster[rng.gen_range(0..roster.len())].clone(), Formula::prop("q0"))
        }
    };
    truths.push(falsehood(rng).not());

    let pick = |rng: &mut ChaCha8Rng, truths: &[Formula]| -> Formula {
        truths[rng.gen_range(0..truths.len())].clone()
    };
    let base = pick(rng, &truths);
    match rng.gen_range(0..5) {
        0 => base,
        1 => base.and(pick(rng, &truths)),
        2 => base.or(gen_query(rng, snm, 1)),
        3 => falsehood(rng).implies(gen_query(rng, snm, 1)),
        _ => gen_query(rng, snm, 1).implies(base),
    }
}

/// A random formula in the prover fragment: propositional atoms, boolean
/// connectives, and `K` over the given agents, with at most `max_k`
/// knowledge modalities in total (countermodels then stay small enough for
/// exhaustive semantic oracles).
pub fn gen_modal(
    rng: &mut ChaCha8Rng,
    agents: &[AgentId],
    atoms: &[&str],
    depth: usize,
    max_k: usize,
) -> Formula {
    fn go(
        rng: &mut ChaCha8Rng,
        agents: &[AgentId],
        atoms: &[&str],
        depth: usize,
        budget: &mut usize,
    ) -> Formula {
        if depth == 0 {
            return Formula::prop(atoms[rng.gen_range(0..atoms.len())]);
        }
        let roll = rng.gen_range(0..6);
        match roll {
            0 => Formula::prop(atoms[rng.gen_range(0..atoms.len())]),
            1 => go(rng, agents, atoms, depth - 1, budget).not(),
            2 => go(rng, agents, atoms, depth - 1, budget)
                .and(go(rng, agents, atoms, depth - 1, budget)),
            3 => go(rng, agents, atoms, depth - 1, budget)
                .or(go(rng, agents, atoms, depth - 1, budget)),
            4 => go(rng, agents, atoms, depth - 1, budget)
                .implies(go(rng, agents, atoms, depth - 1, budget)),
            _ => {
                if *budget == 0 {
                    Formula::prop(atoms[rng.gen_range(0..atoms.len())])
                } else {
                    *budget -= 1;
                    let agent = agents[rng.gen_range(0..agents.len())].clone();
                    Formula::knows(agent, go(rng, agents, atoms, depth - 1, budget))
                }
            }
        }
    }
    let mut budget = max_k;
    go(rng, agents, atoms, depth, &mut budget)
}

/// A random consistent premise set for the given owner, drawn from literals
/// and implications over the atom alphabet. Candidates that would
/// contradict the set so far are dropped.
pub fn gen_premises(
    rng: &mut ChaCha8Rng,
    owner: &AgentId,
    atoms: &[&str],
    size: usize,
    cfg: &ProverConfig,
) -> Vec<Formula> {
    let mut premises: Vec<Formula> = Vec::new();
    for _ in 0..size {
        let a = Formula::prop(atoms[rng.gen_range(0..atoms.len())]);
        let b = Formula::prop(atoms[rng.gen_range(0..atoms.len())]);
        let candidate = match rng.gen_range(0..4) {
            0 => a,
            1 => a.not(),
            2 => a.implies(b),
            _ => a.implies(b.not()),
        };
        let mut next = premises.clone();
        next.push(candidate);
        if deduction::consistent(owner, &next, cfg).unwrap_or(false) {
            premises = next;
        }
    }
    premises
}
