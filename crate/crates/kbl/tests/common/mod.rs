//! Shared machinery for the integration suites: a brute-force semantic
//! oracle over small serial transitive frames, a seeded corpus of generated
//! models, and per-criterion runners that the acceptance gate reuses.

// Each suite compiles this module separately and uses its own subset.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use kbl::checker::{self, CheckConfig, CommonVerdict, CostReport, Verdict};
use kbl::corpus::{self, GenConfig};
use kbl::deduction::{self, CounterModel, ProverConfig};
use kbl::kripke::{kripke_sat, DEFAULT_SIZE_GUARD};
use kbl::logic::{AgentId, Formula, Group};
use kbl::snm::Snm;
use kbl::text;
use kbl::translate::{self, characteristic_formula, characteristic_set, kt, mark_formula};

/// Propositional alphabet for prover-level instances.
pub const ATOMS: [&str; 3] = ["p", "q", "r"];

/// Seed shared by every suite so criteria that must run "on the same
/// corpus" really do see the same models.
pub const CORPUS_SEED: u64 = 42;

/// Models in the shared corpus.
pub const CORPUS_SIZE: usize = 200;

static POOL: OnceLock<Vec<Snm>> = OnceLock::new();

/// The shared seeded corpus, generated once per test binary.
pub fn shared_pool(cfg: &ProverConfig) -> &'static [Snm] {
    POOL.get_or_init(|| {
        let gen = GenConfig::default();
        let mut r = corpus::rng(CORPUS_SEED);
        (0..CORPUS_SIZE)
            .map(|_| corpus::gen_snm(&mut r, &gen, cfg))
            .collect()
    })
}

fn pick<'a, T>(r: &mut ChaCha8Rng, xs: &'a [T]) -> &'a T {
    &xs[r.gen_range(0..xs.len())]
}

fn roster(snm: &Snm) -> Vec<AgentId> {
    snm.agents.iter().cloned().collect()
}

/// Random nonempty subgroup of the roster, biased towards small groups,
/// always containing `must` when given.
fn subgroup(r: &mut ChaCha8Rng, roster: &[AgentId], must: Option<&AgentId>) -> Group {
    let mut g: Group = must.into_iter().cloned().collect();
    if g.is_empty() {
        g.insert(pick(r, roster).clone());
    }
    while g.len() < roster.len() && r.gen_bool(0.3) {
        g.insert(pick(r, roster).clone());
    }
    g
}

/// A random agent with a nonempty base, together with one of its ground
/// entries; `None` when every base in the model is empty.
fn kb_pick(r: &mut ChaCha8Rng, snm: &Snm) -> Option<(AgentId, Formula)> {
    let loaded: Vec<AgentId> = snm
        .agents
        .iter()
        .filter(|a| !snm.kb(a).expect("roster agent").is_empty())
        .cloned()
        .collect();
    if loaded.is_empty() {
        return None;
    }
    let agent = pick(r, &loaded).clone();
    let entries = snm.kb(&agent).expect("roster agent").ground_formulas();
    Some((agent, pick(r, &entries).clone()))
}

fn check(snm: &Snm, phi: &Formula, cfg: &CheckConfig) -> Verdict {
    checker::check(snm, phi, cfg).expect("generated formulas stay checkable")
}

// ---------------------------------------------------------------------------
// Small-model oracle
// ---------------------------------------------------------------------------

/// All serial transitive accessibility relations over `worlds` worlds, each
/// a vector of per-world successor bitmasks.
pub fn serial_transitive_frames(worlds: usize) -> Vec<Vec<u16>> {
    let full: u32 = (1 << worlds) - 1;
    let mut frames = Vec::new();
    'candidate: for bits in 0..(1u32 << (worlds * worlds)) {
        let rows: Vec<u16> = (0..worlds)
            .map(|w| ((bits >> (w * worlds)) & full) as u16)
            .collect();
        if rows.iter().any(|row| *row == 0) {
            continue; // not serial
        }
        for from in 0..worlds {
            for via in 0..worlds {
                // from reaches via, but via reaches a world from does not
                if rows[from] >> via & 1 == 1 && rows[via] & !rows[from] != 0 {
                    continue 'candidate;
                }
            }
        }
        frames.push(rows);
    }
    frames
}

fn bit_worlds(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |w| mask >> w & 1 == 1)
}

/// Truth at a world of a small model: one frame per agent (parallel to
/// `agents`) and one valuation bitmask per atom (parallel to `atoms`).
/// Oracle instances stay in the prover fragment, so only atoms, booleans,
/// and individual knowledge appear.
pub fn holds(
    f: &Formula,
    world: usize,
    agents: &[AgentId],
    frames: &[&Vec<u16>],
    atoms: &[&str],
    val: &[u16],
) -> bool {
    match f {
        Formula::False => false,
        Formula::Pred { name, .. } => {
            let k = atoms
                .iter()
                .position(|a| *a == name.as_str())
                .expect("oracle instances use the fixed alphabet");
            val[k] >> world & 1 == 1
        }
        Formula::Not(x) => !holds(x, world, agents, frames, atoms, val),
        Formula::And(a, b) => {
            holds(a, world, agents, frames, atoms, val)
                && holds(b, world, agents, frames, atoms, val)
        }
        Formula::Knows(i, body) => {
            let k = agents
                .iter()
                .position(|a| a == i)
                .expect("oracle instances use the fixed roster");
            bit_worlds(frames[k][world]).all(|w| holds(body, w, agents, frames, atoms, val))
        }
        other => panic!("formula outside the oracle fragment: {other}"),
    }
}

/// Is the set satisfiable at the root of some serial transitive model with
/// at most `max_worlds` worlds? Exhaustive over frames and valuations. A
/// model with fewer worlds embeds in a larger one (pad with an isolated
/// world carrying self-loops for every agent), so the search at the top
/// size alone would already be complete; smaller sizes go first because
/// most satisfiable instances resolve there.
pub fn satisfiable_small(
    set: &[Formula],
    agents: &[AgentId],
    atoms: &[&str],
    max_worlds: usize,
) -> bool {
    (1..=max_worlds).any(|w| satisfiable_at(set, agents, atoms, w))
}

fn satisfiable_at(set: &[Formula], agents: &[AgentId], atoms: &[&str], worlds: usize) -> bool {
    let frames = serial_transitive_frames(worlds);
    let vals: u32 = 1 << (worlds * atoms.len());
    let full: u32 = (1 << worlds) - 1;
    let mut choice = vec![0usize; agents.len()];
    loop {
        let chosen: Vec<&Vec<u16>> = choice.iter().map(|&k| &frames[k]).collect();
        for v in 0..vals {
            let val: Vec<u16> = (0..atoms.len())
                .map(|k| ((v >> (k * worlds)) & full) as u16)
                .collect();
            if set.iter().all(|f| holds(f, 0, agents, &chosen, atoms, &val)) {
                return true;
            }
        }
        // Odometer over one frame per agent.
        let mut k = 0;
        loop {
            if k == choice.len() {
                return false;
            }
            choice[k] += 1;
            if choice[k] < frames.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// A derivability problem paired with the world count that makes the
/// exhaustive search complete for its shape.
pub struct OracleInstance {
    pub owner: AgentId,
    pub agents: Vec<AgentId>,
    pub premises: Vec<Formula>,
    pub goal: Formula,
    pub worlds: usize,
}

/// Single-agent instances: propositional premises, at most one boxed
/// premise with a propositional body, and a goal with at most two knowledge
/// modalities. Negating the goal yields at most two diamonds; boxes never
/// create worlds, a chain or fork of two diamonds needs two fresh worlds,
/// and seriality closes with self-loops, so three worlds are exhaustive.
pub fn single_agent_instance(r: &mut ChaCha8Rng, cfg: &ProverConfig) -> OracleInstance {
    let owner = AgentId::new("i");
    let solo = std::slice::from_ref(&owner);
    let size = r.gen_range(0..=2);
    let mut premises = corpus::gen_premises(r, &owner, &ATOMS, size, cfg);
    if r.gen_bool(0.4) {
        let body = corpus::gen_modal(r, solo, &ATOMS, 1, 0);
        let mut with = premises.clone();
        with.push(Formula::knows(owner.clone(), body));
        if deduction::consistent(&owner, &with, cfg).unwrap_or(false) {
            premises = with;
        }
    }
    let goal = corpus::gen_modal(r, solo, &ATOMS, 3, 2);
    OracleInstance {
        agents: vec![owner.clone()],
        owner,
        premises,
        goal,
        worlds: 3,
    }
}

/// Two-agent instances: propositional premises for the owner and a goal
/// with at most one knowledge modality over either agent. The negated goal
/// contributes at most one diamond, so two worlds are exhaustive.
pub fn two_agent_instance(r: &mut ChaCha8Rng, cfg: &ProverConfig) -> OracleInstance {
    let a = AgentId::new("a");
    let agents = vec![a.clone(), AgentId::new("b")];
    let size = r.gen_range(0..=2);
    let premises = corpus::gen_premises(r, &a, &ATOMS, size, cfg);
    let goal = corpus::gen_modal(r, &agents, &ATOMS, 2, 1);
    OracleInstance {
        owner: a,
        agents,
        premises,
        goal,
        worlds: 2,
    }
}

/// Runs one instance both ways and asserts agreement: the tableau claims a
/// derivation exactly when no small model satisfies the self-awareness
/// closure together with the negated goal. Returns whether the goal was
/// derivable.
pub fn assert_oracle_agreement(inst: &OracleInstance, cfg: &ProverConfig) -> bool {
    let derived =
        deduction::derive(&inst.owner, &inst.premises, &inst.goal, cfg).expect("within budget");
    let mut set = deduction::closure(&inst.owner, &inst.premises);
    set.push(inst.goal.clone().not());
    let small = satisfiable_small(&set, &inst.agents, &ATOMS, inst.worlds);
    assert_eq!(
        derived,
        !small,
        "prover and small-model oracle disagree\n  owner: {}\n  premises: [{}]\n  goal: {}",
        inst.owner,
        inst.premises
            .iter()
            .map(Formula::to_string)
            .collect::<Vec<_>>()
            .join(", "),
        inst.goal
    );
    derived
}

/// Criterion runner: `total` instances split between the two shapes, every
/// one asserted against the oracle. Returns (instances, derivable count).
pub fn run_oracle_suite(seed: u64, singles: usize, pairs: usize, cfg: &ProverConfig) -> (usize, usize) {
    let mut r = corpus::rng(seed);
    let mut derivable = 0;
    for _ in 0..singles {
        let inst = single_agent_instance(&mut r, cfg);
        if assert_oracle_agreement(&inst, cfg) {
            derivable += 1;
        }
    }
    for _ in 0..pairs {
        let inst = two_agent_instance(&mut r, cfg);
        if assert_oracle_agreement(&inst, cfg) {
            derivable += 1;
        }
    }
    (singles + pairs, derivable)
}

// ---------------------------------------------------------------------------
// Axiom suites
// ---------------------------------------------------------------------------

/// Counters reported by the axiom runners.
#[derive(Debug, Default, Clone, Copy)]
pub struct SuiteStats {
    pub instances: usize,
    /// Instances whose antecedent (or established verdict) made the
    /// property bite, rather than holding vacuously.
    pub non_vacuous: usize,
}

const PURE_AGENTS: [&str; 2] = ["a", "b"];

fn pure_agents() -> Vec<AgentId> {
    PURE_AGENTS.iter().map(|a| AgentId::new(*a)).collect()
}

/// A2: knowledge distributes over implication. Each instance is asserted
/// as a theorem on the pure fragment and as a model-level truth.
pub fn run_a2(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let i = pick(&mut r, &agents).clone();
        let phi = corpus::gen_query(&mut r, snm, 1);
        let psi = corpus::gen_query(&mut r, snm, 1);
        let inst = Formula::knows(i.clone(), phi.clone().implies(psi.clone())).implies(
            Formula::knows(i.clone(), phi).implies(Formula::knows(i, psi)),
        );
        assert_eq!(
            check(snm, &inst, cfg),
            Verdict::True,
            "A2 fails on a model: {inst}"
        );

        let j = pick(&mut r, &pure).clone();
        let a = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let b = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let schema = Formula::knows(j.clone(), a.clone().implies(b.clone()))
            .implies(Formula::knows(j.clone(), a).implies(Formula::knows(j, b)));
        assert!(
            deduction::valid(&schema, &cfg.prover).expect("within budget"),
            "A2 schema is not a theorem: {schema}"
        );
        stats.instances += 1;
        stats.non_vacuous += 1;
    }
    stats
}

/// D: knowledge is consistent. Schema validity, model-level truth, and
/// consistent premise sets never deriving falsity.
pub fn run_d(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let i = pick(&mut r, &agents).clone();
        let phi = corpus::gen_query(&mut r, snm, 1);
        let inst = Formula::knows(i.clone(), phi.clone())
            .implies(Formula::knows(i, phi.not()).not());
        assert_eq!(
            check(snm, &inst, cfg),
            Verdict::True,
            "D fails on a model: {inst}"
        );

        let j = pick(&mut r, &pure).clone();
        let a = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let schema = Formula::knows(j.clone(), a.clone())
            .implies(Formula::knows(j.clone(), a.not()).not());
        assert!(
            deduction::valid(&schema, &cfg.prover).expect("within budget"),
            "D schema is not a theorem: {schema}"
        );

        let premises = corpus::gen_premises(&mut r, &j, &ATOMS, 2, &cfg.prover);
        assert!(
            !deduction::derive(&j, &premises, &Formula::False, &cfg.prover)
                .expect("within budget"),
            "consistent premises derive falsity: {premises:?}"
        );
        stats.instances += 1;
        stats.non_vacuous += 1;
    }
    stats
}

/// A4: positive introspection. Schema validity and model-level truth.
pub fn run_a4(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let i = pick(&mut r, &agents).clone();
        let phi = corpus::gen_query(&mut r, snm, 1);
        let inst = Formula::knows(i.clone(), phi.clone()).implies(Formula::knows(
            i.clone(),
            Formula::knows(i, phi),
        ));
        assert_eq!(
            check(snm, &inst, cfg),
            Verdict::True,
            "A4 fails on a model: {inst}"
        );

        let j = pick(&mut r, &pure).clone();
        let a = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let schema = Formula::knows(j.clone(), a.clone())
            .implies(Formula::knows(j.clone(), Formula::knows(j, a)));
        assert!(
            deduction::valid(&schema, &cfg.prover).expect("within budget"),
            "A4 schema is not a theorem: {schema}"
        );
        stats.instances += 1;
        stats.non_vacuous += 1;
    }
    stats
}

/// Direct evaluation over an extracted countermodel: an atom is true
/// exactly when the branch asserts it positively.
fn counter_holds(
    f: &Formula,
    w: usize,
    m: &CounterModel,
    frames: &BTreeMap<AgentId, BTreeSet<(usize, usize)>>,
) -> bool {
    match f {
        Formula::False => false,
        Formula::Pred { .. } => m
            .worlds
            .iter()
            .find(|x| x.id == w)
            .expect("world ids are compact")
            .pos
            .contains(f),
        Formula::Not(x) => !counter_holds(x, w, m, frames),
        Formula::And(a, b) => counter_holds(a, w, m, frames) && counter_holds(b, w, m, frames),
        Formula::Knows(i, body) => frames[i]
            .iter()
            .filter(|(from, _)| *from == w)
            .all(|(_, to)| counter_holds(body, *to, m, frames)),
        other => panic!("countermodel evaluation outside the prover fragment: {other}"),
    }
}

/// Negative introspection is not sound in KD4: `!K[a] p -> K[a] !K[a] p` is
/// refutable, and the refuting branch yields a concrete serial transitive
/// countermodel, revalidated here by direct evaluation of the negated
/// instance over the extracted frames. Returns the rendered witness.
pub fn a5_witness(cfg: &ProverConfig) -> String {
    let a = AgentId::new("a");
    let p = Formula::prop("p");
    let inst = Formula::knows(a.clone(), p.clone()).not().implies(Formula::knows(
        a.clone(),
        Formula::knows(a.clone(), p).not(),
    ));
    assert!(
        !deduction::valid(&inst, cfg).expect("within budget"),
        "negative introspection unexpectedly provable"
    );
    let negated = inst.not();
    let model = deduction::satisfiable_model(std::slice::from_ref(&negated), cfg)
        .expect("within budget")
        .expect("a refutable instance has a countermodel");
    let frames = model.agent_frames(std::slice::from_ref(&a));
    assert!(
        counter_holds(&negated, model.root, &model, &frames),
        "extracted branch model does not refute negative introspection:\n{}",
        model.render()
    );
    model.render()
}

/// C1: everyone-knows agrees with the conjunction of individual knowledge
/// over the group members.
pub fn run_c1(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let g = subgroup(&mut r, &agents, None);
        let phi = match kb_pick(&mut r, snm) {
            Some((_, entry)) if r.gen_bool(0.5) => entry,
            _ => corpus::gen_query(&mut r, snm, 1),
        };
        let joint = check(snm, &Formula::everyone(g.clone(), phi.clone()), cfg);
        let members = g
            .iter()
            .all(|i| check(snm, &Formula::knows(i.clone(), phi.clone()), cfg) == Verdict::True);
        let expected = if members { Verdict::True } else { Verdict::False };
        assert_eq!(
            joint, expected,
            "C1 mismatch for group {g:?} and {phi}"
        );
        stats.instances += 1;
        if joint == Verdict::True {
            stats.non_vacuous += 1;
        }
    }
    stats
}

/// C2, bounded: when the checker establishes common knowledge it reports an
/// iteration witness, and the unfolding `E_G(phi && C_G phi)` must hold;
/// when it refutes at depth k, the k-fold everyone iteration must fail.
pub fn run_c2(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let (g, phi) = match kb_pick(&mut r, snm) {
            // Bias towards an owner's own entry: those instances establish
            // common knowledge for the singleton group and exercise the
            // non-vacuous branch.
            Some((i, entry)) if r.gen_bool(0.7) => {
                let widen = r.gen_bool(0.3);
                let g = if widen {
                    subgroup(&mut r, &agents, Some(&i))
                } else {
                    std::iter::once(i).collect()
                };
                (g, entry)
            }
            _ => (
                subgroup(&mut r, &agents, None),
                corpus::gen_query(&mut r, snm, 1),
            ),
        };
        match checker::check_common(snm, &g, &phi, cfg).expect("generated formulas stay checkable")
        {
            CommonVerdict::True { witness, .. } => {
                stats.non_vacuous += 1;
                let unfolded = Formula::everyone(g.clone(), phi.clone().and(witness));
                assert_eq!(
                    check(snm, &unfolded, cfg),
                    Verdict::True,
                    "C2 witness unfolding fails for {phi}"
                );
                let consequent = Formula::everyone(
                    g.clone(),
                    phi.clone().and(Formula::common(g.clone(), phi.clone())),
                );
                assert_eq!(
                    check(snm, &consequent, cfg),
                    Verdict::True,
                    "C2 consequent fails for {phi}"
                );
            }
            CommonVerdict::False { k } => {
                let mut em = phi.clone();
                for _ in 0..k {
                    em = Formula::everyone(g.clone(), em);
                }
                assert_eq!(
                    check(snm, &em, cfg),
                    Verdict::False,
                    "refutation depth {k} does not fail for {phi}"
                );
            }
            CommonVerdict::BoundExhausted { .. } => {}
        }
        stats.instances += 1;
    }
    assert!(
        stats.non_vacuous >= n / 5,
        "too few established common-knowledge instances: {} of {n}",
        stats.non_vacuous
    );
    stats
}

/// D1: singleton distributed knowledge coincides with individual knowledge,
/// both on models and at the deduction level.
pub fn run_d1(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let (i, phi) = match kb_pick(&mut r, snm) {
            Some(found) if r.gen_bool(0.5) => found,
            _ => (
                pick(&mut r, &agents).clone(),
                corpus::gen_query(&mut r, snm, 1),
            ),
        };
        let solo: Group = std::iter::once(i.clone()).collect();
        let via_d = check(snm, &Formula::distributed(solo, phi.clone()), cfg);
        let via_k = check(snm, &Formula::knows(i, phi.clone()), cfg);
        assert_eq!(via_d, via_k, "D1 mismatch for {phi}");

        let j = pick(&mut r, &pure).clone();
        let premises = corpus::gen_premises(&mut r, &j, &ATOMS, 2, &cfg.prover);
        let goal = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let grouped = deduction::derive_group(
            &[(j.clone(), premises.clone())],
            &goal,
            &cfg.prover,
        )
        .expect("within budget");
        let single =
            deduction::derive(&j, &premises, &goal, &cfg.prover).expect("within budget");
        assert_eq!(grouped, single, "singleton pooling diverges for {goal}");
        stats.instances += 1;
        if via_d == Verdict::True {
            stats.non_vacuous += 1;
        }
    }
    stats
}

/// D2: distributed knowledge is monotone in the group.
pub fn run_d2(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let (g, phi) = match kb_pick(&mut r, snm) {
            // An owner's entry keeps the antecedent true, so monotonicity
            // is exercised rather than vacuous.
            Some((i, entry)) if r.gen_bool(0.6) => {
                (std::iter::once(i).collect::<Group>(), entry)
            }
            _ => (
                subgroup(&mut r, &agents, None),
                corpus::gen_query(&mut r, snm, 1),
            ),
        };
        let mut wide = g.clone();
        for a in &agents {
            if r.gen_bool(0.5) {
                wide.insert(a.clone());
            }
        }
        let narrow = check(snm, &Formula::distributed(g, phi.clone()), cfg);
        if narrow == Verdict::True {
            stats.non_vacuous += 1;
            assert_eq!(
                check(snm, &Formula::distributed(wide.clone(), phi.clone()), cfg),
                Verdict::True,
                "D2 fails: widening to {wide:?} loses {phi}"
            );
        }
        stats.instances += 1;
    }
    assert!(
        stats.non_vacuous >= n / 5,
        "too few true antecedents for D2: {} of {n}",
        stats.non_vacuous
    );
    stats
}

/// DA2: distributed knowledge distributes over implication.
pub fn run_da2(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let g = subgroup(&mut r, &agents, None);
        let phi = corpus::gen_query(&mut r, snm, 1);
        let psi = corpus::gen_query(&mut r, snm, 1);
        let inst = Formula::distributed(g.clone(), phi.clone().implies(psi.clone())).implies(
            Formula::distributed(g.clone(), phi).implies(Formula::distributed(g, psi)),
        );
        assert_eq!(
            check(snm, &inst, cfg),
            Verdict::True,
            "DA2 fails on a model: {inst}"
        );

        let pg: Group = pure.iter().cloned().collect();
        let a = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let b = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let schema = Formula::distributed(pg.clone(), a.clone().implies(b.clone())).implies(
            Formula::distributed(pg.clone(), a).implies(Formula::distributed(pg, b)),
        );
        assert!(
            deduction::valid(&schema, &cfg.prover).expect("within budget"),
            "DA2 schema is not a theorem: {schema}"
        );
        stats.instances += 1;
        stats.non_vacuous += 1;
    }
    stats
}

/// DA4: positive introspection for distributed knowledge.
pub fn run_da4(pool: &[Snm], seed: u64, n: usize, cfg: &CheckConfig) -> SuiteStats {
    let mut r = corpus::rng(seed);
    let pure = pure_agents();
    let mut stats = SuiteStats::default();
    for k in 0..n {
        let snm = &pool[k % pool.len()];
        let agents = roster(snm);
        let g = subgroup(&mut r, &agents, None);
        let phi = corpus::gen_query(&mut r, snm, 1);
        let inst = Formula::distributed(g.clone(), phi.clone()).implies(Formula::distributed(
            g.clone(),
            Formula::distributed(g, phi),
        ));
        assert_eq!(
            check(snm, &inst, cfg),
            Verdict::True,
            "DA4 fails on a model: {inst}"
        );

        let pg: Group = pure.iter().cloned().collect();
        let a = corpus::gen_modal(&mut r, &pure, &ATOMS, 2, 1);
        let schema = Formula::distributed(pg.clone(), a.clone()).implies(Formula::distributed(
            pg.clone(),
            Formula::distributed(pg, a),
        ));
        assert!(
            deduction::valid(&schema, &cfg.prover).expect("within budget"),
            "DA4 schema is not a theorem: {schema}"
        );
        stats.instances += 1;
        stats.non_vacuous += 1;
    }
    stats
}

// ---------------------------------------------------------------------------
// Preservation, round trip, consistency, bounds
// ---------------------------------------------------------------------------

/// Counters from the preservation runner.
#[derive(Debug, Default, Clone, Copy)]
pub struct PreservationOutcome {
    pub models: usize,
    pub formulas: usize,
    /// Instances already satisfied at the distinguished state of the
    /// unmarked translation.
    pub mirrored: usize,
}

/// Truth preservation through the translations, on construction-true
/// queries (formulas built from the model's own material; knowledge of
/// facts outside a model is not preserved by design, since the canonical
/// valuation is closed-world over the characteristic set).
///
/// Forward: a query true in the network holds at some state of the plain
/// translation; the distinguished state is named when the search fails.
/// Inverse: the marked query holds at the distinguished state of the
/// marked translation, and that satisfaction transfers back to the
/// network.
pub fn run_preservation(
    models: &[Snm],
    seed: u64,
    per_model: usize,
    cfg: &CheckConfig,
) -> PreservationOutcome {
    let mut r = corpus::rng(seed);
    let mut out = PreservationOutcome::default();
    for snm in models {
        let plain = kt(snm, false, DEFAULT_SIZE_GUARD, &cfg.prover)
            .expect("guarded corpus models translate");
        let marked = kt(snm, true, DEFAULT_SIZE_GUARD, &cfg.prover)
            .expect("guarded corpus models translate");
        for _ in 0..per_model {
            let phi = corpus::gen_true_query(&mut r, snm);
            assert_eq!(
                check(snm, &phi, cfg),
                Verdict::True,
                "generator contract: {phi} must hold in its source model"
            );

            let dist = &plain.distinguished;
            let state = std::iter::once(dist)
                .chain(plain.canonical.model.states.iter())
                .find(|s| {
                    kripke_sat(&plain.canonical.model, s, &phi)
                        .expect("queries stay in the model-checking fragment")
                });
            let Some(state) = state else {
                panic!(
                    "{phi} holds in the network but at no state of its translation \
                     (distinguished state {dist})"
                );
            };
            if state == dist {
                out.mirrored += 1;
            }

            let at_dist = kripke_sat(
                &marked.canonical.model,
                &marked.distinguished,
                &mark_formula(&phi),
            )
            .expect("queries stay in the model-checking fragment");
            assert!(
                at_dist,
                "{phi} (marked) fails at the distinguished state {} of the marked translation",
                marked.distinguished
            );
            assert_eq!(
                check(snm, &phi, cfg),
                Verdict::True,
                "satisfaction at {} does not transfer back for {phi}",
                marked.distinguished
            );
            out.formulas += 1;
        }
        out.models += 1;
    }
    out
}

/// Round trip: inverting the marked translation reproduces the source model
/// up to policies and relation names with no edges.
pub fn run_round_trip(models: &[Snm], cfg: &ProverConfig) -> usize {
    for (k, snm) in models.iter().enumerate() {
        let marked =
            kt(snm, true, DEFAULT_SIZE_GUARD, cfg).expect("guarded corpus models translate");
        let back = translate::kripke_to_snm(&marked).expect("marked translations invert");
        assert!(
            translate::translated_eq(snm, &back),
            "round trip drifted for corpus model {k}\n--- source ---\n{}--- rebuilt ---\n{}",
            text::print_snm(snm),
            text::print_snm(&back)
        );
    }
    models.len()
}

/// Characteristic-formula consistency: no corpus model (nor the worked
/// example) has a refutable characteristic formula, marked or plain.
pub fn run_consistency(models: &[Snm], cfg: &ProverConfig) -> usize {
    let example = corpus::example_network();
    let mut count = 0;
    for snm in models.iter().chain(std::iter::once(&example)) {
        for marked in [false, true] {
            let phi = characteristic_formula(&characteristic_set(snm, marked));
            assert!(
                !deduction::valid(&phi.clone().not(), cfg).expect("within budget"),
                "characteristic formula refuted from empty premises: {phi}"
            );
            assert!(
                deduction::satisfiable(std::slice::from_ref(&phi), cfg).expect("within budget"),
                "characteristic formula unsatisfiable: {phi}"
            );
        }
        count += 1;
    }
    count
}

/// Bench-style rows: the worked example first, then seeded corpus queries
/// alternating between construction-true and arbitrary shapes.
pub fn bound_rows(seed: u64, rows: usize, cfg: &CheckConfig) -> Vec<(String, CostReport)> {
    let mut out = Vec::new();
    let example = corpus::example_network();
    let phi = text::parse_formula("K[Charlie] loc(Bob, pub, 1)", &example.vocab)
        .expect("example query parses");
    out.push((
        "example".to_string(),
        checker::cost_report(&example, &phi, cfg).expect("example stays checkable"),
    ));
    let mut r = corpus::rng(seed);
    let gen = GenConfig::default();
    while out.len() < rows {
        let snm = corpus::gen_snm(&mut r, &gen, &cfg.prover);
        let phi = if out.len() % 2 == 0 {
            corpus::gen_true_query(&mut r, &snm)
        } else {
            corpus::gen_query(&mut r, &snm, 2)
        };
        let label = format!("gen-{}", out.len());
        out.push((
            label,
            checker::cost_report(&snm, &phi, cfg).expect("generated rows stay checkable"),
        ));
    }
    out
}

/// Bound inequality: every row with outer knowledge subformulas must be
/// strictly cheaper on the network side. Returns (rows, rows with outer
/// members).
pub fn assert_bounds(rows: &[(String, CostReport)]) -> (usize, usize) {
    let mut with_outer = 0;
    for (label, report) in rows {
        match checker::snm_strictly_cheaper(report) {
            Some(strict) => {
                with_outer += 1;
                assert!(
                    strict,
                    "bound inequality fails on row {label}: {} >= {} for {}",
                    report.snm_bound, report.kripke_bound, report.formula
                );
            }
            None => assert!(
                report.outer.is_empty(),
                "row {label} has outer members but no verdict on the inequality"
            ),
        }
    }
    (rows.len(), with_outer)
}

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

fn repo_file(rel: &str) -> String {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../..").to_string() + "/" + rel;
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {path}: {e}"))
}

/// The shipped network example with the queries it is documented to
/// satisfy. Returns the elapsed wall time.
pub fn run_examples(cfg: &CheckConfig) -> Duration {
    let start = Instant::now();
    let snm = text::parse_snm(&repo_file("models/fig2.snm"), &cfg.prover)
        .expect("shipped network file parses");
    for query in ["K[Alice] post(Bob, pub, 1)", "K[Alice] loc(Bob, pub, 1)"] {
        let phi = text::parse_formula(query, &snm.vocab).expect("example query parses");
        assert_eq!(check(&snm, &phi, cfg), Verdict::True, "{query} must hold");
    }
    let doc = text::parse_kripke(&repo_file("models/fig1.kripke"))
        .expect("shipped Kripke file parses");
    for (state, query) in [("s0", "K[a] p(a)"), ("s1", "!K[b] p(a)")] {
        let phi = text::parse_formula_free(query).expect("example query parses");
        assert!(
            kripke_sat(&doc.model, state, &phi).expect("states exist"),
            "{query} must hold at {state}"
        );
    }
    start.elapsed()
}

/// The worked cost numbers on the shipped network file.
pub fn run_worked_numbers(cfg: &CheckConfig) -> CostReport {
    let snm = text::parse_snm(&repo_file("models/fig2.snm"), &cfg.prover)
        .expect("shipped network file parses");
    let phi = text::parse_formula("K[Charlie] loc(Bob, pub, 1)", &snm.vocab)
        .expect("example query parses");
    let report = checker::cost_report(&snm, &phi, cfg).expect("example stays checkable");
    assert_eq!(report.snm_bound, 21, "network-side bound");
    assert_eq!(report.characteristic_size, 30, "characteristic size");
    assert_eq!(report.kripke_bound, 1_073_741_829, "translation-side bound");
    report
}
