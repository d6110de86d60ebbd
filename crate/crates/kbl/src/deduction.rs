//! KD4 derivation by tableau over serial, transitive frames.
//!
//! `derive` asks whether a knowledge base proves a goal. Premises are closed
//! under self-awareness (an agent knows what is in its own base: `phi` in the
//! base contributes `K[i] phi` as well), the goal is negated, and the prover
//! searches for a satisfying configuration. A closed tableau means the goal
//! is derivable; an open branch yields a countermodel.
//!
//! Modalities are indexed by agent *sets*: `K[i]` is the singleton box,
//! distributed knowledge `D[G]` is the box along the intersection of the
//! members' relations. A box with index `T` travels across an edge with
//! index `S` exactly when `T` is a subset of `S` (an intersection edge is an
//! edge for every cover), and it travels as both `psi` and `box psi`, which
//! is what makes the frames transitive. Seriality holds for the individual
//! relations only, so fresh successors are forced just for singleton boxes.
//!
//! Termination combines a step budget with ancestor blocking: a successor
//! obligation identical to one already on the current path (same edge index,
//! same seed set) is folded back to that ancestor instead of recursing. The
//! satisfiability verdict is justified by unravelling the fold into an
//! infinite tree; see [`CounterModel`] for the caveat on reading the finite
//! artifact when edge indexes mix groups.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::logic::{AgentId, Formula, PredKind, Term};

/// Modal edge and box index: the set of agents whose relations are
/// intersected. Singletons recover the individual `K[i]`.
pub type Index = BTreeSet<AgentId>;

/// Environment variable consulted by [`ProverConfig::from_env`] for the
/// step budget.
pub const STEP_BUDGET_ENV: &str = "KBL_STEP_BUDGET";

/// Default number of rule applications before the prover gives up.
pub const DEFAULT_STEP_BUDGET: u64 = 200_000;

/// Prover resource limits.
#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub step_budget: u64,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

impl ProverConfig {
    /// Default configuration, with the budget overridable through
    /// [`STEP_BUDGET_ENV`].
    pub fn from_env() -> Self {
        let mut cfg = ProverConfig::default();
        if let Ok(v) = std::env::var(STEP_BUDGET_ENV) {
            if let Ok(n) = v.trim().parse::<u64>() {
                if n > 0 {
                    cfg.step_budget = n;
                }
            }
        }
        cfg
    }
}

/// Errors from the derivation engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeductionError {
    #[error("derivation requires ground input: {reason}")]
    NotGround { reason: String },
    #[error("common knowledge is outside the derivation system")]
    CommonUnsupported,
    #[error("step budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
}

/// One world of an open-branch countermodel.
#[derive(Debug, Clone)]
pub struct CounterWorld {
    pub id: usize,
    /// Atoms the branch asserts at this world.
    pub pos: Vec<Formula>,
    /// Atoms the branch denies at this world.
    pub neg: Vec<Formula>,
}

/// Countermodel extracted from an open tableau branch.
///
/// Worlds and indexed edges come straight from the branch; loop-folded edges
/// point back to an ancestor with an identical obligation. When every edge
/// index is a singleton the structure, transitively closed per agent and
/// completed with self-loops for successor-free worlds, is a genuine serial
/// transitive model of the branch. When group indexes mix, the verdict still
/// stands (the fold unravels into an infinite tree model), but the finite
/// rendering may identify worlds that the tree keeps apart.
#[derive(Debug, Clone, Default)]
pub struct CounterModel {
    pub worlds: Vec<CounterWorld>,
    pub edges: Vec<(usize, Index, usize)>,
    pub root: usize,
}

impl CounterModel {
    /// Renumbers worlds to `0..n` in creation order.
    fn compact(mut self) -> Self {
        let mut remap = BTreeMap::new();
        for (k, w) in self.worlds.iter().enumerate() {
            remap.insert(w.id, k);
        }
        for w in &mut self.worlds {
            w.id = remap[&w.id];
        }
        for (f, _, t) in &mut self.edges {
            *f = remap[f];
            *t = remap[t];
        }
        self.root = remap[&self.root];
        self
    }

    /// Per-agent accessibility: indexed edges materialized for each member,
    /// transitively closed, with self-loops added where an agent would
    /// otherwise lack a successor. Worlds without singleton box constraints
    /// are unconstrained, so the self-loops are harmless.
    pub fn agent_frames(&self, agents: &[AgentId]) -> BTreeMap<AgentId, BTreeSet<(usize, usize)>> {
        let ids: Vec<usize> = self.worlds.iter().map(|w| w.id).collect();
        let mut frames = BTreeMap::new();
        for agent in agents {
            let mut rel: BTreeSet<(usize, usize)> = BTreeSet::new();
            for (f, idx, t) in &self.edges {
                if idx.contains(agent) {
                    rel.insert((*f, *t));
                }
            }
            loop {
                let mut grew = false;
                let pairs: Vec<_> = rel.iter().cloned().collect();
                for &(a, b) in &pairs {
                    for &(c, d) in &pairs {
                        if b == c && rel.insert((a, d)) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            for &w in &ids {
                if !rel.iter().any(|&(f, _)| f == w) {
                    rel.insert((w, w));
                }
            }
            frames.insert(agent.clone(), rel);
        }
        frames
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for w in &self.worlds {
            let mut parts: Vec<String> = w.pos.iter().map(|f| f.to_string()).collect();
            parts.extend(w.neg.iter().map(|f| format!("!{f}")));
            let marker = if w.id == self.root { " (root)" } else { "" };
            out.push_str(&format!("w{}{}: {}\n", w.id, marker, parts.join(", ")));
        }
        for (f, idx, t) in &self.edges {
            let agents: Vec<&str> = idx.iter().map(AgentId::as_str).collect();
            out.push_str(&format!("w{f} -[{}]-> w{t}\n", agents.join(",")));
        }
        out
    }
}

/// Ground atom in solved form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Atom {
    kind: PredKind,
    name: String,
    args: Vec<String>,
}

impl Atom {
    fn to_formula(&self) -> Formula {
        Formula::pred(
            self.kind,
            self.name.clone(),
            self.args.iter().map(|a| Term::Const(a.clone())).collect(),
        )
    }
}

/// Negation normal form with set-indexed boxes and diamonds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Nnf {
    Top,
    Bot,
    Lit(bool, Atom),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Nec(Index, Box<Nnf>),
    Pos(Index, Box<Nnf>),
}

impl Nnf {
    fn weight(&self) -> u64 {
        match self {
            Nnf::Top | Nnf::Bot | Nnf::Lit(..) => 1,
            Nnf::And(a, b) | Nnf::Or(a, b) => 1 + a.weight() + b.weight(),
            Nnf::Nec(_, x) | Nnf::Pos(_, x) => 1 + x.weight(),
        }
    }
}

fn singleton(agent: &AgentId) -> Index {
    let mut s = BTreeSet::new();
    s.insert(agent.clone());
    s
}

/// Translates a ground, `E`/`S`-expanded formula into NNF under the given
/// polarity.
fn to_nnf(f: &Formula, positive: bool) -> Result<Nnf, DeductionError> {
    match f {
        Formula::False => Ok(if positive { Nnf::Bot } else { Nnf::Top }),
        Formula::Pred { kind, name, args } => {
            let mut consts = Vec::with_capacity(args.len());
            for a in args {
                match a {
                    Term::Const(c) => consts.push(c.clone()),
                    other => {
                        return Err(DeductionError::NotGround {
                            reason: format!("term {other} in {name} is not a constant"),
                        })
                    }
                }
            }
            Ok(Nnf::Lit(
                positive,
                Atom {
                    kind: *kind,
                    name: name.clone(),
                    args: consts,
                },
            ))
        }
        Formula::Not(x) => to_nnf(x, !positive),
        Formula::And(a, b) => {
            let na = to_nnf(a, positive)?;
            let nb = to_nnf(b, positive)?;
            Ok(if positive {
                Nnf::And(Box::new(na), Box::new(nb))
            } else {
                Nnf::Or(Box::new(na), Box::new(nb))
            })
        }
        Formula::Forall { .. } => Err(DeductionError::NotGround {
            reason: "quantifier present; ground the formula first".to_string(),
        }),
        Formula::Knows(i, body) => {
            let inner = to_nnf(body, positive)?;
            Ok(if positive {
                Nnf::Nec(singleton(i), Box::new(inner))
            } else {
                Nnf::Pos(singleton(i), Box::new(inner))
            })
        }
        Formula::Everyone(..) | Formula::Someone(..) => {
            // Callers expand these; keep the translation total anyway.
            to_nnf(&f.expand_derived(), positive)
        }
        Formula::Common(..) => Err(DeductionError::CommonUnsupported),
        Formula::Distributed(g, body) => {
            let inner = to_nnf(body, positive)?;
            Ok(if positive {
                Nnf::Nec(g.clone(), Box::new(inner))
            } else {
                Nnf::Pos(g.clone(), Box::new(inner))
            })
        }
    }
}

/// Saturated-world working state.
#[derive(Debug, Clone, Default)]
struct WorldState {
    seen: BTreeSet<Nnf>,
    ors: BTreeSet<Nnf>,
    pos_lits: BTreeSet<Atom>,
    neg_lits: BTreeSet<Atom>,
    clash: Option<String>,
    necs: BTreeMap<Index, BTreeSet<Nnf>>,
    poss: BTreeSet<(Index, Nnf)>,
}

impl WorldState {
    fn add(&mut self, f: Nnf, ctx: &mut Ctx) -> Result<(), DeductionError> {
        ctx.spend()?;
        if !self.seen.insert(f.clone()) {
            return Ok(());
        }
        match f {
            Nnf::Top => {}
            Nnf::Bot => self.clash = Some("false".to_string()),
            Nnf::Lit(true, atom) => {
                if self.neg_lits.contains(&atom) {
                    self.clash = Some(atom.to_formula().to_string());
                }
                self.pos_lits.insert(atom);
            }
            Nnf::Lit(false, atom) => {
                if self.pos_lits.contains(&atom) {
                    self.clash = Some(atom.to_formula().to_string());
                }
                self.neg_lits.insert(atom);
            }
            Nnf::And(a, b) => {
                self.add(*a, ctx)?;
                self.add(*b, ctx)?;
            }
            Nnf::Or(..) => {
                self.ors.insert(f);
            }
            Nnf::Nec(idx, body) => {
                self.necs.entry(idx).or_default().insert(*body);
            }
            Nnf::Pos(idx, body) => {
                self.poss.insert((idx, *body));
            }
        }
        Ok(())
    }

    /// Smallest pending disjunction, by weight then structure.
    fn pick_or(&self) -> Option<Nnf> {
        self.ors
            .iter()
            .min_by_key(|f| (f.weight(), (*f).clone()))
            .cloned()
    }
}

struct PathEntry {
    idx: Index,
    seed: BTreeSet<Nnf>,
    world: usize,
}

struct Ctx {
    budget: u64,
    limit: u64,
    next_id: usize,
    trace: Option<String>,
}

impl Ctx {
    fn spend(&mut self) -> Result<(), DeductionError> {
        if self.budget == 0 {
            return Err(DeductionError::BudgetExhausted { budget: self.limit });
        }
        self.budget -= 1;
        Ok(())
    }

    fn fresh_id(&mut self) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn log(&mut self, depth: usize, line: &str) {
        if let Some(buf) = &mut self.trace {
            for _ in 0..depth {
                buf.push_str("  ");
            }
            buf.push_str(line);
            buf.push('\n');
        }
    }
}

struct LocalModel {
    worlds: Vec<CounterWorld>,
    edges: Vec<(usize, Index, usize)>,
}

fn index_label(idx: &Index) -> String {
    let agents: Vec<&str> = idx.iter().map(AgentId::as_str).collect();
    agents.join(",")
}

fn seed_label(seed: &BTreeSet<Nnf>) -> String {
    format!("{} formulas", seed.len())
}

/// Propagation into a successor reached along an `s`-indexed edge: boxes
/// whose index covers the edge contribute body and box alike.
fn successor_seed(w: &WorldState, s: &Index, extra: Option<&Nnf>) -> BTreeSet<Nnf> {
    let mut seed = BTreeSet::new();
    if let Some(e) = extra {
        seed.insert(e.clone());
    }
    for (t, bodies) in &w.necs {
        if t.is_subset(s) {
            for body in bodies {
                seed.insert(body.clone());
                seed.insert(Nnf::Nec(t.clone(), Box::new(body.clone())));
            }
        }
    }
    seed
}

fn solve(
    seed: BTreeSet<Nnf>,
    my_id: usize,
    path: &mut Vec<PathEntry>,
    ctx: &mut Ctx,
) -> Result<Option<LocalModel>, DeductionError> {
    let mut w = WorldState::default();
    for f in seed {
        w.add(f, ctx)?;
    }
    expand(w, my_id, path, ctx)
}

fn expand(
    mut w: WorldState,
    my_id: usize,
    path: &mut Vec<PathEntry>,
    ctx: &mut Ctx,
) -> Result<Option<LocalModel>, DeductionError> {
    let depth = path.len();
    if let Some(reason) = &w.clash {
        ctx.log(depth, &format!("w{my_id} closed on {reason}"));
        return Ok(None);
    }
    if let Some(or) = w.pick_or() {
        w.ors.remove(&or);
        let (a, b) = match &or {
            Nnf::Or(a, b) => ((**a).clone(), (**b).clone()),
            _ => unreachable!("ors holds only disjunctions"),
        };
        ctx.log(depth, &format!("w{my_id} branches"));
        let mut left = w.clone();
        left.add(a, ctx)?;
        if let Some(model) = expand(left, my_id, path, ctx)? {
            return Ok(Some(model));
        }
        w.add(b, ctx)?;
        return expand(w, my_id, path, ctx);
    }

    // Saturated and clash-free: discharge modal obligations.
    let entry = CounterWorld {
        id: my_id,
        pos: w.pos_lits.iter().map(Atom::to_formula).collect(),
        neg: w.neg_lits.iter().map(Atom::to_formula).collect(),
    };
    ctx.log(
        depth,
        &format!(
            "w{my_id} saturated: {}",
            if entry.pos.is_empty() && entry.neg.is_empty() {
                "no literals".to_string()
            } else {
                entry
                    .pos
                    .iter()
                    .map(|f| f.to_string())
                    .chain(entry.neg.iter().map(|f| format!("!{f}")))
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        ),
    );
    let mut model = LocalModel {
        worlds: vec![entry],
        edges: Vec::new(),
    };

    let obligations: Vec<(Index, BTreeSet<Nnf>)> = {
        let mut out = Vec::new();
        for (idx, body) in &w.poss {
            out.push((idx.clone(), successor_seed(&w, idx, Some(body))));
        }
        // Seriality of the individual relations: an agent with box
        // constraints and no diamond edge of its own still has a successor.
        for (idx, bodies) in &w.necs {
            if idx.len() != 1 || bodies.is_empty() {
                continue;
            }
            let agent = idx.iter().next().expect("singleton index");
            if w.poss.iter().any(|(s, _)| s.contains(agent)) {
                continue;
            }
            out.push((idx.clone(), successor_seed(&w, idx, None)));
        }
        out
    };

    for (idx, seed) in obligations {
        if let Some(back) = path
            .iter()
            .rev()
            .find(|e| e.idx == idx && e.seed == seed)
            .map(|e| e.world)
        {
            ctx.log(
                depth,
                &format!("w{my_id} -[{}]-> loops to w{back}", index_label(&idx)),
            );
            model.edges.push((my_id, idx, back));
            continue;
        }
        ctx.spend()?;
        let child_id = ctx.fresh_id();
        ctx.log(
            depth,
            &format!(
                "w{my_id} -[{}]-> w{child_id} ({})",
                index_label(&idx),
                seed_label(&seed)
            ),
        );
        path.push(PathEntry {
            idx: idx.clone(),
            seed: seed.clone(),
            world: child_id,
        });
        let child = solve(seed, child_id, path, ctx)?;
        path.pop();
        match child {
            None => {
                ctx.log(depth, &format!("w{my_id} closed: successor failed"));
                return Ok(None);
            }
            Some(sub) => {
                model.worlds.extend(sub.worlds);
                model.edges.extend(sub.edges);
                model.edges.push((my_id, idx, child_id));
            }
        }
    }
    Ok(Some(model))
}

fn prepare(formulas: &[Formula]) -> Result<BTreeSet<Nnf>, DeductionError> {
    let mut seed = BTreeSet::new();
    for f in formulas {
        if !f.is_ground() {
            return Err(DeductionError::NotGround {
                reason: format!("{f} contains variables, quantifiers, or function terms"),
            });
        }
        seed.insert(to_nnf(&f.expand_derived(), true)?);
    }
    Ok(seed)
}

fn run(
    formulas: &[Formula],
    cfg: &ProverConfig,
    trace: bool,
) -> Result<(Option<CounterModel>, Option<String>), DeductionError> {
    let seed = prepare(formulas)?;
    let mut ctx = Ctx {
        budget: cfg.step_budget,
        limit: cfg.step_budget,
        next_id: 0,
        trace: if trace { Some(String::new()) } else { None },
    };
    let root = ctx.fresh_id();
    let mut path = Vec::new();
    let outcome = solve(seed, root, &mut path, &mut ctx)?;
    let model = outcome.map(|m| {
        CounterModel {
            worlds: m.worlds,
            edges: m.edges,
            root,
        }
        .compact()
    });
    Ok((model, ctx.trace.take()))
}

/// Is the conjunction of the formulas satisfiable over serial, transitive
/// frames?
pub fn satisfiable(formulas: &[Formula], cfg: &ProverConfig) -> Result<bool, DeductionError> {
    Ok(run(formulas, cfg, false)?.0.is_some())
}

/// Like [`satisfiable`], returning the open-branch countermodel when one
/// exists.
pub fn satisfiable_model(
    formulas: &[Formula],
    cfg: &ProverConfig,
) -> Result<Option<CounterModel>, DeductionError> {
    Ok(run(formulas, cfg, false)?.0)
}

/// Is the formula a KD4 theorem?
pub fn valid(goal: &Formula, cfg: &ProverConfig) -> Result<bool, DeductionError> {
    Ok(!satisfiable(std::slice::from_ref(&goal.clone().not()), cfg)?)
}

/// Self-awareness closure of an agent's premises: each formula is also
/// wrapped under the owner's knowledge modality.
pub fn closure(owner: &AgentId, premises: &[Formula]) -> Vec<Formula> {
    let mut out = premises.to_vec();
    out.extend(
        premises
            .iter()
            .map(|f| Formula::knows(owner.clone(), f.clone())),
    );
    out
}

/// Does the owner's knowledge base derive the goal?
pub fn derive(
    owner: &AgentId,
    premises: &[Formula],
    goal: &Formula,
    cfg: &ProverConfig,
) -> Result<bool, DeductionError> {
    Ok(derive_model(owner, premises, goal, cfg)?.is_none())
}

/// Like [`derive`], returning the countermodel that witnesses a failed
/// derivation.
pub fn derive_model(
    owner: &AgentId,
    premises: &[Formula],
    goal: &Formula,
    cfg: &ProverConfig,
) -> Result<Option<CounterModel>, DeductionError> {
    let mut formulas = closure(owner, premises);
    formulas.push(goal.clone().not());
    satisfiable_model(&formulas, cfg)
}

/// Like [`derive`], also rendering a textual tableau trace.
pub fn derive_trace(
    owner: &AgentId,
    premises: &[Formula],
    goal: &Formula,
    cfg: &ProverConfig,
) -> Result<(bool, String), DeductionError> {
    let mut formulas = closure(owner, premises);
    formulas.push(goal.clone().not());
    let (model, trace) = run(&formulas, cfg, true)?;
    let mut text = trace.unwrap_or_default();
    match &model {
        None => text.push_str("tableau closed; goal derivable\n"),
        Some(m) => {
            text.push_str("open branch; goal not derivable\n");
            text.push_str(&m.render());
        }
    }
    Ok((model.is_none(), text))
}

/// Distributed derivation: the pooled premises of several agents, each
/// closed under its own self-awareness.
pub fn derive_group(
    parts: &[(AgentId, Vec<Formula>)],
    goal: &Formula,
    cfg: &ProverConfig,
) -> Result<bool, DeductionError> {
    let mut formulas = Vec::new();
    for (owner, premises) in parts {
        formulas.extend(closure(owner, premises));
    }
    formulas.push(goal.clone().not());
    Ok(!satisfiable(&formulas, cfg)?)
}

/// Like [`derive_group`], also rendering a textual tableau trace.
pub fn derive_group_trace(
    parts: &[(AgentId, Vec<Formula>)],
    goal: &Formula,
    cfg: &ProverConfig,
) -> Result<(bool, String), DeductionError> {
    let mut formulas = Vec::new();
    for (owner, premises) in parts {
        formulas.extend(closure(owner, premises));
    }
    formulas.push(goal.clone().not());
    let (model, trace) = run(&formulas, cfg, true)?;
    let mut text = trace.unwrap_or_default();
    match &model {
        None => text.push_str("tableau closed; goal derivable\n"),
        Some(m) => {
            text.push_str("open branch; goal not derivable\n");
            text.push_str(&m.render());
        }
    }
    Ok((model.is_none(), text))
}

/// Is the self-awareness closure of the premises satisfiable?
pub fn consistent(
    owner: &AgentId,
    premises: &[Formula],
    cfg: &ProverConfig,
) -> Result<bool, DeductionError> {
    satisfiable(&closure(owner, premises), cfg)
}
