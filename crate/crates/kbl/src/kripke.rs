//! Explicit Kripke models and canonical model construction.
//!
//! [`kripke_sat`] evaluates ground formulas over arbitrary finite models;
//! nothing here assumes the frame is serial or transitive, and
//! [`frame_properties`] exists to audit those properties where they matter.
//! Group modalities are evaluated directly: `E`/`S` over the members,
//! `C[G]` over the worlds reachable in one or more steps along the union of
//! the members' relations, and `D[G]` along their intersection.
//!
//! [`canonical_model`] builds the filtration-style canonical model of a
//! consistent formula: states are the maximal consistent subsets of the
//! closure `Sub+(phi)` (each subformula or its negation), an `i`-edge goes
//! from `theta` to `psi` when every `K[i] chi` of `theta` keeps both `chi`
//! and `K[i] chi` in `psi`, and a state satisfies exactly the members of its
//! set. The construction is exponential in the number of subformulas, so a
//! size guard refuses inputs past a configurable bound.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::deduction::{self, DeductionError, ProverConfig};
use crate::logic::{AgentId, Formula};

/// State identifier within a Kripke model.
pub type StateId = String;

/// A finite Kripke model with one accessibility relation per agent and a
/// valuation of ground atoms. Agents missing from `rel` have the empty
/// relation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KripkeModel {
    pub states: BTreeSet<StateId>,
    pub rel: BTreeMap<AgentId, BTreeSet<(StateId, StateId)>>,
    pub val: BTreeMap<StateId, BTreeSet<Formula>>,
}

/// Default bound on `|Sub(phi)|` for canonical construction.
pub const DEFAULT_SIZE_GUARD: usize = 18;

/// Errors from Kripke evaluation and canonical construction.
#[derive(Debug, Error)]
pub enum KripkeError {
    #[error("state {0} is not part of the model")]
    UnknownState(String),
    #[error("evaluation requires ground formulas: {reason}")]
    NotGround { reason: String },
    #[error("canonical construction does not support {what}")]
    Unsupported { what: String },
    #[error("formula is inconsistent; it has no canonical model")]
    InconsistentBase,
    #[error(
        "formula has {subformulas} subformulas, past the guard of {guard}; \
         the canonical model would have up to {estimate} states"
    )]
    SizeGuard {
        subformulas: usize,
        guard: usize,
        estimate: u128,
    },
    #[error("canonical frame audit failed: {0}")]
    FrameAudit(String),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
}

impl KripkeModel {
    pub fn successors<'a>(&'a self, agent: &AgentId, from: &str) -> Vec<&'a StateId> {
        match self.rel.get(agent) {
            None => Vec::new(),
            // Pairs sort by first component, so one agent's successors
            // form a contiguous range.
            Some(rel) => rel
                .range((from.to_string(), String::new())..)
                .take_while(|(f, _)| f == from)
                .map(|(_, t)| t)
                .collect(),
        }
    }

    fn atom_holds(&self, state: &str, atom: &Formula) -> bool {
        self.val.get(state).is_some_and(|atoms| atoms.contains(atom))
    }
}

/// Frame audit result for a single agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameProperties {
    pub serial: bool,
    pub transitive: bool,
}

/// Seriality and transitivity of one agent's relation over the model's
/// states. Works on successor sets; pairwise scans over the relation are
/// quadratic in its size, and canonical relations get large.
pub fn frame_properties(model: &KripkeModel, agent: &AgentId) -> FrameProperties {
    let empty = BTreeSet::new();
    let rel = model.rel.get(agent).unwrap_or(&empty);
    let mut succ: BTreeMap<&StateId, BTreeSet<&StateId>> = BTreeMap::new();
    for (f, t) in rel {
        succ.entry(f).or_default().insert(t);
    }
    let serial = model.states.iter().all(|s| succ.contains_key(s));
    let transitive = succ.values().all(|ts| {
        ts.iter()
            .all(|b| succ.get(*b).is_none_or(|ds| ds.is_subset(ts)))
    });
    FrameProperties { serial, transitive }
}

/// Audit for every agent in the list.
pub fn frame_report(
    model: &KripkeModel,
    agents: &[AgentId],
) -> BTreeMap<AgentId, FrameProperties> {
    agents
        .iter()
        .map(|a| (a.clone(), frame_properties(model, a)))
        .collect()
}

/// Does the formula hold at the state? The formula must be ground; the
/// model may be any finite Kripke structure.
pub fn kripke_sat(model: &KripkeModel, state: &str, phi: &Formula) -> Result<bool, KripkeError> {
    if !model.states.contains(state) {
        return Err(KripkeError::UnknownState(state.to_string()));
    }
    if !phi.is_ground() {
        return Err(KripkeError::NotGround {
            reason: format!("{phi} contains variables, quantifiers, or function terms"),
        });
    }
    eval(model, state, phi)
}

fn eval(model: &KripkeModel, state: &str, phi: &Formula) -> Result<bool, KripkeError> {
    match phi {
        Formula::False => Ok(false),
        Formula::Pred { .. } => Ok(model.atom_holds(state, phi)),
        Formula::Not(x) => Ok(!eval(model, state, x)?),
        Formula::And(a, b) => Ok(eval(model, state, a)? && eval(model, state, b)?),
        Formula::Forall { .. } => Err(KripkeError::NotGround {
            reason: "quantifier present; ground the formula first".to_string(),
        }),
        Formula::Knows(i, body) => {
            for t in model.successors(i, state) {
                if !eval(model, t, body)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Everyone(g, body) => {
            for i in g {
                if !eval(model, state, &Formula::knows(i.clone(), (**body).clone()))? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Someone(g, body) => {
            for i in g {
                if eval(model, state, &Formula::knows(i.clone(), (**body).clone()))? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Common(g, body) => {
            // Worlds reachable in one or more steps along the union of the
            // group's relations.
            let mut reached: BTreeSet<&StateId> = BTreeSet::new();
            let mut queue: VecDeque<&str> = VecDeque::new();
            queue.push_back(state);
            let mut expanded: BTreeSet<&str> = BTreeSet::new();
            while let Some(s) = queue.pop_front() {
                if !expanded.insert(s) {
                    continue;
                }
                for i in g {
                    for t in model.successors(i, s) {
                        if reached.insert(t) {
                            queue.push_back(t);
                        }
                    }
                }
            }
            for t in reached {
                if !eval(model, t, body)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Distributed(g, body) => {
            let mut members = g.iter();
            let first = members.next().expect("groups are non-empty");
            let mut shared: BTreeSet<&StateId> =
                model.successors(first, state).into_iter().collect();
            for i in members {
                let next: BTreeSet<&StateId> = model.successors(i, state).into_iter().collect();
                shared = shared.intersection(&next).cloned().collect();
            }
            for t in shared {
                if !eval(model, t, body)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// The subformula closure of a formula and its negation-completed extension.
#[derive(Debug, Clone)]
pub struct FormulaClosure {
    pub base: Formula,
    /// Structural subformulas, deduplicated, ordered by size then printing.
    pub sub: Vec<Formula>,
    /// `sub` plus the negation of each member.
    pub sub_plus: Vec<Formula>,
}

/// Collects the structural subformulas of a formula (over the core
/// connectives; `||` and `->` contribute their encodings).
pub fn subformulas(phi: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, out: &mut BTreeSet<Formula>) {
        out.insert(f.clone());
        match f {
            Formula::False | Formula::Pred { .. } => {}
            Formula::Not(x) => walk(x, out),
            Formula::And(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Forall { body, .. }
            | Formula::Knows(_, body)
            | Formula::Everyone(_, body)
            | Formula::Someone(_, body)
            | Formula::Common(_, body)
            | Formula::Distributed(_, body) => walk(body, out),
        }
    }
    let mut set = BTreeSet::new();
    walk(phi, &mut set);
    let mut sub: Vec<Formula> = set.into_iter().collect();
    sub.sort_by_key(|f| (f.size(), f.to_string()));
    sub
}

impl FormulaClosure {
    pub fn new(phi: &Formula) -> Self {
        let sub = subformulas(phi);
        let mut sub_plus = sub.clone();
        for f in &sub {
            let neg = f.clone().not();
            if !sub_plus.contains(&neg) {
                sub_plus.push(neg);
            }
        }
        FormulaClosure {
            base: phi.clone(),
            sub,
            sub_plus,
        }
    }
}

/// A canonical model together with the state contents it was built from.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    pub model: KripkeModel,
    pub closure: FormulaClosure,
    /// Maximal consistent set behind each state.
    pub contents: BTreeMap<StateId, BTreeSet<Formula>>,
}

/// Builds the canonical model of a ground, quantifier-free, `C`/`D`-free
/// formula. `E`/`S` modalities are expanded first, so states and relations
/// are over the `K[i]` core.
pub fn canonical_model(
    phi: &Formula,
    guard: usize,
    cfg: &ProverConfig,
) -> Result<CanonicalModel, KripkeError> {
    if !phi.is_ground() {
        return Err(KripkeError::NotGround {
            reason: format!("{phi} contains variables, quantifiers, or function terms"),
        });
    }
    let phi = phi.expand_derived();
    if phi.mentions_group_closure() {
        return Err(KripkeError::Unsupported {
            what: "common or distributed knowledge".to_string(),
        });
    }
    if !deduction::satisfiable(std::slice::from_ref(&phi), cfg)? {
        return Err(KripkeError::InconsistentBase);
    }
    let closure = FormulaClosure::new(&phi);
    let n = closure.sub.len();
    if n > guard {
        return Err(KripkeError::SizeGuard {
            subformulas: n,
            guard,
            estimate: 1u128.checked_shl(n as u32).unwrap_or(u128::MAX),
        });
    }

    // Depth-first enumeration of maximal consistent subsets as sign
    // vectors over `sub`. Only knowledge literals constrain each other:
    // boolean composites take the sign their parts force, and root atoms
    // are independent of everything else in KD4 (no truth axiom). Deciding
    // knowledge literals first therefore confines prover calls to one
    // subtree of the search; atoms branch freely below it, and composites
    // are processed parts-before-whole (raw node count is strictly
    // monotonic under the subformula order) so their signs are forced.
    let index: BTreeMap<&Formula, usize> = closure.sub.iter().zip(0..).collect();
    let know_positions: Vec<usize> = (0..n)
        .filter(|&i| matches!(closure.sub[i], Formula::Knows(..)))
        .collect();
    let rank = |i: usize| match &closure.sub[i] {
        Formula::Knows(..) => (0, 0),
        Formula::Pred { .. } | Formula::False => (1, 0),
        f => (2, raw_nodes(f)),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| rank(i));

    let mut states: Vec<Vec<bool>> = Vec::new();
    let mut signs: Vec<Option<bool>> = vec![None; n];
    enumerate(&closure.sub, &index, &order, &know_positions, 0, &mut signs, &mut states, cfg)?;

    let agents: Vec<AgentId> = phi.agents().into_iter().collect();
    let mut model = KripkeModel::default();
    let mut contents = BTreeMap::new();
    let names: Vec<StateId> = (0..states.len()).map(|k| format!("s{k}")).collect();
    for (name, state) in names.iter().zip(states.iter()) {
        model.states.insert(name.clone());
        let mut theta = BTreeSet::new();
        let mut atoms = BTreeSet::new();
        for (f, &sign) in closure.sub.iter().zip(state.iter()) {
            if sign && matches!(f, Formula::Pred { .. }) {
                atoms.insert(f.clone());
            }
            theta.insert(if sign { f.clone() } else { f.clone().not() });
        }
        model.val.insert(name.clone(), atoms);
        contents.insert(name.clone(), theta);
    }

    for agent in &agents {
        // Positions of this agent's knowledge literals and their bodies.
        let boxes: Vec<(usize, usize)> = know_positions
            .iter()
            .filter_map(|&k| match &closure.sub[k] {
                Formula::Knows(i, body) if i == agent => {
                    Some((k, index[body.as_ref()]))
                }
                _ => None,
            })
            .collect();
        let mut rel = BTreeSet::new();
        for (a, from) in states.iter().enumerate() {
            for (b, to) in states.iter().enumerate() {
                // Boxes persist (transitivity) and their bodies hold at
                // the successor.
                let edge = boxes
                    .iter()
                    .all(|&(k, body)| !from[k] || (to[k] && to[body]));
                if edge {
                    rel.insert((names[a].clone(), names[b].clone()));
                }
            }
        }
        model.rel.insert(agent.clone(), rel);
    }

    for agent in &agents {
        let props = frame_properties(&model, agent);
        if !props.serial || !props.transitive {
            return Err(KripkeError::FrameAudit(format!(
                "relation for {agent} is {}serial and {}transitive",
                if props.serial { "" } else { "not " },
                if props.transitive { "" } else { "not " },
            )));
        }
    }

    Ok(CanonicalModel {
        model,
        closure,
        contents,
    })
}

/// Plain AST node count, ignoring the printer's `||`/`->` views; strictly
/// smaller for subformulas, which is what the decision order needs.
fn raw_nodes(f: &Formula) -> usize {
    match f {
        Formula::False | Formula::Pred { .. } => 1,
        Formula::Not(x) => 1 + raw_nodes(x),
        Formula::And(a, b) => 1 + raw_nodes(a) + raw_nodes(b),
        Formula::Forall { body, .. }
        | Formula::Knows(_, body)
        | Formula::Everyone(_, body)
        | Formula::Someone(_, body)
        | Formula::Common(_, body)
        | Formula::Distributed(_, body) => 1 + raw_nodes(body),
    }
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    sub: &[Formula],
    index: &BTreeMap<&Formula, usize>,
    order: &[usize],
    know_positions: &[usize],
    depth: usize,
    signs: &mut Vec<Option<bool>>,
    out: &mut Vec<Vec<bool>>,
    cfg: &ProverConfig,
) -> Result<(), KripkeError> {
    if depth == order.len() {
        out.push(signs.iter().map(|s| s.expect("all positions decided")).collect());
        return Ok(());
    }
    let pos = order[depth];
    let decided = |x: &Formula| signs[index[x]].expect("parts are decided first");
    let choices: &[bool] = match &sub[pos] {
        Formula::False => &[false],
        Formula::Not(x) => {
            if decided(x) {
                &[false]
            } else {
                &[true]
            }
        }
        Formula::And(a, b) => {
            if decided(a) && decided(b) {
                &[true]
            } else {
                &[false]
            }
        }
        _ => &[true, false],
    };
    let modal = matches!(sub[pos], Formula::Knows(..));
    for &candidate in choices {
        signs[pos] = Some(candidate);
        let viable = if modal {
            // Only the knowledge literals decided so far constrain each
            // other; composites are forced and atoms are free.
            let literals: Vec<Formula> = know_positions
                .iter()
                .filter_map(|&k| {
                    signs[k].map(|s| if s { sub[k].clone() } else { sub[k].clone().not() })
                })
                .collect();
            deduction::satisfiable(&literals, cfg)?
        } else {
            true
        };
        if viable {
            enumerate(sub, index, order, know_positions, depth + 1, signs, out, cfg)?;
        }
        signs[pos] = None;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{PredKind, Term};

    fn pa() -> Formula {
        Formula::pred(PredKind::Regular, "p", vec![Term::Const("a".to_string())])
    }

    fn agent(s: &str) -> AgentId {
        AgentId::new(s)
    }

    /// The two-agent, three-state example model: `a` flips between s0 and
    /// s1, `b` between s1 and s2, and `p(a)` holds at s0 and s1.
    fn example_model() -> KripkeModel {
        let mut m = KripkeModel::default();
        for s in ["s0", "s1", "s2"] {
            m.states.insert(s.to_string());
            m.val.insert(s.to_string(), BTreeSet::new());
        }
        m.rel.insert(
            agent("a"),
            [("s0", "s1"), ("s1", "s0")]
                .iter()
                .map(|(f, t)| (f.to_string(), t.to_string()))
                .collect(),
        );
        m.rel.insert(
            agent("b"),
            [("s1", "s2"), ("s2", "s1")]
                .iter()
                .map(|(f, t)| (f.to_string(), t.to_string()))
                .collect(),
        );
        m.val.get_mut("s0").unwrap().insert(pa());
        m.val.get_mut("s1").unwrap().insert(pa());
        m
    }

    #[test]
    fn satisfaction_on_the_example_model() {
        let m = example_model();
        assert!(kripke_sat(&m, "s0", &Formula::knows("a", pa())).unwrap());
        assert!(kripke_sat(&m, "s1", &Formula::knows("b", pa()).not()).unwrap());
        assert!(kripke_sat(&m, "s1", &Formula::knows("a", pa())).unwrap());
        assert!(kripke_sat(&m, "s0", &pa()).unwrap());
        assert!(!kripke_sat(&m, "s2", &pa()).unwrap());

        let g: BTreeSet<AgentId> = [agent("a"), agent("b")].into_iter().collect();
        assert!(!kripke_sat(&m, "s1", &Formula::everyone(g.clone(), pa())).unwrap());
        assert!(kripke_sat(&m, "s1", &Formula::someone(g.clone(), pa())).unwrap());
        // From s0 the union walk reaches s1, s0, s2; p(a) fails at s2.
        assert!(!kripke_sat(&m, "s0", &Formula::common(g.clone(), pa())).unwrap());
        // a and b share no successor at s1, so D holds vacuously there.
        assert!(kripke_sat(&m, "s1", &Formula::distributed(g, Formula::False)).unwrap());

        assert!(matches!(
            kripke_sat(&m, "s9", &pa()),
            Err(KripkeError::UnknownState(_))
        ));
    }

    #[test]
    fn common_knowledge_on_a_shared_loop() {
        // One shared self-loop world: everything true there is common
        // knowledge.
        let mut m = KripkeModel::default();
        m.states.insert("w".to_string());
        m.val.insert("w".to_string(), [pa()].into_iter().collect());
        let loop_rel: BTreeSet<(StateId, StateId)> =
            [("w".to_string(), "w".to_string())].into_iter().collect();
        m.rel.insert(agent("a"), loop_rel.clone());
        m.rel.insert(agent("b"), loop_rel);
        let g: BTreeSet<AgentId> = [agent("a"), agent("b")].into_iter().collect();
        assert!(kripke_sat(&m, "w", &Formula::common(g.clone(), pa())).unwrap());
        assert!(!kripke_sat(&m, "w", &Formula::common(g, pa().not())).unwrap());
    }

    #[test]
    fn frame_audit_of_the_example_model() {
        let m = example_model();
        let a = frame_properties(&m, &agent("a"));
        // s2 has no a-successor, and the two-cycle is not transitive.
        assert!(!a.serial);
        assert!(!a.transitive);
        let report = frame_report(&m, &[agent("a"), agent("b")]);
        assert_eq!(report.len(), 2);
    }

    #[test]
    fn subformula_closure_is_ordered_and_complete() {
        let phi = Formula::knows("i", pa()).and(pa().not());
        let closure = FormulaClosure::new(&phi);
        assert!(closure.sub.contains(&pa()));
        assert!(closure.sub.contains(&pa().not()));
        assert!(closure.sub.contains(&Formula::knows("i", pa())));
        assert!(closure.sub.contains(&phi));
        assert_eq!(closure.sub.first().unwrap(), &pa());
        assert_eq!(closure.sub_plus.len(), closure.sub.len() * 2 - 1);
        // !p(a) sits in sub already; sub_plus adds !!p(a) once.
        assert!(closure.sub_plus.contains(&pa().not().not()));
    }

    #[test]
    fn canonical_model_of_knowledge_atom() {
        let cfg = ProverConfig::default();
        let phi = Formula::knows("i", pa());
        let canonical = canonical_model(&phi, DEFAULT_SIZE_GUARD, &cfg).unwrap();
        // Sub = {p(a), K[i] p(a)}; all four sign combinations are
        // consistent, knowledge being fallible.
        assert_eq!(canonical.model.states.len(), 4);
        let props = frame_properties(&canonical.model, &agent("i"));
        assert!(props.serial && props.transitive);

        // Truth lemma: each state satisfies exactly its contents.
        for (state, theta) in &canonical.contents {
            for psi in &canonical.closure.sub {
                let holds = kripke_sat(&canonical.model, state, psi).unwrap();
                assert_eq!(
                    holds,
                    theta.contains(psi),
                    "state {state} disagrees with its contents on {psi}"
                );
            }
        }
    }

    #[test]
    fn canonical_model_of_truth_is_a_point() {
        let cfg = ProverConfig::default();
        let canonical = canonical_model(&Formula::truth(), DEFAULT_SIZE_GUARD, &cfg).unwrap();
        assert_eq!(canonical.model.states.len(), 1);
    }

    #[test]
    fn canonical_model_rejects_bad_input() {
        let cfg = ProverConfig::default();
        let contradiction = pa().and(pa().not());
        assert!(matches!(
            canonical_model(&contradiction, DEFAULT_SIZE_GUARD, &cfg),
            Err(KripkeError::InconsistentBase)
        ));
        let phi = Formula::knows("i", pa()).and(Formula::knows("j", pa()));
        assert!(matches!(
            canonical_model(&phi, 2, &cfg),
            Err(KripkeError::SizeGuard { guard: 2, .. })
        ));
        let g: BTreeSet<AgentId> = [agent("a"), agent("b")].into_iter().collect();
        assert!(matches!(
            canonical_model(&Formula::distributed(g, pa()), DEFAULT_SIZE_GUARD, &cfg),
            Err(KripkeError::Unsupported { .. })
        ));
    }

    #[test]
    fn canonical_model_respects_derived_modalities() {
        let cfg = ProverConfig::default();
        let g: BTreeSet<AgentId> = [agent("a"), agent("b")].into_iter().collect();
        let phi = Formula::everyone(g, pa());
        let canonical = canonical_model(&phi, DEFAULT_SIZE_GUARD, &cfg).unwrap();
        // E expands to K[a] && K[b]; both agents get relations.
        assert!(canonical.model.rel.contains_key(&agent("a")));
        assert!(canonical.model.rel.contains_key(&agent("b")));
        // Some state contains the whole expansion and satisfies it.
        let expanded = phi.expand_derived();
        let holds_somewhere = canonical
            .model
            .states
            .iter()
            .any(|s| kripke_sat(&canonical.model, s, &expanded).unwrap());
        assert!(holds_somewhere);
    }
}
