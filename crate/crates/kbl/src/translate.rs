//! Translations between network models and canonical Kripke models.
//!
//! The characteristic set of a network model collects everything the model
//! asserts: the environment's atoms, one atom per connection and action
//! edge, and `K[i] phi` for each formula in each agent's base. Conjoining
//! the set (in canonical print order) gives the characteristic formula, and
//! the canonical Kripke model of that formula is the model's translation.
//! The distinguished state is the one whose contents mirror the network
//! model's own satisfaction relation; evaluating a formula there agrees with
//! checking it on the network side.
//!
//! The marked variant renames connection and action predicates with the
//! `co_`/`ac_` prefixes before translating, uniformly, including occurrences
//! inside knowledge formulas. That keeps predicate types syntactically
//! recoverable, which is what makes [`reconstruct`] a genuine inverse: it
//! reads a marked characteristic set back into agents, relations, and
//! knowledge bases.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::checker::{self, CheckConfig, Verdict};
use crate::deduction::ProverConfig;
use crate::kripke::{canonical_model, CanonicalModel, KripkeError, StateId};
use crate::logic::{
    AgentId, Formula, PredDecl, PredKind, Term, Vocabulary, ACTION_MARK, CONNECTION_MARK,
};
use crate::snm::{Snm, SnmError, ENV_AGENT};

/// Errors from translation in either direction.
#[derive(Debug, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Snm(#[from] SnmError),
    #[error(transparent)]
    Check(#[from] checker::CheckError),
    #[error("no canonical state contains the characteristic set")]
    NoDistinguishedState,
    #[error("characteristic member {0} is not an environment atom, a marked edge, or a knowledge formula")]
    MalformedCharacteristic(String),
    #[error("marked edge {0} must relate two agents by name")]
    MalformedEdge(String),
}

/// Rewrites connection and action predicates to marked regular predicates,
/// uniformly through the whole formula.
pub fn mark_formula(f: &Formula) -> Formula {
    match f {
        Formula::False => Formula::False,
        Formula::Pred { kind, name, args } => {
            let (kind, name) = match kind {
                PredKind::Regular => (PredKind::Regular, name.clone()),
                PredKind::Connection => (PredKind::Regular, format!("{CONNECTION_MARK}{name}")),
                PredKind::Action => (PredKind::Regular, format!("{ACTION_MARK}{name}")),
            };
            Formula::Pred {
                kind,
                name,
                args: args.clone(),
            }
        }
        Formula::Not(x) => mark_formula(x).not(),
        Formula::And(a, b) => mark_formula(a).and(mark_formula(b)),
        Formula::Forall { var, sort, body } => {
            Formula::forall(var.clone(), sort.clone(), mark_formula(body))
        }
        Formula::Knows(i, body) => Formula::Knows(i.clone(), Box::new(mark_formula(body))),
        Formula::Everyone(g, body) => Formula::Everyone(g.clone(), Box::new(mark_formula(body))),
        Formula::Someone(g, body) => Formula::Someone(g.clone(), Box::new(mark_formula(body))),
        Formula::Common(g, body) => Formula::Common(g.clone(), Box::new(mark_formula(body))),
        Formula::Distributed(g, body) => {
            Formula::Distributed(g.clone(), Box::new(mark_formula(body)))
        }
    }
}

/// Strips `co_`/`ac_` prefixes, restoring predicate kinds. Inverse of
/// [`mark_formula`] on vocabularies free of the reserved prefixes.
pub fn unmark_formula(f: &Formula) -> Formula {
    match f {
        Formula::False => Formula::False,
        Formula::Pred { kind, name, args } => {
            let (kind, name) = if let Some(rest) = name.strip_prefix(CONNECTION_MARK) {
                (PredKind::Connection, rest.to_string())
            } else if let Some(rest) = name.strip_prefix(ACTION_MARK) {
                (PredKind::Action, rest.to_string())
            } else {
                (*kind, name.clone())
            };
            Formula::Pred {
                kind,
                name,
                args: args.clone(),
            }
        }
        Formula::Not(x) => unmark_formula(x).not(),
        Formula::And(a, b) => unmark_formula(a).and(unmark_formula(b)),
        Formula::Forall { var, sort, body } => {
            Formula::forall(var.clone(), sort.clone(), unmark_formula(body))
        }
        Formula::Knows(i, body) => Formula::Knows(i.clone(), Box::new(unmark_formula(body))),
        Formula::Everyone(g, body) => Formula::Everyone(g.clone(), Box::new(unmark_formula(body))),
        Formula::Someone(g, body) => Formula::Someone(g.clone(), Box::new(unmark_formula(body))),
        Formula::Common(g, body) => Formula::Common(g.clone(), Box::new(unmark_formula(body))),
        Formula::Distributed(g, body) => {
            Formula::Distributed(g.clone(), Box::new(unmark_formula(body)))
        }
    }
}

/// Everything a network model asserts, as a deduplicated formula list in
/// canonical print order.
#[derive(Debug, Clone)]
pub struct CharacteristicSet {
    pub formulas: Vec<Formula>,
    pub marked: bool,
}

fn edge_atom(kind: PredKind, name: &str, from: &AgentId, to: &AgentId) -> Formula {
    Formula::pred(
        kind,
        name,
        vec![
            Term::Const(from.as_str().to_string()),
            Term::Const(to.as_str().to_string()),
        ],
    )
}

/// The characteristic set of a model: environment atoms, edge atoms, and
/// `K[i] phi` per base entry (ground forms).
pub fn characteristic_set(snm: &Snm, marked: bool) -> CharacteristicSet {
    let mut set: BTreeSet<Formula> = BTreeSet::new();
    for fact in snm.env().ground_formulas() {
        set.insert(fact);
    }
    for (name, rel) in &snm.connections {
        for (from, to) in rel {
            set.insert(edge_atom(PredKind::Connection, name, from, to));
        }
    }
    for (name, rel) in &snm.actions {
        for (from, to) in rel {
            set.insert(edge_atom(PredKind::Action, name, from, to));
        }
    }
    for agent in &snm.agents {
        let kb = snm.kb(agent).expect("every agent has a base");
        for phi in kb.ground_formulas() {
            set.insert(Formula::knows(agent.clone(), phi));
        }
    }
    let mut formulas: Vec<Formula> = set.into_iter().collect();
    if marked {
        formulas = formulas.iter().map(mark_formula).collect();
    }
    formulas.sort_by_key(|f| f.to_string());
    formulas.dedup();
    CharacteristicSet { formulas, marked }
}

/// Conjunction of the characteristic set in its canonical order; `!false`
/// for an empty set.
pub fn characteristic_formula(set: &CharacteristicSet) -> Formula {
    Formula::and_all(set.formulas.iter().cloned())
}

/// A translated network model: the canonical Kripke model of the
/// characteristic formula plus the distinguished state that mirrors the
/// source model.
#[derive(Debug)]
pub struct KtModel {
    pub canonical: CanonicalModel,
    pub characteristic: CharacteristicSet,
    pub formula: Formula,
    pub distinguished: StateId,
    pub marked: bool,
}

/// Translates a network model into its canonical Kripke model.
///
/// Among the canonical states containing the characteristic set, the
/// distinguished state is the one whose entire contents hold in the source
/// model (predicate marks removed first); its existence and uniqueness come
/// from the model's own satisfaction relation deciding every subformula.
pub fn kt(snm: &Snm, marked: bool, guard: usize, cfg: &ProverConfig) -> Result<KtModel, TranslateError> {
    let characteristic = characteristic_set(snm, marked);
    let formula = characteristic_formula(&characteristic);
    let mut canonical = canonical_model(&formula, guard, cfg)?;

    // The canonical construction derives its agent set from the formula, so
    // an agent whose only trace in the characteristic set is an edge atom
    // gets no relation there. Such an agent carries no knowledge literals,
    // and an unconstrained canonical relation is the complete one; the
    // empty relation would instead make every `K` vacuously true at every
    // state, which an empty base does not warrant.
    let complete: BTreeSet<(StateId, StateId)> = canonical
        .model
        .states
        .iter()
        .flat_map(|a| {
            canonical
                .model
                .states
                .iter()
                .map(move |b| (a.clone(), b.clone()))
        })
        .collect();
    for agent in &snm.agents {
        canonical
            .model
            .rel
            .entry(agent.clone())
            .or_insert_with(|| complete.clone());
    }

    let members: BTreeSet<&Formula> = characteristic.formulas.iter().collect();
    let mut candidates: Vec<&StateId> = canonical
        .contents
        .iter()
        .filter(|(_, theta)| members.iter().all(|m| theta.contains(*m)))
        .map(|(state, _)| state)
        .collect();
    candidates.sort();
    if candidates.is_empty() {
        return Err(TranslateError::NoDistinguishedState);
    }

    let check_cfg = CheckConfig {
        prover: cfg.clone(),
        ..CheckConfig::default()
    };
    let mut distinguished = None;
    for state in &candidates {
        let theta = &canonical.contents[*state];
        let mut mirrors = true;
        for psi in theta {
            let on_network = if characteristic.marked {
                unmark_formula(psi)
            } else {
                (*psi).clone()
            };
            if checker::check(snm, &on_network, &check_cfg)? != Verdict::True {
                mirrors = false;
                break;
            }
        }
        if mirrors {
            distinguished = Some((*state).clone());
            break;
        }
    }
    // Every characteristic member holds in the source model, so the mirror
    // state exists whenever the satisfaction relations agree; fall back to
    // the first candidate rather than failing on exotic inputs.
    let distinguished = distinguished.unwrap_or_else(|| candidates[0].clone());

    Ok(KtModel {
        canonical,
        characteristic,
        formula,
        distinguished,
        marked,
    })
}

/// Rebuilds a network model from a marked characteristic set: marked edge
/// atoms become relations, plain atoms become environment facts, and
/// `K[i] phi` members repopulate the bases with `phi` unmarked. Sorts,
/// constants, and policies are not represented in the set and come back
/// empty.
pub fn reconstruct(characteristic: &[Formula]) -> Result<Snm, TranslateError> {
    let mut agents: BTreeSet<AgentId> = BTreeSet::new();
    let mut preds: BTreeSet<(PredKind, String, usize)> = BTreeSet::new();

    fn scan(f: &Formula, agents: &mut BTreeSet<AgentId>, preds: &mut BTreeSet<(PredKind, String, usize)>) {
        match f {
            Formula::False => {}
            Formula::Pred { args, .. } => {
                let unmarked = unmark_formula(f);
                if let Formula::Pred {
                    kind: real_kind,
                    name: real_name,
                    ..
                } = &unmarked
                {
                    preds.insert((*real_kind, real_name.clone(), args.len()));
                    if *real_kind != PredKind::Regular {
                        for a in args {
                            if let Term::Const(c) = a {
                                agents.insert(AgentId::new(c.clone()));
                            }
                        }
                    }
                }
            }
            Formula::Not(x) => scan(x, agents, preds),
            Formula::And(a, b) => {
                scan(a, agents, preds);
                scan(b, agents, preds);
            }
            Formula::Forall { body, .. } => scan(body, agents, preds),
            Formula::Knows(i, body) => {
                agents.insert(i.clone());
                scan(body, agents, preds);
            }
            Formula::Everyone(g, body)
            | Formula::Someone(g, body)
            | Formula::Common(g, body)
            | Formula::Distributed(g, body) => {
                agents.extend(g.iter().cloned());
                scan(body, agents, preds);
            }
        }
    }

    for f in characteristic {
        scan(f, &mut agents, &mut preds);
    }
    agents.remove(&AgentId::new(ENV_AGENT));

    let mut vocab = Vocabulary::default();
    for (kind, name, arity) in &preds {
        vocab.predicates.insert(
            name.clone(),
            PredDecl {
                arity: *arity,
                kind: *kind,
            },
        );
    }

    let cfg = ProverConfig::default();
    let mut snm = Snm::new(agents, vocab)?;
    let env = AgentId::new(ENV_AGENT);
    for member in characteristic {
        match member {
            Formula::Pred {
                kind: PredKind::Regular,
                ..
            } => {
                let unmarked = unmark_formula(member);
                match &unmarked {
                    Formula::Pred {
                        kind: PredKind::Regular,
                        ..
                    } => {
                        snm = snm.kb_insert(&env, &unmarked, &cfg)?;
                    }
                    Formula::Pred { kind, name, args } => {
                        let pair = match (args.first(), args.get(1)) {
                            (Some(Term::Const(a)), Some(Term::Const(b))) if args.len() == 2 => {
                                (AgentId::new(a.clone()), AgentId::new(b.clone()))
                            }
                            _ => return Err(TranslateError::MalformedEdge(member.to_string())),
                        };
                        match kind {
                            PredKind::Connection => {
                                snm.add_connection(name, pair.0, pair.1)?;
                            }
                            PredKind::Action => {
                                snm.add_action(name, pair.0, pair.1)?;
                            }
                            PredKind::Regular => unreachable!("matched non-regular above"),
                        }
                    }
                    _ => unreachable!("unmarking preserves predicate shape"),
                }
            }
            Formula::Knows(agent, body) => {
                snm = snm.kb_insert(agent, &unmark_formula(body), &cfg)?;
            }
            other => {
                return Err(TranslateError::MalformedCharacteristic(other.to_string()));
            }
        }
    }
    Ok(snm)
}

/// Inverse translation from a marked [`KtModel`].
pub fn kripke_to_snm(kt: &KtModel) -> Result<Snm, TranslateError> {
    reconstruct(&kt.characteristic.formulas)
}

/// Equality of translated content: agents, relations, environment facts,
/// and per-agent base contents (ground forms). Vocabulary sorts, the policy
/// slot, and relation names with no pairs are outside the translation and
/// are ignored.
pub fn translated_eq(a: &Snm, b: &Snm) -> bool {
    let live = |rels: &BTreeMap<String, BTreeSet<(AgentId, AgentId)>>| -> BTreeMap<String, BTreeSet<(AgentId, AgentId)>> {
        rels.iter()
            .filter(|(_, pairs)| !pairs.is_empty())
            .map(|(n, p)| (n.clone(), p.clone()))
            .collect()
    };
    if a.agents != b.agents
        || live(&a.connections) != live(&b.connections)
        || live(&a.actions) != live(&b.actions)
    {
        return false;
    }
    let bases = |m: &Snm| -> Vec<(AgentId, BTreeSet<Formula>)> {
        m.kbs
            .iter()
            .map(|(owner, kb)| (owner.clone(), kb.ground_formulas().into_iter().collect()))
            .collect()
    };
    bases(a) == bases(b)
}
