//! Social network models: agents, typed relations, and knowledge bases.
//!
//! A model holds a finite agent set, connection and action relations between
//! agents, one knowledge base per agent, and the environment's base of ground
//! atomic facts under the reserved id [`ENV_AGENT`]. Knowledge bases obey two
//! disciplines enforced at insertion: formulas are grounded against the
//! model's vocabulary, and an insertion that would let the base derive the
//! negation of the incoming formula is rejected, so bases stay consistent.
//! Self-awareness is not stored; the derivation engine closes premises under
//! the owner's modality on every call.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::deduction::{self, DeductionError, ProverConfig};
use crate::logic::{AgentId, Formula, LogicError, PredKind, Vocabulary};

/// Reserved identifier for the environment's knowledge base.
pub const ENV_AGENT: &str = "e";

/// One knowledge base entry. The source form is what the model file wrote
/// (possibly quantified); the ground form is its expansion, which is the
/// entry's identity and what derivation uses. Machine-built entries have
/// source equal to ground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbEntry {
    pub source: Formula,
    pub ground: Formula,
}

/// An agent's finite set of ground formulas, with source forms retained for
/// printing and cost measurement.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    entries: Vec<KbEntry>,
}

impl KnowledgeBase {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[KbEntry] {
        &self.entries
    }

    /// Ground formulas in canonical order.
    pub fn ground_formulas(&self) -> Vec<Formula> {
        self.entries.iter().map(|e| e.ground.clone()).collect()
    }

    /// Is the ground formula already in the base?
    pub fn contains_ground(&self, f: &Formula) -> bool {
        self.entries.iter().any(|e| e.ground == *f)
    }

    /// Summed size of the entries as written (source forms, no conjunction
    /// glue); the base's contribution to translation cost exponents.
    pub fn characteristic_size(&self) -> u64 {
        self.entries.iter().map(|e| e.source.size()).sum()
    }

    /// Source formulas in canonical order.
    pub fn source_formulas(&self) -> Vec<Formula> {
        self.entries.iter().map(|e| e.source.clone()).collect()
    }

    /// Inserts by ground identity, keeping entries sorted by their canonical
    /// printing. Re-inserting an already-present ground formula keeps the
    /// original source form.
    fn insert_entry(&mut self, entry: KbEntry) -> bool {
        if self.entries.iter().any(|e| e.ground == entry.ground) {
            return false;
        }
        let key = entry.ground.to_string();
        let at = self
            .entries
            .partition_point(|e| e.ground.to_string() <= key);
        self.entries.insert(at, entry);
        true
    }
}

/// A social network model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Snm {
    pub agents: BTreeSet<AgentId>,
    pub vocab: Vocabulary,
    /// Connection relations by predicate name.
    pub connections: BTreeMap<String, BTreeSet<(AgentId, AgentId)>>,
    /// Action relations by predicate name.
    pub actions: BTreeMap<String, BTreeSet<(AgentId, AgentId)>>,
    /// Agent bases plus the environment base under [`ENV_AGENT`].
    pub kbs: BTreeMap<AgentId, KnowledgeBase>,
    /// Privacy policies are carried but not interpreted.
    pub policies: BTreeMap<AgentId, Vec<String>>,
}

/// Errors from model construction and updates.
#[derive(Debug, Error)]
pub enum SnmError {
    #[error("agent {0} is not part of the model")]
    UnknownAgent(AgentId),
    #[error("{0} is reserved for the environment")]
    ReservedAgent(AgentId),
    #[error("unknown {kind} relation {name}")]
    UnknownRelation { kind: &'static str, name: String },
    #[error("inserting {formula} would contradict {agent}'s knowledge base")]
    Inconsistent { agent: AgentId, formula: String },
    #[error("environment facts must be ground regular atoms, got {0}")]
    NotAnEnvironmentFact(String),
    #[error("knowledge bases cannot hold common or distributed knowledge: {0}")]
    GroupClosureInKb(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
}

impl Snm {
    /// A model over the given agents with empty relations and bases.
    pub fn new(agents: BTreeSet<AgentId>, vocab: Vocabulary) -> Result<Self, SnmError> {
        if let Some(bad) = agents.iter().find(|a| a.as_str() == ENV_AGENT) {
            return Err(SnmError::ReservedAgent(bad.clone()));
        }
        let mut kbs: BTreeMap<AgentId, KnowledgeBase> = agents
            .iter()
            .map(|a| (a.clone(), KnowledgeBase::default()))
            .collect();
        kbs.insert(AgentId::new(ENV_AGENT), KnowledgeBase::default());
        let mut connections = BTreeMap::new();
        let mut actions = BTreeMap::new();
        for (name, decl) in &vocab.predicates {
            match decl.kind {
                PredKind::Connection => {
                    connections.insert(name.clone(), BTreeSet::new());
                }
                PredKind::Action => {
                    actions.insert(name.clone(), BTreeSet::new());
                }
                PredKind::Regular => {}
            }
        }
        Ok(Snm {
            agents,
            vocab,
            connections,
            actions,
            kbs,
            policies: BTreeMap::new(),
        })
    }

    pub fn env(&self) -> &KnowledgeBase {
        self.kbs
            .get(&AgentId::new(ENV_AGENT))
            .expect("environment base always exists")
    }

    pub fn kb(&self, agent: &AgentId) -> Result<&KnowledgeBase, SnmError> {
        self.kbs
            .get(agent)
            .ok_or_else(|| SnmError::UnknownAgent(agent.clone()))
    }

    fn check_member(&self, agent: &AgentId) -> Result<(), SnmError> {
        if agent.as_str() == ENV_AGENT || self.agents.contains(agent) {
            Ok(())
        } else {
            Err(SnmError::UnknownAgent(agent.clone()))
        }
    }

    /// Does a connection of this name relate the two agents?
    pub fn connection_holds(
        &self,
        name: &str,
        from: &AgentId,
        to: &AgentId,
    ) -> Result<bool, SnmError> {
        let rel = self
            .connections
            .get(name)
            .ok_or_else(|| SnmError::UnknownRelation {
                kind: "connection",
                name: name.to_string(),
            })?;
        Ok(rel.contains(&(from.clone(), to.clone())))
    }

    /// Does an action of this name relate the two agents?
    pub fn action_holds(&self, name: &str, from: &AgentId, to: &AgentId) -> Result<bool, SnmError> {
        let rel = self.actions.get(name).ok_or_else(|| SnmError::UnknownRelation {
            kind: "action",
            name: name.to_string(),
        })?;
        Ok(rel.contains(&(from.clone(), to.clone())))
    }

    /// Adds a connection edge between two model agents.
    pub fn add_connection(
        &mut self,
        name: &str,
        from: AgentId,
        to: AgentId,
    ) -> Result<(), SnmError> {
        if !self.agents.contains(&from) {
            return Err(SnmError::UnknownAgent(from));
        }
        if !self.agents.contains(&to) {
            return Err(SnmError::UnknownAgent(to));
        }
        self.connections
            .get_mut(name)
            .ok_or_else(|| SnmError::UnknownRelation {
                kind: "connection",
                name: name.to_string(),
            })?
            .insert((from, to));
        Ok(())
    }

    /// Adds an action edge between two model agents.
    pub fn add_action(&mut self, name: &str, from: AgentId, to: AgentId) -> Result<(), SnmError> {
        if !self.agents.contains(&from) {
            return Err(SnmError::UnknownAgent(from));
        }
        if !self.agents.contains(&to) {
            return Err(SnmError::UnknownAgent(to));
        }
        self.actions
            .get_mut(name)
            .ok_or_else(|| SnmError::UnknownRelation {
                kind: "action",
                name: name.to_string(),
            })?
            .insert((from, to));
        Ok(())
    }

    /// Inserts a formula into an agent's base, grounding it first and
    /// refusing updates whose grounding the base would contradict.
    ///
    /// The model is persistent: the updated copy is returned and the
    /// receiver is untouched. Environment insertions must be ground regular
    /// atoms. Inserting a formula already present is the identity.
    pub fn kb_insert(
        &self,
        agent: &AgentId,
        formula: &Formula,
        cfg: &ProverConfig,
    ) -> Result<Snm, SnmError> {
        self.check_member(agent)?;
        let ground = formula.ground(&self.vocab)?;
        if agent.as_str() == ENV_AGENT {
            if !is_env_fact(&ground) {
                return Err(SnmError::NotAnEnvironmentFact(ground.to_string()));
            }
        } else if ground.mentions_group_closure() {
            return Err(SnmError::GroupClosureInKb(ground.to_string()));
        }
        let mut next = self.clone();
        let kb = next
            .kbs
            .get_mut(agent)
            .expect("membership checked above");
        if kb.entries.iter().any(|e| e.ground == ground) {
            return Ok(next);
        }
        if agent.as_str() != ENV_AGENT {
            let mut premises = kb.ground_formulas();
            premises.push(ground.clone());
            if deduction::derive(agent, &premises, &ground.clone().not(), cfg)? {
                return Err(SnmError::Inconsistent {
                    agent: agent.clone(),
                    formula: ground.to_string(),
                });
            }
        }
        kb.insert_entry(KbEntry {
            source: formula.clone(),
            ground,
        });
        Ok(next)
    }

    /// Structural and logical diagnostics; an empty list means the model is
    /// well formed.
    pub fn validate(&self, cfg: &ProverConfig) -> Vec<String> {
        let mut diags = self.vocab.validate();
        if self.agents.is_empty() {
            diags.push("model has no agents".to_string());
        }
        if self.agents.iter().any(|a| a.as_str() == ENV_AGENT) {
            diags.push(format!("agent id {ENV_AGENT} is reserved for the environment"));
        }
        for (name, rel) in self.connections.iter().chain(self.actions.iter()) {
            for (from, to) in rel {
                if !self.agents.contains(from) || !self.agents.contains(to) {
                    diags.push(format!("relation {name} links unknown agents {from}, {to}"));
                }
            }
        }
        for agent in &self.agents {
            if !self.kbs.contains_key(agent) {
                diags.push(format!("agent {agent} has no knowledge base"));
            }
        }
        if !self.kbs.contains_key(&AgentId::new(ENV_AGENT)) {
            diags.push("environment knowledge base is missing".to_string());
        }
        for (owner, kb) in &self.kbs {
            if owner.as_str() != ENV_AGENT && !self.agents.contains(owner) {
                diags.push(format!("knowledge base owner {owner} is not an agent"));
            }
            for entry in kb.entries() {
                if !entry.ground.is_ground() {
                    diags.push(format!(
                        "{owner}'s base holds a non-ground formula {}",
                        entry.ground
                    ));
                }
                if owner.as_str() == ENV_AGENT {
                    if !is_env_fact(&entry.ground) {
                        diags.push(format!(
                            "environment base holds a non-atomic entry {}",
                            entry.ground
                        ));
                    }
                } else if entry.ground.mentions_group_closure() {
                    diags.push(format!(
                        "{owner}'s base holds a group-closure modality in {}",
                        entry.ground
                    ));
                }
                for foreign in entry.ground.agents() {
                    if foreign.as_str() != ENV_AGENT && !self.agents.contains(&foreign) {
                        diags.push(format!(
                            "{owner}'s base mentions unknown agent {foreign} in {}",
                            entry.ground
                        ));
                    }
                }
            }
            if owner.as_str() != ENV_AGENT {
                match deduction::consistent(owner, &kb.ground_formulas(), cfg) {
                    Ok(true) => {}
                    Ok(false) => diags.push(format!("{owner}'s knowledge base is inconsistent")),
                    Err(e) => diags.push(format!("{owner}'s knowledge base: {e}")),
                }
            }
        }
        diags
    }
}

/// Environment facts are ground regular atoms.
pub fn is_env_fact(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Pred {
            kind: PredKind::Regular,
            ..
        }
    ) && f.is_ground()
}
