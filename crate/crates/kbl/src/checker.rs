//! Model checking over social network models.
//!
//! Satisfaction is three-valued. Boolean structure and atoms are classical:
//! regular atoms hold when the environment's base contains them, connection
//! and action atoms when the named relation holds. `K[i] phi` holds when the
//! agent's base derives `phi`, and `D[G] phi` when the pooled bases do.
//! Common knowledge is where the third value enters: `C[G] phi` is checked
//! by scanning `E^m` up to a configurable depth, refuting on the first
//! failing level and confirming through the induction rule (if `eps` implies
//! `E[G](phi && eps)` is a theorem, `eps` establishes `C[G] phi`; the
//! witness `eps = E^m phi` is reported). When neither side settles within
//! the bound the verdict is [`Verdict::BoundExhausted`].
//!
//! A `C[G]` occurrence in positive position under `K`/`D` is rewritten to
//! its induction witness before derivation, which keeps the verdict sound:
//! `True` still means the base derives a formula that establishes the
//! original. A failed derivation of the rewritten body no longer refutes,
//! so it reports bound exhaustion, and negative occurrences under a
//! modality are rejected outright.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::deduction::{self, DeductionError, ProverConfig};
use crate::logic::{AgentId, Formula, Group, LogicError, PredKind, Term};
use crate::snm::{Snm, SnmError};

/// Checker limits.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Highest `E^m` depth scanned for common knowledge.
    pub common_bound: u32,
    pub prover: ProverConfig,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            common_bound: 3,
            prover: ProverConfig::default(),
        }
    }
}

/// Three-valued satisfaction verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    /// Common-knowledge checking ran out of depth before settling.
    BoundExhausted,
}

impl Verdict {
    fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    fn negate(self) -> Verdict {
        match self {
            Verdict::True => Verdict::False,
            Verdict::False => Verdict::True,
            Verdict::BoundExhausted => Verdict::BoundExhausted,
        }
    }

    fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::True, Verdict::True) => Verdict::True,
            _ => Verdict::BoundExhausted,
        }
    }

    fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::True, _) | (_, Verdict::True) => Verdict::True,
            (Verdict::False, Verdict::False) => Verdict::False,
            _ => Verdict::BoundExhausted,
        }
    }
}

/// Outcome of a common-knowledge check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommonVerdict {
    /// Established at depth `k`; `witness` is the `E^k` instance whose
    /// induction step is a theorem.
    True { k: u32, witness: Formula },
    /// Refuted: `E^k phi` fails.
    False { k: u32 },
    BoundExhausted { bound: u32 },
}

impl CommonVerdict {
    pub fn verdict(&self) -> Verdict {
        match self {
            CommonVerdict::True { .. } => Verdict::True,
            CommonVerdict::False { .. } => Verdict::False,
            CommonVerdict::BoundExhausted { .. } => Verdict::BoundExhausted,
        }
    }
}

/// Errors from the checker.
#[derive(Debug, Error)]
pub enum CheckError {
    #[error("agent {0} is not part of the model")]
    UnknownAgent(AgentId),
    #[error("predicate {0} is not declared")]
    UnknownPredicate(String),
    #[error("predicate {name} is declared {declared} but used {used}")]
    KindMismatch {
        name: String,
        declared: &'static str,
        used: &'static str,
    },
    #[error("{kind} atom {atom} must apply to two agents")]
    EdgeArity { kind: &'static str, atom: String },
    #[error("common knowledge under a negation inside a derivation goal is unsupported: {0}")]
    NegativeCommon(String),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Deduction(#[from] DeductionError),
    #[error(transparent)]
    Snm(#[from] SnmError),
}

fn kind_name(k: PredKind) -> &'static str {
    match k {
        PredKind::Regular => "regular",
        PredKind::Connection => "connection",
        PredKind::Action => "action",
    }
}

/// Checks a closed formula against the model. The formula is grounded
/// first, so quantifiers range over the model's sorts.
pub fn check(snm: &Snm, phi: &Formula, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    let ground = phi.ground(&snm.vocab)?;
    eval(snm, &ground, cfg)
}

fn require_agent(snm: &Snm, agent: &AgentId) -> Result<(), CheckError> {
    if snm.agents.contains(agent) {
        Ok(())
    } else {
        Err(CheckError::UnknownAgent(agent.clone()))
    }
}

fn atom_agents(snm: &Snm, f: &Formula) -> Result<(AgentId, AgentId), CheckError> {
    let (kind, args) = match f {
        Formula::Pred { kind, args, .. } => (*kind, args),
        _ => unreachable!("edge atoms are predicates"),
    };
    let consts: Vec<&String> = args
        .iter()
        .filter_map(|t| match t {
            Term::Const(c) => Some(c),
            _ => None,
        })
        .collect();
    if consts.len() != 2 || args.len() != 2 {
        return Err(CheckError::EdgeArity {
            kind: kind_name(kind),
            atom: f.to_string(),
        });
    }
    let from = AgentId::new(consts[0].clone());
    let to = AgentId::new(consts[1].clone());
    require_agent(snm, &from)?;
    require_agent(snm, &to)?;
    Ok((from, to))
}

fn eval(snm: &Snm, phi: &Formula, cfg: &CheckConfig) -> Result<Verdict, CheckError> {
    match phi {
        Formula::False => Ok(Verdict::False),
        Formula::Pred { kind, name, .. } => {
            match snm.vocab.predicates.get(name) {
                Some(decl) if decl.kind != *kind => {
                    return Err(CheckError::KindMismatch {
                        name: name.clone(),
                        declared: kind_name(decl.kind),
                        used: kind_name(*kind),
                    })
                }
                Some(_) => {}
                None => return Err(CheckError::UnknownPredicate(name.clone())),
            }
            match kind {
                PredKind::Regular => Ok(Verdict::from_bool(snm.env().contains_ground(phi))),
                PredKind::Connection => {
                    let (from, to) = atom_agents(snm, phi)?;
                    Ok(Verdict::from_bool(snm.connection_holds(name, &from, &to)?))
                }
                PredKind::Action => {
                    let (from, to) = atom_agents(snm, phi)?;
                    Ok(Verdict::from_bool(snm.action_holds(name, &from, &to)?))
                }
            }
        }
        Formula::Not(x) => Ok(eval(snm, x, cfg)?.negate()),
        Formula::And(a, b) => {
            let va = eval(snm, a, cfg)?;
            if va == Verdict::False {
                return Ok(Verdict::False);
            }
            Ok(va.and(eval(snm, b, cfg)?))
        }
        Formula::Forall { .. } => unreachable!("check grounds its input"),
        Formula::Knows(agent, body) => {
            require_agent(snm, agent)?;
            let premises = snm.kb(agent)?.ground_formulas();
            derive_verdict(snm, agent, &premises, body, cfg)
        }
        Formula::Everyone(g, body) => {
            let mut v = Verdict::True;
            for i in g {
                let ki = Formula::knows(i.clone(), (**body).clone());
                v = v.and(eval(snm, &ki, cfg)?);
                if v == Verdict::False {
                    break;
                }
            }
            Ok(v)
        }
        Formula::Someone(g, body) => {
            let mut v = Verdict::False;
            for i in g {
                let ki = Formula::knows(i.clone(), (**body).clone());
                v = v.or(eval(snm, &ki, cfg)?);
                if v == Verdict::True {
                    break;
                }
            }
            Ok(v)
        }
        Formula::Common(g, body) => Ok(check_common(snm, g, body, cfg)?.verdict()),
        Formula::Distributed(g, body) => {
            let mut parts = Vec::new();
            for i in g {
                require_agent(snm, i)?;
                parts.push((i.clone(), snm.kb(i)?.ground_formulas()));
            }
            let goal = match resolve_common(snm, body, true, cfg)? {
                Resolution::Done(f) => f,
                Resolution::Exhausted => return Ok(Verdict::BoundExhausted),
            };
            let exact = !body.mentions_common();
            let derivable = deduction::derive_group(&parts, &goal, &cfg.prover)?;
            Ok(match (derivable, exact) {
                (true, _) => Verdict::True,
                (false, true) => Verdict::False,
                (false, false) => Verdict::BoundExhausted,
            })
        }
    }
}

/// `K[i]` evaluation: positive common-knowledge occurrences in the goal are
/// replaced by their induction witnesses before derivation. When a rewrite
/// happened, a failed derivation is inconclusive rather than a refutation.
fn derive_verdict(
    snm: &Snm,
    owner: &AgentId,
    premises: &[Formula],
    body: &Formula,
    cfg: &CheckConfig,
) -> Result<Verdict, CheckError> {
    let goal = match resolve_common(snm, body, true, cfg)? {
        Resolution::Done(f) => f,
        Resolution::Exhausted => return Ok(Verdict::BoundExhausted),
    };
    let exact = !body.mentions_common();
    let derivable = deduction::derive(owner, premises, &goal, &cfg.prover)?;
    Ok(match (derivable, exact) {
        (true, _) => Verdict::True,
        (false, true) => Verdict::False,
        (false, false) => Verdict::BoundExhausted,
    })
}

enum Resolution {
    Done(Formula),
    Exhausted,
}

/// Rewrites positive `C[G]` occurrences to their induction witnesses.
fn resolve_common(
    snm: &Snm,
    f: &Formula,
    positive: bool,
    cfg: &CheckConfig,
) -> Result<Resolution, CheckError> {
    if !f.mentions_common() {
        return Ok(Resolution::Done(f.clone()));
    }
    match f {
        Formula::Common(g, body) => {
            if !positive {
                return Err(CheckError::NegativeCommon(f.to_string()));
            }
            match check_common(snm, g, body, cfg)? {
                CommonVerdict::True { witness, .. } => Ok(Resolution::Done(witness)),
                _ => Ok(Resolution::Exhausted),
            }
        }
        Formula::Not(x) => match resolve_common(snm, x, !positive, cfg)? {
            Resolution::Done(inner) => Ok(Resolution::Done(inner.not())),
            Resolution::Exhausted => Ok(Resolution::Exhausted),
        },
        Formula::And(a, b) => {
            let ra = resolve_common(snm, a, positive, cfg)?;
            let rb = resolve_common(snm, b, positive, cfg)?;
            match (ra, rb) {
                (Resolution::Done(x), Resolution::Done(y)) => Ok(Resolution::Done(x.and(y))),
                _ => Ok(Resolution::Exhausted),
            }
        }
        Formula::Knows(i, body) => match resolve_common(snm, body, positive, cfg)? {
            Resolution::Done(inner) => Ok(Resolution::Done(Formula::knows(i.clone(), inner))),
            Resolution::Exhausted => Ok(Resolution::Exhausted),
        },
        Formula::Everyone(g, body) => match resolve_common(snm, body, positive, cfg)? {
            Resolution::Done(inner) => Ok(Resolution::Done(Formula::everyone(g.clone(), inner))),
            Resolution::Exhausted => Ok(Resolution::Exhausted),
        },
        Formula::Someone(g, body) => match resolve_common(snm, body, positive, cfg)? {
            Resolution::Done(inner) => Ok(Resolution::Done(Formula::someone(g.clone(), inner))),
            Resolution::Exhausted => Ok(Resolution::Exhausted),
        },
        Formula::Distributed(g, body) => match resolve_common(snm, body, positive, cfg)? {
            Resolution::Done(inner) => Ok(Resolution::Done(Formula::distributed(g.clone(), inner))),
            Resolution::Exhausted => Ok(Resolution::Exhausted),
        },
        Formula::False | Formula::Pred { .. } | Formula::Forall { .. } => {
            Ok(Resolution::Done(f.clone()))
        }
    }
}

/// Bounded check of `C[G] phi`.
///
/// For each depth `m` up to the bound: a failing `E^m phi` (at `m >= 1`)
/// refutes; a holding `E^m phi` whose induction step
/// `E^m phi -> E[G](phi && E^m phi)` is a KD4 theorem confirms, reporting
/// `E^m phi` as the witness. Nested positive `C` occurrences inside `phi`
/// are themselves resolved to witnesses for the theorem check.
pub fn check_common(
    snm: &Snm,
    g: &Group,
    phi: &Formula,
    cfg: &CheckConfig,
) -> Result<CommonVerdict, CheckError> {
    for i in g {
        require_agent(snm, i)?;
    }
    let resolved = match resolve_common(snm, phi, true, cfg)? {
        Resolution::Done(f) => Some(f),
        Resolution::Exhausted => None,
    };
    let mut em = phi.clone();
    let mut em_resolved = resolved.clone();
    for m in 0..=cfg.common_bound {
        if m > 0 {
            em = Formula::everyone(g.clone(), em);
            em_resolved = em_resolved.map(|e| Formula::everyone(g.clone(), e));
        }
        let v = eval(snm, &em, cfg)?;
        if m >= 1 && v == Verdict::False {
            return Ok(CommonVerdict::False { k: m });
        }
        if v == Verdict::True {
            if let (Some(phi_r), Some(eps)) = (&resolved, &em_resolved) {
                let step = eps
                    .clone()
                    .implies(Formula::everyone(g.clone(), phi_r.clone().and(eps.clone())));
                if deduction::valid(&step, &cfg.prover)? {
                    return Ok(CommonVerdict::True {
                        k: m,
                        witness: eps.clone(),
                    });
                }
            }
        }
    }
    Ok(CommonVerdict::BoundExhausted {
        bound: cfg.common_bound,
    })
}

/// Top-most knowledge subformulas: the `K[i]`-rooted subformulas not under
/// the scope of any knowledge modality. `E`/`S` are expanded first; `C`/`D`
/// close scope without contributing members.
pub fn outer_k(phi: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::False | Formula::Pred { .. } => {}
            Formula::Not(x) => walk(x, out),
            Formula::And(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Formula::Forall { body, .. } => walk(body, out),
            Formula::Knows(..) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::Everyone(..) | Formula::Someone(..) => {
                unreachable!("expanded before the walk")
            }
            Formula::Common(..) | Formula::Distributed(..) => {}
        }
    }
    let mut out = Vec::new();
    walk(&phi.expand_derived(), &mut out);
    out
}

/// Cost of one outer knowledge member.
#[derive(Debug, Clone)]
pub struct OuterCost {
    /// The `K[i]`-rooted subformula.
    pub member: Formula,
    pub agent: AgentId,
    /// Size of the member's body.
    pub body_size: u64,
    /// Glue-free size of the agent's base (summed source forms).
    pub kb_size: u64,
    /// `2^kb_size`, saturating.
    pub term: u128,
    /// The member's own satisfaction verdict.
    pub verdict: Verdict,
}

/// Worst-case cost comparison of checking a formula on the network model
/// against checking it on the translated Kripke model.
///
/// The network side pays one derivation per outer knowledge member, each
/// exponential in that agent's base alone; the Kripke side pays for the
/// canonical model of the whole characteristic formula. Sizes are measured
/// on the grounded query and on base entries as written (no conjunction
/// glue, no `K` wrappers), matching the exponents the translation actually
/// produces.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// The grounded query.
    pub formula: Formula,
    /// Its size; the non-modal evaluation cost on both sides.
    pub formula_size: u64,
    pub outer: Vec<OuterCost>,
    /// `sum of 2^kb_size + formula_size`.
    pub snm_bound: u128,
    /// Glue-free size of the model's characteristic formula.
    pub characteristic_size: u64,
    /// `2^characteristic_size + formula_size`.
    pub kripke_bound: u128,
    pub verdict: Verdict,
    pub elapsed: Duration,
}

fn pow2(exp: u64) -> u128 {
    if exp >= 127 {
        u128::MAX
    } else {
        1u128 << exp
    }
}

/// Glue-free size of the model's characteristic formula: base entries as
/// written, one three-node atom per relation edge, and the environment's
/// atoms.
pub fn characteristic_size(snm: &Snm) -> u64 {
    let mut total = 0u64;
    for agent in &snm.agents {
        total += snm.kb(agent).expect("every agent has a base").characteristic_size();
    }
    for rel in snm.connections.values().chain(snm.actions.values()) {
        total += 3 * rel.len() as u64;
    }
    total += snm.env().characteristic_size();
    total
}

/// Checks the formula and reports the two-sided cost bounds.
pub fn cost_report(snm: &Snm, phi: &Formula, cfg: &CheckConfig) -> Result<CostReport, CheckError> {
    let started = Instant::now();
    let ground = phi.ground(&snm.vocab)?;
    let verdict = eval(snm, &ground, cfg)?;
    let elapsed = started.elapsed();

    let formula_size = ground.size();
    let mut outer = Vec::new();
    for member in outer_k(&ground) {
        let (agent, body) = match &member {
            Formula::Knows(i, body) => (i.clone(), body),
            _ => unreachable!("outer_k returns knowledge members"),
        };
        require_agent(snm, &agent)?;
        let kb_size = snm.kb(&agent)?.characteristic_size();
        let member_verdict = eval(snm, &member, cfg)?;
        outer.push(OuterCost {
            member: member.clone(),
            agent,
            body_size: body.size(),
            kb_size,
            term: pow2(kb_size),
            verdict: member_verdict,
        });
    }
    let snm_bound = outer
        .iter()
        .fold(0u128, |acc, o| acc.saturating_add(o.term))
        .saturating_add(formula_size as u128);
    let char_size = characteristic_size(snm);
    let kripke_bound = pow2(char_size).saturating_add(formula_size as u128);

    Ok(CostReport {
        formula: ground,
        formula_size,
        outer,
        snm_bound,
        characteristic_size: char_size,
        kripke_bound,
        verdict,
        elapsed,
    })
}

/// The strict cost inequality, where the comparison is meaningful: `None`
/// when the formula has no outer knowledge members.
pub fn snm_strictly_cheaper(report: &CostReport) -> Option<bool> {
    if report.outer.is_empty() {
        None
    } else {
        Some(report.snm_bound < report.kripke_bound)
    }
}
