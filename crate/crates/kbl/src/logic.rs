//! Terms, formulas, and vocabularies.
//!
//! The core language has falsum, predicates over terms, negation, conjunction,
//! universal quantification over finite sorts, and the knowledge modalities
//! `K[i]`, `E[G]`, `S[G]`, `C[G]`, `D[G]`. Disjunction and implication are
//! abbreviations: the parser rewrites `a || b` to `!(!a && !b)` and `a -> b`
//! to `!(a && !b)` immediately, and [`Formula::size`] and the printer
//! recognize those shapes so the abbreviated connectives count and render as
//! single nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Agent identifier. The environment uses the reserved id [`crate::snm::ENV_AGENT`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Self {
        AgentId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        AgentId::new(s)
    }
}

/// A group of agents for the `E`, `S`, `C`, `D` modalities. Always non-empty.
pub type Group = BTreeSet<AgentId>;

/// Predicate classification: ordinary facts, connection relations, or action
/// relations. Connection and action predicates always take two agent
/// arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredKind {
    Regular,
    Connection,
    Action,
}

/// First-order terms: constants, variables, and applications of interpreted
/// functions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    /// Number of syntax nodes in the term.
    pub fn size(&self) -> u64 {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<u64>(),
        }
    }

    fn subst(&self, var: &str, value: &str) -> Term {
        match self {
            Term::Var(v) if v == var => Term::Const(value.to_string()),
            Term::Const(_) | Term::Var(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|t| t.subst(var, value)).collect())
            }
        }
    }

    fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => {
                for a in args {
                    a.free_vars(out);
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => f.write_str(v),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Formulas over the core connectives. `||` and `->` exist only as printed
/// and sized views of their `!`/`&&` encodings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    False,
    Pred {
        kind: PredKind,
        name: String,
        args: Vec<Term>,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Forall {
        var: String,
        sort: String,
        body: Box<Formula>,
    },
    Knows(AgentId, Box<Formula>),
    Everyone(Group, Box<Formula>),
    Someone(Group, Box<Formula>),
    Common(Group, Box<Formula>),
    Distributed(Group, Box<Formula>),
}

impl Formula {
    pub fn pred(kind: PredKind, name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred {
            kind,
            name: name.into(),
            args,
        }
    }

    /// Zero-argument regular predicate (a propositional atom).
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::pred(PredKind::Regular, name, vec![])
    }

    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    /// `a || b` encoded as `!(!a && !b)`.
    pub fn or(self, other: Formula) -> Self {
        self.not().and(other.not()).not()
    }

    /// `a -> b` encoded as `!(a && !b)`.
    pub fn implies(self, other: Formula) -> Self {
        self.and(other.not()).not()
    }

    /// `!false`, the canonical truth constant.
    pub fn truth() -> Self {
        Formula::False.not()
    }

    pub fn knows(agent: impl Into<AgentId>, body: Formula) -> Self {
        Formula::Knows(agent.into(), Box::new(body))
    }

    pub fn everyone(group: Group, body: Formula) -> Self {
        assert!(!group.is_empty(), "group modality needs a non-empty group");
        Formula::Everyone(group, Box::new(body))
    }

    pub fn someone(group: Group, body: Formula) -> Self {
        assert!(!group.is_empty(), "group modality needs a non-empty group");
        Formula::Someone(group, Box::new(body))
    }

    pub fn common(group: Group, body: Formula) -> Self {
        assert!(!group.is_empty(), "group modality needs a non-empty group");
        Formula::Common(group, Box::new(body))
    }

    pub fn distributed(group: Group, body: Formula) -> Self {
        assert!(!group.is_empty(), "group modality needs a non-empty group");
        Formula::Distributed(group, Box::new(body))
    }

    pub fn forall(var: impl Into<String>, sort: impl Into<String>, body: Formula) -> Self {
        Formula::Forall {
            var: var.into(),
            sort: sort.into(),
            body: Box::new(body),
        }
    }

    /// Left-associated conjunction of all formulas; `!false` when empty.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::truth(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// The `!(!a && !b)` shape abbreviating `a || b`.
    pub fn or_view(&self) -> Option<(&Formula, &Formula)> {
        if let Formula::Not(inner) = self {
            if let Formula::And(l, r) = inner.as_ref() {
                if let (Formula::Not(a), Formula::Not(b)) = (l.as_ref(), r.as_ref()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// The `!(a && !b)` shape abbreviating `a -> b`. Checked after
    /// [`Formula::or_view`], which takes precedence when both match: an
    /// implication whose antecedent is itself negation-headed encodes to the
    /// same tree as a disjunction and is read as the disjunction.
    pub fn implies_view(&self) -> Option<(&Formula, &Formula)> {
        if self.or_view().is_some() {
            return None;
        }
        if let Formula::Not(inner) = self {
            if let Formula::And(l, r) = inner.as_ref() {
                if let Formula::Not(b) = r.as_ref() {
                    return Some((l, b));
                }
            }
        }
        None
    }

    /// Number of syntax nodes, counting each predicate argument term and
    /// each `||`/`->` view as written rather than as encoded.
    pub fn size(&self) -> u64 {
        if let Some((a, b)) = self.or_view() {
            return 1 + a.size() + b.size();
        }
        if let Some((a, b)) = self.implies_view() {
            return 1 + a.size() + b.size();
        }
        match self {
            Formula::False => 1,
            Formula::Pred { args, .. } => 1 + args.iter().map(Term::size).sum::<u64>(),
            Formula::Not(x) => 1 + x.size(),
            Formula::And(a, b) => 1 + a.size() + b.size(),
            Formula::Forall { body, .. } => 1 + body.size(),
            Formula::Knows(_, body)
            | Formula::Everyone(_, body)
            | Formula::Someone(_, body)
            | Formula::Common(_, body)
            | Formula::Distributed(_, body) => 1 + body.size(),
        }
    }

    /// Replaces free occurrences of `var` by the constant `value`. Bound
    /// occurrences under a quantifier reusing the name are untouched.
    pub fn substitute(&self, var: &str, value: &str) -> Formula {
        match self {
            Formula::False => Formula::False,
            Formula::Pred { kind, name, args } => Formula::Pred {
                kind: *kind,
                name: name.clone(),
                args: args.iter().map(|t| t.subst(var, value)).collect(),
            },
            Formula::Not(x) => x.substitute(var, value).not(),
            Formula::And(a, b) => a.substitute(var, value).and(b.substitute(var, value)),
            Formula::Forall {
                var: v,
                sort,
                body,
            } => {
                if v == var {
                    self.clone()
                } else {
                    Formula::forall(v.clone(), sort.clone(), body.substitute(var, value))
                }
            }
            Formula::Knows(i, body) => Formula::Knows(i.clone(), Box::new(body.substitute(var, value))),
            Formula::Everyone(g, body) => {
                Formula::Everyone(g.clone(), Box::new(body.substitute(var, value)))
            }
            Formula::Someone(g, body) => {
                Formula::Someone(g.clone(), Box::new(body.substitute(var, value)))
            }
            Formula::Common(g, body) => {
                Formula::Common(g.clone(), Box::new(body.substitute(var, value)))
            }
            Formula::Distributed(g, body) => {
                Formula::Distributed(g.clone(), Box::new(body.substitute(var, value)))
            }
        }
    }

    /// Variables occurring free anywhere in the formula.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::False => {}
                Formula::Pred { args, .. } => {
                    let mut vars = BTreeSet::new();
                    for t in args {
                        t.free_vars(&mut vars);
                    }
                    for v in vars {
                        if !bound.iter().any(|b| *b == v) {
                            out.insert(v);
                        }
                    }
                }
                Formula::Not(x) => walk(x, bound, out),
                Formula::And(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Forall { var, body, .. } => {
                    bound.push(var.clone());
                    walk(body, bound, out);
                    bound.pop();
                }
                Formula::Knows(_, body)
                | Formula::Everyone(_, body)
                | Formula::Someone(_, body)
                | Formula::Common(_, body)
                | Formula::Distributed(_, body) => walk(body, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// True when the formula contains no quantifiers and every term is a
    /// constant (the shape stored in knowledge bases and fed to the prover).
    pub fn is_ground(&self) -> bool {
        fn term_ground(t: &Term) -> bool {
            matches!(t, Term::Const(_))
        }
        match self {
            Formula::False => true,
            Formula::Pred { args, .. } => args.iter().all(term_ground),
            Formula::Not(x) => x.is_ground(),
            Formula::And(a, b) => a.is_ground() && b.is_ground(),
            Formula::Forall { .. } => false,
            Formula::Knows(_, body)
            | Formula::Everyone(_, body)
            | Formula::Someone(_, body)
            | Formula::Common(_, body)
            | Formula::Distributed(_, body) => body.is_ground(),
        }
    }

    /// Expands quantifiers over their finite sorts and evaluates function
    /// applications and declared constants to domain elements.
    ///
    /// Expansion is innermost-first; a quantifier over a singleton domain
    /// collapses to the instantiated body without a conjunction node.
    /// Undeclared constants denote themselves. Grounding a ground formula is
    /// the identity, so the operation is idempotent.
    pub fn ground(&self, vocab: &Vocabulary) -> Result<Formula, LogicError> {
        let free = self.free_vars();
        if let Some(v) = free.into_iter().next() {
            return Err(LogicError::FreeVariable { name: v });
        }
        self.ground_rec(vocab)
    }

    fn ground_rec(&self, vocab: &Vocabulary) -> Result<Formula, LogicError> {
        match self {
            Formula::False => Ok(Formula::False),
            Formula::Pred { kind, name, args } => {
                let mut ground_args = Vec::with_capacity(args.len());
                for t in args {
                    ground_args.push(Term::Const(vocab.eval_term(t)?));
                }
                Ok(Formula::Pred {
                    kind: *kind,
                    name: name.clone(),
                    args: ground_args,
                })
            }
            Formula::Not(x) => Ok(x.ground_rec(vocab)?.not()),
            Formula::And(a, b) => Ok(a.ground_rec(vocab)?.and(b.ground_rec(vocab)?)),
            Formula::Forall { var, sort, body } => {
                let elems = vocab
                    .domains
                    .get(sort)
                    .ok_or_else(|| LogicError::UnknownSort { sort: sort.clone() })?;
                let mut instances = Vec::with_capacity(elems.len());
                for e in elems {
                    instances.push(body.substitute(var, e).ground_rec(vocab)?);
                }
                match instances.len() {
                    0 => Err(LogicError::EmptyDomain { sort: sort.clone() }),
                    1 => Ok(instances.pop().expect("just checked length")),
                    _ => Ok(Formula::and_all(instances)),
                }
            }
            Formula::Knows(i, body) => Ok(Formula::Knows(i.clone(), Box::new(body.ground_rec(vocab)?))),
            Formula::Everyone(g, body) => {
                Ok(Formula::Everyone(g.clone(), Box::new(body.ground_rec(vocab)?)))
            }
            Formula::Someone(g, body) => {
                Ok(Formula::Someone(g.clone(), Box::new(body.ground_rec(vocab)?)))
            }
            Formula::Common(g, body) => {
                Ok(Formula::Common(g.clone(), Box::new(body.ground_rec(vocab)?)))
            }
            Formula::Distributed(g, body) => {
                Ok(Formula::Distributed(g.clone(), Box::new(body.ground_rec(vocab)?)))
            }
        }
    }

    /// Rewrites `E[G]` to the conjunction of `K[i]` and `S[G]` to the
    /// disjunction, leaving the other modalities in place. Group members are
    /// expanded in their sorted order.
    pub fn expand_derived(&self) -> Formula {
        match self {
            Formula::False => Formula::False,
            Formula::Pred { .. } => self.clone(),
            Formula::Not(x) => x.expand_derived().not(),
            Formula::And(a, b) => a.expand_derived().and(b.expand_derived()),
            Formula::Forall { var, sort, body } => {
                Formula::forall(var.clone(), sort.clone(), body.expand_derived())
            }
            Formula::Knows(i, body) => Formula::Knows(i.clone(), Box::new(body.expand_derived())),
            Formula::Everyone(g, body) => {
                let inner = body.expand_derived();
                Formula::and_all(g.iter().map(|i| Formula::knows(i.clone(), inner.clone())))
            }
            Formula::Someone(g, body) => {
                let inner = body.expand_derived();
                let mut it = g.iter().map(|i| Formula::knows(i.clone(), inner.clone()));
                let first = it.next().expect("groups are non-empty");
                it.fold(first, Formula::or)
            }
            Formula::Common(g, body) => Formula::Common(g.clone(), Box::new(body.expand_derived())),
            Formula::Distributed(g, body) => {
                Formula::Distributed(g.clone(), Box::new(body.expand_derived()))
            }
        }
    }

    /// True when a `C[...]` modality occurs anywhere in the formula.
    pub fn mentions_common(&self) -> bool {
        match self {
            Formula::False | Formula::Pred { .. } => false,
            Formula::Common(..) => true,
            Formula::Not(x) => x.mentions_common(),
            Formula::And(a, b) => a.mentions_common() || b.mentions_common(),
            Formula::Forall { body, .. }
            | Formula::Knows(_, body)
            | Formula::Everyone(_, body)
            | Formula::Someone(_, body)
            | Formula::Distributed(_, body) => body.mentions_common(),
        }
    }

    /// True when a `C[...]` or `D[...]` modality occurs anywhere.
    pub fn mentions_group_closure(&self) -> bool {
        match self {
            Formula::False | Formula::Pred { .. } => false,
            Formula::Common(..) | Formula::Distributed(..) => true,
            Formula::Not(x) => x.mentions_group_closure(),
            Formula::And(a, b) => a.mentions_group_closure() || b.mentions_group_closure(),
            Formula::Forall { body, .. }
            | Formula::Knows(_, body)
            | Formula::Everyone(_, body)
            | Formula::Someone(_, body) => body.mentions_group_closure(),
        }
    }

    /// Agents mentioned by any modality in the formula.
    pub fn agents(&self) -> BTreeSet<AgentId> {
        fn walk(f: &Formula, out: &mut BTreeSet<AgentId>) {
            match f {
                Formula::False | Formula::Pred { .. } => {}
                Formula::Not(x) => walk(x, out),
                Formula::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Formula::Forall { body, .. } => walk(body, out),
                Formula::Knows(i, body) => {
                    out.insert(i.clone());
                    walk(body, out);
                }
                Formula::Everyone(g, body)
                | Formula::Someone(g, body)
                | Formula::Common(g, body)
                | Formula::Distributed(g, body) => {
                    out.extend(g.iter().cloned());
                    walk(body, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut out);
        out
    }
}

/// Binding strength for printing; higher binds tighter.
fn precedence(f: &Formula) -> u8 {
    if f.or_view().is_some() {
        return 2;
    }
    if f.implies_view().is_some() {
        return 1;
    }
    match f {
        Formula::False | Formula::Pred { .. } => 5,
        Formula::Not(_)
        | Formula::Knows(..)
        | Formula::Everyone(..)
        | Formula::Someone(..)
        | Formula::Common(..)
        | Formula::Distributed(..) => 4,
        Formula::And(..) => 3,
        Formula::Forall { .. } => 0,
    }
}

fn fmt_child(f: &Formula, parent_prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if precedence(f) <= parent_prec {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

fn fmt_group(g: &Group, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (k, i) in g.iter().enumerate() {
        if k > 0 {
            write!(out, ", ")?;
        }
        write!(out, "{i}")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    /// Canonical printing: minimal parentheses, `&&`/`||` left-associated,
    /// `->` right-associated, and the `||`/`->` views rendered as written.
    /// Parsing the output reproduces the formula exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((a, b)) = self.or_view() {
            fmt_child(a, 2 - 1, f)?;
            write!(f, " || ")?;
            fmt_child(b, 2, f)?;
            return Ok(());
        }
        if let Some((a, b)) = self.implies_view() {
            fmt_child(a, 1, f)?;
            write!(f, " -> ")?;
            // Right-associated: an implication on the right needs no parens.
            if precedence(b) < 1 {
                write!(f, "({b})")
            } else {
                write!(f, "{b}")
            }
        } else {
            match self {
                Formula::False => write!(f, "false"),
                Formula::Pred { name, args, .. } => {
                    if args.is_empty() {
                        write!(f, "{name}")
                    } else {
                        write!(f, "{name}(")?;
                        for (k, a) in args.iter().enumerate() {
                            if k > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "{a}")?;
                        }
                        write!(f, ")")
                    }
                }
                Formula::Not(x) => {
                    write!(f, "!")?;
                    fmt_child(x, 3, f)
                }
                Formula::And(a, b) => {
                    fmt_child(a, 3 - 1, f)?;
                    write!(f, " && ")?;
                    fmt_child(b, 3, f)
                }
                Formula::Forall { var, sort, body } => {
                    write!(f, "forall {var} : {sort} . {body}")
                }
                Formula::Knows(i, body) => {
                    write!(f, "K[{i}] ")?;
                    fmt_child(body, 3, f)
                }
                Formula::Everyone(g, body) => {
                    write!(f, "E[")?;
                    fmt_group(g, f)?;
                    write!(f, "] ")?;
                    fmt_child(body, 3, f)
                }
                Formula::Someone(g, body) => {
                    write!(f, "S[")?;
                    fmt_group(g, f)?;
                    write!(f, "] ")?;
                    fmt_child(body, 3, f)
                }
                Formula::Common(g, body) => {
                    write!(f, "C[")?;
                    fmt_group(g, f)?;
                    write!(f, "] ")?;
                    fmt_child(body, 3, f)
                }
                Formula::Distributed(g, body) => {
                    write!(f, "D[")?;
                    fmt_group(g, f)?;
                    write!(f, "] ")?;
                    fmt_child(body, 3, f)
                }
            }
        }
    }
}

/// Declaration of a predicate symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub arity: usize,
    pub kind: PredKind,
}

/// Declaration of an interpreted function with an explicit finite table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub arg_sorts: Vec<String>,
    pub result_sort: String,
    pub table: BTreeMap<Vec<String>, String>,
}

/// Sorts, predicates, constants, and function tables of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    /// Sort name to its finite, non-empty element list.
    pub domains: BTreeMap<String, Vec<String>>,
    pub predicates: BTreeMap<String, PredDecl>,
    /// Declared constants and the domain element each denotes. Constants not
    /// listed here denote themselves.
    pub constants: BTreeMap<String, String>,
    pub functions: BTreeMap<String, FuncDecl>,
}

/// Prefixes reserved for the marked translation of connection and action
/// predicates; user vocabularies must not declare predicates with them.
pub const CONNECTION_MARK: &str = "co_";
pub const ACTION_MARK: &str = "ac_";

impl Vocabulary {
    /// Evaluates a ground term to a domain element.
    pub fn eval_term(&self, t: &Term) -> Result<String, LogicError> {
        match t {
            Term::Var(v) => Err(LogicError::FreeVariable { name: v.clone() }),
            Term::Const(c) => Ok(self.constants.get(c).cloned().unwrap_or_else(|| c.clone())),
            Term::App(f, args) => {
                let decl = self
                    .functions
                    .get(f)
                    .ok_or_else(|| LogicError::UnknownFunction { name: f.clone() })?;
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_term(a)?);
                }
                decl.table
                    .get(&vals)
                    .cloned()
                    .ok_or_else(|| LogicError::FunctionUndefined {
                        func: f.clone(),
                        args: vals.join(", "),
                    })
            }
        }
    }

    /// Structural diagnostics: empty or duplicated domains, reserved
    /// predicate names, partial function tables, arities.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        for (sort, elems) in &self.domains {
            if elems.is_empty() {
                diags.push(format!("domain {sort} is empty"));
            }
            let unique: BTreeSet<_> = elems.iter().collect();
            if unique.len() != elems.len() {
                diags.push(format!("domain {sort} repeats an element"));
            }
        }
        for (name, decl) in &self.predicates {
            if name.starts_with(CONNECTION_MARK) || name.starts_with(ACTION_MARK) {
                diags.push(format!(
                    "predicate {name} uses a reserved marked-translation prefix"
                ));
            }
            if decl.kind != PredKind::Regular && decl.arity != 2 {
                diags.push(format!(
                    "{} predicate {name} must have arity 2, found {}",
                    match decl.kind {
                        PredKind::Connection => "connection",
                        PredKind::Action => "action",
                        PredKind::Regular => unreachable!(),
                    },
                    decl.arity
                ));
            }
        }
        for (name, decl) in &self.functions {
            let mut domains = Vec::new();
            let mut missing_sort = false;
            for s in &decl.arg_sorts {
                match self.domains.get(s) {
                    Some(elems) => domains.push(elems.clone()),
                    None => {
                        diags.push(format!("function {name} uses undeclared sort {s}"));
                        missing_sort = true;
                    }
                }
            }
            if self.domains.get(&decl.result_sort).is_none() {
                diags.push(format!(
                    "function {name} uses undeclared result sort {}",
                    decl.result_sort
                ));
                missing_sort = true;
            }
            if missing_sort {
                continue;
            }
            let result_dom = &self.domains[&decl.result_sort];
            let mut tuples: Vec<Vec<String>> = vec![vec![]];
            for dom in &domains {
                let mut next = Vec::new();
                for t in &tuples {
                    for e in dom {
                        let mut t2 = t.clone();
                        t2.push(e.clone());
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            for t in &tuples {
                match decl.table.get(t) {
                    None => diags.push(format!(
                        "function {name} is undefined on ({})",
                        t.join(", ")
                    )),
                    Some(r) if !result_dom.contains(r) => diags.push(format!(
                        "function {name} maps ({}) outside sort {}",
                        t.join(", "),
                        decl.result_sort
                    )),
                    Some(_) => {}
                }
            }
            for (t, _) in &decl.table {
                if !tuples.contains(t) {
                    diags.push(format!(
                        "function {name} lists a tuple ({}) outside its argument sorts",
                        t.join(", ")
                    ));
                }
            }
        }
        diags
    }
}

/// Errors raised by grounding and term evaluation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("formula contains free variable {name}")]
    FreeVariable { name: String },
    #[error("unknown sort {sort}")]
    UnknownSort { sort: String },
    #[error("sort {sort} has an empty domain")]
    EmptyDomain { sort: String },
    #[error("unknown function {name}")]
    UnknownFunction { name: String },
    #[error("function {func} is undefined on ({args})")]
    FunctionUndefined { func: String, args: String },
}
