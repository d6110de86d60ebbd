//! Knowledge-base logic over social network models.
//!
//! This crate implements an epistemic logic whose models are social networks:
//! a set of agents, each carrying a finite knowledge base of ground formulas,
//! connected by typed connection and action relations, plus an environment
//! knowledge base holding the ground facts of the world. Satisfaction of a
//! knowledge formula `K[i] phi` is *derivability*: the agent's knowledge base
//! must prove `phi` in KD4 (serial, transitive frames; knowledge need not be
//! true, so there is no T axiom, and negative introspection is deliberately
//! absent).
//!
//! The pieces fit together like this:
//!
//! * [`logic`] - terms, formulas, vocabularies, grounding, and the size
//!   measure used by the cost model.
//! * [`deduction`] - a tableau-based KD4 derivation engine for individual and
//!   distributed knowledge.
//! * [`snm`] - social network models and their consistency discipline.
//! * [`kripke`] - explicit Kripke models, their satisfaction relation, and
//!   canonical model construction from maximal consistent sets.
//! * [`translate`] - characteristic sets/formulas of a network model, the
//!   translation into a canonical Kripke model, and its inverse.
//! * [`checker`] - the network-side model checker, bounded common-knowledge
//!   checking, and the cost reports comparing both semantics.
//! * [`text`] - parsers and printers for the formula, network, and Kripke
//!   file formats.
//! * [`corpus`] - seeded random instance generation for benchmarks and test
//!   suites.

pub mod checker;
pub mod corpus;
pub mod deduction;
pub mod kripke;
pub mod logic;
pub mod snm;
pub mod text;
pub mod translate;
