//! Concrete syntax for formulas, network model files, and Kripke model
//! files. Parsing and printing are mutual inverses: printing any value and
//! parsing it back reproduces the value, and parse-print-parse is a fixpoint
//! on accepted input.
//!
//! Formula grammar, loosest binding first:
//!
//! ```text
//! formula  := or ( "->" formula )?                     right-associative
//! or       := and ( "||" and )*
//! and      := unary ( "&&" unary )*
//! unary    := "!" unary
//!           | ("K" | "E" | "S" | "C" | "D") "[" name ("," name)* "]" unary
//!           | "forall" name ":" name "." formula
//!           | "false" | "true"
//!           | name ( "(" term ("," term)* ")" )?
//!           | "(" formula ")"
//! term     := name ( "(" term ("," term)* ")" )?
//! ```
//!
//! Names are alphanumeric-underscore words. `K` takes one agent, the group
//! modalities one or more. An identifier in term position is a variable
//! when a quantifier binds it in scope and a constant otherwise. `||` and
//! `->` desugar to their `!`/`&&` encodings; `true` is shorthand for
//! `!false`. When a vocabulary is supplied, predicate names must be
//! declared and are checked for arity and kind; without one every atom is a
//! regular predicate of whatever arity it is used at.
//!
//! Network model files are line oriented. Lines whose first non-blank
//! character is `#` and blank lines are skipped. Directives:
//!
//! ```text
//! agents <name>*
//! domain <sort> = <element>+
//! predicate <name>/<arity> (regular | connection | action)
//! constant <name> = <element>
//! function <name> : <sort>+ -> <sort>
//! table <name> <element>* = <element>
//! connection <predicate> <from> <to>
//! action <predicate> <from> <to>
//! kb <agent>: <formula>
//! policy <agent>: <text>
//! ```
//!
//! Declarations may appear in any order except that `table` rows must
//! follow their `function` header. Knowledge entries are inserted in file
//! order with the usual consistency check, so an inconsistent base is a
//! parse-time diagnostic. The environment's base is addressed as `kb e:`.
//!
//! Kripke model files use:
//!
//! ```text
//! states <name>*
//! rel <agent> <from> <to>
//! val <state>: <atom> ("," <atom>)*
//! characteristic: <formula>
//! distinguished <state>
//! ```
//!
//! Every declared state carries a valuation entry (an empty one when no
//! `val` line mentions it; empty entries are not printed). The
//! `characteristic` and `distinguished` lines are optional carriers for
//! translated models.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::deduction::ProverConfig;
use crate::kripke::{KripkeModel, StateId};
use crate::logic::{
    AgentId, Formula, FuncDecl, Group, PredDecl, PredKind, Term, Vocabulary, ACTION_MARK,
    CONNECTION_MARK,
};
use crate::snm::Snm;

/// A syntax or well-formedness diagnostic with its source position.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Bang,
    AndAnd,
    OrOr,
    Arrow,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::LBracket => "`[`".to_string(),
            Token::RBracket => "`]`".to_string(),
            Token::Comma => "`,`".to_string(),
            Token::Colon => "`:`".to_string(),
            Token::Dot => "`.`".to_string(),
            Token::Bang => "`!`".to_string(),
            Token::AndAnd => "`&&`".to_string(),
            Token::OrOr => "`||`".to_string(),
            Token::Arrow => "`->`".to_string(),
            Token::Eof => "end of input".to_string(),
        }
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Tokenizes one formula, reporting positions relative to the given origin.
fn lex(input: &str, line: usize, col0: usize) -> Result<Vec<(Token, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    let mut line = line;
    let mut col = col0;
    while i < chars.len() {
        let c = chars[i];
        let (tok_line, tok_col) = (line, col);
        let advance = |i: &mut usize, col: &mut usize, n: usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            _ if c.is_whitespace() => advance(&mut i, &mut col, 1),
            '(' => {
                out.push((Token::LParen, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            ')' => {
                out.push((Token::RParen, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            '[' => {
                out.push((Token::LBracket, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            ']' => {
                out.push((Token::RBracket, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            ',' => {
                out.push((Token::Comma, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            ':' => {
                out.push((Token::Colon, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            '.' => {
                out.push((Token::Dot, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            '!' => {
                out.push((Token::Bang, tok_line, tok_col));
                advance(&mut i, &mut col, 1);
            }
            '&' if chars.get(i + 1) == Some(&'&') => {
                out.push((Token::AndAnd, tok_line, tok_col));
                advance(&mut i, &mut col, 2);
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                out.push((Token::OrOr, tok_line, tok_col));
                advance(&mut i, &mut col, 2);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Token::Arrow, tok_line, tok_col));
                advance(&mut i, &mut col, 2);
            }
            _ if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    advance(&mut i, &mut col, 1);
                }
                let word: String = chars[start..i].iter().collect();
                out.push((Token::Ident(word), tok_line, tok_col));
            }
            other => {
                return Err(ParseError::new(
                    tok_line,
                    tok_col,
                    format!("unexpected character `{other}`"),
                ))
            }
        }
    }
    out.push((Token::Eof, line, col));
    Ok(out)
}

/// Predicate resolution mode: against declarations, or everything regular.
#[derive(Clone, Copy)]
enum Kinds<'a> {
    Declared(&'a Vocabulary),
    Free,
}

struct FormulaParser<'a> {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
    kinds: Kinds<'a>,
    scope: Vec<String>,
}

impl<'a> FormulaParser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.tokens[self.pos];
        (l, c)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if t != Token::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let (l, c) = self.here();
            Err(ParseError::new(
                l,
                c,
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Token::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => {
                let (l, c) = self.here();
                Err(ParseError::new(
                    l,
                    c,
                    format!("expected {what}, found {}", other.describe()),
                ))
            }
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.formula()?;
            Ok(lhs.implies(rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Token::OrOr {
            self.bump();
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::AndAnd {
            self.bump();
            lhs = lhs.and(self.unary()?);
        }
        Ok(lhs)
    }

    fn group(&mut self) -> Result<Group, ParseError> {
        let (l, c) = self.here();
        self.expect(Token::LBracket)?;
        let mut group = Group::new();
        loop {
            let name = self.ident("an agent name")?;
            group.insert(AgentId::new(name));
            match self.bump() {
                Token::Comma => continue,
                Token::RBracket => break,
                other => {
                    let (l, c) = self.here();
                    return Err(ParseError::new(
                        l,
                        c,
                        format!("expected `,` or `]`, found {}", other.describe()),
                    ));
                }
            }
        }
        if group.is_empty() {
            return Err(ParseError::new(l, c, "group modalities need at least one agent"));
        }
        Ok(group)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Token::Ident(word) => {
                let next_is_bracket = self.tokens.get(self.pos + 1).map(|(t, _, _)| t)
                    == Some(&Token::LBracket);
                match word.as_str() {
                    "K" if next_is_bracket => {
                        self.bump();
                        self.expect(Token::LBracket)?;
                        let agent = self.ident("an agent name")?;
                        self.expect(Token::RBracket)?;
                        Ok(Formula::knows(AgentId::new(agent), self.unary()?))
                    }
                    "E" | "S" | "C" | "D" if next_is_bracket => {
                        self.bump();
                        let group = self.group()?;
                        let body = self.unary()?;
                        Ok(match word.as_str() {
                            "E" => Formula::everyone(group, body),
                            "S" => Formula::someone(group, body),
                            "C" => Formula::common(group, body),
                            _ => Formula::distributed(group, body),
                        })
                    }
                    "forall" => {
                        self.bump();
                        let var = self.ident("a variable name")?;
                        self.expect(Token::Colon)?;
                        let sort = self.ident("a sort name")?;
                        self.expect(Token::Dot)?;
                        self.scope.push(var.clone());
                        let body = self.formula();
                        self.scope.pop();
                        Ok(Formula::forall(var, sort, body?))
                    }
                    _ => self.primary(),
                }
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let (l, c) = self.here();
        match self.bump() {
            Token::LParen => {
                let inner = self.formula()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) if name == "false" => Ok(Formula::False),
            Token::Ident(name) if name == "true" => Ok(Formula::truth()),
            Token::Ident(name) => {
                let args = if *self.peek() == Token::LParen {
                    self.bump();
                    self.term_list()?
                } else {
                    Vec::new()
                };
                self.atom(name, args, l, c)
            }
            other => Err(ParseError::new(
                l,
                c,
                format!("expected a formula, found {}", other.describe()),
            )),
        }
    }

    /// Parses `t, t, ...)` after a consumed `(`.
    fn term_list(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut args = Vec::new();
        loop {
            args.push(self.term()?);
            match self.bump() {
                Token::Comma => continue,
                Token::RParen => break,
                other => {
                    let (l, c) = self.here();
                    return Err(ParseError::new(
                        l,
                        c,
                        format!("expected `,` or `)`, found {}", other.describe()),
                    ));
                }
            }
        }
        Ok(args)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let name = self.ident("a term")?;
        if *self.peek() == Token::LParen {
            self.bump();
            let args = self.term_list()?;
            Ok(Term::App(name, args))
        } else if self.scope.iter().any(|v| *v == name) {
            Ok(Term::Var(name))
        } else {
            Ok(Term::Const(name))
        }
    }

    fn atom(
        &mut self,
        name: String,
        args: Vec<Term>,
        l: usize,
        c: usize,
    ) -> Result<Formula, ParseError> {
        let kind = match self.kinds {
            Kinds::Free => PredKind::Regular,
            Kinds::Declared(vocab) => match vocab.predicates.get(&name) {
                None => {
                    return Err(ParseError::new(
                        l,
                        c,
                        format!("predicate `{name}` is not declared"),
                    ))
                }
                Some(decl) => {
                    if decl.arity != args.len() {
                        return Err(ParseError::new(
                            l,
                            c,
                            format!(
                                "predicate `{name}` expects {} arguments, got {}",
                                decl.arity,
                                args.len()
                            ),
                        ));
                    }
                    decl.kind
                }
            },
        };
        Ok(Formula::pred(kind, name, args))
    }
}

fn parse_formula_at(
    input: &str,
    line: usize,
    col0: usize,
    kinds: Kinds<'_>,
) -> Result<Formula, ParseError> {
    let tokens = lex(input, line, col0)?;
    let mut parser = FormulaParser {
        tokens,
        pos: 0,
        kinds,
        scope: Vec::new(),
    };
    let formula = parser.formula()?;
    if *parser.peek() != Token::Eof {
        let (l, c) = parser.here();
        return Err(ParseError::new(
            l,
            c,
            format!("unexpected {} after the formula", parser.peek().describe()),
        ));
    }
    Ok(formula)
}

/// Parses a formula against a vocabulary: predicates must be declared, and
/// their arity and kind come from the declaration.
pub fn parse_formula(input: &str, vocab: &Vocabulary) -> Result<Formula, ParseError> {
    parse_formula_at(input, 1, 1, Kinds::Declared(vocab))
}

/// Parses a formula with no declarations: every atom is a regular predicate
/// of the arity it is used at. This is the mode for Kripke-side formulas,
/// where marked atoms like `co_Friend(a, b)` are ordinary atoms.
pub fn parse_formula_free(input: &str) -> Result<Formula, ParseError> {
    parse_formula_at(input, 1, 1, Kinds::Free)
}

/// Parses a comma-separated agent list, e.g. `Alice, Bob`.
pub fn parse_group(input: &str) -> Result<Group, ParseError> {
    let mut group = Group::new();
    for piece in input.split(',') {
        let name = piece.trim();
        if name.is_empty() || !name.chars().all(is_ident_char) {
            return Err(ParseError::new(
                1,
                1,
                format!("`{}` is not an agent name", piece.trim()),
            ));
        }
        group.insert(AgentId::new(name));
    }
    Ok(group)
}

/// Splits a directive line into the word before the first `:` and the rest,
/// for `kb agent: formula` style lines.
fn split_colon(line: &str, line_no: usize) -> Result<(&str, &str, usize), ParseError> {
    match line.find(':') {
        None => Err(ParseError::new(
            line_no,
            line.chars().count() + 1,
            "expected `:` in this directive",
        )),
        Some(idx) => {
            let head = &line[..idx];
            let rest = &line[idx + 1..];
            let rest_col = line[..idx + 1].chars().count() + 1;
            Ok((head, rest, rest_col))
        }
    }
}

fn content_lines(input: &str) -> impl Iterator<Item = (usize, &str)> {
    input.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((k + 1, line))
        }
    })
}

/// Parses a network model file. Structural violations (undeclared symbols,
/// reserved prefixes, arity and kind mismatches) and knowledge-base
/// consistency failures are reported with the offending line.
pub fn parse_snm(input: &str, cfg: &ProverConfig) -> Result<Snm, ParseError> {
    let mut agents: BTreeSet<AgentId> = BTreeSet::new();
    let mut vocab = Vocabulary::default();
    let mut deferred: Vec<(usize, &str)> = Vec::new();
    let mut model_line = 1;

    let err = |line: usize, msg: String| ParseError::new(line, 1, msg);

    for (line_no, line) in content_lines(input) {
        let mut words = line.split_whitespace();
        let directive = words.next().expect("content lines are non-empty");
        match directive {
            "agents" => {
                model_line = line_no;
                for w in words {
                    agents.insert(AgentId::new(w));
                }
            }
            "domain" => {
                let rest: Vec<&str> = words.collect();
                let (name, elements) = match rest.split_first() {
                    Some((name, ["=", elements @ ..])) if !elements.is_empty() => {
                        (*name, elements)
                    }
                    _ => {
                        return Err(err(
                            line_no,
                            "expected `domain <sort> = <element>...`".to_string(),
                        ))
                    }
                };
                if vocab
                    .domains
                    .insert(name.to_string(), elements.iter().map(|s| s.to_string()).collect())
                    .is_some()
                {
                    return Err(err(line_no, format!("sort `{name}` is declared twice")));
                }
            }
            "predicate" => {
                let spec = words
                    .next()
                    .ok_or_else(|| err(line_no, "expected `predicate <name>/<arity> <kind>`".to_string()))?;
                let kind_word = words
                    .next()
                    .ok_or_else(|| err(line_no, "expected a predicate kind".to_string()))?;
                let (name, arity) = spec.split_once('/').ok_or_else(|| {
                    err(line_no, format!("expected `<name>/<arity>`, got `{spec}`"))
                })?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(line_no, format!("`{arity}` is not an arity")))?;
                let kind = match kind_word {
                    "regular" => PredKind::Regular,
                    "connection" => PredKind::Connection,
                    "action" => PredKind::Action,
                    other => {
                        return Err(err(
                            line_no,
                            format!("`{other}` is not a predicate kind (regular, connection, action)"),
                        ))
                    }
                };
                if name.starts_with(CONNECTION_MARK) || name.starts_with(ACTION_MARK) {
                    return Err(err(
                        line_no,
                        format!("predicate `{name}` uses a reserved marked prefix"),
                    ));
                }
                if vocab
                    .predicates
                    .insert(name.to_string(), PredDecl { arity, kind })
                    .is_some()
                {
                    return Err(err(line_no, format!("predicate `{name}` is declared twice")));
                }
            }
            "constant" => {
                let rest: Vec<&str> = words.collect();
                match rest.as_slice() {
                    [name, "=", value] => {
                        vocab.constants.insert(name.to_string(), value.to_string());
                    }
                    _ => {
                        return Err(err(
                            line_no,
                            "expected `constant <name> = <element>`".to_string(),
                        ))
                    }
                }
            }
            "function" => {
                let rest: Vec<&str> = words.collect();
                let (name, sig) = match rest.split_first() {
                    Some((name, [":", sig @ ..])) => (*name, sig),
                    _ => {
                        return Err(err(
                            line_no,
                            "expected `function <name> : <sort>... -> <sort>`".to_string(),
                        ))
                    }
                };
                let arrow = sig.iter().position(|w| *w == "->").ok_or_else(|| {
                    err(line_no, "expected `->` before the result sort".to_string())
                })?;
                let (arg_sorts, result) = sig.split_at(arrow);
                if arg_sorts.is_empty() || result.len() != 2 {
                    return Err(err(
                        line_no,
                        "expected `function <name> : <sort>... -> <sort>`".to_string(),
                    ));
                }
                vocab.functions.insert(
                    name.to_string(),
                    FuncDecl {
                        arg_sorts: arg_sorts.iter().map(|s| s.to_string()).collect(),
                        result_sort: result[1].to_string(),
                        table: Default::default(),
                    },
                );
            }
            "table" => {
                let rest: Vec<&str> = words.collect();
                let (name, row) = rest
                    .split_first()
                    .ok_or_else(|| err(line_no, "expected `table <function> <element>... = <element>`".to_string()))?;
                let decl = vocab.functions.get_mut(*name).ok_or_else(|| {
                    err(line_no, format!("function `{name}` has no declaration above"))
                })?;
                let eq = row.len().checked_sub(2).filter(|k| row.get(*k) == Some(&"="));
                let Some(eq) = eq else {
                    return Err(err(
                        line_no,
                        "expected `table <function> <element>... = <element>`".to_string(),
                    ));
                };
                let (args, value) = (&row[..eq], row[eq + 1]);
                if args.len() != decl.arg_sorts.len() {
                    return Err(err(
                        line_no,
                        format!(
                            "function `{name}` takes {} arguments, row has {}",
                            decl.arg_sorts.len(),
                            args.len()
                        ),
                    ));
                }
                decl.table
                    .insert(args.iter().map(|s| s.to_string()).collect(), value.to_string());
            }
            "connection" | "action" | "kb" | "policy" => deferred.push((line_no, line)),
            other => {
                return Err(err(line_no, format!("unknown directive `{other}`")));
            }
        }
    }

    let mut snm = Snm::new(agents, vocab)
        .map_err(|e| err(model_line, e.to_string()))?;

    for (line_no, line) in deferred {
        let mut words = line.split_whitespace();
        let directive = words.next().expect("deferred lines are non-empty");
        match directive {
            "connection" | "action" => {
                let rest: Vec<&str> = words.collect();
                let [name, from, to] = rest.as_slice() else {
                    return Err(err(
                        line_no,
                        format!("expected `{directive} <predicate> <from> <to>`"),
                    ));
                };
                let (from, to) = (AgentId::new(*from), AgentId::new(*to));
                let result = if directive == "connection" {
                    snm.add_connection(name, from, to)
                } else {
                    snm.add_action(name, from, to)
                };
                result.map_err(|e| err(line_no, e.to_string()))?;
            }
            "kb" => {
                let (head, rest, rest_col) = split_colon(line, line_no)?;
                let agent = head
                    .split_whitespace()
                    .nth(1)
                    .ok_or_else(|| err(line_no, "expected `kb <agent>: <formula>`".to_string()))?;
                let formula =
                    parse_formula_at(rest, line_no, rest_col, Kinds::Declared(&snm.vocab))?;
                snm = snm
                    .kb_insert(&AgentId::new(agent), &formula, cfg)
                    .map_err(|e| err(line_no, e.to_string()))?;
            }
            "policy" => {
                let (head, rest, _) = split_colon(line, line_no)?;
                let agent = head
                    .split_whitespace()
                    .nth(1)
                    .ok_or_else(|| err(line_no, "expected `policy <agent>: <text>`".to_string()))?;
                let agent = AgentId::new(agent);
                if !snm.agents.contains(&agent) {
                    return Err(err(line_no, format!("agent {agent} is not part of the model")));
                }
                snm.policies.entry(agent).or_default().push(rest.trim().to_string());
            }
            _ => unreachable!("only deferred directives reach here"),
        }
    }
    Ok(snm)
}

/// Prints a network model in the file format. Knowledge entries render
/// their source forms, so quantified entries survive the round trip.
pub fn print_snm(snm: &Snm) -> String {
    let mut out = String::new();
    let section = |out: &mut String| {
        if !out.is_empty() {
            out.push('\n');
        }
    };

    out.push_str("agents");
    for a in &snm.agents {
        let _ = write!(out, " {a}");
    }
    out.push('\n');

    if !snm.vocab.domains.is_empty() {
        section(&mut out);
        for (name, elements) in &snm.vocab.domains {
            let _ = write!(out, "domain {name} =");
            for e in elements {
                let _ = write!(out, " {e}");
            }
            out.push('\n');
        }
    }
    if !snm.vocab.predicates.is_empty() {
        section(&mut out);
        for (name, decl) in &snm.vocab.predicates {
            let kind = match decl.kind {
                PredKind::Regular => "regular",
                PredKind::Connection => "connection",
                PredKind::Action => "action",
            };
            let _ = writeln!(out, "predicate {name}/{} {kind}", decl.arity);
        }
    }
    if !snm.vocab.constants.is_empty() {
        section(&mut out);
        for (name, value) in &snm.vocab.constants {
            let _ = writeln!(out, "constant {name} = {value}");
        }
    }
    if !snm.vocab.functions.is_empty() {
        section(&mut out);
        for (name, decl) in &snm.vocab.functions {
            let _ = writeln!(
                out,
                "function {name} : {} -> {}",
                decl.arg_sorts.join(" "),
                decl.result_sort
            );
            for (args, value) in &decl.table {
                let _ = writeln!(out, "table {name} {} = {value}", args.join(" "));
            }
        }
    }
    let edges = |out: &mut String, directive: &str,
                 rels: &std::collections::BTreeMap<String, BTreeSet<(AgentId, AgentId)>>| {
        if rels.values().any(|pairs| !pairs.is_empty()) {
            section(out);
            for (name, pairs) in rels {
                for (from, to) in pairs {
                    let _ = writeln!(out, "{directive} {name} {from} {to}");
                }
            }
        }
    };
    edges(&mut out, "connection", &snm.connections);
    edges(&mut out, "action", &snm.actions);

    if snm.kbs.values().any(|kb| !kb.is_empty()) {
        section(&mut out);
        for (agent, kb) in &snm.kbs {
            for entry in kb.entries() {
                let _ = writeln!(out, "kb {agent}: {}", entry.source);
            }
        }
    }
    if snm.policies.values().any(|p| !p.is_empty()) {
        section(&mut out);
        for (agent, texts) in &snm.policies {
            for text in texts {
                let _ = writeln!(out, "policy {agent}: {text}");
            }
        }
    }
    out
}

/// A Kripke model file: the model plus the optional translated-provenance
/// carriers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KripkeDocument {
    pub model: KripkeModel,
    /// Characteristic set of the source network model, when the file was
    /// produced by the marked translation; empty otherwise.
    pub characteristic: Vec<Formula>,
    pub distinguished: Option<StateId>,
}

/// Parses a Kripke model file. Atoms in `val` lines and `characteristic`
/// formulas are read without declarations (every predicate regular).
pub fn parse_kripke(input: &str) -> Result<KripkeDocument, ParseError> {
    let mut doc = KripkeDocument::default();
    let err = |line: usize, msg: String| ParseError::new(line, 1, msg);

    let mut edges: Vec<(usize, AgentId, StateId, StateId)> = Vec::new();
    for (line_no, line) in content_lines(input) {
        let mut words = line.split_whitespace();
        let directive = words.next().expect("content lines are non-empty");
        // `characteristic:` carries its colon when nothing precedes it.
        match directive.strip_suffix(':').unwrap_or(directive) {
            "states" => {
                for w in words {
                    doc.model.states.insert(w.to_string());
                }
            }
            "rel" => {
                let rest: Vec<&str> = words.collect();
                let [agent, from, to] = rest.as_slice() else {
                    return Err(err(line_no, "expected `rel <agent> <from> <to>`".to_string()));
                };
                edges.push((line_no, AgentId::new(*agent), from.to_string(), to.to_string()));
            }
            "val" => {
                let (head, rest, rest_col) = split_colon(line, line_no)?;
                let state = head
                    .split_whitespace()
                    .nth(1)
                    .ok_or_else(|| err(line_no, "expected `val <state>: <atoms>`".to_string()))?;
                if !doc.model.states.contains(state) {
                    return Err(err(line_no, format!("state {state} is not declared")));
                }
                let mut atoms = BTreeSet::new();
                if !rest.trim().is_empty() {
                    for f in parse_formula_list(rest, line_no, rest_col)? {
                        if !matches!(f, Formula::Pred { .. }) {
                            return Err(err(
                                line_no,
                                format!("valuations hold atoms, got `{f}`"),
                            ));
                        }
                        atoms.insert(f);
                    }
                }
                doc.model.val.entry(state.to_string()).or_default().extend(atoms);
            }
            "characteristic" => {
                let (_, rest, rest_col) = split_colon(line, line_no)?;
                doc.characteristic
                    .push(parse_formula_at(rest, line_no, rest_col, Kinds::Free)?);
            }
            "distinguished" => {
                let rest: Vec<&str> = words.collect();
                let [state] = rest.as_slice() else {
                    return Err(err(line_no, "expected `distinguished <state>`".to_string()));
                };
                if !doc.model.states.contains(*state) {
                    return Err(err(line_no, format!("state {state} is not declared")));
                }
                doc.distinguished = Some(state.to_string());
            }
            other => return Err(err(line_no, format!("unknown directive `{other}`"))),
        }
    }
    for (line_no, agent, from, to) in edges {
        for endpoint in [&from, &to] {
            if !doc.model.states.contains(endpoint) {
                return Err(err(line_no, format!("state {endpoint} is not declared")));
            }
        }
        doc.model.rel.entry(agent).or_default().insert((from, to));
    }
    for state in &doc.model.states {
        doc.model.val.entry(state.clone()).or_default();
    }
    Ok(doc)
}

/// Parses `atom, atom, ...` using the formula grammar per piece.
fn parse_formula_list(
    input: &str,
    line: usize,
    col0: usize,
) -> Result<Vec<Formula>, ParseError> {
    let tokens = lex(input, line, col0)?;
    let mut parser = FormulaParser {
        tokens,
        pos: 0,
        kinds: Kinds::Free,
        scope: Vec::new(),
    };
    let mut out = Vec::new();
    loop {
        out.push(parser.formula()?);
        match parser.bump() {
            Token::Comma => continue,
            Token::Eof => break,
            other => {
                let (l, c) = parser.here();
                return Err(ParseError::new(
                    l,
                    c,
                    format!("expected `,` or end of line, found {}", other.describe()),
                ));
            }
        }
    }
    Ok(out)
}

/// Prints a Kripke model file. Empty valuation entries are omitted; parsing
/// restores them for every declared state.
pub fn print_kripke(doc: &KripkeDocument) -> String {
    let mut out = String::new();
    out.push_str("states");
    for s in &doc.model.states {
        let _ = write!(out, " {s}");
    }
    out.push('\n');

    if doc.model.rel.values().any(|pairs| !pairs.is_empty()) {
        out.push('\n');
        for (agent, pairs) in &doc.model.rel {
            for (from, to) in pairs {
                let _ = writeln!(out, "rel {agent} {from} {to}");
            }
        }
    }
    if doc.model.val.values().any(|atoms| !atoms.is_empty()) {
        out.push('\n');
        for (state, atoms) in &doc.model.val {
            if atoms.is_empty() {
                continue;
            }
            let rendered: Vec<String> = atoms.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "val {state}: {}", rendered.join(", "));
        }
    }
    if !doc.characteristic.is_empty() {
        out.push('\n');
        for f in &doc.characteristic {
            let _ = writeln!(out, "characteristic: {f}");
        }
    }
    if let Some(state) = &doc.distinguished {
        out.push('\n');
        let _ = writeln!(out, "distinguished {state}");
    }
    out
}
