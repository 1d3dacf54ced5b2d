//! Schemas for the three on-disk document kinds: theories, refinement
//! mappings, and hypothesis spaces.
//!
//! Each file holds one s-expression document.  The schema layer turns the
//! raw tree into core values — [`Theory`], [`WeightFn`],
//! [`RefinementMapping`], [`HypothesisSpace`] — validating names eagerly
//! so errors carry the position of the offending token.
//!
//! A theory document:
//!
//! ```text
//! (theory
//!   (sorts (sort course (B)) (sort difficulty (E M H)))
//!   (predicates (predicate diff (course difficulty)))
//!   (sentences (or (diff B E) (diff B M) (diff B H))
//!              (forall u difficulty (implies (diff B u) ...)))
//!   (weights (default one)
//!            (weight (diff B E) 0.7)
//!            (weight (not (diff B E)) 1)))
//! ```
//!
//! Sentences may quantify over sorts; they are grounded on load.  A weight
//! subject is a ground atom, `(not atom)` for the negative literal, or a
//! bare predicate name as a template that expands to every ground atom of
//! that predicate (and under `not`, every negative literal).  Numerals are
//! read exactly: `0.25` is one quarter, not a float.
//!
//! A mapping document is a list of entries from high-level atoms to
//! low-level formulas; `(var u)` marks a template argument:
//!
//! ```text
//! (mapping
//!   (entry (iq A L) (iq A L))
//!   (entry (grades A B (var u)) (or ...)))
//! ```
//!
//! A hypothesis-space document bounds a derivation search:
//!
//! ```text
//! (space
//!   (high-predicates easy)
//!   (mapping-candidates (clauses 1))
//!   (theory-bound (max-clause-len 1) (max-sentences 1))
//!   (target weighted-exact))
//! ```

use std::collections::HashSet;

use coarsen::derivation::{HypothesisSpace, MappingCandidates, TargetClass, TheoryBound};
use coarsen::lang::{ground_theory, LangError, Predicate, Sort};
use coarsen::mapping::{MappingEntry, MappingError};
use coarsen::wmc::WmcError;
use coarsen::{
    Formula, GroundAtom, Literal, NegationDefault, RefinementMapping, Term, Theory, Value,
    Vocabulary, WeightFn,
};
use thiserror::Error;

use crate::sexpr::{parse_document, Pos, SExpr, SexprError};

/// Failures while reading a document: reader errors and schema errors
/// carry positions; errors surfaced by core validation carry names.
#[derive(Debug, Error)]
pub enum DocError {
    #[error(transparent)]
    Read(#[from] SexprError),
    #[error("{pos}: {msg}")]
    Schema { pos: Pos, msg: String },
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error(transparent)]
    Wmc(#[from] WmcError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
}

fn schema(pos: Pos, msg: impl Into<String>) -> DocError {
    DocError::Schema { pos, msg: msg.into() }
}

/// A loaded theory document: the grounded theory and its weight function.
#[derive(Debug, Clone)]
pub struct TheoryDocument {
    pub theory: Theory,
    pub weights: WeightFn,
}

/// Reads a `(theory ...)` document and grounds it.
pub fn parse_theory(src: &str) -> Result<TheoryDocument, DocError> {
    let root = parse_document(src)?;
    let sections = document_sections(&root, "theory")?;

    let mut sorts: Vec<Sort> = Vec::new();
    let mut predicates: Vec<Predicate> = Vec::new();
    let mut sentence_nodes: Vec<&SExpr> = Vec::new();
    let mut weight_nodes: Vec<&SExpr> = Vec::new();
    let mut seen = HashSet::new();
    for section in sections {
        let (name, body, pos) = open_section(section)?;
        if !seen.insert(name.to_string()) {
            return Err(schema(pos, format!("duplicate `{name}` section")));
        }
        match name {
            "sorts" => {
                for node in body {
                    sorts.push(read_sort(node)?);
                }
            }
            "predicates" => {
                for node in body {
                    predicates.push(read_predicate(node)?);
                }
            }
            "sentences" => sentence_nodes.extend(body),
            "weights" => weight_nodes.extend(body),
            other => {
                return Err(schema(
                    pos,
                    format!("unknown theory section `{other}` (expected sorts, predicates, sentences, or weights)"),
                ))
            }
        }
    }

    let vocab = Vocabulary::new(sorts, predicates)?;

    let reader = FormulaReader::sentences(&vocab);
    let mut sentences = Vec::with_capacity(sentence_nodes.len());
    for node in sentence_nodes {
        sentences.push(reader.read(node)?);
    }

    let weights = read_weights(&weight_nodes, &vocab)?;
    let theory = ground_theory(vocab, sentences)?;
    Ok(TheoryDocument { theory, weights })
}

/// Reads a `(mapping ...)` document against the two vocabularies.
pub fn parse_mapping(
    src: &str,
    high: &Vocabulary,
    low: &Vocabulary,
) -> Result<RefinementMapping, DocError> {
    let root = parse_document(src)?;
    let entries_nodes = document_sections(&root, "mapping")?;

    let mut entries = Vec::with_capacity(entries_nodes.len());
    for node in entries_nodes {
        let (name, body, pos) = open_section(node)?;
        if name != "entry" {
            return Err(schema(pos, format!("expected an (entry ...) form, found `{name}`")));
        }
        if body.len() != 2 {
            return Err(schema(pos, "an entry takes a pattern and a target"));
        }
        let (pattern, vars) = read_pattern(&body[0], high)?;
        let reader = FormulaReader::target(low, vars);
        let target = reader.read(&body[1])?;
        entries.push(MappingEntry::new(pattern, target));
    }
    Ok(RefinementMapping::new(high.clone(), low.clone(), &entries)?)
}

/// Reads a `(space ...)` document against the low-level vocabulary.
pub fn parse_space(src: &str, low: &Vocabulary) -> Result<HypothesisSpace, DocError> {
    let root = parse_document(src)?;
    let sections = document_sections(&root, "space")?;

    let mut high_predicates: Vec<String> = Vec::new();
    let mut mapping_candidates = MappingCandidates::default();
    let mut theory_bound: Option<TheoryBound> = None;
    let mut partial_mapping: Vec<(String, Formula)> = Vec::new();
    let mut partial_theory: Vec<Formula> = Vec::new();
    let mut target_class: Option<TargetClass> = None;
    let mut seen = HashSet::new();
    let root_pos = root.pos();

    for section in sections {
        let (name, body, pos) = open_section(section)?;
        if !seen.insert(name.to_string()) {
            return Err(schema(pos, format!("duplicate `{name}` section")));
        }
        match name {
            "high-predicates" => {
                for node in body {
                    high_predicates.push(expect_symbol(node, "a predicate name")?.to_string());
                }
                if high_predicates.is_empty() {
                    return Err(schema(pos, "high-predicates needs at least one name"));
                }
            }
            "mapping-candidates" => {
                mapping_candidates = read_mapping_candidates(body, pos, low)?;
            }
            "theory-bound" => {
                theory_bound = Some(read_theory_bound(body, pos)?);
            }
            "partial-mapping" => {
                let reader = FormulaReader::ground(low);
                for node in body {
                    let (entry_name, entry_body, entry_pos) = open_section(node)?;
                    if entry_name != "entry" || entry_body.len() != 2 {
                        return Err(schema(
                            entry_pos,
                            "expected (entry <high-atom> <low-formula>)",
                        ));
                    }
                    let atom = expect_symbol(&entry_body[0], "a high-level atom name")?;
                    partial_mapping.push((atom.to_string(), reader.read(&entry_body[1])?));
                }
            }
            "partial-theory" => {
                // Validated against the high signature after all sections
                // are read, since high-predicates may come later.
                for node in body {
                    partial_theory.push(FormulaReader::unchecked().read(node)?);
                }
            }
            "target" => {
                if body.len() != 1 {
                    return Err(schema(pos, "target takes one class name"));
                }
                let class = expect_symbol(&body[0], "a target class")?;
                target_class = Some(match class {
                    "weak-exact" => TargetClass::WeakExact,
                    "weighted-exact" => TargetClass::WeightedExact,
                    other => {
                        return Err(schema(
                            body[0].pos(),
                            format!("unknown target class `{other}` (expected weak-exact or weighted-exact)"),
                        ))
                    }
                });
            }
            other => return Err(schema(pos, format!("unknown space section `{other}`"))),
        }
    }

    if high_predicates.is_empty() {
        return Err(schema(root_pos, "a space needs a high-predicates section"));
    }
    let theory_candidates = theory_bound
        .ok_or_else(|| schema(root_pos, "a space needs a theory-bound section"))?;
    let target_class =
        target_class.ok_or_else(|| schema(root_pos, "a space needs a target section"))?;

    // Re-validate the high-level side now that the signature is known.
    let high_vocab = Vocabulary::propositional(high_predicates.iter().cloned())?;
    let mut named_atoms = std::collections::BTreeSet::new();
    for formula in &partial_theory {
        formula.collect_atoms(&mut named_atoms);
    }
    for atom in &named_atoms {
        high_vocab.validate_atom(atom)?;
    }
    for (name, _) in &partial_mapping {
        if high_vocab.predicate(name).is_none() {
            return Err(schema(
                root_pos,
                format!("partial-mapping names `{name}`, which is not a high-level predicate"),
            ));
        }
    }

    Ok(HypothesisSpace {
        high_predicates,
        mapping_candidates,
        theory_candidates,
        partial_mapping,
        partial_theory,
        target_class,
    })
}

fn read_mapping_candidates(
    body: &[SExpr],
    pos: Pos,
    low: &Vocabulary,
) -> Result<MappingCandidates, DocError> {
    if body.len() != 1 {
        return Err(schema(pos, "mapping-candidates takes one form"));
    }
    let (name, inner, inner_pos) = open_section(&body[0])?;
    match name {
        "clauses" => {
            if inner.len() != 1 {
                return Err(schema(inner_pos, "clauses takes a maximum length"));
            }
            let max_len = read_usize(&inner[0])?;
            Ok(MappingCandidates::Clauses { max_len })
        }
        "explicit" => {
            let reader = FormulaReader::ground(low);
            let mut per_atom = Vec::new();
            for node in inner {
                let items = expect_list(node, "a (name formula...) group")?;
                let first = items
                    .first()
                    .ok_or_else(|| schema(node.pos(), "a candidate group needs a name"))?;
                let name = expect_symbol(first, "a high-level atom name")?;
                let mut formulas = Vec::new();
                for f in &items[1..] {
                    formulas.push(reader.read(f)?);
                }
                per_atom.push((name.to_string(), formulas));
            }
            Ok(MappingCandidates::Explicit(per_atom))
        }
        other => Err(schema(
            inner_pos,
            format!("unknown candidate form `{other}` (expected clauses or explicit)"),
        )),
    }
}

fn read_theory_bound(body: &[SExpr], pos: Pos) -> Result<TheoryBound, DocError> {
    let mut max_clause_len = None;
    let mut max_sentences = None;
    for node in body {
        let (name, inner, inner_pos) = open_section(node)?;
        if inner.len() != 1 {
            return Err(schema(inner_pos, format!("{name} takes one number")));
        }
        match name {
            "max-clause-len" => max_clause_len = Some(read_usize(&inner[0])?),
            "max-sentences" => max_sentences = Some(read_usize(&inner[0])?),
            other => return Err(schema(inner_pos, format!("unknown bound `{other}`"))),
        }
    }
    match (max_clause_len, max_sentences) {
        (Some(max_clause_len), Some(max_sentences)) => {
            Ok(TheoryBound { max_clause_len, max_sentences })
        }
        _ => Err(schema(pos, "theory-bound needs max-clause-len and max-sentences")),
    }
}

fn read_usize(sx: &SExpr) -> Result<usize, DocError> {
    let text = expect_symbol(sx, "a number")?;
    text.parse::<usize>()
        .map_err(|_| schema(sx.pos(), format!("expected a non-negative integer, found `{text}`")))
}

/// Opens the root list and checks its head names the expected document
/// kind, returning the section nodes.
fn document_sections<'a>(root: &'a SExpr, kind: &str) -> Result<&'a [SExpr], DocError> {
    let items = expect_list(root, &format!("a ({kind} ...) document"))?;
    let head = items
        .first()
        .and_then(SExpr::as_symbol)
        .ok_or_else(|| schema(root.pos(), format!("expected a ({kind} ...) document")))?;
    if head != kind {
        return Err(schema(
            root.pos(),
            format!("expected a ({kind} ...) document, found ({head} ...)"),
        ));
    }
    Ok(&items[1..])
}

/// Opens a `(name body...)` form, returning the head, body, and position.
fn open_section(sx: &SExpr) -> Result<(&str, &[SExpr], Pos), DocError> {
    let items = expect_list(sx, "a (name ...) form")?;
    let head = items
        .first()
        .and_then(SExpr::as_symbol)
        .ok_or_else(|| schema(sx.pos(), "expected a (name ...) form"))?;
    Ok((head, &items[1..], sx.pos()))
}

fn expect_list<'a>(sx: &'a SExpr, what: &str) -> Result<&'a [SExpr], DocError> {
    sx.as_list().ok_or_else(|| schema(sx.pos(), format!("expected {what}, found `{sx}`")))
}

fn expect_symbol<'a>(sx: &'a SExpr, what: &str) -> Result<&'a str, DocError> {
    sx.as_symbol().ok_or_else(|| schema(sx.pos(), format!("expected {what}, found `{sx}`")))
}

fn read_sort(sx: &SExpr) -> Result<Sort, DocError> {
    let (name, body, pos) = open_section(sx)?;
    if name != "sort" {
        return Err(schema(pos, format!("expected a (sort ...) form, found `{name}`")));
    }
    if body.len() != 2 {
        return Err(schema(pos, "a sort takes a name and a constant list"));
    }
    let sort_name = expect_symbol(&body[0], "a sort name")?;
    let constant_nodes = expect_list(&body[1], "a constant list")?;
    let mut constants = Vec::with_capacity(constant_nodes.len());
    for node in constant_nodes {
        constants.push(expect_symbol(node, "a constant")?.to_string());
    }
    Ok(Sort::new(sort_name, constants))
}

fn read_predicate(sx: &SExpr) -> Result<Predicate, DocError> {
    let (name, body, pos) = open_section(sx)?;
    if name != "predicate" {
        return Err(schema(pos, format!("expected a (predicate ...) form, found `{name}`")));
    }
    if body.is_empty() || body.len() > 2 {
        return Err(schema(pos, "a predicate takes a name and an optional argument-sort list"));
    }
    let pred_name = expect_symbol(&body[0], "a predicate name")?;
    let mut arg_sorts = Vec::new();
    if let Some(args) = body.get(1) {
        for node in expect_list(args, "an argument-sort list")? {
            arg_sorts.push(expect_symbol(node, "a sort name")?.to_string());
        }
    }
    Ok(Predicate::new(pred_name, arg_sorts))
}

/// A weight subject before template expansion.
enum WeightSubject {
    Atom(GroundAtom),
    Template(String),
}

fn read_weights(nodes: &[&SExpr], vocab: &Vocabulary) -> Result<WeightFn, DocError> {
    let mut default: Option<NegationDefault> = None;
    let mut entries: Vec<(Literal, Value)> = Vec::new();
    let universe = vocab.universe();

    for node in nodes {
        let (name, body, pos) = open_section(node)?;
        match name {
            "default" => {
                if default.is_some() {
                    return Err(schema(pos, "duplicate default rule"));
                }
                if body.len() != 1 {
                    return Err(schema(pos, "default takes `one` or `complement`"));
                }
                default = Some(match expect_symbol(&body[0], "a default rule")? {
                    "one" => NegationDefault::One,
                    "complement" => NegationDefault::Complement,
                    other => {
                        return Err(schema(
                            body[0].pos(),
                            format!("unknown default rule `{other}` (expected one or complement)"),
                        ))
                    }
                });
            }
            "weight" => {
                if body.len() != 2 {
                    return Err(schema(pos, "a weight takes a literal and a value"));
                }
                let (positive, subject) = read_weight_subject(&body[0], vocab)?;
                let text = expect_symbol(&body[1], "a numeral")?;
                let value = Value::parse(text).map_err(|_| {
                    schema(body[1].pos(), format!("expected a numeral, found `{text}`"))
                })?;
                match subject {
                    WeightSubject::Atom(atom) => {
                        entries.push((Literal { atom, positive }, value));
                    }
                    WeightSubject::Template(pred) => {
                        // Pure sugar: one entry per ground atom of the
                        // predicate, same sign and value.
                        for atom in universe.atoms() {
                            if atom.predicate == pred {
                                entries.push((
                                    Literal { atom: atom.clone(), positive },
                                    value.clone(),
                                ));
                            }
                        }
                    }
                }
            }
            other => {
                return Err(schema(pos, format!("unknown weights form `{other}`")));
            }
        }
    }

    Ok(WeightFn::new(entries, default.unwrap_or(NegationDefault::One))?)
}

/// Reads a weight subject: an atom, a bare predicate-name template, or
/// `(not ...)` of either.
fn read_weight_subject(
    sx: &SExpr,
    vocab: &Vocabulary,
) -> Result<(bool, WeightSubject), DocError> {
    match sx {
        SExpr::Symbol { text, pos } => {
            if vocab.predicate(text).is_none() {
                return Err(schema(*pos, format!("unknown predicate `{text}`")));
            }
            Ok((true, WeightSubject::Template(text.clone())))
        }
        SExpr::List { items, pos } => {
            let head = items
                .first()
                .and_then(SExpr::as_symbol)
                .ok_or_else(|| schema(*pos, "expected a literal"))?;
            if head == "not" {
                if items.len() != 2 {
                    return Err(schema(*pos, "not takes one argument"));
                }
                let (positive, subject) = read_weight_subject(&items[1], vocab)?;
                if !positive {
                    return Err(schema(*pos, "a weight subject cannot be doubly negated"));
                }
                return Ok((false, subject));
            }
            let atom = read_ground_atom(head, &items[1..], *pos, vocab)?;
            Ok((true, WeightSubject::Atom(atom)))
        }
    }
}

fn read_ground_atom(
    name: &str,
    args: &[SExpr],
    pos: Pos,
    vocab: &Vocabulary,
) -> Result<GroundAtom, DocError> {
    let mut constants = Vec::with_capacity(args.len());
    for arg in args {
        constants.push(expect_symbol(arg, "a constant")?.to_string());
    }
    let atom = GroundAtom::new(name, constants);
    vocab.validate_atom(&atom).map_err(|err| schema(pos, err.to_string()))?;
    Ok(atom)
}

/// Reads a mapping-entry pattern: an atom whose arguments are constants
/// or `(var x)` markers.  Returns the pattern and its variable names.
fn read_pattern(sx: &SExpr, high: &Vocabulary) -> Result<(Formula, HashSet<String>), DocError> {
    let (name, args, pos) = match sx {
        SExpr::Symbol { text, pos } => (text.as_str(), &[] as &[SExpr], *pos),
        SExpr::List { items, pos } => {
            let head = items
                .first()
                .and_then(SExpr::as_symbol)
                .ok_or_else(|| schema(*pos, "expected an atom pattern"))?;
            (head, &items[1..], *pos)
        }
    };
    let predicate = high
        .predicate(name)
        .ok_or_else(|| schema(pos, format!("unknown predicate `{name}`")))?;
    if predicate.arg_sorts.len() != args.len() {
        return Err(schema(
            pos,
            format!(
                "predicate `{name}` expects {} arguments, found {}",
                predicate.arg_sorts.len(),
                args.len()
            ),
        ));
    }
    let arg_sorts = predicate.arg_sorts.clone();

    let mut vars = HashSet::new();
    let mut terms = Vec::with_capacity(args.len());
    for (arg, sort_name) in args.iter().zip(&arg_sorts) {
        match arg {
            SExpr::Symbol { text, pos } => {
                let sort = high.sort(sort_name).ok_or_else(|| {
                    schema(*pos, format!("predicate `{name}` uses undeclared sort `{sort_name}`"))
                })?;
                if !sort.constants.iter().any(|c| c == text) {
                    return Err(schema(
                        *pos,
                        format!("constant `{text}` is not in sort `{sort_name}`"),
                    ));
                }
                terms.push(Term::Const(text.clone()));
            }
            SExpr::List { items, pos } => {
                let var = match (items.first().and_then(SExpr::as_symbol), items.len()) {
                    (Some("var"), 2) => expect_symbol(&items[1], "a variable name")?,
                    _ => return Err(schema(*pos, "expected a constant or (var x)")),
                };
                vars.insert(var.to_string());
                terms.push(Term::Var(var.to_string()));
            }
        }
    }
    Ok((Formula::Atom { predicate: name.to_string(), args: terms }, vars))
}

/// Converts formula s-expressions to [`Formula`] trees.
///
/// Connective heads are reserved (`and`, `or`, `not`, `implies`, `equiv`,
/// `forall`, `exists`, `eq`, `true`, `false`, `var`); any other head is a
/// predicate atom, and a bare symbol is a nullary atom.  An argument
/// symbol names a quantified variable when one is in scope, otherwise a
/// constant; `(var x)` insists on a variable.  When a vocabulary is
/// present, atoms are checked against it as they are read.
struct FormulaReader<'a> {
    vocab: Option<&'a Vocabulary>,
    explicit_vars: HashSet<String>,
    allow_quantifiers: bool,
}

impl<'a> FormulaReader<'a> {
    /// Sentences of a theory: quantifiers allowed, no free variables.
    fn sentences(vocab: &'a Vocabulary) -> Self {
        FormulaReader { vocab: Some(vocab), explicit_vars: HashSet::new(), allow_quantifiers: true }
    }

    /// Mapping targets: the pattern's variables are free, quantifiers are
    /// not allowed (targets must ground by substitution alone).
    fn target(vocab: &'a Vocabulary, vars: HashSet<String>) -> Self {
        FormulaReader { vocab: Some(vocab), explicit_vars: vars, allow_quantifiers: false }
    }

    /// Ground formulas over a known vocabulary.
    fn ground(vocab: &'a Vocabulary) -> Self {
        FormulaReader { vocab: Some(vocab), explicit_vars: HashSet::new(), allow_quantifiers: false }
    }

    /// No vocabulary in scope yet; names are checked by the caller later.
    fn unchecked() -> Self {
        FormulaReader { vocab: None, explicit_vars: HashSet::new(), allow_quantifiers: false }
    }

    fn read(&self, sx: &SExpr) -> Result<Formula, DocError> {
        let mut scope = Vec::new();
        self.read_formula(sx, &mut scope)
    }

    fn read_formula(
        &self,
        sx: &SExpr,
        scope: &mut Vec<(String, String)>,
    ) -> Result<Formula, DocError> {
        match sx {
            SExpr::Symbol { text, pos } => match text.as_str() {
                "true" => Ok(Formula::True),
                "false" => Ok(Formula::False),
                name => self.read_atom(name, &[], *pos, scope),
            },
            SExpr::List { items, pos } => {
                let head = items
                    .first()
                    .and_then(SExpr::as_symbol)
                    .ok_or_else(|| schema(*pos, "expected a formula"))?;
                let body = &items[1..];
                match head {
                    "not" => {
                        self.expect_arity(body, 1, *pos, "not")?;
                        Ok(Formula::not(self.read_formula(&body[0], scope)?))
                    }
                    "and" | "or" => {
                        let mut parts = Vec::with_capacity(body.len());
                        for node in body {
                            parts.push(self.read_formula(node, scope)?);
                        }
                        Ok(if head == "and" { Formula::and(parts) } else { Formula::or(parts) })
                    }
                    "implies" => {
                        self.expect_arity(body, 2, *pos, "implies")?;
                        let antecedent = self.read_formula(&body[0], scope)?;
                        let consequent = self.read_formula(&body[1], scope)?;
                        Ok(Formula::implies(antecedent, consequent))
                    }
                    "equiv" => {
                        self.expect_arity(body, 2, *pos, "equiv")?;
                        let lhs = self.read_formula(&body[0], scope)?;
                        let rhs = self.read_formula(&body[1], scope)?;
                        Ok(Formula::equiv(lhs, rhs))
                    }
                    "eq" => {
                        self.expect_arity(body, 2, *pos, "eq")?;
                        let lhs = self.read_term(&body[0], scope)?;
                        let rhs = self.read_term(&body[1], scope)?;
                        Ok(Formula::Eq(lhs, rhs))
                    }
                    "forall" | "exists" => {
                        if !self.allow_quantifiers {
                            return Err(schema(*pos, "quantifiers are not allowed here"));
                        }
                        self.expect_arity(body, 3, *pos, head)?;
                        let var = expect_symbol(&body[0], "a variable name")?.to_string();
                        let sort = expect_symbol(&body[1], "a sort name")?.to_string();
                        if let Some(vocab) = self.vocab {
                            if vocab.sort(&sort).is_none() {
                                return Err(schema(
                                    body[1].pos(),
                                    format!("unknown sort `{sort}`"),
                                ));
                            }
                        }
                        scope.push((var.clone(), sort.clone()));
                        let inner = self.read_formula(&body[2], scope);
                        scope.pop();
                        let inner = Box::new(inner?);
                        Ok(if head == "forall" {
                            Formula::Forall(var, sort, inner)
                        } else {
                            Formula::Exists(var, sort, inner)
                        })
                    }
                    "var" => Err(schema(*pos, "a variable is not a formula")),
                    "true" | "false" => Err(schema(*pos, format!("`{head}` takes no arguments"))),
                    name => self.read_atom(name, body, *pos, scope),
                }
            }
        }
    }

    fn expect_arity(&self, body: &[SExpr], n: usize, pos: Pos, head: &str) -> Result<(), DocError> {
        if body.len() != n {
            return Err(schema(
                pos,
                format!("`{head}` takes {n} argument{}", if n == 1 { "" } else { "s" }),
            ));
        }
        Ok(())
    }

    fn read_atom(
        &self,
        name: &str,
        args: &[SExpr],
        pos: Pos,
        scope: &[(String, String)],
    ) -> Result<Formula, DocError> {
        let mut terms = Vec::with_capacity(args.len());
        for arg in args {
            terms.push(self.read_term(arg, scope)?);
        }
        if let Some(vocab) = self.vocab {
            let predicate = vocab
                .predicate(name)
                .ok_or_else(|| schema(pos, format!("unknown predicate `{name}`")))?;
            if predicate.arg_sorts.len() != terms.len() {
                return Err(schema(
                    pos,
                    format!(
                        "predicate `{name}` expects {} arguments, found {}",
                        predicate.arg_sorts.len(),
                        terms.len()
                    ),
                ));
            }
            let arg_sorts = predicate.arg_sorts.clone();
            for ((term, sort_name), arg) in terms.iter().zip(&arg_sorts).zip(args) {
                match term {
                    Term::Const(c) => {
                        let sort = vocab.sort(sort_name).ok_or_else(|| {
                            schema(
                                arg.pos(),
                                format!("predicate `{name}` uses undeclared sort `{sort_name}`"),
                            )
                        })?;
                        if !sort.constants.iter().any(|k| k == c) {
                            return Err(schema(
                                arg.pos(),
                                format!("constant `{c}` is not in sort `{sort_name}`"),
                            ));
                        }
                    }
                    Term::Var(v) => {
                        // A quantified variable may be used at any position
                        // whose sort contains every constant the variable
                        // ranges over, so that each grounding instance is a
                        // valid atom; pattern variables carry no sort.
                        if let Some((_, declared)) =
                            scope.iter().rev().find(|(sv, _)| sv == v)
                        {
                            if declared != sort_name {
                                let var_sort = vocab
                                    .sort(declared)
                                    .expect("quantifier sorts are checked at binding");
                                let pos_sort = vocab.sort(sort_name).ok_or_else(|| {
                                    schema(
                                        arg.pos(),
                                        format!(
                                            "predicate `{name}` uses undeclared sort `{sort_name}`"
                                        ),
                                    )
                                })?;
                                let contained = var_sort
                                    .constants
                                    .iter()
                                    .all(|c| pos_sort.constants.iter().any(|k| k == c));
                                if !contained {
                                    return Err(schema(
                                        arg.pos(),
                                        format!(
                                            "variable `{v}` ranges over sort `{declared}`, which is not contained in sort `{sort_name}`"
                                        ),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(Formula::Atom { predicate: name.to_string(), args: terms })
    }

    fn read_term(&self, sx: &SExpr, scope: &[(String, String)]) -> Result<Term, DocError> {
        match sx {
            SExpr::Symbol { text, .. } => {
                let is_var = scope.iter().any(|(v, _)| v == text)
                    || self.explicit_vars.contains(text.as_str());
                Ok(if is_var { Term::Var(text.clone()) } else { Term::Const(text.clone()) })
            }
            SExpr::List { items, pos } => {
                let var = match (items.first().and_then(SExpr::as_symbol), items.len()) {
                    (Some("var"), 2) => expect_symbol(&items[1], "a variable name")?,
                    _ => return Err(schema(*pos, "expected a constant or (var x)")),
                };
                let bound = scope.iter().any(|(v, _)| v == var)
                    || self.explicit_vars.contains(var);
                if !bound {
                    return Err(schema(*pos, format!("unbound variable `{var}`")));
                }
                Ok(Term::Var(var.to_string()))
            }
        }
    }
}
