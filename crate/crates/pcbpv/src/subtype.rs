//! Circular subtyping over normalized signatures: the engine with assumption
//! sets and memoization, an independent global greatest-fixed-point oracle,
//! derivation trees for `--explain`, and subtyping of arbitrary types via
//! normalization.

use crate::inhabit::InhabitTable;
use crate::normalize::Normalizer;
use crate::syntax::*;
use std::collections::HashSet;
use std::fmt;

pub const R_TENSOR: &str = "≤⊗";
pub const R_UNIT: &str = "≤1";
pub const R_PLUS: &str = "≤⊕";
pub const R_DOWN: &str = "≤↓";
pub const R_ARROW: &str = "≤→";
pub const R_UP: &str = "≤↑";
pub const R_WITH: &str = "≤&";
pub const R_BOT_POS: &str = "⊥+";
pub const R_BOT_NEG: &str = "⊥-";
pub const R_TOP: &str = "⊤";

/// Usage errors, distinct from a `false` answer.
#[derive(Clone, Debug, PartialEq)]
pub enum QueryError {
    UnknownName(TypeName),
    PolarityMismatch(TypeName, TypeName),
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::UnknownName(n) => write!(f, "type name `{}` is not defined", n),
            QueryError::PolarityMismatch(a, b) => write!(
                f,
                "`{}` and `{}` have different polarities; subtyping relates like-polarity types",
                a, b
            ),
        }
    }
}

/// Memoized results, shared across queries of one checker instance.
///
/// Disproven pairs are cached unconditionally: assumptions only enable
/// success, so a failure under pending assumptions is still a failure.
/// Proven pairs are cached only when the query's assumption context was
/// empty, since success under pending hypotheses is conditional.
#[derive(Clone, Debug, Default)]
pub struct SubtypeState {
    proven: HashSet<(TypeName, TypeName)>,
    disproven: HashSet<(TypeName, TypeName)>,
}

impl SubtypeState {
    pub fn new() -> SubtypeState {
        SubtypeState::default()
    }
}

/// One subtyping query scope over a fixed signature and inhabitation table.
pub struct SubQuery<'a> {
    pub sig: &'a Signature,
    pub inhabit: &'a InhabitTable,
    pub state: &'a mut SubtypeState,
}

impl<'a> SubQuery<'a> {
    /// Subtyping between two defined names of the same polarity.
    pub fn sub_names(&mut self, a: &TypeName, b: &TypeName) -> Result<bool, QueryError> {
        let pa = self
            .sig
            .polarity_of(a)
            .ok_or_else(|| QueryError::UnknownName(a.clone()))?;
        let pb = self
            .sig
            .polarity_of(b)
            .ok_or_else(|| QueryError::UnknownName(b.clone()))?;
        if pa != pb {
            return Err(QueryError::PolarityMismatch(a.clone(), b.clone()));
        }
        let mut assumptions = Vec::new();
        Ok(self.search(a, b, &mut assumptions))
    }

    fn search(
        &mut self,
        a: &TypeName,
        b: &TypeName,
        assumptions: &mut Vec<(TypeName, TypeName)>,
    ) -> bool {
        let key = (a.clone(), b.clone());
        if self.state.proven.contains(&key) {
            return true;
        }
        if self.state.disproven.contains(&key) {
            return false;
        }
        if assumptions.contains(&key) {
            return true; // cycle closes the branch
        }
        let was_unconditional = assumptions.is_empty();
        assumptions.push(key.clone());
        let ok = self.rules(a, b, assumptions);
        assumptions.pop();
        if !ok {
            self.state.disproven.insert(key);
        } else if was_unconditional {
            self.state.proven.insert(key);
        }
        ok
    }

    /// Structural rule first, then the emptiness rules, then fullness.
    fn rules(
        &mut self,
        a: &TypeName,
        b: &TypeName,
        assumptions: &mut Vec<(TypeName, TypeName)>,
    ) -> bool {
        match (self.sig.type_def(a), self.sig.type_def(b)) {
            (Some(TypeDef::Pos(ta)), Some(TypeDef::Pos(tb))) => {
                let ta = ta.clone();
                let tb = tb.clone();
                if self.pos_structural(&ta, &tb, assumptions) {
                    return true;
                }
                self.inhabit.is_empty(a)
            }
            (Some(TypeDef::Neg(sa)), Some(TypeDef::Neg(sb))) => {
                let sa = sa.clone();
                let sb = sb.clone();
                if self.neg_structural(&sa, &sb, assumptions) {
                    return true;
                }
                if let NegType::Up(t) = &sa {
                    let t = t.as_name().expect("normalized body");
                    if self.inhabit.is_empty(t) {
                        return true;
                    }
                }
                self.inhabit.is_full(b)
            }
            _ => false,
        }
    }

    fn pos_structural(
        &mut self,
        ta: &PosType,
        tb: &PosType,
        assumptions: &mut Vec<(TypeName, TypeName)>,
    ) -> bool {
        match (ta, tb) {
            (PosType::Tensor(a1, a2), PosType::Tensor(b1, b2)) => {
                let (a1, a2) = (name_of_pos(a1), name_of_pos(a2));
                let (b1, b2) = (name_of_pos(b1), name_of_pos(b2));
                self.search(a1, b1, assumptions) && self.search(a2, b2, assumptions)
            }
            (PosType::Unit, PosType::Unit) => true,
            (PosType::Variant(ls), PosType::Variant(ks)) => ls.iter().all(|(l, tl)| {
                let tl = name_of_pos(tl).clone();
                // per-branch disjunction, emptiness checked first
                if self.inhabit.is_empty(&tl) {
                    return true;
                }
                match ks.iter().find(|(k, _)| k == l) {
                    Some((_, ul)) => {
                        let ul = name_of_pos(ul).clone();
                        self.search(&tl, &ul, assumptions)
                    }
                    None => false,
                }
            }),
            (PosType::Down(sa), PosType::Down(sb)) => {
                self.search(name_of_neg(sa), name_of_neg(sb), assumptions)
            }
            _ => false,
        }
    }

    fn neg_structural(
        &mut self,
        sa: &NegType,
        sb: &NegType,
        assumptions: &mut Vec<(TypeName, TypeName)>,
    ) -> bool {
        match (sa, sb) {
            (NegType::Arrow(t1, s2), NegType::Arrow(u1, r2)) => {
                // contravariant argument
                self.search(name_of_pos(u1), name_of_pos(t1), assumptions)
                    && self.search(name_of_neg(s2), name_of_neg(r2), assumptions)
            }
            (NegType::Up(t), NegType::Up(u)) => {
                self.search(name_of_pos(t), name_of_pos(u), assumptions)
            }
            (NegType::Lazy(ls), NegType::Lazy(ks)) => ks.iter().all(|(j, rj)| {
                match ls.iter().find(|(l, _)| l == j) {
                    Some((_, sj)) => {
                        let sj = name_of_neg(sj).clone();
                        let rj = name_of_neg(rj).clone();
                        self.search(&sj, &rj, assumptions)
                    }
                    None => false,
                }
            }),
            _ => false,
        }
    }
}

fn name_of_pos(t: &PosType) -> &TypeName {
    t.as_name().expect("normalized signature body")
}

fn name_of_neg(t: &NegType) -> &TypeName {
    t.as_name().expect("normalized signature body")
}

// ---------------------------------------------------------------------------
// Global greatest-fixed-point oracle
// ---------------------------------------------------------------------------

/// Computes the full subtyping relation on names by starting from every
/// polarity-matched pair and deleting unsupported pairs until a fixed point.
pub fn sub_gfp_table(sig: &Signature, inhabit: &InhabitTable) -> HashSet<(TypeName, TypeName)> {
    let pos = sig.pos_names();
    let neg = sig.neg_names();
    let mut table: HashSet<(TypeName, TypeName)> = HashSet::new();
    for a in &pos {
        for b in &pos {
            table.insert((a.clone(), b.clone()));
        }
    }
    for a in &neg {
        for b in &neg {
            table.insert((a.clone(), b.clone()));
        }
    }
    loop {
        let mut remove = Vec::new();
        for pair in &table {
            if !pair_supported(pair, sig, inhabit, &table) {
                remove.push(pair.clone());
            }
        }
        if remove.is_empty() {
            return table;
        }
        for pair in remove {
            table.remove(&pair);
        }
    }
}

fn pair_supported(
    (a, b): &(TypeName, TypeName),
    sig: &Signature,
    inhabit: &InhabitTable,
    table: &HashSet<(TypeName, TypeName)>,
) -> bool {
    let has = |x: &TypeName, y: &TypeName| table.contains(&(x.clone(), y.clone()));
    match (sig.type_def(a).unwrap(), sig.type_def(b).unwrap()) {
        (TypeDef::Pos(ta), TypeDef::Pos(tb)) => {
            if inhabit.is_empty(a) {
                return true;
            }
            match (ta, tb) {
                (PosType::Tensor(a1, a2), PosType::Tensor(b1, b2)) => {
                    has(name_of_pos(a1), name_of_pos(b1)) && has(name_of_pos(a2), name_of_pos(b2))
                }
                (PosType::Unit, PosType::Unit) => true,
                (PosType::Variant(ls), PosType::Variant(ks)) => ls.iter().all(|(l, tl)| {
                    let tl = name_of_pos(tl);
                    inhabit.is_empty(tl)
                        || ks
                            .iter()
                            .find(|(k, _)| k == l)
                            .map(|(_, ul)| has(tl, name_of_pos(ul)))
                            .unwrap_or(false)
                }),
                (PosType::Down(sa), PosType::Down(sb)) => {
                    has(name_of_neg(sa), name_of_neg(sb))
                }
                _ => false,
            }
        }
        (TypeDef::Neg(sa), TypeDef::Neg(sb)) => {
            if inhabit.is_full(b) {
                return true;
            }
            if let NegType::Up(t) = sa {
                if inhabit.is_empty(name_of_pos(t)) {
                    return true;
                }
            }
            match (sa, sb) {
                (NegType::Arrow(t1, s2), NegType::Arrow(u1, r2)) => {
                    has(name_of_pos(u1), name_of_pos(t1)) && has(name_of_neg(s2), name_of_neg(r2))
                }
                (NegType::Up(t), NegType::Up(u)) => has(name_of_pos(t), name_of_pos(u)),
                (NegType::Lazy(ls), NegType::Lazy(ks)) => ks.iter().all(|(j, rj)| {
                    ls.iter()
                        .find(|(l, _)| l == j)
                        .map(|(_, sj)| has(name_of_neg(sj), name_of_neg(rj)))
                        .unwrap_or(false)
                }),
                _ => false,
            }
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Subtyping of arbitrary types via normalization
// ---------------------------------------------------------------------------

/// Interns both types into an extension of the signature and queries the
/// engine. `norm` must have been built from the signature the types refer to.
pub fn sub_pos_types(
    t1: &PosType,
    t2: &PosType,
    norm: &mut Normalizer,
) -> Result<bool, QueryError> {
    norm.set_base("query");
    let a = norm.intern_pos(t1);
    let b = norm.intern_pos(t2);
    let inhabit = crate::inhabit::compute_inhabited(&norm.sig);
    let mut state = SubtypeState::new();
    SubQuery {
        sig: &norm.sig,
        inhabit: &inhabit,
        state: &mut state,
    }
    .sub_names(&a, &b)
}

pub fn sub_neg_types(
    s1: &NegType,
    s2: &NegType,
    norm: &mut Normalizer,
) -> Result<bool, QueryError> {
    norm.set_base("query");
    let a = norm.intern_neg(s1);
    let b = norm.intern_neg(s2);
    let inhabit = crate::inhabit::compute_inhabited(&norm.sig);
    let mut state = SubtypeState::new();
    SubQuery {
        sig: &norm.sig,
        inhabit: &inhabit,
        state: &mut state,
    }
    .sub_names(&a, &b)
}

// ---------------------------------------------------------------------------
// Derivations for --explain
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub left: TypeName,
    pub right: TypeName,
    pub node: DerivNode,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DerivNode {
    Rule {
        rule: &'static str,
        premises: Vec<Premise>,
    },
    /// The goal already appears as an ancestor; the branch closes.
    Cycle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Premise {
    /// Branch or field label for ⊕/& premises.
    pub label: Option<Label>,
    pub item: PremiseItem,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PremiseItem {
    Sub(Derivation),
    Empty(TypeName),
    Full(TypeName),
}

impl Derivation {
    /// Rule names used anywhere in the derivation, in preorder.
    pub fn rule_names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        fn walk<'d>(d: &'d Derivation, out: &mut Vec<&'static str>) {
            if let DerivNode::Rule { rule, premises } = &d.node {
                out.push(rule);
                for p in premises {
                    if let PremiseItem::Sub(sub) = &p.item {
                        walk(sub, out);
                    }
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Goals that some cycle in the derivation refers back to.
    pub fn cycle_goals(&self) -> HashSet<(TypeName, TypeName)> {
        let mut out = HashSet::new();
        fn walk(d: &Derivation, out: &mut HashSet<(TypeName, TypeName)>) {
            match &d.node {
                DerivNode::Cycle => {
                    out.insert((d.left.clone(), d.right.clone()));
                }
                DerivNode::Rule { premises, .. } => {
                    for p in premises {
                        if let PremiseItem::Sub(sub) = &p.item {
                            walk(sub, out);
                        }
                    }
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Builds the circular derivation for `a <= b`, or `None` when the goal is
/// not derivable. The search mirrors the engine's rule order and does not use
/// cross-query caches, so the recorded tree is the full proof.
pub fn explain(
    a: &TypeName,
    b: &TypeName,
    sig: &Signature,
    inhabit: &InhabitTable,
) -> Result<Option<Derivation>, QueryError> {
    let pa = sig
        .polarity_of(a)
        .ok_or_else(|| QueryError::UnknownName(a.clone()))?;
    let pb = sig
        .polarity_of(b)
        .ok_or_else(|| QueryError::UnknownName(b.clone()))?;
    if pa != pb {
        return Err(QueryError::PolarityMismatch(a.clone(), b.clone()));
    }
    let mut assumptions = Vec::new();
    Ok(derive(a, b, sig, inhabit, &mut assumptions))
}

fn derive(
    a: &TypeName,
    b: &TypeName,
    sig: &Signature,
    inhabit: &InhabitTable,
    assumptions: &mut Vec<(TypeName, TypeName)>,
) -> Option<Derivation> {
    let key = (a.clone(), b.clone());
    if assumptions.contains(&key) {
        return Some(Derivation {
            left: a.clone(),
            right: b.clone(),
            node: DerivNode::Cycle,
        });
    }
    assumptions.push(key);
    let node = derive_rules(a, b, sig, inhabit, assumptions);
    assumptions.pop();
    node.map(|node| Derivation {
        left: a.clone(),
        right: b.clone(),
        node,
    })
}

fn derive_rules(
    a: &TypeName,
    b: &TypeName,
    sig: &Signature,
    inhabit: &InhabitTable,
    assumptions: &mut Vec<(TypeName, TypeName)>,
) -> Option<DerivNode> {
    let rule = |rule, premises| Some(DerivNode::Rule { rule, premises });
    let plain = |item| Premise { label: None, item };
    match (sig.type_def(a)?, sig.type_def(b)?) {
        (TypeDef::Pos(ta), TypeDef::Pos(tb)) => {
            let structural = match (ta, tb) {
                (PosType::Tensor(a1, a2), PosType::Tensor(b1, b2)) => (|| {
                    let d1 = derive(name_of_pos(a1), name_of_pos(b1), sig, inhabit, assumptions)?;
                    let d2 = derive(name_of_pos(a2), name_of_pos(b2), sig, inhabit, assumptions)?;
                    rule(
                        R_TENSOR,
                        vec![plain(PremiseItem::Sub(d1)), plain(PremiseItem::Sub(d2))],
                    )
                })(),
                (PosType::Unit, PosType::Unit) => rule(R_UNIT, vec![]),
                (PosType::Variant(ls), PosType::Variant(ks)) => (|| {
                    let mut premises = Vec::new();
                    for (l, tl) in ls {
                        let tl = name_of_pos(tl);
                        if inhabit.is_empty(tl) {
                            premises.push(Premise {
                                label: Some(l.clone()),
                                item: PremiseItem::Empty(tl.clone()),
                            });
                            continue;
                        }
                        let (_, ul) = ks.iter().find(|(k, _)| k == l)?;
                        let d = derive(tl, name_of_pos(ul), sig, inhabit, assumptions)?;
                        premises.push(Premise {
                            label: Some(l.clone()),
                            item: PremiseItem::Sub(d),
                        });
                    }
                    rule(R_PLUS, premises)
                })(),
                (PosType::Down(sa), PosType::Down(sb)) => (|| {
                    let d = derive(name_of_neg(sa), name_of_neg(sb), sig, inhabit, assumptions)?;
                    rule(R_DOWN, vec![plain(PremiseItem::Sub(d))])
                })(),
                _ => None,
            };
            if structural.is_some() {
                return structural;
            }
            if inhabit.is_empty(a) {
                return rule(R_BOT_POS, vec![plain(PremiseItem::Empty(a.clone()))]);
            }
            None
        }
        (TypeDef::Neg(sa), TypeDef::Neg(sb)) => {
            let structural = match (sa, sb) {
                (NegType::Arrow(t1, s2), NegType::Arrow(u1, r2)) => (|| {
                    let d1 = derive(name_of_pos(u1), name_of_pos(t1), sig, inhabit, assumptions)?;
                    let d2 = derive(name_of_neg(s2), name_of_neg(r2), sig, inhabit, assumptions)?;
                    rule(
                        R_ARROW,
                        vec![plain(PremiseItem::Sub(d1)), plain(PremiseItem::Sub(d2))],
                    )
                })(),
                (NegType::Up(t), NegType::Up(u)) => (|| {
                    let d = derive(name_of_pos(t), name_of_pos(u), sig, inhabit, assumptions)?;
                    rule(R_UP, vec![plain(PremiseItem::Sub(d))])
                })(),
                (NegType::Lazy(ls), NegType::Lazy(ks)) => (|| {
                    let mut premises = Vec::new();
                    for (j, rj) in ks {
                        let (_, sj) = ls.iter().find(|(l, _)| l == j)?;
                        let d = derive(name_of_neg(sj), name_of_neg(rj), sig, inhabit, assumptions)?;
                        premises.push(Premise {
                            label: Some(j.clone()),
                            item: PremiseItem::Sub(d),
                        });
                    }
                    rule(R_WITH, premises)
                })(),
                _ => None,
            };
            if structural.is_some() {
                return structural;
            }
            if let NegType::Up(t) = sa {
                let t = name_of_pos(t);
                if inhabit.is_empty(t) {
                    return rule(R_BOT_NEG, vec![plain(PremiseItem::Empty(t.clone()))]);
                }
            }
            if inhabit.is_full(b) {
                return rule(R_TOP, vec![plain(PremiseItem::Full(b.clone()))]);
            }
            None
        }
        _ => None,
    }
}

/// Renders a derivation as an indented tree with cycle back-references:
/// goals that are cycled back to get a marker `(*)`, `(†)`, ...
pub fn render_derivation(d: &Derivation) -> String {
    let targets = d.cycle_goals();
    let mut marks: Vec<(TypeName, TypeName)> = Vec::new();
    let mut out = String::new();
    render(d, None, 0, &targets, &mut marks, &mut out);
    out
}

const MARKS: [&str; 4] = ["*", "†", "‡", "§"];

fn mark_str(i: usize) -> String {
    if i < MARKS.len() {
        MARKS[i].to_string()
    } else {
        format!("*{}", i + 1)
    }
}

fn render(
    d: &Derivation,
    label: Option<&Label>,
    depth: usize,
    targets: &HashSet<(TypeName, TypeName)>,
    marks: &mut Vec<(TypeName, TypeName)>,
    out: &mut String,
) {
    use std::fmt::Write;
    let indent = "  ".repeat(depth);
    let lab = label.map(|l| format!("[{}] ", l)).unwrap_or_default();
    let goal = (d.left.clone(), d.right.clone());
    match &d.node {
        DerivNode::Cycle => {
            let idx = marks.iter().position(|g| *g == goal).unwrap_or_else(|| {
                marks.push(goal.clone());
                marks.len() - 1
            });
            let _ = writeln!(
                out,
                "{}{}{} <= {}   (cycle {})",
                indent,
                lab,
                d.left,
                d.right,
                mark_str(idx)
            );
        }
        DerivNode::Rule { rule, premises } => {
            let mark = if targets.contains(&goal) {
                let idx = marks.iter().position(|g| *g == goal).unwrap_or_else(|| {
                    marks.push(goal.clone());
                    marks.len() - 1
                });
                format!(" ({})", mark_str(idx))
            } else {
                String::new()
            };
            let _ = writeln!(
                out,
                "{}{}{} <= {}{}   [{}]",
                indent, lab, d.left, d.right, mark, rule
            );
            for p in premises {
                match &p.item {
                    PremiseItem::Sub(sub) => {
                        render(sub, p.label.as_ref(), depth + 1, targets, marks, out)
                    }
                    PremiseItem::Empty(t) => {
                        let plab = p
                            .label
                            .as_ref()
                            .map(|l| format!("[{}] ", l))
                            .unwrap_or_default();
                        let _ = writeln!(out, "{}  {}{} empty", indent, plab, t);
                    }
                    PremiseItem::Full(t) => {
                        let _ = writeln!(out, "{}  {} full", indent, t);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inhabit::compute_inhabited;
    use crate::normalize::normalize_signature;
    use crate::parser::parse_signature;

    fn load(text: &str) -> (Signature, InhabitTable) {
        let sig = normalize_signature(&parse_signature(text).unwrap());
        let inhabit = compute_inhabited(&sig);
        (sig, inhabit)
    }

    fn query(sig: &Signature, inhabit: &InhabitTable, a: &str, b: &str) -> bool {
        let mut state = SubtypeState::new();
        SubQuery {
            sig,
            inhabit,
            state: &mut state,
        }
        .sub_names(&TypeName::new(a), &TypeName::new(b))
        .unwrap()
    }

    const BIN: &str = "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
                       type std = +{e : 1, b0 : pos, b1 : std}\n\
                       type pos = +{b0 : pos, b1 : std}";

    #[test]
    fn bin_std_pos_facts() {
        let (sig, inhabit) = load(BIN);
        assert!(query(&sig, &inhabit, "pos", "std"));
        assert!(query(&sig, &inhabit, "std", "bin"));
        assert!(query(&sig, &inhabit, "pos", "bin"));
        assert!(!query(&sig, &inhabit, "bin", "std"));
        assert!(!query(&sig, &inhabit, "std", "pos"));
        for t in ["bin", "std", "pos"] {
            assert!(query(&sig, &inhabit, t, t), "reflexivity on {}", t);
        }
    }

    #[test]
    fn streams() {
        let (sig, inhabit) = load(
            "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
             type std = +{e : 1, b0 : pos, b1 : std}\n\
             type pos = +{b0 : pos, b1 : std}\n\
             type pstream = up (std * padding)\n\
             type padding = +{none : padding, some : down pstream}\n\
             type zstream = up (std * +{some : down zstream})",
        );
        assert!(query(&sig, &inhabit, "zstream", "pstream"));
        assert!(!query(&sig, &inhabit, "pstream", "zstream"));
    }

    #[test]
    fn empty_types_are_bottom() {
        let (sig, inhabit) = load(
            "type t0 = 1 * t0\n\
             type u = +{a : 1}\n\
             type w = 1\n\
             type bot = up t0\n\
             type r = &{l : up 1}",
        );
        assert!(query(&sig, &inhabit, "t0", "u"));
        assert!(query(&sig, &inhabit, "t0", "w"));
        // ⊥- : up t0 <= any negative
        assert!(query(&sig, &inhabit, "bot", "r"));
    }

    #[test]
    fn full_types_are_top() {
        let (sig, inhabit) = load("type top = &{}\ntype s = 1 -> up 1\ntype r = up 1");
        assert!(query(&sig, &inhabit, "s", "top"));
        assert!(query(&sig, &inhabit, "r", "top"));
        assert!(!query(&sig, &inhabit, "top", "s"));
    }

    #[test]
    fn polarity_mismatch_is_an_error() {
        let (sig, inhabit) = load("type t = 1\ntype s = up t");
        let mut state = SubtypeState::new();
        let err = SubQuery {
            sig: &sig,
            inhabit: &inhabit,
            state: &mut state,
        }
        .sub_names(&TypeName::new("t"), &TypeName::new("s"))
        .unwrap_err();
        assert!(matches!(err, QueryError::PolarityMismatch(..)));
    }

    #[test]
    fn engine_agrees_with_gfp_oracle_on_bin() {
        let (sig, inhabit) = load(BIN);
        let table = sub_gfp_table(&sig, &inhabit);
        let names = sig.pos_names();
        let mut state = SubtypeState::new();
        for a in &names {
            for b in &names {
                let got = SubQuery {
                    sig: &sig,
                    inhabit: &inhabit,
                    state: &mut state,
                }
                .sub_names(a, b)
                .unwrap();
                assert_eq!(
                    got,
                    table.contains(&(a.clone(), b.clone())),
                    "engine/gfp disagree on {} <= {}",
                    a,
                    b
                );
            }
        }
        // the user-name fragment of the table
        let user: HashSet<(String, String)> = table
            .iter()
            .filter(|(a, b)| !a.is_internal() && !b.is_internal())
            .map(|(a, b)| (a.0.clone(), b.0.clone()))
            .collect();
        let mut expected = HashSet::new();
        for t in ["bin", "std", "pos"] {
            expected.insert((t.to_string(), t.to_string()));
        }
        expected.insert(("pos".into(), "std".into()));
        expected.insert(("pos".into(), "bin".into()));
        expected.insert(("std".into(), "bin".into()));
        assert_eq!(user, expected);
    }

    #[test]
    fn sub_types_interns_structural_queries() {
        let src = parse_signature("type bool = +{false : 1, true : 1}").unwrap();
        let mut norm = crate::normalize::Normalizer::normalize(&src);
        let sub = crate::parser::parse_pos_type("+{false : 1}").unwrap();
        let b = PosType::Name(TypeName::new("bool"));
        assert!(sub_pos_types(&sub, &b, &mut norm).unwrap());
        assert!(!sub_pos_types(&PosType::Unit, &b, &mut norm).unwrap());
        assert!(sub_pos_types(&PosType::Unit, &PosType::Unit, &mut norm).unwrap());
    }

    #[test]
    fn down_is_covariant() {
        let (sig, inhabit) = load(
            "type pstream = up (+{e : 1} * padding)\n\
             type padding = +{none : padding, some : down pstream}\n\
             type zstream = up (+{e : 1} * +{some : down zstream})\n\
             type dp = down pstream\n\
             type dz = down zstream",
        );
        assert!(query(&sig, &inhabit, "dz", "dp"));
        assert!(!query(&sig, &inhabit, "dp", "dz"));
    }

    #[test]
    fn explain_reconstructs_pos_std_derivation() {
        let (sig, inhabit) = load(BIN);
        let d = explain(&TypeName::new("pos"), &TypeName::new("std"), &sig, &inhabit)
            .unwrap()
            .expect("derivable");
        // root is the ⊕ rule, cycles on (pos,pos) and (std,std)
        match &d.node {
            DerivNode::Rule { rule, .. } => assert_eq!(*rule, R_PLUS),
            _ => panic!(),
        }
        let cycles = d.cycle_goals();
        assert!(cycles.contains(&(TypeName::new("pos"), TypeName::new("pos"))));
        assert!(cycles.contains(&(TypeName::new("std"), TypeName::new("std"))));
        let rules: HashSet<_> = d.rule_names().into_iter().collect();
        assert_eq!(rules, HashSet::from([R_PLUS, R_UNIT]));
    }

    #[test]
    fn cache_is_order_insensitive() {
        let (sig, inhabit) = load(BIN);
        let names = sig.pos_names();
        let mut pairs = Vec::new();
        for a in &names {
            for b in &names {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let baseline: Vec<bool> = {
            let mut state = SubtypeState::new();
            pairs
                .iter()
                .map(|(a, b)| {
                    SubQuery {
                        sig: &sig,
                        inhabit: &inhabit,
                        state: &mut state,
                    }
                    .sub_names(a, b)
                    .unwrap()
                })
                .collect()
        };
        // reversed query order must give identical answers
        let mut state = SubtypeState::new();
        let mut rev: Vec<bool> = pairs
            .iter()
            .rev()
            .map(|(a, b)| {
                SubQuery {
                    sig: &sig,
                    inhabit: &inhabit,
                    state: &mut state,
                }
                .sub_names(a, b)
                .unwrap()
            })
            .collect();
        rev.reverse();
        assert_eq!(baseline, rev);
    }
}
