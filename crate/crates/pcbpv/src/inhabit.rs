//! Emptiness of positive type names and fullness of negative type names,
//! precomputed per normalized signature.
//!
//! The implementation runs a least fixed point over "inhabited" and takes the
//! complement, which coincides with the greatest-fixed-point reading of the
//! circular emptiness rules. The rule-literal circular search is kept as a
//! cross-check, and `brute_force_empty` enumerates candidate values as an
//! independent oracle.

use crate::syntax::*;
use std::collections::{HashMap, HashSet};

/// Expression name of the synthesized diverging definition `%loop.<s> : s = %loop.<s>`.
pub fn loop_def_name(s: &TypeName) -> ExprName {
    ExprName::new(format!("%loop.{}", s.0.trim_start_matches('%')))
}

#[derive(Clone, Debug)]
pub struct InhabitTable {
    empty_pos: HashSet<TypeName>,
    full_neg: HashSet<TypeName>,
    /// Smallest inhabitant per nonempty positive name; ties break toward the
    /// earlier source label.
    witnesses: HashMap<TypeName, Value>,
}

impl InhabitTable {
    pub fn is_empty(&self, t: &TypeName) -> bool {
        self.empty_pos.contains(t)
    }

    pub fn is_full(&self, s: &TypeName) -> bool {
        self.full_neg.contains(s)
    }

    pub fn witness(&self, t: &TypeName) -> Option<&Value> {
        self.witnesses.get(t)
    }

    pub fn empty_names(&self) -> &HashSet<TypeName> {
        &self.empty_pos
    }
}

/// Adds a diverging definition `%loop.<s> : s = %loop.<s>` for every negative
/// name of the signature. Witnesses for `down s` positions refer to these.
pub fn add_loop_defs(sig: &Signature) -> Signature {
    let mut out = sig.clone();
    for s in sig.neg_names() {
        let f = loop_def_name(&s);
        if out.expr_def(&f).is_none() {
            out.push_expr(
                f.clone(),
                NegType::Name(s.clone()),
                Computation::new(CompKind::Def(f)),
                Span::synth(),
            );
        }
    }
    out
}

/// Computes emptiness, fullness, and minimal witnesses for a normalized
/// signature.
pub fn compute_inhabited(sig: &Signature) -> InhabitTable {
    // least fixed point of "inhabited", with minimal witness sizes
    let mut best: HashMap<TypeName, (usize, Value)> = HashMap::new();
    let pos_names = sig.pos_names();
    loop {
        let mut changed = false;
        for t in &pos_names {
            let body = sig.pos_def(t).expect("positive definition");
            let candidate = candidate_witness(body, &best);
            if let Some((size, w)) = candidate {
                let better = match best.get(t) {
                    None => true,
                    Some((old, _)) => size < *old,
                };
                if better {
                    best.insert(t.clone(), (size, w));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let empty_pos: HashSet<TypeName> = pos_names
        .iter()
        .filter(|t| !best.contains_key(*t))
        .cloned()
        .collect();

    // fullness is derived from emptiness, non-recursively
    let mut full_neg = HashSet::new();
    for s in sig.neg_names() {
        match sig.neg_def(&s).expect("negative definition") {
            NegType::Arrow(t1, _) => {
                if let PosType::Name(n) = t1.as_ref() {
                    if empty_pos.contains(n) {
                        full_neg.insert(s);
                    }
                }
            }
            NegType::Lazy(fields) if fields.is_empty() => {
                full_neg.insert(s);
            }
            _ => {}
        }
    }

    InhabitTable {
        empty_pos,
        full_neg,
        witnesses: best.into_iter().map(|(t, (_, w))| (t, w)).collect(),
    }
}

/// Smallest witness buildable from one structural layer given the current
/// table; `None` if no rule applies yet.
fn candidate_witness(
    body: &PosType,
    best: &HashMap<TypeName, (usize, Value)>,
) -> Option<(usize, Value)> {
    match body {
        PosType::Unit => Some((1, Value::unit())),
        PosType::Down(s) => {
            let name = s.as_name().expect("normalized body");
            let f = loop_def_name(name);
            Some((2, Value::thunk(Computation::new(CompKind::Def(f)))))
        }
        PosType::Tensor(a, b) => {
            let (sa, wa) = best.get(a.as_name()?)?;
            let (sb, wb) = best.get(b.as_name()?)?;
            Some((1 + sa + sb, Value::pair(wa.clone(), wb.clone())))
        }
        PosType::Variant(fields) => {
            let mut found: Option<(usize, Value)> = None;
            for (l, ty) in fields {
                let name = ty.as_name()?;
                if let Some((s, w)) = best.get(name) {
                    let cand = (1 + s, Value::inj(l.clone(), w.clone()));
                    match &found {
                        Some((old, _)) if *old <= cand.0 => {}
                        _ => found = Some(cand),
                    }
                }
            }
            found
        }
        PosType::Name(_) => None,
    }
}

/// Literal circular proof search for `t empty`: a goal recurring as its own
/// subgoal closes the branch.
pub fn empty_by_circular_rules(t: &TypeName, sig: &Signature) -> bool {
    fn search(t: &TypeName, sig: &Signature, assumptions: &mut Vec<TypeName>) -> bool {
        if assumptions.contains(t) {
            return true;
        }
        let Some(body) = sig.pos_def(t) else {
            return false;
        };
        assumptions.push(t.clone());
        let result = match body {
            PosType::Unit | PosType::Down(_) => false,
            PosType::Tensor(a, b) => {
                let a = a.as_name().expect("normalized body");
                let b = b.as_name().expect("normalized body");
                search(a, sig, assumptions) || search(b, sig, assumptions)
            }
            PosType::Variant(fields) => fields.iter().all(|(_, ty)| {
                let n = ty.as_name().expect("normalized body");
                search(n, sig, assumptions)
            }),
            PosType::Name(_) => false,
        };
        assumptions.pop();
        result
    }
    search(t, sig, &mut Vec::new())
}

#[derive(Clone, Debug, PartialEq)]
pub enum EmptySearch {
    FoundWitness(Value),
    NoneUpTo(u32),
}

/// Constructor depth of a value: `()` and variables have depth 0, every
/// injection/pair/fold layer adds one, thunks count as depth 1.
pub fn value_depth(v: &Value) -> u32 {
    match &v.kind {
        ValueKind::Unit | ValueKind::Var(_) => 0,
        ValueKind::Pair(a, b) => 1 + value_depth(a).max(value_depth(b)),
        ValueKind::Inj(_, a) | ValueKind::FoldMu(a) => 1 + value_depth(a),
        ValueKind::Thunk(_) => 1,
        ValueKind::Anno(a, _) => value_depth(a),
    }
}

/// All closed values of `t` up to the given constructor depth, thunk
/// positions drawn from `pool`. Results are ordered by increasing depth,
/// ties in source label order.
pub fn enumerate_with_pool(
    t: &PosType,
    sig: &Signature,
    depth: u32,
    pool: &dyn Fn(&TypeName) -> Vec<Value>,
) -> Vec<Value> {
    let mut out = Vec::new();
    enum_rec(t, sig, depth, pool, &mut out);
    out.sort_by_key(value_depth);
    out
}

fn enum_rec(
    t: &PosType,
    sig: &Signature,
    depth: u32,
    pool: &dyn Fn(&TypeName) -> Vec<Value>,
    out: &mut Vec<Value>,
) {
    match t {
        PosType::Name(n) => {
            if let Some(body) = sig.pos_def(n) {
                enum_rec(&body.clone(), sig, depth, pool, out);
            }
        }
        PosType::Unit => out.push(Value::unit()),
        PosType::Down(s) => {
            if depth >= 1 {
                let n = s.as_name().expect("normalized body");
                out.extend(pool(n));
            }
        }
        PosType::Tensor(a, b) => {
            if depth >= 1 {
                let mut left = Vec::new();
                enum_rec(a, sig, depth - 1, pool, &mut left);
                let mut right = Vec::new();
                enum_rec(b, sig, depth - 1, pool, &mut right);
                for va in &left {
                    for vb in &right {
                        out.push(Value::pair(va.clone(), vb.clone()));
                    }
                }
            }
        }
        PosType::Variant(fields) => {
            if depth >= 1 {
                for (l, ty) in fields {
                    let mut inner = Vec::new();
                    enum_rec(ty, sig, depth - 1, pool, &mut inner);
                    for v in inner {
                        out.push(Value::inj(l.clone(), v));
                    }
                }
            }
        }
    }
}

/// Exhaustive enumeration up to `depth`, with thunk positions filled from the
/// canonical diverging pool `{ thunk %loop.s }`. Independent of the fixed
/// point above.
pub fn brute_force_empty(t: &TypeName, sig: &Signature, depth: u32) -> EmptySearch {
    let pool = |s: &TypeName| vec![Value::thunk(Computation::new(CompKind::Def(loop_def_name(s))))];
    let values = enumerate_with_pool(&PosType::Name(t.clone()), sig, depth, &pool);
    match values.into_iter().next() {
        Some(w) => EmptySearch::FoundWitness(w),
        None => EmptySearch::NoneUpTo(depth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::normalize_signature;
    use crate::parser::{parse_signature, parse_value};

    fn table_for(text: &str) -> (Signature, InhabitTable) {
        let sig = normalize_signature(&parse_signature(text).unwrap());
        let table = compute_inhabited(&sig);
        (sig, table)
    }

    #[test]
    fn t0_is_empty() {
        let (_, table) = table_for("type t0 = 1 * t0");
        assert!(table.is_empty(&TypeName::new("t0")));
        assert!(table.witness(&TypeName::new("t0")).is_none());
    }

    #[test]
    fn empty_variant_is_empty_and_unit_has_unit_witness() {
        let (_, table) = table_for("type zero = +{}\ntype one = 1");
        assert!(table.is_empty(&TypeName::new("zero")));
        assert!(!table.is_empty(&TypeName::new("one")));
        assert_eq!(table.witness(&TypeName::new("one")), Some(&Value::unit()));
    }

    #[test]
    fn fullness_facts() {
        let (_, table) = table_for(
            "type top = &{}\n\
             type s1 = 1 -> &{}\n\
             type s2 = &{l : &{}}\n\
             type t0 = 1 * t0\n\
             type r = up 1\n\
             type s = t0 -> r",
        );
        assert!(table.is_full(&TypeName::new("top")));
        assert!(!table.is_full(&TypeName::new("s1")));
        assert!(!table.is_full(&TypeName::new("s2")));
        assert!(table.is_full(&TypeName::new("s")));
        // no fullness for up-shifts
        assert!(!table.is_full(&TypeName::new("r")));
    }

    #[test]
    fn pos_witness_is_smallest() {
        let (_, table) = table_for(
            "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
             type std = +{e : 1, b0 : pos, b1 : std}\n\
             type pos = +{b0 : pos, b1 : std}",
        );
        let w = table.witness(&TypeName::new("pos")).unwrap();
        assert_eq!(w, &parse_value("'b1 'e ()").unwrap());
        let w = table.witness(&TypeName::new("std")).unwrap();
        assert_eq!(w, &parse_value("'e ()").unwrap());
    }

    #[test]
    fn down_types_are_inhabited_by_loop_thunks() {
        let (_, table) = table_for("type s = up 1\ntype t = down s");
        let w = table.witness(&TypeName::new("t")).unwrap();
        assert_eq!(w, &parse_value("thunk %loop.s").unwrap());
    }

    #[test]
    fn circular_rules_agree_with_fixed_point() {
        let (sig, table) = table_for(
            "type t0 = 1 * t0\n\
             type zero = +{}\n\
             type a = +{l : t0, r : zero}\n\
             type b = +{l : t0, r : 1}\n\
             type c = zero * b\n\
             type d = down (up 1)",
        );
        for t in sig.pos_names() {
            assert_eq!(
                empty_by_circular_rules(&t, &sig),
                table.is_empty(&t),
                "disagreement on {}",
                t
            );
        }
    }

    #[test]
    fn brute_force_matches_spec_examples() {
        let (sig, _) = table_for("type t0 = 1 * t0\ntype one = 1\ntype std = +{e : 1, b0 : std, b1 : std}");
        assert_eq!(
            brute_force_empty(&TypeName::new("t0"), &sig, 8),
            EmptySearch::NoneUpTo(8)
        );
        assert_eq!(
            brute_force_empty(&TypeName::new("one"), &sig, 1),
            EmptySearch::FoundWitness(Value::unit())
        );
        assert_eq!(
            brute_force_empty(&TypeName::new("std"), &sig, 2),
            EmptySearch::FoundWitness(parse_value("'e ()").unwrap())
        );
    }

    #[test]
    fn enumerate_std_to_depth_three() {
        let (sig, _) = table_for("type std = +{e : 1, b0 : pos, b1 : std}\ntype pos = +{b0 : pos, b1 : std}");
        let pool = |_: &TypeName| Vec::new();
        let vals = enumerate_with_pool(
            &PosType::Name(TypeName::new("std")),
            &sig,
            3,
            &pool,
        );
        let expect: Vec<Value> = ["'e ()", "'b1 'e ()", "'b0 'b1 'e ()", "'b1 'b1 'e ()"]
            .iter()
            .map(|s| parse_value(s).unwrap())
            .collect();
        assert_eq!(vals.len(), 4);
        for v in &expect {
            assert!(vals.contains(v), "missing {:?}", v);
        }
    }
}
