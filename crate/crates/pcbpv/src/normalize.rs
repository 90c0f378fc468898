//! Normalization to the alternating name/structural form, and elaboration of
//! declared types and annotations into signature names.
//!
//! After normalization every constructor argument position in every type
//! definition is a type name. Auxiliary names follow the scheme
//! `%<base>.<n>` with a per-signature counter; syntactically equal structural
//! bodies are hash-consed onto one auxiliary name.

use crate::syntax::*;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum BodyKey {
    Pos(PosType),
    Neg(NegType),
}

/// Incremental normalizer. Keeps the hash-cons table and the auxiliary-name
/// counter, so annotation types can be interned after the signature itself.
#[derive(Clone, Debug)]
pub struct Normalizer {
    pub sig: Signature,
    table: HashMap<BodyKey, TypeName>,
    counter: usize,
    base: String,
}

impl Normalizer {
    /// Normalizes every type definition of `src`, producing a signature whose
    /// definition bodies are structural with names in all argument positions.
    /// Expression definitions are copied unchanged.
    pub fn normalize(src: &Signature) -> Normalizer {
        let mut n = Normalizer {
            sig: Signature::new(),
            table: HashMap::new(),
            counter: 0,
            base: String::new(),
        };
        for d in &src.type_defs {
            n.base = d.name.0.trim_start_matches('%').to_string();
            let body = match &d.body {
                TypeDef::Pos(t) => TypeDef::Pos(n.shallow_pos(t)),
                TypeDef::Neg(t) => TypeDef::Neg(n.shallow_neg(t)),
            };
            n.sig.push_type(d.name.clone(), body.clone(), d.span);
            // register the user definition so equal annotation bodies reuse it
            let key = match body {
                TypeDef::Pos(t) => BodyKey::Pos(t),
                TypeDef::Neg(t) => BodyKey::Neg(t),
            };
            n.table.entry(key).or_insert_with(|| d.name.clone());
        }
        for d in &src.expr_defs {
            n.sig
                .push_expr(d.name.clone(), d.dtype.clone(), d.body.clone(), d.span);
        }
        n
    }

    fn fresh(&mut self) -> TypeName {
        let name = TypeName::new(format!("%{}.{}", self.base, self.counter));
        self.counter += 1;
        name
    }

    /// Interns a positive type as a name, creating auxiliary definitions for
    /// any structural layers.
    pub fn intern_pos(&mut self, t: &PosType) -> TypeName {
        match t {
            PosType::Name(n) => n.clone(),
            _ => {
                let body = self.shallow_pos(t);
                let key = BodyKey::Pos(body.clone());
                if let Some(n) = self.table.get(&key) {
                    return n.clone();
                }
                let name = self.fresh();
                self.table.insert(key, name.clone());
                self.sig
                    .push_type(name.clone(), TypeDef::Pos(body), Span::synth());
                name
            }
        }
    }

    /// Interns a negative type as a name.
    pub fn intern_neg(&mut self, t: &NegType) -> TypeName {
        match t {
            NegType::Name(n) => n.clone(),
            _ => {
                let body = self.shallow_neg(t);
                let key = BodyKey::Neg(body.clone());
                if let Some(n) = self.table.get(&key) {
                    return n.clone();
                }
                let name = self.fresh();
                self.table.insert(key, name.clone());
                self.sig
                    .push_type(name.clone(), TypeDef::Neg(body), Span::synth());
                name
            }
        }
    }

    /// One structural layer with all argument positions interned to names.
    fn shallow_pos(&mut self, t: &PosType) -> PosType {
        match t {
            PosType::Tensor(a, b) => PosType::Tensor(
                Box::new(PosType::Name(self.intern_pos(a))),
                Box::new(PosType::Name(self.intern_pos(b))),
            ),
            PosType::Unit => PosType::Unit,
            PosType::Variant(fields) => PosType::Variant(
                fields
                    .iter()
                    .map(|(l, ty)| (l.clone(), PosType::Name(self.intern_pos(ty))))
                    .collect(),
            ),
            PosType::Down(s) => PosType::Down(Box::new(NegType::Name(self.intern_neg(s)))),
            PosType::Name(n) => PosType::Name(n.clone()),
        }
    }

    fn shallow_neg(&mut self, t: &NegType) -> NegType {
        match t {
            NegType::Arrow(a, b) => NegType::Arrow(
                Box::new(PosType::Name(self.intern_pos(a))),
                Box::new(NegType::Name(self.intern_neg(b))),
            ),
            NegType::Lazy(fields) => NegType::Lazy(
                fields
                    .iter()
                    .map(|(l, ty)| (l.clone(), NegType::Name(self.intern_neg(ty))))
                    .collect(),
            ),
            NegType::Up(s) => NegType::Up(Box::new(PosType::Name(self.intern_pos(s)))),
            NegType::Name(n) => NegType::Name(n.clone()),
        }
    }

    /// Sets the base used for auxiliary names created from here on.
    pub fn set_base(&mut self, base: &str) {
        self.base = base.trim_start_matches('%').to_string();
    }
}

/// Normalizes the type definitions of a valid signature.
pub fn normalize_signature(src: &Signature) -> Signature {
    Normalizer::normalize(src).sig
}

/// Full elaboration: normalizes type definitions, interns every declared
/// definition type and every annotation type as a signature name. The result
/// is what the typechecker, subtyping engine, and semantic oracle consume.
pub fn elaborate_signature(src: &Signature) -> Normalizer {
    let mut n = Normalizer::normalize(src);
    let defs: Vec<ExprDefEntry> = n.sig.expr_defs.drain(..).collect();
    let mut out = Vec::new();
    for mut d in defs {
        n.set_base(&d.name.0);
        let dname = n.intern_neg(&d.dtype);
        d.dtype = NegType::Name(dname);
        d.body = elab_comp(&d.body, &mut n);
        out.push(d);
    }
    for d in out {
        n.sig.push_expr(d.name, d.dtype, d.body, d.span);
    }
    n
}

fn elab_value(v: &Value, n: &mut Normalizer) -> Value {
    let kind = match &v.kind {
        ValueKind::Var(x) => ValueKind::Var(x.clone()),
        ValueKind::Pair(a, b) => ValueKind::Pair(
            Box::new(elab_value(a, n)),
            Box::new(elab_value(b, n)),
        ),
        ValueKind::Unit => ValueKind::Unit,
        ValueKind::Inj(l, a) => ValueKind::Inj(l.clone(), Box::new(elab_value(a, n))),
        ValueKind::Thunk(e) => ValueKind::Thunk(Box::new(elab_comp(e, n))),
        ValueKind::Anno(a, t) => ValueKind::Anno(
            Box::new(elab_value(a, n)),
            PosType::Name(n.intern_pos(t)),
        ),
        ValueKind::FoldMu(a) => ValueKind::FoldMu(Box::new(elab_value(a, n))),
    };
    Value::with_span(kind, v.span)
}

fn elab_comp(e: &Computation, n: &mut Normalizer) -> Computation {
    let kind = match &e.kind {
        CompKind::Lam(x, body) => CompKind::Lam(x.clone(), Box::new(elab_comp(body, n))),
        CompKind::App(f, v) => {
            CompKind::App(Box::new(elab_comp(f, n)), Box::new(elab_value(v, n)))
        }
        CompKind::Record(fields) => CompKind::Record(
            fields
                .iter()
                .map(|(l, e1)| (l.clone(), elab_comp(e1, n)))
                .collect(),
        ),
        CompKind::Proj(e1, l) => CompKind::Proj(Box::new(elab_comp(e1, n)), l.clone()),
        CompKind::Return(v) => CompKind::Return(Box::new(elab_value(v, n))),
        CompKind::LetUp(x, e1, e2) => CompKind::LetUp(
            x.clone(),
            Box::new(elab_comp(e1, n)),
            Box::new(elab_comp(e2, n)),
        ),
        CompKind::Def(f) => CompKind::Def(f.clone()),
        CompKind::SplitPair(v, x, y, body) => CompKind::SplitPair(
            Box::new(elab_value(v, n)),
            x.clone(),
            y.clone(),
            Box::new(elab_comp(body, n)),
        ),
        CompKind::SplitUnit(v, body) => CompKind::SplitUnit(
            Box::new(elab_value(v, n)),
            Box::new(elab_comp(body, n)),
        ),
        CompKind::Match(v, branches) => CompKind::Match(
            Box::new(elab_value(v, n)),
            branches
                .iter()
                .map(|(l, x, e1)| (l.clone(), x.clone(), elab_comp(e1, n)))
                .collect(),
        ),
        CompKind::Force(v) => CompKind::Force(Box::new(elab_value(v, n))),
        CompKind::Anno(e1, t) => CompKind::Anno(
            Box::new(elab_comp(e1, n)),
            NegType::Name(n.intern_neg(t)),
        ),
        CompKind::FoldNu(e1) => CompKind::FoldNu(Box::new(elab_comp(e1, n))),
        CompKind::Unfold(e1) => CompKind::Unfold(Box::new(elab_comp(e1, n))),
        CompKind::CaseFold(x, v, body) => CompKind::CaseFold(
            x.clone(),
            Box::new(elab_value(v, n)),
            Box::new(elab_comp(body, n)),
        ),
    };
    Computation::with_span(kind, e.span)
}

/// True if the type-definition bodies are all structural with names in every
/// argument position.
pub fn is_normal(sig: &Signature) -> bool {
    sig.type_defs.iter().all(|d| match &d.body {
        TypeDef::Pos(t) => match t {
            PosType::Tensor(a, b) => a.is_name() && b.is_name(),
            PosType::Unit => true,
            PosType::Variant(fields) => fields.iter().all(|(_, ty)| ty.is_name()),
            PosType::Down(s) => s.is_name(),
            PosType::Name(_) => false,
        },
        TypeDef::Neg(t) => match t {
            NegType::Arrow(a, b) => a.is_name() && b.is_name(),
            NegType::Lazy(fields) => fields.iter().all(|(_, ty)| ty.is_name()),
            NegType::Up(s) => s.is_name(),
            NegType::Name(_) => false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_signature;
    use crate::printer::print_signature;

    #[test]
    fn normalizes_std() {
        let sig = parse_signature("type pos = +{b0 : pos, b1 : std}\ntype std = +{e : 1, b0 : pos, b1 : std}").unwrap();
        let norm = normalize_signature(&sig);
        assert!(is_normal(&norm));
        // the unit in std's `e` branch became an auxiliary name
        let std = norm.pos_def(&TypeName::new("std")).unwrap();
        match std {
            PosType::Variant(fields) => {
                let e = &fields[0].1;
                let name = e.as_name().expect("branch must be a name");
                assert!(name.is_internal());
                assert_eq!(norm.pos_def(name), Some(&PosType::Unit));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn normalizes_t0() {
        let sig = parse_signature("type t0 = 1 * t0").unwrap();
        let norm = normalize_signature(&sig);
        assert!(is_normal(&norm));
        let printed = print_signature(&norm);
        assert_eq!(printed, "type %t0.0 = 1\ntype t0 = %t0.0 * t0\n");
    }

    #[test]
    fn idempotent_up_to_name_identity() {
        let sig = parse_signature(
            "type t0 = 1 * t0\ntype w = +{a : 1 * (1 * w), b : down (1 -> up 1)}",
        )
        .unwrap();
        let once = normalize_signature(&sig);
        let twice = normalize_signature(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn already_normal_signature_unchanged() {
        let sig = parse_signature("type u = 1\ntype std2 = +{e : u, b1 : std2}").unwrap();
        let norm = normalize_signature(&sig);
        assert_eq!(sig, norm);
    }

    #[test]
    fn equal_bodies_share_one_auxiliary_name() {
        let sig = parse_signature("type a = (1 * 1) * (1 * 1)").unwrap();
        let norm = normalize_signature(&sig);
        match norm.pos_def(&TypeName::new("a")).unwrap() {
            PosType::Tensor(l, r) => assert_eq!(l, r),
            _ => panic!(),
        }
        // %a.0 = 1, %a.1 = %a.0 * %a.0, a = %a.1 * %a.1
        assert_eq!(norm.type_defs.len(), 3);
    }

    #[test]
    fn elaboration_interns_declared_types_and_annotations() {
        let sig = parse_signature(
            "type U = (down U) -> U\n\
             def omega : (down U) -> U = \\x. (force x) x\n\
             def idu : up 1 = return (() : 1)",
        )
        .unwrap();
        let n = elaborate_signature(&sig);
        let omega = n.sig.expr_def(&ExprName::new("omega")).unwrap();
        // omega's declared type hash-conses onto U itself
        assert_eq!(omega.dtype, NegType::Name(TypeName::new("U")));
        let idu = n.sig.expr_def(&ExprName::new("idu")).unwrap();
        match &idu.body.kind {
            CompKind::Return(v) => match &v.kind {
                ValueKind::Anno(_, t) => assert!(t.is_name()),
                other => panic!("expected annotation, got {:?}", other),
            },
            _ => panic!(),
        }
    }
}
