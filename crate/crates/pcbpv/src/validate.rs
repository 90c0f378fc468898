//! Signature well-formedness: name resolution, label distinctness,
//! contractivity, polarity consistency, closedness of definition bodies.
//!
//! Typechecking of definition bodies is not done here.

use crate::syntax::*;
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub span: Span,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [{}]", self.span, self.message, self.rule)
    }
}

fn diag(span: Span, rule: &'static str, message: String) -> Diagnostic {
    Diagnostic {
        span,
        rule,
        message,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum TermMode {
    Core,
    Iso,
}

/// Checks a parsed signature. An empty result means the signature is valid.
pub fn validate_signature(sig: &Signature) -> Vec<Diagnostic> {
    validate_signature_mode(sig, TermMode::Core)
}

pub fn validate_signature_mode(sig: &Signature, mode: TermMode) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    // duplicate definitions
    let mut seen_types = HashSet::new();
    for d in &sig.type_defs {
        if !seen_types.insert(d.name.clone()) {
            out.push(diag(
                d.span,
                "duplicate-type",
                format!("type name `{}` is defined more than once", d.name),
            ));
        }
    }
    let mut seen_exprs = HashSet::new();
    for d in &sig.expr_defs {
        if !seen_exprs.insert(d.name.clone()) {
            out.push(diag(
                d.span,
                "duplicate-def",
                format!("`{}` is defined more than once", d.name),
            ));
        }
    }

    // contractivity and type bodies
    for d in &sig.type_defs {
        match &d.body {
            TypeDef::Pos(PosType::Name(n)) => out.push(diag(
                d.span,
                "contractivity",
                format!(
                    "the body of `{}` is the bare type name `{}`; definitions must be structural",
                    d.name, n
                ),
            )),
            TypeDef::Neg(NegType::Name(n)) => out.push(diag(
                d.span,
                "contractivity",
                format!(
                    "the body of `{}` is the bare type name `{}`; definitions must be structural",
                    d.name, n
                ),
            )),
            TypeDef::Pos(t) => check_pos_type(t, d.span, sig, &mut out),
            TypeDef::Neg(t) => check_neg_type(t, d.span, sig, &mut out),
        }
    }

    // declared types and bodies of expression definitions
    for d in &sig.expr_defs {
        check_neg_type(&d.dtype, d.span, sig, &mut out);
        let mut bound = Vec::new();
        check_term_comp(&d.body, &mut bound, sig, mode, &mut out);
    }

    out
}

fn check_name(n: &TypeName, want: Polarity, span: Span, sig: &Signature, out: &mut Vec<Diagnostic>) {
    match sig.polarity_of(n) {
        None => out.push(diag(
            span,
            "unknown-type",
            format!("type name `{}` is not defined", n),
        )),
        Some(p) if p != want => out.push(diag(
            span,
            "polarity",
            format!("type name `{}` is {}, but is used as a {} type", n, p, want),
        )),
        _ => {}
    }
}

fn check_labels(labels: &[&Label], span: Span, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            out.push(diag(
                span,
                "duplicate-label",
                format!("label `{}` appears more than once", l),
            ));
        }
    }
}

pub fn check_pos_type(t: &PosType, span: Span, sig: &Signature, out: &mut Vec<Diagnostic>) {
    match t {
        PosType::Tensor(a, b) => {
            check_pos_type(a, span, sig, out);
            check_pos_type(b, span, sig, out);
        }
        PosType::Unit => {}
        PosType::Variant(fields) => {
            check_labels(&fields.iter().map(|(l, _)| l).collect::<Vec<_>>(), span, out);
            for (_, ty) in fields {
                check_pos_type(ty, span, sig, out);
            }
        }
        PosType::Down(s) => check_neg_type(s, span, sig, out),
        PosType::Name(n) => check_name(n, Polarity::Pos, span, sig, out),
    }
}

pub fn check_neg_type(t: &NegType, span: Span, sig: &Signature, out: &mut Vec<Diagnostic>) {
    match t {
        NegType::Arrow(a, b) => {
            check_pos_type(a, span, sig, out);
            check_neg_type(b, span, sig, out);
        }
        NegType::Lazy(fields) => {
            check_labels(&fields.iter().map(|(l, _)| l).collect::<Vec<_>>(), span, out);
            for (_, ty) in fields {
                check_neg_type(ty, span, sig, out);
            }
        }
        NegType::Up(s) => check_pos_type(s, span, sig, out),
        NegType::Name(n) => check_name(n, Polarity::Neg, span, sig, out),
    }
}

fn check_term_value(
    v: &Value,
    bound: &mut Vec<Var>,
    sig: &Signature,
    mode: TermMode,
    out: &mut Vec<Diagnostic>,
) {
    match &v.kind {
        ValueKind::Var(x) => {
            if !bound.iter().any(|y| y == x) {
                out.push(diag(
                    v.span,
                    "unbound-variable",
                    format!("variable `{}` is not bound", x),
                ));
            }
        }
        ValueKind::Pair(a, b) => {
            check_term_value(a, bound, sig, mode, out);
            check_term_value(b, bound, sig, mode, out);
        }
        ValueKind::Unit => {}
        ValueKind::Inj(_, a) => check_term_value(a, bound, sig, mode, out),
        ValueKind::Thunk(e) => check_term_comp(e, bound, sig, mode, out),
        ValueKind::Anno(a, t) => {
            check_pos_type(t, v.span, sig, out);
            check_term_value(a, bound, sig, mode, out);
        }
        ValueKind::FoldMu(a) => {
            if mode == TermMode::Core {
                out.push(diag(
                    v.span,
                    "iso-only",
                    "`fold` values require the iso front end".into(),
                ));
            }
            check_term_value(a, bound, sig, mode, out);
        }
    }
}

fn check_term_comp(
    e: &Computation,
    bound: &mut Vec<Var>,
    sig: &Signature,
    mode: TermMode,
    out: &mut Vec<Diagnostic>,
) {
    match &e.kind {
        CompKind::Lam(x, body) => {
            bound.push(x.clone());
            check_term_comp(body, bound, sig, mode, out);
            bound.pop();
        }
        CompKind::App(f, v) => {
            check_term_comp(f, bound, sig, mode, out);
            check_term_value(v, bound, sig, mode, out);
        }
        CompKind::Record(fields) => {
            check_labels(&fields.iter().map(|(l, _)| l).collect::<Vec<_>>(), e.span, out);
            for (_, e1) in fields {
                check_term_comp(e1, bound, sig, mode, out);
            }
        }
        CompKind::Proj(e1, _) => check_term_comp(e1, bound, sig, mode, out),
        CompKind::Return(v) => check_term_value(v, bound, sig, mode, out),
        CompKind::LetUp(x, e1, e2) => {
            check_term_comp(e1, bound, sig, mode, out);
            bound.push(x.clone());
            check_term_comp(e2, bound, sig, mode, out);
            bound.pop();
        }
        CompKind::Def(f) => {
            if sig.expr_def(f).is_none() {
                out.push(diag(
                    e.span,
                    "unknown-def",
                    format!("`{}` is not defined", f),
                ));
            }
        }
        CompKind::SplitPair(v, x, y, body) => {
            check_term_value(v, bound, sig, mode, out);
            if x == y {
                out.push(diag(
                    e.span,
                    "duplicate-binder",
                    format!("split binds `{}` twice", x),
                ));
            }
            bound.push(x.clone());
            bound.push(y.clone());
            check_term_comp(body, bound, sig, mode, out);
            bound.pop();
            bound.pop();
        }
        CompKind::SplitUnit(v, body) => {
            check_term_value(v, bound, sig, mode, out);
            check_term_comp(body, bound, sig, mode, out);
        }
        CompKind::Match(v, branches) => {
            check_term_value(v, bound, sig, mode, out);
            check_labels(
                &branches.iter().map(|(l, _, _)| l).collect::<Vec<_>>(),
                e.span,
                out,
            );
            for (_, x, body) in branches {
                bound.push(x.clone());
                check_term_comp(body, bound, sig, mode, out);
                bound.pop();
            }
        }
        CompKind::Force(v) => check_term_value(v, bound, sig, mode, out),
        CompKind::Anno(e1, t) => {
            check_neg_type(t, e.span, sig, out);
            check_term_comp(e1, bound, sig, mode, out);
        }
        CompKind::FoldNu(e1) | CompKind::Unfold(e1) => {
            if mode == TermMode::Core {
                out.push(diag(
                    e.span,
                    "iso-only",
                    "`fold`/`unfold` computations require the iso front end".into(),
                ));
            }
            check_term_comp(e1, bound, sig, mode, out);
        }
        CompKind::CaseFold(x, v, body) => {
            if mode == TermMode::Core {
                out.push(diag(
                    e.span,
                    "iso-only",
                    "`fold` patterns require the iso front end".into(),
                ));
            }
            check_term_value(v, bound, sig, mode, out);
            bound.push(x.clone());
            check_term_comp(body, bound, sig, mode, out);
            bound.pop();
        }
    }
}
