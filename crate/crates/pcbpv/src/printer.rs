//! Pretty-printer for signatures, types, and terms.
//!
//! Printing round-trips: `parse(print(x))` is structurally equal to `x`.

use crate::syntax::*;
use std::fmt::Write;

// Type precedence: 0 arrow, 1 tensor, 2 prefix (up/down), 3 atom.

pub fn print_pos_type(t: &PosType) -> String {
    let mut s = String::new();
    pos_prec(t, 0, &mut s);
    s
}

pub fn print_neg_type(t: &NegType) -> String {
    let mut s = String::new();
    neg_prec(t, 0, &mut s);
    s
}

fn paren_if(cond: bool, inner: impl FnOnce(&mut String), out: &mut String) {
    if cond {
        out.push('(');
        inner(out);
        out.push(')');
    } else {
        inner(out);
    }
}

fn pos_prec(t: &PosType, prec: u8, out: &mut String) {
    match t {
        PosType::Tensor(a, b) => paren_if(
            prec > 1,
            |o| {
                pos_prec(a, 1, o);
                o.push_str(" * ");
                pos_prec(b, 2, o);
            },
            out,
        ),
        PosType::Unit => out.push('1'),
        PosType::Variant(fields) => {
            out.push_str("+{");
            type_fields_pos(fields, out);
            out.push('}');
        }
        PosType::Down(s) => paren_if(
            prec > 2,
            |o| {
                o.push_str("down ");
                neg_prec(s, 3, o);
            },
            out,
        ),
        PosType::Name(n) => out.push_str(&n.0),
    }
}

fn neg_prec(t: &NegType, prec: u8, out: &mut String) {
    match t {
        NegType::Arrow(a, b) => paren_if(
            prec > 0,
            |o| {
                pos_prec(a, 1, o);
                o.push_str(" -> ");
                neg_prec(b, 0, o);
            },
            out,
        ),
        NegType::Lazy(fields) => {
            out.push_str("&{");
            type_fields_neg(fields, out);
            out.push('}');
        }
        NegType::Up(s) => paren_if(
            prec > 2,
            |o| {
                o.push_str("up ");
                pos_prec(s, 3, o);
            },
            out,
        ),
        NegType::Name(n) => out.push_str(&n.0),
    }
}

fn type_fields_pos(fields: &[(Label, PosType)], out: &mut String) {
    for (i, (l, t)) in fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} : ", l);
        pos_prec(t, 0, out);
    }
}

fn type_fields_neg(fields: &[(Label, NegType)], out: &mut String) {
    for (i, (l, t)) in fields.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{} : ", l);
        neg_prec(t, 0, out);
    }
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

/// True if the printed form of `v` cannot swallow following tokens, so it can
/// appear bare as an application argument.
fn value_is_closed(v: &Value) -> bool {
    match &v.kind {
        ValueKind::Var(_) | ValueKind::Unit | ValueKind::Pair(..) | ValueKind::Anno(..) => true,
        ValueKind::Inj(_, inner) | ValueKind::FoldMu(inner) => value_is_closed(inner),
        ValueKind::Thunk(_) => false,
    }
}

pub fn print_value(v: &Value) -> String {
    let mut s = String::new();
    value_full(v, &mut s);
    s
}

fn value_full(v: &Value, out: &mut String) {
    match &v.kind {
        ValueKind::Var(x) => out.push_str(x),
        ValueKind::Unit => out.push_str("()"),
        ValueKind::Pair(a, b) => {
            out.push('(');
            value_full(a, out);
            out.push_str(", ");
            value_full(b, out);
            out.push(')');
        }
        ValueKind::Inj(l, inner) => {
            let _ = write!(out, "'{} ", l);
            value_full(inner, out);
        }
        ValueKind::Thunk(e) => {
            out.push_str("thunk ");
            comp_full(e, out);
        }
        ValueKind::Anno(inner, t) => {
            out.push('(');
            value_full(inner, out);
            out.push_str(" : ");
            pos_prec(t, 0, out);
            out.push(')');
        }
        ValueKind::FoldMu(inner) => {
            out.push_str("fold ");
            value_full(inner, out);
        }
    }
}

fn value_arg(v: &Value, out: &mut String) {
    paren_if(!value_is_closed(v), |o| value_full(v, o), out);
}

pub fn print_computation(e: &Computation) -> String {
    let mut s = String::new();
    comp_full(e, &mut s);
    s
}

fn comp_full(e: &Computation, out: &mut String) {
    match &e.kind {
        CompKind::Lam(x, body) => {
            let _ = write!(out, "\\{}. ", x);
            comp_full(body, out);
        }
        CompKind::LetUp(x, e1, e2) => {
            let _ = write!(out, "let {} = ", x);
            comp_full(e1, out);
            out.push_str(" in ");
            comp_full(e2, out);
        }
        CompKind::SplitPair(v, x, y, body) => {
            out.push_str("split ");
            value_scrutinee(v, out);
            let _ = write!(out, " as ({}, {}) in ", x, y);
            comp_full(body, out);
        }
        CompKind::SplitUnit(v, body) => {
            out.push_str("split ");
            value_scrutinee(v, out);
            out.push_str(" as () in ");
            comp_full(body, out);
        }
        CompKind::Match(v, branches) => {
            out.push_str("match ");
            value_scrutinee(v, out);
            out.push_str(" {");
            for (i, (l, x, body)) in branches.iter().enumerate() {
                if i > 0 {
                    out.push_str(" |");
                }
                let _ = write!(out, " '{} {} => ", l, x);
                comp_full(body, out);
            }
            out.push_str(" }");
        }
        CompKind::CaseFold(x, v, body) => {
            out.push_str("match ");
            value_scrutinee(v, out);
            let _ = write!(out, " {{ fold {} => ", x);
            comp_full(body, out);
            out.push_str(" }");
        }
        CompKind::Return(v) => {
            out.push_str("return ");
            value_full(v, out);
        }
        CompKind::Force(v) => {
            out.push_str("force ");
            value_full(v, out);
        }
        CompKind::FoldNu(e1) => {
            out.push_str("fold ");
            comp_full(e1, out);
        }
        CompKind::Unfold(e1) => {
            out.push_str("unfold ");
            comp_full(e1, out);
        }
        CompKind::App(..) => {
            // flatten the application spine
            let mut args = Vec::new();
            let mut head = e;
            while let CompKind::App(f, v) = &head.kind {
                args.push(v.as_ref());
                head = f;
            }
            args.reverse();
            comp_head(head, out);
            for a in args {
                out.push(' ');
                value_arg(a, out);
            }
        }
        CompKind::Proj(base, l) => {
            comp_head(base, out);
            let _ = write!(out, ".{}", l);
        }
        CompKind::Def(f) => out.push_str(&f.0),
        CompKind::Record(fields) => {
            out.push('{');
            for (i, (l, e1)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{} = ", l);
                comp_full(e1, out);
            }
            out.push('}');
        }
        CompKind::Anno(e1, t) => {
            out.push('(');
            comp_full(e1, out);
            out.push_str(" : ");
            neg_prec(t, 0, out);
            out.push(')');
        }
    }
}

/// Head of an application chain or base of a projection.
fn comp_head(e: &Computation, out: &mut String) {
    match &e.kind {
        CompKind::Def(_) | CompKind::Record(_) | CompKind::Proj(..) | CompKind::Anno(..) => {
            comp_full(e, out)
        }
        _ => {
            out.push('(');
            comp_full(e, out);
            out.push(')');
        }
    }
}

/// Match/split scrutinees: a trailing thunk would swallow the `{`/`as`? No —
/// `{` and `as` terminate value parses; print bare.
fn value_scrutinee(v: &Value, out: &mut String) {
    value_full(v, out);
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

pub fn print_signature(sig: &Signature) -> String {
    let mut out = String::new();
    for d in &sig.type_defs {
        out.push_str("type ");
        out.push_str(&d.name.0);
        out.push_str(" = ");
        match &d.body {
            TypeDef::Pos(t) => pos_prec(t, 0, &mut out),
            TypeDef::Neg(t) => neg_prec(t, 0, &mut out),
        }
        out.push('\n');
    }
    for d in &sig.expr_defs {
        out.push_str("def ");
        out.push_str(&d.name.0);
        out.push_str(" : ");
        neg_prec(&d.dtype, 0, &mut out);
        out.push_str(" = ");
        comp_full(&d.body, &mut out);
        out.push('\n');
    }
    out
}

/// Result format used by `run`: returned values print in term syntax,
/// other terminal computations print as opaque summaries.
pub fn print_run_result(e: &Computation) -> String {
    match &e.kind {
        CompKind::Return(_) => print_computation(e),
        CompKind::Lam(..) => "<fn>".to_string(),
        CompKind::Record(fields) => {
            let labels: Vec<&str> = fields.iter().map(|(l, _)| l.as_str()).collect();
            format!("<record{{{}}}>", labels.join(","))
        }
        CompKind::FoldNu(_) => "<fold>".to_string(),
        _ => print_computation(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::*;

    fn roundtrip_sig(text: &str) {
        let sig = parse_signature(text).unwrap();
        let printed = print_signature(&sig);
        let reparsed = parse_signature(&printed)
            .unwrap_or_else(|e| panic!("reparse failed on {:?}: {}", printed, e));
        assert_eq!(sig, reparsed, "printed as {:?}", printed);
    }

    #[test]
    fn roundtrips_example_signatures() {
        roundtrip_sig(
            "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
             type std = +{e : 1, b0 : pos, b1 : std}\n\
             type pos = +{b0 : pos, b1 : std}\n\
             def six : up pos = return 'b0 'b1 'b1 'e ()\n\
             def inc : std -> up pos = \\x. match x { 'e u => return 'b1 'e u | 'b0 x' => return 'b1 x' | 'b1 x' => let y' = inc x' in return 'b0 y' }",
        );
        roundtrip_sig("");
        roundtrip_sig(
            "type U = (down U) -> U\n\
             def omega : (down U) -> U = \\x. (force x) x\n\
             def Omega : U = omega (thunk omega)",
        );
        roundtrip_sig("type t0 = 1 * t0\ntype zero = +{}\ntype top = &{}");
    }

    #[test]
    fn application_heads_get_parenthesized() {
        let e = Computation::app(
            Computation::lam("x", Computation::ret(Value::var("x"))),
            Value::unit(),
        );
        let printed = print_computation(&e);
        assert_eq!(printed, "(\\x. return x) ()");
        assert_eq!(parse_computation(&printed).unwrap(), e);
    }

    #[test]
    fn thunk_arguments_get_parenthesized() {
        let e = Computation::app(
            Computation::def("omega"),
            Value::thunk(Computation::def("omega")),
        );
        let printed = print_computation(&e);
        assert_eq!(printed, "omega (thunk omega)");
        assert_eq!(parse_computation(&printed).unwrap(), e);
    }

    #[test]
    fn projection_of_application_roundtrips() {
        let e = Computation::proj(
            Computation::app(Computation::def("f"), Value::unit()),
            "hd",
        );
        let printed = print_computation(&e);
        assert_eq!(printed, "(f ()).hd");
        assert_eq!(parse_computation(&printed).unwrap(), e);
    }

    #[test]
    fn run_results_format() {
        assert_eq!(
            print_run_result(&Computation::ret(Value::inj("e", Value::unit()))),
            "return 'e ()"
        );
        assert_eq!(
            print_run_result(&Computation::lam("x", Computation::ret(Value::var("x")))),
            "<fn>"
        );
        let rec = Computation::new(CompKind::Record(vec![
            ("hd".into(), Computation::ret(Value::unit())),
            ("tl".into(), Computation::def("f")),
        ]));
        assert_eq!(print_run_result(&rec), "<record{hd,tl}>");
    }
}
