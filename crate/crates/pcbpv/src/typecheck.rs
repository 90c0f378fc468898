//! Bidirectional typechecker: checking and synthesis for values and
//! computations, whole-signature checking, and a slow declarative reference
//! checker used as an oracle in tests.

use crate::pipeline::World;
use crate::syntax::*;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Check,
    Synth,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Check => write!(f, "check"),
            Direction::Synth => write!(f, "synth"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeError {
    pub span: Span,
    pub mode: Direction,
    pub expected: Option<String>,
    pub found: Option<String>,
    pub message: String,
}

/// Internal names get flagged so users know they came from normalization.
fn show_name(n: &TypeName) -> String {
    if n.is_internal() {
        format!("{} (internal)", n)
    } else {
        n.0.clone()
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.span, self.mode, self.message)?;
        match (&self.expected, &self.found) {
            (Some(e), Some(g)) => write!(f, " (expected {}, found {})", e, g),
            (Some(e), None) => write!(f, " (expected {})", e),
            (None, Some(g)) => write!(f, " (found {})", g),
            (None, None) => Ok(()),
        }
    }
}

fn err(
    span: Span,
    mode: Direction,
    expected: Option<String>,
    found: Option<String>,
    message: impl Into<String>,
) -> TypeError {
    TypeError {
        span,
        mode,
        expected,
        found,
        message: message.into(),
    }
}

fn value_form(v: &Value) -> &'static str {
    match &v.kind {
        ValueKind::Var(_) => "a variable",
        ValueKind::Pair(..) => "a pair",
        ValueKind::Unit => "the unit value",
        ValueKind::Inj(..) => "an injection",
        ValueKind::Thunk(_) => "a thunk",
        ValueKind::Anno(..) => "an annotated value",
        ValueKind::FoldMu(_) => "a fold value",
    }
}

fn comp_form(e: &Computation) -> &'static str {
    match &e.kind {
        CompKind::Lam(..) => "a function",
        CompKind::App(..) => "an application",
        CompKind::Record(_) => "a lazy record",
        CompKind::Proj(..) => "a projection",
        CompKind::Return(_) => "a return",
        CompKind::LetUp(..) => "a let binding",
        CompKind::Def(_) => "a definition name",
        CompKind::SplitPair(..) | CompKind::SplitUnit(..) => "a split",
        CompKind::Match(..) => "a match",
        CompKind::Force(_) => "a force",
        CompKind::Anno(..) => "an annotated computation",
        CompKind::FoldNu(_) => "a fold computation",
        CompKind::Unfold(_) => "an unfold",
        CompKind::CaseFold(..) => "a fold match",
    }
}

fn ctx_name(ctx: &Context, x: &str) -> Option<TypeName> {
    ctx.lookup(x).and_then(|t| t.as_name().cloned())
}

/// Checks `v` against the (elaborated) name `expected`.
pub fn check_value(
    w: &mut World,
    ctx: &Context,
    v: &Value,
    expected: &TypeName,
) -> Result<(), TypeError> {
    match &v.kind {
        // synthesizing forms route through subsumption
        ValueKind::Var(_) | ValueKind::Anno(..) => {
            let found = synth_value(w, ctx, v)?;
            match w.sub_names(&found, expected) {
                Ok(true) => Ok(()),
                _ => Err(err(
                    v.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    Some(show_name(&found)),
                    "value does not have the expected type",
                )),
            }
        }
        ValueKind::FoldMu(_) => Err(err(
            v.span,
            Direction::Check,
            Some(show_name(expected)),
            Some(value_form(v).into()),
            "fold values require the iso front end",
        )),
        _ => {
            let body = w.pos_body(expected).ok_or_else(|| {
                err(
                    v.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    None,
                    format!("`{}` is not a positive type name", expected),
                )
            })?;
            match (&v.kind, &body) {
                (ValueKind::Pair(a, b), PosType::Tensor(t1, t2)) => {
                    check_value(w, ctx, a, &name_of_pos(t1))?;
                    check_value(w, ctx, b, &name_of_pos(t2))
                }
                (ValueKind::Unit, PosType::Unit) => Ok(()),
                (ValueKind::Inj(j, vj), PosType::Variant(fields)) => {
                    match fields.iter().find(|(l, _)| l == j) {
                        Some((_, tj)) => check_value(w, ctx, vj, &name_of_pos(tj)),
                        None => Err(err(
                            v.span,
                            Direction::Check,
                            Some(show_name(expected)),
                            None,
                            format!("label `{}` is not a branch of `{}`", j, show_name(expected)),
                        )),
                    }
                }
                (ValueKind::Thunk(e), PosType::Down(s)) => {
                    check_comp(w, ctx, e, &name_of_neg(s))
                }
                _ => Err(err(
                    v.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    Some(value_form(v).into()),
                    format!(
                        "{} cannot have type `{}`",
                        value_form(v),
                        show_name(expected)
                    ),
                )),
            }
        }
    }
}

/// Synthesizes a type name for `v`. Only variables and annotations synthesize.
pub fn synth_value(w: &mut World, ctx: &Context, v: &Value) -> Result<TypeName, TypeError> {
    match &v.kind {
        ValueKind::Var(x) => ctx_name(ctx, x).ok_or_else(|| {
            err(
                v.span,
                Direction::Synth,
                None,
                None,
                format!("variable `{}` is not bound", x),
            )
        }),
        ValueKind::Anno(inner, t) => {
            let name = t
                .as_name()
                .cloned()
                .unwrap_or_else(|| w.intern_pos(t));
            check_value(w, ctx, inner, &name)?;
            Ok(name)
        }
        _ => Err(err(
            v.span,
            Direction::Synth,
            None,
            Some(value_form(v).into()),
            format!(
                "{} does not synthesize a type; add an annotation",
                value_form(v)
            ),
        )),
    }
}

/// Checks `e` against the (elaborated) name `expected`.
pub fn check_comp(
    w: &mut World,
    ctx: &Context,
    e: &Computation,
    expected: &TypeName,
) -> Result<(), TypeError> {
    match &e.kind {
        // synthesizing forms route through subsumption
        CompKind::App(..)
        | CompKind::Proj(..)
        | CompKind::Force(_)
        | CompKind::Def(_)
        | CompKind::Anno(..) => {
            let found = synth_comp(w, ctx, e)?;
            match w.sub_names(&found, expected) {
                Ok(true) => Ok(()),
                _ => Err(err(
                    e.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    Some(show_name(&found)),
                    "computation does not have the expected type",
                )),
            }
        }
        // eliminations check against any type; the scrutinee synthesizes
        CompKind::LetUp(x, e1, e2) => {
            let s1 = synth_comp(w, ctx, e1)?;
            match w.neg_body(&s1) {
                Some(NegType::Up(t)) => {
                    let ctx2 = ctx.extended(x.clone(), PosType::Name(name_of_pos(&t)));
                    check_comp(w, &ctx2, e2, expected)
                }
                _ => Err(err(
                    e1.span,
                    Direction::Check,
                    None,
                    Some(show_name(&s1)),
                    "let expects the bound computation to return a value",
                )),
            }
        }
        CompKind::SplitPair(v, x, y, body) => {
            let t = synth_value(w, ctx, v)?;
            match w.pos_body(&t) {
                Some(PosType::Tensor(t1, t2)) => {
                    let ctx2 = ctx
                        .extended(x.clone(), PosType::Name(name_of_pos(&t1)))
                        .extended(y.clone(), PosType::Name(name_of_pos(&t2)));
                    check_comp(w, &ctx2, body, expected)
                }
                _ => Err(err(
                    v.span,
                    Direction::Check,
                    None,
                    Some(show_name(&t)),
                    "split expects a pair",
                )),
            }
        }
        CompKind::SplitUnit(v, body) => {
            let t = synth_value(w, ctx, v)?;
            match w.pos_body(&t) {
                Some(PosType::Unit) => check_comp(w, ctx, body, expected),
                _ => Err(err(
                    v.span,
                    Direction::Check,
                    None,
                    Some(show_name(&t)),
                    "split expects the unit value",
                )),
            }
        }
        CompKind::Match(v, branches) => {
            let t = synth_value(w, ctx, v)?;
            match w.pos_body(&t) {
                Some(PosType::Variant(fields)) => {
                    for (l, _) in &fields {
                        if !branches.iter().any(|(bl, _, _)| bl == l) {
                            return Err(err(
                                e.span,
                                Direction::Check,
                                None,
                                None,
                                format!(
                                    "match on `{}` is missing a branch for label `{}`",
                                    show_name(&t),
                                    l
                                ),
                            ));
                        }
                    }
                    for (bl, x, body) in branches {
                        match fields.iter().find(|(l, _)| l == bl) {
                            Some((_, tl)) => {
                                let ctx2 =
                                    ctx.extended(x.clone(), PosType::Name(name_of_pos(tl)));
                                check_comp(w, &ctx2, body, expected)?;
                            }
                            None => {
                                return Err(err(
                                    body.span,
                                    Direction::Check,
                                    None,
                                    None,
                                    format!(
                                        "branch label `{}` is not in variant type `{}`",
                                        bl,
                                        show_name(&t)
                                    ),
                                ))
                            }
                        }
                    }
                    Ok(())
                }
                _ => Err(err(
                    v.span,
                    Direction::Check,
                    None,
                    Some(show_name(&t)),
                    "match expects a variant value",
                )),
            }
        }
        CompKind::FoldNu(_) | CompKind::Unfold(_) | CompKind::CaseFold(..) => Err(err(
            e.span,
            Direction::Check,
            Some(show_name(expected)),
            Some(comp_form(e).into()),
            "iso constructs require the iso front end",
        )),
        // introductions match the expected type's shape
        _ => {
            let body = w.neg_body(expected).ok_or_else(|| {
                err(
                    e.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    None,
                    format!("`{}` is not a negative type name", expected),
                )
            })?;
            match (&e.kind, &body) {
                (CompKind::Lam(x, b), NegType::Arrow(t1, s2)) => {
                    let ctx2 = ctx.extended(x.clone(), PosType::Name(name_of_pos(t1)));
                    check_comp(w, &ctx2, b, &name_of_neg(s2))
                }
                (CompKind::Record(fields), NegType::Lazy(spec)) => {
                    for (l, _) in spec {
                        if !fields.iter().any(|(fl, _)| fl == l) {
                            return Err(err(
                                e.span,
                                Direction::Check,
                                Some(show_name(expected)),
                                None,
                                format!("record is missing field `{}`", l),
                            ));
                        }
                    }
                    for (fl, fe) in fields {
                        match spec.iter().find(|(l, _)| l == fl) {
                            Some((_, sl)) => check_comp(w, ctx, fe, &name_of_neg(sl))?,
                            None => {
                                return Err(err(
                                    fe.span,
                                    Direction::Check,
                                    Some(show_name(expected)),
                                    None,
                                    format!(
                                        "field `{}` is not in record type `{}`",
                                        fl,
                                        show_name(expected)
                                    ),
                                ))
                            }
                        }
                    }
                    Ok(())
                }
                (CompKind::Return(v), NegType::Up(t)) => {
                    check_value(w, ctx, v, &name_of_pos(t))
                }
                _ => Err(err(
                    e.span,
                    Direction::Check,
                    Some(show_name(expected)),
                    Some(comp_form(e).into()),
                    format!(
                        "{} cannot have type `{}`",
                        comp_form(e),
                        show_name(expected)
                    ),
                )),
            }
        }
    }
}

/// Synthesizes a type name for `e`: applications, projections, force,
/// definition names, and annotations.
pub fn synth_comp(w: &mut World, ctx: &Context, e: &Computation) -> Result<TypeName, TypeError> {
    match &e.kind {
        CompKind::App(f, v) => {
            let sf = synth_comp(w, ctx, f)?;
            match w.neg_body(&sf) {
                Some(NegType::Arrow(t1, s2)) => {
                    check_value(w, ctx, v, &name_of_pos(&t1))?;
                    Ok(name_of_neg(&s2))
                }
                _ => Err(err(
                    f.span,
                    Direction::Synth,
                    None,
                    Some(show_name(&sf)),
                    "applied a computation that is not a function",
                )),
            }
        }
        CompKind::Proj(e1, j) => {
            let s = synth_comp(w, ctx, e1)?;
            match w.neg_body(&s) {
                Some(NegType::Lazy(fields)) => match fields.iter().find(|(l, _)| l == j) {
                    Some((_, sj)) => Ok(name_of_neg(sj)),
                    None => Err(err(
                        e.span,
                        Direction::Synth,
                        None,
                        Some(show_name(&s)),
                        format!("record type `{}` has no field `{}`", show_name(&s), j),
                    )),
                },
                _ => Err(err(
                    e1.span,
                    Direction::Synth,
                    None,
                    Some(show_name(&s)),
                    "projected from a computation that is not a record",
                )),
            }
        }
        CompKind::Force(v) => {
            let t = synth_value(w, ctx, v)?;
            match w.pos_body(&t) {
                Some(PosType::Down(s)) => Ok(name_of_neg(&s)),
                _ => Err(err(
                    v.span,
                    Direction::Synth,
                    None,
                    Some(show_name(&t)),
                    "forced a value that is not a thunk",
                )),
            }
        }
        CompKind::Def(f) => match w.sig().expr_def(f) {
            Some(d) => Ok(d
                .dtype
                .as_name()
                .cloned()
                .expect("elaborated declared type")),
            None => Err(err(
                e.span,
                Direction::Synth,
                None,
                None,
                format!("`{}` is not defined", f),
            )),
        },
        CompKind::Anno(e1, s) => {
            let name = s
                .as_name()
                .cloned()
                .unwrap_or_else(|| w.intern_neg(s));
            check_comp(w, ctx, e1, &name)?;
            Ok(name)
        }
        _ => Err(err(
            e.span,
            Direction::Synth,
            None,
            Some(comp_form(e).into()),
            format!(
                "{} does not synthesize a type; add an annotation",
                comp_form(e)
            ),
        )),
    }
}

fn name_of_pos(t: &PosType) -> TypeName {
    t.as_name().cloned().expect("normalized signature body")
}

fn name_of_neg(t: &NegType) -> TypeName {
    t.as_name().cloned().expect("normalized signature body")
}

/// Checks every definition body against its declared type. All definitions
/// stay in scope (they may be mutually recursive); errors are collected per
/// definition.
pub fn check_signature(w: &mut World) -> Vec<(ExprName, TypeError)> {
    let defs: Vec<(ExprName, TypeName)> = w
        .sig()
        .expr_defs
        .iter()
        .map(|d| {
            (
                d.name.clone(),
                d.dtype.as_name().cloned().expect("elaborated declared type"),
            )
        })
        .collect();
    let mut errors = Vec::new();
    for (name, dtype) in defs {
        let body = w.sig().expr_def(&name).unwrap().body.clone();
        if let Err(e) = check_comp(w, &Context::new(), &body, &dtype) {
            errors.push((name, e));
        }
    }
    errors
}

// ---------------------------------------------------------------------------
// Declarative reference checker
// ---------------------------------------------------------------------------

/// A slow declarative checker: the bidirectional rules with checking and
/// synthesis collapsed and annotations dropped; subsumption may be inserted
/// anywhere, searched over the signature's names. Used as a test oracle.
pub mod reference {
    use super::*;

    pub fn decl_value(w: &mut World, ctx: &Context, v: &Value, t: &TypeName) -> bool {
        let names = w.sig().pos_names();
        names
            .iter()
            .any(|t2| w.sub_names(t2, t) == Ok(true) && struct_value(w, ctx, v, t2))
    }

    fn struct_value(w: &mut World, ctx: &Context, v: &Value, t: &TypeName) -> bool {
        let Some(body) = w.pos_body(t) else {
            return false;
        };
        match (&v.kind, &body) {
            (ValueKind::Var(x), _) => ctx_name(ctx, x).as_ref() == Some(t),
            (ValueKind::Pair(a, b), PosType::Tensor(t1, t2)) => {
                decl_value(w, ctx, a, &name_of_pos(t1)) && decl_value(w, ctx, b, &name_of_pos(t2))
            }
            (ValueKind::Unit, PosType::Unit) => true,
            (ValueKind::Inj(j, vj), PosType::Variant(fields)) => fields
                .iter()
                .find(|(l, _)| l == j)
                .map(|(_, tj)| decl_value(w, ctx, vj, &name_of_pos(tj)))
                .unwrap_or(false),
            (ValueKind::Thunk(e), PosType::Down(s)) => {
                decl_comp(w, ctx, e, &name_of_neg(s))
            }
            _ => false,
        }
    }

    pub fn decl_comp(w: &mut World, ctx: &Context, e: &Computation, s: &TypeName) -> bool {
        let names = w.sig().neg_names();
        names
            .iter()
            .any(|s2| w.sub_names(s2, s) == Ok(true) && struct_comp(w, ctx, e, s2))
    }

    fn struct_comp(w: &mut World, ctx: &Context, e: &Computation, s: &TypeName) -> bool {
        let Some(body) = w.neg_body(s) else {
            return false;
        };
        match &e.kind {
            CompKind::Lam(x, b) => match &body {
                NegType::Arrow(t1, s2) => {
                    let ctx2 = ctx.extended(x.clone(), PosType::Name(name_of_pos(t1)));
                    decl_comp(w, &ctx2, b, &name_of_neg(s2))
                }
                _ => false,
            },
            CompKind::Record(fields) => match &body {
                NegType::Lazy(spec) => {
                    spec.iter().all(|(l, _)| fields.iter().any(|(fl, _)| fl == l))
                        && fields.iter().all(|(fl, fe)| {
                            spec.iter()
                                .find(|(l, _)| l == fl)
                                .map(|(_, sl)| decl_comp(w, ctx, fe, &name_of_neg(sl)))
                                .unwrap_or(false)
                        })
                }
                _ => false,
            },
            CompKind::Return(v) => match &body {
                NegType::Up(t) => decl_value(w, ctx, v, &name_of_pos(t)),
                _ => false,
            },
            CompKind::App(f, v) => {
                // search for a function type ending in exactly `s`
                let candidates: Vec<(TypeName, TypeName)> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Neg(NegType::Arrow(t1, s2)) if s2.as_name() == Some(s) => {
                            Some((d.name.clone(), name_of_pos(t1)))
                        }
                        _ => None,
                    })
                    .collect();
                candidates
                    .into_iter()
                    .any(|(n, t1)| decl_comp(w, ctx, f, &n) && decl_value(w, ctx, v, &t1))
            }
            CompKind::Proj(e1, j) => {
                let candidates: Vec<TypeName> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Neg(NegType::Lazy(fields)) => fields
                            .iter()
                            .any(|(l, sj)| l == j && sj.as_name() == Some(s))
                            .then(|| d.name.clone()),
                        _ => None,
                    })
                    .collect();
                candidates.into_iter().any(|n| decl_comp(w, ctx, e1, &n))
            }
            CompKind::Force(v) => {
                let candidates: Vec<TypeName> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Pos(PosType::Down(s2)) if s2.as_name() == Some(s) => {
                            Some(d.name.clone())
                        }
                        _ => None,
                    })
                    .collect();
                candidates.into_iter().any(|n| decl_value(w, ctx, v, &n))
            }
            CompKind::Def(f) => w
                .sig()
                .expr_def(f)
                .map(|d| d.dtype.as_name() == Some(s))
                .unwrap_or(false),
            CompKind::LetUp(x, e1, e2) => {
                let candidates: Vec<(TypeName, TypeName)> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Neg(NegType::Up(t)) => Some((d.name.clone(), name_of_pos(t))),
                        _ => None,
                    })
                    .collect();
                candidates.into_iter().any(|(n, t)| {
                    decl_comp(w, ctx, e1, &n) && {
                        let ctx2 = ctx.extended(x.clone(), PosType::Name(t));
                        decl_comp(w, &ctx2, e2, s)
                    }
                })
            }
            CompKind::SplitPair(v, x, y, b) => {
                let candidates: Vec<(TypeName, TypeName, TypeName)> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Pos(PosType::Tensor(t1, t2)) => {
                            Some((d.name.clone(), name_of_pos(t1), name_of_pos(t2)))
                        }
                        _ => None,
                    })
                    .collect();
                candidates.into_iter().any(|(n, t1, t2)| {
                    decl_value(w, ctx, v, &n) && {
                        let ctx2 = ctx
                            .extended(x.clone(), PosType::Name(t1))
                            .extended(y.clone(), PosType::Name(t2));
                        decl_comp(w, &ctx2, b, s)
                    }
                })
            }
            CompKind::SplitUnit(v, b) => {
                let candidates: Vec<TypeName> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Pos(PosType::Unit) => Some(d.name.clone()),
                        _ => None,
                    })
                    .collect();
                candidates
                    .into_iter()
                    .any(|n| decl_value(w, ctx, v, &n) && decl_comp(w, ctx, b, s))
            }
            CompKind::Match(v, branches) => {
                let candidates: Vec<(TypeName, Vec<(Label, TypeName)>)> = w
                    .sig()
                    .type_defs
                    .iter()
                    .filter_map(|d| match &d.body {
                        TypeDef::Pos(PosType::Variant(fields)) => {
                            let labels: Vec<(Label, TypeName)> = fields
                                .iter()
                                .map(|(l, t)| (l.clone(), name_of_pos(t)))
                                .collect();
                            Some((d.name.clone(), labels))
                        }
                        _ => None,
                    })
                    .collect();
                candidates.into_iter().any(|(n, fields)| {
                    fields.len() == branches.len()
                        && fields
                            .iter()
                            .all(|(l, _)| branches.iter().any(|(bl, _, _)| bl == l))
                        && decl_value(w, ctx, v, &n)
                        && branches.iter().all(|(bl, x, b)| {
                            fields
                                .iter()
                                .find(|(l, _)| l == bl)
                                .map(|(_, tl)| {
                                    let ctx2 =
                                        ctx.extended(x.clone(), PosType::Name(tl.clone()));
                                    decl_comp(w, &ctx2, b, s)
                                })
                                .unwrap_or(false)
                        })
                })
            }
            // annotations are not part of the declarative source language
            CompKind::Anno(..) => false,
            CompKind::FoldNu(_) | CompKind::Unfold(_) | CompKind::CaseFold(..) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_signature;

    const CORPUS: &str = "\
type bin = +{e : 1, b0 : bin, b1 : bin}
type std = +{e : 1, b0 : pos, b1 : std}
type pos = +{b0 : pos, b1 : std}
def six : up pos = return 'b0 'b1 'b1 'e ()
def inc : std -> up pos = \\x. match x { 'e u => return 'b1 'e u | 'b0 x' => return 'b1 x' | 'b1 x' => let y' = inc x' in return 'b0 y' }
def dec : pos -> up std = \\x. match x { 'b0 x' => let y' = dec x' in return 'b1 y' | 'b1 x' => match x' { 'e u => return 'e u | 'b0 x'' => return 'b0 'b0 x'' | 'b1 x'' => return 'b0 'b1 x'' } }
";

    fn world(text: &str) -> World {
        World::load(&parse_signature(text).unwrap()).unwrap()
    }

    #[test]
    fn corpus_checks() {
        let mut w = world(CORPUS);
        let errors = check_signature(&mut w);
        assert!(errors.is_empty(), "{:?}", errors);
    }

    #[test]
    fn six_checks_against_pos() {
        let mut w = world(CORPUS);
        let v = crate::parser::parse_value("'b0 'b1 'b1 'e ()").unwrap();
        assert!(check_value(&mut w, &Context::new(), &v, &TypeName::new("pos")).is_ok());
        // () checks against 1
        let one = w.intern_pos(&PosType::Unit);
        assert!(check_value(&mut w, &Context::new(), &Value::unit(), &one).is_ok());
    }

    #[test]
    fn subsumption_at_variables() {
        let mut w = world(CORPUS);
        let ctx = Context::new().extended("x", PosType::Name(TypeName::new("pos")));
        // x : pos checks against std since pos <= std
        assert!(check_value(&mut w, &ctx, &Value::var("x"), &TypeName::new("std")).is_ok());
        // but a std variable does not check against pos
        let ctx2 = Context::new().extended("x", PosType::Name(TypeName::new("std")));
        let e = check_value(&mut w, &ctx2, &Value::var("x"), &TypeName::new("pos")).unwrap_err();
        assert_eq!(e.expected.as_deref(), Some("pos"));
        assert_eq!(e.found.as_deref(), Some("std"));
    }

    #[test]
    fn intro_forms_do_not_synthesize() {
        let mut w = world(CORPUS);
        let v = Value::pair(Value::unit(), Value::unit());
        let e = synth_value(&mut w, &Context::new(), &v).unwrap_err();
        assert_eq!(e.mode, Direction::Synth);
        // annotation recovers synthesis
        let v = crate::parser::parse_value("(() : 1)").unwrap();
        let got = synth_value(&mut w, &Context::new(), &v).unwrap();
        assert_eq!(w.pos_body(&got), Some(PosType::Unit));
    }

    #[test]
    fn dec0_is_rejected_with_one_precise_error() {
        let text = format!(
            "{}def dec0 : pos -> up std = \\x. match x {{ 'b0 x' => let y' = dec0 x' in return 'b1 y' | 'b1 x' => return 'b0 x' }}\n",
            CORPUS
        );
        let mut w = world(&text);
        let errors = check_signature(&mut w);
        assert_eq!(errors.len(), 1, "{:?}", errors);
        let (name, e) = &errors[0];
        assert_eq!(name.0, "dec0");
        assert_eq!(e.expected.as_deref(), Some("pos"));
        assert_eq!(e.found.as_deref(), Some("std"));
        // the error lies inside the `'b0 x'` injection of the 'b1 branch
        let line = text.lines().last().unwrap();
        let inj_col = (line.find("return 'b0 x'").unwrap() + "return ".len() + 1) as u32;
        let inj_end = inj_col + "'b0 x'".len() as u32;
        let def_line = text.lines().count() as u32;
        assert_eq!(e.span.start_line, def_line);
        assert!(
            e.span.start_col >= inj_col && e.span.end_col <= inj_end,
            "span {:?} not within injection columns {}..{}",
            e.span,
            inj_col,
            inj_end
        );
    }

    #[test]
    fn missing_branch_for_absent_label_is_ok() {
        // pos has no 'e branch, so inc-like matches may omit it
        let mut w = world(CORPUS);
        let e = crate::parser::parse_computation(
            "\\x. match x { 'b0 x' => return 'b1 x' | 'b1 x' => return 'b0 'b1 x' }",
        )
        .unwrap();
        let ty = w.intern_neg(&crate::parser::parse_neg_type("pos -> up std").unwrap());
        assert!(check_comp(&mut w, &Context::new(), &e, &ty).is_ok());
        // omitting a branch the type does have is an error
        let e = crate::parser::parse_computation("\\x. match x { 'b0 x' => return 'b1 x' }")
            .unwrap();
        let res = check_comp(&mut w, &Context::new(), &e, &ty);
        assert!(res.unwrap_err().message.contains("missing a branch"));
    }

    #[test]
    fn omega_checks() {
        let mut w = world(
            "type U = (down U) -> U\n\
             def omega : (down U) -> U = \\x. (force x) x\n\
             def Omega : U = omega (thunk omega)\n\
             def f : U = f",
        );
        let errors = check_signature(&mut w);
        assert!(errors.is_empty(), "{:?}", errors);
        // omega also has type U itself
        let e = Computation::def("omega");
        assert!(check_comp(&mut w, &Context::new(), &e, &TypeName::new("U")).is_ok());
    }

    #[test]
    fn streams_check() {
        let mut w = world(
            "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
             type std = +{e : 1, b0 : pos, b1 : std}\n\
             type pos = +{b0 : pos, b1 : std}\n\
             type pstream = up (std * padding)\n\
             type padding = +{none : padding, some : down pstream}\n\
             type zstream = up (std * +{some : down zstream})\n\
             def compress : (down pstream) -> zstream = \\s. let np = force s in split np as (n, p) in return (n, 'some thunk (omit p))\n\
             def omit : padding -> zstream = \\p. match p { 'none p' => omit p' | 'some s => compress s }",
        );
        let errors = check_signature(&mut w);
        assert!(errors.is_empty(), "{:?}", errors);
    }

    #[test]
    fn empty_signature_checks() {
        let mut w = world("");
        assert!(check_signature(&mut w).is_empty());
    }

    #[test]
    fn declarative_reference_accepts_corpus() {
        let mut w = world(CORPUS);
        let defs: Vec<(ExprName, TypeName)> = w
            .sig()
            .expr_defs
            .iter()
            .map(|d| (d.name.clone(), d.dtype.as_name().cloned().unwrap()))
            .collect();
        for (name, dtype) in defs {
            let body = erase_comp(&w.sig().expr_def(&name).unwrap().body.clone());
            assert!(
                reference::decl_comp(&mut w, &Context::new(), &body, &dtype),
                "declarative checker rejects {}",
                name
            );
        }
    }

    #[test]
    fn declarative_reference_rejects_dec0_body() {
        let text = format!(
            "{}def dec0 : pos -> up std = \\x. match x {{ 'b0 x' => let y' = dec0 x' in return 'b1 y' | 'b1 x' => return 'b0 x' }}\n",
            CORPUS
        );
        let mut w = world(&text);
        let body = erase_comp(&w.sig().expr_def(&ExprName::new("dec0")).unwrap().body.clone());
        let dtype = w
            .sig()
            .expr_def(&ExprName::new("dec0"))
            .unwrap()
            .dtype
            .as_name()
            .cloned()
            .unwrap();
        assert!(!reference::decl_comp(&mut w, &Context::new(), &body, &dtype));
    }
}
