//! Abstract syntax: polarized types, values, computations, and signatures.

use std::collections::HashMap;
use std::fmt;

/// Field / branch label for variant and lazy records.
pub type Label = String;

/// A type name defined in a signature. Positive and negative names share one
/// namespace; the polarity is recorded at the definition site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeName(pub String);

impl TypeName {
    pub fn new(s: impl Into<String>) -> Self {
        TypeName(s.into())
    }

    /// Names introduced by normalization or other internal passes start with `%`.
    pub fn is_internal(&self) -> bool {
        self.0.starts_with('%')
    }
}

impl fmt::Display for TypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An expression (definition) name. Distinct namespace from variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprName(pub String);

impl ExprName {
    pub fn new(s: impl Into<String>) -> Self {
        ExprName(s.into())
    }
}

impl fmt::Display for ExprName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Term variable. Variables always stand for values.
pub type Var = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Polarity {
    Pos,
    Neg,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Pos => write!(f, "positive"),
            Polarity::Neg => write!(f, "negative"),
        }
    }
}

/// Positive types classify observable values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PosType {
    Tensor(Box<PosType>, Box<PosType>),
    Unit,
    Variant(Vec<(Label, PosType)>),
    Down(Box<NegType>),
    Name(TypeName),
}

/// Negative types classify computations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NegType {
    Arrow(Box<PosType>, Box<NegType>),
    Lazy(Vec<(Label, NegType)>),
    Up(Box<PosType>),
    Name(TypeName),
}

impl PosType {
    pub fn is_name(&self) -> bool {
        matches!(self, PosType::Name(_))
    }

    pub fn as_name(&self) -> Option<&TypeName> {
        match self {
            PosType::Name(n) => Some(n),
            _ => None,
        }
    }
}

impl NegType {
    pub fn is_name(&self) -> bool {
        matches!(self, NegType::Name(_))
    }

    pub fn as_name(&self) -> Option<&TypeName> {
        match self {
            NegType::Name(n) => Some(n),
            _ => None,
        }
    }
}

/// Source location, 1-based lines and columns. Line 0 marks synthetic nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn synth() -> Span {
        Span::default()
    }

    pub fn is_synth(&self) -> bool {
        self.start_line == 0
    }

    pub fn join(self, other: Span) -> Span {
        if self.is_synth() {
            return other;
        }
        if other.is_synth() {
            return self;
        }
        Span {
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }

    /// True if `self` lies within `outer` (inclusive bounds).
    pub fn within(&self, outer: &Span) -> bool {
        let starts_after = (self.start_line, self.start_col) >= (outer.start_line, outer.start_col);
        let ends_before = (self.end_line, self.end_col) <= (outer.end_line, outer.end_col);
        starts_after && ends_before
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

/// A value with its source span. Equality and hashing ignore spans.
#[derive(Clone, Debug)]
pub struct Value {
    pub kind: ValueKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Var(Var),
    Pair(Box<Value>, Box<Value>),
    Unit,
    Inj(Label, Box<Value>),
    Thunk(Box<Computation>),
    /// Type annotation `(v : T)`; erased before evaluation.
    Anno(Box<Value>, PosType),
    /// Isorecursive `fold v`; only in iso front-end terms.
    FoldMu(Box<Value>),
}

impl Value {
    pub fn new(kind: ValueKind) -> Value {
        Value {
            kind,
            span: Span::synth(),
        }
    }

    pub fn with_span(kind: ValueKind, span: Span) -> Value {
        Value { kind, span }
    }

    pub fn unit() -> Value {
        Value::new(ValueKind::Unit)
    }

    pub fn var(x: impl Into<String>) -> Value {
        Value::new(ValueKind::Var(x.into()))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::new(ValueKind::Pair(Box::new(a), Box::new(b)))
    }

    pub fn inj(l: impl Into<String>, v: Value) -> Value {
        Value::new(ValueKind::Inj(l.into(), Box::new(v)))
    }

    pub fn thunk(e: Computation) -> Value {
        Value::new(ValueKind::Thunk(Box::new(e)))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Value {}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
    }
}

/// A computation with its source span. Equality and hashing ignore spans.
#[derive(Clone, Debug)]
pub struct Computation {
    pub kind: CompKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompKind {
    Lam(Var, Box<Computation>),
    App(Box<Computation>, Box<Value>),
    Record(Vec<(Label, Computation)>),
    Proj(Box<Computation>, Label),
    Return(Box<Value>),
    /// `let x = e1 in e2`, eliminating an up-shift.
    LetUp(Var, Box<Computation>, Box<Computation>),
    Def(ExprName),
    /// `split v as (x, y) in e`
    SplitPair(Box<Value>, Var, Var, Box<Computation>),
    /// `split v as () in e`
    SplitUnit(Box<Value>, Box<Computation>),
    Match(Box<Value>, Vec<(Label, Var, Computation)>),
    Force(Box<Value>),
    /// Type annotation `(e : S)`; erased before evaluation.
    Anno(Box<Computation>, NegType),
    /// Isorecursive forms; only in iso front-end terms.
    FoldNu(Box<Computation>),
    Unfold(Box<Computation>),
    /// `match v { fold x => e }`
    CaseFold(Var, Box<Value>, Box<Computation>),
}

impl Computation {
    pub fn new(kind: CompKind) -> Computation {
        Computation {
            kind,
            span: Span::synth(),
        }
    }

    pub fn with_span(kind: CompKind, span: Span) -> Computation {
        Computation { kind, span }
    }

    pub fn ret(v: Value) -> Computation {
        Computation::new(CompKind::Return(Box::new(v)))
    }

    pub fn lam(x: impl Into<String>, e: Computation) -> Computation {
        Computation::new(CompKind::Lam(x.into(), Box::new(e)))
    }

    pub fn app(e: Computation, v: Value) -> Computation {
        Computation::new(CompKind::App(Box::new(e), Box::new(v)))
    }

    pub fn force(v: Value) -> Computation {
        Computation::new(CompKind::Force(Box::new(v)))
    }

    pub fn def(f: impl Into<String>) -> Computation {
        Computation::new(CompKind::Def(ExprName::new(f)))
    }

    pub fn proj(e: Computation, l: impl Into<String>) -> Computation {
        Computation::new(CompKind::Proj(Box::new(e), l.into()))
    }
}

impl PartialEq for Computation {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Computation {}

impl std::hash::Hash for Computation {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
    }
}

/// Body of a type definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDef {
    Pos(PosType),
    Neg(NegType),
}

impl TypeDef {
    pub fn polarity(&self) -> Polarity {
        match self {
            TypeDef::Pos(_) => Polarity::Pos,
            TypeDef::Neg(_) => Polarity::Neg,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TypeDefEntry {
    pub name: TypeName,
    pub body: TypeDef,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub struct ExprDefEntry {
    pub name: ExprName,
    pub dtype: NegType,
    pub body: Computation,
    pub span: Span,
}

/// A global signature: ordered type definitions and expression definitions.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub type_defs: Vec<TypeDefEntry>,
    pub expr_defs: Vec<ExprDefEntry>,
    type_index: HashMap<TypeName, usize>,
    expr_index: HashMap<ExprName, usize>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn is_empty(&self) -> bool {
        self.type_defs.is_empty() && self.expr_defs.is_empty()
    }

    /// Appends a type definition. Later definitions of the same name shadow
    /// nothing; duplicates are reported by validation, the first wins here.
    pub fn push_type(&mut self, name: TypeName, body: TypeDef, span: Span) {
        let idx = self.type_defs.len();
        self.type_index.entry(name.clone()).or_insert(idx);
        self.type_defs.push(TypeDefEntry { name, body, span });
    }

    pub fn push_expr(&mut self, name: ExprName, dtype: NegType, body: Computation, span: Span) {
        let idx = self.expr_defs.len();
        self.expr_index.entry(name.clone()).or_insert(idx);
        self.expr_defs.push(ExprDefEntry {
            name,
            dtype,
            body,
            span,
        });
    }

    pub fn type_def(&self, name: &TypeName) -> Option<&TypeDef> {
        self.type_index.get(name).map(|&i| &self.type_defs[i].body)
    }

    pub fn pos_def(&self, name: &TypeName) -> Option<&PosType> {
        match self.type_def(name) {
            Some(TypeDef::Pos(t)) => Some(t),
            _ => None,
        }
    }

    pub fn neg_def(&self, name: &TypeName) -> Option<&NegType> {
        match self.type_def(name) {
            Some(TypeDef::Neg(t)) => Some(t),
            _ => None,
        }
    }

    pub fn polarity_of(&self, name: &TypeName) -> Option<Polarity> {
        self.type_def(name).map(|d| d.polarity())
    }

    pub fn expr_def(&self, name: &ExprName) -> Option<&ExprDefEntry> {
        self.expr_index.get(name).map(|&i| &self.expr_defs[i])
    }

    pub fn type_names(&self) -> impl Iterator<Item = &TypeName> {
        self.type_defs.iter().map(|d| &d.name)
    }

    pub fn pos_names(&self) -> Vec<TypeName> {
        self.type_defs
            .iter()
            .filter(|d| d.body.polarity() == Polarity::Pos)
            .map(|d| d.name.clone())
            .collect()
    }

    pub fn neg_names(&self) -> Vec<TypeName> {
        self.type_defs
            .iter()
            .filter(|d| d.body.polarity() == Polarity::Neg)
            .map(|d| d.name.clone())
            .collect()
    }
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.type_defs.len() == other.type_defs.len()
            && self.expr_defs.len() == other.expr_defs.len()
            && self
                .type_defs
                .iter()
                .zip(&other.type_defs)
                .all(|(a, b)| a.name == b.name && a.body == b.body)
            && self
                .expr_defs
                .iter()
                .zip(&other.expr_defs)
                .all(|(a, b)| a.name == b.name && a.dtype == b.dtype && a.body == b.body)
    }
}

impl Eq for Signature {}

/// Typing context: ordered list of variable bindings at positive types.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context(pub Vec<(Var, PosType)>);

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn lookup(&self, x: &str) -> Option<&PosType> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn extended(&self, x: impl Into<String>, t: PosType) -> Context {
        let mut ctx = self.clone();
        ctx.0.push((x.into(), t));
        ctx
    }
}

/// Capture-avoiding substitution of a closed value for a variable in a value.
///
/// The value being substituted is closed at runtime, so stopping at shadowing
/// binders is all that capture-avoidance requires.
pub fn subst_value(v: &Value, x: &str, target: &Value) -> Value {
    let kind = match &target.kind {
        ValueKind::Var(y) => {
            if y == x {
                return v.clone();
            }
            ValueKind::Var(y.clone())
        }
        ValueKind::Pair(a, b) => ValueKind::Pair(
            Box::new(subst_value(v, x, a)),
            Box::new(subst_value(v, x, b)),
        ),
        ValueKind::Unit => ValueKind::Unit,
        ValueKind::Inj(l, a) => ValueKind::Inj(l.clone(), Box::new(subst_value(v, x, a))),
        ValueKind::Thunk(e) => ValueKind::Thunk(Box::new(subst_comp(v, x, e))),
        ValueKind::Anno(a, t) => ValueKind::Anno(Box::new(subst_value(v, x, a)), t.clone()),
        ValueKind::FoldMu(a) => ValueKind::FoldMu(Box::new(subst_value(v, x, a))),
    };
    Value::with_span(kind, target.span)
}

/// Capture-avoiding substitution of a closed value for a variable in a computation.
pub fn subst_comp(v: &Value, x: &str, target: &Computation) -> Computation {
    let kind = match &target.kind {
        CompKind::Lam(y, e) => {
            if y == x {
                return target.clone();
            }
            CompKind::Lam(y.clone(), Box::new(subst_comp(v, x, e)))
        }
        CompKind::App(e, a) => CompKind::App(
            Box::new(subst_comp(v, x, e)),
            Box::new(subst_value(v, x, a)),
        ),
        CompKind::Record(fields) => CompKind::Record(
            fields
                .iter()
                .map(|(l, e)| (l.clone(), subst_comp(v, x, e)))
                .collect(),
        ),
        CompKind::Proj(e, l) => CompKind::Proj(Box::new(subst_comp(v, x, e)), l.clone()),
        CompKind::Return(a) => CompKind::Return(Box::new(subst_value(v, x, a))),
        CompKind::LetUp(y, e1, e2) => {
            let e1 = subst_comp(v, x, e1);
            let e2 = if y == x {
                e2.as_ref().clone()
            } else {
                subst_comp(v, x, e2)
            };
            CompKind::LetUp(y.clone(), Box::new(e1), Box::new(e2))
        }
        CompKind::Def(f) => CompKind::Def(f.clone()),
        CompKind::SplitPair(a, y, z, e) => {
            let a = subst_value(v, x, a);
            let e = if y == x || z == x {
                e.as_ref().clone()
            } else {
                subst_comp(v, x, e)
            };
            CompKind::SplitPair(Box::new(a), y.clone(), z.clone(), Box::new(e))
        }
        CompKind::SplitUnit(a, e) => CompKind::SplitUnit(
            Box::new(subst_value(v, x, a)),
            Box::new(subst_comp(v, x, e)),
        ),
        CompKind::Match(a, branches) => {
            let a = subst_value(v, x, a);
            let branches = branches
                .iter()
                .map(|(l, y, e)| {
                    let e = if y == x {
                        e.clone()
                    } else {
                        subst_comp(v, x, e)
                    };
                    (l.clone(), y.clone(), e)
                })
                .collect();
            CompKind::Match(Box::new(a), branches)
        }
        CompKind::Force(a) => CompKind::Force(Box::new(subst_value(v, x, a))),
        CompKind::Anno(e, t) => CompKind::Anno(Box::new(subst_comp(v, x, e)), t.clone()),
        CompKind::FoldNu(e) => CompKind::FoldNu(Box::new(subst_comp(v, x, e))),
        CompKind::Unfold(e) => CompKind::Unfold(Box::new(subst_comp(v, x, e))),
        CompKind::CaseFold(y, a, e) => {
            let a = subst_value(v, x, a);
            let e = if y == x {
                e.as_ref().clone()
            } else {
                subst_comp(v, x, e)
            };
            CompKind::CaseFold(y.clone(), Box::new(a), Box::new(e))
        }
    };
    Computation::with_span(kind, target.span)
}

/// Removes all type annotations from a value. Idempotent.
pub fn erase_value(v: &Value) -> Value {
    let kind = match &v.kind {
        ValueKind::Var(x) => ValueKind::Var(x.clone()),
        ValueKind::Pair(a, b) => {
            ValueKind::Pair(Box::new(erase_value(a)), Box::new(erase_value(b)))
        }
        ValueKind::Unit => ValueKind::Unit,
        ValueKind::Inj(l, a) => ValueKind::Inj(l.clone(), Box::new(erase_value(a))),
        ValueKind::Thunk(e) => ValueKind::Thunk(Box::new(erase_comp(e))),
        ValueKind::Anno(a, _) => return erase_value(a),
        ValueKind::FoldMu(a) => ValueKind::FoldMu(Box::new(erase_value(a))),
    };
    Value::with_span(kind, v.span)
}

/// Removes all type annotations from a computation. Idempotent.
pub fn erase_comp(e: &Computation) -> Computation {
    let kind = match &e.kind {
        CompKind::Lam(x, e1) => CompKind::Lam(x.clone(), Box::new(erase_comp(e1))),
        CompKind::App(e1, v) => {
            CompKind::App(Box::new(erase_comp(e1)), Box::new(erase_value(v)))
        }
        CompKind::Record(fields) => CompKind::Record(
            fields
                .iter()
                .map(|(l, e1)| (l.clone(), erase_comp(e1)))
                .collect(),
        ),
        CompKind::Proj(e1, l) => CompKind::Proj(Box::new(erase_comp(e1)), l.clone()),
        CompKind::Return(v) => CompKind::Return(Box::new(erase_value(v))),
        CompKind::LetUp(x, e1, e2) => CompKind::LetUp(
            x.clone(),
            Box::new(erase_comp(e1)),
            Box::new(erase_comp(e2)),
        ),
        CompKind::Def(f) => CompKind::Def(f.clone()),
        CompKind::SplitPair(v, x, y, e1) => CompKind::SplitPair(
            Box::new(erase_value(v)),
            x.clone(),
            y.clone(),
            Box::new(erase_comp(e1)),
        ),
        CompKind::SplitUnit(v, e1) => CompKind::SplitUnit(
            Box::new(erase_value(v)),
            Box::new(erase_comp(e1)),
        ),
        CompKind::Match(v, branches) => CompKind::Match(
            Box::new(erase_value(v)),
            branches
                .iter()
                .map(|(l, x, e1)| (l.clone(), x.clone(), erase_comp(e1)))
                .collect(),
        ),
        CompKind::Force(v) => CompKind::Force(Box::new(erase_value(v))),
        CompKind::Anno(e1, _) => return erase_comp(e1),
        CompKind::FoldNu(e1) => CompKind::FoldNu(Box::new(erase_comp(e1))),
        CompKind::Unfold(e1) => CompKind::Unfold(Box::new(erase_comp(e1))),
        CompKind::CaseFold(x, v, e1) => CompKind::CaseFold(
            x.clone(),
            Box::new(erase_value(v)),
            Box::new(erase_comp(e1)),
        ),
    };
    Computation::with_span(kind, e.span)
}

/// Erases annotations from every definition body in a signature.
pub fn erase_signature(sig: &Signature) -> Signature {
    let mut out = Signature::new();
    for d in &sig.type_defs {
        out.push_type(d.name.clone(), d.body.clone(), d.span);
    }
    for d in &sig.expr_defs {
        out.push_expr(d.name.clone(), d.dtype.clone(), erase_comp(&d.body), d.span);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subst_replaces_free_variable() {
        // [()/x] (return x) = return ()
        let target = Computation::ret(Value::var("x"));
        let got = subst_comp(&Value::unit(), "x", &target);
        assert_eq!(got, Computation::ret(Value::unit()));
    }

    #[test]
    fn subst_respects_shadowing() {
        // [v/x] (\x. return x) = \x. return x
        let body = Computation::lam("x", Computation::ret(Value::var("x")));
        let got = subst_comp(&Value::unit(), "x", &body);
        assert_eq!(got, body);
    }

    #[test]
    fn subst_inc_branch() {
        // [()/u] (return 'b1 'e u) = return 'b1 'e ()
        let target = Computation::ret(Value::inj("b1", Value::inj("e", Value::var("u"))));
        let got = subst_comp(&Value::unit(), "u", &target);
        assert_eq!(
            got,
            Computation::ret(Value::inj("b1", Value::inj("e", Value::unit())))
        );
    }

    #[test]
    fn erase_removes_annotations() {
        let v = Value::new(ValueKind::Anno(Box::new(Value::unit()), PosType::Unit));
        assert_eq!(erase_value(&v), Value::unit());
        // idempotent on annotation-free terms
        assert_eq!(erase_value(&Value::unit()), Value::unit());
        // nested annotations collapse in one pass
        let e = Computation::new(CompKind::Anno(
            Box::new(Computation::new(CompKind::Anno(
                Box::new(Computation::ret(Value::unit())),
                NegType::Up(Box::new(PosType::Unit)),
            ))),
            NegType::Up(Box::new(PosType::Unit)),
        ));
        assert_eq!(erase_comp(&e), Computation::ret(Value::unit()));
    }

    #[test]
    fn subst_commutes_with_erasure() {
        let v = Value::new(ValueKind::Anno(Box::new(Value::unit()), PosType::Unit));
        let target = Computation::ret(Value::new(ValueKind::Anno(
            Box::new(Value::pair(Value::var("x"), Value::var("x"))),
            PosType::Tensor(Box::new(PosType::Unit), Box::new(PosType::Unit)),
        )));
        let a = erase_comp(&subst_comp(&v, "x", &target));
        let b = subst_comp(&erase_value(&v), "x", &erase_comp(&target));
        assert_eq!(a, b);
    }

    #[test]
    fn equality_ignores_spans() {
        let a = Value::with_span(
            ValueKind::Unit,
            Span {
                start_line: 1,
                start_col: 1,
                end_line: 1,
                end_col: 3,
            },
        );
        assert_eq!(a, Value::unit());
    }
}
