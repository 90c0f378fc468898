//! Bounded step-indexed semantic typing, used as a testing oracle: value
//! typing, computation typing, terminal typing, substitution typing, and
//! value enumeration.
//!
//! The relation itself is not decidable; verdicts carry an `exact` flag that
//! is set only when no approximation (thunk-pool sampling or an enumeration
//! cutoff in a universally quantified position) influenced the outcome.

use crate::dynamics::{step, EvalMode, StepResult};
use crate::inhabit::{enumerate_with_pool, loop_def_name};
use crate::pipeline::World;
use crate::syntax::*;
use std::collections::{HashMap, HashSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Refuted,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub exact: bool,
}

impl Verdict {
    pub fn holds(exact: bool) -> Verdict {
        Verdict {
            outcome: Outcome::Holds,
            exact,
        }
    }

    pub fn refuted(exact: bool) -> Verdict {
        Verdict {
            outcome: Outcome::Refuted,
            exact,
        }
    }

    pub fn is_holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    pub fn is_refuted(&self) -> bool {
        self.outcome == Outcome::Refuted
    }

    /// Conjunction: refutations short-circuit, exactness accumulates.
    fn and(self, other: impl FnOnce() -> Verdict) -> Verdict {
        match self.outcome {
            Outcome::Refuted => self,
            Outcome::Unknown => self,
            Outcome::Holds => {
                let o = other();
                Verdict {
                    outcome: o.outcome,
                    exact: self.exact && o.exact,
                }
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome = match self.outcome {
            Outcome::Holds => "holds",
            Outcome::Refuted => "refuted",
            Outcome::Unknown => "unknown",
        };
        let precision = if self.exact { "exact" } else { "approx" };
        write!(f, "{} ({})", outcome, precision)
    }
}

/// Quantification strategy for the terminal arrow clause.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArrowMode {
    /// Every index below the current one, as the defining clause states.
    Literal,
    /// Only the top index; equivalent under downward closure.
    Shortcut,
}

/// Simultaneous substitution of closed values for variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Substitution(pub Vec<(Var, Value)>);

pub struct Oracle<'w> {
    pub world: &'w mut World,
    pub depth: u32,
    pub arrow_mode: ArrowMode,
    runtime: Signature,
    memo: HashMap<(Computation, TypeName, u64), Verdict>,
}

impl<'w> Oracle<'w> {
    pub fn new(world: &'w mut World, depth: u32, arrow_mode: ArrowMode) -> Oracle<'w> {
        let runtime = world.runtime_sig();
        Oracle {
            world,
            depth,
            arrow_mode,
            runtime,
            memo: HashMap::new(),
        }
    }

    /// Closed values of `t` up to the oracle's depth. The boolean is true iff
    /// the enumeration is exact, that is, no thunk pool was consulted.
    pub fn enumerate_values(&mut self, t: &PosType, depth: u32) -> (Vec<Value>, bool) {
        let name = self.world.intern_pos(t);
        let pool_used = std::cell::Cell::new(false);
        let defs: Vec<(ExprName, TypeName)> = self
            .world
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
        // pool per negative name: the diverging loop plus every definition
        // whose declared type is a subtype
        let mut pools: HashMap<TypeName, Vec<Value>> = HashMap::new();
        for s in self.world.sig().neg_names() {
            let mut pool = vec![Value::thunk(Computation::new(CompKind::Def(
                loop_def_name(&s),
            )))];
            let mut seen: HashSet<ExprName> = HashSet::new();
            seen.insert(loop_def_name(&s));
            for (f, dtype) in &defs {
                if seen.contains(f) {
                    continue;
                }
                if self.world.sub_names(dtype, &s) == Ok(true) {
                    seen.insert(f.clone());
                    pool.push(Value::thunk(Computation::new(CompKind::Def(f.clone()))));
                }
            }
            pools.insert(s, pool);
        }
        let pool_fn = |s: &TypeName| -> Vec<Value> {
            pool_used.set(true);
            pools.get(s).cloned().unwrap_or_default()
        };
        let values = enumerate_with_pool(
            &PosType::Name(name),
            self.world.sig(),
            depth,
            &pool_fn,
        );
        (values, !pool_used.get())
    }

    /// True when `enumerate_values(t, depth)` returns every value of `t`:
    /// the type is empty, or purely positive with a finite value language
    /// that fits within `depth`.
    pub fn enumeration_complete(&mut self, t: &TypeName, depth: u32) -> bool {
        if self.world.is_empty(t) {
            return true;
        }
        if !self.purely_positive(t) {
            return false;
        }
        match self.max_value_depth(t, &mut Vec::new(), &mut HashMap::new()) {
            Some(d) => d <= depth,
            None => false,
        }
    }

    fn purely_positive(&self, t: &TypeName) -> bool {
        let mut seen = HashSet::new();
        let mut stack = vec![t.clone()];
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            match self.world.sig().pos_def(&n) {
                Some(PosType::Unit) => {}
                Some(PosType::Down(_)) => return false,
                Some(PosType::Tensor(a, b)) => {
                    stack.push(a.as_name().unwrap().clone());
                    stack.push(b.as_name().unwrap().clone());
                }
                Some(PosType::Variant(fields)) => {
                    for (_, ty) in fields {
                        stack.push(ty.as_name().unwrap().clone());
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Maximum constructor depth of any value of nonempty, purely positive
    /// `t`; `None` when the value language is infinite.
    fn max_value_depth(
        &self,
        t: &TypeName,
        path: &mut Vec<TypeName>,
        memo: &mut HashMap<TypeName, Option<u32>>,
    ) -> Option<u32> {
        if let Some(d) = memo.get(t) {
            return *d;
        }
        if path.contains(t) {
            return None; // a cycle through inhabited names: unbounded values
        }
        path.push(t.clone());
        let result = match self.world.sig().pos_def(t) {
            Some(PosType::Unit) => Some(0),
            Some(PosType::Tensor(a, b)) => {
                let a = a.as_name().unwrap().clone();
                let b = b.as_name().unwrap().clone();
                match (
                    self.max_value_depth(&a, path, memo),
                    self.max_value_depth(&b, path, memo),
                ) {
                    (Some(da), Some(db)) => Some(1 + da.max(db)),
                    _ => None,
                }
            }
            Some(PosType::Variant(fields)) => {
                let mut worst = 0u32;
                let mut unbounded = false;
                for (_, ty) in fields {
                    let n = ty.as_name().unwrap().clone();
                    if self.world.is_empty(&n) {
                        continue;
                    }
                    match self.max_value_depth(&n, path, memo) {
                        Some(d) => worst = worst.max(1 + d),
                        None => unbounded = true,
                    }
                }
                if unbounded {
                    None
                } else {
                    Some(worst)
                }
            }
            _ => None,
        };
        path.pop();
        memo.insert(t.clone(), result);
        result
    }

    // -- the semantic typing clauses ---------------------------------------

    /// Value typing at step index `k`.
    pub fn sem_value(&mut self, v: &Value, t: &PosType, k: u64) -> Verdict {
        let name = match t {
            PosType::Name(n) => n.clone(),
            _ => self.world.intern_pos(t),
        };
        self.sem_value_name(v, &name, k)
    }

    fn sem_value_name(&mut self, v: &Value, t: &TypeName, k: u64) -> Verdict {
        let Some(body) = self.world.pos_body(t) else {
            return Verdict::refuted(true);
        };
        match (&v.kind, &body) {
            (ValueKind::Anno(inner, _), _) => {
                let inner = inner.as_ref().clone();
                self.sem_value_name(&inner, t, k)
            }
            (ValueKind::Unit, PosType::Unit) => Verdict::holds(true),
            (ValueKind::Pair(a, b), PosType::Tensor(t1, t2)) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                let t1 = t1.as_name().unwrap().clone();
                let t2 = t2.as_name().unwrap().clone();
                self.sem_value_name(&a, &t1, k)
                    .and(|| self.sem_value_name(&b, &t2, k))
            }
            (ValueKind::Inj(j, vj), PosType::Variant(fields)) => {
                match fields.iter().find(|(l, _)| l == j) {
                    Some((_, tj)) => {
                        let tj = tj.as_name().unwrap().clone();
                        let vj = vj.as_ref().clone();
                        self.sem_value_name(&vj, &tj, k)
                    }
                    None => Verdict::refuted(true),
                }
            }
            (ValueKind::Thunk(e), PosType::Down(s)) => {
                let s = s.as_name().unwrap().clone();
                let e = e.as_ref().clone();
                self.sem_comp_name(&e, &s, k)
            }
            _ => Verdict::refuted(true),
        }
    }

    /// Computation typing at step index `k`. At zero the relation holds; at
    /// `k+1` the computation must step into the relation at `k` or be a
    /// terminal that satisfies the terminal clauses.
    pub fn sem_comp(&mut self, e: &Computation, s: &NegType, k: u64) -> Verdict {
        let name = match s {
            NegType::Name(n) => n.clone(),
            _ => self.world.intern_neg(s),
        };
        self.sem_comp_name(e, &name, k)
    }

    fn sem_comp_name(&mut self, e: &Computation, s: &TypeName, k: u64) -> Verdict {
        if k == 0 {
            return Verdict::holds(true);
        }
        let key = (e.clone(), s.clone(), k);
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        let verdict = match step(e, &self.runtime, EvalMode::Core) {
            StepResult::Stepped(e2) => self.sem_comp_name(&e2, s, k - 1),
            StepResult::Terminal => self.sem_terminal_name(e, s, k),
            StepResult::Stuck(_) => Verdict::refuted(true),
        };
        self.memo.insert(key, verdict);
        verdict
    }

    /// Terminal typing at index `k >= 1`. There is no shape requirement for
    /// function and record types: a wrong shape surfaces as a stuck
    /// elimination. The up-shift clause demands a returned value.
    pub fn sem_terminal(&mut self, e: &Computation, s: &NegType, k: u64) -> Verdict {
        let name = match s {
            NegType::Name(n) => n.clone(),
            _ => self.world.intern_neg(s),
        };
        self.sem_terminal_name(e, &name, k)
    }

    fn sem_terminal_name(&mut self, e: &Computation, s: &TypeName, k: u64) -> Verdict {
        debug_assert!(k >= 1);
        let Some(body) = self.world.neg_body(s) else {
            return Verdict::refuted(true);
        };
        match &body {
            NegType::Up(t) => match &e.kind {
                CompKind::Return(v) => {
                    let t = t.as_name().unwrap().clone();
                    let v = v.as_ref().clone();
                    self.sem_value_name(&v, &t, k - 1)
                }
                _ => Verdict::refuted(true),
            },
            NegType::Lazy(fields) => {
                let mut acc = Verdict::holds(true);
                for (j, sj) in fields {
                    let sj = sj.as_name().unwrap().clone();
                    let proj = Computation::proj(e.clone(), j.clone());
                    acc = acc.and(|| self.sem_comp_name(&proj, &sj, k));
                    if acc.is_refuted() {
                        break;
                    }
                }
                acc
            }
            NegType::Arrow(t1, s2) => {
                let t1 = t1.as_name().unwrap().clone();
                let s2 = s2.as_name().unwrap().clone();
                let (values, _pool_free) =
                    self.enumerate_values(&PosType::Name(t1.clone()), self.depth);
                let complete = self.enumeration_complete(&t1, self.depth);
                let mut exact = complete;
                let indices: Vec<u64> = match self.arrow_mode {
                    ArrowMode::Literal => (0..k).collect(),
                    ArrowMode::Shortcut => vec![k - 1],
                };
                for i in indices {
                    for v in &values {
                        let membership = self.sem_value_name(v, &t1, i);
                        match membership.outcome {
                            Outcome::Holds => {
                                let app = Computation::app(e.clone(), v.clone());
                                let r = self.sem_comp_name(&app, &s2, i + 1);
                                if r.is_refuted() {
                                    return Verdict::refuted(membership.exact && r.exact);
                                }
                                exact = exact && r.exact && membership.exact;
                            }
                            Outcome::Refuted => {
                                // a value we could not certify as a member was
                                // skipped; the verdict is approximate unless
                                // the refutation was exact
                                if !membership.exact {
                                    exact = false;
                                }
                            }
                            Outcome::Unknown => exact = false,
                        }
                    }
                }
                Verdict::holds(exact)
            }
            NegType::Name(_) => unreachable!("normalized body"),
        }
    }

    /// Pointwise substitution typing.
    pub fn sem_subst(&mut self, theta: &Substitution, ctx: &Context, k: u64) -> Verdict {
        if theta.0.len() != ctx.0.len() {
            return Verdict::refuted(true);
        }
        let mut acc = Verdict::holds(true);
        for (x, t) in &ctx.0 {
            let Some((_, v)) = theta.0.iter().find(|(y, _)| y == x) else {
                return Verdict::refuted(true);
            };
            let v = v.clone();
            let t = t.clone();
            acc = acc.and(|| self.sem_value(&v, &t, k));
            if acc.is_refuted() {
                break;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_computation, parse_neg_type, parse_signature, parse_value};

    const SIG: &str = "\
type bin = +{e : 1, b0 : bin, b1 : bin}
type std = +{e : 1, b0 : pos, b1 : std}
type pos = +{b0 : pos, b1 : std}
type t0 = 1 * t0
type U = (down U) -> U
type s0 = 1 -> s0
def omega : (down U) -> U = \\x. (force x) x
def Omega : U = omega (thunk omega)
def e0 : s0 = \\x. e0
def id1 : 1 -> up 1 = \\x. return x
";

    fn oracle_world() -> World {
        World::load(&parse_signature(SIG).unwrap()).unwrap()
    }

    #[test]
    fn unit_value_holds() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        for k in [0, 1, 5, 20] {
            let v = o.sem_value(&Value::unit(), &PosType::Unit, k);
            assert_eq!(v, Verdict::holds(true));
        }
    }

    #[test]
    fn six_value_holds_at_pos() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let v = parse_value("'b0 'b1 'b1 'e ()").unwrap();
        let verdict = o.sem_value(&v, &PosType::Name(TypeName::new("pos")), 10);
        assert_eq!(verdict, Verdict::holds(true));
    }

    #[test]
    fn nothing_inhabits_t0() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let t0 = PosType::Name(TypeName::new("t0"));
        assert_eq!(o.sem_value(&Value::unit(), &t0, 7), Verdict::refuted(true));
        let v = parse_value("((), ())").unwrap();
        assert_eq!(o.sem_value(&v, &t0, 7), Verdict::refuted(true));
        let (vals, _) = o.enumerate_values(&t0, 10);
        assert!(vals.is_empty());
    }

    #[test]
    fn everything_holds_at_index_zero() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let e = parse_computation("(return ()).hd").unwrap(); // stuck
        assert_eq!(
            o.sem_comp(&e, &parse_neg_type("up 1").unwrap(), 0),
            Verdict::holds(true)
        );
        // but refuted at any positive index
        assert!(o.sem_comp(&e, &parse_neg_type("up 1").unwrap(), 1).is_refuted());
    }

    #[test]
    fn omega_holds_at_every_type() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let omega = Computation::def("Omega");
        for sigma in ["U", "up 1", "1 -> up 1"] {
            let s = parse_neg_type(sigma).unwrap();
            for k in [0, 1, 3, 10, 25] {
                let v = o.sem_comp(&omega, &s, k);
                assert_eq!(v, Verdict::holds(true), "Omega at {} k={}", sigma, k);
            }
        }
    }

    #[test]
    fn identity_holds_at_arrow_type() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let id = parse_computation("\\x. return x").unwrap();
        let s = parse_neg_type("1 -> up 1").unwrap();
        let v = o.sem_comp(&id, &s, 10);
        assert_eq!(v, Verdict::holds(true));
    }

    #[test]
    fn right_recursion_holds() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let e0 = Computation::def("e0");
        let s0 = NegType::Name(TypeName::new("s0"));
        for k in [1, 5, 15] {
            assert_eq!(o.sem_comp(&e0, &s0, k), Verdict::holds(true), "k={}", k);
        }
    }

    #[test]
    fn terminal_clauses() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let ret = Computation::ret(Value::unit());
        assert_eq!(
            o.sem_terminal(&ret, &parse_neg_type("up 1").unwrap(), 3),
            Verdict::holds(true)
        );
        // the empty lazy record type contains every terminal computation
        let lam = parse_computation("\\x. return x").unwrap();
        assert_eq!(
            o.sem_terminal(&lam, &parse_neg_type("&{}").unwrap(), 3),
            Verdict::holds(true)
        );
        let empty_rec = parse_computation("{}").unwrap();
        assert_eq!(
            o.sem_terminal(&empty_rec, &parse_neg_type("&{}").unwrap(), 3),
            Verdict::holds(true)
        );
        // shape mismatch: a lambda projected at a nonempty record type
        assert!(o
            .sem_terminal(&lam, &parse_neg_type("&{l : up 1}").unwrap(), 3)
            .is_refuted());
        // a return against a function type is refuted when arguments exist
        assert!(o
            .sem_terminal(&ret, &parse_neg_type("1 -> up 1").unwrap(), 3)
            .is_refuted());
    }

    #[test]
    fn empty_argument_arrows_are_vacuous() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        // any terminal of any shape holds at t0 -> sigma, exactly
        let rec = parse_computation("{}").unwrap();
        for sigma in ["up 1", "&{l : up 1}", "1 -> up 1"] {
            let s = parse_neg_type(&format!("t0 -> ({})", sigma)).unwrap();
            let v = o.sem_comp(&rec, &s, 15);
            assert_eq!(v, Verdict::holds(true), "at t0 -> {}", sigma);
        }
    }

    #[test]
    fn substitution_typing() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        assert_eq!(
            o.sem_subst(&Substitution::default(), &Context::new(), 9),
            Verdict::holds(true)
        );
        let theta = Substitution(vec![("x".into(), parse_value("'e ()").unwrap())]);
        let ctx = Context::new().extended("x", PosType::Name(TypeName::new("std")));
        assert_eq!(o.sem_subst(&theta, &ctx, 5), Verdict::holds(true));
        let theta = Substitution(vec![("x".into(), Value::unit())]);
        let ctx = Context::new().extended("x", PosType::Name(TypeName::new("t0")));
        assert!(o.sem_subst(&theta, &ctx, 5).is_refuted());
    }

    #[test]
    fn literal_and_shortcut_modes_agree() {
        let cases = [
            ("\\x. return x", "1 -> up 1", 8),
            ("e0", "s0", 12),
            ("Omega", "U", 12),
            ("{}", "t0 -> up 1", 6),
            ("return ()", "up 1", 4),
        ];
        for (term, ty, k) in cases {
            let e = parse_computation(term).unwrap();
            let s = parse_neg_type(ty).unwrap();
            let a = {
                let mut w = oracle_world();
                Oracle::new(&mut w, 4, ArrowMode::Literal).sem_comp(&e, &s, k)
            };
            let b = {
                let mut w = oracle_world();
                Oracle::new(&mut w, 4, ArrowMode::Shortcut).sem_comp(&e, &s, k)
            };
            assert_eq!(a.outcome, b.outcome, "{} : {}", term, ty);
        }
    }

    #[test]
    fn downward_closure_on_samples() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let samples = [
            ("\\x. return x", "1 -> up 1"),
            ("e0", "s0"),
            ("Omega", "U"),
            ("return 'e ()", "up std"),
        ];
        for (term, ty) in samples {
            let e = parse_computation(term).unwrap();
            let s = parse_neg_type(ty).unwrap();
            let at_20 = o.sem_comp(&e, &s, 20);
            if at_20.is_holds() && at_20.exact {
                for i in 0..=20 {
                    assert!(
                        o.sem_comp(&e, &s, i).is_holds(),
                        "downward closure fails for {} at {}",
                        term,
                        i
                    );
                }
            }
        }
    }

    #[test]
    fn closure_under_expansion_along_a_trace() {
        let mut w = oracle_world();
        let sig = w.runtime_sig();
        let body = parse_computation("omega (thunk omega)").unwrap();
        let (_, trace) =
            crate::dynamics::evaluate_traced(&body, &sig, 12, EvalMode::Core);
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let u = NegType::Name(TypeName::new("U"));
        for window in trace.windows(2) {
            for k in [1, 4, 9] {
                if o.sem_comp(&window[1], &u, k).is_holds() {
                    assert!(o.sem_comp(&window[0], &u, k + 1).is_holds());
                }
            }
        }
    }

    #[test]
    fn enumeration_exactness_flags() {
        let mut w = oracle_world();
        let mut o = Oracle::new(&mut w, 4, ArrowMode::Literal);
        let (vals, exact) = o.enumerate_values(&PosType::Unit, 2);
        assert_eq!(vals, vec![Value::unit()]);
        assert!(exact);
        // std contains a thunk-free infinity of values: exact enumeration,
        // incomplete coverage
        let std_t = PosType::Name(TypeName::new("std"));
        let (vals, exact) = o.enumerate_values(&std_t, 3);
        assert_eq!(vals.len(), 4);
        assert!(exact);
        assert!(!o.enumeration_complete(&TypeName::new("std"), 3));
        let one = o.world.intern_pos(&PosType::Unit);
        assert!(o.enumeration_complete(&one, 1));
        assert!(o.enumeration_complete(&TypeName::new("t0"), 0));
        // thunked positions consult the pool
        let du = PosType::Down(Box::new(NegType::Name(TypeName::new("U"))));
        let (vals, exact) = o.enumerate_values(&du, 3);
        assert!(!exact);
        assert!(vals.len() >= 2); // the loop thunk plus omega and Omega
    }
}
