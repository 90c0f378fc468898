//! Small-step operational semantics: the step judgment, terminal
//! computations, and fuel-bounded evaluation.
//!
//! Evaluation is substitution-based, so step counts match the reduction
//! relation one for one. Terms must be closed and annotation-free.

use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    Core,
    /// Adds the fold/unfold reductions and `fold e` as a terminal form.
    Iso,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Stepped(Computation),
    Terminal,
    Stuck(String),
}

/// True iff `e` does not reduce: lambdas, lazy records, returns, and in iso
/// mode `fold e`.
pub fn is_terminal(e: &Computation, mode: EvalMode) -> bool {
    match &e.kind {
        CompKind::Lam(..) | CompKind::Record(..) | CompKind::Return(..) => true,
        CompKind::FoldNu(..) => mode == EvalMode::Iso,
        _ => false,
    }
}

/// One reduction step. Deterministic: at most one rule applies to any
/// computation.
pub fn step(e: &Computation, sig: &Signature, mode: EvalMode) -> StepResult {
    use StepResult::*;
    match &e.kind {
        CompKind::Lam(..) | CompKind::Record(..) | CompKind::Return(..) => Terminal,
        CompKind::FoldNu(..) if mode == EvalMode::Iso => Terminal,
        CompKind::FoldNu(..) => Stuck("`fold` computation outside iso mode".into()),
        CompKind::App(f, v) => match &f.kind {
            CompKind::Lam(x, body) => Stepped(subst_comp(v, x, body)),
            _ => match step(f, sig, mode) {
                Stepped(f2) => Stepped(Computation::new(CompKind::App(
                    Box::new(f2),
                    Box::new(v.as_ref().clone()),
                ))),
                Terminal => Stuck("applied a computation that is not a function".into()),
                Stuck(r) => Stuck(r),
            },
        },
        CompKind::LetUp(x, e1, e2) => match &e1.kind {
            CompKind::Return(v) => Stepped(subst_comp(v, x, e2)),
            _ => match step(e1, sig, mode) {
                Stepped(e1b) => Stepped(Computation::new(CompKind::LetUp(
                    x.clone(),
                    Box::new(e1b),
                    Box::new(e2.as_ref().clone()),
                ))),
                Terminal => Stuck("let expects a returned value".into()),
                Stuck(r) => Stuck(r),
            },
        },
        CompKind::Proj(e1, j) => match &e1.kind {
            CompKind::Record(fields) => match fields.iter().find(|(l, _)| l == j) {
                Some((_, ej)) => Stepped(ej.clone()),
                None => Stuck(format!("projected missing field `{}`", j)),
            },
            _ => match step(e1, sig, mode) {
                Stepped(e1b) => {
                    Stepped(Computation::new(CompKind::Proj(Box::new(e1b), j.clone())))
                }
                Terminal => Stuck("projected from a computation that is not a record".into()),
                Stuck(r) => Stuck(r),
            },
        },
        CompKind::SplitPair(v, x, y, body) => match &v.kind {
            ValueKind::Pair(v1, v2) => {
                let body = subst_comp(v2, y, body);
                Stepped(subst_comp(v1, x, &body))
            }
            _ => Stuck("split a value that is not a pair".into()),
        },
        CompKind::SplitUnit(v, body) => match &v.kind {
            ValueKind::Unit => Stepped(body.as_ref().clone()),
            _ => Stuck("split a value that is not the unit".into()),
        },
        CompKind::Match(v, branches) => match &v.kind {
            ValueKind::Inj(j, vj) => match branches.iter().find(|(l, _, _)| l == j) {
                Some((_, x, body)) => Stepped(subst_comp(vj, x, body)),
                None => Stuck(format!("match has no branch for label `{}`", j)),
            },
            _ => Stuck("matched a value that is not an injection".into()),
        },
        CompKind::Force(v) => match &v.kind {
            ValueKind::Thunk(e1) => Stepped(e1.as_ref().clone()),
            _ => Stuck("forced a value that is not a thunk".into()),
        },
        CompKind::Def(f) => match sig.expr_def(f) {
            Some(d) => Stepped(d.body.clone()),
            None => Stuck(format!("`{}` is not defined", f)),
        },
        CompKind::Unfold(e1) if mode == EvalMode::Iso => match &e1.kind {
            CompKind::FoldNu(inner) => Stepped(inner.as_ref().clone()),
            _ => match step(e1, sig, mode) {
                Stepped(e1b) => Stepped(Computation::new(CompKind::Unfold(Box::new(e1b)))),
                Terminal => Stuck("unfolded a computation that is not a fold".into()),
                Stuck(r) => Stuck(r),
            },
        },
        CompKind::CaseFold(x, v, body) if mode == EvalMode::Iso => match &v.kind {
            ValueKind::FoldMu(inner) => Stepped(subst_comp(inner, x, body)),
            _ => Stuck("fold-matched a value that is not a fold".into()),
        },
        CompKind::Unfold(..) | CompKind::CaseFold(..) => {
            Stuck("iso construct outside iso mode".into())
        }
        CompKind::Anno(..) => Stuck("annotation reached at runtime".into()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalOutcome {
    Terminated { result: Computation, steps: u64 },
    OutOfFuel { last: Computation },
    WentStuck { at: Computation, reason: String },
}

/// Applies `step` until the computation is terminal, gets stuck, or fuel runs
/// out. `fuel == 0` means unlimited.
pub fn evaluate(e: &Computation, sig: &Signature, fuel: u64, mode: EvalMode) -> EvalOutcome {
    let mut current = e.clone();
    let mut steps = 0u64;
    loop {
        match step(&current, sig, mode) {
            StepResult::Terminal => {
                return EvalOutcome::Terminated {
                    result: current,
                    steps,
                }
            }
            StepResult::Stuck(reason) => {
                return EvalOutcome::WentStuck {
                    at: current,
                    reason,
                }
            }
            StepResult::Stepped(next) => {
                if fuel != 0 && steps >= fuel {
                    return EvalOutcome::OutOfFuel { last: current };
                }
                steps += 1;
                current = next;
            }
        }
    }
}

/// Like `evaluate`, but records every intermediate computation (including the
/// start term and, on termination, the final one).
pub fn evaluate_traced(
    e: &Computation,
    sig: &Signature,
    fuel: u64,
    mode: EvalMode,
) -> (EvalOutcome, Vec<Computation>) {
    let mut trace = vec![e.clone()];
    let mut current = e.clone();
    let mut steps = 0u64;
    loop {
        match step(&current, sig, mode) {
            StepResult::Terminal => {
                return (
                    EvalOutcome::Terminated {
                        result: current,
                        steps,
                    },
                    trace,
                )
            }
            StepResult::Stuck(reason) => {
                return (
                    EvalOutcome::WentStuck {
                        at: current,
                        reason,
                    },
                    trace,
                )
            }
            StepResult::Stepped(next) => {
                if fuel != 0 && steps >= fuel {
                    return (EvalOutcome::OutOfFuel { last: current }, trace);
                }
                steps += 1;
                trace.push(next.clone());
                current = next;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_computation, parse_signature};

    fn bin_sig() -> Signature {
        parse_signature(
            "type bin = +{e : 1, b0 : bin, b1 : bin}\n\
             type std = +{e : 1, b0 : pos, b1 : std}\n\
             type pos = +{b0 : pos, b1 : std}\n\
             def six : up pos = return 'b0 'b1 'b1 'e ()\n\
             def inc : std -> up pos = \\x. match x { 'e u => return 'b1 'e u | 'b0 x' => return 'b1 x' | 'b1 x' => let y' = inc x' in return 'b0 y' }",
        )
        .unwrap()
    }

    fn omega_sig() -> Signature {
        parse_signature(
            "type U = (down U) -> U\n\
             def omega : (down U) -> U = \\x. (force x) x\n\
             def Omega : U = omega (thunk omega)\n\
             def f : U = f",
        )
        .unwrap()
    }

    #[test]
    fn force_thunk_steps() {
        let e = parse_computation("force (thunk return ())").unwrap();
        match step(&e, &Signature::new(), EvalMode::Core) {
            StepResult::Stepped(next) => assert_eq!(next, Computation::ret(Value::unit())),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn lambda_is_terminal() {
        let e = parse_computation("\\x. return x").unwrap();
        assert!(is_terminal(&e, EvalMode::Core));
        assert_eq!(step(&e, &Signature::new(), EvalMode::Core), StepResult::Terminal);
    }

    #[test]
    fn beta_with_identity() {
        let e = parse_computation("(\\x. return x) ()").unwrap();
        match step(&e, &Signature::new(), EvalMode::Core) {
            StepResult::Stepped(next) => assert_eq!(next, Computation::ret(Value::unit())),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn names_are_not_terminal() {
        let sig = omega_sig();
        let e = Computation::def("f");
        assert!(!is_terminal(&e, EvalMode::Core));
        // f : U = f steps to itself in one step
        match step(&e, &sig, EvalMode::Core) {
            StepResult::Stepped(next) => assert_eq!(next, e),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn inc_six_takes_five_steps() {
        let sig = bin_sig();
        let e = parse_computation("let x = six in inc x").unwrap();
        match evaluate(&e, &sig, 100, EvalMode::Core) {
            EvalOutcome::Terminated { result, steps } => {
                assert_eq!(steps, 5);
                let expected =
                    parse_computation("return 'b1 'b1 'b1 'e ()").unwrap();
                assert_eq!(result, expected);
            }
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn omega_has_period_three() {
        let sig = omega_sig();
        let body = parse_computation("omega (thunk omega)").unwrap();
        let (outcome, trace) = evaluate_traced(&body, &sig, 30, EvalMode::Core);
        assert!(matches!(outcome, EvalOutcome::OutOfFuel { .. }));
        for k in 0..10 {
            assert_eq!(trace[3 * k], body, "period-3 recurrence at step {}", 3 * k);
        }
        assert_ne!(trace[1], body);
        assert_ne!(trace[2], body);
    }

    #[test]
    fn terminal_terminates_with_zero_steps() {
        let e = Computation::ret(Value::unit());
        match evaluate(&e, &Signature::new(), 7, EvalMode::Core) {
            EvalOutcome::Terminated { steps, .. } => assert_eq!(steps, 0),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn stuck_reports_the_mismatched_elimination() {
        let e = parse_computation("(return ()).hd").unwrap();
        match step(&e, &Signature::new(), EvalMode::Core) {
            StepResult::Stuck(reason) => assert!(reason.contains("record"), "{}", reason),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn iso_reductions() {
        let e = parse_computation("unfold fold return ()").unwrap();
        match step(&e, &Signature::new(), EvalMode::Iso) {
            StepResult::Stepped(next) => assert_eq!(next, Computation::ret(Value::unit())),
            other => panic!("{:?}", other),
        }
        let e = parse_computation("match fold () { fold x => return x }").unwrap();
        match step(&e, &Signature::new(), EvalMode::Iso) {
            StepResult::Stepped(next) => assert_eq!(next, Computation::ret(Value::unit())),
            other => panic!("{:?}", other),
        }
        let e = parse_computation("fold return ()").unwrap();
        assert!(is_terminal(&e, EvalMode::Iso));
        assert!(!is_terminal(&e, EvalMode::Core));
    }

    #[test]
    fn step_is_a_function() {
        let sig = bin_sig();
        let e = parse_computation("let x = six in inc x").unwrap();
        let a = step(&e, &sig, EvalMode::Core);
        let b = step(&e, &sig, EvalMode::Core);
        assert_eq!(a, b);
    }
}
