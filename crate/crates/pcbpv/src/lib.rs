//! An equirecursive call-by-push-value language: parsing, signature
//! normalization, emptiness/fullness analysis, circular subtyping,
//! bidirectional typechecking, small-step evaluation, a bounded step-indexed
//! semantic-typing oracle, and isorecursive / call-by-name / call-by-value
//! front ends validated by differential testing.

pub mod dynamics;
pub mod frontends;
pub mod gen;
pub mod inhabit;
pub mod normalize;
pub mod parser;
pub mod pipeline;
pub mod printer;
pub mod semantics;
pub mod subtype;
pub mod syntax;
pub mod typecheck;
pub mod validate;


pub use syntax::{Computation, NegType, PosType, Signature, TypeName, Value};
