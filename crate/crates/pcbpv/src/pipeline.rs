//! Loading pipeline: validation, normalization, elaboration, inhabitation
//! analysis, and the shared handle the checker and oracle operate on.

use crate::inhabit::{add_loop_defs, compute_inhabited, InhabitTable};
use crate::normalize::{elaborate_signature, Normalizer};
use crate::subtype::{self, Derivation, QueryError, SubQuery, SubtypeState};
use crate::syntax::*;
use crate::validate::{validate_signature_mode, Diagnostic, TermMode};

/// A validated, normalized, elaborated signature together with its
/// inhabitation table and subtyping caches. Queries that intern new types
/// extend the signature and refresh the table.
pub struct World {
    /// The signature as parsed, for printing.
    pub source: Signature,
    norm: Normalizer,
    pub inhabit: InhabitTable,
    pub sub_state: SubtypeState,
    pub mode: TermMode,
}

impl World {
    pub fn load(source: &Signature) -> Result<World, Vec<Diagnostic>> {
        World::load_mode(source, TermMode::Core)
    }

    pub fn load_mode(source: &Signature, mode: TermMode) -> Result<World, Vec<Diagnostic>> {
        let diags = validate_signature_mode(source, mode);
        if !diags.is_empty() {
            return Err(diags);
        }
        let mut norm = elaborate_signature(source);
        norm.sig = add_loop_defs(&norm.sig);
        let inhabit = compute_inhabited(&norm.sig);
        Ok(World {
            source: source.clone(),
            norm,
            inhabit,
            sub_state: SubtypeState::new(),
            mode,
        })
    }

    /// The elaborated signature: normal-form type definitions, declared and
    /// annotation types interned as names, diverging loop definitions added.
    pub fn sig(&self) -> &Signature {
        &self.norm.sig
    }

    /// Annotation-erased signature for evaluation.
    pub fn runtime_sig(&self) -> Signature {
        erase_signature(&self.norm.sig)
    }

    /// Interns a positive type as a name, refreshing analyses if the
    /// signature grew.
    pub fn intern_pos(&mut self, t: &PosType) -> TypeName {
        let before = self.norm.sig.type_defs.len();
        self.norm.set_base("query");
        let name = self.norm.intern_pos(t);
        if self.norm.sig.type_defs.len() != before {
            self.refresh();
        }
        name
    }

    pub fn intern_neg(&mut self, t: &NegType) -> TypeName {
        let before = self.norm.sig.type_defs.len();
        self.norm.set_base("query");
        let name = self.norm.intern_neg(t);
        if self.norm.sig.type_defs.len() != before {
            self.refresh();
        }
        name
    }

    fn refresh(&mut self) {
        self.norm.sig = add_loop_defs(&self.norm.sig);
        self.inhabit = compute_inhabited(&self.norm.sig);
    }

    pub fn sub_names(&mut self, a: &TypeName, b: &TypeName) -> Result<bool, QueryError> {
        SubQuery {
            sig: &self.norm.sig,
            inhabit: &self.inhabit,
            state: &mut self.sub_state,
        }
        .sub_names(a, b)
    }

    pub fn sub_pos(&mut self, a: &PosType, b: &PosType) -> Result<bool, QueryError> {
        let a = self.intern_pos(&a.clone());
        let b = self.intern_pos(&b.clone());
        self.sub_names(&a, &b)
    }

    pub fn sub_neg(&mut self, a: &NegType, b: &NegType) -> Result<bool, QueryError> {
        let a = self.intern_neg(&a.clone());
        let b = self.intern_neg(&b.clone());
        self.sub_names(&a, &b)
    }

    pub fn is_empty(&self, t: &TypeName) -> bool {
        self.inhabit.is_empty(t)
    }

    pub fn is_full(&self, s: &TypeName) -> bool {
        self.inhabit.is_full(s)
    }

    pub fn explain(&self, a: &TypeName, b: &TypeName) -> Result<Option<Derivation>, QueryError> {
        subtype::explain(a, b, &self.norm.sig, &self.inhabit)
    }

    /// Resolves a positive name to its structural body.
    pub fn pos_body(&self, t: &TypeName) -> Option<PosType> {
        self.norm.sig.pos_def(t).cloned()
    }

    pub fn neg_body(&self, s: &TypeName) -> Option<NegType> {
        self.norm.sig.neg_def(s).cloned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_signature;

    #[test]
    fn load_rejects_invalid_signatures() {
        let sig = parse_signature("type t = t").unwrap();
        assert!(World::load(&sig).is_err());
    }

    #[test]
    fn interning_refreshes_inhabitation() {
        let sig = parse_signature("type t0 = 1 * t0").unwrap();
        let mut w = World::load(&sig).unwrap();
        let t = crate::parser::parse_pos_type("t0 * 1").unwrap();
        let n = w.intern_pos(&t);
        assert!(w.is_empty(&n));
    }
}
