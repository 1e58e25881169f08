//! Explicit generating sets for induced modules over free products, with certificates.
//!
//! Finite factors carry lattices; infinite factors C_n × ℤ carry submodules of free
//! ℤH-modules in Laurent coordinates. Everything is assembled inside
//! ⊕ M_i ⊗ ℤG with normal-form coset words.

mod certificate;
mod induced;
mod local;
mod nested;

use num_bigint::BigInt;
use serde::Serializer;

pub use certificate::{
    canonical_generators, synthesize_generators, verify_certificate, GenerationCertificate, Membership, Synthesis, UPart, Verdict,
    DEFAULT_DEPTH_CAP,
};
pub use induced::{FreeProduct, InducedElement, Key, LocalAction, NormalWord, Syllable};
pub use local::{infinite_factor_generators, solve_laurent, spans_laurent_mod, InfiniteGenerators, InfiniteKind, MAX_WINDOW};
pub use nested::{build_nested_family, check_good, residual_count, EnestRow, GoodModuleWitness, NestedFamily};

pub(crate) fn ser_big<S: Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub(crate) fn ser_vectors<S: Serializer>(xs: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::Serialize;
    let v: Vec<Vec<String>> = xs.iter().map(|x| x.iter().map(ToString::to_string).collect()).collect();
    v.serialize(s)
}

#[cfg(test)]
mod tests;
