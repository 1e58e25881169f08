//! Exact linear algebra over prime fields and over ℤ.

mod fp;
mod int;
pub mod primes;

pub use fp::{rref, solve_mod_p, EchelonBasis, FpMatrix, Rref};
pub(crate) use fp::check_prime;
pub use int::{hermite_basis, integer_combination, integer_kernel, smith_normal_form, to_big, IntMatrix, Lattice, SmithForm};
