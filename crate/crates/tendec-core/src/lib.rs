//! Exact rank decompositions of 3D tensors over small finite fields.
//!
//! The crate decides and constructs rank-`R` decompositions (`R <= 4`) of
//! dense 3D tensors over `GF(p^k)`, solves rank-1 decomposition when some
//! cells are wildcards (for both matrices and 3D tensors), and builds the
//! NAE-3SAT gadget tensor that makes rank-2 wildcard decomposition hard
//! over `GF(2)`. Every solver is cross-checked against deliberately dumb
//! brute-force references in [`oracle`].
//!
//! The crate is `no_std` (with `alloc`); all file formats and the command
//! line live in the companion `tendec-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod decompose;
pub mod field;
pub mod matrix;
pub mod oracle;
pub mod reduction;
pub mod tensor;
pub mod wildcard;

pub use field::{Elem, FieldSpec};
pub use matrix::Mat;
pub use tensor::{Decomposition, Tensor3};
