//! Tensor-product codes over prime fields.
//!
//! The crate covers the base-code toolkit ([`code`]), the tensor geometry
//! and encoder ([`tensor`]), the plane tester and its composition
//! ([`testing`]), instrumentation of the robustness argument
//! ([`analysis`]), the `C (x) C` unique decoder ([`decoding`]) and the
//! experiment harness behind the `tensorltc` CLI ([`harness`]).

pub mod analysis;
pub mod code;
pub mod decoding;
pub mod error;
pub mod field;
pub mod harness;
pub mod matrix;
pub mod search;
pub mod tensor;
pub mod testing;

/// Exact rational used for distances, robustness and bounds.
pub type Rational = num_rational::Ratio<i128>;

pub use code::{ErasureOutcome, LinearCode, PartialWord};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use matrix::{Matrix, SolveOutcome};
pub use tensor::{LineIndex, PartialTensor, PlaneIndex, TensorCode, TensorWord};

/// Seed for sub-stream `index` of `master`, independent of evaluation order.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(master ^ splitmix(index))
}
