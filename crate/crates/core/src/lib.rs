//! A chaos-based bit-permutation image cipher and the partition-tree
//! known/chosen-plaintext attacks that recover its secret permutation.
//!
//! The keystream and the closed-form accuracy model are generic over the
//! floating-point type (see [`Scalar`]); the aliases below fix it to `f64`,
//! which every tool in this workspace uses.

pub mod analysis;
pub mod cipher;
pub mod error;
pub mod image;
pub mod keystream;
pub mod permutation;
pub mod recovery;
mod scalar;

pub use error::{Error, Result};
pub use image::{expand_to_bits, pack_to_image, BitMatrix, GrayImage};
pub use keystream::RankVector;
pub use permutation::PermutationMap;
pub use recovery::{attack, AttackReport, Mode, RecoveryTree};
pub use scalar::Scalar;

/// Default real type.
pub type Real = f64;

pub type Key = keystream::Key<Real>;
pub type Key32 = keystream::Key<f32>;
pub type ChaoticSequence = keystream::ChaoticSequence<Real>;
pub type Schedule = keystream::Schedule<Real>;
