//! The guide's chapters as doc comments, so `cargo test` runs every listing.
//! One module per chapter keeps failures traceable to their file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/features.md")]
pub mod features {}
#[doc = include_str!("../../../book/src/labels.md")]
pub mod labels {}
#[doc = include_str!("../../../book/src/training.md")]
pub mod training {}
#[doc = include_str!("../../../book/src/attacks.md")]
pub mod attacks {}
#[doc = include_str!("../../../book/src/defense.md")]
pub mod defense {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
