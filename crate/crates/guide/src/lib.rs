//! The chaosbench book, one module per chapter, so that every code block in
//! the book runs as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/spectral-fields.md")]
pub mod spectral_fields {}
#[doc = include_str!("../../../book/src/drifts.md")]
pub mod drifts {}
#[doc = include_str!("../../../book/src/mean-field.md")]
pub mod mean_field {}
#[doc = include_str!("../../../book/src/particles.md")]
pub mod particles {}
#[doc = include_str!("../../../book/src/functionals.md")]
pub mod functionals {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
