//! The book chapters, compiled as doc-tests so every snippet keeps running
//! against the current library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}
#[doc = include_str!("../../../book/src/elements.md")]
pub mod elements {}
#[doc = include_str!("../../../book/src/detection.md")]
pub mod detection {}
#[doc = include_str!("../../../book/src/feedforward.md")]
pub mod feedforward {}
#[doc = include_str!("../../../book/src/imperfections.md")]
pub mod imperfections {}
#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod scenarios {}
