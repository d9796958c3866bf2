//! The chapters of `book/` as modules, so `cargo test` runs their snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/temporal-graphs.md")]
pub mod temporal_graphs {}

#[doc = include_str!("../../../book/src/transition-operator.md")]
pub mod transition_operator {}

#[doc = include_str!("../../../book/src/embedding.md")]
pub mod embedding {}

#[doc = include_str!("../../../book/src/distances.md")]
pub mod distances {}

#[doc = include_str!("../../../book/src/randomizations.md")]
pub mod randomizations {}

#[doc = include_str!("../../../book/src/synthetic-models.md")]
pub mod synthetic_models {}

#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}

#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
