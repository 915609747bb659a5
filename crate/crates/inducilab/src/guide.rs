//! The user guide, mounted chapter by chapter so that every code block in
//! the book compiles and runs under `cargo test --doc`. The rendered book
//! lives in `book/` at the repository root; build it with `mdbook build`.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/groups.md")]
pub mod groups {}

#[doc = include_str!("../../../book/src/cayley.md")]
pub mod cayley {}

#[doc = include_str!("../../../book/src/embeddings.md")]
pub mod embeddings {}

#[doc = include_str!("../../../book/src/blowups.md")]
pub mod blowups {}

#[doc = include_str!("../../../book/src/certification.md")]
pub mod certification {}

#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
