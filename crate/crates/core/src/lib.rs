//! Co-word analysis for small bibliographic corpora.
//!
//! Records with author keywords go in ([`corpus`]). Keywords are folded
//! into descriptors ([`vocabulary`]) and counted into a co-occurrence
//! network ([`conet`]). The network is clustered and laid out
//! ([`mapping`]) and written as tables, Pajek files and an SVG map
//! ([`exportio`]). [`pipeline`] chains the stages over files.

pub mod conet;
pub mod corpus;
pub mod exportio;
pub mod mapping;
pub mod pipeline;
pub mod vocabulary;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/corpus.md")]
    mod corpus {}
    #[doc = include_str!("../../../book/src/vocabulary.md")]
    mod vocabulary {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/clusters.md")]
    mod clusters {}
    #[doc = include_str!("../../../book/src/layout.md")]
    mod layout {}
    #[doc = include_str!("../../../book/src/export.md")]
    mod export {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
