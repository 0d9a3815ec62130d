//! Taxonomy-based semantic similarity and corpus-based semantic relatedness.
//!
//! The crate is organised around a small pipeline:
//!
//! * [`taxonomy`] loads an immutable concept DAG (TSV inputs) and answers
//!   graph queries: ancestors, descendants, depth, shortest paths, least
//!   common subsumers.
//! * [`ic`] computes per-concept information content, either from corpus
//!   frequency counts propagated over the hierarchy or intrinsically from
//!   taxonomy structure.
//! * [`measures`] implements the pairwise similarity measures (path, wup,
//!   zhong, pks, cmatch, batet, res, lin, jcn, faith) behind one dispatch.
//! * [`matrix`] builds a sparse symmetric word-by-word similarity matrix
//!   from a raw corpus, filtering bigrams by a similarity threshold, and
//!   persists it in a checksummed text format.
//! * [`relatedness`] assembles super-glosses, averages matrix rows into
//!   second-order vectors, and scores term pairs by cosine; lesk and
//!   first-order baselines live here too.
//! * [`eval`] correlates system scores with human reference standards
//!   (Spearman's rho, Fisher r-to-z) and drives threshold sweeps.
//! * [`cli`] is the batch front end used by the `semrel` binary.

pub mod cli;
pub mod eval;
pub mod ic;
pub mod matrix;
pub mod measures;
pub mod relatedness;
pub mod taxonomy;
