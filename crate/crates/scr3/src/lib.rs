//! Tabular requirements toolset: parsing, static checks, explicit-state
//! CTL checking with event connectives, SMV emission, and conformance
//! checking of annotated C implementations.

pub mod annot;
pub mod ast;
pub mod cord;
pub mod corpus;
pub mod ctl;
pub mod diag;
pub mod mc;
pub mod parse;
pub mod sem;
pub mod smv;
pub mod wf;
