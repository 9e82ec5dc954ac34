//! Decision procedure for quantifier-free formulas over integer sequences
//! with concatenation, Presburger arithmetic on elements and regular
//! constraints.
//!
//! The pipeline is: [`syntax`] (parse) → [`elaborate`] (remove shorthands)
//! → [`encode`] (word equations over `{a,b,c,d}`) → [`wordsolver`]
//! (Nielsen search). [`oracle`] is an independent bounded evaluator used
//! for testing and [`vcgen`] turns annotated programs into formulas.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod automata;
pub mod elaborate;
pub mod encode;
pub mod oracle;
pub mod syntax;
pub mod wordsolver;
pub mod vcgen;
