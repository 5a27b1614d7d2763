//! Numerical toolkit for Bergman-Orlicz spaces `A^Φ_α` on the complex unit
//! ball and for Carleson embeddings between them.
//!
//! The crate is organized around the objects that appear in the embedding
//! theory for the lower-triangle (loss) regime:
//!
//! * [`growth`] — growth functions Φ with their type/index calculus, Young
//!   conjugates and compositions Φ₁∘Φ₂⁻¹;
//! * [`geometry`] — Möbius automorphisms, the Bergman metric and the
//!   normalized reproducing kernel on 𝔹ⁿ;
//! * [`quadrature`] — seeded, chunk-deterministic Monte-Carlo integration
//!   against the weighted measures ν_α (the single randomness authority);
//! * [`lattice`] — greedy δ-lattices with separation/covering/overlap
//!   certificates;
//! * [`measure`] — positive measures with ball masses, average functions
//!   and Berezin transforms;
//! * [`orlicz`] — modulars, Luxemburg norms and the weighted sequence
//!   spaces over a lattice;
//! * [`atoms`] — atomic synthesis of test functions and the extended
//!   Khinchine inequality machinery;
//! * [`carleson`] — the verification harness tying (a), (b), (c) together;
//! * [`config`] — JSON-facing declarations of all of the above.
//!
//! All stochastic results are reproducible: estimates are functions of
//! `(seed, spec, integrand)` only, and the chunked parallel evaluation
//! (enabled by the default `parallel` feature) is bit-identical to the
//! sequential fallback.

pub mod atoms;
pub mod carleson;
pub mod config;
mod error;
pub mod geometry;
pub mod growth;
mod interp;
pub mod lattice;
pub mod measure;
pub mod orlicz;
pub mod quadrature;
mod spatial;

pub use error::{Error, Result};
