//! Scenario files, theorem reports, and the pipelines that connect them.
//!
//! The binary in this crate drives everything, but the pieces are library
//! code so integration tests can run whole pipelines in process: parse a
//! scenario ([`scenario`]), run it ([`verify`]), and emit or re-read the
//! result ([`report`]). [`gen`] builds seeded scenarios for fixtures.

pub mod gen;
pub mod report;
pub mod scenario;
pub mod verify;
