//! Pseudo-group codes over the dihedral group `D_{2p}`.
//!
//! The crate covers group arithmetic ([`dihedral`]), the random code ensemble
//! ([`ensemble`]), finite channels and labelings ([`channel`]), achievable-rate
//! formulas ([`rate`]), exact collision probabilities of the ensemble
//! ([`lemma`]), the constrained entropy maximisation behind the rate bound
//! ([`entropy_opt`]) and a Monte Carlo decoder simulator ([`simulator`]).
//!
//! Heavy sweeps take an [`Execution`] argument; with the default `parallel`
//! feature they run on rayon, otherwise sequentially.

pub mod channel;
pub mod dihedral;
pub mod ensemble;
pub mod entropy_opt;
pub mod error;
pub mod exec;
pub mod lemma;
pub mod rate;
pub mod simulator;
pub mod typicality;

pub use channel::{BuiltinChannel, Channel, Labeling};
pub use dihedral::{DihedralElement, DihedralParams, Partition, PartitionLabel};
pub use ensemble::{Codebook, ConstructionSpec, GeneratorPair, MessageWord, PseudoGroupCode};
pub use error::{Error, Result};
pub use exec::Execution;
