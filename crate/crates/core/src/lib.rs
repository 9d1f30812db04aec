//! Routed syndrome extraction for surface and bivariate bicycle codes under reduced
//! connectivity, with detector error models, BP-OSD decoding and circuit-distance
//! estimation.

pub mod circuit;
pub mod decoders;
pub mod dem;
pub mod distance;
pub mod codes;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod gf2;
pub mod layout;
pub mod noise;
pub mod pauli;
pub mod sampler;
pub mod schedules;

pub use circuit::{Circuit, Instruction, NoiseChannel};
pub use error::{Error, Result};
pub use flow::{classical_action, conjugate, verify_flow, StabilizerFlow};
pub use gf2::{BitMatrix, BitVector};
pub use pauli::{Pauli, PauliString};
