//! Revocable hierarchical identity-based encryption over a 3-leveled
//! multilinear group, with two update-key flavors:
//!
//! * [`hpu`] — history-preserving updates: private and update keys grow
//!   with the identity depth, and update keys chain parent to child.
//! * [`hfu`] — history-free updates: constant-size private keys; a node
//!   issues update keys from its own current decryption key.
//!
//! Supporting pieces: [`mlgroup`] (the leveled group, exponent-simulation
//! backend), [`identity`] (hierarchical identities, hashed identity and
//! time encodings), [`hibe`] (a Boneh-Boyen style HIBE KEM with time
//! binding), [`pkbe`] (Boneh-Gentry-Waters broadcast encryption), and
//! [`system`] (shared parameters, node state, revocation lists, and the
//! scheme-agnostic encrypt/decrypt/revoke).
//!
//! The group backend simulates the multilinear structure by storing
//! discrete logarithms, so every algebraic identity holds exactly; it
//! provides no cryptographic hardness and exists for functional use of the
//! schemes, not for protecting data.

pub mod hfu;
pub mod hibe;
pub mod hpu;
pub mod identity;
pub mod mlgroup;
pub mod pkbe;
pub mod system;

pub use identity::{HierId, Profile};
pub use mlgroup::{GroupDescription, GroupElement, Scalar};
pub use system::{
    Ciphertext, DecryptionKey, MasterKey, NodeState, RevocationList, SchemeError, SystemParams,
};
