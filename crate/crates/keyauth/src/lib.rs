//! Key-authority workspace tooling around the `rhibe` schemes: versioned
//! binary artifact files, a small command layer, and a KEM-DEM wrapper for
//! encrypting arbitrary byte messages. All randomness is drawn from a
//! seeded stream, so runs with the same seed produce identical files.

use std::fmt;

pub mod codec;
pub mod dem;
pub mod error;
pub mod ops;
pub mod store;

pub use error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Scheme {
    /// History-preserving updates: keys grow with depth, update keys chain.
    Hpu = 0,
    /// History-free updates: constant-size private keys.
    Hfu = 1,
}

impl Scheme {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Scheme::Hpu),
            1 => Some(Scheme::Hfu),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Hpu => "hpu",
            Scheme::Hfu => "hfu",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hpu" => Ok(Scheme::Hpu),
            "hfu" => Ok(Scheme::Hfu),
            other => Err(format!("unknown scheme {other:?} (expected hpu or hfu)")),
        }
    }
}
