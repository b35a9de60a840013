//! Hierarchical identities, the hash-concatenation identity encoding, and
//! fixed-width time labels.

use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum IdentityError {
    #[error("identity component must be non-empty")]
    EmptyComponent,
    #[error("identity depth {0} exceeds the maximum depth {1}")]
    DepthExceeded(usize, usize),
    #[error("epoch {0} does not fit in {1} bits")]
    EpochOutOfRange(u64, usize),
    #[error("invalid identity path: {0}")]
    BadPath(&'static str),
}

/// Security-level profile fixing the bit widths of encoded identities and
/// time labels: `l1 = 2 * lambda` for identity digests, `l2 = lambda` for
/// time labels. `l1` is capped by the SHA-256 output size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Profile {
    lambda: u32,
}

impl Profile {
    pub fn new(lambda: u32) -> Self {
        assert!(lambda >= 8 && lambda <= 128, "lambda out of [8, 128]");
        Profile { lambda }
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    /// Bit width of one encoded identity digest.
    pub fn l1(&self) -> usize {
        2 * self.lambda as usize
    }

    /// Bit width of a time label.
    pub fn l2(&self) -> usize {
        self.lambda as usize
    }
}

/// A hierarchical identity `(I_1, ..., I_k)`; depth 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierId {
    components: Vec<String>,
}

impl HierId {
    pub fn root() -> Self {
        HierId { components: Vec::new() }
    }

    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(parts: I) -> Result<Self, IdentityError> {
        let components: Vec<String> = parts.into_iter().map(Into::into).collect();
        if components.iter().any(|c| c.is_empty()) {
            return Err(IdentityError::EmptyComponent);
        }
        Ok(HierId { components })
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    pub fn is_root(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    /// The leading slice `ID|_j`.
    pub fn truncated(&self, j: usize) -> HierId {
        HierId {
            components: self.components[..j].to_vec(),
        }
    }

    pub fn parent(&self) -> Option<HierId> {
        if self.is_root() {
            None
        } else {
            Some(self.truncated(self.depth() - 1))
        }
    }

    pub fn child<S: Into<String>>(&self, component: S) -> Result<HierId, IdentityError> {
        let component = component.into();
        if component.is_empty() {
            return Err(IdentityError::EmptyComponent);
        }
        let mut components = self.components.clone();
        components.push(component);
        Ok(HierId { components })
    }

    /// `Prefix(ID)`: the proper and improper non-empty prefixes
    /// `{ID|_1, ..., ID|_k}`. Empty for the root.
    pub fn prefix_set(&self) -> Vec<HierId> {
        (1..=self.depth()).map(|j| self.truncated(j)).collect()
    }

    pub fn is_prefix_of(&self, other: &HierId) -> bool {
        self.depth() <= other.depth()
            && self.components == other.components[..self.depth()]
    }

    /// Canonical textual form: components joined by '/', with '%' and '/'
    /// percent-escaped inside components. The root renders as the empty
    /// string.
    pub fn to_path(&self) -> String {
        self.components
            .iter()
            .map(|c| escape(c))
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn from_path(path: &str) -> Result<Self, IdentityError> {
        if path.is_empty() {
            return Ok(HierId::root());
        }
        let mut components = Vec::new();
        for part in path.split('/') {
            if part.is_empty() {
                return Err(IdentityError::BadPath("empty component"));
            }
            components.push(unescape(part)?);
        }
        Ok(HierId { components })
    }
}

impl fmt::Display for HierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            write!(f, "<root>")
        } else {
            write!(f, "{}", self.to_path())
        }
    }
}

fn escape(c: &str) -> String {
    let mut out = String::with_capacity(c.len());
    for b in c.bytes() {
        match b {
            b'/' => out.push_str("%2F"),
            b'%' => out.push_str("%25"),
            _ => out.push(b as char),
        }
    }
    out
}

fn unescape(part: &str) -> Result<String, IdentityError> {
    let bytes = part.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            if i + 2 >= bytes.len() {
                return Err(IdentityError::BadPath("truncated escape"));
            }
            let hex = std::str::from_utf8(&bytes[i + 1..i + 3])
                .map_err(|_| IdentityError::BadPath("bad escape"))?;
            let v = u8::from_str_radix(hex, 16)
                .map_err(|_| IdentityError::BadPath("bad escape"))?;
            out.push(v);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| IdentityError::BadPath("non-utf8 component"))
}

/// A fixed-width bit label, most significant bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitLabel {
    bits: Vec<u8>, // one byte per bit, each 0 or 1
}

impl BitLabel {
    pub fn from_bytes(bytes: &[u8], nbits: usize) -> Self {
        assert!(nbits <= bytes.len() * 8);
        let bits = (0..nbits)
            .map(|j| (bytes[j / 8] >> (7 - j % 8)) & 1)
            .collect();
        BitLabel { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit at position `j`, zero-based from the most significant end.
    pub fn bit(&self, j: usize) -> u8 {
        self.bits[j]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.bits.len() + 7) / 8];
        for (j, &b) in self.bits.iter().enumerate() {
            out[j / 8] |= b << (7 - j % 8);
        }
        out
    }
}

/// The hash-concatenation encoding of a hierarchical identity:
/// `CI_j = H(I_1 || ... || I_j)` truncated to `l1` bits, with components
/// length-prefixed so the concatenation is unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConcatId {
    digests: Vec<BitLabel>,
}

impl ConcatId {
    pub fn depth(&self) -> usize {
        self.digests.len()
    }

    pub fn digest(&self, level: usize) -> &BitLabel {
        &self.digests[level - 1]
    }

    pub fn digests(&self) -> &[BitLabel] {
        &self.digests
    }

    pub fn truncated(&self, j: usize) -> ConcatId {
        ConcatId {
            digests: self.digests[..j].to_vec(),
        }
    }
}

/// `EncodeCID`: maps `(I_1, ..., I_k)` to `(CI_1, ..., CI_k)`.
pub fn encode_cid(id: &HierId, profile: &Profile, max_depth: usize) -> Result<ConcatId, IdentityError> {
    if id.depth() > max_depth {
        return Err(IdentityError::DepthExceeded(id.depth(), max_depth));
    }
    let mut digests = Vec::with_capacity(id.depth());
    let mut h = Sha256::new();
    for component in id.components() {
        h.update((component.len() as u32).to_be_bytes());
        h.update(component.as_bytes());
        let digest = h.clone().finalize();
        digests.push(BitLabel::from_bytes(&digest, profile.l1()));
    }
    Ok(ConcatId { digests })
}

/// A time period: a `l2`-bit big-endian label plus the epoch it encodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimePeriod {
    epoch: u64,
    label: BitLabel,
}

impl TimePeriod {
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn label(&self) -> &BitLabel {
        &self.label
    }
}

pub fn encode_time(epoch: u64, profile: &Profile) -> Result<TimePeriod, IdentityError> {
    let l2 = profile.l2();
    if l2 < 64 && epoch >= 1u64 << l2 {
        return Err(IdentityError::EpochOutOfRange(epoch, l2));
    }
    let nbytes = (l2 + 7) / 8;
    let be = epoch.to_be_bytes();
    let mut bytes = vec![0u8; nbytes];
    let copy = nbytes.min(8);
    bytes[nbytes - copy..].copy_from_slice(&be[8 - copy..]);
    Ok(TimePeriod {
        epoch,
        label: BitLabel::from_bytes(&bytes, l2),
    })
}
