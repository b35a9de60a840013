//! Generic 3-leveled multilinear group with an exponent-simulation backend.
//!
//! An element of `G_i` is stored as its discrete log with respect to the
//! canonical generator `g_i`, so every pairing identity holds exactly:
//! `e(g_i^a, g_j^b) = g_{i+j}^{ab}` becomes plain modular multiplication.
//! This backend is functional, not secure; it exists so the algebra of the
//! schemes built on top of it can be checked bit-exactly.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The artifact is fixed to 3 levels: pairings `e_{i,j}` exist iff `i + j <= 3`.
pub const MAX_LEVEL: u8 = 3;

const ELEMENT_WIRE_VERSION: u8 = 1;
const SCALAR_WIRE_VERSION: u8 = 1;

/// Default prime for the `lambda = 128` profile: the largest 256-bit prime,
/// `2^256 - 189`.
pub const PINNED_PRIME_256_HEX: &str =
    "ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff43";

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("security parameter {0} is too small (minimum 8)")]
    InvalidLambda(u32),
    #[error("pairing levels {0} + {1} exceed the maximum level {max}", max = MAX_LEVEL)]
    LevelOverflow(u8, u8),
    #[error("group operation on mismatched levels {0} and {1}")]
    LevelMismatch(u8, u8),
    #[error("level {0} is outside [1, {max}]", max = MAX_LEVEL)]
    BadLevel(u8),
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
}

/// A value of one multilinear level, represented by its discrete log.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    level: u8,
    log: BigUint,
}

impl GroupElement {
    pub fn level(&self) -> u8 {
        self.level
    }

    /// Discrete log with respect to the canonical generator of the level.
    /// Only meaningful for the simulation backend; tests use it to check
    /// exponent identities directly.
    pub fn log(&self) -> &BigUint {
        &self.log
    }

    pub fn is_identity(&self) -> bool {
        self.log.is_zero()
    }
}

/// An exponent in `Z_p`, always kept reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// Description of the 3-leveled group: the prime modulus and the security
/// level it was generated for. Immutable and freely shareable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupDescription {
    lambda: u32,
    p: BigUint,
}

impl GroupDescription {
    /// Generates a group description for the given security level. The prime
    /// is deterministic given `(lambda, seed)`; `lambda = 128` with no seed
    /// uses the pinned 256-bit prime.
    pub fn setup(lambda: u32, seed: Option<u64>) -> Result<Self, GroupError> {
        if lambda < 8 {
            return Err(GroupError::InvalidLambda(lambda));
        }
        if lambda == 128 && seed.is_none() {
            let p = BigUint::parse_bytes(PINNED_PRIME_256_HEX.as_bytes(), 16)
                .expect("pinned prime constant parses");
            return Ok(GroupDescription { lambda, p });
        }
        let p = derive_prime(lambda, seed.unwrap_or(0));
        Ok(GroupDescription { lambda, p })
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }

    pub fn prime(&self) -> &BigUint {
        &self.p
    }

    /// Byte width of one serialized log / scalar value.
    pub fn element_width(&self) -> usize {
        ((self.p.bits() + 7) / 8) as usize
    }

    pub fn generator(&self, level: u8) -> Result<GroupElement, GroupError> {
        self.element_from_log(level, BigUint::one())
    }

    pub fn identity(&self, level: u8) -> Result<GroupElement, GroupError> {
        self.element_from_log(level, BigUint::zero())
    }

    pub fn element_from_log(&self, level: u8, log: BigUint) -> Result<GroupElement, GroupError> {
        if level == 0 || level > MAX_LEVEL {
            return Err(GroupError::BadLevel(level));
        }
        Ok(GroupElement {
            level,
            log: log % &self.p,
        })
    }

    /// `e_{i,j}(g_i^a, g_j^b) = g_{i+j}^{ab}`, defined iff `i + j <= 3`.
    pub fn pair(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        let level = x.level + y.level;
        if level > MAX_LEVEL {
            return Err(GroupError::LevelOverflow(x.level, y.level));
        }
        Ok(GroupElement {
            level,
            log: (&x.log * &y.log) % &self.p,
        })
    }

    pub fn exp(&self, x: &GroupElement, a: &Scalar) -> GroupElement {
        GroupElement {
            level: x.level,
            log: (&x.log * &a.0) % &self.p,
        }
    }

    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement, GroupError> {
        if x.level != y.level {
            return Err(GroupError::LevelMismatch(x.level, y.level));
        }
        Ok(GroupElement {
            level: x.level,
            log: (&x.log + &y.log) % &self.p,
        })
    }

    pub fn inv(&self, x: &GroupElement) -> GroupElement {
        let log = if x.log.is_zero() {
            BigUint::zero()
        } else {
            &self.p - &x.log
        };
        GroupElement {
            level: x.level,
            log,
        }
    }

    /// Multiplies a sequence of same-level elements together.
    pub fn product<'a, I>(&self, level: u8, factors: I) -> Result<GroupElement, GroupError>
    where
        I: IntoIterator<Item = &'a GroupElement>,
    {
        let mut acc = self.identity(level)?;
        for f in factors {
            acc = self.mul(&acc, f)?;
        }
        Ok(acc)
    }

    pub fn scalar_from_u64(&self, v: u64) -> Scalar {
        Scalar(BigUint::from(v) % &self.p)
    }

    pub fn scalar_from_biguint(&self, v: BigUint) -> Scalar {
        Scalar(v % &self.p)
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.p)
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.p)
    }

    pub fn scalar_neg(&self, a: &Scalar) -> Scalar {
        if a.0.is_zero() {
            Scalar(BigUint::zero())
        } else {
            Scalar(&self.p - &a.0)
        }
    }

    /// `a^e mod p` for small exponents like the `alpha^j` powers.
    pub fn scalar_pow(&self, a: &Scalar, e: u64) -> Scalar {
        Scalar(a.0.modpow(&BigUint::from(e), &self.p))
    }

    /// Uniform scalar in `[0, p)` via rejection sampling. A source that
    /// yields all-zero bytes deterministically produces the zero scalar,
    /// which tests use as a fixed-randomness hook.
    pub fn sample_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let width = self.element_width();
        let top_bits = {
            let rem = self.p.bits() % 8;
            if rem == 0 { 8 } else { rem as u32 }
        };
        let mask = if top_bits == 8 { 0xff } else { (1u16 << top_bits) as u8 - 1 };
        let mut buf = vec![0u8; width];
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= mask;
            let v = BigUint::from_bytes_be(&buf);
            if v < self.p {
                return Scalar(v);
            }
        }
    }

    pub fn serialize_element(&self, x: &GroupElement) -> Vec<u8> {
        let width = self.element_width();
        let mut out = Vec::with_capacity(2 + width);
        out.push(ELEMENT_WIRE_VERSION);
        out.push(x.level);
        out.extend_from_slice(&to_fixed_be(&x.log, width));
        out
    }

    pub fn deserialize_element(&self, bytes: &[u8]) -> Result<GroupElement, GroupError> {
        let width = self.element_width();
        if bytes.len() != 2 + width {
            return Err(GroupError::Malformed("element length"));
        }
        if bytes[0] != ELEMENT_WIRE_VERSION {
            return Err(GroupError::Malformed("element version"));
        }
        let level = bytes[1];
        if level == 0 || level > MAX_LEVEL {
            return Err(GroupError::BadLevel(level));
        }
        let log = BigUint::from_bytes_be(&bytes[2..]);
        if log >= self.p {
            return Err(GroupError::Malformed("element log out of range"));
        }
        Ok(GroupElement { level, log })
    }

    pub fn serialize_scalar(&self, a: &Scalar) -> Vec<u8> {
        let width = self.element_width();
        let mut out = Vec::with_capacity(1 + width);
        out.push(SCALAR_WIRE_VERSION);
        out.extend_from_slice(&to_fixed_be(&a.0, width));
        out
    }

    pub fn deserialize_scalar(&self, bytes: &[u8]) -> Result<Scalar, GroupError> {
        let width = self.element_width();
        if bytes.len() != 1 + width {
            return Err(GroupError::Malformed("scalar length"));
        }
        if bytes[0] != SCALAR_WIRE_VERSION {
            return Err(GroupError::Malformed("scalar version"));
        }
        let v = BigUint::from_bytes_be(&bytes[1..]);
        if v >= self.p {
            return Err(GroupError::Malformed("scalar out of range"));
        }
        Ok(Scalar(v))
    }
}

fn to_fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    debug_assert!(raw.len() <= width);
    let mut out = vec![0u8; width];
    out[width - raw.len()..].copy_from_slice(&raw);
    out
}

/// Deterministically derives a `(lambda + 1)`-bit prime (so `p > 2^lambda`)
/// from a hash-based candidate stream.
fn derive_prime(lambda: u32, seed: u64) -> BigUint {
    let nbits = (lambda + 1) as u64;
    let nbytes = ((nbits + 7) / 8) as usize;
    for counter in 0u64.. {
        let mut h = Sha256::new();
        h.update(b"rhibe-prime");
        h.update(lambda.to_be_bytes());
        h.update(seed.to_be_bytes());
        h.update(counter.to_be_bytes());
        let mut bytes = Vec::with_capacity(nbytes);
        let mut block = 0u64;
        while bytes.len() < nbytes {
            let mut hb = h.clone();
            hb.update(block.to_be_bytes());
            bytes.extend_from_slice(&hb.finalize());
            block += 1;
        }
        bytes.truncate(nbytes);
        let mut cand = BigUint::from_bytes_be(&bytes);
        // force exactly nbits bits and oddness
        cand |= BigUint::one() << (nbits - 1);
        cand &= (BigUint::one() << nbits) - BigUint::one();
        cand |= BigUint::one();
        if is_probable_prime(&cand) {
            return cand;
        }
    }
    unreachable!()
}

/// Miller-Rabin with the first prime bases plus hash-derived bases.
/// Deterministic for the candidate stream above.
fn is_probable_prime(n: &BigUint) -> bool {
    let small: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &small {
        let q = BigUint::from(q);
        if *n == q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let mut d = n_minus_1.clone();
    let mut r = 0u32;
    while (&d % 2u8).is_zero() {
        d >>= 1;
        r += 1;
    }
    'base: for &b in &small {
        let b = BigUint::from(b);
        let mut x = b.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'base;
            }
        }
        return false;
    }
    // extra hash-derived bases for sizes where the fixed set is not proven
    if n.bits() > 64 {
        for i in 0u32..28 {
            let mut h = Sha256::new();
            h.update(b"mr-base");
            h.update(n.to_bytes_be());
            h.update(i.to_be_bytes());
            let b = BigUint::from_bytes_be(&h.finalize()) % (n - 3u8) + 2u8;
            let mut x = b.modpow(&d, n);
            if x == one || x == n_minus_1 {
                continue;
            }
            let mut composite = true;
            for _ in 0..r - 1 {
                x = (&x * &x) % n;
                if x == n_minus_1 {
                    composite = false;
                    break;
                }
            }
            if composite {
                return false;
            }
        }
    }
    true
}
