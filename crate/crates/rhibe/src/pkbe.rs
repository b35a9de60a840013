//! Boneh-Gentry-Waters public-key broadcast encryption, used by the RHIBE
//! schemes as the revocation engine. Parameters are the powers
//! `X_j = g_1^{alpha^j}` for `j` in `[1, 2N]` with `X_{N+1}` deliberately
//! absent.

use crate::mlgroup::{GroupDescription, GroupElement, GroupError, Scalar};
use rand::RngCore;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum PkbeError {
    #[error("index {0} out of range [1, {1}]")]
    IndexOutOfRange(u32, u32),
    #[error("parameter X_{0} does not exist")]
    MissingParameter(u32),
    #[error("maximum user count {0} out of range [1, {max}]", max = MAX_USERS)]
    BadUserCount(u32),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Hard cap on N; parameters grow as 2N - 1 elements.
pub const MAX_USERS: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkbeMasterKey {
    alpha: Scalar,
    gamma: Scalar,
}

impl PkbeMasterKey {
    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    pub fn gamma(&self) -> &Scalar {
        &self.gamma
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkbeParams {
    n: u32,
    // X_1..X_2N without X_{N+1}: xs[0..N-1] = X_1..X_N, xs[N-1+k] = X_{N+1+k}
    xs: Vec<GroupElement>,
    gamma_cap: GroupElement, // Gamma = g_2^{alpha^{N+1}}
}

impl PkbeParams {
    pub fn from_parts(n: u32, xs: Vec<GroupElement>, gamma_cap: GroupElement) -> Self {
        debug_assert_eq!(xs.len(), 2 * n as usize - 1);
        PkbeParams { n, xs, gamma_cap }
    }

    pub fn xs(&self) -> &[GroupElement] {
        &self.xs
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `X_j` for `j` in `[1, 2N] \ {N+1}`.
    pub fn x(&self, j: u32) -> Result<&GroupElement, PkbeError> {
        if j == 0 || j > 2 * self.n {
            return Err(PkbeError::IndexOutOfRange(j, 2 * self.n));
        }
        if j == self.n + 1 {
            return Err(PkbeError::MissingParameter(j));
        }
        let idx = if j <= self.n { j - 1 } else { j - 2 };
        Ok(&self.xs[idx as usize])
    }

    /// `Gamma = g_2^{alpha^{N+1}}`, the session-key base.
    pub fn gamma_cap(&self) -> &GroupElement {
        &self.gamma_cap
    }

    /// `2N - 1` powers plus `Gamma`.
    pub fn element_count(&self) -> usize {
        self.xs.len() + 1
    }
}

/// An index-keyed private key `K = g_1^{alpha^d gamma}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkbeKey {
    index: u32,
    k: GroupElement,
}

impl PkbeKey {
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn k(&self) -> &GroupElement {
        &self.k
    }
}

/// A subset-targeted header `(S, E_0, E_1)`; two elements regardless of `|S|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkbeHeader {
    receiver_set: BTreeSet<u32>,
    e0: GroupElement,
    e1: GroupElement,
}

impl PkbeHeader {
    pub fn receiver_set(&self) -> &BTreeSet<u32> {
        &self.receiver_set
    }

    pub fn e0(&self) -> &GroupElement {
        &self.e0
    }

    pub fn e1(&self) -> &GroupElement {
        &self.e1
    }
}

pub fn setup<R: RngCore + ?Sized>(
    group: &GroupDescription,
    n: u32,
    rng: &mut R,
) -> Result<(PkbeMasterKey, PkbeParams, GroupElement), PkbeError> {
    let alpha = group.sample_scalar(rng);
    let gamma = group.sample_scalar(rng);
    setup_with_master(group, n, alpha, gamma)
}

pub fn setup_with_master(
    group: &GroupDescription,
    n: u32,
    alpha: Scalar,
    gamma: Scalar,
) -> Result<(PkbeMasterKey, PkbeParams, GroupElement), PkbeError> {
    if n == 0 || n > MAX_USERS {
        return Err(PkbeError::BadUserCount(n));
    }
    let g1 = group.generator(1)?;
    let g2 = group.generator(2)?;
    let mut xs = Vec::with_capacity(2 * n as usize - 1);
    for j in 1..=2 * n {
        if j == n + 1 {
            continue;
        }
        xs.push(group.exp(&g1, &group.scalar_pow(&alpha, j as u64)));
    }
    let gamma_cap = group.exp(&g2, &group.scalar_pow(&alpha, (n + 1) as u64));
    let y = group.exp(&g1, &gamma);
    Ok((
        PkbeMasterKey { alpha, gamma },
        PkbeParams { n, xs, gamma_cap },
        y,
    ))
}

/// Key generation takes `gamma` explicitly; the RHIBE schemes call this with
/// per-node secrets rather than the master `gamma`.
pub fn genkey(
    group: &GroupDescription,
    params: &PkbeParams,
    d: u32,
    gamma: &Scalar,
) -> Result<PkbeKey, PkbeError> {
    if d == 0 || d > params.n {
        return Err(PkbeError::IndexOutOfRange(d, params.n));
    }
    let k = group.exp(params.x(d)?, gamma);
    Ok(PkbeKey { index: d, k })
}

pub fn encaps(
    group: &GroupDescription,
    params: &PkbeParams,
    receiver_set: &BTreeSet<u32>,
    beta: &Scalar,
    y: &GroupElement,
) -> Result<(PkbeHeader, GroupElement), PkbeError> {
    if let Some(&j) = receiver_set.iter().find(|&&j| j == 0 || j > params.n) {
        return Err(PkbeError::IndexOutOfRange(j, params.n));
    }
    let g1 = group.generator(1)?;
    let e0 = group.exp(&g1, beta);
    let mut base = y.clone();
    for &j in receiver_set {
        base = group.mul(&base, params.x(params.n + 1 - j)?)?;
    }
    let e1 = group.exp(&base, beta);
    let ek = group.exp(&params.gamma_cap, beta);
    Ok((
        PkbeHeader {
            receiver_set: receiver_set.clone(),
            e0,
            e1,
        },
        ek,
    ))
}

/// Returns the session key if the key's index is in the receiver set, `None`
/// (revoked/excluded) otherwise. The membership gate comes first: for
/// `j = d` the formula would need the absent `X_{N+1}`.
pub fn decaps(
    group: &GroupDescription,
    params: &PkbeParams,
    header: &PkbeHeader,
    key: &PkbeKey,
) -> Result<Option<GroupElement>, PkbeError> {
    let d = key.index;
    if !header.receiver_set.contains(&d) {
        return Ok(None);
    }
    let lhs = group.pair(params.x(d)?, &header.e1)?;
    let mut acc = key.k.clone();
    for &j in &header.receiver_set {
        if j == d {
            continue;
        }
        acc = group.mul(&acc, params.x(params.n + 1 - j + d)?)?;
    }
    let rhs = group.pair(&header.e0, &acc)?;
    Ok(Some(group.mul(&lhs, &group.inv(&rhs))?))
}
