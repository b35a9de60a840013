//! RHIBE with history-free updates: private keys are two elements
//! regardless of depth, and a node builds its update key from its own
//! current decryption key rather than from its parent's update key. A
//! revoked node cannot derive a decryption key, hence cannot issue update
//! keys, and its whole subtree loses the epoch.

use crate::hibe::{self, HibeKey};
use crate::identity::{encode_cid, encode_time, HierId};
use crate::mlgroup::GroupElement;
use crate::system::{
    non_revoked_indices, DecryptionKey, NodeState, RevocationList, SchemeError, SystemParams,
};
use rand::RngCore;
use std::collections::BTreeSet;

pub use crate::system::{setup, encrypt, decrypt, revoke, Ciphertext, MasterKey};

/// `SK_ID = (d, K_0, K_1)`: a blinded PKBE key under the parent's `gamma`.
/// Two group elements at every depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HfuPrivateKey {
    id: HierId,
    index: u32,
    k0: GroupElement,
    k1: GroupElement,
}

impl HfuPrivateKey {
    pub fn from_parts(id: HierId, index: u32, k0: GroupElement, k1: GroupElement) -> Self {
        HfuPrivateKey { id, index, k0, k1 }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn k0(&self) -> &GroupElement {
        &self.k0
    }

    pub fn k1(&self) -> &GroupElement {
        &self.k1
    }

    pub fn element_count(&self) -> usize {
        2
    }
}

/// The issuing node's decryption key with the recoverable
/// `g_2^{alpha^{N+1} beta}` factor stripped from `P_0`, so that the child's
/// derivation step reintroduces it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryptionKey {
    p0: GroupElement,
    ps: Vec<GroupElement>,
    p_last: GroupElement,
}

impl PartialDecryptionKey {
    pub fn from_parts(p0: GroupElement, ps: Vec<GroupElement>, p_last: GroupElement) -> Self {
        PartialDecryptionKey { p0, ps, p_last }
    }

    pub fn p0(&self) -> &GroupElement {
        &self.p0
    }

    pub fn ps(&self) -> &[GroupElement] {
        &self.ps
    }

    pub fn p_last(&self) -> &GroupElement {
        &self.p_last
    }

    pub fn element_count(&self) -> usize {
        2 + self.ps.len()
    }
}

/// `UK_{T,R}`: a partial decryption key plus one PKBE header folded with the
/// time component. A child of a depth-`m` node gets `m + 5` elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HfuUpdateKey {
    node_id: HierId,
    epoch: u64,
    pdk: PartialDecryptionKey,
    si: BTreeSet<u32>,
    u0: GroupElement,
    u1: GroupElement,
    u2: GroupElement,
}

impl HfuUpdateKey {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        node_id: HierId,
        epoch: u64,
        pdk: PartialDecryptionKey,
        si: BTreeSet<u32>,
        u0: GroupElement,
        u1: GroupElement,
        u2: GroupElement,
    ) -> Self {
        HfuUpdateKey { node_id, epoch, pdk, si, u0, u1, u2 }
    }

    /// The node that issued this key (children of it consume it).
    pub fn node_id(&self) -> &HierId {
        &self.node_id
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn pdk(&self) -> &PartialDecryptionKey {
        &self.pdk
    }

    pub fn si(&self) -> &BTreeSet<u32> {
        &self.si
    }

    pub fn u0(&self) -> &GroupElement {
        &self.u0
    }

    pub fn u1(&self) -> &GroupElement {
        &self.u1
    }

    pub fn u2(&self) -> &GroupElement {
        &self.u2
    }

    pub fn element_count(&self) -> usize {
        self.pdk.element_count() + 3
    }
}

/// Issues `SK_ID` for a direct child; no parent private key is consumed.
pub fn genkey<R: RngCore + ?Sized>(
    params: &SystemParams,
    id: &HierId,
    st_parent: &mut NodeState,
    rng: &mut R,
) -> Result<HfuPrivateKey, SchemeError> {
    let depth = id.depth();
    if depth < 1 || depth > params.max_depth() {
        return Err(SchemeError::DepthOutOfRange(depth, params.max_depth()));
    }
    if id.parent().as_ref() != Some(st_parent.id()) {
        return Err(SchemeError::PrefixMismatch);
    }

    let group = params.group();
    let cid = encode_cid(id, params.profile(), params.max_depth())?;
    let secrets = st_parent.secrets_or_create(group, rng).clone();
    let d = st_parent.assign_index(id, params.n())?;
    let k_be = crate::pkbe::genkey(group, params.pkbe(), d, secrets.gamma())?;

    let r = group.sample_scalar(rng);
    let f1 = params.hibe().f_eval(group, 1, depth, cid.digest(depth))?;
    let k0 = group.mul(k_be.k(), &group.exp(&f1, &group.scalar_neg(&r)))?;
    let k1 = group.exp(&group.generator(1)?, &group.scalar_neg(&r));
    Ok(HfuPrivateKey { id: id.clone(), index: d, k0, k1 })
}

/// Issues `UK_{T,R}` for the node's children from its own decryption key
/// for the same epoch (`None` at the root, which needs no decryption key).
pub fn updatekey<R: RngCore + ?Sized>(
    params: &SystemParams,
    epoch: u64,
    rl: &RevocationList,
    dk_own: Option<&DecryptionKey>,
    st: &mut NodeState,
    rng: &mut R,
) -> Result<HfuUpdateKey, SchemeError> {
    let node_depth = st.id().depth();
    if rl.id() != st.id() {
        return Err(SchemeError::PrefixMismatch);
    }
    if let Some(last) = st.last_update_epoch() {
        if epoch < last {
            return Err(SchemeError::StaleEpoch {
                requested: epoch,
                last_update: last,
            });
        }
    }

    let group = params.group();
    let secrets = st.secrets_or_create(group, rng).clone();

    let pdk = match dk_own {
        None if node_depth == 0 => PartialDecryptionKey {
            p0: group.identity(2)?,
            ps: Vec::new(),
            p_last: group.identity(2)?,
        },
        Some(dk) if dk.id() == st.id() && dk.time().epoch() == epoch => {
            // strip the factor the child's derivation step reintroduces
            let mask = group.exp(params.g2_alpha_n1(), secrets.beta());
            PartialDecryptionKey {
                p0: group.mul(dk.d0(), &group.inv(&mask))?,
                ps: dk.ds().to_vec(),
                p_last: dk.d_last().clone(),
            }
        }
        Some(dk) if dk.id() == st.id() => {
            return Err(SchemeError::EpochMismatch {
                expected: epoch,
                got: dk.time().epoch(),
            });
        }
        _ => return Err(SchemeError::PrefixMismatch),
    };

    let time = encode_time(epoch, params.profile())?;
    let si = non_revoked_indices(rl, st, epoch, params.n());
    let g1 = group.generator(1)?;
    let y = group.exp(&g1, secrets.gamma());
    let (ch, _ek) = crate::pkbe::encaps(group, params.pkbe(), &si, secrets.beta(), &y)?;
    let rho = group.sample_scalar(rng);
    let u1 = group.mul(
        ch.e1(),
        &group.exp(&params.hibe().h_eval(group, 1, &time)?, &rho),
    )?;
    let u2 = group.exp(&g1, &group.scalar_neg(&rho));

    st.record_update_epoch(epoch);
    Ok(HfuUpdateKey {
        node_id: st.id().clone(),
        epoch,
        pdk,
        si,
        u0: ch.e0().clone(),
        u1,
        u2,
    })
}

/// Derives `DK_{ID,T}`, or reports revocation when the key's index is
/// outside the update key's non-revoked set.
pub fn derivekey<R: RngCore + ?Sized>(
    params: &SystemParams,
    sk: &HfuPrivateKey,
    uk: &HfuUpdateKey,
    rng: &mut R,
) -> Result<DecryptionKey, SchemeError> {
    if Some(uk.node_id()) != sk.id().parent().as_ref() {
        return Err(SchemeError::PrefixMismatch);
    }
    let d = sk.index;
    if !uk.si.contains(&d) {
        return Err(SchemeError::Revoked);
    }
    let group = params.group();
    let n = params.n();
    let x_d = params.pkbe().x(d)?;

    let lhs = group.pair(x_d, &uk.u1)?;
    let mut acc = sk.k0.clone();
    for &j in &uk.si {
        if j != d {
            acc = group.mul(&acc, params.pkbe().x(n + 1 - j + d)?)?;
        }
    }
    let a0 = group.mul(&lhs, &group.inv(&group.pair(&uk.u0, &acc)?))?;
    let a1 = group.pair(&uk.u0, &sk.k1)?;
    let a2 = group.pair(x_d, &uk.u2)?;

    let d0 = group.mul(&uk.pdk.p0, &a0)?;
    let mut ds = uk.pdk.ps.clone();
    ds.push(a1);
    let d_last = group.mul(&uk.pdk.p_last, &a2)?;

    let cid = encode_cid(sk.id(), params.profile(), params.max_depth())?;
    let time = encode_time(uk.epoch, params.profile())?;
    let tdk = HibeKey::from_parts(sk.id().clone(), cid, time, d0, ds, d_last);
    Ok(hibe::randkey(group, params.hibe(), &tdk, rng)?)
}
