//! RHIBE with history-preserving updates: private keys and update keys
//! carry one sub-key per ancestor level, and a node needs its parent's
//! update key to issue its own. Delegated private keys are blinded with
//! randomness that cancels during decryption-key derivation.

use crate::hibe::{self, HibeKey};
use crate::identity::{encode_cid, encode_time, HierId};
use crate::mlgroup::GroupElement;
use crate::system::{
    non_revoked_indices, DecryptionKey, NodeState, RevocationList, SchemeError, SystemParams,
};
use rand::RngCore;
use std::collections::BTreeSet;

pub use crate::system::{setup, encrypt, decrypt, revoke, Ciphertext, MasterKey};

/// One level of a private key: `(K_0, K_1)` in `G_1` and the blinding pair
/// `(R_0, R_1)` in `G_2` (identities at the leaf level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpuLevelKey {
    index: u32,
    k0: GroupElement,
    k1: GroupElement,
    r0: GroupElement,
    r1: GroupElement,
}

impl HpuLevelKey {
    pub fn from_parts(
        index: u32,
        k0: GroupElement,
        k1: GroupElement,
        r0: GroupElement,
        r1: GroupElement,
    ) -> Self {
        HpuLevelKey { index, k0, k1, r0, r1 }
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

    pub fn r0(&self) -> &GroupElement {
        &self.r0
    }

    pub fn r1(&self) -> &GroupElement {
        &self.r1
    }
}

/// `SK_ID`: one `HpuLevelKey` per level, 4 elements each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpuPrivateKey {
    id: HierId,
    levels: Vec<HpuLevelKey>,
}

impl HpuPrivateKey {
    pub fn from_parts(id: HierId, levels: Vec<HpuLevelKey>) -> Self {
        debug_assert_eq!(id.depth(), levels.len());
        HpuPrivateKey { id, levels }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[HpuLevelKey] {
        &self.levels
    }

    pub fn element_count(&self) -> usize {
        4 * self.levels.len()
    }
}

/// One level of an update key: the non-revoked index set of that ancestor
/// and `(U_0, U_1, U_2)` in `G_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpuLevelUpdate {
    si: BTreeSet<u32>,
    u0: GroupElement,
    u1: GroupElement,
    u2: GroupElement,
}

impl HpuLevelUpdate {
    pub fn from_parts(
        si: BTreeSet<u32>,
        u0: GroupElement,
        u1: GroupElement,
        u2: GroupElement,
    ) -> Self {
        HpuLevelUpdate { si, u0, u1, u2 }
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
}

/// `UK_{T,R}` issued by a depth-`m` node: levels `0..m`, 3 elements each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HpuUpdateKey {
    node_id: HierId,
    epoch: u64,
    levels: Vec<HpuLevelUpdate>,
}

impl HpuUpdateKey {
    pub fn from_parts(node_id: HierId, epoch: u64, levels: Vec<HpuLevelUpdate>) -> Self {
        HpuUpdateKey { node_id, epoch, levels }
    }

    /// The node that issued this key (children of it consume it).
    pub fn node_id(&self) -> &HierId {
        &self.node_id
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn levels(&self) -> &[HpuLevelUpdate] {
        &self.levels
    }

    pub fn element_count(&self) -> usize {
        3 * self.levels.len()
    }
}

/// Issues `SK_ID` for a depth-`l` child. The parent's leaf level is
/// re-blinded with fresh randomness whose cancellation element is stored in
/// `(R_0, R_1)`; the new leaf level wraps a PKBE key under the parent's
/// `gamma`.
pub fn genkey<R: RngCore + ?Sized>(
    params: &SystemParams,
    id: &HierId,
    sk_parent: Option<&HpuPrivateKey>,
    st_parent: &mut NodeState,
    rng: &mut R,
) -> Result<HpuPrivateKey, SchemeError> {
    let depth = id.depth();
    if depth < 1 || depth > params.max_depth() {
        return Err(SchemeError::DepthOutOfRange(depth, params.max_depth()));
    }
    if id.parent().as_ref() != Some(st_parent.id()) {
        return Err(SchemeError::PrefixMismatch);
    }
    match sk_parent {
        None if depth == 1 => {}
        Some(pk) if pk.depth() == depth - 1 && pk.id().is_prefix_of(id) => {}
        _ => return Err(SchemeError::PrefixMismatch),
    }

    let group = params.group();
    let g1 = group.generator(1)?;
    let g2 = group.generator(2)?;
    let cid = encode_cid(id, params.profile(), params.max_depth())?;
    let secrets = st_parent.secrets_or_create(group, rng).clone();

    let mut levels: Vec<HpuLevelKey> = Vec::with_capacity(depth);
    if let Some(parent) = sk_parent {
        // levels 1..l-2 are copied as-is
        levels.extend_from_slice(&parent.levels[..depth - 2]);
        // re-blind the parent's leaf level l-1
        let leaf = &parent.levels[depth - 2];
        let r2 = group.sample_scalar(rng);
        let k0 = group.mul(&leaf.k0, &group.exp(&g1, &group.scalar_neg(&r2)))?;
        let r0 = group.exp(&g2, secrets.beta());
        // blinding base g_2^{beta_{l-2}}: the parent-of-parent's beta element
        let base = if depth == 2 {
            params.g2_beta_eps()
        } else {
            &parent.levels[depth - 3].r0
        };
        let r1 = group.mul(
            &group.exp(params.g2_alpha_n1(), secrets.beta()),
            &group.exp(base, &r2),
        )?;
        levels.push(HpuLevelKey {
            index: leaf.index,
            k0,
            k1: leaf.k1.clone(),
            r0,
            r1,
        });
    }

    let d = st_parent.assign_index(id, params.n())?;
    let k_be = crate::pkbe::genkey(group, params.pkbe(), d, secrets.gamma())?;
    let r1_exp = group.sample_scalar(rng);
    let f1 = params
        .hibe()
        .f_eval(group, 1, depth, cid.digest(depth))?;
    let k0 = group.mul(
        k_be.k(),
        &group.exp(&f1, &group.scalar_neg(&r1_exp)),
    )?;
    levels.push(HpuLevelKey {
        index: d,
        k0,
        k1: group.exp(&g1, &group.scalar_neg(&r1_exp)),
        r0: group.identity(2)?,
        r1: group.identity(2)?,
    });

    Ok(HpuPrivateKey { id: id.clone(), levels })
}

/// Issues `UK_{T,R}` for the node's children, extending the parent's update
/// key for the same epoch by one level.
pub fn updatekey<R: RngCore + ?Sized>(
    params: &SystemParams,
    epoch: u64,
    rl: &RevocationList,
    uk_parent: Option<&HpuUpdateKey>,
    st: &mut NodeState,
    rng: &mut R,
) -> Result<HpuUpdateKey, SchemeError> {
    let node_depth = st.id().depth();
    if rl.id() != st.id() {
        return Err(SchemeError::PrefixMismatch);
    }
    match uk_parent {
        None if node_depth == 0 => {}
        Some(uk) if Some(uk.node_id()) == st.id().parent().as_ref() => {
            if uk.epoch != epoch {
                return Err(SchemeError::EpochMismatch {
                    expected: epoch,
                    got: uk.epoch,
                });
            }
            debug_assert_eq!(uk.levels.len(), node_depth);
        }
        _ => return Err(SchemeError::PrefixMismatch),
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
    let g1 = group.generator(1)?;
    let time = encode_time(epoch, params.profile())?;
    let secrets = st.secrets_or_create(group, rng).clone();
    let si = non_revoked_indices(rl, st, epoch, params.n());

    let y = group.exp(&g1, secrets.gamma());
    let (ch, _ek) = crate::pkbe::encaps(group, params.pkbe(), &si, secrets.beta(), &y)?;
    let r = group.sample_scalar(rng);
    let u1 = group.mul(
        ch.e1(),
        &group.exp(&params.hibe().h_eval(group, 1, &time)?, &r),
    )?;
    let level = HpuLevelUpdate {
        si,
        u0: ch.e0().clone(),
        u1,
        u2: group.exp(&g1, &group.scalar_neg(&r)),
    };

    let mut levels = uk_parent.map(|uk| uk.levels.clone()).unwrap_or_default();
    levels.push(level);
    st.record_update_epoch(epoch);
    Ok(HpuUpdateKey {
        node_id: st.id().clone(),
        epoch,
        levels,
    })
}

/// Derives `DK_{ID,T}` from a private key and the parent's update key, or
/// reports revocation when any level's index is outside the non-revoked
/// set. The per-level blinding terms cancel against the `R_1` elements.
pub fn derivekey<R: RngCore + ?Sized>(
    params: &SystemParams,
    sk: &HpuPrivateKey,
    uk: &HpuUpdateKey,
    rng: &mut R,
) -> Result<DecryptionKey, SchemeError> {
    let tdk = derive_temporal_key(params, sk, uk)?;
    Ok(hibe::randkey(params.group(), params.hibe(), &tdk, rng)?)
}

/// The un-randomized temporal decryption key; `derivekey` re-randomizes it.
/// Exposed so the cancellation identity can be checked in the exponent
/// backend.
pub fn derive_temporal_key(
    params: &SystemParams,
    sk: &HpuPrivateKey,
    uk: &HpuUpdateKey,
) -> Result<HibeKey, SchemeError> {
    let depth = sk.depth();
    if Some(uk.node_id()) != sk.id().parent().as_ref() || uk.levels.len() != depth {
        return Err(SchemeError::PrefixMismatch);
    }
    let group = params.group();
    for (lsk, luk) in sk.levels.iter().zip(&uk.levels) {
        if !luk.si.contains(&lsk.index) {
            return Err(SchemeError::Revoked);
        }
    }

    let n = params.n();
    let mut d0 = group.identity(2)?;
    let mut ds = Vec::with_capacity(depth);
    let mut d_last = group.identity(2)?;
    for (lsk, luk) in sk.levels.iter().zip(&uk.levels) {
        let d = lsk.index;
        let x_d = params.pkbe().x(d)?;
        let lhs = group.pair(x_d, &luk.u1)?;
        let mut acc = lsk.k0.clone();
        for &j in &luk.si {
            if j != d {
                acc = group.mul(&acc, params.pkbe().x(n + 1 - j + d)?)?;
            }
        }
        let a0 = group.mul(&lhs, &group.inv(&group.pair(&luk.u0, &acc)?))?;
        let a1 = group.pair(&luk.u0, &lsk.k1)?;
        let a2 = group.pair(x_d, &luk.u2)?;

        d0 = group.mul(&d0, &a0)?;
        ds.push(a1);
        d_last = group.mul(&d_last, &a2)?;
    }
    // multiply in the inverses of the blinding elements R_{i,1}, i < depth
    for lsk in &sk.levels[..depth - 1] {
        d0 = group.mul(&d0, &group.inv(&lsk.r1))?;
    }

    let cid = encode_cid(sk.id(), params.profile(), params.max_depth())?;
    let time = encode_time(uk.epoch, params.profile())?;
    Ok(HibeKey::from_parts(sk.id().clone(), cid, time, d0, ds, d_last))
}
