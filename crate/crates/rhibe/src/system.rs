//! Shared machinery for the two RHIBE schemes: system parameters, per-node
//! state, revocation lists, and the scheme-agnostic encrypt/decrypt/revoke
//! operations. Decryption keys are plain HIBE keys bound to a time period,
//! so both schemes share `Ciphertext` and `DecryptionKey`.

use crate::hibe::{self, HibeError, HibeHeader, HibeKey, HibeParams};
use crate::identity::{encode_time, HierId, IdentityError, Profile};
use crate::mlgroup::{GroupDescription, GroupElement, GroupError, Scalar};
use crate::pkbe::{self, PkbeError, PkbeParams};
use rand::RngCore;
use std::collections::BTreeSet;
use thiserror::Error;

/// A short-term key for one `(identity, epoch)` pair; functionally an HIBE
/// key bound to the encoded time period.
pub type DecryptionKey = HibeKey;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("identity depth {0} out of range [1, {1}]")]
    DepthOutOfRange(usize, usize),
    #[error("parent key or state does not match the requested identity")]
    PrefixMismatch,
    #[error("identity {0} already has an assigned index")]
    DuplicateChild(HierId),
    #[error("all {0} child indices are assigned")]
    IndexExhausted(u32),
    #[error("no private key was generated for {0}")]
    UnknownChild(HierId),
    #[error("epoch {requested} is not after the last issued update key epoch {last_update}")]
    StaleEpoch { requested: u64, last_update: u64 },
    #[error("update artifact epoch {got} does not match requested epoch {expected}")]
    EpochMismatch { expected: u64, got: u64 },
    #[error("identity is revoked at this epoch")]
    Revoked,
    #[error("identity or time period does not match")]
    Mismatch,
    #[error("message must be a level-3 group element")]
    BadMessage,
    #[error(transparent)]
    Hibe(#[from] HibeError),
    #[error(transparent)]
    Pkbe(#[from] PkbeError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

/// Public parameters shared by both schemes: the group, the HIBE and PKBE
/// sub-parameters, and the three extra elements
/// `g_2^{alpha^{N+1}}`, `g_2^{beta_eps}`, `Omega = g_3^{alpha^{N+1} beta_eps}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemParams {
    group: GroupDescription,
    profile: Profile,
    n: u32,
    max_depth: usize,
    hibe: HibeParams,
    pkbe: PkbeParams,
    g2_alpha_n1: GroupElement,
    g2_beta_eps: GroupElement,
    omega: GroupElement,
}

impl SystemParams {
    pub fn group(&self) -> &GroupDescription {
        &self.group
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn hibe(&self) -> &HibeParams {
        &self.hibe
    }

    pub fn pkbe(&self) -> &PkbeParams {
        &self.pkbe
    }

    pub fn g2_alpha_n1(&self) -> &GroupElement {
        &self.g2_alpha_n1
    }

    pub fn g2_beta_eps(&self) -> &GroupElement {
        &self.g2_beta_eps
    }

    pub fn omega(&self) -> &GroupElement {
        &self.omega
    }

    /// HIBE count + PKBE count + the three combined-scheme elements.
    pub fn element_count(&self) -> usize {
        self.hibe.element_count() + self.pkbe.element_count() + 3
    }

    pub fn from_parts(
        group: GroupDescription,
        profile: Profile,
        n: u32,
        max_depth: usize,
        hibe: HibeParams,
        pkbe: PkbeParams,
        g2_alpha_n1: GroupElement,
        g2_beta_eps: GroupElement,
        omega: GroupElement,
    ) -> Self {
        SystemParams {
            group,
            profile,
            n,
            max_depth,
            hibe,
            pkbe,
            g2_alpha_n1,
            g2_beta_eps,
            omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterKey {
    alpha: Scalar,
}

impl MasterKey {
    pub fn new(alpha: Scalar) -> Self {
        MasterKey { alpha }
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }
}

/// Per-node secrets `(beta, gamma)`, created lazily and at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSecrets {
    beta: Scalar,
    gamma: Scalar,
}

impl NodeSecrets {
    pub fn new(beta: Scalar, gamma: Scalar) -> Self {
        NodeSecrets { beta, gamma }
    }

    pub fn beta(&self) -> &Scalar {
        &self.beta
    }

    pub fn gamma(&self) -> &Scalar {
        &self.gamma
    }
}

/// The state `ST_ID` a node keeps about its children: its secrets, the
/// child-to-index assignments, and the epoch of the last issued update key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    id: HierId,
    secrets: Option<NodeSecrets>,
    assignments: Vec<(HierId, u32)>,
    last_update_epoch: Option<u64>,
}

impl NodeState {
    pub fn new(id: HierId) -> Self {
        NodeState {
            id,
            secrets: None,
            assignments: Vec::new(),
            last_update_epoch: None,
        }
    }

    pub fn from_parts(
        id: HierId,
        secrets: Option<NodeSecrets>,
        assignments: Vec<(HierId, u32)>,
        last_update_epoch: Option<u64>,
    ) -> Self {
        NodeState { id, secrets, assignments, last_update_epoch }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn secrets(&self) -> Option<&NodeSecrets> {
        self.secrets.as_ref()
    }

    pub fn assignments(&self) -> &[(HierId, u32)] {
        &self.assignments
    }

    pub fn last_update_epoch(&self) -> Option<u64> {
        self.last_update_epoch
    }

    pub fn set_secrets(&mut self, secrets: NodeSecrets) {
        assert!(self.secrets.is_none(), "node secrets are created at most once");
        self.secrets = Some(secrets);
    }

    /// Retrieves `(beta, gamma)`, creating them on first use.
    pub fn secrets_or_create<R: RngCore + ?Sized>(
        &mut self,
        group: &GroupDescription,
        rng: &mut R,
    ) -> &NodeSecrets {
        if self.secrets.is_none() {
            let beta = group.sample_scalar(rng);
            let gamma = group.sample_scalar(rng);
            self.secrets = Some(NodeSecrets { beta, gamma });
        }
        self.secrets.as_ref().unwrap()
    }

    pub fn index_of(&self, child: &HierId) -> Option<u32> {
        self.assignments
            .iter()
            .find(|(id, _)| id == child)
            .map(|&(_, d)| d)
    }

    /// Assigns the smallest unused index in `[1, N]` to the child.
    pub fn assign_index(&mut self, child: &HierId, n: u32) -> Result<u32, SchemeError> {
        if self.index_of(child).is_some() {
            return Err(SchemeError::DuplicateChild(child.clone()));
        }
        let used: BTreeSet<u32> = self.assignments.iter().map(|&(_, d)| d).collect();
        let d = (1..=n)
            .find(|d| !used.contains(d))
            .ok_or(SchemeError::IndexExhausted(n))?;
        self.assignments.push((child.clone(), d));
        Ok(d)
    }

    pub fn record_update_epoch(&mut self, epoch: u64) {
        self.last_update_epoch = Some(epoch);
    }
}

/// The revocation list `RL_ID`: timestamped revocations of direct children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevocationList {
    id: HierId,
    entries: Vec<(HierId, u64)>,
}

impl RevocationList {
    pub fn new(id: HierId) -> Self {
        RevocationList { id, entries: Vec::new() }
    }

    pub fn from_parts(id: HierId, entries: Vec<(HierId, u64)>) -> Self {
        RevocationList { id, entries }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn entries(&self) -> &[(HierId, u64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Children revoked at `epoch`: revocations persist, so every entry with
    /// revocation time at or before `epoch` counts.
    pub fn revoked_at(&self, epoch: u64) -> BTreeSet<&HierId> {
        self.entries
            .iter()
            .filter(|&&(_, t)| t <= epoch)
            .map(|(id, _)| id)
            .collect()
    }

    fn push(&mut self, child: HierId, epoch: u64) {
        self.entries.push((child, epoch));
    }
}

/// A masked message in `G_3` plus the HIBE ciphertext header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext {
    c: GroupElement,
    header: HibeHeader,
}

impl Ciphertext {
    pub fn from_parts(c: GroupElement, header: HibeHeader) -> Self {
        Ciphertext { c, header }
    }

    pub fn c(&self) -> &GroupElement {
        &self.c
    }

    pub fn header(&self) -> &HibeHeader {
        &self.header
    }

    pub fn element_count(&self) -> usize {
        1 + self.header.element_count()
    }
}

/// Setup shared by both schemes: one `alpha` drives the PKBE powers and the
/// HIBE session base, `gamma_eps` is the PKBE master `gamma`, `beta_eps` is
/// fresh.
pub fn setup<R: RngCore + ?Sized>(
    lambda: u32,
    n: u32,
    max_depth: usize,
    rng: &mut R,
) -> Result<(MasterKey, RevocationList, NodeState, SystemParams), SchemeError> {
    let group = GroupDescription::setup(lambda, None)?;
    let profile = Profile::new(lambda);
    let (pkbe_mk, pkbe_params, _y) = pkbe::setup(&group, n, rng)?;
    let alpha = pkbe_mk.alpha().clone();
    let hibe_params = hibe::setup_with_master(&group, max_depth, profile, &alpha, rng);
    let beta_eps = group.sample_scalar(rng);

    let g2 = group.generator(2)?;
    let g3 = group.generator(3)?;
    let alpha_n1 = group.scalar_pow(&alpha, (n + 1) as u64);
    let g2_alpha_n1 = group.exp(&g2, &alpha_n1);
    let g2_beta_eps = group.exp(&g2, &beta_eps);
    let omega = group.exp(&g3, &group.scalar_mul(&alpha_n1, &beta_eps));

    let mut root_state = NodeState::new(HierId::root());
    root_state.set_secrets(NodeSecrets {
        beta: beta_eps,
        gamma: pkbe_mk.gamma().clone(),
    });

    Ok((
        MasterKey { alpha },
        RevocationList::new(HierId::root()),
        root_state,
        SystemParams {
            group,
            profile,
            n,
            max_depth,
            hibe: hibe_params,
            pkbe: pkbe_params,
            g2_alpha_n1,
            g2_beta_eps,
            omega,
        },
    ))
}

/// `C = Omega^s * M` plus an HIBE header under the same `s`.
pub fn encrypt<R: RngCore + ?Sized>(
    params: &SystemParams,
    id: &HierId,
    epoch: u64,
    message: &GroupElement,
    rng: &mut R,
) -> Result<Ciphertext, SchemeError> {
    if message.level() != 3 {
        return Err(SchemeError::BadMessage);
    }
    let depth = id.depth();
    if depth < 1 || depth > params.max_depth {
        return Err(SchemeError::DepthOutOfRange(depth, params.max_depth));
    }
    let group = &params.group;
    let time = encode_time(epoch, &params.profile)?;
    let s = group.sample_scalar(rng);
    let (header, _hibe_ek) = hibe::encaps(group, &params.hibe, id, &time, &s)?;
    let c = group.mul(&group.exp(&params.omega, &s), message)?;
    Ok(Ciphertext { c, header })
}

/// Recovers the message when the decryption key matches the ciphertext's
/// `(ID, T)`; the session key of a derived key is `Omega^s`.
pub fn decrypt(
    params: &SystemParams,
    ct: &Ciphertext,
    dk: &DecryptionKey,
) -> Result<GroupElement, SchemeError> {
    let group = &params.group;
    match hibe::decaps(group, &ct.header, dk)? {
        Some(ek) => Ok(group.mul(&ct.c, &group.inv(&ek))?),
        None => Err(SchemeError::Mismatch),
    }
}

/// Adds `(ID, T)` to the parent's revocation list. Rejected if no key was
/// generated for the child or an update key for an epoch `>= T` was already
/// issued.
pub fn revoke(
    id: &HierId,
    epoch: u64,
    rl: &mut RevocationList,
    st: &NodeState,
) -> Result<(), SchemeError> {
    if id.parent().as_ref() != Some(st.id()) || rl.id() != st.id() {
        return Err(SchemeError::PrefixMismatch);
    }
    if st.index_of(id).is_none() {
        return Err(SchemeError::UnknownChild(id.clone()));
    }
    if let Some(last) = st.last_update_epoch {
        if epoch <= last {
            return Err(SchemeError::StaleEpoch {
                requested: epoch,
                last_update: last,
            });
        }
    }
    rl.push(id.clone(), epoch);
    Ok(())
}

/// Non-revoked index set `SI = [N] \ RI` at `epoch`, from the revocation
/// list and the state's index assignments.
pub(crate) fn non_revoked_indices(
    rl: &RevocationList,
    st: &NodeState,
    epoch: u64,
    n: u32,
) -> BTreeSet<u32> {
    let revoked_ids = rl.revoked_at(epoch);
    let revoked_indices: BTreeSet<u32> = st
        .assignments
        .iter()
        .filter(|(id, _)| revoked_ids.contains(id))
        .map(|&(_, d)| d)
        .collect();
    (1..=n).filter(|d| !revoked_indices.contains(d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn setup_invariants() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (mk, rl, st, params) = setup(8, 4, 3, &mut rng).unwrap();
        assert!(rl.is_empty());
        assert!(st.secrets().is_some());
        assert!(st.assignments().is_empty());
        let group = params.group();
        // Omega = e(e(g_1^alpha, X_N), g_1^{beta_eps})
        let g1 = group.generator(1).unwrap();
        let g1_alpha = group.exp(&g1, mk.alpha());
        let x_n = params.pkbe().x(4).unwrap();
        let beta_eps = st.secrets().unwrap().beta();
        let lhs = group
            .pair(
                &group.pair(&g1_alpha, x_n).unwrap(),
                &group.exp(&g1, beta_eps),
            )
            .unwrap();
        assert_eq!(lhs, *params.omega());
        // consistency of the published helper elements
        assert_eq!(
            group.pair(params.g2_alpha_n1(), &group.exp(&g1, beta_eps)).unwrap(),
            *params.omega()
        );
        assert_eq!(
            *params.g2_beta_eps(),
            group.exp(&group.generator(2).unwrap(), beta_eps)
        );
        // PP count = HIBE count + PKBE count + 3
        assert_eq!(
            params.element_count(),
            params.hibe().element_count() + params.pkbe().element_count() + 3
        );
    }

    #[test]
    fn index_assignment_is_smallest_unused() {
        let mut st = NodeState::new(HierId::root());
        let a = HierId::new(["a"]).unwrap();
        let b = HierId::new(["b"]).unwrap();
        let c = HierId::new(["c"]).unwrap();
        assert_eq!(st.assign_index(&a, 2).unwrap(), 1);
        assert_eq!(st.assign_index(&b, 2).unwrap(), 2);
        assert!(matches!(
            st.assign_index(&c, 2),
            Err(SchemeError::IndexExhausted(2))
        ));
        assert!(matches!(
            st.assign_index(&a, 2),
            Err(SchemeError::DuplicateChild(_))
        ));
    }

    #[test]
    fn revocations_persist_over_time() {
        let mut rl = RevocationList::new(HierId::root());
        let a = HierId::new(["a"]).unwrap();
        rl.push(a.clone(), 2);
        assert!(rl.revoked_at(1).is_empty());
        assert!(rl.revoked_at(2).contains(&a));
        assert!(rl.revoked_at(9).contains(&a));
    }

    #[test]
    fn revoke_preconditions() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let (_, mut rl, mut st, _params) = setup(8, 4, 3, &mut rng).unwrap();
        let a = HierId::new(["a"]).unwrap();
        assert!(matches!(
            revoke(&a, 1, &mut rl, &st),
            Err(SchemeError::UnknownChild(_))
        ));
        st.assign_index(&a, 4).unwrap();
        revoke(&a, 1, &mut rl, &st).unwrap();
        st.record_update_epoch(3);
        assert!(matches!(
            revoke(&a, 3, &mut rl, &st),
            Err(SchemeError::StaleEpoch { .. })
        ));
        revoke(&a, 4, &mut rl, &st).unwrap();
    }
}
