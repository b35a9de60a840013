//! Modified Boneh-Boyen HIBE KEM with time-period binding, over the
//! 3-leveled group. Keys live in `G_2`, headers in `G_1`, session keys in
//! `G_3`.

use crate::identity::{encode_cid, ConcatId, HierId, IdentityError, Profile, TimePeriod};
use crate::mlgroup::{GroupDescription, GroupElement, GroupError, Scalar};
use rand::RngCore;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum HibeError {
    #[error("identity depth {0} out of range [1, {1}]")]
    DepthOutOfRange(usize, usize),
    #[error("parent identity is not a prefix of the child, or depths disagree")]
    PrefixMismatch,
    #[error("bit label has {0} bits, expected {1}")]
    BadLabelLength(usize, usize),
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One parameter vector `(v_0, {v_{j,b}})` of level-1 elements, evaluated as
/// `v_0 * prod_j v_{j,label[j]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamVec {
    base: GroupElement,
    per_bit: Vec<[GroupElement; 2]>,
}

impl ParamVec {
    fn sample<R: RngCore + ?Sized>(group: &GroupDescription, nbits: usize, rng: &mut R) -> Self {
        let g1 = group.generator(1).expect("level 1");
        let rand_elem = |rng: &mut R| group.exp(&g1, &group.sample_scalar(rng));
        let base = rand_elem(rng);
        let per_bit = (0..nbits)
            .map(|_| [rand_elem(rng), rand_elem(rng)])
            .collect();
        ParamVec { base, per_bit }
    }

    pub fn from_parts(base: GroupElement, per_bit: Vec<[GroupElement; 2]>) -> Self {
        ParamVec { base, per_bit }
    }

    pub fn base(&self) -> &GroupElement {
        &self.base
    }

    pub fn per_bit(&self) -> &[[GroupElement; 2]] {
        &self.per_bit
    }

    pub fn nbits(&self) -> usize {
        self.per_bit.len()
    }

    pub fn element_count(&self) -> usize {
        1 + 2 * self.per_bit.len()
    }

    /// Level-1 evaluation on a bit label of exactly `nbits` bits.
    pub fn eval_1(
        &self,
        group: &GroupDescription,
        label: &crate::identity::BitLabel,
    ) -> Result<GroupElement, HibeError> {
        if label.len() != self.per_bit.len() {
            return Err(HibeError::BadLabelLength(label.len(), self.per_bit.len()));
        }
        let mut acc = self.base.clone();
        for (j, pair) in self.per_bit.iter().enumerate() {
            acc = group.mul(&acc, &pair[label.bit(j) as usize])?;
        }
        Ok(acc)
    }

    /// Level-2 evaluation, obtained by pairing the level-1 value with `g_1`.
    pub fn eval_2(
        &self,
        group: &GroupDescription,
        label: &crate::identity::BitLabel,
    ) -> Result<GroupElement, HibeError> {
        let v1 = self.eval_1(group, label)?;
        Ok(group.pair(&v1, &group.generator(1)?)?)
    }
}

/// Public parameters: per-level identity vectors `f_i`, the time vector `h`,
/// and `Lambda = g_3^alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HibeParams {
    max_depth: usize,
    profile: Profile,
    f: Vec<ParamVec>,
    h: ParamVec,
    big_lambda: GroupElement,
}

impl HibeParams {
    pub fn from_parts(
        max_depth: usize,
        profile: Profile,
        f: Vec<ParamVec>,
        h: ParamVec,
        big_lambda: GroupElement,
    ) -> Self {
        debug_assert_eq!(f.len(), max_depth);
        HibeParams { max_depth, profile, f, h, big_lambda }
    }

    pub fn f_vecs(&self) -> &[ParamVec] {
        &self.f
    }

    pub fn h_vec(&self) -> &ParamVec {
        &self.h
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn session_base(&self) -> &GroupElement {
        &self.big_lambda
    }

    /// `F_{k,i}(ci)` for `k` in {1, 2} and `i` in `[1, L]`.
    pub fn f_eval(
        &self,
        group: &GroupDescription,
        k: u8,
        i: usize,
        ci: &crate::identity::BitLabel,
    ) -> Result<GroupElement, HibeError> {
        assert!(k == 1 || k == 2, "F is defined for levels 1 and 2");
        let vec = self
            .f
            .get(i - 1)
            .ok_or(HibeError::DepthOutOfRange(i, self.max_depth))?;
        if k == 1 {
            vec.eval_1(group, ci)
        } else {
            vec.eval_2(group, ci)
        }
    }

    /// `H_k(T)` for `k` in {1, 2}.
    pub fn h_eval(
        &self,
        group: &GroupDescription,
        k: u8,
        t: &TimePeriod,
    ) -> Result<GroupElement, HibeError> {
        assert!(k == 1 || k == 2, "H is defined for levels 1 and 2");
        if k == 1 {
            self.h.eval_1(group, t.label())
        } else {
            self.h.eval_2(group, t.label())
        }
    }

    /// Total group-element count: `L(2 l1 + 1) + (2 l2 + 1) + 1`.
    pub fn element_count(&self) -> usize {
        self.f.iter().map(ParamVec::element_count).sum::<usize>()
            + self.h.element_count()
            + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HibeMasterKey {
    alpha: Scalar,
}

impl HibeMasterKey {
    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }
}

/// A private key for `(ID, T)`: `(D_0, D_1..D_l, D_{L+1})`, all in `G_2`,
/// plus the bound identity and time used for the decryption-time match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HibeKey {
    id: HierId,
    cid: ConcatId,
    time: TimePeriod,
    d0: GroupElement,
    ds: Vec<GroupElement>,
    d_last: GroupElement,
}

impl HibeKey {
    pub fn from_parts(
        id: HierId,
        cid: ConcatId,
        time: TimePeriod,
        d0: GroupElement,
        ds: Vec<GroupElement>,
        d_last: GroupElement,
    ) -> Self {
        debug_assert_eq!(id.depth(), cid.depth());
        debug_assert_eq!(id.depth(), ds.len());
        HibeKey { id, cid, time, d0, ds, d_last }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn cid(&self) -> &ConcatId {
        &self.cid
    }

    pub fn time(&self) -> &TimePeriod {
        &self.time
    }

    pub fn depth(&self) -> usize {
        self.ds.len()
    }

    pub fn d0(&self) -> &GroupElement {
        &self.d0
    }

    pub fn ds(&self) -> &[GroupElement] {
        &self.ds
    }

    pub fn d_last(&self) -> &GroupElement {
        &self.d_last
    }

    pub fn element_count(&self) -> usize {
        2 + self.ds.len()
    }
}

/// A ciphertext header `(C_0, C_1..C_l, C_{L+1})`, all in `G_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HibeHeader {
    id: HierId,
    cid: ConcatId,
    time: TimePeriod,
    c0: GroupElement,
    cs: Vec<GroupElement>,
    c_last: GroupElement,
}

impl HibeHeader {
    pub fn from_parts(
        id: HierId,
        cid: ConcatId,
        time: TimePeriod,
        c0: GroupElement,
        cs: Vec<GroupElement>,
        c_last: GroupElement,
    ) -> Self {
        HibeHeader { id, cid, time, c0, cs, c_last }
    }

    pub fn id(&self) -> &HierId {
        &self.id
    }

    pub fn cid(&self) -> &ConcatId {
        &self.cid
    }

    pub fn time(&self) -> &TimePeriod {
        &self.time
    }

    pub fn depth(&self) -> usize {
        self.cs.len()
    }

    pub fn c0(&self) -> &GroupElement {
        &self.c0
    }

    pub fn cs(&self) -> &[GroupElement] {
        &self.cs
    }

    pub fn c_last(&self) -> &GroupElement {
        &self.c_last
    }

    pub fn element_count(&self) -> usize {
        2 + self.cs.len()
    }
}

pub fn setup<R: RngCore + ?Sized>(
    group: &GroupDescription,
    max_depth: usize,
    profile: Profile,
    rng: &mut R,
) -> (HibeMasterKey, HibeParams) {
    let alpha = group.sample_scalar(rng);
    let params = setup_with_master(group, max_depth, profile, &alpha, rng);
    (HibeMasterKey { alpha }, params)
}

/// Setup with a caller-supplied master exponent; the RHIBE schemes share one
/// `alpha` between the HIBE and PKBE sub-setups.
pub fn setup_with_master<R: RngCore + ?Sized>(
    group: &GroupDescription,
    max_depth: usize,
    profile: Profile,
    alpha: &Scalar,
    rng: &mut R,
) -> HibeParams {
    assert!(max_depth >= 1, "max depth must be at least 1");
    let f = (0..max_depth)
        .map(|_| ParamVec::sample(group, profile.l1(), rng))
        .collect();
    let h = ParamVec::sample(group, profile.l2(), rng);
    let big_lambda = group.exp(&group.generator(3).expect("level 3"), alpha);
    HibeParams { max_depth, profile, f, h, big_lambda }
}

pub fn genkey<R: RngCore + ?Sized>(
    group: &GroupDescription,
    params: &HibeParams,
    id: &HierId,
    time: &TimePeriod,
    mk: &HibeMasterKey,
    rng: &mut R,
) -> Result<HibeKey, HibeError> {
    let depth = id.depth();
    if depth < 1 || depth > params.max_depth {
        return Err(HibeError::DepthOutOfRange(depth, params.max_depth));
    }
    let cid = encode_cid(id, &params.profile, params.max_depth)?;
    let g2 = group.generator(2)?;
    let mut d0 = group.exp(&g2, mk.alpha());
    let mut ds = Vec::with_capacity(depth);
    for i in 1..=depth {
        let r = group.sample_scalar(rng);
        let f2 = params.f_eval(group, 2, i, cid.digest(i))?;
        d0 = group.mul(&d0, &group.exp(&f2, &r))?;
        ds.push(group.exp(&g2, &group.scalar_neg(&r)));
    }
    let r_last = group.sample_scalar(rng);
    let h2 = params.h_eval(group, 2, time)?;
    d0 = group.mul(&d0, &group.exp(&h2, &r_last))?;
    let d_last = group.exp(&g2, &group.scalar_neg(&r_last));
    Ok(HibeKey {
        id: id.clone(),
        cid,
        time: time.clone(),
        d0,
        ds,
        d_last,
    })
}

/// Folds fresh randomness into every key component; decapsulation behavior
/// is unchanged.
pub fn randkey<R: RngCore + ?Sized>(
    group: &GroupDescription,
    params: &HibeParams,
    key: &HibeKey,
    rng: &mut R,
) -> Result<HibeKey, HibeError> {
    let g2 = group.generator(2)?;
    let mut d0 = key.d0.clone();
    let mut ds = Vec::with_capacity(key.ds.len());
    for (i, d) in key.ds.iter().enumerate() {
        let r = group.sample_scalar(rng);
        let f2 = params.f_eval(group, 2, i + 1, key.cid.digest(i + 1))?;
        d0 = group.mul(&d0, &group.exp(&f2, &r))?;
        ds.push(group.mul(d, &group.exp(&g2, &group.scalar_neg(&r)))?);
    }
    let r_last = group.sample_scalar(rng);
    let h2 = params.h_eval(group, 2, &key.time)?;
    d0 = group.mul(&d0, &group.exp(&h2, &r_last))?;
    let d_last = group.mul(&key.d_last, &group.exp(&g2, &group.scalar_neg(&r_last)))?;
    Ok(HibeKey {
        id: key.id.clone(),
        cid: key.cid.clone(),
        time: key.time.clone(),
        d0,
        ds,
        d_last,
    })
}

/// Extends a parent key by one identity level, then re-randomizes.
pub fn delegate<R: RngCore + ?Sized>(
    group: &GroupDescription,
    params: &HibeParams,
    id_child: &HierId,
    key_parent: &HibeKey,
    rng: &mut R,
) -> Result<HibeKey, HibeError> {
    let depth = id_child.depth();
    if depth > params.max_depth {
        return Err(HibeError::DepthOutOfRange(depth, params.max_depth));
    }
    if key_parent.depth() + 1 != depth || !key_parent.id.is_prefix_of(id_child) {
        return Err(HibeError::PrefixMismatch);
    }
    let cid = encode_cid(id_child, &params.profile, params.max_depth)?;
    let g2 = group.generator(2)?;
    let r = group.sample_scalar(rng);
    let f2 = params.f_eval(group, 2, depth, cid.digest(depth))?;
    let d0 = group.mul(&key_parent.d0, &group.exp(&f2, &r))?;
    let mut ds = key_parent.ds.clone();
    ds.push(group.exp(&g2, &group.scalar_neg(&r)));
    let temp = HibeKey {
        id: id_child.clone(),
        cid,
        time: key_parent.time.clone(),
        d0,
        ds,
        d_last: key_parent.d_last.clone(),
    };
    randkey(group, params, &temp, rng)
}

pub fn encaps(
    group: &GroupDescription,
    params: &HibeParams,
    id: &HierId,
    time: &TimePeriod,
    s: &Scalar,
) -> Result<(HibeHeader, GroupElement), HibeError> {
    let depth = id.depth();
    if depth > params.max_depth {
        return Err(HibeError::DepthOutOfRange(depth, params.max_depth));
    }
    let cid = encode_cid(id, &params.profile, params.max_depth)?;
    let g1 = group.generator(1)?;
    let c0 = group.exp(&g1, s);
    let mut cs = Vec::with_capacity(depth);
    for i in 1..=depth {
        let f1 = params.f_eval(group, 1, i, cid.digest(i))?;
        cs.push(group.exp(&f1, s));
    }
    let c_last = group.exp(&params.h_eval(group, 1, time)?, s);
    let ek = group.exp(&params.big_lambda, s);
    Ok((
        HibeHeader {
            id: id.clone(),
            cid,
            time: time.clone(),
            c0,
            cs,
            c_last,
        },
        ek,
    ))
}

/// Returns the session key if the bound `(ID, T)` of key and header match,
/// `None` otherwise.
pub fn decaps(
    group: &GroupDescription,
    header: &HibeHeader,
    key: &HibeKey,
) -> Result<Option<GroupElement>, HibeError> {
    if header.cid != key.cid || header.time != key.time {
        return Ok(None);
    }
    let mut ek = group.pair(&header.c0, &key.d0)?;
    for (c, d) in header.cs.iter().zip(&key.ds) {
        ek = group.mul(&ek, &group.pair(c, d)?)?;
    }
    ek = group.mul(&ek, &group.pair(&header.c_last, &key.d_last)?)?;
    Ok(Some(ek))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::encode_time;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const L: usize = 3;

    fn setup_toy(seed: u64) -> (GroupDescription, Profile, HibeMasterKey, HibeParams, ChaCha20Rng) {
        let group = GroupDescription::setup(8, Some(0)).unwrap();
        let profile = Profile::new(8);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (mk, params) = setup(&group, L, profile, &mut rng);
        (group, profile, mk, params, rng)
    }

    /// All-zero byte source; every sampled scalar is 0.
    struct ZeroRng;
    impl RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 { 0 }
        fn next_u64(&mut self) -> u64 { 0 }
        fn fill_bytes(&mut self, dest: &mut [u8]) { dest.fill(0) }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
            dest.fill(0);
            Ok(())
        }
    }

    #[test]
    fn setup_element_count() {
        let (_, profile, _, params, _) = setup_toy(1);
        let expect = L * (2 * profile.l1() + 1) + (2 * profile.l2() + 1) + 1;
        assert_eq!(params.element_count(), expect);
    }

    #[test]
    fn session_base_is_g3_alpha() {
        let (group, _, mk, params, _) = setup_toy(2);
        assert_eq!(
            *params.session_base(),
            group.exp(&group.generator(3).unwrap(), mk.alpha())
        );
    }

    #[test]
    fn distinct_seeds_distinct_lambda() {
        let (_, _, _, p1, _) = setup_toy(3);
        let (_, _, _, p2, _) = setup_toy(4);
        assert_ne!(p1.session_base(), p2.session_base());
    }

    #[test]
    fn f2_matches_paired_f1() {
        let (group, profile, _, params, mut rng) = setup_toy(5);
        let id = HierId::new(["u"]).unwrap();
        let cid = encode_cid(&id, &profile, L).unwrap();
        let _ = &mut rng;
        let f1 = params.f_eval(&group, 1, 1, cid.digest(1)).unwrap();
        let f2 = params.f_eval(&group, 2, 1, cid.digest(1)).unwrap();
        assert_eq!(f2, group.pair(&f1, &group.generator(1).unwrap()).unwrap());
    }

    #[test]
    fn round_trip_all_depths() {
        let (group, profile, mk, params, mut rng) = setup_toy(6);
        let t = encode_time(3, &profile).unwrap();
        for depth in 1..=L {
            let id = HierId::new((0..depth).map(|i| format!("u{i}"))).unwrap();
            let key = genkey(&group, &params, &id, &t, &mk, &mut rng).unwrap();
            assert_eq!(key.element_count(), depth + 2);
            let s = group.sample_scalar(&mut rng);
            let (header, ek) = encaps(&group, &params, &id, &t, &s).unwrap();
            assert_eq!(header.element_count(), depth + 2);
            assert_eq!(decaps(&group, &header, &key).unwrap(), Some(ek));
        }
    }

    #[test]
    fn genkey_with_zero_randomness_exposes_master() {
        let (group, profile, mk, params, _) = setup_toy(7);
        let t = encode_time(0, &profile).unwrap();
        let id = HierId::new(["u"]).unwrap();
        let key = genkey(&group, &params, &id, &t, &mk, &mut ZeroRng).unwrap();
        assert_eq!(*key.d0(), group.exp(&group.generator(2).unwrap(), mk.alpha()));
    }

    #[test]
    fn genkey_depth_bounds() {
        let (group, profile, mk, params, mut rng) = setup_toy(8);
        let t = encode_time(0, &profile).unwrap();
        let too_deep = HierId::new(["a", "b", "c", "d"]).unwrap();
        assert!(matches!(
            genkey(&group, &params, &too_deep, &t, &mk, &mut rng),
            Err(HibeError::DepthOutOfRange(4, 3))
        ));
        assert!(genkey(&group, &params, &HierId::root(), &t, &mk, &mut rng).is_err());
    }

    #[test]
    fn randkey_preserves_decapsulation() {
        let (group, profile, mk, params, mut rng) = setup_toy(9);
        let t = encode_time(1, &profile).unwrap();
        let id = HierId::new(["a", "b"]).unwrap();
        let key = genkey(&group, &params, &id, &t, &mk, &mut rng).unwrap();
        let rand1 = randkey(&group, &params, &key, &mut rng).unwrap();
        let rand2 = randkey(&group, &params, &rand1, &mut rng).unwrap();
        assert_ne!(rand1.d0(), key.d0());
        assert_ne!(rand1.ds()[0], key.ds()[0]);
        let s = group.sample_scalar(&mut rng);
        let (header, ek) = encaps(&group, &params, &id, &t, &s).unwrap();
        assert_eq!(decaps(&group, &header, &rand1).unwrap(), Some(ek.clone()));
        assert_eq!(decaps(&group, &header, &rand2).unwrap(), Some(ek));
    }

    #[test]
    fn delegation_chain_decapsulates_like_direct_keys() {
        let (group, profile, mk, params, mut rng) = setup_toy(10);
        let t = encode_time(2, &profile).unwrap();
        let mut id = HierId::new(["r"]).unwrap();
        let mut key = genkey(&group, &params, &id, &t, &mk, &mut rng).unwrap();
        for c in ["s", "t"] {
            id = id.child(c).unwrap();
            key = delegate(&group, &params, &id, &key, &mut rng).unwrap();
            let s = group.sample_scalar(&mut rng);
            let (header, ek) = encaps(&group, &params, &id, &t, &s).unwrap();
            assert_eq!(decaps(&group, &header, &key).unwrap(), Some(ek.clone()));
            let direct = genkey(&group, &params, &id, &t, &mk, &mut rng).unwrap();
            assert_eq!(decaps(&group, &header, &direct).unwrap(), Some(ek));
        }
    }

    #[test]
    fn delegate_rejects_prefix_mismatch() {
        let (group, profile, mk, params, mut rng) = setup_toy(11);
        let t = encode_time(0, &profile).unwrap();
        let key_a = genkey(&group, &params, &HierId::new(["a"]).unwrap(), &t, &mk, &mut rng).unwrap();
        let unrelated = HierId::new(["b", "c"]).unwrap();
        assert!(matches!(
            delegate(&group, &params, &unrelated, &key_a, &mut rng),
            Err(HibeError::PrefixMismatch)
        ));
    }

    #[test]
    fn encaps_with_zero_exponent() {
        let (group, profile, _, params, _) = setup_toy(12);
        let t = encode_time(0, &profile).unwrap();
        let id = HierId::new(["a"]).unwrap();
        let zero = group.scalar_from_u64(0);
        let (header, ek) = encaps(&group, &params, &id, &t, &zero).unwrap();
        assert!(header.c0().is_identity());
        assert!(header.cs()[0].is_identity());
        assert!(header.c_last().is_identity());
        assert!(ek.is_identity());
    }

    #[test]
    fn decaps_rejects_mismatch() {
        let (group, profile, mk, params, mut rng) = setup_toy(13);
        let t0 = encode_time(0, &profile).unwrap();
        let t1 = encode_time(1, &profile).unwrap();
        let id = HierId::new(["a", "b"]).unwrap();
        let other = HierId::new(["a", "x"]).unwrap();
        let key = genkey(&group, &params, &id, &t0, &mk, &mut rng).unwrap();
        let s = group.sample_scalar(&mut rng);
        let (header_t1, _) = encaps(&group, &params, &id, &t1, &s).unwrap();
        assert_eq!(decaps(&group, &header_t1, &key).unwrap(), None);
        let (header_other, _) = encaps(&group, &params, &other, &t0, &s).unwrap();
        assert_eq!(decaps(&group, &header_other, &key).unwrap(), None);
    }
}
