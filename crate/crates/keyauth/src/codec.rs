//! Binary payload encoding for workspace artifacts. Everything is
//! big-endian and length-prefixed; group elements and scalars reuse the
//! group's own fixed-width serialization, so equal inputs always produce
//! identical bytes.

use crate::error::{Error, Result};
use crate::Scheme;
use rhibe::hfu::{HfuPrivateKey, HfuUpdateKey, PartialDecryptionKey};
use rhibe::hibe::{HibeHeader, HibeParams, ParamVec};
use rhibe::hpu::{HpuLevelKey, HpuLevelUpdate, HpuPrivateKey, HpuUpdateKey};
use rhibe::identity::{encode_cid, encode_time, Profile};
use rhibe::pkbe::PkbeParams;
use rhibe::system::{Ciphertext, NodeSecrets};
use rhibe::{
    DecryptionKey, GroupDescription, GroupElement, HierId, MasterKey, NodeState, RevocationList,
    Scalar, SystemParams,
};
use std::collections::BTreeSet;

pub struct Enc {
    buf: Vec<u8>,
}

impl Enc {
    pub fn new() -> Self {
        Enc { buf: Vec::new() }
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.u32(v.len() as u32);
        self.buf.extend_from_slice(v);
    }

    pub fn str(&mut self, v: &str) {
        self.bytes(v.as_bytes());
    }

    pub fn id(&mut self, v: &HierId) {
        self.str(&v.to_path());
    }

    pub fn elem(&mut self, group: &GroupDescription, v: &GroupElement) {
        self.bytes(&group.serialize_element(v));
    }

    pub fn scalar(&mut self, group: &GroupDescription, v: &Scalar) {
        self.bytes(&group.serialize_scalar(v));
    }

    pub fn set(&mut self, v: &BTreeSet<u32>) {
        self.u32(v.len() as u32);
        for &x in v {
            self.u32(x);
        }
    }
}

impl Default for Enc {
    fn default() -> Self {
        Enc::new()
    }
}

pub struct Dec<'a> {
    data: &'a [u8],
    pos: usize,
}

fn corrupt(what: &str) -> Error {
    Error::Integrity(format!("malformed artifact payload: {what}"))
}

impl<'a> Dec<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Dec { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(corrupt("truncated"));
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn str(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec()).map_err(|_| corrupt("non-utf8 string"))
    }

    pub fn id(&mut self) -> Result<HierId> {
        let path = self.str()?;
        HierId::from_path(&path).map_err(|_| corrupt("bad identity path"))
    }

    pub fn elem(&mut self, group: &GroupDescription) -> Result<GroupElement> {
        let raw = self.bytes()?;
        group
            .deserialize_element(raw)
            .map_err(|e| corrupt(&e.to_string()))
    }

    pub fn scalar(&mut self, group: &GroupDescription) -> Result<Scalar> {
        let raw = self.bytes()?;
        group
            .deserialize_scalar(raw)
            .map_err(|e| corrupt(&e.to_string()))
    }

    pub fn set(&mut self) -> Result<BTreeSet<u32>> {
        let n = self.u32()?;
        (0..n).map(|_| self.u32()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    pub scheme: Scheme,
    pub lambda: u32,
    pub n: u32,
    pub max_depth: usize,
}

pub fn encode_config(c: &Config) -> Vec<u8> {
    let mut e = Enc::new();
    e.u8(c.scheme as u8);
    e.u32(c.lambda);
    e.u32(c.n);
    e.u32(c.max_depth as u32);
    e.finish()
}

pub fn decode_config(payload: &[u8]) -> Result<Config> {
    let mut d = Dec::new(payload);
    let scheme = Scheme::from_byte(d.u8()?).ok_or_else(|| corrupt("unknown scheme"))?;
    let c = Config {
        scheme,
        lambda: d.u32()?,
        n: d.u32()?,
        max_depth: d.u32()? as usize,
    };
    d.finish()?;
    Ok(c)
}

fn encode_param_vec(e: &mut Enc, group: &GroupDescription, v: &ParamVec) {
    e.elem(group, v.base());
    e.u32(v.nbits() as u32);
    for pair in v.per_bit() {
        e.elem(group, &pair[0]);
        e.elem(group, &pair[1]);
    }
}

fn decode_param_vec(d: &mut Dec, group: &GroupDescription) -> Result<ParamVec> {
    let base = d.elem(group)?;
    let nbits = d.u32()?;
    let per_bit = (0..nbits)
        .map(|_| Ok([d.elem(group)?, d.elem(group)?]))
        .collect::<Result<_>>()?;
    Ok(ParamVec::from_parts(base, per_bit))
}

pub fn encode_params(p: &SystemParams) -> Vec<u8> {
    let group = p.group();
    let mut e = Enc::new();
    e.u32(group.lambda());
    e.bytes(&group.prime().to_bytes_be());
    e.u32(p.n());
    e.u32(p.max_depth() as u32);
    for f in p.hibe().f_vecs() {
        encode_param_vec(&mut e, group, f);
    }
    encode_param_vec(&mut e, group, p.hibe().h_vec());
    e.elem(group, p.hibe().session_base());
    for x in p.pkbe().xs() {
        e.elem(group, x);
    }
    e.elem(group, p.pkbe().gamma_cap());
    e.elem(group, p.g2_alpha_n1());
    e.elem(group, p.g2_beta_eps());
    e.elem(group, p.omega());
    e.finish()
}

pub fn decode_params(payload: &[u8]) -> Result<SystemParams> {
    let mut d = Dec::new(payload);
    let lambda = d.u32()?;
    let prime = d.bytes()?.to_vec();
    let group = GroupDescription::setup(lambda, None)
        .map_err(|e| corrupt(&format!("group setup: {e}")))?;
    if group.prime().to_bytes_be() != prime {
        return Err(corrupt("stored prime disagrees with the derived group"));
    }
    let profile = Profile::new(lambda);
    let n = d.u32()?;
    let max_depth = d.u32()? as usize;
    let f = (0..max_depth)
        .map(|_| decode_param_vec(&mut d, &group))
        .collect::<Result<_>>()?;
    let h = decode_param_vec(&mut d, &group)?;
    let big_lambda = d.elem(&group)?;
    let hibe = HibeParams::from_parts(max_depth, profile, f, h, big_lambda);
    let xs = (0..2 * n as usize - 1)
        .map(|_| d.elem(&group))
        .collect::<Result<_>>()?;
    let gamma_cap = d.elem(&group)?;
    let pkbe = PkbeParams::from_parts(n, xs, gamma_cap);
    let g2_alpha_n1 = d.elem(&group)?;
    let g2_beta_eps = d.elem(&group)?;
    let omega = d.elem(&group)?;
    d.finish()?;
    Ok(SystemParams::from_parts(
        group, profile, n, max_depth, hibe, pkbe, g2_alpha_n1, g2_beta_eps, omega,
    ))
}

pub fn encode_master_key(group: &GroupDescription, mk: &MasterKey) -> Vec<u8> {
    let mut e = Enc::new();
    e.scalar(group, mk.alpha());
    e.finish()
}

pub fn decode_master_key(group: &GroupDescription, payload: &[u8]) -> Result<MasterKey> {
    let mut d = Dec::new(payload);
    let alpha = d.scalar(group)?;
    d.finish()?;
    Ok(MasterKey::new(alpha))
}

pub fn encode_state(group: &GroupDescription, st: &NodeState) -> Vec<u8> {
    let mut e = Enc::new();
    e.id(st.id());
    match st.secrets() {
        Some(s) => {
            e.u8(1);
            e.scalar(group, s.beta());
            e.scalar(group, s.gamma());
        }
        None => e.u8(0),
    }
    e.u32(st.assignments().len() as u32);
    for (child, idx) in st.assignments() {
        e.id(child);
        e.u32(*idx);
    }
    match st.last_update_epoch() {
        Some(t) => {
            e.u8(1);
            e.u64(t);
        }
        None => e.u8(0),
    }
    e.finish()
}

pub fn decode_state(group: &GroupDescription, payload: &[u8]) -> Result<NodeState> {
    let mut d = Dec::new(payload);
    let id = d.id()?;
    let secrets = match d.u8()? {
        0 => None,
        1 => Some(NodeSecrets::new(d.scalar(group)?, d.scalar(group)?)),
        _ => return Err(corrupt("bad secrets flag")),
    };
    let count = d.u32()?;
    let assignments = (0..count)
        .map(|_| Ok((d.id()?, d.u32()?)))
        .collect::<Result<_>>()?;
    let last_update = match d.u8()? {
        0 => None,
        1 => Some(d.u64()?),
        _ => return Err(corrupt("bad epoch flag")),
    };
    d.finish()?;
    Ok(NodeState::from_parts(id, secrets, assignments, last_update))
}

pub fn encode_rl(rl: &RevocationList) -> Vec<u8> {
    let mut e = Enc::new();
    e.id(rl.id());
    e.u32(rl.entries().len() as u32);
    for (child, epoch) in rl.entries() {
        e.id(child);
        e.u64(*epoch);
    }
    e.finish()
}

pub fn decode_rl(payload: &[u8]) -> Result<RevocationList> {
    let mut d = Dec::new(payload);
    let id = d.id()?;
    let count = d.u32()?;
    let entries = (0..count)
        .map(|_| Ok((d.id()?, d.u64()?)))
        .collect::<Result<_>>()?;
    d.finish()?;
    Ok(RevocationList::from_parts(id, entries))
}

pub enum PrivateKey {
    Hpu(HpuPrivateKey),
    Hfu(HfuPrivateKey),
}

impl PrivateKey {
    pub fn id(&self) -> &HierId {
        match self {
            PrivateKey::Hpu(k) => k.id(),
            PrivateKey::Hfu(k) => k.id(),
        }
    }

    pub fn element_count(&self) -> usize {
        match self {
            PrivateKey::Hpu(k) => k.element_count(),
            PrivateKey::Hfu(k) => k.element_count(),
        }
    }
}

pub fn encode_private_key(group: &GroupDescription, key: &PrivateKey) -> Vec<u8> {
    let mut e = Enc::new();
    match key {
        PrivateKey::Hpu(k) => {
            e.u8(Scheme::Hpu as u8);
            e.id(k.id());
            e.u32(k.levels().len() as u32);
            for level in k.levels() {
                e.u32(level.index());
                e.elem(group, level.k0());
                e.elem(group, level.k1());
                e.elem(group, level.r0());
                e.elem(group, level.r1());
            }
        }
        PrivateKey::Hfu(k) => {
            e.u8(Scheme::Hfu as u8);
            e.id(k.id());
            e.u32(k.index());
            e.elem(group, k.k0());
            e.elem(group, k.k1());
        }
    }
    e.finish()
}

pub fn decode_private_key(group: &GroupDescription, payload: &[u8]) -> Result<PrivateKey> {
    let mut d = Dec::new(payload);
    let scheme = Scheme::from_byte(d.u8()?).ok_or_else(|| corrupt("unknown scheme"))?;
    let key = match scheme {
        Scheme::Hpu => {
            let id = d.id()?;
            let count = d.u32()?;
            let levels = (0..count)
                .map(|_| {
                    Ok(HpuLevelKey::from_parts(
                        d.u32()?,
                        d.elem(group)?,
                        d.elem(group)?,
                        d.elem(group)?,
                        d.elem(group)?,
                    ))
                })
                .collect::<Result<_>>()?;
            PrivateKey::Hpu(HpuPrivateKey::from_parts(id, levels))
        }
        Scheme::Hfu => PrivateKey::Hfu(HfuPrivateKey::from_parts(
            d.id()?,
            d.u32()?,
            d.elem(group)?,
            d.elem(group)?,
        )),
    };
    d.finish()?;
    Ok(key)
}

pub enum UpdateKey {
    Hpu(HpuUpdateKey),
    Hfu(HfuUpdateKey),
}

impl UpdateKey {
    pub fn node_id(&self) -> &HierId {
        match self {
            UpdateKey::Hpu(k) => k.node_id(),
            UpdateKey::Hfu(k) => k.node_id(),
        }
    }

    pub fn epoch(&self) -> u64 {
        match self {
            UpdateKey::Hpu(k) => k.epoch(),
            UpdateKey::Hfu(k) => k.epoch(),
        }
    }

    pub fn element_count(&self) -> usize {
        match self {
            UpdateKey::Hpu(k) => k.element_count(),
            UpdateKey::Hfu(k) => k.element_count(),
        }
    }
}

pub fn encode_update_key(group: &GroupDescription, uk: &UpdateKey) -> Vec<u8> {
    let mut e = Enc::new();
    match uk {
        UpdateKey::Hpu(k) => {
            e.u8(Scheme::Hpu as u8);
            e.id(k.node_id());
            e.u64(k.epoch());
            e.u32(k.levels().len() as u32);
            for level in k.levels() {
                e.set(level.si());
                e.elem(group, level.u0());
                e.elem(group, level.u1());
                e.elem(group, level.u2());
            }
        }
        UpdateKey::Hfu(k) => {
            e.u8(Scheme::Hfu as u8);
            e.id(k.node_id());
            e.u64(k.epoch());
            e.elem(group, k.pdk().p0());
            e.u32(k.pdk().ps().len() as u32);
            for p in k.pdk().ps() {
                e.elem(group, p);
            }
            e.elem(group, k.pdk().p_last());
            e.set(k.si());
            e.elem(group, k.u0());
            e.elem(group, k.u1());
            e.elem(group, k.u2());
        }
    }
    e.finish()
}

pub fn decode_update_key(group: &GroupDescription, payload: &[u8]) -> Result<UpdateKey> {
    let mut d = Dec::new(payload);
    let scheme = Scheme::from_byte(d.u8()?).ok_or_else(|| corrupt("unknown scheme"))?;
    let uk = match scheme {
        Scheme::Hpu => {
            let node_id = d.id()?;
            let epoch = d.u64()?;
            let count = d.u32()?;
            let levels = (0..count)
                .map(|_| {
                    Ok(HpuLevelUpdate::from_parts(
                        d.set()?,
                        d.elem(group)?,
                        d.elem(group)?,
                        d.elem(group)?,
                    ))
                })
                .collect::<Result<_>>()?;
            UpdateKey::Hpu(HpuUpdateKey::from_parts(node_id, epoch, levels))
        }
        Scheme::Hfu => {
            let node_id = d.id()?;
            let epoch = d.u64()?;
            let p0 = d.elem(group)?;
            let count = d.u32()?;
            let ps = (0..count).map(|_| d.elem(group)).collect::<Result<_>>()?;
            let p_last = d.elem(group)?;
            let pdk = PartialDecryptionKey::from_parts(p0, ps, p_last);
            UpdateKey::Hfu(HfuUpdateKey::from_parts(
                node_id,
                epoch,
                pdk,
                d.set()?,
                d.elem(group)?,
                d.elem(group)?,
                d.elem(group)?,
            ))
        }
    };
    d.finish()?;
    Ok(uk)
}

pub fn encode_dk(group: &GroupDescription, dk: &DecryptionKey) -> Vec<u8> {
    let mut e = Enc::new();
    e.id(dk.id());
    e.u64(dk.time().epoch());
    e.elem(group, dk.d0());
    e.u32(dk.ds().len() as u32);
    for d in dk.ds() {
        e.elem(group, d);
    }
    e.elem(group, dk.d_last());
    e.finish()
}

pub fn decode_dk(params: &SystemParams, payload: &[u8]) -> Result<DecryptionKey> {
    let group = params.group();
    let mut d = Dec::new(payload);
    let id = d.id()?;
    let epoch = d.u64()?;
    let d0 = d.elem(group)?;
    let count = d.u32()?;
    if count as usize != id.depth() {
        return Err(corrupt("component count disagrees with identity depth"));
    }
    let ds = (0..count).map(|_| d.elem(group)).collect::<Result<_>>()?;
    let d_last = d.elem(group)?;
    d.finish()?;
    let cid = encode_cid(&id, params.profile(), params.max_depth())
        .map_err(|e| corrupt(&e.to_string()))?;
    let time = encode_time(epoch, params.profile()).map_err(|e| corrupt(&e.to_string()))?;
    Ok(DecryptionKey::from_parts(id, cid, time, d0, ds, d_last))
}

/// A ciphertext file: the KEM part plus the sealed payload.
pub struct SealedMessage {
    pub ct: Ciphertext,
    pub sealed: Vec<u8>,
}

pub fn encode_sealed(group: &GroupDescription, msg: &SealedMessage) -> Vec<u8> {
    let header = msg.ct.header();
    let mut e = Enc::new();
    e.id(header.id());
    e.u64(header.time().epoch());
    e.elem(group, msg.ct.c());
    e.elem(group, header.c0());
    e.u32(header.cs().len() as u32);
    for c in header.cs() {
        e.elem(group, c);
    }
    e.elem(group, header.c_last());
    e.bytes(&msg.sealed);
    e.finish()
}

pub fn decode_sealed(params: &SystemParams, payload: &[u8]) -> Result<SealedMessage> {
    let group = params.group();
    let mut d = Dec::new(payload);
    let id = d.id()?;
    let epoch = d.u64()?;
    let c = d.elem(group)?;
    let c0 = d.elem(group)?;
    let count = d.u32()?;
    if count as usize != id.depth() {
        return Err(corrupt("component count disagrees with identity depth"));
    }
    let cs = (0..count).map(|_| d.elem(group)).collect::<Result<_>>()?;
    let c_last = d.elem(group)?;
    let sealed = d.bytes()?.to_vec();
    d.finish()?;
    let cid = encode_cid(&id, params.profile(), params.max_depth())
        .map_err(|e| corrupt(&e.to_string()))?;
    let time = encode_time(epoch, params.profile()).map_err(|e| corrupt(&e.to_string()))?;
    let header = HibeHeader::from_parts(id, cid, time, c0, cs, c_last);
    Ok(SealedMessage {
        ct: Ciphertext::from_parts(c, header),
        sealed,
    })
}
