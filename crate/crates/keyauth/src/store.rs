//! Workspace layout and framed file access. Every artifact file starts
//! with an 8-byte magic, a format version, and an artifact tag, so a file
//! dropped into the wrong slot is rejected as an integrity error rather
//! than misparsed.

use crate::codec::{self, Config, PrivateKey, SealedMessage, UpdateKey};
use crate::error::{Error, Result};
use rhibe::{
    DecryptionKey, HierId, MasterKey, NodeState, RevocationList, SystemParams,
};
use std::fs;
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 8] = b"KEYAUTH1";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Tag {
    Config = 1,
    Params = 2,
    RootCredentials = 3,
    State = 4,
    RevocationList = 5,
    PrivateKey = 6,
    UpdateKey = 7,
    DecryptionKey = 8,
    Message = 9,
}

/// Escapes `%`, `/` and `.` in each component and joins with `.`; the root
/// gets a name no escaped component can collide with.
pub fn node_name(id: &HierId) -> String {
    if id.is_root() {
        return "@root".into();
    }
    id.components()
        .iter()
        .map(|c| {
            c.replace('%', "%25")
                .replace('/', "%2F")
                .replace('.', "%2E")
        })
        .collect::<Vec<_>>()
        .join(".")
}

pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn init_dirs(&self) -> Result<()> {
        for dir in ["state", "rl", "keys", "uk", "dk"] {
            fs::create_dir_all(self.root.join(dir))?;
        }
        Ok(())
    }

    pub fn lock(&self) -> Result<LockGuard> {
        LockGuard::acquire(self.root.join("lock"))
    }

    pub fn config_path(&self) -> PathBuf {
        self.root.join("config.bin")
    }

    pub fn params_path(&self) -> PathBuf {
        self.root.join("params.bin")
    }

    pub fn root_credentials_path(&self) -> PathBuf {
        self.root.join("root-credentials.bin")
    }

    pub fn state_path(&self, id: &HierId) -> PathBuf {
        self.root.join("state").join(format!("{}.bin", node_name(id)))
    }

    pub fn rl_path(&self, id: &HierId) -> PathBuf {
        self.root.join("rl").join(format!("{}.bin", node_name(id)))
    }

    pub fn key_path(&self, id: &HierId) -> PathBuf {
        self.root.join("keys").join(format!("{}.bin", node_name(id)))
    }

    pub fn uk_path(&self, id: &HierId, epoch: u64) -> PathBuf {
        self.root
            .join("uk")
            .join(format!("{}.{}.bin", node_name(id), epoch))
    }

    pub fn dk_path(&self, id: &HierId, epoch: u64) -> PathBuf {
        self.root
            .join("dk")
            .join(format!("{}.{}.bin", node_name(id), epoch))
    }

    pub fn write_framed(&self, path: &Path, tag: Tag, payload: &[u8]) -> Result<()> {
        let mut out = Vec::with_capacity(payload.len() + 11);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_be_bytes());
        out.push(tag as u8);
        out.extend_from_slice(payload);
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read_framed(&self, path: &Path, tag: Tag) -> Result<Vec<u8>> {
        let raw = match fs::read(path) {
            Ok(raw) => raw,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::MissingArtifact(path.to_path_buf()))
            }
            Err(e) => return Err(e.into()),
        };
        read_frame(&raw, tag, path)
    }

    pub fn save_config(&self, c: &Config) -> Result<()> {
        self.write_framed(&self.config_path(), Tag::Config, &codec::encode_config(c))
    }

    pub fn load_config(&self) -> Result<Config> {
        codec::decode_config(&self.read_framed(&self.config_path(), Tag::Config)?)
    }

    pub fn save_params(&self, p: &SystemParams) -> Result<()> {
        self.write_framed(&self.params_path(), Tag::Params, &codec::encode_params(p))
    }

    pub fn load_params(&self) -> Result<SystemParams> {
        codec::decode_params(&self.read_framed(&self.params_path(), Tag::Params)?)
    }

    pub fn save_master_key(&self, params: &SystemParams, mk: &MasterKey) -> Result<()> {
        self.write_framed(
            &self.root_credentials_path(),
            Tag::RootCredentials,
            &codec::encode_master_key(params.group(), mk),
        )
    }

    pub fn load_master_key(&self, params: &SystemParams) -> Result<MasterKey> {
        let payload = self.read_framed(&self.root_credentials_path(), Tag::RootCredentials)?;
        codec::decode_master_key(params.group(), &payload)
    }

    pub fn save_state(&self, params: &SystemParams, st: &NodeState) -> Result<()> {
        self.write_framed(
            &self.state_path(st.id()),
            Tag::State,
            &codec::encode_state(params.group(), st),
        )
    }

    /// Loads the node's state, or starts an empty one for a node that has
    /// not acted as a key issuer yet.
    pub fn load_or_new_state(&self, params: &SystemParams, id: &HierId) -> Result<NodeState> {
        match self.read_framed(&self.state_path(id), Tag::State) {
            Ok(payload) => codec::decode_state(params.group(), &payload),
            Err(Error::MissingArtifact(_)) => Ok(NodeState::new(id.clone())),
            Err(e) => Err(e),
        }
    }

    pub fn save_rl(&self, rl: &RevocationList) -> Result<()> {
        self.write_framed(&self.rl_path(rl.id()), Tag::RevocationList, &codec::encode_rl(rl))
    }

    pub fn load_or_new_rl(&self, id: &HierId) -> Result<RevocationList> {
        match self.read_framed(&self.rl_path(id), Tag::RevocationList) {
            Ok(payload) => codec::decode_rl(&payload),
            Err(Error::MissingArtifact(_)) => Ok(RevocationList::new(id.clone())),
            Err(e) => Err(e),
        }
    }

    pub fn save_private_key(&self, params: &SystemParams, key: &PrivateKey) -> Result<()> {
        self.write_framed(
            &self.key_path(key.id()),
            Tag::PrivateKey,
            &codec::encode_private_key(params.group(), key),
        )
    }

    pub fn load_private_key(&self, params: &SystemParams, id: &HierId) -> Result<PrivateKey> {
        let payload = self.read_framed(&self.key_path(id), Tag::PrivateKey)?;
        codec::decode_private_key(params.group(), &payload)
    }

    pub fn save_update_key(&self, params: &SystemParams, uk: &UpdateKey) -> Result<()> {
        self.write_framed(
            &self.uk_path(uk.node_id(), uk.epoch()),
            Tag::UpdateKey,
            &codec::encode_update_key(params.group(), uk),
        )
    }

    pub fn load_update_key(
        &self,
        params: &SystemParams,
        id: &HierId,
        epoch: u64,
    ) -> Result<UpdateKey> {
        let payload = self.read_framed(&self.uk_path(id, epoch), Tag::UpdateKey)?;
        codec::decode_update_key(params.group(), &payload)
    }

    pub fn save_dk(&self, params: &SystemParams, dk: &DecryptionKey) -> Result<()> {
        self.write_framed(
            &self.dk_path(dk.id(), dk.time().epoch()),
            Tag::DecryptionKey,
            &codec::encode_dk(params.group(), dk),
        )
    }

    pub fn load_dk(&self, params: &SystemParams, id: &HierId, epoch: u64) -> Result<DecryptionKey> {
        let payload = self.read_framed(&self.dk_path(id, epoch), Tag::DecryptionKey)?;
        codec::decode_dk(params, &payload)
    }

    pub fn write_sealed(&self, path: &Path, params: &SystemParams, msg: &SealedMessage) -> Result<()> {
        self.write_framed(path, Tag::Message, &codec::encode_sealed(params.group(), msg))
    }

    pub fn read_sealed(&self, path: &Path, params: &SystemParams) -> Result<SealedMessage> {
        codec::decode_sealed(params, &self.read_framed(path, Tag::Message)?)
    }
}

pub fn read_frame(raw: &[u8], tag: Tag, path: &Path) -> Result<Vec<u8>> {
    if raw.len() < 11 || &raw[..8] != MAGIC {
        return Err(Error::Integrity(format!(
            "{} is not a keyauth artifact",
            path.display()
        )));
    }
    let version = u16::from_be_bytes([raw[8], raw[9]]);
    if version != VERSION {
        return Err(Error::Integrity(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    if raw[10] != tag as u8 {
        return Err(Error::Integrity(format!(
            "{}: wrong artifact type {} (expected {})",
            path.display(),
            raw[10],
            tag as u8
        )));
    }
    Ok(raw[11..].to_vec())
}

/// Advisory exclusive lock: a marker file created for the duration of a
/// command and removed on drop.
pub struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    fn acquire(path: PathBuf) -> Result<Self> {
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(LockGuard { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::StateViolation(format!(
                    "workspace is locked by another command ({})",
                    path.display()
                )))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_names_escape_separators() {
        assert_eq!(node_name(&HierId::root()), "@root");
        let id = HierId::new(["a.b", "c/d", "e%f"]).unwrap();
        assert_eq!(node_name(&id), "a%2Eb.c%2Fd.e%25f");
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let guard = ws.lock().unwrap();
        assert!(matches!(ws.lock(), Err(Error::StateViolation(_))));
        drop(guard);
        ws.lock().unwrap();
    }

    #[test]
    fn frame_rejects_foreign_and_mismatched_files() {
        let dir = tempfile::tempdir().unwrap();
        let ws = Workspace::new(dir.path());
        let path = dir.path().join("x.bin");
        std::fs::write(&path, b"not an artifact").unwrap();
        assert!(matches!(
            ws.read_framed(&path, Tag::Config),
            Err(Error::Integrity(_))
        ));
        ws.write_framed(&path, Tag::State, b"payload").unwrap();
        assert!(matches!(
            ws.read_framed(&path, Tag::Config),
            Err(Error::Integrity(_))
        ));
        assert_eq!(ws.read_framed(&path, Tag::State).unwrap(), b"payload");
        assert!(matches!(
            ws.read_framed(&dir.path().join("absent.bin"), Tag::Config),
            Err(Error::MissingArtifact(_))
        ));
    }
}
