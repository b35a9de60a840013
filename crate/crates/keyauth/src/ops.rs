//! Command implementations. Each returns a JSON summary; the binary
//! decides whether to print it as JSON or as plain text.

use crate::codec::{Config, PrivateKey, SealedMessage, UpdateKey};
use crate::error::{Error, Result};
use crate::store::Workspace;
use crate::{dem, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rhibe::{hfu, hpu, system, DecryptionKey, HierId, SystemParams};
use serde_json::{json, Value};
use std::fs;
use std::path::Path;

fn rng_for(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn parse_id(path: &str) -> Result<HierId> {
    HierId::from_path(path).map_err(|e| Error::Usage(format!("bad identity {path:?}: {e}")))
}

fn load_env(ws: &Workspace, scheme_flag: Option<Scheme>) -> Result<(Config, SystemParams)> {
    let config = ws.load_config()?;
    if let Some(s) = scheme_flag {
        if s != config.scheme {
            return Err(Error::Usage(format!(
                "workspace was set up for scheme {}, not {}",
                config.scheme, s
            )));
        }
    }
    let params = ws.load_params()?;
    if params.n() != config.n || params.max_depth() != config.max_depth {
        return Err(Error::Integrity(
            "config and parameter files disagree".into(),
        ));
    }
    Ok((config, params))
}

pub fn setup(
    ws: &Workspace,
    scheme: Scheme,
    lambda: u32,
    n: u32,
    max_depth: usize,
    seed: u64,
) -> Result<Value> {
    fs::create_dir_all(ws.root())?;
    let _lock = ws.lock()?;
    if ws.config_path().exists() {
        return Err(Error::StateViolation(
            "workspace is already set up".into(),
        ));
    }
    ws.init_dirs()?;
    let mut rng = rng_for(seed);
    let (mk, rl, st, params) = system::setup(lambda, n, max_depth, &mut rng)?;
    let config = Config { scheme, lambda, n, max_depth };
    ws.save_config(&config)?;
    ws.save_params(&params)?;
    ws.save_master_key(&params, &mk)?;
    ws.save_state(&params, &st)?;
    ws.save_rl(&rl)?;
    Ok(json!({
        "command": "setup",
        "scheme": scheme.to_string(),
        "lambda": lambda,
        "users": n,
        "max_depth": max_depth,
        "public_elements": params.element_count(),
    }))
}

pub fn genkey(ws: &Workspace, scheme_flag: Option<Scheme>, id: &str, seed: u64) -> Result<Value> {
    let _lock = ws.lock()?;
    let (config, params) = load_env(ws, scheme_flag)?;
    let id = parse_id(id)?;
    let parent = id
        .parent()
        .ok_or_else(|| Error::Usage("cannot generate a key for the root".into()))?;
    let mut st_parent = ws.load_or_new_state(&params, &parent)?;
    let mut rng = rng_for(seed);

    let key = match config.scheme {
        Scheme::Hpu => {
            let sk_parent = if parent.is_root() {
                None
            } else {
                match ws.load_private_key(&params, &parent)? {
                    PrivateKey::Hpu(k) => Some(k),
                    PrivateKey::Hfu(_) => {
                        return Err(Error::Integrity("parent key has the wrong scheme".into()))
                    }
                }
            };
            PrivateKey::Hpu(hpu::genkey(&params, &id, sk_parent.as_ref(), &mut st_parent, &mut rng)?)
        }
        Scheme::Hfu => PrivateKey::Hfu(hfu::genkey(&params, &id, &mut st_parent, &mut rng)?),
    };
    ws.save_private_key(&params, &key)?;
    ws.save_state(&params, &st_parent)?;
    Ok(json!({
        "command": "genkey",
        "id": id.to_path(),
        "index": st_parent.index_of(&id),
        "elements": key.element_count(),
    }))
}

/// Derives the HFU node's own decryption key for `epoch`, preferring a
/// stored one over an on-the-fly derivation.
fn hfu_own_dk(
    ws: &Workspace,
    params: &SystemParams,
    id: &HierId,
    epoch: u64,
    rng: &mut ChaCha20Rng,
) -> Result<DecryptionKey> {
    match ws.load_dk(params, id, epoch) {
        Ok(dk) => Ok(dk),
        Err(Error::MissingArtifact(_)) => {
            let sk = match ws.load_private_key(params, id)? {
                PrivateKey::Hfu(k) => k,
                PrivateKey::Hpu(_) => {
                    return Err(Error::Integrity("private key has the wrong scheme".into()))
                }
            };
            let parent = id.parent().expect("non-root node");
            let uk = match ws.load_update_key(params, &parent, epoch)? {
                UpdateKey::Hfu(uk) => uk,
                UpdateKey::Hpu(_) => {
                    return Err(Error::Integrity("update key has the wrong scheme".into()))
                }
            };
            Ok(hfu::derivekey(params, &sk, &uk, rng)?)
        }
        Err(e) => Err(e),
    }
}

pub fn updatekey(
    ws: &Workspace,
    scheme_flag: Option<Scheme>,
    id: &str,
    epoch: u64,
    seed: u64,
) -> Result<Value> {
    let _lock = ws.lock()?;
    let (config, params) = load_env(ws, scheme_flag)?;
    let id = parse_id(id)?;
    let mut st = ws.load_or_new_state(&params, &id)?;
    let rl = ws.load_or_new_rl(&id)?;
    let mut rng = rng_for(seed);

    let uk = match config.scheme {
        Scheme::Hpu => {
            let uk_parent = match id.parent() {
                None => None,
                Some(parent) => match ws.load_update_key(&params, &parent, epoch)? {
                    UpdateKey::Hpu(uk) => Some(uk),
                    UpdateKey::Hfu(_) => {
                        return Err(Error::Integrity("update key has the wrong scheme".into()))
                    }
                },
            };
            UpdateKey::Hpu(hpu::updatekey(
                &params, epoch, &rl, uk_parent.as_ref(), &mut st, &mut rng,
            )?)
        }
        Scheme::Hfu => {
            let dk = match id.parent() {
                None => None,
                Some(_) => Some(hfu_own_dk(ws, &params, &id, epoch, &mut rng)?),
            };
            UpdateKey::Hfu(hfu::updatekey(
                &params, epoch, &rl, dk.as_ref(), &mut st, &mut rng,
            )?)
        }
    };
    ws.save_update_key(&params, &uk)?;
    ws.save_state(&params, &st)?;
    Ok(json!({
        "command": "updatekey",
        "id": id.to_path(),
        "epoch": epoch,
        "elements": uk.element_count(),
        "non_revoked": match &uk {
            UpdateKey::Hpu(k) => k.levels().last().map(|l| l.si().len()),
            UpdateKey::Hfu(k) => Some(k.si().len()),
        },
    }))
}

pub fn derivekey(
    ws: &Workspace,
    scheme_flag: Option<Scheme>,
    id: &str,
    epoch: u64,
    seed: u64,
) -> Result<Value> {
    let _lock = ws.lock()?;
    let (config, params) = load_env(ws, scheme_flag)?;
    let id = parse_id(id)?;
    let parent = id
        .parent()
        .ok_or_else(|| Error::Usage("the root has no decryption keys".into()))?;
    let mut rng = rng_for(seed);
    let key = ws.load_private_key(&params, &id)?;
    let uk = ws.load_update_key(&params, &parent, epoch)?;
    let dk = match (config.scheme, key, uk) {
        (Scheme::Hpu, PrivateKey::Hpu(sk), UpdateKey::Hpu(uk)) => {
            hpu::derivekey(&params, &sk, &uk, &mut rng)?
        }
        (Scheme::Hfu, PrivateKey::Hfu(sk), UpdateKey::Hfu(uk)) => {
            hfu::derivekey(&params, &sk, &uk, &mut rng)?
        }
        _ => return Err(Error::Integrity("artifacts have mixed schemes".into())),
    };
    ws.save_dk(&params, &dk)?;
    Ok(json!({
        "command": "derivekey",
        "id": id.to_path(),
        "epoch": epoch,
        "elements": dk.element_count(),
    }))
}

pub fn encrypt(
    ws: &Workspace,
    scheme_flag: Option<Scheme>,
    id: &str,
    epoch: u64,
    input: &Path,
    output: &Path,
    seed: u64,
) -> Result<Value> {
    let (_config, params) = load_env(ws, scheme_flag)?;
    let id = parse_id(id)?;
    let plaintext = fs::read(input)
        .map_err(|_| Error::MissingArtifact(input.to_path_buf()))?;
    let mut rng = rng_for(seed);
    let group = params.group();
    let session = group.exp(&group.generator(3)?, &group.sample_scalar(&mut rng));
    let ct = system::encrypt(&params, &id, epoch, &session, &mut rng)?;
    let sealed = dem::seal(&group.serialize_element(&session), &plaintext);
    let msg = SealedMessage { ct, sealed };
    ws.write_sealed(output, &params, &msg)?;
    Ok(json!({
        "command": "encrypt",
        "id": id.to_path(),
        "epoch": epoch,
        "plaintext_bytes": plaintext.len(),
        "header_elements": msg.ct.element_count(),
    }))
}

pub fn decrypt(
    ws: &Workspace,
    scheme_flag: Option<Scheme>,
    input: &Path,
    output: &Path,
) -> Result<Value> {
    let (_config, params) = load_env(ws, scheme_flag)?;
    let msg = ws.read_sealed(input, &params)?;
    let id = msg.ct.header().id().clone();
    let epoch = msg.ct.header().time().epoch();
    let dk = ws.load_dk(&params, &id, epoch)?;
    let session = system::decrypt(&params, &msg.ct, &dk)?;
    let plaintext = dem::open(&params.group().serialize_element(&session), &msg.sealed)
        .ok_or_else(|| Error::Integrity("message authentication failed".into()))?;
    fs::write(output, &plaintext)?;
    Ok(json!({
        "command": "decrypt",
        "id": id.to_path(),
        "epoch": epoch,
        "plaintext_bytes": plaintext.len(),
    }))
}

pub fn revoke(ws: &Workspace, scheme_flag: Option<Scheme>, id: &str, epoch: u64) -> Result<Value> {
    let _lock = ws.lock()?;
    let (_config, params) = load_env(ws, scheme_flag)?;
    let id = parse_id(id)?;
    let parent = id
        .parent()
        .ok_or_else(|| Error::Usage("cannot revoke the root".into()))?;
    let st = ws.load_or_new_state(&params, &parent)?;
    let mut rl = ws.load_or_new_rl(&parent)?;
    system::revoke(&id, epoch, &mut rl, &st)?;
    ws.save_rl(&rl)?;
    Ok(json!({
        "command": "revoke",
        "id": id.to_path(),
        "epoch": epoch,
        "revoked_entries": rl.entries().len(),
    }))
}

pub struct SizeRow {
    pub artifact: &'static str,
    pub name: String,
    pub epoch: Option<u64>,
    pub elements: usize,
    pub bytes: u64,
}

/// Element and byte sizes for every artifact in the workspace.
pub fn report_sizes(ws: &Workspace, scheme_flag: Option<Scheme>) -> Result<Vec<SizeRow>> {
    let (_config, params) = load_env(ws, scheme_flag)?;
    let mut rows = vec![SizeRow {
        artifact: "public-params",
        name: HierId::root().to_string(),
        epoch: None,
        elements: params.element_count(),
        bytes: fs::metadata(ws.params_path())?.len(),
    }];

    let dir_files = |dir: &str| -> Result<Vec<std::path::PathBuf>> {
        let dir = ws.root().join(dir);
        let mut files: Vec<_> = fs::read_dir(&dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "bin"))
            .collect();
        files.sort();
        Ok(files)
    };

    for path in dir_files("keys")? {
        let key = {
            let payload = ws.read_framed(&path, crate::store::Tag::PrivateKey)?;
            crate::codec::decode_private_key(params.group(), &payload)?
        };
        rows.push(SizeRow {
            artifact: "private-key",
            name: key.id().to_string(),
            epoch: None,
            elements: key.element_count(),
            bytes: fs::metadata(&path)?.len(),
        });
    }
    for path in dir_files("uk")? {
        let payload = ws.read_framed(&path, crate::store::Tag::UpdateKey)?;
        let uk = crate::codec::decode_update_key(params.group(), &payload)?;
        rows.push(SizeRow {
            artifact: "update-key",
            name: uk.node_id().to_string(),
            epoch: Some(uk.epoch()),
            elements: uk.element_count(),
            bytes: fs::metadata(&path)?.len(),
        });
    }
    for path in dir_files("dk")? {
        let payload = ws.read_framed(&path, crate::store::Tag::DecryptionKey)?;
        let dk = crate::codec::decode_dk(&params, &payload)?;
        rows.push(SizeRow {
            artifact: "decryption-key",
            name: dk.id().to_string(),
            epoch: Some(dk.time().epoch()),
            elements: dk.element_count(),
            bytes: fs::metadata(&path)?.len(),
        });
    }
    Ok(rows)
}
