//! CLI determinism and persistence acceptance check: the same scripted
//! session with the same seeds must produce byte-identical workspaces, and
//! every artifact must decode back to an equal in-memory value.

use keyauth::codec::{self, PrivateKey, UpdateKey};
use keyauth::store::{Tag, Workspace};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rhibe::{hfu, hpu, system, HierId};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

fn keyauth(ws: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_keyauth"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .status()
        .unwrap();
    assert!(status.success(), "keyauth {args:?} failed");
}

/// A fixed session touching every artifact kind.
fn run_session(ws: &Path, scheme: &str) {
    keyauth(ws, &["--scheme", scheme, "setup", "--lambda", "16", "--users", "4", "--depth", "3", "--seed", "11"]);
    keyauth(ws, &["genkey", "--id", "a", "--seed", "12"]);
    keyauth(ws, &["genkey", "--id", "b", "--seed", "13"]);
    keyauth(ws, &["genkey", "--id", "a/x", "--seed", "14"]);
    keyauth(ws, &["updatekey", "--epoch", "0", "--seed", "15"]);
    keyauth(ws, &["updatekey", "--id", "a", "--epoch", "0", "--seed", "16"]);
    keyauth(ws, &["derivekey", "--id", "a/x", "--epoch", "0", "--seed", "17"]);
    keyauth(ws, &["revoke", "--id", "b", "--epoch", "1"]);
    keyauth(ws, &["updatekey", "--epoch", "1", "--seed", "18"]);
    let msg = ws.join("note.txt");
    fs::write(&msg, b"determinism probe").unwrap();
    let ct = ws.join("note.ct");
    keyauth(ws, &[
        "encrypt", "--id", "a/x", "--epoch", "0",
        "--in", msg.to_str().unwrap(), "--out", ct.to_str().unwrap(), "--seed", "19",
    ]);
    let out = ws.join("note.out");
    keyauth(ws, &["decrypt", "--in", ct.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(fs::read(out).unwrap(), b"determinism probe");
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn acceptance_8_cli_determinism_and_persistence() {
    for scheme in ["hpu", "hfu"] {
        let dir = tempfile::tempdir().unwrap();
        let ws1 = dir.path().join("run1");
        let ws2 = dir.path().join("run2");
        run_session(&ws1, scheme);
        run_session(&ws2, scheme);
        let snap1 = snapshot(&ws1);
        let snap2 = snapshot(&ws2);
        assert_eq!(
            snap1.keys().collect::<Vec<_>>(),
            snap2.keys().collect::<Vec<_>>(),
            "{scheme}: file sets differ"
        );
        for (name, bytes) in &snap1 {
            assert_eq!(bytes, &snap2[name], "{scheme}: {name} differs between runs");
        }

        // every stored artifact re-encodes to the exact bytes on disk
        let ws = Workspace::new(ws1.as_path());
        let params = ws.load_params().unwrap();
        for (name, raw) in &snap1 {
            if !name.ends_with(".bin") || !raw.starts_with(keyauth::store::MAGIC) {
                continue;
            }
            let payload = &raw[11..];
            let reencoded = match raw[10] {
                t if t == Tag::Config as u8 => {
                    codec::encode_config(&codec::decode_config(payload).unwrap())
                }
                t if t == Tag::Params as u8 => {
                    codec::encode_params(&codec::decode_params(payload).unwrap())
                }
                t if t == Tag::RootCredentials as u8 => codec::encode_master_key(
                    params.group(),
                    &codec::decode_master_key(params.group(), payload).unwrap(),
                ),
                t if t == Tag::State as u8 => codec::encode_state(
                    params.group(),
                    &codec::decode_state(params.group(), payload).unwrap(),
                ),
                t if t == Tag::RevocationList as u8 => {
                    codec::encode_rl(&codec::decode_rl(payload).unwrap())
                }
                t if t == Tag::PrivateKey as u8 => codec::encode_private_key(
                    params.group(),
                    &codec::decode_private_key(params.group(), payload).unwrap(),
                ),
                t if t == Tag::UpdateKey as u8 => codec::encode_update_key(
                    params.group(),
                    &codec::decode_update_key(params.group(), payload).unwrap(),
                ),
                t if t == Tag::DecryptionKey as u8 => codec::encode_dk(
                    params.group(),
                    &codec::decode_dk(&params, payload).unwrap(),
                ),
                t if t == Tag::Message as u8 => codec::encode_sealed(
                    params.group(),
                    &codec::decode_sealed(&params, payload).unwrap(),
                ),
                t => panic!("unknown tag {t} in {name}"),
            };
            assert_eq!(&reencoded, payload, "{scheme}: {name} re-encoding differs");
        }
    }

    // in-memory round trips equal the originals for freshly generated keys
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let (_mk, rl, mut st, params) = system::setup(16, 4, 3, &mut rng).unwrap();
    let group = params.group();
    let a = HierId::new(["a"]).unwrap();
    let sk = hfu::genkey(&params, &a, &mut st, &mut rng).unwrap();
    let enc = codec::encode_private_key(group, &PrivateKey::Hfu(sk.clone()));
    match codec::decode_private_key(group, &enc).unwrap() {
        PrivateKey::Hfu(back) => assert_eq!(back, sk),
        _ => panic!("scheme flipped in round trip"),
    }
    let mut st2 = st.clone();
    let uk = hpu::updatekey(&params, 0, &rl, None, &mut st2, &mut rng).unwrap();
    let enc = codec::encode_update_key(group, &UpdateKey::Hpu(uk.clone()));
    match codec::decode_update_key(group, &enc).unwrap() {
        UpdateKey::Hpu(back) => assert_eq!(back, uk),
        _ => panic!("scheme flipped in round trip"),
    }

    println!("acceptance 8: PASS - deterministic workspaces, persistence round trips");
}
