//! Exit-code contract of the binary: 0 success, 2 usage/missing input,
//! 3 revoked or non-matching key, 4 corrupt artifact, 5 state violation.

use std::fs;
use std::path::Path;
use std::process::Command;

fn run(ws: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_keyauth"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn setup_ws(ws: &Path) {
    let (code, err) = run(ws, &["--scheme", "hfu", "setup", "--lambda", "16", "--seed", "1"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn exit_codes_follow_the_taxonomy() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    setup_ws(&ws);

    // 5: setting up twice
    let (code, err) = run(&ws, &["--scheme", "hfu", "setup", "--seed", "1"]);
    assert_eq!(code, 5, "{err}");

    // 2: unknown flag (clap usage error)
    let (code, _) = run(&ws, &["genkey", "--no-such-flag"]);
    assert_eq!(code, 2);

    // 2: missing artifact (derive without any keys)
    let (code, err) = run(&ws, &["derivekey", "--id", "a", "--epoch", "0"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("missing-artifact"), "{err}");

    // 2: scheme flag contradicting the workspace
    let (code, err) = run(&ws, &["--scheme", "hpu", "genkey", "--id", "a"]);
    assert_eq!(code, 2, "{err}");

    run(&ws, &["genkey", "--id", "a", "--seed", "2"]);
    run(&ws, &["updatekey", "--epoch", "0", "--seed", "3"]);

    // 3: revoked identity cannot derive
    let (code, err) = run(&ws, &["revoke", "--id", "a", "--epoch", "1"]);
    assert_eq!(code, 0, "{err}");
    run(&ws, &["updatekey", "--epoch", "1", "--seed", "4"]);
    let (code, err) = run(&ws, &["derivekey", "--id", "a", "--epoch", "1"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("revoked"), "{err}");

    // 5: revoking at an epoch already covered by an update key
    let (code, err) = run(&ws, &["revoke", "--id", "a", "--epoch", "1"]);
    assert_eq!(code, 5, "{err}");

    // 3: decryption key does not match the ciphertext epoch
    run(&ws, &["derivekey", "--id", "a", "--epoch", "0", "--seed", "5"]);
    let msg = ws.join("m.txt");
    fs::write(&msg, b"x").unwrap();
    let ct = ws.join("m.ct");
    run(&ws, &[
        "encrypt", "--id", "a", "--epoch", "2",
        "--in", msg.to_str().unwrap(), "--out", ct.to_str().unwrap(), "--seed", "6",
    ]);
    // no dk for epoch 2 exists: missing artifact
    let out = ws.join("m.out");
    let (code, err) = run(&ws, &["decrypt", "--in", ct.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");

    // 4: tampered ciphertext payload
    run(&ws, &[
        "encrypt", "--id", "a", "--epoch", "0",
        "--in", msg.to_str().unwrap(), "--out", ct.to_str().unwrap(), "--seed", "7",
    ]);
    let mut raw = fs::read(&ct).unwrap();
    let last = raw.len() - 1;
    raw[last] ^= 1;
    fs::write(&ct, raw).unwrap();
    let (code, err) = run(&ws, &["decrypt", "--in", ct.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("integrity"), "{err}");

    // 5: a stale lock file blocks mutating commands
    fs::write(ws.join("lock"), b"").unwrap();
    let (code, err) = run(&ws, &["genkey", "--id", "b", "--seed", "8"]);
    assert_eq!(code, 5, "{err}");
    fs::remove_file(ws.join("lock")).unwrap();
    let (code, err) = run(&ws, &["genkey", "--id", "b", "--seed", "8"]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn json_output_is_parseable() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path().join("ws");
    setup_ws(&ws);
    let out = Command::new(env!("CARGO_BIN_EXE_keyauth"))
        .args(["--workspace", ws.to_str().unwrap(), "--json", "genkey", "--id", "a", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "genkey");
    assert_eq!(v["index"], 1);

    let out = Command::new(env!("CARGO_BIN_EXE_keyauth"))
        .args(["--workspace", ws.to_str().unwrap(), "--json", "report-sizes"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["artifact"], "public-params");
}
