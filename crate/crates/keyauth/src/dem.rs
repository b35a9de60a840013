//! Data encapsulation around the group-element session key: a SHA-256
//! counter-mode keystream plus a keyed SHA-256 tag (encrypt-then-MAC).

use sha2::{Digest, Sha256};

const TAG_LEN: usize = 32;

fn derive(label: u8, session: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"keyauth-dem");
    h.update([label]);
    h.update(session);
    h.finalize().into()
}

fn xor_keystream(key: &[u8; 32], data: &mut [u8]) {
    for (block, chunk) in data.chunks_mut(32).enumerate() {
        let mut h = Sha256::new();
        h.update(key);
        h.update((block as u64).to_be_bytes());
        let stream: [u8; 32] = h.finalize().into();
        for (b, s) in chunk.iter_mut().zip(stream) {
            *b ^= s;
        }
    }
}

fn tag(key: &[u8; 32], data: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(key);
    h.update(data);
    h.finalize().into()
}

/// Encrypts and authenticates; `session` is the serialized session-key
/// group element.
pub fn seal(session: &[u8], plaintext: &[u8]) -> Vec<u8> {
    let enc_key = derive(1, session);
    let mac_key = derive(2, session);
    let mut out = plaintext.to_vec();
    xor_keystream(&enc_key, &mut out);
    let t = tag(&mac_key, &out);
    out.extend_from_slice(&t);
    out
}

/// Verifies the tag and decrypts; `None` on any authentication failure.
pub fn open(session: &[u8], data: &[u8]) -> Option<Vec<u8>> {
    if data.len() < TAG_LEN {
        return None;
    }
    let (body, t) = data.split_at(data.len() - TAG_LEN);
    let mac_key = derive(2, session);
    if tag(&mac_key, body) != *t {
        return None;
    }
    let enc_key = derive(1, session);
    let mut out = body.to_vec();
    xor_keystream(&enc_key, &mut out);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_tamper_detection() {
        let session = b"session-element-bytes";
        let msg = b"the quick brown fox";
        let sealed = seal(session, msg);
        assert_eq!(open(session, &sealed).unwrap(), msg);
        let mut bad = sealed.clone();
        bad[3] ^= 1;
        assert!(open(session, &bad).is_none());
        assert!(open(b"wrong session", &sealed).is_none());
        assert!(open(session, &sealed[..10]).is_none());
    }

    #[test]
    fn empty_message() {
        let sealed = seal(b"k", b"");
        assert_eq!(sealed.len(), 32);
        assert_eq!(open(b"k", &sealed).unwrap(), b"");
    }
}
