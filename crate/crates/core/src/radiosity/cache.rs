//! Binary cache for form-factor matrices.
//!
//! Layout (little endian): magic `ILSFFMAT`, `u32` version, 32-byte content
//! key, `u64` patch count `n`, `n` areas as `f64`, `n²` entries as `f64`.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::radiosity::FormFactorMatrix;
use crate::scene::Patch;

pub const MAGIC: &[u8; 8] = b"ILSFFMAT";
pub const VERSION: u32 = 1;

pub type CacheKey = [u8; 32];

/// Content hash of everything the form factors depend on.
pub fn cache_key(patches: &[Patch], n_samples: usize, epsilon: f64) -> CacheKey {
    let mut h = Sha256::new();
    h.update(MAGIC);
    h.update(VERSION.to_le_bytes());
    h.update((n_samples as u64).to_le_bytes());
    h.update(epsilon.to_le_bytes());
    h.update((patches.len() as u64).to_le_bytes());
    for p in patches {
        h.update(p.id.to_le_bytes());
        for v in p
            .center
            .iter()
            .chain(p.normal.iter())
            .chain(p.tangent.iter())
            .chain(p.half_extents.iter())
        {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().into()
}

pub fn encode(key: &CacheKey, ff: &FormFactorMatrix) -> Vec<u8> {
    let n = ff.len();
    let mut out = Vec::with_capacity(52 + 8 * (n + n * n));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(key);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for v in ff.areas().iter().chain(ff.values()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn corrupt(message: impl Into<String>) -> Error {
    Error::parse("form-factor cache", None, message)
}

pub fn decode(bytes: &[u8]) -> Result<(CacheKey, FormFactorMatrix)> {
    let mut rest = bytes;
    let mut take = |len: usize| -> Result<&[u8]> {
        if rest.len() < len {
            return Err(corrupt("truncated"));
        }
        let (head, tail) = rest.split_at(len);
        rest = tail;
        Ok(head)
    };
    if take(8)? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let key: CacheKey = take(32)?.try_into().expect("32 bytes");
    let n = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
    let count = usize::try_from(n)
        .ok()
        .and_then(|n| n.checked_mul(n)?.checked_add(n))
        .ok_or_else(|| corrupt("patch count overflows"))?;
    let payload = take(count.checked_mul(8).ok_or_else(|| corrupt("patch count overflows"))?)?;
    if !rest.is_empty() {
        return Err(corrupt("trailing bytes"));
    }
    let mut floats = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let n = n as usize;
    let areas: Vec<f64> = floats.by_ref().take(n).collect();
    let values: Vec<f64> = floats.collect();
    let ff = FormFactorMatrix::from_parts(values, areas).map_err(|e| corrupt(e.to_string()))?;
    Ok((key, ff))
}

/// Returns the cached matrix if `bytes` decodes and matches `key`.
pub fn lookup(bytes: &[u8], key: &CacheKey) -> Option<FormFactorMatrix> {
    match decode(bytes) {
        Ok((k, ff)) if &k == key => Some(ff),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;

    #[test]
    fn round_trip() {
        let ff = FormFactorMatrix::from_parts(vec![0.0, 0.25, 0.5, 0.0], vec![1.0, 0.5]).unwrap();
        let key = [7u8; 32];
        let bytes = encode(&key, &ff);
        assert_eq!(decode(&bytes).unwrap(), (key, ff.clone()));
        assert_eq!(lookup(&bytes, &key), Some(ff));
        assert_eq!(lookup(&bytes, &[0u8; 32]), None);
    }

    #[test]
    fn rejects_damage() {
        let ff = FormFactorMatrix::from_parts(vec![0.0], vec![1.0]).unwrap();
        let bytes = encode(&[1u8; 32], &ff);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode(&extra).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut huge = bytes;
        huge[44..52].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode(&huge).is_err());
    }

    #[test]
    fn key_tracks_inputs() {
        let p = Patch::new(1, Vec3::zeros(), Vec3::z(), Vec3::x(), [0.5, 0.5], 0.5).unwrap();
        let mut q = p.clone();
        let k = cache_key(std::slice::from_ref(&p), 16, 1e-4);
        assert_eq!(k, cache_key(std::slice::from_ref(&p), 16, 1e-4));
        assert_ne!(k, cache_key(std::slice::from_ref(&p), 9, 1e-4));
        assert_ne!(k, cache_key(std::slice::from_ref(&p), 16, 1e-3));
        q.center.x = 1e-9;
        assert_ne!(k, cache_key(&[q], 16, 1e-4));
        // albedo does not affect form factors
        let mut r = p.clone();
        r.albedo = 0.1;
        assert_eq!(k, cache_key(&[r], 16, 1e-4));
    }
}
