//! Versioned binary checkpoints with bit-exact resume.
//!
//! Byte layout (all integers little-endian):
//!
//! ```text
//! magic            8  b"SSEQMCCK"
//! version          4  u32 (currently 1)
//! fingerprint      8  u64, model + geometry hash
//! sweep_count      8  u64
//! n_sites          4  u32
//! m_slots          4  u32
//! n                8  u64, non-identity operator count
//! loops_per_sweep  4  u32
//! legs_ema         8  f64 bits
//! rng_seed        32  ChaCha12 seed
//! rng_stream       8  u64
//! rng_word_pos    16  u128
//! spins            n_sites x i8 (+1 / -1)
//! opstring         m_slots x (u8 tag, u32 unit)
//! n_cols           4  u32
//! names            n_cols x (u16 len, utf8 bytes)
//! bin_size         8  u64
//! current_count    8  u64
//! current          n_cols x f64
//! n_bins           4  u32
//! bins             n_cols x n_bins x f64
//! checksum         8  u64 FNV-1a over all preceding bytes
//! ```

use crate::estimators::Accumulator;
use crate::model::fnv1a;
use crate::sse::state::{Op, SseState};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::io::{Read, Write};
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"SSEQMCCK";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("checkpoint version {found} not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checkpoint belongs to a different model (fingerprint {found:#018x} != {expected:#018x})")]
    FingerprintMismatch { found: u64, expected: u64 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Self { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u128(&mut self, v: u128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Corrupt("truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u128(&mut self) -> Result<u128, CheckpointError> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_bits(self.u64()?))
    }
}

/// Serialize state and accumulators. The fingerprint is checked on load.
pub fn encode(state: &SseState, acc: &Accumulator, fingerprint: u64) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u64(fingerprint);
    w.u64(state.sweep_count);
    w.u32(state.spins.len() as u32);
    w.u32(state.opstring.len() as u32);
    w.u64(state.n as u64);
    w.u32(state.loops_per_sweep);
    w.f64(state.legs_per_loop_ema);
    w.bytes(&state.rng.get_seed());
    w.u64(state.rng.get_stream());
    w.u128(state.rng.get_word_pos());
    for &s in &state.spins {
        w.u8(s as u8);
    }
    for &op in &state.opstring {
        w.u8(op.tag());
        w.u32(op.unit());
    }
    let (names, bin_size, bins, current, current_count) = acc.raw_parts();
    w.u32(names.len() as u32);
    for name in names {
        w.u16(name.len() as u16);
        w.bytes(name.as_bytes());
    }
    w.u64(bin_size);
    w.u64(current_count);
    for &c in current {
        w.f64(c);
    }
    let n_bins = bins.first().map_or(0, |b| b.len());
    w.u32(n_bins as u32);
    for col in bins {
        debug_assert_eq!(col.len(), n_bins);
        for &v in col {
            w.f64(v);
        }
    }
    let checksum = fnv1a(&w.buf);
    w.u64(checksum);
    w.buf
}

/// Decode and verify; refuses foreign versions and models, and any file
/// whose checksum or structure does not match.
pub fn decode(bytes: &[u8], expected_fingerprint: u64) -> Result<(SseState, Accumulator), CheckpointError> {
    if bytes.len() < MAGIC.len() + 12 + 8 {
        return Err(CheckpointError::Corrupt("too short".into()));
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if fnv1a(payload) != stored {
        return Err(CheckpointError::Corrupt("checksum mismatch".into()));
    }
    let mut r = Reader::new(payload);
    if r.take(8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::VersionMismatch {
            found: version,
            expected: VERSION,
        });
    }
    let fingerprint = r.u64()?;
    if fingerprint != expected_fingerprint {
        return Err(CheckpointError::FingerprintMismatch {
            found: fingerprint,
            expected: expected_fingerprint,
        });
    }
    let sweep_count = r.u64()?;
    let n_sites = r.u32()? as usize;
    let m_slots = r.u32()? as usize;
    let n = r.u64()? as usize;
    let loops_per_sweep = r.u32()?;
    let legs_per_loop_ema = r.f64()?;
    let seed: [u8; 32] = r.take(32)?.try_into().unwrap();
    let stream = r.u64()?;
    let word_pos = r.u128()?;
    let mut rng = ChaCha12Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(word_pos);

    let mut spins = Vec::with_capacity(n_sites);
    for _ in 0..n_sites {
        let b = r.u8()? as i8;
        if b != 1 && b != -1 {
            return Err(CheckpointError::Corrupt(format!("spin byte {b}")));
        }
        spins.push(b);
    }
    let mut opstring = Vec::with_capacity(m_slots);
    let mut count = 0usize;
    for _ in 0..m_slots {
        let tag = r.u8()?;
        let unit = r.u32()?;
        let op = Op::from_tag(tag, unit)
            .ok_or_else(|| CheckpointError::Corrupt(format!("op tag {tag}")))?;
        if !op.is_identity() {
            count += 1;
        }
        opstring.push(op);
    }
    if count != n {
        return Err(CheckpointError::Corrupt(format!(
            "operator count {count} != header n {n}"
        )));
    }

    let n_cols = r.u32()? as usize;
    let mut names = Vec::with_capacity(n_cols);
    for _ in 0..n_cols {
        let len = r.u16()? as usize;
        let raw = r.take(len)?;
        let name = std::str::from_utf8(raw)
            .map_err(|_| CheckpointError::Corrupt("column name".into()))?;
        names.push(name.to_string());
    }
    let bin_size = r.u64()?;
    if bin_size == 0 {
        return Err(CheckpointError::Corrupt("zero bin size".into()));
    }
    let current_count = r.u64()?;
    let mut current = Vec::with_capacity(n_cols);
    for _ in 0..n_cols {
        current.push(r.f64()?);
    }
    let n_bins = r.u32()? as usize;
    let mut bins = Vec::with_capacity(n_cols);
    for _ in 0..n_cols {
        let mut col = Vec::with_capacity(n_bins);
        for _ in 0..n_bins {
            col.push(r.f64()?);
        }
        bins.push(col);
    }
    if r.pos != payload.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }

    let state = SseState {
        spins,
        opstring,
        n,
        rng,
        sweep_count,
        loops_per_sweep,
        legs_per_loop_ema,
    };
    let acc = Accumulator::from_raw_parts(names, bin_size, bins, current, current_count);
    Ok((state, acc))
}

pub fn save(
    path: &std::path::Path,
    state: &SseState,
    acc: &Accumulator,
    fingerprint: u64,
) -> Result<(), CheckpointError> {
    let bytes = encode(state, acc, fingerprint);
    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(
    path: &std::path::Path,
    fingerprint: u64,
) -> Result<(SseState, Accumulator), CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, fingerprint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;
    use crate::model::{Model, ModelKind, ModelParams};

    fn sample() -> (SseState, Accumulator, u64) {
        let g = build_lattice(4, 1, true).unwrap();
        let m = Model::build(
            ModelKind::Xxz,
            ModelParams {
                beta: 2.0,
                ..Default::default()
            },
            &g,
        )
        .unwrap();
        let mut st = SseState::init(&m, 5, 1);
        st.opstring[3] = Op::BondDiag(2);
        st.n = 1;
        st.sweep_count = 17;
        let mut acc = Accumulator::new(vec!["energy".into(), "zz@1,0".into()], 4);
        for k in 0..10 {
            acc.push(&[k as f64, -k as f64]);
        }
        let fp = m.fingerprint(4, 1);
        (st, acc, fp)
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let (st, acc, fp) = sample();
        let bytes = encode(&st, &acc, fp);
        let (st2, acc2) = decode(&bytes, fp).unwrap();
        assert_eq!(st.spins, st2.spins);
        assert_eq!(st.opstring, st2.opstring);
        assert_eq!(st.n, st2.n);
        assert_eq!(st.sweep_count, st2.sweep_count);
        assert_eq!(st.loops_per_sweep, st2.loops_per_sweep);
        assert_eq!(st.legs_per_loop_ema.to_bits(), st2.legs_per_loop_ema.to_bits());
        assert_eq!(st.rng, st2.rng);
        assert_eq!(acc, acc2);
        // Serialization is deterministic.
        assert_eq!(bytes, encode(&st2, &acc2, fp));
    }

    #[test]
    fn wrong_fingerprint_refused() {
        let (st, acc, fp) = sample();
        let bytes = encode(&st, &acc, fp);
        assert!(matches!(
            decode(&bytes, fp ^ 1),
            Err(CheckpointError::FingerprintMismatch { .. })
        ));
    }

    #[test]
    fn corruption_detected() {
        let (st, acc, fp) = sample();
        let bytes = encode(&st, &acc, fp);
        for idx in [10, 40, bytes.len() / 2, bytes.len() - 9] {
            let mut bad = bytes.clone();
            bad[idx] ^= 0x40;
            assert!(
                decode(&bad, fp).is_err(),
                "flip at {idx} must not load cleanly"
            );
        }
        let truncated = &bytes[..bytes.len() - 3];
        assert!(decode(truncated, fp).is_err());
    }

    #[test]
    fn foreign_version_refused() {
        let (st, acc, fp) = sample();
        let mut bytes = encode(&st, &acc, fp);
        bytes[8] = 99;
        // Fix the checksum so only the version differs.
        let body_len = bytes.len() - 8;
        let sum = crate::model::fnv1a(&bytes[..body_len]);
        let csrange = body_len..;
        bytes[csrange].copy_from_slice(&sum.to_le_bytes());
        assert!(matches!(
            decode(&bytes, fp),
            Err(CheckpointError::VersionMismatch { found: 99, .. })
        ));
    }
}
