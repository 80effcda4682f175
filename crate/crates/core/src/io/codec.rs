//! Little-endian binary encoding of [`UnifiedSample`] payloads.
//!
//! Feature tensors are mostly zeros (padding, masked slots, one-hots), so they
//! are stored as a nonzero bitmap followed by the nonzero values. A value is
//! "zero" only if its bit pattern is all zeros, so `-0.0` survives.

use crate::preprocess::{UnifiedSample, MAP_CHANNELS};
use crate::scenario::{AgentType, TransformRecord};

#[derive(Debug)]
pub struct DecodeError(pub String);

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.buf
            .extend_from_slice(&u32::try_from(v).expect("dimension fits u32").to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.buf.extend_from_slice(s.as_bytes());
    }
    fn bits(&mut self, flags: impl ExactSizeIterator<Item = bool>) {
        let mut byte = 0u8;
        let mut n = 0;
        for f in flags {
            byte |= (f as u8) << (n % 8);
            n += 1;
            if n % 8 == 0 {
                self.buf.push(byte);
                byte = 0;
            }
        }
        if n % 8 != 0 {
            self.buf.push(byte);
        }
    }
    fn mask(&mut self, m: &[bool]) {
        self.bits(m.iter().copied());
    }
    fn sparse(&mut self, t: &[f64]) {
        self.bits(t.iter().map(|v| v.to_bits() != 0));
        self.buf.reserve(t.len() * 8);
        for v in t.iter().filter(|v| v.to_bits() != 0) {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn dense(&mut self, t: &[f64]) {
        for &v in t {
            self.f64(v);
        }
    }
    fn points(&mut self, p: &[[f64; 2]]) {
        for q in p {
            self.f64(q[0]);
            self.f64(q[1]);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| DecodeError(format!("payload truncated at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8, DecodeError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize, DecodeError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64, DecodeError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, DecodeError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String, DecodeError> {
        let n = self.u32()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| DecodeError(e.to_string()))
    }
    fn bits(&mut self, n: usize) -> Result<Vec<bool>, DecodeError> {
        let bytes = self.take(n.div_ceil(8))?;
        Ok((0..n).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect())
    }
    fn sparse(&mut self, n: usize) -> Result<Vec<f64>, DecodeError> {
        let bitmap = self.take(n.div_ceil(8))?;
        let count: usize = bitmap.iter().map(|b| b.count_ones() as usize).sum();
        let values = self.take(count * 8)?;
        let mut out = vec![0.0; n];
        let mut k = 0;
        for (i, &byte) in bitmap.iter().enumerate() {
            let mut b = byte;
            while b != 0 {
                let idx = i * 8 + b.trailing_zeros() as usize;
                if idx >= n {
                    return Err(DecodeError("padding bit set in sparse bitmap".into()));
                }
                out[idx] = f64::from_le_bytes(values[k * 8..k * 8 + 8].try_into().unwrap());
                k += 1;
                b &= b - 1;
            }
        }
        Ok(out)
    }
    fn dense(&mut self, n: usize) -> Result<Vec<f64>, DecodeError> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn points(&mut self, n: usize) -> Result<Vec<[f64; 2]>, DecodeError> {
        (0..n).map(|_| Ok([self.f64()?, self.f64()?])).collect()
    }
}

pub fn encode_sample(s: &UnifiedSample) -> Vec<u8> {
    let mut w = Writer::default();
    w.str(&s.sample_key);
    w.u8(s.agent_type.index() as u8);
    w.u64(s.config_fingerprint);
    w.f64(s.transform.translation[0]);
    w.f64(s.transform.translation[1]);
    w.f64(s.transform.rotation);
    for d in [
        s.past_len,
        s.future_len,
        s.agent_channels,
        s.max_neighbors,
        s.points_per_chunk,
        s.num_chunks,
    ] {
        w.u32(d);
    }
    w.sparse(&s.focal_features);
    w.mask(&s.focal_mask);
    w.sparse(&s.neighbor_features);
    w.mask(&s.neighbor_mask);
    w.sparse(&s.map_features);
    w.mask(&s.map_mask);
    w.points(&s.gt_future);
    w.mask(&s.gt_mask);
    w.dense(&s.gt_future_heading);
    w.dense(&s.gt_future_speed);
    w.points(&s.history_xy);
    w.buf
}

pub fn decode_sample(buf: &[u8]) -> Result<UnifiedSample, DecodeError> {
    let mut r = Reader { buf, pos: 0 };
    let sample_key = r.str()?;
    let agent_type = AgentType::from_index(r.u8()? as usize)
        .ok_or_else(|| DecodeError("bad agent type".into()))?;
    let config_fingerprint = r.u64()?;
    let transform = TransformRecord {
        translation: [r.f64()?, r.f64()?],
        rotation: r.f64()?,
    };
    let past_len = r.u32()?;
    let future_len = r.u32()?;
    let agent_channels = r.u32()?;
    let max_neighbors = r.u32()?;
    let points_per_chunk = r.u32()?;
    let num_chunks = r.u32()?;
    let map_slots = num_chunks
        .checked_mul(points_per_chunk)
        .ok_or_else(|| DecodeError("dimension overflow".into()))?;
    let out = UnifiedSample {
        sample_key,
        agent_type,
        config_fingerprint,
        transform,
        past_len,
        future_len,
        agent_channels,
        max_neighbors,
        points_per_chunk,
        num_chunks,
        focal_features: r.sparse(past_len * agent_channels)?,
        focal_mask: r.bits(past_len)?,
        neighbor_features: r.sparse(max_neighbors * past_len * agent_channels)?,
        neighbor_mask: r.bits(max_neighbors * past_len)?,
        map_features: r.sparse(map_slots * MAP_CHANNELS)?,
        map_mask: r.bits(map_slots)?,
        gt_future: r.points(future_len)?,
        gt_mask: r.bits(future_len)?,
        gt_future_heading: r.dense(future_len)?,
        gt_future_speed: r.dense(future_len)?,
        history_xy: r.points(past_len)?,
    };
    if r.pos != buf.len() {
        return Err(DecodeError(format!(
            "{} trailing bytes after sample",
            buf.len() - r.pos
        )));
    }
    Ok(out)
}
