//! Binary checkpoint encoding.
//!
//! Layout: magic `CFG1`, format version, observation-layout hash, config
//! digest, architecture descriptor, global step, named tensor table (name,
//! dtype, shape), little-endian float payloads in table order, optional
//! optimizer state, and a trailing FNV-1a checksum over everything before
//! it. Tensors default to 64-bit floats so a save/load round trip is
//! bit-exact; 32-bit payloads are supported for compact export.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::math::Fnv1a;
use crate::policy::{tensor_specs, ArchDesc, PolicyParams};
use crate::trainer::adam::Adam;

pub const MAGIC: &[u8; 4] = b"CFG1";
pub const VERSION: u32 = 1;

/// Tensor payload precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self, CoreError> {
        match c {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(CoreError::Checkpoint(format!("unknown dtype code {other}"))),
        }
    }
}

/// A decoded checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub params: PolicyParams,
    pub optimizer: Option<Adam>,
    pub global_step: u64,
    pub layout_hash: u64,
    pub config_digest: u64,
}

/// Header-level view without the payloads.
#[derive(Clone, Debug)]
pub struct CheckpointSummary {
    pub version: u32,
    pub layout_hash: u64,
    pub config_digest: u64,
    pub global_step: u64,
    pub arch: ArchDesc,
    pub tensors: Vec<(String, Vec<usize>, Dtype)>,
    pub has_optimizer: bool,
    pub total_params: usize,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
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

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f32(&mut self, v: f32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CoreError> {
        if self.pos + n > self.data.len() {
            return Err(CoreError::Checkpoint(String::from(
                "unexpected end of checkpoint data",
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CoreError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CoreError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CoreError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CoreError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CoreError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, CoreError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn write_arch(w: &mut Writer, desc: &ArchDesc) {
    w.u32(desc.obs_dim as u32);
    w.u32(desc.act_dim as u32);
    w.u32(desc.hidden.len() as u32);
    for &h in &desc.hidden {
        w.u32(h as u32);
    }
    w.u8(u8::from(desc.recurrent));
    w.u32(desc.rec_hidden as u32);
}

fn read_arch(r: &mut Reader, layout_hash: u64) -> Result<ArchDesc, CoreError> {
    let obs_dim = r.u32()? as usize;
    let act_dim = r.u32()? as usize;
    let n_hidden = r.u32()? as usize;
    if n_hidden > 64 {
        return Err(CoreError::Checkpoint(format!(
            "implausible trunk depth {n_hidden}"
        )));
    }
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(r.u32()? as usize);
    }
    let recurrent = r.u8()? != 0;
    let rec_hidden = r.u32()? as usize;
    Ok(ArchDesc {
        obs_dim,
        act_dim,
        hidden,
        recurrent,
        rec_hidden,
        layout_hash,
    })
}

/// Serialize parameters, optional optimizer state and the training step.
pub fn encode_checkpoint(
    params: &PolicyParams,
    optimizer: Option<&Adam>,
    global_step: u64,
    config_digest: u64,
    dtype: Dtype,
) -> Vec<u8> {
    let mut w = Writer::new();
    w.bytes(MAGIC);
    w.u32(VERSION);
    w.u64(params.desc().layout_hash);
    w.u64(config_digest);
    write_arch(&mut w, params.desc());
    w.u64(global_step);
    let specs = params.specs();
    w.u32(specs.len() as u32);
    for s in specs {
        w.u16(s.name.len() as u16);
        w.bytes(s.name.as_bytes());
        w.u8(dtype.code());
        w.u8(s.shape.len() as u8);
        for &d in &s.shape {
            w.u32(d as u32);
        }
    }
    for s in specs {
        let view = &params.data()[s.offset..s.offset + s.len()];
        match dtype {
            Dtype::F64 => view.iter().for_each(|v| w.f64(*v)),
            Dtype::F32 => view.iter().for_each(|v| w.f32(*v as f32)),
        }
    }
    match optimizer {
        None => w.u8(0),
        Some(opt) => {
            w.u8(1);
            w.u64(opt.t);
            opt.m.iter().for_each(|v| w.f64(*v));
            opt.v.iter().for_each(|v| w.f64(*v));
        }
    }
    let mut h = Fnv1a::new();
    h.update(&w.buf);
    let checksum = h.finish();
    w.u64(checksum);
    w.buf
}

fn verify_checksum(bytes: &[u8]) -> Result<&[u8], CoreError> {
    if bytes.len() < MAGIC.len() + 12 {
        return Err(CoreError::Checkpoint(String::from("checkpoint too short")));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let mut h = Fnv1a::new();
    h.update(body);
    if h.finish() != stored {
        return Err(CoreError::Checkpoint(String::from(
            "checksum mismatch: truncated or corrupted file",
        )));
    }
    Ok(body)
}

fn read_header(r: &mut Reader) -> Result<(u64, u64, ArchDesc, u64), CoreError> {
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(CoreError::Checkpoint(String::from("bad magic")));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CoreError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let layout_hash = r.u64()?;
    let config_digest = r.u64()?;
    let arch = read_arch(r, layout_hash)?;
    let global_step = r.u64()?;
    Ok((layout_hash, config_digest, arch, global_step))
}

type TensorEntry = (String, Dtype, Vec<usize>);

fn read_tensor_table(r: &mut Reader) -> Result<Vec<TensorEntry>, CoreError> {
    let count = r.u32()? as usize;
    if count > 4096 {
        return Err(CoreError::Checkpoint(format!(
            "implausible tensor count {count}"
        )));
    }
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u16()? as usize;
        let name = core::str::from_utf8(r.take(name_len)?)
            .map_err(|_| CoreError::Checkpoint(String::from("tensor name is not UTF-8")))?
            .into();
        let dtype = Dtype::from_code(r.u8()?)?;
        let ndim = r.u8()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(r.u32()? as usize);
        }
        entries.push((name, dtype, shape));
    }
    Ok(entries)
}

/// Decode and fully validate a checkpoint. The checksum is verified before
/// anything else, so a truncated file never yields a partial load.
pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint, CoreError> {
    let body = verify_checksum(bytes)?;
    let mut r = Reader::new(body);
    let (layout_hash, config_digest, arch, global_step) = read_header(&mut r)?;
    arch.validate()
        .map_err(|e| CoreError::Checkpoint(format!("invalid architecture: {e}")))?;
    let entries = read_tensor_table(&mut r)?;
    let expected = tensor_specs(&arch);
    if entries.len() != expected.len() {
        return Err(CoreError::Checkpoint(format!(
            "tensor table has {} entries, architecture expects {}",
            entries.len(),
            expected.len()
        )));
    }
    for (entry, spec) in entries.iter().zip(&expected) {
        if entry.0 != spec.name || entry.2 != spec.shape {
            return Err(CoreError::Checkpoint(format!(
                "tensor {} has shape {:?}, expected {} {:?}",
                entry.0, entry.2, spec.name, spec.shape
            )));
        }
    }
    let total: usize = expected.iter().map(|s| s.len()).sum();
    let mut data = vec![0.0f64; total];
    for (entry, spec) in entries.iter().zip(&expected) {
        let view = &mut data[spec.offset..spec.offset + spec.len()];
        match entry.1 {
            Dtype::F64 => {
                for v in view.iter_mut() {
                    *v = r.f64()?;
                }
            }
            Dtype::F32 => {
                for v in view.iter_mut() {
                    *v = f64::from(r.f32()?);
                }
            }
        }
    }
    let params = PolicyParams::from_data(arch, data)?;
    let optimizer = match r.u8()? {
        0 => None,
        1 => {
            let t = r.u64()?;
            let mut adam = Adam::new(total);
            adam.t = t;
            for v in adam.m.iter_mut() {
                *v = r.f64()?;
            }
            for v in adam.v.iter_mut() {
                *v = r.f64()?;
            }
            Some(adam)
        }
        other => {
            return Err(CoreError::Checkpoint(format!(
                "unknown optimizer tag {other}"
            )))
        }
    };
    if r.pos != body.len() {
        return Err(CoreError::Checkpoint(format!(
            "{} trailing bytes after payload",
            body.len() - r.pos
        )));
    }
    Ok(Checkpoint {
        params,
        optimizer,
        global_step,
        layout_hash,
        config_digest,
    })
}

/// Decode only the header and tensor table.
pub fn decode_summary(bytes: &[u8]) -> Result<CheckpointSummary, CoreError> {
    let body = verify_checksum(bytes)?;
    let mut r = Reader::new(body);
    let (layout_hash, config_digest, arch, global_step) = read_header(&mut r)?;
    let entries = read_tensor_table(&mut r)?;
    let total_params = entries.iter().map(|e| e.2.iter().product::<usize>()).sum();
    // skip payloads to find the optimizer tag
    let mut payload = 0usize;
    for e in &entries {
        let len: usize = e.2.iter().product();
        payload += len
            * match e.1 {
                Dtype::F32 => 4,
                Dtype::F64 => 8,
            };
    }
    r.take(payload)?;
    let has_optimizer = r.u8()? == 1;
    Ok(CheckpointSummary {
        version: VERSION,
        layout_hash,
        config_digest,
        global_step,
        arch,
        tensors: entries.into_iter().map(|(n, d, s)| (n, s, d)).collect(),
        has_optimizer,
        total_params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use alloc::vec;

    fn sample_params() -> PolicyParams {
        let desc = ArchDesc {
            obs_dim: 5,
            act_dim: 3,
            hidden: vec![8, 8],
            recurrent: true,
            rec_hidden: 4,
            layout_hash: 0xfeed,
        };
        PolicyParams::init(desc, &mut rng_from_seed(11)).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let params = sample_params();
        let mut adam = Adam::new(params.num_params());
        adam.t = 17;
        adam.m[3] = 0.125;
        adam.v[5] = -0.5;
        let bytes = encode_checkpoint(&params, Some(&adam), 4242, 0xabcd, Dtype::F64);
        let ck = decode_checkpoint(&bytes).unwrap();
        assert_eq!(ck.params.data(), params.data());
        assert_eq!(ck.params.desc(), params.desc());
        assert_eq!(ck.global_step, 4242);
        assert_eq!(ck.config_digest, 0xabcd);
        assert_eq!(ck.layout_hash, 0xfeed);
        let opt = ck.optimizer.unwrap();
        assert_eq!(opt.t, 17);
        assert_eq!(opt.m, adam.m);
        assert_eq!(opt.v, adam.v);
    }

    #[test]
    fn truncation_is_detected_everywhere() {
        let params = sample_params();
        let bytes = encode_checkpoint(&params, None, 1, 2, Dtype::F64);
        for cut in [1, 8, bytes.len() / 2, bytes.len() - 1] {
            let truncated = &bytes[..bytes.len() - cut];
            assert!(
                decode_checkpoint(truncated).is_err(),
                "cut {cut} should fail"
            );
        }
    }

    #[test]
    fn corruption_is_detected() {
        let params = sample_params();
        let mut bytes = encode_checkpoint(&params, None, 1, 2, Dtype::F64);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        assert!(decode_checkpoint(&bytes).is_err());
    }

    #[test]
    fn f32_export_loads_with_reduced_precision() {
        let params = sample_params();
        let bytes = encode_checkpoint(&params, None, 0, 0, Dtype::F32);
        let ck = decode_checkpoint(&bytes).unwrap();
        for (a, b) in ck.params.data().iter().zip(params.data()) {
            assert!((a - b).abs() <= 1e-6);
            assert_eq!(*a, f64::from(*b as f32));
        }
    }

    #[test]
    fn summary_reports_table() {
        let params = sample_params();
        let bytes = encode_checkpoint(&params, None, 9, 8, Dtype::F64);
        let s = decode_summary(&bytes).unwrap();
        assert_eq!(s.global_step, 9);
        assert_eq!(s.total_params, params.num_params());
        assert!(!s.has_optimizer);
        assert_eq!(s.tensors.len(), params.specs().len());
    }
}
