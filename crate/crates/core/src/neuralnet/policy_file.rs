//! The `.policy` binary format.
//!
//! ```text
//! magic            8 bytes  "DSPOLICY"
//! format_version   u32
//! head kind        u8       0 = q-values, 1 = logits, 2 = gaussian
//! input contract   u8       0 = lidar, 1 = search state, 2 = pointbot
//! reserved         u16      0
//! n_dims           u32
//! layer_dims       n_dims × u32
//! log_std          f64      gaussian head only
//! parameters       f64 ...  per layer: weights row-major, then bias
//! ```
//!
//! All integers and floats are little-endian.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{InputContract, MlpParams, MlpPolicy, PolicyHead};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"DSPOLICY";
pub const FORMAT_VERSION: u32 = 1;

pub fn encode_policy(policy: &MlpPolicy) -> Vec<u8> {
    let dims = policy.params.dims();
    let mut out = Vec::with_capacity(24 + 4 * dims.len() + 8 * policy.params.as_slice().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let head = match policy.head {
        PolicyHead::QValues => 0u8,
        PolicyHead::Logits => 1,
        PolicyHead::Gaussian { .. } => 2,
    };
    out.push(head);
    out.push(policy.input.tag());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    if let PolicyHead::Gaussian { log_std } = policy.head {
        out.extend_from_slice(&log_std.to_le_bytes());
    }
    for v in policy.params.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!(
                "policy file truncated at byte {}",
                self.bytes.len()
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_policy(bytes: &[u8]) -> Result<MlpPolicy> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err(Error::Format("not a policy file (bad magic)".into()));
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported policy format version {version}"
        )));
    }
    let head_tag = cur.u8()?;
    let input_tag = cur.u8()?;
    let input = InputContract::from_tag(input_tag)
        .ok_or_else(|| Error::Format(format!("unknown input contract tag {input_tag}")))?;
    let _reserved = cur.u16()?;
    let n_dims = cur.u32()? as usize;
    if n_dims > 64 {
        return Err(Error::Format(format!("implausible layer count {n_dims}")));
    }
    let dims = (0..n_dims)
        .map(|_| cur.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let head = match head_tag {
        0 => PolicyHead::QValues,
        1 => PolicyHead::Logits,
        2 => PolicyHead::Gaussian { log_std: cur.f64()? },
        t => return Err(Error::Format(format!("unknown head kind {t}"))),
    };
    let count: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    if bytes.len() - cur.pos != count * 8 {
        return Err(Error::Format(format!(
            "expected {} parameter bytes, found {}",
            count * 8,
            bytes.len() - cur.pos
        )));
    }
    let data = (0..count).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
    MlpPolicy::new(MlpParams::from_flat(&dims, data)?, head, input)
}

pub fn write_policy<W: Write>(policy: &MlpPolicy, mut w: W) -> Result<()> {
    w.write_all(&encode_policy(policy))?;
    Ok(())
}

pub fn read_policy<R: Read>(mut r: R) -> Result<MlpPolicy> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_policy(&bytes)
}

pub fn save_policy(policy: &MlpPolicy, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_policy(policy))?;
    Ok(())
}

pub fn load_policy(path: impl AsRef<Path>) -> Result<MlpPolicy> {
    decode_policy(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    #[test]
    fn header_records_layer_dims() {
        let params = MlpParams::init(&[8, 64, 64, 5], &mut rng_from_seed(1)).unwrap();
        let policy = MlpPolicy::new(params, PolicyHead::QValues, InputContract::Lidar).unwrap();
        let bytes = encode_policy(&policy);
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 8);
        assert_eq!(decode_policy(&bytes).unwrap(), policy);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let params = MlpParams::init(&[3, 4, 1], &mut rng_from_seed(1)).unwrap();
        let policy =
            MlpPolicy::new(params, PolicyHead::Gaussian { log_std: -0.5 }, InputContract::PointBot)
                .unwrap();
        let bytes = encode_policy(&policy);
        assert!(decode_policy(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_policy(&bad).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(decode_policy(&bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(decode_policy(&long).is_err());
    }
}
