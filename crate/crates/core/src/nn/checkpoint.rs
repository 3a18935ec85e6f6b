//! Binary container: magic, format version, length-prefixed JSON header,
//! then little-endian f64 arrays (parameters, optional Adam moments).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Adam, Mlp, NetworkSpec};
use crate::error::CheckpointError;

const MAGIC: &[u8; 8] = b"ADSIMNN\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    spec: NetworkSpec,
    param_count: usize,
    optimizer: Option<OptimizerHeader>,
    #[serde(default)]
    meta: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct OptimizerHeader {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
}

/// A network snapshot with optional optimizer state and free-form metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: Mlp,
    pub optimizer: Option<Adam>,
    pub meta: serde_json::Value,
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), CheckpointError> {
    let header = Header {
        spec: ck.net.spec().clone(),
        param_count: ck.net.len(),
        optimizer: ck.optimizer.as_ref().map(|o| OptimizerHeader { lr: o.lr, beta1: o.beta1, beta2: o.beta2, eps: o.eps, t: o.t }),
        meta: ck.meta.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    let mut buf = Vec::with_capacity(32 + header.len() + 8 * ck.net.len() * 3);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header);
    let mut put = |v: &[f64]| v.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    put(ck.net.params());
    if let Some(o) = &ck.optimizer {
        put(&o.m);
        put(&o.v);
    }
    // Write-then-rename so a crash never leaves a truncated checkpoint.
    let tmp = path.with_extension("tmp");
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(&buf)?;
    f.sync_all()?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };
    if cur.take(8)? != MAGIC {
        return Err(CheckpointError::Format("not a network checkpoint".into()));
    }
    let version = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::Format(format!("unsupported version {version}")));
    }
    let header_len = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes")) as usize;
    let header: Header = serde_json::from_slice(cur.take(header_len)?)?;
    header.spec.validate().map_err(CheckpointError::Format)?;
    if header.spec.param_count() != header.param_count {
        return Err(CheckpointError::Format("parameter count does not match spec".into()));
    }
    let params = cur.floats(header.param_count)?;
    let net = Mlp::from_params(header.spec, params).map_err(|e| CheckpointError::Format(e.to_string()))?;
    let optimizer = match header.optimizer {
        Some(o) => Some(Adam {
            lr: o.lr,
            beta1: o.beta1,
            beta2: o.beta2,
            eps: o.eps,
            t: o.t,
            m: cur.floats(header.param_count)?,
            v: cur.floats(header.param_count)?,
        }),
        None => None,
    };
    if cur.pos != bytes.len() {
        return Err(CheckpointError::Format("trailing bytes".into()));
    }
    Ok(Checkpoint { net, optimizer, meta: header.meta })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| CheckpointError::Format("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| CheckpointError::Format("size overflow".into()))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}
