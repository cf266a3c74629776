//! Versioned binary parameter checkpoints.
//!
//! Layout (little-endian): magic `MDGK`, `u32` version, `u64` length of a JSON
//! architecture description followed by its bytes, `u64` parameter count, then the
//! parameters as `f64` in [`Params::buffers`] order.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::arch::ArchConfig;
use super::{Graph, Params};

pub const MAGIC: &[u8; 4] = b"MDGK";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("architecture: {0}")]
    Arch(String),
    #[error("checkpoint holds {got} parameters, architecture needs {expected}")]
    ParamCount { expected: usize, got: usize },
}

pub fn write_checkpoint<W: Write>(mut w: W, config: &ArchConfig, params: &Params) -> Result<(), CheckpointError> {
    let json = serde_json::to_vec(config).map_err(|e| CheckpointError::Arch(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u64::<LittleEndian>(json.len() as u64)?;
    w.write_all(&json)?;
    let flat = params.to_flat();
    w.write_u64::<LittleEndian>(flat.len() as u64)?;
    for x in flat {
        w.write_f64::<LittleEndian>(x)?;
    }
    Ok(())
}

/// Reads a checkpoint and rebuilds its graph.
pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(ArchConfig, Graph, Params), CheckpointError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let len = r.read_u64::<LittleEndian>()? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)?;
    let config: ArchConfig = serde_json::from_slice(&json).map_err(|e| CheckpointError::Arch(e.to_string()))?;
    let (graph, mut params) = config.build(0).map_err(|e| CheckpointError::Arch(e.to_string()))?;
    let n = r.read_u64::<LittleEndian>()? as usize;
    if n != params.len() {
        return Err(CheckpointError::ParamCount { expected: params.len(), got: n });
    }
    let mut flat = vec![0.0; n];
    r.read_f64_into::<LittleEndian>(&mut flat)?;
    params.set_flat(&flat);
    Ok((config, graph, params))
}
