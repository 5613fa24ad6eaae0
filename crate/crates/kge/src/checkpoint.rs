//! Binary checkpoint files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                                      |
//! |-------:|-----:|--------------------------------------------|
//! | 0      | 8    | magic `KGECKPT1`                           |
//! | 8      | 4    | format version (`1`)                       |
//! | 12     | 1    | model kind (0 TransE, 1 DistMult, 2 ComplEx, 3 SimplE, 4 RotatE) |
//! | 13     | 1    | norm order (1 or 2)                        |
//! | 14     | 2    | reserved, zero                             |
//! | 16     | 4    | entity dimension                           |
//! | 20     | 4    | entity count                               |
//! | 24     | 4    | relation count                             |
//! | 28     | 4    | relation dimension                         |
//! | 32     | 8    | epoch (u64)                                |
//! | 40     | 8    | margin γ (f64)                             |
//! | 48     | 8    | validation MRR (f64, NaN when not scored)  |
//! | 56     | …    | entity parameters, then relation parameters, f32 |
//!
//! Parameters are stored in the in-memory row layout of the model.

use std::io::{Read, Write};
use std::path::Path;

use kge_core::{EmbeddingTable, ModelConfig, ModelKind, Norm};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"KGECKPT1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 56;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointFile {
    pub table: EmbeddingTable,
    pub epoch: u64,
    pub valid_mrr: f64,
}

pub fn encode(ckpt: &CheckpointFile) -> Vec<u8> {
    let t = &ckpt.table;
    let cfg = t.config();
    let mut out =
        Vec::with_capacity(HEADER_LEN + 4 * (t.entity_params().len() + t.relation_params().len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(cfg.kind.code());
    out.push(cfg.norm.order());
    out.extend_from_slice(&[0, 0]);
    for v in [cfg.dim, t.num_entities(), t.num_relations(), cfg.rel_dim()] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&ckpt.epoch.to_le_bytes());
    out.extend_from_slice(&cfg.margin.to_le_bytes());
    out.extend_from_slice(&ckpt.valid_mrr.to_le_bytes());
    for v in t.entity_params().iter().chain(t.relation_params()) {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

fn le<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().unwrap()
}

pub fn decode(bytes: &[u8]) -> std::result::Result<CheckpointFile, String> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err("not a checkpoint file".into());
    }
    let version = u32::from_le_bytes(le(bytes, 8));
    if version != VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let kind = ModelKind::from_code(bytes[12])
        .ok_or_else(|| format!("unknown model code {}", bytes[12]))?;
    let norm =
        Norm::from_order(bytes[13]).ok_or_else(|| format!("unknown norm order {}", bytes[13]))?;
    let u = |at| u32::from_le_bytes(le(bytes, at)) as usize;
    let (dim, ne, nr, rel_dim) = (u(16), u(20), u(24), u(28));
    let epoch = u64::from_le_bytes(le(bytes, 32));
    let margin = f64::from_le_bytes(le(bytes, 40));
    let valid_mrr = f64::from_le_bytes(le(bytes, 48));
    let cfg = ModelConfig::new(kind, dim)
        .with_margin(margin)
        .with_norm(norm);
    if cfg.rel_dim() != rel_dim {
        return Err(format!(
            "relation dimension {rel_dim} does not match {kind} at dim {dim}"
        ));
    }
    let n_ent = ne * dim;
    let n_rel = nr * rel_dim;
    if bytes.len() != HEADER_LEN + 4 * (n_ent + n_rel) {
        return Err(format!(
            "expected {} bytes of parameters, found {}",
            4 * (n_ent + n_rel),
            bytes.len() - HEADER_LEN
        ));
    }
    let mut values = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let entities: Vec<f64> = values.by_ref().take(n_ent).collect();
    let relations: Vec<f64> = values.collect();
    let table =
        EmbeddingTable::from_parts(cfg, ne, nr, entities, relations).map_err(|e| e.to_string())?;
    Ok(CheckpointFile {
        table,
        epoch,
        valid_mrr,
    })
}

pub fn write(path: &Path, ckpt: &CheckpointFile) -> Result<()> {
    let mut w = crate::tsv::create(path)?;
    w.write_all(&encode(ckpt))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<CheckpointFile> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|msg| Error::parse(path, 0, msg))
}

/// Table with every parameter rounded through f32, as a checkpoint stores it.
pub fn round_to_f32(table: &EmbeddingTable) -> EmbeddingTable {
    let r = |v: &[f64]| v.iter().map(|x| *x as f32 as f64).collect();
    EmbeddingTable::from_parts(
        *table.config(),
        table.num_entities(),
        table.num_relations(),
        r(table.entity_params()),
        r(table.relation_params()),
    )
    .expect("same shape")
}
