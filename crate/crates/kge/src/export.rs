//! Entity embedding export.
//!
//! TSV: a header line `<count> <dim>` (with a third token `complex` when
//! coordinates are interleaved `(re, im)` pairs), then one line per entity,
//! `name v1 … vd`, space separated.
//!
//! Binary, little-endian: magic `KGEEMB01`, u32 count, u32 dim, u8 flags
//! (bit 0: complex interleaved), then per entity a u32 byte length, the UTF-8
//! name and `dim` f32 values.

use std::io::{Read, Write};
use std::path::Path;

use kge_core::probe::NamedEmbeddings;
use kge_core::{EmbeddingTable, EntityId, Vocabulary};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"KGEEMB01";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Binary,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "binary" | "bin" => Ok(Format::Binary),
            _ => Err(format!(
                "unknown export format `{s}` (expected tsv or binary)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exported {
    pub embeddings: NamedEmbeddings,
    pub complex: bool,
}

fn rows(table: &EmbeddingTable) -> impl Iterator<Item = Vec<f32>> + '_ {
    (0..table.num_entities()).map(|i| {
        table
            .entity_interleaved(EntityId(i as u32))
            .into_iter()
            .map(|v| v as f32)
            .collect()
    })
}

pub fn write(
    path: &Path,
    format: Format,
    table: &EmbeddingTable,
    vocab: &Vocabulary,
) -> Result<()> {
    if vocab.num_entities() != table.num_entities() {
        return Err(Error::Input(format!(
            "vocabulary has {} entities but the table has {}",
            vocab.num_entities(),
            table.num_entities()
        )));
    }
    let complex = table.config().kind.is_complex();
    let mut w = crate::tsv::create(path)?;
    let io = |e| Error::io(path, e);
    match format {
        Format::Tsv => {
            let flag = if complex { " complex" } else { "" };
            writeln!(w, "{} {}{flag}", table.num_entities(), table.dim()).map_err(io)?;
            for (name, row) in vocab.entity_names().iter().zip(rows(table)) {
                w.write_all(name.as_bytes()).map_err(io)?;
                for v in row {
                    write!(w, " {v}").map_err(io)?;
                }
                w.write_all(b"\n").map_err(io)?;
            }
        }
        Format::Binary => {
            w.write_all(MAGIC).map_err(io)?;
            w.write_all(&(table.num_entities() as u32).to_le_bytes())
                .map_err(io)?;
            w.write_all(&(table.dim() as u32).to_le_bytes())
                .map_err(io)?;
            w.write_all(&[complex as u8]).map_err(io)?;
            for (name, row) in vocab.entity_names().iter().zip(rows(table)) {
                w.write_all(&(name.len() as u32).to_le_bytes())
                    .map_err(io)?;
                w.write_all(name.as_bytes()).map_err(io)?;
                for v in row {
                    w.write_all(&v.to_le_bytes()).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(io)
}

/// Reads either format, detected from the first bytes.
pub fn read(path: &Path) -> Result<Exported> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(MAGIC) {
        read_binary(path, &bytes)
    } else {
        read_tsv(path, &bytes)
    }
}

fn read_binary(path: &Path, bytes: &[u8]) -> Result<Exported> {
    let bad = |msg: &str| Error::parse(path, 0, msg.to_string());
    let mut at = MAGIC.len();
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes
            .get(at..at + n)
            .ok_or_else(|| bad("truncated embedding file"))?;
        at += n;
        Ok(s)
    };
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap()) as usize;
    let count = u32_at(take(4)?);
    let dim = u32_at(take(4)?);
    let complex = take(1)?[0] & 1 == 1;
    let mut names = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * dim);
    for _ in 0..count {
        let len = u32_at(take(4)?);
        let name = std::str::from_utf8(take(len)?).map_err(|_| bad("entity name is not UTF-8"))?;
        names.push(name.to_string());
        for c in take(4 * dim)?.chunks_exact(4) {
            values.push(f32::from_le_bytes(c.try_into().unwrap()) as f64);
        }
    }
    if take(1).is_ok() {
        return Err(bad("trailing bytes after last entity"));
    }
    Ok(Exported {
        embeddings: NamedEmbeddings::new(names, dim, values),
        complex,
    })
}

fn read_tsv(path: &Path, bytes: &[u8]) -> Result<Exported> {
    let text =
        std::str::from_utf8(bytes).map_err(|_| Error::parse(path, 0, "file is not UTF-8"))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parse(path, 1, format!("bad header `{header}`")))
    };
    let (count, dim, complex) = match head.as_slice() {
        [c, d] => (parse_usize(c)?, parse_usize(d)?, false),
        [c, d, "complex"] => (parse_usize(c)?, parse_usize(d)?, true),
        _ => return Err(Error::parse(path, 1, format!("bad header `{header}`"))),
    };
    let mut names = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * dim);
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap();
        let before = values.len();
        for p in parts {
            let v: f32 = p
                .parse()
                .map_err(|_| Error::parse(path, i + 1, format!("bad number `{p}`")))?;
            values.push(v as f64);
        }
        if values.len() - before != dim {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected {dim} values, found {}", values.len() - before),
            ));
        }
        names.push(name.to_string());
    }
    if names.len() != count {
        return Err(Error::parse(
            path,
            1,
            format!("header promises {count} rows, found {}", names.len()),
        ));
    }
    Ok(Exported {
        embeddings: NamedEmbeddings::new(names, dim, values),
        complex,
    })
}
