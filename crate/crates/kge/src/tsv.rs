//! Tab-separated triple, label, reciprocal-pair and power-task files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use kge_core::kg::{LabelRecord, Vocabulary};
use kge_core::splitter::ReciprocalMap;

use crate::error::{Error, Result};

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Calls `f(line_number, line)` for every non-blank line with trailing
/// whitespace removed.
pub fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    let mut line = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(());
        }
        line += 1;
        let text = buf.trim_end();
        if text.is_empty() {
            continue;
        }
        f(line, text)?;
    }
}

fn fields<'a, const N: usize>(path: &Path, line: usize, text: &'a str) -> Result<[&'a str; N]> {
    let parts: Vec<&str> = text.split('\t').collect();
    if parts.len() != N {
        return Err(Error::parse(
            path,
            line,
            format!("expected {N} tab-separated fields, found {}", parts.len()),
        ));
    }
    if let Some(i) = parts.iter().position(|p| p.is_empty()) {
        return Err(Error::parse(
            path,
            line,
            format!("field {} is empty", i + 1),
        ));
    }
    Ok(std::array::from_fn(|i| parts[i]))
}

pub type RawTriple = (String, String, String);

pub fn read_triples(path: &Path) -> Result<Vec<RawTriple>> {
    let mut out = Vec::new();
    for_each_line(path, |line, text| {
        let [h, r, t] = fields::<3>(path, line, text)?;
        out.push((h.to_string(), r.to_string(), t.to_string()));
        Ok(())
    })?;
    Ok(out)
}

pub fn write_triples<'a>(
    path: &Path,
    triples: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>,
) -> Result<()> {
    let mut w = create(path)?;
    for (h, r, t) in triples {
        writeln!(w, "{h}\t{r}\t{t}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_store(path: &Path, vocab: &Vocabulary, triples: &[kge_core::Triple]) -> Result<()> {
    write_triples(path, triples.iter().map(|t| vocab.decode(t)))
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRecord>> {
    let mut out = Vec::new();
    for_each_line(path, |line, text| {
        let [e, ty, g] = fields::<3>(path, line, text)?;
        out.push(LabelRecord {
            entity: e.to_string(),
            semantic_type: ty.to_string(),
            group: g.to_string(),
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[LabelRecord]) -> Result<()> {
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{}\t{}\t{}", l.entity, l.semantic_type, l.group)
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `relation<TAB>inverse` rows; a relation paired with itself is symmetric.
/// Pairs naming relations absent from `vocab` are skipped and counted.
pub fn read_reciprocals(path: &Path, vocab: &Vocabulary) -> Result<(ReciprocalMap, usize)> {
    let mut map = ReciprocalMap::new();
    let mut skipped = 0;
    for_each_line(path, |line, text| {
        if text.starts_with('#') {
            return Ok(());
        }
        let [a, b] = fields::<2>(path, line, text)?;
        match (vocab.relation(a), vocab.relation(b)) {
            (Some(a), Some(b)) => map
                .insert_pair(a, b)
                .map_err(|e| Error::parse(path, line, e.to_string())),
            _ => {
                skipped += 1;
                Ok(())
            }
        }
    })?;
    Ok((map, skipped))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerRow {
    pub head: String,
    pub tail: String,
    pub task: String,
    pub head_category: String,
    pub tail_category: String,
}

pub fn read_power_rows(path: &Path) -> Result<Vec<PowerRow>> {
    let mut out = Vec::new();
    for_each_line(path, |line, text| {
        let [h, t, task, hc, tc] = fields::<5>(path, line, text)?;
        out.push(PowerRow {
            head: h.into(),
            tail: t.into(),
            task: task.into(),
            head_category: hc.into(),
            tail_category: tc.into(),
        });
        Ok(())
    })?;
    Ok(out)
}
