//! Dataset I/O: the `EMB1` binary container and the CSV interchange format.
//!
//! Both formats round-trip an [`EmbeddingSet`] exactly: stored floats are
//! 32-bit little-endian in the binary container, and CSV uses the shortest
//! decimal form that parses back to the identical f32 bits.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};

pub(crate) const EMB_MAGIC: &[u8; 4] = b"EMB1";

/// On-disk dataset encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Csv,
}

impl Format {
    /// Picks the format from a file extension: `.csv` means CSV, everything
    /// else is the binary container.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Binary,
        }
    }
}

/// Loads an embedding set, validating every invariant on the way in.
pub fn load_embeddings(path: impl AsRef<Path>, format: Format) -> Result<EmbeddingSet> {
    let file = File::open(path.as_ref())?;
    let mut reader = BufReader::new(file);
    match format {
        Format::Binary => read_emb1(&mut reader),
        Format::Csv => read_csv(&mut reader),
    }
}

/// Saves an embedding set; `load_embeddings` of the result reproduces the
/// input bit-exactly.
pub fn save_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>, format: Format) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut writer = BufWriter::new(file);
    match format {
        Format::Binary => write_emb1(set, &mut writer)?,
        Format::Csv => write_csv(set, &mut writer)?,
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn read_emb1(r: &mut impl Read) -> Result<EmbeddingSet> {
    expect_magic(r, EMB_MAGIC)?;
    let n = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let dim = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    if n == 0 || dim == 0 {
        return Err(Error::format(format!("invalid header: n={n}, dim={dim}")));
    }
    let mut raw = vec![0.0_f32; n * dim];
    r.read_f32_into::<LittleEndian>(&mut raw).map_err(truncated)?;
    let vectors = Array2::from_shape_vec((n, dim), raw)
        .expect("shape matches buffer length by construction");
    let mut labels = vec![0_u32; n];
    r.read_u32_into::<LittleEndian>(&mut labels).map_err(truncated)?;
    let id_flag = r.read_u8().map_err(truncated)?;
    let ids = match id_flag {
        0 => None,
        1 => {
            let mut ids = Vec::with_capacity(n);
            for _ in 0..n {
                let len = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
                let mut buf = vec![0_u8; len];
                r.read_exact(&mut buf).map_err(truncated)?;
                ids.push(String::from_utf8(buf).map_err(|e| {
                    Error::format(format!("id string is not valid UTF-8: {e}"))
                })?);
            }
            Some(ids)
        }
        other => return Err(Error::format(format!("invalid id flag byte {other}"))),
    };
    EmbeddingSet::new(vectors, labels, ids)
}

pub(crate) fn write_emb1(set: &EmbeddingSet, w: &mut impl Write) -> Result<()> {
    w.write_all(EMB_MAGIC)?;
    w.write_u32::<LittleEndian>(set.len() as u32)?;
    w.write_u32::<LittleEndian>(set.dim() as u32)?;
    for &v in set.vectors().iter() {
        w.write_f32::<LittleEndian>(v)?;
    }
    for &label in set.labels() {
        w.write_u32::<LittleEndian>(label)?;
    }
    match set.ids() {
        None => w.write_u8(0)?,
        Some(ids) => {
            w.write_u8(1)?;
            for id in ids {
                w.write_u32::<LittleEndian>(id.len() as u32)?;
                w.write_all(id.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_csv(r: &mut impl Read) -> Result<EmbeddingSet> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::format("empty CSV file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let has_id = cols.last() == Some(&"id");
    let label_col = if has_id { cols.len() - 2 } else { cols.len() - 1 };
    if cols.get(label_col) != Some(&"label") || label_col == 0 {
        return Err(Error::format(
            "CSV header must be v0,...,v{dim-1},label[,id]",
        ));
    }
    let dim = label_col;
    for (i, col) in cols[..dim].iter().enumerate() {
        if *col != format!("v{i}") {
            return Err(Error::format(format!(
                "unexpected CSV header column {i}: {col:?}"
            )));
        }
    }

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut ids = if has_id { Some(Vec::new()) } else { None };
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = dim + 1 + usize::from(has_id);
        if fields.len() != expected {
            return Err(Error::format(format!(
                "row {}: expected {expected} fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        for f in &fields[..dim] {
            let v: f32 = f.parse().map_err(|e| {
                Error::format(format!("row {}: bad float {f:?}: {e}", lineno + 2))
            })?;
            raw.push(v);
        }
        labels.push(fields[dim].parse().map_err(|e| {
            Error::format(format!("row {}: bad label {:?}: {e}", lineno + 2, fields[dim]))
        })?);
        if let Some(ids) = ids.as_mut() {
            ids.push(fields[dim + 1].to_string());
        }
    }
    let n = labels.len();
    let vectors = Array2::from_shape_vec((n, dim), raw)
        .map_err(|e| Error::format(format!("inconsistent CSV row lengths: {e}")))?;
    EmbeddingSet::new(vectors, labels, ids)
}

fn write_csv(set: &EmbeddingSet, w: &mut impl Write) -> Result<()> {
    let dim = set.dim();
    let mut header = (0..dim).map(|i| format!("v{i}")).collect::<Vec<_>>().join(",");
    header.push_str(",label");
    if set.ids().is_some() {
        header.push_str(",id");
    }
    writeln!(w, "{header}")?;
    for i in 0..set.len() {
        let mut line = String::new();
        for &v in set.row(i).iter() {
            // `{}` on f32 prints the shortest decimal that round-trips.
            line.push_str(&format!("{v}"));
            line.push(',');
        }
        line.push_str(&set.labels()[i].to_string());
        if let Some(ids) = set.ids() {
            line.push(',');
            line.push_str(&ids[i]);
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub(crate) fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut buf = [0_u8; 4];
    r.read_exact(&mut buf).map_err(truncated)?;
    if &buf != magic {
        return Err(Error::format(format!(
            "bad magic: expected {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&buf)
        )));
    }
    Ok(())
}

/// Truncation while a header promised more payload is a format error, not an
/// I/O error.
pub(crate) fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::format("file truncated before payload end")
    } else {
        Error::Io(e)
    }
}

pub(crate) fn read_f32_vec(r: &mut impl Read, len: usize) -> Result<Vec<f32>> {
    let mut buf = vec![0.0_f32; len];
    r.read_f32_into::<LittleEndian>(&mut buf).map_err(truncated)?;
    Ok(buf)
}

pub(crate) fn write_f32_slice(w: &mut impl Write, values: &[f32]) -> Result<()> {
    for &v in values {
        w.write_f32::<LittleEndian>(v)?;
    }
    Ok(())
}

pub(crate) fn read_u32_vec(r: &mut impl Read, len: usize) -> Result<Vec<u32>> {
    let mut buf = vec![0_u32; len];
    r.read_u32_into::<LittleEndian>(&mut buf).map_err(truncated)?;
    Ok(buf)
}

pub(crate) fn write_u32_slice(w: &mut impl Write, values: &[u32]) -> Result<()> {
    for &v in values {
        w.write_u32::<LittleEndian>(v)?;
    }
    Ok(())
}
