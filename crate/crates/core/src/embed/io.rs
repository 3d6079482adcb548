//! Embedding table persistence.
//!
//! Text: a `N D` header line, then `id v1 .. vD` per row. Values use Rust's
//! shortest round-trip float formatting, so reading back is lossless.
//!
//! Binary: [`BINARY_MAGIC`], `u64 N`, `u64 D`, then per row a `u32` id byte
//! length, the UTF-8 id and `D` little-endian `f64`s.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{EmbedError, EmbeddingSpace};

pub const BINARY_MAGIC: &[u8; 16] = b"SCICONNAV-EMB\0\0\x01";

pub fn write_text<W: Write>(space: &EmbeddingSpace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", space.len(), space.dim())?;
    for (i, id) in space.vocab().iter().enumerate() {
        write!(out, "{id}")?;
        for v in space.row(i) {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn read_text<R: BufRead>(input: R) -> Result<EmbeddingSpace, EmbedError> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| format_err(1, "missing header"))??;
    let mut parts = header.split_whitespace();
    let mut header_num = |what: &str| -> Result<usize, EmbedError> {
        parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(1, &format!("header needs `N D`, bad {what}")))
    };
    let n = header_num("N")?;
    let dim = header_num("D")?;

    let mut vocab = Vec::with_capacity(n);
    let mut matrix = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|s| !s.is_empty());
        let id = fields.next().expect("non-empty line has a field").to_string();
        let before = matrix.len();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| format_err(lineno, &format!("bad value `{f}`")))?;
            matrix.push(v);
        }
        let got = matrix.len() - before;
        if got != dim {
            return Err(EmbedError::DimensionMismatch { id, got, expected: dim });
        }
        vocab.push(id);
    }
    if vocab.len() != n {
        return Err(format_err(1, &format!("header declares {n} rows, found {}", vocab.len())));
    }
    EmbeddingSpace::from_matrix(vocab, dim, matrix)
}

pub fn write_binary<W: Write>(space: &EmbeddingSpace, mut out: W) -> std::io::Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(space.len() as u64).to_le_bytes())?;
    out.write_all(&(space.dim() as u64).to_le_bytes())?;
    for (i, id) in space.vocab().iter().enumerate() {
        out.write_all(&(id.len() as u32).to_le_bytes())?;
        out.write_all(id.as_bytes())?;
        for v in space.row(i) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()
}

pub fn read_binary<R: Read>(mut input: R) -> Result<EmbeddingSpace, EmbedError> {
    let mut magic = [0u8; 16];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(format_err(0, "bad magic header"));
    }
    let n = read_u64(&mut input)? as usize;
    let dim = read_u64(&mut input)? as usize;
    let mut vocab = Vec::with_capacity(n.min(1 << 20));
    let mut matrix = Vec::with_capacity((n * dim).min(1 << 24));
    for row in 0..n {
        let mut len = [0u8; 4];
        input.read_exact(&mut len)?;
        let mut id = vec![0u8; u32::from_le_bytes(len) as usize];
        input.read_exact(&mut id)?;
        let id = String::from_utf8(id).map_err(|_| format_err(row + 1, "id is not UTF-8"))?;
        for _ in 0..dim {
            let mut buf = [0u8; 8];
            input.read_exact(&mut buf)?;
            matrix.push(f64::from_le_bytes(buf));
        }
        vocab.push(id);
    }
    EmbeddingSpace::from_matrix(vocab, dim, matrix)
}

/// Reads either format, telling them apart by the binary magic.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSpace, EmbedError> {
    let mut input = BufReader::new(std::fs::File::open(path)?);
    if input.fill_buf()?.starts_with(BINARY_MAGIC) {
        read_binary(input)
    } else {
        read_text(input)
    }
}

fn read_u64<R: Read>(input: &mut R) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn format_err(line: usize, message: &str) -> EmbedError {
    EmbedError::Format {
        line,
        message: message.to_string(),
    }
}
