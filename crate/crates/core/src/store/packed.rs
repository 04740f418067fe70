//! Compact binary file layout, all integers little-endian:
//!
//! ```text
//! "TLIM"  u16 version  u32 n_vars  u64 n_samples
//! per variable: u16 name_len, name (UTF-8), u8 tag, u16 categories
//!     tag low nibble = kind (0 binary, 1 categorical, 2 outcome)
//!     tag high nibble = basis (0 zero/one, 1 spin)
//! binary columns, ceil(n_samples / 8) bytes each, LSB-first
//! categorical columns, one byte per sample
//! outcome columns, f64 per sample
//! ```
//!
//! Each section lists its columns in variable order.

use std::io::{Read, Write};
use std::path::Path;

use super::bits::BitColumn;
use super::matrix::{Basis, Column, SampleMatrix, SampleMatrixBuilder, VariableKind, VariableMeta};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"TLIM";
pub const VERSION: u16 = 1;

pub fn to_bytes(m: &SampleMatrix) -> Vec<u8> {
    let n = m.n_samples();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.n_vars() as u32).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for meta in m.variables() {
        out.extend_from_slice(&(meta.name.len() as u16).to_le_bytes());
        out.extend_from_slice(meta.name.as_bytes());
        let (kind, cats) = match meta.kind {
            VariableKind::Binary => (0u8, 2u16),
            VariableKind::Categorical { categories } => (1, categories),
            VariableKind::Outcome => (2, 0),
        };
        let basis = match meta.basis {
            Basis::ZeroOne => 0u8,
            Basis::SpinPm1 => 1,
        };
        out.push(kind | (basis << 4));
        out.extend_from_slice(&cats.to_le_bytes());
    }
    for var in 0..m.n_vars() {
        if let Column::Binary(c) = m.column(var) {
            out.extend_from_slice(&c.to_bytes());
        }
    }
    for var in 0..m.n_vars() {
        if let Column::Categorical { values, .. } = m.column(var) {
            out.extend_from_slice(values);
        }
    }
    for var in 0..m.n_vars() {
        if let Column::Outcome(v) = m.column(var) {
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
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

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<SampleMatrix> {
    let mut cur = Cursor { buf, pos: 0 };
    if cur.take(4)? != MAGIC {
        return Err(Error::Format("missing TLIM magic".into()));
    }
    let version = cur.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_vars = cur.u32()? as usize;
    let n = usize::try_from(cur.u64()?).map_err(|_| Error::Format("sample count overflows usize".into()))?;

    let mut metas = Vec::with_capacity(n_vars.min(1 << 16));
    for _ in 0..n_vars {
        let len = cur.u16()? as usize;
        let name = std::str::from_utf8(cur.take(len)?)
            .map_err(|_| Error::Format("variable name is not UTF-8".into()))?
            .to_string();
        let tag = cur.u8()?;
        let cats = cur.u16()?;
        let kind = match tag & 0x0f {
            0 => VariableKind::Binary,
            1 => VariableKind::Categorical { categories: cats },
            2 => VariableKind::Outcome,
            k => return Err(Error::Format(format!("unknown kind tag {k} for '{name}'"))),
        };
        let basis = match tag >> 4 {
            0 => Basis::ZeroOne,
            1 => Basis::SpinPm1,
            b => return Err(Error::Format(format!("unknown basis {b} for '{name}'"))),
        };
        metas.push(VariableMeta { name, kind, basis });
    }

    let mut columns: Vec<Option<Column>> = vec![None; n_vars];
    for (i, meta) in metas.iter().enumerate() {
        if meta.kind == VariableKind::Binary {
            columns[i] = Some(Column::Binary(BitColumn::from_bytes(cur.take(n.div_ceil(8))?, n)));
        }
    }
    for (i, meta) in metas.iter().enumerate() {
        if let VariableKind::Categorical { .. } = meta.kind {
            columns[i] = Some(Column::Categorical { values: cur.take(n)?.to_vec(), planes: Vec::new() });
        }
    }
    for (i, meta) in metas.iter().enumerate() {
        if meta.kind == VariableKind::Outcome {
            let raw = cur.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
            let v = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            columns[i] = Some(Column::Outcome(v));
        }
    }
    if cur.pos != buf.len() {
        return Err(Error::Format(format!("{} trailing bytes", buf.len() - cur.pos)));
    }

    let mut b = SampleMatrixBuilder::new(n);
    for (meta, col) in metas.into_iter().zip(columns) {
        b = match col.expect("every kind fills its column") {
            Column::Binary(c) => b.binary(meta, c),
            Column::Categorical { values, .. } => b.categorical(meta, values),
            Column::Outcome(v) => b.outcome(meta, v),
        };
    }
    b.build()
}

pub fn write(m: &SampleMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&to_bytes(m))?;
    f.flush()?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<SampleMatrix> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    from_bytes(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> SampleMatrix {
        SampleMatrixBuilder::new(10)
            .binary(VariableMeta::binary("a"), BitColumn::from_bools((0..10).map(|i| i % 3 == 0)))
            .outcome(VariableMeta::outcome("y"), (0..10).map(|i| i as f64 * 0.5 - 1.0).collect())
            .categorical(VariableMeta::categorical("c", 4), (0..10).map(|i| (i % 4) as u8).collect())
            .binary(
                VariableMeta { name: "s".into(), kind: VariableKind::Binary, basis: Basis::SpinPm1 },
                BitColumn::from_bools((0..10).map(|i| i > 6)),
            )
            .build()
            .unwrap()
    }

    #[test]
    fn round_trip() {
        let m = mixed();
        assert_eq!(from_bytes(&to_bytes(&m)).unwrap(), m);
    }

    #[test]
    fn header_layout() {
        let bytes = to_bytes(&mixed());
        assert_eq!(&bytes[..4], b"TLIM");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 4);
        assert_eq!(u64::from_le_bytes(bytes[10..18].try_into().unwrap()), 10);
        // first variable: name "a", binary, zero/one basis, 2 categories
        assert_eq!(&bytes[18..24], &[1, 0, b'a', 0, 2, 0]);
    }

    #[test]
    fn truncation_and_garbage_rejected() {
        let bytes = to_bytes(&mixed());
        assert!(matches!(from_bytes(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(from_bytes(&extra), Err(Error::Format(_))));
        assert!(matches!(from_bytes(b"NOPE"), Err(Error::Format(_))));
    }
}
