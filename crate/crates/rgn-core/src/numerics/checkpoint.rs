//! Checkpoint file format.
//!
//! Layout (all integers little-endian):
//!   magic  b"RGN1"
//!   count  u32                       number of tensors
//!   per tensor:
//!     name_len  u32
//!     name      UTF-8 bytes
//!     rank      u32
//!     extents   rank x u64
//!     values    numel x f64
//!
//! Values are stored as 64-bit reals regardless of the in-memory scalar
//! type; f64 -> f64 and f32 -> f64 -> f32 round trips are both bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::params::ParameterStore;
use crate::numerics::scalar::Real;
use crate::numerics::tensor::Tensor;

const MAGIC: &[u8; 4] = b"RGN1";

fn corrupt(offset: u64, message: impl Into<String>) -> Error {
    Error::Checkpoint {
        offset,
        message: message.into(),
    }
}

/// Write named tensors in order.
pub fn write_tensors<T: Real, W: Write>(mut w: W, tensors: &[(&str, &Tensor<T>)]) -> Result<()> {
    w.write_all(MAGIC)?;
    let count = u32::try_from(tensors.len())
        .map_err(|_| Error::config("too many tensors for checkpoint"))?;
    w.write_all(&count.to_le_bytes())?;
    for (name, t) in tensors {
        let name_bytes = name.as_bytes();
        w.write_all(&(name_bytes.len() as u32).to_le_bytes())?;
        w.write_all(name_bytes)?;
        w.write_all(&(t.rank() as u32).to_le_bytes())?;
        for &e in t.shape() {
            w.write_all(&(e as u64).to_le_bytes())?;
        }
        for &v in t.data() {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn read_exact(&mut self, buf: &mut [u8], what: &str) -> Result<()> {
        let at = self.offset;
        self.inner
            .read_exact(buf)
            .map_err(|_| corrupt(at, format!("truncated file while reading {what}")))?;
        self.offset += buf.len() as u64;
        Ok(())
    }

    fn read_u32(&mut self, what: &str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.read_exact(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn read_u64(&mut self, what: &str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn read_f64(&mut self, what: &str) -> Result<f64> {
        let mut b = [0u8; 8];
        self.read_exact(&mut b, what)?;
        Ok(f64::from_le_bytes(b))
    }
}

/// Read back every named tensor, in file order.
pub fn read_tensors<T: Real, R: Read>(r: R) -> Result<Vec<(String, Tensor<T>)>> {
    let mut r = CountingReader {
        inner: r,
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic, "magic")?;
    if &magic != MAGIC {
        return Err(corrupt(
            0,
            format!("bad magic {magic:?}, expected {MAGIC:?}"),
        ));
    }
    let count = r.read_u32("tensor count")?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name_len = r.read_u32("name length")? as usize;
        if name_len > 4096 {
            return Err(corrupt(
                r.offset - 4,
                format!("implausible name length {name_len}"),
            ));
        }
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes, "name")?;
        let at = r.offset - name_len as u64;
        let name = String::from_utf8(name_bytes).map_err(|_| corrupt(at, "name is not UTF-8"))?;
        let rank = r.read_u32("rank")? as usize;
        if rank == 0 || rank > 8 {
            return Err(corrupt(r.offset - 4, format!("implausible rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.read_u64("extent")? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        for _ in 0..numel {
            data.push(T::from_f64(r.read_f64("value")?));
        }
        let at = r.offset;
        out.push((
            name,
            Tensor::new(data, shape).map_err(|e| corrupt(at, e.to_string()))?,
        ));
    }
    Ok(out)
}

/// Save a parameter store (optionally with extra metadata tensors appended).
pub fn save_store<T: Real>(
    path: &Path,
    store: &ParameterStore<T>,
    extra: &[(&str, &Tensor<T>)],
) -> Result<()> {
    let mut tensors: Vec<(&str, &Tensor<T>)> = store.iter().collect();
    tensors.extend_from_slice(extra);
    let f = BufWriter::new(File::create(path)?);
    write_tensors(f, &tensors)
}

/// Load a checkpoint into named tensors (metadata entries included).
pub fn load_tensors<T: Real>(path: &Path) -> Result<Vec<(String, Tensor<T>)>> {
    let f = BufReader::new(File::open(path)?);
    read_tensors(f)
}

/// Load a checkpoint into an existing store, validating that every stored
/// parameter is present in the file with the exact shape. Entries in the
/// file that the store does not know (e.g. metadata) are returned to the
/// caller for its own validation.
pub fn load_into_store<T: Real>(
    path: &Path,
    store: &mut ParameterStore<T>,
) -> Result<Vec<(String, Tensor<T>)>> {
    let tensors = load_tensors::<T>(path)?;
    let mut extra = Vec::new();
    let mut seen = 0usize;
    for (name, tensor) in tensors {
        if store.contains(&name) {
            let dst = store.get_mut(&name)?;
            if dst.shape() != tensor.shape() {
                return Err(Error::shape(format!(
                    "checkpoint parameter '{name}' has shape {:?}, model expects {:?}",
                    tensor.shape(),
                    dst.shape()
                )));
            }
            *dst = tensor.with_requires_grad(true);
            seen += 1;
        } else {
            extra.push((name, tensor));
        }
    }
    if seen != store.len() {
        let missing: Vec<&str> = store
            .names()
            .filter(|n| !extra.iter().any(|(e, _)| e == n))
            .collect();
        return Err(Error::config(format!(
            "checkpoint holds {seen} of {} model parameters (model params missing from file: {:?})",
            store.len(),
            store
                .names()
                .filter(|n| missing.contains(n))
                .take(4)
                .collect::<Vec<_>>()
        )));
    }
    Ok(extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::init::{init_params, InitScheme};

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut store = ParameterStore::<f64>::new();
        store
            .insert("a.w", init_params(&[3, 4], InitScheme::XavierUniform, 1))
            .unwrap();
        store
            .insert("a.b", init_params(&[1, 4], InitScheme::XavierUniform, 2))
            .unwrap();

        let mut buf = Vec::new();
        let tensors: Vec<(&str, &Tensor<f64>)> = store.iter().collect();
        write_tensors(&mut buf, &tensors).unwrap();
        let back = read_tensors::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        for (name, t) in &back {
            let orig = store.get(name).unwrap();
            assert_eq!(orig.shape(), t.shape());
            assert_eq!(orig.data(), t.data());
        }
    }

    #[test]
    fn truncated_file_reports_offset() {
        let mut store = ParameterStore::<f64>::new();
        store
            .insert("w", init_params(&[2, 2], InitScheme::XavierUniform, 3))
            .unwrap();
        let mut buf = Vec::new();
        let tensors: Vec<(&str, &Tensor<f64>)> = store.iter().collect();
        write_tensors(&mut buf, &tensors).unwrap();
        buf.truncate(buf.len() - 5);
        let err = read_tensors::<f64, _>(buf.as_slice()).unwrap_err();
        match err {
            Error::Checkpoint { offset, .. } => assert!(offset > 0),
            other => panic!("expected checkpoint error, got {other}"),
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"NOPE\x00\x00\x00\x00".to_vec();
        assert!(read_tensors::<f64, _>(buf.as_slice()).is_err());
    }
}
