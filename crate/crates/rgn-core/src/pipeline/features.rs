use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const BINARY_MAGIC: &[u8; 4] = b"FTB1";

/// Feature-id to vector map with a uniform width. Backing store for
/// precomputed features; always `f64` on disk and in memory, converted to
/// the working scalar type at batch assembly.
#[derive(Clone, Debug, Default)]
pub struct FeatureTable {
    width: usize,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl FeatureTable {
    pub fn new(width: usize) -> Self {
        FeatureTable {
            width,
            ids: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let id = id.into();
        if values.len() != self.width {
            return Err(Error::data(format!(
                "feature '{id}' has width {}, table width is {}",
                values.len(),
                self.width
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "feature '{id}' contains non-finite values"
            )));
        }
        if self.index.contains_key(&id) {
            return Err(Error::data(format!("duplicate feature id '{id}'")));
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.data.extend_from_slice(&values);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&[f64]> {
        let row = *self
            .index
            .get(id)
            .ok_or_else(|| Error::data(format!("unknown feature id '{id}'")))?;
        Ok(&self.data[row * self.width..(row + 1) * self.width])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }

    /// Load either format, sniffing the binary magic.
    pub fn load(path: &Path) -> Result<Self> {
        let mut file = File::open(path)
            .map_err(|e| Error::data(format!("cannot open features {}: {e}", path.display())))?;
        let mut magic = [0u8; 4];
        let n = file.read(&mut magic)?;
        drop(file);
        if n == 4 && &magic == BINARY_MAGIC {
            Self::load_binary(path)
        } else {
            Self::load_csv(path)
        }
    }

    /// CSV rows `id,v1,...,vD`.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut table: Option<FeatureTable> = None;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let id = fields.next().unwrap_or_default().trim().to_string();
            if id.is_empty() {
                return Err(Error::data(format!(
                    "features line {}: empty id",
                    lineno + 1
                )));
            }
            let values: Vec<f64> = fields
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| {
                        Error::data(format!(
                            "features line {}: bad value '{f}': {e}",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            let table = table.get_or_insert_with(|| FeatureTable::new(values.len()));
            table
                .insert(id, values)
                .map_err(|e| Error::data(format!("features line {}: {e}", lineno + 1)))?;
        }
        table.ok_or_else(|| Error::data("feature table is empty"))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (row, id) in self.ids.iter().enumerate() {
            write!(w, "{id}")?;
            for v in &self.data[row * self.width..(row + 1) * self.width] {
                // Shortest round-trippable float formatting.
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary layout: magic "FTB1", width u32 LE, then per row:
    /// id length u32 LE, UTF-8 id bytes, `width` f64 LE values.
    pub fn load_binary(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::data(format!("bad feature-table magic {magic:?}")));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let width = u32::from_le_bytes(b4) as usize;
        let mut table = FeatureTable::new(width);
        loop {
            match r.read_exact(&mut b4) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(e.into()),
            }
            let id_len = u32::from_le_bytes(b4) as usize;
            let mut id_bytes = vec![0u8; id_len];
            r.read_exact(&mut id_bytes)?;
            let id =
                String::from_utf8(id_bytes).map_err(|_| Error::data("feature id is not UTF-8"))?;
            let mut values = Vec::with_capacity(width);
            let mut b8 = [0u8; 8];
            for _ in 0..width {
                r.read_exact(&mut b8)?;
                values.push(f64::from_le_bytes(b8));
            }
            table.insert(id, values)?;
        }
        Ok(table)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.width as u32).to_le_bytes())?;
        for (row, id) in self.ids.iter().enumerate() {
            w.write_all(&(id.len() as u32).to_le_bytes())?;
            w.write_all(id.as_bytes())?;
            for v in &self.data[row * self.width..(row + 1) * self.width] {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> FeatureTable {
        let mut t = FeatureTable::new(3);
        t.insert("a", vec![1.0, 2.0, 3.0]).unwrap();
        t.insert("b", vec![-0.5, 0.25, 1e-8]).unwrap();
        t
    }

    #[test]
    fn insert_and_get() {
        let t = sample_table();
        assert_eq!(t.get("a").unwrap(), &[1.0, 2.0, 3.0]);
        assert!(t.get("missing").is_err());
        let mut t = t;
        assert!(t.insert("a", vec![0.0; 3]).is_err());
        assert!(t.insert("c", vec![0.0; 2]).is_err());
        assert!(t.insert("d", vec![f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.csv");
        let t = sample_table();
        t.save_csv(&path).unwrap();
        let t2 = FeatureTable::load(&path).unwrap();
        assert_eq!(t2.width(), 3);
        assert_eq!(t2.get("b").unwrap(), t.get("b").unwrap());
    }

    #[test]
    fn binary_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feat.ftb");
        let t = sample_table();
        t.save_binary(&path).unwrap();
        let t2 = FeatureTable::load(&path).unwrap();
        for id in ["a", "b"] {
            let orig = t.get(id).unwrap();
            let back = t2.get(id).unwrap();
            assert!(orig
                .iter()
                .zip(back)
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }
}
