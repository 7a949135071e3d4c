//! Versioned binary checkpoint files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   : 4 bytes, "TPNC"
//! version : u32 (currently 1)
//! meta    : u32 count, then per entry
//!             u32 name length, name bytes (utf-8), u64 value
//! tensors : u32 count, then per block
//!             u32 name length, name bytes (utf-8),
//!             u32 ndim, u32 x ndim extents,
//!             f64 x numel row-major values
//! ```
//!
//! Meta entries carry the epoch counter, the run seed, optimizer step
//! counters and the model dimensions; tensor blocks carry every parameter
//! and optimizer moment by name.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"TPNC";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub meta: Vec<(String, u64)>,
    pub tensors: Vec<(String, Tensor)>,
}

impl Checkpoint {
    pub fn meta_value(&self, name: &str) -> Option<u64> {
        self.meta.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn require_meta(&self, name: &str) -> Result<u64> {
        self.meta_value(name)
            .ok_or_else(|| Error::CheckpointError(format!("missing meta entry '{name}'")))
    }

    pub fn tensor(&self, name: &str) -> Option<&Tensor> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn require_tensor(&self, name: &str) -> Result<&Tensor> {
        self.tensor(name)
            .ok_or_else(|| Error::CheckpointError(format!("missing tensor block '{name}'")))
    }
}

pub fn write_checkpoint(w: &mut impl Write, ck: &Checkpoint) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;

    w.write_all(&(ck.meta.len() as u32).to_le_bytes())?;
    for (name, value) in &ck.meta {
        write_name(w, name)?;
        w.write_all(&value.to_le_bytes())?;
    }

    w.write_all(&(ck.tensors.len() as u32).to_le_bytes())?;
    for (name, t) in &ck.tensors {
        write_name(w, name)?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for &v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::CheckpointError("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::CheckpointError(format!(
            "unsupported checkpoint version {version}, expected {VERSION}"
        )));
    }

    let meta_count = read_u32(r)? as usize;
    let mut meta = Vec::with_capacity(meta_count);
    for _ in 0..meta_count {
        let name = read_name(r)?;
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf)?;
        meta.push((name, u64::from_le_bytes(buf)));
    }

    let tensor_count = read_u32(r)? as usize;
    let mut tensors = Vec::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let name = read_name(r)?;
        let ndim = read_u32(r)? as usize;
        if ndim > 8 {
            return Err(Error::CheckpointError(format!(
                "implausible tensor rank {ndim} for '{name}'"
            )));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u32(r)? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = vec![0.0f64; numel];
        let mut buf = [0u8; 8];
        for v in &mut data {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        tensors.push((
            name,
            Tensor::new(shape, data).map_err(|e| Error::CheckpointError(e.to_string()))?,
        ));
    }
    Ok(Checkpoint { meta, tensors })
}

pub fn save_to_path(path: &Path, ck: &Checkpoint) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_checkpoint(&mut w, ck)?;
    w.flush()?;
    Ok(())
}

pub fn load_from_path(path: &Path) -> Result<Checkpoint> {
    let file = File::open(path).map_err(|e| {
        Error::CheckpointError(format!("cannot open {}: {e}", path.display()))
    })?;
    read_checkpoint(&mut BufReader::new(file))
}

fn write_name(w: &mut impl Write, name: &str) -> Result<()> {
    w.write_all(&(name.len() as u32).to_le_bytes())?;
    w.write_all(name.as_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_name(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 4096 {
        return Err(Error::CheckpointError(format!(
            "implausible name length {len}"
        )));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::CheckpointError("name is not utf-8".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_everything_bitwise() {
        let ck = Checkpoint {
            meta: vec![("epoch".into(), 12), ("seed".into(), 7)],
            tensors: vec![
                ("gen.w".into(), Tensor::matrix(2, 3, vec![1.5, -2.25, 0.0, 1e-300, 3.125, 9.0]).unwrap()),
                ("gen.b".into(), Tensor::vector(vec![0.5])),
                ("s".into(), Tensor::scalar(-4.75)),
            ],
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        let back = read_checkpoint(&mut buf.as_slice()).unwrap();
        assert_eq!(ck, back);
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let ck = Checkpoint::default();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();

        let mut corrupt = buf.clone();
        corrupt[0] = b'X';
        assert!(matches!(
            read_checkpoint(&mut corrupt.as_slice()),
            Err(Error::CheckpointError(_))
        ));

        let mut wrong_version = buf.clone();
        wrong_version[4] = 99;
        assert!(matches!(
            read_checkpoint(&mut wrong_version.as_slice()),
            Err(Error::CheckpointError(_))
        ));
    }

    #[test]
    fn truncated_file_is_an_error() {
        let ck = Checkpoint {
            meta: vec![],
            tensors: vec![("w".into(), Tensor::vector(vec![1.0, 2.0, 3.0]))],
        };
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &ck).unwrap();
        buf.truncate(buf.len() - 4);
        assert!(read_checkpoint(&mut buf.as_slice()).is_err());
    }
}
