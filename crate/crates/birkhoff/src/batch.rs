use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 5] = b"BDSM1";
const HEADER_LEN: u64 = 5 + 4 + 8 + 8 + 4 + 8 + 8;

/// Registry of sampler tags carried in batch provenance and the binary
/// format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplerId {
    Gibbs,
    Rejection,
    VertexMixture,
    IidExponential,
    DirichletRows,
}

impl SamplerId {
    pub fn code(self) -> u32 {
        match self {
            SamplerId::Gibbs => 1,
            SamplerId::Rejection => 2,
            SamplerId::VertexMixture => 3,
            SamplerId::IidExponential => 4,
            SamplerId::DirichletRows => 5,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            1 => SamplerId::Gibbs,
            2 => SamplerId::Rejection,
            3 => SamplerId::VertexMixture,
            4 => SamplerId::IidExponential,
            5 => SamplerId::DirichletRows,
            _ => return None,
        })
    }
}

/// Ordered collection of samples plus the provenance needed to regenerate
/// them bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub sampler_id: SamplerId,
    pub seed: u64,
    pub burn_in: u64,
    pub spacing: u64,
    matrices: Vec<SquareMatrix>,
}

impl SampleBatch {
    pub fn new(
        sampler_id: SamplerId,
        seed: u64,
        burn_in: u64,
        spacing: u64,
        matrices: Vec<SquareMatrix>,
    ) -> Self {
        assert!(!matrices.is_empty());
        let n = matrices[0].n();
        assert!(matrices.iter().all(|m| m.n() == n), "mixed side lengths");
        Self {
            sampler_id,
            seed,
            burn_in,
            spacing,
            matrices,
        }
    }

    pub fn n(&self) -> usize {
        self.matrices[0].n()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrices(&self) -> &[SquareMatrix] {
        &self.matrices
    }

    /// Values of the designated entry across the batch.
    pub fn entry_values(&self, i: usize, j: usize) -> Vec<f64> {
        self.matrices.iter().map(|m| m.get(i, j)).collect()
    }

    /// Binary round trip, little endian: magic "BDSM1", u32 n, u64 count,
    /// u64 seed, u32 sampler_id, u64 burn_in, u64 spacing, then
    /// count * n * n f64 entries, row-major, matrix-major.
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(self.n() as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.sampler_id.code().to_le_bytes())?;
        w.write_all(&self.burn_in.to_le_bytes())?;
        w.write_all(&self.spacing.to_le_bytes())?;
        for m in &self.matrices {
            for &v in m.as_slice() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(|_| Error::MalformedHeader {
            path: path.to_owned(),
            reason: "file shorter than magic".into(),
        })?;
        if &magic != MAGIC {
            return Err(Error::BadMagic { path: path.to_owned() });
        }
        let n = read_u32(&mut r, path)? as usize;
        let count = read_u64(&mut r, path)?;
        let seed = read_u64(&mut r, path)?;
        let sampler_code = read_u32(&mut r, path)?;
        let burn_in = read_u64(&mut r, path)?;
        let spacing = read_u64(&mut r, path)?;
        if n == 0 || count == 0 {
            return Err(Error::MalformedHeader {
                path: path.to_owned(),
                reason: format!("n = {n}, count = {count}"),
            });
        }
        let sampler_id = SamplerId::from_code(sampler_code).ok_or_else(|| Error::MalformedHeader {
            path: path.to_owned(),
            reason: format!("unknown sampler id {sampler_code}"),
        })?;

        let expected = count * (n * n) as u64 * 8;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() as u64 != expected {
            return Err(Error::Truncated {
                path: path.to_owned(),
                expected: HEADER_LEN + expected,
                actual: HEADER_LEN + payload.len() as u64,
            });
        }
        let mut matrices = Vec::with_capacity(count as usize);
        for c in 0..count as usize {
            let base = c * n * n * 8;
            let entries: Vec<f64> = (0..n * n)
                .map(|k| {
                    let off = base + k * 8;
                    f64::from_le_bytes(payload[off..off + 8].try_into().unwrap())
                })
                .collect();
            matrices.push(SquareMatrix::new(n, entries)?);
        }
        Ok(Self::new(sampler_id, seed, burn_in, spacing, matrices))
    }
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| Error::MalformedHeader {
        path: path.to_owned(),
        reason: "header truncated".into(),
    })?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::MalformedHeader {
        path: path.to_owned(),
        reason: "header truncated".into(),
    })?;
    Ok(u64::from_le_bytes(b))
}
