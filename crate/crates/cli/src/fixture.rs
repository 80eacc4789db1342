//! Binary tensor fixtures.
//!
//! Layout, all integers little-endian:
//!
//! | bytes        | content                           |
//! |--------------|-----------------------------------|
//! | 4            | magic `PHCT`                      |
//! | 1            | version, always 1                 |
//! | 1            | dtype: 0 = f32, 1 = f64           |
//! | 1            | rank                              |
//! | 8 × rank     | dims as u64                       |
//! | rest         | row-major scalars                 |
//!
//! The payload must be exactly `product(dims) × width` bytes.

use std::fs;
use std::path::Path;

use phasorconv::{Real, RealTensor4};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"PHCT";
pub const VERSION: u8 = 1;
const HEADER: usize = 7;

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("bad magic {0:?}, expected \"PHCT\"")]
    BadMagic([u8; 4]),
    #[error("unsupported fixture version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown dtype {0}")]
    UnknownDtype(u8),
    #[error("truncated header: {0} bytes")]
    TruncatedHeader(usize),
    #[error("payload length mismatch: dims {dims:?} need {expected} bytes, found {found}")]
    PayloadLength { dims: Vec<u64>, expected: u64, found: u64 },
    #[error("dims {0:?} overflow the addressable size")]
    Overflow(Vec<u64>),
    #[error("rank {0} tensor cannot be viewed as rank 4")]
    Rank(usize),
    #[error("fixture holds {found} but {wanted} was requested")]
    DtypeMismatch { found: &'static str, wanted: &'static str },
    #[error("tensor: {0}")]
    Tensor(#[from] phasorconv::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, FixtureError> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            other => Err(FixtureError::UnknownDtype(other)),
        }
    }

    pub fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }

    pub fn of<T: Real>() -> Self {
        if T::NAME == "f32" {
            Dtype::F32
        } else {
            Dtype::F64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFixture {
    pub dims: Vec<u64>,
    pub payload: Payload,
}

impl TensorFixture {
    pub fn dtype(&self) -> Dtype {
        match self.payload {
            Payload::F32(_) => Dtype::F32,
            Payload::F64(_) => Dtype::F64,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let dtype = self.dtype();
        let count: usize = self.dims.iter().product::<u64>() as usize;
        let mut out = Vec::with_capacity(HEADER + 8 * self.dims.len() + count * dtype.width());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(dtype.code());
        out.push(self.dims.len() as u8);
        for d in &self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        match &self.payload {
            Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FixtureError> {
        if bytes.len() < HEADER {
            return Err(FixtureError::TruncatedHeader(bytes.len()));
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
        if &magic != MAGIC {
            return Err(FixtureError::BadMagic(magic));
        }
        if bytes[4] != VERSION {
            return Err(FixtureError::UnsupportedVersion(bytes[4]));
        }
        let dtype = Dtype::from_code(bytes[5])?;
        let rank = bytes[6] as usize;
        let dims_end = HEADER + 8 * rank;
        if bytes.len() < dims_end {
            return Err(FixtureError::TruncatedHeader(bytes.len()));
        }
        let dims: Vec<u64> = bytes[HEADER..dims_end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let expected = dims
            .iter()
            .try_fold(dtype.width() as u64, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| FixtureError::Overflow(dims.clone()))?;
        let payload = &bytes[dims_end..];
        if payload.len() as u64 != expected {
            return Err(FixtureError::PayloadLength {
                dims,
                expected,
                found: payload.len() as u64,
            });
        }
        let payload = match dtype {
            Dtype::F32 => Payload::F32(
                payload
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            ),
            Dtype::F64 => Payload::F64(
                payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            ),
        };
        Ok(TensorFixture { dims, payload })
    }

    /// Stores `t` at its own precision.
    pub fn from_tensor<T: Real>(t: &RealTensor4<T>) -> Self {
        let dims = t.dims().iter().map(|&d| d as u64).collect();
        let payload = match Dtype::of::<T>() {
            Dtype::F32 => Payload::F32(t.data().iter().map(|v| v.as_f64() as f32).collect()),
            Dtype::F64 => Payload::F64(t.data().iter().map(|v| v.as_f64()).collect()),
        };
        TensorFixture { dims, payload }
    }

    /// Rank ≤ 4 fixtures are viewed as rank 4 with leading unit dims. The
    /// stored dtype must match `T`.
    pub fn to_tensor<T: Real>(&self) -> Result<RealTensor4<T>, FixtureError> {
        let wanted = Dtype::of::<T>();
        if self.dtype() != wanted {
            return Err(FixtureError::DtypeMismatch {
                found: self.dtype().name(),
                wanted: wanted.name(),
            });
        }
        if self.dims.len() > 4 {
            return Err(FixtureError::Rank(self.dims.len()));
        }
        let mut dims = [1usize; 4];
        for (slot, &d) in dims[4 - self.dims.len()..].iter_mut().zip(&self.dims) {
            *slot = usize::try_from(d).map_err(|_| FixtureError::Overflow(self.dims.clone()))?;
        }
        let data: Vec<T> = match &self.payload {
            Payload::F32(v) => v.iter().map(|&x| T::from_f64(x as f64)).collect(),
            Payload::F64(v) => v.iter().map(|&x| T::from_f64(x)).collect(),
        };
        Ok(RealTensor4::new(dims, data)?)
    }
}

pub fn write_tensor<T: Real>(path: impl AsRef<Path>, t: &RealTensor4<T>) -> Result<(), FixtureError> {
    let path = path.as_ref();
    fs::write(path, TensorFixture::from_tensor(t).encode()).map_err(|source| FixtureError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_tensor<T: Real>(path: impl AsRef<Path>) -> Result<RealTensor4<T>, FixtureError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| FixtureError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TensorFixture::decode(&bytes)?.to_tensor()
}
