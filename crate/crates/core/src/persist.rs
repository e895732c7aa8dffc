//! Binary container for encoders and trained models.
//!
//! Little-endian throughout; the byte layout is documented in `docs/formats.md`.

use std::path::Path;

use crate::approximator::ApproximatorModel;
use crate::encoder::{Encoder, ExpansionMatrix, Sparsifier, ThresholdVector};
use crate::error::{Error, Result};
use crate::geometry::{DistributionSpec, ManifoldShape, ManifoldSpec};

pub const MAGIC: [u8; 4] = *b"EASP";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 56;

const FLAG_THRESHOLD: u16 = 1;
const FLAG_MODEL: u16 = 2;

/// What a container holds.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Encoder(Encoder),
    Model(ApproximatorModel),
}

impl Artifact {
    pub fn encoder(&self) -> &Encoder {
        match self {
            Artifact::Encoder(e) => e,
            Artifact::Model(m) => m.encoder(),
        }
    }
}

/// FNV-1a, 64-bit.
pub fn checksum(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn dist_fields(dist: &DistributionSpec) -> (u8, u8, u64) {
    match *dist {
        DistributionSpec::UniformSphere { .. } => (0, 0, 0),
        DistributionSpec::Gaussian { sigma, .. } => (1, 0, sigma.to_bits()),
        DistributionSpec::DataAttuned { manifold } => match manifold.shape {
            ManifoldShape::FullSphere { .. } => (2, 0, 0),
            ManifoldShape::Circle { .. } => (2, 1, 0),
            ManifoldShape::SubSphere { intrinsic_dim, .. } => (2, 2, intrinsic_dim as u64),
        },
    }
}

fn dist_from_fields(kind: u8, manifold: u8, param: u64, d: usize) -> Result<DistributionSpec> {
    let dist = match (kind, manifold) {
        (0, 0) => DistributionSpec::UniformSphere { dim: d },
        (1, 0) => DistributionSpec::Gaussian {
            dim: d,
            sigma: f64::from_bits(param),
        },
        (2, 0) => DistributionSpec::DataAttuned {
            manifold: ManifoldSpec::full_sphere(d),
        },
        (2, 1) => DistributionSpec::DataAttuned {
            manifold: ManifoldSpec::circle(d),
        },
        (2, 2) => DistributionSpec::DataAttuned {
            manifold: ManifoldSpec::sub_sphere(d, usize::try_from(param).map_err(|_| Error::Format("intrinsic dim overflow".into()))?),
        },
        _ => return Err(Error::Format(format!("unknown distribution tag ({kind}, {manifold})"))),
    };
    dist.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(dist)
}

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn serialize(encoder: &Encoder, model: Option<&ApproximatorModel>) -> Vec<u8> {
    let theta = encoder.theta();
    let (m, d) = (theta.m(), theta.d());
    let mut flags = 0u16;
    if matches!(encoder.sparsifier(), Sparsifier::Threshold(_)) {
        flags |= FLAG_THRESHOLD;
    }
    if model.is_some() {
        flags |= FLAG_MODEL;
    }
    let (kind, manifold, param) = dist_fields(theta.dist());
    let k = match encoder.sparsifier() {
        Sparsifier::Wta { k } => *k as u64,
        Sparsifier::Threshold(_) => 0,
    };

    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m * (d + 3) + m + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.extend_from_slice(&theta.seed().to_le_bytes());
    out.push(kind);
    out.push(manifold);
    out.extend_from_slice(&[0u8; 6]);
    out.extend_from_slice(&param.to_le_bytes());
    out.extend_from_slice(&k.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);

    put_f64s(&mut out, theta.flat());
    if let Sparsifier::Threshold(t) = encoder.sparsifier() {
        out.extend_from_slice(&t.target_rate().to_le_bytes());
        out.extend_from_slice(&(t.calibration_sample_size() as u64).to_le_bytes());
        put_f64s(&mut out, t.tau());
    }
    if let Some(model) = model {
        put_f64s(&mut out, model.weights());
        for c in model.counts() {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend(model.good_mask().iter().map(|&g| g as u8));
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub fn encoder_to_bytes(encoder: &Encoder) -> Vec<u8> {
    serialize(encoder, None)
}

pub fn model_to_bytes(model: &ApproximatorModel) -> Vec<u8> {
    serialize(model.encoder(), Some(model))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated container: need {n} bytes at offset {}", self.pos))
        })?;
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

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size does not fit in usize".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::Format("size overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<Artifact> {
    if bytes.len() < HEADER_LEN + 8 {
        return Err(Error::Format(format!("container too short: {} bytes", bytes.len())));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    if checksum(body) != stored {
        return Err(Error::Format("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic; not an EASP container".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let flags = r.u16()?;
    if flags & !(FLAG_THRESHOLD | FLAG_MODEL) != 0 {
        return Err(Error::Format(format!("unknown flags {flags:#06x}")));
    }
    let m = r.usize()?;
    let d = r.usize()?;
    let seed = r.u64()?;
    let kind = r.u8()?;
    let manifold = r.u8()?;
    if r.take(6)?.iter().any(|&b| b != 0) {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let param = r.u64()?;
    let k = r.usize()?;
    let dist = dist_from_fields(kind, manifold, param, d)?;
    let size = m.checked_mul(d).ok_or_else(|| Error::Format("size overflow".into()))?;
    let theta = ExpansionMatrix::from_flat(r.f64s(size)?, m, dist, seed).map_err(|e| Error::Format(e.to_string()))?;

    let sparsifier = if flags & FLAG_THRESHOLD != 0 {
        if k != 0 {
            return Err(Error::Format("threshold container with non-zero k".into()));
        }
        let rate = r.f64()?;
        let n_cal = r.usize()?;
        let tau = r.f64s(m)?;
        Sparsifier::Threshold(ThresholdVector::new(tau, rate, n_cal).map_err(|e| Error::Format(e.to_string()))?)
    } else {
        Sparsifier::Wta { k }
    };
    let encoder = Encoder::new(theta, sparsifier).map_err(|e| Error::Format(e.to_string()))?;

    let artifact = if flags & FLAG_MODEL != 0 {
        let weights = r.f64s(m)?;
        let counts = (0..m).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let good = r
            .take(m)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::Format(format!("good-mask byte {b} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Artifact::Model(ApproximatorModel::from_parts(encoder, weights, counts, good)?)
    } else {
        Artifact::Encoder(encoder)
    };
    if r.pos != body.len() {
        return Err(Error::Format(format!("{} trailing bytes", body.len() - r.pos)));
    }
    Ok(artifact)
}

pub fn save_encoder(path: &Path, encoder: &Encoder) -> Result<()> {
    Ok(std::fs::write(path, encoder_to_bytes(encoder))?)
}

pub fn save_model(path: &Path, model: &ApproximatorModel) -> Result<()> {
    Ok(std::fs::write(path, model_to_bytes(model))?)
}

pub fn load(path: &Path) -> Result<Artifact> {
    from_bytes(&std::fs::read(path)?)
}
