//! Binary fixture container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "QDTC"
//! 4       4     format version (u32, currently 1)
//! 8       4     header length H in bytes (u32)
//! 12      H     UTF-8 JSON header (ContainerHeader)
//! 12+H    16·n  payload: n = rows·cols complex entries, row-major,
//!               each stored as (re: f64, im: f64)
//! ```
//!
//! Pure states are stored as a column (`cols == 1`).

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{DensityOperator, Dim, Matrix, PureState, Register, Unitary, Vector, C64};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"QDTC";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainerKind {
    Pure,
    Density,
    Unitary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerHeader {
    pub kind: ContainerKind,
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    /// Output register of a unitary; empty otherwise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub out_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub out_dims: Vec<usize>,
    pub rows: usize,
    pub cols: usize,
    pub normalized: bool,
}

#[derive(Clone, Debug)]
pub enum Container {
    Pure(PureState),
    Density(DensityOperator),
    Unitary(Unitary),
}

fn register_of(labels: &[String], dims: &[usize]) -> Result<Register> {
    let dims = dims.iter().map(|&d| Dim::new(d)).collect::<Result<Vec<_>>>()?;
    Register::from_parts(labels.to_vec(), dims)
}

impl Container {
    fn header(&self) -> ContainerHeader {
        match self {
            Container::Pure(s) => ContainerHeader {
                kind: ContainerKind::Pure,
                labels: s.register().labels().to_vec(),
                dims: s.register().dims(),
                out_labels: vec![],
                out_dims: vec![],
                rows: s.amplitudes().len(),
                cols: 1,
                normalized: s.is_normalized(),
            },
            Container::Density(r) => ContainerHeader {
                kind: ContainerKind::Density,
                labels: r.register().labels().to_vec(),
                dims: r.register().dims(),
                out_labels: vec![],
                out_dims: vec![],
                rows: r.matrix().nrows(),
                cols: r.matrix().ncols(),
                normalized: r.is_normalized(),
            },
            Container::Unitary(u) => ContainerHeader {
                kind: ContainerKind::Unitary,
                labels: u.in_register().labels().to_vec(),
                dims: u.in_register().dims(),
                out_labels: u.out_register().labels().to_vec(),
                out_dims: u.out_register().dims(),
                rows: u.matrix().nrows(),
                cols: u.matrix().ncols(),
                normalized: true,
            },
        }
    }

    fn entries(&self) -> Vec<C64> {
        let m: Matrix = match self {
            Container::Pure(s) => Matrix::from_column_slice(s.amplitudes().len(), 1, s.amplitudes().as_slice()),
            Container::Density(r) => r.matrix().clone(),
            Container::Unitary(u) => u.matrix().clone(),
        };
        let mut out = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(m[(i, j)]);
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_container(&mut buf, self)?;
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Container> {
        read_container(&mut &bytes[..])
    }
}

pub fn write_container<W: Write>(w: &mut W, c: &Container) -> Result<()> {
    let header = serde_json::to_vec(&c.header())?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    for z in c.entries() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_container<R: Read>(r: &mut R) -> Result<Container> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let len = read_u32(r)? as usize;
    let mut hbuf = vec![0u8; len];
    r.read_exact(&mut hbuf)?;
    let h: ContainerHeader = serde_json::from_slice(&hbuf)?;
    let n = h.rows.checked_mul(h.cols).ok_or_else(|| Error::Format("size overflow".into()))?;
    // n comes from an untrusted header; let truncation surface as an I/O error.
    let mut entries = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        entries.push(C64::new(re, im));
    }
    let reg = register_of(&h.labels, &h.dims)?;
    match h.kind {
        ContainerKind::Pure => {
            if h.cols != 1 {
                return Err(Error::Format("pure state payload must be a column".into()));
            }
            let v = Vector::from_vec(entries);
            let s = if h.normalized { PureState::new(reg, v)? } else { PureState::unnormalized(reg, v)? };
            Ok(Container::Pure(s))
        }
        ContainerKind::Density => {
            let m = Matrix::from_row_slice(h.rows, h.cols, &entries);
            let rho = if h.normalized { DensityOperator::new(reg, m)? } else { DensityOperator::unnormalized(reg, m)? };
            Ok(Container::Density(rho))
        }
        ContainerKind::Unitary => {
            let out = register_of(&h.out_labels, &h.out_dims)?;
            let m = Matrix::from_row_slice(h.rows, h.cols, &entries);
            Ok(Container::Unitary(Unitary::new(reg, out, m)?))
        }
    }
}
