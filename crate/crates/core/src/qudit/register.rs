use serde::{Deserialize, Serialize};
use std::fmt;

use crate::{Error, Result};

/// Number of levels of one subsystem. Always at least 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dim(usize);

impl Dim {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Dim(d))
    }

    /// A prime dimension, as required by everything that locks a key with
    /// powers of generalized Pauli operators.
    pub fn prime(p: usize) -> Result<Self> {
        let d = Dim::new(p)?;
        if !d.is_prime() {
            return Err(Error::NotPrime(p));
        }
        Ok(d)
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn is_prime(self) -> bool {
        let n = self.0;
        n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
    }

    pub fn log2(self) -> f64 {
        (self.0 as f64).log2()
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Dim::new(d)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.0
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered list of named subsystems. Values are laid out row-major, so the
/// last label varies fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    labels: Vec<String>,
    dims: Vec<Dim>,
}

impl Register {
    pub fn new<S: AsRef<str>>(entries: &[(S, usize)]) -> Result<Self> {
        let mut labels = Vec::with_capacity(entries.len());
        let mut dims = Vec::with_capacity(entries.len());
        for (label, d) in entries {
            labels.push(label.as_ref().to_string());
            dims.push(Dim::new(*d)?);
        }
        Register::from_parts(labels, dims)
    }

    pub fn from_parts(labels: Vec<String>, dims: Vec<Dim>) -> Result<Self> {
        if labels.len() != dims.len() {
            return Err(Error::RegisterMismatch(format!("{} labels for {} dimensions", labels.len(), dims.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Register { labels, dims })
    }

    pub fn single(label: &str, d: usize) -> Result<Self> {
        Register::new(&[(label, d)])
    }

    /// The register with no subsystems (total dimension 1).
    pub fn empty() -> Self {
        Register { labels: Vec::new(), dims: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> Vec<usize> {
        self.dims.iter().map(|d| d.get()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().map(|d| d.get()).product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if out.contains(&i) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.index_of(label)?].get())
    }

    /// Tensor product register; labels must stay unique.
    pub fn concat(&self, other: &Register) -> Result<Register> {
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut dims = self.dims.clone();
        dims.extend(other.dims.iter().copied());
        Register::from_parts(labels, dims)
    }

    /// The named subsystems, in the order given.
    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<Register> {
        let idx = self.indices_of(labels)?;
        Ok(self.select(&idx))
    }

    pub(crate) fn select(&self, idx: &[usize]) -> Register {
        Register {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            dims: idx.iter().map(|&i| self.dims[i]).collect(),
        }
    }

    /// Everything except the named subsystems, in register order.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Register> {
        let idx = self.indices_of(labels)?;
        let rest: Vec<usize> = (0..self.len()).filter(|i| !idx.contains(i)).collect();
        Ok(self.select(&rest))
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Register> {
        if labels.len() != self.len() {
            return Err(Error::RegisterMismatch(format!(
                "relabel with {} labels for {} subsystems",
                labels.len(),
                self.len()
            )));
        }
        Register::from_parts(labels.iter().map(|l| l.as_ref().to_string()).collect(), self.dims.clone())
    }

    /// Same labels and dimensions, possibly in a different order.
    pub fn same_set(&self, other: &Register) -> bool {
        self.len() == other.len()
            && self
                .labels
                .iter()
                .zip(&self.dims)
                .all(|(l, d)| other.index_of(l).map(|j| other.dims[j] == *d).unwrap_or(false))
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().zip(&self.dims).map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_rejects_small_and_composite() {
        assert!(Dim::new(1).is_err());
        assert!(Dim::prime(4).is_err());
        assert!(Dim::prime(7).is_ok());
        assert!(Dim::new(4).unwrap().log2() - 2.0 < 1e-15);
    }

    #[test]
    fn labels_must_be_unique() {
        assert!(matches!(Register::new(&[("A", 2), ("A", 3)]), Err(Error::DuplicateLabel(_))));
        let r = Register::new(&[("A", 2), ("B", 3), ("C", 5)]).unwrap();
        assert_eq!(r.total_dim(), 30);
        assert_eq!(r.without(&["B"]).unwrap().dims(), vec![2, 5]);
        assert!(r.index_of("Z").is_err());
    }
}
