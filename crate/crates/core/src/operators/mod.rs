//! Quadratic and cubic stochastic operators.
//!
//! A quadratic operator maps `x` to `(Vx)_k = Σ_{i,j} p[i][j][k] x_i x_j`, a
//! cubic one to `(Vx)_k = Σ_{i,j,l} p[i][j][l][k] x_i x_j x_l`. Coefficients
//! are nonnegative, symmetric in the parent indices, and each parent tuple's
//! offspring distribution sums to one, so the simplex is mapped into itself.

mod gallery;
mod tensor;
mod volterra;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

pub use gallery::{gallery, roster, GalleryEntry, Params};
pub use tensor::{CsoTensor, QsoTensor, SymTensor, EPS_STOCH};
pub use volterra::{from_volterra_matrix, volterra_form, VolterraForm};

#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Quadratic(QsoTensor),
    Cubic(CsoTensor),
}

macro_rules! dispatch {
    ($t:expr, $v:ident => $e:expr) => {
        match $t {
            Tensor::Quadratic($v) => $e,
            Tensor::Cubic($v) => $e,
        }
    };
}

/// A named operator of degree 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub tensor: Tensor,
}

impl OperatorSpec {
    pub fn quadratic(name: impl Into<String>, q: QsoTensor) -> Self {
        Self {
            name: name.into(),
            tensor: Tensor::Quadratic(q),
        }
    }

    pub fn cubic(name: impl Into<String>, c: CsoTensor) -> Self {
        Self {
            name: name.into(),
            tensor: Tensor::Cubic(c),
        }
    }

    pub fn dim(&self) -> usize {
        dispatch!(&self.tensor, t => t.dim())
    }

    pub fn degree(&self) -> usize {
        dispatch!(&self.tensor, t => t.degree())
    }

    pub fn as_quadratic(&self) -> Option<&QsoTensor> {
        match &self.tensor {
            Tensor::Quadratic(q) => Some(q),
            Tensor::Cubic(_) => None,
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Raw polynomial evaluation into `out`; returns the mass `Σ_k out_k`.
    pub fn apply_raw(&self, x: &[f64], out: &mut [f64]) -> f64 {
        dispatch!(&self.tensor, t => t.apply_raw(x, out));
        out.iter().sum()
    }

    /// Applies the operator and returns the image together with the mass
    /// defect `|Σ_k (Vx)_k − 1|` measured before renormalization.
    pub fn apply_with_defect(&self, x: &SimplexPoint) -> Result<(SimplexPoint, f64)> {
        self.check_dim(x.dim())?;
        let mut out = vec![0.0; self.dim()];
        let mass = self.apply_raw(x.coords(), &mut out);
        let defect = (mass - 1.0).abs();
        if mass != 1.0 {
            out.iter_mut().for_each(|o| *o /= mass);
        }
        Ok((SimplexPoint::new(out)?, defect))
    }

    pub fn apply(&self, x: &SimplexPoint) -> Result<SimplexPoint> {
        self.apply_with_defect(x).map(|(y, _)| y)
    }

    /// Full-space Jacobian `J[k][i] = ∂(Vx)_k/∂x_i`.
    pub fn jacobian(&self, x: &SimplexPoint) -> Result<DMatrix<f64>> {
        self.check_dim(x.dim())?;
        Ok(self.jacobian_raw(x.coords()))
    }

    pub fn jacobian_raw(&self, x: &[f64]) -> DMatrix<f64> {
        dispatch!(&self.tensor, t => t.jacobian(x))
    }

    /// `(parents, multiplicity, row)` for every sorted parent tuple.
    pub fn monomials(&self) -> Vec<(Vec<usize>, f64, &[f64])> {
        dispatch!(&self.tensor, t => t.monomials().map(|(p, c, r)| (p.to_vec(), c, r)).collect())
    }

    /// Relabels species by `perm` (species `i` becomes `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let tensor = match &self.tensor {
            Tensor::Quadratic(q) => Tensor::Quadratic(q.permuted(perm)),
            Tensor::Cubic(c) => Tensor::Cubic(c.permuted(perm)),
        };
        Self {
            name: format!("{}-relabeled", self.name),
            tensor,
        }
    }

    /// Exports all nonzero ordered coefficients in the JSON file layout.
    pub fn to_raw(&self) -> RawOperator {
        let m = self.dim();
        let mut entries = Vec::new();
        match &self.tensor {
            Tensor::Quadratic(q) => {
                for i in 0..m {
                    for j in 0..m {
                        for (k, &p) in q.row(&[i, j]).iter().enumerate() {
                            if p != 0.0 {
                                entries.push(RawEntry::new(&[i, j], k, p));
                            }
                        }
                    }
                }
            }
            Tensor::Cubic(c) => {
                for i in 0..m {
                    for j in 0..m {
                        for l in 0..m {
                            for (k, &p) in c.row(&[i, j, l]).iter().enumerate() {
                                if p != 0.0 {
                                    entries.push(RawEntry::new(&[i, j, l], k, p));
                                }
                            }
                        }
                    }
                }
            }
        }
        RawOperator {
            name: self.name.clone(),
            m,
            degree: self.degree(),
            entries,
            symmetrize: false,
        }
    }
}

/// One coefficient in the operator file; indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEntry {
    pub i: usize,
    pub j: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    pub k: usize,
    pub p: f64,
}

impl RawEntry {
    fn new(parents: &[usize], k: usize, p: f64) -> Self {
        Self {
            i: parents[0] + 1,
            j: parents[1] + 1,
            l: parents.get(2).map(|l| l + 1),
            k: k + 1,
            p,
        }
    }
}

/// Operator file contents. Omitted entries are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOperator {
    pub name: String,
    pub m: usize,
    pub degree: usize,
    pub entries: Vec<RawEntry>,
    #[serde(default)]
    pub symmetrize: bool,
}

/// Checks a raw coefficient table and builds the operator.
///
/// With `symmetrize` set on the table, every coefficient is replaced by its
/// average over the orderings of its parent indices before any check runs.
pub fn validate(raw: &RawOperator) -> Result<OperatorSpec> {
    if raw.m < 2 {
        return Err(Error::InvalidDimension { m: raw.m });
    }
    match raw.degree {
        2 => Ok(OperatorSpec::quadratic(raw.name.clone(), build::<2>(raw)?)),
        3 => Ok(OperatorSpec::cubic(raw.name.clone(), build::<3>(raw)?)),
        d => Err(Error::UnsupportedDegree(d)),
    }
}

fn build<const D: usize>(raw: &RawOperator) -> Result<SymTensor<D>> {
    let m = raw.m;
    let n_ordered = m.pow(D as u32);
    let mut full = vec![0.0; n_ordered * m];
    let mut seen = vec![false; n_ordered * m];
    for (e, entry) in raw.entries.iter().enumerate() {
        let idx: Vec<usize> = match (D, entry.l) {
            (2, None) => vec![entry.i, entry.j],
            (3, Some(l)) => vec![entry.i, entry.j, l],
            _ => {
                return Err(Error::Parse(format!(
                    "entry {e}: index `l` must be present exactly for degree 3"
                )))
            }
        };
        if idx.iter().chain([&entry.k]).any(|&v| v == 0 || v > m) {
            return Err(Error::IndexOutOfRange { entry: e, m });
        }
        if !entry.p.is_finite() {
            return Err(Error::Parse(format!("entry {e}: non-finite coefficient")));
        }
        let parents: Vec<usize> = idx.iter().map(|v| v - 1).collect();
        let k = entry.k - 1;
        if entry.p < 0.0 {
            return Err(Error::NegativeCoefficient {
                parents,
                k,
                value: entry.p,
            });
        }
        let o = parents.iter().fold(0, |acc, &i| acc * m + i) * m + k;
        if seen[o] {
            return Err(Error::DuplicateEntry { entry: e });
        }
        seen[o] = true;
        full[o] = entry.p;
    }

    let ordered = |t: &[usize]| t.iter().fold(0, |acc, &i| acc * m + i);
    let mut worst_asym: Option<(Vec<usize>, usize, f64)> = None;
    let tensor = SymTensor::<D>::from_fn(m, |t, k| {
        let perms = orderings(t);
        let vals: Vec<f64> = perms.iter().map(|p| full[ordered(p) * m + k]).collect();
        let mean = if vals.iter().all(|&v| v == vals[0]) {
            vals[0]
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        for (p, v) in perms.iter().zip(&vals) {
            let dev = (v - vals[0]).abs();
            if dev > worst_asym.as_ref().map_or(EPS_STOCH, |w| w.2) {
                worst_asym = Some((p.clone(), k, dev));
            }
        }
        mean
    });
    if !raw.symmetrize {
        if let Some((parents, k, deviation)) = worst_asym {
            return Err(Error::Asymmetry {
                parents,
                k,
                deviation,
            });
        }
    }
    let (t, sum, deviation) = tensor.worst_row_sum();
    if deviation > EPS_STOCH {
        return Err(Error::RowSumViolation {
            parents: t.to_vec(),
            sum,
            deviation,
        });
    }
    Ok(tensor)
}

/// Distinct orderings of a sorted tuple, lexicographic.
fn orderings(t: &[usize]) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        let mut last = None;
        for idx in 0..rest.len() {
            if last == Some(rest[idx]) {
                continue;
            }
            last = Some(rest[idx]);
            let v = rest.remove(idx);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut t.to_vec(), &mut Vec::new(), &mut out);
    out
}
