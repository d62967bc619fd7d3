//! Volterra operators and their canonical form.
//!
//! A quadratic operator is Volterra when `p[i][j][k] = 0` for every
//! `k ∉ {i, j}`. It can then be written as `(Vx)_k = x_k (1 + Σ_i a_ki x_i)`
//! with `a_ki = 2 p[i][k][k] − 1` for `i ≠ k`. The diagonal `a_kk` is set to
//! zero: under the Volterra constraint `p[k][k][k] = 1`, and the `x_k²` term
//! is already accounted for by the leading `x_k`.

use serde::Serialize;

use super::tensor::{QsoTensor, EPS_STOCH};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolterraForm {
    pub is_volterra: bool,
    /// `a[k][i]`; all zeros when `is_volterra` is false.
    pub a: Vec<Vec<f64>>,
    /// `a + aᵀ = 0` within the tolerance used for extraction.
    pub skew_symmetric: bool,
}

pub fn volterra_form(q: &QsoTensor, tol: f64) -> VolterraForm {
    let m = q.dim();
    let mut is_volterra = true;
    'outer: for i in 0..m {
        for j in i..m {
            for (k, &p) in q.row(&[i, j]).iter().enumerate() {
                if k != i && k != j && p > tol {
                    is_volterra = false;
                    break 'outer;
                }
            }
        }
    }
    let mut a = vec![vec![0.0; m]; m];
    if is_volterra {
        for (k, row) in a.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                if i != k {
                    *v = 2.0 * q.get(&[i, k], k) - 1.0;
                }
            }
        }
    }
    let skew_symmetric =
        (0..m).all(|k| (0..m).all(|i| (a[k][i] + a[i][k]).abs() <= tol));
    VolterraForm {
        is_volterra,
        a,
        skew_symmetric,
    }
}

/// Builds the Volterra tensor with canonical matrix `a` (skew-symmetric,
/// entries in `[-1, 1]`; the diagonal is ignored).
pub fn from_volterra_matrix(a: &[Vec<f64>]) -> Result<QsoTensor> {
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidDimension { m });
    }
    for (k, row) in a.iter().enumerate() {
        if row.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: row.len(),
            });
        }
        for (i, &v) in row.iter().enumerate() {
            if i == k {
                continue;
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::ParamOutOfRange {
                    name: format!("a[{}][{}]", k + 1, i + 1),
                    value: v,
                    range: "[-1, 1]".into(),
                });
            }
            if (v + a[i][k]).abs() > EPS_STOCH {
                return Err(Error::Asymmetry {
                    parents: vec![k, i],
                    k,
                    deviation: (v + a[i][k]).abs(),
                });
            }
        }
    }
    Ok(QsoTensor::from_fn(m, |t, k| {
        let (i, j) = (t[0], t[1]);
        if i == j {
            return if k == i { 1.0 } else { 0.0 };
        }
        if k == i {
            (1.0 + a[i][j]) / 2.0
        } else if k == j {
            (1.0 + a[j][i]) / 2.0
        } else {
            0.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gallery, Params};

    #[test]
    fn zakharevich_canonical_matrix() {
        let op = gallery("zakharevich", &Params::new()).unwrap();
        let v = volterra_form(op.as_quadratic().unwrap(), 1e-9);
        assert!(v.is_volterra);
        assert!(v.skew_symmetric);
        assert_eq!(
            v.a,
            vec![
                vec![0.0, 1.0, -1.0],
                vec![-1.0, 0.0, 1.0],
                vec![1.0, -1.0, 0.0]
            ]
        );
    }

    #[test]
    fn identity_has_zero_matrix() {
        let op = gallery("identity", &Params::new()).unwrap();
        let v = volterra_form(op.as_quadratic().unwrap(), 1e-9);
        assert!(v.is_volterra);
        assert!(v.a.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn example_3d_is_not_volterra() {
        let op = gallery("example-3d", &Params::new()).unwrap();
        assert!(!volterra_form(op.as_quadratic().unwrap(), 1e-9).is_volterra);
    }

    #[test]
    fn rejects_non_skew_matrix() {
        let a = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert!(from_volterra_matrix(&a).is_err());
    }
}
