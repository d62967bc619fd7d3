//! Iteration with coordinates stored as logarithms.
//!
//! `ln (Vx)_k = logsumexp_r (ln(c_r p_r,k) + Σ_{i∈r} ln x_i)`, followed by a
//! shift so that the new coordinates sum to one. Orbits that creep towards
//! the boundary keep their tiny coordinates instead of flushing them to 0.

use crate::operators::OperatorSpec;
use crate::simplex::SimplexPoint;

struct Term {
    parents: Vec<usize>,
    log_coef: f64,
}

pub struct LogStepper {
    /// `terms[k]`: monomials with a positive coefficient in `(Vx)_k`.
    terms: Vec<Vec<Term>>,
    logx: Vec<f64>,
    scratch: Vec<f64>,
}

fn logsumexp(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = v.clone().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + v.map(|t| (t - hi).exp()).sum::<f64>().ln()
}

impl LogStepper {
    pub fn new(op: &OperatorSpec, x0: &SimplexPoint) -> Self {
        let m = op.dim();
        let mut terms: Vec<Vec<Term>> = (0..m).map(|_| Vec::new()).collect();
        for (parents, mult, row) in op.monomials() {
            for (k, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    terms[k].push(Term {
                        parents: parents.clone(),
                        log_coef: (mult * p).ln(),
                    });
                }
            }
        }
        Self {
            terms,
            logx: x0.coords().iter().map(|v| v.ln()).collect(),
            scratch: vec![0.0; m],
        }
    }

    /// Advances one step; returns `|Σ_k (Vx)_k − 1|` before the shift.
    pub fn step(&mut self) -> f64 {
        let logx = &self.logx;
        for (out, terms) in self.scratch.iter_mut().zip(&self.terms) {
            *out = logsumexp(
                terms
                    .iter()
                    .map(|t| t.log_coef + t.parents.iter().map(|&i| logx[i]).sum::<f64>()),
            );
        }
        let total = logsumexp(self.scratch.iter().copied());
        for (l, s) in self.logx.iter_mut().zip(&self.scratch) {
            *l = s - total;
        }
        total.exp_m1().abs()
    }

    pub fn log_coords(&self) -> &[f64] {
        &self.logx
    }

    /// Current point; the exponentiated coordinates are renormalized to
    /// absorb rounding.
    pub fn point(&self) -> SimplexPoint {
        let mut x: Vec<f64> = self.logx.iter().map(|l| l.exp()).collect();
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= s);
        SimplexPoint::new(x).expect("exponentiated coordinates lie on the simplex")
    }

    pub fn write_point(&self, out: &mut [f64]) {
        for (o, l) in out.iter_mut().zip(&self.logx) {
            *o = l.exp();
        }
        let s: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= s);
    }
}
