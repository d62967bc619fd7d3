//! Symmetric heredity-coefficient tensors.
//!
//! A degree-`D` tensor stores `p[t][k]` for every multiset `t` of `D` parent
//! species and every offspring species `k`. Only the sorted representative of
//! each multiset is kept; lookups with unsorted parents go through a dense
//! slot table, so symmetry holds by construction.

use nalgebra::DMatrix;

/// Tolerance on `Σ_k p[t][k] = 1`.
pub const EPS_STOCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor<const D: usize> {
    m: usize,
    /// Sorted parent tuples, lexicographic order.
    reps: Vec<[usize; D]>,
    /// Number of ordered tuples collapsing onto each representative.
    mult: Vec<f64>,
    /// `coef[r * m + k]`.
    coef: Vec<f64>,
    /// Ordered tuple (base-`m` digits, first parent most significant) to rep index.
    slot: Vec<usize>,
}

/// Coefficient table of a quadratic stochastic operator, `p[i][j][k]`.
pub type QsoTensor = SymTensor<2>;
/// Coefficient table of a cubic stochastic operator, `p[i][j][l][k]`.
pub type CsoTensor = SymTensor<3>;

fn multiplicity<const D: usize>(t: &[usize; D]) -> f64 {
    let fact = [1.0, 1.0, 2.0, 6.0];
    let mut out = fact[D];
    let mut s = 0;
    while s < D {
        let mut e = s;
        while e < D && t[e] == t[s] {
            e += 1;
        }
        out /= fact[e - s];
        s = e;
    }
    out
}

fn ordered_index<const D: usize>(m: usize, t: &[usize; D]) -> usize {
    t.iter().fold(0, |acc, &i| acc * m + i)
}

impl<const D: usize> SymTensor<D> {
    pub const DEGREE: usize = D;

    /// Builds a tensor by evaluating `f` on every sorted parent tuple.
    /// No stochasticity checks are made; see [`crate::operators::validate`].
    pub fn from_fn(m: usize, mut f: impl FnMut(&[usize; D], usize) -> f64) -> Self {
        let mut reps = Vec::new();
        let mut cur = [0usize; D];
        loop {
            reps.push(cur);
            // next nondecreasing tuple
            let mut pos = D;
            while pos > 0 && cur[pos - 1] == m - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            let v = cur[pos - 1] + 1;
            for c in cur.iter_mut().skip(pos - 1) {
                *c = v;
            }
        }
        let mut slot = vec![0usize; m.pow(D as u32)];
        for (o, s) in slot.iter_mut().enumerate() {
            let mut t = [0usize; D];
            let mut rem = o;
            for d in (0..D).rev() {
                t[d] = rem % m;
                rem /= m;
            }
            t.sort_unstable();
            *s = reps.binary_search(&t).expect("sorted tuple present");
        }
        let mult = reps.iter().map(multiplicity).collect();
        let mut coef = Vec::with_capacity(reps.len() * m);
        for r in &reps {
            for k in 0..m {
                coef.push(f(r, k));
            }
        }
        Self {
            m,
            reps,
            mult,
            coef,
            slot,
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        D
    }

    fn rep_index(&self, parents: &[usize; D]) -> usize {
        self.slot[ordered_index(self.m, parents)]
    }

    /// `p[parents][k]`; parents may be given in any order.
    pub fn get(&self, parents: &[usize; D], k: usize) -> f64 {
        self.coef[self.rep_index(parents) * self.m + k]
    }

    /// Offspring distribution `a_t = (p[t][1], …, p[t][m])` of a parent tuple.
    pub fn row(&self, parents: &[usize; D]) -> &[f64] {
        let r = self.rep_index(parents);
        &self.coef[r * self.m..(r + 1) * self.m]
    }

    /// Sorted representatives with their rows.
    pub fn rows(&self) -> impl Iterator<Item = (&[usize; D], &[f64])> {
        self.reps.iter().zip(self.coef.chunks_exact(self.m))
    }

    /// `(parents, multiplicity, row)` for every sorted representative.
    pub fn monomials(&self) -> impl Iterator<Item = (&[usize; D], f64, &[f64])> {
        self.rows().zip(&self.mult).map(|((t, row), &c)| (t, c, row))
    }

    /// Evaluates the operator polynomial without renormalization.
    pub fn apply_raw(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for ((t, row), &mult) in self.rows().zip(&self.mult) {
            let w = mult * t.iter().map(|&i| x[i]).product::<f64>();
            if w == 0.0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(row) {
                *o += w * p;
            }
        }
    }

    /// `J[k][i] = ∂(Vx)_k / ∂x_i` as a full `m × m` matrix.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.m;
        let mut j = DMatrix::zeros(m, m);
        for ((t, row), &mult) in self.rows().zip(&self.mult) {
            for q in 0..D {
                let partial: f64 = mult
                    * t.iter()
                        .enumerate()
                        .filter(|&(s, _)| s != q)
                        .map(|(_, &i)| x[i])
                        .product::<f64>();
                if partial == 0.0 {
                    continue;
                }
                let col = t[q];
                for (k, &p) in row.iter().enumerate() {
                    j[(k, col)] += partial * p;
                }
            }
        }
        j
    }

    /// Relabels species by `perm` (species `i` becomes `perm[i]`) in both
    /// parents and offspring.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0usize; self.m];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        Self::from_fn(self.m, |t, k| {
            let mut src = [0usize; D];
            for (s, &i) in t.iter().enumerate() {
                src[s] = inv[i];
            }
            self.get(&src, inv[k])
        })
    }

    /// Coefficientwise mixture `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Self {
        assert_eq!(self.m, other.m, "mixing tensors of different dimension");
        let mut out = self.clone();
        for (c, o) in out.coef.iter_mut().zip(&other.coef) {
            *c = lambda * *c + (1.0 - lambda) * o;
        }
        out
    }

    /// Worst `|Σ_k p[t][k] − 1|` over parent tuples, with the tuple.
    pub fn worst_row_sum(&self) -> ([usize; D], f64, f64) {
        let mut worst = (self.reps[0], 1.0, -1.0);
        for (t, row) in self.rows() {
            let s: f64 = row.iter().sum();
            let dev = (s - 1.0).abs();
            if dev > worst.2 {
                worst = (*t, s, dev);
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(&[0, 0]), 1.0);
        assert_eq!(multiplicity(&[0, 1]), 2.0);
        assert_eq!(multiplicity(&[1, 1, 1]), 1.0);
        assert_eq!(multiplicity(&[0, 1, 1]), 3.0);
        assert_eq!(multiplicity(&[0, 1, 2]), 6.0);
    }

    #[test]
    fn representative_counts() {
        let q = QsoTensor::from_fn(4, |_, _| 0.0);
        assert_eq!(q.reps.len(), 10);
        let c = CsoTensor::from_fn(4, |_, _| 0.0);
        assert_eq!(c.reps.len(), 20);
        let total: f64 = c.mult.iter().sum();
        assert_eq!(total, 64.0);
    }

    #[test]
    fn lookups_are_symmetric() {
        let c = CsoTensor::from_fn(3, |t, k| (t[0] * 9 + t[1] * 3 + t[2] + k) as f64);
        assert_eq!(c.get(&[2, 0, 1], 1), c.get(&[0, 1, 2], 1));
        assert_eq!(c.get(&[1, 2, 0], 0), c.get(&[0, 2, 1], 0));
    }
}
