//! Named operators.
//!
//! Every operator displayed in the source material is available here by name,
//! with exact rational coefficients reduced to `f64` once. Two entries are
//! constructed for this crate rather than transcribed: `cubic-example` and
//! `uniform`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tensor::{CsoTensor, QsoTensor};
use super::{from_volterra_matrix, OperatorSpec};
use crate::error::{Error, Result};

pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub citation: &'static str,
    /// `name=default in range` for each accepted parameter.
    pub params: &'static [&'static str],
}

const ROSTER: &[GalleryEntry] = &[
    GalleryEntry {
        name: "example-3d",
        citation: "first dissipative example on S^2, (Vx)_1 = x1^2+x2^2+x3^2+x1x2+x1x3+x2x3",
        params: &[],
    },
    GalleryEntry {
        name: "v0",
        citation: "V0 of the pair showing the dissipative set is not convex",
        params: &[],
    },
    GalleryEntry {
        name: "v1",
        citation: "V1 of the pair showing the dissipative set is not convex (same as example-3d)",
        params: &[],
    },
    GalleryEntry {
        name: "two-dim-family",
        citation: "the m = 2 family, dissipative exactly for 1 <= a <= 2",
        params: &["a=1 in [0, 2]"],
    },
    GalleryEntry {
        name: "counterexample-necessary",
        citation: "non-dissipative operator refuted at (0.5, 0.49, 0.01)",
        params: &[],
    },
    GalleryEntry {
        name: "form6-random",
        citation: "random regular operator with alpha_1 = I, leading p_1j,1 ~ U[1/2, 1]",
        params: &["seed=0 in [0, 2^53]", "m=4 in [2, 12]"],
    },
    GalleryEntry {
        name: "form6-nondissipative",
        citation: "alpha_1 = I operator with strictly positive coefficients that need not be dissipative; displayed coefficients are 2p",
        params: &[
            "a1=1 in [0.5, 2]",
            "a2=0.5",
            "b1=1.2 in [0.5, 2]",
            "b2=0.4",
            "c1=1.5 in [0.5, 2]",
            "c2=0.3",
        ],
    },
    GalleryEntry {
        name: "form8-instance",
        citation: "segment of fixed points co{e1, e2}, m = 4",
        params: &[],
    },
    GalleryEntry {
        name: "f-qso",
        citation: "F-operator with F = {1}; species 1 is the empty body, species 2 the female",
        params: &["p=0.5 in [0, 1]", "m=4 in [3, 12]"],
    },
    GalleryEntry {
        name: "zakharevich",
        citation: "Zakharevich operator, Volterra with non-converging Cesaro means",
        params: &[],
    },
    GalleryEntry {
        name: "identity",
        citation: "Volterra identity, p_ii,i = 1 and p_ij,i = p_ij,j = 1/2",
        params: &["m=3 in [2, 20]"],
    },
    GalleryEntry {
        name: "cubic-example",
        citation: "constructed (not transcribed): cubic operator with vertex rows on e1 and the 2/3 bound",
        params: &["m=3 in [2, 8]"],
    },
    GalleryEntry {
        name: "uniform",
        citation: "constructed (not transcribed): p_ij,k = 1/m, maps every point to the barycenter",
        params: &["m=3 in [2, 20]"],
    },
];

pub fn roster() -> &'static [GalleryEntry] {
    ROSTER
}

struct ParamReader<'a> {
    params: &'a Params,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    fn new(params: &'a Params) -> Self {
        Self {
            params,
            used: Vec::new(),
        }
    }

    fn real(&mut self, name: &'static str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        self.used.push(name);
        let v = self.params.get(name).copied().unwrap_or(default);
        if !(lo..=hi).contains(&v) {
            return Err(Error::ParamOutOfRange {
                name: name.into(),
                value: v,
                range: format!("[{lo}, {hi}]"),
            });
        }
        Ok(v)
    }

    fn int(&mut self, name: &'static str, default: usize, lo: usize, hi: usize) -> Result<usize> {
        let v = self.real(name, default as f64, lo as f64, hi as f64)?;
        if v.fract() != 0.0 {
            return Err(Error::ParamOutOfRange {
                name: name.into(),
                value: v,
                range: format!("integers in [{lo}, {hi}]"),
            });
        }
        Ok(v as usize)
    }

    fn finish(self) -> Result<()> {
        match self.params.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(Error::UnknownParam(k.clone())),
            None => Ok(()),
        }
    }
}

/// Species are 0-based in the tables below: `x1` is index 0.
fn quadratic_from_pairs(m: usize, f: impl Fn(usize, usize) -> Vec<f64>) -> QsoTensor {
    QsoTensor::from_fn(m, |t, k| f(t[0], t[1])[k])
}

fn e(m: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[k] = 1.0;
    v
}

pub fn gallery(name: &str, params: &Params) -> Result<OperatorSpec> {
    let mut r = ParamReader::new(params);
    let op = match name {
        "example-3d" | "v1" => OperatorSpec::quadratic(name, example_3d()),
        "v0" => OperatorSpec::quadratic(name, v0()),
        "two-dim-family" => {
            let a = r.real("a", 1.0, 0.0, 2.0)?;
            let q = quadratic_from_pairs(2, |i, j| match (i, j) {
                (0, 1) => vec![a / 2.0, 1.0 - a / 2.0],
                _ => vec![1.0, 0.0],
            });
            OperatorSpec::quadratic(name, q)
        }
        "counterexample-necessary" => {
            let q = quadratic_from_pairs(3, |i, j| match (i, j) {
                (0, 0) | (1, 1) => vec![1.0, 0.0, 0.0],
                (2, 2) => vec![0.0, 0.0, 1.0],
                (0, 1) => vec![0.5, 0.4, 0.1],
                _ => vec![0.5, 0.0, 0.5],
            });
            OperatorSpec::quadratic(name, q)
        }
        "form6-random" => {
            let seed = r.real("seed", 0.0, 0.0, 9_007_199_254_740_992.0)?;
            if seed.fract() != 0.0 {
                return Err(Error::ParamOutOfRange {
                    name: "seed".into(),
                    value: seed,
                    range: "integers in [0, 2^53]".into(),
                });
            }
            let m = r.int("m", 4, 2, 12)?;
            OperatorSpec::quadratic(name, form6_random(m, seed as u64))
        }
        "form6-nondissipative" => {
            let a1 = r.real("a1", 1.0, 0.5, 2.0)?;
            let a2 = r.real("a2", 0.5, 0.0, 2.0 - a1)?;
            let b1 = r.real("b1", 1.2, 0.5, 2.0)?;
            let b2 = r.real("b2", 0.4, 0.0, 2.0 - b1)?;
            let c1 = r.real("c1", 1.5, 0.5, 2.0)?;
            let c2 = r.real("c2", 0.3, 0.0, 2.0 - c1)?;
            // the displayed coefficients multiply x_i x_j, i.e. they are 2 p_ij,k
            let triple = |c1: f64, c2: f64| vec![c1 / 2.0, c2 / 2.0, (2.0 - c1 - c2) / 2.0];
            let q = quadratic_from_pairs(3, |i, j| match (i, j) {
                (0, 1) => triple(a1, a2),
                (1, 2) => triple(b1, b2),
                (0, 2) => triple(c1, c2),
                _ => e(3, 0),
            });
            OperatorSpec::quadratic(name, q)
        }
        "form8-instance" => OperatorSpec::quadratic(name, form8_instance()),
        "f-qso" => {
            let p = r.real("p", 0.5, 0.0, 1.0)?;
            let m = r.int("m", 4, 3, 12)?;
            let share = (1.0 - p) / (m - 1) as f64;
            let q = quadratic_from_pairs(m, |i, j| {
                if i == 1 && j >= 2 {
                    let mut v = vec![share; m];
                    v[0] = p;
                    v
                } else {
                    e(m, 0)
                }
            });
            OperatorSpec::quadratic(name, q)
        }
        "zakharevich" => {
            let a = vec![
                vec![0.0, 1.0, -1.0],
                vec![-1.0, 0.0, 1.0],
                vec![1.0, -1.0, 0.0],
            ];
            OperatorSpec::quadratic(name, from_volterra_matrix(&a)?)
        }
        "identity" => {
            let m = r.int("m", 3, 2, 20)?;
            OperatorSpec::quadratic(name, from_volterra_matrix(&vec![vec![0.0; m]; m])?)
        }
        "cubic-example" => {
            let m = r.int("m", 3, 2, 8)?;
            OperatorSpec::cubic(name, cubic_example(m))
        }
        "uniform" => {
            let m = r.int("m", 3, 2, 20)?;
            OperatorSpec::quadratic(name, QsoTensor::from_fn(m, |_, _| 1.0 / m as f64))
        }
        other => return Err(Error::UnknownName(other.into())),
    };
    r.finish()?;
    Ok(op)
}

fn example_3d() -> QsoTensor {
    quadratic_from_pairs(3, |i, j| match (i, j) {
        (0, 1) | (0, 2) => vec![0.5, 0.5, 0.0],
        (1, 2) => vec![0.5, 0.0, 0.5],
        _ => e(3, 0),
    })
}

fn v0() -> QsoTensor {
    quadratic_from_pairs(3, |i, j| match (i, j) {
        (0, 1) | (0, 2) => vec![0.5, 0.5, 0.0],
        (1, 2) => vec![0.0, 0.5, 0.5],
        _ => e(3, 1),
    })
}

fn form6_random(m: usize, seed: u64) -> QsoTensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = BTreeMap::new();
    for i in 0..m {
        for j in i + 1..m {
            let lead: f64 = rng.random_range(0.5..=1.0);
            let w: Vec<f64> = (1..m).map(|_| rng.random::<f64>()).collect();
            let total: f64 = w.iter().sum();
            let mut row = vec![lead];
            row.extend(w.iter().map(|wk| (1.0 - lead) * wk / total));
            rows.insert((i, j), row);
        }
    }
    quadratic_from_pairs(m, |i, j| {
        if i == j {
            e(m, 0)
        } else {
            rows[&(i, j)].clone()
        }
    })
}

/// alpha_1 = {1, 3, 4}, alpha_2 = {2}. Offspring of pairs involving species 2
/// split evenly between coordinates 1 and 2; pairs of species 1 with 3 or 4
/// feed coordinate 1; only the pair (3, 4) reaches coordinates above 2.
fn form8_instance() -> QsoTensor {
    quadratic_from_pairs(4, |i, j| match (i, j) {
        (1, 1) => e(4, 1),
        (0, 1) | (1, 2) | (1, 3) => vec![0.5, 0.5, 0.0, 0.0],
        (2, 3) => vec![0.5, 0.0, 0.5, 0.0],
        _ => e(4, 0),
    })
}

fn cubic_example(m: usize) -> CsoTensor {
    CsoTensor::from_fn(m, |t, k| {
        let constant = t[0] == t[2];
        match (constant, k) {
            (true, 0) => 1.0,
            (true, _) => 0.0,
            (false, 0) => 2.0 / 3.0,
            (false, 1) => 1.0 / 3.0,
            (false, _) => 0.0,
        }
    })
}
