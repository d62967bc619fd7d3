//! Fixed points: multistart search, continuum detection and spectral
//! classification on the plane `Σ v_i = 0`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::OperatorSpec;
use crate::simplex::{self, SimplexPoint};

/// Residual below which a point counts as fixed.
pub const FP_TOL: f64 = 1e-10;
/// Width of the band around modulus 1 used by the classification.
pub const SPECTRAL_TOL: f64 = 1e-9;

const MAX_ITER: usize = 200;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FixedPointClass {
    Elliptic,
    Hyperbolic,
    Parabolic,
    Mixed,
}

impl FixedPointClass {
    pub fn from_moduli(moduli: &[f64], tol: f64) -> Self {
        if moduli.iter().all(|&r| r < 1.0 - tol) {
            Self::Elliptic
        } else if moduli.iter().all(|&r| r > 1.0 + tol) {
            Self::Hyperbolic
        } else if moduli.iter().all(|&r| r <= 1.0 + tol) {
            Self::Parabolic
        } else {
            Self::Mixed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub a: SimplexPoint,
    pub b: SimplexPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub point: SimplexPoint,
    pub residual: f64,
    pub classification: FixedPointClass,
    /// Moduli of the `m − 1` eigenvalues, largest first.
    pub restricted_eigenvalues: Vec<f64>,
    pub continuum: bool,
    pub endpoints: Option<Segment>,
}

/// Matrix of `J` restricted to `{v : Σ v_i = 0}` in the basis
/// `b_i = e_i − e_{i+1}`. The coordinates of `w` in that basis are the
/// prefix sums of `w`.
pub fn restricted_jacobian(j: &DMatrix<f64>) -> DMatrix<f64> {
    let m = j.nrows();
    DMatrix::from_fn(m - 1, m - 1, |k, i| {
        (0..=k).map(|r| j[(r, i)] - j[(r, i + 1)]).sum()
    })
}

fn restricted_moduli(op: &OperatorSpec, x: &[f64]) -> Vec<f64> {
    let r = restricted_jacobian(&op.jacobian_raw(x));
    let mut moduli: Vec<f64> = r.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// `‖Vx − x‖_∞`, with `Vx` renormalized.
fn residual(op: &OperatorSpec, x: &[f64], buf: &mut [f64]) -> f64 {
    let mass = op.apply_raw(x, buf);
    buf.iter()
        .zip(x)
        .map(|(v, xi)| (v / mass - xi).abs())
        .fold(0.0, f64::max)
}

fn residual_of(op: &OperatorSpec, x: &[f64]) -> f64 {
    residual(op, x, &mut vec![0.0; x.len()])
}

pub fn classify_fixed_point(
    op: &OperatorSpec,
    x0: &SimplexPoint,
    tol: f64,
) -> Result<FixedPointResult> {
    if x0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: x0.dim(),
        });
    }
    let res = residual_of(op, x0.coords());
    if !(res <= FP_TOL) {
        return Err(Error::NotAFixedPoint {
            residual: res,
            tol: FP_TOL,
        });
    }
    Ok(classify_unchecked(op, x0.clone(), res, tol))
}

fn classify_unchecked(op: &OperatorSpec, x: SimplexPoint, res: f64, tol: f64) -> FixedPointResult {
    let moduli = restricted_moduli(op, x.coords());
    FixedPointResult {
        classification: FixedPointClass::from_moduli(&moduli, tol),
        restricted_eigenvalues: moduli,
        point: x,
        residual: res,
        continuum: false,
        endpoints: None,
    }
}

fn project(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    } else {
        let u = 1.0 / x.len() as f64;
        x.iter_mut().for_each(|v| *v = u);
    }
}

/// Damped Newton on `F(x) = Vx − x` in the coordinates `x_1..x_{m−1}`
/// (`x_m = 1 − Σ`), projected back onto the simplex after every step.
/// Falls back to projected descent on `½‖F‖²` when no Newton step
/// reduces the residual. Returns the final point and its residual.
fn solve_from(op: &OperatorSpec, start: &[f64]) -> (Vec<f64>, f64) {
    let m = op.dim();
    let mut x = start.to_vec();
    let mut buf = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut res = residual(op, &x, &mut buf);
    for _ in 0..MAX_ITER {
        if res == 0.0 {
            break;
        }
        let mass = op.apply_raw(&x, &mut buf);
        let f = DVector::from_fn(m - 1, |k, _| buf[k] / mass - x[k]);
        let j = op.jacobian_raw(&x);
        let g = DMatrix::from_fn(m - 1, m - 1, |k, i| {
            j[(k, i)] - j[(k, m - 1)] - if k == i { 1.0 } else { 0.0 }
        });
        let svd = g.clone().svd(true, true);
        let cutoff = svd.singular_values.max() * 1e-13;
        let newton = svd.solve(&(-&f), cutoff).ok();
        let descent = -(g.transpose() * &f);

        let mut accepted = None;
        for dir in newton.iter().chain(std::iter::once(&descent)) {
            let mut t = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let mut tail = 0.0;
                for k in 0..m - 1 {
                    trial[k] = x[k] + t * dir[k];
                    tail += t * dir[k];
                }
                trial[m - 1] = x[m - 1] - tail;
                project(&mut trial);
                let r = residual(op, &trial, &mut buf);
                if r < res {
                    accepted = Some(r);
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        match accepted {
            Some(r) => {
                let step = simplex::dist_inf(&x, &trial);
                x.copy_from_slice(&trial);
                res = r;
                if step < 1e-16 {
                    break;
                }
            }
            None => break,
        }
    }
    (x, res)
}

/// Largest `t` such that `p + t·d` stays in the simplex (`d` sums to zero).
fn max_step(p: &[f64], d: &[f64]) -> f64 {
    p.iter()
        .zip(d)
        .filter(|(_, &di)| di < 0.0)
        .map(|(&pi, &di)| -pi / di)
        .fold(f64::INFINITY, f64::min)
}

fn along(p: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    let mut v: Vec<f64> = p.iter().zip(d).map(|(a, b)| a + t * b).collect();
    project(&mut v);
    v
}

/// Whether every probe of the segment `[p, q]` is fixed within `fp_tol`:
/// five interior points, then the midpoints between them.
fn segment_is_fixed(op: &OperatorSpec, p: &[f64], q: &[f64], fp_tol: f64) -> bool {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    (1..12).all(|k| residual_of(op, &along(p, &d, k as f64 / 12.0)) <= fp_tol)
}

/// Pushes the fixed segment `[p, q]` outward along its line to the last
/// fixed point before the simplex boundary, bisecting where needed.
fn extend_segment(op: &OperatorSpec, p: &[f64], q: &[f64], fp_tol: f64) -> (Vec<f64>, Vec<f64>) {
    let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
    let neg: Vec<f64> = d.iter().map(|v| -v).collect();
    let reach = |dir: &[f64], inner: f64| -> f64 {
        let outer = max_step(p, dir);
        if residual_of(op, &along(p, dir, outer)) <= fp_tol {
            return outer;
        }
        let (mut lo, mut hi) = (inner, outer);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if residual_of(op, &along(p, dir, mid)) <= fp_tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let t_hi = reach(&d, 1.0);
    let t_lo = reach(&neg, 0.0);
    (along(p, &neg, t_lo), along(p, &d, t_hi))
}

/// Multistart search for fixed points. Vertices are always tested exactly;
/// `n_starts` random interior starts are refined by damped Newton. Points
/// within `max(10·fp_tol, 10·√fp_tol)` of an earlier one are merged; fixed
/// points joined by a fixed segment are reported once, as a continuum with
/// the segment's extended endpoints.
pub fn find_fixed_points(
    op: &OperatorSpec,
    n_starts: usize,
    fp_tol: f64,
    seed: u64,
) -> Result<Vec<FixedPointResult>> {
    if n_starts == 0 {
        return Err(Error::ParamOutOfRange {
            name: "n_starts".into(),
            value: 0.0,
            range: "[1, ∞)".into(),
        });
    }
    let m = op.dim();
    let mut candidates: Vec<(Vec<f64>, f64)> = (0..m)
        .map(|k| {
            let v = SimplexPoint::vertex(m, k).expect("valid vertex").into_coords();
            let r = residual_of(op, &v);
            (v, r)
        })
        .collect();
    let solved: Vec<(Vec<f64>, f64)> = (0..n_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let start = simplex::sample_uniform(m, &mut rng).expect("m ≥ 2").into_coords();
            solve_from(op, &start)
        })
        .collect();
    candidates.extend(solved);

    // Near a parabolic fixed point the residual grows only quadratically, so
    // every point within about √fp_tol passes the residual test. Points that
    // close to an earlier one are merged into it rather than read as a
    // second fixed point (which would fake a tiny continuum).
    let resolution = 10.0 * fp_tol.sqrt();
    let mut found: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, r) in candidates {
        if r <= fp_tol
            && !found
                .iter()
                .any(|(y, _)| simplex::dist_inf(&x, y) <= (10.0 * fp_tol).max(resolution))
        {
            found.push((x, r));
        }
    }
    if found.is_empty() {
        return Err(Error::NoConvergence);
    }

    let mut absorbed = vec![false; found.len()];
    let mut out = Vec::new();
    for i in 0..found.len() {
        if absorbed[i] {
            continue;
        }
        absorbed[i] = true;
        let p = &found[i].0;
        let mut partners: Vec<usize> = (0..found.len()).filter(|&j| j != i).collect();
        partners.sort_by(|&a, &b| {
            simplex::dist_inf(p, &found[b].0).total_cmp(&simplex::dist_inf(p, &found[a].0))
        });
        let partner = partners
            .into_iter()
            .find(|&j| segment_is_fixed(op, p, &found[j].0, fp_tol));
        let Some(j) = partner else {
            let pt = SimplexPoint::new(p.clone())?;
            out.push(classify_unchecked(op, pt, found[i].1, SPECTRAL_TOL));
            continue;
        };
        for (k, flag) in absorbed.iter_mut().enumerate() {
            if !*flag && segment_is_fixed(op, p, &found[k].0, fp_tol) {
                *flag = true;
            }
        }
        let (a, b) = extend_segment(op, p, &found[j].0, fp_tol);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect();
        let res = residual_of(op, &mid);
        let mut r = classify_unchecked(op, SimplexPoint::new(mid)?, res, SPECTRAL_TOL);
        r.continuum = true;
        r.endpoints = Some(Segment {
            a: SimplexPoint::new(a)?,
            b: SimplexPoint::new(b)?,
        });
        out.push(r);
    }
    Ok(out)
}
