//! Running Cesàro means `(x + Vx + ⋯ + V^{n−1}x)/n`.

use serde::Serialize;

use super::logdomain::LogStepper;
use super::Arithmetic;
use crate::error::{Error, Result};
use crate::operators::OperatorSpec;
use crate::simplex::SimplexPoint;

/// Number of trailing samples whose spread defines the fluctuation.
pub const WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Schedule {
    /// `n = 1, 2, 4, …` up to `n_max`, and `n_max` itself.
    #[default]
    PowersOfTwo,
    /// Explicit sample points; entries above `n_max` are dropped.
    Explicit(Vec<usize>),
}

impl Schedule {
    fn points(&self, n_max: usize) -> Vec<usize> {
        let mut pts = match self {
            Schedule::PowersOfTwo => {
                let mut v = Vec::new();
                let mut n = 1usize;
                while n <= n_max {
                    v.push(n);
                    n = n.saturating_mul(2);
                }
                v
            }
            Schedule::Explicit(v) => v.iter().copied().filter(|&n| n >= 1 && n <= n_max).collect(),
        };
        pts.push(n_max);
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CesaroOptions {
    pub n_max: usize,
    pub tol: f64,
    pub schedule: Schedule,
    pub arithmetic: Arithmetic,
    /// Average every `stride`-th iterate only: `(x + V^s x + ⋯ + V^{(n−1)s} x)/n`.
    pub stride: usize,
}

impl CesaroOptions {
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            ..Self::default()
        }
    }
}

impl Default for CesaroOptions {
    fn default() -> Self {
        Self {
            n_max: 100_000,
            tol: 1e-6,
            schedule: Schedule::PowersOfTwo,
            arithmetic: Arithmetic::LogDomain,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroResult {
    pub partial_means: Vec<(usize, SimplexPoint)>,
    pub converged: bool,
    pub limit_estimate: Option<SimplexPoint>,
    /// Largest pairwise `∞`-distance among the last ten sampled means.
    pub fluctuation: f64,
}

fn spread<'a>(means: impl Iterator<Item = &'a SimplexPoint> + Clone) -> f64 {
    let mut out: f64 = 0.0;
    for (a_idx, a) in means.clone().enumerate() {
        for b in means.clone().skip(a_idx + 1) {
            out = out.max(a.dist_inf(b));
        }
    }
    out
}

impl CesaroResult {
    /// Largest pairwise distance among sampled means with `lo ≤ n ≤ hi`.
    pub fn fluctuation_over(&self, lo: usize, hi: usize) -> f64 {
        spread(
            self.partial_means
                .iter()
                .filter(|(n, _)| (lo..=hi).contains(n))
                .map(|(_, p)| p),
        )
    }
}

/// Compensated running sum of points.
struct Accumulator {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl Accumulator {
    fn new(m: usize) -> Self {
        Self {
            sum: vec![0.0; m],
            comp: vec![0.0; m],
        }
    }

    fn add(&mut self, x: &[f64]) {
        for ((s, c), &v) in self.sum.iter_mut().zip(&mut self.comp).zip(x) {
            let t = *s + v;
            if s.abs() >= v.abs() {
                *c += (*s - t) + v;
            } else {
                *c += (v - t) + *s;
            }
            *s = t;
        }
    }

    fn mean(&self, n: usize) -> Result<SimplexPoint> {
        SimplexPoint::new(
            self.sum
                .iter()
                .zip(&self.comp)
                .map(|(s, c)| (s + c) / n as f64)
                .collect(),
        )
    }
}

enum Stepper<'a> {
    Linear { op: &'a OperatorSpec, x: Vec<f64>, buf: Vec<f64> },
    Log { inner: LogStepper, x: Vec<f64> },
}

impl Stepper<'_> {
    fn current(&self) -> &[f64] {
        match self {
            Stepper::Linear { x, .. } | Stepper::Log { x, .. } => x,
        }
    }

    fn advance(&mut self) {
        match self {
            Stepper::Linear { op, x, buf } => {
                let mass = op.apply_raw(x, buf);
                for (xi, b) in x.iter_mut().zip(buf.iter()) {
                    *xi = b / mass;
                }
            }
            Stepper::Log { inner, x } => {
                inner.step();
                inner.write_point(x);
            }
        }
    }
}

pub fn cesaro(op: &OperatorSpec, x0: &SimplexPoint, opts: &CesaroOptions) -> Result<CesaroResult> {
    if x0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: x0.dim(),
        });
    }
    if opts.n_max < WINDOW {
        return Err(Error::ParamOutOfRange {
            name: "n_max".into(),
            value: opts.n_max as f64,
            range: format!("[{WINDOW}, ∞)"),
        });
    }
    if opts.stride == 0 {
        return Err(Error::ParamOutOfRange {
            name: "stride".into(),
            value: 0.0,
            range: "[1, ∞)".into(),
        });
    }
    let m = op.dim();
    let mut stepper = match opts.arithmetic {
        Arithmetic::Linear => Stepper::Linear {
            op,
            x: x0.coords().to_vec(),
            buf: vec![0.0; m],
        },
        Arithmetic::LogDomain => Stepper::Log {
            inner: LogStepper::new(op, x0),
            x: x0.coords().to_vec(),
        },
    };
    let samples = opts.schedule.points(opts.n_max);
    let mut next = samples.iter().peekable();
    let mut acc = Accumulator::new(m);
    let mut partial_means = Vec::with_capacity(samples.len());
    for n in 1..=opts.n_max {
        acc.add(stepper.current());
        if next.peek() == Some(&&n) {
            next.next();
            partial_means.push((n, acc.mean(n)?));
        }
        if n < opts.n_max {
            for _ in 0..opts.stride {
                stepper.advance();
            }
        }
    }
    let tail = partial_means.len().saturating_sub(WINDOW);
    let fluctuation = spread(partial_means[tail..].iter().map(|(_, p)| p));
    let converged = fluctuation < opts.tol;
    let limit_estimate = converged.then(|| partial_means.last().expect("n_max ≥ 1").1.clone());
    Ok(CesaroResult {
        partial_means,
        converged,
        limit_estimate,
        fluctuation,
    })
}

/// Cesàro means along the subsequence `0, s, 2s, …` of the orbit.
pub fn cesaro_subsequence(
    op: &OperatorSpec,
    x0: &SimplexPoint,
    stride: usize,
    opts: &CesaroOptions,
) -> Result<CesaroResult> {
    cesaro(op, x0, &CesaroOptions { stride, ..opts.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gallery, Params};
    use crate::simplex;

    #[test]
    fn schedule_points() {
        assert_eq!(Schedule::PowersOfTwo.points(20), vec![1, 2, 4, 8, 16, 20]);
        assert_eq!(Schedule::PowersOfTwo.points(16), vec![1, 2, 4, 8, 16]);
        assert_eq!(Schedule::Explicit(vec![0, 5, 30]).points(20), vec![5, 20]);
    }

    #[test]
    fn fixed_point_start_converges_to_itself() {
        let op = gallery("identity", &Params::new()).unwrap();
        let x = SimplexPoint::new(vec![0.1, 0.2, 0.7]).unwrap();
        let r = cesaro(&op, &x, &CesaroOptions::new(1000)).unwrap();
        assert!(r.converged);
        assert!(r.limit_estimate.unwrap().dist_inf(&x) < 1e-15);
    }

    #[test]
    fn rejects_short_runs() {
        let op = gallery("identity", &Params::new()).unwrap();
        let x = SimplexPoint::barycenter(3).unwrap();
        assert!(cesaro(&op, &x, &CesaroOptions::new(5)).is_err());
    }

    #[test]
    fn mean_matches_direct_average() {
        let op = gallery("example-3d", &Params::new()).unwrap();
        let x = SimplexPoint::barycenter(3).unwrap();
        let traj = super::super::iterate(&op, &x, 9).unwrap();
        let mut want = [0.0; 3];
        for p in &traj.points {
            for (w, v) in want.iter_mut().zip(p.coords()) {
                *w += v / 10.0;
            }
        }
        for arithmetic in [Arithmetic::Linear, Arithmetic::LogDomain] {
            let opts = CesaroOptions {
                arithmetic,
                ..CesaroOptions::new(10)
            };
            let r = cesaro(&op, &x, &opts).unwrap();
            let (n, last) = r.partial_means.last().unwrap();
            assert_eq!(*n, 10);
            assert!(simplex::dist_inf(last.coords(), &want) < 1e-14);
        }
    }

    #[test]
    fn stride_picks_every_other_iterate() {
        let op = gallery("example-3d", &Params::new()).unwrap();
        let x = SimplexPoint::barycenter(3).unwrap();
        let traj = super::super::iterate(&op, &x, 18).unwrap();
        let mut want = [0.0; 3];
        for p in traj.points.iter().step_by(2) {
            for (w, v) in want.iter_mut().zip(p.coords()) {
                *w += v / 10.0;
            }
        }
        let r = cesaro_subsequence(&op, &x, 2, &CesaroOptions::new(10)).unwrap();
        assert!(simplex::dist_inf(r.partial_means.last().unwrap().1.coords(), &want) < 1e-14);
    }
}
