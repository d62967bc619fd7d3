//! What can be decided about dissipativity (`Vx ≻ x` for every `x`).
//!
//! Two kinds of evidence are combined:
//!
//! * exact necessary conditions on the coefficients: every vertex row
//!   `a_ii` (resp. `a_iii`) is a vertex of the simplex, which induces the
//!   alpha-partition; every `a_ij` with `j ∈ α_k0` puts at least `1/2`
//!   (cubic: `a_ijj`, at least `2/3`) on `k0` and has at most two nonzero
//!   entries;
//! * randomized falsification: probe points and samples where `Vx ≻ x`
//!   is checked directly, keeping the most violated slack and the first
//!   violating point as a witness.
//!
//! A `Consistent` verdict is not a proof: no decision procedure is known for
//! `m >= 3`, and the exact conditions are not sufficient there.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::operators::{OperatorSpec, Tensor};
use crate::simplex::{self, SimplexPoint, EPS_CMP};

/// Default tolerance for coefficient comparisons.
pub const COEF_TOL: f64 = 1e-9;

fn one_based<S: Serializer>(i: &usize, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(*i as u64 + 1)
}

fn one_based_parts<S: Serializer>(
    v: &[Vec<usize>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|p| p.iter().map(|i| i + 1).collect::<Vec<_>>()))
}

/// Species indices in this module are 0-based; serialized reports are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRowCheck {
    #[serde(serialize_with = "one_based")]
    pub i: usize,
    pub pass: bool,
    /// `a_ii` (quadratic) or `a_iii` (cubic).
    pub row: Vec<f64>,
}

/// Checks that each vertex is mapped to a vertex: the largest entry of the
/// vertex row is at least `1 − tol`.
pub fn check_vertex_rows(op: &OperatorSpec, tol: f64) -> Vec<VertexRowCheck> {
    (0..op.dim())
        .map(|i| {
            let row = vertex_row(op, i).to_vec();
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            VertexRowCheck {
                i,
                pass: top >= 1.0 - tol,
                row,
            }
        })
        .collect()
}

fn vertex_row(op: &OperatorSpec, i: usize) -> &[f64] {
    match &op.tensor {
        Tensor::Quadratic(q) => q.row(&[i, i]),
        Tensor::Cubic(c) => c.row(&[i, i, i]),
    }
}

/// `parts[k]` lists the species whose vertex is mapped to `e_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaPartition {
    #[serde(serialize_with = "one_based_parts")]
    pub parts: Vec<Vec<usize>>,
}

impl AlphaPartition {
    /// The part containing species `i`.
    pub fn part_of(&self, i: usize) -> usize {
        self.parts
            .iter()
            .position(|p| p.contains(&i))
            .expect("partition covers every species")
    }
}

pub fn extract_alpha_partition(op: &OperatorSpec, tol: f64) -> Result<AlphaPartition> {
    let m = op.dim();
    let mut parts = vec![Vec::new(); m];
    for i in 0..m {
        let row = vertex_row(op, i);
        // tol < 1/2 makes the qualifying k unique
        match row.iter().position(|&p| p >= 1.0 - tol) {
            Some(k) => parts[k].push(i),
            None => return Err(Error::NotAPartition { index: i }),
        }
    }
    Ok(AlphaPartition { parts })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfBoundViolation {
    #[serde(serialize_with = "one_based")]
    pub i: usize,
    #[serde(serialize_with = "one_based")]
    pub j: usize,
    #[serde(serialize_with = "one_based")]
    pub k0: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThirdZeroViolation {
    #[serde(serialize_with = "one_based")]
    pub i: usize,
    #[serde(serialize_with = "one_based")]
    pub j: usize,
    /// Third-largest entry of `a_ij` (cubic: `a_ijj`).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NecessaryConditionsReport {
    pub lemma_vertex_rows: Vec<VertexRowCheck>,
    pub lemma_half_bound: Vec<HalfBoundViolation>,
    pub lemma_third_zero: Vec<ThirdZeroViolation>,
    pub partition: Option<AlphaPartition>,
    pub overall: bool,
}

/// Lower bound on the leading coefficient: 1/2 for quadratic, 2/3 for cubic.
pub fn leading_bound(degree: usize) -> f64 {
    if degree == 3 {
        2.0 / 3.0
    } else {
        0.5
    }
}

/// Rows `a_ij` (quadratic) or `a_ijj` (cubic): the offspring distribution of
/// `x = (1 − λ) e_j + λ e_i` to first order in `λ`.
fn edge_row(op: &OperatorSpec, i: usize, j: usize) -> &[f64] {
    match &op.tensor {
        Tensor::Quadratic(q) => q.row(&[i, j]),
        Tensor::Cubic(c) => c.row(&[i, j, j]),
    }
}

/// Leading-coefficient and two-nonzero-entries checks against `partition`.
///
/// The third-entry check is vacuous for `m = 2` and is skipped there.
pub fn check_half_bound(
    op: &OperatorSpec,
    partition: &AlphaPartition,
    tol: f64,
) -> NecessaryConditionsReport {
    let m = op.dim();
    let bound = leading_bound(op.degree());
    let mut half = Vec::new();
    let mut third = Vec::new();
    for j in 0..m {
        let k0 = partition.part_of(j);
        for i in 0..m {
            let p = edge_row(op, i, j)[k0];
            if p < bound - tol {
                half.push(HalfBoundViolation { i, j, k0, p });
            }
        }
    }
    if m >= 3 {
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                // a_ij is symmetric in (i, j) for quadratic operators
                if op.degree() == 2 && i > j {
                    continue;
                }
                let value = simplex::sorted_desc(edge_row(op, i, j))[2];
                if value > tol {
                    third.push(ThirdZeroViolation { i, j, value });
                }
            }
        }
    }
    let vertex = check_vertex_rows(op, tol);
    let overall = vertex.iter().all(|v| v.pass) && half.is_empty() && third.is_empty();
    NecessaryConditionsReport {
        lemma_vertex_rows: vertex,
        lemma_half_bound: half,
        lemma_third_zero: third,
        partition: Some(partition.clone()),
        overall,
    }
}

/// All exact necessary conditions; stops after the vertex rows when they
/// fail, since the partition is then undefined.
pub fn necessary_conditions(op: &OperatorSpec, tol: f64) -> NecessaryConditionsReport {
    match extract_alpha_partition(op, tol) {
        Ok(partition) => check_half_bound(op, &partition, tol),
        Err(_) => NecessaryConditionsReport {
            lemma_vertex_rows: check_vertex_rows(op, tol),
            lemma_half_bound: Vec::new(),
            lemma_third_zero: Vec::new(),
            partition: None,
            overall: false,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    RefutedExact,
    RefutedSampled,
    Consistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplePhase {
    Probe,
    Uniform,
    NearVertex,
}

/// Direction of the sampled relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `Vx ≻ x`.
    Dissipative,
    /// `Vx ≺ x`.
    Bistochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledSummary {
    pub direction: Direction,
    /// Points evaluated, probes included.
    pub n_samples: usize,
    /// Most violated prefix-sum slack of the tested relation.
    pub min_slack: f64,
    pub witness: Option<SimplexPoint>,
    pub witness_slack: Option<f64>,
    pub witness_phase: Option<SamplePhase>,
    pub near_vertex_phase: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipativityReport {
    pub operator: String,
    /// Absent for the bistochastic direction, which has no exact conditions here.
    pub necessary: Option<NecessaryConditionsReport>,
    pub sampled: SampledSummary,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Samples per random phase.
    pub n: usize,
    pub cmp_tol: f64,
    pub coef_tol: f64,
    pub seed: u64,
    /// Largest `λ` in the near-vertex phase `x = (1 − λ) e_j + λ u`.
    pub near_vertex_scale: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            n: 10_000,
            cmp_tol: EPS_CMP,
            coef_tol: COEF_TOL,
            seed: crate::DEFAULT_SEED,
            near_vertex_scale: 0.1,
        }
    }
}

/// Vertices, edge midpoints, the barycenter, and for `m = 3` the point
/// `(0.5, 0.49, 0.01)`; in that order, the last one first.
pub fn probe_points(m: usize) -> Vec<SimplexPoint> {
    let mut out = Vec::new();
    if m == 3 {
        out.push(SimplexPoint::new(vec![0.5, 0.49, 0.01]).expect("valid probe"));
    }
    for k in 0..m {
        out.push(SimplexPoint::vertex(m, k).expect("valid vertex"));
    }
    for i in 0..m {
        for j in i + 1..m {
            let mut c = vec![0.0; m];
            c[i] = 0.5;
            c[j] = 0.5;
            out.push(SimplexPoint::new(c).expect("valid midpoint"));
        }
    }
    out.push(SimplexPoint::barycenter(m).expect("valid barycenter"));
    out
}

const CHUNK: usize = 1024;

#[derive(Debug, Clone)]
struct Partial {
    count: usize,
    min_slack: f64,
    witness: Option<(SimplexPoint, f64)>,
}

impl Partial {
    fn empty() -> Self {
        Self {
            count: 0,
            min_slack: f64::INFINITY,
            witness: None,
        }
    }

    fn record(&mut self, x: &SimplexPoint, slack: f64, tol: f64) {
        self.count += 1;
        self.min_slack = self.min_slack.min(slack);
        if self.witness.is_none() && slack < -tol {
            self.witness = Some((x.clone(), slack));
        }
    }

    /// `self` precedes `other` in the deterministic sample order.
    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.min_slack = self.min_slack.min(other.min_slack);
        if self.witness.is_none() {
            self.witness = other.witness;
        }
        self
    }
}

fn slack_of(op: &OperatorSpec, x: &SimplexPoint, dir: Direction, tol: f64) -> f64 {
    let mut y = vec![0.0; x.dim()];
    let mass = op.apply_raw(x.coords(), &mut y);
    y.iter_mut().for_each(|v| *v /= mass);
    let v = simplex::compare_slices(&y, x.coords(), tol);
    match dir {
        Direction::Dissipative => v.min_slack_forward,
        Direction::Bistochastic => v.min_slack_backward,
    }
}

fn run_phase(
    op: &OperatorSpec,
    opts: &SamplingOptions,
    dir: Direction,
    phase: SamplePhase,
) -> Partial {
    let m = op.dim();
    let n_chunks = opts.n.div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(((phase as u64) << 32) | c as u64);
            let mut part = Partial::empty();
            let count = CHUNK.min(opts.n - c * CHUNK);
            for _ in 0..count {
                let u = simplex::sample_uniform(m, &mut rng).expect("m >= 2");
                let x = match phase {
                    SamplePhase::NearVertex => {
                        let j = rng.random_range(0..m);
                        let lambda = rng.random_range(0.0..opts.near_vertex_scale);
                        let mut c: Vec<f64> = u.coords().iter().map(|v| lambda * v).collect();
                        c[j] += 1.0 - lambda;
                        SimplexPoint::new(c).expect("convex combination")
                    }
                    _ => u,
                };
                part.record(&x, slack_of(op, &x, dir, opts.cmp_tol), opts.cmp_tol);
            }
            part
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Partial::empty(), Partial::merge)
}

fn sample(op: &OperatorSpec, opts: &SamplingOptions, dir: Direction) -> SampledSummary {
    let mut probes = Partial::empty();
    for x in probe_points(op.dim()) {
        probes.record(&x, slack_of(op, &x, dir, opts.cmp_tol), opts.cmp_tol);
    }
    let phases = [
        (SamplePhase::Probe, probes),
        (
            SamplePhase::Uniform,
            run_phase(op, opts, dir, SamplePhase::Uniform),
        ),
        (
            SamplePhase::NearVertex,
            run_phase(op, opts, dir, SamplePhase::NearVertex),
        ),
    ];
    let mut summary = SampledSummary {
        direction: dir,
        n_samples: 0,
        min_slack: f64::INFINITY,
        witness: None,
        witness_slack: None,
        witness_phase: None,
        near_vertex_phase: true,
    };
    for (phase, part) in phases {
        summary.n_samples += part.count;
        summary.min_slack = summary.min_slack.min(part.min_slack);
        if summary.witness.is_none() {
            if let Some((w, s)) = part.witness {
                summary.witness = Some(w);
                summary.witness_slack = Some(s);
                summary.witness_phase = Some(phase);
            }
        }
    }
    summary
}

/// Necessary conditions plus sampled falsification of `Vx ≻ x`.
pub fn certify_sampled(op: &OperatorSpec, opts: &SamplingOptions) -> DissipativityReport {
    let necessary = necessary_conditions(op, opts.coef_tol);
    let sampled = sample(op, opts, Direction::Dissipative);
    let verdict = if !necessary.overall {
        Verdict::RefutedExact
    } else if sampled.witness.is_some() {
        Verdict::RefutedSampled
    } else {
        Verdict::Consistent
    };
    DissipativityReport {
        operator: op.name.clone(),
        necessary: Some(necessary),
        sampled,
        verdict,
    }
}

/// Sampled falsification of the dual relation `Vx ≺ x`.
pub fn check_bistochastic_sampled(op: &OperatorSpec, opts: &SamplingOptions) -> DissipativityReport {
    let sampled = sample(op, opts, Direction::Bistochastic);
    let verdict = if sampled.witness.is_some() {
        Verdict::RefutedSampled
    } else {
        Verdict::Consistent
    };
    DissipativityReport {
        operator: op.name.clone(),
        necessary: None,
        sampled,
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FormClass {
    /// One part is all of `I`; `k` is its index.
    Form6 {
        #[serde(serialize_with = "one_based")]
        k: usize,
    },
    /// `α_main = I ∖ {l}` and `α_single = {l}`.
    Form7 {
        #[serde(serialize_with = "one_based")]
        l: usize,
        #[serde(serialize_with = "one_based")]
        k_main: usize,
        #[serde(serialize_with = "one_based")]
        k_single: usize,
    },
    /// Form 7 with `k_single = l`: the singleton species feeds itself.
    Form8 {
        #[serde(serialize_with = "one_based")]
        l: usize,
        #[serde(serialize_with = "one_based")]
        k_main: usize,
    },
    Other,
}

pub fn classify_form(partition: &AlphaPartition) -> FormClass {
    let m = partition.parts.len();
    let nonempty: Vec<usize> = (0..m).filter(|&k| !partition.parts[k].is_empty()).collect();
    match nonempty.as_slice() {
        [k] => FormClass::Form6 { k: *k },
        [a, b] => {
            let (k_main, k_single) = if partition.parts[*b].len() == 1 && m >= 2 {
                if partition.parts[*a].len() == m - 1 {
                    (*a, *b)
                } else {
                    return FormClass::Other;
                }
            } else if partition.parts[*a].len() == 1 && partition.parts[*b].len() == m - 1 {
                (*b, *a)
            } else {
                return FormClass::Other;
            };
            let l = partition.parts[k_single][0];
            if l == k_single {
                FormClass::Form8 { l, k_main }
            } else {
                FormClass::Form7 {
                    l,
                    k_main,
                    k_single,
                }
            }
        }
        _ => FormClass::Other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gallery, Params};

    fn op(name: &str) -> OperatorSpec {
        gallery(name, &Params::new()).unwrap()
    }

    fn with(name: &str, k: &str, v: f64) -> OperatorSpec {
        let mut p = Params::new();
        p.insert(k.into(), v);
        gallery(name, &p).unwrap()
    }

    #[test]
    fn vertex_rows_examples() {
        assert!(check_vertex_rows(&op("example-3d"), COEF_TOL).iter().all(|c| c.pass));
        let c = check_vertex_rows(&op("counterexample-necessary"), COEF_TOL);
        assert!(c.iter().all(|c| c.pass));
        assert_eq!(c[2].row, vec![0.0, 0.0, 1.0]);
        assert!(check_vertex_rows(&op("uniform"), COEF_TOL).iter().all(|c| !c.pass));
    }

    #[test]
    fn partitions() {
        let p = extract_alpha_partition(&op("example-3d"), COEF_TOL).unwrap();
        assert_eq!(p.parts, vec![vec![0, 1, 2], vec![], vec![]]);
        let p = extract_alpha_partition(&op("v0"), COEF_TOL).unwrap();
        assert_eq!(p.parts, vec![vec![], vec![0, 1, 2], vec![]]);
        let p = extract_alpha_partition(&op("identity"), COEF_TOL).unwrap();
        assert_eq!(p.parts, vec![vec![0], vec![1], vec![2]]);
        assert!(matches!(
            extract_alpha_partition(&op("uniform"), COEF_TOL),
            Err(Error::NotAPartition { index: 0 })
        ));
    }

    #[test]
    fn half_bound_examples() {
        let r = necessary_conditions(&op("example-3d"), COEF_TOL);
        assert!(r.overall, "{r:?}");

        let r = necessary_conditions(&with("two-dim-family", "a", 0.5), COEF_TOL);
        assert!(!r.overall);
        assert!(r
            .lemma_half_bound
            .contains(&HalfBoundViolation { i: 1, j: 0, k0: 0, p: 0.25 }));
    }

    #[test]
    fn counterexample_fails_only_the_two_entry_condition() {
        let r = necessary_conditions(&op("counterexample-necessary"), COEF_TOL);
        assert!(r.lemma_vertex_rows.iter().all(|v| v.pass));
        assert!(r.lemma_half_bound.is_empty());
        assert_eq!(
            r.lemma_third_zero,
            vec![ThirdZeroViolation { i: 0, j: 1, value: 0.1 }]
        );
        assert!(!r.overall);
    }

    #[test]
    fn counterexample_probe_witness() {
        let opts = SamplingOptions {
            n: 1000,
            ..Default::default()
        };
        let r = certify_sampled(&op("counterexample-necessary"), &opts);
        assert_eq!(r.verdict, Verdict::RefutedExact);
        assert_eq!(r.sampled.witness_phase, Some(SamplePhase::Probe));
        assert_eq!(r.sampled.witness.as_ref().unwrap().coords(), &[0.5, 0.49, 0.01]);
        assert!((r.sampled.witness_slack.unwrap() + 0.049).abs() < 1e-9);
    }

    #[test]
    fn identity_is_consistent_with_zero_slack() {
        let opts = SamplingOptions {
            n: 2000,
            ..Default::default()
        };
        let r = certify_sampled(&op("identity"), &opts);
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.sampled.min_slack.abs() < 1e-15);
        let b = check_bistochastic_sampled(&op("identity"), &opts);
        assert_eq!(b.verdict, Verdict::Consistent);
    }

    #[test]
    fn bistochastic_direction() {
        let opts = SamplingOptions {
            n: 500,
            ..Default::default()
        };
        let r = check_bistochastic_sampled(&op("example-3d"), &opts);
        assert_eq!(r.verdict, Verdict::RefutedSampled);
        let r = check_bistochastic_sampled(&op("uniform"), &opts);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let opts = SamplingOptions {
            n: 5000,
            seed: 99,
            ..Default::default()
        };
        let a = certify_sampled(&op("form6-nondissipative"), &opts);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| certify_sampled(&op("form6-nondissipative"), &opts));
        assert_eq!(a, b);
    }

    #[test]
    fn form_classes() {
        let p = extract_alpha_partition(&op("example-3d"), COEF_TOL).unwrap();
        assert_eq!(classify_form(&p), FormClass::Form6 { k: 0 });
        let p = extract_alpha_partition(&op("form8-instance"), COEF_TOL).unwrap();
        assert_eq!(classify_form(&p), FormClass::Form8 { l: 1, k_main: 0 });
        let p = extract_alpha_partition(&op("identity"), COEF_TOL).unwrap();
        assert_eq!(classify_form(&p), FormClass::Other);
        let p = AlphaPartition {
            parts: vec![vec![0, 2], vec![], vec![1]],
        };
        assert_eq!(
            classify_form(&p),
            FormClass::Form7 { l: 1, k_main: 0, k_single: 2 }
        );
    }

    #[test]
    fn cubic_leading_bound() {
        let r = necessary_conditions(&op("cubic-example"), COEF_TOL);
        assert!(r.overall, "{r:?}");
        assert_eq!(leading_bound(3), 2.0 / 3.0);
    }
}
