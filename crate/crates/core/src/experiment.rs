//! End-to-end certification runs.
//!
//! A certificate for the claim "this particle sequence is a-p" measures
//! one fresh block of particles per direction α, after the block's signs `u`
//! have been committed, and compares ⟨u, x(α)⟩ with a·α at `sigma_k`
//! standard errors.
//!
//! [`no_apbp_experiment`] builds the a-p and b-p claim out of a local hidden
//! variable model (measured values `u` and counterfactual values `v` on the
//! same wing), measures the witness direction, and shows which empirical
//! correlation breaks: the Malus targets exceed the Boole–Bell bound while the
//! actual ±1 sequences cannot.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{paper_witness, Assignment, CaseLabel, UnitVector3};
use crate::quantum::{sample_prepared, PreparedSource, SingletSource};
use crate::realism::{commit, counterfactual_values, sample_lhv, LhvModel, Side};
use crate::rng::RngStream;
use crate::sign::{boole_bell_lhs, correlation, CorrelationEstimate, SignSequence};

pub const DEFAULT_SIGMA_K: f64 = 4.0;
pub const MIN_SAMPLES: usize = 100;
pub const MIN_SIGMA_K: f64 = 2.0;

/// Rows with zero standard error must match their target to this precision.
pub const EXACT_MATCH_TOL: f64 = 1e-12;

/// Exhaustive feasibility search bound.
pub const MAX_FEASIBILITY_LEN: usize = 5;

// Stream-id namespaces; the low 32 bits carry the block index.
const STREAM_MEASURE: u64 = 1 << 32;
const STREAM_SOURCE: u64 = 2 << 32;
const STREAM_HIDDEN: u64 = 3 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Plain quantum statistics, no realism assumption.
    #[default]
    Boole,
    /// QM + weak realism + locality.
    #[serde(rename = "hypothesis-1")]
    Hypothesis1,
    /// QM + weak realism + EACP; computationally identical to `Hypothesis1`.
    #[serde(rename = "hypothesis-2")]
    Hypothesis2,
}

fn default_sigma_k() -> f64 {
    DEFAULT_SIGMA_K
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Particles per direction block.
    pub n: usize,
    #[serde(default = "default_sigma_k")]
    pub sigma_k: f64,
    pub directions: Vec<UnitVector3>,
    #[serde(default)]
    pub scenario: Scenario,
}

impl ExperimentConfig {
    pub fn new(seed: u64, n: usize, directions: Vec<UnitVector3>) -> Self {
        Self { seed, n, sigma_k: DEFAULT_SIGMA_K, directions, scenario: Scenario::Boole }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!("n = {} is below {MIN_SAMPLES}", self.n)));
        }
        if self.sigma_k.is_nan() || self.sigma_k < MIN_SIGMA_K {
            return Err(Error::InvalidConfig(format!("sigma_k = {} is below {MIN_SIGMA_K}", self.sigma_k)));
        }
        if self.directions.is_empty() {
            return Err(Error::InvalidConfig("no measurement directions".into()));
        }
        if self.directions.len() >= 1 << 32 {
            return Err(Error::InvalidConfig("too many directions".into()));
        }
        Ok(())
    }

    pub fn total_particles(&self) -> usize {
        self.n * self.directions.len()
    }

    fn block(&self, k: usize) -> Range<usize> {
        k * self.n..(k + 1) * self.n
    }
}

/// `count` directions evenly spaced over the full circle of the plane
/// spanned by `e1` and `e2` (orthogonalized), starting at `e1`.
pub fn plane_directions(e1: &UnitVector3, e2: &UnitVector3, count: usize) -> Result<Vec<UnitVector3>> {
    let e2 = e2.orthogonalized_against(e1)?;
    (0..count)
        .map(|k| UnitVector3::in_plane(e1, &e2, std::f64::consts::TAU * k as f64 / count as f64))
        .collect()
}

/// Something whose particles can be measured block by block.
pub trait ParticleSource: Sync {
    /// Measures particles `range` along `alpha`. `committed` holds the signs
    /// attached to those particles before `alpha` was chosen.
    fn measure_block(
        &self,
        range: Range<usize>,
        committed: &SignSequence,
        alpha: &UnitVector3,
        rng: &mut RngStream,
    ) -> Result<SignSequence>;
}

/// Particles prepared along `axis` with per-particle signs.
impl ParticleSource for PreparedSource {
    fn measure_block(
        &self,
        range: Range<usize>,
        _committed: &SignSequence,
        alpha: &UnitVector3,
        rng: &mut RngStream,
    ) -> Result<SignSequence> {
        let block = PreparedSource::new(self.axis, self.u.slice(range)?);
        sample_prepared(&block, alpha, rng)
    }
}

/// Alice's particles of an LHV run, answered from retained λ.
pub struct LhvWing<'a> {
    pub model: &'a LhvModel,
    pub lambdas: &'a [UnitVector3],
    pub side: Side,
}

impl ParticleSource for LhvWing<'_> {
    fn measure_block(
        &self,
        range: Range<usize>,
        _committed: &SignSequence,
        alpha: &UnitVector3,
        _rng: &mut RngStream,
    ) -> Result<SignSequence> {
        let lambdas = self.lambdas.get(range).ok_or(Error::MissingHiddenState)?;
        counterfactual_values(self.model, lambdas, alpha, self.side)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApRow {
    pub alpha: UnitVector3,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    /// |estimate − target|
    pub gap: f64,
    pub pass: bool,
}

impl ApRow {
    pub fn new(alpha: UnitVector3, target: f64, est: CorrelationEstimate, sigma_k: f64) -> Self {
        let gap = (est.value - target).abs();
        let pass = if est.stderr == 0.0 { gap <= EXACT_MATCH_TOL } else { gap <= sigma_k * est.stderr };
        Self { alpha, target, estimate: est.value, stderr: est.stderr, n: est.n, gap, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApCertificate {
    pub axis_claimed: UnitVector3,
    pub sigma_k: f64,
    pub rows: Vec<ApRow>,
    pub pass: bool,
}

impl ApCertificate {
    fn from_rows(axis_claimed: UnitVector3, sigma_k: f64, rows: Vec<ApRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        Self { axis_claimed, sigma_k, rows, pass }
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &ApRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Largest gap among failing rows.
    pub fn worst_failure(&self) -> Option<&ApRow> {
        self.failing_rows().max_by(|a, b| a.gap.total_cmp(&b.gap))
    }
}

fn block_stream(seed: u64, namespace: u64, block: usize) -> RngStream {
    RngStream::new(seed, namespace | block as u64)
}

/// Measures block `k` under the commitment protocol and returns (u_k, x_k).
fn measure_committed_block(
    source: &dyn ParticleSource,
    u: &SignSequence,
    cfg: &ExperimentConfig,
    k: usize,
) -> Result<(SignSequence, SignSequence)> {
    let range = cfg.block(k);
    let u_k = u.slice(range.clone())?;
    let token = commit(u_k).choose_direction(cfg.directions[k])?;
    let mut rng = block_stream(cfg.seed, STREAM_MEASURE, k);
    let (token, x) = token.measure(|committed, alpha| source.measure_block(range, committed, alpha, &mut rng))?;
    let u_k = token.committed_signs().cloned().expect("measured token keeps u");
    Ok((u_k, x))
}

/// Certifies the claim that `source` is `a`-p with committed signs `u`.
/// `u` covers one block of `cfg.n` particles per direction, in order.
pub fn certify_ap<S: ParticleSource>(
    source: &S,
    u: &SignSequence,
    a: &UnitVector3,
    cfg: &ExperimentConfig,
) -> Result<ApCertificate> {
    cfg.validate()?;
    if u.len() != cfg.total_particles() {
        return Err(Error::LengthMismatch { left: cfg.total_particles(), right: u.len() });
    }
    let rows = (0..cfg.directions.len())
        .into_par_iter()
        .map(|k| {
            let (u_k, x) = measure_committed_block(source, u, cfg, k)?;
            let alpha = cfg.directions[k];
            Ok(ApRow::new(alpha, a.dot(&alpha), correlation(&u_k, &x)?, cfg.sigma_k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ApCertificate::from_rows(*a, cfg.sigma_k, rows))
}

/// Singlet pairs with Bob fixed along `beta`; Bob's outcomes are committed as
/// `u` and Alice's particle sequence is certified as (−β)-p.
pub fn singlet_ap_experiment(beta: &UnitVector3, cfg: &ExperimentConfig) -> Result<ApCertificate> {
    cfg.validate()?;
    let mut pairs = SingletSource::new(RngStream::new(cfg.seed, STREAM_SOURCE));
    let (u, alice) = pairs.measure_bob(beta, cfg.total_particles())?;
    certify_ap(&alice, &u, &beta.neg(), cfg)
}

/// A correlation measured on the witness block next to its Malus target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationGap {
    pub pair: &'static str,
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub gap: f64,
}

impl CorrelationGap {
    fn new(pair: &'static str, target: f64, est: CorrelationEstimate) -> Self {
        Self { pair, target, estimate: est.value, stderr: est.stderr, gap: (est.value - target).abs() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub alpha: UnitVector3,
    pub case_label: CaseLabel,
    pub assignment: Assignment,
    /// Boole–Bell left-hand side implied by the Malus targets.
    pub target_lhs: f64,
    /// Same placement evaluated on the actual ±1 sequences.
    pub empirical_lhs: f64,
    /// ⟨u,x⟩, ⟨v,x⟩, ⟨u,v⟩ on the witness block.
    pub gaps: [CorrelationGap; 3],
    pub gap_sum: f64,
    /// (target_lhs − 1)/3: some gap must reach this.
    pub margin_bound: f64,
    pub verdict: bool,
}

impl InequalityReport {
    pub fn max_gap(&self) -> &CorrelationGap {
        self.gaps.iter().max_by(|a, b| a.gap.total_cmp(&b.gap)).expect("three gaps")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoApBpOutcome {
    pub model: &'static str,
    pub scenario: Scenario,
    /// Claim that Alice's sequence is a-p with u = measured values of Bob's wing.
    pub certificate_u: ApCertificate,
    /// Claim that it is b-p with v = counterfactual values of Bob's wing.
    pub certificate_v: ApCertificate,
    /// ⟨u,v⟩ against a·b per block.
    pub uv_rows: Vec<ApRow>,
    pub report: InequalityReport,
    /// Target above 1, empirical at most 1, and at least one certificate failing.
    pub contradiction: bool,
}

/// Bob's particle is measured along −a (giving u) and assigned the
/// counterfactual value along −b (giving v); the claim is that Alice's
/// particles are then both a-p and b-p. The witness direction is appended as
/// the last block.
pub fn no_apbp_experiment(
    a: &UnitVector3,
    b: &UnitVector3,
    model: &LhvModel,
    cfg: &ExperimentConfig,
) -> Result<NoApBpOutcome> {
    cfg.validate()?;
    let witness = paper_witness(a, b)?;
    let mut cfg = cfg.clone();
    cfg.directions.push(witness.alpha);
    let blocks = cfg.directions.len();

    // λ must not depend on the settings: pin the circle to the plane of a and b.
    let normal = UnitVector3::from_array(a.cross(b))?;
    let model = model.with_fixed_circle(normal);
    let (minus_a, minus_b) = (a.neg(), b.neg());

    let per_block = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let alpha = cfg.directions[k];
            let mut rng = block_stream(cfg.seed, STREAM_HIDDEN, k);
            // Alice's direction is not yet chosen; the fixed circle makes λ independent of it.
            let run = sample_lhv(&model, a, &minus_a, cfg.n, &mut rng)?;
            let u_k = run.b().clone();
            let v_k = counterfactual_values(&model, run.lambdas(), &minus_b, Side::B)?;
            let wing = LhvWing { model: &model, lambdas: run.lambdas(), side: Side::A };
            let token = commit(u_k).choose_direction(alpha)?;
            let mut measure_rng = block_stream(cfg.seed, STREAM_MEASURE, k);
            let (token, x) = token.measure(|u, al| wing.measure_block(0..cfg.n, u, al, &mut measure_rng))?;
            let u_k = token.committed_signs().cloned().expect("measured token keeps u");
            Ok((u_k, v_k, x))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows_u = Vec::with_capacity(blocks);
    let mut rows_v = Vec::with_capacity(blocks);
    let mut uv_rows = Vec::with_capacity(blocks);
    for (k, (u, v, x)) in per_block.iter().enumerate() {
        let alpha = cfg.directions[k];
        rows_u.push(ApRow::new(alpha, a.dot(&alpha), correlation(u, x)?, cfg.sigma_k));
        rows_v.push(ApRow::new(alpha, b.dot(&alpha), correlation(v, x)?, cfg.sigma_k));
        uv_rows.push(ApRow::new(alpha, a.dot(b), correlation(u, v)?, cfg.sigma_k));
    }
    let certificate_u = ApCertificate::from_rows(*a, cfg.sigma_k, rows_u);
    let certificate_v = ApCertificate::from_rows(*b, cfg.sigma_k, rows_v);

    let (u, v, x) = per_block.last().expect("witness block");
    let alpha = witness.alpha;
    let gaps = [
        CorrelationGap::new("u,x", a.dot(&alpha), correlation(u, x)?),
        CorrelationGap::new("v,x", b.dot(&alpha), correlation(v, x)?),
        CorrelationGap::new("u,v", a.dot(b), correlation(u, v)?),
    ];
    let empirical_lhs = match witness.assignment {
        Assignment::PivotX => boole_bell_lhs(x, u, v)?,
        Assignment::PivotU => boole_bell_lhs(u, x, v)?,
        Assignment::PivotV => boole_bell_lhs(v, u, x)?,
    };
    let gap_sum = gaps.iter().map(|g| g.gap).sum();
    let report = InequalityReport {
        alpha,
        case_label: witness.case_label,
        assignment: witness.assignment,
        target_lhs: witness.lhs_value,
        empirical_lhs,
        gaps,
        gap_sum,
        margin_bound: (witness.lhs_value - 1.0) / 3.0,
        verdict: witness.lhs_value > 1.0 && empirical_lhs <= 1.0,
    };
    let contradiction = report.verdict && !(certificate_u.pass && certificate_v.pass);
    Ok(NoApBpOutcome {
        model: model.name(),
        scenario: cfg.scenario,
        certificate_u,
        certificate_v,
        uv_rows,
        report,
        contradiction,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Infeasible,
    Feasible { u: SignSequence, v: SignSequence, x: SignSequence },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Exhaustive search for sequences u, v, x of length `n` whose correlations
/// are all within `epsilon` of a·α, b·α and a·b.
pub fn feasibility_bruteforce(
    a: &UnitVector3,
    b: &UnitVector3,
    alpha: &UnitVector3,
    n: usize,
    epsilon: f64,
) -> Result<Feasibility> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > MAX_FEASIBILITY_LEN {
        return Err(Error::LengthTooLarge { len: n, max: MAX_FEASIBILITY_LEN });
    }
    let (t_ux, t_vx, t_uv) = (a.dot(alpha), b.dot(alpha), a.dot(b));
    let mask = (1u32 << n) - 1;
    let corr = |p: u32, q: u32| (n as f64 - 2.0 * ((p ^ q) & mask).count_ones() as f64) / n as f64;
    let within = |c: f64, t: f64| (c - t).abs() <= epsilon;
    let unpack = |bits: u32| SignSequence::from_fn(n, |i| bits >> i & 1 == 1);
    for u in 0..=mask {
        for v in 0..=mask {
            if !within(corr(u, v), t_uv) {
                continue;
            }
            for x in 0..=mask {
                if within(corr(u, x), t_ux) && within(corr(v, x), t_vx) {
                    return Ok(Feasibility::Feasible { u: unpack(u)?, v: unpack(v)?, x: unpack(x)? });
                }
            }
        }
    }
    Ok(Feasibility::Infeasible)
}
