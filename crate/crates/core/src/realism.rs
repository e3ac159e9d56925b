//! Local hidden-variable models and the commitment-order protocol.
//!
//! An [`LhvModel`] draws a shared hidden variable λ for each pair and answers
//! every measurement, performed or not, with a deterministic sign. The
//! retained λ values are what make counterfactual ("weak realism") values
//! available after the fact. Runs are immutable once produced.
//!
//! [`CommitmentToken`] enforces that the sign sequence `u` attached to a batch
//! of particles is fixed before any measurement direction is chosen for it.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;
use crate::rng::RngStream;
use crate::sign::SignSequence;

/// Distribution of λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HiddenVariableLaw {
    /// Uniform on S².
    UniformSphere,
    /// Uniform on a great circle. With `normal: None` the circle is the one
    /// spanned by the two measured directions of each run.
    UniformCircle { normal: Option<UnitVector3> },
}

/// Deterministic response to a measurement along `d` given λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseRule {
    /// sign(d·λ), with sign(0) = +1.
    Sign,
    /// −sign(d·λ).
    NegatedSign,
}

impl ResponseRule {
    pub fn respond(self, lambda: &UnitVector3, direction: &UnitVector3) -> bool {
        let plus = lambda.dot(direction) >= 0.0;
        match self {
            ResponseRule::Sign => plus,
            ResponseRule::NegatedSign => !plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Built-in model names accepted by [`LhvModel::from_str`].
pub const MODEL_NAMES: [&str; 2] = ["sign-circle", "sign-sphere"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LhvModel {
    pub law: HiddenVariableLaw,
    pub response_a: ResponseRule,
    pub response_b: ResponseRule,
}

impl LhvModel {
    /// A = sign(α·λ), B = −sign(β·λ), λ uniform on the great circle of the
    /// measured directions.
    pub fn sign_circle() -> Self {
        Self {
            law: HiddenVariableLaw::UniformCircle { normal: None },
            response_a: ResponseRule::Sign,
            response_b: ResponseRule::NegatedSign,
        }
    }

    pub fn sign_sphere() -> Self {
        Self { law: HiddenVariableLaw::UniformSphere, ..Self::sign_circle() }
    }

    /// Same responses with λ restricted to the great circle orthogonal to `normal`.
    pub fn with_fixed_circle(self, normal: UnitVector3) -> Self {
        match self.law {
            HiddenVariableLaw::UniformCircle { .. } => {
                Self { law: HiddenVariableLaw::UniformCircle { normal: Some(normal) }, ..self }
            }
            HiddenVariableLaw::UniformSphere => self,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.law {
            HiddenVariableLaw::UniformSphere => "sign-sphere",
            HiddenVariableLaw::UniformCircle { .. } => "sign-circle",
        }
    }

    fn rule(&self, side: Side) -> ResponseRule {
        match side {
            Side::A => self.response_a,
            Side::B => self.response_b,
        }
    }

    /// Responses of one wing for every retained λ.
    pub fn respond_all(&self, lambdas: &[UnitVector3], direction: &UnitVector3, side: Side) -> Result<SignSequence> {
        let rule = self.rule(side);
        SignSequence::from_fn(lambdas.len(), |i| rule.respond(&lambdas[i], direction))
    }

    fn draw_lambdas(&self, alpha: &UnitVector3, beta: &UnitVector3, n: usize, rng: &mut RngStream) -> Vec<UnitVector3> {
        match self.law {
            HiddenVariableLaw::UniformSphere => (0..n)
                .map(|_| UnitVector3::from_array(rng.unit_sphere()).expect("sphere point"))
                .collect(),
            HiddenVariableLaw::UniformCircle { normal } => {
                let (e1, e2) = circle_basis(normal, alpha, beta);
                (0..n)
                    .map(|_| UnitVector3::in_plane(&e1, &e2, TAU * rng.next_f64()).expect("orthonormal basis"))
                    .collect()
            }
        }
    }
}

fn circle_basis(normal: Option<UnitVector3>, alpha: &UnitVector3, beta: &UnitVector3) -> (UnitVector3, UnitVector3) {
    match normal {
        Some(n) => {
            let e1 = n.any_orthogonal();
            let e2 = UnitVector3::from_array(n.cross(&e1)).expect("orthogonal unit vectors");
            (e1, e2)
        }
        None => {
            let e2 = beta.orthogonalized_against(alpha).unwrap_or_else(|_| alpha.any_orthogonal());
            (*alpha, e2)
        }
    }
}

impl FromStr for LhvModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign-circle" => Ok(Self::sign_circle()),
            "sign-sphere" => Ok(Self::sign_sphere()),
            other => Err(Error::InvalidConfig(format!(
                "unknown model {other:?}; expected one of {}",
                MODEL_NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for LhvModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one LHV run. Fields are read-only once produced.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvRun {
    alpha: UnitVector3,
    beta: UnitVector3,
    a: SignSequence,
    b: SignSequence,
    lambdas: Vec<UnitVector3>,
}

impl LhvRun {
    pub fn alpha(&self) -> &UnitVector3 {
        &self.alpha
    }

    pub fn beta(&self) -> &UnitVector3 {
        &self.beta
    }

    pub fn a(&self) -> &SignSequence {
        &self.a
    }

    pub fn b(&self) -> &SignSequence {
        &self.b
    }

    pub fn lambdas(&self) -> &[UnitVector3] {
        &self.lambdas
    }

    /// CSV audit dump of λ, one row per pair.
    pub fn lambdas_csv(&self) -> String {
        let mut out = String::from("index,lambda_x,lambda_y,lambda_z\n");
        for (i, l) in self.lambdas.iter().enumerate() {
            out.push_str(&format!("{i},{},{},{}\n", l.x(), l.y(), l.z()));
        }
        out
    }
}

/// Draws λ for `n` pairs and records A = response_A(λ, α), B = response_B(λ, β).
pub fn sample_lhv(
    model: &LhvModel,
    alpha: &UnitVector3,
    beta: &UnitVector3,
    n: usize,
    rng: &mut RngStream,
) -> Result<LhvRun> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let lambdas = model.draw_lambdas(alpha, beta, n, rng);
    let a = model.respond_all(&lambdas, alpha, Side::A)?;
    let b = model.respond_all(&lambdas, beta, Side::B)?;
    Ok(LhvRun { alpha: *alpha, beta: *beta, a, b, lambdas })
}

/// Values the model assigns to a measurement that was not performed, on the
/// given wing and for the retained λ.
pub fn counterfactual_values(
    model: &LhvModel,
    lambdas: &[UnitVector3],
    direction: &UnitVector3,
    side: Side,
) -> Result<SignSequence> {
    if lambdas.is_empty() {
        return Err(Error::MissingHiddenState);
    }
    model.respond_all(lambdas, direction, side)
}

/// Commitment-order state of one batch of particles.
#[derive(Debug, Clone, PartialEq)]
pub enum CommitmentToken {
    /// No sign sequence attached yet.
    Open,
    Committed { u: SignSequence },
    DirectionChosen { u: SignSequence, alpha: UnitVector3 },
    Measured { u: SignSequence, alpha: UnitVector3 },
}

impl CommitmentToken {
    pub fn open() -> Self {
        CommitmentToken::Open
    }

    pub fn state_name(&self) -> &'static str {
        match self {
            CommitmentToken::Open => "open",
            CommitmentToken::Committed { .. } => "committed",
            CommitmentToken::DirectionChosen { .. } => "direction-chosen",
            CommitmentToken::Measured { .. } => "measured",
        }
    }

    pub fn commit(self, u: SignSequence) -> Result<Self> {
        match self {
            CommitmentToken::Open => Ok(CommitmentToken::Committed { u }),
            _ => Err(Error::OrderingViolation("sign sequence already committed")),
        }
    }

    pub fn choose_direction(self, alpha: UnitVector3) -> Result<Self> {
        match self {
            CommitmentToken::Committed { u } => Ok(CommitmentToken::DirectionChosen { u, alpha }),
            CommitmentToken::Open => Err(Error::OrderingViolation("direction chosen before u was committed")),
            _ => Err(Error::OrderingViolation("direction already chosen for this batch")),
        }
    }

    /// Runs `sampler(u, α)` once. The returned token is spent; measuring it
    /// again is an ordering violation.
    pub fn measure<F>(self, sampler: F) -> Result<(Self, SignSequence)>
    where
        F: FnOnce(&SignSequence, &UnitVector3) -> Result<SignSequence>,
    {
        match self {
            CommitmentToken::DirectionChosen { u, alpha } => {
                let x = sampler(&u, &alpha)?;
                if x.len() != u.len() {
                    return Err(Error::LengthMismatch { left: u.len(), right: x.len() });
                }
                Ok((CommitmentToken::Measured { u, alpha }, x))
            }
            CommitmentToken::Measured { .. } => Err(Error::OrderingViolation("batch already measured")),
            _ => Err(Error::OrderingViolation("measurement before a direction was chosen")),
        }
    }

    pub fn committed_signs(&self) -> Option<&SignSequence> {
        match self {
            CommitmentToken::Open => None,
            CommitmentToken::Committed { u }
            | CommitmentToken::DirectionChosen { u, .. }
            | CommitmentToken::Measured { u, .. } => Some(u),
        }
    }
}

pub fn commit(u: SignSequence) -> CommitmentToken {
    CommitmentToken::Committed { u }
}

pub fn choose_direction(token: CommitmentToken, alpha: UnitVector3) -> Result<CommitmentToken> {
    token.choose_direction(alpha)
}

pub fn measure<F>(token: CommitmentToken, sampler: F) -> Result<(CommitmentToken, SignSequence)>
where
    F: FnOnce(&SignSequence, &UnitVector3) -> Result<SignSequence>,
{
    token.measure(sampler)
}
