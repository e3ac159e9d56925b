//! Samplers reproducing spin-½ measurement statistics.
//!
//! Only the induced outcome laws are modelled: the Malus law for particles
//! prepared along an axis with sign sequence `u`, and the singlet joint law
//! `P(A = s, B = t) = (1 − s·t·α·β)/4`.

use crate::error::{Error, Result};
use crate::geometry::UnitVector3;
use crate::rng::RngStream;
use crate::sign::SignSequence;

/// Tolerance on |cos| beyond 1 before it is rejected rather than clamped.
pub const COSINE_TOL: f64 = 1e-9;

fn clamp_cosine(c: f64) -> Result<f64> {
    if !c.is_finite() || c.abs() > 1.0 + COSINE_TOL {
        return Err(Error::InvalidProbability(c));
    }
    Ok(c.clamp(-1.0, 1.0))
}

/// Particles prepared along the axis of `axis`, the i-th one along `uᵢ·axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSource {
    pub axis: UnitVector3,
    pub u: SignSequence,
}

impl PreparedSource {
    pub fn new(axis: UnitVector3, u: SignSequence) -> Self {
        Self { axis, u }
    }

    /// Usual preparation along a vector: uᵢ ≡ +1.
    pub fn along_vector(axis: UnitVector3, n: usize) -> Result<Self> {
        Ok(Self { axis, u: SignSequence::constant(n, 1)? })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Measures every particle of `src` along `alpha`: xᵢ = +1 with probability
/// (1 + uᵢ·(a·α))/2, one uniform draw per particle.
pub fn sample_prepared(src: &PreparedSource, alpha: &UnitVector3, rng: &mut RngStream) -> Result<SignSequence> {
    let c = clamp_cosine(src.axis.dot(alpha))?;
    let p_plus = (1.0 + c) / 2.0;
    let p_minus = (1.0 - c) / 2.0;
    SignSequence::from_fn(src.u.len(), |i| {
        let p = if src.u.get(i) == 1 { p_plus } else { p_minus };
        rng.bernoulli(p)
    })
}

/// Source of singlet pairs.
#[derive(Debug, Clone)]
pub struct SingletSource {
    rng: RngStream,
}

impl SingletSource {
    pub fn new(rng: RngStream) -> Self {
        Self { rng }
    }

    pub fn rng(&self) -> &RngStream {
        &self.rng
    }

    pub fn sample(&mut self, alpha: &UnitVector3, beta: &UnitVector3, n: usize) -> Result<(SignSequence, SignSequence)> {
        sample_singlet(alpha, beta, n, &mut self.rng)
    }

    /// Bob measures `n` fresh pairs along `beta`. Returns his outcomes and
    /// the resulting state of Alice's particles: prepared along the axis of
    /// `−beta` with the signs Bob obtained.
    pub fn measure_bob(&mut self, beta: &UnitVector3, n: usize) -> Result<(SignSequence, PreparedSource)> {
        let b = SignSequence::from_fn(n, |_| self.rng.bernoulli(0.5))?;
        let alice = PreparedSource::new(beta.neg(), b.clone());
        Ok((b, alice))
    }
}

/// `n` singlet pairs measured along `alpha` (A) and `beta` (B). A is drawn
/// from its unbiased marginal, then B conditionally: B = −A with probability
/// (1 + α·β)/2.
pub fn sample_singlet(
    alpha: &UnitVector3,
    beta: &UnitVector3,
    n: usize,
    rng: &mut RngStream,
) -> Result<(SignSequence, SignSequence)> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let c = clamp_cosine(alpha.dot(beta))?;
    let p_flip = (1.0 + c) / 2.0;
    let mut a_bits = Vec::with_capacity(n);
    let mut b_bits = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.bernoulli(0.5);
        let anti = rng.bernoulli(p_flip);
        a_bits.push(a);
        b_bits.push(if anti { !a } else { a });
    }
    Ok((SignSequence::from_bools(&a_bits)?, SignSequence::from_bools(&b_bits)?))
}
