//! Finite ±1 sequences and exact Boole–Bell arithmetic.
//!
//! A [`SignSequence`] packs one sign per bit (set bit ⇔ +1), 64 signs per
//! word, with the unused high bits of the last word kept at zero. Every
//! correlation is computed as an integer sum `n − 2·popcount(f ⊕ g)` and only
//! converted to `f64` once, so results carry no accumulation error.

use std::fmt;
use std::ops::{Neg, Range};
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

/// Upper bound on `n` accepted by [`brute_force_max_lhs`].
pub const MAX_BRUTE_FORCE_LEN: usize = 12;

/// A finite, non-empty sequence over {−1, +1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SignSequence {
    len: usize,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl SignSequence {
    /// Builds a sequence whose i-th sign is +1 exactly when `plus(i)` holds.
    pub fn from_fn(len: usize, mut plus: impl FnMut(usize) -> bool) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        let mut words = vec![0u64; word_count(len)];
        for i in 0..len {
            if plus(i) {
                words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(Self { len, words })
    }

    /// Builds a sequence from signed integers; every entry must be −1 or +1.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        if let Some((position, &s)) = signs.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::NotASign { position, value: s });
        }
        Self::from_fn(signs.len(), |i| signs[i] == 1)
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// The constant sequence of length `len` equal to `sign`'s sign (+1 for `sign >= 0`).
    pub fn constant(len: usize, sign: i8) -> Result<Self> {
        Self::from_fn(len, |_| sign >= 0)
    }

    /// Reassembles a sequence from packed words. Padding bits beyond `len`
    /// are cleared so the result is canonical.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        if words.len() != word_count(len) {
            return Err(Error::MalformedBinary(format!(
                "expected {} words for {} signs, got {}",
                word_count(len),
                len,
                words.len()
            )));
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        Ok(Self { len, words })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The sign at `index`, exactly −1 or +1.
    ///
    /// Panics if `index >= len`.
    pub fn get(&self, index: usize) -> i8 {
        assert!(index < self.len, "index {index} out of bounds for length {}", self.len);
        if self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Number of +1 entries.
    pub fn count_plus(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Σᵢ sᵢ as an exact integer.
    pub fn sum(&self) -> i64 {
        2 * self.count_plus() as i64 - self.len as i64
    }

    /// Number of indices where the two sequences disagree.
    pub fn hamming_distance(&self, other: &Self) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Σᵢ fᵢgᵢ as an exact integer, `n − 2·hamming_distance`.
    pub fn product_sum(&self, other: &Self) -> Result<i64> {
        let d = self.hamming_distance(other)?;
        Ok(self.len as i64 - 2 * d as i64)
    }

    /// Pointwise product fᵢgᵢ.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let words = self.words.iter().zip(&other.words).map(|(a, b)| !(a ^ b)).collect();
        Self::from_words(self.len, words)
    }

    /// Contiguous sub-sequence over `range`.
    pub fn slice(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.len || range.start > range.end {
            return Err(Error::LengthMismatch { left: self.len, right: range.end });
        }
        let start = range.start;
        Self::from_fn(range.len(), |i| self.get(start + i) == 1)
    }

    /// Concatenation of several sequences in order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a SignSequence>) -> Result<Self> {
        let parts: Vec<&SignSequence> = parts.into_iter().collect();
        let signs: Vec<bool> = parts.iter().flat_map(|p| p.iter().map(|s| s == 1)).collect();
        Self::from_bools(&signs)
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len, right: other.len });
        }
        Ok(())
    }

    /// Text form: one `+` or `-` per element.
    pub fn to_text(&self) -> String {
        self.iter().map(|s| if s == 1 { '+' } else { '-' }).collect()
    }

    /// Parses the text form. Accepts ASCII `-` and the Unicode minus `−`.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(text.len());
        for (position, c) in text.chars().enumerate() {
            match c {
                '+' => bits.push(true),
                '-' | '\u{2212}' => bits.push(false),
                found => return Err(Error::InvalidSign { position, found }),
            }
        }
        Self::from_bools(&bits)
    }

    /// Binary form: little-endian `u64` length followed by the packed
    /// little-endian words.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * (1 + self.words.len()));
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 {
            return Err(Error::MalformedBinary("missing length prefix".into()));
        }
        let len = u64::from_le_bytes(bytes[..8].try_into().expect("8-byte prefix")) as usize;
        let body = &bytes[8..];
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        if body.len() != 8 * word_count(len) {
            return Err(Error::MalformedBinary(format!(
                "expected {} payload bytes for {} signs, got {}",
                8 * word_count(len),
                len,
                body.len()
            )));
        }
        let words: Vec<u64> = body
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        if words.last().is_some_and(|w| w & !tail_mask(len) != 0) {
            return Err(Error::MalformedBinary("non-zero padding bits".into()));
        }
        Self::from_words(len, words)
    }
}

impl Neg for &SignSequence {
    type Output = SignSequence;

    fn neg(self) -> SignSequence {
        let words = self.words.iter().map(|w| !w).collect();
        SignSequence::from_words(self.len, words).expect("length preserved")
    }
}

impl Neg for SignSequence {
    type Output = SignSequence;

    fn neg(self) -> SignSequence {
        -&self
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl fmt::Debug for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "SignSequence({})", self.to_text())
        } else {
            write!(f, "SignSequence(len={}, plus={})", self.len, self.count_plus())
        }
    }
}

impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_text(s)
    }
}

/// Empirical correlation ⟨f, g⟩ with its sample count and standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub n: usize,
    pub stderr: f64,
    /// Σᵢ fᵢgᵢ; `value == sum / n`.
    pub sum: i64,
}

impl CorrelationEstimate {
    /// Estimate from an integer product sum, with the i.i.d. standard error
    /// `sqrt((1 − value²)/n)`.
    pub fn from_sum(sum: i64, n: usize) -> Self {
        let value = sum as f64 / n as f64;
        let stderr = ((1.0 - value * value).max(0.0) / n as f64).sqrt();
        Self { value, n, stderr, sum }
    }

    /// Deterministic exact value; standard error zero.
    pub fn exact(sum: i64, n: usize) -> Self {
        Self { value: sum as f64 / n as f64, n, stderr: 0.0, sum }
    }
}

/// ⟨f, g⟩ = (1/n)·Σᵢ fᵢgᵢ, carrying the i.i.d. standard error.
pub fn correlation(f: &SignSequence, g: &SignSequence) -> Result<CorrelationEstimate> {
    let sum = f.product_sum(g)?;
    Ok(CorrelationEstimate::from_sum(sum, f.len()))
}

/// Fraction of indices with fᵢ = gᵢ, equal to (1 + ⟨f, g⟩)/2.
pub fn coincidence_probability(f: &SignSequence, g: &SignSequence) -> Result<f64> {
    let d = f.hamming_distance(g)?;
    Ok((f.len() - d) as f64 / f.len() as f64)
}

/// Exact numerator of the Boole–Bell left-hand side: returns
/// `(|S_fg − S_fh| + S_gh, n)` where `S` are integer product sums.
pub fn boole_bell_numerator(f: &SignSequence, g: &SignSequence, h: &SignSequence) -> Result<(i64, usize)> {
    let fg = f.product_sum(g)?;
    let fh = f.product_sum(h)?;
    let gh = g.product_sum(h)?;
    let n = f.len();
    let num = (fg - fh).abs() + gh;
    assert!(num <= n as i64, "Boole–Bell bound broken for genuine ±1 sequences");
    Ok((num, n))
}

/// |⟨f,g⟩ − ⟨f,h⟩| + ⟨g,h⟩, which never exceeds 1.
pub fn boole_bell_lhs(f: &SignSequence, g: &SignSequence, h: &SignSequence) -> Result<f64> {
    let (num, n) = boole_bell_numerator(f, g, h)?;
    Ok(num as f64 / n as f64)
}

/// The coincidence-probability form |P(f=g) − P(f=h)| ≤ 1 − P(g=h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityForm {
    pub lhs: f64,
    pub rhs: f64,
    lhs_count: usize,
    rhs_count: usize,
}

impl ProbabilityForm {
    /// Exact comparison on the integer coincidence counts.
    pub fn holds(&self) -> bool {
        self.lhs_count <= self.rhs_count
    }
}

pub fn boole_bell_lhs_prob(f: &SignSequence, g: &SignSequence, h: &SignSequence) -> Result<ProbabilityForm> {
    let n = f.len();
    let agree_fg = n - f.hamming_distance(g)?;
    let agree_fh = n - f.hamming_distance(h)?;
    let agree_gh = n - g.hamming_distance(h)?;
    let lhs_count = agree_fg.abs_diff(agree_fh);
    let rhs_count = n - agree_gh;
    Ok(ProbabilityForm {
        lhs: lhs_count as f64 / n as f64,
        rhs: rhs_count as f64 / n as f64,
        lhs_count,
        rhs_count,
    })
}

/// Exhaustive maximum of the Boole–Bell left-hand side over all triples of
/// length `n`.
///
/// Correlations are invariant under multiplying f, g and h by a common sign
/// sequence, so f is fixed to all +1 and the 4ⁿ choices of (g, h) are
/// enumerated.
pub fn brute_force_max_lhs(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if n > MAX_BRUTE_FORCE_LEN {
        return Err(Error::LengthTooLarge { len: n, max: MAX_BRUTE_FORCE_LEN });
    }
    let mask = tail_mask(n);
    let n_i = n as i64;
    let sum = |a: u64, b: u64| n_i - 2 * i64::from(((a ^ b) & mask).count_ones());
    let f = mask;
    let mut best = i64::MIN;
    for g in 0..=mask {
        let fg = sum(f, g);
        for h in 0..=mask {
            let num = (fg - sum(f, h)).abs() + sum(g, h);
            best = best.max(num);
        }
    }
    Ok(best as f64 / n as f64)
}
