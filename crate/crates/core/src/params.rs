use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

const PROB_TOL: f64 = 1e-12;

/// Alphabet size `m`, space probability `q`, and optional per-letter
/// probabilities. Validated at construction; immutable afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    m: u32,
    q: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    letter_probs: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawParams {
    m: u32,
    q: f64,
    #[serde(default)]
    letter_probs: Option<Vec<f64>>,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        match raw.letter_probs {
            Some(p) => ModelParams::with_letter_probs(raw.m, raw.q, p),
            None => ModelParams::new(raw.m, raw.q),
        }
    }
}

impl ModelParams {
    /// Equiprobable letters: each has probability `(1 - q) / m`.
    pub fn new(m: u32, q: f64) -> Result<Self> {
        if m < 2 {
            return Err(domain(format!("alphabet size must be at least 2, got {m}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(domain(format!("space probability must lie in (0, 1), got {q}")));
        }
        Ok(Self { m, q, letter_probs: None })
    }

    pub fn with_letter_probs(m: u32, q: f64, letter_probs: Vec<f64>) -> Result<Self> {
        let mut params = Self::new(m, q)?;
        if letter_probs.len() != m as usize {
            return Err(domain(format!(
                "expected {m} letter probabilities, got {}",
                letter_probs.len()
            )));
        }
        if let Some(bad) = letter_probs.iter().find(|&&p| !(p > 0.0 && p.is_finite())) {
            return Err(domain(format!("letter probabilities must be positive, got {bad}")));
        }
        let total: f64 = letter_probs.iter().sum();
        if (total - (1.0 - q)).abs() > PROB_TOL {
            return Err(domain(format!(
                "letter probabilities sum to {total}, expected 1 - q = {}",
                1.0 - q
            )));
        }
        params.letter_probs = Some(letter_probs);
        Ok(params)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn letter_probs(&self) -> Option<&[f64]> {
        self.letter_probs.as_deref()
    }

    /// Probability of letter `j` in `1..=m`.
    pub fn letter_prob(&self, j: u32) -> f64 {
        match &self.letter_probs {
            Some(p) => p[(j - 1) as usize],
            None => (1.0 - self.q) / self.m as f64,
        }
    }

    /// True when every letter has probability `(1 - q) / m`.
    pub fn is_uniform(&self) -> bool {
        match &self.letter_probs {
            None => true,
            Some(p) => {
                let each = (1.0 - self.q) / self.m as f64;
                p.iter().all(|&x| (x - each).abs() <= PROB_TOL)
            }
        }
    }

    pub(crate) fn require_uniform(&self) -> Result<()> {
        if self.is_uniform() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "closed-form predictions require equiprobable letters".into(),
            ))
        }
    }
}
