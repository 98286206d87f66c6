//! Seeded outcome sampling, χ² goodness of fit and CSV histograms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub seed: u64,
    pub shots: u64,
    pub counts: Vec<u64>,
    /// Exact outcome probabilities the shots were drawn from.
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Clamp tiny negative weights and renormalise.
fn normalised(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::Empty("weights"));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < -1e-9) {
        return Err(Error::InvalidArgument(format!("invalid outcome weights {weights:?}")));
    }
    let clamped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument("outcome weights sum to zero".into()));
    }
    Ok(clamped.into_iter().map(|w| w / total).collect())
}

/// Draw `shots` outcome indices by inverse CDF. Shot `s` uses the ChaCha8
/// stream of `seed` at word position `2s`, so the result does not depend
/// on evaluation order.
pub fn sample_outcomes(weights: &[f64], shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let probabilities = normalised(weights)?;
    let mut cumulative = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for p in &probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let last = probabilities.iter().rposition(|&p| p > 0.0).expect("positive weight");
    let mut counts = vec![0u64; probabilities.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for shot in 0..shots {
        rng.set_word_pos(2 * shot as u128);
        let u: f64 = rng.random();
        let idx = cumulative.iter().position(|&c| u < c).unwrap_or(last).min(last);
        counts[idx] += 1;
    }
    Ok(Histogram {
        seed,
        shots,
        counts,
        probabilities: weights.to_vec(),
    })
}

impl Histogram {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    /// Pearson χ² over outcomes with positive probability,
    /// `df = #{p_i > 0} - 1`.
    pub fn chi_square(&self) -> ChiSquare {
        let n = self.shots as f64;
        let mut statistic = 0.0;
        let mut cells = 0usize;
        for (&c, &p) in self.counts.iter().zip(&self.probabilities) {
            if p > 0.0 {
                let expected = n * p;
                statistic += (c as f64 - expected).powi(2) / expected;
                cells += 1;
            } else if c > 0 {
                statistic = f64::INFINITY;
            }
        }
        let df = cells.saturating_sub(1);
        let p_value = if statistic.is_infinite() {
            0.0
        } else if df == 0 {
            1.0
        } else {
            1.0 - ChiSquared::new(df as f64).expect("df > 0").cdf(statistic)
        };
        ChiSquare {
            statistic,
            degrees_of_freedom: df,
            p_value,
        }
    }

    /// `outcome_index,count,exact_probability` with 1-based indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("outcome_index,count,exact_probability\n");
        for (i, (c, p)) in self.counts.iter().zip(&self.probabilities).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, c, p));
        }
        out
    }
}
