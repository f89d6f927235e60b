use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Shot-noise estimate of a ±1-valued observable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinaryEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
}

/// Draws `shots` outcomes of ±1 with P(+1) = `p_plus` and returns the sample mean.
pub fn sample_binary_mean<R: Rng + ?Sized>(
    p_plus: f64,
    shots: u64,
    rng: &mut R,
) -> Result<BinaryEstimate> {
    if shots == 0 {
        return Err(Error::Argument("shot count must be positive".into()));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&p_plus) || p_plus.is_nan() {
        return Err(Error::Argument(format!("probability {p_plus} outside [0, 1]")));
    }
    let p = p_plus.clamp(0.0, 1.0);
    let k = Binomial::new(shots, p)
        .map_err(|e| Error::Argument(e.to_string()))?
        .sample(rng);
    let n = shots as f64;
    let mean = (2.0 * k as f64 - n) / n;
    let stderr = ((1.0 - mean * mean).max(0.0) / n).sqrt();
    Ok(BinaryEstimate { mean, stderr, shots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_outcomes() {
        let mut rng = crate::rng::seeded(1);
        let e = sample_binary_mean(1.0, 100, &mut rng).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        let e = sample_binary_mean(0.0, 100, &mut rng).unwrap();
        assert_eq!(e.mean, -1.0);
    }

    #[test]
    fn mean_converges() {
        let mut rng = crate::rng::seeded(2);
        let e = sample_binary_mean(0.8, 1_000_000, &mut rng).unwrap();
        assert!((e.mean - 0.6).abs() < 5.0 * e.stderr);
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = crate::rng::seeded(3);
        assert!(sample_binary_mean(0.5, 0, &mut rng).is_err());
        assert!(sample_binary_mean(1.5, 10, &mut rng).is_err());
    }
}
