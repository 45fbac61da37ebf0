//! Monte Carlo estimates and the replication driver.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stream::RandomStream;

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub replications: usize,
}

impl EstimateWithError {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            replications: 1,
        }
    }

    /// Mean and standard error of independent replicate values.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                value: f64::NAN,
                std_error: f64::NAN,
                replications: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error: se,
            replications: n,
        }
    }

    /// `|value - target| <= k * std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.std_error
    }

    /// Standardised distance to a reference value; infinite with the sign of
    /// the difference when the error vanishes.
    pub fn z_against(&self, reference: f64) -> f64 {
        z_score(self.value - reference, self.std_error)
    }
}

pub(crate) fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// A curve of estimates over increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub abscissa: Vec<f64>,
    pub estimates: Vec<EstimateWithError>,
}

impl CurveEstimate {
    pub fn new(abscissa: Vec<f64>, estimates: Vec<EstimateWithError>) -> Result<Self> {
        if abscissa.len() != estimates.len() {
            return Err(Error::param("estimates", "length differs from abscissa"));
        }
        check_increasing("abscissa", &abscissa)?;
        Ok(Self { abscissa, estimates })
    }
}

pub(crate) fn check_increasing(name: &'static str, xs: &[f64]) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::param(name, "values must be finite"));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(name, "values must be strictly increasing"));
    }
    Ok(())
}

/// Runs `f(i, stream.derive(i))` for every replication in parallel and
/// returns the results in replication order.
pub fn replicate<T, F>(reps: usize, stream: &RandomStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, RandomStream) -> T + Sync + Send,
{
    (0..reps).into_par_iter().map(|i| f(i, stream.derive(i as u64))).collect()
}

/// Fallible variant of [`replicate`]; the first error in replication order wins.
pub fn try_replicate<T, F>(reps: usize, stream: &RandomStream, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RandomStream) -> Result<T> + Sync + Send,
{
    replicate(reps, stream, f).into_iter().collect()
}

pub(crate) fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::param("reps", "need at least one replication"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let e = EstimateWithError::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        assert!((e.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(e.replications, 4);
    }

    #[test]
    fn z_scores_with_zero_error() {
        assert_eq!(z_score(0.0, 0.0), 0.0);
        assert_eq!(z_score(-1.0, 0.0), f64::NEG_INFINITY);
        assert_eq!(z_score(2.0, 0.5), 4.0);
    }

    #[test]
    fn replicate_preserves_order() {
        let s = RandomStream::new(1);
        let v = replicate(100, &s, |i, st| (i, st.path().to_vec()));
        for (i, (j, p)) in v.iter().enumerate() {
            assert_eq!(i, *j);
            assert_eq!(p, &vec![i as u64]);
        }
    }

    #[test]
    fn curve_requires_increasing_abscissa() {
        let e = EstimateWithError::exact(1.0);
        assert!(CurveEstimate::new(vec![1.0, 1.0], vec![e, e]).is_err());
        assert!(CurveEstimate::new(vec![1.0, 2.0], vec![e]).is_err());
    }
}
