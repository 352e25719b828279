//! Bin-mean accumulation and delete-one jackknife error propagation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BinningError {
    #[error("jackknife needs at least 2 bins (got {0})")]
    TooFewBins(usize),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bin in progress: {0} of {1} sweeps accumulated")]
    IncompleteBin(u64, u64),
}

/// Time-ordered means of disjoint, equal-length bins of one observable.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub bin_size: u64,
    pub bins: Vec<f64>,
}

/// A value with its jackknife error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub sigma: f64,
    pub nbins: usize,
}

impl std::fmt::Display for EstimateWithError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.6} +/- {:.6}", self.value, self.sigma)
    }
}

/// Sweep-by-sweep accumulator for a fixed set of named observables.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub names: Vec<String>,
    pub bin_size: u64,
    pub bins: Vec<Vec<f64>>,
    current: Vec<f64>,
    current_count: u64,
}

impl Accumulator {
    pub fn new(names: Vec<String>, bin_size: u64) -> Self {
        assert!(bin_size > 0);
        let cols = names.len();
        Self {
            names,
            bin_size,
            bins: vec![Vec::new(); cols],
            current: vec![0.0; cols],
            current_count: 0,
        }
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn n_bins(&self) -> usize {
        self.bins.first().map_or(0, |b| b.len())
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Record one sweep's observable vector.
    pub fn push(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.current.len());
        for (acc, v) in self.current.iter_mut().zip(values) {
            *acc += v;
        }
        self.current_count += 1;
        if self.current_count == self.bin_size {
            for (col, acc) in self.current.iter_mut().enumerate() {
                self.bins[col].push(*acc / self.bin_size as f64);
                *acc = 0.0;
            }
            self.current_count = 0;
        }
    }

    /// Error if a bin is only partially filled.
    pub fn require_complete(&self) -> Result<(), BinningError> {
        if self.current_count != 0 {
            return Err(BinningError::IncompleteBin(self.current_count, self.bin_size));
        }
        Ok(())
    }

    pub fn series(&self, col: usize) -> BinnedSeries {
        BinnedSeries {
            bin_size: self.bin_size,
            bins: self.bins[col].clone(),
        }
    }

    /// Merge bins from another chain (associative, order = chain order).
    pub fn merge(&mut self, other: &Accumulator) -> Result<(), BinningError> {
        assert_eq!(self.names, other.names);
        other.require_complete()?;
        for (mine, theirs) in self.bins.iter_mut().zip(&other.bins) {
            mine.extend_from_slice(theirs);
        }
        Ok(())
    }

    /// Snapshot for checkpointing, including the partial bin.
    pub fn raw_parts(&self) -> (&[String], u64, &[Vec<f64>], &[f64], u64) {
        (
            &self.names,
            self.bin_size,
            &self.bins,
            &self.current,
            self.current_count,
        )
    }

    pub fn from_raw_parts(
        names: Vec<String>,
        bin_size: u64,
        bins: Vec<Vec<f64>>,
        current: Vec<f64>,
        current_count: u64,
    ) -> Self {
        Self {
            names,
            bin_size,
            bins,
            current,
            current_count,
        }
    }
}

/// Delete-one jackknife through an arbitrary function of the column means.
/// A linear `f` reproduces the standard error of the mean.
pub fn jackknife<F>(series: &[&[f64]], f: F) -> Result<EstimateWithError, BinningError>
where
    F: Fn(&[f64]) -> f64,
{
    let b = series.first().map_or(0, |s| s.len());
    if b < 2 {
        return Err(BinningError::TooFewBins(b));
    }
    for s in series {
        if s.len() != b {
            return Err(BinningError::LengthMismatch(b, s.len()));
        }
    }
    let sums: Vec<f64> = series.iter().map(|s| s.iter().sum()).collect();
    let full_means: Vec<f64> = sums.iter().map(|s| s / b as f64).collect();
    let value = f(&full_means);

    let mut jk = Vec::with_capacity(b);
    let mut means_k = vec![0.0; series.len()];
    for k in 0..b {
        for (c, s) in series.iter().enumerate() {
            means_k[c] = (sums[c] - s[k]) / (b - 1) as f64;
        }
        jk.push(f(&means_k));
    }
    let jk_mean = jk.iter().sum::<f64>() / b as f64;
    let var = jk.iter().map(|x| (x - jk_mean).powi(2)).sum::<f64>() * (b - 1) as f64 / b as f64;
    Ok(EstimateWithError {
        value,
        sigma: var.max(0.0).sqrt(),
        nbins: b,
    })
}

/// Convenience: jackknife of a single series through the identity.
pub fn mean_with_error(series: &[f64]) -> Result<EstimateWithError, BinningError> {
    jackknife(&[series], |m| m[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn constant_bins_have_zero_sigma() {
        let s = vec![0.7; 16];
        let e = mean_with_error(&s).unwrap();
        assert_abs_diff_eq!(e.value, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(e.sigma, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn identity_matches_standard_error() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let s: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let e = mean_with_error(&s).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let var = s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
        let sem = (var / s.len() as f64).sqrt();
        assert_abs_diff_eq!(e.value, mean, epsilon = 1e-12);
        assert_abs_diff_eq!(e.sigma, sem, epsilon = 1e-12);
    }

    #[test]
    fn too_few_bins_rejected() {
        assert_eq!(
            mean_with_error(&[1.0]).unwrap_err(),
            BinningError::TooFewBins(1)
        );
    }

    #[test]
    fn accumulator_bins_and_merges() {
        let mut a = Accumulator::new(vec!["x".into()], 2);
        for v in [1.0, 3.0, 5.0, 7.0] {
            a.push(&[v]);
        }
        assert_eq!(a.bins[0], vec![2.0, 6.0]);
        let mut b = Accumulator::new(vec!["x".into()], 2);
        for v in [9.0, 11.0] {
            b.push(&[v]);
        }
        a.merge(&b).unwrap();
        assert_eq!(a.bins[0], vec![2.0, 6.0, 10.0]);
        a.push(&[0.0]);
        assert!(a.require_complete().is_err());
    }

    #[test]
    fn nonlinear_jackknife_scales_like_inverse_sqrt_bins() {
        // Synthetic correlator bins pushed through the concurrence
        // pipeline; sigma must shrink like 1/sqrt(nbins).
        let run = |nbins: usize, seed: u64| -> f64 {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let xx: Vec<f64> = (0..nbins).map(|_| -0.55 + 0.05 * rng.gen_range(-1.0..1.0f64)).collect();
            let zz: Vec<f64> = (0..nbins).map(|_| -0.35 + 0.05 * rng.gen_range(-1.0..1.0f64)).collect();
            let est = jackknife(&[&xx, &zz], |m| {
                crate::entanglement::xxz_concurrence(2.0 * m[0], m[1], 0.0, 0.0)
                    .unwrap()
                    .0
            })
            .unwrap();
            est.sigma
        };
        let mut ratios = Vec::new();
        for seed in 0..8 {
            let s1 = run(64, seed);
            let s4 = run(256, 1000 + seed);
            ratios.push(s1 / s4);
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        // Expect about sqrt(4) = 2.
        assert!(
            (1.4..=2.9).contains(&mean_ratio),
            "sigma ratio {mean_ratio} not consistent with 1/sqrt(nbins)"
        );
    }
}
