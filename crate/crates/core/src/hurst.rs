//! Hurst exponent estimation by detrended moving average (DMA).
//!
//! For a series `y` of length `T` and window `n`, the DMA fluctuation is
//!
//! ```text
//! sigma(n) = sqrt( 1/(T-n) * sum_{t=n}^{T-1} [y(t) - ma_n(t)]^2 ),
//! ma_n(t)  = 1/n * sum_{k=0}^{n-1} y(t-k)
//! ```
//!
//! with 0-indexed days; the sum has `T - n` terms. `sigma(n)` scales as `n^H`, and `H`
//! is the least-squares slope of `ln sigma` against `ln n` for `n` in `[n_min, T/2]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::PriceSeries;

/// Minimum number of usable `(n, sigma)` points for a fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmaConfig {
    pub n_min: usize,
    /// Geometrically spaced window sizes sampled in `[n_min, T/2]` before deduplication.
    pub n_points: usize,
    /// Detrend `ln I(t)` instead of `I(t)`.
    pub log_prices: bool,
}

impl Default for DmaConfig {
    fn default() -> Self {
        Self {
            n_min: 2,
            n_points: 50,
            log_prices: false,
        }
    }
}

impl DmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 {
            return Err(Error::Parameter("n_min must be >= 2".into()));
        }
        if self.n_points < MIN_FIT_POINTS {
            return Err(Error::Parameter(format!(
                "n_points must be >= {MIN_FIT_POINTS}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub h: f64,
    /// Points that entered the fit (sigma > 0), ascending in `n`.
    pub points: Vec<FitPoint>,
    pub r_squared: f64,
    /// Fitted `ln sigma` at `ln n = 0`.
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlidingHurstConfig {
    pub window_size: usize,
    pub step: usize,
    pub dma: DmaConfig,
}

impl Default for SlidingHurstConfig {
    fn default() -> Self {
        Self {
            window_size: 1000,
            step: 20,
            dma: DmaConfig::default(),
        }
    }
}

impl SlidingHurstConfig {
    pub fn validate(&self, len: usize) -> Result<()> {
        self.dma.validate()?;
        if self.window_size < 4 * self.dma.n_min {
            return Err(Error::Parameter(format!(
                "window size {} must be >= 4 * n_min",
                self.window_size
            )));
        }
        if self.step == 0 {
            return Err(Error::Parameter("step must be >= 1".into()));
        }
        if self.window_size > len {
            return Err(Error::Parameter(format!(
                "window size {} exceeds series length {len}",
                self.window_size
            )));
        }
        Ok(())
    }

    /// `floor((T - N_s) / s) + 1` for `T >= N_s`.
    pub fn window_count(&self, len: usize) -> usize {
        if len < self.window_size || self.step == 0 {
            0
        } else {
            (len - self.window_size) / self.step + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingPoint {
    /// Start day of the window.
    pub t: usize,
    pub h: f64,
}

/// Backward moving average `ma_n(t)` for `t = n-1 .. len-1`.
///
/// Rolling sum, re-summed from scratch every `n` steps so rounding drift never spans
/// more than one window length.
pub fn moving_average(values: &[f64], n: usize) -> Vec<f64> {
    assert!(n >= 1 && n <= values.len(), "window out of range");
    let inv = 1.0 / n as f64;
    let mut out = Vec::with_capacity(values.len() + 1 - n);
    let mut sum: f64 = values[..n].iter().sum();
    out.push(sum * inv);
    for t in n..values.len() {
        if (t + 1) % n == 0 {
            sum = values[t + 1 - n..=t].iter().sum();
        } else {
            sum += values[t] - values[t - n];
        }
        out.push(sum * inv);
    }
    out
}

fn sigma_unchecked(values: &[f64], n: usize) -> f64 {
    let ma = moving_average(values, n);
    let ss: f64 = values[n..]
        .iter()
        .zip(&ma[1..])
        .map(|(y, m)| (y - m) * (y - m))
        .sum();
    (ss / (values.len() - n) as f64).sqrt()
}

/// DMA standard deviation for window `n`, `2 <= n <= T/2`.
pub fn dma_sigma(values: &[f64], n: usize) -> Result<f64> {
    if n < 2 || n > values.len() / 2 {
        return Err(Error::Parameter(format!(
            "window n = {n} outside [2, {}]",
            values.len() / 2
        )));
    }
    Ok(sigma_unchecked(values, n))
}

/// Deduplicated, ascending, geometrically spaced window sizes in `[n_min, len/2]`.
pub fn fit_sizes(len: usize, config: &DmaConfig) -> Result<Vec<usize>> {
    config.validate()?;
    let n_max = len / 2;
    if n_max < 2 * config.n_min {
        return Err(Error::Parameter(format!(
            "series of length {len} too short for n_min = {}",
            config.n_min
        )));
    }
    let (lo, hi) = (config.n_min as f64, n_max as f64);
    let ratio = (hi / lo).ln() / (config.n_points - 1) as f64;
    let mut sizes: Vec<usize> = (0..config.n_points)
        .map(|i| {
            let n = (lo.ln() + ratio * i as f64).exp().round() as usize;
            n.clamp(config.n_min, n_max)
        })
        .collect();
    sizes.dedup();
    Ok(sizes)
}

/// Ordinary least squares `y = slope * x + intercept`; returns `(slope, intercept, r^2)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 && sxx > 0.0 {
        ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r_squared)
}

/// Fits `H` on a raw value slice. `N_max` is the slice length.
pub fn hurst_fit(values: &[f64], config: &DmaConfig) -> Result<HurstEstimate> {
    let sizes = fit_sizes(values.len(), config)?;
    let points: Vec<FitPoint> = sizes
        .into_iter()
        .map(|n| FitPoint {
            n,
            sigma: sigma_unchecked(values, n),
        })
        .filter(|p| p.sigma > 0.0)
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit {
            usable: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sigma.ln()).collect();
    let (h, intercept, r_squared) = ols(&xs, &ys);
    Ok(HurstEstimate {
        h,
        points,
        r_squared,
        intercept,
    })
}

fn detrend_input(series: &PriceSeries, config: &DmaConfig) -> Vec<f64> {
    if config.log_prices {
        series.ln()
    } else {
        series.values().to_vec()
    }
}

/// Global Hurst exponent over the whole series.
pub fn hurst_global(series: &PriceSeries, config: &DmaConfig) -> Result<HurstEstimate> {
    hurst_fit(&detrend_input(series, config), config)
}

/// `H(t)` over full windows `[t, t + N_s)`, `t = 0, s, 2s, ...`, in ascending `t`.
pub fn hurst_sliding(
    series: &PriceSeries,
    config: &SlidingHurstConfig,
) -> Result<Vec<SlidingPoint>> {
    config.validate(series.len())?;
    let values = detrend_input(series, &config.dma);
    (0..config.window_count(values.len()))
        .into_par_iter()
        .map(|k| {
            let t = k * config.step;
            hurst_fit(&values[t..t + config.window_size], &config.dma)
                .map(|est| SlidingPoint { t, h: est.h })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate, SyntheticSpec};

    /// Literal double loop over the defining sums.
    fn sigma_oracle(y: &[f64], n: usize) -> f64 {
        let len = y.len();
        let mut ss = 0.0;
        for t in n..len {
            let mut acc = 0.0;
            for k in 0..n {
                acc += y[t - k];
            }
            let d = y[t] - acc / n as f64;
            ss += d * d;
        }
        (ss / (len - n) as f64).sqrt()
    }

    fn walk(len: usize, seed: u64) -> PriceSeries {
        generate(&SyntheticSpec::gaussian(len, seed)).unwrap()
    }

    fn ramp(len: usize) -> PriceSeries {
        PriceSeries::new((1..=len).map(|t| t as f64).collect()).unwrap()
    }

    #[test]
    fn constant_series_has_zero_sigma() {
        let y = vec![42.0; 100];
        for n in [2, 7, 50] {
            assert_eq!(dma_sigma(&y, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn ramp_sigma_closed_form() {
        let s = ramp(2000);
        assert_eq!(dma_sigma(s.values(), 5).unwrap(), 2.0);
        for n in [2, 3, 10, 100, 999, 1000] {
            let want = (n as f64 - 1.0) / 2.0;
            let got = dma_sigma(s.values(), n).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "n={n}: {got}");
        }
    }

    #[test]
    fn sigma_matches_double_loop() {
        let s = walk(4000, 21);
        for n in [4, 16, 64] {
            let got = dma_sigma(s.values(), n).unwrap();
            let want = sigma_oracle(s.values(), n);
            assert!((got - want).abs() <= 1e-10 * want, "n={n}");
        }
    }

    #[test]
    fn sigma_window_bounds() {
        let y = vec![1.0; 10];
        assert!(dma_sigma(&y, 1).is_err());
        assert!(dma_sigma(&y, 6).is_err());
        assert!(dma_sigma(&y, 5).is_ok());
    }

    #[test]
    fn fit_sizes_are_geometric_and_bounded() {
        let sizes = fit_sizes(5000, &DmaConfig::default()).unwrap();
        assert_eq!(sizes[0], 2);
        assert_eq!(*sizes.last().unwrap(), 2500);
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
        assert!(sizes.len() >= 40 && sizes.len() <= 50);
        assert!(fit_sizes(7, &DmaConfig::default()).is_err());
        assert!(fit_sizes(8, &DmaConfig::default()).is_ok());
    }

    #[test]
    fn ramp_fit_matches_closed_form_fit() {
        // Oracle: fit the exact sigma = (n-1)/2 on the same n grid.
        let s = ramp(2000);
        let est = hurst_global(&s, &DmaConfig::default()).unwrap();
        let sizes = fit_sizes(2000, &DmaConfig::default()).unwrap();
        let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = sizes.iter().map(|&n| ((n as f64 - 1.0) / 2.0).ln()).collect();
        let (h, _, _) = ols(&xs, &ys);
        assert!((est.h - h).abs() < 1e-12);
        assert!((est.h - 1.0527).abs() < 1e-3, "H = {}", est.h);
        assert!(est.r_squared > 0.99);
    }

    #[test]
    fn gaussian_walk_fit_near_half() {
        // Ensemble over 20 seeds: mean close to 0.5 (small-n curvature biases the
        // single-seed fit slightly upward; large-n noise dominates its spread).
        let hs: Vec<f64> = (0..20)
            .map(|seed| hurst_global(&walk(5000, seed), &DmaConfig::default()).unwrap().h)
            .collect();
        let mean = hs.iter().sum::<f64>() / hs.len() as f64;
        assert!((mean - 0.5).abs() < 0.04, "mean H = {mean}");
        assert!(hs.iter().all(|h| (0.3..0.7).contains(h)), "{hs:?}");
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = PriceSeries::new(vec![5.0; 100]).unwrap();
        assert!(matches!(
            hurst_global(&s, &DmaConfig::default()),
            Err(Error::DegenerateFit { usable: 0 })
        ));
    }

    #[test]
    fn log_price_mode_differs() {
        let s = walk(3000, 4);
        let a = hurst_global(&s, &DmaConfig::default()).unwrap();
        let cfg = DmaConfig {
            log_prices: true,
            ..DmaConfig::default()
        };
        let b = hurst_global(&s, &cfg).unwrap();
        assert_ne!(a.h, b.h);
        assert!((a.h - b.h).abs() < 0.1);
    }

    #[test]
    fn sliding_window_counts() {
        let s = walk(3000, 1);
        let out = hurst_sliding(&s, &SlidingHurstConfig::default()).unwrap();
        assert_eq!(out.len(), 101);
        assert!(out.iter().enumerate().all(|(k, p)| p.t == 20 * k));
        assert!(out.iter().all(|p| p.h.is_finite()));

        let exact = walk(1000, 1);
        let out = hurst_sliding(&exact, &SlidingHurstConfig::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].t, 0);
        let global = hurst_global(&exact, &DmaConfig::default()).unwrap();
        assert_eq!(out[0].h, global.h);

        assert!(hurst_sliding(&walk(999, 1), &SlidingHurstConfig::default()).is_err());
    }

    #[test]
    fn sliding_separates_persistence() {
        let median_h = |phi: f64| {
            let mut hs: Vec<f64> = (0..20)
                .flat_map(|seed| {
                    let s = generate(&SyntheticSpec::ar1(3000, seed, phi)).unwrap();
                    hurst_sliding(&s, &SlidingHurstConfig::default())
                        .unwrap()
                        .into_iter()
                        .map(|p| p.h)
                })
                .collect();
            hs.sort_by(f64::total_cmp);
            hs[hs.len() / 2]
        };
        let up = median_h(0.5);
        let flat = median_h(0.0);
        let down = median_h(-0.5);
        assert!(up > 0.55, "phi=0.5 median {up}");
        assert!(up > flat && flat > down, "{up} {flat} {down}");
    }

    #[test]
    fn sliding_is_parallel_deterministic() {
        let s = walk(2500, 8);
        let cfg = SlidingHurstConfig {
            step: 7,
            ..SlidingHurstConfig::default()
        };
        let a = hurst_sliding(&s, &cfg).unwrap();
        let b = hurst_sliding(&s, &cfg).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn sigma_oracle_equivalence(seed in any::<u64>(), len in 8usize..5000, frac in 0.0f64..1.0) {
                let s = walk(len, seed);
                let n = 2 + ((len / 2 - 2) as f64 * frac) as usize;
                let got = dma_sigma(s.values(), n).unwrap();
                let want = sigma_oracle(s.values(), n);
                prop_assert!((got - want).abs() <= 1e-10 * want.max(f64::MIN_POSITIVE));
            }

            #[test]
            fn rolling_average_matches_direct(seed in any::<u64>(), len in 2usize..3000, frac in 0.0f64..1.0) {
                let s = walk(len, seed);
                let y = s.values();
                let n = 1 + ((len - 1) as f64 * frac) as usize;
                let ma = moving_average(y, n);
                for (i, m) in ma.iter().enumerate() {
                    let t = i + n - 1;
                    let direct = y[t + 1 - n..=t].iter().sum::<f64>() / n as f64;
                    prop_assert!((m - direct).abs() <= 1e-12 * direct.abs());
                }
            }

            #[test]
            fn hurst_affine_invariant(seed in any::<u64>(), a in 0.01f64..100.0, b in 0.0f64..1e4) {
                let s = walk(1500, seed);
                let shifted = PriceSeries::new(s.values().iter().map(|y| a * y + b).collect()).unwrap();
                let h0 = hurst_global(&s, &DmaConfig::default()).unwrap().h;
                let h1 = hurst_global(&shifted, &DmaConfig::default()).unwrap().h;
                prop_assert!((h0 - h1).abs() <= 1e-9, "{} vs {}", h0, h1);
            }

            #[test]
            fn sliding_count_closed_form(len in 8usize..400, ns in 12usize..400, step in 1usize..50) {
                prop_assume!(ns <= len);
                let cfg = SlidingHurstConfig { window_size: ns, step, dma: DmaConfig::default() };
                let y: Vec<f64> = (0..len).map(|t| 100.0 + ((t * 7919) % 13) as f64).collect();
                let s = PriceSeries::new(y).unwrap();
                let out = hurst_sliding(&s, &cfg).unwrap();
                prop_assert_eq!(out.len(), (len - ns) / step + 1);
            }
        }
    }
}
