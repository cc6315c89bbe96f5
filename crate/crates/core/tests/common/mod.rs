#![allow(dead_code)]

//! Reference evaluations kept apart from the library code paths they check.

/// DMA fluctuation by the literal double sum.
pub fn sigma_double_loop(y: &[f64], n: usize) -> f64 {
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

/// EMA at index `t` by explicit expansion of the recursion seeded at `window - 1`.
pub fn ema_expanded(values: &[f64], window: usize, t: usize) -> f64 {
    let w = 2.0 / (window as f64 + 1.0);
    let s = window - 1;
    let seed = values[..window].iter().sum::<f64>() / window as f64;
    let mut acc = (1.0 - w).powi((t - s) as i32) * seed;
    for (k, v) in values.iter().enumerate().take(t + 1).skip(s + 1) {
        acc += w * (1.0 - w).powi((t - k) as i32) * v;
    }
    acc
}

/// `(MACD_t, signal_t)` from the expansions above.
pub fn macd_expanded(values: &[f64], fast: usize, slow: usize, signal: usize, t: usize) -> (f64, f64) {
    let macd: Vec<f64> = (slow - 1..=t)
        .map(|k| ema_expanded(values, fast, k) - ema_expanded(values, slow, k))
        .collect();
    let sig = ema_expanded(&macd, signal, macd.len() - 1);
    (*macd.last().unwrap(), sig)
}

pub fn rsi_direct(h: &[f64], t: usize, tau: usize) -> f64 {
    let changes: Vec<f64> = (t + 1 - tau..=t).map(|k| h[k] - h[k - 1]).collect();
    let up: f64 = changes.iter().filter(|d| **d > 0.0).sum();
    let down: f64 = changes.iter().filter(|d| **d < 0.0).map(|d| -d).sum();
    if down == 0.0 {
        return if up == 0.0 { 50.0 } else { 100.0 };
    }
    100.0 - 100.0 / (1.0 + up / down)
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
