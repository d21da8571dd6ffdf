#![allow(dead_code)]

use corrosion_core::{corrosion_rate, ModelParams};
use corrosion_ml::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const FEATURES: [&str; 9] = [
    "temp_c",
    "rh_pct",
    "temp_k",
    "rh_frac",
    "roll24_rh_mean",
    "roll24_rh_std",
    "roll24_tk_mean",
    "hours_wet_24h",
    "station_code",
];

/// Rows shaped like the ingest features with a physics target.
pub fn physics_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = Normal::<f64>::new(30.3, 5.7).unwrap();
    let rh = Normal::<f64>::new(66.5, 13.2).unwrap();
    let params = ModelParams::new(2.0e10, 2.5);
    let mut x = Vec::with_capacity(n * 9);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let tc: f64 = t.sample(&mut rng);
        let rh_pct = f64::clamp(rh.sample(&mut rng), 0.0, 100.0);
        let rf = rh_pct / 100.0;
        let roll_mean = (rf + rng.random_range(-0.05f64..0.05)).clamp(0.0, 1.0);
        x.extend_from_slice(&[
            tc,
            rh_pct,
            tc + 273.15,
            rf,
            roll_mean,
            rng.random_range(0.0..0.2),
            tc + 273.15 + rng.random_range(-2.0..2.0),
            rng.random_range(0.0..24.0),
            rng.random_range(1..=14) as f64,
        ]);
        y.push(corrosion_rate(&params, tc, rf).unwrap());
    }
    let ts = (0..n as i64).map(|i| i / 14).collect();
    let groups = (0..n as u32).map(|i| i % 14 + 1).collect();
    Dataset::new(FEATURES.iter().map(|s| s.to_string()).collect(), x, y, ts, groups).unwrap()
}

pub fn random_matrix(n: usize, p: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n * p).map(|_| rng.random_range(-3.0..3.0)).collect()
}

/// Squared-error reduction of splitting `rows` on `feature ≤ threshold`.
pub fn sse_gain(x: &[f64], p: usize, y: &[f64], rows: &[usize], feature: usize, threshold: f64) -> f64 {
    let sse = |idx: &[usize]| {
        if idx.is_empty() {
            return 0.0;
        }
        let m = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>()
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i * p + feature] <= threshold);
    sse(rows) - sse(&l) - sse(&r)
}

/// Best gain over every feature and every midpoint between distinct values.
pub fn exhaustive_best_gain(x: &[f64], p: usize, y: &[f64], rows: &[usize]) -> f64 {
    let mut best = 0.0f64;
    for f in 0..p {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x[i * p + f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            best = best.max(sse_gain(x, p, y, rows, f, (w[0] + w[1]) / 2.0));
        }
    }
    best
}
