use corrosion_core::{corrosion_rate, residual_norm, CalibrationPoint, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Points drawn from the exact model, optionally with multiplicative noise.
pub fn synthetic_points(c: f64, n: f64, count: usize, noise: f64, seed: u64) -> Vec<CalibrationPoint> {
    let truth = ModelParams::new(c, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = Normal::new(0.0, 1.0).unwrap();
    (0..count)
        .map(|_| {
            let rh = rng.random_range(0.3..0.95);
            let t = rng.random_range(0.0..40.0);
            let cr = corrosion_rate(&truth, t, rh).unwrap() * (1.0 + noise * eps.sample(&mut rng));
            CalibrationPoint::new(rh, t, cr.max(0.0))
        })
        .collect()
}

/// Exhaustive search over a `size × size` grid; `log_c` spaces C geometrically.
pub fn grid_search(
    points: &[CalibrationPoint],
    c_range: (f64, f64),
    n_range: (f64, f64),
    size: usize,
) -> (f64, f64, f64) {
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    let (lc0, lc1) = (c_range.0.ln(), c_range.1.ln());
    for i in 0..size {
        let c = (lc0 + (lc1 - lc0) * i as f64 / (size - 1) as f64).exp();
        for j in 0..size {
            let n = n_range.0 + (n_range.1 - n_range.0) * j as f64 / (size - 1) as f64;
            let cost = residual_norm(points, &ModelParams::new(c, n));
            if cost < best.2 {
                best = (c, n, cost);
            }
        }
    }
    best
}
