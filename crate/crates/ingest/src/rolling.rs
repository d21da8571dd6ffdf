use std::collections::VecDeque;

/// Humidity fraction above which a sample counts as wet.
pub const WET_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingStats {
    pub count: usize,
    pub rh_mean: f64,
    /// Population standard deviation.
    pub rh_std: f64,
    pub tk_mean: f64,
    pub hours_wet: f64,
}

/// Trailing window over `(time, rh_frac, temp_k)` samples.
///
/// Times are integer seconds. A sample at `t` stays in the window while
/// `now - t < span`. Sums are kept relative to a reference value taken
/// from the oldest sample so a constant series has an exactly zero
/// deviation.
#[derive(Debug, Clone)]
pub struct RollingWindow {
    span_s: i64,
    sample_s: i64,
    buf: VecDeque<(i64, f64, f64)>,
    rh_ref: f64,
    tk_ref: f64,
    rh_sum: f64,
    rh_sq: f64,
    tk_sum: f64,
    wet: usize,
}

impl RollingWindow {
    /// `sample_s` is the nominal spacing used to turn wet counts into hours.
    pub fn new(span_s: i64, sample_s: i64) -> Self {
        assert!(span_s > 0 && sample_s > 0, "window span and sample period must be positive");
        Self {
            span_s,
            sample_s,
            buf: VecDeque::new(),
            rh_ref: 0.0,
            tk_ref: 0.0,
            rh_sum: 0.0,
            rh_sq: 0.0,
            tk_sum: 0.0,
            wet: 0,
        }
    }

    pub fn day_of_minutes() -> Self {
        Self::new(86_400, 60)
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    /// Samples the window can hold at nominal spacing.
    pub fn capacity(&self) -> usize {
        (self.span_s / self.sample_s) as usize
    }

    /// Adds a sample; times must be non-decreasing.
    pub fn push(&mut self, t: i64, rh_frac: f64, temp_k: f64) {
        self.evict_before(t);
        if self.buf.is_empty() {
            self.rh_ref = rh_frac;
            self.tk_ref = temp_k;
            self.rh_sum = 0.0;
            self.rh_sq = 0.0;
            self.tk_sum = 0.0;
            self.wet = 0;
        }
        let d = rh_frac - self.rh_ref;
        self.rh_sum += d;
        self.rh_sq += d * d;
        self.tk_sum += temp_k - self.tk_ref;
        self.wet += (rh_frac > WET_THRESHOLD) as usize;
        self.buf.push_back((t, rh_frac, temp_k));
    }

    /// Drops samples that fall out of a window ending at `now`.
    pub fn evict_before(&mut self, now: i64) {
        while let Some(&(t, rh, tk)) = self.buf.front() {
            if now - t < self.span_s {
                break;
            }
            let d = rh - self.rh_ref;
            self.rh_sum -= d;
            self.rh_sq -= d * d;
            self.tk_sum -= tk - self.tk_ref;
            self.wet -= (rh > WET_THRESHOLD) as usize;
            self.buf.pop_front();
        }
    }

    pub fn stats(&self) -> Option<RollingStats> {
        let n = self.buf.len();
        if n == 0 {
            return None;
        }
        let nf = n as f64;
        let mean_d = self.rh_sum / nf;
        let var = (self.rh_sq / nf - mean_d * mean_d).max(0.0);
        Some(RollingStats {
            count: n,
            rh_mean: self.rh_ref + mean_d,
            rh_std: var.sqrt(),
            tk_mean: self.tk_ref + self.tk_sum / nf,
            hours_wet: (self.wet as i64 * self.sample_s) as f64 / 3600.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_wet_day() {
        let mut w = RollingWindow::day_of_minutes();
        for m in 0..1440 {
            w.push(m * 60, 0.9, 300.0);
        }
        let s = w.stats().unwrap();
        assert_eq!(s.count, 1440);
        assert_eq!(s.rh_mean, 0.9);
        assert_eq!(s.rh_std, 0.0);
        assert_eq!(s.hours_wet, 24.0);
        assert_eq!(s.tk_mean, 300.0);
    }

    #[test]
    fn half_wet_day() {
        let mut w = RollingWindow::day_of_minutes();
        for m in 0..1440 {
            w.push(m * 60, if m < 720 { 0.9 } else { 0.7 }, 290.0);
        }
        let s = w.stats().unwrap();
        assert_eq!(s.hours_wet, 12.0);
        assert!((s.rh_mean - 0.8).abs() < 1e-12);
        assert!((s.rh_std - 0.1).abs() < 1e-12);
    }

    #[test]
    fn eviction_at_span() {
        let mut w = RollingWindow::new(300, 60);
        for m in 0..10 {
            w.push(m * 60, m as f64 / 10.0, 0.0);
        }
        assert_eq!(w.len(), 5);
        assert!((w.stats().unwrap().rh_mean - 0.7).abs() < 1e-12);
        w.evict_before(10_000);
        assert!(w.stats().is_none());
        w.push(10_000, 0.5, 1.0);
        assert_eq!(w.stats().unwrap().rh_std, 0.0);
    }
}
