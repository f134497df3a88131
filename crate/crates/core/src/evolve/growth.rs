use serde::Serialize;

/// Deviation-norm history and its exponential fit.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthSeries {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_sigma: f64,
    pub fit_window: (f64, f64),
    pub fit_r2: f64,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    if x.len() < 2 {
        return (f64::NAN, f64::NAN, 0.0);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

impl GrowthSeries {
    pub fn new(times: Vec<f64>, norms: Vec<f64>) -> Self {
        Self {
            times,
            norms,
            fitted_sigma: f64::NAN,
            fit_window: (f64::NAN, f64::NAN),
            fit_r2: 0.0,
        }
    }

    pub fn push(&mut self, t: f64, norm: f64) {
        self.times.push(t);
        self.norms.push(norm);
    }

    /// Fits `log(norm)` against `t` over `[t_lo, t_hi]`.
    pub fn fit_window(&mut self, t_lo: f64, t_hi: f64) -> f64 {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.norms)
            .filter(|(t, n)| **t >= t_lo && **t <= t_hi && **n > 0.0)
            .map(|(t, n)| (*t, n.ln()))
            .unzip();
        let (slope, _, r2) = linear_fit(&x, &y);
        self.fitted_sigma = slope;
        self.fit_window = (t_lo, t_hi);
        self.fit_r2 = r2;
        slope
    }

    /// Fits over the samples whose norm lies in `[lo, hi]`.
    pub fn fit_norm_band(&mut self, lo: f64, hi: f64) -> f64 {
        let inside: Vec<f64> = self
            .times
            .iter()
            .zip(&self.norms)
            .filter(|(_, n)| **n >= lo && **n <= hi)
            .map(|(t, _)| *t)
            .collect();
        match (inside.first(), inside.last()) {
            (Some(&a), Some(&b)) => self.fit_window(a, b),
            _ => {
                self.fitted_sigma = f64::NAN;
                f64::NAN
            }
        }
    }

    /// First time the norm reaches `threshold`, linearly interpolated between samples.
    pub fn first_crossing(&self, threshold: f64) -> Option<f64> {
        if self.norms.first().is_some_and(|&n| n >= threshold) {
            return Some(self.times[0]);
        }
        self.norms.windows(2).enumerate().find_map(|(i, w)| {
            (w[0] < threshold && w[1] >= threshold).then(|| {
                let (t0, t1) = (self.times[i], self.times[i + 1]);
                t0 + (threshold - w[0]) * (t1 - t0) / (w[1] - w[0])
            })
        })
    }
}
