use std::path::Path;

use crate::error::{Error, Result};

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant of tabulated φ,
/// built in log-log coordinates and extrapolated as a power law.
#[derive(Debug, Clone)]
pub struct MonotoneTable {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneTable {
    /// `samples` are (t, φ(t)) pairs with t > 0 and φ > 0.
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples.dedup_by(|a, b| a.0 == b.0);
        if samples.len() < 2 {
            return Err(Error::Domain("phi table needs at least two distinct samples".into()));
        }
        if let Some(bad) = samples.iter().find(|(t, p)| !(*t > 0.0 && *p > 0.0 && t.is_finite() && p.is_finite())) {
            return Err(Error::Domain(format!("phi table entry {bad:?} is not positive and finite")));
        }
        let x: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
        let y: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
        let n = x.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slope = vec![0.0; n];
        slope[0] = secant[0];
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            let (d0, d1) = (secant[i - 1], secant[i]);
            slope[i] = if d0 * d1 <= 0.0 {
                0.0
            } else {
                // weighted harmonic mean keeps each cubic piece monotone
                let w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
                let w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
                (w1 + w2) / (w1 / d0 + w2 / d1)
            };
        }
        Ok(Self { x, y, slope })
    }

    /// Reads a two-column CSV (header row required) of `t, phi` samples.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Domain(format!("{}: short row", path.display())))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
            };
            samples.push((get(0)?, get(1)?));
        }
        Self::new(samples)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// (log φ, d log φ / d log t) at log t = `lx`.
    fn eval_log(&self, lx: f64) -> (f64, f64) {
        let n = self.x.len();
        if lx <= self.x[0] {
            return (self.y[0] + self.slope[0] * (lx - self.x[0]), self.slope[0]);
        }
        if lx >= self.x[n - 1] {
            return (self.y[n - 1] + self.slope[n - 1] * (lx - self.x[n - 1]), self.slope[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= lx) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (lx - self.x[i]) / h;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.slope[i] * h, self.slope[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let val = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
        let dval = ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1) / h;
        (val, dval)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_log(t.ln()).0.exp()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (ly, dly) = self.eval_log(t.ln());
        ly.exp() * dly / t
    }
}
