//! Scaled residuals.
//!
//! A residual is judged against `tol * (1 + max |term|)`, where the terms are
//! the individual summands that cancel to produce it. Reports keep the raw
//! value next to the relative one.

/// One residual together with the size of the terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub raw: f64,
    /// `1 + max |term|`.
    pub scale: f64,
}

impl Residual {
    pub fn new(raw: f64, terms: impl IntoIterator<Item = f64>) -> Residual {
        let m = terms.into_iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        Residual { raw, scale: 1.0 + m }
    }

    pub fn relative(&self) -> f64 {
        self.raw.abs() / self.scale
    }
}

/// Running maximum of residuals over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremum {
    pub max_raw: f64,
    pub max_relative: f64,
    /// Point where the relative residual peaks.
    pub at: Vec<f64>,
    pub samples: usize,
}

impl Default for Extremum {
    fn default() -> Self {
        Extremum { max_raw: 0.0, max_relative: 0.0, at: Vec::new(), samples: 0 }
    }
}

impl Extremum {
    pub fn push(&mut self, point: &[f64], r: Residual) {
        self.samples += 1;
        self.max_raw = if r.raw.is_nan() || self.max_raw.is_nan() { f64::NAN } else { self.max_raw.max(r.raw.abs()) };
        if self.max_relative.is_nan() {
            return;
        }
        let rel = r.relative();
        if rel.is_nan() || rel > self.max_relative || self.at.is_empty() {
            self.max_relative = rel;
            self.at = point.to_vec();
        }
    }

    pub fn merge(mut self, other: Extremum) -> Extremum {
        self.samples += other.samples;
        self.max_raw = if self.max_raw.is_nan() || other.max_raw.is_nan() { f64::NAN } else { self.max_raw.max(other.max_raw) };
        if self.max_relative.is_nan() || other.samples == 0 {
            return self;
        }
        if other.max_relative > self.max_relative || other.max_relative.is_nan() || self.at.is_empty() {
            self.max_relative = other.max_relative;
            if !other.at.is_empty() {
                self.at = other.at;
            }
        }
        self
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.samples > 0 && self.max_relative <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_uses_largest_term() {
        let r = Residual::new(1e-6, [3.0, -9.0]);
        assert_eq!(r.scale, 10.0);
        assert!((r.relative() - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn extremum_tracks_argmax() {
        let mut e = Extremum::default();
        e.push(&[1.0], Residual::new(0.1, []));
        e.push(&[2.0], Residual::new(0.5, []));
        e.push(&[3.0], Residual::new(0.2, []));
        assert_eq!(e.at, vec![2.0]);
        assert_eq!(e.max_raw, 0.5);
        assert_eq!(e.samples, 3);
        assert!(e.passes(0.5) && !e.passes(0.4));
    }

    #[test]
    fn nan_never_passes() {
        let mut e = Extremum::default();
        e.push(&[1.0], Residual::new(f64::NAN, []));
        e.push(&[2.0], Residual::new(0.0, []));
        assert!(!e.passes(1.0));
    }
}
