//! Fixed-step RK4 for `φ'' + p φ' + q φ = 0` with cubic Hermite dense output.

use super::{Coefficient, SeparationError};
use crate::expr::ScalarField;
use crate::sampling::Interval;

pub const DEFAULT_STEPS: usize = 4096;

/// Tabulated solution on a uniform mesh.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
    ddy: Vec<f64>,
    p: Coefficient,
    q: Coefficient,
}

fn coefficients(p: &Coefficient, q: &Coefficient, x: f64) -> Result<(f64, f64), SeparationError> {
    let singular = || SeparationError::Singular { at: x };
    let pv = p.value(x).map_err(|_| singular())?;
    let qv = q.value(x).map_err(|_| singular())?;
    if !pv.is_finite() || !qv.is_finite() {
        return Err(singular());
    }
    Ok((pv, qv))
}

/// Integrates from `interval.lo` with `φ = y0`, `φ' = dy0`.
pub fn integrate_ode(
    p: &Coefficient,
    q: &Coefficient,
    interval: Interval,
    y0: f64,
    dy0: f64,
    steps: usize,
) -> Result<OdeSolution, SeparationError> {
    let steps = steps.max(1);
    let h = interval.width() / steps as f64;
    let rhs = |x: f64, y: f64, v: f64| -> Result<(f64, f64), SeparationError> {
        let (pv, qv) = coefficients(p, q, x)?;
        Ok((v, -pv * v - qv * y))
    };
    let mut y = Vec::with_capacity(steps + 1);
    let mut dy = Vec::with_capacity(steps + 1);
    let mut ddy = Vec::with_capacity(steps + 1);
    let (mut yc, mut vc) = (y0, dy0);
    for k in 0..=steps {
        let x = interval.lo + k as f64 * h;
        let (_, acc) = rhs(x, yc, vc)?;
        y.push(yc);
        dy.push(vc);
        ddy.push(acc);
        if k == steps {
            break;
        }
        let (k1y, k1v) = (vc, acc);
        let (k2y, k2v) = rhs(x + 0.5 * h, yc + 0.5 * h * k1y, vc + 0.5 * h * k1v)?;
        let (k3y, k3v) = rhs(x + 0.5 * h, yc + 0.5 * h * k2y, vc + 0.5 * h * k2v)?;
        let (k4y, k4v) = rhs(x + h, yc + h * k3y, vc + h * k3v)?;
        yc += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        vc += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    Ok(OdeSolution { x0: interval.lo, h, y, dy, ddy, p: p.clone(), q: q.clone() })
}

fn hermite(t: f64, h: f64, f0: f64, f1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1
}

impl OdeSolution {
    pub fn interval(&self) -> Interval {
        Interval::new(self.x0, self.x0 + self.h * (self.y.len() - 1) as f64)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.y.len()).map(move |k| (self.x0 + k as f64 * self.h, self.y[k], self.dy[k]))
    }

    /// `(φ, φ', φ'')` at `x`; `φ''` comes from the equation itself.
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64), SeparationError> {
        let iv = self.interval();
        let slack = 1e-12 * (1.0 + iv.width());
        if x < iv.lo - slack || x > iv.hi + slack {
            return Err(SeparationError::OutsideSolution { at: x, lo: iv.lo, hi: iv.hi });
        }
        let last = self.y.len() - 2;
        let s = ((x - self.x0) / self.h).clamp(0.0, (last + 1) as f64);
        let k = (s.floor() as usize).min(last);
        let t = s - k as f64;
        let phi = hermite(t, self.h, self.y[k], self.y[k + 1], self.dy[k], self.dy[k + 1]);
        let dphi = hermite(t, self.h, self.dy[k], self.dy[k + 1], self.ddy[k], self.ddy[k + 1]);
        let (pv, qv) = coefficients(&self.p, &self.q, x)?;
        Ok((phi, dphi, -pv * dphi - qv * phi))
    }
}

/// Where a separated factor `φ_i` comes from.
#[derive(Debug, Clone)]
pub enum PhiSource {
    /// A closed form in one variable; derivatives come from its jet.
    Closed(ScalarField),
    Ode(OdeSolution),
}

impl PhiSource {
    pub fn eval(&self, x: f64) -> Result<(f64, f64, f64), SeparationError> {
        match self {
            PhiSource::Closed(f) => {
                let j = f.eval_jet(&[x], 2)?;
                Ok((j.value(), j.d(0), j.d2(0, 0)))
            }
            PhiSource::Ode(s) => s.eval(x),
        }
    }
}
