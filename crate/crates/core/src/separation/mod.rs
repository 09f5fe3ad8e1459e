//! The R-equation, its separation ODEs and product-solution checks.

mod ode;
mod solve;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

pub use ode::{integrate_ode, OdeSolution, PhiSource, DEFAULT_STEPS};
pub use solve::{solve_q, FamilyMatch, QAnsatz, QSolution, NULLSPACE_THRESHOLD};

use crate::expr::{EvalError, ScalarField};
use crate::jets::Jet;
use crate::metric::{DiagonalMetric, MetricError};
use crate::tolerance::{Extremum, Residual};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeparationError {
    #[error("ODE coefficients are singular or undefined at x = {at}")]
    Singular { at: f64 },
    #[error("x = {at} lies outside the integrated interval [{lo}, {hi}]")]
    OutsideSolution { at: f64, lo: f64, hi: f64 },
    #[error("{what}: expected {expected} entries, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("{what} must depend on a single variable")]
    NotUnivariate { what: String },
    #[error("ansatz basis on axis {} is empty", .0 + 1)]
    EmptyBasis(usize),
    #[error("{got} collocation points supplied, at least {needed} needed")]
    TooFewPoints { got: usize, needed: usize },
    #[error("collocation row at {at:?} is not finite")]
    NonFinite { at: Vec<f64> },
    #[error("the energy shift starts from a Laplace system (k² = 0, V = 0)")]
    NotLaplace,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A first-derivative coefficient `p_i(u^i)` of a separation ODE.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Field(ScalarField),
    /// `f'/f` for the given univariate `f`.
    LogDerivative(ScalarField),
}

impl Coefficient {
    pub fn value(&self, x: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Field(f) => f.eval(&[x]),
            Coefficient::LogDerivative(f) => {
                let j = f.eval_jet(&[x], 1)?;
                Ok(j.d(0) / j.value())
            }
        }
    }

    fn field(&self) -> &ScalarField {
        match self {
            Coefficient::Field(f) | Coefficient::LogDerivative(f) => f,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Field(g) => write!(f, "{g}"),
            Coefficient::LogDerivative(g) => write!(f, "dlog({g})"),
        }
    }
}

/// `ψ = R ∏ φ_i(u^i)` with `φ_i'' + p_i φ_i' + q_i φ_i = 0` for
/// `Δψ + (k² − V)ψ = 0`.
#[derive(Debug, Clone)]
pub struct SeparationSystem {
    pub metric: Arc<DiagonalMetric>,
    pub r: ScalarField,
    pub p: Vec<Coefficient>,
    pub q: Vec<ScalarField>,
    pub potential: Option<ScalarField>,
    pub k2: f64,
    /// Sign of `f_i²`, used when reporting `s_i = f_i² q_i`.
    pub f2_sign: Vec<i8>,
}

impl SeparationSystem {
    pub fn new(
        metric: Arc<DiagonalMetric>,
        r: ScalarField,
        p: Vec<Coefficient>,
        q: Vec<ScalarField>,
        potential: Option<ScalarField>,
        k2: f64,
    ) -> Result<SeparationSystem, SeparationError> {
        let n = metric.dim();
        if p.len() != n {
            return Err(SeparationError::Shape { what: "p", expected: n, got: p.len() });
        }
        if q.len() != n {
            return Err(SeparationError::Shape { what: "q", expected: n, got: q.len() });
        }
        for (i, c) in p.iter().enumerate() {
            if c.field().arity() != 1 {
                return Err(SeparationError::NotUnivariate { what: format!("p_{}", i + 1) });
            }
        }
        for (i, c) in q.iter().enumerate() {
            if c.arity() != 1 {
                return Err(SeparationError::NotUnivariate { what: format!("q_{}", i + 1) });
            }
        }
        for f in std::iter::once(&r).chain(potential.as_ref()) {
            if f.coordinates() != metric.coords() {
                return Err(MetricError::Coordinates { field: f.to_string() }.into());
            }
        }
        Ok(SeparationSystem { metric, r, p, q, potential, k2, f2_sign: vec![1; n] })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn potential_at(&self, point: &[f64]) -> Result<f64, EvalError> {
        match &self.potential {
            Some(v) => v.eval(point),
            None => Ok(0.0),
        }
    }

    /// Replaces `q` by new one-variable fields.
    pub fn with_q(&self, q: Vec<ScalarField>) -> Result<SeparationSystem, SeparationError> {
        let mut s = SeparationSystem::new(
            self.metric.clone(),
            self.r.clone(),
            self.p.clone(),
            q,
            self.potential.clone(),
            self.k2,
        )?;
        s.f2_sign = self.f2_sign.clone();
        Ok(s)
    }
}

/// `ΔR + (k² − V − Σ ε_i q_i / H_i²) R` at `point`.
pub fn r_equation_residual(sys: &SeparationSystem, point: &[f64]) -> Result<Residual, SeparationError> {
    let local = sys.metric.at(point, 2)?;
    let r = sys.r.eval_seeded(&local.vars, point)?;
    let (lap, largest) = local.laplacian(&r)?;
    let rv = r.value();
    let v = sys.potential_at(point)?;
    let mut terms = vec![lap, largest, sys.k2 * rv, v * rv];
    let mut total = lap + (sys.k2 - v) * rv;
    for i in 0..sys.dim() {
        let h = local.lame[i].value();
        let t = sys.metric.signature()[i] as f64 * sys.q[i].eval(&[point[i]])? / (h * h) * rv;
        terms.push(t);
        total -= t;
    }
    Ok(Residual::new(total, terms))
}

/// Worst R-equation residual over `points`.
pub fn r_equation_report(sys: &SeparationSystem, points: &[Vec<f64>]) -> Result<Extremum, SeparationError> {
    collect(points, |p| r_equation_residual(sys, p))
}

/// Worst mismatch between the declared `p_i` and `∂_i ln(R² h / H_i²)`.
pub fn p_residual(sys: &SeparationSystem, points: &[Vec<f64>]) -> Result<Extremum, SeparationError> {
    collect(points, |point| {
        let mut worst = Residual::new(0.0, []);
        for i in 0..sys.dim() {
            let expected = sys.metric.p_at(&sys.r, point, i)?;
            let declared = sys.p[i].value(point[i])?;
            let r = Residual::new(declared - expected, [declared, expected]);
            if r.relative() > worst.relative() || r.relative().is_nan() {
                worst = r;
            }
        }
        Ok(worst)
    })
}

fn collect(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<Residual, SeparationError> + Sync,
) -> Result<Extremum, SeparationError> {
    let parts: Vec<(usize, Residual)> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| f(p).map(|r| (k, r)))
        .collect::<Result<_, _>>()?;
    let mut e = Extremum::default();
    for (k, r) in parts {
        e.push(&points[k], r);
    }
    Ok(e)
}

/// Residual of `Δψ + (k² − V)ψ` for `ψ = R ∏ φ_i` at one point, scaled by
/// `1 + |k² − V||ψ| + largest Laplacian term`.
pub fn product_residual(
    sys: &SeparationSystem,
    sources: &[PhiSource],
    point: &[f64],
) -> Result<Residual, SeparationError> {
    let n = sys.dim();
    let local = sys.metric.at(point, 2)?;
    let mut psi = sys.r.eval_seeded(&local.vars, point)?;
    for (i, s) in sources.iter().enumerate() {
        let (y, dy, ddy) = s.eval(point[i])?;
        let phi = Jet::along_axis(n, 2, i, &[y, dy, ddy]).map_err(EvalError::from)?;
        psi = &psi * &phi;
    }
    let (lap, largest) = local.laplacian(&psi)?;
    let shift = (sys.k2 - sys.potential_at(point)?) * psi.value();
    Ok(Residual { raw: lap + shift, scale: 1.0 + shift.abs() + largest })
}

/// Worst product residual over `points`.
pub fn verify_product(
    sys: &SeparationSystem,
    sources: &[PhiSource],
    points: &[Vec<f64>],
) -> Result<Extremum, SeparationError> {
    if sources.len() != sys.dim() {
        return Err(SeparationError::Shape { what: "phi sources", expected: sys.dim(), got: sources.len() });
    }
    collect(points, |p| product_residual(sys, sources, p))
}

/// Integrates every separation ODE across the metric's domain, starting
/// from `(φ, φ')` at the lower end of each interval.
pub fn integrate_system(
    sys: &SeparationSystem,
    initial: &[(f64, f64)],
    steps: usize,
) -> Result<Vec<PhiSource>, SeparationError> {
    if initial.len() != sys.dim() {
        return Err(SeparationError::Shape { what: "initial data", expected: sys.dim(), got: initial.len() });
    }
    (0..sys.dim())
        .into_par_iter()
        .map(|i| {
            let q = Coefficient::Field(sys.q[i].clone());
            let (y0, dy0) = initial[i];
            integrate_ode(&sys.p[i], &q, sys.metric.domain()[i], y0, dy0, steps).map(PhiSource::Ode)
        })
        .collect()
}

/// Adds the potential `V = Σ ε_i v_i / H_i²` to a Laplace system and
/// replaces `q_i` by `q_i − v_i`.
pub fn fixed_energy_shift(sys: &SeparationSystem, v: &[ScalarField]) -> Result<SeparationSystem, SeparationError> {
    let n = sys.dim();
    if sys.k2 != 0.0 || sys.potential.as_ref().is_some_and(|p| p.as_constant() != Some(0.0)) {
        return Err(SeparationError::NotLaplace);
    }
    if v.len() != n {
        return Err(SeparationError::Shape { what: "v", expected: n, got: v.len() });
    }
    let coords = sys.metric.coords();
    let mut terms = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for (i, vi) in v.iter().enumerate() {
        if vi.arity() != 1 {
            return Err(SeparationError::NotUnivariate { what: format!("v_{}", i + 1) });
        }
        let h = &sys.metric.lame()[i];
        let t = &vi.embed(coords, i) / &(h * h);
        terms.push(if sys.metric.signature()[i] < 0 { -&t } else { t });
        q.push(&sys.q[i] - vi);
    }
    let potential = ScalarField::sum(&terms);
    let mut s = SeparationSystem::new(sys.metric.clone(), sys.r.clone(), sys.p.clone(), q, potential, 0.0)?;
    s.f2_sign = sys.f2_sign.clone();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Interval;

    const SPH: [&str; 3] = ["r", "theta", "phi"];

    fn uni(s: &str, c: &str) -> ScalarField {
        ScalarField::parse(s, &[c], &[]).unwrap()
    }

    fn spherical(alpha: f64, beta: f64) -> SeparationSystem {
        let lame: Vec<ScalarField> =
            ["1", "r", "r*sin(theta)"].iter().map(|s| ScalarField::parse(s, &SPH, &[]).unwrap()).collect();
        let dom = vec![Interval::new(0.5, 2.0), Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)];
        let m = DiagonalMetric::riemannian(lame[0].coordinates().clone(), lame, dom, vec![]).unwrap();
        let one = ScalarField::constant(1.0, m.coords());
        let p = vec![
            Coefficient::LogDerivative(uni("r^2", "r")),
            Coefficient::LogDerivative(uni("sin(theta)", "theta")),
            Coefficient::Field(uni("0", "phi")),
        ];
        let q = vec![
            uni(&format!("-{alpha}/r^2"), "r"),
            uni(&format!("{alpha} - {beta}/sin(theta)^2"), "theta"),
            uni(&format!("{beta}"), "phi"),
        ];
        SeparationSystem::new(Arc::new(m), one, p, q, None, 0.0).unwrap()
    }

    #[test]
    fn spherical_r_equation() {
        let s = spherical(2.0, 0.5);
        let pts = s.metric.sample(50, 3).unwrap();
        assert!(r_equation_report(&s, &pts).unwrap().passes(1e-10));
        assert!(p_residual(&s, &pts).unwrap().passes(1e-12));
        let off = s.with_q(vec![uni("-1/r^2", "r"), s.q[1].clone(), s.q[2].clone()]).unwrap();
        assert!(!r_equation_report(&off, &pts).unwrap().passes(1e-3));
    }

    #[test]
    fn newtonian_potential() {
        let s = spherical(0.0, 0.0);
        let src = vec![
            PhiSource::Closed(uni("1/r", "r")),
            PhiSource::Closed(uni("1", "theta")),
            PhiSource::Closed(uni("1", "phi")),
        ];
        let e = verify_product(&s, &src, &s.metric.grid(6)).unwrap();
        assert!(e.passes(1e-12), "{e:?}");
    }

    #[test]
    fn integrated_factors() {
        let s = spherical(2.0, 0.5);
        let src = integrate_system(&s, &[(1.0, 0.3), (0.5, -1.0), (1.0, 0.0)], DEFAULT_STEPS).unwrap();
        let e = verify_product(&s, &src, &s.metric.grid(8)).unwrap();
        assert!(e.passes(1e-6), "{e:?}");
    }

    #[test]
    fn coulomb_shift() {
        let s = spherical(2.0, 0.5);
        let v = vec![uni("-0.7/r", "r"), uni("0", "theta"), uni("0", "phi")];
        let shifted = fixed_energy_shift(&s, &v).unwrap();
        let pts = s.metric.sample(50, 9).unwrap();
        assert!(r_equation_report(&shifted, &pts).unwrap().passes(1e-10));
        let pt = [1.3, 1.0, 2.0];
        assert!((shifted.potential.as_ref().unwrap().eval(&pt).unwrap() + 0.7 / 1.3).abs() < 1e-14);
        assert!(matches!(fixed_energy_shift(&shifted, &v), Err(SeparationError::NotLaplace)));
    }

    #[test]
    fn zero_shift_is_identity() {
        let s = spherical(2.0, 0.5);
        let v = vec![uni("0", "r"), uni("0", "theta"), uni("0", "phi")];
        let shifted = fixed_energy_shift(&s, &v).unwrap();
        for pt in s.metric.sample(10, 1).unwrap() {
            for i in 0..3 {
                assert_eq!(shifted.q[i].eval(&[pt[i]]).unwrap(), s.q[i].eval(&[pt[i]]).unwrap());
            }
            assert_eq!(shifted.potential.as_ref().unwrap().eval(&pt).unwrap(), 0.0);
        }
    }
}
