//! Rational identities: Bôcher–Ushveridze sums, Euler–Poisson–Darboux
//! solutions, Stäckel assembly and coordinate-map pullbacks.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{EvalError, ScalarField};
use crate::jets::{self, Univariate};
use crate::metric::{DiagonalMetric, MetricError};
use crate::sampling::Interval;
use crate::separation::{Coefficient, SeparationError, SeparationSystem};
use crate::tolerance::{Extremum, Residual};

/// Minimum separation of arguments, relative to `max(1, max |x_i|)`.
pub const COINCIDENCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("arguments {i} and {j} coincide ({xi} vs {xj})")]
    Coincident { i: usize, j: usize, xi: f64, xj: f64 },
    #[error("{what}: expected {expected} entries, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("{what} must depend on a single variable")]
    NotUnivariate { what: String },
    #[error("the Stäckel matrix is singular at {at:?}")]
    Singular { at: Vec<f64> },
    #[error("Robertson condition violated: relative residual {residual:e}")]
    Robertson { residual: f64 },
    #[error("ordering λ¹ > b₁ > λ² > … > b_n violated at position {0}")]
    Ordering(usize),
    #[error("the map's Jacobian is singular at {at:?}")]
    SingularJacobian { at: Vec<f64> },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

fn distinct(x: &[f64]) -> Result<(), IdentityError> {
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            if (x[i] - x[j]).abs() <= COINCIDENCE * scale {
                return Err(IdentityError::Coincident { i, j, xi: x[i], xj: x[j] });
            }
        }
    }
    Ok(())
}

/// `Σ_i x_i^m / ∏_{j≠i}(x_i − x_j)` with the largest summand.
pub fn bocher_sum_scaled(x: &[f64], m: u32) -> Result<(f64, f64), IdentityError> {
    distinct(x)?;
    let mut total = 0.0;
    let mut largest = 0.0_f64;
    for (i, &xi) in x.iter().enumerate() {
        let den: f64 = x.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &xj)| xi - xj).product();
        let t = xi.powi(m as i32) / den;
        largest = largest.max(t.abs());
        total += t;
    }
    Ok((total, largest))
}

pub fn bocher_sum(x: &[f64], m: u32) -> Result<f64, IdentityError> {
    Ok(bocher_sum_scaled(x, m)?.0)
}

/// `σ_0, …, σ_n` of `x`.
pub fn elementary_symmetric(x: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; x.len() + 1];
    s[0] = 1.0;
    for (k, &v) in x.iter().enumerate() {
        for j in (1..=k + 1).rev() {
            s[j] += v * s[j - 1];
        }
    }
    s
}

/// The complete homogeneous symmetric polynomial of degree `d`, which is the
/// Bôcher–Ushveridze sum with exponent `d + n − 1`.
pub fn symmetric_f(x: &[f64], d: u32) -> Result<f64, IdentityError> {
    let s = elementary_symmetric(x);
    let sigma = |k: usize| s.get(k).copied().unwrap_or(0.0);
    match d {
        0 => Ok(1.0),
        1 => Ok(sigma(1)),
        2 => Ok(sigma(1).powi(2) - sigma(2)),
        3 => Ok(sigma(1).powi(3) - 2.0 * sigma(1) * sigma(2) + sigma(3)),
        _ => bocher_sum(x, d + x.len() as u32 - 1),
    }
}

/// `M(x) = Σ_i m_i(x_i) / ∏_{j≠i}(x_i − x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpdSolution {
    pub generators: Vec<ScalarField>,
}

impl EpdSolution {
    pub fn new(generators: Vec<ScalarField>) -> Result<EpdSolution, IdentityError> {
        for (i, g) in generators.iter().enumerate() {
            if g.arity() != 1 {
                return Err(IdentityError::NotUnivariate { what: format!("m_{}", i + 1) });
            }
        }
        Ok(EpdSolution { generators })
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, IdentityError> {
        if x.len() != self.dim() {
            return Err(IdentityError::Shape { what: "point", expected: self.dim(), got: x.len() });
        }
        distinct(x)?;
        let mut total = 0.0;
        for (i, g) in self.generators.iter().enumerate() {
            let den: f64 = (0..x.len()).filter(|&j| j != i).map(|j| x[i] - x[j]).product();
            total += g.eval(&[x[i]])? / den;
        }
        Ok(total)
    }

    /// `M` as a field over `coords`.
    pub fn field(&self, coords: &Arc<[String]>) -> ScalarField {
        let n = self.dim();
        let x: Vec<ScalarField> = (0..n).map(|i| ScalarField::coordinate(i, coords)).collect();
        let terms: Vec<ScalarField> = (0..n)
            .map(|i| {
                let diffs: Vec<ScalarField> = (0..n).filter(|&j| j != i).map(|j| &x[i] - &x[j]).collect();
                let num = self.generators[i].embed(coords, i);
                match ScalarField::product(&diffs) {
                    Some(den) => &num / &den,
                    None => num,
                }
            })
            .collect();
        ScalarField::sum(&terms).expect("at least one generator")
    }
}

/// Worst pair of `(x_i − x_j) M_{,ij} − M_{,i} + M_{,j}`.
pub fn epd_residual(m: &ScalarField, x: &[f64]) -> Result<Residual, IdentityError> {
    distinct(x)?;
    let j = m.eval_jet(x, 2)?;
    let mut worst = Residual::new(0.0, []);
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let cross = (x[a] - x[b]) * j.d2(a, b);
            let r = Residual::new(cross - j.d(a) + j.d(b), [cross, j.d(a), j.d(b)]);
            if r.relative() > worst.relative() || r.relative().is_nan() {
                worst = r;
            }
        }
    }
    Ok(worst)
}

/// A Stäckel matrix `q_ij(u^i)` with the data of its separation equations.
#[derive(Debug, Clone, PartialEq)]
pub struct StackelForm {
    pub coords: Arc<[String]>,
    /// Row `i` holds univariate fields in `u^i`.
    pub q: Vec<Vec<ScalarField>>,
    pub f: Vec<ScalarField>,
    pub v: Option<Vec<ScalarField>>,
    pub k2: f64,
    /// `k_2, …, k_n`.
    pub k: Vec<f64>,
    pub domain: Vec<Interval>,
    pub guards: Vec<ScalarField>,
}

/// Output of [`stackel_assemble`].
#[derive(Debug, Clone)]
pub struct StackelAssembly {
    pub metric: Arc<DiagonalMetric>,
    pub system: SeparationSystem,
    pub determinant: ScalarField,
    /// `Q_i1` as fields.
    pub cofactors: Vec<ScalarField>,
    /// `h / det q − ∏ f_i`.
    pub robertson: Extremum,
    /// `∂_i Q_i1`, relative to `Q_i1`.
    pub cofactor_independence: Extremum,
}

fn determinant(m: &[Vec<ScalarField>]) -> ScalarField {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let terms: Vec<ScalarField> = (0..n)
        .map(|i| {
            let t = &m[i][0] * &determinant(&minor(m, i, 0));
            if i % 2 == 1 { -&t } else { t }
        })
        .collect();
    ScalarField::sum(&terms).expect("non-empty matrix")
}

fn minor(m: &[Vec<ScalarField>], row: usize, col: usize) -> Vec<Vec<ScalarField>> {
    m.iter()
        .enumerate()
        .filter(|&(i, _)| i != row)
        .map(|(_, r)| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// `ds² = det q Σ (du^i)² / Q_i1`, with the separation system
/// `p_i = f_i'/f_i`, `q_i = k² q_i1 + Σ_j k_j q_ij − v_i`, and the
/// Robertson check `h / det q = ∏ f_i` at `samples` points.
pub fn stackel_assemble(s: &StackelForm, samples: usize, seed: u64, tol: f64) -> Result<StackelAssembly, IdentityError> {
    let n = s.coords.len();
    if s.q.len() != n {
        return Err(IdentityError::Shape { what: "Stäckel rows", expected: n, got: s.q.len() });
    }
    if s.f.len() != n {
        return Err(IdentityError::Shape { what: "f", expected: n, got: s.f.len() });
    }
    if s.k.len() + 1 != n {
        return Err(IdentityError::Shape { what: "k_j", expected: n - 1, got: s.k.len() });
    }
    for (i, row) in s.q.iter().enumerate() {
        if row.len() != n {
            return Err(IdentityError::Shape { what: "Stäckel columns", expected: n, got: row.len() });
        }
        if let Some(j) = row.iter().position(|e| e.arity() != 1) {
            return Err(IdentityError::NotUnivariate { what: format!("q_{}{}", i + 1, j + 1) });
        }
    }
    if let Some(v) = &s.v {
        if v.len() != n {
            return Err(IdentityError::Shape { what: "v", expected: n, got: v.len() });
        }
    }
    let embedded: Vec<Vec<ScalarField>> =
        s.q.iter().enumerate().map(|(i, row)| row.iter().map(|e| e.embed(&s.coords, i)).collect()).collect();
    let det = determinant(&embedded);
    let cofactors: Vec<ScalarField> = (0..n)
        .map(|i| {
            let c = if n == 1 { ScalarField::constant(1.0, &s.coords) } else { determinant(&minor(&embedded, i, 0)) };
            if i % 2 == 1 { -&c } else { c }
        })
        .collect();
    let centre: Vec<f64> = s.domain.iter().map(|iv| iv.mid()).collect();
    let det_c = det.eval(&centre)?;
    if det_c.abs() <= jets::DOMAIN_GUARD {
        return Err(IdentityError::Singular { at: centre });
    }
    let mut signature = Vec::with_capacity(n);
    let mut lame = Vec::with_capacity(n);
    for c in &cofactors {
        let ratio = &det / c;
        let sign: i8 = if ratio.eval(&centre)? < 0.0 { -1 } else { 1 };
        signature.push(sign);
        lame.push(ratio.scale(sign as f64).apply(Univariate::Sqrt));
    }
    let metric = Arc::new(DiagonalMetric::new(s.coords.clone(), signature, lame, s.domain.clone(), s.guards.clone())?);
    let points = metric.sample(samples, seed)?;

    let product_f = ScalarField::product(s.f.iter().enumerate().map(|(i, f)| f.embed(&s.coords, i)).collect::<Vec<_>>().iter())
        .expect("n >= 1");
    let weight = ScalarField::product(metric.lame()).expect("n >= 1");
    let robertson = extremum(&points, |p| {
        let h = weight.eval(p)?;
        let d = det.eval(p)?;
        if d.abs() <= jets::DOMAIN_GUARD {
            return Err(IdentityError::Singular { at: p.to_vec() });
        }
        let pf = product_f.eval(p)?;
        Ok(Residual::new(h / d - pf, [h / d, pf]))
    })?;
    if !robertson.passes(tol) {
        return Err(IdentityError::Robertson { residual: robertson.max_relative });
    }
    let cofactor_independence = extremum(&points, |p| {
        let mut worst = Residual::new(0.0, []);
        for (i, c) in cofactors.iter().enumerate() {
            let j = c.eval_jet(p, 1)?;
            let r = Residual::new(j.d(i), [j.value()]);
            if r.relative() > worst.relative() {
                worst = r;
            }
        }
        Ok(worst)
    })?;

    let p = s.f.iter().map(|f| Coefficient::LogDerivative(f.clone())).collect();
    let q: Vec<ScalarField> = s
        .q
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut acc = row[0].scale(s.k2);
            for (kj, e) in s.k.iter().zip(&row[1..]) {
                acc = &acc + &e.scale(*kj);
            }
            match &s.v {
                Some(v) => &acc - &v[i],
                None => acc,
            }
        })
        .collect();
    let potential = s.v.as_ref().map(|v| {
        let terms: Vec<ScalarField> = v
            .iter()
            .enumerate()
            .map(|(i, vi)| {
                let h = &metric.lame()[i];
                let t = &vi.embed(&s.coords, i) / &(h * h);
                if metric.signature()[i] < 0 { -&t } else { t }
            })
            .collect();
        ScalarField::sum(&terms).expect("n >= 1")
    });
    let one = ScalarField::constant(1.0, &s.coords);
    let system = SeparationSystem::new(metric.clone(), one, p, q, potential, s.k2)?;
    Ok(StackelAssembly { metric, system, determinant: det, cofactors, robertson, cofactor_independence })
}

fn extremum(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<Residual, IdentityError> + Sync,
) -> Result<Extremum, IdentityError> {
    let rs: Vec<Residual> = points.par_iter().map(|p| f(p)).collect::<Result<_, _>>()?;
    let mut e = Extremum::default();
    for (p, r) in points.iter().zip(rs) {
        e.push(p, r);
    }
    Ok(e)
}

fn check_ordering(lambda: &[f64], b: &[f64]) -> Result<(), IdentityError> {
    if lambda.len() != b.len() {
        return Err(IdentityError::Shape { what: "b", expected: lambda.len(), got: b.len() });
    }
    let mut seq = Vec::with_capacity(2 * b.len());
    for (l, bi) in lambda.iter().zip(b) {
        seq.push(*l);
        seq.push(*bi);
    }
    match seq.windows(2).position(|w| w[0] <= w[1]) {
        Some(k) => Err(IdentityError::Ordering(k + 1)),
        None => Ok(()),
    }
}

/// Cartesian point for elliptic coordinates `λ` with parameters `b`,
/// taking positive roots.
pub fn elliptic_map(lambda: &[f64], b: &[f64]) -> Result<Vec<f64>, IdentityError> {
    check_ordering(lambda, b)?;
    Ok((0..b.len())
        .map(|i| {
            let num: f64 = lambda.iter().map(|l| l - b[i]).product();
            let den: f64 = (0..b.len()).filter(|&j| j != i).map(|j| b[j] - b[i]).product();
            (num / den).sqrt()
        })
        .collect())
}

/// [`elliptic_map`] as fields over `coords`, valid on the positive octant.
pub fn elliptic_map_fields(coords: &Arc<[String]>, b: &[f64]) -> Vec<ScalarField> {
    let n = b.len();
    (0..n)
        .map(|i| {
            let factors: Vec<ScalarField> = (0..n)
                .map(|j| &ScalarField::coordinate(j, coords) - &ScalarField::constant(b[i], coords))
                .collect();
            let den: f64 = (0..n).filter(|&j| j != i).map(|j| b[j] - b[i]).product();
            ScalarField::product(&factors).expect("n >= 1").scale(1.0 / den).apply(Univariate::Sqrt)
        })
        .collect()
}

/// The map `λ ↦ (t, x, y)` taking the three-dimensional pseudo-Euclidean
/// metric `dσ²` to `−dt² + dx² + dy²`.
pub fn kalnins_miller_map(coords: &Arc<[String]>) -> Vec<ScalarField> {
    let parse = |s: &str| {
        let names: Vec<&str> = coords.iter().map(String::as_str).collect();
        ScalarField::parse(s, &names, &[]).expect("fixed expression")
    };
    let (l1, l2, l3) = (&coords[0], &coords[1], &coords[2]);
    let sum = format!("({l1} + {l2} + {l3})");
    let cubic = format!("({l1} + {l2} - {l3})*({l1} - {l2} + {l3})*({l1} - {l2} - {l3})");
    vec![
        parse(&format!("{sum}/9 - 9/16*{cubic}")),
        parse(&format!("{sum}/9 + 9/16*{cubic}")),
        parse(&format!("({l1} + {l2} - {l3})^2/4 - {l1}*{l2}")),
    ]
}

/// Largest entry of `Jᵀ G_target J − G_source` at `point`, scaled by the
/// largest entry compared.
pub fn pullback_residual(
    map: &[ScalarField],
    source: &DiagonalMetric,
    target: &DiagonalMetric,
    point: &[f64],
) -> Result<Residual, IdentityError> {
    let n = source.dim();
    if map.len() != target.dim() {
        return Err(IdentityError::Shape { what: "map components", expected: target.dim(), got: map.len() });
    }
    let image: Vec<jets::Jet> = map.iter().map(|f| f.eval_jet(point, 1)).collect::<Result<_, _>>()?;
    let x: Vec<f64> = image.iter().map(|j| j.value()).collect();
    let jac = DMatrix::from_fn(map.len(), n, |a, i| image[a].d(i));
    if map.len() == n && jac.determinant().abs() <= jets::DOMAIN_GUARD {
        return Err(IdentityError::SingularJacobian { at: point.to_vec() });
    }
    let mut g = DMatrix::zeros(map.len(), map.len());
    for a in 0..map.len() {
        let h = target.lame()[a].eval(&x)?;
        g[(a, a)] = target.signature()[a] as f64 * h * h;
    }
    let pulled = jac.transpose() * g * &jac;
    let mut raw = 0.0_f64;
    let mut largest = 0.0_f64;
    for i in 0..n {
        let gi = source.lame()[i].eval(point)?;
        for j in 0..n {
            let src = if i == j { source.signature()[i] as f64 * gi * gi } else { 0.0 };
            raw = raw.max((pulled[(i, j)] - src).abs());
            largest = largest.max(pulled[(i, j)].abs()).max(src.abs());
        }
    }
    Ok(Residual { raw, scale: 1.0 + largest })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uni(s: &str, c: &str) -> ScalarField {
        ScalarField::parse(s, &[c], &[]).unwrap()
    }

    #[test]
    fn bocher_examples() {
        assert!((bocher_sum(&[1.0, 2.0, 3.0], 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(bocher_sum(&[1.0, 2.0, 3.0], 0).unwrap().abs() < 1e-15);
        assert!((bocher_sum(&[1.0, 2.0, 3.0], 3).unwrap() - 6.0).abs() < 1e-13);
        assert!((bocher_sum(&[5.0, -2.0], 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(bocher_sum(&[1.0, 1.0], 0), Err(IdentityError::Coincident { .. })));
    }

    #[test]
    fn symmetric_examples() {
        assert_eq!(symmetric_f(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), 10.0);
        assert_eq!(symmetric_f(&[1.0, 2.0], 2).unwrap(), 7.0);
        assert_eq!(symmetric_f(&[1.0, 2.0, 3.0], 3).unwrap(), 90.0);
        assert!((bocher_sum(&[1.0, 2.0, 3.0], 5).unwrap() - 90.0).abs() < 1e-11);
        // h_4(1, 2) = 1 + 2 + 4 + 8 + 16
        assert!((symmetric_f(&[1.0, 2.0], 4).unwrap() - 31.0).abs() < 1e-12);
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn epd_examples() {
        let coords: Arc<[String]> = Arc::from(vec!["x".into(), "y".into(), "z".into()]);
        let sum = ScalarField::parse("x + y + z", &["x", "y", "z"], &[]).unwrap();
        assert_eq!(epd_residual(&sum, &[1.0, 2.0, 3.5]).unwrap().raw, 0.0);
        let sq = EpdSolution::new(vec![uni("t^2", "t"), uni("t^2", "t"), uni("t^2", "t")]).unwrap();
        assert!((sq.eval(&[0.3, 1.7, -2.0]).unwrap() - 1.0).abs() < 1e-13);
        let cubic =
            EpdSolution::new(vec![uni("t^3 - t", "t"), uni("2*t^2 + 1", "t"), uni("-t^3 + 4", "t")]).unwrap();
        let m = cubic.field(&coords);
        let pt = [0.4, 1.9, -1.1];
        assert!((m.eval(&pt).unwrap() - cubic.eval(&pt).unwrap()).abs() < 1e-12);
        assert!(epd_residual(&m, &pt).unwrap().relative() < 1e-12);
        let not_epd = ScalarField::parse("x*y*y + z", &["x", "y", "z"], &[]).unwrap();
        assert!(epd_residual(&not_epd, &pt).unwrap().relative() > 1e-2);
    }

    fn polar() -> StackelForm {
        let coords: Arc<[String]> = Arc::from(vec!["r".into(), "t".into()]);
        StackelForm {
            coords,
            q: vec![vec![uni("1", "r"), uni("-r^-2", "r")], vec![uni("0", "t"), uni("1", "t")]],
            f: vec![uni("r", "r"), uni("1", "t")],
            v: None,
            k2: 0.0,
            k: vec![0.0],
            domain: vec![Interval::new(0.5, 2.0), Interval::new(0.0, 6.0)],
            guards: vec![],
        }
    }

    #[test]
    fn polar_stackel() {
        let a = stackel_assemble(&polar(), 50, 1, 1e-12).unwrap();
        let pt = [1.5, 0.3];
        assert!((a.metric.lame()[0].eval(&pt).unwrap() - 1.0).abs() < 1e-14);
        assert!((a.metric.lame()[1].eval(&pt).unwrap() - 1.5).abs() < 1e-14);
        assert!(a.robertson.max_relative <= 1e-12);
        assert!(a.cofactor_independence.passes(1e-14));
        let mut bad = polar();
        bad.f[0] = uni("r^2", "r");
        assert!(matches!(stackel_assemble(&bad, 50, 1, 1e-10), Err(IdentityError::Robertson { .. })));
    }

    #[test]
    fn identity_stackel_is_euclidean() {
        let mut s = polar();
        // The identity matrix has Q_21 = 0; this constant matrix gives the
        // Cartesian metric instead.
        s.q = vec![vec![uni("0.5", "r"), uni("0.5", "r")], vec![uni("0.5", "t"), uni("-0.5", "t")]];
        s.f = vec![uni("-2", "r"), uni("1", "t")];
        s.k2 = 2.0;
        s.k = vec![0.5];
        let a = stackel_assemble(&s, 20, 1, 1e-12).unwrap();
        for h in a.metric.lame() {
            assert_eq!(h.eval(&[1.0, 1.0]).unwrap(), 1.0);
        }
        assert_eq!(a.metric.signature(), &[1, 1]);
        assert_eq!(a.system.q[0].eval(&[1.0]).unwrap(), 1.25);
        assert_eq!(a.system.q[1].eval(&[1.0]).unwrap(), 0.75);
    }

    #[test]
    fn elliptic_plane() {
        let coords: Arc<[String]> = Arc::from(vec!["l1".into(), "l2".into()]);
        let b = [1.0, 0.0];
        let x = elliptic_map(&[2.0, 0.5], &b).unwrap();
        // x² = (2 − 1)(0.5 − 1)/(0 − 1), y² = 2 · 0.5 / (1 − 0)
        assert!((x[0] * x[0] - 0.5).abs() < 1e-14 && (x[1] * x[1] - 1.0).abs() < 1e-14);
        assert!(matches!(elliptic_map(&[0.5, 2.0], &b), Err(IdentityError::Ordering(_))));
        let map = elliptic_map_fields(&coords, &b);
        let cart: Arc<[String]> = Arc::from(vec!["x".into(), "y".into()]);
        let one = ScalarField::constant(1.0, &cart);
        let dom = vec![Interval::new(-5.0, 5.0), Interval::new(-5.0, 5.0)];
        let euclid = DiagonalMetric::riemannian(cart, vec![one.clone(), one], dom, vec![]).unwrap();
        let lame: Vec<ScalarField> = ["sqrt((l1 - l2)/(4*(l1 - 1)*l1))", "sqrt((l1 - l2)/(4*(1 - l2)*l2))"]
            .iter()
            .map(|s| ScalarField::parse(s, &["l1", "l2"], &[]).unwrap())
            .collect();
        let dom = vec![Interval::new(1.2, 3.0), Interval::new(0.1, 0.9)];
        let ell = DiagonalMetric::riemannian(coords, lame, dom, vec![]).unwrap();
        for p in ell.sample(50, 5).unwrap() {
            assert!(pullback_residual(&map, &ell, &euclid, &p).unwrap().raw <= 1e-10);
        }
    }
}
