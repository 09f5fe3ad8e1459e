//! Curvature diagnostics for diagonal metrics: Ricci tensor, Lamé equations,
//! the Cotton tensor and the Dupin conditions.
//!
//! The Ricci tensor is computed in the coordinate basis from Christoffel
//! symbols of `g_ii = ε_i H_i²`; the Lamé residuals are an independent route
//! to the same flatness verdict in three dimensions.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::ScalarField;
use crate::jets::{Jet, JetError};
use crate::metric::{DiagonalMetric, LocalMetric, MetricError};
use crate::sampling::{self, Interval};
use crate::tolerance::{Extremum, Residual};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("this check needs a three-dimensional metric, got n = {0}")]
    NotThreeDimensional(usize),
    #[error("the Lamé equations are stated for Riemannian signature")]
    Signature,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl From<JetError> for CurvatureError {
    fn from(e: JetError) -> Self {
        CurvatureError::Metric(e.into())
    }
}

fn require_three(m: &DiagonalMetric) -> Result<(), CurvatureError> {
    if m.dim() != 3 {
        return Err(CurvatureError::NotThreeDimensional(m.dim()));
    }
    Ok(())
}

fn accumulate(acc: &mut Option<Jet>, term: Jet) {
    *acc = Some(match acc.take() {
        None => term,
        Some(a) => &a + &term,
    });
}

/// Christoffel symbols `Γ^k_ij` of a diagonal metric, indexed `[k][i][j]`.
/// Structurally zero symbols are `None`.
struct Christoffel {
    n: usize,
    gamma: Vec<Option<Jet>>,
}

impl Christoffel {
    fn new(g: &[Jet]) -> Result<Christoffel, JetError> {
        let n = g.len();
        let ginv: Vec<Jet> = g.iter().map(|x| x.recip()).collect::<Result<_, _>>()?;
        let dg: Vec<Vec<Jet>> =
            g.iter().map(|x| (0..n).map(|l| x.derivative(l)).collect::<Result<Vec<_>, _>>()).collect::<Result<_, _>>()?;
        let mut gamma = vec![None; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // ½ g^kk (∂_i g_kj + ∂_j g_ki − ∂_k g_ij)
                    let mut acc: Option<Jet> = None;
                    if k == j {
                        accumulate(&mut acc, dg[k][i].clone());
                    }
                    if k == i {
                        accumulate(&mut acc, dg[k][j].clone());
                    }
                    if i == j {
                        accumulate(&mut acc, -&dg[i][k]);
                    }
                    gamma[(k * n + i) * n + j] = acc.map(|a| &a * &ginv[k] * 0.5);
                }
            }
        }
        Ok(Christoffel { n, gamma })
    }

    fn get(&self, k: usize, i: usize, j: usize) -> Option<&Jet> {
        self.gamma[(k * self.n + i) * self.n + j].as_ref()
    }

    fn value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.get(k, i, j).map_or(0.0, |g| g.value())
    }
}

/// Ricci components as jets two orders below `g`, plus the largest term.
fn ricci_jets(g: &[Jet]) -> Result<(Vec<Vec<Jet>>, f64), JetError> {
    let n = g.len();
    let order = g[0].order() - 2;
    let ch = Christoffel::new(g)?;
    let zero = g[0].truncate(order).constant_like(0.0);
    let mut largest = 0.0_f64;
    let mut ric = vec![vec![zero.clone(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = zero.clone();
            let mut add = |t: Jet, sign: f64| {
                largest = largest.max(t.value().abs());
                acc = &acc + &(t * sign);
            };
            for k in 0..n {
                if let Some(x) = ch.get(k, i, j) {
                    add(x.derivative(k)?, 1.0);
                }
                if let Some(x) = ch.get(k, i, k) {
                    add(x.derivative(j)?, -1.0);
                }
                for l in 0..n {
                    if let (Some(a), Some(b)) = (ch.get(k, k, l), ch.get(l, i, j)) {
                        add((a * b).truncate(order), 1.0);
                    }
                    if let (Some(a), Some(b)) = (ch.get(k, j, l), ch.get(l, i, k)) {
                        add((a * b).truncate(order), -1.0);
                    }
                }
            }
            ric[i][j] = acc.clone();
            ric[j][i] = acc;
        }
    }
    Ok((ric, largest))
}

/// Ricci tensor at one point with the size of its largest contributing term.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciAt {
    pub components: Vec<Vec<f64>>,
    pub scale: f64,
}

impl RicciAt {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn residual(&self) -> Residual {
        Residual { raw: self.max_abs(), scale: 1.0 + self.scale }
    }
}

fn local(m: &DiagonalMetric, point: &[f64], order: usize) -> Result<LocalMetric, CurvatureError> {
    Ok(m.at(point, order)?)
}

pub fn ricci(m: &DiagonalMetric, point: &[f64]) -> Result<RicciAt, CurvatureError> {
    let lm = local(m, point, 2)?;
    let (ric, scale) = ricci_jets(&lm.metric_diagonal())?;
    let components = ric.iter().map(|row| row.iter().map(|j| j.value()).collect()).collect();
    Ok(RicciAt { components, scale })
}

/// Residuals of the off-diagonal and diagonal Lamé equations, each with
/// the largest term that enters it.
#[derive(Debug, Clone, PartialEq)]
pub struct LameAt {
    pub off_diagonal: [Residual; 3],
    pub diagonal: [Residual; 3],
}

impl LameAt {
    pub fn worst(&self) -> Residual {
        self.off_diagonal
            .iter()
            .chain(&self.diagonal)
            .copied()
            .fold(Residual::new(0.0, []), |w, r| if r.relative() > w.relative() || r.relative().is_nan() { r } else { w })
    }
}

const TRIPLES: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 0, 2), (2, 0, 1)];
const PAIRS: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];

pub fn lame_residuals(m: &DiagonalMetric, point: &[f64]) -> Result<LameAt, CurvatureError> {
    require_three(m)?;
    if !m.is_riemannian() {
        return Err(CurvatureError::Signature);
    }
    let lm = local(m, point, 2)?;
    let h: Vec<f64> = lm.lame.iter().map(|x| x.value()).collect();
    let d = |a: usize, b: usize| lm.lame[a].d(b);
    let dd = |a: usize, b: usize, c: usize| lm.lame[a].d2(b, c);
    let off = TRIPLES.map(|(i, j, k)| {
        let t = [dd(i, j, k), -d(i, j) * d(j, k) / h[j], -d(i, k) * d(k, j) / h[k]];
        Residual::new(t.iter().sum(), t)
    });
    let diag = PAIRS.map(|(i, j, k)| {
        let t = [
            dd(j, i, i) / h[i],
            -d(j, i) * d(i, i) / (h[i] * h[i]),
            dd(i, j, j) / h[j],
            -d(i, j) * d(j, j) / (h[j] * h[j]),
            d(i, k) * d(j, k) / (h[k] * h[k]),
        ];
        Residual::new(t.iter().sum(), t)
    });
    Ok(LameAt { off_diagonal: off, diagonal: diag })
}

/// Cotton tensor `C_ijk = ∇_k S_ij − ∇_j S_ik` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CottonAt {
    /// Indexed `[i][j][k]`.
    pub components: Vec<Vec<Vec<f64>>>,
    pub scale: f64,
}

impl CottonAt {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn residual(&self) -> Residual {
        Residual { raw: self.max_abs(), scale: 1.0 + self.scale }
    }
}

pub fn cotton_york(m: &DiagonalMetric, point: &[f64]) -> Result<CottonAt, CurvatureError> {
    require_three(m)?;
    let n = 3;
    let lm = local(m, point, 3)?;
    let g = lm.metric_diagonal();
    let (ric, _) = ricci_jets(&g)?;
    let ch = Christoffel::new(&g)?;
    let g1: Vec<Jet> = g.iter().map(|x| x.truncate(1)).collect();
    let mut scalar = g1[0].constant_like(0.0);
    for i in 0..n {
        scalar = &scalar + &ric[i][i].checked_div(&g1[i])?;
    }
    let schouten: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { &ric[i][j] - &(&scalar * &g1[i] * 0.25) } else { ric[i][j].clone() })
                .collect()
        })
        .collect();
    let mut largest = 0.0_f64;
    let mut nabla = |k: usize, i: usize, j: usize| {
        let mut terms = vec![schouten[i][j].d(k)];
        for l in 0..n {
            terms.push(-ch.value(l, k, i) * schouten[l][j].value());
            terms.push(-ch.value(l, k, j) * schouten[i][l].value());
        }
        for t in &terms {
            largest = largest.max(t.abs());
        }
        terms.iter().sum::<f64>()
    };
    let mut c = vec![vec![vec![0.0; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                c[i][j][k] = nabla(k, i, j) - nabla(j, i, k);
            }
        }
    }
    Ok(CottonAt { components: c, scale: largest })
}

/// The six Dupin residuals `∂_j(H_i⁻¹ ∂_i ln H_j)` and principal curvatures
/// `k_ij = −H_i⁻¹ ∂_i ln H_j`, both indexed `[i][j]` with zero diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct DupinAt {
    pub residuals: [[Residual; 3]; 3],
    pub curvatures: [[f64; 3]; 3],
}

impl DupinAt {
    pub fn worst(&self) -> Residual {
        self.residuals
            .iter()
            .flatten()
            .copied()
            .fold(Residual::new(0.0, []), |w, r| if r.relative() > w.relative() || r.relative().is_nan() { r } else { w })
    }
}

pub fn dupin_residual(m: &DiagonalMetric, point: &[f64]) -> Result<DupinAt, CurvatureError> {
    require_three(m)?;
    let lm = local(m, point, 2)?;
    let h: Vec<f64> = lm.lame.iter().map(|x| x.value()).collect();
    let mut residuals = [[Residual::new(0.0, []); 3]; 3];
    let mut curvatures = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let (hi, hj) = (h[i], h[j]);
            let hji = lm.lame[j].d(i);
            curvatures[i][j] = -hji / (hi * hj);
            let t = [
                lm.lame[j].d2(i, j) / (hi * hj),
                -hji * lm.lame[i].d(j) / (hi * hi * hj),
                -hji * lm.lame[j].d(j) / (hi * hj * hj),
            ];
            residuals[i][j] = Residual::new(t.iter().sum(), t);
        }
    }
    Ok(DupinAt { residuals, curvatures })
}

/// Sample-based summaries of the curvature checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub ricci: Extremum,
    /// Present for Riemannian three-dimensional metrics.
    pub lame: Option<Extremum>,
    /// Present for three-dimensional metrics.
    pub cotton: Option<Extremum>,
    /// Largest asymmetry `|Ric_ij − Ric_ji|`.
    pub ricci_asymmetry: f64,
}

fn over_points<T: Send>(
    points: &[Vec<f64>],
    f: impl Fn(&[f64]) -> Result<T, CurvatureError> + Sync,
) -> Result<Vec<T>, CurvatureError> {
    points.par_iter().map(|p| f(p)).collect::<Vec<_>>().into_iter().collect()
}

fn fold(points: &[Vec<f64>], rs: impl IntoIterator<Item = Residual>) -> Extremum {
    let mut e = Extremum::default();
    for (p, r) in points.iter().zip(rs) {
        e.push(p, r);
    }
    e
}

pub fn curvature_report(m: &DiagonalMetric, points: &[Vec<f64>]) -> Result<CurvatureReport, CurvatureError> {
    let ric = over_points(points, |p| ricci(m, p))?;
    let ricci_asymmetry = ric
        .iter()
        .flat_map(|r| {
            let n = r.components.len();
            (0..n).flat_map(move |i| (0..n).map(move |j| (r.components[i][j] - r.components[j][i]).abs()))
        })
        .fold(0.0, f64::max);
    let ricci = fold(points, ric.iter().map(|r| r.residual()));
    let lame = if m.dim() == 3 && m.is_riemannian() {
        Some(fold(points, over_points(points, |p| lame_residuals(m, p))?.iter().map(|l| l.worst())))
    } else {
        None
    };
    let cotton = if m.dim() == 3 {
        Some(fold(points, over_points(points, |p| cotton_york(m, p))?.iter().map(|c| c.residual())))
    } else {
        None
    };
    Ok(CurvatureReport { ricci, lame, cotton, ricci_asymmetry })
}

pub fn dupin_report(m: &DiagonalMetric, points: &[Vec<f64>]) -> Result<Extremum, CurvatureError> {
    require_three(m)?;
    Ok(fold(points, over_points(points, |p| dupin_residual(m, p))?.iter().map(|d| d.worst())))
}

/// The two conditions for the cyclidic family to be flat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclidicFlatness {
    /// `p·a·b·c·d`.
    pub product: f64,
    /// `p²(abc + abd + acd + bcd) − 1`.
    pub symmetric: f64,
}

impl CyclidicFlatness {
    pub fn passes(&self) -> bool {
        self.product.abs() <= 1e-12 && self.symmetric.abs() <= 1e-12
    }
}

pub fn cyclidic_flatness_check(p: f64, a: f64, b: f64, c: f64, d: f64) -> CyclidicFlatness {
    CyclidicFlatness {
        product: p * a * b * c * d,
        symmetric: p * p * (a * b * c + a * b * d + a * c * d + b * c * d) - 1.0,
    }
}

/// Constants describing a three-dimensional Darboux metric: quadratic
/// `a_i = m_i u² + 2 n_i u + p_i`, generators `b_i(u)` and the flatness
/// constants `α_i, β_i, γ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DupinConstants {
    pub m: [f64; 3],
    pub n: [f64; 3],
    pub p: [f64; 3],
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    /// One-variable fields over a single coordinate.
    pub b: Vec<ScalarField>,
    /// Ranges of `u^1 > u^2 > u^3` used for sampling.
    pub domain: Vec<Interval>,
}

impl DupinConstants {
    pub fn a(&self, i: usize, u: f64) -> f64 {
        self.m[i] * u * u + 2.0 * self.n[i] * u + self.p[i]
    }

    /// `a_i` as one-variable fields.
    pub fn a_fields(&self) -> Vec<ScalarField> {
        let coords: Arc<[String]> = Arc::from(vec!["u".to_string()]);
        let u = ScalarField::coordinate(0, &coords);
        (0..3)
            .map(|i| {
                let c = |v: f64| ScalarField::constant(v, &coords);
                &(&(&c(self.m[i]) * &u.powf(2.0)) + &(&c(2.0 * self.n[i]) * &u)) + &c(self.p[i])
            })
            .collect()
    }

    /// Residual of the per-axis identity relating `b_i` to the constants.
    pub fn identity_residual(&self, i: usize, u: f64) -> Result<Residual, CurvatureError> {
        let b = self.b[i].eval(&[u]).map_err(MetricError::from)?;
        let (m, n, p) = (self.m[i], self.n[i], self.p[i]);
        let (al, be, ga) = (self.alpha[i], self.beta[i], self.gamma[i]);
        let t = [
            (n * n - m * p) * b * b,
            2.0 * ((be * m - al * n) * u + be * n - al * p) * b,
            (al * u + be).powi(2),
            ga * self.a(i, u),
        ];
        Ok(Residual::new(t.iter().sum(), t))
    }
}

/// Outcome of the constant sum rules and the per-axis identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxConstantReport {
    /// `Σm, Σn, Σp`.
    pub quadratic_sums: [f64; 3],
    /// `Σα, Σβ, Σγ`.
    pub flat_sums: [f64; 3],
    /// Per-axis maximum of the identity residual over a grid.
    pub identity: Vec<Extremum>,
}

impl DarbouxConstantReport {
    pub fn conformally_flat(&self) -> bool {
        self.quadratic_sums.iter().all(|s| s.abs() <= 1e-12)
    }

    pub fn flat(&self, tol: f64) -> bool {
        self.conformally_flat()
            && self.flat_sums.iter().all(|s| s.abs() <= 1e-12)
            && self.identity.iter().all(|e| e.passes(tol))
    }
}

pub fn darboux_constant_check(dc: &DupinConstants, grid: usize) -> Result<DarbouxConstantReport, CurvatureError> {
    let sum = |v: &[f64; 3]| v.iter().sum::<f64>();
    let mut identity = Vec::with_capacity(3);
    for i in 0..3 {
        let mut e = Extremum::default();
        for u in sampling::abscissae(dc.domain[i], grid) {
            e.push(&[u], dc.identity_residual(i, u)?);
        }
        identity.push(e);
    }
    Ok(DarbouxConstantReport {
        quadratic_sums: [sum(&dc.m), sum(&dc.n), sum(&dc.p)],
        flat_sums: [sum(&dc.alpha), sum(&dc.beta), sum(&dc.gamma)],
        identity,
    })
}

/// The metric with `H_i = 1 / (M |(u^i − u^j)(u^i − u^k)| √a_i)` on the
/// chamber `u^1 > u^2 > u^3`, where
/// `M = Σ_i b_i(u^i) / ∏_{j≠i} (u^i − u^j)`. Returns the metric and `M`.
pub fn darboux_metric(
    coords: &Arc<[String]>,
    a: &[ScalarField],
    b: &[ScalarField],
    domain: Vec<Interval>,
) -> Result<(DiagonalMetric, ScalarField), CurvatureError> {
    assert_eq!(coords.len(), 3);
    let u: Vec<ScalarField> = (0..3).map(|i| ScalarField::coordinate(i, coords)).collect();
    let diff = |i: usize, j: usize| &u[i] - &u[j];
    let (d12, d13, d23) = (diff(0, 1), diff(0, 2), diff(1, 2));
    let bf: Vec<ScalarField> = b.iter().enumerate().map(|(i, f)| f.embed(coords, i)).collect();
    let af: Vec<ScalarField> = a.iter().enumerate().map(|(i, f)| f.embed(coords, i)).collect();
    let m = &(&(&bf[0] / &(&d12 * &d13)) - &(&bf[1] / &(&d12 * &d23))) + &(&bf[2] / &(&d13 * &d23));
    let one = ScalarField::constant(1.0, coords);
    let sq = |f: &ScalarField| f.apply(crate::jets::Univariate::Sqrt);
    let lame = vec![
        &one / &(&(&m * &(&d12 * &d13)) * &sq(&af[0])),
        &one / &(&(&m * &(&d12 * &d23)) * &sq(&af[1])),
        &one / &(&(&m * &(&d13 * &d23)) * &sq(&af[2])),
    ];
    let metric = DiagonalMetric::riemannian(coords.clone(), lame, domain, vec![d12, d13, d23])?;
    Ok((metric, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(s: &str, c: &[&str]) -> ScalarField {
        ScalarField::parse(s, c, &[]).unwrap()
    }

    fn metric(lame: &[&str], coords: &[&str], dom: Vec<Interval>) -> DiagonalMetric {
        let l: Vec<ScalarField> = lame.iter().map(|s| field(s, coords)).collect();
        DiagonalMetric::riemannian(l[0].coordinates().clone(), l, dom, vec![]).unwrap()
    }

    fn spherical() -> DiagonalMetric {
        metric(
            &["1", "r", "r*sin(theta)"],
            &["r", "theta", "phi"],
            vec![Interval::new(0.5, 2.0), Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)],
        )
    }

    #[test]
    fn euclidean_is_flat_everywhere() {
        let m = metric(&["1", "1", "1"], &["x", "y", "z"], vec![Interval::new(-1.0, 1.0); 3]);
        let p = [0.1, 0.2, 0.3];
        assert_eq!(ricci(&m, &p).unwrap().max_abs(), 0.0);
        assert_eq!(cotton_york(&m, &p).unwrap().max_abs(), 0.0);
        assert_eq!(lame_residuals(&m, &p).unwrap().worst().raw, 0.0);
    }

    #[test]
    fn unit_sphere_has_unit_curvature() {
        let m = metric(&["1", "sin(u1)"], &["u1", "u2"], vec![Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)]);
        for p in m.sample(20, 3).unwrap() {
            let r = ricci(&m, &p).unwrap();
            assert!((r.components[0][0] - 1.0).abs() < 1e-12);
            assert!((r.components[1][1] - p[0].sin().powi(2)).abs() < 1e-12);
            assert!(r.components[0][1].abs() < 1e-12);
        }
    }

    #[test]
    fn spherical_is_flat_and_dupin() {
        let m = spherical();
        let pts = m.sample(30, 2).unwrap();
        let rep = curvature_report(&m, &pts).unwrap();
        assert!(rep.ricci.passes(1e-11), "{rep:?}");
        assert!(rep.lame.unwrap().passes(1e-11));
        assert!(rep.cotton.unwrap().passes(1e-11));
        assert!(dupin_report(&m, &pts).unwrap().passes(1e-11));
        let k = dupin_residual(&m, &pts[0]).unwrap().curvatures;
        assert!((k[0][1] + 1.0 / pts[0][0]).abs() < 1e-12);
    }

    #[test]
    fn needs_three_dimensions() {
        let m = metric(&["1", "1"], &["x", "y"], vec![Interval::new(-1.0, 1.0); 2]);
        assert_eq!(lame_residuals(&m, &[0.0, 0.0]).unwrap_err(), CurvatureError::NotThreeDimensional(2));
        assert!(cotton_york(&m, &[0.0, 0.0]).is_err());
        assert!(dupin_residual(&m, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn cyclidic_flatness_examples() {
        let (a, b, c) = (1.0_f64, 2.0, 4.0);
        assert!(cyclidic_flatness_check(1.0 / (a * b * c).sqrt(), a, b, c, 0.0).passes());
        let r = cyclidic_flatness_check(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(!r.passes() && r.product == 1.0);
        let r = cyclidic_flatness_check(0.0, 1.0, 2.0, 3.0, 4.0);
        assert!(!r.passes() && r.symmetric == -1.0);
    }

    #[test]
    fn darboux_constant_sum_rules() {
        let b = vec![field("u^2", &["u"]); 3];
        let dom = vec![Interval::new(1.7, 2.7), Interval::new(-0.6, 0.6), Interval::new(-2.5, -1.0)];
        let base = DupinConstants {
            m: [1.0, -1.0, 0.0],
            n: [0.0; 3],
            p: [0.0, 1.0, -1.0],
            alpha: [0.0; 3],
            beta: [0.0; 3],
            gamma: [0.0; 3],
            b: b.clone(),
            domain: dom.clone(),
        };
        let rep = darboux_constant_check(&base, 10).unwrap();
        assert!(rep.conformally_flat());
        assert_eq!(rep.flat_sums, [0.0; 3]);
        let bad = DupinConstants { m: [1.0, 0.0, 0.0], p: [0.0; 3], ..base };
        let rep = darboux_constant_check(&bad, 10).unwrap();
        assert!(!rep.conformally_flat());
        assert_eq!(rep.quadratic_sums[0], 1.0);
    }

    #[test]
    fn darboux_metric_off_diagonal_ricci_matches_epd() {
        let coords: Arc<[String]> = ["u1", "u2", "u3"].iter().map(|s| s.to_string()).collect();
        let a = vec![field("u^2+3", &["u"]), field("2-u^2/4", &["u"]), field("1+u^2/9", &["u"])];
        let b = vec![field("u^3+1", &["u"]), field("exp(u)", &["u"]), field("sin(u)+3", &["u"])];
        let dom = vec![Interval::new(1.7, 2.7), Interval::new(-0.6, 0.6), Interval::new(-2.5, -1.0)];
        let (m, mm) = darboux_metric(&coords, &a, &b, dom).unwrap();
        let pts = m.sample(20, 4).unwrap();
        for p in &pts {
            let r = ricci(&m, p).unwrap();
            let mj = mm.eval_jet(p, 2).unwrap();
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                let dx = p[i] - p[j];
                let epd = dx * mj.d2(i, j) - mj.d(i) + mj.d(j);
                let expect = epd / (mj.value() * dx);
                assert!((r.components[i][j] - expect).abs() <= 1e-9 * (1.0 + r.scale), "{p:?} {i}{j}");
            }
        }
    }
}
