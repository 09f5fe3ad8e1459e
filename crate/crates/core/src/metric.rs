//! Diagonal metrics, their isothermic and binary factorizations, the first
//! separability condition and the Laplace–Beltrami operator.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{EvalError, ScalarField};
use crate::jets::{self, Jet, JetError};
use crate::sampling::{self, Halton, Interval};
use crate::tolerance::{Extremum, Residual};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 6;

/// Guards must clear `GUARD_MARGIN * diameter` in absolute value.
pub const GUARD_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("dimension {0} is outside {MIN_DIM}..={MAX_DIM}")]
    Dimension(usize),
    #[error("{what}: expected {expected} entries, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("signature entries must be +1 or -1, got {0}")]
    Signature(i64),
    #[error("interval for `{0}` is empty or not finite")]
    Domain(String),
    #[error("`{field}` is defined over different coordinates than the metric")]
    Coordinates { field: String },
    #[error("H_{axis} = {value:e} is not positive at {point:?}")]
    NonPositive { axis: usize, value: f64, point: Vec<f64> },
    #[error("only {found} of {requested} admissible sample points found")]
    Sampling { requested: usize, found: usize },
    #[error("isothermic assembly needs n >= 3 (the exponent 2/(n-2) is singular)")]
    TwoDimensional,
    #[error("a two-dimensional binary form is only defined for R = 1")]
    TwoDimensionalBinary,
    #[error("p_{axis} varies by {variation:e} across the other coordinates near u = {at}")]
    NotSeparable { axis: usize, variation: f64, at: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<JetError> for MetricError {
    fn from(e: JetError) -> Self {
        MetricError::Eval(EvalError::Jet(e))
    }
}

/// `ds² = Σ ε_i H_i² (du^i)²` on a coordinate box.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    coords: Arc<[String]>,
    signature: Vec<i8>,
    lame: Vec<ScalarField>,
    domain: Vec<Interval>,
    guards: Vec<ScalarField>,
}

fn same_coords(f: &ScalarField, coords: &Arc<[String]>) -> Result<(), MetricError> {
    if **f.coordinates() != **coords {
        return Err(MetricError::Coordinates { field: f.to_string() });
    }
    Ok(())
}

impl DiagonalMetric {
    pub fn new(
        coords: Arc<[String]>,
        signature: Vec<i8>,
        lame: Vec<ScalarField>,
        domain: Vec<Interval>,
        guards: Vec<ScalarField>,
    ) -> Result<DiagonalMetric, MetricError> {
        let n = coords.len();
        if !(MIN_DIM..=MAX_DIM).contains(&n) {
            return Err(MetricError::Dimension(n));
        }
        for (what, got) in [("signature", signature.len()), ("Lamé coefficients", lame.len()), ("domain", domain.len())] {
            if got != n {
                return Err(MetricError::Shape { what, expected: n, got });
            }
        }
        if let Some(&s) = signature.iter().find(|s| s.abs() != 1) {
            return Err(MetricError::Signature(s as i64));
        }
        for (c, iv) in coords.iter().zip(&domain) {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(MetricError::Domain(c.clone()));
            }
        }
        for f in lame.iter().chain(&guards) {
            same_coords(f, &coords)?;
        }
        Ok(DiagonalMetric { coords, signature, lame, domain, guards })
    }

    /// Riemannian metric with all signs `+1`.
    pub fn riemannian(
        coords: Arc<[String]>,
        lame: Vec<ScalarField>,
        domain: Vec<Interval>,
        guards: Vec<ScalarField>,
    ) -> Result<DiagonalMetric, MetricError> {
        let n = coords.len();
        DiagonalMetric::new(coords, vec![1; n], lame, domain, guards)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &Arc<[String]> {
        &self.coords
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn is_riemannian(&self) -> bool {
        self.signature.iter().all(|&s| s == 1)
    }

    pub fn lame(&self) -> &[ScalarField] {
        &self.lame
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    pub fn guards(&self) -> &[ScalarField] {
        &self.guards
    }

    pub fn with_domain(&self, domain: Vec<Interval>) -> Result<DiagonalMetric, MetricError> {
        DiagonalMetric::new(self.coords.clone(), self.signature.clone(), self.lame.clone(), domain, self.guards.clone())
    }

    pub fn guard_margin(&self) -> f64 {
        GUARD_MARGIN * sampling::diameter(&self.domain)
    }

    fn clears_guards(&self, point: &[f64]) -> bool {
        let margin = self.guard_margin();
        self.guards.iter().all(|g| matches!(g.eval(point), Ok(v) if v.abs() > margin))
    }

    /// Guards clear their margin and every `H_i` evaluates to a positive value.
    pub fn admissible(&self, point: &[f64]) -> bool {
        self.clears_guards(point)
            && self.lame.iter().all(|h| matches!(h.eval(point), Ok(v) if v > jets::DOMAIN_GUARD && v.is_finite()))
    }

    /// `count` admissible quasi-random points; the stream is fixed by `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>, MetricError> {
        let budget = 64 * count + 1024;
        let pts: Vec<Vec<f64>> =
            Halton::new(&self.domain, seed).take(budget).filter(|p| self.admissible(p)).take(count).collect();
        if pts.len() < count {
            return Err(MetricError::Sampling { requested: count, found: pts.len() });
        }
        Ok(pts)
    }

    /// Admissible points of the cell-centred grid.
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        sampling::grid(&self.domain, per_axis).into_iter().filter(|p| self.admissible(p)).collect()
    }

    /// Checks `H_i > 0` at `count` points that clear the guards, surfacing
    /// the first evaluation failure.
    pub fn validate(&self, count: usize, seed: u64) -> Result<(), MetricError> {
        let pts = Halton::new(&self.domain, seed).take(64 * count + 1024).filter(|p| self.clears_guards(p)).take(count);
        for p in pts {
            for (axis, h) in self.lame.iter().enumerate() {
                let v = h.eval(&p)?;
                if !(v > jets::DOMAIN_GUARD) {
                    return Err(MetricError::NonPositive { axis, value: v, point: p });
                }
            }
        }
        Ok(())
    }

    /// Jets of the coordinates and of every `H_i` at `point`.
    pub fn at(&self, point: &[f64], order: usize) -> Result<LocalMetric, MetricError> {
        let vars = jets::seed(point, order)?;
        let lame = self.lame.iter().map(|h| h.eval_seeded(&vars, point)).collect::<Result<Vec<_>, _>>()?;
        Ok(LocalMetric { vars, lame, signature: self.signature.clone(), point: point.to_vec() })
    }

    /// `Δf` at `point`.
    pub fn laplace_beltrami(&self, field: &ScalarField, point: &[f64]) -> Result<f64, MetricError> {
        Ok(self.laplace_beltrami_scaled(field, point)?.0)
    }

    /// `Δf` with the magnitude of its largest contributing term.
    pub fn laplace_beltrami_scaled(&self, field: &ScalarField, point: &[f64]) -> Result<(f64, f64), MetricError> {
        let local = self.at(point, 2)?;
        let f = field.eval_seeded(&local.vars, point)?;
        local.laplacian(&f)
    }

    /// Maximum over `points` and pairs `i ≠ j` of `|∂_i∂_j ln(R² h / H_i²)|`.
    pub fn first_condition_residual(&self, r: &ScalarField, points: &[Vec<f64>]) -> Result<Extremum, MetricError> {
        same_coords(r, &self.coords)?;
        let per_point: Vec<Result<Residual, MetricError>> =
            points.par_iter().map(|p| self.first_condition_at(r, p)).collect();
        let mut out = Extremum::default();
        for (p, res) in points.iter().zip(per_point) {
            out.push(p, res?);
        }
        Ok(out)
    }

    fn first_condition_at(&self, r: &ScalarField, point: &[f64]) -> Result<Residual, MetricError> {
        let local = self.at(point, 2)?;
        let rj = r.eval_seeded(&local.vars, point)?;
        let ln_r = log_jet(&rj, point)?;
        let ln_h: Vec<Jet> = local.lame.iter().map(|h| log_jet(h, point)).collect::<Result<_, _>>()?;
        let n = self.dim();
        let mut worst = Residual::new(0.0, []);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut terms = vec![2.0 * ln_r.d2(i, j), -2.0 * ln_h[i].d2(i, j)];
                terms.extend(ln_h.iter().map(|l| l.d2(i, j)));
                let raw: f64 = terms.iter().sum();
                let res = Residual::new(raw, terms);
                if res.relative() > worst.relative() || res.relative().is_nan() {
                    worst = res;
                }
            }
        }
        Ok(worst)
    }

    /// `p_i = ∂_i ln(R² h / H_i²)` at a point.
    pub fn p_at(&self, r: &ScalarField, point: &[f64], axis: usize) -> Result<f64, MetricError> {
        let local = self.at(point, 1)?;
        let rj = r.eval_seeded(&local.vars, point)?;
        let mut v = 2.0 * rj.d(axis) / rj.value();
        for (k, h) in local.lame.iter().enumerate() {
            let w = if k == axis { -1.0 } else { 1.0 };
            v += w * h.d(axis) / h.value();
        }
        Ok(v)
    }

    /// Tabulates `p_i(u^i)` on `count` abscissae per axis, checking at each
    /// abscissa that `others` different choices of the remaining coordinates
    /// agree to `tol` relative.
    pub fn extract_p(
        &self,
        r: &ScalarField,
        count: usize,
        others: usize,
        seed: u64,
        tol: f64,
    ) -> Result<Vec<PTable>, MetricError> {
        same_coords(r, &self.coords)?;
        let mut tables = Vec::with_capacity(self.dim());
        for axis in 0..self.dim() {
            let us = sampling::abscissae(self.domain[axis], count);
            let mut values = Vec::with_capacity(count);
            for &u in &us {
                let mut seen = Vec::new();
                for mut p in Halton::new(&self.domain, seed.wrapping_add(axis as u64)).take(64 * others + 256) {
                    p[axis] = u;
                    if !self.admissible(&p) {
                        continue;
                    }
                    seen.push(self.p_at(r, &p, axis)?);
                    if seen.len() == others {
                        break;
                    }
                }
                if seen.is_empty() {
                    return Err(MetricError::Sampling { requested: others, found: 0 });
                }
                let lo = seen.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = seen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let scale = 1.0 + lo.abs().max(hi.abs());
                if !((hi - lo) / scale <= tol) {
                    return Err(MetricError::NotSeparable { axis, variation: hi - lo, at: u });
                }
                values.push(seen[0]);
            }
            tables.push(PTable { axis, u: us, p: values });
        }
        Ok(tables)
    }
}

fn log_jet(j: &Jet, point: &[f64]) -> Result<Jet, MetricError> {
    j.ln().map_err(|source| {
        MetricError::Eval(EvalError::Domain { expr: "ln".into(), point: point.to_vec(), source })
    })
}

/// Tabulated `p_i` along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct PTable {
    pub axis: usize,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

/// Coordinate jets and Lamé jets at one point.
#[derive(Debug, Clone)]
pub struct LocalMetric {
    pub vars: Vec<Jet>,
    pub lame: Vec<Jet>,
    pub signature: Vec<i8>,
    pub point: Vec<f64>,
}

impl LocalMetric {
    pub fn weight(&self) -> Jet {
        let mut h = self.lame[0].clone();
        for l in &self.lame[1..] {
            h = &h * l;
        }
        h
    }

    /// `g_ii = ε_i H_i²` as jets.
    pub fn metric_diagonal(&self) -> Vec<Jet> {
        self.lame.iter().zip(&self.signature).map(|(h, &s)| (h * h) * s as f64).collect()
    }

    fn fail(&self, source: JetError) -> MetricError {
        MetricError::Eval(EvalError::Domain { expr: "1/H".into(), point: self.point.clone(), source })
    }

    /// `Δf = h⁻¹ Σ_i ∂_i(ε_i h H_i⁻² ∂_i f)` from a jet of order ≥ 2, with the
    /// largest absolute term.
    pub fn laplacian(&self, f: &Jet) -> Result<(f64, f64), MetricError> {
        let n = self.lame.len();
        let h = self.weight().value();
        let mut total = 0.0;
        let mut largest = 0.0_f64;
        for i in 0..n {
            let mut others: Option<Jet> = None;
            for (k, hk) in self.lame.iter().enumerate() {
                if k != i {
                    others = Some(match others {
                        None => hk.clone(),
                        Some(o) => &o * hk,
                    });
                }
            }
            let others = others.unwrap_or_else(|| self.lame[i].constant_like(1.0));
            let a = others.checked_div(&self.lame[i]).map_err(|e| self.fail(e))?;
            let eps = self.signature[i] as f64;
            let t1 = eps * a.d(i) * f.d(i) / h;
            let t2 = eps * a.value() * f.d2(i, i) / h;
            largest = largest.max(t1.abs()).max(t2.abs());
            total += t1 + t2;
        }
        Ok((total, largest))
    }
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), MetricError> {
    if expected != got {
        return Err(MetricError::Shape { what, expected, got });
    }
    Ok(())
}

fn signs_ok(signs: &[i8]) -> Result<(), MetricError> {
    match signs.iter().find(|s| s.abs() != 1) {
        Some(&s) => Err(MetricError::Signature(s as i64)),
        None => Ok(()),
    }
}

/// Result of the syntactic and numeric independence checks of a form.
#[derive(Debug, Clone, PartialEq)]
pub struct Independence {
    /// Dependencies that appear in the expression text, as `(field, coordinate)`.
    pub syntactic: Vec<(String, String)>,
    /// Largest relative derivative along a forbidden direction.
    pub numeric: Extremum,
}

impl Independence {
    /// The numeric check is authoritative.
    pub fn passes(&self, tol: f64) -> bool {
        self.numeric.samples == 0 || self.numeric.passes(tol)
    }
}

/// Checks that `field` does not vary along `forbidden` axes.
fn independence(
    items: &[(String, &ScalarField, Vec<usize>)],
    points: &[Vec<f64>],
) -> Result<Independence, MetricError> {
    let mut syntactic = Vec::new();
    for (name, f, forbidden) in items {
        for a in f.free_axes() {
            if forbidden.contains(&a) {
                syntactic.push((name.clone(), f.coordinates()[a].clone()));
            }
        }
    }
    let mut numeric = Extremum::default();
    for p in points {
        let mut worst = Residual::new(0.0, []);
        for (_, f, forbidden) in items {
            if forbidden.is_empty() {
                continue;
            }
            let j = f.eval_jet(p, 1)?;
            for &a in forbidden {
                let r = Residual::new(j.d(a), [j.value()]);
                if r.relative() > worst.relative() {
                    worst = r;
                }
            }
        }
        numeric.push(p, worst);
    }
    Ok(Independence { syntactic, numeric })
}

/// `H_i = R^{2/(2-n)} (∏_k G_(k))^{1/(n-2)} / (G_(i) f_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsothermicForm {
    pub r: ScalarField,
    pub g: Vec<ScalarField>,
    /// Magnitudes `|f_i|`.
    pub f: Vec<ScalarField>,
    /// Sign of `f_i²`; it becomes the signature of the assembled metric.
    pub f2_sign: Vec<i8>,
}

impl IsothermicForm {
    pub fn new(r: ScalarField, g: Vec<ScalarField>, f: Vec<ScalarField>) -> IsothermicForm {
        let n = g.len();
        IsothermicForm { r, g, f, f2_sign: vec![1; n] }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    fn check_shape(&self) -> Result<(), MetricError> {
        let n = self.r.arity();
        check_len("G factors", n, self.g.len())?;
        check_len("f factors", n, self.f.len())?;
        check_len("f² signs", n, self.f2_sign.len())?;
        signs_ok(&self.f2_sign)?;
        for x in self.g.iter().chain(&self.f) {
            same_coords(x, self.r.coordinates())?;
        }
        Ok(())
    }

    /// The Lamé coefficients this form generates.
    pub fn lame(&self) -> Result<Vec<ScalarField>, MetricError> {
        self.check_shape()?;
        let n = self.dim();
        if n < 3 {
            return Err(MetricError::TwoDimensional);
        }
        let out = (0..n)
            .map(|i| {
                if n == 3 {
                    let num = ScalarField::product(self.g.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, g)| g))
                        .expect("two factors");
                    &num / &(&self.r.powf(2.0) * &self.f[i])
                } else {
                    let all = ScalarField::product(&self.g).expect("non-empty");
                    let pre = &self.r.powf(2.0 / (2.0 - n as f64)) * &all.powf(1.0 / (n as f64 - 2.0));
                    &pre / &(&self.g[i] * &self.f[i])
                }
            })
            .collect();
        Ok(out)
    }

    /// `G_(i)` must not depend on `u^i`; `f_i` must depend on `u^i` only.
    pub fn independence(&self, points: &[Vec<f64>]) -> Result<Independence, MetricError> {
        self.check_shape()?;
        let n = self.dim();
        let mut items = Vec::new();
        for i in 0..n {
            items.push((format!("G{}", i + 1), &self.g[i], vec![i]));
            items.push((format!("f{}", i + 1), &self.f[i], (0..n).filter(|&k| k != i).collect()));
        }
        independence(&items, points)
    }
}

pub fn assemble_isothermic(
    form: &IsothermicForm,
    domain: Vec<Interval>,
    guards: Vec<ScalarField>,
) -> Result<DiagonalMetric, MetricError> {
    let lame = form.lame()?;
    let m = DiagonalMetric::new(form.r.coordinates().clone(), form.f2_sign.clone(), lame, domain, guards)?;
    m.validate(32, 0)?;
    Ok(m)
}

/// Binary factorization with one `G_ij(u^i, u^j)` per pair `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryForm {
    pub r: ScalarField,
    /// Pairs in lexicographic order `(0,1), (0,2), …, (1,2), …`.
    pub pairs: Vec<ScalarField>,
    pub f: Vec<ScalarField>,
    pub f2_sign: Vec<i8>,
}

/// Position of pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl BinaryForm {
    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn pair(&self, i: usize, j: usize) -> &ScalarField {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        &self.pairs[pair_index(self.dim(), a, b)]
    }

    fn check_shape(&self) -> Result<(), MetricError> {
        let n = self.r.arity();
        check_len("f factors", n, self.f.len())?;
        check_len("G pairs", n * (n - 1) / 2, self.pairs.len())?;
        check_len("f² signs", n, self.f2_sign.len())?;
        signs_ok(&self.f2_sign)?;
        for x in self.pairs.iter().chain(&self.f) {
            same_coords(x, self.r.coordinates())?;
        }
        Ok(())
    }

    pub fn lame(&self) -> Result<Vec<ScalarField>, MetricError> {
        self.check_shape()?;
        let n = self.dim();
        if n == 2 && self.r.as_constant() != Some(1.0) {
            return Err(MetricError::TwoDimensionalBinary);
        }
        Ok((0..n)
            .map(|i| {
                let gs = ScalarField::product((0..n).filter(|&k| k != i).map(|k| self.pair(i, k))).expect("n >= 2");
                let pre = if n == 2 { gs } else { &self.r.powf(2.0 / (2.0 - n as f64)) * &gs };
                &pre / &self.f[i]
            })
            .collect())
    }

    /// `G_ij` may depend on `u^i, u^j` only.
    pub fn independence(&self, points: &[Vec<f64>]) -> Result<Independence, MetricError> {
        self.check_shape()?;
        let n = self.dim();
        let mut items = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let forbidden = (0..n).filter(|&k| k != i && k != j).collect();
                items.push((format!("G{}{}", i + 1, j + 1), self.pair(i, j), forbidden));
            }
            items.push((format!("f{}", i + 1), &self.f[i], (0..n).filter(|&k| k != i).collect()));
        }
        independence(&items, points)
    }

    /// The equivalent isothermic form, `G_(i) = ∏_{p,q ≠ i} G_pq`.
    pub fn to_isothermic(&self) -> Result<IsothermicForm, MetricError> {
        self.check_shape()?;
        let n = self.dim();
        if n < 3 {
            return Err(MetricError::TwoDimensional);
        }
        let g = (0..n)
            .map(|i| {
                let mut fs = Vec::new();
                for p in 0..n {
                    for q in p + 1..n {
                        if p != i && q != i {
                            fs.push(self.pair(p, q));
                        }
                    }
                }
                ScalarField::product(fs).expect("n >= 3")
            })
            .collect();
        Ok(IsothermicForm { r: self.r.clone(), g, f: self.f.clone(), f2_sign: self.f2_sign.clone() })
    }
}

pub fn assemble_binary(
    form: &BinaryForm,
    domain: Vec<Interval>,
    guards: Vec<ScalarField>,
) -> Result<DiagonalMetric, MetricError> {
    let lame = form.lame()?;
    let m = DiagonalMetric::new(form.r.coordinates().clone(), form.f2_sign.clone(), lame, domain, guards)?;
    m.validate(32, 0)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(s: &str, c: &[&str]) -> ScalarField {
        ScalarField::parse(s, c, &[]).unwrap()
    }

    const SPH: [&str; 3] = ["r", "theta", "phi"];
    const TOR: [&str; 3] = ["eta", "theta", "phi"];

    fn spherical() -> DiagonalMetric {
        let lame = ["1", "r", "r*sin(theta)"].iter().map(|s| field(s, &SPH)).collect();
        let dom = vec![Interval::new(0.5, 2.0), Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)];
        DiagonalMetric::riemannian(field("1", &SPH).coordinates().clone(), lame, dom, vec![]).unwrap()
    }

    fn toroidal_form() -> IsothermicForm {
        let f = |s: &str| field(s, &TOR);
        IsothermicForm::new(
            f("sqrt(cosh(eta)-cos(theta))"),
            vec![f("1"), f("sinh(eta)"), f("1")],
            vec![f("sinh(eta)"), f("1"), f("1")],
        )
    }

    fn toroidal_domain() -> Vec<Interval> {
        vec![Interval::new(0.5, 2.0), Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)]
    }

    #[test]
    fn spherical_from_isothermic_form() {
        let f = |s: &str| field(s, &SPH);
        let form = IsothermicForm::new(f("1"), vec![f("sin(theta)"), f("r"), f("r")], vec![f("r^2"), f("sin(theta)"), f("1")]);
        let m = assemble_isothermic(&form, spherical().domain().to_vec(), vec![]).unwrap();
        for p in m.sample(20, 1).unwrap() {
            let expect = [1.0, p[0], p[0] * p[1].sin()];
            for (h, e) in m.lame().iter().zip(expect) {
                assert!((h.eval(&p).unwrap() - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }
    }

    #[test]
    fn euclidean_from_unit_factors() {
        let f = |s: &str| field(s, &["x", "y", "z"]);
        let form = IsothermicForm::new(f("1"), vec![f("1"); 3], vec![f("1"); 3]);
        let dom = vec![Interval::new(-1.0, 1.0); 3];
        let m = assemble_isothermic(&form, dom, vec![]).unwrap();
        for h in m.lame() {
            assert_eq!(h.eval(&[0.3, 0.1, -0.2]).unwrap(), 1.0);
        }
    }

    #[test]
    fn toroidal_lame_coefficients() {
        let m = assemble_isothermic(&toroidal_form(), toroidal_domain(), vec![]).unwrap();
        for p in m.sample(50, 3).unwrap() {
            let d = p[0].cosh() - p[1].cos();
            let expect = [1.0 / d, 1.0 / d, p[0].sinh() / d];
            for (h, e) in m.lame().iter().zip(expect) {
                assert!((h.eval(&p).unwrap() - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }
    }

    #[test]
    fn two_dimensional_isothermic_rejected() {
        let f = |s: &str| field(s, &["x", "y"]);
        let form = IsothermicForm::new(f("1"), vec![f("1"); 2], vec![f("1"); 2]);
        assert_eq!(form.lame().unwrap_err(), MetricError::TwoDimensional);
    }

    #[test]
    fn first_condition_on_spherical_and_toroidal() {
        let m = spherical();
        let pts = m.sample(50, 42).unwrap();
        let e = m.first_condition_residual(&field("1", &SPH), &pts).unwrap();
        assert!(e.max_raw <= 1e-11, "{e:?}");

        let t = assemble_isothermic(&toroidal_form(), toroidal_domain(), vec![]).unwrap();
        let pts = t.sample(50, 42).unwrap();
        let e = t.first_condition_residual(&toroidal_form().r, &pts).unwrap();
        assert!(e.max_raw <= 1e-11, "{e:?}");
    }

    #[test]
    fn first_condition_negative_control() {
        let c = ["u1", "u2", "u3"];
        let lame = vec![field("1", &c), field("1", &c), field("exp(u1*u2)", &c)];
        let m = DiagonalMetric::riemannian(lame[0].coordinates().clone(), lame, vec![Interval::new(-1.0, 1.0); 3], vec![])
            .unwrap();
        let pts = m.sample(20, 5).unwrap();
        let e = m.first_condition_residual(&field("1", &c), &pts).unwrap();
        assert!((e.max_raw - 1.0).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn spherical_and_toroidal_p() {
        let m = spherical();
        let tabs = m.extract_p(&field("1", &SPH), 7, 5, 1, 1e-10).unwrap();
        for (u, p) in tabs[0].u.iter().zip(&tabs[0].p) {
            assert!((p - 2.0 / u).abs() < 1e-12);
        }
        for (u, p) in tabs[1].u.iter().zip(&tabs[1].p) {
            assert!((p - u.cos() / u.sin()).abs() < 1e-12);
        }
        assert!(tabs[2].p.iter().all(|p| p.abs() < 1e-12));

        let t = assemble_isothermic(&toroidal_form(), toroidal_domain(), vec![]).unwrap();
        let tabs = t.extract_p(&toroidal_form().r, 7, 5, 1, 1e-10).unwrap();
        for (u, p) in tabs[0].u.iter().zip(&tabs[0].p) {
            assert!((p - 1.0 / u.tanh()).abs() < 1e-10);
        }
        assert!(tabs[1].p.iter().chain(&tabs[2].p).all(|p| p.abs() < 1e-10));
    }

    #[test]
    fn extract_p_flags_non_separable() {
        let c = ["u1", "u2", "u3"];
        let lame = vec![field("1", &c), field("1", &c), field("exp(u1*u2)", &c)];
        let m = DiagonalMetric::riemannian(lame[0].coordinates().clone(), lame, vec![Interval::new(-1.0, 1.0); 3], vec![])
            .unwrap();
        assert!(matches!(m.extract_p(&field("1", &c), 5, 5, 1, 1e-8), Err(MetricError::NotSeparable { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let c = ["x", "y", "z"];
        let e = DiagonalMetric::riemannian(
            field("1", &c).coordinates().clone(),
            vec![field("1", &c); 3],
            vec![Interval::new(-1.0, 1.0); 3],
            vec![],
        )
        .unwrap();
        assert!((e.laplace_beltrami(&field("x^2", &c), &[0.2, 0.3, 0.4]).unwrap() - 2.0).abs() < 1e-14);
        let s = spherical();
        assert!((s.laplace_beltrami(&field("r^2", &SPH), &[1.3, 0.7, 0.1]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn toroidal_r_identity() {
        let form = toroidal_form();
        let m = assemble_isothermic(&form, toroidal_domain(), vec![]).unwrap();
        for p in m.sample(100, 42).unwrap() {
            let (lap, scale) = m.laplace_beltrami_scaled(&form.r, &p).unwrap();
            let r = form.r.eval(&p).unwrap();
            assert!((lap - 0.25 * r.powi(5)).abs() <= 1e-10 * (1.0 + scale), "{p:?}");
        }
    }

    #[test]
    fn binary_n_elliptic_two() {
        let c = ["l1", "l2"];
        let f = |s: &str| field(s, &c);
        let form = BinaryForm {
            r: f("1"),
            pairs: vec![f("sqrt(l1-l2)")],
            f: vec![f("sqrt(4*(l1-1)*l1)"), f("sqrt(-4*(l2-1)*l2)")],
            f2_sign: vec![1, 1],
        };
        let m = assemble_binary(&form, vec![Interval::new(1.5, 3.0), Interval::new(0.2, 0.8)], vec![]).unwrap();
        for p in m.sample(50, 9).unwrap() {
            let (l1, l2) = (p[0], p[1]);
            let h1 = ((l1 - l2) / (4.0 * (l1 - 1.0) * l1)).sqrt();
            let h2 = ((l2 - l1) / (4.0 * (l2 - 1.0) * l2)).sqrt();
            assert!((m.lame()[0].eval(&p).unwrap() - h1).abs() < 1e-12 * h1);
            assert!((m.lame()[1].eval(&p).unwrap() - h2).abs() < 1e-12 * h2);
        }
        let bad = BinaryForm { r: f("l1"), ..form };
        assert_eq!(bad.lame().unwrap_err(), MetricError::TwoDimensionalBinary);
    }

    #[test]
    fn pair_indices() {
        assert_eq!(pair_index(3, 0, 1), 0);
        assert_eq!(pair_index(3, 0, 2), 1);
        assert_eq!(pair_index(3, 1, 2), 2);
        assert_eq!(pair_index(4, 2, 3), 5);
    }

    #[test]
    fn independence_flags_dependence() {
        let form = toroidal_form();
        let pts = assemble_isothermic(&form, toroidal_domain(), vec![]).unwrap().sample(10, 1).unwrap();
        assert!(form.independence(&pts).unwrap().passes(1e-10));
        let f = |s: &str| field(s, &TOR);
        let bad = IsothermicForm { g: vec![f("eta"), f("1"), f("1")], ..form };
        let rep = bad.independence(&pts).unwrap();
        assert!(!rep.passes(1e-10));
        assert_eq!(rep.syntactic, vec![("G1".to_string(), "eta".to_string())]);
    }
}
