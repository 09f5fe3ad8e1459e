//! Collocation solve for the `q_i` in a user-declared ansatz.
//!
//! Each collocation point contributes one row of
//! `Σ_i (ε_i / H_i²) Σ_k c_ik B_ik(u^i) = R⁻¹ΔR + k² − V`. The minimum-norm
//! least-squares solution is the particular solution; right singular vectors
//! with singular value below `1e-8 σ_max` span the separation constants.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::SeparationError;
use crate::expr::ScalarField;
use crate::metric::DiagonalMetric;

pub const NULLSPACE_THRESHOLD: f64 = 1e-8;

/// Per-axis basis functions, each a field of one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct QAnsatz {
    pub basis: Vec<Vec<ScalarField>>,
}

impl QAnsatz {
    /// Monomials `1, u, …, u^degree` on every axis.
    pub fn monomials(coords: &[String], degree: usize) -> QAnsatz {
        let basis = coords
            .iter()
            .map(|c| {
                let single: Arc<[String]> = Arc::from(vec![c.clone()]);
                let u = ScalarField::coordinate(0, &single);
                (0..=degree)
                    .map(|k| if k == 0 { ScalarField::constant(1.0, &single) } else { u.powf(k as f64) })
                    .collect()
            })
            .collect();
        QAnsatz { basis }
    }

    pub fn len(&self) -> usize {
        self.basis.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of axis `i`'s first coefficient in the flat vector.
    pub fn offset(&self, axis: usize) -> usize {
        self.basis[..axis].iter().map(Vec::len).sum()
    }

    /// `q_i` for a coefficient vector, as one-variable fields.
    pub fn assemble(&self, coefficients: &[f64]) -> Vec<ScalarField> {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let off = self.offset(i);
                let terms: Vec<ScalarField> =
                    b.iter().enumerate().map(|(k, f)| f.scale(coefficients[off + k])).collect();
                ScalarField::sum(&terms).unwrap_or_else(|| ScalarField::constant(0.0, b[0].coordinates()))
            })
            .collect()
    }
}

/// Outcome of a collocation solve.
#[derive(Debug, Clone, PartialEq)]
pub struct QSolution {
    pub particular: Vec<f64>,
    /// Orthonormal basis of the separation-constant directions.
    pub nullspace: Vec<Vec<f64>>,
    /// Largest row residual of the particular solution, rows normalized.
    pub residual: f64,
    pub points: usize,
    pub singular_values: Vec<f64>,
}

/// Comparison of a recovered family with a reference family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMatch {
    pub nullspace_dim: usize,
    pub family_dim: usize,
    /// Largest distance of a reference direction, or of the difference of
    /// particular solutions, from the recovered nullspace span.
    pub max_error: f64,
}

impl FamilyMatch {
    pub fn passes(&self, tol: f64) -> bool {
        self.nullspace_dim == self.family_dim && self.max_error <= tol
    }
}

impl QSolution {
    pub fn sufficient(&self, tol: f64) -> bool {
        self.residual <= tol
    }

    fn distance_from_span(&self, v: &[f64]) -> f64 {
        let mut r = v.to_vec();
        for b in &self.nullspace {
            let c: f64 = b.iter().zip(v).map(|(x, y)| x * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
        r.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Checks that `particular + span(directions)` is the recovered family.
    pub fn match_family(&self, particular: &[f64], directions: &[Vec<f64>]) -> FamilyMatch {
        let diff: Vec<f64> = particular.iter().zip(&self.particular).map(|(a, b)| a - b).collect();
        let mut max_error = self.distance_from_span(&diff);
        for d in directions {
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit: Vec<f64> = d.iter().map(|x| x / norm).collect();
            max_error = max_error.max(self.distance_from_span(&unit));
        }
        FamilyMatch { nullspace_dim: self.nullspace.len(), family_dim: directions.len(), max_error }
    }
}

fn embed_basis(metric: &DiagonalMetric, ansatz: &QAnsatz) -> Result<(), SeparationError> {
    if ansatz.basis.len() != metric.dim() {
        return Err(SeparationError::Shape { what: "ansatz axes", expected: metric.dim(), got: ansatz.basis.len() });
    }
    for (i, b) in ansatz.basis.iter().enumerate() {
        if b.is_empty() {
            return Err(SeparationError::EmptyBasis(i));
        }
        if b.iter().any(|f| f.arity() != 1) {
            return Err(SeparationError::NotUnivariate { what: format!("ansatz basis on axis {}", i + 1) });
        }
    }
    Ok(())
}

/// One collocation row and its right-hand side, normalized by
/// `1 + max |entry|`.
fn row(
    metric: &DiagonalMetric,
    r: &ScalarField,
    potential: Option<&ScalarField>,
    k2: f64,
    ansatz: &QAnsatz,
    point: &[f64],
) -> Result<(Vec<f64>, f64), SeparationError> {
    let (lap, _) = metric.laplace_beltrami_scaled(r, point)?;
    let rv = r.eval(point)?;
    let v = match potential {
        Some(f) => f.eval(point)?,
        None => 0.0,
    };
    let rhs = lap / rv + k2 - v;
    let mut entries = Vec::with_capacity(ansatz.len());
    for (i, b) in ansatz.basis.iter().enumerate() {
        let h = metric.lame()[i].eval(point)?;
        let w = metric.signature()[i] as f64 / (h * h);
        for f in b {
            entries.push(w * f.eval(&[point[i]])?);
        }
    }
    if !rhs.is_finite() || entries.iter().any(|x| !x.is_finite()) {
        return Err(SeparationError::NonFinite { at: point.to_vec() });
    }
    let scale = 1.0 + entries.iter().fold(rhs.abs(), |m, x| m.max(x.abs()));
    Ok((entries.into_iter().map(|x| x / scale).collect(), rhs / scale))
}

pub fn solve_q(
    metric: &DiagonalMetric,
    r: &ScalarField,
    potential: Option<&ScalarField>,
    k2: f64,
    ansatz: &QAnsatz,
    points: &[Vec<f64>],
) -> Result<QSolution, SeparationError> {
    embed_basis(metric, ansatz)?;
    let cols = ansatz.len();
    if points.len() < 3 * cols {
        return Err(SeparationError::TooFewPoints { got: points.len(), needed: 3 * cols });
    }
    let rows: Vec<(Vec<f64>, f64)> = points
        .par_iter()
        .map(|p| row(metric, r, potential, k2, ansatz, p))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_, _>>()?;
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i].0[j]);
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let svd = a.clone().svd(true, true);
    let sigma = svd.singular_values.clone();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cut = NULLSPACE_THRESHOLD * smax;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^T");
    let mut x = DVector::zeros(cols);
    let mut nullspace = Vec::new();
    for k in 0..sigma.len() {
        let vk: DVector<f64> = vt.row(k).transpose();
        if sigma[k] > cut {
            let c = u.column(k).dot(&b) / sigma[k];
            x += vk * c;
        } else {
            nullspace.push(vk.iter().copied().collect());
        }
    }
    let residual = (&a * &x - &b).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut singular_values: Vec<f64> = sigma.iter().copied().collect();
    singular_values.sort_by(|p, q| q.partial_cmp(p).unwrap_or(std::cmp::Ordering::Equal));
    canonical_signs(&mut nullspace);
    Ok(QSolution { particular: x.iter().copied().collect(), nullspace, residual, points: points.len(), singular_values })
}

/// Flips each nullspace vector so its largest entry is positive, making the
/// reported basis independent of the SVD's sign choices.
fn canonical_signs(vs: &mut [Vec<f64>]) {
    for v in vs {
        let k = (0..v.len()).fold(0, |best, i| if v[i].abs() > v[best].abs() + 1e-12 { i } else { best });
        if v[k] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Interval;

    const SPH: [&str; 3] = ["r", "theta", "phi"];

    fn spherical() -> DiagonalMetric {
        let lame: Vec<ScalarField> =
            ["1", "r", "r*sin(theta)"].iter().map(|s| ScalarField::parse(s, &SPH, &[]).unwrap()).collect();
        let dom = vec![Interval::new(0.5, 2.0), Interval::new(0.3, 2.8), Interval::new(0.0, 6.0)];
        DiagonalMetric::riemannian(lame[0].coordinates().clone(), lame, dom, vec![]).unwrap()
    }

    fn uni(s: &str, c: &str) -> ScalarField {
        ScalarField::parse(s, &[c], &[]).unwrap()
    }

    #[test]
    fn spherical_family() {
        let m = spherical();
        let ans = QAnsatz {
            basis: vec![
                vec![uni("1", "r"), uni("r^-2", "r")],
                vec![uni("1", "theta"), uni("1/sin(theta)^2", "theta")],
                vec![uni("1", "phi")],
            ],
        };
        let one = ScalarField::parse("1", &SPH, &[]).unwrap();
        let pts = m.sample(60, 42).unwrap();
        let sol = solve_q(&m, &one, None, 0.0, &ans, &pts).unwrap();
        assert_eq!(sol.nullspace.len(), 2);
        assert!(sol.residual < 1e-12);
        let fam = sol.match_family(&[0.0; 5], &[vec![0.0, -1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, -1.0, 1.0]]);
        assert!(fam.passes(1e-8), "{fam:?}");
        let wrong = sol.match_family(&[0.0; 5], &[vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, -1.0, 1.0]]);
        assert!(!wrong.passes(1e-3));
    }

    #[test]
    fn too_few_points() {
        let m = spherical();
        let ans = QAnsatz::monomials(m.coords(), 1);
        let one = ScalarField::parse("1", &SPH, &[]).unwrap();
        let pts = m.sample(5, 1).unwrap();
        assert!(matches!(solve_q(&m, &one, None, 0.0, &ans, &pts), Err(SeparationError::TooFewPoints { .. })));
    }

    #[test]
    fn overflowing_basis_is_rejected() {
        let m = spherical();
        let ans = QAnsatz { basis: vec![vec![uni("exp(exp(exp(10)))", "r")], vec![uni("1", "theta")], vec![uni("1", "phi")]] };
        let one = ScalarField::parse("1", &SPH, &[]).unwrap();
        let pts = m.sample(20, 1).unwrap();
        assert!(matches!(solve_q(&m, &one, None, 0.0, &ans, &pts), Err(SeparationError::NonFinite { .. })));
    }

    #[test]
    fn assembled_q_fields() {
        let ans = QAnsatz::monomials(&["x".to_string(), "y".to_string()], 2);
        let q = ans.assemble(&[1.0, 2.0, 3.0, 0.0, 0.0, -1.0]);
        assert_eq!(q[0].eval(&[2.0]).unwrap(), 17.0);
        assert_eq!(q[1].eval(&[3.0]).unwrap(), -9.0);
    }
}
