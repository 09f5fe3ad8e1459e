//! Built-in worked examples.
//!
//! Every entry is a metric document together with the verdicts it is
//! expected to produce and, where known, the family of `q_i` in the
//! coordinates of its ansatz.

use std::sync::Arc;

use thiserror::Error;

use crate::curvature::{self, CurvatureError, DupinConstants};
use crate::document::{DocumentError, MetricDocument};
use crate::expr::ScalarField;
use crate::metric::DiagonalMetric;
use crate::sampling::Interval;

pub const NAMES: [&str; 9] = [
    "spherical",
    "toroidal-i",
    "toroidal-ii",
    "cyclidic",
    "dupin-cyclidic",
    "n-elliptic-2",
    "n-elliptic-3",
    "kalnins-miller",
    "dupin-darboux",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{name}`; available: {}", NAMES.join(", "))]
    Unknown { name: String },
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

/// Expected outcomes of the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdicts {
    pub flat: bool,
    pub conformally_flat: bool,
    pub dupin: bool,
    pub harmonic_r: bool,
}

/// `q` coefficients in ansatz coordinates: one particular vector and the
/// directions of the separation constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub particular: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Where the example comes from, in words.
    pub reference: &'static str,
    pub document: MetricDocument,
    pub verdicts: Verdicts,
    /// `c` in `ΔR = c R⁵`, when such an identity holds.
    pub r_identity: Option<f64>,
    pub family: Option<Family>,
}

pub fn list() -> &'static [&'static str] {
    &NAMES
}

pub fn get(name: &str) -> Result<CatalogEntry, CatalogError> {
    let (reference, text, verdicts, r_identity, family) = match name {
        "spherical" => (
            "spherical coordinates in Euclidean space",
            SPHERICAL,
            Verdicts { flat: true, conformally_flat: true, dupin: true, harmonic_r: true },
            Some(0.0),
            Some(Family {
                particular: vec![0.0; 5],
                directions: vec![vec![0.0, -1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, -1.0, 1.0]],
            }),
        ),
        "toroidal-i" => (
            "toroidal coordinates with R = sqrt(cosh eta - cos theta)",
            TOROIDAL_I,
            Verdicts { flat: true, conformally_flat: true, dupin: true, harmonic_r: false },
            Some(0.25),
            Some(Family {
                particular: vec![0.25, 0.0, 0.0, 0.0],
                directions: vec![vec![-1.0, 0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0, 1.0]],
            }),
        ),
        "toroidal-ii" => (
            "toroidal coordinates with R = sqrt(coth eta - cos theta / sinh eta)",
            TOROIDAL_II,
            Verdicts { flat: true, conformally_flat: true, dupin: true, harmonic_r: false },
            Some(0.25),
            Some(Family {
                particular: vec![0.0, 0.25, 0.0, 0.0],
                directions: vec![vec![-1.0, 0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0, 1.0]],
            }),
        ),
        "cyclidic" => (
            "flat cyclidic coordinates with d = 0, p = 1/sqrt(abc), (a, b, c) = (1, 2, 4)",
            CYCLIDIC,
            Verdicts { flat: true, conformally_flat: true, dupin: false, harmonic_r: false },
            Some(3.0 / 16.0),
            Some(Family {
                particular: vec![0.0, 0.0, 3.0 / 16.0, 0.0, 0.0, 3.0 / 16.0, 0.0, 0.0, 3.0 / 16.0],
                directions: vec![
                    vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
                ],
            }),
        ),
        "dupin-cyclidic" => (
            "Dupin-cyclidic coordinates with (a, b, c) = (5, 4, 3), Helmholtz with k^2 = 1",
            DUPIN_CYCLIDIC,
            Verdicts { flat: true, conformally_flat: true, dupin: true, harmonic_r: false },
            None,
            Some(Family { particular: vec![0.25, -0.25, 1.0], directions: vec![] }),
        ),
        "n-elliptic-2" => (
            "planar elliptic coordinates with b = (1, 0)",
            N_ELLIPTIC_2,
            Verdicts { flat: true, conformally_flat: true, dupin: false, harmonic_r: true },
            Some(0.0),
            Some(Family { particular: vec![0.0, 0.7, 0.0, 0.7], directions: vec![vec![1.0, 0.0, 1.0, 0.0]] }),
        ),
        "n-elliptic-3" => (
            "ellipsoidal coordinates with b = (3, 2, 1)",
            N_ELLIPTIC_3,
            Verdicts { flat: true, conformally_flat: true, dupin: false, harmonic_r: true },
            Some(0.0),
            Some(Family {
                particular: vec![0.0, 0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5],
                directions: vec![
                    vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
                ],
            }),
        ),
        "kalnins-miller" => (
            "the conformally Minkowskian metric (l1 + l2 + l3) dsigma^2 of Kalnins and Miller",
            KALNINS_MILLER,
            Verdicts { flat: false, conformally_flat: true, dupin: false, harmonic_r: true },
            Some(0.0),
            Some(kalnins_miller_family(0.6)),
        ),
        "dupin-darboux" => (
            "Darboux's Dupin-cyclidic family with quadratic a_i and a flat constant set",
            DUPIN_DARBOUX,
            Verdicts { flat: true, conformally_flat: true, dupin: true, harmonic_r: false },
            None,
            Some(Family { particular: vec![-0.25, 0.25, 0.0], directions: vec![] }),
        ),
        _ => return Err(CatalogError::Unknown { name: name.to_string() }),
    };
    let name = NAMES.iter().find(|n| **n == name).expect("matched above");
    let document = MetricDocument::from_toml(text)?;
    Ok(CatalogEntry { name, reference, document, verdicts, r_identity, family })
}

/// Monomials `1, λ, …, λ⁴` per axis; `q_i = k² λ³ + k₁ λ + k₀`.
fn kalnins_miller_family(k2: f64) -> Family {
    let mut particular = vec![0.0; 15];
    let mut d0 = vec![0.0; 15];
    let mut d1 = vec![0.0; 15];
    for axis in 0..3 {
        particular[axis * 5 + 3] = k2;
        d0[axis * 5] = 1.0;
        d1[axis * 5 + 1] = 1.0;
    }
    Family { particular, directions: vec![d0, d1] }
}

/// The cyclidic metric for general `p` and `d` with `(a, b, c) = (1, 2, 4)`
/// on the catalog chamber. It is flat only when `p a b c d = 0` and
/// `p²(abc + abd + acd + bcd) = 1`.
pub fn generic_cyclidic(p: f64, d: f64) -> Result<DiagonalMetric, CatalogError> {
    let phi = |x: &str| format!("(({x})-1)*(({x})-2)*(({x})-4)*(({x})-({d}))");
    let pre = format!("(1 + {p}*sqrt(l1*l2*l3))");
    let h = [
        format!("sqrt((l1-l2)*(l1-l3)/({}))/{pre}", phi("l1")),
        format!("sqrt((l2-l1)*(l2-l3)/({}))/{pre}", phi("l2")),
        format!("sqrt((l3-l1)*(l3-l2)/({}))/{pre}", phi("l3")),
    ];
    let text = format!(
        "format = 1\n[metric]\ncoords = [\"l1\", \"l2\", \"l3\"]\nH = [\"{}\", \"{}\", \"{}\"]\n\
         domain = [[4.5, 6.0], [2.5, 3.5], [1.2, 1.8]]\n",
        h[0], h[1], h[2]
    );
    let model = MetricDocument::from_toml(&text)?.build()?;
    Ok(Arc::try_unwrap(model.metric).unwrap_or_else(|m| (*m).clone()))
}

fn uni(text: &str) -> ScalarField {
    ScalarField::parse(text, &["u"], &[]).expect("fixed expression")
}

/// The constants behind the `dupin-darboux` entry:
/// `a = (u² − 2, 1 − u², 1)`, `α = (0, −1, 1)`, `β = 0`, `γ = (−½, ½, 0)`.
pub fn dupin_darboux_constants() -> DupinConstants {
    DupinConstants {
        m: [1.0, -1.0, 0.0],
        n: [0.0; 3],
        p: [-2.0, 1.0, 1.0],
        alpha: [0.0, -1.0, 1.0],
        beta: [0.0; 3],
        gamma: [-0.5, 0.5, 0.0],
        b: vec![uni("sqrt(u^2 - 2)/2"), uni("-1 - sqrt((1 - u^2)/2)"), uni("u^2/2")],
        domain: DUPIN_DARBOUX_BOX.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect(),
    }
}

const DUPIN_DARBOUX_BOX: [(f64, f64); 3] = [(1.7, 2.7), (-0.6, 0.6), (-2.5, -1.0)];

/// The Darboux metric built from a constant set, together with `M`.
pub fn darboux_from_constants(dc: &DupinConstants) -> Result<(DiagonalMetric, ScalarField), CatalogError> {
    let coords: Arc<[String]> = Arc::from(vec!["u1".to_string(), "u2".to_string(), "u3".to_string()]);
    Ok(curvature::darboux_metric(&coords, &dc.a_fields(), &dc.b, dc.domain.clone())?)
}

/// The `dupin-darboux` constants with `b_3` perturbed so the flatness
/// identity fails while the `a_i` stay conformally flat.
pub fn perturbed_dupin_darboux() -> DupinConstants {
    let mut dc = dupin_darboux_constants();
    dc.b[2] = uni("u^2/2 + 0.3*u^3");
    dc
}

const SPHERICAL: &str = r#"
format = 1
name = "spherical"

[constants]
alpha = 2.0
beta = 0.5

[metric]
coords = ["r", "theta", "phi"]
H = ["1", "r", "r*sin(theta)"]
domain = [[0.5, 2.0], [0.3, 2.8], [0.0, 6.0]]

[isothermic]
R = "1"
G = ["sin(theta)", "r", "r"]
f = ["r^2", "sin(theta)", "1"]

[ansatz]
basis = [["1", "r^-2"], ["1", "1/sin(theta)^2"], ["1"]]

[separation]
q = ["-alpha/r^2", "alpha - beta/sin(theta)^2", "beta"]
phi0 = [[1.0, 0.3], [0.5, -1.0], [1.0, 0.0]]
"#;

const TOROIDAL_I: &str = r#"
format = 1
name = "toroidal-i"

[constants]
alpha1 = 0.3
alpha2 = 0.2

[metric]
coords = ["eta", "theta", "phi"]
H = ["1/(cosh(eta) - cos(theta))", "1/(cosh(eta) - cos(theta))", "sinh(eta)/(cosh(eta) - cos(theta))"]
domain = [[0.5, 2.0], [0.3, 2.8], [0.0, 6.0]]

[isothermic]
R = "sqrt(cosh(eta) - cos(theta))"
G = ["1", "sinh(eta)", "1"]
f = ["sinh(eta)", "1", "1"]

[ansatz]
basis = [["1", "1/sinh(eta)^2"], ["1"], ["1"]]

[separation]
q = ["0.25 - alpha1 - alpha2/sinh(eta)^2", "alpha1", "alpha2"]
phi0 = [[1.0, 0.0], [1.0, 0.5], [0.5, 1.0]]
"#;

const TOROIDAL_II: &str = r#"
format = 1
name = "toroidal-ii"

[constants]
alpha1 = 0.3
alpha2 = 0.2

[metric]
coords = ["eta", "theta", "phi"]
H = ["1/(cosh(eta) - cos(theta))", "1/(cosh(eta) - cos(theta))", "sinh(eta)/(cosh(eta) - cos(theta))"]
domain = [[0.5, 2.0], [0.3, 2.8], [0.0, 6.0]]

[isothermic]
R = "sqrt(cosh(eta)/sinh(eta) - cos(theta)/sinh(eta))"
G = ["1", "1", "1/sinh(eta)"]
f = ["1", "1", "1"]

[ansatz]
basis = [["1", "1/sinh(eta)^2"], ["1"], ["1"]]

[separation]
q = ["(0.25 - alpha2)/sinh(eta)^2 - alpha1", "alpha1", "alpha2"]
phi0 = [[1.0, 0.0], [1.0, 0.5], [0.5, 1.0]]
"#;

const CYCLIDIC: &str = r#"
format = 1
name = "cyclidic"

[constants]
alpha1 = 0.5
alpha2 = -0.3

[metric]
coords = ["l1", "l2", "l3"]
H = [
    "sqrt((l1-l2)*(l1-l3)/(l1*(l1-1)*(l1-2)*(l1-4)))/(1 + sqrt(l1*l2*l3/8))",
    "sqrt((l2-l1)*(l2-l3)/(l2*(l2-1)*(l2-2)*(l2-4)))/(1 + sqrt(l1*l2*l3/8))",
    "sqrt((l3-l1)*(l3-l2)/(l3*(l3-1)*(l3-2)*(l3-4)))/(1 + sqrt(l1*l2*l3/8))",
]
domain = [[4.5, 6.0], [2.5, 3.5], [1.2, 1.8]]
guards = ["l1 - l2", "l1 - l3", "l2 - l3"]

[isothermic]
R = "sqrt(1 + sqrt(l1*l2*l3/8))"
G = ["sqrt(l2 - l3)", "sqrt(l1 - l3)", "sqrt(l1 - l2)"]
f = [
    "sqrt(l1*(l1-1)*(l1-2)*(l1-4))",
    "sqrt(-(l2*(l2-1)*(l2-2)*(l2-4)))",
    "sqrt(l3*(l3-1)*(l3-2)*(l3-4))",
]

[ansatz]
basis = [
    ["1/(l1*(l1-1)*(l1-2)*(l1-4))", "l1/(l1*(l1-1)*(l1-2)*(l1-4))", "l1^2/(l1*(l1-1)*(l1-2)*(l1-4))"],
    ["1/(l2*(l2-1)*(l2-2)*(l2-4))", "l2/(l2*(l2-1)*(l2-2)*(l2-4))", "l2^2/(l2*(l2-1)*(l2-2)*(l2-4))"],
    ["1/(l3*(l3-1)*(l3-2)*(l3-4))", "l3/(l3*(l3-1)*(l3-2)*(l3-4))", "l3^2/(l3*(l3-1)*(l3-2)*(l3-4))"],
]

[separation]
q = [
    "(alpha1 + alpha2*l1 + 3/16*l1^2)/(l1*(l1-1)*(l1-2)*(l1-4))",
    "(alpha1 + alpha2*l2 + 3/16*l2^2)/(l2*(l2-1)*(l2-2)*(l2-4))",
    "(alpha1 + alpha2*l3 + 3/16*l3^2)/(l3*(l3-1)*(l3-2)*(l3-4))",
]
phi0 = [[1.0, 0.2], [1.0, -0.5], [1.0, 0.0]]
"#;

const DUPIN_CYCLIDIC: &str = r#"
format = 1
name = "dupin-cyclidic"

[constants]
a = 5.0
b = 4.0
c = 3.0

[metric]
coords = ["u", "v", "w"]
H = [
    "b*(a*cosh(v) - w)/(a*cosh(v) - c*cos(u))",
    "b*(w - c*cos(u))/(a*cosh(v) - c*cos(u))",
    "1",
]
domain = [[0.3, 2.8], [0.2, 1.5], [3.5, 4.5]]
guards = ["a*cosh(v) - w", "w - c*cos(u)"]

[isothermic]
R = "(a*cosh(v) - w)^(-1/2)*(w - c*cos(u))^(-1/2)"
G = ["1/(a*cosh(v) - w)", "1/(w - c*cos(u))", "1/(a*cosh(v) - c*cos(u))"]
f = ["1/b", "1/b", "1"]

[potential]
k2 = 1.0

[ansatz]
basis = [["1"], ["1"], ["1"]]

[separation]
q = ["0.25", "-0.25", "1"]
phi = ["cos(u/2)", "cosh(v/2)", "cos(w)"]
"#;

const N_ELLIPTIC_2: &str = r#"
format = 1
name = "n-elliptic-2"

[constants]
k0 = 0.3

[metric]
coords = ["l1", "l2"]
H = ["sqrt((l1 - l2)/(4*(l1 - 1)*l1))", "sqrt((l1 - l2)/(4*(1 - l2)*l2))"]
domain = [[1.2, 3.0], [0.1, 0.9]]

[binary]
R = "1"
G = ["sqrt(l1 - l2)"]
f = ["2*sqrt((l1 - 1)*l1)", "2*sqrt((1 - l2)*l2)"]

[potential]
k2 = 0.7

[ansatz]
basis = [["1/(4*(l1-1)*l1)", "l1/(4*(l1-1)*l1)"], ["1/(4*(l2-1)*l2)", "l2/(4*(l2-1)*l2)"]]

[separation]
q = ["(k0 + 0.7*l1)/(4*(l1-1)*l1)", "(k0 + 0.7*l2)/(4*(l2-1)*l2)"]
phi0 = [[1.0, 0.0], [1.0, 0.0]]
"#;

const N_ELLIPTIC_3: &str = r#"
format = 1
name = "n-elliptic-3"

[constants]
k0 = 0.2
k1 = -0.4

[metric]
coords = ["l1", "l2", "l3"]
H = [
    "sqrt((l1-l2)*(l1-l3)/(4*(l1-3)*(l1-2)*(l1-1)))",
    "sqrt((l2-l1)*(l2-l3)/(4*(l2-3)*(l2-2)*(l2-1)))",
    "sqrt((l3-l1)*(l3-l2)/(4*(l3-3)*(l3-2)*(l3-1)))",
]
domain = [[3.3, 4.5], [2.2, 2.8], [1.2, 1.8]]
guards = ["l1 - l2", "l1 - l3", "l2 - l3"]

[binary]
R = "1"
G = ["sqrt(l1 - l2)", "sqrt(l1 - l3)", "sqrt(l2 - l3)"]
f = [
    "2*sqrt((l1-3)*(l1-2)*(l1-1))",
    "2*sqrt(-((l2-3)*(l2-2)*(l2-1)))",
    "2*sqrt((l3-3)*(l3-2)*(l3-1))",
]

[potential]
k2 = 0.5

[ansatz]
basis = [
    ["1/(4*(l1-3)*(l1-2)*(l1-1))", "l1/(4*(l1-3)*(l1-2)*(l1-1))", "l1^2/(4*(l1-3)*(l1-2)*(l1-1))"],
    ["1/(4*(l2-3)*(l2-2)*(l2-1))", "l2/(4*(l2-3)*(l2-2)*(l2-1))", "l2^2/(4*(l2-3)*(l2-2)*(l2-1))"],
    ["1/(4*(l3-3)*(l3-2)*(l3-1))", "l3/(4*(l3-3)*(l3-2)*(l3-1))", "l3^2/(4*(l3-3)*(l3-2)*(l3-1))"],
]

[separation]
q = [
    "(k0 + k1*l1 + 0.5*l1^2)/(4*(l1-3)*(l1-2)*(l1-1))",
    "(k0 + k1*l2 + 0.5*l2^2)/(4*(l2-3)*(l2-2)*(l2-1))",
    "(k0 + k1*l3 + 0.5*l3^2)/(4*(l3-3)*(l3-2)*(l3-1))",
]
phi0 = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
"#;

const KALNINS_MILLER: &str = r#"
format = 1
name = "kalnins-miller"

[constants]
k0 = 0.3
k1 = -0.2

[metric]
coords = ["l1", "l2", "l3"]
signature = [1, -1, 1]
H = [
    "sqrt((l1 + l2 + l3)*(l1 - l2)*(l1 - l3))",
    "sqrt((l1 + l2 + l3)*(l1 - l2)*(l2 - l3))",
    "sqrt((l1 + l2 + l3)*(l1 - l3)*(l2 - l3))",
]
domain = [[2.7, 3.3], [1.7, 2.3], [0.7, 1.3]]
guards = ["l1 - l2", "l1 - l3", "l2 - l3"]

[isothermic]
R = "(l1 + l2 + l3)^(-1/4)"
G = ["sqrt(l2 - l3)", "sqrt(l1 - l3)", "sqrt(l1 - l2)"]
f = ["1", "1", "1"]
f2_sign = [1, -1, 1]

[potential]
k2 = 0.6

[ansatz]
basis = [
    ["1", "l1", "l1^2", "l1^3", "l1^4"],
    ["1", "l2", "l2^2", "l2^3", "l2^4"],
    ["1", "l3", "l3^2", "l3^3", "l3^4"],
]

[separation]
q = ["0.6*l1^3 + k1*l1 + k0", "0.6*l2^3 + k1*l2 + k0", "0.6*l3^3 + k1*l3 + k0"]
phi0 = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
"#;

const DUPIN_DARBOUX: &str = r#"
format = 1
name = "dupin-darboux"

[metric]
coords = ["u1", "u2", "u3"]
domain = [[1.7, 2.7], [-0.6, 0.6], [-2.5, -1.0]]
guards = ["u1 - u2", "u1 - u3", "u2 - u3"]

[isothermic]
R = "sqrt(sqrt(u1^2 - 2)/2/((u1-u2)*(u1-u3)) - (-1 - sqrt((1 - u2^2)/2))/((u1-u2)*(u2-u3)) + u3^2/2/((u1-u3)*(u2-u3)))"
G = ["1/(u2 - u3)", "1/(u1 - u3)", "1/(u1 - u2)"]
f = ["sqrt(u1^2 - 2)", "sqrt(1 - u2^2)", "1"]

[ansatz]
basis = [["1/(u1^2 - 2)"], ["1/(1 - u2^2)"], ["1"]]

[separation]
q = ["-1/(4*(u1^2 - 2))", "1/(4*(1 - u2^2))", "0"]
phi0 = [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]
"#;
