use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{LinflowError, Result};
use crate::matrix::Matrix;

/// Below this norm a coordinate is treated as zero inside logarithms.
const LOG_FLOOR: f64 = 1e-300;

/// Regularity of a map and its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "gamma", rename_all = "kebab-case")]
pub enum HolderClass {
    Lipschitz,
    /// β-Hölder for every β < 1.
    AllHolder,
    Beta(f64),
}

impl std::fmt::Display for HolderClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HolderClass::Lipschitz => f.write_str("lipschitz"),
            HolderClass::AllHolder => f.write_str("all-holder"),
            HolderClass::Beta(g) => write!(f, "beta({g})"),
        }
    }
}

impl HolderClass {
    fn key(&self) -> (f64, u8) {
        match *self {
            HolderClass::Lipschitz => (1.0, 2),
            HolderClass::AllHolder => (1.0, 1),
            HolderClass::Beta(g) if g >= 1.0 => (1.0, 2),
            HolderClass::Beta(g) => (g, 0),
        }
    }

    /// The less regular of the two.
    pub fn weakest(self, other: HolderClass) -> HolderClass {
        if other.key() < self.key() {
            other
        } else {
            self
        }
    }

    /// Class of `g ∘ f` given the classes of `f` and `g`.
    pub fn compose(self, other: HolderClass) -> HolderClass {
        use HolderClass::*;
        match (self, other) {
            (Lipschitz, x) | (x, Lipschitz) => x,
            (AllHolder, AllHolder) => AllHolder,
            (AllHolder, Beta(g)) | (Beta(g), AllHolder) => Beta(g),
            (Beta(g), Beta(h)) => Beta(g * h),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Linear {
        matrix: Matrix,
        inverse: Matrix,
    },
    /// `h_a`: carries the `aI_m` flow to the `J_m(a)` flow.
    BlockToDiag {
        m: usize,
        a: f64,
    },
    /// Carries `diag[J_1(a+ib), …]` (interleaved pairs) to the real Jordan
    /// block of `a+ib` (real parts first, then imaginary parts).
    ComplexBlockToDiag {
        m: usize,
        a: f64,
        b: f64,
    },
    /// `g(x) = R_{−b log|x|/a} x` on the plane.
    Unwind {
        a: f64,
        b: f64,
    },
    /// `x_j ↦ sign(x_j)|x_j|^{p_j}`.
    Power {
        exponents: Vec<f64>,
    },
    /// Blockwise map in the coordinates of `basis`; part `k` acts on the
    /// next `parts[k].dim()` columns.
    Product {
        basis: Matrix,
        basis_inverse: Matrix,
        parts: Vec<ConjugacyMap>,
    },
    /// Applied first to last.
    Composition {
        maps: Vec<ConjugacyMap>,
    },
}

/// Homeomorphism `R^d → R^d` fixing the origin, with an evaluable inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MapDocument", try_from = "MapDocument")]
pub struct ConjugacyMap {
    pub(crate) kind: MapKind,
    pub(crate) inverted: bool,
    dim: usize,
}

impl ConjugacyMap {
    pub(crate) fn from_kind(kind: MapKind) -> Self {
        let dim = match &kind {
            MapKind::Linear { matrix, .. } => matrix.nrows(),
            MapKind::BlockToDiag { m, .. } => *m,
            MapKind::ComplexBlockToDiag { m, .. } => 2 * m,
            MapKind::Unwind { .. } => 2,
            MapKind::Power { exponents } => exponents.len(),
            MapKind::Product { basis, .. } => basis.nrows(),
            MapKind::Composition { maps } => maps.first().map_or(0, |m| m.dim),
        };
        ConjugacyMap {
            kind,
            inverted: false,
            dim,
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kind(MapKind::Linear {
            matrix: Matrix::identity(d, d),
            inverse: Matrix::identity(d, d),
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim
    }

    pub fn dim_out(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            MapKind::Linear { .. } => "linear",
            MapKind::BlockToDiag { .. } => "block-to-diag",
            MapKind::ComplexBlockToDiag { .. } => "complex-block-to-diag",
            MapKind::Unwind { .. } => "unwind",
            MapKind::Power { .. } => "power",
            MapKind::Product { .. } => "product",
            MapKind::Composition { .. } => "composition",
        }
    }

    pub fn holder_class(&self) -> HolderClass {
        match &self.kind {
            MapKind::Linear { .. } | MapKind::Unwind { .. } => HolderClass::Lipschitz,
            MapKind::BlockToDiag { m, .. } | MapKind::ComplexBlockToDiag { m, .. } => {
                if *m == 1 {
                    HolderClass::Lipschitz
                } else {
                    HolderClass::AllHolder
                }
            }
            MapKind::Power { exponents } => {
                let g = exponents.iter().map(|p| p.min(1.0 / p)).fold(1.0, f64::min);
                HolderClass::Beta(g)
            }
            MapKind::Product { parts, .. } => parts
                .iter()
                .map(|p| p.holder_class())
                .fold(HolderClass::Lipschitz, HolderClass::weakest),
            MapKind::Composition { maps } => maps
                .iter()
                .map(|p| p.holder_class())
                .fold(HolderClass::Lipschitz, HolderClass::compose),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut out = self.clone();
        out.inverted = !out.inverted;
        out
    }

    /// `self` followed by `next`.
    pub fn then(self, next: ConjugacyMap) -> Self {
        Self::from_kind(MapKind::Composition { maps: vec![self, next] })
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x, false)
    }

    pub fn apply_inverse(&self, x: &DVector<f64>) -> DVector<f64> {
        self.eval(x, true)
    }

    fn eval(&self, x: &DVector<f64>, inverse: bool) -> DVector<f64> {
        assert_eq!(x.len(), self.dim, "point dimension does not match the map");
        let inv = inverse != self.inverted;
        match &self.kind {
            MapKind::Linear { matrix, inverse } => {
                if inv {
                    inverse * x
                } else {
                    matrix * x
                }
            }
            MapKind::BlockToDiag { m, a } => {
                let w: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
                let out = if inv {
                    log_chain_inverse(&w, *a)
                } else {
                    log_chain(&w, *a)
                };
                debug_assert_eq!(out.len(), *m);
                DVector::from_iterator(*m, out.into_iter().map(|v| v[0]))
            }
            MapKind::ComplexBlockToDiag { m, a, .. } => {
                let m = *m;
                if inv {
                    let y: Vec<Vec<f64>> = (0..m).map(|j| vec![x[j], x[j + m]]).collect();
                    let w = log_chain_inverse(&y, *a);
                    DVector::from_iterator(2 * m, w.into_iter().flatten())
                } else {
                    let w: Vec<Vec<f64>> = (0..m).map(|p| vec![x[2 * p], x[2 * p + 1]]).collect();
                    let y = log_chain(&w, *a);
                    let mut out = DVector::zeros(2 * m);
                    for (j, v) in y.iter().enumerate() {
                        out[j] = v[0];
                        out[j + m] = v[1];
                    }
                    out
                }
            }
            MapKind::Unwind { a, b } => {
                let r = x.norm();
                if r == 0.0 {
                    return x.clone();
                }
                let s = if inv { 1.0 } else { -1.0 } * b * r.ln() / a;
                let (sn, cs) = s.sin_cos();
                DVector::from_vec(vec![cs * x[0] - sn * x[1], sn * x[0] + cs * x[1]])
            }
            MapKind::Power { exponents } => DVector::from_iterator(
                x.len(),
                x.iter().zip(exponents).map(|(v, p)| {
                    let p = if inv { 1.0 / p } else { *p };
                    if *v == 0.0 {
                        0.0
                    } else {
                        v.signum() * v.abs().powf(p)
                    }
                }),
            ),
            MapKind::Product {
                basis,
                basis_inverse,
                parts,
            } => {
                let c = basis_inverse * x;
                let mut out = DVector::zeros(self.dim);
                let mut off = 0;
                for p in parts {
                    let k = p.dim;
                    let y = p.eval(&c.rows(off, k).into_owned(), inv);
                    out.rows_mut(off, k).copy_from(&y);
                    off += k;
                }
                basis * out
            }
            MapKind::Composition { maps } => {
                let mut y = x.clone();
                if inv {
                    for m in maps.iter().rev() {
                        y = m.eval(&y, true);
                    }
                } else {
                    for m in maps {
                        y = m.eval(&y, false);
                    }
                }
                y
            }
        }
    }
}

fn log_term(w: &[f64], k: usize, a: f64) -> Vec<f64> {
    if k == 0 {
        return w.to_vec();
    }
    let r = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r < LOG_FLOOR {
        return vec![0.0; w.len()];
    }
    let c = (r.ln() / a).powi(k as i32) / factorial(k);
    w.iter().map(|v| c * v).collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// `y_j = Σ_{i ≤ m−1−j} L(w_i)^{m−1−j−i}/(m−1−j−i)! · w_i` with `L = log|·|/a`.
fn log_chain(w: &[Vec<f64>], a: f64) -> Vec<Vec<f64>> {
    let m = w.len();
    (0..m)
        .map(|j| {
            let mut acc = vec![0.0; w[0].len()];
            for (i, wi) in w.iter().enumerate().take(m - j) {
                for (s, t) in acc.iter_mut().zip(log_term(wi, m - 1 - j - i, a)) {
                    *s += t;
                }
            }
            acc
        })
        .collect()
}

fn log_chain_inverse(y: &[Vec<f64>], a: f64) -> Vec<Vec<f64>> {
    let m = y.len();
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = y[m - 1 - j].clone();
        for (i, wi) in w.iter().enumerate() {
            for (s, t) in v.iter_mut().zip(log_term(wi, j - i, a)) {
                *s -= t;
            }
        }
        w.push(v);
    }
    w
}

/// Serialized form: `{kind, parameters, children}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub kind: String,
    pub parameters: Value,
    #[serde(default)]
    pub children: Vec<MapDocument>,
}

fn rows(m: &Matrix) -> Value {
    json!((0..m.nrows())
        .map(|i| m.row(i).iter().cloned().collect::<Vec<f64>>())
        .collect::<Vec<_>>())
}

fn read_matrix(v: &Value, name: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v[name].clone())
        .map_err(|e| LinflowError::Domain(format!("map parameter `{name}`: {e}")))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(LinflowError::Domain(format!("map parameter `{name}` is not square")));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn read_f64(v: &Value, name: &str) -> Result<f64> {
    v[name]
        .as_f64()
        .ok_or_else(|| LinflowError::Domain(format!("map parameter `{name}` missing")))
}

fn read_usize(v: &Value, name: &str) -> Result<usize> {
    v[name]
        .as_u64()
        .map(|n| n as usize)
        .filter(|&n| n > 0)
        .ok_or_else(|| LinflowError::Domain(format!("map parameter `{name}` must be a positive integer")))
}

impl From<ConjugacyMap> for MapDocument {
    fn from(h: ConjugacyMap) -> Self {
        let holder = serde_json::to_value(h.holder_class()).expect("plain enum");
        let kind = h.kind_name().to_string();
        let (mut parameters, children) = match h.kind {
            MapKind::Linear { matrix, inverse } => {
                (json!({"matrix": rows(&matrix), "inverse": rows(&inverse)}), vec![])
            }
            MapKind::BlockToDiag { m, a } => (json!({"m": m, "a": a}), vec![]),
            MapKind::ComplexBlockToDiag { m, a, b } => (json!({"m": m, "a": a, "b": b}), vec![]),
            MapKind::Unwind { a, b } => (json!({"a": a, "b": b}), vec![]),
            MapKind::Power { exponents } => (json!({"exponents": exponents}), vec![]),
            MapKind::Product { basis, parts, .. } => (
                json!({"basis": rows(&basis)}),
                parts.into_iter().map(MapDocument::from).collect(),
            ),
            MapKind::Composition { maps } => (json!({}), maps.into_iter().map(MapDocument::from).collect()),
        };
        parameters["inverted"] = json!(h.inverted);
        parameters["holder_class"] = holder;
        MapDocument {
            kind,
            parameters,
            children,
        }
    }
}

impl TryFrom<MapDocument> for ConjugacyMap {
    type Error = LinflowError;

    fn try_from(doc: MapDocument) -> Result<Self> {
        let p = &doc.parameters;
        let children =
            || -> Result<Vec<ConjugacyMap>> { doc.children.iter().cloned().map(ConjugacyMap::try_from).collect() };
        let kind = match doc.kind.as_str() {
            "linear" => MapKind::Linear {
                matrix: read_matrix(p, "matrix")?,
                inverse: read_matrix(p, "inverse")?,
            },
            "block-to-diag" => MapKind::BlockToDiag {
                m: read_usize(p, "m")?,
                a: read_f64(p, "a")?,
            },
            "complex-block-to-diag" => MapKind::ComplexBlockToDiag {
                m: read_usize(p, "m")?,
                a: read_f64(p, "a")?,
                b: read_f64(p, "b")?,
            },
            "unwind" => MapKind::Unwind {
                a: read_f64(p, "a")?,
                b: read_f64(p, "b")?,
            },
            "power" => MapKind::Power {
                exponents: serde_json::from_value(p["exponents"].clone())
                    .map_err(|e| LinflowError::Domain(format!("map parameter `exponents`: {e}")))?,
            },
            "product" => {
                let basis = read_matrix(p, "basis")?;
                let basis_inverse = basis
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| LinflowError::Domain("product basis is singular".into()))?;
                let parts = children()?;
                if parts.iter().map(|c| c.dim).sum::<usize>() != basis.nrows() {
                    return Err(LinflowError::Domain("product parts do not fill the basis".into()));
                }
                MapKind::Product {
                    basis,
                    basis_inverse,
                    parts,
                }
            }
            "composition" => {
                let maps = children()?;
                if maps.is_empty() || maps.iter().any(|m| m.dim != maps[0].dim) {
                    return Err(LinflowError::Domain("composition needs maps of one dimension".into()));
                }
                MapKind::Composition { maps }
            }
            other => return Err(LinflowError::Domain(format!("unknown map kind `{other}`"))),
        };
        let mut h = ConjugacyMap::from_kind(kind);
        h.inverted = p["inverted"].as_bool().unwrap_or(false);
        Ok(h)
    }
}
