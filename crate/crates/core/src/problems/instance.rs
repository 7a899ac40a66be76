//! Instance recipes and their JSON serialization.
//!
//! An [`InstanceSpec`] is a generator recipe: `(kind, sizes, seed)` fixes the
//! instance bit for bit. An [`InstanceFile`] is the materialized data with the
//! matrix stored inline as triplets or referenced as a Matrix-Market file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{make_chain_quadratic, make_entropy_lp, make_example2, make_heterogeneous, EntropyLp, QuadraticProblem};
use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::scalar::{from_f64_vec, Scalar};
use crate::sparse_engine::{make_least_squares, Phi, SeparableObjective, SparseMatrix};
use crate::vrsum::{make_ridge_conditioned, RidgeFiniteSum};

/// Version tag written into every instance file.
pub const INSTANCE_SCHEMA: &str = "acrcd-instance/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Example2,
    Chain,
    Heterogeneous,
    EntropyLp,
    LeastSquares,
    Ridge,
}

/// Generator recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    /// Dense quadratic with entries in `[1, 2]`.
    Example2 { n: usize, seed: u64 },
    /// Ill-conditioned tridiagonal quadratic; deterministic.
    Chain { n: usize },
    /// Quadratic whose first coordinate constant is `stiff`, the others exactly 1.
    Heterogeneous { n: usize, stiff: f64, seed: u64 },
    EntropyLp { n: usize, m: usize, seed: u64 },
    LeastSquares { m: usize, n: usize, density: f64, seed: u64 },
    /// Ridge finite sum with `L/μ = kappa`.
    Ridge { m: usize, n: usize, kappa: f64, seed: u64 },
}

impl InstanceSpec {
    pub fn kind(&self) -> InstanceKind {
        match self {
            InstanceSpec::Example2 { .. } => InstanceKind::Example2,
            InstanceSpec::Chain { .. } => InstanceKind::Chain,
            InstanceSpec::Heterogeneous { .. } => InstanceKind::Heterogeneous,
            InstanceSpec::EntropyLp { .. } => InstanceKind::EntropyLp,
            InstanceSpec::LeastSquares { .. } => InstanceKind::LeastSquares,
            InstanceSpec::Ridge { .. } => InstanceKind::Ridge,
        }
    }

    /// Number of optimization variables.
    pub fn dim(&self) -> usize {
        match *self {
            InstanceSpec::Example2 { n, .. }
            | InstanceSpec::Chain { n }
            | InstanceSpec::Heterogeneous { n, .. }
            | InstanceSpec::LeastSquares { n, .. }
            | InstanceSpec::Ridge { n, .. } => n,
            // the dual variable lives in ℝᵐ
            InstanceSpec::EntropyLp { m, .. } => m,
        }
    }

    pub fn quadratic<T: Scalar>(&self) -> Result<QuadraticProblem<T>> {
        match *self {
            InstanceSpec::Example2 { n, seed } => make_example2(n, seed),
            InstanceSpec::Chain { n } => make_chain_quadratic(n),
            InstanceSpec::Heterogeneous { n, stiff, seed } => make_heterogeneous(n, stiff, seed),
            _ => Err(self.wrong_kind("a quadratic")),
        }
    }

    pub fn entropy_lp<T: Scalar>(&self) -> Result<EntropyLp<T>> {
        match *self {
            InstanceSpec::EntropyLp { n, m, seed } => make_entropy_lp(n, m, seed),
            _ => Err(self.wrong_kind("an entropy LP")),
        }
    }

    pub fn least_squares<T: Scalar>(&self) -> Result<SeparableObjective<T>> {
        match *self {
            InstanceSpec::LeastSquares { m, n, density, seed } => make_least_squares(m, n, density, seed),
            _ => Err(self.wrong_kind("a sparse least-squares objective")),
        }
    }

    pub fn ridge<T: Scalar>(&self) -> Result<RidgeFiniteSum<T>> {
        match *self {
            InstanceSpec::Ridge { m, n, kappa, seed } => make_ridge_conditioned(m, n, kappa, seed),
            _ => Err(self.wrong_kind("a ridge finite sum")),
        }
    }

    fn wrong_kind(&self, want: &str) -> Error {
        Error::Config(format!("instance kind {:?} is not {want}", self.kind()))
    }
}

/// Matrix payload of an instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixData {
    /// Zero-based `(row, col, value)`.
    Triplets { entries: Vec<(usize, usize, f64)> },
    /// Path to a Matrix-Market file, relative to the instance file.
    MatrixMarket { path: PathBuf },
}

/// Serialized instance: shape, matrix, named vectors and scalars.
///
/// Vectors used per kind: quadratics `b` (and `minimizer`), entropy LP `b`
/// (and `x_hat`), least squares `b`, `c`, ridge `b`. Scalars: `lambda` for ridge,
/// `fstar` when known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub kind: InstanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<InstanceSpec>,
    pub rows: usize,
    pub cols: usize,
    pub matrix: MatrixData,
    #[serde(default)]
    pub vectors: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
}

fn dense_triplets<T: Scalar>(a: &[T], cols: usize) -> Vec<(usize, usize, f64)> {
    a.iter()
        .enumerate()
        .filter(|(_, v)| **v != T::zero())
        .map(|(k, v)| (k / cols, k % cols, v.as_f64()))
        .collect()
}

impl InstanceFile {
    fn empty(kind: InstanceKind, rows: usize, cols: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        Self {
            schema: INSTANCE_SCHEMA.to_string(),
            kind,
            generator: None,
            rows,
            cols,
            matrix: MatrixData::Triplets { entries },
            vectors: BTreeMap::new(),
            scalars: BTreeMap::new(),
        }
    }

    /// Materializes a recipe with inline triplets.
    pub fn generate(spec: &InstanceSpec) -> Result<Self> {
        let mut file = match spec.kind() {
            InstanceKind::Example2 | InstanceKind::Chain | InstanceKind::Heterogeneous => {
                let q = spec.quadratic::<f64>()?;
                let n = q.dim();
                let mut f = Self::empty(spec.kind(), n, n, dense_triplets(q.matrix(), n));
                f.vectors.insert("b".into(), q.rhs().to_vec());
                if let Some(x) = q.minimizer_hint() {
                    f.vectors.insert("minimizer".into(), x.to_vec());
                }
                f
            }
            InstanceKind::EntropyLp => {
                let lp = spec.entropy_lp::<f64>()?;
                let mut f = Self::empty(spec.kind(), lp.m, lp.n, dense_triplets(&lp.a, lp.n));
                f.vectors.insert("b".into(), lp.b.clone());
                if let Some(x) = &lp.x_hat {
                    f.vectors.insert("x_hat".into(), x.clone());
                }
                f
            }
            InstanceKind::LeastSquares => {
                let obj = spec.least_squares::<f64>()?;
                let mut f = Self::empty(spec.kind(), obj.matrix.rows(), obj.matrix.cols(), obj.matrix.triplets());
                f.vectors.insert("b".into(), obj.b.clone());
                f.vectors.insert("c".into(), obj.c.clone());
                f.scalars.insert("fstar".into(), 0.0);
                f
            }
            InstanceKind::Ridge => {
                let r = spec.ridge::<f64>()?;
                let (a, b) = r.data();
                let mut f = Self::empty(spec.kind(), b.len(), a.len() / b.len(), dense_triplets(a, a.len() / b.len()));
                f.vectors.insert("b".into(), b.to_vec());
                f.scalars.insert("lambda".into(), r.lambda());
                f
            }
        };
        file.generator = Some(spec.clone());
        Ok(file)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses and checks the schema tag.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        if f.schema != INSTANCE_SCHEMA {
            return Err(Error::Config(format!("unsupported instance schema {:?}", f.schema)));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Sparse matrix; Matrix-Market paths are resolved against `base`.
    pub fn sparse_matrix<T: Scalar>(&self, base: Option<&Path>) -> Result<SparseMatrix<T>> {
        let mat = match &self.matrix {
            MatrixData::Triplets { entries } => {
                let t: Vec<(usize, usize, T)> = entries.iter().map(|&(r, c, v)| (r, c, T::lit(v))).collect();
                SparseMatrix::from_triplets(self.rows, self.cols, &t)?
            }
            MatrixData::MatrixMarket { path } => {
                let full = base.map_or_else(|| path.clone(), |b| b.join(path));
                SparseMatrix::read_matrix_market(BufReader::new(File::open(full)?))?
            }
        };
        if mat.rows() != self.rows || mat.cols() != self.cols {
            return Err(Error::Config(format!(
                "matrix is {}×{}, header says {}×{}",
                mat.rows(),
                mat.cols(),
                self.rows,
                self.cols
            )));
        }
        Ok(mat)
    }

    fn vector<T: Scalar>(&self, name: &str, len: usize) -> Result<Vec<T>> {
        let v = self.vectors.get(name).ok_or_else(|| Error::Config(format!("instance lacks vector {name:?}")))?;
        if v.len() != len {
            return Err(Error::Config(format!("vector {name:?} has length {}, expected {len}", v.len())));
        }
        Ok(from_f64_vec(v))
    }

    fn expect(&self, kinds: &[InstanceKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::Config(format!("instance kind {:?} does not fit this loader", self.kind)))
        }
    }

    pub fn to_quadratic<T: Scalar>(&self, base: Option<&Path>) -> Result<QuadraticProblem<T>> {
        self.expect(&[InstanceKind::Example2, InstanceKind::Chain, InstanceKind::Heterogeneous])?;
        let s = self.sparse_matrix::<T>(base)?.to_dense();
        let mut q = QuadraticProblem::new(s, self.vector("b", self.cols)?, self.cols)?;
        if self.vectors.contains_key("minimizer") {
            q.set_minimizer(self.vector("minimizer", self.cols)?);
        }
        Ok(q)
    }

    pub fn to_entropy_lp<T: Scalar>(&self, base: Option<&Path>) -> Result<EntropyLp<T>> {
        self.expect(&[InstanceKind::EntropyLp])?;
        let a = self.sparse_matrix::<T>(base)?.to_dense();
        let mut lp = EntropyLp::new(a, self.vector("b", self.rows)?, self.rows, self.cols)?;
        if self.vectors.contains_key("x_hat") {
            lp.x_hat = Some(self.vector("x_hat", self.cols)?);
        }
        Ok(lp)
    }

    pub fn to_least_squares<T: Scalar>(&self, base: Option<&Path>) -> Result<SeparableObjective<T>> {
        self.expect(&[InstanceKind::LeastSquares])?;
        let c = if self.vectors.contains_key("c") { self.vector("c", self.cols)? } else { vec![T::zero(); self.cols] };
        let obj = SeparableObjective::new(self.sparse_matrix(base)?, Phi::LeastSquares, self.vector("b", self.rows)?, c)?;
        Ok(match self.scalars.get("fstar") {
            Some(&f) => obj.with_fstar(T::lit(f)),
            None => obj,
        })
    }

    pub fn to_ridge<T: Scalar>(&self, base: Option<&Path>) -> Result<RidgeFiniteSum<T>> {
        self.expect(&[InstanceKind::Ridge])?;
        let lambda = *self.scalars.get("lambda").ok_or_else(|| Error::Config("ridge instance lacks lambda".into()))?;
        let a = self.sparse_matrix::<T>(base)?.to_dense();
        RidgeFiniteSum::new(a, self.vector("b", self.rows)?, self.rows, self.cols, lambda)
    }
}
