//! Linear and Gram-form semidefinite programs, feasibility checks and solvers.
//!
//! A [`GramSdpModel`] keeps a positive semidefinite matrix only for the
//! vectors that appear through inner products with each other (the outlier
//! vectors `z_v`). Vectors that only appear through their squared norm, such
//! as `x_v` and `y_uv`, are replaced by a scalar `s = |x|^2` in `[0, 1]`: any
//! such scalar is realized by a vector of that length in a fresh coordinate,
//! and a constraint or objective that never takes inner products of them
//! cannot tell the two apart.

mod sdp;
mod simplex;

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub use sdp::{sdp_solve, sdp_solve_with, SdpOptions};
pub use simplex::{lp_solve, lp_solve_with, LpOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvexError {
    #[error("the model is infeasible")]
    Infeasible,
    #[error("the model is unbounded")]
    Unbounded,
    #[error("iteration limit reached after {iterations} iterations (max violation {violation:.3e})")]
    IterationLimit {
        iterations: usize,
        violation: f64,
        best: Option<Box<Assignment>>,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Sparse `Σ coef · var >= rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// `min c·x` subject to `A x >= b` and `0 <= x <= upper`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    names: Vec<String>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rows: Vec<LinearRow>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with bounds `[0, upper]`; pass `f64::INFINITY` for `[0, ∞)`.
    pub fn add_var(&mut self, name: impl Into<String>, upper: f64, cost: f64) -> usize {
        assert!(upper >= 0.0 && cost.is_finite());
        self.names.push(name.into());
        self.upper.push(upper);
        self.cost.push(cost);
        self.names.len() - 1
    }

    /// Adds `Σ terms >= rhs`. Repeated variables are merged, zeros dropped.
    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rhs: f64) -> usize {
        let terms = merge_terms(terms);
        assert!(
            terms.iter().all(|&(v, c)| v < self.names.len() && c.is_finite()),
            "row references an undeclared variable"
        );
        assert!(rhs.is_finite());
        self.rows.push(LinearRow { terms, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn upper(&self, v: usize) -> f64 {
        self.upper[v]
    }

    pub fn cost(&self, v: usize) -> f64 {
        self.cost[v]
    }

    pub fn rows(&self) -> &[LinearRow] {
        &self.rows
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Packs values into an [`Assignment`] with the objective filled in.
    pub fn assignment(&self, values: Vec<f64>) -> Assignment {
        let objective = self.objective_value(&values);
        Assignment { values, gram: None, objective }
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "lp vars {} rows {}", self.num_vars(), self.num_rows()).unwrap();
        dump_vars(&mut s, &self.names, &self.upper, &self.cost);
        for (i, r) in self.rows.iter().enumerate() {
            dump_row(&mut s, i, &r.terms, &[], &self.names, r.rhs);
        }
        s
    }
}

/// A row of a [`GramSdpModel`]: `Σ scalar terms + Σ coef · Z_ij >= rhs`.
/// Each gram term names one matrix entry with `i <= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramRow {
    pub scalars: Vec<(usize, f64)>,
    pub gram: Vec<(usize, usize, f64)>,
    pub rhs: f64,
}

/// `min c·s` over scalars `s ∈ [0, upper]` and a symmetric `Z ⪰ 0` with
/// `Z_vv <= 1` and `trace(Z) <= trace_bound`, subject to [`GramRow`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSdpModel {
    names: Vec<String>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    dim: usize,
    trace_bound: f64,
    rows: Vec<GramRow>,
}

impl GramSdpModel {
    pub fn new(dim: usize, trace_bound: f64) -> Self {
        assert!(trace_bound >= 0.0);
        GramSdpModel {
            names: Vec::new(),
            upper: Vec::new(),
            cost: Vec::new(),
            dim,
            trace_bound,
            rows: Vec::new(),
        }
    }

    pub fn add_scalar(&mut self, name: impl Into<String>, upper: f64, cost: f64) -> usize {
        assert!(upper >= 0.0 && upper.is_finite() && cost.is_finite());
        self.names.push(name.into());
        self.upper.push(upper);
        self.cost.push(cost);
        self.names.len() - 1
    }

    pub fn add_row(&mut self, scalars: Vec<(usize, f64)>, gram: Vec<(usize, usize, f64)>, rhs: f64) -> usize {
        let scalars = merge_terms(scalars);
        assert!(scalars.iter().all(|&(v, _)| v < self.names.len()));
        let mut g: Vec<(usize, usize, f64)> = gram
            .into_iter()
            .map(|(i, j, c)| (i.min(j), i.max(j), c))
            .collect();
        g.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(g.len());
        for (i, j, c) in g {
            assert!(j < self.dim, "gram entry out of range");
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (i, j) => last.2 += c,
                _ => merged.push((i, j, c)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        self.rows.push(GramRow { scalars, gram: merged, rhs });
        self.rows.len() - 1
    }

    pub fn num_scalars(&self) -> usize {
        self.names.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace_bound(&self) -> f64 {
        self.trace_bound
    }

    pub fn rows(&self) -> &[GramRow] {
        &self.rows
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn upper(&self, v: usize) -> f64 {
        self.upper[v]
    }

    pub fn cost(&self, v: usize) -> f64 {
        self.cost[v]
    }

    pub fn objective_value(&self, s: &[f64]) -> f64 {
        self.cost.iter().zip(s).map(|(c, v)| c * v).sum()
    }

    /// Packs scalars and a row-major `dim × dim` Gram matrix into an [`Assignment`].
    pub fn assignment(&self, values: Vec<f64>, gram: Vec<f64>) -> Assignment {
        let objective = self.objective_value(&values);
        Assignment { values, gram: Some(gram), objective }
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "sdp scalars {} gram {} trace<= {} rows {}",
            self.num_scalars(),
            self.dim,
            self.trace_bound,
            self.rows.len()
        )
        .unwrap();
        dump_vars(&mut s, &self.names, &self.upper, &self.cost);
        for (i, r) in self.rows.iter().enumerate() {
            dump_row(&mut s, i, &r.scalars, &r.gram, &self.names, r.rhs);
        }
        s
    }
}

fn merge_terms(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

fn dump_vars(s: &mut String, names: &[String], upper: &[f64], cost: &[f64]) {
    for (i, name) in names.iter().enumerate() {
        let ub = if upper[i].is_finite() { format!("{}", upper[i]) } else { "inf".into() };
        writeln!(s, "var {i} {name} [0,{ub}] cost {}", cost[i]).unwrap();
    }
}

fn dump_row(s: &mut String, i: usize, terms: &[(usize, f64)], gram: &[(usize, usize, f64)], names: &[String], rhs: f64) {
    write!(s, "row {i}:").unwrap();
    for &(v, c) in terms {
        write!(s, " {c:+} {}", names[v]).unwrap();
    }
    for &(a, b, c) in gram {
        write!(s, " {c:+} Z[{a},{b}]").unwrap();
    }
    writeln!(s, " >= {rhs}").unwrap();
}

/// Candidate or optimal solution of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<f64>,
    /// Row-major Gram matrix for SDP models.
    pub gram: Option<Vec<f64>>,
    pub objective: f64,
}

impl Assignment {
    pub fn gram_entry(&self, dim: usize, i: usize, j: usize) -> f64 {
        self.gram.as_ref().map_or(0.0, |g| g[i * dim + j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRef {
    Row(usize),
    Lower(usize),
    Upper(usize),
    GramDiag(usize),
    Trace,
    Psd,
    Symmetry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: ConstraintRef,
    /// Signed slack; negative by more than the tolerance.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().map(|v| -v.slack).fold(0.0, f64::max)
    }
}

pub trait ConvexModel {
    fn check(&self, a: &Assignment, tol: f64) -> Result<FeasibilityReport, ConvexError>;
}

/// Lists every constraint violated by more than `tol`.
pub fn check_feasible<M: ConvexModel + ?Sized>(model: &M, a: &Assignment, tol: f64) -> Result<FeasibilityReport, ConvexError> {
    model.check(a, tol)
}

fn check_bounds(out: &mut Vec<Violation>, values: &[f64], upper: &[f64], tol: f64) {
    for (v, (&x, &u)) in values.iter().zip(upper).enumerate() {
        if x < -tol {
            out.push(Violation { constraint: ConstraintRef::Lower(v), slack: x });
        }
        if x > u + tol {
            out.push(Violation { constraint: ConstraintRef::Upper(v), slack: u - x });
        }
    }
}

impl ConvexModel for LpModel {
    fn check(&self, a: &Assignment, tol: f64) -> Result<FeasibilityReport, ConvexError> {
        if a.values.len() != self.num_vars() {
            return Err(ConvexError::DimensionMismatch { expected: self.num_vars(), got: a.values.len() });
        }
        let mut out = Vec::new();
        check_bounds(&mut out, &a.values, &self.upper, tol);
        for (i, r) in self.rows.iter().enumerate() {
            let lhs: f64 = r.terms.iter().map(|&(v, c)| c * a.values[v]).sum();
            if lhs < r.rhs - tol {
                out.push(Violation { constraint: ConstraintRef::Row(i), slack: lhs - r.rhs });
            }
        }
        Ok(FeasibilityReport { violations: out })
    }
}

impl ConvexModel for GramSdpModel {
    fn check(&self, a: &Assignment, tol: f64) -> Result<FeasibilityReport, ConvexError> {
        if a.values.len() != self.num_scalars() {
            return Err(ConvexError::DimensionMismatch { expected: self.num_scalars(), got: a.values.len() });
        }
        let n = self.dim;
        let zero = vec![0.0; n * n];
        let g = a.gram.as_deref().unwrap_or(&zero);
        if g.len() != n * n {
            return Err(ConvexError::DimensionMismatch { expected: n * n, got: g.len() });
        }
        let mut out = Vec::new();
        check_bounds(&mut out, &a.values, &self.upper, tol);
        for (i, r) in self.rows.iter().enumerate() {
            let lhs: f64 = r.scalars.iter().map(|&(v, c)| c * a.values[v]).sum::<f64>()
                + r.gram.iter().map(|&(p, q, c)| c * g[p * n + q]).sum::<f64>();
            if lhs < r.rhs - tol {
                out.push(Violation { constraint: ConstraintRef::Row(i), slack: lhs - r.rhs });
            }
        }
        let mut asym = 0.0f64;
        for i in 0..n {
            if g[i * n + i] > 1.0 + tol {
                out.push(Violation { constraint: ConstraintRef::GramDiag(i), slack: 1.0 - g[i * n + i] });
            }
            for j in 0..i {
                asym = asym.max((g[i * n + j] - g[j * n + i]).abs());
            }
        }
        if asym > tol {
            out.push(Violation { constraint: ConstraintRef::Symmetry, slack: -asym });
        }
        let trace: f64 = (0..n).map(|i| g[i * n + i]).sum();
        if trace > self.trace_bound + tol {
            out.push(Violation { constraint: ConstraintRef::Trace, slack: self.trace_bound - trace });
        }
        if n > 0 {
            let min_eig = min_eigenvalue(g, n);
            if min_eig < -tol {
                out.push(Violation { constraint: ConstraintRef::Psd, slack: min_eig });
            }
        }
        Ok(FeasibilityReport { violations: out })
    }
}

/// Smallest eigenvalue of the symmetric part of a row-major square matrix.
pub fn min_eigenvalue(g: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (g[i * n + j] + g[j * n + i]));
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_check_reports_rows_and_bounds() {
        let mut m = LpModel::new();
        let x = m.add_var("x", 1.0, 1.0);
        let y = m.add_var("y", f64::INFINITY, 1.0);
        m.add_row(vec![(x, 1.0), (y, 1.0)], 1.0);
        let rep = check_feasible(&m, &m.assignment(vec![0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].constraint, ConstraintRef::Row(0));
        let rep = check_feasible(&m, &m.assignment(vec![1.5, -0.5]), 1e-9).unwrap();
        assert_eq!(rep.violations.len(), 2);
        assert!(check_feasible(&m, &m.assignment(vec![0.5, 0.5]), 1e-9).unwrap().is_feasible());
        assert!(matches!(
            check_feasible(&m, &m.assignment(vec![0.5]), 1e-9),
            Err(ConvexError::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn sdp_check_catches_cone_violations() {
        let mut m = GramSdpModel::new(2, 1.0);
        let s = m.add_scalar("s", 1.0, 1.0);
        m.add_row(vec![(s, 1.0)], vec![(0, 1, 1.0)], 1.0);
        let ok = m.assignment(vec![0.5], vec![0.5, 0.5, 0.5, 0.5]);
        assert!(check_feasible(&m, &ok, 1e-9).unwrap().is_feasible());
        let bad = m.assignment(vec![1.0], vec![0.5, -1.0, -1.0, 0.5]);
        let kinds: Vec<_> = check_feasible(&m, &bad, 1e-9)
            .unwrap()
            .violations
            .into_iter()
            .map(|v| v.constraint)
            .collect();
        assert_eq!(kinds, vec![ConstraintRef::Row(0), ConstraintRef::Psd]);
        let big = m.assignment(vec![1.0], vec![1.0, 0.0, 0.0, 1.0]);
        let kinds: Vec<_> = check_feasible(&m, &big, 1e-9).unwrap().violations.into_iter().map(|v| v.constraint).collect();
        assert_eq!(kinds, vec![ConstraintRef::Trace]);
    }

    #[test]
    fn dump_is_stable() {
        let mut m = LpModel::new();
        let x = m.add_var("x_1", 1.0, 3.0);
        let y = m.add_var("y_1_2", f64::INFINITY, 1.0);
        m.add_row(vec![(y, 1.0), (x, 1.0), (x, 0.0)], 1.0);
        assert_eq!(
            m.dump(),
            "lp vars 2 rows 1\nvar 0 x_1 [0,1] cost 3\nvar 1 y_1_2 [0,inf] cost 1\nrow 0: +1 x_1 +1 y_1_2 >= 1\n"
        );
    }
}
