//! Solver-agnostic model representation.

use std::collections::HashSet;
use std::fmt;

use crate::error::ModelError;

/// Index of a variable inside a [`ModelIR`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
    pub objective: f64,
}

/// A linear row `sum(coeff * var) sense rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn new(name: impl Into<String>, coeffs: Vec<(VarId, f64)>, sense: Sense, rhs: f64) -> Self {
        Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization model: variables with finite bounds, linear rows, objective
/// `sum(objective_j * x_j) + objective_offset`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelIR {
    pub name: String,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    pub objective_offset: f64,
}

impl ModelIR {
    pub fn new(name: impl Into<String>) -> Self {
        ModelIR {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
        objective: f64,
    ) -> VarId {
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
            objective,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, objective: f64) -> VarId {
        self.add_var(name, 0.0, 1.0, true, objective)
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.add_row(Row::new(name, coeffs, sense, rhs))
    }

    pub fn is_pure_lp(&self) -> bool {
        self.vars.iter().all(|v| !v.integer)
    }

    /// Objective value of `values`, offset included.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .vars
                .iter()
                .zip(values)
                .map(|(v, x)| v.objective * x)
                .sum::<f64>()
    }

    /// True when every variable with a nonzero objective coefficient is
    /// integer and all coefficients (and the offset) are integral.
    pub fn has_integral_objective(&self) -> bool {
        let integral = |c: f64| (c - c.round()).abs() < 1e-9;
        integral(self.objective_offset)
            && self
                .vars
                .iter()
                .all(|v| v.objective == 0.0 || (v.integer && integral(v.objective)))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::with_capacity(self.vars.len());
        for v in &self.vars {
            if !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(ModelError::InfiniteBound(v.name.clone()));
            }
            if v.lower > v.upper {
                return Err(ModelError::EmptyDomain(v.name.clone(), v.lower, v.upper));
            }
            if !v.objective.is_finite() {
                return Err(ModelError::NonFinite(format!("objective of {}", v.name)));
            }
            if !names.insert(v.name.as_str()) {
                return Err(ModelError::DuplicateName(v.name.clone()));
            }
        }
        let mut row_names = HashSet::with_capacity(self.rows.len());
        for r in &self.rows {
            if !row_names.insert(r.name.as_str()) {
                return Err(ModelError::DuplicateName(r.name.clone()));
            }
            if !r.rhs.is_finite() {
                return Err(ModelError::NonFinite(format!("rhs of {}", r.name)));
            }
            for &(v, c) in &r.coeffs {
                if v.0 >= self.vars.len() {
                    return Err(ModelError::UnknownVariable(v.0, r.name.clone()));
                }
                if !c.is_finite() {
                    return Err(ModelError::NonFinite(format!("coefficient in {}", r.name)));
                }
            }
        }
        Ok(())
    }

    /// Copy of the model with `rows` appended.
    pub fn add_rows(&self, rows: impl IntoIterator<Item = Row>) -> Result<ModelIR, ModelError> {
        let mut out = self.clone();
        for row in rows {
            if let Some(&(v, _)) = row.coeffs.iter().find(|(v, _)| v.0 >= self.vars.len()) {
                return Err(ModelError::UnknownVariable(v.0, row.name));
            }
            out.rows.push(row);
        }
        Ok(out)
    }

    /// Copy of the model with `var` fixed to `value`.
    pub fn fix_variable(&self, var: VarId, value: f64) -> Result<ModelIR, ModelError> {
        let mut out = self.clone();
        let v = out
            .vars
            .get_mut(var.0)
            .ok_or_else(|| ModelError::UnknownVariable(var.0, "fix_variable".into()))?;
        v.lower = value;
        v.upper = value;
        Ok(out)
    }

    /// Largest violation of bounds, integrality and rows by `values`.
    pub fn max_violation(&self, values: &[f64], check_integrality: bool) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &x) in self.vars.iter().zip(values) {
            worst = worst.max(v.lower - x).max(x - v.upper);
            if check_integrality && v.integer {
                worst = worst.max((x - x.round()).abs());
            }
        }
        for r in &self.rows {
            worst = worst.max(r.violation(values));
        }
        worst
    }

    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        values.len() == self.vars.len() && self.max_violation(values, true) <= tol
    }
}
