//! Solver-agnostic description of a convex subproblem.
//!
//! Variables are a flat real vector partitioned into named blocks. Every
//! constraint is a cone membership of a tuple of affine expressions, tagged
//! with the logical constraint it implements.

use std::collections::BTreeSet;
use std::ops::Range;

use crate::error::{Error, Result};

/// Sparse affine expression `sum_i coeff_i v_i + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(index: usize) -> Self {
        Self::term(index, 1.0)
    }

    pub fn term(index: usize, coeff: f64) -> Self {
        Self { terms: vec![(index, coeff)], constant: 0.0 }
    }

    pub fn add_term(mut self, index: usize, coeff: f64) -> Self {
        self.terms.push((index, coeff));
        self
    }

    pub fn add_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn plus(mut self, other: &AffineExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }

    pub fn minus(self, other: &AffineExpr) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(i, c)| (*i, c * s)).collect(),
            constant: self.constant * s,
        }
    }

    pub fn evaluate(&self, v: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, (i, c)| acc + c * v[*i])
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|(i, _)| *i).max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// Each expression equals zero.
    Zero,
    /// Each expression is non-negative.
    Nonnegative,
    /// `e_0 >= ||(e_1, ..., e_n)||`.
    SecondOrder,
    /// `(e_0, e_1, e_2)` with `e_1 exp(e_0 / e_1) <= e_2`, `e_1 > 0`.
    Exponential,
}

/// Logical constraint groups of the subproblems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Common-stream decodability at one user.
    CommonDecoding,
    /// Private-stream SINR slack definition at one user.
    PrivateRate,
    /// Per-user minimum rate.
    Qos,
    /// Radar beampattern error.
    Beampattern,
    /// Transmit power budget.
    PowerBudget,
    /// Sign constraints on the slack variables of one user.
    Nonnegativity,
    /// Common-rate split sum.
    CommonSplit,
    /// Epigraph rows and other modelling artifacts.
    Auxiliary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintTag {
    pub family: Family,
    pub user: Option<usize>,
}

impl ConstraintTag {
    pub fn user(family: Family, k: usize) -> Self {
        Self { family, user: Some(k) }
    }

    pub fn global(family: Family) -> Self {
        Self { family, user: None }
    }

    pub fn aux() -> Self {
        Self::global(Family::Auxiliary)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub cone: ConeKind,
    pub exprs: Vec<AffineExpr>,
    pub tag: ConstraintTag,
}

impl Constraint {
    /// Signed violation: `<= 0` when satisfied.
    pub fn violation(&self, v: &[f64]) -> f64 {
        let e: Vec<f64> = self.exprs.iter().map(|x| x.evaluate(v)).collect();
        match self.cone {
            ConeKind::Zero => e.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            ConeKind::Nonnegative => e.iter().fold(f64::NEG_INFINITY, |m, x| m.max(-x)),
            ConeKind::SecondOrder => e[1..].iter().map(|x| x * x).sum::<f64>().sqrt() - e[0],
            ConeKind::Exponential => {
                if e[1] > 0.0 {
                    e[1] * (e[0] / e[1]).exp() - e[2]
                } else if e[1] == 0.0 && e[0] <= 0.0 {
                    -e[2]
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBlock {
    pub name: String,
    pub range: Range<usize>,
}

/// `minimize 1/2 v' P v + q' v + c` subject to cone constraints.
///
/// `quadratic` holds upper-triangular entries `(row, col, value)` of `P`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvexProgram {
    pub blocks: Vec<VarBlock>,
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    pub linear_objective: AffineExpr,
    pub quadratic: Vec<(usize, usize, f64)>,
    /// Free-form modelling notes, e.g. how the log objective is represented.
    pub notes: Vec<String>,
}

impl ConvexProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a block of `len` scalar variables and returns its index range.
    pub fn add_block(&mut self, name: &str, len: usize) -> Range<usize> {
        let range = self.num_vars..self.num_vars + len;
        self.num_vars += len;
        self.blocks.push(VarBlock { name: name.to_string(), range: range.clone() });
        range
    }

    pub fn block(&self, name: &str) -> Option<&Range<usize>> {
        self.blocks.iter().find(|b| b.name == name).map(|b| &b.range)
    }

    pub fn push(&mut self, cone: ConeKind, exprs: Vec<AffineExpr>, tag: ConstraintTag) {
        self.constraints.push(Constraint { cone, exprs, tag });
    }

    pub fn eq0(&mut self, e: AffineExpr, tag: ConstraintTag) {
        self.push(ConeKind::Zero, vec![e], tag);
    }

    /// `e >= 0`.
    pub fn geq0(&mut self, e: AffineExpr, tag: ConstraintTag) {
        self.push(ConeKind::Nonnegative, vec![e], tag);
    }

    /// `lhs >= rhs`.
    pub fn geq(&mut self, lhs: AffineExpr, rhs: &AffineExpr, tag: ConstraintTag) {
        self.geq0(lhs.minus(rhs), tag);
    }

    /// `t >= ||w||`.
    pub fn soc(&mut self, t: AffineExpr, w: Vec<AffineExpr>, tag: ConstraintTag) {
        let mut exprs = vec![t];
        exprs.extend(w);
        self.push(ConeKind::SecondOrder, exprs, tag);
    }

    /// `u v >= ||w||^2 / 2` with `u, v >= 0`, as `(u+v) >= ||(u-v, sqrt2 w)||`.
    pub fn rotated_soc(&mut self, u: AffineExpr, v: AffineExpr, w: Vec<AffineExpr>, tag: ConstraintTag) {
        let s = std::f64::consts::SQRT_2;
        let mut rest = vec![u.clone().minus(&v)];
        rest.extend(w.iter().map(|e| e.scaled(s)));
        self.soc(u.plus(&v), rest, tag);
    }

    /// `t >= ||w||^2`, via `t * 1/2 >= ||w||^2 / 2`.
    pub fn square_epigraph(&mut self, t: AffineExpr, w: Vec<AffineExpr>, tag: ConstraintTag) {
        self.rotated_soc(t, AffineExpr::constant(0.5), w, tag);
    }

    /// `y exp(x / y) <= z`.
    pub fn exp_cone(&mut self, x: AffineExpr, y: AffineExpr, z: AffineExpr, tag: ConstraintTag) {
        self.push(ConeKind::Exponential, vec![x, y, z], tag);
    }

    /// Adds `coeff * v_i v_j` to the objective (both orders are folded into the upper triangle).
    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        // P holds the Hessian: v'Pv/2 with P_ii = 2 coeff for squares.
        let value = if r == c { 2.0 * coeff } else { coeff };
        self.quadratic.push((r, c, value));
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        let quad = self.quadratic.iter().fold(0.0, |acc, (r, c, p)| {
            if r == c {
                acc + 0.5 * p * v[*r] * v[*r]
            } else {
                acc + p * v[*r] * v[*c]
            }
        });
        quad + self.linear_objective.evaluate(v)
    }

    /// Largest constraint violation at `v` (`<= 0` when all hold).
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(v)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of distinct logical constraints, ignoring auxiliary rows.
    pub fn logical_constraint_count(&self) -> usize {
        self.logical_tags().len()
    }

    pub fn logical_tags(&self) -> BTreeSet<ConstraintTag> {
        self.constraints
            .iter()
            .map(|c| c.tag)
            .filter(|t| t.family != Family::Auxiliary)
            .collect()
    }

    /// Checks that every constraint only touches declared variables and has
    /// the right arity for its cone.
    pub fn validate(&self) -> Result<()> {
        let bad_index = |e: &AffineExpr| e.max_index().is_some_and(|i| i >= self.num_vars);
        for (n, c) in self.constraints.iter().enumerate() {
            if c.exprs.iter().any(bad_index) {
                return Err(Error::DimensionMismatch(format!("constraint {n} references an undeclared variable")));
            }
            let arity_ok = match c.cone {
                ConeKind::Zero | ConeKind::Nonnegative => !c.exprs.is_empty(),
                ConeKind::SecondOrder => c.exprs.len() >= 2,
                ConeKind::Exponential => c.exprs.len() == 3,
            };
            if !arity_ok {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {n}: {} expressions for a {:?} cone",
                    c.exprs.len(),
                    c.cone
                )));
            }
        }
        if bad_index(&self.linear_objective) || self.quadratic.iter().any(|(r, c, _)| *r >= self.num_vars || *c >= self.num_vars) {
            return Err(Error::DimensionMismatch("objective references an undeclared variable".into()));
        }
        Ok(())
    }
}
