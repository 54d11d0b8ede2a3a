//! Interior-point backend for [`ConvexProgram`], built on Clarabel.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};
use crate::program::{ConeKind, ConvexProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Converged to reduced accuracy.
    AlmostOptimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::AlmostOptimal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSettings {
    pub max_iter: u32,
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
}

impl Default for ConicSettings {
    fn default() -> Self {
        Self { max_iter: 200, tol_feas: 1e-8, tol_gap_abs: 1e-8, tol_gap_rel: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: u32,
}

fn triplets_to_csc(m: usize, n: usize, mut t: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    t.sort_by_key(|(r, c, _)| (*c, *r));
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    for (r, c, v) in t {
        if v == 0.0 {
            continue;
        }
        if rows.last() == Some(&r) && cols.last() == Some(&c) {
            *vals.last_mut().unwrap() += v;
        } else {
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
    }
    CscMatrix::new_from_triplets(m, n, rows, cols, vals)
}

/// Solves `program`; infeasibility and numerical trouble are reported through
/// the status, malformed programs through `Err`.
pub fn solve_convex(program: &ConvexProgram, settings: &ConicSettings) -> Result<ConicSolution> {
    program.validate()?;
    let n = program.num_vars;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    for c in &program.constraints {
        let base = b.len();
        for (row, e) in c.exprs.iter().enumerate() {
            a.extend(e.terms.iter().map(|(i, v)| (base + row, *i, -*v)));
            b.push(e.constant);
        }
        let dim = c.exprs.len();
        cones.push(match c.cone {
            ConeKind::Zero => SupportedConeT::ZeroConeT(dim),
            ConeKind::Nonnegative => SupportedConeT::NonnegativeConeT(dim),
            ConeKind::SecondOrder => SupportedConeT::SecondOrderConeT(dim),
            ConeKind::Exponential => SupportedConeT::ExponentialConeT(),
        });
    }
    let p = triplets_to_csc(n, n, program.quadratic.clone());
    let mut q = vec![0.0; n];
    for (i, v) in &program.linear_objective.terms {
        q[*i] += v;
    }
    let a = triplets_to_csc(b.len(), n, a);
    let cfg = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(settings.max_iter)
        .tol_feas(settings.tol_feas)
        .tol_gap_abs(settings.tol_gap_abs)
        .tol_gap_rel(settings.tol_gap_rel)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &a, &b, &cones, cfg).map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let status = match solver.solution.status {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::AlmostSolved => SolveStatus::AlmostOptimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalFailure,
    };
    Ok(ConicSolution {
        status,
        objective: solver.solution.obj_val + program.linear_objective.constant,
        x: solver.solution.x.clone(),
        iterations: solver.solution.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{AffineExpr, ConstraintTag};

    #[test]
    fn scalar_lower_bound() {
        let mut p = ConvexProgram::new();
        p.add_block("t", 1);
        p.geq(AffineExpr::var(0), &AffineExpr::constant(5.0), ConstraintTag::aux());
        p.linear_objective = AffineExpr::var(0);
        let s = solve_convex(&p, &ConicSettings::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.x[0] - 5.0).abs() < 1e-7);
        assert!((s.objective - 5.0).abs() < 1e-7);
    }

    #[test]
    fn min_norm_on_hyperplane() {
        for n in [1, 3, 7] {
            let mut p = ConvexProgram::new();
            p.add_block("x", n);
            let sum = (0..n).fold(AffineExpr::constant(-1.0), |e, i| e.add_term(i, 1.0));
            p.eq0(sum, ConstraintTag::aux());
            for i in 0..n {
                p.add_quadratic(i, i, 1.0);
            }
            let s = solve_convex(&p, &ConicSettings::default()).unwrap();
            assert!(s.status.is_usable());
            for v in &s.x {
                assert!((v - 1.0 / n as f64).abs() < 1e-7);
            }
            assert!((s.objective - 1.0 / n as f64).abs() < 1e-7);
        }
    }

    #[test]
    fn same_norm_via_cones() {
        // min t s.t. t >= ||x||^2, sum x = 1 and min s s.t. s >= ||x||.
        let mut p = ConvexProgram::new();
        let x = p.add_block("x", 4);
        let t = p.add_block("t", 1).start;
        p.eq0(x.clone().fold(AffineExpr::constant(-1.0), |e, i| e.add_term(i, 1.0)), ConstraintTag::aux());
        p.square_epigraph(AffineExpr::var(t), x.clone().map(AffineExpr::var).collect(), ConstraintTag::aux());
        p.linear_objective = AffineExpr::var(t);
        let s = solve_convex(&p, &ConicSettings::default()).unwrap();
        assert!((s.objective - 0.25).abs() < 1e-7);
        assert!(p.max_violation(&s.x) < 1e-7);
    }

    #[test]
    fn exponential_cone_models_log() {
        // max ln(1 + f) s.t. f <= e^2 - 1  ->  t = 2.
        let mut p = ConvexProgram::new();
        p.add_block("f", 1);
        p.add_block("t", 1);
        p.exp_cone(AffineExpr::var(1), AffineExpr::constant(1.0), AffineExpr::var(0).add_constant(1.0), ConstraintTag::aux());
        p.geq0(AffineExpr::constant(2f64.exp() - 1.0).add_term(0, -1.0), ConstraintTag::aux());
        p.linear_objective = AffineExpr::term(1, -1.0);
        let s = solve_convex(&p, &ConicSettings::default()).unwrap();
        assert!((s.x[1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn distinct_failure_statuses() {
        let mut p = ConvexProgram::new();
        p.add_block("x", 1);
        p.geq0(AffineExpr::var(0).add_constant(-2.0), ConstraintTag::aux());
        p.geq0(AffineExpr::term(0, -1.0).add_constant(1.0), ConstraintTag::aux());
        assert_eq!(solve_convex(&p, &ConicSettings::default()).unwrap().status, SolveStatus::Infeasible);

        let mut p = ConvexProgram::new();
        p.add_block("x", 1);
        p.linear_objective = AffineExpr::var(0);
        assert_eq!(solve_convex(&p, &ConicSettings::default()).unwrap().status, SolveStatus::Unbounded);

        let mut p = ConvexProgram::new();
        p.add_block("x", 1);
        p.geq0(AffineExpr::var(4), ConstraintTag::aux());
        assert!(solve_convex(&p, &ConicSettings::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let mut p = ConvexProgram::new();
        let x = p.add_block("x", 3);
        p.eq0(x.clone().fold(AffineExpr::constant(-1.0), |e, i| e.add_term(i, (i + 1) as f64)), ConstraintTag::aux());
        for i in x {
            p.add_quadratic(i, i, 1.0 + i as f64);
        }
        let a = solve_convex(&p, &ConicSettings::default()).unwrap();
        let b = solve_convex(&p, &ConicSettings::default()).unwrap();
        assert_eq!(a, b);
    }
}
