//! Randomized incremental (Seidel) solver for linear programs in at most four variables.
//!
//! Problems are `maximize c·z subject to a_i·z ≤ b_i`. Every variable is additionally
//! boxed by `|z_j| ≤ big_m`; when the optimum leans on that box and a recession direction
//! improves the objective the program is reported unbounded.
//!
//! Constraints are inserted in a seeded random order. Whenever the running optimum violates
//! the next constraint, the problem is restricted to that constraint's hyperplane by
//! eliminating one variable and solved recursively in one dimension less. The expected
//! running time is linear in the number of constraints for a fixed dimension.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Coefficients below this fraction of a row's scale are treated as zero after elimination.
const PARALLEL_EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct LowDimLP {
    dim: usize,
    objective: Vec<f64>,
    /// Row-major, `dim` entries per constraint.
    coeffs: Vec<f64>,
    rhs: Vec<f64>,
}

impl LowDimLP {
    pub fn new(dim: usize, objective: &[f64]) -> Result<Self> {
        Self::with_capacity(dim, objective, 0)
    }

    pub fn with_capacity(dim: usize, objective: &[f64], constraints: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::invalid(format!("dimension {dim} outside [1, {MAX_DIM}]")));
        }
        if objective.len() != dim {
            return Err(Error::invalid(format!("objective has {} entries, expected {dim}", objective.len())));
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective has non-finite entries"));
        }
        Ok(LowDimLP {
            dim,
            objective: objective.to_vec(),
            coeffs: Vec::with_capacity(constraints * dim),
            rhs: Vec::with_capacity(constraints),
        })
    }

    /// Appends `a·z ≤ b` and returns its index.
    pub fn add_constraint(&mut self, a: &[f64], b: f64) -> Result<usize> {
        if a.len() != self.dim {
            return Err(Error::invalid(format!("constraint has {} coefficients, expected {}", a.len(), self.dim)));
        }
        if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("constraint {} has non-finite data", self.rhs.len())));
        }
        self.coeffs.extend_from_slice(a);
        self.rhs.push(b);
        Ok(self.rhs.len() - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn constraint(&self, i: usize) -> (&[f64], f64) {
        (&self.coeffs[i * self.dim..(i + 1) * self.dim], self.rhs[i])
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coeffs.chunks_exact(self.dim).zip(self.rhs.iter().copied())
    }

    /// `a_i·z − b_i`.
    pub fn slack_violation(&self, i: usize, z: &[f64]) -> f64 {
        let (a, b) = self.constraint(i);
        dot(a, z) - b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub z_star: Vec<f64>,
    pub value: f64,
    /// Linearly independent constraints defining `z_star`, ascending.
    pub active_basis: Vec<usize>,
}

impl LpSolution {
    fn without_point(dim: usize, status: LpStatus) -> Self {
        let value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        LpSolution { status, z_star: vec![f64::NAN; dim], value, active_basis: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub rng_seed: u64,
    /// Feasibility tolerance relative to `max(1, |b_i|)`.
    pub feas_eps: f64,
    /// Tightness tolerance relative to `max(1, |b_i|)`.
    pub act_eps: f64,
    pub big_m: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { rng_seed: 0, feas_eps: 1e-10, act_eps: 1e-8, big_m: 1e9 }
    }
}

impl SolverParams {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.feas_eps) && ok(self.act_eps) && ok(self.big_m) {
            Ok(())
        } else {
            Err(Error::invalid("solver tolerances and big_m must be positive and finite"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowId {
    Constraint(usize),
    Bound { var: usize, upper: bool },
}

#[derive(Debug, Clone, Copy)]
struct Row {
    a: [f64; MAX_DIM],
    b: f64,
    tol: f64,
    /// Largest coefficient magnitude of the row as given.
    scale: f64,
    id: RowId,
}

#[derive(Debug, Clone, Copy, Default)]
struct Basis {
    ids: [Option<RowId>; MAX_DIM],
    len: usize,
}

impl Basis {
    fn push(&mut self, id: RowId) {
        self.ids[self.len] = Some(id);
        self.len += 1;
    }

    fn iter(&self) -> impl Iterator<Item = RowId> + '_ {
        self.ids[..self.len].iter().flatten().copied()
    }
}

struct Context {
    big_m: f64,
    bound_tol: f64,
    c_tiny: f64,
}

#[inline]
fn dot(a: &[f64], z: &[f64]) -> f64 {
    a.iter().zip(z).map(|(x, y)| x * y).sum()
}

/// Solves `lp`. Deterministic for a fixed `params.rng_seed`.
pub fn solve(lp: &LowDimLP, params: &SolverParams) -> Result<LpSolution> {
    params.validate()?;
    let d = lp.dim;
    let mut rows: Vec<Row> = lp
        .constraints()
        .enumerate()
        .map(|(i, (a, b))| {
            let mut coef = [0.0; MAX_DIM];
            coef[..d].copy_from_slice(a);
            Row {
                a: coef,
                b,
                tol: params.feas_eps * b.abs().max(1.0),
                scale: a.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
                id: RowId::Constraint(i),
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    rows.shuffle(&mut rng);

    let mut c = [0.0; MAX_DIM];
    c[..d].copy_from_slice(&lp.objective);
    let c_norm = lp.objective.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let vars: Vec<usize> = (0..d).collect();
    let ctx = Context { big_m: params.big_m, bound_tol: params.feas_eps * params.big_m, c_tiny: 1e-12 * c_norm };

    let Some((point, basis)) = seidel(d, &vars, &c, &rows, &ctx) else {
        return Ok(LpSolution::without_point(d, LpStatus::Infeasible));
    };

    let leans_on_box = basis.iter().any(|id| matches!(id, RowId::Bound { .. }));
    if leans_on_box && has_improving_ray(d, &c, &rows, params, c_norm) {
        return Ok(LpSolution::without_point(d, LpStatus::Unbounded));
    }

    let z_star = point[..d].to_vec();
    let mut active_basis: Vec<usize> = basis
        .iter()
        .filter_map(|id| match id {
            RowId::Constraint(i) => Some(i),
            RowId::Bound { .. } => None,
        })
        .collect();
    active_basis.sort_unstable();
    let value = dot(&lp.objective, &z_star);
    Ok(LpSolution { status: LpStatus::Optimal, z_star, value, active_basis })
}

/// Whether some `r` with `a_i·r ≤ 0` for all rows has `c·r > 0`.
fn has_improving_ray(d: usize, c: &[f64; MAX_DIM], rows: &[Row], params: &SolverParams, c_norm: f64) -> bool {
    let cone: Vec<Row> = rows
        .iter()
        .map(|r| Row { b: 0.0, tol: params.feas_eps * r.scale.max(1.0), ..*r })
        .collect();
    let vars: Vec<usize> = (0..d).collect();
    let ctx = Context { big_m: 1.0, bound_tol: params.feas_eps, c_tiny: 1e-12 * c_norm };
    match seidel(d, &vars, c, &cone, &ctx) {
        Some((ray, _)) => dot(&c[..d], &ray[..d]) > 1e-9 * c_norm,
        None => false,
    }
}

/// Maximizes `c·y` over `rows` and the box `|y_k| ≤ big_m`. `None` when infeasible.
fn seidel(d: usize, vars: &[usize], c: &[f64; MAX_DIM], rows: &[Row], ctx: &Context) -> Option<([f64; MAX_DIM], Basis)> {
    if d == 1 {
        return solve_interval(vars[0], c[0], rows, ctx);
    }

    let mut v = [0.0; MAX_DIM];
    let mut basis = Basis::default();
    for k in 0..d {
        if c[k] > ctx.c_tiny {
            v[k] = ctx.big_m;
            basis.push(RowId::Bound { var: vars[k], upper: true });
        } else if c[k] < -ctx.c_tiny {
            v[k] = -ctx.big_m;
            basis.push(RowId::Bound { var: vars[k], upper: false });
        }
    }

    for (i, h) in rows.iter().enumerate() {
        if dot(&h.a[..d], &v[..d]) - h.b <= h.tol {
            continue;
        }

        let pivot = (0..d)
            .max_by(|&p, &q| h.a[p].abs().total_cmp(&h.a[q].abs()))
            .expect("d >= 2");
        let hp = h.a[pivot];
        if hp.abs() <= PARALLEL_EPS * h.scale || hp == 0.0 {
            // 0·z ≤ b with b < −tol.
            return None;
        }

        let mut sub_vars = [0usize; MAX_DIM];
        let mut k_sub = 0;
        let mut sub_c = [0.0; MAX_DIM];
        for k in (0..d).filter(|&k| k != pivot) {
            sub_vars[k_sub] = vars[k];
            sub_c[k_sub] = c[k] - c[pivot] * h.a[k] / hp;
            k_sub += 1;
        }

        let eliminate = |row: &Row| -> Row {
            let f = row.a[pivot] / hp;
            let mut a = [0.0; MAX_DIM];
            let mut k_sub = 0;
            for k in (0..d).filter(|&k| k != pivot) {
                a[k_sub] = row.a[k] - f * h.a[k];
                k_sub += 1;
            }
            Row { a, b: row.b - f * h.b, ..*row }
        };

        let mut sub_rows = Vec::with_capacity(i + 2);
        for upper in [true, false] {
            let mut a = [0.0; MAX_DIM];
            a[pivot] = if upper { 1.0 } else { -1.0 };
            let bound = Row {
                a,
                b: ctx.big_m,
                tol: ctx.bound_tol,
                scale: 1.0,
                id: RowId::Bound { var: vars[pivot], upper },
            };
            sub_rows.push(eliminate(&bound));
        }
        sub_rows.extend(rows[..i].iter().map(eliminate));

        let (y, sub_basis) = seidel(d - 1, &sub_vars[..d - 1], &sub_c, &sub_rows, ctx)?;

        let mut k_sub = 0;
        let mut acc = h.b;
        for k in (0..d).filter(|&k| k != pivot) {
            v[k] = y[k_sub];
            acc -= h.a[k] * y[k_sub];
            k_sub += 1;
        }
        v[pivot] = acc / hp;
        basis = sub_basis;
        basis.push(h.id);
    }
    Some((v, basis))
}

fn solve_interval(var: usize, c: f64, rows: &[Row], ctx: &Context) -> Option<([f64; MAX_DIM], Basis)> {
    // (value, id, slack allowance in y units)
    let mut lo = (-ctx.big_m, RowId::Bound { var, upper: false }, ctx.bound_tol);
    let mut hi = (ctx.big_m, RowId::Bound { var, upper: true }, ctx.bound_tol);
    for r in rows {
        let a = r.a[0];
        if a.abs() <= PARALLEL_EPS * r.scale || a == 0.0 {
            if r.b < -r.tol {
                return None;
            }
            continue;
        }
        let y = r.b / a;
        if a > 0.0 {
            if y < hi.0 {
                hi = (y, r.id, r.tol / a);
            }
        } else if y > lo.0 {
            lo = (y, r.id, r.tol / -a);
        }
    }
    if lo.0 - hi.0 > lo.2 + hi.2 {
        return None;
    }

    let mut basis = Basis::default();
    let y = if c > ctx.c_tiny {
        basis.push(hi.1);
        hi.0
    } else if c < -ctx.c_tiny {
        basis.push(lo.1);
        lo.0
    } else if lo.0 > 0.0 {
        basis.push(lo.1);
        lo.0
    } else if hi.0 < 0.0 {
        basis.push(hi.1);
        hi.0
    } else {
        0.0
    };
    let mut point = [0.0; MAX_DIM];
    point[0] = y;
    Some((point, basis))
}

/// Every constraint tight at the optimum: `|a_i·z* − b_i| ≤ act_eps·max(1, |b_i|)`.
pub fn active_set(lp: &LowDimLP, sol: &LpSolution, params: &SolverParams) -> Result<Vec<usize>> {
    if sol.status != LpStatus::Optimal {
        return Err(Error::InvalidState(format!("active set requested for a {:?} solution", sol.status)));
    }
    Ok((0..lp.num_constraints())
        .filter(|&i| {
            let (_, b) = lp.constraint(i);
            lp.slack_violation(i, &sol.z_star).abs() <= params.act_eps * b.abs().max(1.0)
        })
        .collect())
}
