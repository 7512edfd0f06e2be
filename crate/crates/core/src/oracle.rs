//! Brute-force reference computations used to cross-check the fast paths.
//!
//! Everything here is deliberately naive and independent of [`crate::sdlp`]: vertex
//! enumeration for linear programs, a dense phase-one simplex for hull intersection,
//! bisection for the touching scale and central finite differences. Input sizes are
//! capped; these routines are for desk-scale verification only.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::scale::ConvexSetV;
use crate::sdlp::{LowDimLP, LpSolution, LpStatus, MAX_DIM};

/// Largest constraint count accepted by [`solve_lp_enumeration`].
pub const MAX_ENUMERATION_CONSTRAINTS: usize = 200;
/// Largest combined point count accepted by [`hulls_intersect`].
pub const MAX_HULL_POINTS: usize = 400;
/// Absolute accuracy of [`min_scale_bisection`].
pub const BISECTION_TOL: f64 = 1e-9;

const ENUM_BIG_M: f64 = 1e9;
const ENUM_FEAS_EPS: f64 = 1e-9;
const SIMPLEX_EPS: f64 = 1e-12;
/// Phase-one infeasibility (in normalized coordinates) below which hulls are declared touching.
const INTERSECT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdParams {
    pub h: f64,
    pub scheme: FdScheme,
}

impl Default for FdParams {
    fn default() -> Self {
        FdParams { h: 1e-6, scheme: FdScheme::Central }
    }
}

/// Central-difference gradient of `f` at `x`. Non-finite values propagate.
pub fn finite_diff<F>(mut f: F, x: &[f64], params: &FdParams) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(params.h > 0.0 && params.h.is_finite()) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let FdScheme::Central = params.scheme;
    let mut probe = x.to_vec();
    Ok((0..x.len())
        .map(|i| {
            probe[i] = x[i] + params.h;
            let up = f(&probe);
            probe[i] = x[i] - params.h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * params.h)
        })
        .collect())
}

/// Solves a square system in place by Gaussian elimination with partial pivoting.
fn solve_square(m: &mut [[f64; MAX_DIM]; MAX_DIM], rhs: &mut [f64; MAX_DIM], d: usize, scale: f64) -> bool {
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[piv][col].abs() <= 1e-12 * scale {
            return false;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..d {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for k in col..d {
                    m[r][k] -= f * m[col][k];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    for col in (0..d).rev() {
        let mut acc = rhs[col];
        for k in col + 1..d {
            acc -= m[col][k] * rhs[k];
        }
        rhs[col] = acc / m[col][col];
    }
    true
}

/// Best vertex of the program boxed by `|z_j| ≤ big_m`: (value, point, defining rows).
fn best_vertex(lp: &LowDimLP, big_m: f64) -> Option<(f64, [f64; MAX_DIM], Vec<usize>)> {
    let d = lp.dim();
    let m = lp.num_constraints();
    // Constraint rows first, then the box: index m + 2j is z_j ≤ M, m + 2j + 1 is −z_j ≤ M.
    let mut rows: Vec<([f64; MAX_DIM], f64)> = lp
        .constraints()
        .map(|(a, b)| {
            let mut r = [0.0; MAX_DIM];
            r[..d].copy_from_slice(a);
            (r, b)
        })
        .collect();
    for j in 0..d {
        let mut up = [0.0; MAX_DIM];
        up[j] = 1.0;
        let mut down = [0.0; MAX_DIM];
        down[j] = -1.0;
        rows.push((up, big_m));
        rows.push((down, big_m));
    }
    let scales: Vec<f64> = rows.iter().map(|(a, _)| a.iter().fold(0.0_f64, |s, v| s.max(v.abs()))).collect();
    let c = lp.objective();

    let feasible = |z: &[f64; MAX_DIM]| {
        rows.iter().all(|(a, b)| {
            let lhs: f64 = (0..d).map(|k| a[k] * z[k]).sum();
            let mag: f64 = (0..d).map(|k| (a[k] * z[k]).abs()).sum();
            lhs - b <= ENUM_FEAS_EPS * b.abs().max(mag).max(1.0)
        })
    };

    let n = rows.len();
    let mut best: Option<(f64, [f64; MAX_DIM], Vec<usize>)> = None;
    let mut idx: Vec<usize> = (0..d).collect();
    if n < d {
        return None;
    }
    loop {
        let mut mat = [[0.0; MAX_DIM]; MAX_DIM];
        let mut rhs = [0.0; MAX_DIM];
        let mut scale = 0.0_f64;
        for (r, &i) in idx.iter().enumerate() {
            mat[r] = rows[i].0;
            rhs[r] = rows[i].1;
            scale = scale.max(scales[i]);
        }
        if scale > 0.0 && solve_square(&mut mat, &mut rhs, d, scale) {
            let value: f64 = (0..d).map(|k| c[k] * rhs[k]).sum();
            let improves = best.as_ref().is_none_or(|(v, _, _)| value > *v);
            if improves && feasible(&rhs) {
                best = Some((value, rhs, idx.iter().copied().filter(|&i| i < m).collect()));
            }
        }

        // Next combination in lexicographic order.
        let mut k = d;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < n - d + k {
                break;
            }
        }
        idx[k] += 1;
        for j in k + 1..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Solves `lp` by enumerating every vertex of the program boxed by `|z_j| ≤ 1e9`.
///
/// The program is reported unbounded when doubling the box raises the optimum.
/// Refuses more than [`MAX_ENUMERATION_CONSTRAINTS`] constraints.
pub fn solve_lp_enumeration(lp: &LowDimLP) -> Result<LpSolution> {
    if lp.num_constraints() > MAX_ENUMERATION_CONSTRAINTS {
        return Err(Error::invalid(format!(
            "enumeration oracle refuses {} constraints (limit {MAX_ENUMERATION_CONSTRAINTS})",
            lp.num_constraints()
        )));
    }
    let d = lp.dim();
    let Some((value, z, basis)) = best_vertex(lp, ENUM_BIG_M) else {
        return Ok(LpSolution { status: LpStatus::Infeasible, z_star: vec![f64::NAN; d], value: f64::NEG_INFINITY, active_basis: vec![] });
    };
    let touches_box = z[..d].iter().any(|v| v.abs() >= 0.5 * ENUM_BIG_M);
    if touches_box {
        let c_norm = lp.objective().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if let Some((wider, _, _)) = best_vertex(lp, 2.0 * ENUM_BIG_M) {
            if wider - value > 1e-9 * ENUM_BIG_M * c_norm {
                return Ok(LpSolution { status: LpStatus::Unbounded, z_star: vec![f64::NAN; d], value: f64::INFINITY, active_basis: vec![] });
            }
        }
    }
    let mut active_basis = basis;
    active_basis.sort_unstable();
    Ok(LpSolution { status: LpStatus::Optimal, z_star: z[..d].to_vec(), value, active_basis })
}

/// Minimum total artificial infeasibility of `A x = b, x ≥ 0` (phase-one simplex, Bland's rule).
fn phase_one_residual(a: &[Vec<f64>], b: &[f64]) -> f64 {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let width = cols + rows + 1;
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|r| {
            let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
            let mut line = vec![0.0; width];
            for c in 0..cols {
                line[c] = sign * a[r][c];
            }
            line[cols + r] = 1.0;
            line[width - 1] = sign * b[r];
            line
        })
        .collect();
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost = vec![0.0; width];
    for line in &t {
        for c in 0..cols {
            cost[c] -= line[c];
        }
        cost[width - 1] -= line[width - 1];
    }

    for _ in 0..50 * (cols + rows).max(10) {
        let Some(enter) = (0..cols + rows).find(|&c| cost[c] < -SIMPLEX_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..rows {
            if t[r][enter] > SIMPLEX_EPS {
                let ratio = t[r][width - 1] / t[r][enter];
                leave = match leave {
                    Some((lr, best)) if ratio > best + SIMPLEX_EPS => Some((lr, best)),
                    Some((lr, best)) if (ratio - best).abs() <= SIMPLEX_EPS && basis[lr] < basis[r] => Some((lr, best)),
                    _ => Some((r, ratio)),
                };
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction; cannot happen for a phase-one objective bounded below by 0.
            break;
        };
        let piv = t[pr][enter];
        for v in t[pr].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[pr].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r != pr && line[enter] != 0.0 {
                let f = line[enter];
                for (v, p) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        let f = cost[enter];
        for (v, p) in cost.iter_mut().zip(&pivot_row) {
            *v -= f * p;
        }
        basis[pr] = enter;
    }
    basis
        .iter()
        .zip(&t)
        .filter(|(&var, _)| var >= cols)
        .map(|(_, line)| line[width - 1].max(0.0))
        .sum()
}

/// Whether `conv(p) ∩ conv(q)` is nonempty, decided by feasibility of the convex-combination
/// weights `Σλ_i p_i = Σμ_j q_j`, `Σλ = Σμ = 1`, `λ, μ ≥ 0`.
pub fn hulls_intersect<const N: usize>(p: &[Point<N>], q: &[Point<N>]) -> Result<bool> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::invalid("hull intersection needs nonempty point sets"));
    }
    if p.len() + q.len() > MAX_HULL_POINTS {
        return Err(Error::invalid(format!("hull oracle refuses more than {MAX_HULL_POINTS} points")));
    }
    // Normalize to a unit-size frame so the decision tolerance is scale free.
    let all = p.iter().chain(q);
    let count = (p.len() + q.len()) as f64;
    let center = all.clone().fold(Point::<N>::zeros(), |acc, v| acc + v) / count;
    let radius = all.fold(0.0_f64, |m, v| m.max((v - center).amax())).max(f64::MIN_POSITIVE);

    let cols = p.len() + q.len();
    let mut a = vec![vec![0.0; cols]; N + 2];
    let mut b = vec![0.0; N + 2];
    for (i, v) in p.iter().enumerate() {
        let v = (v - center) / radius;
        for k in 0..N {
            a[k][i] = v[k];
        }
        a[N][i] = 1.0;
    }
    for (j, v) in q.iter().enumerate() {
        let v = (v - center) / radius;
        for k in 0..N {
            a[k][p.len() + j] = -v[k];
        }
        a[N + 1][p.len() + j] = 1.0;
    }
    b[N] = 1.0;
    b[N + 1] = 1.0;
    Ok(phase_one_residual(&a, &b) <= INTERSECT_TOL)
}

/// Whether `s` lies strictly inside `conv(points)`.
///
/// `s` is interior exactly when no nonzero `w` has `w·(p_i − s) ≤ 0` for every point.
/// Any such `w` can be scaled so its largest component is `±1`, which leaves a small
/// feasibility program per coordinate and sign.
pub fn point_strictly_inside<const N: usize>(points: &[Point<N>], s: &Point<N>) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::invalid("interior test needs a nonempty point set"));
    }
    if N == 1 {
        let below = points.iter().any(|p| p[0] < s[0]);
        let above = points.iter().any(|p| p[0] > s[0]);
        return Ok(below && above);
    }
    for k in 0..N {
        for sigma in [1.0, -1.0] {
            let mut lp = LowDimLP::new(N - 1, &vec![0.0; N - 1])?;
            for p in points {
                let rel = p - s;
                let row: Vec<f64> = (0..N).filter(|&l| l != k).map(|l| rel[l]).collect();
                lp.add_constraint(&row, -sigma * rel[k])?;
            }
            for l in 0..N - 1 {
                let mut e = vec![0.0; N - 1];
                e[l] = 1.0;
                lp.add_constraint(&e, 1.0)?;
                e[l] = -1.0;
                lp.add_constraint(&e, 1.0)?;
            }
            if solve_lp_enumeration(&lp)?.status == LpStatus::Optimal {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn scaled_body<const N: usize>(body: &ConvexSetV<N>, k: f64) -> Vec<Point<N>> {
    body.points.iter().map(|p| body.seed + (p - body.seed) * k).collect()
}

/// Smallest `k ≥ 0` at which the body dilated by `k` about its seed meets `conv(obstacle)`,
/// to within [`BISECTION_TOL`]. Returns 0 when the obstacle contains the seed.
pub fn min_scale_bisection<const N: usize>(body: &ConvexSetV<N>, obstacle: &[Point<N>]) -> Result<f64> {
    if hulls_intersect(&[body.seed], obstacle)? {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !hulls_intersect(&scaled_body(body, hi), obstacle)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::DegenerateBody("body never reaches the obstacle under dilation".into()));
        }
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if hulls_intersect(&scaled_body(body, mid), obstacle)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
