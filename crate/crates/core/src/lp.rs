//! Small dense linear programs: a dictionary simplex for `max cᵀx, Ax ≤ b,
//! x ≥ 0` with a feasible origin, and an independent min-cost-flow solver
//! for discrete transport.

use crate::error::{CqmsError, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct LpSolution<T: Scalar> {
    pub objective: T,
    pub x: Vec<T>,
    /// One multiplier per constraint row; nonnegative at an optimum.
    pub duals: Vec<T>,
    pub pivots: usize,
}

/// Maximizes `cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, requiring `b ≥ 0`.
///
/// Dantzig pricing, switching to Bland's rule during degenerate stretches so
/// the method cannot cycle.
pub fn maximize<T: Scalar>(a: &DMatrix<T>, b: &[T], c: &[T], max_pivots: usize) -> Result<LpSolution<T>> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n {
        return Err(CqmsError::Shape(format!(
            "LP data: A is {m}x{n}, b has {}, c has {}",
            b.len(),
            c.len()
        )));
    }
    let scale = a.iter().chain(b).chain(c).fold(T::one(), |s, &v| if v.abs() > s { v.abs() } else { s });
    let eps = T::exact_tol() * scale;
    if let Some(i) = b.iter().position(|&v| v < -eps) {
        return Err(CqmsError::Lp(format!("origin infeasible at row {i}")));
    }

    let mut d = a.clone();
    let mut rhs: Vec<T> = b.iter().map(|&v| if v < T::zero() { T::zero() } else { v }).collect();
    let mut cost = c.to_vec();
    let mut z0 = T::zero();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut nonbasic: Vec<usize> = (0..n).collect();
    let mut pivots = 0;
    let mut degenerate_run = 0;

    loop {
        let bland = degenerate_run > 20;
        let entering = if bland {
            (0..n)
                .filter(|&j| cost[j] > eps)
                .min_by_key(|&j| nonbasic[j])
        } else {
            (0..n)
                .filter(|&j| cost[j] > eps)
                .max_by(|&i, &j| cost[i].partial_cmp(&cost[j]).unwrap_or(std::cmp::Ordering::Equal))
        };
        let Some(j) = entering else { break };
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if d[(i, j)] > eps {
                let ratio = rhs[i] / d[(i, j)];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best || (ratio == best && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(CqmsError::Lp("objective unbounded".into()));
        };
        if pivots >= max_pivots {
            return Err(CqmsError::Lp(format!("no optimum within {max_pivots} pivots")));
        }
        degenerate_run = if ratio <= eps { degenerate_run + 1 } else { 0 };

        let p = d[(r, j)];
        rhs[r] /= p;
        for k in 0..n {
            if k != j {
                d[(r, k)] /= p;
            }
        }
        d[(r, j)] = T::one() / p;
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = d[(i, j)];
            if f == T::zero() {
                continue;
            }
            let pivot_rhs = rhs[r];
            rhs[i] -= f * pivot_rhs;
            if rhs[i] < T::zero() && rhs[i] > -eps {
                rhs[i] = T::zero();
            }
            for k in 0..n {
                if k != j {
                    let v = d[(r, k)];
                    d[(i, k)] -= f * v;
                }
            }
            d[(i, j)] = -f * d[(r, j)];
        }
        let f = cost[j];
        z0 += f * rhs[r];
        for k in 0..n {
            if k != j {
                cost[k] -= f * d[(r, k)];
            }
        }
        cost[j] = -f * d[(r, j)];
        std::mem::swap(&mut basis[r], &mut nonbasic[j]);
        pivots += 1;
    }

    let mut x = vec![T::zero(); n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = rhs[i];
        }
    }
    let mut duals = vec![T::zero(); m];
    for (j, &v) in nonbasic.iter().enumerate() {
        if v >= n {
            duals[v - n] = -cost[j];
        }
    }
    Ok(LpSolution {
        objective: z0,
        x,
        duals,
        pivots,
    })
}

#[derive(Clone, Debug)]
pub struct TransportPlan<T: Scalar> {
    pub cost: T,
    /// `plan[(x, y)]` is the mass moved from `x` to `y`.
    pub plan: DMatrix<T>,
    pub augmentations: usize,
}

struct Edge<T> {
    to: usize,
    cap: T,
    cost: T,
}

/// Cheapest coupling of `supply` and `demand` under the cost table `d`,
/// found by successive shortest paths with Bellman-Ford.
pub fn transport<T: Scalar>(d: &DMatrix<T>, supply: &[T], demand: &[T]) -> Result<TransportPlan<T>> {
    let n = supply.len();
    if d.nrows() != n || d.ncols() != demand.len() {
        return Err(CqmsError::Shape("cost table does not match marginals".into()));
    }
    let k = demand.len();
    let total_s = supply.iter().fold(T::zero(), |a, &b| a + b);
    let total_d = demand.iter().fold(T::zero(), |a, &b| a + b);
    let eps = T::exact_tol();
    if supply.iter().chain(demand).any(|&v| v < -eps) {
        return Err(CqmsError::Lp("negative mass in a marginal".into()));
    }
    if (total_s - total_d).abs() > T::of(100.0) * eps * (T::one() + total_s) {
        return Err(CqmsError::Lp("marginals carry different total mass".into()));
    }

    let source = 0;
    let sink = n + k + 1;
    let nodes = n + k + 2;
    let mut edges: Vec<Edge<T>> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |edges: &mut Vec<Edge<T>>, u: usize, v: usize, cap: T, cost: T| {
        adj[u].push(edges.len());
        edges.push(Edge { to: v, cap, cost });
        adj[v].push(edges.len());
        edges.push(Edge { to: u, cap: T::zero(), cost: -cost });
    };
    let big = total_s + total_d + T::one();
    for (x, &s) in supply.iter().enumerate() {
        add(&mut edges, source, 1 + x, s.max(T::zero()), T::zero());
    }
    let mut middle = vec![vec![0usize; k]; n];
    for x in 0..n {
        for y in 0..k {
            middle[x][y] = edges.len();
            add(&mut edges, 1 + x, 1 + n + y, big, d[(x, y)]);
        }
    }
    for (y, &t) in demand.iter().enumerate() {
        add(&mut edges, 1 + n + y, sink, t.max(T::zero()), T::zero());
    }

    let flow_eps = eps * (T::one() + total_s);
    let mut remaining = total_s.min(total_d);
    let mut augmentations = 0;
    while remaining > flow_eps {
        let mut dist = vec![T::infinity(); nodes];
        let mut prev: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = T::zero();
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if !dist[u].is_finite_value() {
                    continue;
                }
                for &e in &adj[u] {
                    let edge = &edges[e];
                    if edge.cap > flow_eps && dist[u] + edge.cost < dist[edge.to] - eps {
                        dist[edge.to] = dist[u] + edge.cost;
                        prev[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if prev[sink].is_none() {
            break;
        }
        let mut push = remaining;
        let mut v = sink;
        while let Some(e) = prev[v] {
            push = push.min(edges[e].cap);
            v = edges[e ^ 1].to;
        }
        let mut v = sink;
        while let Some(e) = prev[v] {
            edges[e].cap -= push;
            edges[e ^ 1].cap += push;
            v = edges[e ^ 1].to;
        }
        remaining -= push;
        augmentations += 1;
        if augmentations > 4 * nodes * nodes {
            return Err(CqmsError::Lp("transport did not terminate".into()));
        }
    }

    let mut plan = DMatrix::zeros(n, k);
    let mut cost = T::zero();
    for x in 0..n {
        for y in 0..k {
            let f = edges[middle[x][y] ^ 1].cap;
            plan[(x, y)] = f;
            cost += f * d[(x, y)];
        }
    }
    Ok(TransportPlan {
        cost,
        plan,
        augmentations,
    })
}

/// Kantorovich potential `f` with `|f(x) − f(y)| ≤ d(x, y)` and
/// `f(x) − f(y) = d(x, y)` on the support of `plan`, normalized to
/// `f(0) = 0`. Obtained from shortest paths on the constraint graph.
pub fn kantorovich_potential<T: Scalar>(d: &DMatrix<T>, plan: &DMatrix<T>) -> Vec<T> {
    let n = d.nrows();
    let support = T::exact_tol() * T::of(10.0);
    let mut arcs: Vec<(usize, usize, T)> = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            if x != y {
                arcs.push((y, x, d[(x, y)]));
                if plan[(x, y)] > support {
                    arcs.push((x, y, -d[(x, y)]));
                }
            }
        }
    }
    let mut f = vec![T::zero(); n];
    for _ in 0..n {
        let mut changed = false;
        for &(u, v, w) in &arcs {
            if f[u] + w < f[v] - T::exact_tol() * T::of(1e-2) {
                f[v] = f[u] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let base = f[0];
    f.iter().map(|&v| v - base).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 3.0, 2.0]);
        let sol = maximize::<f64>(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0], 100).unwrap();
        assert!((sol.objective - 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
        // dual objective equals primal
        let dual: f64 = sol.duals.iter().zip([4.0, 12.0, 18.0]).map(|(y, b)| y * b).sum();
        assert!((dual - 36.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_is_reported() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(maximize(&a, &[1.0], &[0.0, 1.0], 100).is_err());
    }

    #[test]
    fn transport_on_a_line() {
        let d = DMatrix::from_fn(3, 3, |i, j| (i as f64 - j as f64).abs());
        let t = transport(&d, &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        assert!((t.cost - 2.0).abs() < 1e-12);
        let f = kantorovich_potential(&d, &t.plan);
        assert!((f[0] - f[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_closed_form() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let t = transport::<f64>(&d, &[0.3, 0.7], &[0.8, 0.2]).unwrap();
        assert!((t.cost - 0.5).abs() < 1e-12);
    }
}
