//! Dense linear programming over systems `C·alpha <= d` with free variables.
//!
//! This is the single numerical engine behind emptiness checks, exact
//! coordinate ranges and max-point-candidate pruning. The solver is a
//! self-contained two-phase dense simplex with Bland's anti-cycling rule:
//! free variables are split as `x = u - v` with `u, v >= 0`, every row gets a
//! slack, and rows with negative right-hand side get an artificial variable
//! that phase one drives to zero. Deterministic by construction: identical
//! inputs produce identical outcomes.

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::Scalar;

static LP_CALLS: AtomicU64 = AtomicU64::new(0);

/// Number of LP solves performed by this process so far.
///
/// Monotone process-wide counter; callers interested in the cost of a single
/// computation take a before/after difference.
pub fn lp_call_count() -> u64 {
    LP_CALLS.load(Ordering::Relaxed)
}

/// A conjunction of linear constraints `C·alpha <= d` over `m` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraints<T> {
    c: Array2<T>,
    d: Array1<T>,
}

impl<T: Scalar> LinearConstraints<T> {
    pub fn new(c: Array2<T>, d: Array1<T>) -> Result<Self> {
        if c.nrows() != d.len() {
            return Err(Error::DimensionMismatch {
                context: "constraint matrix rows vs right-hand side",
                expected: c.nrows(),
                found: d.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) || d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear constraints"));
        }
        Ok(Self { c, d })
    }

    /// The empty conjunction over `num_vars` variables (all of `R^m`).
    pub fn unconstrained(num_vars: usize) -> Self {
        Self {
            c: Array2::zeros((0, num_vars)),
            d: Array1::zeros(0),
        }
    }

    /// Box constraints `lower[j] <= alpha_j <= upper[j]` as `2m` rows.
    pub fn from_box(lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let m = lower.len();
        let mut c = Array2::zeros((2 * m, m));
        let mut d = Array1::zeros(2 * m);
        for j in 0..m {
            c[[2 * j, j]] = T::one();
            d[2 * j] = upper[j];
            c[[2 * j + 1, j]] = -T::one();
            d[2 * j + 1] = -lower[j];
        }
        Self::new(c, d)
    }

    pub fn num_vars(&self) -> usize {
        self.c.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.c.nrows()
    }

    pub fn matrix(&self) -> ArrayView2<'_, T> {
        self.c.view()
    }

    pub fn rhs(&self) -> ArrayView1<'_, T> {
        self.d.view()
    }

    /// Direct check `C·point <= d + slack` componentwise.
    pub fn satisfied_by(&self, point: ArrayView1<T>, slack: T) -> bool {
        if point.len() != self.num_vars() {
            return false;
        }
        self.c
            .rows()
            .into_iter()
            .zip(self.d.iter())
            .all(|(row, &b)| dot(row, point) <= b + slack)
    }

    /// New system with extra rows over the same variables.
    pub fn appended(&self, rows: ArrayView2<T>, rhs: ArrayView1<T>) -> Result<Self> {
        if rows.ncols() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                context: "appended constraint columns",
                expected: self.num_vars(),
                found: rows.ncols(),
            });
        }
        let p = self.num_constraints();
        let q = rows.nrows();
        let mut c = Array2::zeros((p + q, self.num_vars()));
        let mut d = Array1::zeros(p + q);
        c.slice_mut(ndarray::s![..p, ..]).assign(&self.c);
        c.slice_mut(ndarray::s![p.., ..]).assign(&rows);
        d.slice_mut(ndarray::s![..p]).assign(&self.d);
        d.slice_mut(ndarray::s![p..]).assign(&rhs);
        Self::new(c, d)
    }

    /// New system over `m + new_vars` variables: existing rows are padded
    /// with zero columns, then `rows` (already over the extended space) are
    /// appended.
    pub fn extended(
        &self,
        new_vars: usize,
        rows: ArrayView2<T>,
        rhs: ArrayView1<T>,
    ) -> Result<Self> {
        let m = self.num_vars() + new_vars;
        if rows.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "extended constraint columns",
                expected: m,
                found: rows.ncols(),
            });
        }
        let p = self.num_constraints();
        let q = rows.nrows();
        let mut c = Array2::zeros((p + q, m));
        let mut d = Array1::zeros(p + q);
        c.slice_mut(ndarray::s![..p, ..self.num_vars()])
            .assign(&self.c);
        c.slice_mut(ndarray::s![p.., ..]).assign(&rows);
        d.slice_mut(ndarray::s![..p]).assign(&self.d);
        d.slice_mut(ndarray::s![p..]).assign(&rhs);
        Self::new(c, d)
    }
}

fn dot<T: Scalar>(a: ArrayView1<T>, b: ArrayView1<T>) -> T {
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Outcome of one LP solve.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { value: T, witness: Array1<T> },
    Infeasible,
    Unbounded,
}

impl<T: Scalar> LpOutcome<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&Array1<T>> {
        match self {
            LpOutcome::Optimal { witness, .. } => Some(witness),
            _ => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

/// Global minimum of `objective . alpha` over `{alpha | C alpha <= d}`.
pub fn minimize<T: Scalar>(
    objective: ArrayView1<T>,
    cons: &LinearConstraints<T>,
) -> Result<LpOutcome<T>> {
    minimize_with(objective, cons, &Tolerances::default())
}

pub fn minimize_with<T: Scalar>(
    objective: ArrayView1<T>,
    cons: &LinearConstraints<T>,
    tol: &Tolerances<T>,
) -> Result<LpOutcome<T>> {
    if objective.len() != cons.num_vars() {
        return Err(Error::DimensionMismatch {
            context: "objective length vs constraint columns",
            expected: cons.num_vars(),
            found: objective.len(),
        });
    }
    LP_CALLS.fetch_add(1, Ordering::Relaxed);
    Ok(Simplex::new(cons, *tol).minimize(objective))
}

/// Global maximum; `maximize(c) = -minimize(-c)` with the same statuses.
pub fn maximize<T: Scalar>(
    objective: ArrayView1<T>,
    cons: &LinearConstraints<T>,
) -> Result<LpOutcome<T>> {
    maximize_with(objective, cons, &Tolerances::default())
}

pub fn maximize_with<T: Scalar>(
    objective: ArrayView1<T>,
    cons: &LinearConstraints<T>,
    tol: &Tolerances<T>,
) -> Result<LpOutcome<T>> {
    let negated = objective.mapv(|v| -v);
    Ok(match minimize_with(negated.view(), cons, tol)? {
        LpOutcome::Optimal { value, witness } => LpOutcome::Optimal {
            value: -value,
            witness,
        },
        other => other,
    })
}

/// True iff `{alpha | C alpha <= d}` is non-empty (phase-one LP).
pub fn is_feasible<T: Scalar>(cons: &LinearConstraints<T>) -> bool {
    feasible_point(cons).is_some()
}

/// A feasible point of the system, if any.
pub fn feasible_point<T: Scalar>(cons: &LinearConstraints<T>) -> Option<Array1<T>> {
    let zeros = Array1::zeros(cons.num_vars());
    match minimize(zeros.view(), cons).expect("objective length matches by construction") {
        LpOutcome::Optimal { witness, .. } => Some(witness),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective is never unbounded"),
    }
}

/// Full-tableau two-phase simplex. Columns are laid out as
/// `[u_0..u_m | v_0..v_m | s_0..s_p | a_0..a_na]` where `x = u - v`.
struct Simplex<T> {
    tab: Array2<T>,
    basis: Vec<usize>,
    obj: Vec<T>,
    num_vars: usize,
    art_start: usize,
    ncols: usize,
    tol: Tolerances<T>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Simplex<T> {
    fn new(cons: &LinearConstraints<T>, tol: Tolerances<T>) -> Self {
        let m = cons.num_vars();
        let p = cons.num_constraints();
        let negative_rows: Vec<bool> = cons.rhs().iter().map(|&b| b < T::zero()).collect();
        let n_art = negative_rows.iter().filter(|&&f| f).count();
        let art_start = 2 * m + p;
        let ncols = art_start + n_art;

        let mut tab = Array2::zeros((p, ncols + 1));
        let mut basis = vec![0usize; p];
        let mut next_art = art_start;
        let c = cons.matrix();
        let d = cons.rhs();
        for i in 0..p {
            let sign = if negative_rows[i] {
                -T::one()
            } else {
                T::one()
            };
            for j in 0..m {
                tab[[i, j]] = sign * c[[i, j]];
                tab[[i, m + j]] = -sign * c[[i, j]];
            }
            tab[[i, 2 * m + i]] = sign;
            tab[[i, ncols]] = sign * d[i];
            if negative_rows[i] {
                tab[[i, next_art]] = T::one();
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = 2 * m + i;
            }
        }

        Self {
            tab,
            basis,
            obj: vec![T::zero(); ncols + 1],
            num_vars: m,
            art_start,
            ncols,
            tol,
        }
    }

    fn minimize(mut self, objective: ArrayView1<T>) -> LpOutcome<T> {
        if self.ncols > self.art_start {
            // Phase one: minimize the sum of artificial variables.
            let mut costs = vec![T::zero(); self.ncols];
            costs[self.art_start..].fill(T::one());
            self.reset_objective(&costs);
            match self.run(self.ncols) {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => unreachable!("phase-one objective is bounded below"),
            }
            let infeasibility = -self.obj[self.ncols];
            if infeasibility > self.tol.feasibility {
                return LpOutcome::Infeasible;
            }
            self.evict_artificials();
        }

        // Phase two over the original objective, artificial columns barred.
        let mut costs = vec![T::zero(); self.ncols];
        for j in 0..self.num_vars {
            costs[j] = objective[j];
            costs[self.num_vars + j] = -objective[j];
        }
        self.reset_objective(&costs);
        match self.run(self.art_start) {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => return LpOutcome::Unbounded,
        }

        let witness = self.witness();
        let value = dot(objective, witness.view());
        LpOutcome::Optimal { value, witness }
    }

    /// Rebuild the reduced-cost row for the given structural costs.
    fn reset_objective(&mut self, costs: &[T]) {
        self.obj = costs.to_vec();
        self.obj.push(T::zero());
        for i in 0..self.tab.nrows() {
            let cb = costs[self.basis[i]];
            if cb != T::zero() {
                for (j, o) in self.obj.iter_mut().enumerate() {
                    *o -= cb * self.tab[[i, j]];
                }
            }
        }
    }

    /// Pivot until no reduced cost below `-pivot` remains among columns
    /// `0..col_limit` (Bland's rule on both choices).
    fn run(&mut self, col_limit: usize) -> PhaseEnd {
        let max_iters = 10_000 + 1_000 * (self.tab.nrows() + self.ncols);
        for _ in 0..max_iters {
            let entering = (0..col_limit).find(|&j| self.obj[j] < -self.tol.pivot);
            let Some(e) = entering else {
                return PhaseEnd::Optimal;
            };
            let Some(leave) = self.leaving_row(e) else {
                return PhaseEnd::Unbounded;
            };
            self.pivot(leave, e);
        }
        panic!("simplex iteration limit reached; numerical cycling suspected");
    }

    fn leaving_row(&self, e: usize) -> Option<usize> {
        let rhs = self.ncols;
        let mut best: Option<(usize, T)> = None;
        for i in 0..self.tab.nrows() {
            let coef = self.tab[[i, e]];
            if coef > self.tol.pivot {
                let ratio = self.tab[[i, rhs]] / coef;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - self.tol.pivot
                            || ((ratio - br).abs() <= self.tol.pivot
                                && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let rhs = self.ncols;
        let pivot = self.tab[[row, col]];
        for j in 0..=rhs {
            self.tab[[row, j]] /= pivot;
        }
        for i in 0..self.tab.nrows() {
            if i == row {
                continue;
            }
            let factor = self.tab[[i, col]];
            if factor != T::zero() {
                for j in 0..=rhs {
                    let t = self.tab[[row, j]];
                    self.tab[[i, j]] -= factor * t;
                }
            }
        }
        let factor = self.obj[col];
        if factor != T::zero() {
            for j in 0..=rhs {
                let t = self.tab[[row, j]];
                self.obj[j] -= factor * t;
            }
        }
        self.basis[row] = col;
    }

    /// Pivot basic artificials out where possible. Rows that are zero over
    /// all structural columns are redundant and can stay parked: their pivot
    /// column entries are zero, so they never interfere again.
    fn evict_artificials(&mut self) {
        for i in 0..self.tab.nrows() {
            if self.basis[i] >= self.art_start {
                let col = (0..self.art_start).find(|&j| self.tab[[i, j]].abs() > self.tol.pivot);
                if let Some(j) = col {
                    self.pivot(i, j);
                }
            }
        }
    }

    fn witness(&self) -> Array1<T> {
        let mut values = vec![T::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            values[b] = self.tab[[i, self.ncols]];
        }
        Array1::from_iter((0..self.num_vars).map(|j| values[j] - values[self.num_vars + j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn box1(lo: f64, hi: f64) -> LinearConstraints<f64> {
        LinearConstraints::from_box(&[lo], &[hi]).unwrap()
    }

    /// Brute-force oracle: enumerate candidate vertices of `C x <= d` by
    /// solving every m-subset of rows as a linear system and keeping the
    /// feasible solutions. Independent of the simplex path.
    mod oracle {
        use super::*;

        #[allow(clippy::needless_range_loop)]
        fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
            let n = b.len();
            for col in 0..n {
                let (best, mag) = (col..n)
                    .map(|r| (r, a[r][col].abs()))
                    .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
                if mag < 1e-10 {
                    return None;
                }
                a.swap(col, best);
                b.swap(col, best);
                for r in 0..n {
                    if r == col {
                        continue;
                    }
                    let f = a[r][col] / a[col][col];
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
            Some((0..n).map(|i| b[i] / a[i][i]).collect())
        }

        fn subsets(p: usize, m: usize) -> Vec<Vec<usize>> {
            let mut out = Vec::new();
            let mut cur = Vec::new();
            fn rec(
                start: usize,
                p: usize,
                m: usize,
                cur: &mut Vec<usize>,
                out: &mut Vec<Vec<usize>>,
            ) {
                if cur.len() == m {
                    out.push(cur.clone());
                    return;
                }
                for i in start..p {
                    cur.push(i);
                    rec(i + 1, p, m, cur, out);
                    cur.pop();
                }
            }
            rec(0, p, m, &mut cur, &mut out);
            out
        }

        pub fn vertices(cons: &LinearConstraints<f64>) -> Vec<Vec<f64>> {
            let m = cons.num_vars();
            let p = cons.num_constraints();
            let c = cons.matrix();
            let d = cons.rhs();
            let mut verts = Vec::new();
            for subset in subsets(p, m) {
                let mut a: Vec<Vec<f64>> = subset.iter().map(|&i| c.row(i).to_vec()).collect();
                let mut b: Vec<f64> = subset.iter().map(|&i| d[i]).collect();
                if let Some(x) = solve_square(&mut a, &mut b) {
                    let feasible = (0..p).all(|i| {
                        let lhs: f64 = (0..m).map(|j| c[[i, j]] * x[j]).sum();
                        lhs <= d[i] + 1e-7
                    });
                    if feasible {
                        verts.push(x);
                    }
                }
            }
            verts
        }

        pub fn min_max(cons: &LinearConstraints<f64>, obj: &[f64]) -> Option<(f64, f64)> {
            let verts = vertices(cons);
            if verts.is_empty() {
                return None;
            }
            let vals: Vec<f64> = verts
                .iter()
                .map(|v| v.iter().zip(obj).map(|(a, b)| a * b).sum())
                .collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, hi))
        }
    }

    #[test]
    fn box_minimum() {
        let out = minimize(array![1.0].view(), &box1(-1.0, 1.0)).unwrap();
        assert_eq!(out.value().unwrap(), -1.0);
        assert!((out.witness().unwrap()[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn box_maximum() {
        let out = maximize(array![1.0].view(), &box1(-1.0, 1.0)).unwrap();
        assert_eq!(out.value().unwrap(), 1.0);
    }

    #[test]
    fn contradictory_constraints_are_infeasible() {
        // alpha <= 0 and alpha >= 1
        let cons = LinearConstraints::new(array![[1.0], [-1.0]], array![0.0, -1.0]).unwrap();
        assert_eq!(
            minimize(array![0.0].view(), &cons).unwrap(),
            LpOutcome::Infeasible
        );
        assert!(!is_feasible(&cons));
    }

    #[test]
    fn triangle_minimum_matches_vertex_enumeration() {
        // alpha1 + alpha2 <= 2, alpha1 >= 0, alpha2 >= 0: vertices (0,0), (2,0), (0,2).
        let cons = LinearConstraints::new(
            array![[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            array![2.0, 0.0, 0.0],
        )
        .unwrap();
        let (oracle_min, _) = oracle::min_max(&cons, &[1.0, 1.0]).unwrap();
        let out = minimize(array![1.0, 1.0].view(), &cons).unwrap();
        assert!((out.value().unwrap() - oracle_min).abs() < 1e-9);
        assert_eq!(oracle_min, 0.0);
    }

    #[test]
    fn triangle_maximum_at_vertex() {
        let cons = LinearConstraints::new(
            array![[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            array![2.0, 0.0, 0.0],
        )
        .unwrap();
        let (_, oracle_max) = oracle::min_max(&cons, &[2.0, -1.0]).unwrap();
        let out = maximize(array![2.0, -1.0].view(), &cons).unwrap();
        assert!((out.value().unwrap() - 4.0).abs() < 1e-9);
        assert!((oracle_max - 4.0).abs() < 1e-9);
        let w = out.witness().unwrap();
        assert!((w[0] - 2.0).abs() < 1e-7 && w[1].abs() < 1e-7);
    }

    #[test]
    fn unconstrained_direction_is_unbounded() {
        // Only alpha_1 is bounded; objective moves along alpha_0.
        let cons =
            LinearConstraints::new(array![[0.0, 1.0], [0.0, -1.0]], array![1.0, 1.0]).unwrap();
        assert_eq!(
            maximize(array![1.0, 0.0].view(), &cons).unwrap(),
            LpOutcome::Unbounded
        );
        assert_eq!(
            minimize(array![1.0, 0.0].view(), &cons).unwrap(),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn random_system_with_interior_point_is_feasible() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            // Construct constraints satisfied by a sampled point q: for random
            // rows a, take a . alpha <= a . q + margin.
            let m = 5;
            let q: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..=2.0)).collect();
            let p = 12;
            let mut c = Array2::zeros((p, m));
            let mut d = Array1::zeros(p);
            for i in 0..p {
                let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let margin = rng.random_range(0.1..=1.0);
                for j in 0..m {
                    c[[i, j]] = row[j];
                }
                d[i] = row.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() + margin;
            }
            let cons = LinearConstraints::new(c, d).unwrap();
            assert!(is_feasible(&cons));
            let w = feasible_point(&cons).unwrap();
            assert!(cons.satisfied_by(w.view(), 1e-7));
        }
    }

    #[test]
    fn optimal_witness_is_feasible_and_consistent() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rng.random_range(1..=4usize);
            let lows: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..=0.0)).collect();
            let highs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=3.0)).collect();
            let mut cons = LinearConstraints::from_box(&lows, &highs).unwrap();
            for _ in 0..rng.random_range(0..4usize) {
                let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let rhs = rng.random_range(0.0..=2.0);
                let rows = Array2::from_shape_vec((1, m), row).unwrap();
                cons = cons.appended(rows.view(), array![rhs].view()).unwrap();
            }
            let obj: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let obj = Array1::from_vec(obj);
            match minimize(obj.view(), &cons).unwrap() {
                LpOutcome::Optimal { value, witness } => {
                    assert!(cons.satisfied_by(witness.view(), 1e-7));
                    let recomputed: f64 = obj.iter().zip(witness.iter()).map(|(a, b)| a * b).sum();
                    assert!((recomputed - value).abs() < 1e-9);
                }
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => panic!("boxed problems are bounded"),
            }
        }
    }

    #[test]
    fn adding_a_constraint_is_monotone() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let m = rng.random_range(1..=3usize);
            let lows: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..=0.0)).collect();
            let highs: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..=2.0)).collect();
            let cons = LinearConstraints::from_box(&lows, &highs).unwrap();
            let obj = Array1::from_vec((0..m).map(|_| rng.random_range(-1.0..=1.0)).collect());
            let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let rhs = rng.random_range(-0.5..=1.5);
            let tightened = cons
                .appended(
                    Array2::from_shape_vec((1, m), row).unwrap().view(),
                    array![rhs].view(),
                )
                .unwrap();
            let before_min = minimize(obj.view(), &cons).unwrap();
            let after_min = minimize(obj.view(), &tightened).unwrap();
            let before_max = maximize(obj.view(), &cons).unwrap();
            let after_max = maximize(obj.view(), &tightened).unwrap();
            if let (Some(b), Some(a)) = (before_min.value(), after_min.value()) {
                assert!(a >= b - 1e-7, "min decreased: {b} -> {a}");
            }
            if let (Some(b), Some(a)) = (before_max.value(), after_max.value()) {
                assert!(a <= b + 1e-7, "max increased: {b} -> {a}");
            }
        }
    }

    #[test]
    fn identical_inputs_give_identical_outcomes() {
        let cons = LinearConstraints::new(
            array![[1.0, 1.0], [-1.0, 0.5], [0.3, -1.0], [-1.0, -1.0]],
            array![2.0, 1.0, 1.0, 0.5],
        )
        .unwrap();
        let obj = array![0.7, -0.3];
        let a = minimize(obj.view(), &cons).unwrap();
        let b = minimize(obj.view(), &cons).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_variable_systems() {
        // 0 <= d decides feasibility directly.
        let feasible = LinearConstraints::new(Array2::zeros((2, 0)), array![1.0, 0.0]).unwrap();
        let infeasible = LinearConstraints::new(Array2::zeros((1, 0)), array![-1.0]).unwrap();
        assert!(is_feasible(&feasible));
        assert!(!is_feasible(&infeasible));
        let out = minimize(Array1::zeros(0).view(), &feasible).unwrap();
        assert_eq!(out.value().unwrap(), 0.0);
    }

    #[test]
    fn zero_constraint_systems() {
        let cons = LinearConstraints::unconstrained(2);
        assert!(is_feasible(&cons));
        assert_eq!(
            minimize(array![1.0, 0.0].view(), &cons).unwrap(),
            LpOutcome::Unbounded
        );
        let out = minimize(array![0.0, 0.0].view(), &cons).unwrap();
        assert_eq!(out.value().unwrap(), 0.0);
    }

    #[test]
    fn objective_length_mismatch_is_an_error() {
        let cons = box1(-1.0, 1.0);
        let err = minimize(array![1.0, 2.0].view(), &cons).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn equality_encoded_as_paired_inequalities() {
        // alpha = 0.5 within the unit box.
        let cons = box1(-1.0, 1.0)
            .appended(array![[1.0], [-1.0]].view(), array![0.5, -0.5].view())
            .unwrap();
        let out = minimize(array![1.0].view(), &cons).unwrap();
        assert!((out.value().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..60 {
            let m = rng.random_range(1..=3usize);
            let lows: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..=-0.2)).collect();
            let highs: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..=2.0)).collect();
            let mut cons = LinearConstraints::from_box(&lows, &highs).unwrap();
            for _ in 0..rng.random_range(0..3usize) {
                let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let rhs = rng.random_range(0.2..=1.5);
                cons = cons
                    .appended(
                        Array2::from_shape_vec((1, m), row).unwrap().view(),
                        array![rhs].view(),
                    )
                    .unwrap();
            }
            let obj: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let (olo, ohi) = oracle::min_max(&cons, &obj).unwrap();
            let obj = Array1::from_vec(obj);
            let lo = minimize(obj.view(), &cons).unwrap().value().unwrap();
            let hi = maximize(obj.view(), &cons).unwrap().value().unwrap();
            assert!((lo - olo).abs() < 1e-6, "min {lo} vs oracle {olo}");
            assert!((hi - ohi).abs() < 1e-6, "max {hi} vs oracle {ohi}");
        }
    }
}
