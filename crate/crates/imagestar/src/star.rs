//! Generalized stars: `{ x = c + V·alpha | C·alpha <= d }`.
//!
//! A [`Predicate`] wraps the constraint system together with lazily computed
//! caches (a feasibility witness and per-variable interval bounds). Stars are
//! immutable; operations return new stars. Stars produced by predicate-
//! preserving maps share the same `Arc<Predicate>`, so the caches are
//! computed once per distinct predicate. Intersections build a fresh
//! predicate whose caches start out stale.

use std::sync::{Arc, OnceLock};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::lp::{self, LinearConstraints, LpOutcome};
use crate::Scalar;

/// A constraint system over predicate variables with cached derived data.
#[derive(Debug, Clone)]
pub struct Predicate<T: Scalar> {
    cons: LinearConstraints<T>,
    witness: OnceLock<Option<Array1<T>>>,
    bounds: OnceLock<Vec<(T, T)>>,
}

impl<T: Scalar> Predicate<T> {
    pub fn new(cons: LinearConstraints<T>) -> Self {
        Self {
            cons,
            witness: OnceLock::new(),
            bounds: OnceLock::new(),
        }
    }

    /// The vacuous predicate over zero variables (singleton star).
    pub fn vacuous() -> Self {
        let p = Self::new(LinearConstraints::unconstrained(0));
        let _ = p.witness.set(Some(Array1::zeros(0)));
        let _ = p.bounds.set(Vec::new());
        p
    }

    /// Box predicate `lower[j] <= alpha_j <= upper[j]`. The variable bounds
    /// are known exactly by construction, so the bounds cache is seeded
    /// without LP calls.
    pub fn from_box(lower: &[T], upper: &[T]) -> Result<Self> {
        let p = Self::new(LinearConstraints::from_box(lower, upper)?);
        if lower.iter().zip(upper).all(|(l, u)| l <= u) {
            let _ = p
                .bounds
                .set(lower.iter().zip(upper).map(|(&l, &u)| (l, u)).collect());
            let two = T::one() + T::one();
            let mid: Array1<T> =
                Array1::from_iter(lower.iter().zip(upper).map(|(&l, &u)| (l + u) / two));
            let _ = p.witness.set(Some(mid));
        }
        Ok(p)
    }

    pub fn constraints(&self) -> &LinearConstraints<T> {
        &self.cons
    }

    pub fn num_vars(&self) -> usize {
        self.cons.num_vars()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.num_constraints()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible_point().is_none()
    }

    /// A cached feasible point, or `None` when the predicate is empty.
    pub fn feasible_point(&self) -> Option<&Array1<T>> {
        self.witness
            .get_or_init(|| lp::feasible_point(&self.cons))
            .as_ref()
    }

    /// Whether interval bounds are already cached ("fresh").
    pub fn has_fresh_bounds(&self) -> bool {
        self.bounds.get().is_some()
    }

    /// Per-variable interval bounds, computed by `2m` LPs on first use.
    /// Unbounded directions are reported as infinities.
    pub fn bounds(&self) -> Result<&[(T, T)]> {
        if let Some(b) = self.bounds.get() {
            return Ok(b);
        }
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let m = self.num_vars();
        let mut computed = Vec::with_capacity(m);
        for j in 0..m {
            let mut obj = Array1::zeros(m);
            obj[j] = T::one();
            let lo = match lp::minimize(obj.view(), &self.cons)? {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded => -T::infinity(),
                LpOutcome::Infeasible => return Err(Error::EmptySet),
            };
            let hi = match lp::maximize(obj.view(), &self.cons)? {
                LpOutcome::Optimal { value, .. } => value,
                LpOutcome::Unbounded => T::infinity(),
                LpOutcome::Infeasible => return Err(Error::EmptySet),
            };
            computed.push((lo, hi));
        }
        Ok(self.bounds.get_or_init(|| computed))
    }

    pub fn minimize(&self, objective: ArrayView1<T>) -> Result<LpOutcome<T>> {
        lp::minimize(objective, &self.cons)
    }

    pub fn maximize(&self, objective: ArrayView1<T>) -> Result<LpOutcome<T>> {
        lp::maximize(objective, &self.cons)
    }

    /// Exact range of the affine functional `offset + coeffs . alpha` over
    /// the predicate (two LPs; zero functionals only need the emptiness
    /// check).
    pub fn range_of(&self, coeffs: ArrayView1<T>, offset: T) -> Result<(T, T)> {
        if coeffs.iter().all(|v| v.is_zero()) {
            return if self.is_empty() {
                Err(Error::EmptySet)
            } else {
                Ok((offset, offset))
            };
        }
        let lo = match lp::minimize(coeffs, &self.cons)? {
            LpOutcome::Optimal { value, .. } => value,
            LpOutcome::Infeasible => return Err(Error::EmptySet),
            LpOutcome::Unbounded => return Err(Error::UnboundedSet),
        };
        let hi = match lp::maximize(coeffs, &self.cons)? {
            LpOutcome::Optimal { value, .. } => value,
            LpOutcome::Infeasible => return Err(Error::EmptySet),
            LpOutcome::Unbounded => return Err(Error::UnboundedSet),
        };
        Ok((offset + lo, offset + hi))
    }

    /// Exact upper bound of `offset + coeffs . alpha` (one LP).
    pub fn max_of(&self, coeffs: ArrayView1<T>, offset: T) -> Result<T> {
        if coeffs.iter().all(|v| v.is_zero()) {
            return if self.is_empty() {
                Err(Error::EmptySet)
            } else {
                Ok(offset)
            };
        }
        match lp::maximize(coeffs, &self.cons)? {
            LpOutcome::Optimal { value, .. } => Ok(offset + value),
            LpOutcome::Infeasible => Err(Error::EmptySet),
            LpOutcome::Unbounded => Err(Error::UnboundedSet),
        }
    }

    /// Interval-arithmetic range of `offset + coeffs . alpha` using only the
    /// cached variable bounds; always contains the exact range.
    pub fn estimate_range_of(&self, coeffs: ArrayView1<T>, offset: T) -> Result<(T, T)> {
        let bounds = self.bounds()?;
        let mut lo = offset;
        let mut hi = offset;
        for (v, &(bl, bu)) in coeffs.iter().zip(bounds) {
            if v.is_zero() {
                continue;
            }
            let a = *v * bl;
            let b = *v * bu;
            lo += a.min(b);
            hi += a.max(b);
        }
        Ok((lo, hi))
    }

    /// Same variables, extra rows; caches start stale.
    pub fn appended(&self, rows: ArrayView2<T>, rhs: ArrayView1<T>) -> Result<Self> {
        Ok(Self::new(self.cons.appended(rows, rhs)?))
    }

    /// `new_vars` fresh variables plus rows over the extended space.
    pub fn extended(
        &self,
        new_vars: usize,
        rows: ArrayView2<T>,
        rhs: ArrayView1<T>,
    ) -> Result<Self> {
        Ok(Self::new(self.cons.extended(new_vars, rows, rhs)?))
    }

    pub fn satisfied_by(&self, alpha: ArrayView1<T>, slack: T) -> bool {
        self.cons.satisfied_by(alpha, slack)
    }

    /// `count` feasible points, deterministic in `seed`. Points are drawn
    /// uniformly inside the variable-bound box and pulled toward a feasible
    /// witness by bisection when they land outside the polytope.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Array1<T>>> {
        let witness = self.feasible_point().ok_or(Error::EmptySet)?.clone();
        let bounds = self.bounds()?.to_vec();
        if bounds.iter().any(|(l, u)| !l.is_finite() || !u.is_finite()) {
            return Err(Error::UnboundedSet);
        }
        let slack = if self.cons.satisfied_by(witness.view(), T::zero()) {
            T::zero()
        } else {
            Tolerances::default().feasibility
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let draw: Array1<T> = Array1::from_iter(bounds.iter().map(|&(l, u)| {
                if u > l {
                    rng.random_range(l..=u)
                } else {
                    l
                }
            }));
            if self.cons.satisfied_by(draw.view(), slack) {
                out.push(draw);
                continue;
            }
            // Bisect t in [0, 1] on witness + t*(draw - witness), keeping the
            // feasible end.
            let dir = &draw - &witness;
            let mut lo = T::zero();
            let mut hi = T::one();
            let two = T::one() + T::one();
            for _ in 0..50 {
                let mid = (lo + hi) / two;
                let point = &witness + &dir.mapv(|v| v * mid);
                if self.cons.satisfied_by(point.view(), slack) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(&witness + &dir.mapv(|v| v * lo));
        }
        Ok(out)
    }
}

/// A star set in `R^n`: center, `n x m` basis, and a shared predicate.
#[derive(Debug, Clone)]
pub struct Star<T: Scalar> {
    center: Array1<T>,
    basis: Array2<T>,
    predicate: Arc<Predicate<T>>,
}

impl<T: Scalar> Star<T> {
    pub fn new(center: Array1<T>, basis: Array2<T>, predicate: Arc<Predicate<T>>) -> Result<Self> {
        if center.len() != basis.nrows() {
            return Err(Error::DimensionMismatch {
                context: "star center vs basis rows",
                expected: basis.nrows(),
                found: center.len(),
            });
        }
        if basis.ncols() != predicate.num_vars() {
            return Err(Error::DimensionMismatch {
                context: "star generators vs predicate variables",
                expected: predicate.num_vars(),
                found: basis.ncols(),
            });
        }
        if center.is_empty() {
            return Err(Error::Shape("star dimension must be at least 1".into()));
        }
        if center.iter().any(|v| !v.is_finite()) || basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("star center or basis"));
        }
        Ok(Self {
            center,
            basis,
            predicate,
        })
    }

    /// The polyhedron `{x | C x <= d}` as the star `<0, I, C alpha <= d>`.
    pub fn from_polyhedron(c: Array2<T>, d: Array1<T>, dim: usize) -> Result<Self> {
        if c.ncols() != dim {
            return Err(Error::DimensionMismatch {
                context: "polyhedron columns vs dimension",
                expected: dim,
                found: c.ncols(),
            });
        }
        let predicate = Arc::new(Predicate::new(LinearConstraints::new(c, d)?));
        Self::new(Array1::zeros(dim), Array2::eye(dim), predicate)
    }

    /// The singleton `{point}` (zero generators, vacuous predicate).
    pub fn singleton(point: Array1<T>) -> Result<Self> {
        let n = point.len();
        Self::new(point, Array2::zeros((n, 0)), Arc::new(Predicate::vacuous()))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.basis.ncols()
    }

    pub fn center(&self) -> ArrayView1<'_, T> {
        self.center.view()
    }

    pub fn basis(&self) -> ArrayView2<'_, T> {
        self.basis.view()
    }

    pub fn predicate(&self) -> &Arc<Predicate<T>> {
        &self.predicate
    }

    /// `{W x + b | x in self}`; predicate shared unchanged.
    pub fn affine_map(&self, w: ArrayView2<T>, b: ArrayView1<T>) -> Result<Self> {
        if w.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "affine map columns vs star dimension",
                expected: self.dim(),
                found: w.ncols(),
            });
        }
        if b.len() != w.nrows() {
            return Err(Error::DimensionMismatch {
                context: "affine offset vs map rows",
                expected: w.nrows(),
                found: b.len(),
            });
        }
        let center = w.dot(&self.center) + b;
        let basis = w.dot(&self.basis);
        Self::new(center, basis, Arc::clone(&self.predicate))
    }

    /// Intersection with `{x | H x <= g}`: same center and basis, predicate
    /// gains the rows `(H V) alpha <= g - H c`.
    pub fn intersect_halfspace(&self, h: ArrayView2<T>, g: ArrayView1<T>) -> Result<Self> {
        if h.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "half-space columns vs star dimension",
                expected: self.dim(),
                found: h.ncols(),
            });
        }
        if g.len() != h.nrows() {
            return Err(Error::DimensionMismatch {
                context: "half-space offsets vs rows",
                expected: h.nrows(),
                found: g.len(),
            });
        }
        let rows = h.dot(&self.basis);
        let rhs = &g - &h.dot(&self.center);
        let predicate = Arc::new(self.predicate.appended(rows.view(), rhs.view())?);
        Self::new(self.center.clone(), self.basis.clone(), predicate)
    }

    pub fn is_empty(&self) -> bool {
        self.predicate.is_empty()
    }

    /// Exact `[lo, hi]` of coordinate `i` over the star (two LPs).
    pub fn exact_range(&self, i: usize) -> Result<(T, T)> {
        self.check_coord(i)?;
        self.predicate.range_of(self.basis.row(i), self.center[i])
    }

    /// Interval-arithmetic over-approximation of coordinate `i`'s range;
    /// always contains `exact_range(i)`.
    pub fn estimate_range(&self, i: usize) -> Result<(T, T)> {
        self.check_coord(i)?;
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        self.predicate
            .estimate_range_of(self.basis.row(i), self.center[i])
    }

    fn check_coord(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::DimensionMismatch {
                context: "coordinate index vs star dimension",
                expected: self.dim(),
                found: i,
            });
        }
        Ok(())
    }

    /// True iff some feasible `alpha` satisfies `V alpha = x - c`
    /// (equalities as paired inequalities, decided by a phase-one LP).
    pub fn contains(&self, point: ArrayView1<T>) -> Result<bool> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "point dimension vs star dimension",
                expected: self.dim(),
                found: point.len(),
            });
        }
        let tol = Tolerances::<T>::default().feasibility;
        let m = self.num_generators();
        let mut rows: Vec<T> = Vec::new();
        let mut rhs: Vec<T> = Vec::new();
        for i in 0..self.dim() {
            let delta = point[i] - self.center[i];
            let row = self.basis.row(i);
            if row.iter().all(|v| v.is_zero()) {
                if delta.abs() > tol {
                    return Ok(false);
                }
                continue;
            }
            rows.extend(row.iter().copied());
            rhs.push(delta);
            rows.extend(row.iter().map(|&v| -v));
            rhs.push(-delta);
        }
        if m == 0 {
            return Ok(true);
        }
        let eq_rows = Array2::from_shape_vec((rhs.len(), m), rows)
            .map_err(|e| Error::Shape(e.to_string()))?;
        let system = self
            .predicate
            .constraints()
            .appended(eq_rows.view(), Array1::from_vec(rhs).view())?;
        Ok(lp::is_feasible(&system))
    }

    /// `count` member points, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Array1<T>>> {
        let alphas = self.predicate.sample(count, seed)?;
        Ok(alphas
            .into_iter()
            .map(|a| &self.center + &self.basis.dot(&a))
            .collect())
    }

    /// Member point for a given feasible `alpha`.
    pub fn point_at(&self, alpha: ArrayView1<T>) -> Array1<T> {
        &self.center + &self.basis.dot(&alpha)
    }
}
