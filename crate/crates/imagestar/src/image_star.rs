//! ImageStars: star sets whose anchor and generators are `h x w x nc` images.
//!
//! Storage follows the basis-array convention: one `h x w x nc x (m+1)` array
//! whose slot 0 is the anchor image and slots `1..=m` are the generator
//! images. The canonical flattening order used everywhere (fully connected
//! layers, star conversion, file formats) is row-major over `(row, col)` with
//! channels innermost: flat index `(i*w + j)*nc + k`.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Array3, Array4, ArrayView1, ArrayView3};

use crate::error::{Error, Result};
use crate::star::{Predicate, Star};
use crate::Scalar;

/// Canonical flat index of pixel `(i, j, k)` in an `(h, w, nc)` image.
pub fn flat_index(i: usize, j: usize, k: usize, shape: (usize, usize, usize)) -> usize {
    let (_, w, nc) = shape;
    (i * w + j) * nc + k
}

/// Inverse of [`flat_index`].
pub fn unflat_index(idx: usize, shape: (usize, usize, usize)) -> (usize, usize, usize) {
    let (_, w, nc) = shape;
    let k = idx % nc;
    let rest = idx / nc;
    (rest / w, rest % w, k)
}

/// Flatten an image in canonical order.
pub fn flatten_image<T: Scalar>(image: &ArrayView3<T>) -> Array1<T> {
    // The storage is C-order (h, w, nc), which matches the canonical order.
    Array1::from_iter(image.iter().copied())
}

/// Scale factor of an affine image map: one factor, or one per channel.
#[derive(Debug, Clone)]
pub enum Scale<T> {
    Uniform(T),
    PerChannel(Vec<T>),
}

/// Offset of an affine image map.
#[derive(Debug, Clone)]
pub enum Offset<T> {
    Uniform(T),
    PerChannel(Vec<T>),
    Image(Array3<T>),
}

/// A set of images `{ c + sum_i alpha_i v_i | C alpha <= d }`.
#[derive(Debug, Clone)]
pub struct ImageStar<T: Scalar> {
    /// `(h, w, nc, m+1)`; slot 0 is the anchor.
    basis: Array4<T>,
    predicate: Arc<Predicate<T>>,
}

impl<T: Scalar> ImageStar<T> {
    pub fn new(basis: Array4<T>, predicate: Arc<Predicate<T>>) -> Result<Self> {
        let (h, w, nc, slots) = basis.dim();
        if h == 0 || w == 0 || nc == 0 || slots == 0 {
            return Err(Error::Shape(format!(
                "degenerate image-star basis shape {:?}",
                basis.dim()
            )));
        }
        if slots != predicate.num_vars() + 1 {
            return Err(Error::DimensionMismatch {
                context: "basis slots vs predicate variables + anchor",
                expected: predicate.num_vars() + 1,
                found: slots,
            });
        }
        if basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image-star basis"));
        }
        Ok(Self { basis, predicate })
    }

    pub fn from_parts(
        anchor: Array3<T>,
        generators: &[Array3<T>],
        predicate: Arc<Predicate<T>>,
    ) -> Result<Self> {
        let (h, w, nc) = anchor.dim();
        for g in generators {
            if g.dim() != (h, w, nc) {
                return Err(Error::Shape(format!(
                    "generator shape {:?} differs from anchor shape {:?}",
                    g.dim(),
                    (h, w, nc)
                )));
            }
        }
        let mut basis = Array4::zeros((h, w, nc, generators.len() + 1));
        basis.slice_mut(s![.., .., .., 0]).assign(&anchor);
        for (g, gen) in generators.iter().enumerate() {
            basis.slice_mut(s![.., .., .., g + 1]).assign(gen);
        }
        Self::new(basis, predicate)
    }

    /// The singleton set `{image}`.
    pub fn singleton(image: Array3<T>) -> Result<Self> {
        Self::from_parts(image, &[], Arc::new(Predicate::vacuous()))
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        let (h, w, nc, _) = self.basis.dim();
        (h, w, nc)
    }

    pub fn num_pixels(&self) -> usize {
        let (h, w, nc) = self.shape();
        h * w * nc
    }

    pub fn num_generators(&self) -> usize {
        self.basis.dim().3 - 1
    }

    pub fn predicate(&self) -> &Arc<Predicate<T>> {
        &self.predicate
    }

    pub fn basis(&self) -> &Array4<T> {
        &self.basis
    }

    pub fn anchor(&self) -> ArrayView3<'_, T> {
        self.basis.slice(s![.., .., .., 0])
    }

    pub fn generator(&self, g: usize) -> ArrayView3<'_, T> {
        self.basis.slice(s![.., .., .., g + 1])
    }

    /// All basis slots of one pixel: `[anchor, gen_1, ..., gen_m]`.
    pub fn pixel_slots(&self, i: usize, j: usize, k: usize) -> ArrayView1<'_, T> {
        self.basis.slice(s![i, j, k, ..])
    }

    /// Anchor value and generator coefficients of one pixel.
    pub fn pixel_affine(&self, i: usize, j: usize, k: usize) -> (T, ArrayView1<'_, T>) {
        (self.basis[[i, j, k, 0]], self.basis.slice(s![i, j, k, 1..]))
    }

    /// Replace the basis array, keeping the shared predicate.
    pub fn with_basis(&self, basis: Array4<T>) -> Result<Self> {
        Self::new(basis, Arc::clone(&self.predicate))
    }

    pub fn is_empty(&self) -> bool {
        self.predicate.is_empty()
    }

    /// `{gamma*x + beta | x in self}`: the anchor maps to `gamma*c + beta`,
    /// generators scale by `gamma`, and the predicate is unchanged.
    pub fn affine_scale(&self, scale: &Scale<T>, offset: &Offset<T>) -> Result<Self> {
        let (h, w, nc) = self.shape();
        let factors: Vec<T> = match scale {
            Scale::Uniform(g) => vec![*g; nc],
            Scale::PerChannel(v) => {
                if v.len() != nc {
                    return Err(Error::DimensionMismatch {
                        context: "per-channel scale vs channels",
                        expected: nc,
                        found: v.len(),
                    });
                }
                v.clone()
            }
        };
        let mut basis = self.basis.clone();
        for (k, &f) in factors.iter().enumerate() {
            basis.slice_mut(s![.., .., k, ..]).mapv_inplace(|v| v * f);
        }
        match offset {
            Offset::Uniform(b) => {
                basis.slice_mut(s![.., .., .., 0]).mapv_inplace(|v| v + *b);
            }
            Offset::PerChannel(v) => {
                if v.len() != nc {
                    return Err(Error::DimensionMismatch {
                        context: "per-channel offset vs channels",
                        expected: nc,
                        found: v.len(),
                    });
                }
                for (k, &b) in v.iter().enumerate() {
                    basis.slice_mut(s![.., .., k, 0]).mapv_inplace(|x| x + b);
                }
            }
            Offset::Image(img) => {
                if img.dim() != (h, w, nc) {
                    return Err(Error::Shape(format!(
                        "offset image shape {:?} differs from {:?}",
                        img.dim(),
                        (h, w, nc)
                    )));
                }
                let mut anchor = basis.slice_mut(s![.., .., .., 0]);
                anchor += img;
            }
        }
        self.with_basis(basis)
    }

    /// Flatten to a [`Star`] over `R^(h*w*nc)` in canonical order; the
    /// predicate object is shared.
    pub fn to_star(&self) -> Star<T> {
        let n = self.num_pixels();
        let m = self.num_generators();
        let center = flatten_image(&self.anchor());
        let mut basis = Array2::zeros((n, m));
        for g in 0..m {
            for (r, v) in self.generator(g).iter().enumerate() {
                basis[[r, g]] = *v;
            }
        }
        Star::new(center, basis, Arc::clone(&self.predicate))
            .expect("image-star fields are valid by construction")
    }

    /// Inverse of [`Self::to_star`] for a known image shape.
    pub fn from_star(star: &Star<T>, shape: (usize, usize, usize)) -> Result<Self> {
        let (h, w, nc) = shape;
        if star.dim() != h * w * nc {
            return Err(Error::DimensionMismatch {
                context: "star dimension vs image shape",
                expected: h * w * nc,
                found: star.dim(),
            });
        }
        let m = star.num_generators();
        let mut basis = Array4::zeros((h, w, nc, m + 1));
        for (r, v) in star.center().iter().enumerate() {
            let (i, j, k) = unflat_index(r, shape);
            basis[[i, j, k, 0]] = *v;
        }
        for g in 0..m {
            for (r, v) in star.basis().column(g).iter().enumerate() {
                let (i, j, k) = unflat_index(r, shape);
                basis[[i, j, k, g + 1]] = *v;
            }
        }
        Self::new(basis, Arc::clone(star.predicate()))
    }

    pub fn pixel_exact_range(&self, i: usize, j: usize, k: usize) -> Result<(T, T)> {
        self.check_pixel(i, j, k)?;
        let (anchor, coeffs) = self.pixel_affine(i, j, k);
        self.predicate.range_of(coeffs, anchor)
    }

    pub fn pixel_estimate_range(&self, i: usize, j: usize, k: usize) -> Result<(T, T)> {
        self.check_pixel(i, j, k)?;
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let (anchor, coeffs) = self.pixel_affine(i, j, k);
        self.predicate.estimate_range_of(coeffs, anchor)
    }

    fn check_pixel(&self, i: usize, j: usize, k: usize) -> Result<()> {
        let (h, w, nc) = self.shape();
        if i >= h || j >= w || k >= nc {
            return Err(Error::Shape(format!(
                "pixel ({i}, {j}, {k}) outside image of shape {:?}",
                (h, w, nc)
            )));
        }
        Ok(())
    }

    /// Positions inside the `pool`-sized region at `start` (channel `k`) that
    /// can attain the regional maximum for some feasible `alpha`.
    ///
    /// Two phases: positions whose estimated upper bound falls strictly below
    /// the largest estimated lower bound are discarded; each survivor `q` is
    /// then confirmed by the LP feasibility of `value(q) >= value(r)` for
    /// every other position `r` of the region. Positions are returned in
    /// row-major region order.
    pub fn get_local_max_index(
        &self,
        start: (usize, usize),
        pool: (usize, usize),
        channel: usize,
    ) -> Result<Vec<(usize, usize)>> {
        let (h, w, nc) = self.shape();
        if channel >= nc || start.0 + pool.0 > h || start.1 + pool.1 > w {
            return Err(Error::Shape(format!(
                "pooling region start {:?} size {:?} channel {channel} outside shape {:?}",
                start,
                pool,
                (h, w, nc)
            )));
        }
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let positions: Vec<(usize, usize)> = (0..pool.0)
            .flat_map(|di| (0..pool.1).map(move |dj| (start.0 + di, start.1 + dj)))
            .collect();
        let estimates: Vec<(T, T)> = positions
            .iter()
            .map(|&(i, j)| self.pixel_estimate_range(i, j, channel))
            .collect::<Result<_>>()?;
        let max_lb = estimates
            .iter()
            .map(|&(lo, _)| lo)
            .fold(-T::infinity(), T::max);
        let survivors: Vec<usize> = (0..positions.len())
            .filter(|&q| estimates[q].1 >= max_lb)
            .collect();
        if survivors.len() == 1 {
            return Ok(vec![positions[survivors[0]]]);
        }

        let m = self.num_generators();
        let mut candidates = Vec::new();
        for &q in &survivors {
            let (qi, qj) = positions[q];
            let (q_anchor, q_coeffs) = self.pixel_affine(qi, qj, channel);
            // value(q) >= value(r)  <=>  (coeffs_r - coeffs_q) alpha <= anchor_q - anchor_r
            let others: Vec<usize> = (0..positions.len()).filter(|&r| r != q).collect();
            let mut rows = Array2::zeros((others.len(), m));
            let mut rhs = Array1::zeros(others.len());
            for (row_idx, &r) in others.iter().enumerate() {
                let (ri, rj) = positions[r];
                let (r_anchor, r_coeffs) = self.pixel_affine(ri, rj, channel);
                for g in 0..m {
                    rows[[row_idx, g]] = r_coeffs[g] - q_coeffs[g];
                }
                rhs[row_idx] = q_anchor - r_anchor;
            }
            let system = self.predicate.appended(rows.view(), rhs.view())?;
            if !system.is_empty() {
                candidates.push(positions[q]);
            }
        }
        Ok(candidates)
    }

    pub fn contains_image(&self, image: &Array3<T>) -> Result<bool> {
        let (h, w, nc) = self.shape();
        if image.dim() != (h, w, nc) {
            return Err(Error::Shape(format!(
                "image shape {:?} differs from set shape {:?}",
                image.dim(),
                (h, w, nc)
            )));
        }
        let flat = flatten_image(&image.view());
        self.to_star().contains(flat.view())
    }

    /// `count` member images, deterministic in `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<Array3<T>>> {
        let alphas = self.predicate.sample(count, seed)?;
        Ok(alphas.iter().map(|a| self.image_at(a.view())).collect())
    }

    /// The member image for a given feasible `alpha`.
    pub fn image_at(&self, alpha: ArrayView1<T>) -> Array3<T> {
        let mut out = self.anchor().to_owned();
        for g in 0..self.num_generators() {
            let coeff = alpha[g];
            if coeff.is_zero() {
                continue;
            }
            out.zip_mut_with(&self.generator(g), |o, &v| *o += coeff * v);
        }
        out
    }

    /// Zero-pad every basis slot by `(top, bottom, left, right)`.
    pub fn zero_pad(&self, padding: [usize; 4]) -> Self {
        let [top, bottom, left, right] = padding;
        if padding == [0; 4] {
            return self.clone();
        }
        let (h, w, nc) = self.shape();
        let slots = self.num_generators() + 1;
        let mut basis = Array4::zeros((h + top + bottom, w + left + right, nc, slots));
        basis
            .slice_mut(s![top..top + h, left..left + w, .., ..])
            .assign(&self.basis);
        Self {
            basis,
            predicate: Arc::clone(&self.predicate),
        }
    }

    /// Copy with the given flat-indexed pixels' rows (anchor and all
    /// generators) set to zero.
    pub fn with_zeroed_pixels(&self, flat_indices: &[usize]) -> Result<Self> {
        let mut basis = self.basis.clone();
        for &idx in flat_indices {
            let (i, j, k) = unflat_index(idx, self.shape());
            basis.slice_mut(s![i, j, k, ..]).fill(T::zero());
        }
        self.with_basis(basis)
    }
}
