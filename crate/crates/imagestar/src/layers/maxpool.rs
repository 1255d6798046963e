//! Max pooling: exact splitting and over-approximation.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Array4};

use super::window_output;
use crate::error::{Error, Result};
use crate::image_star::ImageStar;
use crate::Scalar;

/// Output position `(i, j, k)` together with its max-point candidates.
type RegionCandidates = ((usize, usize, usize), Vec<(usize, usize)>);

#[derive(Debug, Clone)]
pub struct MaxPoolLayer {
    pool: (usize, usize),
    padding: [usize; 4],
    stride: (usize, usize),
}

impl MaxPoolLayer {
    pub fn new(pool: (usize, usize), padding: [usize; 4], stride: (usize, usize)) -> Result<Self> {
        if pool.0 == 0 || pool.1 == 0 || stride.0 == 0 || stride.1 == 0 {
            return Err(Error::Shape(
                "pool size and stride must be at least 1".into(),
            ));
        }
        Ok(Self {
            pool,
            padding,
            stride,
        })
    }

    pub fn pool(&self) -> (usize, usize) {
        self.pool
    }

    pub fn padding(&self) -> [usize; 4] {
        self.padding
    }

    pub fn stride(&self) -> (usize, usize) {
        self.stride
    }

    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        let (h, w, nc) = input;
        let [top, bottom, left, right] = self.padding;
        let oh = window_output(h + top + bottom, self.pool.0, self.stride.0);
        let ow = window_output(w + left + right, self.pool.1, self.stride.1);
        match (oh, ow) {
            (Some(oh), Some(ow)) if oh > 0 && ow > 0 => Ok((oh, ow, nc)),
            _ => Err(Error::Shape(format!(
                "max pool output for input {:?} is empty",
                input
            ))),
        }
    }

    /// Concrete max pooling; padded cells participate as zeros.
    pub fn eval<T: Scalar>(&self, input: &ndarray::Array3<T>) -> Result<ndarray::Array3<T>> {
        let (h, w, nc) = input.dim();
        let (oh, ow, _) = self.output_shape(input.dim())?;
        let [top, _, left, _] = self.padding;
        let mut out = ndarray::Array3::zeros((oh, ow, nc));
        for k in 0..nc {
            for oi in 0..oh {
                for oj in 0..ow {
                    let mut best = -T::infinity();
                    for di in 0..self.pool.0 {
                        for dj in 0..self.pool.1 {
                            let i = (oi * self.stride.0 + di) as isize - top as isize;
                            let j = (oj * self.stride.1 + dj) as isize - left as isize;
                            let v = if i < 0 || j < 0 || i as usize >= h || j as usize >= w {
                                T::zero()
                            } else {
                                input[[i as usize, j as usize, k]]
                            };
                            best = best.max(v);
                        }
                    }
                    out[[oi, oj, k]] = best;
                }
            }
        }
        Ok(out)
    }

    /// Max-point candidates per output position on the zero-padded input.
    /// Returns the padded input, the output shape, and for each output
    /// position `(k, i, j)` in channel-major scan order its candidate list.
    #[allow(clippy::type_complexity)]
    fn candidates<T: Scalar>(
        &self,
        input: &ImageStar<T>,
    ) -> Result<(ImageStar<T>, (usize, usize, usize), Vec<RegionCandidates>)> {
        if input.is_empty() {
            return Err(Error::EmptySet);
        }
        let padded = input.zero_pad(self.padding);
        let out_shape = self.output_shape(input.shape())?;
        let (oh, ow, nc) = out_shape;
        let mut all = Vec::with_capacity(oh * ow * nc);
        for k in 0..nc {
            for i in 0..oh {
                for j in 0..ow {
                    let start = (i * self.stride.0, j * self.stride.1);
                    let cands = padded.get_local_max_index(start, self.pool, k)?;
                    all.push(((i, j, k), cands));
                }
            }
        }
        Ok((padded, out_shape, all))
    }

    /// Exact reachability: the union of the returned stars is the image of
    /// the input set. Single-candidate regions copy that candidate's basis
    /// row; each multi-candidate region splits every running star per
    /// candidate, adding the constraints that make that candidate the
    /// regional max. Infeasible branches are dropped.
    pub fn reach_exact<T: Scalar>(&self, input: &ImageStar<T>) -> Result<Vec<ImageStar<T>>> {
        let (padded, out_shape, regions) = self.candidates(input)?;
        let m = input.num_generators();
        let mut base = Array4::zeros((out_shape.0, out_shape.1, out_shape.2, m + 1));
        let mut splits = Vec::new();
        for ((i, j, k), cands) in regions {
            if cands.len() == 1 {
                let (pi, pj) = cands[0];
                base.slice_mut(s![i, j, k, ..])
                    .assign(&padded.pixel_slots(pi, pj, k));
            } else {
                splits.push(((i, j, k), cands));
            }
        }

        let mut stars = vec![ImageStar::new(base, Arc::clone(input.predicate()))?];
        for ((i, j, k), cands) in splits {
            let mut next = Vec::with_capacity(stars.len() * cands.len());
            for star in &stars {
                for &(pi, pj) in &cands {
                    let (c_anchor, c_coeffs) = padded.pixel_affine(pi, pj, k);
                    let others: Vec<(usize, usize)> =
                        cands.iter().copied().filter(|&p| p != (pi, pj)).collect();
                    let mut rows = Array2::zeros((others.len(), m));
                    let mut rhs = Array1::zeros(others.len());
                    for (r_idx, &(ri, rj)) in others.iter().enumerate() {
                        let (o_anchor, o_coeffs) = padded.pixel_affine(ri, rj, k);
                        for g in 0..m {
                            rows[[r_idx, g]] = o_coeffs[g] - c_coeffs[g];
                        }
                        rhs[r_idx] = c_anchor - o_anchor;
                    }
                    let predicate = Arc::new(star.predicate().appended(rows.view(), rhs.view())?);
                    if predicate.is_empty() {
                        continue;
                    }
                    let mut basis = star.basis().clone();
                    basis
                        .slice_mut(s![i, j, k, ..])
                        .assign(&padded.pixel_slots(pi, pj, k));
                    next.push(ImageStar::new(basis, predicate)?);
                }
            }
            stars = next;
        }
        Ok(stars)
    }

    /// Over-approximate reachability: one output star. Every multi-candidate
    /// region gets a fresh predicate variable `beta` constrained by
    /// `beta <= regional exact upper bound` and `beta >= value(q)` for each
    /// candidate `q`; the output pixel becomes the unit row on `beta`.
    pub fn reach_approx<T: Scalar>(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        let (padded, out_shape, regions) = self.candidates(input)?;
        let m = input.num_generators();
        let split_regions: Vec<&RegionCandidates> =
            regions.iter().filter(|(_, c)| c.len() > 1).collect();
        let n_new = split_regions.len();
        let total = m + n_new;

        let mut basis = Array4::zeros((out_shape.0, out_shape.1, out_shape.2, total + 1));
        let mut new_id = 0usize;
        for ((i, j, k), cands) in &regions {
            if cands.len() == 1 {
                let (pi, pj) = cands[0];
                basis
                    .slice_mut(s![*i, *j, *k, ..=m])
                    .assign(&padded.pixel_slots(pi, pj, *k));
            } else {
                basis[[*i, *j, *k, m + 1 + new_id]] = T::one();
                new_id += 1;
            }
        }

        if n_new == 0 {
            return ImageStar::new(basis, Arc::clone(input.predicate()));
        }

        // One upper-bound row plus one row per candidate, per region.
        let n_rows: usize = split_regions.iter().map(|(_, c)| c.len() + 1).sum();
        let mut rows = Array2::zeros((n_rows, total));
        let mut rhs = Array1::zeros(n_rows);
        let mut row = 0usize;
        for (l, ((_, _, k), cands)) in split_regions.iter().enumerate() {
            let beta_col = m + l;
            // Exact regional upper bound: max over candidate upper bounds
            // (discarded positions cannot exceed a candidate anywhere).
            let mut ub = -T::infinity();
            for &(pi, pj) in cands {
                let (anchor, coeffs) = padded.pixel_affine(pi, pj, *k);
                ub = ub.max(input.predicate().max_of(coeffs, anchor)?);
            }
            rows[[row, beta_col]] = T::one();
            rhs[row] = ub;
            row += 1;
            for &(pi, pj) in cands {
                // beta >= value(q): coeffs_q . alpha - beta <= -anchor_q
                let (anchor, coeffs) = padded.pixel_affine(pi, pj, *k);
                for g in 0..m {
                    rows[[row, g]] = coeffs[g];
                }
                rows[[row, beta_col]] = -T::one();
                rhs[row] = -anchor;
                row += 1;
            }
        }
        let predicate = Arc::new(input.predicate().extended(n_new, rows.view(), rhs.view())?);
        ImageStar::new(basis, predicate)
    }
}
