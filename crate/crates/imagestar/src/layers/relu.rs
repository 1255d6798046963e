//! ReLU: per-pixel exact splitting and the triangle over-approximation.
//!
//! Non-splitting pixels are filtered cheaply first: estimated ranges rule
//! most pixels in or out, exact LP ranges decide the rest. In the exact
//! scheme each remaining pixel may split every running star in two; in the
//! approximate scheme it gets a fresh predicate variable bounded by the
//! triangle relaxation.

use std::sync::Arc;

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::image_star::{unflat_index, ImageStar};
use crate::Scalar;

enum PixelClass<T> {
    /// Exact range within `[0, inf)`: the pixel passes through unchanged.
    Stable,
    /// Exact range within `(-inf, 0]`: the pixel's row becomes zero.
    Negative,
    /// Exact range straddles zero.
    Split(T, T),
}

fn classify_exact<T: Scalar>(lo: T, hi: T) -> PixelClass<T> {
    if lo >= T::zero() {
        PixelClass::Stable
    } else if hi <= T::zero() {
        PixelClass::Negative
    } else {
        PixelClass::Split(lo, hi)
    }
}

/// Classify one pixel of `star`, estimated range first, exact only if needed.
fn classify_pixel<T: Scalar>(star: &ImageStar<T>, idx: usize) -> Result<PixelClass<T>> {
    let (i, j, k) = unflat_index(idx, star.shape());
    let (lo, hi) = star.pixel_estimate_range(i, j, k)?;
    if lo >= T::zero() {
        return Ok(PixelClass::Stable);
    }
    if hi <= T::zero() {
        return Ok(PixelClass::Negative);
    }
    let (lo, hi) = star.pixel_exact_range(i, j, k)?;
    Ok(classify_exact(lo, hi))
}

/// Exact ReLU update of a single pixel: unchanged when provably nonnegative,
/// zeroed when provably nonpositive, and otherwise split into the branch
/// intersected with `value >= 0` (row kept) and the branch intersected with
/// `value <= 0` (row zeroed). Both branches keep the boundary hyperplane;
/// straddling ranges certify both branches non-empty.
pub fn step_relu<T: Scalar>(star: &ImageStar<T>, idx: usize) -> Result<Vec<ImageStar<T>>> {
    let (i, j, k) = unflat_index(idx, star.shape());
    let (lo, hi) = star.pixel_exact_range(i, j, k)?;
    match classify_exact(lo, hi) {
        PixelClass::Stable => Ok(vec![star.clone()]),
        PixelClass::Negative => Ok(vec![star.with_zeroed_pixels(&[idx])?]),
        PixelClass::Split(_, _) => {
            let m = star.num_generators();
            let (anchor, coeffs) = star.pixel_affine(i, j, k);
            let coeffs = coeffs.to_owned();
            // value >= 0: -coeffs . alpha <= anchor
            let mut pos_row = Array2::zeros((1, m));
            for g in 0..m {
                pos_row[[0, g]] = -coeffs[g];
            }
            let pos_pred = Arc::new(
                star.predicate()
                    .appended(pos_row.view(), Array1::from_elem(1, anchor).view())?,
            );
            // value <= 0: coeffs . alpha <= -anchor
            let mut neg_row = Array2::zeros((1, m));
            for g in 0..m {
                neg_row[[0, g]] = coeffs[g];
            }
            let neg_pred = Arc::new(
                star.predicate()
                    .appended(neg_row.view(), Array1::from_elem(1, -anchor).view())?,
            );
            let kept = ImageStar::new(star.basis().clone(), pos_pred)?;
            let zeroed = star.with_zeroed_pixels(&[idx])?;
            let zeroed = ImageStar::new(zeroed.basis().clone(), neg_pred)?;
            Ok(vec![kept, zeroed])
        }
    }
}

/// Exact ReLU over all pixels: fold the per-pixel update over the running
/// star list in canonical pixel order.
pub fn reach_relu_exact<T: Scalar>(input: &ImageStar<T>) -> Result<Vec<ImageStar<T>>> {
    if input.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = input.num_pixels();
    let mut zeroed = Vec::new();
    let mut straddling = Vec::new();
    for idx in 0..n {
        match classify_pixel(input, idx)? {
            PixelClass::Stable => {}
            PixelClass::Negative => zeroed.push(idx),
            PixelClass::Split(_, _) => straddling.push(idx),
        }
    }
    let mut stars = vec![input.with_zeroed_pixels(&zeroed)?];
    for idx in straddling {
        let mut next = Vec::with_capacity(stars.len() * 2);
        for star in &stars {
            next.extend(step_relu(star, idx)?);
        }
        stars = next;
    }
    Ok(stars)
}

/// Over-approximate ReLU: one output star. Each splitting pixel with exact
/// range `[l, u]`, `l < 0 < u`, gets a fresh predicate variable `beta` with
/// `beta >= 0`, `beta >= value(x)` and `beta <= u*(value(x) - l)/(u - l)`;
/// its output row becomes the unit row on `beta`.
pub fn reach_relu_approx<T: Scalar>(input: &ImageStar<T>) -> Result<ImageStar<T>> {
    if input.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = input.num_pixels();
    let m = input.num_generators();
    let mut zeroed = Vec::new();
    let mut splits = Vec::new();
    for idx in 0..n {
        match classify_pixel(input, idx)? {
            PixelClass::Stable => {}
            PixelClass::Negative => zeroed.push(idx),
            PixelClass::Split(lo, hi) => splits.push((idx, lo, hi)),
        }
    }

    let seeded = input.with_zeroed_pixels(&zeroed)?;
    if splits.is_empty() {
        return Ok(seeded);
    }

    let n_new = splits.len();
    let total = m + n_new;
    let (h, w, nc) = input.shape();
    let mut basis = ndarray::Array4::zeros((h, w, nc, total + 1));
    basis.slice_mut(s![.., .., .., ..=m]).assign(seeded.basis());

    let mut rows = Array2::zeros((3 * n_new, total));
    let mut rhs = Array1::zeros(3 * n_new);
    for (s_idx, &(idx, lo, hi)) in splits.iter().enumerate() {
        let (i, j, k) = unflat_index(idx, input.shape());
        let beta_col = m + s_idx;
        // Output pixel is exactly beta.
        basis.slice_mut(s![i, j, k, ..]).fill(T::zero());
        basis[[i, j, k, beta_col + 1]] = T::one();

        let (anchor, coeffs) = input.pixel_affine(i, j, k);
        let r0 = 3 * s_idx;
        // beta >= 0
        rows[[r0, beta_col]] = -T::one();
        rhs[r0] = T::zero();
        // beta >= value(x): coeffs . alpha - beta <= -anchor
        for g in 0..m {
            rows[[r0 + 1, g]] = coeffs[g];
        }
        rows[[r0 + 1, beta_col]] = -T::one();
        rhs[r0 + 1] = -anchor;
        // beta <= u*(value(x) - l)/(u - l): -slope*coeffs . alpha + beta <= slope*(anchor - l)
        let slope = hi / (hi - lo);
        for g in 0..m {
            rows[[r0 + 2, g]] = -slope * coeffs[g];
        }
        rows[[r0 + 2, beta_col]] = T::one();
        rhs[r0 + 2] = slope * (anchor - lo);
    }
    let predicate = Arc::new(input.predicate().extended(n_new, rows.view(), rhs.view())?);
    ImageStar::new(basis, predicate)
}
