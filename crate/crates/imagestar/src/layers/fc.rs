//! Fully connected layers.

use ndarray::{Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::image_star::{flatten_image, ImageStar};
use crate::Scalar;

/// Dense layer `y = W x + b` over the canonically flattened input.
#[derive(Debug, Clone)]
pub struct FcLayer<T> {
    weights: Array2<T>,
    bias: Array1<T>,
}

impl<T: Scalar> FcLayer<T> {
    pub fn new(weights: Array2<T>, bias: Array1<T>) -> Result<Self> {
        if bias.len() != weights.nrows() {
            return Err(Error::DimensionMismatch {
                context: "fc bias vs weight rows",
                expected: weights.nrows(),
                found: bias.len(),
            });
        }
        if weights.iter().any(|v| !v.is_finite()) || bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fc weights"));
        }
        Ok(Self { weights, bias })
    }

    /// Identity layer on `n` inputs.
    pub fn identity(n: usize) -> Self {
        Self {
            weights: Array2::eye(n),
            bias: Array1::zeros(n),
        }
    }

    pub fn weights(&self) -> &Array2<T> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<T> {
        &self.bias
    }

    pub fn input_len(&self) -> usize {
        self.weights.ncols()
    }

    pub fn output_len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        let (h, w, nc) = input;
        if h * w * nc != self.input_len() {
            return Err(Error::Shape(format!(
                "fc expects {} inputs, image shape {:?} flattens to {}",
                self.input_len(),
                input,
                h * w * nc
            )));
        }
        Ok((1, 1, self.output_len()))
    }

    pub fn eval(&self, input: &Array3<T>) -> Result<Array3<T>> {
        self.output_shape(input.dim())?;
        let flat = flatten_image(&input.view());
        let out = self.weights.dot(&flat) + &self.bias;
        Ok(out
            .into_shape_with_order((1, 1, self.output_len()))
            .expect("row vector reshapes to 1x1xn"))
    }

    /// Flatten in canonical order, then map anchor by `W c + b` and each
    /// generator by `W v`; the predicate is unchanged.
    pub fn reach(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        self.output_shape(input.shape())?;
        let star = input.to_star();
        let mapped = star.affine_map(self.weights.view(), self.bias.view())?;
        ImageStar::from_star(&mapped, (1, 1, self.output_len()))
    }
}
