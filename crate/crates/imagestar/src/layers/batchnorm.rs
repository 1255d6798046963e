//! Batch normalization (inference mode).

use ndarray::{Array1, Array3};

use crate::error::{Error, Result};
use crate::image_star::{ImageStar, Offset, Scale};
use crate::Scalar;

/// Per-channel normalization `y = gamma * (x - mean) / sqrt(var + eps) + beta`.
#[derive(Debug, Clone)]
pub struct BatchNormLayer<T> {
    mean: Array1<T>,
    variance: Array1<T>,
    epsilon: T,
    gamma: Array1<T>,
    beta: Array1<T>,
}

impl<T: Scalar> BatchNormLayer<T> {
    pub fn new(
        mean: Array1<T>,
        variance: Array1<T>,
        epsilon: T,
        gamma: Array1<T>,
        beta: Array1<T>,
    ) -> Result<Self> {
        let nc = mean.len();
        for (name, v) in [("variance", &variance), ("gamma", &gamma), ("beta", &beta)] {
            if v.len() != nc {
                return Err(Error::DimensionMismatch {
                    context: match name {
                        "variance" => "batchnorm variance vs mean",
                        "gamma" => "batchnorm gamma vs mean",
                        _ => "batchnorm beta vs mean",
                    },
                    expected: nc,
                    found: v.len(),
                });
            }
        }
        if variance.iter().any(|&v| v < T::zero()) {
            return Err(Error::Shape(
                "batchnorm variance must be nonnegative".into(),
            ));
        }
        if !epsilon.is_finite() || epsilon <= T::zero() {
            return Err(Error::Shape("batchnorm epsilon must be positive".into()));
        }
        Ok(Self {
            mean,
            variance,
            epsilon,
            gamma,
            beta,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<T> {
        &self.mean
    }

    pub fn variance(&self) -> &Array1<T> {
        &self.variance
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn gamma(&self) -> &Array1<T> {
        &self.gamma
    }

    pub fn beta(&self) -> &Array1<T> {
        &self.beta
    }

    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        if input.2 != self.num_channels() {
            return Err(Error::Shape(format!(
                "batchnorm has {} channels, input has {}",
                self.num_channels(),
                input.2
            )));
        }
        Ok(input)
    }

    fn inv_std(&self) -> Vec<T> {
        self.variance
            .iter()
            .map(|&v| (v + self.epsilon).sqrt().recip())
            .collect()
    }

    pub fn eval(&self, input: &Array3<T>) -> Result<Array3<T>> {
        self.output_shape(input.dim())?;
        let inv = self.inv_std();
        let mut out = input.clone();
        for ((_, _, k), v) in out.indexed_iter_mut() {
            *v = self.gamma[k] * (*v - self.mean[k]) * inv[k] + self.beta[k];
        }
        Ok(out)
    }

    /// Two chained affine scalings: normalize, then shift and scale.
    pub fn reach(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        self.output_shape(input.shape())?;
        let inv = self.inv_std();
        let norm_offset: Vec<T> = self
            .mean
            .iter()
            .zip(&inv)
            .map(|(&mu, &s)| -mu * s)
            .collect();
        let normalized =
            input.affine_scale(&Scale::PerChannel(inv), &Offset::PerChannel(norm_offset))?;
        normalized.affine_scale(
            &Scale::PerChannel(self.gamma.to_vec()),
            &Offset::PerChannel(self.beta.to_vec()),
        )
    }
}
