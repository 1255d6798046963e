//! Two-dimensional convolution.

use ndarray::{s, Array1, Array3, Array4};

use super::window_output;
use crate::error::{Error, Result};
use crate::image_star::ImageStar;
use crate::Scalar;

/// Convolution with weights `(h_f, w_f, nc, nf)`, per-filter bias, padding
/// `(top, bottom, left, right)`, stride and dilation.
#[derive(Debug, Clone)]
pub struct Conv2dLayer<T> {
    weights: Array4<T>,
    bias: Array1<T>,
    padding: [usize; 4],
    stride: (usize, usize),
    dilation: (usize, usize),
}

impl<T: Scalar> Conv2dLayer<T> {
    pub fn new(
        weights: Array4<T>,
        bias: Array1<T>,
        padding: [usize; 4],
        stride: (usize, usize),
        dilation: (usize, usize),
    ) -> Result<Self> {
        let (_, _, _, nf) = weights.dim();
        if bias.len() != nf {
            return Err(Error::DimensionMismatch {
                context: "conv bias vs filter count",
                expected: nf,
                found: bias.len(),
            });
        }
        if stride.0 == 0 || stride.1 == 0 || dilation.0 == 0 || dilation.1 == 0 {
            return Err(Error::Shape(
                "conv stride and dilation must be at least 1".into(),
            ));
        }
        if weights.iter().any(|v| !v.is_finite()) || bias.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conv weights"));
        }
        Ok(Self {
            weights,
            bias,
            padding,
            stride,
            dilation,
        })
    }

    pub fn weights(&self) -> &Array4<T> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<T> {
        &self.bias
    }

    pub fn padding(&self) -> [usize; 4] {
        self.padding
    }

    pub fn stride(&self) -> (usize, usize) {
        self.stride
    }

    pub fn dilation(&self) -> (usize, usize) {
        self.dilation
    }

    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        let (h, w, nc) = input;
        let (hf, wf, wnc, nf) = self.weights.dim();
        if wnc != nc {
            return Err(Error::Shape(format!(
                "conv filters expect {wnc} input channels, got {nc}"
            )));
        }
        let [top, bottom, left, right] = self.padding;
        let eff_h = self.dilation.0 * (hf - 1) + 1;
        let eff_w = self.dilation.1 * (wf - 1) + 1;
        let oh = window_output(h + top + bottom, eff_h, self.stride.0);
        let ow = window_output(w + left + right, eff_w, self.stride.1);
        match (oh, ow) {
            (Some(oh), Some(ow)) if oh > 0 && ow > 0 => Ok((oh, ow, nf)),
            _ => Err(Error::Shape(format!(
                "conv output for input {:?} is empty",
                input
            ))),
        }
    }

    /// Convolution of one concrete image; `with_bias` selects whether the
    /// per-filter bias is added.
    fn convolve(&self, input: &Array3<T>, with_bias: bool) -> Result<Array3<T>> {
        let (h, w, _) = input.dim();
        let (oh, ow, nf) = self.output_shape(input.dim())?;
        let (hf, wf, nc, _) = self.weights.dim();
        let [top, _, left, _] = self.padding;
        let mut out = Array3::zeros((oh, ow, nf));
        for f in 0..nf {
            for oi in 0..oh {
                for oj in 0..ow {
                    let mut acc = T::zero();
                    for ki in 0..hf {
                        for kj in 0..wf {
                            let i =
                                (oi * self.stride.0 + ki * self.dilation.0) as isize - top as isize;
                            let j = (oj * self.stride.1 + kj * self.dilation.1) as isize
                                - left as isize;
                            if i < 0 || j < 0 || i as usize >= h || j as usize >= w {
                                continue; // zero padding
                            }
                            for c in 0..nc {
                                acc += self.weights[[ki, kj, c, f]]
                                    * input[[i as usize, j as usize, c]];
                            }
                        }
                    }
                    if with_bias {
                        acc += self.bias[f];
                    }
                    out[[oi, oj, f]] = acc;
                }
            }
        }
        Ok(out)
    }

    pub fn eval(&self, input: &Array3<T>) -> Result<Array3<T>> {
        self.convolve(input, true)
    }

    /// Anchor is convolved with bias, generators with zero bias; the
    /// predicate is unchanged.
    pub fn reach(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        let out_shape = self.output_shape(input.shape())?;
        let m = input.num_generators();
        let mut basis = Array4::zeros((out_shape.0, out_shape.1, out_shape.2, m + 1));
        let anchor = self.convolve(&input.anchor().to_owned(), true)?;
        basis.slice_mut(s![.., .., .., 0]).assign(&anchor);
        for g in 0..m {
            let mapped = self.convolve(&input.generator(g).to_owned(), false)?;
            basis.slice_mut(s![.., .., .., g + 1]).assign(&mapped);
        }
        input.with_basis(basis)
    }
}
