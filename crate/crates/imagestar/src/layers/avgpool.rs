//! Average pooling.

use ndarray::{s, Array3, Array4};

use super::window_output;
use crate::error::{Error, Result};
use crate::image_star::ImageStar;
use crate::Scalar;

/// Average pooling with pool size, padding `(top, bottom, left, right)` and
/// stride. Padded cells count as zeros and the divisor is always the full
/// pool area.
#[derive(Debug, Clone)]
pub struct AvgPoolLayer {
    pool: (usize, usize),
    padding: [usize; 4],
    stride: (usize, usize),
}

impl AvgPoolLayer {
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
                "average pool output for input {:?} is empty",
                input
            ))),
        }
    }

    fn pool_image<T: Scalar>(&self, input: &Array3<T>) -> Result<Array3<T>> {
        let (h, w, nc) = input.dim();
        let (oh, ow, _) = self.output_shape(input.dim())?;
        let [top, _, left, _] = self.padding;
        let area = T::from_usize(self.pool.0 * self.pool.1).expect("pool area");
        let mut out = Array3::zeros((oh, ow, nc));
        for k in 0..nc {
            for oi in 0..oh {
                for oj in 0..ow {
                    let mut acc = T::zero();
                    for di in 0..self.pool.0 {
                        for dj in 0..self.pool.1 {
                            let i = (oi * self.stride.0 + di) as isize - top as isize;
                            let j = (oj * self.stride.1 + dj) as isize - left as isize;
                            if i < 0 || j < 0 || i as usize >= h || j as usize >= w {
                                continue;
                            }
                            acc += input[[i as usize, j as usize, k]];
                        }
                    }
                    out[[oi, oj, k]] = acc / area;
                }
            }
        }
        Ok(out)
    }

    pub fn eval<T: Scalar>(&self, input: &Array3<T>) -> Result<Array3<T>> {
        self.pool_image(input)
    }

    /// Anchor and generators are pooled alike; the predicate is unchanged.
    pub fn reach<T: Scalar>(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        let out_shape = self.output_shape(input.shape())?;
        let m = input.num_generators();
        let mut basis = Array4::zeros((out_shape.0, out_shape.1, out_shape.2, m + 1));
        basis
            .slice_mut(s![.., .., .., 0])
            .assign(&self.pool_image(&input.anchor().to_owned())?);
        for g in 0..m {
            basis
                .slice_mut(s![.., .., .., g + 1])
                .assign(&self.pool_image(&input.generator(g).to_owned())?);
        }
        input.with_basis(basis)
    }
}
