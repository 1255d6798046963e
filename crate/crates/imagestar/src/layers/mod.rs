//! Per-layer reachability and concrete evaluation.
//!
//! Convolution, average pooling, fully connected and batch normalization
//! layers transform anchor and generators in closed form and leave the
//! predicate untouched. Max pooling and ReLU are piecewise linear: the exact
//! scheme splits sets along the pieces, the approximate scheme introduces
//! fresh predicate variables instead.

mod avgpool;
mod batchnorm;
mod conv;
mod fc;
mod maxpool;
pub mod relu;

pub use avgpool::AvgPoolLayer;
pub use batchnorm::BatchNormLayer;
pub use conv::Conv2dLayer;
pub use fc::FcLayer;
pub use maxpool::MaxPoolLayer;

use ndarray::Array3;

use crate::error::Result;
use crate::image_star::ImageStar;
use crate::Scalar;

/// One layer of a network.
#[derive(Debug, Clone)]
pub enum Layer<T: Scalar> {
    Conv2d(Conv2dLayer<T>),
    AvgPool(AvgPoolLayer),
    Fc(FcLayer<T>),
    BatchNorm(BatchNormLayer<T>),
    MaxPool(MaxPoolLayer),
    Relu,
}

impl<T: Scalar> Layer<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::AvgPool(_) => "avgpool",
            Layer::Fc(_) => "fc",
            Layer::BatchNorm(_) => "batchnorm",
            Layer::MaxPool(_) => "maxpool",
            Layer::Relu => "relu",
        }
    }

    /// Output image shape for a given input shape; errors on incompatible
    /// geometry.
    pub fn output_shape(&self, input: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
        match self {
            Layer::Conv2d(l) => l.output_shape(input),
            Layer::AvgPool(l) => l.output_shape(input),
            Layer::Fc(l) => l.output_shape(input),
            Layer::BatchNorm(l) => l.output_shape(input),
            Layer::MaxPool(l) => l.output_shape(input),
            Layer::Relu => Ok(input),
        }
    }

    /// Concrete forward pass on a single image.
    pub fn eval(&self, input: &Array3<T>) -> Result<Array3<T>> {
        match self {
            Layer::Conv2d(l) => l.eval(input),
            Layer::AvgPool(l) => l.eval(input),
            Layer::Fc(l) => l.eval(input),
            Layer::BatchNorm(l) => l.eval(input),
            Layer::MaxPool(l) => l.eval(input),
            Layer::Relu => Ok(input.mapv(|v| v.max(T::zero()))),
        }
    }

    /// Exact reachability: the union of returned sets is the image of the
    /// input set under the layer.
    pub fn reach_exact(&self, input: &ImageStar<T>) -> Result<Vec<ImageStar<T>>> {
        match self {
            Layer::Conv2d(l) => Ok(vec![l.reach(input)?]),
            Layer::AvgPool(l) => Ok(vec![l.reach(input)?]),
            Layer::Fc(l) => Ok(vec![l.reach(input)?]),
            Layer::BatchNorm(l) => Ok(vec![l.reach(input)?]),
            Layer::MaxPool(l) => l.reach_exact(input),
            Layer::Relu => relu::reach_relu_exact(input),
        }
    }

    /// Over-approximate reachability: one output set containing the image of
    /// the input set.
    pub fn reach_approx(&self, input: &ImageStar<T>) -> Result<ImageStar<T>> {
        match self {
            Layer::Conv2d(l) => l.reach(input),
            Layer::AvgPool(l) => l.reach(input),
            Layer::Fc(l) => l.reach(input),
            Layer::BatchNorm(l) => l.reach(input),
            Layer::MaxPool(l) => l.reach_approx(input),
            Layer::Relu => relu::reach_relu_approx(input),
        }
    }
}

/// Output height/width for a sliding window of `size` moved by `stride` over
/// an input padded to `padded`, with window extent `extent`.
pub(crate) fn window_output(padded: usize, extent: usize, stride: usize) -> Option<usize> {
    if padded < extent || stride == 0 {
        return None;
    }
    Some((padded - extent) / stride + 1)
}
