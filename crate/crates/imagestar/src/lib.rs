//! Set-based robustness verification for convolutional neural networks.
//!
//! The library represents infinite sets of perturbed images as *ImageStars*
//! (an anchor image plus generator images whose coefficients are constrained
//! by a linear predicate), propagates them exactly or over-approximately
//! through network layers, and decides classification robustness. Exact
//! analysis splits sets at non-linearities so the union of results equals the
//! true image of the input set; when a property is violated it yields concrete
//! counterexample inputs. Over-approximate analysis keeps a single set by
//! introducing fresh predicate variables and can certify robustness but never
//! refute it.
//!
//! All numeric code is generic over the scalar type via [`Scalar`]; concrete
//! aliases for `f32`/`f64` are exported at the crate root.
//!
//! ```
//! use imagestar::{lp::LinearConstraints, star::Predicate, Star64};
//! use ndarray::{array, Array2};
//! use std::sync::Arc;
//!
//! // Unit box in R^2 as a star: bounds of coordinate 0 are [-1, 1].
//! let cons = LinearConstraints::new(
//!     array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
//!     array![1.0, 1.0, 1.0, 1.0],
//! )
//! .unwrap();
//! let star = Star64::from_polyhedron(cons.matrix().to_owned(), cons.rhs().to_owned(), 2).unwrap();
//! let (lo, hi) = star.exact_range(0).unwrap();
//! assert!((lo + 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
//! ```

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use rand::distr::uniform::SampleUniform;

pub mod config;
pub mod error;
pub mod image_star;
pub mod io;
pub mod layers;
pub mod lp;
pub mod network;
pub mod robustness;
pub mod star;

pub use config::Tolerances;
pub use error::{Error, Result};

// Re-exported so downstream crates build against the same array types.
pub use ndarray;

/// Floating-point scalar the whole stack is generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + SampleUniform
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

pub type Star32 = star::Star<f32>;
pub type Star64 = star::Star<f64>;
pub type ImageStar32 = image_star::ImageStar<f32>;
pub type ImageStar64 = image_star::ImageStar<f64>;
pub type Network32 = network::Network<f32>;
pub type Network64 = network::Network<f64>;
