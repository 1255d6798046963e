//! Network assembly, the layer-by-layer reachability driver, and concrete
//! whole-network inference.

use std::time::{Duration, Instant};

use ndarray::{Array1, Array3};
use rayon::prelude::*;

use crate::config::DEFAULT_STAR_BUDGET;
use crate::error::{Error, Result};
use crate::image_star::{flatten_image, ImageStar};
use crate::layers::Layer;
use crate::lp;
use crate::Scalar;

/// Reachability scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Exact,
    Approx,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Approx => "approx",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Scheme::Exact),
            "approx" => Ok(Scheme::Approx),
            other => Err(Error::Parse(format!(
                "unknown scheme {other:?}; expected \"exact\" or \"approx\""
            ))),
        }
    }
}

/// Bookkeeping collected by one reachability run.
#[derive(Debug, Clone, Default)]
pub struct ReachStats {
    /// Number of live stars after each layer.
    pub stars_per_layer: Vec<usize>,
    /// LP solves performed during the run (process-wide delta).
    pub lp_calls: u64,
    pub elapsed: Duration,
}

/// Output sets plus statistics. Under the approximate scheme there is
/// exactly one output set.
#[derive(Debug, Clone)]
pub struct ReachResult<T: Scalar> {
    pub output_sets: Vec<ImageStar<T>>,
    pub stats: ReachStats,
}

/// An ordered list of layers with a fixed input shape and class labels.
#[derive(Debug, Clone)]
pub struct Network<T: Scalar> {
    layers: Vec<Layer<T>>,
    input_shape: (usize, usize, usize),
    labels: Vec<String>,
    output_shape: (usize, usize, usize),
}

impl<T: Scalar> Network<T> {
    /// Validates the whole shape chain once; labels, when given, must match
    /// the flattened output length.
    pub fn new(
        layers: Vec<Layer<T>>,
        input_shape: (usize, usize, usize),
        labels: Vec<String>,
    ) -> Result<Self> {
        let mut shape = input_shape;
        for (idx, layer) in layers.iter().enumerate() {
            shape = layer
                .output_shape(shape)
                .map_err(|e| Error::Shape(format!("layer {idx} ({}): {e}", layer.kind())))?;
        }
        let out_len = shape.0 * shape.1 * shape.2;
        if !labels.is_empty() && labels.len() != out_len {
            return Err(Error::Shape(format!(
                "{} labels for {} outputs",
                labels.len(),
                out_len
            )));
        }
        Ok(Self {
            layers,
            input_shape,
            labels,
            output_shape: shape,
        })
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        self.input_shape
    }

    pub fn output_shape(&self) -> (usize, usize, usize) {
        self.output_shape
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Flattened output length.
    pub fn num_outputs(&self) -> usize {
        self.output_shape.0 * self.output_shape.1 * self.output_shape.2
    }

    pub fn label_name(&self, index: usize) -> String {
        self.labels
            .get(index)
            .cloned()
            .unwrap_or_else(|| index.to_string())
    }

    /// Resolve a label name or numeric index.
    pub fn label_index(&self, label: &str) -> Result<usize> {
        if let Some(idx) = self.labels.iter().position(|l| l == label) {
            return Ok(idx);
        }
        match label.parse::<usize>() {
            Ok(idx) if idx < self.num_outputs() => Ok(idx),
            _ => Err(Error::Parse(format!(
                "unknown label {label:?}; have {:?}",
                self.labels
            ))),
        }
    }

    /// Concrete logits for one image.
    pub fn eval(&self, image: &Array3<T>) -> Result<Array1<T>> {
        if image.dim() != self.input_shape {
            return Err(Error::Shape(format!(
                "input shape {:?} does not match network input {:?}",
                image.dim(),
                self.input_shape
            )));
        }
        let mut current = image.clone();
        for layer in &self.layers {
            current = layer.eval(&current)?;
        }
        Ok(flatten_image(&current.view()))
    }

    pub fn reach(&self, input: &ImageStar<T>, scheme: Scheme) -> Result<ReachResult<T>> {
        self.reach_with_budget(input, scheme, DEFAULT_STAR_BUDGET)
    }

    /// Layer-by-layer reachability. The exact scheme carries a growing list
    /// of stars (processed in parallel, results concatenated in input
    /// order); the approximate scheme carries exactly one.
    pub fn reach_with_budget(
        &self,
        input: &ImageStar<T>,
        scheme: Scheme,
        budget: usize,
    ) -> Result<ReachResult<T>> {
        if input.shape() != self.input_shape {
            return Err(Error::Shape(format!(
                "input set shape {:?} does not match network input {:?}",
                input.shape(),
                self.input_shape
            )));
        }
        if input.is_empty() {
            return Err(Error::EmptySet);
        }
        let started = Instant::now();
        let lp_before = lp::lp_call_count();
        let mut stars_per_layer = Vec::with_capacity(self.layers.len());
        let mut sets = vec![input.clone()];
        for layer in &self.layers {
            sets = match scheme {
                Scheme::Exact => {
                    let mapped: Result<Vec<Vec<ImageStar<T>>>> =
                        sets.par_iter().map(|s| layer.reach_exact(s)).collect();
                    mapped?.into_iter().flatten().collect()
                }
                Scheme::Approx => {
                    let only = sets.first().expect("approx scheme keeps one set");
                    vec![layer.reach_approx(only)?]
                }
            };
            if sets.len() > budget {
                return Err(Error::BudgetExceeded {
                    count: sets.len(),
                    budget,
                });
            }
            stars_per_layer.push(sets.len());
        }
        Ok(ReachResult {
            output_sets: sets,
            stats: ReachStats {
                stars_per_layer,
                lp_calls: lp::lp_call_count() - lp_before,
                elapsed: started.elapsed(),
            },
        })
    }
}

/// Per-coordinate output ranges of a family of output sets: exact ranges per
/// star, hulled across stars.
pub fn output_ranges<T: Scalar>(sets: &[ImageStar<T>]) -> Result<Vec<(T, T)>> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = sets[0].num_pixels();
    let mut ranges = vec![(T::infinity(), -T::infinity()); n];
    for set in sets {
        let star = set.to_star();
        for (i, r) in ranges.iter_mut().enumerate() {
            let (lo, hi) = star.exact_range(i)?;
            r.0 = r.0.min(lo);
            r.1 = r.1.max(hi);
        }
    }
    Ok(ranges)
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax<T: Scalar>(logits: &Array1<T>) -> usize {
    let mut best = 0;
    for i in 1..logits.len() {
        if logits[i] > logits[best] {
            best = i;
        }
    }
    best
}
