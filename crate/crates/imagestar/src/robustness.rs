//! Attack input sets, argmax robustness verification, counterexample
//! extraction and random-simulation falsification.

use ndarray::{Array1, Array2, Array3};

use crate::config::DEFAULT_STAR_BUDGET;
use crate::error::{Error, Result};
use crate::image_star::ImageStar;
use crate::lp::LpOutcome;
use crate::network::{argmax, Network, ReachResult, ReachStats, Scheme};
use crate::star::{Predicate, Star};
use crate::Scalar;

use std::sync::Arc;

/// Verification verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Robust,
    NotRobust,
    Unknown,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Robust => "Robust",
            Verdict::NotRobust => "NotRobust",
            Verdict::Unknown => "Unknown",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete input that the network misclassifies.
#[derive(Debug, Clone)]
pub struct Counterexample<T> {
    pub image: Array3<T>,
    pub predicted: usize,
}

#[derive(Debug, Clone)]
pub struct RobustnessResult<T> {
    pub verdict: Verdict,
    pub counterexamples: Vec<Counterexample<T>>,
    /// Label whose score can reach the target's (the violating intersection).
    pub violating_label: Option<usize>,
    pub stats: ReachStats,
}

/// Options for [`verify_robustness_with`].
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub budget: usize,
    /// Counterexamples requested from a violating intersection.
    pub num_counterexamples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_STAR_BUDGET,
            num_counterexamples: 5,
            seed: 0,
        }
    }
}

/// Attack kinds, with their parameters.
#[derive(Debug, Clone)]
pub enum AttackKind<T> {
    /// Darken every pixel whose value is at least `threshold` into
    /// `[0, delta * value]`.
    Brightening { threshold: T, delta: T },
    /// Move from `base` toward an adversarial image: `base + (l + s) * diff`
    /// with `0 <= s <= delta_max`.
    Interpolation {
        adversarial: Array3<T>,
        level: T,
        delta_max: T,
    },
    /// Brighten every pixel with value at least `1 - delta` up to 1.
    ZonotopeBrightening { delta: T },
}

/// An attack applied to a base image.
#[derive(Debug, Clone)]
pub struct AttackSpec<T> {
    pub kind: AttackKind<T>,
    pub base: Array3<T>,
}

impl<T: Scalar> AttackSpec<T> {
    pub fn build(&self) -> Result<ImageStar<T>> {
        match &self.kind {
            AttackKind::Brightening { threshold, delta } => {
                brightening_set(&self.base, *threshold, *delta)
            }
            AttackKind::Interpolation {
                adversarial,
                level,
                delta_max,
            } => interpolation_set(&self.base, adversarial, *level, *delta_max),
            AttackKind::ZonotopeBrightening { delta } => {
                zonotope_brightening_set(&self.base, *delta)
            }
        }
    }
}

fn check_fraction<T: Scalar>(value: T, what: &'static str) -> Result<()> {
    if !(value >= T::zero() && value <= T::one()) {
        return Err(Error::Parse(format!(
            "{what} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Brightening attack: every pixel with `value >= threshold` is zeroed in
/// the anchor and carried entirely by one fresh generator with
/// `0 <= alpha <= delta * value`. Errors with [`Error::NoAttackedPixels`]
/// when no pixel qualifies (the set degenerates to the singleton image).
pub fn brightening_set<T: Scalar>(
    image: &Array3<T>,
    threshold: T,
    delta: T,
) -> Result<ImageStar<T>> {
    check_fraction(delta, "brightening delta")?;
    if image.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("attack base image"));
    }
    let attacked: Vec<(usize, usize, usize)> = image
        .indexed_iter()
        .filter(|(_, &v)| v >= threshold)
        .map(|((i, j, k), _)| (i, j, k))
        .collect();
    if attacked.is_empty() {
        return Err(Error::NoAttackedPixels);
    }
    let mut anchor = image.clone();
    let mut generators = Vec::with_capacity(attacked.len());
    let mut lows = Vec::with_capacity(attacked.len());
    let mut highs = Vec::with_capacity(attacked.len());
    for &(i, j, k) in &attacked {
        let mut gen = Array3::zeros(image.dim());
        gen[[i, j, k]] = T::one();
        lows.push(T::zero());
        highs.push(delta * anchor[[i, j, k]]);
        anchor[[i, j, k]] = T::zero();
        generators.push(gen);
    }
    let predicate = Arc::new(Predicate::from_box(&lows, &highs)?);
    ImageStar::from_parts(anchor, &generators, predicate)
}

/// Interpolation attack toward an adversarial image: the set
/// `{base + (level + s) * (adv - base) | 0 <= s <= delta_max}`.
pub fn interpolation_set<T: Scalar>(
    base: &Array3<T>,
    adversarial: &Array3<T>,
    level: T,
    delta_max: T,
) -> Result<ImageStar<T>> {
    check_fraction(level, "interpolation level")?;
    if delta_max < T::zero() {
        return Err(Error::Parse(format!(
            "interpolation delta_max must be nonnegative, got {delta_max}"
        )));
    }
    if adversarial.dim() != base.dim() {
        return Err(Error::Shape(format!(
            "adversarial image shape {:?} differs from base {:?}",
            adversarial.dim(),
            base.dim()
        )));
    }
    let diff = adversarial - base;
    let anchor = base + &diff.mapv(|v| v * level);
    let predicate = Arc::new(Predicate::from_box(&[T::zero()], &[delta_max])?);
    ImageStar::from_parts(anchor, &[diff], predicate)
}

/// Brightening toward white for images scaled to [0, 1]: pixels with
/// `value >= 1 - delta` range over `[value, 1]`; all others stay fixed.
pub fn zonotope_brightening_set<T: Scalar>(image: &Array3<T>, delta: T) -> Result<ImageStar<T>> {
    check_fraction(delta, "zonotope brightening delta")?;
    let limit = T::one() - delta;
    let attacked: Vec<(usize, usize, usize)> = image
        .indexed_iter()
        .filter(|(_, &v)| v >= limit)
        .map(|((i, j, k), _)| (i, j, k))
        .collect();
    let mut generators = Vec::with_capacity(attacked.len());
    let mut lows = Vec::with_capacity(attacked.len());
    let mut highs = Vec::with_capacity(attacked.len());
    for &(i, j, k) in &attacked {
        let mut gen = Array3::zeros(image.dim());
        gen[[i, j, k]] = T::one() - image[[i, j, k]];
        generators.push(gen);
        lows.push(T::zero());
        highs.push(T::one());
    }
    let predicate = Arc::new(Predicate::from_box(&lows, &highs)?);
    ImageStar::from_parts(image.clone(), &generators, predicate)
}

/// Decide robustness of `net` on `input_set` for `target` with default
/// options.
pub fn verify_robustness<T: Scalar>(
    net: &Network<T>,
    input_set: &ImageStar<T>,
    target: usize,
    scheme: Scheme,
) -> Result<RobustnessResult<T>> {
    let reach = net.reach_with_budget(input_set, scheme, VerifyOptions::default().budget)?;
    verify_reached(
        net,
        input_set,
        target,
        scheme,
        &reach,
        &VerifyOptions::default(),
    )
}

pub fn verify_robustness_with<T: Scalar>(
    net: &Network<T>,
    input_set: &ImageStar<T>,
    target: usize,
    scheme: Scheme,
    options: &VerifyOptions,
) -> Result<RobustnessResult<T>> {
    let reach = net.reach_with_budget(input_set, scheme, options.budget)?;
    verify_reached(net, input_set, target, scheme, &reach, options)
}

/// Robustness check over an existing reachability result: for every output
/// star and every label `j != target`, test feasibility of the half-space
/// `y_j >= y_target` (weak, so ties are screened) inside the star.
///
/// Approximate scheme: any feasible screen is inconclusive (`Unknown`).
/// Exact scheme: a feasible screen refutes only once a concrete
/// misclassifying member is extracted and re-validated, so `NotRobust`
/// always ships counterexamples. A screen whose region is a pure tie slice
/// (possible only for labels above the target index, where the
/// lowest-index argmax still resolves to the target) does not refute.
pub fn verify_reached<T: Scalar>(
    net: &Network<T>,
    input_set: &ImageStar<T>,
    target: usize,
    scheme: Scheme,
    reach: &ReachResult<T>,
    options: &VerifyOptions,
) -> Result<RobustnessResult<T>> {
    let n_labels = net.num_outputs();
    if n_labels < 2 {
        return Err(Error::Shape(format!(
            "classification needs at least 2 outputs, network has {n_labels}"
        )));
    }
    if target >= n_labels {
        return Err(Error::DimensionMismatch {
            context: "target label vs network outputs",
            expected: n_labels,
            found: target,
        });
    }
    for output_set in &reach.output_sets {
        let logit_star = output_set.to_star();
        for j in (0..n_labels).filter(|&j| j != target) {
            // y_target - y_j <= 0
            let mut h = Array2::zeros((1, n_labels));
            h[[0, target]] = T::one();
            h[[0, j]] = -T::one();
            let violated = logit_star.intersect_halfspace(h.view(), Array1::zeros(1).view())?;
            if violated.is_empty() {
                continue;
            }
            match scheme {
                Scheme::Exact => {
                    let extracted = extract_counterexamples(
                        net,
                        input_set,
                        &violated,
                        target,
                        j,
                        options.num_counterexamples,
                        options.seed,
                    )?;
                    if extracted.examples.is_empty() {
                        // Tie slice: no member misclassifies concretely.
                        continue;
                    }
                    return Ok(RobustnessResult {
                        verdict: Verdict::NotRobust,
                        counterexamples: extracted.examples,
                        violating_label: Some(j),
                        stats: reach.stats.clone(),
                    });
                }
                Scheme::Approx => {
                    return Ok(RobustnessResult {
                        verdict: Verdict::Unknown,
                        counterexamples: Vec::new(),
                        violating_label: Some(j),
                        stats: reach.stats.clone(),
                    })
                }
            }
        }
    }
    Ok(RobustnessResult {
        verdict: Verdict::Robust,
        counterexamples: Vec::new(),
        violating_label: None,
        stats: reach.stats.clone(),
    })
}

/// Counterexamples found for a violating intersection, plus the number of
/// candidates discarded by re-evaluation.
#[derive(Debug, Clone)]
pub struct CounterexampleSet<T> {
    pub examples: Vec<Counterexample<T>>,
    pub discarded: usize,
}

/// Map feasible points of a violating logit star back to concrete input
/// images and validate each by concrete evaluation.
///
/// The witnesses live in the same predicate-variable space as the input set
/// (exact-scheme layers only constrain it, never extend it), so each alpha
/// maps through the input ImageStar. The first candidate comes from the LP
/// maximizing the violation `y_j - y_target`; the rest are random feasible
/// samples. Candidates whose concrete argmax still equals the target are
/// discarded and counted.
pub fn extract_counterexamples<T: Scalar>(
    net: &Network<T>,
    input_set: &ImageStar<T>,
    violating_star: &Star<T>,
    target: usize,
    violating_label: usize,
    count: usize,
    seed: u64,
) -> Result<CounterexampleSet<T>> {
    let predicate = violating_star.predicate();
    if predicate.num_vars() != input_set.num_generators() {
        return Err(Error::WitnessMappingFailed {
            expected: input_set.num_generators(),
            found: predicate.num_vars(),
        });
    }
    let mut alphas: Vec<Array1<T>> = Vec::new();
    let objective =
        &violating_star.basis().row(violating_label) - &violating_star.basis().row(target);
    match predicate.maximize(objective.view())? {
        LpOutcome::Optimal { witness, .. } => alphas.push(witness),
        LpOutcome::Unbounded => {
            if let Some(w) = predicate.feasible_point() {
                alphas.push(w.clone());
            }
        }
        LpOutcome::Infeasible => {
            return Ok(CounterexampleSet {
                examples: Vec::new(),
                discarded: 0,
            })
        }
    }
    if count > 1 {
        alphas.extend(predicate.sample(2 * (count - 1), seed)?);
    }

    let mut examples = Vec::new();
    let mut discarded = 0;
    for alpha in alphas {
        if examples.len() >= count {
            break;
        }
        let image = input_set.image_at(alpha.view());
        let predicted = argmax(&net.eval(&image)?);
        if predicted != target {
            examples.push(Counterexample { image, predicted });
        } else {
            discarded += 1;
        }
    }
    Ok(CounterexampleSet {
        examples,
        discarded,
    })
}

/// Random-simulation falsification: sample concrete members of the input
/// set and return the first misclassified one. Finding nothing proves
/// nothing. Deterministic given the seed.
pub fn falsify<T: Scalar>(
    net: &Network<T>,
    input_set: &ImageStar<T>,
    target: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Option<Counterexample<T>>> {
    for image in input_set.sample(n_samples, seed)? {
        let predicted = argmax(&net.eval(&image)?);
        if predicted != target {
            return Ok(Some(Counterexample { image, predicted }));
        }
    }
    Ok(None)
}
