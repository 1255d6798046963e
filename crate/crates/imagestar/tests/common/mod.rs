//! Shared helpers for integration tests: seeded random networks with small
//! quantized weights, alpha grids, and a vertex-enumeration LP oracle that is
//! independent of the simplex implementation.
//!
//! Each test binary compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, Array4};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use imagestar::image_star::ImageStar;
use imagestar::layers::{AvgPoolLayer, BatchNormLayer, Conv2dLayer, FcLayer, Layer, MaxPoolLayer};
use imagestar::lp::LinearConstraints;
use imagestar::network::Network;
use imagestar::star::Predicate;

/// A random draw quantized to multiples of 0.25 (keeps split geometry away
/// from pathological near-ties).
pub fn quantized(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let v: f64 = rng.random_range(lo..=hi);
    (v * 4.0).round() / 4.0
}

fn random_fc(rng: &mut ChaCha8Rng, n_out: usize, n_in: usize) -> FcLayer<f64> {
    let w = Array2::from_shape_fn((n_out, n_in), |_| quantized(rng, -1.0, 1.0));
    let b = Array1::from_iter((0..n_out).map(|_| quantized(rng, -1.0, 1.0)));
    FcLayer::new(w, b).unwrap()
}

fn random_conv(rng: &mut ChaCha8Rng, stride: usize) -> Conv2dLayer<f64> {
    let mut w = Array4::zeros((2, 2, 1, 1));
    for v in w.iter_mut() {
        *v = quantized(rng, -1.0, 1.0);
    }
    let b = Array1::from_iter([quantized(rng, -0.5, 0.5)]);
    Conv2dLayer::new(w, b, [0; 4], (stride, stride), (1, 1)).unwrap()
}

/// A random network of at most 3 layers over a small single-channel input,
/// ending in `n_logits` outputs, plus a random attack-style input set with
/// `n_alphas` predicate variables bounded by `[-1, 1]`.
pub fn random_instance(rng: &mut ChaCha8Rng, n_alphas: usize) -> (Network<f64>, ImageStar<f64>) {
    let arch = rng.random_range(0..5u32);
    let n_logits = rng.random_range(2..=3usize);
    let (shape, layers): ((usize, usize, usize), Vec<Layer<f64>>) = match arch {
        0 => {
            let shape = (2, 2, 1);
            let hidden = rng.random_range(2..=4usize);
            let l1 = random_fc(rng, hidden, 4);
            let l2 = random_fc(rng, n_logits, hidden);
            (shape, vec![Layer::Fc(l1), Layer::Relu, Layer::Fc(l2)])
        }
        1 => {
            let shape = (3, 3, 1);
            let conv = random_conv(rng, 1);
            let fc = random_fc(rng, n_logits, 4);
            (shape, vec![Layer::Conv2d(conv), Layer::Relu, Layer::Fc(fc)])
        }
        2 => {
            let shape = (4, 4, 1);
            let conv = random_conv(rng, 1);
            let pool = AvgPoolLayer::new((3, 3), [0; 4], (1, 1)).unwrap();
            let fc = random_fc(rng, n_logits, 1);
            (
                shape,
                vec![Layer::Conv2d(conv), Layer::AvgPool(pool), Layer::Fc(fc)],
            )
        }
        3 => {
            let shape = (4, 4, 1);
            let pool = MaxPoolLayer::new((2, 2), [0; 4], (2, 2)).unwrap();
            let fc = random_fc(rng, n_logits, 4);
            (shape, vec![Layer::MaxPool(pool), Layer::Fc(fc)])
        }
        _ => {
            let shape = (3, 3, 1);
            let conv = random_conv(rng, 1);
            let bn = BatchNormLayer::new(
                Array1::from_iter([quantized(rng, -0.5, 0.5)]),
                Array1::from_iter([rng.random_range(0.25..=1.0)]),
                1e-3,
                Array1::from_iter([quantized(rng, 0.25, 1.0).max(0.25)]),
                Array1::from_iter([quantized(rng, -0.5, 0.5)]),
            )
            .unwrap();
            let fc = random_fc(rng, n_logits, 4);
            (
                shape,
                vec![
                    Layer::Conv2d(conv),
                    Layer::BatchNorm(bn),
                    Layer::Relu,
                    Layer::Fc(fc),
                ],
            )
        }
    };
    let net = Network::new(layers, shape, vec![]).unwrap();

    let anchor = Array3::from_shape_fn(shape, |_| quantized(rng, 0.0, 1.0));
    let generators: Vec<Array3<f64>> = (0..n_alphas)
        .map(|_| {
            let mut g = Array3::zeros(shape);
            // A sparse direction: disturb one to three pixels.
            for _ in 0..rng.random_range(1..=3usize) {
                let i = rng.random_range(0..shape.0);
                let j = rng.random_range(0..shape.1);
                g[[i, j, 0]] = quantized(rng, -1.0, 1.0);
            }
            if g.iter().all(|v| *v == 0.0) {
                g[[0, 0, 0]] = 0.25;
            }
            g
        })
        .collect();
    let lows = vec![-1.0; n_alphas];
    let highs = vec![1.0; n_alphas];
    let predicate = Arc::new(Predicate::from_box(&lows, &highs).unwrap());
    let input = ImageStar::from_parts(anchor, &generators, predicate).unwrap();
    (net, input)
}

/// Regular grid over a box: `per_dim` points per dimension, endpoints
/// included, in row-major order.
pub fn alpha_grid(bounds: &[(f64, f64)], per_dim: usize) -> Vec<Array1<f64>> {
    if bounds.is_empty() {
        return vec![Array1::zeros(0)];
    }
    let mut grids: Vec<Array1<f64>> = Vec::new();
    let mut indices = vec![0usize; bounds.len()];
    loop {
        let point = Array1::from_iter(bounds.iter().zip(&indices).map(|(&(lo, hi), &t)| {
            if per_dim == 1 {
                lo
            } else {
                lo + (hi - lo) * (t as f64) / ((per_dim - 1) as f64)
            }
        }));
        grids.push(point);
        let mut d = bounds.len();
        loop {
            if d == 0 {
                return grids;
            }
            d -= 1;
            indices[d] += 1;
            if indices[d] < per_dim {
                break;
            }
            indices[d] = 0;
        }
    }
}

/// Brute-force LP oracle: enumerate candidate vertices of `C x <= d` by
/// solving every m-subset of rows and keeping the feasible solutions.
pub mod vertex_oracle {
    use super::LinearConstraints;

    #[allow(clippy::needless_range_loop)]
    fn solve_square(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let (best, mag) = (col..n)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
            if mag < 1e-10 {
                return None;
            }
            a.swap(col, best);
            b.swap(col, best);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    fn subsets(p: usize, m: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, p: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == m {
                out.push(cur.clone());
                return;
            }
            for i in start..p {
                cur.push(i);
                rec(i + 1, p, m, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, p, m, &mut Vec::new(), &mut out);
        out
    }

    pub fn vertices(cons: &LinearConstraints<f64>) -> Vec<Vec<f64>> {
        let m = cons.num_vars();
        let p = cons.num_constraints();
        let c = cons.matrix();
        let d = cons.rhs();
        let mut verts = Vec::new();
        for subset in subsets(p, m) {
            let mut a: Vec<Vec<f64>> = subset.iter().map(|&i| c.row(i).to_vec()).collect();
            let mut b: Vec<f64> = subset.iter().map(|&i| d[i]).collect();
            if let Some(x) = solve_square(&mut a, &mut b) {
                let feasible = (0..p).all(|i| {
                    let lhs: f64 = (0..m).map(|j| c[[i, j]] * x[j]).sum();
                    lhs <= d[i] + 1e-7
                });
                if feasible {
                    verts.push(x);
                }
            }
        }
        verts
    }

    /// Oracle min/max of `obj . x`; `None` when no vertex is feasible
    /// (empty polytope, given a bounded feasible construction).
    pub fn min_max(cons: &LinearConstraints<f64>, obj: &[f64]) -> Option<(f64, f64)> {
        let verts = vertices(cons);
        if verts.is_empty() {
            return None;
        }
        let vals: Vec<f64> = verts
            .iter()
            .map(|v| v.iter().zip(obj).map(|(a, b)| a * b).sum())
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }
}
