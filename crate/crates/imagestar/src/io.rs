//! On-disk formats: network JSON, image CSV, verification reports and
//! range tables.
//!
//! Formats are the external contract (see `docs/formats.md`):
//! - networks: a JSON document with `input_shape`, `labels` and a `layers`
//!   array tagged by `type`;
//! - images: CSV with a `h,w,nc` header row followed by the pixel values in
//!   canonical flattening order;
//! - reports: JSON (schema in `docs/report.schema.json`);
//! - ranges: CSV `label,lo,hi` rows.
//!
//! All file writes go through a write-temp-then-rename so readers never see
//! a partial file.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{AvgPoolLayer, BatchNormLayer, Conv2dLayer, FcLayer, Layer, MaxPoolLayer};
use crate::network::Network;
use crate::Scalar;

fn default_stride() -> [usize; 2] {
    [1, 1]
}

fn default_dilation() -> [usize; 2] {
    [1, 1]
}

#[derive(Debug, Serialize, Deserialize)]
struct NetworkDto {
    input_shape: [usize; 3],
    labels: Vec<String>,
    layers: Vec<LayerDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum LayerDto {
    Conv2d {
        /// Nested `[h_f][w_f][nc][nf]`.
        weights: Vec<Vec<Vec<Vec<f64>>>>,
        bias: Vec<f64>,
        #[serde(default)]
        padding: [usize; 4],
        #[serde(default = "default_stride")]
        stride: [usize; 2],
        #[serde(default = "default_dilation")]
        dilation: [usize; 2],
    },
    Avgpool {
        pool_size: [usize; 2],
        #[serde(default)]
        padding: [usize; 4],
        #[serde(default = "default_stride")]
        stride: [usize; 2],
    },
    Fc {
        /// Nested `[n_out][n_in]`.
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
    Batchnorm {
        mean: Vec<f64>,
        variance: Vec<f64>,
        epsilon: f64,
        gamma: Vec<f64>,
        beta: Vec<f64>,
    },
    Maxpool {
        pool_size: [usize; 2],
        #[serde(default)]
        padding: [usize; 4],
        #[serde(default = "default_stride")]
        stride: [usize; 2],
    },
    Relu,
}

fn convert_scalar<T: Scalar>(v: f64, what: &'static str) -> Result<T> {
    if !v.is_finite() {
        return Err(Error::NonFinite(what));
    }
    T::from_f64(v).ok_or(Error::NonFinite(what))
}

fn convert_vec<T: Scalar>(v: &[f64], what: &'static str) -> Result<Array1<T>> {
    v.iter()
        .map(|&x| convert_scalar(x, what))
        .collect::<Result<Vec<T>>>()
        .map(Array1::from_vec)
}

fn layer_from_dto<T: Scalar>(dto: &LayerDto) -> Result<Layer<T>> {
    Ok(match dto {
        LayerDto::Conv2d {
            weights,
            bias,
            padding,
            stride,
            dilation,
        } => {
            let hf = weights.len();
            let wf = weights.first().map_or(0, Vec::len);
            let nc = weights.first().and_then(|r| r.first()).map_or(0, Vec::len);
            let nf = weights
                .first()
                .and_then(|r| r.first())
                .and_then(|c| c.first())
                .map_or(0, Vec::len);
            if hf == 0 || wf == 0 || nc == 0 || nf == 0 {
                return Err(Error::Parse("conv2d weights must be non-empty".into()));
            }
            let mut w = Array4::zeros((hf, wf, nc, nf));
            for (i, plane) in weights.iter().enumerate() {
                if plane.len() != wf {
                    return Err(Error::Parse("ragged conv2d weights".into()));
                }
                for (j, col) in plane.iter().enumerate() {
                    if col.len() != nc {
                        return Err(Error::Parse("ragged conv2d weights".into()));
                    }
                    for (c, filters) in col.iter().enumerate() {
                        if filters.len() != nf {
                            return Err(Error::Parse("ragged conv2d weights".into()));
                        }
                        for (f, &v) in filters.iter().enumerate() {
                            w[[i, j, c, f]] = convert_scalar(v, "conv2d weights")?;
                        }
                    }
                }
            }
            Layer::Conv2d(Conv2dLayer::new(
                w,
                convert_vec(bias, "conv2d bias")?,
                *padding,
                (stride[0], stride[1]),
                (dilation[0], dilation[1]),
            )?)
        }
        LayerDto::Avgpool {
            pool_size,
            padding,
            stride,
        } => Layer::AvgPool(AvgPoolLayer::new(
            (pool_size[0], pool_size[1]),
            *padding,
            (stride[0], stride[1]),
        )?),
        LayerDto::Fc { weights, bias } => {
            let rows = weights.len();
            let cols = weights.first().map_or(0, Vec::len);
            if rows == 0 || cols == 0 {
                return Err(Error::Parse("fc weights must be non-empty".into()));
            }
            let mut w = Array2::zeros((rows, cols));
            for (i, row) in weights.iter().enumerate() {
                if row.len() != cols {
                    return Err(Error::Parse("ragged fc weights".into()));
                }
                for (j, &v) in row.iter().enumerate() {
                    w[[i, j]] = convert_scalar(v, "fc weights")?;
                }
            }
            Layer::Fc(FcLayer::new(w, convert_vec(bias, "fc bias")?)?)
        }
        LayerDto::Batchnorm {
            mean,
            variance,
            epsilon,
            gamma,
            beta,
        } => Layer::BatchNorm(BatchNormLayer::new(
            convert_vec(mean, "batchnorm mean")?,
            convert_vec(variance, "batchnorm variance")?,
            convert_scalar(*epsilon, "batchnorm epsilon")?,
            convert_vec(gamma, "batchnorm gamma")?,
            convert_vec(beta, "batchnorm beta")?,
        )?),
        LayerDto::Maxpool {
            pool_size,
            padding,
            stride,
        } => Layer::MaxPool(MaxPoolLayer::new(
            (pool_size[0], pool_size[1]),
            *padding,
            (stride[0], stride[1]),
        )?),
        LayerDto::Relu => Layer::Relu,
    })
}

fn to_f64<T: Scalar>(v: T) -> f64 {
    v.to_f64().expect("scalar converts to f64")
}

fn layer_to_dto<T: Scalar>(layer: &Layer<T>) -> LayerDto {
    match layer {
        Layer::Conv2d(l) => {
            let (hf, wf, nc, nf) = l.weights().dim();
            let weights = (0..hf)
                .map(|i| {
                    (0..wf)
                        .map(|j| {
                            (0..nc)
                                .map(|c| {
                                    (0..nf).map(|f| to_f64(l.weights()[[i, j, c, f]])).collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            LayerDto::Conv2d {
                weights,
                bias: l.bias().iter().map(|&v| to_f64(v)).collect(),
                padding: l.padding(),
                stride: [l.stride().0, l.stride().1],
                dilation: [l.dilation().0, l.dilation().1],
            }
        }
        Layer::AvgPool(l) => LayerDto::Avgpool {
            pool_size: [l.pool().0, l.pool().1],
            padding: l.padding(),
            stride: [l.stride().0, l.stride().1],
        },
        Layer::Fc(l) => LayerDto::Fc {
            weights: l
                .weights()
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|&v| to_f64(v)).collect())
                .collect(),
            bias: l.bias().iter().map(|&v| to_f64(v)).collect(),
        },
        Layer::BatchNorm(l) => LayerDto::Batchnorm {
            mean: l.mean().iter().map(|&v| to_f64(v)).collect(),
            variance: l.variance().iter().map(|&v| to_f64(v)).collect(),
            epsilon: to_f64(l.epsilon()),
            gamma: l.gamma().iter().map(|&v| to_f64(v)).collect(),
            beta: l.beta().iter().map(|&v| to_f64(v)).collect(),
        },
        Layer::MaxPool(l) => LayerDto::Maxpool {
            pool_size: [l.pool().0, l.pool().1],
            padding: l.padding(),
            stride: [l.stride().0, l.stride().1],
        },
        Layer::Relu => LayerDto::Relu,
    }
}

/// Load a network from its JSON description.
pub fn load_network<T: Scalar>(path: impl AsRef<Path>) -> Result<Network<T>> {
    let text = fs::read_to_string(path.as_ref())?;
    let dto: NetworkDto = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
    let layers = dto
        .layers
        .iter()
        .enumerate()
        .map(|(i, l)| layer_from_dto(l).map_err(|e| Error::Parse(format!("layer {i}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Network::new(
        layers,
        (dto.input_shape[0], dto.input_shape[1], dto.input_shape[2]),
        dto.labels,
    )
}

/// Save a network as JSON (floats in shortest round-trip form).
pub fn save_network<T: Scalar>(net: &Network<T>, path: impl AsRef<Path>) -> Result<()> {
    let (h, w, nc) = net.input_shape();
    let dto = NetworkDto {
        input_shape: [h, w, nc],
        labels: net.labels().to_vec(),
        layers: net.layers().iter().map(layer_to_dto).collect(),
    };
    let text = serde_json::to_string_pretty(&dto).expect("network DTO serializes");
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Load an image CSV: header `h,w,nc`, then `h*w*nc` values in canonical
/// order (any grouping into lines).
pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<Array3<T>> {
    let text = fs::read_to_string(path.as_ref())?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty image file".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("image header {header:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(Error::Parse(format!(
            "image header must be h,w,nc; got {header:?}"
        )));
    }
    let (h, w, nc) = (dims[0], dims[1], dims[2]);
    let mut values = Vec::with_capacity(h * w * nc);
    for (line_no, line) in lines.enumerate() {
        for token in line.split(',') {
            let token = token.trim();
            if token.is_empty() {
                continue;
            }
            let v = token
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("image line {}: {token:?}: {e}", line_no + 2)))?;
            values.push(convert_scalar::<T>(v, "image pixel")?);
        }
    }
    if values.len() != h * w * nc {
        return Err(Error::Parse(format!(
            "image has {} values, header {h},{w},{nc} needs {}",
            values.len(),
            h * w * nc
        )));
    }
    Array3::from_shape_vec((h, w, nc), values).map_err(|e| Error::Parse(e.to_string()))
}

/// Save an image CSV (one value per line after the header).
pub fn save_image<T: Scalar>(image: &Array3<T>, path: impl AsRef<Path>) -> Result<()> {
    let (h, w, nc) = image.dim();
    let mut text = format!("{h},{w},{nc}\n");
    for v in image.iter() {
        text.push_str(&format!("{v}\n"));
    }
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Attack parameters as serialized into reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackParams {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRange {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleRef {
    pub path: String,
    pub predicted_label: String,
}

/// Machine-readable verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub verdict: String,
    pub scheme: String,
    pub target_label: String,
    pub attack: AttackParams,
    pub stars_per_layer: Vec<usize>,
    pub lp_calls: u64,
    pub elapsed_seconds: f64,
    pub output_ranges: Vec<LabelRange>,
    pub counterexamples: Vec<CounterexampleRef>,
}

pub fn save_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("report serializes");
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<Report> {
    let text = fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

/// Write per-label output ranges as CSV rows `label,lo,hi`.
pub fn save_ranges(ranges: &[LabelRange], path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::from("label,lo,hi\n");
    for r in ranges {
        text.push_str(&format!("{},{},{}\n", r.label, r.lo, r.hi));
    }
    write_atomic(path.as_ref(), text.as_bytes())
}

/// Summary emitted by reachability-only runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReachSummary {
    pub scheme: String,
    pub num_output_sets: usize,
    pub stars_per_layer: Vec<usize>,
    pub lp_calls: u64,
    pub elapsed_seconds: f64,
    pub output_ranges: Vec<LabelRange>,
}

pub fn save_reach_summary(summary: &ReachSummary, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    write_atomic(path.as_ref(), text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Parse(format!("not a file path: {}", path.display())))?;
    let mut tmp: PathBuf = dir.map(Path::to_path_buf).unwrap_or_default();
    tmp.push(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
