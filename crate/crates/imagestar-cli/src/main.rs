//! Robustness verification CLI.
//!
//! Exit codes are part of the contract: 0 Robust, 1 NotRobust, 2 Unknown,
//! 3 error (including usage errors).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use imagestar::error::Error;
use imagestar::image_star::ImageStar;
use imagestar::io::{
    load_image, load_network, save_image, save_ranges, save_reach_summary, save_report,
    AttackParams, CounterexampleRef, LabelRange, ReachSummary, Report,
};
use imagestar::network::{output_ranges, Network, ReachResult, Scheme};
use imagestar::robustness::{
    falsify, verify_reached, AttackKind, AttackSpec, Counterexample, Verdict, VerifyOptions,
};

const EXIT_ROBUST: u8 = 0;
const EXIT_NOT_ROBUST: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "imagestar",
    about = "Set-based robustness verification for convolutional networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify classification robustness of a network under an attack.
    Verify(VerifyArgs),
    /// Compute reachable output sets without a robustness query.
    Reach(ReachArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Network description (JSON).
    #[arg(long)]
    network: PathBuf,
    /// Base image (CSV with h,w,nc header).
    #[arg(long)]
    image: PathBuf,
    /// Attack kind: brightening | interp | zono.
    #[arg(long)]
    attack: String,
    /// Brightening threshold (pixels at or above it are attacked).
    #[arg(long)]
    d: Option<f64>,
    /// Attack fraction: brightening pixel scale, or zono threshold width.
    #[arg(long)]
    delta: Option<f64>,
    /// Adversarial image for the interpolation attack.
    #[arg(long)]
    adv: Option<PathBuf>,
    /// Interpolation level in [0, 1].
    #[arg(long)]
    l: Option<f64>,
    /// Interpolation perturbation bound.
    #[arg(long)]
    delta_max: Option<f64>,
    /// Reachability scheme: exact | approx.
    #[arg(long, default_value = "exact")]
    scheme: String,
    /// Exact-scheme star budget.
    #[arg(long, default_value_t = imagestar::config::DEFAULT_STAR_BUDGET)]
    budget: usize,
    /// Report output path (JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-label output ranges (CSV).
    #[arg(long)]
    ranges: Option<PathBuf>,
    /// Seed for sampling and counterexample extraction.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Target label (name from the network file, or an index).
    #[arg(long)]
    target: String,
    /// Random simulations to try when the verdict is Unknown (0 disables).
    #[arg(long, default_value_t = 0)]
    falsify_samples: usize,
}

#[derive(Args)]
struct ReachArgs {
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Keep clap's help/version on stdout with success, everything
            // else is a usage error.
            use clap::error::ErrorKind;
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    return ExitCode::SUCCESS;
                }
                _ => {
                    eprint!("{e}");
                    return ExitCode::from(EXIT_ERROR);
                }
            }
        }
    };
    let code = match cli.command {
        Command::Verify(args) => run_verify(&args),
        Command::Reach(args) => run_reach(&args),
    };
    match code {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn parse_attack(
    common: &CommonArgs,
    base: &imagestar::ndarray::Array3<f64>,
) -> Result<AttackSpec<f64>, Error> {
    let kind = match common.attack.as_str() {
        "brightening" => {
            let threshold = common
                .d
                .ok_or_else(|| Error::Parse("brightening attack needs --d".into()))?;
            let delta = common
                .delta
                .ok_or_else(|| Error::Parse("brightening attack needs --delta".into()))?;
            AttackKind::Brightening { threshold, delta }
        }
        "interp" => {
            let adv_path = common
                .adv
                .as_ref()
                .ok_or_else(|| Error::Parse("interpolation attack needs --adv".into()))?;
            let level = common
                .l
                .ok_or_else(|| Error::Parse("interpolation attack needs --l".into()))?;
            let delta_max = common
                .delta_max
                .ok_or_else(|| Error::Parse("interpolation attack needs --delta-max".into()))?;
            AttackKind::Interpolation {
                adversarial: load_image(adv_path)?,
                level,
                delta_max,
            }
        }
        "zono" => {
            let delta = common
                .delta
                .ok_or_else(|| Error::Parse("zonotope attack needs --delta".into()))?;
            AttackKind::ZonotopeBrightening { delta }
        }
        other => {
            return Err(Error::Parse(format!(
                "unknown attack {other:?}; expected brightening, interp or zono"
            )))
        }
    };
    Ok(AttackSpec {
        kind,
        base: base.clone(),
    })
}

fn attack_params(spec: &AttackSpec<f64>, name: &str) -> AttackParams {
    match &spec.kind {
        AttackKind::Brightening { threshold, delta } => AttackParams {
            kind: name.into(),
            d: Some(*threshold),
            delta: Some(*delta),
            l: None,
            delta_max: None,
        },
        AttackKind::Interpolation {
            level, delta_max, ..
        } => AttackParams {
            kind: name.into(),
            d: None,
            delta: None,
            l: Some(*level),
            delta_max: Some(*delta_max),
        },
        AttackKind::ZonotopeBrightening { delta } => AttackParams {
            kind: name.into(),
            d: None,
            delta: Some(*delta),
            l: None,
            delta_max: None,
        },
    }
}

/// Build the attack input set; a brightening attack touching no pixel
/// degenerates to the singleton base image (with a notice on stderr).
fn build_input_set(spec: &AttackSpec<f64>) -> Result<ImageStar<f64>, Error> {
    match spec.build() {
        Ok(set) => Ok(set),
        Err(Error::NoAttackedPixels) => {
            eprintln!(
                "note: no pixel reaches the attack threshold; verifying the single base image"
            );
            ImageStar::singleton(spec.base.clone())
        }
        Err(e) => Err(e),
    }
}

fn label_ranges(net: &Network<f64>, sets: &[ImageStar<f64>]) -> Result<Vec<LabelRange>, Error> {
    let ranges = output_ranges(sets)?;
    Ok(ranges
        .iter()
        .enumerate()
        .map(|(i, &(lo, hi))| LabelRange {
            label: net.label_name(i),
            lo,
            hi,
        })
        .collect())
}

fn write_counterexamples(
    net: &Network<f64>,
    found: &[Counterexample<f64>],
    report_path: Option<&Path>,
) -> Result<Vec<CounterexampleRef>, Error> {
    let mut refs = Vec::new();
    let stem = report_path
        .map(|p| p.with_extension(""))
        .unwrap_or_else(|| PathBuf::from("counterexample"));
    for (i, ce) in found.iter().enumerate() {
        let path = PathBuf::from(format!("{}.cex{}.csv", stem.display(), i));
        save_image(&ce.image, &path)?;
        refs.push(CounterexampleRef {
            path: path.display().to_string(),
            predicted_label: net.label_name(ce.predicted),
        });
    }
    Ok(refs)
}

fn run_verify(args: &VerifyArgs) -> Result<u8, Error> {
    let started = Instant::now();
    let common = &args.common;
    let net: Network<f64> = load_network(&common.network)?;
    let base = load_image(&common.image)?;
    let target = net.label_index(&args.target)?;
    let scheme: Scheme = common.scheme.parse()?;
    let spec = parse_attack(common, &base)?;
    let input_set = build_input_set(&spec)?;

    let options = VerifyOptions {
        budget: common.budget,
        seed: common.seed,
        ..VerifyOptions::default()
    };
    let reach: ReachResult<f64> = net.reach_with_budget(&input_set, scheme, common.budget)?;
    let mut result = verify_reached(&net, &input_set, target, scheme, &reach, &options)?;

    if result.verdict == Verdict::Unknown && args.falsify_samples > 0 {
        if let Some(ce) = falsify(&net, &input_set, target, args.falsify_samples, common.seed)? {
            result.verdict = Verdict::NotRobust;
            result.violating_label = Some(ce.predicted);
            result.counterexamples = vec![ce];
        }
    }

    let cex_refs = write_counterexamples(&net, &result.counterexamples, common.out.as_deref())?;
    let ranges = label_ranges(&net, &reach.output_sets)?;
    if let Some(path) = &common.ranges {
        save_ranges(&ranges, path)?;
    }
    let report = Report {
        verdict: result.verdict.name().into(),
        scheme: scheme.name().into(),
        target_label: net.label_name(target),
        attack: attack_params(&spec, &common.attack),
        stars_per_layer: result.stats.stars_per_layer.clone(),
        lp_calls: result.stats.lp_calls,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        output_ranges: ranges,
        counterexamples: cex_refs,
    };
    if let Some(path) = &common.out {
        save_report(&report, path)?;
    }
    println!(
        "{} (scheme {}, {} stars, {} LPs)",
        result.verdict,
        scheme.name(),
        reach.output_sets.len(),
        result.stats.lp_calls
    );
    Ok(match result.verdict {
        Verdict::Robust => EXIT_ROBUST,
        Verdict::NotRobust => EXIT_NOT_ROBUST,
        Verdict::Unknown => EXIT_UNKNOWN,
    })
}

fn run_reach(args: &ReachArgs) -> Result<u8, Error> {
    let started = Instant::now();
    let common = &args.common;
    let net: Network<f64> = load_network(&common.network)?;
    let base = load_image(&common.image)?;
    let scheme: Scheme = common.scheme.parse()?;
    let spec = parse_attack(common, &base)?;
    let input_set = build_input_set(&spec)?;

    let reach = net.reach_with_budget(&input_set, scheme, common.budget)?;
    let ranges = label_ranges(&net, &reach.output_sets)?;
    if let Some(path) = &common.ranges {
        save_ranges(&ranges, path)?;
    }
    let summary = ReachSummary {
        scheme: scheme.name().into(),
        num_output_sets: reach.output_sets.len(),
        stars_per_layer: reach.stats.stars_per_layer.clone(),
        lp_calls: reach.stats.lp_calls,
        elapsed_seconds: started.elapsed().as_secs_f64(),
        output_ranges: ranges,
    };
    if let Some(path) = &common.out {
        save_reach_summary(&summary, path)?;
    }
    println!(
        "{} output sets (scheme {}, stars per layer {:?}, {} LPs)",
        summary.num_output_sets, summary.scheme, summary.stars_per_layer, summary.lp_calls
    );
    Ok(EXIT_ROBUST)
}
