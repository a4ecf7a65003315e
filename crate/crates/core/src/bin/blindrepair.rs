use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use blindrepair::pipeline::config::{CostWeightsMode, Lambda, Method, RunConfig};
use blindrepair::pipeline::ingest::{read_point_values, read_table};
use blindrepair::pipeline::output::write_projected;
use blindrepair::pipeline::{
    emit_outputs, generate_synthetic, ingest_csv, run_repair, run_trials, select_adjusted_features,
    standard_variants, summarize, DataKind, RunInputs, SyntheticSpec, Variant,
};
use blindrepair::{make_simplex, DykstraSchedule, EarlyExit, Error, RepairVector, Result};

#[derive(Parser)]
#[command(
    name = "blindrepair",
    version,
    about = "Group-blind distributional repair"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the band-constrained repair coupling and project the data.
    Repair(RunArgs),
    /// Unconstrained entropic transport to the target.
    Baseline(RunArgs),
    /// Group-aware barycentre baseline.
    Barycentre(RunArgs),
    /// Metrics of the data as given.
    Metrics(RunArgs),
    /// Write a synthetic two-group sample as CSV.
    Synth(SynthArgs),
    /// Group-wise TV distance of candidate columns.
    Tvtable(TvArgs),
}

#[derive(Args, Default)]
struct ConfigArgs {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Scalar or comma-separated per-point values.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    varepsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    adjusted_columns: Option<Vec<String>>,
    #[arg(long)]
    group_column: Option<String>,
    /// Raw values read as s0 and s1, e.g. `Black,White`.
    #[arg(long, value_delimiter = ',')]
    group_values: Option<Vec<String>>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, value_delimiter = ',')]
    positive_labels: Option<Vec<String>>,
    #[arg(long)]
    score_column: Option<String>,
    #[arg(long)]
    weight_column: Option<String>,
    /// unit, reciprocal-range or explicit.
    #[arg(long)]
    cost_weights: Option<CostWeightsMode>,
    #[arg(long, value_delimiter = ',')]
    explicit_weights: Option<Vec<f64>>,
    #[arg(long)]
    tv_threshold: Option<f64>,
    #[arg(long)]
    classifier_threshold: Option<f64>,
    /// `column=decimals`, repeatable.
    #[arg(long, value_parser = parse_rounding)]
    rounding: Vec<(String, i32)>,
    /// cyclic or verbatim.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<DykstraSchedule>,
    /// converged or every-step.
    #[arg(long, value_parser = parse_early_exit)]
    early_exit: Option<EarlyExit>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    train_frac: Option<f64>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Tabular CSV input.
    #[arg(
        long,
        conflicts_with = "synthetic",
        required_unless_present = "synthetic"
    )]
    input: Option<PathBuf>,
    /// Use the synthetic two-Gaussian sample instead of a file.
    #[arg(long)]
    synthetic: bool,
    /// Sample size of the synthetic data.
    #[arg(long, requires = "synthetic")]
    samples: Option<usize>,
    /// CSV with columns `point,v`; replaces the V computed from the group column.
    #[arg(long)]
    v_file: Option<PathBuf>,
    /// CSV with columns `point,q`; defaults to the pooled distribution.
    #[arg(long)]
    target_file: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    samples: Option<usize>,
    /// JSON overrides of the generator settings.
    #[arg(long)]
    settings: Option<PathBuf>,
    /// Destination CSV for the sample.
    #[arg(long)]
    out: PathBuf,
    /// Also write the discretised target as `point,q`.
    #[arg(long)]
    target_out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct TvArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    input: PathBuf,
    /// Columns to score; defaults to the adjusted columns.
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<String>>,
}

fn parse_rounding(s: &str) -> std::result::Result<(String, i32), String> {
    let (c, d) = s
        .split_once('=')
        .ok_or_else(|| format!("expected column=decimals, got {s:?}"))?;
    let d = d.trim().parse().map_err(|e| format!("{d:?}: {e}"))?;
    Ok((c.trim().to_string(), d))
}

fn parse_schedule(s: &str) -> std::result::Result<DykstraSchedule, String> {
    match s {
        "cyclic" => Ok(DykstraSchedule::Cyclic),
        "verbatim" => Ok(DykstraSchedule::Verbatim),
        _ => Err(format!("unknown schedule {s:?}")),
    }
}

fn parse_early_exit(s: &str) -> std::result::Result<EarlyExit, String> {
    match s {
        "converged" => Ok(EarlyExit::Converged),
        "every-step" => Ok(EarlyExit::EveryStep),
        _ => Err(format!("unknown early exit {s:?}")),
    }
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    c.$f = v.clone();
                }
            )*};
        }
        set!(epsilon, adjusted_columns, positive_labels, explicit_weights);
        set!(tv_threshold, classifier_threshold, seed, trials, train_frac);
        set!(schedule, early_exit);
        if let Some(l) = &self.lambda {
            c.lambda = Lambda::parse(l)?;
        }
        if self.iterations.is_some() {
            c.iterations = self.iterations;
        }
        if self.varepsilon.is_some() {
            c.varepsilon = self.varepsilon;
        }
        if self.cost_weights.is_some() {
            c.cost_weights = self.cost_weights;
        }
        for (field, value) in [
            (&mut c.group_column, &self.group_column),
            (&mut c.label_column, &self.label_column),
            (&mut c.score_column, &self.score_column),
            (&mut c.weight_column, &self.weight_column),
        ] {
            if value.is_some() {
                *field = value.clone();
            }
        }
        if let Some(g) = &self.group_values {
            let [a, b] = g.as_slice() else {
                return Err(Error::Config(format!(
                    "--group-values takes exactly two values, got {}",
                    g.len()
                )));
            };
            c.group_values = [a.clone(), b.clone()];
        }
        let extra: BTreeMap<String, i32> = self.rounding.iter().cloned().collect();
        c.rounding.extend(extra);
        c.validate()?;
        Ok(c)
    }
}

fn run(args: &RunArgs, method: Method) -> Result<()> {
    let mut config = args.config.resolve()?;
    let (data, kind, target) = if args.synthetic {
        let spec = SyntheticSpec {
            seed: config.seed,
            samples: args.samples.unwrap_or(SyntheticSpec::default().samples),
            ..SyntheticSpec::default()
        };
        config.adjusted_columns = vec!["x".into()];
        let target = spec.target_distribution()?;
        (
            generate_synthetic(&spec)?,
            DataKind::Synthetic,
            Some(target),
        )
    } else {
        config.validate_tabular()?;
        let path = args.input.as_ref().expect("clap requires input");
        (ingest_csv(path, &config)?, DataKind::Tabular, None)
    };
    let support = data.support().clone();
    let target = match &args.target_file {
        Some(p) => Some(make_simplex(
            read_point_values(p, &support, "q")?,
            support.clone(),
        )?),
        None => target,
    };
    let v = match &args.v_file {
        Some(p) => Some(RepairVector::new(
            read_point_values(p, &support, "v")?,
            support.clone(),
        )?),
        None => None,
    };
    let inputs = RunInputs {
        target: target.as_ref(),
        v: v.as_ref(),
        ..RunInputs::new(kind)
    };

    if config.trials > 0 {
        let variants = match method {
            // the barycentre needs an evenly spaced grid
            Method::None => standard_variants()
                .into_iter()
                .filter(|v| v.method != Method::Barycentre || support.uniform_spacing().is_some())
                .collect(),
            m => vec![Variant {
                label: m.name().to_string(),
                method: m,
                lambda: Some(config.lambda.clone()),
            }],
        };
        let results = run_trials(&data, inputs, &config, &variants, config.trials)?;
        std::fs::create_dir_all(&args.out_dir).map_err(|e| io_err(&args.out_dir, e))?;
        let path = args.out_dir.join("trials.json");
        let text = serde_json::to_string_pretty(&summarize(&results))? + "\n";
        std::fs::write(&path, &text).map_err(|e| io_err(&path, e))?;
        print!("{text}");
        return Ok(());
    }

    let out = run_repair(&data, inputs, &config, method)?;
    for p in emit_outputs(&out, &args.out_dir, &config.adjusted_columns)? {
        eprintln!("wrote {}", p.display());
    }
    if let Some(r) = &out.report {
        println!("{}", serde_json::to_string_pretty(r)?);
    }
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn synth(args: &SynthArgs) -> Result<()> {
    let mut spec = match &args.settings {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str(&text)?
        }
        None => SyntheticSpec::default(),
    };
    spec.seed = args.seed;
    if let Some(m) = args.samples {
        spec.samples = m;
    }
    let data = generate_synthetic(&spec)?;
    write_projected(&args.out, &data, &["x".to_string()])?;
    if let Some(t) = &args.target_out {
        let q = spec.target_distribution()?;
        let mut w = csv::Writer::from_path(t).map_err(Error::from)?;
        w.write_record(["point", "q"])?;
        for (p, v) in q.support().points().iter().zip(q.values()) {
            w.write_record([p.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| io_err(t, e))?;
    }
    Ok(())
}

fn tvtable(args: &TvArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let candidates = args
        .candidates
        .clone()
        .unwrap_or_else(|| config.adjusted_columns.clone());
    if candidates.is_empty() {
        return Err(Error::Config("no candidate columns given".into()));
    }
    let mut table = read_table(&args.input)?;
    blindrepair::pipeline::ingest::round_columns(&mut table, &config)?;
    let (selected, rows) =
        select_adjusted_features(&table, &config, &candidates, config.tv_threshold)?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["feature", "tv", "selected"])?;
    for r in &rows {
        w.write_record([
            r.feature.clone(),
            format!("{:.4}", r.tv),
            r.selected.to_string(),
        ])?;
    }
    w.flush().map_err(|e| io_err(Path::new("<stdout>"), e))?;
    eprintln!("selected: {}", selected.join(","));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Repair(a) => run(a, Method::Dykstra),
        Command::Baseline(a) => run(a, Method::Baseline),
        Command::Barycentre(a) => run(a, Method::Barycentre),
        Command::Metrics(a) => run(a, Method::None),
        Command::Synth(a) => synth(a),
        Command::Tvtable(a) => tvtable(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
