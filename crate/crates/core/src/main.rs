use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbmclust::data::{self, LabelColumn, Scaling};
use sbmclust::harness::{
    emit_labels, emit_sweep, emit_table, run_benchmark, run_experiment, sweep_report, threshold_profile, DatasetSpec,
    ExperimentConfig, Method, SelectionConfig, TableFormat, ThresholdGrid,
};
use sbmclust::{Error, Result, SimilarityMetric};

#[derive(Parser)]
#[command(name = "sbmclust", version, about = "Cluster tabular data with stochastic block models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic data set as CSV
    Gen {
        #[command(flatten)]
        common: Common,
        /// Write to this file instead of stdout
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run one method with silhouette-driven model selection
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "wsbm")]
        method: String,
        /// Also write the chosen labels as `index,label` CSV
        #[arg(long)]
        labels_out: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Emit the full threshold x K grid of thresholded SBM fits
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run every dataset x method x metric combination
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma separated method ids
        #[arg(long, default_value = "kmeans,ward,sbm,wsbm,wsbm_known", value_delimiter = ',')]
        methods: Vec<String>,
        /// Comma separated graph metrics for the block models
        #[arg(long = "metrics", default_value = "manhattan", value_delimiter = ',')]
        metrics: Vec<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// `iris`, `two_moons`, `circles`, `ina` or a CSV path (comma separated for bench)
    #[arg(long, default_value = "iris", value_delimiter = ',')]
    dataset: Vec<String>,
    /// Label column of CSV inputs, by name or 0-based index
    #[arg(long)]
    label_column: Option<String>,
    /// Seed for fitting
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed for the synthetic generators
    #[arg(long, default_value_t = 1)]
    data_seed: u64,
    /// Point count for `gen`; defaults to the standard size of each data set
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian noise of the two moons and circles generators
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value = "none")]
    scaling: String,
    #[arg(long, default_value = "manhattan")]
    metric: String,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    t_min: f64,
    #[arg(long, default_value_t = 0.95)]
    t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    t_step: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 100)]
    max_sweeps: usize,
    #[arg(long, default_value = "csv")]
    format: String,
}

impl Common {
    fn label_column(&self) -> Option<LabelColumn> {
        self.label_column.as_deref().map(|s| s.parse().expect("infallible"))
    }

    fn dataset_specs(&self) -> Vec<DatasetSpec> {
        self.dataset.iter().map(|d| DatasetSpec::parse(d, self.noise, self.data_seed, self.label_column())).collect()
    }

    fn single_dataset(&self) -> Result<DatasetSpec> {
        match self.dataset_specs().as_slice() {
            [one] => Ok(one.clone()),
            _ => Err(Error::Config("exactly one --dataset expected".into())),
        }
    }

    fn selection(&self, method: Method, metric: SimilarityMetric) -> Result<SelectionConfig> {
        let k_range = match (self.k_min, self.k_max) {
            (None, None) => None,
            (lo, hi) => Some((lo.unwrap_or(2), hi.unwrap_or(sbmclust::harness::DEFAULT_K_MAX))),
        };
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        Ok(SelectionConfig {
            method,
            metric,
            k_range,
            thresholds: ThresholdGrid { lo: self.t_min, hi: self.t_max, step: self.t_step },
            alpha: self.alpha,
            restarts: self.restarts,
            max_sweeps: self.max_sweeps,
            seed: self.seed,
            ..SelectionConfig::default()
        })
    }

    fn scaling(&self) -> Result<Scaling> {
        self.scaling.parse()
    }

    fn format(&self) -> Result<TableFormat> {
        self.format.parse()
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| Error::Io { path: p.clone(), source }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { common, output } => {
            let ds = match common.dataset.first().map(String::as_str) {
                Some("two_moons") => data::gen_two_moons(common.n.unwrap_or(250), common.noise, common.data_seed)?,
                Some("circles") => data::gen_circles(common.n.unwrap_or(336), common.noise, common.data_seed)?,
                Some("ina") => data::gen_ina(common.n.unwrap_or(660), common.data_seed)?,
                Some("iris") => data::iris(),
                other => return Err(Error::Config(format!("cannot generate {other:?}"))),
            };
            let mut buf = Vec::new();
            ds.write_csv(&mut buf)?;
            write_output(output.as_ref(), &String::from_utf8_lossy(&buf))
        }
        Command::Run { common, method, labels_out, output } => {
            let method: Method = method.parse()?;
            // the baselines work in feature space, like in `bench`
            let metric = if method.uses_graph() { common.metric.parse()? } else { SimilarityMetric::Euclidean };
            let config = ExperimentConfig {
                dataset: common.single_dataset()?,
                scaling: common.scaling()?,
                selection: common.selection(method, metric)?,
            };
            let result = run_experiment(&config)?;
            eprintln!("{}: {:.2?}", result.method, result.wall_time);
            if let Some(path) = labels_out {
                write_output(Some(&path), &emit_labels(&result.labels))?;
            }
            write_output(output.as_ref(), &emit_table(&[result], common.format()?))
        }
        Command::Sweep { common, output } => {
            let ds = data::standardize(&common.single_dataset()?.load()?, common.scaling()?);
            let rows = sweep_report(&ds, &common.selection(Method::Sbm, common.metric.parse()?)?)?;
            let profile = threshold_profile(&rows);
            eprintln!(
                "silhouette peaks at t = {:?}, NMI peaks at t = {:?}",
                profile.silhouette_argmax, profile.nmi_argmax
            );
            write_output(output.as_ref(), &emit_sweep(&rows))
        }
        Command::Bench { common, methods, metrics, output } => {
            let methods: Vec<Method> = methods.iter().map(|m| m.parse()).collect::<Result<_>>()?;
            let metrics: Vec<SimilarityMetric> = metrics.iter().map(|m| m.parse()).collect::<Result<_>>()?;
            let scaling = common.scaling()?;
            let mut configs = Vec::new();
            for dataset in common.dataset_specs() {
                for &method in &methods {
                    // the baselines work in feature space; one row each
                    let graph_metrics: &[SimilarityMetric] =
                        if method.uses_graph() { &metrics } else { &[SimilarityMetric::Euclidean] };
                    for &metric in graph_metrics {
                        configs.push(ExperimentConfig {
                            dataset: dataset.clone(),
                            scaling,
                            selection: common.selection(method, metric)?,
                        });
                    }
                }
            }
            let results = run_benchmark(&configs);
            for r in &results {
                if let Some(e) = &r.error {
                    eprintln!("{} / {} / {}: {e}", r.dataset, r.method, r.metric);
                }
            }
            write_output(output.as_ref(), &emit_table(&results, common.format()?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
