use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use router_core::dicom;
use router_core::metrics::{
    bootstrap_ci, emit_report, latency_benchmark, macro_f1, macro_precision, macro_recall,
    read_predictions_csv, split_counts, stratified_split, write_predictions_csv, ModelResult,
    PredictionRecord, SplitSpec, DEFAULT_ITERATIONS, DEFAULT_LEVEL, DEFAULT_WARMUP,
};
use router_core::nn::{
    load_weights, make_synthetic_dataset, predict, save_weights, train_with_progress, Backend,
    BodyPartClass, RouterNetBackend, TrainConfig,
};
use router_core::pixel::{export_png, preprocess_to, MODEL_INPUT_SIZE};
use router_service::samples::image_to_dicom;
use router_service::{api, RouteConfig, Router, Watcher};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(
    name = "dicom-router",
    version,
    about = "Body-part router for DICOM radiographs"
)]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the data elements of a DICOM file.
    Dump { file: PathBuf },
    /// Write the preprocessed model input of a DICOM file as PNG.
    Render {
        file: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = MODEL_INPUT_SIZE)]
        size: usize,
    },
    /// Write synthetic pattern images as DICOM files under OUT/<class>/.
    MakeSynth {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 64)]
        size: usize,
    },
    /// Train the classifier on the synthetic pattern set.
    Train {
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        per_class: usize,
        #[arg(long, default_value_t = 50)]
        val_per_class: usize,
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        #[arg(long, default_value_t = 32)]
        batch_size: usize,
    },
    /// Classify DICOM files under DIR/<class>/ and write a predictions CSV.
    Predict {
        dir: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 32)]
        input_size: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Per-class train/validation/test sizes for the given class sizes.
    Split {
        /// Comma-separated example counts, one per class in code order.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    /// Macro recall, precision and F1 with bootstrap intervals.
    Evaluate {
        predictions: PathBuf,
        #[arg(long, default_value = "RouterNet-μ")]
        model: String,
        #[arg(long, default_value_t = 0.0)]
        inference_time: f64,
        #[arg(long, default_value_t = 6053)]
        parameters: usize,
        #[arg(long, default_value_t = DEFAULT_ITERATIONS)]
        iterations: usize,
    },
    /// Mean per-image CPU latency of the classifier.
    Bench {
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 32)]
        input_size: usize,
        #[arg(long, default_value_t = 50)]
        images: usize,
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
    },
    /// Run the HTTP API and the inbox watcher.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Ingest files once and print their routing decisions.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Poll an inbox and ingest each completed file.
    Watch {
        #[arg(long)]
        config: PathBuf,
        /// Inbox to poll instead of the configured one.
        dir: Option<PathBuf>,
    },
}

fn load_backend(weights: &Path, input_size: usize) -> Result<Arc<dyn Backend>> {
    let bytes = fs::read(weights).map_err(|e| format!("{}: {e}", weights.display()))?;
    Ok(Arc::new(RouterNetBackend::new(
        load_weights(&bytes)?,
        input_size,
    )))
}

fn open_router(config: &Path) -> Result<Router> {
    let config = RouteConfig::load(config)?;
    let backend = match load_backend(&config.weights, config.input_size) {
        Ok(b) => Some(b),
        Err(e) => {
            tracing::warn!(error = %e, "classifier not loaded; ingest and classify will fail");
            None
        }
    };
    Ok(Router::open(config, backend)?)
}

/// DICOM files under `dir/<class name>/`, with their class.
fn labeled_files(dir: &Path) -> Result<Vec<(PathBuf, BodyPartClass)>> {
    let mut out = Vec::new();
    for class in BodyPartClass::ALL {
        let sub = dir.join(class.name());
        if !sub.is_dir() {
            continue;
        }
        let mut files: Vec<PathBuf> = fs::read_dir(&sub)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()?;
        files.retain(|p| p.extension().is_some_and(|x| x == "dcm"));
        files.sort();
        out.extend(files.into_iter().map(|p| (p, class)));
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dump { file } => {
            let parsed = dicom::parse_file(&fs::read(&file)?)?;
            print!("{}", dicom::dump(&parsed));
        }
        Command::Render { file, out, size } => {
            let img = preprocess_to(&fs::read(&file)?, size)?;
            fs::write(&out, export_png(&img))?;
        }
        Command::MakeSynth {
            out,
            per_class,
            size,
        } => {
            let data = make_synthetic_dataset(per_class, size, cli.seed);
            for (i, e) in data.iter().enumerate() {
                let dir = out.join(e.label.name());
                fs::create_dir_all(&dir)?;
                let uid = format!("2.25.{}.{i}", cli.seed);
                fs::write(
                    dir.join(format!("{i:05}.dcm")),
                    image_to_dicom(&e.image, &uid),
                )?;
            }
            println!("wrote {} files under {}", data.len(), out.display());
        }
        Command::Train {
            out,
            per_class,
            val_per_class,
            size,
            epochs,
            batch_size,
        } => {
            let train = make_synthetic_dataset(per_class, size, cli.seed);
            let val = make_synthetic_dataset(val_per_class, size, cli.seed.wrapping_add(1000));
            let cfg = TrainConfig {
                epochs,
                batch_size,
                seed: cli.seed,
                ..TrainConfig::default()
            };
            let start = Instant::now();
            let (params, history) = train_with_progress(&train, &val, &cfg, |epoch, loss, acc| {
                println!("epoch {:>3}  loss {loss:.4}  val_acc {acc:.4}", epoch + 1);
            })?;
            fs::write(&out, save_weights(&params))?;
            println!(
                "best epoch {} (val_acc {:.4}) in {:.1} s; weights written to {}",
                history.best_epoch + 1,
                history.val_accuracy[history.best_epoch],
                start.elapsed().as_secs_f64(),
                out.display()
            );
        }
        Command::Predict {
            dir,
            weights,
            input_size,
            out,
        } => {
            let backend = load_backend(&weights, input_size)?;
            let mut records = Vec::new();
            for (path, label) in labeled_files(&dir)? {
                let img = preprocess_to(&fs::read(&path)?, input_size)?;
                let p = predict(backend.as_ref(), &img)?;
                records.push(PredictionRecord::new(
                    path.display().to_string(),
                    label.code(),
                    p.class.code(),
                    p.probabilities,
                ));
            }
            write_predictions_csv(fs::File::create(&out)?, &records)?;
            println!("{} predictions written to {}", records.len(), out.display());
        }
        Command::Split { sizes } => {
            if sizes.len() != BodyPartClass::ALL.len() {
                return Err(format!("--sizes needs 5 counts, got {}", sizes.len()).into());
            }
            let labels: Vec<usize> = sizes
                .iter()
                .enumerate()
                .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
                .collect();
            let split = stratified_split(&labels, &SplitSpec::new(cli.seed))?;
            println!("{:<16} {:>8} {:>8} {:>8}", "class", "train", "val", "test");
            for (class, &n) in BodyPartClass::ALL.iter().zip(&sizes) {
                let (tr, va, te) = split_counts(n, SplitSpec::new(cli.seed).ratios);
                println!("{:<16} {tr:>8} {va:>8} {te:>8}", class.name());
            }
            println!(
                "{:<16} {:>8} {:>8} {:>8}",
                "total",
                split.train.len(),
                split.val.len(),
                split.test.len()
            );
        }
        Command::Evaluate {
            predictions,
            model,
            inference_time,
            parameters,
            iterations,
        } => {
            let records = read_predictions_csv(fs::File::open(&predictions)?)?;
            let preds: Vec<usize> = records.iter().map(|r| r.pred).collect();
            let labels: Vec<usize> = records.iter().map(|r| r.label).collect();
            let ci =
                |metric| bootstrap_ci(&preds, &labels, metric, iterations, DEFAULT_LEVEL, cli.seed);
            let result = ModelResult {
                model,
                recall: ci(macro_recall)?,
                precision: ci(macro_precision)?,
                f1: ci(macro_f1)?,
                inference_time_s: inference_time,
                parameters,
            };
            print!("{}", emit_report(&[result])?);
        }
        Command::Bench {
            weights,
            input_size,
            images,
            warmup,
        } => {
            let backend = load_backend(&weights, input_size)?;
            let data: Vec<_> =
                make_synthetic_dataset(images.div_ceil(5), MODEL_INPUT_SIZE, cli.seed)
                    .into_iter()
                    .take(images)
                    .map(|e| e.image)
                    .collect();
            let report = latency_benchmark(backend.as_ref(), &data, warmup)?;
            println!(
                "{}: mean {:.4} s/image over {} images after {} warmup calls",
                backend.name(),
                report.mean_s,
                report.samples.len(),
                report.warmup
            );
        }
        Command::Serve { config } => {
            let router = Arc::new(open_router(&config)?);
            let listen = router.config().listen.clone();
            let stop = Arc::new(AtomicBool::new(false));
            let watcher = {
                let (router, stop) = (router.clone(), stop.clone());
                let mut watcher = Watcher::new(&router.config().watch_dir)?;
                std::thread::spawn(move || watcher.run(&router, || stop.load(Ordering::SeqCst)))
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(&listen).await?;
                tracing::info!(%listen, "serving");
                axum::serve(listener, api::app(router))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
            })?;
            stop.store(true, Ordering::SeqCst);
            watcher.join().map_err(|_| "watcher thread panicked")??;
        }
        Command::Ingest { config, files } => {
            let router = open_router(&config)?;
            for file in files {
                let done = router.ingest(&fs::read(&file)?, None)?;
                println!("{}", serde_json::to_string(&done.decision)?);
            }
        }
        Command::Watch { config, dir } => {
            let router = open_router(&config)?;
            let dir = dir.unwrap_or_else(|| router.config().watch_dir.clone());
            let mut watcher = Watcher::new(&dir)?;
            tracing::info!(dir = %dir.display(), "watching");
            watcher.run(&router, || false)?;
        }
    }
    Ok(())
}

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
