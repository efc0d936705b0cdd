mod config;

use std::borrow::Cow;
use std::cell::RefCell;
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use imbal_core::datasets::{load_manifest, Manifest};
use imbal_core::imaging::{load_image, save_image, ImageBuffer};
use imbal_core::loss::{read_logit_rows, write_loss_rows, ClassStats, Loss};
use imbal_core::metrics::{group_crops, read_predictions, write_predictions, MetricsReport, Prediction};
use imbal_core::policy::{
    execute_plan, read_plan_log, sample_plan, write_plan_log, PartnerScope, PartnerSource, PlanContext, PlanRecord,
};
use imbal_core::rng::{stream, POLICY};
use imbal_core::scalar::sigmoid;
use imbal_core::schedule::write_schedule_dump;
use imbal_core::trainer::{
    forward, make_synthetic, read_features, train, write_checkpoint, write_epoch_log, Dataset,
};

use crate::config::{keys_help, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "imbal", version, about = "Augment, train and evaluate on class-imbalanced data")]
struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, env = "IMBAL_CONFIG")]
    config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample and execute augmentation plans for every image in a manifest.
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Re-execute the plans in this log instead of sampling new ones.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Train the MLP and write the epoch log, checkpoint and held-out predictions.
    Train {
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a predictions file.
    Evaluate {
        /// Rows of `sample_id,true_class,score_0,...`.
        #[arg(long)]
        predictions: PathBuf,
        /// Cross-check ids and labels against this manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Rows per sample to average; defaults to `k_crops`.
        #[arg(long)]
        k_crops: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the per-epoch weighting exponent and learning rate.
    Schedule {
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the configured loss on a logits file.
    Loss {
        #[arg(long)]
        logits: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Problems with the input data rather than the invocation.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct DataError(String);

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// The error chain joined with `: `, skipping causes whose text a previous
/// message already includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<imbal_core::Error>() {
            return if core.is_numerical() {
                EXIT_NUMERICAL
            } else if matches!(core, imbal_core::Error::Parameter(_)) {
                EXIT_USAGE
            } else {
                EXIT_DATA
            };
        }
        if cause.is::<DataError>() || cause.is::<io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cmd = Cli::command().after_long_help(keys_help()).after_help(keys_help());
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        cfg.apply_override(kv)?;
    }
    match cli.command {
        Command::Augment { manifest, out, replay } => cmd_augment(&cfg, &manifest, &out, replay.as_deref()),
        Command::Train { out } => cmd_train(&cfg, &out),
        Command::Evaluate {
            predictions,
            manifest,
            k_crops,
            out,
        } => cmd_evaluate(&cfg, &predictions, manifest.as_deref(), k_crops, out.as_deref()),
        Command::Schedule { out } => cmd_schedule(&cfg, out.as_deref()),
        Command::Loss { logits, out } => cmd_loss(&cfg, &logits, out.as_deref()),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

/// Loads partner images from the manifest on first use.
struct ManifestImages<'a> {
    manifest: &'a Manifest,
    cache: RefCell<HashMap<usize, ImageBuffer>>,
}

impl ManifestImages<'_> {
    fn get(&self, index: usize) -> imbal_core::Result<ImageBuffer> {
        if let Some(img) = self.cache.borrow().get(&index) {
            return Ok(img.clone());
        }
        let entry = self
            .manifest
            .entries
            .get(index)
            .ok_or_else(|| imbal_core::Error::Parameter(format!("partner index {index} out of range")))?;
        let img = load_image(&self.manifest.resolve(entry))?;
        self.cache.borrow_mut().insert(index, img.clone());
        Ok(img)
    }
}

impl PartnerSource for ManifestImages<'_> {
    fn partner(&self, index: usize) -> imbal_core::Result<Cow<'_, ImageBuffer>> {
        self.get(index).map(Cow::Owned)
    }
}

fn output_name(index: usize, id: &str, ext: &str) -> String {
    let stem = Path::new(id).file_stem().and_then(|s| s.to_str()).unwrap_or("image");
    let clean: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:06}_{clean}.{ext}")
}

fn cmd_augment(cfg: &RunConfig, manifest_path: &Path, out: &Path, replay: Option<&Path>) -> Result<()> {
    let manifest = load_manifest(manifest_path)?;
    if manifest.is_empty() {
        bail!(DataError(format!("{} lists no images", manifest_path.display())));
    }
    let policy = cfg.policy()?;
    let seed = cfg.seed()?;
    let quality = cfg.jpeg_quality()?;
    let ext = cfg.output_ext()?;
    let batch = cfg.train()?.batch_size;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let images = ManifestImages {
        manifest: &manifest,
        cache: RefCell::new(HashMap::new()),
    };
    let replayed = match replay {
        Some(p) => Some(read_plan_log(open(p)?).map_err(|e| e.with_path(p))?),
        None => None,
    };
    let todo: Vec<(usize, Option<&PlanRecord>)> = match &replayed {
        Some(recs) => recs.iter().map(|r| (r.index, Some(r))).collect(),
        None => (0..manifest.len()).map(|i| (i, None)).collect(),
    };
    let mut readable = Vec::new();
    let mut unreadable = HashMap::new();
    for (i, entry) in manifest.entries.iter().enumerate() {
        match load_image(&manifest.resolve(entry)) {
            Ok(_) => readable.push(i),
            Err(e) => {
                unreadable.insert(i, e);
            }
        }
    }
    let mut records = Vec::new();
    let mut failures = 0usize;
    for (i, recorded) in todo {
        let Some(entry) = manifest.entries.get(i) else {
            eprintln!("skipping plan for index {i}: not in the manifest");
            failures += 1;
            continue;
        };
        if let Some(e) = unreadable.remove(&i) {
            eprintln!("skipping {}: {}", entry.id, describe(&e.into()));
            failures += 1;
            continue;
        }
        let result = (|| -> Result<PlanRecord> {
            let img = images.get(i)?;
            let plan = match recorded {
                Some(r) => r.plan.clone(),
                None => {
                    let chunk: Vec<usize>;
                    let partners: &[usize] = match policy.partner_scope {
                        PartnerScope::Dataset => &readable,
                        PartnerScope::Batch => {
                            let start = i / batch * batch;
                            chunk = readable.iter().copied().filter(|&j| j >= start && j < start + batch).collect();
                            &chunk
                        }
                    };
                    let ctx = PlanContext {
                        width: img.width(),
                        height: img.height(),
                        partners,
                    };
                    sample_plan(&policy, ctx, &mut stream(seed, POLICY, &[i as u64]))?
                }
            };
            let crop = execute_plan(&img, &plan, &images, policy.crop_size)?;
            save_image(&crop, &out.join(output_name(i, &entry.id, ext)), quality)?;
            Ok(PlanRecord {
                index: i,
                id: entry.id.clone(),
                plan,
            })
        })();
        match result {
            Ok(r) => records.push(r),
            Err(e) => {
                eprintln!("skipping {}: {}", entry.id, describe(&e));
                failures += 1;
            }
        }
    }
    if records.is_empty() {
        bail!(DataError(format!("all {failures} images failed")));
    }
    let mut log = create(&out.join("plans.csv"))?;
    write_plan_log(&mut log, &records)?;
    log.flush()?;
    if failures > 0 {
        eprintln!("{} of {} images written", records.len(), records.len() + failures);
    }
    Ok(())
}

fn load_training_data(cfg: &RunConfig) -> Result<Dataset<f64>> {
    let data = match cfg.train_data() {
        None => make_synthetic(&cfg.synthetic()?)?,
        Some(p) => read_features(open(&p)?, None).map_err(|e| e.with_path(&p))?,
    };
    let want = cfg.input_dim()?;
    if want != 0 && want != data.dim {
        bail!(DataError(format!("input_dim is {want} but the data has {} features", data.dim)));
    }
    Ok(data)
}

fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<()> {
    let data = load_training_data(cfg)?;
    let loss = cfg.loss()?;
    let sched = cfg.schedule()?;
    let tcfg = cfg.train()?;
    let result = train(&data, &tcfg, &loss, &sched, cfg.seed()?)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let mut w = create(&out.join("epoch_log.csv"))?;
    write_epoch_log(&mut w, &result.log, data.num_classes)?;
    w.flush()?;
    let mut w = create(&out.join("checkpoint.txt"))?;
    write_checkpoint(&mut w, &result.params)?;
    w.flush()?;

    let preds = result
        .val_indices
        .iter()
        .map(|&i| {
            let z = forward(&result.params, &data.features[i], None)?.logits;
            Ok(Prediction {
                id: data.ids[i].clone(),
                label: data.clean_labels[i],
                scores: z.into_iter().map(sigmoid).collect(),
            })
        })
        .collect::<imbal_core::Result<Vec<_>>>()?;
    let mut w = create(&out.join("val_predictions.csv"))?;
    write_predictions(&mut w, &preds)?;
    w.flush()?;

    match result.final_bacc() {
        Some(b) => println!("epochs={} val_bacc={b:.6}", result.log.len()),
        None => println!("epochs={}", result.log.len()),
    }
    Ok(())
}

/// Index of the manifest entry a prediction id refers to: exact id, or the
/// file stem of the entry's path.
fn manifest_lookup(m: &Manifest) -> HashMap<String, usize> {
    let mut map = HashMap::new();
    for (i, e) in m.entries.iter().enumerate() {
        if let Some(stem) = Path::new(&e.id).file_stem().and_then(|s| s.to_str()) {
            map.entry(stem.to_string()).or_insert(i);
        }
    }
    for (i, e) in m.entries.iter().enumerate() {
        map.insert(e.id.clone(), i);
    }
    map
}

fn cmd_evaluate(
    cfg: &RunConfig,
    predictions: &Path,
    manifest: Option<&Path>,
    k_crops: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let rows = read_predictions(open(predictions)?).map_err(|e| e.with_path(predictions))?;
    if rows.is_empty() {
        bail!(DataError(format!("{} has no prediction rows", predictions.display())));
    }
    if let Some(mp) = manifest {
        let m = load_manifest(mp)?;
        let lookup = manifest_lookup(&m);
        if m.num_classes() != rows[0].scores.len() {
            bail!(DataError(format!(
                "manifest has {} classes, predictions have {} scores",
                m.num_classes(),
                rows[0].scores.len()
            )));
        }
        for r in &rows {
            let i = *lookup
                .get(&r.id)
                .ok_or_else(|| DataError(format!("sample `{}` is not in {}", r.id, mp.display())))?;
            if m.entries[i].label != r.label {
                bail!(DataError(format!(
                    "sample `{}` has true_class {} but the manifest says {}",
                    r.id, r.label, m.entries[i].label
                )));
            }
        }
    }
    let k = match k_crops {
        Some(k) => k,
        None => cfg.k_crops()?,
    };
    let set = group_crops(rows, k, cfg.crop_average()?).map_err(|e| anyhow!(DataError(e.to_string())))?;
    let report = MetricsReport::evaluate(&set)?;
    let mut w = output(out)?;
    write!(w, "{report}")?;
    w.flush()?;
    Ok(())
}

fn cmd_schedule(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let sched = cfg.schedule()?;
    sched.validate()?;
    let mut w = output(out)?;
    write_schedule_dump(&mut w, &sched)?;
    w.flush()?;
    Ok(())
}

fn cmd_loss(cfg: &RunConfig, logits: &Path, out: Option<&Path>) -> Result<()> {
    let rows = read_logit_rows(open(logits)?).map_err(|e| e.with_path(logits))?;
    let Some(first) = rows.first() else {
        bail!(DataError(format!("{} has no rows", logits.display())));
    };
    let c = first.logits.len();
    let counts = cfg.class_counts()?;
    let counts = if counts.is_empty() { vec![1; c] } else { counts };
    if counts.len() != c {
        bail!("class_counts has {} entries but the logits have {c} columns", counts.len());
    }
    let lcfg = cfg.loss()?;
    let beta = cfg.beta_eff()?.unwrap_or(lcfg.alpha);
    let loss = Loss::new(lcfg, ClassStats::new(counts)?)?;
    let outs = rows
        .iter()
        .map(|r| Ok((r.sample_id.clone(), loss.eval(&r.logits, r.label, beta)?)))
        .collect::<imbal_core::Result<Vec<_>>>()?;
    let mut w = output(out)?;
    write_loss_rows(&mut w, &outs)?;
    w.flush()?;
    Ok(())
}
