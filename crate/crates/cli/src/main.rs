mod args;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use seamkit::imaging::to_grayscale;
use seamkit::io::{
    read_config, read_homography, read_image, read_mask, write_homography, write_image, write_json, write_mask,
    write_soft_mask,
};
use seamkit::pipeline::{
    run_batch, run_pair, AlignmentMode, BatchSource, Method, PairInput, PairRun, RunConfig, SaliencyMode,
};
use seamkit::saliency::{binarize, cleanup, spectral_residual};
use seamkit::synth::{synth_pair, SuiteConfig, SynthSpec};
use seamkit::{Error, ErrorClass, Homography, Result};

use args::{Cli, Command, OptimArgs, PairArgs};

const DEFAULT_OUT: &str = "seamkit-out";

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numeric => 3,
            })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Stitch { pair, methods, optim } => stitch(&cli, pair, methods.clone(), optim),
        Command::Seam { pair, method, optim } => stitch(&cli, pair, vec![*method], optim),
        Command::Saliency { image, tau, soft } => saliency(&cli, image, *tau, soft.as_deref()),
        Command::Synth { spec, pairs } => synth(&cli, spec.as_deref(), *pairs),
        Command::Eval {
            dir,
            suite,
            suite_config,
            pairs,
            methods,
            alignment,
            saliency,
            format,
            no_timing,
            optim,
        } => {
            let source = match (dir, suite_config) {
                (Some(d), _) => BatchSource::Dir(d.clone()),
                (None, Some(f)) => BatchSource::Suite(read_config(f)?),
                (None, None) => {
                    debug_assert!(*suite);
                    BatchSource::Suite(SuiteConfig::default())
                }
            };
            let source = match source {
                BatchSource::Suite(mut s) => {
                    if let Some(n) = pairs {
                        s.pairs = *n;
                    }
                    if let Some(seed) = cli.seed {
                        s.seed_start = seed;
                    }
                    BatchSource::Suite(s)
                }
                dir => dir,
            };
            let mut cfg = match (&cli.config, &source) {
                (Some(path), _) => read_config(path)?,
                (None, BatchSource::Suite(_)) => RunConfig::synthetic(),
                (None, BatchSource::Dir(_)) => RunConfig::default(),
            };
            if !methods.is_empty() {
                cfg.methods = methods.clone();
            }
            if let Some(a) = alignment {
                cfg.alignment = (*a).into();
            }
            if let Some(s) = saliency {
                cfg.saliency = (*s).into();
            }
            if let Some(f) = format {
                cfg.report_format = (*f).into();
            }
            if *no_timing {
                cfg.timing = false;
            }
            apply_globals(&cli, &mut cfg);
            apply_optim(optim, &mut cfg)?;
            eval(&cfg, &source)
        }
    }
}

fn apply_globals(cli: &Cli, cfg: &mut RunConfig) {
    if let Some(seed) = cli.seed {
        cfg.ransac.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    cfg.output_dir = Some(cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)));
}

fn apply_optim(a: &OptimArgs, cfg: &mut RunConfig) -> Result<()> {
    let o = &mut cfg.optim;
    if let Some(v) = a.epochs {
        o.max_epochs = v;
    }
    if let Some(v) = a.step {
        o.step = v;
    }
    if let Some(v) = a.w_comp {
        o.w_comp = v;
    }
    if let Some(v) = a.w_excl {
        o.w_excl = v;
    }
    if let Some(v) = a.w_smooth {
        o.w_smooth = v;
    }
    if let Some(v) = a.w_photo {
        o.w_photo = v;
    }
    if a.paper_exact {
        o.paper_exact = true;
    }
    if let Some(v) = a.init {
        o.init = v.into();
    }
    o.validate()
}

fn pair_input(p: &PairArgs) -> Result<PairInput> {
    let mut input = match p.inputs.as_slice() {
        [dir] if dir.is_dir() => PairInput::load_dir(dir)?,
        [single] => return Err(Error::Config(format!("{} is not a pair directory", single.display()))),
        [t, r] => PairInput::new(
            t.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "pair".into()),
            read_image(t)?,
            read_image(r)?,
        ),
        _ => unreachable!("clap enforces one or two inputs"),
    };
    if let Some(path) = &p.homography {
        input.homography = Some(read_homography(path)?);
    }
    if let Some(v) = &p.h {
        let arr: [f64; 9] = v
            .clone()
            .try_into()
            .map_err(|_| Error::Config("--h needs nine numbers".into()))?;
        input.homography = Some(Homography::from_row_major(arr)?);
    }
    if let (Some(t), Some(r)) = (&p.mask_t, &p.mask_r) {
        input.masks = Some((read_mask(t)?, read_mask(r)?));
    }
    if let (Some(t), Some(r)) = (&p.valid_t, &p.valid_r) {
        input.validity = Some((read_mask(t)?, read_mask(r)?));
    }
    Ok(input)
}

fn stitch(cli: &Cli, p: &PairArgs, methods: Vec<Method>, optim: &OptimArgs) -> Result<()> {
    let input = pair_input(p)?;
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => read_config(path)?,
        None => RunConfig::default(),
    };
    cfg.methods = methods;
    // The inputs decide the modes unless the user chose one.
    cfg.alignment = match p.alignment {
        Some(a) => a.into(),
        None if input.validity.is_some() => AlignmentMode::PreWarped,
        None if input.homography.is_some() => AlignmentMode::ProvidedH,
        None if cli.config.is_some() => cfg.alignment,
        None => AlignmentMode::Estimate,
    };
    cfg.saliency = match p.saliency {
        Some(s) => s.into(),
        None if input.masks.is_some() => SaliencyMode::File,
        None if cli.config.is_some() => cfg.saliency,
        None => SaliencyMode::Spectral,
    };
    if let Some(t) = p.tau {
        cfg.tau = t;
    }
    if let Some(c) = p.object_combine {
        cfg.combine = c.into();
    }
    if let Some(c) = p.cost {
        cfg.cost = c.into();
    }
    if let Some(f) = p.format {
        cfg.report_format = f.into();
    }
    apply_globals(cli, &mut cfg);
    apply_optim(optim, &mut cfg)?;

    let run = run_pair(&input, &cfg)?;
    let dir = cfg.output_dir.as_ref().expect("set by apply_globals").join(&run.name);
    print_pair(&run, &dir);
    if let Some(path) = &optim.trace {
        match run.runs.iter().find(|m| m.method == Method::ObjectAware) {
            Some(m) => {
                if let Ok(out) = &m.outcome {
                    write_json(path, &out.seam.trace)?;
                }
            }
            None => log::warn!("--trace ignored: object-aware was not run"),
        }
    }
    // The command fails only when every requested method failed.
    if run.runs.iter().all(|m| m.outcome.is_err()) {
        if let Some(m) = run.runs.into_iter().next() {
            return m.outcome.map(|_| ());
        }
    }
    Ok(())
}

fn print_pair(run: &PairRun, dir: &Path) {
    println!(
        "{:<14} {:>8} {:>8} {:>12} {:>8} {:>10}",
        "method", "psq", "failure", "seam_energy", "length", "time_ms"
    );
    for m in &run.runs {
        match &m.outcome {
            Ok(out) => {
                let r = &out.report;
                println!(
                    "{:<14} {:>8.4} {:>8} {:>12.4} {:>8} {:>10.1}",
                    m.method.name(),
                    r.psq,
                    r.failure,
                    r.seam_energy,
                    r.seam_length,
                    r.time_ms
                );
            }
            Err(e) => println!("{:<14} error: {e}", m.method.name()),
        }
    }
    println!("outputs in {}", dir.display());
}

fn saliency(cli: &Cli, image: &Path, tau: f64, soft: Option<&Path>) -> Result<()> {
    let cfg: RunConfig = match &cli.config {
        Some(path) => read_config(path)?,
        None => RunConfig::default(),
    };
    let out = cli.out.clone().unwrap_or_else(|| {
        let stem = image
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        image.with_file_name(format!("{stem}_mask.pgm"))
    });
    let gray = to_grayscale(&read_image(image)?);
    let map = spectral_residual(&gray, &cfg.spectral)?;
    let mask = cleanup(&binarize(&map, tau)?);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Config(format!("{}: {e}", parent.display())))?;
    }
    write_mask(&out, &mask)?;
    if let Some(path) = soft {
        write_soft_mask(path, &map)?;
    }
    println!(
        "{} salient pixels of {} -> {}",
        mask.count(),
        mask.dims().len(),
        out.display()
    );
    Ok(())
}

fn write_synth(dir: &Path, name: &str, spec: &SynthSpec) -> Result<()> {
    let s = synth_pair(spec)?;
    let d = dir.join(name);
    fs::create_dir_all(&d).map_err(|e| Error::Config(format!("{}: {e}", d.display())))?;
    write_image(d.join("target.png"), &s.target)?;
    write_image(d.join("reference.png"), &s.reference)?;
    write_mask(d.join("mask_t.pgm"), &s.target_objects)?;
    write_mask(d.join("mask_r.pgm"), &s.reference_objects)?;
    write_mask(d.join("objects.pgm"), &s.objects)?;
    write_homography(d.join("H.json"), &s.homography)?;
    write_json(d.join("spec.json"), spec)
}

fn synth(cli: &Cli, spec: Option<&Path>, pairs: Option<usize>) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let specs = match spec {
        Some(path) => {
            let mut s: SynthSpec = read_config(path)?;
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "synth".into());
            vec![(name, s)]
        }
        None => {
            let mut suite: SuiteConfig = match &cli.config {
                Some(path) => read_config(path)?,
                None => SuiteConfig::default(),
            };
            if let Some(n) = pairs {
                suite.pairs = n;
            }
            if let Some(seed) = cli.seed {
                suite.seed_start = seed;
            }
            suite.specs()?
        }
    };
    for (name, s) in &specs {
        write_synth(&out, name, s)?;
    }
    println!("{} pairs written to {}", specs.len(), out.display());
    Ok(())
}

fn eval(cfg: &RunConfig, source: &BatchSource) -> Result<()> {
    let report = run_batch(source, cfg)?;
    println!(
        "{} pairs ({} could not be processed)",
        report.summary.pairs, report.summary.failed_pairs
    );
    println!(
        "{:<14} {:>6} {:>9} {:>9} {:>9} {:>12} {:>10} {:>7}",
        "method", "pairs", "failures", "fail_rate", "mean_psq", "mean_energy", "mean_ms", "errors"
    );
    for m in &report.summary.methods {
        println!(
            "{:<14} {:>6} {:>9} {:>9.3} {:>9.4} {:>12.4} {:>10.1} {:>7}",
            m.method, m.pairs, m.failures, m.failure_rate, m.mean_psq, m.mean_seam_energy, m.mean_time_ms, m.errors
        );
    }
    if let Some(dir) = &cfg.output_dir {
        println!("results in {}", dir.join("results.csv").display());
    }
    Ok(())
}
