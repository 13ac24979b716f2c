//! End-to-end runs: align, build the protected set, find seams with each
//! requested method, compose and score. Batches fan pairs out over a thread
//! pool and gather results in input order.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{
    detect_matches, ransac_homography, warp_pair, AlignedPair, Homography, MatchConfig, RansacConfig, WarpConfig,
};
use crate::error::{Error, Result};
use crate::imaging::{cost_map, to_grayscale, BinaryMask, CostKind, CostMap, Image, SoftMask};
use crate::io::{read_homography, read_image, read_mask, write_image, write_json, write_label_map};
use crate::metrics::{compose, object_integrity, psq, seam_energy, MetricsReport, PsqConfig};
use crate::object_aware::{optimize_masks, OptimConfig, TraceRecord};
use crate::saliency::{binarize, cleanup, combine_objects, spectral_residual, ObjectCombine, SaliencyConfig};
use crate::seams::{dp_seam_any_orientation, graphcut_seam, voronoi_seam, LabelMap, SeamResult};
use crate::synth::{synth_pair, SuiteConfig, SynthPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dp,
    Graphcut,
    Voronoi,
    ObjectAware,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Dp, Method::Graphcut, Method::Voronoi, Method::ObjectAware];

    pub fn name(self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::Graphcut => "graphcut",
            Method::Voronoi => "voronoi",
            Method::ObjectAware => "object-aware",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown method {s:?}; expected dp, graphcut, voronoi or object-aware"
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentMode {
    /// Match features and fit a homography.
    #[default]
    Estimate,
    /// Use the homography supplied with the pair.
    ProvidedH,
    /// Inputs are already on a common canvas with validity masks.
    PreWarped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SaliencyMode {
    #[default]
    Spectral,
    /// Masks supplied with the pair.
    File,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub methods: Vec<Method>,
    pub alignment: AlignmentMode,
    pub saliency: SaliencyMode,
    /// Saliency threshold for the spectral masks.
    pub tau: f64,
    pub combine: ObjectCombine,
    pub cost: CostKind,
    pub optim: OptimConfig,
    pub matching: MatchConfig,
    pub ransac: RansacConfig,
    pub warp: WarpConfig,
    pub spectral: SaliencyConfig,
    pub psq: PsqConfig,
    /// Where per-pair outputs and batch tables go; nothing is written when unset.
    pub output_dir: Option<PathBuf>,
    pub report_format: ReportFormat,
    /// Write stitched images and label maps, not just reports.
    pub save_images: bool,
    /// Record wall-clock times; when off every `time_ms` is 0 and reports
    /// are reproducible bit for bit.
    pub timing: bool,
    /// Worker threads for batches; 0 uses every core.
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            alignment: AlignmentMode::Estimate,
            saliency: SaliencyMode::Spectral,
            tau: 0.5,
            combine: ObjectCombine::Union,
            cost: CostKind::Color,
            optim: OptimConfig::default(),
            matching: MatchConfig::default(),
            ransac: RansacConfig::default(),
            warp: WarpConfig::default(),
            spectral: SaliencyConfig::default(),
            psq: PsqConfig::default(),
            output_dir: None,
            report_format: ReportFormat::Json,
            save_images: true,
            timing: true,
            jobs: 0,
        }
    }
}

impl RunConfig {
    /// Settings for generated pairs: ground-truth homography and object masks.
    pub fn synthetic() -> Self {
        Self {
            alignment: AlignmentMode::ProvidedH,
            saliency: SaliencyMode::File,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one seam method is required".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau {} outside (0, 1)", self.tau)));
        }
        self.optim.validate()?;
        if let Some(dir) = &self.output_dir {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(())
    }
}

/// One pair as handed to the pipeline.
#[derive(Debug, Clone)]
pub struct PairInput {
    pub name: String,
    pub target: Image,
    pub reference: Image,
    /// Target-to-reference homography, for `ProvidedH`.
    pub homography: Option<Homography>,
    /// Canvas validity masks `(target, reference)`, for `PreWarped`.
    pub validity: Option<(BinaryMask, BinaryMask)>,
    /// Object masks `(target, reference)` for `SaliencyMode::File`, in view
    /// coordinates (canvas coordinates for pre-warped inputs).
    pub masks: Option<(BinaryMask, BinaryMask)>,
}

impl PairInput {
    pub fn new(name: impl Into<String>, target: Image, reference: Image) -> Self {
        Self {
            name: name.into(),
            target,
            reference,
            homography: None,
            validity: None,
            masks: None,
        }
    }

    /// A generated pair with its true homography and per-view object masks.
    pub fn from_synth(name: impl Into<String>, s: SynthPair) -> Self {
        Self {
            homography: Some(s.homography),
            masks: Some((s.target_objects, s.reference_objects)),
            ..Self::new(name, s.target, s.reference)
        }
    }

    /// Reads `<dir>/target.png` and `reference.png`, plus `mask_t.pgm`,
    /// `mask_r.pgm` and `H.json` when present. Pre-warped directories carry
    /// `valid_t.pgm` and `valid_r.pgm`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let mut p = PairInput::new(
            name,
            read_image(dir.join("target.png"))?,
            read_image(dir.join("reference.png"))?,
        );
        let (mt, mr) = (dir.join("mask_t.pgm"), dir.join("mask_r.pgm"));
        if mt.exists() && mr.exists() {
            p.masks = Some((read_mask(mt)?, read_mask(mr)?));
        }
        let h = dir.join("H.json");
        if h.exists() {
            p.homography = Some(read_homography(h)?);
        }
        let (vt, vr) = (dir.join("valid_t.pgm"), dir.join("valid_r.pgm"));
        if vt.exists() && vr.exists() {
            p.validity = Some((read_mask(vt)?, read_mask(vr)?));
        }
        Ok(p)
    }
}

/// Everything one method produced on one pair.
#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub seam: SeamResult,
    pub stitched: Image,
    pub report: MetricsReport,
}

#[derive(Debug)]
pub struct MethodRun {
    pub method: Method,
    pub outcome: Result<MethodOutput>,
}

#[derive(Debug)]
pub struct PairRun {
    pub name: String,
    pub pair: AlignedPair,
    pub foreground: Foreground,
    pub runs: Vec<MethodRun>,
}

/// Puts the pair on a common canvas according to `cfg.alignment`.
pub fn align(input: &PairInput, cfg: &RunConfig) -> Result<AlignedPair> {
    match cfg.alignment {
        AlignmentMode::PreWarped => {
            let (vt, vr) = input
                .validity
                .clone()
                .ok_or_else(|| Error::Config("pre-warped input needs validity masks".into()))?;
            AlignedPair::new(input.target.clone(), input.reference.clone(), vt, vr)
        }
        AlignmentMode::ProvidedH => {
            let h = input
                .homography
                .as_ref()
                .ok_or_else(|| Error::Config("alignment mode provided-h needs a homography".into()))?;
            warp_pair(&input.target, &input.reference, h, &cfg.warp)
        }
        AlignmentMode::Estimate => {
            let matches = detect_matches(&input.target, &input.reference, &cfg.matching)?;
            let (h, inliers) = ransac_homography(&matches, &cfg.ransac)?;
            log::debug!(
                "{}: {} of {} matches are inliers",
                input.name,
                inliers.len(),
                matches.len()
            );
            warp_pair(&input.target, &input.reference, &h, &cfg.warp)
        }
    }
}

/// The protected object set `O` and the saliency weights used by PSQ, both
/// on the canvas.
#[derive(Debug, Clone)]
pub struct Foreground {
    pub objects: BinaryMask,
    /// Pixelwise max of the two views' saliency maps.
    pub saliency: SoftMask,
}

/// Builds the foreground of `pair` from mask files or spectral saliency. View
/// maps are carried onto the canvas through the warp geometry; pairs without
/// one are taken to be in canvas coordinates already.
pub fn foreground(input: &PairInput, pair: &AlignedPair, cfg: &RunConfig) -> Result<Foreground> {
    let on_canvas = pair.geometry().is_none();
    let (mt, mr, st, sr) = match cfg.saliency {
        SaliencyMode::File => {
            let (mt, mr) = input
                .masks
                .clone()
                .ok_or_else(|| Error::Config(format!("pair {} has no mask files", input.name)))?;
            let (st, sr) = (mt.to_soft(), mr.to_soft());
            (mt, mr, st, sr)
        }
        SaliencyMode::Spectral => {
            let (it, ir) = if on_canvas {
                (pair.warped_target(), pair.warped_reference())
            } else {
                (&input.target, &input.reference)
            };
            let st = spectral_residual(&to_grayscale(it), &cfg.spectral)?;
            let sr = spectral_residual(&to_grayscale(ir), &cfg.spectral)?;
            (
                cleanup(&binarize(&st, cfg.tau)?),
                cleanup(&binarize(&sr, cfg.tau)?),
                st,
                sr,
            )
        }
    };
    let (ct, cr, st, sr) = if on_canvas {
        let d = pair.dims();
        d.check(mt.dims(), "target mask")?;
        d.check(mr.dims(), "reference mask")?;
        let clip =
            |s: &SoftMask, v: &BinaryMask| SoftMask::from_fn(d, |i, j| if v.get(i, j) { s.get(i, j) } else { 0.0 });
        (
            mt.and(pair.valid_t())?,
            mr.and(pair.valid_r())?,
            clip(&st, pair.valid_t()),
            clip(&sr, pair.valid_r()),
        )
    } else {
        (
            pair.target_mask_to_canvas(&mt)?,
            pair.reference_mask_to_canvas(&mr)?,
            pair.target_soft_to_canvas(&st)?,
            pair.reference_soft_to_canvas(&sr)?,
        )
    };
    let saliency = SoftMask::from_fn(pair.dims(), |i, j| st.get(i, j).max(sr.get(i, j)));
    Ok(Foreground {
        objects: combine_objects(&ct, &cr, cfg.combine)?,
        saliency,
    })
}

/// Labels every overlap pixel with the image that has an exclusive region,
/// or with the target when neither or both do. Used by the classic methods
/// when one exclusive region is empty and a seam has no endpoints.
pub fn trivial_seam(pair: &AlignedPair) -> SeamResult {
    let to_reference = pair.target_only().is_empty() && !pair.reference_only().is_empty();
    let labels = LabelMap::from_overlap(pair, |_, _| !to_reference);
    SeamResult::from_labels(labels, pair, 0.0)
}

fn find_seam(
    method: Method,
    pair: &AlignedPair,
    o: &BinaryMask,
    cost: &CostMap,
    cfg: &RunConfig,
) -> Result<SeamResult> {
    let one_sided = pair.target_only().is_empty() || pair.reference_only().is_empty();
    match method {
        Method::ObjectAware => optimize_masks(pair, o, cost, &cfg.optim),
        _ if one_sided && !pair.overlap().is_empty() => {
            log::warn!("one exclusive region is empty; {method} falls back to a one-sided labeling");
            Ok(trivial_seam(pair))
        }
        Method::Dp => dp_seam_any_orientation(cost, pair),
        Method::Graphcut => graphcut_seam(cost, pair),
        Method::Voronoi => voronoi_seam(pair, Some(cost)),
    }
}

/// Runs one method on an aligned pair and scores it against `fg`.
pub fn run_method(
    method: Method,
    pair: &AlignedPair,
    fg: &Foreground,
    cost: &CostMap,
    cfg: &RunConfig,
) -> Result<MethodOutput> {
    let o = &fg.objects;
    let start = Instant::now();
    let seam = find_seam(method, pair, o, cost, cfg)?;
    let time_ms = if cfg.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let stitched = compose(pair, &seam.soft_l1, &seam.soft_l2)?;
    let (failure, split_components, split_pixels) = object_integrity(o, &seam.labels)?;
    let report = MetricsReport {
        method: method.name().to_string(),
        psq: psq(pair, &seam.labels, &fg.saliency, &cfg.psq)?,
        failure,
        split_components,
        split_pixels,
        seam_energy: seam_energy(cost, &seam.labels)?,
        seam_length: seam.seam_pixels.len(),
        time_ms,
    };
    Ok(MethodOutput { seam, stitched, report })
}

/// Aligns, builds `O` and runs every configured method. A failing method is
/// recorded in its `MethodRun` and does not stop the others; alignment and
/// saliency failures abort the pair.
pub fn run_pair(input: &PairInput, cfg: &RunConfig) -> Result<PairRun> {
    cfg.validate()?;
    let tag = |stage: &str| format!("pair {} ({stage})", input.name);
    let pair = align(input, cfg).map_err(|e| e.context(tag("alignment")))?;
    let fg = foreground(input, &pair, cfg).map_err(|e| e.context(tag("saliency")))?;
    let cost = cost_map(cfg.cost, pair.warped_target(), pair.warped_reference(), pair.overlap())
        .map_err(|e| e.context(tag("cost")))?;
    let runs = cfg
        .methods
        .iter()
        .map(|&method| MethodRun {
            method,
            outcome: run_method(method, &pair, &fg, &cost, cfg).map_err(|e| e.context(tag(method.name()))),
        })
        .collect();
    let run = PairRun {
        name: input.name.clone(),
        pair,
        foreground: fg,
        runs,
    };
    if let Some(dir) = &cfg.output_dir {
        write_pair_outputs(&run, &dir.join(&run.name), cfg)?;
    }
    Ok(run)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pair: String,
    pub method: String,
    pub psq: f64,
    pub failure: bool,
    pub split_components: usize,
    pub split_pixels: usize,
    pub seam_energy: f64,
    pub seam_length: usize,
    pub time_ms: f64,
}

impl ResultRow {
    pub fn new(pair: &str, r: &MetricsReport) -> Self {
        Self {
            pair: pair.to_string(),
            method: r.method.clone(),
            psq: r.psq,
            failure: r.failure,
            split_components: r.split_components,
            split_pixels: r.split_pixels,
            seam_energy: r.seam_energy,
            seam_length: r.seam_length,
            time_ms: r.time_ms,
        }
    }
}

pub fn write_rows_csv(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows_csv(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn write_pair_outputs(run: &PairRun, dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::new();
    for m in &run.runs {
        let Ok(out) = &m.outcome else { continue };
        let name = m.method.name();
        if cfg.save_images {
            write_image(dir.join(format!("{name}_stitched.png")), &out.stitched)?;
            write_label_map(dir.join(format!("{name}_labels.pgm")), &out.seam.labels)?;
        }
        if !out.seam.trace.is_empty() {
            write_json(dir.join(format!("{name}_trace.json")), &out.seam.trace)?;
        }
        match cfg.report_format {
            ReportFormat::Json => write_json(dir.join(format!("{name}_report.json")), &out.report)?,
            ReportFormat::Csv => rows.push(ResultRow::new(&run.name, &out.report)),
        }
    }
    if cfg.report_format == ReportFormat::Csv {
        write_rows_csv(dir.join("report.csv"), &rows)?;
    }
    Ok(())
}

/// Where a batch gets its pairs.
#[derive(Debug, Clone)]
pub enum BatchSource {
    /// Every subdirectory holding `target.png` and `reference.png`.
    Dir(PathBuf),
    Suite(SuiteConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    /// Pairs on which the method produced a result.
    pub pairs: usize,
    pub failures: usize,
    /// `failures / pairs`.
    pub failure_rate: f64,
    /// `1 - failure_rate`.
    pub success_rate: f64,
    pub mean_psq: f64,
    pub mean_seam_energy: f64,
    pub mean_seam_length: f64,
    pub mean_time_ms: f64,
    /// Pairs on which the method itself returned an error.
    pub errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub pairs: usize,
    /// Pairs that could not be loaded, aligned or masked.
    pub failed_pairs: usize,
    pub methods: Vec<MethodSummary>,
}

/// The optimisation record of one object-aware run.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTrace {
    pub pair: String,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct BatchReport {
    pub rows: Vec<ResultRow>,
    pub summary: BatchSummary,
    /// `(pair, message)` for every error met along the way.
    pub errors: Vec<(String, String)>,
    /// Object-aware traces, in pair order.
    pub traces: Vec<PairTrace>,
    /// Label maps by pair and method, in row order.
    pub labels: Vec<(String, Method, LabelMap)>,
}

/// Pair directories under `root`, sorted by name.
pub fn discover_pairs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(Error::MissingFile(root.to_path_buf()));
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("target.png").is_file() && p.join("reference.png").is_file())
        .collect();
    dirs.sort();
    Ok(dirs)
}

enum Job {
    Dir(PathBuf),
    Synth(String, crate::synth::SynthSpec),
}

impl Job {
    fn name(&self) -> String {
        match self {
            Job::Dir(p) => p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            Job::Synth(n, _) => n.clone(),
        }
    }

    fn load(&self) -> Result<PairInput> {
        match self {
            Job::Dir(p) => PairInput::load_dir(p),
            Job::Synth(name, spec) => Ok(PairInput::from_synth(name.clone(), synth_pair(spec)?)),
        }
    }
}

type PairRows = (
    Vec<(Method, Result<MetricsReport>)>,
    Option<PairTrace>,
    Vec<(Method, LabelMap)>,
);

struct PairOutcome {
    name: String,
    result: Result<PairRows>,
}

fn process(job: &Job, cfg: &RunConfig) -> PairOutcome {
    let name = job.name();
    let result = job.load().and_then(|input| run_pair(&input, cfg)).map(|run| {
        let mut trace = None;
        let mut labels = Vec::new();
        let reports = run
            .runs
            .into_iter()
            .map(|m| {
                let r = m.outcome.map(|out| {
                    if m.method == Method::ObjectAware {
                        trace = Some(PairTrace {
                            pair: run.name.clone(),
                            trace: out.seam.trace,
                            converged: out.seam.converged,
                        });
                    }
                    labels.push((m.method, out.seam.labels));
                    out.report
                });
                (m.method, r)
            })
            .collect();
        (reports, trace, labels)
    });
    PairOutcome { name, result }
}

/// Runs every pair of `source` through `cfg`. Per-pair and per-method errors
/// are logged and counted; only an empty source is an error. Output does not
/// depend on `cfg.jobs`.
pub fn run_batch(source: &BatchSource, cfg: &RunConfig) -> Result<BatchReport> {
    cfg.validate()?;
    let jobs: Vec<Job> = match source {
        BatchSource::Dir(root) => discover_pairs(root)?.into_iter().map(Job::Dir).collect(),
        BatchSource::Suite(suite) => suite.specs()?.into_iter().map(|(n, s)| Job::Synth(n, s)).collect(),
    };
    if jobs.is_empty() {
        let what = match source {
            BatchSource::Dir(root) => root.display().to_string(),
            BatchSource::Suite(_) => "synthetic suite".to_string(),
        };
        return Err(Error::NoPairs(what));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<PairOutcome> = pool.install(|| jobs.par_iter().map(|j| process(j, cfg)).collect());

    let mut report = BatchReport {
        rows: Vec::new(),
        summary: BatchSummary {
            pairs: outcomes.len(),
            failed_pairs: 0,
            methods: Vec::new(),
        },
        errors: Vec::new(),
        traces: Vec::new(),
        labels: Vec::new(),
    };
    let mut method_errors = vec![0usize; cfg.methods.len()];
    for o in outcomes {
        match o.result {
            Err(e) => {
                log::error!("{}: {e}", o.name);
                report.summary.failed_pairs += 1;
                report.errors.push((o.name, e.to_string()));
            }
            Ok((reports, trace, labels)) => {
                for (k, (method, r)) in reports.into_iter().enumerate() {
                    match r {
                        Ok(r) => report.rows.push(ResultRow::new(&o.name, &r)),
                        Err(e) => {
                            log::error!("{}: {method}: {e}", o.name);
                            method_errors[k] += 1;
                            report.errors.push((o.name.clone(), e.to_string()));
                        }
                    }
                }
                report.traces.extend(trace);
                report
                    .labels
                    .extend(labels.into_iter().map(|(m, l)| (o.name.clone(), m, l)));
            }
        }
    }
    report.summary.methods = cfg
        .methods
        .iter()
        .zip(&method_errors)
        .map(|(m, &errors)| summarize(m.name(), &report.rows, errors))
        .collect();

    if let Some(dir) = &cfg.output_dir {
        write_rows_csv(dir.join("results.csv"), &report.rows)?;
        write_json(dir.join("summary.json"), &report.summary)?;
    }
    Ok(report)
}

/// Per-method aggregate over `rows`.
pub fn summarize(method: &str, rows: &[ResultRow], errors: usize) -> MethodSummary {
    let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.method == method).collect();
    let n = mine.len();
    let mean = |f: &dyn Fn(&ResultRow) -> f64| {
        if n == 0 {
            0.0
        } else {
            mine.iter().map(|r| f(r)).sum::<f64>() / n as f64
        }
    };
    let failures = mine.iter().filter(|r| r.failure).count();
    let failure_rate = if n == 0 { 0.0 } else { failures as f64 / n as f64 };
    MethodSummary {
        method: method.to_string(),
        pairs: n,
        failures,
        failure_rate,
        success_rate: if n == 0 { 0.0 } else { 1.0 - failure_rate },
        mean_psq: mean(&|r| r.psq),
        mean_seam_energy: mean(&|r| r.seam_energy),
        mean_seam_length: mean(&|r| r.seam_length as f64),
        mean_time_ms: mean(&|r| r.time_ms),
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Dims;
    use crate::seams::Label;
    use crate::synth::{Background, Shape, SynthObject, SynthSpec};

    fn quiet() -> RunConfig {
        RunConfig {
            timing: false,
            jobs: 1,
            ..RunConfig::synthetic()
        }
    }

    fn straddle_input() -> PairInput {
        let spec = SynthSpec {
            height: 64,
            width: 96,
            overlap: 0.6,
            background: Background::Noise { seed: 4 },
            parallax: 3,
            objects: vec![SynthObject {
                shape: Shape::Disk,
                center: (62.0, 32.0),
                size: 10.0,
                color: [0.8, 0.2, 0.3],
                displacement: (0.0, 0.0),
            }],
            jitter: 0.0,
            seed: 1,
        };
        let s = synth_pair(&spec).unwrap();
        PairInput {
            name: "straddle".into(),
            target: s.target,
            reference: s.reference,
            homography: Some(s.homography),
            validity: None,
            masks: Some((s.target_objects, s.reference_objects)),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
        assert!(matches!("sift".parse::<Method>(), Err(Error::Config(_))));
    }

    #[test]
    fn identical_pre_warped_images_score_zero() {
        let d = Dims::new(32, 48);
        let img = Image::from_fn(d, |i, j| [(i % 7) as f64 / 7.0, (j % 5) as f64 / 5.0, 0.5]);
        let mut input = PairInput::new("same", img.clone(), img);
        input.validity = Some((
            BinaryMask::from_fn(d, |_, j| j < 32),
            BinaryMask::from_fn(d, |_, j| j >= 16),
        ));
        input.masks = Some((BinaryMask::zeros(d), BinaryMask::zeros(d)));
        let cfg = RunConfig {
            alignment: AlignmentMode::PreWarped,
            ..quiet()
        };
        let run = run_pair(&input, &cfg).unwrap();
        assert_eq!(run.runs.len(), 4);
        for m in &run.runs {
            let out = m.outcome.as_ref().unwrap();
            assert_eq!(out.report.psq, 0.0, "{}", m.method);
            assert!(!out.report.failure);
        }
    }

    #[test]
    fn straddling_object_splits_only_for_graphcut() {
        let run = run_pair(&straddle_input(), &quiet()).unwrap();
        let report = |m| {
            run.runs
                .iter()
                .find(|r| r.method == m)
                .unwrap()
                .outcome
                .as_ref()
                .unwrap()
                .report
                .clone()
        };
        assert!(report(Method::Graphcut).failure);
        assert!(!report(Method::ObjectAware).failure);
    }

    #[test]
    fn empty_method_list_is_a_config_error() {
        let cfg = RunConfig {
            methods: vec![],
            ..quiet()
        };
        assert!(matches!(run_pair(&straddle_input(), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn one_sided_overlap_uses_the_trivial_labeling() {
        let d = Dims::new(20, 20);
        let img = Image::filled(d, [0.3; 3]);
        let mut input = PairInput::new("full", img.clone(), img);
        input.validity = Some((BinaryMask::ones(d), BinaryMask::from_fn(d, |_, j| j >= 5)));
        input.masks = Some((BinaryMask::zeros(d), BinaryMask::zeros(d)));
        let cfg = RunConfig {
            alignment: AlignmentMode::PreWarped,
            ..quiet()
        };
        let run = run_pair(&input, &cfg).unwrap();
        for m in &run.runs {
            let out = m.outcome.as_ref().unwrap();
            assert_eq!(out.seam.labels.count(Label::Target), 400, "{}", m.method);
        }
    }

    #[test]
    fn batch_rows_and_rates_agree() {
        let suite = SuiteConfig {
            pairs: 3,
            height: 48,
            width: 64,
            object_size: 6.0,
            ..SuiteConfig::default()
        };
        let cfg = RunConfig {
            methods: vec![Method::Graphcut, Method::ObjectAware],
            ..quiet()
        };
        let b = run_batch(&BatchSource::Suite(suite), &cfg).unwrap();
        assert_eq!(b.rows.len(), 6);
        for s in &b.summary.methods {
            let fails = b.rows.iter().filter(|r| r.method == s.method && r.failure).count();
            assert_eq!(s.failure_rate, fails as f64 / 3.0);
        }
    }

    #[test]
    fn empty_directory_has_no_pairs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            run_batch(&BatchSource::Dir(dir.path().into()), &quiet()),
            Err(Error::NoPairs(_))
        ));
    }
}
