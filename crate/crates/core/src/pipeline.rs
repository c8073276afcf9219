//! End-to-end runs: log → cohort → features / alignments → files.
//!
//! Every input is read and validated before the first output is written,
//! so a failed run leaves the output directory untouched.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::alignment::{aggregate_alignment, align_cohort, compare, Alignment, AlignmentTable, ComparisonReport};
use crate::error::{Error, Result};
use crate::features::{aggregate_learners, analyze_cohort, FeatureTable, LearnerFeatures};
use crate::ingest::{derive_curriculum, load_curriculum, parse_step_activity, Curriculum, EventLog, RowError};
use crate::report::{chart_for_column, render_chart, write_table, Format, Table};
use crate::synth::{generate_cohort, GeneratorParams};
use crate::traces::{build_cohort, cohort_stats, AnalysisConfig, Cohort, CohortStats};

pub const FEATURE_CHARTS: [&str; 7] = ["active", "drop", "skip", "peek", "early", "late", "back"];
pub const ALIGNMENT_CHARTS: [&str; 4] = ["active", "drop", "early", "late"];

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: AnalysisConfig,
    pub curriculum: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Prefix of every output file name.
    pub course: String,
    pub charts: bool,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>, course: impl Into<String>) -> Self {
        RunOptions {
            config: AnalysisConfig::default(),
            curriculum: None,
            out_dir: out_dir.into(),
            course: course.into(),
            charts: false,
        }
    }

    fn path(&self, suffix: &str) -> PathBuf {
        self.out_dir.join(format!("{}-{suffix}", self.course))
    }
}

/// Course name from a log path: the file stem.
pub fn course_name(log: &Path) -> String {
    log.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "course".into())
}

pub struct Loaded {
    pub log: EventLog,
    pub row_errors: Vec<RowError>,
    pub curriculum: Curriculum,
    pub cohort: Cohort,
}

pub fn load(log_path: &Path, curriculum: Option<&Path>, config: &AnalysisConfig) -> Result<Loaded> {
    config.validate()?;
    let file = File::open(log_path).map_err(|e| Error::io(log_path, e))?;
    let (log, row_errors) = parse_step_activity(BufReader::with_capacity(1 << 20, file))?;
    let curriculum = match curriculum {
        Some(path) => load_curriculum(path, &log)?,
        None => derive_curriculum(&log)?,
    };
    let cohort = build_cohort(&log, &curriculum, config)?;
    Ok(Loaded {
        log,
        row_errors,
        curriculum,
        cohort,
    })
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub row_errors: Vec<RowError>,
    pub stats: Option<CohortStats>,
}

struct Writer<'a> {
    opts: &'a RunOptions,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, table: &Table) -> Result<()> {
        for format in [Format::Csv, Format::Json] {
            let path = self.opts.path(&format!("{name}.{}", format.extension()));
            write_table(table, format, &path)?;
            self.files.push(path);
        }
        Ok(())
    }

    fn text(&mut self, suffix: &str, contents: &str) -> Result<()> {
        let path = self.opts.path(suffix);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn charts(
        &mut self,
        prefix: &str,
        names: &[&str],
        column: impl Fn(&str) -> Option<Vec<Option<f64>>>,
        weeks: &[u32],
        cohort_size: usize,
    ) -> Result<()> {
        if !self.opts.charts {
            return Ok(());
        }
        for name in names {
            let values = column(name).expect("known column");
            let svg = render_chart(&chart_for_column(name, values, weeks.to_vec(), cohort_size))?;
            self.text(&format!("{prefix}{name}.svg"), &svg)?;
        }
        Ok(())
    }
}

fn prepare<'a>(opts: &'a RunOptions, log_path: &Path) -> Result<(Loaded, Writer<'a>)> {
    let loaded = load(log_path, opts.curriculum.as_deref(), &opts.config)?;
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| Error::io(&opts.out_dir, e))?;
    Ok((loaded, Writer { opts, files: Vec::new() }))
}

pub fn features_of(cohort: &Cohort) -> (Vec<LearnerFeatures>, FeatureTable) {
    let learners = analyze_cohort(cohort);
    let table = aggregate_learners(&cohort.curriculum, &learners);
    (learners, table)
}

pub fn alignments_of(cohort: &Cohort) -> (Vec<Alignment>, AlignmentTable) {
    let alignments = align_cohort(cohort);
    let table = aggregate_alignment(&cohort.curriculum, &alignments);
    (alignments, table)
}

fn write_features(w: &mut Writer, curriculum: &Curriculum, table: &FeatureTable) -> Result<()> {
    w.table("features", &table.to_table())?;
    w.charts("", &FEATURE_CHARTS, |n| table.column(n), &curriculum.weeks(), table.cohort_size)
}

fn write_alignment(w: &mut Writer, curriculum: &Curriculum, table: &AlignmentTable) -> Result<()> {
    w.table("alignment", &table.to_table())?;
    w.charts("alignment-", &ALIGNMENT_CHARTS, |n| table.column(n), &curriculum.weeks(), table.cohort_size)
}

fn write_comparison(w: &mut Writer, report: &ComparisonReport) -> Result<()> {
    let learners = report.learner_table();
    let path = w.opts.path("comparison.csv");
    write_table(&learners, Format::Csv, &path)?;
    w.files.push(path);
    let path = w.opts.path("comparison-resources.csv");
    write_table(&report.resource_table(), Format::Csv, &path)?;
    w.files.push(path);
    let json = serde_json::to_string_pretty(report)? + "\n";
    w.text("comparison.json", &json)
}

/// Feature table (CSV and JSON) and, optionally, one chart per feature.
pub fn run_analyze(opts: &RunOptions, log_path: &Path) -> Result<RunOutput> {
    let (loaded, mut w) = prepare(opts, log_path)?;
    let (_, table) = features_of(&loaded.cohort);
    write_features(&mut w, &loaded.curriculum, &table)?;
    Ok(RunOutput {
        files: w.files,
        stats: Some(cohort_stats(&loaded.cohort)),
        row_errors: loaded.row_errors,
    })
}

/// Alignment table (CSV and JSON) and optional charts.
pub fn run_align(opts: &RunOptions, log_path: &Path) -> Result<RunOutput> {
    let (loaded, mut w) = prepare(opts, log_path)?;
    let (_, table) = alignments_of(&loaded.cohort);
    write_alignment(&mut w, &loaded.curriculum, &table)?;
    Ok(RunOutput {
        files: w.files,
        stats: Some(cohort_stats(&loaded.cohort)),
        row_errors: loaded.row_errors,
    })
}

/// Both analyses plus the comparison report.
pub fn run_compare(opts: &RunOptions, log_path: &Path) -> Result<RunOutput> {
    let (loaded, mut w) = prepare(opts, log_path)?;
    let (learners, features) = features_of(&loaded.cohort);
    let (alignments, alignment_table) = alignments_of(&loaded.cohort);
    let report = compare(&features, &alignment_table, &learners, &alignments)?;
    write_features(&mut w, &loaded.curriculum, &features)?;
    write_alignment(&mut w, &loaded.curriculum, &alignment_table)?;
    write_comparison(&mut w, &report)?;
    Ok(RunOutput {
        files: w.files,
        stats: Some(cohort_stats(&loaded.cohort)),
        row_errors: loaded.row_errors,
    })
}

/// Sidecar paths written next to a simulated log: ground truth and curriculum.
pub fn simulate_sidecars(out: &Path) -> (PathBuf, PathBuf) {
    let stem = out.with_extension("");
    let name = |suffix: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (name(".truth.json"), name(".curriculum.csv"))
}

/// Writes a synthetic log plus its ground truth and curriculum sidecars.
pub fn run_simulate(params: &GeneratorParams, out: &Path) -> Result<RunOutput> {
    let (log, truth) = generate_cohort(params)?;
    let (truth_path, curriculum_path) = simulate_sidecars(out);

    let mut buf = Vec::new();
    log.write_csv(&mut buf)?;
    std::fs::write(out, buf).map_err(|e| Error::io(out, e))?;

    let json = serde_json::to_string_pretty(&truth)? + "\n";
    std::fs::write(&truth_path, json).map_err(|e| Error::io(&truth_path, e))?;

    let curriculum = params.curriculum();
    let mut sidecar = String::from("resource,type\n");
    for r in curriculum.resources() {
        sidecar.push_str(&format!("{r},\n"));
    }
    std::fs::write(&curriculum_path, sidecar).map_err(|e| Error::io(&curriculum_path, e))?;

    Ok(RunOutput {
        files: vec![out.to_path_buf(), truth_path, curriculum_path],
        ..RunOutput::default()
    })
}
