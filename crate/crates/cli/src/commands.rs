//! The `run`, `sweep` and `analyze` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use alpha_patch::io::{fmt17, save_curve};
use alpha_patch::{bound_value, calibrate_constant, run, DiagnosticsRecord, PatchDiagnostics, TerminationVerdict};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_config, render_config, ConfigError, RunConfig};

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";
pub const SERIES: &str = "series.ndjson";
pub const VERDICT: &str = "verdict.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SUMMARY: &str = "summary.ndjson";
pub const ANALYSIS: &str = "analysis.ndjson";
pub const PLOT_DIR: &str = "plot";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{}: {message}", path.display())]
    Data { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Hand-assembled JSON object so every float carries 17 significant digits.
#[derive(Default)]
struct JsonLine(String);

impl JsonLine {
    fn key(mut self, k: &str) -> Self {
        self.0.push(if self.0.is_empty() { '{' } else { ',' });
        self.0.push_str(&serde_json::to_string(k).unwrap());
        self.0.push(':');
        self
    }

    fn num(self, k: &str, v: f64) -> Self {
        self.raw(k, &fmt17(v))
    }

    fn int(self, k: &str, v: usize) -> Self {
        self.raw(k, &v.to_string())
    }

    fn str(self, k: &str, v: &str) -> Self {
        let v = serde_json::to_string(v).unwrap();
        self.raw(k, &v)
    }

    fn nums(self, k: &str, v: impl IntoIterator<Item = f64>) -> Self {
        let items: Vec<String> = v.into_iter().map(fmt17).collect();
        self.raw(k, &format!("[{}]", items.join(",")))
    }

    fn raw(self, k: &str, v: &str) -> Self {
        let mut s = self.key(k);
        s.0.push_str(v);
        s
    }

    fn finish(mut self) -> String {
        if self.0.is_empty() {
            self.0.push('{');
        }
        self.0.push('}');
        self.0
    }
}

fn verdict_json(v: &TerminationVerdict) -> String {
    let reason = serde_json::to_value(v.reason).unwrap();
    JsonLine::default()
        .str("reason", reason.as_str().unwrap())
        .num("t_final", v.t_final)
        .str("detail", &v.detail)
        .finish()
}

pub struct RunOutcome {
    pub verdict: TerminationVerdict,
    pub last_record: Option<DiagnosticsRecord>,
}

/// Integrate one config and write its output directory.
pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let state = cfg.initial_state()?;
    let out = &cfg.output_dir;
    let snapshots = out.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snapshots).map_err(io_err(&snapshots))?;
    write(&out.join(RESOLVED_CONFIG), render_config(cfg))?;

    let (traj, verdict) = run(state, &cfg.control);

    let mut series = String::new();
    for r in &traj.records {
        series.push_str(&r.to_ndjson());
        series.push('\n');
    }
    write(&out.join(SERIES), series)?;
    for snap in &traj.snapshots {
        for (p, curve) in snap.curves.iter().enumerate() {
            let path = snapshots.join(format!("curve_{p}_{:06}.csv", snap.step));
            save_curve(curve, &path).map_err(|e| CliError::Data { path, message: e.to_string() })?;
        }
    }
    write(&out.join(VERDICT), verdict_json(&verdict) + "\n")?;
    Ok(RunOutcome { verdict, last_record: traj.records.last().cloned() })
}

/// Split a key path like `patch[0].shape.radius` or `control.t_end` into segments.
fn key_segments(path: &str) -> Result<Vec<Segment>, CliError> {
    let bad = || CliError::Usage(format!("--param: cannot parse key path '{path}'"));
    let mut out = Vec::new();
    for part in path.split('.') {
        let (name, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if name.is_empty() {
            return Err(bad());
        }
        out.push(Segment::Key(name.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            out.push(Segment::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(out)
}

enum Segment {
    Key(String),
    Index(usize),
}

fn set_key(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<(), CliError> {
    let segments = key_segments(path)?;
    let missing = || CliError::Usage(format!("--param: '{path}' does not name a key of the config"));
    let mut node = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match seg {
            Segment::Key(k) => {
                let table = node.as_table_mut().ok_or_else(missing)?;
                if last && !table.contains_key(k) {
                    // Optional keys (such as a patch prefactor) are absent until set.
                    table.insert(k.clone(), value);
                    return Ok(());
                }
                table.get_mut(k).ok_or_else(missing)?
            }
            Segment::Index(j) => node.as_array_mut().and_then(|a| a.get_mut(*j)).ok_or_else(missing)?,
        };
    }
    *node = value;
    Ok(())
}

/// A sweep value as written on the command line: any TOML literal, else a bare string.
pub fn parse_sweep_value(item: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {item}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(item.to_string()))
}

fn dir_name(index: usize, param: &str, item: &str) -> String {
    let clean = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' }).collect::<String>();
    format!("{index:03}_{}={}", clean(param), clean(item))
}

/// Derive the config for one sweep entry.
pub fn sweep_entry(base: &RunConfig, param: &str, item: &str, out: PathBuf) -> Result<RunConfig, CliError> {
    let mut tree = toml::Value::try_from(base).expect("config serializes to a TOML table");
    set_key(&mut tree, param, parse_sweep_value(item))?;
    set_key(&mut tree, "output_dir", toml::Value::String(out.to_string_lossy().into_owned()))?;
    let cfg: RunConfig = serde_path_to_error::deserialize(tree)
        .map_err(|e| ConfigError::invalid(e.path().to_string(), e.inner().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub struct SweepReport {
    pub lines: Vec<String>,
    pub failed: usize,
    pub blowups: usize,
}

/// Run one config per value in parallel, each into `<output_dir>/<index>_<param>=<value>`.
pub fn sweep(base: &RunConfig, param: &str, values: &[String]) -> Result<SweepReport, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("--values: empty list".into()));
    }
    // A bad key path is a usage error for the whole sweep.
    set_key(&mut toml::Value::try_from(base).unwrap(), param, toml::Value::Integer(0))?;
    let root = &base.output_dir;
    fs::create_dir_all(root).map_err(io_err(root))?;

    let results: Vec<Result<RunOutcome, CliError>> = values
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let cfg = sweep_entry(base, param, item, root.join(dir_name(i, param, item)))?;
            run_config(&cfg)
        })
        .collect();

    let mut report = SweepReport { lines: Vec::new(), failed: 0, blowups: 0 };
    for (i, (item, result)) in values.iter().zip(results).enumerate() {
        let value = serde_json::to_string(&parse_sweep_value(item)).unwrap();
        let line = JsonLine::default()
            .int("index", i)
            .str("param", param)
            .raw("value", &value)
            .str("output_dir", &root.join(dir_name(i, param, item)).to_string_lossy());
        let line = match result {
            Ok(outcome) => {
                if outcome.verdict.reason.is_blowup() {
                    report.blowups += 1;
                }
                let reason = serde_json::to_value(outcome.verdict.reason).unwrap();
                let last: Vec<PatchDiagnostics> = outcome.last_record.map(|r| r.patches).unwrap_or_default();
                line.str("verdict", reason.as_str().unwrap())
                    .num("t_final", outcome.verdict.t_final)
                    .nums("supF", last.iter().map(|p| p.sup_f))
                    .nums("h3", last.iter().map(|p| p.h3))
            }
            Err(e) => {
                report.failed += 1;
                line.str("error", &e.to_string())
            }
        };
        report.lines.push(line.finish());
    }
    let summary = root.join(SUMMARY);
    write(&summary, report.lines.iter().map(|l| format!("{l}\n")).collect::<String>())?;
    Ok(report)
}

fn read_series(path: &Path) -> Result<Vec<DiagnosticsRecord>, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            DiagnosticsRecord::from_ndjson(l).map_err(|e| CliError::Data { path: path.to_path_buf(), message: format!("line {}: {e}", i + 1) })
        })
        .collect()
}

fn dat_file(path: &Path, label: &str, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<(), CliError> {
    let mut text = format!("# t {label}\n");
    for (t, y) in rows {
        if y.is_finite() {
            text.push_str(&format!("{} {}\n", fmt17(t), fmt17(y)));
        }
    }
    write(path, text)
}

type Observable = (&'static str, fn(&PatchDiagnostics) -> f64);

const OBSERVABLES: [Observable; 10] = [
    ("area", |p| p.area),
    ("l2", |p| p.l2),
    ("h3", |p| p.h3),
    ("c2", |p| p.c2),
    ("c2half", |p| p.c2half),
    ("supF", |p| p.sup_f),
    ("A", |p| p.a),
    ("udef", |p| p.udef),
    ("tdef", |p| p.tdef),
    ("bounded", |p| p.bounded_quantity()),
];

/// Calibrate the bound for every patch of a run directory and write plot tables.
/// Returns the lines written to `analysis.ndjson`.
pub fn analyze_dir(dir: &Path) -> Result<Vec<String>, CliError> {
    let cfg_path = dir.join(RESOLVED_CONFIG);
    let text = fs::read_to_string(&cfg_path).map_err(io_err(&cfg_path))?;
    let cfg = parse_config(&text)?;
    let records = read_series(&dir.join(SERIES))?;
    let verdict: Option<serde_json::Value> =
        fs::read_to_string(dir.join(VERDICT)).ok().and_then(|s| serde_json::from_str(&s).ok());
    let patches = records.first().map_or(0, |r| r.patches.len());
    if patches == 0 {
        return Err(CliError::Data { path: dir.join(SERIES), message: "no records".into() });
    }
    let plot = dir.join(PLOT_DIR);
    fs::create_dir_all(&plot).map_err(io_err(&plot))?;

    let mut lines = Vec::new();
    for p in 0..patches {
        // Calibrate on the leading stretch where the bounded quantity is finite.
        let usable = records.iter().take_while(|r| r.patches[p].bounded_quantity().is_finite()).count();
        let (bound, c) = calibrate_constant(&records[..usable], p, cfg.alpha)
            .map_err(|e| CliError::Data { path: dir.join(SERIES), message: format!("patch {p}: {e}") })?;
        let max = |f: fn(&PatchDiagnostics) -> f64| records.iter().map(|r| f(&r.patches[p])).fold(f64::NEG_INFINITY, f64::max);
        let mut line = JsonLine::default()
            .int("patch", p)
            .num("alpha", cfg.alpha)
            .num("exponent", bound.exponent)
            .num("initial_value", bound.initial_value)
            .num("C", c)
            .num("expiry_time", bound.expiry_time())
            .int("records", records.len())
            .int("calibrated_records", usable)
            .num("t_last", records.last().unwrap().t)
            .num("max_udef", max(|d| d.udef))
            .num("max_tdef", max(|d| d.tdef))
            .num("max_supF", max(|d| d.sup_f))
            .num("max_h3", max(|d| d.h3));
        if let Some(reason) = verdict.as_ref().and_then(|v| v["reason"].as_str()) {
            line = line.str("verdict", reason);
        }
        lines.push(line.finish());

        for (name, f) in OBSERVABLES {
            dat_file(&plot.join(format!("patch{p}_{name}.dat")), name, records.iter().map(|r| (r.t, f(&r.patches[p]))))?;
        }
        let bound_rows = records.iter().filter_map(|r| bound_value(&bound, r.t).finite().map(|b| (r.t, b)));
        dat_file(&plot.join(format!("patch{p}_bound.dat")), "bound", bound_rows)?;
    }
    dat_file(&plot.join("dt.dat"), "dt", records.iter().map(|r| (r.t, r.dt)))?;
    dat_file(&plot.join("max_speed.dat"), "max_speed", records.iter().map(|r| (r.t, r.max_speed)))?;
    if patches > 1 {
        let rows = records.iter().filter_map(|r| r.min_dist.map(|d| (r.t, d)));
        dat_file(&plot.join("min_dist.dat"), "min_dist", rows)?;
    }
    write(&dir.join(ANALYSIS), lines.iter().map(|l| format!("{l}\n")).collect::<String>())?;
    Ok(lines)
}
