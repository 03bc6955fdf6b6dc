//! File-driven command line front end.
//!
//! Configuration is a flat `key = value` file with `#` comments; every key
//! can be overridden on the command line by a flag of the same name
//! (`--key value` or `--key=value`). Numeric output carries 17 significant
//! digits so identical runs produce byte-identical files. Exit codes:
//! 0 success, 2 validation failure (with a machine-readable JSON object on
//! stderr), 3 solver stall (best iterate still written).

use crate::diagnostics::{upscale_experiment, UpscaleReport};
use crate::disk::{FourierSeries, Point};
use crate::energy::{renormalized_energy, BoundaryDatum, EnergyBreakdown, PointConfig};
use crate::error::Error;
use crate::limit::{
    limit_energy, limit_energy_quadrature, limiting_boundary_measure, piecewise_constant_approx,
    recovery_sequence, LimitMeasure,
};
use crate::optimize::{multistart, MinimizeOptions, MinimizeTrace, StopReason};
use std::collections::BTreeMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_STALL: i32 = 3;

/// A validation or runtime failure surfaced to the command line.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind}: {message}")]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError {
            kind: kind.into(),
            message: message.into(),
        }
    }

    /// The JSON object written to the error stream.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"error\":{},\"message\":{}}}",
            json_string(&self.kind),
            json_string(&self.message)
        )
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// 17 significant digits; round-trips every f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Key-value configuration merged from a file and flag overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    map: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::new(
                    "parse",
                    format!("line {}: expected `key = value`, got `{raw}`", lineno + 1),
                ));
            };
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RunConfig { map })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                CliError::new("parse", format!("key `{key}`: `{v}` is not a number"))
            }),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
                CliError::new("parse", format!("key `{key}`: `{v}` is not a count"))
            }),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        Ok(self.usize_opt(key)?.unwrap_or(default))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse::<u64>().map_err(|_| {
                CliError::new("parse", format!("key `{key}`: `{v}` is not an integer"))
            }),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        CliError::new("parse", format!("key `{key}`: `{tok}` is not a number"))
                    })
                })
                .collect(),
        }
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>, CliError> {
        match self.get(key) {
            None => Ok(Vec::new()),
            Some(v) if v.trim().is_empty() => Ok(Vec::new()),
            Some(v) => v
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<usize>().map_err(|_| {
                        CliError::new("parse", format!("key `{key}`: `{tok}` is not a count"))
                    })
                })
                .collect(),
        }
    }

    /// The boundary datum from `f_mean`, `f_cos`, `f_sin`.
    pub fn datum(&self) -> Result<BoundaryDatum, CliError> {
        Ok(BoundaryDatum::new(self.datum_series()?)?)
    }

    fn datum_series(&self) -> Result<FourierSeries, CliError> {
        let mean = self.f64_or("f_mean", 1.0)?;
        let cos = self.f64_list("f_cos")?;
        let sin = self.f64_list("f_sin")?;
        Ok(FourierSeries::new(mean, cos, sin)?)
    }

    /// Points from the inline `points` list (x1,y1,x2,y2,...) or from a
    /// previously written JSON file named by `points_file`.
    pub fn points(&self) -> Result<PointConfig, CliError> {
        let inline = self.f64_list("points")?;
        let from_file = self.get("points_file");
        let coords: Vec<f64> = match (inline.is_empty(), from_file) {
            (false, None) => inline,
            (true, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::new("parse", format!("cannot read {path}: {e}"))
                })?;
                parse_points_json(&text)?
                    .into_iter()
                    .flat_map(|p| [p.x, p.y])
                    .collect()
            }
            (false, Some(_)) => {
                return Err(CliError::new(
                    "invalid_input",
                    "give either `points` or `points_file`, not both",
                ))
            }
            (true, None) => {
                return Err(CliError::new(
                    "invalid_input",
                    "no points given: set `points` or `points_file`",
                ))
            }
        };
        if !coords.len().is_multiple_of(2) {
            return Err(CliError::new(
                "parse",
                "`points` needs an even number of coordinates",
            ));
        }
        let pts = coords
            .chunks(2)
            .map(|c| Point::new(c[0], c[1]))
            .collect::<Vec<_>>();
        Ok(PointConfig::new(pts)?)
    }

    /// Optimizer options; `grad_tol` defaults to the per-n rule `1e-7 n`.
    pub fn minimize_options(&self, n: usize) -> Result<MinimizeOptions, CliError> {
        let defaults = MinimizeOptions::defaults_for(n);
        Ok(MinimizeOptions {
            max_iters: self.usize_or("max_iters", defaults.max_iters)?,
            grad_tol: self.f64_or("grad_tol", defaults.grad_tol)?,
            initial_step: self.f64_or("initial_step", defaults.initial_step)?,
            shrink_factor: self.f64_or("shrink_factor", defaults.shrink_factor)?,
            restarts: self.usize_or("restarts", defaults.restarts)?,
            seed: self.u64_or("seed", defaults.seed)?,
        })
    }

    /// The limit measure named by `measure`, optionally re-gridded through
    /// `approx_h`.
    pub fn measure(&self) -> Result<LimitMeasure, CliError> {
        let kind = self.get("measure").unwrap_or("boundary_from_f");
        let mu = match kind {
            "boundary_from_f" => limiting_boundary_measure(&self.datum_series()?)?,
            "ring" => LimitMeasure::ring(self.f64_or("rho", 0.5)?)?,
            "uniform_disk" => LimitMeasure::uniform_disk(self.f64_or("rho", 1.0)?)?,
            "square" => LimitMeasure::uniform_square(
                self.f64_or("half_width", 0.3)?,
                self.usize_or("cells_per_side", 4)?,
            )?,
            other => {
                return Err(CliError::new(
                    "invalid_input",
                    format!(
                        "unknown measure `{other}` (expected boundary_from_f, ring, uniform_disk, square)"
                    ),
                ))
            }
        };
        match self.f64_opt("approx_h")? {
            Some(h) => Ok(piecewise_constant_approx(&mu, h)?),
            None => Ok(mu),
        }
    }
}

fn parse_points_json(text: &str) -> Result<Vec<Point>, CliError> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(text)
        .map_err(|e| CliError::new("parse", format!("invalid points JSON: {e}")))?;
    Ok(raw.into_iter().map(|[x, y]| Point::new(x, y)).collect())
}

/// JSON array of `[x, y]` pairs; round-trips exactly through
/// [`parse_points_json`].
pub fn points_to_json(config: &PointConfig) -> String {
    let body: Vec<String> = config
        .points()
        .iter()
        .map(|p| format!("[{},{}]", fmt_f64(p.x), fmt_f64(p.y)))
        .collect();
    format!("[{}]", body.join(","))
}

pub fn breakdown_to_json(e: &EnergyBreakdown) -> String {
    format!(
        "{{\"w_term\":{},\"f_pairing\":{},\"phi_pairing\":{},\"log_term\":{},\"total\":{}}}",
        fmt_f64(e.w_term),
        fmt_f64(e.f_pairing),
        fmt_f64(e.phi_pairing),
        fmt_f64(e.log_term),
        fmt_f64(e.total)
    )
}

pub fn trace_to_csv(trace: &MinimizeTrace) -> String {
    let mut out = String::from("iter,total,grad_norm,min_bdist,min_sep\n");
    for row in &trace.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.iter,
            fmt_f64(row.total),
            fmt_f64(row.grad_norm),
            fmt_f64(row.min_bdist),
            fmt_f64(row.min_sep)
        ));
    }
    out
}

pub fn report_to_csv(report: &UpscaleReport) -> String {
    let mut out = String::from("n,energy,mean_bdist,max_bdist,w1,angular_disc\n");
    for r in &report.records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            fmt_f64(r.energy),
            fmt_f64(r.mean_bdist),
            fmt_f64(r.max_bdist),
            fmt_f64(r.w1),
            fmt_f64(r.angular_disc)
        ));
    }
    out
}

/// Energy breakdown of an explicit configuration; returns the JSON object.
pub fn cmd_energy(cfg: &RunConfig) -> Result<String, CliError> {
    let datum = cfg.datum()?;
    let config = cfg.points()?;
    let breakdown = renormalized_energy(&config, &datum)?;
    Ok(breakdown_to_json(&breakdown))
}

pub struct MinimizeOutput {
    pub points_json: String,
    pub trace_csv: String,
    pub stalled: bool,
}

/// Multistart minimization for `n` points; returns the final configuration
/// and per-iteration trace.
pub fn cmd_minimize(cfg: &RunConfig) -> Result<MinimizeOutput, CliError> {
    let n = cfg
        .usize_opt("n")?
        .ok_or_else(|| CliError::new("invalid_input", "minimize needs `n`"))?;
    let datum = cfg.datum()?;
    let opts = cfg.minimize_options(n)?;
    let (config, trace) = multistart(n, &datum, &opts)?;
    Ok(MinimizeOutput {
        points_json: points_to_json(&config),
        trace_csv: trace_to_csv(&trace),
        stalled: trace.stop == StopReason::Stalled,
    })
}

/// Upscaling sweep over `n_list`; returns the report CSV.
pub fn cmd_upscale(cfg: &RunConfig) -> Result<String, CliError> {
    let n_list = cfg.usize_list("n_list")?;
    if n_list.is_empty() {
        return Err(CliError::new("invalid_input", "upscale needs `n_list`"));
    }
    let f = cfg.datum_series()?;
    // Validate up front so errors map to exit 2 before any work starts.
    let _ = BoundaryDatum::new(f.clone())?;
    let largest = *n_list.last().unwrap();
    let mut opts = cfg.minimize_options(largest)?;
    if cfg.get("grad_tol").is_none() {
        // Per-n default inside the sweep.
        opts.grad_tol = -1.0;
    }
    let report = upscale_experiment(&f, &n_list, &opts)?;
    Ok(report_to_csv(&report))
}

/// Limit functional on the configured measure; returns a JSON number.
pub fn cmd_limit(cfg: &RunConfig) -> Result<String, CliError> {
    let mu = cfg.measure()?;
    let f = cfg.datum_series()?;
    let value = match cfg.get("path").unwrap_or("weak") {
        "weak" => limit_energy(&mu, &f)?,
        "quadrature" => limit_energy_quadrature(&mu, &f)?,
        other => {
            return Err(CliError::new(
                "invalid_input",
                format!("unknown path `{other}` (expected weak or quadrature)"),
            ))
        }
    };
    Ok(fmt_f64(value))
}

/// Recovery sequence for the configured grid measure; returns points JSON.
pub fn cmd_recovery(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg
        .usize_opt("n")?
        .ok_or_else(|| CliError::new("invalid_input", "recovery needs `n`"))?;
    let mu = cfg.measure()?;
    let config = recovery_sequence(&mu, n)?;
    Ok(points_to_json(&config))
}

fn load_config(args: &[String]) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(stripped) = arg.strip_prefix("--") else {
            return Err(CliError::new(
                "parse",
                format!("unexpected argument `{arg}` (flags look like --key value)"),
            ));
        };
        let (key, value) = match stripped.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let Some(value) = args.get(i + 1) else {
                    return Err(CliError::new("parse", format!("flag --{stripped} needs a value")));
                };
                i += 1;
                (stripped.to_string(), value.clone())
            }
        };
        if key == "config" {
            let text = std::fs::read_to_string(&value).map_err(|e| {
                CliError::new("parse", format!("cannot read config {value}: {e}"))
            })?;
            let file_cfg = RunConfig::parse(&text)?;
            // File values fill in, flags seen so far and later still win.
            for (k, v) in file_cfg.map {
                cfg.map.entry(k).or_insert(v);
            }
        } else {
            cfg.set(&key, &value);
        }
        i += 1;
    }
    Ok(cfg)
}

fn write_or_print(path: Option<&str>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::new("invalid_input", format!("cannot write {p}: {e}"))),
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

const USAGE: &str = "usage: disloc <energy|minimize|upscale|limit|recovery> [--config FILE] [--key value]...

subcommands
  energy     four-term energy of an explicit configuration -> JSON
  minimize   multistart minimization for n points -> points JSON + trace CSV
  upscale    sweep over n_list -> report CSV
  limit      limit functional of a measure -> JSON number
  recovery   deterministic discrete approximation of a grid measure -> points JSON

keys are documented in the README; every config-file key can be given as --key value.";

/// Parse arguments, dispatch, and return the process exit code.
pub fn run(args: &[String]) -> i32 {
    let Some(sub) = args.first() else {
        eprintln!("{USAGE}");
        return EXIT_VALIDATION;
    };
    let cfg = match load_config(&args[1..]) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{}", e.to_json());
            return EXIT_VALIDATION;
        }
    };
    let result: Result<i32, CliError> = match sub.as_str() {
        "energy" => cmd_energy(&cfg).and_then(|json| {
            write_or_print(cfg.get("out"), &json)?;
            Ok(EXIT_OK)
        }),
        "minimize" => cmd_minimize(&cfg).and_then(|out| {
            write_or_print(cfg.get("out_points"), &out.points_json)?;
            write_or_print(cfg.get("out_trace"), &out.trace_csv)?;
            Ok(if out.stalled { EXIT_STALL } else { EXIT_OK })
        }),
        "upscale" => cmd_upscale(&cfg).and_then(|csv| {
            write_or_print(cfg.get("out"), &csv)?;
            Ok(EXIT_OK)
        }),
        "limit" => cmd_limit(&cfg).and_then(|json| {
            write_or_print(cfg.get("out"), &json)?;
            Ok(EXIT_OK)
        }),
        "recovery" => cmd_recovery(&cfg).and_then(|json| {
            write_or_print(cfg.get("out"), &json)?;
            Ok(EXIT_OK)
        }),
        other => {
            eprintln!("{}", CliError::new("parse", format!("unknown subcommand `{other}`")).to_json());
            eprintln!("{USAGE}");
            return EXIT_VALIDATION;
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            EXIT_VALIDATION
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing_and_overrides() {
        let cfg = RunConfig::parse("a = 1\n# comment\nb = two # trailing\n\nc=3.5\n").unwrap();
        assert_eq!(cfg.get("a"), Some("1"));
        assert_eq!(cfg.get("b"), Some("two"));
        assert_eq!(cfg.get("c"), Some("3.5"));
        assert!(RunConfig::parse("not a pair\n").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "n = 2\nseed = 9\n").unwrap();
        let args = vec![
            "--seed".to_string(),
            "4".to_string(),
            "--config".to_string(),
            path.to_str().unwrap().to_string(),
        ];
        let cfg = load_config(&args).unwrap();
        assert_eq!(cfg.get("seed"), Some("4"));
        assert_eq!(cfg.get("n"), Some("2"));
    }

    #[test]
    fn fmt_f64_has_17_significant_digits_and_round_trips() {
        for &x in &[0.0, 1.0, -0.101386, std::f64::consts::PI, 1.0e-17, -3.5e8] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
            let digits = s
                .trim_start_matches('-')
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(|c| c.is_ascii_digit())
                .count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn energy_command_closed_forms() {
        let mut cfg = RunConfig::default();
        cfg.set("points", "0,0");
        let json = cmd_energy(&cfg).unwrap();
        assert!(json.contains("\"total\":0.0000000000000000e0"), "{json}");

        let mut cfg = RunConfig::default();
        cfg.set("points", "0.5,0,-0.5,0");
        let json = cmd_energy(&cfg).unwrap();
        let expect = -0.5 * std::f64::consts::PI * (1.0 - 0.5f64.powi(4)).ln();
        let total: f64 = json
            .split("\"total\":")
            .nth(1)
            .unwrap()
            .trim_end_matches('}')
            .parse()
            .unwrap();
        assert!((total - expect).abs() < 1e-12);
    }

    #[test]
    fn collision_maps_to_validation_error() {
        let mut cfg = RunConfig::default();
        cfg.set("points", "0.1,0.1,0.1,0.1");
        let err = cmd_energy(&cfg).unwrap_err();
        assert_eq!(err.kind, "collision");
    }

    #[test]
    fn points_round_trip_exactly() {
        let config = PointConfig::new(vec![
            Point::new(0.123_456_789_012_345_68, -0.9),
            Point::new(1.0 / 3.0, 2.0f64.sqrt() / 2.0),
        ])
        .unwrap();
        let json = points_to_json(&config);
        let back = parse_points_json(&json).unwrap();
        assert_eq!(back.len(), 2);
        for (p, q) in config.points().iter().zip(&back) {
            assert_eq!(p.x, q.x);
            assert_eq!(p.y, q.y);
        }
    }

    #[test]
    fn recovery_infeasible_n_error_kind() {
        let mut cfg = RunConfig::default();
        cfg.set("measure", "square");
        cfg.set("n", "3");
        let err = cmd_recovery(&cfg).unwrap_err();
        assert_eq!(err.kind, "infeasible_n");
    }

    #[test]
    fn limit_command_values() {
        let mut cfg = RunConfig::default();
        cfg.set("measure", "boundary_from_f");
        let v: f64 = cmd_limit(&cfg).unwrap().parse().unwrap();
        assert!(v.abs() < 1e-10);

        let mut cfg = RunConfig::default();
        cfg.set("measure", "ring");
        cfg.set("rho", "0.5");
        let v: f64 = cmd_limit(&cfg).unwrap().parse().unwrap();
        assert!((v - (-std::f64::consts::PI * 0.5f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn minimize_output_is_byte_deterministic() {
        let mut cfg = RunConfig::default();
        cfg.set("n", "2");
        cfg.set("restarts", "2");
        cfg.set("seed", "3");
        cfg.set("max_iters", "200");
        let a = cmd_minimize(&cfg).unwrap();
        let b = cmd_minimize(&cfg).unwrap();
        assert_eq!(a.points_json, b.points_json);
        assert_eq!(a.trace_csv, b.trace_csv);
        assert!(a.trace_csv.starts_with("iter,total,grad_norm,min_bdist,min_sep\n"));
    }
}
