//! Run configuration read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};

use mixtype_core::{Error as CoreError, KernelConfig, Line, ProblemSpec, Sigma, SourceTerm, TypeChangeCurve};
use serde::Deserialize;

pub const MIN_FIELD_RESOLUTION: usize = 16;
const DEFAULT_FIELD_RESOLUTION: usize = 51;

/// Bad configuration, with the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Either a config problem or a rejected σ, which has its own exit code.
#[derive(Debug)]
pub enum LoadError {
    Config(ConfigError),
    Core(CoreError),
}

impl From<ConfigError> for LoadError {
    fn from(e: ConfigError) -> Self {
        LoadError::Config(e)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    sigma: RawSigma,
    curve_1: RawCurve,
    curve_2: RawCurve,
    curve_3: RawCurve,
    source: RawSource,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    quad: RawQuad,
    #[serde(default)]
    kernel: KernelConfig,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSigma {
    s1: f64,
    s2: f64,
    s3: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    kind: String,
    c: Option<f64>,
    points: Option<Vec<RawRow>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRow {
    Pair([f64; 2]),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    #[serde(default = "default_source_kind")]
    kind: String,
    expr: Option<String>,
    table: Option<PathBuf>,
}

fn default_source_kind() -> String {
    "expr".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(rename = "M")]
    m: usize,
}

impl Default for RawGrid {
    fn default() -> Self {
        RawGrid {
            m: mixtype_core::pipeline::DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuad {
    tol: f64,
}

impl Default for RawQuad {
    fn default() -> Self {
        RawQuad {
            tol: mixtype_core::pipeline::DEFAULT_QUAD_TOL,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    field_resolution: Option<usize>,
    #[serde(rename = "probe_M")]
    probe_m: Option<usize>,
}

/// Problem plus output controls.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: ProblemSpec,
    pub output_dir: PathBuf,
    pub field_resolution: usize,
    pub probe_m: usize,
}

impl RunConfig {
    /// Relative paths inside the file are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, LoadError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| toml_error(text, e))?;

        let sigma = Sigma {
            s1: raw.sigma.s1,
            s2: raw.sigma.s2,
            s3: raw.sigma.s3,
        };
        // σ is checked before anything else so that a bad σ is never masked
        sigma.validate().map_err(LoadError::Core)?;

        let curves = [
            curve(Line::AB, "curve_1", &raw.curve_1)?,
            curve(Line::AD, "curve_2", &raw.curve_2)?,
            curve(Line::BC, "curve_3", &raw.curve_3)?,
        ];
        let source = source(&raw.source, base)?;

        let mut spec = ProblemSpec::new(sigma, curves, source).with_grid(raw.grid.m);
        spec.quad_tol = raw.quad.tol;
        spec.kernel = raw.kernel;
        if let Err(e) = spec.validate() {
            let key = match &e {
                CoreError::SigmaInvalid { .. } => return Err(LoadError::Core(e)),
                CoreError::InvalidCurve { curve, .. } => format!("curve_{curve}"),
                CoreError::InvalidParameter(msg) if msg.starts_with("grid") => "grid.M".into(),
                CoreError::InvalidParameter(msg) if msg.starts_with("quad") => "quad.tol".into(),
                _ => "kernel".into(),
            };
            return Err(ConfigError::new(key, e).into());
        }

        let field_resolution = raw.output.field_resolution.unwrap_or(DEFAULT_FIELD_RESOLUTION);
        if field_resolution < MIN_FIELD_RESOLUTION {
            return Err(ConfigError::new(
                "output.field_resolution",
                format!("must be at least {MIN_FIELD_RESOLUTION}, got {field_resolution}"),
            )
            .into());
        }
        let probe_m = raw.output.probe_m.unwrap_or(spec.grid_m);
        if probe_m < 2 {
            return Err(ConfigError::new("output.probe_M", format!("must be at least 2, got {probe_m}")).into());
        }
        let dir = raw.output.dir.unwrap_or_else(|| PathBuf::from("output"));
        Ok(RunConfig {
            spec,
            output_dir: resolve(base, &dir),
            field_resolution,
            probe_m,
        })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn toml_error(text: &str, e: toml::de::Error) -> ConfigError {
    let key = e.span().map(|span| key_at(text, span.start)).unwrap_or_default();
    ConfigError::new(key, e.message().trim())
}

// `section.key` for the line holding byte `offset`
fn key_at(text: &str, offset: usize) -> String {
    let mut section = String::new();
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        let end = start + line.len();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
        }
        if offset < end {
            return match trimmed.split_once('=') {
                Some((k, _)) if !trimmed.starts_with('[') => {
                    let k = k.trim();
                    if section.is_empty() {
                        k.to_string()
                    } else {
                        format!("{section}.{k}")
                    }
                }
                _ => section,
            };
        }
        start = end;
    }
    section
}

fn curve(line: Line, key: &str, raw: &RawCurve) -> Result<TypeChangeCurve, ConfigError> {
    let built = match raw.kind.as_str() {
        "bump" => {
            if raw.points.is_some() {
                return Err(ConfigError::new(format!("{key}.points"), "not used by kind = \"bump\""));
            }
            let c = raw.c.ok_or_else(|| ConfigError::new(format!("{key}.c"), "required for kind = \"bump\""))?;
            TypeChangeCurve::bump(line, c)
        }
        "table" => {
            if raw.c.is_some() {
                return Err(ConfigError::new(format!("{key}.c"), "not used by kind = \"table\""));
            }
            let rows = raw
                .points
                .as_ref()
                .ok_or_else(|| ConfigError::new(format!("{key}.points"), "required for kind = \"table\""))?;
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| row(r).map_err(|m| ConfigError::new(format!("{key}.points[{i}]"), m)))
                .collect::<Result<Vec<_>, _>>()?;
            TypeChangeCurve::table(line, &rows)
        }
        other => {
            return Err(ConfigError::new(
                format!("{key}.kind"),
                format!("expected \"bump\" or \"table\", got \"{other}\""),
            ))
        }
    };
    built.map_err(|e| ConfigError::new(key, e))
}

fn row(r: &RawRow) -> Result<(f64, f64), String> {
    match r {
        RawRow::Pair([t, v]) => Ok((*t, *v)),
        RawRow::Text(s) => {
            let mut parts = s.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(format!("expected \"t,value\", got \"{s}\""));
            };
            let num = |v: &str| v.parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
            Ok((num(a)?, num(b)?))
        }
    }
}

fn source(raw: &RawSource, base: &Path) -> Result<SourceTerm, ConfigError> {
    match raw.kind.as_str() {
        "expr" => {
            if raw.table.is_some() {
                return Err(ConfigError::new("source.table", "not used by kind = \"expr\""));
            }
            let text = raw
                .expr
                .as_deref()
                .ok_or_else(|| ConfigError::new("source.expr", "required for kind = \"expr\""))?;
            SourceTerm::parse(text).map_err(|e| ConfigError::new("source.expr", e))
        }
        "table" => {
            if raw.expr.is_some() {
                return Err(ConfigError::new("source.expr", "not used by kind = \"table\""));
            }
            let path = raw
                .table
                .as_deref()
                .ok_or_else(|| ConfigError::new("source.table", "required for kind = \"table\""))?;
            SourceTerm::from_csv(&resolve(base, path)).map_err(|e| ConfigError::new("source.table", e))
        }
        other => Err(ConfigError::new(
            "source.kind",
            format!("expected \"expr\" or \"table\", got \"{other}\""),
        )),
    }
}
