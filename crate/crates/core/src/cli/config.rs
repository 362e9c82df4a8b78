//! Sectioned `key = value` configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::bounds::WeightFamily;
use crate::field::{ScalarField, TrigPoly};
use crate::model::{Mat2, ModelSpec, StateSpace};

/// Keys accepted in `[model]` that no catalog entry uses.
pub const IGNORED_MODEL_KEYS: [&str; 4] = ["zeta1", "zeta2", "chi", "kappa"];

const SECTIONS: [&str; 6] = ["model", "mc", "spectral", "bounds", "analysis", "output"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    pub fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub value: String,
    #[serde(skip)]
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Section {
    #[serde(skip)]
    pub line: usize,
    pub entries: BTreeMap<String, Entry>,
}

impl Section {
    pub fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key)
            .map(|e| parse_f64(&e.value).map_err(|m| ConfigError::at(e.line, format!("{key}: {m}"))))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn req_f64(&self, key: &str, section: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| ConfigError::at(self.line, format!("[{section}] is missing `{key}`")))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.raw(key)
            .map(|e| {
                e.value
                    .parse::<usize>()
                    .map_err(|_| ConfigError::at(e.line, format!("{key}: expected a non-negative integer, got `{}`", e.value)))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.raw(key)
            .map(|e| {
                e.value
                    .parse::<u64>()
                    .map_err(|_| ConfigError::at(e.line, format!("{key}: expected an unsigned integer, got `{}`", e.value)))
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.raw(key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                v => Err(ConfigError::at(e.line, format!("{key}: expected true or false, got `{v}`"))),
            })
            .transpose()
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.raw(key).map(|e| parse_list(e, key)).transpose()
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.raw(key).map(|e| e.value.as_str())
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("expected a number, got `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a finite number, got `{s}`"))
    }
}

/// Comma separated numbers, or `lo:step:hi` for an inclusive range.
fn parse_list(e: &Entry, key: &str) -> Result<Vec<f64>, ConfigError> {
    let err = |m: String| ConfigError::at(e.line, format!("{key}: {m}"));
    let parts: Vec<&str> = e.value.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let (lo, step, hi) = (
            parse_f64(parts[0]).map_err(err)?,
            parse_f64(parts[1]).map_err(err)?,
            parse_f64(parts[2]).map_err(err)?,
        );
        if !(step > 0.0) || hi < lo {
            return Err(err(format!("bad range `{}`", e.value)));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|k| lo + k as f64 * step).collect());
    }
    let v = e
        .value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_f64)
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    if v.is_empty() {
        return Err(err("empty list".into()));
    }
    Ok(v)
}

/// Parsed file: sections of string entries with their line numbers.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RawConfig {
    pub sections: BTreeMap<String, Section>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split(['#', ';']).next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line, format!("malformed section header `{s}`")))?
                    .trim()
                    .to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(ConfigError::at(line, format!("unknown section [{name}]")));
                }
                if sections.contains_key(&name) {
                    return Err(ConfigError::at(line, format!("duplicate section [{name}]")));
                }
                sections.insert(name.clone(), Section { line, entries: BTreeMap::new() });
                current = Some(name);
                continue;
            }
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, format!("expected `key = value`, got `{s}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::at(line, "empty key"));
            }
            let sec = current
                .as_ref()
                .ok_or_else(|| ConfigError::at(line, format!("`{k}` appears before any section header")))?;
            let section = sections.get_mut(sec).expect("section registered");
            if section.entries.contains_key(k) {
                return Err(ConfigError::at(line, format!("duplicate key `{k}` in [{sec}]")));
            }
            section.entries.insert(k.to_string(), Entry { value: v.to_string(), line });
        }
        Ok(RawConfig { sections })
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::global(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Section, ConfigError> {
        self.section(name).ok_or_else(|| {
            let last = self.sections.values().map(|s| s.line).max().unwrap_or(1);
            ConfigError::at(last.max(1), format!("missing required section [{name}]"))
        })
    }

    /// The same file with `[mc] seed` replaced.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        let mc = c.sections.entry("mc".into()).or_default();
        let line = mc.entries.get("seed").map_or(0, |e| e.line);
        mc.entries.insert("seed".into(), Entry { value: seed.to_string(), line });
        c
    }
}

fn check_keys(sec: &Section, name: &str, allowed: &[&str], prefixed: &[&str]) -> Result<(), ConfigError> {
    for (k, e) in &sec.entries {
        let ok = allowed.contains(&k.as_str())
            || prefixed.iter().any(|p| k.strip_prefix(p).is_some_and(|r| indexed(r).is_some()));
        if !ok {
            return Err(ConfigError::at(e.line, format!("unknown key `{k}` in [{name}]")));
        }
    }
    Ok(())
}

/// `[j]` suffix.
fn indexed(rest: &str) -> Option<usize> {
    rest.strip_prefix('[')?.strip_suffix(']')?.parse().ok()
}

fn indexed_keys<'a>(sec: &'a Section, prefix: &str) -> Result<Vec<&'a Entry>, ConfigError> {
    let mut found: BTreeMap<usize, &Entry> = BTreeMap::new();
    for (k, e) in &sec.entries {
        if let Some(j) = k.strip_prefix(prefix).and_then(indexed) {
            found.insert(j, e);
        }
    }
    for (pos, (&j, e)) in found.iter().enumerate() {
        if j != pos {
            return Err(ConfigError::at(e.line, format!("{prefix}[{j}] without {prefix}[{pos}]")));
        }
    }
    Ok(found.into_values().collect())
}

fn field_from(e: &Entry, key: &str, circle: bool) -> Result<ScalarField, ConfigError> {
    let c = parse_list(e, key)?;
    if !circle {
        return Ok(ScalarField::poly(&c));
    }
    // c0, cos1, sin1, cos2, sin2, ...
    let mut cos = vec![c[0]];
    let mut sin = vec![0.0];
    for pair in c[1..].chunks(2) {
        cos.push(pair[0]);
        sin.push(pair.get(1).copied().unwrap_or(0.0));
    }
    Ok(ScalarField::Trig(TrigPoly::new(cos, sin)))
}

fn matrix_from(e: &Entry, key: &str) -> Result<Mat2, ConfigError> {
    let v = parse_list(e, key)?;
    if v.len() != 4 {
        return Err(ConfigError::at(e.line, format!("{key}: expected 4 entries b11, b12, b21, b22")));
    }
    Ok([[v[0], v[1]], [v[2], v[3]]])
}

const MODEL_KEYS: [&str; 16] = [
    "model", "a", "b", "sigma", "rho", "beta", "zeta1", "zeta2", "chi", "kappa", "state_space", "drift_coeffs",
    "q0_coeffs", "b0_matrix", "x0", "isotropic",
];

/// `[model]` as a model specification.
pub fn model_spec(cfg: &RawConfig) -> Result<ModelSpec, ConfigError> {
    let sec = cfg.require("model")?;
    check_keys(sec, "model", &MODEL_KEYS, &["noise_coeffs", "q_coeffs", "b_matrix"])?;
    let name_entry = sec
        .raw("model")
        .ok_or_else(|| ConfigError::at(sec.line, "[model] is missing `model`"))?;
    let g = |k: &str, d: f64| sec.f64_or(k, d);
    let line = name_entry.line;
    let spec = match name_entry.value.as_str() {
        "ou_quadratic" => ModelSpec::OuQuadratic { a: g("a", 1.0)?, sigma: g("sigma", 1.0)? },
        "ou_linear_degenerate" => ModelSpec::OuLinearDegenerate { a: g("a", 1.0)?, sigma: g("sigma", 1.0)? },
        "pitchfork_q2" => ModelSpec::PitchforkQ2 { a: g("a", 0.0)?, b: g("b", 1.0)?, sigma: g("sigma", 1.0)? },
        "pitchfork_q4" => ModelSpec::PitchforkQ4 { a: g("a", 0.0)?, b: g("b", 1.0)?, sigma: g("sigma", 1.0)? },
        "pitchfork_corr" => {
            let rho = g("rho", 0.0)?;
            if rho.abs() > 1.0 {
                let l = sec.raw("rho").map_or(line, |e| e.line);
                return Err(ConfigError::at(l, format!("rho must satisfy |rho| <= 1, got {rho}")));
            }
            ModelSpec::PitchforkCorr { a: g("a", 0.0)?, b: g("b", 1.0)?, sigma: g("sigma", 1.0)?, rho }
        }
        "langevin" => ModelSpec::Langevin {
            a: g("a", 1.0)?,
            b: g("b", 1.0)?,
            beta: g("beta", 1.0)?,
            sigma: g("sigma", 1.0)?,
        },
        "linear2d_projected" => {
            if sec.bool("isotropic")?.unwrap_or(false) {
                let s = g("sigma", 1.0)?;
                ModelSpec::Linear2dProjected {
                    b0: [[0.0; 2]; 2],
                    b: vec![[[s, 0.0], [0.0, s]]],
                }
            } else {
                let b0 = match sec.raw("b0_matrix") {
                    Some(e) => matrix_from(e, "b0_matrix")?,
                    None => [[0.0; 2]; 2],
                };
                let b = indexed_keys(sec, "b_matrix")?
                    .into_iter()
                    .map(|e| matrix_from(e, "b_matrix"))
                    .collect::<Result<Vec<_>, _>>()?;
                ModelSpec::Linear2dProjected { b0, b }
            }
        }
        "custom" => {
            let circle = match sec.str("state_space").unwrap_or("line") {
                "line" => false,
                "circle" => true,
                other => {
                    let l = sec.raw("state_space").map_or(line, |e| e.line);
                    return Err(ConfigError::at(l, format!("state_space must be line or circle, got `{other}`")));
                }
            };
            let drift = sec
                .raw("drift_coeffs")
                .ok_or_else(|| ConfigError::at(line, "custom model needs drift_coeffs"))?;
            let noise = indexed_keys(sec, "noise_coeffs")?
                .into_iter()
                .map(|e| field_from(e, "noise_coeffs", circle))
                .collect::<Result<Vec<_>, _>>()?;
            let q = indexed_keys(sec, "q_coeffs")?
                .into_iter()
                .map(|e| field_from(e, "q_coeffs", circle))
                .collect::<Result<Vec<_>, _>>()?;
            let q0 = match sec.raw("q0_coeffs") {
                Some(e) => field_from(e, "q0_coeffs", circle)?,
                None => ScalarField::zero(),
            };
            ModelSpec::Custom {
                state_space: if circle { StateSpace::Circle } else { StateSpace::Line },
                drift: field_from(drift, "drift_coeffs", circle)?,
                noise,
                q0,
                q,
            }
        }
        other => {
            return Err(ConfigError::at(
                line,
                format!("unknown model `{other}`; known: {}, custom", ModelSpec::CATALOG.join(", ")),
            ))
        }
    };
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub t: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub p_grid: Vec<f64>,
    pub x0: f64,
}

pub fn mc_config(cfg: &RawConfig) -> Result<McConfig, ConfigError> {
    let sec = cfg.require("mc")?;
    check_keys(sec, "mc", &["t", "n_paths", "n_steps", "dt", "seed", "p_grid", "x0"], &[])?;
    let t = sec.req_f64("t", "mc")?;
    if !(t > 0.0) {
        return Err(ConfigError::at(sec.raw("t").unwrap().line, format!("t must be positive, got {t}")));
    }
    let n_steps = match (sec.usize("n_steps")?, sec.f64("dt")?) {
        (Some(n), None) => n,
        (None, Some(dt)) if dt > 0.0 => (t / dt).round().max(1.0) as usize,
        (None, None) => (t / 0.01).round().max(1.0) as usize,
        _ => {
            let l = sec.raw("dt").map_or(sec.line, |e| e.line);
            return Err(ConfigError::at(l, "give either n_steps or a positive dt"));
        }
    };
    if n_steps == 0 {
        return Err(ConfigError::at(sec.raw("n_steps").unwrap().line, "n_steps must be at least 1"));
    }
    let n_paths = sec.usize("n_paths")?.unwrap_or(10_000);
    if n_paths < 2 {
        let l = sec.raw("n_paths").map_or(sec.line, |e| e.line);
        return Err(ConfigError::at(l, "n_paths must be at least 2"));
    }
    let p_grid = sec.list("p_grid")?.unwrap_or_else(|| vec![1.0]);
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ConfigError::at(sec.raw("p_grid").unwrap().line, "p_grid must be strictly increasing"));
    }
    Ok(McConfig {
        t,
        n_paths,
        n_steps,
        seed: sec.u64("seed")?.unwrap_or(0),
        p_grid,
        x0: sec.f64_or("x0", 0.0)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum WeightSetting {
    Fixed(WeightFamily, f64),
    Auto(WeightFamily),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralConfig {
    pub circle: bool,
    pub x_max: Option<f64>,
    pub n: usize,
    pub weight: WeightSetting,
    pub tol: f64,
    pub p_grid: Vec<f64>,
    pub eigenfunction: bool,
    pub refine: bool,
}

pub fn spectral_config(cfg: &RawConfig) -> Result<SpectralConfig, ConfigError> {
    let sec = cfg.require("spectral")?;
    check_keys(
        sec,
        "spectral",
        &["domain", "x_max", "n", "weight", "weight_param", "tol", "p_grid", "eigenfunction", "refine"],
        &[],
    )?;
    let circle = match sec.str("domain").unwrap_or("interval") {
        "interval" => false,
        "circle" => true,
        other => {
            return Err(ConfigError::at(
                sec.raw("domain").unwrap().line,
                format!("domain must be interval or circle, got `{other}`"),
            ))
        }
    };
    let n = sec.usize("n")?.unwrap_or(if circle { 256 } else { 1200 });
    if n < 16 {
        return Err(ConfigError::at(sec.raw("n").unwrap().line, format!("n must be at least 16, got {n}")));
    }
    let x_max = sec.f64("x_max")?;
    if let Some(x) = x_max {
        if !(x > 0.0) {
            return Err(ConfigError::at(sec.raw("x_max").unwrap().line, "x_max must be positive"));
        }
    }
    let family = match sec.raw("weight") {
        Some(e) => WeightFamily::parse(&e.value)
            .ok_or_else(|| ConfigError::at(e.line, format!("unknown weight family `{}`", e.value)))?,
        None if circle => WeightFamily::Unit,
        None => WeightFamily::ExpQuadratic,
    };
    let weight = match sec.raw("weight_param") {
        None => WeightSetting::Auto(family),
        Some(e) if e.value == "auto" => WeightSetting::Auto(family),
        Some(e) => {
            let v = parse_f64(&e.value).map_err(|m| ConfigError::at(e.line, format!("weight_param: {m}")))?;
            if !(v > 0.0) {
                return Err(ConfigError::at(e.line, "weight_param must be positive"));
            }
            WeightSetting::Fixed(family, v)
        }
    };
    let tol = sec.f64_or("tol", 1e-11)?;
    if !(tol > 0.0) {
        return Err(ConfigError::at(sec.raw("tol").unwrap().line, "tol must be positive"));
    }
    let p_grid = sec.list("p_grid")?.unwrap_or_else(|| vec![1.0]);
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ConfigError::at(sec.raw("p_grid").unwrap().line, "p_grid must be strictly increasing"));
    }
    Ok(SpectralConfig {
        circle,
        x_max,
        n,
        weight,
        tol,
        p_grid,
        eigenfunction: sec.bool("eigenfunction")?.unwrap_or(false),
        refine: sec.bool("refine")?.unwrap_or(false),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsConfig {
    pub p_ladder: Vec<f64>,
    pub a_grid: Option<Vec<f64>>,
    pub family: WeightFamily,
    pub weight_param: Option<f64>,
    pub scan_x_max: f64,
    pub scan_n: usize,
    pub ladder: Vec<f64>,
    pub scenario: Option<String>,
    pub rho: Option<f64>,
}

pub fn bounds_config(cfg: &RawConfig) -> Result<BoundsConfig, ConfigError> {
    let sec = cfg.require("bounds")?;
    check_keys(
        sec,
        "bounds",
        &["p_ladder", "a_grid", "family", "weight_param", "scan_x_max", "scan_n", "ladder", "scenario", "rho"],
        &[],
    )?;
    let family = match sec.raw("family") {
        Some(e) => WeightFamily::parse(&e.value)
            .ok_or_else(|| ConfigError::at(e.line, format!("unknown weight family `{}`", e.value)))?,
        None => WeightFamily::ExpQuadratic,
    };
    let p_ladder = sec.list("p_ladder")?.unwrap_or_else(|| vec![1.0]);
    Ok(BoundsConfig {
        ladder: sec.list("ladder")?.unwrap_or_else(|| p_ladder.clone()),
        p_ladder,
        a_grid: sec.list("a_grid")?,
        family,
        weight_param: sec.f64("weight_param")?,
        scan_x_max: sec.f64_or("scan_x_max", 10.0)?,
        scan_n: sec.usize("scan_n")?.unwrap_or(2001).max(3),
        scenario: sec.str("scenario").map(str::to_string),
        rho: sec.f64("rho")?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub s_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub beta_exp: f64,
    pub p: f64,
    pub lambda_ref: Option<f64>,
    pub variance_ref: Option<f64>,
}

pub fn analysis_config(cfg: &RawConfig) -> Result<AnalysisConfig, ConfigError> {
    let sec = cfg.require("analysis")?;
    check_keys(sec, "analysis", &["s_grid", "p_grid", "beta_exp", "p", "lambda_ref", "variance_ref"], &[])?;
    let beta_exp = sec.f64_or("beta_exp", 0.75)?;
    if !(beta_exp > 0.5 && beta_exp < 1.0) {
        return Err(ConfigError::at(sec.raw("beta_exp").unwrap().line, "beta_exp must lie in (0.5, 1)"));
    }
    Ok(AnalysisConfig {
        s_grid: sec.list("s_grid")?.unwrap_or_else(|| vec![0.0]),
        p_grid: sec.list("p_grid")?.unwrap_or_else(|| (0..=40).map(|k| -1.0 + 0.05 * k as f64).collect()),
        beta_exp,
        p: sec.f64_or("p", 0.5)?,
        lambda_ref: sec.f64("lambda_ref")?,
        variance_ref: sec.f64("variance_ref")?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub directory: Option<String>,
    pub svg: bool,
}

pub fn output_config(cfg: &RawConfig) -> Result<OutputConfig, ConfigError> {
    let Some(sec) = cfg.section("output") else {
        return Ok(OutputConfig { directory: None, svg: true });
    };
    check_keys(sec, "output", &["directory", "formats"], &[])?;
    let svg = match sec.raw("formats") {
        None => true,
        Some(e) => {
            let mut svg = false;
            for f in e.value.split(',').map(str::trim) {
                match f {
                    "csv" => {}
                    "svg" => svg = true,
                    other => return Err(ConfigError::at(e.line, format!("unknown format `{other}`"))),
                }
            }
            svg
        }
    };
    Ok(OutputConfig {
        directory: sec.str("directory").map(str::to_string),
        svg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_model_section() {
        let cfg = RawConfig::parse("[mc]\nt = 1\n").unwrap();
        let e = model_spec(&cfg).unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(e.message.contains("[model]"));
    }

    #[test]
    fn line_anchored_errors() {
        let e = RawConfig::parse("[model]\nmodel = ou_quadratic\nbogus line\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = RawConfig::parse("a = 1\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        let cfg = RawConfig::parse("[model]\nmodel = pitchfork_corr\n\nrho = 1.5\n").unwrap();
        assert_eq!(model_spec(&cfg).unwrap_err().line, Some(4));
        let cfg = RawConfig::parse("[mc]\nt = 1\nn_steps = x\n").unwrap();
        assert_eq!(mc_config(&cfg).unwrap_err().line, Some(3));
        let cfg = RawConfig::parse("[spectral]\nn = 8\n").unwrap();
        assert_eq!(spectral_config(&cfg).unwrap_err().line, Some(2));
    }

    #[test]
    fn ignored_keys_and_comments() {
        let text = "# header\n[model]\nmodel = pitchfork_q2 ; inline\nzeta1 = 3\nchi = 1\na = 0.5\n";
        let cfg = RawConfig::parse(text).unwrap();
        assert_eq!(model_spec(&cfg).unwrap(), ModelSpec::PitchforkQ2 { a: 0.5, b: 1.0, sigma: 1.0 });
    }

    #[test]
    fn custom_and_ranges() {
        let text = "[model]\nmodel = custom\ndrift_coeffs = 0, -1\nnoise_coeffs[0] = 1\nq0_coeffs = 0, 0, 1\n[mc]\nt = 2\ndt = 0.5\np_grid = -1:0.5:1\n";
        let cfg = RawConfig::parse(text).unwrap();
        match model_spec(&cfg).unwrap() {
            ModelSpec::Custom { drift, noise, q, .. } => {
                assert_eq!(drift, ScalarField::poly(&[0.0, -1.0]));
                assert_eq!(noise.len(), 1);
                assert!(q.is_empty());
            }
            other => panic!("{other:?}"),
        }
        let mc = mc_config(&cfg).unwrap();
        assert_eq!(mc.n_steps, 4);
        assert_eq!(mc.p_grid, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn gaps_in_indexed_keys() {
        let cfg = RawConfig::parse("[model]\nmodel = custom\ndrift_coeffs = 0\nnoise_coeffs[1] = 1\n").unwrap();
        assert_eq!(model_spec(&cfg).unwrap_err().line, Some(4));
    }

    #[test]
    fn seed_override() {
        let cfg = RawConfig::parse("[mc]\nt = 1\nseed = 3\n").unwrap().with_seed(9);
        assert_eq!(mc_config(&cfg).unwrap().seed, 9);
    }
}
