use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use blowup_core::fields::Part;
use blowup_core::numerics::Grading;
use blowup_core::profiles::{reference_k, ForcingProfile};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KSpec {
    ReferenceBump,
    Table(PathBuf),
}

impl KSpec {
    pub fn parse(raw: &str, base: &Path) -> Self {
        match raw.trim() {
            "bump" | "reference" | "reference_bump" => KSpec::ReferenceBump,
            path => KSpec::Table(base.join(path)),
        }
    }

    /// The forcing profile and any warnings raised while reading it.
    pub fn load(&self) -> Result<(ForcingProfile, Vec<String>)> {
        match self {
            KSpec::ReferenceBump => Ok((reference_k(), Vec::new())),
            KSpec::Table(path) => {
                let points = read_k_table(path)?;
                let (k, warnings) =
                    ForcingProfile::from_table(&points).with_context(|| format!("k table {}", path.display()))?;
                Ok((k, warnings))
            }
        }
    }
}

/// Two-column (r, k) CSV. A non-numeric first row is taken as a header;
/// blank lines and lines starting with '#' are skipped.
pub fn read_k_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading k table {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("k table {}", path.display()))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() != 2 {
            bail!(
                "k table {} line {line}: expected 2 columns, found {}",
                path.display(),
                fields.len()
            );
        }
        match (fields[0].parse::<f64>(), fields[1].parse::<f64>()) {
            (Ok(r), Ok(k)) => points.push((r, k)),
            _ if index == 0 => continue,
            _ => bail!(
                "k table {} line {line}: cannot parse {:?} as numbers",
                path.display(),
                fields.join(",")
            ),
        }
    }
    if points.is_empty() {
        bail!("k table {} has no data rows", path.display());
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Formats {
    pub fn parse(raw: &[String]) -> Result<Self> {
        let mut f = Formats {
            csv: false,
            json: false,
        };
        for item in raw.iter().flat_map(|s| s.split(',')) {
            match item.trim() {
                "csv" => f.csv = true,
                "json" => f.json = true,
                other => bail!("unknown format {other:?} (expected csv or json)"),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOverrides {
    pub theta: f64,
    pub n_r: usize,
    /// Defaults to (T − delta)/(4(n_r − 1)).
    pub dt: Option<f64>,
    /// Defaults to T/8.
    pub delta: Option<f64>,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub final_time: f64,
    #[serde(serialize_with = "part_number")]
    pub part: Part,
    pub k: KSpec,
    pub grid_n: usize,
    pub grading: Grading,
    #[serde(rename = "ladder_J")]
    pub ladder_j: u32,
    pub out: PathBuf,
    pub formats: Formats,
    pub oracle: OracleOverrides,
}

fn part_number<S: serde::Serializer>(part: &Part, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(match part {
        Part::One => 1,
        Part::Two => 2,
    })
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            final_time: 0.5,
            part: Part::One,
            k: KSpec::ReferenceBump,
            grid_n: 128,
            grading: Grading::Uniform,
            ladder_j: 12,
            out: PathBuf::from("out"),
            formats: Formats { csv: true, json: true },
            oracle: OracleOverrides {
                theta: 0.5,
                n_r: 128,
                dt: None,
                delta: None,
                levels: 3,
            },
        }
    }
}

/// Raw settings keyed by normalized name ("grid-n" and "grid_n" are the same key).
pub type Settings = BTreeMap<String, String>;

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Flat `key = value` text; `#` and `;` start comments and `[section]` lines
/// are ignored.
pub fn parse_ini(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, found {line:?}", i + 1);
        };
        out.insert(normalize_key(key), value.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| anyhow::anyhow!("{key} = {raw:?}: {e}"))
}

pub fn parse_part(raw: &str) -> Result<Part> {
    match raw.trim() {
        "1" | "one" => Ok(Part::One),
        "2" | "two" => Ok(Part::Two),
        other => bail!("part must be 1 or 2, got {other:?}"),
    }
}

/// "uniform" or "geometric:RATIO".
pub fn parse_grading(raw: &str) -> Result<Grading> {
    match raw.trim().split_once(':') {
        None if raw.trim() == "uniform" => Ok(Grading::Uniform),
        None if raw.trim() == "geometric" => Ok(Grading::Geometric { ratio: 0.85 }),
        Some(("geometric", ratio)) => Ok(Grading::Geometric {
            ratio: parse_value("grading", ratio.trim())?,
        }),
        _ => bail!("grading must be uniform or geometric[:RATIO], got {raw:?}"),
    }
}

impl RunConfig {
    /// Applies settings on top of `self`. Relative k table paths resolve
    /// against `base`.
    pub fn apply(&mut self, settings: &Settings, base: &Path) -> Result<()> {
        for (key, raw) in settings {
            let raw = raw.as_str();
            match key.as_str() {
                "t" => self.final_time = parse_value(key, raw)?,
                "part" => self.part = parse_part(raw)?,
                "k" => self.k = KSpec::parse(raw, base),
                "grid_n" => self.grid_n = parse_value(key, raw)?,
                "grading" => self.grading = parse_grading(raw)?,
                "ladder_j" => self.ladder_j = parse_value(key, raw)?,
                "out" => self.out = PathBuf::from(raw),
                "format" => self.formats = Formats::parse(&[raw.to_string()])?,
                "theta" => self.oracle.theta = parse_value(key, raw)?,
                "n_r" => self.oracle.n_r = parse_value(key, raw)?,
                "dt" => self.oracle.dt = Some(parse_value(key, raw)?),
                "delta" => self.oracle.delta = Some(parse_value(key, raw)?),
                "oracle_levels" => self.oracle.levels = parse_value(key, raw)?,
                other => bail!("unknown setting {other:?}"),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time > 0.0 && self.final_time <= 0.5) {
            bail!("T must lie in (0, 1/2], got {}", self.final_time);
        }
        if !(4..=52).contains(&self.ladder_j) {
            bail!("ladder-J must lie in 4..=52, got {}", self.ladder_j);
        }
        if self.grid_n < 4 {
            bail!("grid-n must be at least 4, got {}", self.grid_n);
        }
        if self.oracle.levels < 2 {
            bail!("the oracle study needs at least 2 levels");
        }
        if !self.formats.csv && !self.formats.json {
            bail!("at least one output format is required");
        }
        Ok(())
    }
}
