//! JSON run configuration. Command-line flags override individual fields.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use lppl_core::forecast::DEFAULT_LEAD_MONTHS;
use lppl_core::rolling::{ExtrapolationMethod, DEFAULT_SPAN, DEFAULT_STEP, DEFAULT_THRESHOLD_DAYS};
use lppl_core::{FitConfig, ModelParams, Period, Space};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::Columns;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    #[default]
    Lppl,
    Hyper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Price CSV.
    pub input: Option<PathBuf>,
    pub columns: Columns,
    /// Optional `period,index` CSV; when present prices are deflated to `base_period`.
    pub deflator: Option<PathBuf>,
    /// Deflation base; defaults to the deflator's first period.
    pub base_period: Option<Period>,
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub model: ModelChoice,
    pub fit: FitConfig,
    pub rolling: RollingSpec,
    pub forecast: ForecastOptions,
    pub synth: Option<SynthConfig>,
    pub out: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            columns: Columns::default(),
            deflator: None,
            base_period: None,
            window_start: None,
            window_end: None,
            model: ModelChoice::Lppl,
            fit: FitConfig::default(),
            rolling: RollingSpec::default(),
            forecast: ForecastOptions::default(),
            synth: None,
            out: PathBuf::from("out"),
            seed: 0,
        }
    }
}

/// End-date sweep for `roll`. Explicit `end_dates` win over the stepped range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollingSpec {
    /// First end date; defaults to the earliest one with a full minimum window.
    pub first_end: Option<NaiveDate>,
    /// Last end date; defaults to the window end or the last observation.
    pub last_end: Option<NaiveDate>,
    pub end_dates: Option<Vec<NaiveDate>>,
    /// Step in observations between successive end dates.
    pub step: usize,
    pub warm_start: bool,
    pub threshold_days: f64,
    pub span: usize,
    pub methods: Vec<ExtrapolationMethod>,
}

impl Default for RollingSpec {
    fn default() -> Self {
        Self {
            first_end: None,
            last_end: None,
            end_dates: None,
            step: DEFAULT_STEP,
            warm_start: false,
            threshold_days: DEFAULT_THRESHOLD_DAYS,
            span: DEFAULT_SPAN,
            methods: ExtrapolationMethod::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastSource {
    /// Rolling extrapolation when present, else a single fit.
    #[default]
    Auto,
    Fit,
    Rolling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastOptions {
    pub lead_months: f64,
    pub source: ForecastSource,
    /// Trailing converged sweep points whose `A` spans the price range;
    /// defaults to the rolling span.
    pub a_span: Option<usize>,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        Self {
            lead_months: DEFAULT_LEAD_MONTHS,
            source: ForecastSource::Auto,
            a_span: None,
        }
    }
}

/// Synthetic series over `count` weekdays from `start`, or explicit `dates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub dates: Option<Vec<NaiveDate>>,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// Flag values layered over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub deflator: Option<PathBuf>,
    pub window_start: Option<NaiveDate>,
    pub window_end: Option<NaiveDate>,
    pub space: Option<Space>,
    pub model: Option<ModelChoice>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Read a config file. Relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(Error::json(path.display().to_string()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        cfg.input.as_mut().map(rebase);
        cfg.deflator.as_mut().map(rebase);
        rebase(&mut cfg.out);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.input {
            self.input = Some(v);
        }
        if let Some(v) = o.deflator {
            self.deflator = Some(v);
        }
        if let Some(v) = o.window_start {
            self.window_start = Some(v);
        }
        if let Some(v) = o.window_end {
            self.window_end = Some(v);
        }
        if let Some(v) = o.space {
            self.fit.space = v;
        }
        if let Some(v) = o.model {
            self.model = v;
        }
        if let Some(v) = o.out {
            self.out = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        if let (Some(s), Some(e)) = (self.window_start, self.window_end) {
            if s > e {
                return Err(Error::Config(format!(
                    "window start {s} is after window end {e}"
                )));
            }
        }
        let r = &self.rolling;
        if r.step == 0 || r.span == 0 {
            return Err(Error::Config(
                "rolling step and span must be positive".into(),
            ));
        }
        if !(r.threshold_days >= 0.0) {
            return Err(Error::Config(
                "rolling threshold_days must be non-negative".into(),
            ));
        }
        if r.methods.is_empty() {
            return Err(Error::Config(
                "at least one extrapolation method is needed".into(),
            ));
        }
        let lead = self.forecast.lead_months;
        if !(lead >= 0.0 && lead.is_finite()) {
            return Err(Error::Config(format!(
                "lead_months {lead} must be finite and non-negative"
            )));
        }
        if self.forecast.a_span == Some(0) {
            return Err(Error::Config("forecast a_span must be positive".into()));
        }
        Ok(())
    }

    /// Canonical JSON of everything that shapes results, without file locations.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.input = None;
        c.deflator = None;
        c.out = PathBuf::new();
        serde_json::to_string(&c).expect("config serializes")
    }
}
