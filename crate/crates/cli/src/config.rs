use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use curvelab_core::nets::FamilyParams;
use curvelab_core::triples::{EstimatorSettings, Mode};
use curvelab_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Det,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalArg {
    Global,
    Multires,
    Localized,
    LocalizedMultires,
    Hahlomaa,
    LargeBalls,
}

/// Every option of every command. A `--config` JSON file supplies defaults,
/// flags on the command line win.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Point cloud (.csv) or explicit metric (.json).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Curve CSV (optional first line `closed` / `open`).
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Generator spec such as `circle:1:360` or `koch:4`.
    #[arg(long = "gen")]
    #[serde(rename = "gen")]
    pub generator: Option<String>,

    /// Family constant (ball radius A * 2^-n), or the comparability constant
    /// for the Hahlomaa sum.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[arg(long)]
    pub nmin: Option<i32>,
    #[arg(long)]
    pub nmax: Option<i32>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub nested: Option<bool>,

    /// Samples along the curve.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest deterministic triple count before switching to Monte Carlo.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub mc_samples: Option<u64>,

    #[arg(long, value_enum)]
    pub functional: Option<FunctionalArg>,
    /// Curve parameter of the centre of a localized evaluation.
    #[arg(long)]
    pub at: Option<f64>,
    /// Radius of a localized evaluation.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    /// Point id of the Hahlomaa ball centre.
    #[arg(long)]
    pub center: Option<usize>,
    /// Tour scale n (net epsilon 2^-n).
    #[arg(long)]
    pub scale: Option<i32>,
    /// Three point ids `i,j,k` for `curvature`.
    #[arg(long)]
    pub triple: Option<String>,

    /// JSON report (or data file for `generate`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-ball CSV table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG picture (planar inputs only).
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

macro_rules! prefer {
    ($a:expr, $b:expr, $($f:ident),*) => {
        RunConfig { $($f: $a.$f.or($b.$f)),* }
    };
}

impl RunConfig {
    /// `self` overrides `file`.
    pub fn over(self, file: RunConfig) -> RunConfig {
        prefer!(
            self, file, input, curve, generator, a, nmin, nmax, nested, m, mode, seed, cap, mc_samples,
            functional, at, radius, center, scale, triple, out, csv, svg
        )
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let sources = [self.input.is_some(), self.curve.is_some(), self.generator.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Usage(
                "exactly one input source is required: --input, --curve or --gen".into(),
            ));
        }
        if let Some(a) = self.a {
            if !(a > 1.0) {
                return Err(Error::Usage(format!("--A must exceed 1, got {a}")));
            }
        }
        if self.mode == Some(ModeArg::Mc) && self.seed.is_none() {
            return Err(Error::Usage("--seed is required in Monte Carlo mode".into()));
        }
        Ok(())
    }

    /// Fills the defaults a command will use, so reports record them.
    pub fn resolved(mut self, command: &str) -> RunConfig {
        let d = EstimatorSettings::default();
        let triple_stat = command == "curvature"
            || (command == "verify" && self.functional == Some(FunctionalArg::Hahlomaa))
            || (command == "report" && self.curve.is_none() && self.generator.as_deref().map_or(true, |g| g.starts_with("cantor")));
        if self.a.is_none() && !triple_stat {
            self.a = Some(2.0);
        }
        if command == "verify" {
            self.functional.get_or_insert(FunctionalArg::Global);
        }
        self.m.get_or_insert(200);
        self.nested.get_or_insert(false);
        self.mode.get_or_insert(ModeArg::Det);
        self.seed.get_or_insert(d.seed);
        self.cap.get_or_insert(d.triple_cap);
        self.mc_samples.get_or_insert(d.mc_samples);
        self
    }

    pub fn samples(&self) -> usize {
        self.m.unwrap_or(200)
    }

    pub fn family(&self) -> FamilyParams {
        FamilyParams {
            a: self.a.unwrap_or(2.0),
            n_min: self.nmin,
            n_max: self.nmax,
            nested: self.nested.unwrap_or(false),
            ..FamilyParams::default()
        }
    }

    pub fn estimator(&self) -> EstimatorSettings {
        let mut s = EstimatorSettings::default();
        if self.mode == Some(ModeArg::Mc) {
            s.mode = Mode::Mc;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(cap) = self.cap {
            s.triple_cap = cap;
        }
        if let Some(n) = self.mc_samples {
            s.mc_samples = n;
        }
        s
    }
}
