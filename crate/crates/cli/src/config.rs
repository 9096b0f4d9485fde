use std::path::{Path, PathBuf};

use catkit::catability::OptimizerConfig;
use catkit::fock::{required_cutoff, DEFAULT_GUARD_BAND};
use catkit::FockSpace;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub algebra_tol: f64,
    pub trunc_tol: f64,
    pub opt_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra_tol: 1e-12,
            trunc_tol: 1e-10,
            opt_tol: 1e-9,
        }
    }
}

/// Resolved run configuration. `n_cut = None` picks the adequacy cutoff of
/// each computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_cut: Option<usize>,
    pub guard_band: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub optimizer: OptimizerConfig,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_cut: None,
            guard_band: DEFAULT_GUARD_BAND,
            seed: 42,
            tolerances: Tolerances::default(),
            optimizer: OptimizerConfig::default(),
            format: Format::Csv,
            out: None,
        }
    }
}

/// Config-file document; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n_cut: Option<usize>,
    guard_band: Option<usize>,
    seed: Option<u64>,
    tolerances: Option<PartialTolerances>,
    optimizer: Option<OptimizerConfig>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialTolerances {
    algebra_tol: Option<f64>,
    trunc_tol: Option<f64>,
    opt_tol: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Fock cutoff; defaults to the adequacy rule for each computation
    #[arg(long, global = true)]
    pub ncut: Option<usize>,
    #[arg(long, global = true)]
    pub guard: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tol_algebra: Option<f64>,
    #[arg(long, global = true)]
    pub tol_trunc: Option<f64>,
    /// Simplex standard-deviation tolerance
    #[arg(long, global = true)]
    pub tol_opt: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file
    #[arg(long, global = true, env = "CATKIT_CONFIG")]
    pub config: Option<PathBuf>,
}

impl RunConfig {
    /// Flags over config file over defaults.
    pub fn resolve(args: &GlobalArgs) -> Result<Self, Failure> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            cfg.apply_file(load_file(path)?);
        }
        set(&mut cfg.n_cut, args.ncut.map(Some));
        set(&mut cfg.guard_band, args.guard);
        set(&mut cfg.seed, args.seed);
        set(&mut cfg.tolerances.algebra_tol, args.tol_algebra);
        set(&mut cfg.tolerances.trunc_tol, args.tol_trunc);
        set(&mut cfg.tolerances.opt_tol, args.tol_opt);
        set(&mut cfg.format, args.format);
        set(&mut cfg.out, args.out.clone().map(Some));
        cfg.optimizer.tol = cfg.tolerances.opt_tol;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: FileConfig) {
        set(&mut self.n_cut, file.n_cut.map(Some));
        set(&mut self.guard_band, file.guard_band);
        set(&mut self.seed, file.seed);
        if let Some(opt) = file.optimizer {
            self.optimizer = opt;
            self.tolerances.opt_tol = opt.tol;
        }
        if let Some(t) = file.tolerances {
            set(&mut self.tolerances.algebra_tol, t.algebra_tol);
            set(&mut self.tolerances.trunc_tol, t.trunc_tol);
            set(&mut self.tolerances.opt_tol, t.opt_tol);
        }
        set(&mut self.format, file.format);
        set(&mut self.out, file.out.map(Some));
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let t = &self.tolerances;
        for (name, v) in [("algebra_tol", t.algebra_tol), ("trunc_tol", t.trunc_tol), ("opt_tol", t.opt_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Failure::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        self.optimizer.validate().map_err(|e| Failure::Usage(e.to_string()))
    }

    /// Fock space for coherent amplitudes up to `amplitude`. A user-fixed
    /// cutoff that is too small is a truncation error.
    pub fn space_for(&self, amplitude: f64, what: &str) -> Result<FockSpace, Failure> {
        let n_cut = self.n_cut.unwrap_or_else(|| required_cutoff(amplitude) + self.guard_band);
        let space = FockSpace::new(n_cut, self.guard_band).map_err(Failure::from_core)?;
        space.check_adequate(amplitude, what).map_err(Failure::from_core)?;
        Ok(space)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn load_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))
}
