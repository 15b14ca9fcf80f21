//! Flat `key = value` run configuration with `[section]` headers.
//!
//! Every key has a default; a file only lists what it changes. Unknown
//! sections or keys are rejected so that typos fail loudly.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use spoofeval::gmm::VarianceFloor;
use spoofeval::{CostModel, CqccConfig, EmConfig, LfccConfig, LrOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontendKind {
    Cqcc,
    Lfcc,
}

impl FrontendKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cqcc" => Ok(Self::Cqcc),
            "lfcc" => Ok(Self::Lfcc),
            other => bail!("unknown frontend `{other}` (expected cqcc or lfcc)"),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cqcc => "cqcc",
            Self::Lfcc => "lfcc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frontend: FrontendKind,
    pub cqcc: CqccConfig,
    pub lfcc: LfccConfig,
    pub cost: CostModel<f64>,
    pub components: usize,
    pub em: EmConfig,
    pub fusion: LrOptions,
    pub normalize: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frontend: FrontendKind::Cqcc,
            cqcc: CqccConfig::default(),
            lfcc: LfccConfig::default(),
            cost: CostModel::default(),
            components: 512,
            em: EmConfig::default(),
            fusion: LrOptions::default(),
            normalize: false,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| anyhow::anyhow!("bad value `{value}` for `{key}`"))
}

fn float(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value)?;
    if !v.is_finite() {
        bail!("`{key}` must be finite");
    }
    Ok(v)
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("bad boolean `{value}` for `{key}`"),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_owned();
                if !["frontend", "cqcc", "lfcc", "cost", "em", "fusion"].contains(&section.as_str()) {
                    bail!("line {}: unknown section [{section}]", i + 1);
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            cfg.set(&section, key.trim(), value.trim()).with_context(|| format!("line {}", i + 1))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("frontend", "kind") => self.frontend = FrontendKind::parse(value)?,
            ("cqcc", "f_min") => self.cqcc.f_min = float(key, value)?,
            ("cqcc", "f_max") => self.cqcc.f_max = float(key, value)?,
            ("cqcc", "bins_per_octave") => self.cqcc.bins_per_octave = num(key, value)?,
            ("cqcc", "resample_period") => self.cqcc.resample_period = num(key, value)?,
            ("cqcc", "n_static") => self.cqcc.n_static = num(key, value)?,
            ("cqcc", "delta_half_window") => self.cqcc.delta_half_window = num(key, value)?,
            ("lfcc", "win_ms") => self.lfcc.win_ms = float(key, value)?,
            ("lfcc", "hop_ms") => self.lfcc.hop_ms = float(key, value)?,
            ("lfcc", "n_fft") => self.lfcc.n_fft = num(key, value)?,
            ("lfcc", "f_min") => self.lfcc.f_min = float(key, value)?,
            ("lfcc", "f_max") => self.lfcc.f_max = float(key, value)?,
            ("lfcc", "n_filters") => self.lfcc.n_filters = num(key, value)?,
            ("lfcc", "n_static") => self.lfcc.n_static = num(key, value)?,
            ("lfcc", "delta_half_window") => self.lfcc.delta_half_window = num(key, value)?,
            ("cost", "p_tar") => self.cost.p_tar = float(key, value)?,
            ("cost", "p_non") => self.cost.p_non = float(key, value)?,
            ("cost", "p_spoof") => self.cost.p_spoof = float(key, value)?,
            ("cost", "c_miss") => self.cost.c_miss = float(key, value)?,
            ("cost", "c_fa") => self.cost.c_fa = float(key, value)?,
            ("cost", "c_fa_spoof") => self.cost.c_fa_spoof = float(key, value)?,
            ("em", "components") => self.components = num(key, value)?,
            ("em", "max_iters") => self.em.max_iters = num(key, value)?,
            ("em", "rel_tol") => self.em.rel_tol = float(key, value)?,
            ("em", "var_floor_rel") => self.em.var_floor = VarianceFloor::RelativeToGlobal(float(key, value)?),
            ("em", "var_floor_abs") => self.em.var_floor = VarianceFloor::Absolute(float(key, value)?),
            ("em", "seed") => self.em.seed = num(key, value)?,
            ("fusion", "prior") => self.fusion.prior = float(key, value)?,
            ("fusion", "l2") => self.fusion.l2 = float(key, value)?,
            ("fusion", "max_iters") => self.fusion.max_iters = num(key, value)?,
            ("fusion", "grad_tol") => self.fusion.grad_tol = float(key, value)?,
            ("fusion", "normalize") => self.normalize = boolean(key, value)?,
            ("", _) => bail!("key `{key}` outside any section"),
            _ => bail!("unknown key `{key}` in [{section}]"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.cost.validate()?;
        if self.components == 0 {
            bail!("[em] components must be >= 1");
        }
        if self.em.max_iters == 0 || !(self.em.rel_tol >= 0.0) {
            bail!("[em] needs max_iters >= 1 and rel_tol >= 0");
        }
        if !(self.fusion.prior > 0.0 && self.fusion.prior < 1.0) {
            bail!("[fusion] prior must lie in (0, 1)");
        }
        Ok(())
    }

    /// Complete configuration, every key written out.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.cqcc;
        let l = &self.lfcc;
        let k = &self.cost;
        let _ = writeln!(out, "[frontend]\nkind = {}\n", self.frontend.as_str());
        let _ = writeln!(
            out,
            "[cqcc]\nf_min = {:?}\nf_max = {:?}\nbins_per_octave = {}\nresample_period = {}\nn_static = {}\ndelta_half_window = {}\n",
            c.f_min, c.f_max, c.bins_per_octave, c.resample_period, c.n_static, c.delta_half_window
        );
        let _ = writeln!(
            out,
            "[lfcc]\nwin_ms = {:?}\nhop_ms = {:?}\nn_fft = {}\nf_min = {:?}\nf_max = {:?}\nn_filters = {}\nn_static = {}\ndelta_half_window = {}\n",
            l.win_ms, l.hop_ms, l.n_fft, l.f_min, l.f_max, l.n_filters, l.n_static, l.delta_half_window
        );
        let _ = writeln!(
            out,
            "[cost]\np_tar = {:?}\np_non = {:?}\np_spoof = {:?}\nc_miss = {:?}\nc_fa = {:?}\nc_fa_spoof = {:?}\n",
            k.p_tar, k.p_non, k.p_spoof, k.c_miss, k.c_fa, k.c_fa_spoof
        );
        let floor = match self.em.var_floor {
            VarianceFloor::RelativeToGlobal(v) => format!("var_floor_rel = {v:?}"),
            VarianceFloor::Absolute(v) => format!("var_floor_abs = {v:?}"),
        };
        let _ = writeln!(
            out,
            "[em]\ncomponents = {}\nmax_iters = {}\nrel_tol = {:?}\n{floor}\nseed = {}\n",
            self.components, self.em.max_iters, self.em.rel_tol, self.em.seed
        );
        let f = &self.fusion;
        let _ = write!(
            out,
            "[fusion]\nprior = {:?}\nl2 = {:?}\nmax_iters = {}\ngrad_tol = {:?}\nnormalize = {}\n",
            f.prior, f.l2, f.max_iters, f.grad_tol, self.normalize
        );
        out
    }
}
