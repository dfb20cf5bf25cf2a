use std::path::{Path, PathBuf};

use crate::allocation::{Scheme, SchemeParams};
use crate::codec::MatrixDims;
use crate::error::{Error, Result};
use crate::simkernel::DEFAULT_SLOWDOWN;
use crate::verify::measure_rate;

/// Worker or master throughput in multiply-adds per second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateSetting {
    Fixed(f64),
    /// Benchmark a dense multiply on this host.
    Measured,
    /// Decode rate only: reuse the worker rate.
    SameAsBase,
}

impl RateSetting {
    fn parse(value: &str, allow_base: bool) -> Result<Self> {
        match value {
            "measured" => Ok(RateSetting::Measured),
            "base" if allow_base => Ok(RateSetting::SameAsBase),
            v => {
                let rate: f64 = parse_num(v)?;
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::Config(format!("rate must be positive, got {v}")));
                }
                Ok(RateSetting::Fixed(rate))
            }
        }
    }

    fn render(&self) -> String {
        match self {
            RateSetting::Fixed(r) => r.to_string(),
            RateSetting::Measured => "measured".into(),
            RateSetting::SameAsBase => "base".into(),
        }
    }
}

/// Dims used when a rate is `measured`.
pub const CALIBRATION_DIMS: MatrixDims = MatrixDims { u: 192, w: 192, v: 192 };

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dims: MatrixDims,
    pub cec: SchemeParams,
    pub mlcec: SchemeParams,
    pub bicec: SchemeParams,
    pub n_sweep: Vec<usize>,
    pub trials: usize,
    pub straggler_prob: f64,
    pub slowdown: f64,
    pub base_rate: RateSetting,
    pub decode_rate: RateSetting,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub schemes: Vec<Scheme>,
    pub notice_delay: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: MatrixDims { u: 2400, w: 2400, v: 2400 },
            cec: SchemeParams { scheme: Scheme::Cec, k: 10, s: 20, n_max: 40, n_min: 20 },
            mlcec: SchemeParams { scheme: Scheme::Mlcec, k: 10, s: 20, n_max: 40, n_min: 20 },
            bicec: SchemeParams { scheme: Scheme::Bicec, k: 800, s: 80, n_max: 40, n_min: 20 },
            n_sweep: (20..=40).step_by(2).collect(),
            trials: 20,
            straggler_prob: 0.5,
            slowdown: DEFAULT_SLOWDOWN,
            base_rate: RateSetting::Fixed(1e9),
            decode_rate: RateSetting::SameAsBase,
            seed: 1,
            output_dir: PathBuf::from("results"),
            schemes: Scheme::ALL.to_vec(),
            notice_delay: 0.0,
        }
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("cannot parse '{value}': {e}")))
}

/// `20,22,24` or `20:40:2` (inclusive range with step).
fn parse_sweep(value: &str) -> Result<Vec<usize>> {
    if let Some((range, step)) = value.rsplit_once(':').filter(|_| value.matches(':').count() == 2) {
        let (lo, hi) = range.split_once(':').expect("two colons");
        let (lo, hi, step): (usize, usize, usize) = (parse_num(lo.trim())?, parse_num(hi.trim())?, parse_num(step.trim())?);
        if step == 0 || lo > hi {
            return Err(Error::Config(format!("bad sweep range '{value}'")));
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    value
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_num(t.trim()))
        .collect()
}

impl ExperimentConfig {
    pub fn params(&self, scheme: Scheme) -> &SchemeParams {
        match scheme {
            Scheme::Cec => &self.cec,
            Scheme::Mlcec => &self.mlcec,
            Scheme::Bicec => &self.bicec,
        }
    }

    /// Largest worker pool over all schemes.
    pub fn n_max(&self) -> usize {
        [self.cec.n_max, self.mlcec.n_max, self.bicec.n_max]
            .into_iter()
            .max()
            .unwrap_or(0)
    }

    /// Applies `key = value` lines over the current values. `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected 'key = value'", lineno + 1)));
            };
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "u" => self.dims.u = parse_num(value)?,
            "w" => self.dims.w = parse_num(value)?,
            "v" => self.dims.v = parse_num(value)?,
            "k_cec" => self.cec.k = parse_num(value)?,
            "s_cec" => self.cec.s = parse_num(value)?,
            "k_mlcec" => self.mlcec.k = parse_num(value)?,
            "s_mlcec" => self.mlcec.s = parse_num(value)?,
            "k_bicec" => self.bicec.k = parse_num(value)?,
            "s_bicec" => self.bicec.s = parse_num(value)?,
            "n_max" => {
                let n = parse_num(value)?;
                self.cec.n_max = n;
                self.mlcec.n_max = n;
                self.bicec.n_max = n;
            }
            "n_min" => {
                let n = parse_num(value)?;
                self.cec.n_min = n;
                self.mlcec.n_min = n;
                self.bicec.n_min = n;
            }
            "n_sweep" => self.n_sweep = parse_sweep(value)?,
            "trials" => self.trials = parse_num(value)?,
            "straggler_prob" => self.straggler_prob = parse_num(value)?,
            "slowdown" => self.slowdown = parse_num(value)?,
            "base_rate" => self.base_rate = RateSetting::parse(value, false)?,
            "decode_rate" => self.decode_rate = RateSetting::parse(value, true)?,
            "seed" => self.seed = parse_num(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "notice_delay" => self.notice_delay = parse_num(value)?,
            "schemes" => self.schemes = parse_schemes(value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |e: Error| Error::Config(e.to_string());
        MatrixDims::new(self.dims.u, self.dims.w, self.dims.v).map_err(cfg_err)?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.n_sweep.is_empty() {
            return Err(Error::Config("n_sweep is empty".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if !(0.0..=1.0).contains(&self.straggler_prob) {
            return Err(Error::Config("straggler_prob must lie in [0, 1]".into()));
        }
        if !(self.slowdown >= 1.0 && self.slowdown.is_finite()) {
            return Err(Error::Config("slowdown must be >= 1".into()));
        }
        if !(self.notice_delay >= 0.0 && self.notice_delay.is_finite()) {
            return Err(Error::Config("notice_delay must be >= 0".into()));
        }
        for &scheme in &self.schemes {
            let p = self.params(scheme);
            p.validate().map_err(cfg_err)?;
            if let Some(n) = self.n_sweep.iter().find(|&&n| n < p.n_min || n > p.n_max) {
                return Err(Error::Config(format!(
                    "{scheme}: sweep value N={n} outside [{}, {}]",
                    p.n_min, p.n_max
                )));
            }
            if scheme != Scheme::Bicec {
                if let Some(n) = self.n_sweep.iter().find(|&&n| n < p.s) {
                    return Err(Error::Config(format!(
                        "{scheme}: sweep value N={n} is below S={}",
                        p.s
                    )));
                }
            }
        }
        Ok(())
    }

    /// Worker and decode throughput after benchmarking `measured` settings.
    pub fn resolve_rates(&self) -> Result<(f64, f64)> {
        let measure = || measure_rate(&CALIBRATION_DIMS, 5);
        let base = match self.base_rate {
            RateSetting::Fixed(r) => r,
            RateSetting::Measured => measure()?,
            RateSetting::SameAsBase => {
                return Err(Error::Config("base_rate cannot refer to itself".into()))
            }
        };
        let decode = match self.decode_rate {
            RateSetting::Fixed(r) => r,
            RateSetting::Measured => measure()?,
            RateSetting::SameAsBase => base,
        };
        Ok((base, decode))
    }

    /// The config as `key = value` text accepted by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        let sweep: Vec<String> = self.n_sweep.iter().map(usize::to_string).collect();
        let schemes: Vec<&str> = self.schemes.iter().map(|s| s.as_str()).collect();
        format!(
            "u = {}\nw = {}\nv = {}\nk_cec = {}\ns_cec = {}\nk_mlcec = {}\ns_mlcec = {}\n\
             k_bicec = {}\ns_bicec = {}\nn_max = {}\nn_min = {}\nn_sweep = {}\ntrials = {}\n\
             straggler_prob = {}\nslowdown = {}\nbase_rate = {}\ndecode_rate = {}\nseed = {}\n\
             output_dir = {}\nschemes = {}\nnotice_delay = {}\n",
            self.dims.u,
            self.dims.w,
            self.dims.v,
            self.cec.k,
            self.cec.s,
            self.mlcec.k,
            self.mlcec.s,
            self.bicec.k,
            self.bicec.s,
            self.n_max(),
            self.cec.n_min,
            sweep.join(","),
            self.trials,
            self.straggler_prob,
            self.slowdown,
            self.base_rate.render(),
            self.decode_rate.render(),
            self.seed,
            self.output_dir.display(),
            schemes.join(","),
            self.notice_delay,
        )
    }
}

pub fn parse_schemes(value: &str) -> Result<Vec<Scheme>> {
    if value.trim() == "all" {
        return Ok(Scheme::ALL.to_vec());
    }
    value
        .split(',')
        .map(|s| s.parse::<Scheme>().map_err(|e| Error::Config(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_setup() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_sweep, vec![20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40]);
        assert_eq!((cfg.cec.k, cfg.cec.s), (10, 20));
        assert_eq!((cfg.bicec.k, cfg.bicec.s), (800, 80));
        assert_eq!(cfg.trials, 20);
    }

    #[test]
    fn key_value_text() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# small run\n u = 120 \nn_sweep = 20:24:2 # inline\nschemes = cec,bicec\ndecode_rate = 2e9\n",
        )
        .unwrap();
        assert_eq!(cfg.dims.u, 120);
        assert_eq!(cfg.n_sweep, vec![20, 22, 24]);
        assert_eq!(cfg.schemes, vec![Scheme::Cec, Scheme::Bicec]);
        assert_eq!(cfg.decode_rate, RateSetting::Fixed(2e9));
    }

    #[test]
    fn bad_config_lines() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.apply_text("nonsense").is_err());
        assert!(cfg.apply_text("colour = red").is_err());
        assert!(cfg.apply_text("trials = many").is_err());
        assert!(cfg.apply_text("base_rate = base").is_err());
        assert!(cfg.apply_text("base_rate = -1").is_err());
    }

    #[test]
    fn validation_catches_out_of_range_sweep() {
        let mut cfg = ExperimentConfig::default();
        cfg.n_sweep = vec![18];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn text_roundtrip() {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = 77;
        cfg.base_rate = RateSetting::Measured;
        let mut back = ExperimentConfig::default();
        back.apply_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }
}
