//! Experiment descriptions and their text format.
//!
//! The format is flat `key = value` lines grouped under `[section]` headers,
//! `#` starts a comment. Every key has a default; the table below is the
//! single source of those defaults.
//!
//! | section       | key                  | default                               |
//! |---------------|----------------------|---------------------------------------|
//! | `[array]`     | `mp`                 | 16                                    |
//! |               | `ms`                 | 16                                    |
//! |               | `tau_p`              | `ms`                                  |
//! | `[signal]`    | `n`                  | 100                                   |
//! |               | `cycles`             | 4                                     |
//! |               | `shape`              | `leading_one`                         |
//! |               | `noise_scale`        | 1                                     |
//! | `[sweep]`     | `snr_db`             | `-20, -15, -10, -5, 0, 5, 10`         |
//! |               | `trials`             | 1000                                  |
//! |               | `schemes`            | all four                              |
//! |               | `master_seed`        | 1                                     |
//! | `[channel]`   | `model`              | `rayleigh`                            |
//! | `[los]`       | `room`               | `100, 100, 10`                        |
//! |               | `primary_center`     | `0, 50, 5`                            |
//! |               | `primary_normal`     | `1, 0, 0`                             |
//! |               | `secondary_center`   | `50, 0, 5`                            |
//! |               | `secondary_normal`   | `0, 1, 0`                             |
//! |               | `primary_grid`       | near-square factorization of `mp`     |
//! |               | `secondary_grid`     | near-square factorization of `ms`     |
//! |               | `spacing_wavelengths`| 0.5                                   |
//! |               | `carrier_hz`         | 3.5e9                                 |
//! |               | `patch_gain_dbi`     | 6                                     |
//! |               | `patch_exponent`     | 2                                     |
//! |               | `front_to_back_db`   | 20                                    |
//! |               | `normalize`          | true                                  |
//! | `[offset]`    | `model`              | `uniform`                             |
//! |               | `low`, `high`        | -0.1, 0.1 (uniform only)              |
//! |               | `value`              | 0 (fixed only)                        |
//! | `[estimator]` | `search_halfwidth`   | 0.5                                   |
//! |               | `coarse_grid_points` | `auto` (8N)                           |
//! |               | `refine_tolerance`   | 1e-9                                  |
//! |               | `refine_max_iters`   | 100                                   |
//! | `[schedule]`  | `panels`             | 3                                     |
//! |               | `snr_db`             | 10                                    |
//! | `[drift]`     | `rate`               | 1e-4                                  |
//! |               | `jitter`             | 0                                     |
//! |               | `resync_threshold`   | 0.01                                  |
//! |               | `slots`              | 200                                   |
//! |               | `snr_db`             | 10                                    |
//! |               | `scheme`             | `beamsync`                            |
//!
//! A `[manifest]` section is accepted and ignored so run manifests can be
//! replayed as configs.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::channel::{near_square_grid, LosScene, PatchAntennaParams};
use crate::estimator::EstimatorConfig;
use crate::protocol::Scheme;
use crate::signal::WaveformShape;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    Rayleigh,
    Los(LosScene),
}

impl ChannelModel {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Rayleigh => "rayleigh",
            ChannelModel::Los(_) => "los",
        }
    }
}

/// How the true offset of each trial is chosen, in cycles per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffsetModel {
    Fixed(f64),
    Uniform { low: f64, high: f64 },
}

/// Sequential synchronization of several secondary panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub panels: usize,
    pub snr_db: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            panels: 3,
            snr_db: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftConfig {
    /// Deterministic drift of the offset per slot, cycles/sample.
    pub rate: f64,
    /// Standard deviation of the random-walk increment per slot.
    pub jitter: f64,
    pub resync_threshold: f64,
    pub slots: usize,
    pub snr_db: f64,
    pub scheme: Scheme,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            rate: 1e-4,
            jitter: 0.0,
            resync_threshold: 0.01,
            slots: 200,
            snr_db: 10.0,
            scheme: Scheme::BeamSync,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mp: usize,
    pub ms: usize,
    pub tau_p: usize,
    pub n: usize,
    pub cycles: u32,
    pub shape: WaveformShape,
    pub noise_scale: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub master_seed: u64,
    pub channel: ChannelModel,
    pub offset: OffsetModel,
    pub estimator: EstimatorConfig,
    pub schedule: ScheduleConfig,
    pub drift: DriftConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mp: 16,
            ms: 16,
            tau_p: 16,
            n: 100,
            cycles: 4,
            shape: WaveformShape::LeadingOne,
            noise_scale: 1.0,
            snr_grid_db: vec![-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0],
            trials: 1000,
            schemes: Scheme::ALL.to_vec(),
            master_seed: 1,
            channel: ChannelModel::Rayleigh,
            offset: OffsetModel::Uniform {
                low: -0.1,
                high: 0.1,
            },
            estimator: EstimatorConfig::default(),
            schedule: ScheduleConfig::default(),
            drift: DriftConfig::default(),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(key, msg));
        if self.mp == 0 {
            return bad("array.mp", "mp must be at least 1".into());
        }
        if self.ms == 0 {
            return bad("array.ms", "ms must be at least 1".into());
        }
        if self.tau_p < self.ms {
            return bad(
                "array.tau_p",
                format!("tau_p = {} is shorter than ms = {}", self.tau_p, self.ms),
            );
        }
        if self.n < 2 {
            return bad(
                "signal.n",
                format!(
                    "n = {}: the offset is not identifiable from fewer than 2 samples",
                    self.n
                ),
            );
        }
        if self.cycles == 0 || 2 * self.cycles as usize >= self.n {
            return bad(
                "signal.cycles",
                format!(
                    "cycles must lie in 1..{} for n = {}",
                    self.n.div_ceil(2),
                    self.n
                ),
            );
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return bad(
                "signal.noise_scale",
                "noise_scale must be finite and non-negative".into(),
            );
        }
        if self.snr_grid_db.is_empty() {
            return bad("sweep.snr_db", "the SNR grid is empty".into());
        }
        if let Some(v) = self.snr_grid_db.iter().find(|v| !v.is_finite()) {
            return bad("sweep.snr_db", format!("SNR value {v} is not finite"));
        }
        if self.trials == 0 {
            return bad("sweep.trials", "trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("sweep.schemes", "no schemes selected".into());
        }
        let unique: HashSet<_> = self.schemes.iter().collect();
        if unique.len() != self.schemes.len() {
            return bad("sweep.schemes", "a scheme is listed twice".into());
        }
        if let ChannelModel::Los(scene) = &self.channel {
            scene
                .validate(self.mp, self.ms)
                .map_err(|e| Error::config("channel.model", e.to_string()))?;
        }
        match self.offset {
            OffsetModel::Fixed(v) if !(-0.5..0.5).contains(&v) => {
                return bad("offset.value", format!("offset {v} outside [-0.5, 0.5)"));
            }
            OffsetModel::Uniform { low, high } if !(-0.5 <= low && low < high && high <= 0.5) => {
                return bad(
                    "offset.low",
                    format!("need -0.5 <= low < high <= 0.5, got [{low}, {high}]"),
                );
            }
            _ => {}
        }
        self.estimator
            .validate(self.n)
            .map_err(|e| Error::config("estimator.coarse_grid_points", e.to_string()))?;
        if self.schedule.panels == 0 {
            return bad("schedule.panels", "panels must be at least 1".into());
        }
        if !self.schedule.snr_db.is_finite() {
            return bad("schedule.snr_db", "schedule snr_db must be finite".into());
        }
        let d = &self.drift;
        if !(d.rate.is_finite() && d.jitter >= 0.0 && d.jitter.is_finite()) {
            return bad(
                "drift.rate",
                "drift rate and jitter must be finite, jitter non-negative".into(),
            );
        }
        if !(d.resync_threshold > 0.0) {
            return bad(
                "drift.resync_threshold",
                "resync_threshold must be positive".into(),
            );
        }
        if d.slots == 0 {
            return bad("drift.slots", "slots must be at least 1".into());
        }
        if !d.snr_db.is_finite() {
            return bad("drift.snr_db", "drift snr_db must be finite".into());
        }
        Ok(())
    }

    /// Parses and validates a config.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parser = Parser::default();
        let cfg = parser.run(text)?;
        cfg.validate().map_err(|e| match e {
            Error::Config {
                line: None,
                key,
                message,
            } => Error::Config {
                line: parser
                    .lines
                    .iter()
                    .find(|(k, _)| *k == key)
                    .map(|(_, l)| *l),
                key,
                message,
            },
            other => other,
        })?;
        Ok(cfg)
    }

    /// Canonical text form; `parse(render(c)) == c` for every valid `c`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
        let vec3 = |v: &[f64; 3]| list(v);
        let _ = writeln!(
            s,
            "[array]\nmp = {}\nms = {}\ntau_p = {}\n",
            self.mp, self.ms, self.tau_p
        );
        let _ = writeln!(
            s,
            "[signal]\nn = {}\ncycles = {}\nshape = {}\nnoise_scale = {}\n",
            self.n,
            self.cycles,
            self.shape.name(),
            fmt_f64(self.noise_scale)
        );
        let schemes: Vec<&str> = self.schemes.iter().map(|s| s.name()).collect();
        let _ = writeln!(
            s,
            "[sweep]\nsnr_db = {}\ntrials = {}\nschemes = {}\nmaster_seed = {}\n",
            list(&self.snr_grid_db),
            self.trials,
            schemes.join(", "),
            self.master_seed
        );
        let _ = writeln!(s, "[channel]\nmodel = {}\n", self.channel.name());
        if let ChannelModel::Los(scene) = &self.channel {
            let _ = writeln!(
                s,
                "[los]\nroom = {}\nprimary_center = {}\nprimary_normal = {}\nsecondary_center = {}\n\
                 secondary_normal = {}\nprimary_grid = {}, {}\nsecondary_grid = {}, {}\n\
                 spacing_wavelengths = {}\ncarrier_hz = {}\npatch_gain_dbi = {}\npatch_exponent = {}\n\
                 front_to_back_db = {}\nnormalize = {}\n",
                vec3(&scene.room),
                vec3(&scene.primary_center),
                vec3(&scene.primary_normal),
                vec3(&scene.secondary_center),
                vec3(&scene.secondary_normal),
                scene.primary_grid.0,
                scene.primary_grid.1,
                scene.secondary_grid.0,
                scene.secondary_grid.1,
                fmt_f64(scene.spacing_wavelengths),
                fmt_f64(scene.carrier_hz),
                fmt_f64(scene.patch.max_gain_dbi),
                fmt_f64(scene.patch.pattern_exponent),
                fmt_f64(scene.patch.front_to_back_db),
                scene.normalize
            );
        }
        match self.offset {
            OffsetModel::Fixed(v) => {
                let _ = writeln!(s, "[offset]\nmodel = fixed\nvalue = {}\n", fmt_f64(v));
            }
            OffsetModel::Uniform { low, high } => {
                let _ = writeln!(
                    s,
                    "[offset]\nmodel = uniform\nlow = {}\nhigh = {}\n",
                    fmt_f64(low),
                    fmt_f64(high)
                );
            }
        }
        let e = &self.estimator;
        let grid = e
            .coarse_grid_points
            .map_or("auto".to_string(), |k| k.to_string());
        let _ = writeln!(
            s,
            "[estimator]\nsearch_halfwidth = {}\ncoarse_grid_points = {}\nrefine_tolerance = {}\nrefine_max_iters = {}\n",
            fmt_f64(e.search_halfwidth),
            grid,
            fmt_f64(e.refine_tolerance),
            e.refine_max_iters
        );
        let _ = writeln!(
            s,
            "[schedule]\npanels = {}\nsnr_db = {}\n",
            self.schedule.panels,
            fmt_f64(self.schedule.snr_db)
        );
        let d = &self.drift;
        let _ = write!(
            s,
            "[drift]\nrate = {}\njitter = {}\nresync_threshold = {}\nslots = {}\nsnr_db = {}\nscheme = {}\n",
            fmt_f64(d.rate),
            fmt_f64(d.jitter),
            fmt_f64(d.resync_threshold),
            d.slots,
            fmt_f64(d.snr_db),
            d.scheme.name()
        );
        s
    }

    /// Short hex digest of the canonical text.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Shortest representation that parses back to the same value.
fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:?}")
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("array", &["mp", "ms", "tau_p"]),
    ("signal", &["n", "cycles", "shape", "noise_scale"]),
    ("sweep", &["snr_db", "trials", "schemes", "master_seed"]),
    ("channel", &["model"]),
    (
        "los",
        &[
            "room",
            "primary_center",
            "primary_normal",
            "secondary_center",
            "secondary_normal",
            "primary_grid",
            "secondary_grid",
            "spacing_wavelengths",
            "carrier_hz",
            "patch_gain_dbi",
            "patch_exponent",
            "front_to_back_db",
            "normalize",
        ],
    ),
    ("offset", &["model", "low", "high", "value"]),
    (
        "estimator",
        &[
            "search_halfwidth",
            "coarse_grid_points",
            "refine_tolerance",
            "refine_max_iters",
        ],
    ),
    ("schedule", &["panels", "snr_db"]),
    (
        "drift",
        &[
            "rate",
            "jitter",
            "resync_threshold",
            "slots",
            "snr_db",
            "scheme",
        ],
    ),
    ("manifest", &[]),
];

#[derive(Default)]
struct Parser {
    /// `(section, key, line, value)` not yet consumed.
    entries: Vec<(String, String, usize, String)>,
    /// `section.key` → line, for every key seen.
    lines: Vec<(String, usize)>,
}

fn at_line(line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        line: Some(line),
        key: key.to_string(),
        message: message.into(),
    }
}

impl Parser {
    fn run(&mut self, text: &str) -> Result<ExperimentConfig> {
        let mut section: Option<String> = None;
        let mut seen_sections = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at_line(line, content, "unterminated section header"))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(at_line(line, name, format!("unknown section [{name}]")));
                }
                if !seen_sections.insert(name.to_string()) {
                    return Err(at_line(
                        line,
                        name,
                        format!("section [{name}] appears twice"),
                    ));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some(sec) = section.as_deref() else {
                return Err(at_line(line, content, "key outside of any section"));
            };
            if sec == "manifest" {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| at_line(line, content, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let keys = SECTIONS
                .iter()
                .find(|(s, _)| *s == sec)
                .map(|(_, k)| *k)
                .unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(at_line(
                    line,
                    key,
                    format!("unknown key `{key}` in [{sec}]"),
                ));
            }
            if self.entries.iter().any(|(s, k, _, _)| s == sec && k == key) {
                return Err(at_line(
                    line,
                    key,
                    format!("duplicate key `{key}` in [{sec}]"),
                ));
            }
            self.entries
                .push((sec.to_string(), key.to_string(), line, value.to_string()));
            self.lines.push((format!("{sec}.{key}"), line));
        }
        self.build()
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        let pos = self
            .entries
            .iter()
            .position(|(s, k, _, _)| s == section && k == key)?;
        let (_, _, line, value) = self.entries.remove(pos);
        Some((line, value))
    }

    fn get<T: FromStr>(&mut self, section: &str, key: &str, default: T) -> Result<T> {
        match self.take(section, key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| at_line(line, key, format!("cannot parse `{v}` for `{key}`"))),
        }
    }

    fn get_list<T: FromStr>(
        &mut self,
        section: &str,
        key: &str,
        default: Vec<T>,
    ) -> Result<Vec<T>> {
        match self.take(section, key) {
            None => Ok(default),
            Some((line, v)) => parse_list(&v)
                .map_err(|bad| at_line(line, key, format!("cannot parse `{bad}` in `{key}`"))),
        }
    }

    fn get_vec3(&mut self, section: &str, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        let line = self.line_of(section, key);
        let v = self.get_list(section, key, default.to_vec())?;
        v.try_into().map_err(|_| {
            at_line(
                line.unwrap_or(0),
                key,
                format!("`{key}` needs exactly 3 values"),
            )
        })
    }

    fn get_grid(
        &mut self,
        section: &str,
        key: &str,
        default: (usize, usize),
    ) -> Result<(usize, usize)> {
        let line = self.line_of(section, key);
        let v = self.get_list(section, key, vec![default.0, default.1])?;
        match v[..] {
            [r, c] => Ok((r, c)),
            _ => Err(at_line(
                line.unwrap_or(0),
                key,
                format!("`{key}` needs `rows, cols`"),
            )),
        }
    }

    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|(s, k, _, _)| s == section && k == key)
            .map(|(_, _, l, _)| *l)
    }

    fn build(&mut self) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let mp = self.get("array", "mp", d.mp)?;
        let ms = self.get("array", "ms", d.ms)?;
        let tau_p = self.get("array", "tau_p", ms)?;
        let n = self.get("signal", "n", d.n)?;
        let cycles = self.get("signal", "cycles", d.cycles)?;
        let shape = self.get("signal", "shape", d.shape)?;
        let noise_scale = self.get("signal", "noise_scale", d.noise_scale)?;
        let snr_grid_db = self.get_list("sweep", "snr_db", d.snr_grid_db)?;
        let trials = self.get("sweep", "trials", d.trials)?;
        let schemes = self.get_list("sweep", "schemes", d.schemes)?;
        let master_seed = self.get("sweep", "master_seed", d.master_seed)?;

        let model_line = self.line_of("channel", "model");
        let model: String = self.get("channel", "model", "rayleigh".to_string())?;
        let channel = match model.as_str() {
            "rayleigh" => {
                if let Some((_, key, line, _)) = self.entries.iter().find(|(s, _, _, _)| s == "los")
                {
                    return Err(at_line(
                        *line,
                        key,
                        "[los] keys given but channel model is rayleigh",
                    ));
                }
                ChannelModel::Rayleigh
            }
            "los" => {
                let base = LosScene::adjacent_walls(mp, ms);
                let patch = PatchAntennaParams {
                    max_gain_dbi: self.get("los", "patch_gain_dbi", base.patch.max_gain_dbi)?,
                    pattern_exponent: self.get(
                        "los",
                        "patch_exponent",
                        base.patch.pattern_exponent,
                    )?,
                    front_to_back_db: self.get(
                        "los",
                        "front_to_back_db",
                        base.patch.front_to_back_db,
                    )?,
                };
                ChannelModel::Los(LosScene {
                    room: self.get_vec3("los", "room", base.room)?,
                    primary_center: self.get_vec3("los", "primary_center", base.primary_center)?,
                    primary_normal: self.get_vec3("los", "primary_normal", base.primary_normal)?,
                    secondary_center: self.get_vec3(
                        "los",
                        "secondary_center",
                        base.secondary_center,
                    )?,
                    secondary_normal: self.get_vec3(
                        "los",
                        "secondary_normal",
                        base.secondary_normal,
                    )?,
                    primary_grid: self.get_grid("los", "primary_grid", near_square_grid(mp))?,
                    secondary_grid: self.get_grid("los", "secondary_grid", near_square_grid(ms))?,
                    spacing_wavelengths: self.get(
                        "los",
                        "spacing_wavelengths",
                        base.spacing_wavelengths,
                    )?,
                    carrier_hz: self.get("los", "carrier_hz", base.carrier_hz)?,
                    patch,
                    normalize: self.get("los", "normalize", base.normalize)?,
                })
            }
            other => {
                return Err(at_line(
                    model_line.unwrap_or(0),
                    "model",
                    format!("unknown channel model `{other}` (rayleigh | los)"),
                ))
            }
        };

        let offset_line = self.line_of("offset", "model");
        let offset_model: String = self.get("offset", "model", "uniform".to_string())?;
        let offset = match offset_model.as_str() {
            "uniform" => {
                if let Some(line) = self.line_of("offset", "value") {
                    return Err(at_line(
                        line,
                        "value",
                        "`value` applies to the fixed offset model",
                    ));
                }
                OffsetModel::Uniform {
                    low: self.get("offset", "low", -0.1)?,
                    high: self.get("offset", "high", 0.1)?,
                }
            }
            "fixed" => {
                for key in ["low", "high"] {
                    if let Some(line) = self.line_of("offset", key) {
                        return Err(at_line(
                            line,
                            key,
                            format!("`{key}` applies to the uniform offset model"),
                        ));
                    }
                }
                OffsetModel::Fixed(self.get("offset", "value", 0.0)?)
            }
            other => {
                return Err(at_line(
                    offset_line.unwrap_or(0),
                    "model",
                    format!("unknown offset model `{other}` (fixed | uniform)"),
                ))
            }
        };

        let grid_line = self.line_of("estimator", "coarse_grid_points");
        let grid: String = self.get("estimator", "coarse_grid_points", "auto".to_string())?;
        let coarse_grid_points = if grid == "auto" {
            None
        } else {
            Some(grid.parse().map_err(|_| {
                at_line(
                    grid_line.unwrap_or(0),
                    "coarse_grid_points",
                    format!("expected `auto` or an integer, got `{grid}`"),
                )
            })?)
        };
        let de = d.estimator;
        let estimator = EstimatorConfig {
            search_halfwidth: self.get("estimator", "search_halfwidth", de.search_halfwidth)?,
            coarse_grid_points,
            refine_tolerance: self.get("estimator", "refine_tolerance", de.refine_tolerance)?,
            refine_max_iters: self.get("estimator", "refine_max_iters", de.refine_max_iters)?,
        };
        let schedule = ScheduleConfig {
            panels: self.get("schedule", "panels", d.schedule.panels)?,
            snr_db: self.get("schedule", "snr_db", d.schedule.snr_db)?,
        };
        let dd = d.drift;
        let drift = DriftConfig {
            rate: self.get("drift", "rate", dd.rate)?,
            jitter: self.get("drift", "jitter", dd.jitter)?,
            resync_threshold: self.get("drift", "resync_threshold", dd.resync_threshold)?,
            slots: self.get("drift", "slots", dd.slots)?,
            snr_db: self.get("drift", "snr_db", dd.snr_db)?,
            scheme: self.get("drift", "scheme", dd.scheme)?,
        };
        Ok(ExperimentConfig {
            mp,
            ms,
            tau_p,
            n,
            cycles,
            shape,
            noise_scale,
            snr_grid_db,
            trials,
            schemes,
            master_seed,
            channel,
            offset,
            estimator,
            schedule,
            drift,
        })
    }
}

fn parse_list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse().map_err(|_| item.to_string())
        })
        .collect()
}
