//! Flat `section.key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are an error so a
//! typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use axicyl::config::{ForcingKind, SolverConfig};
use axicyl::grid::{Exponent, Operator};
use axicyl::inequalities::{InequalityId, Interpolation};
use axicyl::mms::MmsSetup;
use axicyl::semigroup::{DecayFamily, DecayParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct MmsSettings {
    pub setup: MmsSetup,
    pub ladder: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupSettings {
    pub operators: Vec<Operator>,
    pub cases: Vec<(Exponent, u32)>,
    pub decay: DecayParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutationSettings {
    pub r_min: f64,
    pub r_max: f64,
    pub l_z: f64,
    pub t: f64,
    pub courant: f64,
    pub ladder: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardSettings {
    pub t_end: f64,
    pub dt: f64,
    pub j_max: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalitySettings {
    pub ids: Vec<InequalityId>,
    pub first: u64,
    pub count: usize,
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub solver: SolverConfig,
    pub mms: MmsSettings,
    pub semigroup: SemigroupSettings,
    pub commutation: CommutationSettings,
    pub picard: PicardSettings,
    pub sweep_eps: Vec<f64>,
    pub inequalities: InequalitySettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            solver: SolverConfig::default(),
            mms: MmsSettings {
                setup: MmsSetup::default(),
                ladder: vec![64, 128, 256],
            },
            semigroup: SemigroupSettings {
                operators: vec![Operator::L0, Operator::L1, Operator::L0p],
                cases: vec![
                    (Exponent::Finite(2.0), 0),
                    (Exponent::Finite(6.0), 0),
                    (Exponent::Finite(6.0), 1),
                    (Exponent::Infinity, 0),
                ],
                decay: DecayParams::default(),
            },
            commutation: CommutationSettings {
                r_min: 1.0,
                r_max: 5.0,
                l_z: 4.0,
                t: 0.1,
                courant: 0.5,
                ladder: vec![32, 64, 128],
            },
            picard: PicardSettings {
                t_end: 0.5,
                dt: 0.0025,
                j_max: 8,
                p: 4.0,
            },
            sweep_eps: vec![1.0, 0.5, 0.25, 0.125],
            inequalities: InequalitySettings {
                ids: InequalityId::ALL.to_vec(),
                first: 0,
                count: 200,
                interpolation: Interpolation::default(),
            },
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse `{v}`")))
}

fn parse_with<T>(key: &str, v: &str, f: impl Fn(&str) -> axicyl::Result<T>) -> Result<T, CliError> {
    f(v.trim()).map_err(|e| CliError::Config(format!("{key}: {e}")))
}

fn list<T>(key: &str, v: &str, f: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    let items: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Config(format!("{key}: empty list")));
    }
    items
        .into_iter()
        .map(|s| f(s).map_err(|e| CliError::Config(format!("{key}: {e}"))))
        .collect()
}

fn optional_f64(key: &str, v: &str) -> Result<Option<f64>, CliError> {
    match v.trim() {
        "none" | "adaptive" | "" => Ok(None),
        s => parse(key, s).map(Some),
    }
}

fn case(s: &str) -> Result<(Exponent, u32), CliError> {
    let (p, k) = s
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("case `{s}` is not of the form p:k")))?;
    let p = Exponent::from_str(p.trim()).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((p, parse("k", k)?))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".into(), |x| x.to_string())
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

/// The `key = value` lines of a file as written, for echoing a config that
/// failed to parse.
pub fn raw_pairs(path: &Path) -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    text.lines()
        .filter_map(|l| l.split('#').next()?.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Settings::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Settings, CliError> {
        let mut s = Settings::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            s.set(key.trim(), value.trim()).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("line {}: {m}", n + 1)),
                other => other,
            })?;
        }
        Ok(s)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        let c = &mut self.solver;
        match key {
            "seed" => {
                c.seed = parse(key, v)?;
                c.initial.seed = c.seed;
            }
            "grid.r_min" => c.grid.r_min = parse(key, v)?,
            "grid.r_max" => c.grid.r_max = parse(key, v)?,
            "grid.l_z" => c.grid.l_z = parse(key, v)?,
            "grid.n_r" => c.grid.n_r = parse(key, v)?,
            "grid.n_z" => c.grid.n_z = parse(key, v)?,
            "time.dt" => c.dt = optional_f64(key, v)?,
            "time.cfl" => c.cfl = parse(key, v)?,
            "time.dt_max" => c.dt_max = optional_f64(key, v)?,
            "time.t_end" => c.t_end = parse(key, v)?,
            "time.output_every" => c.output_every = parse(key, v)?,
            "scheme.advection" => c.scheme.advection = parse_with(key, v, str::parse)?,
            "scheme.diffusion" => c.scheme.diffusion = parse_with(key, v, str::parse)?,
            "forcing" => {
                c.forcing = match v {
                    "none" => ForcingKind::None,
                    "manufactured" => ForcingKind::Manufactured,
                    o => return Err(CliError::Config(format!("{key}: unknown forcing `{o}`"))),
                }
            }
            "initial.kind" => c.initial.kind = parse_with(key, v, str::parse)?,
            "initial.amplitude" => c.initial.amplitude = parse(key, v)?,
            "initial.secondary_amplitude" => c.initial.secondary_amplitude = parse(key, v)?,
            "initial.r_center" => c.initial.support.r_center = parse(key, v)?,
            "initial.r_half_width" => c.initial.support.r_half_width = parse(key, v)?,
            "initial.z_center" => c.initial.support.z_center = parse(key, v)?,
            "initial.z_half_width" => c.initial.support.z_half_width = parse(key, v)?,
            "initial.seed" => c.initial.seed = parse(key, v)?,
            "initial.modes" => c.initial.modes = parse(key, v)?,
            "checkpoint.every" => c.checkpoint_every = parse(key, v)?,

            "mms.ladder" => self.mms.ladder = list(key, v, |s| parse(key, s))?,
            "mms.r_min" => self.mms.setup.r_min = parse(key, v)?,
            "mms.r_max" => self.mms.setup.r_max = parse(key, v)?,
            "mms.l_z" => self.mms.setup.l_z = parse(key, v)?,
            "mms.axial_mode" => self.mms.setup.axial_mode = parse(key, v)?,
            "mms.amp_psi" => self.mms.setup.amp_psi = parse(key, v)?,
            "mms.amp_gamma" => self.mms.setup.amp_gamma = parse(key, v)?,
            "mms.t_end" => self.mms.setup.t_end = parse(key, v)?,
            "mms.courant" => self.mms.setup.courant = parse(key, v)?,

            "semigroup.operators" => self.semigroup.operators = list(key, v, |s| parse_with(key, s, str::parse))?,
            "semigroup.cases" => self.semigroup.cases = list(key, v, case)?,
            "semigroup.family" => self.semigroup.decay.family = parse_with(key, v, DecayFamily::from_str)?,
            "semigroup.samples" => self.semigroup.decay.n_samples = parse(key, v)?,
            "semigroup.steps_per_sample" => self.semigroup.decay.steps_per_sample = parse(key, v)?,

            "commutation.r_min" => self.commutation.r_min = parse(key, v)?,
            "commutation.r_max" => self.commutation.r_max = parse(key, v)?,
            "commutation.l_z" => self.commutation.l_z = parse(key, v)?,
            "commutation.t" => self.commutation.t = parse(key, v)?,
            "commutation.courant" => self.commutation.courant = parse(key, v)?,
            "commutation.ladder" => self.commutation.ladder = list(key, v, |s| parse(key, s))?,

            "picard.t_end" => self.picard.t_end = parse(key, v)?,
            "picard.dt" => self.picard.dt = parse(key, v)?,
            "picard.j_max" => self.picard.j_max = parse(key, v)?,
            "picard.p" => self.picard.p = parse(key, v)?,

            "sweep.eps" => self.sweep_eps = list(key, v, |s| parse(key, s))?,

            "inequalities.ids" => {
                self.inequalities.ids = if v == "all" {
                    InequalityId::ALL.to_vec()
                } else {
                    list(key, v, |s| parse_with(key, s, str::parse))?
                }
            }
            "inequalities.first" => self.inequalities.first = parse(key, v)?,
            "inequalities.count" => self.inequalities.count = parse(key, v)?,
            "inequalities.p" => self.inequalities.interpolation.p = parse(key, v)?,
            "inequalities.q" => self.inequalities.interpolation.q = parse(key, v)?,

            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Every key with its effective value; feeding these back through
    /// [`Settings::set`] reproduces `self`.
    pub fn pairs(&self) -> BTreeMap<String, String> {
        let c = &self.solver;
        let m = &self.mms.setup;
        let cm = &self.commutation;
        let forcing = match c.forcing {
            ForcingKind::None => "none",
            ForcingKind::Manufactured => "manufactured",
        };
        let kind = match c.initial.kind {
            axicyl::field::InitialKind::NoSwirlBump => "no_swirl_bump",
            axicyl::field::InitialKind::SwirlBump => "swirl_bump",
            axicyl::field::InitialKind::RandomModes => "random_modes",
        };
        let entries: Vec<(&str, String)> = vec![
            ("seed", c.seed.to_string()),
            ("grid.r_min", c.grid.r_min.to_string()),
            ("grid.r_max", c.grid.r_max.to_string()),
            ("grid.l_z", c.grid.l_z.to_string()),
            ("grid.n_r", c.grid.n_r.to_string()),
            ("grid.n_z", c.grid.n_z.to_string()),
            ("time.dt", fmt_opt(c.dt)),
            ("time.cfl", c.cfl.to_string()),
            ("time.dt_max", fmt_opt(c.dt_max)),
            ("time.t_end", c.t_end.to_string()),
            ("time.output_every", c.output_every.to_string()),
            ("scheme.advection", c.scheme.advection.name().into()),
            ("scheme.diffusion", c.scheme.diffusion.name().into()),
            ("forcing", forcing.into()),
            ("initial.kind", kind.into()),
            ("initial.amplitude", c.initial.amplitude.to_string()),
            ("initial.secondary_amplitude", c.initial.secondary_amplitude.to_string()),
            ("initial.r_center", c.initial.support.r_center.to_string()),
            ("initial.r_half_width", c.initial.support.r_half_width.to_string()),
            ("initial.z_center", c.initial.support.z_center.to_string()),
            ("initial.z_half_width", c.initial.support.z_half_width.to_string()),
            ("initial.seed", c.initial.seed.to_string()),
            ("initial.modes", c.initial.modes.to_string()),
            ("checkpoint.every", c.checkpoint_every.to_string()),
            ("mms.ladder", join(&self.mms.ladder, usize::to_string)),
            ("mms.r_min", m.r_min.to_string()),
            ("mms.r_max", m.r_max.to_string()),
            ("mms.l_z", m.l_z.to_string()),
            ("mms.axial_mode", m.axial_mode.to_string()),
            ("mms.amp_psi", m.amp_psi.to_string()),
            ("mms.amp_gamma", m.amp_gamma.to_string()),
            ("mms.t_end", m.t_end.to_string()),
            ("mms.courant", m.courant.to_string()),
            (
                "semigroup.operators",
                join(&self.semigroup.operators, |o| o.name().into()),
            ),
            (
                "semigroup.cases",
                join(&self.semigroup.cases, |(p, k)| format!("{p}:{k}")),
            ),
            ("semigroup.family", self.semigroup.decay.family.name().into()),
            ("semigroup.samples", self.semigroup.decay.n_samples.to_string()),
            (
                "semigroup.steps_per_sample",
                self.semigroup.decay.steps_per_sample.to_string(),
            ),
            ("commutation.r_min", cm.r_min.to_string()),
            ("commutation.r_max", cm.r_max.to_string()),
            ("commutation.l_z", cm.l_z.to_string()),
            ("commutation.t", cm.t.to_string()),
            ("commutation.courant", cm.courant.to_string()),
            ("commutation.ladder", join(&cm.ladder, usize::to_string)),
            ("picard.t_end", self.picard.t_end.to_string()),
            ("picard.dt", self.picard.dt.to_string()),
            ("picard.j_max", self.picard.j_max.to_string()),
            ("picard.p", self.picard.p.to_string()),
            ("sweep.eps", join(&self.sweep_eps, f64::to_string)),
            ("inequalities.ids", join(&self.inequalities.ids, |i| i.name().into())),
            ("inequalities.first", self.inequalities.first.to_string()),
            ("inequalities.count", self.inequalities.count.to_string()),
            ("inequalities.p", self.inequalities.interpolation.p.to_string()),
            ("inequalities.q", self.inequalities.interpolation.q.to_string()),
        ];
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}
