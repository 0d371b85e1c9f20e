//! Flat `key = value` configuration files.
//!
//! Blank lines are ignored and `#` starts a comment that runs to the end of
//! the line. A line `[case]` opens a new section (benchmark plans only).
//! Keys are case-insensitive; relative paths resolve against the directory
//! of the file that names them.
//!
//! A run configuration accepts these keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `model` | `proposed`, `tdm` or `shan` | required |
//! | `profile` | preset table (`boat`, `texture`, `baboon`, `peppers`, `bsd68`) | `bsd68` |
//! | `gamma`, `alpha`, `k`, `nu`, `lambda` | model parameters | from the profile |
//! | `tau`, `xi` | time step, pre-smoothing width | `0.2`, `2` |
//! | `fidelity_form` | `squared` or `signed` | `squared` |
//! | `looks`, `seed` | speckle applied to the input before restoration | none, `0` |
//! | `add_noise` | `false` keeps `looks` for the profile lookup only | `true` |
//! | `stop` | `relative_error`, `psnr_peak` or `max_iters` | `relative_error` |
//! | `epsilon`, `patience`, `cap` | stopping knobs | `1e-4`, `5`, `500` |
//! | `input`, `reference`, `output`, `report` | file paths | |

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use despeckle_core::diffusion::presets::{params_for, Profile};
use despeckle_core::{FidelityForm, Model, ModelParams, NoiseSpec, StoppingRule};

use crate::bench::{self, BenchmarkPlan};
use crate::error::{CliError, CliResult};

/// One `key = value` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// `file:line` of the entry, for error messages.
    pub origin: String,
    /// Directory that relative paths in `value` are resolved against.
    pub base: PathBuf,
}

impl Entry {
    pub fn new(key: &str, value: &str, origin: &str, base: &Path) -> Self {
        Self {
            key: key.trim().to_ascii_lowercase(),
            value: value.trim().to_string(),
            origin: origin.to_string(),
            base: base.to_path_buf(),
        }
    }

    pub fn parse<T: FromStr>(&self) -> CliResult<T> {
        self.value.parse().map_err(|_| {
            CliError::config(
                &self.origin,
                format!(
                    "cannot parse '{}' as the value of '{}' ({})",
                    self.value,
                    self.key,
                    std::any::type_name::<T>()
                ),
            )
        })
    }

    pub fn flag(&self) -> CliResult<bool> {
        match self.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(CliError::config(
                &self.origin,
                format!("'{}' expects true or false, got '{}'", self.key, self.value),
            )),
        }
    }

    pub fn path(&self) -> PathBuf {
        self.base.join(&self.value)
    }
}

/// Entries that appear before the first header, or under one header.
#[derive(Debug, Clone, Default)]
pub struct Section {
    pub name: Option<String>,
    pub origin: String,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Replaces any entry with the same key.
    pub fn set(&mut self, entry: Entry) {
        self.entries.retain(|e| e.key != entry.key);
        self.entries.push(entry);
    }
}

/// Splits `text` into sections. `source` names the text in error messages.
pub fn parse_sections(text: &str, source: &str, base: &Path) -> CliResult<Vec<Section>> {
    let mut sections = vec![Section {
        name: None,
        origin: source.to_string(),
        entries: Vec::new(),
    }];
    for (n, raw) in text.lines().enumerate() {
        let origin = format!("{source}:{}", n + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.push(Section {
                name: Some(name.trim().to_ascii_lowercase()),
                origin,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::config(
                origin,
                format!("expected 'key = value', got '{line}'"),
            ));
        };
        let entry = Entry::new(key, value, &origin, base);
        if entry.key.is_empty() {
            return Err(CliError::config(origin, "empty key"));
        }
        let current = sections.last_mut().expect("at least one section");
        if current.get(&entry.key).is_some() {
            return Err(CliError::config(
                origin,
                format!("duplicate key '{}'", entry.key),
            ));
        }
        current.entries.push(entry);
    }
    Ok(sections)
}

/// Optional overrides of the scalar model parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamOverrides {
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    pub k: Option<f64>,
    pub nu: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub xi: Option<f64>,
    pub fidelity_form: Option<FidelityForm>,
}

impl ParamOverrides {
    /// Records `entry` if `key` names a parameter; returns whether it did.
    pub fn absorb(&mut self, key: &str, entry: &Entry) -> CliResult<bool> {
        let slot = match key {
            "gamma" => &mut self.gamma,
            "alpha" => &mut self.alpha,
            "k" => &mut self.k,
            "nu" => &mut self.nu,
            "lambda" => &mut self.lambda,
            "tau" => &mut self.tau,
            "xi" => &mut self.xi,
            "fidelity_form" => {
                let form = entry
                    .value
                    .parse()
                    .map_err(|e| CliError::config(&entry.origin, format!("{e}")))?;
                self.fidelity_form = Some(form);
                return Ok(true);
            }
            _ => return Ok(false),
        };
        *slot = Some(entry.parse()?);
        Ok(true)
    }

    /// Later overrides win.
    pub fn layered(self, over: ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            gamma: over.gamma.or(self.gamma),
            alpha: over.alpha.or(self.alpha),
            k: over.k.or(self.k),
            nu: over.nu.or(self.nu),
            lambda: over.lambda.or(self.lambda),
            tau: over.tau.or(self.tau),
            xi: over.xi.or(self.xi),
            fidelity_form: over.fidelity_form.or(self.fidelity_form),
        }
    }

    pub fn apply(&self, base: ModelParams) -> ModelParams {
        ModelParams {
            gamma: self.gamma.unwrap_or(base.gamma),
            alpha: self.alpha.unwrap_or(base.alpha),
            k: self.k.unwrap_or(base.k),
            nu: self.nu.unwrap_or(base.nu),
            lambda: self.lambda.unwrap_or(base.lambda),
            tau: self.tau.unwrap_or(base.tau),
            xi: self.xi.unwrap_or(base.xi),
            fidelity_form: self.fidelity_form.unwrap_or(base.fidelity_form),
            h: base.h,
        }
    }

    /// Names of the keys `model` needs that are not set here.
    pub fn missing_for(&self, model: Model) -> Vec<&'static str> {
        let need: &[(&str, Option<f64>)] = match model {
            Model::Shan => &[("alpha", self.alpha), ("nu", self.nu)],
            Model::Tdm => &[("gamma", self.gamma), ("alpha", self.alpha), ("k", self.k)],
            Model::Proposed => &[
                ("gamma", self.gamma),
                ("alpha", self.alpha),
                ("k", self.k),
                ("lambda", self.lambda),
            ],
        };
        need.iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
            .collect()
    }
}

/// Stopping-rule keys, shared by run configs and benchmark plans.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StopOverrides {
    pub stop: Option<Entry>,
    pub epsilon: Option<Entry>,
    pub patience: Option<Entry>,
    pub cap: Option<Entry>,
}

impl StopOverrides {
    pub fn absorb(&mut self, entry: &Entry) -> bool {
        let slot = match entry.key.as_str() {
            "stop" => &mut self.stop,
            "epsilon" => &mut self.epsilon,
            "patience" => &mut self.patience,
            "cap" => &mut self.cap,
            _ => return false,
        };
        *slot = Some(entry.clone());
        true
    }

    /// Builds the rule; `default` names the rule used when `stop` is absent.
    pub fn build(&self, default: &str, origin: &str) -> CliResult<StoppingRule> {
        let name = self.stop.as_ref().map_or(default, |e| e.value.as_str());
        let cap = match &self.cap {
            Some(e) => e.parse::<usize>()?,
            None => StoppingRule::DEFAULT_CAP,
        };
        let reject = |e: &Option<Entry>| -> CliResult<()> {
            match e {
                Some(e) => Err(CliError::config(
                    &e.origin,
                    format!("'{}' does not apply to stop = {name}", e.key),
                )),
                None => Ok(()),
            }
        };
        let rule = match name.to_ascii_lowercase().as_str() {
            "relative_error" => {
                reject(&self.patience)?;
                let eps = match &self.epsilon {
                    Some(e) => e.parse::<f64>()?,
                    None => StoppingRule::DEFAULT_EPSILON,
                };
                StoppingRule::relative_error(eps).with_cap(cap)
            }
            "psnr_peak" => {
                reject(&self.epsilon)?;
                let patience = match &self.patience {
                    Some(e) => e.parse::<usize>()?,
                    None => StoppingRule::DEFAULT_PATIENCE,
                };
                StoppingRule::psnr_peak(patience).with_cap(cap)
            }
            "max_iters" => {
                reject(&self.epsilon)?;
                reject(&self.patience)?;
                StoppingRule::max_iters(cap)
            }
            other => {
                let at = self.stop.as_ref().map_or(origin, |e| e.origin.as_str());
                return Err(CliError::config(
                    at,
                    format!(
                        "unknown stopping rule '{other}' (relative_error, psnr_peak, max_iters)"
                    ),
                ));
            }
        };
        rule.validate()
            .map_err(|e| CliError::config(origin, e.to_string()))?;
        Ok(rule)
    }
}

pub(crate) fn parse_model(entry: &Entry) -> CliResult<Model> {
    entry
        .value
        .parse()
        .map_err(|e| CliError::config(&entry.origin, format!("{e}")))
}

pub(crate) fn parse_profile(entry: &Entry) -> CliResult<Profile> {
    Profile::from_name(&entry.value).ok_or_else(|| {
        CliError::config(
            &entry.origin,
            format!(
                "unknown profile '{}' (boat, texture, baboon, peppers, bsd68)",
                entry.value
            ),
        )
    })
}

/// Row of `profile` for `model`, with `looks` needed for the look-dependent tables.
pub(crate) fn profile_row(
    profile: Profile,
    model: Model,
    looks: Option<u32>,
    origin: &str,
) -> CliResult<ModelParams> {
    if profile == Profile::Bsd68 {
        return Ok(params_for(profile, model, 0).expect("bsd68 row"));
    }
    let looks = looks.ok_or_else(|| {
        CliError::config(
            origin,
            format!("profile {profile:?} needs 'looks' to pick a row"),
        )
    })?;
    params_for(profile, model, looks).ok_or_else(|| {
        CliError::config(
            origin,
            format!("profile {profile:?} has no row for L = {looks} (1, 3, 5, 10)"),
        )
    })
}

/// A single restoration run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub params: ModelParams,
    /// Speckle synthesized on the input; `None` when the input is already noisy.
    pub noise: Option<NoiseSpec>,
    pub stop: StoppingRule,
    pub input: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    /// Builds and validates a run configuration from the top-level section.
    pub fn from_section(section: &Section) -> CliResult<Self> {
        let origin = section.origin.as_str();
        let mut params = ParamOverrides::default();
        let mut stop = StopOverrides::default();
        let mut model = None;
        let mut profile = None;
        let (mut looks, mut seed, mut add_noise) = (None, 0u64, true);
        let (mut input, mut reference, mut output, mut report) = (None, None, None, None);

        for e in &section.entries {
            if params.absorb(&e.key, e)? || stop.absorb(e) {
                continue;
            }
            match e.key.as_str() {
                "model" => model = Some(parse_model(e)?),
                "profile" => profile = Some(parse_profile(e)?),
                "looks" => looks = Some(e.parse::<u32>()?),
                "seed" => seed = e.parse()?,
                "add_noise" => add_noise = e.flag()?,
                "input" => input = Some(e.path()),
                "reference" => reference = Some(e.path()),
                "output" => output = Some(e.path()),
                "report" => report = Some(e.path()),
                other => {
                    return Err(CliError::config(
                        &e.origin,
                        format!("unknown key '{other}'"),
                    ));
                }
            }
        }

        let model =
            model.ok_or_else(|| CliError::config(origin, "missing required key 'model'"))?;
        let base = profile_row(profile.unwrap_or(Profile::Bsd68), model, looks, origin)?;
        let params = params.apply(base);
        params
            .validate()
            .map_err(|e| CliError::config(origin, e.to_string()))?;
        let noise = match looks {
            Some(l) if add_noise => {
                Some(NoiseSpec::new(l, seed).map_err(|e| CliError::config(origin, e.to_string()))?)
            }
            _ => None,
        };
        let stop = stop.build("relative_error", origin)?;
        if stop.needs_reference() && reference.is_none() {
            return Err(CliError::config(
                origin,
                "stop = psnr_peak needs a 'reference' image",
            ));
        }
        Ok(RunConfig {
            model,
            params,
            noise,
            stop,
            input,
            reference,
            output,
            report,
        })
    }

    /// Parses the contents of a run configuration file.
    pub fn parse_str(text: &str, source: &str, base: &Path) -> CliResult<Self> {
        let sections = parse_sections(text, source, base)?;
        if let Some(s) = sections.get(1) {
            return Err(CliError::config(
                &s.origin,
                "sections are only allowed in benchmark plans",
            ));
        }
        Self::from_section(&sections[0])
    }
}

/// Either kind of configuration file.
#[derive(Debug, Clone)]
pub enum ConfigFile {
    Run(RunConfig),
    Benchmark(BenchmarkPlan),
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn base_dir(path: &Path) -> PathBuf {
    path.parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Reads `path` as a benchmark plan if it contains a `[case]` section and as
/// a run configuration otherwise.
pub fn parse_config(path: &Path) -> CliResult<ConfigFile> {
    let text = read_text(path)?;
    let source = path.display().to_string();
    let sections = parse_sections(&text, &source, &base_dir(path))?;
    if sections.len() > 1 {
        bench::plan_from_sections(&sections).map(ConfigFile::Benchmark)
    } else {
        RunConfig::from_section(&sections[0]).map(ConfigFile::Run)
    }
}

/// Reads a run configuration, then applies `overrides` on top of its entries.
pub fn load_run_config(path: Option<&Path>, overrides: &[Entry]) -> CliResult<RunConfig> {
    let mut section = match path {
        Some(p) => {
            let text = read_text(p)?;
            let mut sections = parse_sections(&text, &p.display().to_string(), &base_dir(p))?;
            if sections.len() > 1 {
                return Err(CliError::config(
                    &sections[1].origin,
                    "sections are only allowed in benchmark plans",
                ));
            }
            sections.remove(0)
        }
        None => Section {
            name: None,
            origin: "command line".into(),
            entries: Vec::new(),
        },
    };
    for e in overrides {
        section.set(e.clone());
    }
    RunConfig::from_section(&section)
}
