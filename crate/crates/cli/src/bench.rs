//! Benchmark plans: every case image is speckled once per look count and
//! restored by all three models against the clean original.
//!
//! ```text
//! output = table.csv          # required
//! images = restored           # optional: write noisy and restored images here
//! timing = false              # fill the seconds column
//! stop = psnr_peak            # global stopping rule and tau, xi, fidelity_form
//!
//! [case]
//! image = boat.pgm
//! looks = 1
//! seed = 11                   # defaults to the case index
//! profile = boat              # table rows for all three models
//! proposed.lambda = 0.05      # per-model override
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use despeckle_core::diffusion::presets::Profile;
use despeckle_core::io::save_auto;
use despeckle_core::metrics::{self, SsimConfig};
use despeckle_core::{
    add_speckle, add_speckle_rgb, denoise, denoise_rgb, load_any, Error, Image, Model, ModelParams,
    NoiseSpec, StoppingRule,
};
use rayon::prelude::*;

use crate::config::{
    base_dir, parse_model, parse_profile, parse_sections, profile_row, read_text, Entry,
    ParamOverrides, Section, StopOverrides,
};
use crate::error::{CliError, CliResult};

/// Look counts with published parameter rows.
pub const LOOK_GRID: [u32; 4] = [1, 3, 5, 10];

/// Column names of the benchmark table.
pub const CSV_HEADER: [&str; 9] = [
    "image",
    "look",
    "model",
    "psnr",
    "mssim",
    "si",
    "iterations",
    "seconds",
    "status",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    /// Label written to the `image` column.
    pub label: String,
    pub image: PathBuf,
    pub noise: NoiseSpec,
    /// Parameters in [`Model::ALL`] order.
    pub params: [ModelParams; 3],
}

impl BenchCase {
    pub fn params(&self, model: Model) -> &ModelParams {
        let i = Model::ALL
            .iter()
            .position(|&m| m == model)
            .expect("known model");
        &self.params[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPlan {
    pub cases: Vec<BenchCase>,
    pub stop: StoppingRule,
    pub output: PathBuf,
    pub images: Option<PathBuf>,
    pub timing: bool,
}

impl BenchmarkPlan {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read_text(path)?;
        let sections = parse_sections(&text, &path.display().to_string(), &base_dir(path))?;
        plan_from_sections(&sections)
    }
}

pub(crate) fn plan_from_sections(sections: &[Section]) -> CliResult<BenchmarkPlan> {
    let head = &sections[0];
    let mut globals = ParamOverrides::default();
    let mut stop = StopOverrides::default();
    let (mut output, mut images, mut timing) = (None, None, false);
    for e in &head.entries {
        if globals.absorb(&e.key, e)? || stop.absorb(e) {
            continue;
        }
        match e.key.as_str() {
            "output" => output = Some(e.path()),
            "images" => images = Some(e.path()),
            "timing" => timing = e.flag()?,
            other => {
                return Err(CliError::config(
                    &e.origin,
                    format!("unknown key '{other}'"),
                ));
            }
        }
    }
    let output =
        output.ok_or_else(|| CliError::config(&head.origin, "missing required key 'output'"))?;
    let stop = stop.build("psnr_peak", &head.origin)?;

    let mut cases = Vec::new();
    for (index, s) in sections[1..].iter().enumerate() {
        if s.name.as_deref() != Some("case") {
            return Err(CliError::config(
                &s.origin,
                format!("unknown section [{}]", s.name.as_deref().unwrap_or("")),
            ));
        }
        cases.push(parse_case(s, index as u64, &globals)?);
    }
    if cases.is_empty() {
        return Err(CliError::config(
            &head.origin,
            "plan has no [case] sections",
        ));
    }
    Ok(BenchmarkPlan {
        cases,
        stop,
        output,
        images,
        timing,
    })
}

fn parse_case(s: &Section, index: u64, globals: &ParamOverrides) -> CliResult<BenchCase> {
    let origin = s.origin.as_str();
    let mut per_model = [ParamOverrides::default(); 3];
    let mut shared = ParamOverrides::default();
    let (mut image, mut label, mut looks, mut seed, mut profile) =
        (None::<&Entry>, None, None, index, None::<Profile>);
    for e in &s.entries {
        if let Some((prefix, key)) = e.key.split_once('.') {
            let model = parse_model(&Entry {
                value: prefix.into(),
                ..e.clone()
            })?;
            let i = Model::ALL
                .iter()
                .position(|&m| m == model)
                .expect("known model");
            if !per_model[i].absorb(key, e)? {
                return Err(CliError::config(
                    &e.origin,
                    format!("unknown key '{}'", e.key),
                ));
            }
            continue;
        }
        if shared.absorb(&e.key, e)? {
            continue;
        }
        match e.key.as_str() {
            "image" => image = Some(e),
            "name" => label = Some(e.value.clone()),
            "looks" => looks = Some(e.parse::<u32>()?),
            "seed" => seed = e.parse()?,
            "profile" => profile = Some(parse_profile(e)?),
            other => {
                return Err(CliError::config(
                    &e.origin,
                    format!("unknown key '{other}'"),
                ));
            }
        }
    }
    let image = image.ok_or_else(|| CliError::config(origin, "case is missing 'image'"))?;
    let looks = looks.ok_or_else(|| CliError::config(origin, "case is missing 'looks'"))?;
    if !LOOK_GRID.contains(&looks) {
        return Err(CliError::config(
            origin,
            format!("looks must be one of 1, 3, 5, 10, got {looks}"),
        ));
    }
    let label = label.unwrap_or_else(|| {
        Path::new(&image.value)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| image.value.clone())
    });

    let mut params = [ModelParams::default(); 3];
    for (i, &model) in Model::ALL.iter().enumerate() {
        let over = globals.layered(shared).layered(per_model[i]);
        let base = match profile {
            Some(p) => profile_row(p, model, Some(looks), origin)?,
            None => {
                let missing = over.missing_for(model);
                if !missing.is_empty() {
                    let keys: Vec<String> =
                        missing.iter().map(|k| format!("{model}.{k}")).collect();
                    return Err(CliError::config(
                        origin,
                        format!(
                            "no parameters for {model}: set 'profile' or {}",
                            keys.join(", ")
                        ),
                    ));
                }
                ModelParams {
                    gamma: 0.0,
                    lambda: 0.0,
                    ..ModelParams::default()
                }
            }
        };
        params[i] = over.apply(base);
        params[i]
            .validate()
            .map_err(|e| CliError::config(origin, format!("{model}: {e}")))?;
    }
    Ok(BenchCase {
        label,
        image: image.path(),
        noise: NoiseSpec::new(looks, seed).map_err(|e| CliError::config(origin, e.to_string()))?,
        params,
    })
}

/// One line of the benchmark table.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub image: String,
    pub look: u32,
    pub model: Model,
    pub psnr: Option<f64>,
    pub mssim: Option<f64>,
    pub si: Option<f64>,
    /// Noisy-input PSNR, kept for callers (not written to the table).
    pub noisy_psnr: Option<f64>,
    pub iterations: Option<usize>,
    pub seconds: Option<f64>,
    pub status: String,
}

impl BenchRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(case: &BenchCase, model: Model, status: String) -> Self {
        BenchRow {
            image: case.label.clone(),
            look: case.noise.looks,
            model,
            psnr: None,
            mssim: None,
            si: None,
            noisy_psnr: None,
            iterations: None,
            seconds: None,
            status,
        }
    }

    fn fields(&self) -> [String; 9] {
        let opt = |v: Option<f64>, fmt: fn(f64) -> String| v.map(fmt).unwrap_or_default();
        [
            self.image.clone(),
            self.look.to_string(),
            self.model.to_string(),
            opt(self.psnr, format_psnr),
            opt(self.mssim, |v| format!("{v:.4}")),
            opt(self.si, |v| format!("{v:.4}")),
            self.iterations.map(|n| n.to_string()).unwrap_or_default(),
            opt(self.seconds, |v| format!("{v:.3}")),
            self.status.clone(),
        ]
    }
}

/// PSNR with two decimals, `inf` for a perfect match.
pub fn format_psnr(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v:.2}")
    }
}

/// Renders rows under [`CSV_HEADER`].
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record(r.fields()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn status_of(e: &Error) -> String {
    match e {
        Error::Divergence { iteration, .. } => format!("diverged at iteration {iteration}"),
        other => format!("error: {other}"),
    }
}

fn image_name(case: &BenchCase, tag: &str, img: &Image) -> String {
    let ext = match img {
        Image::Gray(_) => "pgm",
        Image::Rgb(_) => "ppm",
    };
    format!("{}_L{}_{tag}.{ext}", case.label, case.noise.looks)
}

fn run_model(
    case: &BenchCase,
    model: Model,
    clean: &Image,
    noisy: &Image,
    stop: &StoppingRule,
    timing: bool,
) -> CliResult<(BenchRow, Image)> {
    let params = case.params(model);
    let cfg = SsimConfig::default();
    let started = Instant::now();
    let (restored, iterations) = match (noisy, clean) {
        (Image::Gray(n), Image::Gray(c)) => {
            let out = denoise(model, n, params, stop, Some(c))?;
            (Image::Gray(out.image), out.report.iterations)
        }
        (Image::Rgb(n), Image::Rgb(c)) => {
            let out = denoise_rgb(model, n, params, stop, Some(c))?;
            let iterations = out
                .reports()
                .iter()
                .map(|r| r.iterations)
                .max()
                .unwrap_or(0);
            (Image::Rgb(out.image), iterations)
        }
        _ => unreachable!("noisy image shares the clean image's kind"),
    };
    let seconds = started.elapsed().as_secs_f64();
    let (psnr, mssim, si, noisy_psnr) = match (&restored, clean, noisy) {
        (Image::Gray(r), Image::Gray(c), Image::Gray(n)) => (
            metrics::psnr(r, c, 255.0)?,
            metrics::mssim(r, c, &cfg)?,
            metrics::speckle_index(r)?,
            metrics::psnr(n, c, 255.0)?,
        ),
        (Image::Rgb(r), Image::Rgb(c), Image::Rgb(n)) => (
            metrics::psnr_rgb(r, c, 255.0)?,
            metrics::mssim_rgb(r, c, &cfg)?,
            metrics::speckle_index_rgb(r)?,
            metrics::psnr_rgb(n, c, 255.0)?,
        ),
        _ => unreachable!(),
    };
    let row = BenchRow {
        image: case.label.clone(),
        look: case.noise.looks,
        model,
        psnr: Some(psnr),
        mssim: Some(mssim),
        si: Some(si),
        noisy_psnr: Some(noisy_psnr),
        iterations: Some(iterations),
        seconds: timing.then_some(seconds),
        status: "ok".into(),
    };
    Ok((row, restored))
}

fn write_image(dir: &Path, name: &str, img: &Image) -> CliResult<()> {
    save_auto(img, dir.join(name)).map_err(CliError::from)
}

fn run_case(plan: &BenchmarkPlan, case: &BenchCase) -> Vec<BenchRow> {
    let loaded = load_any(&case.image).and_then(|clean| {
        let noisy = match &clean {
            Image::Gray(g) => Image::Gray(add_speckle(g, case.noise)?),
            Image::Rgb(c) => Image::Rgb(add_speckle_rgb(c, case.noise)?),
        };
        Ok((clean, noisy))
    });
    let (clean, noisy) = match loaded {
        Ok(pair) => pair,
        Err(e) => {
            log::error!("case {}: {e}", case.label);
            return Model::ALL
                .iter()
                .map(|&m| BenchRow::failed(case, m, status_of(&e)))
                .collect();
        }
    };
    if let Some(dir) = &plan.images {
        if let Err(e) = write_image(dir, &image_name(case, "noisy", &noisy), &noisy) {
            log::error!("case {}: {e}", case.label);
        }
    }
    Model::ALL
        .par_iter()
        .map(|&model| {
            let result = run_model(case, model, &clean, &noisy, &plan.stop, plan.timing).and_then(
                |(row, restored)| {
                    if let Some(dir) = &plan.images {
                        write_image(dir, &image_name(case, model.name(), &restored), &restored)?;
                    }
                    Ok(row)
                },
            );
            match result {
                Ok(row) => row,
                Err(CliError::Core(e)) => BenchRow::failed(case, model, status_of(&e)),
                Err(e) => BenchRow::failed(case, model, format!("error: {e}")),
            }
        })
        .collect()
}

/// Runs every case and model, writes the table to `plan.output` and returns
/// the rows in plan order. Failing cases become rows with a non-`ok` status.
pub fn run_benchmark(plan: &BenchmarkPlan) -> CliResult<Vec<BenchRow>> {
    if let Some(dir) = &plan.images {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let rows: Vec<BenchRow> = plan
        .cases
        .par_iter()
        .flat_map_iter(|case| run_case(plan, case))
        .collect();
    if let Some(parent) = plan.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(&plan.output, to_csv(&rows)).map_err(|e| CliError::io(&plan.output, e))?;
    Ok(rows)
}
