//! Run configuration: flag validation, figure presets, and the resolved
//! parameter record that doubles as the reproducibility sidecar.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

/// Everything a run needs, after presets are expanded and defaults filled.
/// Serialized verbatim as the JSON sidecar; feeding it back through
/// `mazer rerun --config` reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedRun {
    pub subcommand: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub preset: Option<String>,
    pub length_k0l: f64,
    pub photons_n: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub channel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t_samples: Option<usize>,
    pub fd_step: f64,
    pub quad_initial_nodes: usize,
    pub quad_max_nodes: usize,
    pub quad_rel_tol: f64,
    pub format: String,
    pub output: PathBuf,
}

/// Physics flags a user may set explicitly; presets refuse to be overridden
/// by any of these.
#[derive(Debug, Clone, Default)]
pub struct PhysicsFlags {
    pub length_k0l: Option<f64>,
    pub photons_n: Option<u32>,
    pub channel: Option<String>,
    pub k: Option<f64>,
    pub k_bar: Option<f64>,
    pub sigma: Option<f64>,
}

impl PhysicsFlags {
    fn any_set(&self) -> bool {
        self.length_k0l.is_some()
            || self.photons_n.is_some()
            || self.channel.is_some()
            || self.k.is_some()
            || self.k_bar.is_some()
            || self.sigma.is_some()
    }
}

/// Grid and numerics flags; these may refine a preset.
#[derive(Debug, Clone, Default)]
pub struct GridFlags {
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub dk: Option<f64>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_samples: Option<usize>,
    pub fd_step: Option<f64>,
    pub nodes: Option<usize>,
    pub max_nodes: Option<usize>,
    pub quad_tol: Option<f64>,
}

/// Figure preset: pinned physics parameters plus sensible grid defaults.
struct PresetDef {
    name: &'static str,
    subcommand: &'static str,
    length_k0l: f64,
    photons_n: u32,
    channel: Option<&'static str>,
    k_bar: Option<f64>,
    sigma: Option<f64>,
    k_range: Option<(f64, f64, f64)>,
    t_range: Option<(f64, f64, usize)>,
}

fn preset_def(name: &str) -> Result<PresetDef> {
    let def = match name {
        "fig3" => PresetDef {
            name: "fig3",
            subcommand: "phase-sweep",
            length_k0l: 10.0 * PI,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: None,
            sigma: None,
            k_range: Some((0.05, 3.0, 1e-3)),
            t_range: None,
        },
        "fig4" => PresetDef {
            name: "fig4",
            subcommand: "phase-sweep",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: None,
            sigma: None,
            k_range: Some((0.05, 10.0, 1e-3)),
            t_range: None,
        },
        "fig5" => PresetDef {
            name: "fig5",
            subcommand: "phase-function",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: None,
            sigma: None,
            k_range: Some((0.05, 3.0, 1e-3)),
            t_range: None,
        },
        "fig6a" => PresetDef {
            name: "fig6a",
            subcommand: "packet",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: Some(0.1),
            sigma: Some(0.01),
            k_range: None,
            t_range: Some((-3.0, 3.0, 801)),
        },
        "fig6b" => PresetDef {
            name: "fig6b",
            subcommand: "packet",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: Some(10.0),
            sigma: Some(0.01),
            k_range: None,
            t_range: Some((0.0, 2.0, 801)),
        },
        "fig7" => PresetDef {
            name: "fig7",
            subcommand: "phase-sweep",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: Some("ground"),
            k_bar: None,
            sigma: None,
            k_range: Some((0.05, 10.0, 1e-3)),
            t_range: None,
        },
        "fig8" => PresetDef {
            name: "fig8",
            subcommand: "split-report",
            length_k0l: PI / 2.0,
            photons_n: 0,
            channel: None,
            k_bar: Some(0.1),
            sigma: Some(0.01),
            k_range: None,
            t_range: Some((-3.0, 3.0, 801)),
        },
        "fig9" => PresetDef {
            name: "fig9",
            subcommand: "packet",
            length_k0l: 10.0 * PI,
            photons_n: 0,
            channel: Some("excited"),
            k_bar: Some(10.0),
            sigma: Some(0.5),
            k_range: None,
            t_range: Some((0.0, 2.0, 801)),
        },
        other => bail!("unknown preset '{other}' (expected fig3..fig9)"),
    };
    Ok(def)
}

pub const DEFAULT_T_SAMPLES: usize = 801;

/// Expand preset + flags into a fully resolved run for `subcommand`, or fail
/// on contradictions and invalid physics.
#[allow(clippy::too_many_arguments)]
pub fn resolve(
    subcommand: &str,
    preset: Option<&str>,
    physics: PhysicsFlags,
    grid: GridFlags,
    format: Option<String>,
    output: Option<PathBuf>,
) -> Result<ResolvedRun> {
    let preset_def = preset.map(preset_def).transpose()?;
    if let Some(def) = &preset_def {
        if def.subcommand != subcommand {
            bail!(
                "preset '{}' belongs to subcommand '{}', not '{}'",
                def.name,
                def.subcommand,
                subcommand
            );
        }
        if physics.any_set() {
            bail!(
                "preset '{}' pins the physics parameters; explicit physics flags \
                 (--L, --n, --channel, --k, --k-bar, --sigma) may not override them",
                def.name
            );
        }
    }

    let length_k0l = physics
        .length_k0l
        .or(preset_def.as_ref().map(|d| d.length_k0l))
        .context("cavity length --L is required (or use --preset)")?;
    let photons_n = physics
        .photons_n
        .or(preset_def.as_ref().map(|d| d.photons_n))
        .unwrap_or(0);
    let channel = physics
        .channel
        .or(preset_def.as_ref().and_then(|d| d.channel.map(str::to_owned)));
    let k_bar = physics.k_bar.or(preset_def.as_ref().and_then(|d| d.k_bar));
    let sigma = physics.sigma.or(preset_def.as_ref().and_then(|d| d.sigma));
    let preset_k = preset_def.as_ref().and_then(|d| d.k_range);
    let preset_t = preset_def.as_ref().and_then(|d| d.t_range);

    let mut run = ResolvedRun {
        subcommand: subcommand.to_owned(),
        preset: preset_def.as_ref().map(|d| d.name.to_owned()),
        length_k0l,
        photons_n,
        channel,
        k: physics.k,
        k_bar,
        sigma,
        k_min: grid.k_min.or(preset_k.map(|r| r.0)),
        k_max: grid.k_max.or(preset_k.map(|r| r.1)),
        dk: grid.dk.or(preset_k.map(|r| r.2)),
        t_min: grid.t_min.or(preset_t.map(|r| r.0)),
        t_max: grid.t_max.or(preset_t.map(|r| r.1)),
        t_samples: grid.t_samples.or(preset_t.map(|r| r.2)),
        fd_step: grid.fd_step.unwrap_or(mazer::phase::DEFAULT_FD_STEP),
        quad_initial_nodes: grid.nodes.unwrap_or(2000),
        quad_max_nodes: grid.max_nodes.unwrap_or(32000),
        quad_rel_tol: grid.quad_tol.unwrap_or(1e-6),
        format: format.unwrap_or_else(|| {
            if subcommand == "split-report" { "json".into() } else { "csv".into() }
        }),
        output: output.unwrap_or_else(|| default_output(subcommand, preset)),
    };
    fill_subcommand_defaults(&mut run)?;
    validate(&run)?;
    Ok(run)
}

fn default_output(subcommand: &str, preset: Option<&str>) -> PathBuf {
    let stem = match preset {
        Some(p) => p.to_owned(),
        None => subcommand.replace('-', "_"),
    };
    let ext = if subcommand == "split-report" { "json" } else { "csv" };
    PathBuf::from(format!("{stem}.{ext}"))
}

fn fill_subcommand_defaults(run: &mut ResolvedRun) -> Result<()> {
    match run.subcommand.as_str() {
        "amplitudes" => {
            if run.k.is_none() && (run.k_min.is_none() || run.k_max.is_none()) {
                bail!("amplitudes needs --k or a --k-min/--k-max/--dk grid");
            }
            if run.k.is_none() && run.dk.is_none() {
                run.dk = Some(1e-2);
            }
        }
        "phase-sweep" | "phase-function" => {
            if run.channel.is_none() {
                run.channel = Some("excited".into());
            }
            if run.k_min.is_none() {
                run.k_min = Some(0.05);
            }
            if run.k_max.is_none() {
                run.k_max = Some(3.0);
            }
            if run.dk.is_none() {
                run.dk = Some(mazer::phase::DEFAULT_SWEEP_DK);
            }
        }
        "packet" => {
            if run.channel.is_none() {
                run.channel = Some("excited".into());
            }
            if run.k_bar.is_none() || run.sigma.is_none() {
                bail!("packet needs --k-bar and --sigma (or a --preset)");
            }
            if run.t_min.is_none() {
                run.t_min = Some(-3.0);
            }
            if run.t_max.is_none() {
                run.t_max = Some(3.0);
            }
            if run.t_samples.is_none() {
                run.t_samples = Some(DEFAULT_T_SAMPLES);
            }
        }
        "split-report" => {
            if run.k_bar.is_none() || run.sigma.is_none() {
                bail!("split-report needs --k-bar and --sigma (or a --preset)");
            }
            if run.t_min.is_none() {
                run.t_min = Some(-3.0);
            }
            if run.t_max.is_none() {
                run.t_max = Some(3.0);
            }
            if run.t_samples.is_none() {
                run.t_samples = Some(DEFAULT_T_SAMPLES);
            }
            if run.format != "json" {
                bail!("split-report emits JSON; --format {} is not supported", run.format);
            }
        }
        other => bail!("unknown subcommand '{other}'"),
    }
    Ok(())
}

/// Physical and structural constraints on a fully resolved run.
pub fn validate(run: &ResolvedRun) -> Result<()> {
    if !run.length_k0l.is_finite() || run.length_k0l <= 0.0 {
        bail!("cavity length must be positive, got {}", run.length_k0l);
    }
    if let Some(k) = run.k {
        if !k.is_finite() || k <= 0.0 {
            bail!("wavenumber --k must be positive, got {k}");
        }
    }
    if let Some(k_bar) = run.k_bar {
        if !k_bar.is_finite() || k_bar <= 0.0 {
            bail!("mean wavenumber --k-bar must be positive, got {k_bar}");
        }
    }
    if let Some(sigma) = run.sigma {
        if !sigma.is_finite() || sigma <= 0.0 {
            bail!("spectral width --sigma must be positive, got {sigma}");
        }
    }
    if let Some(ch) = &run.channel {
        if ch != "excited" && ch != "ground" {
            bail!("channel must be 'excited' or 'ground', got '{ch}'");
        }
    }
    if let (Some(lo), Some(hi)) = (run.k_min, run.k_max) {
        let grid_ok = lo > 0.0 && hi > lo;
        if !grid_ok {
            bail!("k grid must satisfy 0 < k-min < k-max, got [{lo}, {hi}]");
        }
        if let Some(dk) = run.dk {
            let dk_ok = dk > 0.0 && dk <= hi - lo;
            if !dk_ok {
                bail!("grid step --dk must lie in (0, k-max - k-min], got {dk}");
            }
        }
    }
    if let (Some(lo), Some(hi)) = (run.t_min, run.t_max) {
        let grid_ok = hi > lo;
        if !grid_ok {
            bail!("time grid must satisfy t-min < t-max, got [{lo}, {hi}]");
        }
    }
    if let Some(samples) = run.t_samples {
        if samples < 2 {
            bail!("time grid needs at least 2 samples, got {samples}");
        }
    }
    let fd_ok = run.fd_step > 0.0;
    if !fd_ok {
        bail!("finite-difference step must be positive, got {}", run.fd_step);
    }
    if run.quad_initial_nodes < 2 || run.quad_max_nodes < run.quad_initial_nodes {
        bail!(
            "quadrature nodes must satisfy 2 <= nodes <= max-nodes, got {} and {}",
            run.quad_initial_nodes,
            run.quad_max_nodes
        );
    }
    let tol_ok = run.quad_rel_tol > 0.0;
    if !tol_ok {
        bail!("quadrature tolerance must be positive, got {}", run.quad_rel_tol);
    }
    if run.format != "csv" && run.format != "json" {
        bail!("format must be csv or json, got '{}'", run.format);
    }
    Ok(())
}

/// Parse the channel string of a resolved run.
pub fn parse_channel(name: &str) -> Result<mazer::Channel> {
    match name {
        "excited" => Ok(mazer::Channel::Excited),
        "ground" => Ok(mazer::Channel::Ground),
        "free" => Ok(mazer::Channel::Free),
        other => bail!("unknown channel '{other}'"),
    }
}

/// Sidecar path: the artifact path with its extension replaced.
pub fn sidecar_path(output: &std::path::Path) -> PathBuf {
    output.with_extension("params.json")
}
