//! Execute a resolved run and write its artifact plus the JSON sidecar.

use crate::config::{parse_channel, sidecar_path, ResolvedRun};
use crate::output::{render_csv, render_table_json, write_text, Cell};
use anyhow::{Context, Result};
use mazer::phase::{phase_grid, phase_time_sweep};
use mazer::scattering::{
    channel_amplitudes, dressed_wavenumbers, CavityConfig, Channel,
};
use mazer::wavepacket::{
    split_and_delay_report, transmitted_density, PacketSpec, QuadratureControls,
};
use serde::Serialize;

pub fn execute(run: &ResolvedRun) -> Result<()> {
    let cfg = CavityConfig::new(run.length_k0l, run.photons_n)
        .context("scattering: invalid cavity")?;
    let (columns, rows, report_json): (Vec<&str>, Vec<Vec<Cell>>, Option<String>) =
        match run.subcommand.as_str() {
            "amplitudes" => {
                let (c, r) = amplitudes_table(run, &cfg)?;
                (c, r, None)
            }
            "phase-sweep" => {
                let (c, r) = phase_sweep_table(run, &cfg)?;
                (c, r, None)
            }
            "phase-function" => {
                let (c, r) = phase_function_table(run, &cfg)?;
                (c, r, None)
            }
            "packet" => {
                let (c, r) = packet_table(run, &cfg)?;
                (c, r, None)
            }
            "split-report" => (vec![], vec![], Some(split_report_json(run, &cfg)?)),
            other => anyhow::bail!("unknown subcommand '{other}'"),
        };

    let artifact = match report_json {
        Some(json) => json,
        None if run.format == "json" => render_table_json(&columns, &rows),
        None => render_csv(&columns, &rows),
    };
    write_text(&run.output, &artifact)?;
    let sidecar = serde_json::to_string_pretty(run).context("serializing sidecar")?;
    write_text(&sidecar_path(&run.output), &sidecar)?;
    Ok(())
}

fn k_grid(run: &ResolvedRun) -> Vec<f64> {
    match run.k {
        Some(k) => vec![k],
        None => {
            let (lo, hi, dk) = (
                run.k_min.expect("validated"),
                run.k_max.expect("validated"),
                run.dk.expect("validated"),
            );
            let count = ((hi - lo) / dk).round() as usize;
            (0..=count).map(|i| lo + i as f64 * dk).collect()
        }
    }
}

fn t_grid(run: &ResolvedRun) -> Vec<f64> {
    let (lo, hi, samples) = (
        run.t_min.expect("validated"),
        run.t_max.expect("validated"),
        run.t_samples.expect("validated"),
    );
    (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect()
}

fn quadrature(run: &ResolvedRun) -> QuadratureControls {
    QuadratureControls {
        initial_nodes: run.quad_initial_nodes,
        max_nodes: run.quad_max_nodes,
        rel_tol: run.quad_rel_tol,
    }
}

fn amplitudes_table(
    run: &ResolvedRun,
    cfg: &CavityConfig,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let columns = vec![
        "k",
        "k_plus_re",
        "k_plus_im",
        "k_minus",
        "tau_plus_re",
        "tau_plus_im",
        "tau_minus_re",
        "tau_minus_im",
        "rho_plus_re",
        "rho_plus_im",
        "rho_minus_re",
        "rho_minus_im",
        "t_e_re",
        "t_e_im",
        "r_e_re",
        "r_e_im",
        "t_g_re",
        "t_g_im",
        "r_g_re",
        "r_g_im",
        "t_e_abs2",
        "r_e_abs2",
        "t_g_abs2",
        "r_g_abs2",
        "unitarity_sum",
    ];
    let mut rows = Vec::new();
    for k in k_grid(run) {
        let q = dressed_wavenumbers(k, cfg).context("scattering: dressed wavenumbers")?;
        let b = mazer::scattering::branch_amplitudes(k, cfg)
            .context("scattering: branch amplitudes")?;
        let ch = channel_amplitudes(k, cfg).context("scattering: channel amplitudes")?;
        rows.push(vec![
            Cell::Float(k),
            Cell::Float(q.k_plus.re),
            Cell::Float(q.k_plus.im),
            Cell::Float(q.k_minus),
            Cell::Float(b.tau_plus.re),
            Cell::Float(b.tau_plus.im),
            Cell::Float(b.tau_minus.re),
            Cell::Float(b.tau_minus.im),
            Cell::Float(b.rho_plus.re),
            Cell::Float(b.rho_plus.im),
            Cell::Float(b.rho_minus.re),
            Cell::Float(b.rho_minus.im),
            Cell::Float(ch.t_excited.re),
            Cell::Float(ch.t_excited.im),
            Cell::Float(ch.r_excited.re),
            Cell::Float(ch.r_excited.im),
            Cell::Float(ch.t_ground.re),
            Cell::Float(ch.t_ground.im),
            Cell::Float(ch.r_ground.re),
            Cell::Float(ch.r_ground.im),
            Cell::Float(ch.t_excited.norm_sqr()),
            Cell::Float(ch.r_excited.norm_sqr()),
            Cell::Float(ch.t_ground.norm_sqr()),
            Cell::Float(ch.r_ground.norm_sqr()),
            Cell::Float(ch.unitarity_defect() + 1.0),
        ]);
    }
    Ok((columns, rows))
}

fn phase_sweep_table(
    run: &ResolvedRun,
    cfg: &CavityConfig,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let channel = parse_channel(run.channel.as_deref().expect("validated"))?;
    let ks = k_grid(run);
    let sweep = phase_time_sweep(cfg, channel, &ks, run.fd_step);
    let rows = sweep
        .iter()
        .map(|point| {
            vec![
                Cell::Float(point.k_bar),
                match point.t_ph_over_tcl() {
                    Some(v) => Cell::Float(v),
                    None => Cell::Empty,
                },
                Cell::Float(point.t_abs2),
                Cell::Int(i64::from(point.outcome.is_err())),
            ]
        })
        .collect();
    Ok((vec!["k_bar", "t_ph_over_tcl", "T_abs2", "flag"], rows))
}

fn phase_function_table(
    run: &ResolvedRun,
    cfg: &CavityConfig,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let channel = parse_channel(run.channel.as_deref().expect("validated"))?;
    let samples =
        phase_grid(cfg, channel, &k_grid(run)).context("phase-analysis: phase grid")?;
    let rows = samples
        .iter()
        .map(|s| {
            vec![Cell::Float(s.k), Cell::Float(s.phi), Cell::Float(s.phase_function)]
        })
        .collect();
    Ok((vec!["k", "phi", "phase_function"], rows))
}

fn packet_table(
    run: &ResolvedRun,
    cfg: &CavityConfig,
) -> Result<(Vec<&'static str>, Vec<Vec<Cell>>)> {
    let channel = parse_channel(run.channel.as_deref().expect("validated"))?;
    let k_bar = run.k_bar.expect("validated");
    let sigma = run.sigma.expect("validated");
    let grid = t_grid(run);
    let quadrature = quadrature(run);
    let cavity_spec =
        PacketSpec::new(k_bar, sigma, channel, *cfg)?.with_quadrature(quadrature);
    let cavity = transmitted_density(&cavity_spec, &grid)
        .context("wavepacket: cavity-channel density")?;
    let free_spec =
        PacketSpec::new(k_bar, sigma, Channel::Free, *cfg)?.with_quadrature(quadrature);
    let free = transmitted_density(&free_spec, &grid)
        .context("wavepacket: free-space reference density")?;
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            vec![
                Cell::Float(t),
                Cell::Float(cavity.density[i]),
                Cell::Float(free.density[i]),
            ]
        })
        .collect();
    Ok((vec!["t_over_tcl", "density_cavity", "density_free"], rows))
}

#[derive(Serialize)]
struct PeakJson {
    t_over_tcl: f64,
    height: f64,
}

#[derive(Serialize)]
struct ChannelJson {
    channel: String,
    peak_t_over_tcl: f64,
    split: bool,
    transmitted_weight: f64,
    reflected_weight: f64,
    peaks: Vec<PeakJson>,
}

#[derive(Serialize)]
struct SplitReportJson {
    length_k0l: f64,
    photons_n: u32,
    k_bar: f64,
    sigma: f64,
    excited: ChannelJson,
    ground: ChannelJson,
    delay_over_tcl: f64,
    split: bool,
}

fn split_report_json(run: &ResolvedRun, cfg: &CavityConfig) -> Result<String> {
    let k_bar = run.k_bar.expect("validated");
    let sigma = run.sigma.expect("validated");
    let report = split_and_delay_report(cfg, k_bar, sigma, &t_grid(run), quadrature(run))
        .context("wavepacket: split/delay report")?;
    let to_json = |r: &mazer::wavepacket::ChannelReport| ChannelJson {
        channel: r.channel.to_string(),
        peak_t_over_tcl: r.peak_t_over_tcl,
        split: r.split,
        transmitted_weight: r.transmitted_weight,
        reflected_weight: r.reflected_weight,
        peaks: r
            .peaks
            .iter()
            .map(|p| PeakJson { t_over_tcl: p.t_over_tcl, height: p.height })
            .collect(),
    };
    let doc = SplitReportJson {
        length_k0l: run.length_k0l,
        photons_n: run.photons_n,
        k_bar,
        sigma,
        excited: to_json(&report.excited),
        ground: to_json(&report.ground),
        delay_over_tcl: report.delay_over_tcl,
        split: report.split,
    };
    serde_json::to_string_pretty(&doc).context("serializing split report")
}
