//! Minimal tour: phase time and transmitted density for an ultra-cold atom.

use mazer::phase::{phase_time, DEFAULT_FD_STEP};
use mazer::wavepacket::transmitted_density;
use mazer::{CavityConfig, Channel, PacketSpec};

fn main() {
    let cavity = CavityConfig::new(std::f64::consts::FRAC_PI_2, 0).unwrap();

    // Wigner phase time of the excited exit channel
    let pt = phase_time(0.1, &cavity, Channel::Excited, DEFAULT_FD_STEP).unwrap();
    println!("t_ph/t_cl = {:.4}", pt.t_ph_over_tcl);
    assert!(pt.t_ph_over_tcl < 0.0); // leaves the cavity before entering it

    // transmitted density at the cavity exit, peak-normalized
    let spec = PacketSpec::new(0.1, 0.01, Channel::Excited, cavity).unwrap();
    let t_grid: Vec<f64> = (0..801).map(|i| -3.0 + 6.0 * i as f64 / 800.0).collect();
    let series = transmitted_density(&spec, &t_grid).unwrap();
    println!("peak at t/t_cl = {}", series.global_peak().t_over_tcl);
}
