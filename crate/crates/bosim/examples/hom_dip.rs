//! Two-photon interference dip and its bunching complement.
//!
//! Indistinguishable photons entering a balanced splitter from opposite
//! ports never exit in coincidence; a relative delay tau restores the
//! coincidences as the single-photon wavepackets stop overlapping:
//!
//! ```text
//! P_cc(tau)   = (1 - V v(tau)^2) / 2
//! P_same(tau) = (1 + V v(tau)^2) / 2
//! ```
//!
//! with v(tau) the wavepacket overlap and V the mode-match visibility.
//! The two channels sum to one at every delay.
//!
//! Run with `cargo run --example hom_dip`.

use bosim::experiments::{
    fit_visibility, run_scan, same_output_rate, ExperimentConfig, ScanKind,
};

fn main() -> bosim::Result<()> {
    let cfg = ExperimentConfig::default();
    let curve = run_scan(ScanKind::HomDip, &cfg, false)?;

    println!("interference dip scan ({} points)", curve.points.len());
    println!();
    println!("  delay (fs)   coincidence   same-output   sum");
    for point in curve.points.iter().step_by(10) {
        let same = same_output_rate(point.delay_fs, &cfg)?;
        println!(
            "  {:>10.1}   {:>11.6}   {:>11.6}   {:.12}",
            point.delay_fs,
            point.probability,
            same,
            point.probability + same
        );
    }

    let minimum = curve
        .points
        .iter()
        .map(|p| p.probability)
        .fold(f64::INFINITY, f64::min);
    println!();
    println!("  dip minimum: {minimum:.6} (ideal (1 - V)/2 = {:.6})", (1.0 - cfg.mode_match_visibility) / 2.0);
    println!(
        "  fitted visibility: {:.6} (configured {:.2})",
        fit_visibility(&curve)?,
        cfg.mode_match_visibility
    );
    Ok(())
}
