//! Plot data for the browser demo, in plain Rust so it can be tested natively.

use hardy_core::Result;
use hardy_core::experiment::{
    DetectorPair, HardyParams, SettingName, analytic_table, fringe_probability,
};
use hardy_core::lhv::threshold_scan;
use hardy_core::source::SourceParams;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn phases(phase_plus: f64, phase_minus: f64, p_disting: f64) -> HardyParams {
    HardyParams {
        phase_plus,
        phase_minus,
        ..HardyParams::with_p_disting(p_disting)
    }
}

/// 16 pair probabilities (settings dd, dv, vd, uu; pairs c+c−, c+d−, d+c−,
/// d+d−) followed by the local-bound margin.
pub fn coincidence_table(p_disting: f64, phase_plus: f64, phase_minus: f64) -> Result<Vec<f64>> {
    let table = analytic_table(&phases(phase_plus, phase_minus, p_disting))?;
    let mut out: Vec<f64> = [
        SettingName::Dd,
        SettingName::Dv,
        SettingName::Vd,
        SettingName::Uu,
    ]
    .iter()
    .flat_map(|&s| DetectorPair::ALL.map(|p| table.pair(s, p)))
    .collect();
    out.push(table.margin());
    Ok(out)
}

/// Interleaved `(phase, p(d+ | detected))` over one period.
pub fn fringe_curve(points: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points);
    for phi in linspace(0.0, 2.0 * std::f64::consts::PI, points) {
        out.push(phi);
        out.push(fringe_probability(&phases(phi, phi, 0.0), true)?);
    }
    Ok(out)
}

/// Interleaved `(p_disting, margin)` over [0, 1].
pub fn threshold_curve(phase_plus: f64, phase_minus: f64, points: usize) -> Result<Vec<f64>> {
    let grid = linspace(0.0, 1.0, points);
    let scan = threshold_scan(&grid, &phases(phase_plus, phase_minus, 0.0))?;
    Ok(scan
        .points
        .iter()
        .flat_map(|pt| [pt.p_disting, pt.margin])
        .collect())
}

/// Distinguishability at which the margin vanishes, NaN if it never does.
pub fn threshold_root(phase_plus: f64, phase_minus: f64) -> Result<f64> {
    let scan = threshold_scan(&[0.0, 1.0], &phases(phase_plus, phase_minus, 0.0))?;
    Ok(scan.root.unwrap_or(f64::NAN))
}

/// Interleaved `(delay_fs, p(u+;u−))` over [−delay_max, delay_max].
pub fn delay_curve(
    floor: f64,
    coherence_time_fs: f64,
    delay_max_fs: f64,
    points: usize,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * points);
    for delay in linspace(-delay_max_fs, delay_max_fs, points) {
        let params = HardyParams {
            source: SourceParams::from_delay(delay, coherence_time_fs, floor),
            ..HardyParams::default()
        };
        out.push(delay);
        out.push(analytic_table(&params)?.setting_probability(SettingName::Uu));
    }
    Ok(out)
}
