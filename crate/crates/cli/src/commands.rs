use std::fmt::Write as _;
use std::fs;

use hardy_core::detection::{
    CountTable, DEFAULT_CALIBRATION_THRESHOLD, calibration_runs, calibration_spread, run_counts,
    run_counts_on,
};
use hardy_core::experiment::{
    DetectorPair, HardyParams, SettingName, analytic_table, analytic_table_for,
    build_hardy_network, fringe_probability, swap_decomposition, thought_experiment_table,
};
use hardy_core::lhv::{
    Verdict, ViolationOptions, analytic_joint_probabilities, enumerate_strategies,
    evaluate_violation, quasi_distribution_for, strategy_probabilities, threshold_scan,
    verify_all_vertices, verify_inequality_chain,
};
use hardy_core::network::{NetworkDescription, parse_network};
use hardy_core::source::SourceParams;
use serde_json::json;

use crate::config::RunConfig;
use crate::{CliError, Output};

const BOUND: &str = "p(d+;d-) <= p(u+;u-) + p(d+;v-) + p(v+;d-)";

/// `n/d` for small denominators, otherwise the decimal value.
fn fraction(x: f64) -> String {
    for d in [1u32, 2, 4, 8, 16, 32, 64, 128, 256] {
        let n = x * d as f64;
        if (n - n.round()).abs() < 1e-9 {
            return if d == 1 {
                format!("{}", n.round())
            } else {
                format!("{}/{d}", n.round())
            };
        }
    }
    format!("{x:.6}")
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn load_network(cfg: &RunConfig) -> Result<Option<NetworkDescription>, CliError> {
    let Some(path) = &cfg.network else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(Some(parse_network(&text)?))
}

pub fn analytic(cfg: &RunConfig) -> Result<Output, CliError> {
    let table = match load_network(cfg)? {
        Some(net) => analytic_table_for(&net, &cfg.params.source)?,
        None => analytic_table(&cfg.params)?,
    };
    let mut csv = String::from("setting,pair,probability\n");
    let mut settings = serde_json::Map::new();
    for name in SettingName::ALL {
        let mut row = serde_json::Map::new();
        for pair in DetectorPair::ALL {
            let p = table.pair(name, pair);
            writeln!(csv, "{name},{pair},{p}").unwrap();
            row.insert(pair.to_string(), json!(p));
        }
        settings.insert(name.to_string(), row.into());
    }
    let margin = table.margin();
    Ok(Output {
        csv,
        json: json!({ "settings": settings, "margin": margin }),
        summary: vec![
            format!(
                "p(d+;d-) = {}, p(u+;u-) = {}, p(d+;v-) = {}, p(v+;d-) = {}",
                fraction(table.setting_probability(SettingName::Dd)),
                fraction(table.setting_probability(SettingName::Uu)),
                fraction(table.setting_probability(SettingName::Dv)),
                fraction(table.setting_probability(SettingName::Vd)),
            ),
            format!(
                "local-bound margin per pair = {margin:.6} ({})",
                if margin < 0.0 {
                    "violated"
                } else {
                    "satisfied"
                }
            ),
        ],
        inconclusive: false,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    let network = load_network(cfg)?;
    let mut summary = Vec::new();
    let mut options = ViolationOptions::normalized();
    let mut calibration = serde_json::Value::Null;
    if cfg.calibrate {
        if network.is_some() {
            return Err(CliError::Config(
                "calibration uses the built-in network; drop --network".into(),
            ));
        }
        let runs = calibration_runs(&cfg.params, &cfg.detectors, cfg.n_trials, cfg.seed)?;
        let report = calibration_spread(&cfg.params, &runs, DEFAULT_CALIBRATION_THRESHOLD)?;
        summary.push(format!(
            "calibration: pair-efficiency spread {:.4} ({} threshold {}), d+d- lowest: {}",
            report.spread,
            if report.pass { "within" } else { "exceeds" },
            report.threshold,
            report.dd_lowest
        ));
        options.efficiency = Some(report.pair_efficiency.clone());
        calibration = serde_json::to_value(&report).expect("report serializes");
    }
    let tables: Vec<CountTable> = SettingName::ALL
        .iter()
        .map(|&name| match &network {
            Some(net) => run_counts_on(
                net,
                &cfg.params.source,
                name,
                &cfg.detectors,
                cfg.n_trials,
                cfg.seed,
            ),
            None => run_counts(&cfg.params, name, &cfg.detectors, cfg.n_trials, cfg.seed),
        })
        .collect::<hardy_core::Result<_>>()?;
    let report = evaluate_violation(&tables, &options)?;

    let mut csv = String::from("setting,pair,count,trials,seed\n");
    for t in &tables {
        for pair in DetectorPair::ALL {
            writeln!(
                csv,
                "{},{pair},{},{},{}",
                t.setting,
                t.count(pair),
                t.trials,
                t.seed
            )
            .unwrap();
        }
    }
    summary.push(report.summary());
    if let Some(z) = report.significance() {
        summary.push(format!(
            "significance grows as sqrt(n): {z:.2} sigma at {} trials per setting, {:.2} at 10x",
            report.trials,
            report
                .projected_significance(report.trials * 10)
                .unwrap_or(z)
        ));
    }
    summary.push(format!("error model: {}", report.error_model));
    Ok(Output {
        csv,
        json: json!({ "tables": tables, "report": report, "calibration": calibration }),
        summary,
        inconclusive: report.verdict == Verdict::Inconclusive,
    })
}

pub fn thought() -> Result<Output, CliError> {
    let t = thought_experiment_table()?;
    let mut csv = String::from("outcome,probability\n");
    let mut rows = serde_json::Map::new();
    for pair in DetectorPair::ALL {
        writeln!(csv, "{pair},{}", t.pair(pair)).unwrap();
        rows.insert(pair.to_string(), json!(t.pair(pair)));
    }
    writeln!(csv, "gamma,{}", t.gamma).unwrap();
    rows.insert("gamma".into(), json!(t.gamma));
    let summary = DetectorPair::ALL
        .iter()
        .map(|&p| format!("p({p}) = {}", fraction(t.pair(p))))
        .chain([format!("p(gamma) = {}", fraction(t.gamma))])
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Output {
        csv,
        json: rows.into(),
        summary: vec![summary],
        inconclusive: false,
    })
}

/// Point `k` of the scan samples with seed `seed + k`.
pub fn scan_delay(cfg: &RunConfig) -> Result<Output, CliError> {
    let source = cfg.params.source;
    let delays = linspace(
        -cfg.scan.delay_max_fs,
        cfg.scan.delay_max_fs,
        cfg.scan.points,
    );
    let mut csv = String::from("delay_fs,p_disting,uu_probability,uu_count,trials,seed\n");
    let mut rows = Vec::new();
    for (k, &delay) in delays.iter().enumerate() {
        let params = HardyParams {
            source: SourceParams::from_delay(delay, source.coherence_time_fs, source.p_disting),
            ..cfg.params
        };
        let p = params.source.effective_p_disting()?;
        let prob = analytic_table(&params)?.setting_probability(SettingName::Uu);
        let seed = cfg.seed.wrapping_add(k as u64);
        let count = run_counts(&params, SettingName::Uu, &cfg.detectors, cfg.n_trials, seed)?
            .rule_count(SettingName::Uu);
        writeln!(csv, "{delay},{p},{prob},{count},{},{seed}", cfg.n_trials).unwrap();
        rows.push(json!({
            "delay_fs": delay, "p_disting": p, "uu_probability": prob,
            "uu_count": count, "trials": cfg.n_trials, "seed": seed,
        }));
    }
    Ok(Output {
        csv,
        json: rows.into(),
        summary: vec![format!(
            "u+u- rate dips to {} of its far-delay value at zero delay (coherence time {} fs)",
            source.p_disting, source.coherence_time_fs
        )],
        inconclusive: false,
    })
}

pub fn scan_phase(cfg: &RunConfig) -> Result<Output, CliError> {
    let phases = linspace(0.0, 2.0 * std::f64::consts::PI, cfg.scan.points);
    let mut csv = String::from("phase_rad,fringe_plus,fringe_minus\n");
    let mut rows = Vec::new();
    for &phi in &phases {
        let params = HardyParams {
            phase_plus: phi,
            phase_minus: phi,
            ..cfg.params
        };
        let plus = fringe_probability(&params, true)?;
        let minus = fringe_probability(&params, false)?;
        writeln!(csv, "{phi},{plus},{minus}").unwrap();
        rows.push(json!({ "phase_rad": phi, "fringe_plus": plus, "fringe_minus": minus }));
    }
    Ok(Output {
        csv,
        json: rows.into(),
        summary: vec![
            "single-photon fringe p(d | detected) = sin^2(phi/2) per interferometer".into(),
        ],
        inconclusive: false,
    })
}

pub fn verify_lhv(cfg: &RunConfig) -> Result<Output, CliError> {
    let reports = verify_all_vertices();
    let mut csv = String::from("strategy,dd,uu,dv,vd,slack,holds\n");
    let mut rows = Vec::new();
    for (s, report) in &reports {
        let q = strategy_probabilities(s);
        let slack = *report.final_slack().numer();
        let holds = report.all_hold();
        writeln!(
            csv,
            "{s},{},{},{},{},{slack},{holds}",
            q.dd, q.uu, q.dv, q.vd
        )
        .unwrap();
        rows.push(json!({
            "strategy": s.to_string(), "dd": q.dd, "uu": q.uu, "dv": q.dv, "vd": q.vd,
            "slack": slack, "holds": holds,
        }));
    }
    let passing = reports.iter().filter(|(_, r)| r.all_hold()).count();
    let mut summary = vec![format!(
        "{passing}/{} strategies satisfy {BOUND}",
        enumerate_strategies().len()
    )];

    let quantum = analytic_joint_probabilities(&cfg.params)?;
    let quasi = verify_inequality_chain(&quasi_distribution_for(&quantum)?);
    let failures = quasi.failures();
    summary.push(if failures.is_empty() {
        format!(
            "quantum prediction at p_disting = {} is reproduced by a local model",
            cfg.params.source.p_disting
        )
    } else {
        format!(
            "quantum prediction at p_disting = {} needs negative weights; failing steps: {}",
            cfg.params.source.p_disting,
            failures.join(", ")
        )
    });
    if passing != reports.len() {
        return Err(CliError::Config(summary.join("; ")));
    }
    Ok(Output {
        csv,
        json: json!({ "strategies": rows, "passing": passing, "quantum_failures": failures }),
        summary,
        inconclusive: false,
    })
}

pub fn threshold(cfg: &RunConfig) -> Result<Output, CliError> {
    build_hardy_network(&cfg.params)?;
    let grid = linspace(0.0, 1.0, cfg.scan.points);
    let scan = threshold_scan(&grid, &cfg.params)?;
    let swap = swap_decomposition(&HardyParams {
        source: SourceParams::explicit(1.0),
        ..cfg.params
    })?;
    let mut csv = String::from("p_disting,margin,dd,uu,dv,vd\n");
    for pt in &scan.points {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            pt.p_disting, pt.margin, pt.dd, pt.uu, pt.dv, pt.vd
        )
        .unwrap();
    }
    let root_line = match scan.root {
        Some(r) => format!("p*={r:.6}"),
        None => "no zero crossing in [0,1]".into(),
    };
    Ok(Output {
        csv,
        json: json!({ "points": scan.points, "root": scan.root, "swap": swap, "swap_ratio": swap.ratio() }),
        summary: vec![
            root_line,
            format!(
                "swap events at p_disting = 1: u+u- {} vs d+d- {} (ratio {:.2})",
                fraction(swap.uu_swap),
                fraction(swap.dd_swap),
                swap.ratio()
            ),
        ],
        inconclusive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(fraction(0.0625), "1/16");
        assert_eq!(fraction(9.0 / 64.0), "9/64");
        assert_eq!(fraction(1.0), "1");
        assert_eq!(fraction(0.0), "0");
        assert_eq!(fraction(0.1), "0.100000");
    }

    #[test]
    fn grid_endpoints() {
        let g = linspace(-1.0, 1.0, 5);
        assert_eq!(g, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
