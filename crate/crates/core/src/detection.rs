//! Seeded Monte Carlo detector clicks drawn from exact output distributions.
//!
//! Every trial owns a fixed window of a ChaCha8 keystream addressed by
//! `(seed, stream, trial index)`, so results do not depend on how trials are
//! split across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    Blocking, Detector, DetectorPair, HardyParams, SettingName, build_hardy_network,
    coincidence_probabilities, output_state, setting,
};
use crate::fock::QuantumState;
use crate::network::NetworkDescription;
use crate::source::SourceParams;

/// Keystream words reserved per trial (one pattern draw plus at most eight
/// Bernoulli draws of two words each).
const WORDS_PER_TRIAL: u128 = 32;
const CHUNK: u64 = 1 << 14;
/// Minimum expected count for a cell to enter the calibration estimate.
pub const MIN_CALIBRATION_COUNT: f64 = 100.0;
pub const DEFAULT_CALIBRATION_THRESHOLD: f64 = 0.10;
/// Stream offset for calibration runs, clear of the four setting streams.
const CALIBRATION_STREAM_BASE: u64 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorModel {
    /// Indexed by [`Detector::index`]: c+, d+, c−, d−.
    pub efficiency: [f64; 4],
    /// Dark-click probability per detector per coincidence window.
    pub dark_prob: [f64; 4],
    pub number_resolving: bool,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: [1.0; 4],
            dark_prob: [0.0; 4],
            number_resolving: false,
        }
    }
}

impl DetectorModel {
    pub fn uniform(efficiency: f64) -> Self {
        Self {
            efficiency: [efficiency; 4],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for d in Detector::ALL {
            let eta = self.efficiency[d.index()];
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::config(format!(
                    "efficiency of {} must lie in [0,1], got {eta}",
                    d.label()
                )));
            }
            let dark = self.dark_prob[d.index()];
            if !(0.0..1.0).contains(&dark) {
                return Err(Error::config(format!(
                    "dark probability of {} must lie in [0,1), got {dark}",
                    d.label()
                )));
            }
        }
        Ok(())
    }
}

/// Photons arriving at each detector, indexed by [`Detector::index`].
pub type PhotonCounts = [u8; 4];

/// Distribution over detector photon numbers for one source pair.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution {
    outcomes: Vec<PhotonCounts>,
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl OutputDistribution {
    pub fn new(entries: Vec<(PhotonCounts, f64)>) -> Result<Self> {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 || entries.iter().any(|e| e.1 < 0.0) {
            return Err(Error::validation(format!(
                "output distribution must sum to 1, got {total}"
            )));
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(entries.len());
        for (_, p) in &entries {
            acc += p;
            cumulative.push(acc);
        }
        let (outcomes, probabilities) = entries.into_iter().unzip();
        Ok(Self {
            outcomes,
            probabilities,
            cumulative,
        })
    }

    pub fn deterministic(counts: PhotonCounts) -> Self {
        Self::new(vec![(counts, 1.0)]).expect("unit mass")
    }

    /// Marginalizes a normalized state onto the four detector arms; photons
    /// anywhere else are undetected.
    pub fn from_state(state: &QuantumState) -> Result<Self> {
        let reg = state.registry();
        let indices: Vec<Vec<usize>> = Detector::ALL
            .iter()
            .map(|d| {
                let idx = reg.spatial_indices(d.label());
                if idx.is_empty() {
                    Err(Error::validation(format!("state has no {} arm", d.label())))
                } else {
                    Ok(idx)
                }
            })
            .collect::<Result<_>>()?;
        let mut grouped: BTreeMap<PhotonCounts, f64> = BTreeMap::new();
        for (occ, amp) in state.terms() {
            let mut counts = [0u8; 4];
            for (k, idx) in indices.iter().enumerate() {
                counts[k] = occ.sum_over(idx) as u8;
            }
            *grouped.entry(counts).or_default() += amp.norm_sqr();
        }
        Self::new(grouped.into_iter().collect())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&PhotonCounts, f64)> {
        self.outcomes.iter().zip(self.probabilities.iter().copied())
    }

    /// Inverse-CDF lookup for `u ∈ [0, 1)`.
    pub fn select(&self, u: f64) -> PhotonCounts {
        let scaled = u * self.cumulative.last().copied().unwrap_or(1.0);
        let i = self.cumulative.partition_point(|&c| c <= scaled);
        self.outcomes[i.min(self.outcomes.len() - 1)]
    }
}

/// Detector response in one trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Clicks {
    pub fired: [bool; 4],
    /// More than one photon registered (only reported when number resolving).
    pub multi_photon: [bool; 4],
}

impl Clicks {
    pub fn fired_set(&self) -> Vec<Detector> {
        Detector::ALL
            .into_iter()
            .filter(|d| self.fired[d.index()])
            .collect()
    }
}

/// Draws one output pattern, thins every photon by its detector efficiency,
/// then adds dark clicks.
pub fn sample_trial<R: Rng + ?Sized>(
    dist: &OutputDistribution,
    detectors: &DetectorModel,
    rng: &mut R,
) -> Clicks {
    let pattern = dist.select(rng.random::<f64>());
    let mut clicks = Clicks::default();
    for d in Detector::ALL {
        let i = d.index();
        let eta = detectors.efficiency[i];
        let mut detected = 0u8;
        for _ in 0..pattern[i] {
            if rng.random::<f64>() < eta {
                detected += 1;
            }
        }
        let dark = detectors.dark_prob[i] > 0.0 && rng.random::<f64>() < detectors.dark_prob[i];
        clicks.fired[i] = detected > 0 || dark;
        clicks.multi_photon[i] = detectors.number_resolving && detected > 1;
    }
    clicks
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrialOutcome {
    Coincidence(DetectorPair),
    /// Clicks on both sides but not exactly one per side (or a resolved
    /// multi-photon click); discarded.
    Ambiguous,
    None,
}

pub fn classify(clicks: &Clicks) -> TrialOutcome {
    let fired = clicks.fired_set();
    let left: Vec<Detector> = fired.iter().copied().filter(|d| d.is_left()).collect();
    let right: Vec<Detector> = fired.iter().copied().filter(|d| !d.is_left()).collect();
    match (left.as_slice(), right.as_slice()) {
        ([l], [r]) => {
            if clicks.multi_photon[l.index()] || clicks.multi_photon[r.index()] {
                TrialOutcome::Ambiguous
            } else {
                DetectorPair::from_detectors(*l, *r)
                    .map(TrialOutcome::Coincidence)
                    .unwrap_or(TrialOutcome::None)
            }
        }
        (l, r) if !l.is_empty() && !r.is_empty() => TrialOutcome::Ambiguous,
        _ => TrialOutcome::None,
    }
}

/// Cross-coincidence counts for one setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub setting: String,
    pub counts: BTreeMap<DetectorPair, u64>,
    pub trials: u64,
    pub seed: u64,
    /// Trials discarded as ambiguous multi-click events.
    pub ambiguous: u64,
}

impl CountTable {
    pub fn from_array(setting: &str, counts: [u64; 4], trials: u64, seed: u64) -> Self {
        Self {
            setting: setting.to_string(),
            counts: DetectorPair::ALL
                .into_iter()
                .map(|p| (p, counts[p.index()]))
                .collect(),
            trials,
            seed,
            ambiguous: 0,
        }
    }

    pub fn count(&self, pair: DetectorPair) -> u64 {
        self.counts.get(&pair).copied().unwrap_or(0)
    }

    pub fn as_array(&self) -> [u64; 4] {
        DetectorPair::ALL.map(|p| self.count(p))
    }

    /// Total under a setting's count rule.
    pub fn rule_count(&self, name: SettingName) -> u64 {
        setting(name).combine(&self.as_array())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    pairs: [u64; 4],
    ambiguous: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for k in 0..4 {
            self.pairs[k] += other.pairs[k];
        }
        self.ambiguous += other.ambiguous;
        self
    }
}

fn run_chunk(
    base: &ChaCha8Rng,
    dist: &OutputDistribution,
    detectors: &DetectorModel,
    start: u64,
    end: u64,
) -> Tally {
    let mut rng = base.clone();
    let mut tally = Tally::default();
    for trial in start..end {
        rng.set_word_pos(trial as u128 * WORDS_PER_TRIAL);
        match classify(&sample_trial(dist, detectors, &mut rng)) {
            TrialOutcome::Coincidence(p) => tally.pairs[p.index()] += 1,
            TrialOutcome::Ambiguous => tally.ambiguous += 1,
            TrialOutcome::None => {}
        }
    }
    tally
}

/// Samples `n_trials` source pairs from `dist` on keystream `(seed, stream)`.
pub fn sample_counts(
    dist: &OutputDistribution,
    detectors: &DetectorModel,
    label: &str,
    stream: u64,
    n_trials: u64,
    seed: u64,
) -> Result<CountTable> {
    if n_trials == 0 {
        return Err(Error::config("n_trials must be at least 1"));
    }
    detectors.validate()?;
    let mut base = ChaCha8Rng::seed_from_u64(seed);
    base.set_stream(stream);
    let chunks: Vec<(u64, u64)> = (0..n_trials.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n_trials)))
        .collect();

    #[cfg(feature = "parallel")]
    let tally = {
        use rayon::prelude::*;
        chunks
            .par_iter()
            .map(|&(s, e)| run_chunk(&base, dist, detectors, s, e))
            .reduce(Tally::default, Tally::merge)
    };
    #[cfg(not(feature = "parallel"))]
    let tally = chunks
        .iter()
        .map(|&(s, e)| run_chunk(&base, dist, detectors, s, e))
        .fold(Tally::default(), Tally::merge);

    let mut table = CountTable::from_array(label, tally.pairs, n_trials, seed);
    table.ambiguous = tally.ambiguous;
    Ok(table)
}

/// Simulated coincidence counts for one measurement setting of the default
/// network built from `params`.
pub fn run_counts(
    params: &HardyParams,
    name: SettingName,
    detectors: &DetectorModel,
    n_trials: u64,
    seed: u64,
) -> Result<CountTable> {
    let net = build_hardy_network(params)?;
    run_counts_on(&net, &params.source, name, detectors, n_trials, seed)
}

pub fn run_counts_on(
    net: &NetworkDescription,
    source: &SourceParams,
    name: SettingName,
    detectors: &DetectorModel,
    n_trials: u64,
    seed: u64,
) -> Result<CountTable> {
    let state = output_state(net, source, setting(name).blocking)?;
    let dist = OutputDistribution::from_state(&state)?;
    sample_counts(
        &dist,
        detectors,
        name.as_str(),
        name.stream_id(),
        n_trials,
        seed,
    )
}

/// Counts for one of the nine shutter combinations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationRun {
    pub blocking: Blocking,
    pub table: CountTable,
}

/// Runs every shutter combination with `n_trials` pairs each.
pub fn calibration_runs(
    params: &HardyParams,
    detectors: &DetectorModel,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<CalibrationRun>> {
    let net = build_hardy_network(params)?;
    Blocking::all()
        .into_iter()
        .enumerate()
        .map(|(k, blocking)| {
            let state = output_state(&net, &params.source, blocking)?;
            let dist = OutputDistribution::from_state(&state)?;
            let table = sample_counts(
                &dist,
                detectors,
                &blocking.label(),
                CALIBRATION_STREAM_BASE + k as u64,
                n_trials,
                seed,
            )?;
            Ok(CalibrationRun { blocking, table })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationReport {
    /// Observed over predicted counts per detector pair.
    pub pair_efficiency: BTreeMap<DetectorPair, f64>,
    /// `(max − min) / max` over the pair efficiencies.
    pub spread: f64,
    pub threshold: f64,
    pub pass: bool,
    /// The d+d− pair has the lowest efficiency, so the measured bound is not
    /// inflated relative to the d+d− count.
    pub dd_lowest: bool,
}

impl CalibrationReport {
    pub fn efficiency(&self, pair: DetectorPair) -> f64 {
        self.pair_efficiency[&pair]
    }
}

/// Estimates per-pair relative efficiency by comparing observed counts with
/// the exact prediction for every shutter combination.
pub fn calibration_spread(
    params: &HardyParams,
    runs: &[CalibrationRun],
    threshold: f64,
) -> Result<CalibrationReport> {
    let mut missing: Vec<String> = Vec::new();
    for b in Blocking::all() {
        if !runs.iter().any(|r| r.blocking == b) {
            missing.push(b.label());
        }
    }
    if !missing.is_empty() {
        return Err(Error::validation(format!(
            "calibration needs all shutter combinations; missing {}",
            missing.join(", ")
        )));
    }
    let net = build_hardy_network(params)?;
    let mut observed = [0.0f64; 4];
    let mut expected = [0.0f64; 4];
    for run in runs {
        let probs = coincidence_probabilities(&output_state(&net, &params.source, run.blocking)?)?;
        for pair in DetectorPair::ALL {
            let exp = probs[pair.index()] * run.table.trials as f64;
            if exp >= MIN_CALIBRATION_COUNT {
                expected[pair.index()] += exp;
                observed[pair.index()] += run.table.count(pair) as f64;
            }
        }
    }
    if let Some(pair) = DetectorPair::ALL
        .into_iter()
        .find(|p| expected[p.index()] == 0.0)
    {
        return Err(Error::Statistics(format!(
            "no cell predicts at least {MIN_CALIBRATION_COUNT} counts for pair {pair}"
        )));
    }
    let eff: [f64; 4] = std::array::from_fn(|k| observed[k] / expected[k]);
    let max = eff.iter().copied().fold(f64::MIN, f64::max);
    let min = eff.iter().copied().fold(f64::MAX, f64::min);
    let spread = if max > 0.0 { (max - min) / max } else { 1.0 };
    let dd = eff[DetectorPair::DD.index()];
    Ok(CalibrationReport {
        pair_efficiency: DetectorPair::ALL
            .into_iter()
            .map(|p| (p, eff[p.index()]))
            .collect(),
        spread,
        threshold,
        pass: spread <= threshold,
        dd_lowest: eff.iter().all(|&e| dd <= e),
    })
}
