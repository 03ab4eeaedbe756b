//! The coupled-interferometer experiment: network builders, shutter settings
//! and exact coincidence tables.
//!
//! Arm names follow the usual labelling: `e±` inputs, `v±`/`w±` the two arms
//! of each interferometer, `u±` the arms leaving the central splitter, `c±`/`d±`
//! the bright and dark detector ports. `loss±` collect light leaving through
//! the outer splitters and `block.*` collect light stopped by shutters.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, Pattern, QuantumState};
use crate::network::{DEFAULT_TRANSMISSIVITY, Element, NetworkDescription, apply_network};
use crate::source::{SourceParams, prepare_pair};

pub const GAMMA: &str = "gamma";

const HARDY_MODES: [&str; 18] = [
    "e+", "e-", "v+", "w+", "v-", "w-", "u+", "u-", "c+", "d+", "c-", "d-", "loss+", "loss-",
    "block.v+", "block.w+", "block.v-", "block.w-",
];

const THOUGHT_MODES: [&str; 13] = [
    "e+", "e-", "v+", "w+", "v-", "w-", "u+", "u-", "c+", "d+", "c-", "d-", GAMMA,
];

/// Number of trailing elements of the builder's network that form the final
/// (detection-side) splitters.
const FINAL_SPLITTERS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardyParams {
    pub phase_plus: f64,
    pub phase_minus: f64,
    pub central_t: f64,
    pub outer_t: f64,
    pub source: SourceParams,
}

impl Default for HardyParams {
    fn default() -> Self {
        Self {
            phase_plus: 0.0,
            phase_minus: 0.0,
            central_t: DEFAULT_TRANSMISSIVITY,
            outer_t: DEFAULT_TRANSMISSIVITY,
            source: SourceParams::default(),
        }
    }
}

impl HardyParams {
    pub fn with_p_disting(p_disting: f64) -> Self {
        Self {
            source: SourceParams::explicit(p_disting),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("central_t", self.central_t), ("outer_t", self.outer_t)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config(format!("{name} must lie in (0,1), got {t}")));
            }
        }
        for (name, phi) in [
            ("phase_plus", self.phase_plus),
            ("phase_minus", self.phase_minus),
        ] {
            if !phi.is_finite() {
                return Err(Error::config(format!("{name} must be finite")));
            }
        }
        self.source.validate()
    }
}

/// Final-splitter transmissivity that cancels the single-photon dark-port
/// amplitude given the central and outer splitters.
fn tuned_final_transmissivity(central_t: f64, outer_t: f64) -> f64 {
    let r_central = (1.0 - central_t * central_t).sqrt();
    let r_outer = (1.0 - outer_t * outer_t).sqrt();
    if central_t == outer_t {
        return DEFAULT_TRANSMISSIVITY;
    }
    r_central / (r_central * r_central + r_outer * r_outer).sqrt()
}

/// Seven-splitter photonic network with all shutters open.
pub fn build_hardy_network(params: &HardyParams) -> Result<NetworkDescription> {
    params.validate()?;
    let half = DEFAULT_TRANSMISSIVITY;
    let final_t = tuned_final_transmissivity(params.central_t, params.outer_t);
    let elements = vec![
        Element::beam_splitter_to("e+", "w+", half, "v+", "w+"),
        Element::beam_splitter_to("e-", "w-", half, "v-", "w-"),
        Element::shutter("v+", true, "block.v+"),
        Element::shutter("w+", true, "block.w+"),
        Element::shutter("v-", true, "block.v-"),
        Element::shutter("w-", true, "block.w-"),
        // outer splitters: transmission leaves, reflection continues in v
        Element::beam_splitter_to("v+", "loss+", params.outer_t, "loss+", "v+"),
        Element::beam_splitter_to("v-", "loss-", params.outer_t, "loss-", "v-"),
        // central splitter: w+ → t·u− + ir·u+, w− → ir·u− + t·u+
        Element::beam_splitter_to("w+", "w-", params.central_t, "u-", "u+"),
        Element::phase("v+", params.phase_plus),
        Element::phase("v-", params.phase_minus),
        Element::beam_splitter_to("v+", "u+", final_t, "d+", "c+"),
        Element::beam_splitter_to("v-", "u-", final_t, "d-", "c-"),
    ];
    NetworkDescription::new(HARDY_MODES.map(String::from).to_vec(), elements)
}

/// Thought-experiment variant: no outer or central splitters; both `w` arms
/// meet in an annihilation region that emits `gamma`.
pub fn build_thought_network() -> NetworkDescription {
    let half = DEFAULT_TRANSMISSIVITY;
    NetworkDescription::new(
        THOUGHT_MODES.map(String::from).to_vec(),
        vec![
            Element::beam_splitter_to("e+", "w+", half, "v+", "w+"),
            Element::beam_splitter_to("e-", "w-", half, "v-", "w-"),
            Element::annihilator("w+", "w-", GAMMA, Some(("u+", "u-"))),
            Element::beam_splitter_to("v+", "u+", half, "d+", "c+"),
            Element::beam_splitter_to("v-", "u-", half, "d-", "c-"),
        ],
    )
    .expect("thought network is statically valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    #[serde(rename = "c+")]
    CPlus,
    #[serde(rename = "d+")]
    DPlus,
    #[serde(rename = "c-")]
    CMinus,
    #[serde(rename = "d-")]
    DMinus,
}

impl Detector {
    pub const ALL: [Detector; 4] = [
        Detector::CPlus,
        Detector::DPlus,
        Detector::CMinus,
        Detector::DMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Detector::CPlus => "c+",
            Detector::DPlus => "d+",
            Detector::CMinus => "c-",
            Detector::DMinus => "d-",
        }
    }

    pub fn is_left(self) -> bool {
        matches!(self, Detector::CPlus | Detector::DPlus)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A left/right detector pair defining a cross coincidence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorPair {
    #[serde(rename = "c+c-")]
    CC,
    #[serde(rename = "c+d-")]
    CD,
    #[serde(rename = "d+c-")]
    DC,
    #[serde(rename = "d+d-")]
    DD,
}

impl DetectorPair {
    pub const ALL: [DetectorPair; 4] = [
        DetectorPair::CC,
        DetectorPair::CD,
        DetectorPair::DC,
        DetectorPair::DD,
    ];

    pub fn detectors(self) -> (Detector, Detector) {
        match self {
            DetectorPair::CC => (Detector::CPlus, Detector::CMinus),
            DetectorPair::CD => (Detector::CPlus, Detector::DMinus),
            DetectorPair::DC => (Detector::DPlus, Detector::CMinus),
            DetectorPair::DD => (Detector::DPlus, Detector::DMinus),
        }
    }

    pub fn from_detectors(left: Detector, right: Detector) -> Option<Self> {
        DetectorPair::ALL
            .into_iter()
            .find(|p| p.detectors() == (left, right))
    }

    pub fn label(self) -> &'static str {
        match self {
            DetectorPair::CC => "c+c-",
            DetectorPair::CD => "c+d-",
            DetectorPair::DC => "d+c-",
            DetectorPair::DD => "d+d-",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DetectorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which arm of one interferometer is blocked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmBlock {
    Open,
    BlockV,
    BlockW,
}

impl ArmBlock {
    pub const ALL: [ArmBlock; 3] = [ArmBlock::Open, ArmBlock::BlockV, ArmBlock::BlockW];
}

/// Shutter configuration of both interferometers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Blocking {
    pub plus: ArmBlock,
    pub minus: ArmBlock,
}

impl Blocking {
    pub const OPEN: Blocking = Blocking {
        plus: ArmBlock::Open,
        minus: ArmBlock::Open,
    };

    /// All nine open/closed combinations.
    pub fn all() -> Vec<Blocking> {
        ArmBlock::ALL
            .iter()
            .flat_map(|&plus| {
                ArmBlock::ALL
                    .iter()
                    .map(move |&minus| Blocking { plus, minus })
            })
            .collect()
    }

    pub fn closed_arms(&self) -> Vec<&'static str> {
        let mut arms = Vec::new();
        match self.plus {
            ArmBlock::Open => {}
            ArmBlock::BlockV => arms.push("v+"),
            ArmBlock::BlockW => arms.push("w+"),
        }
        match self.minus {
            ArmBlock::Open => {}
            ArmBlock::BlockV => arms.push("v-"),
            ArmBlock::BlockW => arms.push("w-"),
        }
        arms
    }

    pub fn label(&self) -> String {
        let arms = self.closed_arms();
        if arms.is_empty() {
            "open".into()
        } else {
            arms.iter()
                .map(|a| format!("{a}:closed"))
                .collect::<Vec<_>>()
                .join("/")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingName {
    Dd,
    Dv,
    Vd,
    Uu,
}

impl SettingName {
    pub const ALL: [SettingName; 4] = [
        SettingName::Dd,
        SettingName::Dv,
        SettingName::Vd,
        SettingName::Uu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SettingName::Dd => "dd",
            SettingName::Dv => "dv",
            SettingName::Vd => "vd",
            SettingName::Uu => "uu",
        }
    }

    /// Stream index used to decorrelate per-setting random numbers.
    pub fn stream_id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for SettingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SettingName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown measurement setting {s}")))
    }
}

/// Shutter configuration plus the coincidences summed to estimate one joint
/// probability of the inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSetting {
    pub name: SettingName,
    pub blocking: Blocking,
    pub count_rule: Vec<DetectorPair>,
}

impl MeasurementSetting {
    pub fn closed_arms(&self) -> Vec<&'static str> {
        self.blocking.closed_arms()
    }

    /// Sums the counted pairs of `values`, indexed by [`DetectorPair::index`].
    pub fn combine<T>(&self, values: &[T; 4]) -> T
    where
        T: Copy + std::iter::Sum<T>,
    {
        self.count_rule.iter().map(|p| values[p.index()]).sum()
    }
}

/// Setting table: `dd` all open counting d+d−; `dv` with w− closed counting
/// d+c− + d+d−; `vd` with w+ closed counting c+d− + d+d−; `uu` with both v arms
/// closed counting every cross pair.
pub fn setting(name: SettingName) -> MeasurementSetting {
    use DetectorPair::*;
    let (blocking, count_rule) = match name {
        SettingName::Dd => (Blocking::OPEN, vec![DD]),
        SettingName::Dv => (
            Blocking {
                plus: ArmBlock::Open,
                minus: ArmBlock::BlockW,
            },
            vec![DC, DD],
        ),
        SettingName::Vd => (
            Blocking {
                plus: ArmBlock::BlockW,
                minus: ArmBlock::Open,
            },
            vec![CD, DD],
        ),
        SettingName::Uu => (
            Blocking {
                plus: ArmBlock::BlockV,
                minus: ArmBlock::BlockV,
            },
            DetectorPair::ALL.to_vec(),
        ),
    };
    MeasurementSetting {
        name,
        blocking,
        count_rule,
    }
}

pub fn setting_by_name(name: &str) -> Result<MeasurementSetting> {
    Ok(setting(name.parse()?))
}

/// Copy of `net` with shutters set for `blocking`; every other shutter opens.
pub fn configure(net: &NetworkDescription, blocking: Blocking) -> Result<NetworkDescription> {
    let mut out = net.clone();
    for arm in ["v+", "w+", "v-", "w-"] {
        out.set_shutter(arm, true);
    }
    for arm in blocking.closed_arms() {
        if out.set_shutter(arm, false) == 0 {
            return Err(Error::config(format!(
                "network has no shutter on arm {arm}"
            )));
        }
    }
    Ok(out)
}

/// Final state for one source pair sent through `net` under `blocking`.
pub fn output_state(
    net: &NetworkDescription,
    source: &SourceParams,
    blocking: Blocking,
) -> Result<QuantumState> {
    let configured = configure(net, blocking)?;
    let input = prepare_pair(configured.state_registry(), source)?;
    apply_network(&configured, &input)
}

/// Cross-coincidence probabilities per detector pair, indexed by
/// [`DetectorPair::index`].
pub fn coincidence_probabilities(state: &QuantumState) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for pair in DetectorPair::ALL {
        let (l, r) = pair.detectors();
        out[pair.index()] = state
            .pattern_probability(&Pattern::new().spatial(l.label(), 1).spatial(r.label(), 1))?;
    }
    Ok(out)
}

/// Exact per-pair coincidence probabilities for every setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticTable {
    pub settings: BTreeMap<SettingName, [f64; 4]>,
}

impl AnalyticTable {
    pub fn pair(&self, name: SettingName, pair: DetectorPair) -> f64 {
        self.settings[&name][pair.index()]
    }

    /// Joint probability estimated by the setting's count rule.
    pub fn setting_probability(&self, name: SettingName) -> f64 {
        setting(name).combine(&self.settings[&name])
    }

    /// `p(u+;u−) + p(d+;v−) + p(v+;d−) − p(d+;d−)` per source pair.
    pub fn margin(&self) -> f64 {
        self.setting_probability(SettingName::Uu)
            + self.setting_probability(SettingName::Dv)
            + self.setting_probability(SettingName::Vd)
            - self.setting_probability(SettingName::Dd)
    }
}

pub fn analytic_table(params: &HardyParams) -> Result<AnalyticTable> {
    let net = build_hardy_network(params)?;
    analytic_table_for(&net, &params.source)
}

pub fn analytic_table_for(
    net: &NetworkDescription,
    source: &SourceParams,
) -> Result<AnalyticTable> {
    let mut settings = BTreeMap::new();
    for name in SettingName::ALL {
        let state = output_state(net, source, setting(name).blocking)?;
        settings.insert(name, coincidence_probabilities(&state)?);
    }
    Ok(AnalyticTable { settings })
}

/// Outcome probabilities of the thought experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThoughtTable {
    pub pairs: [f64; 4],
    pub gamma: f64,
}

impl ThoughtTable {
    pub fn pair(&self, pair: DetectorPair) -> f64 {
        self.pairs[pair.index()]
    }

    pub fn total(&self) -> f64 {
        self.pairs.iter().sum::<f64>() + self.gamma
    }
}

fn thought_input(net: &NetworkDescription) -> Result<QuantumState> {
    prepare_pair(net.state_registry(), &SourceParams::explicit(0.0))
}

/// State right after the annihilation region, before the final splitters.
pub fn thought_intermediate_state() -> Result<QuantumState> {
    let net = build_thought_network();
    let pre = net.truncated(net.elements().len() - FINAL_SPLITTERS);
    apply_network(&pre, &thought_input(&net)?)
}

pub fn thought_experiment_table() -> Result<ThoughtTable> {
    let net = build_thought_network();
    let out = apply_network(&net, &thought_input(&net)?)?;
    Ok(ThoughtTable {
        pairs: coincidence_probabilities(&out)?,
        gamma: out.pattern_probability(&Pattern::new().spatial(GAMMA, 2))?,
    })
}

/// Pre-detection state conditioned on one photon per interferometer.
#[derive(Clone, Debug)]
pub struct PostSelected {
    pub state: QuantumState,
    pub probability: f64,
}

/// State just before the final splitters, projected onto one photon in
/// `{v+, u+}` and one in `{v−, u−}`, then renormalized.
pub fn postselected_state(params: &HardyParams) -> Result<PostSelected> {
    let net = build_hardy_network(params)?;
    let pre = net.truncated(net.elements().len() - FINAL_SPLITTERS);
    let state = apply_network(&pre, &prepare_pair(pre.state_registry(), &params.source)?)?;
    let reg = state.registry();
    let plus: Vec<usize> = ["v+", "u+"]
        .iter()
        .flat_map(|a| reg.spatial_indices(a))
        .collect();
    let minus: Vec<usize> = ["v-", "u-"]
        .iter()
        .flat_map(|a| reg.spatial_indices(a))
        .collect();
    let projected = state.project(|occ| occ.sum_over(&plus) == 1 && occ.sum_over(&minus) == 1);
    let probability = projected.norm_sqr();
    Ok(PostSelected {
        state: projected.normalized()?,
        probability,
    })
}

/// Reference post-selected state `(|v+v−⟩ + i|u+v−⟩ + i|u−v+⟩)/√3` on the
/// registry of `like`.
pub fn postselected_target(like: &QuantumState) -> Result<QuantumState> {
    let m = |s: &str| ModeId::new(s, 0);
    let a = Complex64::new(1.0 / 3f64.sqrt(), 0.0);
    let ia = Complex64::new(0.0, 1.0 / 3f64.sqrt());
    QuantumState::from_terms(
        like.registry().clone(),
        &[
            (a, &[(m("v+"), 1), (m("v-"), 1)]),
            (ia, &[(m("u+"), 1), (m("v-"), 1)]),
            (ia, &[(m("u-"), 1), (m("v+"), 1)]),
        ],
    )
}

/// Contributions of the fully distinguishable "both photons swap
/// interferometers" path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapDecomposition {
    /// Swap-path cross coincidences in the `uu` setting.
    pub uu_swap: f64,
    /// Swap-path `d+d−` coincidences in the `dd` setting.
    pub dd_swap: f64,
}

impl SwapDecomposition {
    pub fn ratio(&self) -> f64 {
        self.uu_swap / self.dd_swap
    }
}

/// Splits out the swap path using internal labels: the `e+` photon is always
/// label 0, the orthogonal part of the `e−` photon is label 1, so a swap puts
/// label 1 on the left detectors and label 0 on the right.
pub fn swap_decomposition(params: &HardyParams) -> Result<SwapDecomposition> {
    let net = build_hardy_network(params)?;
    let swapped = |state: &QuantumState, pairs: &[DetectorPair]| -> Result<f64> {
        pairs.iter().try_fold(0.0, |acc, pair| {
            let (l, r) = pair.detectors();
            let p = state.pattern_probability(
                &Pattern::new()
                    .exact(ModeId::new(l.label(), 1), 1)
                    .exact(ModeId::new(r.label(), 0), 1),
            )?;
            Ok(acc + p)
        })
    };
    let uu = output_state(&net, &params.source, setting(SettingName::Uu).blocking)?;
    let dd = output_state(&net, &params.source, setting(SettingName::Dd).blocking)?;
    Ok(SwapDecomposition {
        uu_swap: swapped(&uu, &DetectorPair::ALL)?,
        dd_swap: swapped(&dd, &[DetectorPair::DD])?,
    })
}

/// Single-photon fringe `p(d | detected)` for the interferometer fed by
/// `e+` (`plus = true`) or `e−`.
pub fn fringe_probability(params: &HardyParams, plus: bool) -> Result<f64> {
    let net = build_hardy_network(params)?;
    let (input, bright, dark) = if plus {
        ("e+", "c+", "d+")
    } else {
        ("e-", "c-", "d-")
    };
    crate::network::conditional_port_probability(&net, input, bright, dark)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{single_photon_output, tuning_residual};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn default_network_is_tuned() {
        let net = build_hardy_network(&HardyParams::default()).unwrap();
        assert!(tuning_residual(&net, "e+", "d+").unwrap() < 1e-12);
        assert!(tuning_residual(&net, "e-", "d-").unwrap() < 1e-12);
        let out = single_photon_output(&net, "e+").unwrap();
        let p = |a: &str| {
            out.pattern_probability(&Pattern::new().spatial(a, 1))
                .unwrap()
        };
        assert!(close(p("c+"), 0.5, 1e-12));
        assert!(p("d+") < 1e-24);
        assert!(close(1.0 - p("c+") - p("d+"), 0.5, 1e-12));
    }

    #[test]
    fn unbalanced_splitters_stay_tuned() {
        let params = HardyParams {
            central_t: 0.6,
            outer_t: 0.8,
            ..HardyParams::default()
        };
        let net = build_hardy_network(&params).unwrap();
        assert!(tuning_residual(&net, "e+", "d+").unwrap() < 1e-12);
        assert!(tuning_residual(&net, "e-", "d-").unwrap() < 1e-12);
    }

    #[test]
    fn invalid_params_rejected() {
        let params = HardyParams {
            outer_t: 1.0,
            ..HardyParams::default()
        };
        assert!(build_hardy_network(&params).is_err());
        assert!(build_hardy_network(&HardyParams::with_p_disting(2.0)).is_err());
    }

    #[test]
    fn settings_table() {
        let dv = setting_by_name("dv").unwrap();
        assert_eq!(dv.closed_arms(), ["w-"]);
        assert_eq!(dv.count_rule, [DetectorPair::DC, DetectorPair::DD]);
        let dd = setting(SettingName::Dd);
        assert!(dd.closed_arms().is_empty());
        assert_eq!(dd.count_rule, [DetectorPair::DD]);
        let vd = setting(SettingName::Vd);
        assert_eq!(vd.closed_arms(), ["w+"]);
        assert_eq!(vd.count_rule, [DetectorPair::CD, DetectorPair::DD]);
        let uu = setting(SettingName::Uu);
        assert_eq!(uu.closed_arms(), ["v+", "v-"]);
        assert_eq!(uu.count_rule.len(), 4);
        assert!(setting_by_name("xx").is_err());
    }

    #[test]
    fn nine_blocking_combinations() {
        let all = Blocking::all();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], Blocking::OPEN);
        assert_eq!(all[0].label(), "open");
    }

    #[test]
    fn configure_needs_shutters() {
        let bare = build_thought_network();
        assert!(configure(&bare, Blocking::OPEN).is_ok());
        assert!(configure(&bare, setting(SettingName::Uu).blocking).is_err());
    }

    #[test]
    fn detector_pairs_round_trip() {
        for pair in DetectorPair::ALL {
            let (l, r) = pair.detectors();
            assert!(l.is_left() && !r.is_left());
            assert_eq!(DetectorPair::from_detectors(l, r), Some(pair));
        }
        assert_eq!(
            DetectorPair::from_detectors(Detector::CPlus, Detector::DPlus),
            None
        );
    }

    #[test]
    fn bunched_component_after_central_splitter() {
        // both photons injected directly into the w arms
        let net = build_hardy_network(&HardyParams::default()).unwrap();
        let central = net
            .elements()
            .iter()
            .position(|e| matches!(e, Element::BeamSplitter { modes, .. } if modes[0] == "w+"))
            .unwrap();
        let only_central =
            NetworkDescription::new(net.modes().to_vec(), vec![net.elements()[central].clone()])
                .unwrap();
        let reg = net.state_registry();
        let ww = QuantumState::vacuum(reg.clone())
            .add_photon(&ModeId::new("w+", 0))
            .unwrap()
            .add_photon(&ModeId::new("w-", 0))
            .unwrap();
        let out = apply_network(&only_central, &ww).unwrap();
        let i_over_root2 = Complex64::new(0.0, FRAC_1_SQRT_2);
        let m = |s: &str| ModeId::new(s, 0);
        let target = QuantumState::from_terms(
            reg,
            &[
                (i_over_root2, &[(m("u+"), 2)]),
                (i_over_root2, &[(m("u-"), 2)]),
            ],
        )
        .unwrap();
        let overlap = out.inner_product(&target).unwrap();
        assert!((overlap - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let coincident = out
            .pattern_probability(&Pattern::new().spatial("u+", 1).spatial("u-", 1))
            .unwrap();
        assert!(coincident < 1e-28);
    }

    #[test]
    fn swap_decomposition_ratio() {
        let d = swap_decomposition(&HardyParams::with_p_disting(1.0)).unwrap();
        assert!(close(d.uu_swap, 1.0 / 16.0, 1e-12));
        assert!(close(d.dd_swap, 1.0 / 64.0, 1e-12));
        assert!(close(d.ratio(), 4.0, 1e-10));
    }
}
