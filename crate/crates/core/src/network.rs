//! Linear-optical circuits: element list, text format, and evolution.
//!
//! Text format, one directive per line, `#` starts a comment:
//!
//! ```text
//! mode <name>...
//! bs <m1> <m2> [t] [out=<o1>,<o2>]
//! phase <m> <radians>
//! shutter <m> <open|closed> loss=<lossmode>
//! annihilate <m1> <m2> gamma=<gmode> [out=<o1>,<o2>]
//! ```
//!
//! `bs` uses the symmetric convention: a photon entering `m1` leaves as
//! `t|m1⟩ + ir|m2⟩`. The optional `out=` clause renames the two output ports,
//! so `bs e+ w+ out=v+,w+` sends the transmitted amplitude into arm `v+`.
//! Outputs that are not also inputs must be empty when the element fires.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{
    INTERNAL_LABELS, Matrix2, ModeId, Pattern, QuantumState, Registry, beam_splitter_matrix,
};

pub const DEFAULT_TRANSMISSIVITY: f64 = FRAC_1_SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    BeamSplitter {
        modes: [String; 2],
        transmissivity: f64,
        outputs: Option<[String; 2]>,
    },
    Phase {
        mode: String,
        radians: f64,
    },
    /// A closed shutter routes its arm entirely into `loss`.
    Shutter {
        mode: String,
        open: bool,
        loss: String,
    },
    /// Sends any term with one photon in each of `modes` to `gamma`, with
    /// certainty. Other terms pass through (renamed by `outputs`, if given).
    Annihilator {
        modes: [String; 2],
        gamma: String,
        outputs: Option<[String; 2]>,
    },
}

impl Element {
    pub fn beam_splitter(m1: &str, m2: &str, transmissivity: f64) -> Self {
        Element::BeamSplitter {
            modes: [m1.into(), m2.into()],
            transmissivity,
            outputs: None,
        }
    }

    pub fn beam_splitter_to(m1: &str, m2: &str, transmissivity: f64, o1: &str, o2: &str) -> Self {
        Element::BeamSplitter {
            modes: [m1.into(), m2.into()],
            transmissivity,
            outputs: Some([o1.into(), o2.into()]),
        }
    }

    pub fn phase(mode: &str, radians: f64) -> Self {
        Element::Phase {
            mode: mode.into(),
            radians,
        }
    }

    pub fn shutter(mode: &str, open: bool, loss: &str) -> Self {
        Element::Shutter {
            mode: mode.into(),
            open,
            loss: loss.into(),
        }
    }

    pub fn annihilator(m1: &str, m2: &str, gamma: &str, outputs: Option<(&str, &str)>) -> Self {
        Element::Annihilator {
            modes: [m1.into(), m2.into()],
            gamma: gamma.into(),
            outputs: outputs.map(|(a, b)| [a.into(), b.into()]),
        }
    }

    fn referenced_modes(&self) -> Vec<&str> {
        match self {
            Element::BeamSplitter { modes, outputs, .. } => {
                let mut v: Vec<&str> = modes.iter().map(String::as_str).collect();
                if let Some(o) = outputs {
                    v.extend(o.iter().map(String::as_str));
                }
                v
            }
            Element::Phase { mode, .. } => vec![mode],
            Element::Shutter { mode, loss, .. } => vec![mode, loss],
            Element::Annihilator {
                modes,
                gamma,
                outputs,
            } => {
                let mut v: Vec<&str> = modes.iter().map(String::as_str).collect();
                v.push(gamma);
                if let Some(o) = outputs {
                    v.extend(o.iter().map(String::as_str));
                }
                v
            }
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        match self {
            Element::BeamSplitter {
                modes,
                transmissivity,
                outputs,
            } => {
                if modes[0] == modes[1] {
                    return Err("beamsplitter modes must differ".into());
                }
                if let Some(o) = outputs
                    && o[0] == o[1]
                {
                    return Err("beamsplitter outputs must differ".into());
                }
                if !(*transmissivity > 0.0 && *transmissivity < 1.0) {
                    return Err(format!(
                        "transmissivity must lie in (0,1), got {transmissivity}"
                    ));
                }
            }
            Element::Phase { radians, .. } => {
                if !radians.is_finite() {
                    return Err("phase must be finite".into());
                }
            }
            Element::Shutter { mode, loss, .. } => {
                if mode == loss {
                    return Err("shutter loss mode must differ from its arm".into());
                }
            }
            Element::Annihilator {
                modes,
                gamma,
                outputs,
            } => {
                if modes[0] == modes[1] {
                    return Err("annihilator modes must differ".into());
                }
                if modes.contains(gamma) {
                    return Err("gamma mode must differ from the annihilating arms".into());
                }
                if let Some(o) = outputs {
                    if o[0] == o[1] {
                        return Err("annihilator outputs must differ".into());
                    }
                    if o.contains(gamma) {
                        return Err("gamma mode must differ from the outputs".into());
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::BeamSplitter {
                modes,
                transmissivity,
                outputs,
            } => {
                write!(f, "bs {} {}", modes[0], modes[1])?;
                if *transmissivity != DEFAULT_TRANSMISSIVITY {
                    write!(f, " {transmissivity:?}")?;
                }
                if let Some(o) = outputs {
                    write!(f, " out={},{}", o[0], o[1])?;
                }
                Ok(())
            }
            Element::Phase { mode, radians } => write!(f, "phase {mode} {radians:?}"),
            Element::Shutter { mode, open, loss } => write!(
                f,
                "shutter {mode} {} loss={loss}",
                if *open { "open" } else { "closed" }
            ),
            Element::Annihilator {
                modes,
                gamma,
                outputs,
            } => {
                write!(f, "annihilate {} {} gamma={gamma}", modes[0], modes[1])?;
                if let Some(o) = outputs {
                    write!(f, " out={},{}", o[0], o[1])?;
                }
                Ok(())
            }
        }
    }
}

/// Ordered element list over a registry of spatial arms.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDescription {
    modes: Vec<String>,
    elements: Vec<Element>,
}

impl NetworkDescription {
    pub fn new(modes: Vec<String>, elements: Vec<Element>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(Error::config(format!("mode {m} declared twice")));
            }
        }
        let mut net = Self {
            modes,
            elements: Vec::new(),
        };
        for el in elements {
            net.check_element(&el).map_err(Error::Validation)?;
            net.elements.push(el);
        }
        Ok(net)
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn elements_mut(&mut self) -> &mut [Element] {
        &mut self.elements
    }

    /// Shutter loss targets and annihilator gamma modes.
    pub fn sink_modes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for el in &self.elements {
            let sink = match el {
                Element::Shutter { loss, .. } => loss.as_str(),
                Element::Annihilator { gamma, .. } => gamma.as_str(),
                _ => continue,
            };
            if !out.contains(&sink) {
                out.push(sink);
            }
        }
        out
    }

    /// A network containing only the first `n` elements.
    pub fn truncated(&self, n: usize) -> Self {
        Self {
            modes: self.modes.clone(),
            elements: self.elements[..n.min(self.elements.len())].to_vec(),
        }
    }

    /// Registry with every spatial arm under both internal labels.
    pub fn state_registry(&self) -> Arc<Registry> {
        Arc::new(
            Registry::with_internal_labels(&self.modes)
                .expect("network modes are validated unique and non-empty"),
        )
    }

    /// Sets every shutter on `mode`; returns how many were changed.
    pub fn set_shutter(&mut self, mode: &str, open_state: bool) -> usize {
        let mut n = 0;
        for el in &mut self.elements {
            if let Element::Shutter { mode: m, open, .. } = el
                && m == mode
            {
                *open = open_state;
                n += 1;
            }
        }
        n
    }

    fn check_element(&self, el: &Element) -> std::result::Result<(), String> {
        el.validate()?;
        for m in el.referenced_modes() {
            if !self.modes.iter().any(|x| x == m) {
                return Err(format!("undeclared mode {m}"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for NetworkDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode {}", self.modes.join(" "))?;
        for el in &self.elements {
            writeln!(f, "{el}")?;
        }
        Ok(())
    }
}

/// Parses the line-oriented network format.
pub fn parse_network(text: &str) -> Result<NetworkDescription> {
    let mut net = NetworkDescription {
        modes: Vec::new(),
        elements: Vec::new(),
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let directive = tokens.next().expect("non-empty line has a token");
        let args: Vec<&str> = tokens.collect();
        let (positional, keyed) = split_keyed(&args).map_err(err)?;

        let element = match directive {
            "mode" => {
                if positional.is_empty() || !keyed.is_empty() {
                    return Err(err("mode expects one or more names".into()));
                }
                for name in positional {
                    if net.modes.iter().any(|m| m == name) {
                        return Err(err(format!("mode {name} declared twice")));
                    }
                    net.modes.push(name.to_string());
                }
                continue;
            }
            "bs" => {
                expect_keys(&keyed, &["out"]).map_err(err)?;
                let (m1, m2, t) = match positional.as_slice() {
                    [a, b] => (*a, *b, DEFAULT_TRANSMISSIVITY),
                    [a, b, t] => (*a, *b, parse_f64(t).map_err(err)?),
                    _ => return Err(err("bs expects 2 modes and an optional t".into())),
                };
                Element::BeamSplitter {
                    modes: [m1.into(), m2.into()],
                    transmissivity: t,
                    outputs: parse_outputs(&keyed).map_err(err)?,
                }
            }
            "phase" => {
                expect_keys(&keyed, &[]).map_err(err)?;
                match positional.as_slice() {
                    [m, r] => Element::phase(m, parse_f64(r).map_err(err)?),
                    _ => return Err(err("phase expects a mode and an angle".into())),
                }
            }
            "shutter" => {
                expect_keys(&keyed, &["loss"]).map_err(err)?;
                let loss = lookup(&keyed, "loss")
                    .ok_or_else(|| err("shutter requires loss=<mode>".into()))?;
                match positional.as_slice() {
                    [m, state] => {
                        let open = match *state {
                            "open" => true,
                            "closed" => false,
                            other => {
                                return Err(err(format!(
                                    "shutter state must be open or closed, got {other}"
                                )));
                            }
                        };
                        Element::shutter(m, open, loss)
                    }
                    _ => return Err(err("shutter expects a mode and open|closed".into())),
                }
            }
            "annihilate" => {
                expect_keys(&keyed, &["gamma", "out"]).map_err(err)?;
                let gamma = lookup(&keyed, "gamma")
                    .ok_or_else(|| err("annihilate requires gamma=<mode>".into()))?;
                match positional.as_slice() {
                    [a, b] => Element::Annihilator {
                        modes: [a.to_string(), b.to_string()],
                        gamma: gamma.into(),
                        outputs: parse_outputs(&keyed).map_err(err)?,
                    },
                    _ => return Err(err("annihilate expects 2 modes".into())),
                }
            }
            other => return Err(err(format!("unknown directive {other}"))),
        };
        net.check_element(&element).map_err(err)?;
        net.elements.push(element);
    }
    if net.modes.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "network declares no modes".into(),
        });
    }
    Ok(net)
}

type SplitArgs<'a> = (Vec<&'a str>, Vec<(&'a str, &'a str)>);

fn split_keyed<'a>(args: &[&'a str]) -> std::result::Result<SplitArgs<'a>, String> {
    let mut positional = Vec::new();
    let mut keyed = Vec::new();
    for a in args {
        match a.split_once('=') {
            Some((k, v)) => {
                if v.is_empty() {
                    return Err(format!("empty value for {k}="));
                }
                if keyed.iter().any(|(k2, _)| *k2 == k) {
                    return Err(format!("{k}= given twice"));
                }
                keyed.push((k, v));
            }
            None => {
                if !keyed.is_empty() {
                    return Err(format!("positional argument {a} after key=value"));
                }
                positional.push(*a);
            }
        }
    }
    Ok((positional, keyed))
}

fn expect_keys(keyed: &[(&str, &str)], allowed: &[&str]) -> std::result::Result<(), String> {
    match keyed.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(format!("unexpected key {k}=")),
        None => Ok(()),
    }
}

fn lookup<'a>(keyed: &[(&str, &'a str)], key: &str) -> Option<&'a str> {
    keyed.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn parse_outputs(keyed: &[(&str, &str)]) -> std::result::Result<Option<[String; 2]>, String> {
    match lookup(keyed, "out") {
        None => Ok(None),
        Some(v) => match v.split(',').collect::<Vec<_>>().as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => Ok(Some([a.to_string(), b.to_string()])),
            _ => Err(format!("out= expects two comma-separated modes, got {v}")),
        },
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a number, got {s}"))
}

fn mode(spatial: &str, internal: u8) -> ModeId {
    ModeId::new(spatial, internal)
}

fn require_registered(state: &QuantumState, net: &NetworkDescription) -> Result<()> {
    let reg = state.registry();
    for m in &net.modes {
        for internal in 0..INTERNAL_LABELS {
            if reg.index_of(&mode(m, internal)).is_none() {
                return Err(Error::validation(format!(
                    "state registry lacks mode {m}#{internal}"
                )));
            }
        }
    }
    Ok(())
}

fn rename_ports(
    state: QuantumState,
    inputs: &[String; 2],
    outputs: &Option<[String; 2]>,
) -> Result<QuantumState> {
    let Some(outputs) = outputs else {
        return Ok(state);
    };
    if outputs == inputs {
        return Ok(state);
    }
    let mut moves = Vec::with_capacity(4);
    for internal in 0..INTERNAL_LABELS {
        for k in 0..2 {
            moves.push((mode(&inputs[k], internal), mode(&outputs[k], internal)));
        }
    }
    state.permute_modes(&moves)
}

fn annihilate(state: &QuantumState, modes: &[String; 2], gamma: &str) -> Result<QuantumState> {
    let reg = Arc::clone(state.registry());
    let first = reg.spatial_indices(&modes[0]);
    let second = reg.spatial_indices(&modes[1]);
    let gamma_idx: Vec<usize> = (0..INTERNAL_LABELS)
        .map(|l| reg.require(&mode(gamma, l)))
        .collect::<Result<_>>()?;
    state.remap_terms(|occ| {
        if occ.sum_over(&first) != 1 || occ.sum_over(&second) != 1 {
            return Ok(occ.clone());
        }
        if occ.sum_over(&gamma_idx) != 0 {
            return Err(Error::validation(format!(
                "gamma mode {gamma} already occupied"
            )));
        }
        let mut next = occ.clone();
        let counts = next.counts_mut();
        for &i in first.iter().chain(second.iter()) {
            if counts[i] == 1 {
                counts[i] = 0;
                // gamma keeps the internal label of each absorbed photon
                let label = reg.modes()[i].internal as usize;
                counts[gamma_idx[label]] += 1;
            }
        }
        Ok(next)
    })
}

/// Applies a single element to `state`.
pub fn apply_element(el: &Element, state: &QuantumState) -> Result<QuantumState> {
    match el {
        Element::BeamSplitter {
            modes,
            transmissivity,
            outputs,
        } => {
            let u = beam_splitter_matrix(*transmissivity);
            let mut s = state.clone();
            for internal in 0..INTERNAL_LABELS {
                s = s.apply_two_mode(&mode(&modes[0], internal), &mode(&modes[1], internal), &u)?;
            }
            rename_ports(s, modes, outputs)
        }
        Element::Phase { mode: m, radians } => {
            let mut s = state.clone();
            for internal in 0..INTERNAL_LABELS {
                s = s.apply_phase(&mode(m, internal), *radians)?;
            }
            Ok(s)
        }
        Element::Shutter { open: true, .. } => Ok(state.clone()),
        Element::Shutter {
            mode: m,
            open: false,
            loss,
        } => {
            let u: Matrix2 = beam_splitter_matrix(0.0);
            let mut s = state.clone();
            for internal in 0..INTERNAL_LABELS {
                s = s.apply_two_mode(&mode(m, internal), &mode(loss, internal), &u)?;
            }
            Ok(s)
        }
        Element::Annihilator {
            modes,
            gamma,
            outputs,
        } => {
            let s = annihilate(state, modes, gamma)?;
            rename_ports(s, modes, outputs)
        }
    }
}

/// Applies every element of `net` to `state`, in list order.
pub fn apply_network(net: &NetworkDescription, state: &QuantumState) -> Result<QuantumState> {
    require_registered(state, net)?;
    net.elements
        .iter()
        .try_fold(state.clone(), |s, el| apply_element(el, &s))
}

/// Magnitude of the single-photon amplitude reaching `forbidden_output` when
/// one photon enters `input_mode`.
pub fn tuning_residual(
    net: &NetworkDescription,
    input_mode: &str,
    forbidden_output: &str,
) -> Result<f64> {
    let out = single_photon_output(net, input_mode)?;
    Ok(out.amplitude(&[(mode(forbidden_output, 0), 1)])?.norm())
}

/// Propagates one photon (internal label 0) from `input_mode` through `net`.
pub fn single_photon_output(net: &NetworkDescription, input_mode: &str) -> Result<QuantumState> {
    let reg = net.state_registry();
    let input = QuantumState::vacuum(reg).add_photon(&mode(input_mode, 0))?;
    apply_network(net, &input)
}

/// Single-photon fringe value `p(dark | detected at bright or dark)`.
pub fn conditional_port_probability(
    net: &NetworkDescription,
    input_mode: &str,
    bright: &str,
    dark: &str,
) -> Result<f64> {
    let out = single_photon_output(net, input_mode)?;
    let p_dark = out.pattern_probability(&Pattern::new().spatial(dark, 1))?;
    let p_bright = out.pattern_probability(&Pattern::new().spatial(bright, 1))?;
    let detected = p_dark + p_bright;
    if detected <= 0.0 {
        return Err(Error::validation(format!(
            "no single-photon amplitude reaches {bright} or {dark}"
        )));
    }
    Ok(p_dark / detected)
}
