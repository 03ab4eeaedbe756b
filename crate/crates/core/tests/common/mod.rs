//! Single-photon transfer-matrix model of the interferometer, written
//! independently of the Fock-space engine. Two-photon coincidences follow
//! from the permanent (indistinguishable part) and from products of
//! single-photon probabilities (distinguishable part).
#![allow(dead_code)]

use std::collections::HashMap;

use num_complex::Complex64;

#[derive(Clone, Copy, Debug)]
pub enum Op {
    /// Inputs `a`, `b`; `a` exits as `t·o1 + ir·o2`, `b` as `ir·o1 + t·o2`.
    Split(&'static str, &'static str, f64, &'static str, &'static str),
    Phase(&'static str, f64),
    Block(&'static str),
}

pub type Amplitudes = HashMap<&'static str, Complex64>;

pub fn propagate(ops: &[Op], input: &'static str) -> Amplitudes {
    let mut amp: Amplitudes = HashMap::from([(input, Complex64::new(1.0, 0.0))]);
    let zero = Complex64::new(0.0, 0.0);
    for op in ops {
        match *op {
            Op::Split(a, b, t, o1, o2) => {
                let r = (1.0 - t * t).sqrt();
                let x = amp.remove(a).unwrap_or(zero);
                let y = amp.remove(b).unwrap_or(zero);
                let ir = Complex64::new(0.0, r);
                *amp.entry(o1).or_insert(zero) += x * t + y * ir;
                *amp.entry(o2).or_insert(zero) += x * ir + y * t;
            }
            Op::Phase(m, phi) => {
                if let Some(a) = amp.get_mut(m) {
                    *a *= Complex64::from_polar(1.0, phi);
                }
            }
            Op::Block(m) => {
                amp.remove(m);
            }
        }
    }
    amp
}

fn at(amp: &Amplitudes, m: &str) -> Complex64 {
    amp.get(m).copied().unwrap_or_default()
}

/// Coincidence probabilities in the order c+c−, c+d−, d+c−, d+d−.
pub fn pair_probabilities(ops: &[Op], p_disting: f64) -> [f64; 4] {
    let a = propagate(ops, "e+");
    let b = propagate(ops, "e-");
    let pairs = [("c+", "c-"), ("c+", "d-"), ("d+", "c-"), ("d+", "d-")];
    pairs.map(|(l, r)| {
        let direct = at(&a, l) * at(&b, r);
        let swapped = at(&a, r) * at(&b, l);
        let indist = (direct + swapped).norm_sqr();
        let dist = direct.norm_sqr() + swapped.norm_sqr();
        (1.0 - p_disting) * indist + p_disting * dist
    })
}

pub struct Layout {
    pub central_t: f64,
    pub outer_t: f64,
    pub final_t: f64,
    pub phase_plus: f64,
    pub phase_minus: f64,
}

impl Default for Layout {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            central_t: h,
            outer_t: h,
            final_t: h,
            phase_plus: 0.0,
            phase_minus: 0.0,
        }
    }
}

/// The two coupled interferometers with the listed arms blocked.
pub fn hardy_ops(layout: &Layout, blocked: &[&'static str]) -> Vec<Op> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut ops = vec![
        Op::Split("e+", "w+", h, "v+", "w+"),
        Op::Split("e-", "w-", h, "v-", "w-"),
    ];
    ops.extend(blocked.iter().map(|m| Op::Block(m)));
    ops.extend([
        Op::Split("v+", "loss+", layout.outer_t, "loss+", "v+"),
        Op::Split("v-", "loss-", layout.outer_t, "loss-", "v-"),
        Op::Split("w+", "w-", layout.central_t, "u-", "u+"),
        Op::Phase("v+", layout.phase_plus),
        Op::Phase("v-", layout.phase_minus),
        Op::Split("v+", "u+", layout.final_t, "d+", "c+"),
        Op::Split("v-", "u-", layout.final_t, "d-", "c-"),
    ]);
    ops
}

/// Blocked arms and counted pairs (indices into the c+c−..d+d− order) for
/// each named setting.
pub fn setting_rule(name: &str) -> (Vec<&'static str>, Vec<usize>) {
    match name {
        "dd" => (vec![], vec![3]),
        "dv" => (vec!["w-"], vec![2, 3]),
        "vd" => (vec!["w+"], vec![1, 3]),
        "uu" => (vec!["v+", "v-"], vec![0, 1, 2, 3]),
        other => panic!("unknown setting {other}"),
    }
}

pub fn setting_probability(layout: &Layout, name: &str, p_disting: f64) -> f64 {
    let (blocked, counted) = setting_rule(name);
    let probs = pair_probabilities(&hardy_ops(layout, &blocked), p_disting);
    counted.iter().map(|&k| probs[k]).sum()
}

pub fn margin(layout: &Layout, p_disting: f64) -> f64 {
    setting_probability(layout, "uu", p_disting)
        + setting_probability(layout, "dv", p_disting)
        + setting_probability(layout, "vd", p_disting)
        - setting_probability(layout, "dd", p_disting)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
