//! Photon-pair source with tunable mutual distinguishability.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeId, QuantumState, Registry};

pub const INPUT_PLUS: &str = "e+";
pub const INPUT_MINUS: &str = "e-";

/// Coherence time used when none is configured. This is an order-of-magnitude
/// scale for 3 nm filters at 780 nm, chosen for plotting; the measured dip
/// width is not known.
pub const DEFAULT_COHERENCE_TIME_FS: f64 = 430.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DistinguishabilityModel {
    /// Use `p_disting` as given.
    #[default]
    ExplicitP,
    /// Combine `p_disting` (the zero-delay floor) with the delay overlap.
    FromDelay,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceParams {
    pub p_disting: f64,
    pub delay_fs: f64,
    pub coherence_time_fs: f64,
    pub model: DistinguishabilityModel,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            p_disting: 0.0,
            delay_fs: 0.0,
            coherence_time_fs: DEFAULT_COHERENCE_TIME_FS,
            model: DistinguishabilityModel::ExplicitP,
        }
    }
}

impl SourceParams {
    pub fn explicit(p_disting: f64) -> Self {
        Self {
            p_disting,
            ..Self::default()
        }
    }

    /// Delay-driven source whose zero-delay distinguishability is `floor`.
    pub fn from_delay(delay_fs: f64, coherence_time_fs: f64, floor: f64) -> Self {
        Self {
            p_disting: floor,
            delay_fs,
            coherence_time_fs,
            model: DistinguishabilityModel::FromDelay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_disting) {
            return Err(Error::config(format!(
                "p_disting must lie in [0,1], got {}",
                self.p_disting
            )));
        }
        if !(self.coherence_time_fs > 0.0 && self.coherence_time_fs.is_finite()) {
            return Err(Error::config(format!(
                "coherence time must be positive, got {}",
                self.coherence_time_fs
            )));
        }
        if !self.delay_fs.is_finite() {
            return Err(Error::config("delay must be finite"));
        }
        Ok(())
    }

    /// Probability weight of the orthogonal wave-packet component.
    ///
    /// In delay mode this is `p₀ + (1 − p₀)(1 − |o(Δ)|²)`, which reduces to
    /// `1 − |o(Δ)|²` for spectrally identical photons (`p₀ = 0`).
    pub fn effective_p_disting(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self.model {
            DistinguishabilityModel::ExplicitP => self.p_disting,
            DistinguishabilityModel::FromDelay => {
                let overlap = overlap_from_delay(self.delay_fs, self.coherence_time_fs)?;
                self.p_disting + (1.0 - self.p_disting) * (1.0 - overlap)
            }
        })
    }
}

/// Squared wave-packet overlap `exp(−Δ²/(2τ²))`.
pub fn overlap_from_delay(delay_fs: f64, coherence_time_fs: f64) -> Result<f64> {
    if coherence_time_fs.is_nan() || coherence_time_fs <= 0.0 {
        return Err(Error::config(format!(
            "coherence time must be positive, got {coherence_time_fs}"
        )));
    }
    let x = delay_fs / coherence_time_fs;
    Ok((-0.5 * x * x).exp())
}

/// One photon in `e+` (internal label 0) and one in `e−` in the internal
/// superposition `√(1−p)|0⟩ + √p|1⟩`.
pub fn prepare_pair(registry: Arc<Registry>, params: &SourceParams) -> Result<QuantumState> {
    let p = params.effective_p_disting()?;
    for label in [INPUT_PLUS, INPUT_MINUS] {
        for internal in 0..2 {
            registry
                .require(&ModeId::new(label, internal))
                .map_err(|_| {
                    Error::config(format!("registry lacks input mode {label}#{internal}"))
                })?;
        }
    }
    let plus = QuantumState::vacuum(registry).add_photon(&ModeId::new(INPUT_PLUS, 0))?;
    let parallel = plus
        .add_photon(&ModeId::new(INPUT_MINUS, 0))?
        .scaled((1.0 - p).sqrt().into());
    let orthogonal = plus
        .add_photon(&ModeId::new(INPUT_MINUS, 1))?
        .scaled(p.sqrt().into());
    parallel.superpose(&orthogonal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> Arc<Registry> {
        Arc::new(Registry::with_internal_labels(&["e+", "e-", "x"]).unwrap())
    }

    #[test]
    fn overlap_limits() {
        assert_eq!(overlap_from_delay(0.0, 100.0).unwrap(), 1.0);
        assert!(overlap_from_delay(1e6, 100.0).unwrap() < 1e-300);
        assert!(overlap_from_delay(1.0, 0.0).is_err());
        assert!(overlap_from_delay(1.0, -3.0).is_err());
    }

    #[test]
    fn overlap_half_width() {
        // solving exp(−Δ²/2τ²) = 1/2 gives Δ = τ√(2 ln 2)
        let tau = 430.0;
        let delta = tau * (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((overlap_from_delay(delta, tau).unwrap() - 0.5).abs() < 1e-15);
        assert!((overlap_from_delay(-delta, tau).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pair_is_normalized() {
        for p in [0.0, 0.08, 0.5, 1.0] {
            let s = prepare_pair(registry(), &SourceParams::explicit(p)).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            let orth = s
                .amplitude(&[(ModeId::new("e+", 0), 1), (ModeId::new("e-", 1), 1)])
                .unwrap();
            assert!((orth.norm_sqr() - p).abs() < 1e-15);
        }
    }

    #[test]
    fn ideal_and_fully_distinguishable_sources() {
        let s = prepare_pair(registry(), &SourceParams::explicit(0.0)).unwrap();
        assert_eq!(s.len(), 1);
        let s = prepare_pair(registry(), &SourceParams::explicit(1.0)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s.amplitude(&[(ModeId::new("e+", 0), 1), (ModeId::new("e-", 1), 1)])
                .unwrap()
                .re,
            1.0
        );
    }

    #[test]
    fn invalid_parameters() {
        assert!(prepare_pair(registry(), &SourceParams::explicit(1.2)).is_err());
        assert!(prepare_pair(registry(), &SourceParams::explicit(-0.1)).is_err());
        let bad_tau = SourceParams::from_delay(0.0, 0.0, 0.0);
        assert!(matches!(
            bad_tau.effective_p_disting(),
            Err(Error::Config(_))
        ));
        let no_inputs = Arc::new(Registry::with_internal_labels(&["x"]).unwrap());
        assert!(prepare_pair(no_inputs, &SourceParams::default()).is_err());
    }

    #[test]
    fn delay_model() {
        let far = SourceParams::from_delay(1e5, 430.0, 0.08);
        assert!((far.effective_p_disting().unwrap() - 1.0).abs() < 1e-12);
        let zero = SourceParams::from_delay(0.0, 430.0, 0.08);
        assert_eq!(zero.effective_p_disting().unwrap(), 0.08);
        let pure = SourceParams::from_delay(430.0, 430.0, 0.0);
        let expected = 1.0 - (-0.5f64).exp();
        assert!((pure.effective_p_disting().unwrap() - expected).abs() < 1e-15);
    }
}
