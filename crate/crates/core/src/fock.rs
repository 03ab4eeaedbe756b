//! Sparse multi-mode bosonic Fock states.
//!
//! A [`QuantumState`] maps occupation vectors over a [`Registry`] of modes to
//! complex amplitudes. Each mode is a `(spatial arm, internal label)` pair; the
//! internal label distinguishes orthogonal wave-packet components so that
//! partially distinguishable photons can be represented exactly.
//!
//! Two-mode elements act by substituting creation operators
//! `a† → U₁₁a† + U₂₁b†`, `b† → U₁₂a† + U₂₂b†` and expanding every term, which is
//! exact for any photon number and cheap at the handful of photons used here.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of internal (wave-packet) labels carried by every spatial arm.
pub const INTERNAL_LABELS: u8 = 2;
pub const DEFAULT_PHOTON_CAP: u8 = 2;
pub const MAX_PHOTON_CAP: u8 = 4;
/// Amplitudes with magnitude below this are dropped after every operation.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-14;

const UNITARY_TOLERANCE: f64 = 1e-10;

/// One independent bosonic mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub spatial: String,
    pub internal: u8,
}

impl ModeId {
    pub fn new(spatial: impl Into<String>, internal: u8) -> Self {
        Self {
            spatial: spatial.into(),
            internal,
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.spatial, self.internal)
    }
}

/// Ordered set of modes; position in the registry is the index into every
/// [`Occupation`].
#[derive(Clone, Debug)]
pub struct Registry {
    modes: Vec<ModeId>,
    index: HashMap<ModeId, usize>,
}

impl Registry {
    pub fn new(modes: Vec<ModeId>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::config("mode registry must not be empty"));
        }
        let mut index = HashMap::with_capacity(modes.len());
        for (i, m) in modes.iter().enumerate() {
            if index.insert(m.clone(), i).is_some() {
                return Err(Error::config(format!("duplicate mode label {m}")));
            }
        }
        Ok(Self { modes, index })
    }

    /// Registers every spatial label once per internal label.
    pub fn with_internal_labels<S: AsRef<str>>(spatial: &[S]) -> Result<Self> {
        let mut modes = Vec::with_capacity(spatial.len() * INTERNAL_LABELS as usize);
        for label in spatial {
            for internal in 0..INTERNAL_LABELS {
                modes.push(ModeId::new(label.as_ref(), internal));
            }
        }
        Self::new(modes)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn index_of(&self, mode: &ModeId) -> Option<usize> {
        self.index.get(mode).copied()
    }

    pub fn require(&self, mode: &ModeId) -> Result<usize> {
        self.index_of(mode)
            .ok_or_else(|| Error::validation(format!("mode {mode} is not registered")))
    }

    /// Indices of every internal label registered under `label`.
    pub fn spatial_indices(&self, label: &str) -> Vec<usize> {
        self.modes
            .iter()
            .enumerate()
            .filter(|(_, m)| m.spatial == label)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn contains_spatial(&self, label: &str) -> bool {
        self.modes.iter().any(|m| m.spatial == label)
    }
}

impl PartialEq for Registry {
    fn eq(&self, other: &Self) -> bool {
        self.modes == other.modes
    }
}

/// Photon number per registered mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn get(&self, index: usize) -> u8 {
        self.0[index]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    /// Sum of occupations over a set of mode indices.
    pub fn sum_over(&self, indices: &[usize]) -> u32 {
        indices.iter().map(|&i| self.0[i] as u32).sum()
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

pub type Matrix2 = [[Complex64; 2]; 2];

/// Symmetric beam splitter `[[t, ir], [ir, t]]` with `r = √(1 − t²)`.
///
/// A photon entering the first port leaves as `t|first⟩ + ir|second⟩`.
pub fn beam_splitter_matrix(transmissivity: f64) -> Matrix2 {
    let t = Complex64::new(transmissivity, 0.0);
    let ir = Complex64::new(0.0, (1.0 - transmissivity * transmissivity).max(0.0).sqrt());
    [[t, ir], [ir, t]]
}

pub fn is_unitary(u: &Matrix2, tolerance: f64) -> bool {
    for i in 0..2 {
        for j in 0..2 {
            let entry: Complex64 = (0..2).map(|k| u[k][i].conj() * u[k][j]).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (entry - expected).norm() > tolerance {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateConfig {
    pub photon_cap: u8,
    pub prune_threshold: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            photon_cap: DEFAULT_PHOTON_CAP,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

impl StateConfig {
    pub fn with_photon_cap(photon_cap: u8) -> Result<Self> {
        if photon_cap == 0 || photon_cap > MAX_PHOTON_CAP {
            return Err(Error::config(format!(
                "photon cap must be in 1..={MAX_PHOTON_CAP}, got {photon_cap}"
            )));
        }
        Ok(Self {
            photon_cap,
            ..Self::default()
        })
    }
}

/// Selects either every internal label of a spatial arm or one exact mode.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeSelector {
    Spatial(String),
    Exact(ModeId),
}

/// Partial occupation constraint; unconstrained modes are marginalized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pattern {
    constraints: Vec<(ModeSelector, u32)>,
}

impl Pattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// Requires exactly `count` photons in `label`, summed over internal labels.
    pub fn spatial(mut self, label: impl Into<String>, count: u32) -> Self {
        self.constraints
            .push((ModeSelector::Spatial(label.into()), count));
        self
    }

    pub fn exact(mut self, mode: ModeId, count: u32) -> Self {
        self.constraints.push((ModeSelector::Exact(mode), count));
        self
    }

    fn resolve(&self, registry: &Registry) -> Result<Vec<(Vec<usize>, u32)>> {
        self.constraints
            .iter()
            .map(|(sel, count)| {
                let indices = match sel {
                    ModeSelector::Spatial(label) => {
                        let idx = registry.spatial_indices(label);
                        if idx.is_empty() {
                            return Err(Error::validation(format!(
                                "spatial mode {label} is not registered"
                            )));
                        }
                        idx
                    }
                    ModeSelector::Exact(mode) => vec![registry.require(mode)?],
                };
                Ok((indices, *count))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct QuantumState {
    registry: Arc<Registry>,
    terms: BTreeMap<Occupation, Complex64>,
    config: StateConfig,
}

impl QuantumState {
    pub fn vacuum(registry: Arc<Registry>) -> Self {
        Self::vacuum_with(registry, StateConfig::default())
    }

    pub fn vacuum_with(registry: Arc<Registry>, config: StateConfig) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            Occupation(vec![0; registry.len()]),
            Complex64::new(1.0, 0.0),
        );
        Self {
            registry,
            terms,
            config,
        }
    }

    /// Builds a state directly from `(amplitude, occupied modes)` pairs.
    /// Used for reference kets in assertions.
    pub fn from_terms(
        registry: Arc<Registry>,
        terms: &[(Complex64, &[(ModeId, u8)])],
    ) -> Result<Self> {
        let config = StateConfig {
            photon_cap: MAX_PHOTON_CAP,
            ..StateConfig::default()
        };
        let mut map = BTreeMap::new();
        for (amp, modes) in terms {
            let mut occ = vec![0u8; registry.len()];
            for (mode, n) in modes.iter() {
                occ[registry.require(mode)?] += n;
            }
            *map.entry(Occupation(occ))
                .or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut state = Self {
            registry,
            terms: map,
            config,
        };
        state.prune();
        Ok(state)
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn config(&self) -> StateConfig {
        self.config
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude of the basis state with the listed occupations (others empty).
    pub fn amplitude(&self, modes: &[(ModeId, u8)]) -> Result<Complex64> {
        let mut occ = vec![0u8; self.registry.len()];
        for (mode, n) in modes {
            occ[self.registry.require(mode)?] += n;
        }
        Ok(self
            .terms
            .get(&Occupation(occ))
            .copied()
            .unwrap_or_default())
    }

    /// Smallest and largest total photon number across terms.
    pub fn photon_number_range(&self) -> (u32, u32) {
        let mut lo = u32::MAX;
        let mut hi = 0;
        for occ in self.terms.keys() {
            let n = occ.total();
            lo = lo.min(n);
            hi = hi.max(n);
        }
        if self.terms.is_empty() {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    /// Applies `a†` to `mode`, with the bosonic `√(n+1)` factor.
    pub fn add_photon(&self, mode: &ModeId) -> Result<Self> {
        let idx = self.registry.require(mode)?;
        let mut terms = BTreeMap::new();
        for (occ, amp) in &self.terms {
            if occ.total() + 1 > self.config.photon_cap as u32 {
                return Err(Error::Capacity {
                    cap: self.config.photon_cap,
                });
            }
            let mut next = occ.clone();
            let n = next.0[idx];
            next.0[idx] = n + 1;
            terms.insert(next, amp * ((n + 1) as f64).sqrt());
        }
        Ok(self.with_terms(terms))
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::validation("cannot normalize a zero state"));
        }
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| (o.clone(), a / norm))
            .collect();
        Ok(self.with_terms(terms))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| (o.clone(), a * factor))
            .collect();
        self.with_terms(terms)
    }

    /// Amplitude-wise sum of two states over the same registry.
    pub fn superpose(&self, other: &QuantumState) -> Result<Self> {
        self.check_same_registry(other)?;
        let mut terms = self.terms.clone();
        for (occ, amp) in &other.terms {
            *terms.entry(occ.clone()).or_default() += amp;
        }
        Ok(self.with_terms(terms))
    }

    /// Applies a 2×2 unitary to the pair of modes `(a, b)`.
    pub fn apply_two_mode(&self, a: &ModeId, b: &ModeId, u: &Matrix2) -> Result<Self> {
        if a == b {
            return Err(Error::validation(format!(
                "two-mode element needs distinct modes, got {a} twice"
            )));
        }
        if !is_unitary(u, UNITARY_TOLERANCE) {
            return Err(Error::validation("two-mode matrix is not unitary"));
        }
        let ia = self.registry.require(a)?;
        let ib = self.registry.require(b)?;
        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let na = occ.0[ia] as u32;
            let nb = occ.0[ib] as u32;
            if na == 0 && nb == 0 {
                *out.entry(occ.clone()).or_default() += amp;
                continue;
            }
            let norm_in = (factorial(na) * factorial(nb)).sqrt();
            for k in 0..=na {
                for l in 0..=nb {
                    let coeff = binomial(na, k)
                        * binomial(nb, l)
                        * u[0][0].powi(k as i32)
                        * u[1][0].powi((na - k) as i32)
                        * u[0][1].powi(l as i32)
                        * u[1][1].powi((nb - l) as i32);
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let out_a = k + l;
                    let out_b = na + nb - out_a;
                    let weight = (factorial(out_a) * factorial(out_b)).sqrt() / norm_in;
                    let mut next = occ.clone();
                    next.0[ia] = out_a as u8;
                    next.0[ib] = out_b as u8;
                    *out.entry(next).or_default() += amp * coeff * weight;
                }
            }
        }
        Ok(self.with_terms(out))
    }

    /// Multiplies every term by `e^{iφn}` where `n` is the occupation of `mode`.
    pub fn apply_phase(&self, mode: &ModeId, radians: f64) -> Result<Self> {
        let idx = self.registry.require(mode)?;
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| {
                let n = o.0[idx] as f64;
                (o.clone(), a * Complex64::from_polar(1.0, radians * n))
            })
            .collect();
        Ok(self.with_terms(terms))
    }

    /// Simultaneously moves the photons of each `from` mode into its `to` mode.
    ///
    /// A target that is not itself a source must be empty in every term, which
    /// keeps the map a bijection on basis states.
    pub fn permute_modes(&self, moves: &[(ModeId, ModeId)]) -> Result<Self> {
        let mut pairs = Vec::with_capacity(moves.len());
        for (from, to) in moves {
            pairs.push((self.registry.require(from)?, self.registry.require(to)?));
        }
        let sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        for (i, (s, t)) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|(s2, t2)| s2 == s || t2 == t) {
                return Err(Error::validation("mode permutation repeats a mode"));
            }
        }
        let mut terms = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let mut next = occ.clone();
            for &(s, t) in &pairs {
                if !sources.contains(&t) && occ.0[t] != 0 {
                    return Err(Error::validation(format!(
                        "output mode {} is already occupied",
                        self.registry.modes()[t]
                    )));
                }
                next.0[s] = 0;
            }
            for &(s, t) in &pairs {
                next.0[t] += occ.0[s];
            }
            terms.insert(next, *amp);
        }
        Ok(self.with_terms(terms))
    }

    /// Rewrites occupation vectors term by term. The map must be injective.
    pub(crate) fn remap_terms<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Occupation) -> Result<Occupation>,
    {
        let mut terms = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let next = f(occ)?;
            if terms.insert(next, *amp).is_some() {
                return Err(Error::validation("term remapping is not injective"));
            }
        }
        Ok(self.with_terms(terms))
    }

    /// Keeps only the terms accepted by `keep`; the result is not renormalized.
    pub fn project<F>(&self, keep: F) -> Self
    where
        F: Fn(&Occupation) -> bool,
    {
        let terms = self
            .terms
            .iter()
            .filter(|(o, _)| keep(o))
            .map(|(o, a)| (o.clone(), *a))
            .collect();
        self.with_terms(terms)
    }

    /// Probability that the constrained modes hold exactly the given counts.
    ///
    /// Probabilities (not amplitudes) are summed over internal labels, so
    /// orthogonal wave-packet components never interfere.
    pub fn pattern_probability(&self, pattern: &Pattern) -> Result<f64> {
        let resolved = pattern.resolve(&self.registry)?;
        Ok(self
            .terms
            .iter()
            .filter(|(occ, _)| {
                resolved
                    .iter()
                    .all(|(idx, count)| occ.sum_over(idx) == *count)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            + 0.0)
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &QuantumState) -> Result<Complex64> {
        self.check_same_registry(other)?;
        Ok(self
            .terms
            .iter()
            .filter_map(|(occ, a)| other.terms.get(occ).map(|b| a.conj() * b))
            .sum())
    }

    fn check_same_registry(&self, other: &QuantumState) -> Result<()> {
        if !Arc::ptr_eq(&self.registry, &other.registry) && *self.registry != *other.registry {
            return Err(Error::validation("states live on different registries"));
        }
        Ok(())
    }

    fn with_terms(&self, terms: BTreeMap<Occupation, Complex64>) -> Self {
        let mut state = Self {
            registry: Arc::clone(&self.registry),
            terms,
            config: self.config,
        };
        state.prune();
        state
    }

    fn prune(&mut self) {
        let threshold = self.config.prune_threshold;
        self.terms.retain(|_, a| a.norm() >= threshold);
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn reg(labels: &[&str]) -> Arc<Registry> {
        Arc::new(Registry::with_internal_labels(labels).unwrap())
    }

    fn m(label: &str) -> ModeId {
        ModeId::new(label, 0)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_has_single_unit_term() {
        let r = Arc::new(Registry::new(vec![m("a"), m("b")]).unwrap());
        let v = QuantumState::vacuum(r);
        assert_eq!(v.len(), 1);
        assert_eq!(v.amplitude(&[]).unwrap(), c(1.0, 0.0));
        assert_eq!(v.norm_sqr(), 1.0);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            Registry::new(vec![m("a"), m("a")]),
            Err(Error::Config(_))
        ));
        assert!(Registry::with_internal_labels(&["a", "a"]).is_err());
        assert!(Registry::new(vec![]).is_err());
    }

    #[test]
    fn bosonic_ladder() {
        let r = reg(&["a"]);
        let one = QuantumState::vacuum(r).add_photon(&m("a")).unwrap();
        assert_eq!(one.amplitude(&[(m("a"), 1)]).unwrap(), c(1.0, 0.0));
        let two = one.add_photon(&m("a")).unwrap();
        let amp = two.amplitude(&[(m("a"), 2)]).unwrap();
        assert!((amp - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let n = two.normalized().unwrap();
        assert!((n.amplitude(&[(m("a"), 2)]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn photon_cap_is_an_error() {
        let r = reg(&["a"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("a"))
            .unwrap()
            .add_photon(&m("a"))
            .unwrap();
        assert_eq!(
            s.add_photon(&m("a")).unwrap_err(),
            Error::Capacity { cap: 2 }
        );
        assert!(StateConfig::with_photon_cap(5).is_err());
        assert!(StateConfig::with_photon_cap(4).is_ok());
    }

    #[test]
    fn two_inputs_into_distinct_arms() {
        let r = reg(&["e+", "e-"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("e+"))
            .unwrap()
            .add_photon(&m("e-"))
            .unwrap();
        assert_eq!(
            s.amplitude(&[(m("e+"), 1), (m("e-"), 1)]).unwrap(),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn balanced_splitter_single_photon() {
        let r = reg(&["a", "b"]);
        let s = QuantumState::vacuum(r).add_photon(&m("a")).unwrap();
        let out = s
            .apply_two_mode(&m("a"), &m("b"), &beam_splitter_matrix(FRAC_1_SQRT_2))
            .unwrap();
        let ta = out.amplitude(&[(m("a"), 1)]).unwrap();
        let rb = out.amplitude(&[(m("b"), 1)]).unwrap();
        assert!((ta - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((rb - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn hom_bunching_same_label() {
        let r = reg(&["a", "b"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("a"))
            .unwrap()
            .add_photon(&m("b"))
            .unwrap();
        let out = s
            .apply_two_mode(&m("a"), &m("b"), &beam_splitter_matrix(FRAC_1_SQRT_2))
            .unwrap();
        assert_eq!(
            out.amplitude(&[(m("a"), 1), (m("b"), 1)]).unwrap(),
            c(0.0, 0.0)
        );
        let p = out
            .pattern_probability(&Pattern::new().spatial("a", 1).spatial("b", 1))
            .unwrap();
        assert!(p < 1e-28);
        let a2 = out.amplitude(&[(m("a"), 2)]).unwrap();
        let b2 = out.amplitude(&[(m("b"), 2)]).unwrap();
        assert!((a2 - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((b2 - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn distinguishable_pair_has_half_coincidence() {
        // a#0 b#1 through the splitter: RR + TT = 1/2, no cross-label interference.
        let r = reg(&["a", "b"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("a"))
            .unwrap()
            .add_photon(&ModeId::new("b", 1))
            .unwrap();
        let bs = beam_splitter_matrix(FRAC_1_SQRT_2);
        let out = s
            .apply_two_mode(&m("a"), &m("b"), &bs)
            .unwrap()
            .apply_two_mode(&ModeId::new("a", 1), &ModeId::new("b", 1), &bs)
            .unwrap();
        let p = out
            .pattern_probability(&Pattern::new().spatial("a", 1).spatial("b", 1))
            .unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        // four independent single-mode amplitudes, each 1/2 in magnitude
        assert_eq!(out.len(), 4);
        for (_, a) in out.terms() {
            assert!((a.norm() - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn non_unitary_and_same_mode_rejected() {
        let r = reg(&["a", "b"]);
        let s = QuantumState::vacuum(r);
        let bad = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            s.apply_two_mode(&m("a"), &m("b"), &bad),
            Err(Error::Validation(_))
        ));
        assert!(
            s.apply_two_mode(&m("a"), &m("a"), &beam_splitter_matrix(0.5))
                .is_err()
        );
    }

    #[test]
    fn inner_products() {
        let r = reg(&["a"]);
        let vac = QuantumState::vacuum(Arc::clone(&r));
        let one = vac.add_photon(&m("a")).unwrap();
        assert_eq!(vac.inner_product(&vac).unwrap(), c(1.0, 0.0));
        assert_eq!(vac.inner_product(&one).unwrap(), c(0.0, 0.0));
        let other = QuantumState::vacuum(reg(&["z"]));
        assert!(vac.inner_product(&other).is_err());
    }

    #[test]
    fn pattern_partition_sums_to_one() {
        let r = reg(&["a", "b"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("a"))
            .unwrap()
            .add_photon(&ModeId::new("a", 1))
            .unwrap()
            .apply_two_mode(&m("a"), &m("b"), &beam_splitter_matrix(0.3))
            .unwrap();
        let total: f64 = (0..=2)
            .map(|k| {
                s.pattern_probability(&Pattern::new().spatial("a", k).spatial("b", 2 - k))
                    .unwrap()
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(
            s.pattern_probability(&Pattern::new()).unwrap(),
            s.norm_sqr()
        );
        assert!(
            s.pattern_probability(&Pattern::new().spatial("zz", 1))
                .is_err()
        );
    }

    #[test]
    fn permutation_moves_and_guards_occupied_targets() {
        let r = reg(&["a", "b", "c"]);
        let s = QuantumState::vacuum(r)
            .add_photon(&m("a"))
            .unwrap()
            .add_photon(&m("b"))
            .unwrap();
        let swapped = s
            .permute_modes(&[(m("a"), m("c")), (m("b"), m("a"))])
            .unwrap();
        assert_eq!(
            swapped.amplitude(&[(m("a"), 1), (m("c"), 1)]).unwrap(),
            c(1.0, 0.0)
        );
        assert!(s.permute_modes(&[(m("a"), m("b"))]).is_err());
    }

    #[test]
    fn pruning_drops_cancelled_terms() {
        let r = reg(&["a", "b"]);
        let bs = beam_splitter_matrix(FRAC_1_SQRT_2);
        let s = QuantumState::vacuum(r).add_photon(&m("a")).unwrap();
        // two balanced splitters in series route everything to the other
        // port; the cancelled term must not survive as rounding residue
        let out = s
            .apply_two_mode(&m("a"), &m("b"), &bs)
            .unwrap()
            .apply_two_mode(&m("a"), &m("b"), &bs)
            .unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.amplitude(&[(m("b"), 1)]).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
    }
}
