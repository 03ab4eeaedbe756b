//! Local-hidden-variable bound on the coincidence counts.
//!
//! A local model assigns each side a predetermined outcome for both the c/d
//! and u/v measurements. Positivity of the resulting joint probabilities gives
//!
//! ```text
//! p(d+;d−) ≤ p(u+;u−) + p(d+;v−) + p(v+;d−)
//! ```
//!
//! which the measured (or simulated) coincidence counts can violate.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::detection::CountTable;
use crate::error::{Error, Result};
use crate::experiment::{DetectorPair, HardyParams, SettingName, analytic_table, setting};
use crate::source::SourceParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CdOutcome {
    C,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum UvOutcome {
    U,
    V,
}

/// Predetermined outcomes for one particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SideStrategy {
    pub cd: CdOutcome,
    pub uv: UvOutcome,
}

impl SideStrategy {
    pub const fn new(cd: CdOutcome, uv: UvOutcome) -> Self {
        Self { cd, uv }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocalStrategy {
    pub plus: SideStrategy,
    pub minus: SideStrategy,
}

impl LocalStrategy {
    /// Position in [`enumerate_strategies`].
    pub fn index(&self) -> usize {
        let side = |s: SideStrategy| (s.cd as usize) * 2 + s.uv as usize;
        side(self.plus) * 4 + side(self.minus)
    }
}

impl fmt::Display for LocalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cd = |c: CdOutcome| if c == CdOutcome::C { 'c' } else { 'd' };
        let uv = |u: UvOutcome| if u == UvOutcome::U { 'u' } else { 'v' };
        write!(
            f,
            "({},{};{},{})",
            cd(self.plus.cd),
            uv(self.plus.uv),
            cd(self.minus.cd),
            uv(self.minus.uv)
        )
    }
}

const SIDES: [SideStrategy; 4] = [
    SideStrategy::new(CdOutcome::C, UvOutcome::U),
    SideStrategy::new(CdOutcome::C, UvOutcome::V),
    SideStrategy::new(CdOutcome::D, UvOutcome::U),
    SideStrategy::new(CdOutcome::D, UvOutcome::V),
];

/// All 16 deterministic local strategies.
pub fn enumerate_strategies() -> Vec<LocalStrategy> {
    SIDES
        .iter()
        .flat_map(|&plus| {
            SIDES
                .iter()
                .map(move |&minus| LocalStrategy { plus, minus })
        })
        .collect()
}

/// The four measurable joint probabilities entering the bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointProbabilities<T> {
    pub dd: T,
    pub uu: T,
    pub dv: T,
    pub vd: T,
}

impl<T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>> JointProbabilities<T> {
    pub fn bound(&self) -> T {
        self.uu + self.dv + self.vd
    }

    /// Bound minus `p(d+;d−)`; negative means the local bound is violated.
    pub fn margin(&self) -> T {
        self.bound() - self.dd
    }
}

pub fn strategy_probabilities(s: &LocalStrategy) -> JointProbabilities<u8> {
    let (p, m) = (s.plus, s.minus);
    let both = |a: bool, b: bool| u8::from(a && b);
    JointProbabilities {
        dd: both(p.cd == CdOutcome::D, m.cd == CdOutcome::D),
        uu: both(p.uv == UvOutcome::U, m.uv == UvOutcome::U),
        dv: both(p.cd == CdOutcome::D, m.uv == UvOutcome::V),
        vd: both(p.uv == UvOutcome::V, m.cd == CdOutcome::D),
    }
}

/// Numeric type for strategy weights: `f64` with a small tolerance, or exact
/// rationals.
pub trait Weight:
    Num + Copy + PartialOrd + FromPrimitive + Neg<Output = Self> + fmt::Debug
{
    fn tolerance() -> Self;
}

impl Weight for f64 {
    fn tolerance() -> Self {
        1e-12
    }
}

impl Weight for Rational64 {
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
}

/// Weights over the 16 strategies, indexed by [`LocalStrategy::index`].
/// Negative weights are accepted so that quasi-distributions can be probed.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategyDistribution<W> {
    weights: [W; 16],
}

/// One measured outcome on one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Cd(CdOutcome),
    Uv(UvOutcome),
}

impl Outcome {
    fn matches(self, side: SideStrategy) -> bool {
        match self {
            Outcome::Cd(c) => side.cd == c,
            Outcome::Uv(u) => side.uv == u,
        }
    }
}

impl<W: Weight> StrategyDistribution<W> {
    pub fn new(weights: [W; 16]) -> Result<Self> {
        let total = weights.iter().fold(W::zero(), |a, &w| a + w);
        let dev = total - W::one();
        if dev > W::tolerance() || -dev > W::tolerance() {
            return Err(Error::validation(format!(
                "strategy weights must sum to 1, got {total:?}"
            )));
        }
        Ok(Self { weights })
    }

    pub fn vertex(s: &LocalStrategy) -> Self {
        let mut weights = [W::zero(); 16];
        weights[s.index()] = W::one();
        Self { weights }
    }

    pub fn uniform() -> Self {
        let w = W::one() / W::from_u8(16).expect("16 is representable");
        Self { weights: [w; 16] }
    }

    pub fn weights(&self) -> &[W; 16] {
        &self.weights
    }

    pub fn weight(&self, s: &LocalStrategy) -> W {
        self.weights[s.index()]
    }

    pub fn is_quasi(&self) -> bool {
        self.weights.iter().any(|&w| w < W::zero())
    }

    /// Probability of a fully specified outcome for both measurements on both
    /// sides (a single strategy).
    pub fn full_joint(&self, plus: SideStrategy, minus: SideStrategy) -> W {
        self.weight(&LocalStrategy { plus, minus })
    }

    /// Measurable joint probability: sums every strategy consistent with the
    /// outcome observed on each side.
    pub fn marginal(&self, plus: Outcome, minus: Outcome) -> W {
        enumerate_strategies()
            .iter()
            .filter(|s| plus.matches(s.plus) && minus.matches(s.minus))
            .fold(W::zero(), |a, s| a + self.weight(s))
    }

    pub fn joint_probabilities(&self) -> JointProbabilities<W> {
        use CdOutcome::D;
        use UvOutcome::{U, V};
        JointProbabilities {
            dd: self.marginal(Outcome::Cd(D), Outcome::Cd(D)),
            uu: self.marginal(Outcome::Uv(U), Outcome::Uv(U)),
            dv: self.marginal(Outcome::Cd(D), Outcome::Uv(V)),
            vd: self.marginal(Outcome::Uv(V), Outcome::Cd(D)),
        }
    }
}

/// A quasi-distribution reproducing the four measurable probabilities. One
/// weight is `p(u+;u−) − p(d+;d−)`, negative for the quantum prediction.
pub fn quasi_distribution_for(p: &JointProbabilities<f64>) -> Result<StrategyDistribution<f64>> {
    use CdOutcome::{C, D};
    use UvOutcome::{U, V};
    let s = |pc, pu, mc, mu| LocalStrategy {
        plus: SideStrategy::new(pc, pu),
        minus: SideStrategy::new(mc, mu),
    };
    let mut w = [0.0; 16];
    w[s(D, U, D, U).index()] = p.dd;
    w[s(C, U, C, U).index()] = p.uu - p.dd;
    w[s(D, V, C, V).index()] = p.dv;
    w[s(C, V, D, V).index()] = p.vd;
    w[s(C, V, C, V).index()] = 1.0 - p.uu - p.dv - p.vd;
    StrategyDistribution::new(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `lhs = rhs`
    Identity,
    /// `lhs ≤ rhs`
    Inequality,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainCheck<W> {
    pub name: &'static str,
    pub statement: &'static str,
    pub kind: CheckKind,
    pub lhs: W,
    pub rhs: W,
    /// `rhs − lhs`.
    pub slack: W,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport<W> {
    pub checks: Vec<ChainCheck<W>>,
}

impl<W: Weight> ChainReport<W> {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.name)
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&ChainCheck<W>> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Slack of the final bound.
    pub fn final_slack(&self) -> W {
        self.check("final_bound").expect("always present").slack
    }
}

fn identity<W: Weight>(
    name: &'static str,
    statement: &'static str,
    lhs: W,
    rhs: W,
) -> ChainCheck<W> {
    let slack = rhs - lhs;
    ChainCheck {
        name,
        statement,
        kind: CheckKind::Identity,
        lhs,
        rhs,
        slack,
        holds: slack <= W::tolerance() && -slack <= W::tolerance(),
    }
}

fn at_most<W: Weight>(
    name: &'static str,
    statement: &'static str,
    lhs: W,
    rhs: W,
) -> ChainCheck<W> {
    let slack = rhs - lhs;
    ChainCheck {
        name,
        statement,
        kind: CheckKind::Inequality,
        lhs,
        rhs,
        slack,
        holds: slack >= -W::tolerance(),
    }
}

/// Evaluates every step of the derivation of the bound for `dist`.
///
/// Marginals are computed directly from the strategy predicates, the
/// expansions from sums of fully specified joints, so the identities compare
/// two independent routes.
pub fn verify_inequality_chain<W: Weight>(dist: &StrategyDistribution<W>) -> ChainReport<W> {
    use CdOutcome::{C, D};
    use UvOutcome::{U, V};
    let j = |pu, pc, mu, mc| dist.full_joint(SideStrategy::new(pc, pu), SideStrategy::new(mc, mu));
    let p = dist.joint_probabilities();

    let uu_terms = j(U, D, U, D) + j(U, D, U, C) + j(U, C, U, D) + j(U, C, U, C);
    let udud = j(U, D, U, D);
    let mixed = j(U, D, V, D) + j(V, D, U, D) + j(V, D, V, D);
    let dd_terms = udud + mixed;
    let dv_terms = j(U, D, V, C) + j(U, D, V, D) + j(V, D, V, C) + j(V, D, V, D);
    let vd_terms = j(V, C, U, D) + j(V, C, V, D) + j(V, D, U, D) + j(V, D, V, D);

    let vertex_route = enumerate_strategies().iter().fold(W::zero(), |acc, s| {
        let q = strategy_probabilities(s);
        let slack = W::from_u8(q.uu + q.dv + q.vd).unwrap() - W::from_u8(q.dd).unwrap();
        acc + dist.weight(s) * slack
    });

    let checks = vec![
        identity(
            "uu_expansion",
            "p(u+;u-) = sum over x,y in {c,d} of p(u+,x+;u-,y-)",
            p.uu,
            uu_terms,
        ),
        at_most("uu_dominates", "p(u+,d+;u-,d-) <= p(u+;u-)", udud, p.uu),
        identity(
            "dd_expansion",
            "p(d+;d-) = p(u+,d+;u-,d-) + p(u+,d+;v-,d-) + p(v+,d+;u-,d-) + p(v+,d+;v-,d-)",
            p.dd,
            dd_terms,
        ),
        at_most(
            "dd_intermediate_bound",
            "p(d+;d-) <= p(u+;u-) + p(u+,d+;v-,d-) + p(v+,d+;u-,d-) + p(v+,d+;v-,d-)",
            p.dd,
            p.uu + mixed,
        ),
        identity(
            "dv_expansion",
            "p(d+;v-) = p(u+,d+;v-,c-) + p(u+,d+;v-,d-) + p(v+,d+;v-,c-) + p(v+,d+;v-,d-)",
            p.dv,
            dv_terms,
        ),
        identity(
            "vd_expansion",
            "p(v+;d-) = p(v+,c+;u-,d-) + p(v+,c+;v-,d-) + p(v+,d+;u-,d-) + p(v+,d+;v-,d-)",
            p.vd,
            vd_terms,
        ),
        at_most(
            "mixed_terms_bound",
            "p(u+,d+;v-,d-) + p(v+,d+;u-,d-) + p(v+,d+;v-,d-) <= p(d+;v-) + p(v+;d-)",
            mixed,
            p.dv + p.vd,
        ),
        at_most(
            "final_bound",
            "p(d+;d-) <= p(u+;u-) + p(d+;v-) + p(v+;d-)",
            p.dd,
            p.bound(),
        ),
        identity(
            "vertex_decomposition",
            "final slack = weighted sum of the 16 vertex slacks",
            p.margin(),
            vertex_route,
        ),
    ];
    ChainReport { checks }
}

/// Exhaustive check over the deterministic strategies with exact arithmetic.
pub fn verify_all_vertices() -> Vec<(LocalStrategy, ChainReport<Rational64>)> {
    enumerate_strategies()
        .into_iter()
        .map(|s| {
            (
                s,
                verify_inequality_chain(&StrategyDistribution::vertex(&s)),
            )
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violation,
    NoViolation,
    /// No counts at all; the error is undefined.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvReport {
    /// N(d+d−).
    pub lhs: f64,
    /// N(u+u−) + N(d+v−) + N(v+d−).
    pub rhs: f64,
    pub uu: f64,
    pub dv: f64,
    pub vd: f64,
    /// rhs − lhs.
    pub margin: f64,
    pub sigma: Option<f64>,
    /// −margin/sigma, set only for a violation.
    pub n_sigma: Option<f64>,
    pub verdict: Verdict,
    /// Trials per setting after normalization.
    pub trials: u64,
    pub error_model: &'static str,
}

pub const ERROR_MODEL: &str =
    "independent Poisson counts per setting; sigma = sqrt(N_dd + N_uu + N_dv + N_vd)";

impl LhvReport {
    /// −margin/sigma regardless of sign, or `None` when sigma is undefined.
    pub fn significance(&self) -> Option<f64> {
        self.sigma.map(|s| -self.margin / s)
    }

    /// Significance expected at `trials` pairs per setting; it grows as √n.
    pub fn projected_significance(&self, trials: u64) -> Option<f64> {
        if self.trials == 0 {
            return None;
        }
        self.significance()
            .map(|z| z * (trials as f64 / self.trials as f64).sqrt())
    }

    pub fn summary(&self) -> String {
        match (self.verdict, self.n_sigma, self.sigma) {
            (Verdict::Violation, Some(z), _) => format!(
                "local bound violated: N(d+d-)={:.1} > N(u+u-)+N(d+v-)+N(v+d-)={:.1} by {:.2} sigma",
                self.lhs, self.rhs, z
            ),
            (Verdict::NoViolation, _, Some(s)) => format!(
                "no violation: N(d+d-)={:.1} <= bound {:.1} (margin {:.1}, sigma {:.2})",
                self.lhs, self.rhs, self.margin, s
            ),
            _ => "inconclusive: no coincidence counts".to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViolationOptions {
    /// Rescale counts to the largest trial number instead of rejecting
    /// tables with different trial counts.
    pub normalize_trials: bool,
    /// Per-pair relative efficiencies (e.g. from a calibration run); counts
    /// are divided by them.
    pub efficiency: Option<BTreeMap<DetectorPair, f64>>,
}

impl ViolationOptions {
    pub fn normalized() -> Self {
        Self {
            normalize_trials: true,
            efficiency: None,
        }
    }
}

/// Compares N(d+d−) against the local bound built from the other three
/// settings.
pub fn evaluate_violation(tables: &[CountTable], opts: &ViolationOptions) -> Result<LhvReport> {
    let mut by_name: BTreeMap<SettingName, &CountTable> = BTreeMap::new();
    for t in tables {
        let name: SettingName = t.setting.parse()?;
        if by_name.insert(name, t).is_some() {
            return Err(Error::validation(format!("setting {name} given twice")));
        }
    }
    for name in SettingName::ALL {
        if !by_name.contains_key(&name) {
            return Err(Error::validation(format!("missing count table for {name}")));
        }
    }
    let reference = by_name.values().map(|t| t.trials).max().unwrap_or(0);
    if !opts.normalize_trials && by_name.values().any(|t| t.trials != reference) {
        return Err(Error::validation(
            "count tables have different trial numbers; enable normalization",
        ));
    }
    if let Some(eff) = &opts.efficiency
        && let Some(p) = DetectorPair::ALL
            .into_iter()
            .find(|p| eff.get(p).is_none_or(|&e| e.is_nan() || e <= 0.0))
    {
        return Err(Error::validation(format!(
            "efficiency for {p} must be positive"
        )));
    }

    // (value, variance) for each setting's rule count
    let estimate = |name: SettingName| -> (f64, f64) {
        let t = by_name[&name];
        let scale = if t.trials == 0 {
            0.0
        } else {
            reference as f64 / t.trials as f64
        };
        setting(name)
            .count_rule
            .iter()
            .fold((0.0, 0.0), |(v, var), &pair| {
                let eta = opts.efficiency.as_ref().map_or(1.0, |e| e[&pair]);
                let n = t.count(pair) as f64;
                let k = scale / eta;
                (v + k * n, var + k * k * n)
            })
    };
    let (lhs, var_dd) = estimate(SettingName::Dd);
    let (uu, var_uu) = estimate(SettingName::Uu);
    let (dv, var_dv) = estimate(SettingName::Dv);
    let (vd, var_vd) = estimate(SettingName::Vd);
    let rhs = uu + dv + vd;
    let margin = rhs - lhs;
    let variance = var_dd + var_uu + var_dv + var_vd;
    let sigma = (variance > 0.0).then(|| variance.sqrt());
    let (verdict, n_sigma) = match sigma {
        None => (Verdict::Inconclusive, None),
        Some(s) if margin < 0.0 => (Verdict::Violation, Some(-margin / s)),
        Some(_) => (Verdict::NoViolation, None),
    };
    Ok(LhvReport {
        lhs,
        rhs,
        uu,
        dv,
        vd,
        margin,
        sigma,
        n_sigma,
        verdict,
        trials: reference,
        error_model: ERROR_MODEL,
    })
}

/// Exact per-pair probabilities of the four measurable quantities.
pub fn analytic_joint_probabilities(params: &HardyParams) -> Result<JointProbabilities<f64>> {
    let table = analytic_table(params)?;
    Ok(JointProbabilities {
        dd: table.setting_probability(SettingName::Dd),
        uu: table.setting_probability(SettingName::Uu),
        dv: table.setting_probability(SettingName::Dv),
        vd: table.setting_probability(SettingName::Vd),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub p_disting: f64,
    pub margin: f64,
    pub dd: f64,
    pub uu: f64,
    pub dv: f64,
    pub vd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdScan {
    pub points: Vec<ThresholdPoint>,
    /// Distinguishability at which the margin crosses zero, if bracketed.
    pub root: Option<f64>,
}

fn point_at(params: &HardyParams, p: f64) -> Result<ThresholdPoint> {
    let probe = HardyParams {
        source: SourceParams::explicit(p),
        ..*params
    };
    let j = analytic_joint_probabilities(&probe)?;
    Ok(ThresholdPoint {
        p_disting: p,
        margin: j.margin(),
        dd: j.dd,
        uu: j.uu,
        dv: j.dv,
        vd: j.vd,
    })
}

/// Exact margin per source pair across `p_values`, plus the zero crossing
/// located by bisection between the smallest and largest `p`.
pub fn threshold_scan(p_values: &[f64], params: &HardyParams) -> Result<ThresholdScan> {
    if p_values.is_empty() {
        return Err(Error::config("threshold scan needs at least one p value"));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::config(format!("p_disting {p} outside [0,1]")));
    }
    let points = p_values
        .iter()
        .map(|&p| point_at(params, p))
        .collect::<Result<Vec<_>>>()?;
    let lo = p_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let root = bisect(|p| point_at(params, p).map(|x| x.margin), lo, hi)?;
    Ok(ThresholdScan { points, root })
}

fn bisect<F>(f: F, mut lo: f64, mut hi: f64) -> Result<Option<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 || hi - lo < 1e-14 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}
