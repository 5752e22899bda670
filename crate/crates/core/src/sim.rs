//! Numeric ensemble simulation: σ-quadrature of the averaged input map, a
//! time-domain Gramian, minimum-energy steering of the ensemble average, and
//! fixed-step RK4 integration of every σ-sample under the synthesized control.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::algebra::PolyMatrix;
use crate::construction;
use crate::graph::SparsityPattern;

/// Gramians with a larger 2-norm condition number are treated as singular.
pub const GRAMIAN_CONDITION_LIMIT: f64 = 1e12;

/// Seed for the compliant pair used when a scenario names a pattern that the
/// monomial construction does not cover.
pub const FALLBACK_PAIR_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quadrature {
    #[default]
    Midpoint,
    Simpson,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("need at least 2 σ-samples, got {0}")]
    TooFewSamples(usize),
    #[error("Simpson quadrature needs an odd number of σ-samples, got {0}")]
    EvenSimpson(usize),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("time_steps must be positive")]
    NoTimeSteps,
    #[error("A must be square and B must have as many rows ({a_rows}x{a_cols} and {b_rows}x{b_cols})")]
    Shape {
        a_rows: usize,
        a_cols: usize,
        b_rows: usize,
        b_cols: usize,
    },
    #[error("t = {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("vector has length {got}, expected {expected}")]
    VectorLength { got: usize, expected: usize },
    #[error("Gramian is numerically singular (condition number {condition:.3e}); the averaged system is not controllable")]
    SingularGramian { condition: f64 },
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub a: PolyMatrix,
    pub b: PolyMatrix,
    pub samples: usize,
    pub horizon: f64,
    pub quadrature: Quadrature,
    pub time_steps: usize,
}

impl EnsembleConfig {
    pub fn new(
        a: PolyMatrix,
        b: PolyMatrix,
        samples: usize,
        horizon: f64,
        quadrature: Quadrature,
        time_steps: usize,
    ) -> Result<Self, SimError> {
        if a.rows() != a.cols() || b.rows() != a.rows() {
            return Err(SimError::Shape {
                a_rows: a.rows(),
                a_cols: a.cols(),
                b_rows: b.rows(),
                b_cols: b.cols(),
            });
        }
        if samples < 2 {
            return Err(SimError::TooFewSamples(samples));
        }
        if quadrature == Quadrature::Simpson && samples.is_multiple_of(2) {
            return Err(SimError::EvenSimpson(samples));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(SimError::BadHorizon(horizon));
        }
        if time_steps == 0 {
            return Err(SimError::NoTimeSteps);
        }
        Ok(EnsembleConfig {
            a,
            b,
            samples,
            horizon,
            quadrature,
            time_steps,
        })
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    /// `(σ_i, w_i)` with `Σ w_i f(σ_i) ≈ ∫₀¹ f(σ) dσ`.
    pub fn sigma_grid(&self) -> Vec<(f64, f64)> {
        let m = self.samples;
        match self.quadrature {
            Quadrature::Midpoint => (0..m).map(|i| ((i as f64 + 0.5) / m as f64, 1.0 / m as f64)).collect(),
            Quadrature::Simpson => {
                let h = 1.0 / (m - 1) as f64;
                (0..m)
                    .map(|i| {
                        let w = if i == 0 || i == m - 1 {
                            1.0
                        } else if i % 2 == 1 {
                            4.0
                        } else {
                            2.0
                        };
                        (i as f64 * h, w * h / 3.0)
                    })
                    .collect()
            }
        }
    }

    fn step(&self) -> f64 {
        self.horizon / self.time_steps as f64
    }
}

/// Initial state profile `x(0, σ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState {
    #[default]
    Zero,
    Constant(Vec<f64>),
}

impl InitialState {
    fn at(&self, n: usize) -> DVector<f64> {
        match self {
            InitialState::Zero => DVector::zeros(n),
            InitialState::Constant(v) => DVector::from_column_slice(v),
        }
    }

    fn check(&self, n: usize) -> Result<(), SimError> {
        match self {
            InitialState::Constant(v) if v.len() != n => Err(SimError::VectorLength { got: v.len(), expected: n }),
            _ => Ok(()),
        }
    }
}

/// `B̄(t) = Σ_i w_i exp(A(σ_i) t) B(σ_i)`.
pub fn averaged_input_map(cfg: &EnsembleConfig, t: f64) -> Result<DMatrix<f64>, SimError> {
    if !(0.0..=cfg.horizon).contains(&t) {
        return Err(SimError::TimeOutOfRange { t, horizon: cfg.horizon });
    }
    let mut out = DMatrix::zeros(cfg.n(), cfg.inputs());
    for (sigma, w) in cfg.sigma_grid() {
        let a = cfg.a.eval_f64(sigma);
        let b = cfg.b.eval_f64(sigma);
        out += (a * t).exp() * b * w;
    }
    Ok(out)
}

/// `B̄` sampled at every half step `t_k = k·h/2`, `k = 0..=2N`.
fn averaged_input_samples(cfg: &EnsembleConfig) -> Vec<DMatrix<f64>> {
    let half = cfg.step() / 2.0;
    let nodes = 2 * cfg.time_steps + 1;
    let per_sigma: Vec<Vec<DMatrix<f64>>> = cfg
        .sigma_grid()
        .into_par_iter()
        .map(|(sigma, w)| {
            let a = cfg.a.eval_f64(sigma);
            let b = cfg.b.eval_f64(sigma) * w;
            (0..nodes).map(|k| (&a * (k as f64 * half)).exp() * &b).collect()
        })
        .collect();
    let mut acc = vec![DMatrix::zeros(cfg.n(), cfg.inputs()); nodes];
    for sample in per_sigma {
        for (slot, m) in acc.iter_mut().zip(sample) {
            *slot += m;
        }
    }
    acc
}

fn simpson_weights(nodes: usize, h: f64) -> Vec<f64> {
    (0..nodes)
        .map(|k| {
            let w = if k == 0 || k == nodes - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// 2-norm condition number; infinite when the smallest singular value is zero.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Everything needed to evaluate the minimum-energy control.
#[derive(Debug, Clone)]
pub struct SteeringPlan {
    /// `B̄(k·h/2)` for `k = 0..=2N`.
    pub input_samples: Vec<DMatrix<f64>>,
    pub gramian: DMatrix<f64>,
    pub condition: f64,
    pub free_average: DVector<f64>,
    /// `W⁻¹ (target − free_average)`
    pub multiplier: DVector<f64>,
    half_step: f64,
}

impl SteeringPlan {
    /// `u(t_k) = B̄(T − t_k)ᵀ W⁻¹ d` at half-step node `k`.
    pub fn control_at_node(&self, k: usize) -> DVector<f64> {
        let last = self.input_samples.len() - 1;
        self.input_samples[last - k].transpose() * &self.multiplier
    }

    pub fn control_nodes(&self) -> Vec<DVector<f64>> {
        (0..self.input_samples.len()).map(|k| self.control_at_node(k)).collect()
    }

    /// `∫₀ᵀ ‖u‖²` by Simpson on the half-step grid.
    pub fn energy_of(&self, nodes: &[DVector<f64>]) -> f64 {
        simpson_weights(nodes.len(), self.half_step)
            .iter()
            .zip(nodes)
            .map(|(w, u)| w * u.norm_squared())
            .sum()
    }

    /// `∫₀ᵀ B̄(T − s) v(s) ds` for a control given on the half-step grid.
    pub fn reach_of(&self, nodes: &[DVector<f64>]) -> DVector<f64> {
        let last = self.input_samples.len() - 1;
        let weights = simpson_weights(nodes.len(), self.half_step);
        let mut out = DVector::zeros(self.gramian.nrows());
        for (k, (w, v)) in weights.iter().zip(nodes).enumerate() {
            out += &self.input_samples[last - k] * v * *w;
        }
        out
    }
}

fn free_average(cfg: &EnsembleConfig, x0: &InitialState) -> DVector<f64> {
    let n = cfg.n();
    let mut out = DVector::zeros(n);
    if *x0 == InitialState::Zero {
        return out;
    }
    let x = x0.at(n);
    for (sigma, w) in cfg.sigma_grid() {
        out += (cfg.a.eval_f64(sigma) * cfg.horizon).exp() * &x * w;
    }
    out
}

pub fn plan_steering(cfg: &EnsembleConfig, x0: &InitialState, target: &[f64]) -> Result<SteeringPlan, SimError> {
    let n = cfg.n();
    x0.check(n)?;
    if target.len() != n {
        return Err(SimError::VectorLength {
            got: target.len(),
            expected: n,
        });
    }
    let half_step = cfg.step() / 2.0;
    let input_samples = averaged_input_samples(cfg);
    let weights = simpson_weights(input_samples.len(), half_step);
    let mut gramian = DMatrix::zeros(n, n);
    for (w, bb) in weights.iter().zip(&input_samples) {
        gramian += bb * bb.transpose() * *w;
    }
    let condition = condition_number(&gramian);
    if condition.is_nan() || condition > GRAMIAN_CONDITION_LIMIT {
        return Err(SimError::SingularGramian { condition });
    }
    let free_average = free_average(cfg, x0);
    let d = DVector::from_column_slice(target) - &free_average;
    let multiplier = gramian
        .clone()
        .lu()
        .solve(&d)
        .ok_or(SimError::SingularGramian { condition })?;
    Ok(SteeringPlan {
        input_samples,
        gramian,
        condition,
        free_average,
        multiplier,
        half_step,
    })
}

/// Integrates every σ-sample with classical RK4 under a control given on the
/// half-step grid (`2N + 1` values) and returns the quadrature average at `T`.
pub fn simulate_average(cfg: &EnsembleConfig, x0: &InitialState, control: &[DVector<f64>]) -> Result<DVector<f64>, SimError> {
    let n = cfg.n();
    x0.check(n)?;
    let expected = 2 * cfg.time_steps + 1;
    if control.len() != expected {
        return Err(SimError::VectorLength {
            got: control.len(),
            expected,
        });
    }
    let h = cfg.step();
    let finals: Vec<DVector<f64>> = cfg
        .sigma_grid()
        .into_par_iter()
        .map(|(sigma, w)| {
            let a = cfg.a.eval_f64(sigma);
            let b = cfg.b.eval_f64(sigma);
            let f = |x: &DVector<f64>, u: &DVector<f64>| &a * x + &b * u;
            let mut x = x0.at(n);
            for s in 0..cfg.time_steps {
                let (u0, um, u1) = (&control[2 * s], &control[2 * s + 1], &control[2 * s + 2]);
                let k1 = f(&x, u0);
                let k2 = f(&(&x + &k1 * (h / 2.0)), um);
                let k3 = f(&(&x + &k2 * (h / 2.0)), um);
                let k4 = f(&(&x + &k3 * h), u1);
                x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            x * w
        })
        .collect();
    Ok(finals.into_iter().fold(DVector::zeros(n), |acc, x| acc + x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringResult {
    pub achieved_average: Vec<f64>,
    pub target: Vec<f64>,
    pub relative_error: f64,
    pub gramian_condition: f64,
    pub control_energy: f64,
}

pub fn relative_error(achieved: &DVector<f64>, target: &[f64]) -> f64 {
    let t = DVector::from_column_slice(target);
    (achieved - &t).norm() / t.norm().max(1.0)
}

pub fn steer_average(cfg: &EnsembleConfig, x0: &InitialState, target: &[f64]) -> Result<SteeringResult, SimError> {
    let plan = plan_steering(cfg, x0, target)?;
    let control = plan.control_nodes();
    let achieved = simulate_average(cfg, x0, &control)?;
    Ok(SteeringResult {
        relative_error: relative_error(&achieved, target),
        achieved_average: achieved.iter().copied().collect(),
        target: target.to_vec(),
        gramian_condition: plan.condition,
        control_energy: plan.energy_of(&control),
    })
}

/// Parsed scenario file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: EnsembleConfig,
    pub x0: InitialState,
    pub target: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    pattern: Option<Value>,
    pair: Option<RawPair>,
    #[serde(rename = "M")]
    samples: usize,
    #[serde(rename = "T")]
    horizon: f64,
    time_steps: usize,
    target: Vec<f64>,
    #[serde(default)]
    x0: Option<Value>,
    #[serde(default)]
    quadrature: Option<Quadrature>,
}

#[derive(Deserialize)]
struct RawPair {
    a: PolyMatrix,
    b: PolyMatrix,
}

/// Compliant pair used for a pattern: the monomial construction when it applies,
/// otherwise a seeded random monomial pair.
pub fn pair_for_pattern(g: &SparsityPattern) -> (PolyMatrix, PolyMatrix) {
    match construction::monomial_certificate(g) {
        Ok(cert) => cert.pair_original(),
        Err(_) => {
            let mut rng = ChaCha8Rng::seed_from_u64(FALLBACK_PAIR_SEED);
            construction::random_monomial_pair(g, &mut rng, 3)
        }
    }
}

impl Scenario {
    /// `{pattern | pair: {a, b}, M, T, time_steps, target, x0?: "zero" | [..], quadrature?}`
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        let (a, b) = match (raw.pattern, raw.pair) {
            (Some(p), None) => {
                let g = SparsityPattern::from_json(&p.to_string()).map_err(|e| SimError::Scenario(e.to_string()))?;
                pair_for_pattern(&g)
            }
            (None, Some(pair)) => (pair.a, pair.b),
            _ => return Err(SimError::Scenario("exactly one of `pattern` and `pair` is required".into())),
        };
        let x0 = match raw.x0 {
            None => InitialState::Zero,
            Some(Value::String(s)) if s == "zero" => InitialState::Zero,
            Some(v) => InitialState::Constant(
                serde_json::from_value(v).map_err(|e| SimError::Scenario(format!("x0: {e}")))?,
            ),
        };
        let config = EnsembleConfig::new(a, b, raw.samples, raw.horizon, raw.quadrature.unwrap_or_default(), raw.time_steps)?;
        x0.check(config.n())?;
        if raw.target.len() != config.n() {
            return Err(SimError::VectorLength {
                got: raw.target.len(),
                expected: config.n(),
            });
        }
        Ok(Scenario {
            config,
            x0,
            target: raw.target,
        })
    }

    pub fn run(&self) -> Result<SteeringResult, SimError> {
        steer_average(&self.config, &self.x0, &self.target)
    }
}
