//! Uniformity, loss, and timing studies of the loop architecture.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loop_model::{pass_transfer_matrix, program_unitary, LoopPass, NestedLoopProgram, SwitchSetting};
use crate::matrices::ComplexMatrix;

/// Unitarity required by [`similarity`].
pub const SIMILARITY_TOL: f64 = 1e-8;

/// Margin kept away from 0 and π/2 when drawing random coupler angles.
pub const THETA_MARGIN: f64 = 0.01;

/// Default bound on `nΔ/σ` for the dephasing check.
pub const DEFAULT_DEPHASING_RATIO_MAX: f64 = 0.1;

/// Uniformity score `(Σ|U_ij|)² / n³`; 1 exactly when every entry has
/// magnitude `1/√n`.
pub fn similarity(u: &ComplexMatrix) -> Result<f64> {
    let residual = u.unitarity_residual()?;
    if residual > SIMILARITY_TOL {
        return Err(Error::validation(format!(
            "similarity needs a unitary: max|U†U - I| = {residual:e}"
        )));
    }
    let n = u.rows() as f64;
    let sum: f64 = u.as_slice().iter().map(|z| z.norm()).sum();
    Ok(sum * sum / (n * n * n))
}

/// Normalised overlap of `|U|` with the balanced magnitudes `1/√n`, valid
/// for any square matrix.
pub fn similarity_overlap(u: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() {
        return Err(Error::validation("similarity needs a square matrix"));
    }
    let n = u.rows() as f64;
    let balanced_sq = 1.0 / n;
    let overlap: f64 = u.as_slice().iter().map(|z| (z.norm_sqr() * balanced_sq).sqrt()).sum();
    let norm_u: f64 = u.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let norm_b = balanced_sq * n * n;
    Ok(overlap * overlap / (norm_u * norm_b))
}

/// Pass whose interior events all carry the same real coupler.
pub fn fixed_ratio_pass(n: usize, theta: f64) -> Result<LoopPass> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::validation(format!(
            "fixed coupler angle {theta} must lie strictly inside (0, π/2)"
        )));
    }
    let coupler = SwitchSetting::new(theta, 0.0, 0.0)?;
    let settings = (0..=n)
        .map(|e| {
            if e == 0 || e == n {
                SwitchSetting::reflective()
            } else {
                coupler
            }
        })
        .collect();
    LoopPass::new(n, settings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityStudyResult {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub best_s: f64,
    pub best_thetas: Vec<f64>,
    pub seed: u64,
    /// Range the coupler angles were drawn from, uniformly.
    pub theta_range: (f64, f64),
}

/// Random search over fixed-ratio loop sequences for the most uniform
/// unitary.
///
/// Each trial draws `m` angles uniformly from
/// `(THETA_MARGIN, π/2 − THETA_MARGIN)` using its own ChaCha stream of the
/// master seed, so the result does not depend on how trials are scheduled.
/// Ties go to the lowest trial index.
pub fn monte_carlo_max_similarity(n: usize, m: usize, trials: usize, seed: u64) -> Result<SimilarityStudyResult> {
    if n == 0 {
        return Err(Error::validation("need at least one time bin"));
    }
    if m == 0 {
        return Err(Error::validation("need at least one loop (m >= 1)"));
    }
    if trials == 0 {
        return Err(Error::validation("need at least one trial"));
    }
    let (lo, hi) = (THETA_MARGIN, FRAC_PI_2 - THETA_MARGIN);

    let run_trial = |trial: usize| -> Result<(f64, usize, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let thetas: Vec<f64> = (0..m).map(|_| rng.random_range(lo..hi)).collect();
        let passes = thetas
            .iter()
            .map(|&t| fixed_ratio_pass(n, t))
            .collect::<Result<Vec<_>>>()?;
        let u = program_unitary(&NestedLoopProgram::new(n, passes)?);
        Ok((similarity(u.matrix())?, trial, thetas))
    };

    let best = (0..trials)
        .into_par_iter()
        .map(run_trial)
        .try_reduce_with(|a, b| {
            let keep_a = a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
            Ok(if keep_a { a } else { b })
        })
        .expect("at least one trial")?;

    Ok(SimilarityStudyResult {
        n,
        m,
        trials,
        best_s: best.0,
        best_thetas: best.2,
        seed,
        theta_range: (lo, hi),
    })
}

/// Survival probabilities per inner-loop circulation and per outer round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    eta_inner: f64,
    eta_outer: f64,
}

impl LossParams {
    pub fn new(eta_inner: f64, eta_outer: f64) -> Result<Self> {
        for (name, v) in [("eta_inner", eta_inner), ("eta_outer", eta_outer)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!("{name} = {v} is not a probability")));
            }
        }
        Ok(Self { eta_inner, eta_outer })
    }

    pub fn lossless() -> Self {
        Self {
            eta_inner: 1.0,
            eta_outer: 1.0,
        }
    }

    pub fn eta_inner(&self) -> f64 {
        self.eta_inner
    }

    pub fn eta_outer(&self) -> f64 {
        self.eta_outer
    }
}

/// Worst-case end-to-end efficiency `(η_inner^n · η_outer)^roundtrips`.
pub fn net_efficiency(loss: &LossParams, n: usize, roundtrips: usize) -> f64 {
    let per_trip = loss.eta_inner.powf(n as f64) * loss.eta_outer;
    per_trip.powf(roundtrips as f64)
}

/// Transfer matrix of one pass with each loop path attenuated by
/// `√η_inner` per circulation.
///
/// The bypass path (input bin `j + 1` to output bin `j`) never enters the
/// loop; a photon entering at bin `i` and leaving into bin `j ≥ i` circulates
/// `j − i + 1` times.
pub fn lossy_pass_matrix(pass: &LoopPass, loss: &LossParams) -> ComplexMatrix {
    let amp = loss.eta_inner.sqrt();
    pass_transfer_matrix(pass, |circulations| amp.powi(circulations as i32))
}

/// Product of lossy passes, each additionally scaled by `√η_outer` for its
/// outer-loop round trip.
pub fn lossy_program_matrix(prog: &NestedLoopProgram, loss: &LossParams) -> ComplexMatrix {
    let outer = loss.eta_outer.sqrt();
    prog.passes()
        .iter()
        .fold(ComplexMatrix::identity(prog.n()), |acc, pass| {
            acc.matmul(&lossy_pass_matrix(pass, loss).scaled(outer))
                .expect("passes share the bin count")
        })
}

/// Pulse spacing, per-round-trip timing mismatch, and wavepacket width, in
/// seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingParams {
    tau: f64,
    delta: f64,
    sigma: f64,
}

impl TimingParams {
    pub fn new(tau: f64, delta: f64, sigma: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::validation(format!("tau must be positive, got {tau}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::validation(format!("delta must be nonnegative, got {delta}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::validation(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { tau, delta, sigma })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// `nΔ < τ`: accumulated mismatch stays inside one bin.
    pub bin_ok: bool,
    /// `nΔ/σ ≤ dephasing_ratio_max`.
    pub dephasing_ok: bool,
    /// Largest `n` with `nΔ < τ`; `None` when `Δ = 0`.
    pub n_max_bins: Option<u64>,
    /// `nΔ/σ`.
    pub dephasing_ratio: f64,
}

pub fn timing_feasibility(n: usize, t: &TimingParams, dephasing_ratio_max: f64) -> Result<TimingReport> {
    if !(dephasing_ratio_max.is_finite() && dephasing_ratio_max > 0.0) {
        return Err(Error::validation("dephasing ratio threshold must be positive"));
    }
    let fits = |bins: f64| bins * t.delta < t.tau;
    let n_max_bins = (t.delta > 0.0).then(|| {
        // Start from the real-valued bound and settle on the predicate itself.
        let mut k = (t.tau / t.delta).floor().max(0.0);
        while k > 0.0 && !fits(k) {
            k -= 1.0;
        }
        while fits(k + 1.0) {
            k += 1.0;
        }
        k as u64
    });
    let dephasing_ratio = n as f64 * t.delta / t.sigma;
    Ok(TimingReport {
        bin_ok: fits(n as f64),
        dephasing_ok: dephasing_ratio <= dephasing_ratio_max,
        n_max_bins,
        dephasing_ratio,
    })
}
