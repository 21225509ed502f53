//! Lowering of target unitaries to loop programs.
//!
//! A pass with a single non-reflective event `q + 1` acts as an SU(2) block
//! on bins `(q, q + 1)` and as the identity elsewhere, so any factorisation
//! into adjacent two-mode rotations maps onto passes one-to-one. The leftover
//! diagonal is realised by a pass that only carries phases on reflective
//! events.
//!
//! Two factorisations are provided. [`Strategy::PerRotation`] nulls the
//! target column by column from the left and emits one pass per rotation.
//! [`Strategy::Packed`] nulls alternately from both sides, which yields a
//! rectangular mesh of depth `n`; disjoint rotations then share a pass.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::loop_model::{wrap_phase, LoopPass, NestedLoopProgram, SwitchSetting};
use crate::matrices::ComplexMatrix;

/// Unitarity required of compiler inputs.
pub const COMPILE_TOL: f64 = 1e-8;

/// Rotation on bins `(q, q + 1)` with the block of [`SwitchSetting::coupler`]:
/// `[[exit, circulate], [bypass, enter]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensStep {
    q: usize,
    setting: SwitchSetting,
}

impl GivensStep {
    pub fn new(q: usize, theta: f64, phi: f64, lam: f64) -> Result<Self> {
        Ok(Self {
            q,
            setting: SwitchSetting::new(theta, phi, lam)?,
        })
    }

    /// Step realising the SU(2) block `[[a, b], [−b*, a*]]`.
    fn from_su2(q: usize, a: Complex64, b: Complex64) -> Self {
        let theta = b.norm().atan2(a.norm());
        let setting = SwitchSetting::new(theta, a.arg(), b.arg()).expect("atan2 of magnitudes lies in [0, π/2]");
        Self { q, setting }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.setting.theta()
    }

    pub fn phi(&self) -> f64 {
        self.setting.phi()
    }

    pub fn lam(&self) -> f64 {
        self.setting.lam()
    }

    pub fn setting(&self) -> SwitchSetting {
        self.setting
    }

    /// The step embedded as an `n × n` matrix.
    pub fn embed(&self, n: usize) -> ComplexMatrix {
        let g = self.setting.coupler();
        let mut m = ComplexMatrix::identity(n);
        m[(self.q, self.q)] = g.exit;
        m[(self.q, self.q + 1)] = g.circulate;
        m[(self.q + 1, self.q)] = g.bypass;
        m[(self.q + 1, self.q + 1)] = g.enter;
        m
    }
}

/// Residual diagonal `diag(e^{iδ_0}, …, e^{iδ_{n−1}})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLayer {
    deltas: Vec<f64>,
}

impl PhaseLayer {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::validation("phase layer must cover at least one bin"));
        }
        if deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::validation("phases must be finite"));
        }
        Ok(Self { deltas })
    }

    pub fn zeros(n: usize) -> Self {
        Self { deltas: vec![0.0; n] }
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn is_trivial(&self) -> bool {
        self.deltas.iter().all(|&d| d == 0.0)
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let n = self.deltas.len();
        ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, self.deltas[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    PerRotation,
    Packed,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-rotation" => Ok(Strategy::PerRotation),
            "packed" => Ok(Strategy::Packed),
            other => Err(Error::validation(format!(
                "unknown strategy {other:?}, expected per-rotation or packed"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::PerRotation => "per-rotation",
            Strategy::Packed => "packed",
        })
    }
}

/// Pass whose only non-reflective event is `q + 1`.
pub fn rotation_pass(n: usize, q: usize, theta: f64, phi: f64, lam: f64) -> Result<LoopPass> {
    let step = GivensStep::new(q, theta, phi, lam)?;
    layer_pass(n, &[step])
}

/// Pass realising several mode-disjoint rotations at once.
pub fn layer_pass(n: usize, steps: &[GivensStep]) -> Result<LoopPass> {
    let mut settings = vec![SwitchSetting::reflective(); n + 1];
    let mut used = vec![false; n];
    for step in steps {
        if n < 2 || step.q > n - 2 {
            return Err(Error::validation(format!(
                "rotation on bins ({}, {}) is out of range for {n} bins",
                step.q,
                step.q + 1
            )));
        }
        if used[step.q] || used[step.q + 1] {
            return Err(Error::validation(format!(
                "rotation on bins ({}, {}) overlaps another rotation in the same pass",
                step.q,
                step.q + 1
            )));
        }
        used[step.q] = true;
        used[step.q + 1] = true;
        settings[step.q + 1] = step.setting;
    }
    LoopPass::new(n, settings)
}

/// All-reflective pass whose event phases telescope to `diag(e^{iδ})`.
pub fn phase_pass(n: usize, layer: &PhaseLayer) -> Result<LoopPass> {
    if layer.deltas.len() != n {
        return Err(Error::validation(format!(
            "phase layer has {} entries for {n} bins",
            layer.deltas.len()
        )));
    }
    // Bin i picks up enter(i)·exit(i+1) = e^{i(φ_{i+1} − φ_i)}.
    let mut settings = Vec::with_capacity(n + 1);
    let mut phi = 0.0;
    settings.push(SwitchSetting::reflective());
    for &delta in &layer.deltas {
        phi = wrap_phase(phi + delta);
        settings.push(SwitchSetting::reflective_with_phase(phi)?);
    }
    LoopPass::new(n, settings)
}

fn check_compilable(u: &ComplexMatrix) -> Result<()> {
    let residual = u.unitarity_residual()?;
    if residual > COMPILE_TOL {
        return Err(Error::numerical(format!(
            "target is not unitary: max|U†U - I| = {residual:e} exceeds {COMPILE_TOL:e}"
        )));
    }
    Ok(())
}

/// `M ← G·M` with `G` acting on rows `(q, q+1)`.
fn apply_left(m: &mut ComplexMatrix, q: usize, g: [[Complex64; 2]; 2]) {
    for c in 0..m.cols() {
        let (x, y) = (m[(q, c)], m[(q + 1, c)]);
        m[(q, c)] = g[0][0] * x + g[0][1] * y;
        m[(q + 1, c)] = g[1][0] * x + g[1][1] * y;
    }
}

/// `M ← M·G` with `G` acting on columns `(q, q+1)`.
fn apply_right(m: &mut ComplexMatrix, q: usize, g: [[Complex64; 2]; 2]) {
    for r in 0..m.rows() {
        let (x, y) = (m[(r, q)], m[(r, q + 1)]);
        m[(r, q)] = x * g[0][0] + y * g[1][0];
        m[(r, q + 1)] = x * g[0][1] + y * g[1][1];
    }
}

/// Row operation on `(r−1, r)` that zeroes `m[r][c]`, with its inverse as a step.
fn null_from_left(m: &mut ComplexMatrix, r: usize, c: usize) -> Option<GivensStep> {
    let (x, y) = (m[(r - 1, c)], m[(r, c)]);
    if y == Complex64::new(0.0, 0.0) {
        return None;
    }
    let h = x.norm().hypot(y.norm());
    let g = [[x.conj() / h, y.conj() / h], [-y / h, x / h]];
    apply_left(m, r - 1, g);
    m[(r, c)] = Complex64::new(0.0, 0.0);
    // G† = [[x/h, −y*/h], [y*/h, x*/h]]
    Some(GivensStep::from_su2(r - 1, x / h, -y.conj() / h))
}

/// Column operation on `(c, c+1)` that zeroes `m[r][c]`; returns `(α, β)` of
/// the applied SU(2) block `[[α, β], [−β*, α*]]`.
fn null_from_right(m: &mut ComplexMatrix, r: usize, c: usize) -> Option<(Complex64, Complex64)> {
    let (x, y) = (m[(r, c)], m[(r, c + 1)]);
    if x == Complex64::new(0.0, 0.0) {
        return None;
    }
    let h = x.norm().hypot(y.norm());
    let (alpha, beta) = (y / h, x.conj() / h);
    apply_right(m, c, [[alpha, beta], [-beta.conj(), alpha.conj()]]);
    m[(r, c)] = Complex64::new(0.0, 0.0);
    Some((alpha, beta))
}

fn diagonal_phases(m: &ComplexMatrix) -> PhaseLayer {
    PhaseLayer {
        deltas: (0..m.rows()).map(|i| m[(i, i)].arg()).collect(),
    }
}

/// Factorises `U = T_1 · T_2 ⋯ T_K · D` into adjacent rotations and a phase
/// layer, with `K ≤ n(n−1)/2`.
///
/// Entries are nulled column by column from the first, bottom to top, each
/// with a rotation on rows `(r−1, r)`. Steps are returned in application
/// order.
pub fn decompose_adjacent_givens(u: &ComplexMatrix) -> Result<(Vec<GivensStep>, PhaseLayer)> {
    check_compilable(u)?;
    let n = u.rows();
    let mut work = u.clone();
    let mut steps = Vec::with_capacity(n * (n - 1) / 2);
    for c in 0..n.saturating_sub(1) {
        for r in (c + 1..n).rev() {
            steps.extend(null_from_left(&mut work, r, c));
        }
    }
    Ok((steps, diagonal_phases(&work)))
}

/// Same contract as [`decompose_adjacent_givens`], but nulls alternately
/// from the right and the left so the steps form a rectangular mesh whose
/// dependency depth is at most `n`.
pub fn decompose_rectangular(u: &ComplexMatrix) -> Result<(Vec<GivensStep>, PhaseLayer)> {
    check_compilable(u)?;
    let n = u.rows();
    let mut work = u.clone();
    let mut left: Vec<GivensStep> = Vec::new();
    let mut right: Vec<(usize, Complex64, Complex64)> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                let (r, c) = (n - 1 - j, i - j);
                if let Some((alpha, beta)) = null_from_right(&mut work, r, c) {
                    right.push((c, alpha, beta));
                }
            }
        } else {
            for j in 0..=i {
                let (r, c) = (n - 1 - i + j, j);
                left.extend(null_from_left(&mut work, r, c));
            }
        }
    }

    let layer = diagonal_phases(&work);
    let d: Vec<Complex64> = layer.deltas.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    // U = L_1†⋯L_a† · D · R_b†⋯R_1†, and D·T = (D T D⁻¹)·D moves each
    // right-hand block past the diagonal with only its off-diagonal phase
    // changed.
    let mut steps = left;
    for &(q, alpha, beta) in right.iter().rev() {
        let a = alpha.conj();
        let b = -beta * d[q] / d[q + 1];
        steps.push(GivensStep::from_su2(q, a, b));
    }
    Ok((steps, layer))
}

/// `T_1 ⋯ T_K · D` for an `n`-bin factorisation.
pub fn reconstruct(n: usize, steps: &[GivensStep], layer: &PhaseLayer) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(n);
    for step in steps {
        let g = step.setting.coupler();
        apply_right(&mut acc, step.q, [[g.exit, g.circulate], [g.bypass, g.enter]]);
    }
    acc.matmul(&layer.to_matrix()).expect("layer matches bin count")
}

/// Groups steps into passes of mode-disjoint rotations, each step placed in
/// the earliest pass after every earlier step it shares a mode with.
pub fn pack_layers(n: usize, steps: &[GivensStep]) -> Vec<Vec<GivensStep>> {
    let mut next_free = vec![0usize; n];
    let mut layers: Vec<Vec<GivensStep>> = Vec::new();
    for step in steps {
        let layer = next_free[step.q].max(next_free[step.q + 1]);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(*step);
        next_free[step.q] = layer + 1;
        next_free[step.q + 1] = layer + 1;
    }
    layers
}

/// Compiles `u` into a program whose unitary reproduces it.
///
/// `PerRotation` emits at most `n(n−1)/2 + 1` passes, `Packed` at most
/// `n + 1`. The trailing phase pass is omitted when the residual diagonal is
/// exactly the identity.
pub fn compile_unitary(u: &ComplexMatrix, strategy: Strategy) -> Result<NestedLoopProgram> {
    let n = u.rows();
    let (steps, layer) = match strategy {
        Strategy::PerRotation => decompose_adjacent_givens(u)?,
        Strategy::Packed => decompose_rectangular(u)?,
    };
    let mut passes = match strategy {
        Strategy::PerRotation => steps
            .iter()
            .map(|s| layer_pass(n, std::slice::from_ref(s)))
            .collect::<Result<Vec<_>>>()?,
        Strategy::Packed => pack_layers(n, &steps)
            .iter()
            .map(|l| layer_pass(n, l))
            .collect::<Result<Vec<_>>>()?,
    };
    if !layer.is_trivial() {
        passes.push(phase_pass(n, &layer)?);
    }
    NestedLoopProgram::new(n, passes)
}

/// Program applying the block `[[cosθ e^{iφ}, sinθ e^{iλ}], [−sinθ e^{−iλ}, cosθ e^{−iφ}]]`
/// to bins `a < b` and the identity elsewhere.
///
/// Bin `b` is walked down to `a + 1` with full-coupler passes, the rotation
/// is applied on `(a, a + 1)`, and the walk is undone. Each full coupler
/// contributes a sign to the routed off-diagonal; the rotation's `λ` is
/// pre-shifted by `π` per intermediate bin to cancel it.
pub fn pairwise_bs_program(n: usize, a: usize, b: usize, theta: f64, phi: f64, lam: f64) -> Result<NestedLoopProgram> {
    if a >= b || b >= n {
        return Err(Error::validation(format!(
            "pairwise interaction needs 0 <= a < b < n, got a={a}, b={b}, n={n}"
        )));
    }
    let hops = b - a - 1;
    let mut passes = Vec::with_capacity(2 * hops + 1);
    for q in (a + 1..b).rev() {
        passes.push(rotation_pass(n, q, std::f64::consts::FRAC_PI_2, 0.0, 0.0)?);
    }
    let shifted_lam = lam + std::f64::consts::PI * (hops % 2) as f64;
    passes.push(rotation_pass(n, a, theta, phi, shifted_lam)?);
    for q in a + 1..b {
        passes.push(rotation_pass(
            n,
            q,
            std::f64::consts::FRAC_PI_2,
            0.0,
            std::f64::consts::PI,
        )?);
    }
    NestedLoopProgram::new(n, passes)
}
