//! Switch schedules for the nested-loop architecture and the time-bin
//! unitaries they induce.
//!
//! Indices here are zero-based. A pass over `n` bins has `n + 1` switch
//! events: event `e` fires when bin `e` arrives at the coupler, and event `n`
//! closes the window. Light leaving the coupler at event `e` occupies output
//! bin `e − 1`. In the JSON program format event `e` is written as `t = e + 1`.
//!
//! Under the row convention `a_i† → Σ_j U[i][j] a_j†` a single pass gives
//!
//! ```text
//! U[i][j] = 0                                              i > j + 1
//! U[i][j] = bypass(i)                                      i = j + 1
//! U[i][j] = enter(i) · circulate(i+1..=j) · exit(j + 1)    i ≤ j
//! ```

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrices::{ComplexMatrix, UnitaryMatrix};

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(angle: f64) -> f64 {
    let mut x = angle % TAU;
    if x > PI {
        x -= TAU;
    } else if x <= -PI {
        x += TAU;
    }
    x
}

/// Coupler configuration at one switch event.
///
/// `theta` sets the split ratio: 0 fully exchanges the loop and line fields
/// (completely reflective), π/2 lets both bypass each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchSetting {
    theta: f64,
    phi: f64,
    lam: f64,
}

/// The four transfer amplitudes of a coupler, by port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupler {
    /// Loop to line.
    pub exit: Complex64,
    /// Loop to loop.
    pub circulate: Complex64,
    /// Line to line.
    pub bypass: Complex64,
    /// Line to loop.
    pub enter: Complex64,
}

impl SwitchSetting {
    /// `theta` must lie in `[0, π/2]`; phases are wrapped into `(−π, π]`.
    pub fn new(theta: f64, phi: f64, lam: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::validation(format!("coupling angle {theta} outside [0, π/2]")));
        }
        if !phi.is_finite() || !lam.is_finite() {
            return Err(Error::validation("switch phases must be finite"));
        }
        Ok(Self {
            theta,
            phi: wrap_phase(phi),
            lam: wrap_phase(lam),
        })
    }

    pub const fn reflective() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
            lam: 0.0,
        }
    }

    /// Reflective event carrying a phase.
    pub fn reflective_with_phase(phi: f64) -> Result<Self> {
        Self::new(0.0, phi, 0.0)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    pub fn is_reflective(&self) -> bool {
        self.theta == 0.0
    }

    pub fn coupler(&self) -> Coupler {
        let (s, c) = self.theta.sin_cos();
        Coupler {
            exit: Complex64::from_polar(c, self.phi),
            circulate: Complex64::from_polar(s, self.lam),
            bypass: -Complex64::from_polar(s, -self.lam),
            enter: Complex64::from_polar(c, -self.phi),
        }
    }
}

/// 2×2 coupler matrix `γ[a][b]`, input port `a` to output port `b`.
///
/// Input ports: 0 = loop, 1 = line. Output ports: 0 = line, 1 = loop.
pub fn switch_unitary(s: &SwitchSetting) -> ComplexMatrix {
    let g = s.coupler();
    ComplexMatrix::new(2, 2, vec![g.exit, g.circulate, g.bypass, g.enter]).expect("2x2 coupler is well formed")
}

/// One traversal of the pulse train through the inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPass {
    settings: Vec<SwitchSetting>,
}

impl LoopPass {
    /// `settings[e]` configures event `e`; there must be `n + 1` of them and
    /// the first and last must be reflective.
    pub fn new(n: usize, settings: Vec<SwitchSetting>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("a pass needs at least one time bin"));
        }
        if settings.len() != n + 1 {
            return Err(Error::validation(format!(
                "a pass over {n} bins needs {} switch events, got {}",
                n + 1,
                settings.len()
            )));
        }
        for e in [0, n] {
            if !settings[e].is_reflective() {
                return Err(Error::validation(format!(
                    "switch event t={} must be completely reflective (theta = 0), got theta = {}",
                    e + 1,
                    settings[e].theta
                )));
            }
        }
        Ok(Self { settings })
    }

    /// Every event reflective with zero phase: the identity pass.
    pub fn reflective(n: usize) -> Result<Self> {
        Self::new(n, vec![SwitchSetting::reflective(); n + 1])
    }

    pub fn n(&self) -> usize {
        self.settings.len() - 1
    }

    pub fn settings(&self) -> &[SwitchSetting] {
        &self.settings
    }

    /// Replaces the setting at `event`, re-checking the window boundary.
    pub fn with_event(mut self, event: usize, setting: SwitchSetting) -> Result<Self> {
        let n = self.n();
        if event > n {
            return Err(Error::validation(format!("event {event} out of range 0..={n}")));
        }
        self.settings[event] = setting;
        Self::new(n, self.settings)
    }
}

/// Passes applied consecutively by the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedLoopProgram {
    n: usize,
    passes: Vec<LoopPass>,
    tau_seconds: Option<f64>,
}

impl NestedLoopProgram {
    pub fn new(n: usize, passes: Vec<LoopPass>) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("a program needs at least one time bin"));
        }
        if let Some((k, p)) = passes.iter().enumerate().find(|(_, p)| p.n() != n) {
            return Err(Error::validation(format!(
                "pass {k} acts on {} bins but the program has {n}",
                p.n()
            )));
        }
        Ok(Self {
            n,
            passes,
            tau_seconds: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, Vec::new())
    }

    pub fn with_tau(mut self, tau_seconds: Option<f64>) -> Result<Self> {
        if let Some(tau) = tau_seconds {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::validation(format!("tau_seconds must be positive, got {tau}")));
            }
        }
        self.tau_seconds = tau_seconds;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn passes(&self) -> &[LoopPass] {
        &self.passes
    }

    /// Number of outer-loop round trips.
    pub fn len(&self) -> usize {
        self.passes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passes.is_empty()
    }

    pub fn tau_seconds(&self) -> Option<f64> {
        self.tau_seconds
    }

    pub fn push(&mut self, pass: LoopPass) -> Result<()> {
        if pass.n() != self.n {
            return Err(Error::validation(format!(
                "pass acts on {} bins but the program has {}",
                pass.n(),
                self.n
            )));
        }
        self.passes.push(pass);
        Ok(())
    }
}

/// Time-bin unitary of one pass.
pub fn single_pass_unitary(pass: &LoopPass) -> UnitaryMatrix {
    UnitaryMatrix::new_unchecked(pass_transfer_matrix(pass, |_| 1.0))
}

/// Single-pass entries with each loop path scaled by `attenuation(c)`, where `c`
/// is the number of circulations along that path (0 for a bypass).
pub(crate) fn pass_transfer_matrix(pass: &LoopPass, attenuation: impl Fn(usize) -> f64) -> ComplexMatrix {
    let n = pass.n();
    let couplers: Vec<Coupler> = pass.settings.iter().map(SwitchSetting::coupler).collect();
    let mut u = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        if i > 0 {
            u[(i, i - 1)] = couplers[i].bypass * attenuation(0);
        }
        let mut in_loop = couplers[i].enter;
        for j in i..n {
            if j > i {
                in_loop *= couplers[j].circulate;
            }
            u[(i, j)] = in_loop * couplers[j + 1].exit * attenuation(j - i + 1);
        }
    }
    u
}

/// Composite unitary `U_1 · U_2 ⋯ U_m`; the empty program is the identity.
pub fn program_unitary(prog: &NestedLoopProgram) -> UnitaryMatrix {
    let mut passes = prog.passes.iter();
    let Some(first) = passes.next() else {
        return UnitaryMatrix::identity(prog.n);
    };
    let mut total = single_pass_unitary(first).into_inner();
    for pass in passes {
        total = total
            .matmul(single_pass_unitary(pass).matrix())
            .expect("passes share the program's bin count");
    }
    UnitaryMatrix::new_unchecked(total)
}

/// Amplitudes over output bins for one photon entering in `input_bin`,
/// obtained by stepping the coupler event by event.
pub fn propagate_single_photon(pass: &LoopPass, input_bin: usize) -> Result<Vec<Complex64>> {
    let n = pass.n();
    if input_bin >= n {
        return Err(Error::validation(format!("input bin {input_bin} out of range 0..{n}")));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut loop_amp = zero;
    let mut out = vec![zero; n];
    for (event, setting) in pass.settings.iter().enumerate() {
        let g = setting.coupler();
        let arriving = if event == input_bin {
            Complex64::new(1.0, 0.0)
        } else {
            zero
        };
        let line = loop_amp * g.exit + arriving * g.bypass;
        loop_amp = loop_amp * g.circulate + arriving * g.enter;
        if event > 0 {
            out[event - 1] = line;
        } else {
            debug_assert_eq!(line, zero, "nothing can leave before the first bin arrives");
        }
    }
    debug_assert!(
        loop_amp.norm() < 1e-15,
        "light left in the loop after the window closed"
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::is_unitary;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coupler_pass(n: usize, event: usize, theta: f64) -> LoopPass {
        LoopPass::reflective(n)
            .unwrap()
            .with_event(event, SwitchSetting::new(theta, 0.0, 0.0).unwrap())
            .unwrap()
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(0.5), 0.5);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_phase(-4.0) - (2.0 * PI - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn reflective_switch_is_identity_layout() {
        let g = switch_unitary(&SwitchSetting::reflective());
        assert_eq!(g, ComplexMatrix::identity(2));
    }

    #[test]
    fn balanced_switch() {
        let g = switch_unitary(&SwitchSetting::new(FRAC_PI_4, 0.0, 0.0).unwrap());
        for z in g.as_slice() {
            assert!((z.norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
        assert!(g[(1, 0)].re < 0.0);
    }

    #[test]
    fn switch_is_unitary_for_any_angles() {
        for &(t, p, l) in &[
            (0.3, 1.0, -2.0),
            (1.5, 3.0, 0.1),
            (FRAC_PI_2, -1.0, 2.5),
            (0.0, 2.0, 2.0),
        ] {
            let g = switch_unitary(&SwitchSetting::new(t, p, l).unwrap());
            assert!(is_unitary(&g, 1e-14).unwrap());
        }
    }

    #[test]
    fn switch_rejects_bad_theta() {
        assert!(SwitchSetting::new(-0.1, 0.0, 0.0).is_err());
        assert!(SwitchSetting::new(2.0, 0.0, 0.0).is_err());
        assert!(SwitchSetting::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(SwitchSetting::new(0.1, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn pass_boundary_is_enforced() {
        let mut settings = vec![SwitchSetting::reflective(); 4];
        settings[0] = SwitchSetting::new(0.2, 0.0, 0.0).unwrap();
        assert!(matches!(LoopPass::new(3, settings), Err(Error::Validation(_))));

        let mut settings = vec![SwitchSetting::reflective(); 4];
        settings[3] = SwitchSetting::new(0.2, 0.0, 0.0).unwrap();
        assert!(LoopPass::new(3, settings).is_err());

        assert!(LoopPass::new(3, vec![SwitchSetting::reflective(); 3]).is_err());
        assert!(LoopPass::new(0, vec![SwitchSetting::reflective()]).is_err());

        // Phases at the boundary are fine.
        let mut settings = vec![SwitchSetting::reflective(); 4];
        settings[0] = SwitchSetting::reflective_with_phase(1.0).unwrap();
        settings[3] = SwitchSetting::reflective_with_phase(-2.0).unwrap();
        assert!(LoopPass::new(3, settings).is_ok());
    }

    #[test]
    fn all_reflective_pass_is_exact_identity() {
        let u = single_pass_unitary(&LoopPass::reflective(3).unwrap());
        assert_eq!(*u.matrix(), ComplexMatrix::identity(3));
    }

    #[test]
    fn two_bin_balanced_pass() {
        // Hand evaluation of the pass formula.
        let u = single_pass_unitary(&coupler_pass(2, 1, FRAC_PI_4));
        let h = FRAC_1_SQRT_2;
        let want = ComplexMatrix::new(2, 2, vec![c(h, 0.0), c(h, 0.0), c(-h, 0.0), c(h, 0.0)]).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn single_photon_two_bin_hand_simulation() {
        // Event 0 loads the photon into the loop, event 1 splits it 50:50,
        // event 2 empties the loop.
        let out = propagate_single_photon(&coupler_pass(2, 1, FRAC_PI_4), 0).unwrap();
        assert!((out[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn single_photon_identity() {
        let out = propagate_single_photon(&LoopPass::reflective(3).unwrap(), 1).unwrap();
        assert_eq!(out, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(propagate_single_photon(&LoopPass::reflective(3).unwrap(), 3).is_err());
    }

    #[test]
    fn exponential_decay_closed_form() {
        let n = 7;
        let theta = 0.6;
        let settings: Vec<_> = (0..=n)
            .map(|e| {
                if e == 0 || e == n {
                    SwitchSetting::reflective()
                } else {
                    SwitchSetting::new(theta, 0.0, 0.0).unwrap()
                }
            })
            .collect();
        let u = single_pass_unitary(&LoopPass::new(n, settings).unwrap());
        let (s, co) = theta.sin_cos();
        // Interior input and output bins (1 < i ≤ j < n in one-based terms).
        for i in 1..n - 1 {
            for j in i..n - 1 {
                let want = co * co * s.powi((j - i) as i32);
                assert!((u[(i, j)].norm() - want).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn program_of_two_rotations_adds_angles() {
        let (t1, t2) = (0.3, 0.5);
        let prog = NestedLoopProgram::new(2, vec![coupler_pass(2, 1, t1), coupler_pass(2, 1, t2)]).unwrap();
        let u = program_unitary(&prog);
        let (s, co) = (t1 + t2).sin_cos();
        let want = ComplexMatrix::new(2, 2, vec![c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0)]).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn empty_and_reflective_programs() {
        let u = program_unitary(&NestedLoopProgram::identity(4).unwrap());
        assert_eq!(*u.matrix(), ComplexMatrix::identity(4));
        let r = LoopPass::reflective(4).unwrap();
        let prog = NestedLoopProgram::new(4, vec![r.clone(), r]).unwrap();
        assert_eq!(*program_unitary(&prog).matrix(), ComplexMatrix::identity(4));
    }

    #[test]
    fn mixed_bin_counts_are_rejected() {
        let res = NestedLoopProgram::new(
            3,
            vec![LoopPass::reflective(3).unwrap(), LoopPass::reflective(4).unwrap()],
        );
        assert!(matches!(res, Err(Error::Validation(_))));
        let mut prog = NestedLoopProgram::identity(3).unwrap();
        assert!(prog.push(LoopPass::reflective(2).unwrap()).is_err());
    }

    #[test]
    fn tau_must_be_positive() {
        let prog = NestedLoopProgram::identity(2).unwrap();
        assert!(prog.clone().with_tau(Some(-1.0)).is_err());
        assert_eq!(prog.with_tau(Some(1e-9)).unwrap().tau_seconds(), Some(1e-9));
    }
}
