//! Single-atom dynamics in the impulse regime.
//!
//! Levels are indexed from zero in code: index 0 is the ground state `|1⟩`,
//! index 1 the excited state `|2⟩`, index 2 the second ground state `|3⟩`
//! and index 3 the auxiliary shelving state `|a⟩`.
//!
//! All quantities are dimensionless: detunings in units of the inhomogeneous
//! width Δ₀ and times in units of 1/Δ₀.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{invalid, require_finite, Error, Result};

/// Tolerance used for the unitarity, trace and Hermiticity invariants.
pub const INVARIANT_TOL: f64 = 1e-12;

const I: C64 = C64::new(0.0, 1.0);

fn check_dim(dim: usize) -> Result<usize> {
    if (2..=4).contains(&dim) {
        Ok(dim)
    } else {
        invalid(format!("level count must be 2, 3 or 4, got {dim}"))
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Density matrix of a single atom.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomState {
    rho: DMatrix<C64>,
}

impl AtomState {
    /// All population in `|1⟩`.
    pub fn ground(dim: usize) -> Result<Self> {
        let dim = check_dim(dim)?;
        let mut rho = DMatrix::zeros(dim, dim);
        rho[(0, 0)] = C64::new(1.0, 0.0);
        Ok(Self { rho })
    }

    /// Pure state `|ψ⟩⟨ψ|` built from (not necessarily normalized) amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return invalid("amplitudes must have a finite, non-zero norm");
        }
        let n = amplitudes.len();
        let rho = DMatrix::from_fn(n, n, |i, j| amplitudes[i] * amplitudes[j].conj() / (norm * norm));
        Ok(Self { rho })
    }

    /// Wraps an explicit matrix after checking unit trace, Hermiticity and
    /// positivity to [`INVARIANT_TOL`].
    pub fn from_matrix(rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() {
            return invalid("density matrix must be square");
        }
        check_dim(rho.nrows())?;
        let state = Self { rho };
        if (state.trace() - 1.0).abs() > INVARIANT_TOL {
            return invalid(format!("trace must be 1, got {}", state.trace()));
        }
        if state.hermiticity_defect() > INVARIANT_TOL {
            return invalid("density matrix must be Hermitian");
        }
        if state.min_eigenvalue() < -INVARIANT_TOL {
            return invalid("density matrix must be positive semi-definite");
        }
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    /// `⟨i|ρ|j⟩` with zero-based level indices.
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.rho[(i, j)]
    }

    /// Optical coherence `⟨1|ρ|2⟩`, the source of the macroscopic polarization.
    pub fn optical_coherence(&self) -> C64 {
        self.rho[(0, 1)]
    }

    /// Population of zero-based level `i`.
    pub fn population(&self, i: usize) -> f64 {
        self.rho[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Largest entry of `ρ − ρ†`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.rho - self.rho.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()).map(|z| z / 2.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.rho[(i, j)] == C64::new(0.0, 0.0)))
    }

    pub(crate) fn conjugate_by(&self, u: &DMatrix<C64>) -> Self {
        Self { rho: u * &self.rho * u.adjoint() }
    }
}

/// Unitary single-atom propagator.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagator {
    u: DMatrix<C64>,
}

impl Propagator {
    pub fn identity(dim: usize) -> Result<Self> {
        let dim = check_dim(dim)?;
        Ok(Self { u: DMatrix::identity(dim, dim) })
    }

    /// Wraps an explicit matrix, rejecting anything that is not unitary to
    /// [`INVARIANT_TOL`].
    pub fn from_matrix(u: DMatrix<C64>) -> Result<Self> {
        if !u.is_square() {
            return invalid("propagator must be square");
        }
        check_dim(u.nrows())?;
        let p = Self { u };
        if p.unitarity_defect() > INVARIANT_TOL {
            return invalid("propagator is not unitary");
        }
        Ok(p)
    }

    /// Resonant short pulse of area `theta` on a two-level atom:
    ///
    /// ```text
    /// ┌                          ┐
    /// │  cos(θ/2)    -i sin(θ/2) │
    /// │ -i sin(θ/2)   cos(θ/2)   │
    /// └                          ┘
    /// ```
    pub fn two_level_impulse(theta: f64) -> Result<Self> {
        Self::two_level_impulse_phased(theta, 0.0)
    }

    /// Short pulse carrying optical phase `phase`. The upper off-diagonal
    /// picks up `e^{-iφ}` and the lower one `e^{+iφ}`; `phase = 0` is the
    /// plain impulse. Used for the spatial phases `k·r` of the pulses.
    pub fn two_level_impulse_phased(theta: f64, phase: f64) -> Result<Self> {
        require_finite("pulse area", theta)?;
        require_finite("pulse phase", phase)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let c = C64::new(c, 0.0);
        let upper = -I * s * C64::from_polar(1.0, -phase);
        let lower = -I * s * C64::from_polar(1.0, phase);
        Ok(Self { u: DMatrix::from_row_slice(2, 2, &[c, upper, lower, c]) })
    }

    /// Free evolution `diag(1, e^{-iΔ·dt})` of a two-level atom.
    pub fn two_level_free(delta: f64, dt: f64) -> Result<Self> {
        Self::free_evolution(2, 1, delta, dt)
    }

    /// Resonant Raman pulse of effective area `theta_r` on the Λ system
    /// `{|1⟩, |2⟩, |3⟩}`, assuming equal peak Rabi frequencies on both legs.
    pub fn raman_impulse(theta_r: f64) -> Result<Self> {
        require_finite("Raman pulse area", theta_r)?;
        let (s, c) = (theta_r / 2.0).sin_cos();
        let corner = C64::new((1.0 + c) / 2.0, 0.0);
        let anti = C64::new((c - 1.0) / 2.0, 0.0);
        let leg = -I * FRAC_1_SQRT_2 * s;
        let mid = C64::new(c, 0.0);
        #[rustfmt::skip]
        let u = DMatrix::from_row_slice(3, 3, &[
            corner, leg, anti,
            leg,    mid, leg,
            anti,   leg, corner,
        ]);
        Ok(Self { u })
    }

    /// Free evolution `diag(1, 1, e^{-iΔr·dt})` of the Λ system; the
    /// broadening sits on the spin transition `|1⟩-|3⟩`.
    pub fn three_level_free(delta_r: f64, dt: f64) -> Result<Self> {
        Self::free_evolution(3, 2, delta_r, dt)
    }

    /// π pulse on `|2⟩-|3⟩`: the two-level π impulse embedded in that
    /// subspace, identity on `|1⟩`.
    pub fn pi_pulse_23() -> Self {
        Self::two_level_impulse(PI).and_then(|p| p.embed(3, &[1, 2])).expect("π pulse embedding is always valid")
    }

    /// `dim`-level free evolution that accumulates phase `e^{-iΔ·dt}` on the
    /// single zero-based level `phase_level`.
    pub fn free_evolution(dim: usize, phase_level: usize, delta: f64, dt: f64) -> Result<Self> {
        let dim = check_dim(dim)?;
        require_finite("detuning", delta)?;
        require_finite("duration", dt)?;
        if dt < 0.0 {
            return invalid(format!("duration must be non-negative, got {dt}"));
        }
        if phase_level >= dim {
            return invalid(format!("level {phase_level} out of range for {dim} levels"));
        }
        let mut u = DMatrix::identity(dim, dim);
        u[(phase_level, phase_level)] = C64::from_polar(1.0, -delta * dt);
        Ok(Self { u })
    }

    /// Embeds this propagator into a `dim`-level space acting on the listed
    /// zero-based levels (in order), identity elsewhere.
    pub fn embed(&self, dim: usize, levels: &[usize]) -> Result<Self> {
        let dim = check_dim(dim)?;
        if levels.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: levels.len() });
        }
        if levels.iter().any(|&l| l >= dim) {
            return invalid("embedding level out of range");
        }
        for (k, l) in levels.iter().enumerate() {
            if levels[..k].contains(l) {
                return invalid("embedding levels must be distinct");
            }
        }
        let mut u = DMatrix::identity(dim, dim);
        for (a, &la) in levels.iter().enumerate() {
            for (b, &lb) in levels.iter().enumerate() {
                u[(la, lb)] = self.u[(a, b)];
            }
        }
        Ok(Self { u })
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn adjoint(&self) -> Self {
        Self { u: self.u.adjoint() }
    }

    /// The propagator for "`self`, then `next`", i.e. `next·self`.
    pub fn then(&self, next: &Propagator) -> Result<Self> {
        if next.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: next.dim() });
        }
        Ok(Self { u: &next.u * &self.u })
    }

    /// Max-norm of `u†u − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.u.adjoint() * &self.u - DMatrix::<C64>::identity(n, n)))
    }

    /// Applies the propagator to a state vector.
    pub fn apply_amplitudes(&self, amplitudes: &[C64]) -> Result<Vec<C64>> {
        if amplitudes.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: amplitudes.len() });
        }
        let n = self.dim();
        Ok((0..n).map(|i| (0..n).map(|j| self.u[(i, j)] * amplitudes[j]).sum()).collect())
    }
}

/// `ρ → UρU†`.
pub fn apply(p: &Propagator, s: &AtomState) -> Result<AtomState> {
    if p.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: s.dim() });
    }
    Ok(s.conjugate_by(&p.u))
}

/// Complete loss of coherence: every off-diagonal element is zeroed and the
/// populations are kept.
pub fn dephase(s: &AtomState) -> AtomState {
    let n = s.dim();
    let rho = DMatrix::from_fn(n, n, |i, j| if i == j { s.rho[(i, i)] } else { C64::new(0.0, 0.0) });
    AtomState { rho }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_matrix(p: &Propagator, expected: &[C64], tol: f64) {
        for (got, want) in p.matrix().transpose().iter().zip(expected) {
            assert!((got - want).norm() <= tol, "{got} != {want}\n{}", p.matrix());
        }
    }

    #[test]
    fn zero_area_pulse_is_identity() {
        let p = Propagator::two_level_impulse(0.0).unwrap();
        assert_eq!(p, Propagator::identity(2).unwrap());
    }

    #[test]
    fn pi_pulse_swaps_with_minus_i() {
        let p = Propagator::two_level_impulse(PI).unwrap();
        assert_matrix(&p, &[c(0., 0.), c(0., -1.), c(0., -1.), c(0., 0.)], 1e-15);
    }

    #[test]
    fn weak_pulse_creates_coherence_i_epsilon() {
        let eps = 1e-3;
        let p = Propagator::two_level_impulse(2.0 * eps).unwrap();
        let amps = p.apply_amplitudes(&[c(1., 0.), c(0., 0.)]).unwrap();
        assert_abs_diff_eq!(amps[0].re, eps.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(amps[1].im, -eps.sin(), epsilon = 1e-15);
        let coherence = amps[0] * amps[1].conj();
        assert!((coherence - c(0., eps)).norm() < eps.powi(3));
    }

    #[test]
    fn non_finite_area_is_rejected() {
        assert!(matches!(Propagator::two_level_impulse(f64::NAN), Err(Error::InvalidParameter(_))));
        assert!(matches!(Propagator::raman_impulse(f64::INFINITY), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn free_evolution_examples() {
        assert_eq!(Propagator::two_level_free(0.0, 5.0).unwrap(), Propagator::identity(2).unwrap());
        let half = Propagator::two_level_free(PI, 1.0).unwrap();
        assert_matrix(&half, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)], 1e-15);
        let p = Propagator::two_level_free(2.0, 3.0).unwrap();
        assert_abs_diff_eq!((p.matrix()[(1, 1)] - C64::from_polar(1.0, -6.0)).norm(), 0.0, epsilon = 1e-15);
        assert!(Propagator::two_level_free(1.0, -1e-9).is_err());
        assert!(Propagator::three_level_free(1.0, -1.0).is_err());
    }

    #[test]
    fn three_level_free_examples() {
        assert_eq!(Propagator::three_level_free(0.0, 7.0).unwrap(), Propagator::identity(3).unwrap());
        let full = Propagator::three_level_free(1.0, 2.0 * PI).unwrap();
        assert!((full.matrix() - DMatrix::<C64>::identity(3, 3)).iter().all(|z| z.norm() < 1e-15));
        let p = Propagator::three_level_free(1.0, PI).unwrap();
        assert_abs_diff_eq!(p.matrix()[(2, 2)].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn raman_examples() {
        assert_eq!(Propagator::raman_impulse(0.0).unwrap(), Propagator::identity(3).unwrap());
        let full = Propagator::raman_impulse(2.0 * PI).unwrap();
        #[rustfmt::skip]
        assert_matrix(&full, &[
            c(0., 0.), c(0., 0.), c(-1., 0.),
            c(0., 0.), c(-1., 0.), c(0., 0.),
            c(-1., 0.), c(0., 0.), c(0., 0.),
        ], 1e-15);
        let half = Propagator::raman_impulse(PI).unwrap();
        let r = FRAC_1_SQRT_2;
        #[rustfmt::skip]
        assert_matrix(&half, &[
            c(0.5, 0.), c(0., -r), c(-0.5, 0.),
            c(0., -r), c(0., 0.), c(0., -r),
            c(-0.5, 0.), c(0., -r), c(0.5, 0.),
        ], 1e-15);
    }

    #[test]
    fn raman_two_pi_flips_spin_populations() {
        let u = Propagator::raman_impulse(2.0 * PI).unwrap();
        let s = AtomState::pure(&[c(0.8, 0.), c(0., 0.), c(0.6, 0.)]).unwrap();
        let out = apply(&u, &s).unwrap();
        assert_abs_diff_eq!(out.population(0), 0.36, epsilon = 1e-14);
        assert_abs_diff_eq!(out.population(2), 0.64, epsilon = 1e-14);
        assert_abs_diff_eq!(out.population(1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn pi_23_examples() {
        let p = Propagator::pi_pulse_23();
        let out = p.apply_amplitudes(&[c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert_eq!(out[0], c(1., 0.));
        assert!(out[1].norm() < 1e-16 && out[2].norm() < 1e-16);

        let eps = 1e-3;
        let out = p.apply_amplitudes(&[c(1., 0.), c(0., -eps), c(0., 0.)]).unwrap();
        assert!((out[1]).norm() < 1e-16);
        assert!((out[2] - c(-eps, 0.)).norm() < 1e-16);

        let twice = p.then(&p).unwrap();
        #[rustfmt::skip]
        assert_matrix(&twice, &[
            c(1., 0.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(-1., 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(-1., 0.),
        ], 1e-15);
    }

    #[test]
    fn weak_pulse_then_pi_23_stores_spin_coherence() {
        let eps = 0.01;
        let weak = Propagator::two_level_impulse(2.0 * eps).unwrap().embed(3, &[0, 1]).unwrap();
        let block = weak.then(&Propagator::pi_pulse_23()).unwrap();
        let out = block.apply_amplitudes(&[c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!((out[0] - c(eps.cos(), 0.)).norm() < 1e-15);
        assert!(out[1].norm() < 1e-15);
        assert!((out[2] - c(-eps.sin(), 0.)).norm() < 1e-15);
        assert!((out[2] - c(-eps, 0.)).norm() < eps.powi(3));
    }

    #[test]
    fn full_inversion_of_ground_state() {
        let s = AtomState::ground(2).unwrap();
        let out = apply(&Propagator::two_level_impulse(PI).unwrap(), &s).unwrap();
        assert_abs_diff_eq!(out.population(1), 1.0, epsilon = 1e-15);
        assert_eq!(apply(&Propagator::identity(2).unwrap(), &s).unwrap(), s);
    }

    #[test]
    fn apply_rejects_dimension_mismatch() {
        let s = AtomState::ground(3).unwrap();
        let err = apply(&Propagator::two_level_impulse(1.0).unwrap(), &s).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
    }

    #[test]
    fn dephase_keeps_populations_only() {
        let s = AtomState::pure(&[c(0.6, 0.), c(0., 0.8)]).unwrap();
        let d = dephase(&s);
        assert!(d.is_diagonal());
        assert_eq!(d.populations(), s.populations());
        assert_eq!(dephase(&d), d);
    }

    #[test]
    fn from_matrix_validates() {
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0., 0.), c(0., 0.), c(0.6, 0.)]);
        assert!(AtomState::from_matrix(bad).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[c(1.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)]);
        assert!(AtomState::from_matrix(neg).is_err());
        let not_unitary = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(0., 0.), c(1., 0.)]);
        assert!(Propagator::from_matrix(not_unitary).is_err());
    }

    fn random_state(dim: usize, raw: &[(f64, f64)]) -> AtomState {
        // mixture of two random pure states
        let a: Vec<C64> = raw[..dim].iter().map(|&(re, im)| c(re, im)).collect();
        let b: Vec<C64> = raw[dim..2 * dim].iter().map(|&(re, im)| c(im, re)).collect();
        let (pa, pb) = (AtomState::pure(&a).unwrap(), AtomState::pure(&b).unwrap());
        let rho = pa.matrix() * C64::new(0.3, 0.) + pb.matrix() * C64::new(0.7, 0.);
        AtomState::from_matrix(rho).unwrap()
    }

    fn propagators(theta: f64, delta: f64, dt: f64) -> Vec<Propagator> {
        vec![
            Propagator::two_level_impulse(theta).unwrap(),
            Propagator::two_level_impulse_phased(theta, delta).unwrap(),
            Propagator::two_level_free(delta, dt).unwrap(),
            Propagator::raman_impulse(theta).unwrap(),
            Propagator::three_level_free(delta, dt).unwrap(),
            Propagator::pi_pulse_23(),
            Propagator::raman_impulse(theta).unwrap().embed(4, &[0, 1, 2]).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn propagators_are_unitary(theta in -50.0..50.0f64, delta in -10.0..10.0f64, dt in 0.0..200.0f64) {
            for p in propagators(theta, delta, dt) {
                prop_assert!(p.unitarity_defect() <= INVARIANT_TOL, "{:?}", p);
            }
        }

        #[test]
        fn area_is_additive(t1 in -20.0..20.0f64, t2 in -20.0..20.0f64) {
            let a = Propagator::two_level_impulse(t1).unwrap();
            let b = Propagator::two_level_impulse(t2).unwrap();
            let ab = a.then(&b).unwrap();
            let direct = Propagator::two_level_impulse(t1 + t2).unwrap();
            prop_assert!(max_abs(&(ab.matrix() - direct.matrix())) <= 1e-12);
        }

        #[test]
        fn apply_preserves_trace_and_hermiticity(
            raw in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6),
            theta in -20.0..20.0f64,
            delta in -8.0..8.0f64,
            dt in 0.0..100.0f64,
        ) {
            prop_assume!(raw[..3].iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
            prop_assume!(raw[3..].iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
            for p in propagators(theta, delta, dt) {
                let s = random_state(p.dim().min(3), &raw);
                if s.dim() != p.dim() {
                    continue;
                }
                let out = apply(&p, &s).unwrap();
                prop_assert!((out.trace() - 1.0).abs() <= 1e-12);
                prop_assert!(out.hermiticity_defect() <= 1e-12);
                prop_assert!(out.min_eigenvalue() >= -1e-12);
            }
        }

        #[test]
        fn dephase_is_exact_projection(raw in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 6)) {
            prop_assume!(raw[..3].iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
            prop_assume!(raw[3..].iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3));
            let s = random_state(3, &raw);
            let once = dephase(&s);
            prop_assert_eq!(once.trace(), s.trace());
            prop_assert_eq!(&dephase(&once), &once);
        }
    }
}
