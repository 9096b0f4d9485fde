//! Relativistic fermionic catability on the oscillator ⊗ spinor space,
//! revivals of the anharmonic spectrum and Zitterbewegung.
//!
//! The witness is `Ĉ_D = (a² − α²)†(a² − α²) ⊗ I₄ + γ(1 ∓ Π̂_x ⊗ γ⁰)` with the
//! Fock index outermost.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::catability::quadratic_operator;
use crate::error::{CatError, Result};
use crate::fock::{self, cat_state, expectation_real, required_cutoff, CatSpec, FockSpace, OperatorMatrix, Parity};
use crate::fw::{dirac_alpha_x, dirac_beta, free_dirac_hamiltonian};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracCatSpec {
    pub alpha: Complex64,
    pub parity_branch: Parity,
    pub gamma: f64,
    pub mass: f64,
    pub momentum: f64,
    pub omega: f64,
}

impl DiracCatSpec {
    pub fn new(
        alpha: Complex64,
        parity_branch: Parity,
        gamma: f64,
        mass: f64,
        momentum: f64,
        omega: f64,
    ) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(CatError::ZeroMass(mass));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(CatError::invalid(format!("omega must be positive, got {omega}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(CatError::invalid(format!("gamma must be positive, got {gamma}")));
        }
        if !momentum.is_finite() {
            return Err(CatError::NonFinite);
        }
        Ok(Self {
            alpha,
            parity_branch,
            gamma,
            mass,
            momentum,
            omega,
        })
    }

    /// `E = √(p² + m²)`.
    pub fn energy(&self) -> f64 {
        self.momentum.hypot(self.mass)
    }
}

/// Unit-norm four-component spinor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorState {
    amplitudes: [Complex64; 4],
}

impl SpinorState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(CatError::InvalidState(format!("spinor norm {norm}")));
        }
        Ok(Self { amplitudes })
    }

    fn normalized(v: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(CatError::InvalidState("zero spinor".into()));
        }
        Ok(Self {
            amplitudes: v.map(|z| z / norm),
        })
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.amplitudes
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    /// Equal-weight superposition `(self + other)/‖·‖`.
    pub fn superpose(&self, other: &SpinorState) -> Result<Self> {
        let mut v = self.amplitudes;
        for (a, b) in v.iter_mut().zip(other.amplitudes) {
            *a += b;
        }
        Self::normalized(v)
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> f64 {
        let v = self.to_vector();
        v.dotc(&op.apply(&v)).re
    }
}

fn sigma_x_times(chi: [Complex64; 2], scale: f64) -> [Complex64; 2] {
    [chi[1] * scale, chi[0] * scale]
}

/// Positive-energy eigenspinor of `α_x p + βm`: `(χ, σ_x p/(E+m) χ)`, normalized.
pub fn positive_energy_spinor(p: f64, m: f64, chi: [Complex64; 2]) -> Result<SpinorState> {
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    let lower = sigma_x_times(chi, p / (p.hypot(m) + m));
    SpinorState::normalized([chi[0], chi[1], lower[0], lower[1]])
}

/// Negative-energy eigenspinor `(−σ_x p/(E+m) χ, χ)`, normalized.
pub fn negative_energy_spinor(p: f64, m: f64, chi: [Complex64; 2]) -> Result<SpinorState> {
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    let upper = sigma_x_times(chi, -p / (p.hypot(m) + m));
    SpinorState::normalized([upper[0], upper[1], chi[0], chi[1]])
}

pub const SPIN_UP: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
pub const SPIN_DOWN: [Complex64; 2] = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];

/// `⟨Π̂_x⟩` on the normalized cat `|α⟩ ± |−α⟩` from its coherent overlaps:
/// `(2e^{−2|α|²} ± 2) / (2(1 ± e^{−2|α|²}))`.
pub fn cat_orbital_parity(alpha: Complex64, branch: Parity) -> f64 {
    let overlap = (-2.0 * alpha.norm_sqr()).exp();
    let s = branch.sign();
    (2.0 * overlap + 2.0 * s) / (2.0 * (1.0 + s * overlap))
}

/// The ratio `±(1 − e^{−2|α|²})/(1 ± e^{−2|α|²})`. It equals
/// [`cat_orbital_parity`] on the odd branch only; on the even branch it is
/// `tanh|α|²`.
pub fn overlap_ratio(alpha: Complex64, branch: Parity) -> f64 {
    let overlap = (-2.0 * alpha.norm_sqr()).exp();
    let s = branch.sign();
    s * (1.0 - overlap) / (1.0 + s * overlap)
}

/// `(⟨γ⁰⟩_spinor, ⟨Π̂_x⟩_cat, product)`.
pub fn dirac_parity_expectations(spec: &DiracCatSpec, spinor: &SpinorState) -> (f64, f64, f64) {
    let spinorial = spinor.expectation(&dirac_beta());
    let orbital = cat_orbital_parity(spec.alpha, spec.parity_branch);
    (spinorial, orbital, spinorial * orbital)
}

/// `⟨Ĉ_D⟩ = γ[1 ∓ (m/E)⟨Π̂_x⟩]` on the matched cat ⊗ positive-energy spinor.
pub fn relativistic_catability_closed_form(spec: &DiracCatSpec) -> f64 {
    let m_over_e = spec.mass / spec.energy();
    let orbital = cat_orbital_parity(spec.alpha, spec.parity_branch);
    spec.gamma * (1.0 - spec.parity_branch.sign() * m_over_e * orbital)
}

/// `Ĉ_D` on `Fock ⊗ C⁴`.
pub fn dirac_witness_operator(space: &FockSpace, spec: &DiracCatSpec) -> Result<OperatorMatrix> {
    space.check_adequate(spec.alpha.norm(), "dirac witness")?;
    let quad = quadratic_operator(space, spec.alpha, 0.0).kron(&OperatorMatrix::identity(4));
    let parity = fock::parity_operator(space).kron(&dirac_beta());
    let id = OperatorMatrix::identity(space.dim() * 4);
    let penalty = &id - &parity.scale_real(spec.parity_branch.sign());
    Ok(&quad + &penalty.scale_real(spec.gamma))
}

/// Quadratic and parity-sector expectations of `Ĉ_D` on cat ⊗ u(p).
pub fn relativistic_catability_sectors(space: &FockSpace, spec: &DiracCatSpec) -> Result<(f64, f64)> {
    let state = product_state(space, spec)?;
    let quad = quadratic_operator(space, spec.alpha, 0.0).kron(&OperatorMatrix::identity(4));
    let parity = fock::parity_operator(space).kron(&dirac_beta());
    let id = OperatorMatrix::identity(space.dim() * 4);
    let penalty = &id - &parity.scale_real(spec.parity_branch.sign());
    Ok((expectation_real(&state, &quad)?, spec.gamma * expectation_real(&state, &penalty)?))
}

fn product_state(space: &FockSpace, spec: &DiracCatSpec) -> Result<fock::QuantumState> {
    let cat = cat_state(space, &CatSpec::new(spec.alpha, spec.parity_branch, 0.0))?;
    let u = positive_energy_spinor(spec.momentum, spec.mass, SPIN_UP)?;
    let psi = cat.as_vector().expect("cat states are vectors").kronecker(&u.to_vector());
    fock::QuantumState::normalized(psi)
}

/// `⟨Ĉ_D⟩` by matrix expectation on the product space.
pub fn relativistic_catability_numeric(space: &FockSpace, spec: &DiracCatSpec) -> Result<f64> {
    let state = product_state(space, spec)?;
    expectation_real(&state, &dirac_witness_operator(space, spec)?)
}

/// Smallest Fock space that holds the cat of `spec`.
pub fn dirac_space(spec: &DiracCatSpec) -> Result<FockSpace> {
    FockSpace::with_default_guard(required_cutoff(spec.alpha.norm()))
}

/// Partial sum of `m/E = Σ_k C(−½, k)(p/m)^{2k}` through `p^order`.
pub fn m_over_e_series(p: f64, m: f64, order: usize) -> Result<f64> {
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    if p.abs() >= m {
        return Err(CatError::DivergentRegime { p, m });
    }
    let x2 = (p / m).powi(2);
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 0..=order / 2 {
        sum += coeff * power;
        // C(−½, k+1) = C(−½, k)·(−½ − k)/(k + 1)
        coeff *= (-0.5 - k as f64) / (k as f64 + 1.0);
        power *= x2;
    }
    Ok(sum)
}

/// `T_rev = 4πm/ω²`.
pub fn revival_time(m: f64, omega: f64) -> f64 {
    4.0 * PI * m / (omega * omega)
}

/// `E_n = m + ω(n+½) − (ω²/2m)(n+½)²`; the last term is dropped when
/// `anharmonic` is false.
pub fn oscillator_spectrum(m: f64, omega: f64, levels: usize, anharmonic: bool) -> Vec<f64> {
    (0..levels)
        .map(|n| {
            let x = n as f64 + 0.5;
            let shift = if anharmonic { omega * omega / (2.0 * m) * x * x } else { 0.0 };
            m + omega * x - shift
        })
        .collect()
}

/// `|Σ_n p_n e^{−iE_n t}|²`.
pub fn autocorrelation(populations: &[f64], energies: &[f64], t: f64) -> f64 {
    populations
        .iter()
        .zip(energies)
        .map(|(&p, &e)| Complex64::from_polar(p, -e * t))
        .sum::<Complex64>()
        .norm_sqr()
}

/// Poisson populations of `|α⟩` on enough levels for the adequacy rule.
pub fn coherent_populations(alpha: f64) -> Vec<f64> {
    let len = required_cutoff(alpha);
    let mut p = Vec::with_capacity(len);
    let mut term = (-alpha * alpha).exp();
    for n in 0..len {
        p.push(term);
        term *= alpha * alpha / (n + 1) as f64;
    }
    let total: f64 = p.iter().sum();
    p.into_iter().map(|x| x / total).collect()
}

pub const REVIVAL_THRESHOLD: f64 = 0.9;
const COLLAPSE_THRESHOLD: f64 = 0.5;
const SAMPLES_PER_PERIOD: usize = 64;

/// Time of the revival of a coherent state `|α⟩` under the anharmonic
/// spectrum, searched in `[T_rev/2, 3T_rev/2]`.
///
/// A full revival also occurs at `T_rev/2`, the left end of the window, so
/// the search waits for the envelope (maximum over one classical period) to
/// collapse below 0.5 and returns the highest sample of the next stretch whose
/// envelope is at or above 0.9, refined by a parabola through its neighbours.
pub fn revival_detect(m: f64, omega: f64, alpha: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    if !(omega > 0.0) {
        return Err(CatError::invalid(format!("omega must be positive, got {omega}")));
    }
    let t_rev = revival_time(m, omega);
    let (start, end) = (0.5 * t_rev, 1.5 * t_rev);
    let pops = coherent_populations(alpha);
    let energies = oscillator_spectrum(m, omega, pops.len(), true);
    let dt = 2.0 * PI / omega / SAMPLES_PER_PERIOD as f64;
    let steps = ((end - start) / dt).ceil() as usize;
    let at = |k: usize| start + k as f64 * dt;
    let signal = |k: usize| autocorrelation(&pops, &energies, at(k));
    let not_found = CatError::NoRevivalFound {
        threshold: REVIVAL_THRESHOLD,
        start,
        end,
    };

    let samples: Vec<f64> = (0..=steps + SAMPLES_PER_PERIOD).map(signal).collect();
    // running max over one classical period removes the fast orbital beat
    let envelope = |k: usize| samples[k..k + SAMPLES_PER_PERIOD].iter().cloned().fold(0.0, f64::max);
    let collapse = (0..=steps).find(|&k| envelope(k) < COLLAPSE_THRESHOLD).ok_or(not_found)?;
    let not_found = || CatError::NoRevivalFound {
        threshold: REVIVAL_THRESHOLD,
        start,
        end,
    };
    let first = (collapse..=steps).find(|&k| samples[k] >= REVIVAL_THRESHOLD).ok_or_else(not_found)?;
    let mut best = first;
    let mut k = first;
    while k <= steps && envelope(k) >= REVIVAL_THRESHOLD {
        if samples[k] > samples[best] {
            best = k;
        }
        k += 1;
    }
    let (y0, y1, y2) = (signal(best.saturating_sub(1)), signal(best), signal(best + 1));
    let denom = y0 - 2.0 * y1 + y2;
    let shift = if best > 0 && denom < 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
    Ok(at(best) + shift.clamp(-1.0, 1.0) * dt)
}

/// Unitary `e^{−iHt}` factors for a Hermitian `H`, from one eigendecomposition.
struct Propagator {
    values: Vec<f64>,
    vectors: nalgebra::DMatrix<Complex64>,
}

impl Propagator {
    fn new(h: &OperatorMatrix) -> Result<Self> {
        let (values, vectors) = h.hermitian_eigen()?;
        Ok(Self { values, vectors })
    }

    fn evolve(&self, psi: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut coeffs = self.vectors.adjoint() * psi;
        for (c, &e) in coeffs.iter_mut().zip(&self.values) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        &self.vectors * coeffs
    }
}

/// `⟨ψ|α_x(t)|ψ⟩` at `t_k = k·t_max/n_samples`, `k < n_samples`, under the
/// free Dirac Hamiltonian.
pub fn zitterbewegung_signal(m: f64, p: f64, state: &SpinorState, t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if n_samples < 2 || !(t_max > 0.0) {
        return Err(CatError::invalid("need t_max > 0 and at least two samples"));
    }
    let h = free_dirac_hamiltonian(p, m)?.total().assert_hermitian()?;
    let prop = Propagator::new(&h)?;
    let ax = dirac_alpha_x();
    let psi = state.to_vector();
    let dt = t_max / n_samples as f64;
    Ok((0..n_samples)
        .map(|k| {
            let phi = prop.evolve(&psi, k as f64 * dt);
            phi.dotc(&ax.apply(&phi)).re
        })
        .collect())
}

/// Half the peak-to-peak excursion of a sampled signal.
pub fn oscillation_amplitude(signal: &[f64]) -> f64 {
    let (lo, hi) = signal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    0.5 * (hi - lo)
}

/// Angular frequency of the strongest non-DC Fourier bin; one bin is
/// `2π/t_max`.
pub fn dominant_frequency(signal: &[f64], t_max: f64) -> f64 {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let peak = (1..=n / 2).fold(1, |b, k| if buf[k].norm() > buf[b].norm() { k } else { b });
    2.0 * PI * peak as f64 / t_max
}

/// Sampling margin over Nyquist required by [`zitterbewegung_frequency`].
pub const NYQUIST_MARGIN: f64 = 4.0;

/// Dominant frequency of `⟨α_x(t)⟩` for the equal superposition of the
/// spin-up positive-energy and spin-down negative-energy eigenspinors
/// (α_x flips spin, so same-spin partners do not interfere at p = 0);
/// expected `2E`.
pub fn zitterbewegung_frequency(m: f64, p: f64, t_max: f64, n_samples: usize) -> Result<f64> {
    if n_samples < 2 || !(t_max > 0.0) {
        return Err(CatError::invalid("need t_max > 0 and at least two samples"));
    }
    let frequency = 2.0 * p.hypot(m);
    let nyquist = PI * n_samples as f64 / t_max;
    if nyquist < NYQUIST_MARGIN * frequency {
        return Err(CatError::AliasedSampling { frequency, nyquist });
    }
    let u = positive_energy_spinor(p, m, SPIN_UP)?;
    let v = negative_energy_spinor(p, m, SPIN_DOWN)?;
    let signal = zitterbewegung_signal(m, p, &u.superpose(&v)?, t_max, n_samples)?;
    Ok(dominant_frequency(&signal, t_max))
}

/// `ΔxΔp ≈ ½(1 + ⟨p²⟩/2m²)`.
pub fn relativistic_uncertainty_product(p2_expect: f64, m: f64) -> Result<f64> {
    if !(p2_expect >= 0.0) {
        return Err(CatError::invalid(format!("<p^2> must be >= 0, got {p2_expect}")));
    }
    if !(m > 0.0) {
        return Err(CatError::ZeroMass(m));
    }
    Ok(0.5 * (1.0 + p2_expect / (2.0 * m * m)))
}
