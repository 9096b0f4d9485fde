//! Photon loss and phase diffusion, and catability under them.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catability::{witness_expectation_fock, xi_measure, OptimizerConfig, WitnessSpec};
use crate::error::{CatError, Result};
use crate::fock::{cat_state, CatSpec, FockSpace, OperatorMatrix, Parity, QuantumState};

/// Completeness residual above which [`apply_loss`] refuses to run.
pub const KRAUS_TOL: f64 = 1e-8;

/// Pure-loss channel with transmissivity `eta`, Kraus operators
/// `K_k = √((1−η)^k/k!) η^{n̂/2} a^k` for `k < kraus_cut`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossChannel {
    pub eta: f64,
    pub kraus_cut: usize,
}

impl LossChannel {
    pub fn new(eta: f64, kraus_cut: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CatError::invalid(format!("eta must lie in (0, 1], got {eta}")));
        }
        if kraus_cut == 0 {
            return Err(CatError::invalid("kraus_cut must be positive"));
        }
        Ok(Self { eta, kraus_cut })
    }

    /// Exact channel on the truncated space (`kraus_cut = n_cut`).
    pub fn exact(space: &FockSpace, eta: f64) -> Result<Self> {
        Self::new(eta, space.n_cut())
    }

    pub fn kraus_operators(&self, space: &FockSpace) -> Vec<OperatorMatrix> {
        let dim = space.dim();
        let ln_fact: Vec<f64> = std::iter::once(0.0)
            .chain((1..=dim).scan(0.0, |acc, k| {
                *acc += (k as f64).ln();
                Some(*acc)
            }))
            .collect();
        let loss = 1.0 - self.eta;
        (0..self.kraus_cut.min(dim))
            .map(|k| {
                let mut m = DMatrix::<Complex64>::zeros(dim, dim);
                for n in k..dim {
                    // ⟨n−k|K_k|n⟩ = √(C(n,k) (1−η)^k η^{n−k})
                    let binom = (ln_fact[n] - ln_fact[k] - ln_fact[n - k]).exp();
                    let amp = (binom * loss.powi(k as i32) * self.eta.powi((n - k) as i32)).sqrt();
                    m[(n - k, n)] = Complex64::new(amp, 0.0);
                }
                OperatorMatrix::new(m)
            })
            .collect()
    }

    /// `‖Σ K_k†K_k − I‖_max` over the whole truncated space.
    pub fn completeness_residual(&self, space: &FockSpace) -> f64 {
        let dim = space.dim();
        let sum = self
            .kraus_operators(space)
            .iter()
            .fold(DMatrix::<Complex64>::zeros(dim, dim), |acc, k| acc + k.entries().adjoint() * k.entries());
        (sum - DMatrix::<Complex64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `Σ_k K_k ρ K_k†`.
pub fn apply_loss(space: &FockSpace, state: &QuantumState, channel: &LossChannel) -> Result<QuantumState> {
    if state.dim() != space.dim() {
        return Err(CatError::DimensionMismatch {
            expected: space.dim(),
            found: state.dim(),
        });
    }
    let residual = channel.completeness_residual(space);
    if residual > KRAUS_TOL {
        return Err(CatError::KrausIncomplete(residual));
    }
    let rho = state.density_matrix();
    let terms: Vec<DMatrix<Complex64>> = channel
        .kraus_operators(space)
        .par_iter()
        .map(|k| k.entries() * &rho * k.entries().adjoint())
        .collect();
    let dim = space.dim();
    let out = terms.into_iter().fold(DMatrix::zeros(dim, dim), |acc, t| acc + t);
    Ok(QuantumState::density_unchecked(hermitize(out)))
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random phase kicks with a wrapped-Gaussian distribution of width `sigma`
/// about `theta0`, integrated by the trapezoid rule on `quad_points` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiffusion {
    pub sigma: f64,
    pub theta0: f64,
    pub quad_points: usize,
}

/// Fewest quadrature nodes accepted.
pub const MIN_QUAD_POINTS: usize = 64;

/// Tolerance on the witness change when the node count is doubled.
pub const QUAD_TOL: f64 = 1e-8;

impl PhaseDiffusion {
    pub fn new(sigma: f64, theta0: f64, quad_points: usize) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(CatError::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        if quad_points < MIN_QUAD_POINTS {
            return Err(CatError::invalid(format!(
                "quad_points must be >= {MIN_QUAD_POINTS}, got {quad_points}"
            )));
        }
        Ok(Self {
            sigma,
            theta0,
            quad_points,
        })
    }

    /// Offsets `2πj/N` from `theta0` and their normalized weights.
    ///
    /// The wrapped Gaussian keeps images within 6σ; for σ > 5 the weight is
    /// uniform.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let n = self.quad_points;
        let offsets: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
        let raw: Vec<f64> = if self.sigma > 5.0 {
            vec![1.0; n]
        } else {
            offsets.iter().map(|&d| self.wrapped_gaussian(d)).collect()
        };
        let total: f64 = raw.iter().sum();
        let raw = if total > 0.0 {
            raw
        } else {
            // Narrower than the node spacing: all weight on the mean.
            (0..n).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect()
        };
        let total: f64 = raw.iter().sum();
        offsets.into_iter().zip(raw.into_iter().map(|w| w / total)).collect()
    }

    fn wrapped_gaussian(&self, offset: f64) -> f64 {
        let s = self.sigma;
        if s == 0.0 {
            return if offset == 0.0 { 1.0 } else { 0.0 };
        }
        let d = (offset + PI).rem_euclid(TAU) - PI;
        let reach = 6.0 * s;
        let images = (reach / TAU).ceil() as i64 + 1;
        (-images..=images)
            .map(|k| d + TAU * k as f64)
            .filter(|x| x.abs() <= reach)
            .map(|x| (-x * x / (2.0 * s * s)).exp())
            .sum()
    }

    /// `Σ_j w_j e^{i d δ_j}` for each photon-number difference `d`.
    fn phase_factors(&self, max_diff: usize) -> Vec<Complex64> {
        let nodes = self.nodes();
        (0..=max_diff)
            .map(|d| {
                nodes
                    .iter()
                    .map(|&(delta, w)| Complex64::from_polar(w, d as f64 * delta))
                    .sum()
            })
            .collect()
    }

    pub fn doubled(&self) -> Self {
        Self {
            quad_points: 2 * self.quad_points,
            ..*self
        }
    }
}

/// Averages `R(δ)ρR†(δ)` over the diffusion offsets: `ρ_mn ↦ ρ_mn Σ_j w_j e^{i(m−n)δ_j}`.
pub fn dephase(state: &QuantumState, diff: &PhaseDiffusion) -> QuantumState {
    let dim = state.dim();
    let factors = diff.phase_factors(dim);
    let rho = state.density_matrix();
    let out = DMatrix::from_fn(dim, dim, |m, n| {
        let f = if m >= n { factors[m - n] } else { factors[n - m].conj() };
        rho[(m, n)] * f
    });
    QuantumState::density_unchecked(hermitize(out))
}

fn diffuse_unchecked(space: &FockSpace, cat: &CatSpec, diff: &PhaseDiffusion) -> Result<QuantumState> {
    let centred = CatSpec {
        theta: diff.theta0,
        ..*cat
    };
    let pure = cat_state(space, &centred)?;
    Ok(dephase(&pure, diff))
}

/// `ρ = ∫dθ P(θ)|ψ_θ⟩⟨ψ_θ|` for the cat with amplitude and parity of `cat`;
/// the phase is distributed about `diff.theta0` and `cat.theta` is ignored.
///
/// Errors with [`CatError::QuadratureUnderresolved`] if doubling the node
/// count moves the witness (`γ = 1`, both branches, φ ∈ {θ₀, θ₀ + π/4}) by
/// more than [`QUAD_TOL`].
pub fn apply_phase_diffusion(space: &FockSpace, cat: &CatSpec, diff: &PhaseDiffusion) -> Result<QuantumState> {
    let rho = diffuse_unchecked(space, cat, diff)?;
    let fine = diffuse_unchecked(space, cat, &diff.doubled())?;
    let mut worst: f64 = 0.0;
    for branch in [Parity::Even, Parity::Odd] {
        for phi in [diff.theta0, diff.theta0 + PI / 4.0] {
            let spec = WitnessSpec::new(cat.alpha, 1.0, branch, phi)?;
            let a = witness_expectation_fock(space, &rho, &spec)?;
            let b = witness_expectation_fock(space, &fine, &spec)?;
            worst = worst.max((a - b).abs());
        }
    }
    if worst > QUAD_TOL {
        return Err(CatError::QuadratureUnderresolved(worst));
    }
    Ok(rho)
}

/// Closed-form diffused witness `2|α|⁴[1 − e^{−2σ²}cos 2(θ₀ − φ)]` on the
/// matched branch.
pub fn diffused_witness_closed_form(alpha: f64, sigma: f64, theta0: f64, phi: f64) -> f64 {
    2.0 * alpha.powi(4) * (1.0 - (-2.0 * sigma * sigma).exp() * (2.0 * (theta0 - phi)).cos())
}

/// ξ and the optimal witness expectation for one loss level and branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub eta: f64,
    pub branch: Parity,
    pub xi: f64,
    pub witness_expectation: f64,
}

/// ξ of the lossy cat `|α⟩ ± |−α⟩` against its own-branch witness for each
/// `eta`. Rows are sorted by η, even before odd.
pub fn robustness_scan(
    space: &FockSpace,
    alpha: f64,
    eta_grid: &[f64],
    branches: &[Parity],
    cfg: &OptimizerConfig,
) -> Result<Vec<RobustnessRow>> {
    if eta_grid.is_empty() || branches.is_empty() {
        return Err(CatError::invalid("robustness scan needs at least one eta and one branch"));
    }
    let mut etas = eta_grid.to_vec();
    etas.sort_by(f64::total_cmp);
    let mut branches = branches.to_vec();
    branches.sort_by_key(|b| b.sign() < 0.0);
    branches.dedup();
    let jobs: Vec<(f64, Parity)> = etas
        .iter()
        .flat_map(|&eta| branches.iter().map(move |&b| (eta, b)))
        .collect();
    let alpha_c = Complex64::new(alpha, 0.0);
    jobs.par_iter()
        .map(|&(eta, branch)| {
            let cat = cat_state(space, &CatSpec::new(alpha_c, branch, 0.0))?;
            let lossy = apply_loss(space, &cat, &LossChannel::exact(space, eta)?)?;
            let res = xi_measure(space, &lossy, alpha_c, branch, cfg)?;
            Ok(RobustnessRow {
                eta,
                branch,
                xi: res.xi,
                witness_expectation: res.numerator,
            })
        })
        .collect()
}

/// Loss levels at which the odd branch is *less* robust than the even one
/// (`ξ_odd > ξ_even`), as `(η, ξ_even, ξ_odd)`.
pub fn robustness_violations(rows: &[RobustnessRow]) -> Vec<(f64, f64, f64)> {
    rows.iter()
        .filter(|r| r.branch == Parity::Even)
        .filter_map(|even| {
            rows.iter()
                .find(|r| r.branch == Parity::Odd && r.eta == even.eta)
                .filter(|odd| odd.xi > even.xi)
                .map(|odd| (even.eta, even.xi, odd.xi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, expectation_real, parity_operator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn channel_validation() {
        assert!(LossChannel::new(0.0, 4).is_err());
        assert!(LossChannel::new(1.2, 4).is_err());
        assert!(LossChannel::new(0.5, 0).is_err());
        assert!(PhaseDiffusion::new(0.1, 0.0, 32).is_err());
    }

    #[test]
    fn unit_transmissivity_is_identity() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let cat = cat_state(&space, &CatSpec::even(1.5)).unwrap();
        let out = apply_loss(&space, &cat, &LossChannel::exact(&space, 1.0).unwrap()).unwrap();
        let diff = out.density_matrix() - cat.density_matrix();
        assert!(diff.iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn coherent_state_stays_coherent() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let beta = c(1.2, 0.5);
        let eta: f64 = 0.7;
        let out = apply_loss(&space, &coherent_state(&space, beta).unwrap(), &LossChannel::exact(&space, eta).unwrap())
            .unwrap();
        let target = coherent_state(&space, beta * eta.sqrt()).unwrap();
        assert!(out.fidelity_with_pure(target.as_vector().unwrap()).unwrap() >= 1.0 - 1e-8);
    }

    #[test]
    fn loss_shrinks_cat_parity() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let cat = cat_state(&space, &CatSpec::even(1.5)).unwrap();
        let out = apply_loss(&space, &cat, &LossChannel::exact(&space, 0.9).unwrap()).unwrap();
        let p = expectation_real(&out, &parity_operator(&space)).unwrap();
        assert!(p.abs() < 1.0 - 1e-3);
        assert!((out.trace() - 1.0).abs() <= 1e-10);
        assert!(out.min_eigenvalue().unwrap() >= -1e-9);
    }

    #[test]
    fn short_kraus_set_is_rejected() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let cat = cat_state(&space, &CatSpec::even(1.5)).unwrap();
        let r = apply_loss(&space, &cat, &LossChannel::new(0.5, 3).unwrap());
        assert!(matches!(r, Err(CatError::KrausIncomplete(_))));
    }

    #[test]
    fn narrow_diffusion_is_pure() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let cat = CatSpec::even(1.0);
        let diff = PhaseDiffusion::new(1e-6, 0.0, 64).unwrap();
        let rho = apply_phase_diffusion(&space, &cat, &diff).unwrap();
        let pure = cat_state(&space, &cat).unwrap();
        assert!(rho.fidelity_with_pure(pure.as_vector().unwrap()).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn diffused_witness_value() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let diff = PhaseDiffusion::new(0.5, 0.0, 64).unwrap();
        let rho = apply_phase_diffusion(&space, &CatSpec::even(1.0), &diff).unwrap();
        let spec = WitnessSpec::new(c(1.0, 0.0), 1.0, Parity::Even, 0.0).unwrap();
        let v = witness_expectation_fock(&space, &rho, &spec).unwrap();
        assert!((v - diffused_witness_closed_form(1.0, 0.5, 0.0, 0.0)).abs() < 1e-8, "{v}");
        assert!((diffused_witness_closed_form(1.0, 0.5, 0.0, 0.0) - 0.786_938_680_574_733).abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coarse_quadrature_is_detected() {
        let space = FockSpace::with_default_guard(40).unwrap();
        let diff = PhaseDiffusion::new(0.03, 0.0, 64).unwrap();
        let r = apply_phase_diffusion(&space, &CatSpec::even(1.0), &diff);
        assert!(matches!(r, Err(CatError::QuadratureUnderresolved(_))));
    }

    #[test]
    fn violations_compare_matching_eta() {
        let row = |eta, branch, xi| RobustnessRow {
            eta,
            branch,
            xi,
            witness_expectation: 0.0,
        };
        let rows = [
            row(0.8, Parity::Even, 0.5),
            row(0.8, Parity::Odd, 0.6),
            row(0.9, Parity::Even, 0.4),
            row(0.9, Parity::Odd, 0.3),
        ];
        assert_eq!(robustness_violations(&rows), vec![(0.8, 0.5, 0.6)]);
    }
}
