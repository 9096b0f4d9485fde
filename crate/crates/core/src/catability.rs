//! Catability witnesses and the normalized measure ξ.
//!
//! The phase-frame witness is
//! `Ô_φ^± = (a†² − ᾱ²e^{−2iφ})(a² − α²e^{2iφ}) + γ(1 ∓ Π̂)`.
//! ξ compares its expectation on a state with its minimum over pure
//! Gaussian states, minimized over γ.

use std::f64::consts::{PI, TAU};

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::fock::{self, expectation_real, FockSpace, OperatorMatrix, Parity, QuantumState};

/// Parameters of `Ô_φ^±(α, γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessSpec {
    pub alpha: Complex64,
    pub gamma: f64,
    pub parity_branch: Parity,
    pub phi: f64,
}

impl WitnessSpec {
    pub fn new(alpha: Complex64, gamma: f64, parity_branch: Parity, phi: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(CatError::invalid(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self {
            alpha,
            gamma,
            parity_branch,
            phi,
        })
    }

    /// `α²e^{2iφ}`, the pair eigenvalue the quadratic part is centred on.
    pub fn pair_eigenvalue(&self) -> Complex64 {
        self.alpha * self.alpha * Complex64::from_polar(1.0, 2.0 * self.phi)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.alpha, gamma, self.parity_branch, self.phi)
    }
}

/// Pure Gaussian state `D(β)Ŝ(re^{iφ_sq})|0⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub beta: Complex64,
    pub r: f64,
    pub phi_sq: f64,
}

impl GaussianParams {
    pub fn coherent(beta: Complex64) -> Self {
        Self {
            beta,
            r: 0.0,
            phi_sq: 0.0,
        }
    }

    /// Folds a signed squeezing magnitude into `r ≥ 0`, `φ_sq ∈ [0, 2π)`.
    fn canonical(beta: Complex64, r: f64, phi_sq: f64) -> Self {
        let (r, phi_sq) = if r < 0.0 { (-r, phi_sq + PI) } else { (r, phi_sq) };
        Self {
            beta,
            r,
            phi_sq: phi_sq.rem_euclid(TAU),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiResult {
    pub xi: f64,
    pub gamma_star: f64,
    pub gaussian_star: GaussianParams,
    pub numerator: f64,
    pub denominator: f64,
}

/// Settings for the Gaussian minimization and the γ search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: u64,
    pub tol: f64,
    pub r_max: f64,
    /// Displacements are searched in `|β| ≤ |α| + beta_margin`.
    pub beta_margin: f64,
    pub gamma_points: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub refine_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iters: 400,
            tol: 1e-9,
            r_max: 2.0,
            beta_margin: 3.0,
            gamma_points: 60,
            gamma_min: 1e-3,
            gamma_max: 1e3,
            refine_iters: 40,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 || self.max_iters == 0 || self.gamma_points < 2 {
            return Err(CatError::invalid("optimizer needs starts, iterations and >= 2 gamma points"));
        }
        if !(self.tol > 0.0 && self.r_max > 0.0 && self.beta_margin > 0.0) {
            return Err(CatError::invalid("optimizer tolerances and box must be positive"));
        }
        if !(self.gamma_min > 0.0 && self.gamma_max > self.gamma_min) {
            return Err(CatError::invalid("gamma range must satisfy 0 < min < max"));
        }
        Ok(())
    }

    /// Logarithmically spaced γ grid.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.gamma_min.ln(), self.gamma_max.ln());
        let steps = (self.gamma_points - 1) as f64;
        (0..self.gamma_points)
            .map(|k| (lo + (hi - lo) * k as f64 / steps).exp())
            .collect()
    }
}

/// `(a†² − ᾱ²e^{−2iφ})(a² − α²e^{2iφ})`, without the parity term.
pub fn quadratic_operator(space: &FockSpace, alpha: Complex64, phi: f64) -> OperatorMatrix {
    let (a, _, _) = fock::make_ladder(space);
    let pair = alpha * alpha * Complex64::from_polar(1.0, 2.0 * phi);
    let shifted = &(&a * &a) - &OperatorMatrix::identity(space.dim()).scale(pair);
    let op = &shifted.adjoint() * &shifted;
    op.assert_hermitian().expect("X†X is Hermitian")
}

/// `1 ∓ Π̂`.
pub fn parity_penalty(space: &FockSpace, branch: Parity) -> OperatorMatrix {
    &OperatorMatrix::identity(space.dim()) - &fock::parity_operator(space).scale_real(branch.sign())
}

pub fn witness_operator(space: &FockSpace, spec: &WitnessSpec) -> Result<OperatorMatrix> {
    space.check_adequate(spec.alpha.norm(), "witness")?;
    let quad = quadratic_operator(space, spec.alpha, spec.phi);
    Ok(&quad + &parity_penalty(space, spec.parity_branch).scale_real(spec.gamma))
}

/// `Tr(ρÔ)` by direct trace against [`witness_operator`].
pub fn witness_expectation(space: &FockSpace, state: &QuantumState, spec: &WitnessSpec) -> Result<f64> {
    expectation_real(state, &witness_operator(space, spec)?)
}

/// Quadratic and parity contributions `(⟨Q̂⟩, ⟨1 ∓ Π̂⟩)` from the Fock
/// expansion of the witness.
pub fn witness_sectors_fock(space: &FockSpace, state: &QuantumState, spec: &WitnessSpec) -> Result<(f64, f64)> {
    if state.dim() != space.dim() {
        return Err(CatError::DimensionMismatch {
            expected: space.dim(),
            found: state.dim(),
        });
    }
    let dim = space.dim();
    let element: Box<dyn Fn(usize, usize) -> Complex64 + '_> = match state {
        QuantumState::Vector(v) => Box::new(move |m, n| v[m] * v[n].conj()),
        QuantumState::Density(rho) => Box::new(move |m, n| rho[(m, n)]),
    };
    let pair = spec.pair_eigenvalue();
    let mut diagonal = 0.0;
    let mut parity = 0.0;
    let mut trace = 0.0;
    let mut lowering = Complex64::new(0.0, 0.0);
    for n in 0..dim {
        let p = element(n, n).re;
        let nf = n as f64;
        diagonal += nf * (nf - 1.0) * p;
        parity += if n % 2 == 0 { p } else { -p };
        trace += p;
        if n >= 2 {
            lowering += element(n, n - 2) * (nf * (nf - 1.0)).sqrt();
        }
    }
    // Tr(ρa²) = Σ √(n(n−1)) ρ_{n,n−2}; Tr(ρa†²) is its conjugate.
    let cross = -2.0 * (pair.conj() * lowering).re;
    let quadratic = diagonal + cross + pair.norm_sqr() * trace;
    let penalty = trace - spec.parity_branch.sign() * parity;
    Ok((quadratic, penalty))
}

/// Witness expectation from the explicit Fock-basis sums: diagonal
/// `n(n−1)`, the two `ρ_{n,n±2}` coherence sums, `|α|⁴` and parity.
pub fn witness_expectation_fock(space: &FockSpace, state: &QuantumState, spec: &WitnessSpec) -> Result<f64> {
    let (q, p) = witness_sectors_fock(space, state, spec)?;
    Ok(q + spec.gamma * p)
}

/// `‖R(χ)Ô_φR†(χ) − Ô_{φ+χ}‖_max` on the guarded subspace.
pub fn phase_covariance_residual(space: &FockSpace, spec: &WitnessSpec, chi: f64) -> Result<f64> {
    let rot = fock::phase_rotation(space, chi);
    let moved = witness_operator(space, spec)?.conjugate_by(&rot);
    let target = witness_operator(space, &WitnessSpec { phi: spec.phi + chi, ..*spec })?;
    Ok((&moved - &target).block_max_norm(space.guarded_dim()))
}

/// Truncated `D(β)Ŝ(re^{iφ_sq})|0⟩`, built from the annihilator recurrence
/// `cosh r √(n+1) c_{n+1} = (β cosh r − e^{iφ}β̄ sinh r) c_n + e^{iφ} sinh r √n c_{n−1}`.
///
/// Fails if more than 1e-10 of the probability lies beyond the cutoff.
pub fn gaussian_state(space: &FockSpace, params: &GaussianParams) -> Result<QuantumState> {
    space.check_adequate(params.beta.norm(), "gaussian state")?;
    let dim = space.dim();
    let len = (4 * dim).max(dim + 256);
    let amps = gaussian_amplitudes(params, len);
    let total = amps.norm_squared();
    let inside: f64 = amps.rows(0, dim).norm_squared();
    let tail = 1.0 - inside / total;
    if !(tail <= 1e-10) {
        let required = (0..len)
            .scan(0.0, |acc, k| {
                *acc += amps[k].norm_sqr();
                Some((k, *acc))
            })
            .find(|&(_, acc)| 1.0 - acc / total <= 1e-10)
            .map_or(len, |(k, _)| k + 1);
        return Err(CatError::Truncation {
            what: format!("gaussian state (|beta| = {}, r = {})", params.beta.norm(), params.r),
            required,
            available: dim,
        });
    }
    QuantumState::normalized(amps.rows(0, dim).clone_owned())
}

fn gaussian_amplitudes(params: &GaussianParams, len: usize) -> DVector<Complex64> {
    let (ch, sh) = (params.r.cosh(), params.r.sinh());
    let e = Complex64::from_polar(1.0, params.phi_sq);
    let drive = params.beta * ch - params.beta.conj() * e * sh;
    let mut c = DVector::<Complex64>::zeros(len);
    c[0] = Complex64::new(1.0, 0.0);
    for n in 0..len - 1 {
        let prev = if n > 0 { c[n - 1] * (n as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
        c[n + 1] = (drive * c[n] + e * sh * prev) / (ch * ((n + 1) as f64).sqrt());
    }
    c
}

/// Closed-form `(⟨Q̂⟩, ⟨1 ∓ Π̂⟩)` on a pure Gaussian state.
///
/// With `M = e^{iφ_sq} sinh r cosh r`, `N = sinh² r` and `A = α²e^{2iφ}`:
/// `⟨Q̂⟩ = |β² + M − A|² + 4|β|²N + 2N²` and
/// `⟨Π̂⟩ = exp(−2|β cosh r − β̄ e^{iφ_sq} sinh r|²)`.
pub fn gaussian_sectors(spec: &WitnessSpec, g: &GaussianParams) -> (f64, f64) {
    let (ch, sh) = (g.r.cosh(), g.r.sinh());
    let e = Complex64::from_polar(1.0, g.phi_sq);
    let m = e * sh * ch;
    let n = sh * sh;
    let b2 = g.beta.norm_sqr();
    let quadratic = (g.beta * g.beta + m - spec.pair_eigenvalue()).norm_sqr() + 4.0 * b2 * n + 2.0 * n * n;
    let w = g.beta * ch - g.beta.conj() * e * sh;
    let parity = (-2.0 * w.norm_sqr()).exp();
    (quadratic, 1.0 - spec.parity_branch.sign() * parity)
}

/// `Tr[Ô ρ_G]` for the pure Gaussian state `g`.
pub fn gaussian_objective(spec: &WitnessSpec, g: &GaussianParams) -> f64 {
    let (q, p) = gaussian_sectors(spec, g);
    q + spec.gamma * p
}

struct GaussianCost {
    spec: WitnessSpec,
    beta_max: f64,
    r_max: f64,
}

impl GaussianCost {
    /// Maps simplex coordinates `(|β|, arg β, r, φ_sq)` into the search box,
    /// returning the clamped point and the squared distance clamped away.
    fn project(&self, x: &[f64]) -> (GaussianParams, f64) {
        let b = x[0].clamp(-self.beta_max, self.beta_max);
        let r = x[2].clamp(-self.r_max, self.r_max);
        let excess = (x[0] - b).powi(2) + (x[2] - r).powi(2);
        let beta = Complex64::from_polar(b, x[1]);
        (GaussianParams::canonical(beta, r, x[3]), excess)
    }
}

impl CostFunction for GaussianCost {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> std::result::Result<f64, ArgminError> {
        let (g, excess) = self.project(x);
        Ok(gaussian_objective(&self.spec, &g) + excess)
    }
}

/// Deterministic simplex seeds on a `(|β|, arg β, r)` grid, with the
/// squeezing angle aligned to the pair eigenvalue.
fn seeds(spec: &WitnessSpec, count: usize) -> Vec<[f64; 4]> {
    let amp = spec.alpha.norm();
    let arg = spec.alpha.arg() + spec.phi;
    let phi_sq = 2.0 * arg;
    let mut grid = Vec::new();
    for &r in &[0.05, 0.5, 1.0] {
        for &b in &[amp, 0.3 * amp + 0.1, amp + 1.0] {
            for &t in &[arg, arg + PI / 2.0] {
                grid.push([b, t, r, phi_sq]);
            }
        }
    }
    // Spread the requested number of starts evenly across the grid.
    let n = grid.len();
    (0..count).map(|k| grid[(k * n / count.max(1)) % n]).collect()
}

fn run_simplex(
    cost: &GaussianCost,
    start: [f64; 4],
    steps: [f64; 4],
    tol: f64,
    cfg: &OptimizerConfig,
) -> Option<(f64, GaussianParams)> {
    let mut simplex = vec![start.to_vec()];
    for (i, step) in steps.iter().enumerate() {
        let mut v = start.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(tol).ok()?;
    let inner = GaussianCost { ..*cost };
    let res = Executor::new(inner, solver)
        .configure(|state| state.max_iters(cfg.max_iters))
        .run()
        .ok()?;
    let best = res.state().get_best_param()?.clone();
    let (g, _) = cost.project(&best);
    let value = gaussian_objective(&cost.spec, &g);
    value.is_finite().then_some((value, g))
}

/// Minimum of `Tr[Ô ρ_G]` over pure Gaussian states by multi-start
/// Nelder–Mead on the closed-form objective.
pub fn gaussian_minimum(spec: &WitnessSpec, cfg: &OptimizerConfig) -> Result<(f64, GaussianParams)> {
    cfg.validate()?;
    let cost = GaussianCost {
        spec: *spec,
        beta_max: spec.alpha.norm() + cfg.beta_margin,
        r_max: cfg.r_max,
    };
    let results: Vec<Option<(f64, GaussianParams)>> = seeds(spec, cfg.starts)
        .into_par_iter()
        .map(|s| run_simplex(&cost, s, [0.3, 0.5, 0.2, 0.6], cfg.tol, cfg))
        .collect();
    // First strict minimum wins, so the choice is independent of scheduling.
    let best = results
        .into_iter()
        .flatten()
        .fold(None, |best: Option<(f64, GaussianParams)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        })
        .ok_or_else(|| CatError::OptimizationFailure("every simplex start diverged".into()))?;
    // A small restart around the winner settles minima the coarse simplex
    // stopped short of.
    let g = best.1;
    let start = [g.beta.norm(), g.beta.arg(), g.r, g.phi_sq];
    let polished = run_simplex(&cost, start, [1e-2; 4], cfg.tol * 1e-6, cfg);
    Ok(match polished {
        Some(p) if p.0 < best.0 => p,
        _ => best,
    })
}

/// Brute-force minimum of the Gaussian objective on a uniform
/// `points⁴` grid over `|β| ≤ beta_max`, `r ≤ r_max` and both angles.
pub fn gaussian_grid_minimum(spec: &WitnessSpec, points: usize, beta_max: f64, r_max: f64) -> (f64, GaussianParams) {
    let step = |k: usize, hi: f64| hi * k as f64 / (points - 1) as f64;
    let angle = |k: usize| TAU * k as f64 / points as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, GaussianParams::coherent(Complex64::new(0.0, 0.0)));
            for j in 0..points {
                let beta = Complex64::from_polar(step(i, beta_max), angle(j));
                for k in 0..points {
                    for l in 0..points {
                        let g = GaussianParams {
                            beta,
                            r: step(k, r_max),
                            phi_sq: angle(l),
                        };
                        let v = gaussian_objective(spec, &g);
                        if v < best.0 {
                            best = (v, g);
                        }
                    }
                }
            }
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, GaussianParams::coherent(Complex64::new(0.0, 0.0))), |a, b| {
            if b.0 < a.0 {
                b
            } else {
                a
            }
        })
}

struct GammaPoint {
    gamma: f64,
    ratio: f64,
    numerator: f64,
    denominator: f64,
    gaussian: GaussianParams,
}

fn gamma_point(base: &WitnessSpec, sectors: (f64, f64), gamma: f64, cfg: &OptimizerConfig) -> Result<GammaPoint> {
    let spec = base.with_gamma(gamma)?;
    let (denominator, gaussian) = gaussian_minimum(&spec, cfg)?;
    if denominator < 1e-14 {
        return Err(CatError::DegenerateDenominator(denominator));
    }
    // Round-off can leave an exact kernel state a hair below zero.
    let numerator = (sectors.0 + gamma * sectors.1).max(0.0);
    Ok(GammaPoint {
        gamma,
        ratio: numerator / denominator,
        numerator,
        denominator,
        gaussian,
    })
}

/// `ξ^±(α) = min_γ Tr[Ô ρ] / min_G Tr[Ô ρ_G]` for the witness centred on
/// `alpha` in phase frame `φ = 0`.
///
/// The γ minimum is taken over a log grid and then refined by golden-section
/// search in `ln γ` around the best grid point.
pub fn xi_measure(
    space: &FockSpace,
    state: &QuantumState,
    alpha: Complex64,
    branch: Parity,
    cfg: &OptimizerConfig,
) -> Result<XiResult> {
    cfg.validate()?;
    let base = WitnessSpec::new(alpha, 1.0, branch, 0.0)?;
    space.check_adequate(alpha.norm(), "xi witness")?;
    let sectors = witness_sectors_fock(space, state, &base)?;
    let grid = cfg.gamma_grid();
    let points: Vec<GammaPoint> = grid
        .par_iter()
        .map(|&g| gamma_point(&base, sectors, g, cfg))
        .collect::<Result<_>>()?;
    let best_idx = (0..points.len()).fold(0, |b, k| if points[k].ratio < points[b].ratio { k } else { b });

    let lo = grid[best_idx.saturating_sub(1)].ln();
    let hi = grid[(best_idx + 1).min(grid.len() - 1)].ln();
    let refined = golden_section(lo, hi, cfg.refine_iters, |x| gamma_point(&base, sectors, x.exp(), cfg))?;
    let best = match refined {
        Some(p) if p.ratio < points[best_idx].ratio => p,
        _ => points.into_iter().nth(best_idx).expect("index in range"),
    };
    Ok(XiResult {
        xi: best.ratio,
        gamma_star: best.gamma,
        gaussian_star: best.gaussian,
        numerator: best.numerator,
        denominator: best.denominator,
    })
}

fn golden_section<F>(mut lo: f64, mut hi: f64, iters: usize, f: F) -> Result<Option<GammaPoint>>
where
    F: Fn(f64) -> Result<GammaPoint>,
{
    if iters == 0 || hi <= lo {
        return Ok(None);
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1.ratio <= f2.ratio {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(Some(if f1.ratio <= f2.ratio { f1 } else { f2 }))
}
