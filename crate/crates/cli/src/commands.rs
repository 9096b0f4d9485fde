use std::f64::consts::PI;

use catkit::catability::{witness_expectation_fock, xi_measure, WitnessSpec};
use catkit::channels::{
    apply_loss, apply_phase_diffusion, diffused_witness_closed_form, robustness_scan, robustness_violations,
    LossChannel, PhaseDiffusion,
};
use catkit::dirac::{
    m_over_e_series, relativistic_catability_closed_form, relativistic_catability_numeric,
    revival_detect, revival_time, DiracCatSpec,
};
use catkit::fock::{cat_state, coherent_state};
use catkit::fw::{free_dirac_hamiltonian, fw_iterate};
use catkit::spin_s::{
    make_spin_space, sector_commutators, spin_cat_expectation_closed_form, spin_cat_expectation_numeric,
    spin_cat_witness, SpinCatWitnessSpec,
};
use catkit::{CatError, CatSpec, Complex64, Parity};
use clap::{Args, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{Cell, SweepResult};
use crate::Failure;

fn parse_parity(s: &str) -> Result<Parity, String> {
    s.parse().map_err(|e: CatError| e.to_string())
}

fn core<T>(r: catkit::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::from_core)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|Δ| / max(|reference|, floor)`.
fn rel_dev(value: f64, reference: f64, floor: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(floor)
}

#[derive(Args, Debug, Clone)]
pub struct CatExpectArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value = "even", value_parser = parse_parity)]
    pub branch: Parity,
    /// Number of θ − φ values in [0, π)
    #[arg(long, default_value_t = 32)]
    pub points: usize,
}

/// Matched-parity cat against `4|α|⁴sin²(θ−φ)`.
pub fn cmd_cat_expect(a: &CatExpectArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let space = cfg.space_for(a.alpha, "cat-expect")?;
    let cat = core(cat_state(&space, &CatSpec::new(c(a.alpha), a.branch, a.theta)))?;
    let mut out = SweepResult::new(&["delta", "phi", "numeric", "analytic", "abs_dev", "rel_dev"]);
    for k in 0..a.points {
        let delta = PI * k as f64 / a.points as f64;
        let phi = a.theta - delta;
        let spec = core(WitnessSpec::new(c(a.alpha), a.gamma, a.branch, phi))?;
        let num = core(witness_expectation_fock(&space, &cat, &spec))?;
        let analytic = 4.0 * a.alpha.powi(4) * delta.sin().powi(2);
        out.push(vec![
            delta.into(),
            phi.into(),
            num.into(),
            analytic.into(),
            (num - analytic).abs().into(),
            rel_dev(num, analytic, 1.0).into(),
        ]);
    }
    out.meta("n_cut", space.n_cut());
    out.meta("rel_dev", "relative to max(|analytic|, 1)");
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct PhaseScanArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub gamma: Vec<f64>,
    #[arg(long, default_value = "even", value_parser = parse_parity)]
    pub branch: Parity,
    #[arg(long, default_value_t = 16)]
    pub points: usize,
}

/// Matched and wrong-branch witness on the same cat; their gap is `2γ`.
pub fn cmd_phase_scan(a: &PhaseScanArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let space = cfg.space_for(a.alpha, "phase-scan")?;
    let cat = core(cat_state(&space, &CatSpec::new(c(a.alpha), a.branch, a.theta)))?;
    let mut out = SweepResult::new(&["gamma", "phi", "matched", "mismatched", "offset", "offset_dev"]);
    for &gamma in &a.gamma {
        for k in 0..a.points {
            let phi = a.theta - PI * k as f64 / a.points as f64;
            let eval = |b: Parity| -> Result<f64, Failure> {
                let spec = core(WitnessSpec::new(c(a.alpha), gamma, b, phi))?;
                core(witness_expectation_fock(&space, &cat, &spec))
            };
            let matched = eval(a.branch)?;
            let mismatched = eval(a.branch.flipped())?;
            let offset = mismatched - matched;
            out.push(vec![
                gamma.into(),
                phi.into(),
                matched.into(),
                mismatched.into(),
                offset.into(),
                (offset - 2.0 * gamma).abs().into(),
            ]);
        }
    }
    out.meta("n_cut", space.n_cut());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Cat,
    Coherent,
}

#[derive(Args, Debug, Clone)]
pub struct XiArgs {
    #[arg(long, value_enum, default_value = "cat")]
    pub state: StateKind,
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    /// Parity of the prepared cat
    #[arg(long, default_value = "even", value_parser = parse_parity)]
    pub parity: Parity,
    /// Parity branch of the witness
    #[arg(long, default_value = "even", value_parser = parse_parity)]
    pub branch: Parity,
    /// Transmissivity of photon loss applied before measurement
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
}

pub fn cmd_xi(a: &XiArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let space = cfg.space_for(a.alpha, "xi")?;
    let state = match a.state {
        StateKind::Cat => core(cat_state(&space, &CatSpec::new(c(a.alpha), a.parity, 0.0)))?,
        StateKind::Coherent => core(coherent_state(&space, c(a.alpha)))?,
    };
    let state = if a.eta < 1.0 {
        core(apply_loss(&space, &state, &core(LossChannel::exact(&space, a.eta))?))?
    } else {
        state
    };
    let r = core(xi_measure(&space, &state, c(a.alpha), a.branch, &cfg.optimizer))?;
    let state_label = match a.state {
        StateKind::Cat => format!("cat_{}", a.parity.label()),
        StateKind::Coherent => "coherent".to_string(),
    };
    let mut out = SweepResult::new(&[
        "state",
        "alpha",
        "eta",
        "branch",
        "xi",
        "gamma_star",
        "numerator",
        "denominator",
        "beta_re",
        "beta_im",
        "r",
        "phi_sq",
    ]);
    let g = r.gaussian_star;
    out.push(vec![
        state_label.into(),
        a.alpha.into(),
        a.eta.into(),
        a.branch.label().into(),
        r.xi.into(),
        r.gamma_star.into(),
        r.numerator.into(),
        r.denominator.into(),
        g.beta.re.into(),
        g.beta.im.into(),
        g.r.into(),
        g.phi_sq.into(),
    ]);
    out.meta("n_cut", space.n_cut());
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct DiffusionArgs {
    #[arg(long, default_value_t = 1.2)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,10")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.3,0.8,1.5")]
    pub theta0: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub phi: f64,
    #[arg(long, default_value_t = 128)]
    pub quad_points: usize,
}

/// Even cat under phase diffusion against
/// `2|α|⁴[1 − e^{−2σ²}cos 2(θ₀ − φ)]`.
pub fn cmd_diffusion(a: &DiffusionArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let space = cfg.space_for(a.alpha, "diffusion")?;
    let cat = CatSpec::even(a.alpha);
    let spec = core(WitnessSpec::new(c(a.alpha), 1.0, Parity::Even, a.phi))?;
    let jobs: Vec<(f64, f64)> = a.sigma.iter().flat_map(|&s| a.theta0.iter().map(move |&t| (s, t))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(sigma, theta0)| {
            let diff = core(PhaseDiffusion::new(sigma, theta0, a.quad_points))?;
            let rho = core(apply_phase_diffusion(&space, &cat, &diff))?;
            core(witness_expectation_fock(&space, &rho, &spec))
        })
        .collect::<Result<_, _>>()?;
    let mut out = SweepResult::new(&["sigma", "theta0", "numeric", "analytic", "rel_dev"]);
    for (&(sigma, theta0), &num) in jobs.iter().zip(&values) {
        let analytic = diffused_witness_closed_form(a.alpha, sigma, theta0, a.phi);
        out.push(vec![
            sigma.into(),
            theta0.into(),
            num.into(),
            analytic.into(),
            rel_dev(num, analytic, 1e-300).into(),
        ]);
    }
    out.meta("n_cut", space.n_cut());
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct LossArgs {
    #[arg(long, default_value_t = 1.5)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,0.95,0.9,0.85,0.8")]
    pub eta: Vec<f64>,
}

/// ξ of both cat parities after loss. Prints a warning wherever the odd cat
/// is less robust than the even one.
pub fn cmd_loss(a: &LossArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let space = cfg.space_for(a.alpha, "loss")?;
    let rows = core(robustness_scan(&space, a.alpha, &a.eta, &[Parity::Even, Parity::Odd], &cfg.optimizer))?;
    for (eta, even, odd) in robustness_violations(&rows) {
        eprintln!("warning: at eta = {eta} the odd cat has larger xi ({odd:e}) than the even cat ({even:e})");
    }
    let mut out = SweepResult::new(&["eta", "branch", "xi", "witness_expectation"]);
    for r in rows {
        out.push(vec![r.eta.into(), r.branch.label().into(), r.xi.into(), r.witness_expectation.into()]);
    }
    out.meta("n_cut", space.n_cut());
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct FwArgs {
    #[arg(long, default_value_t = 0.2)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 3)]
    pub iters: usize,
    /// Odd-norm target for early stopping
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

/// Iterated block diagonalization of the free Dirac Hamiltonian. Running out
/// of iterations before `tol` is not an error; the table shows the norms.
pub fn cmd_fw(a: &FwArgs) -> Result<SweepResult, Failure> {
    let gh = core(free_dirac_hamiltonian(a.p, a.m))?;
    let res = match fw_iterate(&gh, a.iters, a.tol) {
        Ok(r) => r,
        Err(CatError::NoConvergence(partial)) => *partial,
        Err(e) => return Err(Failure::from_core(e)),
    };
    let energy = a.p.hypot(a.m);
    let mut spec = core(res.transformed.block_diagonal().assert_hermitian().and_then(|h| h.eigenvalues_hermitian()))?;
    spec.sort_by(f64::total_cmp);
    let eig_dev = spec
        .iter()
        .map(|&e| (e.abs() - energy).abs())
        .fold(0.0, f64::max);
    let mut out = SweepResult::new(&["iteration", "odd_norm_before", "odd_norm_after"]);
    for step in &res.generator_log {
        out.push(vec![step.iteration.into(), step.odd_norm_before.into(), step.odd_norm_after.into()]);
    }
    out.meta("n_cut", "n/a (4-component spinor)");
    out.meta("final_odd_norm", format!("{:.16e}", res.final_odd_norm()));
    out.meta("max_eigenvalue_dev", format!("{eig_dev:.16e}"));
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct DiracCatArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.5,1,3")]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5")]
    pub alpha: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Order of the m/E expansion column
    #[arg(long, default_value_t = 6)]
    pub order: usize,
}

pub fn cmd_dirac_cat(a: &DiracCatArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let mut jobs = Vec::new();
    for &p in &a.p {
        for &alpha in &a.alpha {
            for b in [Parity::Even, Parity::Odd] {
                jobs.push(core(DiracCatSpec::new(c(alpha), b, a.gamma, a.m, p, a.omega))?);
            }
        }
    }
    let amax = a.alpha.iter().cloned().fold(0.0, f64::max);
    let space = cfg.space_for(amax, "dirac-cat")?;
    let numeric: Vec<f64> = jobs
        .par_iter()
        .map(|spec| core(relativistic_catability_numeric(&space, spec)))
        .collect::<Result<_, _>>()?;
    let mut out =
        SweepResult::new(&["p", "alpha", "branch", "closed_form", "numeric", "rel_dev", "m_over_e", "m_over_e_series"]);
    for (spec, &num) in jobs.iter().zip(&numeric) {
        let closed = relativistic_catability_closed_form(spec);
        let series = match m_over_e_series(spec.momentum, spec.mass, a.order) {
            Ok(v) => Cell::Num(v),
            Err(CatError::DivergentRegime { .. }) => Cell::Text("divergent".into()),
            Err(e) => return Err(Failure::from_core(e)),
        };
        out.push(vec![
            spec.momentum.into(),
            spec.alpha.re.into(),
            spec.parity_branch.label().into(),
            closed.into(),
            num.into(),
            rel_dev(num, closed, spec.gamma).into(),
            (spec.mass / spec.energy()).into(),
            series,
        ]);
    }
    out.meta("n_cut", space.n_cut());
    out.meta("rel_dev", "relative to max(|closed_form|, gamma)");
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct RevivalArgs {
    #[arg(long, value_delimiter = ',', default_value = "30,50,80")]
    pub m: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
}

pub fn cmd_revival(a: &RevivalArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let levels = cfg.space_for(a.alpha, "revival")?.n_cut();
    let detected: Vec<f64> = a
        .m
        .par_iter()
        .map(|&m| core(revival_detect(m, a.omega, a.alpha)))
        .collect::<Result<_, _>>()?;
    let mut out = SweepResult::new(&["m", "omega", "alpha", "detected", "predicted", "rel_dev"]);
    for (&m, &t) in a.m.iter().zip(&detected) {
        let pred = revival_time(m, a.omega);
        out.push(vec![m.into(), a.omega.into(), a.alpha.into(), t.into(), pred.into(), rel_dev(t, pred, 0.0).into()]);
    }
    out.meta("n_cut", levels);
    Ok(out)
}

#[derive(Args, Debug, Clone)]
pub struct SpinCatArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    pub s: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.2)]
    pub lambda: f64,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5")]
    pub beta: Vec<f64>,
    /// Spin state cos(t)|s,s⟩ + sin(t)|s,s−1⟩
    #[arg(long, default_value_t = 0.3)]
    pub spin_angle: f64,
}

/// Spin state `cos t|s,s⟩ + sin t|s,s−1⟩` (just `|0,0⟩` for `s = 0`).
pub fn spin_probe(dim: usize, t: f64) -> DVector<Complex64> {
    let mut chi = DVector::zeros(dim);
    if dim == 1 {
        chi[0] = c(1.0);
    } else {
        chi[0] = c(t.cos());
        chi[1] = c(t.sin());
    }
    chi
}

pub fn cmd_spin_cat(a: &SpinCatArgs, cfg: &RunConfig) -> Result<SweepResult, Failure> {
    let bmax = a.beta.iter().cloned().fold(a.alpha, f64::max);
    let space = cfg.space_for(bmax, "spin-cat")?;
    let mut jobs = Vec::new();
    for &s in &a.s {
        for b in [Parity::Even, Parity::Odd] {
            jobs.push(core(SpinCatWitnessSpec::new(c(a.alpha), a.gamma, a.lambda, b, s))?);
        }
    }
    let per_spec: Vec<Vec<Vec<Cell>>> = jobs
        .par_iter()
        .map(|spec| -> Result<Vec<Vec<Cell>>, Failure> {
            let spin = core(make_spin_space(spec.s))?;
            let min_eig = core(spin_cat_witness(&space, &spin, spec).and_then(|w| w.min_eigenvalue()))?;
            let comm = core(sector_commutators(&space, &spin, spec))?.into_iter().fold(0.0, f64::max);
            let chi = spin_probe(spin.dim(), a.spin_angle);
            let pi = core(spin.parity_expectation(&chi))?;
            let bound = spec.lambda * spec.s * (spec.s + 1.0);
            a.beta
                .iter()
                .map(|&beta| {
                    let closed = core(spin_cat_expectation_closed_form(c(beta), pi, spec))?;
                    let num = core(spin_cat_expectation_numeric(&space, &spin, spec, c(beta), &chi))?;
                    Ok(vec![
                        spec.s.into(),
                        spec.parity_branch.label().into(),
                        beta.into(),
                        pi.into(),
                        closed.into(),
                        num.into(),
                        (num - closed).abs().into(),
                        min_eig.into(),
                        bound.into(),
                        comm.into(),
                    ])
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let mut out = SweepResult::new(&[
        "s",
        "branch",
        "beta",
        "pi_spin",
        "closed_form",
        "numeric",
        "abs_dev",
        "min_eigenvalue",
        "bound",
        "sector_commutator",
    ]);
    for row in per_spec.into_iter().flatten() {
        out.push(row);
    }
    out.meta("n_cut", space.n_cut());
    Ok(out)
}
