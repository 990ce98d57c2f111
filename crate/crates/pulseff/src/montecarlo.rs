//! Monte-Carlo trajectory oracle: brute-force validation of the
//! perturbative results.
//!
//! Gaussian noise trajectories with a target spectral density are
//! synthesized in the frequency domain (independent complex Gaussian
//! Fourier amplitudes with variance proportional to S(ω), Hermitian
//! symmetrized, inverse transformed), the full time-ordered dynamics is
//! propagated per trajectory, and the induced transfer matrices are
//! averaged. Per-trajectory seeds derive from the master seed as
//! `seed ⊕ index`, so results are reproducible and independent of the
//! worker count.

use crate::basis::OperatorBasis;
use crate::error::Error;
use crate::propagation::{cumulative_propagators, SegmentEigensystem};
use crate::pulse::{Item, PulseSequence};
use crate::spectrum::SpectralDensity;
use crate::{CMatrix, C64, RMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

/// Configuration for trajectory synthesis and propagation.
#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    /// Noise sample interval and maximum propagation step. Should be well
    /// below the fastest control dynamics; `simulate_process` emits a
    /// warning otherwise.
    pub dt: f64,
    /// Number of trajectories N.
    pub trajectories: usize,
    /// Master seed; trajectory i uses `seed ⊕ i`.
    pub seed: u64,
    /// Lower bound on propagation steps per segment.
    pub min_substeps: usize,
    /// Trajectory length in units of the sequence duration; padding pushes
    /// the synthesis frequency resolution below 2π/τ and reduces circular
    /// correlation artifacts.
    pub pad_factor: usize,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, trajectories: usize, seed: u64) -> Result<Self, Error> {
        if !(dt > 0.0) {
            return Err(Error::InvalidTrajectoryConfig(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if trajectories == 0 {
            return Err(Error::InvalidTrajectoryConfig(
                "need at least one trajectory".into(),
            ));
        }
        Ok(Self {
            dt,
            trajectories,
            seed,
            min_substeps: 1,
            pad_factor: 4,
        })
    }

    /// Default step τ/1000 for a sequence of duration τ.
    pub fn for_duration(tau: f64, trajectories: usize, seed: u64) -> Result<Self, Error> {
        Self::new(tau / 1000.0, trajectories, seed)
    }
}

/// One synthesized noise series, sampled at multiples of `dt`.
#[derive(Debug, Clone)]
pub struct NoiseSeries {
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl NoiseSeries {
    /// Zero-order-hold value at time t.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = ((t / self.dt) as usize).min(self.samples.len() - 1);
        self.samples[idx]
    }
}

fn synthesize_with_rng(
    spectrum: &SpectralDensity,
    duration: f64,
    cfg: &TrajectoryConfig,
    rng: &mut ChaCha8Rng,
) -> Result<NoiseSeries, Error> {
    if !(duration > 0.0) {
        return Err(Error::InvalidTrajectoryConfig(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let needed = (duration / cfg.dt).ceil() as usize + 1;
    let padded = needed * cfg.pad_factor.max(1);
    let m = padded.next_power_of_two().max(16);
    let delta_omega = 2.0 * std::f64::consts::PI / (m as f64 * cfg.dt);
    let mut coeffs = vec![C64::new(0.0, 0.0); m];
    // variance budget per bin: ⟨|c_m|²⟩/M² = S(ω_m)·Δω/2π
    let scale = (m as f64 / (2.0 * cfg.dt)).sqrt();
    let x0: f64 = rng.sample(StandardNormal);
    coeffs[0] = C64::new((m as f64 / cfg.dt).sqrt() * spectrum.evaluate(0.0).sqrt() * x0, 0.0);
    for bin in 1..m / 2 {
        let s = spectrum.evaluate(bin as f64 * delta_omega);
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let c = C64::new(x, y) * (scale * s.sqrt());
        coeffs[bin] = c;
        coeffs[m - bin] = c.conj();
    }
    let s_nyquist = spectrum.evaluate((m / 2) as f64 * delta_omega);
    let x_ny: f64 = rng.sample(StandardNormal);
    coeffs[m / 2] = C64::new((m as f64 / cfg.dt).sqrt() * s_nyquist.sqrt() * x_ny, 0.0);
    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(m);
    ifft.process(&mut coeffs);
    let samples: Vec<f64> = coeffs[..needed.min(m)]
        .iter()
        .map(|c| c.re / m as f64)
        .collect();
    Ok(NoiseSeries {
        dt: cfg.dt,
        samples,
    })
}

/// Synthesize one stationary Gaussian trajectory with PSD `S(ω)`, covering
/// `[0, duration]` at sample interval `cfg.dt`, seeded from `cfg.seed`.
pub fn synthesize_trajectory(
    spectrum: &SpectralDensity,
    duration: f64,
    cfg: &TrajectoryConfig,
) -> Result<NoiseSeries, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    synthesize_with_rng(spectrum, duration, cfg, &mut rng)
}

/// Periodogram `|FFT(b)|²·dt/M` of a series, returned as (ω, S_est) pairs
/// over the positive-frequency band.
pub fn periodogram(series: &NoiseSeries) -> Vec<(f64, f64)> {
    let m = series.samples.len();
    let mut buf: Vec<C64> = series.samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    let delta_omega = 2.0 * std::f64::consts::PI / (m as f64 * series.dt);
    (1..m / 2)
        .map(|bin| {
            (
                bin as f64 * delta_omega,
                buf[bin].norm_sqr() * series.dt / m as f64,
            )
        })
        .collect()
}

/// Result of averaging the noisy error process over trajectories.
#[derive(Debug, Clone)]
pub struct ProcessEstimate {
    /// Entrywise mean of the per-trajectory transfer matrices of the error
    /// process `Ũ = U_c† U`.
    pub mean_transfer: RMatrix,
    /// Entrywise standard error of the mean.
    pub std_error: RMatrix,
    /// Average gate fidelity `(tr T̄ + d)/(d(d+1))` of the error process.
    pub fidelity: f64,
    pub infidelity: f64,
    /// Standard error of the infidelity, from the per-trajectory spread of
    /// the transfer-matrix trace.
    pub infidelity_std_error: f64,
    pub trajectories: usize,
    pub warnings: Vec<String>,
}

struct StepPlan {
    /// (eigensystem, step, start time, steps) per segment, in item order.
    segments: Vec<(SegmentEigensystem, f64, f64, usize)>,
}

fn plan_steps(seq: &PulseSequence, cfg: &TrajectoryConfig) -> Result<StepPlan, Error> {
    let times = seq.item_times();
    let mut segments = Vec::new();
    for (j, item) in seq.items().iter().enumerate() {
        if let Item::Segment(seg) = item {
            let steps = ((seg.duration / cfg.dt).ceil() as usize).max(cfg.min_substeps);
            let step = seg.duration / steps as f64;
            segments.push((
                SegmentEigensystem::new(&seg.hamiltonian)?,
                step,
                times[j],
                steps,
            ));
        }
    }
    Ok(StepPlan { segments })
}

/// Average the noisy error process over `cfg.trajectories` realizations.
///
/// For each trajectory the Hamiltonian `H_c + Σ_α b_α(t) B_α` is applied
/// in piecewise-constant steps no longer than `cfg.dt` aligned with the
/// segment boundaries; the error propagator `Ũ = U_c† U` induces a
/// transfer matrix which is averaged entrywise. The reduction runs in a
/// fixed order, so the result is bitwise independent of the worker count.
pub fn simulate_process(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    cfg: &TrajectoryConfig,
) -> Result<ProcessEstimate, Error> {
    if basis.dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            context: "basis vs sequence",
            expected: seq.dim(),
            got: basis.dim(),
        });
    }
    let plan = plan_steps(seq, cfg)?;
    let props = cumulative_propagators(seq)?;
    let control_total = props.total().clone();
    let mut warnings = Vec::new();
    let fastest = seq
        .items()
        .iter()
        .filter_map(|i| match i {
            Item::Segment(s) => Some(
                s.hamiltonian
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max),
            ),
            Item::Gate(_) => None,
        })
        .fold(0.0, f64::max);
    if fastest * cfg.dt > 0.1 {
        warnings.push(format!(
            "dt = {} is not small against the control scale {:.3} (dt·‖H‖ = {:.3})",
            cfg.dt,
            fastest,
            fastest * cfg.dt
        ));
    }
    let n = cfg.trajectories;
    let transfers: Vec<RMatrix> = (0..n)
        .into_par_iter()
        .map(|i| run_trajectory(seq, basis, cfg, &plan, &control_total, i))
        .collect::<Result<_, _>>()?;
    let m = basis.len();
    let mut mean = RMatrix::zeros(m, m);
    for t in &transfers {
        mean += t;
    }
    mean /= n as f64;
    let mut var = RMatrix::zeros(m, m);
    for t in &transfers {
        let diff = t - &mean;
        var += diff.component_mul(&diff);
    }
    let std_error = if n > 1 {
        (var / (n - 1) as f64 / n as f64).map(f64::sqrt)
    } else {
        RMatrix::zeros(m, m)
    };
    let d = seq.dim() as f64;
    let fidelity = (mean.trace() + d) / (d * (d + 1.0));
    let traces: Vec<f64> = transfers.iter().map(|t| t.trace()).collect();
    let trace_mean = traces.iter().sum::<f64>() / n as f64;
    let trace_var = if n > 1 {
        traces
            .iter()
            .map(|t| (t - trace_mean) * (t - trace_mean))
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    let infidelity_std_error = (trace_var / n as f64).sqrt() / (d * (d + 1.0));
    Ok(ProcessEstimate {
        mean_transfer: mean,
        std_error,
        fidelity,
        infidelity: 1.0 - fidelity,
        infidelity_std_error,
        trajectories: n,
        warnings,
    })
}

fn run_trajectory(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    cfg: &TrajectoryConfig,
    plan: &StepPlan,
    control_total: &CMatrix,
    index: usize,
) -> Result<RMatrix, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ index as u64);
    let tau = seq.total_duration();
    let noise: Vec<NoiseSeries> = seq
        .channels()
        .iter()
        .map(|ch| synthesize_with_rng(&ch.spectrum, tau, cfg, &mut rng))
        .collect::<Result<_, _>>()?;
    let d = seq.dim();
    let mut u = CMatrix::identity(d, d);
    let mut seg_idx = 0usize;
    for item in seq.items() {
        match item {
            Item::Gate(g) => {
                u = &g.unitary * u;
            }
            Item::Segment(seg) => {
                let (_, step, start, steps) = &plan.segments[seg_idx];
                for s in 0..*steps {
                    let t_mid = start + (s as f64 + 0.5) * step;
                    let mut h = seg.hamiltonian.clone();
                    for (series, b) in noise.iter().zip(&seg.noise_operators) {
                        let amp = series.value_at(t_mid);
                        if amp != 0.0 {
                            h += b * C64::new(amp, 0.0);
                        }
                    }
                    let p = SegmentEigensystem::new(&h)?.propagator(*step);
                    u = p * u;
                }
                seg_idx += 1;
            }
        }
    }
    let error_prop = control_total.adjoint() * u;
    let m = basis.len();
    let mut transfer = RMatrix::zeros(m, m);
    let error_dag = error_prop.adjoint();
    for l in 0..m {
        let rotated = &error_prop * basis.element(l) * &error_dag;
        for k in 0..m {
            transfer[(k, l)] = basis.coefficient(&rotated, k).re;
        }
    }
    Ok(transfer)
}
