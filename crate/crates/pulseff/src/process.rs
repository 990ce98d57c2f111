//! Decay amplitudes, the first-order averaged process map, fidelities, and
//! correlation infidelities.
//!
//! The frequency route integrates spectrum-weighted generalized filter
//! functions by the trapezoid rule on the control matrix's grid, folding
//! the two-sided integral onto ω > 0. The time route evaluates the double
//! time integral directly and exists to cross-validate the frequency route
//! (a Parseval check for white noise). The process map keeps first-order
//! Magnus terms only and therefore describes the average process up to a
//! unitary rotation.

use crate::basis::OperatorBasis;
use crate::control_matrix::{control_matrix_time_with, ControlMatrix};
use crate::error::Error;
use crate::filter_functions::CorrelationFF;
use crate::propagation::cumulative_propagators;
use crate::pulse::{Item, PulseSequence};
use crate::spectrum::SpectralDensity;
use crate::{CMatrix, C64, RMatrix};

/// Quadrature coverage diagnostics for one channel.
#[derive(Debug, Clone)]
pub struct ChannelQuadratureDiagnostics {
    pub label: String,
    /// Share of `∫ S·F_α dω` contributed by the grid's last decade. A large
    /// share means the grid is truncated too early.
    pub tail_share: f64,
    /// Estimated share lost below the grid's first point, from the level
    /// of the integrand there.
    pub head_share_estimate: f64,
}

/// Per-channel decay-amplitude matrices Γ_α.
#[derive(Debug, Clone)]
pub struct DecayAmplitudes {
    pub channels: Vec<String>,
    /// Real symmetric d²×d² matrix per channel.
    pub gammas: Vec<RMatrix>,
    pub diagnostics: Vec<ChannelQuadratureDiagnostics>,
}

impl DecayAmplitudes {
    /// Σ_α tr(Γ_α).
    pub fn total_trace(&self) -> f64 {
        self.gammas.iter().map(|g| g.trace()).sum()
    }
}

/// Trapezoid weights for an arbitrary ascending grid.
fn trapezoid_weights(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (values[i] - values[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

/// Decay amplitudes in the frequency domain:
/// `Γ_{α,kl} = (1/π) ∫_0^∞ dω S_α(ω) Re[B̃*_{αk}(ω) B̃_{αl}(ω)]`.
///
/// `spectra` is index-aligned with the control matrix's channels.
pub fn decay_amplitudes_freq(
    cm: &ControlMatrix,
    spectra: &[SpectralDensity],
) -> Result<DecayAmplitudes, Error> {
    if spectra.len() != cm.num_channels() {
        return Err(Error::DimensionMismatch {
            context: "spectra vs channels",
            expected: cm.num_channels(),
            got: spectra.len(),
        });
    }
    let m = cm.num_basis_elements();
    let omegas = cm.grid().values();
    let weights = trapezoid_weights(omegas);
    let last_decade_start = cm.grid().max() / 10.0;
    let mut gammas = Vec::with_capacity(spectra.len());
    let mut diagnostics = Vec::with_capacity(spectra.len());
    for (alpha, spectrum) in spectra.iter().enumerate() {
        let b = cm.channel_values(alpha);
        let mut gamma = RMatrix::zeros(m, m);
        let mut total_weight_integral = 0.0;
        let mut tail_integral = 0.0;
        let mut head_level = 0.0;
        for (f, (&omega, &w)) in omegas.iter().zip(&weights).enumerate() {
            let s = spectrum.evaluate(omega);
            if s == 0.0 {
                continue;
            }
            let u = w * s / std::f64::consts::PI;
            let col = b.column(f);
            let mut col_norm2 = 0.0;
            for k in 0..m {
                let bk = col[k];
                col_norm2 += bk.norm_sqr();
                // symmetric update saves half the products
                gamma[(k, k)] += u * bk.norm_sqr();
                for l in (k + 1)..m {
                    let re = (bk.conj() * col[l]).re;
                    gamma[(k, l)] += u * re;
                    gamma[(l, k)] += u * re;
                }
            }
            let contribution = u * col_norm2;
            total_weight_integral += contribution;
            if omega >= last_decade_start {
                tail_integral += contribution;
            }
            if f == 0 {
                head_level = s * col_norm2 * omega / std::f64::consts::PI;
            }
        }
        let tail_share = if total_weight_integral > 0.0 {
            tail_integral / total_weight_integral
        } else {
            0.0
        };
        let head_share_estimate = if total_weight_integral > 0.0 {
            head_level / total_weight_integral
        } else {
            0.0
        };
        diagnostics.push(ChannelQuadratureDiagnostics {
            label: cm.channel_labels()[alpha].clone(),
            tail_share,
            head_share_estimate,
        });
        gammas.push(gamma);
    }
    Ok(DecayAmplitudes {
        channels: cm.channel_labels().to_vec(),
        gammas,
        diagnostics,
    })
}

/// Noise autocorrelation `⟨b(t₁)b(t₂)⟩` as a function of `t₁ − t₂`.
pub enum Autocorrelation<'a> {
    /// White noise `S0·δ(t₁ − t₂)`; collapses the double integral.
    WhiteDelta { s0: f64 },
    /// Arbitrary stationary autocorrelation, integrated numerically.
    Stationary(&'a dyn Fn(f64) -> f64),
}

/// Decay amplitudes from the time-domain double integral
/// `Γ_{α,kl} = ∫∫ dt₁ dt₂ ⟨b(t₁)b(t₂)⟩ B̃_{αk}(t₁) B̃_{αl}(t₂)`.
///
/// Composite Simpson quadrature per segment (the integrand is smooth
/// inside segments and may jump at their edges). Primarily a
/// cross-validation oracle for [`decay_amplitudes_freq`].
pub fn decay_amplitudes_time(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    autocorrelations: &[Autocorrelation<'_>],
) -> Result<DecayAmplitudes, Error> {
    if autocorrelations.len() != seq.channels().len() {
        return Err(Error::DimensionMismatch {
            context: "autocorrelations vs channels",
            expected: seq.channels().len(),
            got: autocorrelations.len(),
        });
    }
    let props = cumulative_propagators(seq)?;
    let m = basis.len();
    // Simpson nodes per segment, shared by both integration variables
    const NODES_PER_SEGMENT: usize = 400; // even
    let mut nodes: Vec<(f64, f64)> = Vec::new(); // (t, weight)
    for (j, item) in seq.items().iter().enumerate() {
        let Item::Segment(seg) = item else { continue };
        let (start, dt) = (props.item_times[j], seg.duration);
        let h = dt / NODES_PER_SEGMENT as f64;
        for i in 0..=NODES_PER_SEGMENT {
            let w = if i == 0 || i == NODES_PER_SEGMENT {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            nodes.push((start + i as f64 * h, w * h / 3.0));
        }
    }
    // control-matrix rows at every node: rows[i] is (channels × d²)
    let rows: Vec<RMatrix> = nodes
        .iter()
        .map(|&(t, _)| control_matrix_time_with(seq, basis, &props, t))
        .collect::<Result<_, _>>()?;
    let mut gammas = Vec::with_capacity(autocorrelations.len());
    let mut diagnostics = Vec::with_capacity(autocorrelations.len());
    for (alpha, autocorr) in autocorrelations.iter().enumerate() {
        let mut gamma = RMatrix::zeros(m, m);
        match autocorr {
            Autocorrelation::WhiteDelta { s0 } => {
                for (row, &(_, w)) in rows.iter().zip(&nodes) {
                    for k in 0..m {
                        let bk = row[(alpha, k)];
                        if bk == 0.0 {
                            continue;
                        }
                        for l in 0..m {
                            gamma[(k, l)] += s0 * w * bk * row[(alpha, l)];
                        }
                    }
                }
            }
            Autocorrelation::Stationary(c) => {
                // weighted profile integrals: v_i[k] = w_i B̃_k(t_i)
                let n = nodes.len();
                for i1 in 0..n {
                    let (t1, w1) = nodes[i1];
                    for i2 in 0..n {
                        let (t2, w2) = nodes[i2];
                        let cw = c(t1 - t2) * w1 * w2;
                        if cw == 0.0 {
                            continue;
                        }
                        for k in 0..m {
                            let bk = rows[i1][(alpha, k)];
                            if bk == 0.0 {
                                continue;
                            }
                            for l in 0..m {
                                gamma[(k, l)] += cw * bk * rows[i2][(alpha, l)];
                            }
                        }
                    }
                }
            }
        }
        gammas.push(gamma);
        diagnostics.push(ChannelQuadratureDiagnostics {
            label: seq.channels()[alpha].label.clone(),
            tail_share: 0.0,
            head_share_estimate: 0.0,
        });
    }
    Ok(DecayAmplitudes {
        channels: seq.channels().iter().map(|c| c.label.clone()).collect(),
        gammas,
        diagnostics,
    })
}

/// First-order averaged process as a transfer matrix on basis coefficients.
///
/// Second-order Magnus terms (the coherent part) are omitted: the map
/// describes the average process up to a unitary rotation. Truncation can
/// make the map slightly non-completely-positive; [`choi_matrix`] exposes
/// the Choi spectrum to quantify that.
#[derive(Debug, Clone)]
pub struct ProcessMap {
    pub dim: usize,
    /// Real d²×d² transfer matrix acting on coefficient vectors.
    pub transfer: RMatrix,
}

impl ProcessMap {
    /// Apply to a density operator.
    pub fn apply(&self, rho: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix, Error> {
        let coeffs = crate::basis::expand(rho, basis)?;
        let mapped = &self.transfer * coeffs;
        Ok(basis.reconstruct(&mapped))
    }

    /// Compose with the transfer matrix of another map (this map applied
    /// after `other`), e.g. the ideal gate's conjugation transfer matrix.
    pub fn compose_after(&self, other: &RMatrix) -> RMatrix {
        &self.transfer * other
    }
}

/// Build the transfer matrix of
/// `ρ ↦ ρ + Σ_α Σ_{kl} Γ_{α,kl} (σ_k ρ σ_l − ½{σ_k σ_l, ρ})`.
///
/// Each Γ_α is diagonalized and the double sum reduced to its eigenpairs,
/// so the jump structure enters as `Σ_j γ_j (L_j ρ L_j − ½{L_j², ρ})` with
/// Hermitian `L_j`.
pub fn process_map(gamma: &DecayAmplitudes, basis: &OperatorBasis) -> Result<ProcessMap, Error> {
    let m = basis.len();
    let d = basis.dim();
    let mut transfer = RMatrix::identity(m, m);
    for g in &gamma.gammas {
        if g.nrows() != m {
            return Err(Error::DimensionMismatch {
                context: "decay amplitudes vs basis",
                expected: m,
                got: g.nrows(),
            });
        }
        let sym = (g + g.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        for (j, &rate) in eig.eigenvalues.iter().enumerate() {
            if rate == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(j);
            let coeffs: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
            let jump = basis.reconstruct_complex(&coeffs);
            let jump_sq = &jump * &jump;
            for n in 0..m {
                let sigma_n = basis.element(n);
                let mapped = &jump * sigma_n * &jump
                    - (&jump_sq * sigma_n + sigma_n * &jump_sq) * C64::new(0.5, 0.0);
                for k in 0..m {
                    transfer[(k, n)] += rate * basis.coefficient(&mapped, k).re;
                }
            }
        }
        let _ = d;
    }
    Ok(ProcessMap {
        dim: basis.dim(),
        transfer,
    })
}

/// Average gate fidelity report from decay amplitudes.
#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub infidelity: f64,
    /// Per-channel infidelity contributions `tr(Γ_α)/(d+1)`.
    pub per_channel: Vec<(String, f64)>,
}

/// `F = 1 − (1/(d+1)) Σ_{αk} Γ_{α,kk}`.
pub fn fidelity(gamma: &DecayAmplitudes, dim: usize) -> FidelityReport {
    let denom = (dim + 1) as f64;
    let per_channel: Vec<(String, f64)> = gamma
        .channels
        .iter()
        .zip(&gamma.gammas)
        .map(|(label, g)| (label.clone(), g.trace() / denom))
        .collect();
    let infidelity: f64 = per_channel.iter().map(|(_, i)| i).sum();
    FidelityReport {
        fidelity: 1.0 - infidelity,
        infidelity,
        per_channel,
    }
}

/// Average gate fidelity of a transfer matrix:
/// `F = (tr T + d)/(d(d+1))`.
pub fn fidelity_from_transfer(transfer: &RMatrix, dim: usize) -> f64 {
    let d = dim as f64;
    (transfer.trace() + d) / (d * (d + 1.0))
}

/// The G×G correlation-infidelity matrix.
///
/// Entry (g, g') stores the real part of
/// `(1/(d+1)) Σ_α ∫ dω/2π S_α(ω) F_α^{(gg')}(ω)`; the Hermitian pair sum
/// `I^{(gg')} + I^{(g'g)}` is real, so the stored matrix is real symmetric
/// and its total equals the sequence infidelity.
#[derive(Debug, Clone)]
pub struct CorrelationInfidelityMatrix {
    pub gate_labels: Vec<String>,
    /// Symmetric G×G matrix, all channels summed.
    pub values: RMatrix,
    /// Per-channel G×G matrices in channel order.
    pub per_channel: Vec<RMatrix>,
}

impl CorrelationInfidelityMatrix {
    pub fn gate_count(&self) -> usize {
        self.gate_labels.len()
    }

    /// Σ_{gg'} I^{(gg')}, the total infidelity.
    pub fn total(&self) -> f64 {
        self.values.sum()
    }

    /// The diagonal entries, the infidelities of each gate alone.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.gate_count()).map(|g| self.values[(g, g)]).collect()
    }
}

/// Integrate correlation filter functions against the spectra:
/// `I^{(gg')} = (1/(d+1)) Σ_α (1/π) ∫_0^∞ dω S_α(ω) Re F_α^{(gg')}(ω)`.
pub fn correlation_infidelities(
    cff: &CorrelationFF,
    spectra: &[SpectralDensity],
) -> Result<CorrelationInfidelityMatrix, Error> {
    if spectra.len() != cff.channels.len() {
        return Err(Error::DimensionMismatch {
            context: "spectra vs channels",
            expected: cff.channels.len(),
            got: spectra.len(),
        });
    }
    let gates = cff.gate_count();
    let omegas = cff.grid.values();
    let weights = trapezoid_weights(omegas);
    let denom = (cff.dim + 1) as f64;
    let mut per_channel = Vec::with_capacity(spectra.len());
    let mut total = RMatrix::zeros(gates, gates);
    for (alpha, spectrum) in spectra.iter().enumerate() {
        let mut mat = RMatrix::zeros(gates, gates);
        let vals = &cff.values[alpha];
        for (f, (&omega, &w)) in omegas.iter().zip(&weights).enumerate() {
            let s = spectrum.evaluate(omega);
            if s == 0.0 {
                continue;
            }
            let u = w * s / (std::f64::consts::PI * denom);
            for g in 0..gates {
                for gp in 0..gates {
                    mat[(g, gp)] += u * vals[(g * gates + gp, f)].re;
                }
            }
        }
        total += &mat;
        per_channel.push(mat);
    }
    Ok(CorrelationInfidelityMatrix {
        gate_labels: cff.gate_labels.clone(),
        values: total,
        per_channel,
    })
}

/// Choi matrix of a transfer map: `C = Σ_{mn} T_{mn} σ_m ⊗ σ_nᵀ`.
///
/// Trace d for a trace-preserving map; positive semidefinite iff the map
/// is completely positive.
pub fn choi_matrix(map: &ProcessMap, basis: &OperatorBasis) -> CMatrix {
    let m = basis.len();
    let d = basis.dim();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for row in 0..m {
        for col in 0..m {
            let t = map.transfer[(row, col)];
            if t == 0.0 {
                continue;
            }
            let term = basis.element(row).kronecker(&basis.element(col).transpose());
            choi += term * C64::new(t, 0.0);
        }
    }
    choi
}

/// Eigenvalue range of the (Hermitian) Choi matrix.
pub fn choi_eigenvalue_range(choi: &CMatrix) -> (f64, f64) {
    let herm = (choi + choi.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}
