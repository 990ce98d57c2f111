//! Generalized, fidelity, and gate-pair correlation filter functions.

use crate::basis::OperatorBasis;
use crate::control_matrix::{frame_transformed_values, ControlMatrix, GateControlMatrix};
use crate::error::Error;
use crate::spectrum::FrequencyGrid;
use crate::{CMatrix, C64};

/// Generalized filter functions `F_{α,kl}(ω) = B̃*_{αk}(ω) B̃_{αl}(ω)`.
///
/// Stores one d²×d² Hermitian matrix per channel and frequency, so the
/// memory cost grows as `channels · n_ω · d⁴`; intended for small systems
/// or selected frequencies.
#[derive(Debug, Clone)]
pub struct GeneralizedFF {
    pub channels: Vec<String>,
    pub grid: FrequencyGrid,
    /// `values[α][f]` is the d²×d² matrix at grid point f.
    pub values: Vec<Vec<CMatrix>>,
}

/// Fidelity filter functions `F_α(ω) = Σ_k |B̃_{αk}(ω)|²`.
#[derive(Debug, Clone)]
pub struct FidelityFF {
    pub channels: Vec<String>,
    pub grid: FrequencyGrid,
    /// `values[α][f]`, real and nonnegative.
    pub values: Vec<Vec<f64>>,
}

/// Correlation filter functions `F_α^{(gg')}(ω)` between gate pairs.
///
/// Complex-valued and Hermitian in `(g, g')`; the diagonal `g = g'` is the
/// single-gate fidelity filter function and the sum over all pairs is the
/// sequence's total fidelity filter function.
#[derive(Debug, Clone)]
pub struct CorrelationFF {
    pub channels: Vec<String>,
    pub gate_labels: Vec<String>,
    pub grid: FrequencyGrid,
    /// Hilbert-space dimension d of the underlying system.
    pub dim: usize,
    /// `values[α]` has shape (G² × n_ω); row `g·G + g'` holds
    /// `F^{(gg')}(ω)` over the grid.
    pub values: Vec<CMatrix>,
}

impl CorrelationFF {
    pub fn gate_count(&self) -> usize {
        self.gate_labels.len()
    }

    pub fn value(&self, alpha: usize, g: usize, g_prime: usize, f: usize) -> C64 {
        let gates = self.gate_count();
        self.values[alpha][(g * gates + g_prime, f)]
    }

    /// Σ_{gg'} F^{(gg')}(ω) for one channel; real up to rounding.
    pub fn pair_sum(&self, alpha: usize) -> Vec<f64> {
        let n_omega = self.grid.len();
        let mut out = vec![0.0; n_omega];
        for f in 0..n_omega {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..self.values[alpha].nrows() {
                acc += self.values[alpha][(p, f)];
            }
            out[f] = acc.re;
        }
        out
    }
}

/// Outer products `B̃*_{αk}(ω) B̃_{αl}(ω)` per channel and frequency.
pub fn generalized_ff(cm: &ControlMatrix) -> GeneralizedFF {
    let m = cm.num_basis_elements();
    let n_omega = cm.grid().len();
    let mut values = Vec::with_capacity(cm.num_channels());
    for alpha in 0..cm.num_channels() {
        let b = cm.channel_values(alpha);
        let mut per_freq = Vec::with_capacity(n_omega);
        for f in 0..n_omega {
            let col = b.column(f);
            let mut mat = CMatrix::zeros(m, m);
            for k in 0..m {
                for l in 0..m {
                    mat[(k, l)] = col[k].conj() * col[l];
                }
            }
            per_freq.push(mat);
        }
        values.push(per_freq);
    }
    GeneralizedFF {
        channels: cm.channel_labels().to_vec(),
        grid: cm.grid().clone(),
        values,
    }
}

/// `F_α(ω) = Σ_k |B̃_{αk}(ω)|²`.
pub fn fidelity_ff(cm: &ControlMatrix) -> FidelityFF {
    let n_omega = cm.grid().len();
    let mut values = Vec::with_capacity(cm.num_channels());
    for alpha in 0..cm.num_channels() {
        let b = cm.channel_values(alpha);
        let mut per_freq = Vec::with_capacity(n_omega);
        for f in 0..n_omega {
            per_freq.push(b.column(f).iter().map(|z| z.norm_sqr()).sum());
        }
        values.push(per_freq);
    }
    FidelityFF {
        channels: cm.channel_labels().to_vec(),
        grid: cm.grid().clone(),
        values,
    }
}

/// Correlation filter functions from per-gate control matrices.
///
/// With `c^{(g)}(ω)` the frame-transformed coefficients of gate g, the
/// pair term is
///
/// ```text
/// F^{(gg')}(ω) = e^{iω(t_{g'−1} − t_{g−1})} Σ_k c*_k^{(g)}(ω) c_k^{(g')}(ω),
/// ```
///
/// one inner product of length-d² vectors per gate pair and frequency.
/// This phase orientation makes the spin-echo pair `(1,3)` carry
/// `e^{+iω τ_idle}`; the opposite (conjugate) assignment only swaps the
/// roles of `(g, g')` and leaves diagonals, pair sums, and all real parts
/// unchanged.
pub fn correlation_ff(
    parts: &[GateControlMatrix],
    basis: &OperatorBasis,
) -> Result<CorrelationFF, Error> {
    let transformed = frame_transformed_values(parts, basis)?;
    let gates = parts.len();
    let first = &parts[0];
    let grid = first.cm.grid().clone();
    let n_omega = grid.len();
    let channels = first.cm.channel_labels().to_vec();
    let offsets: Vec<f64> = parts.iter().map(|p| p.offset - first.offset).collect();
    let mut values = Vec::with_capacity(channels.len());
    for alpha in 0..channels.len() {
        let mut out = CMatrix::zeros(gates * gates, n_omega);
        for g in 0..gates {
            let cg = &transformed[g][alpha];
            for gp in g..gates {
                let cgp = &transformed[gp][alpha];
                let delta_t = offsets[gp] - offsets[g];
                for f in 0..n_omega {
                    let omega = grid.values()[f];
                    let mut dot = C64::new(0.0, 0.0);
                    let a = cg.column(f);
                    let b = cgp.column(f);
                    for k in 0..a.len() {
                        dot += a[k].conj() * b[k];
                    }
                    let arg = omega * delta_t;
                    let val = C64::new(arg.cos(), arg.sin()) * dot;
                    out[(g * gates + gp, f)] = val;
                    if gp != g {
                        out[(gp * gates + g, f)] = val.conj();
                    }
                }
            }
        }
        values.push(out);
    }
    Ok(CorrelationFF {
        channels,
        gate_labels: parts.iter().map(|p| p.label.clone()).collect(),
        grid,
        dim: basis.dim(),
        values,
    })
}
