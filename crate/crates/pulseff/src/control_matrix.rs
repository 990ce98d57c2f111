//! The control matrix: basis coefficients of the interaction-picture noise
//! operators, in the time domain and in the frequency domain.
//!
//! The frequency-domain values are computed analytically per segment. With
//! the segment Hamiltonian `H = V diag(λ) V†`, the segment's contribution
//! to `B̃_α(ω)` is
//!
//! ```text
//! e^{iω t_start} · Q† V [ (V† B_α V) ∘ K(ω) ] V† Q,
//! K_ij(ω) = ∫_0^Δt e^{i(ω + λ_i − λ_j) t} dt,
//! ```
//!
//! where `Q` is the cumulative propagator before the segment and `∘` the
//! elementwise product. Only ω > 0 is stored; the values at −ω are the
//! complex conjugates because the time-domain control matrix is real.

use crate::basis::OperatorBasis;
use crate::error::Error;
use crate::propagation::{cumulative_propagators, PropagatorSet};
use crate::pulse::{Item, PulseSequence};
use crate::spectrum::FrequencyGrid;
use crate::{CMatrix, C64, RMatrix};
use rayon::prelude::*;

/// `∫_0^dt e^{iφt} dt` in the cancellation-free form
/// `dt · e^{iφdt/2} · sinc(φdt/2)`, with the removable singularity handled
/// by the second-order Taylor expansion of sinc below `|φ·dt| < 1e-8`.
fn phase_integral(phi: f64, dt: f64) -> C64 {
    let x = 0.5 * phi * dt;
    let sinc = if x.abs() < 0.5e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    C64::new(x.cos(), x.sin()) * (dt * sinc)
}

/// Frequency-domain control matrix `B̃_{αk}(ω)` of a pulse sequence or of a
/// single gate in its local frame.
#[derive(Debug, Clone)]
pub struct ControlMatrix {
    channels: Vec<String>,
    grid: FrequencyGrid,
    duration: f64,
    /// Per channel: d² × n_ω, row k holding `B̃_{αk}(ω)` over the grid.
    values: Vec<CMatrix>,
}

impl ControlMatrix {
    pub fn channel_labels(&self) -> &[String] {
        &self.channels
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn num_channels(&self) -> usize {
        self.values.len()
    }

    /// Number of basis elements d².
    pub fn num_basis_elements(&self) -> usize {
        self.values[0].nrows()
    }

    /// The d² × n_ω coefficient array of channel α.
    pub fn channel_values(&self, alpha: usize) -> &CMatrix {
        &self.values[alpha]
    }
}

/// A single gate's control matrix in its own frame, with the frame data
/// needed to place it inside a sequence.
#[derive(Debug, Clone)]
pub struct GateControlMatrix {
    /// Coefficients in the gate's local interaction picture.
    pub cm: ControlMatrix,
    /// Cumulative propagator `Q_{g−1}` before the gate.
    pub frame: CMatrix,
    /// Start time `t_{g−1}` of the gate.
    pub offset: f64,
    /// The gate's own total propagator (used to validate frame chaining).
    pub gate_unitary: CMatrix,
    pub label: String,
}

/// Precomputed per-segment data for the frequency integrals.
struct SegmentTerm {
    /// `V† B_α V` per channel.
    rotated_noise: Vec<CMatrix>,
    /// `V† Q_before`.
    frame_rotation: CMatrix,
    eigenvalues: Vec<f64>,
    start_time: f64,
    duration: f64,
}

fn build_segment_terms(
    seq: &PulseSequence,
    props: &PropagatorSet,
    item_range: std::ops::Range<usize>,
    local_frame: bool,
) -> Vec<SegmentTerm> {
    let range_start_time = props.item_times[item_range.start];
    let frame_origin = if local_frame {
        Some(props.before_item(item_range.start).adjoint())
    } else {
        None
    };
    let mut terms = Vec::new();
    for j in item_range {
        let Item::Segment(seg) = &seq.items()[j] else {
            continue;
        };
        let eig = props.eigensystems[j].as_ref().unwrap();
        let v = &eig.eigenvectors;
        let v_dag = v.adjoint();
        let rotated_noise = seg
            .noise_operators
            .iter()
            .map(|b| &v_dag * b * v)
            .collect();
        // local frames divide out the propagator accumulated before the range
        let q_before = match &frame_origin {
            Some(origin) => props.before_item(j) * origin,
            None => props.before_item(j).clone(),
        };
        terms.push(SegmentTerm {
            rotated_noise,
            frame_rotation: &v_dag * q_before,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            start_time: props.item_times[j] - if local_frame { range_start_time } else { 0.0 },
            duration: seg.duration,
        });
    }
    terms
}

/// Evaluate the coefficient columns for every grid frequency.
///
/// Frequencies are independent; the parallel loop writes disjoint columns,
/// so results are bitwise identical to a sequential evaluation.
fn evaluate_terms(
    terms: &[SegmentTerm],
    basis: &OperatorBasis,
    grid: &FrequencyGrid,
    num_channels: usize,
) -> Vec<CMatrix> {
    let d = basis.dim();
    let m = basis.len();
    let n_omega = grid.len();
    let mut values: Vec<CMatrix> = (0..num_channels)
        .map(|_| CMatrix::zeros(m, n_omega))
        .collect();
    // column-major storage: each frequency owns a contiguous slice
    let mut column_slices: Vec<Vec<&mut [C64]>> = Vec::with_capacity(n_omega);
    {
        let mut remainders: Vec<&mut [C64]> = values
            .iter_mut()
            .map(|v| v.as_mut_slice())
            .collect();
        for _ in 0..n_omega {
            let mut cols = Vec::with_capacity(num_channels);
            let mut rest = Vec::with_capacity(num_channels);
            for r in remainders {
                let (head, tail) = r.split_at_mut(m);
                cols.push(head);
                rest.push(tail);
            }
            column_slices.push(cols);
            remainders = rest;
        }
    }
    column_slices
        .par_iter_mut()
        .enumerate()
        .for_each(|(f, cols)| {
            let omega = grid.values()[f];
            let mut kernel = CMatrix::zeros(d, d);
            let mut sandwiched = CMatrix::zeros(d, d);
            for term in terms {
                for i in 0..d {
                    for j in 0..d {
                        let phi = omega + term.eigenvalues[i] - term.eigenvalues[j];
                        kernel[(i, j)] = phase_integral(phi, term.duration);
                    }
                }
                let phase_arg = omega * term.start_time;
                let phase = C64::new(phase_arg.cos(), phase_arg.sin());
                let r = &term.frame_rotation;
                for (alpha, w) in term.rotated_noise.iter().enumerate() {
                    sandwiched.zip_zip_apply(w, &kernel, |out, a, b| *out = a * b);
                    let op = r.adjoint() * &sandwiched * r;
                    for k in 0..m {
                        cols[alpha][k] += phase * basis.coefficient(&op, k);
                    }
                }
            }
        });
    values
}

/// Time-domain control matrix `B̃_{αk}(t) = tr(U_c†(t) B_α U_c(t) σ_k)`.
///
/// Returns a (channels × d²) real matrix; the traces of Hermitian products
/// are real, and an imaginary residue above 1e-10 is a bug upstream.
pub fn control_matrix_time(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    t: f64,
) -> Result<RMatrix, Error> {
    let props = cumulative_propagators(seq)?;
    control_matrix_time_with(seq, basis, &props, t)
}

/// As [`control_matrix_time`], reusing precomputed propagators.
pub fn control_matrix_time_with(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    props: &PropagatorSet,
    t: f64,
) -> Result<RMatrix, Error> {
    let tau = seq.total_duration();
    if !(0.0..=tau).contains(&t) {
        return Err(Error::TimeOutOfRange { t, tau });
    }
    let u = props.control_unitary(seq, t)?;
    let u_dag = u.adjoint();
    // noise operators of the segment containing t (earlier segment at an
    // exact boundary, matching control_unitary's convention)
    let mut active: Option<&Vec<CMatrix>> = None;
    for (j, item) in seq.items().iter().enumerate() {
        if let Item::Segment(seg) = item {
            if t >= props.item_times[j] && t <= props.item_times[j + 1] {
                active = Some(&seg.noise_operators);
                break;
            }
        }
    }
    let active = active.ok_or_else(|| {
        Error::InvalidSequence("no segment covers the requested time".into())
    })?;
    let mut out = RMatrix::zeros(seq.channels().len(), basis.len());
    for (alpha, b) in active.iter().enumerate() {
        let rotated = &u_dag * b * &u;
        for k in 0..basis.len() {
            let c = basis.coefficient(&rotated, k);
            debug_assert!(c.im.abs() < 1e-10, "imaginary residue {}", c.im);
            out[(alpha, k)] = c.re;
        }
    }
    Ok(out)
}

/// Frequency-domain control matrix of the whole sequence.
pub fn control_matrix_freq(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    grid: &FrequencyGrid,
) -> Result<ControlMatrix, Error> {
    check_dims(seq, basis)?;
    let props = cumulative_propagators(seq)?;
    let terms = build_segment_terms(seq, &props, 0..seq.items().len(), false);
    let values = evaluate_terms(&terms, basis, grid, seq.channels().len());
    Ok(ControlMatrix {
        channels: seq.channels().iter().map(|c| c.label.clone()).collect(),
        grid: grid.clone(),
        duration: seq.total_duration(),
        values,
    })
}

/// Per-gate control matrices in their local frames, with frame data.
///
/// A gate's coefficients are computed once and can be reused across
/// sequences that contain the same gate in different positions.
pub fn gate_control_matrices(
    seq: &PulseSequence,
    basis: &OperatorBasis,
    grid: &FrequencyGrid,
) -> Result<Vec<GateControlMatrix>, Error> {
    check_dims(seq, basis)?;
    let props = cumulative_propagators(seq)?;
    let boundaries = seq.gate_boundaries();
    let channels: Vec<String> = seq.channels().iter().map(|c| c.label.clone()).collect();
    let mut parts = Vec::with_capacity(seq.gate_count());
    for g in 0..seq.gate_count() {
        let range = boundaries[g]..boundaries[g + 1];
        let terms = build_segment_terms(seq, &props, range.clone(), true);
        let values = evaluate_terms(&terms, basis, grid, channels.len());
        let duration = props.item_times[range.end] - props.item_times[range.start];
        let gate_unitary =
            props.cumulative[range.end].clone() * props.cumulative[range.start].adjoint();
        parts.push(GateControlMatrix {
            cm: ControlMatrix {
                channels: channels.clone(),
                grid: grid.clone(),
                duration,
                values,
            },
            frame: props.before_item(range.start).clone(),
            offset: props.item_times[range.start],
            gate_unitary,
            label: seq.gate_labels()[g].clone(),
        });
    }
    Ok(parts)
}

fn check_dims(seq: &PulseSequence, basis: &OperatorBasis) -> Result<(), Error> {
    if basis.dim() != seq.dim() {
        return Err(Error::DimensionMismatch {
            context: "basis vs sequence",
            expected: seq.dim(),
            got: basis.dim(),
        });
    }
    Ok(())
}

/// Validate that a list of per-gate control matrices chains consistently:
/// shared grid and channels, offsets accumulating durations, and frames
/// advancing by each gate's propagator.
pub fn validate_parts(parts: &[GateControlMatrix]) -> Result<(), Error> {
    let first = parts
        .first()
        .ok_or_else(|| Error::FrameMismatch("no parts given".into()))?;
    let mut expected_offset = first.offset;
    let mut expected_frame = first.frame.clone();
    for (g, part) in parts.iter().enumerate() {
        if part.cm.grid != first.cm.grid {
            return Err(Error::FrameMismatch(format!(
                "gate {g} ('{}') uses a different frequency grid",
                part.label
            )));
        }
        if part.cm.channels != first.cm.channels {
            return Err(Error::FrameMismatch(format!(
                "gate {g} ('{}') has channels {:?}, expected {:?}",
                part.label, part.cm.channels, first.cm.channels
            )));
        }
        let scale = part.cm.duration.max(1.0);
        if (part.offset - expected_offset).abs() > 1e-9 * scale {
            return Err(Error::FrameMismatch(format!(
                "gate {g} ('{}') starts at {} but the previous gates end at {}",
                part.label, part.offset, expected_offset
            )));
        }
        let frame_dev = (&part.frame - &expected_frame)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if frame_dev > 1e-8 {
            return Err(Error::FrameMismatch(format!(
                "gate {g} ('{}') frame deviates by {frame_dev:.3e} from the cumulative product",
                part.label
            )));
        }
        expected_offset += part.cm.duration;
        expected_frame = &part.gate_unitary * &expected_frame;
    }
    Ok(())
}

/// Frame-transformed per-gate coefficient arrays: the coefficients of
/// `Q_{g−1}† B̃_α^{(g)}(ω) Q_{g−1}`, i.e. each gate's contribution in the
/// global frame *without* its `e^{iω t_{g−1}}` phase.
pub fn frame_transformed_values(
    parts: &[GateControlMatrix],
    basis: &OperatorBasis,
) -> Result<Vec<Vec<CMatrix>>, Error> {
    validate_parts(parts)?;
    let transformed = parts
        .par_iter()
        .map(|part| {
            let t = basis.conjugation_transfer_matrix(&part.frame);
            let t_complex = t.map(|x| C64::new(x, 0.0));
            part.cm
                .values
                .iter()
                .map(|v| &t_complex * v)
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(transformed)
}

/// Compose per-gate control matrices into the sequence's control matrix:
/// `B̃_{αk}(ω) = Σ_g e^{iω t_{g−1}} tr(Q_{g−1}† B̃_α^{(g)}(ω) Q_{g−1} σ_k)`,
/// carried out in coefficient space through each gate's transfer matrix.
pub fn concatenate_control_matrices(
    parts: &[GateControlMatrix],
    basis: &OperatorBasis,
) -> Result<ControlMatrix, Error> {
    let transformed = frame_transformed_values(parts, basis)?;
    let first = &parts[0];
    let grid = first.cm.grid.clone();
    let n_omega = grid.len();
    let m = basis.len();
    let num_channels = first.cm.channels.len();
    let mut values: Vec<CMatrix> = (0..num_channels)
        .map(|_| CMatrix::zeros(m, n_omega))
        .collect();
    for (part, gate_values) in parts.iter().zip(&transformed) {
        let offset = part.offset - first.offset;
        for (alpha, v) in gate_values.iter().enumerate() {
            let out = &mut values[alpha];
            for (f, &omega) in grid.values().iter().enumerate() {
                let arg = omega * offset;
                let phase = C64::new(arg.cos(), arg.sin());
                let mut out_col = out.column_mut(f);
                let col = v.column(f);
                for k in 0..m {
                    out_col[k] += phase * col[k];
                }
            }
        }
    }
    Ok(ControlMatrix {
        channels: first.cm.channels.clone(),
        grid,
        duration: parts.iter().map(|p| p.cm.duration).sum(),
        values,
    })
}
