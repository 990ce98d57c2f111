//! Builders for the example sequences: free induction decay, spin echo,
//! and a four-qubit quantum Fourier transform on a linear chain.
//!
//! # Physical model
//!
//! Gates are realized as constant drives:
//!
//! - single-qubit rotations `exp(-iθ n̂·σ/2)` by `H = θ/(2T) · n̂·σ` for a
//!   duration T,
//! - controlled phases `diag(1,1,1,e^{iφ})` (up to global phase) by the
//!   Ising-type coupling `H = φ/(4T) · (Z_a + Z_b − Z_a Z_b)`,
//! - swaps by the exchange coupling `H = π/(4T) · (X_aX_b + Y_aY_b +
//!   Z_aZ_b)`,
//! - idles by `H = 0`.
//!
//! Two-qubit gates act on nearest neighbors of the chain only. The QFT
//! uses the standard linear-nearest-neighbor swap network; its routing
//! swaps accumulate exactly the bit reversal the transform ends with, so
//! the 16-gate circuit (4 Hadamard-equivalents, 6 controlled phases, 6
//! swaps) realizes the full DFT matrix with no extra reordering.

use crate::basis::PauliLabel;
use crate::error::Error;
use crate::pulse::{
    pauli_matrix, InstantaneousGate, Item, NoiseChannel, PulseSequence, Segment,
};
use crate::spectrum::SpectralDensity;
use crate::{CMatrix, C64};
use std::f64::consts::PI;

/// A noise channel bound to a concrete operator.
#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub label: String,
    pub operator: CMatrix,
    pub spectrum: SpectralDensity,
}

impl NoiseSpec {
    pub fn new(label: impl Into<String>, operator: CMatrix, spectrum: SpectralDensity) -> Self {
        Self {
            label: label.into(),
            operator,
            spectrum,
        }
    }

    /// Single-qubit dephasing spec: B = Z.
    pub fn dephasing(spectrum: SpectralDensity) -> Self {
        Self::new("z", pauli_matrix(PauliLabel::Z), spectrum)
    }
}

/// Embed a single-qubit operator at `site` of an n-qubit register
/// (site 0 acts on the most significant bit).
pub fn embed(op: &CMatrix, qubits: usize, site: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for q in 0..qubits {
        let factor = if q == site {
            op.clone()
        } else {
            CMatrix::identity(2, 2)
        };
        out = out.kronecker(&factor);
    }
    out
}

/// Embed a two-qubit operator on the adjacent pair `(site, site+1)`.
pub fn embed_pair(op: &CMatrix, qubits: usize, site: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    let mut q = 0;
    while q < qubits {
        if q == site {
            out = out.kronecker(op);
            q += 2;
        } else {
            out = out.kronecker(&CMatrix::identity(2, 2));
            q += 1;
        }
    }
    out
}

/// Free induction decay: one idle segment of duration τ.
pub fn fid_sequence(tau: f64, noise: NoiseSpec) -> Result<PulseSequence, Error> {
    if !(tau > 0.0) {
        return Err(Error::InvalidSequence(format!(
            "idle duration must be positive, got {tau}"
        )));
    }
    let d = noise.operator.nrows();
    let segment = Segment {
        duration: tau,
        hamiltonian: CMatrix::zeros(d, d),
        noise_operators: vec![noise.operator],
    };
    PulseSequence::single_gate(
        d,
        vec![Item::Segment(segment)],
        vec![NoiseChannel::new(noise.label, noise.spectrum)],
        "idle",
    )
}

/// How the spin-echo π pulse is realized.
#[derive(Debug, Clone, Copy)]
pub enum PiPulseMode {
    /// Ideal zero-duration `exp(-iπX/2)`.
    Instantaneous,
    /// Constant resonant drive `H = amplitude·X` for `duration`; a π
    /// rotation requires `amplitude·duration = π/2`.
    Finite { duration: f64, amplitude: f64 },
}

/// Spin echo: idle(τ) — π_x — idle(τ), three gates.
pub fn spin_echo_sequence(
    tau_idle: f64,
    mode: PiPulseMode,
    noise: NoiseSpec,
) -> Result<PulseSequence, Error> {
    if !(tau_idle > 0.0) {
        return Err(Error::InvalidSequence(format!(
            "idle duration must be positive, got {tau_idle}"
        )));
    }
    if noise.operator.nrows() != 2 {
        return Err(Error::DimensionMismatch {
            context: "spin echo noise operator",
            expected: 2,
            got: noise.operator.nrows(),
        });
    }
    let idle = |dur: f64| {
        Item::Segment(Segment {
            duration: dur,
            hamiltonian: CMatrix::zeros(2, 2),
            noise_operators: vec![noise.operator.clone()],
        })
    };
    let pi_item = match mode {
        PiPulseMode::Instantaneous => Item::Gate(InstantaneousGate {
            unitary: pauli_matrix(PauliLabel::X) * C64::new(0.0, -1.0),
        }),
        PiPulseMode::Finite {
            duration,
            amplitude,
        } => {
            if !(duration > 0.0) {
                return Err(Error::InvalidSequence(format!(
                    "π-pulse duration must be positive, got {duration}"
                )));
            }
            let angle = amplitude * duration;
            if (angle - PI / 2.0).abs() > 1e-9 {
                return Err(Error::InvalidSequence(format!(
                    "π pulse needs amplitude·duration = π/2, got {angle}"
                )));
            }
            Item::Segment(Segment {
                duration,
                hamiltonian: pauli_matrix(PauliLabel::X) * C64::new(amplitude, 0.0),
                noise_operators: vec![noise.operator.clone()],
            })
        }
    };
    PulseSequence::from_parts(
        2,
        vec![idle(tau_idle), pi_item, idle(tau_idle)],
        vec![NoiseChannel::new(noise.label, noise.spectrum)],
        vec![0, 1, 2, 3],
        vec!["idle_1".into(), "pi_x".into(), "idle_2".into()],
    )
}

/// One gate of a [`CircuitSpec`].
#[derive(Debug, Clone)]
pub enum GateKind {
    /// `exp(-i angle n̂·σ/2)` on one qubit.
    Rotation {
        site: usize,
        axis: [f64; 3],
        angle: f64,
    },
    /// `diag(1,1,1,e^{i phase})` on the adjacent pair `(site, site+1)`.
    ControlledPhase { site: usize, phase: f64 },
    /// SWAP on the adjacent pair `(site, site+1)`.
    Swap { site: usize },
    /// All qubits idle.
    Idle,
}

#[derive(Debug, Clone)]
pub struct CircuitGate {
    pub label: String,
    pub kind: GateKind,
    pub duration: f64,
}

/// A linear-chain circuit: named gates with durations, nearest-neighbor
/// two-qubit interactions only.
#[derive(Debug, Clone)]
pub struct CircuitSpec {
    pub qubits: usize,
    pub gates: Vec<CircuitGate>,
}

impl CircuitSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.qubits == 0 || self.qubits > crate::basis::MAX_QUBITS {
            return Err(Error::Capacity {
                requested: self.qubits,
                max: crate::basis::MAX_QUBITS,
            });
        }
        let mut labels = std::collections::HashSet::new();
        for gate in &self.gates {
            if !labels.insert(gate.label.clone()) {
                return Err(Error::InvalidSequence(format!(
                    "duplicate gate label '{}'",
                    gate.label
                )));
            }
            if !(gate.duration > 0.0) {
                return Err(Error::InvalidSequence(format!(
                    "gate '{}' has non-positive duration",
                    gate.label
                )));
            }
            match gate.kind {
                GateKind::Rotation { site, axis, .. } => {
                    if site >= self.qubits {
                        return Err(Error::InvalidSequence(format!(
                            "gate '{}' addresses site {site} of {} qubits",
                            gate.label, self.qubits
                        )));
                    }
                    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                    if norm < 1e-12 {
                        return Err(Error::InvalidSequence(format!(
                            "gate '{}' has a zero rotation axis",
                            gate.label
                        )));
                    }
                }
                GateKind::ControlledPhase { site, .. } | GateKind::Swap { site } => {
                    if site + 1 >= self.qubits {
                        return Err(Error::InvalidSequence(format!(
                            "gate '{}' needs neighbors ({site}, {}) inside the chain",
                            gate.label,
                            site + 1
                        )));
                    }
                }
                GateKind::Idle => {}
            }
        }
        Ok(())
    }

    fn gate_hamiltonian(&self, gate: &CircuitGate) -> CMatrix {
        let d = 1usize << self.qubits;
        let t = gate.duration;
        match gate.kind {
            GateKind::Idle => CMatrix::zeros(d, d),
            GateKind::Rotation { site, axis, angle } => {
                let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
                let n_sigma = pauli_matrix(PauliLabel::X) * C64::new(axis[0] / norm, 0.0)
                    + pauli_matrix(PauliLabel::Y) * C64::new(axis[1] / norm, 0.0)
                    + pauli_matrix(PauliLabel::Z) * C64::new(axis[2] / norm, 0.0);
                embed(&n_sigma, self.qubits, site) * C64::new(angle / (2.0 * t), 0.0)
            }
            GateKind::ControlledPhase { site, phase } => {
                let z = pauli_matrix(PauliLabel::Z);
                let zz = z.kronecker(&z);
                let za = embed(&z, self.qubits, site);
                let zb = embed(&z, self.qubits, site + 1);
                let zzp = embed_pair(&zz, self.qubits, site);
                (za + zb - zzp) * C64::new(phase / (4.0 * t), 0.0)
            }
            GateKind::Swap { site } => {
                let x = pauli_matrix(PauliLabel::X);
                let y = pauli_matrix(PauliLabel::Y);
                let z = pauli_matrix(PauliLabel::Z);
                let coupling = x.kronecker(&x) + y.kronecker(&y) + z.kronecker(&z);
                embed_pair(&coupling, self.qubits, site) * C64::new(PI / (4.0 * t), 0.0)
            }
        }
    }

    /// Compile into a pulse sequence: one segment per gate, one gate
    /// boundary per gate, the given noise channels constant throughout.
    pub fn compile(&self, noise: &[NoiseSpec]) -> Result<PulseSequence, Error> {
        self.validate()?;
        let d = 1usize << self.qubits;
        for spec in noise {
            if spec.operator.nrows() != d {
                return Err(Error::DimensionMismatch {
                    context: "circuit noise operator",
                    expected: d,
                    got: spec.operator.nrows(),
                });
            }
        }
        let noise_ops: Vec<CMatrix> = noise.iter().map(|s| s.operator.clone()).collect();
        let mut items = Vec::with_capacity(self.gates.len());
        let mut boundaries = vec![0usize];
        let mut labels = Vec::with_capacity(self.gates.len());
        for gate in &self.gates {
            items.push(Item::Segment(Segment {
                duration: gate.duration,
                hamiltonian: self.gate_hamiltonian(gate),
                noise_operators: noise_ops.clone(),
            }));
            boundaries.push(items.len());
            labels.push(gate.label.clone());
        }
        PulseSequence::from_parts(
            d,
            items,
            noise
                .iter()
                .map(|s| NoiseChannel::new(s.label.clone(), s.spectrum.clone()))
                .collect(),
            boundaries,
            labels,
        )
    }
}

/// Gate durations of the QFT's stand-in physical model.
#[derive(Debug, Clone)]
pub struct QftTiming {
    pub single_qubit: f64,
    pub two_qubit: f64,
    pub swap: f64,
}

impl Default for QftTiming {
    fn default() -> Self {
        Self {
            single_qubit: 1.0,
            two_qubit: 1.0,
            swap: 1.0,
        }
    }
}

/// The 16-gate circuit of the four-qubit QFT on a linear chain.
pub fn qft4_circuit(timing: &QftTiming) -> CircuitSpec {
    let h_axis = [1.0 / 2f64.sqrt(), 0.0, 1.0 / 2f64.sqrt()];
    let rot = |label: &str, site: usize| CircuitGate {
        label: label.into(),
        kind: GateKind::Rotation {
            site,
            axis: h_axis,
            angle: PI,
        },
        duration: timing.single_qubit,
    };
    let cp = |label: &str, site: usize, phase: f64| CircuitGate {
        label: label.into(),
        kind: GateKind::ControlledPhase { site, phase },
        duration: timing.two_qubit,
    };
    let sw = |label: &str, site: usize| CircuitGate {
        label: label.into(),
        kind: GateKind::Swap { site },
        duration: timing.swap,
    };
    CircuitSpec {
        qubits: 4,
        gates: vec![
            rot("H1", 0),
            cp("CP12", 0, PI / 2.0),
            sw("SWa", 0),
            cp("CP13", 1, PI / 4.0),
            sw("SWb", 1),
            cp("CP14", 2, PI / 8.0),
            sw("SWc", 2),
            rot("H2", 0),
            cp("CP23", 0, PI / 2.0),
            sw("SWd", 0),
            cp("CP24", 1, PI / 4.0),
            sw("SWe", 1),
            rot("H3", 0),
            cp("CP34", 0, PI / 2.0),
            sw("SWf", 0),
            rot("H4", 0),
        ],
    }
}

/// The four-qubit QFT sequence with σ_y noise on the fourth chain site.
///
/// Without echoes the sequence has 16 gates. With `with_echo`, four
/// instantaneous π_x pulses are inserted on the fourth site: the site
/// participates only in the CP14/SWc pair, so a CPMG pair (at 1/4 and 3/4
/// of the idle stretch) goes before that block and another one after it.
/// The insertions split segments without changing the gate partition or
/// the noiseless total unitary.
pub fn qft_sequence(
    qubits: usize,
    with_echo: bool,
    timing: &QftTiming,
    spectrum: SpectralDensity,
) -> Result<PulseSequence, Error> {
    if qubits != 4 {
        return Err(Error::Capacity {
            requested: qubits,
            max: 4,
        });
    }
    let circuit = qft4_circuit(timing);
    let noise = NoiseSpec::new(
        "y4",
        embed(&pauli_matrix(PauliLabel::Y), 4, 3),
        spectrum,
    );
    let seq = circuit.compile(&[noise])?;
    if !with_echo {
        return Ok(seq);
    }
    let times = seq.boundary_times();
    // gates are 1-based in the labels; CP14 is gate 6, SWc gate 7
    let pre_end = times[5];
    let post_start = times[7];
    let tau = seq.total_duration();
    let pi_x4 = embed(&pauli_matrix(PauliLabel::X), 4, 3) * C64::new(0.0, -1.0);
    let mut out = seq;
    for t in [
        0.25 * pre_end,
        0.75 * pre_end,
        post_start + 0.25 * (tau - post_start),
        post_start + 0.75 * (tau - post_start),
    ] {
        out = out.insert_instantaneous(t, pi_x4.clone())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::OperatorBasis;
    use crate::control_matrix::control_matrix_freq;
    use crate::filter_functions::fidelity_ff;
    use crate::propagation::cumulative_propagators;
    use crate::spectrum::FrequencyGrid;

    fn white_z_noise() -> NoiseSpec {
        NoiseSpec::dephasing(SpectralDensity::white(1.0).unwrap())
    }

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// |tr(a† b)|/d, 1 for equality up to global phase.
    fn phase_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
        (a.adjoint() * b).trace().norm() / a.nrows() as f64
    }

    /// The d-dimensional DFT matrix F[j,k] = e^{2πi jk/d}/√d.
    fn qft_matrix(qubits: usize) -> CMatrix {
        let d = 1usize << qubits;
        let mut f = CMatrix::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let arg = 2.0 * PI * (j * k) as f64 / d as f64;
                f[(j, k)] = C64::new(arg.cos(), arg.sin()) / C64::new((d as f64).sqrt(), 0.0);
            }
        }
        f
    }

    /// Permutation reversing the qubit (bit) order.
    fn bit_reversal(qubits: usize) -> CMatrix {
        let d = 1usize << qubits;
        let mut p = CMatrix::zeros(d, d);
        for col in 0..d {
            let mut rev = 0usize;
            for b in 0..qubits {
                if (col >> b) & 1 == 1 {
                    rev |= 1 << (qubits - 1 - b);
                }
            }
            p[(rev, col)] = C64::new(1.0, 0.0);
        }
        p
    }

    #[test]
    fn fid_rejects_zero_duration() {
        assert!(fid_sequence(0.0, white_z_noise()).is_err());
        assert!(fid_sequence(-1.0, white_z_noise()).is_err());
    }

    #[test]
    fn fid_ff_dc_limit_scales_as_tau_squared() {
        let basis = OperatorBasis::pauli(1).unwrap();
        let grid = FrequencyGrid::from_values(vec![1e-6, 2e-6]).unwrap();
        let ff1 = {
            let seq = fid_sequence(1.0, white_z_noise()).unwrap();
            fidelity_ff(&control_matrix_freq(&seq, &basis, &grid).unwrap()).values[0][0]
        };
        let ff2 = {
            let seq = fid_sequence(2.0, white_z_noise()).unwrap();
            fidelity_ff(&control_matrix_freq(&seq, &basis, &grid).unwrap()).values[0][0]
        };
        assert!(
            (ff2 / ff1 - 4.0).abs() < 1e-6,
            "doubling τ should quadruple the DC limit, ratio {}",
            ff2 / ff1
        );
    }

    #[test]
    fn spin_echo_finite_mode_validation() {
        let bad = PiPulseMode::Finite {
            duration: 1.0,
            amplitude: 1.0,
        };
        assert!(spin_echo_sequence(1.0, bad, white_z_noise()).is_err());
        let good = PiPulseMode::Finite {
            duration: 0.1,
            amplitude: PI / 0.2,
        };
        let seq = spin_echo_sequence(1.0, good, white_z_noise()).unwrap();
        assert_eq!(seq.gate_count(), 3);
        assert!((seq.total_duration() - 2.1).abs() < 1e-12);
        // realized π pulse: exp(-i π X/2) = -iX up to numerics
        let props = cumulative_propagators(&seq).unwrap();
        let expected = pauli_matrix(PauliLabel::X) * C64::new(0.0, -1.0);
        assert!(max_abs(&(&props.item_propagators[1] - &expected)) < 1e-12);
    }

    #[test]
    fn finite_pulse_converges_to_instantaneous() {
        // A pulse of width Δt leaves a residual echo-FF floor ≈ 8Δt²/π²
        // (the frame rotates through the pulse), so pointwise agreement
        // needs Δt ≪ ω besides ωΔt ≪ 1. Check 1% agreement where the FF
        // is unsuppressed, and the Δt² approach at a fixed low frequency.
        let basis = OperatorBasis::pauli(1).unwrap();
        let tau = 1.0;
        let inst = spin_echo_sequence(tau, PiPulseMode::Instantaneous, white_z_noise()).unwrap();
        let make_finite = |dt: f64| {
            spin_echo_sequence(
                tau,
                PiPulseMode::Finite {
                    duration: dt,
                    amplitude: PI / (2.0 * dt),
                },
                white_z_noise(),
            )
            .unwrap()
        };
        let grid = FrequencyGrid::logarithmic(0.5, 5.0, 40).unwrap();
        let dt = 1e-3;
        let ff_inst = fidelity_ff(&control_matrix_freq(&inst, &basis, &grid).unwrap());
        let ff_fin =
            fidelity_ff(&control_matrix_freq(&make_finite(dt), &basis, &grid).unwrap());
        for (f, &omega) in grid.values().iter().enumerate() {
            assert!(omega * dt < 0.01);
            let a = ff_inst.values[0][f];
            let b = ff_fin.values[0][f];
            let rel = (a - b).abs() / a.max(1e-300);
            assert!(rel < 0.01, "relative gap {rel} at ω={omega}");
        }
        // fixed low frequency: the gap vanishes at least linearly in Δt
        // (the pulse width shifts the second idle by Δt, an O(Δt) shape
        // change on top of the O(Δt²) floor)
        let low = FrequencyGrid::from_values(vec![0.1, 0.2]).unwrap();
        let reference =
            fidelity_ff(&control_matrix_freq(&inst, &basis, &low).unwrap()).values[0][0];
        let gap = |dt: f64| {
            let ff = fidelity_ff(&control_matrix_freq(&make_finite(dt), &basis, &low).unwrap());
            (ff.values[0][0] - reference).abs()
        };
        let (g2, g3) = (gap(1e-2), gap(1e-3));
        assert!(g3 < g2 * 0.15, "gaps {g2:.3e} → {g3:.3e} not O(Δt)");
        assert!(g3 / reference < 0.01);
    }

    #[test]
    fn qft_without_echo_has_16_gates() {
        let seq = qft_sequence(
            4,
            false,
            &QftTiming::default(),
            SpectralDensity::white(1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(seq.gate_count(), 16);
        assert!((seq.total_duration() - 16.0).abs() < 1e-12);
        assert!(qft_sequence(3, false, &QftTiming::default(), SpectralDensity::white(1.0).unwrap()).is_err());
    }

    #[test]
    fn qft_reproduces_dft_up_to_bit_reversal() {
        let seq = qft_sequence(
            4,
            false,
            &QftTiming::default(),
            SpectralDensity::white(1.0).unwrap(),
        )
        .unwrap();
        let props = cumulative_propagators(&seq).unwrap();
        let realized = props.total();
        let fid = phase_fidelity(&qft_matrix(4), realized);
        assert!(fid > 1.0 - 1e-9, "fidelity to the DFT matrix: {fid}");
    }

    #[test]
    fn echo_preserves_gate_count_and_unitary() {
        let spectrum = SpectralDensity::white(1.0).unwrap();
        let plain = qft_sequence(4, false, &QftTiming::default(), spectrum.clone()).unwrap();
        let echoed = qft_sequence(4, true, &QftTiming::default(), spectrum).unwrap();
        assert_eq!(echoed.gate_count(), 16);
        assert_eq!(echoed.boundary_times(), plain.boundary_times());
        let u_plain = cumulative_propagators(&plain).unwrap();
        let u_echo = cumulative_propagators(&echoed).unwrap();
        let fid = phase_fidelity(u_plain.total(), u_echo.total());
        assert!(fid > 1.0 - 1e-9, "echo changed the unitary: {fid}");
    }

    #[test]
    fn circuit_spec_validation() {
        let mut spec = qft4_circuit(&QftTiming::default());
        spec.gates[2].label = "H1".into();
        assert!(matches!(
            spec.validate(),
            Err(Error::InvalidSequence(_))
        ));
        let mut spec = qft4_circuit(&QftTiming::default());
        spec.gates[1].kind = GateKind::ControlledPhase {
            site: 3,
            phase: 1.0,
        };
        assert!(spec.validate().is_err());
    }
}
