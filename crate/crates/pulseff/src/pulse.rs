//! Pulse sequences: piecewise-constant control segments, instantaneous
//! gates, noise channels, and the gate-boundary structure used by the
//! correlation filter functions.

use crate::basis::hermitian_deviation;
use crate::error::Error;
use crate::spectrum::SpectralDensity;
use crate::{CMatrix, C64};

/// A stretch of constant control Hamiltonian with per-channel noise
/// operators, all constant over the segment.
#[derive(Debug, Clone)]
pub struct Segment {
    /// Duration Δt in units of 1/energy (ħ = 1). Strictly positive.
    pub duration: f64,
    /// Control Hamiltonian, Hermitian d×d.
    pub hamiltonian: CMatrix,
    /// Noise operator B_α per channel, index-aligned with the sequence's
    /// channel list. Hermitian d×d.
    pub noise_operators: Vec<CMatrix>,
}

/// A unitary applied at a single instant between segments. Carries no
/// noise exposure.
#[derive(Debug, Clone)]
pub struct InstantaneousGate {
    pub unitary: CMatrix,
}

/// One entry of a pulse sequence.
#[derive(Debug, Clone)]
pub enum Item {
    Segment(Segment),
    Gate(InstantaneousGate),
}

impl Item {
    pub fn duration(&self) -> f64 {
        match self {
            Item::Segment(s) => s.duration,
            Item::Gate(_) => 0.0,
        }
    }
}

/// A noise source: a label α and its power spectral density.
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    pub label: String,
    pub spectrum: SpectralDensity,
}

impl NoiseChannel {
    pub fn new(label: impl Into<String>, spectrum: SpectralDensity) -> Self {
        Self {
            label: label.into(),
            spectrum,
        }
    }
}

/// How [`PulseSequence::concatenate`] assigns gate boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcatBoundaries {
    /// Each input sequence becomes one gate of the result.
    OnePerSequence,
    /// The inputs' own gate partitions are kept.
    Preserve,
}

/// An ordered sequence of segments and instantaneous gates with noise
/// channels and a partition into `G` named gates.
///
/// Immutable after construction; all invariants are checked once in
/// [`PulseSequence::from_parts`].
#[derive(Debug, Clone)]
pub struct PulseSequence {
    dim: usize,
    items: Vec<Item>,
    channels: Vec<NoiseChannel>,
    /// Item indices of the gate boundaries: `boundaries[0] = 0`,
    /// `boundaries[G] = items.len()`, strictly increasing.
    boundaries: Vec<usize>,
    gate_labels: Vec<String>,
}

const HERMITICITY_TOL: f64 = 1e-10;
const UNITARITY_TOL: f64 = 1e-10;

fn unitarity_deviation(u: &CMatrix) -> f64 {
    let d = u.nrows();
    let product = u.adjoint() * u;
    let ident = CMatrix::identity(d, d);
    (&product - &ident)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

impl PulseSequence {
    /// Assemble and validate a sequence.
    ///
    /// `boundaries` partitions the item list into gates by item index; pass
    /// `vec![0, items.len()]` for a single gate. `gate_labels` must have one
    /// entry per gate.
    pub fn from_parts(
        dim: usize,
        items: Vec<Item>,
        channels: Vec<NoiseChannel>,
        boundaries: Vec<usize>,
        gate_labels: Vec<String>,
    ) -> Result<Self, Error> {
        if !items.iter().any(|i| matches!(i, Item::Segment(_))) {
            return Err(Error::InvalidSequence(
                "sequence must contain at least one segment".into(),
            ));
        }
        for (idx, item) in items.iter().enumerate() {
            match item {
                Item::Segment(seg) => {
                    if !(seg.duration > 0.0) {
                        return Err(Error::InvalidSequence(format!(
                            "segment {idx} has non-positive duration {}",
                            seg.duration
                        )));
                    }
                    if seg.hamiltonian.nrows() != dim || seg.hamiltonian.ncols() != dim {
                        return Err(Error::DimensionMismatch {
                            context: "segment hamiltonian",
                            expected: dim,
                            got: seg.hamiltonian.nrows(),
                        });
                    }
                    let dev = hermitian_deviation(&seg.hamiltonian);
                    if dev > HERMITICITY_TOL {
                        return Err(Error::NonHermitian {
                            context: "segment hamiltonian",
                            norm: dev,
                        });
                    }
                    if seg.noise_operators.len() != channels.len() {
                        return Err(Error::InvalidSequence(format!(
                            "segment {idx} supplies {} noise operators for {} channels",
                            seg.noise_operators.len(),
                            channels.len()
                        )));
                    }
                    for (b, ch) in seg.noise_operators.iter().zip(&channels) {
                        if b.nrows() != dim || b.ncols() != dim {
                            return Err(Error::DimensionMismatch {
                                context: "noise operator",
                                expected: dim,
                                got: b.nrows(),
                            });
                        }
                        let dev = hermitian_deviation(b);
                        if dev > HERMITICITY_TOL {
                            return Err(Error::NonHermitian {
                                context: "noise operator",
                                norm: dev,
                            });
                        }
                        let _ = ch;
                    }
                }
                Item::Gate(g) => {
                    if g.unitary.nrows() != dim || g.unitary.ncols() != dim {
                        return Err(Error::DimensionMismatch {
                            context: "instantaneous gate",
                            expected: dim,
                            got: g.unitary.nrows(),
                        });
                    }
                    let dev = unitarity_deviation(&g.unitary);
                    if dev > UNITARITY_TOL {
                        return Err(Error::NonUnitary {
                            context: "instantaneous gate",
                            norm: dev,
                        });
                    }
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        for ch in &channels {
            if !seen.insert(ch.label.clone()) {
                return Err(Error::ChannelMismatch(format!(
                    "duplicate channel label '{}'",
                    ch.label
                )));
            }
        }
        if boundaries.first() != Some(&0) || boundaries.last() != Some(&items.len()) {
            return Err(Error::InvalidSequence(
                "gate boundaries must start at 0 and end at the item count".into(),
            ));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSequence(
                "gate boundaries must be strictly increasing".into(),
            ));
        }
        let gates = boundaries.len() - 1;
        if gate_labels.len() != gates {
            return Err(Error::InvalidSequence(format!(
                "{} gate labels for {} gates",
                gate_labels.len(),
                gates
            )));
        }
        Ok(Self {
            dim,
            items,
            channels,
            boundaries,
            gate_labels,
        })
    }

    /// Single-gate sequence from items.
    pub fn single_gate(
        dim: usize,
        items: Vec<Item>,
        channels: Vec<NoiseChannel>,
        label: impl Into<String>,
    ) -> Result<Self, Error> {
        let n = items.len();
        Self::from_parts(dim, items, channels, vec![0, n], vec![label.into()])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn channels(&self) -> &[NoiseChannel] {
        &self.channels
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channels.iter().position(|c| c.label == label)
    }

    /// Number of gates G in the partition.
    pub fn gate_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn gate_labels(&self) -> &[String] {
        &self.gate_labels
    }

    pub fn gate_boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Total duration τ = Σ_g Δt_g; instantaneous gates contribute zero.
    pub fn total_duration(&self) -> f64 {
        self.items.iter().map(Item::duration).sum()
    }

    /// Start time of each item plus the final time τ (length items+1).
    pub fn item_times(&self) -> Vec<f64> {
        let mut times = Vec::with_capacity(self.items.len() + 1);
        let mut t = 0.0;
        times.push(t);
        for item in &self.items {
            t += item.duration();
            times.push(t);
        }
        times
    }

    /// Gate boundary times `t_0 = 0 ≤ t_1 ≤ … ≤ t_G = τ`.
    pub fn boundary_times(&self) -> Vec<f64> {
        let item_times = self.item_times();
        self.boundaries.iter().map(|&i| item_times[i]).collect()
    }

    /// The g-th gate (0-based) as a standalone single-gate sequence sharing
    /// this sequence's channels.
    pub fn gate_subsequence(&self, g: usize) -> Result<PulseSequence, Error> {
        if g >= self.gate_count() {
            return Err(Error::InvalidSequence(format!(
                "gate index {g} out of range for {} gates",
                self.gate_count()
            )));
        }
        let items: Vec<Item> = self.items[self.boundaries[g]..self.boundaries[g + 1]].to_vec();
        // A gate made only of instantaneous unitaries has no noise exposure;
        // it still needs a segment to satisfy the sequence invariant, so the
        // caller handles that case via `gate_is_instantaneous`.
        PulseSequence::from_parts(
            self.dim,
            items,
            self.channels.clone(),
            vec![0, self.boundaries[g + 1] - self.boundaries[g]],
            vec![self.gate_labels[g].clone()],
        )
    }

    /// True when gate g contains no segments (only instantaneous unitaries).
    pub fn gate_is_instantaneous(&self, g: usize) -> bool {
        self.items[self.boundaries[g]..self.boundaries[g + 1]]
            .iter()
            .all(|i| matches!(i, Item::Gate(_)))
    }

    /// The combined unitary of all instantaneous items in gate g (identity
    /// if the gate has segments; only meaningful for instantaneous gates).
    pub fn gate_instantaneous_unitary(&self, g: usize) -> CMatrix {
        let mut u = CMatrix::identity(self.dim, self.dim);
        for item in &self.items[self.boundaries[g]..self.boundaries[g + 1]] {
            if let Item::Gate(gate) = item {
                u = &gate.unitary * u;
            }
        }
        u
    }

    /// Concatenate sequences in order.
    ///
    /// All inputs must share the dimension and the channel list (labels in
    /// the same order). With [`ConcatBoundaries::OnePerSequence`] each input
    /// becomes one gate named by joining its labels; with
    /// [`ConcatBoundaries::Preserve`] the inputs' partitions are kept.
    pub fn concatenate(
        sequences: &[PulseSequence],
        mode: ConcatBoundaries,
    ) -> Result<PulseSequence, Error> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::InvalidSequence("cannot concatenate zero sequences".into()))?;
        for seq in &sequences[1..] {
            if seq.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    context: "concatenate",
                    expected: first.dim,
                    got: seq.dim,
                });
            }
            if seq.channels.len() != first.channels.len()
                || seq
                    .channels
                    .iter()
                    .zip(&first.channels)
                    .any(|(a, b)| a.label != b.label)
            {
                let left: Vec<_> = first.channels.iter().map(|c| c.label.as_str()).collect();
                let right: Vec<_> = seq.channels.iter().map(|c| c.label.as_str()).collect();
                return Err(Error::ChannelMismatch(format!(
                    "expected channels {left:?}, got {right:?}"
                )));
            }
        }
        let mut items = Vec::new();
        let mut boundaries = vec![0usize];
        let mut labels = Vec::new();
        for seq in sequences {
            let offset = items.len();
            items.extend(seq.items.iter().cloned());
            match mode {
                ConcatBoundaries::OnePerSequence => {
                    boundaries.push(items.len());
                    labels.push(seq.gate_labels.join("+"));
                }
                ConcatBoundaries::Preserve => {
                    for &b in &seq.boundaries[1..] {
                        boundaries.push(offset + b);
                    }
                    labels.extend(seq.gate_labels.iter().cloned());
                }
            }
        }
        PulseSequence::from_parts(
            first.dim,
            items,
            first.channels.clone(),
            boundaries,
            labels,
        )
    }

    /// Insert an instantaneous unitary at time `t`, splitting the segment
    /// containing `t` if it falls strictly inside one. Gate boundaries and
    /// the physics of every segment are preserved.
    pub fn insert_instantaneous(&self, t: f64, unitary: CMatrix) -> Result<PulseSequence, Error> {
        let tau = self.total_duration();
        if !(0.0..=tau).contains(&t) {
            return Err(Error::TimeOutOfRange { t, tau });
        }
        let times = self.item_times();
        // position after the last item ending at or before t, splitting when
        // t falls inside a segment
        let mut new_items: Vec<Item> = Vec::with_capacity(self.items.len() + 2);
        let mut new_boundaries = vec![0usize];
        let mut inserted = false;
        let mut boundary_iter = self.boundaries.iter().skip(1).peekable();
        for (idx, item) in self.items.iter().enumerate() {
            let (start, end) = (times[idx], times[idx + 1]);
            if !inserted && t >= start && t < end {
                if let Item::Segment(seg) = item {
                    if t > start {
                        let mut left = seg.clone();
                        left.duration = t - start;
                        let mut right = seg.clone();
                        right.duration = end - t;
                        new_items.push(Item::Segment(left));
                        new_items.push(Item::Gate(InstantaneousGate {
                            unitary: unitary.clone(),
                        }));
                        new_items.push(Item::Segment(right));
                    } else {
                        new_items.push(Item::Gate(InstantaneousGate {
                            unitary: unitary.clone(),
                        }));
                        new_items.push(item.clone());
                    }
                    inserted = true;
                } else {
                    new_items.push(item.clone());
                }
            } else {
                new_items.push(item.clone());
            }
            while let Some(&&b) = boundary_iter.peek() {
                if b == idx + 1 {
                    new_boundaries.push(new_items.len());
                    boundary_iter.next();
                } else {
                    break;
                }
            }
        }
        if !inserted {
            // t == τ: append at the very end (inside the last gate)
            new_items.push(Item::Gate(InstantaneousGate { unitary }));
            *new_boundaries.last_mut().unwrap() = new_items.len();
        }
        PulseSequence::from_parts(
            self.dim,
            new_items,
            self.channels.clone(),
            new_boundaries,
            self.gate_labels.clone(),
        )
    }
}

/// Convenience constructor for an identity (idle) segment.
pub fn idle_segment(dim: usize, duration: f64, noise_operators: Vec<CMatrix>) -> Segment {
    Segment {
        duration,
        hamiltonian: CMatrix::zeros(dim, dim),
        noise_operators,
    }
}

/// The single-qubit Pauli matrices as dense operators (unnormalized).
pub fn pauli_matrix(label: crate::basis::PauliLabel) -> CMatrix {
    use crate::basis::PauliLabel as L;
    let (a, b, c, d) = match label {
        L::I => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)),
        L::X => ((0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)),
        L::Y => ((0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)),
        L::Z => ((1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)),
    };
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(a.0, a.1),
            C64::new(b.0, b.1),
            C64::new(c.0, c.1),
            C64::new(d.0, d.1),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PauliLabel;

    fn z_channel() -> NoiseChannel {
        NoiseChannel::new("z", SpectralDensity::white(1.0).unwrap())
    }

    fn idle_seq(tau: f64) -> PulseSequence {
        let seg = idle_segment(2, tau, vec![pauli_matrix(PauliLabel::Z)]);
        PulseSequence::single_gate(2, vec![Item::Segment(seg)], vec![z_channel()], "idle")
            .unwrap()
    }

    fn pi_x_gate() -> InstantaneousGate {
        // exp(-i π X / 2) = -i X
        let x = pauli_matrix(PauliLabel::X);
        InstantaneousGate {
            unitary: x * C64::new(0.0, -1.0),
        }
    }

    #[test]
    fn total_duration_sums_segments() {
        assert!((idle_seq(1.0).total_duration() - 1.0).abs() < 1e-15);
        let z = pauli_matrix(PauliLabel::Z);
        let echo = PulseSequence::from_parts(
            2,
            vec![
                Item::Segment(idle_segment(2, 0.5, vec![z.clone()])),
                Item::Gate(pi_x_gate()),
                Item::Segment(idle_segment(2, 0.5, vec![z.clone()])),
            ],
            vec![z_channel()],
            vec![0, 1, 2, 3],
            vec!["idle_1".into(), "pi_x".into(), "idle_2".into()],
        )
        .unwrap();
        assert!((echo.total_duration() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_sequence_rejected() {
        let err = PulseSequence::from_parts(2, vec![], vec![z_channel()], vec![0, 0], vec![])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidSequence(_)));
    }

    #[test]
    fn spin_echo_boundaries() {
        let z = pauli_matrix(PauliLabel::Z);
        let echo = PulseSequence::from_parts(
            2,
            vec![
                Item::Segment(idle_segment(2, 1.0, vec![z.clone()])),
                Item::Gate(pi_x_gate()),
                Item::Segment(idle_segment(2, 1.0, vec![z.clone()])),
            ],
            vec![z_channel()],
            vec![0, 1, 2, 3],
            vec!["idle_1".into(), "pi_x".into(), "idle_2".into()],
        )
        .unwrap();
        assert_eq!(echo.gate_count(), 3);
        let times = echo.boundary_times();
        assert_eq!(times.len(), 4);
        assert!((times[0] - 0.0).abs() < 1e-15);
        assert!((times[1] - 1.0).abs() < 1e-15);
        assert!((times[2] - 1.0).abs() < 1e-15);
        assert!((times[3] - 2.0).abs() < 1e-15);
        assert!((times[3] - echo.total_duration()).abs() < 1e-14);
    }

    #[test]
    fn concatenate_single_is_identity() {
        let seq = idle_seq(1.0);
        let out = PulseSequence::concatenate(&[seq.clone()], ConcatBoundaries::OnePerSequence)
            .unwrap();
        assert_eq!(out.gate_count(), 1);
        assert_eq!(out.items().len(), seq.items().len());
        assert!((out.total_duration() - seq.total_duration()).abs() < 1e-15);
    }

    #[test]
    fn concatenate_rejects_channel_mismatch() {
        let a = idle_seq(1.0);
        let other = NoiseChannel::new("x", SpectralDensity::white(1.0).unwrap());
        let seg = idle_segment(2, 1.0, vec![pauli_matrix(PauliLabel::X)]);
        let b = PulseSequence::single_gate(2, vec![Item::Segment(seg)], vec![other], "idle")
            .unwrap();
        let err =
            PulseSequence::concatenate(&[a, b], ConcatBoundaries::OnePerSequence).unwrap_err();
        match err {
            Error::ChannelMismatch(msg) => {
                assert!(msg.contains('z') && msg.contains('x'), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn concatenation_is_associative() {
        let a = idle_seq(0.5);
        let b = idle_seq(0.25);
        let c = idle_seq(0.75);
        let bc =
            PulseSequence::concatenate(&[b.clone(), c.clone()], ConcatBoundaries::OnePerSequence)
                .unwrap();
        let left =
            PulseSequence::concatenate(&[a.clone(), bc], ConcatBoundaries::Preserve).unwrap();
        let ab =
            PulseSequence::concatenate(&[a.clone(), b.clone()], ConcatBoundaries::OnePerSequence)
                .unwrap();
        let right =
            PulseSequence::concatenate(&[ab, c.clone()], ConcatBoundaries::Preserve).unwrap();
        assert_eq!(left.items().len(), right.items().len());
        assert_eq!(left.boundary_times(), right.boundary_times());
    }

    #[test]
    fn insert_instantaneous_splits_segment() {
        let seq = idle_seq(2.0);
        let split = seq
            .insert_instantaneous(0.5, pi_x_gate().unitary)
            .unwrap();
        assert_eq!(split.items().len(), 3);
        assert_eq!(split.gate_count(), 1);
        assert!((split.total_duration() - 2.0).abs() < 1e-15);
        let times = split.item_times();
        assert!((times[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn insert_preserves_gate_boundaries() {
        let z = pauli_matrix(PauliLabel::Z);
        let two = PulseSequence::from_parts(
            2,
            vec![
                Item::Segment(idle_segment(2, 1.0, vec![z.clone()])),
                Item::Segment(idle_segment(2, 1.0, vec![z.clone()])),
            ],
            vec![z_channel()],
            vec![0, 1, 2],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let split = two.insert_instantaneous(1.5, pi_x_gate().unitary).unwrap();
        assert_eq!(split.gate_count(), 2);
        let times = split.boundary_times();
        assert!((times[1] - 1.0).abs() < 1e-15);
        assert!((times[2] - 2.0).abs() < 1e-15);
    }
}
