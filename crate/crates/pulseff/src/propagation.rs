//! Segment propagators and cumulative propagators.
//!
//! Matrix exponentials go through a Hermitian eigendecomposition rather
//! than series methods: the eigensystem of each segment Hamiltonian is
//! needed again by the frequency-domain control-matrix integrals, so it is
//! computed once per segment and cached.

use crate::error::Error;
use crate::pulse::{Item, PulseSequence};
use crate::{CMatrix, C64};
use nalgebra::DVector;

/// Eigendecomposition `H = V diag(λ) V†` of a segment Hamiltonian.
#[derive(Debug, Clone)]
pub struct SegmentEigensystem {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

const RESIDUAL_TOL: f64 = 1e-10;

impl SegmentEigensystem {
    /// Decompose a Hermitian matrix, verifying the reconstruction residual.
    pub fn new(h: &CMatrix) -> Result<Self, Error> {
        let dev = crate::basis::hermitian_deviation(h);
        if dev > 1e-10 {
            return Err(Error::NonHermitian {
                context: "segment eigensystem",
                norm: dev,
            });
        }
        let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let eigenvalues = eig.eigenvalues;
        let eigenvectors = eig.eigenvectors;
        let scale = h.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let mut reconstructed = CMatrix::zeros(h.nrows(), h.ncols());
        for (i, &lam) in eigenvalues.iter().enumerate() {
            let col = eigenvectors.column(i);
            for r in 0..h.nrows() {
                for c in 0..h.ncols() {
                    reconstructed[(r, c)] += col[r] * col[c].conj() * C64::new(lam, 0.0);
                }
            }
        }
        let residual = (h - &reconstructed)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / scale;
        if residual > RESIDUAL_TOL {
            return Err(Error::EigenFailure { residual });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// `exp(-i H t)` from the cached decomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let d = self.eigenvalues.len();
        let phases = DVector::from_iterator(
            d,
            self.eigenvalues.iter().map(|&lam| {
                let phi = -lam * t;
                C64::new(phi.cos(), phi.sin())
            }),
        );
        let mut out = CMatrix::zeros(d, d);
        for (i, &phase) in phases.iter().enumerate() {
            let col = self.eigenvectors.column(i);
            for r in 0..d {
                let vr = col[r] * phase;
                for c in 0..d {
                    out[(r, c)] += vr * col[c].conj();
                }
            }
        }
        out
    }
}

/// `exp(-i H t)` for a Hermitian matrix without reusing the eigensystem.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix, Error> {
    Ok(SegmentEigensystem::new(h)?.propagator(t))
}

/// Propagator of a single segment, `exp(-i H_c Δt)`.
pub fn segment_propagator(seg: &crate::pulse::Segment) -> Result<CMatrix, Error> {
    expm_hermitian(&seg.hamiltonian, seg.duration)
}

/// Per-item propagators, cumulative propagators, and cached eigensystems
/// for a pulse sequence.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    /// Propagator of each item (segment exponential or gate unitary).
    pub item_propagators: Vec<CMatrix>,
    /// `cumulative[j] = P_{j-1} ⋯ P_0` with `cumulative[0] = I`; the entry
    /// at `items.len()` is the full control operation Q.
    pub cumulative: Vec<CMatrix>,
    /// Start time of each item plus the final τ.
    pub item_times: Vec<f64>,
    /// Eigensystem per item (None for instantaneous gates).
    pub eigensystems: Vec<Option<SegmentEigensystem>>,
}

impl PropagatorSet {
    /// The full control operation `Q = Q_G`.
    pub fn total(&self) -> &CMatrix {
        self.cumulative.last().unwrap()
    }

    /// Frame propagator before item `j` (`Q_{j-1}` in gate terms).
    pub fn before_item(&self, j: usize) -> &CMatrix {
        &self.cumulative[j]
    }

    /// `U_c(t)` evaluated inside the sequence: within the segment covering
    /// `t` this is `P(t - t_start) · Q_before`. At an exact boundary the
    /// convention is the end of the *earlier* segment, so instantaneous
    /// gates placed at that boundary are included only once `t` moves past
    /// it; `t = τ` returns the full control operation.
    pub fn control_unitary(&self, seq: &PulseSequence, t: f64) -> Result<CMatrix, Error> {
        let tau = *self.item_times.last().unwrap();
        if !(0.0..=tau).contains(&t) {
            return Err(Error::TimeOutOfRange { t, tau });
        }
        for (j, item) in seq.items().iter().enumerate() {
            let (start, end) = (self.item_times[j], self.item_times[j + 1]);
            if let Item::Segment(_) = item {
                if t >= start && t <= end {
                    let eig = self.eigensystems[j].as_ref().unwrap();
                    return Ok(eig.propagator(t - start) * self.before_item(j));
                }
            }
        }
        // t lands on a zero-measure point past all segments (τ of a
        // sequence ending in instantaneous gates)
        Ok(self.total().clone())
    }
}

/// Compute all item propagators and their cumulative products.
pub fn cumulative_propagators(seq: &PulseSequence) -> Result<PropagatorSet, Error> {
    let d = seq.dim();
    let mut item_propagators = Vec::with_capacity(seq.items().len());
    let mut eigensystems = Vec::with_capacity(seq.items().len());
    for item in seq.items() {
        match item {
            Item::Segment(seg) => {
                let eig = SegmentEigensystem::new(&seg.hamiltonian)?;
                item_propagators.push(eig.propagator(seg.duration));
                eigensystems.push(Some(eig));
            }
            Item::Gate(g) => {
                item_propagators.push(g.unitary.clone());
                eigensystems.push(None);
            }
        }
    }
    let mut cumulative = Vec::with_capacity(seq.items().len() + 1);
    cumulative.push(CMatrix::identity(d, d));
    for p in &item_propagators {
        let next = p * cumulative.last().unwrap();
        cumulative.push(next);
    }
    Ok(PropagatorSet {
        item_propagators,
        cumulative,
        item_times: seq.item_times(),
        eigensystems,
    })
}
