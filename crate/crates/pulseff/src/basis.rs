//! Orthonormal Hermitian operator basis built from Pauli strings.
//!
//! Every expansion in this crate uses the *normalized* n-qubit Pauli basis:
//! the tensor products of `{I, X, Y, Z}` divided by `√d` with `d = 2^n`, so
//! that `tr(σ_k σ_l) = δ_kl`. Much of the filter-function literature works
//! with unnormalized Paulis; all formulas downstream of this module assume
//! the normalized convention, which shifts constant prefactors relative to
//! those references.
//!
//! Elements are ordered lexicographically in `(I, X, Y, Z)` per qubit with
//! the all-identity string first, so element 0 is `I/√d` and basis indices
//! are reproducible across runs and output files.

use crate::error::Error;
use crate::{CMatrix, C64};
use nalgebra::DVector;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }

    /// Parse a single label character (case-insensitive).
    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliLabel::I),
            'X' => Some(PauliLabel::X),
            'Y' => Some(PauliLabel::Y),
            'Z' => Some(PauliLabel::Z),
            _ => None,
        }
    }
}

/// A tensor product of single-qubit Paulis, e.g. `XIZ` on three qubits.
///
/// The first label acts on the most significant qubit of the computational
/// basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<PauliLabel>,
}

impl PauliString {
    pub fn new(labels: Vec<PauliLabel>) -> Result<Self, Error> {
        if labels.is_empty() {
            return Err(Error::InvalidSequence(
                "Pauli string must have at least one label".into(),
            ));
        }
        Ok(Self { labels })
    }

    /// Parse from a label string like `"XIZ"`.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let labels = s
            .chars()
            .map(|c| {
                PauliLabel::from_char(c).ok_or_else(|| Error::Parse {
                    path: s.to_string(),
                    message: format!("invalid Pauli label '{c}'"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(labels)
    }

    pub fn qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[PauliLabel] {
        &self.labels
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&l| l == PauliLabel::I)
    }

    /// Lexicographic index in the `(I, X, Y, Z)` ordering (base-4 digits,
    /// first qubit most significant).
    pub fn index(&self) -> usize {
        self.labels
            .iter()
            .fold(0, |acc, &l| acc * 4 + l as usize)
    }

    /// Dense unnormalized matrix representation, dimension `2^n`.
    pub fn matrix(&self) -> CMatrix {
        let sparse = SparsePauli::from_labels(&self.labels, 1.0);
        sparse.to_dense()
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.labels {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

/// Sparse form of a (scaled) Pauli string: one nonzero entry per column.
///
/// Column `c` holds `col_vals[c]` at row `c ^ xmask`.
#[derive(Debug, Clone)]
struct SparsePauli {
    xmask: usize,
    col_vals: Vec<C64>,
}

impl SparsePauli {
    fn from_labels(labels: &[PauliLabel], scale: f64) -> Self {
        let n = labels.len();
        let d = 1usize << n;
        let mut xmask = 0usize;
        for (q, &l) in labels.iter().enumerate() {
            if matches!(l, PauliLabel::X | PauliLabel::Y) {
                // qubit 0 is the most significant bit
                xmask |= 1 << (n - 1 - q);
            }
        }
        let mut col_vals = vec![C64::new(scale, 0.0); d];
        for (col, val) in col_vals.iter_mut().enumerate() {
            for (q, &l) in labels.iter().enumerate() {
                let bit = (col >> (n - 1 - q)) & 1;
                let factor = match (l, bit) {
                    (PauliLabel::I, _) | (PauliLabel::X, _) => C64::new(1.0, 0.0),
                    (PauliLabel::Y, 0) => C64::new(0.0, 1.0),
                    (PauliLabel::Y, _) => C64::new(0.0, -1.0),
                    (PauliLabel::Z, 0) => C64::new(1.0, 0.0),
                    (PauliLabel::Z, _) => C64::new(-1.0, 0.0),
                };
                *val *= factor;
            }
        }
        Self { xmask, col_vals }
    }

    fn dim(&self) -> usize {
        self.col_vals.len()
    }

    fn to_dense(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for c in 0..d {
            m[(c ^ self.xmask, c)] = self.col_vals[c];
        }
        m
    }

    /// `tr(a · P)` using the single nonzero entry per column of `P`.
    fn trace_with(&self, a: &CMatrix) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..self.dim() {
            acc += a[(c, c ^ self.xmask)] * self.col_vals[c];
        }
        acc
    }
}

/// Largest supported qubit count for [`OperatorBasis::pauli`].
pub const MAX_QUBITS: usize = 5;

/// The orthonormal Hermitian basis `{σ_k}` with `tr(σ_k σ_l) = δ_kl`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    n: usize,
    d: usize,
    labels: Vec<PauliString>,
    elements: Vec<CMatrix>,
    sparse: Vec<SparsePauli>,
}

impl OperatorBasis {
    /// Build the normalized n-qubit Pauli basis (`d² = 4^n` elements).
    pub fn pauli(n: usize) -> Result<Self, Error> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        let d = 1usize << n;
        let scale = 1.0 / (d as f64).sqrt();
        let count = d * d;
        let mut labels = Vec::with_capacity(count);
        let mut elements = Vec::with_capacity(count);
        let mut sparse = Vec::with_capacity(count);
        for k in 0..count {
            let mut ls = vec![PauliLabel::I; n];
            let mut rem = k;
            for q in (0..n).rev() {
                ls[q] = PauliLabel::ALL[rem % 4];
                rem /= 4;
            }
            let sp = SparsePauli::from_labels(&ls, scale);
            elements.push(sp.to_dense());
            sparse.push(sp);
            labels.push(PauliString { labels: ls });
        }
        Ok(Self {
            n,
            d,
            labels,
            elements,
            sparse,
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Hilbert-space dimension d.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of basis elements, d².
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The normalized element `σ_k` as a dense matrix.
    pub fn element(&self, k: usize) -> &CMatrix {
        &self.elements[k]
    }

    pub fn label(&self, k: usize) -> &PauliString {
        &self.labels[k]
    }

    pub fn labels(&self) -> &[PauliString] {
        &self.labels
    }

    /// `tr(a σ_k)` for arbitrary (not necessarily Hermitian) `a`.
    pub fn coefficient(&self, a: &CMatrix, k: usize) -> C64 {
        self.sparse[k].trace_with(a)
    }

    /// All coefficients `tr(a σ_k)` of an arbitrary matrix.
    pub fn coefficients(&self, a: &CMatrix) -> Vec<C64> {
        self.sparse.iter().map(|sp| sp.trace_with(a)).collect()
    }

    /// Reassemble `Σ_k c_k σ_k` from complex coefficients.
    pub fn reconstruct_complex(&self, coeffs: &[C64]) -> CMatrix {
        assert_eq!(coeffs.len(), self.len(), "coefficient count");
        let mut m = CMatrix::zeros(self.d, self.d);
        for (sp, &c) in self.sparse.iter().zip(coeffs) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for col in 0..self.d {
                m[(col ^ sp.xmask, col)] += c * sp.col_vals[col];
            }
        }
        m
    }

    /// Reassemble a Hermitian operator from real coefficients.
    pub fn reconstruct(&self, coeffs: &DVector<f64>) -> CMatrix {
        let complex: Vec<C64> = coeffs.iter().map(|&c| C64::new(c, 0.0)).collect();
        self.reconstruct_complex(&complex)
    }

    /// Transfer matrix of the conjugation `M ↦ U† M U` in coefficient space.
    ///
    /// Returns the real d²×d² matrix `T` with `T[k][l] = tr(U† σ_l U σ_k)`,
    /// so that coefficients transform as `c' = T c`. Orthogonal for unitary
    /// `U` since conjugation preserves the trace inner product.
    pub fn conjugation_transfer_matrix(&self, u: &CMatrix) -> nalgebra::DMatrix<f64> {
        let m = self.len();
        let mut t = nalgebra::DMatrix::<f64>::zeros(m, m);
        let u_dag = u.adjoint();
        for l in 0..m {
            let rotated = &u_dag * self.element(l) * u;
            for k in 0..m {
                t[(k, l)] = self.sparse[k].trace_with(&rotated).re;
            }
        }
        t
    }
}

/// Max-entry norm of the anti-Hermitian part `(a − a†)`.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let diff = a - a.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Expand a Hermitian operator in the basis: `c_k = tr(op σ_k)`.
///
/// The coefficients of a Hermitian operator in a Hermitian basis are real;
/// inputs whose anti-Hermitian part exceeds `1e-10` are rejected.
pub fn expand(operator: &CMatrix, basis: &OperatorBasis) -> Result<DVector<f64>, Error> {
    if operator.nrows() != basis.dim() || operator.ncols() != basis.dim() {
        return Err(Error::DimensionMismatch {
            context: "expand",
            expected: basis.dim(),
            got: operator.nrows(),
        });
    }
    let dev = hermitian_deviation(operator);
    if dev > 1e-10 {
        return Err(Error::NonHermitian {
            context: "expand",
            norm: dev,
        });
    }
    let coeffs = basis.coefficients(operator);
    Ok(DVector::from_iterator(coeffs.len(), coeffs.iter().map(|c| c.re)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    fn pauli_x() -> CMatrix {
        dmatrix![
            C64::new(0.0, 0.0), C64::new(1.0, 0.0);
            C64::new(1.0, 0.0), C64::new(0.0, 0.0);
        ]
    }

    fn pauli_z() -> CMatrix {
        dmatrix![
            C64::new(1.0, 0.0), C64::new(0.0, 0.0);
            C64::new(0.0, 0.0), C64::new(-1.0, 0.0);
        ]
    }

    #[test]
    fn single_qubit_basis_layout() {
        let basis = OperatorBasis::pauli(1).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(basis.dim(), 2);
        let sqrt2inv = 1.0 / 2f64.sqrt();
        // element 0 = I/√2
        assert!((basis.element(0)[(0, 0)].re - sqrt2inv).abs() < 1e-15);
        assert!((basis.element(0)[(1, 1)].re - sqrt2inv).abs() < 1e-15);
        // element 3 = Z/√2, unit norm
        assert!((basis.element(3)[(1, 1)].re + sqrt2inv).abs() < 1e-15);
        let z = basis.element(3);
        let norm = (z * z).trace();
        assert!((norm.re - 1.0).abs() < 1e-12);
        assert_eq!(basis.label(0).to_string(), "I");
        assert_eq!(basis.label(3).to_string(), "Z");
    }

    #[test]
    fn two_qubit_orthonormality() {
        let basis = OperatorBasis::pauli(2).unwrap();
        assert_eq!(basis.len(), 16);
        for k in 0..16 {
            for l in 0..16 {
                let ip = (basis.element(k) * basis.element(l)).trace();
                let expected = if k == l { 1.0 } else { 0.0 };
                assert!(
                    (ip.re - expected).abs() < 1e-12 && ip.im.abs() < 1e-12,
                    "tr(σ_{k} σ_{l}) = {ip}"
                );
            }
        }
    }

    #[test]
    fn expand_x_in_single_qubit_basis() {
        let basis = OperatorBasis::pauli(1).unwrap();
        let coeffs = expand(&pauli_x(), &basis).unwrap();
        let sqrt2 = 2f64.sqrt();
        assert!((coeffs[1] - sqrt2).abs() < 1e-12);
        for k in [0, 2, 3] {
            assert!(coeffs[k].abs() < 1e-12);
        }
    }

    #[test]
    fn expand_identity_and_z() {
        let basis = OperatorBasis::pauli(1).unwrap();
        let ident = CMatrix::identity(2, 2);
        let coeffs = expand(&ident, &basis).unwrap();
        let sqrt2 = 2f64.sqrt();
        assert!((coeffs[0] - sqrt2).abs() < 1e-12);
        assert!(coeffs[1].abs() < 1e-12 && coeffs[2].abs() < 1e-12 && coeffs[3].abs() < 1e-12);

        let coeffs = expand(&pauli_z(), &basis).unwrap();
        assert!((coeffs[3] - sqrt2).abs() < 1e-12);
        assert!(coeffs[0].abs() < 1e-12);
    }

    #[test]
    fn expand_zero_matrix() {
        let basis = OperatorBasis::pauli(2).unwrap();
        let zero = CMatrix::zeros(4, 4);
        let coeffs = expand(&zero, &basis).unwrap();
        assert!(coeffs.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn expand_rejects_non_hermitian() {
        let basis = OperatorBasis::pauli(1).unwrap();
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let err = expand(&m, &basis).unwrap_err();
        match err {
            Error::NonHermitian { norm, .. } => assert!(norm > 0.5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn capacity_error_out_of_range() {
        assert!(matches!(
            OperatorBasis::pauli(0),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            OperatorBasis::pauli(MAX_QUBITS + 1),
            Err(Error::Capacity { .. })
        ));
        assert!(OperatorBasis::pauli(4).is_ok());
    }

    #[test]
    fn sparse_matches_dense_trace() {
        let basis = OperatorBasis::pauli(2).unwrap();
        let mut a = CMatrix::zeros(4, 4);
        for r in 0..4 {
            for c in 0..4 {
                a[(r, c)] = C64::new((r * 4 + c) as f64, (r as f64) - (c as f64));
            }
        }
        for k in 0..16 {
            let dense = (&a * basis.element(k)).trace();
            let sparse = basis.coefficient(&a, k);
            assert!((dense - sparse).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_transfer_matrix_is_orthogonal() {
        let basis = OperatorBasis::pauli(1).unwrap();
        // U = exp(-i π X / 4), a √X rotation
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        let u = dmatrix![
            C64::new(inv_sqrt2, 0.0), C64::new(0.0, -inv_sqrt2);
            C64::new(0.0, -inv_sqrt2), C64::new(inv_sqrt2, 0.0);
        ];
        let t = basis.conjugation_transfer_matrix(&u);
        let product = &t * t.transpose();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((product[(r, c)] - expected).abs() < 1e-12);
            }
        }
    }

    fn random_hermitian(n_qubits: usize, seed: u64) -> CMatrix {
        use rand::{Rng, SeedableRng};
        let d = 1usize << n_qubits;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        herm
    }

    proptest! {
        #[test]
        fn round_trip_random_hermitian(n in 1usize..=3, seed in 0u64..1000) {
            let basis = OperatorBasis::pauli(n).unwrap();
            let h = random_hermitian(n, seed);
            let coeffs = expand(&h, &basis).unwrap();
            let back = basis.reconstruct(&coeffs);
            let err = (&h - &back).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10);
        }

        #[test]
        fn expansion_coefficients_real(n in 1usize..=3, seed in 0u64..1000) {
            let basis = OperatorBasis::pauli(n).unwrap();
            let h = random_hermitian(n, seed);
            let raw = basis.coefficients(&h);
            for c in raw {
                prop_assert!(c.im.abs() < 1e-12);
            }
        }

        #[test]
        fn orthonormality_random_pairs(n in 1usize..=3, k in 0usize..64, l in 0usize..64) {
            let basis = OperatorBasis::pauli(n).unwrap();
            let k = k % basis.len();
            let l = l % basis.len();
            let ip = (basis.element(k) * basis.element(l)).trace();
            let expected = if k == l { 1.0 } else { 0.0 };
            prop_assert!((ip.re - expected).abs() < 1e-12);
            prop_assert!(ip.im.abs() < 1e-12);
        }
    }
}
