//! Two-sided power spectral densities and frequency grids.
//!
//! All spectra are two-sided with the even extension `S(-ω) = S(ω)`, in
//! angular frequency units. Quadratures elsewhere in the crate integrate
//! over ω > 0 and double the real part, which is valid because the
//! time-domain control matrix is real.

use crate::error::Error;
use crate::pulse::{Item, PulseSequence};

/// A two-sided noise power spectral density S(ω) ≥ 0.
#[derive(Debug, Clone)]
pub enum SpectralDensity {
    /// Frequency-independent spectrum S(ω) = S0.
    White { s0: f64 },
    /// Power law A/|ω|^γ between the cutoffs.
    ///
    /// Below `omega_min` the value is clamped to the plateau
    /// `A/omega_min^γ` (a modeling choice keeping evaluation finite near
    /// DC, mirroring experimental low-frequency cutoffs); above `omega_max`
    /// the spectrum is zero. The nominal variance integrates the declared
    /// support `[omega_min, omega_max]` only.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        omega_min: f64,
        omega_max: f64,
    },
    /// Tabulated samples with log-log linear interpolation, zero outside
    /// the tabulated support.
    Tabulated { omegas: Vec<f64>, values: Vec<f64> },
}

impl SpectralDensity {
    pub fn white(s0: f64) -> Result<Self, Error> {
        if !(s0 >= 0.0) || !s0.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "white amplitude must be finite and nonnegative, got {s0}"
            )));
        }
        Ok(SpectralDensity::White { s0 })
    }

    pub fn power_law(
        amplitude: f64,
        exponent: f64,
        omega_min: f64,
        omega_max: f64,
    ) -> Result<Self, Error> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "power-law amplitude must be finite and nonnegative, got {amplitude}"
            )));
        }
        if !(exponent >= 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "power-law exponent must be nonnegative, got {exponent}"
            )));
        }
        if !(omega_min > 0.0 && omega_max > omega_min) {
            return Err(Error::InvalidSpectrum(format!(
                "power-law cutoffs must satisfy 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        Ok(SpectralDensity::PowerLaw {
            amplitude,
            exponent,
            omega_min,
            omega_max,
        })
    }

    pub fn tabulated(omegas: Vec<f64>, values: Vec<f64>) -> Result<Self, Error> {
        if omegas.len() != values.len() {
            return Err(Error::InvalidSpectrum(format!(
                "{} frequencies but {} values",
                omegas.len(),
                values.len()
            )));
        }
        if omegas.len() < 2 {
            return Err(Error::InvalidSpectrum(
                "tabulated spectrum needs at least two points".into(),
            ));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) || omegas[0] <= 0.0 {
            return Err(Error::InvalidSpectrum(
                "tabulated frequencies must be positive and strictly ascending".into(),
            ));
        }
        if values.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidSpectrum(
                "tabulated values must be finite and nonnegative".into(),
            ));
        }
        Ok(SpectralDensity::Tabulated { omegas, values })
    }

    /// Evaluate S(|ω|).
    pub fn evaluate(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self {
            SpectralDensity::White { s0 } => *s0,
            SpectralDensity::PowerLaw {
                amplitude,
                exponent,
                omega_min,
                omega_max,
            } => {
                if w > *omega_max {
                    0.0
                } else {
                    amplitude / w.max(*omega_min).powf(*exponent)
                }
            }
            SpectralDensity::Tabulated { omegas, values } => {
                if w < omegas[0] || w > *omegas.last().unwrap() {
                    return 0.0;
                }
                let idx = match omegas.binary_search_by(|x| x.partial_cmp(&w).unwrap()) {
                    Ok(i) => return values[i],
                    Err(i) => i,
                };
                let (w0, w1) = (omegas[idx - 1], omegas[idx]);
                let (s0, s1) = (values[idx - 1], values[idx]);
                if s0 <= 0.0 || s1 <= 0.0 {
                    // log-log undefined with zeros; fall back to linear
                    let f = (w - w0) / (w1 - w0);
                    return s0 + f * (s1 - s0);
                }
                let f = (w.ln() - w0.ln()) / (w1.ln() - w0.ln());
                (s0.ln() + f * (s1.ln() - s0.ln())).exp()
            }
        }
    }

    /// Noise variance σ² = (1/2π)∫S(ω)dω over both frequency signs.
    ///
    /// White spectra are only integrable with a band limit `|ω| ≤ Ω`
    /// supplied by the caller; power laws integrate analytically over their
    /// declared support; tabulated spectra integrate by the trapezoid rule
    /// in log ω over their tabulated range.
    pub fn variance(&self, band_limit: Option<f64>) -> Result<f64, Error> {
        use std::f64::consts::PI;
        match self {
            SpectralDensity::White { s0 } => {
                let band = band_limit.ok_or_else(|| {
                    Error::NotIntegrable(
                        "white spectrum needs an explicit band limit for its variance".into(),
                    )
                })?;
                if !(band > 0.0) {
                    return Err(Error::NotIntegrable(format!(
                        "band limit must be positive, got {band}"
                    )));
                }
                Ok(s0 * band / PI)
            }
            SpectralDensity::PowerLaw {
                amplitude,
                exponent,
                omega_min,
                omega_max,
            } => {
                let integral = if (*exponent - 1.0).abs() < 1e-12 {
                    amplitude * (omega_max / omega_min).ln()
                } else {
                    amplitude * (omega_max.powf(1.0 - exponent) - omega_min.powf(1.0 - exponent))
                        / (1.0 - exponent)
                };
                Ok(integral / PI)
            }
            SpectralDensity::Tabulated { omegas, values } => {
                // trapezoid in u = ln ω: ∫S dω = ∫ S ω du
                let mut integral = 0.0;
                for i in 1..omegas.len() {
                    let du = (omegas[i] / omegas[i - 1]).ln();
                    let f0 = values[i - 1] * omegas[i - 1];
                    let f1 = values[i] * omegas[i];
                    integral += 0.5 * (f0 + f1) * du;
                }
                Ok(integral / PI)
            }
        }
    }
}

/// A strictly positive, strictly ascending frequency grid for quadratures
/// and control-matrix evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    values: Vec<f64>,
}

impl FrequencyGrid {
    pub fn from_values(values: Vec<f64>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid("grid needs at least two points".into()));
        }
        if values[0] <= 0.0 {
            return Err(Error::InvalidGrid(
                "grid frequencies must be strictly positive".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "grid frequencies must be strictly ascending".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn linear(omega_min: f64, omega_max: f64, count: usize) -> Result<Self, Error> {
        if count < 2 {
            return Err(Error::InvalidGrid("grid needs at least two points".into()));
        }
        let step = (omega_max - omega_min) / (count - 1) as f64;
        let values = (0..count).map(|i| omega_min + step * i as f64).collect();
        Self::from_values(values)
    }

    pub fn logarithmic(omega_min: f64, omega_max: f64, count: usize) -> Result<Self, Error> {
        if count < 2 {
            return Err(Error::InvalidGrid("grid needs at least two points".into()));
        }
        if omega_min <= 0.0 || omega_max <= omega_min {
            return Err(Error::InvalidGrid(format!(
                "logarithmic grid needs 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        let (lo, hi) = (omega_min.ln(), omega_max.ln());
        let step = (hi - lo) / (count - 1) as f64;
        let values = (0..count).map(|i| (lo + step * i as f64).exp()).collect();
        Self::from_values(values)
    }

    /// Default quadrature grid for a sequence of duration τ.
    ///
    /// Log-spaced over ωτ ∈ [1e-7, 1e8] at 8000 points per decade. The wide
    /// range and high density keep both the truncated 1/ω² tail of filter
    /// functions and the aliasing of their oscillatory parts below 1e-6
    /// relative in spectral integrals, which the white-noise Parseval
    /// checks rely on.
    pub fn default_for_duration(tau: f64) -> Result<Self, Error> {
        if !(tau > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "duration must be positive, got {tau}"
            )));
        }
        const DECADES: f64 = 15.0; // 1e-7 ..= 1e8
        const PER_DECADE: usize = 8000;
        let count = (DECADES * PER_DECADE as f64) as usize + 1;
        Self::logarithmic(1e-7 / tau, 1e8 / tau, count)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Per-channel noise-strength estimate ξ_α = max_g ‖B_α^{(g)}‖ σ_α τ.
#[derive(Debug, Clone)]
pub struct ChannelXi {
    pub label: String,
    /// Largest spectral norm of the channel's noise operator over segments.
    pub operator_norm: f64,
    /// Noise standard deviation σ_α.
    pub sigma: f64,
    pub xi: f64,
}

/// Noise-strength diagnostic for the perturbative expansion.
#[derive(Debug, Clone)]
pub struct XiEstimate {
    pub per_channel: Vec<ChannelXi>,
    /// Σ_α ξ_α; the expansion assumes this is ≪ 1.
    pub total: f64,
    /// Set when a noise operator varies across segments, where the
    /// max-norm generalization of ξ is only a conservative heuristic.
    pub heuristic: bool,
}

/// Spectral norm (largest |eigenvalue|) of a Hermitian operator.
fn spectral_norm(m: &crate::CMatrix) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

/// Estimate the noise strength ξ for each channel of a sequence.
///
/// `band_limit` feeds through to [`SpectralDensity::variance`] for white
/// spectra (and is ignored by the others).
pub fn xi_estimate(seq: &PulseSequence, band_limit: Option<f64>) -> Result<XiEstimate, Error> {
    let tau = seq.total_duration();
    let mut per_channel = Vec::with_capacity(seq.channels().len());
    let mut heuristic = false;
    for (alpha, channel) in seq.channels().iter().enumerate() {
        let sigma = channel.spectrum.variance(band_limit)?.sqrt();
        let mut max_norm: f64 = 0.0;
        let mut first: Option<&crate::CMatrix> = None;
        for item in seq.items() {
            if let Item::Segment(seg) = item {
                let b = &seg.noise_operators[alpha];
                match first {
                    None => first = Some(b),
                    Some(f) => {
                        if (f - b).iter().map(|z| z.norm()).fold(0.0, f64::max) > 1e-12 {
                            heuristic = true;
                        }
                    }
                }
                max_norm = max_norm.max(spectral_norm(b));
            }
        }
        per_channel.push(ChannelXi {
            label: channel.label.clone(),
            operator_norm: max_norm,
            sigma,
            xi: max_norm * sigma * tau,
        });
    }
    let total = per_channel.iter().map(|c| c.xi).sum();
    Ok(XiEstimate {
        per_channel,
        total,
        heuristic,
    })
}
