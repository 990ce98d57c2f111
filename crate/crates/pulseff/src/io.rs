//! Data-file interfaces: CSV exports and tabulated-spectrum loading.
//!
//! All floats are written with Rust's shortest round-trip formatting, so
//! files re-read to bit-identical values.

use crate::basis::OperatorBasis;
use crate::control_matrix::ControlMatrix;
use crate::error::Error;
use crate::filter_functions::{CorrelationFF, FidelityFF};
use crate::process::{CorrelationInfidelityMatrix, DecayAmplitudes, ProcessMap};
use crate::spectrum::SpectralDensity;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Load a tabulated spectrum from two-column text `(ω, S)`.
///
/// Lines starting with `#` and blank lines are skipped. Frequencies are
/// angular, values two-sided PSD amplitudes.
pub fn load_tabulated_spectrum(path: &Path) -> Result<SpectralDensity, Error> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut omegas = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let parse = |s: Option<&str>| -> Result<f64, Error> {
            s.ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                message: format!("line {}: expected two columns", lineno + 1),
            })?
            .parse::<f64>()
            .map_err(|e| Error::Parse {
                path: path.display().to_string(),
                message: format!("line {}: {e}", lineno + 1),
            })
        };
        omegas.push(parse(fields.next())?);
        values.push(parse(fields.next())?);
    }
    SpectralDensity::tabulated(omegas, values)
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>, Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(std::fs::File::create(path)?))
}

/// Dump a control matrix: columns `omega`, then `re(B_<channel>_<k>)`,
/// `im(B_<channel>_<k>)` per channel and basis element, with the basis
/// ordering recorded in the header.
pub fn write_control_matrix_csv(
    cm: &ControlMatrix,
    basis: &OperatorBasis,
    path: &Path,
) -> Result<(), Error> {
    let mut w = create(path)?;
    let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
    writeln!(w, "# control matrix, duration = {}", cm.duration())?;
    writeln!(w, "# basis order: {}", labels.join(" "))?;
    writeln!(w, "# channels: {}", cm.channel_labels().join(" "))?;
    write!(w, "omega")?;
    for ch in cm.channel_labels() {
        for l in &labels {
            write!(w, ",re_{ch}_{l},im_{ch}_{l}")?;
        }
    }
    writeln!(w)?;
    for (f, &omega) in cm.grid().values().iter().enumerate() {
        write!(w, "{omega}")?;
        for alpha in 0..cm.num_channels() {
            let col = cm.channel_values(alpha).column(f);
            for k in 0..basis.len() {
                write!(w, ",{},{}", col[k].re, col[k].im)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Columns `omega`, then `F_<channel>` per channel.
pub fn write_fidelity_ff_csv(ff: &FidelityFF, path: &Path) -> Result<(), Error> {
    let mut w = create(path)?;
    write!(w, "omega")?;
    for ch in &ff.channels {
        write!(w, ",F_{ch}")?;
    }
    writeln!(w)?;
    for (f, &omega) in ff.grid.values().iter().enumerate() {
        write!(w, "{omega}")?;
        for vals in &ff.values {
            write!(w, ",{}", vals[f])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Columns `omega`, then `re`/`im` of `F_<channel>_<g>_<g'>` for every
/// channel and gate pair, gates named by their labels.
pub fn write_correlation_ff_csv(cff: &CorrelationFF, path: &Path) -> Result<(), Error> {
    let mut w = create(path)?;
    let gates = cff.gate_count();
    writeln!(w, "# gates: {}", cff.gate_labels.join(" "))?;
    write!(w, "omega")?;
    for ch in &cff.channels {
        for g in 0..gates {
            for gp in 0..gates {
                let (a, b) = (&cff.gate_labels[g], &cff.gate_labels[gp]);
                write!(w, ",re_F_{ch}_{a}_{b},im_F_{ch}_{a}_{b}")?;
            }
        }
    }
    writeln!(w)?;
    for (f, &omega) in cff.grid.values().iter().enumerate() {
        write!(w, "{omega}")?;
        for alpha in 0..cff.channels.len() {
            for g in 0..gates {
                for gp in 0..gates {
                    let v = cff.value(alpha, g, gp, f);
                    write!(w, ",{},{}", v.re, v.im)?;
                }
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Labeled G×G matrix: first row and column carry the gate labels.
pub fn write_correlation_infidelities_csv(
    ci: &CorrelationInfidelityMatrix,
    path: &Path,
) -> Result<(), Error> {
    let mut w = create(path)?;
    write!(w, "gate")?;
    for l in &ci.gate_labels {
        write!(w, ",{l}")?;
    }
    writeln!(w)?;
    for (g, l) in ci.gate_labels.iter().enumerate() {
        write!(w, "{l}")?;
        for gp in 0..ci.gate_count() {
            write!(w, ",{}", ci.values[(g, gp)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// One labeled d²×d² matrix per channel, sections separated by comments.
pub fn write_decay_amplitudes_csv(
    gamma: &DecayAmplitudes,
    basis: &OperatorBasis,
    path: &Path,
) -> Result<(), Error> {
    let mut w = create(path)?;
    let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
    for (ch, g) in gamma.channels.iter().zip(&gamma.gammas) {
        writeln!(w, "# channel: {ch}")?;
        write!(w, "basis")?;
        for l in &labels {
            write!(w, ",{l}")?;
        }
        writeln!(w)?;
        for (k, l) in labels.iter().enumerate() {
            write!(w, "{l}")?;
            for m in 0..labels.len() {
                write!(w, ",{}", g[(k, m)])?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// The transfer matrix with basis labels on rows and columns.
pub fn write_transfer_matrix_csv(
    map: &ProcessMap,
    basis: &OperatorBasis,
    path: &Path,
) -> Result<(), Error> {
    let mut w = create(path)?;
    let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
    write!(w, "basis")?;
    for l in &labels {
        write!(w, ",{l}")?;
    }
    writeln!(w)?;
    for (k, l) in labels.iter().enumerate() {
        write!(w, "{l}")?;
        for m in 0..labels.len() {
            write!(w, ",{}", map.transfer[(k, m)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Two-column text `(ω, S_est)` for periodogram dumps.
pub fn write_periodogram(points: &[(f64, f64)], path: &Path) -> Result<(), Error> {
    let mut w = create(path)?;
    writeln!(w, "# omega  S_estimate")?;
    for &(omega, s) in points {
        writeln!(w, "{omega} {s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::OperatorBasis;
    use crate::control_matrix::control_matrix_freq;
    use crate::filter_functions::fidelity_ff;
    use crate::pulse::{idle_segment, pauli_matrix, Item, NoiseChannel, PulseSequence};
    use crate::spectrum::FrequencyGrid;

    #[test]
    fn tabulated_round_trip_through_file() {
        let dir = std::env::temp_dir().join("pulseff_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("spectrum.txt");
        std::fs::write(
            &path,
            "# two-sided PSD\n0.1 10.0\n1.0 1.0\n\n10.0 0.1\n",
        )
        .unwrap();
        let s = load_tabulated_spectrum(&path).unwrap();
        assert!((s.evaluate(1.0) - 1.0).abs() < 1e-12);
        assert!((s.evaluate(0.1) - 10.0).abs() < 1e-12);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn tabulated_rejects_garbage() {
        let dir = std::env::temp_dir().join("pulseff_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.txt");
        std::fs::write(&path, "0.1 ten\n").unwrap();
        assert!(matches!(
            load_tabulated_spectrum(&path),
            Err(Error::Parse { .. })
        ));
        std::fs::write(&path, "0.1\n").unwrap();
        assert!(matches!(
            load_tabulated_spectrum(&path),
            Err(Error::Parse { .. })
        ));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn csv_files_round_trip_numbers() {
        let basis = OperatorBasis::pauli(1).unwrap();
        let grid = FrequencyGrid::logarithmic(1e-2, 1e2, 20).unwrap();
        let seg = idle_segment(2, 1.0, vec![pauli_matrix(crate::basis::PauliLabel::Z)]);
        let seq = PulseSequence::single_gate(
            2,
            vec![Item::Segment(seg)],
            vec![NoiseChannel::new(
                "z",
                SpectralDensity::white(1.0).unwrap(),
            )],
            "idle",
        )
        .unwrap();
        let cm = control_matrix_freq(&seq, &basis, &grid).unwrap();
        let ff = fidelity_ff(&cm);
        let dir = std::env::temp_dir().join("pulseff_io_test");
        let path = dir.join("ff.csv");
        write_fidelity_ff_csv(&ff, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "omega,F_z");
        for (f, line) in lines.enumerate() {
            let mut cols = line.split(',');
            let omega: f64 = cols.next().unwrap().parse().unwrap();
            let val: f64 = cols.next().unwrap().parse().unwrap();
            assert_eq!(omega.to_bits(), grid.values()[f].to_bits());
            assert_eq!(val.to_bits(), ff.values[0][f].to_bits());
        }
        std::fs::remove_file(&path).unwrap();
    }
}
