//! Task execution: compute what the config asks for and write one output
//! file per task plus a manifest.

use crate::config::RunConfig;
use anyhow::Context;
use pulseff::basis::OperatorBasis;
use pulseff::control_matrix::{control_matrix_freq, gate_control_matrices};
use pulseff::filter_functions::{correlation_ff, fidelity_ff, generalized_ff};
use pulseff::io;
use pulseff::montecarlo::{simulate_process, TrajectoryConfig};
use pulseff::process::{
    choi_eigenvalue_range, choi_matrix, correlation_infidelities, decay_amplitudes_freq, fidelity,
    process_map,
};
use pulseff::spectrum::{xi_estimate, SpectralDensity};
use serde_json::json;
use std::io::Write;
use std::path::Path;

pub struct RunOutcome {
    pub manifest_path: std::path::PathBuf,
}

pub fn run(
    cfg: &RunConfig,
    config_bytes: &[u8],
    base_dir: &Path,
    output_dir: &Path,
    seed: u64,
    threads: usize,
) -> anyhow::Result<RunOutcome> {
    std::fs::create_dir_all(output_dir)
        .with_context(|| format!("creating output directory {}", output_dir.display()))?;
    let seq = cfg.build_sequence(base_dir)?;
    let tau = seq.total_duration();
    let grid = cfg.build_grid(tau)?;
    let qubits = seq.dim().trailing_zeros() as usize;
    let basis = OperatorBasis::pauli(qubits)?;
    let spectra: Vec<SpectralDensity> = seq
        .channels()
        .iter()
        .map(|c| c.spectrum.clone())
        .collect();
    let mut warnings: Vec<String> = Vec::new();
    let mut task_entries = serde_json::Map::new();

    let xi = xi_estimate(&seq, Some(grid.max()))?;
    if xi.total > 0.5 {
        warnings.push(format!(
            "noise strength ξ = {:.3} is outside the perturbative regime",
            xi.total
        ));
    }

    let needs_cm = cfg
        .tasks
        .iter()
        .any(|t| matches!(t.as_str(), "fidelity_ff" | "generalized_ff" | "process" | "fidelity"));
    let cm = if needs_cm {
        Some(control_matrix_freq(&seq, &basis, &grid)?)
    } else {
        None
    };
    let needs_parts = cfg
        .tasks
        .iter()
        .any(|t| matches!(t.as_str(), "correlation_ff" | "correlation_infidelities"));
    let parts = if needs_parts {
        Some(gate_control_matrices(&seq, &basis, &grid)?)
    } else {
        None
    };
    let needs_gamma = cfg
        .tasks
        .iter()
        .any(|t| matches!(t.as_str(), "process" | "fidelity" | "montecarlo_check"));
    let gamma = if needs_gamma {
        let g = decay_amplitudes_freq(cm.as_ref().expect("cm computed for gamma"), &spectra)?;
        for diag in &g.diagnostics {
            if diag.tail_share > 0.01 {
                warnings.push(format!(
                    "channel '{}': {:.1}% of the spectral integral sits in the grid's last decade; extend the grid",
                    diag.label,
                    diag.tail_share * 100.0
                ));
            }
        }
        Some(g)
    } else {
        None
    };

    for task in &cfg.tasks {
        match task.as_str() {
            "fidelity_ff" => {
                let ff = fidelity_ff(cm.as_ref().unwrap());
                let file = output_dir.join("fidelity_ff.csv");
                io::write_fidelity_ff_csv(&ff, &file)?;
                task_entries.insert(task.clone(), json!({ "file": "fidelity_ff.csv" }));
            }
            "generalized_ff" => {
                let gff = generalized_ff(cm.as_ref().unwrap());
                let file = output_dir.join("generalized_ff.csv");
                write_generalized_ff_csv(&gff, &basis, &file)?;
                task_entries.insert(task.clone(), json!({ "file": "generalized_ff.csv" }));
            }
            "correlation_ff" => {
                let cff = correlation_ff(parts.as_ref().unwrap(), &basis)?;
                let file = output_dir.join("correlation_ff.csv");
                io::write_correlation_ff_csv(&cff, &file)?;
                task_entries.insert(task.clone(), json!({ "file": "correlation_ff.csv" }));
            }
            "correlation_infidelities" => {
                let cff = correlation_ff(parts.as_ref().unwrap(), &basis)?;
                let ci = correlation_infidelities(&cff, &spectra)?;
                let file = output_dir.join("correlation_infidelities.csv");
                io::write_correlation_infidelities_csv(&ci, &file)?;
                task_entries.insert(
                    task.clone(),
                    json!({
                        "file": "correlation_infidelities.csv",
                        "total_infidelity": ci.total(),
                    }),
                );
            }
            "process" => {
                let g = gamma.as_ref().unwrap();
                let map = process_map(g, &basis)?;
                io::write_transfer_matrix_csv(&map, &basis, &output_dir.join("process_transfer.csv"))?;
                io::write_decay_amplitudes_csv(g, &basis, &output_dir.join("decay_amplitudes.csv"))?;
                let choi = choi_matrix(&map, &basis);
                let (min_eig, max_eig) = choi_eigenvalue_range(&choi);
                task_entries.insert(
                    task.clone(),
                    json!({
                        "files": ["process_transfer.csv", "decay_amplitudes.csv"],
                        "choi_min_eigenvalue": min_eig,
                        "choi_max_eigenvalue": max_eig,
                    }),
                );
            }
            "fidelity" => {
                let report = fidelity(gamma.as_ref().unwrap(), seq.dim());
                let file = output_dir.join("fidelity.csv");
                let mut w = std::io::BufWriter::new(std::fs::File::create(&file)?);
                writeln!(w, "channel,infidelity")?;
                for (label, i) in &report.per_channel {
                    writeln!(w, "{label},{i}")?;
                }
                writeln!(w, "total,{}", report.infidelity)?;
                task_entries.insert(
                    task.clone(),
                    json!({
                        "file": "fidelity.csv",
                        "fidelity": report.fidelity,
                        "infidelity": report.infidelity,
                    }),
                );
            }
            "montecarlo_check" => {
                let mc_cfg = cfg.montecarlo.as_ref().expect("validated");
                let dt = mc_cfg.dt.unwrap_or(tau / 1000.0);
                let tcfg = TrajectoryConfig::new(dt, mc_cfg.trajectories, seed)?;
                let est = simulate_process(&seq, &basis, &tcfg)?;
                warnings.extend(est.warnings.iter().cloned());
                let file = output_dir.join("montecarlo.csv");
                write_montecarlo_csv(&est, &basis, &file)?;
                let i_pert = fidelity(gamma.as_ref().unwrap(), seq.dim()).infidelity;
                task_entries.insert(
                    task.clone(),
                    json!({
                        "file": "montecarlo.csv",
                        "trajectories": est.trajectories,
                        "infidelity_mc": est.infidelity,
                        "infidelity_mc_std_error": est.infidelity_std_error,
                        "infidelity_perturbative": i_pert,
                        "deviation_in_std_errors": if est.infidelity_std_error > 0.0 {
                            (est.infidelity - i_pert).abs() / est.infidelity_std_error
                        } else {
                            0.0
                        },
                    }),
                );
            }
            other => anyhow::bail!("unknown task '{other}'"),
        }
    }

    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let manifest = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "pulseff_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(config_bytes),
        "seed": seed,
        "threads": threads,
        "sequence": {
            "gates": seq.gate_count(),
            "duration": tau,
            "dimension": seq.dim(),
            "gate_labels": seq.gate_labels(),
        },
        "grid": {
            "omega_min": grid.min(),
            "omega_max": grid.max(),
            "points": grid.len(),
        },
        "xi": {
            "total": xi.total,
            "heuristic": xi.heuristic,
            "per_channel": xi.per_channel.iter().map(|c| json!({
                "label": c.label,
                "xi": c.xi,
                "sigma": c.sigma,
                "operator_norm": c.operator_norm,
            })).collect::<Vec<_>>(),
        },
        "tasks": task_entries,
        "warnings": warnings,
        "timestamp_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    let manifest_path = output_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(RunOutcome { manifest_path })
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

fn write_generalized_ff_csv(
    gff: &pulseff::filter_functions::GeneralizedFF,
    basis: &OperatorBasis,
    path: &Path,
) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
    write!(w, "omega")?;
    for ch in &gff.channels {
        for k in &labels {
            for l in &labels {
                write!(w, ",re_F_{ch}_{k}_{l},im_F_{ch}_{k}_{l}")?;
            }
        }
    }
    writeln!(w)?;
    for (f, &omega) in gff.grid.values().iter().enumerate() {
        write!(w, "{omega}")?;
        for per_freq in &gff.values {
            let mat = &per_freq[f];
            for k in 0..labels.len() {
                for l in 0..labels.len() {
                    write!(w, ",{},{}", mat[(k, l)].re, mat[(k, l)].im)?;
                }
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_montecarlo_csv(
    est: &pulseff::montecarlo::ProcessEstimate,
    basis: &OperatorBasis,
    path: &Path,
) -> anyhow::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    let labels: Vec<String> = basis.labels().iter().map(|l| l.to_string()).collect();
    writeln!(w, "# mean transfer matrix of the error process, then standard errors")?;
    writeln!(w, "# trajectories: {}", est.trajectories)?;
    write!(w, "basis")?;
    for l in &labels {
        write!(w, ",{l}")?;
    }
    writeln!(w)?;
    for (k, l) in labels.iter().enumerate() {
        write!(w, "{l}")?;
        for m in 0..labels.len() {
            write!(w, ",{}", est.mean_transfer[(k, m)])?;
        }
        writeln!(w)?;
    }
    writeln!(w, "# standard errors")?;
    for (k, l) in labels.iter().enumerate() {
        write!(w, "se_{l}")?;
        for m in 0..labels.len() {
            write!(w, ",{}", est.std_error[(k, m)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}
