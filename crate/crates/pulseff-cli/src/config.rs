//! The TOML run-configuration format: parsing, exhaustive validation, and
//! construction of the described sequence and grid.
//!
//! Schema version 1. See the repository README for the field reference.

use pulseff::basis::PauliString;
use pulseff::circuits::{self, NoiseSpec, PiPulseMode, QftTiming};
use pulseff::pulse::{InstantaneousGate, Item, NoiseChannel, PulseSequence, Segment};
use pulseff::spectrum::{FrequencyGrid, SpectralDensity};
use pulseff::{CMatrix, C64};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

pub const ALLOWED_TASKS: [&str; 7] = [
    "fidelity_ff",
    "generalized_ff",
    "correlation_ff",
    "process",
    "fidelity",
    "correlation_infidelities",
    "montecarlo_check",
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    pub sequence: SequenceConfig,
    pub channels: Vec<ChannelConfig>,
    pub grid: GridConfig,
    pub tasks: Vec<String>,
    #[serde(default)]
    pub montecarlo: Option<MonteCarloConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub builder: String,
    /// fid: idle duration.
    #[serde(default)]
    pub tau: Option<f64>,
    /// spin_echo: idle duration per arm.
    #[serde(default)]
    pub tau_idle: Option<f64>,
    /// spin_echo: "instantaneous" or a finite-pulse table.
    #[serde(default)]
    pub pi_pulse: Option<PiPulseConfig>,
    /// qft: insert echo pulses on the fourth qubit.
    #[serde(default)]
    pub with_echo: Option<bool>,
    /// qft: gate durations.
    #[serde(default)]
    pub timing: Option<TimingConfig>,
    /// inline: qubit count.
    #[serde(default)]
    pub qubits: Option<usize>,
    /// inline: ordered items.
    #[serde(default)]
    pub items: Option<Vec<ItemConfig>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PiPulseConfig {
    Named(String),
    Finite { duration: f64, amplitude: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    #[serde(default = "one")]
    pub single_qubit: f64,
    #[serde(default = "one")]
    pub two_qubit: f64,
    #[serde(default = "one")]
    pub swap: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemConfig {
    pub kind: String,
    /// segment: duration.
    #[serde(default)]
    pub duration: Option<f64>,
    /// segment: Pauli-label coefficient map of the control Hamiltonian,
    /// e.g. `{ Z = 0.5, XX = 0.1 }` (unnormalized Pauli strings).
    #[serde(default)]
    pub hamiltonian: Option<BTreeMap<String, f64>>,
    /// segment: per-channel Pauli maps of the noise operators.
    #[serde(default)]
    pub noise_operators: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    /// pulse: rotation axis "X"/"Y"/"Z" and angle on a site.
    #[serde(default)]
    pub axis: Option<String>,
    #[serde(default)]
    pub angle: Option<f64>,
    #[serde(default)]
    pub site: Option<usize>,
    /// Gate label; consecutive items sharing a label form one gate.
    #[serde(default)]
    pub gate: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub name: String,
    pub spectrum: SpectrumConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub kind: String,
    #[serde(default)]
    pub s0: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default)]
    pub omega_max: Option<f64>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub kind: String,
    #[serde(default)]
    pub omega_min: Option<f64>,
    #[serde(default)]
    pub omega_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub trajectories: usize,
    #[serde(default)]
    pub dt: Option<f64>,
}

/// One schema violation with the offending field path.
#[derive(Debug, Clone)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Collect every schema violation (not just the first).
    pub fn validate(&self, base_dir: &Path) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut push = |path: &str, message: String| {
            v.push(Violation {
                path: path.to_string(),
                message,
            })
        };
        if self.schema_version != SCHEMA_VERSION {
            push(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            );
        }
        if self.channels.is_empty() {
            push("channels", "at least one channel is required".into());
        }
        let mut names = std::collections::HashSet::new();
        for (i, ch) in self.channels.iter().enumerate() {
            if !names.insert(ch.name.clone()) {
                push(
                    &format!("channels[{i}].name"),
                    format!("duplicate channel name '{}'", ch.name),
                );
            }
            if let Err(e) = build_spectrum(&ch.spectrum, base_dir) {
                push(&format!("channels[{i}].spectrum"), e);
            }
        }
        for (i, task) in self.tasks.iter().enumerate() {
            if !ALLOWED_TASKS.contains(&task.as_str()) {
                push(
                    &format!("tasks[{i}]"),
                    format!(
                        "unknown task '{task}', allowed: {}",
                        ALLOWED_TASKS.join(", ")
                    ),
                );
            }
        }
        if self.tasks.is_empty() {
            push("tasks", "at least one task is required".into());
        }
        if self.tasks.iter().any(|t| t == "montecarlo_check") {
            match &self.montecarlo {
                None => push(
                    "montecarlo",
                    "required by the montecarlo_check task".into(),
                ),
                Some(mc) => {
                    if mc.trajectories == 0 {
                        push("montecarlo.trajectories", "must be at least 1".into());
                    }
                    if let Some(dt) = mc.dt {
                        if !(dt > 0.0) {
                            push("montecarlo.dt", format!("must be positive, got {dt}"));
                        }
                    }
                }
            }
        }
        self.validate_grid(&mut v);
        self.validate_sequence(&mut v);
        v
    }

    fn validate_grid(&self, v: &mut Vec<Violation>) {
        let g = &self.grid;
        match g.kind.as_str() {
            "default" => {}
            "log" | "linear" => {
                match (g.omega_min, g.omega_max, g.points) {
                    (Some(lo), Some(hi), Some(points)) => {
                        let built = if g.kind == "log" {
                            FrequencyGrid::logarithmic(lo, hi, points)
                        } else {
                            FrequencyGrid::linear(lo, hi, points)
                        };
                        if let Err(e) = built {
                            v.push(Violation {
                                path: "grid".into(),
                                message: e.to_string(),
                            });
                        }
                    }
                    _ => v.push(Violation {
                        path: "grid".into(),
                        message: "log/linear grids need omega_min, omega_max, points".into(),
                    }),
                }
            }
            other => v.push(Violation {
                path: "grid.kind".into(),
                message: format!("unknown grid kind '{other}', allowed: log, linear, default"),
            }),
        }
    }

    fn validate_sequence(&self, v: &mut Vec<Violation>) {
        let s = &self.sequence;
        match s.builder.as_str() {
            "fid" => {
                if !matches!(s.tau, Some(t) if t > 0.0) {
                    v.push(Violation {
                        path: "sequence.tau".into(),
                        message: format!("fid builder needs a positive tau, got {:?}", s.tau),
                    });
                }
                if self.channels.len() != 1 {
                    v.push(Violation {
                        path: "channels".into(),
                        message: "the fid builder uses exactly one (dephasing) channel".into(),
                    });
                }
            }
            "spin_echo" => {
                if !matches!(s.tau_idle, Some(t) if t > 0.0) {
                    v.push(Violation {
                        path: "sequence.tau_idle".into(),
                        message: format!(
                            "spin_echo builder needs a positive tau_idle, got {:?}",
                            s.tau_idle
                        ),
                    });
                }
                if let Some(PiPulseConfig::Named(name)) = &s.pi_pulse {
                    if name != "instantaneous" {
                        v.push(Violation {
                            path: "sequence.pi_pulse".into(),
                            message: format!(
                                "unknown pi_pulse '{name}'; use \"instantaneous\" or {{ duration, amplitude }}"
                            ),
                        });
                    }
                }
                if self.channels.len() != 1 {
                    v.push(Violation {
                        path: "channels".into(),
                        message: "the spin_echo builder uses exactly one (dephasing) channel"
                            .into(),
                    });
                }
            }
            "qft" => {
                if self.channels.len() != 1 {
                    v.push(Violation {
                        path: "channels".into(),
                        message: "the qft builder uses exactly one channel (σ_y on qubit 4)"
                            .into(),
                    });
                }
            }
            "inline" => self.validate_inline(v),
            other => v.push(Violation {
                path: "sequence.builder".into(),
                message: format!(
                    "unknown builder '{other}', allowed: fid, spin_echo, qft, inline"
                ),
            }),
        }
    }

    fn validate_inline(&self, v: &mut Vec<Violation>) {
        let s = &self.sequence;
        let Some(qubits) = s.qubits else {
            v.push(Violation {
                path: "sequence.qubits".into(),
                message: "inline sequences need a qubit count".into(),
            });
            return;
        };
        let Some(items) = &s.items else {
            v.push(Violation {
                path: "sequence.items".into(),
                message: "inline sequences need at least one item".into(),
            });
            return;
        };
        for (i, item) in items.iter().enumerate() {
            let path = format!("sequence.items[{i}]");
            match item.kind.as_str() {
                "segment" => {
                    match item.duration {
                        Some(d) if d > 0.0 => {}
                        other => v.push(Violation {
                            path: format!("{path}.duration"),
                            message: format!("segment needs a positive duration, got {other:?}"),
                        }),
                    }
                    if let Some(h) = &item.hamiltonian {
                        for label in h.keys() {
                            if let Err(e) = check_pauli_label(label, qubits) {
                                v.push(Violation {
                                    path: format!("{path}.hamiltonian.{label}"),
                                    message: e,
                                });
                            }
                        }
                    }
                    let ops = item.noise_operators.clone().unwrap_or_default();
                    for ch in &self.channels {
                        if !ops.contains_key(&ch.name) {
                            v.push(Violation {
                                path: format!("{path}.noise_operators"),
                                message: format!("missing operator for channel '{}'", ch.name),
                            });
                        }
                    }
                    for (name, op) in &ops {
                        if !self.channels.iter().any(|c| &c.name == name) {
                            v.push(Violation {
                                path: format!("{path}.noise_operators.{name}"),
                                message: format!("channel '{name}' is not defined"),
                            });
                        }
                        for label in op.keys() {
                            if let Err(e) = check_pauli_label(label, qubits) {
                                v.push(Violation {
                                    path: format!("{path}.noise_operators.{name}.{label}"),
                                    message: e,
                                });
                            }
                        }
                    }
                }
                "pulse" => {
                    if !matches!(item.axis.as_deref(), Some("X" | "Y" | "Z")) {
                        v.push(Violation {
                            path: format!("{path}.axis"),
                            message: format!(
                                "pulse needs axis X, Y, or Z, got {:?}",
                                item.axis
                            ),
                        });
                    }
                    if item.angle.is_none() {
                        v.push(Violation {
                            path: format!("{path}.angle"),
                            message: "pulse needs a rotation angle".into(),
                        });
                    }
                    if item.site.unwrap_or(0) >= qubits {
                        v.push(Violation {
                            path: format!("{path}.site"),
                            message: format!(
                                "site {} outside the {qubits}-qubit register",
                                item.site.unwrap_or(0)
                            ),
                        });
                    }
                }
                other => v.push(Violation {
                    path: format!("{path}.kind"),
                    message: format!("unknown item kind '{other}', allowed: segment, pulse"),
                }),
            }
        }
        if !items.iter().any(|i| i.kind == "segment") {
            v.push(Violation {
                path: "sequence.items".into(),
                message: "inline sequences need at least one segment".into(),
            });
        }
    }

    /// Build the sequence described by the config. Assumes [`Self::validate`]
    /// passed.
    pub fn build_sequence(&self, base_dir: &Path) -> anyhow::Result<PulseSequence> {
        let spectra: Vec<SpectralDensity> = self
            .channels
            .iter()
            .map(|c| build_spectrum(&c.spectrum, base_dir).map_err(anyhow::Error::msg))
            .collect::<anyhow::Result<_>>()?;
        let s = &self.sequence;
        let seq = match s.builder.as_str() {
            "fid" => circuits::fid_sequence(
                s.tau.unwrap(),
                NoiseSpec::new(
                    self.channels[0].name.clone(),
                    pulseff::pulse::pauli_matrix(pulseff::basis::PauliLabel::Z),
                    spectra[0].clone(),
                ),
            )?,
            "spin_echo" => {
                let mode = match &s.pi_pulse {
                    None | Some(PiPulseConfig::Named(_)) => PiPulseMode::Instantaneous,
                    Some(PiPulseConfig::Finite {
                        duration,
                        amplitude,
                    }) => PiPulseMode::Finite {
                        duration: *duration,
                        amplitude: *amplitude,
                    },
                };
                circuits::spin_echo_sequence(
                    s.tau_idle.unwrap(),
                    mode,
                    NoiseSpec::new(
                        self.channels[0].name.clone(),
                        pulseff::pulse::pauli_matrix(pulseff::basis::PauliLabel::Z),
                        spectra[0].clone(),
                    ),
                )?
            }
            "qft" => {
                let timing = match &s.timing {
                    Some(t) => QftTiming {
                        single_qubit: t.single_qubit,
                        two_qubit: t.two_qubit,
                        swap: t.swap,
                    },
                    None => QftTiming::default(),
                };
                let mut seq = circuits::qft_sequence(
                    4,
                    s.with_echo.unwrap_or(false),
                    &timing,
                    spectra[0].clone(),
                )?;
                // relabel the channel to the configured name
                if self.channels[0].name != "y4" {
                    seq = rename_single_channel(seq, &self.channels[0].name)?;
                }
                seq
            }
            "inline" => self.build_inline(&spectra)?,
            other => anyhow::bail!("unknown builder '{other}'"),
        };
        Ok(seq)
    }

    fn build_inline(&self, spectra: &[SpectralDensity]) -> anyhow::Result<PulseSequence> {
        let s = &self.sequence;
        let qubits = s.qubits.unwrap();
        let d = 1usize << qubits;
        let items_cfg = s.items.as_ref().unwrap();
        let mut items = Vec::with_capacity(items_cfg.len());
        let mut boundaries = vec![0usize];
        let mut labels: Vec<String> = Vec::new();
        let mut current_label: Option<String> = None;
        for (i, item) in items_cfg.iter().enumerate() {
            let label = item.gate.clone().unwrap_or_else(|| format!("g{i}"));
            match item.kind.as_str() {
                "segment" => {
                    let h = pauli_map_to_matrix(
                        item.hamiltonian.as_ref().unwrap_or(&BTreeMap::new()),
                        qubits,
                    )?;
                    let ops = item.noise_operators.clone().unwrap_or_default();
                    let noise_operators = self
                        .channels
                        .iter()
                        .map(|c| pauli_map_to_matrix(&ops[&c.name], qubits))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    items.push(Item::Segment(Segment {
                        duration: item.duration.unwrap(),
                        hamiltonian: h,
                        noise_operators,
                    }));
                }
                "pulse" => {
                    let axis = match item.axis.as_deref().unwrap() {
                        "X" => pulseff::basis::PauliLabel::X,
                        "Y" => pulseff::basis::PauliLabel::Y,
                        _ => pulseff::basis::PauliLabel::Z,
                    };
                    let angle = item.angle.unwrap();
                    let half = angle / 2.0;
                    let single = CMatrix::identity(2, 2) * C64::new(half.cos(), 0.0)
                        + pulseff::pulse::pauli_matrix(axis) * C64::new(0.0, -half.sin());
                    let unitary = circuits::embed(&single, qubits, item.site.unwrap_or(0));
                    items.push(Item::Gate(InstantaneousGate { unitary }));
                }
                _ => unreachable!("validated earlier"),
            }
            match &current_label {
                Some(prev) if *prev == label => {
                    *boundaries.last_mut().unwrap() = items.len();
                }
                _ => {
                    boundaries.push(items.len());
                    labels.push(label.clone());
                    current_label = Some(label);
                }
            }
        }
        let channels = self
            .channels
            .iter()
            .zip(spectra)
            .map(|(c, s)| NoiseChannel::new(c.name.clone(), s.clone()))
            .collect();
        Ok(PulseSequence::from_parts(
            d, items, channels, boundaries, labels,
        )?)
    }

    /// Build the frequency grid, with the default grid sized by τ.
    pub fn build_grid(&self, tau: f64) -> anyhow::Result<FrequencyGrid> {
        let g = &self.grid;
        Ok(match g.kind.as_str() {
            "default" => FrequencyGrid::default_for_duration(tau)?,
            "log" => FrequencyGrid::logarithmic(
                g.omega_min.unwrap(),
                g.omega_max.unwrap(),
                g.points.unwrap(),
            )?,
            "linear" => FrequencyGrid::linear(
                g.omega_min.unwrap(),
                g.omega_max.unwrap(),
                g.points.unwrap(),
            )?,
            other => anyhow::bail!("unknown grid kind '{other}'"),
        })
    }
}

fn check_pauli_label(label: &str, qubits: usize) -> Result<(), String> {
    let parsed = PauliString::parse(label).map_err(|e| e.to_string())?;
    if parsed.qubits() != qubits {
        return Err(format!(
            "Pauli string '{label}' has {} labels for {qubits} qubits",
            parsed.qubits()
        ));
    }
    Ok(())
}

fn pauli_map_to_matrix(
    map: &BTreeMap<String, f64>,
    qubits: usize,
) -> anyhow::Result<CMatrix> {
    let d = 1usize << qubits;
    let mut out = CMatrix::zeros(d, d);
    for (label, &coeff) in map {
        let ps = PauliString::parse(label).map_err(|e| anyhow::anyhow!("{e}"))?;
        if ps.qubits() != qubits {
            anyhow::bail!(
                "Pauli string '{label}' has {} labels for {qubits} qubits",
                ps.qubits()
            );
        }
        out += ps.matrix() * C64::new(coeff, 0.0);
    }
    Ok(out)
}

fn build_spectrum(cfg: &SpectrumConfig, base_dir: &Path) -> Result<SpectralDensity, String> {
    match cfg.kind.as_str() {
        "white" => {
            let s0 = cfg.s0.ok_or("white spectrum needs s0")?;
            SpectralDensity::white(s0).map_err(|e| e.to_string())
        }
        "power_law" => {
            let amplitude = cfg.amplitude.ok_or("power_law needs amplitude")?;
            let exponent = cfg.exponent.ok_or("power_law needs exponent")?;
            let omega_min = cfg.omega_min.ok_or("power_law needs omega_min")?;
            let omega_max = cfg.omega_max.ok_or("power_law needs omega_max")?;
            SpectralDensity::power_law(amplitude, exponent, omega_min, omega_max)
                .map_err(|e| e.to_string())
        }
        "tabulated" => {
            let file = cfg.file.as_ref().ok_or("tabulated spectrum needs a file")?;
            let path = if file.is_absolute() {
                file.clone()
            } else {
                base_dir.join(file)
            };
            pulseff::io::load_tabulated_spectrum(&path).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown spectrum kind '{other}', allowed: white, power_law, tabulated"
        )),
    }
}

fn rename_single_channel(
    seq: PulseSequence,
    name: &str,
) -> Result<PulseSequence, pulseff::Error> {
    let channels = vec![NoiseChannel::new(
        name.to_string(),
        seq.channels()[0].spectrum.clone(),
    )];
    PulseSequence::from_parts(
        seq.dim(),
        seq.items().to_vec(),
        channels,
        seq.gate_boundaries().to_vec(),
        seq.gate_labels().to_vec(),
    )
}

/// Ready-to-run example configs matching the builder sequences.
pub fn example_config(name: &str) -> Option<String> {
    let text = match name {
        "fid" => FID_EXAMPLE,
        "spin_echo" => SPIN_ECHO_EXAMPLE,
        "qft" => QFT_EXAMPLE,
        "inline" => INLINE_EXAMPLE,
        _ => return None,
    };
    Some(text.to_string())
}

pub const EXAMPLE_NAMES: [&str; 4] = ["fid", "spin_echo", "qft", "inline"];

const FID_EXAMPLE: &str = r#"schema_version = 1
seed = 1
tasks = ["fidelity_ff", "fidelity"]

[sequence]
builder = "fid"
tau = 1.0

[[channels]]
name = "z"
spectrum = { kind = "power_law", amplitude = 1e-4, exponent = 1.0, omega_min = 1e-4, omega_max = 1e2 }

[grid]
kind = "log"
omega_min = 1e-3
omega_max = 1e2
points = 1000

"#;

const SPIN_ECHO_EXAMPLE: &str = r#"schema_version = 1
seed = 1
tasks = ["fidelity_ff", "correlation_ff", "correlation_infidelities", "fidelity"]

[sequence]
builder = "spin_echo"
tau_idle = 1.0
pi_pulse = "instantaneous"

[[channels]]
name = "z"
spectrum = { kind = "power_law", amplitude = 1e-4, exponent = 1.0, omega_min = 1e-4, omega_max = 1e2 }

[grid]
kind = "log"
omega_min = 1e-3
omega_max = 1e2
points = 1000

"#;

const QFT_EXAMPLE: &str = r#"schema_version = 1
seed = 1
tasks = ["correlation_infidelities", "fidelity"]

[sequence]
builder = "qft"
with_echo = true
timing = { single_qubit = 1.0, two_qubit = 1.0, swap = 1.0 }

[[channels]]
name = "y4"
spectrum = { kind = "power_law", amplitude = 4e-5, exponent = 1.0, omega_min = 1e-4, omega_max = 1e2 }

[grid]
kind = "log"
omega_min = 1e-4
omega_max = 1e3
points = 2000

"#;

const INLINE_EXAMPLE: &str = r#"schema_version = 1
seed = 1
tasks = ["fidelity_ff", "process", "fidelity", "montecarlo_check"]

[sequence]
builder = "inline"
qubits = 1

[[sequence.items]]
kind = "segment"
duration = 1.0
hamiltonian = { X = 0.7853981633974483 }
noise_operators = { z = { Z = 1.0 } }
gate = "drive"

[[sequence.items]]
kind = "pulse"
axis = "X"
angle = 3.141592653589793
gate = "pi"

[[sequence.items]]
kind = "segment"
duration = 1.0
hamiltonian = {}
noise_operators = { z = { Z = 1.0 } }
gate = "idle"

[[channels]]
name = "z"
spectrum = { kind = "white", s0 = 1e-3 }

[grid]
kind = "log"
omega_min = 1e-3
omega_max = 1e3
points = 800


[montecarlo]
trajectories = 200
dt = 0.002
"#;
