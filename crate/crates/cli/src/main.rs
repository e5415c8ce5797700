//! Command-line front end: runs the constructions end to end and emits
//! deterministic JSON reports and certificates.
//!
//! Exit codes: 0 when every check in the invoked pipeline passes, 1 when a
//! check fails (the report is still emitted), 2 on configuration or parse
//! errors. Reports print to stdout; `--out`/`--csv` additionally write
//! files, with relative paths resolved against `ORBITLAB_OUT_DIR` when
//! that variable is set. Certified payloads contain no timestamps or
//! environment data, so reruns are byte-identical; run metadata lives in a
//! separate envelope key.

mod scenario;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use orbitlab::construction::{build_s, build_t, check_quasiconjugacy};
use orbitlab::criterion::{
    build_vector, check_conditions, check_le_criterion, select_subsequence, verify_certificate,
    HypercyclicCertificate, LeClassification, PowerSequence,
};
use orbitlab::dyadic::DyadicScalar;
use orbitlab::enumerate::DenseEnumeration;
use orbitlab::operator::OperatorExpr;
use orbitlab::orbit::{density_report, orbit};
use orbitlab::subspace::SubspaceSpec;
use orbitlab::vector::{CertifiedVector, SparseVector};

#[derive(Parser)]
#[command(name = "orbitlab", version, about = "Exact-arithmetic runs of shift constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the scenario's basis perturbation and tabulate its basis action.
    Construct {
        #[arg(long, default_value = "thm1-construction")]
        scenario: String,
        /// Basis vectors to tabulate.
        #[arg(long, default_value_t = 8)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the exact intertwining T(φ e_k) = φ(S e_k) for k ≤ n.
    Conjugacy {
        #[arg(long, default_value = "thm1-construction")]
        scenario: String,
        #[arg(long, default_value_t = 100)]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the criterion hypotheses on enumerated samples.
    CriterionCheck {
        #[arg(long, default_value = "example-linf")]
        scenario: String,
        /// Enumerated sample vectors to draw.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Override the scenario's probe depth.
        #[arg(long)]
        k_probe: Option<u64>,
        /// Override the right inverse: a tag (B, F, Identity) or a JSON
        /// operator expression.
        #[arg(long)]
        a_operator: Option<String>,
        /// Override the power sequence step.
        #[arg(long)]
        seq_step: Option<u64>,
        /// Override the power sequence offset.
        #[arg(long)]
        seq_offset: Option<u64>,
        /// Check the kernel criterion with its subspace prerequisites
        /// instead of the direct conditions.
        #[arg(long)]
        le: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select a subsequence, build the certified vector, self-verify, and
    /// emit the certificate.
    CriterionBuild {
        #[arg(long, default_value = "example-linf")]
        scenario: String,
        /// Terms kept in the truncation; the tail bound is 2^(-K).
        #[arg(long = "K", default_value_t = 8)]
        k: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-derive every verdict of a certificate file.
    CriterionVerify {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Walk an orbit; with --targets, probe density and record least-power
    /// hits.
    Orbit {
        #[arg(long, default_value = "example-linf")]
        scenario: String,
        /// Start vector literal like "{1:1, 3:-1/2}".
        #[arg(long, conflicts_with = "cert")]
        start: Option<String>,
        /// Start from a certificate's truncated vector.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, default_value_t = 32)]
        steps: u64,
        /// Probe density against this many enumerated targets.
        #[arg(long)]
        targets: Option<usize>,
        /// Hit threshold, a dyadic literal (no decimals).
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the first vectors of the subspace's dense enumeration.
    Enumerate {
        #[arg(long, default_value = "example-linf")]
        scenario: String,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

/// Relative output paths land in ORBITLAB_OUT_DIR when set. Inputs are
/// never redirected.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("ORBITLAB_OUT_DIR") {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let path = resolve_out(path);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

/// Envelope: run metadata beside the re-derivable payload, never inside it.
fn emit(command: &str, key: &str, payload: Value, out: Option<&Path>) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert(
        "meta".into(),
        json!({
            "tool": "orbitlab",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
        }),
    );
    doc.insert(key.into(), payload);
    let text = serde_json::to_string_pretty(&Value::Object(doc))? + "\n";
    print!("{text}");
    if let Some(path) = out {
        write_text(path, &text)?;
    }
    Ok(())
}

fn parse_operator(text: &str) -> Result<OperatorExpr> {
    match text {
        "B" => Ok(OperatorExpr::BackwardShift),
        "F" => Ok(OperatorExpr::ForwardShift),
        "Identity" => Ok(OperatorExpr::Identity),
        other => serde_json::from_str(other)
            .with_context(|| format!("`{other}` is neither an operator tag nor a JSON operator")),
    }
}

fn parse_dyadic(text: &str) -> Result<DyadicScalar> {
    text.parse::<DyadicScalar>()
        .with_context(|| format!("`{text}` is not a dyadic literal (decimals are rejected)"))
}

fn read_certificate(path: &Path) -> Result<HypercyclicCertificate> {
    #[derive(serde::Deserialize)]
    struct CertEnvelope {
        certificate: HypercyclicCertificate,
    }
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading certificate {}", path.display()))?;
    let envelope: CertEnvelope = serde_json::from_str(&text)
        .with_context(|| format!("malformed certificate {}", path.display()))?;
    Ok(envelope.certificate)
}

fn enumerated(subspace: &SubspaceSpec, level_cap: u64, count: usize) -> Vec<SparseVector> {
    DenseEnumeration::with_level_cap(subspace, level_cap)
        .take(count)
        .collect()
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Construct { scenario, n, out } => {
            let sc = scenario::load(&scenario)?;
            let Some(system) = &sc.system else {
                bail!("scenario `{}` has no biorthogonal system to construct from", sc.name);
            };
            let t = build_t(system);
            let bound = t.norm_bound(sc.subspace.norm)?;
            let rows: Vec<Value> = (1..=n)
                .map(|k| json!({ "k": k, "image": t.apply(&SparseVector::basis(k)) }))
                .collect();
            let payload = json!({
                "system": system,
                "operator": t,
                "norm_bound": bound,
                "basis_action": rows,
            });
            emit("construct", "report", payload, out.as_deref())?;
            Ok(true)
        }
        Command::Conjugacy { scenario, n, out } => {
            let sc = scenario::load(&scenario)?;
            let Some(system) = &sc.system else {
                bail!("scenario `{}` has no biorthogonal system; nothing to intertwine", sc.name);
            };
            let report = check_quasiconjugacy(&build_t(system), &build_s(), system, n);
            emit("conjugacy", "report", serde_json::to_value(&report)?, out.as_deref())?;
            Ok(report.passed())
        }
        Command::CriterionCheck {
            scenario,
            samples,
            k_probe,
            a_operator,
            seq_step,
            seq_offset,
            le,
            out,
        } => {
            let sc = scenario::load(&scenario)?;
            let mut w = sc.witness()?;
            if let Some(text) = &a_operator {
                w.a = parse_operator(text)?;
            }
            if seq_step.is_some() || seq_offset.is_some() {
                w.seq = PowerSequence::new(
                    seq_step.unwrap_or(w.seq.step),
                    seq_offset.unwrap_or(w.seq.offset),
                )?;
            }
            let k_probe = k_probe.unwrap_or(sc.budgets.k_probe);
            let samples = enumerated(&w.subspace, sc.enumeration.level_cap, samples);
            if le {
                let report =
                    check_le_criterion(&w.t, &w.a, &w.subspace, &samples, k_probe, &w.decay);
                emit("criterion-check", "report", serde_json::to_value(&report)?, out.as_deref())?;
                Ok(report.classification == LeClassification::Applicable)
            } else {
                let report = check_conditions(&w, &samples, k_probe)?;
                emit("criterion-check", "report", serde_json::to_value(&report)?, out.as_deref())?;
                Ok(report.passed())
            }
        }
        Command::CriterionBuild { scenario, k, out } => {
            let sc = scenario::load(&scenario)?;
            let w = sc.witness()?;
            let prefix = enumerated(&w.subspace, sc.enumeration.level_cap, k as usize + 1);
            if prefix.len() < k as usize + 1 {
                bail!("enumeration exhausted below {} vectors (level cap too low)", k + 1);
            }
            let selection = select_subsequence(&w, &prefix, k, sc.budgets.scan_limit)?;
            let cert = build_vector(&w, &prefix, &selection)?;
            let report = verify_certificate(&cert);
            emit("criterion-build", "certificate", serde_json::to_value(&cert)?, out.as_deref())?;
            Ok(report.passed)
        }
        Command::CriterionVerify { cert, out } => {
            let cert = read_certificate(&cert)?;
            let report = verify_certificate(&cert);
            emit("criterion-verify", "report", serde_json::to_value(&report)?, out.as_deref())?;
            Ok(report.passed)
        }
        Command::Orbit { scenario, start, cert, steps, targets, eps, csv, out } => {
            let (t, subspace, start_cv) = match &cert {
                Some(path) => {
                    let cert = read_certificate(path)?;
                    (cert.witness.t.clone(), cert.witness.subspace.clone(), cert.x_partial)
                }
                None => {
                    let sc = scenario::load(&scenario)?;
                    let Some(literal) = &start else {
                        bail!("orbit needs --start or --cert");
                    };
                    let x: SparseVector = literal
                        .parse()
                        .with_context(|| format!("`{literal}` is not a vector literal"))?;
                    let cv = CertifiedVector {
                        computed: x,
                        tail_bound: DyadicScalar::zero(),
                        norm: sc.subspace.norm,
                    };
                    (sc.operator.clone(), sc.subspace.clone(), cv)
                }
            };
            let (report, passed) = match targets {
                Some(count) => {
                    let eps = parse_dyadic(&eps)?;
                    if !eps.is_positive() {
                        bail!("eps must be strictly positive");
                    }
                    let sc_cap = orbitlab::enumerate::MAX_LEVEL;
                    let targets = enumerated(&subspace, sc_cap, count);
                    let report = density_report(&t, &start_cv, &targets, &eps, steps);
                    let passed = report.all_hit();
                    (report, passed)
                }
                None => {
                    let mut report = orbit(&t, &start_cv.computed, steps, start_cv.norm);
                    if cert.is_some() {
                        report.tail_bound = Some(start_cv.tail_bound.clone());
                    }
                    (report, true)
                }
            };
            if let Some(path) = &csv {
                write_text(path, &report.to_csv())?;
            }
            emit("orbit", "report", serde_json::to_value(&report)?, out.as_deref())?;
            Ok(passed)
        }
        Command::Enumerate { scenario, count, out } => {
            let sc = scenario::load(&scenario)?;
            let vectors = enumerated(&sc.subspace, sc.enumeration.level_cap, count);
            let payload = json!({
                "subspace": sc.subspace,
                "count": vectors.len(),
                "vectors": vectors,
            });
            emit("enumerate", "report", payload, out.as_deref())?;
            Ok(true)
        }
    }
}
