//! JSON reports. Schema "radon-report", version 1:
//!
//! ```text
//! { schema, schema_version, command,
//!   provenance: { config_sha256, lt, lx, seed, tool_version },
//!   config:     the resolved configuration (defaults filled in),
//!   results:    command-specific object,
//!   verdicts:   [Verdict]  (analyze, control),
//!   tables:     [{ name, columns, rows }],
//!   warnings:   [string] }
//! ```
//!
//! Fields are written as {n, degree, prec, field} with `field` in the surface
//! expression syntax, polynomials in x1..xn, rationals as "p/q".

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use radon_algebra::{format_q, parse_q, MultiIndex, Q};
use radon_geometry::{replay_control, verify_refutation, CoefficientWitness, ControlCertificate, RefutationWitness, Status};
use radon_lie::{VectorField, WeightedField};
use radon_surface::{ConditionVerdict, Witness};

use crate::config::ProblemConfig;
use crate::dsl::{parse_field, parse_poly};
use crate::CliError;

pub const SCHEMA: &str = "radon-report";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub config_sha256: String,
    pub lt: u32,
    pub lx: u32,
    pub seed: u64,
    pub tool_version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Tab-separated, header line first.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {}", self.name)?;
        writeln!(w, "{}", self.columns.join("\t"))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join("\t"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub command: String,
    pub provenance: Provenance,
    pub config: ProblemConfig,
    pub results: Value,
    #[serde(default)]
    pub verdicts: Vec<VerdictRecord>,
    #[serde(default)]
    pub tables: Vec<Table>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Report {
    pub fn new(command: &str, cfg: &ProblemConfig, config_text: &str) -> Self {
        Report {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            provenance: Provenance {
                config_sha256: sha256_hex(config_text.as_bytes()),
                lt: cfg.truncation.lt,
                lx: cfg.truncation.lx,
                seed: cfg.seed,
                tool_version: env!("CARGO_PKG_VERSION").into(),
            },
            config: cfg.clone(),
            results: Value::Null,
            verdicts: Vec::new(),
            tables: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let r: Report = serde_json::from_str(text).map_err(|e| CliError::new("verify", format!("report: {e}")))?;
        if r.schema != SCHEMA || r.schema_version != SCHEMA_VERSION {
            return Err(CliError::new("verify", format!("unsupported schema {} v{}", r.schema, r.schema_version)));
        }
        Ok(r)
    }

    pub fn tables_tsv(&self) -> String {
        let mut out = Vec::new();
        for (k, t) in self.tables.iter().enumerate() {
            if k > 0 {
                out.push(b'\n');
            }
            t.write_tsv(&mut out).expect("write to memory");
        }
        String::from_utf8(out).expect("utf8")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldRecord {
    pub n: usize,
    pub degree: Vec<u32>,
    pub prec: Option<i32>,
    pub field: String,
    /// Bracket word over the generating list, for provenance only.
    #[serde(default)]
    pub word: String,
}

impl FieldRecord {
    pub fn of(w: &WeightedField) -> Self {
        FieldRecord { n: w.n(), degree: w.degree().to_vec(), prec: w.field.prec(), field: w.field.render(), word: w.word.to_string() }
    }

    pub fn field(&self) -> Result<WeightedField, CliError> {
        let bad = |e: String| CliError::new("verify", format!("field '{}': {e}", self.field));
        let f = parse_field(&self.field, self.n).map_err(|e| bad(e.to_string()))?;
        let f = VectorField::with_params(0, self.n, f.comps().to_vec(), self.prec).map_err(|e| bad(e.to_string()))?;
        WeightedField::new(f, self.degree.clone()).map_err(|e| bad(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CoefficientRecord {
    pub generator: usize,
    /// c(x) as a polynomial in x1..xn.
    pub c: String,
    pub delta_power: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RefutationRecord {
    pub delta: Vec<String>,
    pub x: Vec<String>,
    pub rank_generators: usize,
    pub rank_augmented: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CertificateRecord {
    pub status: String,
    pub coeff_degree: u32,
    pub prec: Option<i32>,
    pub coefficients: Vec<CoefficientRecord>,
    pub refutation: Option<RefutationRecord>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ControlledRecord {
    pub alpha: Option<Vec<u32>>,
    pub target: FieldRecord,
    pub certificate: CertificateRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessRecord {
    Vacuous,
    Certificates { against: Vec<FieldRecord>, items: Vec<ControlledRecord> },
    Refutation { against: Vec<FieldRecord>, item: ControlledRecord },
    None,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerdictRecord {
    pub condition: String,
    pub status: String,
    pub cutoff: u32,
    pub lt: u32,
    pub lx: u32,
    pub witness: WitnessRecord,
    #[serde(default)]
    pub notes: Vec<String>,
}

pub fn status_text(s: Status) -> String {
    format!("{s:?}")
}

fn status_of(s: &str) -> Result<Status, CliError> {
    match s {
        "Proved" => Ok(Status::Proved),
        "Refuted" => Ok(Status::Refuted),
        "Unknown" => Ok(Status::Unknown),
        _ => Err(CliError::new("verify", format!("unknown status '{s}'"))),
    }
}

fn q_of(s: &str) -> Result<Q, CliError> {
    parse_q(s).map_err(|e| CliError::new("verify", e.to_string()))
}

fn x_name(i: usize) -> String {
    format!("x{}", i + 1)
}

impl CertificateRecord {
    pub fn of(c: &ControlCertificate) -> Self {
        CertificateRecord {
            status: status_text(c.status),
            coeff_degree: c.coeff_degree,
            prec: c.prec,
            coefficients: c
                .coefficients
                .iter()
                .map(|w| CoefficientRecord { generator: w.generator, c: w.c.render(&x_name), delta_power: w.delta_power.clone() })
                .collect(),
            refutation: c.witness.as_ref().map(|w| RefutationRecord {
                delta: w.delta.iter().map(format_q).collect(),
                x: w.x.iter().map(format_q).collect(),
                rank_generators: w.rank_generators,
                rank_augmented: w.rank_augmented,
            }),
            notes: c.notes.clone(),
        }
    }

    pub fn certificate(&self, n: usize) -> Result<ControlCertificate, CliError> {
        let coefficients = self
            .coefficients
            .iter()
            .map(|r| {
                let c = parse_poly(&r.c, 0, n).map_err(|e| CliError::new("verify", format!("coefficient '{}': {e}", r.c)))?;
                Ok(CoefficientWitness { generator: r.generator, c, delta_power: r.delta_power.clone() })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let witness = match &self.refutation {
            None => None,
            Some(w) => Some(RefutationWitness {
                delta: w.delta.iter().map(|s| q_of(s)).collect::<Result<_, _>>()?,
                x: w.x.iter().map(|s| q_of(s)).collect::<Result<_, _>>()?,
                rank_generators: w.rank_generators,
                rank_augmented: w.rank_augmented,
            }),
        };
        Ok(ControlCertificate {
            status: status_of(&self.status)?,
            coefficients,
            coeff_degree: self.coeff_degree,
            prec: self.prec,
            witness,
            bounds: Vec::new(),
            notes: self.notes.clone(),
        })
    }
}

fn controlled_record(alpha: &Option<MultiIndex>, target: &WeightedField, c: &ControlCertificate) -> ControlledRecord {
    ControlledRecord { alpha: alpha.as_ref().map(|a| a.0.clone()), target: FieldRecord::of(target), certificate: CertificateRecord::of(c) }
}

impl VerdictRecord {
    pub fn of(v: &ConditionVerdict) -> Self {
        let fields = |s: &[WeightedField]| s.iter().map(FieldRecord::of).collect::<Vec<_>>();
        let witness = match &v.witness {
            Witness::Vacuous => WitnessRecord::Vacuous,
            Witness::None => WitnessRecord::None,
            Witness::Certificates { against, items } => WitnessRecord::Certificates {
                against: fields(against),
                items: items.iter().map(|c| controlled_record(&c.alpha, &c.target, &c.certificate)).collect(),
            },
            Witness::Refutation { against, item } => WitnessRecord::Refutation {
                against: fields(against),
                item: controlled_record(&item.alpha, &item.target, &item.certificate),
            },
        };
        VerdictRecord {
            condition: v.condition.to_string(),
            status: status_text(v.status),
            cutoff: v.cutoff,
            lt: v.lt,
            lx: v.lx,
            witness,
            notes: v.notes.clone(),
        }
    }

    /// Re-checks the embedded witness from its text form alone.
    pub fn replay(&self) -> Result<bool, CliError> {
        let status = status_of(&self.status)?;
        let list = |a: &[FieldRecord]| a.iter().map(FieldRecord::field).collect::<Result<Vec<_>, _>>();
        Ok(match (status, &self.witness) {
            (Status::Proved, WitnessRecord::Vacuous) => true,
            (Status::Proved, WitnessRecord::Certificates { against, items }) => {
                let s = list(against)?;
                let mut ok = true;
                for it in items {
                    let t = it.target.field()?;
                    ok &= replay_control(&it.certificate.certificate(t.n())?, &t, &s);
                }
                ok
            }
            (Status::Refuted, WitnessRecord::Refutation { against, item }) => {
                let s = list(against)?;
                let t = item.target.field()?;
                match item.certificate.certificate(t.n())?.witness {
                    Some(w) => verify_refutation(&t, &s, &w),
                    None => false,
                }
            }
            (Status::Unknown, _) => true,
            _ => false,
        })
    }
}
