pub mod fixtures;
pub mod maskers;
pub mod protocol;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rand::Rng;
use serde_json::json;

use qott_core::baseline::{cheat_success, hiding_mutual_information, rivest_setup, run_honest, src_classical};
use qott_core::maskers::Family;
use qott_core::protocol::{superdense_commit, superdense_preview};
use qott_core::qott::{src_report, IndexCards, QottParams};
use qott_core::rng::stream;

use crate::report::{Check, Outcome, Table};

/// Exhaustive classical checks cost `O(p⁶)`; beyond this they are skipped.
const EXHAUSTIVE_BASELINE_UP_TO: usize = 13;

/// Dedicated stream for values a command draws from `--seed` itself.
pub(crate) const COMMAND_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolMasker {
    Minimal,
    FourQudit,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 3)]
    pub p: usize,
    /// Bob's index set, comma separated.
    #[arg(long = "J", value_delimiter = ',', default_value = "1,2")]
    pub j: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ProtocolMasker::Minimal)]
    pub masker: ProtocolMasker,
}

impl ParamArgs {
    pub fn build(&self) -> anyhow::Result<QottParams> {
        let family = match self.masker {
            ProtocolMasker::Minimal => Family::Minimal,
            ProtocolMasker::FourQudit => Family::FourQudit,
        };
        QottParams::with_family(self.p, &self.j, family).context("invalid protocol parameters")
    }

    pub fn json(&self) -> serde_json::Value {
        let masker = match self.masker {
            ProtocolMasker::Minimal => "minimal",
            ProtocolMasker::FourQudit => "four-qudit",
        };
        json!({ "p": self.p, "J": self.j, "masker": masker })
    }
}

pub fn src(params: &ParamArgs, classical_field: Option<usize>) -> anyhow::Result<Outcome> {
    if params.masker != ProtocolMasker::Minimal {
        bail!("the cost table is defined for the minimal masker");
    }
    let report = src_report(params.p, &params.j, classical_field)?;
    let mut checks = Vec::new();
    let mut table = Table::new(&["scheme", "formula", "bits", "enumerated_bits", "note"]);
    for row in &report.rows {
        if let Some(e) = row.enumerated_bits {
            let closed =
                if row.scheme == "rivest-bit" { 3.0 * (report.classical_field as f64).log2() } else { row.bits };
            checks.push(Check::equal(format!("{} enumerated entropy", row.scheme), e, closed, 1e-9));
        }
        table.push(vec![
            row.scheme.clone(),
            row.formula.clone(),
            format!("{}", row.bits),
            row.enumerated_bits.map(|b| b.to_string()).unwrap_or_default(),
            row.note.clone(),
        ]);
    }
    let mut parameters = params.json();
    parameters["classical_field"] = json!(report.classical_field);
    Ok(Outcome { parameters, checks, data: serde_json::to_value(&report)?, table: Some(table) })
}

pub fn baseline(p: usize, message: Option<usize>, seed: u64) -> anyhow::Result<Outcome> {
    let mut rng = stream(seed, COMMAND_STREAM);
    let ott = rivest_setup(p, &mut rng)?;
    let m = match message {
        Some(m) => m,
        None => rng.random_range(0..p),
    };
    let transcript = run_honest(&ott, m)?;
    let mut checks = vec![Check::equal("honest opening accepted", f64::from(u8::from(transcript.accept)), 1.0, 0.0)];
    checks.push(Check::equal("card entropy", src_classical(p)?, 3.0 * (p as f64).log2(), 1e-9));
    if p <= EXHAUSTIVE_BASELINE_UP_TO {
        checks.push(Check::at_most("hiding mutual information", hiding_mutual_information(p)?.abs(), 0.0, 1e-12));
        let c = cheat_success(p)?;
        checks.push(Check::equal("average false-opening success", c.average, 1.0 / p as f64, 1e-12));
        checks.push(Check::equal("worst false-opening success", c.worst, 1.0 / p as f64, 1e-12));
    }
    Ok(Outcome {
        parameters: json!({ "p": p, "message": m }),
        checks,
        data: json!({ "tables": ott, "transcript": transcript }),
        table: None,
    })
}

pub fn superdense(params: &ParamArgs, dits: Option<&[usize]>, seed: u64) -> anyhow::Result<Outcome> {
    let qp = params.build()?;
    let p = qp.p();
    let mut rng = stream(seed, COMMAND_STREAM);
    let dits = match dits {
        Some([a, b]) => [*a, *b],
        Some(_) => bail!("--dits takes exactly two values"),
        None => [rng.random_range(0..p), rng.random_range(0..p)],
    };
    let cards = IndexCards::draw(&qp, &mut rng);
    let t = superdense_commit(&qp, dits, Some(cards), seed)?;
    let base = superdense_preview(&qp, dits, cards.bob)?;
    let mut worst: f64 = 0.0;
    for a in 0..p {
        for b in 0..p {
            worst = worst.max(superdense_preview(&qp, [a, b], cards.bob)?.distance(&base)?);
        }
    }
    let checks = vec![
        Check::equal("honest acceptance", t.accept_probability, 1.0, 1e-10),
        Check::equal("decoding success", t.decode_success, 1.0, 1e-10),
        Check::at_most("Bob's pre-reveal view across dit pairs", worst, 0.0, 1e-10),
    ];
    let mut parameters = params.json();
    parameters["dits"] = json!(dits);
    Ok(Outcome { parameters, checks, data: serde_json::to_value(&t)?, table: None })
}
