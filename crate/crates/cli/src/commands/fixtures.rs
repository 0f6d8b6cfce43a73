use std::path::PathBuf;

use clap::Subcommand;
use serde_json::json;

use qott_core::maskers::{export_masker, import_masker, verify_masking, Family};
use qott_core::qott::{build_qott, export_commodity, import_commodity, twirl_check};
use qott_core::qudit::Dim;

use super::ParamArgs;
use crate::report::{Check, Outcome};

#[derive(Subcommand, Debug)]
pub enum ExportWhat {
    /// Commodity state, tagged cards and masker.
    Commodity {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        dir: PathBuf,
    },
    Masker {
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum ImportWhat {
    Commodity {
        #[arg(long)]
        dir: PathBuf,
    },
    Masker {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn masker_checks(m: &qott_core::maskers::Masker) -> anyhow::Result<Vec<Check>> {
    let r = verify_masking(m)?;
    Ok(vec![Check::at_most("marginal deviation", r.deviation_a.max(r.deviation_b), 0.0, 1e-9)
        .expecting(m.family().masks_at(m.d().get()))])
}

pub fn export(what: &ExportWhat, seed: u64) -> anyhow::Result<Outcome> {
    match what {
        ExportWhat::Commodity { params, dir } => {
            let qp = params.build()?;
            let c = build_qott(&qp, None, seed)?;
            let cards = export_commodity(&c, dir)?;
            let back = import_commodity(dir)?;
            let same = back.state.amplitudes() == c.state.amplitudes() && back.cards == c.cards;
            let mut parameters = params.json();
            parameters["dir"] = json!(dir);
            Ok(Outcome {
                parameters,
                checks: vec![Check::equal("re-import matches", f64::from(u8::from(same)), 1.0, 0.0)],
                data: json!({ "cards": cards }),
                table: None,
            })
        }
        ExportWhat::Masker { family, d, dir } => {
            let fam = Family::parse(family).ok_or_else(|| anyhow::anyhow!("unknown masker family `{family}`"))?;
            let m = fam
                .build(Dim::new(*d)?)
                .ok_or_else(|| anyhow::anyhow!("the {fam} family has no circuit to export"))??;
            let desc = export_masker(&m, dir)?;
            let checks = masker_checks(&import_masker(dir)?)?;
            Ok(Outcome {
                parameters: json!({ "family": fam, "d": d, "dir": dir }),
                checks,
                data: serde_json::to_value(&desc)?,
                table: None,
            })
        }
    }
}

pub fn import(what: &ImportWhat) -> anyhow::Result<Outcome> {
    match what {
        ImportWhat::Commodity { dir } => {
            let c = import_commodity(dir)?;
            let checks = vec![
                Check::equal("state norm", c.state.norm_sqr(), 1.0, 1e-12),
                Check::at_most("lock twirl deviation", twirl_check(&c.params)?, 0.0, 1e-10),
            ];
            Ok(Outcome {
                parameters: json!({ "dir": dir }),
                checks,
                data: json!({
                    "p": c.params.p(),
                    "J": c.params.j_set(),
                    "masker": c.params.masker().family(),
                    "register": c.state.register().labels(),
                }),
                table: None,
            })
        }
        ImportWhat::Masker { dir } => {
            let m = import_masker(dir)?;
            Ok(Outcome {
                parameters: json!({ "dir": dir }),
                checks: masker_checks(&m)?,
                data: json!({ "family": m.family(), "d": m.d().get(), "share_names": m.share_names() }),
                table: None,
            })
        }
    }
}
