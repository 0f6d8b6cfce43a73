use anyhow::bail;
use serde_json::json;

use qott_core::maskers::{dual_masker, entropy_audit, qss23_check, verify_masking, Family};
use qott_core::qudit::Dim;

use crate::report::{Check, Outcome, Table};

const MAX_D: usize = 7;

pub fn verify(ds: &[usize]) -> anyhow::Result<Outcome> {
    if ds.is_empty() {
        bail!("--d needs at least one dimension");
    }
    if let Some(bad) = ds.iter().find(|&&d| !(2..=MAX_D).contains(&d)) {
        bail!("dimension {bad} is outside 2..={MAX_D}");
    }
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut table = Table::new(&[
        "family",
        "d",
        "masks",
        "deviation_a",
        "deviation_b",
        "unmask_fidelity",
        "safe_entropy",
        "dual_residual",
    ]);
    for &d in ds {
        let dim = Dim::new(d)?;
        for family in Family::catalogue() {
            let m = family.build(dim).expect("catalogue families build")?;
            let expected = family.masks_at(d);
            let r = verify_masking(&m)?;
            let tag = format!("{family}@{d}");
            checks.push(
                Check::at_most(format!("{tag} marginal deviation"), r.deviation_a.max(r.deviation_b), 0.0, 1e-9)
                    .expecting(expected),
            );
            checks.push(Check::at_least(format!("{tag} unmasking fidelity"), r.unmask_fidelity, 1.0, 1e-9));
            let audit = entropy_audit(&m)?;
            let mut residual = None;
            if expected {
                checks.push(Check::at_least(format!("{tag} safe entropy"), audit.safe_entropy, audit.log2_d, 1e-9));
                let target = if family == Family::Qotp { 2.0 * audit.log2_d } else { audit.log2_d };
                checks.push(Check::equal(format!("{tag} safe entropy value"), audit.safe_entropy, target, 1e-9));
                let res = dual_masker(&m)?.residual();
                checks.push(Check::at_most(format!("{tag} dual factorization residual"), res, 0.0, 1e-8));
                residual = Some(res);
                let q = qss23_check(&m)?;
                let fid = q.pair_fidelity.iter().copied().fold(1.0, f64::min);
                checks.push(Check::at_least(format!("{tag} (2,3) pair recovery"), fid, 1.0, 1e-8));
                let h = q.share_entropy.iter().copied().fold(f64::INFINITY, f64::min);
                checks.push(Check::at_least(format!("{tag} single-share entropy"), h, audit.log2_d, 1e-9));
            }
            table.push(vec![
                family.to_string(),
                d.to_string(),
                r.pass.to_string(),
                format!("{:e}", r.deviation_a),
                format!("{:e}", r.deviation_b),
                r.unmask_fidelity.to_string(),
                r.safe_entropy.to_string(),
                residual.map(|x| format!("{x:e}")).unwrap_or_default(),
            ]);
            rows.push(json!({ "masking": r, "entropy": audit, "dual_residual": residual }));
        }
    }
    Ok(Outcome { parameters: json!({ "d": ds }), checks, data: json!({ "maskers": rows }), table: Some(table) })
}
