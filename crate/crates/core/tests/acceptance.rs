//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. An optional argument selects criteria by
//! number.

use std::time::{Duration, Instant};

use qott_core::baseline::{cheat_success, hiding_mutual_information};
use qott_core::maskers::{dual_masker, entropy_audit, qss23_check, verify_masking, Family};
use qott_core::protocol::{
    adversary_family, bob_preview, cheat_analysis, closed_form_preview, delayed_teleport_oracle, exact_acceptance,
    monte_carlo, random_channel, random_instrument, repetition_mode, run_protocol, saturating_shift_strategy,
    superdense_commit, superdense_preview, AliceStrategy, DetectorModel,
};
use qott_core::qott::{commodity_entropy, src_report, twirl_check, QottParams};
use qott_core::qudit::{random_density, random_pure, trace_distance, DensityOperator, Dim, Register};
use qott_core::rng::seeded;
use qott_core::Result;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

fn secret_register(p: usize) -> Register {
    Register::single("I", p).expect("valid register")
}

fn dim(d: usize) -> Dim {
    Dim::new(d).expect("valid dimension")
}

fn masking_universality() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for d in [3, 5] {
        for family in Family::catalogue() {
            let r = verify_masking(&family.build(dim(d)).expect("catalogue family")?)?;
            worst = worst.max(r.deviation_a).max(r.deviation_b);
            pass &= r.pass && r.deviation_a <= 1e-9 && r.deviation_b <= 1e-9;
        }
    }
    let mut even_rejected = true;
    for d in [2, 4] {
        let r = verify_masking(&Family::Minimal.build(dim(d)).expect("minimal family")?)?;
        even_rejected &= !r.pass;
    }
    verdict(
        pass && even_rejected,
        format!("max marginal deviation {worst:.2e}, minimal at d=2,4 fails: {even_rejected}"),
    )
}

fn entropy_achievability() -> Result<Verdict> {
    let mut pass = true;
    let mut notes = Vec::new();
    for d in [2, 3, 5] {
        for family in Family::catalogue() {
            if !family.masks_at(d) {
                continue;
            }
            let m = family.build(dim(d)).expect("catalogue family")?;
            let a = entropy_audit(&m)?;
            let target = match family {
                Family::Qotp => 2.0 * a.log2_d,
                Family::FourQudit | Family::Minimal => a.log2_d,
                _ => a.safe_entropy,
            };
            pass &= (a.safe_entropy - target).abs() <= 1e-9;
            pass &= a.safe_entropy >= a.log2_d - 1e-9;
            if matches!(family, Family::FourQudit | Family::Qotp | Family::Minimal) {
                let q = qss23_check(&m)?;
                let low = q.share_entropy.iter().copied().fold(f64::INFINITY, f64::min);
                pass &= low >= a.log2_d - 1e-9;
                notes.push(format!("{family}@{d}: S(w)={:.6}, min share {:.6}", a.safe_entropy, low));
            }
        }
    }
    verdict(pass, notes.join("; "))
}

fn duality() -> Result<Verdict> {
    let mut worst_residual: f64 = 0.0;
    let mut worst_fid: f64 = 1.0;
    for d in [2, 3, 5] {
        for family in Family::catalogue() {
            if !family.masks_at(d) {
                continue;
            }
            let m = family.build(dim(d)).expect("catalogue family")?;
            worst_residual = worst_residual.max(dual_masker(&m)?.residual());
            let q = qss23_check(&m)?;
            worst_fid = q.pair_fidelity.iter().copied().fold(worst_fid, f64::min);
        }
    }
    verdict(
        worst_residual <= 1e-8 && worst_fid >= 1.0 - 1e-8,
        format!("max residual {worst_residual:.2e}, min pair fidelity 1 - {:.2e}", 1.0 - worst_fid),
    )
}

fn honest_correctness() -> Result<Verdict> {
    let mut rng = seeded(101);
    let mut worst_accept: f64 = 0.0;
    let mut worst_fid: f64 = 1.0;
    for p in [3, 5] {
        let params = QottParams::minimal(p, &[1, 2])?;
        for k in 0..20 {
            let rho = if k % 2 == 0 {
                DensityOperator::pure(&random_pure(&secret_register(p), &mut rng))
            } else {
                random_density(&secret_register(p), 1 + k % p, &mut rng)
            };
            let (t, _) = run_protocol(&params, None, &AliceStrategy::honest(&rho)?, DetectorModel::ideal(), k as u64)?;
            worst_accept = worst_accept.max((t.accept_probability - 1.0).abs());
            worst_fid = worst_fid.min(t.output_fidelity.unwrap_or(0.0));
        }
    }
    verdict(
        worst_accept <= 1e-10 && worst_fid >= 1.0 - 1e-9,
        format!("|accept - 1| <= {worst_accept:.2e}, fidelity >= 1 - {:.2e}", 1.0 - worst_fid),
    )
}

fn perfect_hiding() -> Result<Verdict> {
    let mut rng = seeded(202);
    let mut worst: f64 = 0.0;
    for p in [3, 5] {
        let params = QottParams::minimal(p, &[1, 2])?;
        let closed = closed_form_preview(&params)?;
        let secrets = [
            DensityOperator::basis(secret_register(p), 0)?,
            DensityOperator::basis(secret_register(p), 1)?,
            DensityOperator::pure(&random_pure(&secret_register(p), &mut rng)),
            random_density(&secret_register(p), p, &mut rng),
        ];
        for j in params.bob_cards() {
            let views = secrets
                .iter()
                .map(|rho| bob_preview(&params, &AliceStrategy::honest(rho)?, j))
                .collect::<Result<Vec<_>>>()?;
            for (x, v) in views.iter().enumerate() {
                worst = worst.max(v.distance(&closed)?);
                for w in &views[x + 1..] {
                    worst = worst.max(v.distance(w)?);
                }
            }
        }
    }
    verdict(worst <= 1e-10, format!("max Bob-view distance {worst:.2e}"))
}

fn binding_bound() -> Result<Verdict> {
    let mut pass = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_sigma: f64 = 0.0;
    let mut count = 0;
    for j_set in [vec![1, 2], vec![1, 2, 3, 4]] {
        let params = QottParams::minimal(5, &j_set)?;
        let bound = 1.0 / j_set.len() as f64;
        for (k, s) in adversary_family(&params, &mut seeded(303))?.into_iter().enumerate() {
            let mc = monte_carlo(&params, &s.strategy, DetectorModel::ideal(), 10_000, 400 + k as u64)?;
            let analytic = cheat_analysis(&params, &s.strategy)?;
            let sigma = (mc.exact * (1.0 - mc.exact) / mc.trials as f64).sqrt();
            let z = if sigma > 0.0 { (mc.estimate - mc.exact).abs() / sigma } else { 0.0 };
            let ok = mc.exact <= bound + 1e-9
                && (analytic.average - mc.exact).abs() <= 1e-9
                && (mc.estimate - mc.exact).abs() <= 3.0 * sigma;
            if !ok {
                eprintln!(
                    "  binding: {} |J|={} exact {} analytic {} MC {} (z={z:.2})",
                    s.name,
                    j_set.len(),
                    mc.exact,
                    analytic.average,
                    mc.estimate
                );
            }
            pass &= ok;
            worst_excess = worst_excess.max(mc.exact - bound);
            worst_sigma = worst_sigma.max(z);
            count += 1;
        }
    }
    verdict(
        pass,
        format!("{count} strategies, max exact - 1/|J| = {worst_excess:.2e}, max MC deviation {worst_sigma:.2} sigma"),
    )
}

fn ideal_functionality() -> Result<Verdict> {
    let p = 3;
    let params = QottParams::minimal(p, &[1, 2])?;
    let mut rng = seeded(505);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let wide = if k % 2 == 0 { 3 } else { 6 };
        let channel = if wide == 3 && k % 4 == 0 { None } else { Some(random_channel(wide, 3, 2, &mut rng)?) };
        let strategy = AliceStrategy::GenericSubchannels {
            instrument: random_instrument(p, 3, wide, &mut rng)?,
            channel,
            offset: [0, 0],
        };
        let oracle = delayed_teleport_oracle(&params, &strategy)?;
        let (_, out) = run_protocol(&params, None, &strategy, DetectorModel::ideal(), k)?;
        for (o, b) in oracle.iter().zip(&out.branches) {
            if o.commitment != b.commitment {
                return verdict(false, "branch order differs".into());
            }
            worst = worst.max(trace_distance(&o.state, &b.passed)?);
        }
    }
    verdict(worst <= 1e-9, format!("max per-branch distance {worst:.2e}"))
}

fn noise_and_repetition() -> Result<Verdict> {
    let eps = 0.05;
    let detector = DetectorModel::new(eps)?;
    let params = QottParams::minimal(5, &[1, 2])?;
    let bound = 0.5;
    let mut worst_excess = f64::NEG_INFINITY;
    for s in adversary_family(&params, &mut seeded(606))? {
        let e = exact_acceptance(&params, &s.strategy, detector)?;
        worst_excess = worst_excess.max(e.average - (bound + eps));
    }
    let secret = random_density(&secret_register(5), 2, &mut seeded(607));
    let worst_strategy = saturating_shift_strategy(&params, &secret, 1)?;
    let mut rep_ok = true;
    let mut notes = Vec::new();
    for n in [2, 3] {
        let r = repetition_mode(n, &params, &worst_strategy, detector, 10_000, 700 + n as u64)?;
        let sigma = (r.bound * (1.0 - r.bound) / r.trials as f64).sqrt();
        rep_ok &= r.estimate <= r.bound + 3.0 * sigma;
        notes.push(format!("n={n}: {:.4} vs bound {:.4}", r.estimate, r.bound));
    }
    verdict(
        worst_excess <= 1e-9 && rep_ok,
        format!("max exact - (1/|J| + eps) = {worst_excess:.2e}; {}", notes.join(", ")),
    )
}

fn twirl_and_src() -> Result<Verdict> {
    let mut worst_twirl: f64 = 0.0;
    let mut worst_entropy: f64 = 0.0;
    for p in [3, 5, 7] {
        let params = QottParams::minimal(p, &[1, 2])?;
        worst_twirl = worst_twirl.max(twirl_check(&params)?);
    }
    for (p, j) in [(3, vec![1, 2]), (5, vec![1, 2, 3, 4]), (7, vec![1, 2, 3])] {
        let params = QottParams::minimal(p, &j)?;
        let want = 2.0 * (p as f64).log2() + 2.0 * (j.len() as f64).log2();
        worst_entropy = worst_entropy.max((commodity_entropy(&params)? - want).abs());
    }
    let report = src_report(5, &[1, 2, 3, 4], None)?;
    let l5 = 5f64.log2();
    let row = |name: &str| report.rows.iter().find(|r| r.scheme == name).map(|r| r.bits);
    let src_ok = row("qotp-via-rivest").is_some_and(|b| (b - 6.0 * l5).abs() <= 1e-12)
        && row("superdense").is_some_and(|b| (b - (l5 + 4.0)).abs() <= 1e-12)
        && row("qott").is_some_and(|b| (b - (2.0 * l5 + 4.0)).abs() <= 1e-12);
    verdict(
        worst_twirl <= 1e-10 && worst_entropy <= 1e-9 && src_ok,
        format!(
            "max twirl deviation {worst_twirl:.2e}, max entropy error {worst_entropy:.2e}, SRC rows match: {src_ok}"
        ),
    )
}

fn superdense() -> Result<Verdict> {
    let p = 3;
    let params = QottParams::minimal(p, &[1, 2])?;
    let mut worst_decode: f64 = 0.0;
    for a in 0..p {
        for b in 0..p {
            let t = superdense_commit(&params, [a, b], None, (a * p + b) as u64)?;
            worst_decode = worst_decode.max((1.0 - t.decode_success).abs()).max((1.0 - t.accept_probability).abs());
        }
    }
    let mut worst_view: f64 = 0.0;
    for j in params.bob_cards() {
        let base = superdense_preview(&params, [0, 0], j)?;
        for a in 0..p {
            for b in 0..p {
                worst_view = worst_view.max(superdense_preview(&params, [a, b], j)?.distance(&base)?);
            }
        }
    }
    verdict(
        worst_decode <= 1e-10 && worst_view <= 1e-10,
        format!("max decode error {worst_decode:.2e}, max view distance {worst_view:.2e}"),
    )
}

fn classical_baseline() -> Result<Verdict> {
    let mut worst_mi: f64 = 0.0;
    let mut binding_ok = true;
    for p in [3, 5, 7] {
        worst_mi = worst_mi.max(hiding_mutual_information(p)?.abs());
        let c = cheat_success(p)?;
        binding_ok &= (c.average - 1.0 / p as f64).abs() <= 1e-12 && (c.worst - 1.0 / p as f64).abs() <= 1e-12;
    }
    verdict(
        worst_mi <= 1e-12 && binding_ok,
        format!("max mutual information {worst_mi:.2e}, cheat success 1/p: {binding_ok}"),
    )
}

type Criterion = (usize, &'static str, Option<Duration>, fn() -> Result<Verdict>);

fn main() {
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [Criterion; 11] = [
        (1, "masking universality", Some(Duration::from_secs(10)), masking_universality),
        (2, "entropy achievability", None, entropy_achievability),
        (3, "duality and (2,3) secret sharing", None, duality),
        (4, "honest protocol correctness", Some(Duration::from_secs(30)), honest_correctness),
        (5, "perfect hiding", None, perfect_hiding),
        (6, "binding bound", Some(Duration::from_secs(120)), binding_bound),
        (7, "ideal-functionality equivalence", None, ideal_functionality),
        (8, "noise and repetition", None, noise_and_repetition),
        (9, "twirl and shared-randomness cost", None, twirl_and_src),
        (10, "superdense mode", None, superdense),
        (11, "classical baseline", None, classical_baseline),
    ];
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(v) => {
                let in_time = limit.is_none_or(|l| elapsed <= l);
                let timing = match limit {
                    Some(l) if !in_time => format!(" [over the {:?} budget]", l),
                    _ => String::new(),
                };
                (v.pass && in_time, format!("{}{timing}", v.detail))
            }
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {n:>2} {name}: {detail} ({:.2}s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
