use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde_json::json;

use qott_core::maskers::SHARE_A;
use qott_core::protocol::{
    bob_preview, cheat_analysis, closed_form_preview, delayed_teleport_oracle, depolarizing, exact_acceptance,
    monte_carlo, post_commit_tamper, random_instrument, repetition_mode, replace_with_zero, run_protocol,
    shift_channel, AliceStrategy, Channel, DetectorModel,
};
use qott_core::qott::QottParams;
use qott_core::qudit::{random_density, trace_distance, Register};
use qott_core::rng::stream;

use super::{ParamArgs, COMMAND_STREAM};
use crate::report::{Check, Outcome, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Honest,
    WrongIndex,
    Tamper,
    Generic,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = StrategyKind::Honest)]
    pub strategy: StrategyKind,
    /// Dark-count probability of Bob's check.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Monte Carlo trials on top of the exact computation.
    #[arg(long, default_value_t = 0)]
    pub trials: u64,
    /// Added to Alice's card at REVEAL (wrong-index defaults to 1,0).
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pub offset: Option<Vec<usize>>,
    /// Channel on A: `zero`, `depolarize:<lambda>` or `shift:<t>`.
    #[arg(long)]
    pub channel: Option<String>,
    /// Include per-branch data in the report.
    #[arg(long)]
    pub full_branches: bool,
}

fn parse_channel(arg_text: &str, n: usize) -> anyhow::Result<Channel> {
    let (name, arg) = arg_text.split_once(':').unwrap_or((arg_text, ""));
    Ok(match name {
        "zero" if arg.is_empty() => replace_with_zero(n)?,
        "depolarize" => depolarizing(n, arg.parse().context("depolarize expects a strength in [0, 1]")?)?,
        "shift" => shift_channel(n, arg.parse().context("shift expects an integer")?)?,
        _ => bail!("unknown channel `{arg_text}`; use zero, depolarize:<lambda> or shift:<t>"),
    })
}

struct Built {
    strategy: AliceStrategy,
    secret: qott_core::DensityOperator,
    channel: Option<Channel>,
}

fn build_strategy(args: &RunArgs, params: &QottParams, seed: u64) -> anyhow::Result<Built> {
    let p = params.p();
    let d_a = params.masker().share_register().dim_of(SHARE_A)?;
    let mut rng = stream(seed, COMMAND_STREAM - 1);
    let secret = random_density(&Register::single("I", p)?, 2, &mut rng);
    let offset = args.offset.as_ref().map(|o| [o[0], o[1]]);
    let channel = args.channel.as_deref().map(|c| parse_channel(c, d_a)).transpose()?;
    let strategy = match args.strategy {
        StrategyKind::Honest => {
            if offset.is_some() || channel.is_some() {
                bail!("--offset and --channel do not apply to the honest strategy");
            }
            AliceStrategy::honest(&secret)?
        }
        StrategyKind::WrongIndex => {
            if channel.is_some() {
                bail!("--channel does not apply to the wrong-index strategy");
            }
            AliceStrategy::wrong_indices(&secret, offset.unwrap_or([1, 0]))?
        }
        StrategyKind::Tamper => {
            if offset.is_some() {
                bail!("the tamper strategy reveals the true card; use generic for offsets");
            }
            let ch = channel.clone().unwrap_or(replace_with_zero(d_a)?);
            AliceStrategy::post_commit(&secret, ch)?
        }
        StrategyKind::Generic => AliceStrategy::GenericSubchannels {
            instrument: random_instrument(p, d_a, d_a, &mut rng)?,
            channel: channel.clone(),
            offset: offset.unwrap_or([0, 0]),
        },
    };
    strategy.validate(params)?;
    let channel = match &strategy {
        AliceStrategy::PostCommitChannel { channel, .. } => Some(channel.clone()),
        _ => channel,
    };
    Ok(Built { strategy, secret, channel })
}

fn sampled_checks(checks: &mut Vec<Check>, estimate: f64, exact: f64, trials: u64, cheat_bound: Option<f64>) {
    let sigma = (exact * (1.0 - exact) / trials as f64).sqrt();
    checks.push(Check::at_most("Monte Carlo deviation from exact", (estimate - exact).abs(), 3.0 * sigma, 1e-12));
    if let Some(b) = cheat_bound {
        let sigma_b = (b * (1.0 - b) / trials as f64).sqrt();
        checks.push(Check::at_most("Monte Carlo acceptance", estimate, b + 3.0 * sigma_b, 1e-12));
    }
}

fn envelope_params(args: &RunArgs, strategy: &AliceStrategy) -> serde_json::Value {
    let mut v = args.params.json();
    v["strategy"] = json!(strategy.name());
    v["epsilon"] = json!(args.epsilon);
    v["trials"] = json!(args.trials);
    v["offset"] = json!(strategy.offset());
    v["channel"] = json!(args.channel);
    v["binding_bound"] = json!(1.0 / args.params.j.len() as f64 + args.epsilon);
    v
}

pub fn run(args: &RunArgs, seed: u64) -> anyhow::Result<Outcome> {
    let params = args.params.build()?;
    let detector = DetectorModel::new(args.epsilon)?;
    let built = build_strategy(args, &params, seed)?;
    let strategy = &built.strategy;
    let p = params.p();
    let cheating = strategy.reveals_wrong_indices(p);
    let bound = 1.0 / params.j_set().len() as f64 + args.epsilon;

    let (transcript, outcome) = run_protocol(&params, None, strategy, detector, seed)?;
    let exact = exact_acceptance(&params, strategy, detector)?;
    let mut checks = vec![Check::equal(
        "commit distribution total",
        transcript.branches.iter().map(|b| b.probability).sum(),
        1.0,
        1e-10,
    )];
    match args.strategy {
        StrategyKind::Honest => {
            checks.push(Check::equal("honest acceptance", transcript.accept_probability, 1.0, 1e-10));
            if args.epsilon == 0.0 {
                checks.push(Check::at_least("output fidelity", transcript.output_fidelity.unwrap_or(0.0), 1.0, 1e-9));
            }
            let view = bob_preview(&params, strategy, transcript.cards.bob)?;
            checks.push(Check::at_most(
                "Bob's pre-reveal view vs. secret-free state",
                view.distance(&closed_form_preview(&params)?)?,
                0.0,
                1e-10,
            ));
        }
        StrategyKind::Tamper => {
            let ch = built.channel.as_ref().expect("tamper has a channel");
            let t = post_commit_tamper(&params, &built.secret, ch, Some(transcript.cards), seed)?;
            checks.push(Check::equal(
                "tamper acceptance vs. partner overlap",
                t.accept_probability,
                t.predicted,
                1e-10,
            ));
            if let Some(d) = t.output_distance {
                checks.push(Check::at_most("accepted output vs. secret", d, 0.0, 1e-9));
            }
        }
        _ => {}
    }
    if cheating {
        checks.push(Check::at_most("card-averaged acceptance", exact.average, bound, 1e-9));
        let analysis = cheat_analysis(&params, strategy)?;
        checks.push(Check::equal(
            "key-overlap formula vs. engine",
            analysis.with_dark_count(detector),
            exact.average,
            1e-10,
        ));
    } else if args.strategy == StrategyKind::Generic {
        let oracle = delayed_teleport_oracle(&params, strategy)?;
        let mut worst: f64 = 0.0;
        for (o, b) in oracle.iter().zip(&outcome.branches) {
            worst = worst.max(trace_distance(&o.state, &b.passed)?);
        }
        checks.push(Check::at_most("per-branch distance to delayed teleportation", worst, 0.0, 1e-9));
    }
    let mut mc = None;
    if args.trials > 0 {
        let est = monte_carlo(&params, strategy, detector, args.trials, seed)?;
        sampled_checks(&mut checks, est.estimate, est.exact, args.trials, cheating.then_some(bound));
        mc = Some(est);
    }

    let mut data = json!({ "transcript": transcript, "exact_acceptance": exact.average, "monte_carlo": mc });
    let mut table = None;
    if args.full_branches {
        let mut t = Table::new(&["a", "b", "probability", "pass_probability"]);
        for b in &transcript.branches {
            t.push(vec![b.a.to_string(), b.b.to_string(), b.probability.to_string(), b.pass_probability.to_string()]);
        }
        table = Some(t);
        data["per_card"] = serde_json::to_value(&exact.per_card)?;
    } else if let Some(tr) = data["transcript"].as_object_mut() {
        tr.remove("branches");
    }
    Ok(Outcome { parameters: envelope_params(args, strategy), checks, data, table })
}

pub fn montecarlo(args: &RunArgs, repeat: u32, seed: u64) -> anyhow::Result<Outcome> {
    if args.full_branches {
        bail!("--full-branches applies to `protocol run` only");
    }
    if args.trials == 0 {
        bail!("--trials must be positive");
    }
    if repeat == 0 {
        bail!("--repeat must be positive");
    }
    let params = args.params.build()?;
    let detector = DetectorModel::new(args.epsilon)?;
    let built = build_strategy(args, &params, seed)?;
    let strategy = &built.strategy;
    let cheating = strategy.reveals_wrong_indices(params.p());
    let single_bound = 1.0 / params.j_set().len() as f64 + args.epsilon;
    let mut checks = Vec::new();
    let mut table = Table::new(&["instances", "trials", "accepted", "estimate", "std_error", "exact", "bound"]);
    let data = if repeat == 1 {
        let est = monte_carlo(&params, strategy, detector, args.trials, seed)?;
        sampled_checks(&mut checks, est.estimate, est.exact, est.trials, cheating.then_some(single_bound));
        if cheating {
            checks.push(Check::at_most("card-averaged acceptance", est.exact, single_bound, 1e-9));
        }
        table.push(vec![
            "1".into(),
            est.trials.to_string(),
            est.accepts.to_string(),
            est.estimate.to_string(),
            est.std_error.to_string(),
            est.exact.to_string(),
            if cheating { single_bound.to_string() } else { String::new() },
        ]);
        serde_json::to_value(&est)?
    } else {
        let est = repetition_mode(repeat, &params, strategy, detector, args.trials, seed)?;
        sampled_checks(&mut checks, est.estimate, est.exact, est.trials, cheating.then_some(est.bound));
        if cheating {
            checks.push(Check::at_most("exact all-accept probability", est.exact, est.bound, 1e-9));
        }
        table.push(vec![
            repeat.to_string(),
            est.trials.to_string(),
            est.all_accepted.to_string(),
            est.estimate.to_string(),
            est.std_error.to_string(),
            est.exact.to_string(),
            est.bound.to_string(),
        ]);
        serde_json::to_value(&est)?
    };
    let mut parameters = envelope_params(args, strategy);
    parameters["repeat"] = json!(repeat);
    Ok(Outcome { parameters, checks, data, table: Some(table) })
}
