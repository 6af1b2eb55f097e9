//! `pgcodes`: rate reports, verification sweeps, simulation and channel tools
//! for pseudo-group codes over `D6`.
//!
//! Exit status is 0 on success, 1 when a verification sweep finds a mismatch
//! and 2 on usage errors (including unreadable or malformed channel files).

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pgcodes::channel::{parse_channel_json, parse_channel_tsv};
use pgcodes::entropy_opt::{
    closed_form_entropy, entropy_inequality_check, entropy_sweep, inequality_sweep,
    optimality_sweep,
};
use pgcodes::lemma::{self, BoundParams};
use pgcodes::rate::{best_labeling, rate_breakdown, Objective};
use pgcodes::simulator::{estimate_error, DecoderKind, SimulationConfig, DEFAULT_EPSILON};
use pgcodes::{BuiltinChannel, Channel, DihedralParams, Execution, Labeling, PseudoGroupCode};
use serde_json::json;

use crate::output::{fixed, Format, Table};

/// Seed used when neither `--seed` nor `PGCODES_SEED` is given.
const DEFAULT_SEED: u64 = 2013;

#[derive(Parser)]
#[command(
    name = "pgcodes",
    version,
    about = "Pseudo-group codes over dihedral groups"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Tsv, global = true)]
    format: Format,

    /// Seed for every randomized step.
    #[arg(long, env = "PGCODES_SEED", default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,

    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pseudo-group and Abelian achievable rates of a channel.
    Rate(RateArgs),
    /// Monte Carlo block error rate of the code ensemble.
    Simulate(SimulateArgs),
    /// Check the collision-probability formulas against exhaustive enumeration.
    #[command(name = "verify-lemma1")]
    VerifyLemma1(Lemma1Args),
    /// Check the closed-form entropy maximizer against a numerical solver.
    #[command(name = "verify-entropy")]
    VerifyEntropy(EntropyArgs),
    /// Best input labeling for each rate objective.
    Labelings(LabelingArgs),
    /// Inspect or generate channel files.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Draw a code from the ensemble.
    #[command(name = "sample-code")]
    SampleCode(SampleArgs),
}

#[derive(Args)]
struct ChannelArg {
    /// Channel file (`.json` or `.tsv`), or `builtin:NAME[:a,b,..]`.
    #[arg(long)]
    channel: String,

    /// Labeling overriding the file's, as a comma-separated permutation.
    #[arg(long, value_delimiter = ',')]
    labeling: Option<Vec<usize>>,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    channel: ChannelArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Ml,
    Typ,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    channel: ChannelArg,
    /// Target rate in bits per channel use; `k = round(R n / log2 6)`.
    #[arg(long)]
    rate: f64,
    /// Block lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    decoder: DecoderArg,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Typicality slack.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Redraw codes until their codewords are distinct.
    #[arg(long)]
    distinct: bool,
}

#[derive(Args)]
struct Lemma1Args {
    /// Message length for the exhaustive sweep (at most 6).
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Also search and verify the `M1`, `M2` thresholds.
    #[arg(long)]
    thresholds: bool,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    delta_prime: f64,
    /// Largest `m1`, `m2` examined by the threshold search.
    #[arg(long, default_value_t = lemma::DEFAULT_THRESHOLD_CAP)]
    cap: u32,
}

#[derive(Args)]
struct EntropyArgs {
    /// Random `(P_X, alpha)` instances compared with the numerical optimum.
    #[arg(long, default_value_t = 50)]
    count: usize,
    /// Allowed gap between closed form and numerical optimum (bits).
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Grid side for the inequality sweep (side x side points).
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Random feasible points checked against the closed form per instance.
    #[arg(long, default_value_t = 2)]
    feasible_samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    RStar,
    RAbelian,
    Symmetric,
    All,
}

#[derive(Args)]
struct LabelingArgs {
    #[command(flatten)]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::All)]
    objective: ObjectiveArg,
}

#[derive(Subcommand)]
enum ChannelCommand {
    /// Print a channel's transition matrix.
    Show {
        /// Channel file or `builtin:NAME[:a,b,..]`.
        channel: String,
    },
    /// Emit a builtin channel as a channel file.
    Builtin {
        /// identity, useless, rotation-revealing, reflection-revealing,
        /// group-noise or three-eps.
        name: String,
        /// Numeric parameters of the family.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Odd prime `p` of the group `D_2p`.
        #[arg(long, default_value_t = 3)]
        p: u32,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Verification(String),
}

impl From<pgcodes::Error> for Failure {
    fn from(e: pgcodes::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let ctx = Context {
        format: cli.format,
        seed: cli.seed,
        exec,
    };
    let result = match &cli.command {
        Command::Rate(a) => ctx.rate(a),
        Command::Simulate(a) => ctx.simulate(a),
        Command::VerifyLemma1(a) => ctx.verify_lemma1(a),
        Command::VerifyEntropy(a) => ctx.verify_entropy(a),
        Command::Labelings(a) => ctx.labelings(a),
        Command::Channel(c) => ctx.channel(c),
        Command::SampleCode(a) => ctx.sample_code(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(text)) => {
            print!("{text}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

struct Context {
    format: Format,
    seed: u64,
    exec: Execution,
}

fn load_channel(spec: &str) -> Result<(Channel, Labeling), Failure> {
    if let Some(rest) = spec.strip_prefix("builtin:") {
        let (name, params) = match rest.split_once(':') {
            Some((name, list)) => {
                let params = list
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Failure::Usage(format!("bad channel parameter {v:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (name, params)
            }
            None => (rest, Vec::new()),
        };
        let channel = BuiltinChannel::from_name(name, &params)?.build(DihedralParams::D6)?;
        let size = channel.input_size();
        return Ok((channel, Labeling::identity(size)));
    }
    let path = PathBuf::from(spec);
    let text =
        std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
    let parsed = if path.extension().is_some_and(|e| e == "tsv") {
        parse_channel_tsv(&text).map(|c| {
            let size = c.input_size();
            (c, Labeling::identity(size))
        })
    } else {
        parse_channel_json(&text)
    };
    parsed.map_err(|d| Failure::Usage(format!("{spec}: {d}")))
}

fn resolve(arg: &ChannelArg) -> Result<(Channel, Labeling), Failure> {
    let (channel, labeling) = load_channel(&arg.channel)?;
    match &arg.labeling {
        Some(perm) => {
            if perm.len() != channel.input_size() {
                return Err(Failure::Usage(format!(
                    "labeling has {} entries, channel has {} inputs",
                    perm.len(),
                    channel.input_size()
                )));
            }
            Ok((channel, Labeling::from_permutation(perm.clone())?))
        }
        None => Ok((channel, labeling)),
    }
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl Context {
    fn rate(&self, args: &RateArgs) -> Outcome {
        let (channel, labeling) = resolve(&args.channel)?;
        let r = rate_breakdown(&channel, &labeling)?;
        let rows: [(&str, f64, &str); 10] = [
            ("h_x_given_y", r.h_x_given_y, "H(X|Y)"),
            (
                "h_x_given_coset_y",
                r.h_x_given_coset_y,
                "H(X|[X]Y), [X] = coset of {1,x,x^2}",
            ),
            (
                "h_x_given_z3_y",
                r.h_x_given_z3_y,
                "H(X|[X]_3 Y), [X]_3 = coset of {0,2,4}",
            ),
            (
                "h_x_given_z2_y",
                r.h_x_given_z2_y,
                "H(X|[X]_2 Y), [X]_2 = coset of {0,3}",
            ),
            ("term_full", r.term_full, "log2(6) - H(X|Y)"),
            (
                "term_coset",
                r.term_coset,
                "(log2(6)/log2(3)) (log2(3) - H(X|[X]Y))",
            ),
            ("r_star", r.r_star, "min(term_full, term_coset)"),
            (
                "abelian_term_coset3",
                r.abelian_term_coset3,
                "(log2(6)/log2(3)) (log2(3) - H(X|[X]_3 Y))",
            ),
            (
                "abelian_term3",
                r.abelian_term3,
                "log2(6) (1 - H(X|[X]_2 Y))",
            ),
            (
                "r_abelian",
                r.r_abelian,
                "min(term_full, abelian_term_coset3, abelian_term3)",
            ),
        ];
        match self.format {
            Format::Json => {
                let obj: serde_json::Map<_, _> = rows
                    .iter()
                    .map(|(k, v, _)| (k.to_string(), json!(v)))
                    .collect();
                Ok(output::json_line(&json!({
                    "labeling": labeling.as_slice(),
                    "rates": obj,
                })))
            }
            Format::Tsv => {
                let mut t = Table::new(&["quantity", "value", "source"]);
                for (k, v, s) in rows {
                    t.row(vec![k.to_string(), fixed(v), s.to_string()]);
                }
                Ok(t.render())
            }
        }
    }

    fn simulate(&self, args: &SimulateArgs) -> Outcome {
        let (channel, labeling) = resolve(&args.channel)?;
        let decoder = match args.decoder {
            DecoderArg::Ml => DecoderKind::Ml,
            DecoderArg::Typ => DecoderKind::Typicality,
        };
        let mut reports = Vec::with_capacity(args.n.len());
        for &n in &args.n {
            let mut cfg = SimulationConfig::new(args.rate, n, decoder, args.trials, self.seed);
            cfg.epsilon = args.epsilon;
            cfg.distinct_codewords = args.distinct;
            reports.push(estimate_error(&channel, &labeling, &cfg, self.exec)?);
        }
        match self.format {
            Format::Json => Ok(output::json_line(&json!(reports))),
            Format::Tsv => {
                let mut t =
                    Table::new(&["n", "k", "trials", "errors", "rate", "ci_low", "ci_high"]);
                for r in &reports {
                    t.row(vec![
                        r.n.to_string(),
                        r.k.to_string(),
                        r.trials.to_string(),
                        r.errors.to_string(),
                        fixed(r.error_rate),
                        fixed(r.ci_low),
                        fixed(r.ci_high),
                    ]);
                }
                Ok(t.render())
            }
        }
    }

    fn verify_lemma1(&self, args: &Lemma1Args) -> Outcome {
        let report = lemma::verify_oracle(args.k, self.exec)?;
        let mut failures = report.mismatches.len();
        let thresholds = if args.thresholds {
            let params = BoundParams::new(args.delta, args.delta_prime)?;
            let t = lemma::thresholds(params, args.cap)?;
            let violation = lemma::verify_thresholds(params, &t);
            failures += usize::from(violation.is_some());
            Some((t, violation))
        } else {
            None
        };
        let verdict = if failures == 0 { "PASS" } else { "FAIL" };
        let summary = format!(
            "{verdict} {} types × classes, {} mismatches",
            report.types_by_class(),
            report.mismatches.len()
        );
        let text = match self.format {
            Format::Json => output::json_line(&json!({
                "report": report,
                "thresholds": thresholds.as_ref().map(|(t, v)| json!({
                    "m1": t.m1, "m2": t.m2, "m2_by_m1": t.m2_by_m1, "cap": t.cap,
                    "violation": v,
                })),
                "summary": summary,
            })),
            Format::Tsv => {
                let mut t = Table::new(&[
                    "m1",
                    "m2",
                    "class",
                    "probability",
                    "comparisons",
                    "mismatches",
                    "status",
                ]);
                for ty in &report.types {
                    t.row(vec![
                        ty.m1.to_string(),
                        ty.m2.to_string(),
                        ty.class.name().to_string(),
                        ty.probability.clone(),
                        ty.comparisons.to_string(),
                        ty.mismatches.to_string(),
                        if ty.mismatches == 0 { "PASS" } else { "FAIL" }.to_string(),
                    ]);
                }
                let mut text = t.render();
                for c in &report.mismatches {
                    text.push_str(&format!(
                        "# mismatch u={} u~={} theta={} formula={} oracle={}\n",
                        c.u, c.u_tilde, c.theta, c.formula, c.oracle
                    ));
                }
                if let Some((t, violation)) = &thresholds {
                    text.push_str(&format!(
                        "# thresholds delta={} delta'={}: M1={} M2={} (checked for m1, m2 <= {})\n",
                        args.delta, args.delta_prime, t.m1, t.m2, t.cap
                    ));
                    if let Some((m1, m2)) = violation {
                        text.push_str(&format!("# threshold violation at m1={m1} m2={m2}\n"));
                    }
                }
                text.push_str(&summary);
                text.push('\n');
                text
            }
        };
        if failures == 0 {
            Ok(text)
        } else {
            Err(Failure::Verification(text))
        }
    }

    fn verify_entropy(&self, args: &EntropyArgs) -> Outcome {
        if args.grid < 2 {
            return Err(Failure::Usage("--grid must be at least 2".into()));
        }
        let rows = entropy_sweep(args.count, self.seed, args.tolerance, self.exec)?;
        let gap_failures = rows
            .iter()
            .filter(|r| r.gap.is_nan() || r.gap >= args.tolerance)
            .count();

        let optimality = optimality_sweep(args.count, args.feasible_samples, self.seed)?;
        let grid = inequality_sweep(args.grid)?;
        let equality = entropy_inequality_check(0.5, 0.5)?;
        let spot = closed_form_entropy(&[1.0 / 6.0; 6], 0.5)?;

        let ok = gap_failures == 0
            && optimality.worst_residual < 1e-12
            && optimality.beaten == 0
            && grid.inequality_failures == 0
            && grid.chord_failures == 0;
        let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
        let summary = format!(
            "{} {} instances (max gap {:.3e}), residual {:.3e}, {} feasible samples beat closed form, \
             {} grid points: {} inequality and {} chord failures",
            if ok { "PASS" } else { "FAIL" },
            rows.len(),
            max_gap,
            optimality.worst_residual,
            optimality.beaten,
            grid.points,
            grid.inequality_failures,
            grid.chord_failures
        );
        let text = match self.format {
            Format::Json => output::json_line(&json!({
                "rows": rows,
                "optimality": optimality,
                "inequality_grid": grid,
                "equality_point": equality,
                "uniform_half_entropy": spot,
                "summary": summary,
            })),
            Format::Tsv => {
                let mut t = Table::new(&["p", "alpha", "closed_form", "numeric", "gap"]);
                for r in &rows {
                    t.row(vec![
                        fixed(r.p),
                        fixed(r.alpha),
                        format!("{:.9}", r.closed_form),
                        format!("{:.9}", r.numeric),
                        format!("{:.3e}", r.gap),
                    ]);
                }
                let mut text = t.render();
                text.push_str(&format!(
                    "# h(q) at (1/2, 1/2): lhs={:.9} rhs={:.9}; H at (uniform, 1/2) = {:.6}\n",
                    equality.lhs, equality.rhs, spot
                ));
                text.push_str(&format!("# {summary}\n"));
                text
            }
        };
        if ok {
            Ok(text)
        } else {
            Err(Failure::Verification(text))
        }
    }

    fn labelings(&self, args: &LabelingArgs) -> Outcome {
        let (channel, labeling) = resolve(&args.channel)?;
        let objectives: Vec<Objective> = match args.objective {
            ObjectiveArg::RStar => vec![Objective::RStar],
            ObjectiveArg::RAbelian => vec![Objective::RAbelian],
            ObjectiveArg::Symmetric => vec![Objective::Symmetric],
            ObjectiveArg::All => Objective::ALL.to_vec(),
        };
        let mut results = Vec::new();
        for obj in objectives {
            let (best, value) = best_labeling(&channel, obj, self.exec)?;
            let current = obj.evaluate(&channel, &labeling)?;
            results.push((obj, best, value, current));
        }
        match self.format {
            Format::Json => Ok(output::json_line(&json!(results
                .iter()
                .map(|(o, b, v, c)| json!({
                    "objective": o.name(),
                    "best_value": v,
                    "best_labeling": b.as_slice(),
                    "current_value": c,
                    "current_labeling": labeling.as_slice(),
                }))
                .collect::<Vec<_>>()))),
            Format::Tsv => {
                let mut t =
                    Table::new(&["objective", "best_value", "best_labeling", "current_value"]);
                for (o, b, v, c) in &results {
                    t.row(vec![
                        o.name().to_string(),
                        fixed(*v),
                        join(b.as_slice()),
                        fixed(*c),
                    ]);
                }
                Ok(t.render())
            }
        }
    }

    fn channel(&self, cmd: &ChannelCommand) -> Outcome {
        let (channel, labeling) = match cmd {
            ChannelCommand::Show { channel } => load_channel(channel)?,
            ChannelCommand::Builtin { name, params, p } => {
                let group = DihedralParams::new(*p)?;
                let channel = BuiltinChannel::from_name(name, params)?.build(group)?;
                let size = channel.input_size();
                (channel, Labeling::identity(size))
            }
        };
        match self.format {
            Format::Json => {
                let explicit =
                    (labeling != Labeling::identity(labeling.len())).then_some(&labeling);
                let mut text = channel.to_json(explicit);
                text.push('\n');
                Ok(text)
            }
            Format::Tsv => {
                let params = channel.params();
                let mut header = vec!["input".to_string(), "element".to_string()];
                header.extend((0..channel.output_size()).map(|y| format!("y{y}")));
                let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
                let mut t = Table::new(&header_refs);
                for symbol in 0..channel.input_size() {
                    let row = labeling.input_of(symbol);
                    let mut cells = vec![
                        row.to_string(),
                        params.from_residue_label(symbol).to_string(),
                    ];
                    cells.extend(channel.rows()[row].iter().map(|v| fixed(*v)));
                    t.row(cells);
                }
                Ok(t.render())
            }
        }
    }

    fn sample_code(&self, args: &SampleArgs) -> Outcome {
        if args.n == 0 {
            return Err(Failure::Usage("--n must be positive".into()));
        }
        let code = PseudoGroupCode::sample_seeded(args.k, args.n, DihedralParams::D6, self.seed);
        match self.format {
            Format::Json => {
                let mut text = code.to_json();
                text.push('\n');
                Ok(text)
            }
            Format::Tsv => {
                let mut t = Table::new(&["i", "j", "g", "h"]);
                for i in 0..args.n {
                    for j in 0..args.k {
                        let pair = code.table().get(i, j);
                        t.row(vec![
                            i.to_string(),
                            j.to_string(),
                            pair.g().to_string(),
                            pair.h().to_string(),
                        ]);
                    }
                }
                let mut text = t.render();
                let dither: Vec<String> = code.dither().iter().map(|d| d.to_string()).collect();
                text.push_str(&format!("# dither {}\n", dither.join(" ")));
                Ok(text)
            }
        }
    }
}
