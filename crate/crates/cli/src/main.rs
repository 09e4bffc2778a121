//! `netdist`: validation, neighbourhoods, distances, witnesses and network
//! spaces for rooted binary phylogenetic networks.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 search limit hit.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::{json, Value};

use netdist_core::dot::{network_to_dot, pruned_to_dot};
use netdist_core::report::{distance_json, sequence_json};
use netdist_core::{
    ad_distance, agreement_distance, enumerate_neighbors, mag_to_pr_sequence, parse_enewick,
    parse_enewick_with_taxa, pr_distance, pr_to_snpr_sequence, random_network, rspr_distance,
    snpr_distance, verify_agreement_witness, verify_sequence, write_enewick, AgreementCertificate,
    AgreementError, Canonical, DistanceError, DistanceResult, NetworkSpace, OpSet, PhyloNetwork,
    RearrangementSequence, SearchOptions, TaxaSet, Witness,
};

#[derive(Parser, Debug)]
#[command(
    name = "netdist",
    version,
    about = "Rearrangement and agreement distances between phylogenetic networks"
)]
struct Cli {
    /// Worker threads for parallel searches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Enewick,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Ad,
    Pr,
    Snpr,
    Rspr,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum OpsArg {
    Pr,
    Snpr,
    Rspr,
}

impl From<OpsArg> for OpSet {
    fn from(o: OpsArg) -> Self {
        match o {
            OpsArg::Pr => OpSet::Pr,
            OpsArg::Snpr => OpSet::Snpr,
            OpsArg::Rspr => OpSet::Rspr,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Limits {
    /// Largest reticulation number on the way (default: max(r, r') + 1).
    #[arg(long)]
    cap: Option<usize>,
    /// Largest number of search states (or pruning classes per level for `ad`).
    #[arg(long)]
    budget_states: Option<usize>,
}

impl Limits {
    fn options(&self) -> SearchOptions {
        SearchOptions {
            cap: self.cap,
            budget_states: self.budget_states,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate networks.
    Validate {
        /// eNewick files (one network per line) or inline eNewick strings.
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// Distance between two networks.
    Distance {
        #[arg(long, value_enum, default_value_t = MetricArg::Ad)]
        metric: MetricArg,
        #[command(flatten)]
        limits: Limits,
        /// Include the witness.
        #[arg(long)]
        witness: bool,
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// All networks one operation away.
    Neighbors {
        #[arg(long, value_enum, default_value_t = OpsArg::Pr)]
        ops: OpsArg,
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// A rearrangement sequence between two networks: shortest for
    /// `pr`/`snpr`/`rspr`, built from a maximum agreement graph for `ad`.
    Sequence {
        #[arg(long, value_enum, default_value_t = MetricArg::Pr)]
        metric: MetricArg,
        /// With `--metric ad`, convert the built sequence to this set.
        #[arg(long, value_enum, default_value_t = OpsArg::Pr)]
        ops: OpsArg,
        #[command(flatten)]
        limits: Limits,
        #[arg(required = true)]
        inputs: Vec<String>,
    },
    /// All networks on taxa 1..n with at most r reticulations.
    Enumerate {
        #[arg(long)]
        taxa: usize,
        #[arg(long, default_value_t = 0)]
        max_r: usize,
    },
    /// Quick consistency checks on random networks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        samples: u64,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Limit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Limit(m) => m,
        }
    }
}

impl From<DistanceError> for Failure {
    fn from(e: DistanceError) -> Self {
        match e {
            DistanceError::BudgetExceeded { .. }
            | DistanceError::Disconnected
            | DistanceError::Agreement(AgreementError::BudgetExceeded(_)) => {
                Failure::Limit(e.to_string())
            }
            DistanceError::CapTooSmall { .. } => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<AgreementError> for Failure {
    fn from(e: AgreementError) -> Self {
        DistanceError::from(e).into()
    }
}

type Out = Result<String, Failure>;

/// One raw network: where it came from and its text.
struct Source {
    origin: String,
    text: String,
}

fn read_inputs(inputs: &[String]) -> Result<Vec<Source>, Failure> {
    let mut out = Vec::new();
    for arg in inputs {
        let inline = arg.trim_end().ends_with(';') || arg.contains('(');
        if inline && !Path::new(arg).is_file() {
            out.push(Source {
                origin: "argument".into(),
                text: arg.clone(),
            });
            continue;
        }
        let text =
            std::fs::read_to_string(arg).map_err(|e| Failure::Data(format!("{arg}: {e}")))?;
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                out.push(Source {
                    origin: format!("{arg}:{}", i + 1),
                    text: t.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Parses all sources over the taxa of the first.
fn parse_all(sources: &[Source]) -> Result<Vec<PhyloNetwork>, Failure> {
    let mut nets: Vec<PhyloNetwork> = Vec::new();
    let mut taxa: Option<Arc<TaxaSet>> = None;
    for s in sources {
        let r = match &taxa {
            None => parse_enewick(&s.text),
            Some(t) => parse_enewick_with_taxa(&s.text, t),
        };
        let n = r.map_err(|e| Failure::Data(format!("{}: {e}", s.origin)))?;
        if let Some(t) = &taxa {
            if n.taxa().labels() != t.labels() {
                return Err(Failure::Data(format!("{}: taxa sets differ", s.origin)));
            }
        } else {
            taxa = Some(n.taxa().clone());
        }
        nets.push(n);
    }
    Ok(nets)
}

fn two(inputs: &[String]) -> Result<(PhyloNetwork, PhyloNetwork), Failure> {
    let mut nets = parse_all(&read_inputs(inputs)?)?;
    if nets.len() != 2 {
        return Err(Failure::Usage(format!(
            "expected two networks, got {}",
            nets.len()
        )));
    }
    let b = nets.pop().unwrap();
    Ok((nets.pop().unwrap(), b))
}

fn network_json(n: &PhyloNetwork) -> Value {
    json!({
        "enewick": write_enewick(n),
        "leaves": n.taxa().len(),
        "reticulations": n.reticulation_count(),
        "tree": n.is_tree(),
        "key": n.canonical_key(),
    })
}

fn networks_out(
    nets: &[PhyloNetwork],
    format: Format,
    wrap: impl FnOnce(Vec<Value>) -> Value,
) -> String {
    match format {
        Format::Json => pretty(&wrap(nets.iter().map(network_json).collect())),
        Format::Enewick => nets.iter().map(|n| write_enewick(n) + "\n").collect(),
        Format::Dot => nets.iter().map(network_to_dot).collect(),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn validate(inputs: &[String], format: Format) -> Out {
    let sources = read_inputs(inputs)?;
    let mut nets = Vec::new();
    let mut errors = Vec::new();
    for s in &sources {
        match parse_enewick(&s.text) {
            Ok(n) => nets.push(n),
            Err(e) => errors.push(format!("{}: {e}", s.origin)),
        }
    }
    if !errors.is_empty() {
        return Err(Failure::Data(errors.join("\n")));
    }
    Ok(networks_out(
        &nets,
        format,
        |v| json!({"valid": true, "networks": v}),
    ))
}

fn compute(
    metric: MetricArg,
    a: &PhyloNetwork,
    b: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, Failure> {
    Ok(match metric {
        MetricArg::Ad => ad_distance(a, b, opts)?,
        MetricArg::Pr => pr_distance(a, b, opts)?,
        MetricArg::Snpr => snpr_distance(a, b, opts)?,
        MetricArg::Rspr => rspr_distance(a, b, opts)?,
    })
}

/// Re-checks a witness before it is printed.
fn recheck(r: &DistanceResult, a: &PhyloNetwork, b: &PhyloNetwork) -> Result<(), Failure> {
    let ok = match &r.witness {
        Witness::Sequence(s) => verify_sequence(s).ok && s.len() == r.value,
        Witness::Agreement(m) => {
            let cert = AgreementCertificate {
                embedding_n: m.embedding_n.clone(),
                embedding_nprime: m.embedding_nprime.clone(),
            };
            verify_agreement_witness(&m.graph, a, b, &cert).ok
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Failure::Data(
            "internal error: witness failed re-verification".into(),
        ))
    }
}

fn distance(
    metric: MetricArg,
    limits: &Limits,
    witness: bool,
    inputs: &[String],
    format: Format,
) -> Out {
    let (a, b) = two(inputs)?;
    let r = compute(metric, &a, &b, limits.options())?;
    info!(
        "{} distance {} (exhausted: {})",
        r.metric.name(),
        r.value,
        r.exhausted
    );
    match format {
        Format::Json => {
            if witness {
                recheck(&r, &a, &b)?;
            }
            Ok(pretty(&distance_json(&r, witness)))
        }
        Format::Dot => match &r.witness {
            Witness::Agreement(m) => Ok(pruned_to_dot(&m.graph.graph)),
            Witness::Sequence(s) => sequence_networks(s, Format::Dot),
        },
        Format::Enewick => Err(Failure::Usage("distance output is json or dot".into())),
    }
}

fn neighbors(ops: OpsArg, inputs: &[String], format: Format) -> Out {
    let nets = parse_all(&read_inputs(inputs)?)?;
    let set: OpSet = ops.into();
    let mut docs = Vec::new();
    let mut all = Vec::new();
    for n in &nets {
        if set == OpSet::Rspr && !n.is_tree() {
            return Err(Failure::Data("rSPR neighbourhoods need a tree".into()));
        }
        let nb = enumerate_neighbors(n, set);
        docs.push(json!({
            "network": write_enewick(n),
            "ops": set.name(),
            "count": nb.len(),
            "neighbors": nb.iter().map(|x| json!({"op": x.op, "enewick": write_enewick(&x.network)})).collect::<Vec<_>>(),
        }));
        all.extend(nb.into_iter().map(|x| x.network));
    }
    Ok(match format {
        Format::Json if docs.len() == 1 => pretty(&docs[0]),
        Format::Json => pretty(&Value::Array(docs)),
        f => networks_out(&all, f, |v| Value::Array(v)),
    })
}

fn sequence_networks(s: &RearrangementSequence, format: Format) -> Out {
    let nets = s
        .replay()
        .map_err(|(i, e)| Failure::Data(format!("internal error: step {i}: {e}")))?;
    Ok(networks_out(&nets, format, |v| Value::Array(v)))
}

fn sequence(
    metric: MetricArg,
    ops: OpsArg,
    limits: &Limits,
    inputs: &[String],
    format: Format,
) -> Out {
    let (a, b) = two(inputs)?;
    let seq = match metric {
        MetricArg::Ad => {
            let m = agreement_distance(&a, &b)?;
            let s = mag_to_pr_sequence(&a, &b, &m)?;
            match ops {
                OpsArg::Pr => s,
                OpsArg::Snpr => pr_to_snpr_sequence(&s)?,
                OpsArg::Rspr => {
                    return Err(Failure::Usage("built sequences use pr or snpr".into()))
                }
            }
        }
        m => match compute(m, &a, &b, limits.options())?.witness {
            Witness::Sequence(s) => s,
            Witness::Agreement(_) => unreachable!(),
        },
    };
    let rep = verify_sequence(&seq);
    if !rep.ok {
        return Err(Failure::Data(format!(
            "internal error: sequence failed re-verification: {rep}"
        )));
    }
    match format {
        Format::Json => Ok(pretty(
            &json!({"length": seq.len(), "sequence": sequence_json(&seq)}),
        )),
        f => sequence_networks(&seq, f),
    }
}

fn enumerate(n: usize, max_r: usize, format: Format) -> Out {
    if n == 0 {
        return Err(Failure::Usage("--taxa must be positive".into()));
    }
    let taxa = Arc::new(TaxaSet::numbered(n));
    let space = NetworkSpace::build(&taxa, max_r);
    Ok(networks_out(
        &space.networks,
        format,
        |v| json!({"taxa": n, "max_r": max_r, "count": v.len(), "networks": v}),
    ))
}

fn selftest(seed: u64, samples: u64) -> Out {
    let mut out = String::new();
    let mut failed = 0;
    let mut check = |name: String, ok: bool| {
        let _ = writeln!(out, "{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    };
    for i in 0..samples {
        let s = seed.wrapping_mul(1_000_003).wrapping_add(i);
        let n = 3 + (i % 2) as usize;
        let taxa = Arc::new(TaxaSet::numbered(n));
        let a = random_network(&taxa, (i % 3) as usize, s);
        let b = random_network(&taxa, ((i / 3) % 2) as usize, s ^ 0x9e37_79b9);
        let ad = agreement_distance(&a, &b)?;
        let pr = pr_distance(&a, &b, SearchOptions::default())?;
        let built = mag_to_pr_sequence(&a, &b, &ad)?;
        let cert = AgreementCertificate {
            embedding_n: ad.embedding_n.clone(),
            embedding_nprime: ad.embedding_nprime.clone(),
        };
        let tag = format!("sample {i} ({} | {})", write_enewick(&a), write_enewick(&b));
        check(
            format!("{tag}: witness"),
            verify_agreement_witness(&ad.graph, &a, &b, &cert).ok,
        );
        check(
            format!("{tag}: dAD = {} <= dPR = {} <= 3 dAD", ad.d, pr.value),
            ad.d <= pr.value && pr.value <= 3 * ad.d,
        );
        check(
            format!("{tag}: built sequence of length {}", built.len()),
            verify_sequence(&built).ok && built.end == b.canonical_key() && built.len() <= 3 * ad.d,
        );
    }
    if failed > 0 {
        let _ = std::io::stdout().write_all(out.as_bytes());
        return Err(Failure::Data(format!("{failed} check(s) failed")));
    }
    Ok(out)
}

fn run(cli: Cli) -> Out {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let format = cli.format;
    match cli.command {
        Command::Validate { inputs } => validate(&inputs, format),
        Command::Distance {
            metric,
            limits,
            witness,
            inputs,
        } => distance(metric, &limits, witness, &inputs, format),
        Command::Neighbors { ops, inputs } => neighbors(ops, &inputs, format),
        Command::Sequence {
            metric,
            ops,
            limits,
            inputs,
        } => sequence(metric, ops, &limits, &inputs, format),
        Command::Enumerate { taxa, max_r } => enumerate(taxa, max_r, format),
        Command::Selftest { seed, samples } => {
            if format != Format::Json {
                return Err(Failure::Usage("selftest prints plain lines".into()));
            }
            selftest(seed, samples)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("NETDIST_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(s) => {
            let _ = std::io::stdout().write_all(s.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
