//! `eun`: validate, query and solve expected utility networks from the shell.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use eun::decision::auction::{auction_best_response, build_vickrey_auction, AuctionModel};
use eun::format::{bn_to_eun, parse_event, parse_network, parse_vars, serialize_network};
use eun::{
    conditional_event_utility, conditional_probability, declared_independent, decompose_decisions,
    eu_independent_vars, event_utility, optimal_decision, probability, value, BuildOptions,
    DecisionProblem, ErrorKind, EunError, Event, Layer, Network, PartialAssignment, Structure,
};

/// Environment variable overriding the enumeration cap.
const STATE_CAP_ENV: &str = "EUN_STATE_CAP";
const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "eun", version, about = "Expected utility networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the joint is Markov with respect to the declared graph.
    Validate {
        network: PathBuf,
        /// Treat violations as a validation failure.
        #[arg(long)]
        strict: bool,
    },
    /// Probability, expected utility or value of an event.
    #[command(group(ArgGroup::new("measure").required(true).args(["prob", "eu", "value"])))]
    Query {
        network: PathBuf,
        #[arg(long)]
        prob: bool,
        #[arg(long)]
        eu: bool,
        #[arg(long)]
        value: bool,
        /// Event as comma-separated `Var=value` terms.
        #[arg(short = 'e', long = "event")]
        event: String,
        /// Conditioning event.
        #[arg(short = 'g', long = "given")]
        given: Option<String>,
    },
    /// Graph-guaranteed independence of two variable sets.
    Independence {
        network: PathBuf,
        #[arg(long, value_enum)]
        layer: LayerArg,
        #[arg(short = 'a')]
        a: String,
        #[arg(short = 'b')]
        b: String,
        #[arg(short = 'c', default_value = "")]
        c: String,
    },
    /// Decision maximizing conditional expected utility.
    Decide {
        network: PathBuf,
        /// Decision variables, comma-separated.
        #[arg(short = 'd')]
        decisions: String,
        /// Evidence event.
        #[arg(short = 'e', long = "evidence")]
        evidence: Option<String>,
    },
    /// Convert a Bayes-net document into a network document.
    ImportBn {
        bn: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Best-response bids in the discretized second-price auction.
    Auction {
        /// Grid resolution K; values and bids lie on {0, 1/K, ..., 1}.
        #[arg(long)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        eps: f64,
        /// The agent's private value, a grid point.
        #[arg(long)]
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LayerArg {
    Prob,
    Util,
    Eu,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Engine(EunError),
}

impl From<EunError> for Failure {
    fn from(e: EunError) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Engine(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Validation => 2,
                ErrorKind::Numeric => 3,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Engine(e) => e.to_string(),
        }
    }
}

/// Successful run: the report and whether it counts as a validation failure.
struct Report {
    text: String,
    failed: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report {
            text,
            failed: false,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.12}")
}

fn options() -> Result<BuildOptions, Failure> {
    let mut options = BuildOptions::lenient();
    if let Ok(raw) = std::env::var(STATE_CAP_ENV) {
        options.state_cap = raw.trim().parse().map_err(|_| {
            Failure::Usage(format!(
                "{STATE_CAP_ENV} must be a positive integer, got `{raw}`"
            ))
        })?;
        if options.state_cap == 0 {
            return Err(Failure::Usage(format!("{STATE_CAP_ENV} must be positive")));
        }
    }
    Ok(options)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Network, Failure> {
    Ok(parse_network(&read(path)?, options()?)?)
}

fn show_assignment(structure: &Structure, a: &PartialAssignment) -> String {
    a.iter()
        .map(|(v, x)| {
            let spec = structure.var(v);
            format!("{}={}", spec.name(), spec.domain()[x])
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn show_vars(net: &Network, vars: &[eun::VarId]) -> String {
    let names: Vec<&str> = vars.iter().map(|v| net.var(*v).name()).collect();
    format!("{{{}}}", names.join(", "))
}

fn validate(path: &Path, strict: bool) -> Result<Report, Failure> {
    let net = load(path)?;
    let report = net.validate_imap(options()?.tolerance)?;
    if report.is_clean() {
        return Ok(Report::ok(format!(
            "ok: {} variables, joint is Markov with respect to the declared graph\n",
            net.num_vars()
        )));
    }
    let mut text = format!("{} violations\n", report.violations.len());
    for layer in Layer::BOTH {
        for v in report.variables() {
            let hits: Vec<_> = report
                .violations
                .iter()
                .filter(|x| x.var == v && x.layer == layer)
                .collect();
            let Some(first) = hits.first() else { continue };
            let state = first
                .state
                .0
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let spec = &net.structure().vars()[i];
                    format!("{}={}", spec.name(), spec.domain()[x])
                })
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(
                text,
                "  {} ({layer}): {} state{}, e.g. at {state} ratio {} where neighbours alone give {}",
                net.var(v).name(),
                hits.len(),
                if hits.len() == 1 { "" } else { "s" },
                num(first.found),
                num(first.expected),
            );
        }
    }
    Ok(Report {
        text,
        failed: strict,
    })
}

fn query(
    path: &Path,
    measure: Measure,
    event: &str,
    given: Option<&str>,
) -> Result<Report, Failure> {
    let net = load(path)?;
    let e = parse_event(net.structure(), event)?;
    let g = given.map(|g| parse_event(net.structure(), g)).transpose()?;
    let x = match (measure, &g) {
        (Measure::Prob, None) => probability(&net, &e)?,
        (Measure::Prob, Some(g)) => conditional_probability(&net, &e, g, true)?,
        (Measure::Eu, None) => event_utility(&net, &e)?.u_norm,
        (Measure::Eu, Some(g)) => conditional_event_utility(&net, &e, g)?,
        (Measure::Value, g) => value(&net, &e, g.as_ref())?,
    };
    Ok(Report::ok(format!("{}\n", num(x))))
}

#[derive(Debug, Clone, Copy)]
enum Measure {
    Prob,
    Eu,
    Value,
}

fn independence(
    path: &Path,
    layer: LayerArg,
    a: &str,
    b: &str,
    c: &str,
) -> Result<Report, Failure> {
    let net = load(path)?;
    let s = net.structure();
    let (a, b, c) = (parse_vars(s, a)?, parse_vars(s, b)?, parse_vars(s, c)?);
    let (holds, reason) = match layer {
        LayerArg::Prob => (
            declared_independent(&net, Layer::Probability, &a, &b, &c)?,
            "separated in the probability layer",
        ),
        LayerArg::Util => (
            declared_independent(&net, Layer::Utility, &a, &b, &c)?,
            "separated in the utility layer",
        ),
        LayerArg::Eu => (
            eu_independent_vars(&net, &a, &b, &c)?,
            "guaranteed by Theorem 2",
        ),
    };
    Ok(Report::ok(if holds {
        format!("independent ({reason})\n")
    } else {
        "not guaranteed\n".to_string()
    }))
}

fn decide(path: &Path, decisions: &str, evidence: Option<&str>) -> Result<Report, Failure> {
    let net = load(path)?;
    let s = net.structure();
    let d = parse_vars(s, decisions)?;
    let f = match evidence {
        Some(text) => parse_event(s, text)?,
        None => Event::all(),
    };
    let conditioning: Vec<_> = f
        .as_cylinder()
        .map(|p| p.vars().collect())
        .unwrap_or_default();
    let problem = DecisionProblem::new(&net, d, f)?;
    let outcome = optimal_decision(&net, &problem)?;
    let mut text = String::new();
    for (choice, u) in &outcome.evaluated {
        let mark = if outcome.argmax.contains(choice) {
            '*'
        } else {
            ' '
        };
        let _ = writeln!(text, "{mark} {}  {}", show_assignment(s, choice), num(*u));
    }
    let _ = writeln!(text, "utility {}", num(outcome.utility));
    let blocks = decompose_decisions(&net, &problem, &conditioning)?;
    let shown: Vec<String> = blocks.iter().map(|b| show_vars(&net, b)).collect();
    let _ = writeln!(text, "blocks {}", shown.join(" "));
    Ok(Report::ok(text))
}

fn import_bn(bn: &Path, output: &Path) -> Result<Report, Failure> {
    let net = bn_to_eun(&read(bn)?, options()?)?;
    std::fs::write(output, serialize_network(&net))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", output.display())))?;
    Ok(Report::ok(format!(
        "wrote {}: {} variables, {} probability arcs\n",
        output.display(),
        net.num_vars(),
        net.graph().arcs(Layer::Probability).len()
    )))
}

fn auction(grid: usize, eps: f64, v: f64) -> Result<Report, Failure> {
    let options = options()?;
    let mut auction = build_vickrey_auction(AuctionModel::new(grid, eps)?)?;
    auction.network = auction.network.with_state_cap(options.state_cap);
    let best = auction_best_response(&auction, v)?;
    let bids: Vec<String> = best.bids.iter().map(|b| b.to_string()).collect();
    let mut text = format!("argmax {{{}}}", bids.join(", "));
    if best.truthful_member {
        let _ = write!(text, " (truthful bid {} included)", best.value);
    } else {
        let _ = write!(text, " (truthful bid {} excluded)", best.value);
    }
    text.push('\n');
    for (bid, u) in &best.utilities {
        let mark = if best.bids.contains(bid) { '*' } else { ' ' };
        let _ = writeln!(text, "{mark} b={bid}  {}", num(*u));
    }
    Ok(Report::ok(text))
}

fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Validate { network, strict } => validate(&network, strict),
        Command::Query {
            network,
            prob,
            eu,
            value: _,
            event,
            given,
        } => {
            let measure = if prob {
                Measure::Prob
            } else if eu {
                Measure::Eu
            } else {
                Measure::Value
            };
            query(&network, measure, &event, given.as_deref())
        }
        Command::Independence {
            network,
            layer,
            a,
            b,
            c,
        } => independence(&network, layer, &a, &b, &c),
        Command::Decide {
            network,
            decisions,
            evidence,
        } => decide(&network, &decisions, evidence.as_deref()),
        Command::ImportBn { bn, output } => import_bn(&bn, &output),
        Command::Auction { grid, eps, value } => auction(grid, eps, value),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(report) => {
            print!("{}", report.text);
            if report.failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}
