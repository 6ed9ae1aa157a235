use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use circulant_ci::cayley::{CayleyDigraph, ConnectionSet};
use circulant_ci::ci::{exhaustive_ci_counterexample, is_ci_babai, EXHAUSTIVE_MAX_N};
use circulant_ci::constructions::{graph_witness, li_digraph_witness};
use circulant_ci::search::{automorphism_group, brute_force_aut};
use circulant_ci::sweep::{classify, sweep, verify_theorem, InstanceReport, Mode, SweepOptions};
use circulant_ci::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "circ-ci", version)]
#[command(about = "Normality and CI checks for Cayley digraphs of cyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify one instance, given as `n:s1,s2,...`
    Analyze {
        instance: ConnectionSet,
        #[arg(long)]
        json: bool,
    },
    /// Build a known non-CI witness and classify it
    Witness {
        #[command(subcommand)]
        family: Family,
        #[arg(long, global = true)]
        json: bool,
    },
    /// Classify every orbit representative of Z_n, one JSON report per line
    Sweep {
        n: usize,
        /// Only sets with at most this many elements (required for n > 16)
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        /// JSON-lines cache to reuse and extend
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Only inverse-closed sets
        #[arg(long)]
        graphs: bool,
    },
    /// Compare sweep results with the classification of normal non-CI instances
    VerifyTheorem {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, value_enum, default_value = "digraph")]
        mode: ModeArg,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Cross-check against brute force (n <= 8)
    Oracle { instance: ConnectionSet },
}

#[derive(Debug, Subcommand)]
enum Family {
    /// `S = {1, 2, 2^(r-1)+1}` on Z_{2^r}
    Li { r: u32 },
    /// The six-element inverse-closed witness on Z_{2^s m}
    Graph { s: u32, m: usize },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Digraph,
    Graph,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Digraph => Mode::Digraph,
            ModeArg::Graph => Mode::Graph,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget(_) | Error::Capacity { .. } => EXIT_BUDGET,
        Error::Inconsistent(_) => EXIT_MISMATCH,
        _ => EXIT_USAGE,
    }
}

fn print_report(r: &InstanceReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(r).expect("reports serialize"));
        return;
    }
    println!("instance        {}", r.s);
    println!("inverse closed  {}", r.inverse_closed);
    println!("generating      {}", r.generating);
    println!("|Aut|           {}", r.aut_order);
    println!("|A_0|           {}", r.stab_order);
    println!("normal          {}", r.normal);
    println!("ci              {}", r.ci);
    if let Some(k) = r.regular_subgroup_count {
        println!("regular cyclic  {k}");
    }
    if let Some(t) = &r.witness_t {
        println!("witness T       {t}");
    }
    println!("component check {}", r.component_check);
    for c in &r.certificates {
        println!("certificate     {}", serde_json::to_string(c).expect("certificates serialize"));
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Analyze { instance, json } => {
            print_report(&classify(&instance)?, json);
        }
        Command::Witness { family, json } => {
            let s = match family {
                Family::Li { r } => li_digraph_witness(r)?,
                Family::Graph { s, m } => graph_witness(s, m)?,
            };
            print_report(&classify(&s)?, json);
        }
        Command::Sweep {
            n,
            max_size,
            jobs,
            cache,
            graphs,
        } => {
            let opts = SweepOptions {
                max_size,
                graphs_only: graphs,
                jobs,
                cache,
                order_cap: None,
            };
            for r in sweep(n, &opts)? {
                println!("{}", serde_json::to_string(&r).expect("reports serialize"));
            }
        }
        Command::VerifyTheorem {
            from,
            to,
            mode,
            max_size,
            jobs,
            cache,
            json,
        } => {
            if from == 0 || from > to {
                return Err(Error::Domain(format!("empty range {from}..={to}")));
            }
            let opts = SweepOptions {
                max_size,
                jobs,
                cache,
                ..SweepOptions::default()
            };
            let verdicts = verify_theorem(from, to, mode.into(), &opts)?;
            let mut mismatch = false;
            for v in &verdicts {
                mismatch |= !v.agrees();
                if json {
                    println!("{}", serde_json::to_string(v).expect("verdicts serialize"));
                } else {
                    let mut sample: Vec<String> = v.counterexamples.iter().take(3).map(|s| s.to_string()).collect();
                    if v.counterexamples.len() > 3 {
                        sample.push("...".into());
                    }
                    println!(
                        "n={:<3} reps={:<5} observed={:<5} predicted={:<5} counterexamples={:<4} {}{} [{}]",
                        v.n,
                        v.representatives,
                        v.observed(),
                        v.predicted,
                        v.counterexamples.len(),
                        if v.agrees() { "ok" } else { "MISMATCH" },
                        if v.incomplete { " (incomplete)" } else { "" },
                        sample.join(" ")
                    );
                }
            }
            if mismatch {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Oracle { instance } => {
            let n = instance.n();
            if n > EXHAUSTIVE_MAX_N {
                return Err(Error::Budget(format!("oracle needs n <= {EXHAUSTIVE_MAX_N}")));
            }
            let gamma = CayleyDigraph::new(instance);
            let aut = automorphism_group(gamma.graph());
            let brute = brute_force_aut(gamma.graph())?;
            let same_aut = aut.sorted_elements()? == brute.sorted_elements()?;
            let babai = is_ci_babai(&gamma, &aut)?.is_ci;
            let counter = exhaustive_ci_counterexample(&instance)?;
            let exhaustive = counter.is_none();
            println!("aut_order={} brute_force_order={} aut_agreement={same_aut}", aut.order(), brute.order());
            println!("babai={babai} exhaustive={exhaustive} agreement={}", babai == exhaustive);
            if let Some(t) = counter {
                println!("counterexample={t}");
            }
            if !same_aut || babai != exhaustive {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
