use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wfwl::ntriples::{parse_ntriples, write_ntriples};
use wfwl::query::{Entailment, PlanMode, QueryOptions};
use wfwl::{BuildOptions, Database, DictPolicy, Error};

#[derive(Parser)]
#[command(name = "wfwl", version, about = "Build and query succinct RDF stores")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a database from a schema and a data file.
    Build(BuildArgs),
    /// Run a SPARQL query.
    Query(QueryArgs),
    /// Print statistics and section sizes.
    Info {
        #[arg(long)]
        db: PathBuf,
    },
    /// Print every stored triple as N-Triples.
    Dump {
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    tbox: PathBuf,
    #[arg(long)]
    abox: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Policy::Sorted)]
    dict_policy: Policy,
    /// Skip domain/range type materialization.
    #[arg(long)]
    no_materialize: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long, conflicts_with = "inline", required_unless_present = "inline")]
    query: Option<PathBuf>,
    #[arg(long)]
    inline: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Rdfs)]
    entailment: Mode,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// Evaluate patterns in the order written.
    #[arg(long)]
    as_written: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Sorted,
    #[value(name = "first_seen", alias = "first-seen")]
    FirstSeen,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Simple,
    Rdfs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: io::Error) -> Self {
        Failure {
            code: 2,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn from_error(context: &str, e: Error) -> Self {
        let code = match e {
            Error::Io(_) => 2,
            Error::Syntax { .. } | Error::Unsupported(_) | Error::Query(_) => 4,
            _ => 1,
        };
        Failure {
            code,
            message: format!("{context}: {e}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => build(args),
        Command::Query(args) => query(args),
        Command::Info { db } => info(&db),
        Command::Dump { db } => dump(&db),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn read_triples(path: &Path, scope: &str) -> Result<Vec<wfwl::term::Triple>, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    parse_ntriples(BufReader::new(file), scope)
        .map_err(|e| Failure::from_error(&path.display().to_string(), e))
}

fn load(path: &Path) -> Result<Database, Failure> {
    let start = Instant::now();
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let db = Database::read_from(BufReader::new(file))
        .map_err(|e| Failure::from_error(&path.display().to_string(), e))?;
    eprintln!("load_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    Ok(db)
}

fn stdout_error(e: io::Error) -> Failure {
    // A closed pipe is not worth a message.
    let message = if e.kind() == io::ErrorKind::BrokenPipe {
        String::new()
    } else {
        format!("stdout: {e}")
    };
    Failure { code: 2, message }
}

fn build(args: BuildArgs) -> Outcome {
    let start = Instant::now();
    let tbox = read_triples(&args.tbox, "tbox")?;
    let abox = read_triples(&args.abox, "abox")?;
    let options = BuildOptions {
        policy: match args.dict_policy {
            Policy::Sorted => DictPolicy::Sorted,
            Policy::FirstSeen => DictPolicy::FirstSeen,
        },
        materialize: !args.no_materialize,
        ..Default::default()
    };
    let (db, report) =
        Database::build(tbox, abox, options).map_err(|e| Failure::from_error("build", e))?;
    let built = start.elapsed();
    let bytes = db.to_bytes();
    std::fs::write(&args.out, &bytes).map_err(|e| Failure::io(&args.out, e))?;
    eprintln!("input_triples={}", report.input_triples);
    eprintln!("schema_triples={}", report.schema_triples);
    eprintln!("stored_triples={}", report.stored_triples);
    eprintln!("materialized_added={}", report.materialized.added.len());
    eprintln!("materialized_removed={}", report.materialized.removed.len());
    eprintln!("dropped_top_types={}", report.dropped_top_types);
    eprintln!("serialized_bytes={}", bytes.len());
    eprintln!("build_ms={:.3}", built.as_secs_f64() * 1e3);
    Ok(())
}

fn query(args: QueryArgs) -> Outcome {
    let text = match (&args.query, args.inline) {
        (Some(path), _) => std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?,
        (None, Some(text)) => text,
        (None, None) => unreachable!("clap requires one of --query and --inline"),
    };
    let db = load(&args.db)?;
    let options = QueryOptions {
        entailment: match args.entailment {
            Mode::Simple => Entailment::Simple,
            Mode::Rdfs => Entailment::Rdfs,
        },
        plan: if args.as_written {
            PlanMode::AsWritten
        } else {
            PlanMode::Greedy
        },
    };
    let start = Instant::now();
    let result = db
        .query(&text, options)
        .map_err(|e| Failure::from_error("query", e))?;
    eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    eprintln!("solutions={}", result.rows.len());
    eprintln!("probes={}", result.stats.probes);
    eprintln!("matches={}", result.stats.matches);

    let mut out = BufWriter::new(io::stdout().lock());
    match args.format {
        Format::Tsv => {
            let header: Vec<String> = result.variables.iter().map(|v| format!("?{v}")).collect();
            writeln!(out, "{}", header.join("\t")).map_err(stdout_error)?;
            for row in &result.rows {
                let cells: Vec<String> = row
                    .iter()
                    .map(|t| t.as_ref().map(|t| t.to_string()).unwrap_or_default())
                    .collect();
                writeln!(out, "{}", cells.join("\t")).map_err(stdout_error)?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = result
                .rows
                .iter()
                .map(|row| {
                    let map = result
                        .variables
                        .iter()
                        .zip(row)
                        .map(|(v, t)| {
                            (
                                v.clone(),
                                t.as_ref()
                                    .map_or(serde_json::Value::Null, |t| t.to_string().into()),
                            )
                        })
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            let doc = serde_json::json!({ "variables": result.variables, "rows": rows });
            serde_json::to_writer(&mut out, &doc).map_err(|e| stdout_error(e.into()))?;
            writeln!(out).map_err(stdout_error)?;
        }
    }
    out.flush().map_err(stdout_error)?;
    if result.unsatisfiable {
        eprintln!("unsatisfiable=true");
        return Err(Failure {
            code: 3,
            message: String::new(),
        });
    }
    Ok(())
}

fn info(path: &Path) -> Outcome {
    let db = load(path)?;
    let s = &db.stats;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut lines = vec![
        format!("triples\t{}", s.n_triples),
        format!("subjects\t{}", s.n_subjects),
        format!("predicates\t{}", s.n_predicates),
        format!("objects\t{}", s.n_objects),
        format!("dictionary_terms\t{}", db.dictionary.len()),
        format!("input_triples\t{}", s.input_triples),
        format!("schema_triples\t{}", s.schema_triples),
        format!("materialized_added\t{}", s.materialized_added),
        format!("materialized_removed\t{}", s.materialized_removed),
        format!("dropped_top_types\t{}", s.dropped_top_types),
    ];
    for (name, h) in [
        ("concepts", &db.ontology.concepts),
        ("properties", &db.ontology.properties),
    ] {
        let leaves = h.elements().iter().filter(|e| e.is_leaf()).count();
        lines.push(format!("{name}\t{}", h.len()));
        lines.push(format!("{name}_leaves\t{leaves}"));
        lines.push(format!("{name}_code_depth\t{}", h.code_tree().depth()));
    }
    let sizes = db.section_sizes();
    for (name, size) in &sizes {
        lines.push(format!("section.{name}\t{size}"));
    }
    lines.push(format!("serialized_bytes\t{}", db.to_bytes().len()));
    for line in lines {
        writeln!(out, "{line}").map_err(stdout_error)?;
    }
    out.flush().map_err(stdout_error)
}

fn dump(path: &Path) -> Outcome {
    let db = load(path)?;
    let triples: Vec<_> = db
        .triples()
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::from_error("dump", e))?;
    let mut out = BufWriter::new(io::stdout().lock());
    write_ntriples(&mut out, &triples).map_err(stdout_error)?;
    out.flush().map_err(stdout_error)?;
    eprintln!("dumped_triples={}", triples.len());
    Ok(())
}
