use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use metareason_core::analysis::{AnalysisError, Diagnosis, Session, Verdict};
use metareason_core::frontend::{load_metamodel, Diagnostics, ResolvedMetamodel};
use metareason_core::instance::{
    parse_instance, serialize_instance, CompletionReport, PartialInstance, ScopeConfig, DEFAULT_SCOPE,
};
use metareason_core::kernel::DEFAULT_BITWIDTH;
use serde_json::json;

const CONSISTENT: u8 = 0;
const INCONSISTENT: u8 = 1;
const USAGE: u8 = 2;
const INTERNAL: u8 = 3;

/// Checks metamodels for satisfiability, explains inconsistent instances and
/// completes partial models.
#[derive(Parser, Debug)]
#[command(name = "metareason", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that the metamodel admits at least one instance.
    CheckMeta {
        metamodel: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Check a partial instance against the metamodel.
    Check {
        metamodel: String,
        instance: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Enumerate completions of a partial instance.
    Complete {
        metamodel: String,
        instance: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Print the translation log.
    Log {
        metamodel: String,
        instance: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Opts {
    /// Total atoms for one concrete class, as `Class=n`. Repeatable.
    #[arg(long = "scope", value_parser = parse_scope)]
    scopes: Vec<(String, u32)>,
    /// Total atoms for every class without an explicit scope.
    #[arg(long, default_value_t = DEFAULT_SCOPE)]
    default_scope: u32,
    /// Width of integer values in bits.
    #[arg(long, default_value_t = DEFAULT_BITWIDTH, value_parser = clap::value_parser!(u32).range(2..=16))]
    bitwidth: u32,
    /// Maximum completions to print.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_solutions: u64,
    /// Encode asserted links as fixed bounds instead of retractable facts.
    #[arg(long)]
    hard_facts: bool,
    /// Write the CNF in DIMACS format to this path before solving.
    #[arg(long)]
    dimacs: Option<String>,
    /// Seed for the solver's branching order.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn parse_scope(s: &str) -> Result<(String, u32), String> {
    let (class, n) = s
        .split_once('=')
        .ok_or_else(|| format!("expected Class=n, got `{s}`"))?;
    let n = n.trim().parse().map_err(|e| format!("bad scope `{n}`: {e}"))?;
    Ok((class.trim().to_string(), n))
}

/// A command failed before producing a verdict.
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Internal(format!("i/o error: {e}"))
    }
}

struct Inputs {
    mm_path: String,
    mm_text: String,
    inst: Option<(String, String)>,
}

impl Inputs {
    fn source(&self, file: &str) -> Option<&str> {
        if file == self.mm_path {
            return Some(&self.mm_text);
        }
        self.inst.as_ref().filter(|(p, _)| p == file).map(|(_, t)| t.as_str())
    }
}

fn read(path: &str) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read `{path}`: {e}")))
}

fn input_error(d: &Diagnostics, source: Option<&str>) -> Failure {
    Failure::Usage(d.render(source).trim_end().to_string())
}

fn analysis_error(e: AnalysisError, inputs: &Inputs) -> Failure {
    match e {
        AnalysisError::Input(d) => {
            let src =
                d.0.iter()
                    .find_map(|x| x.span.as_ref())
                    .and_then(|s| inputs.source(&s.file));
            input_error(&d, src)
        }
        other => Failure::Internal(other.to_string()),
    }
}

struct Runner<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Runner<'_> {
    fn load(
        &mut self,
        mm_path: &str,
        inst_path: Option<&str>,
    ) -> Result<(Inputs, ResolvedMetamodel, PartialInstance), Failure> {
        let mm_text = read(mm_path)?;
        let mm = load_metamodel(&mm_text, mm_path).map_err(|d| input_error(&d, Some(&mm_text)))?;
        for w in &mm.warnings {
            write!(self.err, "{}", w.render(Some(&mm_text)))?;
        }
        let (inst, inst_src) = match inst_path {
            Some(p) => {
                let text = read(p)?;
                let inst = parse_instance(&text, p, &mm).map_err(|d| input_error(&d, Some(&text)))?;
                (inst, Some((p.to_string(), text)))
            }
            None => (PartialInstance::empty(&mm.package), None),
        };
        let inputs = Inputs {
            mm_path: mm_path.to_string(),
            mm_text,
            inst: inst_src,
        };
        Ok((inputs, mm, inst))
    }

    fn session(
        &mut self,
        inputs: &Inputs,
        mm: ResolvedMetamodel,
        inst: PartialInstance,
        opts: &Opts,
    ) -> Result<Session, Failure> {
        let scope = ScopeConfig {
            default_scope: opts.default_scope,
            per_class: opts.scopes.iter().cloned().collect::<BTreeMap<_, _>>(),
            bitwidth: opts.bitwidth,
            hard_facts: opts.hard_facts,
        };
        let s = Session::new(mm, inst, &scope, opts.seed).map_err(|e| analysis_error(e, inputs))?;
        if let Some(path) = &opts.dimacs {
            fs::write(path, s.translation.cnf.to_dimacs())
                .map_err(|e| Failure::Usage(format!("cannot write `{path}`: {e}")))?;
        }
        Ok(s)
    }

    fn diagnosis(&mut self, d: &Diagnosis, inputs: &Inputs, format: Format) -> Result<u8, Failure> {
        match format {
            Format::Text => write!(self.out, "{}", d.render(|f| inputs.source(f)))?,
            Format::Json => {
                for m in &d.core {
                    let rec = json!({
                        "kind": "core",
                        "id": m.id.to_string(),
                        "category": m.category.name(),
                        "label": m.label,
                        "span": m.span.as_ref().map(|s| s.to_string()),
                        "formula": m.formula,
                    });
                    writeln!(self.out, "{rec}")?;
                }
                writeln!(
                    self.out,
                    "{}",
                    json!({"kind": "verdict", "outcome": "inconsistent", "core_size": d.core.len()})
                )?;
            }
        }
        Ok(INCONSISTENT)
    }

    fn completion(&mut self, index: usize, r: &CompletionReport, format: Format) -> Result<(), Failure> {
        let text = serialize_instance(r);
        match format {
            Format::Text => {
                writeln!(self.out, "-- completion {index}")?;
                write!(self.out, "{text}")?;
            }
            Format::Json => {
                let rec = json!({
                    "kind": "completion",
                    "index": index,
                    "inferred_objects": r.inferred_objects.len(),
                    "inferred_links": r.inferred_links.len() + r.inferred_model_facts.len(),
                    "instance": text,
                });
                writeln!(self.out, "{rec}")?;
            }
        }
        Ok(())
    }

    fn check(&mut self, mm_path: &str, inst_path: Option<&str>, opts: &Opts) -> Result<u8, Failure> {
        let (inputs, mm, inst) = self.load(mm_path, inst_path)?;
        let mut s = self.session(&inputs, mm, inst, opts)?;
        match s.check().map_err(|e| analysis_error(e, &inputs))? {
            Verdict::Consistent(r) => {
                if opts.format == Format::Text {
                    writeln!(self.out, "consistent")?;
                } else {
                    writeln!(self.out, "{}", json!({"kind": "verdict", "outcome": "consistent"}))?;
                }
                self.completion(1, &r, opts.format)?;
                Ok(CONSISTENT)
            }
            Verdict::Inconsistent(d) => self.diagnosis(&d, &inputs, opts.format),
        }
    }

    fn complete(&mut self, mm_path: &str, inst_path: &str, opts: &Opts) -> Result<u8, Failure> {
        let (inputs, mm, inst) = self.load(mm_path, Some(inst_path))?;
        let mut s = self.session(&inputs, mm, inst, opts)?;
        let max = usize::try_from(opts.max_solutions).unwrap_or(usize::MAX);
        let e = s.enumerate(max).map_err(|e| analysis_error(e, &inputs))?;
        if e.reports.is_empty() {
            let d = s.diagnose().map_err(|e| analysis_error(e, &inputs))?;
            return self.diagnosis(&d, &inputs, opts.format);
        }
        for (i, r) in e.reports.iter().enumerate() {
            self.completion(i + 1, r, opts.format)?;
        }
        let n = e.reports.len();
        match opts.format {
            Format::Text if e.exhausted => writeln!(self.out, "completions: {n} (all)")?,
            Format::Text => writeln!(self.out, "completions: {n} (limit reached, more exist)")?,
            Format::Json => writeln!(
                self.out,
                "{}",
                json!({"kind": "summary", "completions": n, "exhausted": e.exhausted})
            )?,
        }
        Ok(CONSISTENT)
    }

    fn log(&mut self, mm_path: &str, inst_path: Option<&str>, opts: &Opts) -> Result<u8, Failure> {
        let (inputs, mm, inst) = self.load(mm_path, inst_path)?;
        let mut s = self.session(&inputs, mm, inst, opts)?;
        let consistent = s.check().map_err(|e| analysis_error(e, &inputs))?.is_consistent();
        let log = s.render_log();
        match opts.format {
            Format::Text => write!(self.out, "{log}")?,
            Format::Json => writeln!(self.out, "{}", json!({"kind": "log", "text": log}))?,
        }
        Ok(if consistent { CONSISTENT } else { INCONSISTENT })
    }

    fn dispatch(&mut self, cli: &Cli) -> Result<u8, Failure> {
        match &cli.command {
            Command::CheckMeta { metamodel, opts } => self.check(metamodel, None, opts),
            Command::Check {
                metamodel,
                instance,
                opts,
            } => self.check(metamodel, Some(instance), opts),
            Command::Complete {
                metamodel,
                instance,
                opts,
            } => self.complete(metamodel, instance, opts),
            Command::Log {
                metamodel,
                instance,
                opts,
            } => self.log(metamodel, instance.as_deref(), opts),
        }
    }
}

/// Runs one invocation and returns its exit status.
fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return CONSISTENT;
        }
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return USAGE;
        }
    };
    let mut runner = Runner { out, err };
    let status = match runner.dispatch(&cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(runner.err, "{msg}");
            USAGE
        }
        Err(Failure::Internal(msg)) => {
            let _ = writeln!(runner.err, "internal error: {msg}");
            INTERNAL
        }
    };
    let _ = runner.out.flush();
    status
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let (stdout, stderr) = (io::stdout(), io::stderr());
    let code = run_with(&argv, &mut stdout.lock(), &mut stderr.lock());
    ExitCode::from(code)
}
