use std::cmp::Ordering;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use biorder::format::{bundle_to_json, load_bundle};
use biorder::presets::{self, validate_preset, PresetBundle};
use biorder::suites::{render, run_suite, Suite, SuiteConfig, SuiteReport};
use biorder::{
    magnus_expand, parse_word, Error, Factor, MagnusOrder, ReducedOrder, Tower, TowerElement, Word,
    DEFAULT_MAX_DEGREE,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "biorder", version, about = "Magnus bi-orderings of free groups and towers of free groups")]
struct Cli {
    /// Output style: plain text or one JSON record per result.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Ceiling on the truncation degree used when comparing in free factors.
    #[arg(long, global = true, env = "BIORDER_MAX_DEGREE", default_value_t = DEFAULT_MAX_DEGREE)]
    max_degree: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Records,
}

#[derive(Args, Clone, Default)]
struct ContextArgs {
    /// Rank of the free group (inferred from the words when omitted).
    #[arg(long, visible_alias = "free-rank")]
    rank: Option<usize>,
    /// Use the reduced free group and the reduced Magnus expansion.
    #[arg(long)]
    reduced: bool,
    /// Tower spec file (JSON).
    #[arg(long, conflicts_with_all = ["preset", "rank", "reduced"])]
    spec: Option<PathBuf>,
    /// Built-in tower, e.g. pure_braid:3, upper_mccool:4, pure_monomial:2:2.
    #[arg(long, conflicts_with_all = ["rank", "reduced"])]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the (reduced) Magnus expansion of a word.
    Expand {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Truncation degree; defaults to the word length.
        #[arg(long, conflicts_with = "reduced")]
        degree: Option<usize>,
        #[arg(long)]
        reduced: bool,
    },
    /// Compare two elements.
    Compare {
        left: String,
        right: String,
        #[command(flatten)]
        context: ContextArgs,
    },
    /// Sort elements in increasing order (reads lines from stdin when none are given).
    Sort {
        elements: Vec<String>,
        #[command(flatten)]
        context: ContextArgs,
    },
    /// Print the normal form of an element.
    Normalize {
        element: String,
        #[command(flatten)]
        context: ContextArgs,
    },
    /// Validate a tower spec file.
    CheckSpec { file: PathBuf },
    /// Describe and validate a built-in tower.
    Preset {
        name: String,
        /// Print the tower as a spec file instead.
        #[arg(long)]
        emit: bool,
    },
    /// Run a property suite.
    Proptest {
        suite: String,
        #[command(flatten)]
        context: ContextArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random cases.
        #[arg(long)]
        iters: Option<usize>,
        /// Word-length bound. For order-axioms on a single free factor
        /// without --iters, every reduced word up to this length is checked.
        #[arg(long)]
        max_len: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Finding(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::DepthExceeded { .. } | Error::NotUnipotent(_) | Error::NoRetraction => {
                Failure::Finding(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Out {
    format: OutputFormat,
    lines: Vec<String>,
}

impl Out {
    fn emit(&mut self, text: String, record: Value) {
        match self.format {
            OutputFormat::Text => self.lines.push(text),
            OutputFormat::Records => self.lines.push(record.to_string()),
        }
    }
}

struct Context {
    tower: Tower,
    /// Flags that rebuild this context on the command line.
    flags: String,
    free: bool,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl Context {
    fn build(args: &ContextArgs, words: &[&str], max_degree: usize) -> CliResult<Context> {
        let orders = |t: Tower| t.with_orders(MagnusOrder::new(max_degree), ReducedOrder::default());
        let degree_flag = if max_degree == DEFAULT_MAX_DEGREE { String::new() } else { format!(" --max-degree {max_degree}") };
        if let Some(path) = &args.spec {
            let bundle = load_bundle(path)?;
            let tower = orders(Tower::new(bundle.spec)?);
            return Ok(Context { tower, flags: format!("--spec {}{degree_flag}", quote(&path.display().to_string())), free: false });
        }
        if let Some(name) = &args.preset {
            let tower = orders(presets::by_name(name)?.tower()?);
            return Ok(Context { tower, flags: format!("--preset {name}{degree_flag}"), free: false });
        }
        let rank = match args.rank {
            Some(0) => return Err(Failure::Usage("rank must be positive".into())),
            Some(r) => r,
            None => {
                let mut rank = 0;
                for w in words {
                    rank = rank.max(parse_word(w, None)?.rank());
                }
                if rank == 0 {
                    return Err(Failure::Usage("cannot infer a rank; pass --rank".into()));
                }
                rank
            }
        };
        let factor = if args.reduced { Factor::reduced(rank) } else { Factor::free(rank) };
        let reduced = if args.reduced { " --reduced" } else { "" };
        Ok(Context {
            tower: orders(Tower::single(factor)?),
            flags: format!("--rank {rank}{reduced}{degree_flag}"),
            free: true,
        })
    }

    fn parse(&self, text: &str) -> CliResult<TowerElement> {
        if self.free {
            let w = parse_word(text, Some(self.tower.factor(1).rank))?;
            Ok(self.tower.embed(1, &w)?)
        } else {
            Ok(self.tower.parse_element(text)?)
        }
    }

    fn show(&self, g: &TowerElement) -> String {
        render(&self.tower, g)
    }
}

fn verdict(o: Ordering) -> &'static str {
    match o {
        Ordering::Less => "LESS",
        Ordering::Equal => "EQUAL",
        Ordering::Greater => "GREATER",
    }
}

fn cmd_expand(out: &mut Out, word: &str, rank: Option<usize>, degree: Option<usize>, reduced: bool) -> CliResult<()> {
    let w = parse_word(word, rank)?;
    let (mode, printed, terms, degree): (&str, String, Vec<Value>, Option<usize>) = if reduced {
        let p = ReducedOrder::default().expand(&w)?;
        let terms = p.terms().map(|(m, c)| json!({"monomial": m.to_string(), "coefficient": c.to_string()})).collect();
        ("reduced", p.to_string(), terms, None)
    } else {
        let d = degree.unwrap_or(w.len().max(1));
        let s = magnus_expand(&w, d);
        let terms = s.terms().map(|(m, c)| json!({"monomial": m.to_string(), "coefficient": c.to_string()})).collect();
        ("free", s.to_string(), terms, Some(d))
    };
    let record = json!({
        "command": "expand", "word": w.to_string(), "rank": w.rank(), "mode": mode,
        "degree": degree, "expansion": printed, "terms": terms,
    });
    out.emit(printed, record);
    Ok(())
}

fn cmd_compare(out: &mut Out, ctx: &Context, left: &str, right: &str) -> CliResult<()> {
    let (g, h) = (ctx.parse(left)?, ctx.parse(right)?);
    let d = ctx.tower.decide(&g, &h)?;
    let mut text = verdict(d.ordering).to_string();
    if let Some(m) = &d.monomial {
        let factor = match d.factor {
            Some(i) if ctx.tower.len() > 1 => format!("factor {i}, "),
            _ => String::new(),
        };
        text.push_str(&format!(" (decided at {factor}degree {}, monomial {m})", m.degree()));
    }
    let record = json!({
        "command": "compare", "left": ctx.show(&g), "right": ctx.show(&h), "verdict": verdict(d.ordering),
        "factor": d.factor, "degree": d.monomial.as_ref().map(|m| m.degree()),
        "monomial": d.monomial.as_ref().map(|m| m.to_string()),
    });
    out.emit(text, record);
    Ok(())
}

fn cmd_sort(out: &mut Out, ctx: &Context, inputs: &[String]) -> CliResult<()> {
    let mut elems = inputs.iter().map(|s| ctx.parse(s)).collect::<CliResult<Vec<_>>>()?;
    let mut error = None;
    elems.sort_by(|a, b| match ctx.tower.compare(a, b) {
        Ok(o) => o,
        Err(e) => {
            error.get_or_insert(e);
            Ordering::Equal
        }
    });
    if let Some(e) = error {
        return Err(e.into());
    }
    for (k, g) in elems.iter().enumerate() {
        out.emit(ctx.show(g), json!({"command": "sort", "position": k, "element": ctx.show(g)}));
    }
    Ok(())
}

fn cmd_normalize(out: &mut Out, ctx: &Context, text: &str) -> CliResult<()> {
    let g = ctx.parse(text)?;
    let components: Vec<String> = g.components().iter().map(Word::to_string).collect();
    out.emit(ctx.show(&g), json!({"command": "normalize", "element": ctx.show(&g), "components": components}));
    Ok(())
}

fn report_bundle(out: &mut Out, bundle: &PresetBundle, label: &str) -> bool {
    let report = validate_preset(bundle);
    let ranks: Vec<usize> = bundle.spec.factors().iter().map(|f| f.rank).collect();
    let failures: Vec<String> = report.failures.iter().map(|f| f.to_string()).collect();
    let status = if report.is_clean() { "valid" } else { "invalid" };
    let mut text = format!("{label}: {status}");
    for f in &failures {
        text.push_str(&format!("\n  {f}"));
    }
    let record = json!({
        "command": "check", "name": label, "valid": report.is_clean(), "ranks": ranks,
        "witness": bundle.witness.is_some(), "failures": failures,
    });
    out.emit(text, record);
    report.is_clean()
}

fn cmd_preset(out: &mut Out, name: &str, emit: bool) -> CliResult<bool> {
    let bundle = presets::by_name(name)?;
    if emit {
        out.lines.push(bundle_to_json(&bundle).trim_end().to_string());
        return Ok(true);
    }
    if out.format == OutputFormat::Text {
        let ranks: Vec<String> = bundle.spec.factors().iter().map(|f| f.rank.to_string()).collect();
        out.lines.push(format!("{}: factor ranks ({})", bundle.name, ranks.join(", ")));
        for note in &bundle.notes {
            out.lines.push(format!("  {note}"));
        }
    }
    Ok(report_bundle(out, &bundle, &bundle.name))
}

fn emit_suite(out: &mut Out, ctx: &Context, report: &SuiteReport) {
    let mut text = report.to_string();
    let mut record = json!({
        "command": "proptest", "suite": report.suite.name(), "verdict": if report.is_pass() { "PASS" } else { "FAIL" },
        "passed": report.passed, "cases": report.cases, "exhaustive_words": report.exhaustive_words,
    });
    if let Some(c) = &report.counterexample {
        let inputs: Vec<String> = c.inputs.iter().map(|g| ctx.show(g)).collect();
        let recheck = format!("biorder compare {} {} {}", ctx.flags, quote(&ctx.show(&c.left)), quote(&ctx.show(&c.right)));
        text.push_str(&format!("\ncase {}: {}", c.case, c.message));
        text.push_str(&format!("\n  inputs: {}", inputs.join(" | ")));
        text.push_str(&format!("\n  expected: {}", verdict(c.expected)));
        text.push_str(&format!("\n  recheck: {recheck}"));
        record["counterexample"] = json!({
            "case": c.case, "message": c.message, "inputs": inputs, "left": ctx.show(&c.left),
            "right": ctx.show(&c.right), "expected": verdict(c.expected), "recheck": recheck,
        });
    }
    out.emit(text, record);
}

fn run(cli: Cli, out: &mut Out) -> CliResult<bool> {
    let md = cli.max_degree;
    match cli.command {
        Command::Expand { word, rank, degree, reduced } => cmd_expand(out, &word, rank, degree, reduced).map(|_| true),
        Command::Compare { left, right, context } => {
            let ctx = Context::build(&context, &[&left, &right], md)?;
            cmd_compare(out, &ctx, &left, &right).map(|_| true)
        }
        Command::Sort { mut elements, context } => {
            if elements.is_empty() {
                for line in io::stdin().lock().lines() {
                    let line = line.map_err(|e| Failure::Usage(e.to_string()))?;
                    if !line.trim().is_empty() {
                        elements.push(line.trim().to_string());
                    }
                }
            }
            let refs: Vec<&str> = elements.iter().map(String::as_str).collect();
            let ctx = Context::build(&context, &refs, md)?;
            cmd_sort(out, &ctx, &elements).map(|_| true)
        }
        Command::Normalize { element, context } => {
            let ctx = Context::build(&context, &[&element], md)?;
            cmd_normalize(out, &ctx, &element).map(|_| true)
        }
        Command::CheckSpec { file } => {
            let bundle = load_bundle(&file)?;
            Ok(report_bundle(out, &bundle, &file.display().to_string()))
        }
        Command::Preset { name, emit } => cmd_preset(out, &name, emit),
        Command::Proptest { suite, context, seed, iters, max_len } => {
            let suite: Suite = suite.parse().map_err(Failure::Usage)?;
            if context.spec.is_none() && context.preset.is_none() && context.rank.is_none() {
                return Err(Failure::Usage("proptest needs --free-rank, --spec or --preset".into()));
            }
            let ctx = Context::build(&context, &[], md)?;
            let exhaustive = match (suite, iters, max_len) {
                (Suite::OrderAxioms, None, Some(l)) if ctx.tower.len() == 1 => Some(l),
                _ => None,
            };
            let mut cfg = SuiteConfig { seed, exhaustive, ..SuiteConfig::default() };
            if let Some(n) = iters {
                cfg.iterations = n;
            }
            if let Some(l) = max_len {
                cfg.max_len = l;
            }
            let report = run_suite(suite, &ctx.tower, &cfg)?;
            emit_suite(out, &ctx, &report);
            Ok(report.is_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out { format: cli.format, lines: Vec::new() };
    let result = run(cli, &mut out);
    let mut stdout = io::stdout().lock();
    for line in &out.lines {
        let _ = writeln!(stdout, "{line}");
    }
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Finding(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
