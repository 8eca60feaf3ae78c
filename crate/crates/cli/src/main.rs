//! `prpc`: command-line front end for the polymorphic RPC toolkit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use polyrpc::propgen::{GenConfig, Generator};
use polyrpc::surface::{print, print_type, SourceFile};
use polyrpc::{
    check_mono, check_poly, eval_mono, eval_poly, mono_term, read_back, run_cs, selective_mono,
    slice, EvalError, Fuel, Location, MonoError, RunError, SliceError, SlicedProgram, Term,
    TypeEnv, TypeError, DEFAULT_FUEL,
};

#[derive(Parser)]
#[command(
    name = "prpc",
    version,
    about = "Check, evaluate, monomorphize, slice and run polymorphic RPC programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of a program.
    Check {
        file: PathBuf,
        #[arg(long, default_value = "c", value_parser = parse_site)]
        at: Location,
        /// Use the monomorphic checker.
        #[arg(long)]
        mono: bool,
    },
    /// Evaluate a program and print its value.
    Eval(EvalArgs),
    /// Evaluate a program and print its value and every application event.
    Trace(EvalArgs),
    /// Translate away location polymorphism.
    Mono {
        file: PathBuf,
        /// Expand only static location abstractions.
        #[arg(long, conflicts_with = "report")]
        selective: bool,
        /// Print leafCount, duplicationDepth and the output as JSON.
        #[arg(long)]
        report: bool,
    },
    /// Split a program into client and server files.
    Slice {
        file: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a sliced program directory on the simulated client and server.
    Run {
        dir: PathBuf,
        #[arg(long)]
        trace: bool,
        #[arg(long, env = "PRPC_FUEL", default_value_t = DEFAULT_FUEL)]
        fuel: u64,
    },
    /// Write a corpus of random well-typed programs.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        nesting: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct EvalArgs {
    file: PathBuf,
    #[arg(long, default_value = "c", value_parser = parse_site)]
    at: Location,
    #[arg(long, env = "PRPC_FUEL", default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Print application events after the value.
    #[arg(long)]
    trace: bool,
    /// Use the monomorphic evaluator.
    #[arg(long)]
    mono: bool,
}

fn parse_site(s: &str) -> Result<Location, String> {
    match s {
        "c" | "client" => Ok(Location::Client),
        "s" | "server" => Ok(Location::Server),
        _ => Err(format!("expected `c` or `s`, got `{s}`")),
    }
}

/// How a command failed, which decides the exit code.
enum Failure {
    /// Bad input: parse and type errors, missing files, fuel exhaustion.
    User(String),
    /// The evaluator or runtime got stuck on a program that passed checking.
    Internal(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::User(format!("{e:#}"))
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<SourceFile, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SourceFile::parse(path.display().to_string(), text)
        .map_err(|e| Failure::User(format!("{}:{e}", path.display())))
}

fn located(src: &SourceFile, e: &TypeError) -> Failure {
    Failure::User(format!(
        "{}:{}: {}: {}",
        src.path,
        src.position(&e.site),
        e.kind,
        e.detail
    ))
}

fn eval_failure(src: &SourceFile, e: EvalError) -> Failure {
    match e {
        EvalError::OutOfFuel(_) | EvalError::PolyFormInMono(_) => {
            Failure::User(format!("{}: {e}", src.path))
        }
        EvalError::Stuck(_) => Failure::Internal(format!("{}: {e}", src.path)),
    }
}

fn mono_failure(src: &SourceFile, e: MonoError) -> Failure {
    match e {
        MonoError::IllTyped(t) => located(src, &t),
        other => Failure::User(format!("{}: {other}", src.path)),
    }
}

fn check(file: &Path, at: &Location, mono: bool) -> Outcome {
    let src = load(file)?;
    let env = TypeEnv::new();
    let result = if mono {
        check_mono(&env, at, &src.term)
    } else {
        check_poly(&env, at, &src.term)
    };
    let typed = result.map_err(|e| located(&src, &e))?;
    println!("{}", print_type(&typed.ty));
    Ok(())
}

fn eval(args: &EvalArgs, trace: bool) -> Outcome {
    let src = load(&args.file)?;
    let env = TypeEnv::new();
    if args.mono {
        check_mono(&env, &args.at, &src.term).map_err(|e| located(&src, &e))?;
    } else {
        check_poly(&env, &args.at, &src.term).map_err(|e| located(&src, &e))?;
    }
    let fuel = Fuel(args.fuel);
    let out = if args.mono {
        eval_mono(&src.term, &args.at, fuel)
    } else {
        eval_poly(&src.term, &args.at, fuel)
    }
    .map_err(|e| eval_failure(&src, e))?;
    println!("{}", print(&out.value));
    if trace {
        for ev in &out.app_events {
            println!("{ev}");
        }
    }
    Ok(())
}

fn mono(file: &Path, selective: bool, report: bool) -> Outcome {
    let src = load(file)?;
    if selective {
        let out = selective_mono(&src.term).map_err(|e| mono_failure(&src, e))?;
        println!("{}", print(&out));
        return Ok(());
    }
    let r = mono_term(&src.term).map_err(|e| mono_failure(&src, e))?;
    if report {
        let json = serde_json::json!({
            "leafCount": r.leaf_count,
            "duplicationDepth": r.duplication_depth,
            "output": print(&r.output),
        });
        println!("{json}");
    } else {
        println!("{}", print(&r.output));
    }
    Ok(())
}

fn slice_cmd(file: &Path, out_dir: &Path) -> Outcome {
    let src = load(file)?;
    // Static abstractions are expanded first; dynamic ones survive into
    // both halves.
    let term = if src.term.is_location_free() {
        src.term.clone()
    } else {
        selective_mono(&src.term).map_err(|e| mono_failure(&src, e))?
    };
    let program = slice(&term).map_err(|e| match e {
        SliceError::IllTyped(t) if src.term.is_location_free() => located(&src, &t),
        other => Failure::User(format!("{}: {other}", src.path)),
    })?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for (name, text) in [
        ("client.prpc", program.client_source()),
        ("server.prpc", program.server_source()),
        ("manifest.json", program.manifest()),
    ] {
        let path = out_dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn read_program(dir: &Path) -> Result<SlicedProgram, Failure> {
    let read = |name: &str| {
        let path = dir.join(name);
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
    };
    let manifest = read("manifest.json")?;
    let v: serde_json::Value = serde_json::from_str(&manifest)
        .with_context(|| format!("parsing {}", dir.join("manifest.json").display()))?;
    let file = |key: &str| {
        v.get(key)
            .and_then(|f| f.as_str())
            .unwrap_or(key)
            .to_string()
    };
    let client = read(&file("client"))?;
    let server = read(&file("server"))?;
    SlicedProgram::from_sources(&client, &server, &manifest)
        .map_err(|e| Failure::User(format!("{}: {e}", dir.display())))
}

fn run(dir: &Path, trace: bool, fuel: u64) -> Outcome {
    let program = read_program(dir)?;
    let out = run_cs(&program, Fuel(fuel)).map_err(|e| match e {
        RunError::OutOfFuel(_) => Failure::User(format!("{}: {e}", dir.display())),
        RunError::Stuck(_) | RunError::ProtocolViolation(_) => {
            Failure::Internal(format!("{}: {e}", dir.display()))
        }
    })?;
    println!("{}", print(&read_back(&program, &out.value)));
    if trace {
        for ev in &out.trace.events {
            println!("{ev}");
        }
    }
    Ok(())
}

fn gen(seed: u64, depth: u64, count: usize, nesting: usize, out_dir: &Path) -> Outcome {
    let mut g = Generator::new(GenConfig {
        max_depth: depth as usize,
        max_loc_lam_nesting: nesting,
        seed,
        ..GenConfig::default()
    });
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for i in 0..count {
        let (m, ty, at): (Term, _, _) = g.well_typed().map_err(|e| Failure::User(e.to_string()))?;
        let path = out_dir.join(format!("gen_{i:04}.prpc"));
        let text = format!("-- : {} @ {at}\n{}\n", print_type(&ty), print(&m));
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("wrote {count} programs to {}", out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are user errors; help and version are not errors.
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Check { file, at, mono } => check(file, at, *mono),
        Command::Eval(args) => eval(args, args.trace),
        Command::Trace(args) => eval(args, true),
        Command::Mono {
            file,
            selective,
            report,
        } => mono(file, *selective, *report),
        Command::Slice { file, out_dir } => slice_cmd(file, out_dir),
        Command::Run { dir, trace, fuel } => run(dir, *trace, *fuel),
        Command::Gen {
            seed,
            depth,
            count,
            nesting,
            out_dir,
        } => gen(*seed, *depth, *count, *nesting, out_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::User(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
