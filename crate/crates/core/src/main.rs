use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hornchain::analyzer::{analyze, Verdict};
use hornchain::ast::{Atom, Program, FALSE};
use hornchain::pipeline::{run_pipeline, PipelineConfig};
use hornchain::print::program_to_string;
use hornchain::parse_program;
use hornchain::thresholds::{compute_thresholds_capped, DEFAULT_TP_CAP};
use hornchain::transform::{ans_name, query_answer, raf_filter, split_predicates, unfold_forward};

#[derive(Parser)]
#[command(name = "hornchain", version, about = "Safety verification of constrained Horn clauses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole tool chain and print the model and verdict
    Verify(VerifyArgs),
    /// Parse and print the normalized program
    Parse { file: PathBuf },
    /// Forward unfolding
    Unfold { file: PathBuf },
    /// Redundant argument filtering with respect to `false`
    Raf { file: PathBuf },
    /// Query-answer transformation with respect to `false`
    Qa { file: PathBuf },
    /// Predicate splitting; `false` and `false_ans` are never split
    Split { file: PathBuf },
    /// Threshold constraints, one per line
    Thresholds {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TP_CAP)]
        tp_cap: usize,
    },
    /// Polyhedral analysis of the program as given
    Analyze {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TP_CAP)]
        tp_cap: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Write every intermediate program next to the input
    #[arg(long)]
    dump: bool,
    #[arg(long)]
    skip_raf: bool,
    #[arg(long)]
    skip_unfold: bool,
    #[arg(long)]
    skip_qa: bool,
    #[arg(long)]
    skip_split: bool,
    /// Widen without threshold constraints
    #[arg(long)]
    skip_thresholds: bool,
    #[arg(long, default_value_t = 2)]
    widen_delay: usize,
    #[arg(long, default_value_t = DEFAULT_TP_CAP)]
    tp_cap: usize,
    #[arg(long, default_value = FALSE)]
    goal: String,
}

fn load(path: &Path) -> Result<Program, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_program(&text).map_err(|e| format!("{}:{e}", path.display()))
}

fn verify(args: VerifyArgs) -> Result<ExitCode, String> {
    let program = load(&args.file)?;
    let cfg = PipelineConfig {
        raf: !args.skip_raf,
        unfold: !args.skip_unfold,
        qa: !args.skip_qa,
        split: !args.skip_split,
        thresholds: !args.skip_thresholds,
        widen_delay: args.widen_delay,
        tp_cap: args.tp_cap,
        goal: args.goal,
    };
    let out = run_pipeline(&program, &cfg);
    if args.dump {
        let stem = args.file.with_extension("");
        for path in out.write_dumps(&stem).map_err(|e| e.to_string())? {
            eprintln!("wrote {}", path.display());
        }
    }
    print!("{}", out.analysis.model);
    eprintln!(
        "{} iterations, {:.3}s",
        out.analysis.iterations,
        out.elapsed.as_secs_f64()
    );
    println!("VERDICT: {}", out.verdict);
    Ok(match out.verdict {
        Verdict::Safe => ExitCode::SUCCESS,
        Verdict::Unknown => ExitCode::from(2),
    })
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let goal = Atom::prop(FALSE);
    let emit = |p: &Program| {
        print!("{}", program_to_string(p));
        Ok(ExitCode::SUCCESS)
    };
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::Parse { file } => emit(&load(&file)?),
        Command::Unfold { file } => emit(&unfold_forward(&load(&file)?)),
        Command::Raf { file } => emit(&raf_filter(&load(&file)?, &goal)),
        Command::Qa { file } => emit(&query_answer(&load(&file)?, &goal)),
        Command::Split { file } => emit(&split_predicates(&load(&file)?, &ans_name(FALSE))),
        Command::Thresholds { file, tp_cap } => {
            for line in compute_thresholds_capped(&load(&file)?, tp_cap).lines() {
                println!("{line}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Analyze { file, tp_cap } => {
            let p = load(&file)?;
            let model = analyze(&p, &compute_thresholds_capped(&p, tp_cap));
            print!("{model}");
            let safe = model.is_empty_at(FALSE) && model.is_empty_at(&ans_name(FALSE));
            let verdict = if safe { Verdict::Safe } else { Verdict::Unknown };
            println!("VERDICT: {verdict}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
