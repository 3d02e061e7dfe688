use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use strata_morse::catalog;
use strata_morse::problem::{run, Format, Problem, ProblemFile, Report};
use strata_morse::rational::{parse_rational, RationalSpec};
use strata_morse::spectral::{csv_table, parse_threshold, with_threads};
use strata_morse::Error;

#[derive(Parser)]
#[command(
    name = "strata-morse",
    version,
    about = "Stratified Morse theory calculator and verifier"
)]
struct Cli {
    /// Output format; defaults to the problem file's choice.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads for the spectral engine.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Report file (cohomology, morse) or output directory (spectral, examples).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Text => Format::Text,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Global cohomology table, Poincaré polynomial, Witt and self-duality flags.
    Cohomology { file: PathBuf },
    /// Morse polynomials and every inequality and duality check.
    Morse { file: PathBuf },
    /// Small-eigenvalue counts of the discretized Witten Laplacian.
    Spectral {
        file: PathBuf,
        /// `auto` or a positive rational.
        #[arg(long)]
        threshold: Option<String>,
        /// Replaces the file's epsilon list; repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<String>,
        /// Replaces the number of radial grid points.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Writes every shipped example problem (and golden text reports).
    Examples,
}

enum Failure {
    Input(String),
    Check,
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence(_) => Failure::Math(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn read_problem(path: &Path, expected: &str) -> Result<ProblemFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if file.problem.kind() != expected {
        return Err(Failure::Input(format!(
            "{} holds a {} problem, not a {expected} problem",
            path.display(),
            file.problem.kind()
        )));
    }
    Ok(file)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let text = report.render(format);
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if report.passes() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn apply_overrides(
    file: &mut ProblemFile,
    threshold: Option<&str>,
    epsilon: &[String],
    grid: Option<usize>,
) -> Result<(), Failure> {
    let Problem::Spectral(model) = &mut file.problem else {
        unreachable!("checked by read_problem");
    };
    if let Some(t) = threshold {
        let spec = match t.trim() {
            "auto" => RationalSpec::Text("auto".into()),
            other => RationalSpec::from(parse_rational(other)?),
        };
        model.threshold = parse_threshold(&spec)?;
    }
    if !epsilon.is_empty() {
        model.epsilons = epsilon
            .iter()
            .map(|e| parse_rational(e))
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = grid {
        model.grid_points = n;
    }
    // re-validate the edited model through its file form
    let json = file.to_json();
    *file = ProblemFile::parse(&json)?;
    Ok(())
}

fn examples(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    for ex in catalog::examples()? {
        write(&dir.join(format!("{}.json", ex.name)), &ex.file.to_json())?;
        if !matches!(ex.file.problem, Problem::Spectral(_)) {
            let report = run(&ex.file.problem)?;
            write(
                &dir.join(format!("{}.expected.txt", ex.name)),
                &report.render(Format::Text),
            )?;
        }
        println!("wrote {}", ex.name);
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let format_of = |file: &ProblemFile| cli.format.map_or(file.output.format, Format::from);
    match &cli.command {
        Command::Cohomology { file } | Command::Morse { file } => {
            let kind = if matches!(cli.command, Command::Cohomology { .. }) {
                "cohomology"
            } else {
                "morse"
            };
            let problem = read_problem(file, kind)?;
            let report = run(&problem.problem)?;
            emit(&report, format_of(&problem), cli.out.as_deref())
        }
        Command::Spectral {
            file,
            threshold,
            epsilon,
            grid,
        } => {
            let mut problem = read_problem(file, "spectral")?;
            apply_overrides(&mut problem, threshold.as_deref(), epsilon, *grid)?;
            let report = with_threads(cli.threads, || run(&problem.problem))??;
            if let (Some(dir), Report::Spectral(r)) = (&cli.out, &report) {
                fs::create_dir_all(dir)
                    .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
                write(&dir.join("eigenvalues.csv"), &csv_table(&r.reports))?;
                write(&dir.join("summary.json"), &report.render(Format::Json))?;
            }
            emit(&report, format_of(&problem), None)
        }
        Command::Examples => examples(cli.out.as_deref().unwrap_or(Path::new("problems"))),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
