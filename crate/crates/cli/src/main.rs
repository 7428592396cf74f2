use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dendrite_cli::{
    cmd_analyze, cmd_bench, cmd_compare, cmd_concat, cmd_fmt, cmd_render, max_nodes_from_env, parse_style, CliError,
    InputConfig, OutputFormat, RenderConfig, MAX_NODES_ENV,
};

/// Analytic tree fractals from derivative coordinates.
#[derive(Debug, Parser)]
#[command(name = "dendrite", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Grid step override.
    #[arg(long = "delta-s", value_name = "DS")]
    delta_s: Option<f64>,
    /// Cut the domain at this s.
    #[arg(long = "s-max")]
    s_max: Option<f64>,
    /// Maximum number of generations.
    #[arg(long)]
    generations: Option<usize>,
    /// Build this tree of the program instead of its entry point.
    #[arg(long)]
    tree: Option<String>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// svg, stl or json (default: from the output extension, else by dimension).
    #[arg(long)]
    format: Option<String>,
    /// Extra channel binding for SVG, e.g. `pressure=stroke-opacity`.
    #[arg(long = "style", value_name = "CHANNEL=ATTR")]
    styles: Vec<String>,
    /// Radial segments of STL tubes.
    #[arg(long = "tube-segments", default_value_t = 8)]
    tube_segments: usize,
    /// Constant tube radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Drop trailing axes of higher-dimensional trees to fit the format.
    #[arg(long)]
    project: bool,
    /// Closed polygon (CSV with x,y columns) that branches steer away from.
    #[arg(long)]
    perimeter: Option<PathBuf>,
    /// Steering strength near the perimeter.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gain: f64,
    /// Distance over which the steering decays.
    #[arg(long, default_value_t = 0.1)]
    falloff: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a tree and write SVG, STL or JSON.
    Render {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Classify self-similarity and report the bound.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Machine-readable report.
        #[arg(long)]
        json: bool,
        /// Also estimate the box-counting dimension.
        #[arg(long = "box")]
        box_dimension: bool,
    },
    /// Compare the canopies of two planar trees.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Generations to compare (default: all shared ones).
        #[arg(long = "compare-generations")]
        compare_generations: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Join two trees end to end and export the result.
    Concat {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Resample the second tree when the grid steps differ.
        #[arg(long)]
        resample: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Time derivative accumulation against the transform stack.
    Bench {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Print a program in canonical layout.
    Fmt {
        input: PathBuf,
        /// Fail when the file is not already formatted.
        #[arg(long)]
        check: bool,
        /// Rewrite the file in place.
        #[arg(long, conflicts_with = "check")]
        write: bool,
    },
}

fn input(path: PathBuf, grid: &GridArgs, max_nodes: usize) -> InputConfig {
    InputConfig {
        path,
        tree: grid.tree.clone(),
        delta_s: grid.delta_s,
        s_max: grid.s_max,
        generations: grid.generations,
        max_nodes,
    }
}

fn render_config(out: OutputArgs) -> Result<RenderConfig, CliError> {
    Ok(RenderConfig {
        format: out.format.as_deref().map(OutputFormat::parse).transpose()?,
        output: out.output,
        styles: out.styles.iter().map(|s| parse_style(s)).collect::<Result<_, _>>()?,
        tube_segments: out.tube_segments,
        radius: out.radius,
        project: out.project,
        perimeter: out.perimeter,
        gain: out.gain,
        falloff: out.falloff,
    })
}

fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let max_nodes = max_nodes_from_env(std::env::var(MAX_NODES_ENV).ok().as_deref())?;
    match cli.command {
        Command::Render { input: path, grid, out } => {
            cmd_render(&input(path, &grid, max_nodes), &render_config(out)?, stdout)
        }
        Command::Analyze {
            input: path,
            grid,
            json,
            box_dimension,
        } => cmd_analyze(&input(path, &grid, max_nodes), json, box_dimension, stdout),
        Command::Compare {
            a,
            b,
            grid,
            compare_generations,
            json,
        } => cmd_compare(
            &input(a, &grid, max_nodes),
            &input(b, &grid, max_nodes),
            compare_generations,
            json,
            stdout,
        ),
        Command::Concat {
            first,
            second,
            grid,
            resample,
            out,
        } => cmd_concat(
            &input(first, &grid, max_nodes),
            &input(second, &grid, max_nodes),
            resample,
            &render_config(out)?,
            stdout,
        ),
        Command::Bench {
            input: path,
            grid,
            repeats,
        } => cmd_bench(&input(path, &grid, max_nodes), repeats, stdout),
        Command::Fmt { input, check, write } => cmd_fmt(&input, check, write, stdout),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let result = run(cli, &mut lock);
    let _ = lock.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
