use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use catk::error::{CatkError, Result};
use catk::homology::ChainComplex;
use catk::region::Region;
use catk::scenario::{examples, run, RegionSpec, Scenario};

#[derive(Parser)]
#[command(name = "catk", version, about = "Geodesics, homology and comparison checks on polygonal 2-complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a scenario file without running it.
    Validate { file: PathBuf },
    /// Run a scenario and write its report.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the mesh size.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in scenario.
    Example {
        /// One of: tripod, tripod-geodesic, tripod-generated, tripod-triangle, square, notch, annulus, cone.
        name: String,
        /// Half-plane width (tripod only).
        #[arg(long = "W")]
        width: Option<f64>,
        /// Half-height of the spine (tripod only).
        #[arg(long = "H")]
        half_height: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        emit: PathBuf,
    },
    /// Replace a scenario's region by a random disk and write the result.
    GenRegion {
        file: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        cells: usize,
        /// Output file; defaults to rewriting the input.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<Scenario> {
    Scenario::from_json(&fs::read_to_string(path)?)
}

fn example(name: &str, width: Option<f64>, half: Option<f64>, h: Option<f64>) -> Result<Scenario> {
    let mut sc = if name == "tripod" {
        examples::tripod(width.unwrap_or(4.0), half.unwrap_or(5.0), h.unwrap_or(0.25))
    } else {
        if width.is_some() || half.is_some() {
            return Err(CatkError::InvalidScenario("--W and --H apply to the tripod only".into()));
        }
        examples::by_name(name).ok_or_else(|| {
            CatkError::InvalidScenario(format!("unknown example {name}; known: {}", examples::NAMES.join(", ")))
        })?
    };
    if let Some(h) = h {
        sc.h = h;
    }
    sc.validate()?;
    Ok(sc)
}

fn main_inner(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { file } => {
            let sc = read(&file)?;
            println!("ok {} {}", sc.name, sc.hash());
            Ok(0)
        }
        Command::Run { file, seed, h, out } => {
            let mut sc = read(&file)?;
            if let Some(seed) = seed {
                sc.plan.seed = seed;
            }
            if let Some(h) = h {
                sc.h = h;
            }
            let report = run(&sc)?;
            let text = report.to_json();
            match out {
                Some(p) => fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
            for f in &report.body.failures {
                eprintln!("violation: {f}");
            }
            for w in &report.body.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("status: {:?} (expected {:?})", report.body.status, report.body.expect);
            Ok(report.exit_code() as u8)
        }
        Command::Example { name, width, half_height, h, emit } => {
            let sc = example(&name, width, half_height, h)?;
            fs::write(emit, sc.to_json() + "\n")?;
            Ok(0)
        }
        Command::GenRegion { file, seed, cells, out } => {
            let mut sc = read(&file)?;
            sc.region = RegionSpec::Generated { seed, cells };
            let c = sc.validate()?;
            let s = sc.subdivide(&c)?;
            let r = Region::generate(&s, seed, cells);
            let hom = ChainComplex::of_region(&s, &r).homology()?;
            eprintln!("region: {} triangles, area {:.4}, betti0 {}, betti1 {}", r.tris.len(), r.area(&s), hom.betti0, hom.betti1);
            fs::write(out.unwrap_or(file), sc.to_json() + "\n")?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            ExitCode::from(1)
        }
    }
}
