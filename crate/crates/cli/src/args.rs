use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use llfisher::bethe::{ground_state, type1_excitation, type2_excitation, BoundaryCondition, QuantumNumber, StateSpec};
use llfisher::Error;

#[derive(Debug, Parser)]
#[command(
    name = "llfisher",
    version,
    about = "Fisher information of the interaction strength in few-body Lieb-Liniger gases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the Bethe equations for one state and print quasimomenta and norm.
    Solve(SolveArgs),
    /// QFI and CFI at one point or along a sweep of c or L.
    Fisher(FisherArgs),
    /// System size that maximizes the CFI at fixed c.
    Lmax(LmaxArgs),
    /// Imaging CFI for a list of pixel counts, optionally with simulated shots and an MLE.
    Imaging(ImagingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "c")]
    C,
    #[value(name = "L")]
    L,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// periodic or hardwall
    #[arg(long)]
    pub bc: String,
    /// Particle number (implied by -I)
    #[arg(short = 'N')]
    pub n: Option<usize>,
    #[arg(long, group = "selector")]
    pub ground: bool,
    /// Type-I excitation with index q
    #[arg(long, value_name = "Q", group = "selector")]
    pub type1: Option<usize>,
    /// Type-II excitation with index q
    #[arg(long, value_name = "Q", group = "selector")]
    pub type2: Option<usize>,
    /// Explicit quantum numbers, e.g. `-I -1/2,1/2`; `fisher` accepts several
    #[arg(short = 'I', value_name = "LIST", allow_hyphen_values = true, group = "selector")]
    pub quantum_numbers: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to a file instead of stdout
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(short = 'c', allow_negative_numbers = true)]
    pub c: f64,
    #[arg(short = 'L', allow_negative_numbers = true)]
    pub l: f64,
    /// Relative residual tolerance of the Newton solver
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FisherArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Fixed coupling (omit when sweeping c)
    #[arg(short = 'c', allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Fixed length (omit when sweeping L)
    #[arg(short = 'L', allow_negative_numbers = true)]
    pub l: Option<f64>,
    #[arg(long, value_enum, requires = "grid")]
    pub axis: Option<Axis>,
    /// `v1,v2,...`, `lin:a:b:n` or `log:a:b:n`
    #[arg(long, requires = "axis", allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Integrate the CFI even when it is known to equal the QFI
    #[arg(long)]
    pub force_quadrature: bool,
    /// Gauss-Legendre order per simplex dimension
    #[arg(long)]
    pub order: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LmaxArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(short = 'c', allow_negative_numbers = true)]
    pub c: f64,
    /// Search bracket `lo,hi` in L
    #[arg(long, allow_hyphen_values = true)]
    pub bracket: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ImagingArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(short = 'c', allow_negative_numbers = true)]
    pub c: f64,
    #[arg(short = 'L', allow_negative_numbers = true)]
    pub l: f64,
    /// Pixel counts, e.g. `2,4,8,16,32`
    #[arg(long, allow_hyphen_values = true)]
    pub pixels: String,
    /// Per-dimension quadrature order inside each pixel box
    #[arg(long)]
    pub order: Option<usize>,
    /// Number of simulated shots
    #[arg(long, value_name = "M")]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pixel count used for sampling (default: the largest in --pixels)
    #[arg(long, requires = "sample")]
    pub sample_pixels: Option<usize>,
    #[arg(long, requires = "sample", default_value = "shots.csv")]
    pub shots_out: PathBuf,
    #[arg(long, requires = "sample", default_value = "mle.json")]
    pub mle_out: PathBuf,
    /// Likelihood grid points for the MLE
    #[arg(long, requires = "sample", default_value_t = 41)]
    pub mle_points: usize,
    /// Half-width of the likelihood grid in Cramér-Rao standard deviations
    #[arg(long, requires = "sample", default_value_t = 6.0)]
    pub mle_width: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_list(list: &str) -> Result<Vec<QuantumNumber>, Error> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

impl StateArgs {
    pub fn bc(&self) -> Result<BoundaryCondition, Error> {
        self.bc.parse()
    }

    /// All selected states; more than one only with repeated `-I`.
    pub fn states(&self) -> Result<Vec<StateSpec>, Error> {
        let bc = self.bc()?;
        if !self.quantum_numbers.is_empty() {
            let specs = self
                .quantum_numbers
                .iter()
                .map(|list| StateSpec::new(bc, parse_list(list)?))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(n) = self.n {
                if specs.iter().any(|s| s.n() != n) {
                    return Err(Error::InvalidArgument(format!("-N {n} disagrees with the -I list")));
                }
            }
            return Ok(specs);
        }
        let n = self.n.ok_or_else(|| Error::InvalidArgument("-N is required unless -I is given".into()))?;
        let spec = if let Some(q) = self.type1 {
            type1_excitation(bc, n, q)?
        } else if let Some(q) = self.type2 {
            type2_excitation(bc, n, q)?
        } else {
            ground_state(bc, n)?
        };
        Ok(vec![spec])
    }

    pub fn single(&self) -> Result<StateSpec, Error> {
        let mut all = self.states()?;
        if all.len() != 1 {
            return Err(Error::InvalidArgument("this command takes exactly one state".into()));
        }
        Ok(all.remove(0))
    }
}

pub fn parse_floats(s: &str) -> Result<Vec<f64>, Error> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("`{t}` is not a number"))))
        .collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::InvalidArgument(format!("bad grid `{s}`; use v1,v2,..., lin:a:b:n or log:a:b:n"));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let a: f64 = a.parse().map_err(|_| bad())?;
            let b: f64 = b.parse().map_err(|_| bad())?;
            let n: usize = n.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            if n == 1 {
                vec![a]
            } else if *kind == "lin" {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            } else {
                if !(a > 0.0 && b > 0.0) {
                    return Err(bad());
                }
                let (la, lb) = (a.ln(), b.ln());
                (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
            }
        }
        [_] => parse_floats(s)?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    Ok(grid)
}
