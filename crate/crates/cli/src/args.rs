use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kernquad::DEFAULT_ALPHA;

#[derive(Parser, Debug)]
#[command(
    name = "kernquad",
    version,
    about = "Gaussian kernel quadrature experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Nodes and approximate weights of one rule
    Rule(Options),
    /// Relative error of approximate against reference kernel weights
    WeightsCompare(Options),
    /// Minimum weight and weight sums of approximate rules
    PositivitySweep(Options),
    /// Worst-case errors of several rules
    WceSweep(Options),
    /// One-dimensional test integral
    Integrate(Options),
    /// Tensor-product test integral
    TensorIntegrate(Options),
    /// Derived and convergence constants for one length-scale
    Constants(Options),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rule(_) => "rule",
            Command::WeightsCompare(_) => "weights-compare",
            Command::PositivitySweep(_) => "positivity-sweep",
            Command::WceSweep(_) => "wce-sweep",
            Command::Integrate(_) => "integrate",
            Command::TensorIntegrate(_) => "tensor-integrate",
            Command::Constants(_) => "constants",
        }
    }

    pub fn options(&self) -> &Options {
        match self {
            Command::Rule(o)
            | Command::WeightsCompare(o)
            | Command::PositivitySweep(o)
            | Command::WceSweep(o)
            | Command::Integrate(o)
            | Command::TensorIntegrate(o)
            | Command::Constants(o) => o,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Single length-scale
    #[arg(long, conflicts_with = "ells")]
    pub ell: Option<f64>,

    /// Comma-separated length-scales
    #[arg(long, value_delimiter = ',')]
    pub ells: Option<Vec<f64>>,

    /// Single rule size
    #[arg(long, conflicts_with = "ns")]
    pub n: Option<usize>,

    /// Rule sizes as `a:b` (inclusive) or a comma-separated list
    #[arg(long, value_parser = parse_sizes)]
    pub ns: Option<Sizes>,

    /// Eigenfunction scale parameter
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,

    /// Dimension of the tensor integrand (constants: also report the multivariate constant)
    #[arg(long)]
    pub dims: Option<usize>,

    /// Monomial powers of the test integrand, one per dimension
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,

    /// Decay rates of the test integrand in (0, 4), one per dimension
    #[arg(long, value_delimiter = ',')]
    pub c: Option<Vec<f64>>,

    /// Comma-separated rule names
    #[arg(long, value_delimiter = ',')]
    pub rules: Option<Vec<String>>,

    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Also write a gnuplot script plotting the output file
    #[arg(long, requires = "out")]
    pub plot: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

pub fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("invalid size '{t}': {e}"))
    };
    if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            return Err(format!("empty range {a}:{b}"));
        }
        return Ok(Sizes((a..=b).collect()));
    }
    let v = s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err("no sizes given".into());
    }
    Ok(Sizes(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("2:5").unwrap().0, vec![2, 3, 4, 5]);
        assert_eq!(parse_sizes("7").unwrap().0, vec![7]);
        assert_eq!(parse_sizes("3,1,2").unwrap().0, vec![3, 1, 2]);
        assert!(parse_sizes("5:2").is_err());
        assert!(parse_sizes("a").is_err());
    }

    #[test]
    fn grammar() {
        let cli = Cli::try_parse_from(["kernquad", "rule", "--ell", "1", "--n", "3"]).unwrap();
        assert_eq!(cli.command.name(), "rule");
        assert_eq!(cli.command.options().n, Some(3));
        assert!(Cli::try_parse_from(["kernquad", "rule", "--ell", "1", "--ells", "1,2"]).is_err());
        assert!(Cli::try_parse_from(["kernquad", "rule", "--plot", "p.gp"]).is_err());
        let cli = Cli::try_parse_from([
            "kernquad",
            "wce-sweep",
            "--ells",
            "0.2,1",
            "--ns",
            "1:4",
            "--rules",
            "gh,kq",
        ])
        .unwrap();
        let o = cli.command.options();
        assert_eq!(o.ells.as_deref(), Some(&[0.2, 1.0][..]));
        assert_eq!(o.rules.as_ref().unwrap(), &["gh", "kq"]);
    }
}
