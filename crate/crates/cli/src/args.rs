use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hitsndiffs::irt::Model;
use hitsndiffs::Method;

#[derive(Debug, Parser)]
#[command(name = "hnd", version, about = "Rank users by ability from multiple-choice responses")]
pub struct Cli {
    /// Seed for generation and spectral start vectors.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for bench sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory (gen) or file (rank, eval, bench).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic dataset.
    Gen(GenArgs),
    /// Rank the users of a response file.
    Rank(RankArgs),
    /// Score a ranking against true abilities.
    Eval(EvalArgs),
    /// Time methods over a grid of user counts.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Orient {
    Entropy,
    None,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value = "samejima", value_parser = parse_model)]
    pub model: Model,
    #[arg(long, default_value_t = 100)]
    pub users: usize,
    #[arg(long, default_value_t = 100)]
    pub items: usize,
    /// Defaults to 2 for binary models and 3 otherwise.
    #[arg(long)]
    pub options: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub p_answer: f64,
    /// Ability range as `lo,hi`.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub ability: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub difficulty: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub discrimination: Option<(f64, f64)>,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    pub guessing: Option<(f64, f64)>,
    #[arg(long)]
    pub grm_comparable: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Response file with header `user,item,option`.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to entropy for spectral methods and none otherwise.
    #[arg(long, value_enum)]
    pub orient: Option<Orient>,
    /// Rank only the largest connected component.
    #[arg(long)]
    pub largest_component: bool,
    /// Answer key, required for true-answer.
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub ranking: PathBuf,
    #[arg(long)]
    pub abilities: PathBuf,
    /// Second ranking of the same users for rank displacement.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Label for the method column; defaults to the ranking file stem.
    #[arg(long)]
    pub method: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "hnd-power")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub users: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub items: usize,
    #[arg(long, default_value_t = 3)]
    pub options: usize,
    #[arg(long, default_value = "samejima", value_parser = parse_model)]
    pub model: Model,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub timeout_s: f64,
    /// Skip the discarded warm-up run.
    #[arg(long)]
    pub no_warmup: bool,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse::<Model>().map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(lo)?, num(hi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-0.5,0.5"), Ok((-0.5, 0.5)));
        assert!(parse_range("1").is_err());
        assert!(parse_range("a,1").is_err());
    }

    #[test]
    fn method_lists() {
        let cli = Cli::try_parse_from(["hnd", "bench", "--methods", "hnd-power,hits", "--users", "10,20"]).unwrap();
        match cli.command {
            Command::Bench(b) => {
                assert_eq!(b.methods, vec![Method::HndPower, Method::Hits]);
                assert_eq!(b.users, vec![10, 20]);
            }
            other => panic!("{other:?}"),
        }
    }
}
