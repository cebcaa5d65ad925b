use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "relevance", version, about = "Exact and sampled δ-relevance for Boolean formulas")]
pub struct Cli {
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    #[command(flatten)]
    pub caps: Caps,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Caps {
    /// Largest arity enumerated as one truth table.
    #[arg(long, global = true, env = "RELEVANCE_ENUM_CAP")]
    pub enum_cap: Option<usize>,
    /// Largest arity accepted by subset searches.
    #[arg(long, global = true, env = "RELEVANCE_SEARCH_CAP")]
    pub search_cap: Option<usize>,
    /// Largest number of candidate subsets one search may test.
    #[arg(long, global = true, env = "RELEVANCE_CANDIDATE_BUDGET")]
    pub candidate_budget: Option<u64>,
    /// Largest number of case splits one probability computation may make.
    #[arg(long, global = true, env = "RELEVANCE_BRANCH_BUDGET")]
    pub branch_budget: Option<u64>,
    /// Largest arity for a characteristic-function value.
    #[arg(long, global = true, env = "RELEVANCE_CHARACTERISTIC_CAP")]
    pub characteristic_cap: Option<usize>,
    /// Largest arity for a full Shapley vector.
    #[arg(long, global = true, env = "RELEVANCE_SHAPLEY_CAP")]
    pub shapley_cap: Option<usize>,
}

/// Where the formula and query parameters come from. Flags override the
/// fields of an input file.
#[derive(Args, Debug, Clone, Default)]
pub struct Query {
    /// Formula text, e.g. "(x1 & x2) | !x3".
    #[arg(long, short = 'f')]
    pub formula: Option<String>,
    /// JSON query file with fields formula, arity, x, s, k, m, delta, gamma, seed, rounds.
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    /// Number of variables, when larger than the highest index in the formula.
    #[arg(long)]
    pub arity: Option<usize>,
    /// Assignment as a bitstring, leftmost character is x1.
    #[arg(long)]
    pub x: Option<String>,
    /// Fixed variables, e.g. "1,3" or "{1,3}".
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Odd number of sampling runs per majority vote.
    #[arg(long)]
    pub rounds: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate the formula at x.
    Eval(Query),
    /// Satisfaction probability, and the agreement probability given x and s.
    Prob {
        #[command(flatten)]
        query: Query,
        /// Also report the split into independent components.
        #[arg(long)]
        decompose: bool,
    },
    /// Is the set s δ-relevant for x?
    Check(Query),
    /// Is there a δ-relevant set of size at most k?
    Decide(Query),
    /// Smallest δ-relevant set.
    Minimize(Query),
    /// Monte-Carlo test of the set s with gap γ.
    Sample(Query),
    /// Sampled decision of the gapped problem for sets of size at most k.
    DecideGapped(Query),
    /// Greedy upper bound for the smallest relevant set, by sampling.
    Greedy(Query),
    /// Probability gadgets.
    #[command(subcommand)]
    Gadget(GadgetCommand),
    /// Reduce an instance along the hardness chain.
    Reduce {
        #[command(subcommand)]
        step: ReduceStep,
    },
    /// Solve a source and a reduced instance exactly and compare the answers.
    Verify {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        reduced: PathBuf,
    },
    /// Parameters of the inapproximability argument.
    InapproxParams {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        delta: String,
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        alpha: String,
    },
    /// Exact Shapley values at x.
    Shapley(Query),
    /// Compile the formula into a ReLU network.
    CompileRelu {
        #[command(flatten)]
        query: Query,
        /// Check the network against the formula on every input.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum GadgetCommand {
    /// Monotone DNF with probability within 2^-ell of eta.
    Pi {
        #[arg(long)]
        eta: String,
        #[arg(long)]
        ell: u32,
    },
    /// Gadget attached by OR: P > delta1 becomes P ≥ delta2.
    Raise(ThresholdArgs),
    /// Gadget attached by AND: P ≥ delta2 becomes P > delta1.
    Lower(ThresholdArgs),
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Arity of the host formulas.
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub delta1: String,
    #[arg(long)]
    pub delta2: String,
}

/// Source instance: a JSON instance file, or a formula with the parameters
/// the step needs.
#[derive(Args, Debug, Clone)]
pub struct ReduceSource {
    /// Instance file written by `reduce` or by hand.
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[command(flatten)]
    pub query: Query,
    /// Also write the reduced instance to this file.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum ReduceStep {
    /// E-Maj-Sat to IP1.
    EmajsatIp1(ReduceSource),
    /// IP1 to IP2; --delta is the target threshold in [1/2, 1).
    Ip1Ip2(ReduceSource),
    /// IP2 to Relevant-Input.
    Ip2Ri(ReduceSource),
    /// SAT to IP3 with threshold --delta and gap --gamma.
    SatIp3 {
        #[command(flatten)]
        source: ReduceSource,
        /// Size bound of the No condition; at least k' (the default).
        #[arg(long)]
        m: Option<usize>,
    },
}
