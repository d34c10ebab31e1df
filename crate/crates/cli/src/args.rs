use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "kgevo",
    version,
    about = "Versioned RDF snapshots and knowledge-graph evolution analytics"
)]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "KGEVO_STORE")]
    pub store: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Triples,
    Nodes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Add,
    Delete,
    Update,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Type,
    Prop,
    Typeprop,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an N-Triples file (optionally .gz) and print it canonically.
    Parse {
        file: PathBuf,
        /// Fail on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
    },
    /// Store a snapshot and print its version id.
    Commit {
        file: PathBuf,
        #[arg(long)]
        label: String,
        /// RFC 3339 timestamp; defaults to now.
        #[arg(long)]
        timestamp: Option<String>,
        #[arg(long)]
        strict: bool,
    },
    /// List stored versions.
    Log,
    /// Print a stored version as canonical N-Triples.
    Materialize { version: String },
    /// Print the changeset between two versions as delta JSON.
    Diff { from: String, to: String },
    /// Check a stored version against its id.
    Verify { version: String },
    /// Flag resources whose changes are unusual.
    Noteworthy {
        from: String,
        to: String,
        #[arg(long, default_value_t = 0.05, value_parser = open_unit)]
        theta: f64,
        /// Compare each resource with its community (detected on FROM).
        #[arg(long)]
        local: bool,
        /// Feature families to track (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        families: Vec<Family>,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Detect communities in a version.
    Communities {
        version: String,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Classify community evolution between two versions.
    Events {
        from: String,
        to: String,
        #[arg(long, default_value_t = 0.5, value_parser = half_open_unit)]
        omega: f64,
        #[arg(long, value_enum, default_value_t = Basis::Triples)]
        basis: Basis,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Structural metrics of a version (`--format csv`: degree histogram).
    Metrics {
        version: String,
        /// Also compute metrics for this version and report score deltas.
        #[arg(long)]
        compare: Option<String>,
        #[arg(long, default_value_t = 0.85, value_parser = open_unit)]
        damping: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[command(flatten)]
        projection: ProjectionArgs,
    },
    /// Rank properties by how often they changed between two versions.
    RankProperties {
        from: String,
        to: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        top: Option<u64>,
    },
    /// Count objects whose types changed, per referencing property.
    TypeDynamics {
        from: String,
        to: String,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        /// File with one property IRI per line.
        #[arg(long)]
        predicates: Option<PathBuf>,
    },
    /// Synchronisation and alignment of two ontology changes.
    OntoSync {
        /// Versions before and after the first change.
        first: String,
        first_next: String,
        /// Versions before and after the second change.
        second: String,
        second_next: String,
        #[command(flatten)]
        threshold: ThresholdArgs,
    },
    /// Share of an ontology's changes induced by a dependency.
    OntoEd {
        /// Versions of the ontology, oldest first.
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        ontology: Vec<String>,
        /// Versions of the ontology it depends on, oldest first.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        external: Vec<String>,
        #[command(flatten)]
        threshold: ThresholdArgs,
    },
    /// Class and subclass-axiom counts per version, as CSV.
    SchemaSeries {
        /// Versions to include (default: all, in commit order).
        versions: Vec<String>,
    },
    /// Train TransE on a version and write the model JSON.
    Embed {
        version: String,
        #[command(flatten)]
        training: TrainingArgs,
        /// Also write the per-epoch loss as CSV.
        #[arg(long)]
        loss_csv: Option<PathBuf>,
    },
    /// Embedding-based similarity of two versions.
    Simsem {
        from: String,
        to: String,
        /// Model trained on FROM; trained on the fly when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        training: TrainingArgs,
    },
    /// Similarity of two entities, 1 / (1 + distance).
    Matetee {
        a: String,
        b: String,
        #[arg(long)]
        model: PathBuf,
    },
    /// Randomly modify an N-Triples file, writing the result and the truth.
    Perturb {
        file: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = open_unit)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the applied changeset (delta JSON) here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    /// File with one predicate IRI per line; only these become edges.
    #[arg(long)]
    pub predicates: Option<PathBuf>,
    /// Keep rdf:type links as edges.
    #[arg(long)]
    pub type_edges: bool,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 7.0)]
    pub threshold_days: f64,
}

#[derive(Debug, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(2..))]
    pub dim: u64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn half_open_unit(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1]"))
    }
}
