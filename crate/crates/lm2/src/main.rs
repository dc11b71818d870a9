//! `lm2` — command-line front end for the 2-complex library: generators,
//! exact invariants, collapsing, quotients, embedding search, forbidden-list
//! construction, asphericability certification, and Monte Carlo experiments.
//!
//! Complexes travel between commands as face-list text (one face per line,
//! `edge a b` for bare edges, `#` comments), so commands compose in shell
//! pipelines; `-` or an omitted file argument means stdin. Analysis commands
//! emit JSON (default) or CSV via `--format`. Every randomized command
//! accepts `--seed`; when omitted, a fresh seed is drawn and printed to
//! stderr so the run can be reproduced. Worker count for parallel execution
//! follows the RAYON_NUM_THREADS environment variable.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lm2::complex::{Complex2, SurfaceInfo, SurfaceName, Vertex};
use lm2::error::Error;
use lm2::exec::{self, ExecMode};
use lm2::invariants::{
    degree_report, l_invariant, mu, mu_tilde_with_cap, optional_rational_as_string, DegreeReport,
    MuTildeMode, Rational, DEFAULT_BRUTE_CAP,
};
use lm2::patterns::{
    all_embeddings_with_mode, build_forbidden_list_with_mode, certify_asphericable_with_mode,
    count_embeddings_with_mode, find_embedding_with_mode, load_list, low_degree_configuration,
    save_list, verify_list_member, Certificate, ForbiddenList, ListParams, LowDegreeSearch,
    MemberReport, SphereBudget,
};
use lm2::rank::RankField;
use lm2::stochastic::{
    betti_experiment_with_mode, collapse_experiment_with_mode, sample_lm,
    threshold_experiment_with_mode, CollapsePRule,
};
use lm2::surfaces::{
    catalog, collapse_with_order, enumerate_regular_quotients_with_cap, grid_torus_triangulation,
    random_sphere_triangulation, CollapseOrder, CollapseOutcome, RegularQuotient,
};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "lm2",
    version,
    about = "Random 2-complex toolkit: invariants, surfaces, embeddings, certificates, experiments",
    after_help = "Complexes are face-list text files (three integers per line; `edge a b`; `#` comments).\n\
                  `-` or an omitted FILE reads stdin, so commands compose: `lm2 gen catalog octahedron | lm2 inv`.\n\
                  Parallel worker count follows RAYON_NUM_THREADS."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format for analysis commands
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write the primary output to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Execution mode (defaults to parallel when compiled with the
    /// `parallel` feature)
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sequential,
    Parallel,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a complex and print it as a face list
    Gen {
        #[command(subcommand)]
        what: GenCmd,
    },
    /// Exact invariants: v, e, f, Euler characteristic, density, edge-defect
    /// sum, degree statistics, surface classification
    Inv {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
    },
    /// Minimum density over nonempty pure subcomplexes, with a witness
    Mutilde {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// Search strategy
        #[arg(long, value_enum, default_value = "branch-and-bound")]
        search: SearchArg,
        /// Face-count cap for the brute-force strategy
        #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
        brute_cap: usize,
    },
    /// Betti numbers from exact boundary ranks
    Betti {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// Coefficient field for the rank computation
        #[arg(long, value_enum, default_value = "rationals")]
        field: FieldArg,
    },
    /// Collapse free edges until none remain; report the core
    Collapse {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// Pick free edges uniformly at random instead of lexicographically
        #[arg(long)]
        seeded: bool,
        /// Seed for --seeded (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the collapse core as a face list
        #[arg(long, value_name = "PATH")]
        core_out: Option<PathBuf>,
    },
    /// Search for an injective embedding of a pattern complex in a host
    Contains {
        /// Pattern complex (face-list file, or `-` for stdin)
        #[arg(long, value_name = "FILE")]
        pattern: String,
        /// Host complex, or `-`/omitted for stdin
        file: Option<String>,
        /// Count all embeddings instead of finding one
        #[arg(long, conflicts_with = "all")]
        count: bool,
        /// Enumerate all embeddings
        #[arg(long)]
        all: bool,
    },
    /// Find a low-degree vertex configuration on a closed surface
    Config {
        /// Closed-surface face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// Degree bound the configuration's vertices must satisfy
        #[arg(long)]
        degree_bound: u32,
    },
    /// Enumerate regular quotients reachable by merging vertices
    Quotients {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// Maximum number of vertex merges
        #[arg(long, default_value_t = 2)]
        max_merges: u32,
        /// Refuse complexes with more faces than this
        #[arg(long, default_value_t = lm2::surfaces::DEFAULT_QUOTIENT_FACE_CAP)]
        face_cap: usize,
    },
    /// Build or verify a forbidden-subcomplex list directory
    List {
        #[command(subcommand)]
        action: ListCmd,
    },
    /// Check the sufficient condition for asphericability against a list
    Certify {
        /// Face-list file, or `-`/omitted for stdin
        file: Option<String>,
        /// List directory produced by `list build`
        #[arg(long, value_name = "DIR")]
        list: PathBuf,
    },
    /// Seeded Monte Carlo experiments on random complexes
    Experiment {
        #[command(subcommand)]
        which: ExpCmd,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random triangulated sphere (simplicial, 2v−4 faces)
    Sphere {
        /// Number of vertices (at least 4)
        #[arg(long)]
        vertices: u32,
        /// Seed (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Grid torus triangulation with wraparound (rows·cols vertices)
    Torus {
        /// Grid rows (at least 3)
        #[arg(long)]
        rows: u32,
        /// Grid columns (at least 3)
        #[arg(long)]
        cols: u32,
    },
    /// A named catalog complex
    Catalog {
        /// One of: tetrahedron, bipyramid5, octahedron, icosahedron,
        /// rp2_six, sigma1, sigma2, sigma3
        name: String,
    },
    /// Random complex with a full 1-skeleton: each triple a face with
    /// probability p
    Lm {
        /// Number of vertices
        #[arg(long)]
        n: u32,
        /// Probability that each vertex triple is a face, in [0, 1]
        #[arg(long)]
        p: f64,
        /// Seed (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ListCmd {
    /// Sample spheres, harvest star unions of low-degree triples, take
    /// tetrahedron-free regular quotients, and save everything to a
    /// directory
    Build {
        /// Degree bound for the harvested low-degree configurations
        #[arg(long)]
        degree_bound: u32,
        /// Refuse members with more faces than this
        #[arg(long)]
        face_cap: usize,
        /// Number of spheres to sample
        #[arg(long)]
        spheres: u32,
        /// Sphere sizes cycle through 4..=max-vertices
        #[arg(long)]
        max_vertices: u32,
        /// Merge budget for the quotient stage
        #[arg(long, default_value_t = 2)]
        max_merges: u32,
        /// Seed for sphere sampling (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (manifest.json plus one face list per member)
        #[arg(long, value_name = "DIR")]
        dir: PathBuf,
    },
    /// Re-run the membership checks on every stored member
    Verify {
        /// List directory produced by `list build`
        #[arg(long, value_name = "DIR")]
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum ExpCmd {
    /// Empirical embedding probability of a pattern on a (n, α) grid with
    /// p = c·n^(−α)
    Threshold {
        /// Pattern complex (face-list file, or `-` for stdin)
        #[arg(long, value_name = "FILE")]
        pattern: String,
        /// Comma-separated n grid
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Comma-separated α grid
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        /// Scale factor in p = c·n^(−α)
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Trials per grid cell
        #[arg(long)]
        trials: u32,
        /// Seed (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Second Betti numbers before and after tetrahedron pruning at p = c/n
    Betti {
        /// Number of vertices per sample
        #[arg(long)]
        n: u32,
        /// Density parameter in p = c/n
        #[arg(long)]
        c: f64,
        /// Slack subtracted from the asymptotic reference ratio (c − 3)/8
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Number of samples
        #[arg(long)]
        trials: u32,
        /// Seed (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fraction of samples collapsing to a graph at p = c/n^(1+δ)
    Collapse {
        /// Number of vertices per sample
        #[arg(long)]
        n: u32,
        /// Density parameter in p = c/n^(1+δ)
        #[arg(long)]
        c: f64,
        /// Exponent offset δ
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        /// Number of samples
        #[arg(long)]
        trials: u32,
        /// Seed (drawn and echoed when omitted)
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Brute,
    BranchAndBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Rationals,
    Gf2,
}

enum Failure {
    /// Exit 1: the computation itself refused (bad input data, caps, I/O).
    Domain(Error),
    /// Exit 2: the invocation doesn't make sense.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Restore the default SIGPIPE disposition so a closed pipe (e.g. `lm2 gen
/// ... | head`) terminates the process quietly instead of panicking on the
/// next write to stdout.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mode = match cli.mode {
        Some(ModeArg::Sequential) => ExecMode::Sequential,
        Some(ModeArg::Parallel) => ExecMode::Parallel,
        None => exec::default_mode(),
    };
    let out = Output {
        path: cli.out.clone(),
    };
    match cli.command {
        Command::Gen { what } => {
            json_only(cli.format, "gen")?;
            gen_cmd(what, &out)
        }
        Command::Inv { file } => inv_cmd(&read_complex(file.as_deref())?, cli.format, &out),
        Command::Mutilde {
            file,
            search,
            brute_cap,
        } => {
            json_only(cli.format, "mutilde")?;
            let c = read_complex(file.as_deref())?;
            let mt_mode = match search {
                SearchArg::Brute => MuTildeMode::Brute,
                SearchArg::BranchAndBound => MuTildeMode::BranchAndBound,
            };
            let result = mu_tilde_with_cap(&c, mt_mode, brute_cap)?;
            out.write_json(&WithVersion::new(result))
        }
        Command::Betti { file, field } => {
            let c = read_complex(file.as_deref())?;
            let betti = lm2::invariants::betti_numbers(
                &c,
                match field {
                    FieldArg::Rationals => RankField::Rationals,
                    FieldArg::Gf2 => RankField::Gf2,
                },
            );
            match cli.format {
                Format::Json => out.write_json(&WithVersion::new(betti)),
                Format::Csv => out.write_text(format!(
                    "b0,b1,b2,field\n{},{},{},{}\n",
                    betti.b0,
                    betti.b1,
                    betti.b2,
                    json_token(&betti.field)
                )),
            }
        }
        Command::Collapse {
            file,
            seeded,
            seed,
            core_out,
        } => {
            json_only(cli.format, "collapse")?;
            let c = read_complex(file.as_deref())?;
            let (order, used_seed) = if seeded {
                let s = resolve_seed(seed);
                (CollapseOrder::Seeded(s), Some(s))
            } else {
                (CollapseOrder::Lexicographic, None)
            };
            let r = collapse_with_order(&c, order);
            if let Some(path) = core_out {
                lm2::io::write_complex_file(&r.core, &path)?;
            }
            #[derive(Serialize)]
            struct CollapseCliReport {
                tool_version: &'static str,
                order: &'static str,
                #[serde(skip_serializing_if = "Option::is_none")]
                seed: Option<u64>,
                outcome: CollapseOutcome,
                removed_count: usize,
                core_vertices: usize,
                core_edges: usize,
                core_faces: usize,
                residual_edges: usize,
                removed: Vec<(lm2::complex::Edge, lm2::complex::Face)>,
            }
            out.write_json(&CollapseCliReport {
                tool_version: TOOL_VERSION,
                order: if seeded { "seeded" } else { "lexicographic" },
                seed: used_seed,
                outcome: r.outcome,
                removed_count: r.removed.len(),
                core_vertices: r.core.v(),
                core_edges: r.core.e(),
                core_faces: r.core.f(),
                residual_edges: r.residual_graph.edges.len(),
                removed: r.removed,
            })
        }
        Command::Contains {
            pattern,
            file,
            count,
            all,
        } => {
            json_only(cli.format, "contains")?;
            if pattern == "-" && file.as_deref().is_none_or(|f| f == "-") {
                return Err(Failure::Usage(
                    "pattern and host cannot both come from stdin".into(),
                ));
            }
            let pat = read_complex(Some(&pattern))?;
            let host = read_complex(file.as_deref())?;
            contains_cmd(&pat, &host, count, all, mode, &out)
        }
        Command::Config { file, degree_bound } => {
            json_only(cli.format, "config")?;
            let c = read_complex(file.as_deref())?;
            let search = low_degree_configuration(&c, degree_bound)?;
            #[derive(Serialize)]
            struct ConfigReport {
                tool_version: &'static str,
                degree_bound: u32,
                #[serde(flatten)]
                search: LowDegreeSearch,
            }
            out.write_json(&ConfigReport {
                tool_version: TOOL_VERSION,
                degree_bound,
                search,
            })
        }
        Command::Quotients {
            file,
            max_merges,
            face_cap,
        } => {
            json_only(cli.format, "quotients")?;
            let c = read_complex(file.as_deref())?;
            let quotients = enumerate_regular_quotients_with_cap(&c, max_merges, face_cap)?;
            #[derive(Serialize)]
            struct QuotientsReport {
                tool_version: &'static str,
                max_merges: u32,
                count: usize,
                quotients: Vec<RegularQuotient>,
            }
            out.write_json(&QuotientsReport {
                tool_version: TOOL_VERSION,
                max_merges,
                count: quotients.len(),
                quotients,
            })
        }
        Command::List { action } => {
            json_only(cli.format, "list")?;
            list_cmd(action, mode, &out)
        }
        Command::Certify { file, list } => {
            json_only(cli.format, "certify")?;
            let c = read_complex(file.as_deref())?;
            let forbidden = load_list(&list)?;
            let certificate = certify_asphericable_with_mode(&c, &forbidden, mode)?;
            #[derive(Serialize)]
            struct CertifyReport {
                tool_version: &'static str,
                list_dir: String,
                list_members_l1: usize,
                list_members_l2: usize,
                list_incomplete: bool,
                #[serde(flatten)]
                certificate: Certificate,
            }
            out.write_json(&CertifyReport {
                tool_version: TOOL_VERSION,
                list_dir: list.display().to_string(),
                list_members_l1: forbidden.members_l1.len(),
                list_members_l2: forbidden.members_l2.len(),
                list_incomplete: forbidden.incomplete,
                certificate,
            })
        }
        Command::Experiment { which } => experiment_cmd(which, cli.format, mode, &out),
    }
}

/// Wrapper adding the tool version to a serializable payload.
#[derive(Serialize)]
struct WithVersion<T: Serialize> {
    tool_version: &'static str,
    #[serde(flatten)]
    payload: T,
}

impl<T: Serialize> WithVersion<T> {
    fn new(payload: T) -> WithVersion<T> {
        WithVersion {
            tool_version: TOOL_VERSION,
            payload,
        }
    }
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn write_text(&self, text: String) -> CliResult<()> {
        match &self.path {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| Failure::Domain(Error::io_at(path, e)))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn write_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        self.write_text(text)
    }
}

fn json_only(format: Format, command: &str) -> CliResult<()> {
    if format == Format::Csv {
        return Err(Failure::Usage(format!(
            "`{command}` has no tabular form; use --format json"
        )));
    }
    Ok(())
}

fn read_complex(arg: Option<&str>) -> CliResult<Complex2> {
    let arg = arg.unwrap_or("-");
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::io_at(Path::new("<stdin>"), e))?;
        Ok(lm2::io::parse_complex_str(&text, "<stdin>")?)
    } else {
        Ok(lm2::io::parse_complex_file(Path::new(arg))?)
    }
}

/// Explicit seed, or a fresh one echoed to stderr for reproducibility.
fn resolve_seed(explicit: Option<u64>) -> u64 {
    match explicit {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s} (drawn; pass --seed {s} to reproduce)");
            s
        }
    }
}

/// Serde token of a unit enum variant, e.g. RankField::Gf2 -> "gf2".
fn json_token<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn gen_cmd(what: GenCmd, out: &Output) -> CliResult<()> {
    let (complex, stamp) = match what {
        GenCmd::Sphere { vertices, seed } => {
            let seed = resolve_seed(seed);
            (
                random_sphere_triangulation(vertices, seed)?,
                Some(format!("# lm2 {TOOL_VERSION} sphere vertices={vertices} seed={seed}\n")),
            )
        }
        GenCmd::Torus { rows, cols } => (grid_torus_triangulation(rows, cols)?, None),
        GenCmd::Catalog { name } => (catalog(&name)?, None),
        GenCmd::Lm { n, p, seed } => {
            let seed = resolve_seed(seed);
            (
                sample_lm(n, p, seed)?.complex,
                Some(format!("# lm2 {TOOL_VERSION} lm n={n} p={p} seed={seed}\n")),
            )
        }
    };
    let mut text = stamp.unwrap_or_default();
    text.push_str(&lm2::io::write_complex_string(&complex));
    out.write_text(text)
}

fn surface_label(info: &SurfaceInfo) -> String {
    match info.surface_name {
        SurfaceName::Other { chi, orientable } => {
            format!("other(chi={chi} orientable={orientable})")
        }
        ref name => json_token(name),
    }
}

fn inv_cmd(c: &Complex2, format: Format, out: &Output) -> CliResult<()> {
    #[derive(Serialize)]
    struct InvReport {
        tool_version: &'static str,
        v: usize,
        e: usize,
        f: usize,
        chi: i64,
        /// v/f; absent when the complex has no faces.
        #[serde(with = "optional_rational_as_string")]
        mu: Option<Rational>,
        l: i64,
        surface: SurfaceInfo,
        degrees: DegreeReport,
    }
    let chi = c.v() as i64 - c.e() as i64 + c.f() as i64;
    let mu_value = if c.f() > 0 { Some(mu(c)?) } else { None };
    let info = c.classify_surface();
    match format {
        Format::Json => out.write_json(&InvReport {
            tool_version: TOOL_VERSION,
            v: c.v(),
            e: c.e(),
            f: c.f(),
            chi,
            mu: mu_value,
            l: l_invariant(c),
            surface: info,
            degrees: degree_report(c),
        }),
        Format::Csv => {
            let mu_text = mu_value
                .map(|r| format!("{}/{}", r.numer(), r.denom()))
                .unwrap_or_default();
            out.write_text(format!(
                "v,e,f,chi,mu,l,surface\n{},{},{},{},{},{},{}\n",
                c.v(),
                c.e(),
                c.f(),
                chi,
                mu_text,
                l_invariant(c),
                surface_label(&info)
            ))
        }
    }
}

fn contains_cmd(
    pattern: &Complex2,
    host: &Complex2,
    count: bool,
    all: bool,
    mode: ExecMode,
    out: &Output,
) -> CliResult<()> {
    #[derive(Serialize)]
    struct ContainsReport {
        tool_version: &'static str,
        pattern_vertices: usize,
        pattern_faces: usize,
        host_vertices: usize,
        host_faces: usize,
        found: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        count: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        embedding: Option<BTreeMap<Vertex, Vertex>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        embeddings: Option<Vec<BTreeMap<Vertex, Vertex>>>,
    }
    let mut report = ContainsReport {
        tool_version: TOOL_VERSION,
        pattern_vertices: pattern.v(),
        pattern_faces: pattern.f(),
        host_vertices: host.v(),
        host_faces: host.f(),
        found: false,
        count: None,
        embedding: None,
        embeddings: None,
    };
    if all {
        let found = all_embeddings_with_mode(pattern, host, mode)?;
        report.found = !found.is_empty();
        report.count = Some(found.len() as u64);
        report.embeddings = Some(found.into_iter().map(|e| e.vertex_map).collect());
    } else if count {
        let n = count_embeddings_with_mode(pattern, host, mode)?;
        report.found = n > 0;
        report.count = Some(n);
    } else {
        let hit = find_embedding_with_mode(pattern, host, mode)?;
        report.found = hit.is_some();
        report.embedding = hit.map(|e| e.vertex_map);
    }
    out.write_json(&report)
}

fn list_cmd(action: ListCmd, mode: ExecMode, out: &Output) -> CliResult<()> {
    match action {
        ListCmd::Build {
            degree_bound,
            face_cap,
            spheres,
            max_vertices,
            max_merges,
            seed,
            dir,
        } => {
            let seed = resolve_seed(seed);
            let params = ListParams {
                degree_bound,
                face_cap,
                sphere_budget: SphereBudget {
                    count: spheres,
                    max_vertices,
                    seed,
                },
                max_merges,
            };
            let list = build_forbidden_list_with_mode(params, mode)?;
            save_list(&list, &dir)?;
            #[derive(Serialize)]
            struct BuildReport {
                tool_version: &'static str,
                dir: String,
                params: ListParams,
                members_l1: usize,
                members_lprime: usize,
                members_l2: usize,
                incomplete: bool,
            }
            out.write_json(&BuildReport {
                tool_version: TOOL_VERSION,
                dir: dir.display().to_string(),
                params: list.params,
                members_l1: list.members_l1.len(),
                members_lprime: list.members_lprime.len(),
                members_l2: list.members_l2.len(),
                incomplete: list.incomplete,
            })
        }
        ListCmd::Verify { dir } => {
            let list: ForbiddenList = load_list(&dir)?;
            #[derive(Serialize)]
            struct MemberRow {
                index: usize,
                canonical_label: String,
                #[serde(flatten)]
                report: MemberReport,
            }
            #[derive(Serialize)]
            struct VerifyReport {
                tool_version: &'static str,
                dir: String,
                face_cap: usize,
                incomplete: bool,
                all_pass: bool,
                members: Vec<MemberRow>,
            }
            let mut members = Vec::new();
            for (index, entry) in list.members_l2.iter().enumerate() {
                let report = verify_list_member(&entry.complex, list.params.face_cap)?;
                members.push(MemberRow {
                    index,
                    canonical_label: entry.canonical_label.clone(),
                    report,
                });
            }
            out.write_json(&VerifyReport {
                tool_version: TOOL_VERSION,
                dir: dir.display().to_string(),
                face_cap: list.params.face_cap,
                incomplete: list.incomplete,
                all_pass: members.iter().all(|m| m.report.inequality_holds),
                members,
            })
        }
    }
}

fn experiment_cmd(which: ExpCmd, format: Format, mode: ExecMode, out: &Output) -> CliResult<()> {
    match which {
        ExpCmd::Threshold {
            pattern,
            n,
            alpha,
            c,
            trials,
            seed,
        } => {
            let pat = read_complex(Some(&pattern))?;
            let seed = resolve_seed(seed);
            let report =
                threshold_experiment_with_mode(&pat, &n, &alpha, c, trials, seed, mode)?;
            eprintln!("wall time: {:.3}s", report.wall_time_seconds);
            match format {
                Format::Json => out.write_json(&report),
                Format::Csv => {
                    let mut text =
                        String::from("n,alpha,p,trials,successes,empirical_probability\n");
                    for cell in &report.cells {
                        text.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            cell.n,
                            cell.alpha,
                            cell.p,
                            cell.trials,
                            cell.successes,
                            cell.empirical_probability
                        ));
                    }
                    out.write_text(text)
                }
            }
        }
        ExpCmd::Betti {
            n,
            c,
            epsilon,
            trials,
            seed,
        } => {
            let seed = resolve_seed(seed);
            let report = betti_experiment_with_mode(n, c, epsilon, trials, seed, mode)?;
            eprintln!("wall time: {:.3}s", report.wall_time_seconds);
            match format {
                Format::Json => out.write_json(&report),
                Format::Csv => {
                    let mut text = String::from(
                        "trial,seed,f2,tetrahedra,pairwise_face_disjoint,b2_y,b2_z,field,ftwo_ok,wedge_ok\n",
                    );
                    for t in &report.cells {
                        text.push_str(&format!(
                            "{},{},{},{},{},{},{},{},{},{}\n",
                            t.trial,
                            t.seed,
                            t.f2,
                            t.tetrahedra,
                            t.pairwise_face_disjoint,
                            t.b2_y,
                            t.b2_z.map(|b| b.to_string()).unwrap_or_default(),
                            json_token(&t.field),
                            t.ftwo_ok,
                            t.wedge_ok.map(|w| w.to_string()).unwrap_or_default()
                        ));
                    }
                    out.write_text(text)
                }
            }
        }
        ExpCmd::Collapse {
            n,
            c,
            delta,
            trials,
            seed,
        } => {
            let seed = resolve_seed(seed);
            let rule = CollapsePRule { c, delta };
            let report = collapse_experiment_with_mode(n, rule, trials, seed, mode)?;
            eprintln!("wall time: {:.3}s", report.wall_time_seconds);
            match format {
                Format::Json => out.write_json(&report),
                Format::Csv => {
                    let mut text =
                        String::from("trial,seed,f2,outcome,core_faces,residual_edges\n");
                    for t in &report.cells {
                        text.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            t.trial,
                            t.seed,
                            t.f2,
                            json_token(&t.outcome),
                            t.core_faces,
                            t.residual_edges
                        ));
                    }
                    out.write_text(text)
                }
            }
        }
    }
}
