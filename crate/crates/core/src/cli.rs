//! Command-line front end: mesh management plus the three solve commands.
//!
//! Exit codes are 0 on success, 1 for malformed input and 2 when the
//! numerics fail.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::basis::DomainSpec;
use crate::error::{Error, Result};
use crate::numeric::{format_real_scalar, format_scalar, parse_scalar, BigComplex, BigReal, PrecisionContext};
use crate::orthopoly::{
    available_mesh, build_mesh_with, cache_root_from_env, CacheOrigin, MeshKey, MeshListing, MeshQuery, PolyFamily,
};
use crate::potential::parse_potential;
use crate::spectrum::{solve_eigenfunctions, solve_eigensystem, solve_eigenvalues, Method, SolveOptions, SpectrumResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lagmesh", version, about = "Lagrange-mesh eigenvalue solver for the 1D Schrödinger equation")]
pub struct Cli {
    /// More log output (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute mesh points (and optionally weights) and store them in the cache.
    BuildMesh(BuildMeshArgs),
    /// List cached meshes, or report whether one exists.
    ListMeshes(ListMeshesArgs),
    /// Lowest energies.
    Eigenvalues(SolveArgs),
    /// Lowest eigenfunctions.
    Eigenfunctions(SolveArgs),
    /// Energies and eigenfunctions from one diagonalization.
    Eigensystem(SolveArgs),
}

#[derive(Debug, Args)]
pub struct BuildMeshArgs {
    /// legendre, laguerre or hermite.
    #[arg(long)]
    pub family: PolyFamily,
    #[arg(long)]
    pub dim: usize,
    /// Decimal digits.
    #[arg(long)]
    pub precision: u32,
    /// Also compute and store the quadrature weights.
    #[arg(long)]
    pub weights: bool,
    /// Cache directory (default: $LAGMESH_CACHE or ./meshes).
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ListMeshesArgs {
    #[arg(long)]
    pub family: Option<PolyFamily>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub precision: Option<u32>,
    /// Print the nodes of a fully specified mesh.
    #[arg(long)]
    pub print_mesh: bool,
    /// Print the smallest and greatest node.
    #[arg(long)]
    pub print_domain: bool,
    /// Cache directory (default: $LAGMESH_CACHE or ./meshes).
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Potential V(x), e.g. "x^2/2+x^4/4".
    #[arg(long, allow_hyphen_values = true)]
    pub potential: String,
    /// Domain "a,b"; endpoints may be inf or -inf.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: String,
    /// Number of lowest states to report.
    #[arg(long)]
    pub levels: usize,
    /// Mesh size N.
    #[arg(long)]
    pub dim: usize,
    /// Working precision in decimal digits.
    #[arg(long)]
    pub precision: u32,
    /// Mesh scaling h > 0 (infinite and semi-infinite domains only).
    #[arg(long, allow_hyphen_values = true)]
    pub scaling: Option<String>,
    /// Particle mass, possibly complex (default 1).
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<String>,
    /// Constant added to V before diagonalization and removed afterwards.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    /// dense, or partial for a few levels of a large mesh.
    #[arg(long, default_value = "dense")]
    pub method: Method,
    /// Observable whose expectation value is reported per state.
    #[arg(long, allow_hyphen_values = true)]
    pub expectation: Option<String>,
    /// Report expansion coefficients.
    #[arg(long)]
    pub coefficients: bool,
    /// Report the wavefunction at the mesh points.
    #[arg(long)]
    pub discrete: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Printed significant digits (default 0.8 x precision).
    #[arg(long)]
    pub digits: Option<usize>,
    /// Directory for csv files.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Cache directory (default: $LAGMESH_CACHE or ./meshes).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Compute meshes in memory without touching the cache.
    #[arg(long)]
    pub no_cache: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Values,
    Functions,
    System,
}

/// An error plus, for parse failures, the text the offset refers to.
struct Failure {
    error: Error,
    source: Option<String>,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error, source: None }
    }
}

fn in_text<T>(r: Result<T>, text: &str) -> std::result::Result<T, Failure> {
    r.map_err(|error| Failure {
        error,
        source: Some(text.to_string()),
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USER } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    execute(&cli.command, out, err)
}

/// Runs an already parsed command.
pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::BuildMesh(a) => run_build_mesh(a, out),
        Command::ListMeshes(a) => run_list_meshes(a, out),
        Command::Eigenvalues(a) => run_solve(Kind::Values, a, out, err),
        Command::Eigenfunctions(a) => run_solve(Kind::Functions, a, out, err),
        Command::Eigensystem(a) => run_solve(Kind::System, a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.error);
            if let (Some(text), Some(offset)) = (&f.source, error_offset(&f.error)) {
                let _ = writeln!(err, "  {text}");
                let _ = writeln!(err, "  {}^", " ".repeat(offset));
            }
            if f.error.is_user_error() {
                EXIT_USER
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn error_offset(e: &Error) -> Option<usize> {
    match e {
        Error::Parse { offset, .. } | Error::UnknownFunction { offset, .. } => Some(*offset),
        _ => None,
    }
}

fn cache_root(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(cache_root_from_env)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

fn run_build_mesh(a: &BuildMeshArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let key = MeshKey::new(a.family, a.dim, a.precision)?;
    let root = cache_root(&a.cache);
    let build = build_mesh_with(key, &root, a.weights)?;
    let mut text = String::new();
    for w in &build.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    let points_state = if build.origin == CacheOrigin::Built { "created" } else { "cache hit" };
    text.push_str(&format!("{points_state}: {}\n", build.points_file.display()));
    if let Some(wf) = &build.weights_file {
        let state = if build.origin == CacheOrigin::Hit { "cache hit" } else { "created" };
        text.push_str(&format!("{state}: {}\n", wf.display()));
    }
    write_out(out, &text)?;
    Ok(())
}

fn run_list_meshes(a: &ListMeshesArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let root = cache_root(&a.cache);
    let query = MeshQuery {
        family: a.family,
        dimension: a.dim,
        precision: a.precision,
        print_mesh: a.print_mesh,
        print_domain: a.print_domain,
    };
    let mut text = String::new();
    match available_mesh(&query, &root)? {
        MeshListing::Exists {
            key,
            exists,
            points,
            domain,
        } => {
            text.push_str(if exists { "true\n" } else { "false\n" });
            let digits = key.precision as usize;
            if let Some((lo, hi)) = domain {
                text.push_str(&format!("min {}\n", format_real_scalar(&lo, digits)?));
                text.push_str(&format!("max {}\n", format_real_scalar(&hi, digits)?));
            }
            for x in points.iter().flatten() {
                text.push_str(&format_real_scalar(x, digits)?);
                text.push('\n');
            }
        }
        MeshListing::Table(rows) => {
            text.push_str(&format!("{:<10} {:>9} {:>9} {:>7}", "family", "dimension", "precision", "weights"));
            if a.print_domain {
                text.push_str(&format!(" {:>24} {:>24}", "min", "max"));
            }
            text.push('\n');
            for row in rows {
                let k = row.key;
                text.push_str(&format!(
                    "{:<10} {:>9} {:>9} {:>7}",
                    k.family.name(),
                    k.dimension,
                    k.precision,
                    if row.has_weights { "yes" } else { "no" }
                ));
                if a.print_domain {
                    let keyed = MeshQuery {
                        family: Some(k.family),
                        dimension: Some(k.dimension),
                        precision: Some(k.precision),
                        print_mesh: false,
                        print_domain: true,
                    };
                    if let MeshListing::Exists {
                        domain: Some((lo, hi)), ..
                    } = available_mesh(&keyed, &root)?
                    {
                        text.push_str(&format!(
                            " {:>24} {:>24}",
                            format_real_scalar(&lo, 16)?,
                            format_real_scalar(&hi, 16)?
                        ));
                    }
                }
                text.push('\n');
            }
        }
    }
    write_out(out, &text)?;
    Ok(())
}

fn parse_real_flag(text: &str, ctx: &PrecisionContext, what: &str) -> std::result::Result<BigReal, Failure> {
    let z = in_text(parse_scalar(text, ctx), text)?;
    if !z.imag().is_zero() {
        return Err(Error::InvalidOption(format!("{what} must be real, got `{text}`")).into());
    }
    Ok(z.real().clone())
}

fn build_options(kind: Kind, a: &SolveArgs) -> std::result::Result<SolveOptions, Failure> {
    let mut opts = SolveOptions::new(a.levels, a.dim, a.precision);
    let ctx = opts.validate()?;
    if let Some(s) = &a.scaling {
        let h = parse_real_flag(s, &ctx, "scaling")?;
        opts.scaling = h;
    }
    if let Some(s) = &a.mass {
        opts.mass = in_text(parse_scalar(s, &ctx), s)?;
    }
    if let Some(s) = &a.shift {
        opts.potential_shift = parse_real_flag(s, &ctx, "shift")?;
    }
    opts.method = a.method;
    if let Some(e) = &a.expectation {
        opts.expectation = Some(in_text(parse_potential(e), e)?);
    }
    if a.output == OutputFormat::Csv && kind == Kind::Values {
        return Err(Error::InvalidOption("csv output needs eigenfunctions or eigensystem".into()).into());
    }
    opts.want_coefficients = a.coefficients;
    opts.want_discrete = a.discrete || a.output == OutputFormat::Csv;
    opts.cache_dir = if a.no_cache { None } else { Some(cache_root(&a.cache)) };
    opts.validate()?;
    Ok(opts)
}

fn run_solve(kind: Kind, a: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<(), Failure> {
    let opts = build_options(kind, a)?;
    let ctx = opts.validate()?;
    let digits = a.digits.unwrap_or((ctx.digits() as usize * 4 / 5).max(1));
    let potential = in_text(parse_potential(&a.potential), &a.potential)?;
    let domain = in_text(DomainSpec::parse(&a.domain, &ctx), &a.domain)?;
    let result = match kind {
        Kind::Values => solve_eigenvalues(&potential, &domain, &opts)?,
        Kind::Functions => solve_eigenfunctions(&potential, &domain, &opts)?,
        Kind::System => solve_eigensystem(&potential, &domain, &opts)?,
    };
    for w in &result.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let show_energies = kind != Kind::Functions;
    match a.output {
        OutputFormat::Text => write_out(out, &render_text(&result, digits, show_energies, a.expectation.as_deref())?)?,
        OutputFormat::Json => {
            let v = render_json(&result, digits, show_energies)?;
            let text = serde_json::to_string_pretty(&v).expect("json values always serialize");
            write_out(out, &(text + "\n"))?;
        }
        OutputFormat::Csv => {
            let files = write_csv(&result, digits, &a.output_dir)?;
            let listing: String = files.iter().map(|p| format!("{}\n", p.display())).collect();
            write_out(out, &listing)?;
        }
    }
    Ok(())
}

/// Shortest rendering of a parameter such as `h` or `m`: trailing zeros of
/// the mantissa are dropped.
fn compact(x: &BigComplex) -> Result<String> {
    let s = format_scalar(x, 30)?;
    let trim = |part: &str| -> String {
        let (mant, exp) = match part.find('e') {
            Some(i) => part.split_at(i),
            None => (part, ""),
        };
        if mant.contains('.') {
            let m = mant.trim_end_matches('0').trim_end_matches('.');
            format!("{m}{exp}")
        } else {
            part.to_string()
        }
    };
    // Real values only need the mantissa trimmed; complex ones are rebuilt.
    if x.imag().is_zero() {
        return Ok(trim(&s));
    }
    let re = trim(&format_real_scalar(x.real(), 30)?);
    let im = trim(&format_real_scalar(x.imag(), 30)?);
    Ok(match im.strip_prefix('-') {
        Some(abs) => format!("{re}-{abs}i"),
        None => format!("{re}+{im}i"),
    })
}

fn render_text(r: &SpectrumResult, digits: usize, show_energies: bool, observable: Option<&str>) -> Result<String> {
    let m = &r.metadata;
    let mut s = format!(
        "# family {} N={} P={} method {} h={} m={} shift={} residual {}\n",
        m.family,
        m.dimension,
        m.precision,
        m.method,
        compact(&BigComplex::with_val(m.scaling.prec(), (&m.scaling, 0)))?,
        compact(&m.mass)?,
        compact(&BigComplex::with_val(m.shift.prec(), (&m.shift, 0)))?,
        format_real_scalar(&m.residual_bound, 3)?,
    );
    if show_energies {
        for (n, e) in r.energies.iter().enumerate() {
            s.push_str(&format!("E_{n} = {}\n", format_scalar(e, digits)?));
        }
    }
    if let Some(ex) = &r.expectations {
        let label = observable.unwrap_or("O");
        for (n, v) in ex.iter().enumerate() {
            s.push_str(&format!("<{label}>_{n} = {}\n", format_scalar(v, digits)?));
        }
    }
    if let Some(cs) = &r.coefficients {
        for (n, c) in cs.iter().enumerate() {
            s.push_str(&format!("# coefficients of state {n}\n"));
            for ck in c {
                s.push_str(&format_scalar(ck, digits)?);
                s.push('\n');
            }
        }
    }
    if let Some(ps) = &r.discrete_psi {
        for (n, p) in ps.iter().enumerate() {
            s.push_str(&format!("# psi of state {n} at the mesh points (x, psi)\n"));
            for (x, psi) in p {
                s.push_str(&format!("{} {}\n", format_real_scalar(x, digits)?, format_scalar(psi, digits)?));
            }
        }
    }
    Ok(s)
}

fn complex_json(z: &BigComplex, digits: usize) -> Result<Value> {
    Ok(json!({
        "re": format_real_scalar(z.real(), digits)?,
        "im": format_real_scalar(z.imag(), digits)?,
    }))
}

fn render_json(r: &SpectrumResult, digits: usize, show_energies: bool) -> Result<Value> {
    let m = &r.metadata;
    let mut v = json!({
        "family": m.family.name(),
        "dimension": m.dimension,
        "precision": m.precision,
        "scaling": compact(&BigComplex::with_val(m.scaling.prec(), (&m.scaling, 0)))?,
        "mass": compact(&m.mass)?,
        "shift": compact(&BigComplex::with_val(m.shift.prec(), (&m.shift, 0)))?,
        "method": m.method.to_string(),
        "residual_bound": format_real_scalar(&m.residual_bound, 6)?,
    });
    let obj = v.as_object_mut().expect("object literal");
    if show_energies {
        let energies = r.energies.iter().map(|e| complex_json(e, digits)).collect::<Result<Vec<_>>>()?;
        obj.insert("energies".into(), Value::Array(energies));
    }
    if let Some(cs) = &r.coefficients {
        let rows = cs
            .iter()
            .map(|c| c.iter().map(|z| complex_json(z, digits)).collect::<Result<Vec<_>>>().map(Value::Array))
            .collect::<Result<Vec<_>>>()?;
        obj.insert("coefficients".into(), Value::Array(rows));
    }
    if let Some(ps) = &r.discrete_psi {
        let states = ps
            .iter()
            .map(|p| {
                p.iter()
                    .map(|(x, psi)| {
                        Ok(json!([
                            format_real_scalar(x, digits)?,
                            format_real_scalar(psi.real(), digits)?,
                            format_real_scalar(psi.imag(), digits)?,
                        ]))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Value::Array)
            })
            .collect::<Result<Vec<_>>>()?;
        obj.insert("discrete".into(), Value::Array(states));
    }
    if let Some(ex) = &r.expectations {
        let vals = ex.iter().map(|z| complex_json(z, digits)).collect::<Result<Vec<_>>>()?;
        obj.insert("expectations".into(), Value::Array(vals));
    }
    Ok(v)
}

fn write_csv(r: &SpectrumResult, digits: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    let states = r
        .discrete_psi
        .as_ref()
        .ok_or_else(|| Error::InvalidOption("csv output needs the discrete wavefunction".into()))?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::with_capacity(states.len());
    for (n, p) in states.iter().enumerate() {
        let mut body = String::from("x,psi_re,psi_im\n");
        for (x, psi) in p {
            body.push_str(&format!(
                "{},{},{}\n",
                format_real_scalar(x, digits)?,
                format_real_scalar(psi.real(), digits)?,
                format_real_scalar(psi.imag(), digits)?
            ));
        }
        let path = dir.join(format!("state_{n}.csv"));
        fs::write(&path, body).map_err(io_err(&path))?;
        files.push(path);
    }
    Ok(files)
}
