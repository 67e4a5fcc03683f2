//! Command-line front end: config parsing, experiment orchestration, and
//! CSV/JSON report emission.
//!
//! Config files are flat `key = value` text with `[section]` headers; see the
//! README for the grammar and the JSON report schemas. Every report carries
//! `"schema": "horoforge/1"` and the witness/landmark counts behind each
//! number, and fixed seed + config gives byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::bifunctional::Bifunctional;
use crate::dynamics::{
    invariance_defect, translation_length_functional, translation_length_metric, GroupElement,
};
use crate::engine::{distance, SearchConfig};
use crate::error::{Error, Result};
use crate::geometries::euclidean::{self, euclidean_inner};
use crate::geometries::funk::{funk_polytope, ConvexPolytope};
use crate::geometries::minsky::{self, MinskyHalfPlane};
use crate::geometries::torus::{sl2z_action, torus_e2, SlopeCurrent, TorusExtremal, TorusThurston};
use crate::horospace::{boundary_limit, horofunction, BoundaryOutcome, LandmarkSet};
use crate::point::Point;
use crate::verify::{run_all, VerifySettings};

pub const SCHEMA: &str = "horoforge/1";

#[derive(Parser)]
#[command(
    name = "horoforge",
    version,
    about = "Distances, horofunctions and translation lengths from bifunctionals"
)]
struct Cli {
    /// Config file (key = value lines with [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed; overrides the config value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-sided distance estimate d(x, y) with oracle gap when available.
    Distance { x: String, y: String },
    /// Pairwise distance matrix for the points listed in a file.
    Matrix {
        points_file: PathBuf,
        /// Emit the symmetrized matrix alongside the asymmetric one.
        #[arg(long)]
        symmetrized: bool,
    },
    /// Horofunction trajectory along a sequence in N (see README for specs).
    Boundary { spec: String },
    /// Translation-length estimates for a group element.
    Translation {
        element: String,
        x: String,
        /// Witness for the functional estimate; geometry default if omitted.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// Invariance defect of a group element over random samples.
    Invariance {
        element: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Run the acceptance criteria; exit code 1 if any fails.
    Verify,
}

/// Entry point used by the binary; returns the process exit code
/// (0 ok, 1 criterion failure, 2 usage/parse error).
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints its own message; use its exit code semantics but
            // collapse everything abnormal onto 2 except --help/--version.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { 0 } else { 2 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.search.seed = seed;
        cfg.verify.seed = seed;
    }
    if let Some(fmt) = &cli.format {
        cfg.format = fmt.clone();
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    match cli.command {
        Command::Distance { x, y } => cmd_distance(&cfg, &x, &y),
        Command::Matrix {
            points_file,
            symmetrized,
        } => cmd_matrix(&cfg, &points_file, symmetrized),
        Command::Boundary { spec } => cmd_boundary(&cfg, &spec),
        Command::Translation { element, x, y, n_max } => {
            cmd_translation(&cfg, &element, &x, y.as_deref(), n_max)
        }
        Command::Invariance { element, samples } => cmd_invariance(&cfg, &element, samples),
        Command::Verify => cmd_verify(&cfg),
    }
}

// ------------------------------------------------------------------- config

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: String,
    pub dim: usize,
    pub seed: u64,
    pub search: SearchConfig,
    pub tol: f64,
    pub boundary_k_max: usize,
    pub n_dirs: usize,
    pub funk_vertices: Option<PathBuf>,
    pub landmark_spec: Option<String>,
    pub basepoint_spec: Option<String>,
    pub out: Option<PathBuf>,
    pub format: String,
    pub verify: VerifySettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: "minsky".into(),
            dim: 2,
            seed: 7,
            search: SearchConfig::default().with_seed(7),
            tol: 1e-7,
            boundary_k_max: 48,
            n_dirs: 64,
            funk_vertices: None,
            landmark_spec: None,
            basepoint_spec: None,
            out: None,
            format: "json".into(),
            verify: VerifySettings::default(),
        }
    }
}

/// Parses the flat `key = value` grammar; keys gain a `section.` prefix
/// after a `[section]` header.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: "malformed section header".into(),
                });
            }
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Parse {
                line: lineno + 1,
                column: line.len(),
                message: "expected key = value".into(),
            });
        };
        let key = line[..eq].trim();
        let value = line[eq + 1..].trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: lineno + 1,
                column: 1,
                message: "empty key".into(),
            });
        }
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        map.insert(full, value.to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_map(parse_config_text(&text)?)
    }

    pub fn from_map(map: BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let get_f64 = |v: &str, key: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: expected a number, got '{v}'")))
        };
        let get_usize = |v: &str, key: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::Config(format!("{key}: expected an integer, got '{v}'")))
        };
        for (key, value) in &map {
            match key.as_str() {
                "run.geometry" | "geometry" => cfg.geometry = value.clone(),
                "run.format" | "format" => cfg.format = value.clone(),
                "run.out" | "out" => cfg.out = Some(PathBuf::from(value)),
                "run.seed" | "seed" | "engine.seed" => {
                    let s = get_usize(value, key)? as u64;
                    cfg.seed = s;
                    cfg.search.seed = s;
                    cfg.verify.seed = s;
                }
                "run.tol" | "tol" | "boundary.tol" => cfg.tol = get_f64(value, key)?,
                "boundary.k_max" => cfg.boundary_k_max = get_usize(value, key)?,
                "engine.grid" => cfg.search.initial_grid_size = get_usize(value, key)?,
                "engine.steps" => cfg.search.local_search_steps = get_usize(value, key)?,
                "engine.shrink" => cfg.search.step_shrink = get_f64(value, key)?,
                "engine.restarts" => cfg.search.restarts = get_usize(value, key)?,
                "euclidean.dim" => cfg.dim = get_usize(value, key)?,
                "torus.n_dirs" => cfg.n_dirs = get_usize(value, key)?,
                "funk.vertices" => cfg.funk_vertices = Some(PathBuf::from(value)),
                "landmarks.points" => cfg.landmark_spec = Some(value.clone()),
                "landmarks.basepoint" => cfg.basepoint_spec = Some(value.clone()),
                "verify.euclidean_tol" => cfg.verify.euclidean_tol = get_f64(value, key)?,
                "verify.corrupt_convention" => {
                    cfg.verify.corrupt_convention = value == "true" || value == "1"
                }
                other => {
                    return Err(Error::Config(format!("unknown config key '{other}'")));
                }
            }
        }
        cfg.search.validate()?;
        let tol_ok = cfg.tol > 0.0 && cfg.verify.euclidean_tol > 0.0;
        if !tol_ok {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if cfg.format != "csv" && cfg.format != "json" {
            return Err(Error::Config(format!(
                "format must be csv or json, got '{}'",
                cfg.format
            )));
        }
        Ok(cfg)
    }

    fn bifunctional(&self) -> Result<Box<dyn Bifunctional>> {
        match self.geometry.as_str() {
            "euclidean" => Ok(Box::new(euclidean_inner(self.dim)?)),
            "minsky" => Ok(Box::new(MinskyHalfPlane)),
            "funk" => {
                let path = self.funk_vertices.as_ref().ok_or_else(|| {
                    Error::Config("funk geometry needs [funk] vertices = <file>".into())
                })?;
                let text = std::fs::read_to_string(path)?;
                Ok(Box::new(funk_polytope(ConvexPolytope::from_text(&text)?)))
            }
            "torus-e1" => Ok(Box::new(TorusExtremal)),
            "torus-e2" => Ok(Box::new(torus_e2(self.n_dirs)?)),
            "torus-thurston" => Ok(Box::new(TorusThurston)),
            other if other.starts_with("custom:") => Err(Error::Config(format!(
                "custom bifunctionals ('{other}') are an in-process API; see CustomBifunctional in the library"
            ))),
            other => Err(Error::UnknownGeometry(other.into())),
        }
    }
}

// ------------------------------------------------------------- point parsing

/// "a+bi" with optional whitespace; also accepts "i", "bi", "a".
pub fn parse_complex(s: &str) -> Result<(f64, f64)> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let err = |col: usize, msg: &str| Error::Parse {
        line: 1,
        column: col,
        message: msg.into(),
    };
    if compact.is_empty() {
        return Err(err(1, "empty complex literal"));
    }
    if !compact.ends_with('i') {
        let re: f64 = compact
            .parse()
            .map_err(|_| err(1, "expected a decimal or a+bi"))?;
        return Ok((re, 0.0));
    }
    let body = &compact[..compact.len() - 1];
    // Split at the sign that separates the real and imaginary parts, if any.
    let mut split = None;
    for (idx, ch) in body.char_indices().skip(1) {
        if (ch == '+' || ch == '-') && !matches!(&body[idx - 1..idx], "e" | "E") {
            split = Some(idx);
        }
    }
    let (re_str, im_str) = match split {
        Some(idx) => (&body[..idx], &body[idx..]),
        None => ("0", body),
    };
    let re: f64 = if re_str.is_empty() {
        0.0
    } else {
        re_str
            .parse()
            .map_err(|_| err(1, "bad real part in a+bi"))?
    };
    let im: f64 = match im_str {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other
            .parse()
            .map_err(|_| err(re_str.len() + 1, "bad imaginary part in a+bi"))?,
    };
    Ok((re, im))
}

fn parse_vector(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty vector".into(),
        });
    }
    parts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            t.parse().map_err(|_| Error::Parse {
                line: 1,
                column: k + 1,
                message: format!("expected a decimal, got '{t}'"),
            })
        })
        .collect()
}

fn parse_current(s: &str) -> Result<SlopeCurrent> {
    let mut atoms = Vec::new();
    for part in s.split(';') {
        let c = parse_vector(part)?;
        match c.as_slice() {
            [p, q] => atoms.push((*p, *q, 1.0)),
            [p, q, w] => atoms.push((*p, *q, *w)),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    column: 1,
                    message: "current atoms are p,q or p,q,w".into(),
                })
            }
        }
    }
    SlopeCurrent::new(atoms)
}

/// Parses a point of M in the geometry's encoding.
fn parse_m_point(cfg: &RunConfig, s: &str) -> Result<Point> {
    match cfg.geometry.as_str() {
        "euclidean" | "funk" => Ok(Point::Vector(parse_vector(s)?)),
        "minsky" | "torus-e1" | "torus-e2" | "torus-thurston" => {
            let (re, im) = parse_complex(s)?;
            Ok(Point::half_plane(re, im))
        }
        other => Err(Error::UnknownGeometry(other.into())),
    }
}

/// Parses a point of N in the geometry's encoding.
fn parse_n_point(cfg: &RunConfig, s: &str) -> Result<Point> {
    match cfg.geometry.as_str() {
        "euclidean" => Ok(Point::Vector(parse_vector(s)?)),
        "funk" => {
            let k: usize = s.trim().parse().map_err(|_| Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected a facet index, got '{s}'"),
            })?;
            Ok(Point::Facet(k))
        }
        "minsky" => {
            let t: f64 = s.trim().parse().map_err(|_| Error::Parse {
                line: 1,
                column: 1,
                message: format!("expected a parameter, got '{s}'"),
            })?;
            Ok(Point::Param(t))
        }
        "torus-e1" | "torus-thurston" => Ok(Point::Current(parse_current(s)?)),
        "torus-e2" => {
            let (re, im) = parse_complex(s)?;
            Ok(Point::half_plane(re, im))
        }
        other => Err(Error::UnknownGeometry(other.into())),
    }
}

fn default_landmarks(cfg: &RunConfig) -> Result<(Vec<Point>, Point)> {
    match cfg.geometry.as_str() {
        "euclidean" | "funk" => {
            let base = Point::Vector(vec![0.0; cfg.dim]);
            let mut pts = vec![base.clone()];
            for k in 0..cfg.dim {
                let mut v = vec![0.0; cfg.dim];
                v[k] = 1.0;
                pts.push(Point::Vector(v));
            }
            Ok((pts, base))
        }
        _ => {
            let base = Point::half_plane(0.0, 1.0);
            Ok((
                vec![
                    base.clone(),
                    Point::half_plane(0.0, 2.0),
                    Point::half_plane(1.0, 1.0),
                ],
                base,
            ))
        }
    }
}

fn landmarks_from_config(cfg: &RunConfig) -> Result<std::sync::Arc<LandmarkSet>> {
    let (mut points, mut base) = default_landmarks(cfg)?;
    if let Some(spec) = &cfg.landmark_spec {
        points = spec
            .split(';')
            .map(|s| parse_m_point(cfg, s.trim()))
            .collect::<Result<_>>()?;
        base = points
            .first()
            .cloned()
            .ok_or_else(|| Error::Config("landmarks.points is empty".into()))?;
    }
    if let Some(spec) = &cfg.basepoint_spec {
        base = parse_m_point(cfg, spec)?;
    }
    LandmarkSet::new(points, base)
}

// ------------------------------------------------------------ group elements

fn parse_int_matrix(s: &str) -> Result<[[i64; 2]; 2]> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "matrix spec is a,b;c,d".into(),
        });
    }
    let mut m = [[0i64; 2]; 2];
    for (r, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').map(|t| t.trim()).collect();
        if cols.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                column: r + 1,
                message: "matrix spec is a,b;c,d".into(),
            });
        }
        for (c, tok) in cols.iter().enumerate() {
            m[r][c] = tok.parse().map_err(|_| Error::Parse {
                line: 1,
                column: 2 * r + c + 1,
                message: format!("expected an integer, got '{tok}'"),
            })?;
        }
    }
    Ok(m)
}

fn parse_float_matrix(s: &str) -> Result<[[f64; 2]; 2]> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "matrix spec is a,b;c,d".into(),
        });
    }
    let mut m = [[0f64; 2]; 2];
    for (r, row) in rows.iter().enumerate() {
        let v = parse_vector(row)?;
        if v.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                column: r + 1,
                message: "matrix spec is a,b;c,d".into(),
            });
        }
        m[r] = [v[0], v[1]];
    }
    Ok(m)
}

fn parse_element(cfg: &RunConfig, s: &str) -> Result<GroupElement> {
    match cfg.geometry.as_str() {
        "torus-e1" | "torus-e2" | "torus-thurston" => sl2z_action(parse_int_matrix(s)?),
        "euclidean" => {
            if let Some(rest) = s.strip_prefix("translate:") {
                euclidean::translation(parse_vector(rest)?)
            } else if let Some(rest) = s.strip_prefix("rot:") {
                let v = parse_vector(rest)?;
                match v.as_slice() {
                    [i, j, theta] => euclidean::rotation(cfg.dim, *i as usize, *j as usize, *theta),
                    _ => Err(Error::Config("rot spec is rot:i,j,theta".into())),
                }
            } else {
                Err(Error::Config(
                    "euclidean elements: translate:v1,v2,... or rot:i,j,theta".into(),
                ))
            }
        }
        "minsky" => {
            if let Some(rest) = s.strip_prefix("translate:") {
                let beta: f64 = rest.trim().parse().map_err(|_| {
                    Error::Config(format!("expected translate:beta, got '{s}'"))
                })?;
                Ok(minsky::horizontal_translation(beta))
            } else if let Some(rest) = s.strip_prefix("mobius:") {
                minsky::boundary_mobius(parse_float_matrix(rest)?)
            } else {
                Err(Error::Config(
                    "minsky elements: translate:beta or mobius:a,b;c,d".into(),
                ))
            }
        }
        other => Err(Error::Config(format!(
            "no group elements defined for geometry '{other}'"
        ))),
    }
}

// ------------------------------------------------------------------ commands

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n"))?;
            Ok(())
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_distance(cfg: &RunConfig, x: &str, y: &str) -> Result<i32> {
    let bif = cfg.bifunctional()?;
    let xp = parse_m_point(cfg, x)?;
    let yp = parse_m_point(cfg, y)?;
    let est = distance(bif.as_ref(), &xp, &yp, &cfg.search)?;
    let report = json!({
        "schema": SCHEMA,
        "command": "distance",
        "geometry": cfg.geometry,
        "seed": cfg.seed,
        "x": xp,
        "y": yp,
        "lower_bound": est.lower_bound,
        "oracle": est.oracle_value,
        "gap": est.oracle_gap(),
        "argmax_witness": est.argmax_witness,
        "refinement_iterations": est.refinement_iterations,
        "witness_count": est.witness_count,
        "converged": est.converged,
    });
    emit(cfg, &serde_json::to_string_pretty(&report).unwrap())?;
    Ok(0)
}

fn read_points_file(cfg: &RunConfig, path: &Path) -> Result<Vec<Point>> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        points.push(parse_m_point(cfg, line).map_err(|e| match e {
            Error::Parse { column, message, .. } => Error::Parse {
                line: lineno + 1,
                column,
                message,
            },
            other => other,
        })?);
    }
    if points.is_empty() {
        return Err(Error::Config(format!("no points in {}", path.display())));
    }
    Ok(points)
}

fn cmd_matrix(cfg: &RunConfig, points_file: &Path, symmetrized: bool) -> Result<i32> {
    let bif = cfg.bifunctional()?;
    let points = read_points_file(cfg, points_file)?;
    let n = points.len();
    let mut values = vec![vec![0.0f64; n]; n];
    let mut counts = vec![vec![0usize; n]; n];
    for (r, x) in points.iter().enumerate() {
        for (c, y) in points.iter().enumerate() {
            if r == c {
                counts[r][c] = 0;
                continue;
            }
            let est = distance(bif.as_ref(), x, y, &cfg.search)?;
            values[r][c] = est.lower_bound;
            counts[r][c] = est.witness_count;
        }
    }
    let sym: Option<Vec<Vec<f64>>> = symmetrized.then(|| {
        (0..n)
            .map(|r| (0..n).map(|c| values[r][c].max(values[c][r])).collect())
            .collect()
    });
    let mut max_asymmetry = 0.0f64;
    for r in 0..n {
        for c in (r + 1)..n {
            max_asymmetry = max_asymmetry.max((values[r][c] - values[c][r]).abs());
        }
    }
    if cfg.format == "json" {
        let report = json!({
            "schema": SCHEMA,
            "command": "matrix",
            "geometry": cfg.geometry,
            "seed": cfg.seed,
            "points": points,
            "lower_bounds": values,
            "witness_counts": counts,
            "max_asymmetry": max_asymmetry,
            "symmetrized": sym,
        });
        emit(cfg, &serde_json::to_string_pretty(&report).unwrap())?;
    } else {
        let mut out = String::new();
        let wmin = counts.iter().flatten().filter(|c| **c > 0).min().unwrap_or(&0);
        let wmax = counts.iter().flatten().max().unwrap_or(&0);
        let _ = writeln!(out, "# schema {SCHEMA} matrix geometry={} seed={} witnesses={}..{} max_asymmetry={}",
            cfg.geometry, cfg.seed, wmin, wmax, max_asymmetry);
        let header: Vec<String> = points.iter().map(|p| p.describe()).collect();
        let _ = writeln!(out, "from\\to,{}", header.join(","));
        for (r, row) in values.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{},{}", header[r], cells.join(","));
        }
        if let Some(sym) = sym {
            let _ = writeln!(out, "# symmetrized");
            for (r, row) in sym.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                let _ = writeln!(out, "{},{}", header[r], cells.join(","));
            }
        }
        emit(cfg, out.trim_end())?;
    }
    Ok(0)
}

/// Sequence specs: `const:<n-point>`, `pow:<base>` (minsky, t_k = base^k),
/// `ray:<vector>` (euclidean, z_k = (k+1) v), and
/// `orbit:<n-point>:<a,b;c,d>` (torus, the SL(2,Z) orbit of a witness).
fn sequence_from_spec(
    cfg: &RunConfig,
    spec: &str,
) -> Result<Box<dyn Fn(usize) -> Result<Point> + Send + Sync>> {
    if let Some(rest) = spec.strip_prefix("const:") {
        let p = parse_n_point(cfg, rest)?;
        return Ok(Box::new(move |_| Ok(p.clone())));
    }
    if let Some(rest) = spec.strip_prefix("pow:") {
        if cfg.geometry != "minsky" {
            return Err(Error::Config("pow: sequences are for the minsky geometry".into()));
        }
        let base: f64 = rest.trim().parse().map_err(|_| {
            Error::Config(format!("expected pow:<base>, got '{spec}'"))
        })?;
        return Ok(Box::new(move |k| Ok(Point::Param(base.powi(k as i32)))));
    }
    if let Some(rest) = spec.strip_prefix("ray:") {
        if cfg.geometry != "euclidean" {
            return Err(Error::Config("ray: sequences are for the euclidean geometry".into()));
        }
        let v = parse_vector(rest)?;
        return Ok(Box::new(move |k| {
            Ok(Point::Vector(v.iter().map(|x| x * (k + 1) as f64).collect()))
        }));
    }
    if let Some(rest) = spec.strip_prefix("orbit:") {
        let (point_spec, matrix_spec) = rest.split_once(':').ok_or_else(|| {
            Error::Config("orbit spec is orbit:<n-point>:<a,b;c,d>".into())
        })?;
        let start = parse_n_point(cfg, point_spec)?;
        let g = parse_element(cfg, matrix_spec)?;
        return Ok(Box::new(move |k| {
            let mut z = start.clone();
            for _ in 0..k {
                z = g.act_n(&z)?;
            }
            Ok(z)
        }));
    }
    Err(Error::Config(format!("unknown sequence spec '{spec}'")))
}

fn cmd_boundary(cfg: &RunConfig, spec: &str) -> Result<i32> {
    let bif = cfg.bifunctional()?;
    let landmarks = landmarks_from_config(cfg)?;
    let seq = sequence_from_spec(cfg, spec)?;

    let outcome = boundary_limit(bif.as_ref(), seq.as_ref(), &landmarks, cfg.tol, cfg.boundary_k_max)?;
    let last_k = match &outcome {
        BoundaryOutcome::Converged { steps, .. } => *steps,
        BoundaryOutcome::Diverged { steps, .. } => *steps,
    };

    // trajectory rows: one per iterate per landmark, up to the outcome step
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for k in 0..=last_k {
        match seq(k) {
            Ok(z) => {
                let h = horofunction(bif.as_ref(), &z, &landmarks)?;
                for (idx, v) in h.values().iter().enumerate() {
                    rows.push((k, idx, *v));
                }
            }
            Err(_) => break,
        }
    }

    if cfg.format == "json" {
        let (status, steps, limit, oscillation) = match &outcome {
            BoundaryOutcome::Converged { horofunction, steps } => (
                "converged",
                *steps,
                Some(horofunction.values().to_vec()),
                None,
            ),
            BoundaryOutcome::Diverged { oscillation, steps } => {
                ("diverged", *steps, None, Some(*oscillation))
            }
        };
        let report = json!({
            "schema": SCHEMA,
            "command": "boundary",
            "geometry": cfg.geometry,
            "seed": cfg.seed,
            "sequence": spec,
            "landmark_count": landmarks.len(),
            "landmarks": landmarks.points(),
            "rows": rows.iter().map(|(k, idx, v)| json!({"k": k, "landmark": idx, "value": v})).collect::<Vec<_>>(),
            "outcome": status,
            "steps": steps,
            "limit": limit,
            "oscillation": oscillation,
        });
        emit(cfg, &serde_json::to_string_pretty(&report).unwrap())?;
    } else {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# schema {SCHEMA} boundary geometry={} seed={} landmarks={} sequence={spec}",
            cfg.geometry,
            cfg.seed,
            landmarks.len()
        );
        let _ = writeln!(out, "k,landmark_id,landmark,value");
        for (k, idx, v) in &rows {
            let _ = writeln!(out, "{k},{idx},{},{v}", landmarks.points()[*idx].describe());
        }
        match &outcome {
            BoundaryOutcome::Converged { horofunction, .. } => {
                for (idx, v) in horofunction.values().iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "limit,{idx},{},{v}",
                        landmarks.points()[idx].describe()
                    );
                }
            }
            BoundaryOutcome::Diverged { oscillation, steps } => {
                let _ = writeln!(out, "diverged,,oscillation={oscillation} steps={steps},");
            }
        }
        emit(cfg, out.trim_end())?;
    }
    Ok(0)
}

fn cmd_translation(
    cfg: &RunConfig,
    element: &str,
    x: &str,
    y: Option<&str>,
    n_max: u32,
) -> Result<i32> {
    let bif = cfg.bifunctional()?;
    let g = parse_element(cfg, element)?;
    let xp = parse_m_point(cfg, x)?;
    let n_list: Vec<u32> = (1..=n_max.max(1)).collect();

    let search = cfg.search.clone();
    let dist = |a: &Point, b: &Point| Ok(distance(bif.as_ref(), a, b, &search)?.lower_bound);
    let metric = translation_length_metric(&dist, &g, &xp, &n_list)?;

    let witness = match y {
        Some(spec) => Some(parse_n_point(cfg, spec)?),
        None => default_functional_witness(cfg),
    };
    let functional = match &witness {
        Some(w) => Some(translation_length_functional(bif.as_ref(), &g, &xp, w, &n_list)?),
        None => None,
    };

    let report = json!({
        "schema": SCHEMA,
        "command": "translation",
        "geometry": cfg.geometry,
        "seed": cfg.seed,
        "element": g.label(),
        "x": xp,
        "metric": metric,
        "functional": functional,
    });
    emit(cfg, &serde_json::to_string_pretty(&report).unwrap())?;
    Ok(0)
}

fn default_functional_witness(cfg: &RunConfig) -> Option<Point> {
    match cfg.geometry.as_str() {
        "torus-e1" | "torus-thurston" => {
            Some(Point::Current(SlopeCurrent::single(1.0, 0.0, 1.0).ok()?))
        }
        "minsky" => Some(Point::Param(0.0)),
        "torus-e2" => Some(Point::half_plane(0.0, 1.0)),
        _ => None,
    }
}

fn cmd_invariance(cfg: &RunConfig, element: &str, samples: usize) -> Result<i32> {
    use rand::Rng;
    use rand::SeedableRng;
    let bif = cfg.bifunctional()?;
    let g = parse_element(cfg, element)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(samples.max(1));
    for _ in 0..samples.max(1) {
        let (m, n) = match cfg.geometry.as_str() {
            "euclidean" => (
                Point::Vector((0..cfg.dim).map(|_| rng.gen_range(-3.0..3.0)).collect()),
                Point::Vector((0..cfg.dim).map(|_| rng.gen_range(-2.0..2.0)).collect()),
            ),
            "minsky" => (
                Point::half_plane(rng.gen_range(-2.0..2.0), rng.gen_range(0.3..3.0)),
                Point::Param(rng.gen_range(-4.0..4.0)),
            ),
            "torus-e2" => (
                Point::half_plane(rng.gen_range(-2.0..2.0), rng.gen_range(0.4..3.0)),
                Point::half_plane(rng.gen_range(-2.0..2.0), rng.gen_range(0.4..3.0)),
            ),
            _ => (
                Point::half_plane(rng.gen_range(-2.0..2.0), rng.gen_range(0.4..3.0)),
                Point::Current(
                    SlopeCurrent::single(
                        rng.gen_range(-3i64..=3) as f64,
                        rng.gen_range(1i64..=3) as f64,
                        rng.gen_range(0.5..2.0),
                    )
                    .expect("valid slope"),
                ),
            ),
        };
        pairs.push((m, n));
    }
    let defect = invariance_defect(bif.as_ref(), &g, &pairs)?;
    let report = json!({
        "schema": SCHEMA,
        "command": "invariance",
        "geometry": cfg.geometry,
        "seed": cfg.seed,
        "element": g.label(),
        "samples": pairs.len(),
        "defect": defect,
    });
    emit(cfg, &serde_json::to_string_pretty(&report).unwrap())?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let outcomes = run_all(&cfg.verify);
    let mut lines = Vec::with_capacity(outcomes.len() + 1);
    let mut failures = 0usize;
    for o in &outcomes {
        lines.push(serde_json::to_string(o).unwrap());
        if !o.passed {
            failures += 1;
        }
        eprintln!(
            "[{}] criterion {:>2} {:<38} ({:.2}s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.elapsed
        );
    }
    lines.push(
        serde_json::to_string(&json!({
            "schema": SCHEMA,
            "command": "verify",
            "total": outcomes.len(),
            "failures": failures,
            "passed": failures == 0,
        }))
        .unwrap(),
    );
    emit(cfg, &lines.join("\n"))?;
    Ok(if failures == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals_parse() {
        assert_eq!(parse_complex("i").unwrap(), (0.0, 1.0));
        assert_eq!(parse_complex("2i").unwrap(), (0.0, 2.0));
        assert_eq!(parse_complex("1+i").unwrap(), (1.0, 1.0));
        assert_eq!(parse_complex("1 + 2i").unwrap(), (1.0, 2.0));
        assert_eq!(parse_complex("-1.5-2.25i").unwrap(), (-1.5, -2.25));
        assert_eq!(parse_complex("3").unwrap(), (3.0, 0.0));
        assert_eq!(parse_complex("1e-2+1e-3i").unwrap(), (0.01, 0.001));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("foo").is_err());
    }

    #[test]
    fn config_grammar_sections_prefix_keys() {
        let map =
            parse_config_text("# c\nseed = 9\n[engine]\ngrid = 32\n[run]\ngeometry = minsky\n")
                .unwrap();
        assert_eq!(map["seed"], "9");
        assert_eq!(map["engine.grid"], "32");
        assert_eq!(map["run.geometry"], "minsky");
        let err = parse_config_text("nonsense line\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let map = parse_config_text("[run]\ngeomtry = minsky\n").unwrap();
        assert!(RunConfig::from_map(map).is_err());
    }

    #[test]
    fn matrix_spec_parses() {
        assert_eq!(parse_int_matrix("2,1;1,1").unwrap(), [[2, 1], [1, 1]]);
        assert!(parse_int_matrix("2,1;1").is_err());
    }

    #[test]
    fn unknown_geometry_and_custom_plugins_rejected() {
        let mut cfg = RunConfig {
            geometry: "nope".into(),
            ..RunConfig::default()
        };
        assert!(matches!(cfg.bifunctional(), Err(Error::UnknownGeometry(_))));
        cfg.geometry = "custom:mine".into();
        assert!(matches!(cfg.bifunctional(), Err(Error::Config(_))));
    }
}
