//! On-disk mesh cache.
//!
//! Layout: `<root>/<family>/dim_<N>_prec_<P>.points` and `.weights`. Each file
//! starts with a header line
//! `#lagmesh family=<name> n=<N> precision=<P> kind=<points|weights>` followed
//! by `N` lines: one decimal per line for points (ascending), `w_k λ_k` for
//! weights. Files are written to a temporary name and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::{debug, info, warn};
use rug::Float;

use super::{mesh_points, mesh_weights, MeshKey, MeshRecord, PolyFamily};
use crate::error::{Error, Result, Warning};
use crate::numeric::{format_real_scalar, BigReal};

pub const CACHE_ENV: &str = "LAGMESH_CACHE";

/// Cache root from `LAGMESH_CACHE`, defaulting to `./meshes`.
pub fn cache_root_from_env() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("meshes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOrigin {
    /// Points and weights were read from disk.
    Hit,
    /// Points were read from disk; weights were computed from them.
    PointsHit,
    /// Nothing usable was cached; the mesh was computed.
    Built,
}

#[derive(Debug, Clone)]
pub struct MeshBuild {
    pub record: MeshRecord,
    pub origin: CacheOrigin,
    pub points_file: PathBuf,
    /// `None` when weights were not requested and none were cached.
    pub weights_file: Option<PathBuf>,
    pub warnings: Vec<Warning>,
}

fn file_stem(key: &MeshKey) -> String {
    format!("dim_{}_prec_{}", key.dimension, key.precision)
}

pub fn points_path(root: &Path, key: &MeshKey) -> PathBuf {
    root.join(key.family.name()).join(format!("{}.points", file_stem(key)))
}

pub fn weights_path(root: &Path, key: &MeshKey) -> PathBuf {
    root.join(key.family.name()).join(format!("{}.weights", file_stem(key)))
}

fn header(key: &MeshKey, kind: &str) -> String {
    format!(
        "#lagmesh family={} n={} precision={} kind={}",
        key.family.name(),
        key.dimension,
        key.precision,
        kind
    )
}

fn cache_digits(key: &MeshKey) -> usize {
    key.context().internal_digits() as usize
}

fn render(x: &BigReal, digits: usize) -> String {
    format_real_scalar(x, digits).expect("cache values are finite and carry enough bits")
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().expect("cache files live in a family directory");
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    let tmp = dir.join(format!(
        ".{}.{}.{}.tmp",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("mesh"),
        std::process::id(),
        nanos
    ));
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(contents.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_points(root: &Path, record: &MeshRecord) -> Result<PathBuf> {
    let path = points_path(root, &record.key);
    let digits = cache_digits(&record.key);
    let mut out = header(&record.key, "points");
    out.push('\n');
    for x in &record.points {
        out.push_str(&render(x, digits));
        out.push('\n');
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

fn write_weights(root: &Path, record: &MeshRecord) -> Result<PathBuf> {
    let path = weights_path(root, &record.key);
    let digits = cache_digits(&record.key);
    let mut out = header(&record.key, "weights");
    out.push('\n');
    for (w, l) in record.gauss_weights.iter().zip(&record.lagrange_weights) {
        out.push_str(&render(w, digits));
        out.push(' ');
        out.push_str(&render(l, digits));
        out.push('\n');
    }
    write_atomic(&path, &out)?;
    Ok(path)
}

fn corrupt(path: &Path, reason: impl Into<String>) -> Error {
    Error::CacheCorruption {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads a cache file, checks its header, and returns the data lines.
fn read_body(path: &Path, key: &MeshKey, kind: &str) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| corrupt(path, e.to_string()))?;
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| corrupt(path, "empty file"))?;
    if head.trim_end() != header(key, kind) {
        return Err(corrupt(path, format!("unexpected header `{head}`")));
    }
    let body: Vec<String> = lines.map(str::to_owned).collect();
    if body.len() != key.dimension {
        return Err(corrupt(
            path,
            format!("expected {} data lines, found {}", key.dimension, body.len()),
        ));
    }
    Ok(body)
}

fn parse_value(path: &Path, line: usize, text: &str, bits: u32) -> Result<Float> {
    let parsed = Float::parse(text).map_err(|e| corrupt(path, format!("line {}: {e}", line + 2)))?;
    let value = Float::with_val(bits, parsed);
    if !value.is_finite() {
        return Err(corrupt(path, format!("line {}: non-finite value", line + 2)));
    }
    Ok(value)
}

fn read_points(root: &Path, key: &MeshKey) -> Result<Vec<BigReal>> {
    let path = points_path(root, key);
    let bits = key.context().bits();
    let body = read_body(&path, key, "points")?;
    let mut points = Vec::with_capacity(body.len());
    for (i, line) in body.iter().enumerate() {
        let x = parse_value(&path, i, line.trim(), bits)?;
        if let Some(prev) = points.last() {
            if x <= *prev {
                return Err(corrupt(&path, format!("line {}: points not ascending", i + 2)));
            }
        }
        points.push(x);
    }
    Ok(points)
}

fn read_weights(root: &Path, key: &MeshKey) -> Result<(Vec<BigReal>, Vec<BigReal>)> {
    let path = weights_path(root, key);
    let bits = key.context().bits();
    let body = read_body(&path, key, "weights")?;
    let mut gauss = Vec::with_capacity(body.len());
    let mut lagrange = Vec::with_capacity(body.len());
    for (i, line) in body.iter().enumerate() {
        let mut cols = line.split(' ');
        let (Some(w), Some(l), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(corrupt(&path, format!("line {}: expected two columns", i + 2)));
        };
        let w = parse_value(&path, i, w, bits)?;
        let l = parse_value(&path, i, l, bits)?;
        if w <= 0 || l <= 0 {
            return Err(corrupt(&path, format!("line {}: non-positive weight", i + 2)));
        }
        gauss.push(w);
        lagrange.push(l);
    }
    Ok((gauss, lagrange))
}

/// Loads the mesh from the cache under `root`, computing and persisting
/// whatever is missing. Corrupt files are reported as warnings, recomputed and
/// overwritten.
pub fn build_mesh(key: MeshKey, root: &Path) -> Result<MeshBuild> {
    build_mesh_with(key, root, true)
}

/// As [`build_mesh`]; `write_weights` controls whether a missing weights file
/// is created (the returned record always carries weights).
pub fn build_mesh_with(key: MeshKey, root: &Path, persist_weights: bool) -> Result<MeshBuild> {
    let ctx = key.context();
    let mut warnings = Vec::new();
    let ppath = points_path(root, &key);
    let wpath = weights_path(root, &key);

    let cached_points = if ppath.exists() {
        match read_points(root, &key) {
            Ok(p) => Some(p),
            Err(e) => {
                warn!("{e}; recomputing");
                warnings.push(Warning::CacheRebuilt {
                    path: ppath.clone(),
                    reason: e.to_string(),
                });
                None
            }
        }
    } else {
        None
    };

    let (points, points_cached) = match cached_points {
        Some(p) => (p, true),
        None => {
            info!("building {} mesh N={} P={}", key.family, key.dimension, key.precision);
            (mesh_points(key.family, key.dimension, &ctx)?, false)
        }
    };

    let cached_weights = if points_cached && wpath.exists() {
        match read_weights(root, &key) {
            Ok(w) => Some(w),
            Err(e) => {
                warn!("{e}; recomputing");
                warnings.push(Warning::CacheRebuilt {
                    path: wpath.clone(),
                    reason: e.to_string(),
                });
                None
            }
        }
    } else {
        None
    };
    let weights_cached = cached_weights.is_some();
    let (gauss_weights, lagrange_weights) = match cached_weights {
        Some(w) => w,
        None => mesh_weights(key.family, key.dimension, &points, &ctx)?,
    };

    let record = MeshRecord {
        key,
        points,
        gauss_weights,
        lagrange_weights,
    };
    if !points_cached {
        write_points(root, &record)?;
    }
    let weights_file = if weights_cached {
        Some(wpath)
    } else if persist_weights {
        Some(write_weights(root, &record)?)
    } else {
        None
    };
    let origin = match (points_cached, weights_cached) {
        (true, true) => CacheOrigin::Hit,
        (true, false) => CacheOrigin::PointsHit,
        _ => CacheOrigin::Built,
    };
    debug!("{} mesh N={} P={}: {:?}", key.family, key.dimension, key.precision, origin);
    Ok(MeshBuild {
        record,
        origin,
        points_file: ppath,
        weights_file,
        warnings,
    })
}

/// Filter for [`available_mesh`]; unset fields match everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeshQuery {
    pub family: Option<PolyFamily>,
    pub dimension: Option<usize>,
    pub precision: Option<u32>,
    pub print_mesh: bool,
    pub print_domain: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshEntry {
    pub key: MeshKey,
    pub has_weights: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshListing {
    /// Ordered table of cached meshes matching a partial query.
    Table(Vec<MeshEntry>),
    /// Answer to a fully keyed query, with the node list and/or the smallest
    /// and greatest node when requested.
    Exists {
        key: MeshKey,
        exists: bool,
        points: Option<Vec<BigReal>>,
        domain: Option<(BigReal, BigReal)>,
    },
}

impl MeshListing {
    pub fn exists(&self) -> bool {
        match self {
            MeshListing::Table(rows) => !rows.is_empty(),
            MeshListing::Exists { exists, .. } => *exists,
        }
    }
}

fn parse_stem(name: &str) -> Option<(usize, u32)> {
    let rest = name.strip_prefix("dim_")?.strip_suffix(".points")?;
    let (n, p) = rest.split_once("_prec_")?;
    Some((n.parse().ok()?, p.parse().ok()?))
}

fn scan(root: &Path, family: PolyFamily) -> Vec<MeshEntry> {
    let Ok(dir) = fs::read_dir(root.join(family.name())) else {
        return Vec::new();
    };
    let mut entries: Vec<MeshEntry> = dir
        .filter_map(|e| e.ok())
        .filter_map(|e| parse_stem(e.file_name().to_str()?))
        .filter_map(|(n, p)| MeshKey::new(family, n, p).ok())
        .map(|key| MeshEntry {
            has_weights: weights_path(root, &key).exists(),
            key,
        })
        .collect();
    entries.sort_by_key(|e| e.key);
    entries
}

/// Lists cached meshes, or answers whether a fully keyed mesh exists.
pub fn available_mesh(query: &MeshQuery, root: &Path) -> Result<MeshListing> {
    if let (Some(family), Some(dimension), Some(precision)) = (query.family, query.dimension, query.precision) {
        let key = MeshKey::new(family, dimension, precision)?;
        let exists = points_path(root, &key).exists();
        let points = if exists && (query.print_mesh || query.print_domain) {
            Some(read_points(root, &key)?)
        } else {
            None
        };
        let domain = match (&points, query.print_domain) {
            (Some(p), true) => Some((p[0].clone(), p[p.len() - 1].clone())),
            _ => None,
        };
        return Ok(MeshListing::Exists {
            key,
            exists,
            points: if query.print_mesh { points } else { None },
            domain,
        });
    }
    let families: Vec<PolyFamily> = match query.family {
        Some(f) => vec![f],
        None => PolyFamily::ALL.to_vec(),
    };
    let rows = families
        .into_iter()
        .flat_map(|f| scan(root, f))
        .filter(|e| query.dimension.is_none_or(|n| e.key.dimension == n))
        .filter(|e| query.precision.is_none_or(|p| e.key.precision == p))
        .collect();
    Ok(MeshListing::Table(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn build_then_hit() {
        let dir = tempdir().unwrap();
        let key = MeshKey::new(PolyFamily::Hermite, 1, 20).unwrap();
        let first = build_mesh(key, dir.path()).unwrap();
        assert_eq!(first.origin, CacheOrigin::Built);
        assert!(first.record.points[0].is_zero());
        assert!(dir.path().join("hermite/dim_1_prec_20.points").exists());
        assert!(dir.path().join("hermite/dim_1_prec_20.weights").exists());
        let second = build_mesh(key, dir.path()).unwrap();
        assert_eq!(second.origin, CacheOrigin::Hit);
        let sqrt_pi = key.context().pi().sqrt();
        let diff = Float::with_val(64, &second.record.lagrange_weights[0] - &sqrt_pi).abs();
        assert!(diff < 1e-25);
    }

    #[test]
    fn points_only_then_weights() {
        let dir = tempdir().unwrap();
        let key = MeshKey::new(PolyFamily::Laguerre, 6, 20).unwrap();
        let b = build_mesh_with(key, dir.path(), false).unwrap();
        assert!(b.weights_file.is_none());
        assert!(!weights_path(dir.path(), &key).exists());
        let b = build_mesh(key, dir.path()).unwrap();
        assert_eq!(b.origin, CacheOrigin::PointsHit);
        assert!(weights_path(dir.path(), &key).exists());
    }

    #[test]
    fn file_format_roundtrip_is_exact() {
        let dir = tempdir().unwrap();
        let key = MeshKey::new(PolyFamily::Laguerre, 12, 30).unwrap();
        let built = build_mesh(key, dir.path()).unwrap();
        let original = fs::read_to_string(points_path(dir.path(), &key)).unwrap();
        let original_w = fs::read_to_string(weights_path(dir.path(), &key)).unwrap();
        let loaded = build_mesh(key, dir.path()).unwrap();
        assert_eq!(loaded.origin, CacheOrigin::Hit);
        let other = tempdir().unwrap();
        write_points(other.path(), &loaded.record).unwrap();
        write_weights(other.path(), &loaded.record).unwrap();
        assert_eq!(fs::read_to_string(points_path(other.path(), &key)).unwrap(), original);
        assert_eq!(fs::read_to_string(weights_path(other.path(), &key)).unwrap(), original_w);
        let first_line = original.lines().next().unwrap();
        assert_eq!(first_line, "#lagmesh family=laguerre n=12 precision=30 kind=points");
        assert_eq!(built.record.points.len(), 12);
        assert!(!original.contains('\r'));
    }

    #[test]
    fn corrupt_file_is_rebuilt() {
        let dir = tempdir().unwrap();
        let key = MeshKey::new(PolyFamily::Legendre, 5, 20).unwrap();
        build_mesh(key, dir.path()).unwrap();
        fs::write(points_path(dir.path(), &key), "garbage\n").unwrap();
        let b = build_mesh(key, dir.path()).unwrap();
        assert_eq!(b.origin, CacheOrigin::Built);
        assert!(matches!(b.warnings[0], Warning::CacheRebuilt { .. }));
        let again = build_mesh(key, dir.path()).unwrap();
        assert_eq!(again.origin, CacheOrigin::Hit);
    }

    #[test]
    fn listing_and_existence() {
        let dir = tempdir().unwrap();
        let missing = available_mesh(&MeshQuery::default(), &dir.path().join("nope")).unwrap();
        assert_eq!(missing, MeshListing::Table(vec![]));

        build_mesh(MeshKey::new(PolyFamily::Hermite, 20, 50).unwrap(), dir.path()).unwrap();
        build_mesh(MeshKey::new(PolyFamily::Laguerre, 7, 20).unwrap(), dir.path()).unwrap();

        let q = MeshQuery {
            family: Some(PolyFamily::Hermite),
            dimension: Some(20),
            precision: Some(50),
            print_domain: true,
            ..Default::default()
        };
        let MeshListing::Exists { exists, domain, .. } = available_mesh(&q, dir.path()).unwrap() else {
            panic!("expected keyed answer");
        };
        assert!(exists);
        let (lo, hi) = domain.unwrap();
        assert_eq!(Float::with_val(64, &lo + &hi), 0);

        let q = MeshQuery {
            family: Some(PolyFamily::Legendre),
            dimension: Some(999),
            precision: Some(50),
            ..Default::default()
        };
        assert!(!available_mesh(&q, dir.path()).unwrap().exists());

        let q = MeshQuery {
            dimension: Some(20),
            ..Default::default()
        };
        let MeshListing::Table(rows) = available_mesh(&q, dir.path()).unwrap() else {
            panic!("expected table");
        };
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].key.family, PolyFamily::Hermite);
    }
}
