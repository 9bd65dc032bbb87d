//! File formats: point-pattern CSV, covariate-raster CSV, trace and
//! snapshot CSVs, estimate grids, and the experiment summary table.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! serialize/parse cycle reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use coxgp::geometry::Window;
use coxgp::kernel::KernelEstimate;
use coxgp::random_field::{gaussianize, gaussianize_empirical, CovariateField};
use coxgp::sampler::{ChainTrace, SweepRecord, WSnapshot};
use coxgp::simulate::{Dataset, PointPattern};
use coxgp::stats::{mean, std_dev};
use coxgp::summaries::IntensityEstimate;

use crate::config::PreprocessConfig;
use crate::error::{CliError, Result};

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent.display().to_string()))?;
    }
    fs::write(path, content).map_err(CliError::io(path.display().to_string()))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(CliError::io(path.display().to_string()))
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| CliError::Parse {
        path: path.display().to_string(),
        line,
        message: format!("invalid float '{field}'"),
    })
}

fn parse_usize(path: &Path, line: usize, field: &str) -> Result<usize> {
    field.parse::<usize>().map_err(|_| CliError::Parse {
        path: path.display().to_string(),
        line,
        message: format!("invalid integer '{field}'"),
    })
}

// ---------------------------------------------------------------------------
// point-pattern CSV: header `replicate,x1,...,xD`, one event per row

pub fn write_pattern_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let d = dataset.window().dim();
    let mut out = String::from("replicate");
    for k in 1..=d {
        write!(out, ",x{k}").unwrap();
    }
    out.push('\n');
    for (i, (pattern, _)) in dataset.pairs().enumerate() {
        for x in pattern.points() {
            write!(out, "{i}").unwrap();
            for v in x {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    write_file(path, &out)
}

// ---------------------------------------------------------------------------
// covariate-raster CSV:
//   `# dim=<d> axis_1=<r1> ... axis_D=<rD> lower=<..> upper=<..> normalized=<bool>`
//   rows `replicate,i1,...,iD,z1,...,zd` in row-major order (last axis fastest)

pub fn write_raster_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let window = dataset.window();
    let dim_w = window.dim();
    let d = dataset.dim_z();
    let res = dataset.pair(0).1.resolution().to_vec();
    let mut out = String::new();
    write!(out, "# dim={d}").unwrap();
    for (k, r) in res.iter().enumerate() {
        write!(out, " axis_{}={r}", k + 1).unwrap();
    }
    let join = |vals: &[f64]| {
        vals.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    write!(
        out,
        " lower={} upper={} normalized=true",
        join(window.lower()),
        join(window.upper())
    )
    .unwrap();
    out.push('\n');
    out.push_str("replicate");
    for k in 1..=dim_w {
        write!(out, ",i{k}").unwrap();
    }
    for k in 1..=d {
        write!(out, ",z{k}").unwrap();
    }
    out.push('\n');
    let total: usize = res.iter().product();
    for (i, (_, field)) in dataset.pairs().enumerate() {
        if field.resolution() != res.as_slice() {
            return Err(CliError::Config(
                "all replicates must share one raster grid".into(),
            ));
        }
        for node in 0..total {
            write!(out, "{i}").unwrap();
            let mut rem = node;
            let mut idx = vec![0usize; dim_w];
            for a in (0..dim_w).rev() {
                idx[a] = rem % res[a];
                rem /= res[a];
            }
            for v in idx {
                write!(out, ",{v}").unwrap();
            }
            for v in field.node_values(node) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    write_file(path, &out)
}

struct RasterHeader {
    dim_z: usize,
    res: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    normalized: bool,
}

fn parse_raster_header(path: &Path, line: &str) -> Result<RasterHeader> {
    let err = |message: String| CliError::Parse {
        path: path.display().to_string(),
        line: 1,
        message,
    };
    if !line.starts_with('#') {
        return Err(err("raster file must start with a '# dim=...' header".into()));
    }
    let mut dim_z = None;
    let mut axes: BTreeMap<usize, usize> = BTreeMap::new();
    let mut lower = None;
    let mut upper = None;
    let mut normalized = None;
    for token in line.trim_start_matches('#').split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            return Err(err(format!("malformed header token '{token}'")));
        };
        match key {
            "dim" => dim_z = Some(value.parse::<usize>().map_err(|_| err(format!("bad dim '{value}'")))?),
            "lower" | "upper" => {
                let vals = value
                    .split(',')
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|_| err(format!("bad {key} '{value}'")))?;
                if key == "lower" {
                    lower = Some(vals);
                } else {
                    upper = Some(vals);
                }
            }
            "normalized" => {
                normalized = Some(value.parse::<bool>().map_err(|_| err(format!("bad normalized '{value}'")))?)
            }
            other if other.starts_with("axis_") => {
                let k = other[5..]
                    .parse::<usize>()
                    .map_err(|_| err(format!("bad axis key '{other}'")))?;
                let r = value.parse::<usize>().map_err(|_| err(format!("bad axis count '{value}'")))?;
                axes.insert(k, r);
            }
            other => return Err(err(format!("unknown header key '{other}'"))),
        }
    }
    let dim_z = dim_z.ok_or_else(|| err("missing dim".into()))?;
    let lower = lower.ok_or_else(|| err("missing lower".into()))?;
    let upper = upper.ok_or_else(|| err("missing upper".into()))?;
    let normalized = normalized.ok_or_else(|| err("missing normalized".into()))?;
    let dim_w = lower.len();
    if upper.len() != dim_w || axes.len() != dim_w {
        return Err(err("axis count does not match lower/upper length".into()));
    }
    let mut res = Vec::with_capacity(dim_w);
    for k in 1..=dim_w {
        res.push(*axes.get(&k).ok_or_else(|| err(format!("missing axis_{k}")))?);
    }
    Ok(RasterHeader {
        dim_z,
        res,
        lower,
        upper,
        normalized,
    })
}

/// Load a dataset from a point-pattern CSV plus a covariate-raster CSV.
/// Raw (`normalized=false`) rasters are pre-processed onto [0,1] with the
/// requested mode, pooling values across replicates so every replicate
/// shares one transformation.
pub fn load_dataset(
    pattern_path: &Path,
    raster_path: &Path,
    preprocess: PreprocessConfig,
) -> Result<Dataset> {
    let raster_text = read_file(raster_path)?;
    let mut lines = raster_text.lines().enumerate();
    let Some((_, header_line)) = lines.next() else {
        return Err(CliError::Parse {
            path: raster_path.display().to_string(),
            line: 1,
            message: "empty raster file".into(),
        });
    };
    let header = parse_raster_header(raster_path, header_line)?;
    let window = Window::new(header.lower.clone(), header.upper.clone())?;
    let dim_w = window.dim();
    let total: usize = header.res.iter().product();

    // skip the column header line
    let Some((_, columns)) = lines.next() else {
        return Err(CliError::Parse {
            path: raster_path.display().to_string(),
            line: 2,
            message: "missing column header".into(),
        });
    };
    let expected_cols = 1 + dim_w + header.dim_z;
    if columns.split(',').count() != expected_cols {
        return Err(CliError::Parse {
            path: raster_path.display().to_string(),
            line: 2,
            message: format!("expected {expected_cols} columns"),
        });
    }

    // replicate id -> per-node component values (None until filled)
    let mut grids: BTreeMap<usize, Vec<Option<Vec<f64>>>> = BTreeMap::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != expected_cols {
            return Err(CliError::Parse {
                path: raster_path.display().to_string(),
                line: lineno + 1,
                message: format!("expected {expected_cols} fields, got {}", fields.len()),
            });
        }
        let rep = parse_usize(raster_path, lineno + 1, fields[0])?;
        let mut node = 0usize;
        for a in 0..dim_w {
            let idx = parse_usize(raster_path, lineno + 1, fields[1 + a])?;
            if idx >= header.res[a] {
                return Err(CliError::Parse {
                    path: raster_path.display().to_string(),
                    line: lineno + 1,
                    message: format!("grid index {idx} out of range for axis {}", a + 1),
                });
            }
            node = node * header.res[a] + idx;
        }
        let mut z = Vec::with_capacity(header.dim_z);
        for k in 0..header.dim_z {
            z.push(parse_f64(raster_path, lineno + 1, fields[1 + dim_w + k])?);
        }
        let grid = grids
            .entry(rep)
            .or_insert_with(|| vec![None; total]);
        if grid[node].is_some() {
            return Err(CliError::Parse {
                path: raster_path.display().to_string(),
                line: lineno + 1,
                message: format!("duplicate node {node} for replicate {rep}"),
            });
        }
        grid[node] = Some(z);
    }
    if grids.is_empty() {
        return Err(CliError::Config("raster file holds no replicates".into()));
    }
    for (rep, grid) in &grids {
        if grid.iter().any(|g| g.is_none()) {
            return Err(CliError::Config(format!(
                "replicate {rep} raster is incomplete"
            )));
        }
    }

    // pooled pre-processing of raw values
    let replicate_ids: Vec<usize> = grids.keys().copied().collect();
    let mut components: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
    for k in 0..header.dim_z {
        let mut pooled: Vec<f64> = Vec::with_capacity(grids.len() * total);
        for grid in grids.values() {
            pooled.extend(grid.iter().map(|g| g.as_ref().unwrap()[k]));
        }
        let transformed: Vec<f64> = if header.normalized {
            for (i, v) in pooled.iter().enumerate() {
                if !(0.0..=1.0).contains(v) {
                    return Err(CliError::Config(format!(
                        "normalized raster value {v} outside [0,1] (component {}, flat index {i})",
                        k + 1
                    )));
                }
            }
            pooled
        } else {
            match preprocess {
                PreprocessConfig::Phi => {
                    let m = mean(&pooled);
                    let s = std_dev(&pooled);
                    if !(s > 0.0) {
                        return Err(CliError::Config(format!(
                            "covariate component {} has zero spread",
                            k + 1
                        )));
                    }
                    let standardized: Vec<f64> =
                        pooled.iter().map(|v| (v - m) / s).collect();
                    gaussianize(&standardized)?
                }
                PreprocessConfig::Empirical => gaussianize_empirical(&pooled)?,
            }
        };
        for (r, rep) in replicate_ids.iter().enumerate() {
            components
                .entry(*rep)
                .or_insert_with(|| vec![Vec::new(); header.dim_z]);
            components.get_mut(rep).unwrap()[k] =
                transformed[r * total..(r + 1) * total].to_vec();
        }
    }

    // patterns
    let pattern_text = read_file(pattern_path)?;
    let mut pattern_lines = pattern_text.lines().enumerate();
    let Some((_, pat_header)) = pattern_lines.next() else {
        return Err(CliError::Parse {
            path: pattern_path.display().to_string(),
            line: 1,
            message: "empty pattern file".into(),
        });
    };
    if pat_header.split(',').count() != 1 + dim_w {
        return Err(CliError::Parse {
            path: pattern_path.display().to_string(),
            line: 1,
            message: format!("expected {} columns", 1 + dim_w),
        });
    }
    let mut points: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (lineno, line) in pattern_lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + dim_w {
            return Err(CliError::Parse {
                path: pattern_path.display().to_string(),
                line: lineno + 1,
                message: format!("expected {} fields, got {}", 1 + dim_w, fields.len()),
            });
        }
        let rep = parse_usize(pattern_path, lineno + 1, fields[0])?;
        if !grids.contains_key(&rep) {
            return Err(CliError::Config(format!(
                "pattern replicate {rep} has no raster"
            )));
        }
        let mut x = Vec::with_capacity(dim_w);
        for a in 0..dim_w {
            x.push(parse_f64(pattern_path, lineno + 1, fields[1 + a])?);
        }
        if !window.contains(&x) {
            return Err(CliError::Config(format!(
                "pattern point {x:?} lies outside the declared window"
            )));
        }
        points.entry(rep).or_default().extend_from_slice(&x);
    }

    let mut pairs = Vec::with_capacity(replicate_ids.len());
    for rep in &replicate_ids {
        let comps = &components[rep];
        let field =
            CovariateField::from_component_grids(window.clone(), header.res.clone(), comps)?;
        let pattern = PointPattern::new(window.clone(), points.remove(rep).unwrap_or_default())?;
        pairs.push((pattern, field));
    }
    Ok(Dataset::new(pairs)?)
}

// ---------------------------------------------------------------------------
// trace CSV: sweep, rho_star, theta_1..d, ell_1..d, loglik, accept flags

pub fn write_trace_csv(path: &Path, trace: &ChainTrace) -> Result<()> {
    let d = trace.dim;
    let mut out = String::from("sweep,rho_star");
    for j in 1..=d {
        write!(out, ",theta_{j}").unwrap();
    }
    for j in 1..=d {
        write!(out, ",ell_{j}").unwrap();
    }
    out.push_str(",loglik");
    for j in 1..=d {
        write!(out, ",accept_theta_{j}").unwrap();
    }
    for j in 1..=d {
        write!(out, ",accept_ell_{j}").unwrap();
    }
    out.push_str(",accept_pcn\n");
    for rec in &trace.sweeps {
        write!(out, "{},{}", rec.sweep, rec.rho_star).unwrap();
        for v in &rec.theta {
            write!(out, ",{v}").unwrap();
        }
        for v in &rec.ell {
            write!(out, ",{v}").unwrap();
        }
        write!(out, ",{}", rec.loglik).unwrap();
        for &a in &rec.accept_theta {
            write!(out, ",{}", a as u8).unwrap();
        }
        for &a in &rec.accept_ell {
            write!(out, ",{}", a as u8).unwrap();
        }
        writeln!(out, ",{}", rec.accept_pcn as u8).unwrap();
    }
    write_file(path, &out)
}

/// Parsed trace table (the scalar columns of a chain).
pub struct TraceTable {
    pub dim: usize,
    pub records: Vec<SweepRecord>,
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(CliError::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "empty trace file".into(),
        });
    };
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.iter().filter(|c| c.starts_with("theta_")).count();
    let expected = 4 + 4 * d;
    if cols.len() != expected || d == 0 {
        return Err(CliError::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "unrecognized trace header".into(),
        });
    }
    let mut records = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != expected {
            return Err(CliError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: format!("expected {expected} fields"),
            });
        }
        let mut theta = Vec::with_capacity(d);
        let mut ell = Vec::with_capacity(d);
        for j in 0..d {
            theta.push(parse_f64(path, lineno + 1, f[2 + j])?);
            ell.push(parse_f64(path, lineno + 1, f[2 + d + j])?);
        }
        let mut accept_theta = Vec::with_capacity(d);
        let mut accept_ell = Vec::with_capacity(d);
        for j in 0..d {
            accept_theta.push(f[3 + 2 * d + j] == "1");
            accept_ell.push(f[3 + 3 * d + j] == "1");
        }
        records.push(SweepRecord {
            sweep: parse_usize(path, lineno + 1, f[0])?,
            rho_star: parse_f64(path, lineno + 1, f[1])?,
            theta,
            ell,
            loglik: parse_f64(path, lineno + 1, f[2 + 2 * d])?,
            accept_theta,
            accept_ell,
            accept_pcn: f[expected - 1] == "1",
        });
    }
    Ok(TraceTable { dim: d, records })
}

// ---------------------------------------------------------------------------
// w-snapshot CSV: sweep, node, value

pub fn write_w_csv(path: &Path, trace: &ChainTrace) -> Result<()> {
    let mut out = String::from("sweep,node,value\n");
    for snap in &trace.snapshots {
        for (node, v) in snap.w.iter().enumerate() {
            writeln!(out, "{},{node},{v}", snap.sweep).unwrap();
        }
    }
    write_file(path, &out)
}

/// Binary w-snapshot dump: magic "COXW", u32 version, u64 snapshot count,
/// u64 node count, then per snapshot u64 sweep, f64 rho*, and the w row in
/// node order. All integers and floats little-endian.
pub fn write_w_binary(path: &Path, trace: &ChainTrace) -> Result<()> {
    let v = trace.basis_len;
    let mut out = Vec::with_capacity(16 + trace.snapshots.len() * (16 + 8 * v));
    out.extend_from_slice(b"COXW");
    out.extend_from_slice(&1u32.to_le_bytes());
    out.extend_from_slice(&(trace.snapshots.len() as u64).to_le_bytes());
    out.extend_from_slice(&(v as u64).to_le_bytes());
    for snap in &trace.snapshots {
        out.extend_from_slice(&(snap.sweep as u64).to_le_bytes());
        out.extend_from_slice(&snap.rho_star.to_le_bytes());
        for w in &snap.w {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent.display().to_string()))?;
    }
    fs::write(path, out).map_err(CliError::io(path.display().to_string()))
}

pub fn read_w_binary(path: &Path) -> Result<Vec<WSnapshot>> {
    let bytes = fs::read(path).map_err(CliError::io(path.display().to_string()))?;
    let fail = |message: &str| CliError::Parse {
        path: path.display().to_string(),
        line: 0,
        message: message.into(),
    };
    if bytes.len() < 24 || &bytes[0..4] != b"COXW" {
        return Err(fail("not a w-snapshot dump"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != 1 {
        return Err(fail("unsupported version"));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let v = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
    let record = 16 + 8 * v;
    if bytes.len() != 24 + count * record {
        return Err(fail("truncated dump"));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let base = 24 + i * record;
        let sweep = u64::from_le_bytes(bytes[base..base + 8].try_into().unwrap()) as usize;
        let rho_star = f64::from_le_bytes(bytes[base + 8..base + 16].try_into().unwrap());
        let w = (0..v)
            .map(|k| {
                let o = base + 16 + 8 * k;
                f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
            })
            .collect();
        out.push(WSnapshot { sweep, rho_star, w });
    }
    Ok(out)
}

/// Rejoin w snapshots with the rho* column of an already-parsed trace.
pub fn read_w_csv(path: &Path, trace: &TraceTable) -> Result<Vec<WSnapshot>> {
    let text = read_file(path)?;
    let rho_by_sweep: BTreeMap<usize, f64> = trace
        .records
        .iter()
        .map(|r| (r.sweep, r.rho_star))
        .collect();
    let mut snaps: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(CliError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: "expected 3 fields".into(),
            });
        }
        let sweep = parse_usize(path, lineno + 1, f[0])?;
        let node = parse_usize(path, lineno + 1, f[1])?;
        let value = parse_f64(path, lineno + 1, f[2])?;
        snaps.entry(sweep).or_default().push((node, value));
    }
    let mut out = Vec::with_capacity(snaps.len());
    for (sweep, mut nodes) in snaps {
        nodes.sort_by_key(|(n, _)| *n);
        let Some(&rho_star) = rho_by_sweep.get(&sweep) else {
            return Err(CliError::Config(format!(
                "w snapshot at sweep {sweep} has no trace record"
            )));
        };
        out.push(WSnapshot {
            sweep,
            rho_star,
            w: nodes.into_iter().map(|(_, v)| v).collect(),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// estimate / baseline / spatial grids

pub fn write_estimate_csv(path: &Path, estimate: &IntensityEstimate) -> Result<()> {
    let d = estimate.zgrid.dim();
    let mut out = String::new();
    for k in 1..=d {
        write!(out, "z_{k},").unwrap();
    }
    out.push_str("mean,lower,upper\n");
    for (i, z) in estimate.zgrid.points().enumerate() {
        for v in z {
            write!(out, "{v},").unwrap();
        }
        writeln!(
            out,
            "{},{},{}",
            estimate.mean[i], estimate.lower[i], estimate.upper[i]
        )
        .unwrap();
    }
    write_file(path, &out)
}

pub fn write_kernel_csv(path: &Path, estimate: &KernelEstimate) -> Result<()> {
    let d = estimate.zgrid.dim();
    let mut out = String::new();
    for k in 1..=d {
        write!(out, "z_{k},").unwrap();
    }
    out.push_str("value,supported\n");
    for (i, z) in estimate.zgrid.points().enumerate() {
        for v in z {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{},{}", estimate.values[i], estimate.supported[i] as u8).unwrap();
    }
    write_file(path, &out)
}

pub fn write_spatial_csv(path: &Path, dim_w: usize, xpoints: &[f64], values: &[f64]) -> Result<()> {
    let mut out = String::new();
    for k in 1..=dim_w {
        write!(out, "x_{k},").unwrap();
    }
    out.push_str("value\n");
    for (x, v) in xpoints.chunks_exact(dim_w).zip(values) {
        for xi in x {
            write!(out, "{xi},").unwrap();
        }
        writeln!(out, "{v}").unwrap();
    }
    write_file(path, &out)
}

// ---------------------------------------------------------------------------
// summary table

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub replications: usize,
}

pub const SUMMARY_HEADER: &str = "estimator,metric,n,mean,sd,replications";

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.estimator, r.metric, r.n, r.mean, r.sd, r.replications
        )
        .unwrap();
    }
    write_file(path, &out)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == SUMMARY_HEADER => {}
        _ => {
            return Err(CliError::Parse {
                path: path.display().to_string(),
                line: 1,
                message: format!("summary header must be '{SUMMARY_HEADER}'"),
            })
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(CliError::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: "expected 6 fields".into(),
            });
        }
        rows.push(SummaryRow {
            estimator: f[0].to_string(),
            metric: f[1].to_string(),
            n: parse_usize(path, lineno + 1, f[2])?,
            mean: parse_f64(path, lineno + 1, f[3])?,
            sd: parse_f64(path, lineno + 1, f[4])?,
            replications: parse_usize(path, lineno + 1, f[5])?,
        });
    }
    Ok(rows)
}

/// Mean and standard deviation helper for summary assembly.
pub fn summarize(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    let sd = if values.len() > 1 { std_dev(values) } else { 0.0 };
    (m, sd)
}
