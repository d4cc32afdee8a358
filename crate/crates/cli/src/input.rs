use std::path::Path;
use std::sync::Arc;

use rotopt::measure::{parse_occupation, OccupationMeasure};
use rotopt::potential::{parse_potential, LocallyConstantFn};
use rotopt::symbolic::{parse_shift, EdgeGraph, ShiftPresentation};
use rotopt::{Error, RatVec, Rational};

use crate::{CliError, CliResult};

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Parse errors are prefixed with the file name.
fn in_file<T>(path: &Path, r: rotopt::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => CliError::Usage(format!("{}: {e}", path.display())),
        other => CliError::Core(other),
    })
}

pub fn shift(path: &Path) -> CliResult<ShiftPresentation> {
    in_file(path, parse_shift(&read(path)?))
}

pub fn potential(path: &Path, p: &ShiftPresentation) -> CliResult<LocallyConstantFn> {
    in_file(path, parse_potential(&read(path)?, p))
}

pub fn potentials(paths: &[impl AsRef<Path>], p: &ShiftPresentation) -> CliResult<Vec<LocallyConstantFn>> {
    paths.iter().map(|f| potential(f.as_ref(), p)).collect()
}

/// Scalar coordinates of each function, in order.
pub fn components(fns: &[LocallyConstantFn]) -> Vec<LocallyConstantFn> {
    fns.iter().flat_map(|f| (0..f.dim()).map(move |i| f.component(i))).collect()
}

/// The smallest edge graph on which every function lifts.
pub fn graph_for<'a>(
    p: &ShiftPresentation,
    fns: impl IntoIterator<Item = &'a LocallyConstantFn>,
    min_order: usize,
) -> CliResult<Arc<EdgeGraph>> {
    let order = fns.into_iter().map(LocallyConstantFn::order).max().unwrap_or(0).max(min_order).max(1);
    Ok(Arc::new(EdgeGraph::new(p, order)?))
}

/// Reads an occupation file onto `graph`, or onto a higher-order graph
/// when the file needs one.
pub fn occupation(path: &Path, p: &ShiftPresentation, graph: Arc<EdgeGraph>) -> CliResult<OccupationMeasure> {
    let text = read(path)?;
    match parse_occupation(&text, p, &graph) {
        Err(Error::OrderTooSmall { need, .. }) => {
            let g = Arc::new(EdgeGraph::new(p, need)?);
            in_file(path, parse_occupation(&text, p, &g))
        }
        r => in_file(path, r),
    }
}

pub fn vector(s: &str, d: usize) -> CliResult<RatVec> {
    let h = RatVec::parse_list(s)?;
    if h.dim() != d {
        return Err(CliError::Usage(format!("h has {} coordinates, φ has {d}", h.dim())));
    }
    Ok(h)
}

pub fn positive(s: &str, what: &str) -> CliResult<Rational> {
    let r: Rational = s.trim().parse()?;
    if !r.is_positive() {
        return Err(CliError::Usage(format!("{what} must be positive, got {r}")));
    }
    Ok(r)
}
