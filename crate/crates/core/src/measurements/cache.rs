//! On-disk cache of measurement sets, keyed by a hash of the source spaces and the
//! generation parameters.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::set::{measurement_set, MeasurementSet, PyramidApprox};
use crate::error::Result;

const FORMAT: &str = "mmlimits-measurements-v1";

/// Hex key for `(source, n, r, budget, seed)`.
pub fn cache_key(source: &PyramidApprox, n: usize, r: f64, budget: usize, seed: u64) -> Result<String> {
    let mut h = Sha256::new();
    h.update(FORMAT.as_bytes());
    for x in source.spaces() {
        h.update(x.to_json()?.as_bytes());
    }
    h.update(n.to_le_bytes());
    h.update(r.to_bits().to_le_bytes());
    h.update(budget.to_le_bytes());
    h.update(seed.to_le_bytes());
    Ok(hex::encode(h.finalize()))
}

fn path_for(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.json"))
}

/// [`measurement_set`] through the cache in `dir`, or uncached when `dir` is `None`.
/// Unreadable or mismatched cache entries are rebuilt.
pub fn measurement_set_cached(
    dir: Option<&Path>,
    source: &PyramidApprox,
    n: usize,
    r: f64,
    budget: usize,
    seed: u64,
) -> Result<MeasurementSet> {
    let Some(dir) = dir else {
        return measurement_set(source, n, r, budget, seed);
    };
    let path = path_for(dir, &cache_key(source, n, r, budget, seed)?);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(set) = serde_json::from_str::<MeasurementSet>(&text) {
            if set.n == n && set.r == r && set.budget == budget && set.seed == seed {
                return Ok(set);
            }
        }
    }
    let set = measurement_set(source, n, r, budget, seed)?;
    fs::create_dir_all(dir)?;
    // write then rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, serde_json::to_string(&set)?)?;
    fs::rename(&tmp, &path)?;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mm::{EmbeddedMetric, FiniteMMSpace, PointCloud};

    #[test]
    fn round_trip_through_cache() {
        let cloud = PointCloud::new(2, vec![0.0, 0.0, 1.0, 0.5, -0.3, 2.0], EmbeddedMetric::Euclidean).unwrap();
        let src = PyramidApprox::Space(FiniteMMSpace::uniform_cloud(cloud).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let first = measurement_set_cached(Some(dir.path()), &src, 2, 2.0, 3, 4).unwrap();
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        let second = measurement_set_cached(Some(dir.path()), &src, 2, 2.0, 3, 4).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, measurement_set(&src, 2, 2.0, 3, 4).unwrap());
        assert_ne!(cache_key(&src, 2, 2.0, 3, 4).unwrap(), cache_key(&src, 2, 2.0, 3, 5).unwrap());
    }
}
