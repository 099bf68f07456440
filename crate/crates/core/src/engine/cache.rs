//! On-disk store of computed `DT(r, l)` series, one JSON file per
//! `(r, l mod r)`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::{parse_rational, rational_to_string, SeriesRecord};
use crate::QSeries;

use super::recursion::DTRecord;

pub const CACHE_VERSION: &str = "lp2dt-dt-1";

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: String,
    r: i64,
    l: i64,
    order: u64,
    series: SeriesRecord,
    values: BTreeMap<u64, String>,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, r: i64, l: i64) -> PathBuf {
        self.dir.join(format!("dt_r{r}_l{}.json", l.rem_euclid(r)))
    }

    /// The stored record and its series, with `l` reported as given.
    pub fn load(&self, r: i64, l: i64) -> Result<Option<(DTRecord, QSeries)>> {
        let path = self.path_for(r, l);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| Error::CacheCorrupt {
            path: path.clone(),
            reason,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        let found = value.get("version").and_then(|v| v.as_str()).unwrap_or("<missing>");
        if found != CACHE_VERSION {
            return Err(Error::CacheVersion {
                path: path.clone(),
                found: found.to_string(),
                expected: CACHE_VERSION.to_string(),
            });
        }
        let file: CacheFile = serde_json::from_value(value).map_err(|e| corrupt(e.to_string()))?;
        if file.r != r || file.l != l.rem_euclid(r) {
            return Err(corrupt(format!("holds (r, l) = ({}, {})", file.r, file.l)));
        }
        let series = QSeries::from_record(&file.series).map_err(|e| corrupt(e.to_string()))?;
        let mut values = BTreeMap::new();
        for (d, v) in &file.values {
            values.insert(*d, parse_rational(v).map_err(|e| corrupt(e.to_string()))?);
        }
        let record = DTRecord {
            r,
            l,
            order: file.order,
            values,
            version: file.version,
        };
        if record.values != DTRecord::values_from_series(r, &series, file.order)? {
            return Err(corrupt("values disagree with the stored series".into()));
        }
        Ok(Some((record, series)))
    }

    /// Writes a record, keeping whichever of the old and new has the higher
    /// order. Overlapping coefficients must agree.
    pub fn store(&self, record: &DTRecord, series: &QSeries) -> Result<()> {
        let path = self.path_for(record.r, record.l);
        if let Some((old, _)) = self.load(record.r, record.l)? {
            if let Some(delta) = first_disagreement(&old, record) {
                return Err(Error::CacheConflict { path, delta });
            }
            if old.order >= record.order {
                return Ok(());
            }
        }
        fs::create_dir_all(&self.dir)?;
        let file = CacheFile {
            version: CACHE_VERSION.to_string(),
            r: record.r,
            l: record.l.rem_euclid(record.r),
            order: record.order,
            series: series.to_record(),
            values: record
                .values
                .iter()
                .map(|(d, v)| (*d, rational_to_string(v)))
                .collect(),
        };
        let text = serde_json::to_string_pretty(&file).expect("cache record serializes");
        // readers only ever see complete files
        let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

fn first_disagreement(a: &DTRecord, b: &DTRecord) -> Option<u64> {
    let common = a.order.min(b.order);
    (0..=common).find(|d| a.values.get(d) != b.values.get(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, EngineConfig};

    #[test]
    fn round_trip_and_version_check() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let engine = Engine::new(EngineConfig::default());
        let (rec, series) = engine.compute(2, 1, 3).unwrap();
        cache.store(&rec, &series).unwrap();
        let (back, s2) = cache.load(2, 3).unwrap().unwrap();
        assert_eq!(back.values, rec.values);
        assert_eq!(back.order, rec.order);
        assert_eq!(s2, series);

        let path = cache.path_for(2, 1);
        let text = fs::read_to_string(&path).unwrap().replace(CACHE_VERSION, "lp2dt-dt-0");
        fs::write(&path, text).unwrap();
        assert!(matches!(cache.load(2, 1), Err(Error::CacheVersion { .. })));

        fs::write(&path, "{ not json").unwrap();
        assert!(matches!(cache.load(2, 1), Err(Error::CacheCorrupt { .. })));
    }

    #[test]
    fn conflicting_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let engine = Engine::new(EngineConfig::default());
        let (mut rec, series) = engine.compute(2, 1, 3).unwrap();
        cache.store(&rec, &series).unwrap();
        *rec.values.get_mut(&3).unwrap() += crate::linalg::rat(1);
        assert!(matches!(
            cache.store(&rec, &series),
            Err(Error::CacheConflict { delta: 3, .. })
        ));
    }
}
