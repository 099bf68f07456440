//! The rank recursion for `DT(r, l)`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ns_box;
use crate::joyce::{compositions, trees_with_limit};
use crate::qseries::{eta_pow, QExp};
use crate::theta::classical_theta;
use crate::QSeries;

use super::cache::{Cache, CACHE_VERSION};
use super::wall::u_series;
use super::{EngineConfig, Part, WallData};

/// `DT(r, l, D)` for `0 <= D <= order`.
#[derive(Clone, Debug, PartialEq)]
pub struct DTRecord {
    pub r: i64,
    pub l: i64,
    pub order: u64,
    pub values: BTreeMap<u64, BigRational>,
    pub version: String,
}

impl DTRecord {
    /// Reads off `DT(r, l, D) = (-1)^D [q^{D/2r}]` for `D <= order`.
    pub fn values_from_series(r: i64, series: &QSeries, order: u64) -> Result<BTreeMap<u64, BigRational>> {
        let mut values = BTreeMap::new();
        for d in 0..=order {
            let c = series.coeff(QExp::new(d as i64, 2 * r)).ok_or_else(|| {
                Error::Assertion(format!("series precision {:?} does not cover discriminant {d}", series.prec()))
            })?;
            values.insert(d, if d % 2 == 1 { -c } else { c });
        }
        Ok(values)
    }

    pub fn from_series(r: i64, l: i64, order: u64, series: &QSeries) -> Result<Self> {
        Ok(DTRecord {
            r,
            l,
            order,
            values: Self::values_from_series(r, series, order)?,
            version: CACHE_VERSION.to_string(),
        })
    }

    pub fn is_integral(&self) -> bool {
        self.values.values().all(|v| v.is_integer())
    }

    /// The same record cut down to a lower order.
    pub fn truncated(&self, order: u64) -> Self {
        DTRecord {
            order: order.min(self.order),
            values: self.values.range(..=order).map(|(k, v)| (*k, v.clone())).collect(),
            ..self.clone()
        }
    }
}

/// Every summand of the recursion for `DT(r, l)`: compositions of `r`
/// into at least two parts, residues of the parts, and trees.
pub fn walls(r: i64, l: i64, max_parts: usize) -> Result<Vec<WallData>> {
    let mut out = Vec::new();
    for comp in compositions(r as usize) {
        let m = comp.len();
        if m < 2 {
            continue;
        }
        let trees = trees_with_limit(m, max_parts)?;
        let mut tuples: Vec<Vec<Part>> = vec![vec![]];
        for &ri in &comp {
            let ri = ri as i64;
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    ns_box(ri).into_iter().map(move |b| {
                        let mut t = t.clone();
                        t.push(Part { r: ri, beta_bar: b });
                        t
                    })
                })
                .collect();
        }
        for parts in &tuples {
            for tree in &trees {
                out.push(WallData {
                    l,
                    parts: parts.clone(),
                    graph: tree.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Lowest exponent of `theta_{r,a}`.
fn theta_lead(r: i64, a: i64) -> QExp {
    let mut p = QExp::one();
    loop {
        if let Some(e) = classical_theta(r, a, p).lead() {
            return e;
        }
        p *= 2;
    }
}

fn order_for(r: i64, prec: QExp) -> u64 {
    // need (order + 1) / 2r >= prec
    let n = (prec * QExp::from_integer(2 * r)).ceil().to_integer() - 1;
    n.max(0) as u64
}

/// Computes and memoizes `DT(r, l)` series. Lower ranks are shared across
/// calls on the same engine and, when a cache directory is configured,
/// across processes.
pub struct Engine {
    config: EngineConfig,
    cache: Option<Cache>,
    memo: Mutex<HashMap<(i64, i64), QSeries>>,
    pool: rayon::ThreadPool,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool");
        Engine {
            cache: config.cache_dir.clone().map(Cache::new),
            config,
            memo: Mutex::new(HashMap::new()),
            pool,
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn dt_series(&self, r: i64, l: i64, order: u64) -> Result<DTRecord> {
        Ok(self.compute(r, l, order)?.0)
    }

    /// The record together with the underlying `q`-series, exact below
    /// `q^{(order+1)/2r}`.
    pub fn compute(&self, r: i64, l: i64, order: u64) -> Result<(DTRecord, QSeries)> {
        if r < 1 {
            return Err(Error::InvalidInput(format!("rank must be positive, got {r}")));
        }
        if r > self.config.max_rank {
            return Err(Error::LimitExceeded {
                what: "rank",
                value: r as u64,
                max: self.config.max_rank.max(0) as u64,
            });
        }
        let target = QExp::new(order as i64 + 1, 2 * r);
        if let Some(cache) = self.cache.as_ref().filter(|_| r >= 2) {
            if let Some((rec, series)) = cache.load(r, l)? {
                if rec.order >= order {
                    return Ok((rec.truncated(order), series.truncate(target)));
                }
            }
        }
        let series = self.compute_series(r, l, order)?;
        let record = DTRecord::from_series(r, l, order, &series)?;
        self.remember(r, l, &record, &series)?;
        Ok((record, series))
    }

    fn remember(&self, r: i64, l: i64, record: &DTRecord, series: &QSeries) -> Result<()> {
        {
            let mut memo = self.memo.lock().unwrap();
            let key = (r, l.rem_euclid(r));
            let better = memo.get(&key).is_none_or(|s| s.prec() < series.prec());
            if better {
                memo.insert(key, series.clone());
            }
        }
        if let Some(cache) = self.cache.as_ref().filter(|_| r >= 2) {
            cache.store(record, series)?;
        }
        Ok(())
    }

    /// A lower-rank series exact below `prec`.
    fn series_at(&self, r: i64, l: i64, prec: QExp) -> Result<QSeries> {
        let l = l.rem_euclid(r);
        if let Some(s) = self.memo.lock().unwrap().get(&(r, l)) {
            if s.prec().is_some_and(|p| p >= prec) {
                return Ok(s.clone());
            }
        }
        let (_, series) = self.compute(r, l, order_for(r, prec))?;
        Ok(series)
    }

    fn compute_series(&self, r: i64, l: i64, order: u64) -> Result<QSeries> {
        let target = QExp::new(order as i64 + 1, 2 * r);
        if r == 1 {
            // q^{1/8} eta^{-3}
            let shift = QExp::new(1, 8);
            return Ok(eta_pow::<BigRational>(-3, target - shift).shift(shift));
        }
        let walls = walls(r, l, self.config.max_parts)?;
        let mut leads: HashMap<(i64, i64), QExp> = HashMap::new();
        let mut lead = |r: i64, a: i64| *leads.entry((r, a.rem_euclid(r))).or_insert_with(|| theta_lead(r, a));
        let top_lead = lead(r, 1 - l);
        // lower bound for the lead of theta_{r,1-l}^{-1} prod theta_{r_i,a_i}
        let factor_leads: Vec<QExp> = walls
            .iter()
            .map(|w| w.parts.iter().fold(-top_lead, |acc, p| acc + lead(p.r, p.beta_bar.y)))
            .collect();
        let part_leads: Vec<Vec<QExp>> = walls
            .iter()
            .map(|w| w.parts.iter().map(|p| lead(p.r, p.beta_bar.y)).collect())
            .collect();

        let u_parts: Vec<Result<QSeries>> = self.pool.install(|| {
            walls
                .par_iter()
                .zip(&factor_leads)
                .map(|(w, &ly)| u_series(w, target - ly))
                .collect()
        });
        let mut live = Vec::new();
        for (i, u) in u_parts.into_iter().enumerate() {
            let u = u?;
            if let Some(u_lead) = u.lead() {
                live.push((i, u, target - u_lead));
            }
        }

        // lower ranks, highest first
        let mut needs: BTreeMap<(i64, i64), QExp> = BTreeMap::new();
        for (i, _, p_y) in &live {
            let dt_prec = *p_y - factor_leads[*i];
            for p in &walls[*i].parts {
                let e = needs.entry((p.r, p.beta_bar.x)).or_insert(dt_prec);
                if *e < dt_prec {
                    *e = dt_prec;
                }
            }
        }
        let mut lower: HashMap<(i64, i64), QSeries> = HashMap::new();
        for (&(ri, li), &p) in needs.iter().rev() {
            lower.insert((ri, li), self.series_at(ri, li, p)?);
        }

        let contributions: Vec<Result<QSeries>> = self.pool.install(|| {
            live.par_iter()
                .map(|(i, u, p_y)| {
                    let w = &walls[*i];
                    let ly = factor_leads[*i];
                    let base = *p_y - ly;
                    let inv = classical_theta(r, 1 - l, base + top_lead).invert()?;
                    let mut y = inv;
                    for (p, &pl) in w.parts.iter().zip(&part_leads[*i]) {
                        y = &y * &classical_theta(p.r, p.beta_bar.y, base + pl);
                        y = &y * &lower[&(p.r, p.beta_bar.x)];
                    }
                    let m = w.parts.len() as u32;
                    let sign = if m.is_multiple_of(2) { 1 } else { -1 };
                    let coef = BigRational::new(sign.into(), num_bigint::BigInt::from(2).pow(m - 1));
                    Ok((u * &y).scale(&coef))
                })
                .collect()
        });
        let mut total = QSeries::zero(target);
        for c in contributions {
            total = &total + &c?;
        }
        if total.prec().is_none_or(|p| p < target) {
            return Err(Error::Assertion(format!(
                "rank {r} series reached precision {:?}, needed {target}",
                total.prec()
            )));
        }
        let total = total.truncate(target);
        for (e, _) in total.iter() {
            if e < QExp::zero() {
                return Err(Error::Assertion(format!("DT({r}, {l}) has a term at negative exponent {e}")));
            }
            if (e * QExp::from_integer(2 * r)).denom() != &1 {
                return Err(Error::Assertion(format!("DT({r}, {l}) has a term at exponent {e} off the 1/{} grid", 2 * r)));
            }
        }
        Ok(total)
    }
}

/// `DT(r, l, D)` for `D <= order` with the default configuration.
pub fn dt_series(r: i64, l: i64, order: u64) -> Result<DTRecord> {
    Engine::new(EngineConfig::default()).dt_series(r, l, order)
}
