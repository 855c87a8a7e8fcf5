//! Scenario construction from mobility traces or a synthetic city.
//!
//! Both routes share the same recipe once every worker has a set of eligible
//! tasks (those within the assignment radius of its movements): random option
//! subsets, per-worker cost factors, quality means and normalized weights.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use log::warn;
use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_param, Error, Result};
use crate::model::{Hyperparameters, QualityDistribution, Scenario, Task, WorkerOption, WorkerTruth};
use crate::rng::{stream, TAG_SCENARIO};
use crate::sim::SweepParam;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Edge length of the popularity grid used to pick task locations.
pub const GRID_CELL_M: f64 = 100.0;
/// Entities with fewer points near a task location are dropped.
pub const MIN_NEAR_VISITS: usize = 5;
/// Share of malformed trace rows tolerated before parsing fails.
pub const MAX_MALFORMED_FRACTION: f64 = 0.01;

const QUALITY_MEAN_RANGE: (f64, f64) = (0.05, 0.95);

/// Great-circle distance in meters.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub entity_id: String,
    /// Seconds since the Unix epoch.
    pub timestamp: f64,
    pub latitude: f64,
    pub longitude: f64,
}

/// Recipe for building a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(rename = "M")]
    pub num_tasks: usize,
    #[serde(rename = "N")]
    pub num_workers: usize,
    /// Workers per round; `ceil(N / 3)` when absent.
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub workers_per_round: Option<usize>,
    pub kappa: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub r: usize,
    pub budget: f64,
    pub option_size_range: (usize, usize),
    /// Options generated per worker (`L`).
    pub options_per_worker: usize,
    pub assignment_radius_m: f64,
    /// Concentration of each worker's Beta quality distribution.
    pub quality_concentration: f64,
    /// Side of the square synthetic city.
    pub plane_size_m: f64,
    /// Points on each synthetic worker's route.
    pub route_steps: usize,
    pub route_step_m: f64,
    pub seed: u64,
    /// `"synthetic"` or the path of a trace CSV.
    pub source: String,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            num_tasks: 300,
            num_workers: 50,
            workers_per_round: None,
            kappa: 0.4,
            gamma: 1.0,
            lambda: 5.0,
            r: 2,
            budget: 850.0,
            option_size_range: (5, 15),
            options_per_worker: 5,
            assignment_radius_m: 200.0,
            quality_concentration: 4.0,
            plane_size_m: 10_000.0,
            route_steps: 120,
            route_step_m: 250.0,
            seed: 0,
            source: "synthetic".to_string(),
        }
    }
}

impl ScenarioSpec {
    pub fn k(&self) -> usize {
        self.workers_per_round.unwrap_or_else(|| self.num_workers.div_ceil(3))
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            kappa: self.kappa,
            gamma: self.gamma,
            lambda: self.lambda,
            r: self.r,
            k: self.k(),
            budget: self.budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_tasks == 0 {
            return Err(invalid_param("M", "must be positive"));
        }
        if self.num_workers == 0 {
            return Err(invalid_param("N", "must be positive"));
        }
        let k = self.k();
        if k == 0 || k > self.num_workers {
            return Err(invalid_param("K", format!("{k} must be in [1, N = {}]", self.num_workers)));
        }
        if self.r == 0 || self.r > k {
            return Err(invalid_param("r", format!("{} must be in [1, K = {k}]", self.r)));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(invalid_param("kappa", format!("{} not in [0, 1]", self.kappa)));
        }
        if !(self.gamma >= 0.0) {
            return Err(invalid_param("gamma", "must be >= 0"));
        }
        if !(self.lambda > 0.0) {
            return Err(invalid_param("lambda", "must be > 0"));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(invalid_param("budget", "must be > 0"));
        }
        let (lo, hi) = self.option_size_range;
        if lo == 0 || lo > hi || hi > self.num_tasks {
            return Err(invalid_param(
                "option_size_range",
                format!("({lo}, {hi}) must satisfy 1 <= min <= max <= M"),
            ));
        }
        if self.options_per_worker == 0 {
            return Err(invalid_param("options_per_worker", "must be positive"));
        }
        if !(self.assignment_radius_m > 0.0) {
            return Err(invalid_param("assignment_radius_m", "must be > 0"));
        }
        if !(self.quality_concentration > 0.0) {
            return Err(invalid_param("quality_concentration", "must be > 0"));
        }
        if !(self.plane_size_m > 0.0 && self.route_step_m >= 0.0) {
            return Err(invalid_param("plane_size_m", "plane and route step must be positive"));
        }
        Ok(())
    }

    /// Copy with one sweep parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let count = |name: &'static str| -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(invalid_param(name, format!("{value} is not a whole number")))
            }
        };
        let mut spec = self.clone();
        match param {
            SweepParam::Budget => spec.budget = value,
            SweepParam::K => spec.workers_per_round = Some(count("K")?),
            SweepParam::Kappa => spec.kappa = value,
            SweepParam::Gamma => spec.gamma = value,
            SweepParam::R => spec.r = count("r")?,
            SweepParam::N => spec.num_workers = count("N")?,
            SweepParam::M => spec.num_tasks = count("M")?,
        }
        Ok(spec)
    }

    /// Builds the scenario this spec describes, reading the trace if needed.
    pub fn build(&self) -> Result<Scenario> {
        if self.source == "synthetic" {
            build_synthetic(self)
        } else {
            let points = parse_trace(Path::new(&self.source))?;
            build_from_trace(&points, self)
        }
    }
}

fn parse_timestamp(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
    }
    for fmt in ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f%#z"] {
        if let Ok(dt) = DateTime::parse_from_str(s, fmt) {
            return Some(dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9);
        }
        if let Ok(ndt) = NaiveDateTime::parse_from_str(s, fmt) {
            let utc = ndt.and_utc();
            return Some(utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9);
        }
    }
    None
}

fn parse_row(line: &str) -> Option<TracePoint> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 4 || fields[0].is_empty() {
        return None;
    }
    let latitude: f64 = fields[2].parse().ok()?;
    let longitude: f64 = fields[3].parse().ok()?;
    if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
        return None;
    }
    Some(TracePoint {
        entity_id: fields[0].to_string(),
        timestamp: parse_timestamp(fields[1])?,
        latitude,
        longitude,
    })
}

fn looks_like_header(line: &str) -> bool {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    fields.len() == 4 && fields[2].parse::<f64>().is_err() && fields[3].parse::<f64>().is_err()
}

/// Reads `entity_id,timestamp,latitude,longitude` rows (header optional).
///
/// Malformed or out-of-range rows are skipped while they stay within 1% of
/// the data rows; beyond that the whole file is rejected with their line numbers.
pub fn parse_trace(path: &Path) -> Result<Vec<TracePoint>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace_str(&text).map_err(|reason| Error::Trace {
        path: path.to_path_buf(),
        reason,
    })
}

pub(crate) fn parse_trace_str(text: &str) -> std::result::Result<Vec<TracePoint>, String> {
    let mut points = Vec::new();
    let mut malformed = Vec::new();
    let mut rows = 0usize;
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if std::mem::take(&mut first) && looks_like_header(line) {
            continue;
        }
        rows += 1;
        match parse_row(line) {
            Some(p) => points.push(p),
            None => malformed.push(i + 1),
        }
    }
    if rows == 0 {
        return Err("no data rows".into());
    }
    if malformed.len() as f64 > MAX_MALFORMED_FRACTION * rows as f64 {
        let shown: Vec<String> = malformed.iter().take(20).map(|l| l.to_string()).collect();
        return Err(format!(
            "{} of {rows} rows are malformed (lines {}{})",
            malformed.len(),
            shown.join(", "),
            if malformed.len() > 20 { ", ..." } else { "" }
        ));
    }
    if !malformed.is_empty() {
        warn!("skipped {} malformed trace rows", malformed.len());
    }
    points.sort_by(|a, b| {
        a.entity_id
            .cmp(&b.entity_id)
            .then(a.timestamp.total_cmp(&b.timestamp))
    });
    Ok(points)
}

/// Scenario built from a trace, with the geography that produced it.
#[derive(Debug, Clone)]
pub struct TraceScenario {
    pub scenario: Scenario,
    /// `(latitude, longitude)` of each task.
    pub task_locations: Vec<(f64, f64)>,
    /// Trace entity behind each worker.
    pub worker_entities: Vec<String>,
}

/// Buckets points on a square grid for radius queries.
struct SpatialIndex {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl SpatialIndex {
    fn new(cell: f64, points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, (x, y)) in points.enumerate() {
            buckets.entry(Self::key(cell, x, y)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(cell: f64, x: f64, y: f64) -> (i64, i64) {
        ((x / cell).floor() as i64, (y / cell).floor() as i64)
    }

    /// Indices in the 3x3 block of cells around `(x, y)`.
    fn nearby(&self, x: f64, y: f64) -> impl Iterator<Item = usize> + '_ {
        let (cx, cy) = Self::key(self.cell, x, y);
        (-1..=1).flat_map(move |dx| {
            (-1..=1).flat_map(move |dy| {
                self.buckets
                    .get(&(cx + dx, cy + dy))
                    .into_iter()
                    .flat_map(|v| v.iter().copied())
            })
        })
    }
}

/// Local equirectangular projection around a reference point.
#[derive(Clone, Copy)]
struct Projection {
    lat0: f64,
    lon0: f64,
    cos_lat0: f64,
}

impl Projection {
    fn to_xy(&self, lat: f64, lon: f64) -> (f64, f64) {
        (
            EARTH_RADIUS_M * (lon - self.lon0).to_radians() * self.cos_lat0,
            EARTH_RADIUS_M * (lat - self.lat0).to_radians(),
        )
    }

    fn to_latlon(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.lat0 + (y / EARTH_RADIUS_M).to_degrees(),
            self.lon0 + (x / (EARTH_RADIUS_M * self.cos_lat0)).to_degrees(),
        )
    }
}

pub fn build_from_trace(points: &[TracePoint], spec: &ScenarioSpec) -> Result<Scenario> {
    build_from_trace_detailed(points, spec).map(|t| t.scenario)
}

/// Picks the `M` most visited grid cells as tasks, keeps entities that visit
/// them at least [`MIN_NEAR_VISITS`] times, samples `N` of those as workers
/// and assigns each the tasks within the radius of any of its points.
pub fn build_from_trace_detailed(points: &[TracePoint], spec: &ScenarioSpec) -> Result<TraceScenario> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::InsufficientData("trace has no points".into()));
    }
    let lat0 = points.iter().map(|p| p.latitude).sum::<f64>() / points.len() as f64;
    let lon0 = points.iter().map(|p| p.longitude).sum::<f64>() / points.len() as f64;
    let proj = Projection {
        lat0,
        lon0,
        cos_lat0: lat0.to_radians().cos().max(1e-6),
    };
    let xy: Vec<(f64, f64)> = points.iter().map(|p| proj.to_xy(p.latitude, p.longitude)).collect();

    let mut popularity: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for &(x, y) in &xy {
        *popularity.entry(SpatialIndex::key(GRID_CELL_M, x, y)).or_default() += 1;
    }
    if popularity.len() < spec.num_tasks {
        return Err(Error::InsufficientData(format!(
            "trace visits {} grid cells, {} tasks requested",
            popularity.len(),
            spec.num_tasks
        )));
    }
    let mut cells: Vec<((i64, i64), usize)> = popularity.into_iter().collect();
    cells.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let task_xy: Vec<(f64, f64)> = cells[..spec.num_tasks]
        .iter()
        .map(|&((cx, cy), _)| ((cx as f64 + 0.5) * GRID_CELL_M, (cy as f64 + 0.5) * GRID_CELL_M))
        .collect();
    let task_locations: Vec<(f64, f64)> = task_xy.iter().map(|&(x, y)| proj.to_latlon(x, y)).collect();

    // Projected and great-circle distances differ slightly; widen the buckets.
    let radius = spec.assignment_radius_m;
    let index = SpatialIndex::new(radius * 1.05, task_xy.iter().copied());

    struct Entity {
        id: String,
        near_visits: usize,
        eligible: Vec<usize>,
    }
    let mut entities: Vec<Entity> = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let id = &points[start].entity_id;
        let end = start + points[start..].iter().take_while(|p| &p.entity_id == id).count();
        let mut near_visits = 0;
        let mut eligible = vec![false; spec.num_tasks];
        for k in start..end {
            let p = &points[k];
            let mut near = false;
            for t in index.nearby(xy[k].0, xy[k].1) {
                let (tlat, tlon) = task_locations[t];
                if haversine_m(p.latitude, p.longitude, tlat, tlon) <= radius {
                    eligible[t] = true;
                    near = true;
                }
            }
            near_visits += usize::from(near);
        }
        entities.push(Entity {
            id: id.clone(),
            near_visits,
            eligible: (0..spec.num_tasks).filter(|&t| eligible[t]).collect(),
        });
        start = end;
    }
    let total = entities.len();
    entities.retain(|e| e.near_visits >= MIN_NEAR_VISITS);
    if entities.len() < spec.num_workers {
        return Err(Error::InsufficientData(format!(
            "{} of {total} entities visit the task locations at least {MIN_NEAR_VISITS} times, {} workers requested",
            entities.len(),
            spec.num_workers
        )));
    }
    let mut rng = stream(spec.seed, TAG_SCENARIO, &[1]);
    let mut picked: Vec<usize> = index::sample(&mut rng, entities.len(), spec.num_workers).into_vec();
    picked.sort_unstable();

    let worker_entities: Vec<String> = picked.iter().map(|&i| entities[i].id.clone()).collect();
    let eligible: Vec<Vec<usize>> = picked.iter().map(|&i| entities[i].eligible.clone()).collect();
    let (scenario, kept) = assemble(spec, eligible)?;
    Ok(TraceScenario {
        scenario,
        task_locations,
        worker_entities: kept.into_iter().map(|i| worker_entities[i].clone()).collect(),
    })
}

/// Synthetic city: tasks uniform on a square plane, each worker a persistent
/// random route starting from a uniform home point. Planar distances.
pub fn build_synthetic(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let size = spec.plane_size_m;
    let mut rng = stream(spec.seed, TAG_SCENARIO, &[0]);
    let tasks: Vec<(f64, f64)> = (0..spec.num_tasks)
        .map(|_| (rng.random_range(0.0..size), rng.random_range(0.0..size)))
        .collect();
    let index = SpatialIndex::new(spec.assignment_radius_m, tasks.iter().copied());
    let radius_sq = spec.assignment_radius_m * spec.assignment_radius_m;

    let mut eligible = Vec::with_capacity(spec.num_workers);
    for _ in 0..spec.num_workers {
        let mut pos = (rng.random_range(0.0..size), rng.random_range(0.0..size));
        let mut heading = rng.random_range(0.0..std::f64::consts::TAU);
        let mut hit = vec![false; spec.num_tasks];
        for step in 0..=spec.route_steps {
            if step > 0 {
                heading += rng.random_range(-0.6..0.6);
                let mut nx = pos.0 + spec.route_step_m * heading.cos();
                let mut ny = pos.1 + spec.route_step_m * heading.sin();
                if !(0.0..=size).contains(&nx) {
                    nx = nx.clamp(0.0, size);
                    heading = std::f64::consts::PI - heading;
                }
                if !(0.0..=size).contains(&ny) {
                    ny = ny.clamp(0.0, size);
                    heading = -heading;
                }
                pos = (nx, ny);
            }
            for t in index.nearby(pos.0, pos.1) {
                let (dx, dy) = (tasks[t].0 - pos.0, tasks[t].1 - pos.1);
                if dx * dx + dy * dy <= radius_sq {
                    hit[t] = true;
                }
            }
        }
        eligible.push((0..spec.num_tasks).filter(|&t| hit[t]).collect());
    }
    assemble(spec, eligible).map(|(s, _)| s)
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    }
}

/// Shared tail of scenario construction. Returns the scenario and, for each
/// kept worker, its index in `eligible`.
fn assemble(spec: &ScenarioSpec, eligible: Vec<Vec<usize>>) -> Result<(Scenario, Vec<usize>)> {
    let kept: Vec<usize> = (0..eligible.len()).filter(|&i| !eligible[i].is_empty()).collect();
    if kept.len() < eligible.len() {
        warn!(
            "dropping {} workers with no eligible tasks; N is now {}",
            eligible.len() - kept.len(),
            kept.len()
        );
    }
    if kept.is_empty() {
        return Err(Error::InsufficientData("no worker is near any task".into()));
    }
    let mut hyper = spec.hyperparameters();
    if hyper.k > kept.len() {
        warn!("K = {} exceeds the {} remaining workers; using K = N", hyper.k, kept.len());
        hyper.k = kept.len();
        hyper.r = hyper.r.min(hyper.k);
    }

    let mut rng = stream(spec.seed, TAG_SCENARIO, &[2]);
    let (lo, hi) = spec.option_size_range;
    let mut workers = Vec::with_capacity(kept.len());
    let mut options = Vec::new();
    for (i, &src) in kept.iter().enumerate() {
        let pool = &eligible[src];
        let cost_factor = open_unit(&mut rng);
        let mean = rng.random_range(QUALITY_MEAN_RANGE.0..QUALITY_MEAN_RANGE.1);
        workers.push(WorkerTruth {
            worker_id: i,
            cost_factor,
            quality: QualityDistribution::Beta {
                mean,
                concentration: spec.quality_concentration,
            },
        });
        let subsets: Vec<Vec<usize>> = if pool.len() < lo {
            vec![pool.clone()]
        } else {
            let max = hi.min(pool.len());
            (0..spec.options_per_worker)
                .map(|_| {
                    let size = rng.random_range(lo..=max);
                    let mut ids: Vec<usize> = index::sample(&mut rng, pool.len(), size)
                        .into_iter()
                        .map(|p| pool[p])
                        .collect();
                    ids.sort_unstable();
                    ids
                })
                .collect()
        };
        for (l, task_ids) in subsets.into_iter().enumerate() {
            options.push(WorkerOption {
                worker_id: i,
                option_id: l,
                cost: cost_factor * task_ids.len() as f64,
                task_ids,
            });
        }
    }

    let raw: Vec<f64> = (0..spec.num_tasks).map(|_| open_unit(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let tasks = raw
        .iter()
        .enumerate()
        .map(|(id, w)| Task {
            id,
            initial_weight: w / total,
        })
        .collect();

    let scenario = Scenario::new(tasks, workers, options, hyper, spec.seed)?;
    Ok((scenario, kept))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haversine_known_distance() {
        // One degree of latitude on the reference sphere.
        let d = haversine_m(41.0, 12.0, 42.0, 12.0);
        assert!((d - EARTH_RADIUS_M * std::f64::consts::PI / 180.0).abs() < 1e-6);
        assert_eq!(haversine_m(41.9, 12.5, 41.9, 12.5), 0.0);
    }

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1700000000"), Some(1_700_000_000.0));
        assert_eq!(parse_timestamp("1970-01-01T00:01:00Z"), Some(60.0));
        assert_eq!(parse_timestamp("1970-01-01 00:00:02.5"), Some(2.5));
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn parse_examples() {
        let pts = parse_trace_str("a,10,41.9,12.5\nb,5,41.8,12.4\na,3,41.7,12.3\n").unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].entity_id, "a");
        assert_eq!(pts[0].timestamp, 3.0);
        assert_eq!(pts[1].timestamp, 10.0);
        assert_eq!(pts[2].entity_id, "b");

        let with_header = "entity_id,timestamp,latitude,longitude\na,1,41.9,12.5\n";
        assert_eq!(parse_trace_str(with_header).unwrap().len(), 1);

        // 1 bad row in 101 is within the 1% allowance... of 100 rows exactly it is not exceeded.
        let mut text = String::new();
        for i in 0..100 {
            text.push_str(&format!("e{},{i},41.9,12.5\n", i % 3));
        }
        text.push_str("x,1,95.0,12.5\n");
        assert_eq!(parse_trace_str(&text).unwrap().len(), 100);
        text.push_str("y,1,41.0,200.0\n");
        let err = parse_trace_str(&text).unwrap_err();
        assert!(err.contains("101") && err.contains("102"), "{err}");

        assert!(parse_trace_str("").is_err());
        assert!(parse_trace_str("entity_id,timestamp,latitude,longitude\n").is_err());
    }

    #[test]
    fn spec_defaults() {
        let spec = ScenarioSpec::default();
        assert_eq!(spec.k(), 17);
        let h = spec.hyperparameters();
        assert_eq!((h.kappa, h.gamma, h.lambda, h.r, h.budget), (0.4, 1.0, 5.0, 2, 850.0));
        assert_eq!((spec.num_tasks, spec.num_workers), (300, 50));
        let bad = ScenarioSpec {
            workers_per_round: Some(51),
            ..ScenarioSpec::default()
        };
        assert!(bad.validate().is_err());
        let bad = ScenarioSpec {
            option_size_range: (10, 5),
            ..ScenarioSpec::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn with_param_overrides() {
        let spec = ScenarioSpec::default();
        assert_eq!(spec.with_param(SweepParam::K, 10.0).unwrap().k(), 10);
        assert_eq!(spec.with_param(SweepParam::Budget, 300.0).unwrap().budget, 300.0);
        assert!(spec.with_param(SweepParam::R, 2.5).is_err());
    }
}
