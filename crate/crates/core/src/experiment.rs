//! Config-driven experiment runner.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::angle::{AngleMap, Family, MapDescriptor};
use crate::error::{Error, Result};
use crate::grid::FiberGrid;
use crate::homogeneous::{
    birkhoff_ensemble, correlation, induced_angle_grid, stream_rng, trajectory, ModelConfig, SkewState,
};
use crate::lab::{
    atom_spectrum, cantor_obstruction, cantor_transform_modulus, decay_characters, decay_rate,
    density_one_estimate, orbit_distances, random_map, registry, weyl_pair_estimate, weyl_statistic,
};
use crate::measure::FiberedMeasure;
use crate::report::{character_label, write_atomic, OutputDir, Summary};

/// Environment variable read by the binary to size the worker pool.
pub const THREADS_ENV: &str = "FIBERWISE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Orbit,
    Weyl,
    Atoms,
    Density,
    Cantor,
    Decay,
    HomogAsynch,
    HomogBirkhoff,
    HomogMixing,
    MonoidSelftest,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Self::Orbit,
        Self::Weyl,
        Self::Atoms,
        Self::Density,
        Self::Cantor,
        Self::Decay,
        Self::HomogAsynch,
        Self::HomogBirkhoff,
        Self::HomogMixing,
        Self::MonoidSelftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Orbit => "orbit",
            Self::Weyl => "weyl",
            Self::Atoms => "atoms",
            Self::Density => "density",
            Self::Cantor => "cantor",
            Self::Decay => "decay",
            Self::HomogAsynch => "homog-asynch",
            Self::HomogBirkhoff => "homog-birkhoff",
            Self::HomogMixing => "homog-mixing",
            Self::MonoidSelftest => "monoid-selftest",
        }
    }

    fn is_homogeneous(self) -> bool {
        matches!(self, Self::HomogAsynch | Self::HomogBirkhoff | Self::HomogMixing)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Everything a run depends on. Unset numeric fields take per-experiment
/// defaults at dispatch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub map: Option<MapDescriptor>,
    pub model: ModelConfig,
    /// Master seed; overrides `model.seed` when set.
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Grid size.
    pub q: Option<usize>,
    /// Base-frequency truncation.
    pub n_max: Option<usize>,
    /// Fiber-frequency truncation.
    pub m_max: Option<usize>,
    /// Orbit length, Weyl horizon or density horizon.
    pub n: Option<usize>,
    /// Birkhoff horizon.
    pub t: Option<usize>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub threshold: Option<f64>,
    pub characters: Option<Vec<Vec<i64>>>,
    pub n_base: i64,
    pub k_max: Option<u32>,
    pub depth: Option<u32>,
    pub k_list: Option<Vec<i64>>,
    pub lag: Option<usize>,
    /// Monte Carlo sample count (pairs, ensemble size or random triples).
    pub samples: Option<usize>,
    pub starts: Option<usize>,
    pub trajectory_steps: Option<usize>,
    pub min_density: Option<f64>,
    pub expected_density: Option<f64>,
    pub s_max: Option<f64>,
    pub decay_constant: Option<f64>,
    pub decay_ratio_max: Option<f64>,
    pub expect_asynchronous: Option<bool>,
    pub median_max: Option<f64>,
    pub correlation_max: Option<f64>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse a `key=value` override value: JSON when it parses, string otherwise.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(bad(format!("malformed override key `{key}`")));
        }
        let obj = node
            .as_object_mut()
            .ok_or_else(|| bad(format!("override `{key}` descends into a non-object")))?;
        if k + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one part")
}

impl ExperimentConfig {
    /// File contents (or defaults) with `key=value` overrides applied on top.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut root = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<Value>(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
            }
            None => Value::Object(Map::new()),
        };
        if !root.is_object() {
            return Err(bad("config file must hold a JSON object"));
        }
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| bad(format!("override `{item}` is not key=value")))?;
            set_path(&mut root, key.trim(), override_value(raw.trim()))?;
        }
        serde_json::from_value(root).map_err(|e| bad(e.to_string()))
    }

    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(self.model.seed)
    }

    pub fn effective_model(&self) -> ModelConfig {
        ModelConfig { seed: self.effective_seed(), ..self.model.clone() }
    }

    pub fn output_dir(&self) -> PathBuf {
        match (&self.out, self.experiment) {
            (Some(p), _) => p.clone(),
            (None, Some(e)) => PathBuf::from("runs").join(e.name()),
            (None, None) => PathBuf::from("runs"),
        }
    }

    fn experiment(&self) -> Result<Experiment> {
        self.experiment.ok_or_else(|| bad("no experiment named"))
    }

    fn default_map(e: Experiment) -> AngleMap {
        match e {
            Experiment::Orbit => AngleMap::identity(),
            Experiment::Decay => AngleMap::smooth_circle(0.5).expect("valid eps"),
            _ => AngleMap::cantor(24).expect("valid depth"),
        }
    }

    fn angle_map(&self, e: Experiment) -> Result<AngleMap> {
        match &self.map {
            Some(d) => d.build().map_err(|e| match e {
                Error::Config(m) => Error::Config(m),
                other => bad(format!("map: {other}")),
            }),
            None => Ok(Self::default_map(e)),
        }
    }

    fn default_characters(&self, e: Experiment) -> Vec<Vec<i64>> {
        match e {
            Experiment::HomogAsynch => vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            Experiment::HomogBirkhoff | Experiment::HomogMixing => vec![vec![1, 0]],
            _ => vec![vec![1]],
        }
    }

    fn characters(&self, e: Experiment) -> Vec<Vec<i64>> {
        self.characters.clone().unwrap_or_else(|| self.default_characters(e))
    }

    fn q(&self, e: Experiment) -> usize {
        self.q.unwrap_or(match e {
            Experiment::Cantor | Experiment::Decay => 1 << 16,
            Experiment::HomogAsynch => 100_000,
            Experiment::MonoidSelftest => 512,
            Experiment::Weyl => 8192,
            _ => 4096,
        })
    }

    /// Check every field the named experiment reads.
    pub fn validate(&self) -> Result<()> {
        let e = self.experiment()?;
        if self.q == Some(0) {
            return Err(bad("q must be at least 1"));
        }
        for (name, v) in [("n", self.n), ("t", self.t), ("samples", self.samples), ("starts", self.starts)] {
            if v == Some(0) {
                return Err(bad(format!("{name} must be at least 1")));
            }
        }
        if let Some(eps) = self.eps {
            if !(eps > 0.0) {
                return Err(bad("eps must be positive"));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 0.5) {
                return Err(bad("delta must lie in (0, 0.5)"));
            }
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t < 1.0) {
                return Err(bad("threshold must lie in (0, 1)"));
            }
        }
        let dim = if e.is_homogeneous() {
            self.effective_model().validate().map_err(|err| bad(format!("model: {err}")))?;
            2
        } else {
            self.angle_map(e)?.dim()
        };
        let chars = self.characters(e);
        if chars.is_empty() {
            return Err(bad("characters must be nonempty"));
        }
        for m in &chars {
            let want = if e == Experiment::Cantor { 1 } else { dim };
            if m.len() != want {
                return Err(bad(format!("character {m:?} must have {want} entries")));
            }
            if m.iter().all(|&c| c == 0) {
                return Err(bad("characters must be nontrivial"));
            }
        }
        match e {
            Experiment::Cantor => {
                let (k_max, depth) = (self.k_max.unwrap_or(6), self.depth.unwrap_or(24));
                if k_max + 2 > depth {
                    return Err(bad(format!("k_max = {k_max} needs depth >= {}", k_max + 2)));
                }
                if !(8..=53).contains(&depth) {
                    return Err(bad("depth must lie in [8, 53]"));
                }
            }
            Experiment::Decay => {
                let f = self.angle_map(e)?;
                if f.dim() != 1 || f.derivative_lower_bound().is_none() {
                    return Err(bad(format!("{} map is not eligible for decay", f.family_name())));
                }
                if self.k_list.as_ref().is_some_and(|k| k.is_empty()) {
                    return Err(bad("k_list must be nonempty"));
                }
            }
            Experiment::Weyl if self.samples == Some(1) => return Err(bad("samples must be at least 2")),
            _ => {}
        }
        Ok(())
    }
}

/// One verdict of a run, named after the invariant it tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value <= bound, value, bound }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), passed: value >= bound, value, bound }
    }

    fn holds(name: impl Into<String>, ok: bool) -> Self {
        let v = if ok { 1.0 } else { 0.0 };
        Self { name: name.into(), passed: ok, value: v, bound: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
    pub passed: bool,
}

struct Outcome {
    params: Value,
    checks: Vec<Check>,
    key_values: BTreeMap<String, f64>,
}

impl Outcome {
    fn new(params: Value) -> Self {
        Self { params, checks: Vec::new(), key_values: BTreeMap::new() }
    }

    fn key(&mut self, k: impl Into<String>, v: f64) {
        self.key_values.insert(k.into(), v);
    }
}

/// Validate, dispatch, write outputs and the manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let e = cfg.experiment()?;
    let started = Instant::now();
    let mut out = OutputDir::create(cfg.output_dir())?;
    log::info!("running {e} into {}", out.root().display());
    let outcome = match e {
        Experiment::Orbit => orbit(cfg, &mut out)?,
        Experiment::Weyl => weyl(cfg, &mut out)?,
        Experiment::Atoms => atoms(cfg, &mut out)?,
        Experiment::Density => density(cfg, &mut out)?,
        Experiment::Cantor => cantor(cfg, &mut out)?,
        Experiment::Decay => decay(cfg, &mut out)?,
        Experiment::HomogAsynch => homog_asynch(cfg, &mut out)?,
        Experiment::HomogBirkhoff => homog_birkhoff(cfg, &mut out)?,
        Experiment::HomogMixing => homog_mixing(cfg, &mut out)?,
        Experiment::MonoidSelftest => monoid_selftest(cfg, &mut out)?,
    };
    let passed = outcome.checks.iter().all(|c| c.passed);
    let summary = Summary {
        experiment: e.name().to_string(),
        params: outcome.params,
        seed: cfg.effective_seed(),
        verdict: passed,
        key_values: outcome.key_values,
    };
    out.json("summary.json", &summary)?;
    let manifest = RunManifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        checks: outcome.checks,
        outputs: out.files().to_vec(),
        passed,
    };
    write_atomic(&out.root().join("manifest.json"), &serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

fn midpoint(q: usize) -> Result<Arc<FiberGrid>> {
    Ok(Arc::new(FiberGrid::midpoint(q)?))
}

/// `Some(s)` for a one-dimensional linear map with integer slope `s != 0`.
fn integer_slope(f: &AngleMap) -> Option<i128> {
    match f.family() {
        Family::Linear { slope, .. } if slope.len() == 1 && slope[0].fract() == 0.0 && slope[0] != 0.0 => {
            Some(slope[0] as i128 * f.multiplier())
        }
        _ => None,
    }
}

fn orbit(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Orbit;
    let f = cfg.angle_map(e)?;
    let (q, n, n_max, m_max) = (cfg.q(e), cfg.n.unwrap_or(100), cfg.n_max.unwrap_or(8), cfg.m_max.unwrap_or(8));
    let eps = cfg.eps.unwrap_or(0.01);
    let grid = midpoint(q)?;
    let d0 = FiberedMeasure::graph(&AngleMap::zero(f.dim()), grid, m_max)?;
    let ns: Vec<i64> = (1..=n as i64).collect();
    let report = orbit_distances(&f, &d0, &ns, n_max)?;
    out.curve("orbit.csv", ["n", "distance"], ns.iter().copied().zip(report.distances.iter().copied()))?;
    let mut o = Outcome::new(json!({"q": q, "n": n, "n_max": n_max, "m_max": m_max, "eps": eps, "map": report.params.map}));
    o.checks.push(Check::holds(
        "distances_nonnegative",
        report.distances.iter().all(|d| *d >= 0.0) && report.distances.len() == ns.len(),
    ));
    if let Some(s) = integer_slope(&f) {
        let beyond = ns
            .iter()
            .zip(&report.distances)
            .filter(|(k, _)| (**k as i128 * s).unsigned_abs() > n_max as u128)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max);
        o.checks.push(Check::at_most("vanishes_beyond_truncation", beyond, 1e-12));
    }
    let members = report.distances.iter().filter(|d| **d < eps).count();
    o.key("density", members as f64 / n as f64);
    o.key("max_distance", report.distances.iter().copied().fold(0.0, f64::max));
    o.key("min_distance", report.distances.iter().copied().fold(f64::INFINITY, f64::min));
    Ok(o)
}

fn weyl(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Weyl;
    let f = cfg.angle_map(e)?;
    let (q, n) = (cfg.q(e), cfg.n.unwrap_or(5000));
    let pairs = cfg.samples.unwrap_or(20_000);
    let grid = midpoint(q)?;
    let chars = cfg.characters(e);
    let mut o = Outcome::new(json!({"q": q, "n": n, "n_base": cfg.n_base, "pairs": pairs, "characters": chars, "map": f.descriptor()}));
    for m in &chars {
        let label = character_label(m);
        let r = weyl_statistic(&f, &grid, m, n, cfg.n_base)?;
        out.curve(&format!("weyl_m{label}.csv"), ["N", "S_N"], r.n_values.iter().copied().zip(r.s_values.iter().copied()))?;
        o.checks.push(Check::holds(
            format!("s_in_unit_interval_m{label}"),
            r.s_values.iter().all(|s| (-1e-12..=1.0 + 1e-12).contains(s)),
        ));
        let (mean, se) = weyl_pair_estimate(&f, &grid, m, n, cfg.n_base, pairs, cfg.effective_seed())?;
        o.checks.push(Check::at_most(format!("pair_integral_agrees_m{label}"), (mean - r.limit).abs(), 3.0 * se + 1e-12));
        if let Some(bound) = cfg.s_max {
            o.checks.push(Check::at_most(format!("weyl_below_m{label}"), r.limit, bound));
        }
        o.key(format!("s_limit_m{label}"), r.limit);
        o.key(format!("pair_mean_m{label}"), mean);
        o.key(format!("pair_std_err_m{label}"), se);
    }
    Ok(o)
}

fn write_atoms(out: &mut OutputDir, label: &str, atoms: &[crate::lab::Atom]) -> Result<()> {
    out.table(
        &format!("atoms_m{label}.csv"),
        &["location", "mass"],
        atoms.iter().map(|a| vec![a.location.to_string(), a.mass.to_string()]),
    )
}

fn atoms(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Atoms;
    let f = cfg.angle_map(e)?;
    let q = cfg.q(e);
    let (delta, threshold) = (cfg.delta.unwrap_or(1e-3), cfg.threshold.unwrap_or(0.05));
    let expect = cfg.expect_asynchronous.unwrap_or(true);
    let grid = midpoint(q)?;
    let chars = cfg.characters(e);
    let mut o = Outcome::new(json!({"q": q, "delta": delta, "threshold": threshold, "characters": chars, "map": f.descriptor()}));
    for m in &chars {
        let label = character_label(m);
        let r = atom_spectrum(&f, &grid, m, delta, threshold)?;
        write_atoms(out, &label, &r.atoms)?;
        o.checks.push(Check::holds(format!("asynchronous_m{label}"), r.asynchronous == expect));
        o.key(format!("max_window_mass_m{label}"), r.max_window_mass);
        o.key(format!("squared_atom_mass_m{label}"), r.squared_atom_mass());
    }
    Ok(o)
}

fn is_cantor(f: &AngleMap) -> bool {
    matches!(f.family(), Family::CantorInverseDevil { .. }) && f.multiplier() == 1
}

fn density(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Density;
    let f = cfg.angle_map(e)?;
    let (q, n, n_max, m_max) = (cfg.q(e), cfg.n.unwrap_or(2000), cfg.n_max.unwrap_or(8), cfg.m_max.unwrap_or(8));
    let eps = cfg.eps.unwrap_or(0.05);
    let r = density_one_estimate(&f, midpoint(q)?, eps, n, n_max, m_max)?;
    out.table(
        "density.csv",
        &["n", "distance", "member"],
        r.distances.iter().enumerate().map(|(k, d)| {
            let n = k as i64 + 1;
            vec![n.to_string(), d.to_string(), u8::from(r.is_member(n)).to_string()]
        }),
    )?;
    let mut o = Outcome::new(json!({"q": q, "n": n, "n_max": n_max, "m_max": m_max, "eps": eps, "map": f.descriptor()}));
    o.checks.push(Check::at_least("density_lower_bound", r.density, cfg.min_density.unwrap_or(0.9)));
    if let Some(want) = cfg.expected_density {
        o.checks.push(Check::at_most("density_matches", (r.density - want).abs(), 1e-12));
    }
    if is_cantor(&f) {
        let tight = cantor_transform_modulus(1, 40) * 0.5 * (1.0 - 1e-2);
        let mut worst = f64::INFINITY;
        let mut p = 1usize;
        while p <= n {
            worst = worst.min(r.distances[p - 1]);
            p *= 3;
        }
        o.checks.push(Check::at_least("powers_of_three_exceptional", worst, tight));
        o.key("min_power_of_three_distance", worst);
    }
    o.key("density", r.density);
    o.key("members", r.members.len() as f64);
    Ok(o)
}

fn cantor(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Cantor;
    let m = cfg.characters(e)[0][0];
    let (k_max, depth, q) = (cfg.k_max.unwrap_or(6), cfg.depth.unwrap_or(24), cfg.q(e));
    let moduli = cantor_obstruction(m, k_max, depth, q)?;
    out.curve("cantor.csv", ["k", "modulus"], moduli.iter().copied().enumerate())?;
    let hi = moduli.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let product = cantor_transform_modulus(m, 40);
    let gap = moduli.iter().map(|v| (v - product).abs()).fold(0.0, f64::max);
    let mut o = Outcome::new(json!({"m": m, "k_max": k_max, "depth": depth, "q": q}));
    o.checks.push(Check::at_most("modulus_constant_in_k", hi - lo, 1e-3));
    o.checks.push(Check::at_most("matches_product_formula", gap, 1e-3));
    o.key("modulus_k0", moduli[0]);
    o.key("product_formula", product);
    o.key("spread", hi - lo);
    Ok(o)
}

fn decay(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::Decay;
    let f = cfg.angle_map(e)?;
    let q = cfg.q(e);
    let k_list = cfg.k_list.clone().unwrap_or_else(|| vec![25, 50, 100, 200]);
    let (n_range, m_range) = (cfg.n_max.unwrap_or(3) as i64, cfg.m_max.unwrap_or(3) as i64);
    let chars = decay_characters(n_range, m_range);
    let grid = midpoint(q)?;
    let maxima = decay_rate(&f, &grid, &k_list, &chars)?;
    out.curve("decay.csv", ["k", "max_modulus"], maxima.iter().copied())?;
    let scaled: Vec<f64> = maxima.iter().map(|(k, v)| *k as f64 * v).collect();
    let constant = cfg.decay_constant.unwrap_or(scaled[0]);
    let top = scaled.iter().copied().fold(0.0, f64::max);
    let bottom = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if bottom > 0.0 { top / bottom } else { f64::INFINITY };
    let mut o = Outcome::new(json!({"q": q, "k_list": k_list, "n_range": n_range, "m_range": m_range, "map": f.descriptor(), "constant": constant}));
    o.checks.push(Check::at_most("scaled_maximum_bounded", top, constant * (1.0 + 1e-9)));
    o.checks.push(Check::at_most("scaled_maximum_ratio", ratio, cfg.decay_ratio_max.unwrap_or(3.0)));
    for ((k, _), s) in maxima.iter().zip(&scaled) {
        o.key(format!("k_times_max_{k}"), *s);
    }
    o.key("ratio", ratio);
    Ok(o)
}

fn homog_asynch(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::HomogAsynch;
    let model = cfg.effective_model();
    let q = cfg.q(e);
    let (delta, threshold) = (cfg.delta.unwrap_or(1e-3), cfg.threshold.unwrap_or(0.05));
    let (n, s_max) = (cfg.n.unwrap_or(2000), cfg.s_max.unwrap_or(0.02));
    let (grid, f) = induced_angle_grid(&model, q)?;
    let chars = cfg.characters(e);
    let mut o = Outcome::new(json!({"q": q, "delta": delta, "threshold": threshold, "n": n, "s_max": s_max, "characters": chars, "model": model}));
    for m in &chars {
        let label = character_label(m);
        let atoms = atom_spectrum(&f, &grid, m, delta, threshold)?;
        write_atoms(out, &label, &atoms.atoms)?;
        let w = weyl_statistic(&f, &grid, m, n, 0)?;
        out.curve(&format!("weyl_m{label}.csv"), ["N", "S_N"], w.n_values.iter().copied().zip(w.s_values.iter().copied()))?;
        o.checks.push(Check::at_most(format!("asynchronous_m{label}"), atoms.max_window_mass, threshold));
        o.checks.push(Check::at_most(format!("weyl_below_m{label}"), w.limit, s_max));
        o.key(format!("max_window_mass_m{label}"), atoms.max_window_mass);
        o.key(format!("s_limit_m{label}"), w.limit);
    }
    Ok(o)
}

fn homog_birkhoff(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::HomogBirkhoff;
    let model = cfg.effective_model();
    let (t, starts) = (cfg.t.unwrap_or(100_000), cfg.starts.unwrap_or(20));
    let bound = cfg.median_max.unwrap_or(0.05);
    let m = cfg.characters(e)[0].clone();
    let m = [m[0], m[1]];
    let averages = birkhoff_ensemble(&model, t, m, starts)?;
    out.table(
        "birkhoff.csv",
        &["start", "re", "im", "modulus"],
        averages.iter().enumerate().map(|(j, a)| vec![j.to_string(), a.re.to_string(), a.im.to_string(), a.norm().to_string()]),
    )?;
    let steps = cfg.trajectory_steps.unwrap_or(1000);
    let s0 = SkewState::random(&mut stream_rng(model.seed, 0))?;
    out.trajectory("trajectory.csv", &trajectory(&s0, &model, steps)?)?;
    let mut moduli: Vec<f64> = averages.iter().map(|a| a.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let mid = moduli.len() / 2;
    let median = if moduli.len() % 2 == 0 { 0.5 * (moduli[mid - 1] + moduli[mid]) } else { moduli[mid] };
    let mut o = Outcome::new(json!({"t": t, "starts": starts, "m": m, "trajectory_steps": steps, "model": model}));
    o.checks.push(Check::at_most("median_birkhoff_modulus", median, bound));
    o.key("median_modulus", median);
    o.key("max_modulus", *moduli.last().expect("starts >= 1"));
    Ok(o)
}

fn homog_mixing(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::HomogMixing;
    let model = cfg.effective_model();
    let (lag, samples) = (cfg.lag.unwrap_or(30), cfg.samples.unwrap_or(100_000));
    let bound = cfg.correlation_max.unwrap_or(0.03);
    let m = cfg.characters(e)[0].clone();
    let m = [m[0], m[1]];
    let at_zero = correlation(&model, m, m, 0, samples)?;
    let at_lag = correlation(&model, m, m, lag, samples)?;
    out.table(
        "correlation.csv",
        &["lag", "re", "im", "modulus", "std_err"],
        [(0, at_zero), (lag, at_lag)].iter().map(|(k, c)| {
            vec![k.to_string(), c.re.to_string(), c.im.to_string(), c.value().norm().to_string(), c.std_err.to_string()]
        }),
    )?;
    let mut o = Outcome::new(json!({"lag": lag, "samples": samples, "m": m, "model": model}));
    o.checks.push(Check::at_most("lag_zero_is_one", (at_zero.value() - 1.0).norm(), 3.0 * at_zero.std_err + 1e-12));
    o.checks.push(Check::at_most("correlation_decays", at_lag.value().norm(), bound));
    o.key("modulus_lag", at_lag.value().norm());
    o.key("std_err_lag", at_lag.std_err);
    Ok(o)
}

fn max_diff(a: &FiberedMeasure, b: &FiberedMeasure) -> f64 {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest coefficientwise error of each monoid law over seeded random maps.
pub fn monoid_law_errors(q: usize, radius: usize, triples: usize, seed: u64) -> Result<Vec<(&'static str, f64)>> {
    let grid = midpoint(q)?;
    let mut rng = stream_rng(seed, 0);
    let graph = |f: &AngleMap| FiberedMeasure::graph(f, grid.clone(), radius);
    let d0 = graph(&AngleMap::zero(1))?;
    let lambda = FiberedMeasure::haar(grid.clone(), 1, radius)?;
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut note = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for _ in 0..triples {
        let maps = [random_map(&mut rng, &grid)?, random_map(&mut rng, &grid)?, random_map(&mut rng, &grid)?];
        let [a, b, c] = [graph(&maps[0])?, graph(&maps[1])?, graph(&maps[2])?];
        note("commutativity", max_diff(&a.convolve(&b)?, &b.convolve(&a)?));
        note("associativity", max_diff(&a.convolve(&b)?.convolve(&c)?, &a.convolve(&b.convolve(&c)?)?));
        note("identity", max_diff(&a.convolve(&d0)?, &a));
        note("absorption", max_diff(&a.convolve(&lambda)?, &lambda));
        note("inverse", max_diff(&a.convolve(&graph(&maps[0].scale(-1))?)?, &d0));
        note("power", max_diff(&a.power(3)?, &graph(&maps[0].scale(3))?));
    }
    let maps = registry(&grid)?;
    for _ in 0..20 {
        use rand::Rng;
        let (i, j) = (rng.gen_range(0..maps.len()), rng.gen_range(0..maps.len()));
        let (f, g) = (&maps[i].1, &maps[j].1);
        note("homomorphism", max_diff(&graph(&f.sum(g, &grid)?)?, &graph(f)?.convolve(&graph(g)?)?));
    }
    Ok(worst.into_iter().collect())
}

fn monoid_selftest(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome> {
    let e = Experiment::MonoidSelftest;
    let (q, radius, triples) = (cfg.q(e), cfg.m_max.unwrap_or(8), cfg.samples.unwrap_or(50));
    let errors = monoid_law_errors(q, radius, triples, cfg.effective_seed())?;
    out.table(
        "selftest.csv",
        &["check", "max_error", "passed"],
        errors.iter().map(|(k, v)| vec![k.to_string(), v.to_string(), u8::from(*v <= 1e-12).to_string()]),
    )?;
    let mut o = Outcome::new(json!({"q": q, "m_max": radius, "triples": triples}));
    for (k, v) in errors {
        o.checks.push(Check::at_most(k, v, 1e-12));
        o.key(k, v);
    }
    Ok(o)
}
