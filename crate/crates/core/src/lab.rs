//! Experiments on the orbit `n -> D_{nf}` and on asynchronicity.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::angle::{pushforward_samples, wrap, AngleMap, MapDescriptor, PhaseTable};
use crate::error::{param, Error, Result};
use crate::grid::FiberGrid;
use crate::homogeneous::stream_rng;
use crate::measure::{base_characters, FiberedMeasure};

#[derive(Debug, Clone, Serialize)]
pub struct OrbitParams {
    pub n_max: usize,
    pub m_max: usize,
    pub grid: String,
    pub map: MapDescriptor,
}

/// Truncated distances from `D_{nf} * mu_0` to `lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub n_values: Vec<i64>,
    pub distances: Vec<f64>,
    pub params: OrbitParams,
}

/// `distance(D_{nf} * mu0, lambda)` for every `n` in `n_set`. Each `D_{nf}`
/// is built directly from `scale(n, f)`.
pub fn orbit_distances(f: &AngleMap, mu0: &FiberedMeasure, n_set: &[i64], n_max: usize) -> Result<OrbitReport> {
    if f.dim() != mu0.dim() {
        return Err(Error::Incompatible(format!("map into T^{} vs measure on T^{}", f.dim(), mu0.dim())));
    }
    let grid = mu0.grid().clone();
    let lambda = FiberedMeasure::haar(grid.clone(), mu0.dim(), mu0.radius())?;
    let plain = mu0.is_identity();
    let distances = n_set
        .par_iter()
        .map(|&n| {
            let graph = FiberedMeasure::graph(&f.scale(n), grid.clone(), mu0.radius())?;
            let moved = if plain { graph } else { graph.convolve(mu0)? };
            moved.distance(&lambda, n_max)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitReport {
        n_values: n_set.to_vec(),
        distances,
        params: OrbitParams {
            n_max: if grid.has_circle() { n_max } else { 0 },
            m_max: mu0.radius(),
            grid: grid.id().to_string(),
            map: f.descriptor(),
        },
    })
}

/// Cesàro averages `S_N = (1/N) Σ_{n<N} |D_{nf}^(n_base, m)|^2`.
#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub m: Vec<i64>,
    pub n_base: i64,
    pub n_values: Vec<usize>,
    pub s_values: Vec<f64>,
    /// `S_N` at the largest `N`.
    pub limit: f64,
}

/// `1, 2, 5, 10, 20, 50, ...` capped by and always ending in `n`.
pub fn log_ladder(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut decade = 1usize;
    'outer: loop {
        for step in [1, 2, 5] {
            let v = step * decade;
            if v >= n {
                break 'outer;
            }
            out.push(v);
        }
        decade *= 10;
    }
    out.push(n);
    out
}

fn check_character(m: &[i64]) -> Result<()> {
    if m.iter().all(|&c| c == 0) {
        return param("a nontrivial character is required");
    }
    Ok(())
}

/// Rows per block in [`coefficient_squares`]; each block restarts from an
/// exactly reduced phase so rounding drift stays below `BLOCK * 1e-16`.
const BLOCK: usize = 64;

/// `|D_{nf}^(n_base, m)|^2` for `n = 0..count`.
pub fn coefficient_squares(f: &AngleMap, grid: &FiberGrid, m: &[i64], count: usize, n_base: i64) -> Result<Vec<f64>> {
    let phases = f.phases(grid, m)?;
    let base = base_characters(grid, n_base)?;
    let steps: Vec<Complex64> = (0..grid.len()).map(|i| Complex64::cis(TAU * phases.scaled(1, i))).collect();
    let blocks: Vec<Vec<f64>> = (0..count.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let first = b * BLOCK;
            let rows = BLOCK.min(count - first);
            let mut acc = [Complex64::new(0.0, 0.0); BLOCK];
            for (i, e) in base.iter().enumerate() {
                let mut z = e * Complex64::cis(TAU * phases.scaled(first as i64, i));
                for slot in acc.iter_mut().take(rows) {
                    *slot += z;
                    z *= steps[i];
                }
            }
            acc[..rows].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();
    Ok(blocks.concat())
}

pub fn weyl_statistic(f: &AngleMap, grid: &FiberGrid, m: &[i64], n: usize, n_base: i64) -> Result<WeylReport> {
    check_character(m)?;
    if n == 0 {
        return param("Weyl statistic needs N >= 1");
    }
    let squares = coefficient_squares(f, grid, m, n, n_base)?;
    let ladder = log_ladder(n);
    let mut s_values = Vec::with_capacity(ladder.len());
    let mut acc = 0.0;
    let mut done = 0;
    for &rung in &ladder {
        acc += squares[done..rung].iter().sum::<f64>();
        done = rung;
        s_values.push(acc / rung as f64);
    }
    let limit = *s_values.last().expect("ladder is nonempty");
    Ok(WeylReport { m: m.to_vec(), n_base, n_values: ladder, s_values, limit })
}

/// Monte Carlo estimate of the pair integral
/// `∫∫ e^{2πi n_base (x - x')} (1/N) Σ_{n<N} χ_m(f(x) - f(x'))^n dL(x) dL(x')`
/// over node pairs drawn from the grid weights. Returns `(mean, std_err)`.
pub fn weyl_pair_estimate(
    f: &AngleMap,
    grid: &FiberGrid,
    m: &[i64],
    n: usize,
    n_base: i64,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_character(m)?;
    if n_base != 0 && !grid.has_circle() {
        return Err(Error::UnsupportedCharacter("base frequency needs circle coordinates".into()));
    }
    if pairs < 2 {
        return param("pair estimate needs at least two pairs");
    }
    let phases = f.phases(grid, m)?.values();
    let pick = WeightedIndex::new(grid.weights()).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut rng = stream_rng(seed, 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..pairs {
        let (i, j) = (pick.sample(&mut rng), pick.sample(&mut rng));
        let mut value = cesaro_power_mean(wrap(phases[i] - phases[j]), n);
        if n_base != 0 {
            let (xi, xj) = (grid.coord(i).unwrap(), grid.coord(j).unwrap());
            value *= Complex64::cis(TAU * wrap(n_base as f64 * (xi - xj)));
        }
        sum += value.re;
        sq += value.re * value.re;
    }
    let k = pairs as f64;
    let mean = sum / k;
    let var = (sq / k - mean * mean).max(0.0) * k / (k - 1.0);
    Ok((mean, (var / k).sqrt()))
}

/// `(1/N) Σ_{n<N} z^n` for `z = e^{2πi t}`, by the geometric-series formula.
fn cesaro_power_mean(t: f64, n: usize) -> Complex64 {
    let z = Complex64::cis(TAU * t);
    let gap = Complex64::new(1.0, 0.0) - z;
    if gap.norm() < 1e-12 {
        return Complex64::new(1.0, 0.0);
    }
    let zn = Complex64::cis(TAU * wrap(n as f64 * t));
    (Complex64::new(1.0, 0.0) - zn) / (gap * n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Sliding-window atom search on `(χ_m ∘ f)_* L`.
#[derive(Debug, Clone, Serialize)]
pub struct AtomReport {
    pub m: Vec<i64>,
    pub delta: f64,
    pub threshold: f64,
    pub max_window_mass: f64,
    pub atoms: Vec<Atom>,
    /// No window of width `delta` carries more than `threshold`.
    pub asynchronous: bool,
}

impl AtomReport {
    pub fn squared_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass * a.mass).sum()
    }
}

/// Heaviest closed circular window `[v, v + delta]`; returns `(start, end, mass)`
/// as indices into the doubled sorted sequence.
fn heaviest_window(sorted: &[(f64, f64)], delta: f64) -> (usize, usize, f64) {
    let n = sorted.len();
    let value = |k: usize| if k < n { sorted[k].0 } else { sorted[k - n].0 + 1.0 };
    let weight = |k: usize| sorted[k % n].1;
    let (mut best, mut end, mut mass) = ((0, 0, 0.0), 0usize, 0.0);
    for start in 0..n {
        if end < start {
            end = start;
            mass = 0.0;
        }
        while end < start + n && value(end) <= value(start) + delta {
            mass += weight(end);
            end += 1;
        }
        if mass > best.2 {
            best = (start, end, mass);
        }
        mass -= weight(start);
    }
    best
}

pub fn atom_spectrum(f: &AngleMap, grid: &FiberGrid, m: &[i64], delta: f64, threshold: f64) -> Result<AtomReport> {
    if !(delta > 0.0 && delta < 0.5) {
        return param(format!("window width must lie in (0, 0.5), got {delta}"));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return param(format!("atom threshold must lie in (0, 1), got {threshold}"));
    }
    let mut samples = pushforward_samples(f, grid, m)?;
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (_, _, max_window_mass) = heaviest_window(&samples, delta);
    let max_window_mass = max_window_mass.min(1.0);
    let mut atoms = Vec::new();
    let mut rest = samples;
    while !rest.is_empty() {
        let (start, end, mass) = heaviest_window(&rest, delta);
        if mass <= threshold {
            break;
        }
        let n = rest.len();
        let mut moment = 0.0;
        for k in start..end {
            let shift = if k >= n { 1.0 } else { 0.0 };
            moment += rest[k % n].1 * (rest[k % n].0 + shift);
        }
        atoms.push(Atom { location: wrap(moment / mass), mass });
        let taken: Vec<usize> = (start..end).map(|k| k % n).collect();
        let mut keep = vec![true; n];
        for k in taken {
            keep[k] = false;
        }
        rest = rest.into_iter().zip(keep).filter_map(|(s, k)| k.then_some(s)).collect();
    }
    Ok(AtomReport {
        m: m.to_vec(),
        delta,
        threshold,
        max_window_mass,
        atoms,
        asynchronous: max_window_mass <= threshold,
    })
}

/// Empirical set `E ∩ [1, N] = {n : distance(D_{nf}, lambda) < eps}`.
#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    pub eps: f64,
    pub n: usize,
    pub members: Vec<i64>,
    pub density: f64,
    pub distances: Vec<f64>,
}

impl DensityReport {
    pub fn is_member(&self, n: i64) -> bool {
        self.members.binary_search(&n).is_ok()
    }
}

pub fn density_one_estimate(
    f: &AngleMap,
    grid: Arc<FiberGrid>,
    eps: f64,
    n: usize,
    n_max: usize,
    m_max: usize,
) -> Result<DensityReport> {
    if !(eps > 0.0) {
        return param("density threshold eps must be positive");
    }
    if n == 0 {
        return param("density estimate needs N >= 1");
    }
    let identity = FiberedMeasure::graph(&AngleMap::zero(f.dim()), grid, m_max)?;
    let ns: Vec<i64> = (1..=n as i64).collect();
    let report = orbit_distances(f, &identity, &ns, n_max)?;
    let members: Vec<i64> = ns
        .iter()
        .zip(&report.distances)
        .filter(|(_, d)| **d < eps)
        .map(|(n, _)| *n)
        .collect();
    Ok(DensityReport {
        eps,
        n,
        density: members.len() as f64 / n as f64,
        members,
        distances: report.distances,
    })
}

/// `|D_{3^k f}^(0, m)|` for the inverse-staircase map of depth `depth` on
/// the `q`-node midpoint grid, `k = 0..=k_max`.
pub fn cantor_obstruction(m: i64, k_max: u32, depth: u32, q: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return param("Cantor obstruction needs m != 0");
    }
    if k_max + 2 > depth {
        return param(format!("k_max = {k_max} needs depth >= {}", k_max + 2));
    }
    let grid = FiberGrid::midpoint(q)?;
    let f = AngleMap::cantor(depth)?;
    let phases = f.phases(&grid, &[m])?;
    Ok((0..=k_max)
        .map(|k| modulus_at(&grid, &phases, 3i64.pow(k)))
        .collect())
}

fn modulus_at(grid: &FiberGrid, phases: &PhaseTable, n: i64) -> f64 {
    grid.weights()
        .iter()
        .enumerate()
        .map(|(i, w)| w * Complex64::cis(TAU * phases.scaled(n, i)))
        .sum::<Complex64>()
        .norm()
}

/// `|ν^(m)| = Π_{j=1..terms} |cos(2π m / 3^j)|` for the Cantor measure ν.
pub fn cantor_transform_modulus(m: i64, terms: u32) -> f64 {
    (1..=terms)
        .map(|j| (TAU * m as f64 / 3f64.powi(j as i32)).cos().abs())
        .product()
}

/// Characters `(n, m)` with `|n| <= n_max` and `1 <= |m| <= m_max`.
pub fn decay_characters(n_max: i64, m_max: i64) -> Vec<(i64, i64)> {
    (-n_max..=n_max)
        .flat_map(|n| (-m_max..=m_max).filter(|m| *m != 0).map(move |m| (n, m)))
        .collect()
}

/// `max_{(n,m)} |D_{kf}^(n, m)|` for each `k`.
pub fn decay_rate(f: &AngleMap, grid: &FiberGrid, k_list: &[i64], chars: &[(i64, i64)]) -> Result<Vec<(i64, f64)>> {
    if f.dim() != 1 || f.derivative_lower_bound().is_none() {
        return Err(Error::Ineligible(format!(
            "{} map has no certified non-vanishing derivative",
            f.family_name()
        )));
    }
    if chars.iter().any(|(_, m)| *m == 0) {
        return param("decay characters need m != 0");
    }
    let mut tables = Vec::new();
    for &(n, m) in chars {
        tables.push((base_characters(grid, n)?, f.phases(grid, &[m])?));
    }
    Ok(k_list
        .par_iter()
        .map(|&k| {
            let worst = tables
                .iter()
                .map(|(base, phases)| {
                    base.iter()
                        .enumerate()
                        .map(|(i, e)| e * Complex64::cis(TAU * phases.scaled(k, i)))
                        .sum::<Complex64>()
                        .norm()
                })
                .fold(0.0, f64::max);
            (k, worst)
        })
        .collect())
}

/// Maps covering every family, used by property checks and self-tests.
pub fn registry(grid: &FiberGrid) -> Result<Vec<(String, AngleMap)>> {
    let third = AngleMap::tabulate_on(grid, |x| vec![if x < 1.0 / 3.0 { 0.9 } else { x }])?;
    Ok(vec![
        ("identity".into(), AngleMap::identity()),
        ("linear".into(), AngleMap::linear(vec![2.0], vec![0.1])?),
        ("smooth_circle".into(), AngleMap::smooth_circle(0.5)?),
        ("cantor".into(), AngleMap::cantor(24)?),
        ("constant".into(), AngleMap::constant(vec![0.3])?),
        (
            "piecewise_constant".into(),
            AngleMap::piecewise_constant(vec![1.0 / 3.0, 2.0 / 3.0], vec![vec![0.1], vec![0.5], vec![0.7]])?,
        ),
        ("atom_third".into(), third),
    ])
}

/// A map with random parameters drawn from one of the families.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, grid: &FiberGrid) -> Result<AngleMap> {
    let map = match rng.gen_range(0..5) {
        0 => AngleMap::linear(vec![rng.gen_range(-3i32..=3) as f64], vec![rng.gen()])?,
        1 => AngleMap::smooth_circle(rng.gen_range(-0.9..0.9))?,
        2 => AngleMap::cantor(rng.gen_range(8..=30))?.scale(rng.gen_range(1..=4)),
        3 => {
            let mut cuts: Vec<f64> = (0..rng.gen_range(1..5)).map(|_| rng.gen()).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let values = (0..=cuts.len()).map(|_| vec![rng.gen()]).collect();
            AngleMap::piecewise_constant(cuts, values)?
        }
        _ => AngleMap::tabulated((0..grid.len()).map(|_| vec![rng.gen()]).collect())?,
    };
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(q: usize) -> Arc<FiberGrid> {
        Arc::new(FiberGrid::midpoint(q).unwrap())
    }

    #[test]
    fn ladder_shape() {
        assert_eq!(log_ladder(1), vec![1]);
        assert_eq!(log_ladder(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(log_ladder(5000), vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000]);
        assert_eq!(log_ladder(7), vec![1, 2, 5, 7]);
    }

    #[test]
    fn orbit_of_identity_map_vanishes_beyond_truncation() {
        let grid = circle(4096);
        let d0 = FiberedMeasure::graph(&AngleMap::zero(1), grid, 8).unwrap();
        let ns: Vec<i64> = (1..=30).collect();
        let r = orbit_distances(&AngleMap::identity(), &d0, &ns, 8).unwrap();
        for (n, d) in r.n_values.iter().zip(&r.distances) {
            if *n > 8 {
                assert!(*d < 1e-12, "n = {n}: {d}");
            } else {
                assert!(*d > 1e-3);
            }
        }
    }

    #[test]
    fn orbit_with_nontrivial_start_uses_convolution() {
        let grid = circle(512);
        let mu0 = FiberedMeasure::graph(&AngleMap::smooth_circle(0.2).unwrap(), grid.clone(), 4).unwrap();
        let f = AngleMap::identity();
        let r = orbit_distances(&f, &mu0, &[3], 4).unwrap();
        let lam = FiberedMeasure::haar(grid.clone(), 1, 4).unwrap();
        let direct = FiberedMeasure::graph(&f.scale(3), grid, 4).unwrap().convolve(&mu0).unwrap();
        assert!((r.distances[0] - direct.distance(&lam, 4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn constant_map_never_converges() {
        let grid = circle(256);
        let d0 = FiberedMeasure::graph(&AngleMap::zero(1), grid, 8).unwrap();
        let ns: Vec<i64> = (1..=50).collect();
        let r = orbit_distances(&AngleMap::constant(vec![0.123]).unwrap(), &d0, &ns, 8).unwrap();
        assert!(r.distances.iter().all(|d| *d >= 0.5));
    }

    #[test]
    fn weyl_constant_and_identity() {
        let grid = circle(1024);
        let c = weyl_statistic(&AngleMap::constant(vec![0.3]).unwrap(), &grid, &[1], 500, 0).unwrap();
        assert!(c.s_values.iter().all(|s| (s - 1.0).abs() < 1e-12));
        let id = weyl_statistic(&AngleMap::identity(), &grid, &[1], 500, 0).unwrap();
        for (n, s) in id.n_values.iter().zip(&id.s_values) {
            assert!((s - 1.0 / *n as f64).abs() < 1e-12, "N = {n}: {s}");
        }
        assert!(weyl_statistic(&AngleMap::identity(), &grid, &[0], 10, 0).is_err());
    }

    #[test]
    fn weyl_matches_graph_measure_route() {
        let grid = circle(256);
        let f = AngleMap::smooth_circle(0.4).unwrap();
        let squares = coefficient_squares(&f, &grid, &[2], 12, 1).unwrap();
        for (n, sq) in squares.iter().enumerate() {
            let d = FiberedMeasure::graph(&f.scale(n as i64), grid.clone(), 2).unwrap();
            let c = d.joint_coeff(1, &[2]).unwrap();
            assert!((c.norm_sqr() - sq).abs() < 1e-12);
        }
    }

    #[test]
    fn cesaro_mean_closed_form() {
        for &t in &[0.0, 0.1, 0.37, 0.5, 0.999] {
            let n = 37;
            let brute: Complex64 = (0..n).map(|k| Complex64::cis(TAU * k as f64 * t)).sum::<Complex64>() / n as f64;
            assert!((cesaro_power_mean(t, n) - brute).norm() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn atom_windows() {
        let grid = FiberGrid::midpoint(4000).unwrap();
        let c = atom_spectrum(&AngleMap::constant(vec![0.999_9]).unwrap(), &grid, &[1], 1e-3, 0.05).unwrap();
        assert!((c.max_window_mass - 1.0).abs() < 1e-12);
        assert!(!c.asynchronous);
        assert_eq!(c.atoms.len(), 1);
        assert!((c.atoms[0].location - 0.999_9).abs() < 1e-12);
        let id = atom_spectrum(&AngleMap::identity(), &grid, &[1], 1e-3, 0.05).unwrap();
        assert!((id.max_window_mass - 1e-3).abs() <= 1.0 / 4000.0 + 1e-12, "{}", id.max_window_mass);
        assert!(id.asynchronous && id.atoms.is_empty());
        assert!(atom_spectrum(&AngleMap::identity(), &grid, &[1], 0.6, 0.05).is_err());
        assert!(atom_spectrum(&AngleMap::identity(), &grid, &[1], 1e-3, 1.0).is_err());
    }

    #[test]
    fn window_wraps_around_the_circle() {
        let grid = FiberGrid::midpoint(2).unwrap();
        let f = AngleMap::tabulated(vec![vec![0.9996], vec![0.0003]]).unwrap();
        let r = atom_spectrum(&f, &grid, &[1], 1e-3, 0.6).unwrap();
        assert!((r.max_window_mass - 1.0).abs() < 1e-12);
        assert_eq!(r.atoms.len(), 1);
        assert!(r.atoms[0].location < 1e-4 || r.atoms[0].location > 0.9999);
    }

    #[test]
    fn cantor_obstruction_preconditions() {
        assert!(cantor_obstruction(0, 3, 24, 1024).is_err());
        assert!(cantor_obstruction(1, 23, 24, 1024).is_err());
        assert!(cantor_obstruction(1, 22, 24, 64).is_ok());
    }

    #[test]
    fn decay_eligibility() {
        let grid = FiberGrid::midpoint(256).unwrap();
        let chars = decay_characters(3, 3);
        assert_eq!(chars.len(), 42);
        assert!(matches!(decay_rate(&AngleMap::cantor(16).unwrap(), &grid, &[5], &chars), Err(Error::Ineligible(_))));
        assert!(decay_rate(&AngleMap::constant(vec![0.2]).unwrap(), &grid, &[5], &chars).is_err());
        let lin = decay_rate(&AngleMap::identity(), &grid, &[1, 2, 3, 4, 10], &chars).unwrap();
        for (k, worst) in lin {
            let want = if k <= 3 { 1.0 } else { 0.0 };
            assert!((worst - want).abs() < 1e-12, "k = {k}: {worst}");
        }
        let degenerate = decay_rate(&AngleMap::smooth_circle(0.0).unwrap(), &grid, &[2, 7], &chars).unwrap();
        assert!((degenerate[0].1 - 1.0).abs() < 1e-12 && degenerate[1].1 < 1e-12);
    }

    #[test]
    fn density_of_constant_map_is_zero() {
        let r = density_one_estimate(&AngleMap::constant(vec![0.4]).unwrap(), circle(256), 0.05, 40, 8, 8).unwrap();
        assert_eq!(r.density, 0.0);
    }
}
