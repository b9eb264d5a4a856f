//! Angle maps `f: I -> T^d` and their integer multiples.
//!
//! Every family evaluates into `[0, 1)^d`. Scaling by an integer keeps the
//! family and records a multiplier, so `scale(n, f)` is evaluated directly
//! rather than by composing `n` rotations. The Cantor family keeps an exact
//! integer representation of its values, which makes `3^k f` exact.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{param, Error, Result};
use crate::grid::FiberGrid;
use crate::homogeneous::{angle_map_value, GroupElement};

pub const CANTOR_MIN_DEPTH: u32 = 8;
pub const CANTOR_MAX_DEPTH: u32 = 53;

/// Reduce a real number to `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `x -> alpha * x + c`.
    Linear { slope: Vec<f64>, offset: Vec<f64> },
    /// `x -> x + eps / (2 pi) * sin(2 pi x)`, a circle diffeomorphism for `|eps| < 1`.
    SmoothCircle { eps: f64 },
    /// Inverse of the devil's staircase: binary digits `b_j` of `x` become
    /// ternary digits `2 b_j`, truncated at `depth` digits.
    CantorInverseDevil { depth: u32 },
    /// Right-continuous step function; `values.len() == breakpoints.len() + 1`.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<Vec<f64>> },
    /// One value per grid node, stored row-major (`len * d`).
    Tabulated { values: Arc<Vec<f64>> },
    /// `x -> rho(x)^{-1} beta mod Z^2` on sampled group elements.
    HomogeneousInduced { beta: [f64; 2], nodes: Arc<Vec<GroupElement>> },
}

/// A measurable map from the base into `T^d`, times an integer multiplier.
#[derive(Debug, Clone)]
pub struct AngleMap {
    family: Family,
    dim: usize,
    multiplier: i128,
}

impl AngleMap {
    pub fn linear(slope: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        if slope.is_empty() || slope.len() != offset.len() {
            return param("linear map needs slope and offset of equal nonzero length");
        }
        if slope.iter().chain(&offset).any(|v| !v.is_finite()) {
            return param("linear map parameters must be finite");
        }
        let dim = slope.len();
        Ok(Self::with_family(Family::Linear { slope, offset }, dim))
    }

    /// `f(x) = x` on the circle.
    pub fn identity() -> Self {
        Self::with_family(Family::Linear { slope: vec![1.0], offset: vec![0.0] }, 1)
    }

    pub fn constant(value: Vec<f64>) -> Result<Self> {
        let slope = vec![0.0; value.len()];
        Self::linear(slope, value)
    }

    pub fn zero(dim: usize) -> Self {
        Self::with_family(Family::Linear { slope: vec![0.0; dim], offset: vec![0.0; dim] }, dim)
    }

    pub fn smooth_circle(eps: f64) -> Result<Self> {
        if !(eps > -1.0 && eps < 1.0) {
            return param(format!("smooth circle map needs |eps| < 1, got {eps}"));
        }
        Ok(Self::with_family(Family::SmoothCircle { eps }, 1))
    }

    pub fn cantor(depth: u32) -> Result<Self> {
        if !(CANTOR_MIN_DEPTH..=CANTOR_MAX_DEPTH).contains(&depth) {
            return param(format!(
                "cantor depth must lie in [{CANTOR_MIN_DEPTH}, {CANTOR_MAX_DEPTH}], got {depth}"
            ));
        }
        Ok(Self::with_family(Family::CantorInverseDevil { depth }, 1))
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return param("piecewise constant map needs one more value than breakpoints");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1])
            || breakpoints.iter().any(|b| !(0.0..=1.0).contains(b))
        {
            return param("breakpoints must be strictly increasing inside [0, 1]");
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return param("piecewise constant values must share a nonzero dimension");
        }
        Ok(Self::with_family(Family::PiecewiseConstant { breakpoints, values }, dim))
    }

    /// Values given per node, `values[i]` being `f(x_i)`.
    pub fn tabulated(values: Vec<Vec<f64>>) -> Result<Self> {
        let dim = values.first().map(Vec::len).unwrap_or(0);
        if dim == 0 || values.iter().any(|v| v.len() != dim) {
            return param("tabulated values must be nonempty rows of equal length");
        }
        let flat = values.into_iter().flatten().collect();
        Ok(Self::with_family(Family::Tabulated { values: Arc::new(flat) }, dim))
    }

    /// Tabulate `rule` at the circle coordinates of `grid`.
    pub fn tabulate_on(grid: &FiberGrid, rule: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let coords = grid
            .circle_coords()
            .ok_or_else(|| Error::MapDomain("tabulating a rule needs circle coordinates".into()))?;
        Self::tabulated(coords.iter().map(|&x| rule(x)).collect())
    }

    pub fn homogeneous_induced(beta: [f64; 2], nodes: Arc<Vec<GroupElement>>) -> Self {
        Self::with_family(Family::HomogeneousInduced { beta, nodes }, 2)
    }

    fn with_family(family: Family, dim: usize) -> Self {
        Self { family, dim, multiplier: 1 }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn multiplier(&self) -> i128 {
        self.multiplier
    }

    /// The map `x -> k f(x) mod 1`.
    pub fn scale(&self, k: i64) -> Self {
        let multiplier = self
            .multiplier
            .checked_mul(k as i128)
            .expect("angle map multiplier overflow");
        Self { family: self.family.clone(), dim: self.dim, multiplier }
    }

    /// Family-level name used in reports.
    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Linear { .. } => "linear",
            Family::SmoothCircle { .. } => "smooth_circle",
            Family::CantorInverseDevil { .. } => "cantor",
            Family::PiecewiseConstant { .. } => "piecewise_constant",
            Family::Tabulated { .. } => "tabulated",
            Family::HomogeneousInduced { .. } => "homogeneous_induced",
        }
    }

    fn needs_node(&self) -> bool {
        matches!(self.family, Family::Tabulated { .. } | Family::HomogeneousInduced { .. })
    }

    /// Evaluate at a real base point `x in [0, 1)`.
    pub fn evaluate_at(&self, x: f64) -> Result<Vec<f64>> {
        if self.needs_node() {
            return Err(Error::MapDomain(format!(
                "{} maps are only defined on grid nodes",
                self.family_name()
            )));
        }
        if !(0.0..1.0).contains(&x) {
            return Err(Error::MapDomain(format!("base point {x} outside [0, 1)")));
        }
        let mut out = vec![0.0; self.dim];
        self.eval_point(x, None, &mut out);
        Ok(out)
    }

    /// Evaluate at node `i` of `grid`.
    pub fn evaluate(&self, grid: &FiberGrid, i: usize) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        if i >= grid.len() {
            return Err(Error::MapDomain(format!("node {i} outside grid of {} nodes", grid.len())));
        }
        let mut out = vec![0.0; self.dim];
        self.eval_point(grid.coord(i).unwrap_or(0.0), Some(i), &mut out);
        Ok(out)
    }

    /// All node values, row-major `len * d`.
    pub fn evaluate_grid(&self, grid: &FiberGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let d = self.dim;
        let mut out = vec![0.0; grid.len() * d];
        for (i, row) in out.chunks_mut(d).enumerate() {
            self.eval_point(grid.coord(i).unwrap_or(0.0), Some(i), row);
        }
        Ok(out)
    }

    fn check_grid(&self, grid: &FiberGrid) -> Result<()> {
        match &self.family {
            Family::Tabulated { values } if values.len() != grid.len() * self.dim => {
                Err(Error::MapDomain(format!(
                    "tabulated map has {} rows but grid has {} nodes",
                    values.len() / self.dim,
                    grid.len()
                )))
            }
            Family::HomogeneousInduced { nodes, .. } if nodes.len() != grid.len() => {
                Err(Error::MapDomain(format!(
                    "induced map has {} nodes but grid has {}",
                    nodes.len(),
                    grid.len()
                )))
            }
            Family::Tabulated { .. } | Family::HomogeneousInduced { .. } => Ok(()),
            _ if !grid.has_circle() => Err(Error::MapDomain(format!(
                "{} map needs a grid with circle coordinates",
                self.family_name()
            ))),
            _ => Ok(()),
        }
    }

    fn eval_point(&self, x: f64, node: Option<usize>, out: &mut [f64]) {
        let k = self.multiplier as f64;
        match &self.family {
            Family::Linear { slope, offset } => {
                for ((o, a), c) in out.iter_mut().zip(slope).zip(offset) {
                    *o = wrap(k * (a * x + c));
                }
            }
            Family::SmoothCircle { eps } => {
                out[0] = wrap(k * (x + eps / TAU * (TAU * x).sin()));
            }
            Family::CantorInverseDevil { depth } => {
                let t = Ternary::new(*depth);
                let num = t.mul(cantor_numerator(x, *depth), t.reduce(self.multiplier));
                out[0] = t.to_unit(num);
            }
            Family::PiecewiseConstant { breakpoints, values } => {
                let piece = breakpoints.partition_point(|b| *b <= x);
                for (o, v) in out.iter_mut().zip(&values[piece]) {
                    *o = wrap(k * v);
                }
            }
            Family::Tabulated { values } => {
                let i = node.expect("tabulated maps need a node");
                let row = &values[i * self.dim..(i + 1) * self.dim];
                for (o, v) in out.iter_mut().zip(row) {
                    *o = wrap(k * v);
                }
            }
            Family::HomogeneousInduced { beta, nodes } => {
                let i = node.expect("induced maps need a node");
                let v = angle_map_value(&nodes[i], *beta);
                out[0] = wrap(k * v[0]);
                out[1] = wrap(k * v[1]);
            }
        }
    }

    /// Per-node phases `<m, f(x_i)> mod 1`, in a form that can be rescaled
    /// by further integers without losing exactness where the family allows.
    pub fn phases(&self, grid: &FiberGrid, m: &[i64]) -> Result<PhaseTable> {
        if m.len() != self.dim {
            return param(format!("character of length {} for a map into T^{}", m.len(), self.dim));
        }
        self.check_grid(grid)?;
        if let Family::CantorInverseDevil { depth } = self.family {
            let t = Ternary::new(depth);
            let factor = t.mul(t.reduce(self.multiplier), t.reduce(m[0] as i128));
            let coords = grid.circle_coords().expect("checked above");
            let numerators = coords.iter().map(|&x| t.mul(cantor_numerator(x, depth), factor)).collect();
            return Ok(PhaseTable::Ternary { numerators, ternary: t });
        }
        let values = self.evaluate_grid(grid)?;
        let phases = values
            .chunks(self.dim)
            .map(|row| wrap(row.iter().zip(m).map(|(y, &mj)| mj as f64 * y).sum()))
            .collect();
        Ok(PhaseTable::Real(phases))
    }

    /// Pointwise sum `f + g`, tabulated on `grid`.
    pub fn sum(&self, other: &AngleMap, grid: &FiberGrid) -> Result<Self> {
        if self.dim != other.dim {
            return param(format!("cannot add maps into T^{} and T^{}", self.dim, other.dim));
        }
        let a = self.evaluate_grid(grid)?;
        let b = other.evaluate_grid(grid)?;
        let flat = a.iter().zip(&b).map(|(x, y)| wrap(x + y)).collect();
        Ok(Self::with_family(Family::Tabulated { values: Arc::new(flat) }, self.dim))
    }

    /// Smallest `|f'|` when the family certifies one, in units of turns.
    pub fn derivative_lower_bound(&self) -> Option<f64> {
        let k = self.multiplier as f64;
        match &self.family {
            Family::Linear { slope, .. } if slope.len() == 1 && slope[0] != 0.0 => {
                Some((k * slope[0]).abs())
            }
            Family::SmoothCircle { eps } => Some(k.abs() * (1.0 - eps.abs())),
            _ => None,
        }
        .filter(|b| *b > 0.0)
    }

    /// JSON descriptor `{family, params, d}` for analytic families.
    pub fn descriptor(&self) -> MapDescriptor {
        let params = match &self.family {
            Family::Linear { slope, offset } => json!({ "slope": slope, "offset": offset }),
            Family::SmoothCircle { eps } => json!({ "eps": eps }),
            Family::CantorInverseDevil { depth } => json!({ "depth": depth }),
            Family::PiecewiseConstant { breakpoints, values } => {
                json!({ "breakpoints": breakpoints, "values": values })
            }
            Family::Tabulated { values } => {
                let rows: Vec<&[f64]> = values.chunks(self.dim).collect();
                json!({ "values": rows })
            }
            Family::HomogeneousInduced { beta, nodes } => json!({ "beta": beta, "nodes": nodes.len() }),
        };
        let mut params = params;
        if self.multiplier != 1 {
            params["multiplier"] = json!(self.multiplier as f64);
        }
        MapDescriptor { family: self.family_name().to_string(), params, d: self.dim }
    }
}

/// Phases of a character composed with a map, one per node.
#[derive(Debug, Clone)]
pub enum PhaseTable {
    Real(Vec<f64>),
    Ternary { numerators: Vec<u128>, ternary: Ternary },
}

impl PhaseTable {
    pub fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Ternary { numerators, .. } => numerators.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `n * phase_i mod 1`.
    pub fn scaled(&self, n: i64, i: usize) -> f64 {
        match self {
            Self::Real(v) => wrap(n as f64 * v[i]),
            Self::Ternary { numerators, ternary } => {
                ternary.to_unit(ternary.mul(numerators[i], ternary.reduce(n as i128)))
            }
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.scaled(1, i)).collect()
    }
}

/// Arithmetic modulo `3^depth`.
#[derive(Debug, Clone, Copy)]
pub struct Ternary {
    modulus: u128,
}

impl Ternary {
    pub fn new(depth: u32) -> Self {
        Self { modulus: 3u128.pow(depth) }
    }

    pub fn modulus(&self) -> u128 {
        self.modulus
    }

    fn reduce(&self, k: i128) -> u128 {
        k.rem_euclid(self.modulus as i128) as u128
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        match a.checked_mul(b) {
            Some(p) => p % self.modulus,
            None => {
                // double-and-add; operands stay below 2 * 3^53 < 2^86
                let (mut acc, mut base, mut e) = (0u128, a % self.modulus, b);
                while e > 0 {
                    if e & 1 == 1 {
                        acc = (acc + base) % self.modulus;
                    }
                    base = (base << 1) % self.modulus;
                    e >>= 1;
                }
                acc
            }
        }
    }

    fn to_unit(&self, num: u128) -> f64 {
        num as f64 / self.modulus as f64
    }
}

/// `sum_j 2 b_j 3^{depth - j}` for the binary digits `b_j` of `x`.
fn cantor_numerator(x: f64, depth: u32) -> u128 {
    let mut y = x;
    let mut num = 0u128;
    for _ in 0..depth {
        y *= 2.0;
        let bit = if y >= 1.0 {
            y -= 1.0;
            2
        } else {
            0
        };
        num = num * 3 + bit;
    }
    num
}

/// Discretized pushforward `(chi_m o f)_* L`: `(<m, f(x_i)> mod 1, weight_i)` per node.
pub fn pushforward_samples(f: &AngleMap, grid: &FiberGrid, m: &[i64]) -> Result<Vec<(f64, f64)>> {
    if m.iter().all(|&c| c == 0) {
        return param("pushforward needs a nontrivial character");
    }
    let phases = f.phases(grid, m)?;
    Ok(phases.values().into_iter().zip(grid.weights().iter().copied()).collect())
}

/// Serialized form of a map used by experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDescriptor {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Value,
    #[serde(default = "one")]
    pub d: usize,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearParams {
    slope: Vec<f64>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    value: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EpsParams {
    eps: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DepthParams {
    depth: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepParams {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    values: Vec<Vec<f64>>,
}

impl MapDescriptor {
    /// Build the map. Homogeneous maps need sampled group elements and are
    /// constructed by the homogeneous layer instead.
    pub fn build(&self) -> Result<AngleMap> {
        fn parse<T: serde::de::DeserializeOwned>(v: &serde_json::Value) -> Result<T> {
            serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("map params: {e}")))
        }
        let mut params = self.params.clone();
        let multiplier = match params.as_object_mut().and_then(|o| o.remove("multiplier")) {
            Some(v) => Some(v.as_f64().filter(|k| k.fract() == 0.0).ok_or_else(|| {
                Error::Config("map multiplier must be an integer".into())
            })? as i64),
            None => None,
        };
        let map = match self.family.as_str() {
            "linear" => {
                let p: LinearParams = parse(&params)?;
                let offset = p.offset.unwrap_or_else(|| vec![0.0; p.slope.len()]);
                AngleMap::linear(p.slope, offset)?
            }
            "identity" => AngleMap::identity(),
            "constant" => AngleMap::constant(parse::<ConstantParams>(&params)?.value)?,
            "smooth_circle" => AngleMap::smooth_circle(parse::<EpsParams>(&params)?.eps)?,
            "cantor" => AngleMap::cantor(parse::<DepthParams>(&params)?.depth)?,
            "piecewise_constant" => {
                let p: StepParams = parse(&params)?;
                AngleMap::piecewise_constant(p.breakpoints, p.values)?
            }
            "tabulated" => AngleMap::tabulated(parse::<TableParams>(&params)?.values)?,
            other => return Err(Error::Config(format!("unknown map family `{other}`"))),
        };
        if map.dim() != self.d {
            return Err(Error::Config(format!(
                "descriptor declares d = {} but {} map has d = {}",
                self.d,
                self.family,
                map.dim()
            )));
        }
        Ok(match multiplier {
            Some(k) => map.scale(k),
            None => map,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(f: &AngleMap, x: f64) -> f64 {
        f.evaluate_at(x).unwrap()[0]
    }

    /// Devil's staircase evaluated on ternary digits, inverted by bisection.
    fn staircase(t: f64, depth: u32) -> f64 {
        let (mut y, mut acc, mut scale) = (t, 0.0, 0.5);
        for _ in 0..depth {
            y *= 3.0;
            let digit = y.floor();
            y -= digit;
            match digit as u32 {
                0 => {}
                1 => return acc + scale,
                _ => acc += scale,
            }
            scale /= 2.0;
        }
        acc
    }

    #[test]
    fn linear_examples() {
        let f = AngleMap::identity();
        assert_eq!(at(&f, 0.75), 0.75);
        assert_eq!(at(&f.scale(2), 0.75), 0.5);
        assert_eq!(at(&f.scale(0), 0.75), 0.0);
    }

    #[test]
    fn cantor_examples_match_staircase_inverse() {
        let f = AngleMap::cantor(4).err();
        assert!(f.is_some(), "depth 4 is outside the supported range");
        let f = AngleMap::cantor(8).unwrap();
        assert!((at(&f, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        assert!((at(&f, 0.25) - 2.0 / 9.0).abs() < 1e-15);
        // staircase(f(x)) recovers x on dyadic points of depth <= B
        for i in 0..256 {
            let x = i as f64 / 256.0;
            let y = at(&f, x);
            assert!((staircase(y, 8) - x).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn cantor_triple_shifts_digits() {
        let b = 24;
        let f = AngleMap::cantor(b).unwrap();
        let g = AngleMap::cantor(b - 1).unwrap();
        for i in 0..500 {
            let x = (i as f64 + 0.37) / 500.0;
            let lhs = at(&f.scale(3), x);
            let rhs = at(&g, wrap(2.0 * x));
            assert!((lhs - rhs).abs() < 1e-15, "x = {x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn cantor_powers_of_three_stay_in_cantor_set() {
        let b = 24;
        let f = AngleMap::cantor(b).unwrap();
        let modulus = 3f64.powi(b as i32);
        for k in 0..8 {
            let g = f.scale(3i64.pow(k));
            for i in 0..200 {
                let x = (i as f64 + 0.5) / 200.0;
                let mut num = (at(&g, x) * modulus).round() as u64;
                for _ in 0..b {
                    assert_ne!(num % 3, 1, "ternary digit 1 at k = {k}, x = {x}");
                    num /= 3;
                }
            }
        }
    }

    #[test]
    fn piecewise_is_right_continuous() {
        let f = AngleMap::piecewise_constant(vec![0.5], vec![vec![0.1], vec![0.7]]).unwrap();
        assert_eq!(at(&f, 0.49), 0.1);
        assert_eq!(at(&f, 0.5), 0.7);
        assert!(AngleMap::piecewise_constant(vec![0.5], vec![vec![0.1]]).is_err());
    }

    #[test]
    fn node_only_families_reject_real_points() {
        let f = AngleMap::tabulated(vec![vec![0.1], vec![0.2]]).unwrap();
        assert!(matches!(f.evaluate_at(0.3), Err(Error::MapDomain(_))));
        let grid = FiberGrid::midpoint(2).unwrap();
        assert_eq!(f.evaluate(&grid, 1).unwrap(), vec![0.2]);
        assert!(f.evaluate(&grid, 2).is_err());
        assert!(f.evaluate(&FiberGrid::midpoint(3).unwrap(), 0).is_err());
    }

    #[test]
    fn out_of_domain_points() {
        assert!(AngleMap::identity().evaluate_at(1.0).is_err());
        assert!(AngleMap::identity().evaluate_at(-0.1).is_err());
    }

    #[test]
    fn smooth_circle_derivative_positive() {
        let eps = 0.5;
        let f = AngleMap::smooth_circle(eps).unwrap();
        let min = (0..100_000)
            .map(|i| 1.0 + eps * (TAU * i as f64 / 100_000.0).cos())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 1.0 - eps - 1e-12);
        assert_eq!(f.derivative_lower_bound(), Some(0.5));
        assert!(AngleMap::smooth_circle(1.0).is_err());
        assert!(AngleMap::cantor(16).unwrap().derivative_lower_bound().is_none());
    }

    #[test]
    fn pushforward_of_constant_is_one_atom() {
        let grid = FiberGrid::midpoint(64).unwrap();
        let f = AngleMap::constant(vec![0.3]).unwrap();
        let s = pushforward_samples(&f, &grid, &[2]).unwrap();
        assert!(s.iter().all(|(v, _)| (v - 0.6).abs() < 1e-15));
        assert!(pushforward_samples(&f, &grid, &[0]).is_err());
    }

    #[test]
    fn pushforward_of_step_map_has_third_atom() {
        let grid = FiberGrid::midpoint(3000).unwrap();
        let f = AngleMap::tabulate_on(&grid, |x| vec![if x < 1.0 / 3.0 { 0.9 } else { x }]).unwrap();
        let s = pushforward_samples(&f, &grid, &[1]).unwrap();
        let mass: f64 = s.iter().filter(|(v, _)| *v == 0.9).map(|(_, w)| w).sum();
        assert!((mass - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn descriptor_roundtrip() {
        let maps = [
            AngleMap::identity(),
            AngleMap::linear(vec![1.0, 2.0_f64.sqrt()], vec![0.1, 0.2]).unwrap(),
            AngleMap::smooth_circle(0.5).unwrap(),
            AngleMap::cantor(24).unwrap(),
            AngleMap::piecewise_constant(vec![0.25], vec![vec![0.0], vec![0.5]]).unwrap(),
        ];
        for f in maps {
            let text = serde_json::to_string(&f.descriptor()).unwrap();
            let back: MapDescriptor = serde_json::from_str(&text).unwrap();
            let g = back.build().unwrap();
            for i in 0..50 {
                let x = i as f64 / 50.0;
                assert_eq!(f.evaluate_at(x).unwrap(), g.evaluate_at(x).unwrap());
            }
        }
        let bad: std::result::Result<MapDescriptor, _> =
            serde_json::from_str(r#"{"family":"linear","params":{},"d":1,"extra":1}"#);
        assert!(bad.is_err());
    }
}
