//! Measures on `I x T^d` projecting to the base measure, stored as truncated
//! per-fiber Fourier coefficients.
//!
//! For each node `x_i` and each character `m` with `|m|_inf <= radius` the
//! table holds `mu^{x_i}^(m) = ∫ e^{2πi<m,y>} dmu^{x_i}(y)`. Fiberwise
//! convolution is then pointwise multiplication of the tables.

use std::f64::consts::TAU;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::AngleMap;
use crate::error::{param, Error, Result};
use crate::grid::FiberGrid;

pub const COEFF_TOL: f64 = 1e-12;

/// A joint character `(x, y) -> e^{2πi (n x + <m, y>)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CharacterIndex {
    pub n: i64,
    pub m: Vec<i64>,
}

impl CharacterIndex {
    pub fn is_trivial(&self) -> bool {
        self.n == 0 && self.m.iter().all(|&c| c == 0)
    }

    /// Weight `2^{-(|n| + |m|_1)}` used by the truncated distance.
    pub fn weight(&self) -> f64 {
        let order = self.n.unsigned_abs() + self.m.iter().map(|c| c.unsigned_abs()).sum::<u64>();
        0.5f64.powi(order as i32)
    }
}

/// All fiber characters with `|m|_inf <= radius`, in table order (first
/// coordinate fastest).
pub fn fiber_characters(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    let side = 2 * radius + 1;
    let r = radius as i64;
    (0..side.pow(dim as u32))
        .map(|mut flat| {
            (0..dim)
                .map(|_| {
                    let c = (flat % side) as i64 - r;
                    flat /= side;
                    c
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FiberedMeasure {
    grid: Arc<FiberGrid>,
    dim: usize,
    radius: usize,
    coeff: Vec<Complex64>,
}

impl FiberedMeasure {
    /// `lambda = L ⊗ Haar`: every nontrivial fiber coefficient vanishes.
    pub fn haar(grid: Arc<FiberGrid>, dim: usize, radius: usize) -> Result<Self> {
        check_shape(dim, radius)?;
        let block = block_len(dim, radius);
        let zero = zero_index(dim, radius);
        let mut coeff = vec![Complex64::new(0.0, 0.0); grid.len() * block];
        for row in coeff.chunks_mut(block) {
            row[zero] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { grid, dim, radius, coeff })
    }

    /// Graph measure `D_f`, the pushforward of `L` by `x -> (x, f(x))`.
    pub fn graph(f: &AngleMap, grid: Arc<FiberGrid>, radius: usize) -> Result<Self> {
        let dim = f.dim();
        check_shape(dim, radius)?;
        let values = f.evaluate_grid(&grid)?;
        let block = block_len(dim, radius);
        let side = 2 * radius + 1;
        let mut coeff = vec![Complex64::new(0.0, 0.0); grid.len() * block];
        coeff.par_chunks_mut(block).zip(values.par_chunks(dim)).for_each(|(row, y)| {
            // powers[j * side + (k + radius)] = e^{2πi k y_j}
            let powers: Vec<Complex64> = y
                .iter()
                .flat_map(|&yj| {
                    (0..side).map(move |s| Complex64::cis(TAU * (s as f64 - radius as f64) * yj))
                })
                .collect();
            for (flat, c) in row.iter_mut().enumerate() {
                let mut rest = flat;
                let mut acc = Complex64::new(1.0, 0.0);
                for j in 0..dim {
                    acc *= powers[j * side + rest % side];
                    rest /= side;
                }
                *c = acc;
            }
        });
        Ok(Self { grid, dim, radius, coeff })
    }

    /// Build from an explicit table, checking the probability invariants.
    pub fn from_coefficients(
        grid: Arc<FiberGrid>,
        dim: usize,
        radius: usize,
        coeff: Vec<Complex64>,
    ) -> Result<Self> {
        check_shape(dim, radius)?;
        let block = block_len(dim, radius);
        if coeff.len() != grid.len() * block {
            return param(format!(
                "coefficient table has {} entries, expected {}",
                coeff.len(),
                grid.len() * block
            ));
        }
        let zero = zero_index(dim, radius);
        for (i, row) in coeff.chunks(block).enumerate() {
            if row[zero] != Complex64::new(1.0, 0.0) {
                return param(format!("fiber {i} does not have total mass 1"));
            }
            for (flat, c) in row.iter().enumerate() {
                if c.norm() > 1.0 + COEFF_TOL {
                    return param(format!("fiber {i} coefficient {flat} exceeds modulus 1"));
                }
                let mirror = block - 1 - flat;
                if (row[mirror] - c.conj()).norm() > COEFF_TOL {
                    return param(format!("fiber {i} is not a real measure"));
                }
            }
        }
        Ok(Self { grid, dim, radius, coeff })
    }

    pub fn grid(&self) -> &Arc<FiberGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn block_len(&self) -> usize {
        block_len(self.dim, self.radius)
    }

    /// Raw table, node-major.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeff
    }

    /// `mu^{x_i}^(m)`.
    pub fn coeff(&self, node: usize, m: &[i64]) -> Result<Complex64> {
        let flat = self.flat_index(m)?;
        Ok(self.coeff[node * self.block_len() + flat])
    }

    fn flat_index(&self, m: &[i64]) -> Result<usize> {
        if m.len() != self.dim {
            return param(format!("character has length {}, measure has d = {}", m.len(), self.dim));
        }
        let r = self.radius as i64;
        let side = 2 * r + 1;
        let mut flat = 0i64;
        for &c in m.iter().rev() {
            if c.abs() > r {
                return param(format!("character component {c} beyond truncation radius {r}"));
            }
            flat = flat * side + (c + r);
        }
        Ok(flat as usize)
    }

    pub fn compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.radius != other.radius {
            return Err(Error::Incompatible(format!(
                "shapes (d={}, M={}) vs (d={}, M={})",
                self.dim, self.radius, other.dim, other.radius
            )));
        }
        if !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid) {
            return Err(Error::Incompatible(format!(
                "grids `{}` and `{}` differ",
                self.grid.id(),
                other.grid.id()
            )));
        }
        Ok(())
    }

    /// Fiberwise convolution `mu * nu`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let coeff = self.coeff.iter().zip(&other.coeff).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid.clone(), dim: self.dim, radius: self.radius, coeff })
    }

    /// `k`-fold convolution power; the empty power is `D_0`.
    pub fn power(&self, k: u32) -> Result<Self> {
        if self.coeff.iter().any(|c| c.norm() > 1.0 + COEFF_TOL) {
            return param("measure has coefficients beyond modulus 1");
        }
        let coeff = self.coeff.iter().map(|c| c.powu(k)).collect();
        Ok(Self { grid: self.grid.clone(), dim: self.dim, radius: self.radius, coeff })
    }

    /// True when every fiber is the Dirac mass at 0.
    pub fn is_identity(&self) -> bool {
        self.coeff.iter().all(|c| *c == Complex64::new(1.0, 0.0))
    }

    /// `∫ e^{2πi (n x + <m, y>)} dmu(x, y) = Σ_i w_i e^{2πi n x_i} mu^{x_i}^(m)`.
    pub fn joint_coeff(&self, n: i64, m: &[i64]) -> Result<Complex64> {
        let flat = self.flat_index(m)?;
        let base = base_characters(&self.grid, n)?;
        let block = self.block_len();
        Ok(base
            .iter()
            .enumerate()
            .map(|(i, e)| e * self.coeff[i * block + flat])
            .sum())
    }

    /// All joint coefficients with `|n| <= n_max`, as `table[(n + n_max) * block + flat]`.
    pub fn joint_table(&self, n_max: usize) -> Result<Vec<Complex64>> {
        joint_table(&self.grid, &self.coeff, self.block_len(), n_max)
    }

    /// Truncated weak-* distance
    /// `Σ_{(n,m) != 0} 2^{-(|n| + |m|_1)} |mu^(n,m) - nu^(n,m)|` over `|n| <= n_max`,
    /// `|m|_inf <= radius`. `n_max` is forced to 0 on grids without circle coordinates.
    pub fn distance(&self, other: &Self, n_max: usize) -> Result<f64> {
        self.compatible(other)?;
        let n_max = if self.grid.has_circle() { n_max } else { 0 };
        let diff: Vec<Complex64> = self.coeff.iter().zip(&other.coeff).map(|(a, b)| a - b).collect();
        let block = self.block_len();
        let table = joint_table(&self.grid, &diff, block, n_max)?;
        let chars = fiber_characters(self.dim, self.radius);
        let mut total = 0.0;
        for (row, n) in table.chunks(block).zip(-(n_max as i64)..) {
            for (value, m) in row.iter().zip(&chars) {
                let ch = CharacterIndex { n, m: m.clone() };
                if !ch.is_trivial() {
                    total += ch.weight() * value.norm();
                }
            }
        }
        Ok(total)
    }

    /// Write the table as CSV: `node_index,weight,circle_coord,m1..md,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["node_index".to_string(), "weight".into(), "circle_coord".into()];
        header.extend((1..=self.dim).map(|j| format!("m{j}")));
        header.extend(["re".to_string(), "im".into()]);
        w.write_record(&header)?;
        let chars = fiber_characters(self.dim, self.radius);
        let block = self.block_len();
        for i in 0..self.grid.len() {
            let coord = self.grid.coord(i).map(|c| c.to_string()).unwrap_or_default();
            for (flat, m) in chars.iter().enumerate() {
                let c = self.coeff[i * block + flat];
                let mut rec = vec![i.to_string(), self.grid.weight(i).to_string(), coord.clone()];
                rec.extend(m.iter().map(|v| v.to_string()));
                rec.extend([c.re.to_string(), c.im.to_string()]);
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`FiberedMeasure::write_csv`].
    pub fn read_csv<R: Read>(input: R, grid_id: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.len() < 6 || &header[0] != "node_index" || &header[header.len() - 1] != "im" {
            return param("unrecognised measure CSV header");
        }
        let dim = header.len() - 5;
        let mut weights = Vec::new();
        let mut coords: Vec<Option<f64>> = Vec::new();
        let mut entries: Vec<(usize, Vec<i64>, Complex64)> = Vec::new();
        let parse_f = |s: &str| s.parse::<f64>().map_err(|e| Error::Parameter(format!("bad number `{s}`: {e}")));
        let parse_i = |s: &str| s.parse::<i64>().map_err(|e| Error::Parameter(format!("bad integer `{s}`: {e}")));
        for rec in r.records() {
            let rec = rec?;
            let node = parse_i(&rec[0])? as usize;
            if node == weights.len() {
                weights.push(parse_f(&rec[1])?);
                coords.push(if rec[2].is_empty() { None } else { Some(parse_f(&rec[2])?) });
            } else if node + 1 != weights.len() {
                return param("measure CSV rows must be grouped by ascending node");
            }
            let m = (0..dim).map(|j| parse_i(&rec[3 + j])).collect::<Result<Vec<_>>>()?;
            let c = Complex64::new(parse_f(&rec[3 + dim])?, parse_f(&rec[4 + dim])?);
            entries.push((node, m, c));
        }
        let radius = entries
            .iter()
            .flat_map(|(_, m, _)| m.iter().map(|c| c.unsigned_abs() as usize))
            .max()
            .unwrap_or(0);
        let circle = if coords.iter().all(Option::is_some) {
            Some(coords.into_iter().flatten().collect())
        } else if coords.iter().all(Option::is_none) {
            None
        } else {
            return param("circle coordinates present on some nodes only");
        };
        let grid = Arc::new(FiberGrid::new(grid_id, weights, circle)?);
        let shell = Self::haar(grid.clone(), dim, radius.max(1))?;
        let block = shell.block_len();
        if entries.len() != grid.len() * block {
            return param("measure CSV does not list every character of every node");
        }
        let mut coeff = vec![Complex64::new(f64::NAN, f64::NAN); entries.len()];
        for (node, m, c) in entries {
            coeff[node * block + shell.flat_index(&m)?] = c;
        }
        Self::from_coefficients(grid, dim, radius.max(1), coeff)
    }
}

fn check_shape(dim: usize, radius: usize) -> Result<()> {
    if dim == 0 {
        return param("fiber dimension must be at least 1");
    }
    if radius == 0 {
        return param("truncation radius must be at least 1");
    }
    Ok(())
}

fn block_len(dim: usize, radius: usize) -> usize {
    (2 * radius + 1).pow(dim as u32)
}

fn zero_index(dim: usize, radius: usize) -> usize {
    (block_len(dim, radius) - 1) / 2
}

/// `w_i e^{2πi n x_i}` for every node.
pub(crate) fn base_characters(grid: &FiberGrid, n: i64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Ok(grid.weights().iter().map(|&w| Complex64::new(w, 0.0)).collect());
    }
    let coords = grid.circle_coords().ok_or_else(|| {
        Error::UnsupportedCharacter(format!("base frequency {n} needs circle coordinates"))
    })?;
    Ok(grid
        .weights()
        .iter()
        .zip(coords)
        .map(|(&w, &x)| w * Complex64::cis(TAU * crate::angle::wrap(n as f64 * x)))
        .collect())
}

fn joint_table(grid: &FiberGrid, coeff: &[Complex64], block: usize, n_max: usize) -> Result<Vec<Complex64>> {
    let rows = (-(n_max as i64)..=n_max as i64)
        .map(|n| base_characters(grid, n))
        .collect::<Result<Vec<_>>>()?;
    let mut table = vec![Complex64::new(0.0, 0.0); rows.len() * block];
    for (out, base) in table.chunks_mut(block).zip(&rows) {
        for (e, fiber) in base.iter().zip(coeff.chunks(block)) {
            for (o, c) in out.iter_mut().zip(fiber) {
                *o += e * c;
            }
        }
    }
    Ok(table)
}

/// Joint coefficient of `D_{n f}` straight from a phase table:
/// `Σ_i w_i e^{2πi (n_base x_i + n <m, f(x_i)>)}`.
pub fn graph_joint_coeff(
    grid: &FiberGrid,
    phases: &crate::angle::PhaseTable,
    n: i64,
    n_base: i64,
) -> Result<Complex64> {
    let base = base_characters(grid, n_base)?;
    Ok(base
        .iter()
        .enumerate()
        .map(|(i, e)| e * Complex64::cis(TAU * phases.scaled(n, i)))
        .sum())
}
