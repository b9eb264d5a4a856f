//! Graph measures under fiberwise convolution: identity, inverses, absorption.
use std::sync::Arc;

use fiberwise::measure::FiberedMeasure;
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = Arc::new(FiberGrid::midpoint(512)?);
    let f = AngleMap::smooth_circle(0.4)?;
    let g = AngleMap::piecewise_constant(vec![0.5], vec![vec![0.2], vec![0.7]])?;

    let df = FiberedMeasure::graph(&f, grid.clone(), 8)?;
    let dg = FiberedMeasure::graph(&g, grid.clone(), 8)?;
    let d0 = FiberedMeasure::graph(&AngleMap::zero(1), grid.clone(), 8)?;
    let lambda = FiberedMeasure::haar(grid.clone(), 1, 8)?;

    let fg = df.convolve(&dg)?;
    let gf = dg.convolve(&df)?;
    let inverse = df.convolve(&FiberedMeasure::graph(&f.scale(-1), grid.clone(), 8)?)?;
    println!("d(Df*Dg, Dg*Df)      = {:.3e}", fg.distance(&gf, 8)?);
    println!("d(Df*D-f, D0)        = {:.3e}", inverse.distance(&d0, 8)?);
    println!("d(Df*lambda, lambda) = {:.3e}", df.convolve(&lambda)?.distance(&lambda, 8)?);
    println!("d(Df, lambda)        = {:.6}", df.distance(&lambda, 8)?);
    Ok(())
}
