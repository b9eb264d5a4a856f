//! `D_{kf} -> lambda` while `D_{kf} * D_{-kf} = D_0` stays put, so the product
//! is not continuous in the truncated metric.
use std::sync::Arc;

use fiberwise::measure::FiberedMeasure;
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = Arc::new(FiberGrid::midpoint(4096)?);
    let lambda = FiberedMeasure::haar(grid.clone(), 1, 8)?;
    println!("{:>4} {:>12} {:>12}", "k", "d(Dkf)", "d(Dkf*D-kf)");
    for k in [1, 2, 4, 8, 9, 16, 100, 200] {
        let f = AngleMap::identity().scale(k);
        let d = FiberedMeasure::graph(&f, grid.clone(), 8)?;
        let back = d.convolve(&FiberedMeasure::graph(&f.scale(-1), grid.clone(), 8)?)?;
        println!("{k:>4} {:>12.3e} {:>12.9}", d.distance(&lambda, 8)?, back.distance(&lambda, 8)?);
    }
    Ok(())
}
