//! The set of `n` with `D_{nf}` close to `lambda`, for the identity and for
//! the Cantor map. Powers of three stay far away for the latter.
use std::sync::Arc;

use fiberwise::lab::density_one_estimate;
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = Arc::new(FiberGrid::midpoint(4096)?);
    let id = density_one_estimate(&AngleMap::identity(), grid.clone(), 0.01, 100, 8, 8)?;
    println!("identity, eps 0.01: density {:.2}, first members {:?}", id.density, &id.members[..5]);

    let n = 500;
    let cantor = density_one_estimate(&AngleMap::cantor(24)?, grid, 0.2, n, 8, 8)?;
    println!("cantor, eps 0.2: density {:.3} up to {n}", cantor.density);
    let mut p = 1;
    while p <= n {
        println!("  n = {p:>3}: distance {:.4}, member {}", cantor.distances[p - 1], cantor.is_member(p as i64));
        p *= 3;
    }
    Ok(())
}
