//! Fourier decay of `D_{kf}` for a circle diffeomorphism. Decay is much
//! faster than `1/k` here since the map is analytic.
use fiberwise::lab::{decay_characters, decay_rate};
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = FiberGrid::midpoint(1 << 14)?;
    let f = AngleMap::smooth_circle(0.5)?;
    let ks = [1, 2, 5, 10, 25, 50, 100, 200];
    for (k, worst) in decay_rate(&f, &grid, &ks, &decay_characters(3, 3))? {
        println!("k = {k:>3}  max = {worst:.3e}  k*max = {:.3e}", k as f64 * worst);
    }
    // a map without a certified derivative is refused
    let err = decay_rate(&AngleMap::cantor(20)?, &grid, &[5], &decay_characters(3, 3)).unwrap_err();
    println!("cantor: {err}");
    Ok(())
}
