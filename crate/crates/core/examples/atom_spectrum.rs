use fiberwise::lab::atom_spectrum;
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = FiberGrid::midpoint(1 << 14)?;
    let maps = [
        ("steps", AngleMap::piecewise_constant(vec![1.0 / 3.0, 2.0 / 3.0], vec![vec![0.1], vec![0.5], vec![0.7]])?),
        ("smooth", AngleMap::smooth_circle(0.5)?),
        ("cantor", AngleMap::cantor(24)?),
    ];
    for (name, f) in &maps {
        for m in [1, 5] {
            let r = atom_spectrum(f, &grid, &[m], 1e-3, 0.05)?;
            print!("{name:>6} m={m}: max window {:.4}, asynchronous {}", r.max_window_mass, r.asynchronous);
            for a in &r.atoms {
                print!("  atom {:.4} ({:.4})", a.location, a.mass);
            }
            println!();
        }
    }
    Ok(())
}
