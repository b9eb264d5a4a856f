//! The induced angle map `x -> rho(x)^{-1} beta` on Haar samples has no atoms.
use fiberwise::homogeneous::induced_angle_grid;
use fiberwise::lab::{atom_spectrum, weyl_statistic};
use fiberwise::ModelConfig;

fn main() -> fiberwise::Result<()> {
    let cfg = ModelConfig::default();
    let (grid, f) = induced_angle_grid(&cfg, 20_000)?;
    for m in [[1, 0], [0, 1], [1, 1], [2, -1]] {
        let atoms = atom_spectrum(&f, &grid, &m, 1e-3, 0.05)?;
        let weyl = weyl_statistic(&f, &grid, &m, 1000, 0)?;
        println!("m = {m:?}: max window {:.4}, S_1000 {:.5}", atoms.max_window_mass, weyl.limit);
    }
    Ok(())
}
