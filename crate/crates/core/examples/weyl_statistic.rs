//! Cesàro means of `|D_{nf}^(0, m)|^2`: the limit is the sum of squared atom
//! masses of `(chi_m o f)_* L`. The pair-sampled integral is printed beside it.
use fiberwise::lab::{weyl_pair_estimate, weyl_statistic};
use fiberwise::{AngleMap, FiberGrid};

fn main() -> fiberwise::Result<()> {
    let grid = FiberGrid::midpoint(8192)?;
    let third = AngleMap::tabulate_on(&grid, |x| vec![if x < 1.0 / 3.0 { 0.9 } else { x }])?;
    let maps = [
        ("constant", AngleMap::constant(vec![0.3])?),
        ("identity", AngleMap::identity()),
        ("atom 1/3", third),
        ("cantor", AngleMap::cantor(24)?),
    ];
    for (name, f) in &maps {
        let r = weyl_statistic(f, &grid, &[1], 5000, 0)?;
        let (mean, se) = weyl_pair_estimate(f, &grid, &[1], 5000, 0, 50_000, 1)?;
        let ladder: Vec<String> = r.n_values.iter().zip(&r.s_values).map(|(n, s)| format!("{n}:{s:.4}")).collect();
        println!("{name:>9}  S_5000 = {:.5}  pairs {mean:.5} ± {se:.5}", r.limit);
        println!("           {}", ladder.join(" "));
    }
    Ok(())
}
