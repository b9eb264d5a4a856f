//! Birkhoff averages and correlations of the skew product `(a, alpha)`.
use fiberwise::homogeneous::{birkhoff_ensemble, correlation, stream_rng, trajectory};
use fiberwise::{ModelConfig, SkewState};

fn main() -> fiberwise::Result<()> {
    let cfg = ModelConfig::default();
    for t in [100, 1_000, 10_000] {
        let avgs = birkhoff_ensemble(&cfg, t, [1, 0], 8)?;
        let worst = avgs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        println!("T = {t:>6}: max |average| over 8 orbits {worst:.4}");
    }
    for lag in [0, 1, 5, 30] {
        let c = correlation(&cfg, [1, 0], [1, 0], lag, 20_000)?;
        println!("lag {lag:>2}: |corr| {:.4} ± {:.4}", c.value().norm(), c.std_err);
    }
    let s0 = SkewState::random(&mut stream_rng(cfg.seed, 0))?;
    for (k, s) in trajectory(&s0, &cfg, 5)?.iter().enumerate() {
        let (u, v, theta) = s.x.iwasawa();
        println!("step {k}: u {u:+.3} v {v:.3} theta {theta:.3} vbar ({:.4}, {:.4})", s.vbar[0], s.vbar[1]);
    }
    Ok(())
}
