use fiberwise::homogeneous::{haar_moments, haar_sample, stream_rng, DEFAULT_SEED};

fn main() -> fiberwise::Result<()> {
    let mut rng = stream_rng(DEFAULT_SEED, 0);
    let n = 200_000;
    let (mut inv, mut high) = (0.0, 0usize);
    for _ in 0..n {
        let z = haar_sample(&mut rng)?.base_point();
        inv += 1.0 / z.v;
        high += usize::from(z.v > 2.0);
    }
    let (mean_inv, p_high) = haar_moments();
    println!("E[1/v]  sample {:.5}  exact {mean_inv:.5}", inv / n as f64);
    println!("P(v>2)  sample {:.5}  exact {p_high:.5}", high as f64 / n as f64);
    Ok(())
}
