use fiberwise::lab::{cantor_obstruction, cantor_transform_modulus};

fn main() -> fiberwise::Result<()> {
    for m in [1, 2, 4] {
        let moduli = cantor_obstruction(m, 8, 24, 1 << 16)?;
        println!("m = {m}: product formula {:.10}", cantor_transform_modulus(m, 40));
        for (k, v) in moduli.iter().enumerate() {
            println!("  |D^(0, {m})| at n = 3^{k}: {v:.10}");
        }
    }
    Ok(())
}
