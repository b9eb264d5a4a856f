//! Reduce a few elements of SL(2,R) modulo SL(2,Z).
use fiberwise::homogeneous::reduce;
use fiberwise::GroupElement;

fn main() -> fiberwise::Result<()> {
    let samples = [
        GroupElement::unipotent(0.7) * GroupElement::dilation(0.8),
        GroupElement::unipotent(3.25) * GroupElement::dilation(0.01),
        GroupElement::rotation(1.0) * GroupElement::diagonal(2.0) * GroupElement::unipotent(-4.3),
    ];
    for h in samples {
        let g = h.inverse();
        let before = g.base_point();
        let (x, gamma) = reduce(&g)?;
        let after = x.base_point();
        println!(
            "{:+.4}{:+.4}i -> {:+.4}{:+.4}i  gamma = {:?}  |x gamma^-1 - g| = {:.1e}",
            before.u,
            before.v,
            after.u,
            after.v,
            gamma.0,
            (x * gamma.inverse()).max_abs_diff(&g)
        );
    }
    Ok(())
}
