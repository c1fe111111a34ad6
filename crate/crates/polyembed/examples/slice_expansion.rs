//! Expand polynomials along a slice of a locally nilpotent derivation.
//!
//! For `D = x ∂/∂y` on `k[x, y]`, the variable `y` has image
//! `D(y) = x` lying in the kernel of `D`, so `y` becomes a slice once
//! `x` is inverted. Every polynomial `b` then expands as
//! `b = Σ aᵢ yⁱ` with kernel coefficients `aᵢ ∈ k[x][1/x]`, each
//! returned as a numerator plus a power of `x` to divide by.
//!
//! Run with: `cargo run --example slice_expansion`

use polyembed::{
    default_nilpotency_bound, is_locally_nilpotent, slice_expansion, FieldTower, MPolyRing,
    PolyDerivation, SliceData,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let ring = MPolyRing::new(&q, &["x", "y"]);
    let x = ring.var("x");
    let y = ring.var("y");
    let d = PolyDerivation::new(&ring, vec![ring.zero(), x.clone()])?;
    println!("D(x) = 0, D(y) = x on Q[x, y]");

    let verdict = is_locally_nilpotent(&d, default_nilpotency_bound(&d));
    println!("nilpotency: {verdict}");

    let slice = SliceData::new(&d, &y)?;

    // b = y^3 + x y + x^2
    let b = y.powu(3).add(&x.mul(&y)).add(&x.powu(2));
    println!("\nexpanding b = {b} in powers of y:");
    let coeffs = slice_expansion(&d, &slice, &b, 40)?;
    for (i, c) in coeffs.iter().enumerate() {
        if c.numerator.is_zero() {
            continue;
        }
        if c.denominator_power == 0 {
            println!("  y^{i} coefficient: {}", c.numerator);
        } else {
            println!("  y^{i} coefficient: ({}) / x^{}", c.numerator, c.denominator_power);
        }
        assert!(d.apply(&c.numerator).is_zero(), "coefficients lie in the kernel");
    }

    // Exact reconstruction after clearing the common denominator.
    let m = coeffs.iter().map(|c| c.denominator_power).max().unwrap_or(0);
    let mut acc = ring.zero();
    for (i, c) in coeffs.iter().enumerate() {
        acc = acc.add(&c.numerator.mul(&x.powu(m - c.denominator_power)).mul(&y.powu(i as u32)));
    }
    assert_eq!(acc, b.mul(&x.powu(m)));
    println!("reconstruction b * x^{m} = Σ coeff_i * y^i matches exactly");
    Ok(())
}
