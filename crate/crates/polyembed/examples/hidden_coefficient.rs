//! Detect a coefficient that cannot be specialized away.
//!
//! The algebra `Q(u)[s^2 + u s, s^3]` looks like a candidate for
//! specializing `u` to a rational number, but the naive choice `u = 0`
//! collapses a rank at degree 6: the combination
//! `(s^2 + u s)^3 - (s^3)^2 = 3u s^5 + 3u^2 s^4 + u^3 s^3` vanishes at
//! `u = 0` while staying nonzero generically. The engine records the
//! rejected specialization and keeps `u` in the coefficient tower of
//! the final certificate.
//!
//! Run with: `cargo run --example hidden_coefficient`

use polyembed::{
    construct_embedding, verify_certificate, EmbeddingProblem, FieldTower,
    SubalgebraPresentation, UniPoly,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tower = FieldTower::rationals().extend_transcendental("u")?;
    let u = tower.generator_named("u").expect("u was just adjoined");

    let g1 = UniPoly::monomial("s", tower.one(), 2).add(&UniPoly::monomial("s", u, 1));
    let g2 = UniPoly::monomial("s", tower.one(), 3);
    println!("generators over {}:", tower.describe());
    println!("  {g1}");
    println!("  {g2}");

    // The witness that separates the generic and specialized ranks.
    let witness = g1.pow(3).sub(&g2.pow(2));
    println!("\nwitness g1^3 - g2^2 = {witness}");

    let presentation = SubalgebraPresentation::over_coefficient_field(
        &tower,
        "s",
        vec![g1, g2],
        &FieldTower::rationals(),
    )?;
    let problem = EmbeddingProblem::new(presentation)?.with_bound(8);
    let cert = construct_embedding(&problem)?;

    for r in &cert.rejected_points {
        println!("specialization u = {} rejected: rank drop at degree {}", r.point, r.degree);
    }
    println!("final coefficient tower: {}", cert.tower.describe());
    assert!(cert.tower.contains_name("u"), "u must survive");

    verify_certificate(&problem, &cert)?;
    println!("certificate verified");
    Ok(())
}
