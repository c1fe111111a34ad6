//! Normalize a curve presented inside a polynomial ring.
//!
//! Every subfield of `k(s)` that properly contains `k` is generated by
//! a single rational function; for subalgebras of `k[s]` the generator
//! can be taken to be a polynomial θ. `normalize_curve` finds θ, the
//! degree of the fraction-field extension it generates, and expressions
//! of the original generators as polynomials in θ.
//!
//! Here the input generators `s^4 + 2 s^2` and `s^6` are both
//! polynomials in θ = s^2, and the normalization is `k[θ]`.
//!
//! Run with: `cargo run --example luroth_normalize`

use polyembed::{
    luroth_generator, normalize_curve, FieldTower, RationalFunction, SubalgebraPresentation,
    UniPoly,
};

fn poly(t: &FieldTower, coeffs: &[i64]) -> UniPoly {
    UniPoly::from_coeffs(t, "s", coeffs.iter().map(|&c| t.from_integer(c)).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let g1 = poly(&q, &[0, 0, 2, 0, 1]); // s^4 + 2 s^2
    let g2 = poly(&q, &[0, 0, 0, 0, 0, 0, 1]); // s^6
    println!("generators: {g1} and {g2}");

    let pres = SubalgebraPresentation::new(&q, "s", vec![g1.clone(), g2.clone()])?;
    let norm = normalize_curve(&pres, 12)?;
    println!("θ = {}", norm.theta);
    println!("[k(s) : k(θ)] = {}", norm.index);

    let gens = [g1, g2];
    for (g, e) in gens.iter().zip(&norm.expressions) {
        println!("  {g} = ({e}) where {} = {}", norm.theta_var, norm.theta);
        assert_eq!(&e.compose(&norm.theta), g, "expressions are exact");
    }

    // The underlying field generator, found directly from the
    // generators viewed as rational functions.
    let funcs: Vec<RationalFunction> =
        gens.iter().map(|g| RationalFunction::from_poly(g.clone())).collect();
    let generator = luroth_generator(&funcs)?;
    println!(
        "fraction-field generator {generator} of map degree {}",
        generator.map_degree()
    );
    Ok(())
}
