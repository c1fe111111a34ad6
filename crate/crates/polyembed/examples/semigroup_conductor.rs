//! Numerical semigroups and the conductor of a monomial curve.
//!
//! The value semigroup of `R = k[t^2, t^3]` is generated by 2 and 3; it
//! misses only 1, so the conductor ideal into the normalization `k[t]`
//! is generated by `t^2`. The same data is recomputed symbolically from
//! the presentation, and a bounded bidegree check confirms the exponent
//! stays sharp after adjoining an extra polynomial variable.
//!
//! Run with: `cargo run --example semigroup_conductor`

use polyembed::{
    conductor, conductor_extension_check, normalize_curve, ConductorResult, FieldTower,
    NumericalSemigroup, SubalgebraPresentation, UniPoly,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sg = NumericalSemigroup::from_generators(&[2, 3])?;
    println!("semigroup <2, 3>:");
    let members: Vec<String> =
        (0..8).map(|n| if sg.contains(n) { n.to_string() } else { format!("({n})") }).collect();
    println!("  values 0..8 (gaps in parentheses): {}", members.join(" "));
    println!("  conductor exponent: {}", sg.conductor_exponent());

    // The same exponent from the curve presentation.
    let q = FieldTower::rationals();
    let s2 = UniPoly::monomial("s", q.one(), 2);
    let s3 = UniPoly::monomial("s", q.one(), 3);
    let pres = SubalgebraPresentation::new(&q, "s", vec![s2, s3])?;
    let norm = normalize_curve(&pres, 12)?;
    println!("\nnormalization parameter: {}", norm.theta);
    match conductor(&pres, &norm, 12)? {
        ConductorResult::Principal { exponent } => {
            println!("conductor is principal with exponent {exponent}");
        }
        ConductorResult::Bounded { basis, bound } => {
            println!("conductor bounded at {bound}: {} basis rows", basis.len());
        }
    }

    // Stability under one polynomial extension, checked to bidegree 10.
    let check = conductor_extension_check(&sg, 2, 10);
    println!(
        "\nextension check to bidegree {}: stable = {}, exponent still minimal = {}",
        check.bidegree_bound, check.stable, check.minimal
    );
    Ok(())
}
