//! Subalgebra membership by subduction, with exact expressions.
//!
//! Subduction rewrites a polynomial against products of the generators
//! degree by degree. The outcome splits the input exactly as
//! `input = expression + remainder`: a zero remainder certifies
//! membership and the expression records how to rebuild the element
//! from the generators.
//!
//! The second half runs leading-term completion on `{s^2 + s, s^2}`,
//! whose difference uncovers `s` and enlarges the algebra to all of
//! `Q[s]`.
//!
//! Run with: `cargo run --example subduction_membership`

use polyembed::{FieldTower, SubalgebraPresentation, UniPoly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let s2 = UniPoly::monomial("s", q.one(), 2);
    let s3 = UniPoly::monomial("s", q.one(), 3);
    let pres = SubalgebraPresentation::new(&q, "s", vec![s2.clone(), s3.clone()])?;

    let member = s3.pow(2).add(&s2.mul(&s3).scale(&q.from_integer(2)));
    let outside = UniPoly::monomial("s", q.one(), 1);

    for f in [&member, &outside] {
        let out = pres.subduct(f, 12)?;
        println!("{f}:");
        if out.is_member() {
            println!("  member; expression in the generators g1 = {s2}, g2 = {s3}:");
            for ((_, exps), c) in out.expression.terms() {
                let factors: Vec<String> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| **e > 0)
                    .map(|(i, e)| format!("g{}^{}", i + 1, e))
                    .collect();
                println!("    {} * {}", c, factors.join(" * "));
            }
        } else {
            println!("  not a member below degree {}; remainder {}", out.bound, out.remainder);
        }
    }

    // Completion: the leading terms of {s^2 + s, s^2} both sit in
    // degree 2, and their difference is a new generator of degree 1.
    let pres = SubalgebraPresentation::new(
        &q,
        "s",
        vec![s2.add(&UniPoly::monomial("s", q.one(), 1)), s2.clone()],
    )?;
    let outcome = pres.sagbi_complete(12)?;
    println!("\ncompletion of {{s^2 + s, s^2}}:");
    for g in &outcome.added {
        println!("  added generator {g}");
    }
    println!("  stable: {}, iterations: {}", outcome.stable, outcome.iterations);
    Ok(())
}
