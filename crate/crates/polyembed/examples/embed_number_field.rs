//! Embed a subalgebra with algebraic-number coefficients into a
//! polynomial ring in one variable.
//!
//! The input is `R = Q(a)[a*s^2, a*s^3]` with `a^2 = 2`. Over the
//! rationals those two generators admit no embedding, but after
//! adjoining a square root `c` of `a` the algebra maps onto
//! `Q(a, c)[t^2, c^{-1} t^3]`. The engine discovers the adjunction,
//! produces a certificate, and the verifier replays every check.
//!
//! Run with: `cargo run --example embed_number_field`

use polyembed::{
    construct_embedding, verify_certificate, EmbeddingProblem, FieldTower,
    SubalgebraPresentation, UniPoly,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let tower = q.extend_algebraic("a", UniPoly::from_coeffs(&q, "a", {
        vec![q.from_integer(-2), q.from_integer(0), q.from_integer(1)]
    }))?;
    let a = tower.generator_named("a").expect("a was just adjoined");

    let generators = vec![
        UniPoly::monomial("s", a.clone(), 2),
        UniPoly::monomial("s", a, 3),
    ];
    println!("input algebra over {}:", tower.describe());
    for g in &generators {
        println!("  {g}");
    }

    let presentation = SubalgebraPresentation::over_coefficient_field(
        &tower,
        "s",
        generators,
        &FieldTower::rationals(),
    )?;
    let problem = EmbeddingProblem::new(presentation)?.with_bound(10).with_seed(1);
    let cert = construct_embedding(&problem)?;

    println!("\ncase: {:?}", cert.case);
    println!("target tower: {}", cert.tower.describe());
    println!("t has degree {} in s", cert.d);
    for adj in &cert.adjunctions {
        println!("adjoined {} with minimal polynomial {}", adj.name, adj.minpoly);
    }
    for (i, img) in cert.images.iter().enumerate() {
        println!("generator {} maps to {}", i + 1, img);
    }

    let report = verify_certificate(&problem, &cert)?;
    println!("\nverified up to degree {}:", report.bound);
    for (n, src, img) in &report.ranks {
        println!("  degree {n}: source rank {src} = image rank {img}");
    }
    println!(
        "transcendence degree {} on both sides",
        report.trdeg_source
    );
    println!("t satisfies: {}", report.witnesses.t_equation);
    Ok(())
}
