//! A verified obstruction trace for derivations on singular curves.
//!
//! Take the cuspidal coordinate ring `R = k[s^2, s^3]` and a derivation
//! `D` of `R[x]` that kills both curve generators and sends `x` to an
//! element of `R`. The trace walks the argument that any such `D` must
//! in fact kill the normalization parameter as well: the conductor of
//! the singular curve forces `D(θ) = 0`, so `D` restricts to zero on
//! all of `R`. Each step of the derivation carries a statement that is
//! re-verified numerically before the verdict is issued.
//!
//! The contrast case is the smooth line `R = k[s]`, where the same
//! setup meets no obstruction.
//!
//! Run with: `cargo run --example cancellation`

use polyembed::{cancellation_trace, FieldTower, MPolyRing, SubalgebraPresentation, UniPoly};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let s2 = UniPoly::monomial("s", q.one(), 2);
    let s3 = UniPoly::monomial("s", q.one(), 3);
    let cusp = SubalgebraPresentation::new(&q, "s", vec![s2.clone(), s3])?;
    let ring = MPolyRing::new(&q, &["s", "x"]);

    println!("== cuspidal curve k[s^2, s^3], derivation with D(x) = s^2 ==");
    let trace = cancellation_trace(
        &cusp,
        &ring,
        &[ring.zero(), ring.zero()],
        &[ring.var("s").powu(2)],
        12,
    )?;
    for step in &trace.steps {
        let mark = if step.verified { "ok" } else { "??" };
        println!("[{mark}] {}: {}", step.label, step.statement);
    }
    println!("conductor exponent: {}", trace.conductor_exponent);
    println!("verdict: {}", trace.verdict);

    println!("\n== smooth line k[s], same shape of derivation ==");
    let line = SubalgebraPresentation::new(&q, "s", vec![UniPoly::monomial("s", q.one(), 1)])?;
    let trace = cancellation_trace(&line, &ring, &[ring.zero()], &[ring.one()], 12)?;
    for step in &trace.steps {
        let mark = if step.verified { "ok" } else { "??" };
        println!("[{mark}] {}: {}", step.label, step.statement);
    }
    println!("verdict: {}", trace.verdict);
    Ok(())
}
