//! Extend a derivation from a curve algebra to its normalization.
//!
//! A derivation of `R = k[g_1, ..., g_n] ⊆ k[s]` is given by images of
//! the generators. Writing each generator as `e_i(θ)` in the
//! normalization parameter, the chain rule forces
//! `D(g_i) = e_i'(θ) · D(θ)`, which pins down `D(θ)` by exact division.
//! When the input derivation is locally nilpotent, the extension is
//! too — the example checks the verdict that certifies it.
//!
//! Here `R = k[h, h^2 + 3h]` for `h = s^2 + s`, with `D` determined by
//! `D(h) = 2`.
//!
//! Run with: `cargo run --example extend_derivation`

use polyembed::{
    extend_to_normalization, normalize_curve, FieldTower, NilpotencyVerdict,
    SubalgebraPresentation, UniPoly,
};

fn poly(t: &FieldTower, coeffs: &[i64]) -> UniPoly {
    UniPoly::from_coeffs(t, "s", coeffs.iter().map(|&c| t.from_integer(c)).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();
    let h = poly(&q, &[0, 1, 1]); // s^2 + s
    let p = poly(&q, &[0, 3, 1]); // outer factor s^2 + 3s
    let g2 = p.compose(&h);

    let pres = SubalgebraPresentation::new(&q, "s", vec![h.clone(), g2.clone()])?;
    println!("generators: {h} and {g2}");

    let norm = normalize_curve(&pres, 16)?;
    println!("normalization parameter θ = {}", norm.theta);

    // D(h) = 2, and D(g2) = p'(h) · D(h) by the chain rule.
    let dh = poly(&q, &[2]);
    let dg2 = p.derivative().compose(&h).scale(&q.from_integer(2));
    println!("input derivation: D(g1) = {dh}, D(g2) = {dg2}");

    let ext = extend_to_normalization(&pres, &[dh, dg2], &norm, 12, true)?;
    println!("extended: D(θ) = {}", ext.dtheta);
    match &ext.verdict {
        NilpotencyVerdict::ProvenNilpotent { indices } => {
            for (name, n) in indices {
                println!("D^{n}({name}) = 0: the extension is locally nilpotent");
            }
        }
        other => println!("unexpected verdict: {other}"),
    }
    Ok(())
}
