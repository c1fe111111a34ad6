//! Functional decomposition of univariate polynomials.
//!
//! `decompose_right(f, e)` finds, when it exists, a factorization
//! `f = g ∘ h` with `deg h = e`, where `h` is normalized to be monic
//! with zero constant term. Composed inputs always round-trip: the
//! recovered inner factor equals the original up to that affine
//! normalization.
//!
//! Run with: `cargo run --example decompose`

use polyembed::{FieldTower, UniPoly};

fn poly(t: &FieldTower, coeffs: &[i64]) -> UniPoly {
    UniPoly::from_coeffs(t, "s", coeffs.iter().map(|&c| t.from_integer(c)).collect())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = FieldTower::rationals();

    // g = s^2 + 3s - 1 composed with h = 2s^3 - s + 4.
    let g = poly(&q, &[-1, 3, 1]);
    let h = poly(&q, &[4, -1, 0, 2]);
    let f = g.compose(&h);
    println!("g = {g}");
    println!("h = {h}");
    println!("f = g(h) = {f}");

    match f.decompose_right(3)? {
        Some((outer, inner)) => {
            println!("\nrecovered outer factor {outer}");
            println!("recovered inner factor {inner}");
            assert_eq!(outer.compose(&inner), f, "exact recomposition");
            // inner = (h - h(0)) / lc(h): monic, zero constant term.
            let shifted = h.sub(&poly(&q, &[4]));
            let normalized = shifted.scale(&q.from_integer(2).inv()?);
            assert_eq!(inner, normalized, "inner factor is h after affine normalization");
            println!("matches h normalized to monic with zero constant term");
        }
        None => unreachable!("a composed input always decomposes"),
    }

    // An indecomposable example: degree 6 with no cubic right factor.
    let w = poly(&q, &[0, 1, 0, 0, 0, 0, 1]); // s^6 + s
    match w.decompose_right(3)? {
        Some(_) => unreachable!(),
        None => println!("\n{w} admits no right factor of degree 3"),
    }
    Ok(())
}
