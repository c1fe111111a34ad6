//! Acceptance suite: one test per criterion, each printing a single
//! pass line on success. Random cases use a fixed splitmix64 stream, so
//! every run exercises identical inputs.

use std::path::Path;
use std::process::Command;

use num::BigRational;
use polyembed::cli;
use polyembed::{
    cancellation_trace, conductor, conductor_extension_check, construct_embedding,
    extend_to_normalization, jacobian_trdeg, normalize_curve, verify_certificate,
    EmbeddingCase, EmbeddingProblem, FieldElement, FieldTower, GenExpr, MPoly, MPolyRing,
    NilpotencyVerdict, NormalizeError, NumericalSemigroup, PolyDerivation, RejectedPoint,
    SliceData, SubalgebraPresentation, UniPoly,
};

fn q() -> FieldTower {
    FieldTower::rationals()
}

fn upoly(t: &FieldTower, var: &str, coeffs: &[i64]) -> UniPoly {
    UniPoly::from_coeffs(t, var, coeffs.iter().map(|&c| t.from_integer(c)).collect())
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Random polynomial of exact degree `deg` with coefficients in -3..=3
/// and a nonzero leading coefficient.
fn random_poly(t: &FieldTower, state: &mut u64, var: &str, deg: usize) -> UniPoly {
    let mut coeffs: Vec<FieldElement> =
        (0..deg).map(|_| t.from_integer((splitmix(state) % 7) as i64 - 3)).collect();
    let lead = 1 + (splitmix(state) % 3) as i64;
    let sign = if splitmix(state).is_multiple_of(2) { 1 } else { -1 };
    coeffs.push(t.from_integer(sign * lead));
    UniPoly::from_coeffs(t, var, coeffs)
}

/// Affine normalization used by the decomposition engine: monic with
/// zero constant term.
fn affine_normalize(h: &UniPoly) -> UniPoly {
    let t = h.tower().clone();
    let shifted = h.sub(&UniPoly::from_coeffs(&t, "s", vec![h.coefficient(0)]));
    let lc = shifted.leading_coefficient().expect("non-constant input").clone();
    shifted.scale(&lc.inv().expect("nonzero leading coefficient"))
}

/// Evaluate a recorded product combination back into the ambient
/// variable.
fn eval_expression(e: &GenExpr, gens: &[UniPoly], t: &FieldTower, var: &str) -> UniPoly {
    let mut acc = UniPoly::zero(t, var);
    for ((_, exps), c) in e.terms() {
        let mut term = UniPoly::from_coeffs(t, var, vec![c.clone()]);
        for (g, &e) in gens.iter().zip(exps.iter()) {
            term = term.mul(&g.pow(e as usize));
        }
        acc = acc.add(&term);
    }
    acc
}

// ---------------------------------------------------------------------------
// Rational row reduction, independent of the library's internals.
// ---------------------------------------------------------------------------

struct Gauss {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Gauss {
    fn new() -> Gauss {
        Gauss { rows: Vec::new() }
    }

    /// Reduce and insert; returns true when the vector was independent.
    fn insert(&mut self, mut v: Vec<BigRational>) -> bool {
        loop {
            let Some(p) = v.iter().position(|c| !c.eq(&BigRational::from_integer(0.into())))
            else {
                return false;
            };
            match self.rows.iter().find(|(pivot, _)| *pivot == p) {
                Some((_, row)) => {
                    let factor = v[p].clone() / row[p].clone();
                    for (vi, ri) in v.iter_mut().zip(row.iter()) {
                        *vi -= factor.clone() * ri.clone();
                    }
                }
                None => {
                    self.rows.push((p, v));
                    return true;
                }
            }
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn poly_row(p: &UniPoly, width: usize) -> Vec<BigRational> {
    (0..width)
        .map(|i| p.coefficient(i).as_rational().expect("rational coefficient"))
        .collect()
}

/// Independent membership oracle: `f` lies in the span of all products
/// of the generators with weighted degree at most `bound`.
fn oracle_member(gens: &[UniPoly], f: &UniPoly, bound: usize, t: &FieldTower) -> bool {
    let degs: Vec<usize> =
        gens.iter().map(|g| g.degree().expect("non-constant generator")).collect();
    let width = bound + 1;
    let mut gauss = Gauss::new();
    let mut tuple = vec![0usize; gens.len()];
    loop {
        let wdeg: usize = tuple.iter().zip(&degs).map(|(e, d)| e * d).sum();
        if wdeg <= bound {
            let mut prod = UniPoly::from_coeffs(t, "s", vec![t.one()]);
            for (g, &e) in gens.iter().zip(tuple.iter()) {
                prod = prod.mul(&g.pow(e));
            }
            gauss.insert(poly_row(&prod, width));
        }
        // advance the tuple; each exponent is bounded by bound/deg
        let mut i = 0;
        loop {
            if i == tuple.len() {
                let before = gauss.rank();
                let independent = gauss.insert(poly_row(f, width));
                assert_eq!(independent, gauss.rank() > before);
                return !independent;
            }
            tuple[i] += 1;
            if tuple[i] * degs[i] <= bound {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_quadratic_coefficient_embedding() {
    let t = q()
        .extend_algebraic("a", upoly(&q(), "a", &[-2, 0, 1]))
        .expect("quadratic extension");
    let a = t.generator_named("a").expect("generator a");
    let g1 = UniPoly::monomial("s", a.clone(), 2);
    let g2 = UniPoly::monomial("s", a, 3);
    let pres =
        SubalgebraPresentation::over_coefficient_field(&t, "s", vec![g1.clone(), g2.clone()], &q())
            .expect("presentation");
    let prob = EmbeddingProblem::new(pres).expect("problem").with_bound(10).with_seed(1);
    let cert = construct_embedding(&prob).expect("certificate");

    assert_eq!(cert.case, EmbeddingCase::AlgebraicCoefficients);
    assert_eq!(cert.d, 1);
    assert_eq!(cert.adjunctions.len(), 1, "exactly one adjunction");
    assert_eq!(cert.adjunctions[0].name, "c");
    assert_eq!(cert.adjunctions[0].minpoly.to_string(), "c^2 - a");
    let f = &cert.tower;
    assert!(f.contains_name("a"), "the certificate's field tower keeps a");
    let c = f.generator_named("c").expect("adjoined root");
    assert_eq!(cert.images[0], UniPoly::monomial("t", f.one(), 2));
    assert_eq!(
        cert.images[1],
        UniPoly::monomial("t", c.inv().expect("nonzero root"), 3),
        "second image is the inverse root times t^3"
    );

    let report = verify_certificate(&prob, &cert).expect("verification");
    assert_eq!(report.bound, 10);
    assert!(!report.degree_table.is_empty());
    assert!(report.ranks.iter().all(|&(_, s, i)| s == i));
    assert_eq!((report.trdeg_source, report.trdeg_image), (1, 1));
    assert!(!report.witnesses.t_equation.is_empty());

    assert_eq!(jacobian_trdeg(&[g1.clone(), g2.clone()]).expect("rank"), 1);

    let pres_q =
        SubalgebraPresentation::over_coefficient_field(&t, "s", vec![g1, g2], &q())
            .expect("presentation");
    let err = normalize_curve(&pres_q, 12).unwrap_err();
    assert!(
        matches!(err, NormalizeError::GeneratorsOutsideCoefficientField(_)),
        "normalization over the rationals must refuse: {err}"
    );
    println!("acceptance criterion 1 (quadratic-coefficient embedding): pass");
}

#[test]
fn criterion_02_hidden_coefficient_detection() {
    let t = q().extend_transcendental("u").expect("transcendental extension");
    let u = t.generator_named("u").expect("generator u");
    let g1 = UniPoly::monomial("s", t.one(), 2).add(&UniPoly::monomial("s", u.clone(), 1));
    let g2 = UniPoly::monomial("s", t.one(), 3);
    let pres =
        SubalgebraPresentation::over_coefficient_field(&t, "s", vec![g1.clone(), g2.clone()], &q())
            .expect("presentation");
    let prob = EmbeddingProblem::new(pres).expect("problem").with_bound(8);
    let cert = construct_embedding(&prob).expect("certificate");

    assert_eq!(
        cert.rejected_points,
        vec![RejectedPoint { point: 0, degree: 6 }],
        "u = 0 is rejected by the rank drop at degree 6"
    );
    assert!(cert.tower.contains_name("u"), "the final tower keeps u");
    assert!(cert.tower.has_transcendental());
    verify_certificate(&prob, &cert).expect("verification");

    // The exact witness separating the ranks: g1^3 - g2^2.
    let witness = g1.pow(3).sub(&g2.pow(2));
    let u2 = u.mul(&u);
    let u3 = u2.mul(&u);
    let expected = UniPoly::monomial("s", t.from_integer(3).mul(&u), 5)
        .add(&UniPoly::monomial("s", t.from_integer(3).mul(&u2), 4))
        .add(&UniPoly::monomial("s", u3, 3));
    assert_eq!(witness, expected, "3us^5 + 3u^2s^4 + u^3s^3 exactly");
    println!("acceptance criterion 2 (hidden-coefficient detection): pass");
}

#[test]
fn criterion_03_semigroup_and_conductor() {
    let sg = NumericalSemigroup::from_generators(&[2, 3]).expect("semigroup");
    assert_eq!(sg.conductor_exponent(), 2);
    for n in 0..=20usize {
        let brute = (0..=10).any(|a| (0..=6).any(|b| 2 * a + 3 * b == n));
        assert_eq!(sg.contains(n), brute, "membership of {n}");
    }

    let t = q();
    let pres = SubalgebraPresentation::new(
        &t,
        "s",
        vec![upoly(&t, "s", &[0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 1])],
    )
    .expect("presentation");
    let norm = normalize_curve(&pres, 12).expect("normalization");
    let cond = conductor(&pres, &norm, 12).expect("conductor");
    assert!(
        matches!(cond, polyembed::ConductorResult::Principal { exponent: 2 }),
        "conductor exponent 2 exactly"
    );

    let check = conductor_extension_check(&sg, 2, 10);
    assert!(check.stable, "exponent persists for the extended ring");
    assert!(check.minimal, "exponent stays sharp for the extended ring");
    assert_eq!((check.exponent, check.bidegree_bound), (2, 10));
    println!("acceptance criterion 3 (semigroup and conductor): pass");
}

#[test]
fn criterion_04_subduction_matches_rank_oracle() {
    let t = q();
    let mut state = 0x5eed_0004u64;
    for case in 0..100 {
        let ngens = 1 + (splitmix(&mut state) % 3) as usize;
        let gens: Vec<UniPoly> = (0..ngens)
            .map(|_| {
                let deg = 1 + (splitmix(&mut state) % 6) as usize;
                random_poly(&t, &mut state, "s", deg)
            })
            .collect();
        let pres = SubalgebraPresentation::new(&t, "s", gens.clone())
            .expect("all generators have positive degree");
        let fdeg = (splitmix(&mut state) % 13) as usize;
        let f = random_poly(&t, &mut state, "s", fdeg);

        let verdict = pres.subduct(&f, 12).expect("subduction").is_member();
        let oracle = oracle_member(&gens, &f, 12, &t);
        assert_eq!(verdict, oracle, "case {case}: gens {gens:?}");
    }
    println!("acceptance criterion 4 (subduction vs rank oracle, 100 cases): pass");
}

#[test]
fn criterion_05_decomposition_round_trip() {
    let t = q();
    let mut state = 0x5eed_0005u64;
    for case in 0..50 {
        let dg = 1 + (splitmix(&mut state) % 4) as usize;
        let dh = 1 + (splitmix(&mut state) % 4) as usize;
        let g = random_poly(&t, &mut state, "s", dg);
        let h = random_poly(&t, &mut state, "s", dh);
        let f = g.compose(&h);
        let (g2, h2) = f
            .decompose_right(dh)
            .expect("decomposition arithmetic")
            .expect("a right factor of the composed degree exists");
        assert_eq!(h2, affine_normalize(&h), "case {case}: h up to affine normalization");
        assert_eq!(g2.compose(&h2), f, "case {case}: outer factor recomposes");
    }
    println!("acceptance criterion 5 (decomposition round-trip, 50 cases): pass");
}

#[test]
fn criterion_06_luroth_normalization() {
    let t = q();
    let mut state = 0x5eed_0006u64;
    let mut count = 0;
    let mut attempts = 0;
    while count < 25 {
        attempts += 1;
        assert!(attempts < 500, "sampling must terminate");
        let dh = 2 + (splitmix(&mut state) % 2) as usize; // 2 or 3: prime degrees
        let dg = 2 + (splitmix(&mut state) % 3) as usize;
        let h = random_poly(&t, &mut state, "s", dh);
        let g = random_poly(&t, &mut state, "s", dg);
        let f = g.compose(&h);
        // Keep only samples where deg h is the minimal right-factor
        // degree, so the recovered generator is h itself.
        let n = f.degree().expect("composition is non-constant");
        let minimal = (2..dh).all(|e| {
            !n.is_multiple_of(e) || f.decompose_right(e).expect("arithmetic").is_none()
        });
        if !minimal {
            continue;
        }
        count += 1;

        let pres = SubalgebraPresentation::new(&t, "s", vec![f.clone()])
            .expect("presentation");
        let norm = normalize_curve(&pres, 16).expect("normalization");
        let hn = affine_normalize(&h);
        assert_eq!(norm.theta, hn, "theta equals the normalized inner factor");

        // Mutual subduction: each generator lies in the algebra of the
        // other, with exact recorded expressions.
        let p_theta = SubalgebraPresentation::new(&t, "s", vec![norm.theta.clone()])
            .expect("presentation");
        let out = p_theta.subduct(&hn, 16).expect("subduction");
        assert!(out.is_member());
        assert_eq!(eval_expression(&out.expression, std::slice::from_ref(&norm.theta), &t, "s"), hn);

        let p_h = SubalgebraPresentation::new(&t, "s", vec![hn.clone()])
            .expect("presentation");
        let out = p_h.subduct(&norm.theta, 16).expect("subduction");
        assert!(out.is_member());
        assert_eq!(eval_expression(&out.expression, &[hn], &t, "s"), norm.theta);
    }
    println!("acceptance criterion 6 (single-generator normalization, 25 cases): pass");
}

#[test]
fn criterion_07_slice_expansion() {
    let t = q();
    let ring = MPolyRing::new(&t, &["x", "y"]);
    let d = PolyDerivation::new(&ring, vec![ring.zero(), ring.var("x")])
        .expect("derivation x d/dy");
    let y = ring.var("y");
    let x = ring.var("x");
    let slice = SliceData::new(&d, &y).expect("y is a slice");

    let mut state = 0x5eed_0007u64;
    for case in 0..50 {
        let mut b = ring.zero();
        let nterms = 1 + (splitmix(&mut state) % 6) as usize;
        for _ in 0..nterms {
            let dx = (splitmix(&mut state) % 5) as u32;
            let dy = (splitmix(&mut state) % 5).min(8 - dx as u64) as u32;
            let c = t.from_integer((splitmix(&mut state) % 7) as i64 - 3);
            b = b.add(&ring.monomial(&[dx, dy], c));
        }
        let coeffs = slice_expand(&d, &slice, &b);
        // Reconstruct b exactly in the localization at x: clear the
        // common denominator and compare polynomials.
        let m = coeffs.iter().map(|c| c.denominator_power).max().unwrap_or(0);
        let mut acc = ring.zero();
        for (i, c) in coeffs.iter().enumerate() {
            assert!(d.apply(&c.numerator).is_zero(), "case {case}: kernel coefficient");
            let term =
                c.numerator.mul(&x.powu(m - c.denominator_power)).mul(&y.powu(i as u32));
            acc = acc.add(&term);
        }
        assert_eq!(acc, b.mul(&x.powu(m)), "case {case}: exact reconstruction");
    }

    // The derivation preserves total degree, so each finite-dimensional
    // piece V_i of polynomials of total degree <= i maps into itself.
    for i in [2u32, 3] {
        for a in 0..=i {
            for bdeg in 0..=(i - a) {
                let mono = ring.monomial(&[a, bdeg], t.one());
                let img = d.apply(&mono);
                let deg = img.total_degree().unwrap_or(0);
                assert!(deg <= i as usize, "D(V_{i}) stays in V_{i}");
            }
        }
    }
    println!("acceptance criterion 7 (slice expansion and linearity, 50 cases): pass");
}

fn slice_expand(
    d: &PolyDerivation,
    slice: &SliceData,
    b: &MPoly,
) -> Vec<polyembed::SliceCoefficient> {
    polyembed::slice_expansion(d, slice, b, 40).expect("expansion terminates")
}

#[test]
fn criterion_08_cancellation_traces() {
    let t = q();
    let pres = SubalgebraPresentation::new(
        &t,
        "s",
        vec![upoly(&t, "s", &[0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 1])],
    )
    .expect("presentation");
    let ring = MPolyRing::new(&t, &["s", "x"]);
    let zero_gens = vec![ring.zero(), ring.zero()];

    for var_image in [ring.one(), ring.var("s").powu(2)] {
        let trace = cancellation_trace(&pres, &ring, &zero_gens, &[var_image], 12)
            .expect("trace");
        assert_eq!(trace.verdict, "D kills R");
        assert_eq!(trace.conductor_exponent, 2);
        assert!(trace.steps.iter().all(|s| s.verified), "every step re-verified");
        let kernel = trace
            .steps
            .iter()
            .find(|s| s.label == "kernel-equation")
            .expect("the trace derives the kernel equation");
        assert!(kernel.statement.contains("= 0"), "Dh = 0 is derived");
    }

    // Normal curve: the conductor is trivial and no obstruction arises.
    let line = SubalgebraPresentation::new(&t, "s", vec![upoly(&t, "s", &[0, 1])])
        .expect("presentation");
    let trace = cancellation_trace(&line, &ring, &[ring.zero()], &[ring.one()], 12)
        .expect("trace");
    assert_eq!(trace.verdict, "h lies in k*; R is normal, no obstruction");
    assert!(trace.steps.iter().all(|s| s.verified));
    println!("acceptance criterion 8 (cancellation traces): pass");
}

#[test]
fn criterion_09_extension_nilpotency_composite() {
    let t = q();
    let mut state = 0x5eed_0009u64;
    let mut calls = 0;

    // Triangular family: R = k[h] or k[h, p(h)], with D(h) a nonzero
    // constant and D(p(h)) = p'(h)·D(h).
    for case in 0..16 {
        let dh = match splitmix(&mut state) % 3 {
            0 => 1,
            1 => 2,
            _ => 3,
        };
        let h = random_poly(&t, &mut state, "s", dh);
        let c = t.from_integer(1 + (splitmix(&mut state) % 4) as i64);
        let mut gens = vec![h.clone()];
        let mut images = vec![UniPoly::from_coeffs(&t, "s", vec![c.clone()])];
        if splitmix(&mut state).is_multiple_of(2) {
            let dp = 1 + (splitmix(&mut state) % 2) as usize;
            let p = random_poly(&t, &mut state, "s", dp);
            gens.push(p.compose(&h));
            images.push(p.derivative().compose(&h).scale(&c));
        }
        let pres =
            SubalgebraPresentation::new(&t, "s", gens).expect("presentation");
        let norm = normalize_curve(&pres, 16).expect("normalization");
        let ext = extend_to_normalization(&pres, &images, &norm, 12, true)
            .expect("extension stays consistent");
        assert!(
            matches!(ext.verdict, NilpotencyVerdict::ProvenNilpotent { .. }),
            "case {case}: {:?}",
            ext.verdict
        );
        calls += 1;
    }

    // Zero derivations on singular curves extend to the zero derivation.
    let singular: [Vec<UniPoly>; 4] = [
        vec![upoly(&t, "s", &[0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 1])],
        vec![upoly(&t, "s", &[0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 0, 0, 1])],
        vec![upoly(&t, "s", &[0, 0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 0, 1])],
        vec![upoly(&t, "s", &[0, 0, 1]), upoly(&t, "s", &[0, 0, 0, 1, 0, 1])],
    ];
    for gens in singular {
        let images: Vec<UniPoly> = gens.iter().map(|_| UniPoly::zero(&t, "s")).collect();
        let pres =
            SubalgebraPresentation::new(&t, "s", gens).expect("presentation");
        let norm = normalize_curve(&pres, 16).expect("normalization");
        let ext = extend_to_normalization(&pres, &images, &norm, 12, true)
            .expect("zero derivation extends");
        assert!(matches!(ext.verdict, NilpotencyVerdict::ProvenNilpotent { .. }));
        calls += 1;
    }

    assert_eq!(calls, 20, "twenty extension calls, all proven nilpotent");
    println!("acceptance criterion 9 (normalization extensions stay nilpotent, 20 cases): pass");
}

#[test]
fn criterion_10_cli_corpus_determinism() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .expect("problems directory")
        .map(|e| e.expect("directory entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "prob"))
        .collect();
    names.sort();
    assert!(names.len() >= 8, "the corpus covers every task kind");

    let exe = env!("CARGO_BIN_EXE_polyembed");
    for path in &names {
        let runs: Vec<(Vec<u8>, Option<i32>)> = (0..2)
            .map(|_| {
                let out = Command::new(exe)
                    .arg("--input")
                    .arg(path)
                    .arg("--json")
                    .output()
                    .expect("driver runs");
                (out.stdout, out.status.code())
            })
            .collect();
        assert_eq!(
            runs[0].0,
            runs[1].0,
            "byte-identical JSON for {}",
            path.display()
        );
        assert_eq!(runs[0].1, runs[1].1, "stable exit code for {}", path.display());
    }

    // The same holds through the library entry point.
    let text = std::fs::read_to_string(dir.join("embed_quadratic.prob")).expect("read");
    let a = cli::execute(&text, &dir, &cli::Overrides::default()).expect("run");
    let b = cli::execute(&text, &dir, &cli::Overrides::default()).expect("run");
    assert_eq!(cli::emit_json(&a), cli::emit_json(&b));
    println!(
        "acceptance criterion 10 (deterministic reports, {} corpus files): pass",
        names.len()
    );
}
