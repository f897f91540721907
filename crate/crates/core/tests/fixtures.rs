use mpl_bilinear::realize::default_state_cap;
use mpl_bilinear::*;

fn gen(s: &str) -> GeneralizedComposition {
    parse_composition(s).unwrap().generalized().unwrap()
}

fn comp(p: &[u32]) -> Composition {
    Composition::new(p.to_vec()).unwrap()
}

/// Dense matrix from 1-based `(row, col, θ-power)` entries with coefficient 1.
fn mat(dim: usize, entries: &[(usize, usize, u32)]) -> ThetaMatrix {
    let mut m = ThetaMatrix::zeros(dim, dim);
    for &(r, c, p) in entries {
        m.set(r - 1, c - 1, ThetaPoly::theta_pow(p));
    }
    m
}

fn unit(dim: usize, ones: &[usize]) -> Vec<ThetaPoly> {
    let mut v = vec![ThetaPoly::zero(); dim];
    for &i in ones {
        v[i - 1] = ThetaPoly::one();
    }
    v
}

struct Fixture {
    label: &'static str,
    r: Realization,
    n0: ThetaMatrix,
    n1: ThetaMatrix,
    z0: Vec<ThetaPoly>,
    c: Vec<ThetaPoly>,
}

fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            label: "{2}",
            r: build_periodic(&comp(&[2])).unwrap(),
            n0: mat(2, &[(1, 2, 0)]),
            n1: mat(2, &[(2, 1, 2)]),
            z0: unit(2, &[1]),
            c: unit(2, &[1]),
        },
        Fixture {
            label: "{4}",
            r: build_periodic(&comp(&[4])).unwrap(),
            n0: mat(4, &[(1, 2, 0), (2, 3, 0), (3, 4, 0)]),
            n1: mat(4, &[(4, 1, 4)]),
            z0: unit(4, &[1]),
            c: unit(4, &[1]),
        },
        Fixture {
            label: "{3,1}",
            r: build_periodic(&comp(&[3, 1])).unwrap(),
            n0: mat(4, &[(1, 2, 0), (2, 3, 0)]),
            n1: mat(4, &[(3, 4, 0), (4, 1, 4)]),
            z0: unit(4, &[1]),
            c: unit(4, &[1]),
        },
        // the displays give z0 = e1 + e7 for the next three; the constant
        // term of c_s is 0 there, so the first entry is 0 (see the ledger)
        Fixture {
            label: "2,1,{2},3",
            r: build_general(&gen("2,1,{2},3")).unwrap(),
            n0: mat(7, &[(1, 2, 0), (4, 5, 0), (5, 6, 0)]),
            n1: mat(7, &[(2, 3, 0), (3, 4, 0), (5, 4, 2), (6, 7, 0)]),
            z0: unit(7, &[7]),
            c: unit(7, &[1]),
        },
        Fixture {
            label: "{2},2,2,2",
            r: build_general(&gen("{2},2,2,2")).unwrap(),
            n0: mat(7, &[(1, 2, 0), (3, 4, 0), (5, 6, 0)]),
            n1: mat(7, &[(2, 1, 2), (2, 3, 0), (4, 5, 0), (6, 7, 0)]),
            z0: unit(7, &[7]),
            c: unit(7, &[1]),
        },
        Fixture {
            label: "{2},3,3",
            r: build_general(&gen("{2},3,3")).unwrap(),
            n0: mat(7, &[(1, 2, 0), (2, 3, 0), (4, 5, 0), (5, 6, 0)]),
            n1: mat(7, &[(2, 1, 2), (3, 4, 0), (6, 7, 0)]),
            z0: unit(7, &[7]),
            c: unit(7, &[1]),
        },
    ]
}

#[test]
fn displayed_matrices_are_reproduced() {
    for f in fixtures() {
        assert_eq!(f.r.n0(), &f.n0, "{}: N0\n{}", f.label, f.r);
        assert_eq!(f.r.n1(), &f.n1, "{}: N1\n{}", f.label, f.r);
        assert_eq!(f.r.z0(), f.z0.as_slice(), "{}: z0", f.label);
        assert_eq!(f.r.c(), f.c.as_slice(), "{}: C", f.label);
    }
}

#[test]
fn displayed_z0_would_break_the_empty_word() {
    // with z0 = e1 + e7 the representation gives coefficient 1 at the empty word
    let g = gen("2,1,{2},3");
    let r = build_general(&g).unwrap();
    let mut z0 = r.z0().to_vec();
    z0[0] = ThetaPoly::one();
    let rep = LinearRepresentation::new(r.n0().clone(), r.n1().clone(), z0, r.c().to_vec()).unwrap();
    let report = repr_equals_pattern(&g, &rep, 4);
    assert_eq!(report.mismatches.first().map(|m| m.word.clone()), Some(Word::empty()));
}

#[test]
fn builders_agree_through_weight_eight() {
    for w in 2..=8 {
        for s in Composition::admissible_of_weight(w) {
            let a = build_periodic(&s).unwrap();
            let b = build_general(&GeneralizedComposition::periodic(s.clone()).unwrap()).unwrap();
            assert_eq!(a, b, "({s})");
            assert_eq!(a.dim(), w);
        }
    }
}

fn battery() -> Vec<&'static str> {
    vec![
        "{2}", "{4}", "{3,1}", "2,1,{2},3", "{2},2,2,2", "{2},3,3",
        "{2,1}", "3,{2}", "{3},2", "2,{3,1},2", "{2},2", "2,{2},2", "{2,2},3,1", "4,1,{2,1},3",
    ]
}

#[test]
fn coefficient_oracle_battery() {
    for s in battery() {
        let g = gen(s);
        let r = build_general(&g).unwrap();
        let len = if r.dim() >= 7 { 14 } else { 12 };
        let report = repr_equals_pattern(&g, &r.representation(), len);
        assert!(report.is_ok(), "{s}: {report}");
        assert_eq!(report.words_checked, (1 << (len + 1)) - 1);
    }
}

#[test]
fn structural_invariants() {
    for s in battery() {
        let g = gen(s);
        let r = build_general(&g).unwrap();
        assert!(r.startup_defect().iter().all(ThetaPoly::is_zero), "{s}: N0 z0 != 0");
        assert!(r.drives()[0].iter().all(ThetaPoly::is_zero), "{s}: B0 != 0");
        let lower = g.period().weight() + usize::from(g.suffix().is_some());
        assert!(r.dim() >= lower && r.dim() <= default_state_cap(&g), "{s}: dim {}", r.dim());
        assert_eq!(r.is_embedded(), g.suffix().is_some(), "{s}");
    }
}

#[test]
fn embedding_layout() {
    let r = build_general(&gen("2,1,{2},3")).unwrap();
    let last = r.dim() - 1;
    assert!(r.is_embedded());
    assert_eq!(r.states()[last], "1");
    assert!((0..r.dim()).all(|c| r.n0().get(last, c).is_zero() && r.n1().get(last, c).is_zero()));
    assert!(r.c()[last].is_zero());
    assert!(r.z0()[last].is_one());
}

#[test]
fn json_dump_is_exact() {
    let r = build_general(&gen("{2},3,3")).unwrap();
    let j = r.to_json();
    assert_eq!(j["dim"], 7);
    assert_eq!(j["N1"][1][0], serde_json::json!({"2": "1/1"}));
    assert_eq!(j["N0"][0][1], serde_json::json!({"0": "1/1"}));
    assert_eq!(j["states"].as_array().unwrap().len(), 7);
    // no floats anywhere
    assert!(!j.to_string().contains('.'));
}
