use coupling_cli::formats::*;
use coupling_core::coupling::{solve, verify, VerifyOptions};
use coupling_core::scalar::{Float, Rational, Scalar};
use coupling_core::string::{string_spectrum, DiscreteString};
use coupling_core::{Coupling, CouplingData, Polynomial, SolutionPair};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| Rational::from_i64(n) / Rational::from_i64(d))
}

fn nonzero() -> impl Strategy<Value = Rational> {
    rational().prop_filter("nonzero", |r| !r.is_zero())
}

fn coupling() -> impl Strategy<Value = Coupling<Rational>> {
    prop_oneof![1 => Just(Coupling::Infinite), 6 => rational().prop_map(Coupling::Finite)]
}

fn problem() -> impl Strategy<Value = CouplingData<Rational>> {
    proptest::collection::btree_map(
        (-60i64..=60).prop_filter("nonzero", |k| *k != 0),
        coupling(),
        0..8,
    )
    .prop_map(|points| {
        CouplingData::new(
            points
                .into_iter()
                .map(|(k, e)| (Rational::from_i64(k) / Rational::from_i64(4), e))
                .collect(),
        )
        .unwrap()
    })
}

fn to_float(d: &CouplingData<Rational>) -> CouplingData<Float> {
    CouplingData::new(
        d.points()
            .map(|(l, e)| {
                let e = match e {
                    Coupling::Finite(v) => {
                        Coupling::Finite(Float::from_rational(v) / Float::from_i64(3))
                    }
                    Coupling::Infinite => Coupling::Infinite,
                };
                (Float::from_rational(l) / Float::from_i64(7), e)
            })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problems_round_trip(d in problem()) {
        let text = emit_problem(&d);
        prop_assert_eq!(parse_problem(text.as_bytes(), None).unwrap(), Problem::Rational(d.clone()));
        let f = to_float(&d);
        let text = emit_problem(&f);
        prop_assert_eq!(parse_problem(text.as_bytes(), None).unwrap(), Problem::Float(f));
    }

    #[test]
    fn solutions_round_trip(
        a in proptest::collection::vec(rational(), 0..6),
        b in proptest::collection::vec(rational(), 0..6),
    ) {
        let pair = SolutionPair::new(Polynomial::new(a), Polynomial::new(b));
        prop_assert_eq!(parse_solution::<Rational>(emit_solution(&pair).as_bytes()).unwrap(), pair);
    }

    #[test]
    fn strings_round_trip(pos in proptest::collection::btree_set(1i64..100, 1..6), m in nonzero()) {
        let positions: Vec<Rational> = pos.iter().map(|k| Rational::from_i64(*k) / Rational::from_i64(100)).collect();
        let masses = vec![m.abs(); positions.len()];
        let s = DiscreteString::new(positions, masses).unwrap();
        prop_assert_eq!(parse_string::<Rational>(emit_string(&s).as_bytes()).unwrap(), s);
    }
}

#[test]
fn solved_problems_round_trip_with_trace_and_report() {
    let d = CouplingData::new(vec![
        (
            Rational::from_i64(-3),
            Coupling::Finite(Rational::from_i64(2)),
        ),
        (
            Rational::from_i64(1),
            Coupling::Finite(Rational::from_i64(5)),
        ),
        (Rational::from_i64(4), Coupling::Infinite),
        (
            Rational::from_i64(7),
            Coupling::Finite(Rational::one() / Rational::from_i64(3)),
        ),
        (Rational::from_i64(9), Coupling::Finite(Rational::zero())),
    ])
    .unwrap();
    let s = solve(&d).unwrap();
    let text = emit_solution(&s);
    assert_eq!(parse_solution::<Rational>(text.as_bytes()).unwrap(), s);
    let trace = s.trace.clone().unwrap();
    assert_eq!(
        parse_trace_file::<Rational>(emit_trace(&trace).as_bytes()).unwrap(),
        trace
    );

    let report = verify(&d, &s, &VerifyOptions::default());
    assert_eq!(
        parse_report(emit_report(&report).as_bytes()).unwrap(),
        report
    );

    let mut bad = s.clone();
    bad.phi_plus = &bad.phi_plus + &Polynomial::constant(Rational::one());
    let report = verify(&d, &bad, &VerifyOptions::default());
    assert!(!report.passed());
    assert_eq!(
        parse_report(emit_report(&report).as_bytes()).unwrap(),
        report
    );

    let f = to_float(&d);
    let sf = solve(&f).unwrap();
    assert_eq!(
        parse_solution::<Float>(emit_solution(&sf).as_bytes()).unwrap(),
        sf
    );
}

#[test]
fn spectral_data_round_trips() {
    let s = DiscreteString::new(
        vec![
            Rational::one() / Rational::from_i64(5),
            Rational::one() / Rational::from_i64(2),
        ],
        vec![
            Rational::from_i64(2),
            Rational::one() / Rational::from_i64(3),
        ],
    )
    .unwrap();
    let d = string_spectrum(&s, 256).unwrap();
    let text = emit_spectral(&d);
    let back = parse_spectral::<Float>(text.as_bytes()).unwrap();
    assert_eq!(back.eigenvalues, d.eigenvalues);
    assert_eq!(back.norming_sq, d.norming_sq);
}
