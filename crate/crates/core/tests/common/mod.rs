#![allow(dead_code)]

use coupling_core::coupling::build_w;
use coupling_core::peakon::Multipeakon;
use coupling_core::scalar::{Float, Rational, Scalar};
use coupling_core::string::DiscreteString;
use coupling_core::{Coupling, CouplingData, Polynomial};
use rand::Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_i64(n) / Rational::from_i64(d)
}

fn random_positive<R: Rng>(rng: &mut R, num: i64, den: i64) -> Rational {
    q(rng.random_range(1..=num), rng.random_range(1..=den))
}

/// Admissible exact data with `1..=max_len` points, at least one of which
/// has a finite nonzero coupling constant.
pub fn random_admissible<R: Rng>(rng: &mut R, max_len: usize) -> CouplingData<Rational> {
    let n = rng.random_range(1..=max_len);
    let mut moduli: Vec<Rational> = Vec::with_capacity(n);
    while moduli.len() < n {
        let m = random_positive(rng, 60, 6);
        if !moduli.contains(&m) {
            moduli.push(m);
        }
    }
    let sigma: Vec<Rational> = moduli
        .into_iter()
        .map(|m| if rng.random_bool(0.5) { -m } else { m })
        .collect();
    let dw = build_w(&sigma).derivative();
    let regular = rng.random_range(0..n);
    let points = sigma
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let roll = rng.random_range(0..10);
            let eta = if i != regular && roll == 0 {
                Coupling::Finite(Rational::zero())
            } else if i != regular && roll == 1 {
                Coupling::Infinite
            } else {
                // sign opposite to l W'(l)
                let mag = random_positive(rng, 20, 5);
                if (l.clone() * dw.eval(l)).is_positive() {
                    Coupling::Finite(-mag)
                } else {
                    Coupling::Finite(mag)
                }
            };
            (l.clone(), eta)
        })
        .collect();
    CouplingData::new(points).unwrap()
}

/// String with `1..=max_len` masses at distinct rational positions in (0, 1).
pub fn random_string<R: Rng>(rng: &mut R, max_len: usize) -> DiscreteString<Rational> {
    let n = rng.random_range(1..=max_len);
    let mut xs: Vec<Rational> = Vec::with_capacity(n);
    while xs.len() < n {
        let d = rng.random_range(2..=30);
        let x = q(rng.random_range(1..d), d);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs.sort();
    let ms = (0..n).map(|_| random_positive(rng, 30, 10)).collect();
    DiscreteString::new(xs, ms).unwrap()
}

/// A rational point of (0, 1) that is not a mass position.
pub fn random_gap_point<R: Rng>(rng: &mut R, s: &DiscreteString<Rational>) -> Rational {
    loop {
        let x = q(rng.random_range(1..97), 97);
        if !s.positions().contains(&x) {
            return x;
        }
    }
}

/// Multipeakon with `n` peakons at distinct quarter-integer positions in
/// `[-3, 3]` and momenta in `[1/4, 2]`.
pub fn random_multipeakon<R: Rng>(rng: &mut R, n: usize) -> Multipeakon<Float> {
    let mut qs: Vec<i64> = Vec::with_capacity(n);
    while qs.len() < n {
        let k = rng.random_range(-12..=12);
        if !qs.contains(&k) {
            qs.push(k);
        }
    }
    qs.sort();
    let pos = qs.iter().map(|k| Float::from_rational(&q(*k, 4))).collect();
    let mom = (0..n)
        .map(|_| Float::from_rational(&q(rng.random_range(1..=8), 4)))
        .collect();
    Multipeakon::new(pos, mom).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

pub fn to_f64s<T: Scalar>(p: &Polynomial<T>) -> Vec<f64> {
    p.coeffs().iter().map(Scalar::to_f64).collect()
}
