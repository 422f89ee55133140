//! Seeded random elements for property tests and self-checks.

use rand::Rng;

use crate::algebra::Poly;
use crate::backend::Backend;
use crate::elliptic::{CurveElem, EllipticCurve};
use crate::p1::{RatFn, P1};

fn random_poly<R: Rng>(q: u32, max_deg: usize, rng: &mut R) -> Poly {
    let d = rng.gen_range(0..=max_deg);
    let mut c: Vec<u32> = (0..=d).map(|_| rng.gen_range(0..q)).collect();
    c[d] = rng.gen_range(1..q);
    Poly::from_coeffs(c)
}

/// A random nonzero c · num/den with factors of degree ≤ `max_deg`.
pub fn p1_elem<R: Rng>(k: &P1, max_deg: usize, rng: &mut R) -> RatFn {
    let f = k.fq();
    let num = random_poly(f.q(), max_deg, rng);
    let den = random_poly(f.q(), max_deg, rng);
    RatFn::from_frac(&num, &den, f).expect("nonzero")
}

/// A random product of a base rational function and up to two lines a + b·y.
pub fn curve_elem<R: Rng>(e: &EllipticCurve, max_deg: usize, rng: &mut R) -> CurveElem {
    let f = e.fq();
    let line = P1::from_fq(std::sync::Arc::new(f.clone()));
    let mut x = CurveElem::from_base(p1_elem(&line, max_deg, rng));
    for _ in 0..rng.gen_range(0..=2) {
        let a = if rng.gen_bool(0.2) { Poly::zero() } else { random_poly(f.q(), max_deg, rng) };
        let b = random_poly(f.q(), max_deg.saturating_sub(1), rng);
        let at = e.line(&a, &b).expect("b nonzero");
        let exp = if rng.gen_bool(0.5) { 1 } else { -1 };
        x = x.mul(&at.pow(exp, f), f);
    }
    x
}
