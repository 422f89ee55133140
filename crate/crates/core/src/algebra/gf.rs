//! Finite fields F_q of odd characteristic.
//!
//! Elements are encoded as integers `0..q`: the base-`p` digits of an index are the
//! coefficients (constant term first) of a polynomial in the generator `a` of
//! F_q = F_p[a]/(modulus). Multiplication goes through discrete-log tables built from
//! a primitive element, so `q` is limited to small desk-scale sizes.

use std::fmt;

use crate::algebra::poly::Poly;
use crate::error::{Error, Result};

/// Largest field size the tables are built for.
pub const MAX_Q: u32 = 1 << 16;

/// An element of F_q, encoded as described in the module docs.
pub type Gf = u32;

#[derive(Clone)]
pub struct Fq {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    nonsquare: Gf,
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fq(q={}, p={}, k={}, modulus={:?})", self.q, self.p, self.k, self.modulus)
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.modulus == other.modulus
    }
}
impl Eq for Fq {}

fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl Fq {
    /// Builds F_q for an odd prime power `q`.
    pub fn new(q: u32) -> Result<Fq> {
        let (p, k) = prime_power(q)
            .ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
        if p == 2 {
            return Err(Error::InvalidInput("characteristic 2 is not supported".into()));
        }
        if q > MAX_Q {
            return Err(Error::BoundExceeded { q, bound: MAX_Q });
        }
        let prime = Fq::prime(p);
        if k == 1 {
            return Ok(prime);
        }
        let modulus = Poly::irreducibles(&prime, k as usize)
            .next()
            .expect("irreducibles exist in every degree");
        let mod_coeffs = modulus.coeffs().to_vec();
        let to_poly = |x: u32| -> Poly {
            let mut c = Vec::with_capacity(k as usize);
            let mut r = x;
            for _ in 0..k {
                c.push(r % p);
                r /= p;
            }
            Poly::from_coeffs(c)
        };
        let to_index = |f: &Poly| -> u32 {
            f.coeffs().iter().rev().fold(0u32, |acc, &c| acc * p + c)
        };
        let factors = prime_factors(q - 1);
        let generator = (2..q)
            .find(|&g| {
                let gp = to_poly(g);
                factors.iter().all(|&l| {
                    gp.pow_mod(((q - 1) / l) as u128, &modulus, &prime) != Poly::one()
                })
            })
            .expect("multiplicative group of a finite field is cyclic");
        let gp = to_poly(generator);
        let mut exp = Vec::with_capacity((q - 1) as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = Poly::one();
        for i in 0..(q - 1) {
            let idx = to_index(&cur);
            exp.push(idx);
            log[idx as usize] = i;
            cur = cur.mul(&gp, &prime).rem(&modulus, &prime);
        }
        Ok(Fq::from_tables(p, k, q, mod_coeffs, exp, log))
    }

    fn prime(p: u32) -> Fq {
        let factors = prime_factors(p - 1);
        let pow = |b: u64, mut e: u64| {
            let (mut r, mut b) = (1u64, b % p as u64);
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % p as u64;
                }
                b = b * b % p as u64;
                e >>= 1;
            }
            r
        };
        let g = (1..p)
            .find(|&g| factors.iter().all(|&l| pow(g as u64, ((p - 1) / l) as u64) != 1))
            .expect("primitive root exists") as u64;
        let mut exp = Vec::with_capacity((p - 1) as usize);
        let mut log = vec![0u32; p as usize];
        let mut cur = 1u64;
        for i in 0..(p - 1) {
            exp.push(cur as u32);
            log[cur as usize] = i;
            cur = cur * g % p as u64;
        }
        Fq::from_tables(p, 1, p, vec![0, 1], exp, log)
    }

    fn from_tables(p: u32, k: u32, q: u32, modulus: Vec<u32>, exp: Vec<u32>, log: Vec<u32>) -> Fq {
        let mut f = Fq { p, k, q, modulus, exp, log, nonsquare: 0 };
        f.nonsquare = (1..q).find(|&x| f.log[x as usize] % 2 == 1).expect("q odd");
        f
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    /// Coefficients over F_p (constant first) of the polynomial defining F_q.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// The smallest non-square of F_q in the index order.
    pub fn nonsquare(&self) -> Gf {
        self.nonsquare
    }

    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut scale) = (a, b, 0, 1);
        for _ in 0..self.k {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn neg(&self, a: Gf) -> Gf {
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let (mut a, mut out, mut scale) = (a, 0, 1);
        for _ in 0..self.k {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % (self.q as u64 - 1)) as usize]
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: Gf) -> Gf {
        assert!(a != 0, "inverse of zero in F_{}", self.q);
        let l = self.log[a as usize];
        self.exp[((self.q - 1 - l) % (self.q - 1)) as usize]
    }

    pub fn div(&self, a: Gf, b: Gf) -> Gf {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Gf, e: i64) -> Gf {
        if a == 0 {
            assert!(e >= 0, "negative power of zero");
            return if e == 0 { 1 } else { 0 };
        }
        let n = self.q as i64 - 1;
        let l = (self.log[a as usize] as i64 * e.rem_euclid(n)).rem_euclid(n);
        self.exp[l as usize]
    }

    /// Euler criterion in F_q: +1 on non-zero squares, -1 on non-squares, 0 on zero.
    pub fn quad_char(&self, a: Gf) -> i8 {
        if a == 0 {
            0
        } else if self.log[a as usize].is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// A square root, if one exists.
    pub fn sqrt(&self, a: Gf) -> Option<Gf> {
        if a == 0 {
            return Some(0);
        }
        let l = self.log[a as usize];
        l.is_multiple_of(2).then(|| self.exp[(l / 2) as usize])
    }

    /// Inverse Frobenius x -> x^(1/p).
    pub fn pth_root(&self, a: Gf) -> Gf {
        self.pow(a, (self.q / self.p) as i64)
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> Gf {
        n.rem_euclid(self.p as i64) as Gf
    }

    /// The field generator `a` (only meaningful for k > 1).
    pub fn generator(&self) -> Gf {
        if self.k == 1 {
            0
        } else {
            self.p
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> {
        0..self.q
    }

    /// Is `a` in the prime field F_p?
    pub fn is_prime_field(&self, a: Gf) -> bool {
        a < self.p
    }

    /// Renders an element; prime-field elements as integers, others as polynomials in `a`.
    pub fn format(&self, a: Gf) -> String {
        if self.k == 1 || a < self.p {
            return a.to_string();
        }
        let mut terms = Vec::new();
        let mut digits = Vec::new();
        let mut r = a;
        for _ in 0..self.k {
            digits.push(r % self.p);
            r /= self.p;
        }
        for (i, &d) in digits.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "a".to_string(),
                _ => format!("a^{i}"),
            };
            terms.push(match (d, i) {
                (_, 0) => d.to_string(),
                (1, _) => mono,
                _ => format!("{d}*{mono}"),
            });
        }
        terms.join("+")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_char_examples_f5() {
        let f = Fq::new(5).unwrap();
        assert_eq!(f.quad_char(4), 1);
        assert_eq!(f.quad_char(2), -1);
        assert_eq!(f.quad_char(0), 0);
    }

    #[test]
    fn quad_char_matches_square_enumeration() {
        for q in [3, 5, 7, 9, 25, 27] {
            let f = Fq::new(q).unwrap();
            let squares: std::collections::BTreeSet<Gf> =
                f.elements().map(|x| f.mul(x, x)).collect();
            for a in f.elements() {
                let expect = if a == 0 { 0 } else if squares.contains(&a) { 1 } else { -1 };
                assert_eq!(f.quad_char(a), expect, "q={q} a={a}");
            }
        }
    }

    #[test]
    fn quad_char_is_multiplicative() {
        for q in [3, 5, 7, 9] {
            let f = Fq::new(q).unwrap();
            for a in 1..q {
                for b in 1..q {
                    assert_eq!(f.quad_char(f.mul(a, b)), f.quad_char(a) * f.quad_char(b));
                }
            }
        }
    }

    #[test]
    fn field_axioms_sampled() {
        let f = Fq::new(9).unwrap();
        for a in f.elements() {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
            for b in f.elements() {
                for c in [0, 1, 4, 8] {
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
        assert_eq!(f.mul(f.generator(), f.generator()), f.neg(1), "F_9 = F_3[a]/(a^2+1)");
    }

    #[test]
    fn rejects_even_and_composite() {
        assert!(Fq::new(8).is_err());
        assert!(Fq::new(15).is_err());
        assert!(Fq::new(1).is_err());
    }
}
