//! Dense univariate polynomials over F_q and their factorization.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::gf::{Fq, Gf};
use crate::error::{Error, Result};

const SPLIT_SEED: u64 = 0x5eed_2024;

/// Coefficients constant-term first, with no trailing zeros. The zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Gf>,
}

impl std::fmt::Debug for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Poly{:?}", self.c)
    }
}

/// Degree first, then coefficients from the leading one down. For monic polynomials of a
/// fixed degree this is the lexicographic order on coefficient vectors.
impl Ord for Poly {
    fn cmp(&self, other: &Self) -> Ordering {
        self.c
            .len()
            .cmp(&other.c.len())
            .then_with(|| self.c.iter().rev().cmp(other.c.iter().rev()))
    }
}
impl PartialOrd for Poly {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Poly {
    pub fn from_coeffs(mut c: Vec<Gf>) -> Poly {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly { c }
    }
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }
    pub fn one() -> Poly {
        Poly { c: vec![1] }
    }
    pub fn constant(a: Gf) -> Poly {
        Poly::from_coeffs(vec![a])
    }
    /// The variable `t`.
    pub fn t() -> Poly {
        Poly { c: vec![0, 1] }
    }
    /// `t - x`.
    pub fn linear(x: Gf, f: &Fq) -> Poly {
        Poly::from_coeffs(vec![f.neg(x), 1])
    }

    pub fn coeffs(&self) -> &[Gf] {
        &self.c
    }
    pub fn coeff(&self, i: usize) -> Gf {
        self.c.get(i).copied().unwrap_or(0)
    }
    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.c == [1]
    }
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }
    /// Degree with the zero polynomial mapped to -1.
    pub fn deg(&self) -> i64 {
        self.c.len() as i64 - 1
    }
    pub fn lc(&self) -> Gf {
        self.c.last().copied().unwrap_or(0)
    }
    pub fn is_monic(&self) -> bool {
        self.lc() == 1
    }
    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn add(&self, o: &Poly, f: &Fq) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }
    pub fn sub(&self, o: &Poly, f: &Fq) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::from_coeffs((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }
    pub fn neg(&self, f: &Fq) -> Poly {
        Poly { c: self.c.iter().map(|&a| f.neg(a)).collect() }
    }
    pub fn scale(&self, a: Gf, f: &Fq) -> Poly {
        Poly::from_coeffs(self.c.iter().map(|&x| f.mul(x, a)).collect())
    }
    pub fn mul(&self, o: &Poly, f: &Fq) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }
    pub fn square(&self, f: &Fq) -> Poly {
        self.mul(self, f)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly, f: &Fq) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        if self.c.len() < d.c.len() {
            return (Poly::zero(), self.clone());
        }
        let inv_lc = f.inv(d.lc());
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        let mut quo = vec![0; self.c.len() - dd];
        for i in (0..quo.len()).rev() {
            let coef = f.mul(r[i + dd], inv_lc);
            quo[i] = coef;
            if coef == 0 {
                continue;
            }
            for (j, &b) in d.c.iter().enumerate() {
                r[i + j] = f.sub(r[i + j], f.mul(coef, b));
            }
        }
        r.truncate(dd);
        (Poly::from_coeffs(quo), Poly::from_coeffs(r))
    }
    pub fn rem(&self, d: &Poly, f: &Fq) -> Poly {
        self.divrem(d, f).1
    }
    /// Exact quotient; the caller guarantees divisibility.
    pub fn div_exact(&self, d: &Poly, f: &Fq) -> Poly {
        let (q, r) = self.divrem(d, f);
        debug_assert!(r.is_zero(), "inexact division");
        q
    }
    pub fn divides(&self, o: &Poly, f: &Fq) -> bool {
        o.rem(self, f).is_zero()
    }

    pub fn monic(&self, f: &Fq) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f.inv(self.lc()), f)
    }

    /// Monic gcd (zero only if both inputs are zero).
    pub fn gcd(&self, o: &Poly, f: &Fq) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// Returns (g, s, u) with s*self + u*o = g, g monic.
    pub fn ext_gcd(&self, o: &Poly, f: &Fq) -> (Poly, Poly, Poly) {
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::one(), Poly::zero());
        let (mut u0, mut u1) = (Poly::zero(), Poly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1, f);
            let s2 = s0.sub(&q.mul(&s1, f), f);
            let u2 = u0.sub(&q.mul(&u1, f), f);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            u0 = u1;
            u1 = u2;
        }
        if r0.is_zero() {
            return (r0, s0, u0);
        }
        let k = f.inv(r0.lc());
        (r0.scale(k, f), s0.scale(k, f), u0.scale(k, f))
    }

    /// Inverse modulo `m`, if coprime.
    pub fn inv_mod(&self, m: &Poly, f: &Fq) -> Option<Poly> {
        let (g, s, _) = self.rem(m, f).ext_gcd(m, f);
        g.is_one().then(|| s.rem(m, f))
    }

    pub fn pow_mod(&self, mut e: u128, m: &Poly, f: &Fq) -> Poly {
        let mut base = self.rem(m, f);
        let mut acc = Poly::one().rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f).rem(m, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.square(f).rem(m, f);
            }
        }
        acc
    }

    pub fn pow(&self, e: u32, f: &Fq) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self, f);
        }
        acc
    }

    pub fn derivative(&self, f: &Fq) -> Poly {
        Poly::from_coeffs(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &a)| f.mul(a, f.from_int(i as i64)))
                .collect(),
        )
    }

    pub fn eval(&self, x: Gf, f: &Fq) -> Gf {
        self.c.iter().rev().fold(0, |acc, &a| f.add(f.mul(acc, x), a))
    }

    /// Splits off the largest power of `m`: returns (v, self / m^v). `self` must be nonzero.
    pub fn valuation(&self, m: &Poly, f: &Fq) -> (u32, Poly) {
        assert!(!self.is_zero());
        let mut v = 0;
        let mut cur = self.clone();
        loop {
            let (q, r) = cur.divrem(m, f);
            if !r.is_zero() {
                return (v, cur);
            }
            cur = q;
            v += 1;
        }
    }

    /// Square-free decomposition of a monic polynomial: pairs (g_i, i) with self = prod g_i^i.
    pub fn squarefree_decomposition(&self, f: &Fq) -> Vec<(Poly, u32)> {
        let mut out = Vec::new();
        if self.deg() <= 0 {
            return out;
        }
        let d = self.derivative(f);
        let mut c = self.gcd(&d, f);
        let mut w = self.div_exact(&c, f);
        let mut i = 1;
        while !w.is_one() {
            let y = w.gcd(&c, f);
            let fac = w.div_exact(&y, f);
            if !fac.is_one() {
                out.push((fac, i));
            }
            w = y;
            c = c.div_exact(&w, f);
            i += 1;
        }
        if !c.is_one() {
            // c is a polynomial in t^p
            let p = f.p() as usize;
            let root = Poly::from_coeffs(
                c.c.iter().step_by(p).map(|&a| f.pth_root(a)).collect(),
            );
            for (g, m) in root.squarefree_decomposition(f) {
                out.push((g, m * f.p()));
            }
        }
        out
    }

    /// Distinct-degree factorization of a monic square-free polynomial.
    pub fn distinct_degree(&self, f: &Fq) -> Vec<(Poly, usize)> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        let mut h = Poly::t().rem(&rest, f);
        let mut i = 1;
        while rest.deg() >= 2 * i as i64 {
            h = h.pow_mod(f.q() as u128, &rest, f);
            let g = h.sub(&Poly::t(), f).gcd(&rest, f);
            if !g.is_one() {
                rest = rest.div_exact(&g, f);
                h = h.rem(&rest, f);
                out.push((g, i));
            }
            i += 1;
        }
        if rest.deg() > 0 {
            let d = rest.deg() as usize;
            out.push((rest, d));
        }
        out
    }

    /// Equal-degree splitting (Cantor-Zassenhaus, odd q) of a product of degree-`d` irreducibles.
    pub fn equal_degree(&self, d: usize, f: &Fq, rng: &mut ChaCha8Rng) -> Vec<Poly> {
        let n = self.deg() as usize;
        if n == d {
            return vec![self.clone()];
        }
        let e = ((f.q() as u128).pow(d as u32) - 1) / 2;
        loop {
            let a = Poly::from_coeffs((0..n).map(|_| rng.gen_range(0..f.q())).collect());
            if a.deg() < 1 {
                continue;
            }
            let b = a.pow_mod(e, self, f).sub(&Poly::one(), f);
            let g = b.gcd(self, f);
            if g.deg() > 0 && (g.deg() as usize) < n {
                let other = self.div_exact(&g, f);
                let mut out = g.equal_degree(d, f, rng);
                out.extend(other.equal_degree(d, f, rng));
                return out;
            }
        }
    }

    /// Factors a nonzero polynomial: (leading coefficient, sorted monic irreducible factors
    /// with multiplicities).
    pub fn factor(&self, f: &Fq) -> Result<(Gf, Vec<(Poly, u32)>)> {
        if self.is_zero() {
            return Err(Error::InvalidInput("cannot factor the zero polynomial".into()));
        }
        let lc = self.lc();
        let monic = self.monic(f);
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
        let mut out: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in monic.squarefree_decomposition(f) {
            for (h, d) in g.distinct_degree(f) {
                for irr in h.equal_degree(d, f, &mut rng) {
                    out.push((irr, m));
                }
            }
        }
        out.sort();
        // merge equal factors (possible after p-th root recursion)
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (g, m) in out {
            match merged.last_mut() {
                Some((h, k)) if *h == g => *k += m,
                _ => merged.push((g, m)),
            }
        }
        Ok((lc, merged))
    }

    /// Ben-Or irreducibility test.
    pub fn is_irreducible(&self, f: &Fq) -> bool {
        let n = match self.degree() {
            None | Some(0) => return false,
            Some(n) => n,
        };
        let m = self.monic(f);
        let mut h = Poly::t().rem(&m, f);
        for _ in 1..=n / 2 {
            h = h.pow_mod(f.q() as u128, &m, f);
            if !h.sub(&Poly::t(), f).gcd(&m, f).is_one() {
                return false;
            }
        }
        true
    }

    /// All monic polynomials of degree `d`, in increasing order.
    pub fn monics(f: &Fq, d: usize) -> impl Iterator<Item = Poly> + '_ {
        let q = f.q() as u128;
        let total = q.pow(d as u32);
        (0..total).map(move |mut idx| {
            let mut c = Vec::with_capacity(d + 1);
            for _ in 0..d {
                c.push((idx % q) as Gf);
                idx /= q;
            }
            c.push(1);
            Poly { c }
        })
    }

    /// Every monic irreducible of degree `d` exactly once, in increasing order.
    pub fn irreducibles(f: &Fq, d: usize) -> impl Iterator<Item = Poly> + '_ {
        Poly::monics(f, d).filter(move |g| g.is_irreducible(f))
    }

    /// Human-readable rendering in the variable `var`, e.g. `t^2+2` or `t+4`.
    pub fn format(&self, f: &Fq, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for i in (0..self.c.len()).rev() {
            let a = self.c[i];
            if a == 0 {
                continue;
            }
            let coef = f.format(a);
            let coef = if coef.contains('+') { format!("({coef})") } else { coef };
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let term = match (i, a) {
                (0, _) => coef,
                (_, 1) => mono,
                _ => format!("{coef}*{mono}"),
            };
            if !out.is_empty() {
                out.push('+');
            }
            out.push_str(&term);
        }
        out
    }
}

/// Gauss necklace count of monic irreducibles of degree `d` over F_q.
pub fn necklace_count(q: u64, d: u32) -> u64 {
    fn mobius(mut n: u32) -> i64 {
        let mut res = 1;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                res = -res;
            }
            p += 1;
        }
        if n > 1 {
            res = -res;
        }
        res
    }
    let total: i64 = (1..=d)
        .filter(|e| d.is_multiple_of(*e))
        .map(|e| mobius(e) * (q as i64).pow(d / e))
        .sum();
    (total / d as i64) as u64
}
