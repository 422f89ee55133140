//! The rational function field F_q(t): places of the projective line, factored rational
//! functions, valuations, residues and the degree map Pic P¹ ≅ ℤ.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::expr::{self, Eval};
use crate::algebra::{Fq, Gf, Poly, Res, ResidueField};
use crate::backend::{Backend, Divisor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum P1Place {
    Finite(Poly),
    Infinity,
}

impl P1Place {
    pub fn degree(&self) -> u32 {
        match self {
            P1Place::Finite(m) => m.deg() as u32,
            P1Place::Infinity => 1,
        }
    }
    fn key(&self) -> (u32, bool, Option<&Poly>) {
        match self {
            P1Place::Finite(m) => (self.degree(), false, Some(m)),
            P1Place::Infinity => (1, true, None),
        }
    }
}

/// Degree first; among degree-1 places the finite ones precede infinity.
impl Ord for P1Place {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key().cmp(&o.key())
    }
}
impl PartialOrd for P1Place {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// A nonzero element `c · Π f^e` of F_q(t) with monic irreducible `f` and nonzero `e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    pub constant: Gf,
    pub factors: BTreeMap<Poly, i64>,
}

impl RatFn {
    pub fn constant(c: Gf) -> RatFn {
        assert!(c != 0, "zero is not a unit");
        RatFn { constant: c, factors: BTreeMap::new() }
    }

    /// Factors `num / den` once.
    pub fn from_frac(num: &Poly, den: &Poly, f: &Fq) -> Result<RatFn> {
        if num.is_zero() || den.is_zero() {
            return Err(Error::InvalidInput("zero has no square class".into()));
        }
        let (a, fa) = num.factor(f)?;
        let (b, fb) = den.factor(f)?;
        let mut r = RatFn::constant(f.div(a, b));
        for (g, e) in fa {
            r.add_factor(g, e as i64);
        }
        for (g, e) in fb {
            r.add_factor(g, -(e as i64));
        }
        Ok(r)
    }

    pub fn from_poly(p: &Poly, f: &Fq) -> Result<RatFn> {
        RatFn::from_frac(p, &Poly::one(), f)
    }

    fn add_factor(&mut self, g: Poly, e: i64) {
        if e == 0 {
            return;
        }
        let x = self.factors.entry(g.clone()).or_insert(0);
        *x += e;
        if *x == 0 {
            self.factors.remove(&g);
        }
    }

    pub fn mul(&self, o: &RatFn, f: &Fq) -> RatFn {
        let mut r = self.clone();
        r.constant = f.mul(r.constant, o.constant);
        for (g, e) in &o.factors {
            r.add_factor(g.clone(), *e);
        }
        r
    }

    pub fn pow(&self, k: i64, f: &Fq) -> RatFn {
        if k == 0 {
            return RatFn::constant(1);
        }
        RatFn {
            constant: f.pow(self.constant, k),
            factors: self.factors.iter().map(|(g, e)| (g.clone(), e * k)).collect(),
        }
    }

    pub fn inv(&self, f: &Fq) -> RatFn {
        self.pow(-1, f)
    }

    /// Numerator and denominator polynomials.
    pub fn to_frac(&self, f: &Fq) -> (Poly, Poly) {
        let mut num = Poly::constant(self.constant);
        let mut den = Poly::one();
        for (g, &e) in &self.factors {
            if e > 0 {
                num = num.mul(&g.pow(e as u32, f), f);
            } else {
                den = den.mul(&g.pow((-e) as u32, f), f);
            }
        }
        (num, den)
    }

    /// deg(numerator) − deg(denominator).
    pub fn degree(&self) -> i64 {
        self.factors.iter().map(|(g, e)| e * g.deg()).sum()
    }

    pub fn ord_at(&self, m: &Poly) -> i64 {
        self.factors.get(m).copied().unwrap_or(0)
    }

    /// Residue of λ / m^{ord_m λ} in F_q[t]/(m).
    pub fn unit_residue_at(&self, m: &Poly, f: &Fq) -> Res {
        let mut acc = Poly::constant(self.constant);
        for (g, &e) in &self.factors {
            if g == m {
                continue;
            }
            let gm = g.rem(m, f);
            let ge = if e >= 0 {
                gm.pow_mod(e as u128, m, f)
            } else {
                gm.inv_mod(m, f).expect("coprime factor").pow_mod((-e) as u128, m, f)
            };
            acc = acc.mul(&ge, f).rem(m, f);
        }
        Res::simple(acc.rem(m, f))
    }

    pub fn format(&self, f: &Fq) -> String {
        let c = f.format(self.constant);
        let mut parts =
            vec![if c.contains('+') { format!("({c})") } else { c }];
        for (g, e) in &self.factors {
            parts.push(format!("({})^{}", g.format(f, "t"), e));
        }
        parts.join(" * ")
    }
}

/// Parsed-expression evaluator over F_q(t); `None` stands for zero.
pub(crate) struct P1Eval<'a> {
    pub f: &'a Fq,
}

impl Eval for P1Eval<'_> {
    type Val = Option<RatFn>;

    fn int(&self, n: i64) -> Result<Self::Val> {
        let c = self.f.from_int(n);
        Ok((c != 0).then(|| RatFn::constant(c)))
    }
    fn var(&self, v: char) -> Result<Self::Val> {
        match v {
            't' => Ok(Some(RatFn { constant: 1, factors: BTreeMap::from([(Poly::t(), 1)]) })),
            'a' if self.f.k() > 1 => Ok(Some(RatFn::constant(self.f.generator()))),
            'a' => Err(Error::Parse("`a` names the generator of a non-prime field".into())),
            _ => Err(Error::Parse(format!("variable {v} is not available on P1"))),
        }
    }
    fn add(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val> {
        let (a, b) = match (a, b) {
            (None, x) | (x, None) => return Ok(x),
            (Some(a), Some(b)) => (a, b),
        };
        let f = self.f;
        let (na, da) = a.to_frac(f);
        let (nb, db) = b.to_frac(f);
        let num = na.mul(&db, f).add(&nb.mul(&da, f), f);
        if num.is_zero() {
            return Ok(None);
        }
        Ok(Some(RatFn::from_frac(&num, &da.mul(&db, f), f)?))
    }
    fn neg(&self, a: Self::Val) -> Result<Self::Val> {
        Ok(a.map(|mut r| {
            r.constant = self.f.neg(r.constant);
            r
        }))
    }
    fn mul(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val> {
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some(a.mul(&b, self.f)),
            _ => None,
        })
    }
    fn inv(&self, a: Self::Val) -> Result<Self::Val> {
        match a {
            Some(r) => Ok(Some(r.inv(self.f))),
            None => Err(Error::Parse("division by zero".into())),
        }
    }
}

/// Parses a polynomial in `t` (integers read mod p).
pub fn parse_poly(s: &str, f: &Fq) -> Result<Poly> {
    let e = expr::parse(s)?;
    match expr::eval(&e, &P1Eval { f })? {
        None => Ok(Poly::zero()),
        Some(r) => {
            let (num, den) = r.to_frac(f);
            if !den.is_one() {
                return Err(Error::Parse(format!("{s:?} is not a polynomial")));
            }
            Ok(num)
        }
    }
}

/// The projective line over F_q.
#[derive(Clone, Debug)]
pub struct P1 {
    fq: Arc<Fq>,
}

impl P1 {
    pub fn new(q: u32) -> Result<P1> {
        Ok(P1 { fq: Arc::new(Fq::new(q)?) })
    }

    pub fn from_fq(fq: Arc<Fq>) -> P1 {
        P1 { fq }
    }

    pub fn poly_elem(&self, p: &Poly) -> Result<RatFn> {
        RatFn::from_poly(p, &self.fq)
    }

    /// The place of a monic irreducible polynomial given as text.
    pub fn finite(&self, s: &str) -> Result<P1Place> {
        self.parse_place(s)
    }

    /// Pic(X∖S) ≅ ℤ / gcd(deg p : p ∈ S).
    pub fn pic_open_order(&self, s: &[P1Place]) -> u64 {
        s.iter().fold(0u64, |g, p| gcd(g, p.degree() as u64))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Backend for P1 {
    type Place = P1Place;
    type Elem = RatFn;

    fn fq(&self) -> &Fq {
        &self.fq
    }
    fn name(&self) -> &'static str {
        "p1"
    }
    fn place_degree(&self, p: &P1Place) -> u32 {
        p.degree()
    }
    fn places_of_degree(&self, d: u32) -> Vec<P1Place> {
        let mut v: Vec<P1Place> =
            Poly::irreducibles(&self.fq, d as usize).map(P1Place::Finite).collect();
        if d == 1 {
            v.push(P1Place::Infinity);
        }
        v
    }
    fn pic0_two_rank(&self) -> usize {
        0
    }
    fn class_vector(&self, p: &P1Place) -> Vec<bool> {
        vec![p.degree() % 2 == 1]
    }
    fn two_divisibility_witness(&self, places: &[P1Place]) -> Result<RatFn> {
        let total: u32 = places.iter().map(|p| p.degree()).sum();
        if total % 2 == 1 {
            return Err(Error::NotTwoDivisible);
        }
        let mut r = RatFn::constant(1);
        for p in places {
            if let P1Place::Finite(m) = p {
                r.add_factor(m.clone(), 1);
            }
        }
        Ok(r)
    }
    fn sing_x_basis(&self) -> Vec<RatFn> {
        vec![RatFn::constant(self.fq.nonsquare())]
    }
    fn constant(&self, c: Gf) -> RatFn {
        RatFn::constant(c)
    }
    fn mul(&self, a: &RatFn, b: &RatFn) -> RatFn {
        a.mul(b, &self.fq)
    }
    fn reduce(&self, a: &RatFn) -> RatFn {
        let c = if self.fq.quad_char(a.constant) == 1 { 1 } else { self.fq.nonsquare() };
        RatFn {
            constant: c,
            factors: a
                .factors
                .iter()
                .filter(|(_, e)| *e % 2 != 0)
                .map(|(g, _)| (g.clone(), 1))
                .collect(),
        }
    }
    fn ord(&self, a: &RatFn, p: &P1Place) -> Result<i64> {
        Ok(match p {
            P1Place::Finite(m) => a.ord_at(m),
            P1Place::Infinity => -a.degree(),
        })
    }
    fn residue_field(&self, p: &P1Place) -> ResidueField {
        match p {
            P1Place::Finite(m) => ResidueField::simple(m.clone()),
            P1Place::Infinity => ResidueField::constants(),
        }
    }
    fn local_data(&self, a: &RatFn, p: &P1Place) -> Result<(i64, Res)> {
        Ok(match p {
            P1Place::Finite(m) => (a.ord_at(m), a.unit_residue_at(m, &self.fq)),
            // with π = 1/t the unit part c·Π g^e·t^{-deg} has residue c
            P1Place::Infinity => (-a.degree(), Res::simple(Poly::constant(a.constant))),
        })
    }
    fn divisor_of(&self, a: &RatFn) -> Result<Divisor<P1Place>> {
        let mut d = Divisor::from_pairs(
            a.factors.iter().map(|(g, e)| (P1Place::Finite(g.clone()), *e)),
        );
        d.add_term(P1Place::Infinity, -a.degree());
        Ok(d)
    }
    fn uniformizer(&self, p: &P1Place) -> RatFn {
        match p {
            P1Place::Finite(m) => RatFn { constant: 1, factors: BTreeMap::from([(m.clone(), 1)]) },
            P1Place::Infinity => RatFn { constant: 1, factors: BTreeMap::from([(Poly::t(), -1)]) },
        }
    }
    fn primary_unit(&self, p: &P1Place) -> RatFn {
        let rf = self.residue_field(p);
        let u = rf.first_nonsquare(&self.fq);
        match p {
            P1Place::Infinity => RatFn::constant(u.a.coeff(0)),
            P1Place::Finite(_) => RatFn::from_poly(&u.a, &self.fq).expect("nonzero"),
        }
    }
    fn pic_open_two_rank_direct(&self, s: &[P1Place]) -> Result<usize> {
        if s.is_empty() {
            return Err(Error::InvalidInput("S must be nonempty".into()));
        }
        Ok(usize::from(self.pic_open_order(s).is_multiple_of(2)))
    }
    fn parse_place(&self, s: &str) -> Result<P1Place> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(P1Place::Infinity);
        }
        let p = parse_poly(t, &self.fq)?;
        if !p.is_irreducible(&self.fq) {
            return Err(Error::Parse(format!("{t:?} is not an irreducible polynomial")));
        }
        Ok(P1Place::Finite(p.monic(&self.fq)))
    }
    fn format_place(&self, p: &P1Place) -> String {
        match p {
            P1Place::Finite(m) => m.format(&self.fq, "t"),
            P1Place::Infinity => "inf".into(),
        }
    }
    fn parse_elem(&self, s: &str) -> Result<RatFn> {
        let e = expr::parse(s)?;
        expr::eval(&e, &P1Eval { f: &self.fq })?
            .ok_or_else(|| Error::Parse(format!("{s:?} evaluates to zero")))
    }
    fn format_elem(&self, a: &RatFn) -> String {
        a.format(&self.fq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> P1 {
        P1::new(5).unwrap()
    }

    #[test]
    fn ord_examples() {
        let k = f5();
        let lam = k.parse_elem("t^2/(t-1)").unwrap();
        let t = k.parse_place("t").unwrap();
        assert_eq!(k.ord(&lam, &t).unwrap(), 2);
        assert_eq!(k.ord(&lam, &P1Place::Infinity).unwrap(), -1);
        let three = k.constant(3);
        for p in k.places_up_to(2) {
            assert_eq!(k.ord(&three, &p).unwrap(), 0);
        }
    }

    #[test]
    fn divisor_examples() {
        let k = f5();
        let d = k.divisor_of(&k.parse_elem("t*(t-1)").unwrap()).unwrap();
        assert_eq!(d.coeff(&k.parse_place("t").unwrap()), 1);
        assert_eq!(d.coeff(&k.parse_place("t-1").unwrap()), 1);
        assert_eq!(d.coeff(&P1Place::Infinity), -2);
        assert_eq!(d.degree(&k), 0);
        assert!(k.divisor_of(&k.constant(2)).unwrap().is_zero());
        let d = k.divisor_of(&k.parse_elem("(t^2+2)/t^2").unwrap()).unwrap();
        assert_eq!(d.coeff(&k.parse_place("t^2+2").unwrap()), 1);
        assert_eq!(d.coeff(&k.parse_place("t").unwrap()), -2);
        assert_eq!(d.coeff(&P1Place::Infinity), 0);
        assert_eq!(d.degree(&k), 0);
    }

    #[test]
    fn residue_examples() {
        let k = f5();
        let r = k.residue(&k.parse_elem("t+1").unwrap(), &k.parse_place("t-1").unwrap()).unwrap();
        assert_eq!(r.a, Poly::constant(2));
        let r = k
            .residue(&k.parse_elem("t^2+2").unwrap(), &k.parse_place("t^2+3").unwrap())
            .unwrap();
        assert_eq!(r.a, Poly::constant(4));
        let r = k.residue(&k.parse_elem("(2t+1)/t").unwrap(), &P1Place::Infinity).unwrap();
        assert_eq!(r.a, Poly::constant(2));
        assert!(k.residue(&k.parse_elem("t").unwrap(), &k.parse_place("t").unwrap()).is_err());
    }

    #[test]
    fn two_divisibility_examples() {
        let k = f5();
        let even = k.parse_place("t^2+2").unwrap();
        assert!(k.two_divisibility_witness(std::slice::from_ref(&even)).is_ok());
        assert!(k.two_divisibility_witness(&[k.parse_place("t").unwrap()]).is_err());
        assert!(k.two_divisibility_witness(&[]).is_ok());
        let w = k.two_divisibility_witness(&[k.parse_place("t").unwrap(), P1Place::Infinity]).unwrap();
        let d = k.divisor_of(&w).unwrap();
        assert_eq!(d.odd_support(), vec![k.parse_place("t").unwrap(), P1Place::Infinity]);
    }

    #[test]
    fn place_order_and_formatting() {
        let k = f5();
        let d1 = k.places_of_degree(1);
        let names: Vec<String> = d1.iter().map(|p| k.format_place(p)).collect();
        assert_eq!(names, ["t", "t+1", "t+2", "t+3", "t+4", "inf"]);
        assert_eq!(k.places_of_degree(2).len(), 10);
        let lam = k.parse_elem("2 * (t)^1 * (t+4)^-1").unwrap();
        assert_eq!(k.parse_elem(&k.format_elem(&lam)).unwrap(), lam);
        assert!(k.parse_place("t^2-1").is_err());
        assert!(k.parse_elem("t-t").is_err());
    }

    #[test]
    fn f9_generator_round_trip() {
        let k = P1::new(9).unwrap();
        let lam = k.parse_elem("(a+1)*(t+a)^2/(t^2+a)").unwrap();
        assert_eq!(k.parse_elem(&k.format_elem(&lam)).unwrap(), lam);
    }
}
