//! The interface shared by the P¹ and elliptic backends.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::algebra::{Fq, Gf, Res, ResidueField};
use crate::error::Result;

/// A finite formal integer combination of places.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Divisor<P: Ord> {
    coeffs: BTreeMap<P, i64>,
}

impl<P: Ord + Clone> Divisor<P> {
    pub fn zero() -> Self {
        Divisor { coeffs: BTreeMap::new() }
    }

    pub fn from_pairs<I: IntoIterator<Item = (P, i64)>>(it: I) -> Self {
        let mut d = Divisor::zero();
        for (p, n) in it {
            d.add_term(p, n);
        }
        d
    }

    pub fn add_term(&mut self, p: P, n: i64) {
        if n == 0 {
            return;
        }
        let e = self.coeffs.entry(p.clone()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.coeffs.remove(&p);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut d = self.clone();
        for (p, n) in &o.coeffs {
            d.add_term(p.clone(), *n);
        }
        d
    }

    pub fn scale(&self, k: i64) -> Self {
        Divisor::from_pairs(self.coeffs.iter().map(|(p, n)| (p.clone(), n * k)))
    }

    pub fn coeff(&self, p: &P) -> i64 {
        self.coeffs.get(p).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&P, &i64)> {
        self.coeffs.iter()
    }

    pub fn support(&self) -> Vec<P> {
        self.coeffs.keys().cloned().collect()
    }

    /// Places with odd coefficient.
    pub fn odd_support(&self) -> Vec<P> {
        self.coeffs.iter().filter(|(_, n)| *n % 2 != 0).map(|(p, _)| p.clone()).collect()
    }

    pub fn degree<B: Backend<Place = P> + ?Sized>(&self, b: &B) -> i64 {
        self.coeffs.iter().map(|(p, n)| n * b.place_degree(p) as i64).sum()
    }
}

/// A global function field of odd characteristic together with exact arithmetic on its
/// places, elements, divisors and the 2-part of its Picard group.
pub trait Backend {
    type Place: Clone + Eq + Ord + Hash + Debug;
    type Elem: Clone + Debug + PartialEq;

    fn fq(&self) -> &Fq;
    /// `"p1"` or `"elliptic"`.
    fn name(&self) -> &'static str;

    fn place_degree(&self, p: &Self::Place) -> u32;
    /// Every place of degree `d`, in the fixed deterministic order.
    fn places_of_degree(&self, d: u32) -> Vec<Self::Place>;

    fn places_up_to(&self, d: u32) -> Vec<Self::Place> {
        (1..=d).flat_map(|e| self.places_of_degree(e)).collect()
    }

    /// rk Pic⁰X / 2Pic⁰X.
    fn pic0_two_rank(&self) -> usize;
    /// Coordinates of [p] in Pic X / 2Pic X, a vector of length 1 + pic0_two_rank.
    fn class_vector(&self, p: &Self::Place) -> Vec<bool>;
    /// Some λ with div λ ≡ Σ places (mod 2 Div X). Fails with `NotTwoDivisible` when the
    /// sum of the classes is not 2-divisible.
    fn two_divisibility_witness(&self, places: &[Self::Place]) -> Result<Self::Elem>;
    /// A basis of Sing(X).
    fn sing_x_basis(&self) -> Vec<Self::Elem>;

    fn constant(&self, c: Gf) -> Self::Elem;
    fn one(&self) -> Self::Elem {
        self.constant(1)
    }
    fn minus_one(&self) -> Self::Elem {
        self.constant(self.fq().neg(1))
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Square-class normal form: same class in K*/K*², exponents reduced.
    fn reduce(&self, a: &Self::Elem) -> Self::Elem;
    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn ord(&self, a: &Self::Elem, p: &Self::Place) -> Result<i64>;
    fn residue_field(&self, p: &Self::Place) -> ResidueField;
    /// ord and the residue of a / π^ord for the fixed uniformizer π at `p`.
    fn local_data(&self, a: &Self::Elem, p: &Self::Place) -> Result<(i64, Res)>;
    /// Residue of an element of valuation zero.
    fn residue(&self, a: &Self::Elem, p: &Self::Place) -> Result<Res> {
        let (v, r) = self.local_data(a, p)?;
        if v != 0 {
            return Err(crate::Error::InvalidInput(format!(
                "residue needs valuation 0, got {v} at {}",
                self.format_place(p)
            )));
        }
        Ok(r)
    }
    fn divisor_of(&self, a: &Self::Elem) -> Result<Divisor<Self::Place>>;
    fn uniformizer(&self, p: &Self::Place) -> Self::Elem;
    fn primary_unit(&self, p: &Self::Place) -> Self::Elem;

    /// 2-rank of Pic(X∖S) computed without the rank formula.
    fn pic_open_two_rank_direct(&self, s: &[Self::Place]) -> Result<usize>;

    fn parse_place(&self, s: &str) -> Result<Self::Place>;
    fn format_place(&self, p: &Self::Place) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;
    fn format_elem(&self, a: &Self::Elem) -> String;

    fn product(&self, xs: &[Self::Elem]) -> Self::Elem {
        xs.iter().fold(self.one(), |acc, x| self.mul(&acc, x))
    }
}
