//! Local square classes {1, u, π, uπ}, local maps between them, tame Hilbert symbols and
//! the reciprocity product.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::backend::Backend;
use crate::error::{Error, Result};

/// A local square class `u^unit · π^odd`, i.e. an element of F₂².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Token {
    pub unit: bool,
    pub odd: bool,
}

impl Token {
    pub const ONE: Token = Token { unit: false, odd: false };
    pub const U: Token = Token { unit: true, odd: false };
    pub const PI: Token = Token { unit: false, odd: true };
    pub const UPI: Token = Token { unit: true, odd: true };
    pub const ALL: [Token; 4] = [Token::ONE, Token::U, Token::PI, Token::UPI];

    pub fn mul(self, o: Token) -> Token {
        Token { unit: self.unit ^ o.unit, odd: self.odd ^ o.odd }
    }

    pub fn is_one(self) -> bool {
        self == Token::ONE
    }

    pub fn bits(self) -> [bool; 2] {
        [self.unit, self.odd]
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.unit, self.odd) {
            (false, false) => "1",
            (true, false) => "u",
            (false, true) => "pi",
            (true, true) => "upi",
        })
    }
}

impl FromStr for Token {
    type Err = Error;
    fn from_str(s: &str) -> Result<Token> {
        match s.trim() {
            "1" => Ok(Token::ONE),
            "u" => Ok(Token::U),
            "pi" | "π" => Ok(Token::PI),
            "upi" | "uπ" | "u*pi" => Ok(Token::UPI),
            other => Err(Error::Parse(format!("unknown square-class token {other:?}"))),
        }
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Token, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hilbert symbol of two tokens at a place where −1 has class `minus_one`.
pub fn token_symbol(x: Token, y: Token, minus_one: Token) -> i8 {
    // (u^a π^α, u^b π^β) = (−1)^{aβ + bα} · χ(−1)^{αβ}
    let mut s = (x.unit && y.odd) ^ (y.unit && x.odd);
    if x.odd && y.odd && minus_one.unit {
        s = !s;
    }
    if s {
        -1
    } else {
        1
    }
}

/// A homomorphism between four-element square-class groups, recorded by the images of u
/// and π.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LocalMap {
    pub image_of_u: Token,
    pub image_of_pi: Token,
}

impl LocalMap {
    pub const IDENTITY: LocalMap = LocalMap { image_of_u: Token::U, image_of_pi: Token::PI };

    pub fn apply(&self, x: Token) -> Token {
        let mut r = Token::ONE;
        if x.unit {
            r = r.mul(self.image_of_u);
        }
        if x.odd {
            r = r.mul(self.image_of_pi);
        }
        r
    }

    pub fn is_isomorphism(&self) -> bool {
        !self.image_of_u.is_one()
            && !self.image_of_pi.is_one()
            && self.image_of_u != self.image_of_pi
    }

    /// Wild ⟺ the class u of even valuation goes to a class of odd valuation.
    pub fn is_wild(&self) -> bool {
        self.image_of_u.odd
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &LocalMap) -> LocalMap {
        LocalMap { image_of_u: other.apply(self.image_of_u), image_of_pi: other.apply(self.image_of_pi) }
    }

    pub fn inverse(&self) -> Option<LocalMap> {
        LocalMap::from_pairs((self.image_of_u, Token::U), (self.image_of_pi, Token::PI))
    }

    /// The unique isomorphism with `a.0 ↦ a.1` and `b.0 ↦ b.1`, when the sources and the
    /// targets are both bases.
    pub fn from_pairs(a: (Token, Token), b: (Token, Token)) -> Option<LocalMap> {
        let candidates = Token::ALL.iter().flat_map(|&iu| {
            Token::ALL.iter().map(move |&ip| LocalMap { image_of_u: iu, image_of_pi: ip })
        });
        let mut found = None;
        for m in candidates {
            if m.is_isomorphism() && m.apply(a.0) == a.1 && m.apply(b.0) == b.1 {
                if found.is_some() {
                    return None;
                }
                found = Some(m);
            }
        }
        found
    }

    /// Whether the map carries the Hilbert-symbol pairing at the source onto the target's.
    pub fn preserves_symbols(&self, minus_one_src: Token, minus_one_dst: Token) -> bool {
        Token::ALL.iter().all(|&x| {
            Token::ALL.iter().all(|&y| {
                token_symbol(x, y, minus_one_src)
                    == token_symbol(self.apply(x), self.apply(y), minus_one_dst)
            })
        })
    }
}

impl fmt::Display for LocalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u↦{}, π↦{}", self.image_of_u, self.image_of_pi)
    }
}

/// The class of λ in K_p*/K_p*².
pub fn local_square_class<B: Backend>(b: &B, lam: &B::Elem, p: &B::Place) -> Result<Token> {
    let (v, r) = b.local_data(lam, p)?;
    let rf = b.residue_field(p);
    Ok(Token { unit: rf.quad_char(&r, b.fq()) == -1, odd: v.rem_euclid(2) == 1 })
}

pub fn is_local_square<B: Backend>(b: &B, lam: &B::Elem, p: &B::Place) -> Result<bool> {
    Ok(local_square_class(b, lam, p)?.is_one())
}

/// Tokens of λ at each place, flattened into 2·|places| bits (unit bit, parity bit).
pub fn token_bits<B: Backend>(b: &B, lam: &B::Elem, places: &[B::Place]) -> Result<Vec<bool>> {
    let mut v = Vec::with_capacity(2 * places.len());
    for p in places {
        v.extend(local_square_class(b, lam, p)?.bits());
    }
    Ok(v)
}

/// Tame symbol χ((−1)^{αβ} · ū(λ)^β · ū(μ)^{−α}).
pub fn hilbert_symbol<B: Backend>(b: &B, lam: &B::Elem, mu: &B::Elem, p: &B::Place) -> Result<i8> {
    let fq = b.fq();
    let (alpha, ul) = b.local_data(lam, p)?;
    let (beta, um) = b.local_data(mu, p)?;
    if alpha == 0 && beta == 0 {
        return Ok(1);
    }
    let rf = b.residue_field(p);
    let mut x = rf.mul(&rf.pow(&ul, beta, fq), &rf.pow(&um, -alpha, fq), fq);
    if (alpha * beta).rem_euclid(2) == 1 {
        x = rf.mul(&x, &rf.constant(fq.neg(1)), fq);
    }
    Ok(rf.quad_char(&x, fq))
}

#[derive(Clone, Debug)]
pub struct ReciprocityReport<P> {
    pub product: i8,
    pub factors: Vec<(P, i8)>,
}

/// Product of (λ, μ)_p over the places where either argument has nonzero valuation; every
/// other symbol is trivial.
pub fn reciprocity_product<B: Backend>(b: &B, lam: &B::Elem, mu: &B::Elem) -> Result<ReciprocityReport<B::Place>> {
    let mut places: BTreeSet<B::Place> = b.divisor_of(lam)?.support().into_iter().collect();
    places.extend(b.divisor_of(mu)?.support());
    let mut factors = Vec::with_capacity(places.len());
    let mut product = 1;
    for p in places {
        let s = hilbert_symbol(b, lam, mu, &p)?;
        product *= s;
        factors.push((p, s));
    }
    Ok(ReciprocityReport { product, factors })
}


#[cfg(test)]
mod fuzz {
    use super::*;
    use crate::elliptic::EllipticCurve;
    use crate::p1::P1;
    use crate::sample;
    use rand::SeedableRng;

    #[test]
    fn reciprocity_and_symbol_identities_p1() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for q in [3, 5, 9] {
            let k = P1::new(q).unwrap();
            for _ in 0..60 {
                let a = sample::p1_elem(&k, 3, &mut rng);
                let b = sample::p1_elem(&k, 3, &mut rng);
                assert_eq!(reciprocity_product(&k, &a, &b).unwrap().product, 1);
                let neg_a = k.mul(&a, &k.minus_one());
                for p in k.places_up_to(2) {
                    let s = hilbert_symbol(&k, &a, &b, &p).unwrap();
                    assert_eq!(s, hilbert_symbol(&k, &b, &a, &p).unwrap());
                    assert_eq!(hilbert_symbol(&k, &a, &neg_a, &p).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn reciprocity_on_curves() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for e in [EllipticCurve::new(5, &[0, -1, 0, 1]).unwrap(), EllipticCurve::new(5, &[1, 1, 0, 1]).unwrap()] {
            for _ in 0..60 {
                let a = sample::curve_elem(&e, 2, &mut rng);
                let b = sample::curve_elem(&e, 2, &mut rng);
                assert_eq!(e.divisor_of(&a).unwrap().degree(&e), 0);
                let r = reciprocity_product(&e, &a, &b).unwrap();
                assert_eq!(r.product, 1, "{} / {}", e.format_elem(&a), e.format_elem(&b));
            }
        }
    }
}
