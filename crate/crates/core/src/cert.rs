//! Certificate JSON for both backends.
//!
//! Places and elements are stored in their textual forms, so a certificate can be read back
//! with nothing but the field size and, for curves, the cubic.

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::elliptic::{EllipticCurve, DEFAULT_Q_BOUND};
use crate::equivalence::Equivalence;
use crate::error::{Error, Result};
use crate::local_symbols::{LocalMap, Token};
use crate::p1::{parse_poly, P1};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Pre,
    Small,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalMapJson {
    pub place: String,
    pub image_of_u: Token,
    pub image_of_pi: Token,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub kind: Kind,
    pub backend: String,
    pub q: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<String>,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    pub quotient_basis: Vec<String>,
    pub quotient_images: Vec<String>,
    pub local_maps: Vec<LocalMapJson>,
    pub claimed_wild_set: Vec<String>,
}

impl CertificateJson {
    pub fn parse(text: &str) -> Result<CertificateJson> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("certificate JSON: {e}")))
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// Either backend, chosen at run time.
pub enum Session {
    P1(P1),
    Curve(EllipticCurve),
}

impl Session {
    /// `curve` is the cubic f of y² = f(t), written as a polynomial in t.
    pub fn new(q: u32, curve: Option<&str>) -> Result<Session> {
        match curve {
            None => Ok(Session::P1(P1::new(q)?)),
            Some(f) => {
                let p1 = P1::new(q)?;
                let poly = parse_poly(f, p1.fq())?;
                Ok(Session::Curve(EllipticCurve::from_poly(p1.fq().clone(), poly, DEFAULT_Q_BOUND)?))
            }
        }
    }

    pub fn for_certificate(c: &CertificateJson) -> Result<Session> {
        match (c.backend.as_str(), &c.curve) {
            ("p1", None) => Session::new(c.q, None),
            ("elliptic", Some(f)) => Session::new(c.q, Some(f)),
            (name, _) => Err(Error::Parse(format!("backend {name:?} with curve {:?} is not recognised", c.curve))),
        }
    }
}

pub fn curve_string(e: &EllipticCurve) -> String {
    e.f().format(e.fq(), "t")
}

pub fn to_json<B: Backend>(b: &B, curve: Option<String>, kind: Kind, e: &Equivalence<B>, claimed: &[B::Place]) -> CertificateJson {
    let places = |v: &[B::Place]| v.iter().map(|p| b.format_place(p)).collect::<Vec<_>>();
    let elems = |v: &[B::Elem]| v.iter().map(|x| b.format_elem(x)).collect::<Vec<_>>();
    CertificateJson {
        kind,
        backend: b.name().into(),
        q: b.fq().q(),
        curve,
        s: places(&e.s),
        t: places(&e.t),
        quotient_basis: elems(&e.basis),
        quotient_images: elems(&e.images),
        local_maps: e
            .s
            .iter()
            .zip(&e.local_maps)
            .map(|(p, m)| LocalMapJson { place: b.format_place(p), image_of_u: m.image_of_u, image_of_pi: m.image_of_pi })
            .collect(),
        claimed_wild_set: places(claimed),
    }
}

/// Reads the equivalence and the claimed wild set. Local maps are matched to S by place,
/// so their order in the file is free.
pub fn from_json<B: Backend>(b: &B, c: &CertificateJson) -> Result<(Equivalence<B>, Vec<B::Place>)> {
    if c.backend != b.name() || c.q != b.fq().q() {
        return Err(Error::InvalidInput(format!("certificate is for {} over F_{}", c.backend, c.q)));
    }
    let places = |v: &[String]| v.iter().map(|p| b.parse_place(p)).collect::<Result<Vec<_>>>();
    let elems = |v: &[String]| v.iter().map(|x| b.parse_elem(x)).collect::<Result<Vec<_>>>();
    let s = places(&c.s)?;
    let mut maps = Vec::with_capacity(s.len());
    for p in &s {
        let mut found = None;
        for m in &c.local_maps {
            if b.parse_place(&m.place)? == *p {
                if found.is_some() {
                    return Err(Error::InvalidInput(format!("two local maps at {}", b.format_place(p))));
                }
                found = Some(LocalMap { image_of_u: m.image_of_u, image_of_pi: m.image_of_pi });
            }
        }
        maps.push(found.ok_or_else(|| Error::InvalidInput(format!("no local map at {}", b.format_place(p))))?);
    }
    if c.local_maps.len() != s.len() {
        return Err(Error::InvalidInput(format!("{} local maps for {} places", c.local_maps.len(), s.len())));
    }
    let e = Equivalence {
        s,
        t: places(&c.t)?,
        basis: elems(&c.quotient_basis)?,
        images: elems(&c.quotient_images)?,
        local_maps: maps,
    };
    Ok((e, places(&c.claimed_wild_set)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{construct_general, construct_rank1_pair};
    use crate::equivalence::verify_small_equivalence;

    #[test]
    fn p1_round_trip() {
        let k = P1::new(5).unwrap();
        let (p, q) = (k.parse_place("t").unwrap(), k.parse_place("t^2+2").unwrap());
        let c = construct_rank1_pair(&k, &p, &q, 6).unwrap();
        let j = to_json(&k, None, Kind::Small, &c.se, &c.wild_set);
        let back = CertificateJson::parse(&j.to_pretty()).unwrap();
        assert_eq!(back, j);
        let (e, w) = from_json(&k, &back).unwrap();
        assert_eq!(w, c.wild_set);
        assert!(verify_small_equivalence(&k, &e).unwrap().passed());
        assert!(j.to_pretty().contains("\"S\""));
    }

    #[test]
    fn curve_round_trip() {
        let Session::Curve(e) = Session::new(5, Some("t^3-t")).unwrap() else { panic!() };
        let p = vec![e.parse_place("t").unwrap(), e.parse_place("t+1").unwrap()];
        let q = vec![e.parse_place("t^2+2").unwrap(), e.parse_place("t^2+3").unwrap()];
        let c = construct_general(&e, &p, &q, 6).unwrap();
        let j = to_json(&e, Some(curve_string(&e)), Kind::Small, &c.se, &c.wild_set);
        let text = j.to_pretty();
        let back = CertificateJson::parse(&text).unwrap();
        let Session::Curve(e2) = Session::for_certificate(&back).unwrap() else { panic!() };
        let (eq, _) = from_json(&e2, &back).unwrap();
        assert!(verify_small_equivalence(&e2, &eq).unwrap().passed());
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(CertificateJson::parse("{\"kind\":\"small\"}"), Err(Error::Parse(_))));
        let k = P1::new(5).unwrap();
        let mut j = to_json(&k, None, Kind::Pre, &crate::equivalence::identity_pre(&k, &[k.parse_place("t").unwrap()]).unwrap(), &[]);
        j.local_maps.clear();
        assert!(from_json(&k, &j).is_err());
        j.q = 7;
        assert!(from_json(&k, &j).is_err());
    }
}
