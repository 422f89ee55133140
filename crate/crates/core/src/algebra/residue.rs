//! Residue fields of places, realized as F_q[t]/(m) or, for inert places of a quadratic
//! extension, as (F_q[t]/(m))[y]/(y^2 - f).

use crate::algebra::gf::Fq;
use crate::algebra::poly::Poly;

/// Element `a + b*y` of a residue field; `b` is zero in the simple case.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Res {
    pub a: Poly,
    pub b: Poly,
}

impl Res {
    pub fn simple(a: Poly) -> Res {
        Res { a, b: Poly::zero() }
    }
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueField {
    modulus: Poly,
    quad: Option<Poly>,
}

impl ResidueField {
    /// F_q[t]/(m) for a monic irreducible `m`.
    pub fn simple(m: Poly) -> ResidueField {
        ResidueField { modulus: m, quad: None }
    }

    /// Quadratic extension of F_q[t]/(m) by a square root of the non-square `f mod m`.
    pub fn quadratic(m: Poly, f: &Poly, fq: &Fq) -> ResidueField {
        ResidueField { quad: Some(f.rem(&m, fq)), modulus: m }
    }

    /// The prime field F_q viewed as a residue field.
    pub fn constants() -> ResidueField {
        ResidueField::simple(Poly::t())
    }

    pub fn modulus(&self) -> &Poly {
        &self.modulus
    }

    pub fn is_quadratic(&self) -> bool {
        self.quad.is_some()
    }

    /// Degree over F_q.
    pub fn degree(&self) -> u32 {
        let d = self.modulus.deg() as u32;
        if self.quad.is_some() {
            2 * d
        } else {
            d
        }
    }

    pub fn size(&self, fq: &Fq) -> u128 {
        (fq.q() as u128).pow(self.degree())
    }

    pub fn reduce(&self, a: &Poly, fq: &Fq) -> Res {
        Res::simple(a.rem(&self.modulus, fq))
    }

    pub fn one(&self) -> Res {
        Res::simple(Poly::one())
    }

    pub fn constant(&self, c: u32) -> Res {
        Res::simple(Poly::constant(c))
    }

    pub fn mul(&self, x: &Res, y: &Res, fq: &Fq) -> Res {
        let m = &self.modulus;
        let aa = x.a.mul(&y.a, fq);
        match &self.quad {
            None => Res::simple(aa.rem(m, fq)),
            Some(fbar) => {
                let bb = x.b.mul(&y.b, fq).rem(m, fq).mul(fbar, fq);
                let a = aa.add(&bb, fq).rem(m, fq);
                let b = x.a.mul(&y.b, fq).add(&x.b.mul(&y.a, fq), fq).rem(m, fq);
                Res { a, b }
            }
        }
    }

    /// Norm down to F_q[t]/(m) (identity in the simple case).
    pub fn norm_to_base(&self, x: &Res, fq: &Fq) -> Poly {
        match &self.quad {
            None => x.a.clone(),
            Some(fbar) => x
                .a
                .square(fq)
                .sub(&x.b.square(fq).rem(&self.modulus, fq).mul(fbar, fq), fq)
                .rem(&self.modulus, fq),
        }
    }

    pub fn inv(&self, x: &Res, fq: &Fq) -> Res {
        let m = &self.modulus;
        match &self.quad {
            None => Res::simple(x.a.inv_mod(m, fq).expect("inverse of a nonzero residue")),
            Some(_) => {
                let n_inv = self.norm_to_base(x, fq).inv_mod(m, fq).expect("nonzero norm");
                Res { a: x.a.mul(&n_inv, fq).rem(m, fq), b: x.b.neg(fq).mul(&n_inv, fq).rem(m, fq) }
            }
        }
    }

    pub fn pow(&self, x: &Res, e: i64, fq: &Fq) -> Res {
        let base = if e < 0 { self.inv(x, fq) } else { x.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = self.one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b, fq);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b, fq);
            }
        }
        acc
    }

    fn pow_u128(&self, x: &Res, mut e: u128, fq: &Fq) -> Res {
        let mut acc = self.one();
        let mut b = x.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b, fq);
            }
            e >>= 1;
            if e > 0 {
                b = self.mul(&b, &b, fq);
            }
        }
        acc
    }

    /// Quadratic character: +1, -1, or 0 on zero.
    pub fn quad_char(&self, x: &Res, fq: &Fq) -> i8 {
        if x.is_zero() {
            return 0;
        }
        // In a finite extension the norm induces an isomorphism on square classes.
        let n = self.norm_to_base(x, fq);
        let d = self.modulus.deg() as u32;
        let q = fq.q() as u128;
        let e = (q.pow(d) - 1) / (q - 1);
        let down = n.pow_mod(e, &self.modulus, fq);
        debug_assert!(down.is_constant());
        fq.quad_char(down.coeff(0))
    }

    /// Enumerates the nonzero elements of a simple residue field in index order.
    fn nth_simple(&self, idx: u128, fq: &Fq) -> Res {
        let d = self.modulus.deg() as usize;
        let q = fq.q() as u128;
        let mut c = Vec::with_capacity(d);
        let mut r = idx;
        for _ in 0..d {
            c.push((r % q) as u32);
            r /= q;
        }
        Res::simple(Poly::from_coeffs(c))
    }

    /// First non-square in index order (simple fields only).
    pub fn first_nonsquare(&self, fq: &Fq) -> Res {
        assert!(self.quad.is_none());
        (1..self.size(fq))
            .map(|i| self.nth_simple(i, fq))
            .find(|x| self.quad_char(x, fq) == -1)
            .expect("odd-order field has non-squares")
    }

    /// Tonelli-Shanks square root in a simple residue field.
    pub fn sqrt(&self, x: &Res, fq: &Fq) -> Option<Res> {
        assert!(self.quad.is_none(), "sqrt is only needed in simple residue fields");
        if x.is_zero() {
            return Some(x.clone());
        }
        if self.quad_char(x, fq) != 1 {
            return None;
        }
        let big_q = self.size(fq);
        let mut s = 0;
        let mut odd = big_q - 1;
        while odd.is_multiple_of(2) {
            odd /= 2;
            s += 1;
        }
        let z = self.first_nonsquare(fq);
        let mut m = s;
        let mut c = self.pow_u128(&z, odd, fq);
        let mut t = self.pow_u128(x, odd, fq);
        let mut r = self.pow_u128(x, odd.div_ceil(2), fq);
        let one = self.one();
        while t != one {
            let mut i = 0;
            let mut tt = t.clone();
            while tt != one {
                tt = self.mul(&tt, &tt, fq);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.mul(&b, &b, fq);
            }
            m = i;
            c = self.mul(&b, &b, fq);
            t = self.mul(&t, &c, fq);
            r = self.mul(&r, &b, fq);
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residue_of_t2_plus_2_mod_t2_plus_3() {
        let f = Fq::new(5).unwrap();
        let rf = ResidueField::simple(Poly::from_coeffs(vec![3, 0, 1]));
        let x = rf.reduce(&Poly::from_coeffs(vec![2, 0, 1]), &f);
        assert_eq!(x, Res::simple(Poly::constant(4)));
        assert_eq!(rf.quad_char(&x, &f), 1);
    }

    #[test]
    fn quad_char_matches_enumeration_in_f25() {
        let f = Fq::new(5).unwrap();
        let rf = ResidueField::simple(Poly::from_coeffs(vec![2, 0, 1]));
        let elems: Vec<Res> = (0..25).map(|i| rf.nth_simple(i, &f)).collect();
        let squares: std::collections::HashSet<Res> =
            elems.iter().map(|x| rf.mul(x, x, &f)).collect();
        for x in &elems {
            let expect = if x.is_zero() { 0 } else if squares.contains(x) { 1 } else { -1 };
            assert_eq!(rf.quad_char(x, &f), expect);
        }
    }

    #[test]
    fn sqrt_roundtrip() {
        let f = Fq::new(3).unwrap();
        let rf = ResidueField::simple(Poly::from_coeffs(vec![1, 2, 0, 1]));
        for i in 1..27 {
            let x = rf.nth_simple(i, &f);
            if let Some(r) = rf.sqrt(&x, &f) {
                assert_eq!(rf.mul(&r, &r, &f), x);
            } else {
                assert_eq!(rf.quad_char(&x, &f), -1);
            }
        }
    }

    #[test]
    fn quadratic_field_characters() {
        // F_5[t]/(t-1) = F_5, extended by sqrt(3): F_25. Every element of F_5 is a square there.
        let f = Fq::new(5).unwrap();
        let rf = ResidueField::quadratic(Poly::linear(1, &f), &Poly::constant(3), &f);
        for c in 1..5 {
            assert_eq!(rf.quad_char(&rf.constant(c), &f), 1);
        }
        let y = Res { a: Poly::zero(), b: Poly::one() };
        let y2 = rf.mul(&y, &y, &f);
        assert_eq!(y2, rf.constant(3));
        let inv = rf.inv(&Res { a: Poly::one(), b: Poly::one() }, &f);
        assert_eq!(rf.mul(&inv, &Res { a: Poly::one(), b: Poly::one() }, &f), rf.one());
    }
}
