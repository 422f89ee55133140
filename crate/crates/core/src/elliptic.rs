//! Elliptic function fields K = F_q(t)[y]/(y² − f) with f a monic squarefree cubic.
//!
//! Places lie above places of F_q(t) and are split, inert or ramified. The point group
//! E(F_q) is enumerated once; Pic X ≅ ℤ ⊕ E(F_q). Functions with a prescribed principal
//! divisor are built by Cantor reduction of Mumford pairs followed by Miller's line
//! accumulation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::algebra::expr::{self, Eval};
use crate::algebra::{Fq, Gf, Poly, Res, ResidueField};
use crate::backend::{Backend, Divisor};
use crate::error::{Error, Result};
use crate::p1::{P1Eval, P1Place, RatFn, P1};

/// Largest q for which the point group is enumerated unless configured otherwise.
pub const DEFAULT_Q_BOUND: u32 = 49;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    O,
    A(Gf, Gf),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlaceKind {
    Ramified,
    /// Branch 0 carries the smaller of the two square roots of f modulo the base place.
    Split { branch: u8, root: Poly },
    Inert,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurvePlace {
    pub base: P1Place,
    pub kind: PlaceKind,
    pub degree: u32,
}

impl Ord for CurvePlace {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.degree, &self.base, &self.kind).cmp(&(o.degree, &o.base, &o.kind))
    }
}
impl PartialOrd for CurvePlace {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl CurvePlace {
    pub fn is_infinite(&self) -> bool {
        self.base == P1Place::Infinity
    }
}

/// `a + b·y` with coprime polynomials and monic nonzero `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineAtom {
    pub a: Poly,
    pub b: Poly,
}

/// A nonzero element `base · Π atom^e` of K.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurveElem {
    pub base: RatFn,
    pub atoms: BTreeMap<LineAtom, i64>,
}

impl CurveElem {
    pub fn from_base(base: RatFn) -> CurveElem {
        CurveElem { base, atoms: BTreeMap::new() }
    }

    pub fn y() -> CurveElem {
        CurveElem {
            base: RatFn::constant(1),
            atoms: BTreeMap::from([(LineAtom { a: Poly::zero(), b: Poly::one() }, 1)]),
        }
    }

    fn add_atom(&mut self, at: LineAtom, e: i64) {
        if e == 0 {
            return;
        }
        let x = self.atoms.entry(at.clone()).or_insert(0);
        *x += e;
        if *x == 0 {
            self.atoms.remove(&at);
        }
    }

    pub fn mul(&self, o: &CurveElem, f: &Fq) -> CurveElem {
        let mut r = CurveElem::from_base(self.base.mul(&o.base, f));
        r.atoms = self.atoms.clone();
        for (at, e) in &o.atoms {
            r.add_atom(at.clone(), *e);
        }
        r
    }

    pub fn pow(&self, k: i64, f: &Fq) -> CurveElem {
        if k == 0 {
            return CurveElem::from_base(RatFn::constant(1));
        }
        CurveElem {
            base: self.base.pow(k, f),
            atoms: self.atoms.iter().map(|(a, e)| (a.clone(), e * k)).collect(),
        }
    }
}

/// Group law and enumeration data of E(F_q).
#[derive(Clone, Debug)]
struct Group {
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    add: Vec<Vec<usize>>,
    doubles: BTreeSet<usize>,
    /// Generators of E/2E; `coords[i]` are the coordinates of point i in that basis.
    basis: Vec<usize>,
    coords: Vec<Vec<bool>>,
}

#[derive(Clone, Debug)]
pub struct EllipticCurve {
    fq: Arc<Fq>,
    f: Poly,
    roots: Vec<Gf>,
    group: Group,
}

fn chord_tangent(fq: &Fq, f: &Poly, p: &Point, q: &Point) -> Point {
    let (x1, y1, x2, y2) = match (p, q) {
        (Point::O, _) => return q.clone(),
        (_, Point::O) => return p.clone(),
        (Point::A(x1, y1), Point::A(x2, y2)) => (*x1, *y1, *x2, *y2),
    };
    if x1 == x2 && fq.add(y1, y2) == 0 {
        return Point::O;
    }
    let s = slope(fq, f, x1, y1, x2, y2);
    // y² = t³ + a2 t² + ...: x3 = s² − a2 − x1 − x2
    let a2 = f.coeff(2);
    let x3 = fq.sub(fq.sub(fq.sub(fq.mul(s, s), a2), x1), x2);
    let y3 = fq.neg(fq.add(fq.mul(s, fq.sub(x3, x1)), y1));
    Point::A(x3, y3)
}

fn slope(fq: &Fq, f: &Poly, x1: Gf, y1: Gf, x2: Gf, y2: Gf) -> Gf {
    if x1 == x2 {
        let d = f.derivative(fq).eval(x1, fq);
        fq.div(d, fq.add(y1, y1))
    } else {
        fq.div(fq.sub(y2, y1), fq.sub(x2, x1))
    }
}

impl EllipticCurve {
    pub fn new(q: u32, f_coeffs: &[i64]) -> Result<EllipticCurve> {
        EllipticCurve::with_bound(q, f_coeffs, DEFAULT_Q_BOUND)
    }

    /// `f_coeffs` lists the coefficients of f constant term first.
    pub fn with_bound(q: u32, f_coeffs: &[i64], bound: u32) -> Result<EllipticCurve> {
        let fq = Fq::new(q)?;
        let f = Poly::from_coeffs(f_coeffs.iter().map(|&c| fq.from_int(c)).collect());
        EllipticCurve::from_poly(fq, f, bound)
    }

    pub fn from_poly(fq: Fq, f: Poly, bound: u32) -> Result<EllipticCurve> {
        if fq.q() > bound {
            return Err(Error::BoundExceeded { q: fq.q(), bound });
        }
        if f.deg() != 3 {
            return Err(Error::InvalidInput("f must be a cubic".into()));
        }
        if !f.is_monic() {
            return Err(Error::InvalidInput("f must be monic".into()));
        }
        if !f.gcd(&f.derivative(&fq), &fq).is_one() {
            return Err(Error::InvalidInput("f must be squarefree".into()));
        }
        let roots: Vec<Gf> = fq.elements().filter(|&x| f.eval(x, &fq) == 0).collect();
        let group = Group::build(&fq, &f);
        Ok(EllipticCurve { fq: Arc::new(fq), f, roots, group })
    }

    pub fn f(&self) -> &Poly {
        &self.f
    }

    /// Coefficients of f, constant term first, as integers in [0, p) for prime fields.
    pub fn f_coeffs(&self) -> Vec<u32> {
        (0..=3).map(|i| self.f.coeff(i)).collect()
    }

    pub fn roots(&self) -> &[Gf] {
        &self.roots
    }

    pub fn points(&self) -> &[Point] {
        &self.group.points
    }

    pub fn order(&self) -> usize {
        self.group.points.len()
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let g = &self.group;
        g.points[g.add[g.index[p]][g.index[q]]].clone()
    }

    pub fn neg(&self, p: &Point) -> Point {
        match p {
            Point::O => Point::O,
            Point::A(x, y) => Point::A(*x, self.fq.neg(*y)),
        }
    }

    pub fn double(&self, p: &Point) -> Point {
        self.add(p, p)
    }

    pub fn mul_point(&self, p: &Point, n: i64) -> Point {
        let base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut acc = Point::O;
        for _ in 0..n.unsigned_abs() {
            acc = self.add(&acc, &base);
        }
        acc
    }

    pub fn is_on_curve(&self, p: &Point) -> bool {
        match p {
            Point::O => true,
            Point::A(x, y) => self.fq.mul(*y, *y) == self.f.eval(*x, &self.fq),
        }
    }

    pub fn two_divisible(&self, p: &Point) -> bool {
        self.group.doubles.contains(&self.group.index[p])
    }

    /// Some h with 2h = p.
    pub fn halve(&self, p: &Point) -> Option<Point> {
        self.group.points.iter().find(|h| self.double(h) == *p).cloned()
    }

    pub fn two_torsion(&self) -> Vec<Point> {
        self.group.points.iter().filter(|p| self.double(p) == Point::O).cloned().collect()
    }

    /// (rk Pic⁰X/2Pic⁰X, rk Pic X/2Pic X).
    pub fn pic_two_ranks(&self) -> (usize, usize) {
        let r = self.group.basis.len();
        (r, r + 1)
    }

    /// Coordinates of a point in E/2E.
    pub fn e2_coords(&self, p: &Point) -> Vec<bool> {
        self.group.coords[self.group.index[p]].clone()
    }
}

impl Group {
    fn build(fq: &Fq, f: &Poly) -> Group {
        let mut points = vec![Point::O];
        for x in fq.elements() {
            let z = f.eval(x, fq);
            if z == 0 {
                points.push(Point::A(x, 0));
            } else if let Some(r) = fq.sqrt(z) {
                let (a, b) = if r < fq.neg(r) { (r, fq.neg(r)) } else { (fq.neg(r), r) };
                points.push(Point::A(x, a));
                points.push(Point::A(x, b));
            }
        }
        let index: HashMap<Point, usize> =
            points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let add: Vec<Vec<usize>> = points
            .iter()
            .map(|p| points.iter().map(|q| index[&chord_tangent(fq, f, p, q)]).collect())
            .collect();
        let doubles: BTreeSet<usize> = (0..points.len()).map(|i| add[i][i]).collect();
        // greedy basis of E/2E: a point joins when it lies outside the span so far
        let mut span: BTreeSet<usize> = doubles.clone();
        let mut basis = Vec::new();
        for i in 0..points.len() {
            if !span.contains(&i) {
                basis.push(i);
                let shifted: Vec<usize> = span.iter().map(|&s| add[s][i]).collect();
                span.extend(shifted);
            }
        }
        let r = basis.len();
        let mut coords = vec![Vec::new(); points.len()];
        for mask in 0u32..(1 << r) {
            let v: Vec<bool> = (0..r).map(|j| mask >> j & 1 == 1).collect();
            let mut shift = 0;
            for (j, &g) in basis.iter().enumerate() {
                if v[j] {
                    shift = add[shift][g];
                }
            }
            for &d in &doubles {
                coords[add[d][shift]] = v.clone();
            }
        }
        Group { points, index, add, doubles, basis, coords }
    }
}

impl EllipticCurve {
    pub fn infinity(&self) -> CurvePlace {
        CurvePlace { base: P1Place::Infinity, kind: PlaceKind::Ramified, degree: 1 }
    }

    /// The places of K above a place of F_q(t).
    pub fn places_above(&self, base: &P1Place) -> Vec<CurvePlace> {
        let fq = &self.fq;
        let m = match base {
            P1Place::Infinity => return vec![self.infinity()],
            P1Place::Finite(m) => m,
        };
        let d = m.deg() as u32;
        let rf = ResidueField::simple(m.clone());
        let fbar = rf.reduce(&self.f, fq);
        match rf.quad_char(&fbar, fq) {
            0 => vec![CurvePlace { base: base.clone(), kind: PlaceKind::Ramified, degree: d }],
            1 => {
                let r = rf.sqrt(&fbar, fq).expect("square").a;
                let s = r.neg(fq).rem(m, fq);
                let (lo, hi) = if r < s { (r, s) } else { (s, r) };
                [lo, hi]
                    .into_iter()
                    .enumerate()
                    .map(|(i, root)| CurvePlace {
                        base: base.clone(),
                        kind: PlaceKind::Split { branch: i as u8, root },
                        degree: d,
                    })
                    .collect()
            }
            _ => vec![CurvePlace { base: base.clone(), kind: PlaceKind::Inert, degree: 2 * d }],
        }
    }

    /// The degree-1 place of an affine point.
    pub fn place_of_point(&self, p: &Point) -> Option<CurvePlace> {
        let (x, y) = match p {
            Point::O => return None,
            Point::A(x, y) => (*x, *y),
        };
        let base = P1Place::Finite(Poly::linear(x, &self.fq));
        self.places_above(&base).into_iter().find(|pl| match &pl.kind {
            PlaceKind::Ramified => y == 0,
            PlaceKind::Split { root, .. } => root.coeff(0) == y,
            PlaceKind::Inert => false,
        })
    }

    fn f1(&self, m: &Poly) -> Poly {
        self.f.div_exact(m, &self.fq)
    }

    fn res_pow(&self, rf: &ResidueField, x: &Res, e: i64) -> Res {
        rf.pow(x, e, &self.fq)
    }

    fn base_local(&self, lam: &RatFn, p: &CurvePlace) -> (i64, Res) {
        let fq = &self.fq;
        match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => (-2 * lam.degree(), Res::simple(Poly::constant(lam.constant))),
            (P1Place::Finite(m), PlaceKind::Ramified) => {
                let v = lam.ord_at(m);
                let rf = ResidueField::simple(m.clone());
                let u = lam.unit_residue_at(m, fq);
                let f1 = rf.reduce(&self.f1(m), fq);
                (2 * v, rf.mul(&u, &self.res_pow(&rf, &f1, -v), fq))
            }
            (P1Place::Finite(m), _) => (lam.ord_at(m), lam.unit_residue_at(m, fq)),
        }
    }

    /// y modulo m^k on a split branch, by Newton iteration from the branch root.
    fn hensel_root(&self, m: &Poly, root: &Poly, k: u32) -> (Poly, Poly) {
        let fq = &self.fq;
        let mut y = root.clone();
        let mut prec = 1;
        while prec < k {
            prec = (2 * prec).min(k);
            let mk = m.pow(prec, fq);
            let num = y.square(fq).sub(&self.f, fq).rem(&mk, fq);
            let den = y.scale(fq.from_int(2), fq).inv_mod(&mk, fq).expect("unit at split place");
            y = y.sub(&num.mul(&den, fq).rem(&mk, fq), fq).rem(&mk, fq);
        }
        let mk = m.pow(k, fq);
        (y.rem(&mk, fq), mk)
    }

    fn atom_local(&self, at: &LineAtom, p: &CurvePlace) -> (i64, Res) {
        let fq = &self.fq;
        let (a, b) = (&at.a, &at.b);
        match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => {
                let vb = -2 * b.deg() - 3;
                if !a.is_zero() && -2 * a.deg() < vb {
                    (-2 * a.deg(), Res::simple(Poly::constant(a.lc())))
                } else {
                    (vb, Res::simple(Poly::constant(b.lc())))
                }
            }
            (P1Place::Finite(m), PlaceKind::Ramified) => {
                let rf = ResidueField::simple(m.clone());
                let f1 = rf.reduce(&self.f1(m), fq);
                let (vb, b1) = b.valuation(m, fq);
                let (va, a1) =
                    if a.is_zero() { (u32::MAX / 4, Poly::zero()) } else { a.valuation(m, fq) };
                let (v, unit, k) = if 2 * va < 2 * vb + 1 {
                    (2 * va as i64, a1, va as i64)
                } else {
                    (2 * vb as i64 + 1, b1, vb as i64)
                };
                let r = rf.mul(&rf.reduce(&unit, fq), &self.res_pow(&rf, &f1, -k), fq);
                (v, r)
            }
            (P1Place::Finite(m), PlaceKind::Inert) => {
                let va = if a.is_zero() { u32::MAX } else { a.valuation(m, fq).0 };
                let vb = b.valuation(m, fq).0;
                let v = va.min(vb);
                let mv = m.pow(v, fq);
                let ra = if a.is_zero() { Poly::zero() } else { a.div_exact(&mv, fq).rem(m, fq) };
                let rb = b.div_exact(&mv, fq).rem(m, fq);
                (v as i64, Res { a: ra, b: rb })
            }
            (P1Place::Finite(m), PlaceKind::Split { root, .. }) => {
                let norm = a.square(fq).sub(&b.square(fq).mul(&self.f, fq), fq);
                let k = norm.valuation(m, fq).0 + 1;
                let (y, mk) = self.hensel_root(m, root, k);
                let val = a.add(&b.mul(&y, fq), fq).rem(&mk, fq);
                assert!(!val.is_zero(), "valuation bounded by the norm");
                let (v, rest) = val.valuation(m, fq);
                (v as i64, Res::simple(rest.rem(m, fq)))
            }
        }
    }

    fn elem_local(&self, x: &CurveElem, p: &CurvePlace) -> (i64, Res) {
        let rf = self.residue_field_of(p);
        let (mut v, mut r) = self.base_local(&x.base, p);
        for (at, &e) in &x.atoms {
            let (va, ra) = self.atom_local(at, p);
            v += e * va;
            r = rf.mul(&r, &self.res_pow(&rf, &ra, e), &self.fq);
        }
        (v, r)
    }

    fn residue_field_of(&self, p: &CurvePlace) -> ResidueField {
        match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => ResidueField::constants(),
            (P1Place::Finite(m), PlaceKind::Inert) => ResidueField::quadratic(m.clone(), &self.f, &self.fq),
            (P1Place::Finite(m), _) => ResidueField::simple(m.clone()),
        }
    }

    /// Multiplies out to `(A + B·y) / D`.
    fn to_triple(&self, x: &CurveElem) -> (Poly, Poly, Poly) {
        let fq = &self.fq;
        let (n, d) = x.base.to_frac(fq);
        let (mut a, mut b) = (n, Poly::zero());
        let mut den = d;
        for (at, &e) in &x.atoms {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    let na = a.mul(&at.a, fq).add(&b.mul(&at.b, fq).mul(&self.f, fq), fq);
                    let nb = a.mul(&at.b, fq).add(&b.mul(&at.a, fq), fq);
                    a = na;
                    b = nb;
                } else {
                    // 1/(p + q y) = (p − q y)/(p² − q² f)
                    let norm = at.a.square(fq).sub(&at.b.square(fq).mul(&self.f, fq), fq);
                    let (pa, pb) = (at.a.clone(), at.b.neg(fq));
                    let na = a.mul(&pa, fq).add(&b.mul(&pb, fq).mul(&self.f, fq), fq);
                    let nb = a.mul(&pb, fq).add(&b.mul(&pa, fq), fq);
                    a = na;
                    b = nb;
                    den = den.mul(&norm, fq);
                }
            }
        }
        (a, b, den)
    }

    fn from_triple(&self, a: &Poly, b: &Poly, d: &Poly) -> Result<CurveElem> {
        let fq = &self.fq;
        if b.is_zero() {
            return Ok(CurveElem::from_base(RatFn::from_frac(a, d, fq)?));
        }
        let g = a.gcd(b, fq);
        let (a1, b1) = (a.div_exact(&g, fq), b.div_exact(&g, fq));
        let lc = b1.lc();
        let inv = fq.inv(lc);
        let atom = LineAtom { a: a1.scale(inv, fq), b: b1.scale(inv, fq) };
        let mut x = CurveElem::from_base(RatFn::from_frac(&g.scale(lc, fq), d, fq)?);
        x.add_atom(atom, 1);
        Ok(x)
    }

    /// The atom `a + b·y` as an element (normalizing scalars and common factors).
    pub fn line(&self, a: &Poly, b: &Poly) -> Result<CurveElem> {
        self.from_triple(a, b, &Poly::one())
    }

    fn base_elem(&self, p: &Poly) -> CurveElem {
        CurveElem::from_base(RatFn::from_poly(p, &self.fq).expect("nonzero polynomial"))
    }

    /// [P − deg P·∞] = (point) − ∞ + div F, by Cantor reduction of the Mumford pair of P.
    pub fn reduce_place(&self, p: &CurvePlace) -> (Point, CurveElem) {
        let fq = &self.fq;
        let one = CurveElem::from_base(RatFn::constant(1));
        let (mut u, mut v) = match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => return (Point::O, one),
            (P1Place::Finite(m), PlaceKind::Inert) => return (Point::O, self.base_elem(m)),
            (P1Place::Finite(m), PlaceKind::Ramified) => (m.clone(), Poly::zero()),
            (P1Place::Finite(m), PlaceKind::Split { root, .. }) => (m.clone(), root.clone()),
        };
        let mut func = one;
        while u.deg() >= 2 {
            let up = self.f.sub(&v.square(fq), fq).div_exact(&u, fq).monic(fq);
            let line = self.line(&v.neg(fq), &Poly::one()).expect("y − v is nonzero");
            func = func.mul(&line, fq);
            if up.deg() > 0 {
                func = func.mul(&self.base_elem(&up).pow(-1, fq), fq);
            }
            v = v.neg(fq).rem(&up, fq);
            u = up;
        }
        if u.deg() == 1 {
            let x = fq.neg(u.coeff(0));
            (Point::A(x, v.eval(x, fq)), func)
        } else {
            (Point::O, func)
        }
    }

    /// The point class of a place: the image of P − deg P·∞ in E(F_q).
    pub fn point_of_place(&self, p: &CurvePlace) -> Point {
        self.reduce_place(p).0
    }

    /// Returns (P+Q, h) with (P) − ∞ + (Q) − ∞ = (P+Q) − ∞ + div h.
    fn miller_step(&self, p: &Point, q: &Point) -> (Point, CurveElem) {
        let fq = &self.fq;
        let one = CurveElem::from_base(RatFn::constant(1));
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::O, _) => return (q.clone(), one),
            (_, Point::O) => return (p.clone(), one),
            (Point::A(x1, y1), Point::A(x2, y2)) => (*x1, *y1, *x2, *y2),
        };
        if x1 == x2 && fq.add(y1, y2) == 0 {
            return (Point::O, self.base_elem(&Poly::linear(x1, fq)));
        }
        let s = slope(fq, &self.f, x1, y1, x2, y2);
        let sum = self.add(p, q);
        // ℓ = y − (s·t + y1 − s·x1)
        let c = fq.sub(y1, fq.mul(s, x1));
        let lin = Poly::from_coeffs(vec![fq.neg(c), fq.neg(s)]);
        let ell = self.line(&lin, &Poly::one()).expect("line");
        let Point::A(x3, _) = sum else { unreachable!("P ≠ −Q") };
        let vert = self.base_elem(&Poly::linear(x3, fq)).pow(-1, fq);
        (sum, ell.mul(&vert, fq))
    }

    /// A function with divisor exactly `d`, which must have degree 0 and trivial class.
    pub fn function_with_principal_divisor(&self, d: &Divisor<CurvePlace>) -> Result<CurveElem> {
        let fq = &self.fq;
        if d.degree(self) != 0 {
            return Err(Error::NotPrincipal);
        }
        let mut func = CurveElem::from_base(RatFn::constant(1));
        let mut acc = Point::O;
        let reduced: Vec<(Point, CurveElem, i64)> = d
            .iter()
            .map(|(p, &n)| {
                let (pt, fp) = self.reduce_place(p);
                (pt, fp, n)
            })
            .collect();
        let class = reduced.iter().fold(Point::O, |s, (pt, _, n)| self.add(&s, &self.mul_point(pt, *n)));
        if class != Point::O {
            return Err(Error::NotPrincipal);
        }
        for (pt, fp, n) in reduced {
            func = func.mul(&fp.pow(n, fq), fq);
            if pt == Point::O {
                continue;
            }
            let (step_pt, step_fn) = if n > 0 {
                (pt.clone(), None)
            } else {
                // −((P) − ∞) = ((−P) − ∞) − div(t − x_P)
                let Point::A(x, _) = pt else { unreachable!() };
                (self.neg(&pt), Some(self.base_elem(&Poly::linear(x, fq)).pow(-1, fq)))
            };
            for _ in 0..n.unsigned_abs() {
                if let Some(g) = &step_fn {
                    func = func.mul(g, fq);
                }
                let (s, h) = self.miller_step(&acc, &step_pt);
                acc = s;
                func = func.mul(&h, fq);
            }
        }
        debug_assert_eq!(acc, Point::O);
        let got = self.divisor_of(&func)?;
        if got != *d {
            return Err(Error::Internal("constructed function has the wrong divisor".into()));
        }
        Ok(func)
    }

    /// Sum of the point classes of a family of places, and its total degree.
    fn class_sum(&self, places: &[CurvePlace]) -> (Point, u32) {
        places.iter().fold((Point::O, 0), |(s, d), p| {
            (self.add(&s, &self.point_of_place(p)), d + p.degree)
        })
    }

    fn all_places_above_poly(&self, g: &Poly) -> Result<Vec<CurvePlace>> {
        let (_, fs) = g.factor(&self.fq)?;
        Ok(fs.into_iter().flat_map(|(m, _)| self.places_above(&P1Place::Finite(m))).collect())
    }

    fn primary_unit_inert(&self, m: &Poly) -> CurveElem {
        let fq = &self.fq;
        let rf = ResidueField::quadratic(m.clone(), &self.f, fq);
        let d = m.deg() as usize;
        for deg in 0..d {
            for a in Poly::monics(fq, deg) {
                for c in fq.elements().filter(|&c| c != 0) {
                    let a = a.scale(c, fq);
                    let r = Res { a: a.clone(), b: Poly::one() };
                    if rf.quad_char(&r, fq) == -1 {
                        return self.line(&a, &Poly::one()).expect("nonzero");
                    }
                }
            }
        }
        let r = Res { a: Poly::zero(), b: Poly::one() };
        assert_eq!(rf.quad_char(&r, fq), -1, "some a + y is a non-square");
        CurveElem::y()
    }
}

struct CurveEval<'a> {
    e: &'a EllipticCurve,
}

impl Eval for CurveEval<'_> {
    type Val = Option<CurveElem>;

    fn int(&self, n: i64) -> Result<Self::Val> {
        Ok(P1Eval { f: &self.e.fq }.int(n)?.map(CurveElem::from_base))
    }
    fn var(&self, v: char) -> Result<Self::Val> {
        if v == 'y' {
            return Ok(Some(CurveElem::y()));
        }
        Ok(P1Eval { f: &self.e.fq }.var(v)?.map(CurveElem::from_base))
    }
    fn add(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val> {
        let (a, b) = match (a, b) {
            (None, x) | (x, None) => return Ok(x),
            (Some(a), Some(b)) => (a, b),
        };
        let fq = &self.e.fq;
        let (a1, b1, d1) = self.e.to_triple(&a);
        let (a2, b2, d2) = self.e.to_triple(&b);
        let na = a1.mul(&d2, fq).add(&a2.mul(&d1, fq), fq);
        let nb = b1.mul(&d2, fq).add(&b2.mul(&d1, fq), fq);
        if na.is_zero() && nb.is_zero() {
            return Ok(None);
        }
        Ok(Some(self.e.from_triple(&na, &nb, &d1.mul(&d2, fq))?))
    }
    fn neg(&self, a: Self::Val) -> Result<Self::Val> {
        let m1 = CurveElem::from_base(RatFn::constant(self.e.fq.neg(1)));
        Ok(a.map(|x| x.mul(&m1, &self.e.fq)))
    }
    fn mul(&self, a: Self::Val, b: Self::Val) -> Result<Self::Val> {
        Ok(match (a, b) {
            (Some(a), Some(b)) => Some(a.mul(&b, &self.e.fq)),
            _ => None,
        })
    }
    fn inv(&self, a: Self::Val) -> Result<Self::Val> {
        match a {
            Some(x) => Ok(Some(x.pow(-1, &self.e.fq))),
            None => Err(Error::Parse("division by zero".into())),
        }
    }
}

impl Backend for EllipticCurve {
    type Place = CurvePlace;
    type Elem = CurveElem;

    fn fq(&self) -> &Fq {
        &self.fq
    }
    fn name(&self) -> &'static str {
        "elliptic"
    }
    fn place_degree(&self, p: &CurvePlace) -> u32 {
        p.degree
    }
    fn places_of_degree(&self, d: u32) -> Vec<CurvePlace> {
        let line = P1::from_fq(self.fq.clone());
        let mut v: Vec<CurvePlace> = line
            .places_of_degree(d)
            .iter()
            .flat_map(|b| self.places_above(b))
            .filter(|p| p.degree == d)
            .collect();
        if d.is_multiple_of(2) {
            v.extend(
                line.places_of_degree(d / 2)
                    .iter()
                    .flat_map(|b| self.places_above(b))
                    .filter(|p| p.degree == d),
            );
        }
        v.sort();
        v
    }
    fn pic0_two_rank(&self) -> usize {
        self.group.basis.len()
    }
    fn class_vector(&self, p: &CurvePlace) -> Vec<bool> {
        let mut v = vec![p.degree % 2 == 1];
        v.extend(self.e2_coords(&self.point_of_place(p)));
        v
    }
    fn two_divisibility_witness(&self, places: &[CurvePlace]) -> Result<CurveElem> {
        let (pt, deg) = self.class_sum(places);
        if deg % 2 == 1 || !self.two_divisible(&pt) {
            return Err(Error::NotTwoDivisible);
        }
        if places.is_empty() {
            return Ok(self.one());
        }
        let h = self.halve(&pt).expect("2-divisible");
        let half = (deg / 2) as i64;
        let mut d = Divisor::from_pairs(places.iter().map(|p| (p.clone(), 1)));
        match self.place_of_point(&h) {
            None => d.add_term(self.infinity(), -2 * half),
            Some(hp) => {
                d.add_term(hp, -2);
                d.add_term(self.infinity(), -2 * (half - 1));
            }
        }
        self.function_with_principal_divisor(&d)
    }
    fn sing_x_basis(&self) -> Vec<CurveElem> {
        let mut v = vec![self.constant(self.fq.nonsquare())];
        let keep = if self.roots.len() == 3 { 2 } else { self.roots.len() };
        for &e in &self.roots[..keep] {
            v.push(self.base_elem(&Poly::linear(e, &self.fq)));
        }
        v
    }
    fn constant(&self, c: Gf) -> CurveElem {
        CurveElem::from_base(RatFn::constant(c))
    }
    fn mul(&self, a: &CurveElem, b: &CurveElem) -> CurveElem {
        a.mul(b, &self.fq)
    }
    fn reduce(&self, a: &CurveElem) -> CurveElem {
        let line = P1::from_fq(self.fq.clone());
        CurveElem {
            base: line.reduce(&a.base),
            atoms: a
                .atoms
                .iter()
                .filter(|(_, e)| *e % 2 != 0)
                .map(|(at, _)| (at.clone(), 1))
                .collect(),
        }
    }
    fn ord(&self, a: &CurveElem, p: &CurvePlace) -> Result<i64> {
        Ok(self.elem_local(a, p).0)
    }
    fn residue_field(&self, p: &CurvePlace) -> ResidueField {
        self.residue_field_of(p)
    }
    fn local_data(&self, a: &CurveElem, p: &CurvePlace) -> Result<(i64, Res)> {
        Ok(self.elem_local(a, p))
    }
    fn divisor_of(&self, a: &CurveElem) -> Result<Divisor<CurvePlace>> {
        let mut cands: BTreeSet<CurvePlace> = BTreeSet::from([self.infinity()]);
        for g in a.base.factors.keys() {
            cands.extend(self.places_above(&P1Place::Finite(g.clone())));
        }
        for at in a.atoms.keys() {
            let norm = at.a.square(&self.fq).sub(&at.b.square(&self.fq).mul(&self.f, &self.fq), &self.fq);
            cands.extend(self.all_places_above_poly(&norm)?);
        }
        Ok(Divisor::from_pairs(cands.into_iter().map(|p| {
            let v = self.elem_local(a, &p).0;
            (p, v)
        })))
    }
    fn uniformizer(&self, p: &CurvePlace) -> CurveElem {
        match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => self.base_elem(&Poly::t()).mul(&CurveElem::y().pow(-1, &self.fq), &self.fq),
            (P1Place::Finite(_), PlaceKind::Ramified) => CurveElem::y(),
            (P1Place::Finite(m), _) => self.base_elem(m),
        }
    }
    fn primary_unit(&self, p: &CurvePlace) -> CurveElem {
        match (&p.base, &p.kind) {
            (P1Place::Infinity, _) => self.constant(self.fq.nonsquare()),
            (P1Place::Finite(m), PlaceKind::Inert) => self.primary_unit_inert(m),
            (P1Place::Finite(m), _) => {
                let u = ResidueField::simple(m.clone()).first_nonsquare(&self.fq);
                self.base_elem(&u.a)
            }
        }
    }
    fn pic_open_two_rank_direct(&self, s: &[CurvePlace]) -> Result<usize> {
        if s.is_empty() {
            return Err(Error::InvalidInput("S must be nonempty".into()));
        }
        // Pic(X∖S) = (ℤ ⊕ E)/⟨(deg p, [p])⟩; the relations contain (g·|E|, O), g = gcd deg,
        // so the quotient is computed inside the finite group ℤ/M ⊕ E with M = g·|E|.
        let n = self.order();
        let g = s.iter().fold(0u64, |g, p| gcd(g, p.degree as u64)) as usize;
        let m = g * n;
        let enc = |k: usize, i: usize| k * n + i;
        let add = |x: usize, y: usize| {
            let (k1, i1) = (x / n, x % n);
            let (k2, i2) = (y / n, y % n);
            enc((k1 + k2) % m, self.group.add[i1][i2])
        };
        let gens: Vec<usize> = s
            .iter()
            .map(|p| enc(p.degree as usize % m, self.group.index[&self.point_of_place(p)]))
            .collect();
        let zero = enc(0, 0);
        let mut sub: BTreeSet<usize> = BTreeSet::from([zero]);
        let mut frontier = vec![zero];
        while let Some(x) = frontier.pop() {
            for &gen in &gens {
                let y = add(x, gen);
                if sub.insert(y) {
                    frontier.push(y);
                }
            }
        }
        // |(A/L)[2]| = #{x : 2x ∈ L} / |L|
        let halves = (0..m * n).filter(|&x| sub.contains(&add(x, x))).count();
        let tors = halves / sub.len();
        Ok(tors.trailing_zeros() as usize)
    }
    fn parse_place(&self, s: &str) -> Result<CurvePlace> {
        let t = s.trim();
        let inner = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(t);
        let parts: Vec<&str> = inner.split(';').map(str::trim).collect();
        let line = P1::from_fq(self.fq.clone());
        let base = line.parse_place(parts[0])?;
        let above = self.places_above(&base);
        let pick = |want: &str| -> Result<CurvePlace> {
            above
                .iter()
                .find(|p| match (&p.kind, want) {
                    (PlaceKind::Ramified, "ramified" | "ram") => true,
                    (PlaceKind::Inert, "inert") => true,
                    (PlaceKind::Split { branch, .. }, w) => {
                        w.strip_prefix("split").is_some() && parts.get(2).is_some_and(|b| b.parse::<u8>() == Ok(*branch))
                    }
                    _ => false,
                })
                .cloned()
                .ok_or_else(|| Error::Parse(format!("no place {t:?} on this curve")))
        };
        match parts.len() {
            1 if above.len() == 1 => Ok(above[0].clone()),
            1 => Err(Error::Parse(format!("{t:?} splits; give a branch as (base; split; 0|1)"))),
            2 | 3 => pick(parts[1]),
            _ => Err(Error::Parse(format!("malformed curve place {t:?}"))),
        }
    }
    fn format_place(&self, p: &CurvePlace) -> String {
        let base = P1::from_fq(self.fq.clone()).format_place(&p.base);
        match &p.kind {
            PlaceKind::Ramified => format!("({base}; ramified)"),
            PlaceKind::Inert => format!("({base}; inert)"),
            PlaceKind::Split { branch, .. } => format!("({base}; split; {branch})"),
        }
    }
    fn parse_elem(&self, s: &str) -> Result<CurveElem> {
        let e = expr::parse(s)?;
        expr::eval(&e, &CurveEval { e: self })?
            .ok_or_else(|| Error::Parse(format!("{s:?} evaluates to zero")))
    }
    fn format_elem(&self, a: &CurveElem) -> String {
        let fq = &self.fq;
        let mut out = a.base.format(fq);
        for (at, e) in &a.atoms {
            let yb = if at.b.is_one() { "y".to_string() } else { format!("({})*y", at.b.format(fq, "t")) };
            let body = if at.a.is_zero() { yb } else { format!("{}+{}", at.a.format(fq, "t"), yb) };
            out.push_str(&format!(" * ({body})^{e}"));
        }
        out
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
