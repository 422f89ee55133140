//! Wild sets built from the existence results: rank 0, the two- and three-point rank-1
//! lemmas, rank 1 by induction, and the higher-rank sufficient condition. Every result
//! goes through a pre-equivalence or a composition and is verified before it is returned.

use crate::backend::Backend;
use crate::equivalence::{
    certify, compose, extend_pre_equivalence, extend_tame_where, Check, Equivalence, PreEquivalence,
    SmallEquivalence, WildSetCertificate,
};
use crate::error::{Error, Result};
use crate::local_symbols::{is_local_square, local_square_class, LocalMap, Token};
use crate::spaces::{g_rank, smile};

/// Search settings and the notes gathered along the way.
pub struct Builder<'a, B: Backend> {
    pub b: &'a B,
    pub cap: u32,
    pub notes: Vec<Check>,
}

fn is_two_divisible<B: Backend>(b: &B, p: &B::Place) -> bool {
    b.class_vector(p).iter().all(|&x| !x)
}

fn distinct<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x))
}

fn refuse(msg: String) -> Error {
    Error::Refused(msg)
}

/// A local map from (source token, target token) pairs; the first two independent sources
/// determine it, the remaining pairs are left for the verifier.
fn map_from_pairs(pairs: &[(Token, Token)]) -> Option<LocalMap> {
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if let Some(m) = LocalMap::from_pairs(pairs[i], pairs[j]) {
                return Some(m);
            }
        }
    }
    None
}

impl<'a, B: Backend> Builder<'a, B> {
    pub fn new(b: &'a B, cap: u32) -> Self {
        Builder { b, cap, notes: Vec::new() }
    }

    fn names(&self, s: &[B::Place]) -> String {
        s.iter().map(|p| self.b.format_place(p)).collect::<Vec<_>>().join(", ")
    }

    fn require_minus_one_square(&self, s: &[B::Place]) -> Result<()> {
        let m1 = self.b.minus_one();
        for p in s {
            if !is_local_square(self.b, &m1, p)? {
                return Err(refuse(format!("-1 is not a local square at {}", self.b.format_place(p))));
            }
        }
        Ok(())
    }

    fn require_distinct(&self, s: &[B::Place]) -> Result<()> {
        if s.is_empty() || !distinct(s) {
            return Err(Error::InvalidInput(format!("places must be distinct and nonempty: [{}]", self.names(s))));
        }
        Ok(())
    }

    fn element_nonsquare_at(&self, p: &B::Place) -> Result<B::Elem> {
        for x in self.b.sing_x_basis() {
            if !is_local_square(self.b, &x, p)? {
                return Ok(x);
            }
        }
        Err(Error::Internal(format!("no element of Sing(X) is a non-square at {}", self.b.format_place(p))))
    }

    /// Builds local maps at every place from the basis and image tokens; `extra` supplies
    /// a pair for places where the basis tokens span only a line.
    fn derive_maps(&self, pe: &mut PreEquivalence<B>, extra: &[Option<(Token, Token)>]) -> Result<()> {
        pe.local_maps.clear();
        for i in 0..pe.s.len() {
            let mut pairs = Vec::new();
            for (x, y) in pe.basis.iter().zip(&pe.images) {
                pairs.push((local_square_class(self.b, x, &pe.s[i])?, local_square_class(self.b, y, &pe.t[i])?));
            }
            if let Some(Some(e)) = extra.get(i) {
                pairs.push(*e);
            }
            let m = map_from_pairs(&pairs).ok_or_else(|| {
                Error::Internal(format!("basis tokens do not determine the local map at {}", self.b.format_place(&pe.s[i])))
            })?;
            pe.local_maps.push(m);
        }
        Ok(())
    }

    fn finish(&mut self, pe: &PreEquivalence<B>) -> Result<SmallEquivalence<B>> {
        extend_pre_equivalence(self.b, pe, self.cap)
    }

    /// Fails unless the wild set is exactly `want`.
    fn expect_wild(&self, se: &SmallEquivalence<B>, want: &[B::Place]) -> Result<()> {
        let w = se.wild_places();
        let same = w.len() == want.len() && want.iter().all(|p| w.contains(p));
        if !same {
            return Err(Error::Verification(format!(
                "wild set [{}] differs from the requested [{}]",
                self.names(&w),
                self.names(want)
            )));
        }
        Ok(())
    }

    /// Extends `c1` tamely at the `wanted` places (images accepted by `accept`), builds a
    /// second certificate on their images and composes, so that the new wild points are
    /// exactly `wanted`.
    fn compose_onto(
        &mut self,
        c1: SmallEquivalence<B>,
        wanted: &[B::Place],
        accept: impl Fn(&B::Place) -> bool,
        build: impl FnOnce(&mut Self, &[B::Place]) -> Result<SmallEquivalence<B>>,
    ) -> Result<SmallEquivalence<B>> {
        let mut c1 = c1;
        for p in wanted {
            if c1.position(p).is_none() {
                c1 = extend_tame_where(self.b, &c1, p, self.cap, &accept)?;
            }
        }
        let images: Vec<B::Place> = wanted.iter().map(|p| c1.image_of(p).expect("extended").clone()).collect();
        let c2 = build(self, &images)?;
        compose(self.b, &c1, &c2, self.cap)
    }

    /// A single 2-divisible place as the only wild point: λ with div λ = q + 2D, its class
    /// fixed and u sent to u times that class.
    pub fn singleton(&mut self, q: &B::Place) -> Result<SmallEquivalence<B>> {
        if !is_two_divisible(self.b, q) {
            return Err(refuse(format!("[{}] is not 2-divisible in Pic X", self.b.format_place(q))));
        }
        let lam = self.b.reduce(&self.b.two_divisibility_witness(std::slice::from_ref(q))?);
        let tok = local_square_class(self.b, &lam, q)?;
        let map = LocalMap::from_pairs((Token::U, Token::U.mul(tok)), (tok, tok))
            .ok_or_else(|| Error::Internal("witness has even order".into()))?;
        let pe = Equivalence {
            s: vec![q.clone()],
            t: vec![q.clone()],
            basis: vec![lam.clone()],
            images: vec![lam],
            local_maps: vec![map],
        };
        let se = self.finish(&pe)?;
        self.expect_wild(&se, std::slice::from_ref(q))?;
        Ok(se)
    }

    pub fn rank0(&mut self, s: &[B::Place]) -> Result<SmallEquivalence<B>> {
        self.require_distinct(s)?;
        for p in s {
            if !is_two_divisible(self.b, p) {
                return Err(refuse(format!("[{}] is not 2-divisible in Pic X", self.b.format_place(p))));
            }
        }
        let mut acc = self.singleton(&s[0])?;
        for q in &s[1..] {
            let b = self.b;
            acc = self.compose_onto(acc, std::slice::from_ref(q), |r| is_two_divisible(b, r), |me, img| me.singleton(&img[0]))?;
        }
        self.expect_wild(&acc, s)?;
        Ok(acc)
    }

    pub fn rank1_pair(&mut self, p: &B::Place, q: &B::Place) -> Result<SmallEquivalence<B>> {
        let s = [p.clone(), q.clone()];
        self.require_distinct(&s)?;
        let k = g_rank(self.b, &s).rank;
        if k != 1 {
            return Err(refuse(format!("rk G over [{}] is {k}, the two-point lemma needs 1", self.names(&s))));
        }
        self.require_minus_one_square(&s)?;
        let (dp, dq) = (is_two_divisible(self.b, p), is_two_divisible(self.b, q));
        let se = if dp != dq {
            // one class 2-divisible: T swaps the two places
            let (np, dv) = if dq { (p, q) } else { (q, p) };
            let lam = self.element_nonsquare_at(np)?;
            let mut mu = self.b.two_divisibility_witness(std::slice::from_ref(dv))?;
            if !is_local_square(self.b, &mu, np)? {
                mu = self.b.mul(&mu, &lam);
            }
            let mu = self.b.reduce(&mu);
            let mut pe = Equivalence {
                s: vec![np.clone(), dv.clone()],
                t: vec![dv.clone(), np.clone()],
                basis: vec![lam.clone(), mu.clone()],
                images: vec![mu, lam],
                local_maps: vec![],
            };
            // π at the non-divisible place goes to u at the divisible one, and back
            self.derive_maps(&mut pe, &[Some((Token::PI, Token::U)), Some((Token::U, Token::PI))])?;
            self.finish(&pe)?
        } else {
            let lam = self.element_nonsquare_at(p)?;
            let mu = self.b.reduce(&self.b.two_divisibility_witness(&s)?);
            let mut pe = Equivalence {
                s: s.to_vec(),
                t: s.to_vec(),
                basis: vec![lam.clone(), mu.clone()],
                images: vec![mu, lam],
                local_maps: vec![],
            };
            self.derive_maps(&mut pe, &[])?;
            self.finish(&pe)?
        };
        self.expect_wild(&se, &s)?;
        Ok(se)
    }

    /// rk G ≤ 1 with −1 a local square everywhere on S; |S| = 1 is only possible at rank 0.
    fn rank_le1(&mut self, s: &[B::Place]) -> Result<SmallEquivalence<B>> {
        match g_rank(self.b, s).rank {
            0 => self.rank0(s),
            1 => self.rank1(s),
            k => Err(Error::Internal(format!("image set [{}] has rk G = {k}", self.names(s)))),
        }
    }

    pub fn rank1_triple(&mut self, p1: &B::Place, p2: &B::Place, p3: &B::Place) -> Result<SmallEquivalence<B>> {
        let s = [p1.clone(), p2.clone(), p3.clone()];
        self.require_distinct(&s)?;
        let k = g_rank(self.b, &s).rank;
        if k != 1 {
            return Err(refuse(format!("rk G over [{}] is {k}, the three-point lemma needs 1", self.names(&s))));
        }
        self.require_minus_one_square(&s)?;

        if let Some(i) = s.iter().position(|p| is_two_divisible(self.b, p)) {
            let rest: Vec<B::Place> = s.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
            let c1 = self.singleton(&s[i])?;
            let se = self.compose_onto(c1, &rest, |_| true, |me, img| me.rank_le1(img))?;
            self.expect_wild(&se, &s)?;
            return Ok(se);
        }

        let b = self.b;
        let l12 = b.two_divisibility_witness(&[p1.clone(), p2.clone()])?;
        let l13 = b.two_divisibility_witness(&[p1.clone(), p3.clone()])?;
        let mu = self.element_nonsquare_at(p1)?;
        let mut l12 = b.reduce(&l12);
        let mut l23 = b.reduce(&b.mul(&l12, &l13));
        if is_local_square(b, &l12, p3)? {
            l12 = b.reduce(&b.mul(&mu, &l12));
            l23 = b.reduce(&b.mul(&mu, &l23));
        }
        let (p4, nu) = self.auxiliary_point(&s, &mu)?;
        let t = vec![p1.clone(), p2.clone(), p4];
        let basis = vec![mu.clone(), l12.clone(), l23];
        let target = vec![mu, l12, nu];
        // columns in the target basis (μ, λ12, ν): t̂(μ) = νλ12, t̂(λ12) = μ, t̂(λ23) = μλ12
        let printed = [[false, true, true], [true, false, false], [true, true, false]];
        let (cols, maps) = self.wild_quotient_map(&s, &t, &basis, &target, printed)?;
        let images = cols
            .iter()
            .map(|c| {
                let picked: Vec<B::Elem> = target.iter().zip(c).filter(|(_, &on)| on).map(|(x, _)| x.clone()).collect();
                b.reduce(&b.product(&picked))
            })
            .collect();
        let pe = Equivalence { s: s.to_vec(), t, basis, images, local_maps: maps };
        let se = self.finish(&pe)?;
        self.expect_wild(&se, &s)?;
        Ok(se)
    }

    /// An invertible map basis → span(target), given by columns over the target, whose
    /// induced local maps commute with every basis element and are wild at every place.
    /// `preferred` is tried first; the remaining invertible matrices follow in order.
    fn wild_quotient_map(
        &mut self,
        s: &[B::Place],
        t: &[B::Place],
        basis: &[B::Elem],
        target: &[B::Elem],
        preferred: [[bool; 3]; 3],
    ) -> Result<([[bool; 3]; 3], Vec<LocalMap>)> {
        let b = self.b;
        let src: Vec<Vec<Token>> = s
            .iter()
            .map(|p| basis.iter().map(|x| local_square_class(b, x, p)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let dst: Vec<Vec<Token>> = t
            .iter()
            .map(|p| target.iter().map(|x| local_square_class(b, x, p)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let try_cols = |cols: &[[bool; 3]; 3]| -> Option<Vec<LocalMap>> {
            let det = crate::algebra::f2::rank_of(&cols.iter().map(|c| c.to_vec()).collect::<Vec<_>>(), 3);
            if det != 3 {
                return None;
            }
            let mut maps = Vec::with_capacity(s.len());
            for i in 0..s.len() {
                let pairs: Vec<(Token, Token)> = (0..3)
                    .map(|k| {
                        let img = (0..3).filter(|&j| cols[k][j]).fold(Token::ONE, |a, j| a.mul(dst[i][j]));
                        (src[i][k], img)
                    })
                    .collect();
                let m = map_from_pairs(&pairs)?;
                if !m.is_wild() || pairs.iter().any(|&(x, y)| m.apply(x) != y) {
                    return None;
                }
                maps.push(m);
            }
            Some(maps)
        };
        if let Some(maps) = try_cols(&preferred) {
            return Ok((preferred, maps));
        }
        for code in 0u32..512 {
            let cols: [[bool; 3]; 3] = std::array::from_fn(|k| std::array::from_fn(|j| code >> (3 * k + j) & 1 == 1));
            if let Some(maps) = try_cols(&cols) {
                self.notes.push(Check {
                    name: "three-point quotient map".into(),
                    passed: true,
                    detail: format!("printed images fail the local diagram; using columns {cols:?}"),
                });
                return Ok((cols, maps));
            }
        }
        Err(Error::SearchExhausted { what: "wild quotient isomorphism".into(), cap: self.cap })
    }

    /// p4 outside S and ν ∈ Sing(X∖{p4}) of odd order at p4 with ν a square at p1 and
    /// ν ≡ μ at p2, scanning places by degree and ν over the witness of p4 times Sing(X).
    fn auxiliary_point(&mut self, s: &[B::Place], mu: &B::Elem) -> Result<(B::Place, B::Elem)> {
        let b = self.b;
        let sx = b.sing_x_basis();
        let want2 = local_square_class(b, mu, &s[1])?;
        for d in 1..=self.cap {
            for p4 in b.places_of_degree(d) {
                if s.contains(&p4) || !is_two_divisible(b, &p4) {
                    continue;
                }
                let w = b.two_divisibility_witness(std::slice::from_ref(&p4))?;
                for mask in 0u32..(1 << sx.len()) {
                    let mut nu = w.clone();
                    for (j, x) in sx.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            nu = b.mul(&nu, x);
                        }
                    }
                    let nu = b.reduce(&nu);
                    if local_square_class(b, &nu, &s[0])?.is_one() && local_square_class(b, &nu, &s[1])? == want2 {
                        self.notes.push(Check {
                            name: "auxiliary point".into(),
                            passed: true,
                            detail: format!("p4 = {} (degree {d})", b.format_place(&p4)),
                        });
                        return Ok((p4, nu));
                    }
                }
            }
        }
        Err(Error::SearchExhausted { what: "auxiliary point p4".into(), cap: self.cap })
    }

    pub fn rank1(&mut self, s: &[B::Place]) -> Result<SmallEquivalence<B>> {
        self.require_distinct(s)?;
        let k = g_rank(self.b, s).rank;
        if k > 1 {
            return Err(refuse(format!("rk G over [{}] is {k}, at most 1 is needed", self.names(s))));
        }
        if s.len() < 2 * k {
            return Err(refuse(format!("|S| = {} is below 2 rk G = {}", s.len(), 2 * k)));
        }
        self.require_minus_one_square(s)?;
        if k == 0 {
            return self.rank0(s);
        }
        match s.len() {
            2 => self.rank1_pair(&s[0], &s[1]),
            3 => self.rank1_triple(&s[0], &s[1], &s[2]),
            _ => {
                // {p1, p2} may well have rank 0, in which case the rank-0 path applies to it
                let c1 = self.rank_le1(&s[..2])?;
                let se = self.compose_onto(c1, &s[2..], |_| true, |me, img| me.rank_le1(img))?;
                self.expect_wild(&se, s)?;
                Ok(se)
            }
        }
    }

    pub fn general(&mut self, p: &[B::Place], q: &[B::Place]) -> Result<SmallEquivalence<B>> {
        let (m, n) = (p.len(), q.len());
        let all: Vec<B::Place> = p.iter().chain(q).cloned().collect();
        self.require_distinct(&all)?;
        if m == 0 || m > n {
            return Err(refuse(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
        }
        let gp = g_rank(self.b, p);
        if gp.rank != m {
            return Err(refuse(format!("classes of [{}] are not independent in Pic X/2Pic X", self.names(p))));
        }
        for x in q {
            if !is_two_divisible(self.b, x) {
                return Err(refuse(format!("[{}] is not 2-divisible in Pic X", self.b.format_place(x))));
            }
            if self.b.place_degree(x) % 2 != 0 {
                return Err(Error::Internal(format!("2-divisible place {} has odd degree", self.b.format_place(x))));
            }
        }
        self.require_minus_one_square(&all)?;
        for i in 0..n {
            for j in 0..n {
                if i != j && !smile(self.b, &q[i], &q[j])? {
                    return Err(refuse(format!(
                        "{} and {} are not related by smile",
                        self.b.format_place(&q[i]),
                        self.b.format_place(&q[j])
                    )));
                }
            }
        }
        self.general_unchecked(p, q)
    }

    fn general_unchecked(&mut self, p: &[B::Place], q: &[B::Place]) -> Result<SmallEquivalence<B>> {
        let (m, n) = (p.len(), q.len());
        let all: Vec<B::Place> = p.iter().chain(q).cloned().collect();
        let se = if m == 1 {
            self.rank1(&all)?
        } else if n == m {
            let c1 = self.general_unchecked(&p[..m - 1], &q[..m - 1])?;
            let pair = [p[m - 1].clone(), q[m - 1].clone()];
            let b = self.b;
            self.compose_onto(c1, &pair, |_| true, |me, img| {
                let k = g_rank(b, img).rank;
                me.notes.push(Check {
                    name: "image pair rk G <= 1".into(),
                    passed: k <= 1,
                    detail: format!("observed {k} for [{}]", me.names(img)),
                });
                if k > 1 {
                    return Err(Error::Internal(format!("image pair has rk G = {k}")));
                }
                me.rank_le1(img)
            })?
        } else {
            let c1 = self.general_unchecked(p, &q[..m])?;
            let b = self.b;
            self.compose_onto(c1, &q[m..], |r| is_two_divisible(b, r), |me, img| me.rank0(img))?
        };
        self.expect_wild(&se, &all)?;
        Ok(se)
    }

    /// Verifies and packages a construction, attaching the notes to the report.
    pub fn certify(&mut self, se: SmallEquivalence<B>) -> Result<WildSetCertificate<B>> {
        let mut c = certify(self.b, se)?;
        c.report.checks.append(&mut self.notes);
        Ok(c)
    }
}

pub fn construct_rank0<B: Backend>(b: &B, s: &[B::Place], cap: u32) -> Result<WildSetCertificate<B>> {
    let mut k = Builder::new(b, cap);
    let se = k.rank0(s)?;
    k.certify(se)
}

pub fn construct_rank1_pair<B: Backend>(b: &B, p: &B::Place, q: &B::Place, cap: u32) -> Result<WildSetCertificate<B>> {
    let mut k = Builder::new(b, cap);
    let se = k.rank1_pair(p, q)?;
    k.certify(se)
}

pub fn construct_rank1_triple<B: Backend>(
    b: &B,
    p1: &B::Place,
    p2: &B::Place,
    p3: &B::Place,
    cap: u32,
) -> Result<WildSetCertificate<B>> {
    let mut k = Builder::new(b, cap);
    let se = k.rank1_triple(p1, p2, p3)?;
    k.certify(se)
}

pub fn construct_rank1<B: Backend>(b: &B, s: &[B::Place], cap: u32) -> Result<WildSetCertificate<B>> {
    let mut k = Builder::new(b, cap);
    let se = k.rank1(s)?;
    k.certify(se)
}

pub fn construct_general<B: Backend>(b: &B, p: &[B::Place], q: &[B::Place], cap: u32) -> Result<WildSetCertificate<B>> {
    let mut k = Builder::new(b, cap);
    let se = k.general(p, q)?;
    k.certify(se)
}
