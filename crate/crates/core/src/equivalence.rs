//! Finite certificates for self-equivalences: pre-equivalences and small equivalences,
//! their verifiers, wild points, tame extension, composition, and the constructive
//! extension of a pre-equivalence to a small equivalence.

use std::fmt;

use crate::algebra::f2::{independent_subset, rank_of, BitMatrix};
use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::local_symbols::{hilbert_symbol, local_square_class, token_bits, LocalMap, Token};
use crate::spaces::{delta_space, g_rank, in_sing, sing_rank_formula, sing_space};

/// The data shared by pre-equivalences and small equivalences: a place map `s[i] ↦ t[i]`,
/// a quotient (or full) map `basis[k] ↦ images[k]`, and local maps at each `s[i]`.
#[derive(Debug, PartialEq)]
pub struct Equivalence<B: Backend> {
    pub s: Vec<B::Place>,
    pub t: Vec<B::Place>,
    pub basis: Vec<B::Elem>,
    pub images: Vec<B::Elem>,
    pub local_maps: Vec<LocalMap>,
}

impl<B: Backend> Clone for Equivalence<B> {
    fn clone(&self) -> Self {
        Equivalence {
            s: self.s.clone(),
            t: self.t.clone(),
            basis: self.basis.clone(),
            images: self.images.clone(),
            local_maps: self.local_maps.clone(),
        }
    }
}

/// Basis representatives span Sing(X∖S)/Δ(X∖S).
pub type PreEquivalence<B> = Equivalence<B>;
/// rk Pic(X∖S) = 0 and the basis spans Sing(X∖S).
pub type SmallEquivalence<B> = Equivalence<B>;

impl<B: Backend> Equivalence<B> {
    pub fn position(&self, p: &B::Place) -> Option<usize> {
        self.s.iter().position(|x| x == p)
    }

    pub fn image_of(&self, p: &B::Place) -> Option<&B::Place> {
        self.position(p).map(|i| &self.t[i])
    }

    pub fn preimage_of(&self, p: &B::Place) -> Option<&B::Place> {
        self.t.iter().position(|x| x == p).map(|i| &self.s[i])
    }

    pub fn local_map_at(&self, p: &B::Place) -> Option<LocalMap> {
        self.position(p).map(|i| self.local_maps[i])
    }

    pub fn inverse(&self) -> Result<Equivalence<B>> {
        let maps = self
            .local_maps
            .iter()
            .map(|m| m.inverse().ok_or_else(|| Error::Verification("local map is not invertible".into())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Equivalence {
            s: self.t.clone(),
            t: self.s.clone(),
            basis: self.images.clone(),
            images: self.basis.clone(),
            local_maps: maps,
        })
    }

    /// The places where the local map sends the even class u to an odd class. Meaningful
    /// for verified small equivalences; see [`wild_points`].
    pub fn wild_places(&self) -> Vec<B::Place> {
        self.s.iter().zip(&self.local_maps).filter(|(_, m)| m.is_wild()).map(|(p, _)| p.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Named pass/fail results.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{mark}  {}", c.name)?;
            } else {
                writeln!(f, "{mark}  {}: {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}

fn distinct<T: PartialEq>(xs: &[T]) -> bool {
    xs.iter().enumerate().all(|(i, x)| !xs[..i].contains(x))
}

fn token_rank<B: Backend>(b: &B, xs: &[B::Elem], places: &[B::Place]) -> Result<usize> {
    let rows: Vec<Vec<bool>> = xs.iter().map(|x| token_bits(b, x, places)).collect::<Result<_>>()?;
    Ok(if rows.is_empty() { 0 } else { rank_of(&rows, 2 * places.len()) })
}

fn shape_ok<B: Backend>(e: &Equivalence<B>, r: &mut Report) -> bool {
    let ok = e.s.len() == e.t.len()
        && e.s.len() == e.local_maps.len()
        && e.basis.len() == e.images.len()
        && !e.s.is_empty();
    r.push(
        "shape",
        ok,
        format!(
            "|S|={} |T|={} maps={} basis={} images={}",
            e.s.len(),
            e.t.len(),
            e.local_maps.len(),
            e.basis.len(),
            e.images.len()
        ),
    );
    ok
}

/// Checks (1) injectivity, (2) the basis and image families, (3) isomorphic local maps,
/// (4) commutation of the local diagram on every basis element. `small` switches between the
/// quotient reading and the full Sing(X∖S) reading.
fn verify_common<B: Backend>(b: &B, e: &Equivalence<B>, small: bool) -> Result<Report> {
    let tag = if small { "SE" } else { "PE" };
    let mut r = Report::default();
    if !shape_ok(e, &mut r) {
        return Ok(r);
    }
    r.push(&format!("{tag}1 injective place map"), distinct(&e.s) && distinct(&e.t), "");

    if small {
        let need = 1 + b.pic0_two_rank();
        let (gs, gt) = (g_rank(b, &e.s).rank, g_rank(b, &e.t).rank);
        r.push(
            "domain rk Pic(X∖S) = 0",
            gs == need && gt == need,
            format!("rk G_S = {gs}, rk G_TS = {gt}, needed {need}"),
        );
    }

    // (2): the families are bases of the stated spaces.
    let expected = if small { sing_rank_formula(b, &e.s) } else { e.s.len() };
    let expected_t = if small { sing_rank_formula(b, &e.t) } else { e.t.len() };
    let mut members = true;
    for x in &e.basis {
        members &= in_sing(b, x, &e.s)?;
    }
    for x in &e.images {
        members &= in_sing(b, x, &e.t)?;
    }
    let rb = token_rank(b, &e.basis, &e.s)?;
    let ri = token_rank(b, &e.images, &e.t)?;
    let basis_ok = members && rb == e.basis.len() && ri == e.images.len() && e.basis.len() == expected && expected == expected_t;
    r.push(
        &format!("{tag}2 isomorphism of bases"),
        basis_ok,
        format!("members={members} token ranks {rb}/{ri}, size {} expected {expected}", e.basis.len()),
    );

    // The diagonal map on Sing(X∖S) (resp. its quotient) is injective: its kernel Δ(X∖S)
    // is trivial in the small case and is exactly what the quotient divides out otherwise.
    let sing = sing_space(b, &e.s)?;
    let delta = delta_space(b, &e.s)?;
    let i_rank = token_rank(b, &sing.gens, &e.s)?;
    let injective = if small {
        delta.rank() == 0 && i_rank == sing.rank()
    } else {
        sing.rank() - delta.rank() == e.s.len() && i_rank == e.s.len()
    };
    r.push(
        "diagonal map injective",
        injective,
        format!("rk Sing {} rk Δ {} image rank {i_rank}", sing.rank(), delta.rank()),
    );

    let isos = e.local_maps.iter().all(|m| m.is_isomorphism());
    r.push(&format!("{tag}3 local maps are isomorphisms"), isos, "");

    let mut commutes = true;
    let mut detail = String::new();
    for (k, (x, y)) in e.basis.iter().zip(&e.images).enumerate() {
        for i in 0..e.s.len() {
            let lhs = e.local_maps[i].apply(local_square_class(b, x, &e.s[i])?);
            let rhs = local_square_class(b, y, &e.t[i])?;
            if lhs != rhs {
                commutes = false;
                if detail.is_empty() {
                    detail = format!(
                        "basis {k} at {}: t_p gives {lhs}, image has {rhs}",
                        b.format_place(&e.s[i])
                    );
                }
            }
        }
    }
    r.push(&format!("{tag}4 local diagram commutes"), commutes, detail);
    Ok(r)
}

pub fn verify_pre_equivalence<B: Backend>(b: &B, pe: &PreEquivalence<B>) -> Result<Report> {
    verify_common(b, pe, false)
}

/// SE1–SE4 plus Hilbert-symbol preservation on basis pairs and the class of −1.
pub fn verify_small_equivalence<B: Backend>(b: &B, se: &SmallEquivalence<B>) -> Result<Report> {
    let mut r = verify_common(b, se, true)?;
    if r.get("shape").is_none_or(|c| !c.passed) {
        return Ok(r);
    }
    let mut symbols = true;
    let mut detail = String::new();
    'outer: for i in 0..se.basis.len() {
        for j in i..se.basis.len() {
            for (p, tp) in se.s.iter().zip(&se.t) {
                let a = hilbert_symbol(b, &se.basis[i], &se.basis[j], p)?;
                let c = hilbert_symbol(b, &se.images[i], &se.images[j], tp)?;
                if a != c {
                    symbols = false;
                    detail = format!("basis pair ({i},{j}) at {}: {a} vs {c}", b.format_place(p));
                    break 'outer;
                }
            }
        }
    }
    r.push("Hilbert symbols preserved", symbols, detail);

    let m1 = b.minus_one();
    let mut minus = true;
    for ((p, tp), m) in se.s.iter().zip(&se.t).zip(&se.local_maps) {
        minus &= m.apply(local_square_class(b, &m1, p)?) == local_square_class(b, &m1, tp)?;
    }
    r.push("class of -1 maps to class of -1", minus, "");
    Ok(r)
}

/// Wild points of a verified small equivalence.
pub fn wild_points<B: Backend>(b: &B, se: &SmallEquivalence<B>) -> Result<Vec<B::Place>> {
    let r = verify_small_equivalence(b, se)?;
    if !r.passed() {
        return Err(Error::Verification(format!("certificate does not verify:\n{r}")));
    }
    Ok(se.wild_places())
}

/// |S| ≥ 2·rk G_{X∖S}.
pub fn check_necessary_condition<B: Backend>(b: &B, s: &[B::Place]) -> bool {
    s.len() >= 2 * g_rank(b, s).rank
}

/// A verified small equivalence with its wild set.
#[derive(Debug)]
pub struct WildSetCertificate<B: Backend> {
    pub se: SmallEquivalence<B>,
    pub wild_set: Vec<B::Place>,
    pub report: Report,
}

/// Verifies `se` and records its wild set, the necessary condition and rank preservation.
pub fn certify<B: Backend>(b: &B, se: SmallEquivalence<B>) -> Result<WildSetCertificate<B>> {
    let mut report = verify_small_equivalence(b, &se)?;
    if !report.passed() {
        return Err(Error::Verification(format!("certificate does not verify:\n{report}")));
    }
    let mut wild_set = se.wild_places();
    wild_set.sort();
    let k = g_rank(b, &wild_set).rank;
    report.push(
        "|wild set| >= 2 rk G",
        wild_set.len() >= 2 * k,
        format!("|W| = {}, rk G = {k}", wild_set.len()),
    );
    for c in check_rank_preservation(b, &se)?.checks {
        report.checks.push(c);
    }
    if !report.passed() {
        return Err(Error::Verification(format!("certificate fails global checks:\n{report}")));
    }
    Ok(WildSetCertificate { se, wild_set, report })
}

/// Coordinates of x in `basis` read through tokens at `places` (the diagonal map is
/// injective on the spaces used here).
pub fn coords_in_basis<B: Backend>(b: &B, x: &B::Elem, basis: &[B::Elem], places: &[B::Place]) -> Result<Option<Vec<bool>>> {
    let cols: Vec<Vec<bool>> = basis.iter().map(|g| token_bits(b, g, places)).collect::<Result<_>>()?;
    let m = BitMatrix::from_cols(&cols, 2 * places.len())?;
    m.solve(&token_bits(b, x, places)?)
}

fn combine<B: Backend>(b: &B, xs: &[B::Elem], c: &[bool]) -> B::Elem {
    let picked: Vec<B::Elem> = xs.iter().zip(c).filter(|(_, &on)| on).map(|(x, _)| x.clone()).collect();
    b.reduce(&b.product(&picked))
}

/// t(Sing(X∖S)) ⊆ Sing(X∖TS), t(Δ(X∖S)) ⊆ Δ(X∖TS) and rk G_{X∖S} = rk G_{X∖TS}.
pub fn check_rank_preservation<B: Backend>(b: &B, se: &SmallEquivalence<B>) -> Result<Report> {
    let mut r = Report::default();
    let (gs, gt) = (g_rank(b, &se.s).rank, g_rank(b, &se.t).rank);
    r.push("rk G preserved", gs == gt, format!("{gs} vs {gt}"));
    let mut sing_ok = true;
    for y in &se.images {
        sing_ok &= in_sing(b, y, &se.t)?;
    }
    r.push("t(Sing) in Sing(TY)", sing_ok, "");
    let mut delta_ok = true;
    for d in delta_space(b, &se.s)?.gens {
        match coords_in_basis(b, &d, &se.basis, &se.s)? {
            None => delta_ok = false,
            Some(c) => {
                let img = combine(b, &se.images, &c);
                for tp in &se.t {
                    delta_ok &= local_square_class(b, &img, tp)?.is_one();
                }
            }
        }
    }
    r.push("t(Δ) in Δ(TY)", delta_ok, "");
    Ok(r)
}

/// The identity small equivalence on S, when rk Pic(X∖S) = 0.
pub fn identity_small<B: Backend>(b: &B, s: &[B::Place]) -> Result<SmallEquivalence<B>> {
    let gens = sing_space(b, s)?.gens;
    let se = Equivalence {
        s: s.to_vec(),
        t: s.to_vec(),
        basis: gens.clone(),
        images: gens,
        local_maps: vec![LocalMap::IDENTITY; s.len()],
    };
    let r = verify_small_equivalence(b, &se)?;
    if !r.passed() {
        return Err(Error::Refused(format!("identity on S is not a small equivalence:\n{r}")));
    }
    Ok(se)
}

/// The identity pre-equivalence on any nonempty S.
pub fn identity_pre<B: Backend>(b: &B, s: &[B::Place]) -> Result<PreEquivalence<B>> {
    let basis = crate::spaces::quotient_basis(b, s)?;
    Ok(Equivalence {
        s: s.to_vec(),
        t: s.to_vec(),
        basis: basis.clone(),
        images: basis,
        local_maps: vec![LocalMap::IDENTITY; s.len()],
    })
}

/// Solves Σ α_p [p] = [r] in Pic X/2Pic X over the places of S and returns r plus the
/// chosen places.
fn completing_places<B: Backend>(b: &B, r: &B::Place, s: &[B::Place]) -> Result<Vec<B::Place>> {
    let n = 1 + b.pic0_two_rank();
    let cols: Vec<Vec<bool>> = s.iter().map(|p| b.class_vector(p)).collect();
    let m = BitMatrix::from_cols(&cols, n)?;
    let alpha = m
        .solve(&b.class_vector(r))?
        .ok_or_else(|| Error::Internal("classes of S do not span Pic X/2Pic X".into()))?;
    let mut out = vec![r.clone()];
    out.extend(s.iter().zip(&alpha).filter(|(_, &a)| a).map(|(p, _)| p.clone()));
    Ok(out)
}

fn unit_bit<B: Backend>(b: &B, x: &B::Elem, p: &B::Place) -> Result<bool> {
    Ok(local_square_class(b, x, p)?.unit)
}

/// Extends a small equivalence tamely to one more place `r`, choosing the image r' (r itself
/// when possible, otherwise the first suitable place of degree ≤ `cap`).
pub fn extend_tame<B: Backend>(b: &B, se: &SmallEquivalence<B>, r: &B::Place, cap: u32) -> Result<SmallEquivalence<B>> {
    extend_tame_where(b, se, r, cap, |_| true)
}

/// [`extend_tame`] restricted to images satisfying `accept`.
pub fn extend_tame_where<B: Backend>(
    b: &B,
    se: &SmallEquivalence<B>,
    r: &B::Place,
    cap: u32,
    accept: impl Fn(&B::Place) -> bool,
) -> Result<SmallEquivalence<B>> {
    if se.s.contains(r) {
        return Err(Error::InvalidInput(format!("{} already lies in S", b.format_place(r))));
    }
    let src_bits: Vec<bool> = se.basis.iter().map(|x| unit_bit(b, x, r)).collect::<Result<_>>()?;
    let xi = b.reduce(&b.two_divisibility_witness(&completing_places(b, r, &se.s)?)?);
    let xi_tok = local_square_class(b, &xi, r)?;
    let target: Vec<bool> = se
        .s
        .iter()
        .zip(&se.local_maps)
        .flat_map(|(p, m)| {
            local_square_class(b, &xi, p).map(|t| m.apply(t).bits()).unwrap_or([false, false])
        })
        .collect();
    let cols: Vec<Vec<bool>> = se.images.iter().map(|y| token_bits(b, y, &se.t)).collect::<Result<_>>()?;
    let img_matrix = BitMatrix::from_cols(&cols, 2 * se.t.len())?;

    let mut candidates: Vec<B::Place> = vec![r.clone()];
    for d in 1..=cap {
        candidates.extend(b.places_of_degree(d));
    }
    for rp in candidates {
        if se.t.contains(&rp) || !accept(&rp) {
            continue;
        }
        let mut matches = true;
        for (y, &bit) in se.images.iter().zip(&src_bits) {
            if unit_bit(b, y, &rp)? != bit {
                matches = false;
                break;
            }
        }
        if !matches {
            continue;
        }
        let xi0 = b.two_divisibility_witness(&completing_places(b, &rp, &se.t)?)?;
        let have = token_bits(b, &xi0, &se.t)?;
        let rhs: Vec<bool> = have.iter().zip(&target).map(|(a, c)| a ^ c).collect();
        let Some(x) = img_matrix.solve(&rhs)? else { continue };
        let xi_p = b.reduce(&b.mul(&xi0, &combine(b, &se.images, &x)));
        let xi_p_tok = local_square_class(b, &xi_p, &rp)?;
        let Some(map) = LocalMap::from_pairs((Token::U, Token::U), (xi_tok, xi_p_tok)) else { continue };
        let mut out = se.clone();
        out.s.push(r.clone());
        out.t.push(rp);
        out.basis.push(xi.clone());
        out.images.push(xi_p);
        out.local_maps.push(map);
        let rep = verify_small_equivalence(b, &out)?;
        if rep.passed() {
            return Ok(out);
        }
    }
    Err(Error::SearchExhausted { what: format!("tame image of {}", b.format_place(r)), cap })
}

/// Extends tamely so that some new place maps onto `target` (the preimage is `target` itself
/// when possible).
pub fn extend_tame_onto<B: Backend>(b: &B, se: &SmallEquivalence<B>, target: &B::Place, cap: u32) -> Result<SmallEquivalence<B>> {
    extend_tame(b, &se.inverse()?, target, cap)?.inverse()
}

/// Extends both certificates tamely so that T₁(S₁) equals the domain of c2 as a set.
pub fn align<B: Backend>(
    b: &B,
    c1: &SmallEquivalence<B>,
    c2: &SmallEquivalence<B>,
    cap: u32,
) -> Result<(SmallEquivalence<B>, SmallEquivalence<B>)> {
    let mut e1 = c1.clone();
    for p in &c2.s {
        if !e1.t.contains(p) {
            e1 = extend_tame_onto(b, &e1, p, cap)?;
        }
    }
    let mut e2 = c2.clone();
    for p in e1.t.clone() {
        if !e2.s.contains(&p) {
            e2 = extend_tame(b, &e2, &p, cap)?;
        }
    }
    Ok((e1, e2))
}

/// (T₂∘T₁, t₂∘t₁) after [`align`]. Refuses when a place is wild for both factors.
pub fn compose<B: Backend>(b: &B, c1: &SmallEquivalence<B>, c2: &SmallEquivalence<B>, cap: u32) -> Result<SmallEquivalence<B>> {
    let (e1, e2) = align(b, c1, c2, cap)?;
    for (p, m1) in e1.s.iter().zip(&e1.local_maps) {
        let tp = e1.image_of(p).expect("aligned");
        let m2 = e2.local_map_at(tp).expect("aligned");
        if m1.is_wild() && m2.is_wild() {
            return Err(Error::Refused(format!(
                "wild sets overlap at {} (image {})",
                b.format_place(p),
                b.format_place(tp)
            )));
        }
    }
    let mut images = Vec::with_capacity(e1.basis.len());
    for y in &e1.images {
        let c = coords_in_basis(b, y, &e2.basis, &e2.s)?
            .ok_or_else(|| Error::Internal("image outside Sing of the middle set".into()))?;
        images.push(combine(b, &e2.images, &c));
    }
    let mut t = Vec::with_capacity(e1.s.len());
    let mut maps = Vec::with_capacity(e1.s.len());
    for (p, m1) in e1.s.iter().zip(&e1.local_maps) {
        let mid = e1.image_of(p).expect("aligned");
        t.push(e2.image_of(mid).expect("aligned").clone());
        maps.push(m1.then(&e2.local_map_at(mid).expect("aligned")));
    }
    let out = Equivalence { s: e1.s.clone(), t, basis: e1.basis.clone(), images, local_maps: maps };
    let rep = verify_small_equivalence(b, &out)?;
    if !rep.passed() {
        return Err(Error::Verification(format!("composition does not verify:\n{rep}")));
    }
    Ok(out)
}

/// Greedily picks places outside `avoid` whose unit-bit vectors against `lams` are
/// independent; `types` optionally prescribes, per slot, whether −1 must be a local
/// non-square there. Returns the places in slot order.
fn pick_aux_places<B: Backend>(
    b: &B,
    lams: &[B::Elem],
    avoid: &[B::Place],
    types: Option<&[bool]>,
    cap: u32,
) -> Result<Vec<B::Place>> {
    let m = lams.len();
    let m1 = b.minus_one();
    let mut chosen: Vec<(B::Place, Vec<bool>, bool)> = Vec::new();
    let mut need: Option<(usize, usize)> = types.map(|t| {
        let ns = t.iter().filter(|&&x| x).count();
        (t.len() - ns, ns)
    });
    'scan: for d in 1..=cap {
        for q in b.places_of_degree(d) {
            if chosen.len() == m {
                break 'scan;
            }
            if avoid.contains(&q) {
                continue;
            }
            let bits: Vec<bool> = lams.iter().map(|x| unit_bit(b, x, &q)).collect::<Result<_>>()?;
            let ty = unit_bit(b, &m1, &q)?;
            if let Some((sq, ns)) = need {
                if (ty && ns == 0) || (!ty && sq == 0) {
                    continue;
                }
            }
            let mut rows: Vec<Vec<bool>> = chosen.iter().map(|c| c.1.clone()).collect();
            rows.push(bits.clone());
            if independent_subset(&rows).len() == rows.len() {
                if let Some((sq, ns)) = need.as_mut() {
                    if ty {
                        *ns -= 1;
                    } else {
                        *sq -= 1;
                    }
                }
                chosen.push((q, bits, ty));
            }
        }
    }
    if chosen.len() < m {
        return Err(Error::SearchExhausted { what: "auxiliary places separating Δ".into(), cap });
    }
    match types {
        None => Ok(chosen.into_iter().map(|c| c.0).collect()),
        Some(t) => {
            let mut pool = chosen;
            let mut out = Vec::with_capacity(m);
            for &want in t {
                let i = pool.iter().position(|c| c.2 == want).expect("quota matched");
                out.push(pool.remove(i).0);
            }
            Ok(out)
        }
    }
}

/// Re-bases `lams` so that the i-th element is a non-square at `qs[i]` and a square at every
/// other q_j.
fn dual_basis<B: Backend>(b: &B, lams: &[B::Elem], qs: &[B::Place]) -> Result<Vec<B::Elem>> {
    let m = lams.len();
    let rows: Vec<Vec<bool>> = qs
        .iter()
        .map(|q| lams.iter().map(|x| unit_bit(b, x, q)).collect::<Result<Vec<bool>>>())
        .collect::<Result<_>>()?;
    // U[j][k] = unit bit of λ_k at q_j; want coefficient rows c_i with U c_i = e_i
    let u = BitMatrix::from_rows(&rows, m)?;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let e: Vec<bool> = (0..m).map(|j| j == i).collect();
        let c = u.solve(&e)?.ok_or_else(|| Error::Internal("auxiliary places not independent".into()))?;
        out.push(combine(b, lams, &c));
    }
    Ok(out)
}

/// Multiplies each μ by the dual Δ elements needed to make it a square at every q.
fn square_at_aux<B: Backend>(b: &B, mus: &[B::Elem], duals: &[B::Elem], qs: &[B::Place]) -> Result<Vec<B::Elem>> {
    let mut out = Vec::with_capacity(mus.len());
    for mu in mus {
        let mut x = mu.clone();
        for (q, l) in qs.iter().zip(duals) {
            if unit_bit(b, &x, q)? {
                x = b.mul(&x, l);
            }
        }
        out.push(b.reduce(&x));
    }
    Ok(out)
}

/// Extends a pre-equivalence to a small equivalence by attaching auxiliary places that
/// separate a basis of Δ on both sides.
pub fn extend_pre_equivalence<B: Backend>(b: &B, pe: &PreEquivalence<B>, cap: u32) -> Result<SmallEquivalence<B>> {
    let rep = verify_pre_equivalence(b, pe)?;
    if !rep.passed() {
        return Err(Error::Verification(format!("pre-equivalence does not verify:\n{rep}")));
    }
    let (gs, gt) = (g_rank(b, &pe.s).rank, g_rank(b, &pe.t).rank);
    if gs != gt {
        return Err(Error::Refused(format!("rk G_(X∖S) = {gs} differs from rk G_(X∖TS) = {gt}")));
    }
    let lams = delta_space(b, &pe.s)?.gens;
    let lams_t = delta_space(b, &pe.t)?.gens;
    if lams.len() != lams_t.len() {
        return Err(Error::Internal("Δ ranks differ despite equal G ranks".into()));
    }
    let m1 = b.minus_one();
    let qs = pick_aux_places(b, &lams, &pe.s, None, cap)?;
    let types: Vec<bool> = qs.iter().map(|q| unit_bit(b, &m1, q)).collect::<Result<_>>()?;
    let qts = pick_aux_places(b, &lams_t, &pe.t, Some(&types), cap)?;
    let duals = dual_basis(b, &lams, &qs)?;
    let duals_t = dual_basis(b, &lams_t, &qts)?;
    let mus = square_at_aux(b, &pe.basis, &duals, &qs)?;
    let mus_t = square_at_aux(b, &pe.images, &duals_t, &qts)?;

    let mut se = pe.clone();
    se.s.extend(qs.iter().cloned());
    se.t.extend(qts.iter().cloned());
    se.basis = duals.into_iter().chain(mus).collect();
    se.images = duals_t.into_iter().chain(mus_t).collect();
    se.local_maps.extend(std::iter::repeat_n(LocalMap::IDENTITY, qs.len()));
    let rep = verify_small_equivalence(b, &se)?;
    if !rep.passed() {
        return Err(Error::Verification(format!("extension does not verify:\n{rep}")));
    }
    Ok(se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::p1::{P1Place, P1};

    fn f5() -> P1 {
        P1::new(5).unwrap()
    }

    fn places(k: &P1, names: &[&str]) -> Vec<P1Place> {
        names.iter().map(|n| k.parse_place(n).unwrap()).collect()
    }

    fn swap() -> LocalMap {
        LocalMap { image_of_u: Token::PI, image_of_pi: Token::U }
    }

    // λ = 2 and μ = t(t−1) have classes u and π at both (t) and (t−1); swapping them is
    // the two-point example with both places wild.
    fn case2(k: &P1) -> Equivalence<P1> {
        let lam = k.constant(2);
        let mu = k.parse_elem("t*(t-1)").unwrap();
        Equivalence {
            s: places(k, &["t", "t-1"]),
            t: places(k, &["t", "t-1"]),
            basis: vec![lam.clone(), mu.clone()],
            images: vec![mu, lam],
            local_maps: vec![swap(), swap()],
        }
    }

    fn singleton(k: &P1, p: &str) -> Equivalence<P1> {
        let s = places(k, &[p]);
        let basis = crate::spaces::quotient_basis(k, &s).unwrap();
        Equivalence {
            s: s.clone(),
            t: s,
            basis: basis.clone(),
            images: basis,
            local_maps: vec![LocalMap { image_of_u: Token::UPI, image_of_pi: Token::PI }],
        }
    }

    #[test]
    fn case2_local_classes() {
        let k = f5();
        let c = case2(&k);
        for p in &c.s {
            let got: Vec<Token> = c.basis.iter().map(|x| local_square_class(&k, x, p).unwrap()).collect();
            assert_eq!(got, vec![Token::U, Token::PI]);
        }
    }

    #[test]
    fn case2_pre_and_small() {
        let k = f5();
        let c = case2(&k);
        let r = verify_pre_equivalence(&k, &c).unwrap();
        assert!(r.passed(), "{r}");
        let r = verify_small_equivalence(&k, &c).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(hilbert_symbol(&k, &c.basis[0], &c.basis[1], &c.s[0]).unwrap(), -1);
        assert_eq!(wild_points(&k, &c).unwrap(), c.s);
        let ext = extend_pre_equivalence(&k, &c, 6).unwrap();
        assert_eq!(ext.s, c.s);
        let cert = certify(&k, ext).unwrap();
        assert_eq!(cert.wild_set.len(), 2);
    }

    #[test]
    fn corrupted_case2_fails_pe4() {
        let k = f5();
        let mut c = case2(&k);
        c.local_maps[0] = LocalMap::IDENTITY;
        let r = verify_pre_equivalence(&k, &c).unwrap();
        assert!(!r.get("PE4 local diagram commutes").unwrap().passed);
        assert!(wild_points(&k, &c).is_err());
    }

    #[test]
    fn non_homomorphic_local_map_fails() {
        let k = f5();
        let mut c = case2(&k);
        c.local_maps[1] = LocalMap { image_of_u: Token::PI, image_of_pi: Token::PI };
        let r = verify_small_equivalence(&k, &c).unwrap();
        assert!(!r.get("SE3 local maps are isomorphisms").unwrap().passed);
    }

    #[test]
    fn identities() {
        let k = f5();
        let id = identity_small(&k, &places(&k, &["t"])).unwrap();
        assert!(wild_points(&k, &id).unwrap().is_empty());
        assert!(check_rank_preservation(&k, &id).unwrap().passed());
        let pe = identity_pre(&k, &places(&k, &["t", "t^2+2"])).unwrap();
        assert!(verify_pre_equivalence(&k, &pe).unwrap().passed());
        let se = extend_pre_equivalence(&k, &pe, 6).unwrap();
        assert!(certify(&k, se).unwrap().wild_set.is_empty());
        // rk Pic(P¹∖{(t²+2)}) = 1
        assert!(identity_small(&k, &places(&k, &["t^2+2"])).is_err());
    }

    #[test]
    fn singleton_extension_finds_degree_one_place() {
        let k = f5();
        let pe = singleton(&k, "t^2+2");
        assert!(verify_pre_equivalence(&k, &pe).unwrap().passed());
        assert_eq!(delta_space(&k, &pe.s).unwrap().gens, vec![k.constant(2)]);
        let se = extend_pre_equivalence(&k, &pe, 6).unwrap();
        assert_eq!(se.s, places(&k, &["t^2+2", "t"]));
        assert_eq!(wild_points(&k, &se).unwrap(), places(&k, &["t^2+2"]));
    }

    #[test]
    fn mismatched_g_ranks_refused() {
        let k = f5();
        let mut pe = singleton(&k, "t^2+2");
        pe.t = places(&k, &["t"]);
        pe.images = crate::spaces::quotient_basis(&k, &pe.t).unwrap();
        assert!(extend_pre_equivalence(&k, &pe, 6).is_err());
    }

    #[test]
    fn necessary_condition_examples() {
        let k = f5();
        assert!(!check_necessary_condition(&k, &places(&k, &["t"])));
        assert!(check_necessary_condition(&k, &places(&k, &["t", "t-1"])));
        assert!(check_necessary_condition(&k, &places(&k, &["t^2+2"])));
    }

    #[test]
    fn tame_extension_and_inverse() {
        let k = f5();
        let se = extend_pre_equivalence(&k, &singleton(&k, "t^2+2"), 6).unwrap();
        let r = k.parse_place("t-2").unwrap();
        let ext = extend_tame(&k, &se, &r, 6).unwrap();
        assert_eq!(ext.image_of(&r), Some(&r));
        assert_eq!(ext.wild_places(), se.wild_places());
        let inv = ext.inverse().unwrap();
        assert!(verify_small_equivalence(&k, &inv).unwrap().passed());
        assert!(extend_tame(&k, &se, &se.s[0], 6).is_err());
    }

    #[test]
    fn composition_of_disjoint_singletons() {
        let k = f5();
        let a = extend_pre_equivalence(&k, &singleton(&k, "t^2+2"), 6).unwrap();
        let b = extend_pre_equivalence(&k, &singleton(&k, "t^2+t+1"), 6).unwrap();
        let c = compose(&k, &a, &b, 6).unwrap();
        let mut w = c.wild_places();
        w.sort();
        assert_eq!(w, places(&k, &["t^2+2", "t^2+t+1"]));
        assert!(check_rank_preservation(&k, &c).unwrap().passed());

        let id = identity_small(&k, &places(&k, &["t"])).unwrap();
        assert_eq!(compose(&k, &a, &id, 6).unwrap().wild_places(), a.wild_places());
        assert!(matches!(compose(&k, &a, &a, 6), Err(Error::Refused(_))));
    }

    fn sorted(mut v: Vec<P1Place>) -> Vec<P1Place> {
        v.sort();
        v
    }

    // wild(c2∘c1) = wild(c1) ∪ T₁⁻¹(wild(c2)) on the aligned factors
    fn union_formula(k: &P1, c1: &Equivalence<P1>, c2: &Equivalence<P1>) -> Equivalence<P1> {
        let c = compose(k, c1, c2, 6).unwrap();
        let (e1, e2) = align(k, c1, c2, 6).unwrap();
        assert_eq!(e1.wild_places(), c1.wild_places());
        let w2 = e2.wild_places();
        let mut expect = e1.wild_places();
        expect.extend(e1.s.iter().filter(|p| w2.contains(e1.image_of(p).unwrap())).cloned());
        assert_eq!(sorted(c.wild_places()), sorted(expect));
        c
    }

    #[test]
    fn composition_groupings_agree_on_wild_sets() {
        let k = f5();
        let a = extend_pre_equivalence(&k, &singleton(&k, "t^2+2"), 6).unwrap();
        let b = extend_pre_equivalence(&k, &singleton(&k, "t^2+t+1"), 6).unwrap();
        let c = extend_pre_equivalence(&k, &singleton(&k, "t^2+3"), 6).unwrap();
        let ab = union_formula(&k, &a, &b);
        let l = union_formula(&k, &ab, &c);
        let bc = union_formula(&k, &b, &c);
        let r = union_formula(&k, &a, &bc);
        assert_eq!(l.wild_places().len(), 3);
        assert_eq!(r.wild_places().len(), 3);
        for x in [&l, &r] {
            assert!(certify(&k, x.clone()).is_ok());
        }
    }

    #[test]
    fn rank_preservation_negative_control() {
        let k = f5();
        let mut c = case2(&k);
        // t has odd order at infinity, outside S
        c.images[0] = k.parse_elem("t").unwrap();
        let r = check_rank_preservation(&k, &c).unwrap();
        assert!(!r.get("t(Sing) in Sing(TY)").unwrap().passed);
    }
}
