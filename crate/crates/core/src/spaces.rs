//! The F₂-spaces Sing(Y) and Δ(Y), the subgroup G_Y of Pic X/2Pic X, the ⌣ relation, and
//! executable checks of the structural rank identities.

use crate::algebra::f2::{independent_subset, rank_of, xor, BitMatrix};
use crate::backend::{Backend, Divisor};
use crate::error::{Error, Result};
use crate::local_symbols::{is_local_square, token_bits};

/// An F₂-space of square classes of elements with even valuation off `removed`.
#[derive(Clone, Debug)]
pub struct SquareClassSpace<B: Backend> {
    pub removed: Vec<B::Place>,
    pub gens: Vec<B::Elem>,
}

impl<B: Backend> SquareClassSpace<B> {
    pub fn rank(&self) -> usize {
        self.gens.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GRank<P> {
    pub rank: usize,
    /// A maximal sub-list of S whose classes are independent in Pic X/2Pic X.
    pub independent: Vec<P>,
}

fn check_places<B: Backend>(s: &[B::Place]) -> Result<()> {
    if s.is_empty() {
        return Err(Error::InvalidInput("the removed set S must be nonempty".into()));
    }
    for (i, p) in s.iter().enumerate() {
        if s[..i].contains(p) {
            return Err(Error::InvalidInput(format!("place listed twice: {p:?}")));
        }
    }
    Ok(())
}

/// rk G_{X∖S}.
pub fn g_rank<B: Backend>(b: &B, s: &[B::Place]) -> GRank<B::Place> {
    let vecs: Vec<Vec<bool>> = s.iter().map(|p| b.class_vector(p)).collect();
    let idx = independent_subset(&vecs);
    GRank { rank: idx.len(), independent: idx.into_iter().map(|i| s[i].clone()).collect() }
}

/// Whether λ has even valuation at every place outside S.
pub fn in_sing<B: Backend>(b: &B, lam: &B::Elem, s: &[B::Place]) -> Result<bool> {
    Ok(b.divisor_of(lam)?.odd_support().iter().all(|p| s.contains(p)))
}

/// Whether [Σ n_p p] lies in 2Pic X, read off the class vectors.
pub fn divisor_two_divisible<B: Backend>(b: &B, d: &Divisor<B::Place>) -> bool {
    let n = 1 + b.pic0_two_rank();
    let sum = d.odd_support().iter().fold(vec![false; n], |acc, p| xor(&acc, &b.class_vector(p)));
    sum.iter().all(|x| !x)
}

/// Rank of a family of square classes, certified from below by local tokens at `s` and then
/// at places of increasing degree up to `cap`.
pub fn fingerprint_rank<B: Backend>(b: &B, elems: &[B::Elem], s: &[B::Place], cap: u32) -> Result<usize> {
    let n = elems.len();
    if n == 0 {
        return Ok(0);
    }
    let mut rows: Vec<Vec<bool>> = vec![Vec::new(); n];
    let extend = |places: &[B::Place], rows: &mut Vec<Vec<bool>>| -> Result<usize> {
        for (row, x) in rows.iter_mut().zip(elems) {
            row.extend(token_bits(b, x, places)?);
        }
        let width = rows[0].len();
        Ok(if width == 0 { 0 } else { rank_of(rows, width) })
    };
    let mut r = extend(s, &mut rows)?;
    let mut d = 1;
    while r < n && d <= cap {
        let fresh: Vec<B::Place> = b.places_of_degree(d).into_iter().filter(|p| !s.contains(p)).collect();
        r = extend(&fresh, &mut rows)?;
        d += 1;
    }
    Ok(r)
}

/// Sing(X∖S): a basis of Sing(X) together with witnesses λ with div λ ≡ Σ α_p p (mod 2) for a
/// basis of the relations Σ α_p [p] ∈ 2Pic X among the places of S.
pub fn sing_space<B: Backend>(b: &B, s: &[B::Place]) -> Result<SquareClassSpace<B>> {
    check_places::<B>(s)?;
    let mut gens = b.sing_x_basis();
    let n = 1 + b.pic0_two_rank();
    let cols: Vec<Vec<bool>> = s.iter().map(|p| b.class_vector(p)).collect();
    let m = BitMatrix::from_cols(&cols, n)?;
    for rel in m.kernel() {
        let places: Vec<B::Place> =
            s.iter().zip(&rel).filter(|(_, &x)| x).map(|(p, _)| p.clone()).collect();
        gens.push(b.reduce(&b.two_divisibility_witness(&places)?));
    }
    Ok(SquareClassSpace { removed: s.to_vec(), gens })
}

/// Expected rk Sing(X∖S) = |S| + rk Pic⁰X + 1 − rk G.
pub fn sing_rank_formula<B: Backend>(b: &B, s: &[B::Place]) -> usize {
    s.len() + b.pic0_two_rank() + 1 - g_rank(b, s).rank
}

/// Expected rk Δ(X∖S) = 1 + rk Pic⁰X − rk G.
pub fn delta_rank_formula<B: Backend>(b: &B, s: &[B::Place]) -> usize {
    1 + b.pic0_two_rank() - g_rank(b, s).rank
}

/// Products of generators indexed by the kernel of their token matrix at S.
fn locally_trivial_part<B: Backend>(b: &B, gens: &[B::Elem], s: &[B::Place]) -> Result<Vec<B::Elem>> {
    let cols: Vec<Vec<bool>> = gens.iter().map(|g| token_bits(b, g, s)).collect::<Result<_>>()?;
    let m = BitMatrix::from_cols(&cols, 2 * s.len())?;
    Ok(m.kernel()
        .into_iter()
        .map(|v| {
            let xs: Vec<B::Elem> =
                gens.iter().zip(&v).filter(|(_, &x)| x).map(|(g, _)| g.clone()).collect();
            b.reduce(&b.product(&xs))
        })
        .collect())
}

/// Δ(X∖S): elements of Sing(X∖S) that are local squares at every place of S.
pub fn delta_space<B: Backend>(b: &B, s: &[B::Place]) -> Result<SquareClassSpace<B>> {
    let sing = sing_space(b, s)?;
    let gens = locally_trivial_part(b, &sing.gens, s)?;
    Ok(SquareClassSpace { removed: s.to_vec(), gens })
}

/// Representatives of a basis of Sing(X∖S)/Δ(X∖S): generators with independent tokens at S.
pub fn quotient_basis<B: Backend>(b: &B, s: &[B::Place]) -> Result<Vec<B::Elem>> {
    let sing = sing_space(b, s)?;
    let vecs: Vec<Vec<bool>> = sing.gens.iter().map(|g| token_bits(b, g, s)).collect::<Result<_>>()?;
    Ok(independent_subset(&vecs).into_iter().map(|i| sing.gens[i].clone()).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinDepReport {
    pub classes_independent: bool,
    pub sing_equals_sing_x: bool,
}

impl LinDepReport {
    pub fn ok(&self) -> bool {
        self.classes_independent == self.sing_equals_sing_x
    }
}

/// The classes [p], p ∈ S, are independent ⟺ Sing(X∖S) = Sing(X).
pub fn check_lin_dep_lemma<B: Backend>(b: &B, s: &[B::Place]) -> Result<LinDepReport> {
    let independent = g_rank(b, s).rank == s.len();
    let sing = sing_space(b, s)?;
    let sing_x = b.sing_x_basis();
    // Sing(X) ⊆ Sing(X∖S) always; equality is equality of ranks.
    Ok(LinDepReport { classes_independent: independent, sing_equals_sing_x: sing.rank() == sing_x.len() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PicRankReport {
    pub formula: usize,
    pub direct: usize,
}

impl PicRankReport {
    pub fn ok(&self) -> bool {
        self.formula == self.direct
    }
}

/// rk Pic(X∖S) = 1 + rk Pic⁰X − rk G_{X∖S}, against the backend's direct computation.
pub fn check_pic_rank_formula<B: Backend>(b: &B, s: &[B::Place]) -> Result<PicRankReport> {
    check_places::<B>(s)?;
    let formula = 1 + b.pic0_two_rank() - g_rank(b, s).rank;
    let direct = b.pic_open_two_rank_direct(s)?;
    Ok(PicRankReport { formula, direct })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddDegreeReport {
    pub in_2pic_x: bool,
    pub in_2pic_open: bool,
    pub degree_even: bool,
}

impl OddDegreeReport {
    pub fn ok(&self) -> bool {
        self.in_2pic_x == (self.in_2pic_open && self.degree_even)
    }
}

/// For p of odd degree and D avoiding p: [D] ∈ 2Pic X ⟺ [D] ∈ 2Pic(X∖{p}) and deg D even.
///
/// The left side is decided by constructing a witness function; the right side works in
/// Pic X / ℤ[p] through class vectors.
pub fn check_odd_degree_transfer<B: Backend>(b: &B, p: &B::Place, d: &Divisor<B::Place>) -> Result<OddDegreeReport> {
    if b.place_degree(p) % 2 == 0 {
        return Err(Error::InvalidInput("p must have odd degree".into()));
    }
    if d.coeff(p) != 0 {
        return Err(Error::InvalidInput("D must avoid p".into()));
    }
    let in_2pic_x = match b.two_divisibility_witness(&d.odd_support()) {
        Ok(_) => true,
        Err(Error::NotTwoDivisible) => false,
        Err(e) => return Err(e),
    };
    let n = 1 + b.pic0_two_rank();
    let dv = d.odd_support().iter().fold(vec![false; n], |acc, x| xor(&acc, &b.class_vector(x)));
    let pv = b.class_vector(p);
    // Pic(X∖{p}) = Pic X / ℤ[p], so [D] ∈ 2Pic(X∖{p}) ⟺ [D] ∈ {0, [p]} mod 2Pic X
    let zero = |v: &[bool]| v.iter().all(|x| !x);
    let in_2pic_open = zero(&dv) || zero(&xor(&dv, &pv));
    let degree_even = d.degree(b) % 2 == 0;
    Ok(OddDegreeReport { in_2pic_x, in_2pic_open, degree_even })
}

/// q1 ⌣ q2: every class of Sing(X∖{q1}) outside Sing(X) is a local square at q2.
pub fn smile<B: Backend>(b: &B, q1: &B::Place, q2: &B::Place) -> Result<bool> {
    if q1 == q2 {
        return Err(Error::InvalidInput("smile needs two distinct places".into()));
    }
    for q in [q1, q2] {
        if b.class_vector(q).iter().any(|&x| x) {
            return Err(Error::Refused(format!("[{}] is not 2-divisible", b.format_place(q))));
        }
    }
    let lam = b.two_divisibility_witness(std::slice::from_ref(q1))?;
    let basis = b.sing_x_basis();
    for mask in 0u32..(1 << basis.len()) {
        let picked: Vec<B::Elem> =
            basis.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, x)| x.clone()).collect();
        let x = b.mul(&lam, &b.product(&picked));
        if !is_local_square(b, &x, q2)? {
            return Ok(false);
        }
    }
    Ok(true)
}
