//! Quick invariant sweep over the session backend (F_5 and y^2 = t^3 - t when no field is
//! given).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wildsets::backend::Backend;
use wildsets::cert::Session;
use wildsets::constructions::construct_rank1;
use wildsets::equivalence::{check_necessary_condition, verify_small_equivalence};
use wildsets::local_symbols::reciprocity_product;
use wildsets::sample;
use wildsets::spaces::{check_lin_dep_lemma, check_pic_rank_formula, g_rank};
use wildsets::Result;

use crate::Opts;

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{}  {name}: {detail}", if ok { "pass" } else { "FAIL" });
    }
}

fn small_sets<B: Backend>(b: &B) -> Vec<Vec<B::Place>> {
    let pl = b.places_up_to(2);
    let mut out: Vec<Vec<B::Place>> = pl.iter().map(|p| vec![p.clone()]).collect();
    for i in 0..pl.len() {
        for j in i + 1..pl.len() {
            out.push(vec![pl[i].clone(), pl[j].clone()]);
        }
    }
    out
}

fn suites<B: Backend>(b: &B, label: &str, sample: impl Fn(&mut ChaCha8Rng) -> B::Elem, seed: u64, cap: u32, t: &mut Tally) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let n = 100;
    for _ in 0..n {
        let (x, y) = (sample(&mut rng), sample(&mut rng));
        if reciprocity_product(b, &x, &y)?.product != 1 {
            bad += 1;
        }
    }
    t.line(&format!("{label} reciprocity"), bad == 0, format!("{} of {n} pairs", n - bad));

    let sets = small_sets(b);
    let (mut pic_bad, mut lem_bad) = (0, 0);
    for s in &sets {
        pic_bad += usize::from(!check_pic_rank_formula(b, s)?.ok());
        lem_bad += usize::from(!check_lin_dep_lemma(b, s)?.ok());
    }
    t.line(&format!("{label} Pic rank formula"), pic_bad == 0, format!("{} sets, {pic_bad} mismatches", sets.len()));
    t.line(&format!("{label} independence lemma"), lem_bad == 0, format!("{} sets, {lem_bad} mismatches", sets.len()));

    // a rank-one pair of degree-one places with -1 a local square, when one exists
    let m1 = b.minus_one();
    let good: Vec<B::Place> = b
        .places_of_degree(1)
        .into_iter()
        .filter(|p| wildsets::local_symbols::is_local_square(b, &m1, p).unwrap_or(false))
        .collect();
    let pair = (0..good.len())
        .flat_map(|i| (i + 1..good.len()).map(move |j| (i, j)))
        .map(|(i, j)| vec![good[i].clone(), good[j].clone()])
        .find(|s| g_rank(b, s).rank == 1);
    match pair {
        Some(s) => {
            let c = construct_rank1(b, &s, cap)?;
            let ok = verify_small_equivalence(b, &c.se)?.passed()
                && c.wild_set.len() == 2
                && check_necessary_condition(b, &c.wild_set);
            t.line(&format!("{label} rank-1 construction"), ok, format!("wild set of size {}", c.wild_set.len()));
        }
        None => println!("skip  {label} rank-1 construction: no suitable degree-1 pair"),
    }
    Ok(())
}

pub fn run(o: &Opts) -> Result<u8> {
    let mut t = Tally { failed: 0 };
    let (q, curve) = match o.q {
        Some(q) => (q, o.curve.clone()),
        None => (5, None),
    };
    let sessions = if o.q.is_none() {
        vec![Session::new(5, None)?, Session::new(5, Some("t^3-t"))?]
    } else {
        vec![Session::new(q, curve.as_deref())?]
    };
    for s in sessions {
        match s {
            Session::P1(ref k) => {
                let label = format!("P1/F_{}", k.fq().q());
                suites(k, &label, |r| sample::p1_elem(k, 4, r), o.seed, o.cap, &mut t)?
            }
            Session::Curve(ref e) => {
                let label = format!("y^2 = {} over F_{}", wildsets::cert::curve_string(e), e.fq().q());
                suites(e, &label, |r| sample::curve_elem(e, 3, r), o.seed, o.cap, &mut t)?
            }
        }
    }
    println!("{} failure(s)", t.failed);
    Ok(if t.failed == 0 { 0 } else { 1 })
}
