use std::path::Path;

use serde_json::json;
use wildsets::backend::Backend;
use wildsets::cert::{curve_string, from_json, to_json, CertificateJson, Kind, Session};
use wildsets::constructions::{construct_general, construct_rank0, construct_rank1};
use wildsets::equivalence::{certify, verify_pre_equivalence, verify_small_equivalence, WildSetCertificate};
use wildsets::local_symbols::{hilbert_symbol, reciprocity_product};
use wildsets::spaces::{check_pic_rank_formula, delta_space, g_rank, sing_space};
use wildsets::{Error, Result};

use crate::{Format, Opts, RankArg};

/// Runs `$body` with `$b` bound to the session backend and `$curve` to its cubic, if any.
macro_rules! with_backend {
    ($session:expr, |$b:ident, $curve:ident| $body:expr) => {
        match $session {
            Session::P1(ref $b) => {
                let $curve: Option<String> = None;
                $body
            }
            Session::Curve(ref $b) => {
                let $curve = Some(curve_string($b));
                $body
            }
        }
    };
}

fn session(o: &Opts) -> Result<Session> {
    Session::new(o.q()?, o.curve.as_deref())
}

/// Splits a comma-separated list, ignoring commas inside parentheses.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == ',' && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn parse_places<B: Backend>(b: &B, s: &str) -> Result<Vec<B::Place>> {
    split_list(s).iter().map(|p| b.parse_place(p)).collect()
}

fn names<B: Backend>(b: &B, s: &[B::Place]) -> Vec<String> {
    s.iter().map(|p| b.format_place(p)).collect()
}

fn emit(o: &Opts, text: String, value: serde_json::Value) {
    match o.format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("json")),
    }
}

pub fn hilbert(o: &Opts, a: &str, bs: &str, place: &str) -> Result<u8> {
    with_backend!(session(o)?, |b, _c| {
        let (x, y, p) = (b.parse_elem(a)?, b.parse_elem(bs)?, b.parse_place(place)?);
        let s = hilbert_symbol(b, &x, &y, &p)?;
        emit(o, s.to_string(), json!({ "symbol": s }));
        Ok(0)
    })
}

pub fn reciprocity(o: &Opts, a: &str, bs: &str) -> Result<u8> {
    with_backend!(session(o)?, |b, _c| {
        let (x, y) = (b.parse_elem(a)?, b.parse_elem(bs)?);
        let r = reciprocity_product(b, &x, &y)?;
        let factors: Vec<_> = r.factors.iter().map(|(p, s)| (b.format_place(p), *s)).collect();
        let mut text = String::new();
        for (p, s) in &factors {
            text.push_str(&format!("{p}: {s}\n"));
        }
        text.push_str(&format!("product: {}", r.product));
        emit(o, text, json!({ "product": r.product, "factors": factors }));
        Ok(if r.product == 1 { 0 } else { 1 })
    })
}

pub fn ranks(o: &Opts, places: &str) -> Result<u8> {
    with_backend!(session(o)?, |b, _c| {
        let s = parse_places(b, places)?;
        let sing = sing_space(b, &s)?.rank();
        let delta = delta_space(b, &s)?.rank();
        let g = g_rank(b, &s).rank;
        let pic = check_pic_rank_formula(b, &s)?;
        let text = format!(
            "rk Sing {sing}\nrk Delta {delta}\nrk G {g}\nrk PicY {}{}",
            pic.formula,
            if pic.ok() { String::new() } else { format!(" (direct {} disagrees)", pic.direct) }
        );
        emit(
            o,
            text,
            json!({ "sing": sing, "delta": delta, "g": g, "pic": pic.formula, "pic_direct": pic.direct }),
        );
        Ok(if pic.ok() { 0 } else { 1 })
    })
}

pub fn smile(o: &Opts, first: &str, second: &str) -> Result<u8> {
    with_backend!(session(o)?, |b, _c| {
        let (p, q) = (b.parse_place(first)?, b.parse_place(second)?);
        let r = wildsets::spaces::smile(b, &p, &q)?;
        emit(o, r.to_string(), json!({ "smile": r }));
        Ok(0)
    })
}

fn print_certificate<B: Backend>(o: &Opts, b: &B, c: &WildSetCertificate<B>, claimed_ok: Option<bool>) {
    let w = names(b, &c.wild_set);
    let mut text = c.report.to_string();
    if let Some(ok) = claimed_ok {
        text.push_str(&format!("{}  claimed wild set matches\n", if ok { "pass" } else { "FAIL" }));
    }
    text.push_str(&format!("wild set: {{{}}}", w.join(", ")));
    let checks: Vec<_> = c
        .report
        .checks
        .iter()
        .map(|k| json!({ "name": k.name, "passed": k.passed, "detail": k.detail }))
        .collect();
    emit(o, text, json!({ "checks": checks, "claimed_matches": claimed_ok, "wild_set": w }));
}

pub fn construct(o: &Opts, rank: RankArg, places: &str, aux: Option<&str>, out: Option<&Path>) -> Result<u8> {
    with_backend!(session(o)?, |b, curve| {
        let s = parse_places(b, places)?;
        let c = match rank {
            RankArg::Zero => construct_rank0(b, &s, o.cap)?,
            RankArg::One => construct_rank1(b, &s, o.cap)?,
            RankArg::General => {
                let q = parse_places(b, aux.ok_or_else(|| Error::InvalidInput("--aux is required for --rank general".into()))?)?;
                construct_general(b, &s, &q, o.cap)?
            }
        };
        let j = to_json(b, curve, Kind::Small, &c.se, &c.wild_set);
        match out {
            Some(path) => {
                std::fs::write(path, j.to_pretty() + "\n")
                    .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
                print_certificate(o, b, &c, None);
            }
            None => println!("{}", j.to_pretty()),
        }
        Ok(0)
    })
}

pub fn verify(o: &Opts, path: &Path, wild_only: bool) -> Result<u8> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let j = CertificateJson::parse(&text)?;
    with_backend!(Session::for_certificate(&j)?, |b, _c| {
        let (e, claimed) = from_json(b, &j)?;
        if j.kind == Kind::Pre {
            let r = verify_pre_equivalence(b, &e)?;
            emit(o, r.to_string(), json!({ "passed": r.passed() }));
            return Ok(if r.passed() { 0 } else { 1 });
        }
        let r = verify_small_equivalence(b, &e)?;
        if !r.passed() {
            emit(o, r.to_string(), json!({ "passed": false }));
            return Ok(1);
        }
        let c = certify(b, e)?;
        let ok = claimed.len() == c.wild_set.len() && claimed.iter().all(|p| c.wild_set.contains(p));
        if wild_only {
            let w = names(b, &c.wild_set);
            emit(o, format!("{{{}}}", w.join(", ")), json!({ "wild_set": w, "claimed_matches": ok }));
        } else {
            print_certificate(o, b, &c, Some(ok));
        }
        Ok(if ok { 0 } else { 1 })
    })
}
