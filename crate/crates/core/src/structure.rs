//! Universal Witt structure polynomials, generated exactly over `O_F`.
//!
//! `O_F` is modelled as `Z[α]/(g)` for a monic Eisenstein `g`; the uniformizer
//! is the class of `α` (for `π = p` take `g = x − p`). Polynomials are built by
//! inverting the ghost map, and every division by a power of `α` is checked to be
//! exact.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::p_adic_val;

/// Largest estimated number of monomials allowed in a generated polynomial.
pub const GENERATION_BUDGET: u128 = 20_000;

/// Element of `Z[α]/(g)` in the power basis of `α`.
pub type Coef = Vec<BigInt>;

/// The uniformizer of `O_F` as the class of `α` in `Z[α]/(g)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PiSymbol {
    p: u64,
    g: Vec<BigInt>,
}

impl PiSymbol {
    /// `π = p`, so `O_F = Z_p`.
    pub fn prime(p: u64) -> PiSymbol {
        PiSymbol { p, g: vec![-BigInt::from(p), BigInt::one()] }
    }

    /// Root of a monic Eisenstein polynomial at `p` with integer coefficients.
    pub fn eisenstein(p: u64, g: &[BigInt]) -> Result<PiSymbol> {
        let e = g.len().saturating_sub(1);
        let pb = BigInt::from(p);
        let ok = e >= 1
            && g[e].is_one()
            && g[..e].iter().all(|c| (c % &pb).is_zero())
            && !g[0].is_zero()
            && p_adic_val(&g[0], p) == 1;
        if !ok {
            return Err(Error::NotEisenstein(format!("{g:?} is not a monic Eisenstein polynomial at {p}")));
        }
        Ok(PiSymbol { p, g: g.to_vec() })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Ramification index of `F` over `Q_p`.
    pub fn e(&self) -> usize {
        self.g.len() - 1
    }

    pub fn poly(&self) -> &[BigInt] {
        &self.g
    }

    pub fn is_p(&self) -> bool {
        self.e() == 1
    }

    pub fn from_int(&self, c: &BigInt) -> Coef {
        let mut v = vec![BigInt::zero(); self.e()];
        v[0] = c.clone();
        v
    }

    fn reduce(&self, mut v: Vec<BigInt>) -> Coef {
        let e = self.e();
        while v.len() > e {
            let top = v.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let base = v.len() - e;
            for (i, gi) in self.g[..e].iter().enumerate() {
                v[base + i] -= &top * gi;
            }
        }
        v.resize(e, BigInt::zero());
        v
    }

    pub fn mul(&self, a: &Coef, b: &Coef) -> Coef {
        if self.e() == 1 {
            return vec![&a[0] * &b[0]];
        }
        let mut out = vec![BigInt::zero(); 2 * self.e() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        self.reduce(out)
    }

    /// Multiply by `α^j`.
    pub fn mul_alpha(&self, a: &Coef, j: u32) -> Coef {
        if self.e() == 1 {
            return vec![&a[0] * BigInt::from(self.p).pow(j)];
        }
        let mut v = a.clone();
        for _ in 0..j {
            v.insert(0, BigInt::zero());
            v = self.reduce(v);
        }
        v
    }

    /// Divide by `α^n`, or `None` when the quotient is not integral.
    pub fn div_alpha(&self, a: &Coef, n: u32) -> Option<Coef> {
        if self.e() == 1 {
            let d = BigInt::from(self.p).pow(n);
            let (q, r) = a[0].div_rem(&d);
            return r.is_zero().then(|| vec![q]);
        }
        // α·h(α) = −g(0), so 1/α = −h(α)/g(0).
        let c0 = &self.g[0];
        let h: Coef = self.g[1..].iter().map(|x| -x).collect();
        let mut v = a.clone();
        for _ in 0..n {
            v = self.mul(&v, &self.reduce(h.clone()));
        }
        let d = c0.pow(n);
        let mut out = Vec::with_capacity(v.len());
        for x in v {
            let (q, r) = x.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(out)
    }

    pub fn is_zero(a: &Coef) -> bool {
        a.iter().all(|x| x.is_zero())
    }
}

/// Polynomial over `O_F` in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: HashMap<Vec<u16>, Coef>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> MPoly {
        MPoly { nvars, terms: HashMap::new() }
    }

    pub fn var(pi: &PiSymbol, nvars: usize, i: usize) -> MPoly {
        let mut e = vec![0u16; nvars];
        e[i] = 1;
        let mut terms = HashMap::new();
        terms.insert(e, pi.from_int(&BigInt::one()));
        MPoly { nvars, terms }
    }

    pub fn one(pi: &PiSymbol, nvars: usize) -> MPoly {
        let mut terms = HashMap::new();
        terms.insert(vec![0u16; nvars], pi.from_int(&BigInt::one()));
        MPoly { nvars, terms }
    }

    fn add_term(&mut self, exps: Vec<u16>, c: Coef) {
        use std::collections::hash_map::Entry;
        match self.terms.entry(exps) {
            Entry::Occupied(mut o) => {
                for (x, y) in o.get_mut().iter_mut().zip(c) {
                    *x += y;
                }
                if PiSymbol::is_zero(o.get()) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !PiSymbol::is_zero(&c) {
                    v.insert(c);
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.iter().map(|x| -x).collect());
        }
        out
    }

    pub fn mul(&self, pi: &PiSymbol, o: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Vec<u16> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, pi.mul(ca, cb));
            }
        }
        out
    }

    pub fn pow(&self, pi: &PiSymbol, mut n: u64) -> MPoly {
        let mut acc = MPoly::one(pi, self.nvars);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(pi, &base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(pi, &base);
            }
        }
        acc
    }

    pub fn mul_alpha(&self, pi: &PiSymbol, j: u32) -> MPoly {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), pi.mul_alpha(c, j))).collect() }
    }

    pub fn div_alpha(&self, pi: &PiSymbol, n: u32) -> Option<MPoly> {
        let mut terms = HashMap::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            terms.insert(e.clone(), pi.div_alpha(c, n)?);
        }
        Some(MPoly { nvars: self.nvars, terms })
    }

    /// Monomials sorted by descending total degree, then descending exponent vector.
    pub fn sorted_terms(&self) -> Vec<(&Vec<u16>, &Coef)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().map(|&x| x as u32).sum();
            let db: u32 = b.iter().map(|&x| x as u32).sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }

    /// True when every monomial has weighted degree `deg` with variable weights `w`.
    pub fn is_weighted_homogeneous(&self, w: &[u64], deg: u64) -> bool {
        self.terms.keys().all(|e| e.iter().zip(w).map(|(&x, &wi)| x as u64 * wi).sum::<u64>() == deg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyKind {
    Sum,
    Product,
    Frobenius,
}

impl PolyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolyKind::Sum => "sum",
            PolyKind::Product => "product",
            PolyKind::Frobenius => "frobenius",
        }
    }
}

/// One universal polynomial: variables `a_0..a_{n-1}` then `b_0..b_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalPoly {
    pub kind: PolyKind,
    pub index: usize,
    pub len: usize,
    pub poly: MPoly,
}

/// All polynomials of one kind for Witt vectors of a given length.
///
/// For `Sum` and `Product` entry `i` computes output component `i` from inputs
/// of length `len`. For `Frobenius` entry `i` is the full component
/// `a_i^q + π f_i` for inputs of length `len` (`len − 1` entries).
#[derive(Debug)]
pub struct PolySet {
    pub q: u64,
    pub pi: PiSymbol,
    pub kind: PolyKind,
    pub len: usize,
    pub polys: Vec<UniversalPoly>,
}

fn coin_count(deg: u64, coins: &[u64]) -> u128 {
    let mut dp = vec![0u128; deg as usize + 1];
    dp[0] = 1;
    for &c in coins {
        for s in c as usize..=deg as usize {
            dp[s] = dp[s].saturating_add(dp[s - c as usize]);
        }
    }
    dp[deg as usize]
}

/// Upper bound for the number of monomials of the largest polynomial in the set.
pub fn estimated_size(q: u64, kind: PolyKind, len: usize) -> u128 {
    if len == 0 {
        return 0;
    }
    let n = len as u32 - 1;
    let weights = |k: u32| (0..=k).map(|j| q.saturating_pow(j)).collect::<Vec<_>>();
    match kind {
        PolyKind::Sum => {
            let mut w = weights(n);
            w.extend(weights(n));
            coin_count(q.saturating_pow(n), &w)
        }
        PolyKind::Product => coin_count(q.saturating_pow(n), &weights(n)).pow(2),
        PolyKind::Frobenius => {
            if n == 0 {
                return 0;
            }
            coin_count(q.saturating_pow(n), &weights(n))
        }
    }
}

/// True when generation of this set fits the configured budget.
pub fn within_budget(q: u64, kind: PolyKind, len: usize) -> bool {
    estimated_size(q, kind, len) <= GENERATION_BUDGET
}

fn ghost_poly(pi: &PiSymbol, q: u64, nvars: usize, offset: usize, n: usize) -> MPoly {
    let mut acc = MPoly::zero(nvars);
    for j in 0..=n {
        let v = MPoly::var(pi, nvars, offset + j).pow(pi, q.pow((n - j) as u32));
        acc = acc.add(&v.mul_alpha(pi, j as u32));
    }
    acc
}

fn integrality(kind: PolyKind, index: usize) -> Error {
    Error::IntegralityFailure { kind: kind.name().into(), index }
}

/// Generate a polynomial set by exact ghost-map inversion.
pub fn generate(q: u64, pi: &PiSymbol, kind: PolyKind, len: usize) -> Result<PolySet> {
    if len == 0 {
        return Err(Error::LengthTooShort(0));
    }
    let nvars = 2 * len;
    let count = if kind == PolyKind::Frobenius { len - 1 } else { len };
    let mut done: Vec<MPoly> = Vec::with_capacity(count);
    // powers[j] holds done[j]^(q^(n-1-j)) from the previous round.
    let mut powers: Vec<MPoly> = Vec::with_capacity(count);
    for n in 0..count {
        let target = match kind {
            PolyKind::Sum => ghost_poly(pi, q, nvars, 0, n).add(&ghost_poly(pi, q, nvars, len, n)),
            PolyKind::Product => ghost_poly(pi, q, nvars, 0, n).mul(pi, &ghost_poly(pi, q, nvars, len, n)),
            PolyKind::Frobenius => ghost_poly(pi, q, nvars, 0, n + 1),
        };
        for pw in powers.iter_mut() {
            *pw = pw.pow(pi, q);
        }
        let mut rest = target;
        for (j, pw) in powers.iter().enumerate() {
            rest = rest.sub(&pw.mul_alpha(pi, j as u32));
        }
        let next = rest.div_alpha(pi, n as u32).ok_or_else(|| integrality(kind, n))?;
        powers.push(next.clone());
        done.push(next);
    }
    let weights: Vec<u64> = (0..len).map(|j| q.pow(j as u32)).collect();
    if kind == PolyKind::Frobenius {
        for (i, fr) in done.iter().enumerate() {
            let deg = q.pow(i as u32 + 1);
            let mut w = weights.clone();
            w.extend(std::iter::repeat_n(0, len));
            if !fr.is_weighted_homogeneous(&w, deg) {
                return Err(Error::IntegralityFailure { kind: "frobenius homogeneity".into(), index: i });
            }
        }
    }
    let polys = done
        .into_iter()
        .enumerate()
        .map(|(index, poly)| UniversalPoly { kind, index, len, poly })
        .collect();
    Ok(PolySet { q, pi: pi.clone(), kind, len, polys })
}

impl PolySet {
    /// The correction term `f_i` of Frobenius component `i`.
    pub fn frobenius_correction(&self, i: usize) -> Result<MPoly> {
        assert_eq!(self.kind, PolyKind::Frobenius);
        let nvars = 2 * self.len;
        let lead = MPoly::var(&self.pi, nvars, i).pow(&self.pi, self.q);
        self.polys[i]
            .poly
            .sub(&lead)
            .div_alpha(&self.pi, 1)
            .ok_or_else(|| integrality(PolyKind::Frobenius, i))
    }
}

type CacheKey = (u64, PiSymbol, PolyKind, usize);
type CacheSlot = Arc<OnceLock<std::result::Result<Arc<PolySet>, Error>>>;

fn cache() -> &'static Mutex<HashMap<CacheKey, CacheSlot>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, CacheSlot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached generation; `Ok(None)` when the set exceeds the generation budget.
pub fn structure_polys(q: u64, pi: &PiSymbol, kind: PolyKind, len: usize) -> Result<Option<Arc<PolySet>>> {
    if !within_budget(q, kind, len) {
        return Ok(None);
    }
    let slot = {
        let mut map = cache().lock().unwrap();
        map.entry((q, pi.clone(), kind, len)).or_default().clone()
    };
    let res = slot.get_or_init(|| generate(q, pi, kind, len).map(Arc::new));
    res.clone().map(Some)
}

/// One monomial of an emitted polynomial document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialDoc {
    pub coef: Vec<String>,
    pub exps_a: Vec<u16>,
    pub exps_b: Vec<u16>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalPolyDoc {
    pub kind: PolyKind,
    pub index: usize,
    pub monomials: Vec<MonomialDoc>,
}

impl UniversalPoly {
    pub fn to_doc(&self) -> UniversalPolyDoc {
        let n = self.len;
        let monomials = self
            .poly
            .sorted_terms()
            .into_iter()
            .map(|(e, c)| {
                let mut coef: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                while coef.len() > 1 && coef.last().is_some_and(|s| s == "0") {
                    coef.pop();
                }
                let exps_b = if self.kind == PolyKind::Frobenius { Vec::new() } else { e[n..].to_vec() };
                MonomialDoc { coef, exps_a: e[..n].to_vec(), exps_b }
            })
            .collect();
        UniversalPolyDoc { kind: self.kind, index: self.index, monomials }
    }

    /// Human-readable rendering, e.g. `a1 + b1 - a0*b0`.
    pub fn render(&self) -> String {
        let n = self.len;
        let mut out = String::new();
        for (e, c) in self.poly.sorted_terms() {
            let mut vars = Vec::new();
            for (i, &x) in e.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                let name = if i < n { format!("a{i}") } else { format!("b{}", i - n) };
                vars.push(if x == 1 { name } else { format!("{name}^{x}") });
            }
            let coef_str = render_coef(c);
            let (neg, mag) = match coef_str.strip_prefix('-') {
                Some(m) if !m.contains(' ') => (true, m.to_string()),
                _ => (false, coef_str.clone()),
            };
            let body = match (mag.as_str(), vars.is_empty()) {
                ("1", false) => vars.join("*"),
                (_, true) => mag.clone(),
                _ => format!("{mag}*{}", vars.join("*")),
            };
            if out.is_empty() {
                out = if neg { format!("-{body}") } else { body };
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

fn render_coef(c: &Coef) -> String {
    let nz: Vec<(usize, &BigInt)> = c.iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
    if nz.len() == 1 && nz[0].0 == 0 {
        return nz[0].1.to_string();
    }
    let mut out = String::new();
    for (k, (i, x)) in nz.iter().enumerate() {
        let mag = x.abs();
        let body = match (i, mag.is_one()) {
            (0, _) => mag.to_string(),
            (1, true) => "pi".to_string(),
            (1, false) => format!("{mag}*pi"),
            (_, true) => format!("pi^{i}"),
            (_, false) => format!("{mag}*pi^{i}"),
        };
        let sign = match (k, x.is_negative()) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        out += sign;
        out += &body;
    }
    if nz.len() == 1 {
        out
    } else {
        format!("({out})")
    }
}

/// Sign-aware helper used by exact oracles: `true` when some coefficient is negative.
pub fn has_negative(c: &Coef) -> bool {
    c.iter().any(|x| x.is_negative())
}

/// Exact Witt components of the scalar `c ∈ O_F`, whose ghost components are all `c`.
pub fn scalar_components(q: u64, pi: &PiSymbol, c: &Coef, len: usize) -> Result<Vec<Coef>> {
    let mut comps: Vec<Coef> = Vec::with_capacity(len);
    for n in 0..len {
        let mut rest = c.clone();
        for (j, x) in comps.iter().enumerate() {
            let mut pw = x.clone();
            for _ in 0..(n - j) {
                pw = pow_coef(pi, &pw, q);
            }
            let t = pi.mul_alpha(&pw, j as u32);
            for (r, y) in rest.iter_mut().zip(t) {
                *r -= y;
            }
        }
        comps.push(pi.div_alpha(&rest, n as u32).ok_or(Error::IntegralityFailure { kind: "scalar".into(), index: n })?);
    }
    Ok(comps)
}

fn pow_coef(pi: &PiSymbol, x: &Coef, mut n: u64) -> Coef {
    let mut acc = pi.from_int(&BigInt::one());
    let mut b = x.clone();
    while n > 0 {
        if n & 1 == 1 {
            acc = pi.mul(&acc, &b);
        }
        n >>= 1;
        if n > 0 {
            b = pi.mul(&b, &b);
        }
    }
    acc
}

/// Sorted map view of a polynomial, convenient for golden comparisons.
pub fn as_btree(p: &MPoly) -> BTreeMap<Vec<u16>, Coef> {
    p.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_and_product_index_one() {
        let pi = PiSymbol::prime(2);
        let s = generate(2, &pi, PolyKind::Sum, 2).unwrap();
        assert_eq!(s.polys[1].render(), "-a0*b0 + a1 + b1");
        let p3 = PiSymbol::prime(3);
        let m = generate(3, &p3, PolyKind::Product, 2).unwrap();
        assert_eq!(m.polys[1].render(), "a0^3*b1 + a1*b0^3 + 3*a1*b1");
    }

    #[test]
    fn frobenius_leading_correction() {
        let pi = PiSymbol::prime(2);
        let f = generate(2, &pi, PolyKind::Frobenius, 3).unwrap();
        assert_eq!(f.frobenius_correction(0).unwrap(), MPoly::var(&pi, 6, 1));
        assert_eq!(f.polys[0].render(), "a0^2 + 2*a1");
    }

    #[test]
    fn eisenstein_symbol_division() {
        let g: Vec<BigInt> = vec![(-2).into(), 0.into(), 1.into()];
        let pi = PiSymbol::eisenstein(2, &g).unwrap();
        let two = pi.from_int(&2.into());
        assert_eq!(pi.div_alpha(&two, 2), Some(pi.from_int(&1.into())));
        assert_eq!(pi.div_alpha(&two, 3), None);
        assert_eq!(pi.div_alpha(&two, 1), Some(vec![0.into(), 1.into()]));
        assert!(PiSymbol::eisenstein(2, &[(-4).into(), 0.into(), 1.into()]).is_err());
    }

    #[test]
    fn budget_excludes_only_the_largest_case() {
        for q in [2u64, 3, 4, 9] {
            for len in 1..=4 {
                for kind in [PolyKind::Sum, PolyKind::Product, PolyKind::Frobenius] {
                    let expect = !(q == 9 && len == 4 && kind != PolyKind::Frobenius);
                    assert_eq!(within_budget(q, kind, len), expect, "q={q} len={len} {kind:?}");
                }
            }
        }
    }

    #[test]
    fn scalar_of_minus_one_p2() {
        let pi = PiSymbol::prime(2);
        let c = scalar_components(2, &pi, &pi.from_int(&(-1).into()), 3).unwrap();
        assert_eq!(c, vec![vec![BigInt::from(-1)]; 3]);
    }
}
