//! φ-iterate towers `K ⊂ K(π_1) ⊂ K(π_2) ⊂ …` with `φ(π_i) = π_{i−1}`.
//!
//! Only `F = Q_p` with `π = p` is supported, so `φ` has integer coefficients.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::{log_p, Int};
use crate::padic::{make_ring, ring_doc, CoefDoc, LevelDoc, LevelKind, LocalRing, RingDoc, RingElt};
use crate::windows::FrobWindow;
use crate::witt::{PolyEndo, WittRing};

/// Default bound on `depth · log_p(q)`.
pub const DEFAULT_DEPTH_BUDGET: u32 = 3;

/// Default slack, in base digits, for subfield membership tests.
pub const DEFAULT_MEMBERSHIP_SLACK: u32 = 2;

/// The data `(K, π_0, φ)` of a φ-iterate extension.
#[derive(Clone, Debug)]
pub struct PhiIterate {
    base: LocalRing,
    phi: Vec<BigInt>,
    pi0: Vec<BigInt>,
    q: u64,
}

impl PhiIterate {
    /// Validate `φ` (monic of degree `q`, `φ(0) = 0`, `φ ≡ x^q mod p`) and `π_0` (a uniformizer of `K`).
    pub fn new(base: &LocalRing, phi: Vec<BigInt>, pi0: Vec<BigInt>) -> Result<PhiIterate> {
        let p = base.p();
        let q = phi.len().saturating_sub(1) as u64;
        if q < 2 || log_p(q, p).is_none() {
            return Err(Error::NotEisenstein(format!("phi has degree {q}, which is not a power of {p}")));
        }
        if !phi[q as usize].is_one() {
            return Err(Error::NotEisenstein("phi is not monic".into()));
        }
        if !phi[0].is_zero() {
            return Err(Error::NotEisenstein("phi(0) is not 0".into()));
        }
        let pb = BigInt::from(p);
        if phi[1..q as usize].iter().any(|c| !(c % &pb).is_zero()) {
            return Err(Error::NotEisenstein("phi is not congruent to x^q modulo p".into()));
        }
        let v = base.from_coeffs(&pi0)?.val();
        if v != Some(1) {
            return Err(Error::NotEisenstein(format!("pi0 has valuation {v:?} in K, expected 1")));
        }
        Ok(PhiIterate { base: base.clone(), phi, pi0, q })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn phi(&self) -> &[BigInt] {
        &self.phi
    }

    pub fn pi0(&self) -> &[BigInt] {
        &self.pi0
    }

    pub fn base(&self) -> &LocalRing {
        &self.base
    }

    pub fn endo(&self) -> PolyEndo {
        PolyEndo::new(self.phi.clone())
    }

    pub fn to_doc(&self, depth: usize) -> TowerDoc {
        TowerDoc {
            ring_ref: ring_doc(&self.base),
            phi: self.phi.iter().cloned().map(Int).collect(),
            pi0: self.pi0.iter().cloned().map(Int).collect(),
            depth,
        }
    }

    pub fn from_doc(doc: &TowerDoc) -> Result<PhiIterate> {
        let base = make_ring(&doc.ring_ref)?;
        PhiIterate::new(&base, doc.phi.iter().map(|x| x.0.clone()).collect(), doc.pi0.iter().map(|x| x.0.clone()).collect())
    }
}

/// Tower document: base ring, `φ`, `π_0` and depth.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub ring_ref: RingDoc,
    pub phi: Vec<Int>,
    pub pi0: Vec<Int>,
    pub depth: usize,
}

fn int_poly(c: &[i64]) -> Vec<BigInt> {
    c.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn binomial_shift(p: u64) -> Vec<BigInt> {
    // (1 + x)^p − 1
    let mut c = vec![BigInt::one()];
    for _ in 0..p {
        let mut next = vec![BigInt::zero(); c.len() + 1];
        for (i, x) in c.iter().enumerate() {
            next[i] += x;
            next[i + 1] += x;
        }
        c = next;
    }
    c[0] = BigInt::zero();
    c
}

/// Kummer-type iterate: `K = Q_p`, `φ = x^p`, `π_0 = p`.
pub fn kummer(p: u64, digits: u32) -> Result<PhiIterate> {
    let base = make_ring(&RingDoc { prime: p, precision: digits, levels: vec![] })?;
    let mut phi = vec![BigInt::zero(); p as usize + 1];
    phi[p as usize] = BigInt::one();
    PhiIterate::new(&base, phi, vec![BigInt::from(p)])
}

/// Lubin–Tate iterate: `K = Q_p`, `φ = x^p + p x`, `π_0 = p`.
pub fn lubin_tate(p: u64, digits: u32) -> Result<PhiIterate> {
    let base = make_ring(&RingDoc { prime: p, precision: digits, levels: vec![] })?;
    let mut phi = vec![BigInt::zero(); p as usize + 1];
    phi[p as usize] = BigInt::one();
    phi[1] = BigInt::from(p);
    PhiIterate::new(&base, phi, vec![BigInt::from(p)])
}

/// Cyclotomic iterate: `φ = (1+x)^p − 1`, `π_0 = ζ_p − 1` (for `p = 2`, `K = Q_2` and `π_0 = −2`).
pub fn cyclotomic(p: u64, digits: u32) -> Result<PhiIterate> {
    let phi = binomial_shift(p);
    if p == 2 {
        let base = make_ring(&RingDoc { prime: 2, precision: digits, levels: vec![] })?;
        return PhiIterate::new(&base, phi, vec![BigInt::from(-2)]);
    }
    let level = LevelDoc {
        poly: phi[1..].iter().map(|c| CoefDoc::Scalar(Int(c.clone()))).collect(),
        uniformizer: vec![Int::from(0), Int::from(1)],
        kind: LevelKind::Eisenstein,
    };
    let base = make_ring(&RingDoc { prime: p, precision: digits, levels: vec![level] })?;
    PhiIterate::new(&base, phi, int_poly(&[0, 1]))
}

fn poly_mul_int(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Composition `f(g(x))` of integer polynomials.
pub fn compose_int(f: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
    let mut acc = vec![BigInt::zero()];
    for c in f.iter().rev() {
        acc = poly_mul_int(&acc, g);
        acc[0] += c;
    }
    while acc.len() > 1 && acc.last().is_some_and(|x| x.is_zero()) {
        acc.pop();
    }
    acc
}

/// A φ-iterate tower built to finite depth.
#[derive(Clone, Debug)]
pub struct PhiTower {
    it: PhiIterate,
    depth: usize,
    ring: LocalRing,
    base_levels: usize,
    pis: Vec<RingElt>,
    minpolys: Vec<Vec<BigInt>>,
}

/// Minimal polynomial `Φ_i = φ^{∘i} − π_0` over `K`: integer coefficients, with `π_0` subtracted from the constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinPolyDoc {
    pub level: usize,
    pub composed_phi: Vec<Int>,
    pub minus_pi0: Vec<Int>,
    pub eisenstein: bool,
}

pub fn build_tower(it: &PhiIterate, depth: usize) -> Result<PhiTower> {
    build_tower_with_budget(it, depth, DEFAULT_DEPTH_BUDGET)
}

pub fn build_tower_with_budget(it: &PhiIterate, depth: usize, budget: u32) -> Result<PhiTower> {
    let steps = log_p(it.q, it.p()).unwrap() * depth as u32;
    if steps > budget {
        return Err(Error::DepthBudgetExceeded { requested: steps, budget });
    }
    if depth == 0 {
        return Err(Error::Malformed("tower depth must be at least 1".into()));
    }
    let base = &it.base;
    let base_levels = base.num_levels();
    let mut doc = ring_doc(base);
    let mut dim = base.dim();
    for i in 1..=depth {
        let prev: Vec<BigInt> = if i == 1 {
            let mut v = it.pi0.clone();
            v.resize(dim, BigInt::zero());
            v
        } else {
            let d_prev = dim / it.q as usize;
            let mut v = vec![BigInt::zero(); dim];
            v[d_prev] = BigInt::one();
            v
        };
        // φ(y) − π_{i−1}, using φ(0) = 0
        let mut poly = vec![CoefDoc::Vector(prev.iter().map(|x| Int(-x)).collect())];
        poly.extend(it.phi[1..].iter().map(|c| CoefDoc::Scalar(Int(c.clone()))));
        let mut unif = vec![Int::from(0); dim + 1];
        unif[dim] = Int::from(1);
        doc.levels.push(LevelDoc { poly, uniformizer: unif, kind: LevelKind::Eisenstein });
        dim *= it.q as usize;
    }
    let ring = make_ring(&doc)?;
    let mut pis = vec![base.from_coeffs(&it.pi0)?.embed(&ring)?];
    for i in 1..=depth {
        pis.push(ring.generator(base_levels + i - 1));
    }
    let mut minpolys = Vec::with_capacity(depth);
    let mut comp = vec![BigInt::zero(), BigInt::one()];
    for _ in 1..=depth {
        comp = compose_int(&it.phi, &comp);
        let ok = comp.last().is_some_and(|c| c.is_one())
            && comp[..comp.len() - 1].iter().all(|c| (c % BigInt::from(it.p())).is_zero());
        if !ok {
            return Err(Error::NotEisenstein("composed phi is not Eisenstein over K".into()));
        }
        minpolys.push(comp.clone());
    }
    Ok(PhiTower { it: it.clone(), depth, ring, base_levels, pis, minpolys })
}

/// Per-level result of the norm compatibility check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormLevel {
    pub level: usize,
    /// Valuation of `Nm(π_i) − π_{i−1}` in units of the uniformizer of level `i − 1`.
    pub residual_valuation: String,
    pub required: u32,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormReport {
    pub levels: Vec<NormLevel>,
    pub all_pass: bool,
}

/// Elementary field `K_m` identified with a tower level: `[K_m : K_1] = degree`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryField {
    pub degree: u64,
    pub level: usize,
}

/// First failure of a membership test: component `component` of `x_{q^j}` is not in `K_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipWitness {
    pub j: usize,
    pub m: usize,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub holds: bool,
    pub witness: Option<MembershipWitness>,
    pub slack_digits: u32,
}

impl PhiTower {
    pub fn iterate(&self) -> &PhiIterate {
        &self.it
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn q(&self) -> u64 {
        self.it.q
    }

    /// Ring of integers of `K(π_depth)`.
    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    /// Number of ring levels used by `K` itself.
    pub fn base_levels(&self) -> usize {
        self.base_levels
    }

    /// Ring of integers of `K(π_i)`.
    pub fn level_ring(&self, i: usize) -> Result<LocalRing> {
        self.ring.sub_ring(self.base_levels + i)
    }

    /// `π_i` in the top ring.
    pub fn pi(&self, i: usize) -> &RingElt {
        &self.pis[i]
    }

    /// `π_i` in the ring of integers of `K(π_i)`.
    pub fn pi_at_level(&self, i: usize) -> Result<RingElt> {
        self.pis[i].restrict(&self.level_ring(i)?)
    }

    /// `Φ_i` with coefficients embedded in the top ring.
    pub fn minpoly(&self, i: usize) -> Vec<RingElt> {
        let mut c: Vec<RingElt> = self.minpolys[i - 1].iter().map(|x| self.ring.from_bigint(x)).collect();
        c[0] = &c[0] - &self.pis[0];
        c
    }

    pub fn minpoly_docs(&self) -> Vec<MinPolyDoc> {
        self.minpolys
            .iter()
            .enumerate()
            .map(|(i, c)| MinPolyDoc {
                level: i + 1,
                composed_phi: c.iter().cloned().map(Int).collect(),
                minus_pi0: self.it.pi0.iter().map(|x| Int(-x)).collect(),
                eisenstein: true,
            })
            .collect()
    }

    pub fn witt_ring(&self) -> Result<WittRing> {
        WittRing::new(&self.ring, self.it.q)
    }

    /// Window `x_{q^i} = λ_φ(π_i)` for `0 ≤ i ≤ depth`, Witt length `length + 1`.
    pub fn uniformizer_window(&self, length: usize) -> Result<FrobWindow> {
        let wr = self.witt_ring()?;
        let phi = self.it.endo();
        let v = self.pis.iter().map(|pi| wr.lambda_phi(pi, &phi, length + 1)).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(&wr, 0, v)
    }

    pub fn norm_compat_check(&self) -> Result<NormReport> {
        let pis = (0..=self.depth).map(|i| self.pi_at_level(i)).collect::<Result<Vec<_>>>()?;
        self.norm_compat_check_with(&pis)
    }

    /// Check `Nm(π_i) ≡ π_{i−1} mod p` for explicit `π_i` in the ring of level `i`.
    pub fn norm_compat_check_with(&self, pis: &[RingElt]) -> Result<NormReport> {
        let mut levels = Vec::new();
        for i in 1..pis.len() {
            let lower = self.level_ring(i - 1)?;
            let nm = pis[i].norm_down(self.base_levels + i - 1)?;
            let prev = pis[i - 1].cast(nm.ring())?;
            let d = &nm - &prev;
            let required = lower.e();
            let (shown, passes) = match d.val() {
                Some(v) => (v.to_string(), v >= required),
                None => (format!(">= {}", d.prec()), d.prec() >= required),
            };
            levels.push(NormLevel { level: i, residual_valuation: shown, required, passes });
        }
        let all_pass = levels.iter().all(|l| l.passes);
        Ok(NormReport { levels, all_pass })
    }

    /// Membership of a window in `A⁺`: `x_{q^j}` lies in `O_{K_m}` whenever `q^j | [K_m : K_1]`.
    pub fn alk_membership(&self, w: &FrobWindow, fields: &[ElementaryField], slack_digits: u32) -> Result<MembershipReport> {
        let e = self.ring.e();
        let slack = slack_digits * e;
        for (m, f) in fields.iter().enumerate() {
            for j in w.offset()..=w.offset() + w.depth() {
                let qj = self.it.q.checked_pow(j as u32);
                if qj.is_none_or(|qj| f.degree % qj != 0) {
                    continue;
                }
                let x = w.vector(j).unwrap();
                let sub = self.base_levels + f.level;
                for (k, c) in x.comps().iter().enumerate() {
                    let threshold = c.prec().saturating_sub(slack);
                    if threshold == 0 {
                        return Err(Error::PrecisionExhausted(format!(
                            "component {k} of x_(q^{j}) has no digits left after the slack"
                        )));
                    }
                    let bv = &self.ring.basis_valuations()[self.ring.sub_dim(sub)..];
                    let p = self.ring.p();
                    let outside_ok = c.outside_sub(sub).iter().zip(bv).all(|(&x, &v)| {
                        if x == 0 {
                            return true;
                        }
                        let mut vp = 0;
                        let mut y = x;
                        while y % p == 0 {
                            y /= p;
                            vp += 1;
                        }
                        vp * e + v >= threshold
                    });
                    if !outside_ok {
                        return Ok(MembershipReport {
                            holds: false,
                            witness: Some(MembershipWitness { j, m: m + 1, component: k }),
                            slack_digits,
                        });
                    }
                }
            }
        }
        Ok(MembershipReport { holds: true, witness: None, slack_digits })
    }

    /// Smallest `b ≤ depth` for which the shifted window passes the membership test.
    pub fn find_shift(&self, w: &FrobWindow, fields: &[ElementaryField]) -> Result<Option<usize>> {
        for b in 0..=w.depth() {
            let s = w.shift_embed(b)?;
            if self.alk_membership(&s, fields, DEFAULT_MEMBERSHIP_SLACK)?.holds {
                return Ok(Some(b));
            }
        }
        Ok(None)
    }

    /// `Σ c_k X^k` with `X` the uniformizer window and `c_k ∈ Z_p`.
    pub fn iota_pi(&self, series: &[BigInt], length: usize) -> Result<FrobWindow> {
        let x = self.uniformizer_window(length)?;
        let wr = x.witt_ring().clone();
        let pi = wr.pi_symbol().clone();
        let mut acc = FrobWindow::constant(&wr, &pi.from_int(&BigInt::zero()), length, self.depth)?;
        let mut xk = FrobWindow::constant(&wr, &pi.from_int(&BigInt::one()), length, self.depth)?;
        for (k, c) in series.iter().enumerate() {
            if k > 0 {
                xk = xk.mul(&x)?;
            }
            if c.is_zero() {
                continue;
            }
            acc = acc.add(&xk.scale(&pi.from_int(c))?)?;
        }
        Ok(acc)
    }
}

/// Element `num / ϖ^den` of the fraction field, `ϖ` the top uniformizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracElt {
    pub num: RingElt,
    pub den: u32,
}

impl FracElt {
    pub fn from_elt(x: &RingElt) -> FracElt {
        FracElt { num: x.clone(), den: 0 }
    }

    fn lift(&self, den: u32) -> RingElt {
        let u = self.num.ring().uniformizer().pow((den - self.den) as u64);
        &self.num * &u
    }

    pub fn add(&self, o: &FracElt) -> FracElt {
        let den = self.den.max(o.den);
        FracElt { num: &self.lift(den) + &o.lift(den), den }.reduced()
    }

    pub fn sub(&self, o: &FracElt) -> FracElt {
        let den = self.den.max(o.den);
        FracElt { num: &self.lift(den) - &o.lift(den), den }.reduced()
    }

    pub fn mul(&self, o: &FracElt) -> FracElt {
        FracElt { num: &self.num * &o.num, den: self.den + o.den }.reduced()
    }

    /// Cancel common powers of the uniformizer so the numerator is not capped early.
    fn reduced(self) -> FracElt {
        let k = self.num.val().map_or(self.den, |v| v.min(self.den));
        if k == 0 {
            return self;
        }
        match self.num.exact_divide(k) {
            Ok(num) => FracElt { num, den: self.den - k },
            Err(_) => self,
        }
    }

    /// Divide by a nonzero ring element.
    pub fn div(&self, d: &RingElt) -> Result<FracElt> {
        let v = d.val().ok_or_else(|| Error::PrecisionExhausted("division by an element indistinguishable from zero".into()))?;
        let unit = d.exact_divide(v)?.inverse()?;
        Ok(FracElt { num: &self.num * &unit, den: self.den + v }.reduced())
    }

    /// Valuation `v(num) − den`, or `None` when the numerator is zero at its precision.
    pub fn val(&self) -> Option<i64> {
        self.num.val().map(|v| v as i64 - self.den as i64)
    }

    /// Absolute precision `prec(num) − den`.
    pub fn abs_prec(&self) -> i64 {
        self.num.prec() as i64 - self.den as i64
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

fn series_mul(a: &[FracElt], b: &[FracElt], order: usize, zero: &FracElt) -> Vec<FracElt> {
    let mut out = vec![zero.clone(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Powers `F^0, …, F^order` of a series with zero constant term, truncated at `u^order`.
fn series_powers(f: &[FracElt], order: usize, zero: &FracElt, one: &FracElt) -> Vec<Vec<FracElt>> {
    let mut pw = vec![{
        let mut v = vec![zero.clone(); order + 1];
        v[0] = one.clone();
        v
    }];
    for _ in 1..=order {
        let next = series_mul(pw.last().unwrap(), f, order, zero);
        pw.push(next);
    }
    pw
}

fn to_series(fr: &[RingElt], order: usize) -> Result<(Vec<FracElt>, FracElt, FracElt)> {
    let ring = fr.first().ok_or(Error::ZeroLinearTerm)?.ring().clone();
    let zero = FracElt::from_elt(&ring.zero());
    let one = FracElt::from_elt(&ring.one());
    let mut f = vec![zero.clone(); order + 1];
    for (k, c) in fr.iter().enumerate().take(order) {
        f[k + 1] = FracElt::from_elt(c);
    }
    Ok((f, zero, one))
}

/// Solve `A(F(u)) = f_1 A(u)` with `A = u + a_2 u^2 + …` to order `order`.
///
/// `fr[k]` is the coefficient of `u^{k+1}` in `F`. Returns `a_1, …, a_order`.
pub fn linearize(fr: &[RingElt], order: usize) -> Result<Vec<FracElt>> {
    let (f, zero, one) = to_series(fr, order)?;
    let f1 = fr[0].clone();
    if f1.is_zero() {
        return Err(Error::ZeroLinearTerm);
    }
    let pw = series_powers(&f, order, &zero, &one);
    let mut a: Vec<FracElt> = vec![zero.clone(), one.clone()];
    for n in 2..=order {
        let mut rhs = zero.clone();
        for (aj, pj) in a.iter().zip(&pw).skip(1) {
            rhs = rhs.sub(&aj.mul(&pj[n]));
        }
        let d = &f1.pow(n as u64) - &f1;
        if d.is_zero() {
            return Err(Error::ResonanceDivisionByZero { j: n });
        }
        let an = rhs.div(&d)?;
        if an.abs_prec() <= 0 && !an.is_zero() {
            return Err(Error::PrecisionExhausted(format!("coefficient {n} has no known digits")));
        }
        a.push(an);
    }
    Ok(a.into_iter().skip(1).collect())
}

/// Coefficients of `A(F(u)) − f_1 A(u)` up to `u^order`; all vanish for a correct solution.
pub fn linearization_residual(fr: &[RingElt], a: &[FracElt], order: usize) -> Result<Vec<FracElt>> {
    let (f, zero, one) = to_series(fr, order)?;
    let pw = series_powers(&f, order, &zero, &one);
    let f1 = FracElt::from_elt(&fr[0]);
    let mut out = vec![zero.clone(); order + 1];
    for (j, aj) in a.iter().enumerate() {
        let j = j + 1;
        for n in 1..=order {
            out[n] = out[n].add(&aj.mul(&pw[j][n]));
        }
        if j <= order {
            out[j] = out[j].sub(&f1.mul(aj));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_minimal_polynomial() {
        let t = build_tower(&kummer(2, 8).unwrap(), 2).unwrap();
        assert_eq!(t.minpolys[1], int_poly(&[0, 0, 0, 0, 1]));
        let pi2 = t.pi(2);
        assert!(crate::padic::eval_poly(&t.minpoly(2), pi2).is_zero());
    }

    #[test]
    fn cyclotomic_two_first_level() {
        let it = cyclotomic(2, 8).unwrap();
        let t = build_tower(&it, 1).unwrap();
        let r = t.level_ring(1).unwrap();
        let y = t.pi_at_level(1).unwrap();
        let lhs = &(&(&y * &y) + &y.scale(2)) + &r.from_i64(2);
        assert!(lhs.is_zero());
    }

    #[test]
    fn definition_violations() {
        let base = LocalRing::base(2, 6).unwrap();
        let bad = PhiIterate::new(&base, int_poly(&[0, 1, 1]), int_poly(&[2]));
        assert!(matches!(bad, Err(Error::NotEisenstein(_))));
        let it = kummer(2, 6).unwrap();
        assert!(matches!(build_tower(&it, 4), Err(Error::DepthBudgetExceeded { .. })));
    }

    #[test]
    fn linearize_small_example() {
        let r = LocalRing::base(2, 12).unwrap();
        let fr = vec![r.from_i64(2), r.from_i64(1)];
        let a = linearize(&fr, 3).unwrap();
        // a_2 = −1/2, a_3 = 1/3
        assert_eq!(a[1].den, 1);
        assert!(a[1].num.eq_at(&r.from_i64(-1), a[1].num.prec()));
        let three_a3 = a[2].num.scale(3);
        assert!(three_a3.eq_at(&r.from_i64(1).scale(1 << a[2].den), three_a3.prec()));
        let res = linearization_residual(&fr, &a, 3).unwrap();
        assert!(res.iter().all(|c| c.is_zero()));
        assert_eq!(linearize(&[r.zero(), r.one()], 3).unwrap_err(), Error::ZeroLinearTerm);
        assert_eq!(linearize(&[r.from_i64(-1), r.one()], 3).unwrap_err(), Error::ResonanceDivisionByZero { j: 3 });
    }
}
