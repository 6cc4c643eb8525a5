//! Truncated arithmetic in towers of local rings over `Z_p`.
//!
//! A tower is a list of levels, each a monic polynomial over the level below
//! flagged as unramified or Eisenstein. Elements are stored in the nested power
//! basis `y_1^{i_1} y_2^{i_2} ...`; this basis is adapted to the valuation, so
//! coefficient `i` only needs to be kept modulo `p^{m_i}` with `m_i` determined
//! by the valuation of the `i`-th basis monomial.
//!
//! Precision is always counted in units of the top uniformizer: an element of
//! precision `n` is known modulo the ideal generated by its `n`-th power.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::{Int, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelKind {
    Unramified,
    Eisenstein,
}

/// A polynomial coefficient in a ring descriptor: a plain integer, or a flat
/// coefficient vector in the power basis of the level below.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefDoc {
    Scalar(Int),
    Vector(Vec<Int>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDoc {
    pub poly: Vec<CoefDoc>,
    pub uniformizer: Vec<Int>,
    pub kind: LevelKind,
}

/// Ring description document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingDoc {
    pub prime: u64,
    pub precision: u32,
    pub levels: Vec<LevelDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Level {
    kind: LevelKind,
    degree: usize,
    poly: Vec<Vec<BigInt>>,
    uniformizer: Vec<BigInt>,
}

struct ModData {
    modulus: u64,
    pows: Vec<u64>,
    polys: Vec<Vec<Vec<u64>>>,
    eta_inv: OnceLock<Vec<u64>>,
}

pub struct Tower {
    p: u64,
    levels: Vec<Level>,
    dims: Vec<usize>,
    basis_val: Vec<u32>,
    e: u32,
    f: u32,
    mods: Mutex<HashMap<u32, Arc<ModData>>>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.levels == other.levels
    }
}

impl Eq for Tower {}

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tower")
            .field("p", &self.p)
            .field("degrees", &self.levels.iter().map(|l| l.degree).collect::<Vec<_>>())
            .field("e", &self.e)
            .field("f", &self.f)
            .finish()
    }
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn reduce_big(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().unwrap()
}

impl Tower {
    fn build(p: u64, levels: Vec<Level>) -> Tower {
        let mut dims = vec![1usize];
        for l in &levels {
            dims.push(dims.last().unwrap() * l.degree);
        }
        let mut e_upto = vec![1u32];
        let mut f = 1u32;
        for l in &levels {
            let last = *e_upto.last().unwrap();
            match l.kind {
                LevelKind::Eisenstein => e_upto.push(last * l.degree as u32),
                LevelKind::Unramified => {
                    e_upto.push(last);
                    f *= l.degree as u32;
                }
            }
        }
        let e = *e_upto.last().unwrap();
        let n = *dims.last().unwrap();
        let basis_val = (0..n)
            .map(|idx| {
                let mut v = 0;
                for (k, l) in levels.iter().enumerate() {
                    let i = (idx / dims[k]) % l.degree;
                    if l.kind == LevelKind::Eisenstein {
                        v += i as u32 * (e / e_upto[k + 1]);
                    }
                }
                v
            })
            .collect();
        Tower { p, levels, dims, basis_val, e, f, mods: Mutex::new(HashMap::new()) }
    }

    fn mod_data(&self, digits: u32) -> Result<Arc<ModData>> {
        let mut cache = self.mods.lock().unwrap();
        if let Some(m) = cache.get(&digits) {
            return Ok(m.clone());
        }
        let mut pows = vec![1u64];
        for _ in 0..digits {
            let next = pows.last().unwrap().checked_mul(self.p).filter(|v| *v < (1u64 << 62));
            match next {
                Some(v) => pows.push(v),
                None => return Err(Error::PrecisionTooLarge { p: self.p, digits }),
            }
        }
        let modulus = pows[digits as usize];
        let polys = self
            .levels
            .iter()
            .map(|l| l.poly.iter().map(|c| c.iter().map(|x| reduce_big(x, modulus)).collect()).collect())
            .collect();
        let md = Arc::new(ModData { modulus, pows, polys, eta_inv: OnceLock::new() });
        cache.insert(digits, md.clone());
        Ok(md)
    }

    fn sub(&self, k: usize) -> Tower {
        Tower::build(self.p, self.levels[..k].to_vec())
    }
}

/// A tower of local rings at a fixed precision.
#[derive(Clone)]
pub struct LocalRing(Arc<RingInner>);

struct RingInner {
    tower: Arc<Tower>,
    prec: u32,
    md: Arc<ModData>,
}

impl PartialEq for LocalRing {
    fn eq(&self, other: &Self) -> bool {
        self.0.prec == other.0.prec && self.same_tower(other)
    }
}

impl Eq for LocalRing {}

impl fmt::Debug for LocalRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalRing({:?}, prec={})", self.0.tower, self.0.prec)
    }
}

/// Valuation in units of the top uniformizer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Exact(Rat),
    AtLeast(Rat),
}

impl Valuation {
    pub fn exact(&self) -> Option<&Rat> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }

    /// The valuation, or its lower bound when the element is indistinguishable from zero.
    pub fn lower_bound(&self) -> &Rat {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn scaled(&self, by: &Rat) -> Valuation {
        match self {
            Valuation::Exact(v) => Valuation::Exact(v * by),
            Valuation::AtLeast(v) => Valuation::AtLeast(v * by),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

/// Element of the residue field, as coordinates over `F_p` in the inertia basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueElt(pub Vec<u64>);

impl LocalRing {
    fn from_tower(tower: Arc<Tower>, prec: u32) -> Result<LocalRing> {
        let digits = prec.div_ceil(tower.e).max(1);
        let md = tower.mod_data(digits)?;
        Ok(LocalRing(Arc::new(RingInner { tower, prec, md })))
    }

    /// Unextended `Z_p` at `digits` p-adic digits.
    pub fn base(p: u64, digits: u32) -> Result<LocalRing> {
        Self::from_tower(Arc::new(Tower::build(p, Vec::new())), digits)
    }

    pub fn p(&self) -> u64 {
        self.0.tower.p
    }

    /// Absolute ramification index over `Q_p`.
    pub fn e(&self) -> u32 {
        self.0.tower.e
    }

    /// Absolute inertia degree over `Q_p`.
    pub fn f(&self) -> u32 {
        self.0.tower.f
    }

    /// Cardinality of the residue field.
    pub fn residue_card(&self) -> u64 {
        self.p().pow(self.f())
    }

    pub fn dim(&self) -> usize {
        *self.0.tower.dims.last().unwrap()
    }

    pub fn num_levels(&self) -> usize {
        self.0.tower.levels.len()
    }

    pub fn level_degree(&self, k: usize) -> usize {
        self.0.tower.levels[k].degree
    }

    pub fn level_kind(&self, k: usize) -> LevelKind {
        self.0.tower.levels[k].kind
    }

    /// Flat dimension of the subring made of the first `k` levels.
    pub fn sub_dim(&self, k: usize) -> usize {
        self.0.tower.dims[k]
    }

    /// Precision in units of the top uniformizer.
    pub fn prec(&self) -> u32 {
        self.0.prec
    }

    /// Number of p-adic digits stored per coefficient.
    pub fn digits(&self) -> u32 {
        self.0.md.pows.len() as u32 - 1
    }

    pub fn modulus(&self) -> u64 {
        self.0.md.modulus
    }

    pub fn basis_valuations(&self) -> &[u32] {
        &self.0.tower.basis_val
    }

    pub fn same_tower(&self, other: &LocalRing) -> bool {
        Arc::ptr_eq(&self.0.tower, &other.0.tower) || *self.0.tower == *other.0.tower
    }

    pub fn with_prec(&self, prec: u32) -> Result<LocalRing> {
        if prec == self.0.prec {
            return Ok(self.clone());
        }
        Self::from_tower(self.0.tower.clone(), prec)
    }

    /// The ring made of the first `k` levels, at the same number of digits.
    pub fn sub_ring(&self, k: usize) -> Result<LocalRing> {
        if k == self.num_levels() {
            return Ok(self.clone());
        }
        let t = Arc::new(self.0.tower.sub(k));
        let prec = self.digits() * t.e;
        Self::from_tower(t, prec)
    }

    /// The quotient by the maximal ideal.
    pub fn residue_ring(&self) -> Result<LocalRing> {
        self.with_prec(1)
    }

    /// Ramification index of this ring over its subring of `k` levels.
    pub fn rel_e(&self, k: usize) -> u32 {
        let t = &self.0.tower;
        t.levels[k..].iter().filter(|l| l.kind == LevelKind::Eisenstein).map(|l| l.degree as u32).product()
    }

    fn m_for(&self, i: usize, prec: u32) -> u32 {
        let v = self.0.tower.basis_val[i];
        if prec > v {
            (prec - v).div_ceil(self.e())
        } else {
            0
        }
    }

    fn truncate(&self, c: &mut [u64], prec: u32) {
        let pows = &self.0.md.pows;
        for (i, x) in c.iter_mut().enumerate() {
            let m = self.m_for(i, prec);
            *x %= pows[m as usize];
        }
    }

    fn elt(&self, mut c: Vec<u64>, prec: u32) -> RingElt {
        let prec = prec.min(self.prec());
        self.truncate(&mut c, prec);
        RingElt { ring: self.clone(), c, prec }
    }

    pub fn zero(&self) -> RingElt {
        self.elt(vec![0; self.dim()], self.prec())
    }

    pub fn one(&self) -> RingElt {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> RingElt {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> RingElt {
        let mut c = vec![0; self.dim()];
        c[0] = reduce_big(v, self.modulus());
        self.elt(c, self.prec())
    }

    /// Element from exact flat coordinates (missing trailing entries are zero).
    pub fn from_coeffs(&self, coeffs: &[BigInt]) -> Result<RingElt> {
        if coeffs.len() > self.dim() {
            return Err(Error::Malformed(format!(
                "{} coordinates for a ring of dimension {}",
                coeffs.len(),
                self.dim()
            )));
        }
        let mut c = vec![0; self.dim()];
        for (x, v) in c.iter_mut().zip(coeffs) {
            *x = reduce_big(v, self.modulus());
        }
        Ok(self.elt(c, self.prec()))
    }

    pub fn from_i64s(&self, coeffs: &[i64]) -> Result<RingElt> {
        self.from_coeffs(&coeffs.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>())
    }

    /// Element from stored residues and an explicit known precision.
    pub fn from_raw(&self, c: Vec<u64>, prec: u32) -> Result<RingElt> {
        if c.len() != self.dim() {
            return Err(Error::Malformed(format!("expected {} coordinates, got {}", self.dim(), c.len())));
        }
        let m = self.modulus();
        Ok(self.elt(c.into_iter().map(|x| x % m).collect(), prec))
    }

    /// The generator `y_k` of level `k` (0-based).
    pub fn generator(&self, k: usize) -> RingElt {
        let mut c = vec![0; self.dim()];
        if self.0.tower.levels[k].degree > 1 {
            c[self.0.tower.dims[k]] = 1;
        } else {
            let root = -&self.0.tower.levels[k].poly[0][0];
            c[0] = reduce_big(&root, self.modulus());
        }
        self.elt(c, self.prec())
    }

    /// The designated uniformizer of level `k`, embedded in this ring.
    pub fn level_uniformizer(&self, k: usize) -> RingElt {
        let u = &self.0.tower.levels[k].uniformizer;
        self.from_coeffs(u).expect("uniformizer fits its level")
    }

    /// The designated uniformizer of the top level (`p` for the bare base ring).
    pub fn uniformizer(&self) -> RingElt {
        match self.num_levels() {
            0 => self.from_i64(self.p() as i64),
            n => self.level_uniformizer(n - 1),
        }
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> RingElt {
        let c = (0..self.dim()).map(|i| {
            let m = self.m_for(i, self.prec());
            rng.gen_range(0..self.0.md.pows[m as usize])
        });
        self.elt(c.collect(), self.prec())
    }

    /// Random element of the subring made of the first `k` levels, embedded here.
    pub fn random_in_sub<R: Rng>(&self, k: usize, rng: &mut R) -> RingElt {
        let mut x = self.random(rng);
        for v in x.c[self.sub_dim(k)..].iter_mut() {
            *v = 0;
        }
        x
    }

    fn mul_flat(&self, k: usize, a: &[u64], b: &[u64]) -> Vec<u64> {
        let m = self.0.md.modulus;
        if k == 0 {
            return vec![mulmod(a[0], b[0], m)];
        }
        let t = &self.0.tower;
        let n = t.dims[k - 1];
        let d = t.levels[k - 1].degree;
        let mut acc = vec![0u64; (2 * d - 1) * n];
        for i in 0..d {
            let ai = &a[i * n..(i + 1) * n];
            if ai.iter().all(|&x| x == 0) {
                continue;
            }
            for j in 0..d {
                let bj = &b[j * n..(j + 1) * n];
                if bj.iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.mul_flat(k - 1, ai, bj);
                for (s, x) in acc[(i + j) * n..(i + j + 1) * n].iter_mut().zip(prod) {
                    *s = (*s + x) % m;
                }
            }
        }
        let poly = &self.0.md.polys[k - 1];
        for j in (d..2 * d - 1).rev() {
            let lead: Vec<u64> = acc[j * n..(j + 1) * n].to_vec();
            if lead.iter().all(|&x| x == 0) {
                continue;
            }
            for (mi, pm) in poly.iter().take(d).enumerate() {
                if pm.iter().all(|&x| x == 0) {
                    continue;
                }
                let prod = self.mul_flat(k - 1, &lead, pm);
                let off = (j - d + mi) * n;
                for (s, x) in acc[off..off + n].iter_mut().zip(prod) {
                    *s = (*s + m - x) % m;
                }
            }
        }
        acc.truncate(d * n);
        acc
    }

    fn eta_inv(&self) -> Result<RingElt> {
        let md = &self.0.md;
        if let Some(c) = md.eta_inv.get() {
            return Ok(self.elt(c.clone(), self.prec()));
        }
        let digits = self.digits();
        let e = self.e();
        let full = Self::from_tower(self.0.tower.clone(), digits * e)?;
        let eta = if self.num_levels() == 0 {
            full.one()
        } else {
            let up = Self::from_tower(self.0.tower.clone(), (digits + 1) * e)?;
            let pe = up.uniformizer().pow(e as u64);
            pe.divide_by_p(1)?.cast(&full)?
        };
        let inv = eta.inverse()?;
        let _ = md.eta_inv.set(inv.c.clone());
        inv.cast(self)
    }
}

/// Element of a [`LocalRing`] with tracked known precision.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElt {
    ring: LocalRing,
    c: Vec<u64>,
    prec: u32,
}

impl fmt::Debug for RingElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + O({})", self.c, self.prec)
    }
}

impl RingElt {
    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    /// Coordinates as signed integers of least absolute value.
    pub fn signed_coeffs(&self) -> Vec<BigInt> {
        let r = &self.ring;
        self.c
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let m = r.0.md.pows[r.m_for(i, self.prec) as usize];
                if x > m / 2 {
                    BigInt::from(x) - BigInt::from(m)
                } else {
                    BigInt::from(x)
                }
            })
            .collect()
    }

    /// Known precision, in units of the top uniformizer.
    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// True when the element is zero modulo its known precision.
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Valuation in top units, or `None` when indistinguishable from zero.
    pub fn val(&self) -> Option<u32> {
        let p = self.ring.p();
        let e = self.ring.e();
        let bv = self.ring.basis_valuations();
        self.c
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0)
            .map(|(i, &x)| {
                let mut vp = 0;
                let mut y = x;
                while y % p == 0 {
                    y /= p;
                    vp += 1;
                }
                vp * e + bv[i]
            })
            .min()
    }

    /// Lower bound for the valuation: exact value or known precision.
    pub fn val_lb(&self) -> u32 {
        self.val().unwrap_or(self.prec)
    }

    pub fn valuation(&self) -> Valuation {
        match self.val() {
            Some(v) => Valuation::Exact(Rat::from_integer(BigInt::from(v))),
            None => Valuation::AtLeast(Rat::from_integer(BigInt::from(self.prec))),
        }
    }

    /// True when `self` and `other` agree modulo the `n`-th power of the top uniformizer.
    pub fn eq_at(&self, other: &RingElt, n: u32) -> bool {
        let d = self - other;
        d.val().is_none_or(|v| v >= n)
    }

    /// Copy with known precision lowered to `prec`.
    pub fn reduce(&self, prec: u32) -> RingElt {
        self.ring.elt(self.c.clone(), prec.min(self.prec))
    }

    /// Same element in another precision of the same tower; lifting pads with zero digits.
    pub fn cast(&self, ring: &LocalRing) -> Result<RingElt> {
        if !self.ring.same_tower(ring) {
            return Err(Error::RingMismatch);
        }
        let m = ring.modulus();
        Ok(ring.elt(self.c.iter().map(|&x| x % m).collect(), self.prec))
    }

    /// Same representative, treated as exact in `ring` (an arbitrary lift).
    pub fn lift_exact(&self, ring: &LocalRing) -> Result<RingElt> {
        if !self.ring.same_tower(ring) {
            return Err(Error::RingMismatch);
        }
        let m = ring.modulus();
        Ok(ring.elt(self.c.iter().map(|&x| x % m).collect(), ring.prec()))
    }

    /// Embed an element of a prefix subring into `big`.
    pub fn embed(&self, big: &LocalRing) -> Result<RingElt> {
        let k = self.ring.num_levels();
        if k > big.num_levels() || self.ring.0.tower.levels[..] != big.0.tower.levels[..k] || self.ring.p() != big.p() {
            return Err(Error::RingMismatch);
        }
        let scale = big.rel_e(k);
        let mut c = vec![0; big.dim()];
        let m = big.modulus();
        for (x, &y) in c.iter_mut().zip(&self.c) {
            *x = y % m;
        }
        let prec = (self.prec * scale).min(big.prec());
        Ok(big.elt(c, prec))
    }

    /// Coordinates outside the first `k` levels, which vanish for elements of that subring.
    pub fn outside_sub(&self, k: usize) -> &[u64] {
        &self.c[self.ring.sub_dim(k)..]
    }

    /// Project onto the subring of `k` levels, dropping coordinates outside it.
    pub fn restrict(&self, sub: &LocalRing) -> Result<RingElt> {
        let k = sub.num_levels();
        if k > self.ring.num_levels() || self.ring.0.tower.levels[..k] != sub.0.tower.levels[..] {
            return Err(Error::RingMismatch);
        }
        let scale = self.ring.rel_e(k);
        let digits_known = self.prec / self.ring.e();
        let prec = (digits_known * sub.e()).max(self.prec / scale).min(sub.prec());
        let m = sub.modulus();
        let c = self.c[..sub.dim()].iter().map(|&x| x % m).collect();
        Ok(sub.elt(c, prec))
    }

    fn check_ring(&self, other: &RingElt) {
        assert!(self.ring == other.ring || self.ring.same_tower(&other.ring), "ring mismatch in arithmetic");
    }

    fn target_ring<'a>(&'a self, other: &'a RingElt) -> &'a LocalRing {
        if self.ring.prec() >= other.ring.prec() {
            &self.ring
        } else {
            &other.ring
        }
    }

    fn add_impl(&self, other: &RingElt, neg: bool) -> RingElt {
        self.check_ring(other);
        let ring = self.target_ring(other);
        let m = ring.modulus();
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| {
                let (a, b) = (a % m, b % m);
                if neg {
                    (a + m - b) % m
                } else {
                    (a + b) % m
                }
            })
            .collect();
        ring.elt(c, self.prec.min(other.prec))
    }

    pub fn neg(&self) -> RingElt {
        let m = self.ring.modulus();
        let c = self.c.iter().map(|&a| (m - a) % m).collect();
        self.ring.elt(c, self.prec)
    }

    pub fn mul_elt(&self, other: &RingElt) -> RingElt {
        self.check_ring(other);
        let ring = self.target_ring(other);
        let m = ring.modulus();
        let a: Vec<u64> = self.c.iter().map(|&x| x % m).collect();
        let b: Vec<u64> = other.c.iter().map(|&x| x % m).collect();
        let c = ring.mul_flat(ring.num_levels(), &a, &b);
        let prec = (self.prec.saturating_add(other.val_lb())).min(other.prec.saturating_add(self.val_lb()));
        ring.elt(c, prec)
    }

    pub fn scale(&self, k: i64) -> RingElt {
        self.mul_elt(&self.ring.from_i64(k))
    }

    pub fn pow(&self, mut n: u64) -> RingElt {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_elt(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_elt(&base);
            }
        }
        acc
    }

    /// Exact division by `p^a`, coefficient by coefficient.
    pub fn divide_by_p(&self, a: u32) -> Result<RingElt> {
        let e = self.ring.e();
        if let Some(v) = self.val() {
            if v < a * e {
                return Err(Error::NotDivisible { valuation: v.to_string(), k: a * e });
            }
        }
        let pa = self.ring.p().pow(a);
        let c = self.c.iter().map(|&x| x / pa).collect();
        Ok(self.ring.elt(c, self.prec.saturating_sub(a * e)))
    }

    fn divide_once(&self) -> Result<RingElt> {
        let ring = &self.ring;
        let e = ring.e();
        if e == 1 {
            return self.divide_by_p(1);
        }
        let up = ring.with_prec(ring.prec() + e)?;
        let z = self.cast(&up)?;
        let w = z.mul_elt(&up.uniformizer().pow(e as u64 - 1));
        let w = w.divide_by_p(1)?;
        let r = w.mul_elt(&up.eta_inv()?);
        r.cast(ring)
    }

    /// Divide by the `k`-th power of the top uniformizer; precision drops by `k`.
    pub fn exact_divide(&self, k: u32) -> Result<RingElt> {
        if let Some(v) = self.val() {
            if v < k {
                return Err(Error::NotDivisible { valuation: v.to_string(), k });
            }
        } else {
            let prec = self.prec.saturating_sub(k);
            return Ok(self.ring.elt(vec![0; self.ring.dim()], prec));
        }
        let e = self.ring.e();
        let (a, b) = (k / e, k % e);
        let mut z = self.divide_by_p(a)?;
        if a > 0 && e > 1 {
            z = z.mul_elt(&self.ring.eta_inv()?.pow(a as u64));
        }
        for _ in 0..b {
            z = z.divide_once()?;
        }
        Ok(z)
    }

    /// Multiplicative inverse of a unit.
    pub fn inverse(&self) -> Result<RingElt> {
        if self.val() != Some(0) {
            return Err(Error::NotDivisible { valuation: self.valuation().to_string(), k: 0 });
        }
        let q = self.ring.residue_card();
        let mut x = self.pow(q - 2);
        let two = self.ring.from_i64(2);
        for _ in 0..64 {
            let ux = self.mul_elt(&x);
            if ux.eq_at(&self.ring.one(), self.prec) {
                return Ok(x.reduce(self.prec));
            }
            x = x.mul_elt(&(&two - &ux));
        }
        unreachable!("Newton iteration for a unit inverse converges quadratically")
    }

    /// Exact division by a nonzero element.
    pub fn divide_by(&self, d: &RingElt) -> Result<RingElt> {
        let v = d
            .val()
            .ok_or_else(|| Error::PrecisionExhausted("divisor is indistinguishable from zero".into()))?;
        let unit = d.exact_divide(v)?;
        let z = self.exact_divide(v)?;
        Ok(z.mul_elt(&unit.inverse()?))
    }

    /// Image in the residue field, as `F_p` coordinates in the inertia basis.
    pub fn residue(&self) -> ResidueElt {
        let p = self.ring.p();
        let bv = self.ring.basis_valuations();
        ResidueElt(self.c.iter().zip(bv).filter(|(_, &v)| v == 0).map(|(&x, _)| x % p).collect())
    }

    /// Field norm down to the subring made of the first `target` levels.
    pub fn norm_down(&self, target: usize) -> Result<RingElt> {
        let mut z = self.clone();
        while z.ring.num_levels() > target {
            z = z.norm_one_level()?;
        }
        Ok(z)
    }

    fn norm_one_level(&self) -> Result<RingElt> {
        let ring = &self.ring;
        let k = ring.num_levels();
        let digits = self.prec / ring.e();
        if digits == 0 {
            return Err(Error::PrecisionExhausted("norm of an element with less than one digit".into()));
        }
        let sub_t = Arc::new(ring.0.tower.sub(k - 1));
        let sub = LocalRing::from_tower(sub_t.clone(), digits * sub_t.e)?;
        let d = ring.level_degree(k - 1);
        let n = ring.sub_dim(k - 1);
        let y = ring.generator(k - 1);
        let mut cols = vec![self.clone()];
        for _ in 1..d {
            let next = cols.last().unwrap().mul_elt(&y);
            cols.push(next);
        }
        let entry = |i: usize, j: usize| -> RingElt {
            let m = sub.modulus();
            let c = cols[j].c[i * n..(i + 1) * n].iter().map(|&x| x % m).collect();
            sub.elt(c, sub.prec())
        };
        let mat: Vec<Vec<RingElt>> = (0..d).map(|i| (0..d).map(|j| entry(i, j)).collect()).collect();
        Ok(det(&sub, &mat))
    }
}

/// Determinant by Laplace expansion with memoisation over column subsets.
pub fn det(ring: &LocalRing, mat: &[Vec<RingElt>]) -> RingElt {
    let d = mat.len();
    let mut dp: Vec<Option<RingElt>> = vec![None; 1 << d];
    dp[0] = Some(ring.one());
    for mask in 1usize..(1 << d) {
        let r = mask.count_ones() as usize - 1;
        let mut acc = ring.zero();
        for j in 0..d {
            if mask & (1 << j) == 0 {
                continue;
            }
            let above = (mask >> (j + 1)).count_ones();
            let term = mat[r][j].mul_elt(dp[mask ^ (1 << j)].as_ref().unwrap());
            acc = if above % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        dp[mask] = Some(acc);
    }
    dp[(1 << d) - 1].take().unwrap()
}

impl std::ops::Add for &RingElt {
    type Output = RingElt;
    fn add(self, o: &RingElt) -> RingElt {
        self.add_impl(o, false)
    }
}

impl std::ops::Sub for &RingElt {
    type Output = RingElt;
    fn sub(self, o: &RingElt) -> RingElt {
        self.add_impl(o, true)
    }
}

impl std::ops::Mul for &RingElt {
    type Output = RingElt;
    fn mul(self, o: &RingElt) -> RingElt {
        self.mul_elt(o)
    }
}

impl std::ops::Neg for &RingElt {
    type Output = RingElt;
    fn neg(self) -> RingElt {
        RingElt::neg(self)
    }
}

/// Evaluate a polynomial with coefficients in the ring (constant term first).
pub fn eval_poly(coeffs: &[RingElt], x: &RingElt) -> RingElt {
    let mut acc = x.ring().zero();
    for c in coeffs.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

/// Lift a residue-field element to its multiplicative (Teichmüller) representative.
pub fn teichmuller_unit(ring: &LocalRing, r: &ResidueElt) -> Result<RingElt> {
    let bv = ring.basis_valuations();
    let idx: Vec<usize> = (0..ring.dim()).filter(|&i| bv[i] == 0).collect();
    if idx.len() != r.0.len() {
        return Err(Error::Malformed(format!("residue has {} coordinates, expected {}", r.0.len(), idx.len())));
    }
    let mut c = vec![0; ring.dim()];
    for (&i, &x) in idx.iter().zip(&r.0) {
        c[i] = x % ring.p();
    }
    let mut x = ring.elt(c, ring.prec());
    let q = ring.residue_card();
    for _ in 0..=ring.prec() {
        let y = x.pow(q);
        if y == x {
            return Ok(x);
        }
        x = y;
    }
    Ok(x)
}

fn level_from_doc(doc: &LevelDoc, lower_dim: usize, dim_here: usize, k: usize) -> Result<Level> {
    if doc.poly.len() < 2 {
        return Err(Error::Malformed(format!("level {k}: polynomial of degree < 1")));
    }
    let poly = doc
        .poly
        .iter()
        .map(|c| {
            let v: Vec<BigInt> = match c {
                CoefDoc::Scalar(x) => vec![x.0.clone()],
                CoefDoc::Vector(v) => v.iter().map(|x| x.0.clone()).collect(),
            };
            if v.len() > lower_dim {
                return Err(Error::Malformed(format!("level {k}: coefficient longer than the level below")));
            }
            let mut v = v;
            v.resize(lower_dim, BigInt::zero());
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    if doc.uniformizer.len() > dim_here {
        return Err(Error::Malformed(format!("level {k}: uniformizer longer than the level")));
    }
    let mut uniformizer: Vec<BigInt> = doc.uniformizer.iter().map(|x| x.0.clone()).collect();
    uniformizer.resize(dim_here, BigInt::zero());
    Ok(Level { kind: doc.kind, degree: doc.poly.len() - 1, poly, uniformizer })
}

/// Validate a ring description and build the ring at `precision` p-adic digits.
pub fn make_ring(doc: &RingDoc) -> Result<LocalRing> {
    if doc.precision < 2 {
        return Err(Error::PrecisionTooSmall(doc.precision));
    }
    let p = doc.prime;
    if p < 2 || !BigInt::from(p).is_prime_small() {
        return Err(Error::Malformed(format!("{p} is not a prime")));
    }
    let mut levels: Vec<Level> = Vec::new();
    let mut lower = LocalRing::base(p, doc.precision)?;
    for (k, ld) in doc.levels.iter().enumerate() {
        let lower_dim = lower.dim();
        let level = level_from_doc(ld, lower_dim, lower_dim * (ld.poly.len().max(2) - 1), k)?;
        let d = level.degree;
        let lead = &level.poly[d];
        if !(lead[0].is_one() && lead[1..].iter().all(|x| x.is_zero())) {
            return Err(Error::NonMonic { level: k });
        }
        let coeffs: Vec<RingElt> =
            level.poly.iter().map(|c| lower.from_coeffs(c)).collect::<Result<Vec<_>>>()?;
        match level.kind {
            LevelKind::Eisenstein => {
                let ok = coeffs[..d].iter().all(|c| c.val_lb() >= 1) && coeffs[0].val() == Some(1);
                if !ok {
                    return Err(Error::NotEisenstein(format!("level {k}: polynomial is not Eisenstein")));
                }
            }
            LevelKind::Unramified => {
                if !irreducible_mod_m(&lower, &coeffs)? {
                    return Err(Error::NotUnramified { level: k });
                }
            }
        }
        levels.push(level);
        let tower = Arc::new(Tower::build(p, levels.clone()));
        let ring = LocalRing::from_tower(tower.clone(), doc.precision * tower.e)?;
        let u = ring.level_uniformizer(k);
        let v = u.val().map(|v| v / ring.rel_e(k + 1));
        let exact_one = u.val() == Some(ring.rel_e(k + 1));
        if !exact_one {
            let shown = match v {
                Some(_) => Rat::new(BigInt::from(u.val().unwrap()), BigInt::from(ring.rel_e(k + 1))).to_string(),
                None => "infinite".to_string(),
            };
            return Err(Error::UniformizerNotValuationOne { level: k, valuation: shown });
        }
        lower = ring;
    }
    Ok(lower)
}

trait SmallPrime {
    fn is_prime_small(&self) -> bool;
}

impl SmallPrime for BigInt {
    fn is_prime_small(&self) -> bool {
        let n = match self.to_u64() {
            Some(n) => n,
            None => return false,
        };
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }
}

/// Descriptor of an existing ring, at `digits` p-adic digits.
pub fn ring_doc(ring: &LocalRing) -> RingDoc {
    let t = &ring.0.tower;
    RingDoc {
        prime: t.p,
        precision: ring.digits(),
        levels: t
            .levels
            .iter()
            .map(|l| LevelDoc {
                poly: l
                    .poly
                    .iter()
                    .map(|c| {
                        if c.len() == 1 {
                            CoefDoc::Scalar(Int(c[0].clone()))
                        } else {
                            CoefDoc::Vector(c.iter().cloned().map(Int).collect())
                        }
                    })
                    .collect(),
                uniformizer: trim_zeros(&l.uniformizer).into_iter().map(Int).collect(),
                kind: l.kind,
            })
            .collect(),
    }
}

fn trim_zeros(v: &[BigInt]) -> Vec<BigInt> {
    let mut v = v.to_vec();
    while v.len() > 1 && v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

// Polynomials over the residue field of `lower`, coefficients as ring elements of precision 1.

fn rf_trim(mut a: Vec<RingElt>) -> Vec<RingElt> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn rf_inv(c: &RingElt) -> RingElt {
    let q = c.ring().residue_card();
    c.pow(q - 2)
}

fn rf_rem(a: &[RingElt], b: &[RingElt]) -> Vec<RingElt> {
    let mut a = rf_trim(a.to_vec());
    let b = rf_trim(b.to_vec());
    let lead_inv = rf_inv(b.last().unwrap());
    while a.len() >= b.len() {
        let shift = a.len() - b.len();
        let factor = a.last().unwrap() * &lead_inv;
        for (i, bc) in b.iter().enumerate() {
            a[shift + i] = &a[shift + i] - &(&factor * bc);
        }
        a = rf_trim(a);
    }
    a
}

fn rf_mul_mod(a: &[RingElt], b: &[RingElt], m: &[RingElt], ring: &LocalRing) -> Vec<RingElt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    rf_rem(&out, m)
}

fn rf_pow_mod(base: &[RingElt], mut n: u64, m: &[RingElt], ring: &LocalRing) -> Vec<RingElt> {
    let mut acc = vec![ring.one()];
    let mut b = base.to_vec();
    while n > 0 {
        if n & 1 == 1 {
            acc = rf_mul_mod(&acc, &b, m, ring);
        }
        n >>= 1;
        if n > 0 {
            b = rf_mul_mod(&b, &b, m, ring);
        }
    }
    acc
}

fn rf_gcd_is_one(a: &[RingElt], b: &[RingElt]) -> bool {
    let mut a = rf_trim(a.to_vec());
    let mut b = rf_trim(b.to_vec());
    while !b.is_empty() {
        let r = rf_rem(&a, &b);
        a = b;
        b = r;
    }
    a.len() == 1
}

fn irreducible_mod_m(lower: &LocalRing, coeffs: &[RingElt]) -> Result<bool> {
    let rr = lower.residue_ring()?;
    let g: Vec<RingElt> = coeffs.iter().map(|c| c.cast(&rr)).collect::<Result<_>>()?;
    let d = g.len() - 1;
    let q = rr.residue_card();
    let x = vec![rr.zero(), rr.one()];
    let frob = |k: usize| {
        let mut t = x.clone();
        for _ in 0..k {
            t = rf_pow_mod(&t, q, &g, &rr);
        }
        t
    };
    let sub_x = |t: Vec<RingElt>| {
        let mut t = t;
        t.resize(2.max(t.len()), rr.zero());
        t[1] = &t[1] - &rr.one();
        rf_trim(t)
    };
    if !rf_trim(rf_rem(&sub_x(frob(d)), &g)).is_empty() {
        return Ok(false);
    }
    for r in (2..=d).filter(|r| d.is_multiple_of(*r) && (2..*r).all(|s| r % s != 0)) {
        if !rf_gcd_is_one(&sub_x(frob(d / r)), &g) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Absolute value sign helper used in reports.
pub fn is_negative(x: &BigInt) -> bool {
    x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eis(p: u64, poly: &[i64], m: u32) -> RingDoc {
        RingDoc {
            prime: p,
            precision: m,
            levels: vec![LevelDoc {
                poly: poly.iter().map(|&c| CoefDoc::Scalar(Int::from(c))).collect(),
                uniformizer: vec![Int::from(0), Int::from(1)],
                kind: LevelKind::Eisenstein,
            }],
        }
    }

    #[test]
    fn base_ring_and_quadratic() {
        let r = make_ring(&RingDoc { prime: 3, precision: 8, levels: vec![] }).unwrap();
        assert_eq!((r.e(), r.f()), (1, 1));
        assert_eq!(r.uniformizer(), r.from_i64(3));
        let r2 = make_ring(&eis(2, &[-2, 0, 1], 10)).unwrap();
        assert_eq!((r2.e(), r2.f()), (2, 1));
        assert_eq!(r2.from_i64(2).valuation(), Valuation::Exact(Rat::from_integer(2.into())));
    }

    #[test]
    fn uniformizer_normalization() {
        let mut doc = eis(3, &[-3, 0, 1], 8);
        doc.levels[0].uniformizer = vec![Int::from(3)];
        assert!(matches!(make_ring(&doc), Err(Error::UniformizerNotValuationOne { .. })));
        assert!(matches!(make_ring(&eis(3, &[-3, 0, 1], 1)), Err(Error::PrecisionTooSmall(1))));
        assert!(matches!(make_ring(&eis(3, &[-9, 0, 1], 4)), Err(Error::NotEisenstein(_))));
        assert!(matches!(make_ring(&eis(3, &[-3, 0, 2], 4)), Err(Error::NonMonic { .. })));
    }

    #[test]
    fn unramified_level_checks() {
        let doc = RingDoc {
            prime: 2,
            precision: 6,
            levels: vec![LevelDoc {
                poly: vec![CoefDoc::Scalar(1.into()), CoefDoc::Scalar(1.into()), CoefDoc::Scalar(1.into())],
                uniformizer: vec![Int::from(2)],
                kind: LevelKind::Unramified,
            }],
        };
        let r = make_ring(&doc).unwrap();
        assert_eq!((r.e(), r.f(), r.residue_card()), (1, 2, 4));
        let mut bad = doc.clone();
        bad.levels[0].poly = vec![CoefDoc::Scalar((-1).into()), CoefDoc::Scalar(0.into()), CoefDoc::Scalar(1.into())];
        assert!(matches!(make_ring(&bad), Err(Error::NotUnramified { .. })));
    }

    #[test]
    fn valuation_and_division() {
        let r = LocalRing::base(3, 8).unwrap();
        let z = r.from_i64(27 * 4);
        assert_eq!(z.val(), Some(3));
        assert_eq!(r.zero().valuation(), Valuation::AtLeast(Rat::from_integer(8.into())));
        assert_eq!(r.from_i64(6).exact_divide(1).unwrap(), r.from_i64(2).reduce(7));
        assert!(matches!(r.one().exact_divide(1), Err(Error::NotDivisible { .. })));
    }

    #[test]
    fn eisenstein_division_tracks_precision() {
        let r = make_ring(&eis(2, &[-2, 0, 1], 10)).unwrap();
        let y = r.uniformizer();
        let z = y.pow(5);
        let d = z.exact_divide(2).unwrap();
        assert_eq!(d.prec(), r.prec() - 2);
        assert!(d.eq_at(&y.pow(3), d.prec()));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let u = r.random(&mut rng);
            let k = rng.gen_range(0..8);
            let back = u.mul_elt(&y.pow(k)).exact_divide(k as u32).unwrap();
            assert!(back.eq_at(&u, back.prec()));
        }
    }

    #[test]
    fn residue_and_teichmuller() {
        let doc = RingDoc {
            prime: 3,
            precision: 6,
            levels: vec![LevelDoc {
                poly: vec![CoefDoc::Scalar(1.into()), CoefDoc::Scalar(0.into()), CoefDoc::Scalar(1.into())],
                uniformizer: vec![Int::from(3)],
                kind: LevelKind::Unramified,
            }],
        };
        let r = make_ring(&doc).unwrap();
        let g = ResidueElt(vec![1, 1]);
        let w = teichmuller_unit(&r, &g).unwrap();
        assert_eq!(w.residue(), g);
        assert_eq!(w.pow(9), w);
        let pi = r.uniformizer();
        assert_eq!(pi.residue(), ResidueElt(vec![0, 0]));
        assert_eq!((&r.one() + &pi).residue(), ResidueElt(vec![1, 0]));
    }

    #[test]
    fn constant_norm() {
        let r = make_ring(&eis(3, &[3, 3, 1], 8)).unwrap();
        let c = r.from_i64(5);
        let n = c.norm_down(0).unwrap();
        assert_eq!(n.coeffs()[0], 25);
    }
}
