//! Truncated π-typical Witt vectors over a [`LocalRing`].
//!
//! Ring operations evaluate cached universal polynomials when they fit the
//! generation budget. Otherwise they lift the inputs to a ring with enough extra
//! precision, combine ghost components there and invert the ghost map with exact
//! divisions; integrality of the universal polynomials makes both routes agree.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::{log_p, Int};
use crate::padic::{ring_doc, LocalRing, RingDoc, RingElt};
use crate::structure::{scalar_components, structure_polys, Coef, PiSymbol, PolyKind};

/// Default upper bound on Witt vector length.
pub const DEFAULT_MAX_LEN: usize = 5;

/// Ring endomorphism supplied by evaluation.
pub trait Endo: Send + Sync {
    fn apply(&self, x: &RingElt) -> RingElt;
}

/// Endomorphism `x ↦ φ(x)` for a polynomial `φ` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyEndo {
    pub coeffs: Vec<BigInt>,
}

impl PolyEndo {
    pub fn new(coeffs: Vec<BigInt>) -> PolyEndo {
        PolyEndo { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> PolyEndo {
        PolyEndo { coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect() }
    }

    /// `x ↦ x^q`.
    pub fn power(q: u64) -> PolyEndo {
        let mut coeffs = vec![BigInt::zero(); q as usize + 1];
        coeffs[q as usize] = BigInt::one();
        PolyEndo { coeffs }
    }
}

impl Endo for PolyEndo {
    fn apply(&self, x: &RingElt) -> RingElt {
        let ring = x.ring();
        let mut acc = ring.zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + &ring.from_bigint(c);
        }
        acc
    }
}

struct Term {
    vars: Vec<(usize, u16)>,
    coef: RingElt,
}

struct Compiled {
    polys: Vec<Vec<Term>>,
}

struct WittInner {
    ring: LocalRing,
    q: u64,
    pi: PiSymbol,
    pi_img: Vec<BigInt>,
    v_pi: u32,
    max_len: usize,
    compiled: Mutex<HashMap<(PolyKind, usize, u32), Arc<Compiled>>>,
}

/// Witt vectors `W_π(R)` for a ring `R`, a Frobenius degree `q` and a uniformizer `π` of `O_F`.
#[derive(Clone)]
pub struct WittRing(Arc<WittInner>);

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WittRing(q={}, pi={:?}, {:?})", self.0.q, self.0.pi.poly(), self.0.ring)
    }
}

impl PartialEq for WittRing {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
            || (self.0.ring == o.0.ring && self.0.q == o.0.q && self.0.pi == o.0.pi && self.0.pi_img == o.0.pi_img)
    }
}

impl Eq for WittRing {}

impl WittRing {
    /// `π = p`.
    pub fn new(ring: &LocalRing, q: u64) -> Result<WittRing> {
        let p = ring.p();
        Self::with_pi(ring, q, PiSymbol::prime(p), vec![BigInt::from(p)])
    }

    /// `π` a root of an Eisenstein polynomial, sent to the ring element with flat coordinates `image`.
    pub fn with_pi(ring: &LocalRing, q: u64, pi: PiSymbol, image: Vec<BigInt>) -> Result<WittRing> {
        let p = ring.p();
        if pi.p() != p || log_p(q, p).is_none() {
            return Err(Error::Malformed(format!("q = {q} is not a power of p = {p}")));
        }
        let e_f = pi.e() as u32;
        if !ring.e().is_multiple_of(e_f) {
            return Err(Error::Malformed("O_F does not embed: ramification indices are incompatible".into()));
        }
        let v_pi = ring.e() / e_f;
        let wide = ring.with_prec(ring.digits().max(2) * ring.e() + ring.e())?;
        let img = wide.from_coeffs(&image)?;
        if img.val() != Some(v_pi) {
            return Err(Error::UniformizerNotValuationOne { level: ring.num_levels(), valuation: img.valuation().to_string() });
        }
        let coeffs: Vec<RingElt> = pi.poly().iter().map(|c| wide.from_bigint(c)).collect();
        if !crate::padic::eval_poly(&coeffs, &img).is_zero() {
            return Err(Error::Malformed("image of pi is not a root of its minimal polynomial".into()));
        }
        let mut pi_img = image;
        pi_img.resize(ring.dim(), BigInt::zero());
        Ok(WittRing(Arc::new(WittInner {
            ring: ring.clone(),
            q,
            pi,
            pi_img,
            v_pi,
            max_len: DEFAULT_MAX_LEN,
            compiled: Mutex::new(HashMap::new()),
        })))
    }

    /// Same data over a different precision of the same tower.
    pub fn over(&self, ring: &LocalRing) -> Result<WittRing> {
        if !ring.same_tower(&self.0.ring) {
            return Err(Error::RingMismatch);
        }
        if *ring == self.0.ring {
            return Ok(self.clone());
        }
        Ok(WittRing(Arc::new(WittInner {
            ring: ring.clone(),
            q: self.0.q,
            pi: self.0.pi.clone(),
            pi_img: self.0.pi_img.clone(),
            v_pi: self.0.v_pi,
            max_len: self.0.max_len,
            compiled: Mutex::new(HashMap::new()),
        })))
    }

    /// The residue ring `R/π`.
    pub fn residue(&self) -> Result<WittRing> {
        self.over(&self.0.ring.with_prec(self.0.v_pi)?)
    }

    pub fn ring(&self) -> &LocalRing {
        &self.0.ring
    }

    pub fn q(&self) -> u64 {
        self.0.q
    }

    pub fn pi_symbol(&self) -> &PiSymbol {
        &self.0.pi
    }

    pub fn pi_image(&self) -> &[BigInt] {
        &self.0.pi_img
    }

    /// Valuation of `π` in units of the top uniformizer of the ring.
    pub fn v_pi(&self) -> u32 {
        self.0.v_pi
    }

    pub fn max_len(&self) -> usize {
        self.0.max_len
    }

    /// True when `π = 0` in the ring.
    pub fn is_char_p(&self) -> bool {
        self.0.ring.prec() <= self.0.v_pi
    }

    /// The image of `π` in `ring` (which must share the tower).
    pub fn pi_in(&self, ring: &LocalRing) -> RingElt {
        ring.from_coeffs(&self.0.pi_img).expect("pi image fits the ring")
    }

    pub fn pi_elt(&self) -> RingElt {
        self.pi_in(&self.0.ring)
    }

    fn coef_in(&self, c: &Coef, ring: &LocalRing) -> RingElt {
        let pi = self.pi_in(ring);
        let mut acc = ring.zero();
        for x in c.iter().rev() {
            acc = &(&acc * &pi) + &ring.from_bigint(x);
        }
        acc
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == 0 {
            return Err(Error::LengthTooShort(0));
        }
        if len > self.0.max_len {
            return Err(Error::Malformed(format!("length {len} exceeds the maximum {}", self.0.max_len)));
        }
        Ok(())
    }

    pub fn vector(&self, comps: Vec<RingElt>) -> Result<WittVector> {
        self.check_len(comps.len())?;
        let comps = comps
            .into_iter()
            .map(|c| if *c.ring() == self.0.ring { Ok(c) } else { c.cast(&self.0.ring) })
            .collect::<Result<Vec<_>>>()?;
        Ok(WittVector { wr: self.clone(), comps })
    }

    pub fn zero(&self, len: usize) -> Result<WittVector> {
        self.vector(vec![self.0.ring.zero(); len])
    }

    pub fn one(&self, len: usize) -> Result<WittVector> {
        self.teichmuller(&self.0.ring.one(), len)
    }

    /// Multiplicative representative `(a, 0, …, 0)`.
    pub fn teichmuller(&self, a: &RingElt, len: usize) -> Result<WittVector> {
        let mut comps = vec![a.clone()];
        comps.extend(std::iter::repeat_n(self.0.ring.zero(), len.saturating_sub(1)));
        self.vector(comps)
    }

    /// Image of `c ∈ O_F` (coordinates in the power basis of `π`), with all ghost components equal to `c`.
    pub fn scalar(&self, c: &Coef, len: usize) -> Result<WittVector> {
        self.check_len(len)?;
        let mut c = c.clone();
        c.resize(self.0.pi.e(), BigInt::zero());
        let comps = scalar_components(self.0.q, &self.0.pi, &c, len)?;
        self.vector(comps.iter().map(|x| self.coef_in(x, &self.0.ring)).collect())
    }

    pub fn scalar_int(&self, c: i64, len: usize) -> Result<WittVector> {
        self.scalar(&self.0.pi.from_int(&BigInt::from(c)), len)
    }

    /// The Witt vector `π`.
    pub fn pi_vector(&self, len: usize) -> Result<WittVector> {
        let c = self.0.pi.mul_alpha(&self.0.pi.from_int(&BigInt::one()), 1);
        self.scalar(&c, len)
    }

    fn compiled(&self, kind: PolyKind, len: usize, ring: &LocalRing) -> Result<Option<Arc<Compiled>>> {
        let key = (kind, len, ring.prec());
        if let Some(c) = self.0.compiled.lock().unwrap().get(&key) {
            return Ok(Some(c.clone()));
        }
        let Some(set) = structure_polys(self.0.q, &self.0.pi, kind, len)? else {
            return Ok(None);
        };
        let polys = set
            .polys
            .iter()
            .map(|u| {
                u.poly
                    .terms
                    .iter()
                    .map(|(e, c)| Term {
                        vars: e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, &x)| (i, x)).collect(),
                        coef: self.coef_in(c, ring),
                    })
                    .collect()
            })
            .collect();
        let c = Arc::new(Compiled { polys });
        self.0.compiled.lock().unwrap().insert(key, c.clone());
        Ok(Some(c))
    }

    fn ghost_of(&self, comps: &[RingElt], ring: &LocalRing) -> Vec<RingElt> {
        let pi = self.pi_in(ring);
        let q = self.0.q;
        let mut out = Vec::with_capacity(comps.len());
        // pw[j] = a_j^{q^{n-j}}
        let mut pw: Vec<RingElt> = Vec::with_capacity(comps.len());
        for cn in comps {
            for x in pw.iter_mut() {
                *x = x.pow(q);
            }
            pw.push(cn.clone());
            let mut acc = ring.zero();
            let mut pij = ring.one();
            for x in &pw {
                acc = &acc + &(&pij * x);
                pij = &pij * &pi;
            }
            out.push(acc);
        }
        out
    }

    /// Invert the ghost map with exact division; `None` when some division fails.
    fn unghost(&self, ghosts: &[RingElt], ring: &LocalRing) -> std::result::Result<Vec<RingElt>, usize> {
        let pi = self.pi_in(ring);
        let q = self.0.q;
        let mut comps: Vec<RingElt> = Vec::with_capacity(ghosts.len());
        let mut pw: Vec<RingElt> = Vec::new();
        for (n, y) in ghosts.iter().enumerate() {
            for x in pw.iter_mut() {
                *x = x.pow(q);
            }
            let mut rest = y.clone();
            let mut pij = ring.one();
            for x in &pw {
                rest = &rest - &(&pij * x);
                pij = &pij * &pi;
            }
            let xn = if n == 0 { rest } else { rest.divide_by(&pij).map_err(|_| n)? };
            pw.push(xn.clone());
            comps.push(xn);
        }
        Ok(comps)
    }

    /// Apply an operation through ghost components in a lifted ring.
    ///
    /// `combine` maps input ghost vectors to the output ghost vector; `out_len`
    /// components are recovered. Component `n` of the output depends on input
    /// components up to `n + reach`.
    pub fn via_ghosts(
        &self,
        inputs: &[&WittVector],
        out_len: usize,
        reach: usize,
        kind: &str,
        combine: impl Fn(&[Vec<RingElt>]) -> Vec<RingElt>,
    ) -> Result<WittVector> {
        let ring = &self.0.ring;
        let extra = (out_len.saturating_sub(1) as u32) * self.0.v_pi;
        let big = ring.with_prec(ring.prec() + extra)?;
        let lifted: Vec<Vec<RingElt>> = inputs
            .iter()
            .map(|w| w.comps.iter().map(|c| c.lift_exact(&big)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let ghosts: Vec<Vec<RingElt>> = lifted.iter().map(|c| self.ghost_of(c, &big)).collect();
        let out_g = combine(&ghosts);
        let comps = self
            .unghost(&out_g[..out_len], &big)
            .map_err(|index| Error::IntegralityFailure { kind: kind.into(), index })?;
        let comps = comps
            .into_iter()
            .enumerate()
            .map(|(n, c)| {
                let known = inputs
                    .iter()
                    .flat_map(|w| w.comps.iter().take(n + reach + 1))
                    .map(|c| c.prec())
                    .min()
                    .unwrap_or(ring.prec());
                Ok(c.cast(ring)?.reduce(known))
            })
            .collect::<Result<Vec<_>>>()?;
        self.vector(comps)
    }

    fn eval_compiled(&self, c: &Compiled, vars: &[RingElt]) -> Vec<RingElt> {
        let ring = &self.0.ring;
        let mut powers: HashMap<(usize, u16), RingElt> = HashMap::new();
        c.polys
            .iter()
            .map(|terms| {
                let mut acc = ring.zero();
                for t in terms {
                    let mut m = t.coef.clone();
                    for &(v, e) in &t.vars {
                        let pw = powers.entry((v, e)).or_insert_with(|| vars[v].pow(e as u64));
                        m = &m * pw;
                    }
                    acc = &acc + &m;
                }
                acc
            })
            .collect()
    }

    /// Witt vector with ghost components `y`, where `φ(y_{i−1}) ≡ y_i mod π^i`.
    pub fn dwork_lift(&self, y: &[RingElt], phi: &dyn Endo) -> Result<WittVector> {
        self.check_len(y.len())?;
        if self.is_char_p() {
            return Err(Error::WrongCharacteristic);
        }
        let pi = self.pi_elt();
        let v_pi = self.0.v_pi;
        for i in 1..y.len() {
            let d = &phi.apply(&y[i - 1]) - &y[i];
            let need = i as u32 * v_pi;
            match d.val() {
                Some(v) if v < need => return Err(Error::CompatibilityViolation { index: i }),
                None if d.prec() < need => {
                    return Err(Error::PrecisionExhausted(format!("congruence at index {i} is not decidable")))
                }
                _ => {}
            }
        }
        let ring = &self.0.ring;
        let q = self.0.q;
        let mut comps: Vec<RingElt> = Vec::with_capacity(y.len());
        let mut pw: Vec<RingElt> = Vec::new();
        for (n, yn) in y.iter().enumerate() {
            for x in pw.iter_mut() {
                *x = x.pow(q);
            }
            let mut rest = yn.clone();
            let mut pij = ring.one();
            for x in &pw {
                rest = &rest - &(&pij * x);
                pij = &pij * &pi;
            }
            let xn = if n == 0 {
                rest
            } else {
                match rest.val() {
                    Some(v) if v < n as u32 * v_pi => return Err(Error::CompatibilityViolation { index: n }),
                    _ => {}
                }
                let z = rest.exact_divide(n as u32 * v_pi)?;
                let unit = pij.exact_divide(n as u32 * v_pi)?.inverse()?;
                &z * &unit
            };
            if xn.prec() == 0 {
                return Err(Error::PrecisionExhausted(format!("component {n} has no known digits")));
            }
            pw.push(xn.clone());
            comps.push(xn);
        }
        self.vector(comps)
    }

    /// The section `λ_φ(r)`, with ghost components `(r, φ(r), φ²(r), …)`.
    pub fn lambda_phi(&self, r: &RingElt, phi: &dyn Endo, len: usize) -> Result<WittVector> {
        let mut y = vec![r.clone()];
        for i in 1..len {
            let next = phi.apply(&y[i - 1]);
            y.push(next);
        }
        self.dwork_lift(&y, phi)
    }

    pub fn random<Rn: rand::Rng>(&self, len: usize, rng: &mut Rn) -> Result<WittVector> {
        self.vector((0..len).map(|_| self.0.ring.random(rng)).collect())
    }

    /// Descriptor of the coefficient ring and `π`.
    pub fn doc(&self) -> WittRingDoc {
        WittRingDoc {
            ring: ring_doc(&self.0.ring),
            q: self.0.q,
            pi_poly: self.0.pi.poly().iter().cloned().map(Int).collect(),
            pi_image: trim(&self.0.pi_img).into_iter().map(Int).collect(),
        }
    }

    pub fn from_doc(doc: &WittRingDoc) -> Result<WittRing> {
        let ring = crate::padic::make_ring(&doc.ring)?;
        let g: Vec<BigInt> = doc.pi_poly.iter().map(|x| x.0.clone()).collect();
        let pi = PiSymbol::eisenstein(ring.p(), &g)?;
        WittRing::with_pi(&ring, doc.q, pi, doc.pi_image.iter().map(|x| x.0.clone()).collect())
    }
}

fn trim(v: &[BigInt]) -> Vec<BigInt> {
    let mut v = v.to_vec();
    while v.len() > 1 && v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittRingDoc {
    pub ring: RingDoc,
    pub q: u64,
    pub pi_poly: Vec<Int>,
    pub pi_image: Vec<Int>,
}

/// Witt vector document; components are signed flat coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittVectorDoc {
    pub ring_ref: WittRingDoc,
    pub components: Vec<Vec<Int>>,
    pub precisions: Vec<u32>,
}

/// A Witt vector of finite length.
#[derive(Clone, PartialEq, Eq)]
pub struct WittVector {
    wr: WittRing,
    comps: Vec<RingElt>,
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.comps).finish()
    }
}

impl WittVector {
    pub fn witt_ring(&self) -> &WittRing {
        &self.wr
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn comps(&self) -> &[RingElt] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &RingElt {
        &self.comps[i]
    }

    /// Minimum known precision across components.
    pub fn prec(&self) -> u32 {
        self.comps.iter().map(|c| c.prec()).min().unwrap_or(0)
    }

    pub fn truncate(&self, len: usize) -> WittVector {
        WittVector { wr: self.wr.clone(), comps: self.comps[..len.min(self.comps.len())].to_vec() }
    }

    /// Lower every component's known precision to at most `prec`.
    pub fn reduce(&self, prec: u32) -> WittVector {
        WittVector { wr: self.wr.clone(), comps: self.comps.iter().map(|c| c.reduce(prec)).collect() }
    }

    /// Componentwise equality modulo the `n`-th power of the top uniformizer.
    pub fn eq_at(&self, o: &WittVector, n: u32) -> bool {
        self.len() == o.len() && self.comps.iter().zip(&o.comps).all(|(a, b)| a.eq_at(b, n))
    }

    /// Componentwise equality at the smaller known precision of each pair.
    pub fn agrees(&self, o: &WittVector) -> bool {
        self.len() == o.len() && self.comps.iter().zip(&o.comps).all(|(a, b)| a.eq_at(b, a.prec().min(b.prec())))
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn ghost(&self) -> Vec<RingElt> {
        self.wr.ghost_of(&self.comps, self.wr.ring())
    }

    fn check(&self, o: &WittVector) -> Result<()> {
        if self.wr != o.wr {
            return Err(Error::RingMismatch);
        }
        if self.len() != o.len() {
            return Err(Error::LengthMismatch(self.len(), o.len()));
        }
        Ok(())
    }

    fn binary(&self, o: &WittVector, kind: PolyKind) -> Result<WittVector> {
        self.check(o)?;
        let len = self.len();
        if let Some(c) = self.wr.compiled(kind, len, self.wr.ring())? {
            let mut vars = self.comps.clone();
            vars.extend(o.comps.iter().cloned());
            return self.wr.vector(self.wr.eval_compiled(&c, &vars));
        }
        self.binary_via_ghosts(o, kind)
    }

    /// The same operation computed by ghost-map inversion in a lifted ring.
    pub fn binary_via_ghosts(&self, o: &WittVector, kind: PolyKind) -> Result<WittVector> {
        self.check(o)?;
        self.wr.via_ghosts(&[self, o], self.len(), 0, kind.name(), |g| {
            g[0].iter()
                .zip(&g[1])
                .map(|(x, y)| if kind == PolyKind::Sum { x + y } else { x * y })
                .collect()
        })
    }

    pub fn add(&self, o: &WittVector) -> Result<WittVector> {
        self.binary(o, PolyKind::Sum)
    }

    pub fn mul(&self, o: &WittVector) -> Result<WittVector> {
        self.binary(o, PolyKind::Product)
    }

    pub fn neg(&self) -> Result<WittVector> {
        if self.wr.q() % 2 == 1 {
            return self.wr.vector(self.comps.iter().map(|c| -c).collect());
        }
        self.wr.scalar_int(-1, self.len())?.mul(self)
    }

    pub fn sub(&self, o: &WittVector) -> Result<WittVector> {
        self.add(&o.neg()?)
    }

    /// Multiplication by the scalar `c ∈ O_F`.
    pub fn scale(&self, c: &Coef) -> Result<WittVector> {
        self.wr.scalar(c, self.len())?.mul(self)
    }

    /// Multiplication by `π`.
    pub fn mul_pi(&self) -> Result<WittVector> {
        self.wr.pi_vector(self.len())?.mul(self)
    }

    /// Frobenius; the output is one component shorter.
    pub fn frobenius(&self) -> Result<WittVector> {
        let len = self.len();
        if len < 2 {
            return Err(Error::LengthTooShort(len));
        }
        if let Some(c) = self.wr.compiled(PolyKind::Frobenius, len, self.wr.ring())? {
            let mut vars = self.comps.clone();
            vars.extend(std::iter::repeat_n(self.wr.ring().zero(), len));
            return self.wr.vector(self.wr.eval_compiled(&c, &vars));
        }
        self.frobenius_via_ghosts()
    }

    pub fn frobenius_via_ghosts(&self) -> Result<WittVector> {
        let len = self.len();
        if len < 2 {
            return Err(Error::LengthTooShort(len));
        }
        self.wr.via_ghosts(&[self], len - 1, 1, "frobenius", |g| g[0][1..].to_vec())
    }

    /// Verschiebung `(a_0, a_1, …) ↦ (0, a_0, a_1, …)`; the output is one component longer.
    pub fn verschiebung(&self) -> Result<WittVector> {
        let mut comps = vec![self.wr.ring().zero()];
        comps.extend(self.comps.iter().cloned());
        self.wr.vector(comps)
    }

    /// Multiplication by `π` over a ring where `π = 0`: `(0, a_0^q, a_1^q, …)`.
    pub fn mult_by_pi_charp(&self) -> Result<WittVector> {
        if !self.wr.is_char_p() {
            return Err(Error::WrongCharacteristic);
        }
        let q = self.wr.q();
        let mut comps = vec![self.wr.ring().zero()];
        comps.extend(self.comps[..self.len() - 1].iter().map(|c| c.pow(q)));
        self.wr.vector(comps)
    }

    /// Drop the leading component of a vector whose leading component vanishes.
    pub fn unshift(&self) -> Result<WittVector> {
        if self.len() < 2 {
            return Err(Error::LengthTooShort(self.len()));
        }
        if !self.comps[0].is_zero() {
            return Err(Error::NotDivisible { valuation: self.comps[0].valuation().to_string(), k: 0 });
        }
        self.wr.vector(self.comps[1..].to_vec())
    }

    /// For `a_0 ∈ πR`, the vector `w'` with `Fr(self) = π·w'`.
    ///
    /// Writing `self = π·[y'] ⊞ V(ỹ)` gives `Fr(self) = π·([y'^q] ⊞ ỹ)`.
    pub fn frobenius_div_pi(&self) -> Result<WittVector> {
        let len = self.len();
        if len < 2 {
            return Err(Error::LengthTooShort(len));
        }
        if self.wr.is_char_p() {
            return Err(Error::WrongCharacteristic);
        }
        let y_prime = self.comps[0].divide_by(&self.wr.pi_elt())?;
        let pi_t = self.wr.teichmuller(&y_prime, len)?.mul_pi()?;
        let tail = self.sub(&pi_t)?;
        let tilde = tail.unshift()?;
        let lead = self.wr.teichmuller(&y_prime.pow(self.wr.q()), len - 1)?;
        lead.add(&tilde)
    }

    pub fn to_doc(&self) -> WittVectorDoc {
        WittVectorDoc {
            ring_ref: self.wr.doc(),
            components: self.comps.iter().map(|c| trim(&c.signed_coeffs()).into_iter().map(Int).collect()).collect(),
            precisions: self.comps.iter().map(|c| c.prec()).collect(),
        }
    }

    pub fn from_doc(doc: &WittVectorDoc) -> Result<WittVector> {
        let wr = WittRing::from_doc(&doc.ring_ref)?;
        Self::from_doc_in(&wr, doc)
    }

    pub fn from_doc_in(wr: &WittRing, doc: &WittVectorDoc) -> Result<WittVector> {
        if doc.precisions.len() != doc.components.len() {
            return Err(Error::Malformed("precision list does not match components".into()));
        }
        let comps = doc
            .components
            .iter()
            .zip(&doc.precisions)
            .map(|(c, &p)| {
                let v: Vec<BigInt> = c.iter().map(|x| x.0.clone()).collect();
                Ok(wr.ring().from_coeffs(&v)?.reduce(p))
            })
            .collect::<Result<Vec<_>>>()?;
        wr.vector(comps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{CoefDoc, LevelDoc, LevelKind, RingDoc};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(p: u64, m: u32) -> LocalRing {
        LocalRing::base(p, m).unwrap()
    }

    fn sqrt_ring(p: i64, m: u32) -> LocalRing {
        crate::padic::make_ring(&RingDoc {
            prime: p as u64,
            precision: m,
            levels: vec![LevelDoc {
                poly: vec![CoefDoc::Scalar((-p).into()), CoefDoc::Scalar(0.into()), CoefDoc::Scalar(1.into())],
                uniformizer: vec![0.into(), 1.into()],
                kind: LevelKind::Eisenstein,
            }],
        })
        .unwrap()
    }

    #[test]
    fn ghost_examples() {
        let r = base(2, 8);
        let wr = WittRing::new(&r, 2).unwrap();
        let w = wr.vector(vec![r.from_i64(5), r.from_i64(3)]).unwrap();
        assert_eq!(w.ghost()[1], r.from_i64(25 + 6));
        let r3 = base(3, 8);
        let wr3 = WittRing::new(&r3, 3).unwrap();
        assert!(wr3.one(3).unwrap().ghost().iter().all(|g| *g == r3.one()));
        let v = wr.vector(vec![r.zero(), r.one()]).unwrap();
        assert_eq!(v.ghost(), vec![r.zero(), r.from_i64(2)]);
    }

    #[test]
    fn teichmuller_sum() {
        let r = base(2, 8);
        let wr = WittRing::new(&r, 2).unwrap();
        let one = wr.one(2).unwrap();
        let s = one.add(&one).unwrap();
        assert_eq!(s.comps(), &[r.from_i64(2), r.from_i64(-1)]);
    }

    #[test]
    fn structure_and_ghost_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = sqrt_ring(2, 8);
        let g = vec![BigInt::from(-2), BigInt::zero(), BigInt::one()];
        let wr = WittRing::with_pi(&r, 4, PiSymbol::eisenstein(2, &g).unwrap(), vec![0.into(), 1.into()]).unwrap();
        for _ in 0..10 {
            let a = wr.random(3, &mut rng).unwrap();
            let b = wr.random(3, &mut rng).unwrap();
            for kind in [PolyKind::Sum, PolyKind::Product] {
                assert!(a.binary(&b, kind).unwrap().agrees(&a.binary_via_ghosts(&b, kind).unwrap()));
            }
            assert!(a.frobenius().unwrap().agrees(&a.frobenius_via_ghosts().unwrap()));
        }
    }

    #[test]
    fn dwork_examples() {
        let r = base(2, 10);
        let wr = WittRing::new(&r, 2).unwrap();
        let phi = PolyEndo::from_i64s(&[0, 2, 1]);
        let x = r.from_i64(5);
        let w = wr.lambda_phi(&x, &phi, 3).unwrap();
        assert!(w.comp(0).eq_at(&x, 10));
        assert!(w.comp(1).eq_at(&x, 9));
        assert!(w.comp(2).eq_at(&r.from_i64(125 + 25 + 5), 8));
        let bad = wr.dwork_lift(&[r.one(), r.zero()], &PolyEndo::power(2));
        assert_eq!(bad.unwrap_err(), Error::CompatibilityViolation { index: 1 });
    }

    #[test]
    fn charp_pi_multiplication() {
        let r = base(3, 1);
        let wr = WittRing::new(&r, 3).unwrap();
        assert!(wr.is_char_p());
        let w = wr.vector(vec![r.from_i64(2), r.from_i64(1), r.from_i64(2)]).unwrap();
        let m = w.mult_by_pi_charp().unwrap();
        assert_eq!(m.comps(), &[r.zero(), r.from_i64(8), r.from_i64(1)]);
        assert_eq!(m, w.mul_pi().unwrap());
        let big = WittRing::new(&base(3, 4), 3).unwrap();
        assert_eq!(big.one(2).unwrap().mult_by_pi_charp().unwrap_err(), Error::WrongCharacteristic);
    }
}
