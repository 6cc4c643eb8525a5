//! Finite windows of Frobenius-compatible Witt vectors.
//!
//! A window stores `x_{q^b}, …, x_{q^{b+D}}` with `Fr(x_{q^{i+1}}) ≡ x_{q^i}`;
//! `b` is the offset introduced by [`FrobWindow::shift_embed`]. Entries below
//! the offset are implied by Frobenius.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::Int;
use crate::padic::{ring_doc, LocalRing, RingDoc, RingElt};
use crate::witt::{WittRing, WittRingDoc, WittVector, WittVectorDoc};

/// Chain of Witt vectors with `Fr(x_{i+1}) ≡ x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobWindow {
    wr: WittRing,
    offset: usize,
    vectors: Vec<WittVector>,
    compat: u32,
}

/// A q-power compatible sequence in `R/π`: `entry_i = entry_{i+1}^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPSeq {
    ring: LocalRing,
    q: u64,
    offset: usize,
    entries: Vec<RingElt>,
}

impl CharPSeq {
    /// Validate and build; `ring` is the residue ring `R/π`.
    pub fn new(ring: &LocalRing, q: u64, offset: usize, entries: Vec<RingElt>) -> Result<CharPSeq> {
        let entries = entries.into_iter().map(|e| e.cast(ring)).collect::<Result<Vec<_>>>()?;
        for i in 1..entries.len() {
            if entries[i].pow(q) != entries[i - 1] {
                return Err(Error::CompatibilityViolation { index: i });
            }
        }
        Ok(CharPSeq { ring: ring.clone(), q, offset, entries })
    }

    pub fn ring(&self) -> &LocalRing {
        &self.ring
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn depth(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn entries(&self) -> &[RingElt] {
        &self.entries
    }

    /// Entry at absolute index `n ≥ offset`.
    pub fn entry(&self, n: usize) -> Option<&RingElt> {
        n.checked_sub(self.offset).and_then(|i| self.entries.get(i))
    }

    /// Reindex so that entry `i` moves to `i + b`.
    pub fn shift(&self, b: usize) -> Result<CharPSeq> {
        if b > self.depth() {
            return Err(Error::DepthExhausted);
        }
        Ok(CharPSeq {
            ring: self.ring.clone(),
            q: self.q,
            offset: self.offset + b,
            entries: self.entries[..self.entries.len() - b].to_vec(),
        })
    }

    pub fn truncate(&self, depth: usize) -> CharPSeq {
        CharPSeq {
            ring: self.ring.clone(),
            q: self.q,
            offset: self.offset,
            entries: self.entries[..(depth + 1).min(self.entries.len())].to_vec(),
        }
    }

    fn zip(&self, o: &CharPSeq, f: impl Fn(&RingElt, &RingElt) -> RingElt) -> Result<CharPSeq> {
        if self.ring != o.ring || self.offset != o.offset || self.q != o.q {
            return Err(Error::RingMismatch);
        }
        let n = self.entries.len().min(o.entries.len());
        let entries = (0..n).map(|i| f(&self.entries[i], &o.entries[i])).collect();
        Ok(CharPSeq { ring: self.ring.clone(), q: self.q, offset: self.offset, entries })
    }

    pub fn add(&self, o: &CharPSeq) -> Result<CharPSeq> {
        self.zip(o, |a, b| a + b)
    }

    pub fn mul(&self, o: &CharPSeq) -> Result<CharPSeq> {
        self.zip(o, |a, b| a * b)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn to_doc(&self) -> CharPSeqDoc {
        let mut residue_ring_ref = ring_doc(&self.ring);
        // the reference ring only fixes the extension; precision travels separately
        residue_ring_ref.precision = residue_ring_ref.precision.max(2);
        CharPSeqDoc {
            residue_ring_ref,
            residue_precision: self.ring.prec(),
            q: self.q,
            offset: self.offset,
            entries: self.entries.iter().map(|e| e.signed_coeffs().into_iter().map(Int).collect()).collect(),
        }
    }

    pub fn from_doc(doc: &CharPSeqDoc) -> Result<CharPSeq> {
        let ring = crate::padic::make_ring(&doc.residue_ring_ref)?.with_prec(doc.residue_precision)?;
        let entries = doc
            .entries
            .iter()
            .map(|e| ring.from_coeffs(&e.iter().map(|x| x.0.clone()).collect::<Vec<BigInt>>()))
            .collect::<Result<Vec<_>>>()?;
        CharPSeq::new(&ring, doc.q, doc.offset, entries)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharPSeqDoc {
    pub residue_ring_ref: RingDoc,
    pub residue_precision: u32,
    pub q: u64,
    pub offset: usize,
    pub entries: Vec<Vec<Int>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct WindowDoc {
    pub ring_ref: WittRingDoc,
    pub L: usize,
    pub D: usize,
    pub offset: usize,
    pub compat_precision: u32,
    pub vectors: Vec<WittVectorDoc>,
}

fn compat_of(wr: &WittRing, vectors: &[WittVector]) -> Result<u32> {
    let mut c = vectors.iter().map(|v| v.prec()).min().unwrap_or(0);
    for i in 0..vectors.len().saturating_sub(1) {
        let (lo, hi) = (&vectors[i], &vectors[i + 1]);
        if hi.len() < 2 {
            let d = &hi.comp(0).pow(wr.q()) - lo.comp(0);
            c = c.min(d.val().unwrap_or(d.prec())).min(wr.v_pi());
            continue;
        }
        let fr = hi.frobenius()?;
        for k in 0..fr.len() {
            let d = fr.comp(k) - lo.comp(k);
            c = c.min(d.val().unwrap_or(d.prec()));
        }
    }
    Ok(c)
}

impl FrobWindow {
    /// Build a window from `x_{q^offset}, …`; the compatibility precision is computed.
    pub fn new(wr: &WittRing, offset: usize, vectors: Vec<WittVector>) -> Result<FrobWindow> {
        let Some(first) = vectors.first() else {
            return Err(Error::Malformed("a window needs at least one vector".into()));
        };
        let len = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != len) {
            return Err(Error::LengthMismatch(len, v.len()));
        }
        if vectors.iter().any(|v| v.witt_ring() != wr) {
            return Err(Error::RingMismatch);
        }
        let compat = compat_of(wr, &vectors)?;
        Ok(FrobWindow { wr: wr.clone(), offset, vectors, compat })
    }

    pub fn witt_ring(&self) -> &WittRing {
        &self.wr
    }

    pub fn depth(&self) -> usize {
        self.vectors.len() - 1
    }

    /// Witt length minus one.
    pub fn length(&self) -> usize {
        self.vectors[0].len() - 1
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn vectors(&self) -> &[WittVector] {
        &self.vectors
    }

    /// Vector at absolute index `n ≥ offset`.
    pub fn vector(&self, n: usize) -> Option<&WittVector> {
        n.checked_sub(self.offset).and_then(|i| self.vectors.get(i))
    }

    /// Precision (top-uniformizer units) to which `Fr(x_{i+1}) ≡ x_i` holds.
    pub fn compat_precision(&self) -> u32 {
        self.compat
    }

    /// Minimum known precision over all components.
    pub fn known_precision(&self) -> u32 {
        self.vectors.iter().map(|v| v.prec()).min().unwrap_or(0)
    }

    /// `(Fr(x_0), x_0, …, x_{D−1})`; Witt length drops by one.
    pub fn frobenius(&self) -> Result<FrobWindow> {
        if self.depth() == 0 {
            return Err(Error::DepthExhausted);
        }
        let l = self.length();
        let mut v = vec![self.vectors[0].frobenius()?];
        v.extend(self.vectors[..self.depth()].iter().map(|x| x.truncate(l)));
        FrobWindow::new(&self.wr, self.offset, v)
    }

    /// Drop `x_0`; inverse of [`FrobWindow::frobenius`] where defined.
    pub fn shift_left(&self) -> Result<FrobWindow> {
        if self.depth() == 0 {
            return Err(Error::DepthExhausted);
        }
        FrobWindow::new(&self.wr, self.offset, self.vectors[1..].to_vec())
    }

    pub fn truncate(&self, depth: usize, length: usize) -> Result<FrobWindow> {
        let v = self.vectors[..(depth + 1).min(self.vectors.len())].iter().map(|x| x.truncate(length + 1)).collect();
        FrobWindow::new(&self.wr, self.offset, v)
    }

    /// Reindex by `x'_{q^{j+b}} = x_{q^j}`; depth drops by `b`.
    pub fn shift_embed(&self, b: usize) -> Result<FrobWindow> {
        if b > self.depth() {
            return Err(Error::DepthExhausted);
        }
        let keep = self.vectors.len() - b;
        Ok(FrobWindow {
            wr: self.wr.clone(),
            offset: self.offset + b,
            vectors: self.vectors[..keep].to_vec(),
            compat: compat_of(&self.wr, &self.vectors[..keep])?,
        })
    }

    fn zip(&self, o: &FrobWindow, f: impl Fn(&WittVector, &WittVector) -> Result<WittVector>) -> Result<FrobWindow> {
        if self.offset != o.offset || self.depth() != o.depth() {
            return Err(Error::Malformed("windows have different shapes".into()));
        }
        let v = self.vectors.iter().zip(&o.vectors).map(|(a, b)| f(a, b)).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(&self.wr, self.offset, v)
    }

    pub fn add(&self, o: &FrobWindow) -> Result<FrobWindow> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &FrobWindow) -> Result<FrobWindow> {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn mul(&self, o: &FrobWindow) -> Result<FrobWindow> {
        self.zip(o, |a, b| a.mul(b))
    }

    /// Multiplication by `π` in every entry.
    pub fn mul_pi(&self) -> Result<FrobWindow> {
        let v = self.vectors.iter().map(|x| x.mul_pi()).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(&self.wr, self.offset, v)
    }

    /// Multiplication by the scalar window of `c ∈ O_F`.
    pub fn scale(&self, c: &crate::structure::Coef) -> Result<FrobWindow> {
        let v = self.vectors.iter().map(|x| x.scale(c)).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(&self.wr, self.offset, v)
    }

    /// Scalar window of `c ∈ O_F`: every entry is the Witt vector of `c`.
    pub fn constant(wr: &WittRing, c: &crate::structure::Coef, length: usize, depth: usize) -> Result<FrobWindow> {
        let x = wr.scalar(c, length + 1)?;
        FrobWindow::new(wr, 0, vec![x; depth + 1])
    }

    /// Window of Teichmüller vectors `[a_i]` for a q-power compatible family.
    pub fn teichmuller(wr: &WittRing, entries: &[RingElt], length: usize) -> Result<FrobWindow> {
        let v = entries.iter().map(|a| wr.teichmuller(a, length + 1)).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(wr, 0, v)
    }

    /// Residues of the leading Witt components.
    pub fn beta(&self) -> Result<CharPSeq> {
        let rr = self.wr.ring().with_prec(self.wr.v_pi())?;
        let entries = self.vectors.iter().map(|x| x.comp(0).cast(&rr)).collect::<Result<Vec<_>>>()?;
        CharPSeq::new(&rr, self.wr.q(), self.offset, entries)
    }

    /// Leading Witt component of `x_1`.
    pub fn theta(&self) -> RingElt {
        let x = &self.vectors[0];
        if self.offset == 0 {
            x.comp(0).clone()
        } else {
            let g = x.ghost();
            g.get(self.offset).cloned().unwrap_or_else(|| x.comp(0).reduce(0))
        }
    }

    /// `Σ_{i≤L} π^i x_{D,i}^{q^{D−i}}` with its precision; needs `D ≥ L` and offset 0.
    pub fn theta_classical(&self) -> Result<RingElt> {
        let (d, l) = (self.depth(), self.length());
        if d < l || self.offset != 0 {
            return Err(Error::InsufficientDepth { needed: l + self.offset, available: d });
        }
        let x = &self.vectors[d];
        let ring = self.wr.ring();
        let pi = self.wr.pi_elt();
        let mut acc = ring.zero();
        let mut pij = ring.one();
        for i in 0..=l {
            acc = &acc + &(&pij * &x.comp(i).pow(self.wr.q().pow((d - i) as u32)));
            pij = &pij * &pi;
        }
        let mut prec = self.compat.min(self.known_precision());
        if d > l {
            prec = prec.min((l as u32 + 1) * self.wr.v_pi());
        }
        Ok(acc.reduce(prec))
    }

    /// For a window with `β = 0`, the window `w'` with `π·w' = self`.
    ///
    /// Entry `i` is built from `x_{i+1}` through `Fr(x_{i+1}) = π·w'_i`, so depth and length drop by one.
    pub fn divide_by_pi(&self) -> Result<FrobWindow> {
        if !self.beta()?.is_zero() {
            return Err(Error::NotDivisible { valuation: "0".into(), k: self.wr.v_pi() });
        }
        if self.depth() == 0 {
            return Err(Error::DepthExhausted);
        }
        let v = self.vectors[1..].iter().map(|x| x.frobenius_div_pi()).collect::<Result<Vec<_>>>()?;
        FrobWindow::new(&self.wr, self.offset, v)
    }

    pub fn to_doc(&self) -> WindowDoc {
        WindowDoc {
            ring_ref: self.wr.doc(),
            L: self.length(),
            D: self.depth(),
            offset: self.offset,
            compat_precision: self.compat,
            vectors: self.vectors.iter().map(|v| v.to_doc()).collect(),
        }
    }

    pub fn from_doc(doc: &WindowDoc) -> Result<FrobWindow> {
        let wr = WittRing::from_doc(&doc.ring_ref)?;
        let v = doc.vectors.iter().map(|d| WittVector::from_doc_in(&wr, d)).collect::<Result<Vec<_>>>()?;
        let w = FrobWindow::new(&wr, doc.offset, v)?;
        if w.depth() != doc.D || w.length() != doc.L {
            return Err(Error::Malformed("declared L or D does not match the vectors".into()));
        }
        Ok(w)
    }
}

/// Default number of extra depth steps used by [`window_lift_charp`]: the precision in units of `π`.
pub fn default_slack(wr: &WittRing) -> usize {
    wr.ring().prec().div_ceil(wr.v_pi()) as usize
}

/// Lift a q-power compatible sequence to a window of Teichmüller vectors.
///
/// Entry `i` is `[ŝ_{D+m}^{q^{D+m−i}}]` for arbitrary lifts `ŝ` and `m = L + slack`;
/// these powers are stable modulo the ring precision.
pub fn window_lift_charp(wr: &WittRing, s: &CharPSeq, length: usize, depth: usize, slack: usize) -> Result<FrobWindow> {
    let m = length + slack;
    let needed = depth + m;
    if s.offset() != 0 || s.depth() < needed {
        return Err(Error::InsufficientDepth { needed, available: s.depth() });
    }
    let ring = wr.ring();
    let top = s.entries()[needed].lift_exact(ring)?;
    let mut lifts = vec![top];
    for _ in 0..needed {
        let next = lifts.last().unwrap().pow(wr.q());
        lifts.push(next);
    }
    // lifts[k] = ŝ_needed^{q^k}; entry i uses k = needed − i.
    let entries: Vec<RingElt> = (0..=depth).map(|i| lifts[needed - i].clone()).collect();
    FrobWindow::teichmuller(wr, &entries, length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::PolyEndo;

    fn wr(p: u64, m: u32) -> WittRing {
        WittRing::new(&LocalRing::base(p, m).unwrap(), p).unwrap()
    }

    #[test]
    fn frobenius_and_shift_are_inverse() {
        let w = wr(3, 8);
        let r = w.ring();
        let phi = PolyEndo::power(3);
        let a = r.from_i64(2);
        let v = (0..4).map(|_| w.lambda_phi(&a, &phi, 3).unwrap()).collect();
        let win = FrobWindow::new(&w, 0, v).unwrap();
        let back = win.frobenius().unwrap().shift_left().unwrap();
        assert_eq!(back, win.truncate(2, 1).unwrap());
        let zero = FrobWindow::new(&w, 0, vec![w.one(2).unwrap()]).unwrap();
        assert_eq!(zero.frobenius().unwrap_err(), Error::DepthExhausted);
    }

    #[test]
    fn constant_one_lifts_to_teichmuller_one() {
        let w = wr(2, 6);
        let rr = w.ring().with_prec(1).unwrap();
        let s = CharPSeq::new(&rr, 2, 0, vec![rr.one(); 12]).unwrap();
        let win = window_lift_charp(&w, &s, 2, 3, 6).unwrap();
        assert!(win.vectors().iter().all(|v| *v == w.one(3).unwrap()));
        assert_eq!(win.beta().unwrap(), s.truncate(3));
        assert!(matches!(window_lift_charp(&w, &s, 2, 3, 7), Err(Error::InsufficientDepth { .. })));
    }

    #[test]
    fn theta_classical_needs_depth() {
        let w = wr(2, 6);
        let win = FrobWindow::new(&w, 0, vec![w.one(4).unwrap()]).unwrap();
        assert!(matches!(win.theta_classical(), Err(Error::InsufficientDepth { .. })));
    }
}
