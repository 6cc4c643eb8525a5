//! The norm field `k((u))` of a φ-iterate tower at finite precision.
//!
//! Its uniformizer is the q-power compatible sequence `(π_i mod π)_i`, and a
//! truncated series `Σ c_k u^k` maps to the sequence `(Σ c_k^{q^{−i}} π̄_i^k)_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{teichmuller_unit, LocalRing, ResidueElt, RingElt};
use crate::tower::PhiTower;
use crate::windows::{CharPSeq, FrobWindow};

/// `π_i mod π` for `i = 0..=depth`, after checking norm compatibility.
pub fn normfield_uniformizer(t: &PhiTower) -> Result<CharPSeq> {
    normfield_uniformizer_with(t, &(0..=t.depth()).map(|i| t.pi(i).clone()).collect::<Vec<_>>())
}

/// As [`normfield_uniformizer`], for candidate uniformizers `pis[i] ∈ K(π_i)` given in the top ring.
pub fn normfield_uniformizer_with(t: &PhiTower, pis: &[RingElt]) -> Result<CharPSeq> {
    let local = pis.iter().enumerate().map(|(i, x)| x.restrict(&t.level_ring(i)?)).collect::<Result<Vec<_>>>()?;
    let report = t.norm_compat_check_with(&local)?;
    if let Some(bad) = report.levels.iter().find(|l| !l.passes) {
        return Err(Error::NormIncompatible { level: bad.level });
    }
    CharPSeq::new(&residue_ring(t)?, t.q(), 0, pis.to_vec())
}

fn residue_ring(t: &PhiTower) -> Result<LocalRing> {
    let wr = t.witt_ring()?;
    t.ring().with_prec(wr.v_pi())
}

/// Residue field `F_{p^f}` of the base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueField {
    pub p: u64,
    pub f: u32,
}

/// Truncated power series `Σ_{k < precision} c_k u^k` over the residue field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormFieldElt {
    field: LocalRing,
    coeffs: Vec<RingElt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormFieldDoc {
    pub residue_field: ResidueField,
    pub coeffs: Vec<Vec<u64>>,
}

impl NormFieldElt {
    /// Zero series with `precision` coefficients over the residue field of `t`'s base.
    pub fn zero(t: &PhiTower, precision: usize) -> Result<NormFieldElt> {
        let field = t.iterate().base().residue_ring()?;
        Ok(NormFieldElt { coeffs: vec![field.zero(); precision], field })
    }

    /// `u^k` truncated to `precision` coefficients.
    pub fn u_pow(t: &PhiTower, k: usize, precision: usize) -> Result<NormFieldElt> {
        let mut z = Self::zero(t, precision)?;
        if k < precision {
            z.coeffs[k] = z.field.one();
        }
        Ok(z)
    }

    pub fn from_residues(t: &PhiTower, coeffs: &[ResidueElt]) -> Result<NormFieldElt> {
        let field = t.iterate().base().residue_ring()?;
        let coeffs = coeffs.iter().map(|c| teichmuller_unit(&field, c)).collect::<Result<_>>()?;
        Ok(NormFieldElt { field, coeffs })
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> Vec<ResidueElt> {
        self.coeffs.iter().map(|c| c.residue()).collect()
    }

    /// Index of the first nonzero coefficient.
    pub fn val(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, o: &NormFieldElt) -> NormFieldElt {
        let n = self.precision().min(o.precision());
        let coeffs = (0..n).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect();
        NormFieldElt { field: self.field.clone(), coeffs }
    }

    pub fn mul(&self, o: &NormFieldElt) -> NormFieldElt {
        let n = self.precision().min(o.precision());
        let mut coeffs = vec![self.field.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n).filter(|(_, a)| !a.is_zero()) {
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        NormFieldElt { field: self.field.clone(), coeffs }
    }

    pub fn to_doc(&self) -> NormFieldDoc {
        NormFieldDoc {
            residue_field: ResidueField { p: self.field.p(), f: self.field.f() },
            coeffs: self.coeffs().into_iter().map(|c| c.0).collect(),
        }
    }

    pub fn from_doc(t: &PhiTower, doc: &NormFieldDoc) -> Result<NormFieldElt> {
        let z = Self::zero(t, 0)?;
        if doc.residue_field != (ResidueField { p: z.field.p(), f: z.field.f() }) {
            return Err(Error::RingMismatch);
        }
        let c: Vec<ResidueElt> = doc.coeffs.iter().cloned().map(ResidueElt).collect();
        Self::from_residues(t, &c)
    }
}

/// Smallest series precision that determines every entry up to `depth`: `e_K · q^depth`.
pub fn default_precision(t: &PhiTower, depth: usize) -> usize {
    t.iterate().base().e() as usize * (t.q() as usize).pow(depth as u32)
}

/// Image of `e` in the q-power compatible sequences, entries `0..=depth`.
pub fn embed_normfield(e: &NormFieldElt, t: &PhiTower, depth: usize) -> Result<CharPSeq> {
    if depth > t.depth() {
        return Err(Error::InsufficientDepth { needed: depth, available: t.depth() });
    }
    if e.precision() < default_precision(t, depth) {
        return Err(Error::PrecisionExhausted(format!(
            "series known to u^{} but depth {depth} needs u^{}",
            e.precision(),
            default_precision(t, depth)
        )));
    }
    let u = normfield_uniformizer(t)?;
    let rr = u.ring().clone();
    let q = t.q();
    let f = rr.f() as usize;
    let mut entries = Vec::with_capacity(depth + 1);
    for (i, ui) in u.entries().iter().enumerate().take(depth + 1) {
        // c^{q^{−i}} = c^{q^{f − (i mod f)}} on F_{p^f}
        let twist = (f - i % f) % f;
        let mut acc = rr.zero();
        let mut upow = rr.one();
        for c in &e.coeffs {
            if upow.is_zero() {
                break;
            }
            if !c.is_zero() {
                let mut ci = teichmuller_unit(&rr, &c.residue())?;
                for _ in 0..twist {
                    ci = ci.pow(q);
                }
                acc = &acc + &(&ci * &upow);
            }
            upow = &upow * ui;
        }
        entries.push(acc);
    }
    CharPSeq::new(&rr, q, 0, entries)
}

/// Least `q^d` such that `β(w)` has the entry valuations of the image of `u^{q^d}`.
///
/// Entries at or beyond the residue precision carry no information; at least one
/// informative entry must match and all must agree.
pub fn insep_degree_probe(t: &PhiTower, w: &FrobWindow) -> Result<u64> {
    let b = w.beta()?;
    let prec = b.ring().prec();
    let q = t.q();
    let pis: Vec<u64> = (0..=t.depth())
        .map(|i| t.pi(i).val().map(u64::from).ok_or_else(|| Error::PrecisionExhausted(format!("pi_{i} is zero"))))
        .collect::<Result<_>>()?;
    let lo = w.offset();
    let hi = (lo + b.depth()).min(t.depth());
    let mut qd = 1u64;
    loop {
        let expected: Vec<Option<u64>> = (lo..=hi).map(|n| Some(qd * pis[n]).filter(|&v| v < u64::from(prec))).collect();
        if expected.iter().all(|e| e.is_none()) {
            return Err(Error::NoMatchWithinDepth { depth: hi });
        }
        let matches = (lo..=hi).zip(&expected).all(|(n, e)| b.entry(n).and_then(|x| x.val()).map(u64::from) == *e);
        if matches {
            return Ok(qd);
        }
        qd *= q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::{build_tower, kummer};

    #[test]
    fn uniformizer_matches_beta() {
        let t = build_tower(&kummer(2, 8).unwrap(), 3).unwrap();
        let u = normfield_uniformizer(&t).unwrap();
        let w = t.uniformizer_window(1).unwrap();
        assert_eq!(w.beta().unwrap().entries(), u.entries());
        let e = NormFieldElt::u_pow(&t, 1, default_precision(&t, 3)).unwrap();
        assert_eq!(embed_normfield(&e, &t, 3).unwrap().entries(), u.entries());
    }

    #[test]
    fn probe_counts_shifts() {
        let t = build_tower(&kummer(2, 8).unwrap(), 3).unwrap();
        let w = t.uniformizer_window(1).unwrap();
        assert_eq!(insep_degree_probe(&t, &w).unwrap(), 1);
        assert_eq!(insep_degree_probe(&t, &w.shift_embed(1).unwrap()).unwrap(), 2);
        let one = t.ring().one();
        let c = FrobWindow::teichmuller(&t.witt_ring().unwrap(), &vec![one; 4], 1).unwrap();
        assert!(matches!(insep_degree_probe(&t, &c), Err(Error::NoMatchWithinDepth { .. })));
    }

    #[test]
    fn perturbed_tower_is_rejected() {
        let t = build_tower(&kummer(3, 8).unwrap(), 2).unwrap();
        let mut pis: Vec<RingElt> = (0..=2).map(|i| t.pi(i).clone()).collect();
        pis[2] = pis[2].scale(2);
        assert!(matches!(normfield_uniformizer_with(&t, &pis), Err(Error::NormIncompatible { level: 2 })));
    }
}
