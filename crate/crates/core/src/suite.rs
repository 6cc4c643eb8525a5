//! Seeded acceptance suite over desk-scale configurations.
//!
//! Each criterion draws from its own ChaCha stream derived from the seed, so a
//! report depends only on the seed and the case counts.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::{rat_int, Rat};
use crate::normfield::{insep_degree_probe, normfield_uniformizer};
use crate::padic::{make_ring, CoefDoc, LevelDoc, LevelKind, LocalRing, RingDoc, RingElt};
use crate::ramification::{elementary_data, herbrand_step, relative_psi, slope_schedule_holds, slope_threshold, step_psis};
use crate::structure::{structure_polys, PiSymbol, PolyKind};
use crate::tower::{build_tower, cyclotomic, kummer, linearization_residual, linearize, PhiTower};
use crate::windows::FrobWindow;
use crate::witt::{Endo, PolyEndo, WittRing, WittVector};

/// A Witt vector setting: prime, `q`, and whether `π` is `p` or the root of `y² − p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittConfig {
    pub p: u64,
    pub q: u64,
    pub eisenstein: bool,
}

impl WittConfig {
    pub fn label(&self) -> String {
        let pi = if self.eisenstein { format!("sqrt{}", self.p) } else { self.p.to_string() };
        format!("p={} q={} pi={pi}", self.p, self.q)
    }

    pub fn pi_symbol(&self) -> PiSymbol {
        if self.eisenstein {
            PiSymbol::eisenstein(self.p, &sqrt_poly(self.p)).expect("y^2 - p is Eisenstein")
        } else {
            PiSymbol::prime(self.p)
        }
    }

    /// Witt ring over `Z_p` or `Z_p[√p]` with `digits` base digits.
    pub fn witt_ring(&self, digits: u32) -> Result<WittRing> {
        if !self.eisenstein {
            return WittRing::new(&LocalRing::base(self.p, digits)?, self.q);
        }
        let ring = sqrt_ring(self.p, digits)?;
        WittRing::with_pi(&ring, self.q, self.pi_symbol(), vec![BigInt::zero(), BigInt::one()])
    }
}

fn sqrt_poly(p: u64) -> Vec<BigInt> {
    vec![-BigInt::from(p), BigInt::zero(), BigInt::one()]
}

/// `Z_p[y]/(y² − p)` with `y` as uniformizer.
pub fn sqrt_ring(p: u64, digits: u32) -> Result<LocalRing> {
    make_ring(&RingDoc {
        prime: p,
        precision: digits,
        levels: vec![LevelDoc {
            poly: sqrt_poly(p).into_iter().map(|c| CoefDoc::Scalar(c.into())).collect(),
            uniformizer: vec![0.into(), 1.into()],
            kind: LevelKind::Eisenstein,
        }],
    })
}

/// `p ∈ {2, 3}`, `q ∈ {p, p²}`, `π ∈ {p, √p}`.
pub fn witt_configs() -> Vec<WittConfig> {
    let mut out = Vec::new();
    for p in [2, 3] {
        for q in [p, p * p] {
            for eisenstein in [false, true] {
                out.push(WittConfig { p, q, eisenstein });
            }
        }
    }
    out
}

/// Desk towers: Kummer and cyclotomic for `p ∈ {2, 3}`.
pub fn desk_towers(digits: u32, depth: usize) -> Result<Vec<(String, PhiTower)>> {
    let mut out = Vec::new();
    for p in [2, 3] {
        out.push((format!("kummer p={p}"), build_tower(&kummer(p, digits)?, depth)?));
        out.push((format!("cyclotomic p={p}"), build_tower(&cyclotomic(p, digits)?, depth)?));
    }
    Ok(out)
}

/// Case counts per criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSize {
    pub ghost_pairs: usize,
    pub identities: usize,
    pub dwork: usize,
    pub theta: usize,
    pub linearization: usize,
    pub kernel: usize,
}

impl SuiteSize {
    pub fn full() -> SuiteSize {
        SuiteSize { ghost_pairs: 500, identities: 200, dwork: 100, theta: 100, linearization: 20, kernel: 50 }
    }

    pub fn quick() -> SuiteSize {
        SuiteSize { ghost_pairs: 20, identities: 10, dwork: 5, theta: 5, linearization: 3, kernel: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub skipped: u64,
    /// First few failures, in order of discovery.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub size: SuiteSize,
    pub criteria: Vec<CriterionReport>,
    pub all_pass: bool,
}

const MAX_FAILURES: usize = 5;

struct Tally {
    cases: u64,
    skipped: u64,
    failed: u64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { cases: 0, skipped: 0, failed: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(what());
            }
        }
    }

    fn run(&mut self, what: impl Fn() -> String, f: impl FnOnce() -> Result<bool>) {
        match f() {
            Ok(ok) => self.check(ok, what),
            Err(e) => self.check(false, || format!("{}: {e}", what())),
        }
    }

    fn finish(self, id: u8, name: &str) -> CriterionReport {
        CriterionReport {
            id,
            name: name.into(),
            passed: self.failed == 0 && self.cases > 0,
            cases: self.cases,
            skipped: self.skipped,
            failures: self.failures,
        }
    }
}

pub const CRITERIA: [&str; 10] = [
    "ghost homomorphism",
    "structure polynomial integrality and homogeneity",
    "Witt identities",
    "Dwork lift and lambda section",
    "theta equality",
    "tower pipeline",
    "ramification",
    "functoriality of shifts",
    "linearization",
    "kernel of beta",
];

fn rng_for(seed: u64, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(id) << 56) ^ 0x5851_f42d_4c95_7f2d)
}

/// Componentwise equality at absolute precision `n`.
pub fn same_at(a: &WittVector, b: &WittVector, n: u32) -> bool {
    a.len() == b.len() && a.comps().iter().zip(b.comps()).all(|(x, y)| x.eq_at(y, n))
}

pub fn run_criterion(id: u8, seed: u64, size: &SuiteSize) -> CriterionReport {
    let mut rng = rng_for(seed, id);
    let mut t = Tally::new();
    match id {
        1 => ghost_homomorphism(&mut t, &mut rng, size.ghost_pairs),
        2 => structure_integrality(&mut t),
        3 => witt_identities(&mut t, &mut rng, size.identities),
        4 => dwork_suite(&mut t, &mut rng, size.dwork),
        5 => theta_equality(&mut t, &mut rng, size.theta),
        6 => tower_pipeline(&mut t),
        7 => ramification_suite(&mut t),
        8 => functoriality(&mut t, &mut rng, size.identities / 10),
        9 => linearization(&mut t, &mut rng, size.linearization),
        10 => kernel_of_beta(&mut t, &mut rng, size.kernel),
        _ => t.check(false, || format!("unknown criterion {id}")),
    }
    let name = CRITERIA.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    t.finish(id, name)
}

pub fn run_suite(seed: u64, size: &SuiteSize) -> SuiteReport {
    let criteria: Vec<CriterionReport> = (1..=10).map(|id| run_criterion(id, seed, size)).collect();
    let all_pass = criteria.iter().all(|c| c.passed);
    SuiteReport { seed, size: *size, criteria, all_pass }
}

fn ghost_homomorphism(t: &mut Tally, rng: &mut ChaCha8Rng, pairs: usize) {
    for cfg in witt_configs() {
        let wr = match cfg.witt_ring(8) {
            Ok(w) => w,
            Err(e) => return t.check(false, || format!("{}: {e}", cfg.label())),
        };
        let n = wr.ring().prec();
        for k in 0..pairs {
            let len = 1 + k % 4;
            t.run(
                || format!("{} len {len} pair {k}", cfg.label()),
                || {
                    let a = wr.random(len, rng)?;
                    let b = wr.random(len, rng)?;
                    let s = same_at(&a.add(&b)?, &a.binary_via_ghosts(&b, PolyKind::Sum)?, n);
                    let m = same_at(&a.mul(&b)?, &a.binary_via_ghosts(&b, PolyKind::Product)?, n);
                    Ok(s && m)
                },
            );
        }
    }
}

fn structure_integrality(t: &mut Tally) {
    for cfg in witt_configs() {
        let pi = cfg.pi_symbol();
        let q = cfg.q;
        for kind in [PolyKind::Sum, PolyKind::Product, PolyKind::Frobenius] {
            let first = if kind == PolyKind::Frobenius { 2 } else { 1 };
            for len in first..=4 {
                let set = match structure_polys(q, &pi, kind, len) {
                    Ok(Some(s)) => s,
                    Ok(None) => {
                        t.skipped += 1;
                        continue;
                    }
                    Err(e) => {
                        t.check(false, || format!("{} {} len {len}: {e}", cfg.label(), kind.name()));
                        continue;
                    }
                };
                let mut w: Vec<u64> = (0..len).map(|j| q.pow(j as u32)).collect();
                let homogeneous = match kind {
                    PolyKind::Frobenius => {
                        w.extend(std::iter::repeat_n(0, len));
                        (0..set.polys.len()).all(|i| {
                            set.frobenius_correction(i).is_ok_and(|f| f.is_weighted_homogeneous(&w, q.pow(i as u32 + 1)))
                        })
                    }
                    PolyKind::Sum | PolyKind::Product => {
                        w.extend_from_slice(&w.clone());
                        let factor = if kind == PolyKind::Sum { 1 } else { 2 };
                        set.polys.iter().all(|u| u.poly.is_weighted_homogeneous(&w, factor * q.pow(u.index as u32)))
                    }
                };
                t.check(homogeneous, || format!("{} {} len {len} is not homogeneous", cfg.label(), kind.name()));
            }
        }
    }
}

fn random_unit_multiple(ring: &LocalRing, pi: &RingElt, rng: &mut ChaCha8Rng) -> RingElt {
    pi * &ring.random(rng)
}

fn witt_identities(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    for cfg in witt_configs() {
        let (wr, res) = match cfg.witt_ring(8).and_then(|w| Ok((w.clone(), w.residue()?))) {
            Ok(x) => x,
            Err(e) => return t.check(false, || format!("{}: {e}", cfg.label())),
        };
        let prec = wr.ring().prec();
        let pi = wr.pi_elt();
        let v_pi = wr.v_pi();
        let per = n.div_ceil(witt_configs().len()).max(1);
        for k in 0..per {
            let len = 1 + k % 3;
            let what = |s: &str| format!("{} len {len} case {k}: {s}", cfg.label());
            t.run(
                || what("Fr V = pi"),
                || {
                    let a = wr.random(len, rng)?;
                    Ok(same_at(&a.verschiebung()?.frobenius()?, &a.mul_pi()?, prec))
                },
            );
            t.run(
                || what("pi over the residue ring"),
                || {
                    let a = res.random(len + 1, rng)?;
                    let m = a.mult_by_pi_charp()?;
                    let vf = a.frobenius()?.verschiebung()?;
                    let fv = a.verschiebung()?.frobenius()?.truncate(len + 1);
                    Ok(m == a.mul_pi()? && m == vf && m == fv)
                },
            );
            t.run(
                || what("divisibility transfer"),
                || {
                    let i = (k % 3) as u32 + 1;
                    let mut x = wr.random(len + 1, rng)?;
                    for _ in 0..i {
                        x = x.mul_pi()?;
                    }
                    let ghosts_divisible = x.ghost().iter().all(|g| g.val().is_none_or(|v| v >= i * v_pi));
                    let comps_ok = x.comps().iter().enumerate().all(|(j, c)| {
                        let need = i.saturating_sub(j as u32) * v_pi;
                        c.val().is_none_or(|v| v >= need)
                    });
                    Ok(ghosts_divisible && comps_ok)
                },
            );
            t.run(
                || what("first-component lemma"),
                || {
                    let mut y = wr.random(len + 1, rng)?;
                    let mut comps = y.comps().to_vec();
                    comps[0] = random_unit_multiple(wr.ring(), &pi, rng);
                    y = wr.vector(comps)?;
                    let w = y.frobenius_div_pi()?;
                    let known = w.prec().min(prec.saturating_sub(v_pi));
                    Ok(same_at(&w.mul_pi()?, &y.frobenius()?, known))
                },
            );
        }
    }
}

fn phis(p: u64) -> Vec<(&'static str, PolyEndo)> {
    let q = p as usize;
    let mut lt = vec![0i64; q + 1];
    lt[q] = 1;
    lt[1] = p as i64;
    let cyc = crate::tower::compose_int(&crate::tower::binomial_shift(p), &[BigInt::zero(), BigInt::one()]);
    vec![("x^q", PolyEndo::power(p)), ("x^q+px", PolyEndo::from_i64s(&lt)), ("(1+x)^p-1", PolyEndo::new(cyc))]
}

fn dwork_suite(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    for p in [2u64, 3] {
        let wr = match WittRing::new(&LocalRing::base(p, 10).unwrap(), p) {
            Ok(w) => w,
            Err(e) => return t.check(false, || format!("p={p}: {e}")),
        };
        let ring = wr.ring().clone();
        let full = ring.prec();
        for (name, phi) in phis(p) {
            for k in 0..n {
                let len = 2 + k % 3;
                let what = |s: &str| format!("p={p} phi={name} case {k}: {s}");
                let r = ring.random(rng);
                t.run(
                    || what("ghost components"),
                    || {
                        let lam = wr.lambda_phi(&r, &phi, len)?;
                        let mut y = r.clone();
                        let mut ok = lam.comp(0).eq_at(&r, full);
                        for g in lam.ghost() {
                            ok &= g.eq_at(&y, full);
                            y = phi.apply(&y);
                        }
                        Ok(ok && lam.comps().iter().enumerate().all(|(i, c)| c.prec() >= full - i as u32 * wr.v_pi()))
                    },
                );
                t.run(
                    || what("intertwining"),
                    || {
                        let lhs = wr.lambda_phi(&phi.apply(&r), &phi, len - 1)?;
                        let rhs = wr.lambda_phi(&r, &phi, len)?.frobenius()?;
                        Ok(lhs.agrees(&rhs))
                    },
                );
            }
        }
    }
}

/// Window of depth `d` and Witt length `l + 1` from a random vector pushed down by Frobenius.
pub fn random_window(wr: &WittRing, l: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<FrobWindow> {
    let top = wr.random(l + 1 + d, rng)?;
    let mut v = vec![top];
    for _ in 0..d {
        let next = v.last().unwrap().frobenius()?;
        v.push(next);
    }
    v.reverse();
    let v = v.into_iter().map(|x| x.truncate(l + 1)).collect();
    FrobWindow::new(wr, 0, v)
}

fn theta_equality(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    for cfg in witt_configs() {
        let wr = match cfg.witt_ring(8) {
            Ok(w) => w,
            Err(e) => return t.check(false, || format!("{}: {e}", cfg.label())),
        };
        for k in 0..n {
            let l = k % 3;
            let d = l + (k / 3) % (5 - 2 * l).min(2);
            t.run(
                || format!("{} L={l} D={d} case {k}", cfg.label()),
                || {
                    let w = random_window(&wr, l, d, rng)?;
                    let c = w.theta_classical()?;
                    Ok(c.prec() > 0 && w.theta().eq_at(&c, c.prec()))
                },
            );
        }
    }
}

fn tower_pipeline(t: &mut Tally) {
    let towers = match desk_towers(12, 3) {
        Ok(x) => x,
        Err(e) => return t.check(false, || format!("tower construction: {e}")),
    };
    for (name, tw) in &towers {
        t.check(tw.minpoly_docs().iter().all(|d| d.eisenstein), || format!("{name}: not Eisenstein"));
        t.run(|| format!("{name}: norm compatibility"), || Ok(tw.norm_compat_check()?.all_pass));
        t.run(
            || format!("{name}: pipeline"),
            || {
                let w = tw.uniformizer_window(2)?;
                let compatible = w.compat_precision() >= w.known_precision();
                let fields = elementary_data(tw)?.elementary;
                let Some(i1) = tw.find_shift(&w, &fields)? else {
                    return Ok(false);
                };
                let shifted = w.shift_embed(i1)?;
                let beta_ok = shifted.beta()? == normfield_uniformizer(tw)?.truncate(tw.depth() - i1).shift(i1)?;
                let member = tw.alk_membership(&shifted, &fields, crate::tower::DEFAULT_MEMBERSHIP_SLACK)?.holds;
                let qd = insep_degree_probe(tw, &shifted)?;
                Ok(compatible && beta_ok && member && qd >= 1)
            },
        );
    }
}

fn ramification_suite(t: &mut Tally) {
    let towers = match desk_towers(12, 3) {
        Ok(x) => x,
        Err(e) => return t.check(false, || format!("tower construction: {e}")),
    };
    for (name, tw) in &towers {
        t.run(
            || format!("{name}: ramification"),
            || {
                let data = elementary_data(tw)?;
                let q = tw.q();
                let qr = rat_int(q as i64);
                let (a, b) = (data.a.0.clone(), data.b.0.clone());
                let mut ok = a > Rat::zero();
                for (i, br) in data.step_breaks.iter().enumerate() {
                    let scale = qr.pow(i as i32 + 1);
                    ok &= br.iter().all(|x| x.0 >= &a * &scale && x.0 <= &b * &scale);
                    let (phi, psi) = herbrand_step(&br.iter().map(|x| x.0.clone()).collect::<Vec<_>>(), q)?;
                    ok &= phi.compose(&psi)? == crate::ramification::PiecewiseLinear::identity();
                    ok &= identity_below(&psi, &(&a * &scale));
                }
                let steps = step_psis(tw)?;
                for i in 0..tw.depth() {
                    let rel = relative_psi(tw, i)?;
                    ok &= identity_below(&rel, &(&a * qr.pow(i as i32 + 1)));
                    for j in 1..=tw.depth() - i {
                        let part = crate::ramification::herbrand_compose(&steps[i..i + j])?;
                        ok &= slope_schedule_holds(&part, &a, q, i, j);
                    }
                }
                ok &= (0..4).all(|j| slope_threshold(&a, q, j) * rat_int(2) >= &a * rat_int(j as i64 + 1));
                ok &= data.strict_apf_constant.0 > Rat::zero();
                ok &= data.d_checks.iter().filter(|c| c.stable).all(|c| c.holds);
                ok &= data.d_checks.iter().any(|c| c.stable);
                Ok(ok)
            },
        );
    }
}

fn identity_below(f: &crate::ramification::PiecewiseLinear, x: &Rat) -> bool {
    f.points().iter().filter(|(px, _)| px <= x).all(|(px, py)| px == py) && f.eval(x).as_ref() == Some(x)
}

fn functoriality(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    let mut windows: Vec<(String, FrobWindow)> = Vec::new();
    if let Ok(towers) = desk_towers(8, 3) {
        for (name, tw) in towers {
            match tw.uniformizer_window(1) {
                Ok(w) => windows.push((name, w)),
                Err(e) => t.check(false, || format!("{name}: {e}")),
            }
        }
    } else {
        t.check(false, || "tower construction failed".into());
    }
    for cfg in witt_configs().into_iter().filter(|c| c.q == c.p) {
        for k in 0..n.max(1) {
            match cfg.witt_ring(8).and_then(|wr| random_window(&wr, 1, 3, rng)) {
                Ok(w) => windows.push((format!("{} random {k}", cfg.label()), w)),
                Err(e) => t.check(false, || format!("{}: {e}", cfg.label())),
            }
        }
    }
    for (name, w) in &windows {
        for b in 0..=w.depth() {
            t.run(
                || format!("{name}: shift {b}"),
                || {
                    let s = w.shift_embed(b)?;
                    let compat = s.compat_precision() >= w.compat_precision().min(s.known_precision());
                    let beta = s.beta()? == w.beta()?.shift(b)?;
                    let law = (0..=w.depth() - b).all(|c| {
                        matches!((s.shift_embed(c), w.shift_embed(b + c)), (Ok(x), Ok(y)) if x.vectors() == y.vectors() && x.offset() == y.offset())
                    });
                    Ok(compat && beta && law)
                },
            );
        }
    }
}

fn linearization(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    const ORDER: usize = 6;
    const SPARE_DIGITS: u32 = 12;
    for p in [2u64, 3] {
        let max_digits = (1..64).take_while(|&d| LocalRing::base(p, d).is_ok()).last().unwrap();
        let wide = LocalRing::base(p, max_digits).unwrap();
        let pr = wide.from_i64(p as i64);
        for k in 0..n {
            t.run(
                || format!("p={p} series {k}"),
                || {
                    // each coefficient divides by f_1^j − f_1, losing v(f_1) digits
                    let (f1, digits) = loop {
                        let f1 = &pr * &wide.random(rng);
                        if let Some(v) = f1.val() {
                            let digits = SPARE_DIGITS + (ORDER as u32 - 1) * v;
                            if digits <= max_digits {
                                break (f1, digits);
                            }
                        }
                    };
                    let ring = LocalRing::base(p, digits)?;
                    let mut fr = vec![f1.cast(&ring)?];
                    fr.extend((1..ORDER).map(|_| ring.random(rng)));
                    let a = match linearize(&fr, ORDER) {
                        Ok(a) => a,
                        Err(Error::ResonanceDivisionByZero { .. }) => return Ok(true),
                        Err(e) => return Err(e),
                    };
                    let res = linearization_residual(&fr, &a, ORDER)?;
                    Ok(res.iter().all(|c| c.abs_prec() > 0 && (c.is_zero() || c.val().is_none_or(|v| v >= c.abs_prec()))))
                },
            );
        }
    }
}

fn kernel_of_beta(t: &mut Tally, rng: &mut ChaCha8Rng, n: usize) {
    let cfgs = witt_configs();
    for k in 0..n {
        let cfg = cfgs[k % cfgs.len()];
        t.run(
            || format!("{} case {k}", cfg.label()),
            || {
                let wr = cfg.witt_ring(8)?;
                let w = random_window(&wr, 2, 2, rng)?.mul_pi()?;
                if !w.beta()?.is_zero() {
                    return Ok(false);
                }
                let d = w.divide_by_pi()?;
                let back = d.mul_pi()?;
                let prec = d.known_precision().min(d.compat_precision());
                let matches = (0..=d.depth()).all(|i| same_at(&back.vectors()[i], &w.vectors()[i].truncate(d.length() + 1), prec));
                Ok(matches && d.compat_precision() > 0)
            },
        );
    }
}
