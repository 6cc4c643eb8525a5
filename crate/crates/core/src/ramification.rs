//! Newton polygons, ramification breaks and Herbrand transition functions of φ-iterate towers.
//!
//! Everything here is exact rational arithmetic. Lower-numbering breaks of a step
//! `K(π_i)/K(π_{i−1})` are the valuations `ord_{π_i}(σπ_i − π_i)`, and the transition
//! function uses the integral formula of the classical lower numbering:
//! `φ(u) = (1/q)·(u + 1 + Σ_σ min(i(σ), u + 1)) − 1`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::int::{ceil_rat, p_adic_val, rat_int, Int, Rat, RatPair};
use crate::padic::RingElt;
use crate::tower::{ElementaryField, PhiTower};

/// Continuous piecewise-linear function on `[x_0, x_k]`, or on `[x_0, ∞)` when unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "PiecewiseDoc", try_from = "PiecewiseDoc")]
pub struct PiecewiseLinear {
    points: Vec<(Rat, Rat)>,
    slopes: Vec<Rat>,
    unbounded: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiecewiseDoc {
    pub breakpoints: Vec<(RatPair, RatPair)>,
    pub slopes: Vec<RatPair>,
    pub unbounded: bool,
}

impl From<PiecewiseLinear> for PiecewiseDoc {
    fn from(f: PiecewiseLinear) -> Self {
        PiecewiseDoc {
            breakpoints: f.points.into_iter().map(|(x, y)| (RatPair(x), RatPair(y))).collect(),
            slopes: f.slopes.into_iter().map(RatPair).collect(),
            unbounded: f.unbounded,
        }
    }
}

impl TryFrom<PiecewiseDoc> for PiecewiseLinear {
    type Error = Error;

    fn try_from(d: PiecewiseDoc) -> Result<Self> {
        let points: Vec<(Rat, Rat)> = d.breakpoints.into_iter().map(|(x, y)| (x.0, y.0)).collect();
        let tail = if d.unbounded {
            Some(d.slopes.last().ok_or_else(|| Error::Malformed("unbounded function without slopes".into()))?.0.clone())
        } else {
            None
        };
        let f = PiecewiseLinear::from_vertices(points, tail)?;
        if f.slopes.len() != d.slopes.len() || f.slopes.iter().zip(&d.slopes).any(|(a, b)| a != &b.0) {
            return Err(Error::Malformed("slopes do not match breakpoints".into()));
        }
        Ok(f)
    }
}

impl PiecewiseLinear {
    /// Build from vertices with strictly increasing abscissae and an optional slope beyond the last one.
    /// Collinear interior vertices are dropped.
    pub fn from_vertices(points: Vec<(Rat, Rat)>, tail: Option<Rat>) -> Result<PiecewiseLinear> {
        if points.is_empty() {
            return Err(Error::DegenerateInput);
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Malformed("breakpoint abscissae must increase strictly".into()));
        }
        let mut pts: Vec<(Rat, Rat)> = vec![points[0].clone()];
        let mut slopes: Vec<Rat> = Vec::new();
        for pt in points.into_iter().skip(1) {
            let last = pts.last().unwrap();
            let s = (&pt.1 - &last.1) / (&pt.0 - &last.0);
            if slopes.last() == Some(&s) {
                pts.pop();
            } else {
                slopes.push(s);
            }
            pts.push(pt);
        }
        let unbounded = tail.is_some();
        if let Some(t) = tail {
            if slopes.last() == Some(&t) {
                pts.pop();
            } else {
                slopes.push(t);
            }
        }
        Ok(PiecewiseLinear { points: pts, slopes, unbounded })
    }

    /// `x ↦ s·x` on `[0, ∞)`.
    pub fn linear(s: Rat) -> PiecewiseLinear {
        PiecewiseLinear { points: vec![(Rat::zero(), Rat::zero())], slopes: vec![s], unbounded: true }
    }

    pub fn identity() -> PiecewiseLinear {
        Self::linear(Rat::one())
    }

    /// Vertices, including the endpoints of the domain.
    pub fn points(&self) -> &[(Rat, Rat)] {
        &self.points
    }

    /// `slopes()[k]` is the slope to the right of `points()[k]`.
    pub fn slopes(&self) -> &[Rat] {
        &self.slopes
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    pub fn start(&self) -> &Rat {
        &self.points[0].0
    }

    /// Right end of the domain, `None` when unbounded.
    pub fn end(&self) -> Option<&Rat> {
        (!self.unbounded).then(|| &self.points.last().unwrap().0)
    }

    /// Abscissae where the slope changes.
    pub fn breakpoints(&self) -> Vec<Rat> {
        let last = if self.unbounded { self.points.len() } else { self.points.len() - 1 };
        self.points[1..last].iter().map(|p| p.0.clone()).collect()
    }

    /// `(horizontal length, slope)` of each bounded segment.
    pub fn segments(&self) -> Vec<(Rat, Rat)> {
        self.points.windows(2).zip(&self.slopes).map(|(w, s)| (&w[1].0 - &w[0].0, s.clone())).collect()
    }

    fn in_domain(&self, x: &Rat) -> bool {
        x >= self.start() && self.end().is_none_or(|e| x <= e)
    }

    /// Value at `x`, or `None` outside the domain.
    pub fn eval(&self, x: &Rat) -> Option<Rat> {
        if !self.in_domain(x) {
            return None;
        }
        let k = self.points.partition_point(|p| &p.0 <= x) - 1;
        let (px, py) = &self.points[k];
        if px == x {
            return Some(py.clone());
        }
        Some(py + &self.slopes[k] * (x - px))
    }

    /// Slope immediately to the right of `x`, or `None` if the domain ends there.
    pub fn slope_right(&self, x: &Rat) -> Option<Rat> {
        if !self.in_domain(x) || self.end() == Some(x) {
            return None;
        }
        let k = self.points.partition_point(|p| &p.0 <= x) - 1;
        Some(self.slopes[k].clone())
    }

    pub fn is_increasing(&self) -> bool {
        self.slopes.iter().all(|s| s.is_positive())
    }

    pub fn is_convex(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_concave(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] >= w[1])
    }

    /// Inverse of a strictly increasing function.
    pub fn inverse(&self) -> Result<PiecewiseLinear> {
        if !self.is_increasing() {
            return Err(Error::DegenerateInput);
        }
        let pts = self.points.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
        let tail = self.unbounded.then(|| self.slopes.last().unwrap().recip());
        PiecewiseLinear::from_vertices(pts, tail)
    }

    /// `self ∘ inner` for increasing `inner` whose initial value lies in the domain of `self`.
    pub fn compose(&self, inner: &PiecewiseLinear) -> Result<PiecewiseLinear> {
        if !inner.is_increasing() || !self.in_domain(&inner.points[0].1) {
            return Err(Error::DegenerateInput);
        }
        let inv = inner.inverse()?;
        let mut end = inner.end().cloned();
        if let Some(e) = self.end() {
            if let Some(x) = inv.eval(e) {
                end = Some(end.map_or(x.clone(), |v| v.min(x)));
            }
        }
        let mut xs: Vec<Rat> = inner.points.iter().map(|p| p.0.clone()).collect();
        xs.extend(self.points.iter().filter_map(|p| inv.eval(&p.0)));
        if let Some(e) = &end {
            xs.push(e.clone());
            xs.retain(|x| x <= e);
        }
        xs.sort();
        xs.dedup();
        let pts = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&inner.eval(&x).unwrap()).unwrap();
                (x, y)
            })
            .collect();
        let tail = if end.is_none() {
            let y_last = inner.points.last().unwrap().1.clone().max(self.points.last().unwrap().0.clone());
            let outer_tail = self.slope_right(&y_last).unwrap();
            Some(outer_tail * inner.slopes.last().unwrap())
        } else {
            None
        };
        PiecewiseLinear::from_vertices(pts, tail)
    }

    /// Exact samples `(x, f(x))` at `n + 1` equally spaced points of `[start, x_max]` merged with the vertices.
    pub fn samples(&self, x_max: &Rat, n: u32) -> Vec<(Rat, Rat)> {
        let start = self.start().clone();
        let hi = self.end().map_or(x_max.clone(), |e| e.clone().min(x_max.clone()));
        let mut xs: Vec<Rat> = self.points.iter().map(|p| p.0.clone()).filter(|x| x <= &hi).collect();
        let n = n.max(1);
        for k in 0..=n {
            xs.push(&start + (&hi - &start) * Rat::new(BigInt::from(k), BigInt::from(n)));
        }
        xs.sort();
        xs.dedup();
        xs.into_iter().filter_map(|x| self.eval(&x).map(|y| (x, y))).collect()
    }

    /// Plot-ready CSV of [`samples`](Self::samples) with six decimal places.
    pub fn to_csv(&self, x_max: &Rat, n: u32, header: &str) -> String {
        let mut out = format!("x,{header}\n");
        for (x, y) in self.samples(x_max, n) {
            let _ = writeln!(out, "{},{}", decimal(&x, 6), decimal(&y, 6));
        }
        out
    }
}

/// Round-half-away decimal rendering of a rational.
pub fn decimal(x: &Rat, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = x * Rat::from_integer(scale.clone());
    let r = scaled.round().to_integer();
    let neg = r.is_negative();
    let (int, frac) = r.abs().div_rem(&scale);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{:0>width$}", frac.to_string(), width = places as usize)
}

/// Lower convex hull of the finite points `(index, valuation)`.
pub fn newton_polygon(points: &[(i64, Option<Rat>)]) -> Result<PiecewiseLinear> {
    let mut pts: Vec<(Rat, Rat)> = points.iter().filter_map(|(i, v)| v.as_ref().map(|v| (rat_int(*i), v.clone()))).collect();
    pts.sort();
    pts.dedup_by(|b, a| a.0 == b.0);
    if pts.len() < 2 {
        return Err(Error::DegenerateInput);
    }
    let mut hull: Vec<(Rat, Rat)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let cross = (&b.0 - &a.0) * (&pt.1 - &a.1) - (&b.1 - &a.1) * (&pt.0 - &a.0);
            if cross.is_positive() {
                break;
            }
            hull.pop();
        }
        hull.push(pt);
    }
    PiecewiseLinear::from_vertices(hull, None)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for t in 0..k {
        r = r * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    r
}

fn top_val(x: &RingElt, what: &str) -> Result<Rat> {
    x.val().map(|v| rat_int(v as i64)).ok_or_else(|| Error::PrecisionExhausted(format!("{what} is zero at working precision")))
}

/// `ord_{π_0}(p)`, the absolute ramification index of `K`.
fn base_ram_index(t: &PhiTower) -> Result<Rat> {
    let ring = t.ring();
    Ok(top_val(&ring.from_i64(ring.p() as i64), "p")? / top_val(t.pi(0), "pi_0")?)
}

/// Lower-numbering breaks `ord_{π_i}(σπ_i − π_i)` of the step `K(π_i)/K(π_{i−1})`, sorted.
pub fn step_breaks(t: &PhiTower, i: usize) -> Result<Vec<Rat>> {
    if i == 0 || i > t.depth() {
        return Err(Error::InsufficientDepth { needed: i, available: t.depth() });
    }
    let ring = t.ring();
    let phi = t.iterate().phi();
    let q = phi.len() - 1;
    let pi = t.pi(i);
    let mut pows = vec![ring.one()];
    for _ in 1..q {
        let next = pows.last().unwrap() * pi;
        pows.push(next);
    }
    // coefficient of x^{k} in φ(x + π_i), k ≥ 1; the constant term vanishes
    let mut pts = Vec::with_capacity(q);
    let mut zeros = Vec::new();
    for k in 1..=q {
        let mut c = ring.zero();
        for (j, fj) in phi.iter().enumerate().skip(k) {
            if !fj.is_zero() {
                c = &c + &pows[j - k].mul_elt(&ring.from_bigint(&(fj * binomial(j, k))));
            }
        }
        match c.val() {
            Some(v) => pts.push(((k - 1) as i64, Some(rat_int(v as i64)))),
            None => zeros.push(((k - 1) as i64, rat_int(c.prec() as i64))),
        }
    }
    let hull = newton_polygon(&pts)?;
    if hull.start() != &Rat::zero() || hull.end() != Some(&rat_int(q as i64 - 1)) {
        return Err(Error::PrecisionExhausted(format!("Newton polygon at level {i} lost an endpoint")));
    }
    for (k, floor) in &zeros {
        if hull.eval(&rat_int(*k)).is_some_and(|h| &h > floor) {
            return Err(Error::PrecisionExhausted(format!("coefficient {k} at level {i} is below the hull at working precision")));
        }
    }
    let scale = top_val(pi, "pi_i")?;
    let mut out = Vec::with_capacity(q - 1);
    for (len, s) in hull.segments() {
        let v = -s / &scale;
        for _ in 0..len.to_integer().to_usize().unwrap() {
            out.push(v.clone());
        }
    }
    out.sort();
    Ok(out)
}

/// Transition pair `(φ, ψ)` of a degree-`q` step with the given lower-numbering breaks.
pub fn herbrand_step(breaks: &[Rat], q: u64) -> Result<(PiecewiseLinear, PiecewiseLinear)> {
    if breaks.len() as u64 + 1 != q {
        return Err(Error::InvalidMultiset { size: breaks.len(), expected: q.saturating_sub(1) as usize });
    }
    let qr = rat_int(q as i64);
    let phi_at = |u: &Rat| -> Rat {
        let v = u + Rat::one();
        let sum: Rat = breaks.iter().map(|b| b.clone().min(v.clone())).sum();
        (v + sum) / &qr - Rat::one()
    };
    let mut xs = vec![Rat::zero()];
    xs.extend(breaks.iter().map(|b| b - Rat::one()).filter(|x| x.is_positive()));
    xs.sort();
    xs.dedup();
    let pts = xs.into_iter().map(|x| {
        let y = phi_at(&x);
        (x, y)
    });
    let phi = PiecewiseLinear::from_vertices(pts.collect(), Some(qr.recip()))?;
    let psi = phi.inverse()?;
    Ok((phi, psi))
}

/// Compose transition functions of consecutive steps, innermost (lowest) step first.
pub fn herbrand_compose(steps: &[PiecewiseLinear]) -> Result<PiecewiseLinear> {
    let mut acc = PiecewiseLinear::identity();
    for s in steps {
        acc = s.compose(&acc)?;
    }
    Ok(acc)
}

/// `A_j = (j + 1)·A − j·A/q`.
pub fn slope_threshold(a: &Rat, q: u64, j: u64) -> Rat {
    let jr = rat_int(j as i64);
    (&jr + Rat::one()) * a - &jr * a / rat_int(q as i64)
}

/// Check the slope schedule of `ψ_{K(π_{i+j})/K(π_i)}`: slope at most `q^l` beyond `A_{l−1}·q^{i+1}`.
pub fn slope_schedule_holds(psi: &PiecewiseLinear, a: &Rat, q: u64, i: usize, j: usize) -> bool {
    let unit = rat_int(q as i64).pow(i as i32 + 1);
    let thresholds: Vec<Rat> = (0..j as u64).map(|l| slope_threshold(a, q, l) * &unit).collect();
    psi.points().iter().zip(psi.slopes()).all(|((x, _), s)| {
        let l = thresholds.iter().filter(|t| *t <= x).count() as i32;
        s <= &rat_int(q as i64).pow(l)
    })
}

/// `(A, B, D)` of the tower, with `B̄ = (q − 1)!·B` and `D = q^j·B̄` for the least `j` with `B̄ ≤ A_j·q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub a: Rat,
    pub b: Rat,
    pub b_bar: Rat,
    pub d: Rat,
    pub d_exponent: u64,
}

pub fn bounds_abd(t: &PhiTower) -> Result<Bounds> {
    if t.depth() < 2 {
        return Err(Error::InsufficientDepth { needed: 2, available: t.depth() });
    }
    let q = t.q();
    let qr = rat_int(q as i64);
    let a = base_ram_index(t)? / &qr;
    let ring = t.ring();
    let phi = t.iterate().phi();
    let dphi: Vec<RingElt> = phi.iter().enumerate().skip(1).map(|(j, c)| ring.from_bigint(&(c * BigInt::from(j)))).collect();
    let mut b = Rat::zero();
    for i in 1..=t.depth() {
        let pi = t.pi(i);
        let v = top_val(&crate::padic::eval_poly(&dphi, pi), "phi'(pi_i)")? / top_val(pi, "pi_i")?;
        b = b.max(v / qr.pow(i as i32));
    }
    let fact: BigInt = (1..q).map(BigInt::from).product();
    let b_bar = &b * Rat::from_integer(fact);
    let mut j = 0u64;
    while b_bar > slope_threshold(&a, q, j) * &qr {
        j += 1;
    }
    let d = qr.pow(j as i32) * &b_bar;
    Ok(Bounds { a, b, b_bar, d, d_exponent: j })
}

/// Lower bound for the smallest break of level `level`, from `φ` alone.
///
/// Uses only `ord(π_level) = 1` and `ord_{π_level}(p) = e_K·q^level`, so it is valid
/// beyond the computed depth.
pub fn break_lower_bound(phi: &[BigInt], p: u64, e_base: &Rat, level: u32) -> Rat {
    let q = phi.len() - 1;
    let e = e_base * rat_int(q as i64).pow(level as i32);
    let mut best: Option<Rat> = None;
    for m in 0..q - 1 {
        let k = m + 1;
        let lb = phi
            .iter()
            .enumerate()
            .skip(k)
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| rat_int(p_adic_val(&(c * binomial(j, k)), p) as i64) * &e + rat_int((j - k) as i64))
            .min();
        if let Some(lb) = lb {
            let r = lb / rat_int((q - 1 - m) as i64);
            best = Some(best.map_or(r.clone(), |b| b.min(r)));
        }
    }
    best.unwrap_or_else(|| e.clone())
}

/// One upper-numbering break `b_m` with its lower value `i_m = ψ(b_m)` and the degree jump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpperBreak {
    pub upper: RatPair,
    pub lower: RatPair,
    pub degree_below: u64,
    pub degree_above: u64,
}

/// Check of `ψ_{L/K(π_i)}(B̄·q^i) ≤ D·q^i` at one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DBoundCheck {
    pub level: usize,
    pub value: RatPair,
    pub bound: RatPair,
    pub stable: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamData {
    pub q: u64,
    pub depth: usize,
    /// `step_breaks[i − 1]` is the multiset of level `i`, in `ord_{π_i}` units.
    pub step_breaks: Vec<Vec<RatPair>>,
    pub a: RatPair,
    pub b: RatPair,
    pub b_bar: RatPair,
    pub d: RatPair,
    pub n: RatPair,
    /// `ψ_{K(π_depth)/K}`, equal to `ψ_{L/K}` on `[0, stable_below]`.
    pub psi: PiecewiseLinear,
    pub stable_below: RatPair,
    pub upper_breaks: Vec<UpperBreak>,
    /// `K_1, K_2, …` with `[K_m : K_1]` and the tower level they coincide with.
    pub elementary: Vec<ElementaryField>,
    /// `c(L/K_1)`, minimum of `i_n / [K_{n+1} : K_1]`.
    pub c: RatPair,
    /// `s(K_m) = ⌈[K_m : K_1]·c(L/K_1)⌉`.
    pub s: Vec<Int>,
    /// Minimum of `ψ_{L/K}(u) / [G_K : G_K^u G_L]` over stable `u ≥ b_1`.
    pub strict_apf_constant: RatPair,
    pub d_checks: Vec<DBoundCheck>,
}

/// Identity region of `ψ_{L/K(π_n)}`: below the smallest break of all deeper steps, minus one.
fn identity_watermark(t: &PhiTower) -> Result<Rat> {
    let e = base_ram_index(t)?;
    let n = t.depth() as u32;
    let phi = t.iterate().phi();
    let lb = (n + 1..=n + 3).map(|l| break_lower_bound(phi, t.ring().p(), &e, l)).min().unwrap();
    Ok((lb - Rat::one()).max(Rat::zero()))
}

fn q_log(x: &Rat, q: u64) -> Option<usize> {
    if !x.is_integer() {
        return None;
    }
    let mut v = x.to_integer();
    let qb = BigInt::from(q);
    let mut k = 0;
    while v > BigInt::one() {
        let (d, r) = v.div_rem(&qb);
        if !r.is_zero() {
            return None;
        }
        v = d;
        k += 1;
    }
    v.is_one().then_some(k)
}

/// Transition functions `ψ_{K(π_i)/K(π_{i−1})}` for `i = 1..=depth`.
pub fn step_psis(t: &PhiTower) -> Result<Vec<PiecewiseLinear>> {
    (1..=t.depth()).map(|i| Ok(herbrand_step(&step_breaks(t, i)?, t.q())?.1)).collect()
}

/// `ψ_{K(π_n)/K(π_i)}` at computed depth `n`.
pub fn relative_psi(t: &PhiTower, i: usize) -> Result<PiecewiseLinear> {
    herbrand_compose(&step_psis(t)?[i..])
}

pub fn elementary_data(t: &PhiTower) -> Result<RamData> {
    let bounds = bounds_abd(t)?;
    let q = t.q();
    let qr = rat_int(q as i64);
    let breaks: Vec<Vec<Rat>> = (1..=t.depth()).map(|i| step_breaks(t, i)).collect::<Result<_>>()?;
    let steps: Vec<PiecewiseLinear> = breaks.iter().map(|b| Ok(herbrand_step(b, q)?.1)).collect::<Result<_>>()?;
    let psi = herbrand_compose(&steps)?;
    let watermark = identity_watermark(t)?;
    let stable_below = psi.inverse()?.eval(&watermark).unwrap();

    let base_slope = psi.slopes()[0].clone();
    let level_of = |s: &Rat| -> Result<ElementaryField> {
        let deg = s / &base_slope;
        let level = q_log(&deg, q).ok_or_else(|| Error::ElementaryFieldUnidentified { degree: deg.to_string() })?;
        Ok(ElementaryField { degree: deg.to_integer().to_u64().unwrap(), level })
    };
    let mut elementary = vec![level_of(&base_slope)?];
    let mut upper_breaks = Vec::new();
    for b in psi.breakpoints().into_iter().filter(|b| b < &stable_below) {
        let below = elementary.last().unwrap().degree;
        let field = level_of(&psi.slope_right(&b).unwrap())?;
        upper_breaks.push(UpperBreak {
            lower: RatPair(psi.eval(&b).unwrap()),
            upper: RatPair(b),
            degree_below: below,
            degree_above: field.degree,
        });
        elementary.push(field);
    }
    if upper_breaks.is_empty() {
        return Err(Error::InsufficientDepth { needed: t.depth() + 1, available: t.depth() });
    }
    let c = upper_breaks
        .iter()
        .map(|u| &u.lower.0 / rat_int(u.degree_above as i64))
        .min()
        .unwrap();
    let strict = upper_breaks
        .iter()
        .map(|u| psi.eval(&u.upper.0).unwrap() / psi.slope_right(&u.upper.0).unwrap())
        .min()
        .unwrap();
    let s = elementary.iter().map(|f| Int(ceil_rat(&(rat_int(f.degree as i64) * &c)))).collect();

    let mut d_checks = Vec::new();
    for i in 0..t.depth() {
        let rel = herbrand_compose(&steps[i..])?;
        let x = &bounds.b_bar * qr.pow(i as i32);
        let value = rel.eval(&x).unwrap();
        let bound = &bounds.d * qr.pow(i as i32);
        d_checks.push(DBoundCheck {
            level: i,
            stable: value <= watermark,
            holds: value <= bound,
            value: RatPair(value),
            bound: RatPair(bound),
        });
    }
    Ok(RamData {
        q,
        depth: t.depth(),
        step_breaks: breaks.into_iter().map(|v| v.into_iter().map(RatPair).collect()).collect(),
        n: RatPair(&bounds.d / &c),
        a: RatPair(bounds.a),
        b: RatPair(bounds.b),
        b_bar: RatPair(bounds.b_bar),
        d: RatPair(bounds.d),
        psi,
        stable_below: RatPair(stable_below),
        upper_breaks,
        elementary,
        c: RatPair(c),
        s,
        strict_apf_constant: RatPair(strict),
        d_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::int::rat;
    use crate::tower::{build_tower, cyclotomic, kummer};

    #[test]
    fn hull_examples() {
        let f = newton_polygon(&[(0, Some(rat_int(1))), (1, Some(rat_int(0)))]).unwrap();
        assert_eq!(f.segments(), vec![(rat_int(1), rat_int(-1))]);
        let g = newton_polygon(&[(0, Some(rat_int(2))), (1, Some(rat_int(3))), (2, Some(rat_int(0)))]).unwrap();
        assert_eq!(g.points().len(), 2);
        assert_eq!(newton_polygon(&[(0, Some(rat_int(2))), (1, None)]), Err(Error::DegenerateInput));
    }

    #[test]
    fn desk_breaks() {
        let t = build_tower(&kummer(2, 10).unwrap(), 2).unwrap();
        assert_eq!(step_breaks(&t, 1).unwrap(), vec![rat_int(3)]);
        assert_eq!(step_breaks(&t, 2).unwrap(), vec![rat_int(5)]);
        let c = build_tower(&cyclotomic(2, 10).unwrap(), 2).unwrap();
        assert_eq!(step_breaks(&c, 1).unwrap(), vec![rat_int(2)]);
        let k3 = build_tower(&kummer(3, 8).unwrap(), 1).unwrap();
        assert_eq!(step_breaks(&k3, 1).unwrap(), vec![rat(5, 2), rat(5, 2)]);
    }

    #[test]
    fn step_inverse_pair() {
        let (phi, psi) = herbrand_step(&[rat_int(3)], 2).unwrap();
        assert_eq!(phi.compose(&psi).unwrap(), PiecewiseLinear::identity());
        assert_eq!(psi.compose(&phi).unwrap(), PiecewiseLinear::identity());
        assert_eq!(psi.eval(&rat_int(2)), Some(rat_int(2)));
        assert_eq!(psi.eval(&rat_int(3)), Some(rat_int(4)));
        let (id, _) = herbrand_step(&[], 1).unwrap();
        assert_eq!(id, PiecewiseLinear::identity());
        assert!(matches!(herbrand_step(&[rat_int(3)], 3), Err(Error::InvalidMultiset { .. })));
    }

    #[test]
    fn kummer_two_data() {
        let t = build_tower(&kummer(2, 12).unwrap(), 3).unwrap();
        let b = bounds_abd(&t).unwrap();
        assert_eq!(b.a, rat(1, 2));
        assert_eq!(b.b, rat(3, 2));
        let r = elementary_data(&t).unwrap();
        let uppers: Vec<Rat> = r.upper_breaks.iter().map(|u| u.upper.0.clone()).collect();
        assert_eq!(uppers, vec![rat_int(2), rat_int(3), rat_int(4)]);
        assert_eq!(r.c.0, rat_int(1));
        assert_eq!(r.stable_below.0, rat_int(5));
        assert!(r.d_checks.iter().all(|c| c.holds));
    }

    #[test]
    fn csv_is_exact_decimal() {
        assert_eq!(decimal(&rat(-3, 2), 2), "-1.50");
        let (_, psi) = herbrand_step(&[rat_int(3)], 2).unwrap();
        let csv = psi.to_csv(&rat_int(4), 2, "psi");
        assert!(csv.contains("4.000000,6.000000"));
    }
}
