use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use piwitt::int::rat;
use piwitt::normfield::{default_precision, embed_normfield, NormFieldElt};
use piwitt::padic::ResidueElt;
use piwitt::ramification::{elementary_data, newton_polygon, PiecewiseLinear};
use piwitt::suite::{run_suite, witt_configs, SuiteSize};
use piwitt::tower::{build_tower, kummer, PhiTower};
use piwitt::windows::{CharPSeq, FrobWindow};
use piwitt::witt::WittVector;
use piwitt::{LocalRing, Rat, RingElt};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn same(a: &RingElt, b: &RingElt) -> bool {
    a.eq_at(b, a.prec().min(b.prec()))
}

fn increasing_pl(steps: &[(i64, i64)], tail: i64) -> PiecewiseLinear {
    let mut pts = vec![(rat(0, 1), rat(0, 1))];
    for &(dx, dy) in steps {
        let (x, y) = pts.last().unwrap().clone();
        pts.push((x + rat(dx, 1), y + rat(dy, 2)));
    }
    PiecewiseLinear::from_vertices(pts, Some(rat(tail, 3))).unwrap()
}

fn kummer_tower() -> PhiTower {
    build_tower(&kummer(2, 8).unwrap(), 2).unwrap()
}

fn random_series(t: &PhiTower, bits: &[u64]) -> NormFieldElt {
    let coeffs: Vec<ResidueElt> = bits.iter().map(|&b| ResidueElt(vec![b])).collect();
    NormFieldElt::from_residues(t, &coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn piecewise_inverse_round_trips(steps in prop::collection::vec((1i64..5, 1i64..9), 0..5), tail in 1i64..7, x in 0i64..40) {
        let f = increasing_pl(&steps, tail);
        let g = f.inverse().unwrap();
        let x = rat(x, 3);
        let y = f.eval(&x).unwrap();
        prop_assert_eq!(g.eval(&y).unwrap(), x.clone());
        prop_assert_eq!(g.compose(&f).unwrap().eval(&x).unwrap(), x);
    }

    #[test]
    fn piecewise_document_round_trips(steps in prop::collection::vec((1i64..5, 1i64..9), 0..5), tail in 1i64..7) {
        let f = increasing_pl(&steps, tail);
        let json = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<PiecewiseLinear>(&json).unwrap(), f);
    }

    #[test]
    fn newton_polygon_is_convex_lower_bound(vals in prop::collection::vec(prop::option::weighted(0.8, 0i64..30), 2..9)) {
        let pts: Vec<(i64, Option<Rat>)> = vals.iter().enumerate().map(|(i, v)| (i as i64, v.map(|v| rat(v, 2)))).collect();
        let known = pts.iter().filter(|p| p.1.is_some()).count();
        match newton_polygon(&pts) {
            Ok(h) => {
                prop_assert!(h.is_convex());
                for (i, v) in &pts {
                    if let (Some(v), Some(hv)) = (v, h.eval(&rat(*i, 1))) {
                        prop_assert!(hv <= *v);
                    }
                }
            }
            Err(_) => prop_assert!(known < 2),
        }
    }

    #[test]
    fn ghost_map_is_a_ring_homomorphism(seed: u64, cfg_idx in 0usize..8, len in 1usize..4) {
        let cfg = witt_configs()[cfg_idx];
        let wr = cfg.witt_ring(8).unwrap();
        let mut r = rng(seed);
        let (a, b) = (wr.random(len, &mut r).unwrap(), wr.random(len, &mut r).unwrap());
        let (ga, gb) = (a.ghost(), b.ghost());
        let (gs, gp) = (a.add(&b).unwrap().ghost(), a.mul(&b).unwrap().ghost());
        for i in 0..len {
            prop_assert!(same(&gs[i], &(&ga[i] + &gb[i])));
            prop_assert!(same(&gp[i], &(&ga[i] * &gb[i])));
        }
    }

    #[test]
    fn teichmuller_is_multiplicative(seed: u64, cfg_idx in 0usize..8) {
        let cfg = witt_configs()[cfg_idx];
        let wr = cfg.witt_ring(8).unwrap();
        let mut r = rng(seed);
        let (x, y) = (wr.ring().random(&mut r), wr.ring().random(&mut r));
        let lhs = wr.teichmuller(&x, 3).unwrap().mul(&wr.teichmuller(&y, 3).unwrap()).unwrap();
        prop_assert!(lhs.agrees(&wr.teichmuller(&(&x * &y), 3).unwrap()));
    }

    #[test]
    fn witt_vector_document_round_trips(seed: u64, cfg_idx in 0usize..8, len in 1usize..5) {
        let wr = witt_configs()[cfg_idx].witt_ring(8).unwrap();
        let v = wr.random(len, &mut rng(seed)).unwrap();
        let json = serde_json::to_string(&v.to_doc()).unwrap();
        let back = WittVector::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert!(back.agrees(&v));
    }

    #[test]
    fn local_ring_axioms(seed: u64, p in prop::sample::select(vec![2u64, 3, 5]), digits in 2u32..12) {
        let ring = LocalRing::base(p, digits).unwrap();
        let mut r = rng(seed);
        let (a, b, c) = (ring.random(&mut r), ring.random(&mut r), ring.random(&mut r));
        prop_assert!(same(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c))));
        prop_assert!(same(&(&(&a * &b) * &c), &(&a * &(&b * &c))));
        prop_assert!(same(&(&a + &b), &(&b + &a)));
        prop_assert!((&a - &a).is_zero());
        prop_assert!(same(&(&a * &ring.one()), &a));
    }

    #[test]
    fn charp_sequences_require_q_power_compatibility(seed: u64, depth in 1usize..4) {
        let t = kummer_tower();
        let rr = piwitt::normfield::normfield_uniformizer(&t).unwrap().ring().clone();
        let mut last = rr.random(&mut rng(seed));
        let mut entries = vec![last.clone()];
        for _ in 0..depth {
            last = last.pow(t.q());
            entries.push(last.clone());
        }
        entries.reverse();
        let s = CharPSeq::new(&rr, t.q(), 0, entries.clone()).unwrap();
        let json = serde_json::to_string(&s.to_doc()).unwrap();
        prop_assert_eq!(CharPSeq::from_doc(&serde_json::from_str(&json).unwrap()).unwrap(), s);
        let bumped = &entries[0] + &rr.one();
        if bumped != entries[0] {
            entries[0] = bumped;
            prop_assert!(CharPSeq::new(&rr, t.q(), 0, entries).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn normfield_embedding_is_a_ring_map(a in prop::collection::vec(0u64..2, 8), b in prop::collection::vec(0u64..2, 8)) {
        let t = kummer_tower();
        let n = default_precision(&t, 2);
        prop_assert_eq!(n, 4);
        let (x, y) = (random_series(&t, &a), random_series(&t, &b));
        let ex = embed_normfield(&x, &t, 2).unwrap();
        let ey = embed_normfield(&y, &t, 2).unwrap();
        let sum = embed_normfield(&x.add(&y), &t, 2).unwrap();
        let prod = embed_normfield(&x.mul(&y), &t, 2).unwrap();
        for i in 0..=2 {
            prop_assert_eq!(&sum.entries()[i], &(&ex.entries()[i] + &ey.entries()[i]));
            prop_assert_eq!(&prod.entries()[i], &(&ex.entries()[i] * &ey.entries()[i]));
        }
        let doc = serde_json::to_string(&x.to_doc()).unwrap();
        prop_assert_eq!(NormFieldElt::from_doc(&t, &serde_json::from_str(&doc).unwrap()).unwrap(), x);
    }

    #[test]
    fn window_document_round_trips(len in 1usize..4) {
        let w = kummer_tower().uniformizer_window(len).unwrap();
        let json = serde_json::to_string(&w.to_doc()).unwrap();
        prop_assert_eq!(FrobWindow::from_doc(&serde_json::from_str(&json).unwrap()).unwrap(), w);
    }
}

#[test]
fn ramification_data_round_trips() {
    let d = elementary_data(&kummer_tower()).unwrap();
    let json = serde_json::to_string(&d).unwrap();
    assert_eq!(serde_json::from_str::<piwitt::ramification::RamData>(&json).unwrap(), d);
}

#[test]
fn suite_is_deterministic() {
    for seed in [1, 7] {
        assert_eq!(run_suite(seed, &SuiteSize::quick()), run_suite(seed, &SuiteSize::quick()));
    }
}
