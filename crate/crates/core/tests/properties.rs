use proptest::prelude::*;
use skellam_markov::{
    cp_exponential, exact_distribution, ChainParams, Direction, LatticeMeasure, NormKind,
    TruncationBudget,
};

fn signed() -> impl Strategy<Value = LatticeMeasure> {
    (-6i64..6, prop::collection::vec(-1.0f64..1.0, 1..10))
        .prop_map(|(offset, w)| LatticeMeasure::new(offset, w).unwrap())
}

fn zero_mass() -> impl Strategy<Value = LatticeMeasure> {
    signed().prop_map(|m| {
        let (lo, _) = m.support().unwrap_or((0, 0));
        &m - &LatticeMeasure::dirac(lo - 1).scale(m.mass())
    })
}

fn probability() -> impl Strategy<Value = LatticeMeasure> {
    (-4i64..4, prop::collection::vec(0.01f64..1.0, 1..6)).prop_map(|(offset, w)| {
        let total: f64 = w.iter().sum();
        LatticeMeasure::new(offset, w.iter().map(|x| x / total).collect()).unwrap()
    })
}

fn tv(m: &LatticeMeasure) -> f64 {
    m.norm(NormKind::TotalVariation).unwrap()
}

fn close(a: &LatticeMeasure, b: &LatticeMeasure, tol: f64) -> bool {
    tv(&(a - b)) <= tol
}

proptest! {
    #[test]
    fn convolution_commutes(m in signed(), v in signed()) {
        prop_assert!(close(&m.convolve(&v), &v.convolve(&m), 1e-14));
    }

    #[test]
    fn convolution_associates(a in signed(), b in signed(), c in signed()) {
        let left = a.convolve(&b).convolve(&c);
        let right = a.convolve(&b.convolve(&c));
        prop_assert!(close(&left, &right, 1e-12 * (1.0 + tv(&a) * tv(&b) * tv(&c))));
    }

    #[test]
    fn mass_is_multiplicative(m in signed(), v in signed()) {
        let lhs = m.convolve(&v).mass();
        prop_assert!((lhs - m.mass() * v.mass()).abs() <= 1e-12 * (1.0 + tv(&m) * tv(&v)));
    }

    #[test]
    fn power_matches_repeated_convolution(m in signed(), k in 0u64..7) {
        let mut direct = LatticeMeasure::dirac(0);
        for _ in 0..k {
            direct = direct.convolve(&m);
        }
        prop_assert!(close(&m.convolve_power(k), &direct, 1e-12 * (1.0 + tv(&m).powi(k as i32))));
    }

    #[test]
    fn basic_norm_relations(m in signed(), v in signed()) {
        let loc = m.norm(NormKind::Local).unwrap();
        prop_assert!(loc <= tv(&m));
        prop_assert!(tv(&m.convolve(&v)) <= tv(&m) * tv(&v) * (1.0 + 1e-12));
    }

    #[test]
    fn wasserstein_convolution_bound(z in zero_mass(), v in signed()) {
        let lhs = z.convolve(&v).norm(NormKind::Wasserstein).unwrap();
        let rhs = z.norm(NormKind::Wasserstein).unwrap() * tv(&v);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn difference_links_local_tv_wasserstein(m in signed()) {
        let d = m.diff_conv(Direction::Plus);
        prop_assert!(m.norm(NormKind::Local).unwrap() <= tv(&d) + 1e-15);
        let w = d.norm(NormKind::Wasserstein).unwrap();
        prop_assert!((w - tv(&m)).abs() <= 1e-12 * tv(&m).max(1.0));
    }

    #[test]
    fn interpolation_inequalities(z in zero_mass(), r in prop::sample::select(vec![1.5, 2.0, 3.0])) {
        let (loc, t, w) = (
            z.norm(NormKind::Local).unwrap(),
            tv(&z),
            z.norm(NormKind::Wasserstein).unwrap(),
        );
        let lr = z.norm(NormKind::Lr(r)).unwrap();
        prop_assert!(lr <= loc.powf((r - 1.0) / r) * t.powf(1.0 / r) + 1e-12);
        let cap = z.norm(NormKind::CapLr(r)).unwrap();
        prop_assert!(cap <= t.powf((r - 1.0) / r) * w.powf(1.0 / r) + 1e-12);
    }

    #[test]
    fn exponential_is_additive(f in probability(), u1 in 0.01f64..8.0, u2 in 0.01f64..8.0) {
        let mut tb = TruncationBudget::new(1e-15);
        let joint = cp_exponential(u1 + u2, &f, &mut tb).unwrap();
        let split = cp_exponential(u1, &f, &mut tb).unwrap()
            .convolve(&cp_exponential(u2, &f, &mut tb).unwrap());
        prop_assert!(close(&joint, &split, 1e-12));
        prop_assert!(joint.is_nonnegative());
    }

    #[test]
    fn json_round_trip(m in signed()) {
        prop_assert_eq!(LatticeMeasure::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn symmetric_start_gives_symmetric_law(
        alpha in 0.0f64..=1.0 / 30.0,
        beta in 0.001f64..=1.0 / 30.0,
        p2 in 0.0f64..1.0,
        n in 0u64..60,
    ) {
        let side = (1.0 - p2) / 2.0;
        let cp = ChainParams::new(alpha, beta, side, p2, side).unwrap();
        let f = exact_distribution(&cp, n);
        prop_assert!(close(&f, &f.reflect(), 1e-14));
        prop_assert!((f.mass() - 1.0).abs() <= 1e-12);
    }
}
