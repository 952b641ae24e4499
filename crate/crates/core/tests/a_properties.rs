use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

use spectral_embed::embedding::{embed, image_hausdorff, AlignmentRegistry, NoAlignment};
use spectral_embed::graph::ring_laplacian;
use spectral_embed::heatkernel::{full_plan, heat_kernel, heat_trace, kernel_matrix, TruncationPlan};
use spectral_embed::pullback::{canonical_gram, gt_gram, gt_gram_by_carre, hs_norm_rel};
use spectral_embed::spaces::{build_circle_space, build_interval_space, build_torus_space, SpaceModel};
use spectral_embed::spectrum::{
    analytic_circle_spectrum, analytic_interval_spectrum, analytic_torus_spectrum, discrete_spectrum, Calibration,
    Spectrum,
};

const NODES: usize = 64;
// frequencies up to 15, so products of modes stay exact under the 64-point rule
const MODES: usize = 31;

fn circle() -> (SpaceModel, Spectrum) {
    (
        build_circle_space(1.0, NODES).unwrap(),
        analytic_circle_spectrum(1.0, MODES).unwrap(),
    )
}

fn ring() -> (SpaceModel, Spectrum) {
    let space = build_circle_space(1.0, 48).unwrap();
    let op = ring_laplacian(48, 1.0).unwrap();
    let spec = discrete_spectrum(&op, &space.weights(), 48, Calibration::None).unwrap();
    (space, spec)
}

fn plan_at(spec: &Spectrum, level: usize) -> TruncationPlan {
    let mut p = full_plan(spec, 1e-6, 1.0);
    p.level = level;
    p
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_symmetric(x in 0..NODES, y in 0..NODES, t in 1e-3f64..5.0, level in 1..=MODES) {
        let (space, spec) = circle();
        let plan = plan_at(&spec, level);
        let a = heat_kernel(&spec, space.node(x), space.node(y), t, &plan).unwrap();
        let b = heat_kernel(&spec, space.node(y), space.node(x), t, &plan).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn kernel_integrates_to_one(x in 0..NODES, t in 1e-2f64..5.0) {
        let (space, spec) = circle();
        let plan = plan_at(&spec, MODES);
        let total: f64 = (0..NODES)
            .map(|y| heat_kernel(&spec, space.node(x), space.node(y), t, &plan).unwrap() * space.weight(y))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "{}", total);
    }

    #[test]
    fn graph_kernel_integrates_to_one(x in 0..48usize, t in 1e-2f64..5.0) {
        let (space, spec) = ring();
        let plan = plan_at(&spec, spec.mode_count());
        let total: f64 = (0..48)
            .map(|y| heat_kernel(&spec, space.node(x), space.node(y), t, &plan).unwrap() * space.weight(y))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "{}", total);
    }

    #[test]
    fn semigroup(x in 0..NODES, y in 0..NODES, s in 1e-2f64..1.0, t in 1e-2f64..1.0) {
        let (space, spec) = circle();
        let plan = plan_at(&spec, MODES);
        let lhs: f64 = (0..NODES)
            .map(|z| {
                heat_kernel(&spec, space.node(x), space.node(z), s, &plan).unwrap()
                    * heat_kernel(&spec, space.node(z), space.node(y), t, &plan).unwrap()
                    * space.weight(z)
            })
            .sum();
        let rhs = heat_kernel(&spec, space.node(x), space.node(y), s + t, &plan).unwrap();
        let scale = heat_kernel(&spec, space.node(x), space.node(x), s + t, &plan).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn trace_is_decreasing_and_convex(t in 1e-3f64..2.0, h in 1e-4f64..0.5) {
        let spec = analytic_interval_spectrum(2000).unwrap();
        let plan = plan_at(&spec, 2000);
        let z = |s: f64| heat_trace(&spec, s, &plan).unwrap();
        let (a, b, c) = (z(t), z(t + h), z(t + 2.0 * h));
        prop_assert!(b < a);
        prop_assert!(a - 2.0 * b + c >= -1e-12 * a);
    }

    #[test]
    fn truncated_kernel_is_psd_and_monotone(t in 1e-2f64..2.0, level in 1..MODES) {
        let (space, spec) = circle();
        let lo = kernel_matrix(&spec, &space, t, &plan_at(&spec, level)).unwrap();
        let hi = kernel_matrix(&spec, &space, t, &plan_at(&spec, level + 1)).unwrap();
        let scale = lo.diagonal().max();
        prop_assert!(min_eig(&lo) >= -1e-12 * scale);
        prop_assert!(min_eig(&(&hi - &lo)) >= -1e-12 * scale);
        for i in 0..NODES {
            prop_assert!(hi[(i, i)] >= lo[(i, i)] - 1e-15);
        }
    }

    #[test]
    fn hs_norm_is_frame_invariant(node in 0..64usize, t in 1e-2f64..1.0, rot in 0..4usize) {
        let space = build_torus_space(1.0, 0.7, 8, 8).unwrap();
        let spec = analytic_torus_spectrum(1.0, 0.7, 120).unwrap();
        let frame: Vec<usize> = (1..=6).collect();
        let mut permuted = frame.clone();
        permuted.rotate_left(rot);
        permuted.swap(0, 5);
        let hs = |f: &[usize]| {
            let g = gt_gram(&spec, &space, node, t, 120, f).unwrap();
            let c = canonical_gram(&spec, &space, node, f).unwrap();
            hs_norm_rel(&g, &c).unwrap()
        };
        let (a, b) = (hs(&frame), hs(&permuted));
        prop_assert!((a - b).abs() <= 1e-9 * a, "{} vs {}", a, b);
        let wider: Vec<usize> = (1..=10).collect();
        let w = hs(&wider);
        prop_assert!((a - w).abs() <= 1e-8 * a, "{} vs {}", a, w);
    }

    #[test]
    fn gradient_and_carre_routes_agree(node in 0..NODES, t in 1e-2f64..1.0) {
        let (space, spec) = circle();
        let frame = [1usize, 2, 3, 4];
        let a = gt_gram(&spec, &space, node, t, MODES, &frame).unwrap();
        let b = gt_gram_by_carre(&spec, &space, node, t, MODES, &frame).unwrap();
        let scale = a.gram.norm();
        prop_assert!((&a.gram - &b.gram).norm() <= 1e-10 * scale);
    }

    #[test]
    fn hausdorff_is_a_pseudometric(ta in 0.05f64..1.0, tb in 0.05f64..1.0, tc in 0.05f64..1.0) {
        let space = build_interval_space(33).unwrap();
        let spec = analytic_interval_spectrum(12).unwrap();
        let im = |t: f64| embed(&spec, &space, t, 8).unwrap();
        let (a, b, c) = (im(ta), im(tb), im(tc));
        let reg = AlignmentRegistry::default();
        for name in reg.names() {
            let al = reg.get(name).unwrap();
            prop_assert!(image_hausdorff(&a, &a, al).unwrap() <= 1e-12);
        }
        let d = |p, q| image_hausdorff(p, q, &NoAlignment).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() <= 1e-14);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }
}
