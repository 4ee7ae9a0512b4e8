use mebk::bandwidth::{ucv_objective, PriorConfig};
use mebk::estimator::leave_one_out_eval;
use mebk::numerics::quadrature::AxisRule;
use mebk::simlab::ise::{ise_from_values, ise_points};
use mebk::simlab::ScenarioId;
use mebk::support::{estimate_support, sample_range};
use mebk::{
    bayes_adaptive_bandwidths, BandwidthVector, Bandwidths, CubatureSpec, DensityEstimate, EbKernel, Interval,
    Normalization, Sample, Support,
};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-10.0..10.0f64, 0.2..20.0f64).prop_map(|(a, w)| (a, a + w))
}

/// `n` rows of `d` coordinates strictly inside `[0, 1]^d`, rescaled onto
/// random boxes.
fn sample_strategy(max_n: usize, max_d: usize) -> impl Strategy<Value = Sample> {
    (2..=max_n, 1..=max_d)
        .prop_flat_map(|(n, d)| {
            (
                prop::collection::vec(0.01..0.99f64, n * d),
                prop::collection::vec(interval(), d),
                Just(d),
            )
        })
        .prop_map(|(u, bounds, d)| {
            let data = u
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let (a, b) = bounds[k % d];
                    a + t * (b - a)
                })
                .collect();
            Sample::new(data, Support::from_bounds(&bounds).unwrap()).unwrap()
        })
}

fn global(h: Vec<f64>) -> Bandwidths {
    Bandwidths::Global(BandwidthVector::new(h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_integrates_to_one((a, b) in interval(), t in 0.0..=1.0f64, h in 0.005..3.0f64) {
        let iv = Interval::new(a, b).unwrap();
        let x = (a + t * (b - a)).clamp(a, b);
        let k = EbKernel::new(x, h, iv).unwrap();
        let (nodes, weights) = AxisRule::Graded { order: 20, panels: 64, levels: 40 }.nodes_weights(a, b);
        let mass: f64 = nodes.iter().zip(&weights).map(|(u, w)| w * k.density(*u)).sum();
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {}", mass);
    }

    #[test]
    fn kernel_is_zero_outside_and_nonnegative_inside((a, b) in interval(), t in 0.0..=1.0f64, s in -0.5..1.5f64, h in 0.01..2.0f64) {
        let iv = Interval::new(a, b).unwrap();
        let k = EbKernel::new((a + t * (b - a)).clamp(a, b), h, iv).unwrap();
        let u = a + s * (b - a);
        let v = k.density(u);
        if iv.contains(u) {
            prop_assert!(v >= 0.0 && v.is_finite());
        } else {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn estimate_is_nonnegative_and_permutation_invariant(s in sample_strategy(8, 3), h in 0.02..1.0f64, probe in prop::collection::vec(0.0..=1.0f64, 3)) {
        let d = s.d();
        let bw = global(vec![h; d]);
        let x: Vec<f64> = (0..d).map(|j| {
            let iv = s.support().axis(j);
            (iv.a() + probe[j] * iv.width()).clamp(iv.a(), iv.b())
        }).collect();
        let est = DensityEstimate::new(s.clone(), bw.clone(), Normalization::Raw).unwrap();
        let v = est.eval(&x).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
        let mut rows: Vec<Vec<f64>> = (0..s.n()).map(|i| s.row(i).to_vec()).collect();
        rows.reverse();
        let reversed = Sample::new(rows.concat(), s.support().clone()).unwrap();
        let w = DensityEstimate::new(reversed, bw, Normalization::Raw).unwrap().eval(&x).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * v.max(1e-300));
    }

    #[test]
    fn leave_one_out_recovers_from_full_estimate(s in sample_strategy(7, 2), h in 0.05..1.0f64, pick in 0usize..7) {
        let i = pick % s.n();
        let d = s.d();
        let bw = global(vec![h; d]);
        let full = DensityEstimate::new(s.clone(), bw.clone(), Normalization::Raw).unwrap().eval(s.row(i)).unwrap();
        let own: f64 = (0..d).map(|j| EbKernel::new(s.row(i)[j], h, s.support().axis(j)).unwrap().density(s.row(i)[j])).product();
        let n = s.n() as f64;
        let loo = leave_one_out_eval(&s, &bw, i).unwrap();
        let rebuilt = (n * full - own) / (n - 1.0);
        prop_assert!((loo - rebuilt).abs() <= 1e-9 * full.max(own));
    }

    #[test]
    fn bayes_bandwidths_are_affine_invariant(s in sample_strategy(8, 2), alpha in 1.6..15.0f64, beta in 0.05..3.0f64, scale in 0.1..10.0f64, shift in -5.0..5.0f64) {
        let d = s.d();
        let prior = PriorConfig::new(alpha, vec![beta; d]).unwrap();
        let h = bayes_adaptive_bandwidths(&s, &prior).unwrap();
        let moved: Vec<f64> = s.data().iter().map(|x| shift + scale * x).collect();
        let bounds: Vec<(f64, f64)> = s.support().intervals().iter().map(|iv| (shift + scale * iv.a(), shift + scale * iv.b())).collect();
        let t = Sample::new(moved, Support::from_bounds(&bounds).unwrap()).unwrap();
        let g = bayes_adaptive_bandwidths(&t, &prior).unwrap();
        for (a, b) in h.values().iter().zip(g.values()) {
            prop_assert!(*a > 0.0);
            prop_assert!((a - b).abs() <= 1e-8 * a, "{} vs {}", a, b);
        }
    }

    #[test]
    fn bayes_bandwidths_shrink_with_alpha(s in sample_strategy(6, 1), beta in 0.05..3.0f64) {
        // Every mixture component's mean falls as the prior shape grows.
        let lo = bayes_adaptive_bandwidths(&s, &PriorConfig::new(3.0, vec![beta]).unwrap()).unwrap();
        let hi = bayes_adaptive_bandwidths(&s, &PriorConfig::new(30.0, vec![beta]).unwrap()).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        prop_assert!(mean(hi.values()) < mean(lo.values()));
    }

    #[test]
    fn ucv_objective_scales_with_the_box(s in sample_strategy(6, 1), h in 0.02..0.8f64, scale in 0.2..5.0f64) {
        let spec = CubatureSpec::default_for(1);
        let hv = BandwidthVector::new(vec![h]).unwrap();
        let u = ucv_objective(&s, &hv, &spec).unwrap();
        let iv = s.support().axis(0);
        let moved: Vec<f64> = s.data().iter().map(|x| scale * x).collect();
        let t = Sample::new(moved, Support::from_bounds(&[(scale * iv.a(), scale * iv.b())]).unwrap()).unwrap();
        let v = ucv_objective(&t, &hv, &spec).unwrap();
        prop_assert!((u - scale * v).abs() <= 1e-8 * u.abs().max(1e-12));
    }

    #[test]
    fn estimated_support_contains_sample_range(s in sample_strategy(10, 2), beta in 0.05..2.0f64) {
        // n^(2/5) exceeds 3/2 from three observations on.
        prop_assume!(s.n() >= 3);
        let d = s.d();
        let prior = PriorConfig::default_for(s.n(), d, beta).unwrap();
        let est = estimate_support(s.data(), d, &prior).unwrap();
        let range = sample_range(s.data(), d).unwrap();
        for j in 0..d {
            prop_assert!(est.support.axis(j).a() < range.axis(j).a());
            prop_assert!(est.support.axis(j).b() > range.axis(j).b());
        }
    }

    #[test]
    fn ise_is_nonnegative(values in prop::collection::vec(0.0..3.0f64, 8)) {
        let support = Support::from_bounds(&[(1.0, 5.0)]).unwrap();
        let pts = ise_points(ScenarioId::B, &support).unwrap();
        let estimate: Vec<f64> = (0..pts.len()).map(|k| values[k % values.len()]).collect();
        prop_assert!(ise_from_values(ScenarioId::B, &pts, &estimate) >= 0.0);
    }
}
