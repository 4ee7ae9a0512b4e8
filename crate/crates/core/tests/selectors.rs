use mebk::bandwidth::{posterior_density, reference_bandwidths, ucv_objective};
use mebk::numerics::rng::stream;
use mebk::simlab::{integrated_squared_error, scenario_sample, ScenarioId};
use mebk::{
    bayes_adaptive_bandwidths, ucv_select, BandwidthVector, Bandwidths, CubatureSpec, PriorConfig, Sample, Support,
    UcvSettings,
};
use rand::Rng;

fn simpson_weights(steps: usize, dx: f64) -> Vec<f64> {
    (0..=steps)
        .map(|k| {
            let c = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * dx / 3.0
        })
        .collect()
}

/// Integral of the posterior over the positive orthant, by Simpson's rule in
/// `ln h` on each axis.
fn posterior_mass(s: &Sample, prior: &PriorConfig, i: usize, step: f64) -> f64 {
    let beta_min = prior.beta().iter().copied().fold(f64::INFINITY, f64::min);
    let lo = beta_min.ln() - 6.0;
    let hi = 40.0 / (prior.alpha() - 1.5) + 10.0;
    let steps = 2 * (((hi - lo) / step) as usize / 2 + 1);
    let dx = (hi - lo) / steps as f64;
    let w = simpson_weights(steps, dx);
    let nodes: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * dx).collect();
    match s.d() {
        1 => nodes
            .iter()
            .zip(&w)
            .map(|(u, wk)| wk * u.exp() * posterior_density(s, prior, i, &[u.exp()]).unwrap())
            .sum(),
        2 => {
            let mut total = 0.0;
            for (u, wu) in nodes.iter().zip(&w) {
                for (v, wv) in nodes.iter().zip(&w) {
                    let p = posterior_density(s, prior, i, &[u.exp(), v.exp()]).unwrap();
                    total += wu * wv * (u + v).exp() * p;
                }
            }
            total
        }
        _ => unreachable!(),
    }
}

fn random_instance(rng: &mut impl Rng, n: usize, d: usize) -> Sample {
    let bounds: Vec<(f64, f64)> = (0..d)
        .map(|_| {
            let a = rng.random_range(-3.0..3.0);
            (a, a + rng.random_range(0.5..6.0))
        })
        .collect();
    let data = (0..n * d)
        .map(|k| {
            let (a, b) = bounds[k % d];
            // One observation in eight sits on an edge.
            match rng.random_range(0..16) {
                0 => a,
                1 => b,
                _ => a + rng.random_range(0.02..0.98) * (b - a),
            }
        })
        .collect();
    Sample::new(data, Support::from_bounds(&bounds).unwrap()).unwrap()
}

#[test]
fn posterior_integrates_to_one_in_one_dimension() {
    let mut rng = stream(501, 0);
    for _ in 0..30 {
        let n = rng.random_range(2..=6);
        let s = random_instance(&mut rng, n, 1);
        let prior = PriorConfig::new(rng.random_range(2.5..12.0), vec![rng.random_range(0.05..1.0)]).unwrap();
        for i in 0..n {
            let mass = posterior_mass(&s, &prior, i, 0.005);
            assert!((mass - 1.0).abs() < 1e-4, "n={n} i={i}: mass {mass}");
        }
    }
}

#[test]
fn posterior_integrates_to_one_in_two_dimensions() {
    let mut rng = stream(502, 0);
    for _ in 0..4 {
        let n = rng.random_range(2..=6);
        let s = random_instance(&mut rng, n, 2);
        let beta = vec![rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)];
        let prior = PriorConfig::new(rng.random_range(3.0..12.0), beta).unwrap();
        let i = rng.random_range(0..n);
        let mass = posterior_mass(&s, &prior, i, 0.02);
        assert!((mass - 1.0).abs() < 1e-4, "n={n} i={i}: mass {mass}");
    }
}

#[test]
fn ucv_select_matches_log_grid_search() {
    let s = scenario_sample(ScenarioId::B, 50, 6).unwrap();
    let spec = CubatureSpec::default_for(1);
    let settings = UcvSettings::default();
    let sel = ucv_select(&s, &spec, &settings).unwrap();

    // Grid over the same search interval the optimiser sees.
    let lo = (settings.reference_fraction * reference_bandwidths(&s)[0]).max(settings.lower);
    let (l0, l1) = (lo.ln(), settings.upper.ln());
    let step = (l1 - l0) / 1999.0;
    let (best_h, best_v) = (0..2000)
        .map(|k| {
            let h = (l0 + k as f64 * step).exp();
            (h, ucv_objective(&s, &BandwidthVector::new(vec![h]).unwrap(), &spec).unwrap())
        })
        .fold((f64::NAN, f64::INFINITY), |acc, (h, v)| if v < acc.1 { (h, v) } else { acc });

    let h = sel.h.as_slice()[0];
    assert!((h.ln() - best_h.ln()).abs() <= step, "optimiser {h} vs grid {best_h}");
    assert!(sel.value <= best_v + 1e-12, "optimiser value {} vs grid {best_v}", sel.value);
}

#[test]
fn ucv_downstream_ise_is_within_the_reference_spread() {
    let (mean, sd) = (9.1671e-3, 7.0321e-3);
    let spec = CubatureSpec::default_for(1);
    let reps = 12;
    let ise: Vec<f64> = (0..reps)
        .map(|r| {
            let s = scenario_sample(ScenarioId::B, 200, 700 + r).unwrap();
            let h = ucv_select(&s, &spec, &UcvSettings::default()).unwrap().h;
            integrated_squared_error(ScenarioId::B, &s, &Bandwidths::Global(h)).unwrap().ise
        })
        .collect();
    let avg = ise.iter().sum::<f64>() / reps as f64;
    assert!((avg - mean).abs() <= sd, "mean ISE {avg}");
}

#[test]
fn bayes_bandwidths_shrink_as_n_grows() {
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let medians: Vec<f64> = [50, 200, 500]
        .iter()
        .map(|&n| {
            let s = scenario_sample(ScenarioId::B, n, 31).unwrap();
            let prior = PriorConfig::default_for(n, 1, 0.25).unwrap();
            median(bayes_adaptive_bandwidths(&s, &prior).unwrap().values().to_vec())
        })
        .collect();
    assert!(medians[0] > medians[1] && medians[1] > medians[2], "{medians:?}");
}
