use irig::{MomentValue, WeightModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn models() -> Vec<WeightModel> {
    vec![
        WeightModel::degenerate(2.0),
        WeightModel::exponential(1.0),
        WeightModel::exponential(2.5),
        WeightModel::pareto(2.5, 1.0),
        WeightModel::pareto(9.5, 0.5),
        WeightModel::discrete(vec![(0.0, 0.2), (1.0, 0.5), (4.0, 0.3)]),
    ]
}

#[test]
fn sample_moments_within_five_standard_errors() {
    let count = 1_000_000;
    for (seed, model) in models().into_iter().enumerate() {
        let draws = model.sample(count, &mut ChaCha8Rng::seed_from_u64(seed as u64));
        for k in 1..=4 {
            let MomentValue::Finite(exact) = model.moment(k).unwrap() else { continue };
            // the estimated standard error needs a finite variance of X^k
            if !model.moment(2 * k).map_or(true, |m| m.is_finite()) {
                continue;
            }
            let powers: Vec<f64> = draws.iter().map(|x| x.powi(k as i32)).collect();
            let mean = powers.iter().sum::<f64>() / count as f64;
            let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            let se = (var / count as f64).sqrt();
            assert!((mean - exact).abs() <= 5.0 * se + 1e-12 * exact, "{model} k={k}: {mean} vs {exact} (se {se})");
        }
    }
}

#[test]
fn heavy_tailed_first_moment_converges() {
    let model = WeightModel::pareto(2.5, 1.0);
    let draws = model.sample(1_000_000, &mut ChaCha8Rng::seed_from_u64(40));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean - 5.0 / 3.0).abs() < 0.01, "mean {mean}");
}

#[test]
fn jensen_holds_for_built_in_models() {
    for model in models() {
        if let (MomentValue::Finite(a1), MomentValue::Finite(a2)) = (model.moment(1).unwrap(), model.moment(2).unwrap())
        {
            assert!(a1 <= a2.sqrt() * (1.0 + 1e-15), "{model}");
        }
    }
}

#[test]
fn sampling_is_reproducible() {
    for model in models() {
        let a = model.sample(1000, &mut ChaCha8Rng::seed_from_u64(7));
        let b = model.sample(1000, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b, "{model}");
    }
}
