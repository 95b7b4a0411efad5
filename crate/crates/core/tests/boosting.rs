use sera_core::boosting::{base_score_for, fit, fit_traced, grad_hess, Hyperparams, Objective, TrainingObjective};
use sera_core::data::Dataset;
use sera_core::evaluation::synthetic::lognormal_benchmark;
use sera_core::relevance::build_relevance;
use sera_core::sera::RelevanceGrid;

/// Squared error written against the plugin trait only.
struct PlainSquares;

impl TrainingObjective for PlainSquares {
    fn tag(&self) -> &str {
        "plain"
    }

    fn base_score(&self, y: &[f64]) -> sera_core::Result<f64> {
        Ok(y.iter().sum::<f64>() / y.len() as f64)
    }

    fn grad_hess(&self, y: &[f64], y_hat: &[f64], grad: &mut [f64], hess: &mut [f64]) -> sera_core::Result<()> {
        for i in 0..y.len() {
            grad[i] = y_hat[i] - y[i];
            hess[i] = 1.0;
        }
        Ok(())
    }

    fn loss(&self, y: &[f64], y_hat: &[f64]) -> sera_core::Result<f64> {
        Ok(0.5 * y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
    }
}

fn sera_objective(data: &Dataset) -> Objective {
    let phi = build_relevance(data.target(), None).unwrap();
    let rel = phi.evaluate_all(data.target()).unwrap();
    Objective::sera(&rel, RelevanceGrid::default()).unwrap()
}

#[test]
fn custom_objective_matches_builtin_squared_error() {
    let data = lognormal_benchmark(300, 5);
    let params = Hyperparams::new(40, 4, 0.2);
    let a = fit(&data, &Objective::Mse, &params, 1).unwrap();
    let b = fit(&data, &PlainSquares, &params, 1).unwrap();
    let pa = a.predict_dataset(&data).unwrap();
    let pb = b.predict_dataset(&data).unwrap();
    for (x, y) in pa.iter().zip(&pb) {
        assert!((x - y).abs() <= 1e-12);
    }
}

#[test]
fn sera_training_loss_never_increases() {
    let data = lognormal_benchmark(400, 2);
    let obj = sera_objective(&data);
    for params in [Hyperparams::new(60, 3, 0.3), Hyperparams::new(30, 6, 1.0)] {
        let (_, trace) = fit_traced(&data, &obj, &params, 0).unwrap();
        for w in trace.loss.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn trace_predictions_match_model_predictions() {
    let data = lognormal_benchmark(250, 8);
    let obj = sera_objective(&data);
    let (model, trace) = fit_traced(&data, &obj, &Hyperparams::new(25, 5, 0.1), 0).unwrap();
    let pred = model.predict_dataset(&data).unwrap();
    for (a, b) in pred.iter().zip(&trace.train_predictions) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn truncated_model_equals_shorter_fit() {
    let data = lognormal_benchmark(200, 3);
    let obj = sera_objective(&data);
    let long = fit(&data, &obj, &Hyperparams::new(30, 3, 0.1), 0).unwrap();
    let short = fit(&data, &obj, &Hyperparams::new(12, 3, 0.1), 0).unwrap();
    assert_eq!(long.truncated(12), short);
}

#[test]
fn sera_base_score_is_weighted_mean() {
    let data = lognormal_benchmark(150, 4);
    let obj = sera_objective(&data);
    let Objective::Sera(w) = &obj else { unreachable!() };
    let expected = w.weights.iter().zip(data.target()).map(|(a, b)| a * b).sum::<f64>() / w.weights.iter().sum::<f64>();
    let got = base_score_for(&obj, data.target()).unwrap();
    assert!((got - expected).abs() <= 1e-12 * expected.abs());
    let (g, _) = grad_hess(&obj, data.target(), &vec![got; data.n_rows()]).unwrap();
    assert!(g.iter().sum::<f64>().abs() <= 1e-9);
}

#[test]
fn model_json_round_trip_predicts_identically() {
    let data = lognormal_benchmark(120, 6);
    let model = fit(&data, &sera_objective(&data), &Hyperparams::new(15, 4, 0.3), 0).unwrap();
    let back = sera_core::boosting::GbmModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(model.predict_dataset(&data).unwrap(), back.predict_dataset(&data).unwrap());
}
