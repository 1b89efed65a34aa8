//! Fixture models shared across unit tests.

use crate::model::{Family, Model, ParamPoint, ParameterSpace};

/// Two-symbol categorical model with rows (0.5, 0.5) and (0.9, 0.1).
pub(crate) fn categorical_two_point() -> Model {
    let space =
        ParameterSpace::new(vec![ParamPoint::labeled("p0"), ParamPoint::labeled("p1")]).unwrap();
    Model::new(
        space,
        Family::Categorical {
            support: vec!["a".into(), "b".into()],
            pmf: vec![vec![0.5, 0.5], vec![0.9, 0.1]],
        },
    )
    .unwrap()
}

/// Three-symbol categorical model with three parameter points (J = 2).
pub(crate) fn categorical_three_by_three() -> Model {
    let space = ParameterSpace::new(vec![
        ParamPoint::labeled("p0"),
        ParamPoint::labeled("p1"),
        ParamPoint::labeled("p2"),
    ])
    .unwrap();
    Model::new(
        space,
        Family::Categorical {
            support: vec!["a".into(), "b".into(), "c".into()],
            pmf: vec![
                vec![0.5, 0.3, 0.2],
                vec![0.25, 0.45, 0.3],
                vec![0.3, 0.2, 0.5],
            ],
        },
    )
    .unwrap()
}

/// Poisson model with rates {2, 1}.
pub(crate) fn poisson_pair() -> Model {
    let space =
        ParameterSpace::new(vec![ParamPoint::scalar("2", 2.0), ParamPoint::scalar("1", 1.0)])
            .unwrap();
    Model::new(space, Family::Poisson).unwrap()
}

/// Gaussian three-point model with means {0, 1, 5} and σ = 1.
pub(crate) fn gaussian_three_point() -> Model {
    let space = ParameterSpace::new(vec![
        ParamPoint::scalar("0", 0.0),
        ParamPoint::scalar("1", 1.0),
        ParamPoint::scalar("5", 5.0),
    ])
    .unwrap();
    Model::new(space, Family::GaussianKnownVar { sigma: 1.0 }).unwrap()
}

/// Tumor transplantability model: success probability k^θ, θ ∈ {1, 2, 3}.
pub(crate) fn tumor_model(k: f64) -> Model {
    let space = ParameterSpace::new(vec![
        ParamPoint::scalar("1", 1.0),
        ParamPoint::scalar("2", 2.0),
        ParamPoint::scalar("3", 3.0),
    ])
    .unwrap();
    Model::new(space, Family::BernoulliPower { k }).unwrap()
}
