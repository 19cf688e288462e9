//! Expressed influence matrices for the four dynamics, checked against
//! direct simulation.

use coopnet::dynamics::{Dynamics, DynamicsSpec};
use nalgebra::dmatrix;

fn main() -> coopnet::Result<()> {
    let yhat = [1.0, -1.0, 1.0];
    let stochastic = dmatrix![
        0.5, 0.5, 0.0;
        0.2, 0.6, 0.2;
        0.0, 0.5, 0.5
    ];
    let graph = dmatrix![
        0.0, 1.0, 0.0;
        1.0, 0.0, 1.0;
        0.0, 1.0, 0.0
    ];

    let kinds = [
        ("degroot", Dynamics::DeGroot { w: stochastic.clone() }),
        ("fj", Dynamics::Fj { w: graph.clone() }),
        (
            "product",
            Dynamics::FiniteProduct {
                factors: vec![stochastic.clone(), stochastic.clone()],
            },
        ),
        ("fj-3-steps", Dynamics::FjFiniteSteps { w: graph, alpha: None, steps: 3 }),
    ];
    for (name, d) in kinds {
        let spec = DynamicsSpec::new(d);
        let wbar = spec.influence_matrix()?;
        let closed = wbar.apply(&yhat)?;
        let sim = spec.simulate_until_converged(&yhat)?;
        println!("{name:>10}: closed {closed:.4?}  simulated {sim:.4?}");
    }
    Ok(())
}
