//! Aggregate optimization: rank by influence, compare closed and direct
//! gains, and probe robustness to a perturbed matrix.

use coopnet::aggregate::{agg_perturbation_bound, gain_agg_closed, influence_scores, select_top_k_agg};
use coopnet::generators::{gen_instance, gen_wbar, GraphSpec, InstanceSpec};
use coopnet::{InfluenceMatrix, InterventionPlan};

fn main() -> coopnet::Result<()> {
    let wbar = gen_wbar(&GraphSpec::ws(64, 7))?;
    let inst = gen_instance(&wbar, &InstanceSpec::with_seed(7).balanced())?;
    let err = inst.error_profile().err;

    let scores = influence_scores(&wbar, &err)?;
    let s = select_top_k_agg(&wbar, &err, 4)?;
    println!("top-4 by influence: {s:?}");
    for &j in &s {
        println!("  agent {j:>2}  Inf = {:.4}", scores[j]);
    }

    let phi = 0.8;
    let closed = gain_agg_closed(&wbar, &err, &s, phi)?;
    let direct = inst.gain_agg_direct(&InterventionPlan::new(s.clone(), phi))?;
    println!("gain: closed {closed:.6}, direct {direct:.6}");

    // shrink every weight by 2% and select again
    let noisy = InfluenceMatrix::new(wbar.as_dmatrix() * 0.98)?;
    let rep = agg_perturbation_bound(&wbar, &noisy, &err, 4, phi)?;
    println!(
        "eps {:.4}  loss {:.2e}  bound 4k eps phi {:.4} ({})",
        rep.epsilon,
        rep.loss,
        rep.bound,
        if rep.within_bound { "holds" } else { "violated" }
    );
    Ok(())
}
