//! Greedy from error rates only, under independent agents. Estimates are
//! checked against exact enumeration on a few rows.

use coopnet::approx_ind::{ambiguity_report, delta_gain_ind_oracle, greedy_egal_appx_ind, IndependentModel, PsiContext};
use coopnet::generators::{gen_wbar, GraphModel, GraphSpec};

fn main() -> coopnet::Result<()> {
    let n = 12;
    let wbar = gen_wbar(&GraphSpec::new(GraphModel::RandomW { sparsity: 0.6 }, n, 5))?;
    let err: Vec<f64> = (0..n).map(|j| 0.05 + 0.05 * j as f64).collect();

    let (plan, trace) = greedy_egal_appx_ind(&wbar, &err, 3)?;
    println!("selected {:?}, estimated gain {:.4}", plan.s, trace.total());

    let inst = IndependentModel::new(err.clone(), 0.5)?.expand(&wbar)?;
    println!("exact gain on the expanded model {:.4}", inst.gain_egal_direct(&plan)?);

    let ctx = PsiContext::new(&wbar, &err)?;
    let (s, u) = (&plan.s[..1], plan.s[1]);
    for i in 0..4 {
        println!(
            "row {i}: estimate {:.4}  exact {:.4}  bound {:.4}",
            ctx.approx_delta_gain_row(i, s, u),
            delta_gain_ind_oracle(&wbar, &err, s, u, i)?,
            ctx.row_bound(i, s, u)
        );
    }

    let amb = ambiguity_report(&wbar, &err)?;
    println!("{} of {n} agents ambiguous, delta {:.3}", amb.ambiguous_count(), amb.delta);
    Ok(())
}
