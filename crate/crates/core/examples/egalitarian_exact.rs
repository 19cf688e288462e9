//! Exact greedy for the egalitarian objective on a small network, compared
//! with exhaustive search.

use coopnet::egal_exact::{brute_force_opt_egal, greedy_egal_exact};
use coopnet::generators::{gen_instance, gen_wbar, GraphSpec, InstanceSpec};
use coopnet::harness::accuracy;

fn main() -> coopnet::Result<()> {
    let wbar = gen_wbar(&GraphSpec::pa(24, 3))?;
    let inst = gen_instance(&wbar, &InstanceSpec { omega_size: 6, ..InstanceSpec::with_seed(3) })?;
    println!("faulty mass {:.3}", inst.faulty_mass());

    for k in 1..=3 {
        let (plan, trace) = greedy_egal_exact(&inst, k, 1.0)?;
        let (best, opt) = brute_force_opt_egal(&inst, k, 1.0)?;
        println!(
            "k={k}: greedy {:?} gain {:.3} (acc {:.3}), optimum {best:?} gain {opt:.3}",
            plan.s,
            trace.total(),
            accuracy(&inst, &plan)?
        );
    }

    let (_, trace) = greedy_egal_exact(&inst, 5, 1.0)?;
    print!("{}", trace.to_csv());
    Ok(())
}
