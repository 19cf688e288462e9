//! Two networks with the same weights and error rates but different best
//! interventions. Methods that only see rates cannot tell them apart.

use coopnet::egal_exact::greedy_egal_exact;
use coopnet::generators::adversarial_fixture;
use coopnet::harness::{select, Method};
use coopnet::InterventionPlan;

fn main() -> coopnet::Result<()> {
    let n = 50;
    for variant in [1, 2] {
        let inst = adversarial_fixture(n, variant)?;
        let (plan, trace) = greedy_egal_exact(&inst, 1, 1.0)?;
        println!("variant {variant}: exact greedy picks {:?}, gain {}", plan.s, trace.total());
        for m in Method::ALL.into_iter().filter(|m| m.rates_only()) {
            let s = select(m, &inst, 1, 0)?;
            let g = inst.gain_egal_direct(&InterventionPlan::new(s.clone(), 1.0))?;
            println!("  {:<8} picks {s:?}, gain {g}", m.name());
        }
    }
    Ok(())
}
