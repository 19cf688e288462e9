//! Greedy under group dependence for several values of rho.

use coopnet::approx_group::{greedy_egal_appx_group, Color, GroupStructure};
use coopnet::approx_ind::greedy_egal_appx_ind;
use coopnet::generators::{gen_wbar, GraphSpec};

fn main() -> coopnet::Result<()> {
    let n = 10;
    let wbar = gen_wbar(&GraphSpec::random_w(n, 11))?;
    let colors: Vec<Color> = (0..n)
        .map(|j| match j % 3 {
            0 => Color::Red,
            1 => Color::Blue,
            _ => Color::White,
        })
        .collect();
    let err: Vec<f64> = (0..n).map(|j| 0.1 + 0.06 * j as f64).collect();

    for rho in [0.0, 0.3, 0.7, 1.0] {
        let group = GroupStructure::new(colors.clone(), rho, err.clone(), 0.4)?;
        let (plan, trace) = greedy_egal_appx_group(&wbar, &group, 3)?;
        let exact = group.expand(&wbar)?.gain_egal_direct(&plan)?;
        println!("rho {rho:.1}: {:?} estimate {:.4} exact {exact:.4}", plan.s, trace.total());
    }

    let (plan, _) = greedy_egal_appx_ind(&wbar, &err, 3)?;
    println!("independent greedy: {:?}", plan.s);
    Ok(())
}
