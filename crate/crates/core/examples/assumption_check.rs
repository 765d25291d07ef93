//! Checks the spectral-density bound for every pair of disjoint coordinate
//! sets of the reference model.

use mcar_graphs::empirical::{all_disjoint_pairs, assumption_density_check_pairs, spectral_mass_check};
use mcar_graphs::model::{build_state_space, reference_ou_spec};

fn main() -> mcar_graphs::Result<()> {
    let ss = build_state_space(&reference_ou_spec())?;
    let reports = assumption_density_check_pairs(&ss, &all_disjoint_pairs(ss.k), 100.0, 0.05)?;
    for r in &reports {
        println!("{r}\n");
    }
    let ok = reports.iter().filter(|r| r.satisfied).count();
    println!("{ok}/{} pairs satisfied", reports.len());
    println!("spectral mass defect {:.3e}", spectral_mass_check(&ss, 200.0, 0.01)?);
    Ok(())
}
