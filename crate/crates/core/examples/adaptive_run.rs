//! Minimal library usage: run the adaptive loop on one benchmark and print
//! the convergence history.

use fluxls::adaptivity::{amr_loop, AmrConfig};
use fluxls::assembly::MethodKind;
use fluxls::problems::problem;

fn main() {
    let prob = problem("pws_nonmatching").expect("catalog problem");
    let mut config = AmrConfig::new(0);
    config.node_budget = 4000;
    let run = amr_loop(&prob, MethodKind::Lsfem, &config).expect("assembly");
    println!("iter  nodes   dofs   estimator     ls_error      l2_u");
    for r in &run.records {
        let e = r.errors.as_ref().unwrap();
        println!(
            "{:>4} {:>6} {:>6}  {:.4e}  {:.4e}  {:.4e}",
            r.iter, r.n_vertices, r.n_dofs, r.estimator, e.ls_norm, e.l2_u
        );
    }
    println!("stopped: {:?}", run.stop);
}
