use geoquant::distributions::{Characteristic, SimDistribution};
use geoquant::solver::{first_order_residual, SolverRegistry};
use geoquant::{DirectionSet, QuantileIndex, SolverConfig};
use std::time::Instant;

fn main() {
    let reg = SolverRegistry::default();
    let cfg = SolverConfig::default();
    for name in reg.names() {
        let s = reg.get(name).unwrap();
        for beta in [0.5, 0.98] {
            for ch in Characteristic::ALL {
                let d = SimDistribution::new(ch, 0).unwrap().sample(300, 1).unwrap();
                let dirs = DirectionSet::circle_grid(24).unwrap();
                let t = Instant::now();
                let (mut it, mut maxres, mut nc) = (0, 0.0f64, 0);
                for xi in dirs.iter() {
                    let u = QuantileIndex::polar(beta, xi).unwrap();
                    let q = s.solve(&d, &u, &cfg).unwrap();
                    it += q.iterations;
                    if !q.converged {
                        nc += 1;
                    }
                    maxres = maxres.max(first_order_residual(&d, &u, &q.p).unwrap());
                }
                println!("{name} beta={beta} {ch}: {:?} per solve, mean iters {}, max residual {maxres:e}, nonconv {nc}",
                    t.elapsed() / 24, it / 24);
            }
        }
    }
}
