use reconlab::grid::DyadicGrid;
use reconlab::mollifier::{build_stack, check_telescope_identity};

fn main() {
    for n_max in [10u32, 12, 14] {
        let g = DyadicGrid::new(n_max).unwrap();
        let s = build_stack(g, 1.5).unwrap();
        let mut worst = 0.0f64;
        for n in 0..=(n_max - 6) {
            let sup = s.rho_at(n + 1).unwrap().sup_norm();
            let res = check_telescope_identity(&s, n).unwrap() / sup;
            worst = worst.max(res);
            println!("n_max={n_max} n={n}: rel={res:.3e}");
        }
        println!("n_max={n_max}: worst rel residual = {worst:.3e}");
    }
}
