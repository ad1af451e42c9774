use jchsim::dynamics::{StroboscopicEngine, StroboscopicSpec};

fn main() {
    let mass = 0.5;
    let bw = 4.0 / mass; // MHz
    let kappa = 2.0;
    let spec = StroboscopicSpec { side: 16, mass, kappa, omega: 50.0 * bw, fit_orbitals: 10 };
    let engine = StroboscopicEngine::new(spec).unwrap();
    for mult in [25.0, 50.0, 100.0, 200.0] {
        let omega = mult * bw;
        let t0 = std::time::Instant::now();
        let r = engine.analyze(omega).unwrap();
        let f = r.soc_fit.unwrap();
        println!(
            "mult {mult:6.0}: lam err {:+.3}%  w err {:+.3}%  kin {:+.6}  fitres {:.2e} targres {:.4e}  [{:?}]",
            100.0 * (f.lambda_r / f.lambda_formula - 1.0),
            100.0 * (f.omega_so / f.omega_so_formula - 1.0),
            f.kinetic_coeff,
            f.fit_residual,
            f.target_residual,
            t0.elapsed(),
        );
    }
}
