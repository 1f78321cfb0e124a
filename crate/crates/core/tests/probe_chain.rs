use pmala::linalg::SymMatrix;
use pmala::mcmc::*;
use pmala::models::lgss::{self, FullyAdaptedLgss, LgssModel, LgssParams};
use pmala::rng::seeded_rng;
use pmala::ssm::StateSpaceModel;

#[test]
#[ignore]
fn probe() {
    let params = LgssParams::new(0.2, 1.0, 1.0, 0.1, 0.9, 0.15).unwrap();
    let model = LgssModel::default();
    let (_, data) = lgss::simulate(&params, 200, &mut seeded_rng(104)).unwrap();
    let x = model.params_to_unconstrained(&params).unwrap();

    let est = KalmanEstimator { model: &model, data: &data };
    let kernel = KernelConfig::new(KernelKind::RandomWalk, 0.3, SymMatrix::scaled_identity(6, 1e-2)).unwrap();
    let settings = RunSettings::new(30_000, 5_000).unwrap();
    let tr = run_chain(&est, &kernel, &x, &settings, &mut seeded_rng(105)).unwrap();
    println!("pilot acceptance: {}", tr.acceptance_rate());
    let vhat = pilot_covariance(&tr).unwrap();
    for i in 0..6 { print!("V[{i}{i}]={:.3e} ", vhat.get(i, i)); }
    println!();

    // Exact Langevin at gamma=1 with this vhat.
    let kernel = KernelConfig::new(KernelKind::Langevin, 1.0, vhat.clone()).unwrap();
    let settings = RunSettings::new(10_000, 1_000).unwrap();
    let tr = run_chain(&est, &kernel, &x, &settings, &mut seeded_rng(106)).unwrap();
    println!("exact langevin acceptance: {}", tr.acceptance_rate());

    // Exact RW at gamma=1.
    let kernel_rw = KernelConfig::new(KernelKind::RandomWalk, 1.0, vhat.clone()).unwrap();
    let tr = run_chain(&est, &kernel_rw, &x, &settings, &mut seeded_rng(107)).unwrap();
    println!("exact rw acceptance: {}", tr.acceptance_rate());

    // Particle langevin n=100 and 20.
    for n in [100usize, 20] {
        let pest = ParticleEstimator::new(&model, &data, FullyAdaptedLgss, n, 0.95);
        let kernel = KernelConfig::new(KernelKind::Langevin, 1.0, vhat.clone()).unwrap();
        let tr = run_chain(&pest, &kernel, &x, &settings, &mut seeded_rng(108)).unwrap();
        println!("particle langevin N={n} acceptance: {}", tr.acceptance_rate());
        // idealized
        let iest = IdealizedLgssEstimator { particle: ParticleEstimator::new(&model, &data, FullyAdaptedLgss, n, 0.95) };
        let tr = run_chain(&iest, &kernel, &x, &settings, &mut seeded_rng(109)).unwrap();
        println!("idealized langevin N={n} acceptance: {}", tr.acceptance_rate());
    }
}
