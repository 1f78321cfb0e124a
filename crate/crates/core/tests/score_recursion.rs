//! Tests of the Rao-Blackwellized score recursion: genealogy exactness at
//! ζ = 1, a pencil-and-paper two-particle check, agreement with the Kalman
//! score in expectation, and the variance-growth behavior in T.

use pmala::filter::{run_apf, BootstrapAdapter, FilterSettings};
use pmala::models::lgss::{self, kalman_score, FullyAdaptedLgss, LgssModel, LgssParams};
use pmala::rng::seeded_rng;
use pmala::score::{score_variance_study, variance_growth_slope, ScoreRecursion};
use pmala::ssm::{ObservationSeries, StateSpaceModel, UnconstrainedParams};
use pmala::stats::{mean, variance};
use pmala::Scalar;

fn paper_params() -> LgssParams<f64> {
    LgssParams::new(0.2, 1.0, 1.0, 0.1, 0.9, 0.15).unwrap()
}

#[test]
fn zeta_one_recursion_equals_ancestral_path_sums_exactly() {
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let (_, data) = lgss::simulate(&params, 10, &mut seeded_rng(31)).unwrap();
    let x = model.params_to_unconstrained(&params).unwrap();
    let ctx = model.prepare(&x).unwrap();
    let n = 5usize;
    let mut settings = FilterSettings::new(n).with_score(1.0);
    settings.keep_history = true;
    let out = run_apf(&model, &x, &data, &BootstrapAdapter, &settings, &mut seeded_rng(32)).unwrap();
    let history = out.history.as_ref().unwrap();

    // Replay the genealogy: path sums of ∇log g + ∇log f along ancestries,
    // in the same accumulation order as the recursion.
    let np = 6usize;
    let mut grad_g = vec![0.0; np];
    let mut grad_f = vec![0.0; np];
    let mut paths: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let s = &history[0].states[i..=i];
            model.grad_observation(&ctx, s, data.row(0), &mut grad_g);
            model.grad_init(&ctx, s, &mut grad_f);
            grad_g.iter().zip(&grad_f).map(|(a, b)| a + b).collect()
        })
        .collect();
    for t in 1..data.len() {
        let prev_states = &history[t - 1].states;
        let step = &history[t];
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let k = step.ancestors[i];
            let s = &step.states[i..=i];
            model.grad_observation(&ctx, s, data.row(t), &mut grad_g);
            model.grad_transition(&ctx, &prev_states[k..=k], s, &mut grad_f);
            let row: Vec<f64> = (0..np)
                .map(|p| paths[k][p] + grad_g[p] + grad_f[p])
                .collect();
            next.push(row);
        }
        paths = next;
    }
    let final_weights = &history.last().unwrap().weights;
    let mut expected = vec![0.0; np];
    for i in 0..n {
        for p in 0..np {
            expected[p] += final_weights[i] * paths[i][p];
        }
    }
    let got = out.score.unwrap();
    // ζ = 1 makes the recursion exactly the path sum, bit for bit.
    let means = out.cloud.score_means.as_ref().unwrap();
    for i in 0..n {
        for p in 0..np {
            assert_eq!(
                means[i * np + p], paths[i][p],
                "particle {i}, component {p}"
            );
        }
    }
    for p in 0..np {
        assert!((got[p] - expected[p]).abs() <= 1e-12 * (1.0 + expected[p].abs()));
    }
}

#[test]
fn two_particle_hand_recursion() {
    // Evaluate the ζ-shrinkage update by hand on a fixed two-particle
    // genealogy and compare with ScoreRecursion on the same inputs.
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let x = model.params_to_unconstrained(&params).unwrap();
    let ctx = model.prepare(&x).unwrap();
    let zeta = 0.7;
    let np = 6usize;

    let s1 = [0.4, -0.3]; // states at t=1
    let s2 = [0.1, 0.5]; // states at t=2
    let z1 = [0.9];
    let z2 = [-0.2];
    let w1 = [0.3, 0.7];
    let ancestors = [1usize, 1];

    let mut rec = ScoreRecursion::new(2, np, zeta);
    rec.init(&model, &ctx, &s1, &z1).unwrap();
    rec.update(&model, &ctx, &s1, &w1, &ancestors, &s2, &z2).unwrap();

    // By hand.
    let mut g = vec![0.0; np];
    let mut h = vec![0.0; np];
    let mut m1 = vec![vec![0.0; np]; 2];
    for i in 0..2 {
        model.grad_observation(&ctx, &s1[i..=i], &z1, &mut g);
        model.grad_init(&ctx, &s1[i..=i], &mut h);
        for p in 0..np {
            m1[i][p] = g[p] + h[p];
        }
    }
    let shrink: Vec<f64> = (0..np).map(|p| w1[0] * m1[0][p] + w1[1] * m1[1][p]).collect();
    for i in 0..2 {
        let k = ancestors[i];
        model.grad_observation(&ctx, &s2[i..=i], &z2, &mut g);
        model.grad_transition(&ctx, &s1[k..=k], &s2[i..=i], &mut h);
        for p in 0..np {
            let want = zeta * m1[k][p] + (1.0 - zeta) * shrink[p] + g[p] + h[p];
            let got = rec.mean(i)[p];
            assert!(
                (got - want).abs() < 1e-14 * (1.0 + want.abs()),
                "particle {i}, p {p}: {got} vs {want}"
            );
        }
    }

    // final_score is the weighted mean of the rows.
    let w2 = [0.25, 0.75];
    let fs = rec.final_score(&w2);
    for p in 0..np {
        let want = w2[0] * rec.mean(0)[p] + w2[1] * rec.mean(1)[p];
        assert!((fs[p] - want).abs() < 1e-14 * (1.0 + want.abs()));
    }
}

#[test]
fn init_matches_hand_gaussian_gradients_for_single_particle() {
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let x = model.params_to_unconstrained(&params).unwrap();
    let ctx = model.prepare(&x).unwrap();
    let s = 0.37;
    let z = 1.21;
    let mut rec = ScoreRecursion::new(1, 6, 1.0);
    rec.init(&model, &ctx, &[s], &[z]).unwrap();
    // Observation part: e = z − α − βs over τ².
    let e = z - params.alpha - params.beta * s;
    let t2 = params.tau * params.tau;
    // Init part in μ: d/v0 · 1/(1−φ).
    let d = s - params.stationary_mean();
    let v0 = params.stationary_var();
    let row = rec.mean(0);
    assert!((row[0] - e / t2).abs() < 1e-14);
    assert!((row[1] - e * s / t2).abs() < 1e-14);
    assert!((row[2] - (-1.0 + e * e / t2)).abs() < 1e-14);
    assert!((row[3] - d / v0 / (1.0 - params.phi)).abs() < 1e-13);
}

#[test]
fn identical_states_produce_identical_rows() {
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let x = model.params_to_unconstrained(&params).unwrap();
    let ctx = model.prepare(&x).unwrap();
    let states = [0.8, 0.8, 0.8];
    let mut rec = ScoreRecursion::new(3, 6, 0.95);
    rec.init(&model, &ctx, &states, &[0.5]).unwrap();
    for i in 1..3 {
        assert_eq!(rec.mean(0), rec.mean(i));
    }
}

#[test]
fn full_shrinkage_collapses_rows_to_mean_plus_increments() {
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let x = model.params_to_unconstrained(&params).unwrap();
    let ctx = model.prepare(&x).unwrap();
    let zeta = 1e-12;
    let np = 6;
    let s1 = [0.4, -0.3];
    let s2 = [0.1, 0.5];
    let w1 = [0.5, 0.5];
    let mut rec = ScoreRecursion::new(2, np, zeta);
    rec.init(&model, &ctx, &s1, &[0.9]).unwrap();
    let shrink: Vec<f64> = (0..np)
        .map(|p| 0.5 * rec.mean(0)[p] + 0.5 * rec.mean(1)[p])
        .collect();
    rec.update(&model, &ctx, &s1, &w1, &[0, 1], &s2, &[-0.2]).unwrap();
    let mut g = vec![0.0; np];
    let mut h = vec![0.0; np];
    for i in 0..2 {
        model.grad_observation(&ctx, &s2[i..=i], &[-0.2], &mut g);
        model.grad_transition(&ctx, &s1[i..=i], &s2[i..=i], &mut h);
        for p in 0..np {
            let asymptote = shrink[p] + g[p] + h[p];
            assert!(
                (rec.mean(i)[p] - asymptote).abs() < 1e-9 * (1.0 + asymptote.abs()),
                "row should collapse to common mean + increments"
            );
        }
    }
}

#[test]
fn zero_gradient_model_gives_zero_score() {
    // A model whose densities do not depend on the parameters: every score
    // mean is exactly zero.
    use rand::Rng;
    struct FlatModel(pmala::ssm::ParameterTransform<f64>);
    impl StateSpaceModel<f64> for FlatModel {
        type Ctx = ();
        fn n_params(&self) -> usize {
            2
        }
        fn state_dim(&self) -> usize {
            1
        }
        fn obs_dim(&self) -> usize {
            1
        }
        fn transform(&self) -> &pmala::ssm::ParameterTransform<f64> {
            &self.0
        }
        fn prepare(&self, _x: &UnconstrainedParams<f64>) -> pmala::Result<()> {
            Ok(())
        }
        fn log_prior(&self, _x: &UnconstrainedParams<f64>) -> f64 {
            0.0
        }
        fn grad_log_prior(&self, _x: &UnconstrainedParams<f64>) -> Vec<f64> {
            vec![0.0; 2]
        }
        fn init_logpdf(&self, _c: &(), s: &[f64]) -> f64 {
            -0.5 * s[0] * s[0]
        }
        fn transition_logpdf(&self, _c: &(), p: &[f64], s: &[f64]) -> f64 {
            -0.5 * (s[0] - p[0]) * (s[0] - p[0])
        }
        fn observation_logpdf(&self, _c: &(), s: &[f64], z: &[f64]) -> f64 {
            -0.5 * (z[0] - s[0]) * (z[0] - s[0])
        }
        fn sample_init<R: Rng + ?Sized>(&self, _c: &(), rng: &mut R, out: &mut [f64]) {
            out[0] = f64::sample_std_normal(rng);
        }
        fn sample_transition<R: Rng + ?Sized>(
            &self,
            _c: &(),
            p: &[f64],
            rng: &mut R,
            out: &mut [f64],
        ) {
            out[0] = p[0] + f64::sample_std_normal(rng);
        }
        fn grad_init(&self, _c: &(), _s: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
        fn grad_transition(&self, _c: &(), _p: &[f64], _s: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
        fn grad_observation(&self, _c: &(), _s: &[f64], _z: &[f64], out: &mut [f64]) {
            out.fill(0.0);
        }
    }
    use pmala::ssm::ComponentTransform;
    let model = FlatModel(pmala::ssm::ParameterTransform::new(vec![
        ComponentTransform::Identity;
        2
    ]));
    let x = UnconstrainedParams::new(vec![0.0, 0.0]).unwrap();
    let data = ObservationSeries::from_scalars(vec![0.3, -0.1, 0.2]).unwrap();
    let out = run_apf(
        &model,
        &x,
        &data,
        &BootstrapAdapter,
        &FilterSettings::new(8).with_score(0.95),
        &mut seeded_rng(33),
    )
    .unwrap();
    assert_eq!(out.score.unwrap(), vec![0.0, 0.0]);
}

#[test]
fn score_mean_agrees_with_kalman_score() {
    // At moderate persistence the ζ = 0.95 shrinkage bias sits well below
    // the Monte Carlo resolution of a 200-replicate mean; at the reference
    // parameters (φ = 0.9) it would not (see the bias test below).
    let model = LgssModel::<f64>::default();
    let params = LgssParams::new(0.2, 1.0, 1.0, 0.1, 0.4, 0.15).unwrap();
    let (_, data) = lgss::simulate(&params, 100, &mut seeded_rng(70)).unwrap();
    let x = model.params_to_unconstrained(&params).unwrap();
    let exact = kalman_score(&params, &data).unwrap();
    let mut rng = seeded_rng(72);
    let reps = 200;
    let settings = FilterSettings::new(500).with_score(0.95);
    let mut comps: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); 6];
    for _ in 0..reps {
        let out = run_apf(&model, &x, &data, &FullyAdaptedLgss, &settings, &mut rng).unwrap();
        for (p, v) in out.score.unwrap().into_iter().enumerate() {
            comps[p].push(v);
        }
    }
    for p in 0..6 {
        let m = mean(&comps[p]);
        let se = (variance(&comps[p]) / reps as f64).sqrt();
        assert!(
            (m - exact[p]).abs() < 3.0 * se,
            "component {p}: mean {m} vs exact {}, se {se}",
            exact[p]
        );
    }
}

#[test]
fn shrinkage_bias_grows_as_zeta_decreases() {
    // At φ = 0.9 the state is persistent and the shrinkage bias of the
    // μ-component score is material; it interpolates smoothly to zero as
    // ζ → 1 and does not vanish with more particles.
    let model = LgssModel::<f64>::default();
    let params = paper_params();
    let (_, data) = lgss::simulate(&params, 50, &mut seeded_rng(73)).unwrap();
    let x = model.params_to_unconstrained(&params).unwrap();
    let exact = kalman_score(&params, &data).unwrap();
    let mut rng = seeded_rng(74);
    let reps = 80;
    let mut bias = Vec::new();
    for zeta in [1.0, 0.99, 0.95, 0.9] {
        let settings = FilterSettings::new(500).with_score(zeta);
        let mut mu = 0.0;
        for _ in 0..reps {
            let out = run_apf(&model, &x, &data, &FullyAdaptedLgss, &settings, &mut rng).unwrap();
            mu += out.score.unwrap()[3] / reps as f64;
        }
        bias.push((mu - exact[3]).abs());
    }
    assert!(bias[0] < 1.5, "zeta=1 bias should be small: {}", bias[0]);
    assert!(
        bias[1] < bias[2] && bias[2] < bias[3],
        "bias should grow as zeta decreases: {bias:?}"
    );
    assert!(bias[3] > 5.0, "zeta=0.9 bias should be material: {}", bias[3]);
}

#[test]
fn shrinkage_flattens_the_variance_growth_in_t() {
    // Path accumulation (ζ = 1) degenerates: its variance grows clearly
    // faster than T over the desk grid, while the ζ = 0.95 recursion stays
    // at linear growth. (The fully quadratic ζ = 1 regime only emerges for
    // T far beyond this grid.)
    let model = LgssModel::<f64>::default();
    let params = LgssParams::new(0.0, 1.0, 0.1, 0.0, 0.95, 0.5).unwrap();
    let x = model.params_to_unconstrained(&params).unwrap();
    let t_grid = [25usize, 50, 100, 200];
    let n_data = 3u64;
    let mut acc1 = [0.0f64; 4];
    let mut acc95 = [0.0f64; 4];
    for dseed in 0..n_data {
        let (_, data) = lgss::simulate(&params, 200, &mut seeded_rng(300 + dseed)).unwrap();
        let mut rng = seeded_rng(400 + dseed);
        let rows1 = score_variance_study(
            &model, &x, &data, &FullyAdaptedLgss, 40, 1.0, &t_grid, 150, &mut rng,
        )
        .unwrap();
        let rows95 = score_variance_study(
            &model, &x, &data, &FullyAdaptedLgss, 40, 0.95, &t_grid, 150, &mut rng,
        )
        .unwrap();
        for i in 0..4 {
            acc1[i] += rows1[i].total_variance / n_data as f64;
            acc95[i] += rows95[i].total_variance / n_data as f64;
        }
    }
    let lx: Vec<f64> = t_grid.iter().map(|&t| (t as f64).ln()).collect();
    let slope1 = pmala::stats::regression_slope(&lx, &acc1.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let slope95 =
        pmala::stats::regression_slope(&lx, &acc95.iter().map(|v| v.ln()).collect::<Vec<_>>());
    assert!(slope1 > 1.2, "zeta=1 growth should be super-linear: {slope1}");
    assert!((slope95 - 1.0).abs() < 0.3, "zeta=0.95 slope {slope95}");
    assert!(
        slope1 - slope95 > 0.25,
        "shrinkage should flatten growth: {slope1} vs {slope95}"
    );

    // Doubling N roughly halves the variance at fixed T.
    let (_, data) = lgss::simulate(&params, 100, &mut seeded_rng(310)).unwrap();
    let mut rng = seeded_rng(311);
    let v40 = score_variance_study(
        &model, &x, &data, &FullyAdaptedLgss, 40, 0.95, &[100], 200, &mut rng,
    )
    .unwrap()[0]
        .total_variance;
    let v80 = score_variance_study(
        &model, &x, &data, &FullyAdaptedLgss, 80, 0.95, &[100], 200, &mut rng,
    )
    .unwrap()[0]
        .total_variance;
    let ratio = v40 / v80;
    assert!(
        ratio > 1.0 && ratio < 4.0,
        "variance should roughly halve when N doubles: ratio {ratio}"
    );
}
