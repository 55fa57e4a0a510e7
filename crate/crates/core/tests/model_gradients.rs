mod support;

use gpada::model::{
    cross_entropy, entropy, perturb, sentry_loss, sentry_verdict, sgd_step, softmax, total_loss, CommitteeConfig,
    Gradient, LabeledExample, ModelError, ModelState, OptimizerConfig, UnlabeledExample, Verdict,
};
use support::{central_difference, random_model, relative_error, Stream};

#[test]
fn cross_entropy_gradient_matches_finite_differences() {
    let mut rng = Stream::new(1);
    for _ in 0..25 {
        let (c, d) = (rng.int(2, 6), rng.int(1, 8));
        let m = random_model(&mut rng, c, d);
        let x = rng.row(d);
        let label = rng.int(0, c - 1);
        let (_, g) = cross_entropy(&m, &x, label).unwrap();
        let num = central_difference(&m, |m| cross_entropy(m, &x, label).unwrap().0);
        let err = relative_error(&g.to_vec(), &num);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn sentry_gradient_matches_finite_differences() {
    let mut rng = Stream::new(2);
    for i in 0..25 {
        let (c, d) = (rng.int(2, 6), rng.int(1, 8));
        let m = random_model(&mut rng, c, d);
        let x = rng.row(d);
        let verdict = if i % 2 == 0 {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        };
        let (_, g) = sentry_loss(&m, &x, verdict).unwrap();
        let num = central_difference(&m, |m| sentry_loss(m, &x, verdict).unwrap().0);
        let err = relative_error(&g.to_vec(), &num);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn total_loss_gradient_matches_finite_differences() {
    let mut rng = Stream::new(3);
    for _ in 0..25 {
        let (c, d) = (rng.int(2, 6), rng.int(1, 8));
        let m = random_model(&mut rng, c, d);
        let xs = rng.rows_in(1, 6, d);
        let labels: Vec<usize> = xs.iter().map(|_| rng.int(0, c - 1)).collect();
        let us = rng.rows_in(1, 6, d);
        let verdicts: Vec<Verdict> = us
            .iter()
            .map(|_| {
                if rng.uniform() < 0.5 {
                    Verdict::Consistent
                } else {
                    Verdict::Inconsistent
                }
            })
            .collect();
        let lb: Vec<LabeledExample<'_>> = xs
            .iter()
            .zip(&labels)
            .map(|(x, &label)| LabeledExample { features: x, label })
            .collect();
        let ub: Vec<UnlabeledExample<'_>> = us
            .iter()
            .zip(&verdicts)
            .map(|(x, &verdict)| UnlabeledExample { features: x, verdict })
            .collect();
        let (_, g) = total_loss(&m, &lb, &ub, 1.0).unwrap();
        let num = central_difference(&m, |m| total_loss(m, &lb, &ub, 1.0).unwrap().0);
        let err = relative_error(&g.to_vec(), &num);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn zero_lambda_is_plain_cross_entropy() {
    let mut rng = Stream::new(4);
    let m = random_model(&mut rng, 3, 4);
    let x = rng.row(4);
    let u = rng.row(4);
    let lb = [LabeledExample { features: &x, label: 2 }];
    let ub = [UnlabeledExample {
        features: &u,
        verdict: Verdict::Inconsistent,
    }];
    let (l0, g0) = total_loss(&m, &lb, &ub, 0.0).unwrap();
    let (l1, g1) = cross_entropy(&m, &x, 2).unwrap();
    assert_eq!(l0, l1);
    assert_eq!(g0, g1);
    assert_eq!(total_loss(&m, &[], &[], 1.0).unwrap().0, 0.0);
}

#[test]
fn momentum_unrolls_as_expected() {
    let cfg = OptimizerConfig {
        learning_rate: 0.1,
        momentum: 0.9,
        weight_decay: 0.0,
        batch_size: 1,
    };
    let start = ModelState::zeros(2, 3);
    let g = Gradient {
        weights: vec![0.5; 6],
        bias: vec![-1.0; 2],
    };
    let m = sgd_step(sgd_step(start, &g, &cfg).unwrap(), &g, &cfg).unwrap();
    for (p, gv) in m.weights().iter().chain(m.bias()).zip(g.to_vec()) {
        assert!((p + 0.1 * gv * 2.9).abs() < 1e-15);
    }
    let bad = Gradient {
        weights: vec![f64::NAN; 6],
        bias: vec![0.0; 2],
    };
    assert!(matches!(sgd_step(m, &bad, &cfg), Err(ModelError::NonFiniteGradient)));
}

#[test]
fn training_on_a_fixed_batch_lowers_cross_entropy() {
    let mut rng = Stream::new(5);
    let d = 6;
    let means = rng.rows(3, d);
    let mut xs = Vec::new();
    let mut labels = Vec::new();
    for (c, mu) in means.iter().enumerate() {
        for _ in 0..8 {
            xs.push(mu.iter().map(|m| 3.0 * m + rng.range(-0.3, 0.3)).collect::<Vec<f64>>());
            labels.push(c);
        }
    }
    let batch: Vec<LabeledExample<'_>> = xs
        .iter()
        .zip(&labels)
        .map(|(x, &label)| LabeledExample { features: x, label })
        .collect();
    let cfg = OptimizerConfig::default();
    let mut model = ModelState::xavier(3, d, 7);
    let mut previous = f64::INFINITY;
    for step in 0..50 {
        let (loss, g) = total_loss(&model, &batch, &[], 0.0).unwrap();
        assert!(loss < previous, "step {step}: {loss} >= {previous}");
        previous = loss;
        model = sgd_step(model, &g, &cfg).unwrap();
    }
}

#[test]
fn confident_sample_survives_small_perturbations() {
    // Class c fires on coordinate c; the sample sits 5 units from the
    // nearest boundary while sigma is 0.1.
    let mut w = vec![0.0; 9];
    for c in 0..3 {
        w[c * 3 + c] = 1.0;
    }
    let m = ModelState::from_parts(3, 3, w, vec![0.0; 3]).unwrap();
    let x = [6.0, 1.0, 0.5];
    let committee = CommitteeConfig { size: 3, sigma: 0.1 };
    for seed in 0..100 {
        let v = sentry_verdict(&m, 0, &x, &committee, seed).unwrap();
        assert_eq!(v.verdict, Verdict::Consistent);
        assert_eq!(v.clean_prediction, 0);
        assert_eq!(v.committee_votes, vec![0, 0, 0]);
    }
    // On the boundary with a large sigma the committee splits for some seed.
    let tie = [1.0, 1.0, -5.0];
    let wide = CommitteeConfig { size: 3, sigma: 2.0 };
    assert!((0..100).any(|s| sentry_verdict(&m, 0, &tie, &wide, s).unwrap().verdict == Verdict::Inconsistent));
}

#[test]
fn single_member_committee_follows_its_vote() {
    let m = ModelState::from_parts(2, 1, vec![1.0, -1.0], vec![0.0, 0.0]).unwrap();
    let committee = CommitteeConfig { size: 1, sigma: 1.0 };
    for seed in 0..50 {
        let v = sentry_verdict(&m, 3, &[0.2], &committee, seed).unwrap();
        let expected = if v.committee_votes[0] == v.clean_prediction {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        };
        assert_eq!(v.verdict, expected);
    }
}

#[test]
fn perturbation_is_seeded() {
    let x = [1.0, 2.0, 3.0];
    assert_eq!(perturb(&x, 0.3, 9, 1), perturb(&x, 0.3, 9, 1));
    assert_ne!(perturb(&x, 0.3, 9, 1), perturb(&x, 0.3, 9, 2));
    assert_eq!(perturb(&x, 0.0, 9, 1), x.to_vec());
}

#[test]
fn sentry_loss_sign_follows_verdict() {
    let m = ModelState::from_parts(2, 1, vec![1.0, -1.0], vec![0.0, 0.0]).unwrap();
    let h = entropy(&softmax(&[0.4, -0.4]));
    let (lc, _) = sentry_loss(&m, &[0.4], Verdict::Consistent).unwrap();
    let (li, _) = sentry_loss(&m, &[0.4], Verdict::Inconsistent).unwrap();
    assert!((lc - h).abs() < 1e-14);
    assert!((li + h).abs() < 1e-14);
}
