use cvdrisk::features::SparseVector;
use cvdrisk::linear_models::{
    fit_bnb, fit_gbt, fit_lr, fit_svm, Classifier, GbtConfig, LrConfig, Model, SvmConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Two unit-variance blobs centred at (-2, -2) and (2, 2).
fn blobs(n: usize, seed: u64) -> (Vec<SparseVector>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let label = (i % 2) as u8;
        let c = if label == 1 { 2.0 } else { -2.0 };
        let p = [c + gaussian(&mut rng), c + gaussian(&mut rng)];
        x.push(SparseVector::from_dense(&p).unwrap());
        y.push(label);
    }
    (x, y)
}

/// Points at least 1 away from the line `3x - 4y + 2 = 0` (unit normal).
fn margin_separable(n: usize, seed: u64) -> (Vec<SparseVector>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    while x.len() < n {
        let p: [f64; 2] = [rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0)];
        let d = (3.0 * p[0] - 4.0 * p[1] + 2.0) / 5.0;
        if d.abs() >= 1.0 {
            x.push(SparseVector::from_dense(&p).unwrap());
            y.push(u8::from(d > 0.0));
        }
    }
    (x, y)
}

fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

#[test]
fn separated_gaussians_are_learned_by_lr_and_svm() {
    let (x, y) = blobs(1000, 11);
    let (xtr, xte) = x.split_at(700);
    let (ytr, yte) = y.split_at(700);
    let lr = fit_lr(xtr, ytr, &LrConfig::default()).unwrap();
    let svm = fit_svm(xtr, ytr, &SvmConfig::default()).unwrap();
    for (name, train, test) in [
        ("lr", lr.train_accuracy, accuracy(&lr.predict(xte).unwrap(), yte)),
        (
            "svm",
            svm.train_accuracy,
            accuracy(&svm.predict(xte).unwrap(), yte),
        ),
    ] {
        assert!(train >= 0.99, "{name} train {train}");
        assert!(test >= 0.95, "{name} test {test}");
    }
}

#[test]
fn unit_margin_data_is_fit_exactly_within_default_epochs() {
    for seed in 0..5 {
        let (x, y) = margin_separable(400, seed);
        let lr = fit_lr(&x, &y, &LrConfig::default()).unwrap();
        let svm = fit_svm(&x, &y, &SvmConfig::default()).unwrap();
        assert_eq!(lr.train_accuracy, 1.0, "lr seed {seed}");
        assert_eq!(svm.train_accuracy, 1.0, "svm seed {seed}");
    }
}

#[test]
fn stored_training_accuracy_is_reproducible() {
    let (x, y) = blobs(300, 3);
    let binary: Vec<SparseVector> = x
        .iter()
        .map(|r| {
            let e = r
                .iter()
                .filter(|&(_, v)| v > 0.0)
                .map(|(i, _)| (i, 1.0))
                .collect();
            SparseVector::new(2, e).unwrap()
        })
        .collect();
    let bnb = fit_bnb(&binary, &y, 1.0).unwrap();
    let lr = fit_lr(&x, &y, &LrConfig::default()).unwrap();
    let svm = fit_svm(&x, &y, &SvmConfig::default()).unwrap();
    let gbt = fit_gbt(&x, &y, &GbtConfig::default()).unwrap();
    assert_eq!(accuracy(&bnb.predict(&binary).unwrap(), &y), bnb.train_accuracy);
    assert_eq!(accuracy(&lr.predict(&x).unwrap(), &y), lr.train_accuracy);
    assert_eq!(accuracy(&svm.predict(&x).unwrap(), &y), svm.train_accuracy);
    assert_eq!(accuracy(&gbt.predict(&x).unwrap(), &y), gbt.train_accuracy);
}

#[test]
fn predict_matches_thresholded_probability() {
    let (x, y) = blobs(200, 5);
    let lr = fit_lr(&x, &y, &LrConfig::default()).unwrap();
    let gbt = fit_gbt(&x, &y, &GbtConfig::default()).unwrap();
    for m in [&lr as &dyn Classifier, &gbt] {
        let p = m.predict_proba(&x).unwrap();
        let labels = m.predict(&x).unwrap();
        for (pi, li) in p.iter().zip(&labels) {
            assert!((0.0..=1.0).contains(pi));
            assert_eq!(*li, u8::from(*pi > 0.5));
        }
    }
}

#[test]
fn fits_are_bit_identical_and_survive_serialization() {
    let (x, y) = blobs(200, 9);
    let models = [
        Model::Lr(fit_lr(&x, &y, &LrConfig::default()).unwrap()),
        Model::Svm(fit_svm(&x, &y, &SvmConfig::default()).unwrap()),
        Model::Gbt(fit_gbt(&x, &y, &GbtConfig::default()).unwrap()),
    ];
    let again = [
        Model::Lr(fit_lr(&x, &y, &LrConfig::default()).unwrap()),
        Model::Svm(fit_svm(&x, &y, &SvmConfig::default()).unwrap()),
        Model::Gbt(fit_gbt(&x, &y, &GbtConfig::default()).unwrap()),
    ];
    for (a, b) in models.iter().zip(&again) {
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let back = Model::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(&back, a);
    }
}

#[test]
fn dimension_mismatch_is_rejected_at_prediction() {
    let (x, y) = blobs(50, 1);
    let lr = fit_lr(&x, &y, &LrConfig::default()).unwrap();
    let wide = vec![SparseVector::zeros(3)];
    assert!(lr.predict(&wide).is_err());
}
