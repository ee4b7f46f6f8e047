//! The optimizer and the calibration fit against independent reference
//! solvers.

use politeness_core::classifier::{
    fit_platt, svm_objective, train_svm, Class, FeatureVector, SvmConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Noisy, overlapping two-feature data set.
fn synthetic(n: usize, seed: u64) -> Vec<(FeatureVector<f64>, Class)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = x[0] + 0.5 * x[1] + 0.3 + rng.gen_range(-0.5..0.5);
            let class = if s > 0.0 { Class::Polite } else { Class::Impolite };
            (FeatureVector::new(2, x.into_iter().enumerate()).unwrap(), class)
        })
        .collect()
}

/// Rows `[x.., 1]` and signs, the augmented form of the bias.
fn augmented(data: &[(FeatureVector<f64>, Class)]) -> (Vec<Vec<f64>>, Vec<f64>) {
    data.iter()
        .map(|(x, y)| {
            let mut z: Vec<f64> = (0..x.dim()).map(|i| x.get(i)).collect();
            z.push(1.0);
            (z, y.sign())
        })
        .unzip()
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Minimizes the Huber-smoothed primal by damped Newton steps, shrinking the
/// smoothing width towards zero. The smoothed loss underestimates the hinge
/// by at most `width / 2` per point.
fn reference_svm(z: &[Vec<f64>], y: &[f64], c: f64) -> Vec<f64> {
    let d = z[0].len();
    let smoothed = |v: &[f64], width: f64| -> f64 {
        let reg: f64 = v.iter().map(|x| x * x).sum::<f64>() / 2.0;
        let loss: f64 = z
            .iter()
            .zip(y)
            .map(|(zi, yi)| {
                let u = 1.0 - yi * zi.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
                if u <= 0.0 {
                    0.0
                } else if u <= width {
                    u * u / (2.0 * width)
                } else {
                    u - width / 2.0
                }
            })
            .sum();
        reg + c * loss
    };
    let mut v = vec![0.0; d];
    let mut width = 1.0;
    while width >= 1e-9 {
        for _ in 0..200 {
            let mut grad = v.clone();
            let mut hess: Vec<Vec<f64>> = (0..d)
                .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            for (zi, yi) in z.iter().zip(y) {
                let u = 1.0 - yi * zi.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
                let slope = if u <= 0.0 { 0.0 } else if u <= width { u / width } else { 1.0 };
                for k in 0..d {
                    grad[k] -= c * slope * yi * zi[k];
                }
                if u > 0.0 && u <= width {
                    for i in 0..d {
                        for j in 0..d {
                            hess[i][j] += c * zi[i] * zi[j] / width;
                        }
                    }
                }
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm < 1e-11 {
                break;
            }
            let step = solve(hess, grad.iter().map(|g| -g).collect());
            let f0 = smoothed(&v, width);
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = v.iter().zip(&step).map(|(a, s)| a + t * s).collect();
                if smoothed(&cand, width) <= f0 - 1e-4 * t * gnorm * gnorm / 1e6 || t < 1e-12 {
                    v = cand;
                    break;
                }
                t /= 2.0;
            }
        }
        width /= 10.0;
    }
    v
}

/// Plain subgradient descent with decaying steps, keeping the best iterate.
fn subgradient_svm(z: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> f64 {
    let d = z[0].len();
    let objective = |v: &[f64]| -> f64 {
        let reg: f64 = v.iter().map(|x| x * x).sum::<f64>() / 2.0;
        let loss: f64 = z
            .iter()
            .zip(y)
            .map(|(zi, yi)| (1.0 - yi * zi.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()).max(0.0))
            .sum();
        reg + c * loss
    };
    let mut v = vec![0.0; d];
    let mut best = objective(&v);
    for t in 1..=iterations {
        let mut g = v.clone();
        for (zi, yi) in z.iter().zip(y) {
            if yi * zi.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() < 1.0 {
                for k in 0..d {
                    g[k] -= c * yi * zi[k];
                }
            }
        }
        let eta = 0.05 / (t as f64).sqrt();
        for k in 0..d {
            v[k] -= eta * g[k];
        }
        best = best.min(objective(&v));
    }
    best
}

#[test]
fn objective_matches_reference_solver() {
    let data = synthetic(200, 11);
    let config = SvmConfig::default();
    let sol = train_svm(&data, 2, &config).unwrap();
    assert!(sol.converged);
    let ours = svm_objective(&sol.weights, sol.bias, &data, config.c);

    let (z, y) = augmented(&data);
    let v = reference_svm(&z, &y, config.c);
    let reference = svm_objective(&v[..2], v[2], &data, config.c);
    let rel = (ours - reference).abs() / reference;
    assert!(rel < 1e-4, "ours {ours} reference {reference} rel {rel:e}");

    eprintln!("svm objective {ours} reference {reference} rel {rel:e}");
    let sub = subgradient_svm(&z, &y, config.c, 20_000);
    eprintln!("subgradient best {sub}");
    assert!(ours <= sub + 1e-9, "subgradient found {sub} < {ours}");
}

#[test]
fn objective_matches_reference_across_c() {
    for (seed, c) in [(1, 0.1), (2, 10.0)] {
        let data = synthetic(200, seed);
        let config = SvmConfig { c, ..SvmConfig::default() };
        let sol = train_svm(&data, 2, &config).unwrap();
        let ours = svm_objective(&sol.weights, sol.bias, &data, c);
        let (z, y) = augmented(&data);
        let v = reference_svm(&z, &y, c);
        let reference = svm_objective(&v[..2], v[2], &data, c);
        assert!((ours - reference).abs() / reference < 1e-4, "C={c}: {ours} vs {reference}");
    }
}

#[test]
fn input_order_does_not_change_predictions() {
    let data = synthetic(200, 5);
    let config = SvmConfig::default();
    let a = train_svm(&data, 2, &config).unwrap();
    let mut shuffled = data.clone();
    shuffled.reverse();
    shuffled.rotate_left(37);
    let b = train_svm(&shuffled, 2, &config).unwrap();
    let acc = |s: &politeness_core::classifier::SvmSolution<f64>| {
        data.iter()
            .filter(|(x, y)| Class::from_margin(s.margin(x)) == *y)
            .count() as f64
            / data.len() as f64
    };
    assert!((acc(&a) - acc(&b)).abs() <= 1e-6);
    for (wa, wb) in a.weights.iter().zip(&b.weights) {
        assert!((wa - wb).abs() < 1e-3);
    }
}

/// Unregularized Newton iterations on the two-parameter log-likelihood.
fn newton_logistic(f: &[f64], t: &[f64]) -> (f64, f64) {
    let (mut a, mut b) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&fi, &ti) in f.iter().zip(t) {
            let p = 1.0 / (1.0 + (-(a * fi + b)).exp());
            ga += (p - ti) * fi;
            gb += p - ti;
            let w = p * (1.0 - p);
            haa += w * fi * fi;
            hab += w * fi;
            hbb += w;
        }
        let det = haa * hbb - hab * hab;
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if da.abs() < 1e-15 && db.abs() < 1e-15 {
            break;
        }
    }
    (a, b)
}

#[test]
fn calibration_matches_newton_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut margins = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..300 {
        let polite = rng.gen_bool(0.5);
        let m: f64 = if polite { 0.6 } else { -0.4 } + rng.gen_range(-1.5..1.5);
        margins.push(m);
        labels.push(polite);
    }
    let cal = fit_platt(&margins, &labels).unwrap();

    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l { (n_pos + 1.0) / (n_pos + 2.0) } else { 1.0 / (n_neg + 2.0) })
        .collect();
    let (a, b) = newton_logistic(&margins, &targets);
    assert!((cal.a - a).abs() < 1e-6, "A {} vs {a}", cal.a);
    assert!((cal.b - b).abs() < 1e-6, "B {} vs {b}", cal.b);
    assert!(cal.a > 0.0);

    // monotone in the margin over the observed range
    let mut sorted = margins.clone();
    sorted.sort_by(f64::total_cmp);
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            assert!(cal.score(w[1]) > cal.score(w[0]));
        }
    }
}

#[test]
fn calibration_in_single_precision() {
    let margins: Vec<f32> = (0..100).map(|i| (i as f32 - 50.0) / 25.0).collect();
    let labels: Vec<bool> = (0..100).map(|i| (i * 37) % 100 < i + 10).collect();
    let cal = fit_platt(&margins, &labels).unwrap();
    let wide = fit_platt(
        &margins.iter().map(|&m| f64::from(m)).collect::<Vec<_>>(),
        &labels,
    )
    .unwrap();
    assert!((f64::from(cal.a) - wide.a).abs() < 1e-5);
    assert!(cal.score(0.0) > 0.0 && cal.score(0.0) < 1.0);
}
