//! Layer gradients against central finite differences, and forward passes
//! against brute-force reference implementations.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactscope::nn::*;

const TOL: f64 = 1e-6;

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn with_data(t: &Tensor, data: &[f64]) -> Tensor {
    Tensor::from_vec(t.shape(), data.to_vec()).unwrap()
}

/// Scalar probe `Σ y ⊙ r`, so `dL/dy = r`.
fn project(y: &Tensor, r: &Tensor) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

fn check(value: impl Fn(&[f64]) -> f64, grad: Vec<f64>, at: &[f64]) -> f64 {
    let f = FnFragment { value, gradient: move |_: &[f64]| grad.clone() };
    grad_check(&f, at, GradCheckOptions::default()).max_rel_error
}

#[test]
fn dense_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, w, b) = (random(&[4, 3], &mut rng), random(&[3, 2], &mut rng), random(&[2], &mut rng));
    let r = random(&[4, 2], &mut rng);
    let g = dense_backward(&x, &w, &r).unwrap();
    let e_x = check(|p| project(&dense_forward(&with_data(&x, p), &w, &b).unwrap(), &r), g.dx.data().to_vec(), x.data());
    let e_w = check(|p| project(&dense_forward(&x, &with_data(&w, p), &b).unwrap(), &r), g.dw.data().to_vec(), w.data());
    let e_b = check(|p| project(&dense_forward(&x, &w, &with_data(&b, p)).unwrap(), &r), g.db.data().to_vec(), b.data());
    // The layer is linear in each argument, so central differences are exact
    // up to rounding.
    assert!(e_x.max(e_w).max(e_b) < 1e-8, "{e_x} {e_w} {e_b}");
}

#[test]
fn dense_examples() {
    let x = Tensor::from_vec(&[1, 2], vec![1.0, 2.0]).unwrap();
    let w = Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(dense_forward(&x, &w, &Tensor::zeros(&[2])).unwrap().data(), &[1.0, 2.0]);
    let b = Tensor::from_vec(&[2], vec![5.0, 5.0]).unwrap();
    assert_eq!(dense_forward(&x, &w, &b).unwrap().data(), &[6.0, 7.0]);
    let err = dense_forward(&x, &Tensor::zeros(&[3, 2]), &b).unwrap_err();
    assert!(err.to_string().contains("axis"), "{err}");
}

#[test]
fn relu_gradient_away_from_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data: Vec<f64> = (0..24).map(|_| {
        let v: f64 = rng.gen_range(0.1..1.0);
        if rng.gen_bool(0.5) { v } else { -v }
    }).collect();
    let x = Tensor::from_vec(&[4, 6], data).unwrap();
    let r = random(&[4, 6], &mut rng);
    let g = relu_backward(&x, &r);
    let e = check(|p| project(&relu_forward(&with_data(&x, p)), &r), g.data().to_vec(), x.data());
    assert!(e < TOL, "{e}");
}

#[test]
fn relu_examples() {
    let x = Tensor::from_vec(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
    assert_eq!(relu_forward(&x).data(), &[0.0, 0.0, 2.0]);
    let neg = Tensor::from_vec(&[3], vec![-1.0, -2.0, -0.5]).unwrap();
    assert!(relu_forward(&neg).data().iter().all(|v| *v == 0.0));
    assert!(relu_backward(&neg, &Tensor::from_vec(&[3], vec![1.0; 3]).unwrap()).data().iter().all(|v| *v == 0.0));
}

#[test]
fn conv_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, k, b) = (random(&[2, 7, 3], &mut rng), random(&[3, 3, 4], &mut rng), random(&[4], &mut rng));
    let r = random(&[2, 5, 4], &mut rng);
    let g = conv1d_backward(&x, &k, &r).unwrap();
    let e_x = check(|p| project(&conv1d_forward(&with_data(&x, p), &k, &b).unwrap(), &r), g.dx.data().to_vec(), x.data());
    let e_k = check(|p| project(&conv1d_forward(&x, &with_data(&k, p), &b).unwrap(), &r), g.dk.data().to_vec(), k.data());
    let e_b = check(|p| project(&conv1d_forward(&x, &k, &with_data(&b, p)).unwrap(), &r), g.db.data().to_vec(), b.data());
    assert!(e_x.max(e_k).max(e_b) < TOL, "{e_x} {e_k} {e_b}");
}

/// Reference cross-correlation: the same (w, c) summation order, bias last.
fn conv_brute_force(x: &Tensor, k: &Tensor, b: &Tensor) -> Vec<f64> {
    let (bs, t, cin) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (w, f) = (k.shape()[0], k.shape()[2]);
    let mut out = Vec::new();
    for bi in 0..bs {
        for ti in 0..=t - w {
            for fi in 0..f {
                let mut acc = 0.0;
                for wi in 0..w {
                    for ci in 0..cin {
                        acc += x.data()[(bi * t + ti + wi) * cin + ci] * k.data()[(wi * cin + ci) * f + fi];
                    }
                }
                out.push(acc + b.data()[fi]);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_equals_brute_force_exactly(
        batch in 1usize..=4, steps in 1usize..=10, cin in 1usize..=5,
        width in 1usize..=4, filters in 1usize..=5, seed in any::<u64>(), zero_rate in 0.0f64..0.6,
    ) {
        prop_assume!(steps >= width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = random(&[batch, steps, cin], &mut rng);
        x.data_mut().iter_mut().for_each(|v| if rng.gen_bool(zero_rate) { *v = 0.0 });
        let k = random(&[width, cin, filters], &mut rng);
        let b = random(&[filters], &mut rng);
        let fast = conv1d_forward(&x, &k, &b).unwrap();
        let slow = conv_brute_force(&x, &k, &b);
        prop_assert_eq!(fast.data(), slow.as_slice());
    }

    #[test]
    fn maxpool_backward_conserves_mass(batch in 1usize..=3, steps in 3usize..=12, feats in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random(&[batch, steps, feats], &mut rng);
        let pooled = maxpool1d_forward(&x, 3).unwrap();
        let g = random(pooled.out.shape(), &mut rng);
        let dx = maxpool1d_backward(x.shape(), &pooled.argmax, &g);
        let (a, b): (f64, f64) = (dx.data().iter().sum(), g.data().iter().sum());
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn softmax_rows_are_distributions(rows in 1usize..=6, seed in any::<u64>(), scale in 0.1f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut logits = random(&[rows, 9], &mut rng);
        logits.data_mut().iter_mut().for_each(|v| *v *= scale);
        let p = softmax(&logits).unwrap();
        for row in p.data().chunks(9) {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }
}

#[test]
fn maxpool_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Distinct values keep every window's maximum away from a tie.
    let mut vals: Vec<f64> = (0..2 * 9 * 3).map(|i| i as f64 * 0.37).collect();
    use rand::seq::SliceRandom;
    vals.shuffle(&mut rng);
    let x = Tensor::from_vec(&[2, 9, 3], vals).unwrap();
    let pooled = maxpool1d_forward(&x, 3).unwrap();
    let r = random(pooled.out.shape(), &mut rng);
    let g = maxpool1d_backward(x.shape(), &pooled.argmax, &r);
    let e = check(|p| project(&maxpool1d_forward(&with_data(&x, p), 3).unwrap().out, &r), g.data().to_vec(), x.data());
    assert!(e < TOL, "{e}");
}

#[test]
fn maxpool_examples() {
    let x = Tensor::from_vec(&[1, 6, 1], vec![1.0, 5.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
    assert_eq!(maxpool1d_forward(&x, 3).unwrap().out.data(), &[5.0, 6.0]);
}

#[test]
fn softmax_cross_entropy_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let logits = random(&[3, 9], &mut rng);
    let gold = [0, 4, 8];
    let out = softmax_cross_entropy(&logits, &gold, None).unwrap();
    let e = check(
        |p| softmax_cross_entropy(&with_data(&logits, p), &gold, None).unwrap().loss,
        out.grad.data().to_vec(),
        logits.data(),
    );
    assert!(e < TOL, "{e}");
}

#[test]
fn embedding_gradient_matches_one_hot_matmul() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (vocab, dim, seq) = (7usize, 4usize, 5usize);
    let table = random(&[vocab, dim], &mut rng);
    let ids: Vec<u32> = vec![3, 1, 3, 0, 6, 2, 3, 5, 1, 0];
    let g = random(&[2, seq, dim], &mut rng);
    let sparse = embedding_backward(&ids, &g).unwrap();
    let mut dense = Tensor::zeros(&[vocab, dim]);
    sparse.scatter_into(&mut dense);

    // Oracle: forward is onehot · E, so dE = onehotᵀ · G, with the PAD row dropped.
    let mut oracle = vec![0.0; vocab * dim];
    for (pos, &id) in ids.iter().enumerate() {
        if id == 0 {
            continue;
        }
        for d in 0..dim {
            oracle[id as usize * dim + d] += g.data()[pos * dim + d];
        }
    }
    for (a, b) in dense.data().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-12);
    }
    let fwd = embedding_forward(&ids, seq, &table).unwrap();
    for (pos, &id) in ids.iter().enumerate() {
        assert_eq!(&fwd.data()[pos * dim..(pos + 1) * dim], &table.data()[id as usize * dim..(id as usize + 1) * dim]);
    }
}

#[test]
fn embedding_scatter_of_ones_counts_multiplicity() {
    let ids: Vec<u32> = vec![2, 2, 4, 1, 2, 4, 0, 0];
    let ones = Tensor::from_vec(&[1, 8, 3], vec![1.0; 24]).unwrap();
    let mut dense = Tensor::zeros(&[5, 3]);
    embedding_backward(&ids, &ones).unwrap().scatter_into(&mut dense);
    let counts: Vec<f64> = dense.data().chunks(3).map(|r| r[0]).collect();
    assert_eq!(counts, vec![0.0, 1.0, 3.0, 0.0, 2.0]);
}

#[test]
fn corrupted_backward_is_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (x, w, b) = (random(&[4, 3], &mut rng), random(&[3, 2], &mut rng), random(&[2], &mut rng));
    let r = random(&[4, 2], &mut rng);
    let mut dw = dense_backward(&x, &w, &r).unwrap().dw.data().to_vec();
    dw[0] += 0.5;
    dw.iter_mut().for_each(|v| *v *= 1.1);
    let e = check(|p| project(&dense_forward(&x, &with_data(&w, p), &b).unwrap(), &r), dw, w.data());
    assert!(e > 1e-2, "{e}");
}
