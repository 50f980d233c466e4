mod common;

use common::*;
use rand::Rng;
use unitary_forge::quanv::{
    extract_patches, quanv_forward, synthetic_bright_halves, ImageBatch, LabeledImages, QuanvClassifier, QuanvShape,
    QuanvSpec,
};

fn random_images(b: usize, ch: usize, h: usize, w: usize, seed: u64) -> ImageBatch {
    let mut r = rng(seed);
    let px = (0..b * ch * h * w).map(|_| r.random_range(-1.57..1.57)).collect();
    ImageBatch::new(b, ch, h, w, px).unwrap()
}

fn small_shape() -> QuanvShape {
    QuanvShape {
        in_channels: 4,
        out_channels: 3,
        kernel: 2,
        stride: 1,
        channel_block: 2,
    }
}

/// One output value computed from scratch: dense unitaries on explicit
/// 16-amplitude product states.
fn brute_force(imgs: &ImageBatch, spec: &QuanvSpec, b: usize, o: usize, y: usize, x: usize) -> f64 {
    let s = &spec.shape;
    let nb = s.in_channels / s.channel_block;
    let mut total = 0.0;
    for blk in 0..nb {
        let mut angles = Vec::new();
        for ky in 0..s.kernel {
            for kx in 0..s.kernel {
                let mean = (0..s.channel_block)
                    .map(|c| imgs.at(b, blk * s.channel_block + c, y * s.stride + ky, x * s.stride + kx))
                    .sum::<f64>()
                    / s.channel_block as f64;
                angles.push(mean);
            }
        }
        let p = &spec.circuits[o * nb + blk];
        let u = taylor_expm(&assemble_oracle(p.dim(), p.theta()));
        let z = z_expect(angles.len(), &matvec(&u, &product_state(&angles)));
        total += z.iter().sum::<f64>() / z.len() as f64;
    }
    total / nb as f64
}

#[test]
fn patches_match_direct_indexing() {
    let imgs = random_images(2, 3, 7, 6, 1);
    for (k, s) in [(2, 1), (3, 2), (1, 3), (6, 1)] {
        let p = extract_patches(&imgs, k, s).unwrap();
        assert_eq!(p.out_height, (7 - k) / s + 1);
        assert_eq!(p.out_width, (6 - k) / s + 1);
        for b in 0..2 {
            for c in 0..3 {
                for y in 0..p.out_height {
                    for x in 0..p.out_width {
                        let patch = p.patch(b, c, y, x);
                        for (i, v) in patch.iter().enumerate() {
                            assert_eq!(*v, imgs.at(b, c, y * s + i / k, x * s + i % k));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn forward_matches_brute_force() {
    let imgs = random_images(2, 4, 4, 3, 2);
    let spec = QuanvSpec::random(small_shape(), 7).unwrap();
    let maps = quanv_forward(&imgs, &spec).unwrap();
    assert_eq!((maps.batch, maps.channels, maps.height, maps.width), (2, 3, 3, 2));
    for b in 0..2 {
        for o in 0..3 {
            for y in 0..3 {
                for x in 0..2 {
                    let want = brute_force(&imgs, &spec, b, o, y, x);
                    assert!((maps.at(b, o, y, x) - want).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn single_patch_image_with_default_shape() {
    let imgs = random_images(1, 16, 2, 2, 3);
    let spec = QuanvSpec::random(QuanvShape::default(), 4).unwrap();
    let maps = quanv_forward(&imgs, &spec).unwrap();
    assert_eq!(maps.values.len(), 8);
    for o in 0..8 {
        assert!((maps.at(0, o, 0, 0) - brute_force(&imgs, &spec, 0, o, 0, 0)).abs() < 1e-12);
    }
}

#[test]
fn identity_circuits_on_constant_image_give_cosine() {
    let v = -0.9;
    let imgs = ImageBatch::new(1, 16, 5, 5, vec![v; 16 * 25]).unwrap();
    let maps = quanv_forward(&imgs, &QuanvSpec::identity(QuanvShape::default()).unwrap()).unwrap();
    assert!(maps.values.iter().all(|m| (m - v.cos()).abs() < 1e-13));
}

#[test]
fn zero_image_output_is_location_independent() {
    let imgs = ImageBatch::new(1, 4, 5, 4, vec![0.0; 80]).unwrap();
    let spec = QuanvSpec::random(small_shape(), 8).unwrap();
    let maps = quanv_forward(&imgs, &spec).unwrap();
    for o in 0..3 {
        let first = maps.at(0, o, 0, 0);
        assert!((first - brute_force(&imgs, &spec, 0, o, 0, 0)).abs() < 1e-12);
        for y in 0..maps.height {
            for x in 0..maps.width {
                assert_eq!(maps.at(0, o, y, x), first);
            }
        }
    }
}

#[test]
fn shifting_by_the_stride_shifts_the_output() {
    for stride in [1, 2] {
        let shape = QuanvShape { stride, ..small_shape() };
        let spec = QuanvSpec::random(shape, 9).unwrap();
        let big = random_images(1, 4, 8, 8, 10);
        // crop starting one stride to the right and down
        let crop = |dy: usize, dx: usize| {
            let mut px = Vec::new();
            for c in 0..4 {
                for y in 0..6 {
                    for x in 0..6 {
                        px.push(big.at(0, c, y + dy, x + dx));
                    }
                }
            }
            ImageBatch::new(1, 4, 6, 6, px).unwrap()
        };
        let base = quanv_forward(&crop(0, 0), &spec).unwrap();
        let shifted = quanv_forward(&crop(stride, stride), &spec).unwrap();
        for o in 0..3 {
            for y in 0..base.height - 1 {
                for x in 0..base.width - 1 {
                    assert_eq!(shifted.at(0, o, y, x), base.at(0, o, y + 1, x + 1));
                }
            }
        }
    }
}

#[test]
fn outputs_are_bounded() {
    for seed in 0..5 {
        let imgs = random_images(3, 4, 4, 4, 20 + seed);
        let maps = quanv_forward(&imgs, &QuanvSpec::random(small_shape(), seed).unwrap()).unwrap();
        assert!(maps.values.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }
}

#[test]
fn classifier_gradient_matches_differences() {
    let data = synthetic_bright_halves(2, 4, 3, 3, 0.4, 5).unwrap();
    let mut model = QuanvClassifier::new(QuanvSpec::random(small_shape(), 6).unwrap(), 3, 3, 2).unwrap();
    let mut r = rng(30);
    for w in model.head.weights.iter_mut() {
        *w = r.random_range(-1.0..1.0);
    }
    let (_, grad) = model.loss_and_grad(&data).unwrap();
    let n_layer = model.layer.n_params();
    assert_eq!(grad.len(), model.n_params());

    let loss_of = |m: &QuanvClassifier, d: &LabeledImages| m.loss_and_grad(d).unwrap().0;
    let h = 1e-5;
    for _ in 0..25 {
        let i = r.random_range(0..model.n_params());
        let mut plus = model.clone();
        let mut minus = model.clone();
        let bump = |m: &mut QuanvClassifier, delta: f64| {
            if i < n_layer {
                let per = n_layer / m.layer.circuits.len();
                m.layer.circuits[i / per].theta_mut()[i % per] += delta;
            } else if i - n_layer < m.head.weights.len() {
                m.head.weights[i - n_layer] += delta;
            } else {
                let j = i - n_layer - m.head.weights.len();
                m.head.bias[j] += delta;
            }
        };
        bump(&mut plus, h);
        bump(&mut minus, -h);
        let fd = (loss_of(&plus, &data) - loss_of(&minus, &data)) / (2.0 * h);
        assert!(worst_ratio(&[grad[i]], &[fd], 1e-4, 1e-9) <= 1.0, "param {i}: {} vs {fd}", grad[i]);
    }
}
