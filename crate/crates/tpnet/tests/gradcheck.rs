//! Central finite-difference oracle for every differentiable op and for the
//! full generator objective. The oracle only evaluates forward passes; it
//! never touches the reverse-mode code it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tpnet::data::{gen_synthetic, Scenario, Scene};
use tpnet::model::{
    generator_adv_loss, loss_final, loss_multi_supervision, sample_noise, stream_rng,
    DiscriminatorParams, GeneratorConfig, GeneratorParams,
};
use tpnet::pyramid::build_pyramid;
use tpnet::tape::{Tape, VarId};
use tpnet::tensor::Tensor;

const H: f64 = 1e-5;
const REL_TOL: f64 = 1e-3;
const ABS_TOL: f64 = 1e-6;

fn assert_close(ad: f64, fd: f64, what: &str) {
    let err = (ad - fd).abs();
    let tol = ABS_TOL + REL_TOL * ad.abs().max(fd.abs());
    assert!(
        err <= tol,
        "{what}: reverse-mode {ad} vs finite-difference {fd} (err {err})"
    );
}

/// Checks d loss / d input for every coordinate of every input, where the
/// loss is built by `build` from leaves bound in order.
fn check_op<F>(name: &str, inputs: &[Tensor], build: F)
where
    F: Fn(&mut Tape, &[VarId]) -> tpnet::Result<VarId>,
{
    let mut tape = Tape::new();
    let ids: Vec<VarId> = inputs
        .iter()
        .map(|t| tape.leaf(t.clone()).unwrap())
        .collect();
    let loss = build(&mut tape, &ids).unwrap();
    assert!(tape.value(loss).is_scalar(), "{name}: loss must be scalar");
    let grads = tape.backward(loss).unwrap();

    for (i, t) in inputs.iter().enumerate() {
        let ad = grads.get(ids[i], &tape);
        for j in 0..t.numel() {
            let eval = |delta: f64| -> f64 {
                let mut pert: Vec<Tensor> = inputs.to_vec();
                pert[i].data_mut()[j] += delta;
                let mut tape = Tape::new();
                let ids: Vec<VarId> = pert
                    .iter()
                    .map(|t| tape.leaf(t.clone()).unwrap())
                    .collect();
                let loss = build(&mut tape, &ids).unwrap();
                tape.value(loss).item()
            };
            let fd = (eval(H) - eval(-H)) / (2.0 * H);
            assert_close(ad.data()[j], fd, &format!("{name} input {i} coord {j}"));
        }
    }
}

fn rng_for(draw: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACC0 ^ draw)
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Tensor {
    Tensor::vector((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
}

/// Values kept away from relu/clamp kinks so the finite difference cannot
/// straddle them.
fn rand_vec_off_kink(rng: &mut ChaCha8Rng, n: usize, kink: f64) -> Tensor {
    Tensor::vector(
        (0..n)
            .map(|_| {
                let mag = rng.random_range(0.01..2.0);
                let sign = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
                kink + sign * mag
            })
            .collect(),
    )
}

/// Weighted sum turns any output into a scalar loss with distinct
/// per-element sensitivities.
fn weighted(tape: &mut Tape, out: VarId, weights: &Tensor) -> tpnet::Result<VarId> {
    let w = tape.leaf(weights.clone())?;
    let prod = tape.mul(out, w)?;
    tape.sum(prod)
}

#[test]
fn elementwise_ops_match_finite_differences() {
    for draw in 0..20 {
        let mut rng = rng_for(draw);
        let n = 5;
        let w = rand_vec(&mut rng, n);

        let a = rand_vec(&mut rng, n);
        let b = rand_vec(&mut rng, n);
        check_op("add", &[a.clone(), b.clone()], |t, ids| {
            let y = t.add(ids[0], ids[1])?;
            weighted(t, y, &w)
        });
        check_op("sub", &[a.clone(), b.clone()], |t, ids| {
            let y = t.sub(ids[0], ids[1])?;
            weighted(t, y, &w)
        });
        check_op("mul", &[a.clone(), b.clone()], |t, ids| {
            let y = t.mul(ids[0], ids[1])?;
            weighted(t, y, &w)
        });
        check_op("scale", &[a.clone()], |t, ids| {
            let y = t.scale(ids[0], -1.7)?;
            weighted(t, y, &w)
        });
        check_op("add_scalar", &[a.clone()], |t, ids| {
            let y = t.add_scalar(ids[0], 0.9)?;
            weighted(t, y, &w)
        });
        check_op("tanh", &[a.clone()], |t, ids| {
            let y = t.tanh(ids[0])?;
            weighted(t, y, &w)
        });
        check_op("sigmoid", &[a.clone()], |t, ids| {
            let y = t.sigmoid(ids[0])?;
            weighted(t, y, &w)
        });

        let pos = Tensor::vector(
            (0..n).map(|_| rng.random_range(0.1..2.0)).collect::<Vec<_>>(),
        );
        check_op("log", &[pos], |t, ids| {
            let y = t.log(ids[0])?;
            weighted(t, y, &w)
        });

        let off0 = rand_vec_off_kink(&mut rng, n, 0.0);
        check_op("relu", &[off0], |t, ids| {
            let y = t.relu(ids[0])?;
            weighted(t, y, &w)
        });
        let off_half = rand_vec_off_kink(&mut rng, n, 0.5);
        check_op("clamp_min", &[off_half], |t, ids| {
            let y = t.clamp_min(ids[0], 0.5)?;
            weighted(t, y, &w)
        });
    }
}

#[test]
fn reduction_and_shape_ops_match_finite_differences() {
    for draw in 0..20 {
        let mut rng = rng_for(100 + draw);
        let a = rand_vec(&mut rng, 6);
        let b = rand_vec(&mut rng, 6);

        check_op("sum", &[a.clone()], |t, ids| t.sum(ids[0]));
        check_op("mean", &[a.clone()], |t, ids| t.mean(ids[0]));
        check_op("mean_sq_error", &[a.clone(), b.clone()], |t, ids| {
            t.mean_sq_error(ids[0], ids[1])
        });

        let w3 = rand_vec(&mut rng, 7);
        let c = rand_vec(&mut rng, 3);
        let d = rand_vec(&mut rng, 4);
        check_op("concat", &[c.clone(), d.clone()], |t, ids| {
            let y = t.concat(&[ids[0], ids[1]])?;
            weighted(t, y, &w3)
        });

        let w_slice = rand_vec(&mut rng, 3);
        let e = rand_vec(&mut rng, 6);
        check_op("slice", &[e], |t, ids| {
            let y = t.slice(ids[0], 2, 3)?;
            weighted(t, y, &w_slice)
        });

        let w_stack = rand_vec(&mut rng, 8);
        check_op("stack", &[rand_vec(&mut rng, 4), rand_vec(&mut rng, 4)], |t, ids| {
            let y = t.stack(&[ids[0], ids[1]])?;
            let flat = t.leaf(w_stack.clone())?;
            // Stack output is a [2,4] matrix; matmul it against a vector to
            // reduce, exercising the matrix gradient path too.
            let wv = t.slice(flat, 0, 4)?;
            let mv = t.matmul(y, wv)?;
            t.sum(mv)
        });

        // Elementwise max with a comfortable gap between candidates.
        let mut m1 = rand_vec(&mut rng, 5);
        let mut m2 = rand_vec(&mut rng, 5);
        for j in 0..5 {
            if (m1.data()[j] - m2.data()[j]).abs() < 0.05 {
                m2.data_mut()[j] += 0.2;
            }
        }
        let wm = rand_vec(&mut rng, 5);
        check_op("elementwise_max", &[m1, m2], |t, ids| {
            let y = t.elementwise_max(&[ids[0], ids[1]])?;
            weighted(t, y, &wm)
        });
    }
}

#[test]
fn matmul_matches_finite_differences() {
    for draw in 0..20 {
        let mut rng = rng_for(200 + draw);
        let a = Tensor::matrix(
            3,
            4,
            (0..12).map(|_| rng.random_range(-1.5..1.5)).collect(),
        )
        .unwrap();
        let v = rand_vec(&mut rng, 4);
        let wv = rand_vec(&mut rng, 3);
        check_op("matmul_vec", &[a.clone(), v], |t, ids| {
            let y = t.matmul(ids[0], ids[1])?;
            weighted(t, y, &wv)
        });

        let b = Tensor::matrix(
            4,
            2,
            (0..8).map(|_| rng.random_range(-1.5..1.5)).collect(),
        )
        .unwrap();
        let wm = rand_vec(&mut rng, 2);
        check_op("matmul_mat", &[a, b], |t, ids| {
            let y = t.matmul(ids[0], ids[1])?;
            // Reduce the [3,2] product with a vector and sum.
            let vv = t.leaf(wm.clone())?;
            let mv = t.matmul(y, vv)?;
            t.sum(mv)
        });
    }
}

#[test]
fn lstm_step_matches_finite_differences() {
    for draw in 0..20 {
        let mut rng = rng_for(300 + draw);
        let (hidden, input) = (3, 2);
        let w_x = Tensor::matrix(
            4 * hidden,
            input,
            (0..4 * hidden * input)
                .map(|_| rng.random_range(-0.8..0.8))
                .collect(),
        )
        .unwrap();
        let w_h = Tensor::matrix(
            4 * hidden,
            hidden,
            (0..4 * hidden * hidden)
                .map(|_| rng.random_range(-0.8..0.8))
                .collect(),
        )
        .unwrap();
        let b = rand_vec(&mut rng, 4 * hidden);
        let h = rand_vec(&mut rng, hidden);
        let c = rand_vec(&mut rng, hidden);
        let x = rand_vec(&mut rng, input);
        let w_out = rand_vec(&mut rng, 2 * hidden);

        check_op("lstm_step", &[w_x, w_h, b, h, c, x], |t, ids| {
            let (h2, c2) = t.lstm_step(ids[0], ids[1], ids[2], ids[3], ids[4], ids[5])?;
            let both = t.concat(&[h2, c2])?;
            weighted(t, both, &w_out)
        });
    }
}

/// Builds the full generator objective for one scene with fixed noise and a
/// fixed discriminator, as a function of the generator parameters.
fn generator_objective(
    gen: &GeneratorParams,
    dis: &DiscriminatorParams,
    scene: &Scene,
    noise: &[Tensor],
) -> (f64, Vec<Tensor>) {
    let cfg = gen.cfg;
    let mut tape = Tape::new();
    let gvars = gen.bind(&mut tape).unwrap();
    let dvars = dis.bind(&mut tape).unwrap();
    let fake = gvars.generate(&mut tape, scene, noise).unwrap();
    let targets: Vec<_> = (0..scene.num_peds())
        .map(|i| build_pyramid(scene.future(i), &cfg.pyramid).unwrap())
        .collect();
    let adv = generator_adv_loss(&mut tape, &dvars, scene, &fake, false).unwrap();
    let ls = loss_multi_supervision(&mut tape, &fake, &targets, &cfg.pyramid.scale_weights())
        .unwrap();
    let lf = loss_final(&mut tape, &fake, &scene.futures()).unwrap();
    let partial = tape.add(adv, ls).unwrap();
    let loss = tape.add(partial, lf).unwrap();

    let grads = tape.backward(loss).unwrap();
    let g: Vec<Tensor> = gvars
        .var_ids()
        .iter()
        .map(|&id| grads.get(id, &tape))
        .collect();
    (tape.value(loss).item(), g)
}

#[test]
fn full_generator_loss_matches_finite_differences() {
    let cfg = GeneratorConfig::standard();
    let mut gen = GeneratorParams::new(cfg, &mut ChaCha8Rng::seed_from_u64(41));
    let dis = DiscriminatorParams::new(cfg.dims, 8, 12, &mut ChaCha8Rng::seed_from_u64(42));

    // A 2-pedestrian scene.
    let mut scene = gen_synthetic(Scenario::Sinusoidal, 2, 77, 8, 12).remove(0);
    let other = gen_synthetic(Scenario::Sinusoidal, 2, 78, 8, 12).remove(1);
    scene.ped_ids.push(500);
    scene.trajectories.push(other.trajectories[0].clone());
    assert_eq!(scene.num_peds(), 2);

    let noise = vec![sample_noise(cfg.dims.noise, &mut stream_rng(5, 5, 5))];
    let (_, ad_grads) = generator_objective(&gen, &dis, &scene, &noise);

    // A couple of coordinates from every parameter tensor, plus 20 draws
    // spread uniformly over the whole parameter vector.
    let names: Vec<String> = gen.named().iter().map(|(n, _)| n.clone()).collect();
    let sizes: Vec<usize> = gen.named().iter().map(|(_, t)| t.numel()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut picks: Vec<(usize, usize)> = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        picks.push((i, rng.random_range(0..n)));
        picks.push((i, rng.random_range(0..n)));
    }
    for _ in 0..20 {
        let i = rng.random_range(0..sizes.len());
        picks.push((i, rng.random_range(0..sizes[i])));
    }

    for (tensor_idx, coord) in picks {
        let ad = ad_grads[tensor_idx].data()[coord];
        let mut eval = |delta: f64| -> f64 {
            {
                let mut named = gen.named_mut();
                named[tensor_idx].1.data_mut()[coord] += delta;
            }
            let (value, _) = generator_objective(&gen, &dis, &scene, &noise);
            {
                let mut named = gen.named_mut();
                named[tensor_idx].1.data_mut()[coord] -= delta;
            }
            value
        };
        let fd = (eval(H) - eval(-H)) / (2.0 * H);
        assert_close(
            ad,
            fd,
            &format!("generator loss wrt {}[{}]", names[tensor_idx], coord),
        );
    }
}

#[test]
fn discriminator_loss_matches_finite_differences() {
    let cfg = GeneratorConfig::standard();
    let mut dis = DiscriminatorParams::new(cfg.dims, 8, 12, &mut ChaCha8Rng::seed_from_u64(43));
    let scene = gen_synthetic(Scenario::Sinusoidal, 1, 79, 8, 12).remove(0);
    // A fixed fake future, detached from any generator.
    let fake: Vec<Vec<tpnet::Point>> = scene
        .futures()
        .iter()
        .map(|t| t.iter().map(|p| *p + tpnet::Point::new(0.3, -0.2)).collect())
        .collect();

    let objective = |dis: &DiscriminatorParams| -> (f64, Vec<Tensor>) {
        let mut tape = Tape::new();
        let dvars = dis.bind(&mut tape).unwrap();
        let loss = tpnet::model::discriminator_loss(&mut tape, &dvars, &scene, &fake).unwrap();
        let grads = tape.backward(loss).unwrap();
        let g = dvars
            .var_ids()
            .iter()
            .map(|&id| grads.get(id, &tape))
            .collect();
        (tape.value(loss).item(), g)
    };
    let (_, ad_grads) = objective(&dis);

    let sizes: Vec<usize> = dis.named().iter().map(|(_, t)| t.numel()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4343);
    for _ in 0..20 {
        let tensor_idx = rng.random_range(0..sizes.len());
        let coord = rng.random_range(0..sizes[tensor_idx]);
        let ad = ad_grads[tensor_idx].data()[coord];
        let mut eval = |delta: f64| -> f64 {
            {
                let mut named = dis.named_mut();
                named[tensor_idx].1.data_mut()[coord] += delta;
            }
            let (value, _) = objective(&dis);
            {
                let mut named = dis.named_mut();
                named[tensor_idx].1.data_mut()[coord] -= delta;
            }
            value
        };
        let fd = (eval(H) - eval(-H)) / (2.0 * H);
        assert_close(ad, fd, &format!("discriminator loss coord {tensor_idx}/{coord}"));
    }
}
