use a2rl_core::env::CropWindow;
use a2rl_core::net::{
    backward, forward, EncoderKind, EpisodeEncoder, NetConfig, PolicyParams, RecurrentState, Tape, TapeStep,
};
use a2rl_core::optim::RmsProp;
use a2rl_core::reward::RewardConfig;
use a2rl_core::rng;
use a2rl_core::trainer::{segment_loss, SyntheticTargets, Trainer, TrainerConfig};
use proptest::prelude::*;

fn small_net(recurrent: bool) -> NetConfig {
    NetConfig { encoder: EncoderKind::Coordinate, feature_dim: 8, hidden: 16, recurrent }
}

#[test]
fn update_applies_the_sum_of_per_segment_gradients() {
    let cfg = TrainerConfig { batch_size: 3, t_max: 5, grad_clip: None, seed: 9, ..Default::default() };
    let src = SyntheticTargets::default();
    let mut trainer = Trainer::new(small_net(true), cfg, RewardConfig::default(), &src).unwrap();
    // warm up so that some streams are mid-episode with nonzero memory
    for _ in 0..4 {
        trainer.round().unwrap();
    }
    let before = trainer.params().clone();
    let segments = trainer.collect(cfg.t_max).unwrap();
    assert!(segments.len() >= cfg.batch_size);
    assert_eq!(segments.iter().map(|s| s.transitions.len()).sum::<usize>(), cfg.batch_size * cfg.t_max);

    let mut sum = vec![0.0; before.len()];
    for s in segments.iter().rev() {
        let (_, g) = segment_loss(&before, &s.transitions, &s.returns, cfg.beta).unwrap();
        for (a, b) in sum.iter_mut().zip(&g.data) {
            *a += b;
        }
    }
    let mut expected = before.as_slice().to_vec();
    let mut opt = RmsProp::new(before.len(), cfg.learning_rate, cfg.rms_decay, cfg.rms_epsilon);
    opt.step(&mut expected, &sum);

    // a trainer built from the same parameters starts with a fresh optimizer too
    let mut fresh = Trainer::with_params(before.clone(), cfg, RewardConfig::default(), &src).unwrap();
    fresh.apply(&segments).unwrap();
    for (i, (a, b)) in fresh.params().as_slice().iter().zip(&expected).enumerate() {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "param {i}: {a} vs {b}");
    }
}

#[test]
fn training_is_deterministic() {
    let cfg = TrainerConfig { batch_size: 4, total_steps: 60, seed: 5, ..Default::default() };
    let src = SyntheticTargets::default();
    let run = || a2rl_core::trainer::train(small_net(true), cfg, RewardConfig::default(), &src).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.params.as_slice(), b.params.as_slice());
    assert_eq!(a.log, b.log);
    let other = a2rl_core::trainer::train(
        small_net(true),
        TrainerConfig { seed: 6, ..cfg },
        RewardConfig::default(),
        &src,
    )
    .unwrap();
    assert_ne!(a.params.as_slice(), other.params.as_slice());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn entropy_bonus_raises_entropy(seed in any::<u64>(), recurrent in any::<bool>()) {
        let net = small_net(recurrent);
        let mut r = rng::seeded(seed);
        let mut params = PolicyParams::init(net, &mut r).unwrap();
        // make the policy clearly non-uniform
        let pi = params.layout().pi_w.clone();
        for v in &mut params.as_mut_slice()[pi] {
            *v = rng::uniform(&mut r, -1.0, 1.0);
        }
        let src = SyntheticTargets::default();
        let task = src.task_for(src.sample_target(&mut r));
        let window = CropWindow { x: 0.1, y: 0.05, w: 0.7, h: 0.8 };
        let obs = EpisodeEncoder::new(net.encoder, &task.image).observe(&window);
        let state = RecurrentState::zeros(net.hidden);
        let out = forward(&params, &state, &obs).unwrap();
        let action = a2rl_core::net::sample_action(&out.probs, &mut r);
        // return equal to the value estimate: zero advantage
        let tape = Tape { initial: state.clone(), steps: vec![TapeStep { observation: obs.clone(), action, ret: out.value }] };
        let grads = backward(&params, &tape, 0.05).unwrap().grads;
        let mut opt = RmsProp::new(params.len(), 1e-6, 0.99, 1e-8);
        opt.step(params.as_mut_slice(), &grads.data);
        let after = forward(&params, &state, &obs).unwrap();
        prop_assert!(after.entropy() > out.entropy(), "{} -> {}", out.entropy(), after.entropy());
    }
}
