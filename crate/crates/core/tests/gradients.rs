use kge_core::models::{grad, score_rows};
use kge_core::{ModelConfig, ModelKind, Norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn check(cfg: ModelConfig, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut h: Vec<f64> = (0..cfg.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut r: Vec<f64> = (0..cfg.rel_dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let mut t: Vec<f64> = (0..cfg.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = grad(&cfg, &h, &r, &t);
        for block in 0..3 {
            let n = [h.len(), r.len(), t.len()][block];
            for i in 0..n {
                let mut eval = |delta: f64| {
                    let row = match block {
                        0 => &mut h,
                        1 => &mut r,
                        _ => &mut t,
                    };
                    let old = row[i];
                    row[i] = old + delta;
                    let s = score_rows(&cfg, &h, &r, &t);
                    match block {
                        0 => h[i] = old,
                        1 => r[i] = old,
                        _ => t[i] = old,
                    }
                    s
                };
                let fd = (eval(STEP) - eval(-STEP)) / (2.0 * STEP);
                let an = [&g.head, &g.rel, &g.tail][block][i];
                worst = worst.max(rel_err(an, fd));
            }
        }
    }
    worst
}

#[test]
fn analytic_gradients_match_central_differences() {
    let configs = [
        ModelConfig::new(ModelKind::TransE, 8),
        ModelConfig::new(ModelKind::TransE, 8).with_norm(Norm::L2),
        ModelConfig::new(ModelKind::DistMult, 8),
        ModelConfig::new(ModelKind::ComplEx, 8),
        ModelConfig::new(ModelKind::SimplE, 8),
        ModelConfig::new(ModelKind::RotatE, 8),
    ];
    for (i, cfg) in configs.into_iter().enumerate() {
        let worst = check(cfg, 1000 + i as u64);
        assert!(worst < 1e-5, "{:?} {:?}: {worst:e}", cfg.kind, cfg.norm);
    }
}
