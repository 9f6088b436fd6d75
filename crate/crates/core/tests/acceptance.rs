//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p viewpoint-core --test acceptance`. The
//! Bitterlemons reproduction runs only when `VIEWPOINT_BITTERLEMONS` points
//! at an annotated JSONL corpus; otherwise it prints SKIP.

use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use viewpoint_core::corpus::{
    apply_partition, build_unimodal, load_annotated_corpus, BimodalCorpus, BimodalDocument, PartitionScheme,
    UnimodalCorpus, UnimodalDocument, Viewpoint, Vocabulary,
};
use viewpoint_core::corrlda2::{cooccurrence_frequencies, CorrLda2State};
use viewpoint_core::cv::{cross_validate, cross_validate_matrix};
use viewpoint_core::experiment::{run_corrlda2, run_lda, SamplerSettings};
use viewpoint_core::features::{build_feature_matrix, FeatureMode};
use viewpoint_core::lda::LdaState;
use viewpoint_core::params::{Hyperparams, DEFAULT_CORRLDA2_SWEEPS, DEFAULT_LDA_SWEEPS};
use viewpoint_core::rng::ChainSeed;
use viewpoint_core::svm::{primal_objective, train, SvmConfig};
use viewpoint_core::synthetic::{generate, SyntheticConfig};
use viewpoint_core::viewpoint::{
    classify_and_score, consistency_sweep, extract_association_weights, form_groups, SweepSettings,
    TopicAspectGroups, DEFAULT_THRESHOLD,
};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn vocab(prefix: &str, n: usize) -> Vocabulary {
    Vocabulary::from_sorted((0..n).map(|i| format!("{prefix}{i:03}")).collect())
}

fn total_variation(p: &HashMap<u64, f64>, q: &HashMap<u64, f64>) -> f64 {
    let mut keys: Vec<_> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys.iter().map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

fn normalized(weights: HashMap<u64, f64>) -> HashMap<u64, f64> {
    let z: f64 = weights.values().sum();
    weights.into_iter().map(|(k, v)| (k, v / z)).collect()
}

/// Sequential Pólya-urn probability of drawing `items` (category ids) into
/// the urns named by `urns`, each with `dim` categories and concentration
/// `conc` per category.
struct Urns {
    counts: HashMap<(usize, usize), f64>,
    totals: HashMap<usize, f64>,
    dim: usize,
    conc: f64,
}

impl Urns {
    fn new(dim: usize, conc: f64) -> Self {
        Self { counts: HashMap::new(), totals: HashMap::new(), dim, conc }
    }

    fn draw(&mut self, urn: usize, item: usize) -> f64 {
        let c = self.counts.entry((urn, item)).or_insert(0.0);
        let t = self.totals.entry(urn).or_insert(0.0);
        let p = (*c + self.conc) / (*t + self.dim as f64 * self.conc);
        *c += 1.0;
        *t += 1.0;
        p
    }
}

// ---------------------------------------------------------------- AC1

fn ac1() -> Outcome {
    let docs: Vec<Vec<u32>> = vec![vec![0, 1, 1], vec![2, 2, 0]];
    let (t_n, w_n) = (2, 3);
    let h = Hyperparams::default();
    let corpus = UnimodalCorpus::from_parts(
        vocab("w", w_n),
        docs.iter()
            .enumerate()
            .map(|(i, ids)| UnimodalDocument { doc_id: format!("d{i}"), label: None, ids: ids.clone() })
            .collect(),
    )
    .unwrap();
    let tokens: Vec<(usize, u32)> = docs.iter().enumerate().flat_map(|(d, ids)| ids.iter().map(move |&w| (d, w))).collect();

    // joint p(z, w) by urn order over all 2^6 assignments
    let mut exact = HashMap::new();
    for code in 0..(1u64 << tokens.len()) {
        let mut theta = Urns::new(t_n, h.alpha);
        let mut phi = Urns::new(w_n, h.beta);
        let mut p = 1.0;
        for (i, &(d, w)) in tokens.iter().enumerate() {
            let z = ((code >> i) & 1) as usize;
            p *= theta.draw(d, z) * phi.draw(z, w as usize);
        }
        exact.insert(code, p);
    }
    let exact = normalized(exact);

    let (chains, per_chain) = (100, 500);
    let samples = chains * per_chain;
    let mut hist: HashMap<u64, f64> = HashMap::new();
    for chain in 0..chains {
        let mut state = LdaState::init(&corpus, t_n, h, ChainSeed::new(2024, chain as u64)).unwrap();
        for _ in 0..100 {
            state.sweep();
        }
        for _ in 0..per_chain {
            state.sweep();
            let code = state
                .assignments()
                .iter()
                .flatten()
                .enumerate()
                .fold(0u64, |acc, (i, &z)| acc | ((z as u64) << i));
            *hist.entry(code).or_default() += 1.0 / samples as f64;
        }
    }
    let tv = total_variation(&exact, &hist);
    check(tv < 0.05, format!("TV = {tv:.4} (< 0.05) over {samples} sweeps, 64 configurations"))
}

// ---------------------------------------------------------------- AC2

fn ac2() -> Outcome {
    let topical: Vec<Vec<u32>> = vec![vec![0, 1], vec![1, 1]];
    let opinion: Vec<Vec<u32>> = vec![vec![0], vec![1]];
    let (t_n, a_n, w_n, wo_n) = (2usize, 2usize, 2usize, 2usize);
    let h = Hyperparams::default();
    let corpus = BimodalCorpus::from_parts(
        vocab("t", w_n),
        vocab("o", wo_n),
        (0..2)
            .map(|d| BimodalDocument {
                doc_id: format!("d{d}"),
                label: None,
                topical_ids: topical[d].clone(),
                opinion_ids: opinion[d].clone(),
            })
            .collect(),
    )
    .unwrap();

    // state code: z bits (4), then per opinion token x bit and z̃ bit
    let encode = |z: &[usize], x: &[usize], a: &[usize]| -> u64 {
        let mut code = 0u64;
        for (bit, v) in z.iter().chain(x).chain(a).enumerate() {
            code |= (*v as u64) << bit;
        }
        code
    };
    let n_top = 4;
    let n_op = 2;
    let mut exact = HashMap::new();
    for code in 0..(1u64 << (n_top + 2 * n_op)) {
        let bits: Vec<usize> = (0..n_top + 2 * n_op).map(|i| ((code >> i) & 1) as usize).collect();
        let (z, rest) = bits.split_at(n_top);
        let (x, a) = rest.split_at(n_op);
        let mut theta = Urns::new(t_n, h.alpha);
        let mut phi = Urns::new(w_n, h.beta);
        let mut psi = Urns::new(a_n, h.gamma);
        let mut phi_t = Urns::new(wo_n, h.beta_tilde);
        let mut p = 1.0;
        let mut k = 0;
        let mut doc_z = Vec::new();
        for (d, doc) in topical.iter().enumerate() {
            let mut zs = Vec::new();
            for &w in doc {
                p *= theta.draw(d, z[k]) * phi.draw(z[k], w as usize);
                zs.push(z[k]);
                k += 1;
            }
            doc_z.push(zs);
        }
        for d in 0..2 {
            let zs = &doc_z[d];
            let carriers = zs.iter().filter(|&&t| t == x[d]).count();
            p *= carriers as f64 / zs.len() as f64;
            p *= psi.draw(x[d], a[d]) * phi_t.draw(a[d], opinion[d][0] as usize);
        }
        if p > 0.0 {
            exact.insert(encode(z, x, a), p);
        }
    }
    let exact = normalized(exact);

    let (chains, per_chain) = (400, 500);
    let samples = chains * per_chain;
    let mut hist: HashMap<u64, f64> = HashMap::new();
    for chain in 0..chains {
        let mut state = CorrLda2State::init(&corpus, t_n, a_n, h, ChainSeed::new(77, chain as u64)).unwrap();
        for _ in 0..100 {
            state.full_sweep();
        }
        for _ in 0..per_chain {
            state.full_sweep();
            let z: Vec<usize> = state.topic_assignments().iter().flatten().map(|&v| v as usize).collect();
            let x: Vec<usize> = state.supertopic_assignments().iter().flatten().map(|&v| v as usize).collect();
            let a: Vec<usize> = state.aspect_assignments().iter().flatten().map(|&v| v as usize).collect();
            *hist.entry(encode(&z, &x, &a)).or_default() += 1.0 / samples as f64;
        }
    }
    let tv = total_variation(&exact, &hist);
    check(
        tv < 0.05,
        format!("TV = {tv:.4} (< 0.05) over {samples} sweeps, {} supported configurations", exact.len()),
    )
}

// ---------------------------------------------------------------- AC3

fn ac3() -> Outcome {
    let mut rng = ChainSeed::new(31, 0).rng();
    let (w_n, wo_n) = (40, 15);
    let mut uni = Vec::new();
    let mut bi = Vec::new();
    for d in 0..50 {
        let n = rng.random_range(1..30);
        let m = if d % 10 == 0 { 0 } else { rng.random_range(0..10) };
        let topical: Vec<u32> = (0..n).map(|_| rng.random_range(0..w_n as u32)).collect();
        let opinion: Vec<u32> = (0..m).map(|_| rng.random_range(0..wo_n as u32)).collect();
        uni.push(UnimodalDocument { doc_id: format!("d{d:02}"), label: None, ids: topical.clone() });
        bi.push(BimodalDocument { doc_id: format!("d{d:02}"), label: None, topical_ids: topical, opinion_ids: opinion });
    }
    // one document with opinion words only
    bi.push(BimodalDocument { doc_id: "d50".into(), label: None, topical_ids: vec![], opinion_ids: vec![1, 2] });
    let uni = UnimodalCorpus::from_parts(vocab("w", w_n), uni).unwrap();
    let bi = BimodalCorpus::from_parts(vocab("w", w_n), vocab("o", wo_n), bi).unwrap();
    let h = Hyperparams::default();
    let mut lda = LdaState::init(&uni, 5, h, ChainSeed::new(1, 0)).unwrap();
    let mut corr = CorrLda2State::init(&bi, 5, 2, h, ChainSeed::new(1, 1)).unwrap();
    for s in 0..200 {
        lda.sweep();
        corr.full_sweep();
        if let Err(e) = lda.check_invariants() {
            return Outcome::Fail(format!("LDA invariant broken after sweep {s}: {e}"));
        }
        if let Err(e) = corr.check_invariants().and_then(|_| corr.check_supertopic_support()) {
            return Outcome::Fail(format!("CorrLDA2 invariant broken after sweep {s}: {e}"));
        }
    }
    Outcome::Pass("LDA and CorrLDA2 invariants held after each of 200 sweeps".into())
}

// ---------------------------------------------------------------- AC4

/// Projected gradient on the dual of the L2-loss SVM with augmented bias.
fn reference_svm(x: &[Vec<f64>], y: &[f64], c: f64) -> (Vec<f64>, f64) {
    let n = x.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum::<f64>() + 1.0;
                    y[i] * y[j] * k + if i == j { 0.5 / c } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let lipschitz = q.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut alpha = vec![0.0; n];
    for _ in 0..2_000_000 {
        let grad: Vec<f64> = (0..n).map(|i| q[i].iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>() - 1.0).collect();
        let violation = (0..n)
            .map(|i| if alpha[i] > 0.0 { grad[i].abs() } else { (-grad[i]).max(0.0) })
            .fold(0.0, f64::max);
        if violation < 1e-12 {
            break;
        }
        for i in 0..n {
            alpha[i] = (alpha[i] - grad[i] / lipschitz).max(0.0);
        }
    }
    let dim = x[0].len();
    let mut w = vec![0.0; dim];
    let mut w_bias = 0.0;
    for i in 0..n {
        for j in 0..dim {
            w[j] += alpha[i] * y[i] * x[i][j];
        }
        w_bias += alpha[i] * y[i];
    }
    (w, -w_bias)
}

fn ac4() -> Outcome {
    use Viewpoint::{Israeli, Palestinian};
    // (a)
    let m = train(&[vec![0.2], vec![0.8]], &[Palestinian, Israeli], &SvmConfig { c: 1e6, ..Default::default() }).unwrap();
    let (w, b) = (m.weights[0], m.bias);
    let a_ok = (w - 10.0 / 3.0).abs() <= 1e-3 && (b - 5.0 / 3.0).abs() <= 1e-3;

    // (b)
    let mut rng = ChainSeed::new(404, 0).rng();
    let cfg = SvmConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (u, offset) = ([angle.cos(), angle.sin()], rng.random_range(-0.3..0.3));
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        while xs.len() < 20 {
            let p = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let s = u[0] * p[0] + u[1] * p[1] - offset;
            if s.abs() < 0.1 {
                continue;
            }
            let label = if s > 0.0 { Israeli } else { Palestinian };
            if xs.len() >= 18 && ys.iter().all(|&l| l == label) {
                continue;
            }
            xs.push(p);
            ys.push(label);
        }
        let ours = train(&xs, &ys, &cfg).unwrap();
        let signs: Vec<f64> = ys.iter().map(|l| l.sign()).collect();
        let (rw, rb) = reference_svm(&xs, &signs, cfg.c);
        let p_ours = ours.primal_objective(&xs, &ys);
        let p_ref = primal_objective(&rw, rb, cfg.c, &xs, &ys);
        worst = worst.max((p_ours - p_ref).abs() / p_ref.abs());
    }
    let b_ok = worst <= 1e-3;

    // (c)
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..200 {
        let label = if i < 100 { Palestinian } else { Israeli };
        let shift = label.sign();
        xs.push((0..5).map(|_| rng.random_range(-1.0..1.0) + 0.5 * shift).collect::<Vec<f64>>());
        ys.push(label);
    }
    ys.shuffle(&mut rng);
    let cv = cross_validate(&xs, &ys, 5, &cfg, 9, 1).unwrap();
    let c_ok = (0.4..=0.6).contains(&cv.mean_accuracy);

    check(
        a_ok && b_ok && c_ok,
        format!(
            "(a) w={w:.5} b={b:.5} [{}]; (b) worst relative objective gap {worst:.2e} (<= 1e-3) [{}]; (c) shuffled-label CV {:.3} in [0.4, 0.6] [{}]",
            ok(a_ok),
            ok(b_ok),
            cv.mean_accuracy,
            ok(c_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "fail"
    }
}

// ---------------------------------------------------------------- AC5

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Permutation `perm[planted] = learned` minimizing total L1 distance.
fn best_matching(planted: &[Vec<f64>], learned: &[Vec<f64>]) -> Vec<usize> {
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>();
    permutations(planted.len())
        .into_iter()
        .min_by(|p, q| {
            let cost = |perm: &Vec<usize>| (0..planted.len()).map(|i| l1(&planted[i], &learned[perm[i]])).sum::<f64>();
            cost(p).total_cmp(&cost(q))
        })
        .unwrap()
}

fn ac5() -> Outcome {
    let syn = generate(&SyntheticConfig::default()).unwrap();
    let settings = SamplerSettings::new(500);
    let run = run_corrlda2(&syn.corpus, 6, 2, &settings, ChainSeed::new(5, 0)).unwrap();
    let topic_match = best_matching(&syn.phi, &run.state.estimate_phi());
    let aspect_match = best_matching(&syn.phi_tilde, &run.state.estimate_phi_tilde());
    let groups = form_groups(&cooccurrence_frequencies(&run.state), DEFAULT_THRESHOLD).unwrap();
    let recovered = (0..6)
        .filter(|&t| groups.group_of(topic_match[t]) == Some(aspect_match[syn.topic_aspect[t]]))
        .count();
    let meta = syn.corpus.meta();
    let weights = extract_association_weights(&run.state, &meta, &SvmConfig::default()).unwrap();
    let pal_weight = weights.aspect_weights[aspect_match[0]];
    let m = build_feature_matrix(&run.state, &meta, FeatureMode::Combined).unwrap();
    let cv = cross_validate_matrix(&m, 5, &SvmConfig::default(), 5, 1).unwrap();
    let (a_ok, b_ok, c_ok) = (recovered >= 5, pal_weight < 0.0, cv.mean_accuracy >= 0.9);
    check(
        a_ok && b_ok && c_ok,
        format!(
            "(a) {recovered}/6 topics grouped with planted aspect [{}]; (b) planted-Palestinian aspect weight {pal_weight:.3} [{}]; (c) combined CV {:.3} (>= 0.9) [{}]",
            ok(a_ok),
            ok(b_ok),
            cv.mean_accuracy,
            ok(c_ok)
        ),
    )
}

// ---------------------------------------------------------------- AC6

fn ac6() -> Outcome {
    let pal = [-5.36, -3.77, -1.70, -1.58, -0.97, -0.47, -0.28, 0.13, 1.17];
    let isr = [5.84, 2.72, 1.71, 0.54, 0.39, -0.32];
    let neutral = [0.4, -0.2, 0.05, 0.6, -0.9];
    let mut topic_weights = Vec::new();
    topic_weights.extend(pal);
    topic_weights.extend(isr);
    topic_weights.extend(neutral);
    let groups = TopicAspectGroups {
        threshold: DEFAULT_THRESHOLD,
        groups: vec![(0..9).collect(), (9..15).collect()],
        neutral: (15..20).collect(),
    };
    let reports = classify_and_score(&groups, &[-4.01, 4.01], &topic_weights).unwrap();
    let (p, i) = (&reports[0], &reports[1]);
    let good = (p.score - -12.83).abs() <= 1e-9
        && (i.score - 10.88).abs() <= 1e-9
        && p.viewpoint == Viewpoint::Palestinian
        && i.viewpoint == Viewpoint::Israeli;
    check(
        good,
        format!("scores {:.12} ({}) and {:.12} ({})", p.score, p.viewpoint, i.score, i.viewpoint),
    )
}

// ---------------------------------------------------------------- AC7

fn ac7() -> Outcome {
    let Ok(path) = std::env::var("VIEWPOINT_BITTERLEMONS") else {
        return Outcome::Skip("set VIEWPOINT_BITTERLEMONS=<annotated corpus JSONL> to run".into());
    };
    let raw = match load_annotated_corpus(&path) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail(format!("cannot load {path}: {e}")),
    };
    let svm = SvmConfig::default();
    let lda_corpus = build_unimodal(&raw, 1).unwrap();
    let lda_run = run_lda(&lda_corpus, 14, &SamplerSettings::new(DEFAULT_LDA_SWEEPS), ChainSeed::new(1, 14)).unwrap();
    let lda_m = build_feature_matrix(&lda_run.state, &lda_corpus.meta(), FeatureMode::Topics).unwrap();
    let lda_acc = cross_validate_matrix(&lda_m, 5, &svm, 1, 0).unwrap().mean_accuracy;

    let on = apply_partition(&raw, PartitionScheme::OpinionNe, 1).unwrap();
    let corr_settings = SamplerSettings::new(DEFAULT_CORRLDA2_SWEEPS);
    let corr = run_corrlda2(&on, 16, 2, &corr_settings, ChainSeed::new(1, 16)).unwrap();
    let corr_m = build_feature_matrix(&corr.state, &on.meta(), FeatureMode::Combined).unwrap();
    let corr_acc = cross_validate_matrix(&corr_m, 5, &svm, 1, 0).unwrap().mean_accuracy;

    let sweep = |corpus: &BimodalCorpus, scheme| {
        let cfg = SweepSettings {
            topics: (1..=12).map(|k| 5 * k).collect(),
            sampler: corr_settings,
            svm,
            threshold: DEFAULT_THRESHOLD,
            seed: 1,
            replicates: 1,
            jobs: 0,
        };
        consistency_sweep(corpus, scheme, &cfg).unwrap()
    };
    let on_sweep = sweep(&on, PartitionScheme::OpinionNe);
    let ne = apply_partition(&raw, PartitionScheme::Ne, 1).unwrap();
    let ne_sweep = sweep(&ne, PartitionScheme::Ne);
    let good = lda_acc >= 0.85
        && corr_acc >= 0.85
        && on_sweep.overlap_points.is_empty()
        && !ne_sweep.overlap_points.is_empty();
    check(
        good,
        format!(
            "LDA T=14 CV {lda_acc:.3} (>= 0.85); CorrLDA2 T=16 combined CV {corr_acc:.3} (>= 0.85); opinion+ne overlaps {} (want 0); ne overlaps {} (want >= 1)",
            on_sweep.overlap_points.len(),
            ne_sweep.overlap_points.len()
        ),
    )
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("AC1", "exact-posterior oracle, LDA", ac1),
        ("AC2", "exact-posterior oracle, CorrLDA2", ac2),
        ("AC3", "count invariants over 200 sweeps", ac3),
        ("AC4", "SVM correctness", ac4),
        ("AC5", "synthetic end-to-end recovery", ac5),
        ("AC6", "group score arithmetic", ac6),
        ("AC7", "Bitterlemons reproduction (conditional)", ac7),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {id} {name}: {detail} [{secs:.1}s]");
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

