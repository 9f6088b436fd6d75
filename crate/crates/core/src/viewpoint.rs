//! Topics-aspect groups, their viewpoints and scores, and the consistency
//! sweep over topic counts.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{BimodalCorpus, DocMeta, PartitionScheme, Viewpoint, Vocabulary};
use crate::corrlda2::{Cooccurrence, CorrLda2State};
use crate::error::{Error, Result};
use crate::exec::map_jobs;
use crate::experiment::{point_seed, run_corrlda2, SamplerSettings};
use crate::features::{build_feature_matrix, FeatureMode, FractionSource};
use crate::math::top_words;
use crate::svm::{train, SvmConfig};

pub const DEFAULT_THRESHOLD: f64 = 0.7;
pub const TABLE_TOP_WORDS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAspectGroups {
    pub threshold: f64,
    /// Topic ids per aspect, ascending.
    pub groups: Vec<Vec<usize>>,
    pub neutral: Vec<usize>,
}

impl TopicAspectGroups {
    pub fn group_of(&self, topic: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&topic))
    }
}

/// Assign each topic to the aspect it co-occurs with more often than
/// `threshold`; the rest are neutral.
///
/// With thresholds at or below 0.5 a topic may pass for several aspects; it
/// then joins the one with the highest frequency (lowest id on ties).
pub fn form_groups(co: &Cooccurrence, threshold: f64) -> Result<TopicAspectGroups> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Parameter(format!("grouping threshold must be in (0, 1], got {threshold}")));
    }
    if threshold <= 0.5 && co.aspects() == 2 {
        log::warn!("grouping threshold {threshold} <= 0.5: groups may compete for topics");
    }
    let mut groups = vec![Vec::new(); co.aspects()];
    let mut neutral = Vec::new();
    for t in 0..co.topics() {
        let mut best: Option<(usize, f64)> = None;
        if !co.never_supertopic[t] {
            for (a, row) in co.freq.iter().enumerate() {
                if row[t] > threshold && best.is_none_or(|(_, f)| row[t] > f) {
                    best = Some((a, row[t]));
                }
            }
        }
        match best {
            Some((a, _)) => groups[a].push(t),
            None => neutral.push(t),
        }
    }
    Ok(TopicAspectGroups { threshold, groups, neutral })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationWeights {
    pub aspect_weights: Vec<f64>,
    pub aspect_bias: f64,
    pub topic_weights: Vec<f64>,
    pub topic_bias: f64,
}

/// Weights of two SVMs trained on all labeled documents: one on aspect
/// fractions only, one on topic fractions only.
pub fn extract_association_weights<S: FractionSource>(
    source: &S,
    meta: &[DocMeta],
    svm: &SvmConfig,
) -> Result<AssociationWeights> {
    let aspects = build_feature_matrix(source, meta, FeatureMode::Aspects)?;
    let topics = build_feature_matrix(source, meta, FeatureMode::Topics)?;
    let a = train(&aspects.rows, &aspects.labels, svm)?;
    let t = train(&topics.rows, &topics.labels, svm)?;
    Ok(AssociationWeights {
        aspect_weights: a.weights,
        aspect_bias: a.bias,
        topic_weights: t.weights,
        topic_bias: t.bias,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic: usize,
    pub weight: f64,
    pub top_words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub aspect: usize,
    pub viewpoint: Viewpoint,
    pub aspect_weight: f64,
    pub aspect_top_words: Vec<String>,
    pub topic_rows: Vec<TopicRow>,
    /// Sum of the topic weights; the aspect weight is not included.
    pub score: f64,
}

impl GroupReport {
    /// Aligned text table: one aspect row, then one row per topic.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Group of aspect {} ({}), score {:.2}", self.aspect, self.viewpoint, self.score);
        let _ = writeln!(out, "{:<12} {:>8}  top words", "", "weight");
        let _ = writeln!(
            out,
            "{:<12} {:>8.2}  {}",
            format!("aspect {}", self.aspect),
            self.aspect_weight,
            self.aspect_top_words.join(" ")
        );
        for row in &self.topic_rows {
            let _ = writeln!(
                out,
                "{:<12} {:>8.2}  {}",
                format!("topic {}", row.topic),
                row.weight,
                row.top_words.join(" ")
            );
        }
        out
    }
}

/// One report per aspect. Rows of Palestinian groups are sorted by weight
/// ascending, Israeli groups descending.
pub fn classify_and_score(
    groups: &TopicAspectGroups,
    aspect_weights: &[f64],
    topic_weights: &[f64],
) -> Result<Vec<GroupReport>> {
    if aspect_weights.len() != groups.groups.len() {
        return Err(Error::Dimension { expected: groups.groups.len(), got: aspect_weights.len() });
    }
    let mut reports = Vec::with_capacity(groups.groups.len());
    for (aspect, members) in groups.groups.iter().enumerate() {
        let viewpoint = Viewpoint::from_sign(aspect_weights[aspect]);
        let mut rows = Vec::with_capacity(members.len());
        for &t in members {
            let weight = *topic_weights
                .get(t)
                .ok_or(Error::Dimension { expected: t + 1, got: topic_weights.len() })?;
            rows.push(TopicRow { topic: t, weight, top_words: Vec::new() });
        }
        rows.sort_by(|a, b| a.weight.total_cmp(&b.weight).then(a.topic.cmp(&b.topic)));
        if viewpoint == Viewpoint::Israeli {
            rows.sort_by(|a, b| b.weight.total_cmp(&a.weight).then(a.topic.cmp(&b.topic)));
        }
        let score = rows.iter().map(|r| r.weight).sum();
        reports.push(GroupReport {
            aspect,
            viewpoint,
            aspect_weight: aspect_weights[aspect],
            aspect_top_words: Vec::new(),
            topic_rows: rows,
            score,
        });
    }
    Ok(reports)
}

/// Fill in the top words of each aspect and topic row.
pub fn annotate_top_words(
    reports: &mut [GroupReport],
    state: &CorrLda2State,
    topical_vocab: &Vocabulary,
    opinion_vocab: &Vocabulary,
    k: usize,
) {
    let phi = state.estimate_phi();
    let phi_tilde = state.estimate_phi_tilde();
    let words = |dist: &[f64], vocab: &Vocabulary| -> Vec<String> {
        top_words(dist, k)
            .into_iter()
            .filter_map(|(w, _)| vocab.word(w as u32).map(str::to_owned))
            .collect()
    };
    for r in reports {
        r.aspect_top_words = words(&phi_tilde[r.aspect], opinion_vocab);
        for row in &mut r.topic_rows {
            row.top_words = words(&phi[row.topic], topical_vocab);
        }
    }
}

/// Full analysis of a trained chain: groups, weights and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAnalysis {
    pub groups: TopicAspectGroups,
    pub weights: AssociationWeights,
    pub reports: Vec<GroupReport>,
}

pub fn analyze<S: FractionSource>(
    source: &S,
    co: &Cooccurrence,
    meta: &[DocMeta],
    threshold: f64,
    svm: &SvmConfig,
) -> Result<GroupAnalysis> {
    let groups = form_groups(co, threshold)?;
    let weights = extract_association_weights(source, meta, svm)?;
    let reports = classify_and_score(&groups, &weights.aspect_weights, &weights.topic_weights)?;
    Ok(GroupAnalysis { groups, weights, reports })
}

/// Palestinian and Israeli group scores of a two-aspect analysis.
///
/// When both aspect weights have the same sign, the aspect with the lower
/// weight stands in for the Palestinian group and `degenerate` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub palestinian: f64,
    pub israeli: f64,
    pub degenerate: bool,
}

pub fn score_pair(reports: &[GroupReport]) -> Result<ScorePair> {
    if reports.len() != 2 {
        return Err(Error::Parameter(format!("score pairs need 2 aspects, got {}", reports.len())));
    }
    let (lo, hi) = if reports[0].aspect_weight <= reports[1].aspect_weight {
        (&reports[0], &reports[1])
    } else {
        (&reports[1], &reports[0])
    };
    let degenerate = lo.viewpoint == hi.viewpoint;
    if degenerate {
        log::warn!("both aspect weights have the same sign; using the lower one as Palestinian");
    }
    Ok(ScorePair { palestinian: lo.score, israeli: hi.score, degenerate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub topics: Vec<usize>,
    pub sampler: SamplerSettings,
    pub svm: SvmConfig,
    pub threshold: f64,
    pub seed: u64,
    /// Chains per topic count; the reported scores are medians.
    pub replicates: usize,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub topics: usize,
    pub scheme: PartitionScheme,
    pub palestinian_score: f64,
    pub israeli_score: f64,
    pub replicates: Vec<ScorePair>,
    /// Reports of the first replicate.
    pub reports: Vec<GroupReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Minimum Israeli score minus maximum Palestinian score over the grid.
    pub separation: f64,
    /// Topic counts (with scheme) where the Palestinian score is not below
    /// the Israeli one.
    pub overlap_points: Vec<(PartitionScheme, usize)>,
}

impl SweepReport {
    pub fn from_points(points: Vec<SweepPoint>) -> Self {
        let min_isr = points.iter().map(|p| p.israeli_score).fold(f64::INFINITY, f64::min);
        let max_pal = points.iter().map(|p| p.palestinian_score).fold(f64::NEG_INFINITY, f64::max);
        let overlap_points = points
            .iter()
            .filter(|p| p.palestinian_score >= p.israeli_score)
            .map(|p| (p.scheme, p.topics))
            .collect();
        Self { points, separation: min_isr - max_pal, overlap_points }
    }

    /// Merge sweeps of several schemes into one report.
    pub fn merge(reports: Vec<SweepReport>) -> Self {
        Self::from_points(reports.into_iter().flat_map(|r| r.points).collect())
    }

    /// CSV with header `T,scheme,pal_score,isr_score`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["T", "scheme", "pal_score", "isr_score"])?;
        for p in &self.points {
            w.write_record([
                p.topics.to_string(),
                p.scheme.to_string(),
                p.palestinian_score.to_string(),
                p.israeli_score.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Train one two-aspect chain per (topic count, replicate), form groups and
/// score them.
pub fn consistency_sweep(
    corpus: &BimodalCorpus,
    scheme: PartitionScheme,
    cfg: &SweepSettings,
) -> Result<SweepReport> {
    if cfg.topics.is_empty() {
        return Err(Error::Parameter("sweep needs at least one topic count".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::Parameter("sweep needs at least one replicate".into()));
    }
    let meta = corpus.meta();
    let jobs: Vec<(usize, usize)> = cfg
        .topics
        .iter()
        .flat_map(|&t| (0..cfg.replicates).map(move |r| (t, r)))
        .collect();
    let results = map_jobs(&jobs, cfg.jobs, |&(t, r)| -> Result<(ScorePair, Vec<GroupReport>)> {
        let run = run_corrlda2(corpus, t, 2, &cfg.sampler, point_seed(cfg.seed, t, r))?;
        let co = run
            .tail
            .cooccurrence()
            .ok_or_else(|| Error::Model("no co-occurrence counts recorded".into()))?;
        let mut analysis = analyze(&run.tail, &co, &meta, cfg.threshold, &cfg.svm)?;
        annotate_top_words(
            &mut analysis.reports,
            &run.state,
            &corpus.topical_vocab,
            &corpus.opinion_vocab,
            TABLE_TOP_WORDS,
        );
        Ok((score_pair(&analysis.reports)?, analysis.reports))
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let points = results
        .chunks(cfg.replicates)
        .zip(&cfg.topics)
        .map(|(chunk, &t)| {
            let pairs: Vec<ScorePair> = chunk.iter().map(|(p, _)| *p).collect();
            let mut pal: Vec<f64> = pairs.iter().map(|p| p.palestinian).collect();
            let mut isr: Vec<f64> = pairs.iter().map(|p| p.israeli).collect();
            SweepPoint {
                topics: t,
                scheme,
                palestinian_score: median(&mut pal),
                israeli_score: median(&mut isr),
                replicates: pairs,
                reports: chunk[0].1.clone(),
            }
        })
        .collect();
    Ok(SweepReport::from_points(points))
}
