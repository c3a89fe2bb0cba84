//! Link prediction and triple classification.
//!
//! Ranks count only candidates scoring strictly above the true triple, so
//! ties never hurt it. Filtered ranks additionally skip candidates that are
//! known triples of any split.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::ModelError;
use crate::model::{sq_dist, ModelParams};
use crate::store::{LabeledTriple, RelationCategory, Triple, TripleStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Slot {
    Head,
    Tail,
}

impl Slot {
    pub fn label(self) -> &'static str {
        match self {
            Slot::Head => "head",
            Slot::Tail => "tail",
        }
    }

    fn replace(self, triple: &Triple, entity: usize) -> Triple {
        match self {
            Slot::Head => Triple::new(entity, triple.relation, triple.tail),
            Slot::Tail => Triple::new(triple.head, triple.relation, entity),
        }
    }

    fn entity(self, triple: &Triple) -> usize {
        match self {
            Slot::Head => triple.head,
            Slot::Tail => triple.tail,
        }
    }
}

pub fn check_compatible(model: &ModelParams, store: &TripleStore) -> Result<(), ModelError> {
    if model.num_entities() != store.num_entities() || model.num_relations() != store.num_relations()
    {
        return Err(ModelError::VocabMismatch {
            model_entities: model.num_entities(),
            model_relations: model.num_relations(),
            store_entities: store.num_entities(),
            store_relations: store.num_relations(),
        });
    }
    Ok(())
}

/// Log-scores of every substitution of `slot`, indexed by entity id.
pub fn candidate_log_scores(model: &ModelParams, triple: &Triple, slot: Slot) -> Vec<f64> {
    let mix = model.mixture(triple.relation);
    let vs = model.variance_sum;
    let log_w: Vec<f64> = mix.weights().iter().map(|w| w.ln()).collect();
    // Query point per component: h + u_m for tails, t - u_m for heads, so the
    // distance to a candidate is |anchor_m - u_e|^2 either way.
    let anchors: Vec<Vec<f64>> = (0..mix.len())
        .map(|m| {
            let u = mix.vector(m);
            match slot {
                Slot::Tail => model.entity(triple.head).iter().zip(u).map(|(h, r)| h + r).collect(),
                Slot::Head => model.entity(triple.tail).iter().zip(u).map(|(t, r)| t - r).collect(),
            }
        })
        .collect();
    let mut terms = vec![0.0; mix.len()];
    (0..model.num_entities())
        .map(|e| {
            let u_e = model.entity(e);
            for (m, anchor) in anchors.iter().enumerate() {
                terms[m] = log_w[m] - sq_dist(anchor, u_e) / vs;
            }
            crate::model::log_sum_exp(&terms)
        })
        .collect()
}

/// Raw and filtered rank of one query from precomputed candidate scores.
fn ranks_from_scores(
    scores: &[f64],
    triple: &Triple,
    slot: Slot,
    store: &TripleStore,
) -> (usize, usize) {
    let truth = slot.entity(triple);
    let target = scores[truth];
    let (mut raw, mut filtered) = (1, 1);
    for (e, &s) in scores.iter().enumerate() {
        if e == truth || s <= target {
            continue;
        }
        raw += 1;
        if !store.is_known(&slot.replace(triple, e)) {
            filtered += 1;
        }
    }
    (raw, filtered)
}

/// Rank (>= 1) of the true entity among all substitutions of `slot`.
pub fn rank_triple(
    model: &ModelParams,
    triple: &Triple,
    slot: Slot,
    filtered: bool,
    store: &TripleStore,
) -> Result<usize, ModelError> {
    check_compatible(model, store)?;
    model.check(triple)?;
    let scores = candidate_log_scores(model, triple, slot);
    let (raw, filt) = ranks_from_scores(&scores, triple, slot, store);
    Ok(if filtered { filt } else { raw })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryRank {
    pub triple: Triple,
    pub slot: Slot,
    pub raw: usize,
    pub filtered: usize,
}

/// Mean rank and HITS@10 over a set of queries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RankSummary {
    pub queries: usize,
    pub mean_rank_raw: f64,
    pub mean_rank_filtered: f64,
    pub hits10_raw: f64,
    pub hits10_filtered: f64,
}

impl RankSummary {
    pub fn from_queries<'a, I: IntoIterator<Item = &'a QueryRank>>(queries: I) -> Self {
        let mut s = RankSummary::default();
        let (mut raw_sum, mut filt_sum, mut raw_hits, mut filt_hits) = (0.0, 0.0, 0usize, 0usize);
        for q in queries {
            s.queries += 1;
            raw_sum += q.raw as f64;
            filt_sum += q.filtered as f64;
            raw_hits += usize::from(q.raw <= 10);
            filt_hits += usize::from(q.filtered <= 10);
        }
        if s.queries > 0 {
            let n = s.queries as f64;
            s.mean_rank_raw = raw_sum / n;
            s.mean_rank_filtered = filt_sum / n;
            s.hits10_raw = 100.0 * raw_hits as f64 / n;
            s.hits10_filtered = 100.0 * filt_hits as f64 / n;
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryCell {
    pub category: RelationCategory,
    pub slot: Slot,
    pub queries: usize,
    pub hits10_filtered: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationBreakdown {
    pub relation: usize,
    pub name: String,
    pub category: RelationCategory,
    pub summary: RankSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub overall: RankSummary,
    /// Eight cells: category-major, head before tail.
    pub categories: Vec<CategoryCell>,
    pub relations: Vec<RelationBreakdown>,
    /// Every query in test order, head slot before tail slot.
    pub queries: Vec<QueryRank>,
}

impl EvalReport {
    pub fn from_queries(queries: Vec<QueryRank>, store: &TripleStore) -> Self {
        let overall = RankSummary::from_queries(&queries);
        let mut categories = Vec::new();
        for cat in RelationCategory::ALL {
            for slot in [Slot::Head, Slot::Tail] {
                let cell: Vec<&QueryRank> = queries
                    .iter()
                    .filter(|q| q.slot == slot && store.relation_category(q.triple.relation) == cat)
                    .collect();
                let s = RankSummary::from_queries(cell.iter().copied());
                categories.push(CategoryCell {
                    category: cat,
                    slot,
                    queries: s.queries,
                    hits10_filtered: s.hits10_filtered,
                });
            }
        }
        let mut by_rel: BTreeMap<usize, Vec<&QueryRank>> = BTreeMap::new();
        for q in &queries {
            by_rel.entry(q.triple.relation).or_default().push(q);
        }
        let relations = by_rel
            .into_iter()
            .map(|(r, qs)| RelationBreakdown {
                relation: r,
                name: store.relations.name(r).unwrap_or("?").to_owned(),
                category: store.relation_category(r),
                summary: RankSummary::from_queries(qs),
            })
            .collect();
        EvalReport {
            overall,
            categories,
            relations,
            queries,
        }
    }

    /// Percentage of queries (optionally restricted to one relation) ranked
    /// within `k`.
    pub fn hits_at(&self, k: usize, filtered: bool, relation: Option<usize>) -> f64 {
        let selected: Vec<&QueryRank> = self
            .queries
            .iter()
            .filter(|q| relation.is_none_or(|r| q.triple.relation == r))
            .collect();
        if selected.is_empty() {
            return 0.0;
        }
        let hits = selected
            .iter()
            .filter(|q| (if filtered { q.filtered } else { q.raw }) <= k)
            .count();
        100.0 * hits as f64 / selected.len() as f64
    }

    /// Aligned text table: overall metrics then the category breakdown.
    pub fn render_table(&self) -> String {
        let o = &self.overall;
        let mut s = String::new();
        let _ = writeln!(s, "{:<12}{:>12}{:>12}{:>12}{:>12}", "", "MR raw", "MR filter", "H@10 raw", "H@10 filter");
        let _ = writeln!(
            s,
            "{:<12}{:>12.1}{:>12.1}{:>12.1}{:>12.1}",
            "overall", o.mean_rank_raw, o.mean_rank_filtered, o.hits10_raw, o.hits10_filtered
        );
        let _ = writeln!(s);
        let _ = write!(s, "{:<12}", "H@10 filter");
        for cat in RelationCategory::ALL {
            let _ = write!(s, "{:>8}", cat.label());
        }
        let _ = writeln!(s);
        for slot in [Slot::Head, Slot::Tail] {
            let _ = write!(s, "{:<12}", format!("predict {}", slot.label()));
            for cat in RelationCategory::ALL {
                let cell = self
                    .categories
                    .iter()
                    .find(|c| c.category == cat && c.slot == slot)
                    .expect("all cells present");
                if cell.queries == 0 {
                    let _ = write!(s, "{:>8}", "-");
                } else {
                    let _ = write!(s, "{:>8.1}", cell.hits10_filtered);
                }
            }
            let _ = writeln!(s);
        }
        s
    }

    /// Comma-separated rows: `scope,key,slot,queries,mr_raw,mr_filtered,hits10_raw,hits10_filtered`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scope,key,slot,queries,mr_raw,mr_filtered,hits10_raw,hits10_filtered\n");
        let row = |s: &mut String, scope: &str, key: &str, slot: &str, r: &RankSummary| {
            let _ = writeln!(
                s,
                "{scope},{key},{slot},{},{},{},{},{}",
                r.queries, r.mean_rank_raw, r.mean_rank_filtered, r.hits10_raw, r.hits10_filtered
            );
        };
        row(&mut s, "overall", "all", "both", &self.overall);
        for cat in RelationCategory::ALL {
            for slot in [Slot::Head, Slot::Tail] {
                let qs = self.queries.iter().filter(|q| q.slot == slot && self.category_of(q) == Some(cat));
                row(&mut s, "category", cat.label(), slot.label(), &RankSummary::from_queries(qs));
            }
        }
        for r in &self.relations {
            row(&mut s, "relation", &csv_field(&r.name), "both", &r.summary);
        }
        s
    }

    fn category_of(&self, q: &QueryRank) -> Option<RelationCategory> {
        self.relations
            .iter()
            .find(|r| r.relation == q.triple.relation)
            .map(|r| r.category)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_table())
    }
}

/// Ranks both slots of every test triple on `threads` workers (0 = rayon
/// default). Output order does not depend on the worker count.
pub fn link_prediction_eval(
    model: &ModelParams,
    store: &TripleStore,
    threads: usize,
) -> Result<EvalReport, ModelError> {
    check_compatible(model, store)?;
    for t in &store.test {
        model.check(t)?;
    }
    let run = || {
        store
            .test
            .par_iter()
            .flat_map_iter(|t| {
                [Slot::Head, Slot::Tail].map(|slot| {
                    let scores = candidate_log_scores(model, t, slot);
                    let (raw, filtered) = ranks_from_scores(&scores, t, slot, store);
                    QueryRank {
                        triple: *t,
                        slot,
                        raw,
                        filtered,
                    }
                })
            })
            .collect::<Vec<_>>()
    };
    let queries = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    Ok(EvalReport::from_queries(queries, store))
}

/// Per-relation energy thresholds: predict positive iff `energy < threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationThresholds {
    pub per_relation: BTreeMap<usize, f64>,
    /// Used for relations without validation triples.
    pub fallback: f64,
}

impl ClassificationThresholds {
    pub fn threshold(&self, relation: usize) -> f64 {
        self.per_relation.get(&relation).copied().unwrap_or(self.fallback)
    }
}

/// Threshold maximizing accuracy over `(energy, label)` pairs. Candidates
/// are -inf, midpoints of consecutive distinct energies, and +inf; the
/// lowest best candidate wins. Returns `(threshold, accuracy in [0, 1])`.
pub fn best_threshold(samples: &[(f64, bool)]) -> (f64, f64) {
    if samples.is_empty() {
        return (f64::INFINITY, 1.0);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let total_neg = sorted.iter().filter(|s| !s.1).count();
    // Threshold below everything: all predicted negative.
    let mut correct = total_neg;
    let mut best = (f64::NEG_INFINITY, correct);
    let mut i = 0;
    while i < n {
        // Move the whole run of equal energies below the threshold.
        let e = sorted[i].0;
        while i < n && sorted[i].0 == e {
            if sorted[i].1 {
                correct += 1;
            } else {
                correct -= 1;
            }
            i += 1;
        }
        let threshold = if i < n {
            0.5 * (e + sorted[i].0)
        } else {
            f64::INFINITY
        };
        if correct > best.1 {
            best = (threshold, correct);
        }
    }
    (best.0, best.1 as f64 / n as f64)
}

pub fn energies(
    model: &ModelParams,
    triples: &[LabeledTriple],
) -> Result<Vec<(usize, f64, bool)>, ModelError> {
    triples
        .iter()
        .map(|l| Ok((l.triple.relation, model.energy(&l.triple)?, l.label)))
        .collect()
}

pub fn tune_thresholds(
    model: &ModelParams,
    valid: &[LabeledTriple],
) -> Result<ClassificationThresholds, ModelError> {
    let scored = energies(model, valid)?;
    let mut groups: BTreeMap<usize, Vec<(f64, bool)>> = BTreeMap::new();
    for &(r, e, label) in &scored {
        groups.entry(r).or_default().push((e, label));
    }
    let per_relation = groups
        .into_iter()
        .map(|(r, samples)| (r, best_threshold(&samples).0))
        .collect();
    let pooled: Vec<(f64, bool)> = scored.iter().map(|&(_, e, l)| (e, l)).collect();
    Ok(ClassificationThresholds {
        per_relation,
        fallback: best_threshold(&pooled).0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationAccuracy {
    pub relation: usize,
    pub name: String,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    /// Percent.
    pub accuracy: f64,
    pub total: usize,
    pub relations: Vec<RelationAccuracy>,
}

impl ClassificationReport {
    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<40}{:>10}{:>12}", "relation", "triples", "accuracy");
        for r in &self.relations {
            let _ = writeln!(s, "{:<40}{:>10}{:>12.1}", r.name, r.total, r.accuracy);
        }
        let _ = writeln!(s, "{:<40}{:>10}{:>12.1}", "overall", self.total, self.accuracy);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("relation,triples,accuracy\n");
        for r in &self.relations {
            let _ = writeln!(s, "{},{},{}", csv_field(&r.name), r.total, r.accuracy);
        }
        let _ = writeln!(s, "overall,{},{}", self.total, self.accuracy);
        s
    }
}

/// Accuracy of the threshold rule on labeled triples (percentages).
pub fn classify(
    model: &ModelParams,
    thresholds: &ClassificationThresholds,
    test: &[LabeledTriple],
    relation_names: &crate::store::Vocab,
) -> Result<ClassificationReport, ModelError> {
    let mut per: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut correct_total = 0;
    for (r, e, label) in energies(model, test)? {
        let predicted = e < thresholds.threshold(r);
        let ok = predicted == label;
        let slot = per.entry(r).or_default();
        slot.0 += usize::from(ok);
        slot.1 += 1;
        correct_total += usize::from(ok);
    }
    let pct = |c: usize, n: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
    Ok(ClassificationReport {
        accuracy: pct(correct_total, test.len()),
        total: test.len(),
        relations: per
            .into_iter()
            .map(|(r, (c, n))| RelationAccuracy {
                relation: r,
                name: relation_names.name(r).unwrap_or("?").to_owned(),
                total: n,
                accuracy: pct(c, n),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelationMixture;
    use crate::store::Vocab;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_model(pos: &[f64], rel: f64) -> ModelParams {
        ModelParams::from_parts(1, 2.0, pos.to_vec(), vec![RelationMixture::single(vec![rel])])
    }

    fn store(n: usize, train: Vec<Triple>, test: Vec<Triple>) -> TripleStore {
        TripleStore::from_triples(
            Vocab::from_names((0..n).map(|i| format!("e{i}"))).unwrap(),
            Vocab::from_names(["r"]).unwrap(),
            train,
            vec![],
            test,
        )
        .unwrap()
    }

    #[test]
    fn best_tail_ranks_first() {
        // h at 0 with r = 1: entity 1 at 1.0 is exact.
        let m = line_model(&[0.0, 1.0, 3.0], 1.0);
        let s = store(3, vec![Triple::new(0, 0, 1)], vec![]);
        assert_eq!(rank_triple(&m, &Triple::new(0, 0, 1), Slot::Tail, false, &s).unwrap(), 1);
    }

    #[test]
    fn worst_tail_ranks_last() {
        let m = line_model(&[0.0, 1.0, 1.5, 2.0, 9.0], 1.0);
        let s = store(5, vec![Triple::new(0, 0, 1)], vec![]);
        // Entity 4 is farthest from h + r; head entity 0 sits at distance 1.
        assert_eq!(rank_triple(&m, &Triple::new(0, 0, 4), Slot::Tail, false, &s).unwrap(), 5);
    }

    #[test]
    fn filtered_rank_skips_known_competitors() {
        // Candidate distances from h + r = 1: e1 0, e2 0.25, e0 1, e3 1.2, e4 2.5.
        // True tail e3; competitors e1, e2 (known), e0 (unknown) are closer.
        let m = line_model(&[0.0, 1.0, 1.25, 2.2, 3.5], 1.0);
        let s = store(
            5,
            vec![Triple::new(0, 0, 1), Triple::new(0, 0, 2)],
            vec![Triple::new(0, 0, 3)],
        );
        let t = Triple::new(0, 0, 3);
        let raw = rank_triple(&m, &t, Slot::Tail, false, &s).unwrap();
        let filt = rank_triple(&m, &t, Slot::Tail, true, &s).unwrap();
        // Brute force: sort all candidates by score and locate.
        let mut order: Vec<(usize, f64)> = (0..5)
            .map(|e| (e, m.log_score(&Triple::new(0, 0, e)).unwrap()))
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1));
        let brute_raw = order.iter().position(|(e, _)| *e == 3).unwrap() + 1;
        assert_eq!(raw, brute_raw);
        assert_eq!(raw, 4);
        assert_eq!(filt, 2);
    }

    #[test]
    fn ties_do_not_hurt() {
        let m = line_model(&[0.0, 1.0, 1.0, 1.0], 1.0);
        let s = store(4, vec![Triple::new(0, 0, 1)], vec![]);
        assert_eq!(rank_triple(&m, &Triple::new(0, 0, 2), Slot::Tail, false, &s).unwrap(), 1);
    }

    #[test]
    fn vocab_mismatch_is_an_error() {
        let m = line_model(&[0.0, 1.0], 1.0);
        let s = store(3, vec![Triple::new(0, 0, 1)], vec![]);
        assert!(matches!(
            rank_triple(&m, &Triple::new(0, 0, 1), Slot::Tail, false, &s),
            Err(ModelError::VocabMismatch { .. })
        ));
    }

    #[test]
    fn perfect_model_report() {
        // Entities far apart; each test pair is an exact translation.
        let pos: Vec<f64> = (0..8).map(|i| (i * i) as f64 * 10.0).collect();
        let test: Vec<Triple> = (0..7).map(|i| Triple::new(i, 0, i + 1)).collect();
        let mut s_model = Vec::new();
        for t in &test {
            s_model.push(pos[t.tail] - pos[t.head]);
        }
        // One relation per test pair so every pair can be exact.
        let mixtures = s_model.iter().map(|d| RelationMixture::single(vec![*d])).collect();
        let m = ModelParams::from_parts(1, 2.0, pos, mixtures);
        let test: Vec<Triple> = test.iter().enumerate().map(|(r, t)| Triple::new(t.head, r, t.tail)).collect();
        let s = TripleStore::from_triples(
            Vocab::from_names((0..8).map(|i| format!("e{i}"))).unwrap(),
            Vocab::from_names((0..7).map(|i| format!("r{i}"))).unwrap(),
            test.clone(),
            vec![],
            test,
        )
        .unwrap();
        let report = link_prediction_eval(&m, &s, 2).unwrap();
        assert_eq!(report.overall.mean_rank_raw, 1.0);
        assert_eq!(report.overall.hits10_filtered, 100.0);
        for c in report.categories.iter().filter(|c| c.queries > 0) {
            assert_eq!(c.hits10_filtered, 100.0);
        }
        assert!(report.render_table().contains("overall"));
        assert!(report.to_csv().lines().count() > 9);
    }

    #[test]
    fn separable_thresholds() {
        let samples = [(1.0, true), (2.0, true), (5.0, false), (6.0, false)];
        assert_eq!(best_threshold(&samples), (3.5, 1.0));
    }

    #[test]
    fn all_positive_accepts_everything() {
        assert_eq!(best_threshold(&[(1.0, true), (2.0, true)]), (f64::INFINITY, 1.0));
    }

    #[test]
    fn interleaved_thresholds() {
        let (th, acc) = best_threshold(&[(1.0, true), (4.0, true), (2.0, false), (6.0, false)]);
        assert_eq!(acc, 0.75);
        assert!(th > 1.0 && th < 2.0, "{th}");
    }

    fn accuracy_at(samples: &[(f64, bool)], th: f64) -> f64 {
        samples.iter().filter(|(e, l)| (*e < th) == *l).count() as f64 / samples.len() as f64
    }

    #[test]
    fn tuned_threshold_beats_random_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let samples: Vec<(f64, bool)> = (0..rng.gen_range(1..60))
                .map(|_| {
                    let label = rng.gen_bool(0.5);
                    let e = rng.gen_range(0.0f64..5.0) + if label { 0.0 } else { 1.5 };
                    ((e * 4.0).round() / 4.0, label)
                })
                .collect();
            let (th, acc) = best_threshold(&samples);
            assert!((accuracy_at(&samples, th) - acc).abs() < 1e-12);
            for _ in 0..1000 {
                let probe = rng.gen_range(-1.0..8.0);
                assert!(accuracy_at(&samples, probe) <= acc + 1e-12);
            }
        }
    }

    #[test]
    fn classify_with_fallback() {
        // Relation 0 tuned, relation 1 unseen in validation.
        let m = ModelParams::from_parts(
            1,
            2.0,
            vec![0.0, 1.0, 3.0],
            vec![RelationMixture::single(vec![1.0]), RelationMixture::single(vec![1.0])],
        );
        let valid = vec![
            LabeledTriple { triple: Triple::new(0, 0, 1), label: true },
            LabeledTriple { triple: Triple::new(0, 0, 2), label: false },
        ];
        let th = tune_thresholds(&m, &valid).unwrap();
        assert_eq!(th.per_relation.len(), 1);
        assert_eq!(th.threshold(1), th.fallback);
        let names = Vocab::from_names(["a", "b"]).unwrap();
        let report = classify(&m, &th, &valid, &names).unwrap();
        assert_eq!(report.accuracy, 100.0);
        let test = vec![LabeledTriple { triple: Triple::new(0, 1, 1), label: true }];
        assert_eq!(classify(&m, &th, &test, &names).unwrap().accuracy, 100.0);
    }
}
