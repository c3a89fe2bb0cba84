//! SGD on the likelihood-ratio objective with CRP component spawning.
//!
//! For a positive triple and one corrupted partner the per-pair loss is
//!
//! ```text
//! -ln score(pos) + ln score(neg)
//!     + C * (sum of |u_{r,m}|^2 over the involved relations
//!            + |u_h|^2 + |u_t|^2 + |u_h'|^2 + |u_t'|^2)
//! ```
//!
//! and parameters only move when `ln score(pos) - ln score(neg) <= ln M_r + gamma`.
//! Gradients through the mixture are weighted by component responsibilities;
//! mixing weights are updated on their logits so they always stay a
//! distribution.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkpoint;
use crate::error::TrainError;
use crate::model::{softmax, ModelParams, SpawnRule};
use crate::store::{Sampling, Triple, TripleStore, Vocab};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dim: usize,
    /// Gate slack gamma.
    pub margin: f64,
    /// CRP concentration beta; 0 disables spawning.
    pub crp_beta: f64,
    /// Regularization scale C.
    pub reg_c: f64,
    pub epochs: usize,
    pub sampling: Sampling,
    pub variance_sum: f64,
    pub m_max: usize,
    pub weight_floor: f64,
    pub seed: u64,
    /// Pairs between progress callbacks.
    pub batch_size: usize,
    /// Spawning runs on epochs 0, spawn_every, 2 * spawn_every, ...
    pub spawn_every: usize,
    /// Experimental: learn `variance_sum` by SGD on its logarithm.
    pub learn_variance: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            dim: 100,
            margin: 2.5,
            crp_beta: 0.05,
            reg_c: 1e-4,
            epochs: 2000,
            sampling: Sampling::Bern,
            variance_sum: 2.0,
            m_max: 20,
            weight_floor: 1e-6,
            seed: 0,
            batch_size: 1000,
            spawn_every: 1,
            learn_variance: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let fail = |m: &str| Err(TrainError::Config(m.to_owned()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning rate must be positive");
        }
        if self.dim == 0 {
            return fail("dim must be at least 1");
        }
        if !self.margin.is_finite() {
            return fail("margin must be finite");
        }
        if !(self.crp_beta >= 0.0 && self.crp_beta.is_finite()) {
            return fail("crp beta must be non-negative");
        }
        if !(self.reg_c >= 0.0 && self.reg_c.is_finite()) {
            return fail("regularization must be non-negative");
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1");
        }
        if !(self.variance_sum > 0.0 && self.variance_sum.is_finite()) {
            return fail("variance sum must be positive");
        }
        if self.m_max == 0 {
            return fail("m_max must be at least 1");
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor * (self.m_max as f64) < 1.0) {
            return fail("weight floor must be in [0, 1 / m_max)");
        }
        if self.batch_size == 0 || self.spawn_every == 0 {
            return fail("batch size and spawn interval must be at least 1");
        }
        Ok(())
    }

    pub fn spawn_rule(&self) -> SpawnRule {
        SpawnRule {
            beta: self.crp_beta,
            max_components: self.m_max,
            weight_floor: self.weight_floor,
        }
    }
}

fn regularizer(model: &ModelParams, pos: &Triple, neg: &Triple) -> f64 {
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let mut total: f64 = [pos.head, pos.tail, neg.head, neg.tail]
        .iter()
        .map(|&e| norm2(model.entity(e)))
        .sum();
    total += norm2(model.mixture(pos.relation).vectors());
    if neg.relation != pos.relation {
        total += norm2(model.mixture(neg.relation).vectors());
    }
    total
}

/// Per-pair objective term.
pub fn pair_loss(model: &ModelParams, pos: &Triple, neg: &Triple, config: &TrainConfig) -> f64 {
    -model.log_score_unchecked(pos)
        + model.log_score_unchecked(neg)
        + config.reg_c * regularizer(model, pos, neg)
}

fn gate_from_logs(log_pos: f64, log_neg: f64, components: usize, margin: f64) -> bool {
    log_pos - log_neg <= (components as f64).ln() + margin
}

/// True iff `score(pos) / score(neg) <= M_r * exp(gamma)`, evaluated in log space.
pub fn update_gate(model: &ModelParams, pos: &Triple, neg: &Triple, config: &TrainConfig) -> bool {
    gate_from_logs(
        model.log_score_unchecked(pos),
        model.log_score_unchecked(neg),
        model.mixture(pos.relation).len(),
        config.margin,
    )
}

/// Sparse gradient of [`pair_loss`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairGradient {
    /// Entity id and gradient, one entry per distinct entity.
    pub entities: Vec<(usize, Vec<f64>)>,
    /// Relation id and the flattened `M_r x dim` component gradient.
    pub components: Vec<(usize, Vec<f64>)>,
    /// Relation id and gradient with respect to the mixing logits.
    pub logits: Vec<(usize, Vec<f64>)>,
    /// Gradient with respect to `ln variance_sum`.
    pub log_variance: f64,
}

impl PairGradient {
    fn entity(&mut self, e: usize, dim: usize) -> &mut Vec<f64> {
        let i = match self.entities.iter().position(|(id, _)| *id == e) {
            Some(i) => i,
            None => {
                self.entities.push((e, vec![0.0; dim]));
                self.entities.len() - 1
            }
        };
        &mut self.entities[i].1
    }

    fn relation(
        slots: &mut Vec<(usize, Vec<f64>)>,
        r: usize,
        len: usize,
    ) -> &mut Vec<f64> {
        let i = match slots.iter().position(|(id, _)| *id == r) {
            Some(i) => i,
            None => {
                slots.push((r, vec![0.0; len]));
                slots.len() - 1
            }
        };
        &mut slots[i].1
    }

    /// Adds `sign * d(-ln score(triple))`.
    fn add_neg_log_score(&mut self, model: &ModelParams, triple: &Triple, sign: f64) {
        let k = model.dim();
        let vs = model.variance_sum;
        let mix = model.mixture(triple.relation);
        let mut terms = Vec::with_capacity(mix.len());
        model.component_log_terms_into(triple, &mut terms);
        let rho = softmax(&terms);

        let h = model.entity(triple.head).to_vec();
        let t = model.entity(triple.tail).to_vec();
        let mut head_grad = vec![0.0; k];
        let mut comp_grad = vec![0.0; mix.len() * k];
        let mut var_grad = 0.0;
        for m in 0..mix.len() {
            let u = mix.vector(m);
            let mut d2 = 0.0;
            for i in 0..k {
                let e = h[i] + u[i] - t[i];
                d2 += e * e;
                let g = sign * rho[m] * 2.0 * e / vs;
                head_grad[i] += g;
                comp_grad[m * k + i] = g;
            }
            var_grad -= sign * rho[m] * d2 / vs;
        }
        let logit_grad: Vec<f64> = (0..mix.len())
            .map(|m| sign * (mix.weight(m) - rho[m]))
            .collect();

        for (a, g) in self.entity(triple.head, k).iter_mut().zip(&head_grad) {
            *a += g;
        }
        for (a, g) in self.entity(triple.tail, k).iter_mut().zip(&head_grad) {
            *a -= g;
        }
        let comps = Self::relation(&mut self.components, triple.relation, mix.len() * k);
        for (a, g) in comps.iter_mut().zip(&comp_grad) {
            *a += g;
        }
        let logits = Self::relation(&mut self.logits, triple.relation, mix.len());
        for (a, g) in logits.iter_mut().zip(&logit_grad) {
            *a += g;
        }
        self.log_variance += var_grad;
    }

    fn add_regularizer(&mut self, model: &ModelParams, pos: &Triple, neg: &Triple, c: f64) {
        if c == 0.0 {
            return;
        }
        let k = model.dim();
        for e in [pos.head, pos.tail, neg.head, neg.tail] {
            let src = model.entity(e).to_vec();
            for (a, x) in self.entity(e, k).iter_mut().zip(src) {
                *a += 2.0 * c * x;
            }
        }
        let mut rels = vec![pos.relation];
        if neg.relation != pos.relation {
            rels.push(neg.relation);
        }
        for r in rels {
            let src = model.mixture(r).vectors();
            let comps = Self::relation(&mut self.components, r, src.len());
            for (a, x) in comps.iter_mut().zip(src) {
                *a += 2.0 * c * x;
            }
        }
    }
}

/// Analytic gradient of [`pair_loss`] with respect to every touched parameter.
pub fn pair_gradient(
    model: &ModelParams,
    pos: &Triple,
    neg: &Triple,
    config: &TrainConfig,
) -> PairGradient {
    let mut grad = PairGradient::default();
    grad.add_neg_log_score(model, pos, 1.0);
    grad.add_neg_log_score(model, neg, -1.0);
    grad.add_regularizer(model, pos, neg, config.reg_c);
    grad
}

/// Applies `-learning_rate * grad` to the model.
pub fn apply_gradient(model: &mut ModelParams, grad: &PairGradient, config: &TrainConfig) {
    let lr = config.learning_rate;
    for (e, g) in &grad.entities {
        for (x, d) in model.entity_mut(*e).iter_mut().zip(g) {
            *x -= lr * d;
        }
    }
    for (r, g) in &grad.components {
        let mix = model.mixture_mut(*r);
        let k = mix.dim();
        for m in 0..mix.len() {
            for (x, d) in mix.vector_mut(m).iter_mut().zip(&g[m * k..(m + 1) * k]) {
                *x -= lr * d;
            }
        }
    }
    for (r, g) in &grad.logits {
        model
            .mixture_mut(*r)
            .step_logits(lr, g, config.weight_floor);
    }
    if config.learn_variance {
        model.variance_sum = (model.variance_sum.ln() - lr * grad.log_variance).exp();
    }
}

/// One gated SGD step. Returns whether parameters changed.
pub fn sgd_step(model: &mut ModelParams, pos: &Triple, neg: &Triple, config: &TrainConfig) -> bool {
    if !update_gate(model, pos, neg, config) {
        return false;
    }
    let grad = pair_gradient(model, pos, neg, config);
    apply_gradient(model, &grad, config);
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub updates: usize,
    pub skipped: usize,
    pub spawns: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    /// Final component count per relation.
    pub census: Vec<usize>,
}

impl TrainReport {
    /// Equality ignoring wall-clock timings.
    pub fn same_outcome(&self, other: &TrainReport) -> bool {
        self.census == other.census
            && self.epochs.len() == other.epochs.len()
            && self.epochs.iter().zip(&other.epochs).all(|(a, b)| {
                a.epoch == b.epoch
                    && a.mean_loss.to_bits() == b.mean_loss.to_bits()
                    && a.updates == b.updates
                    && a.skipped == b.skipped
                    && a.spawns == b.spawns
            })
    }
}

/// Hooks invoked by [`train`].
pub trait TrainObserver {
    fn on_epoch(&mut self, _stats: &EpochStats, _model: &ModelParams) -> Result<(), TrainError> {
        Ok(())
    }

    fn on_progress(&mut self, _epoch: usize, _pairs_done: usize) {}
}

impl TrainObserver for () {}

/// Writes a checkpoint (with manifest) every `every` epochs and after the
/// final epoch.
pub struct CheckpointEvery {
    pub every: usize,
    pub total_epochs: usize,
    pub path: PathBuf,
    pub entities: Vocab,
    pub relations: Vocab,
    pub config: Vec<(String, String)>,
}

impl TrainObserver for CheckpointEvery {
    fn on_epoch(&mut self, stats: &EpochStats, model: &ModelParams) -> Result<(), TrainError> {
        let periodic = self.every > 0 && stats.epoch.is_multiple_of(self.every);
        if periodic || stats.epoch == self.total_epochs {
            checkpoint::save_with_manifest(
                model,
                &self.path,
                &self.entities,
                &self.relations,
                self.config.clone(),
            )?;
        }
        Ok(())
    }
}

impl<A: TrainObserver, B: TrainObserver> TrainObserver for (A, B) {
    fn on_epoch(&mut self, stats: &EpochStats, model: &ModelParams) -> Result<(), TrainError> {
        self.0.on_epoch(stats, model)?;
        self.1.on_epoch(stats, model)
    }

    fn on_progress(&mut self, epoch: usize, pairs_done: usize) {
        self.0.on_progress(epoch, pairs_done);
        self.1.on_progress(epoch, pairs_done);
    }
}

/// Initializes a model from `config.seed` and trains it on `store.train`.
pub fn train(
    store: &TripleStore,
    config: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<(ModelParams, TrainReport), TrainError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let model = ModelParams::init(
        store.num_entities(),
        store.num_relations(),
        config.dim,
        config.variance_sum,
        &mut rng,
    );
    train_model(model, store, config, observer, &mut rng)
}

/// Continues training an existing model with the caller's generator.
pub fn train_model(
    mut model: ModelParams,
    store: &TripleStore,
    config: &TrainConfig,
    observer: &mut dyn TrainObserver,
    rng: &mut ChaCha8Rng,
) -> Result<(ModelParams, TrainReport), TrainError> {
    config.validate()?;
    if model.num_entities() != store.num_entities() || model.num_relations() != store.num_relations()
    {
        return Err(crate::error::ModelError::VocabMismatch {
            model_entities: model.num_entities(),
            model_relations: model.num_relations(),
            store_entities: store.num_entities(),
            store_relations: store.num_relations(),
        }
        .into());
    }
    let rule = config.spawn_rule();
    let mut order: Vec<usize> = (0..store.train.len()).collect();
    let mut report = TrainReport::default();

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        order.shuffle(rng);
        let spawn_now = (epoch - 1) % config.spawn_every == 0;
        let (mut loss_sum, mut scored) = (0.0, 0usize);
        let (mut updates, mut skipped, mut spawns) = (0, 0, 0);

        for (i, &idx) in order.iter().enumerate() {
            let pos = store.train[idx];
            if spawn_now {
                let n_r = store.relation_triples(pos.relation).len();
                if model.maybe_spawn_unchecked(&pos, &rule, n_r, rng) {
                    spawns += 1;
                }
            }
            let Some(neg) = store.corrupt(&pos, config.sampling, rng) else {
                skipped += 1;
                continue;
            };
            let log_pos = model.log_score_unchecked(&pos);
            let log_neg = model.log_score_unchecked(&neg);
            let loss = -log_pos + log_neg + config.reg_c * regularizer(&model, &pos, &neg);
            if !loss.is_finite() {
                return Err(TrainError::Diverged { epoch, triple: pos });
            }
            loss_sum += loss;
            scored += 1;

            let components = model.mixture(pos.relation).len();
            if gate_from_logs(log_pos, log_neg, components, config.margin) {
                let grad = pair_gradient(&model, &pos, &neg, config);
                apply_gradient(&mut model, &grad, config);
                updates += 1;
            } else {
                skipped += 1;
            }
            if (i + 1) % config.batch_size == 0 {
                observer.on_progress(epoch, i + 1);
            }
        }

        let stats = EpochStats {
            epoch,
            mean_loss: if scored > 0 { loss_sum / scored as f64 } else { 0.0 },
            updates,
            skipped,
            spawns,
            seconds: started.elapsed().as_secs_f64(),
        };
        log::debug!(
            "epoch {epoch}: loss {:.6} updates {updates} skipped {skipped} spawns {spawns}",
            stats.mean_loss
        );
        observer.on_epoch(&stats, &model)?;
        report.epochs.push(stats);
    }
    report.census = model.component_counts();
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelationMixture;
    use rand::Rng;

    fn cfg(c: f64) -> TrainConfig {
        TrainConfig {
            reg_c: c,
            ..TrainConfig::default()
        }
    }

    /// Entities 0..n on a line given by `pos`, one relation.
    fn line_model(pos: &[f64], weights: &[f64], comps: &[f64], vs: f64) -> ModelParams {
        ModelParams::from_parts(
            1,
            vs,
            pos.to_vec(),
            vec![RelationMixture::from_parts(1, weights.to_vec(), comps.to_vec())],
        )
    }

    #[test]
    fn identical_pair_has_zero_loss() {
        let m = line_model(&[0.3, -1.0], &[0.4, 0.6], &[0.2, 1.0], 2.0);
        let t = Triple::new(0, 0, 1);
        assert_eq!(pair_loss(&m, &t, &t, &cfg(0.0)), 0.0);
        assert!(update_gate(&m, &t, &t, &cfg(0.0)));
    }

    #[test]
    fn loss_is_log_score_gap() {
        // pos distance^2 = 2, neg distance^2 = 8, vs = 2
        let m = line_model(&[0.0, 2f64.sqrt(), 8f64.sqrt()], &[1.0], &[0.0], 2.0);
        let pos = Triple::new(0, 0, 1);
        let neg = Triple::new(0, 0, 2);
        let loss = pair_loss(&m, &pos, &neg, &cfg(0.0));
        assert!((loss - (-3.0)).abs() < 1e-12, "{loss}");
    }

    #[test]
    fn regularizer_only_loss() {
        let m = ModelParams::from_parts(
            2,
            2.0,
            vec![0.0; 4],
            vec![RelationMixture::from_parts(2, vec![0.5, 0.5], vec![0.0, 0.0, 2.0, 0.0])],
        );
        let t = Triple::new(0, 0, 1);
        // Both scores equal so the log terms cancel.
        assert!((pair_loss(&m, &t, &t, &cfg(0.1)) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn gate_examples() {
        let gap = 3.0;
        assert!(!gate_from_logs(gap, 0.0, 1, 2.5));
        assert!(gate_from_logs(gap, 0.0, 2, 2.5));
        assert!((2f64.ln() + 2.5 - 3.193).abs() < 1e-3);
    }

    #[test]
    fn closed_gate_leaves_model_untouched() {
        let mut m = line_model(&[0.0, 1.0, 50.0], &[1.0], &[1.0], 2.0);
        let before = m.clone();
        let c = TrainConfig {
            margin: 0.0,
            ..cfg(0.1)
        };
        assert!(!sgd_step(&mut m, &Triple::new(0, 0, 1), &Triple::new(0, 0, 2), &c));
        assert_eq!(m, before);
    }

    #[test]
    fn single_component_head_gradient() {
        let m = line_model(&[0.7, -0.4, 5.0], &[1.0], &[0.25], 2.0);
        let pos = Triple::new(0, 0, 1);
        let neg = Triple::new(2, 0, 2);
        // Isolate -ln score(pos): neg shares no entity with pos and its
        // gradient on entity 2 cancels head against tail.
        let g = pair_gradient(&m, &pos, &neg, &cfg(0.0));
        let head = &g.entities.iter().find(|(e, _)| *e == 0).unwrap().1;
        let expected = 2.0 * (0.7 + 0.25 - (-0.4)) / 2.0;
        assert!((head[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn gate_monotone_in_positive_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let neg_d = rng.gen_range(0.0..3.0);
            let mut last = true;
            // Moving the positive tail closer raises score(pos).
            for step in (0..30).rev() {
                let pos_d = step as f64 * 0.2;
                let m = line_model(&[0.0, pos_d, neg_d], &[1.0], &[0.0], 2.0);
                let open = update_gate(&m, &Triple::new(0, 0, 1), &Triple::new(0, 0, 2), &cfg(0.0));
                assert!(last || !open, "gate reopened");
                last = open;
            }
        }
    }

    #[test]
    fn descent_on_fixed_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut m = ModelParams::init(4, 1, 3, 2.0, &mut rng);
        m.mixture_mut(0)
            .push(0.3, &[0.2, -0.1, 0.4], 1e-6);
        let pos = Triple::new(0, 0, 1);
        let neg = Triple::new(2, 0, 3);
        let c = TrainConfig {
            learning_rate: 1e-3,
            reg_c: 0.0,
            ..TrainConfig::default()
        };
        let mut last = pair_loss(&m, &pos, &neg, &c);
        for _ in 0..100 {
            let g = pair_gradient(&m, &pos, &neg, &c);
            apply_gradient(&mut m, &g, &c);
            let now = pair_loss(&m, &pos, &neg, &c);
            assert!(now < last, "{now} >= {last}");
            last = now;
            let w = m.mixture(0).weights();
            assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { variance_sum: -1.0, ..Default::default() },
            TrainConfig { crp_beta: -0.1, ..Default::default() },
            TrainConfig { dim: 0, ..Default::default() },
            TrainConfig { weight_floor: 0.1, m_max: 20, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    fn tiny_store() -> TripleStore {
        let ents = Vocab::from_names((0..6).map(|i| format!("e{i}"))).unwrap();
        let rels = Vocab::from_names(["r"]).unwrap();
        let train = vec![Triple::new(0, 0, 1), Triple::new(1, 0, 2), Triple::new(3, 0, 4)];
        TripleStore::from_triples(ents, rels, train, vec![], vec![Triple::new(4, 0, 5)]).unwrap()
    }

    #[test]
    fn one_epoch_visits_every_triple() {
        let store = tiny_store();
        let c = TrainConfig {
            epochs: 1,
            dim: 4,
            ..TrainConfig::default()
        };
        let (_, report) = train(&store, &c, &mut ()).unwrap();
        assert_eq!(report.epochs.len(), 1);
        let e = &report.epochs[0];
        assert_eq!(e.updates + e.skipped, 3);
    }

    #[test]
    fn training_is_deterministic() {
        let store = tiny_store();
        let c = TrainConfig {
            epochs: 20,
            dim: 3,
            crp_beta: 1.0,
            learning_rate: 0.05,
            seed: 17,
            ..TrainConfig::default()
        };
        let (a, ra) = train(&store, &c, &mut ()).unwrap();
        let (b, rb) = train(&store, &c, &mut ()).unwrap();
        assert!(ra.same_outcome(&rb));
        assert_eq!(checkpoint::encode(&a), checkpoint::encode(&b));
    }

    #[test]
    fn divergence_is_reported() {
        let store = tiny_store();
        let c = TrainConfig {
            epochs: 50,
            dim: 2,
            learning_rate: 1e300,
            ..TrainConfig::default()
        };
        match train(&store, &c, &mut ()) {
            Err(TrainError::Diverged { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {:?}", other.map(|(_, r)| r)),
        }
    }
}
