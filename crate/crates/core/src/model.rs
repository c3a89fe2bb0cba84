//! Learnable parameters and the mixture score.
//!
//! A triple's score is a weighted sum of Gaussian-shaped terms, one per
//! translation component of its relation:
//!
//! ```text
//! score(h, r, t) = sum_m pi_{r,m} * exp(-|u_h + u_{r,m} - u_t|^2 / vs)
//! ```
//!
//! Everything is evaluated in log space (`ln pi - d^2 / vs`) and combined
//! with a max-shifted log-sum-exp, so rankings and energies stay exact even
//! when the score itself underflows.

use rand::Rng;

use crate::error::ModelError;
use crate::store::Triple;

/// Uniform init bound for a `dim x dim` layer: `sqrt(6) / sqrt(dim + dim)`.
pub fn glorot_bound(dim: usize) -> f64 {
    6f64.sqrt() / ((2 * dim) as f64).sqrt()
}

pub fn glorot_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let b = glorot_bound(dim);
    (0..dim).map(|_| rng.gen_range(-b..=b)).collect()
}

/// `|h + r - t|^2`
#[inline]
pub fn translation_sq_dist(head: &[f64], rel: &[f64], tail: &[f64]) -> f64 {
    head.iter()
        .zip(rel)
        .zip(tail)
        .map(|((h, r), t)| {
            let d = h + r - t;
            d * d
        })
        .sum()
}

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Rescales `weights` to sum to one with every entry at least `floor`.
pub fn normalize_with_floor(weights: &mut [f64], floor: f64) {
    let n = weights.len();
    if n == 0 {
        return;
    }
    if floor * n as f64 >= 1.0 {
        weights.fill(1.0 / n as f64);
        return;
    }
    let mut pinned = vec![false; n];
    loop {
        let n_pinned = pinned.iter().filter(|&&p| p).count();
        let free_mass = 1.0 - floor * n_pinned as f64;
        let free_sum: f64 = weights
            .iter()
            .zip(&pinned)
            .filter(|(_, &p)| !p)
            .map(|(w, _)| *w)
            .sum();
        let n_free = n - n_pinned;
        for (w, &p) in weights.iter_mut().zip(&pinned) {
            if p {
                *w = floor;
            } else if free_sum > 0.0 {
                *w *= free_mass / free_sum;
            } else {
                *w = free_mass / n_free as f64;
            }
        }
        let mut changed = false;
        for (w, p) in weights.iter().zip(pinned.iter_mut()) {
            if !*p && *w < floor {
                *p = true;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Translation components of one relation with their mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationMixture {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<f64>,
}

impl RelationMixture {
    pub fn single(vector: Vec<f64>) -> Self {
        Self {
            dim: vector.len(),
            weights: vec![1.0],
            vectors: vector,
        }
    }

    /// Builds a mixture from raw parts. Weights are taken as given.
    pub fn from_parts(dim: usize, weights: Vec<f64>, vectors: Vec<f64>) -> Self {
        assert_eq!(weights.len() * dim, vectors.len());
        assert!(!weights.is_empty());
        Self {
            dim,
            weights,
            vectors,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    pub fn vector(&self, m: usize) -> &[f64] {
        &self.vectors[m * self.dim..(m + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.vectors[m * self.dim..(m + 1) * self.dim]
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    /// Appends a component with raw weight `weight`, then renormalizes.
    pub fn push(&mut self, weight: f64, vector: &[f64], floor: f64) {
        assert_eq!(vector.len(), self.dim);
        self.weights.push(weight);
        self.vectors.extend_from_slice(vector);
        normalize_with_floor(&mut self.weights, floor);
    }

    /// Replaces the weights by `softmax(ln pi - step * grad)` and applies
    /// the floor. This is a plain gradient step on the logits.
    pub fn step_logits(&mut self, step: f64, grad: &[f64], floor: f64) {
        let logits: Vec<f64> = self
            .weights
            .iter()
            .zip(grad)
            .map(|(w, g)| w.ln() - step * g)
            .collect();
        let lse = log_sum_exp(&logits);
        for (w, l) in self.weights.iter_mut().zip(&logits) {
            *w = (l - lse).exp();
        }
        normalize_with_floor(&mut self.weights, floor);
    }

    /// Overwrites the weights with `weights`, renormalized.
    pub fn set_weights(&mut self, weights: &[f64], floor: f64) {
        assert_eq!(weights.len(), self.weights.len());
        self.weights.copy_from_slice(weights);
        normalize_with_floor(&mut self.weights, floor);
    }
}

/// Controls component creation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpawnRule {
    /// CRP concentration.
    pub beta: f64,
    pub max_components: usize,
    pub weight_floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    dim: usize,
    /// Sum of head and tail variances; fixed unless variance learning is on.
    pub variance_sum: f64,
    entities: Vec<f64>,
    mixtures: Vec<RelationMixture>,
}

impl ModelParams {
    /// Glorot-uniform entities, one Glorot-uniform component per relation.
    pub fn init<R: Rng + ?Sized>(
        num_entities: usize,
        num_relations: usize,
        dim: usize,
        variance_sum: f64,
        rng: &mut R,
    ) -> Self {
        assert!(dim >= 1, "embedding dimension must be positive");
        let b = glorot_bound(dim);
        let entities = (0..num_entities * dim).map(|_| rng.gen_range(-b..=b)).collect();
        let mixtures = (0..num_relations)
            .map(|_| RelationMixture::single(glorot_vector(dim, rng)))
            .collect();
        Self {
            dim,
            variance_sum,
            entities,
            mixtures,
        }
    }

    pub fn from_parts(
        dim: usize,
        variance_sum: f64,
        entities: Vec<f64>,
        mixtures: Vec<RelationMixture>,
    ) -> Self {
        assert_eq!(entities.len() % dim, 0);
        assert!(mixtures.iter().all(|m| m.dim() == dim));
        Self {
            dim,
            variance_sum,
            entities,
            mixtures,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len() / self.dim
    }

    pub fn num_relations(&self) -> usize {
        self.mixtures.len()
    }

    pub fn entity(&self, e: usize) -> &[f64] {
        &self.entities[e * self.dim..(e + 1) * self.dim]
    }

    pub fn entity_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.entities[e * self.dim..(e + 1) * self.dim]
    }

    pub fn entity_matrix(&self) -> &[f64] {
        &self.entities
    }

    pub fn mixture(&self, r: usize) -> &RelationMixture {
        &self.mixtures[r]
    }

    pub fn mixture_mut(&mut self, r: usize) -> &mut RelationMixture {
        &mut self.mixtures[r]
    }

    pub fn mixtures(&self) -> &[RelationMixture] {
        &self.mixtures
    }

    /// Component counts per relation.
    pub fn component_counts(&self) -> Vec<usize> {
        self.mixtures.iter().map(RelationMixture::len).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.variance_sum.is_finite()
            && self.entities.iter().all(|x| x.is_finite())
            && self.mixtures.iter().all(|m| {
                m.vectors.iter().all(|x| x.is_finite()) && m.weights.iter().all(|x| x.is_finite())
            })
    }

    pub fn check(&self, triple: &Triple) -> Result<(), ModelError> {
        let n_e = self.num_entities();
        for id in [triple.head, triple.tail] {
            if id >= n_e {
                return Err(ModelError::EntityOutOfRange { id, len: n_e });
            }
        }
        if triple.relation >= self.num_relations() {
            return Err(ModelError::RelationOutOfRange {
                id: triple.relation,
                len: self.num_relations(),
            });
        }
        Ok(())
    }

    /// Per-component `ln pi_m - d_m^2 / vs`, written into `out`.
    pub(crate) fn component_log_terms_into(&self, triple: &Triple, out: &mut Vec<f64>) {
        let mix = &self.mixtures[triple.relation];
        let h = self.entity(triple.head);
        let t = self.entity(triple.tail);
        out.clear();
        out.extend((0..mix.len()).map(|m| {
            mix.weights[m].ln() - translation_sq_dist(h, mix.vector(m), t) / self.variance_sum
        }));
    }

    pub fn component_log_terms(&self, triple: &Triple) -> Result<Vec<f64>, ModelError> {
        self.check(triple)?;
        let mut out = Vec::new();
        self.component_log_terms_into(triple, &mut out);
        Ok(out)
    }

    pub(crate) fn log_score_unchecked(&self, triple: &Triple) -> f64 {
        let mix = &self.mixtures[triple.relation];
        let h = self.entity(triple.head);
        let t = self.entity(triple.tail);
        if mix.len() == 1 {
            return mix.weights[0].ln() - translation_sq_dist(h, mix.vector(0), t) / self.variance_sum;
        }
        let mut terms = Vec::with_capacity(mix.len());
        self.component_log_terms_into(triple, &mut terms);
        log_sum_exp(&terms)
    }

    /// Natural log of the mixture score.
    pub fn log_score(&self, triple: &Triple) -> Result<f64, ModelError> {
        self.check(triple)?;
        Ok(self.log_score_unchecked(triple))
    }

    /// Mixture score in (0, 1].
    pub fn score(&self, triple: &Triple) -> Result<f64, ModelError> {
        Ok(self.log_score(triple)?.exp())
    }

    /// `-ln score`; low energy means plausible.
    pub fn energy(&self, triple: &Triple) -> Result<f64, ModelError> {
        Ok(-self.log_score(triple)?)
    }

    /// Index of the largest weighted term; ties go to the lowest index.
    pub fn primary_component(&self, triple: &Triple) -> Result<usize, ModelError> {
        let terms = self.component_log_terms(triple)?;
        Ok(argmax_first(&terms))
    }

    /// Posterior share of each component for this triple.
    pub fn responsibilities(&self, triple: &Triple) -> Result<Vec<f64>, ModelError> {
        let terms = self.component_log_terms(triple)?;
        Ok(softmax(&terms))
    }

    /// Probability that the CRP opens a new component for `triple`:
    /// `a / (a + score)` with `a = beta * exp(-|h - t|^2 / (vs + 2))`.
    pub fn spawn_probability(&self, triple: &Triple, beta: f64) -> Result<f64, ModelError> {
        self.check(triple)?;
        Ok(self.spawn_probability_unchecked(triple, beta))
    }

    pub(crate) fn spawn_probability_unchecked(&self, triple: &Triple, beta: f64) -> f64 {
        if beta <= 0.0 {
            return 0.0;
        }
        let d2 = sq_dist(self.entity(triple.head), self.entity(triple.tail));
        let log_new = beta.ln() - d2 / (self.variance_sum + 2.0);
        let log_existing = self.log_score_unchecked(triple);
        // a / (a + s) = 1 / (1 + exp(ln s - ln a))
        1.0 / (1.0 + (log_existing - log_new).exp())
    }

    /// Samples the CRP rule for `triple` and, on success, appends a random
    /// component with raw weight `beta / (relation_size + beta)`.
    pub fn maybe_spawn<R: Rng + ?Sized>(
        &mut self,
        triple: &Triple,
        rule: &SpawnRule,
        relation_size: usize,
        rng: &mut R,
    ) -> Result<bool, ModelError> {
        self.check(triple)?;
        Ok(self.maybe_spawn_unchecked(triple, rule, relation_size, rng))
    }

    pub(crate) fn maybe_spawn_unchecked<R: Rng + ?Sized>(
        &mut self,
        triple: &Triple,
        rule: &SpawnRule,
        relation_size: usize,
        rng: &mut R,
    ) -> bool {
        if rule.beta <= 0.0 || self.mixtures[triple.relation].len() >= rule.max_components {
            return false;
        }
        let p = self.spawn_probability_unchecked(triple, rule.beta);
        if rng.gen::<f64>() >= p {
            return false;
        }
        let vector = glorot_vector(self.dim, rng);
        let weight = rule.beta / (relation_size as f64 + rule.beta);
        self.mixtures[triple.relation].push(weight, &vector, rule.weight_floor);
        true
    }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn softmax(log_terms: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_terms);
    log_terms.iter().map(|v| (v - lse).exp()).collect()
}
