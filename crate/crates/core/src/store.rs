//! Triple ingestion, vocabularies, lookup indexes and negative sampling.
//!
//! Datasets are read from a directory holding `train.txt`, `valid.txt` (or
//! `dev.txt`) and `test.txt`. Each line is one triple, tab- or
//! whitespace-separated. Labeled splits (triple classification data) carry a
//! fourth column with `1` or `-1`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Threshold on tails-per-head / heads-per-tail separating "1" from "N".
pub const CATEGORY_THRESHOLD: f64 = 1.5;

/// Dense, zero-based name <-> id mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self, DataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocab::new();
        for name in names {
            let name = name.into();
            if vocab.index.contains_key(&name) {
                return Err(DataError::DuplicateName(name));
            }
            vocab.intern(&name);
        }
        Ok(vocab)
    }

    /// Returns the id for `name`, assigning the next free id if unseen.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

impl Triple {
    pub const fn new(head: usize, relation: usize, tail: usize) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledTriple {
    pub triple: Triple,
    pub label: bool,
}

/// Column layout of a triple file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnOrder {
    #[default]
    HeadRelationTail,
    HeadTailRelation,
}

impl FromStr for ColumnOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "hrt" => Ok(ColumnOrder::HeadRelationTail),
            "htr" => Ok(ColumnOrder::HeadTailRelation),
            other => Err(format!("unknown column order `{other}` (expected hrt or htr)")),
        }
    }
}

impl fmt::Display for ColumnOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnOrder::HeadRelationTail => f.write_str("hrt"),
            ColumnOrder::HeadTailRelation => f.write_str("htr"),
        }
    }
}

/// Negative sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Sampling {
    /// Head or tail replaced with probability 1/2.
    Unif,
    /// Head replaced with probability tph / (tph + hpt).
    #[default]
    Bern,
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unif" => Ok(Sampling::Unif),
            "bern" => Ok(Sampling::Bern),
            other => Err(format!("unknown sampling strategy `{other}` (expected unif or bern)")),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampling::Unif => f.write_str("unif"),
            Sampling::Bern => f.write_str("bern"),
        }
    }
}

/// Mapping-cardinality bucket of a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationCategory {
    OneToOne,
    OneToMany,
    ManyToOne,
    ManyToMany,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 4] = [
        RelationCategory::OneToOne,
        RelationCategory::OneToMany,
        RelationCategory::ManyToOne,
        RelationCategory::ManyToMany,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            RelationCategory::OneToOne => "1-1",
            RelationCategory::OneToMany => "1-N",
            RelationCategory::ManyToOne => "N-1",
            RelationCategory::ManyToMany => "N-N",
        }
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Mean tails per head and mean heads per tail of one relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernStats {
    pub tph: f64,
    pub hpt: f64,
}

impl Default for BernStats {
    fn default() -> Self {
        Self { tph: 1.0, hpt: 1.0 }
    }
}

impl BernStats {
    pub fn head_probability(&self) -> f64 {
        self.tph / (self.tph + self.hpt)
    }

    pub fn category(&self) -> RelationCategory {
        let many_tails = self.tph >= CATEGORY_THRESHOLD;
        let many_heads = self.hpt >= CATEGORY_THRESHOLD;
        match (many_tails, many_heads) {
            (false, false) => RelationCategory::OneToOne,
            (true, false) => RelationCategory::OneToMany,
            (false, true) => RelationCategory::ManyToOne,
            (true, true) => RelationCategory::ManyToMany,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TripleStore {
    pub entities: Vocab,
    pub relations: Vocab,
    pub train: Vec<Triple>,
    /// Positive validation triples.
    pub valid: Vec<Triple>,
    /// Positive test triples.
    pub test: Vec<Triple>,
    /// Validation split with labels; empty for unlabeled datasets.
    pub valid_labeled: Vec<LabeledTriple>,
    /// Test split with labels; empty for unlabeled datasets.
    pub test_labeled: Vec<LabeledTriple>,
    known: HashSet<Triple>,
    by_relation: Vec<Vec<usize>>,
    hr_to_tails: HashMap<(usize, usize), Vec<usize>>,
    rt_to_heads: HashMap<(usize, usize), Vec<usize>>,
    bern: Vec<BernStats>,
}

impl TripleStore {
    /// Builds a store from already-encoded splits. Only positive triples of
    /// the labeled splits enter the known set.
    pub fn from_parts(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<LabeledTriple>,
        test: Vec<LabeledTriple>,
        labeled: bool,
    ) -> Result<Self, DataError> {
        if train.is_empty() {
            return Err(DataError::EmptyTrain);
        }
        let (n_e, n_r) = (entities.len(), relations.len());
        for t in train
            .iter()
            .chain(valid.iter().map(|l| &l.triple))
            .chain(test.iter().map(|l| &l.triple))
        {
            if t.head >= n_e || t.tail >= n_e || t.relation >= n_r {
                return Err(DataError::IdOutOfRange(*t));
            }
        }
        let positives = |split: &[LabeledTriple]| -> Vec<Triple> {
            split.iter().filter(|l| l.label).map(|l| l.triple).collect()
        };
        let mut store = TripleStore {
            valid: positives(&valid),
            test: positives(&test),
            valid_labeled: if labeled { valid } else { Vec::new() },
            test_labeled: if labeled { test } else { Vec::new() },
            entities,
            relations,
            train,
            ..Default::default()
        };
        store.build_indexes();
        Ok(store)
    }

    /// Convenience constructor for unlabeled splits given as raw triples.
    pub fn from_triples(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self, DataError> {
        let wrap = |v: Vec<Triple>| {
            v.into_iter()
                .map(|triple| LabeledTriple {
                    triple,
                    label: true,
                })
                .collect()
        };
        Self::from_parts(entities, relations, train, wrap(valid), wrap(test), false)
    }

    fn build_indexes(&mut self) {
        let n_r = self.relations.len();
        self.known = self
            .train
            .iter()
            .chain(&self.valid)
            .chain(&self.test)
            .copied()
            .collect();
        self.by_relation = vec![Vec::new(); n_r];
        self.hr_to_tails.clear();
        self.rt_to_heads.clear();
        for (i, t) in self.train.iter().enumerate() {
            self.by_relation[t.relation].push(i);
            self.hr_to_tails
                .entry((t.head, t.relation))
                .or_default()
                .push(t.tail);
            self.rt_to_heads
                .entry((t.relation, t.tail))
                .or_default()
                .push(t.head);
        }
        for list in self
            .hr_to_tails
            .values_mut()
            .chain(self.rt_to_heads.values_mut())
        {
            list.sort_unstable();
            list.dedup();
        }
        self.bern = compute_bern_stats(&self.train, n_r);
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn known(&self) -> &HashSet<Triple> {
        &self.known
    }

    pub fn is_known(&self, triple: &Triple) -> bool {
        self.known.contains(triple)
    }

    /// Indices into `train` of the triples with this relation.
    pub fn relation_triples(&self, relation: usize) -> &[usize] {
        self.by_relation
            .get(relation)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Distinct train tails for `(head, relation)`, sorted.
    pub fn tails_of(&self, head: usize, relation: usize) -> &[usize] {
        self.hr_to_tails
            .get(&(head, relation))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Distinct train heads for `(relation, tail)`, sorted.
    pub fn heads_of(&self, relation: usize, tail: usize) -> &[usize] {
        self.rt_to_heads
            .get(&(relation, tail))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn bern_stats(&self, relation: usize) -> BernStats {
        self.bern.get(relation).copied().unwrap_or_default()
    }

    pub fn relation_category(&self, relation: usize) -> RelationCategory {
        self.bern_stats(relation).category()
    }

    /// Draws a false triple by replacing the head or the tail of `triple`
    /// with a uniformly chosen entity, rejecting known triples.
    ///
    /// Returns `None` only if every single-slot replacement is a known
    /// triple.
    pub fn corrupt<R: Rng + ?Sized>(
        &self,
        triple: &Triple,
        strategy: Sampling,
        rng: &mut R,
    ) -> Option<Triple> {
        let n_e = self.num_entities();
        let p_head = match strategy {
            Sampling::Unif => 0.5,
            Sampling::Bern => self.bern_stats(triple.relation).head_probability(),
        };
        let replace_head = rng.gen::<f64>() < p_head;
        let make = |head_slot: bool, e: usize| {
            if head_slot {
                Triple::new(e, triple.relation, triple.tail)
            } else {
                Triple::new(triple.head, triple.relation, e)
            }
        };
        let acceptable = |c: &Triple| c != triple && !self.known.contains(c);

        const MAX_REJECTIONS: usize = 1000;
        for _ in 0..MAX_REJECTIONS {
            let candidate = make(replace_head, rng.gen_range(0..n_e));
            if acceptable(&candidate) {
                return Some(candidate);
            }
        }
        // Dense neighborhood: enumerate survivors, preferring the drawn slot.
        for head_slot in [replace_head, !replace_head] {
            let survivors: Vec<Triple> = (0..n_e)
                .map(|e| make(head_slot, e))
                .filter(acceptable)
                .collect();
            if !survivors.is_empty() {
                return Some(survivors[rng.gen_range(0..survivors.len())]);
            }
        }
        None
    }

    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            relations: self.num_relations(),
            entities: self.num_entities(),
            train: self.train.len(),
            valid: self.valid_size(),
            test: self.test_size(),
        }
    }

    fn valid_size(&self) -> usize {
        if self.valid_labeled.is_empty() {
            self.valid.len()
        } else {
            self.valid_labeled.len()
        }
    }

    fn test_size(&self) -> usize {
        if self.test_labeled.is_empty() {
            self.test.len()
        } else {
            self.test_labeled.len()
        }
    }
}

/// Per-relation tails-per-head and heads-per-tail over the given triples.
/// Relations without triples get (1, 1).
pub fn compute_bern_stats(train: &[Triple], num_relations: usize) -> Vec<BernStats> {
    let mut count = vec![0usize; num_relations];
    let mut heads: Vec<HashSet<usize>> = vec![HashSet::new(); num_relations];
    let mut tails: Vec<HashSet<usize>> = vec![HashSet::new(); num_relations];
    for t in train {
        count[t.relation] += 1;
        heads[t.relation].insert(t.head);
        tails[t.relation].insert(t.tail);
    }
    (0..num_relations)
        .map(|r| {
            if count[r] == 0 {
                BernStats::default()
            } else {
                BernStats {
                    tph: count[r] as f64 / heads[r].len() as f64,
                    hpt: count[r] as f64 / tails[r].len() as f64,
                }
            }
        })
        .collect()
}

/// Table-style split and vocabulary counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub relations: usize,
    pub entities: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "#Rel    {:>10}", self.relations)?;
        writeln!(f, "#Ent    {:>10}", self.entities)?;
        writeln!(f, "#Train  {:>10}", self.train)?;
        writeln!(f, "#Valid  {:>10}", self.valid)?;
        write!(f, "#Test   {:>10}", self.test)
    }
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

struct RawLine<'a> {
    head: &'a str,
    relation: &'a str,
    tail: &'a str,
    label: bool,
}

fn parse_line<'a>(
    line: &'a str,
    order: ColumnOrder,
    labeled: bool,
    path: &Path,
    line_no: usize,
) -> Result<RawLine<'a>, DataError> {
    let fields = split_fields(line);
    let expected = if labeled { 4 } else { 3 };
    if fields.len() != expected {
        return Err(DataError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("expected {expected} columns, found {}", fields.len()),
        });
    }
    let (head, relation, tail) = match order {
        ColumnOrder::HeadRelationTail => (fields[0], fields[1], fields[2]),
        ColumnOrder::HeadTailRelation => (fields[0], fields[2], fields[1]),
    };
    let label = if labeled {
        match fields[3] {
            "1" | "+1" => true,
            "-1" | "0" => false,
            other => {
                return Err(DataError::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("label must be 1 or -1, found `{other}`"),
                })
            }
        }
    } else {
        true
    };
    Ok(RawLine {
        head,
        relation,
        tail,
        label,
    })
}

fn read_split(
    path: &Path,
    order: ColumnOrder,
    labeled: bool,
    entities: &mut Vocab,
    relations: &mut Vocab,
) -> Result<Vec<LabeledTriple>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw = parse_line(line, order, labeled, path, i + 1)?;
        let triple = Triple::new(
            entities.intern(raw.head),
            relations.intern(raw.relation),
            entities.intern(raw.tail),
        );
        out.push(LabeledTriple {
            triple,
            label: raw.label,
        });
    }
    Ok(out)
}

fn locate(dir: &Path, candidates: &[&str]) -> Result<PathBuf, DataError> {
    candidates
        .iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| DataError::MissingFile {
            dir: dir.to_path_buf(),
            expected: candidates.join(" or "),
        })
}

/// Loads `train.txt`, `valid.txt`/`dev.txt` and `test.txt` from `dir`.
///
/// With `labeled`, the validation and test files must carry a label column
/// while the train file stays three-column.
pub fn load_dataset(dir: &Path, order: ColumnOrder, labeled: bool) -> Result<TripleStore, DataError> {
    let train_path = locate(dir, &["train.txt"])?;
    let valid_path = locate(dir, &["valid.txt", "dev.txt"])?;
    let test_path = locate(dir, &["test.txt"])?;

    let mut entities = Vocab::new();
    let mut relations = Vocab::new();
    let train = read_split(&train_path, order, false, &mut entities, &mut relations)?;
    let valid = read_split(&valid_path, order, labeled, &mut entities, &mut relations)?;
    let test = read_split(&test_path, order, labeled, &mut entities, &mut relations)?;

    if relations.len() > entities.len() {
        log::warn!(
            "{} relations but only {} entities; is the column order ({order}) right?",
            relations.len(),
            entities.len()
        );
    }

    let train = train.into_iter().map(|l| l.triple).collect();
    TripleStore::from_parts(entities, relations, train, valid, test, labeled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn vocab(n: usize, prefix: &str) -> Vocab {
        Vocab::from_names((0..n).map(|i| format!("{prefix}{i}"))).unwrap()
    }

    fn store(n_e: usize, n_r: usize, train: Vec<Triple>) -> TripleStore {
        TripleStore::from_triples(vocab(n_e, "e"), vocab(n_r, "r"), train, vec![], vec![]).unwrap()
    }

    fn t(h: usize, r: usize, tl: usize) -> Triple {
        Triple::new(h, r, tl)
    }

    #[test]
    fn vocab_is_bijective() {
        let mut v = Vocab::new();
        for name in ["a", "b", "a", "c"] {
            v.intern(name);
        }
        assert_eq!(v.len(), 3);
        for i in 0..v.len() {
            assert_eq!(v.id(v.name(i).unwrap()), Some(i));
        }
        assert!(Vocab::from_names(["x", "x"]).is_err());
    }

    #[test]
    fn bern_stats_direct_counts() {
        // a=0, b=1, x=2, y=3, z=4
        let stats = compute_bern_stats(&[t(0, 0, 2), t(0, 0, 3), t(1, 0, 2)], 1);
        assert_eq!(stats[0].tph, 1.5);
        assert_eq!(stats[0].hpt, 1.5);

        let stats = compute_bern_stats(&[t(0, 0, 2)], 2);
        assert_eq!(stats[0], BernStats { tph: 1.0, hpt: 1.0 });
        assert_eq!(stats[1], BernStats::default());

        let stats = compute_bern_stats(&[t(0, 0, 2), t(0, 0, 3), t(0, 0, 4)], 1);
        assert_eq!(stats[0].tph, 3.0);
        assert_eq!(stats[0].hpt, 1.0);
    }

    #[test]
    fn category_rule() {
        let cat = |tph, hpt| BernStats { tph, hpt }.category();
        assert_eq!(cat(1.0, 1.0), RelationCategory::OneToOne);
        assert_eq!(cat(3.0, 1.0), RelationCategory::OneToMany);
        assert_eq!(cat(1.0, 3.0), RelationCategory::ManyToOne);
        assert_eq!(cat(2.2, 4.7), RelationCategory::ManyToMany);
        assert_eq!(cat(1.5, 1.49), RelationCategory::OneToMany);
    }

    #[test]
    fn repeated_triple_dedups_known_set() {
        let s = store(2, 1, vec![t(0, 0, 1); 3]);
        assert_eq!(s.num_entities(), 2);
        assert_eq!(s.num_relations(), 1);
        assert_eq!(s.train.len(), 3);
        assert_eq!(s.known().len(), 1);
    }

    #[test]
    fn empty_train_is_rejected() {
        let err = TripleStore::from_triples(vocab(2, "e"), vocab(1, "r"), vec![], vec![], vec![]);
        assert!(matches!(err, Err(DataError::EmptyTrain)));
    }

    #[test]
    fn out_of_range_ids_are_rejected() {
        let err = TripleStore::from_triples(vocab(2, "e"), vocab(1, "r"), vec![t(0, 0, 5)], vec![], vec![]);
        assert!(matches!(err, Err(DataError::IdOutOfRange(_))));
    }

    #[test]
    fn indexes_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let train: Vec<Triple> = (0..300)
            .map(|_| t(rng.gen_range(0..15), rng.gen_range(0..3), rng.gen_range(0..15)))
            .collect();
        let s = store(15, 3, train.clone());
        for h in 0..15 {
            for r in 0..3 {
                let brute: BTreeSet<usize> = train
                    .iter()
                    .filter(|x| x.head == h && x.relation == r)
                    .map(|x| x.tail)
                    .collect();
                assert_eq!(s.tails_of(h, r), brute.into_iter().collect::<Vec<_>>().as_slice());
                let brute: BTreeSet<usize> = train
                    .iter()
                    .filter(|x| x.tail == h && x.relation == r)
                    .map(|x| x.head)
                    .collect();
                assert_eq!(s.heads_of(r, h), brute.into_iter().collect::<Vec<_>>().as_slice());
            }
        }
        for r in 0..3 {
            for &i in s.relation_triples(r) {
                assert_eq!(s.train[i].relation, r);
            }
        }
        let total: usize = (0..3).map(|r| s.relation_triples(r).len()).sum();
        assert_eq!(total, train.len());
    }

    #[test]
    fn corrupt_on_two_entities_yields_only_candidates() {
        let s = store(2, 1, vec![t(0, 0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let c = s.corrupt(&t(0, 0, 1), Sampling::Unif, &mut rng).unwrap();
            assert!(c == t(1, 0, 1) || c == t(0, 0, 0), "{c:?}");
        }
    }

    #[test]
    fn corrupt_returns_none_when_saturated() {
        let all: Vec<Triple> = (0..2)
            .flat_map(|h| (0..2).map(move |tl| t(h, 0, tl)))
            .collect();
        let s = store(2, 1, all);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(s.corrupt(&t(0, 0, 1), Sampling::Bern, &mut rng), None);
    }

    fn head_frequency(s: &TripleStore, strategy: Sampling, draws: usize) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let pos = s.train[0];
        let mut heads = 0;
        for _ in 0..draws {
            let c = s.corrupt(&pos, strategy, &mut rng).unwrap();
            if c.head != pos.head {
                heads += 1;
            }
        }
        heads as f64 / draws as f64
    }

    #[test]
    fn bern_head_frequency_matches_closed_form() {
        // 1-N relation: tph = 3, hpt = 1.
        let s = store(1000, 1, vec![t(0, 0, 1), t(0, 0, 2), t(0, 0, 3)]);
        assert_eq!(s.bern_stats(0).head_probability(), 0.75);
        let f = head_frequency(&s, Sampling::Bern, 100_000);
        assert!((f - 0.75).abs() < 0.01, "{f}");
    }

    #[test]
    fn unif_head_frequency_is_half() {
        let s = store(1000, 1, vec![t(0, 0, 1), t(0, 0, 2), t(0, 0, 3)]);
        let f = head_frequency(&s, Sampling::Unif, 100_000);
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }

    #[test]
    fn corruption_never_hits_known() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let train: Vec<Triple> = (0..200)
            .map(|_| t(rng.gen_range(0..12), rng.gen_range(0..2), rng.gen_range(0..12)))
            .collect();
        let s = store(12, 2, train);
        for i in 0..1_000_000 {
            let pos = s.train[i % s.train.len()];
            let strategy = if i % 2 == 0 { Sampling::Bern } else { Sampling::Unif };
            if let Some(c) = s.corrupt(&pos, strategy, &mut rng) {
                assert_ne!(c, pos);
                assert!(!s.is_known(&c));
                assert!((c.head == pos.head) ^ (c.tail == pos.tail));
            }
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("train.txt"), "a\tr\tb\na\tr\n").unwrap();
        fs::write(dir.path().join("valid.txt"), "").unwrap();
        fs::write(dir.path().join("test.txt"), "").unwrap();
        match load_dataset(dir.path(), ColumnOrder::HeadRelationTail, false) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn loads_labeled_and_column_swapped_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("train.txt"), "a b r1\nb c r1\nc d r2\n").unwrap();
        fs::write(dir.path().join("dev.txt"), "a c r1 1\na d r1 -1\n").unwrap();
        fs::write(dir.path().join("test.txt"), "e a r2 1\nb b r2 -1\n").unwrap();
        let s = load_dataset(dir.path(), ColumnOrder::HeadTailRelation, true).unwrap();
        assert_eq!(s.num_relations(), 2);
        // Unseen test entity `e` is admitted.
        assert_eq!(s.num_entities(), 5);
        assert_eq!(s.valid_labeled.len(), 2);
        assert_eq!(s.valid.len(), 1);
        assert_eq!(s.test.len(), 1);
        // Negatives never enter the filter set.
        assert_eq!(s.known().len(), 5);
        for tr in s.train.iter().chain(&s.valid).chain(&s.test) {
            assert!(s.is_known(tr));
        }
        let r1 = s.relations.id("r1").unwrap();
        assert_eq!(s.train[0].relation, r1);
        assert_eq!(s.summary().valid, 2);
    }

    #[test]
    fn missing_split_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("train.txt"), "a r b\n").unwrap();
        assert!(matches!(
            load_dataset(dir.path(), ColumnOrder::default(), false),
            Err(DataError::MissingFile { .. })
        ));
    }
}
