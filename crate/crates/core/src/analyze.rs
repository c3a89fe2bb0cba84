//! Component census, per-triple cluster assignments and difference-vector
//! exports for plotting.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::DataError;
use crate::model::ModelParams;
use crate::pca::Pca;
use crate::store::{Triple, TripleStore, Vocab};

pub const DEFAULT_EFFECTIVE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCensus {
    /// `(relation name, effective component count)` in relation-id order.
    pub counts: Vec<(String, usize)>,
    pub average: f64,
}

impl ComponentCensus {
    pub fn render_table(&self) -> String {
        let width = self.counts.iter().map(|(n, _)| n.len()).max().unwrap_or(8).max(8);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:>10}", "relation", "components");
        for (name, c) in &self.counts {
            let _ = writeln!(s, "{name:<width$}  {c:>10}");
        }
        let _ = writeln!(s, "{:<width$}  {:>10.2}", "average", self.average);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("relation,components\n");
        for (name, c) in &self.counts {
            let _ = writeln!(s, "{},{c}", csv_field(name));
        }
        s
    }
}

/// Counts, per relation, the components with weight at least `threshold`.
pub fn component_census(model: &ModelParams, relations: &Vocab, threshold: f64) -> ComponentCensus {
    let counts: Vec<(String, usize)> = model
        .mixtures()
        .iter()
        .enumerate()
        .map(|(r, mix)| {
            let name = relations.name(r).map(str::to_owned).unwrap_or_else(|| r.to_string());
            (name, mix.weights().iter().filter(|&&w| w >= threshold).count())
        })
        .collect();
    let average = if counts.is_empty() {
        0.0
    } else {
        counts.iter().map(|(_, c)| *c as f64).sum::<f64>() / counts.len() as f64
    };
    ComponentCensus { counts, average }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterAssignment {
    pub triple: Triple,
    pub component: usize,
    /// Posterior share of the assigned component.
    pub responsibility: f64,
}

fn relation_id(store: &TripleStore, relation: &str) -> Result<usize, DataError> {
    store
        .relations
        .id(relation)
        .ok_or_else(|| DataError::UnknownRelation(relation.to_owned()))
}

/// Primary component of every train triple of `relation`, sorted by
/// component then by responsibility (descending).
pub fn assign_clusters(
    model: &ModelParams,
    store: &TripleStore,
    relation: &str,
) -> Result<Vec<ClusterAssignment>, DataError> {
    let r = relation_id(store, relation)?;
    let mut out: Vec<ClusterAssignment> = store
        .relation_triples(r)
        .iter()
        .map(|&i| {
            let triple = store.train[i];
            let component = model.primary_component(&triple).expect("store and model agree");
            let rho = model.responsibilities(&triple).expect("store and model agree");
            ClusterAssignment {
                triple,
                component,
                responsibility: rho[component],
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.component
            .cmp(&b.component)
            .then(b.responsibility.total_cmp(&a.responsibility))
    });
    Ok(out)
}

pub fn assignments_csv(assignments: &[ClusterAssignment], entities: &Vocab) -> String {
    let mut s = String::from("head,tail,component,responsibility\n");
    for a in assignments {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            csv_field(entities.name(a.triple.head).unwrap_or("?")),
            csv_field(entities.name(a.triple.tail).unwrap_or("?")),
            a.component,
            a.responsibility
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceRow {
    pub head: String,
    pub tail: String,
    pub component: usize,
    /// Raw `u_t - u_h` or its 2-D projection.
    pub coords: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceTable {
    pub projected: bool,
    pub rows: Vec<DifferenceRow>,
}

impl DifferenceTable {
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.coords.len());
        let mut s = String::from("head,tail,component");
        for i in 0..n {
            if self.projected {
                let _ = write!(s, ",pc{}", i + 1);
            } else {
                let _ = write!(s, ",d{i}");
            }
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{}", csv_field(&r.head), csv_field(&r.tail), r.component);
            for x in &r.coords {
                let _ = write!(s, ",{x}");
            }
            s.push('\n');
        }
        s
    }
}

/// One row per train triple of `relation` with its tail-minus-head vector,
/// optionally projected onto the top two principal directions.
pub fn export_difference_vectors(
    model: &ModelParams,
    store: &TripleStore,
    relation: &str,
    project: bool,
) -> Result<DifferenceTable, DataError> {
    let r = relation_id(store, relation)?;
    let triples: Vec<Triple> = store.relation_triples(r).iter().map(|&i| store.train[i]).collect();
    let diffs: Vec<Vec<f64>> = triples
        .iter()
        .map(|t| {
            model
                .entity(t.tail)
                .iter()
                .zip(model.entity(t.head))
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let coords = if project {
        let pca = Pca::fit(&diffs, 2).ok_or_else(|| DataError::TooFewTriples {
            relation: relation.to_owned(),
            count: diffs.len(),
        })?;
        diffs.iter().map(|d| pca.project(d, 2)).collect()
    } else {
        diffs
    };
    let name = |e: usize| store.entities.name(e).unwrap_or("?").to_owned();
    let rows = triples
        .iter()
        .zip(coords)
        .map(|(t, coords)| DifferenceRow {
            head: name(t.head),
            tail: name(t.tail),
            component: model.primary_component(t).expect("store and model agree"),
            coords,
        })
        .collect();
    Ok(DifferenceTable {
        projected: project,
        rows,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelationMixture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_cluster_setup() -> (ModelParams, TripleStore) {
        // Heads at 0; tails at +/-3 + small offsets; components at +3 and -3.
        let positions = [0.0, 3.0, 3.2, -3.0, -2.9, 2.8];
        let mix = RelationMixture::from_parts(1, vec![0.5, 0.5], vec![3.0, -3.0]);
        let model = ModelParams::from_parts(1, 2.0, positions.to_vec(), vec![mix]);
        let ents = Vocab::from_names((0..6).map(|i| format!("e{i}"))).unwrap();
        let rels = Vocab::from_names(["has_part"]).unwrap();
        let train = (1..6).map(|t| Triple::new(0, 0, t)).collect();
        let store = TripleStore::from_triples(ents, rels, train, vec![], vec![]).unwrap();
        (model, store)
    }

    #[test]
    fn fresh_model_census() {
        let m = ModelParams::init(10, 3, 4, 2.0, &mut ChaCha8Rng::seed_from_u64(0));
        let rels = Vocab::from_names(["a", "b", "c"]).unwrap();
        let c = component_census(&m, &rels, DEFAULT_EFFECTIVE_THRESHOLD);
        assert!(c.counts.iter().all(|(_, n)| *n == 1));
        assert_eq!(c.average, 1.0);
        assert!(c.render_table().contains("average"));
    }

    #[test]
    fn census_threshold_rule() {
        let mix = RelationMixture::from_parts(1, vec![0.6, 0.395, 0.005], vec![0.0; 3]);
        let m = ModelParams::from_parts(1, 2.0, vec![0.0], vec![mix]);
        let c = component_census(&m, &Vocab::from_names(["r"]).unwrap(), 0.01);
        assert_eq!(c.counts[0].1, 2);
    }

    #[test]
    fn single_component_assignment() {
        let m = ModelParams::init(6, 1, 3, 2.0, &mut ChaCha8Rng::seed_from_u64(1));
        let (_, store) = two_cluster_setup();
        let a = assign_clusters(&m, &store, "has_part").unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|x| x.component == 0 && x.responsibility == 1.0));
    }

    #[test]
    fn separated_components_match_argmax_oracle() {
        let (m, store) = two_cluster_setup();
        let a = assign_clusters(&m, &store, "has_part").unwrap();
        for x in &a {
            // Oracle: largest pi * exp(-d^2 / vs), computed directly.
            let h = m.entity(x.triple.head)[0];
            let t = m.entity(x.triple.tail)[0];
            let w = |c: usize| {
                let u = m.mixture(0).vector(c)[0];
                m.mixture(0).weight(c) * (-(h + u - t).powi(2) / 2.0).exp()
            };
            let expect = if w(1) > w(0) { 1 } else { 0 };
            assert_eq!(x.component, expect);
            assert_eq!(x.component, m.primary_component(&x.triple).unwrap());
        }
        let comps: Vec<usize> = a.iter().map(|x| x.component).collect();
        assert_eq!(comps, vec![0, 0, 0, 1, 1]);
        assert!(a[0].responsibility >= a[1].responsibility);
    }

    #[test]
    fn unknown_relation_is_an_error() {
        let (m, store) = two_cluster_setup();
        assert!(matches!(
            assign_clusters(&m, &store, "nope"),
            Err(DataError::UnknownRelation(_))
        ));
    }

    #[test]
    fn raw_and_projected_exports() {
        let (m, store) = two_cluster_setup();
        let raw = export_difference_vectors(&m, &store, "has_part", false).unwrap();
        assert_eq!(raw.rows[0].coords, vec![3.0]);
        let proj = export_difference_vectors(&m, &store, "has_part", true).unwrap();
        assert!(proj.rows.iter().all(|r| r.coords.len() == 2 && r.coords[1] == 0.0));
        assert!(proj.to_csv().starts_with("head,tail,component,pc1,pc2\n"));
    }

    #[test]
    fn projection_needs_two_triples() {
        let m = ModelParams::init(2, 1, 2, 2.0, &mut ChaCha8Rng::seed_from_u64(0));
        let store = TripleStore::from_triples(
            Vocab::from_names(["a", "b"]).unwrap(),
            Vocab::from_names(["r"]).unwrap(),
            vec![Triple::new(0, 0, 1)],
            vec![],
            vec![],
        )
        .unwrap();
        assert!(export_difference_vectors(&m, &store, "r", true).is_err());
        assert!(export_difference_vectors(&m, &store, "r", false).is_ok());
    }
}
