//! Binary checkpoints plus a plain-text manifest.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic        8 bytes  "TRANSGCK"
//! version      u32
//! entities     u64
//! relations    u64
//! dim          u64
//! variance_sum f64
//! entity matrix, row-major, entities * dim f64
//! per relation: M_r u64, then M_r * (weight f64, dim f64)
//! ```
//!
//! The manifest lives at `<checkpoint>.manifest` as `key=value` lines and
//! references the vocabulary files written next to the checkpoint.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CheckpointError;
use crate::model::{ModelParams, RelationMixture};
use crate::store::{TripleStore, Vocab};

pub const MAGIC: &[u8; 8] = b"TRANSGCK";
pub const VERSION: u32 = 1;

const HEADER_LEN: usize = 8 + 4 + 8 * 3 + 8;

/// Exact encoded size of `model` in bytes.
pub fn encoded_len(model: &ModelParams) -> usize {
    let k = model.dim();
    HEADER_LEN
        + model.entity_matrix().len() * 8
        + model
            .mixtures()
            .iter()
            .map(|m| 8 + m.len() * (1 + k) * 8)
            .sum::<usize>()
}

pub fn encode(model: &ModelParams) -> Vec<u8> {
    let mut buf = Vec::with_capacity(encoded_len(model));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    for n in [model.num_entities(), model.num_relations(), model.dim()] {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    buf.extend_from_slice(&model.variance_sum.to_le_bytes());
    for x in model.entity_matrix() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for mix in model.mixtures() {
        buf.extend_from_slice(&(mix.len() as u64).to_le_bytes());
        for m in 0..mix.len() {
            buf.extend_from_slice(&mix.weight(m).to_le_bytes());
            for x in mix.vector(m) {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let out = self.bytes.get(self.pos..end).ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<usize, CheckpointError> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| CheckpointError::Corrupt(format!("count {v} too large")))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let len = n.checked_mul(8).ok_or(CheckpointError::Truncated)?;
        Ok(self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> Result<ModelParams, CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < MAGIC.len() {
        return Err(CheckpointError::Truncated);
    }
    if r.take(8)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: VERSION,
        });
    }
    let n_e = r.u64()?;
    let n_r = r.u64()?;
    let dim = r.u64()?;
    if dim == 0 {
        return Err(CheckpointError::Corrupt("zero dimension".into()));
    }
    let variance_sum = r.f64()?;
    if !(variance_sum > 0.0 && variance_sum.is_finite()) {
        return Err(CheckpointError::Corrupt(format!(
            "variance sum {variance_sum}"
        )));
    }
    let entities = r.f64s(n_e.checked_mul(dim).ok_or(CheckpointError::Truncated)?)?;
    let mut mixtures = Vec::with_capacity(n_r.min(1 << 20));
    for rel in 0..n_r {
        let m = r.u64()?;
        if m == 0 {
            return Err(CheckpointError::Corrupt(format!("relation {rel} has no components")));
        }
        let mut weights = Vec::with_capacity(m.min(1 << 16));
        let mut vectors = Vec::with_capacity(m.min(1 << 16) * dim);
        for _ in 0..m {
            weights.push(r.f64()?);
            vectors.extend(r.f64s(dim)?);
        }
        mixtures.push(RelationMixture::from_parts(dim, weights, vectors));
    }
    let rest = bytes.len() - r.pos;
    if rest != 0 {
        return Err(CheckpointError::TrailingBytes(rest));
    }
    Ok(ModelParams::from_parts(dim, variance_sum, entities, mixtures))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

pub fn save_checkpoint(model: &ModelParams, path: &Path) -> Result<(), CheckpointError> {
    write_atomic(path, &encode(model))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams, CheckpointError> {
    decode(&fs::read(path)?)
}

/// Sidecar description of a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub entities: usize,
    pub relations: usize,
    pub dim: usize,
    /// Relative to the manifest's directory.
    pub entity_vocab: PathBuf,
    pub relation_vocab: PathBuf,
    /// Resolved configuration used to produce the checkpoint.
    pub config: Vec<(String, String)>,
}

pub fn manifest_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut out = format!(
            "format=transg-checkpoint\nversion={VERSION}\nentities={}\nrelations={}\ndim={}\nentity_vocab={}\nrelation_vocab={}\n",
            self.entities,
            self.relations,
            self.dim,
            self.entity_vocab.display(),
            self.relation_vocab.display()
        );
        for (k, v) in &self.config {
            out.push_str(&format!("config.{k}={v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CheckpointError> {
        let mut fields = std::collections::HashMap::new();
        let mut config = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CheckpointError::Manifest(format!("bad line `{line}`")))?;
            match k.strip_prefix("config.") {
                Some(key) => config.push((key.to_owned(), v.to_owned())),
                None => {
                    fields.insert(k.to_owned(), v.to_owned());
                }
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .cloned()
                .ok_or_else(|| CheckpointError::Manifest(format!("missing `{k}`")))
        };
        let num = |k: &str| -> Result<usize, CheckpointError> {
            get(k)?
                .parse()
                .map_err(|_| CheckpointError::Manifest(format!("`{k}` is not a count")))
        };
        if get("format")? != "transg-checkpoint" {
            return Err(CheckpointError::Manifest("unknown format".into()));
        }
        let version: u32 = num("version")? as u32;
        if version != VERSION {
            return Err(CheckpointError::Version {
                found: version,
                expected: VERSION,
            });
        }
        Ok(Manifest {
            entities: num("entities")?,
            relations: num("relations")?,
            dim: num("dim")?,
            entity_vocab: get("entity_vocab")?.into(),
            relation_vocab: get("relation_vocab")?.into(),
            config,
        })
    }

    fn dims(&self) -> String {
        format!("({}, {}, {})", self.entities, self.relations, self.dim)
    }
}

fn vocab_file(checkpoint: &Path, kind: &str) -> PathBuf {
    let name = checkpoint
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".into());
    PathBuf::from(format!("{name}.{kind}.txt"))
}

/// Writes the checkpoint, its manifest and the two vocabulary files.
pub fn save_with_manifest(
    model: &ModelParams,
    path: &Path,
    entities: &Vocab,
    relations: &Vocab,
    config: Vec<(String, String)>,
) -> Result<Manifest, CheckpointError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let manifest = Manifest {
        entities: model.num_entities(),
        relations: model.num_relations(),
        dim: model.dim(),
        entity_vocab: vocab_file(path, "entities"),
        relation_vocab: vocab_file(path, "relations"),
        config,
    };
    for (file, vocab) in [
        (&manifest.entity_vocab, entities),
        (&manifest.relation_vocab, relations),
    ] {
        let mut text = vocab.names().join("\n");
        text.push('\n');
        write_atomic(&dir.join(file), text.as_bytes())?;
    }
    save_checkpoint(model, path)?;
    write_atomic(&manifest_path(path), manifest.render().as_bytes())?;
    Ok(manifest)
}

/// Loads a checkpoint and checks it against its manifest.
pub fn load_with_manifest(path: &Path) -> Result<(ModelParams, Manifest), CheckpointError> {
    let manifest = Manifest::parse(&fs::read_to_string(manifest_path(path))?)?;
    let model = load_checkpoint(path)?;
    let found = format!(
        "({}, {}, {})",
        model.num_entities(),
        model.num_relations(),
        model.dim()
    );
    if found != manifest.dims() {
        return Err(CheckpointError::DimMismatch {
            expected: manifest.dims(),
            found,
        });
    }
    Ok((model, manifest))
}

impl Manifest {
    /// Verifies that the referenced vocabularies equal the store's.
    pub fn check_vocab(&self, checkpoint: &Path, store: &TripleStore) -> Result<(), CheckpointError> {
        let dir = checkpoint.parent().unwrap_or(Path::new("."));
        for (file, vocab) in [
            (&self.entity_vocab, &store.entities),
            (&self.relation_vocab, &store.relations),
        ] {
            let path = dir.join(file);
            let text = fs::read_to_string(&path)?;
            if !text.lines().eq(vocab.names().iter().map(String::as_str)) {
                return Err(CheckpointError::VocabMismatch { path });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpawnRule;
    use crate::store::Triple;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_model() -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut m = ModelParams::init(6, 3, 4, 2.0, &mut rng);
        let rule = SpawnRule {
            beta: 50.0,
            max_components: 5,
            weight_floor: 1e-6,
        };
        for _ in 0..10 {
            m.maybe_spawn(&Triple::new(0, 1, 2), &rule, 3, &mut rng).unwrap();
        }
        assert!(m.mixture(1).len() > 1);
        m
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample_model();
        let bytes = encode(&m);
        assert_eq!(bytes.len(), encoded_len(&m));
        let back = decode(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn truncation_is_detected_everywhere() {
        let bytes = encode(&sample_model());
        for cut in [0, 4, 8, 11, 20, HEADER_LEN, HEADER_LEN + 9, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(CheckpointError::TrailingBytes(1))));
    }

    #[test]
    fn wrong_magic_and_version() {
        let mut bytes = encode(&sample_model());
        bytes[8] = 9;
        assert!(matches!(
            decode(&bytes),
            Err(CheckpointError::Version { found: 9, .. })
        ));
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(CheckpointError::BadMagic)));
    }

    #[test]
    fn manifest_round_trip_and_dim_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let m = sample_model();
        let ents = Vocab::from_names((0..6).map(|i| format!("e{i}"))).unwrap();
        let rels = Vocab::from_names(["a", "b", "c"]).unwrap();
        let manifest =
            save_with_manifest(&m, &path, &ents, &rels, vec![("dim".into(), "4".into())]).unwrap();
        assert_eq!(Manifest::parse(&manifest.render()).unwrap(), manifest);
        let (back, _) = load_with_manifest(&path).unwrap();
        assert_eq!(back, m);

        // Replace the binary with a model of a different shape.
        let other = ModelParams::init(6, 3, 5, 2.0, &mut ChaCha8Rng::seed_from_u64(0));
        save_checkpoint(&other, &path).unwrap();
        assert!(matches!(
            load_with_manifest(&path),
            Err(CheckpointError::DimMismatch { .. })
        ));
    }

    #[test]
    fn wn18_sized_checkpoint() {
        // 40,943 entities, 18 single-component relations, k = 100.
        let m = ModelParams::from_parts(
            100,
            2.0,
            vec![0.0; 40_943 * 100],
            (0..18).map(|_| RelationMixture::single(vec![0.0; 100])).collect(),
        );
        let size = encoded_len(&m);
        assert_eq!(size, encode(&m).len());
        let mb = size as f64 / 1e6;
        assert!((mb - 32.8).abs() < 0.1, "{mb}");
    }
}
