//! `MDL1` model container: magic, kind byte (1 gbdt, 2 forest, 3 svc), u64 LE
//! payload length, then the payload. All integers are little-endian; counts
//! and indices are u32, reals are f64 bit patterns, so a round trip is exact.
//!
//! A tree is a u32 node count followed by its nodes in arena order: tag 0
//! (leaf) + f64 value, or tag 1 (split) + u32 feature + f64 threshold + u32
//! left + u32 right. Child indices must point forward.

use std::fs;
use std::path::Path;

use super::{ClassifierError, ForestModel, GbdtModel, LinearSvcModel, Model, Tree, TreeNode};

pub const MODEL_MAGIC: &[u8; 4] = b"MDL1";

const KIND_GBDT: u8 = 1;
const KIND_FOREST: u8 = 2;
const KIND_SVC: u8 = 3;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("count exceeds u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn tree(&mut self, t: &Tree) {
        self.u32(t.nodes.len());
        for node in &t.nodes {
            match node {
                TreeNode::Leaf { value } => {
                    self.u8(0);
                    self.f64(*value);
                }
                TreeNode::Split { feature, threshold, left, right } => {
                    self.u8(1);
                    self.u32(*feature);
                    self.f64(*threshold);
                    self.u32(*left);
                    self.u32(*right);
                }
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn fail<T>(msg: impl Into<String>) -> Result<T, ClassifierError> {
    Err(ClassifierError::Codec(msg.into()))
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ClassifierError> {
        if self.buf.len() - self.pos < n {
            return fail(format!("truncated at byte {}", self.pos));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, ClassifierError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize, ClassifierError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64, ClassifierError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, ClassifierError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    /// Element count, bounded by the bytes left so corrupt counts cannot
    /// trigger huge allocations.
    fn count(&mut self, min_bytes_each: usize) -> Result<usize, ClassifierError> {
        let n = self.u32()?;
        if n.saturating_mul(min_bytes_each) > self.buf.len() - self.pos {
            return fail(format!("count {n} exceeds remaining payload"));
        }
        Ok(n)
    }
    fn tree(&mut self, n_features: usize, leaf_ok: impl Fn(f64) -> bool) -> Result<Tree, ClassifierError> {
        let n = self.count(9)?;
        if n == 0 {
            return fail("empty tree");
        }
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            match self.u8()? {
                0 => {
                    let value = self.f64()?;
                    if !leaf_ok(value) {
                        return fail(format!("bad leaf value {value}"));
                    }
                    nodes.push(TreeNode::Leaf { value });
                }
                1 => {
                    let feature = self.u32()?;
                    let threshold = self.f64()?;
                    let left = self.u32()?;
                    let right = self.u32()?;
                    if feature >= n_features || left <= i || right <= i || left >= n || right >= n || left == right {
                        return fail(format!("bad split node {i}"));
                    }
                    nodes.push(TreeNode::Split { feature, threshold, left, right });
                }
                tag => return fail(format!("unknown node tag {tag}")),
            }
        }
        Ok(Tree { nodes })
    }
}

fn positive_count(r: &mut Reader, what: &str) -> Result<usize, ClassifierError> {
    let v = r.u32()?;
    if v == 0 {
        return fail(format!("{what} is zero"));
    }
    Ok(v)
}

/// Serializes any trained head.
pub fn encode_model(model: &Model) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    let kind = match model {
        Model::Gbdt(m) => {
            w.u32(m.n_classes);
            w.u32(m.n_features);
            w.f64(m.learning_rate);
            w.f64(m.lambda);
            w.f64(m.gamma);
            w.u32(m.max_depth);
            w.f64(m.base_score);
            w.u32(m.trees.len());
            for round in &m.trees {
                for t in round {
                    w.tree(t);
                }
            }
            KIND_GBDT
        }
        Model::Forest(m) => {
            w.u32(m.n_classes);
            w.u32(m.n_features);
            w.u32(m.max_features);
            w.u64(m.seed);
            w.u32(m.trees.len());
            for t in &m.trees {
                w.tree(t);
            }
            KIND_FOREST
        }
        Model::Svc(m) => {
            w.u32(m.n_classes);
            w.u32(m.n_features);
            w.f64(m.c);
            for v in &m.weights {
                w.f64(*v);
            }
            KIND_SVC
        }
    };
    let payload = w.0;
    let mut out = Vec::with_capacity(13 + payload.len());
    out.extend_from_slice(MODEL_MAGIC);
    out.push(kind);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<Model, ClassifierError> {
    if bytes.len() < 13 {
        return fail("shorter than the container header");
    }
    if &bytes[..4] != MODEL_MAGIC {
        return fail("bad magic");
    }
    let kind = bytes[4];
    let len = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
    let payload = &bytes[13..];
    if payload.len() as u64 != len {
        return fail(format!("payload is {} bytes, header says {len}", payload.len()));
    }
    let mut r = Reader { buf: payload, pos: 0 };
    let model = match kind {
        KIND_GBDT => {
            let n_classes = positive_count(&mut r, "n_classes")?;
            let n_features = r.u32()?;
            let learning_rate = r.f64()?;
            let lambda = r.f64()?;
            let gamma = r.f64()?;
            let max_depth = r.u32()?;
            let base_score = r.f64()?;
            let rounds = r.count(n_classes.saturating_mul(13))?;
            let mut trees = Vec::with_capacity(rounds);
            for _ in 0..rounds {
                let round = (0..n_classes)
                    .map(|_| r.tree(n_features, f64::is_finite))
                    .collect::<Result<Vec<_>, _>>()?;
                trees.push(round);
            }
            Model::Gbdt(GbdtModel { n_classes, n_features, learning_rate, lambda, gamma, max_depth, base_score, trees })
        }
        KIND_FOREST => {
            let n_classes = positive_count(&mut r, "n_classes")?;
            let n_features = r.u32()?;
            let max_features = r.u32()?;
            let seed = r.u64()?;
            let n_trees = r.count(13)?;
            let is_class = |v: f64| v >= 0.0 && v.fract() == 0.0 && (v as usize) < n_classes;
            let trees = (0..n_trees)
                .map(|_| r.tree(n_features, is_class))
                .collect::<Result<Vec<_>, _>>()?;
            Model::Forest(ForestModel { n_classes, n_features, max_features, seed, trees })
        }
        KIND_SVC => {
            let n_classes = positive_count(&mut r, "n_classes")?;
            let n_features = r.u32()?;
            let c = r.f64()?;
            let total = n_classes
                .checked_mul(n_features + 1)
                .filter(|t| t.saturating_mul(8) <= payload.len())
                .ok_or_else(|| ClassifierError::Codec("weight count exceeds payload".into()))?;
            let weights = (0..total).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
            Model::Svc(LinearSvcModel { n_classes, n_features, c, weights })
        }
        other => return fail(format!("unknown model kind {other}")),
    };
    if r.pos != payload.len() {
        return fail(format!("{} trailing bytes", payload.len() - r.pos));
    }
    Ok(model)
}

pub fn save_model(path: &Path, model: &Model) -> Result<(), ClassifierError> {
    fs::write(path, encode_model(model)).map_err(|e| ClassifierError::Codec(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<Model, ClassifierError> {
    let bytes = fs::read(path).map_err(|e| ClassifierError::Codec(format!("{}: {e}", path.display())))?;
    decode_model(&bytes)
}
