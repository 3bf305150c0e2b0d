// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Compressed cut catalogue.
//!
//! A cut is stored as a random `b`-bit identifier (the sum of per-vertex
//! random values over its canonical shore), its weight, and a pointer that
//! lets the generating recursion be replayed to recover the full shore.
//! Records are kept sorted by identifier so membership is a binary search
//! followed by one replay and an exact comparison.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{MultiGraph, VertexSet};
use crate::rca::{reconstruct, ReplaySpec};
use crate::rng::StreamKey;

/// Random vertex labelling used to fingerprint shores.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashTable {
    b: u32,
    values: Vec<u64>,
}

impl HashTable {
    /// Draws a table sized for `capacity` distinct cuts:
    /// `b = ⌈phi · log2(capacity)⌉`, at least 1 and at most 64.
    pub fn new(orig_n: usize, capacity: u64, phi: f64, key: StreamKey) -> Result<Self> {
        if !(phi.is_finite() && phi > 0.0) {
            return Err(Error::InvalidParameter(format!("phi = {phi} must be positive")));
        }
        let bits = (phi * (capacity.max(2) as f64).log2()).ceil();
        let b = bits.clamp(1.0, 64.0) as u32;
        let mut rng = key.rng();
        let mask = mask_for(b);
        let values = (0..orig_n).map(|_| rng.random::<u64>() & mask).collect();
        Ok(HashTable { b, values })
    }

    /// Table with explicit values for vertices `1..=values.len()`.
    pub fn from_values(b: u32, values: Vec<u64>) -> Result<Self> {
        if !(1..=64).contains(&b) {
            return Err(Error::InvalidParameter(format!("b = {b} outside 1..=64")));
        }
        let mask = mask_for(b);
        if values.iter().any(|&v| v & !mask != 0) {
            return Err(Error::InvalidParameter("table value wider than b bits".into()));
        }
        Ok(HashTable { b, values })
    }

    pub fn bits(&self) -> u32 {
        self.b
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn orig_n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub(crate) fn mask(&self) -> u64 {
        mask_for(self.b)
    }

    /// Value of original vertex `v` (1-based).
    #[inline]
    pub(crate) fn value(&self, v: u32) -> u64 {
        self.values[v as usize - 1]
    }

    /// Identifier of the cut whose canonical shore is given by `shore`.
    pub fn id_of(&self, shore: &VertexSet) -> Result<u64> {
        if shore.universe() != self.values.len() || !shore.is_proper() {
            return Err(Error::ImproperShore);
        }
        let canon = shore.canonical();
        let mask = self.mask();
        Ok(canon.iter().fold(0u64, |acc, v| acc.wrapping_add(self.values[v - 1]) & mask))
    }
}

fn mask_for(b: u32) -> u64 {
    if b >= 64 {
        u64::MAX
    } else {
        (1u64 << b) - 1
    }
}

/// Identifier of `shore` under `table`, after canonicalizing to the side
/// holding vertex 1.
pub fn cut_id(table: &HashTable, shore: &VertexSet) -> Result<u64> {
    table.id_of(shore)
}

/// Root-to-leaf child indices in a recursion tree, two bits per level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreePath {
    bits: u128,
    len: u8,
}

impl TreePath {
    pub const MAX_LEN: usize = 64;

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Path extended by one step. Child indices must be below 4.
    pub fn push(self, child: u8) -> TreePath {
        assert!(child < 4, "child index {child} exceeds branching limit");
        assert!((self.len as usize) < Self::MAX_LEN, "recursion deeper than {}", Self::MAX_LEN);
        TreePath { bits: self.bits | (child as u128) << (2 * self.len as u32), len: self.len + 1 }
    }

    pub fn get(&self, level: usize) -> u8 {
        ((self.bits >> (2 * level)) & 3) as u8
    }

    pub fn steps(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn from_steps(steps: &[u8]) -> Result<TreePath> {
        if steps.len() > Self::MAX_LEN {
            return Err(Error::Format(format!("path of length {} too long", steps.len())));
        }
        let mut p = TreePath::default();
        for &s in steps {
            if s >= 4 {
                return Err(Error::Format(format!("child index {s} out of range")));
            }
            p = p.push(s);
        }
        Ok(p)
    }
}

/// What is needed to regenerate a stored cut: the run's stream key and the
/// path to the leaf that emitted it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordPointer {
    pub seed: StreamKey,
    pub path: TreePath,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutRecord {
    pub id: u64,
    pub weight: u64,
    pub pointer: RecordPointer,
}

/// Sorted, deduplicated cut catalogue with selection weights `p^|C|`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutCollection {
    pub table: HashTable,
    pub replay: ReplaySpec,
    p: Option<f64>,
    records: Vec<CutRecord>,
    prefix: Vec<f64>,
    sum_pw: f64,
}

/// Sorts by id (ties broken by the remaining fields so the survivor does not
/// depend on input order) and keeps one record per id.
fn sort_dedup(mut records: Vec<CutRecord>) -> Vec<CutRecord> {
    records.sort_unstable_by_key(|r| (r.id, r.weight, r.pointer));
    records.dedup_by_key(|r| r.id);
    records
}

/// Builds the catalogue for failure probability `p`.
pub fn build_collection(records: Vec<CutRecord>, table: HashTable, replay: ReplaySpec, p: f64) -> Result<CutCollection> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
    }
    CutCollection::unweighted(records, table, replay).with_probability(p)
}

impl CutCollection {
    /// Catalogue without selection weights.
    pub fn unweighted(records: Vec<CutRecord>, table: HashTable, replay: ReplaySpec) -> CutCollection {
        let records = sort_dedup(records);
        let n = table.orig_n();
        if n >= 1 && n - 1 < 64 {
            assert!(records.len() as u64 <= (1u64 << (n - 1)), "more distinct ids than cuts");
        }
        CutCollection { table, replay, p: None, records, prefix: Vec::new(), sum_pw: 0.0 }
    }

    /// Attaches prefix sums of `p^weight`.
    pub fn with_probability(mut self, p: f64) -> Result<CutCollection> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
        }
        let mut acc = 0.0;
        self.prefix = self
            .records
            .iter()
            .map(|r| {
                acc += p.powf(r.weight as f64);
                acc
            })
            .collect();
        self.sum_pw = acc;
        self.p = Some(p);
        Ok(self)
    }

    /// Keeps only records satisfying `keep`.
    pub fn retain(mut self, keep: impl Fn(&CutRecord) -> bool) -> Result<CutCollection> {
        self.records.retain(|r| keep(r));
        match self.p {
            Some(p) => self.with_probability(p),
            None => Ok(self),
        }
    }

    pub fn records(&self) -> &[CutRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `Σ p^|C|` over the catalogue; zero when no probability is attached.
    pub fn sum_pw(&self) -> f64 {
        self.sum_pw
    }

    /// Index of the record with identifier `id`.
    pub fn find(&self, id: u64) -> Option<usize> {
        self.records.binary_search_by_key(&id, |r| r.id).ok()
    }

    /// Exact membership: hash lookup, then replay and compare shores.
    pub fn contains(&self, shore: &VertexSet, g: &MultiGraph) -> Result<bool> {
        let id = self.table.id_of(shore)?;
        match self.find(id) {
            None => Ok(false),
            Some(i) => {
                let cut = reconstruct(&self.records[i], g, &self.replay, &self.table)?;
                Ok(cut.shore == shore.canonical())
            }
        }
    }

    /// Histogram of record weights as `(weight, count)` in increasing weight.
    pub fn weight_histogram(&self) -> Vec<(u64, u64)> {
        let mut h = std::collections::BTreeMap::new();
        for r in &self.records {
            *h.entry(r.weight).or_insert(0u64) += 1;
        }
        h.into_iter().collect()
    }

    const MAGIC: &'static [u8; 8] = b"RELCUTA\0";
    const VERSION: u16 = 1;

    /// Writes the versioned binary format described in `docs/formats.md`.
    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(Self::MAGIC)?;
        w.write_all(&Self::VERSION.to_le_bytes())?;
        w.write_all(&(self.table.orig_n() as u32).to_le_bytes())?;
        w.write_all(&[self.table.bits() as u8])?;
        w.write_all(&[self.replay.kind.code()])?;
        w.write_all(&[self.replay.branching])?;
        w.write_all(&self.replay.alpha.to_le_bytes())?;
        w.write_all(&self.p.unwrap_or(f64::NAN).to_le_bytes())?;
        for v in self.table.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        for r in &self.records {
            w.write_all(&r.id.to_le_bytes())?;
            w.write_all(&r.weight.to_le_bytes())?;
            let steps: Vec<u8> = r.pointer.path.steps().collect();
            w.write_all(&[steps.len() as u8])?;
            w.write_all(&steps)?;
            w.write_all(&r.pointer.seed.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<CutCollection> {
        fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf).map_err(|e| Error::Format(e.to_string()))?;
            Ok(buf)
        }
        if &take::<8>(&mut r)? != Self::MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes(take(&mut r)?);
        if version != Self::VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = u32::from_le_bytes(take(&mut r)?) as usize;
        let [b] = take::<1>(&mut r)?;
        let [kind] = take::<1>(&mut r)?;
        let [branching] = take::<1>(&mut r)?;
        let alpha = f64::from_le_bytes(take(&mut r)?);
        let p = f64::from_le_bytes(take(&mut r)?);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(u64::from_le_bytes(take(&mut r)?));
        }
        let table = HashTable::from_values(b as u32, values)?;
        let replay = ReplaySpec::new(crate::rca::RcaKind::from_code(kind)?, alpha, branching)?;
        let count = u64::from_le_bytes(take(&mut r)?);
        let mut records = Vec::new();
        for _ in 0..count {
            let id = u64::from_le_bytes(take(&mut r)?);
            let weight = u64::from_le_bytes(take(&mut r)?);
            let [len] = take::<1>(&mut r)?;
            let mut steps = vec![0u8; len as usize];
            r.read_exact(&mut steps).map_err(|e| Error::Format(e.to_string()))?;
            let path = TreePath::from_steps(&steps)?;
            let seed = StreamKey::from_bytes(take(&mut r)?);
            records.push(CutRecord { id, weight, pointer: RecordPointer { seed, path } });
        }
        let coll = CutCollection::unweighted(records, table, replay);
        if p.is_nan() {
            Ok(coll)
        } else {
            coll.with_probability(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rca::RcaKind;

    fn shore(n: usize, vs: &[usize]) -> VertexSet {
        VertexSet::from_vertices(n, vs.iter().copied()).unwrap()
    }

    fn record(id: u64, weight: u64) -> CutRecord {
        CutRecord { id, weight, pointer: RecordPointer { seed: StreamKey(id as u128), path: TreePath::default() } }
    }

    fn spec() -> ReplaySpec {
        ReplaySpec::new(RcaKind::Halving, 1.0, 4).unwrap()
    }

    #[test]
    fn cut_id_examples() {
        let t = HashTable::from_values(4, vec![5, 9, 12]).unwrap();
        assert_eq!(cut_id(&t, &shore(3, &[1])).unwrap(), 5);
        assert_eq!(cut_id(&t, &shore(3, &[1, 3])).unwrap(), 1);
        assert_eq!(cut_id(&t, &shore(3, &[2, 3])).unwrap(), 5);
        assert!(cut_id(&t, &shore(3, &[])).is_err());
        assert!(cut_id(&t, &shore(3, &[1, 2, 3])).is_err());
    }

    #[test]
    fn width_follows_capacity() {
        let k = StreamKey::from_seed(1);
        assert_eq!(HashTable::new(5, 1024, 3.0, k).unwrap().bits(), 30);
        assert_eq!(HashTable::new(5, 1 << 40, 3.0, k).unwrap().bits(), 64);
        assert_eq!(HashTable::new(5, 1, 3.0, k).unwrap().bits(), 3);
        let t = HashTable::new(50, 16, 3.0, k).unwrap();
        assert!(t.values().iter().all(|&v| v < 1 << 12));
    }

    #[test]
    fn build_examples() {
        let t = HashTable::from_values(8, vec![1, 2, 3]).unwrap();
        let c = build_collection(vec![record(4, 2), record(4, 2)], t.clone(), spec(), 0.1).unwrap();
        assert_eq!(c.len(), 1);
        let c = build_collection(vec![], t.clone(), spec(), 0.1).unwrap();
        assert_eq!((c.len(), c.sum_pw()), (0, 0.0));
        let c = build_collection(vec![record(9, 2), record(3, 2), record(5, 2)], t.clone(), spec(), 0.1).unwrap();
        assert!((c.sum_pw() - 0.03).abs() < 1e-15);
        assert!(c.records().windows(2).all(|w| w[0].id < w[1].id));
        assert!(c.prefix().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*c.prefix().last().unwrap(), c.sum_pw());
        assert!(build_collection(vec![], t, spec(), 1.0).is_err());
    }

    #[test]
    fn dedup_ignores_input_order() {
        let t = HashTable::from_values(8, vec![1, 2, 3]).unwrap();
        let mut a = record(7, 2);
        let b = CutRecord { pointer: RecordPointer { seed: StreamKey(1), path: TreePath::default().push(2) }, ..a };
        a.pointer.seed = StreamKey(2);
        let x = CutCollection::unweighted(vec![a, b], t.clone(), spec());
        let y = CutCollection::unweighted(vec![b, a], t, spec());
        assert_eq!(x, y);
    }

    #[test]
    fn tree_path_round_trip() {
        let p = TreePath::default().push(3).push(0).push(1);
        assert_eq!(p.steps().collect::<Vec<_>>(), vec![3, 0, 1]);
        assert_eq!(TreePath::from_steps(&[3, 0, 1]).unwrap(), p);
        assert!(TreePath::from_steps(&[4]).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let t = HashTable::from_values(8, vec![1, 2, 3]).unwrap();
        let c = build_collection(vec![record(9, 2), record(3, 5)], t, spec(), 0.2).unwrap();
        let mut buf = Vec::new();
        c.write_to(&mut buf).unwrap();
        assert_eq!(CutCollection::read_from(&buf[..]).unwrap(), c);
        buf[0] = b'X';
        assert!(CutCollection::read_from(&buf[..]).is_err());
    }

    #[test]
    fn canonical_id_is_complement_invariant() {
        let t = HashTable::new(9, 100, 3.0, StreamKey::from_seed(3)).unwrap();
        for mask in 1u64..(1 << 9) - 1 {
            let s = VertexSet::from_mask(9, mask);
            assert_eq!(t.id_of(&s).unwrap(), t.id_of(&s.complement()).unwrap());
        }
    }
}
