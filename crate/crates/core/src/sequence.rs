//! Ground sets, duplicate-free sequences and the sequence algebra.
//!
//! Element names are interned to dense indices when a [`GroundSet`] is
//! built; every sequence operation works on those indices and keeps a
//! membership bitmask alongside the ordered items, so ground sets are
//! limited to [`MAX_GROUND_SET`] elements.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ground set (membership is a `u64` bitmask).
pub const MAX_GROUND_SET: usize = 64;

/// A set of element indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ElementSet(bits)
    }

    /// The set `{0, 1, ..., n-1}`.
    pub fn first(n: usize) -> Self {
        if n >= 64 {
            ElementSet(u64::MAX)
        } else {
            ElementSet((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, e: usize) -> bool {
        e < 64 && self.0 & (1u64 << e) != 0
    }

    pub fn insert(&mut self, e: usize) {
        self.0 |= 1u64 << e;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn difference(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = ElementSet::EMPTY;
        for e in iter {
            set.insert(e);
        }
        set
    }
}

/// The universe of selectable elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl GroundSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidInput("ground set must not be empty".into()));
        }
        if names.len() > MAX_GROUND_SET {
            return Err(Error::InvalidInput(format!(
                "ground set has {} elements, at most {MAX_GROUND_SET} are supported",
                names.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == ',' || c == ':') {
                return Err(Error::InvalidInput(format!("invalid element name {name:?}")));
            }
            if lookup.insert(name.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate element {name:?}")));
            }
        }
        Ok(GroundSet { names, lookup })
    }

    /// Ground set `v1, ..., vn`.
    pub fn numbered(n: usize) -> Result<Self> {
        GroundSet::new((1..=n).map(|i| format!("v{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn all(&self) -> ElementSet {
        ElementSet::first(self.len())
    }

    /// Builds a sequence from element names.
    pub fn sequence<S: AsRef<str>>(&self, names: &[S]) -> Result<Sequence> {
        let items = names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                self.index_of(n)
                    .ok_or_else(|| Error::InvalidInput(format!("element {n:?} is not in the ground set")))
            })
            .collect::<Result<Vec<_>>>()?;
        Sequence::from_indices(&items)
    }

    /// Builds a sequence from element indices, checking membership.
    pub fn sequence_of(&self, items: &[usize]) -> Result<Sequence> {
        if let Some(&bad) = items.iter().find(|&&e| e >= self.len()) {
            return Err(Error::InvalidInput(format!("element index {bad} is not in the ground set")));
        }
        Sequence::from_indices(items)
    }

    /// Renders a sequence as `(v2, v1)`.
    pub fn format(&self, s: &Sequence) -> String {
        let inner: Vec<&str> = s.items().iter().map(|&e| self.name(e)).collect();
        format!("({})", inner.join(", "))
    }

    /// Renders a set as `{v1, v3}`.
    pub fn format_set(&self, set: ElementSet) -> String {
        let inner: Vec<&str> = set.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

/// An ordered, duplicate-free tuple of element indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sequence {
    items: Vec<usize>,
    set: ElementSet,
}

impl Sequence {
    pub fn empty() -> Self {
        Sequence::default()
    }

    /// Checks for duplicates and for indices beyond [`MAX_GROUND_SET`].
    pub fn from_indices(items: &[usize]) -> Result<Self> {
        let mut set = ElementSet::EMPTY;
        for &e in items {
            if e >= MAX_GROUND_SET {
                return Err(Error::InvalidInput(format!("element index {e} out of range")));
            }
            if set.contains(e) {
                return Err(Error::InvalidInput(format!("element index {e} repeated in sequence")));
            }
            set.insert(e);
        }
        Ok(Sequence {
            items: items.to_vec(),
            set,
        })
    }

    pub(crate) fn from_vec_unchecked(items: Vec<usize>) -> Self {
        let set = items.iter().copied().collect();
        Sequence { items, set }
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn elements(&self) -> ElementSet {
        self.set
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.set.contains(e)
    }

    /// The first `n` elements.
    pub fn prefix(&self, n: usize) -> Sequence {
        Sequence::from_vec_unchecked(self.items[..n.min(self.len())].to_vec())
    }

    /// Appends `e` unless it is already present.
    pub fn push(&mut self, e: usize) {
        if !self.set.contains(e) {
            self.items.push(e);
            self.set.insert(e);
        }
    }

    /// `self ⊕ other`: `self` followed by the elements of `other` not
    /// already in `self`, in `other`'s order.
    pub fn concat(&self, other: &Sequence) -> Sequence {
        let mut out = self.clone();
        for &e in &other.items {
            out.push(e);
        }
        out
    }

    /// `self ⊕ (e)`.
    pub fn with(&self, e: usize) -> Sequence {
        let mut out = self.clone();
        out.push(e);
        out
    }

    /// `self - u`: drops every member of `u`, keeping the order of the rest.
    pub fn remove_set(&self, u: ElementSet) -> Sequence {
        let items: Vec<usize> = self.items.iter().copied().filter(|&e| !u.contains(e)).collect();
        Sequence {
            items,
            set: self.set.difference(u),
        }
    }

    /// `self ⪯ other`. Since `⊕` only appends non-members after its left
    /// operand, `other = self ⊕ S3` holds for some `S3` exactly when
    /// `other` starts with `self`.
    pub fn is_prefix_of(&self, other: &Sequence) -> bool {
        other.items.starts_with(&self.items)
    }

    /// True when `self = other - U` for some `U ⊆ 𝒱(other)`.
    pub fn is_subsequence_of(&self, other: &Sequence) -> bool {
        if !self.set.is_subset(other.set) {
            return false;
        }
        let mut rest = other.items.iter();
        self.items.iter().all(|e| rest.any(|x| x == e))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "#{e}")?;
        }
        write!(f, ")")
    }
}

/// `Σ_{m=0..max_len} v!/(v-m)!`, saturating.
pub fn sequence_count(v: usize, max_len: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for m in 0..=max_len.min(v) {
        if m > 0 {
            term = term.saturating_mul((v - m + 1) as u128);
        }
        total = total.saturating_add(term);
    }
    total
}

/// Number of sequences of length at most `max_len` over elements grouped in
/// interchangeable classes of the given sizes, counted up to relabelling
/// inside each class.
pub fn canonical_count(class_sizes: &[usize], max_len: usize) -> u128 {
    // ways[m]: arrangements of length m over the classes processed so far,
    // where each class contributes a multiset (order within a class fixed).
    let mut ways = vec![0u128; max_len + 1];
    ways[0] = 1;
    for &size in class_sizes {
        let mut next = vec![0u128; max_len + 1];
        for (m, slot) in next.iter_mut().enumerate() {
            let mut acc: u128 = 0;
            for j in 0..=size.min(m) {
                let t = ways[m - j].saturating_mul(binomial(m, j));
                acc = acc.saturating_add(t);
            }
            *slot = acc;
        }
        ways = next;
    }
    ways.iter().fold(0u128, |a, &w| a.saturating_add(w))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    r
}

/// Every duplicate-free sequence over `gs` of length `0..=max_len`, each
/// once, length-major and then lexicographic by element index.
pub fn enumerate_sequences(gs: &GroundSet, max_len: usize) -> Result<SequenceEnumerator> {
    if max_len > gs.len() {
        return Err(Error::InvalidInput(format!(
            "max_len {max_len} exceeds ground set size {}",
            gs.len()
        )));
    }
    Ok(SequenceEnumerator::new(
        gs.all().iter().map(|e| vec![e]).collect(),
        max_len,
    ))
}

/// Streaming enumerator over sequences built from classes of
/// interchangeable elements.
///
/// Within a class, members must appear in increasing index order, so each
/// orbit under relabelling inside classes is visited exactly once. With
/// singleton classes this is the plain enumeration of all sequences.
#[derive(Clone, Debug)]
pub struct SequenceEnumerator {
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    max_len: usize,
    total: usize,
    current: Option<Vec<usize>>,
    started: bool,
}

impl SequenceEnumerator {
    /// `classes` must be disjoint; members are sorted here.
    pub fn new(mut classes: Vec<Vec<usize>>, max_len: usize) -> Self {
        classes.retain(|c| !c.is_empty());
        for c in &mut classes {
            c.sort_unstable();
        }
        let mut class_of = vec![usize::MAX; MAX_GROUND_SET];
        for (ci, c) in classes.iter().enumerate() {
            for &e in c {
                class_of[e] = ci;
            }
        }
        let total = classes.iter().map(Vec::len).sum();
        SequenceEnumerator {
            classes,
            class_of,
            max_len: max_len.min(total),
            total,
            current: None,
            started: false,
        }
    }

    /// Number of items this enumerator yields in total.
    pub fn count_total(&self) -> u128 {
        let sizes: Vec<usize> = self.classes.iter().map(Vec::len).collect();
        canonical_count(&sizes, self.max_len)
    }

    fn candidates(&self, prefix: &[usize]) -> Vec<usize> {
        let mut used = vec![0usize; self.classes.len()];
        for &e in prefix {
            used[self.class_of[e]] += 1;
        }
        let mut out: Vec<usize> = self
            .classes
            .iter()
            .zip(&used)
            .filter_map(|(c, &u)| c.get(u).copied())
            .collect();
        out.sort_unstable();
        out
    }

    fn fill(&self, items: &mut Vec<usize>, len: usize) {
        while items.len() < len {
            let next = self.candidates(items)[0];
            items.push(next);
        }
    }

    fn advance(&mut self) -> bool {
        let mut items = match self.current.take() {
            Some(items) => items,
            None => return false,
        };
        let m = items.len();
        for pos in (0..m).rev() {
            let cands = self.candidates(&items[..pos]);
            if let Some(&next) = cands.iter().find(|&&c| c > items[pos]) {
                items.truncate(pos);
                items.push(next);
                self.fill(&mut items, m);
                self.current = Some(items);
                return true;
            }
        }
        if m < self.max_len && m < self.total {
            items.clear();
            self.fill(&mut items, m + 1);
            self.current = Some(items);
            return true;
        }
        false
    }
}

impl Iterator for SequenceEnumerator {
    type Item = Sequence;

    fn next(&mut self) -> Option<Sequence> {
        if !self.started {
            self.started = true;
            self.current = Some(Vec::new());
            return Some(Sequence::empty());
        }
        if self.advance() {
            self.current.as_ref().map(|items| Sequence::from_vec_unchecked(items.clone()))
        } else {
            None
        }
    }
}

/// Dense index over all sequences of a ground set up to a length, with a
/// precomputed concatenation table. Used by the exhaustive checkers so the
/// inner loops are array lookups.
#[derive(Clone, Debug)]
pub struct SequenceIndex {
    seqs: Vec<Sequence>,
    ids: HashMap<Sequence, u32>,
    concat: Vec<u32>,
    max_len: usize,
}

impl SequenceIndex {
    pub const NONE: u32 = u32::MAX;

    pub fn new(gs: &GroundSet, max_len: usize) -> Result<Self> {
        let seqs: Vec<Sequence> = enumerate_sequences(gs, max_len)?.collect();
        let n = seqs.len();
        let ids: HashMap<Sequence, u32> = seqs.iter().cloned().enumerate().map(|(i, s)| (s, i as u32)).collect();
        let mut concat = vec![Self::NONE; n * n];
        for (i, a) in seqs.iter().enumerate() {
            for (j, b) in seqs.iter().enumerate() {
                if a.elements().union(b.elements()).len() <= max_len {
                    concat[i * n + j] = ids[&a.concat(b)];
                }
            }
        }
        Ok(SequenceIndex {
            seqs,
            ids,
            concat,
            max_len,
        })
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.seqs
    }

    pub fn get(&self, id: u32) -> &Sequence {
        &self.seqs[id as usize]
    }

    pub fn id_of(&self, s: &Sequence) -> Option<u32> {
        self.ids.get(s).copied()
    }

    /// Id of `a ⊕ b`, or [`Self::NONE`] when the result is longer than the
    /// index covers.
    pub fn concat(&self, a: u32, b: u32) -> u32 {
        self.concat[a as usize * self.seqs.len() + b as usize]
    }

    /// Ids of all prefixes of `s` (including `()` and `s` itself).
    pub fn prefixes(&self, id: u32) -> Vec<u32> {
        let s = self.get(id);
        (0..=s.len()).map(|n| self.ids[&s.prefix(n)]).collect()
    }

    /// Ids of all subsequences of `s` (including `()` and `s` itself),
    /// ordered by the bitmask of kept positions.
    pub fn subsequences(&self, id: u32) -> Vec<u32> {
        let s = self.get(id);
        let n = s.len();
        (0u32..(1u32 << n))
            .map(|keep| {
                let items: Vec<usize> = (0..n).filter(|p| keep & (1 << p) != 0).map(|p| s.items()[p]).collect();
                self.ids[&Sequence::from_vec_unchecked(items)]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gs(n: usize) -> GroundSet {
        GroundSet::numbered(n).unwrap()
    }

    #[test]
    fn concat_drops_members_of_left_operand() {
        let g = gs(3);
        let a = g.sequence(&["v2", "v1"]).unwrap();
        let b = g.sequence(&["v1", "v3"]).unwrap();
        assert_eq!(a.concat(&b), g.sequence(&["v2", "v1", "v3"]).unwrap());
        let b = g.sequence(&["v3", "v2"]).unwrap();
        assert_eq!(Sequence::empty().concat(&b), b);
    }

    #[test]
    fn disjoint_concat_is_plain_concatenation() {
        let g = gs(5);
        let a = g.sequence(&["v1", "v4"]).unwrap();
        let b = g.sequence(&["v5", "v2", "v3"]).unwrap();
        let c = a.concat(&b);
        assert_eq!(c.len(), 5);
        assert_eq!(c.items(), &[0, 3, 4, 1, 2]);
    }

    #[test]
    fn remove_set_example() {
        let g = gs(5);
        let s = g.sequence(&["v2", "v1", "v5", "v3"]).unwrap();
        let u: ElementSet = ["v2", "v4", "v5"].iter().map(|n| g.index_of(n).unwrap()).collect();
        assert_eq!(s.remove_set(u), g.sequence(&["v1", "v3"]).unwrap());
        assert_eq!(s.remove_set(ElementSet::EMPTY), s);
        let s = g.sequence(&["v1", "v2"]).unwrap();
        assert!(s.remove_set(s.elements()).is_empty());
    }

    #[test]
    fn prefix_relation() {
        let g = gs(3);
        let v2 = g.sequence(&["v2"]).unwrap();
        let v3 = g.sequence(&["v3"]).unwrap();
        let v23 = g.sequence(&["v2", "v3"]).unwrap();
        assert!(v2.is_prefix_of(&v23));
        assert!(Sequence::empty().is_prefix_of(&v23));
        assert!(!v3.is_prefix_of(&v23));
        assert!(v3.is_subsequence_of(&v23));
    }

    #[test]
    fn subsequence_relation() {
        let g = gs(5);
        let s = g.sequence(&["v2", "v1", "v5", "v3"]).unwrap();
        assert!(g.sequence(&["v1", "v3"]).unwrap().is_subsequence_of(&s));
        assert!(!g.sequence(&["v3", "v1"]).unwrap().is_subsequence_of(&s));
        assert!(!g.sequence(&["v4"]).unwrap().is_subsequence_of(&s));
    }

    #[test]
    fn enumeration_order_and_counts() {
        let g = gs(3);
        let one: Vec<Sequence> = enumerate_sequences(&g, 1).unwrap().collect();
        assert_eq!(one.len(), 4);
        assert!(one[0].is_empty());
        assert_eq!(one[1].items(), &[0]);
        assert_eq!(one[3].items(), &[2]);
        assert_eq!(enumerate_sequences(&g, 3).unwrap().count(), 16);
        assert_eq!(enumerate_sequences(&gs(5), 5).unwrap().count(), 326);
        assert_eq!(sequence_count(5, 5), 326);
        let two: Vec<Vec<usize>> = enumerate_sequences(&g, 2)
            .unwrap()
            .skip(4)
            .map(|s| s.items().to_vec())
            .collect();
        assert_eq!(two, vec![vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 2], vec![2, 0], vec![2, 1]]);
    }

    #[test]
    fn enumeration_rejects_long_max_len() {
        assert!(matches!(enumerate_sequences(&gs(3), 4), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn canonical_enumeration_counts_orbits() {
        // {0} and {1,2} interchangeable: orbits of sequences over 3 elements.
        let e = SequenceEnumerator::new(vec![vec![0], vec![1, 2]], 3);
        let expected = e.count_total();
        let seqs: Vec<Sequence> = e.collect();
        assert_eq!(seqs.len() as u128, expected);
        // (), (0), (1), (0,1), (1,0), (1,2), (0,1,2), (1,0,2), (1,2,0)
        assert_eq!(seqs.len(), 9);
        for s in &seqs {
            let pos1 = s.items().iter().position(|&e| e == 1);
            let pos2 = s.items().iter().position(|&e| e == 2);
            if let Some(p2) = pos2 {
                assert!(pos1.unwrap() < p2);
            }
        }
        assert_eq!(canonical_count(&[1, 1, 1], 3), 16);
    }

    #[test]
    fn index_concat_table_matches_concat() {
        let g = gs(3);
        let idx = SequenceIndex::new(&g, 3).unwrap();
        for (i, a) in idx.sequences().iter().enumerate() {
            for (j, b) in idx.sequences().iter().enumerate() {
                let c = idx.concat(i as u32, j as u32);
                assert_eq!(idx.get(c), &a.concat(b));
            }
        }
        let s = g.sequence(&["v2", "v3", "v1"]).unwrap();
        let id = idx.id_of(&s).unwrap();
        assert_eq!(idx.prefixes(id).len(), 4);
        assert_eq!(idx.subsequences(id).len(), 8);
    }
}
