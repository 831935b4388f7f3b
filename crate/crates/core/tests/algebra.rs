use proptest::prelude::*;
use seqsub::sequence::{canonical_count, enumerate_sequences, sequence_count, SequenceEnumerator};
use seqsub::{ElementSet, GroundSet, Sequence};

fn all(v: usize) -> Vec<Sequence> {
    enumerate_sequences(&GroundSet::numbered(v).unwrap(), v).unwrap().collect()
}

fn subsets(v: usize) -> impl Iterator<Item = ElementSet> {
    (0u64..(1 << v)).map(ElementSet::from_bits)
}

#[test]
fn enumeration_counts() {
    let expected = [1u128, 2, 5, 16, 65, 326, 1957];
    for (v, &n) in expected.iter().enumerate() {
        assert_eq!(sequence_count(v, v), n);
        if v > 0 {
            assert_eq!(all(v).len() as u128, n);
        }
    }
}

#[test]
fn enumeration_is_length_major_and_duplicate_free() {
    let seqs = all(4);
    for w in seqs.windows(2) {
        assert!(w[0].len() < w[1].len() || (w[0].len() == w[1].len() && w[0].items() < w[1].items()));
    }
    let distinct: std::collections::HashSet<_> = seqs.iter().collect();
    assert_eq!(distinct.len(), seqs.len());
}

#[test]
fn concat_is_associative() {
    for v in 1..=4 {
        let seqs = all(v);
        for a in &seqs {
            for b in &seqs {
                let ab = a.concat(b);
                for c in &seqs {
                    assert_eq!(ab.concat(c), a.concat(&b.concat(c)));
                }
            }
        }
    }
}

#[test]
fn concat_identity_and_idempotence() {
    for s in all(4) {
        assert_eq!(s.concat(&Sequence::empty()), s);
        assert_eq!(Sequence::empty().concat(&s), s);
        assert_eq!(s.concat(&s), s);
    }
}

#[test]
fn prefix_implies_subsequence() {
    let seqs = all(4);
    for a in &seqs {
        for b in &seqs {
            if a.is_prefix_of(b) {
                assert!(a.is_subsequence_of(b));
                let rest = Sequence::from_indices(&b.items()[a.len()..]).unwrap();
                assert_eq!(a.concat(&rest), *b);
            }
            assert!(a.is_prefix_of(&a.concat(b)));
        }
    }
}

#[test]
fn removal_commutes_with_concat_and_itself() {
    let seqs = all(4);
    for a in &seqs {
        for u in subsets(4) {
            let removed = a.remove_set(u);
            assert!(removed.is_subsequence_of(a));
            assert!(removed.elements().difference(u) == removed.elements());
            for w in subsets(4) {
                assert_eq!(removed.remove_set(w), a.remove_set(u.union(w)));
                assert_eq!(removed.remove_set(w), a.remove_set(w).remove_set(u));
            }
            for b in &seqs {
                assert_eq!(a.concat(b).remove_set(u), removed.concat(&b.remove_set(u)));
            }
        }
    }
}

#[test]
fn canonical_enumeration_hits_every_orbit_once() {
    // Classes {0, 1} and {2, 3}: a sequence is canonical when each class
    // appears in increasing index order.
    let classes = vec![vec![0, 1], vec![2, 3]];
    let canon: Vec<Sequence> = SequenceEnumerator::new(classes.clone(), 4).collect();
    assert_eq!(canon.len() as u128, canonical_count(&[2, 2], 4));
    let is_canonical = |s: &Sequence| {
        classes.iter().all(|c| {
            let pos: Vec<usize> = s.items().iter().filter(|e| c.contains(e)).copied().collect();
            let used: Vec<usize> = c.iter().take(pos.len()).copied().collect();
            pos == used
        })
    };
    let expected: Vec<Sequence> = all(4).into_iter().filter(is_canonical).collect();
    assert_eq!(canon, expected);
}

fn arb_sequence(v: usize) -> impl Strategy<Value = Sequence> {
    Just((0..v).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_flat_map(move |perm| (0..=v).prop_map(move |n| Sequence::from_indices(&perm[..n]).unwrap()))
}

proptest! {
    #[test]
    fn concat_associative_large(a in arb_sequence(12), b in arb_sequence(12), c in arb_sequence(12)) {
        prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
    }

    #[test]
    fn concat_preserves_order_and_set(a in arb_sequence(12), b in arb_sequence(12)) {
        let ab = a.concat(&b);
        prop_assert!(a.is_prefix_of(&ab));
        prop_assert_eq!(ab.elements(), a.elements().union(b.elements()));
        prop_assert!(b.remove_set(a.elements()).is_subsequence_of(&ab));
    }

    #[test]
    fn removal_distributes(a in arb_sequence(12), b in arb_sequence(12), bits in 0u64..(1 << 12)) {
        let u = ElementSet::from_bits(bits);
        prop_assert_eq!(a.concat(&b).remove_set(u), a.remove_set(u).concat(&b.remove_set(u)));
    }
}
