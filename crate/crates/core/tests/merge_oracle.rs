//! Exhaustive check of group_label against a presence table.

use ethkb_core::pipeline::group_label;
use ethkb_core::MappingLabel::{self, OutOfScope as X, PlusAlpha as A, Shared as S, Unique as U};

/// Indexed by presence bits: ℵ=1, +α=2, ∅=4, ∉S=8.
const TABLE: [Option<MappingLabel>; 16] = [
    None,
    Some(U), // ℵ
    Some(A), // +α
    Some(A), // ℵ +α
    Some(S), // ∅
    Some(A), // ℵ ∅
    Some(A), // +α ∅
    Some(A), // ℵ +α ∅
    Some(X), // ∉S
    Some(X), // ℵ ∉S
    Some(A), // +α ∉S
    Some(A), // ℵ +α ∉S
    Some(S), // ∅ ∉S
    Some(A), // ℵ ∅ ∉S
    Some(A), // +α ∅ ∉S
    Some(A), // ℵ +α ∅ ∉S
];

fn bit(l: MappingLabel) -> usize {
    match l {
        U => 1,
        A => 2,
        S => 4,
        X => 8,
    }
}

fn oracle(labels: &[MappingLabel]) -> MappingLabel {
    TABLE[labels.iter().fold(0, |m, l| m | bit(*l))].unwrap()
}

fn multisets(max: usize) -> Vec<Vec<MappingLabel>> {
    fn extend(
        prefix: &mut Vec<MappingLabel>,
        from: usize,
        max: usize,
        out: &mut Vec<Vec<MappingLabel>>,
    ) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == max {
            return;
        }
        for i in from..4 {
            prefix.push(MappingLabel::ALL[i]);
            extend(prefix, i, max, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 0, max, &mut out);
    out
}

fn permutations(items: &[MappingLabel]) -> Vec<Vec<MappingLabel>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

#[test]
fn matches_oracle_on_all_multisets_up_to_five() {
    let all = multisets(5);
    assert_eq!(all.len(), 125);
    for m in &all {
        assert_eq!(group_label(m).unwrap(), oracle(m), "{m:?}");
    }
}

#[test]
fn permutation_invariant() {
    for m in multisets(5) {
        let expected = group_label(&m).unwrap();
        for p in permutations(&m) {
            assert_eq!(group_label(&p).unwrap(), expected, "{p:?}");
        }
    }
}

#[test]
fn singletons_are_fixed_points() {
    for l in MappingLabel::ALL {
        assert_eq!(group_label(&[l]).unwrap(), l);
    }
}

#[test]
fn empty_multiset_is_an_error() {
    assert!(group_label(&[]).is_err());
}

#[test]
fn named_examples() {
    assert_eq!(group_label(&[S, S, A]).unwrap(), A);
    assert_eq!(group_label(&[U, S]).unwrap(), A);
    assert_eq!(group_label(&[U, X]).unwrap(), X);
    assert_eq!(group_label(&[U, S, X]).unwrap(), A);
    assert_eq!(group_label(&[U, U, U, S]).unwrap(), A);
}
