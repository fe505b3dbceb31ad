//! Words over `C ∪ {T}` and their rewriting into words over the derived set
//! `{c T c^dagger}` with the same T-count.

use super::{GateIndex, ProjectiveGate};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    /// Index into the word's alphabet.
    pub index: usize,
    /// Whether this letter costs one T.
    pub is_t: bool,
}

/// A product of alphabet letters, read left to right as a matrix product.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    /// Word over the alphabet `group ++ [T]` from a string of group indices
    /// (`Some(i)`) and T letters (`None`).
    pub fn over_completion(symbols: &[Option<usize>], group_size: usize) -> Self {
        Self::new(
            symbols
                .iter()
                .map(|s| match s {
                    Some(i) => Letter { index: *i, is_t: false },
                    None => Letter { index: group_size, is_t: true },
                })
                .collect(),
        )
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn t_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_t).count()
    }

    pub fn evaluate(&self, alphabet: &[ProjectiveGate]) -> ProjectiveGate {
        self.letters
            .iter()
            .fold(ProjectiveGate::identity(), |acc, l| acc * alphabet[l.index])
    }
}

/// Rewrites a word over `group ++ [T]` (group letters `is_t = false` indexing
/// `group`, T letters flagged) into a word over `derived_set(group, T)` and the
/// residual group element.
///
/// With `d_j` the product of the group letters preceding the j-th T, each T
/// becomes the derived letter `d_j T d_j^dagger`, whose index in the derived
/// alphabet is the index of `d_j` in `group`. The residual is the product of all
/// group letters, so `word = rewritten . residual`.
pub fn rewrite_to_derived(
    word: &Word,
    group: &[ProjectiveGate],
    _t: &ProjectiveGate,
) -> Result<(Word, ProjectiveGate)> {
    let index = GateIndex::from_gates(group);
    let mut prefix = ProjectiveGate::identity();
    let mut out = Vec::with_capacity(word.t_count());
    for letter in word.letters() {
        if letter.is_t {
            let i = index.find(&prefix).ok_or(Error::NotAGroup)?;
            out.push(Letter { index: i, is_t: true });
        } else {
            let c = group.get(letter.index).ok_or_else(|| {
                Error::InvalidArgument(format!("letter {} outside the group", letter.index))
            })?;
            prefix = prefix * *c;
        }
    }
    Ok((Word::new(out), prefix))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{clifford_group, derived_set, haar_sample, projective_distance};
    use crate::rng::{purpose, stream};
    use rand::Rng;

    fn completion_alphabet(group: &[ProjectiveGate], t: ProjectiveGate) -> Vec<ProjectiveGate> {
        let mut a = group.to_vec();
        a.push(t);
        a
    }

    #[test]
    fn single_t_is_unchanged() {
        let cliff = clifford_group();
        let t = haar_sample(&mut stream(1, purpose::GATE, 0));
        let word = Word::over_completion(&[None], cliff.len());
        let (out, residual) = rewrite_to_derived(&word, cliff.gates(), &t).unwrap();
        let derived = derived_set(&cliff, &t).unwrap();
        assert_eq!(out.t_count(), 1);
        assert!(projective_distance(&out.evaluate(derived.gates()), &t) < 1e-12);
        assert!(projective_distance(&residual, &ProjectiveGate::identity()) < 1e-12);
    }

    #[test]
    fn c_then_t_becomes_conjugate_and_residual() {
        let cliff = clifford_group();
        let t = haar_sample(&mut stream(2, purpose::GATE, 0));
        let c = cliff.gates()[7];
        let word = Word::over_completion(&[Some(7), None], cliff.len());
        let (out, residual) = rewrite_to_derived(&word, cliff.gates(), &t).unwrap();
        let derived = derived_set(&cliff, &t).unwrap();
        assert_eq!(out.len(), 1);
        assert!(projective_distance(&out.evaluate(derived.gates()), &t.conjugate_by(&c)) < 1e-12);
        assert!(projective_distance(&residual, &c) < 1e-12);
    }

    #[test]
    fn random_words_keep_product_and_t_count() {
        let cliff = clifford_group();
        let mut rng = stream(3, purpose::GATE, 0);
        let t = haar_sample(&mut rng);
        let derived = derived_set(&cliff, &t).unwrap();
        let alphabet = completion_alphabet(cliff.gates(), t);
        for _ in 0..50 {
            // 20 letters, 7 of them T
            let mut symbols: Vec<Option<usize>> = (0..13)
                .map(|_| Some(rng.random_range(0..cliff.len())))
                .chain(std::iter::repeat_n(None, 7))
                .collect();
            for i in (1..symbols.len()).rev() {
                symbols.swap(i, rng.random_range(0..=i));
            }
            let word = Word::over_completion(&symbols, cliff.len());
            assert_eq!(word.t_count(), 7);
            let (out, residual) = rewrite_to_derived(&word, cliff.gates(), &t).unwrap();
            assert_eq!(out.t_count(), 7);
            let lhs = word.evaluate(&alphabet);
            let rhs = out.evaluate(derived.gates()) * residual;
            assert!(projective_distance(&lhs, &rhs) < 1e-10);
        }
    }
}
