//! Repeated `n`-words in patterns, repeat covers and block decompositions.
//!
//! Positions are integers; a pattern is a map from a finite union of
//! intervals to symbols. An `n`-window never straddles a gap in the domain.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Range;

use crate::error::RepeatsError;
use crate::sft::Symbol;
use crate::thermo::{measure_of_word, GibbsData};

/// Sorted, disjoint, non-empty half-open intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalSet {
    parts: Vec<Range<usize>>,
}

impl IntervalSet {
    pub fn new(parts: Vec<Range<usize>>) -> Result<Self, RepeatsError> {
        let sorted = parts.windows(2).all(|p| p[0].end <= p[1].start);
        if parts.iter().any(|r| r.is_empty()) || !sorted {
            return Err(RepeatsError::BadIntervals);
        }
        Ok(IntervalSet { parts })
    }

    /// `[0, len)`, or the empty set when `len = 0`.
    pub fn prefix(len: usize) -> Self {
        IntervalSet {
            parts: if len == 0 { Vec::new() } else { vec![0..len] },
        }
    }

    /// Merges possibly overlapping intervals into maximal connected
    /// components. Touching intervals merge.
    pub fn union_of(mut ranges: Vec<Range<usize>>) -> Self {
        ranges.retain(|r| !r.is_empty());
        ranges.sort_by_key(|r| r.start);
        let mut parts: Vec<Range<usize>> = Vec::new();
        for r in ranges {
            match parts.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => parts.push(r),
            }
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[Range<usize>] {
        &self.parts
    }

    /// Number of integer points.
    pub fn len(&self) -> usize {
        self.parts.iter().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, t: usize) -> bool {
        self.parts.iter().any(|r| r.contains(&t))
    }

    pub fn contains_range(&self, r: &Range<usize>) -> bool {
        r.is_empty()
            || self
                .parts
                .iter()
                .any(|p| p.start <= r.start && r.end <= p.end)
    }

    /// Starts `t` with `t + [0, n)` inside a single part, increasing.
    pub fn window_starts(&self, n: usize) -> Vec<usize> {
        self.parts
            .iter()
            .filter(|r| n >= 1 && r.len() >= n)
            .flat_map(|r| r.start..=r.end - n)
            .collect()
    }
}

/// Symbols indexed by the points of an [`IntervalSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern<T> {
    domain: IntervalSet,
    values: Vec<T>,
    /// Offset into `values` of the first point of each part.
    offsets: Vec<usize>,
}

impl<T> Pattern<T> {
    /// `values` lists the symbols at the points of `domain` in increasing
    /// order.
    pub fn new(domain: IntervalSet, values: Vec<T>) -> Result<Self, RepeatsError> {
        if domain.len() != values.len() {
            return Err(RepeatsError::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        let offsets = domain
            .parts
            .iter()
            .scan(0, |acc, r| {
                let o = *acc;
                *acc += r.len();
                Some(o)
            })
            .collect();
        Ok(Pattern {
            domain,
            values,
            offsets,
        })
    }

    /// A word on `[0, len)`.
    pub fn contiguous(values: Vec<T>) -> Self {
        Pattern::new(IntervalSet::prefix(values.len()), values).expect("lengths agree")
    }

    pub fn domain(&self) -> &IntervalSet {
        &self.domain
    }

    /// The symbols on `r`, which must lie inside one part of the domain.
    pub fn slice(&self, r: Range<usize>) -> &[T] {
        let (p, part) = self
            .domain
            .parts
            .iter()
            .enumerate()
            .find(|(_, p)| p.start <= r.start && r.end <= p.end)
            .expect("range inside one part");
        let o = self.offsets[p] + r.start - part.start;
        &self.values[o..o + r.len()]
    }
}

/// An `n`-repeat: the window at `second` repeats the word whose first
/// occurrence starts at `first`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepeatPair {
    pub first: usize,
    pub second: usize,
}

impl RepeatPair {
    pub fn first_interval(&self, n: usize) -> Range<usize> {
        self.first..self.first + n
    }

    pub fn second_interval(&self, n: usize) -> Range<usize> {
        self.second..self.second + n
    }
}

/// All `n`-repeats of `p`, ordered by the start of the second interval.
/// Each is paired with the occurrence of its word with the smallest start.
pub fn find_repeats<T: Eq + Hash>(p: &Pattern<T>, n: usize) -> Vec<RepeatPair> {
    let mut first_seen: HashMap<&[T], usize> = HashMap::new();
    let mut out = Vec::new();
    for t in p.domain.window_starts(n) {
        let w = p.slice(t..t + n);
        match first_seen.get(w) {
            Some(&s) => out.push(RepeatPair {
                first: s,
                second: t,
            }),
            None => {
                first_seen.insert(w, t);
            }
        }
    }
    out
}

/// A set of repeats whose second intervals blanket every repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepeatCover {
    pub n: usize,
    pub pairs: Vec<RepeatPair>,
}

impl RepeatCover {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `A(R)`: the union of the second intervals.
    pub fn area(&self) -> IntervalSet {
        IntervalSet::union_of(
            self.pairs
                .iter()
                .map(|r| r.second_interval(self.n))
                .collect(),
        )
    }
}

/// A repeat cover with at most `4|F|/n` pairs.
///
/// Within each connected component of the union of repeat intervals the
/// cover is a greedy chain: from the current covered end, take the repeat
/// starting furthest right but not beyond it. Consecutive choices then
/// satisfy `t_{i+2} >= t_i + n`, so a component of length `c` costs at most
/// `2c/n + 1` pairs.
pub fn repeat_cover<T: Eq + Hash>(p: &Pattern<T>, n: usize) -> RepeatCover {
    let repeats = find_repeats(p, n);
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < repeats.len() {
        // Component starting at repeats[i].
        let mut covered_end = repeats[i].second;
        let mut j = i;
        loop {
            while j + 1 < repeats.len() && repeats[j + 1].second <= covered_end {
                j += 1;
            }
            if repeats[j].second + n <= covered_end {
                break;
            }
            pairs.push(repeats[j]);
            covered_end = repeats[j].second + n;
        }
        i = j + 1;
    }
    let cover = RepeatCover { n, pairs };
    assert!(
        cover.len() * n <= 4 * p.domain.len(),
        "repeat cover of size {} exceeds 4|F|/n with |F| = {}, n = {n}",
        cover.len(),
        p.domain.len()
    );
    cover
}

/// Slack `|A(R)| - (a + n - j - 1)` in the repeat-area bound, where `a`
/// counts window positions and `j` distinct windows. `None` when there are
/// no repeats (`j = a`) and the bound is vacuous.
pub fn repeat_area_bound_check<T: Eq + Hash>(
    p: &Pattern<T>,
    n: usize,
    cover: &RepeatCover,
) -> Option<i64> {
    let starts = p.domain.window_starts(n);
    let a = starts.len();
    let j = {
        let mut seen = std::collections::HashSet::new();
        starts
            .iter()
            .filter(|&&t| seen.insert(p.slice(t..t + n)))
            .count()
    };
    if j == a {
        return None;
    }
    Some(cover.area().len() as i64 - (a + n - j - 1) as i64)
}

/// The alternating decomposition `u_1 v_1 u_2 ... v_N u_{N+1}` of `[0, k)`
/// induced by a set `A` with `0 not in A`: the `v` blocks are the components
/// of `A` and the `u` blocks those of its complement. Only `u_{N+1}` may be
/// empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    pub u: Vec<Range<usize>>,
    pub v: Vec<Range<usize>>,
}

impl BlockDecomposition {
    /// `N`.
    pub fn repeated_blocks(&self) -> usize {
        self.v.len()
    }

    /// Blocks in interval order.
    pub fn ranges(&self) -> impl Iterator<Item = &Range<usize>> {
        self.u
            .iter()
            .zip(self.v.iter().map(Some).chain(std::iter::once(None)))
            .flat_map(|(u, v)| std::iter::once(u).chain(v))
    }

    /// Concatenation of the blocks of `b` in interval order.
    pub fn reassemble<T: Clone>(&self, b: &[T]) -> Vec<T> {
        self.ranges()
            .flat_map(|r| b[r.clone()].iter().cloned())
            .collect()
    }
}

pub fn block_decomposition(
    k: usize,
    area: &IntervalSet,
) -> Result<BlockDecomposition, RepeatsError> {
    if area.contains(0) {
        return Err(RepeatsError::ZeroInArea);
    }
    if area.parts.last().is_some_and(|r| r.end > k) {
        return Err(RepeatsError::AreaOutOfRange(k));
    }
    let mut u = Vec::with_capacity(area.parts.len() + 1);
    let mut v = Vec::with_capacity(area.parts.len());
    let mut cursor = 0;
    for r in &area.parts {
        u.push(cursor..r.start);
        v.push(r.clone());
        cursor = r.end;
    }
    u.push(cursor..k);
    Ok(BlockDecomposition { u, v })
}

/// Log-slack in `mu(b) <= K^{2N} prod mu(u_m) prod mu(v_m)`, computed with
/// exact cylinder measures. Non-negative iff the bound holds.
pub fn birthday_bound_check(g: &GibbsData, b: &[Symbol], d: &BlockDecomposition, k: f64) -> f64 {
    let rhs = 2.0 * d.repeated_blocks() as f64 * k.ln()
        + d.ranges()
            .map(|r| measure_of_word(g, &b[r.clone()]).ln())
            .sum::<f64>();
    rhs - measure_of_word(g, b).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::Sft;
    use crate::thermo::{gibbs_measure, Potential};
    use proptest::prelude::*;

    fn pat(s: &str) -> Pattern<u8> {
        Pattern::contiguous(s.bytes().collect())
    }

    fn pair(first: usize, second: usize) -> RepeatPair {
        RepeatPair { first, second }
    }

    #[test]
    fn interval_sets() {
        assert!(IntervalSet::new(vec![0..3, 2..5]).is_err());
        assert!(IntervalSet::new(vec![0..0]).is_err());
        let f = IntervalSet::new(vec![0..4, 5..9]).unwrap();
        assert_eq!(f.len(), 8);
        assert_eq!(f.window_starts(3), vec![0, 1, 5, 6]);
        assert_eq!(
            IntervalSet::union_of(vec![2..4, 0..2, 7..9]).parts(),
            &[0..4, 7..9]
        );
    }

    #[test]
    fn find_repeats_examples() {
        assert_eq!(find_repeats(&pat("abab"), 2), vec![pair(0, 2)]);
        assert!(find_repeats(&pat("abcd"), 2).is_empty());
        assert_eq!(find_repeats(&pat("aaaa"), 2), vec![pair(0, 1), pair(0, 2)]);
    }

    #[test]
    fn windows_do_not_straddle_gaps() {
        // "ab" across the gap at 2 is not a window; "ab" at 3 repeats 0.
        let dom = IntervalSet::new(vec![0..2, 3..5]).unwrap();
        let p = Pattern::new(dom, b"abab".to_vec()).unwrap();
        assert_eq!(find_repeats(&p, 2), vec![pair(0, 3)]);
        assert_eq!(p.slice(3..5), b"ab");
    }

    #[test]
    fn cover_examples() {
        let c = repeat_cover(&pat("abab"), 2);
        assert_eq!(c.pairs, vec![pair(0, 2)]);
        assert_eq!(c.area().parts(), &[2..4]);
        let c = repeat_cover(&pat("abcd"), 2);
        assert!(c.is_empty() && c.area().is_empty());
    }

    #[test]
    fn area_bound_examples() {
        let p = pat("aaaa");
        let c = repeat_cover(&p, 2);
        assert_eq!(c.area().parts(), &[1..4]);
        assert_eq!(repeat_area_bound_check(&p, 2, &c), Some(0));
        let p = pat("abab");
        assert_eq!(
            repeat_area_bound_check(&p, 2, &repeat_cover(&p, 2)),
            Some(0)
        );
        let p = pat("abcd");
        assert_eq!(repeat_area_bound_check(&p, 2, &repeat_cover(&p, 2)), None);
    }

    #[test]
    fn decomposition_examples() {
        let d = block_decomposition(4, &IntervalSet::prefix(0)).unwrap();
        assert_eq!(d.u, vec![0..4]);
        assert_eq!(d.repeated_blocks(), 0);
        let d = block_decomposition(4, &IntervalSet::new(vec![2..4]).unwrap()).unwrap();
        assert_eq!((d.u.clone(), d.v.clone()), (vec![0..2, 4..4], vec![2..4]));
        assert_eq!(d.reassemble(b"abab"), b"abab");
        assert_eq!(
            block_decomposition(4, &IntervalSet::new(vec![0..2]).unwrap()),
            Err(RepeatsError::ZeroInArea)
        );
    }

    #[test]
    fn birthday_examples() {
        let full = Sft::full_shift(2).unwrap();
        let g = gibbs_measure(&full, &Potential::zero(&full)).unwrap();
        let b = [0, 1, 1, 0, 1, 0];
        let none = block_decomposition(6, &IntervalSet::prefix(0)).unwrap();
        assert!(birthday_bound_check(&g, &b, &none, 1.0).abs() < 1e-12);
        let d = block_decomposition(6, &IntervalSet::new(vec![1..3, 4..5]).unwrap()).unwrap();
        assert!(birthday_bound_check(&g, &b, &d, 1.0).abs() < 1e-12);
    }

    /// Every window of every repeat is covered, by brute comparison of all
    /// window pairs.
    fn check_cover(p: &Pattern<u8>, n: usize) -> Result<(), TestCaseError> {
        let cover = repeat_cover(p, n);
        let area = cover.area();
        let starts = p.domain().window_starts(n);
        let all = find_repeats(p, n);
        for (i, &s) in starts.iter().enumerate() {
            let earlier = starts[..i]
                .iter()
                .find(|&&t| p.slice(t..t + n) == p.slice(s..s + n));
            if let Some(&t) = earlier {
                prop_assert!(all.contains(&pair(t, s)));
                prop_assert!((s..s + n).all(|x| area.contains(x)));
            }
        }
        for r in &cover.pairs {
            prop_assert!(all.contains(r));
        }
        prop_assert!(cover.len() * n <= 4 * p.domain().len());
        let chosen: Vec<usize> = cover.pairs.iter().map(|r| r.second).collect();
        for w in chosen.windows(3) {
            let same_component = area.contains_range(&(w[0]..w[2] + n));
            if same_component {
                prop_assert!(w[2] >= w[0] + n);
            }
        }
        if let Some(slack) = repeat_area_bound_check(p, n, &cover) {
            prop_assert!(slack >= 0);
        }
        Ok(())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn cover_properties(word in proptest::collection::vec(0u8..3, 1..40), n in 2usize..5) {
            check_cover(&pat_from(word), n)?;
        }

        #[test]
        fn cover_properties_gapped(a in proptest::collection::vec(0u8..2, 4..20), b in proptest::collection::vec(0u8..2, 4..20), n in 2usize..5) {
            let k1 = a.len();
            let dom = IntervalSet::new(vec![0..k1, k1 + 1..k1 + 1 + b.len()]).unwrap();
            let p = Pattern::new(dom, a.into_iter().chain(b).collect()).unwrap();
            check_cover(&p, n)?;
        }

        #[test]
        fn decomposition_reassembles(word in proptest::collection::vec(0u8..2, 2..40), n in 2usize..5) {
            let p = pat_from(word.clone());
            let cover = repeat_cover(&p, n);
            let d = block_decomposition(word.len(), &cover.area()).unwrap();
            prop_assert_eq!(d.reassemble(&word), word);
            prop_assert!(d.repeated_blocks() <= cover.len());
            prop_assert!(d.u[..d.u.len() - 1].iter().all(|r| !r.is_empty()));
        }
    }

    fn pat_from(word: Vec<u8>) -> Pattern<u8> {
        Pattern::contiguous(word)
    }

    #[test]
    fn zero_never_in_repeat_area() {
        // The first window is always a first occurrence.
        let p = pat("aaaaaa");
        assert!(!repeat_cover(&p, 2).area().contains(0));
    }
}
