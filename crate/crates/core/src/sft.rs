//! Vertex-shift presentations of subshifts of finite type.
//!
//! Every system is normalised to a memory-one vertex shift: a 0/1 transition
//! matrix over presentation symbols `0..size`. Longer-range constraints are
//! absorbed by recoding onto blocks. Each presentation symbol carries a label,
//! the block of original-alphabet symbols it stands for, so words can always
//! be read back in the user's alphabet.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::SftError;

/// A presentation symbol. Always `< size` of the alphabet it belongs to.
pub type Symbol = u32;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// A finite alphabet `{0, .., size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self, SftError> {
        if size == 0 {
            return Err(SftError::EmptyAlphabet);
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, s: Symbol) -> bool {
        (s as usize) < self.size
    }
}

/// A finite word over some alphabet.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Symbol> {
        self.0
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

// Hash/Eq agree with the slice impls, so maps keyed by Word accept &[Symbol].
impl Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

/// Words are written one character per symbol using `0-9a-z`.
impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            match DIGITS.get(s as usize) {
                Some(&c) => write!(f, "{}", c as char)?,
                None => write!(f, "<{}>", s)?,
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = SftError;

    fn from_str(s: &str) -> Result<Self, SftError> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .ok_or_else(|| SftError::BadWord(s.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// A trimmed vertex shift.
///
/// Invariant: every symbol has at least one successor and one predecessor,
/// so every symbol lies on a bi-infinite path. A presentation with zero
/// symbols is the empty system.
#[derive(Clone, Debug, PartialEq)]
pub struct Sft {
    base: Alphabet,
    size: usize,
    transitions: Vec<bool>,
    labels: Vec<Word>,
}

impl Sft {
    /// Builds and trims a vertex shift on `alphabet` from a row-major
    /// `size x size` transition table. Symbols are their own labels.
    pub fn from_matrix(alphabet: Alphabet, transitions: Vec<bool>) -> Result<Self, SftError> {
        let size = alphabet.size();
        if transitions.len() != size * size {
            return Err(SftError::ShapeMismatch {
                expected: size * size,
                got: transitions.len(),
            });
        }
        let labels = (0..size as Symbol).map(|a| Word(vec![a])).collect();
        Ok(Self::from_graph(alphabet, labels, transitions).0)
    }

    /// The full shift on `size` symbols.
    pub fn full_shift(size: usize) -> Result<Self, SftError> {
        let alphabet = Alphabet::new(size)?;
        Self::from_matrix(alphabet, vec![true; size * size])
    }

    /// Trims a labelled graph. Returns the surviving presentation together
    /// with the original index of every surviving symbol (in order).
    pub(crate) fn from_graph(
        base: Alphabet,
        labels: Vec<Word>,
        transitions: Vec<bool>,
    ) -> (Self, Vec<usize>) {
        let size = labels.len();
        debug_assert_eq!(transitions.len(), size * size);
        let kept = trim(size, &transitions);
        let new_size = kept.len();
        let mut t = vec![false; new_size * new_size];
        for (i, &a) in kept.iter().enumerate() {
            for (j, &b) in kept.iter().enumerate() {
                t[i * new_size + j] = transitions[a * size + b];
            }
        }
        let new_labels = kept.iter().map(|&a| labels[a].clone()).collect();
        (
            Sft {
                base,
                size: new_size,
                transitions: t,
                labels: new_labels,
            },
            kept,
        )
    }

    /// Builds the SFT of points over `alphabet` avoiding every word in
    /// `forbidden`.
    ///
    /// With forbidden words of length at most 2 the result lives on the
    /// alphabet itself; with length `m >= 3` it is the vertex shift on
    /// `(m-1)`-blocks. Shorter forbidden words are allowed alongside longer
    /// ones and forbid every block containing them.
    pub fn from_forbidden_words(alphabet: Alphabet, forbidden: &[Word]) -> Result<Self, SftError> {
        for w in forbidden {
            if w.is_empty() {
                return Err(SftError::BadWord(String::new()));
            }
            if let Some(&s) = w.iter().find(|&&s| !alphabet.contains(s)) {
                return Err(SftError::SymbolOutOfRange {
                    symbol: s,
                    size: alphabet.size(),
                });
            }
        }
        let m = forbidden.iter().map(|w| w.len()).max().unwrap_or(1);
        let banned: HashSet<&[Symbol]> = forbidden.iter().map(|w| w.as_slice()).collect();
        let lengths: Vec<usize> = {
            let mut l: Vec<usize> = forbidden.iter().map(|w| w.len()).collect();
            l.sort_unstable();
            l.dedup();
            l
        };
        let contains_banned = |word: &[Symbol]| {
            lengths
                .iter()
                .any(|&len| len <= word.len() && word.windows(len).any(|sub| banned.contains(sub)))
        };

        let q = alphabet.size();
        let block = m.saturating_sub(1).max(1);
        let blocks: Vec<Word> = all_words(q, block);
        let index: HashMap<&[Symbol], usize> = blocks
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_slice(), i))
            .collect();
        let size = blocks.len();
        let mut transitions = vec![false; size * size];
        let mut buf = Vec::with_capacity(block + 1);
        for (i, u) in blocks.iter().enumerate() {
            if contains_banned(u) {
                continue;
            }
            for b in 0..q as Symbol {
                buf.clear();
                buf.extend_from_slice(u);
                buf.push(b);
                if contains_banned(&buf) {
                    continue;
                }
                let j = index[&buf[1..]];
                transitions[i * size + j] = true;
            }
        }
        Ok(Self::from_graph(alphabet, blocks, transitions).0)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// The alphabet of presentation symbols. Errors on the empty system.
    pub fn alphabet(&self) -> Result<Alphabet, SftError> {
        Alphabet::new(self.size).map_err(|_| SftError::Empty)
    }

    /// The user's original alphabet, which labels are written in.
    pub fn base_alphabet(&self) -> Alphabet {
        self.base
    }

    /// Length of the original-alphabet block each symbol stands for.
    pub fn block_len(&self) -> usize {
        self.labels.first().map_or(1, |l| l.len())
    }

    pub fn label(&self, a: Symbol) -> &Word {
        &self.labels[a as usize]
    }

    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.transitions[a as usize * self.size + b as usize]
    }

    pub fn successors(&self, a: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        let row = &self.transitions[a as usize * self.size..(a as usize + 1) * self.size];
        row.iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(b, _)| b as Symbol)
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().filter(|&&t| t).count()
    }

    pub fn transition_matrix(&self) -> &[bool] {
        &self.transitions
    }

    /// True iff the system has at least two points.
    ///
    /// In a trimmed presentation distinct symbols give distinct points, and a
    /// single symbol admits only its fixed point.
    pub fn is_nontrivial(&self) -> bool {
        self.size >= 2
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.size) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    /// Reads a presentation word back in the original alphabet.
    pub fn decode(&self, w: &[Symbol]) -> Word {
        let mut out = Vec::new();
        for (i, &s) in w.iter().enumerate() {
            let l = self.label(s);
            if i == 0 {
                out.extend_from_slice(l);
            } else if let Some(&last) = l.last() {
                out.push(last);
            }
        }
        Word(out)
    }
}

/// Iteratively removes symbols without a successor or predecessor. Returns the
/// surviving symbols in increasing order.
fn trim(size: usize, t: &[bool]) -> Vec<usize> {
    let mut alive = vec![true; size];
    let mut out_deg = vec![0usize; size];
    let mut in_deg = vec![0usize; size];
    for a in 0..size {
        for b in 0..size {
            if t[a * size + b] {
                out_deg[a] += 1;
                in_deg[b] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..size)
        .filter(|&a| out_deg[a] == 0 || in_deg[a] == 0)
        .collect();
    while let Some(a) = queue.pop_front() {
        if !alive[a] {
            continue;
        }
        alive[a] = false;
        for b in 0..size {
            if t[a * size + b] && alive[b] {
                in_deg[b] -= 1;
                if in_deg[b] == 0 {
                    queue.push_back(b);
                }
            }
            if t[b * size + a] && alive[b] {
                out_deg[b] -= 1;
                if out_deg[b] == 0 {
                    queue.push_back(b);
                }
            }
        }
    }
    (0..size).filter(|&a| alive[a]).collect()
}

/// All words of length `m` over `q` symbols, lexicographically.
fn all_words(q: usize, m: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..m {
        let mut next = Vec::with_capacity(out.len() * q);
        for w in &out {
            for s in 0..q as Symbol {
                let mut v = w.0.clone();
                v.push(s);
                next.push(Word(v));
            }
        }
        out = next;
    }
    out
}

/// Whether the transition matrix is primitive.
///
/// Decided as irreducible plus aperiodic: one strongly connected class and
/// gcd of `level(a) + 1 - level(b)` over all edges equal to one, with levels
/// from a breadth-first search. This is equivalent to some power below the
/// Wielandt bound `(size-1)^2 + 1` being strictly positive.
pub fn is_mixing(sft: &Sft) -> Result<bool, SftError> {
    if sft.is_empty() {
        return Err(SftError::Empty);
    }
    let n = sft.size();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(a) = queue.pop_front() {
        for b in sft.successors(a as Symbol) {
            let b = b as usize;
            if level[b] == usize::MAX {
                level[b] = level[a] + 1;
                queue.push_back(b);
            }
        }
    }
    if level.contains(&usize::MAX) {
        return Ok(false);
    }
    // Backward reachability of 0.
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0usize];
    while let Some(b) = stack.pop() {
        for a in 0..n {
            if !seen[a] && sft.allows(a as Symbol, b as Symbol) {
                seen[a] = true;
                stack.push(a);
            }
        }
    }
    if seen.contains(&false) {
        return Ok(false);
    }
    let mut g = 0usize;
    for a in 0..n {
        for b in sft.successors(a as Symbol) {
            let d = (level[a] + 1).abs_diff(level[b as usize]);
            g = gcd(g, d);
        }
    }
    Ok(g == 1)
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `B_m` of the presentation in lexicographic order.
///
/// This order is the canonical word index used everywhere else (bitsets,
/// CSV output and the order in which the sampler consumes uniforms).
pub fn enumerate_words(sft: &Sft, m: usize) -> Vec<Word> {
    if m == 0 {
        return vec![Word::empty()];
    }
    let mut out = Vec::new();
    let mut stack: Vec<Symbol> = Vec::with_capacity(m);
    fn rec(sft: &Sft, m: usize, stack: &mut Vec<Symbol>, out: &mut Vec<Word>) {
        if stack.len() == m {
            out.push(Word(stack.clone()));
            return;
        }
        let next: Vec<Symbol> = match stack.last() {
            None => (0..sft.size() as Symbol).collect(),
            Some(&a) => sft.successors(a).collect(),
        };
        for b in next {
            stack.push(b);
            rec(sft, m, stack, out);
            stack.pop();
        }
    }
    rec(sft, m, &mut stack, &mut out);
    out
}

/// `|B_m|` without materialising the words.
pub fn count_words(sft: &Sft, m: usize) -> u128 {
    if m == 0 {
        return 1;
    }
    let n = sft.size();
    let mut v = vec![1u128; n];
    for _ in 1..m {
        let mut next = vec![0u128; n];
        for a in 0..n {
            if v[a] == 0 {
                continue;
            }
            for b in sft.successors(a as Symbol) {
                next[b as usize] += v[a];
            }
        }
        v = next;
    }
    v.iter().sum()
}

/// The lexicographically indexed set `B_n` together with its block graph.
///
/// Block `i` steps to block `j` on symbol `b` when `j` is block `i` shifted
/// left by one with `b` appended. For `n = 1` the block graph is the
/// presentation itself.
#[derive(Clone, Debug)]
pub struct BlockIndex {
    n: usize,
    q: usize,
    words: Vec<Word>,
    lookup: HashMap<Word, u32>,
    next: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl BlockIndex {
    pub fn new(sft: &Sft, n: usize) -> Self {
        assert!(n >= 1, "block length must be positive");
        let q = sft.size();
        let words = enumerate_words(sft, n);
        let lookup: HashMap<Word, u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        let mut next = vec![NONE; words.len() * q];
        let mut buf = Vec::with_capacity(n);
        for (i, w) in words.iter().enumerate() {
            let last = *w.last().expect("n >= 1");
            for b in sft.successors(last) {
                buf.clear();
                buf.extend_from_slice(&w[1..]);
                buf.push(b);
                // Every extension of an admissible block in a trimmed vertex
                // shift is admissible.
                let j = lookup[buf.as_slice()];
                next[i * q + b as usize] = j;
            }
        }
        BlockIndex {
            n,
            q,
            words,
            lookup,
            next,
        }
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn index_of(&self, w: &[Symbol]) -> Option<usize> {
        self.lookup.get(w).map(|&i| i as usize)
    }

    /// The block reached from `i` by appending symbol `b`.
    pub fn step(&self, i: usize, b: Symbol) -> Option<usize> {
        match self.next.get(i * self.q + b as usize) {
            Some(&j) if j != NONE => Some(j as usize),
            _ => None,
        }
    }

    /// `(symbol, block)` pairs reachable from block `i` in one step.
    pub fn successors(&self, i: usize) -> impl Iterator<Item = (Symbol, usize)> + '_ {
        self.next[i * self.q..(i + 1) * self.q]
            .iter()
            .enumerate()
            .filter(|(_, &j)| j != NONE)
            .map(|(b, &j)| (b as Symbol, j as usize))
    }

    pub fn first_symbol(&self, i: usize) -> Symbol {
        self.words[i][0]
    }

    pub fn last_symbol(&self, i: usize) -> Symbol {
        self.words[i][self.n - 1]
    }

    /// Block indices of every length-`n` window of `u`, in scan order.
    /// Returns `None` if `u` is inadmissible or shorter than `n`.
    pub fn window_indices(&self, u: &[Symbol]) -> Option<Vec<usize>> {
        if u.len() < self.n {
            return None;
        }
        let mut cur = self.index_of(&u[..self.n])?;
        let mut out = Vec::with_capacity(u.len() - self.n + 1);
        out.push(cur);
        for &b in &u[self.n..] {
            cur = self.step(cur, b)?;
            out.push(cur);
        }
        Some(out)
    }

    /// Vertex shift on the blocks for which `keep` holds, trimmed. Returns the
    /// shift and the block index of each surviving symbol.
    pub fn subshift(&self, sft: &Sft, keep: impl Fn(usize) -> bool) -> (Sft, Vec<usize>) {
        let candidates: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        let mut pos = vec![NONE; self.len()];
        for (p, &i) in candidates.iter().enumerate() {
            pos[i] = p as u32;
        }
        let size = candidates.len();
        let mut transitions = vec![false; size * size];
        for (p, &i) in candidates.iter().enumerate() {
            for (_, j) in self.successors(i) {
                if pos[j] != NONE {
                    transitions[p * size + pos[j] as usize] = true;
                }
            }
        }
        let labels = candidates
            .iter()
            .map(|&i| sft.decode(&self.words[i]))
            .collect();
        let (y, kept) = Sft::from_graph(sft.base_alphabet(), labels, transitions);
        let origin = kept.into_iter().map(|p| candidates[p]).collect();
        (y, origin)
    }
}

/// Recodes onto `n`-blocks. The result is conjugate to the input: a path of
/// blocks corresponds to the word read off their first symbols.
pub fn higher_block(sft: &Sft, n: usize) -> Sft {
    if n <= 1 {
        return sft.clone();
    }
    BlockIndex::new(sft, n).subshift(sft, |_| true).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> Sft {
        Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &["11".parse().unwrap()]).unwrap()
    }

    fn words(ws: &[Word]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn golden_mean_from_forbidden() {
        let g = golden();
        assert_eq!(g.size(), 2);
        assert!(g.allows(0, 0) && g.allows(0, 1) && g.allows(1, 0));
        assert!(!g.allows(1, 1));
        assert_eq!(g.transition_count(), 3);
    }

    #[test]
    fn no_forbidden_words_is_full_shift() {
        let x = Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &[]).unwrap();
        assert_eq!(x.transition_count(), 4);
    }

    #[test]
    fn everything_forbidden_is_empty() {
        let f: Vec<Word> = ["00", "01", "10", "11"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let x = Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &f).unwrap();
        assert!(x.is_empty());
        assert_eq!(is_mixing(&x), Err(SftError::Empty));
    }

    #[test]
    fn length_three_constraints_use_pair_blocks() {
        // Forbid 111: blocks of length 2, all four survive.
        let x = Sft::from_forbidden_words(Alphabet::new(2).unwrap(), &["111".parse().unwrap()])
            .unwrap();
        assert_eq!(x.size(), 4);
        assert_eq!(x.block_len(), 2);
        assert_eq!(count_words(&x, 1), 4);
        // Words of length 3 in the original alphabet: 7 of 8.
        assert_eq!(count_words(&x, 2), 7);
    }

    #[test]
    fn trimming_removes_dead_ends() {
        // 0 -> 1 only, 1 -> 1: symbol 0 has no predecessor.
        let x =
            Sft::from_matrix(Alphabet::new(2).unwrap(), vec![false, true, false, true]).unwrap();
        assert_eq!(x.size(), 1);
        assert_eq!(x.label(0).to_string(), "1");
        assert!(!x.is_nontrivial());
    }

    #[test]
    fn mixing_examples() {
        assert!(is_mixing(&Sft::full_shift(2).unwrap()).unwrap());
        assert!(is_mixing(&golden()).unwrap());
        let two_fixed =
            Sft::from_matrix(Alphabet::new(2).unwrap(), vec![true, false, false, true]).unwrap();
        assert!(!is_mixing(&two_fixed).unwrap());
        let flip =
            Sft::from_matrix(Alphabet::new(2).unwrap(), vec![false, true, true, false]).unwrap();
        assert!(!is_mixing(&flip).unwrap());
    }

    #[test]
    fn golden_mean_words() {
        let g = golden();
        assert_eq!(words(&enumerate_words(&g, 2)), ["00", "01", "10"]);
        assert_eq!(
            words(&enumerate_words(&g, 3)),
            ["000", "001", "010", "100", "101"]
        );
        assert_eq!(enumerate_words(&Sft::full_shift(2).unwrap(), 3).len(), 8);
    }

    #[test]
    fn higher_block_examples() {
        let g2 = higher_block(&golden(), 2);
        assert_eq!(g2.size(), 3);
        assert_eq!(g2.transition_count(), 5);
        let f2 = higher_block(&Sft::full_shift(2).unwrap(), 2);
        assert_eq!(f2.size(), 4);
        assert_eq!(f2.transition_count(), 8);
        assert_eq!(higher_block(&golden(), 1), golden());
    }

    #[test]
    fn window_indices_roll() {
        let g = golden();
        let idx = BlockIndex::new(&g, 2);
        let u: Word = "0100".parse().unwrap();
        let w = idx.window_indices(&u).unwrap();
        let names: Vec<String> = w.iter().map(|&i| idx.word(i).to_string()).collect();
        assert_eq!(names, ["01", "10", "00"]);
        assert!(idx
            .window_indices(&"011".parse::<Word>().unwrap())
            .is_none());
    }

    #[test]
    fn word_parse_rejects_junk() {
        assert!("01x".parse::<Word>().is_ok());
        assert!("0-1".parse::<Word>().is_err());
    }
    /// Primitivity by brute force: some power up to `(s-1)^2 + 1` is positive.
    fn primitive_by_powers(x: &Sft) -> bool {
        let s = x.size();
        let base: Vec<bool> = x.transition_matrix().to_vec();
        let mut p = base.clone();
        for _ in 0..(s - 1) * (s - 1) + 1 {
            if p.iter().all(|&b| b) {
                return true;
            }
            let mut next = vec![false; s * s];
            for i in 0..s {
                for k in 0..s {
                    if p[i * s + k] {
                        for j in 0..s {
                            next[i * s + j] |= base[k * s + j];
                        }
                    }
                }
            }
            p = next;
        }
        false
    }

    fn arbitrary_sft() -> impl Strategy<Value = Sft> {
        (1usize..6).prop_flat_map(|q| {
            proptest::collection::vec(any::<bool>(), q * q)
                .prop_map(move |t| Sft::from_matrix(Alphabet::new(q).unwrap(), t).unwrap())
        })
    }

    proptest! {
        #[test]
        fn mixing_agrees_with_matrix_powers(x in arbitrary_sft()) {
            prop_assume!(!x.is_empty());
            prop_assert_eq!(is_mixing(&x).unwrap(), primitive_by_powers(&x));
        }

        #[test]
        fn word_counts_grow(x in arbitrary_sft()) {
            prop_assume!(!x.is_empty());
            let counts: Vec<u128> = (1..=8).map(|m| count_words(&x, m)).collect();
            for m in 0..7 {
                prop_assert!(counts[m + 1] <= x.size() as u128 * counts[m]);
                if counts[m] <= 20_000 {
                    prop_assert_eq!(counts[m] as usize, enumerate_words(&x, m + 1).len());
                }
            }
            if is_mixing(&x).unwrap() && x.is_nontrivial() {
                prop_assert!(counts.windows(2).all(|c| c[0] < c[1]));
            }
        }

        #[test]
        fn higher_block_is_conjugate(x in arbitrary_sft(), n in 1usize..4) {
            prop_assume!(!x.is_empty());
            let y = higher_block(&x, n);
            for m in (n..=12).take_while(|&m| count_words(&x, m) <= 20_000) {
                let mut direct: Vec<Word> = enumerate_words(&x, m).iter().map(|w| x.decode(w)).collect();
            direct.sort();
                let mut recoded: Vec<Word> = enumerate_words(&y, m - n + 1)
                    .iter()
                    .map(|p| y.decode(p))
                    .collect();
                recoded.sort();
                prop_assert_eq!(&recoded, &direct);
            }
        }
    }

    #[test]
    fn no_constraints_count_as_full_shift() {
        for q in 2..=3 {
            let x = Sft::from_forbidden_words(Alphabet::new(q).unwrap(), &[]).unwrap();
            for m in 1..=10 {
                assert_eq!(count_words(&x, m), (q as u128).pow(m as u32));
            }
        }
    }
}
