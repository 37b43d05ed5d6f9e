//! Pairwise LCS inside three-dimensional binary subspaces: span enumeration,
//! column histograms, balanced-triple selection, the bracket level structure
//! and the additional-value certificate built on it.

use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::seqmetrics::lcs;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubspaceError {
    #[error("strings have lengths {0}, {1} and {2}")]
    Length(usize, usize, usize),
    #[error("inputs are linearly dependent: {0} is zero")]
    Dependent(SpanLabel),
    #[error("symbol {0} at index {1} is not a bit")]
    NotBinary(u8, usize),
    #[error("exhaustive enumeration supports n up to {max}, got {n}")]
    TooLong { n: usize, max: usize },
}

/// An element of span{a, b, c} as a bit mask: bit 0 = a, bit 1 = b, bit 2 = c.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpanLabel(pub u8);

impl SpanLabel {
    /// The eight labels in the order `0, a, b, c, a+b, a+c, b+c, a+b+c`.
    pub const ALL: [SpanLabel; 8] =
        [SpanLabel(0), SpanLabel(1), SpanLabel(2), SpanLabel(4), SpanLabel(3), SpanLabel(5), SpanLabel(6), SpanLabel(7)];

    pub fn weight(self) -> u32 {
        self.0.count_ones()
    }
}

impl fmt::Display for SpanLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return f.write_str("0");
        }
        let names: Vec<&str> = ["a", "b", "c"].iter().enumerate().filter(|(i, _)| self.0 >> i & 1 == 1).map(|(_, s)| *s).collect();
        f.write_str(&names.join("+"))
    }
}

impl Serialize for SpanLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_triple(a: &[u8], b: &[u8], c: &[u8]) -> Result<(), SubspaceError> {
    if a.len() != b.len() || a.len() != c.len() {
        return Err(SubspaceError::Length(a.len(), b.len(), c.len()));
    }
    for w in [a, b, c] {
        if let Some((i, &s)) = w.iter().enumerate().find(|(_, &s)| s > 1) {
            return Err(SubspaceError::NotBinary(s, i));
        }
    }
    Ok(())
}

fn combine(gens: [&[u8]; 3], label: SpanLabel) -> Vec<u8> {
    (0..gens[0].len())
        .map(|j| (0..3).filter(|&g| label.0 >> g & 1 == 1).fold(0, |acc, g| acc ^ gens[g][j]))
        .collect()
}

pub fn xor(x: &[u8], y: &[u8]) -> Vec<u8> {
    x.iter().zip(y).map(|(p, q)| p ^ q).collect()
}

/// The eight elements of span{a, b, c}, ordered as [`SpanLabel::ALL`].
pub fn subspace_strings(a: &[u8], b: &[u8], c: &[u8]) -> Result<Vec<Vec<u8>>, SubspaceError> {
    check_triple(a, b, c)?;
    let all: Vec<Vec<u8>> = SpanLabel::ALL.iter().map(|&l| combine([a, b, c], l)).collect();
    if let Some((l, _)) = SpanLabel::ALL.iter().zip(&all).skip(1).find(|(_, w)| w.iter().all(|&s| s == 0)) {
        return Err(SubspaceError::Dependent(*l));
    }
    Ok(all)
}

/// Largest LCS over unordered pairs, with the first pair attaining it.
pub fn max_pairwise_lcs(strings: &[Vec<u8>]) -> Option<(usize, (usize, usize))> {
    let mut best: Option<(usize, (usize, usize))> = None;
    for i in 0..strings.len() {
        for j in i + 1..strings.len() {
            let v = lcs(&strings[i], &strings[j]);
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, (i, j)));
            }
        }
    }
    best
}

/// Column counts of the 3×n matrix with rows x, y, z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ColumnHistogram {
    /// (0,0,0)
    pub zero: usize,
    /// (0,1,1)
    pub a: usize,
    /// (1,0,1)
    pub b: usize,
    /// (1,1,0)
    pub c: usize,
    /// Every odd-weight column.
    pub odd: usize,
}

impl ColumnHistogram {
    pub fn total(&self) -> usize {
        self.zero + self.a + self.b + self.c + self.odd
    }

    pub fn even_counts(&self) -> [usize; 4] {
        [self.zero, self.a, self.b, self.c]
    }
}

/// Nonzero even-weight column type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Letter {
    A,
    B,
    C,
}

impl Letter {
    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'a' => Some(Self::A),
            'b' => Some(Self::B),
            'c' => Some(Self::C),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::A => 'a',
            Self::B => 'b',
            Self::C => 'c',
        }
    }
}

pub fn letters(s: &str) -> Option<Vec<Letter>> {
    s.chars().map(Letter::from_char).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Column {
    Zero,
    Letter(Letter),
    Odd,
}

pub fn column_type(x: u8, y: u8, z: u8) -> Column {
    match (x, y, z) {
        (0, 0, 0) => Column::Zero,
        (0, 1, 1) => Column::Letter(Letter::A),
        (1, 0, 1) => Column::Letter(Letter::B),
        (1, 1, 0) => Column::Letter(Letter::C),
        _ => Column::Odd,
    }
}

pub fn column_histogram(x: &[u8], y: &[u8], z: &[u8]) -> Result<ColumnHistogram, SubspaceError> {
    check_triple(x, y, z)?;
    let mut h = ColumnHistogram::default();
    for j in 0..x.len() {
        match column_type(x[j], y[j], z[j]) {
            Column::Zero => h.zero += 1,
            Column::Letter(Letter::A) => h.a += 1,
            Column::Letter(Letter::B) => h.b += 1,
            Column::Letter(Letter::C) => h.c += 1,
            Column::Odd => h.odd += 1,
        }
    }
    Ok(h)
}

/// The string L: column letters with zero columns dropped. Odd columns are
/// dropped as well; they never occur for `z = x ⊕ y`.
pub fn column_letters(x: &[u8], y: &[u8], z: &[u8]) -> Vec<Letter> {
    (0..x.len())
        .filter_map(|j| match column_type(x[j], y[j], z[j]) {
            Column::Letter(l) => Some(l),
            _ => None,
        })
        .collect()
}

fn log2n(n: usize) -> f64 {
    (n.max(2) as f64).log2()
}

/// `n/2 + 3n/(16 log₂ n)`.
pub fn theorem_threshold(n: usize) -> f64 {
    n as f64 / 2.0 + 3.0 * n as f64 / (16.0 * log2n(n))
}

/// Closed interval `n/4 ± (9n/(16 log₂ n) + tol)` for each even column count.
pub fn balance_window(n: usize, tol: f64) -> (f64, f64) {
    let centre = n as f64 / 4.0;
    let half = 9.0 * n as f64 / (16.0 * log2n(n)) + tol;
    (centre - half, centre + half)
}

pub fn is_balanced(h: &ColumnHistogram, n: usize, tol: f64) -> bool {
    let (lo, hi) = balance_window(n, tol);
    h.odd == 0 && h.even_counts().iter().all(|&t| (lo..=hi).contains(&(t as f64)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Selection {
    /// `z = x ⊕ y` with every even column count inside the window.
    Balanced { labels: [SpanLabel; 3], x: Vec<u8>, y: Vec<u8>, z: Vec<u8> },
    /// No balanced triple; the pair of span elements with the largest LCS.
    Witness { pair: (SpanLabel, SpanLabel), lcs: usize },
}

/// The triple `(b*, c*, b*+c*)` where `a*` is the heaviest nonzero span
/// element and `b*, c*` are the first two input generators completing it to
/// a basis. For a dependent input with `c = a ⊕ b` the input triple itself.
pub fn select_balanced_triple(a: &[u8], b: &[u8], c: &[u8], tol: f64) -> Result<Selection, SubspaceError> {
    check_triple(a, b, c)?;
    let gens = [a, b, c];
    let span: Vec<Vec<u8>> = SpanLabel::ALL.iter().map(|&l| combine(gens, l)).collect();
    let n = a.len();
    let candidate = if xor(a, b) == c {
        Some([SpanLabel(1), SpanLabel(2), SpanLabel(4)])
    } else if subspace_strings(a, b, c).is_ok() {
        let weight = |i: usize| span[i].iter().filter(|&&s| s == 1).count();
        let heavy = (1..8).max_by_key(|&i| (weight(i), std::cmp::Reverse(i))).expect("nonempty");
        let heavy = SpanLabel::ALL[heavy];
        let gens: Vec<u8> = [1u8, 2, 4].into_iter().filter(|&g| g != heavy.0).collect();
        // Two of three generators always complete a nonzero vector to a basis.
        let (p, q) = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .filter(|&(i, j)| i < gens.len() && j < gens.len())
            .map(|(i, j)| (gens[i], gens[j]))
            .find(|&(p, q)| heavy.0 != p ^ q)
            .expect("a completing pair exists");
        Some([SpanLabel(p), SpanLabel(q), SpanLabel(p ^ q)])
    } else {
        None
    };
    if let Some(labels) = candidate {
        let [x, y, z] = labels.map(|l| combine(gens, l));
        if labels.iter().all(|l| span[SpanLabel::ALL.iter().position(|m| m == l).unwrap()].contains(&1))
            && is_balanced(&column_histogram(&x, &y, &z)?, n, tol)
        {
            return Ok(Selection::Balanced { labels, x, y, z });
        }
    }
    let (value, (i, j)) = max_pairwise_lcs(&span).expect("eight strings");
    Ok(Selection::Witness { pair: (SpanLabel::ALL[i], SpanLabel::ALL[j]), lcs: value })
}

/// A bracket pair over L and the brackets directly inside it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketNode {
    pub span: Range<usize>,
    pub level: usize,
    pub children: Vec<usize>,
}

/// Level structure over L. Node 0 is the root; when no emitted bracket spans
/// all of L the root is the implicit outer pair and is not rendered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketTree {
    pub letters: Vec<Letter>,
    pub nodes: Vec<BracketNode>,
    pub implicit_root: bool,
}

impl BracketTree {
    /// Bracket pairs added to L, the implicit root excluded.
    pub fn bracket_count(&self) -> usize {
        self.nodes.len() - usize::from(self.implicit_root)
    }

    pub fn root_level(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.level)
    }

    pub fn render(&self) -> String {
        render(&self.letters, &self.nodes, self.implicit_root, |n| n.level)
    }
}

fn subscript(mut v: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    let mut out = Vec::new();
    loop {
        out.push(DIGITS[v % 10]);
        v /= 10;
        if v == 0 {
            break;
        }
    }
    out.iter().rev().collect()
}

fn render<N>(letters: &[Letter], nodes: &[N], implicit_root: bool, info: impl Fn(&N) -> usize) -> String
where
    N: HasSpan,
{
    let mut opens = vec![0usize; letters.len() + 1];
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); letters.len() + 1];
    for (i, node) in nodes.iter().enumerate() {
        if i == 0 && implicit_root {
            continue;
        }
        opens[node.span().start] += 1;
        closes[node.span().end].push(info(node));
    }
    let mut out = String::new();
    for pos in 0..=letters.len() {
        // Inner pairs close first: they were pushed after their parents.
        for level in closes[pos].iter().rev() {
            out.push('⟩');
            out.push_str(&subscript(*level));
        }
        for _ in 0..opens[pos] {
            out.push('⟨');
        }
        if let Some(l) = letters.get(pos) {
            out.push(l.as_char());
        }
    }
    out
}

trait HasSpan {
    fn span(&self) -> &Range<usize>;
}

impl HasSpan for BracketNode {
    fn span(&self) -> &Range<usize> {
        &self.span
    }
}

impl HasSpan for EnhancedNode {
    fn span(&self) -> &Range<usize> {
        &self.span
    }
}

/// Bracket inserter: a run of the current letter is balanced against the
/// run of the letter after it, and an inner pair closes whenever that
/// balance is broken.
pub fn bracket_parse(l: &[Letter]) -> BracketTree {
    let mut spans: Vec<Range<usize>> = Vec::new();
    if let Some(&first) = l.first() {
        let mut current = first;
        let mut alphas = vec![0usize];
        let mut next: Option<Letter> = None;
        let mut next_count = 0usize;
        let mut left = 0usize;
        let close_unit = |alphas: &mut Vec<usize>, k: usize, right: usize, spans: &mut Vec<Range<usize>>| {
            let start = alphas[alphas.len() - k];
            spans.push(start..right);
            alphas.truncate(alphas.len() - k);
        };
        for (r, &m) in l.iter().enumerate().skip(1) {
            if next_count > 0 && alphas.len() == next_count {
                spans.push(left..r);
                left = r;
                current = m;
                next = None;
                next_count = 0;
                alphas.clear();
            }
            if m == current {
                // The current letter returning after the next one closes the pending unit.
                if next_count > 0 {
                    close_unit(&mut alphas, next_count, r, &mut spans);
                    next = None;
                    next_count = 0;
                }
                alphas.push(r);
            } else if next.is_none() {
                next = Some(m);
                next_count = 1;
            } else if next == Some(m) {
                next_count += 1;
            } else {
                close_unit(&mut alphas, next_count, r, &mut spans);
                next = Some(m);
                next_count = 1;
            }
        }
        // Flush whatever is still open at the end of L.
        if next_count > 0 {
            if alphas.len() == next_count {
                spans.push(left..l.len());
            } else {
                close_unit(&mut alphas, next_count, l.len(), &mut spans);
            }
        }
    }
    build_tree(l, spans)
}

fn build_tree(l: &[Letter], mut spans: Vec<Range<usize>>) -> BracketTree {
    if l.is_empty() {
        return BracketTree { letters: Vec::new(), nodes: Vec::new(), implicit_root: false };
    }
    spans.sort_by_key(|s| (s.start, std::cmp::Reverse(s.end)));
    spans.dedup();
    let implicit_root = spans.first() != Some(&(0..l.len()));
    if implicit_root {
        spans.insert(0, 0..l.len());
    }
    let mut nodes: Vec<BracketNode> =
        spans.iter().map(|s| BracketNode { span: s.clone(), level: 1, children: Vec::new() }).collect();
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..nodes.len() {
        while let Some(&top) = stack.last() {
            if nodes[top].span.end <= nodes[i].span.start {
                stack.pop();
            } else {
                break;
            }
        }
        if let Some(&parent) = stack.last() {
            assert!(nodes[i].span.end <= nodes[parent].span.end, "brackets must nest");
            nodes[parent].children.push(i);
        }
        stack.push(i);
    }
    for i in (0..nodes.len()).rev() {
        let level = nodes[i].children.iter().map(|&c| nodes[c].level + 1).max().unwrap_or(1);
        nodes[i].level = level;
    }
    BracketTree { letters: l.to_vec(), nodes, implicit_root }
}

/// Shape of a node's own letters once its children are cut out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InnerShape {
    /// Reduced content is `α^k` followed by `k` letters other than `α`.
    pub k: usize,
}

impl InnerShape {
    pub fn inner_length(&self) -> usize {
        2 * self.k
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnhancedNode {
    pub span: Range<usize>,
    pub level: usize,
    pub children: Vec<usize>,
    /// `None` when the reduced content does not have the enhanced shape or
    /// a child sits inside its second half.
    pub shape: Option<InnerShape>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EnhancedTree {
    pub letters: Vec<Letter>,
    /// Surviving pairs; node 0 is the root.
    pub nodes: Vec<EnhancedNode>,
    pub implicit_root: bool,
}

impl EnhancedTree {
    pub fn root_level(&self) -> usize {
        self.nodes.first().map_or(0, |n| n.level)
    }

    pub fn bracket_count(&self) -> usize {
        self.nodes.len() - usize::from(self.implicit_root)
    }

    pub fn render(&self) -> String {
        render(&self.letters, &self.nodes, self.implicit_root, |n| n.level)
    }
}

fn inner_shape(letters: &[Letter], span: &Range<usize>, children: &[Range<usize>]) -> Option<InnerShape> {
    let own: Vec<(usize, Letter)> = span
        .clone()
        .filter(|&p| !children.iter().any(|c| c.contains(&p)))
        .map(|p| (p, letters[p]))
        .collect();
    let Some(&(_, alpha)) = own.first() else {
        return Some(InnerShape { k: 0 });
    };
    let k = own.iter().take_while(|(_, l)| *l == alpha).count();
    let tail = &own[k..];
    if tail.len() != k || tail.iter().any(|(_, l)| *l == alpha) {
        return None;
    }
    let z_start = tail.first().map_or(span.end, |(p, _)| *p);
    children.iter().all(|c| c.end <= z_start).then_some(InnerShape { k })
}

/// Deletes, from the top level down, every pair that is the only pair
/// directly inside its parent, until no pair has exactly one child. Levels
/// are then recomputed in the enhanced sense: a pair is one level above its
/// highest children when at least two of them share that level.
pub fn enhance(tree: &BracketTree) -> EnhancedTree {
    let mut children: Vec<Vec<usize>> = tree.nodes.iter().map(|n| n.children.clone()).collect();
    let mut alive = vec![true; tree.nodes.len()];
    let mut order: Vec<usize> = (0..tree.nodes.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(tree.nodes[i].level), tree.nodes[i].span.start));
    for p in order {
        if !alive[p] {
            continue;
        }
        while children[p].len() == 1 {
            let q = children[p][0];
            alive[q] = false;
            children[p] = std::mem::take(&mut children[q]);
        }
    }
    let mut remap = vec![usize::MAX; tree.nodes.len()];
    let mut nodes: Vec<EnhancedNode> = Vec::new();
    for (i, node) in tree.nodes.iter().enumerate() {
        if alive[i] {
            remap[i] = nodes.len();
            nodes.push(EnhancedNode { span: node.span.clone(), level: 1, children: Vec::new(), shape: None });
        }
    }
    for (i, kids) in children.iter().enumerate() {
        if alive[i] {
            nodes[remap[i]].children = kids.iter().map(|&c| remap[c]).collect();
        }
    }
    for i in (0..nodes.len()).rev() {
        let levels: Vec<usize> = nodes[i].children.iter().map(|&c| nodes[c].level).collect();
        let top = levels.iter().copied().max().unwrap_or(0);
        let level = match levels.iter().filter(|&&v| v == top).count() {
            0 => 1,
            1 => top,
            _ => top + 1,
        };
        let spans: Vec<Range<usize>> = nodes[i].children.iter().map(|&c| nodes[c].span.clone()).collect();
        nodes[i].level = level;
        nodes[i].shape = inner_shape(&tree.letters, &nodes[i].span, &spans);
    }
    EnhancedTree { letters: tree.letters.clone(), nodes, implicit_root: tree.implicit_root }
}

/// `AV(node) = max(⌈inner_length/4⌉, Σ AV(children))`, where the first term
/// only counts for nodes with the enhanced shape.
pub fn additional_value_bound(tree: &EnhancedTree) -> usize {
    fn av(tree: &EnhancedTree, i: usize) -> usize {
        let node = &tree.nodes[i];
        let quarter = node.shape.map_or(0, |s| s.inner_length().div_ceil(4));
        quarter.max(node.children.iter().map(|&c| av(tree, c)).sum())
    }
    if tree.nodes.is_empty() {
        0
    } else {
        av(tree, 0)
    }
}

/// Longest common subsequence in which every matched `1` pairs equal
/// positions of `x` and `y`.
pub fn restricted_cs(x: &[u8], y: &[u8]) -> usize {
    let mut prev = vec![0usize; y.len() + 1];
    let mut cur = vec![0usize; y.len() + 1];
    for i in 1..=x.len() {
        for j in 1..=y.len() {
            let mut best = prev[j].max(cur[j - 1]);
            let a = x[i - 1];
            if a == y[j - 1] && (a == 0 || i == j) {
                best = best.max(prev[j - 1] + 1);
            }
            cur[j] = best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[y.len()]
}

/// Sum of the three pairwise restricted common subsequences minus `n`.
pub fn additional_value(x: &[u8], y: &[u8], z: &[u8]) -> i64 {
    (restricted_cs(x, y) + restricted_cs(x, z) + restricted_cs(y, z)) as i64 - x.len() as i64
}

/// Runs the bracket pipeline on a triple and returns the certified bound.
pub fn certify(x: &[u8], y: &[u8], z: &[u8]) -> (EnhancedTree, usize) {
    let tree = enhance(&bracket_parse(&column_letters(x, y, z)));
    let av = additional_value_bound(&tree);
    (tree, av)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoremOptions {
    pub tol: f64,
    /// Smallest `n` for which the threshold is asserted.
    pub floor: usize,
}

impl Default for TheoremOptions {
    fn default() -> Self {
        Self { tol: 0.0, floor: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub n: usize,
    pub balanced: bool,
    pub triple: Option<[SpanLabel; 3]>,
    pub witness_pair: Option<(SpanLabel, SpanLabel)>,
    /// Over the balanced triple, or the witness value.
    pub max_lcs: usize,
    pub threshold: f64,
    pub certified_av: Option<usize>,
    pub true_av: Option<i64>,
    pub asserted: bool,
    /// `max_lcs > threshold`, meaningful when `asserted`.
    pub holds: bool,
}

impl TheoremReport {
    pub fn violated(&self) -> bool {
        self.asserted && !self.holds
    }
}

pub fn verify_theorem(a: &[u8], b: &[u8], c: &[u8], opts: &TheoremOptions) -> Result<TheoremReport, SubspaceError> {
    subspace_strings(a, b, c)?;
    let n = a.len();
    let threshold = theorem_threshold(n);
    Ok(match select_balanced_triple(a, b, c, opts.tol)? {
        Selection::Witness { pair, lcs } => TheoremReport {
            n,
            balanced: false,
            triple: None,
            witness_pair: Some(pair),
            max_lcs: lcs,
            threshold,
            certified_av: None,
            true_av: None,
            asserted: false,
            holds: lcs as f64 > threshold,
        },
        Selection::Balanced { labels, x, y, z } => {
            let (_, av) = certify(&x, &y, &z);
            let max_lcs = lcs(&x, &y).max(lcs(&x, &z)).max(lcs(&y, &z));
            TheoremReport {
                n,
                balanced: true,
                triple: Some(labels),
                witness_pair: None,
                max_lcs,
                threshold,
                certified_av: Some(av),
                true_av: Some(additional_value(&x, &y, &z)),
                asserted: n >= opts.floor,
                holds: max_lcs as f64 > threshold,
            }
        }
    })
}

pub const EXHAUSTIVE_MAX_N: usize = 10;

/// A basis of every three-dimensional subspace of `F₂^n`, one per subspace,
/// in reduced row echelon form.
pub fn three_dim_subspaces(n: usize) -> Result<Vec<[Vec<u8>; 3]>, SubspaceError> {
    if n > EXHAUSTIVE_MAX_N {
        return Err(SubspaceError::TooLong { n, max: EXHAUSTIVE_MAX_N });
    }
    let mut out = Vec::new();
    for p0 in 0..n {
        for p1 in p0 + 1..n {
            for p2 in p1 + 1..n {
                let pivots = [p0, p1, p2];
                // Free cells: row r, columns after its pivot that are not pivots.
                let free: Vec<(usize, usize)> = (0..3)
                    .flat_map(|r| (pivots[r] + 1..n).filter(move |c| !pivots.contains(c)).map(move |c| (r, c)))
                    .collect();
                for fill in 0u64..1 << free.len() {
                    let mut rows = [vec![0u8; n], vec![0u8; n], vec![0u8; n]];
                    for (r, &p) in pivots.iter().enumerate() {
                        rows[r][p] = 1;
                    }
                    for (bit, &(r, c)) in free.iter().enumerate() {
                        rows[r][c] = (fill >> bit & 1) as u8;
                    }
                    out.push(rows);
                }
            }
        }
    }
    Ok(out)
}
