//! Non-crossing set partitions of types A and B, their statistics, and the
//! moment/free-cumulant conversion they encode.
//!
//! Type A lives on `[n] = {1..n}`. Type B lives on `{-1..-n, 1..n}` under the
//! total order `-1 < -2 < ... < -n < 1 < 2 < ... < n`; a partition is type B
//! when negating every block permutes the blocks. At most one block can be
//! its own negative (the zero block). Type-B partitions are enumerated by
//! generating non-crossing partitions of the 2n order positions and keeping
//! the ones invariant under the half-turn `i -> -i`.

use num_bigint::BigInt;

use crate::poly::IntPoly;
use crate::{Error, Result};

/// A non-crossing partition of `[n]`, blocks sorted by minimum, elements
/// ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NCPartitionA {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl NCPartitionA {
    /// Canonicalizes and validates: blocks must cover `[n]` disjointly and be
    /// mutually non-crossing.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n + 1];
        let mut covered = 0usize;
        for b in blocks.iter_mut() {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            b.sort_unstable();
            for &e in b.iter() {
                if e == 0 || e > n || seen[e] {
                    return Err(Error::InvalidArgument(format!(
                        "element {e} missing from or repeated in [1..={n}]"
                    )));
                }
                seen[e] = true;
                covered += 1;
            }
        }
        if covered != n {
            return Err(Error::InvalidArgument(format!(
                "blocks cover {covered} of {n} elements"
            )));
        }
        blocks.sort_by_key(|b| b[0]);
        if !blocks_noncrossing(&blocks) {
            return Err(Error::InvalidArgument("partition is crossing".into()));
        }
        Ok(NCPartitionA { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// Crossing test: two blocks interleave as `p1 < q1 < p2 < q2` exactly when
/// the merged label sequence compresses to four or more runs.
fn two_blocks_cross<T: Copy + Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0usize, 0usize);
    let mut last = 0u8;
    let mut runs = 0usize;
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i] < b[j]);
        let label = if take_a { 1 } else { 2 };
        if take_a {
            i += 1;
        } else {
            j += 1;
        }
        if label != last {
            runs += 1;
            last = label;
        }
    }
    runs >= 4
}

fn blocks_noncrossing<T: Copy + Ord>(blocks: &[Vec<T>]) -> bool {
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            if two_blocks_cross(a, b) {
                return false;
            }
        }
    }
    true
}

/// Streams every non-crossing partition of `[n]` (blocks in discovery order,
/// not canonical). The closure receives a transient view.
pub fn for_each_nca(n: usize, mut f: impl FnMut(&[Vec<usize>])) {
    let mut pending: Vec<(usize, usize)> = if n >= 1 { vec![(1, n)] } else { Vec::new() };
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    nc_rec(&mut pending, &mut blocks, &mut f);
}

fn nc_rec(
    pending: &mut Vec<(usize, usize)>,
    blocks: &mut Vec<Vec<usize>>,
    emit: &mut impl FnMut(&[Vec<usize>]),
) {
    let Some((lo, hi)) = pending.pop() else {
        emit(blocks);
        return;
    };
    blocks.push(vec![lo]);
    grow_block(lo + 1, hi, pending, blocks, emit);
    blocks.pop();
    pending.push((lo, hi));
}

fn grow_block(
    next: usize,
    hi: usize,
    pending: &mut Vec<(usize, usize)>,
    blocks: &mut Vec<Vec<usize>>,
    emit: &mut impl FnMut(&[Vec<usize>]),
) {
    // close the block here; the rest of the interval is independent
    let pushed = next <= hi;
    if pushed {
        pending.push((next, hi));
    }
    nc_rec(pending, blocks, emit);
    if pushed {
        pending.pop();
    }
    // or extend the block to some c, sealing the gap (next, c-1)
    for c in next..=hi {
        let gap = next + 1 <= c;
        if gap {
            pending.push((next, c - 1));
        }
        blocks.last_mut().unwrap().push(c);
        grow_block(c + 1, hi, pending, blocks, emit);
        blocks.last_mut().unwrap().pop();
        if gap {
            pending.pop();
        }
    }
}

const MAX_NCA: usize = 10;
const MAX_NCB: usize = 7;

/// All of `NC(n)`, exactly Catalan(n) partitions.
pub fn enumerate_nca(n: usize) -> Result<Vec<NCPartitionA>> {
    if n > MAX_NCA {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_NCA}")));
    }
    let mut out = Vec::new();
    for_each_nca(n, |blocks| {
        let mut blocks = blocks.to_vec();
        blocks.sort_by_key(|b| b[0]);
        out.push(NCPartitionA { n, blocks });
    });
    Ok(out)
}

/// A type-B non-crossing partition of `{-1..-n, 1..n}`. Elements are signed
/// integers; blocks are sorted by their first element in the type-B order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NCPartitionB {
    n: usize,
    blocks: Vec<Vec<i64>>,
}

impl NCPartitionB {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<i64>] {
        &self.blocks
    }

    /// The self-negative block, if present.
    pub fn zero_block(&self) -> Option<&Vec<i64>> {
        self.blocks.iter().find(|b| {
            let mut neg: Vec<i64> = b.iter().map(|&e| -e).collect();
            neg.sort_unstable();
            let mut sorted = (*b).clone();
            sorted.sort_unstable();
            neg == sorted
        })
    }

    pub fn nonzero_block_count(&self) -> usize {
        self.blocks.len() - usize::from(self.zero_block().is_some())
    }
}

/// Position of a signed element in the order `-1 < ... < -n < 1 < ... < n`,
/// one-based.
fn b_position(n: usize, e: i64) -> usize {
    if e < 0 {
        (-e) as usize
    } else {
        n + e as usize
    }
}

fn b_element(n: usize, pos: usize) -> i64 {
    if pos <= n {
        -(pos as i64)
    } else {
        (pos - n) as i64
    }
}

/// Position image of negation: the half-turn by n.
fn b_negate_pos(n: usize, pos: usize) -> usize {
    if pos <= n {
        pos + n
    } else {
        pos - n
    }
}

/// Streams type-B non-crossing partitions as position-block views.
fn for_each_ncb_positions(n: usize, mut f: impl FnMut(&[Vec<usize>])) {
    let mut block_of = vec![usize::MAX; 2 * n + 1];
    for_each_nca(2 * n, |blocks| {
        for (bi, b) in blocks.iter().enumerate() {
            for &e in b {
                block_of[e] = bi;
            }
        }
        let closed = blocks.iter().all(|b| {
            let target = block_of[b_negate_pos(n, b[0])];
            blocks[target].len() == b.len()
                && b.iter().all(|&e| block_of[b_negate_pos(n, e)] == target)
        });
        if closed {
            f(blocks);
        }
    });
}

/// All of `NC^B(n)`, exactly `binom(2n, n)` partitions.
pub fn enumerate_ncb(n: usize) -> Result<Vec<NCPartitionB>> {
    if n == 0 || n > MAX_NCB {
        return Err(Error::InvalidArgument(format!(
            "n = {n} outside 1..={MAX_NCB}"
        )));
    }
    let mut out = Vec::new();
    for_each_ncb_positions(n, |blocks| {
        let mut blocks: Vec<Vec<i64>> = blocks
            .iter()
            .map(|b| b.iter().map(|&p| b_element(n, p)).collect())
            .collect();
        for b in blocks.iter_mut() {
            b.sort_by_key(|&e| b_position(n, e));
        }
        blocks.sort_by_key(|b| b_position(n, b[0]));
        out.push(NCPartitionB { n, blocks });
    });
    Ok(out)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    fn blocks(&mut self, lo: usize, hi: usize) -> Vec<Vec<usize>> {
        let mut by_root: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for x in lo..=hi {
            let r = self.find(x);
            by_root.entry(r).or_default().push(x);
        }
        let mut blocks: Vec<Vec<usize>> = by_root.into_values().collect();
        blocks.sort_by_key(|b| b[0]);
        blocks
    }
}

/// Kreweras complement: on the interleaved order `1 < 1' < 2 < 2' < ... `,
/// the coarsest partition of the primed copies whose union with `p` stays
/// non-crossing. Primes `i'` and `j'` (i < j) end up together exactly when no
/// related pair `k ~ l` of `p` satisfies `k <= i < l <= j` or
/// `i < k <= j < l`.
pub fn kreweras(p: &NCPartitionA) -> NCPartitionA {
    let n = p.n;
    let mut uf = UnionFind::new(n + 1);
    for i in 1..=n {
        for j in i + 1..=n {
            if !separates(p, i, j) {
                uf.union(i, j);
            }
        }
    }
    let blocks = if n >= 1 { uf.blocks(1, n) } else { Vec::new() };
    NCPartitionA { n, blocks }
}

fn separates(p: &NCPartitionA, i: usize, j: usize) -> bool {
    for b in &p.blocks {
        for (ai, &k) in b.iter().enumerate() {
            for &l in &b[ai + 1..] {
                if (k <= i && i < l && l <= j) || (i < k && k <= j && j < l) {
                    return true;
                }
            }
        }
    }
    false
}

/// The absolute-value projection onto type A: `i ~ j` downstairs iff
/// `i ~ j` or `i ~ -j` upstairs. An (n+1)-to-1 map.
pub fn abs_map(p: &NCPartitionB) -> NCPartitionA {
    let n = p.n;
    let mut uf = UnionFind::new(n + 1);
    for b in &p.blocks {
        let first = b[0].unsigned_abs() as usize;
        for &e in b {
            uf.union(first, e.unsigned_abs() as usize);
        }
    }
    let blocks = uf.blocks(1, n);
    NCPartitionA { n, blocks }
}

/// Free-moment formula: `M_n = sum over NC(n) of prod over blocks of
/// c_(block size)`. `cumulants[i]` holds `c_(i+1)`; sizes `1..=n` must be
/// present.
pub fn moments_from_cumulants(cumulants: &[IntPoly], n: usize) -> Result<IntPoly> {
    if n > MAX_NCA {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_NCA}")));
    }
    if cumulants.len() < n {
        return Err(Error::InvalidArgument(format!(
            "need cumulants up to size {n}, got {}",
            cumulants.len()
        )));
    }
    let mut total = IntPoly::zero();
    for_each_nca(n, |blocks| {
        let mut prod = IntPoly::one();
        for b in blocks {
            prod = &prod * &cumulants[b.len() - 1];
            if prod.is_zero() {
                break;
            }
        }
        total = &total + &prod;
    });
    Ok(total)
}

/// Inverts the free-moment formula by triangularity. `moments[i]` holds
/// `M_(i+1)`; returns `c_1..c_n`.
///
/// Rather than enumerating `NC(n)` (hopeless past n ~ 20), this walks the
/// standard first-block decomposition: the block containing 1 has size s and
/// splits the rest into s independent gaps, giving
/// `M_n = sum_s c_s * [x^(n-s)] M(x)^s` with `M(x) = 1 + M_1 x + ...`.
/// Moving the `s = n` term to the left yields `c_n`.
pub fn cumulants_from_moments(moments: &[IntPoly], n: usize) -> Result<Vec<IntPoly>> {
    if moments.len() < n {
        return Err(Error::InvalidArgument(format!(
            "need moments up to order {n}, got {}",
            moments.len()
        )));
    }
    // series[j] = M_j, series[0] = 1
    let mut series = vec![IntPoly::one()];
    series.extend(moments[..n].iter().cloned());

    // powers[s][j] = [x^j] M(x)^s, truncated at degree n
    let mut powers: Vec<Vec<IntPoly>> = Vec::with_capacity(n + 1);
    let mut unit = vec![IntPoly::zero(); n + 1];
    unit[0] = IntPoly::one();
    powers.push(unit);
    for s in 1..=n.saturating_sub(1) {
        let prev = &powers[s - 1];
        let mut cur = vec![IntPoly::zero(); n + 1];
        for j in 0..=n {
            let mut acc = IntPoly::zero();
            for i in 0..=j {
                if !prev[i].is_zero() && !series[j - i].is_zero() {
                    acc = &acc + &(&prev[i] * &series[j - i]);
                }
            }
            cur[j] = acc;
        }
        powers.push(cur);
    }

    let mut cumulants: Vec<IntPoly> = Vec::with_capacity(n);
    for m in 1..=n {
        let mut c = series[m].clone();
        for s in 1..m {
            c = &c - &(&cumulants[s - 1] * &powers[s][m - s]);
        }
        cumulants.push(c);
    }
    Ok(cumulants)
}

/// Generating polynomial `sum t^(blocks)` over `NC(n)`. Equals the type-A
/// Narayana polynomial.
pub fn block_count_polynomial(n: usize) -> Result<IntPoly> {
    if n > MAX_NCA {
        return Err(Error::InvalidArgument(format!("n = {n} exceeds {MAX_NCA}")));
    }
    let mut counts = vec![0u64; n + 1];
    for_each_nca(n, |blocks| counts[blocks.len()] += 1);
    Ok(IntPoly::from_coeffs(
        counts.into_iter().map(BigInt::from).collect(),
    ))
}

/// Generating polynomial `sum t^(non-zero blocks / 2)` over `NC^B(n)`.
/// Equals the type-B Narayana polynomial.
pub fn half_nonzero_block_polynomial(n: usize) -> Result<IntPoly> {
    let parts = enumerate_ncb(n)?;
    let mut counts = vec![0u64; n + 1];
    for p in &parts {
        counts[p.nonzero_block_count() / 2] += 1;
    }
    Ok(IntPoly::from_coeffs(
        counts.into_iter().map(BigInt::from).collect(),
    ))
}

const MAX_ZERO_BLOCK: usize = 6;

/// `sum t^(non-zero blocks / 2)` over the zero-block partitions of
/// `NC^B(n)`. Equals `Q_(n-1)`.
pub fn bstats_zero_block(n: usize) -> Result<IntPoly> {
    if n == 0 || n > MAX_ZERO_BLOCK {
        return Err(Error::InvalidArgument(format!(
            "n = {n} outside 1..={MAX_ZERO_BLOCK}"
        )));
    }
    let parts = enumerate_ncb(n)?;
    let mut counts = vec![0u64; n + 1];
    for p in &parts {
        if p.zero_block().is_some() {
            counts[p.nonzero_block_count() / 2] += 1;
        }
    }
    Ok(IntPoly::from_coeffs(
        counts.into_iter().map(BigInt::from).collect(),
    ))
}
