//! Planar chord diagrams with two-colored vertices: the brute-force side of
//! the moment story.
//!
//! A diagram is a perfect matching on vertices `1..=2m` drawn on a line;
//! planar means no two chords cross. Under a coloring rule each chord is
//! either bicolored (weight 1) or monochromatic (weight rho), and the weight
//! of a diagram is `rho^l` with l the number of monochromatic chords. Summing
//! weights over all planar diagrams reproduces the `U_k`/`V_k` polynomials of
//! [`crate::moments`] diagram by diagram, which makes this module the
//! independent oracle for the recurrence.
//!
//! Decomposability (used for the cumulant diagrams): a diagram on `4n`
//! vertices is *decomposable* when it contains a proper contiguous closed
//! interval of exactly `4l` vertices (closed: every chord touching the
//! interval stays inside it) such that the vertex immediately after the
//! interval exists and is the right endpoint of a chord whose left endpoint
//! precedes the interval. Otherwise the diagram is *atomic*. The sum of
//! weights over atomic diagrams on `4n` vertices equals the type-B Narayana
//! polynomial `N^B_n(rho^2)`, which is what pins this reading of the
//! predicate.

use num_bigint::BigInt;

use crate::poly::IntPoly;
use crate::{Error, Result};

/// Vertex coloring rules. Vertices are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coloring {
    /// Black iff `j mod 4` is 1 or 2 (factor order of a squared matrix times
    /// its squared transpose).
    U,
    /// Black iff `j mod 4` is 0 or 1.
    V,
    /// `U` with colors flipped.
    UInverted,
    /// `V` with colors flipped.
    VInverted,
}

impl Coloring {
    pub fn is_black(self, j: u32) -> bool {
        let r = j % 4;
        match self {
            Coloring::U => r == 1 || r == 2,
            Coloring::V => r == 0 || r == 1,
            Coloring::UInverted => !(r == 1 || r == 2),
            Coloring::VInverted => !(r == 0 || r == 1),
        }
    }

    pub fn inverted(self) -> Self {
        match self {
            Coloring::U => Coloring::UInverted,
            Coloring::V => Coloring::VInverted,
            Coloring::UInverted => Coloring::U,
            Coloring::VInverted => Coloring::V,
        }
    }
}

/// A perfect matching on `1..=2m`, pairs stored as `(a, b)` with `a < b`,
/// sorted by `a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordDiagram {
    pairs: Vec<(u32, u32)>,
    m: usize,
}

impl ChordDiagram {
    /// Builds a diagram from chord endpoints, validating that they form a
    /// perfect matching on `1..=2m`.
    pub fn new(mut pairs: Vec<(u32, u32)>) -> Result<Self> {
        let m = pairs.len();
        let n_vertices = 2 * m as u32;
        let mut seen = vec![false; 2 * m + 1];
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
            for v in [p.0, p.1] {
                if v == 0 || v > n_vertices {
                    return Err(Error::InvalidArgument(format!(
                        "vertex {v} outside 1..={n_vertices}"
                    )));
                }
                if seen[v as usize] {
                    return Err(Error::InvalidArgument(format!(
                        "vertex {v} appears in two chords"
                    )));
                }
                seen[v as usize] = true;
            }
        }
        pairs.sort_unstable();
        Ok(ChordDiagram { pairs, m })
    }

    pub fn half_size(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// True when no two chords interleave as `a < c < b < d`.
    pub fn is_planar(&self) -> bool {
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            for &(c, d) in &self.pairs[i + 1..] {
                let c_inside = a < c && c < b;
                let d_inside = a < d && d < b;
                if c_inside != d_inside {
                    return false;
                }
            }
        }
        true
    }

    /// Number of chords whose endpoints share a color under `rule`.
    pub fn monochromatic_chords(&self, rule: Coloring) -> usize {
        self.pairs
            .iter()
            .filter(|&&(a, b)| rule.is_black(a) == rule.is_black(b))
            .count()
    }

    /// `partner[v]` for `v` in `1..=2m` (index 0 unused).
    fn partner_array(&self) -> Vec<u32> {
        let mut partner = vec![0u32; 2 * self.m + 1];
        for &(a, b) in &self.pairs {
            partner[a as usize] = b;
            partner[b as usize] = a;
        }
        partner
    }

    /// Atomicity predicate for diagrams on `4n` vertices (see module docs).
    pub fn is_atomic(&self) -> bool {
        debug_assert!(self.m % 2 == 0, "atomicity is defined on 4n vertices");
        let v = 2 * self.m as u32;
        let partner = self.partner_array();
        for a in 1..=v {
            let mut b = a + 3;
            while b + 1 <= v {
                // interval [a, b] of length 4l, followed by vertex b + 1
                let closed = (a..=b).all(|x| {
                    let p = partner[x as usize];
                    a <= p && p <= b
                });
                if closed && partner[(b + 1) as usize] < a {
                    return false;
                }
                if !closed && (a..=b).any(|x| partner[x as usize] < a) {
                    // a chord already escapes to the left of a; growing b
                    // cannot close the interval again
                    break;
                }
                b += 4;
            }
        }
        true
    }
}

const MAX_HALF_SIZE: usize = 12;

fn check_half_size(m: usize) -> Result<()> {
    if m == 0 || m > MAX_HALF_SIZE {
        return Err(Error::InvalidArgument(format!(
            "half-size {m} outside 1..={MAX_HALF_SIZE}"
        )));
    }
    Ok(())
}

/// All planar diagrams on `2m` vertices, exactly Catalan(m) of them, built by
/// the recursive interval split (vertex `lo` pairs at odd offset), which is
/// planar by construction.
pub fn enumerate_planar(m: usize) -> Result<Vec<ChordDiagram>> {
    check_half_size(m)?;
    let mut out = Vec::new();
    let mut pending = vec![(1u32, 2 * m as u32)];
    let mut pairs = Vec::with_capacity(m);
    planar_rec(&mut pending, &mut pairs, &mut |pairs| {
        out.push(ChordDiagram {
            pairs: pairs.to_vec(),
            m,
        });
    });
    Ok(out)
}

fn planar_rec(
    pending: &mut Vec<(u32, u32)>,
    pairs: &mut Vec<(u32, u32)>,
    emit: &mut impl FnMut(&[(u32, u32)]),
) {
    let Some((lo, hi)) = pending.pop() else {
        let mut sorted = pairs.clone();
        sorted.sort_unstable();
        emit(&sorted);
        return;
    };
    let mut mate = lo + 1;
    while mate <= hi {
        pairs.push((lo, mate));
        let right = mate < hi;
        let left = lo + 1 < mate;
        if right {
            pending.push((mate + 1, hi));
        }
        if left {
            pending.push((lo + 1, mate - 1));
        }
        planar_rec(pending, pairs, emit);
        if left {
            pending.pop();
        }
        if right {
            pending.pop();
        }
        pairs.pop();
        mate += 2;
    }
    pending.push((lo, hi));
}

/// Weight of a planar diagram: the monomial `rho^l` with `l` monochromatic
/// chords. Weights are defined for planar diagrams only.
pub fn diagram_weight(d: &ChordDiagram, rule: Coloring) -> Result<IntPoly> {
    if !d.is_planar() {
        return Err(Error::InvalidArgument(
            "weight is defined for planar diagrams only".into(),
        ));
    }
    Ok(IntPoly::monomial(1, d.monochromatic_chords(rule)))
}

fn histogram_to_poly(counts: Vec<u64>) -> IntPoly {
    IntPoly::from_coeffs(counts.into_iter().map(BigInt::from).collect())
}

fn exponent_histogram_seq(diagrams: &[ChordDiagram], rule: Coloring, max_exp: usize) -> Vec<u64> {
    let mut counts = vec![0u64; max_exp + 1];
    for d in diagrams {
        counts[d.monochromatic_chords(rule)] += 1;
    }
    counts
}

#[cfg(feature = "parallel")]
fn exponent_histogram(diagrams: &[ChordDiagram], rule: Coloring, max_exp: usize) -> Vec<u64> {
    use rayon::prelude::*;
    diagrams
        .par_iter()
        .fold(
            || vec![0u64; max_exp + 1],
            |mut counts, d| {
                counts[d.monochromatic_chords(rule)] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; max_exp + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

#[cfg(not(feature = "parallel"))]
fn exponent_histogram(diagrams: &[ChordDiagram], rule: Coloring, max_exp: usize) -> Vec<u64> {
    exponent_histogram_seq(diagrams, rule, max_exp)
}

/// Sum of weights over all planar diagrams on `2m` vertices. Equals `U_m` for
/// the `U` coloring and `V_m` for the `V` coloring.
pub fn partition_function(m: usize, rule: Coloring) -> Result<IntPoly> {
    let diagrams = enumerate_planar(m)?;
    Ok(histogram_to_poly(exponent_histogram(&diagrams, rule, m)))
}

/// Sequential variant of [`partition_function`]; same result, used as the
/// fallback path and as the baseline in benchmarks.
pub fn partition_function_seq(m: usize, rule: Coloring) -> Result<IntPoly> {
    let diagrams = enumerate_planar(m)?;
    Ok(histogram_to_poly(exponent_histogram_seq(
        &diagrams, rule, m,
    )))
}

const MAX_ATOMIC_ORDER: usize = 5;

/// Sum of weights over atomic diagrams on `4n` vertices under the `U`
/// coloring. Equals the type-B Narayana polynomial evaluated at `rho^2`.
pub fn atomic_partition_function(n: usize) -> Result<IntPoly> {
    if n == 0 || n > MAX_ATOMIC_ORDER {
        return Err(Error::InvalidArgument(format!(
            "atomic order {n} outside 1..={MAX_ATOMIC_ORDER}"
        )));
    }
    let diagrams = enumerate_planar(2 * n)?;
    let atomic: Vec<ChordDiagram> = diagrams.into_iter().filter(|d| d.is_atomic()).collect();
    Ok(histogram_to_poly(exponent_histogram(
        &atomic,
        Coloring::U,
        2 * n,
    )))
}

/// Wick pairings of `1..=2n` as pair lists, generated by always matching the
/// smallest unmatched element. `(2n-1)!!` of them.
fn pairings(n2: usize) -> Vec<Vec<(u8, u8)>> {
    assert!(n2 % 2 == 0 && n2 <= 16);
    let mut out = Vec::new();
    let mut used = vec![false; n2 + 1];
    let mut cur = Vec::new();
    fn rec(
        used: &mut Vec<bool>,
        cur: &mut Vec<(u8, u8)>,
        out: &mut Vec<Vec<(u8, u8)>>,
        n2: usize,
    ) {
        let Some(first) = (1..=n2).find(|&i| !used[i]) else {
            out.push(cur.clone());
            return;
        };
        used[first] = true;
        for j in first + 1..=n2 {
            if used[j] {
                continue;
            }
            used[j] = true;
            cur.push((first as u8, j as u8));
            rec(used, cur, out, n2);
            cur.pop();
            used[j] = false;
        }
        used[first] = false;
    }
    rec(&mut used, &mut cur, &mut out, n2);
    out
}

/// Row/column of the j-th factor (1-based) of `Tr W^k` given the index tuple
/// `idx = (i_0, ..., i_{4k-1})` with `i_{4k} = i_0`.
#[inline]
fn factor_entry(j: usize, idx: &[u32]) -> (u32, u32) {
    let prev = idx[j - 1];
    let cur = if j == idx.len() { idx[0] } else { idx[j] };
    if j % 4 == 1 || j % 4 == 2 {
        (prev, cur)
    } else {
        (cur, prev)
    }
}

/// Covariance of two matrix entries of the elliptic ensemble, as a rho
/// exponent: `Some(0)` for a repeated entry, `Some(1)` for a transposed
/// off-diagonal pair, `None` for independent entries.
#[inline]
fn covariance_exponent(a: (u32, u32), b: (u32, u32)) -> Option<u32> {
    if a == b {
        Some(0)
    } else if a.0 == b.1 && a.1 == b.0 {
        Some(1)
    } else {
        None
    }
}

fn trace_exponent_counts_for_first_index(
    k: usize,
    n: u32,
    i0: u32,
    pairings: &[Vec<(u8, u8)>],
) -> Vec<u64> {
    let len = 4 * k;
    let max_exp = 2 * k;
    let mut counts = vec![0u64; max_exp + 1];
    let mut idx = vec![0u32; len];
    idx[0] = i0;
    // odometer over idx[1..]
    loop {
        for pairing in pairings {
            let mut exp = 0u32;
            let mut zero = false;
            for &(p, q) in pairing {
                let a = factor_entry(p as usize, &idx);
                let b = factor_entry(q as usize, &idx);
                match covariance_exponent(a, b) {
                    Some(e) => exp += e,
                    None => {
                        zero = true;
                        break;
                    }
                }
            }
            if !zero {
                counts[exp as usize] += 1;
            }
        }
        // advance
        let mut pos = len - 1;
        loop {
            if pos == 0 {
                return counts;
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos -= 1;
        }
    }
}

/// Exact `(1/N) E Tr W^k` for the Gaussian elliptic ensemble, as a polynomial
/// in rho over the denominator `N^(2k+1)`, computed by enumerating every Wick
/// pairing of the `4k` factors and every index tuple. The guard keeps the
/// tuple count `N^(4k)` at or below 10^8.
pub fn exact_expected_trace_poly(k: usize, n: u32) -> Result<(IntPoly, BigInt)> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument(
            "exact trace needs k >= 1 and N >= 1".into(),
        ));
    }
    if k > 4 {
        return Err(Error::InvalidArgument(format!(
            "k = {k}: pairing enumeration is capped at k = 4"
        )));
    }
    let tuples = (n as f64).powi(4 * k as i32);
    if tuples > 1e8 {
        return Err(Error::InvalidArgument(format!(
            "N^(4k) = {tuples:.3e} exceeds the 1e8 brute-force guard"
        )));
    }
    let pairings = pairings(4 * k);
    let max_exp = 2 * k;

    let fold = |i0: u32| trace_exponent_counts_for_first_index(k, n, i0, &pairings);
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };

    #[cfg(feature = "parallel")]
    let counts = {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(fold)
            .reduce(|| vec![0u64; max_exp + 1], merge)
    };
    #[cfg(not(feature = "parallel"))]
    let counts = (0..n).map(fold).fold(vec![0u64; max_exp + 1], merge);

    let denom = BigInt::from(n).pow(2 * k as u32 + 1);
    Ok((histogram_to_poly(counts), denom))
}

/// Numeric value of [`exact_expected_trace_poly`] at a given rho.
pub fn exact_expected_trace(k: usize, n: u32, rho: f64) -> Result<f64> {
    use num_traits::ToPrimitive;
    let (poly, denom) = exact_expected_trace_poly(k, n)?;
    Ok(poly.eval_f64(rho) / denom.to_f64().unwrap())
}

/// The three-bracket large-N bookkeeping formula for `(1/N) E Tr W`:
/// `(rho^2 + 2rho/N + 1/N^2) + (rho^2/N + (2rho+1)/N^2) + (1 + 2rho/N + rho^2/N^2)`.
///
/// It counts coincident-index tuples with the generic-index covariances, so
/// it is exact at rho = 0 but overcounts for rho != 0 at any finite N (the
/// two agree in the large-N limit). Kept for comparison; the brute-force
/// enumerator is the ground truth.
pub fn bracket_formula_trace_k1(n: u32, rho: f64) -> f64 {
    let nf = n as f64;
    let r = rho;
    (r * r + 2.0 * r / nf + 1.0 / (nf * nf))
        + (r * r / nf + (2.0 * r + 1.0) / (nf * nf))
        + (1.0 + 2.0 * r / nf + r * r / (nf * nf))
}

/// Side-by-side comparison of the brute-force Wick value and the bookkeeping
/// formula at `k = 1`. Disagreements are reported, never hidden.
#[derive(Clone, Copy, Debug)]
pub struct TraceComparison {
    pub n: u32,
    pub rho: f64,
    pub brute_force: f64,
    pub bracket_formula: f64,
}

impl TraceComparison {
    pub fn difference(&self) -> f64 {
        self.bracket_formula - self.brute_force
    }
}

pub fn compare_trace_k1(n: u32, rho: f64) -> Result<TraceComparison> {
    Ok(TraceComparison {
        n,
        rho,
        brute_force: exact_expected_trace(1, n, rho)?,
        bracket_formula: bracket_formula_trace_k1(n, rho),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    use crate::moments::build_uv;
    use crate::narayana::narayana_b;
    use crate::poly::catalan;

    fn diagram(pairs: &[(u32, u32)]) -> ChordDiagram {
        ChordDiagram::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn enumerate_small_by_hand() {
        let d1 = enumerate_planar(1).unwrap();
        assert_eq!(d1, vec![diagram(&[(1, 2)])]);
        let d2 = enumerate_planar(2).unwrap();
        assert_eq!(d2.len(), 2);
        assert!(d2.contains(&diagram(&[(1, 2), (3, 4)])));
        assert!(d2.contains(&diagram(&[(1, 4), (2, 3)])));
        assert_eq!(enumerate_planar(5).unwrap().len(), 42);
        assert!(enumerate_planar(0).is_err());
        assert!(enumerate_planar(13).is_err());
    }

    #[test]
    fn enumeration_counts_match_catalan() {
        // independent count oracle: the Catalan convolution recurrence
        let mut cat = vec![1u64];
        for m in 1..=8usize {
            let c: u64 = (0..m).map(|i| cat[i] * cat[m - 1 - i]).sum();
            cat.push(c);
        }
        for m in 1..=8usize {
            let ds = enumerate_planar(m).unwrap();
            assert_eq!(ds.len() as u64, cat[m]);
            assert_eq!(catalan(m as u64).to_u64().unwrap(), cat[m]);
            for d in &ds {
                assert!(d.is_planar());
            }
            // no duplicates
            let mut sorted: Vec<_> = ds.iter().map(|d| d.pairs().to_vec()).collect();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), ds.len());
        }
    }

    #[test]
    fn weights_by_hand() {
        // vertices 1, 2 black and 3, 4 white under U: both chords monochromatic
        let d = diagram(&[(1, 2), (3, 4)]);
        assert_eq!(diagram_weight(&d, Coloring::U).unwrap(), IntPoly::monomial(1, 2));
        // nested diagram: both chords bicolored
        let d = diagram(&[(1, 4), (2, 3)]);
        assert_eq!(diagram_weight(&d, Coloring::U).unwrap(), IntPoly::one());
        // non-planar input rejected
        let d = diagram(&[(1, 3), (2, 4)]);
        assert!(diagram_weight(&d, Coloring::U).is_err());
    }

    #[test]
    fn inverted_rule_preserves_weight() {
        for m in 1..=5usize {
            for d in enumerate_planar(m).unwrap() {
                for rule in [Coloring::U, Coloring::V] {
                    assert_eq!(
                        d.monochromatic_chords(rule),
                        d.monochromatic_chords(rule.inverted())
                    );
                }
            }
        }
    }

    #[test]
    fn partition_functions_match_recurrence() {
        let table = build_uv(10);
        for m in 1..=8usize {
            assert_eq!(
                &partition_function(m, Coloring::U).unwrap(),
                table.u(m),
                "U_{m}"
            );
            assert_eq!(
                &partition_function(m, Coloring::V).unwrap(),
                table.v(m),
                "V_{m}"
            );
            assert_eq!(
                partition_function_seq(m, Coloring::U).unwrap(),
                partition_function(m, Coloring::U).unwrap()
            );
        }
        // single-chord case: V-rule colors vertex 1 black, vertex 2 white
        assert_eq!(partition_function(1, Coloring::V).unwrap(), IntPoly::one());
        assert_eq!(
            partition_function(1, Coloring::U).unwrap(),
            IntPoly::monomial(1, 1)
        );
    }

    #[test]
    fn moment_oracle_from_diagrams() {
        let table = build_uv(12);
        for k in 1..=6usize {
            assert_eq!(
                &partition_function(2 * k, Coloring::U).unwrap(),
                table.moment_polynomial(k).unwrap(),
                "M_{k}"
            );
        }
    }

    /// Removing the first chord splits a planar diagram into two diagrams
    /// whose weights multiply back (with a rho factor when the first chord is
    /// monochromatic).
    #[test]
    fn first_chord_splitting() {
        for k in 0..=4usize {
            for d in enumerate_planar(k + 1).unwrap() {
                let &(one, j) = d
                    .pairs()
                    .iter()
                    .find(|&&(a, _)| a == 1)
                    .expect("vertex 1 is matched");
                assert_eq!(one, 1);
                assert_eq!(j % 2, 0, "planar mate of vertex 1 sits at even index");

                let interior: Vec<(u32, u32)> = d
                    .pairs()
                    .iter()
                    .filter(|&&(a, b)| a > 1 && b < j)
                    .map(|&(a, b)| (a - 1, b - 1))
                    .collect();
                let exterior: Vec<(u32, u32)> = d
                    .pairs()
                    .iter()
                    .filter(|&&(a, _)| a > j)
                    .map(|&(a, b)| (a - j, b - j))
                    .collect();
                let d1 = ChordDiagram::new(interior).unwrap();
                let d2 = ChordDiagram::new(exterior).unwrap();

                let total = d.monochromatic_chords(Coloring::U);
                if j % 4 == 0 {
                    // bicolored first chord: V-piece times U-piece
                    assert_eq!(
                        total,
                        d1.monochromatic_chords(Coloring::V)
                            + d2.monochromatic_chords(Coloring::U)
                    );
                } else {
                    // monochromatic first chord: V-piece times inverted-U piece
                    assert_eq!(
                        total,
                        1 + d1.monochromatic_chords(Coloring::V)
                            + d2.monochromatic_chords(Coloring::UInverted)
                    );
                }
            }
        }
    }

    #[test]
    fn atomic_partition_functions_are_type_b_narayana() {
        for n in 1..=4usize {
            let expected = narayana_b(n).substitute_square();
            assert_eq!(
                atomic_partition_function(n).unwrap(),
                expected,
                "atomic order {n}"
            );
        }
        assert!(atomic_partition_function(0).is_err());
        assert!(atomic_partition_function(6).is_err());
    }

    #[test]
    fn atomic_small_cases_by_hand() {
        // on 4 vertices both planar diagrams are atomic
        let d = diagram(&[(1, 2), (3, 4)]);
        assert!(d.is_atomic());
        let d = diagram(&[(1, 4), (2, 3)]);
        assert!(d.is_atomic());
        // (1,2)(3,4)(5,8)(6,7): [1,4] is closed but the vertex after it opens
        // a chord to the right, so the diagram stays atomic
        let d = diagram(&[(1, 2), (3, 4), (5, 8), (6, 7)]);
        assert!(d.is_atomic());
        // (1,8)(2,3)(4,5)(6,7) decomposes: [4,7] is closed and the next
        // vertex 8 closes the chord opened at 1
        let d = diagram(&[(1, 8), (2, 3), (4, 5), (6, 7)]);
        assert!(!d.is_atomic());
    }

    #[test]
    fn exact_trace_matches_frozen_closed_form() {
        // Hand-derived exact value for k = 1 (see test comment):
        //   (1/N) E Tr W = 1 + rho^2 + (2 rho - rho^2)/N + (2 - 2 rho)/N^2.
        // Derivation: sum the three Wick pairings with exact coincident-index
        // covariances; the tuple counts are N, N(N-1), N(N-1)^2 patterns.
        for n in 1..=8u32 {
            for rho in [-1.0, -0.5, 0.0, 0.3, 0.5, 1.0] {
                let nf = n as f64;
                let expect = 1.0 + rho * rho + (2.0 * rho - rho * rho) / nf
                    + (2.0 - 2.0 * rho) / (nf * nf);
                let got = exact_expected_trace(1, n, rho).unwrap();
                assert!(
                    (got - expect).abs() < 1e-12,
                    "N = {n}, rho = {rho}: {got} vs {expect}"
                );
            }
        }
        // N = 1 is a single scalar standard Gaussian: E X^4 = 3, any rho
        for rho in [-0.7, 0.0, 0.9] {
            assert!((exact_expected_trace(1, 1, rho).unwrap() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_formula_agreement_and_documented_gap() {
        for n in 2..=8u32 {
            let nf = n as f64;
            for rho in [0.0f64, -0.5, 0.5, 1.0] {
                let cmp = compare_trace_k1(n, rho).unwrap();
                if rho == 0.0 {
                    // degeneracies carry no rho weight: exact agreement
                    assert!(cmp.difference().abs() < 1e-12, "N = {n}");
                } else {
                    // the formula overcounts coincident-index tuples by
                    // exactly (2 rho + 2 rho^2)/N + (4 rho + rho^2)/N^2
                    let gap = (2.0 * rho + 2.0 * rho * rho) / nf
                        + (4.0 * rho + rho * rho) / (nf * nf);
                    assert!(
                        (cmp.difference() - gap).abs() < 1e-12,
                        "N = {n}, rho = {rho}: gap {} vs {gap}",
                        cmp.difference()
                    );
                }
            }
        }
    }

    #[test]
    fn exact_trace_approaches_limit() {
        let (poly, denom) = exact_expected_trace_poly(1, 50).unwrap();
        for rho in [0.0, 0.5, 1.0] {
            let v = poly.eval_f64(rho) / denom.to_f64().unwrap();
            assert!((v - (1.0 + rho * rho)).abs() < 0.05);
        }
        assert!(exact_expected_trace_poly(1, 101).is_err());
        assert!(exact_expected_trace_poly(2, 11).is_err());
        assert!(exact_expected_trace_poly(0, 5).is_err());
    }

    #[test]
    fn rejects_bad_diagrams() {
        assert!(ChordDiagram::new(vec![(1, 2), (2, 3)]).is_err());
        assert!(ChordDiagram::new(vec![(1, 5)]).is_err());
        assert!(ChordDiagram::new(vec![(0, 1)]).is_err());
    }
}
