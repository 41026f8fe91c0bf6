//! Multi-indices over the spectral parameters.
//!
//! The recursive integral tower is indexed by multi-indices
//! `j = (j₁, …, j_d)`. An index is *admissible* when it can actually be
//! reached by the recursion: at even total degree every component is even;
//! at odd total degree exactly one component is odd (the component that was
//! just incremented). Series terms live on the even indices `2n`; their
//! derivative corrections reach down to the odd predecessors `2n − δᵢ`.

use smallvec::SmallVec;

/// Exponent vector over the spectral parameters, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(SmallVec<[u16; 4]>);

impl MultiIndex {
    pub fn new(entries: &[u16]) -> MultiIndex {
        MultiIndex(SmallVec::from_slice(entries))
    }

    /// The zero index in `d` variables.
    pub fn zero(d: usize) -> MultiIndex {
        MultiIndex(SmallVec::from_elem(0, d))
    }

    /// The unit index `δᵢ`.
    pub fn unit(d: usize, i: usize) -> MultiIndex {
        let mut e = SmallVec::from_elem(0, d);
        e[i] = 1;
        MultiIndex(e)
    }

    /// Number of spectral parameters.
    pub fn d(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    /// Total degree `|j| = Σ jᵢ`.
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// Reachable by the recursion: all components even at even degree,
    /// exactly one odd component at odd degree.
    pub fn is_admissible(&self) -> bool {
        let odd = self.0.iter().filter(|&&e| e % 2 == 1).count();
        if self.degree() % 2 == 0 {
            odd == 0
        } else {
            odd == 1
        }
    }

    /// Position of the unique odd component, if there is exactly one.
    pub fn odd_position(&self) -> Option<usize> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            if e % 2 == 1 {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    }

    /// `j − δᵢ`, or `None` when the component is already zero.
    pub fn minus(&self, i: usize) -> Option<MultiIndex> {
        if self.0[i] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[i] -= 1;
        Some(MultiIndex(e))
    }

    /// `j + δᵢ`.
    pub fn plus(&self, i: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[i] += 1;
        MultiIndex(e)
    }

    /// Componentwise half of an all-even index (`2n ↦ n`).
    pub fn half(&self) -> MultiIndex {
        debug_assert!(self.0.iter().all(|&e| e % 2 == 0));
        MultiIndex(self.0.iter().map(|&e| e / 2).collect())
    }

    /// Componentwise double (`n ↦ 2n`).
    pub fn double(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|&e| e * 2).collect())
    }

    /// Number of distinct recursion descents that reach an all-even index:
    /// the multinomial `(|j|/2)! / ∏ (jᵢ/2)!`.
    pub fn path_count(&self) -> u128 {
        debug_assert!(self.0.iter().all(|&e| e % 2 == 0));
        let total = self.degree() / 2;
        let mut count = factorial_u128(total);
        for &e in self.0.iter() {
            count /= factorial_u128(e as usize / 2);
        }
        count
    }

    /// Render as `j1..jd` joined by `.` (used in table dumps).
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn factorial_u128(n: usize) -> u128 {
    assert!(n <= 33, "factorial overflow guard: degree too large");
    (1..=n as u128).product::<u128>().max(1)
}

/// All compositions of `degree` into `d` nonnegative parts, in ascending
/// lexicographic order (`(0,1)` before `(1,0)`).
pub fn enumerate_compositions(d: usize, degree: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut scratch: Vec<u16> = vec![0; d];
    fn rec(out: &mut Vec<MultiIndex>, scratch: &mut Vec<u16>, pos: usize, left: usize) {
        if pos + 1 == scratch.len() {
            scratch[pos] = left as u16;
            out.push(MultiIndex::new(scratch));
            return;
        }
        for v in 0..=left {
            scratch[pos] = v as u16;
            rec(out, scratch, pos + 1, left - v);
        }
    }
    if d == 0 {
        return out;
    }
    rec(&mut out, &mut scratch, 0, degree);
    out
}

/// The admissible indices of one total degree, ascending lexicographic.
pub fn enumerate_admissible(d: usize, degree: usize) -> Vec<MultiIndex> {
    enumerate_compositions(d, degree)
        .into_iter()
        .filter(MultiIndex::is_admissible)
        .collect()
}

/// Admissible indices grouped by total degree `0..=max_degree`.
pub fn enumerate_by_degree(d: usize, max_degree: usize) -> Vec<Vec<MultiIndex>> {
    (0..=max_degree)
        .map(|k| enumerate_admissible(d, k))
        .collect()
}
