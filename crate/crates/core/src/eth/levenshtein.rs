//! Unit-cost edit distance with an early-exit cutoff.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EditDistance {
    Within(usize),
    OverCutoff,
}

impl EditDistance {
    pub fn within(self) -> Option<usize> {
        match self {
            EditDistance::Within(d) => Some(d),
            EditDistance::OverCutoff => None,
        }
    }
}

/// Levenshtein distance between `a` and `b`, or `OverCutoff` once it is
/// provably larger than `cutoff`.
///
/// Only the diagonal band of width `2 * cutoff + 1` of the DP matrix is
/// filled (any path leaving it already costs more than `cutoff`), and the
/// scan stops as soon as a whole row exceeds the cutoff. Cost is
/// `O(min(|a|, |b|) * cutoff)`.
pub fn levenshtein(a: &[u8], b: &[u8], cutoff: usize) -> EditDistance {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let (n, m) = (a.len(), b.len());
    if m - n > cutoff {
        return EditDistance::OverCutoff;
    }
    if n == 0 {
        return EditDistance::Within(m);
    }
    let over = cutoff.saturating_add(1);
    let mut prev = vec![over; m + 1];
    let mut cur = vec![over; m + 1];
    for (j, p) in prev.iter_mut().enumerate().take(cutoff.min(m) + 1) {
        *p = j;
    }

    for i in 1..=n {
        let lo = i.saturating_sub(cutoff);
        let hi = m.min(i.saturating_add(cutoff));
        if lo == 0 {
            cur[0] = i;
        } else {
            cur[lo - 1] = over;
        }
        let mut row_min = if lo == 0 { i } else { over };
        let ai = a[i - 1];
        for j in lo.max(1)..=hi {
            let sub = prev[j - 1] + usize::from(ai != b[j - 1]);
            let del = prev[j] + 1;
            let ins = cur[j - 1] + 1;
            let v = sub.min(del).min(ins).min(over);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < m {
            cur[hi + 1] = over;
        }
        if row_min > cutoff {
            return EditDistance::OverCutoff;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    if prev[m] <= cutoff {
        EditDistance::Within(prev[m])
    } else {
        EditDistance::OverCutoff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(levenshtein(b"abc", b"abc", 0), EditDistance::Within(0));
        assert_eq!(levenshtein(b"kitten", b"sitting", 3), EditDistance::Within(3));
        assert_eq!(levenshtein(b"kitten", b"sitting", 2), EditDistance::OverCutoff);
        assert_eq!(levenshtein(b"", b"abcde", 3), EditDistance::OverCutoff);
        assert_eq!(levenshtein(b"", b"abcde", 5), EditDistance::Within(5));
        assert_eq!(levenshtein(b"flaw", b"lawn", 10), EditDistance::Within(2));
    }
}
