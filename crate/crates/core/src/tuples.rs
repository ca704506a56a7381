//! Enumeration of integer frequency tuples with nonzero entries.

use crate::error::{Error, Result};

/// Tuples visited by a box enumeration are capped at this count unless a
/// caller passes its own limit.
pub const DEFAULT_TUPLE_BUDGET: u128 = 1 << 27;

/// Number of n-tuples with entries in [-K, K] \ {0}.
pub fn box_count(n: usize, k_max: i64) -> u128 {
    (2 * k_max.max(0) as u128).pow(n as u32)
}

pub fn check_budget(what: &'static str, needed: u128, limit: u128) -> Result<()> {
    if needed > limit {
        return Err(Error::BudgetExceeded {
            what,
            needed,
            limit,
        });
    }
    Ok(())
}

/// Nonzero integers in [-K, K] in increasing order.
pub fn nonzero_range(k_max: i64) -> impl Iterator<Item = i64> + Clone {
    (-k_max..=k_max).filter(|&k| k != 0)
}

/// Calls `f` on every n-tuple with entries in [-K, K] \ {0}, in lexicographic
/// order.
pub fn for_each_in_box(n: usize, k_max: i64, mut f: impl FnMut(&[i64])) {
    let mut buf = vec![0i64; n];
    fill_box(&mut buf, 0, k_max, &mut f);
}

fn fill_box(buf: &mut [i64], slot: usize, k_max: i64, f: &mut impl FnMut(&[i64])) {
    if slot == buf.len() {
        f(buf);
        return;
    }
    for k in nonzero_range(k_max) {
        buf[slot] = k;
        fill_box(buf, slot + 1, k_max, f);
    }
}

/// Calls `f` on every n-tuple with entries in [-K, K] \ {0} summing to
/// `target`, lexicographic in the first n-1 entries (the last is implied).
pub fn for_each_with_sum(n: usize, k_max: i64, target: i64, mut f: impl FnMut(&[i64])) {
    if n == 0 {
        if target == 0 {
            f(&[]);
        }
        return;
    }
    let mut buf = vec![0i64; n];
    fill_sum(&mut buf, 0, k_max, target, &mut f);
}

fn fill_sum(buf: &mut [i64], slot: usize, k_max: i64, remaining: i64, f: &mut impl FnMut(&[i64])) {
    let left = (buf.len() - slot) as i64;
    if left == 1 {
        if remaining != 0 && remaining.abs() <= k_max {
            buf[slot] = remaining;
            f(buf);
        }
        return;
    }
    for k in nonzero_range(k_max) {
        let rest = remaining - k;
        // the remaining slots can reach at most (left - 1) K in magnitude
        if rest.abs() > (left - 1) * k_max {
            continue;
        }
        buf[slot] = k;
        fill_sum(buf, slot + 1, k_max, rest, f);
    }
}

/// |k_1|, …, |k_n| sorted in decreasing order.
pub fn sorted_magnitudes(t: &[i64]) -> Vec<u64> {
    let mut m: Vec<u64> = t.iter().map(|k| k.unsigned_abs()).collect();
    m.sort_unstable_by(|a, b| b.cmp(a));
    m
}

/// j-th largest magnitude (1-based) with the convention k_max_j = 1 for j > n.
pub fn kmax(sorted: &[u64], j: usize) -> u64 {
    sorted.get(j - 1).copied().unwrap_or(1)
}
