//! The dispersion generator `H_n = (Σ k_j)³ − Σ k_j³` and the case analysis
//! of n-wave interactions.
//!
//! Every interaction with output frequency k = Σ k_j ≠ 0 falls into at least
//! one of four cases:
//!
//! * **A** strong dispersion, `|H_n| ≥ c_A · k_max²`;
//! * **B** resonance, `k_j = k` for some j;
//! * **C** three comparable frequencies (`n = 3`: every `|k_j| ≥ c_C |k|`;
//!   `n ≥ 4`: `k_max_3 ≥ c_C |k|`);
//! * **D** (`n ≥ 4`) `k_max_3² · k_max_4 ≥ c_D · k_max²`.
//!
//! For n = 2 only case A applies. The implicit constants are pinned in
//! [`ComparabilityConstants`] and checked exhaustively on boxes by
//! [`verify_cases`].

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tuples::{self, kmax, nonzero_range, sorted_magnitudes};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequencyTuple(Vec<i64>);

impl FrequencyTuple {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::invalid("frequency tuples need n >= 2"));
        }
        if entries.contains(&0) {
            return Err(Error::ZeroMode);
        }
        Ok(FrequencyTuple(entries))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Output frequency k = Σ k_j.
    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl fmt::Display for FrequencyTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

fn cube(k: i128) -> Result<i128> {
    k.checked_mul(k)
        .and_then(|k2| k2.checked_mul(k))
        .ok_or(Error::Overflow("H_n"))
}

/// `H_n = (Σ k_j)³ − Σ k_j³` in checked 128-bit arithmetic.
pub fn h_n(t: &[i64]) -> Result<i128> {
    let k: i128 = t.iter().map(|&x| x as i128).sum();
    let mut h = cube(k)?;
    for &kj in t {
        h = h.checked_sub(cube(kj as i128)?).ok_or(Error::Overflow("H_n"))?;
    }
    Ok(h)
}

/// `3 Σ_{j<n} k_j k̃_j k̃_{j+1}` with tail sums `k̃_j = k_j + … + k_n`; equal
/// to [`h_n`] for every tuple.
pub fn h_n_telescoped(t: &[i64]) -> Result<i128> {
    if t.len() < 2 {
        return Err(Error::invalid("H_n needs n >= 2"));
    }
    let n = t.len();
    let mut tails = vec![0i128; n + 1];
    for j in (0..n).rev() {
        tails[j] = tails[j + 1] + t[j] as i128;
    }
    let mut acc: i128 = 0;
    for j in 0..n - 1 {
        let term = (t[j] as i128)
            .checked_mul(tails[j])
            .and_then(|x| x.checked_mul(tails[j + 1]))
            .ok_or(Error::Overflow("telescoped H_n"))?;
        acc = acc.checked_add(term).ok_or(Error::Overflow("telescoped H_n"))?;
    }
    acc.checked_mul(3).ok_or(Error::Overflow("telescoped H_n"))
}

/// Explicit constants standing in for the "≳" and "≫" relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComparabilityConstants {
    pub c_a: f64,
    /// Case C constant; `None` means the default 1/(2n).
    pub c_c: Option<f64>,
    pub c_d: f64,
    /// High-low separation `|k_1| ≥ C_hl · max_{j≥2} |k_j|`.
    pub c_hl: f64,
}

impl Default for ComparabilityConstants {
    fn default() -> Self {
        ComparabilityConstants {
            c_a: 1.0,
            c_c: None,
            c_d: 0.25,
            c_hl: 4.0,
        }
    }
}

impl ComparabilityConstants {
    pub fn c_c_for(&self, n: usize) -> f64 {
        self.c_c.unwrap_or(1.0 / (2.0 * n as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.c_a, self.c_c.unwrap_or(1.0), self.c_d];
        if positive.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("comparability constants must be positive"));
        }
        if !(self.c_hl >= 2.0) || !self.c_hl.is_finite() {
            return Err(Error::invalid("C_hl must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Case {
    A,
    B,
    C,
    D,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::A, Case::B, Case::C, Case::D];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::A => "A",
            Case::B => "B",
            Case::C => "C",
            Case::D => "D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseSet(u8);

impl CaseSet {
    pub fn insert(&mut self, c: Case) {
        self.0 |= c.bit();
    }

    pub fn contains(&self, c: Case) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Case> + '_ {
        Case::ALL.into_iter().filter(|c| self.contains(*c))
    }
}

/// Witness quantities behind a classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseWitness {
    pub h: i128,
    pub k: i64,
    /// k_max_1..k_max_4, with k_max_j = 1 for j > n.
    pub kmax: [u64; 4],
    /// |H_n| / k_max².
    pub ratio_a: f64,
    /// n = 3: min_j |k_j| / |k|; n ≥ 4: k_max_3 / |k|.
    pub ratio_c: f64,
    /// k_max_3² k_max_4 / k_max².
    pub ratio_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub tuple: FrequencyTuple,
    pub holds: CaseSet,
    pub witness: CaseWitness,
}

fn witness(t: &[i64]) -> Result<CaseWitness> {
    let k: i64 = t.iter().sum();
    if k == 0 {
        return Err(Error::ZeroSum);
    }
    let h = h_n(t)?;
    let sorted = sorted_magnitudes(t);
    let km = [kmax(&sorted, 1), kmax(&sorted, 2), kmax(&sorted, 3), kmax(&sorted, 4)];
    let kabs = k.unsigned_abs() as f64;
    let k1sq = (km[0] as f64).powi(2);
    let ratio_c = if t.len() == 3 {
        sorted[2] as f64 / kabs
    } else {
        km[2] as f64 / kabs
    };
    Ok(CaseWitness {
        h,
        k,
        kmax: km,
        ratio_a: (h.unsigned_abs() as f64) / k1sq,
        ratio_c,
        ratio_d: (km[2] as f64).powi(2) * km[3] as f64 / k1sq,
    })
}

fn cases_from(t: &[i64], w: &CaseWitness, c: &ComparabilityConstants) -> CaseSet {
    let n = t.len();
    let mut holds = CaseSet::default();
    if w.ratio_a >= c.c_a {
        holds.insert(Case::A);
    }
    if n >= 3 {
        if t.contains(&w.k) {
            holds.insert(Case::B);
        }
        if w.ratio_c >= c.c_c_for(n) {
            holds.insert(Case::C);
        }
    }
    if n >= 4 && w.ratio_d >= c.c_d {
        holds.insert(Case::D);
    }
    holds
}

/// Cases whose explicit inequality holds for `t`. Tuples with k = 0 are
/// rejected.
pub fn classify(t: &FrequencyTuple, c: &ComparabilityConstants) -> Result<CaseReport> {
    let w = witness(t.entries())?;
    Ok(CaseReport {
        tuple: t.clone(),
        holds: cases_from(t.entries(), &w, c),
        witness: w,
    })
}

/// Largest value of each constant that would keep every enumerated tuple
/// covered with the other constants held fixed; `None` when no tuple relies
/// on that case alone.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SharpConstants {
    pub c_a: Option<f64>,
    pub c_c: Option<f64>,
    pub c_d: Option<f64>,
}

fn min_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Outcome of an exhaustive sweep over `0 < |k_j| ≤ K`, `k ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveReport {
    pub n: usize,
    pub k_max: i64,
    pub constants: ComparabilityConstants,
    pub tuples: u64,
    pub zero_sum_skipped: u64,
    /// Tuples satisfying each of A, B, C, D.
    pub counts: [u64; 4],
    pub violations: u64,
    /// Leading uncovered tuples in lexicographic order.
    pub counterexamples: Vec<Vec<i64>>,
    pub sharp: SharpConstants,
}

/// Counterexamples retained in an [`ExhaustiveReport`].
pub const MAX_COUNTEREXAMPLES: usize = 32;

impl ExhaustiveReport {
    fn empty(n: usize, k_max: i64, constants: ComparabilityConstants) -> Self {
        ExhaustiveReport {
            n,
            k_max,
            constants,
            tuples: 0,
            zero_sum_skipped: 0,
            counts: [0; 4],
            violations: 0,
            counterexamples: Vec::new(),
            sharp: SharpConstants::default(),
        }
    }

    fn merge(mut self, other: ExhaustiveReport) -> Self {
        self.tuples += other.tuples;
        self.zero_sum_skipped += other.zero_sum_skipped;
        for i in 0..4 {
            self.counts[i] += other.counts[i];
        }
        self.violations += other.violations;
        let room = MAX_COUNTEREXAMPLES.saturating_sub(self.counterexamples.len());
        self.counterexamples
            .extend(other.counterexamples.into_iter().take(room));
        self.sharp = SharpConstants {
            c_a: min_opt(self.sharp.c_a, other.sharp.c_a),
            c_c: min_opt(self.sharp.c_c, other.sharp.c_c),
            c_d: min_opt(self.sharp.c_d, other.sharp.c_d),
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub const CSV_HEADER: &'static str =
        "n,K,c_a,c_c,c_d,c_hl,tuples,count_a,count_b,count_c,count_d,violations,sharp_c_a,sharp_c_c,sharp_c_d";

    /// One CSV record matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
        format!(
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k_max,
            self.constants.c_a,
            self.constants.c_c_for(self.n),
            self.constants.c_d,
            self.constants.c_hl,
            self.tuples,
            self.counts[0],
            self.counts[1],
            self.counts[2],
            self.counts[3],
            self.violations,
            opt(self.sharp.c_a),
            opt(self.sharp.c_c),
            opt(self.sharp.c_d),
        )
    }
}

fn visit(t: &[i64], c: &ComparabilityConstants, acc: &mut ExhaustiveReport) -> Result<()> {
    let w = match witness(t) {
        Ok(w) => w,
        Err(Error::ZeroSum) => {
            acc.zero_sum_skipped += 1;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let holds = cases_from(t, &w, c);
    acc.tuples += 1;
    for (i, case) in Case::ALL.iter().enumerate() {
        if holds.contains(*case) {
            acc.counts[i] += 1;
        }
    }
    if holds.is_empty() {
        acc.violations += 1;
        if acc.counterexamples.len() < MAX_COUNTEREXAMPLES {
            acc.counterexamples.push(t.to_vec());
        }
    }
    let others = |skip: Case| holds.iter().any(|h| h != skip);
    if !others(Case::A) {
        acc.sharp.c_a = min_opt(acc.sharp.c_a, Some(w.ratio_a));
    }
    if t.len() >= 3 && !others(Case::C) {
        acc.sharp.c_c = min_opt(acc.sharp.c_c, Some(w.ratio_c));
    }
    if t.len() >= 4 && !others(Case::D) {
        acc.sharp.c_d = min_opt(acc.sharp.c_d, Some(w.ratio_d));
    }
    Ok(())
}

/// Largest arity accepted by [`verify_cases`].
pub const MAX_VERIFY_ARITY: usize = 5;

/// Classifies every tuple with `0 < |k_j| ≤ K` and `k ≠ 0`.
pub fn verify_cases(n: usize, k_max: i64, c: &ComparabilityConstants) -> Result<ExhaustiveReport> {
    verify_cases_with_budget(n, k_max, c, tuples::DEFAULT_TUPLE_BUDGET)
}

pub fn verify_cases_with_budget(
    n: usize,
    k_max: i64,
    c: &ComparabilityConstants,
    budget: u128,
) -> Result<ExhaustiveReport> {
    if !(2..=MAX_VERIFY_ARITY).contains(&n) {
        return Err(Error::invalid(format!("verify_cases supports 2 <= n <= 5, got {n}")));
    }
    if k_max < 1 {
        return Err(Error::invalid("verify_cases needs K >= 1"));
    }
    c.validate()?;
    tuples::check_budget("case verification", tuples::box_count(n, k_max), budget)?;
    // Parallel over the leading entry; partial reports merge in index order.
    let leading: Vec<i64> = nonzero_range(k_max).collect();
    let partials: Vec<Result<ExhaustiveReport>> = leading
        .par_iter()
        .map(|&k1| {
            let mut acc = ExhaustiveReport::empty(n, k_max, *c);
            let mut buf = vec![k1; n];
            let mut err = None;
            tuples::for_each_in_box(n - 1, k_max, |rest| {
                if err.is_some() {
                    return;
                }
                buf[1..].copy_from_slice(rest);
                if let Err(e) = visit(&buf, c, &mut acc) {
                    err = Some(e);
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(acc),
            }
        })
        .collect();
    let mut report = ExhaustiveReport::empty(n, k_max, *c);
    for p in partials {
        report = report.merge(p?);
    }
    Ok(report)
}

/// Whether the restricted-sum ratio uses the dispersion weight ⟨H_n⟩^{1/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioMode {
    /// `|k|^{s0} |σ| / (⟨H_n⟩^{1/2} k_max_1^{s1} k_max_2^{s2})`
    WithDispersion,
    /// `|k|^{s0} |σ| / (k_max_1^{s1-ε} (k_max_2 k_max_3 k_max_4)^{s2})`
    WithoutDispersion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioWeights {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupReport {
    pub sup: f64,
    pub argmax: Option<Vec<i64>>,
    pub admissible: u64,
}

impl SupReport {
    /// True when no tuple satisfied the domain predicate (sup reported as 0).
    pub fn empty_domain(&self) -> bool {
        self.admissible == 0
    }
}

/// Evaluates one symbol ratio at a tuple.
pub fn symbol_ratio(
    t: &[i64],
    sigma: Complex64,
    w: &RatioWeights,
    mode: RatioMode,
) -> Result<f64> {
    let k: i64 = t.iter().sum();
    let sorted = sorted_magnitudes(t);
    let km = |j| kmax(&sorted, j) as f64;
    let num = (k.unsigned_abs() as f64).powf(w.s0) * sigma.norm();
    let den = match mode {
        RatioMode::WithDispersion => {
            let h = h_n(t)? as f64;
            (1.0 + h * h).powf(0.25) * km(1).powf(w.s1) * km(2).powf(w.s2)
        }
        RatioMode::WithoutDispersion => {
            km(1).powf(w.s1 - w.eps) * (km(2) * km(3) * km(4)).powf(w.s2)
        }
    };
    Ok(num / den)
}

/// Maximum of the symbol ratio over all domain tuples with `0 < |k_j| ≤ K`
/// and `k ≠ 0`. Ties keep the lexicographically first tuple.
pub fn symbol_ratio_sup(
    n: usize,
    k_max: i64,
    symbol: &(dyn Fn(&[i64]) -> Complex64 + Sync),
    domain: &(dyn Fn(&[i64]) -> bool + Sync),
    w: &RatioWeights,
    mode: RatioMode,
) -> Result<SupReport> {
    if n < 2 {
        return Err(Error::invalid("symbol ratios need n >= 2"));
    }
    tuples::check_budget("symbol ratio sweep", tuples::box_count(n, k_max), tuples::DEFAULT_TUPLE_BUDGET)?;
    let mut best = SupReport {
        sup: 0.0,
        argmax: None,
        admissible: 0,
    };
    let mut err = None;
    tuples::for_each_in_box(n, k_max, |t| {
        if err.is_some() || t.iter().sum::<i64>() == 0 || !domain(t) {
            return;
        }
        best.admissible += 1;
        match symbol_ratio(t, symbol(t), w, mode) {
            Ok(r) if r.is_finite() => {
                if r > best.sup || best.argmax.is_none() {
                    best.sup = r;
                    best.argmax = Some(t.to_vec());
                }
            }
            Ok(_) => err = Some(Error::NonFinite("symbol ratio")),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(best),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: &[i64]) -> FrequencyTuple {
        FrequencyTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn h_n_examples() {
        assert_eq!(h_n(&[1, 2]).unwrap(), 18);
        assert_eq!(h_n(&[1, 2, 3]).unwrap(), 180);
        assert_eq!(h_n(&[1, -1, 2]).unwrap(), 0);
        assert_eq!(h_n(&[100, 1, 1, 1]).unwrap(), 92_724);
        assert_eq!(h_n(&[5, -1, -1, -1]).unwrap(), -114);
    }

    #[test]
    fn telescoped_examples() {
        assert_eq!(h_n_telescoped(&[1, 2, 3]).unwrap(), 180);
        assert_eq!(h_n_telescoped(&[5, -1, -1, -1]).unwrap(), -114);
        assert!(h_n_telescoped(&[4]).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = i64::MAX / 2;
        assert!(matches!(h_n(&[big, big]), Err(Error::Overflow(_))));
    }

    #[test]
    fn tuple_validation() {
        assert!(FrequencyTuple::new(vec![1]).is_err());
        assert!(FrequencyTuple::new(vec![1, 0]).is_err());
        assert_eq!(tuple(&[3, -1]).to_string(), "(3, -1)");
    }

    #[test]
    fn classify_examples() {
        let c = ComparabilityConstants::default();
        let r = classify(&tuple(&[100, 1, 1, 1]), &c).unwrap();
        assert!(r.holds.contains(Case::A));
        assert_eq!(r.witness.h, 92_724);
        let r = classify(&tuple(&[5, 2, -2]), &c).unwrap();
        assert!(r.holds.contains(Case::B));
        let third = ComparabilityConstants {
            c_c: Some(1.0 / 3.0),
            ..c
        };
        let r = classify(&tuple(&[3, 3, 3]), &third).unwrap();
        assert!(r.holds.contains(Case::C));
        assert!(matches!(classify(&tuple(&[2, -2]), &c), Err(Error::ZeroSum)));
    }

    #[test]
    fn n2_has_only_case_a() {
        let c = ComparabilityConstants::default();
        let r = classify(&tuple(&[2, -1]), &c).unwrap();
        assert!(!r.holds.contains(Case::B));
        assert!(!r.holds.contains(Case::C));
    }

    #[test]
    fn constants_validation() {
        let mut c = ComparabilityConstants::default();
        assert!(c.validate().is_ok());
        c.c_hl = 1.5;
        assert!(c.validate().is_err());
        c.c_hl = 4.0;
        c.c_a = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn verify_rejects_bad_arity_and_budget() {
        let c = ComparabilityConstants::default();
        assert!(verify_cases(6, 2, &c).is_err());
        assert!(verify_cases(1, 2, &c).is_err());
        assert!(matches!(
            verify_cases_with_budget(5, 8, &c, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn constant_symbol_sup_is_one() {
        let w = RatioWeights {
            s0: 0.0,
            s1: 0.0,
            s2: 0.0,
            eps: 0.0,
        };
        let r = symbol_ratio_sup(
            3,
            4,
            &|_| Complex64::new(1.0, 0.0),
            &|_| true,
            &w,
            RatioMode::WithoutDispersion,
        )
        .unwrap();
        assert_eq!(r.sup, 1.0);
    }

    #[test]
    fn empty_domain_reports_zero() {
        let w = RatioWeights {
            s0: 1.0,
            s1: 1.0,
            s2: 1.0,
            eps: 0.0,
        };
        let r = symbol_ratio_sup(2, 5, &|_| Complex64::new(1.0, 0.0), &|_| false, &w, RatioMode::WithDispersion)
            .unwrap();
        assert!(r.empty_domain());
        assert_eq!(r.sup, 0.0);
    }
}
