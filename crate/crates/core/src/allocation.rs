//! Photon-number allocation across parallel modes.
//!
//! The multi-mode bound is `max sum_i B(eta_i, n_i)` over `n_i >= 0`,
//! `sum_i n_i = nbar`, where `B` is the single-mode lower or upper bound.
//! For `eta_i > 1/2` each summand is strictly concave and increasing in `n_i`
//! with a marginal rate that diverges at 0, so the optimum is the unique
//! point where every active mode has the same marginal rate `lambda`.
//! [`allocate`] finds `lambda` by bisection, inverting each marginal rate
//! with an inner bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{lower_unchecked, upper_unchecked, BoundValue, PhotonBudget, Transmissivity};
use crate::error::{domain, Error, Result};
use crate::modes::ModeSpectrum;

/// Default relative tolerance on `|sum n_i(lambda) - nbar|`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest mode count accepted by [`allocate_bruteforce`].
pub const BRUTEFORCE_MAX_MODES: usize = 4;
const MAX_OUTER_ITERATIONS: usize = 400;
const INNER_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    /// Achievable rate `L`.
    #[default]
    Lower,
    /// Converse `U` (allocated the same way as `L`).
    Upper,
}

impl BoundKind {
    #[inline]
    fn eval(self, eta: f64, nbar: f64) -> f64 {
        match self {
            BoundKind::Lower => lower_unchecked(eta, nbar),
            BoundKind::Upper => upper_unchecked(eta, nbar),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// Per-mode budgets, in the spectrum's (descending) order.
    pub budgets: Vec<f64>,
    pub value: BoundValue,
    /// Common marginal rate at the optimum; 0 when no mode is active.
    pub lagrange_multiplier: f64,
}

impl Allocation {
    fn empty(m: usize) -> Self {
        Allocation {
            budgets: vec![0.0; m],
            value: BoundValue::ZERO,
            lagrange_multiplier: 0.0,
        }
    }
}

/// Objective `sum_i B(eta_i, n_i)`.
pub fn objective(etas: &ModeSpectrum, budgets: &[f64], kind: BoundKind) -> f64 {
    etas.etas()
        .iter()
        .zip(budgets)
        .map(|(&eta, &n)| kind.eval(eta, n))
        .sum()
}

#[inline]
fn xlog1p_inv(w: f64, nbar: f64) -> f64 {
    // w ln(1 + 1/(w nbar)), zero when the weight vanishes
    if w == 0.0 {
        0.0
    } else {
        w * (1.0 / (w * nbar)).ln_1p()
    }
}

#[inline]
fn marginal_unchecked(eta: f64, nbar: f64, kind: BoundKind) -> f64 {
    match kind {
        BoundKind::Lower => xlog1p_inv(eta, nbar) - xlog1p_inv(1.0 - eta, nbar),
        BoundKind::Upper => xlog1p_inv(2.0 * eta - 1.0, nbar),
    }
}

/// Derivative of the single-mode bound with respect to the budget.
pub fn marginal_rate(eta: Transmissivity, nbar: PhotonBudget, kind: BoundKind) -> Result<f64> {
    if !eta.is_positive_rate() {
        return Err(domain(format!("marginal rate needs eta > 1/2, got {}", eta.get())));
    }
    if nbar.get() <= 0.0 {
        return Err(domain("marginal rate needs nbar > 0"));
    }
    Ok(marginal_unchecked(eta.get(), nbar.get(), kind))
}

/// Modes sharing one transmissivity; they receive identical budgets.
#[derive(Debug)]
struct Group {
    eta: f64,
    count: usize,
}

fn active_groups(etas: &ModeSpectrum) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    // Spectrum is sorted, so equal values are adjacent.
    for &eta in etas.etas().iter().filter(|&&e| e > 0.5) {
        match groups.last_mut() {
            Some(g) if g.eta == eta => g.count += 1,
            _ => groups.push(Group { eta, count: 1 }),
        }
    }
    groups
}

/// Largest per-mode budget in `[0, cap]` whose marginal rate is at least `lambda`.
fn invert_marginal(eta: f64, lambda: f64, cap: f64, kind: BoundKind) -> f64 {
    if marginal_unchecked(eta, cap, kind) >= lambda {
        return cap;
    }
    let mut hi = cap.ln();
    let mut lo = hi + (1e-290f64 / cap).ln().min(0.0);
    if marginal_unchecked(eta, lo.exp(), kind) < lambda {
        return 0.0;
    }
    for _ in 0..INNER_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if marginal_unchecked(eta, mid.exp(), kind) >= lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Optimal allocation of `nbar` photons over the modes of `etas`.
///
/// Modes with `eta <= 1/2` get nothing; modes with equal transmissivity get
/// equal budgets. The returned budgets sum to `nbar` whenever some mode is
/// active.
pub fn allocate(etas: &ModeSpectrum, nbar: PhotonBudget, kind: BoundKind, tol: f64) -> Result<Allocation> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(domain(format!("allocation tolerance must lie in (0, 1), got {tol}")));
    }
    let m = etas.len();
    let nbar = nbar.get();
    let groups = active_groups(etas);
    if groups.is_empty() || nbar == 0.0 {
        return Ok(Allocation::empty(m));
    }

    let per_mode: Vec<f64> = if let [only] = groups.as_slice() {
        vec![nbar / only.count as f64]
    } else {
        let total_modes: usize = groups.iter().map(|g| g.count).sum();
        let fill = |lambda: f64| -> (Vec<f64>, f64) {
            let x: Vec<f64> = groups
                .iter()
                .map(|g| invert_marginal(g.eta, lambda, nbar, kind))
                .collect();
            let sum = groups.iter().zip(&x).map(|(g, &xi)| g.count as f64 * xi).sum();
            (x, sum)
        };

        let floor = nbar * 1e-12 / total_modes as f64;
        let mut lambda_lo = groups
            .iter()
            .map(|g| marginal_unchecked(g.eta, nbar, kind))
            .fold(f64::INFINITY, f64::min);
        let mut lambda_hi = groups
            .iter()
            .map(|g| marginal_unchecked(g.eta, floor, kind))
            .fold(0.0, f64::max);

        let mut iterations = 0;
        loop {
            let lambda = 0.5 * (lambda_lo + lambda_hi);
            let (x, sum) = fill(lambda);
            if (sum - nbar).abs() <= tol * nbar {
                break x;
            }
            iterations += 1;
            if iterations >= MAX_OUTER_ITERATIONS || lambda <= lambda_lo || lambda >= lambda_hi {
                return Err(Error::AllocationNoConvergence {
                    iterations,
                    sum,
                    target: nbar,
                    lambda_lo,
                    lambda_hi,
                });
            }
            if sum > nbar {
                lambda_lo = lambda;
            } else {
                lambda_hi = lambda;
            }
        }
    };

    // Rescale so the budgets exhaust nbar to round-off.
    let sum: f64 = groups.iter().zip(&per_mode).map(|(g, &x)| g.count as f64 * x).sum();
    let scale = if sum > 0.0 { nbar / sum } else { 1.0 };
    let mut budgets = vec![0.0; m];
    let mut next = 0;
    for (g, &x) in groups.iter().zip(&per_mode) {
        for b in &mut budgets[next..next + g.count] {
            *b = x * scale;
        }
        next += g.count;
    }
    // Guard the invariant sum <= nbar against accumulated round-off.
    let total: f64 = budgets.iter().sum();
    if total > nbar {
        let shrink = nbar / total;
        budgets.iter_mut().for_each(|b| *b *= shrink);
    }

    let lagrange_multiplier = marginal_unchecked(groups[0].eta, budgets[0], kind);
    let value = BoundValue::clamped(objective(etas, &budgets, kind));
    Ok(Allocation { budgets, value, lagrange_multiplier })
}

/// Value of the optimal allocation, `L^M` or `U^M`.
pub fn multi_mode_bound(etas: &ModeSpectrum, nbar: PhotonBudget, kind: BoundKind) -> Result<BoundValue> {
    Ok(allocate(etas, nbar, kind, DEFAULT_TOL)?.value)
}

/// Exhaustive search over budgets on a grid of spacing about `grid_step`.
///
/// The grid uses `K = round(nbar / grid_step)` units of `nbar / K` so every
/// candidate spends the full budget. Ties resolve to the lexicographically
/// smallest budget vector.
pub fn allocate_bruteforce(
    etas: &ModeSpectrum,
    nbar: PhotonBudget,
    kind: BoundKind,
    grid_step: f64,
) -> Result<Allocation> {
    let m = etas.len();
    if m > BRUTEFORCE_MAX_MODES {
        return Err(Error::TooManyModes { modes: m, max: BRUTEFORCE_MAX_MODES });
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(domain(format!("grid step must be positive, got {grid_step}")));
    }
    let nbar = nbar.get();
    let active: Vec<usize> = (0..m).filter(|&i| etas.etas()[i] > 0.5).collect();
    if active.is_empty() || nbar == 0.0 {
        return Ok(Allocation::empty(m));
    }
    let units = ((nbar / grid_step).round() as usize).max(1);
    let unit = nbar / units as f64;

    // tables[a][j] = B(eta_a, j * unit)
    let tables: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| (0..=units).map(|j| kind.eval(etas.etas()[i], j as f64 * unit)).collect())
        .collect();

    let best = (0..=units)
        .into_par_iter()
        .map(|first| best_completion(&tables, first, units))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(f64, Vec<usize>)>, |acc, cand| match acc {
            Some(a) if a.0 >= cand.0 => Some(a),
            _ => Some(cand),
        })
        .expect("grid is non-empty");

    let mut budgets = vec![0.0; m];
    for (&i, &j) in active.iter().zip(&best.1) {
        budgets[i] = j as f64 * unit;
    }
    let value = BoundValue::clamped(objective(etas, &budgets, kind));
    Ok(Allocation { budgets, value, lagrange_multiplier: 0.0 })
}

/// Best lexicographic completion given the first active mode's grid index.
fn best_completion(tables: &[Vec<f64>], first: usize, units: usize) -> (f64, Vec<usize>) {
    let head = tables[0][first];
    let rest = units - first;
    match tables.len() {
        1 => {
            // The single active mode must take everything.
            if first == units {
                (head, vec![first])
            } else {
                (f64::NEG_INFINITY, vec![first])
            }
        }
        2 => (head + tables[1][rest], vec![first, rest]),
        3 => {
            let (t1, t2) = (&tables[1], &tables[2]);
            let mut best = (f64::NEG_INFINITY, 0);
            for second in 0..=rest {
                let v = t1[second] + t2[rest - second];
                if v > best.0 {
                    best = (v, second);
                }
            }
            (head + best.0, vec![first, best.1, rest - best.1])
        }
        _ => {
            let mut best: Option<(f64, Vec<usize>)> = None;
            for second in 0..=rest {
                let (v, mut tail) = best_completion(&tables[1..], second, rest);
                let v = head + v;
                if best.as_ref().is_none_or(|b| v > b.0) {
                    tail.insert(0, first);
                    best = Some((v, tail));
                }
            }
            best.expect("non-empty range")
        }
    }
}

/// Leading low-photon term `(2 eta_max - 1) nbar ln(1/nbar)`.
pub fn asymptotic_multimode(etas: &ModeSpectrum, nbar: PhotonBudget) -> Result<f64> {
    let eta_max = etas.max();
    if eta_max <= 0.5 {
        return Err(domain(format!(
            "asymptotic rate needs some eta > 1/2, largest is {eta_max}"
        )));
    }
    let nbar = nbar.get();
    if nbar <= 0.0 {
        return Err(domain("asymptotic rate needs nbar > 0"));
    }
    Ok((2.0 * eta_max - 1.0) * nbar * (1.0 / nbar).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{lower_bound_single, upper_bound_single};

    fn spec(v: &[f64]) -> ModeSpectrum {
        ModeSpectrum::new(v.to_vec()).unwrap()
    }

    fn n(x: f64) -> PhotonBudget {
        PhotonBudget::new(x).unwrap()
    }

    fn t(x: f64) -> Transmissivity {
        Transmissivity::new(x).unwrap()
    }

    #[test]
    fn marginal_rate_at_unit_transmissivity() {
        for nbar in [1e-4f64, 0.5, 3.0] {
            let expect = (1.0 / nbar).ln_1p();
            for kind in [BoundKind::Lower, BoundKind::Upper] {
                let r = marginal_rate(t(1.0), n(nbar), kind).unwrap();
                assert!((r - expect).abs() <= 1e-15 * expect);
            }
        }
    }

    #[test]
    fn marginal_rate_matches_finite_difference() {
        let h = 1e-7;
        let fd = (lower_bound_single(t(0.7), n(1.0 + h)).nats()
            - lower_bound_single(t(0.7), n(1.0 - h)).nats())
            / (2.0 * h);
        let r = marginal_rate(t(0.7), n(1.0), BoundKind::Lower).unwrap();
        assert!((r - fd).abs() <= 1e-6 * r, "{r} vs {fd}");
        // 40-digit reference
        assert!((r - 0.181_211_115_862_603_8).abs() < 1e-15);

        let fd = (upper_bound_single(t(0.7), n(1.0 + h)).nats()
            - upper_bound_single(t(0.7), n(1.0 - h)).nats())
            / (2.0 * h);
        let r = marginal_rate(t(0.7), n(1.0), BoundKind::Upper).unwrap();
        assert!((r - fd).abs() <= 1e-6 * r);
    }

    #[test]
    fn marginal_rate_domain() {
        assert!(marginal_rate(t(0.5), n(1.0), BoundKind::Lower).is_err());
        assert!(marginal_rate(t(0.9), n(0.0), BoundKind::Upper).is_err());
    }

    #[test]
    fn marginal_rate_is_decreasing() {
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let mut prev = f64::INFINITY;
            for k in -12..=4 {
                let r = marginal_unchecked(0.73, 10f64.powi(k), kind);
                assert!(r > 0.0 && r < prev);
                prev = r;
            }
        }
    }

    #[test]
    fn symmetric_modes_split_evenly() {
        let a = allocate(&spec(&[0.9, 0.9]), n(2.0), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert_eq!(a.budgets, vec![1.0, 1.0]);
        let single = lower_bound_single(t(0.9), n(1.0)).nats();
        assert!((a.value.nats() - 2.0 * single).abs() < 1e-14);
    }

    #[test]
    fn weak_modes_get_nothing() {
        let a = allocate(&spec(&[0.9, 0.4]), n(1.0), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert_eq!(a.budgets, vec![1.0, 0.0]);

        let none = allocate(&spec(&[0.5, 0.2]), n(5.0), BoundKind::Upper, DEFAULT_TOL).unwrap();
        assert_eq!(none.budgets, vec![0.0, 0.0]);
        assert_eq!(none.value.nats(), 0.0);
    }

    #[test]
    fn zero_budget() {
        let a = allocate(&spec(&[0.9, 0.8]), n(0.0), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert_eq!(a.budgets, vec![0.0, 0.0]);
        assert_eq!(a.value.nats(), 0.0);
    }

    #[test]
    fn two_mode_optimum_matches_reference() {
        // Root of the KKT condition solved at 40 digits:
        // n_1 = 0.62270705666589150741, value = 1.21352113776301102373
        let a = allocate(&spec(&[0.9, 0.8]), n(1.0), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert!((a.budgets[0] - 0.622_707_056_665_891_5).abs() < 1e-8);
        assert!((a.value.nats() - 1.213_521_137_763_011).abs() < 1e-12);

        let grid = allocate_bruteforce(&spec(&[0.9, 0.8]), n(1.0), BoundKind::Lower, 1e-3).unwrap();
        assert!((grid.budgets[0] - a.budgets[0]).abs() <= 1e-3);
        assert!(grid.value.nats() <= a.value.nats() + 1e-12);
        assert!(a.value.nats() - grid.value.nats() < 1e-6);
    }

    #[test]
    fn kkt_conditions_hold() {
        for kind in [BoundKind::Lower, BoundKind::Upper] {
            let s = spec(&[0.95, 0.8, 0.62, 0.3]);
            for nbar in [1e-6, 0.01, 1.0, 50.0] {
                let a = allocate(&s, n(nbar), kind, DEFAULT_TOL).unwrap();
                let sum: f64 = a.budgets.iter().sum();
                assert!(sum <= nbar + 1e-12 && (sum - nbar).abs() <= 1e-9 * nbar);
                assert_eq!(a.budgets[3], 0.0);
                for (&eta, &b) in s.etas().iter().zip(&a.budgets).take(3) {
                    assert!(b > 0.0);
                    let r = marginal_unchecked(eta, b, kind);
                    assert!(
                        (r - a.lagrange_multiplier).abs() <= 1e-6 * a.lagrange_multiplier,
                        "{kind:?} nbar {nbar}: rate {r} vs lambda {}",
                        a.lagrange_multiplier
                    );
                }
                assert!((objective(&s, &a.budgets, kind) - a.value.nats()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(allocate(&spec(&[0.9]), n(1.0), BoundKind::Lower, 0.0).is_err());
        assert!(allocate(&spec(&[0.9]), n(1.0), BoundKind::Lower, f64::NAN).is_err());
    }

    #[test]
    fn multi_mode_single_mode_reduces_to_scalar_bound() {
        for nbar in [1e-3, 1.0, 10.0] {
            let l = multi_mode_bound(&spec(&[0.8]), n(nbar), BoundKind::Lower).unwrap();
            assert_eq!(l, lower_bound_single(t(0.8), n(nbar)));
            let u = multi_mode_bound(&spec(&[0.8]), n(nbar), BoundKind::Upper).unwrap();
            assert_eq!(u, upper_bound_single(t(0.8), n(nbar)));
        }
        let z = multi_mode_bound(&spec(&[0.5, 0.1, 0.45]), n(3.0), BoundKind::Lower).unwrap();
        assert_eq!(z.nats(), 0.0);
    }

    #[test]
    fn bruteforce_examples() {
        let one = allocate_bruteforce(&spec(&[0.7]), n(0.8), BoundKind::Lower, 1e-2).unwrap();
        assert_eq!(one.budgets, vec![0.8]);

        let sym = allocate_bruteforce(&spec(&[0.9, 0.9]), n(2.0), BoundKind::Lower, 1e-2).unwrap();
        let opt = allocate(&spec(&[0.9, 0.9]), n(2.0), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert!((sym.value.nats() - opt.value.nats()).abs() <= 1e-3);

        // Frozen from an independent NumPy enumeration of the same grid.
        let three = allocate_bruteforce(&spec(&[0.9, 0.7, 0.6]), n(0.5), BoundKind::Lower, 1e-3).unwrap();
        assert!((three.value.nats() - 0.741_305_576_136_138_7).abs() < 1e-12);
        for (b, e) in three.budgets.iter().zip([0.398, 0.093, 0.009]) {
            assert!((b - e).abs() < 1e-12);
        }

        assert!(matches!(
            allocate_bruteforce(&spec(&[0.9; 5]), n(1.0), BoundKind::Lower, 0.1),
            Err(Error::TooManyModes { .. })
        ));
    }

    #[test]
    fn bruteforce_ignores_weak_modes() {
        let a = allocate_bruteforce(&spec(&[0.8, 0.3, 0.5]), n(1.0), BoundKind::Upper, 1e-2).unwrap();
        assert_eq!(a.budgets, vec![1.0, 0.0, 0.0]);
        let z = allocate_bruteforce(&spec(&[0.3, 0.2]), n(1.0), BoundKind::Upper, 1e-2).unwrap();
        assert_eq!(z.budgets, vec![0.0, 0.0]);
    }

    #[test]
    fn asymptotic_multimode_examples() {
        let v = asymptotic_multimode(&spec(&[0.9]), n(1e-3)).unwrap();
        assert!((v - 0.8e-3 * 1e3f64.ln()).abs() < 1e-18);
        assert!(asymptotic_multimode(&spec(&[0.5, 0.2]), n(1e-3)).is_err());
        assert!(asymptotic_multimode(&spec(&[0.9]), n(0.0)).is_err());
    }

    #[test]
    fn small_budget_concentrates_on_best_mode() {
        let a = allocate(&spec(&[0.9, 0.8]), n(1e-6), BoundKind::Lower, DEFAULT_TOL).unwrap();
        assert!(a.budgets[0] / 1e-6 >= 0.95);
        // Coarse grid oracle agrees on where the budget goes.
        let g = allocate_bruteforce(&spec(&[0.9, 0.8]), n(1e-6), BoundKind::Lower, 1e-8).unwrap();
        assert!(g.budgets[0] / 1e-6 >= 0.95);
    }

    #[test]
    fn superadditive_equal_split() {
        for nbar in [0.01, 1.0, 30.0] {
            let mm = multi_mode_bound(&spec(&[0.75, 0.75]), n(nbar), BoundKind::Lower).unwrap();
            let split = 2.0 * lower_bound_single(t(0.75), n(nbar / 2.0)).nats();
            assert!(mm.nats() >= split - 1e-12);
            assert!((mm.nats() - split).abs() <= 1e-12);
        }
    }
}
