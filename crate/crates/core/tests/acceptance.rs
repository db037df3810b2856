//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//!
//! Runs without the libtest harness so every line is printed in order and
//! runtimes are measured one criterion at a time.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wiretap_bounds::figure::{run_figure, FigureRequest};
use wiretap_bounds::haar::haar_unitary_with;
use wiretap_bounds::turbulence::analyze;
use wiretap_bounds::{
    allocate, allocate_bruteforce, asymptotic_coefficients, asymptotic_multimode, cascade_moments, hermitian_eigen,
    lower_bound_single, majorizes, mode_decompose, multi_mode_bound, upper_bound_single, BoundKind, CascadeInput,
    ComplexMatrix, EnsembleKind, EnsembleSpec, ModeSpectrum, PhotonBudget, Transmissivity, UnitaryTransition,
};

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn t(eta: f64) -> Transmissivity {
    Transmissivity::new(eta).unwrap()
}

fn n(nbar: f64) -> PhotonBudget {
    PhotonBudget::new(nbar).unwrap()
}

fn eta_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// 30 log-spaced budgets from 1e-6 to 1e3.
fn nbar_grid() -> Vec<f64> {
    (0..30).map(|j| 10f64.powf(-6.0 + 9.0 * j as f64 / 29.0)).collect()
}

fn rel_err(x: f64, target: f64) -> f64 {
    ((x - target) / target).abs()
}

fn criterion_1() -> Outcome {
    let mut violations = 0;
    let mut nonzero_below_half = 0;
    let mut points = 0;
    for &eta in &eta_grid() {
        for &nbar in &nbar_grid() {
            points += 1;
            let l = lower_bound_single(t(eta), n(nbar)).nats();
            let u = upper_bound_single(t(eta), n(nbar)).nats();
            if !(0.0 <= l && l <= u) {
                violations += 1;
            }
            if eta <= 0.5 && (l != 0.0 || u != 0.0) {
                nonzero_below_half += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0 && nonzero_below_half == 0,
        detail: format!(
            "0 <= L <= U on {points} grid points: {violations} violations; L = U = 0 for eta <= 1/2: {nonzero_below_half} exceptions"
        ),
    }
}

fn criterion_2() -> Outcome {
    let (eta, nbar) = (0.7f64, 1e-8f64);
    let scale = nbar * (1.0 / nbar).ln();
    let l = lower_bound_single(t(eta), n(nbar)).nats();
    let u = upper_bound_single(t(eta), n(nbar)).nats();
    let (rl, ru) = (l / scale, u / scale);
    let lead = 2.0 * eta - 1.0;
    let c = asymptotic_coefficients(t(eta)).unwrap();
    let gap = (u - l) / nbar;
    let coeff_gap = c.upper - c.lower;
    let (el, eu, eg) = (rel_err(rl, lead), rel_err(ru, lead), rel_err(gap, coeff_gap));
    Outcome {
        pass: el <= 0.02 && eu <= 0.02 && eg <= 0.10,
        detail: format!(
            "L/(n ln(1/n)) = {rl:.6} ({:.2}% from {lead:.1}, limit 2%); U/(n ln(1/n)) = {ru:.6} ({:.2}%, limit 2%); \
             (U-L)/n = {gap:.9} vs {coeff_gap:.9} ({:.2e}%, limit 10%)",
            100.0 * el,
            100.0 * eu,
            100.0 * eg
        ),
    }
}

fn criterion_3() -> Outcome {
    const MONO_TOL: f64 = 1e-12;
    const CURV_TOL: f64 = 1e-9;
    let etas = eta_grid();
    let nbars = nbar_grid();
    let lt: Vec<Vec<f64>> = etas
        .iter()
        .map(|&e| nbars.iter().map(|&x| lower_bound_single(t(e), n(x)).nats()).collect())
        .collect();
    let ut: Vec<Vec<f64>> = etas
        .iter()
        .map(|&e| nbars.iter().map(|&x| upper_bound_single(t(e), n(x)).nats()).collect())
        .collect();

    let mut mono = 0;
    for table in [&lt, &ut] {
        for i in 0..etas.len() {
            for j in 0..nbars.len() {
                if i + 1 < etas.len() && table[i + 1][j] < table[i][j] - MONO_TOL {
                    mono += 1;
                }
                if j + 1 < nbars.len() && table[i][j + 1] < table[i][j] - MONO_TOL {
                    mono += 1;
                }
            }
        }
    }

    // Uniform eta grid: plain second differences.
    let mut convex = 0;
    for w in lt.windows(3) {
        for ((a, b), c) in w[0].iter().zip(&w[1]).zip(&w[2]) {
            if c - 2.0 * b + a < -CURV_TOL {
                convex += 1;
            }
        }
    }

    // Log-spaced nbar grid: second divided differences.
    let mut concave = 0;
    for table in [&lt, &ut] {
        for row in table.iter() {
            for j in 1..nbars.len() - 1 {
                let (x0, x1, x2) = (nbars[j - 1], nbars[j], nbars[j + 1]);
                let s1 = (row[j] - row[j - 1]) / (x1 - x0);
                let s2 = (row[j + 1] - row[j]) / (x2 - x1);
                if 2.0 * (s2 - s1) / (x2 - x0) > CURV_TOL {
                    concave += 1;
                }
            }
        }
    }
    Outcome {
        pass: mono == 0 && convex == 0 && concave == 0,
        detail: format!(
            "monotonicity violations {mono}; eta-convexity violations of L {convex}; nbar-concavity violations of L, U {concave}"
        ),
    }
}

fn spectrum_of(tr: &UnitaryTransition) -> (Vec<f64>, f64) {
    let d = mode_decompose(tr).unwrap();
    (d.spectrum.etas().to_vec(), d.partition_residual)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_partition, mut worst_reconstruct, mut worst_invariance) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0;
    for _ in 0..100 {
        let size = rng.random_range(2..=8);
        let k = rng.random_range(1..size);
        let l = size - k;
        let m = rng.random_range(1..=size);
        let u = haar_unitary_with(size, &mut rng);
        let tr = match UnitaryTransition::new(u.clone(), m, k, l) {
            Ok(tr) => tr,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let (spec, residual) = spectrum_of(&tr);
        worst_partition = worst_partition.max(residual);

        let gram = tr.t_ab().gram();
        let eig = hermitian_eigen(&gram).unwrap();
        worst_reconstruct = worst_reconstruct.max((&eig.reconstruct() - &gram).frobenius_norm());

        // Bob-side rotation on the left, Alice-side rotation on the right.
        let left = haar_unitary_with(k, &mut rng).direct_sum(&ComplexMatrix::identity(l));
        let right = haar_unitary_with(m, &mut rng).direct_sum(&ComplexMatrix::identity(size - m));
        for rotated in [left.matmul(&u).unwrap(), u.matmul(&right).unwrap()] {
            match UnitaryTransition::new(rotated, m, k, l) {
                Ok(tr2) => worst_invariance = worst_invariance.max(max_abs_diff(&spec, &spectrum_of(&tr2).0)),
                Err(_) => failures += 1,
            }
        }
    }
    Outcome {
        pass: failures == 0 && worst_partition <= 1e-10 && worst_reconstruct <= 1e-10 && worst_invariance <= 1e-10,
        detail: format!(
            "100 Haar unitaries up to 8x8: max partition residual {worst_partition:.2e}, max reconstruction residual \
             {worst_reconstruct:.2e}, max spectrum change under one-sided rotation {worst_invariance:.2e} (limit 1e-10), \
             rejected {failures}"
        ),
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let budgets = [0.1, 1.0, 10.0];
    let mut worst_gap = 0.0f64;
    let mut comparisons = 0;
    for s in 0..50 {
        let m = if s % 2 == 0 { 2 } else { 3 };
        let etas: Vec<f64> = (0..m).map(|_| rng.random_range(0.3..1.0)).collect();
        let spectrum = ModeSpectrum::new(etas).unwrap();
        for &nbar in &budgets {
            let fast = allocate(&spectrum, n(nbar), BoundKind::Lower, 1e-10).unwrap();
            let brute = allocate_bruteforce(&spectrum, n(nbar), BoundKind::Lower, 1e-3).unwrap();
            worst_gap = worst_gap.max((fast.value.nats() - brute.value.nats()).abs());
            comparisons += 1;
        }
    }

    let mut worst_spread = 0.0f64;
    for &eta in &[0.55, 0.7, 0.9, 1.0] {
        for m in [2, 3] {
            let spectrum = ModeSpectrum::new(vec![eta; m]).unwrap();
            for &nbar in &budgets {
                let a = allocate(&spectrum, n(nbar), BoundKind::Lower, 1e-10).unwrap();
                let hi = a.budgets.iter().cloned().fold(f64::MIN, f64::max);
                let lo = a.budgets.iter().cloned().fold(f64::MAX, f64::min);
                worst_spread = worst_spread.max(hi - lo);
            }
        }
    }
    Outcome {
        pass: worst_gap <= 1e-4 && worst_spread <= 1e-9,
        detail: format!(
            "{comparisons} optimizer/brute-force comparisons: max |gap| {worst_gap:.2e} nats (limit 1e-4); \
             symmetric spectra budget spread {worst_spread:.2e} (limit 1e-9)"
        ),
    }
}

fn criterion_6() -> Outcome {
    let spectrum = ModeSpectrum::new(vec![0.9, 0.8]).unwrap();
    let nbar = n(1e-6);
    let lower = allocate(&spectrum, nbar, BoundKind::Lower, 1e-10).unwrap();
    let upper = allocate(&spectrum, nbar, BoundKind::Upper, 1e-10).unwrap();
    let share_l = lower.budgets[0] / nbar.get();
    let share_u = upper.budgets[0] / nbar.get();
    let asym = asymptotic_multimode(&spectrum, nbar).unwrap();
    let lm = multi_mode_bound(&spectrum, nbar, BoundKind::Lower).unwrap().nats();
    let um = multi_mode_bound(&spectrum, nbar, BoundKind::Upper).unwrap().nats();
    let (el, eu) = (rel_err(asym, lm), rel_err(asym, um));
    Outcome {
        pass: share_l >= 0.95 && share_u >= 0.95 && el <= 0.15 && eu <= 0.15,
        detail: format!(
            "share on eta = 0.9: {:.2}% (L), {:.2}% (U), limit 95%; asymptotic vs L^M {:.2}%, vs U^M {:.2}% (limit 15%)",
            100.0 * share_l,
            100.0 * share_u,
            100.0 * el,
            100.0 * eu
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut schur = 0;
    let mut not_majorized = 0;
    for _ in 0..1000 {
        let w = haar_unitary_with(4, &mut rng);
        let lambda: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        let h = w.matmul(&ComplexMatrix::diag_real(&lambda)).unwrap().matmul(&w.adjoint()).unwrap();
        let nbar = n(10f64.powf(rng.random_range(-3.0..1.0)));
        let eig = hermitian_eigen(&h).unwrap().values;
        let diag: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        let by_eig = multi_mode_bound(&ModeSpectrum::from_eigenvalues(&eig, 1e-10).unwrap(), nbar, BoundKind::Lower)
            .unwrap()
            .nats();
        let by_diag = multi_mode_bound(&ModeSpectrum::from_eigenvalues(&diag, 1e-10).unwrap(), nbar, BoundKind::Lower)
            .unwrap()
            .nats();
        if by_eig < by_diag - 1e-9 {
            schur += 1;
        }
        if !majorizes(&eig, &diag).unwrap() {
            not_majorized += 1;
        }
    }

    let spec = EnsembleSpec::new(EnsembleKind::HaarSubblock { n: 4, m: 2, k: 2 }, 7).unwrap();
    let report = analyze(&spec, n(1.0), 10_000).unwrap();
    let mc_ok = report.mean >= report.bound_eigen - 3.0 * report.std_error;

    let mut basis_order = 0;
    for (i, kind) in [
        EnsembleKind::HaarSubblock { n: 5, m: 3, k: 2 },
        EnsembleKind::HaarSubblock { n: 6, m: 2, k: 4 },
        EnsembleKind::RandomizedSpectrum {
            base_etas: vec![0.95, 0.7, 0.4],
            conjugation: Default::default(),
            jitter: 0.3,
        },
    ]
    .into_iter()
    .enumerate()
    {
        let r = analyze(&EnsembleSpec::new(kind, i as u64).unwrap(), n(1.0), 500).unwrap();
        if r.bound_eigen < r.bound_diagonal {
            basis_order += 1;
        }
        basis_order += r.schur_violations as usize;
    }
    if report.bound_eigen < report.bound_diagonal {
        basis_order += 1;
    }
    Outcome {
        pass: schur == 0 && not_majorized == 0 && mc_ok && basis_order == 0 && report.schur_violations == 0,
        detail: format!(
            "1000 Hermitian contractions: {schur} Schur violations, {not_majorized} majorization failures; \
             HaarSubblock(4,2,2) mean {:.6} - 3 se {:.6} vs eigen bound {:.6}; basis-order violations {basis_order}",
            report.mean,
            3.0 * report.std_error,
            report.bound_eigen
        ),
    }
}

fn criterion_8() -> Outcome {
    let amplitudes = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.3, -1.2),
        Complex64::new(-2.5, 1.7),
        Complex64::new(1e-3, 4.0),
    ];
    let (mut worst_n, mut worst_mean) = (0.0f64, 0.0f64);
    for i in 1..=100 {
        let eta = 0.5 + 0.5 * i as f64 / 100.0;
        for &alpha in &amplitudes {
            let c = cascade_moments(t(eta), CascadeInput::Coherent(alpha)).unwrap();
            worst_n = worst_n.max((c.n_c - (2.0 * eta - 1.0) * c.n_a).abs());
            worst_n = worst_n.max((c.n_e - c.n_e_prime).abs());
            worst_mean = worst_mean.max((c.mean_e.unwrap() - c.mean_e_prime.unwrap()).norm());
        }
        for &photons in &[0.0, 1e-6, 0.5, 3.0, 40.0] {
            let c = cascade_moments(t(eta), CascadeInput::Photons(photons)).unwrap();
            worst_n = worst_n.max((c.n_c - (2.0 * eta - 1.0) * c.n_a).abs());
        }
    }
    Outcome {
        pass: worst_n <= 1e-12 && worst_mean <= 1e-12,
        detail: format!(
            "max |n_c - (2 eta - 1) n_a| {worst_n:.2e}, max |mean_e - mean_e'| {worst_mean:.2e} (limit 1e-12)"
        ),
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    let reqs = [FigureRequest::nbar_sweep(), FigureRequest::eta_sweep(), FigureRequest::spectral_sweep()];
    let mut tables = Vec::new();
    for (i, req) in reqs.iter().enumerate() {
        let table = run_figure(req).unwrap();
        let (a, b) = (dir.path().join(format!("{i}a.csv")), dir.path().join(format!("{i}b.csv")));
        table.write_csv(&a).unwrap();
        run_figure(req).unwrap().write_csv(&b).unwrap();
        if std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            problems.push(format!("figure {i} CSV not reproducible"));
        }
        if table.rows.iter().any(|r| r[2] < r[1]) {
            problems.push(format!("figure {i} has upper < lower"));
        }
        tables.push(table);
    }
    let decreasing = |rows: &[[f64; 3]]| rows.windows(2).all(|w| w[1][1] < w[0][1] && w[1][2] < w[0][2]);
    let increasing = |rows: &[[f64; 3]]| rows.windows(2).all(|w| w[1][1] > w[0][1] && w[1][2] > w[0][2]);
    if !decreasing(&tables[0].rows) {
        problems.push("nbar sweep not decreasing".into());
    }
    let eta_rows = &tables[1].rows;
    if eta_rows[0][1] != 0.0 || eta_rows[0][2] != 0.0 || !increasing(eta_rows) {
        problems.push("eta sweep not zero at 1/2 and increasing".into());
    }
    if !decreasing(&tables[2].rows) {
        problems.push("spectral sweep not decreasing".into());
    }

    let fit: Vec<&[f64; 3]> = tables[0].rows.iter().filter(|r| r[0] <= 1e-3 * (1.0 + 1e-12)).collect();
    let xs: Vec<f64> = fit.iter().map(|r| (1.0 / r[0]).log2()).collect();
    let sl = slope(&xs, &fit.iter().map(|r| r[1]).collect::<Vec<_>>());
    let su = slope(&xs, &fit.iter().map(|r| r[2]).collect::<Vec<_>>());
    let target = 2.0 * 0.7 - 1.0;
    let slope_ok = rel_err(sl, target) <= 0.05 && rel_err(su, target) <= 0.05;
    Outcome {
        pass: problems.is_empty() && slope_ok,
        detail: format!(
            "ordering/monotonicity/reproducibility issues: {}; slope vs log2(1/n) on [1e-6, 1e-3] over {} points: \
             lower {sl:.4}, upper {su:.4} (target {target:.1} +- 5%)",
            if problems.is_empty() { "none".to_string() } else { problems.join("; ") },
            fit.len()
        ),
    }
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 bound ordering and vanishing", criterion_1, Duration::from_secs(1)),
        ("2 low-photon sandwich", criterion_2, Duration::from_secs(1)),
        ("3 monotonicity and curvature", criterion_3, Duration::from_secs(1)),
        ("4 mode decomposition", criterion_4, Duration::from_secs(5)),
        ("5 optimal allocation", criterion_5, Duration::from_secs(60)),
        ("6 low-photon concentration", criterion_6, Duration::from_secs(1)),
        ("7 second-moment bound chain", criterion_7, Duration::from_secs(120)),
        ("8 cascade identities", criterion_8, Duration::from_secs(1)),
        ("9 figure data", criterion_9, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < limit;
        let pass = outcome.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.3} s, limit {} s{}]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    println!("acceptance: {}/{} criteria passed", 9 - failed, 9);
    if failed > 0 {
        std::process::exit(1);
    }
}
