//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cogbeam::allocator::{fair_split, optimal_split};
use cogbeam::beamformer::{closed_form_transmit, single_user_sdp};
use cogbeam::channel::{
    build_robust_matrices, sample_channels, sample_multiuser_channels, stream_rng, ChannelSet,
    SystemConfig, UncertaintyModel,
};
use cogbeam::harness::{run_campaign, Campaign, Scenario};
use cogbeam::sdp::{solve, solve_case2};

type CM = DMatrix<Complex64>;
type CV = DVector<Complex64>;

fn preset_cfg(n: usize, n_sec: usize) -> SystemConfig {
    SystemConfig {
        nt: n,
        nr: n,
        p_su: 100.0,
        p_pu: 100.0,
        noise_power: 1.0,
        i_limit: 10f64.powf(0.5),
        n_sec,
    }
}

fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn cn_vec(n: usize, rng: &mut ChaCha8Rng) -> CV {
    CV::from_fn(n, |_, _| cn(rng))
}

fn quad(m: &CM, v: &CV) -> f64 {
    v.dotc(&(m * v)).re
}

/// Robust matrices rebuilt from the channel data with nalgebra's own inverse.
struct Oracle {
    a: CM,
    b: CM,
    d: CM,
}

fn oracle(cs: &ChannelSet, cfg: &SystemConfig) -> Oracle {
    let u = cs.uncertainty;
    let r = u.e.sqrt() * u.sigma;
    let r_prime = u.e.sqrt() * u.sigma_prime;
    let mu = 2.0 * r * cs.h0.norm() + r * r;
    let mu_prime = 2.0 * r_prime * cs.h0_prime.norm() + r_prime * r_prime;
    let (nr, nt) = cs.hs.shape();
    let b = &cs.h0 * cs.h0.adjoint() + CM::identity(nt, nt) * Complex64::from(mu);
    let d = &cs.h0_prime * cs.h0_prime.adjoint() * Complex64::from(cfg.p_pu)
        + CM::identity(nr, nr) * Complex64::from(cfg.p_pu * mu_prime + cfg.noise_power);
    let d_inv = d.clone().try_inverse().expect("D is positive definite");
    let a = cs.hs.adjoint() * d_inv * &cs.hs * Complex64::from(cfg.p_su);
    Oracle { a, b, d }
}

struct Outcome {
    passed: bool,
    detail: String,
}

/// Closed form against a random search over the feasible set.
fn criterion_1() -> Outcome {
    let cfg = preset_cfg(2, 1);
    let budget = cfg.i_limit / cfg.p_su;
    let mut worst_margin = f64::INFINITY;
    let mut instances = 0;
    for (k, e) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let u = UncertaintyModel::new(e, 1.0, 1.0).unwrap();
        for inst in 0..34u64 {
            let seed = 10_000 * (k as u64 + 1) + inst;
            let cs = sample_channels(&cfg, &u, seed).unwrap();
            let rm = build_robust_matrices(&cs, &cfg, None).unwrap();
            let report = closed_form_transmit(&rm, &cfg).unwrap();
            let o = oracle(&cs, &cfg);
            let a = Matrix2::from_fn(|i, j| o.a[(i, j)]);
            let b = Matrix2::from_fn(|i, j| o.b[(i, j)]);
            let mut rng = stream_rng(seed, 1);
            let mut best: f64 = 0.0;
            for _ in 0..1_000_000 {
                let d = Vector2::new(cn(&mut rng), cn(&mut rng));
                let bq = d.dotc(&(b * d)).re;
                let aq = d.dotc(&(a * d)).re;
                let s2 = (1.0 / d.norm_squared()).min(budget / bq);
                best = best.max(s2 * aq);
            }
            worst_margin = worst_margin.min((report.worst_case_sinr - best) / best);
            instances += 1;
        }
    }
    Outcome {
        passed: worst_margin >= -1e-6,
        detail: format!("{instances} instances x 1e6 samples, min relative margin {worst_margin:.3e}"),
    }
}

/// Relaxation objective, rank and certificate against the closed form.
fn criterion_2() -> Outcome {
    let cfg = preset_cfg(5, 1);
    let (mut max_rel, mut max_rank, mut max_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = 0;
    for inst in 0..100u64 {
        let e = [0.25, 0.5, 1.0, 2.0][inst as usize % 4];
        let u = UncertaintyModel::new(e, 1.0, 1.0).unwrap();
        let cs = sample_channels(&cfg, &u, 20_000 + inst).unwrap();
        let rm = build_robust_matrices(&cs, &cfg, None).unwrap();
        let closed = closed_form_transmit(&rm, &cfg).unwrap();
        let problem = single_user_sdp(&rm, &cfg).unwrap();
        let sol = match solve(&problem) {
            Ok(s) => s,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        let eig = SymmetricEigen::new(sol.w.as_matrix().clone());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|x, y| y.total_cmp(x));
        max_rel = max_rel.max((sol.objective_value - closed.worst_case_sinr).abs() / closed.worst_case_sinr);
        max_rank = max_rank.max(values[1].max(0.0) / values[0]);
        max_gap = max_gap.max(sol.duality_gap / (1.0 + sol.objective_value.abs()));
    }
    Outcome {
        passed: errors == 0 && max_rel <= 1e-5 && max_rank <= 1e-6 && max_gap <= 1e-6,
        detail: format!(
            "100 instances, max relative error {max_rel:.3e}, max rank ratio {max_rank:.3e}, max gap {max_gap:.3e}, {errors} solver errors"
        ),
    }
}

fn ball_error(n: usize, radius: f64, on_sphere: bool, rng: &mut ChaCha8Rng) -> CV {
    let dir = cn_vec(n, rng);
    let dir = &dir / Complex64::from(dir.norm());
    let u: f64 = rng.random();
    let scale = if on_sphere { radius } else { radius * u.powf(1.0 / (2 * n) as f64) };
    dir * Complex64::from(scale)
}

/// Realized interference and SINR against the worst-case guarantees.
fn criterion_3() -> Outcome {
    let (mut pu_violations, mut sinr_violations, mut sdp_designs) = (0, 0, 0);
    for inst in 0..50u64 {
        let mut cfg = preset_cfg(5, 1);
        // Every fifth design sits at a budget large enough to need the relaxation.
        if inst % 5 == 4 {
            cfg.i_limit = 1e3;
        }
        let e = [0.5, 1.0, 2.0][inst as usize % 3];
        let u = UncertaintyModel::new(e, 1.0, 1.0).unwrap();
        let cs = sample_channels(&cfg, &u, 30_000 + inst).unwrap();
        let rm = build_robust_matrices(&cs, &cfg, None).unwrap();
        let report = closed_form_transmit(&rm, &cfg).unwrap();
        if report.rank_defect.is_some() {
            sdp_designs += 1;
        }
        let (w1, w2) = (&report.pair.w1, &report.pair.w2);
        let signal = cfg.p_su * w2.dotc(&(&cs.hs * w1)).norm_sqr();
        let radius = e.sqrt();
        let mut rng = stream_rng(30_000 + inst, 2);
        for draw in 0..10_000 {
            let on_sphere = draw % 2 == 1;
            let h = &cs.h0 + ball_error(5, radius, on_sphere, &mut rng);
            let hp = &cs.h0_prime + ball_error(5, radius, on_sphere, &mut rng);
            let pu = cfg.p_su * w1.dotc(&h).norm_sqr();
            let sinr = signal / (cfg.p_pu * w2.dotc(&hp).norm_sqr() + cfg.noise_power * w2.norm_squared());
            pu_violations += (pu > cfg.i_limit * (1.0 + 1e-10)) as usize;
            sinr_violations += (sinr < report.worst_case_sinr * (1.0 - 1e-10)) as usize;
        }
    }
    Outcome {
        passed: pu_violations == 0 && sinr_violations == 0 && sdp_designs > 0,
        detail: format!(
            "50 designs ({sdp_designs} via relaxation) x 1e4 draws, {pu_violations} interference and {sinr_violations} SINR violations"
        ),
    }
}

/// Receive beamformer against random unit receivers.
fn criterion_4() -> Outcome {
    let cfg = preset_cfg(5, 1);
    let mut beaten_instances = 0;
    let mut closest: f64 = f64::INFINITY;
    for inst in 0..50u64 {
        let u = UncertaintyModel::new([0.5, 1.0, 2.0][inst as usize % 3], 1.0, 1.0).unwrap();
        let cs = sample_channels(&cfg, &u, 40_000 + inst).unwrap();
        let rm = build_robust_matrices(&cs, &cfg, None).unwrap();
        let report = closed_form_transmit(&rm, &cfg).unwrap();
        let o = oracle(&cs, &cfg);
        let g = &cs.hs * &report.pair.w1;
        let quotient = |w2: &CV| w2.dotc(&g).norm_sqr() / quad(&o.d, w2);
        let best = quotient(&report.pair.w2);
        let mut rng = stream_rng(40_000 + inst, 3);
        let mut sampled: f64 = 0.0;
        for _ in 0..100_000 {
            let v = cn_vec(5, &mut rng);
            sampled = sampled.max(quotient(&(&v / Complex64::from(v.norm()))));
        }
        if sampled > best * (1.0 + 1e-12) {
            beaten_instances += 1;
        }
        closest = closest.min((best - sampled) / best);
    }
    Outcome {
        passed: beaten_instances == 0,
        detail: format!("50 instances x 1e5 receivers, {beaten_instances} beaten, min relative lead {closest:.3e}"),
    }
}

fn log_gain(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// Water-filling split against a simplex grid, stationarity and dropping.
fn criterion_5() -> Outcome {
    let mut rng = stream_rng(50_000, 0);
    let (mut grid_fail, mut kkt_fail, mut drop_fail, mut with_drops) = (0, 0, 0, 0);
    let mut max_kkt: f64 = 0.0;
    let steps = 140;
    for _ in 0..100 {
        let gains: Vec<f64> = (0..3).map(|_| log_gain(&mut rng, -2.0, 1.0)).collect();
        let i_limit = log_gain(&mut rng, -1.0, 1.5);
        let alloc = optimal_split(&gains, i_limit).unwrap();
        let mut grid_best = f64::NEG_INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let budgets = [i, j, steps - i - j].map(|k| i_limit * k as f64 / steps as f64);
                let rate: f64 = budgets.iter().zip(&gains).map(|(b, y)| (1.0 + b * y).log2()).sum::<f64>() / 3.0;
                grid_best = grid_best.max(rate);
            }
        }
        if alloc.sum_rate < grid_best - 1e-6 {
            grid_fail += 1;
        }
        let kkt: Vec<f64> = alloc.active().map(|k| gains[k] / (1.0 + alloc.budgets[k] * gains[k])).collect();
        let spread = kkt.iter().map(|v| (v - kkt[0]).abs() / kkt[0]).fold(0.0, f64::max);
        max_kkt = max_kkt.max(spread);
        if spread > 1e-9 {
            kkt_fail += 1;
        }
        if !alloc.dropped.is_empty() {
            with_drops += 1;
            let active: Vec<usize> = alloc.active().collect();
            let reduced_gains: Vec<f64> = active.iter().map(|&k| gains[k]).collect();
            let reduced = optimal_split(&reduced_gains, i_limit).unwrap();
            let same = reduced.dropped.is_empty()
                && active.iter().zip(&reduced.budgets).all(|(&k, b)| alloc.budgets[k] == *b);
            if !same {
                drop_fail += 1;
            }
        }
    }
    Outcome {
        passed: grid_fail == 0 && kkt_fail == 0 && drop_fail == 0 && with_drops > 0,
        detail: format!(
            "100 triples on a {}-point grid: {grid_fail} grid, {kkt_fail} stationarity (max {max_kkt:.1e}), {drop_fail}/{with_drops} drop mismatches",
            (steps + 1) * (steps + 2) / 2
        ),
    }
}

/// Equal-rate split: equal rates, full budget, dominated by the optimal split.
fn criterion_6() -> Outcome {
    let mut rng = stream_rng(60_000, 0);
    let (mut rate_fail, mut sum_fail, mut dom_fail) = (0, 0, 0);
    let trials = 1000;
    for t in 0..trials {
        let n = 1 + t % 5;
        let gains: Vec<f64> = (0..n).map(|_| log_gain(&mut rng, -2.0, 2.0)).collect();
        let i_limit = log_gain(&mut rng, -1.0, 1.0);
        let fair = fair_split(&gains, i_limit).unwrap();
        let opt = optimal_split(&gains, i_limit).unwrap();
        let max = fair.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = fair.rates.iter().copied().fold(f64::INFINITY, f64::min);
        rate_fail += (max - min > 1e-9) as usize;
        sum_fail += ((fair.budgets.iter().sum::<f64>() - i_limit).abs() > 1e-9) as usize;
        dom_fail += (opt.sum_rate < fair.sum_rate - 1e-12) as usize;
    }
    Outcome {
        passed: rate_fail == 0 && sum_fail == 0 && dom_fail == 0,
        detail: format!("{trials} instances: {rate_fail} unequal rates, {sum_fail} budget sums, {dom_fail} dominance failures"),
    }
}

fn desk_scale(scenario: Scenario) -> Campaign {
    let mut c = Campaign::preset(scenario);
    c.trials_outer = 100;
    c.trials_inner = 100;
    c
}

/// Trends of the full preset campaign at 100x100 trials.
fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;

    let mut vs_i = desk_scale(Scenario::SingleUserVsI);
    vs_i.uncertainty.e = 0.1;
    vs_i.sweep = (-2..=4).map(|k| 10f64.powf(0.5 * k as f64)).collect();
    let rows = run_campaign(&vs_i).unwrap();
    let increasing = rows.windows(2).all(|w| w[1].mean_rate > w[0].mean_rate);
    ok &= increasing;
    notes.push(format!("rate increasing in I: {increasing}"));
    let mut interference_ok = rows.iter().all(|r| r.mean_pu_interference <= r.sweep_value && r.violation_count == 0);

    let vs_e = desk_scale(Scenario::SingleUserVsE);
    let rows = run_campaign(&vs_e).unwrap();
    let nonincreasing = rows.windows(2).all(|w| w[1].mean_rate <= w[0].mean_rate);
    ok &= nonincreasing;
    notes.push(format!("nonincreasing in e: {nonincreasing}"));
    interference_ok &= rows.iter().all(|r| r.mean_pu_interference <= vs_e.cfg.i_limit && r.violation_count == 0);

    for scenario in [Scenario::MultiuserFair, Scenario::MultiuserOptimal] {
        let c = desk_scale(scenario);
        let rows = run_campaign(&c).unwrap();
        interference_ok &= rows.iter().all(|r| r.mean_pu_interference <= r.sweep_value && r.violation_count == 0);
    }
    let c2 = desk_scale(Scenario::Case2Sweep);
    let rows = run_campaign(&c2).unwrap();
    interference_ok &= rows.iter().all(|r| r.mean_pu_interference <= c2.cfg.i_limit && r.violation_count == 0);
    ok &= interference_ok;
    notes.push(format!("interference under limit: {interference_ok}"));

    let trace = desk_scale(Scenario::FairnessTrace);
    let n = trace.cfg.n_sec;
    let rows = run_campaign(&trace).unwrap();
    let spread = |r: &[f64]| {
        r.iter().copied().fold(f64::NEG_INFINITY, f64::max) - r.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let fair_zero = rows.iter().all(|r| spread(&r.per_user_rates.as_ref().unwrap()[..n]) <= 1e-12);
    let optimal_nonzero = rows.iter().all(|r| spread(&r.per_user_rates.as_ref().unwrap()[n..]) > 0.0);
    ok &= fair_zero && optimal_nonzero;
    notes.push(format!("fair spread zero: {fair_zero}, optimal spread nonzero: {optimal_nonzero}"));

    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed <= 600.0;
    notes.push(format!("{elapsed:.1} s"));
    Outcome {
        passed: ok,
        detail: notes.join(", "),
    }
}

/// Case-2 sum rate with robust denominators and cross interference.
fn joint_sum_rate(o: &[(Matrix2<Complex64>, Matrix2<Complex64>)], w1: &[Vector2<Complex64>; 2], p_su: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..2 {
        let (hs, d) = &o[k];
        let own = hs * w1[k];
        let cross = hs * w1[1 - k];
        let q = d + cross * cross.adjoint() * Complex64::from(p_su);
        let w2 = q.try_inverse().expect("positive definite") * own;
        let sinr = p_su * w2.dotc(&own).norm_sqr() / (w2.dotc(&(q * w2)).re);
        total += (1.0 + sinr).log2();
    }
    total
}

/// Alternating optimization: monotone, single-user reduction, near a joint search.
fn criterion_8() -> Outcome {
    let mut notes = Vec::new();

    let cfg = preset_cfg(5, 3);
    let mut decreasing = 0;
    for inst in 0..20u64 {
        let u = UncertaintyModel::new(0.5, 1.0, 1.0).unwrap();
        let users = sample_multiuser_channels(&cfg, &u, 80_000 + inst).unwrap();
        let i_prime = [0.01, 0.1, 1.0, 10.0][inst as usize % 4];
        let out = solve_case2(&users, &cfg, i_prime, 30).unwrap();
        decreasing += out.sum_rate_history.windows(2).any(|w| w[1] < w[0]) as usize;
    }
    notes.push(format!("{decreasing}/20 histories decrease"));

    let single = preset_cfg(5, 1);
    let mut max_dev: f64 = 0.0;
    for inst in 0..20u64 {
        let u = UncertaintyModel::new(1.0, 1.0, 1.0).unwrap();
        let cs = sample_channels(&single, &u, 81_000 + inst).unwrap();
        let out = solve_case2(std::slice::from_ref(&cs), &single, 1.0, 10).unwrap();
        let rm = build_robust_matrices(&cs, &single, None).unwrap();
        let solo = closed_form_transmit(&rm, &single).unwrap();
        max_dev = max_dev.max((out.reports[0].worst_case_sinr - solo.worst_case_sinr).abs() / solo.worst_case_sinr);
    }
    notes.push(format!("single-user deviation {max_dev:.1e}"));

    let cfg2 = preset_cfg(2, 2);
    let budget = cfg2.i_limit / cfg2.n_sec as f64 / cfg2.p_su;
    let mut worst_ratio = f64::INFINITY;
    for inst in 0..10u64 {
        let u = UncertaintyModel::new(0.5, 1.0, 1.0).unwrap();
        let users = sample_multiuser_channels(&cfg2, &u, 82_000 + inst).unwrap();
        let out = solve_case2(&users, &cfg2, 1e6, 50).unwrap();
        let mats: Vec<_> = users
            .iter()
            .map(|cs| {
                let o = oracle(cs, &cfg2);
                (Matrix2::from_fn(|i, j| cs.hs[(i, j)]), Matrix2::from_fn(|i, j| o.d[(i, j)]), Matrix2::from_fn(|i, j| o.b[(i, j)]))
            })
            .collect();
        let pairs: Vec<_> = mats.iter().map(|(h, d, _)| (*h, *d)).collect();
        let mut rng = stream_rng(82_000 + inst, 4);
        let mut best: f64 = 0.0;
        for _ in 0..1_000_000 {
            let mut w1 = [Vector2::zeros(), Vector2::zeros()];
            for (k, w) in w1.iter_mut().enumerate() {
                let d = Vector2::new(cn(&mut rng), cn(&mut rng));
                let b = &mats[k].2;
                let s2 = (1.0 / d.norm_squared()).min(budget / d.dotc(&(b * d)).re);
                let u: f64 = rng.random();
                // Half the samples on the boundary, half strictly inside.
                let frac = if rng.random::<bool>() { 1.0 } else { u };
                *w = d * Complex64::from((s2 * frac).sqrt());
            }
            best = best.max(joint_sum_rate(&pairs, &w1, cfg2.p_su));
        }
        worst_ratio = worst_ratio.min(out.sum_rate / best);
    }
    notes.push(format!("min ratio to joint search {worst_ratio:.4}"));

    Outcome {
        passed: decreasing == 0 && max_dev <= 1e-8 && worst_ratio >= 0.95,
        detail: notes.join(", "),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed form vs brute force", criterion_1),
        ("relaxation agreement and rank one", criterion_2),
        ("robust bound validity", criterion_3),
        ("receive beamformer optimality", criterion_4),
        ("water-filling optimality", criterion_5),
        ("equal-rate split", criterion_6),
        ("campaign trends", criterion_7),
        ("full-band alternating optimization", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        failed += !outcome.passed as usize;
        println!(
            "criterion {}: {tag} {name}: {} [{:.1} s]",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
