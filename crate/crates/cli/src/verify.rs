//! Reduced-size oracle checks for `cogbeam verify`.

use anyhow::Result;
use rand::Rng;

use cogbeam::allocator::{fair_split, optimal_split};
use cogbeam::beamformer::{closed_form_transmit, realized_performance, sdp_transmit, single_user_sdp};
use cogbeam::channel::{
    build_robust_matrices, complex_gaussian_vector, sample_channels, sample_multiuser_channels,
    stream_rng, ErrorSampling, SystemConfig, UncertaintyModel,
};
use cogbeam::hermitian::hermitian_eig;
use cogbeam::sdp::{solve, solve_case2};

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn config(n: usize, n_sec: usize) -> SystemConfig {
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

fn closed_form_vs_search(seed: u64) -> Result<Check> {
    let cfg = config(2, 1);
    let mut worst = f64::INFINITY;
    for (k, e) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let u = UncertaintyModel::new(e, 1.0, 1.0)?;
        for inst in 0..10u64 {
            let cs = sample_channels(&cfg, &u, seed ^ (inst + 100 * k as u64))?;
            let rm = build_robust_matrices(&cs, &cfg, None)?;
            let report = closed_form_transmit(&rm, &cfg)?;
            let budget = cfg.i_limit / cfg.p_su;
            let mut rng = stream_rng(seed, 1_000 + inst);
            let mut best: f64 = 0.0;
            for _ in 0..20_000 {
                let d = complex_gaussian_vector(2, &mut rng);
                let s = (1.0 / d.norm()).min((budget / rm.b.quad_form(&d)).sqrt());
                best = best.max(s * s * rm.a.quad_form(&d));
            }
            worst = worst.min((report.worst_case_sinr - best) / best);
        }
    }
    Ok(Check {
        name: "closed form beats random feasible search",
        passed: worst >= -1e-6,
        detail: format!("min relative margin {worst:.3e}"),
    })
}

fn sdp_agreement(seed: u64) -> Result<Check> {
    let cfg = config(5, 1);
    let u = UncertaintyModel::new(1.0, 1.0, 1.0)?;
    let (mut max_rel, mut max_defect) = (0.0f64, 0.0f64);
    for inst in 0..10 {
        let cs = sample_channels(&cfg, &u, seed + inst)?;
        let rm = build_robust_matrices(&cs, &cfg, None)?;
        let closed = closed_form_transmit(&rm, &cfg)?;
        let sol = solve(&single_user_sdp(&rm, &cfg)?)?;
        let eig = hermitian_eig(&sol.w)?;
        max_rel = max_rel.max((sol.objective_value - closed.worst_case_sinr).abs() / closed.worst_case_sinr);
        max_defect = max_defect.max(eig.values[1] / eig.values[0]);
        let via_sdp = sdp_transmit(&rm, &cfg)?;
        max_rel = max_rel.max((via_sdp.worst_case_sinr - closed.worst_case_sinr).abs() / closed.worst_case_sinr);
    }
    Ok(Check {
        name: "relaxation matches closed form with rank-one optimum",
        passed: max_rel <= 1e-5 && max_defect <= 1e-6,
        detail: format!("max relative error {max_rel:.3e}, max rank defect {max_defect:.3e}"),
    })
}

fn bound_validity(seed: u64) -> Result<Check> {
    let cfg = config(5, 1);
    let u = UncertaintyModel::new(1.0, 1.0, 1.0)?;
    let (mut pu_violations, mut sinr_violations) = (0, 0);
    for inst in 0..10 {
        let mut cs = sample_channels(&cfg, &u, seed + 50 + inst)?;
        let rm = build_robust_matrices(&cs, &cfg, None)?;
        let report = closed_form_transmit(&rm, &cfg)?;
        let mut rng = stream_rng(seed, 2_000 + inst);
        for draw in 0..1_000 {
            let sampling = if draw % 2 == 0 { ErrorSampling::Ball } else { ErrorSampling::Sphere };
            cs.redraw_errors(&mut rng, sampling);
            let perf = realized_performance(&cs, &report.pair, &cfg);
            pu_violations += (perf.pu_interference > cfg.i_limit * (1.0 + 1e-10)) as usize;
            sinr_violations += (perf.sinr < report.worst_case_sinr * (1.0 - 1e-10)) as usize;
        }
    }
    Ok(Check {
        name: "worst-case bounds hold inside the error balls",
        passed: pu_violations == 0 && sinr_violations == 0,
        detail: format!("{pu_violations} interference and {sinr_violations} SINR violations"),
    })
}

fn receiver_optimality(seed: u64) -> Result<Check> {
    let cfg = config(3, 1);
    let u = UncertaintyModel::new(1.0, 1.0, 1.0)?;
    let mut beaten = 0;
    for inst in 0..10 {
        let cs = sample_channels(&cfg, &u, seed + 200 + inst)?;
        let rm = build_robust_matrices(&cs, &cfg, None)?;
        let report = closed_form_transmit(&rm, &cfg)?;
        let signal = &rm.hs * &report.pair.w1;
        let quotient = |w2: &cogbeam::hermitian::CVector| w2.dotc(&signal).norm_sqr() / rm.d.quad_form(w2);
        let best = quotient(&report.pair.w2);
        let mut rng = stream_rng(seed, 3_000 + inst);
        for _ in 0..10_000 {
            if quotient(&complex_gaussian_vector(3, &mut rng)) > best * (1.0 + 1e-12) {
                beaten += 1;
            }
        }
    }
    Ok(Check {
        name: "receive beamformer beats random receivers",
        passed: beaten == 0,
        detail: format!("{beaten} random receivers did better"),
    })
}

fn allocator_properties(seed: u64) -> Result<Check> {
    let mut rng = stream_rng(seed, 4_000);
    let mut failures = 0;
    for _ in 0..100 {
        let gains: Vec<f64> = (0..3).map(|_| 10f64.powf(rng.random_range(-2.0..2.0))).collect();
        let i_limit = 10f64.powf(rng.random_range(-1.0..1.0));
        let opt = optimal_split(&gains, i_limit)?;
        let fair = fair_split(&gains, i_limit)?;
        let kkt: Vec<f64> = opt.active().map(|k| gains[k] / (1.0 + opt.budgets[k] * gains[k])).collect();
        let kkt_ok = kkt.iter().all(|v| (v - kkt[0]).abs() <= 1e-9 * kkt[0].max(1.0));
        let fair_ok = fair.rate_spread() <= 1e-9
            && (fair.budgets.iter().sum::<f64>() - i_limit).abs() <= 1e-9;
        let sum_ok = (opt.budgets.iter().sum::<f64>() - i_limit).abs() <= 1e-9;
        if !(kkt_ok && fair_ok && sum_ok && opt.sum_rate >= fair.sum_rate - 1e-12) {
            failures += 1;
        }
    }
    Ok(Check {
        name: "allocator stationarity, fairness and dominance",
        passed: failures == 0,
        detail: format!("{failures} of 100 instances failed"),
    })
}

fn case2_monotone(seed: u64) -> Result<Check> {
    let cfg = config(2, 2);
    let u = UncertaintyModel::new(0.5, 1.0, 1.0)?;
    let mut bad = 0;
    for inst in 0..5 {
        let users = sample_multiuser_channels(&cfg, &u, seed + 300 + inst)?;
        let out = solve_case2(&users, &cfg, 10.0, 20)?;
        if out.sum_rate_history.windows(2).any(|w| w[1] < w[0]) {
            bad += 1;
        }
    }
    Ok(Check {
        name: "full-band sum rate never decreases",
        passed: bad == 0,
        detail: format!("{bad} of 5 runs decreased"),
    })
}

pub fn run_all(seed: u64) -> Result<bool> {
    let suites: [fn(u64) -> Result<Check>; 6] = [
        closed_form_vs_search,
        sdp_agreement,
        bound_validity,
        receiver_optimality,
        allocator_properties,
        case2_monotone,
    ];
    let mut all = true;
    for suite in suites {
        let check = suite(seed)?;
        all &= check.passed;
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", check.name, check.detail);
    }
    Ok(all)
}
