//! Grid invariants of the region classifiers.

use polarset::alignment::{check_alignment_with, check_nonalignment_with, classify_with, Outcome};
use polarset::broadcast::{bc_alignment_with, bc_channels};
use polarset::entropy::h_b;
use polarset::quantum::{ent_needed_with, ent_zero_with};
use polarset::sweep::{curve_threshold, Curve, QuantumRay};
use polarset::wiretap::{cs_bec_bsc, cs_bsc_bec, key_need_bec_bsc, key_need_bsc_bec, KeyNeed};
use polarset::{Dmc, Execution, PauliChannel};

const SEQ: Execution = Execution::Sequential;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn alignment_levels_are_monotone_and_exclusive() {
    for &a in &grid(0.01, 0.49, 12) {
        for &b in &grid(0.02, 0.98, 12) {
            let (w, v) = (Dmc::bsc(a).unwrap(), Dmc::bec(b).unwrap());
            let lb: Vec<bool> = (0..=4).map(|k| check_nonalignment_with(&w, &v, k, SEQ).unwrap().fired).collect();
            let ub: Vec<bool> = (0..=2).map(|k| check_alignment_with(&w, &v, k, SEQ).unwrap().holds).collect();
            for k in 1..lb.len() {
                assert!(!lb[k - 1] || lb[k], "LB lost at level {k} for ({a}, {b})");
            }
            // a certificate at a shallow level survives at deeper ones
            for k in 1..ub.len() {
                assert!(!ub[k - 1] || ub[k], "UB lost at level {k} for ({a}, {b})");
            }
            assert!(!(lb.iter().any(|&x| x) && ub.iter().any(|&x| x)), "both certificates at ({a}, {b})");
        }
    }
}

#[test]
fn bec_pair_alignment_is_erasure_order() {
    for &b1 in &grid(0.0, 1.0, 21) {
        for &b2 in &grid(0.0, 1.0, 21) {
            if (b1 - b2).abs() < 1e-9 {
                continue;
            }
            let holds = check_alignment_with(&Dmc::bec(b1).unwrap(), &Dmc::bec(b2).unwrap(), 0, SEQ).unwrap().holds;
            assert_eq!(holds, b1 <= b2, "({b1}, {b2})");
        }
    }
}

#[test]
fn bsc_bec_secrecy_capacity_sign_and_monotonicity() {
    let alphas = grid(0.02, 0.45, 10);
    let betas = grid(0.0, 1.0, 41);
    for &a in &alphas {
        let edge = 4.0 * a * (1.0 - a);
        let mut prev = 0.0;
        for &b in &betas {
            let cs = cs_bsc_bec(a, b).unwrap().cs;
            if b <= edge - 1e-9 {
                assert_eq!(cs, 0.0, "({a}, {b})");
            } else if b >= edge + 1e-9 {
                assert!(cs > 0.0, "({a}, {b})");
            }
            assert!(cs >= prev - 1e-12, "not nondecreasing in beta at ({a}, {b})");
            prev = cs;
        }
    }
    for &b in &betas {
        let mut prev = f64::INFINITY;
        for &a in &alphas {
            let cs = cs_bsc_bec(a, b).unwrap().cs;
            assert!(cs <= prev + 1e-12, "not nonincreasing in alpha at ({a}, {b})");
            prev = cs;
        }
    }
}

#[test]
fn bec_bsc_capacity_continuous_at_more_capable_edge() {
    for &a in &grid(0.05, 0.3, 6) {
        let h = h_b(a);
        let below = cs_bec_bsc(a, h - 1e-9).unwrap().cs;
        let above = cs_bec_bsc(a, h + 1e-9).unwrap().cs;
        assert!((below - above).abs() <= 1e-6, "alpha {a}: {below} vs {above}");
    }
}

#[test]
fn key_need_verdicts_agree_with_regime_edges() {
    for &a in &grid(0.05, 0.3, 6) {
        for &b in &grid(0.02, 0.98, 25) {
            let forward = key_need_bsc_bec(a, b).unwrap().need;
            assert_ne!(forward, KeyNeed::KeyNeeded);
            let reverse = key_need_bec_bsc(a, b).unwrap().need;
            if reverse == KeyNeed::KeyNeeded {
                assert!(b > h_b(a), "key needed below the more-capable edge at ({a}, {b})");
            }
        }
    }
}

#[test]
fn broadcast_green_and_red_never_overlap() {
    for gamma in [0.1, 0.2, 0.3, 0.4] {
        for &a in &grid(0.01, 0.49, 50) {
            for &b in &grid(0.01, 0.99, 50) {
                let (w, v) = bc_channels(a, b, gamma).unwrap();
                let green = check_alignment_with(&w, &v, 2, SEQ).unwrap().holds;
                let red = check_nonalignment_with(&w, &v, 4, SEQ).unwrap().fired;
                assert!(!(green && red), "overlap at ({a}, {b}, {gamma})");
            }
        }
    }
}

#[test]
fn broadcast_without_preprocessing_is_plain_alignment() {
    for &a in &grid(0.01, 0.49, 10) {
        for &b in &grid(0.01, 0.99, 10) {
            let bc = bc_alignment_with(a, b, 0.0, 2, 4, SEQ).unwrap();
            if b <= 4.0 * a * (1.0 - a) {
                // the less-noisy shortcut reports essential alignment instead
                assert_eq!(bc.outcome, Outcome::EssentiallyAligned, "({a}, {b})");
                continue;
            }
            let plain = classify_with(&Dmc::bsc(a).unwrap(), &Dmc::bec(b).unwrap(), 4, 2, SEQ).unwrap();
            assert_eq!(bc.outcome, plain.outcome, "({a}, {b})");
        }
    }
}

#[test]
fn bb84_level0_condition_is_closed_form() {
    let f = |q: f64| 2.0 * (q * (1.0 - q)).sqrt();
    for &qx in &grid(0.0, 0.5, 26) {
        for &qz in &grid(0.0, 0.5, 26) {
            let s = f(qx) + f(qz);
            if (s - 1.0).abs() < 1e-9 {
                continue;
            }
            let holds = ent_zero_with(&PauliChannel::bb84(qx, qz).unwrap(), 0, SEQ).unwrap().holds;
            assert_eq!(holds, s <= 1.0, "({qx}, {qz})");
        }
    }
}

#[test]
fn depolarizing_levels_monotone_and_exclusive() {
    for &p in &grid(0.0, 0.19, 39) {
        let ch = PauliChannel::depolarizing(p).unwrap();
        let zero: Vec<bool> = (0..=2).map(|k| ent_zero_with(&ch, k, SEQ).unwrap().holds).collect();
        let need: Vec<bool> = (0..=3).map(|k| ent_needed_with(&ch, k, SEQ).unwrap().needed).collect();
        for k in 1..zero.len() {
            assert!(!zero[k - 1] || zero[k], "Eub lost at level {k}, p = {p}");
        }
        for k in 1..need.len() {
            assert!(!need[k - 1] || need[k], "Elb lost at level {k}, p = {p}");
        }
        for (k, &z) in zero.iter().enumerate() {
            assert!(!(z && need[k]), "both at level {k}, p = {p}");
        }
    }
}

#[test]
fn bisection_brackets_the_flip() {
    let tol = 1e-6;
    let curves = [
        Curve::AlignmentUb { alpha: 0.1, level: 0 },
        Curve::AlignmentLb { alpha: 0.2, level: 3 },
        Curve::WiretapBscBec { alpha: 0.1 },
        Curve::BroadcastUb { alpha: 0.1, gamma: 0.1, level: 1 },
        Curve::EqualCapacity { alpha: 0.1, gamma: 0.1 },
        Curve::Eub { ray: QuantumRay::Depolarizing, level: 0 },
        Curve::Eub { ray: QuantumRay::Bb84 { qx: 0.05 }, level: 1 },
    ];
    for c in curves {
        let x = curve_threshold(&c, None, tol).unwrap();
        let lo = c.inside(x - 10.0 * tol).unwrap();
        let hi = c.inside(x + 10.0 * tol).unwrap();
        assert_ne!(lo, hi, "{} at {x}", c.name());
    }
}
