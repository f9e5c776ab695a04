//! Dubins planner checked against an independent tangent-circle construction.

use std::f64::consts::PI;

use headland_smooth::dubins::{all_words, sample_arclengths, shortest_dubins, Config};
use headland_smooth::geometry::{wrap_angle, Point2};
use headland_smooth::vehicle::{step_time, TimeState, VehicleParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn left(h: f64) -> Point2 {
    Point2::new(-h.sin(), h.cos())
}

/// Arc length turning from heading `h0` to `h1` in direction `dir` (+1 left).
fn arc(h0: f64, h1: f64, dir: f64, r: f64) -> f64 {
    r * (dir * (h1 - h0)).rem_euclid(2.0 * PI)
}

fn circle(q: Config, dir: f64, r: f64) -> Point2 {
    q.position + left(q.heading) * (dir * r)
}

/// Lengths of every candidate built from circle geometry directly.
fn oracle_lengths(q0: Config, q1: Config, r: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for d0 in [1.0, -1.0] {
        for d1 in [1.0, -1.0] {
            let c0 = circle(q0, d0, r);
            let c1 = circle(q1, d1, r);
            let v = c1 - c0;
            let dist = v.norm();
            let (h, straight) = if d0 == d1 {
                if dist < 1e-12 {
                    continue;
                }
                (v.angle(), dist)
            } else {
                if dist < 2.0 * r {
                    continue;
                }
                let l = (dist * dist - 4.0 * r * r).sqrt();
                (v.angle() + d0 * (2.0 * r).atan2(l), l)
            };
            out.push(arc(q0.heading, h, d0, r) + straight + arc(h, q1.heading, d1, r));
        }
        // Three arcs: middle circle tangent to both end circles.
        let c0 = circle(q0, d0, r);
        let c1 = circle(q1, d0, r);
        let v = c1 - c0;
        let dist = v.norm();
        if dist > 4.0 * r || dist < 1e-12 {
            continue;
        }
        let mid = c0.lerp(c1, 0.5);
        let off = (4.0 * r * r - 0.25 * dist * dist).max(0.0).sqrt();
        for side in [1.0, -1.0] {
            let cm = mid + left(v.angle()) * (side * off);
            let h1 = (cm - c0).angle() + d0 * PI / 2.0;
            let h2 = (c1 - cm).angle() - d0 * PI / 2.0;
            out.push(arc(q0.heading, h1, d0, r) + arc(h1, h2, -d0, r) + arc(h2, q1.heading, d0, r));
        }
    }
    out
}

fn random_config(rng: &mut ChaCha8Rng) -> Config {
    Config::new(
        rng.gen_range(-30.0..30.0),
        rng.gen_range(-30.0..30.0),
        rng.gen_range(-PI..PI),
    )
}

#[test]
fn thousand_random_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let q0 = random_config(&mut rng);
        let q1 = random_config(&mut rng);
        let r = rng.gen_range(1.0..12.0);
        let best = shortest_dubins(q0, q1, r).unwrap();
        let end = best.endpoint();
        assert!(end.position.dist(q1.position) <= 1e-9);
        assert!(wrap_angle(end.heading - q1.heading).abs() <= 1e-9);
        for alt in all_words(q0, q1, r) {
            assert!(best.length() <= alt.length());
            let e = alt.endpoint();
            assert!(e.position.dist(q1.position) <= 1e-9, "{:?}", alt.word);
        }
        let oracle = oracle_lengths(q0, q1, r).into_iter().fold(f64::INFINITY, f64::min);
        assert!((best.length() - oracle).abs() <= 1e-9 * (1.0 + oracle), "{} vs {oracle}", best.length());
        assert!(best.length() >= q0.position.dist(q1.position) - 1e-12);
    }
}

#[test]
fn sampled_curvature_is_zero_or_inverse_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (q0, q1) = (random_config(&mut rng), random_config(&mut rng));
        let p = shortest_dubins(q0, q1, 5.0).unwrap();
        let mut s = 0.0;
        while s < p.length() {
            let k = p.curvature_at(s).abs();
            assert!(k == 0.0 || (k - 0.2).abs() < 1e-15);
            s += 0.25;
        }
    }
}

#[test]
fn implied_steering_reproduces_endpoint() {
    let params = VehicleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (q0, q1) = (random_config(&mut rng), random_config(&mut rng));
        let p = shortest_dubins(q0, q1, 6.0).unwrap();
        let s = sample_arclengths(&p, 0.5).unwrap();
        let mut state = TimeState {
            x: q0.position.x,
            y: q0.position.y,
            psi: q0.heading,
            delta: 0.0,
        };
        for w in s.windows(2) {
            let kappa = p.curvature_at(0.5 * (w[0] + w[1]));
            let delta = (params.wheelbase * kappa).atan();
            // Unit speed, so time equals arclength.
            state = step_time(&state, 1.0, delta, w[1] - w[0], &params);
        }
        assert!(state.position().dist(q1.position) < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn reversal_symmetry(
        x0 in -20.0..20.0f64, y0 in -20.0..20.0f64, h0 in -PI..PI,
        x1 in -20.0..20.0f64, y1 in -20.0..20.0f64, h1 in -PI..PI,
        r in 1.0..8.0f64,
    ) {
        let q0 = Config::new(x0, y0, h0);
        let q1 = Config::new(x1, y1, h1);
        let fwd = shortest_dubins(q0, q1, r).unwrap();
        let back = shortest_dubins(Config::new(x1, y1, h1 + PI), Config::new(x0, y0, h0 + PI), r).unwrap();
        prop_assert!((fwd.length() - back.length()).abs() <= 1e-8 * (1.0 + fwd.length()));
    }
}
