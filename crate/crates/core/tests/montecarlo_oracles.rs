//! The simulator and the closed-form model describe the same scenario, so
//! each serves as an oracle for the other.

use std::f64::consts::PI;

use uavcov::montecarlo::{estimate_coverage, generate_ppp, simulate_one, substream, z_for_confidence};
use uavcov::{ChannelParams, CoverageModel, LinkState, NetworkConfig, QuadratureSettings};

/// One-sample KS critical value at the 1% level (asymptotic).
fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Two-sided KS statistic of `samples` against `cdf`.
fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Radius of the simulated deployment disk for the distribution oracles. The
/// closed-form model integrates over the whole plane, and with the default
/// 2 km disk a drop without any LOS UAV is not rare at low altitude. At
/// 6 km that event has probability below 1e-5 for every scenario used here.
const WIDE_AOI_M: f64 = 6000.0;

fn network(h: f64, lambda: f64, gamma_db: f64) -> NetworkConfig {
    NetworkConfig::default()
        .with_height(h)
        .with_density_per_km2(lambda)
        .with_threshold_db(gamma_db)
        .unwrap()
}

#[test]
fn ppp_counts_are_poisson() {
    let lambda = 5e-6;
    let radius = 2000.0;
    let mean = lambda * PI * radius * radius;
    assert!((mean - 62.83).abs() < 0.01);

    let n = 4000;
    let counts: Vec<f64> = (0..n)
        .map(|k| generate_ppp(lambda, radius, &mut substream(11, k)).unwrap().len() as f64)
        .collect();
    let avg = counts.iter().sum::<f64>() / n as f64;
    assert!((avg - mean).abs() / (mean / n as f64).sqrt() < 3.3, "mean {avg}");

    // Dispersion statistic with known mean is approximately chi-square with n
    // degrees of freedom.
    let d: f64 = counts.iter().map(|c| (c - mean).powi(2) / mean).sum();
    assert!((d - n as f64).abs() / (2.0 * n as f64).sqrt() < 3.3, "dispersion {d}");
}

#[test]
fn ppp_points_are_uniform_on_disk() {
    let radius = 2000.0;
    let mut radii = Vec::new();
    let mut angles = Vec::new();
    let mut k = 0;
    while radii.len() < 100_000 {
        for (x, y) in generate_ppp(25e-6, radius, &mut substream(7, k)).unwrap() {
            radii.push(x.hypot(y));
            angles.push(y.atan2(x));
        }
        k += 1;
    }
    let n = radii.len();
    let d = ks_statistic(radii, |r| (r / radius).powi(2));
    assert!(d < ks_critical_1pct(n), "radial KS {d}");
    let d = ks_statistic(angles, |a| (a + PI) / (2.0 * PI));
    assert!(d < ks_critical_1pct(n), "angular KS {d}");
}

#[test]
fn nearest_los_distance_matches_cdf() {
    let p = ChannelParams::default();
    let net = network(200.0, 5.0, 0.0);
    let model = CoverageModel::new(p, net, QuadratureSettings::default()).unwrap();
    for state in LinkState::BOTH {
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|k| {
                let real = simulate_one(&p, &net, &mut substream(13, k)).unwrap();
                real.uav_positions
                    .iter()
                    .zip(&real.link_states)
                    .filter(|(_, s)| **s == state)
                    .map(|(&(x, y), _)| x.hypot(y).hypot(net.h))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let d = ks_statistic(samples, |r| {
            if r.is_finite() {
                model.nearest_cdf(state, r).unwrap()
            } else {
                1.0
            }
        });
        assert!(d < ks_critical_1pct(n as usize), "{state}: KS {d}");
    }
}

#[test]
fn serving_state_frequencies_match_association() {
    let p = ChannelParams::default();
    for &(h, l) in &[(200.0, 5.0), (20.0, 5.0), (600.0, 1.0)] {
        let net = NetworkConfig {
            aoi_radius: WIDE_AOI_M,
            ..network(h, l, 0.0)
        };
        let model = CoverageModel::new(p, net, QuadratureSettings::default()).unwrap();
        let n = 100_000u64;
        let est = estimate_coverage(&p, &net, n, 14).unwrap();
        let c = est.serving_state_counts;
        assert_eq!(c.los + c.nlos + c.empty, n);
        for (state, count) in [(LinkState::Los, c.los), (LinkState::Nlos, c.nlos)] {
            let pa = model.association_probability(state).unwrap().clamp(0.0, 1.0);
            let sigma = (pa * (1.0 - pa) / n as f64).sqrt();
            let freq = count as f64 / n as f64;
            assert!((freq - pa).abs() < 3.0 * sigma + 1e-9, "h={h} λ={l} {state}: {freq} vs {pa}");
        }
    }
}

/// CDF of the serving distance given the serving state, tabulated in the
/// horizontal variable by composite Simpson on a fine uniform grid.
struct ServingCdf {
    h: f64,
    step: f64,
    cumulative: Vec<f64>,
}

impl ServingCdf {
    fn new(model: &CoverageModel, state: LinkState, b_max: f64, cells: usize) -> Self {
        let h = model.network().h;
        let density = |b: f64| {
            let r = h.hypot(b);
            model.association_pdf(state, r).unwrap() * b / r
        };
        let step = b_max / cells as f64;
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for i in 0..cells {
            let a = i as f64 * step;
            acc += step / 6.0 * (density(a) + 4.0 * density(a + 0.5 * step) + density(a + step));
            cumulative.push(acc);
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        ServingCdf { h, step, cumulative }
    }

    fn at(&self, r: f64) -> f64 {
        let b = (r * r - self.h * self.h).max(0.0).sqrt();
        let x = b / self.step;
        let i = x.floor() as usize;
        if i + 1 >= self.cumulative.len() {
            return 1.0;
        }
        let t = x - i as f64;
        self.cumulative[i] * (1.0 - t) + self.cumulative[i + 1] * t
    }
}

#[test]
fn serving_distance_matches_association_density() {
    let p = ChannelParams::default();
    let net = NetworkConfig {
        aoi_radius: WIDE_AOI_M,
        ..network(20.0, 5.0, 0.0)
    };
    let model = CoverageModel::new(p, net, QuadratureSettings::default()).unwrap();
    let n = 100_000;
    let mut by_state = [Vec::new(), Vec::new()];
    for k in 0..n {
        let real = simulate_one(&p, &net, &mut substream(15, k)).unwrap();
        if let Some(s) = real.serving {
            by_state[s.state as usize].push(s.distance);
        }
    }
    for state in LinkState::BOTH {
        let samples = std::mem::take(&mut by_state[state as usize]);
        let m = samples.len();
        assert!(m > 1000);
        let cdf = ServingCdf::new(&model, state, WIDE_AOI_M, 12_000);
        let d = ks_statistic(samples, |r| cdf.at(r));
        assert!(d < ks_critical_1pct(m), "{state}: KS {d} with {m} samples");
    }
}

#[test]
fn reference_markers_agree_with_simulation() {
    // Published markers are single runs of 1000 drops. Both they and a fresh
    // run should lie within the two-sample 99% band around the curve value.
    let data = include_str!("data/reference_curves.csv");
    let z = z_for_confidence(0.99).unwrap();
    let p = ChannelParams::default();
    let (mut total, mut within) = (0, 0);
    for (i, line) in data.lines().skip(1).enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f[6].is_empty() {
            continue;
        }
        let num = |k: usize| f[k].parse::<f64>().unwrap();
        let net = network(num(1), num(2), num(0)).with_antennas(num(3) as u32, num(4) as u32);
        let curve = num(5);
        let marker = num(6);
        let est = estimate_coverage(&p, &net, 1000, 1000 + i as u64).unwrap();
        // markers carry three decimals
        let band = z * (2.0 * curve * (1.0 - curve) / 1000.0).sqrt() + 5e-4;
        total += 1;
        if (est.p_hat - marker).abs() <= band {
            within += 1;
        }
    }
    assert!(total >= 300);
    assert!(within as f64 >= 0.95 * total as f64, "{within} of {total}");
}
