//! System-level simulation of the same scenario: PPP drops over a disk,
//! independent LOS draws per UAV, max-path-gain association, Nakagami fading
//! on the serving link and a strict SNR threshold test.
//!
//! Realization `k` draws from its own ChaCha8 stream `(master_seed, k)`, so an
//! estimate depends only on the seed and the realization count, never on how
//! the work was scheduled.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::NetworkConfig;
use crate::channel::{ChannelParams, LinkState};
use crate::error::{check_at_least, check_positive, Error, Result};

/// Independent random stream for realization `index` under `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Drop a homogeneous PPP of intensity `lambda` (per m²) on the disk of
/// radius `radius` centred at the origin.
pub fn generate_ppp<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    check_at_least("lambda", lambda, 0.0)?;
    check_positive("radius", radius)?;
    let mean = lambda * PI * radius * radius;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|_| Error::invalid("lambda", lambda, "Poisson mean out of range"))?
        .sample(rng) as usize;
    Ok((0..count)
        .map(|_| {
            let rho = radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            (rho * phi.cos(), rho * phi.sin())
        })
        .collect())
}

/// The UAV a user attaches to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingLink {
    pub index: usize,
    pub state: LinkState,
    pub distance: f64,
}

/// Maximum path gain over `(3D distance, state)` pairs. Within a state the
/// nearest UAV wins (lowest index on ties); across states LOS wins ties.
pub fn serving_link(params: &ChannelParams, links: impl IntoIterator<Item = (f64, LinkState)>) -> Option<ServingLink> {
    let mut nearest: [Option<(usize, f64)>; 2] = [None, None];
    for (index, (r, state)) in links.into_iter().enumerate() {
        let slot = &mut nearest[state as usize];
        if slot.is_none_or(|(_, best)| r < best) {
            *slot = Some((index, r));
        }
    }
    let candidate = |state: LinkState| {
        nearest[state as usize].map(|(index, distance)| ServingLink {
            index,
            state,
            distance,
        })
    };
    match (candidate(LinkState::Los), candidate(LinkState::Nlos)) {
        (Some(l), Some(n)) => {
            let gl = params.path_gain_unchecked(LinkState::Los, l.distance);
            let gn = params.path_gain_unchecked(LinkState::Nlos, n.distance);
            Some(if gl >= gn { l } else { n })
        }
        (l, n) => l.or(n),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub uav_positions: Vec<(f64, f64)>,
    pub link_states: Vec<LinkState>,
    pub serving: Option<ServingLink>,
    pub fading: f64,
    pub snr: f64,
    pub covered: bool,
}

impl Realization {
    pub fn serving_index(&self) -> Option<usize> {
        self.serving.map(|s| s.index)
    }

    pub fn serving_state(&self) -> Option<LinkState> {
        self.serving.map(|s| s.state)
    }

    pub fn serving_distance(&self) -> Option<f64> {
        self.serving.map(|s| s.distance)
    }
}

/// Evaluate a realization with given UAV positions. States are drawn from
/// `rng` unless `states` is supplied, then the serving link is faded.
pub fn evaluate_drop<R: Rng + ?Sized>(
    params: &ChannelParams,
    network: &NetworkConfig,
    positions: Vec<(f64, f64)>,
    states: Option<Vec<LinkState>>,
    rng: &mut R,
) -> Realization {
    let h = network.h;
    let distances: Vec<f64> = positions.iter().map(|&(x, y)| x.hypot(y).hypot(h)).collect();
    let link_states = states.unwrap_or_else(|| {
        distances
            .iter()
            .map(|&r| {
                let p = if r == 0.0 {
                    params.los.at_elevation(0.0)
                } else {
                    params.los.at_elevation((h / r).asin())
                };
                if rng.random::<f64>() < p {
                    LinkState::Los
                } else {
                    LinkState::Nlos
                }
            })
            .collect()
    });
    let serving = serving_link(params, distances.iter().copied().zip(link_states.iter().copied()));
    let (fading, snr) = match serving {
        Some(s) => {
            let g = params.nakagami(s.state).sample(rng);
            (g, network.snr(params, s.state, s.distance, g))
        }
        None => (0.0, 0.0),
    };
    Realization {
        uav_positions: positions,
        link_states,
        serving,
        fading,
        snr,
        // strict: SNR must exceed the threshold
        covered: serving.is_some() && snr > network.gamma,
    }
}

/// One full realization: PPP drop over the AoI, state draws, association and
/// fading.
pub fn simulate_one<R: Rng + ?Sized>(
    params: &ChannelParams,
    network: &NetworkConfig,
    rng: &mut R,
) -> Result<Realization> {
    let positions = generate_ppp(network.lambda, network.aoi_radius, rng)?;
    Ok(evaluate_drop(params, network, positions, None, rng))
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let mut lo = (center - half).max(0.0);
    let mut hi = (center + half).min(1.0);
    // guard the exact endpoints against rounding
    if successes == 0 {
        lo = 0.0;
    }
    if successes == n {
        hi = 1.0;
    }
    (lo.min(p), hi.max(p))
}

/// Two-sided normal quantile for a confidence level such as 0.95.
pub fn z_for_confidence(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid("confidence level", level, "must lie in (0, 1)"));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingCounts {
    pub los: u64,
    pub nlos: u64,
    pub empty: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    /// 95% Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub covered: u64,
    pub n: u64,
    pub seed: u64,
    pub serving_state_counts: ServingCounts,
}

impl McEstimate {
    /// Wilson interval at another confidence level.
    pub fn interval(&self, level: f64) -> Result<(f64, f64)> {
        Ok(wilson_interval(self.covered, self.n, z_for_confidence(level)?))
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    covered: u64,
    los: u64,
    nlos: u64,
    empty: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            covered: self.covered + o.covered,
            los: self.los + o.los,
            nlos: self.nlos + o.nlos,
            empty: self.empty + o.empty,
        }
    }
}

/// Covered fraction over `n_realizations` independent drops with a 95% Wilson
/// interval. Counts are integers, so the reduction is exact whatever the
/// number of worker threads.
pub fn estimate_coverage(
    params: &ChannelParams,
    network: &NetworkConfig,
    n_realizations: u64,
    master_seed: u64,
) -> Result<McEstimate> {
    if n_realizations == 0 {
        return Err(Error::invalid("n_realizations", 0.0, "must be >= 1"));
    }
    params.validate()?;
    network.validate()?;
    let tally = (0..n_realizations)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(master_seed, k);
            let real = simulate_one(params, network, &mut rng).expect("validated inputs");
            let mut t = Tally {
                covered: real.covered as u64,
                ..Tally::default()
            };
            match real.serving_state() {
                Some(LinkState::Los) => t.los = 1,
                Some(LinkState::Nlos) => t.nlos = 1,
                None => t.empty = 1,
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    let (ci_low, ci_high) = wilson_interval(tally.covered, n_realizations, z_for_confidence(0.95)?);
    Ok(McEstimate {
        p_hat: tally.covered as f64 / n_realizations as f64,
        ci_low,
        ci_high,
        covered: tally.covered,
        n: n_realizations,
        seed: master_seed,
        serving_state_counts: ServingCounts {
            los: tally.los,
            nlos: tally.nlos,
            empty: tally.empty,
        },
    })
}
