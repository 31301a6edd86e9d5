//! Closed-form coverage of a ground user served by UAVs forming a homogeneous
//! PPP at fixed altitude, with independent LOS/NLOS thinning, max-path-gain
//! association and Nakagami-m fading.
//!
//! Every quantity is a one- or two-level integral evaluated by adaptive
//! Gauss–Kronrod quadrature:
//!
//! * `E_i(b) = ∫_0^b p_i(ρ) ρ dρ`, the mean number of type-`i` UAVs (per unit
//!   `2πλ`) within horizontal radius `b`;
//! * `F_i(r) = 1 - exp(-2πλ E_i(b(r)))`, the nearest type-`i` distance CDF,
//!   and its density `f_i(r) = 2πλ r p_i(b(r)) exp(-2πλ E_i(b(r)))`;
//! * `f̄_i(r) = exp(-2πλ E_{i*}(b(A_i(r)))) f_i(r)`, the density of the
//!   serving distance jointly with the serving state being `i`;
//! * `P_cov = Σ_i ∫ P[g_i > ζ_i(r)] f̄_i(r) dr`.
//!
//! Outer integrals are taken over the horizontal distance `b` rather than `r`;
//! with `r = sqrt(h² + b²)` the Jacobian `r dr = b db` removes the square-root
//! kink that `p_i(b(r))` has at `r = h`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::channel::{horizontal_distance, ChannelParams, LinkState};
use crate::error::{check_at_least, check_positive, Error, Result};
use crate::quadrature::{integrate, QuadratureSettings};
use crate::special::{db_to_linear, dbm_to_watt, nakagami_ccdf};

/// Tail mass left beyond the outer truncation radius.
pub const TAIL_MASS_BOUND: f64 = 1e-8;

const MAX_TRUNCATION_RADIUS: f64 = 1e8;

/// Radio and deployment parameters, all in linear SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Transmit power (W).
    pub ptx: f64,
    pub n_uav: u32,
    pub n_ue: u32,
    /// Noise figure (ratio).
    pub nf: f64,
    /// Thermal noise power (W).
    pub noise: f64,
    /// UAV density (per m²).
    pub lambda: f64,
    /// Altitude (m).
    pub h: f64,
    /// SNR threshold (ratio).
    pub gamma: f64,
    /// Radius of the deployment disk used by the simulator (m).
    pub aoi_radius: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            ptx: 0.1,
            n_uav: 8,
            n_ue: 8,
            nf: 10f64.powf(0.5),
            noise: 10f64.powf(-8.4) * 1e-3,
            lambda: 5e-6,
            h: 200.0,
            gamma: 1.0,
            aoi_radius: 2000.0,
        }
    }
}

impl NetworkConfig {
    /// Beamforming gain `N_UAV × N_UE`.
    pub fn gain(&self) -> f64 {
        self.n_uav as f64 * self.n_ue as f64
    }

    pub fn lambda_per_km2(&self) -> f64 {
        self.lambda * 1e6
    }

    pub fn threshold_db(&self) -> f64 {
        10.0 * self.gamma.log10()
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("ptx", self.ptx)?;
        if self.n_uav < 1 {
            return Err(Error::invalid("n_uav", 0.0, "must be >= 1"));
        }
        if self.n_ue < 1 {
            return Err(Error::invalid("n_ue", 0.0, "must be >= 1"));
        }
        check_positive("noise figure", self.nf)?;
        check_positive("noise power", self.noise)?;
        check_at_least("lambda", self.lambda, 0.0)?;
        check_at_least("h", self.h, 0.0)?;
        check_at_least("gamma", self.gamma, 0.0)?;
        check_positive("aoi_radius", self.aoi_radius)?;
        Ok(())
    }

    pub fn with_height(self, h: f64) -> Self {
        NetworkConfig { h, ..self }
    }

    pub fn with_density_per_km2(self, lambda_per_km2: f64) -> Self {
        NetworkConfig {
            lambda: lambda_per_km2 / 1e6,
            ..self
        }
    }

    pub fn with_threshold_db(self, gamma_db: f64) -> Result<Self> {
        Ok(NetworkConfig {
            gamma: db_to_linear(gamma_db)?,
            ..self
        })
    }

    pub fn with_antennas(self, n_uav: u32, n_ue: u32) -> Self {
        NetworkConfig {
            n_uav,
            n_ue,
            ..self
        }
    }

    pub fn with_ptx_dbm(self, dbm: f64) -> Result<Self> {
        Ok(NetworkConfig {
            ptx: dbm_to_watt(dbm)?,
            ..self
        })
    }

    /// Received SNR at distance `r` for fading amplitude `g`.
    pub fn snr(&self, params: &ChannelParams, state: LinkState, r: f64, g: f64) -> f64 {
        self.ptx * params.path_gain_unchecked(state, r) * self.gain() * g / (self.nf * self.noise)
    }
}

/// `∫_0^{b_upper} p_state(ρ) ρ dρ` at altitude `h`.
pub fn exclusion_integral(
    params: &ChannelParams,
    state: LinkState,
    h: f64,
    b_upper: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    check_at_least("h", h, 0.0)?;
    check_at_least("b_upper", b_upper, 0.0)?;
    exclusion_unchecked(params, state, h, b_upper, settings)
}

fn exclusion_unchecked(
    params: &ChannelParams,
    state: LinkState,
    h: f64,
    b_upper: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if b_upper == 0.0 {
        return Ok(0.0);
    }
    // The sigmoid in elevation changes over ρ between about h and 50h.
    let breaks = [h, 4.0 * h, 16.0 * h, 64.0 * h];
    integrate(
        |rho| params.p_horizontal_unchecked(state, h, rho) * rho,
        0.0,
        b_upper,
        &breaks,
        settings,
    )
    .map(|e| e.value)
    .map_err(|e| e.within(&format!("exclusion integral ({state}, h={h}, b={b_upper})")))
}

/// `start, start·factor, start·factor², …` below `end`.
fn geometric_breaks(start: f64, end: f64, factor: f64) -> impl Iterator<Item = f64> {
    std::iter::successors(Some(start), move |x| Some(x * factor)).take_while(move |&x| x < end)
}

/// Analytic coverage model for one channel and network configuration.
#[derive(Debug, Clone, Copy)]
pub struct CoverageModel {
    channel: ChannelParams,
    network: NetworkConfig,
    settings: QuadratureSettings,
    inner: QuadratureSettings,
}

/// Coverage split by serving state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBreakdown {
    pub los: f64,
    pub nlos: f64,
    pub r_max: f64,
}

impl CoverageBreakdown {
    pub fn total(&self) -> f64 {
        (self.los + self.nlos).clamp(0.0, 1.0)
    }
}

impl CoverageModel {
    pub fn new(
        channel: ChannelParams,
        network: NetworkConfig,
        settings: QuadratureSettings,
    ) -> Result<Self> {
        channel.validate()?;
        network.validate()?;
        Self::new_unvalidated(channel, network, settings)
    }

    /// Skips the channel-parameter ordering checks so that degenerate
    /// channels (equal intercepts, constant LOS probability) can be studied.
    pub fn new_unvalidated(
        channel: ChannelParams,
        network: NetworkConfig,
        settings: QuadratureSettings,
    ) -> Result<Self> {
        settings.validate()?;
        if let Some(r) = settings.r_max {
            if r <= network.h {
                return Err(Error::invalid("r_max", r, "must exceed the altitude"));
            }
        }
        // Inner integrals enter through exp(-2πλ E); their absolute error is
        // scaled so the exponent error stays below a tenth of abs_tol.
        let weight = 2.0 * PI * network.lambda;
        let inner = QuadratureSettings {
            abs_tol: if weight > 0.0 {
                0.1 * settings.abs_tol / weight
            } else {
                settings.abs_tol
            },
            rel_tol: 0.1 * settings.rel_tol,
            ..settings
        };
        Ok(CoverageModel {
            channel,
            network,
            settings,
            inner,
        })
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn network(&self) -> &NetworkConfig {
        &self.network
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    fn weight(&self) -> f64 {
        2.0 * PI * self.network.lambda
    }

    fn check_r(&self, r: f64) -> Result<()> {
        check_at_least("r", r, 0.0)?;
        if r < self.network.h {
            return Err(Error::invalid("r", r, "distance cannot be below the altitude"));
        }
        Ok(())
    }

    pub fn exclusion_integral(&self, state: LinkState, b_upper: f64) -> Result<f64> {
        exclusion_integral(&self.channel, state, self.network.h, b_upper, &self.settings)
    }

    /// Void probability of type-`state` UAVs within 3D distance `r`.
    fn void_within(&self, state: LinkState, r: f64) -> Result<f64> {
        let b = horizontal_distance(self.network.h, r);
        let e = exclusion_unchecked(&self.channel, state, self.network.h, b, &self.inner)?;
        Ok((-self.weight() * e).exp())
    }

    /// CDF of the distance to the nearest UAV in `state`.
    pub fn nearest_cdf(&self, state: LinkState, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(1.0 - self.void_within(state, r)?)
    }

    /// Density of the distance to the nearest UAV in `state` (per m).
    pub fn nearest_pdf(&self, state: LinkState, r: f64) -> Result<f64> {
        self.check_r(r)?;
        let b = horizontal_distance(self.network.h, r);
        let p = self.channel.p_horizontal_unchecked(state, self.network.h, b);
        Ok(self.weight() * r * p * self.void_within(state, r)?)
    }

    /// Probability that no opposite-state UAV beats a `state` UAV at `r`.
    /// When `A_i(r) <= h` the exclusion disk is empty.
    fn no_better_rival(&self, state: LinkState, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(1.0);
        }
        let rival = self.channel.equivalent_distance_unchecked(state, r);
        self.void_within(state.opposite(), rival)
    }

    /// Density of the serving distance jointly with the serving state.
    pub fn association_pdf(&self, state: LinkState, r: f64) -> Result<f64> {
        Ok(self.no_better_rival(state, r)? * self.nearest_pdf(state, r)?)
    }

    /// `P[g > ζ_i(r)]`, the coverage probability given a `state` server at `r`.
    pub fn conditional_coverage(&self, state: LinkState, r: f64) -> Result<f64> {
        check_at_least("r", r, 0.0)?;
        Ok(self.conditional_unchecked(state, r))
    }

    fn conditional_unchecked(&self, state: LinkState, r: f64) -> f64 {
        let n = &self.network;
        let zeta = n.gamma * n.nf * n.noise / (n.ptx * n.gain() * self.channel.intercept(state))
            * r.powf(self.channel.exponent(state));
        nakagami_ccdf(self.channel.nakagami(state), zeta).unwrap_or(0.0)
    }

    /// Upper bound on the probability that the serving UAV is in `state` and
    /// farther than `r`: no `state` UAV within `r` and no rival within
    /// `A_state(r)`.
    fn tail_bound(&self, state: LinkState, r: f64) -> Result<f64> {
        Ok(self.void_within(state, r)? * self.no_better_rival(state, r)?)
    }

    /// Outer truncation radius. Starts from `sqrt((3R)² + h²)` and doubles
    /// until the neglected mass of both serving states is below
    /// [`TAIL_MASS_BOUND`].
    pub fn truncation_radius(&self) -> Result<f64> {
        if let Some(r) = self.settings.r_max {
            return Ok(r);
        }
        let h = self.network.h;
        let mut r = (3.0 * self.network.aoi_radius).hypot(h);
        loop {
            let worst = self
                .tail_bound(LinkState::Los, r)?
                .max(self.tail_bound(LinkState::Nlos, r)?);
            if worst < TAIL_MASS_BOUND {
                return Ok(r);
            }
            if r > MAX_TRUNCATION_RADIUS {
                return Err(Error::Quadrature {
                    integral: "truncation radius".into(),
                    reason: format!("tail mass {worst:.3e} still above bound at r = {r:.3e} m"),
                });
            }
            r *= 2.0;
        }
    }

    /// Integrate `weight(r) * f̄_state(r)` over `[h, r_max]` in the horizontal
    /// variable.
    fn integrate_serving<W>(&self, state: LinkState, r_max: f64, weight: W, label: &str) -> Result<f64>
    where
        W: Fn(f64) -> f64,
    {
        let h = self.network.h;
        let b_max = horizontal_distance(h, r_max);
        let lam = self.weight();
        let mut failure = None;
        let integrand = |b: f64| {
            let r = h.hypot(b);
            let w = weight(r);
            if w == 0.0 {
                return 0.0;
            }
            let p = self.channel.p_horizontal_unchecked(state, h, b);
            let own = exclusion_unchecked(&self.channel, state, h, b, &self.inner);
            let rival = self.no_better_rival(state, r);
            match (own, rival) {
                (Ok(e), Ok(v)) => w * v * lam * b * p * (-lam * e).exp(),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        };
        // The rival exclusion disk opens where A_i(r) = h.
        let r_open = self
            .channel
            .equivalent_distance_unchecked(state.opposite(), h.max(f64::MIN_POSITIVE));
        // Geometric breakpoints keep a single wide panel from missing the
        // short-range mass when h is small.
        let mut breaks = vec![horizontal_distance(h, r_open), h, 3.0 * h];
        breaks.extend(geometric_breaks(1.0, b_max, 3.0));
        let result = integrate(integrand, 0.0, b_max, &breaks, &self.settings);
        let context = format!("{label} ({state})");
        if let Some(e) = failure {
            return Err(e.within(&context));
        }
        result.map(|e| e.value).map_err(|e| e.within(&context))
    }

    /// Probability that the serving UAV is in `state`.
    pub fn association_probability(&self, state: LinkState) -> Result<f64> {
        if self.network.lambda == 0.0 {
            return Ok(0.0);
        }
        let r_max = self.truncation_radius()?;
        self.integrate_serving(state, r_max, |_| 1.0, "association probability")
    }

    /// Per-state coverage contributions.
    pub fn coverage_breakdown(&self) -> Result<CoverageBreakdown> {
        if self.network.lambda == 0.0 {
            return Ok(CoverageBreakdown {
                los: 0.0,
                nlos: 0.0,
                r_max: self.network.h,
            });
        }
        let r_max = self.truncation_radius()?;
        let mut parts = [0.0; 2];
        for (slot, state) in parts.iter_mut().zip(LinkState::BOTH) {
            *slot = self.integrate_serving(
                state,
                r_max,
                |r| self.conditional_unchecked(state, r),
                "coverage",
            )?;
        }
        Ok(CoverageBreakdown {
            los: parts[0],
            nlos: parts[1],
            r_max,
        })
    }

    /// SNR coverage probability `P[SNR > Γ]`.
    pub fn coverage_probability(&self) -> Result<f64> {
        Ok(self.coverage_breakdown()?.total())
    }
}

/// Analytic coverage probability for one configuration.
pub fn coverage_probability(
    channel: &ChannelParams,
    network: &NetworkConfig,
    settings: &QuadratureSettings,
) -> Result<f64> {
    CoverageModel::new(*channel, *network, *settings)?.coverage_probability()
}

/// Grid point maximizing coverage over altitude, ties going to the lower
/// altitude.
pub fn optimal_height(
    channel: &ChannelParams,
    network: &NetworkConfig,
    settings: &QuadratureSettings,
    heights: &[f64],
) -> Result<(f64, f64)> {
    if heights.is_empty() {
        return Err(Error::Usage("altitude grid is empty".into()));
    }
    if heights.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Usage("altitude grid must be strictly increasing".into()));
    }
    let values = heights
        .par_iter()
        .map(|&h| coverage_probability(channel, &network.with_height(h), settings))
        .collect::<Result<Vec<_>>>()?;
    let mut best = (heights[0], values[0]);
    for (&h, &v) in heights.iter().zip(&values).skip(1) {
        if v > best.1 {
            best = (h, v);
        }
    }
    Ok(best)
}
