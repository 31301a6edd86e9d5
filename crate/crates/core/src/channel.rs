//! Air-to-ground channel primitives: LOS probability, path gain, and the
//! equivalent distance that equalizes path gain across link states.

use std::fmt;

use crate::error::{check_at_least, check_positive, Error, Result};
use crate::special::NakagamiParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];

    pub fn opposite(self) -> LinkState {
        match self {
            LinkState::Los => LinkState::Nlos,
            LinkState::Nlos => LinkState::Los,
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkState::Los => "LOS",
            LinkState::Nlos => "NLOS",
        })
    }
}

/// How the probability of a line-of-sight link depends on elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LosModel {
    /// `1 / (1 + C exp(-Y (θ° - C)))` with θ the elevation angle in degrees.
    Sigmoid { c: f64, y: f64 },
    /// Elevation-independent probability.
    Constant(f64),
}

impl LosModel {
    /// LOS probability at elevation `theta` (radians).
    #[inline]
    pub fn at_elevation(&self, theta: f64) -> f64 {
        match *self {
            LosModel::Sigmoid { c, y } => 1.0 / (1.0 + c * (-y * (theta.to_degrees() - c)).exp()),
            LosModel::Constant(p) => p,
        }
    }
}

/// Environment constants of the channel. Fields are public so that
/// degenerate channels can be assembled for experiments; the constructors and
/// the config loader call [`ChannelParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub los: LosModel,
    /// LOS path-gain intercept at 1 m (linear).
    pub cl: f64,
    /// NLOS path-gain intercept at 1 m (linear).
    pub cn: f64,
    pub al: f64,
    pub an: f64,
    pub nakagami_los: NakagamiParams,
    pub nakagami_nlos: NakagamiParams,
}

impl Default for ChannelParams {
    /// Urban 28 GHz parameters.
    fn default() -> Self {
        ChannelParams {
            los: LosModel::Sigmoid {
                c: 9.6117,
                y: 0.1581,
            },
            cl: 10f64.powf(-6.14),
            cn: 10f64.powf(-7.2),
            al: 2.0,
            an: 2.92,
            nakagami_los: NakagamiParams { m: 3, omega: 1.0 },
            nakagami_nlos: NakagamiParams { m: 2, omega: 1.0 },
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        match self.los {
            LosModel::Sigmoid { c, y } => {
                check_positive("los sigmoid C", c)?;
                check_positive("los sigmoid Y", y)?;
            }
            LosModel::Constant(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::invalid("constant LOS probability", p, "must lie in [0, 1]"));
                }
            }
        }
        check_positive("C_N", self.cn)?;
        if !(self.cl <= 1.0) {
            return Err(Error::invalid("C_L", self.cl, "must be <= 1"));
        }
        if !(self.cn < self.cl) {
            return Err(Error::invalid("C_N", self.cn, "NLOS intercept must be below C_L"));
        }
        check_at_least("a_L", self.al, 2.0)?;
        if !(self.an.is_finite() && self.al < self.an) {
            return Err(Error::invalid("a_N", self.an, "NLOS exponent must exceed a_L"));
        }
        self.nakagami_los.validate()?;
        self.nakagami_nlos.validate()?;
        Ok(())
    }

    pub fn intercept(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.cl,
            LinkState::Nlos => self.cn,
        }
    }

    pub fn exponent(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.al,
            LinkState::Nlos => self.an,
        }
    }

    pub fn nakagami(&self, state: LinkState) -> &NakagamiParams {
        match state {
            LinkState::Los => &self.nakagami_los,
            LinkState::Nlos => &self.nakagami_nlos,
        }
    }

    /// LOS probability from altitude and 3D distance, via `arcsin(h/r)`.
    pub fn p_los_3d(&self, h: f64, r: f64) -> Result<f64> {
        check_at_least("h", h, 0.0)?;
        check_positive("r", r)?;
        if r < h {
            return Err(Error::invalid("r", r, "3D distance cannot be below the altitude"));
        }
        Ok(self.los.at_elevation((h / r).asin()))
    }

    /// Probability of `state` from altitude and 3D distance; NLOS is the
    /// complement of LOS.
    pub fn link_probability(&self, state: LinkState, h: f64, r: f64) -> Result<f64> {
        let p = self.p_los_3d(h, r)?;
        Ok(match state {
            LinkState::Los => p,
            LinkState::Nlos => 1.0 - p,
        })
    }

    /// LOS probability from altitude and horizontal distance, via
    /// `arctan(h/ρ)`.
    pub fn p_los_horizontal(&self, h: f64, rho: f64) -> Result<f64> {
        check_at_least("h", h, 0.0)?;
        check_at_least("rho", rho, 0.0)?;
        if h == 0.0 && rho == 0.0 {
            return Err(Error::invalid("rho", rho, "elevation undefined with h = 0 and rho = 0"));
        }
        Ok(self.p_horizontal_unchecked(LinkState::Los, h, rho))
    }

    /// Probability of `state` at horizontal distance `rho`; `atan2` makes the
    /// overhead point `rho = 0` well defined for `h > 0`.
    #[inline]
    pub(crate) fn p_horizontal_unchecked(&self, state: LinkState, h: f64, rho: f64) -> f64 {
        let p = self.los.at_elevation(h.atan2(rho));
        match state {
            LinkState::Los => p,
            LinkState::Nlos => 1.0 - p,
        }
    }

    /// `C_i r^{-a_i}`.
    pub fn path_gain(&self, state: LinkState, r: f64) -> Result<f64> {
        check_positive("r", r)?;
        Ok(self.path_gain_unchecked(state, r))
    }

    #[inline]
    pub(crate) fn path_gain_unchecked(&self, state: LinkState, r: f64) -> f64 {
        self.intercept(state) * r.powf(-self.exponent(state))
    }

    /// Distance at which a UAV in the opposite state has the same path gain as
    /// a `state` UAV at distance `r`.
    pub fn equivalent_distance(&self, state: LinkState, r: f64) -> Result<f64> {
        check_positive("r", r)?;
        Ok(self.equivalent_distance_unchecked(state, r))
    }

    #[inline]
    pub(crate) fn equivalent_distance_unchecked(&self, state: LinkState, r: f64) -> f64 {
        let other = state.opposite();
        (self.intercept(other) / self.intercept(state) * r.powf(self.exponent(state)))
            .powf(1.0 / self.exponent(other))
    }
}

/// Position of a UAV relative to the ground user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    h: f64,
    r: f64,
}

impl Geometry {
    pub fn from_distance(h: f64, r: f64) -> Result<Self> {
        check_at_least("h", h, 0.0)?;
        check_at_least("r", r, 0.0)?;
        if r < h {
            return Err(Error::invalid("r", r, "3D distance cannot be below the altitude"));
        }
        Ok(Geometry { h, r })
    }

    pub fn from_horizontal(h: f64, b: f64) -> Result<Self> {
        check_at_least("h", h, 0.0)?;
        check_at_least("b", b, 0.0)?;
        Ok(Geometry { h, r: h.hypot(b) })
    }

    pub fn altitude(&self) -> f64 {
        self.h
    }

    pub fn distance(&self) -> f64 {
        self.r
    }

    /// Horizontal distance `sqrt(r² - h²)`.
    pub fn horizontal(&self) -> f64 {
        horizontal_distance(self.h, self.r)
    }

    /// Elevation angle in radians.
    pub fn elevation(&self) -> f64 {
        if self.r == 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            (self.h / self.r).asin()
        }
    }
}

/// `sqrt(r² - h²)`, clamped to zero for `r <= h`.
#[inline]
pub fn horizontal_distance(h: f64, r: f64) -> f64 {
    if r <= h {
        0.0
    } else {
        ((r - h) * (r + h)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ChannelParams {
        ChannelParams::default()
    }

    /// Direct evaluation of the sigmoid from a degree angle.
    fn sigmoid_deg(theta_deg: f64) -> f64 {
        1.0 / (1.0 + 9.6117 * (-0.1581 * (theta_deg - 9.6117)).exp())
    }

    #[test]
    fn defaults_validate() {
        table().validate().unwrap();
        assert!((table().cl - 7.244359600749891e-7).abs() < 1e-20);
    }

    #[test]
    fn p_los_3d_examples() {
        let p = table();
        let overhead = p.p_los_3d(150.0, 150.0).unwrap();
        assert!((overhead - 0.999971).abs() < 5e-7);
        assert!((overhead - sigmoid_deg(90.0)).abs() < 1e-15);

        let thirty = p.p_los_3d(200.0, 400.0).unwrap();
        assert!((thirty - 0.7232037).abs() < 5e-7);
        assert!((thirty - sigmoid_deg(30.0)).abs() < 1e-13);

        // elevation equal to C zeroes the exponent
        let r = 100.0;
        let h = r * 9.6117f64.to_radians().sin();
        assert!((p.p_los_3d(h, r).unwrap() - 1.0 / 10.6117).abs() < 1e-12);
        assert!((1.0 / 10.6117f64 - 0.0942356).abs() < 5e-8);
    }

    #[test]
    fn p_los_3d_rejects_bad_geometry() {
        let p = table();
        assert!(p.p_los_3d(200.0, 100.0).is_err());
        assert!(p.p_los_3d(0.0, 0.0).is_err());
        assert!(p.p_los_3d(-1.0, 10.0).is_err());
    }

    #[test]
    fn p_los_horizontal_examples() {
        let p = table();
        let b = horizontal_distance(200.0, 400.0);
        assert!((b - 346.41).abs() < 0.01);
        let v = p.p_los_horizontal(200.0, b).unwrap();
        assert!((v - p.p_los_3d(200.0, 400.0).unwrap()).abs() < 1e-14);

        let ground = p.p_los_horizontal(0.0, 500.0).unwrap();
        let floor = 1.0 / (1.0 + 9.6117 * (0.1581f64 * 9.6117).exp());
        assert!((ground - floor).abs() < 1e-15);
        assert!((ground - 0.0222570).abs() < 5e-7);

        let overhead = p.p_los_horizontal(120.0, 0.0).unwrap();
        assert!((overhead - 0.999971).abs() < 5e-7);

        assert!(p.p_los_horizontal(0.0, 0.0).is_err());
        assert!(p.p_los_horizontal(10.0, -1.0).is_err());
    }

    #[test]
    fn parametrizations_agree_on_grid() {
        let p = table();
        for hi in 0..=20 {
            let h = hi as f64 * 50.0;
            for k in 0..=300 {
                let r = h + (3000.0 - h) * k as f64 / 300.0;
                if r == 0.0 {
                    continue;
                }
                let a = p.p_los_3d(h, r).unwrap();
                let rho = horizontal_distance(h, r);
                if h == 0.0 && rho == 0.0 {
                    continue;
                }
                let b = p.p_los_horizontal(h, rho).unwrap();
                assert!((a - b).abs() < 1e-12, "h={h} r={r}: {a} vs {b}");
                let nlos = 1.0 - a;
                assert_eq!(a + nlos, 1.0);
            }
        }
    }

    #[test]
    fn p_los_grows_with_altitude() {
        let p = table();
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = p.p_los_3d(i as f64 * 10.0, 1000.0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn path_gain_examples() {
        let p = table();
        assert!((p.path_gain(LinkState::Los, 1.0).unwrap() / 10f64.powf(-6.14) - 1.0).abs() < 1e-14);
        assert!((p.path_gain(LinkState::Los, 100.0).unwrap() / 10f64.powf(-10.14) - 1.0).abs() < 1e-12);
        assert!((p.path_gain(LinkState::Nlos, 100.0).unwrap() / 10f64.powf(-13.04) - 1.0).abs() < 1e-12);
        assert!(p.path_gain(LinkState::Los, 0.0).is_err());
        assert!(p.path_gain(LinkState::Nlos, -3.0).is_err());
    }

    #[test]
    fn equivalent_distance_examples() {
        let p = table();
        let a = p.equivalent_distance(LinkState::Los, 100.0).unwrap();
        assert!((a - 10.16).abs() < 0.005, "{a}");
        // oracle: bisection on the path-gain equality
        let target = p.path_gain(LinkState::Los, 100.0).unwrap();
        let (mut lo, mut hi) = (1e-3, 1e4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.path_gain(LinkState::Nlos, mid).unwrap() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((a - lo).abs() / a < 1e-10);

        let back = p.equivalent_distance(LinkState::Nlos, a).unwrap();
        assert!((back - 100.0).abs() / 100.0 < 1e-6);

        let sym = ChannelParams {
            cn: p.cl,
            an: p.al,
            ..p
        };
        assert!((sym.equivalent_distance(LinkState::Los, 321.0).unwrap() - 321.0).abs() < 1e-12);
        assert!(p.equivalent_distance(LinkState::Los, 0.0).is_err());
    }

    #[test]
    fn geometry_is_consistent() {
        let g = Geometry::from_distance(200.0, 400.0).unwrap();
        assert!((g.horizontal().powi(2) + 200f64.powi(2) - 400f64.powi(2)).abs() < 1e-9);
        assert!((g.elevation().to_degrees() - 30.0).abs() < 1e-12);
        let g2 = Geometry::from_horizontal(200.0, g.horizontal()).unwrap();
        assert!((g2.distance() - 400.0).abs() < 1e-12);
        assert!(Geometry::from_distance(10.0, 5.0).is_err());
    }

    #[test]
    fn validation_catches_inverted_parameters() {
        let mut p = table();
        p.cn = p.cl * 2.0;
        assert!(p.validate().is_err());
        let mut p = table();
        p.an = 1.5;
        assert!(p.validate().is_err());
        let mut p = table();
        p.los = LosModel::Sigmoid { c: -1.0, y: 0.1 };
        assert!(p.validate().is_err());
    }
}
