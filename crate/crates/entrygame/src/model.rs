//! Market primitives: exogenous parameters, the logistic scale curve, the
//! scope (data-pooling) curves, linear inverse supply, and profit accounting
//! for all four agents.
//!
//! The cast: an incumbent aggregator (D1) with exclusive access to producer
//! P0's data, a challenger aggregator (D2) that may enter by paying a fixed
//! cost, and two data producers (P0 exclusive to D1, P1 selling to both).
//! Production value for an aggregator is the scale curve applied to its
//! effective dataset size, measured net of the zero-data baseline; D1's
//! effective size pools its two sources through the scope curve.

use serde::Serialize;

use crate::error::Error;

/// All exogenous model constants.
///
/// `Default` is the baseline calibration used throughout the examples and
/// sweeps: `eta_max = 1`, `eta_0 = 0.05`, `k = 3`, `delta = 1`, `c = 2/3`,
/// `c0 = 5/6`, `f = 0.0005`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketParams {
    /// Saturation value of the scale curve.
    pub eta_max: f64,
    /// Production value at zero data; calibrates the curve's midpoint.
    pub eta_0: f64,
    /// Steepness of the scale curve.
    pub k: f64,
    /// Scope elasticity; `0` means pooled data is purely additive.
    pub delta: f64,
    /// Cost coefficient of the shared producer P1.
    pub c: f64,
    /// Cost coefficient of the exclusive producer P0.
    pub c0: f64,
    /// Challenger's fixed entry cost.
    pub f: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams {
            eta_max: 1.0,
            eta_0: 0.05,
            k: 3.0,
            delta: 1.0,
            c: 2.0 / 3.0,
            c0: 5.0 / 6.0,
            f: 0.0005,
        }
    }
}

impl MarketParams {
    /// Checks every parameter against its domain and returns the first
    /// violation as a [`Error::Domain`] naming the offending field.
    pub fn validate(&self) -> Result<(), Error> {
        let finite = |key, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(key, v, "must be finite"))
            }
        };
        finite("eta_max", self.eta_max)?;
        finite("eta_0", self.eta_0)?;
        finite("k", self.k)?;
        finite("delta", self.delta)?;
        finite("c", self.c)?;
        finite("c0", self.c0)?;
        finite("f", self.f)?;
        if self.eta_max <= 0.0 {
            return Err(Error::domain("eta_max", self.eta_max, "must be positive"));
        }
        if self.eta_0 <= 0.0 {
            return Err(Error::domain("eta_0", self.eta_0, "must be positive"));
        }
        if self.eta_0 >= self.eta_max {
            return Err(Error::domain("eta_0", self.eta_0, "must be below eta_max"));
        }
        if self.k <= 0.0 {
            return Err(Error::domain("k", self.k, "must be positive"));
        }
        if self.delta < 0.0 {
            return Err(Error::domain("delta", self.delta, "must be non-negative"));
        }
        if self.c <= 0.0 {
            return Err(Error::domain("c", self.c, "must be positive"));
        }
        if self.c0 <= 0.0 {
            return Err(Error::domain("c0", self.c0, "must be positive"));
        }
        if self.f < 0.0 {
            return Err(Error::domain("f", self.f, "must be non-negative"));
        }
        Ok(())
    }

    /// Validating constructor for struct-update call sites.
    pub fn validated(self) -> Result<Self, Error> {
        self.validate()?;
        Ok(self)
    }
}

/// Logistic production-value curve `eta_max / (1 + exp(-k (d - d_m)))`, with
/// the midpoint `d_m` derived so the curve passes through `eta_0` at zero:
/// `d_m = ln(eta_max / eta_0 - 1) / k`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaleCurve {
    pub eta_max: f64,
    pub eta_0: f64,
    pub k: f64,
    /// Midpoint: data level at which value reaches `eta_max / 2`.
    pub d_m: f64,
}

/// Midpoint of the scale curve implied by the zero-data value. Exposed on its
/// own because the default solver search bound is a multiple of it.
pub fn derive_midpoint(params: &MarketParams) -> Result<f64, Error> {
    params.validate()?;
    Ok((params.eta_max / params.eta_0 - 1.0).ln() / params.k)
}

impl ScaleCurve {
    pub fn new(params: &MarketParams) -> Result<Self, Error> {
        let d_m = derive_midpoint(params)?;
        Ok(ScaleCurve {
            eta_max: params.eta_max,
            eta_0: params.eta_0,
            k: params.k,
            d_m,
        })
    }

    /// Curve value at dataset size `d`; errors on negative or non-finite `d`.
    pub fn value(&self, d: f64) -> Result<f64, Error> {
        if !d.is_finite() || d < 0.0 {
            return Err(Error::domain("d", d, "must be a non-negative dataset size"));
        }
        Ok(self.eval(d))
    }

    /// Unchecked evaluation for hot paths where `d >= 0` holds by
    /// construction (solver grids never leave `[lo, hi]`).
    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        debug_assert!(d >= 0.0);
        self.eta_max / (1.0 + (-self.k * (d - self.d_m)).exp())
    }

    /// Production value in excess of the zero-data baseline `eta_0`. This is
    /// the revenue measure the profit model uses: an aggregator holding no
    /// data nets zero.
    #[inline]
    pub fn net_value(&self, d: f64) -> f64 {
        self.eval(d) - self.eta_0
    }
}

#[inline]
fn root_p(x: f64, delta: f64) -> f64 {
    // x^(1/(1+delta)), with fast paths for the two most common elasticities
    if delta == 0.0 {
        x
    } else if delta == 1.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / (1.0 + delta))
    }
}

#[inline]
fn pow_p(s: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        s
    } else if delta == 1.0 {
        s * s
    } else {
        s.powf(1.0 + delta)
    }
}

fn check_pair(delta: f64, d1: f64, d2: f64) -> Result<(), Error> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::domain("delta", delta, "must be non-negative"));
    }
    if !d1.is_finite() || d1 < 0.0 {
        return Err(Error::domain("d1", d1, "must be a non-negative dataset size"));
    }
    if !d2.is_finite() || d2 < 0.0 {
        return Err(Error::domain("d2", d2, "must be a non-negative dataset size"));
    }
    Ok(())
}

/// Raw scope (pooling) index for two data sources:
/// `((d1+1)^(1/(1+delta)) + (d2+1)^(1/(1+delta)))^(1+delta) - 1`.
///
/// Symmetric, superadditive with floor `d1 + d2 + 1` (equality exactly at
/// `delta = 0`), and strictly increasing in each argument. Note the unit
/// offsets leave a residual at the origin: `scope_value(delta, 0, 0) =
/// 2^(1+delta) - 1`.
pub fn scope_value(delta: f64, d1: f64, d2: f64) -> Result<f64, Error> {
    check_pair(delta, d1, d2)?;
    Ok(scope_value_raw(delta, d1, d2))
}

#[inline]
pub(crate) fn scope_value_raw(delta: f64, d1: f64, d2: f64) -> f64 {
    pow_p(root_p(d1 + 1.0, delta) + root_p(d2 + 1.0, delta), delta) - 1.0
}

/// Effective single-source-equivalent size of two pooled datasets:
/// `((d1+1)^(1/(1+delta)) + (d2+1)^(1/(1+delta)) - 1)^(1+delta) - 1`.
///
/// This is [`scope_value`] normalized so that a lone source passes through
/// unchanged: `effective_data(delta, a, 0) = a` exactly, `effective_data(0,
/// a, b) = a + b`, and pooling is superadditive with floor `a + b`. Profit
/// accounting composes the scale curve with this measure.
pub fn effective_data(delta: f64, d1: f64, d2: f64) -> Result<f64, Error> {
    check_pair(delta, d1, d2)?;
    Ok(effective_data_raw(delta, d1, d2))
}

#[inline]
pub(crate) fn effective_data_raw(delta: f64, d1: f64, d2: f64) -> f64 {
    pow_p(root_p(d1 + 1.0, delta) + root_p(d2 + 1.0, delta) - 1.0, delta) - 1.0
}

/// Producer-side price schedule: selling quantity `d` at cost coefficient
/// `coeff` requires unit price `w = 2 coeff d`.
pub fn inverse_supply(coeff: f64, d: f64) -> Result<f64, Error> {
    if !coeff.is_finite() || coeff <= 0.0 {
        return Err(Error::domain("coeff", coeff, "must be positive"));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain("d", d, "must be a non-negative quantity"));
    }
    Ok(2.0 * coeff * d)
}

/// Producer profit `w d - coeff d^2`. On the supply curve (`w = 2 coeff d`)
/// this reduces to `coeff d^2`.
pub fn producer_profit(coeff: f64, w: f64, d: f64) -> Result<f64, Error> {
    if !coeff.is_finite() || coeff <= 0.0 {
        return Err(Error::domain("coeff", coeff, "must be positive"));
    }
    if !w.is_finite() || w < 0.0 {
        return Err(Error::domain("w", w, "must be a non-negative price"));
    }
    if !d.is_finite() || d < 0.0 {
        return Err(Error::domain("d", d, "must be a non-negative quantity"));
    }
    Ok(w * d - coeff * d * d)
}

/// Profits of all four agents plus social welfare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgentProfits {
    /// Incumbent aggregator D1.
    pub pi1: f64,
    /// Challenger aggregator D2 (zero when it stays out).
    pub pi2: f64,
    /// Shared producer P1.
    pub pi_p1: f64,
    /// Exclusive producer P0.
    pub pi_p0: f64,
    /// Social welfare: the sum of the four profits.
    pub sw: f64,
}

impl AgentProfits {
    /// Assembles the vector and computes welfare as the left-to-right sum
    /// `pi1 + pi2 + pi_p1 + pi_p0`, in that fixed order, so repeated runs
    /// agree bit for bit.
    pub fn from_parts(pi1: f64, pi2: f64, pi_p1: f64, pi_p0: f64) -> Self {
        AgentProfits {
            pi1,
            pi2,
            pi_p1,
            pi_p0,
            sw: ((pi1 + pi2) + pi_p1) + pi_p0,
        }
    }
}

/// Validated parameter set bundled with its derived scale curve. All profit
/// evaluation goes through this view.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Market {
    pub params: MarketParams,
    pub curve: ScaleCurve,
}

impl Market {
    pub fn new(params: MarketParams) -> Result<Self, Error> {
        let curve = ScaleCurve::new(&params)?;
        Ok(Market { params, curve })
    }

    /// Incumbent's net production value from pooling `d0` and `d1`.
    #[inline]
    pub fn incumbent_value(&self, d0: f64, d1: f64) -> f64 {
        self.curve
            .net_value(effective_data_raw(self.params.delta, d0, d1))
    }

    /// Challenger's net production value from its single source `d2`.
    #[inline]
    pub fn challenger_value(&self, d2: f64) -> f64 {
        self.curve.net_value(d2)
    }

    /// Profit vector of all four agents at the given quantities.
    ///
    /// `entered = false` means the challenger stayed out: its quantity is
    /// forced to zero and its profit is zero (the entry cost is only sunk on
    /// entry). Prices clear on the producers' supply curves: `w = 2 c (d1 +
    /// d2)` for P1 and `w0 = 2 c0 d0` for P0.
    pub fn profits(&self, d0: f64, d1: f64, d2: f64, entered: bool) -> AgentProfits {
        let p = &self.params;
        let d2 = if entered { d2 } else { 0.0 };
        let d_total = d1 + d2;
        let w = 2.0 * p.c * d_total;
        let w0 = 2.0 * p.c0 * d0;
        let pi1 = self.incumbent_value(d0, d1) - w * d1 - w0 * d0;
        let pi2 = if entered {
            self.challenger_value(d2) - w * d2 - p.f
        } else {
            0.0
        };
        let pi_p1 = w * d_total - p.c * d_total * d_total;
        let pi_p0 = w0 * d0 - p.c0 * d0 * d0;
        AgentProfits::from_parts(pi1, pi2, pi_p1, pi_p0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    fn defaults() -> MarketParams {
        MarketParams::default()
    }

    #[test]
    fn midpoint_matches_closed_form_and_bisection() {
        let dm = derive_midpoint(&defaults()).unwrap();
        // closed form at the baseline calibration
        assert!((dm - 0.981_479_659_722_146_8).abs() <= 1e-15);

        // independent bisection on g(x) = eta_max / (1 + e^(k x)) - eta_0,
        // the zero-data value as a function of the midpoint
        let g = |x: f64| 1.0 / (1.0 + (3.0 * x).exp()) - 0.05;
        let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert!((dm - root).abs() <= 1e-12, "dm {dm} vs bisection {root}");
    }

    #[test]
    fn scale_curve_pinned_values() {
        let curve = ScaleCurve::new(&defaults()).unwrap();
        assert!((curve.value(0.0).unwrap() - 0.05).abs() <= TOL);
        assert!((curve.value(curve.d_m).unwrap() - 0.5).abs() <= TOL);
        assert!((curve.value(2.0).unwrap() - 0.955_022_005_382_484_0).abs() <= TOL);
        assert!((curve.value(0.5).unwrap() - 0.190_858_888_256_011_74).abs() <= TOL);
        assert!((curve.net_value(0.0)).abs() <= TOL);
    }

    #[test]
    fn scale_curve_rejects_negative_input() {
        let curve = ScaleCurve::new(&defaults()).unwrap();
        assert!(matches!(
            curve.value(-0.1),
            Err(Error::Domain { key: "d", .. })
        ));
    }

    #[test]
    fn scope_value_pinned_values() {
        assert!((scope_value(1.0, 1.0, 1.0).unwrap() - 7.0).abs() <= TOL);
        assert!((scope_value(1.0, 0.0, 0.0).unwrap() - 3.0).abs() <= TOL);
        assert!((scope_value(1.0, 0.4, 1.7).unwrap() - 6.988_444_419_044_716).abs() <= TOL);
    }

    #[test]
    fn effective_data_pinned_values() {
        // (sqrt(2) + sqrt(2) - 1)^2 - 1 = 8 - 4 sqrt(2)
        let expected = 8.0 - 4.0 * 2.0_f64.sqrt();
        assert!((effective_data(1.0, 1.0, 1.0).unwrap() - expected).abs() <= TOL);
        assert!(effective_data(1.0, 0.0, 0.0).unwrap().abs() <= TOL);
        assert!((effective_data(2.5, 0.3, 0.7).unwrap() - 1.132_408_241_764_745_1).abs() <= TOL);
    }

    #[test]
    fn supply_and_producer_profit_examples() {
        assert_eq!(inverse_supply(2.0 / 3.0, 1.5).unwrap(), 2.0);
        assert_eq!(producer_profit(2.0 / 3.0, 2.0, 1.5).unwrap(), 1.5);
        assert!(inverse_supply(2.0 / 3.0, -1.0).is_err());
        assert!(producer_profit(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn profit_vector_pinned_composition() {
        let m = Market::new(defaults()).unwrap();
        let p = m.profits(0.1, 0.08, 0.02, true);
        assert!((p.pi1 - 0.006_378_526_969_713_009).abs() <= TOL);
        assert!((p.pi2 - -0.000_238_484_140_515_666_86).abs() <= TOL);
        assert!((p.pi_p1 - 0.006_666_666_666_666_667).abs() <= TOL);
        assert!((p.pi_p0 - 0.008_333_333_333_333_333).abs() <= TOL);
        assert!((p.sw - 0.021_140_042_829_197_342).abs() <= TOL);
    }

    #[test]
    fn profit_vector_boundary_cases() {
        let m = Market::new(defaults()).unwrap();

        // nothing bought, nobody entered: every agent nets zero; the
        // incumbent's net value at zero data is zero only up to the rounding
        // of the scale curve's calibration point
        let p = m.profits(0.0, 0.0, 0.0, false);
        assert!(p.pi1.abs() <= 1e-15);
        assert_eq!(p.pi2, 0.0);
        assert_eq!(p.pi_p1, 0.0);
        assert_eq!(p.pi_p0, 0.0);
        assert!(p.sw.abs() <= 1e-15);

        // entered with zero data: the entry cost is sunk and nothing else
        let p = m.profits(0.0, 0.0, 0.0, true);
        assert!((p.pi2 - -0.0005).abs() <= 1e-15);

        // staying out forces the challenger's quantity to zero
        let p = m.profits(0.1, 0.05, 0.7, false);
        let q = m.profits(0.1, 0.05, 0.0, false);
        assert_eq!(p, q);
    }

    #[test]
    fn validation_names_offending_key() {
        let bad = MarketParams {
            eta_0: 2.0,
            ..defaults()
        };
        match bad.validate() {
            Err(Error::Domain { key, .. }) => assert_eq!(key, "eta_0"),
            other => panic!("expected domain error, got {other:?}"),
        }
        let bad = MarketParams {
            c: 0.0,
            ..defaults()
        };
        match bad.validate() {
            Err(Error::Domain { key, .. }) => assert_eq!(key, "c"),
            other => panic!("expected domain error, got {other:?}"),
        }
        let bad = MarketParams {
            f: -1e-6,
            ..defaults()
        };
        assert!(bad.validate().is_err());
        assert!(defaults().validate().is_ok());
    }

    proptest! {
        #[test]
        fn scale_zero_calibration_holds(eta_max in 0.1_f64..10.0, ratio in 0.01_f64..0.99, k in 0.1_f64..10.0) {
            let params = MarketParams { eta_max, eta_0: ratio * eta_max, k, ..defaults() };
            let curve = ScaleCurve::new(&params).unwrap();
            prop_assert!((curve.value(0.0).unwrap() - params.eta_0).abs() <= 1e-12 * eta_max);
        }

        #[test]
        fn scale_is_increasing_and_bounded(a in 0.0_f64..6.0, b in 0.0_f64..6.0, tail in 6.0_f64..40.0) {
            let curve = ScaleCurve::new(&defaults()).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (vlo, vhi) = (curve.eval(lo), curve.eval(hi));
            prop_assert!(vlo > 0.0 && vhi < 1.0);
            if hi - lo > 1e-6 {
                prop_assert!(vhi > vlo);
            }
            // deep in the tail the curve stays within the saturation bound
            prop_assert!(curve.eval(tail) <= 1.0);
        }

        #[test]
        fn scope_value_symmetric_with_floor(delta in 0.0_f64..5.0, d1 in 0.0_f64..10.0, d2 in 0.0_f64..10.0) {
            let ab = scope_value(delta, d1, d2).unwrap();
            let ba = scope_value(delta, d2, d1).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab.abs()));
            let floor = d1 + d2 + 1.0;
            prop_assert!(ab >= floor - 1e-9);
            if delta == 0.0 {
                prop_assert!((ab - floor).abs() <= 1e-12 * floor.max(1.0));
            }
        }

        #[test]
        fn scope_value_strictly_above_floor_for_positive_delta(d1 in 0.0_f64..10.0, d2 in 0.0_f64..10.0) {
            // away from delta = 0 the pooling gain is strict, even at the origin
            for delta in [0.5, 1.0, 3.0] {
                let v = scope_value(delta, d1, d2).unwrap();
                prop_assert!(v > d1 + d2 + 1.0 + 1e-6);
            }
        }

        #[test]
        fn scope_collapses_to_additive_at_delta_zero(d1 in 0.0_f64..10.0, d2 in 0.0_f64..10.0) {
            let v = scope_value(0.0, d1, d2).unwrap();
            prop_assert!((v - (d1 + d2 + 1.0)).abs() <= 1e-12 * (d1 + d2 + 1.0));
            let e = effective_data(0.0, d1, d2).unwrap();
            prop_assert!((e - (d1 + d2)).abs() <= 1e-12 * (d1 + d2).max(1.0));
        }

        #[test]
        fn effective_data_lone_source_passes_through(delta in 0.0_f64..5.0, a in 0.0_f64..10.0) {
            let v = effective_data(delta, a, 0.0).unwrap();
            prop_assert!((v - a).abs() <= 1e-12 * a.max(1.0));
            let w = effective_data(delta, 0.0, a).unwrap();
            prop_assert!((w - a).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn effective_data_superadditive(delta in 0.0_f64..5.0, d1 in 0.0_f64..10.0, d2 in 0.0_f64..10.0) {
            let v = effective_data(delta, d1, d2).unwrap();
            prop_assert!(v >= d1 + d2 - 1e-9);
        }

        #[test]
        fn producer_profit_on_curve_is_cd_squared(coeff in 0.01_f64..5.0, d in 0.0_f64..10.0) {
            let w = inverse_supply(coeff, d).unwrap();
            let pi = producer_profit(coeff, w, d).unwrap();
            prop_assert!((pi - coeff * d * d).abs() <= 1e-9 * (1.0 + coeff * d * d));
        }

        #[test]
        fn welfare_is_fixed_order_sum(a in -1.0_f64..1.0, b in -1.0_f64..1.0, c in -1.0_f64..1.0, d in -1.0_f64..1.0) {
            let p = AgentProfits::from_parts(a, b, c, d);
            prop_assert_eq!(p.sw, ((a + b) + c) + d);
        }
    }
}
