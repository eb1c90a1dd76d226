//! The constants ledger: every tolerance, threshold, and implied absolute
//! constant used by the pipeline, validated once up front.
//!
//! The analysis juggles a chain of small parameters whose orderings matter
//! (`A·rho2 < 1`, `A·rho1 < rho2`, `A·epsilon < rho1`, ...). Rather than
//! burying those relations in the stages, [`validate_config`] checks them
//! all, records each comparison as an [`EnforcedBound`] row, and returns a
//! sealed [`ValidatedConfig`] the stages consume. Faithful parameter choices
//! make some bounds astronomically demanding (the scale count `S` exceeds
//! `1e50` for honest inputs); every implied coefficient is therefore an
//! explicit, overridable [`LedgerCoefficients`] field so that desk-scale
//! runs can shrink the demands while the rows record exactly what was
//! enforced and that an override was in play.

use serde::{Deserialize, Serialize};

use crate::space::QiConstants;
use crate::{Error, Result};

/// Every absolute constant implied by the analysis, as explicit fields.
///
/// Defaults are the literal values where the argument states one and `1`
/// where it only asserts "some constant". `*_scale` fields multiply the
/// demanding side of a bound and exist so reduced-scale runs can state
/// honestly, in the report, that they ran with a relaxed ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LedgerCoefficients {
    /// Divisor in `delta^(1/4) <= min(epsilon, theta / delta_cap_div)`.
    pub delta_cap_div: f64,
    /// Relaxation multiplier on the right side of the `delta_quarter` rule.
    pub delta_quarter_scale: f64,
    /// Coefficient in the scale-count demand `S > c·kappa^3/(epsilon·delta^4)`.
    pub s_bound_coeff: f64,
    /// Relaxation multiplier on the scale-count demand.
    pub s_bound_scale: f64,
    /// Denominator of the subdivision gain `epsilon·r / (subdivision_denom·kappa^2)`.
    pub subdivision_denom: f64,
    /// Coefficient in the per-path defect budget `sum_s delta_s <= c·kappa^3/epsilon`.
    pub scales_defect_coeff: f64,
    /// The ordering constant `A` in the parameter chain.
    pub ordering_a: f64,
    /// Coefficient `c` in the tiling error rule `c·R/L <= delta^2` that picks
    /// the gap between tile and box scales.
    pub tiling_coeff: f64,
    /// Cap on the multiplicative constant accepted when estimating a map's
    /// quasi-isometry constants from samples.
    pub qi_constant_cap: f64,
    /// Fraction of free descents that must avoid the image obstacle in the
    /// orientation certificate.
    pub w_prime_descent_frac: f64,
    /// Fraction of a shadow's area the surviving pieces must occupy.
    pub w_prime_area_frac: f64,
    /// Fraction of trapped geodesics a refutation is allowed to miss.
    pub trapping_miss_frac: f64,
    /// Coefficient in the product-map fit guarantee `sup_error <= c_fit·epsilon·R`.
    pub c_fit: f64,
    /// Coefficient in the pairwise height-agreement check `<= c_pair·C`.
    pub c_pair: f64,
}

impl Default for LedgerCoefficients {
    fn default() -> Self {
        LedgerCoefficients {
            delta_cap_div: 256.0,
            delta_quarter_scale: 1.0,
            s_bound_coeff: 16.0,
            s_bound_scale: 1.0,
            subdivision_denom: 8.0,
            scales_defect_coeff: 16.0,
            ordering_a: 1.1,
            tiling_coeff: 1.0,
            qi_constant_cap: 64.0,
            w_prime_descent_frac: 0.99,
            w_prime_area_frac: 0.9,
            trapping_miss_frac: 0.999,
            c_fit: 4.0,
            c_pair: 8.0,
        }
    }
}

/// User-facing pipeline parameters. `S` is kept as a float because the
/// faithful lower bound on it overflows every integer type; it must still
/// be integer-valued when small enough to matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub epsilon: f64,
    pub theta: f64,
    pub delta: f64,
    pub eta: f64,
    pub eta1: f64,
    pub beta: f64,
    pub nu: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// Ratio between consecutive ladder scales.
    #[serde(rename = "N")]
    pub n_ratio: u32,
    /// Number of ladder steps above the base scale.
    #[serde(rename = "S")]
    pub s_count: f64,
    /// Base scale of the ladder `r_s = r0·N^s`.
    pub r0: u64,
    /// Window constant of the non-uniformity covering argument; the set of
    /// non-uniform heights is guaranteed to have density at most `2/A_uniform`.
    #[serde(rename = "A_uniform")]
    pub a_uniform: f64,
    pub seed: u64,
    #[serde(default)]
    pub ledger: LedgerCoefficients,
}

impl PipelineConfig {
    /// Faithful parameter choices: every ledger coefficient at its stated
    /// value, `delta`, `nu`, and `S` derived from `epsilon = theta = 0.1`.
    /// Validates cleanly, but its ladder is far too long to walk.
    pub fn reference(qi: &QiConstants) -> PipelineConfig {
        let epsilon = 0.1f64;
        let theta = 0.1f64;
        let ledger = LedgerCoefficients::default();
        let delta = (epsilon.min(theta / ledger.delta_cap_div)).powi(4);
        let s_count =
            (ledger.s_bound_coeff * qi.kappa.powi(3) / (epsilon * delta.powi(4))).ceil() * 1.01;
        PipelineConfig {
            epsilon,
            theta,
            delta,
            eta: 0.1,
            eta1: 0.1,
            beta: 0.5,
            nu: delta.sqrt(),
            rho1: 0.7,
            rho2: 0.9,
            n_ratio: 2,
            s_count,
            r0: 1,
            a_uniform: 4.0,
            seed: 0,
            ledger,
        }
    }

    /// Desk-scale profile for the monotonicity scan and product-map fit on
    /// boxes of size 8: scales {2, 4, 8}, relaxed ledger, recorded as such.
    pub fn desk_step1() -> PipelineConfig {
        PipelineConfig {
            epsilon: 0.25,
            theta: 0.0049,
            delta: 0.5,
            eta: 0.1,
            eta1: 0.1,
            beta: 0.5,
            nu: 0.5f64.sqrt(),
            rho1: 0.35,
            rho2: 0.7,
            n_ratio: 2,
            s_count: 2.0,
            r0: 2,
            a_uniform: 4.0,
            seed: 7,
            ledger: LedgerCoefficients {
                delta_quarter_scale: 5e4,
                s_bound_scale: 1.0 / 8192.0,
                tiling_coeff: 8.0,
                ..LedgerCoefficients::default()
            },
        }
    }

    /// Desk-scale profile for the orientation certificate: a single tile
    /// scale of 8 and the thresholds a box of that size can meet.
    pub fn desk_step2() -> PipelineConfig {
        PipelineConfig {
            epsilon: 0.01,
            theta: 1e-8,
            delta: 0.25,
            eta: 0.1,
            eta1: 0.1,
            beta: 0.5,
            nu: 0.5,
            rho1: 0.05,
            rho2: 0.25,
            n_ratio: 2,
            s_count: 2.0,
            r0: 8,
            a_uniform: 4.0,
            seed: 7,
            ledger: LedgerCoefficients {
                delta_quarter_scale: 2e10,
                s_bound_scale: 1.0 / 409600.0,
                ordering_a: 3.0,
                tiling_coeff: 8.0,
                w_prime_descent_frac: 0.6,
                ..LedgerCoefficients::default()
            },
        }
    }
}

/// One comparison from the ledger: `lhs` must stay below (or within, for
/// equality-style rules) `rhs`. `overridden` flags that a relaxation
/// multiplier other than 1 took part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnforcedBound {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub overridden: bool,
}

/// A configuration that passed every ledger row, together with the rows
/// themselves and the derived scale-gap data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedConfig {
    pub config: PipelineConfig,
    pub qi: QiConstants,
    pub bounds: Vec<EnforcedBound>,
    /// The enforced lower bound on the scale count, after any relaxation.
    pub s_lower_bound: f64,
    /// Ladder steps between a box scale and its tile scale: the smallest `p`
    /// with `tiling_coeff / N^p <= delta^2`, so the tiling error term fits.
    pub scale_gap_p: u32,
    /// `N^scale_gap_p` as a float (it can exceed every integer type).
    pub scale_gap_factor: f64,
}

impl ValidatedConfig {
    /// The ladder scale `r_s = r0·N^s`, failing on integer overflow.
    pub fn scale(&self, s: u32) -> Result<u64> {
        if (s as f64) > self.config.s_count {
            return Err(Error::PreconditionViolation {
                name: "scale_index".into(),
                detail: format!("s={} exceeds S={}", s, self.config.s_count),
            });
        }
        (self.config.n_ratio as u64)
            .checked_pow(s)
            .and_then(|f| self.config.r0.checked_mul(f))
            .ok_or_else(|| Error::ConstraintViolation {
                name: "scale_overflow".into(),
                detail: format!("r0·N^s overflows u64 at s={s}"),
            })
    }

    /// Every materializable ladder scale up to `limit`, as `(s, r_s)`.
    pub fn scales_up_to(&self, limit: u64) -> Vec<(u32, u64)> {
        let mut out = Vec::new();
        for s in 0..=u32::MAX {
            if (s as f64) > self.config.s_count {
                break;
            }
            match self.scale(s) {
                Ok(r) if r <= limit => out.push((s, r)),
                _ => break,
            }
        }
        out
    }

    /// Ladder scales that divide `l` exactly — the ones usable for aligned
    /// windows and exact tilings of a size-`l` box.
    pub fn scales_dividing(&self, l: u64) -> Vec<(u32, u64)> {
        self.scales_up_to(l).into_iter().filter(|&(_, r)| l % r == 0).collect()
    }
}

fn range_check(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ConstraintViolation {
            name: format!("range:{name}"),
            detail: format!("{name}={v} must lie strictly between 0 and 1"),
        })
    }
}

/// Check every ledger inequality, recording one [`EnforcedBound`] row per
/// comparison; the first violated row aborts with its name. The function is
/// pure: identical inputs yield identical outputs.
pub fn validate_config(cfg: &PipelineConfig, qi: &QiConstants) -> Result<ValidatedConfig> {
    for (name, v) in [
        ("epsilon", cfg.epsilon),
        ("theta", cfg.theta),
        ("delta", cfg.delta),
        ("eta", cfg.eta),
        ("eta1", cfg.eta1),
        ("beta", cfg.beta),
        ("nu", cfg.nu),
        ("rho1", cfg.rho1),
        ("rho2", cfg.rho2),
    ] {
        range_check(name, v)?;
    }
    if cfg.n_ratio < 2 {
        return Err(Error::ConstraintViolation {
            name: "N".into(),
            detail: format!("need N >= 2, got {}", cfg.n_ratio),
        });
    }
    // S must be integer-valued whenever it is small enough for f64 to tell.
    const EXACT_F64_LIMIT: f64 = 9007199254740992.0;
    if !(cfg.s_count >= 1.0) || (cfg.s_count < EXACT_F64_LIMIT && cfg.s_count.fract() != 0.0) {
        return Err(Error::ConstraintViolation {
            name: "S".into(),
            detail: format!("need integer S >= 1, got {}", cfg.s_count),
        });
    }
    if cfg.r0 < 1 {
        return Err(Error::ConstraintViolation {
            name: "r0".into(),
            detail: "need r0 >= 1".into(),
        });
    }

    let led = &cfg.ledger;
    let a = led.ordering_a;
    let mut bounds = Vec::new();
    let mut push = |name: &str, lhs: f64, rhs: f64, strict: bool, overridden: bool| {
        let satisfied = if strict { lhs < rhs } else { lhs <= rhs };
        bounds.push(EnforcedBound { name: name.into(), lhs, rhs, satisfied, overridden });
    };

    push(
        "delta_quarter",
        cfg.delta.powf(0.25),
        cfg.epsilon.min(cfg.theta / led.delta_cap_div) * led.delta_quarter_scale,
        false,
        led.delta_quarter_scale != 1.0,
    );
    let s_lower_bound =
        led.s_bound_coeff * qi.kappa.powi(3) / (cfg.epsilon * cfg.delta.powi(4)) * led.s_bound_scale;
    push("S", s_lower_bound, cfg.s_count, true, led.s_bound_scale != 1.0);
    push("nu=sqrt(delta)", (cfg.nu - cfg.delta.sqrt()).abs(), 1e-12, false, false);
    push("rho2", a * cfg.rho2, 1.0, true, false);
    push("rho1<rho2", a * cfg.rho1, cfg.rho2, true, false);
    push("epsilon<rho1", a * cfg.epsilon, cfg.rho1, true, false);
    push("theta<rho1", a * cfg.theta.powf(0.25), cfg.rho1, true, false);
    push("A_uniform", 2.0, cfg.a_uniform, true, false);

    // Gap between tile and box scales: smallest p >= 1 with
    // tiling_coeff / N^p <= delta^2.
    let target = led.tiling_coeff / cfg.delta.powi(2);
    let mut scale_gap_p = 1u32;
    while (cfg.n_ratio as f64).powi(scale_gap_p as i32) < target {
        scale_gap_p += 1;
        if scale_gap_p > 4096 {
            return Err(Error::ConstraintViolation {
                name: "scale_gap".into(),
                detail: "tiling error rule needs more than N^4096".into(),
            });
        }
    }
    let scale_gap_factor = (cfg.n_ratio as f64).powi(scale_gap_p as i32);
    push("scale_gap", led.tiling_coeff / scale_gap_factor, cfg.delta.powi(2), false, false);

    if let Some(row) = bounds.iter().find(|b| !b.satisfied) {
        return Err(Error::ConstraintViolation {
            name: row.name.clone(),
            detail: format!("ledger row {} failed: lhs={} rhs={}", row.name, row.lhs, row.rhs),
        });
    }
    Ok(ValidatedConfig {
        config: cfg.clone(),
        qi: *qi,
        bounds,
        s_lower_bound,
        scale_gap_p,
        scale_gap_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi1() -> QiConstants {
        QiConstants::new(1.0, 0.0).unwrap()
    }

    #[test]
    fn reference_profile_validates_with_astronomical_ladder() {
        let cfg = PipelineConfig::reference(&qi1());
        let v = validate_config(&cfg, &qi1()).unwrap();
        assert!(v.s_lower_bound > 1e50, "faithful bound is astronomical");
        assert!(cfg.s_count > v.s_lower_bound);
        assert!(v.bounds.iter().all(|b| b.satisfied));
        assert!(v.bounds.iter().all(|b| !b.overridden), "reference relaxes nothing");
        // The ladder itself overflows long before S.
        assert!(v.scale(200).is_err());
    }

    #[test]
    fn desk_profiles_validate_and_flag_overrides() {
        for cfg in [PipelineConfig::desk_step1(), PipelineConfig::desk_step2()] {
            let v = validate_config(&cfg, &qi1()).unwrap();
            assert!(v.bounds.iter().any(|b| b.overridden), "desk profiles relax the ledger");
            assert!(v.bounds.iter().all(|b| b.satisfied));
        }
        let v = validate_config(&PipelineConfig::desk_step1(), &qi1()).unwrap();
        assert_eq!(v.scales_dividing(8), vec![(0, 2), (1, 4), (2, 8)]);
        assert_eq!(v.scales_up_to(5), vec![(0, 2), (1, 4)]);
    }

    #[test]
    fn violations_name_the_failing_row() {
        let mut cfg = PipelineConfig::desk_step1();
        cfg.s_count = 1.0;
        cfg.ledger.s_bound_scale = 1.0;
        match validate_config(&cfg, &qi1()) {
            Err(Error::ConstraintViolation { name, .. }) => assert_eq!(name, "S"),
            other => panic!("expected S violation, got {other:?}"),
        }

        let mut cfg = PipelineConfig::desk_step1();
        cfg.rho1 = cfg.rho2;
        match validate_config(&cfg, &qi1()) {
            Err(Error::ConstraintViolation { name, .. }) => assert_eq!(name, "rho1<rho2"),
            other => panic!("expected rho ordering violation, got {other:?}"),
        }

        let mut cfg = PipelineConfig::desk_step1();
        cfg.nu = 0.5;
        match validate_config(&cfg, &qi1()) {
            Err(Error::ConstraintViolation { name, .. }) => assert_eq!(name, "nu=sqrt(delta)"),
            other => panic!("expected nu violation, got {other:?}"),
        }
    }

    #[test]
    fn validation_is_pure() {
        let cfg = PipelineConfig::desk_step1();
        let a = validate_config(&cfg, &qi1()).unwrap();
        let b = validate_config(&cfg, &qi1()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn ladder_is_geometric_and_overflow_checked() {
        let v = validate_config(&PipelineConfig::desk_step1(), &qi1()).unwrap();
        assert_eq!(v.scale(0).unwrap(), 2);
        assert_eq!(v.scale(1).unwrap(), 4);
        assert_eq!(v.scale(2).unwrap(), 8);
        assert!(v.scale(3).is_err(), "beyond S");
        let mut cfg = PipelineConfig::reference(&qi1());
        cfg.r0 = u64::MAX / 2;
        let v = validate_config(&cfg, &qi1()).unwrap();
        assert!(matches!(
            v.scale(2),
            Err(Error::ConstraintViolation { ref name, .. }) if name == "scale_overflow"
        ));
    }

    #[test]
    fn config_serializes_with_ledger_defaults() {
        let cfg = PipelineConfig::desk_step1();
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"N\":2") && s.contains("\"A_uniform\":4.0"));
        let back: PipelineConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
        // A config file may omit the ledger block entirely.
        let minimal: PipelineConfig = serde_json::from_str(
            &s.replace(&format!(",\"ledger\":{}", serde_json::to_string(&cfg.ledger).unwrap()), ""),
        )
        .unwrap();
        assert_eq!(minimal.ledger, LedgerCoefficients::default());
    }
}
