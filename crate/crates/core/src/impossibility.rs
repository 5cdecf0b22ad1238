//! Closed-form relations between group metrics and their ε-relaxations.
//!
//! Sign convention: group 2 quantities are group 1 quantities shifted by the
//! matching ε term. The ACC balance is
//! `(1-β)p + (1-α)(1-p) = (1-β-εN)(p+εp) + (1-α-εF)(1-p-εp) + εA`
//! and the PPV balance is
//! `A(1-β) = B(1-β-εN) + εF` with `A = p/(1-p)·(1-v)/v` and `B` the same
//! expression evaluated at `(p+εp, v+εv)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImpossibilityError {
    #[error("ZeroEpsP: prevalence difference eps_p must be nonzero")]
    ZeroEpsP,
    #[error("SingularDenominator: |D| = {0:e} is below the singularity threshold")]
    SingularDenominator(f64),
    #[error("DomainError: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, ImpossibilityError>;

fn domain(msg: impl Into<String>) -> ImpossibilityError {
    ImpossibilityError::Domain(msg.into())
}

fn open_unit(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} must lie in (0, 1)")))
    }
}

fn closed_unit(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} must lie in [0, 1]")))
    }
}

fn tolerance(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > -1.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} = {x} must lie in (-1, 1)")))
    }
}

/// FPR implied by prevalence, PPV and FNR. May exceed 1 when the triple is not
/// realizable; callers check.
pub fn fpr_from_relation(p: f64, ppv: f64, fnr: f64) -> Result<f64> {
    open_unit("p", p)?;
    if !(ppv.is_finite() && ppv > 0.0 && ppv <= 1.0) {
        return Err(domain(format!("ppv = {ppv} must lie in (0, 1]")));
    }
    closed_unit("fnr", fnr)?;
    Ok(p / (1.0 - p) * ((1.0 - ppv) / ppv) * (1.0 - fnr))
}

pub fn acc_identity(p: f64, fnr: f64, fpr: f64) -> f64 {
    (1.0 - fnr) * p + (1.0 - fpr) * (1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccRelaxation {
    pub eps_fpr: f64,
    pub eps_fnr: f64,
    pub eps_acc: f64,
    pub eps_p: f64,
    pub p: f64,
}

impl AccRelaxation {
    pub fn validate(&self) -> Result<()> {
        tolerance("eps_fpr", self.eps_fpr)?;
        tolerance("eps_fnr", self.eps_fnr)?;
        tolerance("eps_acc", self.eps_acc)?;
        tolerance("eps_p", self.eps_p)?;
        if self.eps_p == 0.0 {
            return Err(ImpossibilityError::ZeroEpsP);
        }
        open_unit("p", self.p)?;
        open_unit("p + eps_p", self.p + self.eps_p)
    }
}

/// FNR of group 1 on the relaxed ACC balance line through `fpr1`.
pub fn relaxed_fnr_acc(r: &AccRelaxation, fpr1: f64) -> Result<f64> {
    r.validate()?;
    let AccRelaxation { eps_fpr: ef, eps_fnr: en, eps_acc: ea, eps_p: ep, p } = *r;
    Ok((-ef + ea + ef * p - en * p + fpr1 * ep + ef * ep - en * ep) / ep)
}

/// LHS minus RHS of the ACC balance at group 1 operating point `(fpr1, fnr1)`.
pub fn residual_acc(r: &AccRelaxation, fpr1: f64, fnr1: f64) -> f64 {
    let AccRelaxation { eps_fpr: ef, eps_fnr: en, eps_acc: ea, eps_p: ep, p } = *r;
    let lhs = acc_identity(p, fnr1, fpr1);
    let rhs = (1.0 - fnr1 - en) * (p + ep) + (1.0 - fpr1 - ef) * (1.0 - p - ep) + ea;
    lhs - rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub gamma: f64,
    pub eps_p: f64,
    pub p: Option<f64>,
}

impl RegionSpec {
    pub fn new(gamma: f64, eps_p: f64) -> Self {
        Self { gamma, eps_p, p: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(domain(format!("gamma = {} must lie in (0, 1]", self.gamma)));
        }
        if !self.eps_p.is_finite() {
            return Err(domain("eps_p must be finite"));
        }
        if self.eps_p == 0.0 {
            return Err(ImpossibilityError::ZeroEpsP);
        }
        tolerance("eps_p", self.eps_p)?;
        if let Some(p) = self.p {
            open_unit("p", p)?;
            if self.eps_p >= 1.0 - p {
                return Err(domain(format!("eps_p = {} must be below 1 - p", self.eps_p)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetBounds {
    pub c_max: f64,
    pub c_min: f64,
}

pub fn offset_bounds(spec: &RegionSpec) -> Result<OffsetBounds> {
    spec.validate()?;
    let c_max = 2.0 * spec.gamma / spec.eps_p.abs();
    Ok(OffsetBounds { c_max, c_min: -c_max })
}

/// Area of the band `|FPR - FNR| <= c` inside the unit square, `c` clamped to 1.
pub fn band_area(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    2.0 * c - c * c
}

pub fn fairness_area_acc(spec: &RegionSpec) -> Result<f64> {
    Ok(band_area(offset_bounds(spec)?.c_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpvRelaxation {
    pub eps_fpr: f64,
    pub eps_fnr: f64,
    pub eps_v: f64,
    pub eps_p: f64,
    pub p: f64,
    pub v: f64,
}

impl PpvRelaxation {
    pub fn validate(&self) -> Result<()> {
        tolerance("eps_fpr", self.eps_fpr)?;
        tolerance("eps_fnr", self.eps_fnr)?;
        tolerance("eps_v", self.eps_v)?;
        tolerance("eps_p", self.eps_p)?;
        open_unit("p", self.p)?;
        open_unit("v", self.v)?;
        open_unit("p + eps_p", self.p + self.eps_p)?;
        open_unit("v + eps_v", self.v + self.eps_v)
    }

    pub fn denominator(&self) -> f64 {
        let Self { eps_v: ev, eps_p: ep, p, v, .. } = *self;
        ep * (p * ev - v * v - v * ev + v) + (p - 1.0) * p * ev
    }
}

pub fn relaxed_fnr_ppv(r: &PpvRelaxation) -> Result<f64> {
    relaxed_fnr_ppv_with(r, DEFAULT_SINGULAR_THRESHOLD)
}

/// FNR of group 1 solving the relaxed PPV balance, with a custom singularity
/// threshold on the denominator.
pub fn relaxed_fnr_ppv_with(r: &PpvRelaxation, threshold: f64) -> Result<f64> {
    r.validate()?;
    let d = r.denominator();
    if d.abs() <= threshold {
        return Err(ImpossibilityError::SingularDenominator(d));
    }
    let PpvRelaxation { eps_fpr: ef, eps_fnr: en, eps_v: ev, eps_p: ep, p, v } = *r;
    let k = ef * (p - 1.0) - 1.0;
    let num = ep * (v * v * k + v * ev * k + p * ev + v)
        + (p - 1.0) * (ef * (p - 1.0) * v * (v + ev) + p * ev)
        - en * (p - 1.0) * v * (p + ep) * (v + ev - 1.0);
    Ok(num / d)
}

/// LHS minus RHS of the PPV balance evaluated at `beta`.
pub fn residual_eq16(r: &PpvRelaxation, beta: f64) -> Result<f64> {
    r.validate()?;
    let PpvRelaxation { eps_fpr: ef, eps_fnr: en, eps_v: ev, eps_p: ep, p, v } = *r;
    let (p2, v2) = (p + ep, v + ev);
    let lhs = p / (1.0 - p) * ((1.0 - v) / v) * (1.0 - beta);
    let rhs = p2 / (1.0 - p2) * ((1.0 - v2) / v2) * (1.0 - beta - en) + ef;
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc(ef: f64, en: f64, ea: f64, ep: f64, p: f64) -> AccRelaxation {
        AccRelaxation { eps_fpr: ef, eps_fnr: en, eps_acc: ea, eps_p: ep, p }
    }

    fn ppv(ef: f64, en: f64, ev: f64, ep: f64, p: f64, v: f64) -> PpvRelaxation {
        PpvRelaxation { eps_fpr: ef, eps_fnr: en, eps_v: ev, eps_p: ep, p, v }
    }

    #[test]
    fn fpr_relation_examples() {
        // 30 positives / 70 negatives, fnr 0.2 -> tp 24, ppv 0.6 -> fp 16.
        let fpr = fpr_from_relation(0.3, 0.6, 0.2).unwrap();
        assert!((fpr - 16.0 / 70.0).abs() < 1e-15);
        assert_eq!(fpr_from_relation(0.5, 1.0, 0.0).unwrap(), 0.0);
        assert_eq!(fpr_from_relation(0.5, 0.5, 0.0).unwrap(), 1.0);
        assert!(fpr_from_relation(0.0, 0.5, 0.0).is_err());
        assert!(fpr_from_relation(0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn acc_identity_examples() {
        assert!((acc_identity(0.25, 0.2, 0.1) - 0.875).abs() < 1e-15);
        assert_eq!(acc_identity(0.5, 0.0, 0.0), 1.0);
        assert_eq!(acc_identity(0.5, 1.0, 1.0), 0.0);
    }

    #[test]
    fn relaxed_acc_examples() {
        let r = acc(0.0, 0.0, 0.0, 0.1, 0.4);
        let fnr = relaxed_fnr_acc(&r, 0.3).unwrap();
        assert!((fnr - 0.3).abs() < 1e-15);
        assert!(residual_acc(&r, 0.3, fnr).abs() < 1e-15);

        let r = acc(0.0, 0.0, 0.05, 0.1, 0.4);
        let fnr = relaxed_fnr_acc(&r, 0.2).unwrap();
        assert!((fnr - 0.7).abs() < 1e-12);
        // Direct construction: ACC1 = ACC2 + eps_acc with group 2 rates unchanged.
        let acc1 = acc_identity(0.4, fnr, 0.2);
        let acc2 = acc_identity(0.5, fnr, 0.2);
        assert!((acc1 - acc2 - 0.05).abs() < 1e-12);

        assert_eq!(relaxed_fnr_acc(&acc(0.0, 0.0, 0.0, 0.0, 0.4), 0.2), Err(ImpossibilityError::ZeroEpsP));
    }

    #[test]
    fn offset_and_area_examples() {
        let b = offset_bounds(&RegionSpec::new(0.05, 0.2)).unwrap();
        assert!((b.c_max - 0.5).abs() < 1e-15 && b.c_min == -b.c_max);
        assert!((offset_bounds(&RegionSpec::new(0.05, 0.1)).unwrap().c_max - 1.0).abs() < 1e-15);
        assert!((offset_bounds(&RegionSpec::new(0.01, 0.5)).unwrap().c_max - 0.04).abs() < 1e-15);
        assert!((offset_bounds(&RegionSpec::new(0.05, -0.2)).unwrap().c_max - 0.5).abs() < 1e-15);

        assert!((fairness_area_acc(&RegionSpec::new(0.05, 0.2)).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(fairness_area_acc(&RegionSpec::new(0.05, 0.1)).unwrap(), 1.0);
        assert_eq!(fairness_area_acc(&RegionSpec::new(0.05, 0.01)).unwrap(), 1.0);
        assert!((fairness_area_acc(&RegionSpec::new(0.01, 0.4)).unwrap() - 0.0975).abs() < 1e-12);
        assert_eq!(fairness_area_acc(&RegionSpec::new(0.05, 0.0)), Err(ImpossibilityError::ZeroEpsP));
    }

    #[test]
    fn region_spec_prevalence_bound() {
        let spec = RegionSpec { gamma: 0.05, eps_p: 0.5, p: Some(0.6) };
        assert!(matches!(spec.validate(), Err(ImpossibilityError::Domain(_))));
        let spec = RegionSpec { gamma: 0.05, eps_p: 0.2, p: Some(0.6) };
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn area_closed_form_below_saturation() {
        for &(g, e) in &[(0.01, 0.4), (0.05, 0.3), (0.1, 0.9)] {
            let a = fairness_area_acc(&RegionSpec::new(g, e)).unwrap();
            let expected = 4.0 * g / e - 4.0 * g * g / (e * e);
            assert!((a - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn relaxed_ppv_examples() {
        let r = ppv(0.0, 0.0, 0.0, 0.2, 0.3, 0.5);
        let beta = relaxed_fnr_ppv(&r).unwrap();
        assert!((beta - 1.0).abs() < 1e-12);
        assert!(residual_eq16(&r, beta).unwrap().abs() < 1e-12);
        assert!((residual_eq16(&r, 0.0).unwrap() + 4.0 / 7.0).abs() < 1e-12);

        let r = ppv(0.05, 0.0, 0.1, 0.0, 0.5, 0.5);
        assert!((relaxed_fnr_ppv(&r).unwrap() - 0.85).abs() < 1e-12);

        let r = ppv(0.05, 0.02, 0.0, 0.0, 0.5, 0.5);
        assert!(matches!(relaxed_fnr_ppv(&r), Err(ImpossibilityError::SingularDenominator(_))));
    }

    #[test]
    fn residual_zero_for_identical_groups() {
        let r = ppv(0.0, 0.0, 0.0, 0.0, 0.35, 0.6);
        for beta in [0.0, 0.3, 0.9] {
            assert_eq!(residual_eq16(&r, beta).unwrap(), 0.0);
        }
    }

    #[test]
    fn ppv_matches_linear_solve() {
        // A(1-β) = B(1-β-εN) + εF solved directly for β.
        let r = ppv(0.03, -0.02, 0.07, -0.15, 0.42, 0.55);
        let a = r.p / (1.0 - r.p) * (1.0 - r.v) / r.v;
        let (p2, v2) = (r.p + r.eps_p, r.v + r.eps_v);
        let b = p2 / (1.0 - p2) * (1.0 - v2) / v2;
        let expected = (b * (1.0 - r.eps_fnr) + r.eps_fpr - a) / (b - a);
        assert!((relaxed_fnr_ppv(&r).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn custom_threshold() {
        let r = ppv(0.0, 0.0, 0.0, 0.2, 0.3, 0.5);
        let d = r.denominator().abs();
        assert!(relaxed_fnr_ppv_with(&r, d * 2.0).is_err());
        assert!(relaxed_fnr_ppv_with(&r, d / 2.0).is_ok());
    }
}
