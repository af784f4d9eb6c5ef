//! Named verification checks, selectable at runtime, each producing a JSON
//! report.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gamma::{
    self, check_gkz, default_samples, lattice_points, rank_functional, FamilyRegistry, Kind, SeriesConfig,
};
use crate::input::PairingEntry;
use crate::ktheory::{kc_label, monomial_label, pairing_matrix, ChiRegistry, KTheory};
use crate::pairing::{self, as_matrix, evaluate_candidate_pairing, inverse_euler_check, verify_volume_identity};

/// Inputs shared by all checks.
#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub truncation: u32,
    pub samples: Vec<Vec<Complex64>>,
    pub tolerance: f64,
    /// Candidate pairing table for the `pairing` check.
    pub table: Option<Vec<PairingEntry>>,
    /// Expected proportionality constant against the inverse Euler pairing.
    pub scale: Option<Complex64>,
}

impl VerifyConfig {
    pub fn new(kt: &KTheory) -> Self {
        VerifyConfig {
            truncation: 16,
            samples: default_samples(&kt.fan),
            tolerance: 1e-6,
            table: None,
            scale: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub status: Status,
    pub detail: Value,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport>;
}

fn report(name: &str, passed: bool, detail: Value) -> CheckReport {
    CheckReport {
        check: name.to_string(),
        status: if passed { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

/// Shift and homogeneity equations for every registered family.
pub struct GkzCheck;

impl Check for GkzCheck {
    fn name(&self) -> &'static str {
        "gkz"
    }

    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport> {
        let reg = FamilyRegistry::default();
        let mut reports = Vec::new();
        let mut passed = true;
        let degree = kt.fan.rank as i64;
        for name in reg.names() {
            let f = reg.get(name)?;
            let pts = lattice_points(&kt.fan, degree, f.kind() == Kind::Compact);
            let r = check_gkz(kt, f.as_ref(), &pts, &cfg.samples, cfg.truncation)?;
            passed &= r.exponents_match && r.max_residual() <= cfg.tolerance;
            reports.push(r);
        }
        Ok(report(self.name(), passed, to_value(&reports)))
    }
}

/// Constancy of the Hessian pairing with Γ°.
pub struct HessianOneCheck;

impl Check for HessianOneCheck {
    fn name(&self) -> &'static str {
        "hessian-one"
    }

    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport> {
        let r = pairing::pair_with_one(kt, &gamma::GammaCircFamily, &cfg.samples, cfg.truncation, cfg.tolerance)?;
        Ok(report(self.name(), r.passed, to_value(&r)))
    }
}

/// The constant of the Hessian pairing against the volume of the polytope.
pub struct VolumeCheck;

impl Check for VolumeCheck {
    fn name(&self) -> &'static str {
        "volume"
    }

    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport> {
        let r = verify_volume_identity(kt, &cfg.samples, cfg.truncation, cfg.tolerance)?;
        Ok(report(self.name(), r.passed, to_value(&r)))
    }
}

/// A candidate pairing table evaluated on (Γ, Γ°) and compared with the
/// inverse of the Euler pairing.
pub struct PairingCheck;

impl Check for PairingCheck {
    fn name(&self) -> &'static str {
        "pairing"
    }

    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport> {
        let Some(table) = &cfg.table else {
            return Ok(CheckReport {
                check: self.name().into(),
                status: Status::Skipped,
                detail: json!({"reason": "no pairing table given"}),
            });
        };
        let r = evaluate_candidate_pairing(
            kt,
            table,
            &gamma::GammaFamily,
            &gamma::GammaCircFamily,
            &cfg.samples,
            cfg.truncation,
            cfg.tolerance,
        )?;
        let pm = pairing_matrix(
            kt,
            &crate::ktheory::Hrr,
            &kt.canonical_k_basis(),
            &kt.canonical_kc_basis(),
        )?;
        let ie = inverse_euler_check(kt, &as_matrix(&r), &pm, cfg.scale, cfg.tolerance)?;
        let passed = r.passed && ie.passed;
        Ok(report(
            self.name(),
            passed,
            json!({
                "k_basis": pm.k_basis.iter().map(|a| monomial_label(a)).collect::<Vec<_>>(),
                "kc_basis": pm.kc_basis.iter().map(kc_label).collect::<Vec<_>>(),
                "constancy": to_value(&r),
                "inverse_euler": to_value(&ie),
            }),
        ))
    }
}

/// Character formula against the sector integral on the canonical bases.
pub struct HrrCheck;

impl Check for HrrCheck {
    fn name(&self) -> &'static str {
        "hrr"
    }

    fn run(&self, kt: &KTheory, _cfg: &VerifyConfig) -> Result<CheckReport> {
        let reg = ChiRegistry::default();
        let kb = kt.canonical_k_basis();
        let kc = kt.canonical_kc_basis();
        let a = pairing_matrix(kt, reg.get("character")?.as_ref(), &kb, &kc)?;
        let b = pairing_matrix(kt, reg.get("hrr")?.as_ref(), &kb, &kc)?;
        let show = |m: &crate::ktheory::PairingMatrix| -> Vec<Vec<String>> {
            m.entries
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect()
        };
        Ok(report(
            self.name(),
            a.entries == b.entries,
            json!({
                "character": show(&a),
                "hrr": show(&b),
                "determinant": a.determinant.to_string(),
            }),
        ))
    }
}

/// The rank functional of `Γ_c` against `δ_c^0`.
pub struct RankCheck;

impl Check for RankCheck {
    fn name(&self) -> &'static str {
        "rank"
    }

    fn run(&self, kt: &KTheory, cfg: &VerifyConfig) -> Result<CheckReport> {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for c in lattice_points(&kt.fan, kt.fan.rank as i64, false) {
            for lx in &cfg.samples {
                let v = rank_functional(kt, &c, &SeriesConfig::new(cfg.truncation, lx.clone()))?;
                let target = if c.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
                worst = worst.max((v - target).norm());
                rows.push(json!({"c": c, "value": [v.re, v.im]}));
            }
        }
        Ok(report(
            self.name(),
            worst <= cfg.tolerance,
            json!({"max_error": worst, "values": rows}),
        ))
    }
}

/// Checks by name.
pub struct CheckRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Check>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = CheckRegistry {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(GkzCheck));
        r.register(Arc::new(HessianOneCheck));
        r.register(Arc::new(VolumeCheck));
        r.register(Arc::new(PairingCheck));
        r.register(Arc::new(HrrCheck));
        r.register(Arc::new(RankCheck));
        r
    }
}

impl CheckRegistry {
    pub fn register(&mut self, c: Arc<dyn Check>) {
        self.entries.insert(c.name(), c);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Check>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "check",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Runs the named checks, or all of them for an empty list.
    pub fn run(&self, names: &[String], kt: &KTheory, cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
        let selected: Vec<String> = if names.is_empty() {
            self.names().iter().map(|s| s.to_string()).collect()
        } else {
            names.to_vec()
        };
        selected.iter().map(|n| self.get(n)?.run(kt, cfg)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::{explicit_pairing, key_example, key_example_coarse};

    #[test]
    fn all_checks_pass_on_key_examples() {
        for fan in [key_example(), key_example_coarse()] {
            let kt = KTheory::new(fan).unwrap();
            let mut cfg = VerifyConfig::new(&kt);
            cfg.truncation = 24;
            cfg.table = Some(explicit_pairing(&kt.fan));
            cfg.scale = Some(Complex64::new(-3.0 / (4.0 * std::f64::consts::PI.powi(2)), 0.0));
            let reports = CheckRegistry::default().run(&[], &kt, &cfg).unwrap();
            assert_eq!(reports.len(), 6);
            for r in reports {
                assert_eq!(r.status, Status::Pass, "{} {}", r.check, r.detail);
            }
        }
    }

    #[test]
    fn pairing_without_table_is_skipped() {
        let kt = KTheory::new(key_example()).unwrap();
        let cfg = VerifyConfig::new(&kt);
        let r = CheckRegistry::default().get("pairing").unwrap().run(&kt, &cfg).unwrap();
        assert_eq!(r.status, Status::Skipped);
        assert!(CheckRegistry::default().get("bogus").is_err());
    }
}
