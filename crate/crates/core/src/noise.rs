//! Global depolarizing noise model and its inversions.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};

/// Two-qubit gate infidelity p_2Q(θ) = p (p_a |θ|/π + p_b).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub label: String,
    pub p: f64,
    pub p_a: f64,
    pub p_b: f64,
}

impl NoiseModel {
    pub fn new(label: impl Into<String>, p: f64, p_a: f64, p_b: f64) -> Result<Self> {
        let m = Self { label: label.into(), p, p_a, p_b };
        m.validate()?;
        Ok(m)
    }

    pub fn h1_1() -> Self {
        Self { label: "H1-1".into(), p: 1.38e-3, p_a: 1.651, p_b: 0.175 }
    }

    pub fn h1_2() -> Self {
        Self { label: "H1-2".into(), p: 2.97e-3, p_a: 1.651, p_b: 0.175 }
    }

    pub fn noiseless() -> Self {
        Self { label: "noiseless".into(), p: 0.0, p_a: 0.0, p_b: 0.0 }
    }

    /// Looks up a built-in model by label (case-insensitive).
    pub fn preset(label: &str) -> Result<Self> {
        match label.to_ascii_lowercase().as_str() {
            "h1-1" => Ok(Self::h1_1()),
            "h1-2" => Ok(Self::h1_2()),
            "noiseless" => Ok(Self::noiseless()),
            _ => Err(Error::Config(format!("unknown noise preset '{label}'"))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        m.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !(ok(self.p) && ok(self.p_a) && ok(self.p_b)) {
            return arg_err("noise parameters must be finite and non-negative");
        }
        if self.p * (self.p_a + self.p_b) > 1.0 {
            return arg_err("two-qubit infidelity exceeds 1 at |θ| = π");
        }
        Ok(())
    }

    pub fn gate_infidelity(&self, theta: f64) -> f64 {
        self.p * (self.p_a * theta.abs() / std::f64::consts::PI + self.p_b)
    }

    /// Entanglement infidelity (5/4) p_2Q(θ).
    pub fn entanglement_infidelity(&self, theta: f64) -> f64 {
        1.25 * self.gate_infidelity(theta)
    }
}

pub fn gate_infidelity(model: &NoiseModel, theta: f64) -> f64 {
    model.gate_infidelity(theta)
}

/// Weight f of the ideal channel under global depolarizing noise.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct DepolarizingF(f64);

impl DepolarizingF {
    pub fn new(f: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f) {
            return arg_err(format!("depolarizing fidelity {f} outside [0, 1]"));
        }
        Ok(Self(f))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// f = (1 - p_ent(θ))^{N_2Q}.
pub fn depolarizing_f(model: &NoiseModel, theta: f64, n_2q: u64) -> DepolarizingF {
    let p_ent = model.entanglement_infidelity(theta).min(1.0);
    DepolarizingF((1.0 - p_ent).powf(n_2q as f64))
}

fn dims(d_a: f64, d_d: f64) -> Result<()> {
    if d_a < 1.0 || d_d < 1.0 {
        return arg_err("subsystem dimensions must be at least 1");
    }
    Ok(())
}

/// Noisy (P, F) produced by depolarizing the ideal pair.
pub fn hpr_forward(p_ideal: f64, f_ideal: f64, f: DepolarizingF, d_a: f64, d_d: f64) -> Result<(f64, f64)> {
    dims(d_a, d_d)?;
    let f2 = f.0 * f.0;
    let dd2 = d_d * d_d;
    let p = f2 * p_ideal + (1.0 - f2) / dd2;
    let fr = (f2 + (1.0 - f2) / dd2) / (f2 / f_ideal + d_a * d_a * (1.0 - f2) / dd2);
    Ok((p, fr))
}

/// Mitigated pair with the raw values and their [0, 1]-clamped copies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mitigated {
    pub p: f64,
    pub f: f64,
    pub p_clamped: f64,
    pub f_clamped: f64,
}

/// Inverts [`hpr_forward`].
pub fn mitigate_hpr(p_noisy: f64, f_noisy: f64, f: DepolarizingF, d_a: f64, d_d: f64) -> Result<Mitigated> {
    dims(d_a, d_d)?;
    if f.0 <= 0.0 {
        return Err(Error::SingularMitigation { f: f.0 });
    }
    let f2 = f.0 * f.0;
    let r = (1.0 - f2) / (d_d * d_d * f2);
    let p = p_noisy / f2 - r;
    let fm = 1.0 / ((1.0 + r) / f_noisy - d_a * d_a * r);
    Ok(Mitigated { p, f: fm, p_clamped: p.clamp(0.0, 1.0), f_clamped: fm.clamp(0.0, 1.0) })
}

/// d_A² P F.
pub fn scrambling_diagnostic(p: f64, f_val: f64, d_a: f64) -> f64 {
    d_a * d_a * p * f_val
}

/// Smallest f accepted by [`mitigate_amplitude`].
pub const AMPLITUDE_F_MIN: f64 = 1e-9;

pub fn mitigate_amplitude(value: C64, f: DepolarizingF) -> Result<C64> {
    if f.0 <= AMPLITUDE_F_MIN {
        return Err(Error::SingularMitigation { f: f.0 });
    }
    Ok(value / f.0)
}

/// Order-of-magnitude shot count ceil(σ Δt ‖O‖² / ε'²), at least one.
pub fn shot_resource_estimate(sigma: f64, dt: f64, op_norm: f64, eps_prime: f64) -> Result<u64> {
    if [sigma, dt, eps_prime].iter().any(|x| !(*x > 0.0)) || !(op_norm >= 0.0) {
        return arg_err("resource estimate needs positive σ, Δt, ε' and non-negative ‖O‖");
    }
    let n = (sigma * dt * op_norm * op_norm / (eps_prime * eps_prime)).ceil();
    Ok(if n.is_finite() && n >= 1.0 { n as u64 } else if n.is_finite() { 1 } else { u64::MAX })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn infidelity_values() {
        let m = NoiseModel::h1_1();
        assert!((m.gate_infidelity(FRAC_PI_2) - 1.380690e-3).abs() < 1e-15);
        assert!((m.gate_infidelity(0.0) - 2.415e-4).abs() < 1e-15);
        assert_eq!(m.gate_infidelity(-0.4), m.gate_infidelity(0.4));
        assert_eq!(NoiseModel::noiseless().gate_infidelity(2.0), 0.0);
    }

    #[test]
    fn fidelity_values() {
        let m = NoiseModel::h1_1();
        assert_eq!(depolarizing_f(&m, FRAC_PI_2, 0).value(), 1.0);
        let f = depolarizing_f(&m, FRAC_PI_2, 100).value();
        assert!((f - (1.0 - 1.25 * 1.380690e-3f64).powi(100)).abs() < 1e-14);
        assert!((f - 0.841360249988792).abs() < 1e-14);
    }

    #[test]
    fn forward_examples() {
        let f = DepolarizingF::new(0.9).unwrap();
        let (p, fv) = hpr_forward(0.5, 0.6, f, 2.0, 4.0).unwrap();
        assert!((p - 0.416875).abs() < 1e-15);
        let m = mitigate_hpr(p, fv, f, 2.0, 4.0).unwrap();
        assert!((m.p - 0.5).abs() < 1e-12 && (m.f - 0.6).abs() < 1e-12);
        let (p, fv) = hpr_forward(0.5, 0.5, f, 2.0, 4.0).unwrap();
        assert!((scrambling_diagnostic(p, fv, 2.0) - 0.821875).abs() < 1e-12);
        let zero = DepolarizingF::new(0.0).unwrap();
        let (p, fv) = hpr_forward(0.5, 0.5, zero, 2.0, 4.0).unwrap();
        assert!((scrambling_diagnostic(p, fv, 2.0) - 1.0 / 16.0).abs() < 1e-12);
        assert!(matches!(mitigate_hpr(0.3, 0.3, zero, 2.0, 4.0), Err(Error::SingularMitigation { .. })));
    }

    #[test]
    fn amplitude_and_shots() {
        let f = DepolarizingF::new(0.8).unwrap();
        assert!((mitigate_amplitude(C64::new(0.5, 0.0), f).unwrap().re - 0.625).abs() < 1e-15);
        assert_eq!(shot_resource_estimate(1.38, 0.05, 1.0, 0.01).unwrap(), 690);
        assert_eq!(shot_resource_estimate(1.38, 0.05, 1.0, 1e9).unwrap(), 1);
        assert_eq!(shot_resource_estimate(1.38, 0.05, 0.0, 0.01).unwrap(), 1);
    }

    #[test]
    fn json_roundtrip() {
        let m = NoiseModel::from_json(r#"{"label":"x","p":0.001,"p_a":1.0,"p_b":0.1}"#).unwrap();
        assert_eq!(m.p, 0.001);
        assert!(NoiseModel::from_json(r#"{"label":"x","p":-1,"p_a":1,"p_b":0}"#).is_err());
    }
}
