//! Thermal-pure-quantum estimation of microcanonical expectation values.
//!
//! A scrambled state |ψ> is probed with Loschmidt amplitudes of a single
//! first-order Trotter step of the periodic Heisenberg ring. A Gaussian-weighted
//! Fourier sum of those amplitudes gives the density of states D(E) and its
//! observable-weighted counterpart D_O(E); their ratio estimates <O> at energy E.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::floquet::{bond_layers, Boundary};
use crate::rng;
use crate::spectrum::{ring_bonds, XxxSpectrum};
use crate::statevector::{sample_binary_mean, Gate, Pauli, PauliString, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergSpec {
    pub n_sites: usize,
    pub coupling: f64,
}

impl HeisenbergSpec {
    pub fn new(n_sites: usize, coupling: f64) -> Result<Self> {
        let s = Self { n_sites, coupling };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || !self.n_sites.is_multiple_of(2) {
            return arg_err(format!("Heisenberg ring needs an even N >= 2, got {}", self.n_sites));
        }
        if !self.coupling.is_finite() {
            return arg_err("non-finite coupling");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub sigma: f64,
    pub e_grid: Vec<f64>,
    pub trunc_s: usize,
    pub dt: f64,
}

/// Default truncation S.
pub const DEFAULT_TRUNC_S: usize = 40;
/// Default time step in units of 1/J.
pub const DEFAULT_DT: f64 = 0.05;

impl FilterSpec {
    pub fn new(sigma: f64, e_grid: Vec<f64>, trunc_s: usize, dt: f64) -> Result<Self> {
        let f = Self { sigma, e_grid, trunc_s, dt };
        f.validate()?;
        Ok(f)
    }

    /// σ = σ_H/√(2π), S = 40, Δt = 0.05/J.
    pub fn defaults(spec: &HeisenbergSpec, e_grid: Vec<f64>) -> Result<Self> {
        let (_, var) = xxx_moments(spec)?;
        Self::new((var / (2.0 * PI)).sqrt(), e_grid, DEFAULT_TRUNC_S, DEFAULT_DT / spec.coupling.abs())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.dt > 0.0) || self.trunc_s == 0 {
            return arg_err("filter needs σ > 0, Δt > 0 and S >= 1");
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let s = self.trunc_s as i64;
        (-s..=s).map(|k| k as f64 * self.dt).collect()
    }
}

/// E_∞ = Tr[H]/d and σ_H² = Tr[H²]/d - E_∞² for the ring's bond list.
///
/// Bond operators J·SWAP on distinct pairs have orthogonal traceless parts, so
/// only bonds on the same pair contribute to the variance.
pub fn xxx_moments(spec: &HeisenbergSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let bonds: Vec<(usize, usize)> = ring_bonds(spec.n_sites)
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    let j = spec.coupling;
    let same = bonds.iter().map(|b| bonds.iter().filter(|c| *c == b).count()).sum::<usize>();
    Ok((j * bonds.len() as f64 / 2.0, 0.75 * j * j * same as f64))
}

/// Π_i e^{-iφ_i Y/2}|0> for the given angles.
pub fn product_state_from_angles(angles: &[f64]) -> Result<QuantumState> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for &phi in angles {
        let (s, c) = (phi / 2.0).sin_cos();
        let mut next = Vec::with_capacity(amps.len() * 2);
        next.extend(amps.iter().map(|a| a * c));
        next.extend(amps.iter().map(|a| a * s));
        amps = next;
    }
    QuantumState::from_amplitudes(amps)
}

/// Product state with i.i.d. angles uniform on [0, 4π).
pub fn random_product_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QuantumState> {
    let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..4.0 * PI)).collect();
    product_state_from_angles(&angles)
}

/// Gates of e^{-iH_even t} e^{-iH_odd t}: odd bonds act first.
pub fn trotter_gates(spec: &HeisenbergSpec, t: f64) -> Result<Vec<Gate>> {
    spec.validate()?;
    let (odd, even) = bond_layers(spec.n_sites, Boundary::Periodic);
    Ok(odd
        .into_iter()
        .chain(even)
        .map(|(q1, q2)| Gate::SwapRot { q1, q2, theta: spec.coupling * t })
        .collect())
}

pub fn trotter_xxx(state: &mut QuantumState, spec: &HeisenbergSpec, t: f64) -> Result<()> {
    if state.n_qubits() != spec.n_sites {
        return arg_err(format!("state has {} qubits, ring has {} sites", state.n_qubits(), spec.n_sites));
    }
    state.apply_all(&trotter_gates(spec, t)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoschmidtSeries {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub values_op: Option<Vec<C64>>,
    /// Per-point (Re, Im) standard errors in shot mode.
    pub stderr: Option<Vec<(f64, f64)>>,
    pub stderr_op: Option<Vec<(f64, f64)>>,
    pub shots: Option<u64>,
    pub symmetrized: bool,
}

fn sample_complex<R: Rng + ?Sized>(v: C64, shots: u64, rng: &mut R) -> Result<(C64, (f64, f64))> {
    let p = |x: f64| ((1.0 + x) / 2.0).clamp(0.0, 1.0);
    let re = sample_binary_mean(p(v.re), shots, rng)?;
    let im = sample_binary_mean(p(v.im), shots, rng)?;
    Ok((C64::new(re.mean, im.mean), (re.stderr, im.stderr)))
}

/// 𝓛(t) = <ψ|e^{-iH_even t}e^{-iH_odd t}|ψ> and optionally 𝓛_O(t) = <ψ|O e^{...}|ψ>
/// on the filter's time grid.
///
/// With `shots`, Re and Im of every point are sampled independently.
pub fn loschmidt_series<R: Rng + ?Sized>(
    psi: &QuantumState,
    spec: &HeisenbergSpec,
    filter: &FilterSpec,
    observable: Option<&PauliString>,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<LoschmidtSeries> {
    spec.validate()?;
    filter.validate()?;
    if psi.n_qubits() != spec.n_sites {
        return arg_err("state and ring sizes differ");
    }
    let o_psi = match observable {
        Some(o) => {
            let mut s = psi.clone();
            s.apply_pauli(o)?;
            Some(s)
        }
        None => None,
    };
    let times = filter.times();
    let exact: Vec<(C64, Option<C64>)> = times
        .par_iter()
        .map(|&t| {
            let mut phi = psi.clone();
            trotter_xxx(&mut phi, spec, t)?;
            let l = psi.inner(&phi)?;
            let lo = o_psi.as_ref().map(|o| o.inner(&phi)).transpose()?;
            Ok((l, lo))
        })
        .collect::<Result<_>>()?;
    let mut series = LoschmidtSeries {
        times,
        values: exact.iter().map(|x| x.0).collect(),
        values_op: observable.map(|_| exact.iter().map(|x| x.1.expect("observable set")).collect()),
        stderr: None,
        stderr_op: None,
        shots,
        symmetrized: false,
    };
    if let Some(shots) = shots {
        let base: u64 = rng.random();
        let mut se = Vec::with_capacity(exact.len());
        let mut se_op = Vec::with_capacity(exact.len());
        for (i, (l, lo)) in exact.iter().enumerate() {
            let mut r = rng::derive(base, &[i as u64]);
            let (v, e) = sample_complex(*l, shots, &mut r)?;
            series.values[i] = v;
            se.push(e);
            if let (Some(lo), Some(vo)) = (lo, series.values_op.as_mut()) {
                let (v, e) = sample_complex(*lo, shots, &mut r)?;
                vo[i] = v;
                se_op.push(e);
            }
        }
        series.stderr = Some(se);
        if observable.is_some() {
            series.stderr_op = Some(se_op);
        }
    }
    Ok(series)
}

fn sym_values(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[n - 1 - i]);
            C64::new((a.re + b.re) / 2.0, (a.im - b.im) / 2.0)
        })
        .collect()
}

fn sym_errors(e: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = e.len();
    (0..n)
        .map(|i| {
            let j = n - 1 - i;
            if i == j {
                (e[i].0, 0.0)
            } else {
                let c = |a: f64, b: f64| (a * a + b * b).sqrt() / 2.0;
                (c(e[i].0, e[j].0), c(e[i].1, e[j].1))
            }
        })
        .collect()
}

/// Makes Re even and Im odd in t.
pub fn symmetrize(series: &LoschmidtSeries) -> Result<LoschmidtSeries> {
    let t = &series.times;
    let n = t.len();
    for i in 0..n {
        if (t[i] + t[n - 1 - i]).abs() > 1e-12 * (1.0 + t[i].abs()) {
            return arg_err("time grid is not symmetric about zero");
        }
    }
    Ok(LoschmidtSeries {
        times: t.clone(),
        values: sym_values(&series.values),
        values_op: series.values_op.as_deref().map(sym_values),
        stderr: series.stderr.as_deref().map(sym_errors),
        stderr_op: series.stderr_op.as_deref().map(sym_errors),
        shots: series.shots,
        symmetrized: true,
    })
}

/// Default estimator validity threshold relative to max_E |D(E)|.
pub const DOS_VALIDITY_RATIO: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DosCurve {
    pub energies: Vec<f64>,
    pub d_values: Vec<f64>,
    /// Imaginary parts of D(E); zero up to rounding for symmetrized input.
    pub d_imag: Vec<f64>,
    pub d_op_values: Option<Vec<f64>>,
    /// D_O(E)/D(E) where valid.
    pub estimator: Vec<Option<f64>>,
    pub valid: Vec<bool>,
}

/// (σ/√(2π)) Σ_s Δt e^{-σ²t²/2} e^{iEt} f(t).
pub fn gaussian_transform(times: &[f64], dt: f64, values: &[C64], sigma: f64, energy: f64) -> C64 {
    let pre = sigma / (2.0 * PI).sqrt() * dt;
    times
        .iter()
        .zip(values)
        .map(|(&t, &v)| C64::from_polar((-sigma * sigma * t * t / 2.0).exp(), energy * t) * v)
        .sum::<C64>()
        * pre
}

pub fn dos_transform(series: &LoschmidtSeries, filter: &FilterSpec) -> Result<DosCurve> {
    dos_transform_with(series, filter, DOS_VALIDITY_RATIO)
}

pub fn dos_transform_with(series: &LoschmidtSeries, filter: &FilterSpec, ratio: f64) -> Result<DosCurve> {
    filter.validate()?;
    let want = filter.times();
    if want.len() != series.times.len() || want.iter().zip(&series.times).any(|(a, b)| (a - b).abs() > 1e-12) {
        return arg_err("series does not cover the filter's time grid");
    }
    let (sigma, dt) = (filter.sigma, filter.dt);
    let d: Vec<C64> = filter
        .e_grid
        .iter()
        .map(|&e| gaussian_transform(&series.times, dt, &series.values, sigma, e))
        .collect();
    let d_op: Option<Vec<C64>> = series.values_op.as_ref().map(|vo| {
        filter.e_grid.iter().map(|&e| gaussian_transform(&series.times, dt, vo, sigma, e)).collect()
    });
    let max = d.iter().map(|x| x.re.abs()).fold(0.0, f64::max);
    let valid: Vec<bool> = d.iter().map(|x| x.re.abs() >= ratio * max && max > 0.0).collect();
    let estimator = match &d_op {
        Some(dop) => (0..d.len()).map(|i| valid[i].then(|| dop[i].re / d[i].re)).collect(),
        None => vec![None; d.len()],
    };
    Ok(DosCurve {
        energies: filter.e_grid.clone(),
        d_values: d.iter().map(|x| x.re).collect(),
        d_imag: d.iter().map(|x| x.im).collect(),
        d_op_values: d_op.map(|v| v.iter().map(|x| x.re).collect()),
        estimator,
        valid,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterThermo {
    /// S_σ(E) = ln Tr[G_σ(E)].
    pub entropy: f64,
    /// Tr[G²]/Tr[G]² evaluated directly on the spectrum.
    pub purity: f64,
    /// e^{S_{σ/√2} - 2 S_σ}.
    pub purity_from_entropies: f64,
}

pub fn filter_entropy_purity(spec: &HeisenbergSpec, sigma: f64, energy: f64) -> Result<FilterThermo> {
    spec.validate()?;
    let sp = XxxSpectrum::new(spec.n_sites, spec.coupling)?;
    filter_entropy_purity_with(&sp, sigma, energy)
}

pub fn filter_entropy_purity_with(sp: &XxxSpectrum, sigma: f64, energy: f64) -> Result<FilterThermo> {
    if !(sigma > 0.0) {
        return arg_err("σ must be positive");
    }
    let g: Vec<f64> = sp.energies().iter().map(|e| (-(energy - e).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let tr: f64 = g.iter().sum();
    let tr2: f64 = g.iter().map(|x| x * x).sum();
    if tr <= 0.0 {
        return Err(Error::Argument("filter weight underflows at this energy".into()));
    }
    let s = sp.filter_entropy(sigma, energy);
    let s_half = sp.filter_entropy(sigma / 2f64.sqrt(), energy);
    Ok(FilterThermo { entropy: s, purity: tr2 / (tr * tr), purity_from_entropies: (s_half - 2.0 * s).exp() })
}

/// <ψ|V|ψ> with V = O e^{-iH_even t}e^{-iH_odd t}, read from the ancilla of a
/// Hadamard test whose controlled blocks are replayed gate by gate.
pub fn hadamard_test_value(
    psi: &QuantumState,
    spec: &HeisenbergSpec,
    t: f64,
    observable: Option<&PauliString>,
) -> Result<C64> {
    let n = spec.n_sites;
    if psi.n_qubits() != n {
        return arg_err("state and ring sizes differ");
    }
    let mut amps = psi.amplitudes().to_vec();
    amps.extend(vec![C64::new(0.0, 0.0); amps.len()]);
    let mut s = QuantumState::from_amplitudes(amps)?;
    s.apply(&Gate::H(n))?;
    s.apply_all_controlled(&trotter_gates(spec, t)?, n)?;
    if let Some(o) = observable {
        s.apply_controlled(&Gate::Pauli(o.clone()), n)?;
    }
    let x = s.expectation(&PauliString::single(n, Pauli::X))?;
    let y = s.expectation(&PauliString::single(n, Pauli::Y))?;
    Ok(C64::new(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> HeisenbergSpec {
        HeisenbergSpec::new(n, 1.0).unwrap()
    }

    #[test]
    fn moments() {
        assert_eq!(xxx_moments(&ring(16)).unwrap(), (8.0, 12.0));
        assert_eq!(xxx_moments(&ring(4)).unwrap(), (2.0, 3.0));
        let (_, var) = xxx_moments(&ring(16)).unwrap();
        assert!(((var / (2.0 * PI)).sqrt() - 1.38).abs() < 5e-3);
        assert!(HeisenbergSpec::new(5, 1.0).is_err());
    }

    #[test]
    fn product_state_hooks() {
        let z = product_state_from_angles(&[0.0; 3]).unwrap();
        assert_eq!(z.amplitudes()[0], C64::new(1.0, 0.0));
        let o = product_state_from_angles(&[PI; 3]).unwrap();
        assert!((o.amplitudes()[7].norm() - 1.0).abs() < 1e-12);
        let a = random_product_state(5, &mut rng::seeded(3)).unwrap();
        let b = random_product_state(5, &mut rng::seeded(3)).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_basics() {
        let spec = ring(4);
        let f = FilterSpec::defaults(&spec, vec![0.0]).unwrap();
        let zero = QuantumState::zero(4).unwrap();
        let zz = PauliString::parse_sites("Z1Z2").unwrap();
        let s = loschmidt_series(&zero, &spec, &f, Some(&zz), None, &mut rng::seeded(0)).unwrap();
        let mid = f.trunc_s;
        assert!((s.values[mid] - 1.0).norm() < 1e-15);
        assert!((s.values_op.as_ref().unwrap()[mid] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn symmetrize_artifacts() {
        let f = FilterSpec::new(1.0, vec![], 3, 0.5).unwrap();
        let times = f.times();
        let mk = |v: Vec<C64>| LoschmidtSeries {
            times: times.clone(),
            values: v,
            values_op: None,
            stderr: None,
            stderr_op: None,
            shots: None,
            symmetrized: false,
        };
        let odd_re = symmetrize(&mk(times.iter().map(|&t| C64::new(t, 0.0)).collect())).unwrap();
        assert!(odd_re.values.iter().all(|v| v.re.abs() < 1e-15));
        let even_im = symmetrize(&mk(times.iter().map(|_| C64::new(0.0, 0.3)).collect())).unwrap();
        assert!(even_im.values.iter().all(|v| v.im.abs() < 1e-15));
        let mut bad = mk(vec![C64::new(0.0, 0.0); times.len()]);
        bad.times[0] = -10.0;
        assert!(symmetrize(&bad).is_err());
    }

    #[test]
    fn hadamard_test_matches_direct() {
        let spec = ring(4);
        let psi = random_product_state(4, &mut rng::seeded(8)).unwrap();
        let zz = PauliString::parse_sites("Z1Z2").unwrap();
        let t = 0.45;
        let mut phi = psi.clone();
        trotter_xxx(&mut phi, &spec, t).unwrap();
        let mut o_psi = psi.clone();
        o_psi.apply_pauli(&zz).unwrap();
        let direct = o_psi.inner(&phi).unwrap();
        let h = hadamard_test_value(&psi, &spec, t, Some(&zz)).unwrap();
        assert!((direct - h).norm() < 1e-12);
    }

    #[test]
    fn purity_identity_and_monotone_entropy() {
        let spec = ring(6);
        let sp = XxxSpectrum::new(6, 1.0).unwrap();
        let th = filter_entropy_purity_with(&sp, 1.0, 3.0).unwrap();
        assert!((th.purity - th.purity_from_entropies).abs() < 1e-12);
        let mut last = f64::NEG_INFINITY;
        for k in 1..20 {
            let s = filter_entropy_purity_with(&sp, 0.2 * k as f64, 3.0).unwrap().entropy;
            assert!(s >= last);
            last = s;
        }
        let wide = filter_entropy_purity(&spec, 1e6, 3.0).unwrap();
        assert!((wide.purity - 1.0 / 64.0).abs() < 1e-9);
    }
}
