//! Ensemble statistics of Loschmidt amplitudes and their Haar baselines.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::floquet::{evolve, FloquetSpec};
use crate::rng;
use crate::spectrum::XxxSpectrum;
use crate::statevector::QuantumState;
use crate::tpq::{random_product_state, trotter_xxx, FilterSpec, HeisenbergSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    /// One random product state evolved for every m in [m_min, m_max).
    FloquetCycles { m_min: usize, m_max: usize },
    /// `members` random product states, each evolved m cycles.
    FloquetFixedM { m: usize, members: usize },
    /// `members` Haar-random states.
    Haar { members: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub floquet: FloquetSpec,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        self.floquet.validate()?;
        match self.kind {
            EnsembleKind::FloquetCycles { m_min, m_max } if m_max <= m_min => {
                arg_err("floquet_cycles needs m_max > m_min")
            }
            EnsembleKind::FloquetFixedM { members: 0, .. } | EnsembleKind::Haar { members: 0 } => {
                arg_err("ensemble needs at least one member")
            }
            _ => Ok(()),
        }
    }

    pub fn count(&self) -> usize {
        match self.kind {
            EnsembleKind::FloquetCycles { m_min, m_max } => m_max - m_min,
            EnsembleKind::FloquetFixedM { members, .. } | EnsembleKind::Haar { members } => members,
        }
    }

    /// Member states in a fixed order.
    pub fn states(&self) -> Result<Vec<QuantumState>> {
        self.validate()?;
        let n = self.floquet.n_sites;
        match self.kind {
            EnsembleKind::FloquetCycles { m_min, m_max } => {
                let mut psi = random_product_state(n, &mut rng::derive(self.seed, &[0]))?;
                evolve(&mut psi, &self.floquet, m_min, false, 0)?;
                let mut out = Vec::with_capacity(m_max - m_min);
                for _ in m_min..m_max {
                    out.push(psi.clone());
                    evolve(&mut psi, &self.floquet, 1, false, 0)?;
                }
                Ok(out)
            }
            EnsembleKind::FloquetFixedM { m, members } => (0..members)
                .into_par_iter()
                .map(|r| {
                    let mut psi = random_product_state(n, &mut rng::derive(self.seed, &[r as u64]))?;
                    evolve(&mut psi, &self.floquet, m, false, 0)?;
                    Ok(psi)
                })
                .collect(),
            EnsembleKind::Haar { members } => (0..members)
                .into_par_iter()
                .map(|r| QuantumState::haar(n, &mut rng::derive(self.seed, &[r as u64])))
                .collect(),
        }
    }
}

/// Time evolution used for the Loschmidt amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evolver {
    /// Dense diagonalization, exact e^{-iHt}.
    Exact,
    /// Single first-order Trotter step.
    Trotter,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesStats {
    pub times: Vec<f64>,
    pub mean: Vec<C64>,
    pub var_re: Vec<f64>,
    pub var_im: Vec<f64>,
    pub var_total: Vec<f64>,
    /// sqrt(var_total / count).
    pub mean_stderr: Vec<f64>,
    pub count: usize,
    pub evolver: Evolver,
}

impl SeriesStats {
    pub fn sd_total(&self) -> Vec<f64> {
        self.var_total.iter().map(|v| v.sqrt()).collect()
    }
}

pub fn sff(spec: &HeisenbergSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    Ok(XxxSpectrum::new(spec.n_sites, spec.coupling)?.sff(t))
}

/// Var_{Haar}[𝓛(t)] = (1 - SFF)/(d + 1).
pub fn haar_variance(sff_value: f64, d: f64) -> f64 {
    (1.0 - sff_value) / (d + 1.0)
}

/// Standard deviation of the ensemble-and-shot mean from R states with N shots each.
///
/// Infinite `d` or `shots` give the corresponding limits.
pub fn combined_stddev(sff_value: f64, d: f64, shots: f64, r_states: f64) -> f64 {
    let inv = 1.0 / (d + 1.0);
    let frac = 1.0 / (1.0 + 1.0 / d);
    let state = (1.0 - sff_value) * inv / r_states;
    let shot = (2.0 - inv - frac * sff_value) / (r_states * shots);
    (state + shot).sqrt()
}

fn loschmidt_rows(
    states: &[QuantumState],
    heis: &HeisenbergSpec,
    times: &[f64],
    evolver: Evolver,
    spectrum: Option<&XxxSpectrum>,
) -> Result<Vec<Vec<C64>>> {
    match evolver {
        Evolver::Exact => {
            let owned;
            let sp = match spectrum {
                Some(sp) if sp.n_sites() == heis.n_sites => sp,
                Some(_) => return arg_err("spectrum and ring sizes differ"),
                None => {
                    owned = XxxSpectrum::new(heis.n_sites, heis.coupling)?;
                    &owned
                }
            };
            states
                .par_iter()
                .map(|psi| {
                    let w = sp.weights(psi)?;
                    Ok(times
                        .iter()
                        .map(|&t| w.iter().map(|&(e, x)| C64::from_polar(x, -e * t)).sum())
                        .collect())
                })
                .collect()
        }
        Evolver::Trotter => states
            .par_iter()
            .map(|psi| {
                times
                    .iter()
                    .map(|&t| {
                        let mut phi = psi.clone();
                        trotter_xxx(&mut phi, heis, t)?;
                        psi.inner(&phi)
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Per-time mean and biased sample variances of 𝓛(t) over the ensemble.
pub fn ensemble_series_stats(
    ensemble: &EnsembleSpec,
    heis: &HeisenbergSpec,
    filter: &FilterSpec,
    evolver: Evolver,
) -> Result<SeriesStats> {
    ensemble_series_stats_with(ensemble, heis, filter, evolver, None)
}

/// As [`ensemble_series_stats`], reusing a spectrum built for the same ring and coupling.
pub fn ensemble_series_stats_with(
    ensemble: &EnsembleSpec,
    heis: &HeisenbergSpec,
    filter: &FilterSpec,
    evolver: Evolver,
    spectrum: Option<&XxxSpectrum>,
) -> Result<SeriesStats> {
    heis.validate()?;
    filter.validate()?;
    if ensemble.floquet.n_sites != heis.n_sites {
        return arg_err("Floquet and Heisenberg chains differ in size");
    }
    let states = ensemble.states()?;
    let times = filter.times();
    let rows = loschmidt_rows(&states, heis, &times, evolver, spectrum)?;
    Ok(stats_from_rows(times, &rows, evolver))
}

/// Aggregates member rows in order; the reduction order is fixed.
pub fn stats_from_rows(times: Vec<f64>, rows: &[Vec<C64>], evolver: Evolver) -> SeriesStats {
    let count = rows.len();
    let r = count as f64;
    let nt = times.len();
    let mut mean = vec![C64::new(0.0, 0.0); nt];
    let mut sq_re = vec![0.0; nt];
    let mut sq_im = vec![0.0; nt];
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            mean[i] += v;
            sq_re[i] += v.re * v.re;
            sq_im[i] += v.im * v.im;
        }
    }
    mean.iter_mut().for_each(|m| *m /= r);
    let var_re: Vec<f64> = (0..nt).map(|i| (sq_re[i] / r - mean[i].re.powi(2)).max(0.0)).collect();
    let var_im: Vec<f64> = (0..nt).map(|i| (sq_im[i] / r - mean[i].im.powi(2)).max(0.0)).collect();
    let var_total: Vec<f64> = var_re.iter().zip(&var_im).map(|(a, b)| a + b).collect();
    let mean_stderr = var_total.iter().map(|v| (v / r).sqrt()).collect();
    SeriesStats { times, mean, var_re, var_im, var_total, mean_stderr, count, evolver }
}

/// Ratio of time averages of σ_𝓛(t) and σ_Haar(t) over t in (t_lo, t_hi].
pub fn time_averaged_ratio(stats: &SeriesStats, spectrum: &XxxSpectrum, t_lo: f64, t_hi: f64) -> Result<f64> {
    let d = spectrum.dim() as f64;
    let (mut num, mut den, mut k) = (0.0, 0.0, 0);
    for (i, &t) in stats.times.iter().enumerate() {
        if t > t_lo && t <= t_hi {
            num += stats.var_total[i].sqrt();
            den += haar_variance(spectrum.sff(t), d).sqrt();
            k += 1;
        }
    }
    if k == 0 {
        return arg_err("no grid times inside the averaging window");
    }
    Ok(num / den)
}

/// Time average of σ_𝓛(t) over t in (t_lo, t_hi].
pub fn time_averaged_sd(stats: &SeriesStats, t_lo: f64, t_hi: f64) -> Result<f64> {
    let v: Vec<f64> = stats
        .times
        .iter()
        .zip(&stats.var_total)
        .filter(|(t, _)| **t > t_lo && **t <= t_hi)
        .map(|(_, v)| v.sqrt())
        .collect();
    if v.is_empty() {
        return arg_err("no grid times inside the averaging window");
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::Boundary;

    #[test]
    fn haar_variance_values() {
        assert_eq!(haar_variance(1.0, 8.0), 0.0);
        assert_eq!(haar_variance(0.0, 8.0), 1.0 / 9.0);
        assert_eq!(haar_variance(0.5, 1024.0), 0.5 / 1025.0);
    }

    #[test]
    fn combined_limits() {
        let (s, d, r, n) = (0.3, 64.0, 8.0, 100.0);
        let inf = f64::INFINITY;
        assert!((combined_stddev(s, d, inf, r) - ((1.0 - s) / (r * (d + 1.0))).sqrt()).abs() < 1e-15);
        assert!((combined_stddev(0.0, inf, n, r) - (2.0 / (r * n)).sqrt()).abs() < 1e-15);
        assert!((combined_stddev(s, inf, n, r) - ((2.0 - s) / (r * n)).sqrt()).abs() < 1e-15);
        assert_eq!(combined_stddev(1.0, d, inf, r), 0.0);
    }

    #[test]
    fn total_variance_is_sum() {
        let heis = HeisenbergSpec::new(6, 1.0).unwrap();
        let f = FilterSpec::new(1.0, vec![], 10, 0.1).unwrap();
        let ens = EnsembleSpec {
            kind: EnsembleKind::FloquetFixedM { m: 2, members: 5 },
            floquet: FloquetSpec::self_dual(6, Boundary::Periodic).unwrap(),
            seed: 1,
        };
        for ev in [Evolver::Exact, Evolver::Trotter] {
            let st = ensemble_series_stats(&ens, &heis, &f, ev).unwrap();
            for i in 0..st.times.len() {
                assert_eq!(st.var_total[i], st.var_re[i] + st.var_im[i]);
            }
            assert_eq!(st.evolver, ev);
        }
    }

    #[test]
    fn cycles_ensemble_size() {
        let ens = EnsembleSpec {
            kind: EnsembleKind::FloquetCycles { m_min: 2, m_max: 7 },
            floquet: FloquetSpec::self_dual(4, Boundary::Periodic).unwrap(),
            seed: 3,
        };
        assert_eq!(ens.states().unwrap().len(), 5);
    }
}
