//! Two-copy Hayden-Preskill recovery circuit.
//!
//! Register order is (R, copy-1 sites, copy-2 sites, R'). A occupies sites
//! 1..=n_a and D occupies the last n_d sites of each copy.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::floquet::{evolve, FloquetSpec};
use crate::statevector::{BellPairing, QuantumState, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HprLayout {
    pub n_sites: usize,
    pub n_a: usize,
    pub n_d: usize,
}

impl HprLayout {
    pub fn new(n_sites: usize, n_a: usize, n_d: usize) -> Result<Self> {
        if n_a == 0 || n_d == 0 {
            return arg_err("A and D must each contain at least one site");
        }
        if n_a > n_sites || n_d > n_sites {
            return arg_err(format!(
                "n_a={n_a} and n_d={n_d} must not exceed the chain length {n_sites}"
            ));
        }
        let layout = Self { n_sites, n_a, n_d };
        if layout.total_qubits() > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "HPR register needs {} qubits (max {MAX_QUBITS})",
                layout.total_qubits()
            )));
        }
        Ok(layout)
    }

    pub fn n_b(&self) -> usize {
        self.n_sites - self.n_a
    }

    pub fn d_a(&self) -> f64 {
        (1u64 << self.n_a) as f64
    }

    pub fn d_d(&self) -> f64 {
        (1u64 << self.n_d) as f64
    }

    pub fn total_qubits(&self) -> usize {
        2 * (self.n_sites + self.n_a)
    }

    pub fn copy1_offset(&self) -> usize {
        self.n_a
    }

    pub fn copy2_offset(&self) -> usize {
        self.n_a + self.n_sites
    }

    fn r(&self, k: usize) -> usize {
        k
    }

    fn r_prime(&self, k: usize) -> usize {
        self.n_a + 2 * self.n_sites + k
    }

    fn copy1(&self, site: usize) -> usize {
        self.copy1_offset() + site - 1
    }

    fn copy2(&self, site: usize) -> usize {
        self.copy2_offset() + site - 1
    }

    /// R↔A, B↔B', R'↔A' wiring of the input state.
    pub fn input_pairing(&self) -> BellPairing {
        let mut pairs: Vec<(usize, usize)> = (0..self.n_a).map(|k| (self.r(k), self.copy1(k + 1))).collect();
        pairs.extend((self.n_a + 1..=self.n_sites).map(|s| (self.copy1(s), self.copy2(s))));
        pairs.extend((0..self.n_a).map(|k| (self.r_prime(k), self.copy2(k + 1))));
        BellPairing::new(pairs).expect("layout pairs are disjoint")
    }

    /// D↔D' projection.
    pub fn dd_pairing(&self) -> BellPairing {
        let first = self.n_sites - self.n_d + 1;
        BellPairing::new((first..=self.n_sites).map(|s| (self.copy1(s), self.copy2(s))).collect())
            .expect("layout pairs are disjoint")
    }

    /// R↔R' projection.
    pub fn rr_pairing(&self) -> BellPairing {
        BellPairing::new((0..self.n_a).map(|k| (self.r(k), self.r_prime(k))).collect())
            .expect("layout pairs are disjoint")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HprResult {
    pub cycles: usize,
    pub p_epr: f64,
    /// Missing when no post-selected event (or probability mass) is available.
    pub f_epr: Option<f64>,
    pub p_stderr: Option<f64>,
    pub f_stderr: Option<f64>,
    pub shots: Option<u64>,
    pub degenerate: bool,
}

/// Bell-paired input with U applied to copy 1 and U* (or U, when
/// `conjugate_second` is false) applied to copy 2.
pub fn prepare_state(
    spec: &FloquetSpec,
    layout: &HprLayout,
    cycles: usize,
    conjugate_second: bool,
) -> Result<QuantumState> {
    check(spec, layout)?;
    let mut s = QuantumState::zero(layout.total_qubits())?;
    s.prepare_bell_pairs(&layout.input_pairing())?;
    evolve(&mut s, spec, cycles, false, layout.copy1_offset())?;
    evolve(&mut s, spec, cycles, conjugate_second, layout.copy2_offset())?;
    Ok(s)
}

fn check(spec: &FloquetSpec, layout: &HprLayout) -> Result<()> {
    spec.validate()?;
    if spec.n_sites != layout.n_sites {
        return arg_err(format!(
            "Floquet chain has {} sites but layout expects {}",
            spec.n_sites, layout.n_sites
        ));
    }
    Ok(())
}

/// P_EPR and F_EPR of an already evolved two-copy state.
pub fn measure(mut state: QuantumState, layout: &HprLayout, cycles: usize) -> Result<HprResult> {
    let p = state.project_bell_pairs(&layout.dd_pairing())?;
    let mut out = HprResult {
        cycles,
        p_epr: p.probability,
        f_epr: None,
        p_stderr: None,
        f_stderr: None,
        shots: None,
        degenerate: p.degenerate,
    };
    if !p.degenerate {
        let f = state.project_bell_pairs(&layout.rr_pairing())?;
        out.f_epr = Some(f.probability);
    }
    Ok(out)
}

pub fn run_exact(spec: &FloquetSpec, layout: &HprLayout, cycles: usize) -> Result<HprResult> {
    measure(prepare_state(spec, layout, cycles, true)?, layout, cycles)
}

/// Same as [`run_exact`] with the choice of copy-2 evolution exposed.
pub fn run_exact_copies(
    spec: &FloquetSpec,
    layout: &HprLayout,
    cycles: usize,
    conjugate_second: bool,
) -> Result<HprResult> {
    measure(prepare_state(spec, layout, cycles, conjugate_second)?, layout, cycles)
}

/// Exact results for every m in `cycles`, evolving incrementally.
pub fn run_exact_sweep(spec: &FloquetSpec, layout: &HprLayout, cycles: &[usize]) -> Result<Vec<HprResult>> {
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.sort_by_key(|&i| cycles[i]);
    let mut state = prepare_state(spec, layout, 0, true)?;
    let mut at = 0;
    let mut out = vec![None; cycles.len()];
    for i in order {
        let m = cycles[i];
        evolve(&mut state, spec, m - at, false, layout.copy1_offset())?;
        evolve(&mut state, spec, m - at, true, layout.copy2_offset())?;
        at = m;
        out[i] = Some(measure(state.clone(), layout, m)?);
    }
    Ok(out.into_iter().map(|r| r.expect("every index visited")).collect())
}

/// Haar-random values (P, F) for dimensions d_A and d_D.
pub fn haar_baseline(d_a: u64, d_d: u64) -> Result<(f64, f64)> {
    for (name, d) in [("d_a", d_a), ("d_d", d_d)] {
        if d < 2 || !d.is_power_of_two() {
            return arg_err(format!("{name}={d} is not a power of two >= 2"));
        }
    }
    let (a, d) = (d_a as f64, d_d as f64);
    let p = 1.0 / (a * a) + 1.0 / (d * d) - 1.0 / (a * a * d * d);
    Ok((p, 1.0 / (a * a * p)))
}

/// Emulates `shots` runs: DD' succeeds with probability P, then RR' with probability F.
pub fn run_sampled<R: Rng + ?Sized>(
    spec: &FloquetSpec,
    layout: &HprLayout,
    cycles: usize,
    shots: u64,
    rng: &mut R,
) -> Result<HprResult> {
    let exact = run_exact(spec, layout, cycles)?;
    sample_from_exact(&exact, shots, rng)
}

/// Binomial resampling of exact probabilities.
pub fn sample_from_exact<R: Rng + ?Sized>(exact: &HprResult, shots: u64, rng: &mut R) -> Result<HprResult> {
    if shots == 0 {
        return arg_err("shot count must be positive");
    }
    let binom = |n: u64, p: f64, rng: &mut R| -> Result<u64> {
        Ok(Binomial::new(n, p.clamp(0.0, 1.0))
            .map_err(|e| Error::Argument(e.to_string()))?
            .sample(rng))
    };
    let k_p = binom(shots, exact.p_epr, rng)?;
    let p_hat = k_p as f64 / shots as f64;
    let (f_hat, f_se) = match (k_p, exact.f_epr) {
        (0, _) | (_, None) => (None, None),
        (k, Some(f)) => {
            let k_f = binom(k, f, rng)?;
            let fh = k_f as f64 / k as f64;
            (Some(fh), Some((fh * (1.0 - fh) / k as f64).sqrt()))
        }
    };
    Ok(HprResult {
        cycles: exact.cycles,
        p_epr: p_hat,
        f_epr: f_hat,
        p_stderr: Some((p_hat * (1.0 - p_hat) / shots as f64).sqrt()),
        f_stderr: f_se,
        shots: Some(shots),
        degenerate: k_p == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::Boundary;

    #[test]
    fn baseline_values() {
        let (p, f) = haar_baseline(2, 4).unwrap();
        assert!((p - 0.296875).abs() < 1e-15);
        assert!((f - 16.0 / 19.0).abs() < 1e-15);
        let (p, f) = haar_baseline(2, 2).unwrap();
        assert!((p - 7.0 / 16.0).abs() < 1e-15 && (f - 4.0 / 7.0).abs() < 1e-15);
        assert!(haar_baseline(3, 4).is_err());
    }

    #[test]
    fn identity_at_m0_and_later() {
        let spec = FloquetSpec::self_dual(4, Boundary::Open).unwrap();
        let layout = HprLayout::new(4, 1, 2).unwrap();
        for r in run_exact_sweep(&spec, &layout, &[3, 0, 1]).unwrap() {
            let v = layout.d_a().powi(2) * r.p_epr * r.f_epr.unwrap();
            assert!((v - 1.0).abs() < 1e-9, "m={} v={v}", r.cycles);
        }
    }

    #[test]
    fn sweep_matches_single_runs() {
        let spec = FloquetSpec::self_dual(3, Boundary::Open).unwrap();
        let layout = HprLayout::new(3, 1, 1).unwrap();
        let sweep = run_exact_sweep(&spec, &layout, &[2, 5]).unwrap();
        let single = run_exact(&spec, &layout, 5).unwrap();
        assert!((sweep[1].p_epr - single.p_epr).abs() < 1e-12);
    }

    #[test]
    fn single_shot_is_binary() {
        let spec = FloquetSpec::self_dual(3, Boundary::Open).unwrap();
        let layout = HprLayout::new(3, 1, 1).unwrap();
        let r = run_sampled(&spec, &layout, 2, 1, &mut crate::rng::seeded(4)).unwrap();
        assert!(r.p_epr == 0.0 || r.p_epr == 1.0);
    }

    #[test]
    fn zero_probability_leaves_f_unavailable() {
        let exact = HprResult {
            cycles: 0,
            p_epr: 0.0,
            f_epr: None,
            p_stderr: None,
            f_stderr: None,
            shots: None,
            degenerate: true,
        };
        let r = sample_from_exact(&exact, 100, &mut crate::rng::seeded(1)).unwrap();
        assert_eq!(r.f_epr, None);
    }

    #[test]
    fn oversized_layout_is_capacity_error() {
        assert!(matches!(HprLayout::new(12, 2, 2), Err(Error::Capacity(_))));
    }
}
