//! Out-of-time-ordered correlators of kicked-Ising circuits.
//!
//! Pauli strings here use 0-based qubits on the chain register.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{arg_err, Error, Result};
use crate::floquet::{
    backward_cone, evolve, evolve_inverse, floquet_circuit, inverse_circuit, lightcone, FloquetSpec,
};
use crate::rng;
use crate::statevector::{sample_binary_mean, Gate, Pauli, PauliString, QuantumState};

/// Denominators with magnitude below this make a normalized OTOC unavailable.
pub const NORMALIZATION_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OtocPoint {
    pub butterfly_site: usize,
    pub cycles: usize,
    #[serde(serialize_with = "ser_c64")]
    pub value: C64,
    pub stderr_re: Option<f64>,
    pub stderr_im: Option<f64>,
}

fn ser_c64<S: serde::Serializer>(v: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&v.re)?;
    t.serialize_element(&v.im)?;
    t.end()
}

impl OtocPoint {
    pub fn exact(butterfly_site: usize, cycles: usize, value: C64) -> Self {
        Self { butterfly_site, cycles, value, stderr_re: None, stderr_im: None }
    }
}

fn check(spec: &FloquetSpec, ps: &[&PauliString], input: &QuantumState) -> Result<()> {
    spec.validate()?;
    if input.n_qubits() != spec.n_sites {
        return arg_err(format!(
            "input has {} qubits but the chain has {} sites",
            input.n_qubits(),
            spec.n_sites
        ));
    }
    for p in ps {
        if let Some(q) = p.max_qubit() {
            if q >= spec.n_sites {
                return arg_err(format!("Pauli string {p} leaves the chain"));
            }
        }
    }
    Ok(())
}

/// W|ψ> with W = (U†)^m O_D U^m.
fn apply_w(state: &mut QuantumState, spec: &FloquetSpec, m: usize, o_d: &PauliString) -> Result<()> {
    evolve(state, spec, m, false, 0)?;
    state.apply_pauli(o_d)?;
    evolve_inverse(state, spec, m, 0)
}

/// <in| W† O_A† W O_A |in> with W = U^{-m} O_D U^m.
///
/// When O_A|in> is proportional to |in> only one W application is needed.
pub fn otoc_exact(
    spec: &FloquetSpec,
    cycles: usize,
    o_a: &PauliString,
    o_d: &PauliString,
    input: &QuantumState,
) -> Result<C64> {
    check(spec, &[o_a, o_d], input)?;
    let mut oa_in = input.clone();
    oa_in.apply_pauli(o_a)?;
    let lambda = input.inner(&oa_in)?;
    let in_norm = input.norm_sqr();
    if (lambda.norm_sqr() - in_norm * in_norm).abs() < 1e-12 {
        let lambda = lambda / in_norm;
        let mut a = input.clone();
        apply_w(&mut a, spec, cycles, o_d)?;
        return Ok(lambda * a.pauli_matrix_element(o_a)?);
    }
    let mut x = oa_in;
    apply_w(&mut x, spec, cycles, o_d)?;
    let mut y = input.clone();
    apply_w(&mut y, spec, cycles, o_d)?;
    y.apply_pauli(o_a)?;
    y.inner(&x)
}

/// Ancilla readout <X> + i<Y> of the interferometric circuit, built gate by gate.
///
/// The ancilla is qubit N. Meant for small N: every gate is replayed explicitly.
pub fn interferometric_value(
    spec: &FloquetSpec,
    cycles: usize,
    o_a: &PauliString,
    o_d: &PauliString,
    input: &QuantumState,
) -> Result<C64> {
    check(spec, &[o_a, o_d], input)?;
    let n = spec.n_sites;
    let mut amps = input.amplitudes().to_vec();
    amps.extend(vec![C64::new(0.0, 0.0); amps.len()]);
    let mut s = QuantumState::from_amplitudes(amps)?;
    s.apply(&Gate::H(n))?;
    let u = floquet_circuit(spec, cycles, false, 0);
    s.apply_controlled(&Gate::Pauli(o_a.clone()), n)?;
    s.apply_all(&u)?;
    s.apply_pauli(o_d)?;
    s.apply_all(&inverse_circuit(&u))?;
    s.apply_controlled(&Gate::Pauli(o_a.clone()), n)?;
    let x = s.expectation(&PauliString::single(n, Pauli::X))?;
    let y = s.expectation(&PauliString::single(n, Pauli::Y))?;
    Ok(C64::new(x, y))
}

/// Hadamard-test emulation: exact ancilla statistics, binomially sampled per basis.
pub fn otoc_shots<R: Rng + ?Sized>(
    spec: &FloquetSpec,
    cycles: usize,
    o_a: &PauliString,
    o_d: &PauliString,
    input: &QuantumState,
    shots: u64,
    rng: &mut R,
) -> Result<OtocPoint> {
    let v = otoc_exact(spec, cycles, o_a, o_d, input)?;
    let mut p = sample_point(v, shots, rng)?;
    p.cycles = cycles;
    p.butterfly_site = o_d.max_qubit().map_or(0, |q| q + 1);
    Ok(p)
}

fn sample_point<R: Rng + ?Sized>(v: C64, shots: u64, rng: &mut R) -> Result<OtocPoint> {
    let prob = |x: f64| ((1.0 + x) / 2.0).clamp(0.0, 1.0);
    let re = sample_binary_mean(prob(v.re), shots, rng)?;
    let im = sample_binary_mean(prob(v.im), shots, rng)?;
    Ok(OtocPoint {
        butterfly_site: 0,
        cycles: 0,
        value: C64::new(re.mean, im.mean),
        stderr_re: Some(re.stderr),
        stderr_im: Some(im.stderr),
    })
}

/// Input states averaged over in [`operator_averaged`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Averaging {
    /// |0...0>.
    ZeroState,
    /// Uniform average over all computational basis inputs.
    MaximallyMixed,
}

fn all_paulis(sites: &[usize]) -> Vec<PauliString> {
    let mut out = vec![PauliString::identity()];
    for &q in sites {
        out = out
            .into_iter()
            .flat_map(|p| {
                Pauli::ALL.iter().map(move |&l| {
                    let mut f = p.factors().to_vec();
                    f.push((q, l));
                    PauliString::new(f).expect("distinct sites")
                })
            })
            .collect();
    }
    out
}

/// Largest chain for which [`Averaging::MaximallyMixed`] is accepted.
pub const MAX_MIXED_SITES: usize = 10;

/// Mean of the OTOC over every Pauli pair on `sites_a` × `sites_d` (0-based qubits).
pub fn operator_averaged(
    spec: &FloquetSpec,
    cycles: usize,
    sites_a: &[usize],
    sites_d: &[usize],
    averaging: Averaging,
) -> Result<f64> {
    spec.validate()?;
    let n = spec.n_sites;
    let inputs: Vec<usize> = match averaging {
        Averaging::ZeroState => vec![0],
        Averaging::MaximallyMixed => {
            if n > MAX_MIXED_SITES {
                return Err(Error::Capacity(format!(
                    "basis-state averaging limited to {MAX_MIXED_SITES} sites"
                )));
            }
            (0..1usize << n).collect()
        }
    };
    let pa = all_paulis(sites_a);
    let pd = all_paulis(sites_d);
    let mut total = 0.0;
    for &b in &inputs {
        let input = QuantumState::basis(n, b)?;
        for d in &pd {
            // W|in> and W O_A|in> share W, so evaluate W once per input column.
            let mut w_in = input.clone();
            apply_w(&mut w_in, spec, cycles, d)?;
            for a in &pa {
                let mut x = input.clone();
                x.apply_pauli(a)?;
                apply_w(&mut x, spec, cycles, d)?;
                let mut y = w_in.clone();
                y.apply_pauli(a)?;
                total += y.inner(&x)?.re;
            }
        }
    }
    Ok(total / (inputs.len() * pa.len() * pd.len()) as f64)
}

/// Divides a raw OTOC by its butterfly-free counterpart, propagating first-order errors.
pub fn normalized(raw: &OtocPoint, norm: &OtocPoint) -> Result<OtocPoint> {
    let b = norm.value;
    if b.norm() < NORMALIZATION_THRESHOLD {
        return Err(Error::Unnormalizable { denominator: b.norm() });
    }
    let r = if b.im == 0.0 {
        C64::new(raw.value.re / b.re, raw.value.im / b.re)
    } else {
        raw.value / b
    };
    // first-order propagation with independent real and imaginary parts
    let any = [raw.stderr_re, raw.stderr_im, norm.stderr_re, norm.stderr_im].iter().any(Option::is_some);
    let (c, d) = (b.inv(), -r / b);
    let s = |x: Option<f64>| x.unwrap_or(0.0).powi(2);
    let (sar, sai, sbr, sbi) = (s(raw.stderr_re), s(raw.stderr_im), s(norm.stderr_re), s(norm.stderr_im));
    let var_re = c.re * c.re * sar + c.im * c.im * sai + d.re * d.re * sbr + d.im * d.im * sbi;
    let var_im = c.im * c.im * sar + c.re * c.re * sai + d.im * d.im * sbr + d.re * d.re * sbi;
    let prop = |v: f64| any.then(|| v.sqrt());
    Ok(OtocPoint {
        butterfly_site: raw.butterfly_site,
        cycles: raw.cycles,
        value: r,
        stderr_re: prop(var_re),
        stderr_im: prop(var_im),
    })
}

/// One row of an (n, m) sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridRow {
    pub raw: OtocPoint,
    /// Normalized value, absent in exact mode or when the denominator vanishes.
    pub normalized: Option<OtocPoint>,
}

/// O_A = Z on site 1 and O_D = X on site n, input |0^N>, over every (n, m).
///
/// With `shots`, each point and its O_D = I normalization run are sampled from
/// streams derived from (seed, n, m).
pub fn otoc_grid(
    spec: &FloquetSpec,
    butterfly_sites: &[usize],
    cycles: &[usize],
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<GridRow>> {
    let n = spec.n_sites;
    for &s in butterfly_sites {
        if s == 0 || s > n {
            return arg_err(format!("butterfly site {s} outside 1..={n}"));
        }
    }
    let points: Vec<(usize, usize)> = butterfly_sites
        .iter()
        .flat_map(|&s| cycles.iter().map(move |&m| (s, m)))
        .collect();
    let o_a = PauliString::single(0, Pauli::Z);
    let input = QuantumState::zero(n)?;
    points
        .par_iter()
        .map(|&(site, m)| {
            let o_d = PauliString::single(site - 1, Pauli::X);
            let v = otoc_exact(spec, m, &o_a, &o_d, &input)?;
            let Some(shots) = shots else {
                return Ok(GridRow { raw: OtocPoint::exact(site, m, v), normalized: None });
            };
            let mut r = rng::derive(seed, &[site as u64, m as u64]);
            let mut raw = sample_point(v, shots, &mut r)?;
            raw.butterfly_site = site;
            raw.cycles = m;
            let v_norm = otoc_exact(spec, m, &o_a, &PauliString::identity(), &input)?;
            let mut norm = sample_point(v_norm, shots, &mut r)?;
            norm.butterfly_site = site;
            norm.cycles = m;
            Ok(GridRow { raw, normalized: normalized(&raw, &norm).ok() })
        })
        .collect()
}

/// True when the backward cone of site `n` through m cycles reaches site 1.
pub fn cone_reaches_first_site(spec: &FloquetSpec, cycles: usize, butterfly_site: usize) -> Result<bool> {
    Ok(lightcone(spec, cycles, &[butterfly_site])?.qubits.contains(&0))
}

/// Entangling-gate count of the interferometric circuit for O_A = Z1 and O_D on `butterfly_site`.
///
/// Two-qubit gates of U outside the backward cone of O_D cancel against their
/// mirrors in U†. The count is the backward cone of the ancilla through the
/// remaining circuit, including the final controlled-Z1 (the first one acts
/// trivially on |0...0> and is dropped).
pub fn interferometric_gate_count(spec: &FloquetSpec, cycles: usize, butterfly_site: usize) -> Result<usize> {
    let n = spec.n_sites;
    let cone = lightcone(spec, cycles, &[butterfly_site])?;
    let u = floquet_circuit(spec, cycles, false, 0);
    let keep: std::collections::HashSet<usize> = cone.gate_indices.iter().copied().collect();
    let reduced: Vec<Gate> = u
        .into_iter()
        .enumerate()
        .filter(|(i, g)| !g.is_two_qubit() || keep.contains(i))
        .map(|(_, g)| g)
        .collect();
    let mut circuit = reduced.clone();
    circuit.push(Gate::X(butterfly_site - 1));
    circuit.extend(inverse_circuit(&reduced));
    // stands in for the controlled-Z1; only its support matters here
    circuit.push(Gate::Cnot { control: n, target: 0 });
    Ok(backward_cone(&circuit, [n]).two_qubit_gates)
}

/// Same count with every gate of U and U† kept.
pub fn interferometric_gate_count_uncancelled(spec: &FloquetSpec, cycles: usize) -> Result<usize> {
    spec.validate()?;
    let n = spec.n_sites;
    let u = floquet_circuit(spec, cycles, false, 0);
    let mut gates = u.clone();
    gates.extend(inverse_circuit(&u));
    gates.push(Gate::Cnot { control: n, target: 0 });
    Ok(backward_cone(&gates, [n]).two_qubit_gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::Boundary;

    fn z1() -> PauliString {
        PauliString::single(0, Pauli::Z)
    }

    #[test]
    fn m0_values() {
        let spec = FloquetSpec::self_dual(4, Boundary::Open).unwrap();
        let zero = QuantumState::zero(4).unwrap();
        let x3 = PauliString::single(2, Pauli::X);
        let x1 = PauliString::single(0, Pauli::X);
        assert!((otoc_exact(&spec, 0, &z1(), &x3, &zero).unwrap() - 1.0).norm() < 1e-12);
        assert!((otoc_exact(&spec, 0, &z1(), &x1, &zero).unwrap() + 1.0).norm() < 1e-12);
    }

    #[test]
    fn fast_and_general_paths_agree() {
        let spec = FloquetSpec::self_dual(5, Boundary::Open).unwrap();
        let input = QuantumState::haar(5, &mut rng::seeded(2)).unwrap();
        let zero = QuantumState::zero(5).unwrap();
        let xd = PauliString::single(3, Pauli::X);
        for st in [&input, &zero] {
            let v = otoc_exact(&spec, 2, &z1(), &xd, st).unwrap();
            let w = interferometric_value(&spec, 2, &z1(), &xd, st).unwrap();
            assert!((v - w).norm() < 1e-10);
            assert!(v.norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn averaged_m0() {
        let spec = FloquetSpec::self_dual(3, Boundary::Open).unwrap();
        for mode in [Averaging::ZeroState, Averaging::MaximallyMixed] {
            let v = operator_averaged(&spec, 0, &[0], &[2], mode).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
            let v = operator_averaged(&spec, 0, &[1], &[1], mode).unwrap();
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization() {
        let p = |v: f64| OtocPoint::exact(1, 1, C64::new(v, 0.0));
        assert!((normalized(&p(0.8), &p(1.0)).unwrap().value.re - 0.8).abs() < 1e-15);
        let f2 = 0.37;
        assert!((normalized(&p(f2 * 0.6), &p(f2)).unwrap().value.re - 0.6).abs() < 1e-15);
        assert!(matches!(normalized(&p(0.5), &p(1e-9)), Err(Error::Unnormalizable { .. })));
    }

    #[test]
    fn interferometric_counts() {
        let spec = FloquetSpec::self_dual(19, Boundary::Open).unwrap();
        let counts: Vec<usize> = (1..=12)
            .map(|n| interferometric_gate_count(&spec, 15, n).unwrap())
            .collect();
        let max = *counts.iter().max().unwrap();
        assert_eq!(counts[9], max);
        assert_eq!(counts[10], max);
        assert_eq!(max, 397);
        assert_eq!(interferometric_gate_count_uncancelled(&spec, 15).unwrap(), 469);
    }

    #[test]
    fn certain_shots() {
        let spec = FloquetSpec::self_dual(4, Boundary::Open).unwrap();
        let zero = QuantumState::zero(4).unwrap();
        let x4 = PauliString::single(3, Pauli::X);
        let p = otoc_shots(&spec, 0, &z1(), &x4, &zero, 500, &mut rng::seeded(1)).unwrap();
        assert_eq!(p.value.re, 1.0);
        assert_eq!(p.stderr_re, Some(0.0));
    }
}
