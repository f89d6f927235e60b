//! Dense 2^n × 2^n reference constructions, independent of the statevector kernels.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use qscramble::statevector::{Gate, Pauli, PauliString, QuantumState};

pub type Mat = DMatrix<C64>;
pub type Vect = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn mat2(a: [[C64; 2]; 2]) -> Mat {
    Mat::from_fn(2, 2, |r, k| a[r][k])
}

pub fn pauli2(p: Pauli) -> Mat {
    let (o, l) = (c(0.0), c(1.0));
    match p {
        Pauli::I => mat2([[l, o], [o, l]]),
        Pauli::X => mat2([[o, l], [l, o]]),
        Pauli::Y => mat2([[o, -I], [I, o]]),
        Pauli::Z => mat2([[l, o], [o, -l]]),
    }
}

/// Places the 2^k × 2^k matrix `u` on `qubits` (qubits[0] is its least significant bit).
pub fn embed(n: usize, qubits: &[usize], u: &Mat) -> Mat {
    let dim = 1usize << n;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let sub = |x: usize| -> usize { qubits.iter().enumerate().map(|(j, &q)| ((x >> q) & 1) << j).sum() };
    Mat::from_fn(dim, dim, |r, k| if r & !mask == k & !mask { u[(sub(r), sub(k))] } else { c(0.0) })
}

pub fn pauli_string(n: usize, p: &PauliString) -> Mat {
    p.factors()
        .iter()
        .fold(Mat::identity(1 << n, 1 << n), |acc, &(q, l)| embed(n, &[q], &pauli2(l)) * acc)
}

/// e^{-iθA/2} for an involution A.
fn rot(theta: f64, a: &Mat) -> Mat {
    let id = Mat::identity(a.nrows(), a.ncols());
    id * c((theta / 2.0).cos()) - a * (I * (theta / 2.0).sin())
}

fn swap4() -> Mat {
    let mut s = Mat::zeros(4, 4);
    for (r, k) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(r, k)] = c(1.0);
    }
    s
}

pub fn gate_matrix(n: usize, g: &Gate) -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::Rx { qubit, theta } => embed(n, &[*qubit], &rot(*theta, &pauli2(Pauli::X))),
        Gate::Ry { qubit, theta } => embed(n, &[*qubit], &rot(*theta, &pauli2(Pauli::Y))),
        Gate::Rz { qubit, theta } => embed(n, &[*qubit], &rot(*theta, &pauli2(Pauli::Z))),
        Gate::H(q) => embed(n, &[*q], &mat2([[c(h), c(h)], [c(h), c(-h)]])),
        Gate::X(q) => embed(n, &[*q], &pauli2(Pauli::X)),
        Gate::Y(q) => embed(n, &[*q], &pauli2(Pauli::Y)),
        Gate::Z(q) => embed(n, &[*q], &pauli2(Pauli::Z)),
        Gate::Zz { q1, q2, theta } => {
            let zz = pauli2(Pauli::Z).kronecker(&pauli2(Pauli::Z));
            embed(n, &[*q1, *q2], &rot(*theta, &zz))
        }
        Gate::Cnot { control, target } => {
            // local basis: bit 0 = control, bit 1 = target
            let mut m = Mat::zeros(4, 4);
            for x in 0..4usize {
                let y = if x & 1 == 1 { x ^ 2 } else { x };
                m[(y, x)] = c(1.0);
            }
            embed(n, &[*control, *target], &m)
        }
        Gate::SwapRot { q1, q2, theta } => embed(n, &[*q1, *q2], &rot(2.0 * theta, &swap4())),
        Gate::Pauli(p) => pauli_string(n, p),
    }
}

/// |0><0|_c ⊗ 1 + |1><1|_c ⊗ U for an n-qubit U acting below the control.
pub fn controlled(n_total: usize, control: usize, u: &Mat) -> Mat {
    let dim = 1usize << n_total;
    let bit = 1usize << control;
    let strip = |x: usize| (x & (bit - 1)) | ((x >> 1) & !(bit - 1));
    Mat::from_fn(dim, dim, |r, k| {
        if (r & bit) != (k & bit) {
            c(0.0)
        } else if r & bit == 0 {
            if r == k {
                c(1.0)
            } else {
                c(0.0)
            }
        } else {
            u[(strip(r), strip(k))]
        }
    })
}

pub fn circuit(n: usize, gates: &[Gate]) -> Mat {
    gates.iter().fold(Mat::identity(1 << n, 1 << n), |acc, g| gate_matrix(n, g) * acc)
}

/// e^{-iHt} for Hermitian H.
pub fn expm_herm(h: &Mat, t: f64) -> Mat {
    let eig = h.clone().symmetric_eigen();
    let d = Mat::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l * t)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub fn eigenvalues(h: &Mat) -> Vec<f64> {
    h.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

pub fn bonds(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if periodic && n > 2 {
        b.push((n - 1, 0));
    }
    b
}

/// One kicked-Ising period from its two Hamiltonians:
/// e^{-i[(bzt/2)ΣZ - (jt/2)ΣZZ]} e^{-i(bxt/2)ΣX}.
pub fn floquet_unitary(n: usize, jt: f64, bxt: f64, bzt: f64, periodic: bool) -> Mat {
    let dim = 1usize << n;
    let mut hx = Mat::zeros(dim, dim);
    let mut hz = Mat::zeros(dim, dim);
    for q in 0..n {
        hx += embed(n, &[q], &pauli2(Pauli::X)) * c(bxt / 2.0);
        hz += embed(n, &[q], &pauli2(Pauli::Z)) * c(bzt / 2.0);
    }
    for (a, b) in bonds(n, periodic) {
        hz -= embed(n, &[a], &pauli2(Pauli::Z)) * embed(n, &[b], &pauli2(Pauli::Z)) * c(jt / 2.0);
    }
    expm_herm(&hz, 1.0) * expm_herm(&hx, 1.0)
}

/// 𝒥 Σ_bonds SWAP on the ring; N = 2 has the bond (0,1) twice.
pub fn heisenberg(n: usize, coupling: f64) -> Mat {
    let dim = 1usize << n;
    let mut h = Mat::zeros(dim, dim);
    let mut b = bonds(n, true);
    if n == 2 {
        b.push((1, 0));
    }
    for (p, q) in b {
        h += embed(n, &[p, q], &swap4()) * c(coupling);
    }
    h
}

pub fn to_vec(s: &QuantumState) -> Vect {
    Vect::from_column_slice(s.amplitudes())
}

pub fn max_diff(a: &Vect, b: &Vect) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff_mat(a: &Mat, b: &Mat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn matrix_power(u: &Mat, m: usize) -> Mat {
    (0..m).fold(Mat::identity(u.nrows(), u.ncols()), |acc, _| u * acc)
}
