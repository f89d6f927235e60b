//! In-place amplitude kernels. Every kernel takes a control mask: an amplitude
//! participates only when all bits of the mask are set. A zero mask means
//! "uncontrolled".

use num_complex::Complex64 as C64;

pub(crate) type Mat2 = [[C64; 2]; 2];

pub(crate) fn apply_mat2(amps: &mut [C64], target: usize, m: &Mat2, ctrl: usize) {
    let stride = 1usize << target;
    let [[m00, m01], [m10, m11]] = *m;
    for (k, chunk) in amps.chunks_exact_mut(2 * stride).enumerate() {
        let base = k * 2 * stride;
        let (lo, hi) = chunk.split_at_mut(stride);
        if ctrl == 0 {
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = m00 * x + m01 * y;
                *b = m10 * x + m11 * y;
            }
        } else {
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                if (base + j) & ctrl != ctrl {
                    continue;
                }
                let (x, y) = (*a, *b);
                *a = m00 * x + m01 * y;
                *b = m10 * x + m11 * y;
            }
        }
    }
}

/// Multiplies amplitude `i` by `p0` or `p1` depending on bit `target`.
pub(crate) fn apply_diag1(amps: &mut [C64], target: usize, p0: C64, p1: C64, ctrl: usize) {
    let bit = 1usize << target;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & ctrl != ctrl {
            continue;
        }
        *a *= if i & bit == 0 { p0 } else { p1 };
    }
}

/// Multiplies by `same` when bits q1 and q2 agree and by `diff` otherwise.
pub(crate) fn apply_parity_phase(
    amps: &mut [C64],
    q1: usize,
    q2: usize,
    same: C64,
    diff: C64,
    ctrl: usize,
) {
    for (i, a) in amps.iter_mut().enumerate() {
        if i & ctrl != ctrl {
            continue;
        }
        let parity = ((i >> q1) ^ (i >> q2)) & 1;
        *a *= if parity == 0 { same } else { diff };
    }
}

/// `cos θ I - i sin θ SWAP` on qubits (q1, q2).
pub(crate) fn apply_swap_rot(amps: &mut [C64], q1: usize, q2: usize, theta: f64, ctrl: usize) {
    let b1 = 1usize << q1;
    let b2 = 1usize << q2;
    let (s, c) = theta.sin_cos();
    let diag = C64::new(c, -s); // e^{-iθ}
    let cc = C64::new(c, 0.0);
    let ms = C64::new(0.0, -s);
    for i in 0..amps.len() {
        if i & (b1 | b2) != 0 || i & ctrl != ctrl {
            continue;
        }
        amps[i] *= diag;
        amps[i | b1 | b2] *= diag;
        let (i01, i10) = (i | b1, i | b2);
        let (x, y) = (amps[i01], amps[i10]);
        amps[i01] = cc * x + ms * y;
        amps[i10] = ms * x + cc * y;
    }
}

/// P|x> = i^{n_y} (-1)^{popcount(x & phase)} |x ^ flip>.
pub(crate) fn apply_pauli_masks(
    amps: &mut [C64],
    flip: usize,
    phase: usize,
    n_y: u32,
    ctrl: usize,
) {
    let global = match n_y % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let sign = |x: usize| {
        if (x & phase).count_ones().is_multiple_of(2) {
            global
        } else {
            -global
        }
    };
    if flip == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            if i & ctrl == ctrl {
                *a *= sign(i);
            }
        }
        return;
    }
    // The control qubit is never in the flip set, so x and x ^ flip share the
    // control predicate.
    for x in 0..amps.len() {
        let y = x ^ flip;
        if y < x || x & ctrl != ctrl {
            continue;
        }
        let (ax, ay) = (amps[x], amps[y]);
        amps[y] = sign(x) * ax;
        amps[x] = sign(y) * ay;
    }
}
