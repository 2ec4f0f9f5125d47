//! Independent references for the protocol and repeater physics.

#![allow(clippy::needless_range_loop, dead_code)]

// ---- density-matrix model of entanglement swapping ----

pub type M4 = [[f64; 4]; 4];
pub const INV_SQRT2: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Bell states on two qubits, indexed by `2 * q0 + q1`.
pub const BELL: [[f64; 4]; 4] = [
    [INV_SQRT2, 0.0, 0.0, INV_SQRT2],  // phi+
    [INV_SQRT2, 0.0, 0.0, -INV_SQRT2], // phi-
    [0.0, INV_SQRT2, INV_SQRT2, 0.0],  // psi+
    [0.0, INV_SQRT2, -INV_SQRT2, 0.0], // psi-
];

/// Real single-qubit corrections applied to the far qubit per outcome.
pub const FIX: [[[f64; 2]; 2]; 4] = [
    [[1.0, 0.0], [0.0, 1.0]],  // I
    [[1.0, 0.0], [0.0, -1.0]], // Z
    [[0.0, 1.0], [1.0, 0.0]],  // X
    [[0.0, -1.0], [1.0, 0.0]], // XZ
];

pub fn werner(f: f64) -> M4 {
    let w = (4.0 * f - 1.0) / 3.0;
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = w * BELL[0][i] * BELL[0][j] + if i == j { (1.0 - w) / 4.0 } else { 0.0 };
        }
    }
    m
}

/// Bell measurement on the inner qubits of `left (A,B) x right (C,D)`,
/// corrected and averaged over outcomes; returns the state of (A,D).
pub fn swap(left: &M4, right: &M4) -> M4 {
    let rho =
        |a: usize, b: usize, c: usize, d: usize, a2: usize, b2: usize, c2: usize, d2: usize| {
            left[2 * a + b][2 * a2 + b2] * right[2 * c + d][2 * c2 + d2]
        };
    let mut out = [[0.0; 4]; 4];
    for k in 0..4 {
        for (a, d, a2, d2) in itertools4() {
            let mut s = 0.0;
            for b in 0..2 {
                for c in 0..2 {
                    for b2 in 0..2 {
                        for c2 in 0..2 {
                            let proj = BELL[k][2 * b + c] * BELL[k][2 * b2 + c2];
                            if proj == 0.0 {
                                continue;
                            }
                            for x in 0..2 {
                                for y in 0..2 {
                                    s += proj
                                        * FIX[k][d][x]
                                        * FIX[k][d2][y]
                                        * rho(a, b, c, x, a2, b2, c2, y);
                                }
                            }
                        }
                    }
                }
            }
            out[2 * a + d][2 * a2 + d2] += s;
        }
    }
    out
}

fn itertools4() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|i| (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1))
}

pub fn bell_fidelity(m: &M4) -> f64 {
    let mut f = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            f += BELL[0][i] * m[i][j] * BELL[0][j];
        }
    }
    f
}

pub fn oracle_chain(f: f64, swaps: u32) -> f64 {
    let link = werner(f);
    let mut state = link;
    for _ in 0..swaps {
        state = swap(&state, &link);
    }
    bell_fidelity(&state)
}

// ---- BB84 by exhaustive enumeration ----

/// Sifted fraction and QBER over all equally likely basis/bit choices,
/// with or without a full intercept-resend attacker.
pub fn bb84_oracle(eve: bool) -> (f64, f64) {
    let (mut sift, mut err) = (0.0, 0.0);
    let mut total = 0.0;
    for ab in 0..2 {
        for bit in 0..2 {
            for bb in 0..2 {
                for eb in 0..if eve { 2 } else { 1 } {
                    total += 1.0;
                    if ab != bb {
                        continue;
                    }
                    sift += 1.0;
                    let _ = bit;
                    // Eve in the wrong basis randomises Bob's matched outcome.
                    if eve && eb != ab {
                        err += 0.5;
                    }
                }
            }
        }
    }
    (sift / total, err / sift)
}

// ---- MDI by exhaustive enumeration ----

fn bb84_state(bit: usize, basis: usize) -> [f64; 2] {
    match (basis, bit) {
        (0, 0) => [1.0, 0.0],
        (0, _) => [0.0, 1.0],
        (_, 0) => [INV_SQRT2, INV_SQRT2],
        _ => [INV_SQRT2, -INV_SQRT2],
    }
}

/// Fraction of rounds kept after sifting at unit transmittance: matching
/// bases and a psi+/psi- announcement from a linear-optics Bell analyser.
pub fn mdi_oracle() -> f64 {
    let mut kept = 0.0;
    for (ba, bb, xa, xb) in itertools4() {
        if ba != bb {
            continue;
        }
        let (a, b) = (bb84_state(xa, ba), bb84_state(xb, bb));
        let pair = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        for k in [2, 3] {
            let amp: f64 = (0..4).map(|i| BELL[k][i] * pair[i]).sum();
            kept += amp * amp / 16.0;
        }
    }
    kept
}

// ---- CHSH on the singlet ----

fn analyser(theta: f64) -> [[f64; 2]; 2] {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    [[c, s], [s, -c]]
}

/// `<psi-| A(a) ⊗ B(b) |psi->` by explicit matrix products.
pub fn singlet_correlation(a: f64, b: f64) -> f64 {
    let (ma, mb) = (analyser(a), analyser(b));
    let psi = BELL[3];
    let mut e = 0.0;
    for (i, j, k, l) in itertools4() {
        e += psi[2 * i + j] * ma[i][k] * mb[j][l] * psi[2 * k + l];
    }
    e
}

/// |S| for Alice {0, pi/4} and Bob {pi/8, 3pi/8}.
pub fn chsh_oracle() -> f64 {
    use core::f64::consts::PI;
    let (a1, a2, b1, b2) = (0.0, PI / 4.0, PI / 8.0, 3.0 * PI / 8.0);
    let e = singlet_correlation;
    (e(a1, b1) - e(a1, b2) + e(a2, b1) + e(a2, b2)).abs()
}
