use core::f64::consts::PI;

use super::rng::SimRng;
use super::{werner_parameter, SimError, SimulationResult, SimulationSpec};
use crate::fragment::ProtocolKind;

/// Alice's analyser angles (radians): 0, pi/8, pi/4.
pub const ALICE_ANGLES: [f64; 3] = [0.0, PI / 8.0, PI / 4.0];
/// Bob's analyser angles (radians): pi/8, pi/4, 3pi/8.
pub const BOB_ANGLES: [f64; 3] = [PI / 8.0, PI / 4.0, 3.0 * PI / 8.0];

/// Setting pairs that form key rounds (equal angles).
const KEY_PAIRS: [(usize, usize); 2] = [(1, 0), (2, 1)];

/// CHSH terms as (alice, bob, sign) with a = 0, a' = pi/4, b = pi/8,
/// b' = 3pi/8. For the singlet every term contributes +sqrt(2)/2, so the
/// ideal value is +2 sqrt(2).
const CHSH_TERMS: [(usize, usize, f64); 4] =
    [(0, 0, -1.0), (0, 2, 1.0), (2, 0, -1.0), (2, 2, -1.0)];

/// Entanglement-based E91 with a Werner source.
///
/// Each round the pair is a singlet with probability `w` (the end-to-end
/// Werner parameter) and maximally mixed otherwise, so `E(a, b) = -w cos
/// 2(a - b)`. Both analysers pick one of three angles; equal angles form
/// the key (Bob inverts his bit), the four CHSH pairs estimate `S`. The run
/// is flagged `aborted` and keeps no key when `S <= 2`. An intercept-resend
/// adversary measures Bob's photon in the Z or X basis (0 or pi/4) and
/// resends the result, breaking the entanglement.
pub fn simulate_e91(spec: &SimulationSpec) -> Result<SimulationResult, SimError> {
    spec.validate()?;
    let t = spec.path.effective_transmittance();
    let w = werner_parameter(spec.end_fidelity());
    let eve = spec.adversary.fraction();
    let mut rng = SimRng::new(spec.seed);

    let (mut detected, mut sifted, mut errors) = (0u64, 0u64, 0u64);
    // Per CHSH term: number of rounds and sum of outcome products.
    let mut n = [0u64; 4];
    let mut sum = [0i64; 4];

    for _ in 0..spec.photon_count {
        let ia = rng.index(3);
        let ib = rng.index(3);
        let survives = rng.chance(t);
        let intact = rng.chance(w);
        let intercept = rng.chance(eve);
        let e_angle = if rng.bit() == 0 { 0.0 } else { PI / 4.0 };
        let r0 = rng.bit();
        let u1 = rng.unit();
        let u2 = rng.unit();
        if !survives {
            continue;
        }
        detected += 1;

        let (a, b) = (ALICE_ANGLES[ia], BOB_ANGLES[ib]);
        let (x, y) = if intercept {
            // Eve's outcome r0 at e_angle collapses Alice's photon to the
            // orthogonal state; Bob receives a fresh photon in Eve's state.
            let cos2 = |d: f64| {
                let c = libm::cos(d);
                c * c
            };
            let x = if u1 < cos2(a - e_angle) { r0 ^ 1 } else { r0 };
            let y = if u2 < cos2(b - e_angle) { r0 } else { r0 ^ 1 };
            (x, y)
        } else if intact {
            let s = libm::sin(a - b);
            let same = u1 < s * s;
            (r0, if same { r0 } else { r0 ^ 1 })
        } else {
            (r0, (u1 < 0.5) as u8)
        };

        if KEY_PAIRS.contains(&(ia, ib)) {
            sifted += 1;
            if x != (y ^ 1) {
                errors += 1;
            }
        } else if let Some(k) = CHSH_TERMS.iter().position(|&(i, j, _)| (i, j) == (ia, ib)) {
            n[k] += 1;
            sum[k] += if x == y { 1 } else { -1 };
        }
    }

    let chsh = if n.iter().all(|&c| c > 0) {
        Some(
            CHSH_TERMS
                .iter()
                .zip(n.iter().zip(sum.iter()))
                .map(|(&(_, _, sign), (&c, &s))| sign * s as f64 / c as f64)
                .sum::<f64>(),
        )
    } else {
        None
    };

    let mut r = SimulationResult::from_counts(spec, t, detected, sifted, errors);
    r.protocol = ProtocolKind::E91;
    r.chsh_s = chsh;
    r.aborted = chsh.is_none_or(|s| s <= 2.0);
    if r.aborted {
        r.secret_fraction = 0.0;
    }
    Ok(r)
}

/// Analytic singlet correlation `-w cos 2(a - b)` used as a test oracle.
pub fn werner_correlation(w: f64, a: f64, b: f64) -> f64 {
    -w * libm::cos(2.0 * (a - b))
}
