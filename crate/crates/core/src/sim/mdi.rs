use super::rng::SimRng;
use super::{transmittance_db, werner_error_rate, SimError, SimulationResult, SimulationSpec};
use crate::fragment::ProtocolKind;

/// Amplitudes of the BB84 state (bit, basis): Z gives |0>,|1>, X gives |+>,|->.
fn amplitudes(bit: u8, basis: u8) -> (f64, f64) {
    let r = core::f64::consts::FRAC_1_SQRT_2;
    match (basis, bit) {
        (0, 0) => (1.0, 0.0),
        (0, _) => (0.0, 1.0),
        (_, 0) => (r, r),
        _ => (r, -r),
    }
}

/// Probabilities that a linear-optics Bell measurement on `a ⊗ b` reports
/// psi+ and psi- respectively. For any pair of BB84 states they sum to 1/2.
pub(crate) fn bsm_probabilities(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let plus = a.0 * b.1 + a.1 * b.0;
    let minus = a.0 * b.1 - a.1 * b.0;
    (plus * plus / 2.0, minus * minus / 2.0)
}

/// Survival probabilities of Alice's and Bob's arms towards the relay. A
/// two-segment channel gives one segment per arm; otherwise the total loss
/// is split evenly.
fn arm_transmittances(spec: &SimulationSpec) -> (f64, f64) {
    let p = &spec.path;
    if p.segments.len() == 2 {
        (
            transmittance_db(p.segment_loss_db(&p.segments[0])),
            transmittance_db(p.segment_loss_db(&p.segments[1])),
        )
    } else {
        let half = transmittance_db(p.total_loss_db() / 2.0);
        (half, half)
    }
}

/// Measurement-device-independent QKD through an untrusted Bell-state relay.
///
/// Alice and Bob each send a random BB84 state; both must survive their arm.
/// The relay projects onto psi+ / psi- with the exact linear-optics
/// probabilities, so it succeeds half the time. Announced rounds with
/// matched bases are kept; Bob flips his bit for every Z-basis success and
/// for psi- in the X basis.
pub fn simulate_mdi(spec: &SimulationSpec) -> Result<SimulationResult, SimError> {
    spec.validate()?;
    let (ta, tb) = arm_transmittances(spec);
    let eve = spec.adversary.fraction();
    let flip = if spec.swap_count > 0 {
        werner_error_rate(spec.end_fidelity())
    } else {
        0.0
    };
    let mut rng = SimRng::new(spec.seed);
    let (mut detected, mut sifted, mut errors) = (0u64, 0u64, 0u64);

    for _ in 0..spec.photon_count {
        let a = (rng.bit(), rng.bit());
        let b = (rng.bit(), rng.bit());
        // Eve on each arm: intercept?, basis, guess for a mismatched basis.
        let ea = (rng.chance(eve), rng.bit(), rng.bit());
        let eb = (rng.chance(eve), rng.bit(), rng.bit());
        let survives_a = rng.chance(ta);
        let survives_b = rng.chance(tb);
        let u_bsm = rng.unit();
        let noisy = rng.chance(flip);

        let resend = |(bit, basis): (u8, u8), (hit, e_basis, guess): (bool, u8, u8)| {
            if !hit {
                (bit, basis)
            } else if e_basis == basis {
                (bit, e_basis)
            } else {
                (guess, e_basis)
            }
        };
        let sa = resend(a, ea);
        let sb = resend(b, eb);
        if !(survives_a && survives_b) {
            continue;
        }
        let (p_plus, p_minus) = bsm_probabilities(amplitudes(sa.0, sa.1), amplitudes(sb.0, sb.1));
        let outcome_minus = if u_bsm < p_plus {
            false
        } else if u_bsm < p_plus + p_minus {
            true
        } else {
            continue;
        };
        detected += 1;
        if a.1 != b.1 {
            continue;
        }
        sifted += 1;
        let mut b_bit = b.0;
        if a.1 == 0 || outcome_minus {
            b_bit ^= 1;
        }
        if noisy {
            b_bit ^= 1;
        }
        if b_bit != a.0 {
            errors += 1;
        }
    }

    let mut r = SimulationResult::from_counts(spec, ta * tb, detected, sifted, errors);
    r.protocol = ProtocolKind::Mdi;
    Ok(r)
}
