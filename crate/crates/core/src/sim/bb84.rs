use super::rng::SimRng;
use super::{werner_error_rate, SimError, SimulationResult, SimulationSpec};
use crate::fragment::ProtocolKind;

/// Prepare-and-measure BB84 over `spec.path`.
///
/// Per photon: Alice draws a bit and basis; Eve (with the adversary's
/// probability) measures in a random basis and resends; the photon survives
/// with the channel's effective transmittance; Bob measures in a random
/// basis. On repeater paths the distributed pair's Werner noise flips Bob's
/// bit with probability `2(1 - F_end)/3`. Every photon consumes the same
/// number of draws whatever happens to it, so a fraction-0 adversary and no
/// adversary give identical runs.
pub fn simulate_bb84(spec: &SimulationSpec) -> Result<SimulationResult, SimError> {
    spec.validate()?;
    let t = spec.path.effective_transmittance();
    let eve = spec.adversary.fraction();
    let flip = if spec.swap_count > 0 {
        werner_error_rate(spec.end_fidelity())
    } else {
        0.0
    };
    let mut rng = SimRng::new(spec.seed);
    let (mut detected, mut sifted, mut errors) = (0u64, 0u64, 0u64);

    for _ in 0..spec.photon_count {
        let a_bit = rng.bit();
        let a_basis = rng.bit();
        let intercept = rng.chance(eve);
        let e_basis = rng.bit();
        let e_guess = rng.bit();
        let survives = rng.chance(t);
        let b_basis = rng.bit();
        let b_guess = rng.bit();
        let noisy = rng.chance(flip);

        let (mut bit, mut basis) = (a_bit, a_basis);
        if intercept {
            let seen = if e_basis == basis { bit } else { e_guess };
            bit = seen;
            basis = e_basis;
        }
        if !survives {
            continue;
        }
        detected += 1;
        let mut b_bit = if b_basis == basis { bit } else { b_guess };
        if noisy {
            b_bit ^= 1;
        }
        if b_basis == a_basis {
            sifted += 1;
            if b_bit != a_bit {
                errors += 1;
            }
        }
    }

    let mut r = SimulationResult::from_counts(spec, t, detected, sifted, errors);
    r.protocol = ProtocolKind::Bb84;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{Adversary, ChannelModel};

    fn spec(n: u64, seed: u64) -> SimulationSpec {
        SimulationSpec::ideal(ProtocolKind::Bb84, n, seed)
    }

    #[test]
    fn noiseless_has_no_errors() {
        let r = simulate_bb84(&spec(20_000, 1)).unwrap();
        assert_eq!(r.detected, r.sent);
        assert_eq!(r.errors_in_sifted, 0);
        assert!((r.sifted_fraction - 0.5).abs() < 0.02);
        assert_eq!(r.secret_fraction, 1.0);
    }

    #[test]
    fn zero_fraction_adversary_is_no_adversary() {
        let a = simulate_bb84(&spec(5_000, 3)).unwrap();
        let mut s = spec(5_000, 3);
        s.adversary = Adversary::InterceptResend { fraction: 0.0 };
        assert_eq!(simulate_bb84(&s).unwrap(), a);
    }

    #[test]
    fn loss_reduces_detection() {
        let mut s = spec(20_000, 5);
        s.path = ChannelModel::fiber(50.0, 0.2);
        let r = simulate_bb84(&s).unwrap();
        assert!((r.detected as f64 / r.sent as f64 - 0.1).abs() < 0.01);
        assert!(r.sifted <= r.detected && r.detected <= r.sent);
    }

    #[test]
    fn empty_run_fails() {
        assert_eq!(
            simulate_bb84(&spec(0, 1)),
            Err(SimError::EmptyRun { path: None })
        );
    }
}
