use num_complex::Complex64;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::statevector::StateVector;
use crate::synth::prepare_amplitudes;

use super::{Discretization, WavepacketSpec};

/// Grid amplitudes of the initial wavefunction, normalized.
///
/// The Gaussian uses the minimal periodic image of `x - μ`, so tails wrap
/// around the box; its phase is `e^{ip(μ + d)}`, which is `e^{ipx}` wherever
/// no wrap occurs.
pub fn prepare_initial_state(spec: &WavepacketSpec, disc: &Discretization) -> Result<StateVector> {
    disc.validate()?;
    let dim = disc.sites();
    match *spec {
        WavepacketSpec::Basis { k } => {
            if k >= dim {
                return Err(Error::InvalidArgument(format!(
                    "basis index {k} out of range for {dim} sites"
                )));
            }
            Ok(StateVector::basis(disc.n, k))
        }
        WavepacketSpec::Gaussian { mu, sigma, p } => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::InvalidArgument(format!("sigma {sigma} must be positive")));
            }
            if !(mu.is_finite() && p.is_finite()) {
                return Err(Error::InvalidArgument("mu and p must be finite".into()));
            }
            let l = disc.length;
            let amps: Vec<Complex64> = (0..dim)
                .map(|k| {
                    let d = (disc.position(k) - mu + 0.5 * l).rem_euclid(l) - 0.5 * l;
                    Complex64::from_polar((-0.5 * (d / sigma).powi(2)).exp(), p * (mu + d))
                })
                .collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "Gaussian with sigma {sigma} underflows on a grid of spacing {}",
                    disc.dx()
                )));
            }
            StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
        }
    }
}

/// Circuit preparing the initial state from `|0…0⟩` on `n` qubits.
pub fn initial_state_circuit(spec: &WavepacketSpec, disc: &Discretization) -> Result<Circuit> {
    let mut c = match *spec {
        WavepacketSpec::Basis { k } => {
            prepare_initial_state(spec, disc)?;
            let mut c = Circuit::new(disc.n, 0);
            for q in (0..disc.n).filter(|q| k >> q & 1 == 1) {
                c.x(q);
            }
            c
        }
        WavepacketSpec::Gaussian { .. } => {
            let psi = prepare_initial_state(spec, disc)?;
            prepare_amplitudes(psi.amplitudes())?
        }
    };
    c.metadata.insert("label".into(), "state_prep".into());
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::simulate_statevector;

    #[test]
    fn basis_eight() {
        let disc = Discretization::new(4, 16.0).unwrap();
        let s = prepare_initial_state(&WavepacketSpec::Basis { k: 8 }, &disc).unwrap();
        assert_eq!(s.amplitudes()[8], Complex64::new(1.0, 0.0));
        let c = initial_state_circuit(&WavepacketSpec::Basis { k: 8 }, &disc).unwrap();
        assert_eq!(simulate_statevector(&c, None).unwrap(), s);
        assert!(prepare_initial_state(&WavepacketSpec::Basis { k: 16 }, &disc).is_err());
    }

    #[test]
    fn centered_gaussian_is_symmetric() {
        let disc = Discretization::new(5, 32.0).unwrap();
        let s = prepare_initial_state(
            &WavepacketSpec::Gaussian {
                mu: 16.0,
                sigma: 2.5,
                p: 0.0,
            },
            &disc,
        )
        .unwrap();
        let a = s.amplitudes();
        for d in 1..16 {
            assert!((a[16 + d] - a[16 - d]).norm() < 1e-10);
        }
    }

    #[test]
    fn narrow_packet_matches_direct_formula() {
        let disc = Discretization::new(6, 0.512).unwrap().with_origin(-2.506);
        let (mu, sigma, p) = (-2.25, 0.032, 300.0);
        let s = prepare_initial_state(&WavepacketSpec::Gaussian { mu, sigma, p }, &disc).unwrap();
        let raw: Vec<Complex64> = (0..64)
            .map(|k| {
                let x = -2.506 + k as f64 * 0.008;
                Complex64::from_polar((-0.5 * ((x - mu) / sigma).powi(2)).exp(), p * x)
            })
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for (a, b) in s.amplitudes().iter().zip(&raw) {
            assert!((a - b / norm).norm() < 1e-12);
        }
        let c = initial_state_circuit(&WavepacketSpec::Gaussian { mu, sigma, p }, &disc).unwrap();
        let out = simulate_statevector(&c, None).unwrap();
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn tiny_sigma_underflows() {
        let disc = Discretization::new(3, 8.0).unwrap();
        let r = prepare_initial_state(
            &WavepacketSpec::Gaussian {
                mu: 0.5,
                sigma: 1e-3,
                p: 0.0,
            },
            &disc,
        );
        assert!(r.is_err());
    }
}
