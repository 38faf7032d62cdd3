use crate::circuit::Circuit;
use crate::error::{Error, Result};

/// Number of gate folds for scale `lambda` on `num_gates` unitary gates.
pub fn fold_count(num_gates: usize, lambda: f64) -> Result<usize> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "scale factor {lambda} must be at least 1"
        )));
    }
    Ok((num_gates as f64 * (lambda - 1.0) / 2.0).round() as usize)
}

/// Local folding: the first `d = round(N_g (λ − 1) / 2)` unitary gates in
/// circuit order become `G G† G`. Beyond λ = 3 the count wraps around, so a
/// gate may be folded more than once. Measurements are copied unchanged.
///
/// Do not run the optimizer on the result; it cancels the folds.
pub fn fold_local(circuit: &Circuit, lambda: f64) -> Result<Circuit> {
    let ng = circuit.gates().iter().filter(|g| g.is_unitary()).count();
    let d = fold_count(ng, lambda)?;
    let mut out = Circuit::try_new(circuit.num_qubits(), circuit.num_clbits())?;
    out.metadata = circuit.metadata.clone();
    let mut i = 0;
    for g in circuit.gates() {
        out.push(g.clone())?;
        let Some(inv) = g.inverse() else {
            continue;
        };
        let folds = d.checked_div(ng).map_or(0, |q| q + usize::from(i < d % ng));
        for _ in 0..folds {
            out.push(inv.clone())?;
            out.push(g.clone())?;
        }
        i += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{Gate, GateKind};
    use crate::statevector::{circuit_unitary, simulate_statevector};
    use proptest::prelude::*;

    fn four() -> Circuit {
        let mut c = Circuit::new(2, 0);
        c.h(0).cx(0, 1).rz(0.3, 1).sx(0);
        c
    }

    #[test]
    fn unit_scale_is_identity() {
        assert_eq!(fold_local(&four(), 1.0).unwrap(), four());
    }

    #[test]
    fn triple_scale_folds_everything() {
        let f = fold_local(&four(), 3.0).unwrap();
        assert_eq!(f.len(), 12);
        let a = circuit_unitary(&four()).unwrap();
        let b = circuit_unitary(&f).unwrap();
        assert!((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn double_scale_folds_first_two() {
        let f = fold_local(&four(), 2.0).unwrap();
        assert_eq!(f.len(), 8);
        let names: Vec<&str> = f.gates().iter().map(|g| g.kind.name()).collect();
        assert_eq!(names, ["h", "h", "h", "cx", "cx", "cx", "rz", "sx"]);
    }

    #[test]
    fn measurements_are_not_folded() {
        let mut c = four();
        let mut m = Circuit::new(2, 2);
        m.extend_from(&c).unwrap();
        m.measure_all();
        c = m;
        let f = fold_local(&c, 3.0).unwrap();
        assert_eq!(f.len(), 14);
        assert_eq!(f.measurements(), vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn large_scale_wraps() {
        let f = fold_local(&four(), 5.0).unwrap();
        assert_eq!(f.len(), 4 + 2 * 8);
    }

    #[test]
    fn rejects_scale_below_one() {
        assert!(fold_local(&four(), 0.5).is_err());
        assert!(fold_local(&four(), f64::NAN).is_err());
    }

    fn arb_gate() -> impl Strategy<Value = Gate> {
        let t = -3.0..3.0f64;
        prop_oneof![
            (0..4usize).prop_map(|q| Gate::new(GateKind::SX, vec![q])),
            (0..4usize).prop_map(|q| Gate::new(GateKind::H, vec![q])),
            (t.clone(), 0..4usize).prop_map(|(a, q)| Gate::new(GateKind::RY(a), vec![q])),
            (t, 0..4usize, 1..4usize).prop_map(|(a, q, s)| Gate::new(GateKind::CP(a), vec![q, (q + s) % 4])),
            (0..4usize, 1..4usize).prop_map(|(q, s)| Gate::new(GateKind::CX, vec![q, (q + s) % 4])),
        ]
    }

    proptest! {
        #[test]
        fn folding_preserves_state(gates in prop::collection::vec(arb_gate(), 0..20), k in 0usize..5) {
            let lambda = [1.0, 1.5, 2.0, 2.5, 3.0][k];
            let mut c = Circuit::new(4, 0);
            for g in gates {
                c.push(g).unwrap();
            }
            let f = fold_local(&c, lambda).unwrap();
            let ng = c.len();
            prop_assert_eq!(f.len(), ng + 2 * fold_count(ng, lambda).unwrap());
            let a = simulate_statevector(&c, None).unwrap();
            let b = simulate_statevector(&f, None).unwrap();
            let d = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            prop_assert!(d < 1e-10);
        }
    }
}
