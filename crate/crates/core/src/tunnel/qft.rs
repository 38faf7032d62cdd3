use std::f64::consts::PI;

use crate::circuit::Circuit;

/// QFT (or its inverse) on `n` qubits as H, CP and the final reversal SWAPs.
///
/// The forward transform maps `|j⟩ → Σ_k ω^{jk}|k⟩/√N` with `ω = e^{2πi/N}`.
pub fn build_qft(n: usize, inverse: bool) -> Circuit {
    assert!(n >= 1, "QFT needs at least one qubit");
    let mut c = Circuit::new(n, 0);
    for i in (0..n).rev() {
        c.h(i);
        for j in (0..i).rev() {
            c.cp(PI / (1u64 << (i - j)) as f64, j, i);
        }
    }
    for i in 0..n / 2 {
        c.swap(i, n - 1 - i);
    }
    let mut c = if inverse { c.inverse().expect("unitary") } else { c };
    c.metadata
        .insert("label".into(), if inverse { "IQFT" } else { "QFT" }.into());
    c
}
