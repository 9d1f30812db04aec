//! Symbolic Pauli propagation, stabilizer-flow checking and computational-basis
//! simulation of circuits.

use crate::circuit::{Circuit, Instruction};
use crate::error::CircuitError;
use crate::gf2::BitVector;
use crate::pauli::PauliString;

/// Returns `U p U†` for a unitary instruction (`H` or `CX`).
pub fn conjugate(p: &PauliString, inst: &Instruction) -> Result<PauliString, CircuitError> {
    let mut out = p.clone();
    conjugate_in_place(&mut out, inst)?;
    Ok(out)
}

fn conjugate_in_place(p: &mut PauliString, inst: &Instruction) -> Result<(), CircuitError> {
    match inst {
        Instruction::H(targets) => {
            for &q in targets {
                p.swap_xz(q);
            }
            Ok(())
        }
        Instruction::Cx(pairs) => {
            for &(c, t) in pairs {
                p.apply_cx(c, t);
            }
            Ok(())
        }
        other => Err(CircuitError::Unsupported {
            index: 0,
            name: other.name().into(),
            reason: "only unitary instructions can conjugate a Pauli".into(),
        }),
    }
}

/// A claimed stabilizer flow: `input` before the circuit maps to `output` after it, up to
/// the parity of the listed measurement records.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerFlow {
    pub input: PauliString,
    pub output: PauliString,
    pub measurements: Vec<usize>,
}

/// Checks a stabilizer flow.
///
/// The output is carried backward through the circuit: unitaries conjugate it, a listed
/// Z measurement multiplies in `Z_q`, and a Z reset absorbs `Z_q`. An `X` component on a
/// measured or reset qubit makes the flow invalid, as does anything left over that
/// differs from `input` (sign included). Noise channels and annotations are ignored.
pub fn verify_flow(c: &Circuit, f: &StabilizerFlow) -> bool {
    let n = c.qubit_count().max(f.input.num_qubits()).max(f.output.num_qubits());
    if f.input.num_qubits() != n || f.output.num_qubits() != n {
        return false;
    }
    if f.measurements.iter().any(|&m| m >= c.measurement_count()) {
        return false;
    }
    let mut listed = vec![false; c.measurement_count()];
    for &m in &f.measurements {
        listed[m] ^= true;
    }
    let mut cur = f.output.clone();
    let mut next_record = c.measurement_count();
    for inst in c.instructions().iter().rev() {
        match inst {
            Instruction::H(_) => conjugate_in_place(&mut cur, inst).expect("unitary"),
            Instruction::Cx(pairs) => {
                // CX is self-inverse; undo the pairs last-to-first
                for &(ctl, tgt) in pairs.iter().rev() {
                    cur.apply_cx(ctl, tgt);
                }
            }
            Instruction::Measure(targets) => {
                for &q in targets.iter().rev() {
                    next_record -= 1;
                    if cur.has_x(q) {
                        return false;
                    }
                    if listed[next_record] {
                        cur.toggle_z(q);
                    }
                }
            }
            Instruction::Reset(targets) => {
                for &q in targets {
                    if cur.has_x(q) {
                        return false;
                    }
                    cur.clear_z(q);
                }
            }
            Instruction::Tick | Instruction::Noise(..) | Instruction::Detector(_) | Instruction::Observable(..) => {}
        }
    }
    cur == f.input
}

/// Final qubit values and measurement tape of a computational-basis simulation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalOutcome {
    pub final_bits: BitVector,
    pub records: BitVector,
}

/// Simulates a circuit made of resets, CNOTs and Z measurements on a computational
/// basis input. Noise channels and annotations are ignored; `H` is rejected.
pub fn classical_action(c: &Circuit, input_bits: &BitVector) -> Result<ClassicalOutcome, CircuitError> {
    assert_eq!(input_bits.len(), c.qubit_count(), "input must assign every qubit");
    let mut bits = input_bits.clone();
    let mut records = BitVector::zeros(c.measurement_count());
    let mut next = 0;
    for (index, inst) in c.instructions().iter().enumerate() {
        match inst {
            Instruction::Reset(t) => {
                for &q in t {
                    bits.set(q, false);
                }
            }
            Instruction::Cx(pairs) => {
                for &(ctl, tgt) in pairs {
                    if bits.get(ctl) {
                        bits.toggle(tgt);
                    }
                }
            }
            Instruction::Measure(t) => {
                for &q in t {
                    records.set(next, bits.get(q));
                    next += 1;
                }
            }
            Instruction::H(_) => {
                return Err(CircuitError::Unsupported {
                    index,
                    name: "H".into(),
                    reason: "classical simulation needs computational-basis gates only".into(),
                })
            }
            _ => {}
        }
    }
    Ok(ClassicalOutcome { final_bits: bits, records })
}

/// Parities of every declared detector for a record tape.
pub fn detector_parities(c: &Circuit, records: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(c.num_detectors());
    for (i, d) in c.detectors().iter().enumerate() {
        let parity = d.iter().fold(false, |acc, &r| acc ^ records.get(r));
        out.set(i, parity);
    }
    out
}
