//! Independent oracles: dense matrices for Clifford conjugation, explicit basis-state
//! simulation for classical action, and closed-form detector marginals.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qroute::dem::{compile_dem, sample_dem};
use qroute::gf2::BitVector;
use qroute::noise::NoiseModel;
use qroute::sampler::sample_frames;
use qroute::schedules::{Schedule, ScheduleKind};
use qroute::{classical_action, conjugate, Circuit, Instruction, Pauli, PauliString};

type M = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn single(p: Pauli) -> M {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => vec![vec![o, z], vec![z, o]],
        Pauli::X => vec![vec![z, o], vec![o, z]],
        Pauli::Y => vec![vec![z, -i], vec![i, z]],
        Pauli::Z => vec![vec![o, z], vec![z, -o]],
    }
}

fn kron(a: &M, b: &M) -> M {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn matmul(a: &M, b: &M) -> M {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn dagger(a: &M) -> M {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| a[j][i].conj()).collect()).collect()
}

/// Qubit 0 is the most significant tensor factor.
fn pauli_matrix(p: &PauliString) -> M {
    let mut m = single(p.get(0));
    for q in 1..p.num_qubits() {
        m = kron(&m, &single(p.get(q)));
    }
    let sign = if p.is_negative() { -1.0 } else { 1.0 };
    m.iter().map(|row| row.iter().map(|&v| v * sign).collect()).collect()
}

fn gate_matrix(inst: &Instruction) -> M {
    let h = 1.0 / 2f64.sqrt();
    let hm = vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]];
    let id = single(Pauli::I);
    match inst {
        Instruction::H(t) if t == &[0] => kron(&hm, &id),
        Instruction::H(t) if t == &[1] => kron(&id, &hm),
        Instruction::Cx(pairs) => {
            let (ctl, tgt) = pairs[0];
            let mut m = vec![vec![c(0.0, 0.0); 4]; 4];
            for basis in 0..4usize {
                let bit = |q: usize| basis >> (1 - q) & 1;
                let out = if bit(ctl) == 1 { basis ^ (1 << (1 - tgt)) } else { basis };
                m[out][basis] = c(1.0, 0.0);
            }
            m
        }
        _ => unreachable!(),
    }
}

fn close(a: &M, b: &M) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-12)
}

#[test]
fn conjugation_matches_dense_matrices() {
    let gates = [Instruction::Cx(vec![(0, 1)]), Instruction::Cx(vec![(1, 0)]), Instruction::H(vec![0]), Instruction::H(vec![1])];
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    for g in &gates {
        let u = gate_matrix(g);
        for &a in &paulis {
            for &b in &paulis {
                for negative in [false, true] {
                    let mut p = PauliString::from_sparse(2, &[(0, a), (1, b)]);
                    if negative {
                        p.negate();
                    }
                    let expect = matmul(&matmul(&u, &pauli_matrix(&p)), &dagger(&u));
                    let got = conjugate(&p, g).unwrap();
                    assert!(close(&pauli_matrix(&got), &expect), "{g:?} on {p}: got {got}");
                }
            }
        }
    }
}

/// Follows a computational basis state through resets, CNOTs and measurements.
fn basis_state_oracle(c: &Circuit, input: &[bool]) -> Vec<bool> {
    let mut state = input.to_vec();
    let mut records = Vec::new();
    for inst in c.instructions() {
        match inst {
            Instruction::Reset(t) => t.iter().for_each(|&q| state[q] = false),
            Instruction::Cx(pairs) => {
                for &(a, b) in pairs {
                    state[b] ^= state[a];
                }
            }
            Instruction::Measure(t) => records.extend(t.iter().map(|&q| state[q])),
            _ => {}
        }
    }
    records
}

#[test]
fn classical_action_matches_basis_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = rng.gen_range(2..7);
        let mut c = Circuit::with_qubits(n);
        for _ in 0..rng.gen_range(1..12) {
            match rng.gen_range(0..4) {
                0 => c.reset(&[rng.gen_range(0..n)]),
                1 => {
                    c.measure(&[rng.gen_range(0..n)]);
                }
                _ => {
                    let a = rng.gen_range(0..n);
                    let b = (a + rng.gen_range(1..n)) % n;
                    c.cx(&[(a, b)]).unwrap();
                }
            }
        }
        let input: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let out = classical_action(&c, &BitVector::from_bools(&input)).unwrap();
        assert_eq!(out.records.to_bools(), basis_state_oracle(&c, &input));
    }
}

/// A detector fires with probability `(1 - prod(1 - 2 p_i)) / 2` over the independent
/// mechanisms touching it.
#[test]
fn frame_marginals_match_closed_form() {
    let shots = 100_000;
    let c = Schedule::surface(ScheduleKind::SurfaceRouted, 3)
        .unwrap()
        .generate(2, Some(&NoiseModel::si1000(5e-3).unwrap()), true)
        .unwrap();
    let dem = compile_dem(&c).unwrap();
    let frames = sample_frames(&c, shots, 21);
    let from_dem = sample_dem(&dem, shots, 22);
    let mut worst: f64 = 0.0;
    for d in 0..dem.detector_count {
        let prod: f64 = dem.mechanisms.iter().filter(|m| m.detectors.contains(&d)).map(|m| 1.0 - 2.0 * m.probability).product();
        let p = (1.0 - prod) / 2.0;
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        for batch in [&frames, &from_dem] {
            let hits = (0..shots).filter(|&s| batch.detectors.get(s, d)).count() as f64 / shots as f64;
            worst = worst.max((hits - p).abs() / sigma);
        }
    }
    // the maximum over ~100 comparisons, so allow a little above 3 sigma
    assert!(worst < 4.0, "worst deviation {worst:.2} sigma");
}
