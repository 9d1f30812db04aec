//! Bit-packed Pauli-frame sampling of noisy circuits.
//!
//! Frames are stored qubit-major with one bit per shot, 64 shots per word. After
//! every reset and measurement the Z part of the frame is randomized, so a detector
//! that is not actually deterministic shows up as a coin flip instead of silently
//! reading zero.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Instruction, NoiseChannel};
use crate::dem::{chunk_rng, chunk_sizes, geometric_skip, FaultSource, SampleBatch};
use crate::gf2::{iter_word_ones, BitMatrix, BitVector};
use crate::pauli::Pauli;

struct Frames {
    words: usize,
    /// Mask of valid shots in the final word.
    tail: u64,
    x: Vec<u64>,
    z: Vec<u64>,
    records: Vec<u64>,
}

impl Frames {
    fn new(qubits: usize, records: usize, shots: usize) -> Self {
        let words = shots.div_ceil(64).max(1);
        let tail = if shots % 64 == 0 { u64::MAX } else { (1u64 << (shots % 64)) - 1 };
        Frames { words, tail, x: vec![0; qubits * words], z: vec![0; qubits * words], records: vec![0; records * words] }
    }

    fn randomize_z(&mut self, q: usize, rng: &mut ChaCha8Rng) {
        let w = self.words;
        for i in 0..w {
            self.z[q * w + i] = rng.gen::<u64>();
        }
        self.z[q * w + w - 1] &= self.tail;
    }

    fn toggle(&mut self, q: usize, shot: usize, p: Pauli) {
        let (x, z) = p.bits();
        let i = q * self.words + shot / 64;
        let bit = 1u64 << (shot % 64);
        if x {
            self.x[i] ^= bit;
        }
        if z {
            self.z[i] ^= bit;
        }
    }

    fn apply(&mut self, inst: &Instruction, next_record: &mut usize, rng: Option<&mut ChaCha8Rng>) {
        let w = self.words;
        match inst {
            Instruction::Reset(targets) => {
                let mut rng = rng;
                for &q in targets {
                    self.x[q * w..(q + 1) * w].fill(0);
                    match rng.as_deref_mut() {
                        Some(r) => self.randomize_z(q, r),
                        None => self.z[q * w..(q + 1) * w].fill(0),
                    }
                }
            }
            Instruction::Measure(targets) => {
                let mut rng = rng;
                for &q in targets {
                    let r = *next_record;
                    *next_record += 1;
                    self.records[r * w..(r + 1) * w].copy_from_slice(&self.x[q * w..(q + 1) * w]);
                    if let Some(r) = rng.as_deref_mut() {
                        self.randomize_z(q, r);
                    }
                }
            }
            Instruction::H(targets) => {
                for &q in targets {
                    for i in q * w..(q + 1) * w {
                        std::mem::swap(&mut self.x[i], &mut self.z[i]);
                    }
                }
            }
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    for i in 0..w {
                        self.x[t * w + i] ^= self.x[c * w + i];
                        self.z[c * w + i] ^= self.z[t * w + i];
                    }
                }
            }
            _ => {}
        }
    }

    fn apply_noise(&mut self, ch: &NoiseChannel, targets: &[usize], shots: usize, rng: &mut ChaCha8Rng) {
        let p = ch.probability();
        if p <= 0.0 {
            return;
        }
        let arity = ch.arity();
        let groups = targets.len() / arity;
        let trials = groups * shots;
        let log_q = (1.0 - p).ln();
        let mut k = if p >= 1.0 { 0 } else { geometric_skip(rng, log_q) };
        while k < trials {
            let (g, shot) = (k / shots, k % shots);
            match *ch {
                NoiseChannel::XError(_) => self.toggle(targets[g], shot, Pauli::X),
                NoiseChannel::Depolarize1(_) => {
                    let i = rng.gen_range(1..4u8);
                    self.toggle(targets[g], shot, pauli_from_index(i));
                }
                NoiseChannel::Depolarize2(_) => {
                    let i = rng.gen_range(1..16u8);
                    self.toggle(targets[2 * g], shot, pauli_from_index(i >> 2));
                    self.toggle(targets[2 * g + 1], shot, pauli_from_index(i & 3));
                }
            }
            let skip = if p >= 1.0 { 0 } else { geometric_skip(rng, log_q) };
            k = k.saturating_add(1).saturating_add(skip);
        }
    }

    /// XOR of the listed records, one word slice per annotation.
    fn parities(&self, annotations: &[Vec<usize>]) -> Vec<u64> {
        let w = self.words;
        let mut out = vec![0u64; annotations.len() * w];
        for (a, recs) in annotations.iter().enumerate() {
            for &r in recs {
                for i in 0..w {
                    out[a * w + i] ^= self.records[r * w + i];
                }
            }
        }
        out
    }
}

fn pauli_from_index(i: u8) -> Pauli {
    match i {
        0 => Pauli::I,
        1 => Pauli::X,
        2 => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// Turns annotation-major bit words into a shot-major matrix.
fn transpose_words(words: &[u64], count: usize, per: usize, shots: usize) -> BitMatrix {
    let mut m = BitMatrix::zeros(shots, count);
    for a in 0..count {
        for shot in iter_word_ones(&words[a * per..(a + 1) * per]) {
            m.set(shot, a, true);
        }
    }
    m
}

pub(crate) fn sample_chunk(c: &Circuit, shots: usize, rng: &mut ChaCha8Rng) -> SampleBatch {
    let mut f = Frames::new(c.qubit_count(), c.measurement_count(), shots);
    for q in 0..c.qubit_count() {
        f.randomize_z(q, rng);
    }
    let mut next_record = 0;
    for inst in c.instructions() {
        match inst {
            Instruction::Noise(ch, targets) => f.apply_noise(ch, targets, shots, rng),
            _ => f.apply(inst, &mut next_record, Some(rng)),
        }
    }
    let dets = f.parities(c.detectors());
    let obs = f.parities(c.observables());
    SampleBatch {
        detectors: transpose_words(&dets, c.num_detectors(), f.words, shots),
        observables: transpose_words(&obs, c.num_observables(), f.words, shots),
    }
}

/// Samples detector events and observable flips of a noisy circuit. Shots are drawn
/// in fixed-size chunks, each from its own seeded stream, so the output depends only
/// on `seed` and `shots`.
pub fn sample_frames(c: &Circuit, shots: usize, seed: u64) -> SampleBatch {
    let parts = chunk_sizes(shots)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, n)| sample_chunk(c, n, &mut chunk_rng(seed, chunk)))
        .collect();
    SampleBatch::concat(parts, c.num_detectors(), c.num_observables())
}

/// Runs the circuit without noise except for one Pauli applied at the position of the
/// given channel instruction. Returns the flipped detectors and observables.
pub fn inject_fault(c: &Circuit, fault: &FaultSource) -> (BitVector, BitVector) {
    let mut f = Frames::new(c.qubit_count(), c.measurement_count(), 1);
    let mut next_record = 0;
    for (index, inst) in c.instructions().iter().enumerate() {
        if index == fault.instruction {
            for &(q, p) in &fault.paulis {
                f.toggle(q, 0, p);
            }
        }
        f.apply(inst, &mut next_record, None);
    }
    let bits = |words: Vec<u64>, n: usize| BitVector::from_bools(&(0..n).map(|i| words[i] & 1 == 1).collect::<Vec<_>>());
    (bits(f.parities(c.detectors()), c.num_detectors()), bits(f.parities(c.observables()), c.num_observables()))
}
