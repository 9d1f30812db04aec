//! Detector error models: compilation from noisy circuits, text format and sampling.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuit::{Circuit, Instruction, NoiseChannel};
use crate::error::{DemError, ParseError};
use crate::gf2::{iter_word_ones, xor_words, BitMatrix, BitVector};
use crate::pauli::Pauli;

/// One elementary Pauli fault: the instruction index of its channel and the Pauli
/// applied to each affected qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultSource {
    pub instruction: usize,
    pub paulis: Vec<(usize, Pauli)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultMechanism {
    pub probability: f64,
    pub detectors: Vec<usize>,
    pub observables: Vec<usize>,
    pub provenance: Vec<FaultSource>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorErrorModel {
    pub detector_count: usize,
    pub observable_count: usize,
    pub mechanisms: Vec<FaultMechanism>,
}

/// Probability that exactly one of two independent events fires.
pub fn merge_probability(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

const PAULIS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// The elementary Pauli terms of a channel acting on one target group, with their
/// individual probabilities.
pub fn channel_terms(ch: &NoiseChannel, qubits: &[usize]) -> Vec<(f64, Vec<(usize, Pauli)>)> {
    match *ch {
        NoiseChannel::XError(p) => vec![(p, vec![(qubits[0], Pauli::X)])],
        NoiseChannel::Depolarize1(p) => PAULIS.iter().map(|&s| (p / 3.0, vec![(qubits[0], s)])).collect(),
        NoiseChannel::Depolarize2(p) => {
            let all = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
            let mut out = Vec::with_capacity(15);
            for &a in &all {
                for &b in &all {
                    if a == Pauli::I && b == Pauli::I {
                        continue;
                    }
                    let mut term = Vec::with_capacity(2);
                    if a != Pauli::I {
                        term.push((qubits[0], a));
                    }
                    if b != Pauli::I {
                        term.push((qubits[1], b));
                    }
                    out.push((p / 15.0, term));
                }
            }
            out
        }
    }
}

/// Bitsets over detectors followed by observables.
struct Sensitivity {
    words: usize,
    hx: Vec<u64>,
    hz: Vec<u64>,
}

impl Sensitivity {
    fn x(&self, q: usize) -> &[u64] {
        &self.hx[q * self.words..(q + 1) * self.words]
    }

    fn z(&self, q: usize) -> &[u64] {
        &self.hz[q * self.words..(q + 1) * self.words]
    }

    fn x_mut(&mut self, q: usize) -> &mut [u64] {
        &mut self.hx[q * self.words..(q + 1) * self.words]
    }

    fn z_mut(&mut self, q: usize) -> &mut [u64] {
        &mut self.hz[q * self.words..(q + 1) * self.words]
    }

    /// Targets flipped by Pauli `p` on qubit `q` at the current point.
    fn accumulate(&self, out: &mut [u64], q: usize, p: Pauli) {
        let (x, z) = p.bits();
        // an X error anticommutes with the Z component of a detector, and vice versa
        if x {
            xor_words(out, self.z(q));
        }
        if z {
            xor_words(out, self.x(q));
        }
    }
}

fn first_set(words: &[u64]) -> Option<usize> {
    iter_word_ones(words).next()
}

/// For each measurement record, the detectors and observables containing it.
fn record_targets(c: &Circuit, words: usize) -> Vec<u64> {
    let mut out = vec![0u64; c.measurement_count() * words];
    let nd = c.num_detectors();
    for (d, recs) in c.detectors().iter().enumerate() {
        for &r in recs {
            out[r * words + d / 64] ^= 1 << (d % 64);
        }
    }
    for (o, recs) in c.observables().iter().enumerate() {
        let t = nd + o;
        for &r in recs {
            out[r * words + t / 64] ^= 1 << (t % 64);
        }
    }
    out
}

fn nondeterministic(words: &[u64], nd: usize) -> DemError {
    let t = first_set(words).expect("nonempty");
    if t < nd {
        DemError::NonDeterministic { kind: "detector", index: t }
    } else {
        DemError::NonDeterministic { kind: "observable", index: t - nd }
    }
}

/// Compiles the detector error model of a noisy circuit by propagating detector and
/// observable sensitivities backward through the circuit.
pub fn compile_dem(c: &Circuit) -> Result<DetectorErrorModel, DemError> {
    let nd = c.num_detectors();
    let no = c.num_observables();
    let words = (nd + no).div_ceil(64).max(1);
    let nq = c.qubit_count();
    let rec_targets = record_targets(c, words);
    let mut s = Sensitivity { words, hx: vec![0; nq * words], hz: vec![0; nq * words] };
    let mut next_record = c.measurement_count();
    // (instruction, term, probability, signature) in backward order
    let mut faults: Vec<(FaultSource, f64, Vec<u64>)> = Vec::new();
    let mut scratch = vec![0u64; words];
    for (index, inst) in c.instructions().iter().enumerate().rev() {
        match inst {
            Instruction::Measure(targets) => {
                for &q in targets.iter().rev() {
                    next_record -= 1;
                    if s.x(q).iter().any(|&w| w != 0) {
                        return Err(nondeterministic(s.x(q), nd));
                    }
                    let r = next_record;
                    xor_words(s.z_mut(q), &rec_targets[r * words..(r + 1) * words]);
                }
            }
            Instruction::Reset(targets) => {
                for &q in targets {
                    if s.x(q).iter().any(|&w| w != 0) {
                        return Err(nondeterministic(s.x(q), nd));
                    }
                    s.x_mut(q).fill(0);
                    s.z_mut(q).fill(0);
                }
            }
            Instruction::H(targets) => {
                for &q in targets {
                    let range = q * words..(q + 1) * words;
                    for i in range {
                        std::mem::swap(&mut s.hx[i], &mut s.hz[i]);
                    }
                }
            }
            Instruction::Cx(pairs) => {
                for &(ctl, tgt) in pairs.iter().rev() {
                    for w in 0..words {
                        s.hx[tgt * words + w] ^= s.hx[ctl * words + w];
                        s.hz[ctl * words + w] ^= s.hz[tgt * words + w];
                    }
                }
            }
            Instruction::Noise(ch, targets) => {
                if ch.probability() == 0.0 {
                    continue;
                }
                let mut group_faults = Vec::new();
                for group in targets.chunks(ch.arity()) {
                    for (p, term) in channel_terms(ch, group) {
                        scratch.fill(0);
                        for &(q, pauli) in &term {
                            s.accumulate(&mut scratch, q, pauli);
                        }
                        if scratch.iter().any(|&w| w != 0) {
                            group_faults.push((FaultSource { instruction: index, paulis: term }, p, scratch.clone()));
                        }
                    }
                }
                // keep forward order within the instruction once the list is reversed
                faults.extend(group_faults.into_iter().rev());
            }
            Instruction::Tick | Instruction::Detector(_) | Instruction::Observable(..) => {}
        }
    }
    for q in 0..nq {
        if s.x(q).iter().any(|&w| w != 0) {
            return Err(nondeterministic(s.x(q), nd));
        }
    }
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut mechanisms: Vec<FaultMechanism> = Vec::new();
    for (source, p, sig) in faults.into_iter().rev() {
        match index.get(&sig) {
            Some(&i) => {
                let m = &mut mechanisms[i];
                m.probability = merge_probability(m.probability, p);
                m.provenance.push(source);
            }
            None => {
                let mut detectors = Vec::new();
                let mut observables = Vec::new();
                for t in iter_word_ones(&sig) {
                    if t < nd {
                        detectors.push(t);
                    } else {
                        observables.push(t - nd);
                    }
                }
                index.insert(sig, mechanisms.len());
                mechanisms.push(FaultMechanism { probability: p, detectors, observables, provenance: vec![source] });
            }
        }
    }
    Ok(DetectorErrorModel { detector_count: nd, observable_count: no, mechanisms })
}

/// Sparse column view of a DEM, shared by the decoders.
#[derive(Debug, Clone)]
pub struct CheckMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Detector indices of each mechanism.
    pub col_rows: Vec<Vec<usize>>,
    /// Mechanisms touching each detector.
    pub row_cols: Vec<Vec<usize>>,
}

impl CheckMatrix {
    pub fn from_columns(rows: usize, col_rows: Vec<Vec<usize>>) -> Self {
        let mut row_cols = vec![Vec::new(); rows];
        for (c, rs) in col_rows.iter().enumerate() {
            for &r in rs {
                row_cols[r].push(c);
            }
        }
        CheckMatrix { rows, cols: col_rows.len(), col_rows, row_cols }
    }

    pub fn syndrome(&self, e: &BitVector) -> BitVector {
        let mut s = BitVector::zeros(self.rows);
        for c in e.iter_ones() {
            for &r in &self.col_rows[c] {
                s.toggle(r);
            }
        }
        s
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.cols);
        for (c, rs) in self.col_rows.iter().enumerate() {
            for &r in rs {
                m.toggle(r, c);
            }
        }
        m
    }
}

impl DetectorErrorModel {
    pub fn probabilities(&self) -> Vec<f64> {
        self.mechanisms.iter().map(|m| m.probability).collect()
    }

    /// Detector matrix `D` (detectors x mechanisms), sparse.
    pub fn detector_matrix(&self) -> CheckMatrix {
        CheckMatrix::from_columns(self.detector_count, self.mechanisms.iter().map(|m| m.detectors.clone()).collect())
    }

    /// Logical-flip matrix `L` (observables x mechanisms), sparse.
    pub fn observable_matrix(&self) -> CheckMatrix {
        CheckMatrix::from_columns(self.observable_count, self.mechanisms.iter().map(|m| m.observables.clone()).collect())
    }

    /// Observables flipped by the mechanisms set in `e`.
    pub fn observable_flips(&self, e: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.observable_count);
        for i in e.iter_ones() {
            for &o in &self.mechanisms[i].observables {
                out.toggle(o);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("detectors {} observables {}\n", self.detector_count, self.observable_count);
        for m in &self.mechanisms {
            write!(s, "error({})", m.probability).unwrap();
            for d in &m.detectors {
                write!(s, " D{d}").unwrap();
            }
            for o in &m.observables {
                write!(s, " L{o}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Parses the text format; provenance is not stored in text and comes back empty.
    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| ParseError::new("missing DEM header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (nd, no) = match fields.as_slice() {
            ["detectors", n, "observables", k] => (
                n.parse().map_err(|_| ParseError::new("bad detector count").at_line(ln + 1))?,
                k.parse().map_err(|_| ParseError::new("bad observable count").at_line(ln + 1))?,
            ),
            _ => return Err(ParseError::new(format!("bad DEM header {header:?}")).at_line(ln + 1)),
        };
        let mut mechanisms = Vec::new();
        for (ln, line) in lines {
            let err = |m: String| ParseError::new(m).at_line(ln + 1);
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let p = head
                .strip_prefix("error(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| err(format!("expected error(p), got {head:?}")))?;
            let probability: f64 = p.parse().map_err(|_| err(format!("bad probability {p:?}")))?;
            let mut detectors = Vec::new();
            let mut observables = Vec::new();
            for tok in parts {
                let (list, limit, rest) = match tok.as_bytes().first() {
                    Some(b'D') => (&mut detectors, nd, &tok[1..]),
                    Some(b'L') => (&mut observables, no, &tok[1..]),
                    _ => return Err(err(format!("bad target {tok:?}"))),
                };
                let i: usize = rest.parse().map_err(|_| err(format!("bad target {tok:?}")))?;
                if i >= limit {
                    return Err(err(format!("target {tok} out of range")));
                }
                list.push(i);
            }
            mechanisms.push(FaultMechanism { probability, detectors, observables, provenance: Vec::new() });
        }
        Ok(DetectorErrorModel { detector_count: nd, observable_count: no, mechanisms })
    }
}

/// Detector events and observable flips, one row per shot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    pub detectors: BitMatrix,
    pub observables: BitMatrix,
}

impl SampleBatch {
    pub fn shots(&self) -> usize {
        self.detectors.rows()
    }

    /// One line per shot: detector bits, a space, observable bits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.shots() * (self.detectors.cols() + self.observables.cols() + 2));
        for r in 0..self.shots() {
            s.push_str(&self.detectors.row(r).to_bit_string());
            s.push(' ');
            s.push_str(&self.observables.row(r).to_bit_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, detectors: usize, observables: usize) -> Result<SampleBatch, ParseError> {
        let mut dets = Vec::new();
        let mut obs = Vec::new();
        for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#')) {
            let (d, o) = line.trim_end().split_once(' ').unwrap_or((line.trim_end(), ""));
            let d = BitVector::parse_bit_string(d).map_err(|e| e.at_line(ln + 1))?;
            let o = BitVector::parse_bit_string(o.trim()).map_err(|e| e.at_line(ln + 1))?;
            if d.len() != detectors || o.len() != observables {
                return Err(ParseError::new(format!(
                    "expected {detectors} detector and {observables} observable bits, got {} and {}",
                    d.len(),
                    o.len()
                ))
                .at_line(ln + 1));
            }
            dets.push(d);
            obs.push(o);
        }
        Ok(SampleBatch {
            detectors: BitMatrix::from_rows_with_cols(&dets, detectors),
            observables: BitMatrix::from_rows_with_cols(&obs, observables),
        })
    }

    pub(crate) fn concat(parts: Vec<SampleBatch>, nd: usize, no: usize) -> SampleBatch {
        let shots: usize = parts.iter().map(SampleBatch::shots).sum();
        let mut detectors = BitMatrix::zeros(shots, nd);
        let mut observables = BitMatrix::zeros(shots, no);
        let mut row = 0;
        for part in parts {
            for r in 0..part.shots() {
                detectors.row_words_mut(row).copy_from_slice(part.detectors.row_words(r));
                observables.row_words_mut(row).copy_from_slice(part.observables.row_words(r));
                row += 1;
            }
        }
        SampleBatch { detectors, observables }
    }
}

/// Shots per independently seeded chunk. Results depend only on the seed, never on
/// how chunks are spread over threads.
pub const CHUNK_SHOTS: usize = 1024;

pub(crate) fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

pub(crate) fn chunk_sizes(shots: usize) -> Vec<usize> {
    (0..shots.div_ceil(CHUNK_SHOTS)).map(|c| CHUNK_SHOTS.min(shots - c * CHUNK_SHOTS)).collect()
}

/// Gap to the next success of a Bernoulli(p) process, by inversion.
pub(crate) fn geometric_skip(rng: &mut impl Rng, log_q: f64) -> usize {
    let u: f64 = rng.gen::<f64>();
    // 1 - u lies in (0, 1]
    let g = ((1.0 - u).ln() / log_q).floor();
    if g >= usize::MAX as f64 {
        usize::MAX
    } else {
        g as usize
    }
}

pub(crate) fn sample_dem_chunk(dem: &DetectorErrorModel, shots: usize, rng: &mut ChaCha8Rng) -> SampleBatch {
    let mut detectors = BitMatrix::zeros(shots, dem.detector_count);
    let mut observables = BitMatrix::zeros(shots, dem.observable_count);
    for m in &dem.mechanisms {
        let p = m.probability;
        if p <= 0.0 {
            continue;
        }
        let mut fire = |shot: usize| {
            for &d in &m.detectors {
                detectors.toggle(shot, d);
            }
            for &o in &m.observables {
                observables.toggle(shot, o);
            }
        };
        if p >= 1.0 {
            (0..shots).for_each(&mut fire);
            continue;
        }
        let log_q = (1.0 - p).ln();
        let mut shot = geometric_skip(rng, log_q);
        while shot < shots {
            fire(shot);
            shot = shot.saturating_add(1).saturating_add(geometric_skip(rng, log_q));
        }
    }
    SampleBatch { detectors, observables }
}

/// Samples the DEM directly: every mechanism fires independently.
pub fn sample_dem(dem: &DetectorErrorModel, shots: usize, seed: u64) -> SampleBatch {
    let parts = chunk_sizes(shots)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, n)| sample_dem_chunk(dem, n, &mut chunk_rng(seed, chunk)))
        .collect();
    SampleBatch::concat(parts, dem.detector_count, dem.observable_count)
}
