//! Belief propagation with ordered-statistics post-processing, and a brute-force
//! maximum-likelihood reference decoder.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::dem::{chunk_rng, chunk_sizes, sample_dem_chunk, CheckMatrix, DetectorErrorModel, SampleBatch};
use crate::error::DecodeError;
use crate::gf2::{iter_word_ones, BitVector};
use crate::sampler::sample_chunk;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BpMethod {
    MinSum,
    ProductSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpConfig {
    pub max_iterations: usize,
    /// Normalization applied to min-sum check messages.
    pub scaling: f64,
    pub method: BpMethod,
    /// Stop as soon as the hard decision satisfies the syndrome.
    pub early_stop: bool,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig { max_iterations: 30, scaling: 0.625, method: BpMethod::MinSum, early_stop: true }
    }
}

impl BpConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        if self.max_iterations == 0 {
            return Err(DecodeError::Config("max_iterations must be at least 1".into()));
        }
        if !(self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(DecodeError::Config(format!("scaling {} is outside (0, 1]", self.scaling)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OsdMode {
    Osd0,
    /// Combination sweep: every single flip of a non-pivot position, plus every pair
    /// among the `order` least reliable non-pivot positions.
    OsdCs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OsdConfig {
    pub mode: OsdMode,
    pub order: usize,
}

impl Default for OsdConfig {
    fn default() -> Self {
        OsdConfig { mode: OsdMode::Osd0, order: 0 }
    }
}

impl OsdConfig {
    pub fn osd0() -> Self {
        OsdConfig::default()
    }

    pub fn osd_cs(order: usize) -> Self {
        OsdConfig { mode: OsdMode::OsdCs, order }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub bp: BpConfig,
    pub osd: OsdConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpOutput {
    /// Posterior log-likelihood ratios `log(P(0)/P(1))` per mechanism.
    pub llrs: Vec<f64>,
    pub hard: BitVector,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub error_estimate: BitVector,
    pub predicted_observables: BitVector,
    pub bp_converged: bool,
    pub iterations_used: usize,
}

pub fn prior_llr(p: f64) -> f64 {
    let p = p.clamp(1e-300, 1.0 - 1e-16);
    ((1.0 - p) / p).ln()
}

/// Tanner graph of a check matrix in compressed form. Edges are numbered in
/// check-major order; `var_edge` lists them again grouped by variable.
#[derive(Debug, Clone)]
struct TannerGraph {
    check_ptr: Vec<u32>,
    edge_var: Vec<u32>,
    var_ptr: Vec<u32>,
    var_edge: Vec<u32>,
}

impl TannerGraph {
    fn new(m: &CheckMatrix) -> Self {
        let mut check_ptr = Vec::with_capacity(m.rows + 1);
        let mut edge_var = Vec::new();
        let mut by_var = vec![Vec::new(); m.cols];
        check_ptr.push(0);
        for cols in &m.row_cols {
            for &v in cols {
                by_var[v].push(edge_var.len() as u32);
                edge_var.push(v as u32);
            }
            check_ptr.push(edge_var.len() as u32);
        }
        let mut var_ptr = Vec::with_capacity(m.cols + 1);
        var_ptr.push(0);
        let mut var_edge = Vec::with_capacity(edge_var.len());
        for edges in by_var {
            var_edge.extend(edges);
            var_ptr.push(var_edge.len() as u32);
        }
        TannerGraph { check_ptr, edge_var, var_ptr, var_edge }
    }

    fn checks(&self) -> usize {
        self.check_ptr.len() - 1
    }

    fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_ptr[c] as usize..self.check_ptr[c + 1] as usize
    }

    fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edge[self.var_ptr[v] as usize..self.var_ptr[v + 1] as usize]
    }

    fn satisfies(&self, hard: &[bool], syndrome: &[bool]) -> bool {
        (0..self.checks()).all(|c| {
            let parity = self.edge_var[self.check_edges(c)].iter().fold(false, |a, &v| a ^ hard[v as usize]);
            parity == syndrome[c]
        })
    }
}

fn run_bp(g: &TannerGraph, priors: &[f64], syndrome: &BitVector, cfg: &BpConfig) -> BpOutput {
    let n = priors.len();
    let syndrome = syndrome.to_bools();
    let mut q: Vec<f64> = g.edge_var.iter().map(|&v| priors[v as usize]).collect();
    let mut r = vec![0.0f64; q.len()];
    let mut total = priors.to_vec();
    let mut hard = vec![false; n];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iterations {
        iterations = it;
        for c in 0..g.checks() {
            let range = g.check_edges(c);
            let flip = syndrome[c];
            let (qs, rs) = (&q[range.clone()], &mut r[range]);
            match cfg.method {
                BpMethod::MinSum => {
                    let mut neg = flip;
                    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
                    for (i, &m) in qs.iter().enumerate() {
                        neg ^= m < 0.0;
                        let a = m.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg = i;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    let (v1, v2) = (cfg.scaling * min1, cfg.scaling * min2);
                    for (i, (&m, out)) in qs.iter().zip(rs.iter_mut()).enumerate() {
                        let v = if i == arg { v2 } else { v1 };
                        *out = if neg ^ (m < 0.0) { -v } else { v };
                    }
                }
                BpMethod::ProductSum => {
                    // sums of log|tanh(q/2)| with exact zeros counted separately
                    let mut neg = flip;
                    let mut log_sum = 0.0;
                    let mut zeros = 0usize;
                    for &m in qs {
                        let t = (m / 2.0).tanh();
                        neg ^= t < 0.0;
                        if t == 0.0 {
                            zeros += 1;
                        } else {
                            log_sum += t.abs().ln();
                        }
                    }
                    for (&m, out) in qs.iter().zip(rs.iter_mut()) {
                        let t = (m / 2.0).tanh();
                        let mag = match (zeros, t == 0.0) {
                            (0, _) => (log_sum - t.abs().ln()).exp(),
                            (1, true) => log_sum.exp(),
                            _ => 0.0,
                        };
                        let mag: f64 = mag.min(1.0 - 1e-15);
                        let v = 2.0 * mag.atanh();
                        *out = if neg ^ (t < 0.0) { -v } else { v };
                    }
                }
            }
        }
        for v in 0..n {
            let edges = g.var_edges(v);
            let t = priors[v] + edges.iter().map(|&e| r[e as usize]).sum::<f64>();
            total[v] = t;
            hard[v] = t < 0.0;
            for &e in edges {
                q[e as usize] = t - r[e as usize];
            }
        }
        converged = g.satisfies(&hard, &syndrome);
        if converged && cfg.early_stop {
            break;
        }
    }
    BpOutput { llrs: total, hard: BitVector::from_bools(&hard), converged, iterations }
}

/// Incremental column elimination with the combination of pivot columns behind every
/// basis vector.
struct ColumnReducer {
    words: usize,
    basis: Vec<(usize, Vec<u64>, Vec<u64>)>,
}

impl ColumnReducer {
    fn new(rows: usize) -> Self {
        ColumnReducer { words: rows.div_ceil(64).max(1), basis: Vec::new() }
    }

    /// Reduces `v` in place and returns the combination of pivots that was removed.
    fn reduce(&self, v: &mut [u64]) -> Vec<u64> {
        let mut combo = vec![0u64; self.words];
        for (p, b, c) in &self.basis {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                for (x, y) in v.iter_mut().zip(b) {
                    *x ^= y;
                }
                for (x, y) in combo.iter_mut().zip(c) {
                    *x ^= y;
                }
            }
        }
        combo
    }

    /// Adds an already reduced nonzero vector as a new pivot.
    fn push(&mut self, v: Vec<u64>, mut combo: Vec<u64>) {
        let p = iter_word_ones(&v).next().expect("nonzero");
        let idx = self.basis.len();
        combo[idx / 64] ^= 1 << (idx % 64);
        self.basis.push((p, v, combo));
    }
}

fn dense_columns(m: &CheckMatrix) -> Vec<Vec<u64>> {
    let words = m.rows.div_ceil(64).max(1);
    m.col_rows
        .iter()
        .map(|rows| {
            let mut w = vec![0u64; words];
            for &r in rows {
                w[r / 64] ^= 1 << (r % 64);
            }
            w
        })
        .collect()
}

fn column_rank(columns: &[Vec<u64>], rows: usize) -> usize {
    let mut red = ColumnReducer::new(rows);
    for col in columns {
        let mut v = col.clone();
        let combo = red.reduce(&mut v);
        if v.iter().any(|&w| w != 0) {
            red.push(v, combo);
        }
    }
    red.basis.len()
}

/// A decoding problem: check matrix, observable matrix, BP priors and the additive
/// cost that OSD minimizes (the prior log-likelihood ratios unless overridden).
#[derive(Debug, Clone)]
pub struct BpOsdDecoder {
    matrix: CheckMatrix,
    observables: CheckMatrix,
    priors: Vec<f64>,
    costs: Vec<f64>,
    columns: Vec<Vec<u64>>,
    rank: usize,
    graph: TannerGraph,
    cfg: DecoderConfig,
}

impl BpOsdDecoder {
    pub fn new(dem: &DetectorErrorModel, cfg: DecoderConfig) -> Result<Self, DecodeError> {
        let priors: Vec<f64> = dem.mechanisms.iter().map(|m| prior_llr(m.probability)).collect();
        BpOsdDecoder::from_parts(dem.detector_matrix(), dem.observable_matrix(), priors.clone(), priors, cfg)
    }

    pub fn from_parts(
        matrix: CheckMatrix,
        observables: CheckMatrix,
        priors: Vec<f64>,
        costs: Vec<f64>,
        cfg: DecoderConfig,
    ) -> Result<Self, DecodeError> {
        cfg.bp.validate()?;
        if priors.len() != matrix.cols || costs.len() != matrix.cols || observables.cols != matrix.cols {
            return Err(DecodeError::Config("matrix, observable and prior sizes disagree".into()));
        }
        let columns = dense_columns(&matrix);
        let rank = column_rank(&columns, matrix.rows);
        let graph = TannerGraph::new(&matrix);
        Ok(BpOsdDecoder { matrix, observables, priors, costs, columns, rank, graph, cfg })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn matrix(&self) -> &CheckMatrix {
        &self.matrix
    }

    pub fn mechanism_count(&self) -> usize {
        self.matrix.cols
    }

    fn check_syndrome(&self, s: &BitVector) -> Result<(), DecodeError> {
        if s.len() != self.matrix.rows {
            return Err(DecodeError::SyndromeLength { expected: self.matrix.rows, got: s.len() });
        }
        Ok(())
    }

    pub fn bp(&self, syndrome: &BitVector) -> Result<BpOutput, DecodeError> {
        self.bp_with_priors(syndrome, &self.priors)
    }

    pub fn bp_with_priors(&self, syndrome: &BitVector, priors: &[f64]) -> Result<BpOutput, DecodeError> {
        self.check_syndrome(syndrome)?;
        Ok(run_bp(&self.graph, priors, syndrome, &self.cfg.bp))
    }

    /// Total OSD cost of an error pattern.
    pub fn cost(&self, e: &BitVector) -> f64 {
        e.iter_ones().map(|i| self.costs[i]).sum()
    }

    /// Ordered-statistics post-processing on the given soft outputs. The result always
    /// satisfies the syndrome.
    pub fn osd(&self, syndrome: &BitVector, soft: &[f64], cfg: &OsdConfig) -> Result<BitVector, DecodeError> {
        self.check_syndrome(syndrome)?;
        let n = self.matrix.cols;
        let mut order: Vec<usize> = (0..n).collect();
        // least reliable (most likely flipped) first; stable by index
        order.sort_by(|&a, &b| soft[a].total_cmp(&soft[b]));
        let sweep = cfg.mode == OsdMode::OsdCs;
        let mut red = ColumnReducer::new(self.matrix.rows);
        let mut pivots = Vec::with_capacity(self.rank);
        let mut nonpivots: Vec<(usize, Vec<u64>)> = Vec::new();
        for &c in &order {
            if !sweep && pivots.len() == self.rank {
                break;
            }
            let mut v = self.columns[c].clone();
            let combo = red.reduce(&mut v);
            if v.iter().any(|&w| w != 0) {
                red.push(v, combo);
                pivots.push(c);
            } else if sweep {
                nonpivots.push((c, combo));
            }
        }
        let mut s = syndrome.words().to_vec();
        s.resize(red.words, 0);
        let base = red.reduce(&mut s);
        if s.iter().any(|&w| w != 0) {
            return Err(DecodeError::Unsatisfiable);
        }
        let pivot_cost = |combo: &[u64]| -> f64 { iter_word_ones(combo).map(|i| self.costs[pivots[i]]).sum() };
        let mut best_cost = pivot_cost(&base);
        let mut best: (Vec<u64>, Vec<usize>) = (base.clone(), Vec::new());
        if sweep {
            let mut scratch = vec![0u64; red.words];
            for (j, (cj, comboj)) in nonpivots.iter().enumerate() {
                for (x, (a, b)) in scratch.iter_mut().zip(base.iter().zip(comboj)) {
                    *x = a ^ b;
                }
                let cost = pivot_cost(&scratch) + self.costs[*cj];
                if cost < best_cost {
                    best_cost = cost;
                    best = (scratch.clone(), vec![*cj]);
                }
                if j >= cfg.order {
                    continue;
                }
                for (ck, combok) in nonpivots.iter().take(cfg.order).skip(j + 1) {
                    let mut pair = scratch.clone();
                    for (x, y) in pair.iter_mut().zip(combok) {
                        *x ^= y;
                    }
                    let cost = pivot_cost(&pair) + self.costs[*cj] + self.costs[*ck];
                    if cost < best_cost {
                        best_cost = cost;
                        best = (pair, vec![*cj, *ck]);
                    }
                }
            }
        }
        let mut e = BitVector::zeros(n);
        for i in iter_word_ones(&best.0) {
            e.toggle(pivots[i]);
        }
        for c in best.1 {
            e.toggle(c);
        }
        debug_assert_eq!(self.matrix.syndrome(&e), *syndrome);
        Ok(e)
    }

    fn result(&self, e: BitVector, bp: &BpOutput) -> DecodeResult {
        DecodeResult {
            predicted_observables: self.observables.syndrome(&e),
            error_estimate: e,
            bp_converged: bp.converged,
            iterations_used: bp.iterations,
        }
    }

    /// BP, then OSD if BP did not converge.
    pub fn decode(&self, syndrome: &BitVector) -> Result<DecodeResult, DecodeError> {
        self.check_syndrome(syndrome)?;
        if syndrome.is_zero() {
            let e = BitVector::zeros(self.matrix.cols);
            return Ok(DecodeResult {
                predicted_observables: BitVector::zeros(self.observables.rows),
                error_estimate: e,
                bp_converged: true,
                iterations_used: 0,
            });
        }
        let bp = self.bp(syndrome)?;
        let e = if bp.converged { bp.hard.clone() } else { self.osd(syndrome, &bp.llrs, &self.cfg.osd)? };
        let out = self.result(e, &bp);
        assert_eq!(&self.matrix.syndrome(&out.error_estimate), syndrome, "decoder returned a non-solution");
        Ok(out)
    }
}

/// Runs min-sum BP (or the configured variant) on the DEM's Tanner graph.
pub fn bp_min_sum(dem: &DetectorErrorModel, syndrome: &BitVector, cfg: &BpConfig) -> Result<BpOutput, DecodeError> {
    let dec = BpOsdDecoder::new(dem, DecoderConfig { bp: *cfg, osd: OsdConfig::osd0() })?;
    dec.bp(syndrome)
}

pub fn osd_postprocess(
    dem: &DetectorErrorModel,
    syndrome: &BitVector,
    soft: &[f64],
    cfg: &OsdConfig,
) -> Result<DecodeResult, DecodeError> {
    let dec = BpOsdDecoder::new(dem, DecoderConfig { bp: BpConfig::default(), osd: *cfg })?;
    let e = dec.osd(syndrome, soft, cfg)?;
    Ok(DecodeResult {
        predicted_observables: dem.observable_flips(&e),
        error_estimate: e,
        bp_converged: false,
        iterations_used: 0,
    })
}

pub const ML_MAX_MECHANISMS: usize = 24;

/// Exhaustive maximum-likelihood decoding. Ties go to the lexicographically smallest
/// pattern, reading mechanism 0 first.
pub fn ml_bruteforce(dem: &DetectorErrorModel, syndrome: &BitVector) -> Result<DecodeResult, DecodeError> {
    let n = dem.mechanisms.len();
    if n > ML_MAX_MECHANISMS {
        return Err(DecodeError::TooLarge { mechanisms: n, limit: ML_MAX_MECHANISMS });
    }
    if syndrome.len() != dem.detector_count {
        return Err(DecodeError::SyndromeLength { expected: dem.detector_count, got: syndrome.len() });
    }
    let words = dem.detector_count.div_ceil(64).max(1);
    let m = dem.detector_matrix();
    let cols = dense_columns(&m);
    let weights: Vec<f64> = dem.mechanisms.iter().map(|m| prior_llr(m.probability)).collect();
    let target: Vec<u64> = {
        let mut t = syndrome.words().to_vec();
        t.resize(words, 0);
        t
    };
    // lexicographic order on (e_0, e_1, ...) equals numeric order with bit 0 as the
    // most significant digit
    let key = |mask: u64| -> u64 { mask.reverse_bits() >> (64 - n.max(1)) };
    let mut best: Option<(f64, u64)> = None;
    let mut s = vec![0u64; words];
    let mut mask = 0u64;
    for step in 0..(1u64 << n) {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            mask ^= 1 << bit;
            for (x, y) in s.iter_mut().zip(&cols[bit]) {
                *x ^= y;
            }
        }
        if s != target {
            continue;
        }
        let cost: f64 = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
        let better = match best {
            None => true,
            Some((bc, bm)) => cost < bc || (cost == bc && key(mask) < key(bm)),
        };
        if better {
            best = Some((cost, mask));
        }
    }
    let (_, mask) = best.ok_or(DecodeError::Unsatisfiable)?;
    let e = BitVector::from_indices(n, (0..n).filter(|&i| mask >> i & 1 == 1));
    Ok(DecodeResult {
        predicted_observables: dem.observable_flips(&e),
        error_estimate: e,
        bp_converged: false,
        iterations_used: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogicalErrorRate {
    pub shots: usize,
    pub failures: usize,
    pub rate: f64,
    pub stderr: f64,
    pub rounds: usize,
    pub rate_per_round: f64,
}

impl LogicalErrorRate {
    pub fn new(shots: usize, failures: usize, rounds: usize) -> Self {
        let rate = if shots == 0 { 0.0 } else { failures as f64 / shots as f64 };
        let stderr = if shots == 0 { 0.0 } else { (rate * (1.0 - rate) / shots as f64).sqrt() };
        LogicalErrorRate { shots, failures, rate, stderr, rounds, rate_per_round: per_round(rate, rounds) }
    }
}

/// Converts a total failure rate over `rounds` rounds into a per-round rate.
pub fn per_round(rate: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - rate).powf(1.0 / rounds.max(1) as f64)
}

/// Where shots come from when estimating a logical error rate.
#[derive(Debug, Clone, Copy)]
pub enum ShotSource<'a> {
    Circuit(&'a Circuit),
    Dem(&'a DetectorErrorModel),
}

/// Counts shots whose decoded observable prediction differs from the actual flips.
pub fn count_failures(decoder: &BpOsdDecoder, batch: &SampleBatch) -> usize {
    (0..batch.shots())
        .filter(|&shot| {
            let syndrome = batch.detectors.row(shot);
            match decoder.decode(&syndrome) {
                Ok(res) => res.predicted_observables != batch.observables.row(shot),
                // decode failure is counted as a logical failure
                Err(_) => true,
            }
        })
        .count()
}

/// Samples and decodes `shots` shots; the count depends only on the seed.
pub fn logical_error_rate(
    source: ShotSource<'_>,
    decoder: &BpOsdDecoder,
    shots: usize,
    rounds: usize,
    seed: u64,
) -> LogicalErrorRate {
    let failures: usize = chunk_sizes(shots)
        .into_par_iter()
        .enumerate()
        .map(|(chunk, n)| {
            let mut rng = chunk_rng(seed, chunk);
            let batch = match source {
                ShotSource::Circuit(c) => sample_chunk(c, n, &mut rng),
                ShotSource::Dem(d) => sample_dem_chunk(d, n, &mut rng),
            };
            count_failures(decoder, &batch)
        })
        .sum();
    LogicalErrorRate::new(shots, failures, rounds)
}
