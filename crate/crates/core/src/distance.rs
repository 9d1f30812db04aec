//! Upper bounds on circuit-level distance by decoding random logical classes against
//! a trivial detector syndrome.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoders::{prior_llr, BpConfig, BpOsdDecoder, DecoderConfig, OsdConfig};
use crate::dem::{chunk_rng, CheckMatrix, DetectorErrorModel};
use crate::error::DecodeError;
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    pub samples: usize,
    pub decoder: DecoderConfig,
    /// Centre of the per-sample prior distribution.
    pub base_p: f64,
    /// Priors are drawn log-uniformly from `[base_p/jitter, base_p*jitter]` for every
    /// sample, so repeated samples explore different low-weight solutions.
    pub jitter: f64,
    /// Extra OSD passes per sample, each ordering the current witness first with
    /// freshly jittered reliabilities for the remaining columns.
    pub refinements: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            samples: 1000,
            decoder: DecoderConfig { bp: BpConfig::default(), osd: OsdConfig::osd_cs(10) },
            base_p: 0.01,
            jitter: 2.0,
            refinements: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistanceEstimate {
    pub upper_bound: usize,
    /// Mechanism indices of the lightest verified witness.
    pub witness: Vec<usize>,
    pub samples_used: usize,
}

/// Stacks detector rows on top of observable rows.
fn stacked(dem: &DetectorErrorModel) -> CheckMatrix {
    let nd = dem.detector_count;
    CheckMatrix::from_columns(
        nd + dem.observable_count,
        dem.mechanisms
            .iter()
            .map(|m| m.detectors.iter().copied().chain(m.observables.iter().map(|o| nd + o)).collect())
            .collect(),
    )
}

fn random_logical(rng: &mut impl Rng, k: usize) -> BitVector {
    loop {
        let v = BitVector::from_bools(&(0..k).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
        if !v.is_zero() {
            return v;
        }
    }
}

/// Searches for the lightest set of mechanisms that triggers no detector but flips at
/// least one observable. Each sample draws a random nonzero logical class and its own
/// jittered priors from an independent stream of `seed`; the minimum over samples is
/// returned, so more samples can only lower the bound.
pub fn estimate_circuit_distance(
    dem: &DetectorErrorModel,
    cfg: &DistanceConfig,
    seed: u64,
) -> Result<DistanceEstimate, DecodeError> {
    let nd = dem.detector_count;
    let k = dem.observable_count;
    if k == 0 || dem.mechanisms.is_empty() {
        return Err(DecodeError::Config("distance estimation needs mechanisms and observables".into()));
    }
    if cfg.samples == 0 || cfg.jitter < 1.0 || !(cfg.base_p > 0.0 && cfg.base_p < 0.5) {
        return Err(DecodeError::Config("need samples >= 1, jitter >= 1 and 0 < base_p < 0.5".into()));
    }
    let n = dem.mechanisms.len();
    let matrix = stacked(dem);
    let observables = dem.observable_matrix();
    let ones = vec![1.0; n];
    let base = vec![prior_llr(cfg.base_p); n];
    let decoder = BpOsdDecoder::from_parts(matrix, observables, base, ones, cfg.decoder)?;
    let span = cfg.jitter.ln();
    let found: Vec<Option<Vec<usize>>> = (0..cfg.samples)
        .into_par_iter()
        .map(|sample| {
            let mut rng = chunk_rng(seed, sample);
            let l = random_logical(&mut rng, k);
            let priors: Vec<f64> = (0..n).map(|_| prior_llr(cfg.base_p * (rng.gen_range(-span..=span)).exp())).collect();
            let mut syndrome = BitVector::zeros(nd);
            syndrome = syndrome.concat(&l);
            let bp = decoder.bp_with_priors(&syndrome, &priors).ok()?;
            let mut best: Option<BitVector> = bp.converged.then(|| bp.hard.clone());
            if let Ok(e) = decoder.osd(&syndrome, &bp.llrs, &cfg.decoder.osd) {
                if best.as_ref().map_or(true, |b| e.weight() < b.weight()) {
                    best = Some(e);
                }
            }
            let mut e = best?;
            for _ in 0..cfg.refinements {
                let soft: Vec<f64> = (0..n)
                    .map(|i| if e.get(i) { -1.0 - rng.gen::<f64>() } else { priors[i] * (rng.gen_range(-span..=span)).exp() })
                    .collect();
                match decoder.osd(&syndrome, &soft, &cfg.decoder.osd) {
                    Ok(f) if f.weight() < e.weight() => e = f,
                    _ => {}
                }
            }
            // keep only verified witnesses
            let flips = dem.observable_flips(&e);
            let dets = dem.detector_matrix().syndrome(&e);
            (dets.is_zero() && !flips.is_zero()).then(|| e.iter_ones().collect())
        })
        .collect();
    let witness = found
        .into_iter()
        .flatten()
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
        .ok_or(DecodeError::Unsatisfiable)?;
    Ok(DistanceEstimate { upper_bound: witness.len(), witness, samples_used: cfg.samples })
}
