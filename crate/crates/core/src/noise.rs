//! Circuit-level noise models.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction, NoiseChannel};
use crate::error::{NoiseError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    /// Superconducting-inspired: `p` on CNOTs, `p/10` on single-qubit gates, `5p`
    /// measurement flips, `2p` idling during measurement and `2p` reset flips.
    Si1000,
    /// The same `p` on every operation, no idle noise.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub p: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self, NoiseError> {
        let (model, max) = match kind {
            NoiseKind::Si1000 => ("si1000", 0.1),
            NoiseKind::Uniform => ("uniform", 0.5),
        };
        if !(0.0..=max).contains(&p) || p.is_nan() {
            return Err(NoiseError::OutOfRange { model, p, max });
        }
        Ok(NoiseModel { kind, p })
    }

    pub fn si1000(p: f64) -> Result<Self, NoiseError> {
        NoiseModel::new(NoiseKind::Si1000, p)
    }

    pub fn uniform(p: f64) -> Result<Self, NoiseError> {
        NoiseModel::new(NoiseKind::Uniform, p)
    }

    /// Parses `si1000:0.002`, `uniform:0.001` or `none`.
    pub fn parse_option(s: &str) -> Result<Option<NoiseModel>, ParseError> {
        if s.trim().eq_ignore_ascii_case("none") {
            return Ok(None);
        }
        s.parse().map(Some)
    }

    fn cx_rate(&self) -> f64 {
        self.p
    }

    fn single_rate(&self) -> f64 {
        match self.kind {
            NoiseKind::Si1000 => self.p / 10.0,
            NoiseKind::Uniform => self.p,
        }
    }

    fn measure_rate(&self) -> f64 {
        match self.kind {
            NoiseKind::Si1000 => 5.0 * self.p,
            NoiseKind::Uniform => self.p,
        }
    }

    fn reset_rate(&self) -> f64 {
        match self.kind {
            NoiseKind::Si1000 => 2.0 * self.p,
            NoiseKind::Uniform => self.p,
        }
    }

    fn idle_rate(&self) -> f64 {
        match self.kind {
            NoiseKind::Si1000 => 2.0 * self.p,
            NoiseKind::Uniform => 0.0,
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            NoiseKind::Si1000 => "si1000",
            NoiseKind::Uniform => "uniform",
        };
        write!(f, "{kind}:{}", self.p)
    }
}

impl FromStr for NoiseModel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, p) = s.split_once(':').ok_or_else(|| ParseError::new(format!("noise spec {s:?} is not kind:p")))?;
        let kind = match kind.trim().to_ascii_lowercase().as_str() {
            "si1000" => NoiseKind::Si1000,
            "uniform" | "depolarizing" => NoiseKind::Uniform,
            other => return Err(ParseError::new(format!("unknown noise model {other:?}"))),
        };
        let p: f64 = p.trim().parse().map_err(|_| ParseError::new(format!("bad noise strength {p:?}")))?;
        NoiseModel::new(kind, p).map_err(|e| ParseError::new(e.to_string()))
    }
}

fn channel(c: &mut Circuit, ch: NoiseChannel, targets: Vec<usize>) {
    if ch.probability() > 0.0 && !targets.is_empty() {
        c.push(Instruction::Noise(ch, targets)).expect("noise targets come from valid gates");
    }
}

/// Inserts noise channels around the gates of a noise-free circuit.
pub fn apply_noise(c: &Circuit, model: &NoiseModel) -> Result<Circuit, NoiseError> {
    if c.has_noise() {
        return Err(NoiseError::AlreadyNoisy);
    }
    let n = c.qubit_count();
    let mut out = Circuit::with_qubits(n);
    let layers = c.layers();
    let last = layers.len() - 1;
    for (li, layer) in layers.iter().enumerate() {
        let mut measured: Option<Vec<bool>> = None;
        for inst in layer.iter() {
            match inst {
                Instruction::Reset(t) => {
                    out.push_unchecked(inst.clone());
                    channel(&mut out, NoiseChannel::XError(model.reset_rate()), t.clone());
                }
                Instruction::H(t) => {
                    out.push_unchecked(inst.clone());
                    channel(&mut out, NoiseChannel::Depolarize1(model.single_rate()), t.clone());
                }
                Instruction::Cx(pairs) => {
                    out.push_unchecked(inst.clone());
                    let flat = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                    channel(&mut out, NoiseChannel::Depolarize2(model.cx_rate()), flat);
                }
                Instruction::Measure(t) => {
                    channel(&mut out, NoiseChannel::XError(model.measure_rate()), t.clone());
                    out.push_unchecked(inst.clone());
                    let mask = measured.get_or_insert_with(|| vec![false; n]);
                    for &q in t {
                        mask[q] = true;
                    }
                }
                _ => out.push_unchecked(inst.clone()),
            }
        }
        if let Some(mask) = measured {
            let idle = (0..n).filter(|&q| !mask[q]).collect();
            channel(&mut out, NoiseChannel::Depolarize1(model.idle_rate()), idle);
        }
        if li != last {
            out.tick();
        }
    }
    Ok(out)
}
