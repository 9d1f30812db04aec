//! Layered Clifford circuit representation and its line-oriented text format.
//!
//! The measurement tape is global and append-only. Detector and observable
//! annotations refer to absolute record indices internally and are written
//! relative to the end of the tape (`rec[-k]`) in text form.

use std::fmt::Write as _;

use crate::error::{CircuitError, ParseError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseChannel {
    /// Uniform single-qubit depolarizing channel of total strength `p`.
    Depolarize1(f64),
    /// Uniform two-qubit depolarizing channel of total strength `p`.
    Depolarize2(f64),
    XError(f64),
}

impl NoiseChannel {
    pub fn probability(&self) -> f64 {
        match *self {
            NoiseChannel::Depolarize1(p) | NoiseChannel::Depolarize2(p) | NoiseChannel::XError(p) => p,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            NoiseChannel::Depolarize2(_) => 2,
            _ => 1,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            NoiseChannel::Depolarize1(_) => "DEPOLARIZE1",
            NoiseChannel::Depolarize2(_) => "DEPOLARIZE2",
            NoiseChannel::XError(_) => "X_ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    /// Reset to `|0>`.
    Reset(Vec<usize>),
    H(Vec<usize>),
    /// CNOTs given as `(control, target)` pairs.
    Cx(Vec<(usize, usize)>),
    /// Z-basis measurement; each target appends one record.
    Measure(Vec<usize>),
    Tick,
    /// Noise channel; for two-qubit channels the targets are consecutive pairs.
    Noise(NoiseChannel, Vec<usize>),
    /// Absolute measurement-record indices whose parity is deterministic.
    Detector(Vec<usize>),
    /// Records XORed into logical observable `index`.
    Observable(usize, Vec<usize>),
}

impl Instruction {
    pub fn name(&self) -> &'static str {
        match self {
            Instruction::Reset(_) => "R",
            Instruction::H(_) => "H",
            Instruction::Cx(_) => "CX",
            Instruction::Measure(_) => "M",
            Instruction::Tick => "TICK",
            Instruction::Noise(ch, _) => ch.name(),
            Instruction::Detector(_) => "DETECTOR",
            Instruction::Observable(..) => "OBSERVABLE",
        }
    }

    /// Qubits acted on by a gate, measurement or reset (not noise or annotations).
    pub fn gate_qubits(&self) -> Vec<usize> {
        match self {
            Instruction::Reset(t) | Instruction::H(t) | Instruction::Measure(t) => t.clone(),
            Instruction::Cx(pairs) => pairs.iter().flat_map(|&(c, t)| [c, t]).collect(),
            _ => Vec::new(),
        }
    }

    fn max_qubit(&self) -> Option<usize> {
        match self {
            Instruction::Reset(t) | Instruction::H(t) | Instruction::Measure(t) | Instruction::Noise(_, t) => {
                t.iter().copied().max()
            }
            Instruction::Cx(pairs) => pairs.iter().map(|&(c, t)| c.max(t)).max(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Circuit {
    instructions: Vec<Instruction>,
    qubit_count: usize,
    measurement_count: usize,
    detectors: Vec<Vec<usize>>,
    observables: Vec<Vec<usize>>,
}

impl Circuit {
    pub fn new() -> Self {
        Circuit::default()
    }

    /// Empty circuit that declares at least `n` qubits.
    pub fn with_qubits(n: usize) -> Self {
        Circuit { qubit_count: n, ..Circuit::default() }
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn measurement_count(&self) -> usize {
        self.measurement_count
    }

    pub fn detectors(&self) -> &[Vec<usize>] {
        &self.detectors
    }

    pub fn observables(&self) -> &[Vec<usize>] {
        &self.observables
    }

    pub fn num_detectors(&self) -> usize {
        self.detectors.len()
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    pub fn has_noise(&self) -> bool {
        self.instructions.iter().any(|i| matches!(i, Instruction::Noise(..)))
    }

    /// Appends an instruction after validating it against the current tape.
    pub fn push(&mut self, inst: Instruction) -> Result<(), CircuitError> {
        let index = self.instructions.len();
        match &inst {
            Instruction::Cx(pairs) => {
                for &(c, t) in pairs {
                    if c == t {
                        return Err(CircuitError::RepeatedTarget(c));
                    }
                }
            }
            Instruction::Noise(ch, targets) => {
                if ch.arity() == 2 {
                    if targets.len() % 2 != 0 {
                        return Err(CircuitError::Unsupported {
                            index,
                            name: inst.name().into(),
                            reason: "two-qubit channel needs an even number of targets".into(),
                        });
                    }
                    for pair in targets.chunks(2) {
                        if pair[0] == pair[1] {
                            return Err(CircuitError::RepeatedTarget(pair[0]));
                        }
                    }
                }
                let p = ch.probability();
                if !(0.0..=1.0).contains(&p) {
                    return Err(CircuitError::Unsupported {
                        index,
                        name: inst.name().into(),
                        reason: format!("probability {p} outside [0, 1]"),
                    });
                }
            }
            Instruction::Detector(recs) | Instruction::Observable(_, recs) => {
                if let Some(&bad) = recs.iter().find(|&&r| r >= self.measurement_count) {
                    return Err(CircuitError::Unsupported {
                        index,
                        name: inst.name().into(),
                        reason: format!("record {bad} not yet measured"),
                    });
                }
            }
            _ => {}
        }
        if let Some(q) = inst.max_qubit() {
            self.qubit_count = self.qubit_count.max(q + 1);
        }
        match &inst {
            Instruction::Measure(t) => self.measurement_count += t.len(),
            Instruction::Detector(recs) => self.detectors.push(recs.clone()),
            Instruction::Observable(i, recs) => {
                if self.observables.len() <= *i {
                    self.observables.resize(*i + 1, Vec::new());
                }
                let obs = &mut self.observables[*i];
                for &r in recs {
                    match obs.binary_search(&r) {
                        Ok(pos) => {
                            obs.remove(pos);
                        }
                        Err(pos) => obs.insert(pos, r),
                    }
                }
            }
            _ => {}
        }
        self.instructions.push(inst);
        Ok(())
    }

    pub fn reset(&mut self, qubits: &[usize]) {
        if !qubits.is_empty() {
            self.push(Instruction::Reset(qubits.to_vec())).expect("reset is always valid");
        }
    }

    pub fn h(&mut self, qubits: &[usize]) {
        if !qubits.is_empty() {
            self.push(Instruction::H(qubits.to_vec())).expect("H is always valid");
        }
    }

    pub fn cx(&mut self, pairs: &[(usize, usize)]) -> Result<(), CircuitError> {
        if pairs.is_empty() {
            return Ok(());
        }
        self.push(Instruction::Cx(pairs.to_vec()))
    }

    /// Measures `qubits` and returns the absolute record index of the first result.
    pub fn measure(&mut self, qubits: &[usize]) -> usize {
        let first = self.measurement_count;
        if !qubits.is_empty() {
            self.push(Instruction::Measure(qubits.to_vec())).expect("measurement is always valid");
        }
        first
    }

    pub fn tick(&mut self) {
        self.instructions.push(Instruction::Tick);
    }

    pub fn detector(&mut self, records: &[usize]) -> Result<(), CircuitError> {
        self.push(Instruction::Detector(records.to_vec()))
    }

    pub fn observable(&mut self, index: usize, records: &[usize]) -> Result<(), CircuitError> {
        self.push(Instruction::Observable(index, records.to_vec()))
    }

    /// Instruction slices between `TICK`s (ticks excluded, empty layers kept).
    pub fn layers(&self) -> Vec<&[Instruction]> {
        self.instructions.split(|i| matches!(i, Instruction::Tick)).collect()
    }

    /// Number of tick-delimited layers containing at least one CNOT.
    pub fn cnot_layer_count(&self) -> usize {
        self.layers()
            .iter()
            .filter(|layer| layer.iter().any(|i| matches!(i, Instruction::Cx(p) if !p.is_empty())))
            .count()
    }

    /// All CNOT pairs in program order.
    pub fn cnot_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.instructions.iter().flat_map(|i| match i {
            Instruction::Cx(p) => p.clone(),
            _ => Vec::new(),
        })
    }

    /// Checks that no qubit is touched by two gates within one layer.
    pub fn check_layers(&self) -> Result<(), CircuitError> {
        for (li, layer) in self.layers().iter().enumerate() {
            let mut seen = vec![false; self.qubit_count];
            for inst in layer.iter() {
                for q in inst.gate_qubits() {
                    if std::mem::replace(&mut seen[q], true) {
                        return Err(CircuitError::LayerConflict { qubit: q, layer: li });
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy of this circuit without any noise channels.
    pub fn without_noise(&self) -> Circuit {
        let mut out = Circuit::with_qubits(self.qubit_count);
        for inst in &self.instructions {
            if !matches!(inst, Instruction::Noise(..)) {
                out.push_unchecked(inst.clone());
            }
        }
        out
    }

    /// Rebuilds bookkeeping for an instruction already known to be valid.
    pub(crate) fn push_unchecked(&mut self, inst: Instruction) {
        if matches!(inst, Instruction::Tick) {
            self.tick();
        } else {
            self.push(inst).expect("instruction came from a valid circuit");
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut recorded = 0usize;
        for inst in &self.instructions {
            match inst {
                Instruction::Reset(t) | Instruction::H(t) | Instruction::Measure(t) => {
                    out.push_str(inst.name());
                    for q in t {
                        let _ = write!(out, " {q}");
                    }
                    if matches!(inst, Instruction::Measure(_)) {
                        recorded += t.len();
                    }
                }
                Instruction::Cx(pairs) => {
                    out.push_str("CX");
                    for (c, t) in pairs {
                        let _ = write!(out, " {c} {t}");
                    }
                }
                Instruction::Tick => out.push_str("TICK"),
                Instruction::Noise(ch, t) => {
                    let _ = write!(out, "{}({})", ch.name(), ch.probability());
                    for q in t {
                        let _ = write!(out, " {q}");
                    }
                }
                Instruction::Detector(recs) => {
                    out.push_str("DETECTOR");
                    for r in recs {
                        let _ = write!(out, " rec[-{}]", recorded - r);
                    }
                }
                Instruction::Observable(i, recs) => {
                    let _ = write!(out, "OBSERVABLE({i})");
                    for r in recs {
                        let _ = write!(out, " rec[-{}]", recorded - r);
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format. Blank lines and lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Circuit, ParseError> {
        let mut c = Circuit::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let inst = parse_line(line, c.measurement_count).map_err(|e| e.at_line(lineno + 1))?;
            if matches!(inst, Instruction::Tick) {
                c.tick();
            } else {
                c.push(inst).map_err(|e| ParseError::new(e.to_string()).at_line(lineno + 1))?;
            }
        }
        Ok(c)
    }
}

fn parse_line(line: &str, recorded: usize) -> Result<Instruction, ParseError> {
    let mut parts = line.split_whitespace();
    let head = parts.next().expect("line is not empty");
    let (name, arg) = match head.find('(') {
        Some(open) => {
            let close = head
                .strip_suffix(')')
                .ok_or_else(|| ParseError::new(format!("unterminated argument in {head:?}")))?;
            (&head[..open], Some(&close[open + 1..]))
        }
        None => (head, None),
    };
    let rest: Vec<&str> = parts.collect();
    let qubits = || -> Result<Vec<usize>, ParseError> {
        rest.iter()
            .map(|s| s.parse::<usize>().map_err(|_| ParseError::new(format!("bad qubit index {s:?}"))))
            .collect()
    };
    let records = || -> Result<Vec<usize>, ParseError> {
        rest.iter()
            .map(|s| {
                let back = s
                    .strip_prefix("rec[-")
                    .and_then(|s| s.strip_suffix(']'))
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| ParseError::new(format!("bad record reference {s:?}")))?;
                recorded
                    .checked_sub(back)
                    .ok_or_else(|| ParseError::new(format!("rec[-{back}] reaches before the first measurement")))
            })
            .collect()
    };
    let prob = || -> Result<f64, ParseError> {
        let a = arg.ok_or_else(|| ParseError::new(format!("{name} needs a probability argument")))?;
        a.parse::<f64>().map_err(|_| ParseError::new(format!("bad probability {a:?}")))
    };
    let no_arg = || -> Result<(), ParseError> {
        match arg {
            None => Ok(()),
            Some(_) => Err(ParseError::new(format!("{name} takes no argument"))),
        }
    };
    Ok(match name {
        "R" => {
            no_arg()?;
            Instruction::Reset(qubits()?)
        }
        "H" => {
            no_arg()?;
            Instruction::H(qubits()?)
        }
        "M" => {
            no_arg()?;
            Instruction::Measure(qubits()?)
        }
        "CX" => {
            no_arg()?;
            let q = qubits()?;
            if q.len() % 2 != 0 {
                return Err(ParseError::new("CX needs an even number of targets"));
            }
            Instruction::Cx(q.chunks(2).map(|p| (p[0], p[1])).collect())
        }
        "TICK" => {
            no_arg()?;
            if !rest.is_empty() {
                return Err(ParseError::new("TICK takes no targets"));
            }
            Instruction::Tick
        }
        "DEPOLARIZE1" => Instruction::Noise(NoiseChannel::Depolarize1(prob()?), qubits()?),
        "DEPOLARIZE2" => Instruction::Noise(NoiseChannel::Depolarize2(prob()?), qubits()?),
        "X_ERROR" => Instruction::Noise(NoiseChannel::XError(prob()?), qubits()?),
        "DETECTOR" => {
            no_arg()?;
            Instruction::Detector(records()?)
        }
        "OBSERVABLE" => {
            let a = arg.ok_or_else(|| ParseError::new("OBSERVABLE needs an index argument"))?;
            let idx = a.parse::<usize>().map_err(|_| ParseError::new(format!("bad observable index {a:?}")))?;
            Instruction::Observable(idx, records()?)
        }
        other => return Err(ParseError::new(format!("unknown instruction {other:?}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "R 0 1 2
TICK
H 2
DEPOLARIZE1(0.0001) 2
TICK
CX 0 1 2 0
DEPOLARIZE2(0.001) 0 1 2 0
TICK
X_ERROR(0.005) 1
M 1
DETECTOR rec[-1]
M 0 2
DETECTOR rec[-2] rec[-3]
OBSERVABLE(0) rec[-1]
";

    #[test]
    fn sample_round_trips() {
        let c = Circuit::from_text(SAMPLE).unwrap();
        assert_eq!(c.qubit_count(), 3);
        assert_eq!(c.measurement_count(), 3);
        assert_eq!(c.detectors(), &[vec![0], vec![1, 0]]);
        assert_eq!(c.observables(), &[vec![2]]);
        assert_eq!(c.to_text(), SAMPLE);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(Circuit::from_text("CX 0 0").is_err());
        assert!(Circuit::from_text("CX 0 1 2").is_err());
        assert!(Circuit::from_text("M 0\nDETECTOR rec[-2]").is_err());
        assert!(Circuit::from_text("FOO 1").is_err());
        assert!(Circuit::from_text("X_ERROR 1").is_err());
        assert!(Circuit::from_text("DEPOLARIZE2(0.1) 0 1 2").is_err());
    }

    #[test]
    fn layer_counting() {
        let c = Circuit::from_text("CX 0 1\nTICK\nH 0\nTICK\nCX 1 0\nCX 2 3\nTICK\n").unwrap();
        assert_eq!(c.cnot_layer_count(), 2);
        assert_eq!(Circuit::new().cnot_layer_count(), 0);
    }

    #[test]
    fn layer_conflicts_are_detected() {
        let c = Circuit::from_text("CX 0 1\nH 1\n").unwrap();
        assert!(c.check_layers().is_err());
        let c = Circuit::from_text("CX 0 1\nTICK\nH 1\n").unwrap();
        assert!(c.check_layers().is_ok());
    }

    fn arb_instruction() -> impl Strategy<Value = String> {
        prop_oneof![
            proptest::collection::vec(0usize..8, 1..4).prop_map(|q| format!("R {}", join(&q))),
            proptest::collection::vec(0usize..8, 1..4).prop_map(|q| format!("H {}", join(&q))),
            proptest::collection::vec(0usize..8, 1..4).prop_map(|q| format!("M {}", join(&q))),
            (0usize..8, 1usize..8).prop_map(|(a, d)| format!("CX {} {}", a, (a + d) % 8)),
            Just("TICK".to_string()),
            (0.0f64..0.5, proptest::collection::vec(0usize..8, 1..3))
                .prop_map(|(p, q)| format!("DEPOLARIZE1({p}) {}", join(&q))),
            (0.0f64..0.5, 0usize..8).prop_map(|(p, q)| format!("X_ERROR({p}) {q}")),
        ]
    }

    fn join(q: &[usize]) -> String {
        q.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    }

    proptest! {
        #[test]
        fn text_round_trip(lines in proptest::collection::vec(arb_instruction(), 0..30)) {
            let mut text = String::new();
            let mut measured = 0usize;
            for l in &lines {
                text.push_str(l);
                text.push('\n');
                if let Some(rest) = l.strip_prefix("M ") {
                    measured += rest.split_whitespace().count();
                    text.push_str(&format!("DETECTOR rec[-1] rec[-{measured}]\n"));
                }
            }
            let c = Circuit::from_text(&text).unwrap();
            prop_assert_eq!(c.to_text(), text.clone());
            prop_assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
        }
    }
}
