//! Syndrome-extraction schedules and Z-basis memory experiments.
//!
//! A round is a Z-check block followed by an X-check block (the conventional surface
//! circuit measures both types in one block). A stabilizer whose coupler to data qubit
//! `r` was removed is measured through a router ancilla `R` of the opposite type that
//! touches `r` and a data qubit `q` already in the stabilizer's support:
//!
//! ```text
//! t1: r -> R    t2: R -> q    t3: q -> S    t4: R -> q    t5: r -> R
//! ```
//!
//! `S` ends up with the parity of `q` and `r`, `R` returns to `|0>` and `q` is restored.
//! X-type gadgets reverse every CNOT and prepare and measure in the X basis.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::codes::{build_bb_code, build_rotated_surface, plaquette_corners, BBSpec, CodeFamily, CssCode, Plaquette};
use crate::error::{CircuitError, Error, LayoutError};
use crate::flow::StabilizerFlow;
use crate::layout::{
    apply_removal, build_bb_layout, check_ancillas, plaquette_coord, surface_hex_layout, surface_square_layout, BbIds,
    ConnectivityGraph, RemovalScheme,
};
use crate::noise::{apply_noise, NoiseModel};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    SurfaceConventional,
    SurfaceRouted,
    BbThreeQuartersLr,
    BbHalfLr,
    BbFullSequential,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::SurfaceConventional => "conventional",
            ScheduleKind::SurfaceRouted => "routed",
            ScheduleKind::BbThreeQuartersLr => "three-quarters-lr",
            ScheduleKind::BbHalfLr => "half-lr",
            ScheduleKind::BbFullSequential => "full-sequential",
        }
    }

    pub fn parse(s: &str) -> Option<ScheduleKind> {
        Some(match s {
            "conventional" | "surface-conventional" => ScheduleKind::SurfaceConventional,
            "routed" | "surface-routed" => ScheduleKind::SurfaceRouted,
            "three-quarters-lr" | "3/4" | "tq" => ScheduleKind::BbThreeQuartersLr,
            "half-lr" | "1/2" | "half" => ScheduleKind::BbHalfLr,
            "full-sequential" | "full" => ScheduleKind::BbFullSequential,
            _ => return None,
        })
    }

    pub fn is_surface(self) -> bool {
        matches!(self, ScheduleKind::SurfaceConventional | ScheduleKind::SurfaceRouted)
    }

    pub fn removal(self) -> RemovalScheme {
        match self {
            ScheduleKind::SurfaceConventional | ScheduleKind::BbFullSequential => RemovalScheme::Full,
            ScheduleKind::SurfaceRouted => RemovalScheme::SurfaceHex,
            ScheduleKind::BbThreeQuartersLr => RemovalScheme::ThreeQuartersLR,
            ScheduleKind::BbHalfLr => RemovalScheme::HalfLR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemoryBasis {
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    pub rounds: usize,
    pub flag_detectors: bool,
    pub memory_basis: MemoryBasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckType {
    X,
    Z,
}

/// One stabilizer measured inside a block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub check_type: CheckType,
    /// Row of `hx` or `hz`.
    pub check: usize,
    pub ancilla: usize,
    pub support: Vec<usize>,
    pub router: Option<usize>,
}

/// Gate content of one syndrome-extraction block.
#[derive(Debug, Clone, Default)]
pub struct Block {
    pub layers: Vec<Vec<(usize, usize)>>,
    pub gadgets: Vec<Gadget>,
}

impl Block {
    fn layer(&mut self, i: usize) -> &mut Vec<(usize, usize)> {
        if self.layers.len() <= i {
            self.layers.resize(i + 1, Vec::new());
        }
        &mut self.layers[i]
    }

    fn ancillas(&self, t: CheckType) -> Vec<usize> {
        self.gadgets.iter().filter(|g| g.check_type == t).map(|g| g.ancilla).collect()
    }

    /// Routers, with the check type of the stabilizer they serve.
    fn routers(&self) -> Vec<(usize, CheckType)> {
        self.gadgets.iter().filter_map(|g| g.router.map(|r| (r, g.check_type))).collect()
    }

    /// Qubits prepared and measured in the X basis: X-check ancillas and routers of
    /// X-type gadgets.
    fn x_basis(&self) -> Vec<usize> {
        let mut v = self.ancillas(CheckType::X);
        v.extend(self.routers().into_iter().filter(|r| r.1 == CheckType::X).map(|r| r.0));
        v
    }

    /// Measured qubits in record order: Z-check ancillas, X-check ancillas, routers.
    pub fn measured(&self) -> Vec<usize> {
        let mut v = self.ancillas(CheckType::Z);
        v.extend(self.ancillas(CheckType::X));
        v.extend(self.routers().into_iter().map(|r| r.0));
        v
    }
}

/// A code, its layout and the blocks making up one round.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub code: CssCode,
    pub layout: ConnectivityGraph,
    pub blocks: Vec<Block>,
}

fn support(m: &crate::gf2::BitMatrix, r: usize) -> Vec<usize> {
    m.row_ones(r).collect()
}

fn surface_conventional_block(code: &CssCode, g: &ConnectivityGraph, d: usize) -> Result<Block, Error> {
    let CodeFamily::RotatedSurface { x_checks, z_checks, .. } = &code.family else { unreachable!() };
    let (xa, za) = check_ancillas(g, code)?;
    let mut block = Block::default();
    // corner order per layer: X checks TL BL TR BR, Z checks TL TR BL BR
    const X_ORDER: [usize; 4] = [0, 2, 1, 3];
    const Z_ORDER: [usize; 4] = [0, 1, 2, 3];
    for (i, p) in z_checks.iter().enumerate() {
        let corners = plaquette_corners(d, *p);
        for (layer, &c) in Z_ORDER.iter().enumerate() {
            if let Some(q) = corners[c] {
                block.layer(layer).push((q, za[i]));
            }
        }
        block.gadgets.push(Gadget { check_type: CheckType::Z, check: i, ancilla: za[i], support: support(&code.hz, i), router: None });
    }
    for (i, p) in x_checks.iter().enumerate() {
        let corners = plaquette_corners(d, *p);
        for (layer, &c) in X_ORDER.iter().enumerate() {
            if let Some(q) = corners[c] {
                block.layer(layer).push((xa[i], q));
            }
        }
        block.gadgets.push(Gadget { check_type: CheckType::X, check: i, ancilla: xa[i], support: support(&code.hx, i), router: None });
    }
    Ok(block)
}

fn router_at(g: &ConnectivityGraph, p: Plaquette) -> Result<usize, Error> {
    g.node_at(plaquette_coord(p))
        .ok_or_else(|| LayoutError::Mismatch(format!("no router ancilla at plaquette ({}, {})", p.a, p.b)).into())
}

/// Z block of the routed surface circuit. Each Z plaquette loses its bottom-right
/// coupler `d2` and routes it through the X ancilla below, with `d1` the bottom-left
/// corner.
fn surface_routed_z_block(code: &CssCode, g: &ConnectivityGraph, d: usize) -> Result<Block, Error> {
    let CodeFamily::RotatedSurface { z_checks, .. } = &code.family else { unreachable!() };
    let (_, za) = check_ancillas(g, code)?;
    let mut block = Block::default();
    for (i, p) in z_checks.iter().enumerate() {
        let s = za[i];
        let [tl, tr, bl, br] = plaquette_corners(d, *p);
        let mut router = None;
        if let (Some(d2), Some(d1)) = (br, bl) {
            let r = router_at(g, Plaquette { a: p.a, b: p.b + 1 })?;
            block.layer(0).push((d2, r));
            block.layer(1).push((r, d1));
            block.layer(2).push((d1, s));
            block.layer(3).push((r, d1));
            block.layer(4).push((d2, r));
            router = Some(r);
        } else if let Some(d1) = bl {
            block.layer(2).push((d1, s));
        }
        if let Some(q) = tr {
            block.layer(0).push((q, s));
        }
        if let Some(q) = tl {
            block.layer(1).push((q, s));
        }
        block.gadgets.push(Gadget { check_type: CheckType::Z, check: i, ancilla: s, support: support(&code.hz, i), router });
    }
    Ok(block)
}

/// X block of the routed surface circuit: `d2` is the bottom-right corner, routed
/// through the Z ancilla to the right, and `d1` the top-right corner.
fn surface_routed_x_block(code: &CssCode, g: &ConnectivityGraph, d: usize) -> Result<Block, Error> {
    let CodeFamily::RotatedSurface { x_checks, .. } = &code.family else { unreachable!() };
    let (xa, _) = check_ancillas(g, code)?;
    let mut block = Block::default();
    for (i, p) in x_checks.iter().enumerate() {
        let s = xa[i];
        let [tl, tr, bl, br] = plaquette_corners(d, *p);
        let mut router = None;
        if let (Some(d2), Some(d1)) = (br, tr) {
            let r = router_at(g, Plaquette { a: p.a + 1, b: p.b })?;
            block.layer(0).push((r, d2));
            block.layer(1).push((d1, r));
            block.layer(2).push((s, d1));
            block.layer(3).push((d1, r));
            block.layer(4).push((r, d2));
            router = Some(r);
        } else if let Some(d1) = tr {
            block.layer(2).push((s, d1));
        }
        if let Some(q) = bl {
            block.layer(0).push((s, q));
        }
        if let Some(q) = tl {
            block.layer(1).push((s, q));
        }
        block.gadgets.push(Gadget { check_type: CheckType::X, check: i, ancilla: s, support: support(&code.hx, i), router });
    }
    Ok(block)
}

/// Term order of the unrouted six-layer X block, as indices into
/// `[L(a), L(a+u), L(a+P), R(a), R(a+v), R(a+Q)]`.
const BB_X_ORDER: [usize; 6] = [3, 4, 0, 1, 5, 2];
/// Same for the six-layer Z block over `[L(b), L(b-v), L(b-Q), R(b), R(b-u), R(b-P)]`.
const BB_Z_ORDER: [usize; 6] = [0, 1, 2, 3, 4, 5];

fn bb_z_block(spec: &BBSpec, kind: ScheduleKind, hz: &crate::gf2::BitMatrix) -> Block {
    let ids = BbIds::new(spec);
    let (u, p) = (spec.a_terms[1], spec.a_terms[2]);
    let (v, q) = (spec.b_terms[1], spec.b_terms[2]);
    let mut block = Block::default();
    for beta in 0..spec.size() {
        let s = ids.z(beta);
        let terms = [
            ids.left(beta),
            ids.left(spec.unshift(beta, v)),
            ids.left(spec.unshift(beta, q)),
            ids.right(beta),
            ids.right(spec.unshift(beta, u)),
            ids.right(spec.unshift(beta, p)),
        ];
        let mut router = None;
        match kind {
            ScheduleKind::BbFullSequential => {
                for (layer, &t) in BB_Z_ORDER.iter().enumerate() {
                    block.layer(layer).push((terms[t], s));
                }
            }
            _ => {
                // r = R(b-P); the 3/4 loop is all long-range through X(b-P-Q) and
                // L(b-Q), the 1/2 loop goes through X(b-P) and L(b)
                let r = terms[5];
                let (rt, qd, other) = if kind == ScheduleKind::BbThreeQuartersLr {
                    (ids.x(spec.unshift(spec.unshift(beta, p), q)), terms[2], terms[0])
                } else {
                    (ids.x(spec.unshift(beta, p)), terms[0], terms[2])
                };
                block.layer(0).push((r, rt));
                block.layer(1).push((rt, qd));
                block.layer(2).push((qd, s));
                block.layer(3).push((rt, qd));
                block.layer(3).push((terms[3], s));
                block.layer(4).push((terms[4], s));
                block.layer(5).push((other, s));
                block.layer(6).push((terms[1], s));
                block.layer(7).push((r, rt));
                router = Some(rt);
            }
        }
        block.gadgets.push(Gadget { check_type: CheckType::Z, check: beta, ancilla: s, support: support(hz, beta), router });
    }
    block
}

fn bb_x_block(spec: &BBSpec, kind: ScheduleKind, hx: &crate::gf2::BitMatrix) -> Block {
    let ids = BbIds::new(spec);
    let (u, p) = (spec.a_terms[1], spec.a_terms[2]);
    let (v, q) = (spec.b_terms[1], spec.b_terms[2]);
    let mut block = Block::default();
    for alpha in 0..spec.size() {
        let s = ids.x(alpha);
        let terms = [
            ids.left(alpha),
            ids.left(spec.shift(alpha, u)),
            ids.left(spec.shift(alpha, p)),
            ids.right(alpha),
            ids.right(spec.shift(alpha, v)),
            ids.right(spec.shift(alpha, q)),
        ];
        let mut router = None;
        if kind == ScheduleKind::BbHalfLr {
            // r' = R(a+Q) through router Z(a+Q+u) and q' = L(a+u)
            let r = terms[5];
            let rt = ids.z(spec.shift(spec.shift(alpha, q), u));
            let qd = terms[1];
            block.layer(0).push((rt, r));
            block.layer(1).push((qd, rt));
            block.layer(2).push((s, qd));
            block.layer(3).push((qd, rt));
            block.layer(3).push((s, terms[3]));
            block.layer(4).push((s, terms[4]));
            block.layer(5).push((s, terms[0]));
            block.layer(6).push((s, terms[2]));
            block.layer(7).push((rt, r));
            router = Some(rt);
        } else {
            for (layer, &t) in BB_X_ORDER.iter().enumerate() {
                block.layer(layer).push((s, terms[t]));
            }
        }
        block.gadgets.push(Gadget { check_type: CheckType::X, check: alpha, ancilla: s, support: support(hx, alpha), router });
    }
    block
}

impl Schedule {
    pub fn surface(kind: ScheduleKind, distance: usize) -> Result<Schedule, Error> {
        let code = build_rotated_surface(distance)?;
        let (layout, blocks) = match kind {
            ScheduleKind::SurfaceConventional => {
                let g = surface_square_layout(distance);
                let b = surface_conventional_block(&code, &g, distance)?;
                (g, vec![b])
            }
            ScheduleKind::SurfaceRouted => {
                let g = surface_hex_layout(distance);
                let z = surface_routed_z_block(&code, &g, distance)?;
                let x = surface_routed_x_block(&code, &g, distance)?;
                (g, vec![z, x])
            }
            _ => {
                return Err(LayoutError::SchemeMismatch { scheme: kind.name().into(), layout: "planar".into() }.into())
            }
        };
        Schedule::finish(kind, code, layout, blocks)
    }

    pub fn bb(kind: ScheduleKind, spec: &BBSpec) -> Result<Schedule, Error> {
        if kind.is_surface() {
            return Err(LayoutError::SchemeMismatch { scheme: kind.name().into(), layout: "torus".into() }.into());
        }
        let code = build_bb_code(spec)?;
        let full = build_bb_layout(&code, spec)?;
        let layout = apply_removal(&full, kind.removal(), Some(spec))?;
        let blocks = vec![bb_z_block(spec, kind, &code.hz), bb_x_block(spec, kind, &code.hx)];
        Schedule::finish(kind, code, layout, blocks)
    }

    fn finish(kind: ScheduleKind, code: CssCode, layout: ConnectivityGraph, blocks: Vec<Block>) -> Result<Schedule, Error> {
        let sched = Schedule { kind, code, layout, blocks };
        for block in &sched.blocks {
            for layer in &block.layers {
                for &(a, b) in layer {
                    if !sched.layout.has_edge(a, b) {
                        return Err(CircuitError::MissingCoupler(a, b).into());
                    }
                }
            }
        }
        Ok(sched)
    }

    pub fn qubit_count(&self) -> usize {
        self.layout.node_count()
    }

    /// CNOT layers in one round.
    pub fn layers_per_round(&self) -> usize {
        self.blocks.iter().map(|b| b.layers.len()).sum()
    }

    fn emit_block(&self, c: &mut Circuit, block: &Block) -> Result<usize, CircuitError> {
        let measured = block.measured();
        let xb = block.x_basis();
        c.reset(&measured);
        c.tick();
        if !xb.is_empty() {
            c.h(&xb);
            c.tick();
        }
        for layer in &block.layers {
            c.cx(layer)?;
            c.tick();
        }
        if !xb.is_empty() {
            c.h(&xb);
            c.tick();
        }
        Ok(c.measure(&measured))
    }

    /// A single block as a standalone noise-free circuit, for flow checks.
    pub fn block_circuit(&self, index: usize) -> Circuit {
        let mut c = Circuit::with_qubits(self.qubit_count());
        self.emit_block(&mut c, &self.blocks[index]).expect("block layers are valid");
        c
    }

    /// The flows every block must satisfy: each measured stabilizer lands on its
    /// record, each router record is deterministic, and every stabilizer of the code
    /// passes through unchanged.
    pub fn block_flows(&self, index: usize) -> Vec<StabilizerFlow> {
        let nq = self.qubit_count();
        let block = &self.blocks[index];
        let mut flows = Vec::new();
        let stab = |t: CheckType, support: &[usize]| match t {
            CheckType::Z => PauliString::z_on(nq, support.iter().copied()),
            CheckType::X => PauliString::x_on(nq, support.iter().copied()),
        };
        let measured = block.measured();
        let z_count = block.ancillas(CheckType::Z).len();
        let x_count = block.ancillas(CheckType::X).len();
        let mut z_seen = 0;
        let mut x_seen = 0;
        for g in &block.gadgets {
            let rec = match g.check_type {
                CheckType::Z => {
                    z_seen += 1;
                    z_seen - 1
                }
                CheckType::X => {
                    x_seen += 1;
                    z_count + x_seen - 1
                }
            };
            debug_assert_eq!(measured[rec], g.ancilla);
            flows.push(StabilizerFlow { input: stab(g.check_type, &g.support), output: PauliString::identity(nq), measurements: vec![rec] });
        }
        for i in z_count + x_count..measured.len() {
            flows.push(StabilizerFlow { input: PauliString::identity(nq), output: PauliString::identity(nq), measurements: vec![i] });
        }
        for r in 0..self.code.hx.rows() {
            let p = stab(CheckType::X, &support(&self.code.hx, r));
            flows.push(StabilizerFlow { input: p.clone(), output: p, measurements: vec![] });
        }
        for r in 0..self.code.hz.rows() {
            let p = stab(CheckType::Z, &support(&self.code.hz, r));
            flows.push(StabilizerFlow { input: p.clone(), output: p, measurements: vec![] });
        }
        flows
    }

    /// Noise-free Z-basis memory experiment over `rounds` rounds.
    pub fn memory_circuit(&self, rounds: usize, flag_detectors: bool) -> Result<Circuit, CircuitError> {
        assert!(rounds >= 1, "at least one round is required");
        let n = self.code.n;
        let data: Vec<usize> = (0..n).collect();
        let mut c = Circuit::with_qubits(self.qubit_count());
        c.reset(&data);
        c.tick();
        let mut last_z: Vec<Option<usize>> = vec![None; self.code.hz.rows()];
        let mut last_x: Vec<Option<usize>> = vec![None; self.code.hx.rows()];
        for _ in 0..rounds {
            for block in &self.blocks {
                let first = self.emit_block(&mut c, block)?;
                let zs: Vec<&Gadget> = block.gadgets.iter().filter(|g| g.check_type == CheckType::Z).collect();
                let xs: Vec<&Gadget> = block.gadgets.iter().filter(|g| g.check_type == CheckType::X).collect();
                for (i, g) in zs.iter().enumerate() {
                    let rec = first + i;
                    match last_z[g.check].replace(rec) {
                        Some(prev) => c.detector(&[prev, rec])?,
                        None => c.detector(&[rec])?,
                    }
                }
                for (i, g) in xs.iter().enumerate() {
                    let rec = first + zs.len() + i;
                    if let Some(prev) = last_x[g.check].replace(rec) {
                        c.detector(&[prev, rec])?;
                    }
                }
                if flag_detectors {
                    let routers = block.measured().len() - zs.len() - xs.len();
                    for i in 0..routers {
                        c.detector(&[first + zs.len() + xs.len() + i])?;
                    }
                }
                c.tick();
            }
        }
        let first = c.measure(&data);
        for (r, last) in last_z.iter().enumerate() {
            let mut recs: Vec<usize> = self.code.hz.row_ones(r).map(|q| first + q).collect();
            recs.extend(last.iter().copied());
            c.detector(&recs)?;
        }
        for i in 0..self.code.logical_z.rows() {
            let recs: Vec<usize> = self.code.logical_z.row_ones(i).map(|q| first + q).collect();
            c.observable(i, &recs)?;
        }
        Ok(c)
    }

    pub fn generate(&self, rounds: usize, noise: Option<&NoiseModel>, flag_detectors: bool) -> Result<Circuit, Error> {
        let c = self.memory_circuit(rounds, flag_detectors)?;
        Ok(match noise {
            Some(model) => apply_noise(&c, model)?,
            None => c,
        })
    }
}

pub fn gen_surface_conventional(distance: usize, rounds: usize, noise: Option<&NoiseModel>) -> Result<Circuit, Error> {
    Schedule::surface(ScheduleKind::SurfaceConventional, distance)?.generate(rounds, noise, false)
}

pub fn gen_surface_routed(distance: usize, rounds: usize, noise: Option<&NoiseModel>, flag_detectors: bool) -> Result<Circuit, Error> {
    Schedule::surface(ScheduleKind::SurfaceRouted, distance)?.generate(rounds, noise, flag_detectors)
}

pub fn gen_bb_routed(
    spec: &BBSpec,
    kind: ScheduleKind,
    rounds: usize,
    noise: Option<&NoiseModel>,
    flag_detectors: bool,
) -> Result<Circuit, Error> {
    Schedule::bb(kind, spec)?.generate(rounds, noise, flag_detectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{classical_action, verify_flow};
    use crate::gf2::BitVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_schedules() -> Vec<Schedule> {
        let mut v = vec![
            Schedule::surface(ScheduleKind::SurfaceConventional, 3).unwrap(),
            Schedule::surface(ScheduleKind::SurfaceRouted, 3).unwrap(),
            Schedule::surface(ScheduleKind::SurfaceRouted, 5).unwrap(),
        ];
        let spec = BBSpec::named("bb72").unwrap();
        for kind in [ScheduleKind::BbThreeQuartersLr, ScheduleKind::BbHalfLr, ScheduleKind::BbFullSequential] {
            v.push(Schedule::bb(kind, &spec).unwrap());
        }
        v
    }

    #[test]
    fn layer_counts() {
        let expect = [4, 10, 10, 14, 16, 12];
        for (s, e) in all_schedules().iter().zip(expect) {
            assert_eq!(s.layers_per_round(), e, "{:?}", s.kind);
            let c = s.memory_circuit(3, false).unwrap();
            assert_eq!(c.cnot_layer_count(), 3 * e);
            c.check_layers().unwrap();
            for b in &s.blocks {
                assert!(b.layers.iter().all(|l| !l.is_empty()));
            }
        }
    }

    #[test]
    fn block_flows_verify() {
        for s in all_schedules() {
            for i in 0..s.blocks.len() {
                let c = s.block_circuit(i);
                for f in s.block_flows(i) {
                    assert!(verify_flow(&c, &f), "{:?} block {i}: {} -> {}", s.kind, f.input, f.output);
                }
            }
        }
    }

    #[test]
    fn noiseless_detectors_are_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in all_schedules() {
            // only the Z block is free of H
            if s.kind == ScheduleKind::SurfaceConventional {
                continue;
            }
            let c = s.block_circuit(0);
            let zs: Vec<usize> = (0..c.measurement_count()).collect();
            for _ in 0..50 {
                let mut input = BitVector::zeros(c.qubit_count());
                for q in 0..s.code.n {
                    input.set(q, rng.gen());
                }
                let out = classical_action(&c, &input).unwrap();
                for (i, g) in s.blocks[0].gadgets.iter().enumerate() {
                    let parity = g.support.iter().fold(false, |a, &q| a ^ input.get(q));
                    assert_eq!(out.records.get(zs[i]), parity);
                }
                for i in s.blocks[0].gadgets.len()..zs.len() {
                    assert!(!out.records.get(i), "router record {i} flipped");
                }
            }
        }
    }

    #[test]
    fn memory_circuit_shape() {
        let s = Schedule::surface(ScheduleKind::SurfaceRouted, 3).unwrap();
        let c = s.memory_circuit(2, false).unwrap();
        // 4 round-1 Z detectors, 8 comparisons in round 2, 4 closeout
        assert_eq!(c.num_detectors(), 4 + 8 + 4);
        assert_eq!(c.num_observables(), 1);
        let flagged = s.memory_circuit(2, true).unwrap();
        let routers = s.blocks.iter().map(|b| b.routers().len()).sum::<usize>();
        assert_eq!(flagged.num_detectors(), c.num_detectors() + 2 * routers);
    }

    #[test]
    fn scheme_mismatch() {
        assert!(Schedule::surface(ScheduleKind::BbHalfLr, 3).is_err());
        assert!(Schedule::bb(ScheduleKind::SurfaceRouted, &BBSpec::named("bb72").unwrap()).is_err());
    }
}
