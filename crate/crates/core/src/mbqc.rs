//! Graph states, adaptive measurement patterns, and a non-blind reference
//! runner.
//!
//! The reference runner executes a pattern directly on the statevector with
//! no blinding at all; the blind protocols are judged correct by comparing
//! their byproduct-corrected outputs against it.
//!
//! Dependency convention: an X-dependency flips the sign of the base angle,
//! a Z-dependency adds pi. Output qubits carry dependency sets too, which
//! determine their X/Z byproduct powers.

use serde::{Deserialize, Serialize};

use crate::algebra::Angle8;
use crate::error::{Error, Result};
use crate::rng::RandSource;
use crate::statevec::{self, StateVector, QUBIT_CAP};

/// An undirected graph with a measurement order and designated output
/// vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    /// Measurement order; covers exactly the non-output vertices.
    pub order: Vec<usize>,
    /// Vertices left unmeasured, ascending.
    pub outputs: Vec<usize>,
}

/// A measurement pattern: graph, base angles, and feed-forward dependency
/// sets per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub graph: GraphSpec,
    /// Base angle per vertex; entries for output vertices are unused.
    pub angles: Vec<Angle8>,
    pub x_deps: Vec<Vec<usize>>,
    pub z_deps: Vec<Vec<usize>>,
}

/// Records measurement outcomes and derives feed-forward parities and
/// output byproduct powers.
#[derive(Clone, Debug)]
pub struct ByproductFrame {
    outcomes: Vec<Option<u8>>,
    x_deps: Vec<Vec<usize>>,
    z_deps: Vec<Vec<usize>>,
}

impl ByproductFrame {
    pub fn new(pattern: &Pattern) -> ByproductFrame {
        ByproductFrame {
            outcomes: vec![None; pattern.graph.vertex_count],
            x_deps: pattern.x_deps.clone(),
            z_deps: pattern.z_deps.clone(),
        }
    }

    pub fn record(&mut self, vertex: usize, bit: u8) {
        self.outcomes[vertex] = Some(bit & 1);
    }

    pub fn outcome(&self, vertex: usize) -> Option<u8> {
        self.outcomes[vertex]
    }

    fn parity(&self, vertex: usize, deps: &[usize]) -> Result<u8> {
        let mut acc = 0u8;
        for &d in deps {
            acc ^= self.outcomes[d].ok_or(Error::MissingDependency {
                vertex,
                dependency: d,
            })?;
        }
        Ok(acc)
    }

    /// Parity of the X-dependency outcomes of a vertex.
    pub fn x_parity(&self, vertex: usize) -> Result<u8> {
        self.parity(vertex, &self.x_deps[vertex].clone())
    }

    /// Parity of the Z-dependency outcomes of a vertex.
    pub fn z_parity(&self, vertex: usize) -> Result<u8> {
        self.parity(vertex, &self.z_deps[vertex].clone())
    }

    /// Byproduct powers (X-power, Z-power) accumulated on an output vertex.
    pub fn output_powers(&self, vertex: usize) -> Result<(u8, u8)> {
        Ok((self.x_parity(vertex)?, self.z_parity(vertex)?))
    }
}

/// The adapted angle phi' = (-1)^{sX} phi + sZ * pi for a vertex, where sX
/// and sZ are the dependency parities recorded in the frame.
pub fn adapt_angle(phi: Angle8, frame: &ByproductFrame, vertex: usize) -> Result<Angle8> {
    let sx = frame.x_parity(vertex)?;
    let sz = frame.z_parity(vertex)?;
    let signed = if sx == 1 {
        -(phi.k() as i64)
    } else {
        phi.k() as i64
    };
    Ok(Angle8::new(signed + 4 * sz as i64))
}

/// Tensors the inputs and applies a controlled-Z along every edge.
pub fn build_graph_state(inputs: &[StateVector], graph: &GraphSpec) -> Result<StateVector> {
    if inputs.len() != graph.vertex_count {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: graph.vertex_count,
        });
    }
    if graph.vertex_count > QUBIT_CAP {
        return Err(Error::TooManyQubits {
            requested: graph.vertex_count,
            cap: QUBIT_CAP,
        });
    }
    let mut state = StateVector::scalar();
    for input in inputs {
        if input.qubit_count() != 1 {
            return Err(Error::DimensionMismatch {
                left: input.qubit_count(),
                right: 1,
            });
        }
        state = state.tensor(input)?;
    }
    for &(i, j) in &graph.edges {
        state = state.apply_cz(i, j)?;
    }
    Ok(state)
}

/// A completed reference run: the corrected output state plus the frame
/// holding every raw outcome.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub output: StateVector,
    pub frame: ByproductFrame,
}

/// Runs the pattern non-blind: builds the graph state over the given input
/// angles, measures the ordered vertices at their adapted angles, and
/// returns the byproduct-corrected output.
///
/// Output qubits remain in ascending vertex order.
pub fn run_reference(
    pattern: &Pattern,
    input_thetas: &[Angle8],
    rand: &mut dyn RandSource,
) -> Result<ReferenceRun> {
    validate_pattern(pattern).map_err(|mut errs| errs.remove(0))?;
    if input_thetas.len() != pattern.graph.vertex_count {
        return Err(Error::LengthMismatch {
            left: input_thetas.len(),
            right: pattern.graph.vertex_count,
        });
    }
    let inputs: Vec<StateVector> = input_thetas
        .iter()
        .map(|&t| statevec::prepare_plus_theta(t))
        .collect();
    let mut state = build_graph_state(&inputs, &pattern.graph)?;
    let mut frame = ByproductFrame::new(pattern);
    let mut alive: Vec<usize> = (0..pattern.graph.vertex_count).collect();
    for &v in &pattern.graph.order {
        let q = alive.iter().position(|&a| a == v).unwrap();
        let phi_adapted = adapt_angle(pattern.angles[v], &frame, v)?;
        let out = state.measure_xy(q, phi_adapted, rand)?;
        frame.record(v, out.bit);
        state = out.post_state;
        alive.remove(q);
    }
    let output = correct_byproducts(state, &alive, &frame)?;
    Ok(ReferenceRun { output, frame })
}

/// Applies X^sx then Z^sz on each remaining qubit according to the frame.
/// `alive` lists the output vertices in their current qubit order.
pub fn correct_byproducts(
    state: StateVector,
    alive: &[usize],
    frame: &ByproductFrame,
) -> Result<StateVector> {
    let mut state = state;
    for (q, &v) in alive.iter().enumerate() {
        let (x_pow, z_pow) = frame.output_powers(v)?;
        if x_pow == 1 {
            state = state.apply_local(q, &statevec::gate_x())?;
        }
        if z_pow == 1 {
            state = state.apply_local(q, &statevec::gate_z())?;
        }
    }
    Ok(state)
}

/// Structural validation: edge sanity, order coverage, dependency causality.
/// Returns every violation found.
pub fn validate_pattern(pattern: &Pattern) -> std::result::Result<(), Vec<Error>> {
    let mut errs = Vec::new();
    let m = pattern.graph.vertex_count;

    for &(i, j) in &pattern.graph.edges {
        if i == j {
            errs.push(Error::EqualIndices { index: i });
        }
        for v in [i, j] {
            if v >= m {
                errs.push(Error::IndexOutOfRange { index: v, size: m });
            }
        }
    }
    let mut seen_edges = std::collections::HashSet::new();
    for &(i, j) in &pattern.graph.edges {
        let key = (i.min(j), i.max(j));
        if !seen_edges.insert(key) {
            errs.push(Error::InvalidPattern {
                message: format!("duplicate edge ({}, {})", key.0, key.1),
            });
        }
    }

    for list in [&pattern.graph.order, &pattern.graph.outputs] {
        for &v in list {
            if v >= m {
                errs.push(Error::IndexOutOfRange { index: v, size: m });
            }
        }
    }

    let mut expected: Vec<usize> = (0..m)
        .filter(|v| !pattern.graph.outputs.contains(v))
        .collect();
    expected.sort_unstable();
    let mut actual = pattern.graph.order.clone();
    actual.sort_unstable();
    actual.dedup();
    if actual != expected || pattern.graph.order.len() != expected.len() {
        errs.push(Error::CoverageError {
            order_len: pattern.graph.order.len(),
            expected: expected.len(),
        });
    }

    if pattern.angles.len() != m {
        errs.push(Error::LengthMismatch {
            left: pattern.angles.len(),
            right: m,
        });
    }
    if pattern.x_deps.len() != m || pattern.z_deps.len() != m {
        errs.push(Error::LengthMismatch {
            left: pattern.x_deps.len().min(pattern.z_deps.len()),
            right: m,
        });
    }

    // Position of each vertex in the measurement order; outputs have none.
    let position: std::collections::HashMap<usize, usize> = pattern
        .graph
        .order
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    for v in 0..m {
        let deps = pattern
            .x_deps
            .get(v)
            .into_iter()
            .flatten()
            .chain(pattern.z_deps.get(v).into_iter().flatten());
        for &d in deps {
            if d >= m {
                errs.push(Error::IndexOutOfRange { index: d, size: m });
                continue;
            }
            match (position.get(&v), position.get(&d)) {
                // A measured vertex may depend only on strictly earlier ones.
                (Some(&pv), Some(&pd)) if pd < pv => {}
                (Some(_), _) => errs.push(Error::CausalityViolation {
                    vertex: v,
                    dependency: d,
                }),
                // An output vertex may depend on any measured vertex.
                (None, Some(_)) => {}
                (None, None) => errs.push(Error::CausalityViolation {
                    vertex: v,
                    dependency: d,
                }),
            }
        }
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs)
    }
}

impl Pattern {
    /// Linear chain of `len` vertices with the standard flow: vertex j is
    /// measured with an X-dependency on j-1 and a Z-dependency on j-2; the
    /// last vertex is the output. `angles` gives the base angle of each of
    /// the len-1 measured vertices.
    pub fn chain(len: usize, angles: &[Angle8]) -> Result<Pattern> {
        if len < 1 {
            return Err(Error::InvalidPattern {
                message: "chain needs at least one vertex".into(),
            });
        }
        if angles.len() != len - 1 {
            return Err(Error::LengthMismatch {
                left: angles.len(),
                right: len - 1,
            });
        }
        let mut full_angles = angles.to_vec();
        full_angles.push(Angle8::ZERO);
        let x_deps = (0..len)
            .map(|j| if j >= 1 { vec![j - 1] } else { vec![] })
            .collect();
        let z_deps = (0..len)
            .map(|j| if j >= 2 { vec![j - 2] } else { vec![] })
            .collect();
        Ok(Pattern {
            graph: GraphSpec {
                vertex_count: len,
                edges: (0..len - 1).map(|j| (j, j + 1)).collect(),
                order: (0..len - 1).collect(),
                outputs: vec![len - 1],
            },
            angles: full_angles,
            x_deps,
            z_deps,
        })
    }

    /// Whether a vertex is an output.
    pub fn is_output(&self, v: usize) -> bool {
        self.graph.outputs.contains(&v)
    }

    /// Parses the JSON pattern description documented in the project README:
    /// `{"vertices": [{"id", "angle", "x_deps", "z_deps", "output"}, ...],
    ///   "edges": [[i, j], ...], "order": [...]}`.
    pub fn from_json_str(text: &str) -> Result<Pattern> {
        let file: PatternFile = serde_json::from_str(text).map_err(|e| Error::InvalidPattern {
            message: e.to_string(),
        })?;
        Pattern::try_from(file)
    }

    pub fn to_json_string(&self) -> String {
        let file = PatternFile::from(self);
        serde_json::to_string_pretty(&file).expect("pattern serialization cannot fail")
    }
}

/// Serialized form of a pattern. Angles are k-values (multiples of pi/4).
#[derive(Serialize, Deserialize)]
pub struct PatternFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<(usize, usize)>,
    pub order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    #[serde(default)]
    pub angle: Angle8,
    #[serde(default)]
    pub x_deps: Vec<usize>,
    #[serde(default)]
    pub z_deps: Vec<usize>,
    #[serde(default)]
    pub output: bool,
}

impl TryFrom<PatternFile> for Pattern {
    type Error = Error;

    fn try_from(file: PatternFile) -> Result<Pattern> {
        let m = file.vertices.len();
        let mut ids: Vec<usize> = file.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        if ids != (0..m).collect::<Vec<_>>() {
            return Err(Error::InvalidPattern {
                message: format!("vertex ids must be exactly 0..{m}"),
            });
        }
        let mut angles = vec![Angle8::ZERO; m];
        let mut x_deps = vec![Vec::new(); m];
        let mut z_deps = vec![Vec::new(); m];
        let mut outputs = Vec::new();
        for record in file.vertices {
            angles[record.id] = record.angle;
            x_deps[record.id] = record.x_deps;
            z_deps[record.id] = record.z_deps;
            if record.output {
                outputs.push(record.id);
            }
        }
        outputs.sort_unstable();
        let pattern = Pattern {
            graph: GraphSpec {
                vertex_count: m,
                edges: file.edges,
                order: file.order,
                outputs,
            },
            angles,
            x_deps,
            z_deps,
        };
        validate_pattern(&pattern).map_err(|mut errs| errs.remove(0))?;
        Ok(pattern)
    }
}

impl From<&Pattern> for PatternFile {
    fn from(p: &Pattern) -> PatternFile {
        PatternFile {
            vertices: (0..p.graph.vertex_count)
                .map(|v| VertexRecord {
                    id: v,
                    angle: p.angles[v],
                    x_deps: p.x_deps[v].clone(),
                    z_deps: p.z_deps[v].clone(),
                    output: p.is_output(v),
                })
                .collect(),
            edges: p.graph.edges.clone(),
            order: p.graph.order.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{ScriptedRand, SeededRand};
    use crate::statevec::{fidelity_mod_phase, prepare_plus_theta};
    use num_complex::Complex64 as C64;

    const SQ2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn mat_vec(m: &[[C64; 2]; 2], v: [C64; 2]) -> [C64; 2] {
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// The single-step transfer matrix H * Rz(-phi) implemented by measuring
    /// a chain vertex at base angle phi, written out by hand.
    fn h_rz(phi: Angle8) -> [[C64; 2]; 2] {
        let e = C64::from_polar(1.0, -phi.to_radians());
        [
            [C64::new(SQ2, 0.0), e * SQ2],
            [C64::new(SQ2, 0.0), -e * SQ2],
        ]
    }

    fn plus() -> [C64; 2] {
        [C64::new(SQ2, 0.0), C64::new(SQ2, 0.0)]
    }

    fn to_state(v: [C64; 2]) -> StateVector {
        StateVector::from_amplitudes(1, v.to_vec()).unwrap()
    }

    /// Runs a chain over every forced branch combination and asserts the
    /// corrected output always matches `expected`.
    fn assert_chain_output(angles: &[Angle8], expected: &StateVector) {
        let len = angles.len() + 1;
        let pattern = Pattern::chain(len, angles).unwrap();
        for branch_mask in 0..(1u32 << angles.len()) {
            let branches: Vec<u8> = (0..angles.len())
                .map(|i| ((branch_mask >> i) & 1) as u8)
                .collect();
            let mut rand = ScriptedRand::new().with_branches(&branches);
            let run = run_reference(&pattern, &vec![Angle8::ZERO; len], &mut rand).unwrap();
            let f = fidelity_mod_phase(&run.output, expected).unwrap();
            assert!(
                f > 1.0 - 1e-9,
                "angles {angles:?} branches {branches:?}: fidelity {f}"
            );
        }
    }

    #[test]
    fn adapt_angle_examples() {
        let pattern = Pattern::chain(3, &[Angle8::new(1), Angle8::new(0)]).unwrap();
        let mut frame = ByproductFrame::new(&pattern);
        assert_eq!(
            adapt_angle(Angle8::new(1), &frame, 0).unwrap(),
            Angle8::new(1)
        );
        frame.record(0, 1);
        // X-parity 1 flips the sign: pi/4 -> 7 pi/4.
        assert_eq!(
            adapt_angle(Angle8::new(1), &frame, 1).unwrap(),
            Angle8::new(7)
        );
        frame.record(1, 1);
        // Z-parity 1 adds pi on top of the sign flip.
        assert_eq!(
            adapt_angle(Angle8::new(0), &frame, 2).unwrap(),
            Angle8::new(4)
        );
    }

    #[test]
    fn adapt_angle_missing_dependency() {
        let pattern = Pattern::chain(2, &[Angle8::ZERO]).unwrap();
        let frame = ByproductFrame::new(&pattern);
        assert!(matches!(
            adapt_angle(Angle8::ZERO, &frame, 1),
            Err(Error::MissingDependency { .. })
        ));
    }

    #[test]
    fn graph_state_examples() {
        let graph = GraphSpec {
            vertex_count: 2,
            edges: vec![],
            order: vec![],
            outputs: vec![0, 1],
        };
        let inputs = [
            prepare_plus_theta(Angle8::new(2)),
            prepare_plus_theta(Angle8::new(5)),
        ];
        let s = build_graph_state(&inputs, &graph).unwrap();
        let product = inputs[0].tensor(&inputs[1]).unwrap();
        assert!(fidelity_mod_phase(&s, &product).unwrap() > 1.0 - 1e-9);

        let graph = GraphSpec {
            vertex_count: 2,
            edges: vec![(0, 1)],
            order: vec![],
            outputs: vec![0, 1],
        };
        let inputs = [
            prepare_plus_theta(Angle8::ZERO),
            prepare_plus_theta(Angle8::ZERO),
        ];
        let s = build_graph_state(&inputs, &graph).unwrap();
        let expected = StateVector::from_amplitudes(
            2,
            vec![
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
                C64::new(-0.5, 0.0),
            ],
        )
        .unwrap();
        assert!(fidelity_mod_phase(&s, &expected).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn graph_state_edge_order_irrelevant() {
        let inputs: Vec<StateVector> = [1i64, 4, 6]
            .iter()
            .map(|&k| prepare_plus_theta(Angle8::new(k)))
            .collect();
        let g1 = GraphSpec {
            vertex_count: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
            order: vec![],
            outputs: vec![0, 1, 2],
        };
        let g2 = GraphSpec {
            edges: vec![(2, 0), (1, 0), (2, 1)],
            ..g1.clone()
        };
        let a = build_graph_state(&inputs, &g1).unwrap();
        let b = build_graph_state(&inputs, &g2).unwrap();
        assert!(fidelity_mod_phase(&a, &b).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn one_vertex_pattern_is_identity() {
        let pattern = Pattern::chain(1, &[]).unwrap();
        let theta = Angle8::new(3);
        let mut rand = SeededRand::new(0);
        let run = run_reference(&pattern, &[theta], &mut rand).unwrap();
        let f = fidelity_mod_phase(&run.output, &prepare_plus_theta(theta)).unwrap();
        assert!(f > 1.0 - 1e-9);
    }

    #[test]
    fn two_chain_closed_form() {
        // Base angle 0: output is H|+> = |0> on both branches.
        assert_chain_output(&[Angle8::ZERO], &StateVector::basis(1, 0).unwrap());
        // Every base angle: output is H Rz(-phi)|+>.
        for phi in Angle8::all() {
            let expected = to_state(mat_vec(&h_rz(phi), plus()));
            assert_chain_output(&[phi], &expected);
        }
    }

    #[test]
    fn three_chain_closed_form_all_angle_pairs() {
        for phi1 in Angle8::all() {
            for phi2 in Angle8::all() {
                let expected = to_state(mat_vec(&h_rz(phi2), mat_vec(&h_rz(phi1), plus())));
                assert_chain_output(&[phi1, phi2], &expected);
            }
        }
    }

    #[test]
    fn four_chain_deterministic_modulo_byproducts() {
        let mut rand = SeededRand::new(21);
        for _ in 0..24 {
            let angles = [
                Angle8::new(rand.index(8) as i64),
                Angle8::new(rand.index(8) as i64),
                Angle8::new(rand.index(8) as i64),
            ];
            let expected = to_state(mat_vec(
                &h_rz(angles[2]),
                mat_vec(&h_rz(angles[1]), mat_vec(&h_rz(angles[0]), plus())),
            ));
            assert_chain_output(&angles, &expected);
        }
    }

    /// Chain measurements are unbiased: every vertex still has an unmeasured
    /// neighbor when its turn comes, forcing Born probability exactly 1/2.
    #[test]
    fn chain_branch_probabilities_are_half() {
        let pattern = Pattern::chain(3, &[Angle8::new(2), Angle8::new(5)]).unwrap();
        for branches in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let mut state = build_graph_state(
                &[
                    prepare_plus_theta(Angle8::new(3)),
                    prepare_plus_theta(Angle8::ZERO),
                    prepare_plus_theta(Angle8::new(6)),
                ],
                &pattern.graph,
            )
            .unwrap();
            let mut frame = ByproductFrame::new(&pattern);
            for (i, &v) in pattern.graph.order.iter().enumerate() {
                let phi = adapt_angle(pattern.angles[v], &frame, v).unwrap();
                let mut r = ScriptedRand::new().with_branches(&[branches[i]]);
                let out = state.measure_xy(0, phi, &mut r).unwrap();
                assert!(
                    (out.probability - 0.5).abs() < 1e-12,
                    "vertex {v} probability {}",
                    out.probability
                );
                frame.record(v, out.bit);
                state = out.post_state;
            }
        }
    }

    /// Measuring |G{theta}> at delta = theta + phi' + r pi and reinterpreting
    /// outcomes as b xor r reproduces the reference run of |G{0}> at phi'.
    #[test]
    fn theta_cancellation_on_two_chain() {
        let phi = Angle8::new(3);
        let pattern = Pattern::chain(2, &[phi]).unwrap();
        for theta in Angle8::all() {
            for r in [0u8, 1] {
                for b in [0u8, 1] {
                    // Blinded side: input theta on the measured vertex.
                    let state = build_graph_state(
                        &[prepare_plus_theta(theta), prepare_plus_theta(Angle8::ZERO)],
                        &pattern.graph,
                    )
                    .unwrap();
                    let delta = crate::algebra::compose_delta(theta, 0, phi, r);
                    let mut rand = ScriptedRand::new().with_branches(&[b]);
                    let out = state.measure_xy(0, delta, &mut rand).unwrap();
                    let mut frame = ByproductFrame::new(&pattern);
                    frame.record(0, out.bit ^ r);
                    let blind = correct_byproducts(out.post_state, &[1], &frame).unwrap();

                    // Reference side: same pattern on |G{0}> with the raw
                    // outcome forced to b xor r.
                    let mut rand = ScriptedRand::new().with_branches(&[b ^ r]);
                    let reference =
                        run_reference(&pattern, &[Angle8::ZERO, Angle8::ZERO], &mut rand).unwrap();
                    let f = fidelity_mod_phase(&blind, &reference.output).unwrap();
                    assert!(
                        f > 1.0 - 1e-9,
                        "theta {theta:?} r {r} b {b}: fidelity {f}"
                    );
                }
            }
        }
    }

    #[test]
    fn validate_pattern_examples() {
        let good = Pattern::chain(4, &[Angle8::ZERO, Angle8::new(1), Angle8::new(2)]).unwrap();
        assert!(validate_pattern(&good).is_ok());

        let mut late_dep = good.clone();
        late_dep.x_deps[1] = vec![2];
        let errs = validate_pattern(&late_dep).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::CausalityViolation { vertex: 1, dependency: 2 })));

        let mut missing = good.clone();
        missing.graph.order = vec![0, 1];
        let errs = validate_pattern(&missing).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::CoverageError { .. })));

        let mut self_loop = good.clone();
        self_loop.graph.edges.push((2, 2));
        let errs = validate_pattern(&self_loop).unwrap_err();
        assert!(errs.iter().any(|e| matches!(e, Error::EqualIndices { .. })));

        let mut dup_edge = good;
        dup_edge.graph.edges.push((1, 0));
        let errs = validate_pattern(&dup_edge).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, Error::InvalidPattern { .. })));
    }

    #[test]
    fn pattern_json_round_trip() {
        let pattern = Pattern::chain(3, &[Angle8::new(1), Angle8::new(6)]).unwrap();
        let text = pattern.to_json_string();
        let back = Pattern::from_json_str(&text).unwrap();
        assert_eq!(pattern, back);
    }

    #[test]
    fn pattern_json_rejects_bad_input() {
        assert!(matches!(
            Pattern::from_json_str("not json"),
            Err(Error::InvalidPattern { .. })
        ));
        // Vertex ids with a gap.
        let text = r#"{"vertices": [{"id": 0}, {"id": 2}], "edges": [], "order": [0, 2]}"#;
        assert!(matches!(
            Pattern::from_json_str(text),
            Err(Error::InvalidPattern { .. })
        ));
        // Valid serde shape, invalid structure: order misses vertex 1.
        let text = r#"{"vertices": [{"id": 0}, {"id": 1}], "edges": [], "order": [0]}"#;
        assert!(matches!(
            Pattern::from_json_str(text),
            Err(Error::CoverageError { .. })
        ));
    }
}
