//! The delegated-computation protocols: parties, message routing,
//! transcripts, and full runs.
//!
//! Three runs are provided. In the single-server run the client ships
//! randomly rotated qubits and drives the measurement pattern with angle
//! messages. In the double-server run a trusted center hands clean Bell
//! pairs to two servers that may each talk to the client but never to each
//! other; the first server's rotated measurements remotely prepare the
//! second server's input. The distilled run starts from noisy pairs,
//! purifies them by client-mediated hashing, and compensates the surviving
//! pair labels in the angles sent to the first server.
//!
//! Every quantum transmission is an in-memory state handoff recorded in
//! the transcript without amplitude or angle content; classical messages
//! carry their full payloads, which is exactly what the security analysis
//! consumes.
//!
//! Randomness draw order is part of each run's contract (documented per
//! run) so that scripted sources can force every branch.

use serde::{Deserialize, Serialize};

use crate::algebra::{compose_delta, reflect, Angle8, BellLabel, BellString};
use crate::bellsim::{sample_register, twirl_to_werner, werner_dist, WernerParams};
use crate::distill::{
    compile_parity_program, decode_ml, draw_nonzero_query, DecodeOutcome, DistillStats,
    HashingConfig, LinearModel,
};
use crate::error::{Error, Result};
use crate::mbqc::{adapt_angle, validate_pattern, ByproductFrame, Pattern};
use crate::rng::RandSource;
use crate::statevec::{self, StateVector, QUBIT_CAP};

/// The four protocol participants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PartyRole {
    Alice,
    Bob1,
    Bob2,
    Center,
}

impl std::fmt::Display for PartyRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PartyRole::Alice => "Alice",
            PartyRole::Bob1 => "Bob1",
            PartyRole::Bob2 => "Bob2",
            PartyRole::Center => "Center",
        };
        f.write_str(name)
    }
}

/// Classical message bodies, tagged by kind.
///
/// Quantum handoffs appear as records with counts only: `ThetaBatch` with
/// an empty `thetas` list stands for a batch of prepared qubits, and
/// `BellIssue` stands for distributed pair halves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Payload {
    /// The graph, measurement order, and outputs of the pattern.
    Graph {
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        order: Vec<usize>,
        outputs: Vec<usize>,
    },
    /// A batch of input angles. `thetas` holds k-values when the batch is
    /// classical data; it is empty when the batch is a quantum handoff.
    ThetaBatch { count: usize, thetas: Vec<u8> },
    /// Compensated angles for the first server, as k-values.
    ThetaPrimeBatch { theta_primes: Vec<u8> },
    /// One measurement angle for the addressed vertex, as a k-value.
    Delta { vertex: usize, delta: u8 },
    /// One reported measurement bit (pair index or vertex in `index`).
    Result { index: usize, bit: u8 },
    /// One hashing query over the live pair labels, hex-packed.
    HashQuery { query_hex: String, bits: usize },
    /// One server's measured bit for the current hashing round.
    HashResult { bit: u8 },
    /// Publicly chosen twirl permutation identifiers, one per pair.
    TwirlNote { perms: Vec<u8> },
    /// A state handoff of freshly distributed pair halves.
    BellIssue { count: usize, fidelity: f64 },
}

impl Payload {
    /// The kind tag as it appears in serialized records.
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Graph { .. } => "Graph",
            Payload::ThetaBatch { .. } => "ThetaBatch",
            Payload::ThetaPrimeBatch { .. } => "ThetaPrimeBatch",
            Payload::Delta { .. } => "Delta",
            Payload::Result { .. } => "Result",
            Payload::HashQuery { .. } => "HashQuery",
            Payload::HashResult { .. } => "HashResult",
            Payload::TwirlNote { .. } => "TwirlNote",
            Payload::BellIssue { .. } => "BellIssue",
        }
    }
}

/// A routed message: logical round number plus the typed body.
///
/// Round 0 is setup and preparation; hashing rounds count from 1; the
/// measurement phase continues the numbering after the hashing rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub round: u64,
    #[serde(flatten)]
    pub payload: Payload,
}

/// One delivered message as recorded in the transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub seq: u64,
    pub from: PartyRole,
    pub to: PartyRole,
    #[serde(flatten)]
    pub message: Message,
}

/// Append-only log of every delivered message.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Transcript {
    records: Vec<Record>,
}

const ALLOWED_EDGES: [(PartyRole, PartyRole); 8] = [
    (PartyRole::Alice, PartyRole::Bob1),
    (PartyRole::Bob1, PartyRole::Alice),
    (PartyRole::Alice, PartyRole::Bob2),
    (PartyRole::Bob2, PartyRole::Alice),
    (PartyRole::Center, PartyRole::Bob1),
    (PartyRole::Center, PartyRole::Bob2),
    (PartyRole::Alice, PartyRole::Center),
    (PartyRole::Center, PartyRole::Alice),
];

/// Delivers a message if the communication topology allows the edge,
/// appending it to the transcript. The two servers have no channel in
/// either direction.
pub fn route(
    transcript: &mut Transcript,
    from: PartyRole,
    to: PartyRole,
    round: u64,
    payload: Payload,
) -> Result<()> {
    if !ALLOWED_EDGES.contains(&(from, to)) {
        return Err(Error::TopologyViolation {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    transcript.records.push(Record {
        seq: transcript.records.len() as u64,
        from,
        to,
        message: Message { round, payload },
    });
    Ok(())
}

impl Transcript {
    pub fn new() -> Transcript {
        Transcript::default()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of records delivered between the two servers, any direction.
    /// The router guarantees zero; tests assert it on every transcript.
    pub fn server_to_server_deliveries(&self) -> usize {
        self.records
            .iter()
            .filter(|r| {
                matches!(
                    (r.from, r.to),
                    (PartyRole::Bob1, PartyRole::Bob2) | (PartyRole::Bob2, PartyRole::Bob1)
                )
            })
            .count()
    }

    /// Serializes one record per line as JSON.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(
                &serde_json::to_string(record).expect("transcript records always serialize"),
            );
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Transcript> {
        let mut records = Vec::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                    message: e.to_string(),
                })?;
            records.push(record);
        }
        Ok(Transcript { records })
    }
}

/// The client's private randomness for one run: one input angle and one
/// outcome-blinding bit per vertex, sampled before any message is
/// exchanged so that independence is structural.
#[derive(Clone, Debug)]
pub struct AliceSecrets {
    pub thetas: Vec<Angle8>,
    pub r_bits: Vec<u8>,
    /// The surviving-pair labels the client decoded, in distilled runs.
    pub labels: Option<BellString>,
}

impl AliceSecrets {
    pub fn sample(vertex_count: usize, rand: &mut dyn RandSource) -> AliceSecrets {
        let thetas = (0..vertex_count).map(|_| rand.angle()).collect();
        let r_bits = (0..vertex_count).map(|_| rand.bit()).collect();
        AliceSecrets {
            thetas,
            r_bits,
            labels: None,
        }
    }
}

/// The client's correction recipe for one output qubit: unrotate the
/// effective input angle, then apply the recorded byproduct powers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputCorrection {
    pub vertex: usize,
    /// The effective input rotation left on the output: theta plus the
    /// remote-preparation flip, where applicable.
    pub theta_eff: Angle8,
    pub x_power: u8,
    pub z_power: u8,
}

/// What a completed run hands back: the server-held output state, the
/// client's correction recipe, and the client's outcome frame.
#[derive(Clone, Debug)]
pub struct RunOutput {
    /// The unmeasured qubits as the server holds them, vertex-ascending.
    pub final_state: StateVector,
    /// Per-output corrections, vertex-ascending.
    pub corrections: Vec<OutputCorrection>,
    /// The client's de-randomized outcome record.
    pub frame: ByproductFrame,
}

/// Applies the correction recipe to a server-held output state: for each
/// output qubit, the inverse input rotation first, then X then Z powers.
pub fn apply_corrections(
    state: &StateVector,
    corrections: &[OutputCorrection],
) -> Result<StateVector> {
    if state.qubit_count() != corrections.len() {
        return Err(Error::LengthMismatch {
            left: state.qubit_count(),
            right: corrections.len(),
        });
    }
    let mut state = state.clone();
    for (q, c) in corrections.iter().enumerate() {
        state = state.apply_local(q, &statevec::gate_phase(-c.theta_eff))?;
        if c.x_power & 1 == 1 {
            state = state.apply_local(q, &statevec::gate_x())?;
        }
        if c.z_power & 1 == 1 {
            state = state.apply_local(q, &statevec::gate_z())?;
        }
    }
    Ok(state)
}

/// The simulated quantum state shared by the parties, with an ownership
/// tag per qubit. Parties never read it; measurement outcomes are the only
/// information that crosses from state to messages.
#[derive(Clone, Debug)]
pub(crate) struct World {
    state: StateVector,
    tags: Vec<(PartyRole, usize)>,
}

impl World {
    pub(crate) fn build(parts: Vec<(StateVector, Vec<(PartyRole, usize)>)>) -> Result<World> {
        let mut state = StateVector::scalar();
        let mut tags = Vec::new();
        for (part, part_tags) in parts {
            if part.qubit_count() != part_tags.len() {
                return Err(Error::LengthMismatch {
                    left: part.qubit_count(),
                    right: part_tags.len(),
                });
            }
            state = state.tensor(&part)?;
            tags.extend(part_tags);
        }
        Ok(World { state, tags })
    }

    fn position(&self, owner: PartyRole, id: usize) -> Result<usize> {
        self.tags
            .iter()
            .position(|&t| t == (owner, id))
            .ok_or(Error::IndexOutOfRange {
                index: id,
                size: self.tags.len(),
            })
    }

    /// XY-plane measurement of the qubit tagged (owner, id); consumes it.
    pub(crate) fn measure_xy(
        &mut self,
        owner: PartyRole,
        id: usize,
        angle: Angle8,
        rand: &mut dyn RandSource,
    ) -> Result<u8> {
        let q = self.position(owner, id)?;
        let out = self.state.measure_xy(q, angle, rand)?;
        self.state = out.post_state;
        self.tags.remove(q);
        Ok(out.bit)
    }

    /// Applies a controlled-Z between two tagged qubits.
    pub(crate) fn apply_cz(
        &mut self,
        a: (PartyRole, usize),
        b: (PartyRole, usize),
    ) -> Result<()> {
        let qa = self.position(a.0, a.1)?;
        let qb = self.position(b.0, b.1)?;
        self.state = self.state.apply_cz(qa, qb)?;
        Ok(())
    }

    /// The remaining state restricted check: all leftover qubits must
    /// belong to the given owner, in ascending id order.
    pub(crate) fn into_final_state(self, owner: PartyRole) -> Result<StateVector> {
        let mut ids = Vec::new();
        for &(tag_owner, id) in &self.tags {
            if tag_owner != owner {
                return Err(Error::IndexOutOfRange {
                    index: id,
                    size: self.tags.len(),
                });
            }
            ids.push(id);
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if ids != sorted {
            return Err(Error::CoverageError {
                order_len: ids.len(),
                expected: sorted.len(),
            });
        }
        Ok(self.state)
    }
}

fn check_pattern_cap(pattern: &Pattern, qubits_per_vertex: usize) -> Result<()> {
    validate_pattern(pattern).map_err(|mut errs| errs.remove(0))?;
    let needed = pattern.graph.vertex_count * qubits_per_vertex;
    if needed > QUBIT_CAP {
        return Err(Error::TooManyQubits {
            requested: needed,
            cap: QUBIT_CAP,
        });
    }
    Ok(())
}

fn graph_payload(pattern: &Pattern) -> Payload {
    Payload::Graph {
        vertex_count: pattern.graph.vertex_count,
        edges: pattern.graph.edges.clone(),
        order: pattern.graph.order.clone(),
        outputs: pattern.graph.outputs.clone(),
    }
}

/// Static context of the blinded measurement phase: the pattern, the
/// client's secrets, the first server's reported bits per vertex (all
/// zeros in the single-server run), the measuring server, and the round
/// the phase continues from.
struct PatternPhase<'a> {
    pattern: &'a Pattern,
    secrets: &'a AliceSecrets,
    pair_bits: &'a [u8],
    server: PartyRole,
    round_base: u64,
}

impl PatternPhase<'_> {
    /// Drives the phase: for each ordered vertex the client sends the
    /// blinded angle, the server measures and reports, and the client
    /// de-randomizes the outcome into her frame. Rounds count from
    /// `round_base + 1`.
    fn run(
        &self,
        world: &mut World,
        transcript: &mut Transcript,
        rand: &mut dyn RandSource,
    ) -> Result<ByproductFrame> {
        let mut frame = ByproductFrame::new(self.pattern);
        for (i, &v) in self.pattern.graph.order.iter().enumerate() {
            let round = self.round_base + 1 + i as u64;
            let phi_adapted = adapt_angle(self.pattern.angles[v], &frame, v)?;
            let delta = compose_delta(
                self.secrets.thetas[v],
                self.pair_bits[v],
                phi_adapted,
                self.secrets.r_bits[v],
            );
            route(
                transcript,
                PartyRole::Alice,
                self.server,
                round,
                Payload::Delta {
                    vertex: v,
                    delta: delta.k(),
                },
            )?;
            let reported = world.measure_xy(self.server, v, delta, rand)?;
            route(
                transcript,
                self.server,
                PartyRole::Alice,
                round,
                Payload::Result {
                    index: v,
                    bit: reported,
                },
            )?;
            frame.record(v, reported ^ self.secrets.r_bits[v]);
        }
        Ok(frame)
    }
}

fn collect_output(
    pattern: &Pattern,
    secrets: &AliceSecrets,
    pair_bits: &[u8],
    frame: ByproductFrame,
    world: World,
    server: PartyRole,
) -> Result<RunOutput> {
    let mut corrections = Vec::new();
    for &v in &pattern.graph.outputs {
        let (x_power, z_power) = frame.output_powers(v)?;
        let theta_eff = secrets.thetas[v] + Angle8::new(4 * pair_bits[v] as i64);
        corrections.push(OutputCorrection {
            vertex: v,
            theta_eff,
            x_power,
            z_power,
        });
    }
    let final_state = world.into_final_state(server)?;
    Ok(RunOutput {
        final_state,
        corrections,
        frame,
    })
}

/// The single-server run.
///
/// The client samples her secrets, announces the graph, hands over one
/// randomly rotated qubit per vertex, and drives the pattern with blinded
/// angles. The server builds the graph state and measures as told.
///
/// Randomness order: vertex angles, then vertex blinding bits, then one
/// branch draw per ordered measurement.
pub fn run_single_server(
    pattern: &Pattern,
    rand: &mut dyn RandSource,
) -> Result<(RunOutput, Transcript)> {
    check_pattern_cap(pattern, 1)?;
    let m = pattern.graph.vertex_count;
    let server = PartyRole::Bob2;
    let secrets = AliceSecrets::sample(m, rand);
    let mut transcript = Transcript::new();

    route(
        &mut transcript,
        PartyRole::Alice,
        server,
        0,
        graph_payload(pattern),
    )?;

    let inputs: Vec<(StateVector, Vec<(PartyRole, usize)>)> = (0..m)
        .map(|v| {
            (
                statevec::prepare_plus_theta(secrets.thetas[v]),
                vec![(server, v)],
            )
        })
        .collect();
    let mut world = World::build(inputs)?;
    route(
        &mut transcript,
        PartyRole::Alice,
        server,
        0,
        Payload::ThetaBatch {
            count: m,
            thetas: Vec::new(),
        },
    )?;

    for &(i, j) in &pattern.graph.edges {
        world.apply_cz((server, i), (server, j))?;
    }

    let pair_bits = vec![0u8; m];
    let phase = PatternPhase {
        pattern,
        secrets: &secrets,
        pair_bits: &pair_bits,
        server,
        round_base: 0,
    };
    let frame = phase.run(&mut world, &mut transcript, rand)?;
    let output = collect_output(pattern, &secrets, &pair_bits, frame, world, server)?;
    Ok((output, transcript))
}

/// The double-server run over clean shared pairs.
///
/// The center distributes one clean pair per vertex. The client sends her
/// input angles to the first server in the clear; his rotated measurements
/// steer the second server's qubits into the rotated inputs, flipped by
/// his reported bits. The second server then runs the pattern exactly as
/// in the single-server flow, with the flips folded into every angle.
///
/// Randomness order: vertex angles, then vertex blinding bits, then one
/// branch draw per first-server pair measurement (vertex-ascending), then
/// one branch draw per ordered measurement.
pub fn run_double_server(
    pattern: &Pattern,
    rand: &mut dyn RandSource,
) -> Result<(RunOutput, Transcript)> {
    check_pattern_cap(pattern, 2)?;
    let m = pattern.graph.vertex_count;
    let secrets = AliceSecrets::sample(m, rand);
    let mut transcript = Transcript::new();

    let pairs: Vec<(StateVector, Vec<(PartyRole, usize)>)> = (0..m)
        .map(|v| {
            (
                statevec::prepare_bell(BellLabel::new(0, 0)),
                vec![(PartyRole::Bob1, v), (PartyRole::Bob2, v)],
            )
        })
        .collect();
    let mut world = World::build(pairs)?;
    for to in [PartyRole::Bob1, PartyRole::Bob2] {
        route(
            &mut transcript,
            PartyRole::Center,
            to,
            0,
            Payload::BellIssue {
                count: m,
                fidelity: 1.0,
            },
        )?;
    }

    route(
        &mut transcript,
        PartyRole::Alice,
        PartyRole::Bob1,
        0,
        Payload::ThetaBatch {
            count: m,
            thetas: secrets.thetas.iter().map(|t| t.k()).collect(),
        },
    )?;

    let mut pair_bits = vec![0u8; m];
    for (v, slot) in pair_bits.iter_mut().enumerate() {
        let bit = world.measure_xy(PartyRole::Bob1, v, -secrets.thetas[v], rand)?;
        route(
            &mut transcript,
            PartyRole::Bob1,
            PartyRole::Alice,
            0,
            Payload::Result { index: v, bit },
        )?;
        *slot = bit;
    }

    route(
        &mut transcript,
        PartyRole::Alice,
        PartyRole::Bob2,
        0,
        graph_payload(pattern),
    )?;
    for &(i, j) in &pattern.graph.edges {
        world.apply_cz((PartyRole::Bob2, i), (PartyRole::Bob2, j))?;
    }

    let phase = PatternPhase {
        pattern,
        secrets: &secrets,
        pair_bits: &pair_bits,
        server: PartyRole::Bob2,
        round_base: 0,
    };
    let frame = phase.run(&mut world, &mut transcript, rand)?;
    let output = collect_output(pattern, &secrets, &pair_bits, frame, world, PartyRole::Bob2)?;
    Ok((output, transcript))
}

/// The distilled double-server run over noisy pairs.
///
/// The center distributes noisy pairs; the client publishes twirl choices;
/// client-mediated hashing rounds purify the string while she tracks the
/// surviving labels; she then compensates each label inside the angles she
/// sends the first server, and the run continues exactly as the clean
/// double-server flow.
///
/// Randomness order: vertex angles, then vertex blinding bits, then the
/// center's pair draws, then twirl permutation indices, then per hashing
/// round the query bits followed by one server-bit draw, then one branch
/// draw per first-server pair measurement, then one branch draw per
/// ordered measurement.
pub fn run_double_server_distilled(
    pattern: &Pattern,
    cfg: &HashingConfig,
    w: WernerParams,
    rand: &mut dyn RandSource,
) -> Result<(RunOutput, DistillStats, Transcript)> {
    check_pattern_cap(pattern, 2)?;
    let m = pattern.graph.vertex_count;
    let entropy = crate::distill::entropy(w);
    if entropy >= 1.0 {
        return Err(Error::BelowThreshold {
            fidelity: w.fidelity(),
            entropy,
        });
    }
    let rounds = cfg.rounds(entropy);
    if cfg.pairs < rounds + m {
        return Err(Error::InsufficientPairs {
            available: cfg.pairs.saturating_sub(rounds),
            needed: m,
        });
    }
    if cfg.pairs > cfg.decode_cap {
        return Err(Error::TooManyQubits {
            requested: cfg.pairs,
            cap: cfg.decode_cap,
        });
    }

    let secrets = AliceSecrets::sample(m, rand);
    let mut transcript = Transcript::new();

    for to in [PartyRole::Bob1, PartyRole::Bob2] {
        route(
            &mut transcript,
            PartyRole::Center,
            to,
            0,
            Payload::BellIssue {
                count: cfg.pairs,
                fidelity: w.fidelity(),
            },
        )?;
    }
    let dist = werner_dist(w);
    let sampled = sample_register(&dist, cfg.pairs, rand)?;
    let (mut reg, perms) = twirl_to_werner(&sampled, rand);
    for to in [PartyRole::Bob1, PartyRole::Bob2] {
        route(
            &mut transcript,
            PartyRole::Alice,
            to,
            0,
            Payload::TwirlNote {
                perms: perms.clone(),
            },
        )?;
    }

    let mut model = LinearModel::new(cfg.pairs)?;
    let mut parities = Vec::with_capacity(rounds);
    for round in 1..=rounds as u64 {
        let query = draw_nonzero_query(reg.live_count(), rand);
        for to in [PartyRole::Bob1, PartyRole::Bob2] {
            route(
                &mut transcript,
                PartyRole::Alice,
                to,
                round,
                Payload::HashQuery {
                    query_hex: query.to_hex(),
                    bits: query.len(),
                },
            )?;
        }
        let program = compile_parity_program(&query, reg.live_count())?;
        let (b1, b2, next_reg) = program.execute(&reg, rand)?;
        model.apply_program(&program)?;
        reg = next_reg;
        for (from, bit) in [(PartyRole::Bob1, b1), (PartyRole::Bob2, b2)] {
            route(
                &mut transcript,
                from,
                PartyRole::Alice,
                round,
                Payload::HashResult { bit },
            )?;
        }
        parities.push(b1 ^ b2);
    }

    let decoded = match decode_ml(&parities, &model, &dist, cfg.pairs)? {
        DecodeOutcome::Unique(v) => v,
        DecodeOutcome::Ambiguous => return Err(Error::DecodeAmbiguous),
    };
    let inferred = model.infer_labels(decoded.as_word());
    let stats = DistillStats {
        fidelity: w.fidelity(),
        entropy_bits: entropy,
        pairs: cfg.pairs,
        margin: cfg.margin,
        rounds,
        yield_pairs: cfg.pairs - rounds,
        decode_success: true,
    };
    let mut secrets = secrets;
    secrets.labels = Some(inferred.clone());

    // The true surviving labels drive the physical pairs; the client's
    // decoded labels drive her compensation. They differ exactly when the
    // decode missed.
    let true_labels = reg.string().clone();
    let pairs: Vec<(StateVector, Vec<(PartyRole, usize)>)> = (0..m)
        .map(|v| {
            (
                statevec::prepare_bell(true_labels.labels()[v]),
                vec![(PartyRole::Bob1, v), (PartyRole::Bob2, v)],
            )
        })
        .collect();
    let mut world = World::build(pairs)?;

    let theta_primes: Vec<Angle8> = (0..m)
        .map(|v| reflect(secrets.thetas[v], inferred.labels()[v]))
        .collect();
    route(
        &mut transcript,
        PartyRole::Alice,
        PartyRole::Bob1,
        0,
        Payload::ThetaPrimeBatch {
            theta_primes: theta_primes.iter().map(|t| t.k()).collect(),
        },
    )?;

    let mut pair_bits = vec![0u8; m];
    for (v, slot) in pair_bits.iter_mut().enumerate() {
        let bit = world.measure_xy(PartyRole::Bob1, v, -theta_primes[v], rand)?;
        route(
            &mut transcript,
            PartyRole::Bob1,
            PartyRole::Alice,
            0,
            Payload::Result { index: v, bit },
        )?;
        *slot = bit;
    }

    route(
        &mut transcript,
        PartyRole::Alice,
        PartyRole::Bob2,
        0,
        graph_payload(pattern),
    )?;
    for &(i, j) in &pattern.graph.edges {
        world.apply_cz((PartyRole::Bob2, i), (PartyRole::Bob2, j))?;
    }

    let phase = PatternPhase {
        pattern,
        secrets: &secrets,
        pair_bits: &pair_bits,
        server: PartyRole::Bob2,
        round_base: rounds as u64,
    };
    let frame = phase.run(&mut world, &mut transcript, rand)?;
    let output = collect_output(pattern, &secrets, &pair_bits, frame, world, PartyRole::Bob2)?;
    Ok((output, stats, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mbqc::{run_reference, GraphSpec};
    use crate::rng::{ScriptedRand, SeededRand};
    use crate::statevec::{fidelity_mod_phase, prepare_plus_theta};

    fn chain(len: usize, ks: &[i64]) -> Pattern {
        let angles: Vec<Angle8> = ks.iter().map(|&k| Angle8::new(k)).collect();
        Pattern::chain(len, &angles).unwrap()
    }

    /// Reference output of a deterministic chain pattern.
    fn reference_output(pattern: &Pattern) -> StateVector {
        let zeros = vec![Angle8::ZERO; pattern.graph.vertex_count];
        let mut rand = SeededRand::new(99);
        run_reference(pattern, &zeros, &mut rand).unwrap().output
    }

    #[test]
    fn route_examples() {
        let mut t = Transcript::new();
        route(
            &mut t,
            PartyRole::Alice,
            PartyRole::Bob1,
            0,
            Payload::ThetaPrimeBatch {
                theta_primes: vec![3],
            },
        )
        .unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.records()[0].seq, 0);

        for (from, to) in [
            (PartyRole::Bob1, PartyRole::Bob2),
            (PartyRole::Bob2, PartyRole::Bob1),
        ] {
            let err = route(&mut t, from, to, 0, Payload::HashResult { bit: 0 });
            assert!(matches!(err, Err(Error::TopologyViolation { .. })));
        }
        assert_eq!(t.len(), 1);
        assert_eq!(t.server_to_server_deliveries(), 0);
    }

    #[test]
    fn transcript_round_trip() {
        let mut t = Transcript::new();
        route(
            &mut t,
            PartyRole::Center,
            PartyRole::Bob1,
            0,
            Payload::BellIssue {
                count: 4,
                fidelity: 0.95,
            },
        )
        .unwrap();
        route(
            &mut t,
            PartyRole::Alice,
            PartyRole::Bob2,
            2,
            Payload::HashQuery {
                query_hex: "a1".into(),
                bits: 8,
            },
        )
        .unwrap();
        route(
            &mut t,
            PartyRole::Bob2,
            PartyRole::Alice,
            2,
            Payload::HashResult { bit: 1 },
        )
        .unwrap();
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 3);
        let back = Transcript::from_jsonl(&text).unwrap();
        assert_eq!(t, back);
        assert!(Transcript::from_jsonl("{broken").is_err());
    }

    #[test]
    fn record_json_shape() {
        let mut t = Transcript::new();
        route(
            &mut t,
            PartyRole::Alice,
            PartyRole::Bob2,
            3,
            Payload::Delta { vertex: 1, delta: 6 },
        )
        .unwrap();
        let line = t.to_jsonl();
        let value: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(value["seq"], 0);
        assert_eq!(value["from"], "Alice");
        assert_eq!(value["to"], "Bob2");
        assert_eq!(value["round"], 3);
        assert_eq!(value["kind"], "Delta");
        assert_eq!(value["payload"]["vertex"], 1);
        assert_eq!(value["payload"]["delta"], 6);
    }

    #[test]
    fn single_server_one_vertex_output_is_theta() {
        let pattern = Pattern {
            graph: GraphSpec {
                vertex_count: 1,
                edges: vec![],
                order: vec![],
                outputs: vec![0],
            },
            angles: vec![Angle8::ZERO],
            x_deps: vec![vec![]],
            z_deps: vec![vec![]],
        };
        let mut rand = ScriptedRand::new().with_angles(&[5]).with_bits(&[1]);
        let (out, transcript) = run_single_server(&pattern, &mut rand).unwrap();
        let f = fidelity_mod_phase(&out.final_state, &prepare_plus_theta(Angle8::new(5))).unwrap();
        assert!(f > 1.0 - 1e-9);
        assert_eq!(out.corrections[0].theta_eff, Angle8::new(5));
        let corrected = apply_corrections(&out.final_state, &out.corrections).unwrap();
        let f = fidelity_mod_phase(&corrected, &prepare_plus_theta(Angle8::ZERO)).unwrap();
        assert!(f > 1.0 - 1e-9);
        assert_eq!(transcript.server_to_server_deliveries(), 0);
    }

    #[test]
    fn single_server_two_chain_all_theta_r_choices() {
        let pattern = chain(2, &[1]);
        let expected = reference_output(&pattern);
        for theta0 in 0..8 {
            for theta1 in 0..8 {
                for r0 in 0..2 {
                    for branch in 0..2 {
                        let mut rand = ScriptedRand::new()
                            .with_angles(&[theta0, theta1])
                            .with_bits(&[r0, 0])
                            .with_branches(&[branch]);
                        let (out, transcript) = run_single_server(&pattern, &mut rand).unwrap();
                        let corrected =
                            apply_corrections(&out.final_state, &out.corrections).unwrap();
                        let f = fidelity_mod_phase(&corrected, &expected).unwrap();
                        assert!(
                            f > 1.0 - 1e-9,
                            "theta ({theta0},{theta1}) r {r0} branch {branch}: {f}"
                        );
                        assert_eq!(transcript.server_to_server_deliveries(), 0);
                    }
                }
            }
        }
    }

    #[test]
    fn single_server_three_chain_random_seeds() {
        let pattern = chain(3, &[2, 5]);
        let expected = reference_output(&pattern);
        for seed in 0..200 {
            let mut rand = SeededRand::new(seed);
            let (out, _) = run_single_server(&pattern, &mut rand).unwrap();
            let corrected = apply_corrections(&out.final_state, &out.corrections).unwrap();
            let f = fidelity_mod_phase(&corrected, &expected).unwrap();
            assert!(f > 1.0 - 1e-9, "seed {seed}: {f}");
        }
    }

    #[test]
    fn double_server_remote_preparation_single_pair() {
        // One pair, no measurements in the pattern: after the first
        // server's rotated measurement the second server holds the rotated
        // flipped input.
        let pattern = Pattern {
            graph: GraphSpec {
                vertex_count: 1,
                edges: vec![],
                order: vec![],
                outputs: vec![0],
            },
            angles: vec![Angle8::ZERO],
            x_deps: vec![vec![]],
            z_deps: vec![vec![]],
        };
        for theta in 0..8 {
            for b in 0..2 {
                let mut rand = ScriptedRand::new()
                    .with_angles(&[theta])
                    .with_bits(&[0])
                    .with_branches(&[b]);
                let (out, _) = run_double_server(&pattern, &mut rand).unwrap();
                let expected = prepare_plus_theta(Angle8::new(theta as i64 + 4 * b as i64));
                let f = fidelity_mod_phase(&out.final_state, &expected).unwrap();
                assert!(f > 1.0 - 1e-9, "theta {theta} b {b}: {f}");
                assert_eq!(
                    out.corrections[0].theta_eff,
                    Angle8::new(theta as i64 + 4 * b as i64)
                );
            }
        }
    }

    #[test]
    fn double_server_two_chain_exhaustive_theta() {
        let pattern = chain(2, &[3]);
        let expected = reference_output(&pattern);
        for theta0 in 0..8 {
            for theta1 in 0..8 {
                for forced in 0..8u8 {
                    let b0 = forced & 1;
                    let b1 = (forced >> 1) & 1;
                    let s4 = (forced >> 2) & 1;
                    let mut rand = ScriptedRand::new()
                        .with_angles(&[theta0, theta1])
                        .with_bits(&[1, 0])
                        .with_branches(&[b0, b1, s4]);
                    let (out, transcript) = run_double_server(&pattern, &mut rand).unwrap();
                    let corrected = apply_corrections(&out.final_state, &out.corrections).unwrap();
                    let f = fidelity_mod_phase(&corrected, &expected).unwrap();
                    assert!(
                        f > 1.0 - 1e-9,
                        "theta ({theta0},{theta1}) forced {forced:03b}: {f}"
                    );
                    assert_eq!(transcript.server_to_server_deliveries(), 0);
                }
            }
        }
    }

    #[test]
    fn double_server_transcript_shape() {
        let pattern = chain(2, &[3]);
        let mut rand = SeededRand::new(5);
        let (_, transcript) = run_double_server(&pattern, &mut rand).unwrap();
        let kinds: Vec<&str> = transcript
            .records()
            .iter()
            .map(|r| r.message.payload.kind())
            .collect();
        assert_eq!(
            kinds,
            vec![
                "BellIssue",
                "BellIssue",
                "ThetaBatch",
                "Result",
                "Result",
                "Graph",
                "Delta",
                "Result"
            ]
        );
        // The classical angle batch goes to the first server only.
        let theta_recs: Vec<&Record> = transcript
            .records()
            .iter()
            .filter(|r| matches!(r.message.payload, Payload::ThetaBatch { .. }))
            .collect();
        assert_eq!(theta_recs.len(), 1);
        assert_eq!(theta_recs[0].to, PartyRole::Bob1);
    }

    #[test]
    fn distilled_clean_register_two_chain_all_angles() {
        // F=1 gives zero hashing rounds and all-(1,1) labels; the
        // compensation must undo the label exactly.
        let pattern = chain(2, &[6]);
        let expected = reference_output(&pattern);
        let cfg = HashingConfig::new(2, 0.0).unwrap();
        let w = WernerParams::new(1.0).unwrap();
        for theta0 in 0..8 {
            for theta1 in 0..8 {
                for forced in 0..8u8 {
                    let mut rand = ScriptedRand::new()
                        .with_angles(&[theta0, theta1])
                        .with_bits(&[0, 1])
                        .with_branches(&[forced & 1, (forced >> 1) & 1, (forced >> 2) & 1]);
                    let (out, stats, transcript) =
                        run_double_server_distilled(&pattern, &cfg, w, &mut rand).unwrap();
                    assert_eq!(stats.rounds, 0);
                    assert!(stats.decode_success);
                    let corrected = apply_corrections(&out.final_state, &out.corrections).unwrap();
                    let f = fidelity_mod_phase(&corrected, &expected).unwrap();
                    assert!(
                        f > 1.0 - 1e-9,
                        "theta ({theta0},{theta1}) forced {forced:03b}: {f}"
                    );
                    assert_eq!(transcript.server_to_server_deliveries(), 0);
                }
            }
        }
    }

    #[test]
    fn distilled_noisy_register_correct_decode_matches_reference() {
        let pattern = chain(2, &[1]);
        let expected = reference_output(&pattern);
        let cfg = HashingConfig::new(8, 0.25).unwrap();
        let w = WernerParams::new(0.95).unwrap();
        let mut good_runs = 0;
        let mut checked = 0;
        for seed in 0..120u64 {
            let mut rand = SeededRand::new(seed);
            match run_double_server_distilled(&pattern, &cfg, w, &mut rand) {
                Ok((out, stats, transcript)) => {
                    assert_eq!(stats.rounds, 5);
                    assert_eq!(transcript.server_to_server_deliveries(), 0);
                    checked += 1;
                    let corrected =
                        apply_corrections(&out.final_state, &out.corrections).unwrap();
                    let f = fidelity_mod_phase(&corrected, &expected).unwrap();
                    if f > 1.0 - 1e-9 {
                        good_runs += 1;
                    }
                }
                Err(Error::DecodeAmbiguous) => {}
                Err(e) => panic!("seed {seed}: unexpected error {e}"),
            }
        }
        // Runs whose decode found the true string reproduce the reference
        // exactly; miss-decodes show up as imperfect fidelity. The correct
        // fraction tracks the known exact-ML rate.
        assert!(checked > 80, "too few unambiguous runs: {checked}");
        assert!(
            good_runs * 10 >= checked * 6,
            "only {good_runs}/{checked} decodes reproduced the reference"
        );
    }

    #[test]
    fn distilled_rejects_bad_parameters() {
        let pattern = chain(2, &[0]);
        let w_low = WernerParams::new(0.5).unwrap();
        let cfg = HashingConfig::new(8, 0.125).unwrap();
        let mut rand = SeededRand::new(0);
        assert!(matches!(
            run_double_server_distilled(&pattern, &cfg, w_low, &mut rand),
            Err(Error::BelowThreshold { .. })
        ));

        // Yield too small for the pattern: n - R < vertices.
        let w = WernerParams::new(0.95).unwrap();
        let tight = HashingConfig::new(6, 0.25).unwrap();
        let pattern4 = chain(4, &[0, 0, 0]);
        let mut rand = SeededRand::new(0);
        assert!(matches!(
            run_double_server_distilled(&pattern4, &tight, w, &mut rand),
            Err(Error::InsufficientPairs { .. })
        ));
    }

    #[test]
    fn hash_messages_go_to_both_servers_and_back() {
        let pattern = chain(2, &[4]);
        let cfg = HashingConfig::new(8, 0.25).unwrap();
        let w = WernerParams::new(0.95).unwrap();
        let mut transcript = None;
        for seed in 0..40u64 {
            let mut rand = SeededRand::new(seed);
            if let Ok((_, _, t)) = run_double_server_distilled(&pattern, &cfg, w, &mut rand) {
                transcript = Some(t);
                break;
            }
        }
        let transcript = transcript.expect("at least one run decodes");
        for round in 1..=5u64 {
            let queries: Vec<&Record> = transcript
                .records()
                .iter()
                .filter(|r| {
                    r.message.round == round
                        && matches!(r.message.payload, Payload::HashQuery { .. })
                })
                .collect();
            let results: Vec<&Record> = transcript
                .records()
                .iter()
                .filter(|r| {
                    r.message.round == round
                        && matches!(r.message.payload, Payload::HashResult { .. })
                })
                .collect();
            assert_eq!(queries.len(), 2, "round {round}");
            assert_eq!(results.len(), 2, "round {round}");
            assert!(queries.iter().all(|r| r.from == PartyRole::Alice));
            assert!(results.iter().all(|r| r.to == PartyRole::Alice));
            let max_query_seq = queries.iter().map(|r| r.seq).max().unwrap();
            let min_result_seq = results.iter().map(|r| r.seq).min().unwrap();
            assert!(max_query_seq < min_result_seq, "round {round}");
        }
    }
}
