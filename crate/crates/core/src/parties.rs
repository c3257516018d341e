//! Protocol roles: verifier (user), prover (server) and eavesdropper.
//!
//! Intercept-resend is modelled as in-place collapse: measuring a slot and
//! resending the post-measurement eigenstate leaves exactly the collapsed
//! qubit in the state.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::auth::AuthRecord;
use crate::encoding::{self, check_length, encode, generate_key, sample_positions, Bits, EncodedState};
use crate::qubit::Basis;
use crate::scalar::Real;
use crate::{Error, Message, Result, SecretKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Storage,
    Erasure,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Storage => "storage",
            Task::Erasure => "erasure",
        }
    }

    pub fn honest_prover(self) -> ProverStrategy {
        match self {
            Task::Storage => ProverStrategy::HonestStorage,
            Task::Erasure => ProverStrategy::HonestErasure,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the prover hands back to the verifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<T> {
    /// The (possibly disturbed) quantum state.
    Storage { returned: EncodedState<T> },
    /// Diagonal-basis outcomes of every slot, in slot order.
    Erasure { announced: Bits },
}

impl<T: Real> Certificate<T> {
    pub fn len(&self) -> usize {
        match self {
            Certificate::Storage { returned } => returned.qubits().len(),
            Certificate::Erasure { announced } => announced.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProverStrategy {
    HonestStorage,
    HonestErasure,
    /// Ignores the state and announces a fixed bitstring (erasure only).
    Fabricated(Bits),
}

impl ProverStrategy {
    fn name(&self) -> &'static str {
        match self {
            ProverStrategy::HonestStorage => "honest-storage",
            ProverStrategy::HonestErasure => "honest-erasure",
            ProverStrategy::Fabricated(_) => "fabricated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionChoice {
    UniformWithoutReplacement,
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversaryStrategy {
    NoOp,
    /// Rectilinear measurement of `r` distinct slots.
    RectilinearSample {
        r: usize,
        choice: PositionChoice,
    },
    /// Rectilinear measurement of slot 0 only.
    FirstBit,
    /// Explicit slots and bases; unlisted slots are left alone.
    Custom {
        targets: Vec<(usize, Basis)>,
    },
}

impl AdversaryStrategy {
    pub fn sample(r: usize) -> Self {
        AdversaryStrategy::RectilinearSample { r, choice: PositionChoice::UniformWithoutReplacement }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AdversaryStrategy::NoOp => "noop",
            AdversaryStrategy::RectilinearSample { choice: PositionChoice::UniformWithoutReplacement, .. } => "sample",
            AdversaryStrategy::RectilinearSample { choice: PositionChoice::Prefix, .. } => "sample-prefix",
            AdversaryStrategy::FirstBit => "firstbit",
            AdversaryStrategy::Custom { .. } => "custom",
        }
    }

    /// Number of slots attacked, when fixed by the strategy.
    pub fn attacked(&self) -> usize {
        match self {
            AdversaryStrategy::NoOp => 0,
            AdversaryStrategy::RectilinearSample { r, .. } => *r,
            AdversaryStrategy::FirstBit => 1,
            AdversaryStrategy::Custom { targets } => targets.len(),
        }
    }

    pub fn validate(&self, len: usize) -> Result<()> {
        match self {
            AdversaryStrategy::NoOp => Ok(()),
            AdversaryStrategy::RectilinearSample { r, .. } => {
                if *r > len {
                    Err(Error::AttackTooLarge { r: *r, len })
                } else {
                    Ok(())
                }
            }
            AdversaryStrategy::FirstBit => {
                if len == 0 {
                    Err(Error::AttackTooLarge { r: 1, len })
                } else {
                    Ok(())
                }
            }
            AdversaryStrategy::Custom { targets } => {
                let mut seen = HashSet::with_capacity(targets.len());
                for &(p, _) in targets {
                    if p >= len {
                        return Err(Error::PositionOutOfRange { position: p, len });
                    }
                    if !seen.insert(p) {
                        return Err(Error::DuplicatePosition(p));
                    }
                }
                Ok(())
            }
        }
    }

    /// The rule mapping an eavesdropping record to a discrimination guess.
    pub fn guess_rule(&self) -> GuessRule {
        match self {
            AdversaryStrategy::NoOp => GuessRule::Uniform,
            AdversaryStrategy::FirstBit => GuessRule::FirstBitMatch,
            _ => GuessRule::AlignedMatch,
        }
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversaryStrategy::RectilinearSample { r, .. } => write!(f, "{}(r={r})", self.label()),
            AdversaryStrategy::Custom { targets } => write!(f, "custom({} slots)", targets.len()),
            _ => f.write_str(self.label()),
        }
    }
}

/// Everything the eavesdropper learned.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EavesdropRecord {
    pub measured_positions: Vec<usize>,
    pub measured_bases: Vec<Basis>,
    pub outcomes: Vec<bool>,
}

impl EavesdropRecord {
    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcome_at(&self, position: usize) -> Option<bool> {
        self.measured_positions.iter().position(|&p| p == position).map(|i| self.outcomes[i])
    }
}

/// Applies `strategy` to `state`, collapsing every attacked slot in place.
pub fn adversary_intervene<T: Real, R: Rng + ?Sized>(
    mut state: EncodedState<T>,
    strategy: &AdversaryStrategy,
    rng: &mut R,
) -> Result<(EncodedState<T>, EavesdropRecord)> {
    let len = state.len();
    strategy.validate(len)?;
    let targets: Vec<(usize, Basis)> = match strategy {
        AdversaryStrategy::NoOp => Vec::new(),
        AdversaryStrategy::FirstBit => vec![(0, Basis::Rectilinear)],
        AdversaryStrategy::RectilinearSample { r, choice } => {
            let mut positions = match choice {
                PositionChoice::UniformWithoutReplacement => sample_positions(len, *r, rng),
                PositionChoice::Prefix => (0..*r).collect(),
            };
            positions.sort_unstable();
            positions.into_iter().map(|p| (p, Basis::Rectilinear)).collect()
        }
        AdversaryStrategy::Custom { targets } => targets.clone(),
    };

    let mut record = EavesdropRecord {
        measured_positions: Vec::with_capacity(targets.len()),
        measured_bases: Vec::with_capacity(targets.len()),
        outcomes: Vec::with_capacity(targets.len()),
    };
    let qubits = state.qubits_mut();
    for (p, basis) in targets {
        let (outcome, collapsed) = qubits[p].measure(basis, rng);
        qubits[p] = collapsed;
        record.measured_positions.push(p);
        record.measured_bases.push(basis);
        record.outcomes.push(outcome);
    }
    Ok((state, record))
}

/// Produces the prover's certificate for `task`.
pub fn prover_respond<T: Real, R: Rng + ?Sized>(
    state: EncodedState<T>,
    strategy: &ProverStrategy,
    task: Task,
    rng: &mut R,
) -> Result<Certificate<T>> {
    match (strategy, task) {
        (ProverStrategy::HonestStorage, Task::Storage) => Ok(Certificate::Storage { returned: state }),
        (ProverStrategy::HonestErasure, Task::Erasure) => {
            let announced = state.qubits().iter().map(|q| q.measure(Basis::Diagonal, rng).0).collect();
            Ok(Certificate::Erasure { announced })
        }
        (ProverStrategy::Fabricated(bits), Task::Erasure) => Ok(Certificate::Erasure { announced: bits.clone() }),
        (s, t) => Err(Error::IncompatibleStrategy { strategy: s.name(), task: t.name() }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    /// The decoded message (storage, accepted only).
    pub recovered: Option<Message>,
}

/// Checks a certificate against the key with an ideal detector.
pub fn verify<T: Real, R: Rng + ?Sized>(certificate: &Certificate<T>, key: &SecretKey, rng: &mut R) -> Result<Verdict> {
    verify_with_readout(certificate, key, 0.0, rng)
}

/// As [`verify`], with the verifier's own readout flipping each
/// measured bit with probability `readout_flip`.
pub fn verify_with_readout<T: Real, R: Rng + ?Sized>(
    certificate: &Certificate<T>,
    key: &SecretKey,
    readout_flip: f64,
    rng: &mut R,
) -> Result<Verdict> {
    match certificate {
        Certificate::Storage { returned } => {
            check_length(returned, key)?;
            let mut accepted = true;
            for (p, value) in key.traps() {
                let (outcome, _) = returned.qubit(p).measure_noisy(Basis::Diagonal, readout_flip, rng);
                accepted &= outcome == value;
            }
            let recovered = if accepted { Some(decode_noisy(returned, key, readout_flip, rng)?) } else { None };
            Ok(Verdict { accepted, recovered })
        }
        Certificate::Erasure { announced } => {
            if announced.len() != key.total_length() {
                return Err(Error::LengthMismatch { expected: key.total_length(), actual: announced.len() });
            }
            let accepted = key.traps().all(|(p, value)| announced[p] == value);
            Ok(Verdict { accepted, recovered: None })
        }
    }
}

fn decode_noisy<T: Real, R: Rng + ?Sized>(
    state: &EncodedState<T>,
    key: &SecretKey,
    readout_flip: f64,
    rng: &mut R,
) -> Result<Message> {
    if readout_flip == 0.0 {
        return encoding::decode_non_trap(state, key, rng);
    }
    let bits = key
        .message_positions()
        .map(|p| state.qubit(p).measure_noisy(Basis::Rectilinear, readout_flip, rng).0)
        .collect();
    Message::new(bits)
}

/// How the eavesdropper turns its record into a guess in the
/// discrimination game (`true` = "legitimate").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuessRule {
    /// Fair coin, ignoring the record.
    Uniform,
    /// "Legitimate" iff the outcome at slot 0 equals the legitimate
    /// message's first bit.
    FirstBitMatch,
    /// "Legitimate" iff every rectilinear outcome at slot `p` equals the
    /// legitimate bit `p` (as if no trap preceded it).
    AlignedMatch,
}

impl GuessRule {
    pub fn guess<R: Rng + ?Sized>(self, record: &EavesdropRecord, legit: &Message, rng: &mut R) -> bool {
        match self {
            GuessRule::Uniform => rng.gen(),
            GuessRule::FirstBitMatch => match record.outcome_at(0) {
                Some(b) => b == legit.bit(0),
                None => rng.gen(),
            },
            GuessRule::AlignedMatch => {
                let mut informative = false;
                for ((&p, &basis), &b) in
                    record.measured_positions.iter().zip(&record.measured_bases).zip(&record.outcomes)
                {
                    if basis != Basis::Rectilinear || p >= legit.len() {
                        continue;
                    }
                    informative = true;
                    if b != legit.bit(p) {
                        return false;
                    }
                }
                if informative {
                    true
                } else {
                    rng.gen()
                }
            }
        }
    }
}

/// One complete run: key, encoding, eavesdropping, certificate, verdict.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub key: SecretKey,
    pub record: EavesdropRecord,
    pub verdict: Verdict,
}

/// Runs the protocol once on `message` with an honest prover composed with
/// `adversary`.
pub fn run_protocol<T: Real, R: Rng + ?Sized>(
    message: &Message,
    n: usize,
    task: Task,
    adversary: &AdversaryStrategy,
    readout_flip: f64,
    rng: &mut R,
) -> Result<RunOutcome> {
    let key = generate_key(message.len(), n, rng)?;
    let state: EncodedState<T> = encode(message, &key)?;
    let (state, record) = adversary_intervene(state, adversary, rng)?;
    let certificate = prover_respond(state, &task.honest_prover(), task, rng)?;
    let verdict = verify_with_readout(&certificate, &key, readout_flip, rng)?;
    Ok(RunOutcome { key, record, verdict })
}

/// One JSON-lines transcript entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub task: Task,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub adversary: String,
    pub accepted: bool,
    pub record: EavesdropRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub auth: Option<AuthRecord>,
}

impl RunTranscript {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Trap announcements an erasure prover must reproduce, for display.
pub fn expected_announcements(key: &SecretKey) -> String {
    let mut out = String::with_capacity(key.total_length());
    let mut traps = key.traps().peekable();
    for p in 0..key.total_length() {
        match traps.peek() {
            Some(&(tp, v)) if tp == p => {
                traps.next();
                out.push(if v { '1' } else { '0' });
            }
            _ => out.push('.'),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{decode_non_trap, random_bits};
    use crate::rng::seeded;
    use bitvec::prelude::*;

    type State = EncodedState<f64>;

    fn instance(m: usize, n: usize, seed: u64) -> (Message, SecretKey, State, crate::RandomSource) {
        let mut rng = seeded(seed);
        let msg = Message::random(m, &mut rng).unwrap();
        let key = generate_key(m, n, &mut rng).unwrap();
        let state = encode(&msg, &key).unwrap();
        (msg, key, state, rng)
    }

    #[test]
    fn noop_leaves_state_alone() {
        let (_, _, state, mut rng) = instance(20, 5, 1);
        let (after, record) = adversary_intervene(state.clone(), &AdversaryStrategy::NoOp, &mut rng).unwrap();
        assert_eq!(after, state);
        assert!(record.is_empty());
    }

    #[test]
    fn full_sample_reads_message_exactly() {
        let (m, n) = (50, 10);
        let mut trap_ones = 0usize;
        let runs = 2000;
        for s in 0..runs {
            let (msg, key, state, mut rng) = instance(m, n, s);
            let (_, record) = adversary_intervene(state, &AdversaryStrategy::sample(m + n), &mut rng).unwrap();
            assert_eq!(record.measured_positions, (0..m + n).collect::<Vec<_>>());
            let read: Vec<bool> = key.message_positions().map(|p| record.outcomes[p]).collect();
            assert_eq!(Message::from_bools(&read).unwrap(), msg);
            trap_ones += key.trap_positions().iter().filter(|&&p| record.outcomes[p]).count();
        }
        let f = trap_ones as f64 / (runs as usize * n) as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / (runs as f64 * n as f64)).sqrt());
    }

    #[test]
    fn firstbit_on_message_slot() {
        for s in 0..200 {
            let (msg, key, state, mut rng) = instance(10, 2, s);
            if key.is_trap(0) {
                continue;
            }
            let (after, record) = adversary_intervene(state.clone(), &AdversaryStrategy::FirstBit, &mut rng).unwrap();
            assert_eq!(record.measured_positions, vec![0]);
            assert_eq!(record.measured_bases, vec![Basis::Rectilinear]);
            assert_eq!(record.outcomes, vec![msg.bit(0)]);
            assert_eq!(after, state);
        }
    }

    #[test]
    fn invalid_strategies_are_rejected() {
        let (_, _, state, mut rng) = instance(4, 2, 3);
        assert_eq!(
            adversary_intervene(state.clone(), &AdversaryStrategy::sample(7), &mut rng).unwrap_err(),
            Error::AttackTooLarge { r: 7, len: 6 }
        );
        let dup = AdversaryStrategy::Custom { targets: vec![(1, Basis::Diagonal), (1, Basis::Rectilinear)] };
        assert_eq!(adversary_intervene(state.clone(), &dup, &mut rng).unwrap_err(), Error::DuplicatePosition(1));
        let oob = AdversaryStrategy::Custom { targets: vec![(6, Basis::Diagonal)] };
        assert!(matches!(adversary_intervene(state, &oob, &mut rng), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn honest_runs_accept() {
        for s in 0..300 {
            let (msg, key, state, mut rng) = instance(30, 6, s);
            let cert = prover_respond(state.clone(), &ProverStrategy::HonestStorage, Task::Storage, &mut rng).unwrap();
            assert_eq!(cert, Certificate::Storage { returned: state.clone() });
            let v = verify(&cert, &key, &mut rng).unwrap();
            assert!(v.accepted);
            assert_eq!(v.recovered, Some(msg));

            let cert = prover_respond(state, &ProverStrategy::HonestErasure, Task::Erasure, &mut rng).unwrap();
            let Certificate::Erasure { announced } = &cert else { panic!() };
            assert!(key.traps().all(|(p, v)| announced[p] == v));
            let v = verify(&cert, &key, &mut rng).unwrap();
            assert!(v.accepted && v.recovered.is_none());
        }
    }

    #[test]
    fn incompatible_prover_errors() {
        let (_, _, state, mut rng) = instance(3, 1, 0);
        assert!(prover_respond(state.clone(), &ProverStrategy::HonestStorage, Task::Erasure, &mut rng).is_err());
        assert!(prover_respond(state, &ProverStrategy::Fabricated(Bits::new()), Task::Storage, &mut rng).is_err());
    }

    #[test]
    fn flipped_trap_announcement_rejects() {
        let (_, key, state, mut rng) = instance(12, 4, 8);
        let Certificate::Erasure { mut announced } =
            prover_respond(state, &ProverStrategy::HonestErasure, Task::Erasure, &mut rng).unwrap()
        else {
            panic!()
        };
        let p = key.trap_positions()[2];
        let old = announced[p];
        announced.set(p, !old);
        let cert = Certificate::<f64>::Erasure { announced };
        assert!(!verify(&cert, &key, &mut rng).unwrap().accepted);
    }

    #[test]
    fn non_trap_announcements_are_ignored() {
        let (_, key, _, mut rng) = instance(12, 4, 9);
        let mut announced = random_bits(16, &mut rng);
        for (p, v) in key.traps() {
            announced.set(p, v);
        }
        let cert = Certificate::<f64>::Erasure { announced };
        assert!(verify(&cert, &key, &mut rng).unwrap().accepted);
    }

    #[test]
    fn verify_checks_lengths() {
        let (_, key, _, mut rng) = instance(5, 2, 10);
        let cert = Certificate::<f64>::Erasure { announced: Bits::repeat(false, 3) };
        assert!(matches!(verify(&cert, &key, &mut rng), Err(Error::LengthMismatch { .. })));
        let cert = Certificate::Storage { returned: State::from_qubits(vec![]) };
        assert!(matches!(verify(&cert, &key, &mut rng), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn erasure_non_trap_announcements_look_uniform() {
        let (mut ones, mut total) = (0usize, 0usize);
        for s in 0..1000 {
            let (_, key, state, mut rng) = instance(100, 10, s);
            let Certificate::Erasure { announced } =
                prover_respond(state, &ProverStrategy::HonestErasure, Task::Erasure, &mut rng).unwrap()
            else {
                panic!()
            };
            for p in key.message_positions() {
                ones += announced[p] as usize;
                total += 1;
            }
        }
        let f = ones as f64 / total as f64;
        assert!((f - 0.5).abs() < 0.005, "{f}");
    }

    #[test]
    fn planted_trap_hits_pass_with_two_to_minus_k() {
        // Adversary measures exactly k trap slots (it is told where they are).
        for k in 0..=4usize {
            let trials = 40_000;
            let mut passed = 0;
            let mut rng = seeded(100 + k as u64);
            for _ in 0..trials {
                let msg = Message::random(20, &mut rng).unwrap();
                let key = generate_key(20, 4, &mut rng).unwrap();
                let state: State = encode(&msg, &key).unwrap();
                let targets = key.trap_positions()[..k].iter().map(|&p| (p, Basis::Rectilinear)).collect();
                let (state, _) = adversary_intervene(state, &AdversaryStrategy::Custom { targets }, &mut rng).unwrap();
                let cert = Certificate::Storage { returned: state };
                passed += verify(&cert, &key, &mut rng).unwrap().accepted as usize;
            }
            let p = 0.5f64.powi(k as i32);
            let est = passed as f64 / trials as f64;
            assert!((est - p).abs() <= 3.0 * (p * (1.0 - p) / trials as f64).sqrt() + 1e-12, "k={k}: {est}");
        }
    }

    #[test]
    fn blind_fabrication_passes_at_two_to_minus_n() {
        let (m, n, trials) = (10, 3, 80_000);
        let mut rng = seeded(55);
        let mut passed = 0;
        for _ in 0..trials {
            let key = generate_key(m, n, &mut rng).unwrap();
            let cert = prover_respond(
                State::from_qubits(vec![]),
                &ProverStrategy::Fabricated(random_bits(m + n, &mut rng)),
                Task::Erasure,
                &mut rng,
            )
            .unwrap();
            passed += verify(&cert, &key, &mut rng).unwrap().accepted as usize;
        }
        let est = passed as f64 / trials as f64;
        assert!((est - 0.125).abs() < 3.0 * (0.125f64 * 0.875 / trials as f64).sqrt());
    }

    #[test]
    fn x_flip_on_message_survives_certification() {
        let (msg, key, mut state, mut rng) = instance(16, 4, 21);
        let targets: Vec<usize> = key.message_positions().collect();
        for p in targets {
            let flipped = state.qubit(p).apply_x();
            state.qubits_mut()[p] = flipped;
        }
        let cert = Certificate::Storage { returned: state.clone() };
        let v = verify(&cert, &key, &mut rng).unwrap();
        assert!(v.accepted);
        let inverted: Vec<bool> = msg.iter().map(|b| !b).collect();
        assert_eq!(v.recovered.unwrap(), Message::from_bools(&inverted).unwrap());
        assert_eq!(decode_non_trap(&state, &key, &mut rng).unwrap().len(), 16);
    }

    #[test]
    fn guess_rules() {
        let legit: Message = "0110".parse().unwrap();
        let mut rng = seeded(4);
        let rec = EavesdropRecord {
            measured_positions: vec![0],
            measured_bases: vec![Basis::Rectilinear],
            outcomes: vec![false],
        };
        assert!(GuessRule::FirstBitMatch.guess(&rec, &legit, &mut rng));
        let rec = EavesdropRecord { outcomes: vec![true], ..rec };
        assert!(!GuessRule::FirstBitMatch.guess(&rec, &legit, &mut rng));
        let rec = EavesdropRecord {
            measured_positions: vec![1, 2],
            measured_bases: vec![Basis::Rectilinear; 2],
            outcomes: vec![true, true],
        };
        assert!(GuessRule::AlignedMatch.guess(&rec, &legit, &mut rng));
        assert_eq!(AdversaryStrategy::FirstBit.guess_rule(), GuessRule::FirstBitMatch);
        assert_eq!(AdversaryStrategy::NoOp.guess_rule(), GuessRule::Uniform);
    }

    #[test]
    fn transcript_json_line() {
        let t = RunTranscript {
            task: Task::Erasure,
            seed: 7,
            m: 2,
            n: 1,
            adversary: "firstbit".into(),
            accepted: true,
            record: EavesdropRecord {
                measured_positions: vec![0],
                measured_bases: vec![Basis::Rectilinear],
                outcomes: vec![true],
            },
            auth: None,
        };
        let line = t.to_json_line();
        assert_eq!(
            line,
            r#"{"task":"erasure","seed":7,"m":2,"n":1,"adversary":"firstbit","accepted":true,"record":{"measured_positions":[0],"measured_bases":["rectilinear"],"outcomes":[true]}}"#
        );
        assert_eq!(serde_json::from_str::<RunTranscript>(&line).unwrap(), t);
    }

    #[test]
    fn expected_announcement_view() {
        let key = SecretKey::new(5, vec![1, 3], bits![u64, Lsb0; 1, 0].to_bitvec()).unwrap();
        assert_eq!(expected_announcements(&key), ".1.0.");
    }
}
