//! Exact single-qubit mechanics in the real plane.
//!
//! Every state reachable in the protocol (honest encodings, intercept-resend
//! collapses, X flips) is a real linear combination of `|0⟩` and `|1⟩`, so a
//! qubit is stored as two real amplitudes in the computational basis.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Preparation / measurement basis.
///
/// Diagonal outcome `false` is `|+⟩`, `true` is `|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    pub fn conjugate(self) -> Self {
        match self {
            Basis::Rectilinear => Basis::Diagonal,
            Basis::Diagonal => Basis::Rectilinear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit<T> {
    amplitude0: T,
    amplitude1: T,
}

impl<T: Real> Qubit<T> {
    /// Builds a state from raw amplitudes, rejecting unnormalized vectors.
    pub fn from_amplitudes(amplitude0: T, amplitude1: T) -> Option<Self> {
        let q = Self { amplitude0, amplitude1 };
        q.is_normalized().then_some(q)
    }

    /// BB84 eigenstate for `bit` in `basis`.
    pub fn prepare(bit: bool, basis: Basis) -> Self {
        let (a0, a1) = match (basis, bit) {
            (Basis::Rectilinear, false) => (T::one(), T::zero()),
            (Basis::Rectilinear, true) => (T::zero(), T::one()),
            (Basis::Diagonal, false) => (T::frac_1_sqrt_2(), T::frac_1_sqrt_2()),
            (Basis::Diagonal, true) => (T::frac_1_sqrt_2(), -T::frac_1_sqrt_2()),
        };
        Self { amplitude0: a0, amplitude1: a1 }
    }

    pub fn amplitudes(&self) -> (T, T) {
        (self.amplitude0, self.amplitude1)
    }

    pub fn norm_squared(&self) -> T {
        self.amplitude0 * self.amplitude0 + self.amplitude1 * self.amplitude1
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - T::one()).abs() <= T::NORM_TOLERANCE
    }

    /// Born probability of reading `false` when measuring in `basis`,
    /// snapped to exactly 0 or 1 within the normalization tolerance.
    pub fn probability_zero(&self, basis: Basis) -> T {
        let overlap = match basis {
            Basis::Rectilinear => self.amplitude0,
            Basis::Diagonal => (self.amplitude0 + self.amplitude1) * T::frac_1_sqrt_2(),
        };
        let p = overlap * overlap;
        if p <= T::NORM_TOLERANCE {
            T::zero()
        } else if p >= T::one() - T::NORM_TOLERANCE {
            T::one()
        } else {
            p
        }
    }

    /// Born probability of reading `outcome` in `basis`.
    pub fn probability(&self, basis: Basis, outcome: bool) -> T {
        let p0 = self.probability_zero(basis);
        if outcome {
            T::one() - p0
        } else {
            p0
        }
    }

    /// Projective measurement; returns the outcome and the collapsed state.
    pub fn measure<R: Rng + ?Sized>(&self, basis: Basis, rng: &mut R) -> (bool, Self) {
        let p0 = self.probability_zero(basis).to_f64_lossy();
        let outcome = rng.gen::<f64>() >= p0;
        (outcome, Self::prepare(outcome, basis))
    }

    /// Measurement followed by a classical readout error: the reported bit
    /// is flipped with probability `flip_probability`. The collapse follows
    /// the true outcome.
    pub fn measure_noisy<R: Rng + ?Sized>(&self, basis: Basis, flip_probability: f64, rng: &mut R) -> (bool, Self) {
        let (outcome, collapsed) = self.measure(basis, rng);
        if flip_probability > 0.0 && rng.gen::<f64>() < flip_probability {
            (!outcome, collapsed)
        } else {
            (outcome, collapsed)
        }
    }

    /// Pauli X: swaps the two amplitudes.
    pub fn apply_x(&self) -> Self {
        Self { amplitude0: self.amplitude1, amplitude1: self.amplitude0 }
    }

    /// Equality up to a global sign, within `tol`.
    pub fn same_ray(&self, other: &Self, tol: T) -> bool {
        let close = |s: T| {
            (self.amplitude0 - s * other.amplitude0).abs() <= tol
                && (self.amplitude1 - s * other.amplitude1).abs() <= tol
        };
        close(T::one()) || close(-T::one())
    }

    pub fn negated(&self) -> Self {
        Self { amplitude0: -self.amplitude0, amplitude1: -self.amplitude1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_1_SQRT_2;

    type Q = Qubit<f64>;

    const ALL: [(bool, Basis); 4] =
        [(false, Basis::Rectilinear), (true, Basis::Rectilinear), (false, Basis::Diagonal), (true, Basis::Diagonal)];

    #[test]
    fn prepare_gives_bb84_states() {
        assert_eq!(Q::prepare(false, Basis::Rectilinear).amplitudes(), (1.0, 0.0));
        assert_eq!(Q::prepare(true, Basis::Rectilinear).amplitudes(), (0.0, 1.0));
        assert_eq!(Q::prepare(false, Basis::Diagonal).amplitudes(), (FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        assert_eq!(Q::prepare(true, Basis::Diagonal).amplitudes(), (FRAC_1_SQRT_2, -FRAC_1_SQRT_2));
    }

    #[test]
    fn eigenstates_measure_deterministically() {
        let mut rng = seeded(1);
        for (bit, basis) in ALL {
            let q = Q::prepare(bit, basis);
            assert!(q.is_normalized());
            assert_eq!(q.probability(basis, bit), 1.0);
            for _ in 0..1000 {
                let (b, c) = q.measure(basis, &mut rng);
                assert_eq!(b, bit);
                assert_eq!(c, q);
            }
        }
    }

    #[test]
    fn conjugate_basis_is_half_half() {
        for (bit, basis) in ALL {
            let q = Q::prepare(bit, basis);
            assert!((q.probability_zero(basis.conjugate()) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn born_rule_frequency() {
        let mut rng = seeded(2024);
        let q = Q::prepare(false, Basis::Rectilinear);
        let trials = 100_000;
        let zeros = (0..trials).filter(|_| !q.measure(Basis::Diagonal, &mut rng).0).count();
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.005, "freq {freq}");
    }

    #[test]
    fn repeated_measurement_is_idempotent() {
        let mut rng = seeded(3);
        for _ in 0..1000 {
            let q = Q::prepare(false, Basis::Diagonal);
            let (first, collapsed) = q.measure(Basis::Rectilinear, &mut rng);
            let (second, _) = collapsed.measure(Basis::Rectilinear, &mut rng);
            assert_eq!(first, second);
        }
    }

    #[test]
    fn x_gate() {
        assert_eq!(Q::prepare(false, Basis::Rectilinear).apply_x(), Q::prepare(true, Basis::Rectilinear));
        let plus = Q::prepare(false, Basis::Diagonal);
        assert_eq!(plus.apply_x(), plus);
        let minus = Q::prepare(true, Basis::Diagonal);
        let flipped = minus.apply_x();
        assert_eq!(flipped.amplitudes(), (-FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        assert!(flipped.same_ray(&minus, 1e-15));
        assert_eq!(flipped.probability(Basis::Diagonal, true), 1.0);
    }

    #[test]
    fn from_amplitudes_checks_norm() {
        assert!(Q::from_amplitudes(0.6, 0.8).is_some());
        assert!(Q::from_amplitudes(0.6, 0.6).is_none());
    }

    #[test]
    fn noisy_readout_flips_at_rate() {
        let mut rng = seeded(9);
        let q = Q::prepare(false, Basis::Rectilinear);
        let n = 100_000;
        let flips = (0..n).filter(|_| q.measure_noisy(Basis::Rectilinear, 0.1, &mut rng).0).count();
        let rate = flips as f64 / n as f64;
        assert!((rate - 0.1).abs() < 3.0 * (0.09f64 / n as f64).sqrt() + 1e-3);
        assert!(!(0..1000).any(|_| q.measure_noisy(Basis::Rectilinear, 0.0, &mut rng).0));
    }

    #[test]
    fn single_precision_works_too() {
        let q = Qubit::<f32>::prepare(true, Basis::Diagonal);
        assert!(q.is_normalized());
        assert_eq!(q.probability(Basis::Diagonal, true), 1.0);
        assert!((q.probability_zero(Basis::Rectilinear) - 0.5).abs() < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_state() -> impl Strategy<Value = Q> {
            (0.0..std::f64::consts::TAU).prop_map(|t| Q::from_amplitudes(t.cos(), t.sin()).unwrap())
        }

        fn any_basis() -> impl Strategy<Value = Basis> {
            prop_oneof![Just(Basis::Rectilinear), Just(Basis::Diagonal)]
        }

        proptest! {
            #[test]
            fn operations_preserve_norm(q in any_state(), basis in any_basis(), seed in any::<u64>()) {
                prop_assert!(q.apply_x().is_normalized());
                let (_, c) = q.measure(basis, &mut seeded(seed));
                prop_assert!(c.is_normalized());
            }

            #[test]
            fn global_sign_is_unobservable(q in any_state(), basis in any_basis()) {
                let diff = q.probability_zero(basis) - q.negated().probability_zero(basis);
                prop_assert!(diff.abs() < 1e-12);
            }

            #[test]
            fn probabilities_sum_to_one(q in any_state(), basis in any_basis()) {
                let total = q.probability(basis, false) + q.probability(basis, true);
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }
}
