//! Closed-form certification analytics.
//!
//! An eavesdropper measuring `r` uniformly chosen slots in the rectilinear
//! basis hits `K ~ Hypergeometric(m + n, n, r)` traps, and each hit trap
//! survives the diagonal check with probability 1/2. So
//!
//! ```text
//! P[accept] = Σ_k 2^{-k} C(n,k) C(m,r-k) / C(m+n,r)
//! ```
//!
//! which is evaluated here in log space ([`cert_exact`]) and in exact
//! rational arithmetic ([`cert_exact_rational`]). The Hoeffding-style upper
//! bound is reproduced exactly as published ([`hoeffding_bound`]).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::scalar::{CompensatedSum, Real};
use crate::{Error, Result};

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_choose(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

fn check_attack(m: usize, n: usize, r: usize) -> Result<()> {
    if r > m + n {
        return Err(Error::AttackTooLarge { r, len: m + n });
    }
    Ok(())
}

/// `P[K = k]` for `K ~ Hypergeometric(population m+n, successes n, draws r)`.
pub fn hypergeom_pmf<T: Real>(m: usize, n: usize, r: usize, k: usize) -> Result<T> {
    check_attack(m, n, r)?;
    if k > n || k > r || r - k > m {
        return Ok(T::zero());
    }
    let ln = ln_choose(n, k) + ln_choose(m, r - k) - ln_choose(m + n, r);
    Ok(T::from_f64_lossy(ln.exp()))
}

/// Support of `K`: `max(0, r-m) ..= min(n, r)`.
fn support(m: usize, n: usize, r: usize) -> std::ops::RangeInclusive<usize> {
    r.saturating_sub(m)..=n.min(r)
}

/// Exact acceptance probability under a uniform `r`-slot rectilinear attack.
pub fn cert_exact<T: Real>(m: usize, n: usize, r: usize) -> Result<T> {
    check_attack(m, n, r)?;
    let total = ln_choose(m + n, r);
    let sum: CompensatedSum<T> = support(m, n, r)
        .map(|k| {
            let ln = ln_choose(n, k) + ln_choose(m, r - k) - total - k as f64 * std::f64::consts::LN_2;
            T::from_f64_lossy(ln.exp())
        })
        .collect();
    Ok(sum.value().min(T::one()))
}

fn big_choose(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// [`cert_exact`] in exact rational arithmetic.
pub fn cert_exact_rational(m: usize, n: usize, r: usize) -> Result<BigRational> {
    check_attack(m, n, r)?;
    let denom = BigInt::from(big_choose(m + n, r));
    let mut sum = BigRational::zero();
    for k in support(m, n, r) {
        let num = BigInt::from(big_choose(n, k) * big_choose(m, r - k));
        sum += BigRational::new(num, denom.clone() << k);
    }
    Ok(sum)
}

/// `E[K] = r n / (m + n)`.
pub fn hypergeom_mean<T: Real>(m: usize, n: usize, r: usize) -> Result<T> {
    check_attack(m, n, r)?;
    if m + n == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_usize_lossy(r) * T::from_usize_lossy(n) / T::from_usize_lossy(m + n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoeffdingBound<T> {
    pub raw: T,
    pub clamped: T,
}

impl<T: Real> HoeffdingBound<T> {
    fn from_raw(raw: T) -> Self {
        Self { raw, clamped: raw.min(T::one()) }
    }
}

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if !(epsilon > T::zero() && epsilon.is_finite()) {
        return Err(Error::InvalidEpsilon(epsilon.to_f64_lossy()));
    }
    Ok(())
}

/// `2^{-rn/(m+n) + ε} + 2 exp(-2 ε² r)`, with ε an absolute deviation of `K`.
///
/// This is the published form. It is not a valid upper bound everywhere:
/// with ε counted in traps, the tail term `2 exp(-2ε²r)` should read
/// `2 exp(-2ε²/r)`. See [`hoeffding_bound_scaled`] for a consistent variant.
pub fn hoeffding_bound<T: Real>(m: usize, n: usize, r: usize, epsilon: T) -> Result<HoeffdingBound<T>> {
    check_epsilon(epsilon)?;
    let mu: T = hypergeom_mean(m, n, r)?;
    let two = T::one() + T::one();
    let r = T::from_usize_lossy(r);
    let raw = two.powf(-mu + epsilon) + two * (-two * epsilon * epsilon * r).exp();
    Ok(HoeffdingBound::from_raw(raw))
}

/// `2^{-(μ - εr)} + 2 exp(-2 ε² r)`, with ε a deviation of the trap fraction
/// `K / r`, for which Hoeffding's inequality for sampling without
/// replacement gives the tail term directly.
pub fn hoeffding_bound_scaled<T: Real>(m: usize, n: usize, r: usize, epsilon: T) -> Result<HoeffdingBound<T>> {
    check_epsilon(epsilon)?;
    let mu: T = hypergeom_mean(m, n, r)?;
    let two = T::one() + T::one();
    let r = T::from_usize_lossy(r);
    let raw = two.powf(-(mu - epsilon * r)) + two * (-two * epsilon * epsilon * r).exp();
    Ok(HoeffdingBound::from_raw(raw))
}

fn check_firstbit(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::DegenerateParameters { m, n });
    }
    Ok(())
}

fn trap_fraction<T: Real>(m: usize, n: usize) -> T {
    T::from_usize_lossy(n) / T::from_usize_lossy(m + n)
}

/// Acceptance probability of the first-slot attack: `1 - n / (2(n+m))`.
pub fn firstbit_cert<T: Real>(m: usize, n: usize) -> Result<T> {
    check_firstbit(m, n)?;
    let two = T::one() + T::one();
    Ok(T::one() - trap_fraction::<T>(m, n) / two)
}

/// Discrimination-advantage lower bound of the first-slot attack:
/// `(1 - n/(n+m)) / 4`.
pub fn firstbit_advantage<T: Real>(m: usize, n: usize) -> Result<T> {
    check_firstbit(m, n)?;
    let four = T::from_f64_lossy(4.0);
    Ok((T::one() - trap_fraction::<T>(m, n)) / four)
}

/// `P[correct guess | accepted]` for the first-slot attack with the
/// match-the-first-bit guessing rule against a uniform dummy.
///
/// Slot 0 holds a message bit with probability `1 - p` (`p = n/(m+n)`);
/// then the certificate always passes and the guess is right with
/// probability 3/4. Otherwise the trap passes with probability 1/2 and the
/// guess is a coin flip.
pub fn firstbit_conditional_success<T: Real>(m: usize, n: usize) -> Result<T> {
    let cert = firstbit_cert::<T>(m, n)?;
    let p = trap_fraction::<T>(m, n);
    let q = T::from_f64_lossy(0.25);
    let three_q = T::from_f64_lossy(0.75);
    Ok(((T::one() - p) * three_q + p * q) / cert)
}

/// One row of the bound table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsRow {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub epsilon: f64,
    pub exact: f64,
    pub hoeffding_raw: f64,
    pub hoeffding_clamped: f64,
    pub mean_k: f64,
}

impl BoundsRow {
    pub const CSV_HEADER: &'static str = "m,n,r,epsilon,exact,hoeffding_raw,hoeffding_clamped,mean_K";

    pub fn compute(m: usize, n: usize, r: usize, epsilon: f64) -> Result<Self> {
        let h = hoeffding_bound(m, n, r, epsilon)?;
        Ok(Self {
            m,
            n,
            r,
            epsilon,
            exact: cert_exact(m, n, r)?,
            hoeffding_raw: h.raw,
            hoeffding_clamped: h.clamped,
            mean_k: hypergeom_mean(m, n, r)?,
        })
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:.12e},{:.12e},{:.12e},{}",
            self.m, self.n, self.r, self.epsilon, self.exact, self.hoeffding_raw, self.hoeffding_clamped, self.mean_k
        )
    }
}

/// Table rows for every `r` in `rs` and every ε in `epsilons`.
pub fn bounds_table(m: usize, n: usize, rs: &[usize], epsilons: &[f64]) -> Result<Vec<BoundsRow>> {
    rs.iter().flat_map(|&r| epsilons.iter().map(move |&e| BoundsRow::compute(m, n, r, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cert_exact_small_values() {
        assert_eq!(cert_exact::<f64>(50, 10, 0).unwrap(), 1.0);
        // Hand expansion: k=0 term C(1,0)C(2,1)/C(3,1) = 2/3, k=1 term 1/2 * 1/3.
        assert!(close(cert_exact::<f64>(2, 1, 1).unwrap(), 5.0 / 6.0, 1e-13));
        assert!(close(cert_exact::<f64>(0, 1, 1).unwrap(), 0.5, 1e-13));
        assert_eq!(cert_exact_rational(2, 1, 1).unwrap(), BigRational::new(5.into(), 6.into()));
        assert!(matches!(cert_exact::<f64>(2, 1, 4), Err(Error::AttackTooLarge { .. })));
    }

    #[test]
    fn all_slots_attacked_gives_two_to_minus_n() {
        for n in 1..30 {
            let p = cert_exact::<f64>(100, n, 100 + n).unwrap();
            assert!(close(p, 0.5f64.powi(n as i32), 1e-14 * p.max(1e-300) + 1e-300));
        }
    }

    #[test]
    fn log_space_matches_rational_route() {
        for total in 1..=30usize {
            for n in 0..=total {
                let m = total - n;
                for r in 0..=total {
                    let exact = cert_exact_rational(m, n, r).unwrap().to_f64().unwrap();
                    let fast = cert_exact::<f64>(m, n, r).unwrap();
                    assert!(close(fast, exact, 1e-12 * exact.max(1e-3)), "({m},{n},{r}): {fast} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn single_precision_agrees() {
        let a = cert_exact::<f32>(100, 20, 60).unwrap() as f64;
        let b = cert_exact::<f64>(100, 20, 60).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn pmf_sums_to_one_and_mean_matches() {
        for &(m, n) in &[(2usize, 1usize), (50, 10), (100, 20), (200, 20), (7, 9)] {
            for r in 0..=(m + n) {
                let pmf: Vec<f64> = (0..=n).map(|k| hypergeom_pmf(m, n, r, k).unwrap()).collect();
                let total: CompensatedSum<f64> = pmf.iter().copied().collect();
                assert!(close(total.value(), 1.0, 1e-12), "({m},{n},{r})");
                let mean: CompensatedSum<f64> = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).collect();
                let mu: f64 = hypergeom_mean(m, n, r).unwrap();
                assert!(close(mean.value(), mu, 1e-12 * mu.max(1.0)), "({m},{n},{r})");
            }
        }
    }

    #[test]
    fn mean_values() {
        assert_eq!(hypergeom_mean::<f64>(10, 10, 7).unwrap(), 3.5);
        assert!(close(hypergeom_mean::<f64>(2, 1, 1).unwrap(), 1.0 / 3.0, 1e-15));
        assert_eq!(hypergeom_mean::<f64>(5, 3, 0).unwrap(), 0.0);
    }

    #[test]
    fn cert_exact_is_monotone() {
        for &(m, n) in &[(50usize, 10usize), (100, 20), (30, 30)] {
            let series: Vec<f64> = (0..=(m + n)).map(|r| cert_exact(m, n, r).unwrap()).collect();
            assert!(series.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
        for r in 0..=40 {
            let series: Vec<f64> = (1..=20).map(|n| cert_exact(40, n, r).unwrap()).collect();
            assert!(series.windows(2).all(|w| w[1] <= w[0] + 1e-15), "r={r}");
        }
    }

    #[test]
    fn hoeffding_limits() {
        let b = hoeffding_bound::<f64>(50, 10, 0, 0.5).unwrap();
        assert!(close(b.raw, 2f64.powf(0.5) + 2.0, 1e-12));
        assert_eq!(b.clamped, 1.0);
        let b = hoeffding_bound::<f64>(50, 10, 30, 40.0).unwrap();
        assert!(b.raw > 1.0 && b.clamped == 1.0);
        assert!(hoeffding_bound::<f64>(50, 10, 30, 0.0).is_err());
        assert!(hoeffding_bound::<f64>(50, 10, 30, f64::INFINITY).is_err());
    }

    #[test]
    fn published_bound_fails_at_a_documented_point() {
        // Exact value 2.6479e-3 exceeds the literal bound 1.3811e-3.
        let exact: f64 = cert_exact(100, 20, 60).unwrap();
        let b = hoeffding_bound::<f64>(100, 20, 60, 0.5).unwrap();
        assert!(close(exact, 2.647_952_287_586e-3, 1e-14));
        assert!(close(b.raw, 1.381_067_932_192e-3, 1e-14));
        assert!(b.raw < exact);
    }

    #[test]
    fn scaled_bound_holds_on_the_grid() {
        for &m in &[50usize, 100, 200] {
            for &n in &[10usize, 20] {
                for r in 0..=(m + n) {
                    let exact: f64 = cert_exact(m, n, r).unwrap();
                    for &eps in &[0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
                        let b = hoeffding_bound_scaled(m, n, r, eps).unwrap();
                        assert!(exact <= b.raw * (1.0 + 1e-12), "({m},{n},{r},{eps})");
                    }
                }
            }
        }
    }

    #[test]
    fn firstbit_closed_forms() {
        assert!(close(firstbit_cert::<f64>(90, 10).unwrap(), 0.95, 1e-15));
        assert!(close(firstbit_advantage::<f64>(90, 10).unwrap(), 0.225, 1e-15));
        assert!(close(firstbit_cert::<f64>(7, 7).unwrap(), 0.75, 1e-15));
        assert!(close(firstbit_advantage::<f64>(7, 7).unwrap(), 0.125, 1e-15));
        let c: f64 = firstbit_cert(1_000_000_000, 1).unwrap();
        let a: f64 = firstbit_advantage(1_000_000_000, 1).unwrap();
        assert!(close(c, 1.0, 1e-8) && close(a, 0.25, 1e-8));
        assert!(firstbit_cert::<f64>(0, 1).is_err());
    }

    #[test]
    fn firstbit_product_stays_away_from_zero_at_fixed_ratio() {
        for k in 1..=12 {
            let n = 1usize << k;
            let m = 9 * n;
            let prod = firstbit_cert::<f64>(m, n).unwrap() * firstbit_advantage::<f64>(m, n).unwrap();
            assert!(close(prod, 0.95 * 0.225, 1e-12));
        }
    }

    #[test]
    fn firstbit_conditional_value() {
        let s: f64 = firstbit_conditional_success(90, 10).unwrap();
        assert!(close(s, 0.7 / 0.95, 1e-15));
        assert!(s - 0.5 >= firstbit_advantage::<f64>(90, 10).unwrap());
    }

    #[test]
    fn table_rows() {
        let rows = bounds_table(2, 1, &[0, 1], &[0.5, 1.0]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(close(rows[2].exact, 5.0 / 6.0, 1e-13));
        assert!(rows[2].to_csv().starts_with("2,1,1,0.5,"));
        assert_eq!(BoundsRow::CSV_HEADER.split(',').count(), rows[0].to_csv().split(',').count());
    }
}
