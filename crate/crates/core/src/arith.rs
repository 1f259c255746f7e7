//! Real numbers encoded in ensemble states, and the fixed circuits that do
//! arithmetic on them.
//!
//! | type    | ensembles                     | value                         | range     |
//! |---------|-------------------------------|-------------------------------|-----------|
//! | `Real1` | `x`                           | `S₁₁(x)`                      | `[0, 1]`  |
//! | `Real2` | `plus`, `minus`               | `S₁₁(plus) − S₁₁(minus)`      | `[−1, 1]` |
//! | `Real4` | `num: Real2`, `den: Real2`    | `r2(num) / r2(den)`           | all reals |
//!
//! Every operation consumes its operands. A value needed twice is cloned
//! first; circuits that need internal copies (`mu1`, `mu2`, `mean_r4`) clone
//! for themselves.

use crate::densop::{gate_mean_unitary, gate_sigma2, DensityMatrix};
use crate::error::{Error, Result};
use crate::qcm::{EnsembleId, EnsembleStore};
use crate::scalar::Scalar;

/// Number in `[0, 1]` carried by one ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Real1(pub EnsembleId);

/// Number in `[−1, 1]` carried by a pair of ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Real2 {
    pub plus: Real1,
    pub minus: Real1,
}

/// Arbitrary real number `num / den`. In qubit order: `num.plus`,
/// `num.minus`, `den.plus`, `den.minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Real4 {
    pub num: Real2,
    pub den: Real2,
}

impl Real2 {
    pub fn ids(&self) -> [EnsembleId; 2] {
        [self.plus.0, self.minus.0]
    }
}

impl Real4 {
    pub fn ids(&self) -> [EnsembleId; 4] {
        [
            self.num.plus.0,
            self.num.minus.0,
            self.den.plus.0,
            self.den.minus.0,
        ]
    }
}

/// Fails unless every id is live and no id repeats.
fn check_operands<T: Scalar>(store: &EnsembleStore<T>, ids: &[EnsembleId]) -> Result<()> {
    for (k, &id) in ids.iter().enumerate() {
        if ids[..k].contains(&id) {
            return Err(Error::SameOperand(id));
        }
        store.p_one(id)?;
    }
    Ok(())
}

pub fn prepare_r1<T: Scalar>(store: &mut EnsembleStore<T>, p: f64) -> Result<Real1> {
    store.prepare(p).map(Real1)
}

pub fn r1<T: Scalar>(store: &EnsembleStore<T>, x: Real1) -> Result<f64> {
    store.r1(x.0)
}

pub fn clone_r1<T: Scalar>(store: &mut EnsembleStore<T>, x: Real1) -> Result<Real1> {
    store.clone_ensemble(x.0).map(Real1)
}

pub fn clone_r2<T: Scalar>(store: &mut EnsembleStore<T>, x: Real2) -> Result<Real2> {
    check_operands(store, &x.ids())?;
    Ok(Real2 {
        plus: clone_r1(store, x.plus)?,
        minus: clone_r1(store, x.minus)?,
    })
}

pub fn clone_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4) -> Result<Real4> {
    check_operands(store, &x.ids())?;
    Ok(Real4 {
        num: clone_r2(store, x.num)?,
        den: clone_r2(store, x.den)?,
    })
}

pub fn discard_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4) -> Result<()> {
    check_operands(store, &x.ids())?;
    x.ids().into_iter().try_for_each(|id| store.discard(id))
}

/// `(x + y) / 2`: diagonalise both inputs, then apply the mean unitary. Both
/// output marginals carry the mean; the first is kept.
pub fn sigma1<T: Scalar>(store: &mut EnsembleStore<T>, x: Real1, y: Real1) -> Result<Real1> {
    check_operands(store, &[x.0, y.0])?;
    let dx = store.diagonalize(x.0)?;
    let dy = store.diagonalize(y.0)?;
    let (mean, other) = store.apply2(&gate_mean_unitary::<T>(), dx, dy)?;
    store.discard(other)?;
    Ok(Real1(mean))
}

/// `1 − (x + y) + 2xy`, carried by the second output of the classical
/// `SIGMA2` permutation. Classical gates act on diagonals directly, so no
/// diagonalisation is needed.
pub fn sigma2<T: Scalar>(store: &mut EnsembleStore<T>, x: Real1, y: Real1) -> Result<Real1> {
    check_operands(store, &[x.0, y.0])?;
    let (first, result) = store.apply2(&gate_sigma2(), x.0, y.0)?;
    store.discard(first)?;
    Ok(Real1(result))
}

/// Displaced multiplication `xy/2 + 1/4`, computed as
/// `σ₁(σ₁(σ₂(x, y), 0), σ₁(x, y))`.
pub fn mu1<T: Scalar>(store: &mut EnsembleStore<T>, x: Real1, y: Real1) -> Result<Real1> {
    check_operands(store, &[x.0, y.0])?;
    let xc = clone_r1(store, x)?;
    let yc = clone_r1(store, y)?;
    let s2 = sigma2(store, x, y)?;
    let zero = Real1(store.fresh_zero());
    let left = sigma1(store, s2, zero)?;
    let right = sigma1(store, xc, yc)?;
    sigma1(store, left, right)
}

/// Balanced encoding: `plus = (1 + v)/2`, `minus = (1 − v)/2`.
pub fn encode_real2<T: Scalar>(store: &mut EnsembleStore<T>, v: f64) -> Result<Real2> {
    if !v.is_finite() {
        return Err(Error::NonFinite(v));
    }
    if v.abs() > 1.0 {
        return Err(Error::OutOfRange {
            value: v,
            min: -1.0,
            max: 1.0,
        });
    }
    encode_real2_exact(store, T::from_f64(v))
}

fn encode_real2_exact<T: Scalar>(store: &mut EnsembleStore<T>, v: T) -> Result<Real2> {
    let [plus, minus] = real2_probabilities(v);
    Ok(Real2 {
        plus: Real1(store.prepare_exact(plus)?),
        minus: Real1(store.prepare_exact(minus)?),
    })
}

fn real2_probabilities<T: Scalar>(v: T) -> [T; 2] {
    let half = T::from_f64(0.5);
    [half * (T::one() + v), half * (T::one() - v)]
}

/// `S₁₁(plus) − S₁₁(minus)`.
pub fn r2<T: Scalar>(store: &EnsembleStore<T>, x: Real2) -> Result<f64> {
    r2_exact(store, x).map(Scalar::to_f64)
}

fn r2_exact<T: Scalar>(store: &EnsembleStore<T>, x: Real2) -> Result<T> {
    Ok(store.p_one(x.plus.0)? - store.p_one(x.minus.0)?)
}

/// Componentwise `σ₁`: `(x + y) / 2` on `Real2`.
pub fn sigma_r2<T: Scalar>(store: &mut EnsembleStore<T>, x: Real2, y: Real2) -> Result<Real2> {
    check_operands(store, &[x.plus.0, x.minus.0, y.plus.0, y.minus.0])?;
    Ok(Real2 {
        plus: sigma1(store, x.plus, y.plus)?,
        minus: sigma1(store, x.minus, y.minus)?,
    })
}

/// Quasimultiplication `xy / 4`:
/// `plus = σ₁(μ₁(x⁺, y⁺), μ₁(x⁻, y⁻))`, `minus = σ₁(μ₁(x⁺, y⁻), μ₁(x⁻, y⁺))`.
/// The `1/4` offsets of `μ₁` cancel in the difference.
pub fn mu2<T: Scalar>(store: &mut EnsembleStore<T>, x: Real2, y: Real2) -> Result<Real2> {
    check_operands(store, &[x.plus.0, x.minus.0, y.plus.0, y.minus.0])?;
    let xc = clone_r2(store, x)?;
    let yc = clone_r2(store, y)?;
    let pp = mu1(store, x.plus, y.plus)?;
    let mm = mu1(store, x.minus, y.minus)?;
    let pm = mu1(store, xc.plus, yc.minus)?;
    let mp = mu1(store, xc.minus, yc.plus)?;
    Ok(Real2 {
        plus: sigma1(store, pp, mm)?,
        minus: sigma1(store, pm, mp)?,
    })
}

/// `r` as `num / den`: `num = r, den = 1` when `|r| ≤ 1`, otherwise
/// `num = sign(r), den = 1/|r|`, each a balanced `Real2`.
pub fn encode_real4<T: Scalar>(store: &mut EnsembleStore<T>, r: f64) -> Result<Real4> {
    if !r.is_finite() {
        return Err(Error::NonFinite(r));
    }
    encode_real4_exact(store, T::from_f64(r))
}

fn encode_real4_exact<T: Scalar>(store: &mut EnsembleStore<T>, r: T) -> Result<Real4> {
    let [num, den] = real4_components(r);
    Ok(Real4 {
        num: encode_real2_exact(store, num)?,
        den: encode_real2_exact(store, den)?,
    })
}

fn real4_components<T: Scalar>(r: T) -> [T; 2] {
    if r.abs() <= T::one() {
        [r, T::one()]
    } else if r > T::zero() {
        [T::one(), T::one() / r]
    } else {
        [-T::one(), -(T::one() / r)]
    }
}

fn decode_exact<T: Scalar>(store: &EnsembleStore<T>, x: Real4) -> Result<T> {
    let den = r2_exact(store, x.den)?;
    if den.abs().to_f64() < store.den_floor() {
        return Err(Error::DenominatorNearZero {
            value: den.to_f64(),
            floor: store.den_floor(),
        });
    }
    Ok(r2_exact(store, x.num)? / den)
}

/// `r2(num) / r2(den)`, refusing denominators below the store's floor.
pub fn r4<T: Scalar>(store: &EnsembleStore<T>, x: Real4) -> Result<f64> {
    decode_exact(store, x).map(Scalar::to_f64)
}

/// `(|r2(num)|, |r2(den)|)`; both shrink by ¼ per multiplication.
pub fn component_magnitudes<T: Scalar>(store: &EnsembleStore<T>, x: Real4) -> Result<(f64, f64)> {
    Ok((r2(store, x.num)?.abs(), r2(store, x.den)?.abs()))
}

/// `(xy)' = μ₂(x', y')`, `(xy)'' = μ₂(x'', y'')`. The common factor ¼ cancels
/// in the ratio.
pub fn mul_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4, y: Real4) -> Result<Real4> {
    check_operands(store, &[x.ids(), y.ids()].concat())?;
    store.record_op("mul_r4");
    Ok(Real4 {
        num: mu2(store, x.num, y.num)?,
        den: mu2(store, x.den, y.den)?,
    })
}

/// `((x+y)/2)' = σ(μ₂(x', y''), μ₂(x'', y'))`, `((x+y)/2)'' = μ₂(x'', y'')`.
pub fn mean_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4, y: Real4) -> Result<Real4> {
    check_operands(store, &[x.ids(), y.ids()].concat())?;
    store.record_op("mean_r4");
    let xd = clone_r2(store, x.den)?;
    let yd = clone_r2(store, y.den)?;
    let a = mu2(store, x.num, y.den)?;
    let b = mu2(store, x.den, y.num)?;
    Ok(Real4 {
        num: sigma_r2(store, a, b)?,
        den: mu2(store, xd, yd)?,
    })
}

/// `x + y = 2 · (x + y)/2`, with a freshly encoded constant 2.
pub fn add_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4, y: Real4) -> Result<Real4> {
    check_operands(store, &[x.ids(), y.ids()].concat())?;
    store.record_op("add_r4");
    let mean = mean_r4(store, x, y)?;
    let two = encode_real4(store, 2.0)?;
    mul_r4(store, mean, two)
}

/// `−x` by swapping the numerator's ensembles. No gates.
pub fn neg_r4(x: Real4) -> Real4 {
    Real4 {
        num: Real2 {
            plus: x.num.minus,
            minus: x.num.plus,
        },
        den: x.den,
    }
}

/// `1/x` by swapping numerator and denominator. No gates, but the new
/// denominator must clear the store's floor.
pub fn inv_r4<T: Scalar>(store: &EnsembleStore<T>, x: Real4) -> Result<Real4> {
    check_operands(store, &x.ids())?;
    let divisor = r2(store, x.num)?;
    if divisor.abs() < store.den_floor() {
        return Err(Error::DivisorNearZero {
            value: divisor,
            floor: store.den_floor(),
        });
    }
    Ok(Real4 {
        num: x.den,
        den: x.num,
    })
}

pub fn sub_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4, y: Real4) -> Result<Real4> {
    add_r4(store, x, neg_r4(y))
}

pub fn div_r4<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4, y: Real4) -> Result<Real4> {
    check_operands(store, &[x.ids(), y.ids()].concat())?;
    let inv = inv_r4(store, y)?;
    mul_r4(store, x, inv)
}

/// Decodes `x` exactly and re-encodes the value with fresh, well-conditioned
/// components. Not a physical operation: it is logged as a non-physical
/// `renorm` event.
pub fn renormalize<T: Scalar>(store: &mut EnsembleStore<T>, x: Real4) -> Result<Real4> {
    check_operands(store, &x.ids())?;
    let value = decode_exact(store, x)?;
    let [num, den] = real4_components(value);
    let [p1, p2] = real2_probabilities(num);
    let [p3, p4] = real2_probabilities(den);
    let states = [p1, p2, p3, p4]
        .into_iter()
        .map(DensityMatrix::pure_qubit)
        .collect::<Result<Vec<_>>>()?;
    let ids = store.resynthesize("renorm", &x.ids(), states)?;
    store.record_op("renormalize");
    Ok(Real4 {
        num: Real2 {
            plus: Real1(ids[0]),
            minus: Real1(ids[1]),
        },
        den: Real2 {
            plus: Real1(ids[2]),
            minus: Real1(ids[3]),
        },
    })
}

/// `xⁿ` by left-to-right square-and-multiply: one squaring per bit below the
/// leading one, plus one multiplication per further set bit, so at most
/// `2·⌊log₂ n⌋` calls to [`mul_r4`]. With `renorm`, every intermediate product
/// is re-encoded. `x⁰` consumes `x` and returns a fresh 1.
pub fn pow_r4<T: Scalar>(
    store: &mut EnsembleStore<T>,
    x: Real4,
    n: u64,
    renorm: bool,
) -> Result<Real4> {
    check_operands(store, &x.ids())?;
    if n == 0 {
        discard_r4(store, x)?;
        return encode_real4(store, 1.0);
    }
    let step = |store: &mut EnsembleStore<T>, a: Real4, b: Real4| -> Result<Real4> {
        let product = mul_r4(store, a, b)?;
        if renorm {
            renormalize(store, product)
        } else {
            Ok(product)
        }
    };

    let base = if renorm { renormalize(store, x)? } else { x };
    let mut acc = clone_r4(store, base)?;
    let bits = u64::BITS - n.leading_zeros();
    for i in (0..bits - 1).rev() {
        let copy = clone_r4(store, acc)?;
        acc = step(store, acc, copy)?;
        if (n >> i) & 1 == 1 {
            let b = clone_r4(store, base)?;
            acc = step(store, acc, b)?;
        }
    }
    discard_r4(store, base)?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densop::{gate_mean_unitary, RegisterIndex};
    use crate::qcm::EventFilter;
    use crate::scalar::Wide;
    use proptest::prelude::*;

    type Store = EnsembleStore<f64>;

    fn r1_pair(store: &mut Store, x: f64, y: f64) -> (Real1, Real1) {
        (prepare_r1(store, x).unwrap(), prepare_r1(store, y).unwrap())
    }

    fn run1(op: fn(&mut Store, Real1, Real1) -> Result<Real1>, x: f64, y: f64) -> f64 {
        let mut store = Store::new();
        let (a, b) = r1_pair(&mut store, x, y);
        let out = op(&mut store, a, b).unwrap();
        r1(&store, out).unwrap()
    }

    fn run2(op: fn(&mut Store, Real2, Real2) -> Result<Real2>, x: f64, y: f64) -> f64 {
        let mut store = Store::new();
        let a = encode_real2(&mut store, x).unwrap();
        let b = encode_real2(&mut store, y).unwrap();
        let out = op(&mut store, a, b).unwrap();
        r2(&store, out).unwrap()
    }

    fn run4(op: fn(&mut Store, Real4, Real4) -> Result<Real4>, x: f64, y: f64) -> Result<f64> {
        let mut store = Store::new();
        let a = encode_real4(&mut store, x)?;
        let b = encode_real4(&mut store, y)?;
        let out = op(&mut store, a, b)?;
        r4(&store, out)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn sigma1_examples() {
        assert!(close(run1(sigma1, 0.0, 0.0), 0.0, 1e-12));
        assert!(close(run1(sigma1, 1.0, 0.0), 0.5, 1e-12));
        assert!(close(run1(sigma1, 0.3, 0.7), 0.5, 1e-12));
    }

    #[test]
    fn sigma1_both_outputs_carry_the_mean() {
        let mut store = Store::new();
        let (x, y) = r1_pair(&mut store, 0.2, 0.9);
        let dx = store.diagonalize(x.0).unwrap();
        let dy = store.diagonalize(y.0).unwrap();
        let (a, b) = store.apply2(&gate_mean_unitary::<f64>(), dx, dy).unwrap();
        assert!(close(store.r1(a).unwrap(), 0.55, 1e-12));
        assert!(close(store.r1(b).unwrap(), 0.55, 1e-12));
    }

    #[test]
    fn sigma2_examples() {
        assert!(close(run1(sigma2, 0.0, 0.0), 1.0, 1e-12));
        assert!(close(run1(sigma2, 1.0, 1.0), 1.0, 1e-12));
        assert!(close(run1(sigma2, 0.5, 0.25), 0.5, 1e-12));
    }

    #[test]
    fn sigma2_output_qubit_brute_force() {
        // Enumerate the four basis states with product weights and push them
        // through the permutation by hand; the second bit carries the result.
        let perm = |i: usize| [1, 2, 0, 3][i];
        for (x, y) in [(0.3, 0.8), (0.5, 0.5), (0.1, 0.0), (0.9, 0.6)] {
            let weight = |i: usize| {
                let (a, b) = (i >> 1, i & 1);
                (if a == 1 { x } else { 1.0 - x }) * (if b == 1 { y } else { 1.0 - y })
            };
            let p_second = (0..4)
                .filter(|&i| perm(i) & 1 == 1)
                .map(weight)
                .sum::<f64>();
            let p_first = (0..4)
                .filter(|&i| perm(i) >> 1 == 1)
                .map(weight)
                .sum::<f64>();
            assert!(close(run1(sigma2, x, y), p_second, 1e-12));
            assert!(close(p_second, 1.0 - (x + y) + 2.0 * x * y, 1e-12));
            // the first output is not the result in general
            if (x, y) == (0.3, 0.8) {
                assert!(!close(p_first, p_second, 1e-3));
            }
        }
    }

    #[test]
    fn mu1_examples() {
        assert!(close(run1(mu1, 0.0, 0.0), 0.25, 1e-12));
        assert!(close(run1(mu1, 1.0, 1.0), 0.75, 1e-12));
        assert!(close(run1(mu1, 0.5, 0.5), 0.375, 1e-12));
    }

    #[test]
    fn same_operand_rejected() {
        let mut store = Store::new();
        let x = prepare_r1(&mut store, 0.4).unwrap();
        assert!(matches!(
            sigma1(&mut store, x, x),
            Err(Error::SameOperand(_))
        ));
        assert!(matches!(mu1(&mut store, x, x), Err(Error::SameOperand(_))));
        // nothing consumed by the failed calls
        assert!(!store.is_consumed(x.0).unwrap());
        let y = clone_r1(&mut store, x).unwrap();
        let s = sigma1(&mut store, x, y).unwrap();
        assert!(close(r1(&store, s).unwrap(), 0.4, 1e-12));
    }

    #[test]
    fn consumed_operand_rejected() {
        let mut store = Store::new();
        let (x, y) = r1_pair(&mut store, 0.4, 0.6);
        sigma1(&mut store, x, y).unwrap();
        let z = prepare_r1(&mut store, 0.1).unwrap();
        assert!(matches!(
            sigma2(&mut store, x, z),
            Err(Error::ConsumedEnsemble(_))
        ));
    }

    #[test]
    fn encode_real2_examples() {
        let mut store = Store::new();
        let z = encode_real2(&mut store, 0.0).unwrap();
        assert_eq!(
            (store.r1(z.plus.0).unwrap(), store.r1(z.minus.0).unwrap()),
            (0.5, 0.5)
        );
        let one = encode_real2(&mut store, 1.0).unwrap();
        assert_eq!(
            (
                store.r1(one.plus.0).unwrap(),
                store.r1(one.minus.0).unwrap()
            ),
            (1.0, 0.0)
        );
        let v = encode_real2(&mut store, -0.4).unwrap();
        assert!(close(store.r1(v.plus.0).unwrap(), 0.3, 1e-15));
        assert!(close(store.r1(v.minus.0).unwrap(), 0.7, 1e-15));
        assert!(close(r2(&store, v).unwrap(), -0.4, 1e-12));
        assert!(matches!(
            encode_real2(&mut store, 1.5),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn r2_examples() {
        let mut store = Store::new();
        let mk = |store: &mut Store, a: f64, b: f64| Real2 {
            plus: prepare_r1(store, a).unwrap(),
            minus: prepare_r1(store, b).unwrap(),
        };
        let a = mk(&mut store, 1.0, 0.0);
        assert_eq!(r2(&store, a).unwrap(), 1.0);
        let b = mk(&mut store, 0.37, 0.37);
        assert_eq!(r2(&store, b).unwrap(), 0.0);
        let c = mk(&mut store, 0.9, 0.1);
        assert!(close(r2(&store, c).unwrap(), 0.8, 1e-12));
    }

    #[test]
    fn sigma_r2_examples() {
        assert!(close(run2(sigma_r2, 1.0, -1.0), 0.0, 1e-12));
        assert!(close(run2(sigma_r2, 0.5, 0.5), 0.5, 1e-12));
        assert!(close(run2(sigma_r2, 0.8, -0.2), 0.3, 1e-12));
    }

    #[test]
    fn mu2_examples() {
        assert!(close(run2(mu2, 1.0, 1.0), 0.25, 1e-12));
        assert!(close(run2(mu2, -1.0, 1.0), -0.25, 1e-12));
        assert!(close(run2(mu2, 0.0, 0.77), 0.0, 1e-12));
    }

    #[test]
    fn encode_real4_examples() {
        let mut store = Store::new();
        let two = encode_real4(&mut store, 2.0).unwrap();
        assert_eq!(r2(&store, two.num).unwrap(), 1.0);
        assert_eq!(r2(&store, two.den).unwrap(), 0.5);
        let probs: Vec<f64> = two.ids().iter().map(|&i| store.r1(i).unwrap()).collect();
        assert_eq!(probs, vec![1.0, 0.0, 0.75, 0.25]);

        let zero = encode_real4(&mut store, 0.0).unwrap();
        assert_eq!(r2(&store, zero.num).unwrap(), 0.0);
        assert_eq!(r2(&store, zero.den).unwrap(), 1.0);

        let q = encode_real4(&mut store, -0.25).unwrap();
        assert!(close(r2(&store, q.num).unwrap(), -0.25, 1e-15));
        assert_eq!(r2(&store, q.den).unwrap(), 1.0);

        assert!(matches!(
            encode_real4(&mut store, f64::INFINITY),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn encode_decode_round_trip() {
        let mut store = Store::new();
        for r in [0.0, 1.0, -1.0, 2.0, -3.5, 1e-7, 123456.0, -0.999] {
            let x = encode_real4(&mut store, r).unwrap();
            assert!(
                close(r4(&store, x).unwrap(), r, 1e-10 * r.abs().max(1.0)),
                "{r}"
            );
        }
    }

    #[test]
    fn r4_examples() {
        let mut store = Store::new();
        let mut mk = |p: [f64; 4]| {
            let ids: Vec<Real1> = p
                .iter()
                .map(|&q| prepare_r1(&mut store, q).unwrap())
                .collect();
            Real4 {
                num: Real2 {
                    plus: ids[0],
                    minus: ids[1],
                },
                den: Real2 {
                    plus: ids[2],
                    minus: ids[3],
                },
            }
        };
        let a = mk([0.9, 0.1, 0.7, 0.3]);
        let b = mk([0.6, 0.2, 0.6, 0.2]);
        let c = mk([0.5, 0.5, 0.9, 0.1]);
        let d = mk([0.2, 0.9, 0.4, 0.4]);
        assert!(close(r4(&store, a).unwrap(), 2.0, 1e-12));
        assert!(close(r4(&store, b).unwrap(), 1.0, 1e-12));
        assert_eq!(r4(&store, c).unwrap(), 0.0);
        assert!(matches!(
            r4(&store, d),
            Err(Error::DenominatorNearZero { .. })
        ));
    }

    #[test]
    fn shift_invariance() {
        let mut store = Store::new();
        for delta in [0.0, 0.05, 0.1, -0.08] {
            let ids: Vec<Real1> = [0.6 + delta, 0.3 + delta, 0.8, 0.2]
                .iter()
                .map(|&q| prepare_r1(&mut store, q).unwrap())
                .collect();
            let x = Real4 {
                num: Real2 {
                    plus: ids[0],
                    minus: ids[1],
                },
                den: Real2 {
                    plus: ids[2],
                    minus: ids[3],
                },
            };
            assert!(close(r4(&store, x).unwrap(), 0.5, 1e-12));
        }
    }

    #[test]
    fn mul_examples() {
        assert!(rel_close(run4(mul_r4, 2.0, 3.0).unwrap(), 6.0, 1e-9));
        assert!(rel_close(run4(mul_r4, -0.7, 1.0).unwrap(), -0.7, 1e-9));
        assert!(close(run4(mul_r4, 5.5, 0.0).unwrap(), 0.0, 1e-12));
    }

    #[test]
    fn mean_examples() {
        assert!(rel_close(run4(mean_r4, 2.0, 4.0).unwrap(), 3.0, 1e-9));
        assert!(close(run4(mean_r4, 1.0, -1.0).unwrap(), 0.0, 1e-12));
        let mut store = Store::new();
        let x = encode_real4(&mut store, 3.7).unwrap();
        let xc = clone_r4(&mut store, x).unwrap();
        let m = mean_r4(&mut store, x, xc).unwrap();
        assert!(rel_close(r4(&store, m).unwrap(), 3.7, 1e-9));
    }

    #[test]
    fn field_operation_examples() {
        assert!(rel_close(run4(add_r4, 2.0, 3.0).unwrap(), 5.0, 1e-9));
        assert!(rel_close(run4(sub_r4, 1.0, 4.0).unwrap(), -3.0, 1e-9));
        assert!(rel_close(run4(div_r4, 1.0, 4.0).unwrap(), 0.25, 1e-9));

        let mut store = Store::new();
        let seven = encode_real4(&mut store, 7.0).unwrap();
        let before = store.trace().len();
        let neg = neg_r4(seven);
        assert_eq!(store.trace().len(), before);
        assert!(rel_close(r4(&store, neg).unwrap(), -7.0, 1e-12));
        let two = encode_real4(&mut store, 2.0).unwrap();
        let inv = inv_r4(&store, two).unwrap();
        assert!(rel_close(r4(&store, inv).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn division_by_near_zero() {
        assert!(matches!(
            run4(div_r4, 1.0, 1e-12),
            Err(Error::DivisorNearZero { .. })
        ));
        let mut store = Store::new();
        let z = encode_real4(&mut store, 0.0).unwrap();
        assert!(matches!(
            inv_r4(&store, z),
            Err(Error::DivisorNearZero { .. })
        ));
    }

    #[test]
    fn renormalize_examples() {
        let mut store = Store::new();
        let a = encode_real4(&mut store, 2.0).unwrap();
        let b = encode_real4(&mut store, 3.0).unwrap();
        let p = mul_r4(&mut store, a, b).unwrap();
        let (_, den_before) = component_magnitudes(&store, p).unwrap();
        let physical = store.gate_count(&EventFilter::physical());
        let q = renormalize(&mut store, p).unwrap();
        assert_eq!(store.gate_count(&EventFilter::physical()), physical);
        let (num, den) = component_magnitudes(&store, q).unwrap();
        assert!(rel_close(r4(&store, q).unwrap(), 6.0, 1e-9));
        assert!(den > den_before);
        assert!(close(num, 1.0, 1e-15));
        assert!(den >= 0.5 / 6.0);

        let fresh = encode_real4(&mut store, -0.3).unwrap();
        let again = renormalize(&mut store, fresh).unwrap();
        assert!(close(r4(&store, again).unwrap(), -0.3, 1e-12));
    }

    fn mul_calls(n: u64) -> u64 {
        let mut store = Store::new();
        let x = encode_real4(&mut store, 1.0).unwrap();
        pow_r4(&mut store, x, n, true).unwrap();
        store.op_count("mul_r4")
    }

    #[test]
    fn pow_examples() {
        let mut store = Store::new();
        let x = encode_real4(&mut store, 1.7).unwrap();
        let one = pow_r4(&mut store, x, 0, true).unwrap();
        assert_eq!(r4(&store, one).unwrap(), 1.0);
        assert!(store.is_consumed(x.num.plus.0).unwrap());

        let x = encode_real4(&mut store, 1.1).unwrap();
        let p = pow_r4(&mut store, x, 4, true).unwrap();
        assert!(rel_close(r4(&store, p).unwrap(), 1.1f64.powi(4), 1e-9));

        let x = encode_real4(&mut store, -0.9).unwrap();
        let p = pow_r4(&mut store, x, 7, false).unwrap();
        assert!(rel_close(r4(&store, p).unwrap(), (-0.9f64).powi(7), 1e-6));

        let x = encode_real4(&mut store, 0.5).unwrap();
        let p = pow_r4(&mut store, x, 1, false).unwrap();
        assert_eq!(r4(&store, p).unwrap(), 0.5);
    }

    #[test]
    fn pow_mul_counts() {
        assert_eq!(mul_calls(1), 0);
        assert!(mul_calls(1024) <= 11);
        for n in 1..40u64 {
            let floor_log = 63 - n.leading_zeros() as u64;
            assert!(mul_calls(n) <= 2 * floor_log + 1, "n = {n}");
        }
        for k in 1..12 {
            assert_eq!(mul_calls(1 << k) - mul_calls(1 << (k - 1)), 1);
        }
    }

    #[test]
    fn large_powers_need_a_lower_floor_and_wide_scalars() {
        // 1.1^1024 ≈ 2.0e42 needs a denominator near 5e-43, which double
        // precision cannot resolve next to probabilities of order ½.
        let mut store = Store::new();
        let x = encode_real4(&mut store, 1.1).unwrap();
        assert!(matches!(
            pow_r4(&mut store, x, 1024, true),
            Err(Error::DenominatorNearZero { .. })
        ));

        let mut wide = EnsembleStore::<Wide>::with_den_floor(1e-60).unwrap();
        let x = encode_real4(&mut wide, 1.1).unwrap();
        let p = pow_r4(&mut wide, x, 1024, true).unwrap();
        assert!(rel_close(r4(&wide, p).unwrap(), 1.1f64.powi(1024), 1e-6));
        assert_eq!(wide.op_count("mul_r4"), 10);
    }

    #[test]
    fn mean_unitary_needs_diagonal_inputs() {
        let mut store = Store::new();
        let (x, y) = r1_pair(&mut store, 0.5, 0.5);
        let (a, _) = store.apply2(&gate_mean_unitary::<f64>(), x.0, y.0).unwrap();
        assert!(close(store.r1(a).unwrap(), 0.25, 1e-12));
        assert!(store
            .state(a)
            .unwrap()
            .is_decomposable(&[RegisterIndex::all(1)], 1e-12)
            .unwrap());
    }

    fn physical_delta(op: impl FnOnce(&mut Store)) -> usize {
        let mut store = Store::new();
        op(&mut store);
        store.gate_count(&EventFilter::physical())
    }

    #[test]
    fn circuit_sizes() {
        // 3 events per diagonalisation (alloc, CNOT) ×2 + the mean gate.
        let s1 = physical_delta(|s| {
            let (x, y) = r1_pair(s, 0.1, 0.2);
            sigma1(s, x, y).unwrap();
        });
        assert_eq!(s1, 2 + 5);
        let s2 = physical_delta(|s| {
            let (x, y) = r1_pair(s, 0.1, 0.2);
            sigma2(s, x, y).unwrap();
        });
        assert_eq!(s2, 2 + 1);
    }

    proptest! {
        #[test]
        fn real1_ops_match_closed_forms(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
            prop_assert!(close(run1(sigma1, x, y), (x + y) / 2.0, 1e-12));
            prop_assert!(close(run1(sigma2, x, y), 1.0 - (x + y) + 2.0 * x * y, 1e-12));
            prop_assert!(close(run1(mu1, x, y), x * y / 2.0 + 0.25, 1e-12));
        }

        #[test]
        fn real2_ops_match_closed_forms(x in -1.0..=1.0f64, y in -1.0..=1.0f64) {
            prop_assert!(close(run2(sigma_r2, x, y), (x + y) / 2.0, 1e-12));
            prop_assert!(close(run2(mu2, x, y), x * y / 4.0, 1e-12));
        }

        #[test]
        fn outputs_stay_in_range(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
            for op in [sigma1, sigma2, mu1] {
                let v = run1(op, x, y);
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let v = run2(mu2, 2.0 * x - 1.0, 2.0 * y - 1.0);
            prop_assert!((-1.0..=1.0).contains(&v));
        }

        #[test]
        fn real4_mul_and_mean(x in -10.0..10.0f64, y in -10.0..10.0f64) {
            prop_assert!(rel_close(run4(mul_r4, x, y).unwrap(), x * y, 1e-9));
            let m = (x + y) / 2.0;
            prop_assume!(m.abs() > 1e-3);
            prop_assert!(rel_close(run4(mean_r4, x, y).unwrap(), m, 1e-9));
        }
    }
}
