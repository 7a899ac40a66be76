use super::CoordinateGeometry;
use crate::error::{Error, Result};
use crate::oracle::CoordProblem;
use crate::scalar::Scalar;
use crate::trace::Counters;

/// Backtracking gives up once the trial constant exceeds this multiple of the initial `L_i`.
pub const LIP_CAP_FACTOR: f64 = 1.152_921_504_606_847e18; // 2^60
/// Estimates never drop below this multiple of the initial `L_i`.
pub const LIP_FLOOR_FACTOR: f64 = 8.673_617_379_884_035e-19; // 2^-60

/// Doubling search for a step constant satisfying the coordinate descent
/// condition `f(x − g/L e_i) ≤ f(x) − g²/(2L)` starting from the stored
/// estimate of `L_i`.
///
/// `g = ∂_i f(x)` is supplied by the caller. Books one value call for `f(x)`
/// and one per trial. On success the stored estimate becomes half the
/// accepted constant (floored), and the sampling and norm weights follow it.
pub fn adapt_lipschitz<T: Scalar, P: CoordProblem<T> + ?Sized>(
    problem: &P,
    geom: &mut CoordinateGeometry<T>,
    i: usize,
    x: &[T],
    g: T,
    counters: &mut Counters,
) -> Result<T> {
    let init = geom.lip_init(i);
    let cap = init * T::lit(LIP_CAP_FACTOR);
    let floor = init * T::lit(LIP_FLOOR_FACTOR);
    let fx = problem.value(x);
    counters.value += 1;
    let slack = T::lit(16.0) * T::epsilon() * (T::one() + fx.abs());
    let mut lt = geom.lip(i);
    let mut probe = x.to_vec();
    loop {
        if !(lt <= cap) {
            return Err(Error::NonSmooth { coord: i, limit: cap.as_f64() });
        }
        probe[i] = x[i] - g / lt;
        let fy = problem.value(&probe);
        counters.value += 1;
        if fy <= fx - g * g / (lt + lt) + slack {
            break;
        }
        lt = lt + lt;
    }
    geom.set_lip(i, (lt * T::lit(0.5)).max(floor))?;
    Ok(lt)
}
