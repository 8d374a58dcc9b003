//! Brent-style cycle detection over floating-point orbits.
//!
//! Exact equality never happens for an orbit that is only attracted to a
//! cycle, so two points count as equal when `|x - y| <= tol * max(1, |x|)`.

use num_complex::Complex64;

#[inline]
pub(crate) fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
    (x - y).norm() <= tol * x.norm().max(1.0)
}

/// Finds the period of the cycle an orbit tail has settled on.
///
/// Returns the smallest period `p` such that the first element of the
/// matching Brent window recurs after `p` steps, or `None` if the tail ends
/// before any recurrence is seen.
pub fn detect_cycle(orbit_tail: &[Complex64], tol: f64) -> Option<u32> {
    brent(orbit_tail.iter().copied(), tol)
}

/// Streaming form of [`detect_cycle`]: pulls values from `orbit` only until
/// a cycle is confirmed.
pub(crate) fn brent<I>(orbit: I, tol: f64) -> Option<u32>
where
    I: IntoIterator<Item = Complex64>,
{
    let mut orbit = orbit.into_iter();
    let mut tortoise = orbit.next()?;
    let mut hare = orbit.next()?;
    // window[0] is the tortoise, window[k] the value k steps after it
    let mut window = vec![tortoise, hare];
    let mut power: usize = 1;
    let mut lam: usize = 1;

    while !close(tortoise, hare, tol) {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
            window.clear();
            window.push(tortoise);
        }
        hare = orbit.next()?;
        window.push(hare);
        lam += 1;
    }

    // A slowly converging orbit can first match at a multiple of its period.
    let period = (1..lam)
        .filter(|d| lam.is_multiple_of(*d))
        .find(|&d| close(window[0], window[d], tol))
        .unwrap_or(lam);
    Some(period as u32)
}
