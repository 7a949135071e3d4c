//! Natural cubic spline interpolation over 2-D trajectories.
//!
//! Both coordinates are fitted independently over a shared, strictly
//! increasing time grid. The boundary condition is the natural one (zero
//! second derivative at both end knots), which makes the interpolant unique
//! without requiring endpoint derivative estimates.

use crate::error::{Error, Result};
use crate::point::Point;

/// A time-position pair the spline must pass through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot {
    /// Time-step index (real valued; units of observation steps).
    pub t: f64,
    pub p: Point,
}

impl Knot {
    pub fn new(t: f64, p: Point) -> Self {
        Knot { t, p }
    }
}

/// One cubic segment in the local variable `u = t - segment start`:
/// `a + b u + c u^2 + d u^3`, per coordinate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
    pub c: Point,
    pub d: Point,
}

/// Fitted piecewise-cubic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineCoeffs {
    pub knot_times: Vec<f64>,
    pub segments: Vec<Segment>,
}

impl SplineCoeffs {
    pub fn t_min(&self) -> f64 {
        self.knot_times[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.knot_times.last().unwrap()
    }

    /// Index of the segment whose interval contains `t`. The last knot maps
    /// onto the final segment.
    fn segment_index(&self, t: f64) -> usize {
        let n = self.knot_times.len();
        let idx = self.knot_times.partition_point(|&kt| kt <= t);
        idx.clamp(1, n - 1) - 1
    }

    /// First derivative at `t` (velocity), in-range only.
    pub fn deriv1(&self, t: f64) -> Result<Point> {
        self.check_range(t)?;
        let k = self.segment_index(t);
        let u = t - self.knot_times[k];
        let s = &self.segments[k];
        Ok(Point::new(
            s.b.x + 2.0 * s.c.x * u + 3.0 * s.d.x * u * u,
            s.b.y + 2.0 * s.c.y * u + 3.0 * s.d.y * u * u,
        ))
    }

    /// Second derivative at `t` (acceleration), in-range only.
    pub fn deriv2(&self, t: f64) -> Result<Point> {
        self.check_range(t)?;
        let k = self.segment_index(t);
        let u = t - self.knot_times[k];
        let s = &self.segments[k];
        Ok(Point::new(
            2.0 * s.c.x + 6.0 * s.d.x * u,
            2.0 * s.c.y + 6.0 * s.d.y * u,
        ))
    }

    fn check_range(&self, t: f64) -> Result<()> {
        if t < self.t_min() || t > self.t_max() {
            return Err(Error::OutOfRange {
                t,
                lo: self.t_min(),
                hi: self.t_max(),
            });
        }
        Ok(())
    }
}

/// Fits the natural cubic spline through `knots`.
///
/// Solves the standard tridiagonal system for the interior second
/// derivatives (Thomas algorithm); the knot spacing may be non-uniform.
pub fn fit_natural_cubic(knots: &[Knot]) -> Result<SplineCoeffs> {
    let n = knots.len();
    if n < 2 {
        return Err(Error::InsufficientKnots(n));
    }
    for i in 1..n {
        if knots[i].t <= knots[i - 1].t {
            return Err(Error::NonMonotonicTimes(i));
        }
    }

    let h: Vec<f64> = (0..n - 1).map(|i| knots[i + 1].t - knots[i].t).collect();

    // Second derivatives at the knots; natural boundary pins both ends to 0.
    let m_x = solve_second_derivs(&h, |i| knots[i].p.x);
    let m_y = solve_second_derivs(&h, |i| knots[i].p.y);

    let mut segments = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let coeff = |y0: f64, y1: f64, m0: f64, m1: f64| {
            let b = (y1 - y0) / h[k] - h[k] * (2.0 * m0 + m1) / 6.0;
            let c = m0 / 2.0;
            let d = (m1 - m0) / (6.0 * h[k]);
            (y0, b, c, d)
        };
        let (ax, bx, cx, dx) = coeff(knots[k].p.x, knots[k + 1].p.x, m_x[k], m_x[k + 1]);
        let (ay, by, cy, dy) = coeff(knots[k].p.y, knots[k + 1].p.y, m_y[k], m_y[k + 1]);
        segments.push(Segment {
            a: Point::new(ax, ay),
            b: Point::new(bx, by),
            c: Point::new(cx, cy),
            d: Point::new(dx, dy),
        });
    }

    Ok(SplineCoeffs {
        knot_times: knots.iter().map(|k| k.t).collect(),
        segments,
    })
}

/// Thomas solve of the natural-spline system for one coordinate.
/// Returns the second derivative at every knot (ends are zero).
fn solve_second_derivs(h: &[f64], y: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = h.len() + 1;
    let mut m = vec![0.0; n];
    if n <= 2 {
        return m;
    }

    // Interior rows i = 1..n-2:
    //   h[i-1] m[i-1] + 2 (h[i-1] + h[i]) m[i] + h[i] m[i+1] = rhs[i]
    let mut diag = vec![0.0; n - 2];
    let mut rhs = vec![0.0; n - 2];
    for i in 1..n - 1 {
        diag[i - 1] = 2.0 * (h[i - 1] + h[i]);
        rhs[i - 1] = 6.0 * ((y(i + 1) - y(i)) / h[i] - (y(i) - y(i - 1)) / h[i - 1]);
    }

    // Forward sweep. Sub-diagonal of row i is h[i-1], super-diagonal h[i];
    // the first and last of those couple to the zero boundary values.
    for i in 1..n - 2 {
        let w = h[i] / diag[i - 1];
        diag[i] -= w * h[i];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 2] = rhs[n - 3] / diag[n - 3];
    for i in (1..n - 2).rev() {
        m[i] = (rhs[i - 1] - h[i] * m[i + 1]) / diag[i - 1];
    }
    m
}

/// Evaluates the spline at `t`. Errors outside the knot range; the dilation
/// modulation never needs extrapolation so none is offered.
pub fn eval_spline(s: &SplineCoeffs, t: f64) -> Result<Point> {
    if t < s.t_min() || t > s.t_max() {
        return Err(Error::OutOfRange {
            t,
            lo: s.t_min(),
            hi: s.t_max(),
        });
    }
    let k = s.segment_index(t);
    let u = t - s.knot_times[k];
    let seg = &s.segments[k];
    let horner = |a: f64, b: f64, c: f64, d: f64| a + u * (b + u * (c + u * d));
    Ok(Point::new(
        horner(seg.a.x, seg.b.x, seg.c.x, seg.d.x),
        horner(seg.a.y, seg.b.y, seg.c.y, seg.d.y),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knot(t: f64, x: f64, y: f64) -> Knot {
        Knot::new(t, Point::new(x, y))
    }

    #[test]
    fn two_knots_give_a_straight_segment() {
        let s = fit_natural_cubic(&[knot(1.0, 0.0, 0.0), knot(2.0, 2.0, 0.0)]).unwrap();
        assert_eq!(s.segments.len(), 1);
        let seg = s.segments[0];
        assert_eq!(seg.a, Point::new(0.0, 0.0));
        assert_eq!(seg.b, Point::new(2.0, 0.0));
        assert_eq!(seg.c, Point::new(0.0, 0.0));
        assert_eq!(seg.d, Point::new(0.0, 0.0));
    }

    #[test]
    fn collinear_knots_reproduce_the_line() {
        let s = fit_natural_cubic(&[
            knot(1.0, 0.0, 0.0),
            knot(2.0, 1.0, 1.0),
            knot(3.0, 2.0, 2.0),
        ])
        .unwrap();
        for seg in &s.segments {
            assert!(seg.c.norm() < 1e-12 && seg.d.norm() < 1e-12);
            assert!((seg.b.x - 1.0).abs() < 1e-12 && (seg.b.y - 1.0).abs() < 1e-12);
        }
        let p = eval_spline(&s, 1.5).unwrap();
        assert!((p.x - 0.5).abs() < 1e-12 && (p.y - 0.5).abs() < 1e-12);
    }

    // Hand-solved oracle for knots (1,0), (2,1), (3,0) on the y axis:
    // the single interior equation 4*M2 = 6*(-1 - 1) gives M2 = -3, so on
    // the first segment b = 1 - (2*0 - 3)/6 = 1.5, d = -0.5 and
    // f(1.5) = 1.5*0.5 - 0.5*0.125 = 0.6875.
    #[test]
    fn three_knot_arch_matches_hand_solved_system() {
        let s = fit_natural_cubic(&[
            knot(1.0, 0.0, 0.0),
            knot(2.0, 0.0, 1.0),
            knot(3.0, 0.0, 0.0),
        ])
        .unwrap();
        let m2 = s.deriv2(2.0).unwrap();
        assert!((m2.y - (-3.0)).abs() < 1e-12);
        let p = eval_spline(&s, 1.5).unwrap();
        assert!((p.x - 0.0).abs() < 1e-12);
        assert!((p.y - 0.6875).abs() < 1e-12);
    }

    #[test]
    fn eval_at_knots_is_exact() {
        let knots = [
            knot(0.0, 1.0, -2.0),
            knot(1.5, 4.0, 0.5),
            knot(2.0, -1.0, 3.0),
            knot(4.5, 2.0, 2.0),
        ];
        let s = fit_natural_cubic(&knots).unwrap();
        for k in &knots {
            let p = eval_spline(&s, k.t).unwrap();
            assert!(p.dist(&k.p) <= 1e-9, "knot at t={} off by {}", k.t, p.dist(&k.p));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            fit_natural_cubic(&[knot(0.0, 0.0, 0.0)]),
            Err(Error::InsufficientKnots(1))
        ));
        assert!(matches!(
            fit_natural_cubic(&[knot(0.0, 0.0, 0.0), knot(0.0, 1.0, 1.0)]),
            Err(Error::NonMonotonicTimes(1))
        ));
        let s = fit_natural_cubic(&[knot(1.0, 0.0, 0.0), knot(2.0, 1.0, 1.0)]).unwrap();
        assert!(matches!(eval_spline(&s, 2.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(eval_spline(&s, 0.9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn natural_boundary_and_continuity_on_irregular_grid() {
        let knots = [
            knot(0.0, 0.0, 1.0),
            knot(0.7, 2.0, -1.0),
            knot(1.1, -0.5, 0.3),
            knot(3.0, 1.0, 4.0),
            knot(3.4, 0.0, 0.0),
        ];
        let s = fit_natural_cubic(&knots).unwrap();
        assert!(s.deriv2(knots[0].t).unwrap().norm() < 1e-7);
        assert!(s.deriv2(knots[4].t).unwrap().norm() < 1e-7);
        for i in 1..4 {
            let t = knots[i].t;
            let left = &s.segments[i - 1];
            let u = t - s.knot_times[i - 1];
            let d1_left = Point::new(
                left.b.x + 2.0 * left.c.x * u + 3.0 * left.d.x * u * u,
                left.b.y + 2.0 * left.c.y * u + 3.0 * left.d.y * u * u,
            );
            let d2_left = Point::new(2.0 * left.c.x + 6.0 * left.d.x * u, 2.0 * left.c.y + 6.0 * left.d.y * u);
            let right = &s.segments[i];
            let d1_right = right.b;
            let d2_right = Point::new(2.0 * right.c.x, 2.0 * right.c.y);
            assert!(d1_left.dist(&d1_right) <= 1e-7, "C1 mismatch at knot {i}");
            assert!(d2_left.dist(&d2_right) <= 1e-7, "C2 mismatch at knot {i}");
        }
    }
}
