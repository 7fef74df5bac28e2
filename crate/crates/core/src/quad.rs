//! Adaptive composite-trapezoid quadrature on straight segments.
//!
//! Panels start at [`QuadSettings::initial_panels`] per segment and double,
//! reusing previous nodes, until two successive estimates agree to the
//! requested relative tolerance. Summation order is fixed (ascending node
//! index), so results do not depend on evaluation scheduling.

use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;

/// Default panel count per segment before refinement.
pub const DEFAULT_INITIAL_PANELS: usize = 64;
/// Total node cap per quadrature operation.
pub const DEFAULT_MAX_NODES: usize = 1 << 20;
/// Refinement tolerance for analytic integrands (projector-type integrals).
pub const PROJECTOR_REL_TOL: f64 = 1e-8;
/// Refinement tolerance for norm integrands, which are continuous but kinked.
pub const NORM_REL_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct QuadSettings {
    pub initial_panels: usize,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl QuadSettings {
    /// Settings for smooth (analytic) integrands.
    pub fn analytic() -> Self {
        QuadSettings {
            initial_panels: DEFAULT_INITIAL_PANELS,
            rel_tol: PROJECTOR_REL_TOL,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }

    /// Settings for norm integrands.
    pub fn norm_integral() -> Self {
        QuadSettings {
            initial_panels: DEFAULT_INITIAL_PANELS,
            rel_tol: NORM_REL_TOL,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

/// Shared node budget across the segments of one operation.
#[derive(Debug)]
pub struct NodeBudget {
    remaining: usize,
    used: usize,
}

impl NodeBudget {
    pub fn new(max_nodes: usize) -> Self {
        NodeBudget {
            remaining: max_nodes,
            used: 0,
        }
    }

    pub fn used(&self) -> usize {
        self.used
    }

    fn take(&mut self, count: usize, last_delta: f64) -> Result<(), Error> {
        if count > self.remaining {
            return Err(Error::QuadratureNoConvergence {
                nodes: self.used,
                last_delta,
            });
        }
        self.remaining -= count;
        self.used += count;
        Ok(())
    }
}

/// Values the trapezoid engine can accumulate.
pub trait QuadValue: Clone {
    fn zero() -> Self;
    fn accumulate(&mut self, other: &Self);
    fn scaled(&self, c: f64) -> Self;
    fn sup_distance(&self, other: &Self) -> f64;
    fn sup_norm(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn accumulate(&mut self, other: &Self) {
        *self += *other;
    }
    fn scaled(&self, c: f64) -> Self {
        self * c
    }
    fn sup_distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn sup_norm(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Vec<Complex64> {
    fn zero() -> Self {
        Vec::new()
    }
    fn accumulate(&mut self, other: &Self) {
        if self.is_empty() {
            *self = other.clone();
            return;
        }
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
    fn scaled(&self, c: f64) -> Self {
        self.iter().map(|v| v * c).collect()
    }
    fn sup_distance(&self, other: &Self) -> f64 {
        if self.is_empty() {
            return other.sup_norm();
        }
        if other.is_empty() {
            return self.sup_norm();
        }
        self.iter()
            .zip(other)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
    fn sup_norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Outcome of one segment integration.
#[derive(Debug, Clone)]
pub struct SegmentQuad<V> {
    pub value: V,
    /// Panels in the accepted refinement level.
    pub panels: usize,
    /// Sup distance between the last two refinement levels.
    pub last_delta: f64,
}

/// Integrate `f` over the parameter interval `[a, b]`.
///
/// Each refinement doubles the trapezoid panels, reusing previous nodes. The
/// returned value carries one Richardson level on top of the trapezoid
/// sequence (`(4 T_{2N} - T_N) / 3`), which removes the leading
/// endpoint-derivative term of the Euler-Maclaurin expansion; corners of a
/// rectangle contour otherwise pin the error at `O(h^2)`.
///
/// Convergence: successive extrapolated estimates must agree within
/// `rel_tol * max(result.sup_norm(), scale_floor)`. Pass the natural
/// magnitude of the integrand as `scale_floor` so that integrals that are
/// genuinely zero converge instead of chasing rounding noise.
pub fn integrate_segment<V, F>(
    mut f: F,
    a: f64,
    b: f64,
    settings: &QuadSettings,
    scale_floor: f64,
    budget: &mut NodeBudget,
) -> Result<SegmentQuad<V>, Error>
where
    V: QuadValue,
    F: FnMut(f64) -> Result<V, Error>,
{
    assert!(b > a, "segment must have positive length");
    let length = b - a;
    let mut panels = settings.initial_panels.max(1);

    budget.take(panels + 1, f64::INFINITY)?;
    let mut interior = V::zero();
    for j in 1..panels {
        let t = a + length * (j as f64) / (panels as f64);
        interior.accumulate(&f(t)?);
    }
    let mut endpoints = f(a)?.scaled(0.5);
    endpoints.accumulate(&f(b)?.scaled(0.5));

    let h = length / panels as f64;
    let mut total = endpoints.clone();
    total.accumulate(&interior);
    let mut trapezoid = total.scaled(h);
    let mut previous_extrapolated: Option<V> = None;

    loop {
        let new_panels = panels * 2;
        budget.take(panels, trapezoid.sup_norm())?;
        let h_new = length / new_panels as f64;
        let mut odd = V::zero();
        for j in (1..new_panels).step_by(2) {
            let t = a + length * (j as f64) / (new_panels as f64);
            odd.accumulate(&f(t)?);
        }
        let mut refined = trapezoid.scaled(0.5);
        refined.accumulate(&odd.scaled(h_new));

        let mut extrapolated = refined.scaled(4.0 / 3.0);
        extrapolated.accumulate(&trapezoid.scaled(-1.0 / 3.0));

        trapezoid = refined;
        panels = new_panels;
        if let Some(prev) = previous_extrapolated.take() {
            let delta = extrapolated.sup_distance(&prev);
            let scale = extrapolated
                .sup_norm()
                .max(scale_floor)
                .max(f64::MIN_POSITIVE);
            if delta <= settings.rel_tol * scale {
                return Ok(SegmentQuad {
                    value: extrapolated,
                    panels,
                    last_delta: delta,
                });
            }
        }
        previous_extrapolated = Some(extrapolated);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials() {
        let mut budget = NodeBudget::new(DEFAULT_MAX_NODES);
        let q = integrate_segment(
            |t| Ok(t * t),
            0.0,
            1.0,
            &QuadSettings::analytic(),
            1.0,
            &mut budget,
        )
        .unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let mut budget = NodeBudget::new(DEFAULT_MAX_NODES);
        let q = integrate_segment(
            |_| Ok(0.0),
            0.0,
            1.0,
            &QuadSettings::norm_integral(),
            1.0,
            &mut budget,
        )
        .unwrap();
        assert_eq!(q.value, 0.0);
        assert!(q.panels <= 4 * DEFAULT_INITIAL_PANELS);
    }

    #[test]
    fn node_cap_reports_non_convergence() {
        let mut budget = NodeBudget::new(200);
        // A noisy integrand that never settles.
        let mut flip = 1.0;
        let res = integrate_segment(
            move |_| {
                flip = -flip;
                Ok(flip)
            },
            0.0,
            1.0,
            &QuadSettings {
                initial_panels: 64,
                rel_tol: 1e-12,
                max_nodes: 200,
            },
            1.0,
            &mut budget,
        );
        assert!(matches!(res, Err(Error::QuadratureNoConvergence { .. })));
    }

    #[test]
    fn arctan_kernel_matches_closed_form() {
        // Integral of 1/(t^2 + a^2) over [-T, T] equals (2/a) atan(T/a).
        let a = 0.3;
        let t_half = 5.0;
        let mut budget = NodeBudget::new(DEFAULT_MAX_NODES);
        let q = integrate_segment(
            |t| Ok(1.0 / (t * t + a * a)),
            -t_half,
            t_half,
            &QuadSettings::analytic(),
            1.0 / (a * a),
            &mut budget,
        )
        .unwrap();
        let exact = (2.0 / a) * (t_half / a).atan();
        assert!((q.value - exact).abs() < 1e-7 * exact);
    }
}
