//! Rectangle contours in the complex plane, resolvent evaluation, spectral
//! functionals `f_S(A)` by numerical contour integration, and the per-segment
//! norm integrals used to audit the analytic estimates behind the
//! perturbation bounds.
//!
//! A rectangle is stored by its real span `[x_left, x_right]` and half-height
//! `T`; its boundary decomposes into the four directed segments
//! `G1` (left vertical), `G2` (top), `G3` (right vertical), `G4` (bottom).
//! Closed integrals traverse the boundary counterclockwise. Since the
//! spectrum is real, a real eigenvalue is enclosed iff it lies strictly
//! between the vertical edges.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cmat::CMatrix;
use crate::eigen::SpectralDecomposition;
use crate::error::Error;
use crate::mat::{Matrix, SymmetricMatrix};
use crate::norms;
use crate::quad::{integrate_segment, NodeBudget, QuadSettings, SegmentQuad};
use crate::spectral::GapProfile;

/// Quadrature nodes this close to an eigenvalue (relative to `sigma_1`) are
/// refused: the resolvent is blowing up there.
pub const NEAR_EIGENVALUE_REL: f64 = 1e-10;
/// Accepted imaginary residue of a contour integral, relative to
/// `1 + ||result||`.
pub const IMAG_RESIDUE_REL: f64 = 1e-7;
/// Sampling density used when maximizing `|f|` over the boundary.
pub const MAX_F_SAMPLES_PER_SEGMENT: usize = 4096;

/// Scalar weight applied under the contour integral.
pub enum ContourFn<'a> {
    /// `z^m`; `Monomial(0)` is the constant function 1.
    Monomial(u32),
    /// Arbitrary function, assumed analytic on and inside the contour.
    Custom(&'a dyn Fn(Complex64) -> Complex64),
}

impl<'a> ContourFn<'a> {
    pub fn one() -> ContourFn<'static> {
        ContourFn::Monomial(0)
    }

    pub fn z() -> ContourFn<'static> {
        ContourFn::Monomial(1)
    }

    pub fn z_squared() -> ContourFn<'static> {
        ContourFn::Monomial(2)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            ContourFn::Monomial(m) => z.powu(*m),
            ContourFn::Custom(f) => f(z),
        }
    }

    /// Maximum of `|f|` over the rectangle boundary.
    ///
    /// Monomials peak at the corner of largest modulus, so their maximum is
    /// exact; other functions are sampled densely.
    pub fn max_abs_on(&self, contour: &RectContour) -> f64 {
        match self {
            ContourFn::Monomial(m) => {
                let x = contour.x_left().abs().max(contour.x_right().abs());
                let corner = (x * x + contour.half_height() * contour.half_height()).sqrt();
                corner.powi(*m as i32)
            }
            ContourFn::Custom(f) => {
                let mut best = 0.0f64;
                for seg in contour.segments() {
                    for j in 0..=MAX_F_SAMPLES_PER_SEGMENT {
                        let t = seg.length * (j as f64) / (MAX_F_SAMPLES_PER_SEGMENT as f64);
                        best = best.max(f(seg.at(t)).norm());
                    }
                }
                best
            }
        }
    }
}

/// One directed boundary segment, parameterized by arc length.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub start: Complex64,
    pub end: Complex64,
    pub length: f64,
    /// Unit direction `(end - start) / length`.
    pub direction: Complex64,
}

impl Segment {
    fn new(start: Complex64, end: Complex64) -> Self {
        let diff = end - start;
        let length = diff.norm();
        Segment {
            start,
            end,
            length,
            direction: diff / length,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Complex64 {
        self.start + self.direction * t
    }
}

/// Axis-aligned rectangle `[x_left, x_right] x [-T, T]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RectContour {
    x_left: f64,
    x_right: f64,
    /// Half-height `T`.
    #[serde(rename = "T")]
    half_height: f64,
}

impl RectContour {
    pub fn new(x_left: f64, x_right: f64, half_height: f64) -> Result<Self, Error> {
        if !(x_left.is_finite() && x_right.is_finite() && half_height.is_finite()) {
            return Err(Error::NonFiniteEntry { row: 0, col: 0 });
        }
        if x_left >= x_right || half_height <= 0.0 {
            return Err(Error::InvalidSplit(format!(
                "degenerate rectangle: [{x_left}, {x_right}] x [-{half_height}, {half_height}]"
            )));
        }
        Ok(RectContour {
            x_left,
            x_right,
            half_height,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    /// A real point is enclosed iff strictly between the vertical edges.
    pub fn encloses(&self, lambda: f64) -> bool {
        self.x_left < lambda && lambda < self.x_right
    }

    /// Distance from a real point to the rectangle boundary.
    pub fn distance_to_boundary(&self, lambda: f64) -> f64 {
        if self.encloses(lambda) {
            (lambda - self.x_left)
                .min(self.x_right - lambda)
                .min(self.half_height)
        } else if lambda <= self.x_left {
            self.x_left - lambda
        } else {
            lambda - self.x_right
        }
    }

    /// The four segments in the labelling order `[G1 left, G2 top, G3 right,
    /// G4 bottom]`, each directed so that the concatenation
    /// `G1, G4, G3, G2` walks the boundary counterclockwise.
    pub fn segments(&self) -> [Segment; 4] {
        let (l, r, t) = (self.x_left, self.x_right, self.half_height);
        let c = Complex64::new;
        [
            Segment::new(c(l, t), c(l, -t)),  // G1: left, downward
            Segment::new(c(r, t), c(l, t)),   // G2: top, rightmost to leftmost
            Segment::new(c(r, -t), c(r, t)),  // G3: right, upward
            Segment::new(c(l, -t), c(r, -t)), // G4: bottom, leftmost to rightmost
        ]
    }

    /// Counterclockwise traversal order of [`RectContour::segments`].
    fn ccw_order() -> [usize; 4] {
        [0, 3, 2, 1]
    }
}

/// Eigenvalue placement and clearance of a contour.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClearanceReport {
    /// Minimum distance of the unperturbed spectrum to the boundary.
    pub min_distance: f64,
    /// Required clearance `2 ||E||`.
    pub required: f64,
    pub satisfied: bool,
    /// 1-based indices of enclosed/excluded eigenvalues of `A`.
    pub inside_a: Vec<usize>,
    pub outside_a: Vec<usize>,
    /// 1-based indices of enclosed/excluded eigenvalues of `A + E`
    /// (empty when no perturbed decomposition was supplied).
    pub inside_perturbed: Vec<usize>,
    pub outside_perturbed: Vec<usize>,
}

/// Classify both spectra against the contour and check the `2||E||` margin.
pub fn clearance(
    contour: &RectContour,
    decomp: &SpectralDecomposition,
    perturbed: Option<&SpectralDecomposition>,
    noise_norm: f64,
) -> ClearanceReport {
    let mut min_distance = f64::INFINITY;
    let mut inside_a = Vec::new();
    let mut outside_a = Vec::new();
    for (i, &lambda) in decomp.eigenvalues().iter().enumerate() {
        min_distance = min_distance.min(contour.distance_to_boundary(lambda));
        if contour.encloses(lambda) {
            inside_a.push(i + 1);
        } else {
            outside_a.push(i + 1);
        }
    }
    let (mut inside_perturbed, mut outside_perturbed) = (Vec::new(), Vec::new());
    if let Some(d) = perturbed {
        for (i, &lambda) in d.eigenvalues().iter().enumerate() {
            if contour.encloses(lambda) {
                inside_perturbed.push(i + 1);
            } else {
                outside_perturbed.push(i + 1);
            }
        }
    }
    let required = 2.0 * noise_norm;
    ClearanceReport {
        min_distance,
        required,
        satisfied: min_distance >= required,
        inside_a,
        outside_a,
        inside_perturbed,
        outside_perturbed,
    }
}

/// Rectangle enclosing exactly the `p` leading eigenvalues:
/// `x0 = lambda_p - delta_p/2`, `x1 = 2 sigma_1`, `T = 2 sigma_1`.
pub fn build_contour_main1(
    decomp: &SpectralDecomposition,
    p: usize,
) -> Result<RectContour, Error> {
    let n = decomp.n();
    if p < 1 || p >= n {
        return Err(Error::InvalidRank { p, n });
    }
    let gaps = GapProfile::new(decomp);
    let delta_p = gaps.delta(p);
    if delta_p <= 0.0 {
        return Err(Error::DegenerateGap { p });
    }
    let lambda_p = decomp.eigenvalues()[p - 1];
    let sigma1 = decomp.sigma1();
    let contour = RectContour::new(lambda_p - delta_p / 2.0, 2.0 * sigma1, 2.0 * sigma1)?;
    check_enclosure(&contour, decomp, p, 0)?;
    Ok(contour)
}

/// The pair of rectangles used for low-rank functionals: one around the
/// leading positive block `lambda_1..lambda_k`, one (when `k < p`) around the
/// trailing negative block.
#[derive(Debug, Clone)]
pub struct LowRankContours {
    pub positive: RectContour,
    pub negative: Option<RectContour>,
}

/// Build the low-rank contour pair:
/// `a0 = lambda_k - delta_k/2`, `a1 = 2 lambda_1`, and for the negative side
/// `b0 = lambda_{n-(p-k)+1} + delta_{n-(p-k)}/2`, `b1 = 2 lambda_n`, both with
/// `T = 2 sigma_1`. The negative rectangle is stored with
/// `x_left = b1 < x_right = b0`.
pub fn build_contours_lowrank(
    decomp: &SpectralDecomposition,
    p: usize,
    k: usize,
) -> Result<LowRankContours, Error> {
    let n = decomp.n();
    if p < 1 || p > n {
        return Err(Error::InvalidRank { p, n });
    }
    if k < 1 || k > p {
        return Err(Error::InvalidSplit(format!("k = {k} incompatible with p = {p}")));
    }
    let lambda = decomp.eigenvalues();
    let sigma1 = decomp.sigma1();
    let t = 2.0 * sigma1;
    if lambda[k - 1] <= 0.0 {
        return Err(Error::InvalidSplit(format!(
            "lambda_k = {} is not positive",
            lambda[k - 1]
        )));
    }
    if k >= n {
        return Err(Error::InvalidSplit(format!("k = {k} leaves no outside eigenvalue")));
    }
    let gaps = GapProfile::new(decomp);
    let delta_k = gaps.delta(k);
    if delta_k <= 0.0 {
        return Err(Error::DegenerateGap { p: k });
    }
    let positive = RectContour::new(lambda[k - 1] - delta_k / 2.0, 2.0 * lambda[0], t)?;
    check_enclosure(&positive, decomp, k, 0)?;

    let negative = if k < p {
        let bottom = p - k;
        let b_index = n - bottom + 1; // 1-based index of the largest enclosed trailing eigenvalue
        let lambda_b = lambda[b_index - 1];
        let lambda_n = lambda[n - 1];
        if lambda_n >= 0.0 {
            return Err(Error::InvalidSplit(format!(
                "trailing block requested but lambda_n = {lambda_n} is not negative"
            )));
        }
        let delta_b = gaps.delta(b_index - 1);
        if delta_b <= 0.0 {
            return Err(Error::DegenerateGap { p: b_index - 1 });
        }
        let contour = RectContour::new(2.0 * lambda_n, lambda_b + delta_b / 2.0, t)?;
        check_enclosure(&contour, decomp, bottom, n - bottom)?;
        Some(contour)
    } else {
        None
    };

    Ok(LowRankContours { positive, negative })
}

/// Verify a contour encloses exactly the eigenvalue indices
/// `offset+1 ..= offset+count` (1-based).
fn check_enclosure(
    contour: &RectContour,
    decomp: &SpectralDecomposition,
    count: usize,
    offset: usize,
) -> Result<(), Error> {
    for (i, &lambda) in decomp.eigenvalues().iter().enumerate() {
        let should_be_inside = i >= offset && i < offset + count;
        if contour.encloses(lambda) != should_be_inside {
            return Err(Error::InvalidSplit(format!(
                "eigenvalue {} ({lambda}) on the wrong side of the contour",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Resolvent `(zI - A)^{-1}` assembled from the spectral decomposition:
/// `sum_i u_i u_i^T / (z - lambda_i)`.
pub fn resolvent(decomp: &SpectralDecomposition, z: Complex64) -> Result<CMatrix, Error> {
    let n = decomp.n();
    let mut min_dist = f64::INFINITY;
    for &lambda in decomp.eigenvalues() {
        min_dist = min_dist.min((z - lambda).norm());
    }
    if min_dist <= 1e-12 {
        return Err(Error::NearEigenvalue {
            distance: min_dist,
            limit: 1e-12,
        });
    }
    let g: Vec<Complex64> = decomp
        .eigenvalues()
        .iter()
        .map(|&lambda| Complex64::new(1.0, 0.0) / (z - lambda))
        .collect();
    let mut out = CMatrix::zeros(n);
    for a in 0..n {
        for b in a..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                acc += g[i] * decomp.eigenvector(i)[a] * decomp.eigenvector(i)[b];
            }
            out.set(a, b, acc);
            out.set(b, a, acc);
        }
    }
    Ok(out)
}

/// Convenience form of [`resolvent`] that decomposes the matrix first.
pub fn resolvent_of(a: &SymmetricMatrix, z: Complex64) -> Result<CMatrix, Error> {
    let decomp = crate::eigen::eigendecompose(a)?;
    resolvent(&decomp, z)
}

/// Result of a contour integration of `f(z) (z - A)^{-1} / (2 pi i)`.
#[derive(Debug, Clone)]
pub struct ContourIntegral {
    pub value: SymmetricMatrix,
    /// Spectral norm of the discarded imaginary part.
    pub imag_residue: f64,
    /// Panels per segment at acceptance, in `[G1, G2, G3, G4]` order.
    pub panels: [usize; 4],
    /// Total integrand evaluations.
    pub nodes: usize,
    /// Largest successive-refinement distance at acceptance.
    pub max_delta: f64,
}

/// `f_S(A)` by numerical contour integration, where `S` is the set of
/// eigenvalues the contour encloses.
///
/// The eigenbasis is constant along the contour, so the quadrature reduces
/// to one scalar Cauchy weight per eigenvalue; the assembled matrix equals
/// the node-by-node matrix sum up to rounding. The real part is returned and
/// the imaginary residue must stay below `1e-7 * (1 + ||result||)`.
pub fn contour_f_s(
    decomp: &SpectralDecomposition,
    contour: &RectContour,
    f: &ContourFn<'_>,
) -> Result<ContourIntegral, Error> {
    contour_f_s_with(decomp, contour, f, &QuadSettings::analytic())
}

pub fn contour_f_s_with(
    decomp: &SpectralDecomposition,
    contour: &RectContour,
    f: &ContourFn<'_>,
    settings: &QuadSettings,
) -> Result<ContourIntegral, Error> {
    let n = decomp.n();
    let guard = NEAR_EIGENVALUE_REL * decomp.sigma1();
    let f_scale = f.max_abs_on(contour).max(f64::MIN_POSITIVE);
    let segments = contour.segments();
    let mut budget = NodeBudget::new(settings.max_nodes);
    let mut weights = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut panels = [0usize; 4];
    let mut max_delta = 0.0f64;
    for &seg_idx in RectContour::ccw_order().iter() {
        let seg = segments[seg_idx];
        let quad: SegmentQuad<Vec<Complex64>> = integrate_segment(
            |t| {
                let z = seg.at(t);
                let fz = f.eval(z) * seg.direction;
                let mut row = Vec::with_capacity(n);
                for &lambda in decomp.eigenvalues() {
                    let d = z - lambda;
                    if d.norm() <= guard {
                        return Err(Error::NearEigenvalue {
                            distance: d.norm(),
                            limit: guard,
                        });
                    }
                    row.push(fz / d);
                }
                Ok(row)
            },
            0.0,
            seg.length,
            settings,
            f_scale,
            &mut budget,
        )?;
        panels[seg_idx] = quad.panels;
        max_delta = max_delta.max(quad.last_delta);
        if !quad.value.is_empty() {
            for (w, v) in weights.iter_mut().zip(&quad.value) {
                *w += v;
            }
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * core::f64::consts::PI);
    for w in weights.iter_mut() {
        *w /= two_pi_i;
    }

    // In the orthonormal eigenbasis the norm of sum_i c_i u_i u_i^T is max |c_i|.
    let value_norm = weights.iter().fold(0.0f64, |m, w| m.max(w.re.abs()));
    let imag_residue = weights.iter().fold(0.0f64, |m, w| m.max(w.im.abs()));
    let limit = IMAG_RESIDUE_REL * (1.0 + value_norm);
    if imag_residue > limit {
        return Err(Error::ExcessImaginaryResidue {
            residue: imag_residue,
            limit,
        });
    }

    let value = SymmetricMatrix::from_upper(n, |a, b| {
        let mut acc = 0.0;
        for i in 0..n {
            acc += weights[i].re * decomp.eigenvector(i)[a] * decomp.eigenvector(i)[b];
        }
        acc
    });
    Ok(ContourIntegral {
        value,
        imag_residue,
        panels,
        nodes: budget.used(),
        max_delta,
    })
}

/// Quadrature of `f(z) [(z - A~)^{-1} - (z - A)^{-1}] / (2 pi i)` with full
/// resolvent matrices at every node. This is the independent route for
/// checking the perturbation identity against two [`contour_f_s`] runs.
pub fn contour_perturbation_integral(
    decomp_a: &SpectralDecomposition,
    decomp_perturbed: &SpectralDecomposition,
    contour: &RectContour,
    f: &ContourFn<'_>,
    settings: &QuadSettings,
) -> Result<Matrix, Error> {
    let n = decomp_a.n();
    let guard = NEAR_EIGENVALUE_REL * decomp_a.sigma1().max(decomp_perturbed.sigma1());
    let f_scale = f.max_abs_on(contour).max(f64::MIN_POSITIVE);
    let segments = contour.segments();
    let mut budget = NodeBudget::new(settings.max_nodes);
    let mut total = alloc::vec![Complex64::new(0.0, 0.0); n * n];
    for &seg_idx in RectContour::ccw_order().iter() {
        let seg = segments[seg_idx];
        let quad: SegmentQuad<Vec<Complex64>> = integrate_segment(
            |t| {
                let z = seg.at(t);
                guard_distance(decomp_a, z, guard)?;
                guard_distance(decomp_perturbed, z, guard)?;
                let ra = resolvent(decomp_a, z)?;
                let rp = resolvent(decomp_perturbed, z)?;
                let fz = f.eval(z) * seg.direction;
                Ok(rp.sub(&ra).scale(fz).data().to_vec())
            },
            0.0,
            seg.length,
            settings,
            f_scale,
            &mut budget,
        )?;
        if !quad.value.is_empty() {
            for (w, v) in total.iter_mut().zip(&quad.value) {
                *w += v;
            }
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * core::f64::consts::PI);
    for w in total.iter_mut() {
        *w /= two_pi_i;
    }
    Ok(CMatrix::from_data(n, total).real_part())
}

fn guard_distance(
    decomp: &SpectralDecomposition,
    z: Complex64,
    guard: f64,
) -> Result<(), Error> {
    for &lambda in decomp.eigenvalues() {
        let d = (z - lambda).norm();
        if d <= guard {
            return Err(Error::NearEigenvalue {
                distance: d,
                limit: guard,
            });
        }
    }
    Ok(())
}

/// Per-segment norm integrals, indexed `[G1, G2, G3, G4]`.
#[derive(Debug, Clone)]
pub struct SegmentNorms {
    pub values: [f64; 4],
    pub panels: [usize; 4],
    pub nodes: usize,
}

impl SegmentNorms {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `M_k = int_{G_k} ||f(z) (z-A)^{-1} E (z-A)^{-1}|| |dz|` for the four
/// boundary segments. Requires the `2||E||` clearance.
pub fn segment_integrals_m(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    contour: &RectContour,
    f: &ContourFn<'_>,
) -> Result<SegmentNorms, Error> {
    segment_integrals_m_with(decomp, noise, contour, f, &QuadSettings::norm_integral())
}

pub fn segment_integrals_m_with(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    contour: &RectContour,
    f: &ContourFn<'_>,
    settings: &QuadSettings,
) -> Result<SegmentNorms, Error> {
    let noise_norm = norms::spectral_norm_sym(noise);
    let report = clearance(contour, decomp, None, noise_norm);
    // A 1e-9 relative allowance keeps instances sitting exactly on the
    // clearance boundary usable despite norm re-measurement rounding.
    if report.min_distance < report.required * (1.0 - 1e-9) {
        return Err(Error::ClearanceViolation {
            min_distance: report.min_distance,
            required: report.required,
        });
    }
    let projected = project_to_eigenbasis(decomp, noise);
    segment_norm_quadrature(decomp, contour, settings, |z, g| {
        let fz = f.eval(z).norm();
        if fz == 0.0 {
            return 0.0;
        }
        let sandwich = projected.conjugate_by_diagonals(g, g);
        fz * norms::spectral_norm_complex(&sandwich)
    })
}

/// `N_l = int_{G_l} |z| / min_i |z - lambda_i|^2 |dz|` for the four segments.
pub fn segment_integrals_n(
    decomp: &SpectralDecomposition,
    contour: &RectContour,
) -> Result<SegmentNorms, Error> {
    segment_integrals_n_with(decomp, contour, &QuadSettings::norm_integral())
}

pub fn segment_integrals_n_with(
    decomp: &SpectralDecomposition,
    contour: &RectContour,
    settings: &QuadSettings,
) -> Result<SegmentNorms, Error> {
    segment_norm_quadrature(decomp, contour, settings, |z, g| {
        let min_dist_sq = g
            .iter()
            .fold(f64::INFINITY, |m, gi| m.min(1.0 / gi.norm_sqr()));
        z.norm() / min_dist_sq
    })
}

/// `F_1(f, S) = (1/2pi) sum_k M_k`: the norm integral of
/// `f(z) (z-A)^{-1} E (z-A)^{-1}` over the whole boundary.
pub fn f1_integral(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    contour: &RectContour,
    f: &ContourFn<'_>,
) -> Result<f64, Error> {
    Ok(segment_integrals_m(decomp, noise, contour, f)?.total() / (2.0 * core::f64::consts::PI))
}

/// `F(f, S) = (1/2pi) int ||f(z) [(z-A~)^{-1} - (z-A)^{-1}]|| |dz|`, computed
/// through the resolvent product identity
/// `(z-A~)^{-1} - (z-A)^{-1} = (z-A)^{-1} E (z-A~)^{-1}`.
pub fn f_integral(
    decomp_a: &SpectralDecomposition,
    decomp_perturbed: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    contour: &RectContour,
    f: &ContourFn<'_>,
    settings: &QuadSettings,
) -> Result<f64, Error> {
    let n = decomp_a.n();
    if noise.n() != n || decomp_perturbed.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: noise.n(),
        });
    }
    // D = U_A^T E U_perturbed, so the integrand norm is
    // || diag(g_A) D diag(g_perturbed) || by orthogonal invariance.
    let mut mixed = Matrix::zeros(n, n);
    let mut image = alloc::vec![0.0; n];
    for j in 0..n {
        noise.mul_vec(decomp_perturbed.eigenvector(j), &mut image);
        for i in 0..n {
            let dot: f64 = decomp_a
                .eigenvector(i)
                .iter()
                .zip(&image)
                .map(|(a, b)| a * b)
                .sum();
            mixed.set(i, j, dot);
        }
    }
    let mixed_c = CMatrix::from_real(&mixed);
    let guard = NEAR_EIGENVALUE_REL * decomp_a.sigma1().max(decomp_perturbed.sigma1());
    let segments = contour.segments();
    let mut budget = NodeBudget::new(settings.max_nodes);
    let mut total = 0.0;
    for seg in segments.iter() {
        let quad: SegmentQuad<f64> = integrate_segment(
            |t| {
                let z = seg.at(t);
                let fz = f.eval(z).norm();
                let mut ga = Vec::with_capacity(n);
                for &lambda in decomp_a.eigenvalues() {
                    let d = z - lambda;
                    if d.norm() <= guard {
                        return Err(Error::NearEigenvalue {
                            distance: d.norm(),
                            limit: guard,
                        });
                    }
                    ga.push(Complex64::new(1.0, 0.0) / d);
                }
                let mut gp = Vec::with_capacity(n);
                for &lambda in decomp_perturbed.eigenvalues() {
                    let d = z - lambda;
                    if d.norm() <= guard {
                        return Err(Error::NearEigenvalue {
                            distance: d.norm(),
                            limit: guard,
                        });
                    }
                    gp.push(Complex64::new(1.0, 0.0) / d);
                }
                if fz == 0.0 {
                    return Ok(0.0);
                }
                let sandwich = mixed_c.conjugate_by_diagonals(&ga, &gp);
                Ok(fz * norms::spectral_norm_complex(&sandwich))
            },
            0.0,
            seg.length,
            settings,
            f64::MIN_POSITIVE,
            &mut budget,
        )?;
        total += quad.value;
    }
    Ok(total / (2.0 * core::f64::consts::PI))
}

/// `max_{z on boundary} ||(z - A)^{-1} E||` by dense sampling.
pub fn max_resolvent_noise_product(
    decomp: &SpectralDecomposition,
    noise: &SymmetricMatrix,
    contour: &RectContour,
    samples_per_segment: usize,
) -> Result<f64, Error> {
    let n = decomp.n();
    if noise.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: noise.n(),
        });
    }
    // (z-A)^{-1} E = U diag(g) (U^T E); left-multiplication by U preserves
    // the spectral norm.
    let mut ute = Matrix::zeros(n, n);
    let mut image = alloc::vec![0.0; n];
    for i in 0..n {
        // Row i of U^T E is E u_i (E symmetric).
        noise.mul_vec(decomp.eigenvector(i), &mut image);
        for j in 0..n {
            ute.set(i, j, image[j]);
        }
    }
    let ute_c = CMatrix::from_real(&ute);
    let guard = NEAR_EIGENVALUE_REL * decomp.sigma1();
    let ones = alloc::vec![Complex64::new(1.0, 0.0); n];
    let mut best = 0.0f64;
    for seg in contour.segments().iter() {
        for j in 0..=samples_per_segment {
            let t = seg.length * (j as f64) / (samples_per_segment as f64);
            let z = seg.at(t);
            let mut g = Vec::with_capacity(n);
            for &lambda in decomp.eigenvalues() {
                let d = z - lambda;
                if d.norm() <= guard {
                    return Err(Error::NearEigenvalue {
                        distance: d.norm(),
                        limit: guard,
                    });
                }
                g.push(Complex64::new(1.0, 0.0) / d);
            }
            let scaled = ute_c.conjugate_by_diagonals(&g, &ones);
            best = best.max(norms::spectral_norm_complex(&scaled));
        }
    }
    Ok(best)
}

/// Closed-form cross-checked estimate `int_{-T}^{T} dt/(t^2 + a^2) <= 4/a`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IntegralLemmaCheck {
    pub numeric: f64,
    pub bound: f64,
    pub closed_form: f64,
    pub holds: bool,
}

pub fn integral_lemma_check(a: f64, t: f64) -> Result<IntegralLemmaCheck, Error> {
    if !(a > 0.0 && t > 0.0 && a <= t) {
        return Err(Error::InvalidIntegralParams { a, t });
    }
    let mut budget = NodeBudget::new(crate::quad::DEFAULT_MAX_NODES);
    let quad = integrate_segment(
        |u| Ok(1.0 / (u * u + a * a)),
        -t,
        t,
        &QuadSettings::analytic(),
        1.0 / (a * a),
        &mut budget,
    )?;
    let numeric = quad.value;
    let bound = 4.0 / a;
    let closed_form = (2.0 / a) * (t / a).atan();
    Ok(IntegralLemmaCheck {
        numeric,
        bound,
        closed_form,
        holds: numeric <= bound + 1e-9,
    })
}

/// `U^T E U` in the eigenbasis of the decomposition.
fn project_to_eigenbasis(decomp: &SpectralDecomposition, noise: &SymmetricMatrix) -> CMatrix {
    let n = decomp.n();
    let mut projected = Matrix::zeros(n, n);
    let mut image = alloc::vec![0.0; n];
    for j in 0..n {
        noise.mul_vec(decomp.eigenvector(j), &mut image);
        for i in 0..n {
            let dot: f64 = decomp
                .eigenvector(i)
                .iter()
                .zip(&image)
                .map(|(a, b)| a * b)
                .sum();
            projected.set(i, j, dot);
        }
    }
    CMatrix::from_real(&projected)
}

/// Shared skeleton for the per-segment norm quadratures. The integrand gets
/// the node `z` and the per-eigenvalue reciprocals `g_i = 1/(z - lambda_i)`.
fn segment_norm_quadrature<F>(
    decomp: &SpectralDecomposition,
    contour: &RectContour,
    settings: &QuadSettings,
    integrand: F,
) -> Result<SegmentNorms, Error>
where
    F: Fn(Complex64, &[Complex64]) -> f64,
{
    let n = decomp.n();
    let guard = NEAR_EIGENVALUE_REL * decomp.sigma1();
    let segments = contour.segments();
    let mut budget = NodeBudget::new(settings.max_nodes);
    let mut values = [0.0f64; 4];
    let mut panels = [0usize; 4];
    for (idx, seg) in segments.iter().enumerate() {
        let quad: SegmentQuad<f64> = integrate_segment(
            |t| {
                let z = seg.at(t);
                let mut g = Vec::with_capacity(n);
                for &lambda in decomp.eigenvalues() {
                    let d = z - lambda;
                    if d.norm() <= guard {
                        return Err(Error::NearEigenvalue {
                            distance: d.norm(),
                            limit: guard,
                        });
                    }
                    g.push(Complex64::new(1.0, 0.0) / d);
                }
                Ok(integrand(z, &g))
            },
            0.0,
            seg.length,
            settings,
            f64::MIN_POSITIVE,
            &mut budget,
        )?;
        values[idx] = quad.value;
        panels[idx] = quad.panels;
    }
    Ok(SegmentNorms {
        values,
        panels,
        nodes: budget.used(),
    })
}
