//! The torus bundle `(SL(2,R) ⋉ R^2) / (SL(2,Z) ⋉ Z^2)` over the modular
//! surface, read in product coordinates `I x T^2`.
//!
//! A coset `x SL(2,Z)` is represented by the matrix `x` whose inverse sends
//! `i` into the closed fundamental domain `{|u| <= 1/2, |z| >= 1}`, with the
//! sign fixed by requiring `x^{-1} = n(u) a(v) k(theta)` with `theta in [0, pi)`.
//! The point `(x, vbar)` stands for `(x, rho(x) vbar) Γ`, `rho` being the
//! standard representation.

use std::f64::consts::{PI, TAU};
use std::ops::{Mul, Neg};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::{wrap, AngleMap};
use crate::error::{param, Error, Result};
use crate::grid::FiberGrid;

pub const MAX_REDUCTION_STEPS: usize = 1_000;
pub const MAX_SAMPLER_PROPOSALS: usize = 1_000_000;
pub const BOUNDARY_SLACK: f64 = 1e-9;
pub const CUSP_WARNING_HEIGHT: f64 = 1e6;

/// Element of `SL(2, R)`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement(pub [[f64; 2]; 2]);

impl GroupElement {
    pub const IDENTITY: Self = Self([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self([[a, b], [c, d]])
    }

    /// `n(u) = [[1, u], [0, 1]]`.
    pub fn unipotent(u: f64) -> Self {
        Self::new(1.0, u, 0.0, 1.0)
    }

    /// `a(v) = diag(sqrt v, 1 / sqrt v)`, sending `i` to `v i`.
    pub fn dilation(v: f64) -> Self {
        let s = v.sqrt();
        Self::new(s, 0.0, 0.0, 1.0 / s)
    }

    /// Rotation `k(theta)`, which fixes `i`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, -s, s, c)
    }

    /// `diag(e^t, e^{-t})`.
    pub fn diagonal(t: f64) -> Self {
        Self::new(t.exp(), 0.0, 0.0, (-t).exp())
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Adjugate; the inverse for determinant one.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        let a = self.adjugate().0;
        Self::new(a[0][0] / d, a[0][1] / d, a[1][0] / d, a[1][1] / d)
    }

    /// Rescale so the determinant is one again.
    pub fn renormalized(&self) -> Self {
        let s = self.det().sqrt();
        let m = &self.0;
        Self::new(m[0][0] / s, m[0][1] / s, m[1][0] / s, m[1][1] / s)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Möbius action on `i`.
    pub fn act_on_i(&self) -> UpperHalfPoint {
        let m = &self.0;
        let den = m[1][0] * m[1][0] + m[1][1] * m[1][1];
        UpperHalfPoint {
            u: (m[0][0] * m[1][0] + m[0][1] * m[1][1]) / den,
            v: self.det() / den,
        }
    }

    /// Point of the modular surface attached to the coset: `x^{-1} i`.
    pub fn base_point(&self) -> UpperHalfPoint {
        self.adjugate().act_on_i()
    }

    /// `(u, v, theta)` with `x^{-1} = n(u) a(v) k(theta)`.
    pub fn iwasawa(&self) -> (f64, f64, f64) {
        let h = self.adjugate();
        let z = h.act_on_i();
        let theta = h.0[1][0].atan2(h.0[1][1]).rem_euclid(TAU);
        (z.u, z.v, theta)
    }

    /// Sign convention lifting PSL to SL: `theta in [0, pi)`.
    pub fn is_canonical(&self) -> bool {
        let m = &self.0;
        -m[1][0] > 0.0 || (m[1][0] == 0.0 && m[0][0] > 0.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).abs());
            }
        }
        worst
    }
}

impl Mul for GroupElement {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Self([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Mul<LatticeElement> for GroupElement {
    type Output = Self;
    fn mul(self, o: LatticeElement) -> Self {
        self * o.to_real()
    }
}

impl Neg for GroupElement {
    type Output = Self;
    fn neg(self) -> Self {
        let m = &self.0;
        Self::new(-m[0][0], -m[0][1], -m[1][0], -m[1][1])
    }
}

/// Element of `SL(2, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeElement(pub [[i64; 2]; 2]);

impl LatticeElement {
    pub const IDENTITY: Self = Self([[1, 0], [0, 1]]);
    /// `S: z -> -1/z`.
    pub const S: Self = Self([[0, -1], [1, 0]]);

    /// `T^n: z -> z + n`.
    pub fn translation(n: i64) -> Self {
        Self([[1, n], [0, 1]])
    }

    pub fn det(&self) -> i64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Exact inverse (adjugate, since the determinant is one).
    pub fn inverse(&self) -> Self {
        let m = &self.0;
        Self([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn checked_mul(&self, o: &Self) -> Option<Self> {
        let (a, b) = (&self.0, &o.0);
        let e = |r: usize, c: usize| {
            a[r][0].checked_mul(b[0][c])?.checked_add(a[r][1].checked_mul(b[1][c])?)
        };
        Some(Self([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]]))
    }

    pub fn to_real(&self) -> GroupElement {
        let m = &self.0;
        GroupElement::new(m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64)
    }

    /// Action on the torus `R^2 / Z^2`.
    pub fn apply_mod1(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            wrap(m[0][0] as f64 * v[0] + m[0][1] as f64 * v[1]),
            wrap(m[1][0] as f64 * v[0] + m[1][1] as f64 * v[1]),
        ]
    }
}

impl Neg for LatticeElement {
    type Output = Self;
    fn neg(self) -> Self {
        let m = &self.0;
        Self([[-m[0][0], -m[0][1]], [-m[1][0], -m[1][1]]])
    }
}

/// `z = u + i v` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperHalfPoint {
    pub u: f64,
    pub v: f64,
}

impl UpperHalfPoint {
    pub fn norm_sqr(&self) -> f64 {
        self.u * self.u + self.v * self.v
    }

    /// Closed fundamental domain with slack `tol`.
    pub fn in_fundamental_domain(&self, tol: f64) -> bool {
        self.v > 0.0 && self.u.abs() <= 0.5 + tol && self.norm_sqr() >= 1.0 - tol
    }
}

/// Gauss reduction: returns `(x, gamma)` with `x = g gamma` and `x^{-1} i`
/// in the fundamental domain.
pub fn reduce(g: &GroupElement) -> Result<(GroupElement, LatticeElement)> {
    if !(g.det() - 1.0).abs().is_finite() || (g.det() - 1.0).abs() > 1e-6 {
        return Err(Error::ReductionFault(format!("determinant {} is not 1", g.det())));
    }
    // delta acts on the left of h = g^{-1}
    let mut delta = LatticeElement::IDENTITY;
    let mut h = g.adjugate();
    let apply = |m: LatticeElement, delta: &mut LatticeElement, h: &mut GroupElement| -> Result<()> {
        *delta = m
            .checked_mul(delta)
            .ok_or_else(|| Error::ReductionFault("lattice element overflowed i64".into()))?;
        *h = m.to_real() * *h;
        Ok(())
    };
    let mut done = false;
    for _ in 0..MAX_REDUCTION_STEPS {
        let z = h.act_on_i();
        if !(z.u.is_finite() && z.v.is_finite() && z.v > 0.0) {
            return Err(Error::ReductionFault(format!("point {z:?} left the upper half plane")));
        }
        let shift = (z.u + 0.5).floor();
        if shift != 0.0 {
            if shift.abs() > 9e15 {
                return Err(Error::ReductionFault(format!("translation {shift} too large")));
            }
            apply(LatticeElement::translation(-(shift as i64)), &mut delta, &mut h)?;
            continue;
        }
        if z.norm_sqr() < 1.0 {
            apply(LatticeElement::S, &mut delta, &mut h)?;
            continue;
        }
        done = true;
        break;
    }
    if !done {
        return Err(Error::ReductionFault(format!(
            "no fundamental-domain point after {MAX_REDUCTION_STEPS} moves"
        )));
    }
    // boundary conventions: u >= 0 on the unit circle, u = +1/2 on the edges
    let z = h.act_on_i();
    if z.norm_sqr() - 1.0 <= 1e-12 && z.u < 0.0 {
        apply(LatticeElement::S, &mut delta, &mut h)?;
    } else if z.u + 0.5 <= 1e-12 {
        apply(LatticeElement::translation(1), &mut delta, &mut h)?;
    }
    let mut gamma = delta.inverse();
    let mut x = *g * gamma;
    if !x.is_canonical() {
        x = -x;
        gamma = -gamma;
    }
    Ok((x, gamma))
}

/// `f_beta(x) = rho(x)^{-1} beta mod Z^2`.
pub fn angle_map_value(x: &GroupElement, beta: [f64; 2]) -> [f64; 2] {
    let v = x.adjugate().apply(beta);
    [wrap(v[0]), wrap(v[1])]
}

/// Normalised hyperbolic area `du dv / v^2` restricted to the fundamental
/// domain, as a rejection sampler. Returns `(u, v)`.
pub fn sample_fundamental_domain<R: Rng + ?Sized>(rng: &mut R) -> Result<UpperHalfPoint> {
    // Proposal: u uniform, v Pareto above the arc with density v_min(u) / v^2.
    // Target/proposal is proportional to 1 / v_min(u), largest at u = 0.
    let floor = 3f64.sqrt() / 2.0;
    for _ in 0..MAX_SAMPLER_PROPOSALS {
        let u: f64 = rng.gen_range(-0.5..0.5);
        let v_min = (1.0 - u * u).sqrt();
        let v = v_min / (1.0 - rng.gen::<f64>());
        if rng.gen::<f64>() * v_min < floor {
            return Ok(UpperHalfPoint { u, v });
        }
    }
    Err(Error::SamplerFault(MAX_SAMPLER_PROPOSALS))
}

/// Haar-distributed coset representative.
pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> Result<GroupElement> {
    let z = sample_fundamental_domain(rng)?;
    let theta = rng.gen_range(0.0..TAU);
    let h = GroupElement::unipotent(z.u) * GroupElement::dilation(z.v) * GroupElement::rotation(theta);
    let x = h.adjugate();
    Ok(if x.is_canonical() { x } else { -x })
}

/// Parameters of the skew product `(a, alpha)` and the vertical rotation `(e, beta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// `a = diag(e^{t0}, e^{-t0})`.
    pub t0: f64,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_170_601;

impl Default for ModelConfig {
    fn default() -> Self {
        Self { t0: 0.5, alpha: [0.3, 0.7], beta: [1.0, 0.0], seed: DEFAULT_SEED }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return param(format!("t0 must be positive, got {}", self.t0));
        }
        if self.alpha.iter().chain(&self.beta).any(|c| !c.is_finite()) {
            return param("alpha and beta must be finite");
        }
        let [b1, b2] = self.beta;
        if (b1 == 0.0) == (b2 == 0.0) {
            return param("beta must be a nonzero multiple of e1 or e2");
        }
        Ok(())
    }

    pub fn a(&self) -> GroupElement {
        GroupElement::diagonal(self.t0)
    }

    /// Eigenvalue of `rho(a)` on `beta`.
    pub fn kappa(&self) -> f64 {
        if self.beta[0] != 0.0 {
            self.t0.exp()
        } else {
            (-self.t0).exp()
        }
    }
}

/// Point of `G / Γ` in `I x T^2` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewState {
    pub x: GroupElement,
    pub vbar: [f64; 2],
}

impl SkewState {
    pub fn new(x: GroupElement, vbar: [f64; 2]) -> Result<Self> {
        if !x.base_point().in_fundamental_domain(BOUNDARY_SLACK) {
            return param("base element is not a reduced representative");
        }
        if vbar.iter().any(|c| !(0.0..1.0).contains(c)) {
            return param("fiber coordinate must lie in [0, 1)^2");
        }
        Ok(Self { x, vbar })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Result<Self> {
        let x = haar_sample(rng)?;
        Ok(Self { x, vbar: [rng.gen(), rng.gen()] })
    }
}

/// Left multiplication by `(e, beta)`: `vbar += f_beta(x)`.
pub fn vertical_step(s: &SkewState, beta: [f64; 2]) -> SkewState {
    let f = angle_map_value(&s.x, beta);
    SkewState { x: s.x, vbar: [wrap(s.vbar[0] + f[0]), wrap(s.vbar[1] + f[1])] }
}

/// Left multiplication by `(a, alpha)`. With `a x = x' gamma^{-1}` the fiber
/// moves by `vbar' = f_alpha(x') + rho(gamma)^{-1} vbar mod Z^2`.
pub fn skew_step(s: &SkewState, cfg: &ModelConfig) -> Result<SkewState> {
    let (x, gamma) = reduce(&(cfg.a() * s.x))?;
    let x = x.renormalized();
    let height = x.base_point().v;
    if height > CUSP_WARNING_HEIGHT {
        log::warn!("orbit reached cusp height {height:.3e}");
    }
    let drift = angle_map_value(&x, cfg.alpha);
    let moved = gamma.inverse().apply_mod1(s.vbar);
    Ok(SkewState { x, vbar: [wrap(drift[0] + moved[0]), wrap(drift[1] + moved[1])] })
}

/// `(g, w)` in `G = SL(2,R) ⋉ R^2` before passing to the quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedPoint {
    pub g: GroupElement,
    pub w: [f64; 2],
}

impl LiftedPoint {
    /// `(x, rho(x) vbar)`.
    pub fn lift(s: &SkewState) -> Self {
        Self { g: s.x, w: s.x.apply(s.vbar) }
    }

    /// Left multiplication `(h, b)(g, w) = (h g, b + rho(h) w)`.
    pub fn left_mul(&self, h: &GroupElement, b: [f64; 2]) -> Self {
        let hw = h.apply(self.w);
        Self { g: *h * self.g, w: [b[0] + hw[0], b[1] + hw[1]] }
    }

    /// Coordinates of `(g, w) Γ`.
    pub fn project(&self) -> Result<SkewState> {
        let (x, _) = reduce(&self.g)?;
        let v = x.adjugate().apply(self.w);
        Ok(SkewState { x, vbar: [wrap(v[0]), wrap(v[1])] })
    }
}

/// Orbit of length `steps + 1` starting at `s0`.
pub fn trajectory(s0: &SkewState, cfg: &ModelConfig, steps: usize) -> Result<Vec<SkewState>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*s0);
    let mut s = *s0;
    for _ in 0..steps {
        s = skew_step(&s, cfg)?;
        out.push(s);
    }
    Ok(out)
}

fn character(m: [i64; 2], v: [f64; 2]) -> Complex64 {
    Complex64::cis(TAU * wrap(m[0] as f64 * v[0] + m[1] as f64 * v[1]))
}

/// `(1/T) Σ_{k<T} e^{2πi <m, vbar_k>}` along the skew orbit of `s0`.
pub fn birkhoff_average(s0: &SkewState, cfg: &ModelConfig, steps: usize, m: [i64; 2]) -> Result<Complex64> {
    if steps == 0 {
        return param("birkhoff average needs T >= 1");
    }
    if m == [0, 0] {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut s = *s0;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..steps {
        acc += character(m, s.vbar);
        if k + 1 < steps {
            s = skew_step(&s, cfg)?;
        }
    }
    Ok(acc / steps as f64)
}

/// Generator for `stream` derived from the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Birkhoff averages from `starts` Haar-random initial states; start `j`
/// draws from stream `j` of `cfg.seed`.
pub fn birkhoff_ensemble(cfg: &ModelConfig, steps: usize, m: [i64; 2], starts: usize) -> Result<Vec<Complex64>> {
    (0..starts as u64)
        .into_par_iter()
        .map(|j| {
            let s0 = SkewState::random(&mut stream_rng(cfg.seed, j))?;
            birkhoff_average(&s0, cfg, steps, m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub re: f64,
    pub im: f64,
    /// Standard error of the modulus-scale estimate, `sqrt(Var / M)`.
    pub std_err: f64,
    pub samples: usize,
}

impl CorrelationEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

const CORRELATION_CHUNK: usize = 1024;

/// Monte Carlo estimate of `∫ e^{2πi <m1, vbar((a,alpha)^k p)>} e^{-2πi <m2, vbar(p)>} dλ(p)`.
pub fn correlation(cfg: &ModelConfig, m1: [i64; 2], m2: [i64; 2], lag: usize, samples: usize) -> Result<CorrelationEstimate> {
    if samples == 0 {
        return param("correlation needs at least one sample");
    }
    let chunks = samples.div_ceil(CORRELATION_CHUNK);
    let partial: Vec<(Complex64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(cfg.seed, (1 << 32) + c as u64);
            let count = CORRELATION_CHUNK.min(samples - c * CORRELATION_CHUNK);
            let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
            for _ in 0..count {
                let p = SkewState::random(&mut rng)?;
                let mut s = p;
                for _ in 0..lag {
                    s = skew_step(&s, cfg)?;
                }
                let term = character(m1, s.vbar) * character(m2, p.vbar).conj();
                sum += term;
                sq += term.norm_sqr();
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let (sum, sq) = partial
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(a, b), (s, q)| (a + s, b + q));
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq / n - mean.norm_sqr()).max(0.0);
    Ok(CorrelationEstimate { re: mean.re, im: mean.im, std_err: (var / n).sqrt(), samples })
}

/// Haar-sampled base grid carrying the induced map `f_beta`.
pub fn induced_angle_grid(cfg: &ModelConfig, q: usize) -> Result<(FiberGrid, AngleMap)> {
    if q == 0 {
        return param("induced grid needs Q >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nodes = (0..q).map(|_| haar_sample(&mut rng)).collect::<Result<Vec<_>>>()?;
    induced_angle_grid_from(nodes, cfg.beta)
}

/// Same as [`induced_angle_grid`] on explicit nodes.
pub fn induced_angle_grid_from(nodes: Vec<GroupElement>, beta: [f64; 2]) -> Result<(FiberGrid, AngleMap)> {
    let grid = FiberGrid::samples(format!("haar-{}", nodes.len()), nodes.len())?;
    Ok((grid, AngleMap::homogeneous_induced(beta, Arc::new(nodes))))
}

/// Closed-form moments of the normalised measure on the fundamental
/// domain: `E[1/v] = 3 ln 3 / (2 pi)` and `P(v > 2) = 3 / (2 pi)`.
pub fn haar_moments() -> (f64, f64) {
    (3.0 * 3f64.ln() / (2.0 * PI), 3.0 / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: GroupElement, b: GroupElement, tol: f64) {
        assert!(a.max_abs_diff(&b) < tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn identity_reduces_to_itself() {
        let (x, gamma) = reduce(&GroupElement::IDENTITY).unwrap();
        assert_eq!(x, GroupElement::IDENTITY);
        assert_eq!(gamma, LatticeElement::IDENTITY);
    }

    #[test]
    fn hand_reduction() {
        // g^{-1} i = 0.7 + 0.8 i
        let h = GroupElement::unipotent(0.7) * GroupElement::dilation(0.8);
        let g = h.adjugate();
        assert!((g.base_point().u - 0.7).abs() < 1e-15);
        let (x, gamma) = reduce(&g).unwrap();
        let z = x.base_point();
        assert!((z.u - 0.3 / 0.73).abs() < 1e-12, "{z:?}");
        assert!((z.v - 0.8 / 0.73).abs() < 1e-12);
        assert!((z.u - 0.411).abs() < 1e-3 && (z.v - 1.096).abs() < 1e-3);
        assert_eq!(gamma.det(), 1);
        assert_close(x * gamma.inverse(), g, 1e-12);
    }

    #[test]
    fn reduction_is_idempotent() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..1000 {
            let x = haar_sample(&mut rng).unwrap();
            let (y, gamma) = reduce(&x).unwrap();
            assert_eq!(gamma, LatticeElement::IDENTITY, "{x:?}");
            assert_eq!(y, x);
        }
    }

    #[test]
    fn reduction_fault_on_degenerate_input() {
        assert!(matches!(reduce(&GroupElement::new(2.0, 0.0, 0.0, 2.0)), Err(Error::ReductionFault(_))));
        assert!(reduce(&GroupElement::new(f64::NAN, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn angle_map_hand_values() {
        assert_eq!(angle_map_value(&GroupElement::IDENTITY, [1.0, 0.0]), [0.0, 0.0]);
        let v = angle_map_value(&GroupElement::dilation(4.0), [1.0, 0.0]);
        assert!((v[0] - 0.5).abs() < 1e-15 && v[1] == 0.0);
        let v = angle_map_value(&GroupElement::unipotent(0.3), [0.0, 1.0]);
        assert!((v[0] - 0.7).abs() < 1e-15 && v[1] == 0.0);
    }

    #[test]
    fn vertical_rotation() {
        let s = SkewState::new(GroupElement::IDENTITY, [0.1, 0.6]).unwrap();
        assert_eq!(vertical_step(&s, [0.0, 0.0]), s);
        let mut t = s;
        for _ in 0..4 {
            t = vertical_step(&t, [0.25, 0.0]);
        }
        assert!((t.vbar[0] - 0.1).abs() < 1e-15 && t.vbar[1] == 0.6);
        let mut rng = stream_rng(3, 0);
        let s = SkewState::random(&mut rng).unwrap();
        let beta = [0.37, 0.0];
        let f = angle_map_value(&s.x, beta);
        let mut t = s;
        for _ in 0..25 {
            t = vertical_step(&t, beta);
        }
        for j in 0..2 {
            let want = wrap(s.vbar[j] + 25.0 * f[j]);
            let d = (t.vbar[j] - want).abs();
            assert!(d.min(1.0 - d) < 1e-12);
        }
    }

    #[test]
    fn trivial_cocycle_step() {
        let cfg = ModelConfig { t0: 1e-3, alpha: [0.0, 0.0], ..Default::default() };
        let x = GroupElement::dilation(2.0).adjugate();
        let s = SkewState::new(x, [0.2, 0.9]).unwrap();
        let t = skew_step(&s, &cfg).unwrap();
        assert!((t.vbar[0] - 0.2).abs() < 1e-12 && (t.vbar[1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn frozen_dynamics() {
        let cfg = ModelConfig { t0: 0.0, alpha: [0.0, 0.0], ..Default::default() };
        let s = SkewState::new(GroupElement::IDENTITY, [0.3, 0.4]).unwrap();
        let avg = birkhoff_average(&s, &cfg, 100, [1, 0]).unwrap();
        assert!((avg - Complex64::cis(TAU * 0.3)).norm() < 1e-12);
        assert_eq!(birkhoff_average(&s, &cfg, 10, [0, 0]).unwrap(), Complex64::new(1.0, 0.0));
        assert!(birkhoff_average(&s, &cfg, 0, [1, 0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ModelConfig::default().validate().is_ok());
        assert!(ModelConfig { t0: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelConfig { beta: [1.0, 1.0], ..Default::default() }.validate().is_err());
        assert!(ModelConfig { beta: [0.0, 0.0], ..Default::default() }.validate().is_err());
        assert!((ModelConfig::default().kappa() - 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn induced_grid_with_identity_node() {
        let (grid, f) = induced_angle_grid_from(vec![GroupElement::IDENTITY], [1.0, 0.0]).unwrap();
        assert_eq!(grid.len(), 1);
        assert!(!grid.has_circle());
        assert_eq!(f.evaluate(&grid, 0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn correlation_at_lag_zero() {
        let cfg = ModelConfig::default();
        let c = correlation(&cfg, [1, 0], [1, 0], 0, 2000).unwrap();
        assert!((c.value() - 1.0).norm() < 1e-12);
        let c = correlation(&cfg, [0, 0], [0, 0], 5, 100).unwrap();
        assert!((c.value() - 1.0).norm() < 1e-12);
    }
}
