//! Oracles shared by the integration tests. Nothing here calls into the
//! code paths under test except for plain data accessors.
#![allow(dead_code)]

use std::f64::consts::TAU;

use fiberwise::{GroupElement, ModelConfig, SkewState};
use num_complex::Complex64;
use twofloat::TwoFloat;

/// `|ν^(1)|` for the middle-thirds Cantor measure, from the product
/// `Π_{j<=40} cos(2π / 3^j)`, evaluated before the build.
pub const CANTOR_MODULUS_ONE: f64 = 0.3714373567087654;

/// `25 · max |J_{n+25m}(25 m / 2)|` over `|n| <= 3`, `1 <= |m| <= 3`: the
/// smooth-circle decay constant at `eps = 1/2`, evaluated before the build.
pub const SMOOTH_DECAY_CONSTANT: f64 = 0.0012306580797133634;

/// Haar moments on the modular fundamental domain.
pub const MEAN_INVERSE_HEIGHT: f64 = 0.5245487288490898;
pub const PROB_HEIGHT_ABOVE_TWO: f64 = 0.477464829275686;

pub fn cantor_product(m: i64, terms: u32) -> f64 {
    (1..=terms).map(|j| (TAU * m as f64 / 3f64.powi(j as i32)).cos()).product::<f64>().abs()
}

/// Circular distance on `R / Z`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Composite Simpson rule for `∫_0^1 e^{2πi (n x + m g(x))} dx` on `2 * half` panels.
pub fn simpson_coefficient(g: impl Fn(f64) -> f64, n: i64, m: i64, half: usize) -> Complex64 {
    let panels = 2 * half;
    let h = 1.0 / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=panels {
        let x = j as f64 * h;
        let w = if j == 0 || j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let phase = (n as f64 * x + m as f64 * g(x)).rem_euclid(1.0);
        acc += Complex64::cis(TAU * phase) * w;
    }
    acc * (h / 3.0)
}

pub fn smooth_circle(eps: f64) -> impl Fn(f64) -> f64 {
    move |x| x + eps / TAU * (TAU * x).sin()
}

type Dd = TwoFloat;

fn dd(x: f64) -> Dd {
    Dd::from(x)
}

#[derive(Clone, Copy)]
struct DdMat([[Dd; 2]; 2]);

impl DdMat {
    fn from(g: &GroupElement) -> Self {
        let m = g.0;
        Self([[dd(m[0][0]), dd(m[0][1])], [dd(m[1][0]), dd(m[1][1])]])
    }

    fn mul(&self, o: &Self) -> Self {
        let (a, b) = (self.0, o.0);
        let e = |r: usize, c: usize| a[r][0] * b[0][c] + a[r][1] * b[1][c];
        Self([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }

    fn apply(&self, v: [Dd; 2]) -> [Dd; 2] {
        let a = self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    fn adjugate(&self) -> Self {
        let a = self.0;
        Self([[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]])
    }
}

fn frac(x: Dd) -> f64 {
    let f = x - x.floor();
    (f.hi() + f.lo()).rem_euclid(1.0)
}

/// Result of the one-shot lifted computation of `(a, alpha)^k` applied to
/// `s0`, expressed in the representative `x_k` supplied by the caller.
pub struct LiftedOracle {
    /// `x_k^{-1} a^k x_0` should be an integer matrix; largest distance to one.
    pub integrality: f64,
    pub vbar: [f64; 2],
}

/// Extended-precision oracle: lift `(x_0, vbar_0)` to `(x_0, x_0 vbar_0)`,
/// apply `(a^k, Σ_{j<k} ρ(a)^j alpha)` directly, and read the fiber
/// coordinate back as `x_k^{-1} w_k mod Z^2`.
pub fn lifted_oracle(s0: &SkewState, cfg: &ModelConfig, k: u32, x_k: &GroupElement) -> LiftedOracle {
    let up = (dd(cfg.t0) * dd(k as f64)).exp();
    let down = dd(1.0) / up;
    let x0 = DdMat::from(&s0.x);
    let ak = DdMat([[up, dd(0.0)], [dd(0.0), down]]);
    let g = ak.mul(&x0);
    let mut w = x0.apply([dd(s0.vbar[0]), dd(s0.vbar[1])]);
    w = [w[0] * up, w[1] * down];
    let (e, ei) = (dd(cfg.t0).exp(), dd(1.0) / dd(cfg.t0).exp());
    let (mut p, mut q) = (dd(1.0), dd(1.0));
    for _ in 0..k {
        w[0] += p * dd(cfg.alpha[0]);
        w[1] += q * dd(cfg.alpha[1]);
        p *= e;
        q *= ei;
    }
    let xinv = DdMat::from(x_k).adjugate();
    let gamma = xinv.mul(&g);
    let integrality = gamma
        .0
        .iter()
        .flatten()
        .map(|c| {
            let r = c.hi() + c.lo();
            (r - r.round()).abs()
        })
        .fold(0.0, f64::max);
    let v = xinv.apply(w);
    LiftedOracle { integrality, vbar: [frac(v[0]), frac(v[1])] }
}

/// Independent Gauss reduction of `z` in the upper half plane:
/// translate into `|u| <= 1/2`, invert while `|z| < 1`.
pub fn reduce_point(mut u: f64, mut v: f64) -> (f64, f64) {
    for _ in 0..10_000 {
        u -= u.round();
        let r = u * u + v * v;
        if r >= 1.0 {
            break;
        }
        u = -u / r;
        v /= r;
    }
    (u, v)
}

/// `2^{-(|n| + |m|)}` summed over `|n| <= nm`, `0 < |m| <= mm` with `n = -m k`:
/// the truncated distance of `D_{k·id}` to the fibered Haar measure.
pub fn identity_orbit_distance(k: i64, nm: i64, mm: i64) -> f64 {
    let mut d = 0.0;
    for m in -mm..=mm {
        if m != 0 && (m * k).abs() <= nm {
            d += 2f64.powi(-((m * k).abs() + m.abs()) as i32);
        }
    }
    d
}
