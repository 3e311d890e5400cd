//! Product quadrature over the Bloch sphere.
//!
//! Nodes are Gauss-Legendre in `cos θ` and equally spaced in `φ`. With `n`
//! polar nodes and `m` azimuthal nodes the rule integrates exactly every
//! polynomial of degree `< 2n` in `cos θ` times trigonometric polynomials of
//! order `< m` in `φ`, which covers all moments of amplitudes appearing in
//! this crate.

use std::f64::consts::PI;

use crate::statekit::BlochAngles;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Weighted points on the Bloch sphere; weights sum to one.
#[derive(Debug, Clone)]
pub struct BlochGrid {
    points: Vec<(BlochAngles, f64)>,
}

impl BlochGrid {
    pub fn new(polar: usize, azimuthal: usize) -> Self {
        assert!(azimuthal >= 1);
        let mut points = Vec::with_capacity(polar * azimuthal);
        for (x, w) in gauss_legendre(polar) {
            for k in 0..azimuthal {
                let angles = BlochAngles {
                    theta: x.clamp(-1.0, 1.0).acos(),
                    phi: 2.0 * PI * k as f64 / azimuthal as f64,
                };
                points.push((angles, w / 2.0 / azimuthal as f64));
            }
        }
        Self { points }
    }

    pub fn points(&self) -> &[(BlochAngles, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
