//! Smooth implicit domains `Ω = {ρ < 0}` and boundary convexity.
//!
//! A [`Domain`] carries its defining function as a parsed expression, so every Hessian is
//! exact to roundoff through nested dual numbers. Ball and ellipsoid constructors just
//! write the expression for you.

mod convexity;
mod defining;
mod smooth_max;

pub use convexity::{
    boundary_sweep, strict_convexity_at, ConvexityReport, Verdict, PERSISTENCE_DOUBLINGS,
};
pub use defining::{
    construct_global_defining, DefiningConfig, GlobalDefining, GlobalDefiningReport,
};
pub use smooth_max::{smooth_max, SmoothMax};

use serde::{Deserialize, Serialize};

use crate::config::{from_json_str, from_value};
use crate::error::{Error, Result};
use crate::expr::{self, Derivatives, Expr};
use crate::sampling::{gaussian_vec, rng, DEFAULT_SEED};
use crate::symmat::SymMatrix;

/// Smallest gradient norm accepted at a boundary point.
pub const MIN_GRADIENT: f64 = 1e-6;
/// Residual `|ρ|` at which boundary projection stops.
pub const PROJECTION_TOL: f64 = 1e-10;
const PROJECTION_STEPS: usize = 100;
/// Boundary sample count used when callers do not choose one.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 512;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }
}

/// Smooth bounded domain `{ρ < 0}` with a stored interior witness.
#[derive(Debug, Clone)]
pub struct Domain {
    n: usize,
    rho: Expr,
    bbox: BoundingBox,
    interior: Vec<f64>,
}

fn fmt_num(v: f64) -> String {
    format!("({v:?})")
}

impl Domain {
    /// Domain from a C² expression; checks dimensions, the box, and `ρ(interior) < 0`.
    pub fn from_expr(rho: Expr, n: usize, bbox: BoundingBox, interior: Vec<f64>) -> Result<Domain> {
        crate::cones::check_dim(n)?;
        rho.require_smooth()?;
        if rho.arity() > n {
            return Err(Error::InvalidParameter(format!(
                "defining function uses x{} but the domain has dimension {n}",
                rho.arity()
            )));
        }
        if bbox.lo.len() != n || bbox.hi.len() != n || interior.len() != n {
            return Err(Error::InvalidParameter(format!(
                "bounding box and interior point must have {n} coordinates"
            )));
        }
        if bbox.lo.iter().zip(&bbox.hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidParameter("bounding box has an empty side".into()));
        }
        if !bbox.contains(&interior) {
            return Err(Error::InvalidParameter("interior witness lies outside the box".into()));
        }
        let v = rho.eval(&interior)?;
        if !(v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rho at the interior witness is {v}, expected a negative value"
            )));
        }
        Ok(Domain {
            n,
            rho,
            bbox,
            interior,
        })
    }

    /// Ball `½(|x − c|² − r²) < 0` in the box of half-width `1.25·r`.
    pub fn ball(center: &[f64], radius: f64) -> Result<Domain> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        let terms: Vec<String> = center
            .iter()
            .enumerate()
            .map(|(i, c)| format!("(x{} - {})^2", i + 1, fmt_num(*c)))
            .collect();
        let src = format!("0.5 * ({} - {})", terms.join(" + "), fmt_num(radius * radius));
        let pad = 1.25 * radius;
        Domain::from_expr(
            expr::parse(&src)?,
            center.len(),
            BoundingBox {
                lo: center.iter().map(|c| c - pad).collect(),
                hi: center.iter().map(|c| c + pad).collect(),
            },
            center.to_vec(),
        )
    }

    /// Unit ball centred at the origin.
    pub fn unit_ball(n: usize) -> Result<Domain> {
        Domain::ball(&vec![0.0; n], 1.0)
    }

    /// Ellipsoid `Σ (xᵢ − cᵢ)²/aᵢ² − 1 < 0` in the box of half-widths `1.25·aᵢ`.
    pub fn ellipsoid(center: &[f64], semi_axes: &[f64]) -> Result<Domain> {
        if center.len() != semi_axes.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: semi_axes.len(),
            });
        }
        if semi_axes.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::InvalidParameter("semi-axes must be positive".into()));
        }
        let terms: Vec<String> = center
            .iter()
            .zip(semi_axes)
            .enumerate()
            .map(|(i, (c, a))| format!("(x{} - {})^2 / {}", i + 1, fmt_num(*c), fmt_num(a * a)))
            .collect();
        let src = format!("{} - 1", terms.join(" + "));
        Domain::from_expr(
            expr::parse(&src)?,
            center.len(),
            BoundingBox {
                lo: center.iter().zip(semi_axes).map(|(c, a)| c - 1.25 * a).collect(),
                hi: center.iter().zip(semi_axes).map(|(c, a)| c + 1.25 * a).collect(),
            },
            center.to_vec(),
        )
    }

    /// Same domain with defining function `u·ρ`; `u` must be positive on the box.
    pub fn with_factor(&self, u: &str) -> Result<Domain> {
        let u = expr::parse(u)?;
        let src = format!("({u}) * ({})", self.rho);
        Domain::from_expr(expr::parse(&src)?, self.n, self.bbox.clone(), self.interior.clone())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &Expr {
        &self.rho
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn interior_point(&self) -> &[f64] {
        &self.interior
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.rho.eval(x)?)
    }

    pub fn derivatives(&self, x: &[f64]) -> Result<Derivatives> {
        self.check_point(x)?;
        Ok(self.rho.eval_with_derivatives(x)?)
    }

    /// Outward unit normal `∇ρ/|∇ρ|`.
    pub fn unit_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.derivatives(x)?;
        normalized(&d.gradient).ok_or_else(|| Error::VanishingGradient { point: x.to_vec() })
    }

    /// Newton iteration along `∇ρ` until `|ρ| ≤ 1e−10`.
    pub fn boundary_project(&self, x0: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x0)?;
        let max_step = self.bbox.diameter();
        let mut x = x0.to_vec();
        let mut residual = f64::INFINITY;
        for _ in 0..=PROJECTION_STEPS {
            let d = self.rho.eval_with_derivatives(&x)?;
            residual = d.value.abs();
            if residual <= PROJECTION_TOL {
                return Ok(x);
            }
            let g2: f64 = d.gradient.iter().map(|g| g * g).sum();
            if g2.sqrt() < MIN_GRADIENT {
                break;
            }
            let mut step = d.value / g2;
            let len = step.abs() * g2.sqrt();
            if len > max_step {
                step *= max_step / len;
            }
            x.iter_mut().zip(&d.gradient).for_each(|(xi, gi)| *xi -= step * gi);
        }
        Err(Error::ProjectionFailed {
            start: x0.to_vec(),
            residual,
        })
    }

    /// First crossing of `∂Ω` along the ray from the interior witness in direction `dir`.
    pub fn ray_boundary_point(&self, dir: &[f64]) -> Result<Vec<f64>> {
        self.check_point(dir)?;
        let dir = normalized(dir).ok_or_else(|| Error::InvalidParameter("zero direction".into()))?;
        let at = |t: f64| -> Vec<f64> {
            self.interior.iter().zip(&dir).map(|(c, d)| c + t * d).collect()
        };
        let t_max = self.bbox.diameter();
        let steps = 256;
        let mut lo = 0.0;
        let mut hi = None;
        for k in 1..=steps {
            let t = t_max * k as f64 / steps as f64;
            if self.rho.eval(&at(t))? >= 0.0 {
                hi = Some(t);
                break;
            }
            lo = t;
        }
        let mut hi = hi.ok_or_else(|| {
            Error::InvalidParameter(format!("no boundary crossing along direction {dir:?}"))
        })?;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.rho.eval(&at(mid))? >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut x = at(hi);
        // keep the start inside the box so projection can polish it
        for i in 0..self.n {
            x[i] = x[i].clamp(self.bbox.lo[i], self.bbox.hi[i]);
        }
        self.boundary_project(&x)
    }

    /// Boundary points from evenly spread directions (golden-angle on circles, Fibonacci
    /// sphere in 3D, seeded Gaussian directions otherwise), each pushed to `∂Ω`.
    pub fn boundary_samples(&self, count: usize, seed: Option<u64>) -> Result<Vec<Vec<f64>>> {
        directions(self.n, count, seed.unwrap_or(DEFAULT_SEED))
            .iter()
            .map(|d| self.ray_boundary_point(d))
            .collect()
    }

    /// Crossings along `±eᵢ` from the interior witness.
    pub fn axis_boundary_points(&self) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(2 * self.n);
        for i in 0..self.n {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; self.n];
                e[i] = s;
                out.push(self.ray_boundary_point(&e)?);
            }
        }
        Ok(out)
    }

    /// Lattice points of the box with `ρ ≤ 0`, `per_axis` points per side.
    pub fn interior_grid(&self, per_axis: usize) -> Result<Vec<Vec<f64>>> {
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(self.n as u32);
        let mut out = Vec::new();
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<f64> = (0..self.n)
                .map(|i| {
                    let k = rem % per_axis;
                    rem /= per_axis;
                    let s = k as f64 / (per_axis - 1) as f64;
                    self.bbox.lo[i] + s * (self.bbox.hi[i] - self.bbox.lo[i])
                })
                .collect();
            if self.rho.eval(&x)? <= 0.0 {
                out.push(x);
            }
        }
        Ok(out)
    }

    /// Second fundamental form `Hess ρ|_T / |∇ρ|` with respect to the inward normal.
    ///
    /// The tangent frame is Gram–Schmidt on the coordinate axes, least normal-aligned first.
    pub fn second_fundamental_form(&self, x: &[f64]) -> Result<SecondFundamentalForm> {
        let d = self.derivatives(x)?;
        let g = d.gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
        if g < MIN_GRADIENT {
            return Err(Error::VanishingGradient { point: x.to_vec() });
        }
        let normal: Vec<f64> = d.gradient.iter().map(|v| v / g).collect();
        let frame = tangent_frame(&normal);
        let ii = d.hessian.restrict(&frame)?.scaled(1.0 / g);
        Ok(SecondFundamentalForm { ii, frame, normal })
    }
}

#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    /// Matrix of the form in `frame`, size `n − 1`.
    pub ii: SymMatrix,
    pub frame: Vec<Vec<f64>>,
    /// Outward unit normal.
    pub normal: Vec<f64>,
}

pub(crate) fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm >= MIN_GRADIENT && norm.is_finite()).then(|| v.iter().map(|x| x / norm).collect())
}

/// Orthonormal basis of `normal⊥`.
pub(crate) fn tangent_frame(normal: &[f64]) -> Vec<Vec<f64>> {
    let n = normal.len();
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| normal[a].abs().total_cmp(&normal[b].abs()));
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for &i in &axes {
        if frame.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for _ in 0..2 {
            for b in std::iter::once(normal).chain(frame.iter().map(Vec::as_slice)) {
                let dot: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= dot * bi);
            }
        }
        if let Some(u) = normalized(&v) {
            frame.push(u);
        }
    }
    frame
}

fn directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    match n {
        1 => (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => (0..count)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let a = golden * k as f64;
                vec![r * a.cos(), r * a.sin(), z]
            })
            .collect(),
        _ => {
            let mut r = rng(seed);
            (0..count)
                .map(|_| loop {
                    let v = gaussian_vec(&mut r, n);
                    if let Some(u) = normalized(&v) {
                        break u;
                    }
                })
                .collect()
        }
    }
}

#[derive(Deserialize)]
struct RawDomainSpec {
    kind: String,
    #[serde(default)]
    params: serde_json::Value,
    #[serde(default)]
    expr: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallParams {
    #[serde(default)]
    center: Option<Vec<f64>>,
    #[serde(default)]
    dim: Option<usize>,
    #[serde(default = "one")]
    radius: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipsoidParams {
    #[serde(default)]
    center: Option<Vec<f64>>,
    semi_axes: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExprParams {
    dim: usize,
    bounding_box: BoundingBox,
    interior: Vec<f64>,
}

/// Parses `{"kind": "ball"|"ellipsoid"|"expr", "params": {...}, "expr": "..."}`.
pub fn domain_from_json(src: &str) -> Result<Domain> {
    let raw: RawDomainSpec = from_json_str(src)?;
    let at = |pointer: &str, e: Error| match e {
        Error::InvalidParameter(message) => Error::Config {
            pointer: pointer.into(),
            message,
        },
        Error::Expr(err) => Error::Config {
            pointer: pointer.into(),
            message: err.to_string(),
        },
        other => other,
    };
    match raw.kind.as_str() {
        "ball" => {
            let p: BallParams = from_value(raw.params, "/params")?;
            let center = match (p.center, p.dim) {
                (Some(c), _) => c,
                (None, Some(n)) => vec![0.0; n],
                (None, None) => {
                    return Err(Error::Config {
                        pointer: "/params".into(),
                        message: "ball needs 'center' or 'dim'".into(),
                    })
                }
            };
            Domain::ball(&center, p.radius).map_err(|e| at("/params", e))
        }
        "ellipsoid" => {
            let p: EllipsoidParams = from_value(raw.params, "/params")?;
            let center = p.center.unwrap_or_else(|| vec![0.0; p.semi_axes.len()]);
            Domain::ellipsoid(&center, &p.semi_axes).map_err(|e| at("/params", e))
        }
        "expr" => {
            let src = raw.expr.ok_or_else(|| Error::Config {
                pointer: "/expr".into(),
                message: "missing defining expression".into(),
            })?;
            let e = expr::parse(&src).map_err(|e| at("/expr", e.into()))?;
            e.require_smooth().map_err(|e| at("/expr", e.into()))?;
            let p: ExprParams = from_value(raw.params, "/params")?;
            Domain::from_expr(e, p.dim, p.bounding_box, p.interior).map_err(|e| at("/expr", e))
        }
        other => Err(Error::Config {
            pointer: "/kind".into(),
            message: format!("unknown domain kind '{other}', expected ball, ellipsoid or expr"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse() -> Domain {
        Domain::ellipsoid(&[0.0, 0.0], &[2.0, 1.0]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        assert!(close(&ball.boundary_project(&[2.0, 0.0]).unwrap(), &[1.0, 0.0], 1e-10));
        assert_eq!(ball.boundary_project(&[0.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(close(&ellipse().boundary_project(&[0.0, 3.0]).unwrap(), &[0.0, 1.0], 1e-10));
    }

    #[test]
    fn projection_reports_nonconvergence() {
        // Newton cannot leave a critical point of ρ
        let d = Domain::from_expr(
            expr::parse("x1^2 - 1").unwrap(),
            1,
            BoundingBox {
                lo: vec![-2.0],
                hi: vec![2.0],
            },
            vec![0.0],
        )
        .unwrap();
        assert!(matches!(d.boundary_project(&[0.0]), Err(Error::ProjectionFailed { .. })));
    }

    #[test]
    fn sphere_form_is_inverse_radius() {
        for r in [0.5, 1.0, 3.0] {
            let d = Domain::ball(&[0.0, 0.0, 0.0], r).unwrap();
            for x in d.boundary_samples(20, None).unwrap() {
                let s = d.second_fundamental_form(&x).unwrap();
                let want = SymMatrix::scalar(2, 1.0 / r);
                assert!((&s.ii - &want).max_abs() < 1e-9, "{:?}", s.ii);
            }
        }
    }

    #[test]
    fn plane_has_zero_form() {
        let d = Domain::from_expr(
            expr::parse("x2").unwrap(),
            2,
            BoundingBox {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            vec![0.0, -0.5],
        )
        .unwrap();
        let s = d.second_fundamental_form(&[0.3, 0.0]).unwrap();
        assert_eq!(s.ii.max_abs(), 0.0);
    }

    #[test]
    fn ellipse_curvature_matches_plane_curve_formula() {
        let d = ellipse();
        let s = d.second_fundamental_form(&[2.0, 0.0]).unwrap();
        assert!((s.ii.get(0, 0) - 2.0).abs() < 1e-12);
        for x in d.boundary_samples(64, None).unwrap() {
            let g = d.derivatives(&x).unwrap();
            let (px, py) = (g.gradient[0], g.gradient[1]);
            let h = &g.hessian;
            let kappa = (h.get(0, 0) * py * py - 2.0 * h.get(0, 1) * px * py + h.get(1, 1) * px * px)
                / (px * px + py * py).powf(1.5);
            let ii = d.second_fundamental_form(&x).unwrap().ii.get(0, 0);
            assert!((ii - kappa).abs() < 1e-9, "{ii} vs {kappa}");
        }
    }

    #[test]
    fn form_is_scale_covariant() {
        let d = ellipse();
        let d3 = d.with_factor("3").unwrap();
        for x in d.boundary_samples(16, None).unwrap() {
            let a = d.second_fundamental_form(&x).unwrap().ii;
            let b = d3.second_fundamental_form(&x).unwrap().ii;
            assert!((&a - &b).max_abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_samples_lie_on_boundary() {
        let d = Domain::ellipsoid(&[0.5, 0.0, -0.2], &[1.0, 2.0, 0.5]).unwrap();
        let pts = d.boundary_samples(100, None).unwrap();
        assert_eq!(pts.len(), 100);
        for x in pts {
            assert!(d.value(&x).unwrap().abs() <= PROJECTION_TOL);
        }
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let mut r = rng(5);
        for n in 2..6 {
            let nu = normalized(&gaussian_vec(&mut r, n)).unwrap();
            let f = tangent_frame(&nu);
            assert_eq!(f.len(), n - 1);
            assert!(crate::symmat::gram_deviation(&f) < 1e-12);
            for v in &f {
                let dot: f64 = v.iter().zip(&nu).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_specs() {
        let d = domain_from_json(r#"{"kind": "ball", "params": {"dim": 3}}"#).unwrap();
        assert_eq!(d.dim(), 3);
        let e = domain_from_json(
            r#"{"kind": "expr", "expr": "x2^2 + (x1^2 - 1)^2 - 1.2",
                "params": {"dim": 2, "bounding_box": {"lo": [-2, -1.5], "hi": [2, 1.5]}, "interior": [0, 0]}}"#,
        )
        .unwrap();
        assert!(e.value(&[0.0, 0.0]).unwrap() < 0.0);
        let bad = domain_from_json(r#"{"kind": "expr", "expr": "abs(x1) - 1", "params": {}}"#);
        assert!(matches!(bad, Err(Error::Config { ref pointer, .. }) if pointer == "/expr"), "{bad:?}");
        let bad = domain_from_json(r#"{"kind": "ellipsoid", "params": {"semi_axes": [1, "a"]}}"#);
        assert!(matches!(bad, Err(Error::Config { ref pointer, .. }) if pointer == "/params/semi_axes/1"));
        let bad = domain_from_json(r#"{"kind": "torus"}"#);
        assert!(matches!(bad, Err(Error::Config { ref pointer, .. }) if pointer == "/kind"));
    }

    #[test]
    fn rejects_nonsmooth_or_exterior_witness() {
        let b = BoundingBox {
            lo: vec![-2.0, -2.0],
            hi: vec![2.0, 2.0],
        };
        assert!(Domain::from_expr(expr::parse("max(x1, x2)").unwrap(), 2, b.clone(), vec![-1.0, -1.0]).is_err());
        assert!(Domain::from_expr(expr::parse("x1^2 + x2^2 - 1").unwrap(), 2, b, vec![1.5, 0.0]).is_err());
    }
}
