//! Conformal maps of the disc and of the upper half-plane built from exact
//! closed forms: Möbius automorphisms, radial slit maps and vertical slit
//! maps, plus their compositions.

use crate::error::{invalid, Result};
use crate::geometry::{segments_intersect, Point};

const I: Point = Point::new(0.0, 1.0);

/// Square root of `u` on the branch with nonnegative imaginary part. When
/// the root is real its sign follows `side`, so real points keep the side of
/// the slit they started on.
#[inline]
pub(crate) fn upper_sqrt(u: Point, side: f64) -> Point {
    // principal root without the overflow guards of `Complex::sqrt`
    let r = (u.re * u.re + u.im * u.im).sqrt();
    let s = if u.re >= 0.0 {
        let re = ((r + u.re) * 0.5).sqrt();
        if re == 0.0 {
            Point::new(0.0, 0.0)
        } else {
            Point::new(re, u.im / (2.0 * re))
        }
    } else {
        let im = ((r - u.re) * 0.5).sqrt().copysign(u.im);
        Point::new(u.im / (2.0 * im), im)
    };
    if s.im < 0.0 || (s.im == 0.0 && s.re * side < 0.0) {
        -s
    } else {
        s
    }
}

/// Disc to half-plane, `1 -> 0`, `0 -> i`, `-1 -> infinity`.
fn cayley(w: Point) -> Point {
    I * (1.0 - w) / (1.0 + w)
}

fn cayley_inv(z: Point) -> Point {
    (I - z) / (I + z)
}

/// Parameters of the radial slit map of capacity `t` toward `1`: the
/// half-plane picture is `z -> sqrt(lambda^2 z^2 - s^2)` with
/// `lambda^2 = e^-t` and `s^2 = 1 - e^-t`.
#[derive(Debug, Clone, Copy)]
struct SlitParams {
    lambda2: f64,
    s2: f64,
}

impl SlitParams {
    fn new(t: f64) -> Self {
        Self { lambda2: (-t).exp(), s2: -(-t).exp_m1() }
    }

    /// Length of the slit `[1 - x_t, 1)`.
    fn x(&self) -> f64 {
        let s = self.s2.sqrt();
        2.0 * s / (1.0 + s)
    }

    fn eval(&self, w: Point) -> Point {
        let z = cayley(w);
        cayley_inv(upper_sqrt(z * z * self.lambda2 - self.s2, z.re))
    }

    fn inverse(&self, w: Point) -> Point {
        let z = cayley(w);
        cayley_inv(upper_sqrt((z * z + self.s2) / self.lambda2, z.re))
    }

    fn derivative(&self, w: Point) -> Point {
        let z = cayley(w);
        let f = upper_sqrt(z * z * self.lambda2 - self.s2, z.re);
        let dc = -2.0 * I / ((1.0 + w) * (1.0 + w));
        let dci = -2.0 * I / ((I + f) * (I + f));
        dci * (z * self.lambda2 / f) * dc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConformalMap {
    /// `z -> e^{i theta} (z - a) / (1 - conj(a) z)`.
    Mobius { a: Point, theta: f64 },
    /// Disc onto the disc minus the radial slit `[(1 - x_t) d, d)`, fixing 0
    /// with derivative `e^-t` there.
    RadialSlit { t: f64, direction: Point },
    /// `maps[0] ∘ maps[1] ∘ ...`; the last map is applied first.
    Composition(Vec<ConformalMap>),
    /// Half-plane onto the half-plane minus `[0, 2i sqrt(dt)]`:
    /// `w -> sqrt(w^2 - 4 dt)`.
    HalfPlaneSlit { dt: f64 },
}

pub fn mobius_disc(a: Point, theta: f64) -> Result<ConformalMap> {
    if !(a.norm() < 1.0) || !theta.is_finite() {
        return Err(invalid("Möbius parameter must lie in the open unit disc"));
    }
    Ok(ConformalMap::Mobius { a, theta })
}

pub fn radial_slit_map(t: f64, z_boundary: Point) -> Result<ConformalMap> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid("slit capacity must be positive"));
    }
    let n = z_boundary.norm();
    if !((n - 1.0).abs() < 1e-9) {
        return Err(invalid("slit direction must have unit modulus"));
    }
    Ok(ConformalMap::RadialSlit { t, direction: z_boundary / n })
}

pub fn half_plane_slit(dt: f64) -> Result<ConformalMap> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("slit time must be positive"));
    }
    Ok(ConformalMap::HalfPlaneSlit { dt })
}

impl ConformalMap {
    pub fn identity() -> Self {
        ConformalMap::Mobius { a: Point::new(0.0, 0.0), theta: 0.0 }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConformalMap::Mobius { .. } => "mobius-disc",
            ConformalMap::RadialSlit { .. } => "radial-slit",
            ConformalMap::Composition(_) => "composition",
            ConformalMap::HalfPlaneSlit { .. } => "half-plane-elementary",
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ConformalMap) -> ConformalMap {
        let mut maps = Vec::new();
        for m in [self, inner] {
            match m {
                ConformalMap::Composition(ms) => maps.extend(ms.iter().cloned()),
                other => maps.push(other.clone()),
            }
        }
        ConformalMap::Composition(maps)
    }

    pub fn eval(&self, z: Point) -> Point {
        match self {
            &ConformalMap::Mobius { a, theta } => Point::from_polar(1.0, theta) * (z - a) / (1.0 - a.conj() * z),
            &ConformalMap::RadialSlit { t, direction } => direction * SlitParams::new(t).eval(z * direction.conj()),
            ConformalMap::Composition(ms) => ms.iter().rev().fold(z, |w, m| m.eval(w)),
            &ConformalMap::HalfPlaneSlit { dt } => upper_sqrt(z * z - 4.0 * dt, z.re),
        }
    }

    /// Inverse on the image of the map.
    pub fn inverse(&self, w: Point) -> Point {
        match self {
            &ConformalMap::Mobius { a, theta } => {
                let u = w * Point::from_polar(1.0, -theta);
                (u + a) / (1.0 + a.conj() * u)
            }
            &ConformalMap::RadialSlit { t, direction } => direction * SlitParams::new(t).inverse(w * direction.conj()),
            ConformalMap::Composition(ms) => ms.iter().fold(w, |z, m| m.inverse(z)),
            &ConformalMap::HalfPlaneSlit { dt } => upper_sqrt(w * w + 4.0 * dt, w.re),
        }
    }

    pub fn derivative(&self, z: Point) -> Point {
        match self {
            &ConformalMap::Mobius { a, theta } => {
                let d = 1.0 - a.conj() * z;
                Point::from_polar(1.0, theta) * (1.0 - a.norm_sqr()) / (d * d)
            }
            &ConformalMap::RadialSlit { t, direction } => SlitParams::new(t).derivative(z * direction.conj()),
            ConformalMap::Composition(ms) => {
                let mut w = z;
                let mut d = Point::new(1.0, 0.0);
                for m in ms.iter().rev() {
                    d *= m.derivative(w);
                    w = m.eval(w);
                }
                d
            }
            &ConformalMap::HalfPlaneSlit { dt } => z / upper_sqrt(z * z - 4.0 * dt, z.re),
        }
    }

    /// `Φ'(0)` for disc maps fixing the origin with positive derivative.
    pub fn derivative_at_zero(&self) -> Option<f64> {
        match self {
            ConformalMap::HalfPlaneSlit { .. } => None,
            ConformalMap::RadialSlit { t, .. } => Some((-t).exp()),
            ConformalMap::Composition(ms) if ms.iter().all(|m| m.derivative_at_zero().is_some()) => {
                Some(ms.iter().map(|m| m.derivative_at_zero().unwrap_or(1.0)).product())
            }
            _ => {
                let zero = Point::new(0.0, 0.0);
                let d = self.derivative(zero);
                let fixes = self.eval(zero).norm() < 1e-12;
                (fixes && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re).then_some(d.re)
            }
        }
    }

    /// The segment removed from the domain by a single slit map.
    pub fn slit(&self) -> Option<(Point, Point)> {
        match *self {
            ConformalMap::RadialSlit { t, direction } => Some((direction * (1.0 - SlitParams::new(t).x()), direction)),
            ConformalMap::HalfPlaneSlit { dt } => Some((Point::new(0.0, 0.0), Point::new(0.0, 2.0 * dt.sqrt()))),
            _ => None,
        }
    }

    /// Whether a closed polyline in the domain fails to lie in the image of
    /// the map. For a composition `Φ1 ∘ Φ2` the loop must avoid what `Φ1`
    /// removes, and its preimage under `Φ1` must avoid what `Φ2` removes.
    pub fn excludes(&self, polyline: &[Point]) -> bool {
        match self {
            ConformalMap::Mobius { .. } => false,
            ConformalMap::Composition(ms) => {
                let mut pts = polyline.to_vec();
                for (k, m) in ms.iter().enumerate() {
                    if m.excludes(&pts) {
                        return true;
                    }
                    if k + 1 < ms.len() {
                        pts.iter_mut().for_each(|p| *p = m.inverse(*p));
                    }
                }
                false
            }
            single => {
                let Some((a, b)) = single.slit() else { return false };
                let n = polyline.len();
                (0..n).any(|k| segments_intersect(polyline[k], polyline[(k + 1) % n], a, b))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disc_points(radius: f64) -> Vec<Point> {
        let mut pts = Vec::new();
        for i in 0..12 {
            for j in 1..=5 {
                pts.push(Point::from_polar(radius * j as f64 / 5.0, std::f64::consts::TAU * i as f64 / 12.0 + 0.1 * j as f64));
            }
        }
        pts.push(Point::new(0.0, 0.0));
        pts
    }

    #[test]
    fn sqrt_branch() {
        let z = upper_sqrt(Point::new(-4.0, 0.0), 1.0);
        assert!((z - Point::new(0.0, 2.0)).norm() < 1e-15);
        assert!((upper_sqrt(Point::new(-4.0, -0.0), 1.0) - Point::new(0.0, 2.0)).norm() < 1e-15);
        assert_eq!(upper_sqrt(Point::new(4.0, 0.0), -3.0), Point::new(-2.0, 0.0));
        for k in 0..50 {
            let u = Point::from_polar(1.0 + k as f64, 0.37 * k as f64);
            let s = upper_sqrt(u, 1.0);
            assert!(s.im >= 0.0 && (s * s - u).norm() < 1e-12 * u.norm());
        }
    }

    #[test]
    fn mobius_basics() {
        assert!(mobius_disc(Point::new(1.0, 0.0), 0.0).is_err());
        let id = mobius_disc(Point::new(0.0, 0.0), 0.0).unwrap();
        let m = mobius_disc(Point::new(0.3, -0.4), 1.1).unwrap();
        for z in disc_points(0.9) {
            assert_eq!(id.eval(z), z);
            assert!((m.inverse(m.eval(z)) - z).norm() < 1e-14);
        }
        for k in 0..100 {
            let z = Point::from_polar(1.0, std::f64::consts::TAU * k as f64 / 100.0);
            assert!((m.eval(z).norm() - 1.0).abs() < 1e-14);
        }
        assert_eq!(id.derivative_at_zero(), Some(1.0));
        assert_eq!(m.derivative_at_zero(), None);
    }

    #[test]
    fn slit_map_normalization() {
        assert!(radial_slit_map(0.0, Point::new(1.0, 0.0)).is_err());
        assert!(radial_slit_map(0.1, Point::new(2.0, 0.0)).is_err());
        for (t, d) in [(0.3, Point::new(1.0, 0.0)), (1.2, Point::from_polar(1.0, 2.0))] {
            let phi = radial_slit_map(t, d).unwrap();
            assert!(phi.eval(Point::new(0.0, 0.0)).norm() < 1e-15);
            let h = 1e-5;
            let fd = (phi.eval(Point::new(h, 0.0)) - phi.eval(Point::new(-h, 0.0))) / (2.0 * h);
            assert!((fd - Point::new((-t).exp(), 0.0)).norm() < 1e-8, "{fd}");
            assert!((phi.derivative(Point::new(0.0, 0.0)).re - (-t).exp()).abs() < 1e-14);
            // `d` itself goes to the inner end of the slit and the boundary lands on the circle or the slit
            let (base, tip) = phi.slit().unwrap();
            assert!((phi.eval(d) - base).norm() < 1e-12 && (tip - d).norm() < 1e-15);
            for k in 1..50 {
                let w = phi.eval(d * Point::from_polar(1.0, 0.1 + 6.0 * k as f64 / 50.0));
                let on_circle = (w.norm() - 1.0).abs() < 1e-9;
                let on_slit = (w * d.conj()).im.abs() < 1e-9 && (w * d.conj()).re >= base.norm() - 1e-9;
                assert!(on_circle || on_slit, "{w}");
            }
            for z in disc_points(0.9) {
                assert!(phi.eval(z).norm() < 1.0);
                assert!((phi.inverse(phi.eval(z)) - z).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn slit_map_small_capacity_is_near_identity() {
        let phi = radial_slit_map(1e-8, Point::new(0.0, 1.0)).unwrap();
        let sup = disc_points(0.5).into_iter().map(|z| (phi.eval(z) - z).norm()).fold(0.0, f64::max);
        assert!(sup < 1e-6, "{sup}");
    }

    #[test]
    fn slit_semigroup() {
        for d in [Point::new(1.0, 0.0), Point::from_polar(1.0, -0.7)] {
            let (s, t) = (0.25, 0.6);
            let a = radial_slit_map(t, d).unwrap();
            let b = radial_slit_map(s, d).unwrap();
            let ab = radial_slit_map(s + t, d).unwrap();
            let comp = a.compose(&b);
            assert!((comp.derivative_at_zero().unwrap() - (-(s + t)).exp()).abs() < 1e-15);
            for z in disc_points(0.5) {
                assert!((comp.eval(z) - ab.eval(z)).norm() < 1e-6);
                assert!((comp.derivative(z) - ab.derivative(z)).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn half_plane_slit_tip_and_inverse() {
        let m = half_plane_slit(0.25).unwrap();
        assert!((m.eval(Point::new(0.0, 0.0)) - Point::new(0.0, 1.0)).norm() < 1e-15);
        assert!(m.inverse(Point::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(m.inverse(Point::new(0.0, 0.0)), Point::new(1.0, 0.0));
        let z = Point::new(0.3, 0.8);
        assert!((m.inverse(m.eval(z)) - z).norm() < 1e-14);
        assert!(m.excludes(&[Point::new(-0.5, 0.5), Point::new(0.5, 0.5), Point::new(0.0, 2.0)]));
        assert!(!m.excludes(&[Point::new(1.0, 0.5), Point::new(2.0, 0.5), Point::new(1.5, 2.0)]));
        assert_eq!(m.derivative_at_zero(), None);
    }

    #[test]
    fn exclusion_through_compositions() {
        let d = Point::new(1.0, 0.0);
        let phi = radial_slit_map(0.5, d).unwrap();
        let base = phi.slit().unwrap().0.re;
        let square = |c: f64, r: f64| {
            let corners = [Point::new(c - r, -r), Point::new(c + r, -r), Point::new(c + r, r), Point::new(c - r, r)];
            let mut closed = corners.to_vec();
            closed.push(corners[0]);
            let mut pts = crate::fractal::densify(&closed, 1e-3);
            pts.pop();
            pts
        };
        assert!(phi.excludes(&square(base + 0.05, 0.1)));
        assert!(!phi.excludes(&square(base - 0.2, 0.1)));
        assert!(!ConformalMap::identity().excludes(&square(0.0, 0.5)));
        // a loop around 0 reaching radius r meets phi∘phi's slit exactly when r exceeds its base
        let twice = phi.compose(&phi);
        let longer = radial_slit_map(1.0, d).unwrap().slit().unwrap().0.re;
        assert!(twice.excludes(&square(0.0, longer + 0.01)));
        assert!(!twice.excludes(&square(0.0, longer - 0.01)));
    }

    proptest! {
        #[test]
        fn composition_derivative_is_product(t1 in 0.05f64..1.0, t2 in 0.05f64..1.0, a1 in 0.0f64..6.28, a2 in 0.0f64..6.28) {
            let m1 = radial_slit_map(t1, Point::from_polar(1.0, a1)).unwrap();
            let m2 = radial_slit_map(t2, Point::from_polar(1.0, a2)).unwrap();
            let c = m1.compose(&m2);
            let d = c.derivative(Point::new(0.0, 0.0));
            prop_assert!((d.re - (-(t1 + t2)).exp()).abs() < 1e-12 && d.im.abs() < 1e-12);
            prop_assert_eq!(c.derivative_at_zero(), Some((-t1).exp() * (-t2).exp()));
        }
    }
}
