use std::f64::consts::PI;

use crate::{Ray, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self { min: Vec3::splat(f64::INFINITY), max: Vec3::splat(f64::NEG_INFINITY) }
    }

    pub fn union(self, o: Aabb) -> Self {
        Self { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn grow(self, p: Vec3) -> Self {
        Self { min: self.min.min(p), max: self.max.max(p) }
    }

    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Slab test against `[t_min, t_max]`.
    #[inline]
    pub fn hit(&self, origin: Vec3, inv_dir: Vec3, t_min: f64, t_max: f64) -> bool {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for a in 0..3 {
            let mut near = (self.min[a] - origin[a]) * inv_dir[a];
            let mut far = (self.max[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN from 0 * inf falls through as "no restriction"
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Sphere { center: Vec3, radius: f64 },
    Triangle { v0: Vec3, v1: Vec3, v2: Vec3 },
    /// Parallelogram spanned by two edges from a corner; the normal is `edge1 x edge2`.
    Quad { corner: Vec3, edge1: Vec3, edge2: Vec3 },
}

impl Shape {
    /// Nearest intersection distance in `(t_min, t_max)`.
    pub fn intersect(&self, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
        match *self {
            Shape::Sphere { center, radius } => {
                let oc = ray.origin - center;
                let b = oc.dot(ray.dir);
                let c = oc.length_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let t = -b - sq;
                if t > t_min && t < t_max {
                    return Some(t);
                }
                let t = -b + sq;
                (t > t_min && t < t_max).then_some(t)
            }
            Shape::Triangle { v0, v1, v2 } => {
                let e1 = v1 - v0;
                let e2 = v2 - v0;
                let p = ray.dir.cross(e2);
                let det = e1.dot(p);
                if det.abs() < 1e-14 {
                    return None;
                }
                let inv = 1.0 / det;
                let s = ray.origin - v0;
                let u = s.dot(p) * inv;
                if !(0.0..=1.0).contains(&u) {
                    return None;
                }
                let q = s.cross(e1);
                let v = ray.dir.dot(q) * inv;
                if v < 0.0 || u + v > 1.0 {
                    return None;
                }
                let t = e2.dot(q) * inv;
                (t > t_min && t < t_max).then_some(t)
            }
            Shape::Quad { corner, edge1, edge2 } => {
                let n = edge1.cross(edge2);
                let denom = n.dot(ray.dir);
                if denom.abs() < 1e-14 {
                    return None;
                }
                let t = n.dot(corner - ray.origin) / denom;
                if !(t > t_min && t < t_max) {
                    return None;
                }
                let q = ray.at(t) - corner;
                let w = n / n.length_squared();
                let a = w.dot(q.cross(edge2));
                let b = w.dot(edge1.cross(q));
                ((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)).then_some(t)
            }
        }
    }

    /// Unit geometric normal at a surface point (outward for spheres).
    pub fn normal(&self, p: Vec3) -> Vec3 {
        match *self {
            Shape::Sphere { center, .. } => (p - center).normalize(),
            Shape::Triangle { v0, v1, v2 } => (v1 - v0).cross(v2 - v0).normalize(),
            Shape::Quad { edge1, edge2, .. } => edge1.cross(edge2).normalize(),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Shape::Sphere { radius, .. } => 4.0 * PI * radius * radius,
            Shape::Triangle { v0, v1, v2 } => 0.5 * (v1 - v0).cross(v2 - v0).length(),
            Shape::Quad { edge1, edge2, .. } => edge1.cross(edge2).length(),
        }
    }

    /// Uniform point on the surface with its normal.
    pub fn sample_area(&self, u: (f64, f64)) -> (Vec3, Vec3) {
        match *self {
            Shape::Sphere { center, radius } => {
                let z = 1.0 - 2.0 * u.0;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = 2.0 * PI * u.1;
                let n = Vec3::new(r * phi.cos(), r * phi.sin(), z);
                (center + n * radius, n)
            }
            Shape::Triangle { v0, v1, v2 } => {
                let s = u.0.sqrt();
                let (b0, b1) = (1.0 - s, u.1 * s);
                let p = v0 * b0 + v1 * b1 + v2 * (1.0 - b0 - b1);
                (p, self.normal(p))
            }
            Shape::Quad { corner, edge1, edge2 } => {
                let p = corner + edge1 * u.0 + edge2 * u.1;
                (p, self.normal(p))
            }
        }
    }

    pub fn bounds(&self) -> Aabb {
        match *self {
            Shape::Sphere { center, radius } => Aabb {
                min: center - Vec3::splat(radius),
                max: center + Vec3::splat(radius),
            },
            Shape::Triangle { v0, v1, v2 } => Aabb::empty().grow(v0).grow(v1).grow(v2),
            Shape::Quad { corner, edge1, edge2 } => Aabb::empty()
                .grow(corner)
                .grow(corner + edge1)
                .grow(corner + edge2)
                .grow(corner + edge1 + edge2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_from_sphere_center_hits_at_radius() {
        let s = Shape::Sphere { center: Vec3::new(1.0, 2.0, 3.0), radius: 1.0 };
        for d in [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.3, -0.4, 0.5).normalize()] {
            let ray = Ray::new(Vec3::new(1.0, 2.0, 3.0), d);
            let t = s.intersect(&ray, 1e-4, f64::INFINITY).unwrap();
            assert!((t - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quad_and_triangle_hits() {
        let q = Shape::Quad {
            corner: Vec3::new(-1.0, -1.0, 0.0),
            edge1: Vec3::new(2.0, 0.0, 0.0),
            edge2: Vec3::new(0.0, 2.0, 0.0),
        };
        let ray = Ray::new(Vec3::new(0.5, 0.5, 2.0), Vec3::new(0.0, 0.0, -1.0));
        assert!((q.intersect(&ray, 1e-4, 10.0).unwrap() - 2.0).abs() < 1e-12);
        let miss = Ray::new(Vec3::new(1.5, 0.5, 2.0), Vec3::new(0.0, 0.0, -1.0));
        assert!(q.intersect(&miss, 1e-4, 10.0).is_none());
        assert_eq!(q.normal(Vec3::zero()), Vec3::new(0.0, 0.0, 1.0));
        assert!((q.area() - 4.0).abs() < 1e-15);

        let t = Shape::Triangle {
            v0: Vec3::new(0.0, 0.0, 0.0),
            v1: Vec3::new(1.0, 0.0, 0.0),
            v2: Vec3::new(0.0, 1.0, 0.0),
        };
        let ray = Ray::new(Vec3::new(0.2, 0.2, 1.0), Vec3::new(0.0, 0.0, -1.0));
        assert!((t.intersect(&ray, 1e-4, 10.0).unwrap() - 1.0).abs() < 1e-12);
        let ray = Ray::new(Vec3::new(0.8, 0.8, 1.0), Vec3::new(0.0, 0.0, -1.0));
        assert!(t.intersect(&ray, 1e-4, 10.0).is_none());
    }

    #[test]
    fn area_samples_lie_on_surface() {
        let shapes = [
            Shape::Sphere { center: Vec3::new(0.0, 1.0, 0.0), radius: 0.5 },
            Shape::Triangle {
                v0: Vec3::new(0.0, 0.0, 0.0),
                v1: Vec3::new(1.0, 0.0, 0.0),
                v2: Vec3::new(0.0, 1.0, 1.0),
            },
        ];
        for s in shapes {
            for i in 0..50 {
                let u = ((i as f64 + 0.5) / 50.0, ((i * 7) % 50) as f64 / 50.0);
                let (p, n) = s.sample_area(u);
                let b = s.bounds();
                assert!(p.x >= b.min.x - 1e-12 && p.x <= b.max.x + 1e-12);
                assert!((n.length() - 1.0).abs() < 1e-12);
            }
        }
    }
}
