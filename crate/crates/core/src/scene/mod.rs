//! Geometry, materials, lights and camera.

mod builtin;
mod bvh;
mod camera;
mod json;
mod material;
mod shape;

pub use builtin::{builtin_description, builtin_scene, cornell_basic, cornell_caustic, lit_plane, veach_lamp, white_furnace, BUILTIN_SCENES};
pub use bvh::Bvh;
pub use camera::Camera;
pub use json::{load_scene, parse_scene, SceneDescription};
pub use material::{cosine_hemisphere, fresnel_dielectric, refract, BsdfSample, Material, MaterialKind, SpecularEvent};
pub use shape::{Aabb, Shape};

use crate::error::{Error, Result};
use crate::{Ray, Rgb, Vec3};

/// Interaction class of a path vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexClass {
    /// Eye (camera) vertex.
    E,
    /// Diffuse scattering.
    D,
    /// Mirror or glass scattering.
    S,
    /// Emitter.
    L,
}

impl VertexClass {
    pub fn as_char(self) -> char {
        match self {
            VertexClass::E => 'E',
            VertexClass::D => 'D',
            VertexClass::S => 'S',
            VertexClass::L => 'L',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'E' => Some(VertexClass::E),
            'D' => Some(VertexClass::D),
            'S' => Some(VertexClass::S),
            'L' => Some(VertexClass::L),
            _ => None,
        }
    }
}

impl Material {
    /// Class of a scattering vertex on this material.
    #[inline]
    pub fn class(&self) -> VertexClass {
        if self.is_specular() {
            VertexClass::S
        } else {
            VertexClass::D
        }
    }
}

/// Ray offset used to avoid self-intersection, in scene units.
pub const RAY_EPSILON: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub material: usize,
    /// One-sided radiance along the geometric normal. Emitters terminate paths.
    pub emission: Option<Rgb>,
}

#[derive(Clone, Copy, Debug)]
pub struct Hit {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub prim: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct LightSample {
    pub point: Vec3,
    pub normal: Vec3,
    pub prim: usize,
    /// Area density including the light selection probability.
    pub pdf: f64,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub camera: Camera,
    materials: Vec<Material>,
    primitives: Vec<Primitive>,
    lights: Vec<usize>,
    light_cdf: Vec<f64>,
    light_pdf: Vec<f64>,
    bvh: Bvh,
}

impl Scene {
    pub fn new(camera: Camera, materials: Vec<Material>, primitives: Vec<Primitive>) -> Result<Self> {
        if camera.width == 0 || camera.height == 0 {
            return Err(Error::InvalidScene("image size must be positive".into()));
        }
        for m in &materials {
            let a = m.albedo;
            if !(a.is_finite() && a.min_channel() >= 0.0 && a.max_channel() <= 1.0) {
                return Err(Error::InvalidScene(format!("material `{}` albedo outside [0,1]", m.name)));
            }
            if let MaterialKind::Glass { ior } = m.kind {
                if !(ior > 1.0 && ior.is_finite()) {
                    return Err(Error::InvalidScene(format!("material `{}` needs ior > 1", m.name)));
                }
            }
        }
        for (i, p) in primitives.iter().enumerate() {
            if p.material >= materials.len() {
                return Err(Error::InvalidScene(format!("primitive {i} references missing material")));
            }
            if let Some(e) = p.emission {
                if !(e.is_finite() && e.min_channel() >= 0.0) {
                    return Err(Error::InvalidScene(format!("primitive {i} has invalid emission")));
                }
            }
            if !(p.shape.area() > 0.0) {
                return Err(Error::InvalidScene(format!("primitive {i} is degenerate")));
            }
        }
        let lights: Vec<usize> = primitives
            .iter()
            .enumerate()
            .filter(|(_, p)| p.emission.is_some_and(|e| !e.is_black()))
            .map(|(i, _)| i)
            .collect();
        let power: Vec<f64> = lights
            .iter()
            .map(|&i| primitives[i].shape.area() * primitives[i].emission.unwrap().luminance())
            .collect();
        let total: f64 = power.iter().sum();
        let mut light_pdf = vec![0.0; primitives.len()];
        let mut light_cdf = Vec::with_capacity(lights.len());
        let mut acc = 0.0;
        for (&i, &p) in lights.iter().zip(&power) {
            acc += p / total;
            light_cdf.push(acc);
            light_pdf[i] = p / total / primitives[i].shape.area();
        }
        if let Some(last) = light_cdf.last_mut() {
            *last = 1.0;
        }
        let bounds: Vec<Aabb> = primitives.iter().map(|p| p.shape.bounds()).collect();
        let bvh = Bvh::build(&bounds);
        Ok(Self { camera, materials, primitives, lights, light_cdf, light_pdf, bvh })
    }

    #[inline]
    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    #[inline]
    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    #[inline]
    pub fn lights(&self) -> &[usize] {
        &self.lights
    }

    #[inline]
    pub fn material_of(&self, prim: usize) -> &Material {
        &self.materials[self.primitives[prim].material]
    }

    #[inline]
    pub fn is_emitter(&self, prim: usize) -> bool {
        self.primitives[prim].emission.is_some()
    }

    /// Radiance leaving emitter `prim` toward `w` (unit, pointing away from the surface).
    #[inline]
    pub fn emitted(&self, prim: usize, normal: Vec3, w: Vec3) -> Rgb {
        match self.primitives[prim].emission {
            Some(le) if normal.dot(w) > 0.0 => le,
            _ => Rgb::black(),
        }
    }

    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        self.intersect_within(ray, f64::INFINITY)
    }

    fn intersect_within(&self, ray: &Ray, t_max: f64) -> Option<Hit> {
        let mut best: Option<(f64, usize)> = None;
        self.bvh.traverse(ray, RAY_EPSILON, t_max, |i, tm| {
            let t = self.primitives[i].shape.intersect(ray, RAY_EPSILON, tm)?;
            best = Some((t, i));
            Some(t)
        });
        best.map(|(t, prim)| self.make_hit(ray, t, prim))
    }

    /// Brute-force nearest hit; the reference for the BVH.
    pub fn intersect_linear(&self, ray: &Ray) -> Option<Hit> {
        let mut best: Option<(f64, usize)> = None;
        for (i, p) in self.primitives.iter().enumerate() {
            let t_max = best.map_or(f64::INFINITY, |b| b.0);
            if let Some(t) = p.shape.intersect(ray, RAY_EPSILON, t_max) {
                best = Some((t, i));
            }
        }
        best.map(|(t, prim)| self.make_hit(ray, t, prim))
    }

    #[inline]
    fn make_hit(&self, ray: &Ray, t: f64, prim: usize) -> Hit {
        let point = ray.at(t);
        Hit { t, point, normal: self.primitives[prim].shape.normal(point), prim }
    }

    /// Mutual visibility of two surface points.
    pub fn visible(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let dist = d.length();
        if dist <= 2.0 * RAY_EPSILON {
            return false;
        }
        let ray = Ray::new(a, d / dist);
        let mut blocked = false;
        self.bvh.traverse(&ray, RAY_EPSILON, dist - RAY_EPSILON, |i, tm| {
            if blocked {
                return None;
            }
            let t = self.primitives[i].shape.intersect(&ray, RAY_EPSILON, tm)?;
            blocked = true;
            Some(t.min(RAY_EPSILON * 2.0))
        });
        !blocked
    }

    /// `|cos a| |cos b| / |a - b|^2 * V(a, b)`.
    pub fn geometry_term(&self, a: Vec3, na: Vec3, b: Vec3, nb: Vec3) -> f64 {
        let g = geometry_factor(a, na, b, nb);
        if g > 0.0 && self.visible(a, b) {
            g
        } else {
            0.0
        }
    }

    pub fn has_lights(&self) -> bool {
        !self.lights.is_empty()
    }

    /// Picks a light proportionally to power and a uniform point on it.
    pub fn sample_light(&self, u_select: f64, u: (f64, f64)) -> Option<LightSample> {
        if self.lights.is_empty() {
            return None;
        }
        let k = self.light_cdf.partition_point(|&c| c <= u_select).min(self.lights.len() - 1);
        let prim = self.lights[k];
        let (point, normal) = self.primitives[prim].shape.sample_area(u);
        Some(LightSample { point, normal, prim, pdf: self.light_pdf[prim] })
    }

    /// Area density with which `sample_light` produces a point on `prim`.
    #[inline]
    pub fn light_pdf(&self, prim: usize) -> f64 {
        self.light_pdf[prim]
    }
}

/// Unoccluded geometry factor `|cos a| |cos b| / |a - b|^2`.
#[inline]
pub fn geometry_factor(a: Vec3, na: Vec3, b: Vec3, nb: Vec3) -> f64 {
    let d = b - a;
    let d2 = d.length_squared();
    if d2 <= 0.0 {
        return 0.0;
    }
    let w = d / d2.sqrt();
    na.dot(w).abs() * nb.dot(w).abs() / d2
}
