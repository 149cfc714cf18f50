//! Materials and their BSDFs.
//!
//! Directions follow the convention `wo` = toward the previous path vertex,
//! `wi` = toward the next one, both pointing away from the surface. Normals are
//! geometric and unoriented; diffuse surfaces are two-sided.

use std::f64::consts::{FRAC_1_PI, PI};

use crate::{Rgb, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MaterialKind {
    Diffuse,
    Mirror,
    Glass { ior: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    pub kind: MaterialKind,
    pub albedo: Rgb,
}

/// Discrete outcome at a specular vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpecularEvent {
    Reflect,
    Refract,
}

#[derive(Clone, Copy, Debug)]
pub struct BsdfSample {
    pub wi: Vec3,
    /// `f * |cos| / pdf` for diffuse; the event weight `rho / prob` for specular.
    pub weight: Rgb,
    /// Solid-angle density (diffuse) or discrete event probability (specular).
    pub pdf: f64,
    /// `None` for diffuse scattering.
    pub event: Option<SpecularEvent>,
}

const SPECULAR_TOLERANCE: f64 = 1e-6;

/// Unpolarized Fresnel reflectance of a dielectric interface.
///
/// `cos_i` is measured on the incident side; `eta` is the ratio of the
/// transmitted over incident indices.
pub fn fresnel_dielectric(cos_i: f64, eta: f64) -> f64 {
    let cos_i = cos_i.clamp(0.0, 1.0);
    let sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    let rs = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    let rp = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    0.5 * (rs * rs + rp * rp)
}

/// Refracts `wo` through the interface with geometric normal `n`.
/// Returns `None` on total internal reflection.
pub fn refract(wo: Vec3, n: Vec3, ior: f64) -> Option<Vec3> {
    let (n, eta) = if wo.dot(n) > 0.0 { (n, ior) } else { (-n, 1.0 / ior) };
    let cos_i = wo.dot(n);
    let sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
    if sin2_t >= 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    Some((-wo / eta + n * (cos_i / eta - cos_t)).normalize())
}

fn glass_fresnel(wo: Vec3, n: Vec3, ior: f64) -> f64 {
    let c = wo.dot(n);
    let eta = if c > 0.0 { ior } else { 1.0 / ior };
    fresnel_dielectric(c.abs(), eta)
}

impl Material {
    pub fn diffuse(name: &str, albedo: Rgb) -> Self {
        Self { name: name.into(), kind: MaterialKind::Diffuse, albedo }
    }

    pub fn mirror(name: &str, albedo: Rgb) -> Self {
        Self { name: name.into(), kind: MaterialKind::Mirror, albedo }
    }

    pub fn glass(name: &str, albedo: Rgb, ior: f64) -> Self {
        Self { name: name.into(), kind: MaterialKind::Glass { ior }, albedo }
    }

    #[inline]
    pub fn is_specular(&self) -> bool {
        !matches!(self.kind, MaterialKind::Diffuse)
    }

    /// Probability of each discrete event for incident direction `wo`.
    pub fn event_probabilities(&self, wo: Vec3, n: Vec3) -> (f64, f64) {
        match self.kind {
            MaterialKind::Diffuse => (0.0, 0.0),
            MaterialKind::Mirror => (1.0, 0.0),
            MaterialKind::Glass { ior } => {
                let f = glass_fresnel(wo, n, ior);
                (f, 1.0 - f)
            }
        }
    }

    /// Outgoing direction for a given specular event, if it exists.
    pub fn specular_direction(&self, wo: Vec3, n: Vec3, event: SpecularEvent) -> Option<Vec3> {
        match (self.kind, event) {
            (MaterialKind::Diffuse, _) => None,
            (_, SpecularEvent::Reflect) => Some(wo.reflect(n)),
            (MaterialKind::Glass { ior }, SpecularEvent::Refract) => refract(wo, n, ior),
            (MaterialKind::Mirror, SpecularEvent::Refract) => None,
        }
    }

    /// Classifies the event linking `wo` and `wi`, if they form a specular pair.
    pub fn specular_event(&self, wo: Vec3, wi: Vec3, n: Vec3) -> Option<SpecularEvent> {
        [SpecularEvent::Reflect, SpecularEvent::Refract]
            .into_iter()
            .find(|&e| {
                self.specular_direction(wo, n, e)
                    .is_some_and(|d| d.dot(wi) > 1.0 - SPECULAR_TOLERANCE)
            })
    }

    /// Delta-stripped throughput of a specular event (the factor the event contributes
    /// to the path contribution) and the probability that sampling chooses it.
    pub fn specular_factor(&self, wo: Vec3, n: Vec3, event: SpecularEvent) -> (Rgb, f64) {
        let (pr, pt) = self.event_probabilities(wo, n);
        match (self.kind, event) {
            (MaterialKind::Diffuse, _) => (Rgb::black(), 0.0),
            (MaterialKind::Mirror, SpecularEvent::Reflect) => (self.albedo, 1.0),
            (MaterialKind::Mirror, SpecularEvent::Refract) => (Rgb::black(), 0.0),
            (MaterialKind::Glass { .. }, SpecularEvent::Reflect) => (Rgb::splat(pr), pr),
            (MaterialKind::Glass { .. }, SpecularEvent::Refract) => (self.albedo * pt, pt),
        }
    }

    /// BSDF value. For specular materials this is the delta-stripped factor,
    /// non-zero only along the specular direction.
    pub fn eval(&self, wo: Vec3, wi: Vec3, n: Vec3) -> Rgb {
        match self.kind {
            MaterialKind::Diffuse => {
                if wo.dot(n) * wi.dot(n) > 0.0 {
                    self.albedo * FRAC_1_PI
                } else {
                    Rgb::black()
                }
            }
            _ => match self.specular_event(wo, wi, n) {
                Some(e) => self.specular_factor(wo, n, e).0,
                None => Rgb::black(),
            },
        }
    }

    /// Density of sampling `wi` given `wo`: cosine density for diffuse, the
    /// discrete event probability for specular.
    pub fn pdf(&self, wo: Vec3, wi: Vec3, n: Vec3) -> f64 {
        match self.kind {
            MaterialKind::Diffuse => {
                let (cos_o, cos_i) = (wo.dot(n), wi.dot(n));
                if cos_o * cos_i > 0.0 {
                    cos_i.abs() * FRAC_1_PI
                } else {
                    0.0
                }
            }
            _ => match self.specular_event(wo, wi, n) {
                Some(e) => self.specular_factor(wo, n, e).1,
                None => 0.0,
            },
        }
    }

    pub fn sample(&self, wo: Vec3, n: Vec3, u: (f64, f64)) -> Option<BsdfSample> {
        match self.kind {
            MaterialKind::Diffuse => {
                let ns = if wo.dot(n) >= 0.0 { n } else { -n };
                let local = cosine_hemisphere(u);
                let (t, b) = ns.basis();
                let wi = (t * local.x + b * local.y + ns * local.z).normalize();
                let pdf = local.z * FRAC_1_PI;
                if pdf <= 0.0 {
                    return None;
                }
                Some(BsdfSample { wi, weight: self.albedo, pdf, event: None })
            }
            _ => {
                let (pr, _) = self.event_probabilities(wo, n);
                let event = if u.0 < pr { SpecularEvent::Reflect } else { SpecularEvent::Refract };
                let wi = self.specular_direction(wo, n, event)?;
                let (rho, prob) = self.specular_factor(wo, n, event);
                if prob <= 0.0 {
                    return None;
                }
                Some(BsdfSample { wi, weight: rho / prob, pdf: prob, event: Some(event) })
            }
        }
    }
}

/// Cosine-weighted direction on the `+z` hemisphere.
pub fn cosine_hemisphere(u: (f64, f64)) -> Vec3 {
    let r = u.0.sqrt();
    let phi = 2.0 * PI * u.1;
    Vec3::new(r * phi.cos(), r * phi.sin(), (1.0 - u.0).max(0.0).sqrt())
}
