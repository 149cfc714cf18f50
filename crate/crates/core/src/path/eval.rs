//! Contribution and density of an explicit vertex list, recomputed from
//! geometry. Independent of the incremental bookkeeping in the tracer.

use std::f64::consts::FRAC_1_PI;

use super::trace::roulette_survival;
use super::PathVertex;
use crate::scene::{Scene, VertexClass};
use crate::Rgb;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathEval {
    pub f: Rgb,
    pub pdf_bsdf: f64,
    pub pdf_light: f64,
}

#[inline]
fn dir(from: &PathVertex, to: &PathVertex) -> crate::Vec3 {
    (to.position - from.position).normalize()
}

/// Scattering factor of vertex `k` (1 for the eye, Le for an emitter).
fn vertex_factor(scene: &Scene, v: &[PathVertex], k: usize) -> Rgb {
    let x = &v[k];
    match x.class {
        VertexClass::E => Rgb::splat(1.0),
        VertexClass::L => scene.emitted(x.prim as usize, x.normal, dir(x, &v[k - 1])),
        VertexClass::D | VertexClass::S => {
            if k + 1 >= v.len() {
                return Rgb::black();
            }
            let m = scene.material_of(x.prim as usize);
            if m.class() != x.class {
                return Rgb::black();
            }
            m.eval(dir(x, &v[k - 1]), dir(x, &v[k + 1]), x.normal)
        }
    }
}

/// Segment term from vertex `k` to `k + 1`, visibility included.
fn segment_term(scene: &Scene, v: &[PathVertex], k: usize) -> f64 {
    if k + 1 >= v.len() {
        return 1.0;
    }
    let (a, b) = (&v[k], &v[k + 1]);
    let visible = if k == 0 {
        scene.intersect(&crate::Ray::new(a.position, dir(a, b))).is_some_and(|h| {
            h.prim as u32 == b.prim && (h.point - b.position).length() < 1e-6 * (1.0 + h.t)
        })
    } else {
        scene.visible(a.position, b.position)
    };
    if !visible {
        return 0.0;
    }
    match a.class {
        VertexClass::D => crate::scene::geometry_factor(a.position, a.normal, b.position, b.normal),
        _ => 1.0,
    }
}

/// Full contribution of a complete eye-to-light path in image-plane measure.
/// Zero when any segment is occluded.
pub fn path_contribution(scene: &Scene, v: &[PathVertex]) -> Rgb {
    if v.len() < 2 || v[0].class != VertexClass::E || v[v.len() - 1].class != VertexClass::L {
        return Rgb::black();
    }
    let mut c = Rgb::splat(1.0);
    for k in 0..v.len() {
        c = c * vertex_factor(scene, v, k) * segment_term(scene, v, k);
    }
    c
}

/// Prefix up to and including the scattering factor at vertex `s`, `1 <= s < M`.
pub fn prefix_contribution(scene: &Scene, v: &[PathVertex], s: usize) -> Rgb {
    assert!(s >= 1 && s + 1 < v.len());
    let mut c = Rgb::splat(1.0);
    for k in 0..s {
        c = c * vertex_factor(scene, v, k) * segment_term(scene, v, k);
    }
    c * vertex_factor(scene, v, s)
}

/// Segment leaving `s` and everything after it, emission included.
pub fn suffix_contribution(scene: &Scene, v: &[PathVertex], s: usize) -> Rgb {
    assert!(s >= 1 && s + 1 < v.len());
    let mut c = Rgb::splat(segment_term(scene, v, s));
    for k in s + 1..v.len() {
        c = c * vertex_factor(scene, v, k) * segment_term(scene, v, k);
    }
    c
}

pub(crate) struct Densities {
    pub pdf_fwd: Vec<f64>,
    pub pdf_bsdf: f64,
    pub pdf_light: f64,
}

/// Tracer densities of a vertex list: per-vertex forward densities, their
/// product, and the light-sampling alternative for the last vertex.
pub(crate) fn densities(scene: &Scene, v: &[PathVertex]) -> Densities {
    let m = v.len() - 1;
    let mut pdf_fwd = vec![1.0; v.len()];
    let mut beta = Rgb::splat(1.0);
    for k in 1..m {
        let x = &v[k];
        let q = roulette_survival(beta, k);
        let wo = dir(x, &v[k - 1]);
        let wi = dir(x, &v[k + 1]);
        let mat = scene.material_of(x.prim as usize);
        let (p, w) = match x.class {
            VertexClass::D => {
                let same_side = wo.dot(x.normal) * wi.dot(x.normal) > 0.0;
                let pdf_w = if same_side { wi.dot(x.normal).abs() * FRAC_1_PI } else { 0.0 };
                let y = &v[k + 1];
                let d2 = (y.position - x.position).length_squared();
                (pdf_w * wi.dot(y.normal).abs() / d2, mat.albedo)
            }
            _ => {
                let event = x.event.or_else(|| mat.specular_event(wo, wi, x.normal));
                match event {
                    Some(e) => {
                        let (rho, prob) = mat.specular_factor(wo, x.normal, e);
                        if prob > 0.0 {
                            (prob, rho / prob)
                        } else {
                            (0.0, Rgb::black())
                        }
                    }
                    None => (0.0, Rgb::black()),
                }
            }
        };
        pdf_fwd[k + 1] = q * p;
        if q > 0.0 {
            beta = beta * w / q;
        }
    }
    let pdf_bsdf: f64 = pdf_fwd.iter().product();
    let pdf_light = if m >= 2 && v[m - 1].class == VertexClass::D && v[m].class == VertexClass::L {
        pdf_fwd[..m].iter().product::<f64>() * scene.light_pdf(v[m].prim as usize)
    } else {
        0.0
    };
    Densities { pdf_fwd, pdf_bsdf, pdf_light }
}

/// Contribution and both technique densities of an explicit path.
pub fn evaluate_path(scene: &Scene, v: &[PathVertex]) -> PathEval {
    let d = densities(scene, v);
    PathEval { f: path_contribution(scene, v), pdf_bsdf: d.pdf_bsdf, pdf_light: d.pdf_light }
}
