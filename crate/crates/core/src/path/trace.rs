//! Unidirectional path tracer with next-event estimation. A single walk
//! reports every complete path it forms to a caller-supplied sink; the
//! pre-pass, replay, plain rendering and large-step proposals all share it.

use std::f64::consts::FRAC_1_PI;
use std::ops::RangeInclusive;

use super::{Path, PathKey, PathVertex, Signature, StreamAddress, Technique, MAX_SEGMENTS, ROULETTE_DEPTH};
use crate::rng::RandomStream;
use crate::scene::{Scene, VertexClass};
use crate::{Ray, Rgb, Vec3};

/// Roulette survival probability at vertex `k` for throughput `beta`.
#[inline]
pub fn roulette_survival(beta: Rgb, k: usize) -> f64 {
    if k >= ROULETTE_DEPTH {
        beta.max_channel().min(1.0)
    } else {
        1.0
    }
}

#[derive(Clone, Debug)]
pub struct WalkSettings {
    pub max_segments: usize,
    /// Vertex indices at which light sampling is attempted.
    pub light_sampling: RangeInclusive<usize>,
}

impl Default for WalkSettings {
    fn default() -> Self {
        Self { max_segments: MAX_SEGMENTS, light_sampling: 1..=MAX_SEGMENTS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkControl {
    Continue,
    Stop,
}

/// A complete path formed during a walk. `pdf_light` is the density the
/// full tracer would assign via light sampling, whatever the walk settings.
pub struct PathEvent<'a> {
    pub u: (f64, f64),
    pub vertices: &'a [PathVertex],
    pub f: Rgb,
    pub pdf_bsdf: f64,
    pub pdf_light: f64,
    pub technique: Technique,
}

impl PathEvent<'_> {
    #[inline]
    pub fn contribution(&self) -> Rgb {
        self.f / (self.pdf_bsdf + self.pdf_light)
    }

    #[inline]
    pub fn signature(&self) -> Signature {
        Signature::from_classes(self.vertices.iter().map(|v| v.class))
    }

    #[inline]
    pub fn key(&self) -> PathKey {
        PathKey { segments: (self.vertices.len() - 1) as u8, technique: self.technique }
    }

    pub fn to_path(&self, seed: StreamAddress) -> Path {
        Path {
            vertices: self.vertices.to_vec(),
            u: self.u,
            f: self.f,
            pdf_bsdf: self.pdf_bsdf,
            pdf_light: self.pdf_light,
            technique: self.technique,
            seed,
            signature: self.signature(),
        }
    }
}

/// First non-specular vertex seen through a pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimarySurface {
    pub position: Vec3,
    /// Oriented toward the incoming ray.
    pub normal: Vec3,
    pub albedo: Rgb,
    /// Product of specular factors between the camera and this vertex.
    pub throughput: Rgb,
    /// Vertex index.
    pub depth: usize,
}

/// Traces one camera sample through `u` and hands every complete,
/// non-black path to `sink`. Random numbers are consumed in a fixed layout
/// (six per scattering vertex) so a walk is reproducible from its stream.
pub fn walk(
    scene: &Scene,
    u: (f64, f64),
    stream: &mut RandomStream,
    settings: &WalkSettings,
    mut sink: impl FnMut(&PathEvent) -> WalkControl,
) -> Option<PrimarySurface> {
    let cam = &scene.camera;
    let mut ray = cam.generate_ray(u.0, u.1);
    let mut verts: Vec<PathVertex> = Vec::with_capacity(MAX_SEGMENTS + 2);
    verts.push(PathVertex::eye(cam.position, cam.forward()));
    let mut beta = Rgb::splat(1.0);
    // product of F_j g_j over vertices before the newest one
    let mut f_prefix = Rgb::splat(1.0);
    // product of pdf_fwd over all vertices so far
    let mut pdf_prefix = 1.0;
    // roulette survival and directional density (or event probability) of the pending segment
    let mut pending = (1.0, 1.0);
    let mut primary = None;
    let mut specular_prefix = Some(Rgb::splat(1.0));

    loop {
        let k = verts.len();
        let Some(hit) = scene.intersect(&ray) else { break };
        let prev = verts[k - 1];
        let cos_here = hit.normal.dot(ray.dir).abs();
        let inv_d2 = 1.0 / (hit.t * hit.t);
        let (g_prev, pdf_fwd) = match prev.class {
            VertexClass::D => {
                let g = prev.normal.dot(ray.dir).abs() * cos_here * inv_d2;
                (g, pending.0 * pending.1 * cos_here * inv_d2)
            }
            VertexClass::S => (1.0, pending.0 * pending.1),
            _ => (1.0, 1.0),
        };
        verts[k - 1].g = g_prev;
        f_prefix = f_prefix * prev.factor * g_prev;
        let pdf_before = pdf_prefix;
        pdf_prefix *= pdf_fwd;
        let wo = -ray.dir;
        let prim = hit.prim;

        if scene.is_emitter(prim) {
            let le = scene.emitted(prim, hit.normal, wo);
            verts.push(PathVertex {
                position: hit.point,
                normal: hit.normal,
                prim: prim as u32,
                class: VertexClass::L,
                event: None,
                factor: le,
                g: 1.0,
                pdf_fwd,
            });
            if !le.is_black() {
                let pdf_light = if prev.class == VertexClass::D { pdf_before * scene.light_pdf(prim) } else { 0.0 };
                sink(&PathEvent {
                    u,
                    vertices: &verts,
                    f: f_prefix * le,
                    pdf_bsdf: pdf_prefix,
                    pdf_light,
                    technique: Technique::Bsdf,
                });
            }
            break;
        }

        let mat = scene.material_of(prim);
        let class = mat.class();
        verts.push(PathVertex {
            position: hit.point,
            normal: hit.normal,
            prim: prim as u32,
            class,
            event: None,
            factor: Rgb::black(),
            g: 1.0,
            pdf_fwd,
        });
        if class == VertexClass::D {
            if let Some(t) = specular_prefix.take() {
                let n = if hit.normal.dot(wo) >= 0.0 { hit.normal } else { -hit.normal };
                primary =
                    Some(PrimarySurface { position: hit.point, normal: n, albedo: mat.albedo, throughput: t, depth: k });
            }
        }

        let light_u = (stream.next_f64(), stream.next_f64(), stream.next_f64());
        let rr = stream.next_f64();
        let bsdf_u = stream.next_2d();

        if class == VertexClass::D {
            let factor = mat.albedo * FRAC_1_PI;
            verts[k].factor = factor;
            if k < settings.max_segments && settings.light_sampling.contains(&k) {
                if let Some(ls) = scene.sample_light(light_u.0, (light_u.1, light_u.2)) {
                    let d = ls.point - hit.point;
                    let d2 = d.length_squared();
                    let w = d / d2.sqrt();
                    let le = scene.emitted(ls.prim, ls.normal, -w);
                    let cos_x = w.dot(hit.normal);
                    if !le.is_black() && cos_x * wo.dot(hit.normal) > 0.0 {
                        let cos_l = ls.normal.dot(w).abs();
                        let g = cos_x.abs() * cos_l / d2;
                        if g > 0.0 && scene.visible(hit.point, ls.point) {
                            let q = roulette_survival(beta, k);
                            let fwd = q * cos_x.abs() * FRAC_1_PI * cos_l / d2;
                            verts[k].g = g;
                            verts.push(PathVertex {
                                position: ls.point,
                                normal: ls.normal,
                                prim: ls.prim as u32,
                                class: VertexClass::L,
                                event: None,
                                factor: le,
                                g: 1.0,
                                pdf_fwd: fwd,
                            });
                            let control = sink(&PathEvent {
                                u,
                                vertices: &verts,
                                f: f_prefix * factor * g * le,
                                pdf_bsdf: pdf_prefix * fwd,
                                pdf_light: pdf_prefix * ls.pdf,
                                technique: Technique::Light,
                            });
                            verts.pop();
                            verts[k].g = 1.0;
                            if control == WalkControl::Stop {
                                return primary;
                            }
                        }
                    }
                }
            }
        }

        if k >= settings.max_segments {
            break;
        }
        let q = roulette_survival(beta, k);
        if rr >= q {
            break;
        }
        let Some(sample) = mat.sample(wo, hit.normal, bsdf_u) else { break };
        if let Some(event) = sample.event {
            let (rho, _) = mat.specular_factor(wo, hit.normal, event);
            verts[k].factor = rho;
            verts[k].event = Some(event);
            if let Some(t) = specular_prefix.as_mut() {
                *t = *t * rho;
            }
        }
        beta = beta * sample.weight / q;
        pending = (q, sample.pdf);
        ray = Ray::new(hit.point, sample.wi);
    }
    primary
}

/// Image position of the camera sample for `pixel`, drawn first from its stream.
#[inline]
pub(crate) fn jitter(pixel: (usize, usize), stream: &mut RandomStream) -> (f64, f64) {
    let (a, b) = stream.next_2d();
    (pixel.0 as f64 + a, pixel.1 as f64 + b)
}

/// Every complete path of one camera sample through `pixel`.
pub fn trace_path(scene: &Scene, pixel: (usize, usize), stream: &mut RandomStream) -> Vec<Path> {
    let address = StreamAddress { seed: stream.seed(), stream_id: stream.stream_id() };
    let u = jitter(pixel, stream);
    let mut out = Vec::new();
    walk(scene, u, stream, &WalkSettings::default(), |e| {
        out.push(e.to_path(address));
        WalkControl::Continue
    });
    out
}

/// Regenerates the path identified by `key` from the camera sample stored at
/// `address` for `pixel`.
pub fn replay(scene: &Scene, address: StreamAddress, pixel: (usize, usize), key: PathKey) -> Option<Path> {
    let mut stream = RandomStream::new(address.seed, address.stream_id);
    let u = jitter(pixel, &mut stream);
    let mut found = None;
    walk(scene, u, &mut stream, &WalkSettings::default(), |e| {
        if e.key() == key {
            found = Some(e.to_path(address));
            WalkControl::Stop
        } else {
            WalkControl::Continue
        }
    });
    found
}
