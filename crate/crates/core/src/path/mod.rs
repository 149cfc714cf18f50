//! Paths, their contributions, the unidirectional tracer and the pre-pass.

mod eval;
mod prepass;
mod signature;
mod trace;

pub use eval::{evaluate_path, path_contribution, prefix_contribution, suffix_contribution, PathEval};
pub use prepass::{
    render_pt, run_prepass, GBuffer, PartitionBuffer, PixelStats, Prepass, PrepassConfig, PrimarySample, Record,
};
pub use signature::{ParseSignatureError, Signature, MAX_SIGNATURE_LEN};
pub use trace::{replay, roulette_survival, trace_path, walk, PathEvent, PrimarySurface, WalkControl, WalkSettings};

use crate::scene::{SpecularEvent, VertexClass};
use crate::{Rgb, Vec3};

/// Maximum number of segments in a path.
pub const MAX_SEGMENTS: usize = 12;
/// Number of segments after which Russian roulette applies.
pub const ROULETTE_DEPTH: usize = 5;
/// Primitive index used for the camera vertex.
pub const NO_PRIM: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathVertex {
    pub position: Vec3,
    /// Geometric normal; the camera's forward axis for the eye vertex.
    pub normal: Vec3,
    pub prim: u32,
    pub class: VertexClass,
    pub event: Option<SpecularEvent>,
    /// Scattering factor: 1 at the eye, albedo/pi (D), the delta-stripped
    /// event weight (S), emitted radiance (L).
    pub factor: Rgb,
    /// Segment term to the next vertex: `|cos||cos|/d^2` after D, 1 after E or S.
    /// 1 on the last vertex.
    pub g: f64,
    /// Density of producing this vertex from its predecessor by BSDF
    /// sampling, roulette included. 1 for the first two vertices.
    pub pdf_fwd: f64,
}

impl PathVertex {
    pub fn eye(position: Vec3, forward: Vec3) -> Self {
        Self {
            position,
            normal: forward,
            prim: NO_PRIM,
            class: VertexClass::E,
            event: None,
            factor: Rgb::splat(1.0),
            g: 1.0,
            pdf_fwd: 1.0,
        }
    }
}

/// Sampling technique that produced a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Technique {
    /// Every vertex from BSDF sampling; the last one is an emitter hit.
    Bsdf,
    /// Last vertex from explicit light sampling.
    Light,
}

/// Address of the random stream a camera sample was drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamAddress {
    pub seed: u64,
    pub stream_id: u64,
}

/// Identifies one path among those a single walk produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PathKey {
    pub segments: u8,
    pub technique: Technique,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub vertices: Vec<PathVertex>,
    /// Continuous image coordinates of the camera sample.
    pub u: (f64, f64),
    pub f: Rgb,
    pub pdf_bsdf: f64,
    pub pdf_light: f64,
    pub technique: Technique,
    pub seed: StreamAddress,
    pub signature: Signature,
}

impl Path {
    #[inline]
    pub fn segments(&self) -> usize {
        self.vertices.len() - 1
    }

    #[inline]
    pub fn key(&self) -> PathKey {
        PathKey { segments: self.segments() as u8, technique: self.technique }
    }

    /// Density of the technique that generated this path.
    #[inline]
    pub fn pdf(&self) -> f64 {
        match self.technique {
            Technique::Bsdf => self.pdf_bsdf,
            Technique::Light => self.pdf_light,
        }
    }

    /// Balance-heuristic weighted estimate `w f / p = f / (p_bsdf + p_light)`.
    #[inline]
    pub fn contribution(&self) -> Rgb {
        self.f / (self.pdf_bsdf + self.pdf_light)
    }

    #[inline]
    pub fn pixel(&self) -> (usize, usize) {
        (self.u.0 as usize, self.u.1 as usize)
    }

    /// Product of cached vertex terms; equals `f` up to rounding.
    pub fn cached_contribution(&self) -> Rgb {
        let mut c = Rgb::splat(1.0);
        for v in &self.vertices {
            c = c * v.factor * v.g;
        }
        c
    }

    /// Prefix `S` at vertex `s` from cached terms: everything up to and
    /// including the scattering factor at `s`.
    pub fn prefix(&self, s: usize) -> Rgb {
        let mut c = Rgb::splat(1.0);
        for v in &self.vertices[..s] {
            c = c * v.factor * v.g;
        }
        c * self.vertices[s].factor
    }

    /// Suffix `alpha` at vertex `s` from cached terms: the segment leaving
    /// `s` and everything after it.
    pub fn suffix(&self, s: usize) -> Rgb {
        let mut c = Rgb::splat(self.vertices[s].g);
        for v in &self.vertices[s + 1..] {
            c = c * v.factor * v.g;
        }
        c
    }

    /// Recomputes `pdf_fwd` of every vertex and the two technique densities
    /// from the vertex positions, normals, classes and events.
    pub fn refresh_pdfs(&mut self, scene: &crate::scene::Scene) {
        let e = eval::densities(scene, &self.vertices);
        for (v, p) in self.vertices.iter_mut().zip(&e.pdf_fwd) {
            v.pdf_fwd = *p;
        }
        self.pdf_bsdf = e.pdf_bsdf;
        self.pdf_light = e.pdf_light;
    }
}
