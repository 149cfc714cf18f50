//! JSON scene description, `"schema": 1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Camera, Material, Primitive, Scene, Shape};
use crate::error::{Error, Result};
use crate::{Rgb, Vec3};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SceneDescription {
    pub schema: u32,
    pub camera: CameraDesc,
    pub materials: Vec<MaterialDesc>,
    pub primitives: Vec<PrimitiveDesc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CameraDesc {
    pub position: [f64; 3],
    pub lookat: [f64; 3],
    pub up: [f64; 3],
    /// Vertical, degrees.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MaterialKindDesc {
    Diffuse,
    Mirror,
    Glass,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialDesc {
    pub name: String,
    pub kind: MaterialKindDesc,
    pub albedo: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ior: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveType {
    Sphere,
    Triangle,
    Quad,
}

/// Geometry fields depend on `type`: sphere uses `center`/`radius`, triangle
/// `v0`/`v1`/`v2`, quad `corner`/`edge1`/`edge2`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveDesc {
    #[serde(rename = "type")]
    pub kind: Option<PrimitiveType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v2: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge1: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge2: Option<[f64; 3]>,
    pub material: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission: Option<[f64; 3]>,
}

impl PrimitiveDesc {
    pub fn sphere(center: [f64; 3], radius: f64, material: &str) -> Self {
        Self {
            kind: Some(PrimitiveType::Sphere),
            center: Some(center),
            radius: Some(radius),
            material: material.into(),
            ..Self::default()
        }
    }

    pub fn triangle(v0: [f64; 3], v1: [f64; 3], v2: [f64; 3], material: &str) -> Self {
        Self {
            kind: Some(PrimitiveType::Triangle),
            v0: Some(v0),
            v1: Some(v1),
            v2: Some(v2),
            material: material.into(),
            ..Self::default()
        }
    }

    pub fn quad(corner: [f64; 3], edge1: [f64; 3], edge2: [f64; 3], material: &str) -> Self {
        Self {
            kind: Some(PrimitiveType::Quad),
            corner: Some(corner),
            edge1: Some(edge1),
            edge2: Some(edge2),
            material: material.into(),
            ..Self::default()
        }
    }

    pub fn emitting(mut self, radiance: [f64; 3]) -> Self {
        self.emission = Some(radiance);
        self
    }
}

#[inline]
fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

#[inline]
fn rgb(a: [f64; 3]) -> Rgb {
    Rgb::new(a[0], a[1], a[2])
}

fn field_error(field: String, message: impl Into<String>) -> Error {
    Error::SceneParse { line: 0, column: 0, field, message: message.into() }
}

fn required<T: Copy>(v: Option<T>, i: usize, name: &str) -> Result<T> {
    v.ok_or_else(|| field_error(format!("primitives[{i}].{name}"), format!("missing field `{name}`")))
}

impl SceneDescription {
    pub fn build(&self) -> Result<Scene> {
        if self.schema != SCHEMA_VERSION {
            return Err(field_error("schema".into(), format!("unsupported schema {}", self.schema)));
        }
        let c = &self.camera;
        if !(c.fov > 0.0 && c.fov < 180.0) {
            return Err(field_error("camera.fov".into(), "fov must lie in (0, 180)"));
        }
        let camera = Camera::new(v3(c.position), v3(c.lookat), v3(c.up), c.fov, c.width, c.height);
        let mut materials = Vec::with_capacity(self.materials.len());
        for (i, m) in self.materials.iter().enumerate() {
            if materials.iter().any(|x: &Material| x.name == m.name) {
                return Err(field_error(format!("materials[{i}].name"), format!("duplicate material `{}`", m.name)));
            }
            let albedo = rgb(m.albedo);
            materials.push(match m.kind {
                MaterialKindDesc::Diffuse => Material::diffuse(&m.name, albedo),
                MaterialKindDesc::Mirror => Material::mirror(&m.name, albedo),
                MaterialKindDesc::Glass => {
                    let ior = m.ior.ok_or_else(|| {
                        field_error(format!("materials[{i}].ior"), "glass requires `ior`")
                    })?;
                    Material::glass(&m.name, albedo, ior)
                }
            });
        }
        let mut primitives = Vec::with_capacity(self.primitives.len());
        for (i, p) in self.primitives.iter().enumerate() {
            let kind = required(p.kind, i, "type")?;
            let shape = match kind {
                PrimitiveType::Sphere => Shape::Sphere {
                    center: v3(required(p.center, i, "center")?),
                    radius: required(p.radius, i, "radius")?,
                },
                PrimitiveType::Triangle => Shape::Triangle {
                    v0: v3(required(p.v0, i, "v0")?),
                    v1: v3(required(p.v1, i, "v1")?),
                    v2: v3(required(p.v2, i, "v2")?),
                },
                PrimitiveType::Quad => Shape::Quad {
                    corner: v3(required(p.corner, i, "corner")?),
                    edge1: v3(required(p.edge1, i, "edge1")?),
                    edge2: v3(required(p.edge2, i, "edge2")?),
                },
            };
            let material = materials.iter().position(|m| m.name == p.material).ok_or_else(|| {
                field_error(format!("primitives[{i}].material"), format!("unknown material `{}`", p.material))
            })?;
            primitives.push(Primitive { shape, material, emission: p.emission.map(rgb) });
        }
        Scene::new(camera, materials, primitives)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene description serializes")
    }
}

/// Parses and validates a scene from JSON text.
pub fn parse_scene(text: &str) -> Result<Scene> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let desc: SceneDescription = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::SceneParse { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
    })?;
    desc.build()
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scene(&text)
}
