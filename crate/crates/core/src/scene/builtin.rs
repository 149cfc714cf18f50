//! Procedural scenes. All are described through [`SceneDescription`] so they
//! can be exported as JSON.

use super::json::{CameraDesc, MaterialDesc, MaterialKindDesc, PrimitiveDesc, SceneDescription, SCHEMA_VERSION};
use super::Scene;
use crate::error::{Error, Result};

pub const BUILTIN_SCENES: [&str; 3] = ["cornell-basic", "cornell-caustic", "veach-lamp"];

const DEFAULT_SIZE: usize = 128;

fn mat(name: &str, kind: MaterialKindDesc, albedo: [f64; 3]) -> MaterialDesc {
    MaterialDesc { name: name.into(), kind, albedo, ior: None }
}

fn glass(name: &str, ior: f64) -> MaterialDesc {
    MaterialDesc { name: name.into(), kind: MaterialKindDesc::Glass, albedo: [1.0; 3], ior: Some(ior) }
}

fn cornell_shell(width: usize, height: usize) -> SceneDescription {
    use MaterialKindDesc::Diffuse;
    let materials = vec![
        mat("white", Diffuse, [0.73, 0.73, 0.73]),
        mat("red", Diffuse, [0.65, 0.05, 0.05]),
        mat("green", Diffuse, [0.12, 0.45, 0.15]),
        mat("emitter", Diffuse, [0.0; 3]),
    ];
    let primitives = vec![
        PrimitiveDesc::quad([-1.0, 0.0, -1.0], [0.0, 0.0, 2.0], [2.0, 0.0, 0.0], "white"),
        PrimitiveDesc::quad([-1.0, 2.0, -1.0], [2.0, 0.0, 0.0], [0.0, 0.0, 2.0], "white"),
        PrimitiveDesc::quad([-1.0, 0.0, -1.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0], "white"),
        PrimitiveDesc::quad([-1.0, 0.0, -1.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0], "red"),
        PrimitiveDesc::quad([1.0, 0.0, -1.0], [0.0, 0.0, 2.0], [0.0, 2.0, 0.0], "green"),
        PrimitiveDesc::quad([-0.25, 1.98, -0.25], [0.5, 0.0, 0.0], [0.0, 0.0, 0.5], "emitter")
            .emitting([17.0, 12.0, 4.0]),
    ];
    SceneDescription {
        schema: SCHEMA_VERSION,
        camera: CameraDesc {
            position: [0.0, 1.0, 3.9],
            lookat: [0.0, 1.0, 0.0],
            up: [0.0, 1.0, 0.0],
            fov: 40.0,
            width,
            height,
        },
        materials,
        primitives,
    }
}

/// Diffuse Cornell box with two diffuse spheres.
pub fn cornell_basic(width: usize, height: usize) -> SceneDescription {
    let mut d = cornell_shell(width, height);
    d.primitives.push(PrimitiveDesc::sphere([-0.45, 0.35, -0.3], 0.35, "white"));
    d.primitives.push(PrimitiveDesc::sphere([0.45, 0.3, 0.35], 0.3, "white"));
    d
}

/// Cornell box with a glass sphere under the light, producing caustics.
pub fn cornell_caustic(width: usize, height: usize) -> SceneDescription {
    let mut d = cornell_shell(width, height);
    d.materials.push(glass("glass", 1.5));
    d.primitives.push(PrimitiveDesc::sphere([-0.45, 0.35, -0.4], 0.35, "white"));
    d.primitives.push(PrimitiveDesc::sphere([0.3, 0.4, 0.2], 0.4, "glass"));
    d
}

/// Closed room lit only through the ceiling by a shaded lamp, with a glass
/// and a mirror sphere.
pub fn veach_lamp(width: usize, height: usize) -> SceneDescription {
    use MaterialKindDesc::{Diffuse, Mirror};
    let materials = vec![
        mat("wall", Diffuse, [0.7, 0.68, 0.62]),
        mat("floor", Diffuse, [0.45, 0.35, 0.25]),
        mat("shade", Diffuse, [0.8, 0.8, 0.8]),
        mat("mirror", Mirror, [0.95, 0.95, 0.95]),
        glass("glass", 1.5),
        mat("emitter", Diffuse, [0.0; 3]),
    ];
    let (x0, x1, y1, z0, z1) = (-2.0, 2.0, 2.5, -2.0, 2.0);
    let (w, d) = (x1 - x0, z1 - z0);
    // lamp centre and shade half-size
    let (lx, lz, ly, hs) = (-1.3, -1.3, 1.6, 0.2);
    let mut primitives = vec![
        PrimitiveDesc::quad([x0, 0.0, z0], [0.0, 0.0, d], [w, 0.0, 0.0], "floor"),
        PrimitiveDesc::quad([x0, y1, z0], [w, 0.0, 0.0], [0.0, 0.0, d], "wall"),
        PrimitiveDesc::quad([x0, 0.0, z0], [w, 0.0, 0.0], [0.0, y1, 0.0], "wall"),
        PrimitiveDesc::quad([x0, 0.0, z1], [0.0, y1, 0.0], [w, 0.0, 0.0], "wall"),
        PrimitiveDesc::quad([x0, 0.0, z0], [0.0, y1, 0.0], [0.0, 0.0, d], "wall"),
        PrimitiveDesc::quad([x1, 0.0, z0], [0.0, 0.0, d], [0.0, y1, 0.0], "wall"),
        PrimitiveDesc::quad([lx - 0.15, ly, lz - 0.15], [0.0, 0.0, 0.3], [0.3, 0.0, 0.0], "emitter")
            .emitting([40.0, 36.0, 30.0]),
    ];
    let (s0, s1) = (ly - 0.1, ly + 0.25);
    let h = s1 - s0;
    primitives.extend([
        PrimitiveDesc::quad([lx - hs, s0, lz - hs], [2.0 * hs, 0.0, 0.0], [0.0, h, 0.0], "shade"),
        PrimitiveDesc::quad([lx - hs, s0, lz + hs], [2.0 * hs, 0.0, 0.0], [0.0, h, 0.0], "shade"),
        PrimitiveDesc::quad([lx - hs, s0, lz - hs], [0.0, 0.0, 2.0 * hs], [0.0, h, 0.0], "shade"),
        PrimitiveDesc::quad([lx + hs, s0, lz - hs], [0.0, 0.0, 2.0 * hs], [0.0, h, 0.0], "shade"),
        PrimitiveDesc::quad([lx - hs, s0, lz - hs], [2.0 * hs, 0.0, 0.0], [0.0, 0.0, 2.0 * hs], "shade"),
        PrimitiveDesc::sphere([0.4, 0.45, -0.6], 0.45, "glass"),
        PrimitiveDesc::sphere([-0.7, 0.35, 0.1], 0.35, "mirror"),
        PrimitiveDesc::sphere([1.2, 0.3, 0.6], 0.3, "wall"),
    ]);
    SceneDescription {
        schema: SCHEMA_VERSION,
        camera: CameraDesc {
            position: [0.3, 1.3, 1.9],
            lookat: [-0.2, 0.7, -1.0],
            up: [0.0, 1.0, 0.0],
            fov: 60.0,
            width,
            height,
        },
        materials,
        primitives,
    }
}

/// Description of a named builtin scene at the given resolution.
pub fn builtin_description(name: &str, width: usize, height: usize) -> Result<SceneDescription> {
    match name {
        "cornell-basic" => Ok(cornell_basic(width, height)),
        "cornell-caustic" => Ok(cornell_caustic(width, height)),
        "veach-lamp" => Ok(veach_lamp(width, height)),
        _ => Err(Error::UnknownScene(name.into())),
    }
}

/// Named builtin scene at its default 128x128 resolution.
pub fn builtin_scene(name: &str) -> Result<Scene> {
    builtin_description(name, DEFAULT_SIZE, DEFAULT_SIZE)?.build()
}

/// Camera inside a unit sphere with albedo-one walls around a concentric
/// emitting sphere of radius 0.5 and radiance `le`. Every wall pixel has
/// radiance `le * (1 - 0.75^(n - 1))` for paths of at most `n` segments.
pub fn white_furnace(width: usize, height: usize, le: f64) -> SceneDescription {
    SceneDescription {
        schema: SCHEMA_VERSION,
        camera: CameraDesc {
            position: [0.0, 0.0, 0.75],
            lookat: [0.0, 0.0, 2.0],
            up: [0.0, 1.0, 0.0],
            fov: 60.0,
            width,
            height,
        },
        materials: vec![mat("white", MaterialKindDesc::Diffuse, [1.0; 3])],
        primitives: vec![
            PrimitiveDesc::sphere([0.0; 3], 1.0, "white"),
            PrimitiveDesc::sphere([0.0; 3], 0.5, "white").emitting([le; 3]),
        ],
    }
}

/// Infinite-looking diffuse floor under a single downward quad light, seen
/// from below the light. Only camera-diffuse-light paths carry energy.
pub fn lit_plane(width: usize, height: usize) -> SceneDescription {
    SceneDescription {
        schema: SCHEMA_VERSION,
        camera: CameraDesc {
            position: [0.0, 0.9, 0.0],
            lookat: [0.0, 0.0, 0.0],
            up: [0.0, 0.0, -1.0],
            fov: 90.0,
            width,
            height,
        },
        materials: vec![
            mat("floor", MaterialKindDesc::Diffuse, [0.6, 0.5, 0.4]),
            mat("emitter", MaterialKindDesc::Diffuse, [0.0; 3]),
        ],
        primitives: vec![
            PrimitiveDesc::quad([-4.0, 0.0, -4.0], [0.0, 0.0, 8.0], [8.0, 0.0, 0.0], "floor"),
            PrimitiveDesc::quad([0.05, 1.0, -0.05], [0.5, 0.0, 0.0], [0.0, 0.0, 0.5], "emitter")
                .emitting([5.0, 5.0, 5.0]),
        ],
    }
}
