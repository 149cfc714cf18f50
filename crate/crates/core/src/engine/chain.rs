//! Chain state and the three mutations.

use std::f64::consts::{FRAC_1_PI, PI};

use crate::guidance::{candidate_weights, guided_acceptance, sample_candidate, Anchor, GuidanceImage, OffsetSet};
use crate::partition::{Partition, PartitionSet};
use crate::path::{walk, GBuffer, Path, PathKey, PathVertex, StreamAddress, Technique, WalkControl, WalkSettings, MAX_SEGMENTS};
use crate::rng::RandomStream;
use crate::scene::{geometry_factor, Scene, VertexClass};
use crate::{Ray, Rgb};

/// Range of isotropic perturbation radii, in pixels.
pub const PERTURBATION_RADII: (f64, f64) = (1.0, 32.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MutationKind {
    Isotropic,
    Guided,
    LargeStep,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [MutationKind::Isotropic, MutationKind::Guided, MutationKind::LargeStep];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            MutationKind::Isotropic => "isotropic",
            MutationKind::Guided => "guided",
            MutationKind::LargeStep => "large_step",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub proposed: u64,
    pub accepted: u64,
    pub rejected: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MutationStats {
    counts: [Counts; 3],
}

impl MutationStats {
    pub fn get(&self, kind: MutationKind) -> Counts {
        self.counts[kind.index()]
    }

    pub fn record(&mut self, kind: MutationKind, accepted: bool) {
        let c = &mut self.counts[kind.index()];
        c.proposed += 1;
        if accepted {
            c.accepted += 1;
        } else {
            c.rejected += 1;
        }
    }

    pub fn merge(&mut self, other: &MutationStats) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            a.proposed += b.proposed;
            a.accepted += b.accepted;
            a.rejected += b.rejected;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.proposed).sum()
    }

    pub fn acceptance_rate(&self, kind: MutationKind) -> f64 {
        let c = self.get(kind);
        if c.proposed == 0 {
            0.0
        } else {
            c.accepted as f64 / c.proposed as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MutationOutcome {
    pub proposed: Option<Path>,
    pub acceptance: f64,
    pub accepted: bool,
}

impl MutationOutcome {
    fn reject() -> Self {
        Self { proposed: None, acceptance: 0.0, accepted: false }
    }

    fn proposal(path: Path, acceptance: f64) -> Self {
        debug_assert!((0.0..=1.0).contains(&acceptance));
        Self { proposed: Some(path), acceptance, accepted: false }
    }
}

/// Scalar target of a path: luminance of its contribution.
#[inline]
pub fn fstar(path: &Path) -> f64 {
    path.f.luminance()
}

/// Target density of the image-plane perturbation: `fstar` expressed per unit
/// solid angle at every diffuse vertex whose outgoing direction the
/// perturbation keeps fixed.
pub fn perturbation_target(path: &Path) -> f64 {
    let v = &path.vertices;
    let mut jacobian = 1.0;
    for k in 1..v.len() - 1 {
        match v[k].class {
            VertexClass::S => {}
            VertexClass::D if v[k + 1].class == VertexClass::S => {
                let d = v[k + 1].position - v[k].position;
                let d2 = d.length_squared();
                jacobian *= d2 / v[k + 1].normal.dot(d / d2.sqrt()).abs();
            }
            _ => break,
        }
    }
    fstar(path) * jacobian
}

/// What the primary diffuse vertex of `path` connects to under a perturbation.
pub fn anchor_of(path: &Path) -> Anchor {
    let v = &path.vertices;
    let s = (1..v.len()).find(|&k| v[k].class != VertexClass::S).expect("paths end at an emitter");
    if v[s].class != VertexClass::D {
        return Anchor::None;
    }
    let next = &v[s + 1];
    if next.class == VertexClass::S {
        Anchor::Direction((next.position - v[s].position).normalize())
    } else {
        Anchor::Point { position: next.position, normal: next.normal, two_sided: next.class == VertexClass::D }
    }
}

/// Moves the camera sample of `old` to `u`, following the same specular
/// events, keeping the outgoing direction at diffuse vertices followed by a
/// specular one, and reconnecting at the first diffuse vertex followed by a
/// diffuse vertex or emitter. `None` if the result is not a valid path with
/// the same signature.
pub fn retrace(scene: &Scene, old: &Path, u: (f64, f64)) -> Option<Path> {
    let cam = &scene.camera;
    cam.pixel_of(u.0, u.1)?;
    let ov = &old.vertices;
    let mut v: Vec<PathVertex> = Vec::with_capacity(ov.len());
    v.push(PathVertex::eye(cam.position, cam.forward()));
    let mut ray = cam.generate_ray(u.0, u.1);
    let mut k = 1;
    loop {
        let hit = scene.intersect(&ray)?;
        let prim = hit.prim;
        let class = if scene.is_emitter(prim) { VertexClass::L } else { scene.material_of(prim).class() };
        if class != ov[k].class {
            return None;
        }
        if v[k - 1].class == VertexClass::D {
            let cos_prev = v[k - 1].normal.dot(ray.dir).abs();
            v[k - 1].g = cos_prev * hit.normal.dot(ray.dir).abs() / (hit.t * hit.t);
        }
        let wo = -ray.dir;
        let n = hit.normal;
        let mut vert = PathVertex {
            position: hit.point,
            normal: n,
            prim: prim as u32,
            class,
            event: None,
            factor: Rgb::splat(1.0),
            g: 1.0,
            pdf_fwd: 1.0,
        };
        match class {
            VertexClass::L => {
                vert.factor = scene.emitted(prim, n, wo);
                if vert.factor.is_black() {
                    return None;
                }
                v.push(vert);
                break;
            }
            VertexClass::S => {
                let mat = scene.material_of(prim);
                let event = ov[k].event?;
                let wi = mat.specular_direction(wo, n, event)?;
                let (rho, prob) = mat.specular_factor(wo, n, event);
                if prob <= 0.0 || rho.is_black() {
                    return None;
                }
                vert.factor = rho;
                vert.event = Some(event);
                v.push(vert);
                ray = Ray::new(hit.point, wi);
            }
            _ => {
                vert.factor = scene.material_of(prim).albedo * FRAC_1_PI;
                let next = &ov[k + 1];
                if next.class == VertexClass::S {
                    let wi = (next.position - ov[k].position).normalize();
                    if wo.dot(n) * wi.dot(n) <= 0.0 {
                        return None;
                    }
                    v.push(vert);
                    ray = Ray::new(hit.point, wi);
                } else {
                    let wi = (next.position - hit.point).normalize();
                    if wo.dot(n) * wi.dot(n) <= 0.0 || !scene.visible(hit.point, next.position) {
                        return None;
                    }
                    vert.g = geometry_factor(hit.point, n, next.position, next.normal);
                    if !(vert.g > 0.0) {
                        return None;
                    }
                    v.push(vert);
                    let mut nx = *next;
                    if nx.class == VertexClass::L {
                        nx.factor = scene.emitted(nx.prim as usize, nx.normal, -wi);
                        if nx.factor.is_black() {
                            return None;
                        }
                    } else {
                        let wi2 = (ov[k + 2].position - nx.position).normalize();
                        if (-wi).dot(nx.normal) * wi2.dot(nx.normal) <= 0.0 {
                            return None;
                        }
                    }
                    v.push(nx);
                    v.extend_from_slice(&ov[k + 2..]);
                    break;
                }
            }
        }
        k += 1;
    }
    let mut f = Rgb::splat(1.0);
    for x in &v {
        f = f * x.factor * x.g;
    }
    let mut path = Path {
        vertices: v,
        u,
        f,
        pdf_bsdf: 0.0,
        pdf_light: 0.0,
        technique: old.technique,
        seed: old.seed,
        signature: old.signature,
    };
    path.refresh_pdfs(scene);
    Some(path)
}

/// Offset with log-uniform radius in `PERTURBATION_RADII` and uniform angle.
pub fn isotropic_offset(stream: &mut RandomStream) -> (f64, f64) {
    let (r0, r1) = PERTURBATION_RADII;
    let r = r0 * (r1 / r0).powf(stream.next_f64());
    let phi = 2.0 * PI * stream.next_f64();
    (r * phi.cos(), r * phi.sin())
}

/// Area density of `isotropic_offset`; depends on the length of `d` only.
pub fn isotropic_offset_density(d: (f64, f64)) -> f64 {
    let (r0, r1) = PERTURBATION_RADII;
    let r = d.0.hypot(d.1);
    if r < r0 || r > r1 {
        0.0
    } else {
        1.0 / (2.0 * PI * r * r * (r1 / r0).ln())
    }
}

/// Probabilities of `(segments, technique)` choices for large steps: half
/// from the census mass of the partition, half uniform over the keys its
/// signatures allow.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyDistribution {
    keys: Vec<(PathKey, f64)>,
}

impl KeyDistribution {
    pub fn for_partition(partition: &Partition) -> Self {
        let mut allowed: Vec<PathKey> = Vec::new();
        if partition.complementary {
            for m in 1..=MAX_SEGMENTS as u8 {
                allowed.push(PathKey { segments: m, technique: Technique::Bsdf });
                if m >= 2 {
                    allowed.push(PathKey { segments: m, technique: Technique::Light });
                }
            }
        } else {
            for sig in &partition.signatures {
                let m = sig.segments() as u8;
                allowed.push(PathKey { segments: m, technique: Technique::Bsdf });
                if sig.len() >= 3 && sig.get(sig.len() - 2) == VertexClass::D {
                    allowed.push(PathKey { segments: m, technique: Technique::Light });
                }
            }
            allowed.sort_by_key(|k| (k.segments, k.technique));
            allowed.dedup();
        }
        let mut mass = vec![0.0; allowed.len()];
        for r in &partition.reservoir {
            if let Some(i) = allowed.iter().position(|k| *k == r.key) {
                mass[i] += r.scalar;
            }
        }
        let total: f64 = mass.iter().sum();
        let n = allowed.len() as f64;
        let keys = allowed
            .into_iter()
            .zip(mass)
            .map(|(k, m)| {
                let p = if total > 0.0 { 0.5 * m / total + 0.5 / n } else { 1.0 / n };
                (k, p)
            })
            .collect();
        Self { keys }
    }

    pub fn probability(&self, key: PathKey) -> f64 {
        self.keys.iter().find(|(k, _)| *k == key).map_or(0.0, |(_, p)| *p)
    }

    pub fn keys(&self) -> &[(PathKey, f64)] {
        &self.keys
    }

    pub fn sample(&self, stream: &mut RandomStream) -> PathKey {
        let t = stream.next_f64();
        let mut acc = 0.0;
        for (k, p) in &self.keys {
            acc += p;
            if t < acc {
                return *k;
            }
        }
        self.keys.last().expect("at least one key").0
    }

    /// Density of generating `path` with a large step, per unit image-plane area.
    pub fn density(&self, path: &Path, pixels: usize) -> f64 {
        let m = path.segments() as u8;
        let pb = self.probability(PathKey { segments: m, technique: Technique::Bsdf });
        let pl = self.probability(PathKey { segments: m, technique: Technique::Light });
        (pb * path.pdf_bsdf + pl * path.pdf_light) / pixels as f64
    }
}

/// Read-only context shared by the chains of one partition.
pub struct ChainContext<'a> {
    pub scene: &'a Scene,
    pub set: &'a PartitionSet,
    pub partition: usize,
    pub keys: KeyDistribution,
    /// Guidance and offsets for guided perturbations; isotropic when absent.
    pub guidance: Option<(&'a GuidanceImage, &'a GBuffer, &'a OffsetSet)>,
    pub large_step_probability: f64,
}

#[derive(Clone, Debug)]
pub struct ChainState {
    pub current: Path,
    pub fstar: f64,
    pub target: f64,
    pub partition: usize,
    pub stream: RandomStream,
    pub stats: MutationStats,
}

impl ChainState {
    pub fn new(current: Path, partition: usize, stream: RandomStream) -> Self {
        let fstar = fstar(&current);
        assert!(fstar > 0.0, "a chain must start on a path with positive contribution");
        let target = perturbation_target(&current);
        Self { current, fstar, target, partition, stream, stats: MutationStats::default() }
    }

    fn accept(&mut self, path: Path) {
        self.fstar = fstar(&path);
        self.target = perturbation_target(&path);
        self.current = path;
    }

    /// One Metropolis-Hastings step.
    pub fn step(&mut self, ctx: &ChainContext) -> MutationKind {
        let kind = if self.stream.next_f64() < ctx.large_step_probability {
            MutationKind::LargeStep
        } else if ctx.guidance.is_some() && guidable(&self.current) {
            MutationKind::Guided
        } else {
            MutationKind::Isotropic
        };
        let outcome = match kind {
            MutationKind::LargeStep => large_step(self, ctx),
            MutationKind::Guided => {
                let (g, gb, off) = ctx.guidance.expect("checked above");
                guided_lens_perturbation(self, g, gb, off, ctx.scene)
            }
            MutationKind::Isotropic => lens_perturbation_isotropic(self, ctx.scene),
        };
        let accepted = self.stream.next_f64() < outcome.acceptance;
        self.stats.record(kind, accepted);
        if accepted {
            self.accept(outcome.proposed.expect("positive acceptance implies a proposal"));
        }
        kind
    }
}

/// Guided offsets move a direction-fixed vertex by whole pixels, which almost
/// never keeps a specular chain on its emitter, so such paths perturb
/// isotropically. Depends only on the signature, which both kinds preserve.
fn guidable(path: &Path) -> bool {
    !matches!(anchor_of(path), Anchor::Direction(_))
}

fn perturbation_outcome(state: &ChainState, scene: &Scene, u: (f64, f64)) -> Option<(Path, f64)> {
    let p = retrace(scene, &state.current, u)?;
    let t = perturbation_target(&p);
    (t > 0.0 && t.is_finite()).then_some((p, t))
}

/// Symmetric image-plane perturbation with a log-uniform radius.
pub fn lens_perturbation_isotropic(state: &mut ChainState, scene: &Scene) -> MutationOutcome {
    let d = isotropic_offset(&mut state.stream);
    let u = (state.current.u.0 + d.0, state.current.u.1 + d.1);
    match perturbation_outcome(state, scene, u) {
        Some((p, t)) => MutationOutcome::proposal(p, (t / state.target).min(1.0)),
        None => MutationOutcome::reject(),
    }
}

/// Image-plane perturbation that draws the shift from the candidate set at
/// the current pixel. The sub-pixel position is kept.
pub fn guided_lens_perturbation(
    state: &mut ChainState,
    guidance: &GuidanceImage,
    gbuffer: &GBuffer,
    offsets: &OffsetSet,
    scene: &Scene,
) -> MutationOutcome {
    let anchor = anchor_of(&state.current);
    let (ux, uy) = state.current.u;
    let center = (ux.floor() as i64, uy.floor() as i64);
    let forward = candidate_weights(center, offsets, guidance, gbuffer, &anchor);
    let Some((i, _, _)) = sample_candidate(&forward, &mut state.stream) else {
        return MutationOutcome::reject();
    };
    let (dx, dy) = offsets.offsets()[i];
    let u = (ux + dx as f64, uy + dy as f64);
    let Some((p, t)) = perturbation_outcome(state, scene, u) else {
        return MutationOutcome::reject();
    };
    let reverse = candidate_weights((center.0 + dx as i64, center.1 + dy as i64), offsets, guidance, gbuffer, &anchor);
    let back = offsets.len() - 1 - i;
    let a = guided_acceptance(state.target, t, reverse.weight(back), forward.weight(i), forward.total, reverse.total);
    MutationOutcome::proposal(p, a)
}

/// Independence proposal from a fresh camera sample anywhere on the image.
pub fn large_step(state: &mut ChainState, ctx: &ChainContext) -> MutationOutcome {
    let scene = ctx.scene;
    let (w, h) = (scene.camera.width, scene.camera.height);
    let key = ctx.keys.sample(&mut state.stream);
    let m = key.segments as usize;
    let light_sampling = if key.technique == Technique::Light { m - 1..=m - 1 } else { 1..=0 };
    let settings = WalkSettings { max_segments: m, light_sampling };
    let u = (state.stream.next_f64() * w as f64, state.stream.next_f64() * h as f64);
    let address = StreamAddress { seed: state.stream.seed(), stream_id: state.stream.stream_id() };
    let mut found = None;
    walk(scene, u, &mut state.stream, &settings, |e| {
        if e.key() == key {
            found = Some(e.to_path(address));
            WalkControl::Stop
        } else {
            WalkControl::Continue
        }
    });
    let Some(p) = found else { return MutationOutcome::reject() };
    if !ctx.set.contains(ctx.partition, p.signature) {
        return MutationOutcome::reject();
    }
    let f_new = fstar(&p);
    let q_new = ctx.keys.density(&p, w * h);
    let q_old = ctx.keys.density(&state.current, w * h);
    if !(f_new > 0.0 && q_new > 0.0) {
        return MutationOutcome::reject();
    }
    let ratio = (f_new / q_new) / (state.fstar / q_old);
    let a = if ratio.is_nan() { 0.0 } else { ratio.min(1.0) };
    MutationOutcome::proposal(p, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_density_is_symmetric() {
        let mut s = RandomStream::new(9, 1);
        for _ in 0..1000 {
            let d = isotropic_offset(&mut s);
            let r = d.0.hypot(d.1);
            assert!((1.0 - 1e-12..=32.0 + 1e-12).contains(&r));
            assert_eq!(isotropic_offset_density(d), isotropic_offset_density((-d.0, -d.1)));
            assert!(isotropic_offset_density(d) > 0.0);
        }
        assert_eq!(isotropic_offset_density((0.5, 0.0)), 0.0);
    }

    #[test]
    fn isotropic_density_integrates_to_one() {
        // radial integral of 2 pi r p(r) over [1, 32]
        let n = 100_000;
        let (a, b) = PERTURBATION_RADII;
        let h = (b - a) / n as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let r = a + (i as f64 + 0.5) * h;
                2.0 * PI * r * isotropic_offset_density((r, 0.0)) * h
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stats_bookkeeping() {
        let mut s = MutationStats::default();
        s.record(MutationKind::Guided, true);
        s.record(MutationKind::Guided, false);
        s.record(MutationKind::LargeStep, false);
        let g = s.get(MutationKind::Guided);
        assert_eq!((g.proposed, g.accepted, g.rejected), (2, 1, 1));
        assert_eq!(s.total(), 3);
        assert_eq!(s.acceptance_rate(MutationKind::Guided), 0.5);
    }
}
