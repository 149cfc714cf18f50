use crate::{Ray, Vec3};

/// Pinhole camera. Image coordinates are continuous pixel units with the
/// origin at the top-left corner and `y` pointing down; pixel `(i, j)` covers
/// `[i, i + 1) x [j, j + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub lookat: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
    forward: Vec3,
    right: Vec3,
    true_up: Vec3,
    focal: f64,
}

impl Camera {
    pub fn new(position: Vec3, lookat: Vec3, up: Vec3, fov: f64, width: usize, height: usize) -> Self {
        let forward = (lookat - position).normalize();
        let right = forward.cross(up).normalize();
        let true_up = right.cross(forward);
        let focal = 0.5 * height as f64 / (0.5 * fov.to_radians()).tan();
        Self { position, lookat, up, fov, width, height, forward, right, true_up, focal }
    }

    pub fn generate_ray(&self, px: f64, py: f64) -> Ray {
        let dx = px - 0.5 * self.width as f64;
        let dy = py - 0.5 * self.height as f64;
        let dir = (self.forward * self.focal + self.right * dx - self.true_up * dy).normalize();
        Ray::new(self.position, dir)
    }

    /// Image-plane coordinates of a world point, if it lies in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let v = p - self.position;
        let z = v.dot(self.forward);
        if z <= 0.0 {
            return None;
        }
        let px = 0.5 * self.width as f64 + self.focal * v.dot(self.right) / z;
        let py = 0.5 * self.height as f64 - self.focal * v.dot(self.true_up) / z;
        Some((px, py))
    }

    /// Integer pixel containing continuous coordinates, if inside the image.
    #[inline]
    pub fn pixel_of(&self, px: f64, py: f64) -> Option<(usize, usize)> {
        if px >= 0.0 && py >= 0.0 && px < self.width as f64 && py < self.height as f64 {
            Some((px as usize, py as usize))
        } else {
            None
        }
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn forward(&self) -> Vec3 {
        self.forward
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_ray_pixel_round_trip() {
        let cam = Camera::new(
            Vec3::new(0.0, 1.0, 3.4),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            40.0,
            37,
            23,
        );
        for y in 0..cam.height {
            for x in 0..cam.width {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let ray = cam.generate_ray(px, py);
                let (qx, qy) = cam.project(ray.at(2.7)).unwrap();
                assert!((qx - px).abs() < 1e-9 && (qy - py).abs() < 1e-9);
                assert_eq!(cam.pixel_of(qx, qy), Some((x, y)));
            }
        }
    }

    #[test]
    fn orientation() {
        let cam = Camera::new(Vec3::zero(), Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0), 90.0, 10, 10);
        // top-left pixel looks up and to the left
        let d = cam.generate_ray(0.0, 0.0).dir;
        assert!(d.x < 0.0 && d.y > 0.0);
        assert!(cam.project(Vec3::new(0.0, 0.0, 1.0)).is_none());
    }
}
