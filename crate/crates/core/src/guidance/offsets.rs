use crate::error::{Error, Result};
use crate::lowdisc::{ld_point, map_to_disk_offset};

/// Symmetric list of integer pixel shifts shared by every pixel of a render.
///
/// Layout: `h` offsets, then `(0, 0)`, then the `h` negations in the same
/// order, so `offsets[i] == -offsets[len - 1 - i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OffsetSet {
    offsets: Vec<(i32, i32)>,
    radius: u32,
}

impl OffsetSet {
    /// Mirrors `half` around the origin.
    pub fn from_half(half: &[(i32, i32)], radius: u32) -> Self {
        let mut offsets = Vec::with_capacity(2 * half.len() + 1);
        offsets.extend_from_slice(half);
        offsets.push((0, 0));
        offsets.extend(half.iter().rev().map(|&(x, y)| (-x, -y)));
        Self { offsets, radius }
    }

    /// Sparse set of `size` offsets: Halton points `sequence_offset + 1 ..`
    /// mapped to the disk of `radius`, then the origin and the negations.
    pub fn sparse(size: usize, radius: u32, sequence_offset: u64) -> Result<Self> {
        if size < 3 || size % 2 == 0 {
            return Err(Error::InvalidConfig(format!("offset set size must be odd and at least 3, got {size}")));
        }
        if radius < 1 {
            return Err(Error::InvalidConfig("offset radius must be at least 1".into()));
        }
        let half: Vec<(i32, i32)> = (0..(size - 1) / 2)
            .map(|i| {
                let (u, v) = ld_point::<f64>(sequence_offset + 1 + i as u64);
                map_to_disk_offset(u, v, radius as f64)
            })
            .collect();
        Ok(Self::from_half(&half, radius))
    }

    /// Every integer offset within `radius`, origin included.
    pub fn full(radius: u32) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidConfig("offset radius must be at least 1".into()));
        }
        let r = radius as i32;
        let mut half = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = (dx * dx + dy * dy) as i64 <= (r as i64) * (r as i64);
                // one representative of each +-pair, origin excluded
                let first = dy < 0 || (dy == 0 && dx < 0);
                if inside && first {
                    half.push((dx, dy));
                }
            }
        }
        Ok(Self::from_half(&half, radius))
    }

    #[inline]
    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    #[inline]
    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// Number of entries equal to `d`.
    pub fn multiplicity(&self, d: (i32, i32)) -> usize {
        self.offsets.iter().filter(|&&o| o == d).count()
    }
}
