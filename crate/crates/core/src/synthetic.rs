//! Two-class relative-orientation task on the unit sphere.
//!
//! Each sample holds two striped discs on a random great circle. Disc A's stripes make a
//! random angle with the circle; disc B's stripes are parallel to A's after parallel
//! transport along the circle (class 0) or perpendicular to them (class 1). Each disc on
//! its own looks the same in both classes; only the relative orientation carries the
//! label.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use thiserror::Error;

use crate::conv::Signal;
use crate::mesh::TriangleMesh;
use crate::network::train::Sample;
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureTask {
    pub disc_radius: f64,
    pub wavelength: f64,
    /// Geodesic distance between the disc centers.
    pub separation: f64,
}

impl Default for TextureTask {
    fn default() -> Self {
        TextureTask { disc_radius: 0.3, wavelength: 0.3, separation: 0.6 }
    }
}

/// One striped disc: center, unit tangent along the stripes, and stripe phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub center: Vec3,
    pub along: Vec3,
    pub phase: f64,
}

impl TextureTask {
    /// Disc placement of sample `index` in the stream seeded by `seed`; classes alternate
    /// with the index.
    pub fn layout(&self, seed: u64, index: usize) -> (usize, [Disc; 2]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64);
        let label = index % 2;
        let m: Vec3 = UnitSphere.sample(&mut rng);
        let a = vec3::normalize(vec3::cross(m, if m[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] }));
        let u = vec3::rotate(a, m, rng.gen_range(0.0..TAU));
        // w is normal to the great circle, hence parallel along it
        let w = vec3::cross(m, u);
        let alpha: f64 = rng.gen_range(0.0..PI);
        let beta = if label == 0 { alpha } else { alpha + FRAC_PI_2 };
        let h = 0.5 * self.separation;
        let disc = |t: f64, angle: f64, phase: f64| {
            let center = vec3::add(vec3::scale(m, t.cos()), vec3::scale(u, t.sin()));
            let tangent = vec3::sub(vec3::scale(u, t.cos()), vec3::scale(m, t.sin()));
            Disc { center, along: vec3::add(vec3::scale(tangent, angle.cos()), vec3::scale(w, angle.sin())), phase }
        };
        let (pa, pb) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
        (label, [disc(-h, alpha, pa), disc(h, beta, pb)])
    }

    pub fn sample(&self, mesh: &TriangleMesh, seed: u64, index: usize) -> Sample {
        let (label, discs) = self.layout(seed, index);
        let k = TAU / self.wavelength;
        let input = Signal::from_fn(mesh.n_vertices(), 1, |v, _| {
            let x = vec3::normalize(mesh.position(v));
            discs
                .iter()
                .map(|d| {
                    let r = vec3::angle_between(x, d.center);
                    if r >= self.disc_radius {
                        return 0.0;
                    }
                    let across = vec3::cross(d.center, d.along);
                    let fade = 0.5 * (1.0 + (PI * r / self.disc_radius).cos());
                    fade * (k * vec3::dot(vec3::sub(x, d.center), across) + d.phase).cos()
                })
                .sum()
        });
        Sample { input, labels: vec![label] }
    }

    pub fn generate(&self, mesh: &TriangleMesh, n: usize, seed: u64) -> Vec<Sample> {
        (0..n).map(|i| self.sample(mesh, seed, i)).collect()
    }
}

pub const MAGIC: &[u8; 4] = b"MDGD";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a dataset (bad magic)")]
    BadMagic,
    #[error("unsupported dataset version {0}")]
    Version(u32),
    #[error("inconsistent dataset: {0}")]
    Shape(String),
}

/// Samples for one mesh. Stored as magic `MDGD`, `u32` version, the 32-byte mesh hash,
/// `u64` sample count, `u64` vertex count, `u64` channels, then per sample a `u64` label
/// count, the labels as `u32` and the signal as `f64`, all little-endian.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub mesh_hash: [u8; 32],
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), DatasetError> {
        let (nv, nc) = self.samples.first().map_or((0, 0), |s| (s.input.n_vertices, s.input.channels));
        w.write_all(MAGIC)?;
        w.write_u32::<LE>(VERSION)?;
        w.write_all(&self.mesh_hash)?;
        w.write_u64::<LE>(self.samples.len() as u64)?;
        w.write_u64::<LE>(nv as u64)?;
        w.write_u64::<LE>(nc as u64)?;
        for s in &self.samples {
            if (s.input.n_vertices, s.input.channels) != (nv, nc) {
                return Err(DatasetError::Shape("samples differ in shape".into()));
            }
            w.write_u64::<LE>(s.labels.len() as u64)?;
            for &l in &s.labels {
                w.write_u32::<LE>(l as u32)?;
            }
            for &x in &s.input.data {
                w.write_f64::<LE>(x)?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self, DatasetError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(DatasetError::BadMagic);
        }
        let version = r.read_u32::<LE>()?;
        if version != VERSION {
            return Err(DatasetError::Version(version));
        }
        let mut mesh_hash = [0u8; 32];
        r.read_exact(&mut mesh_hash)?;
        let n = r.read_u64::<LE>()? as usize;
        let nv = r.read_u64::<LE>()? as usize;
        let nc = r.read_u64::<LE>()? as usize;
        let mut samples = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let nl = r.read_u64::<LE>()? as usize;
            if nl > nv.max(1) {
                return Err(DatasetError::Shape(format!("{nl} labels for {nv} vertices")));
            }
            let labels = (0..nl).map(|_| r.read_u32::<LE>().map(|l| l as usize)).collect::<Result<_, _>>()?;
            let mut data = vec![0.0; nv * nc];
            r.read_f64_into::<LE>(&mut data)?;
            samples.push(Sample { input: Signal { n_vertices: nv, channels: nc, data }, labels });
        }
        Ok(Dataset { mesh_hash, samples })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn samples_are_deterministic_and_balanced() {
        let mesh = primitives::icosphere(2);
        let t = TextureTask::default();
        let a = t.generate(&mesh, 6, 3);
        assert_eq!(a, t.generate(&mesh, 6, 3));
        assert_ne!(a, t.generate(&mesh, 6, 4));
        assert_eq!(a.iter().map(|s| s.labels[0]).sum::<usize>(), 3);
        for (i, s) in a.iter().enumerate() {
            assert!(s.input.is_finite() && s.input.channels == 1);
            let (_, [p, q]) = t.layout(3, i);
            assert!((vec3::angle_between(p.center, q.center) - t.separation).abs() < 1e-9);
        }
    }

    /// Stripe normal at a disc, from the structure tensor of the sampled signal over the
    /// edges near its center, as an angle mod π in the frame (`toward`, center × `toward`).
    fn measured_normal(mesh: &TriangleMesh, s: &Sample, center: Vec3, toward: Vec3, radius: f64) -> f64 {
        let e1 = vec3::normalize(vec3::project_to_plane(vec3::sub(toward, center), center));
        let e2 = vec3::cross(center, e1);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for f in mesh.faces() {
            for k in 0..3 {
                let (x, y) = (f[k], f[(k + 1) % 3]);
                if vec3::angle_between(mesh.position(x), center) > radius {
                    continue;
                }
                let e = vec3::sub(mesh.position(y), mesh.position(x));
                let g = (s.input.get(y, 0) - s.input.get(x, 0)) / vec3::dot(e, e);
                let (a, b) = (g * vec3::dot(e, e1), g * vec3::dot(e, e2));
                sxx += a * a;
                sxy += a * b;
                syy += b * b;
            }
        }
        0.5 * (2.0 * sxy).atan2(sxx - syy)
    }

    #[test]
    fn relative_orientation_follows_the_label() {
        let mesh = primitives::icosphere(4);
        let t = TextureTask::default();
        for (i, s) in t.generate(&mesh, 6, 0).iter().enumerate() {
            let (label, [p, q]) = t.layout(0, i);
            // frames point along the great circle in the same sense at both ends
            let a = measured_normal(&mesh, s, p.center, q.center, 0.25);
            let away = vec3::sub(vec3::scale(q.center, 2.0 * vec3::dot(p.center, q.center)), p.center);
            let b = measured_normal(&mesh, s, q.center, away, 0.25);
            let d = crate::angle::circular_distance(2.0 * a, 2.0 * b) / 2.0;
            if label == 0 {
                assert!(d < 0.2, "class 0: {d}");
            } else {
                assert!(d > FRAC_PI_2 - 0.2, "class 1: {d}");
            }
        }
    }

    #[test]
    fn dataset_round_trip() {
        let mesh = primitives::icosphere(1);
        let d = Dataset { mesh_hash: mesh.content_hash(), samples: TextureTask::default().generate(&mesh, 3, 0) };
        let mut buf = Vec::new();
        d.write(&mut buf).unwrap();
        assert_eq!(Dataset::read(buf.as_slice()).unwrap(), d);
        buf[0] = 0;
        assert!(matches!(Dataset::read(buf.as_slice()), Err(DatasetError::BadMagic)));
    }
}
