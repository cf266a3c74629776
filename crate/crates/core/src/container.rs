//! Precomputed multi-level geometry: meshes, GPC maps, window tensors and pooling maps.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! magic "MDGC" | u32 version | [u8; 32] sha256 of the finest mesh
//! u32 n_rho | u32 n_theta | f64 radius | f64 r_max factor | f64 eps | u32 pooling levels
//! per level l = 0..=levels:
//!     mesh: u64 nv, nv × 3 f64, u64 nf, nf × 3 u32
//!     f64 window radius
//!     u64 n maps, per map: u32 source, f64 r_max, u64 n, n × (u32 vertex, f64 r, f64 θ, f64 γ, u8 truncated)
//!     window tensors: u64 points, then support u32, weight f64, bin u32, frac f64, valid u8 per point
//! per pooling level l = 0..levels:
//!     u64 n_fine, n_fine × (u32 coarse, f64 angle offset), u64 n_coarse, n_coarse × u32 representative
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use crate::gpc::{compute_all_gpc, GpcEntry, GpcError, GpcMap, DEFAULT_EPS};
use crate::mesh::{simplify, MeshError, SimplificationMap, TriangleMesh};
use crate::network::pool::PoolMap;
use crate::network::Levels;
use crate::windows::{build_windows, WindowError, WindowSpec, WindowTensors};

pub const MAGIC: &[u8; 4] = b"MDGC";
pub const VERSION: u32 = 1;
/// GPC maps are computed up to this multiple of the window radius.
pub const DEFAULT_R_MAX_FACTOR: f64 = 1.5;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a precompute container (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("mesh hash mismatch")]
    HashMismatch,
    #[error("corrupt container: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Gpc(#[from] GpcError),
    #[error(transparent)]
    Window(#[from] WindowError),
}

pub type Result<T, E = ContainerError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecomputeOptions {
    pub spec: WindowSpec,
    pub levels: usize,
    pub r_max_factor: f64,
    pub eps: f64,
}

impl PrecomputeOptions {
    pub fn new(spec: WindowSpec, levels: usize) -> Self {
        PrecomputeOptions { spec, levels, r_max_factor: DEFAULT_R_MAX_FACTOR, eps: DEFAULT_EPS }
    }
}

/// Geometry of one resolution level.
#[derive(Debug, Clone)]
pub struct Level {
    pub mesh: TriangleMesh,
    pub gpc: Vec<GpcMap>,
    pub windows: WindowTensors,
}

/// Coarsening step between two consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMap {
    pub fine_to_coarse: Vec<usize>,
    pub representative: Vec<usize>,
    pub angle_offset: Vec<f64>,
}

impl From<&SimplificationMap> for LevelMap {
    fn from(m: &SimplificationMap) -> Self {
        LevelMap {
            fine_to_coarse: m.fine_to_coarse.clone(),
            representative: m.representative.clone(),
            angle_offset: m.angle_offset.clone(),
        }
    }
}

impl LevelMap {
    pub fn pool_map(&self, n_theta: usize) -> PoolMap {
        PoolMap {
            n_theta,
            fine_to_coarse: self.fine_to_coarse.clone(),
            representative: self.representative.clone(),
            offset_bins: self.angle_offset.iter().map(|&a| crate::mesh::simplify::offset_in_bins(a, n_theta)).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrecomputeContainer {
    pub mesh_hash: [u8; 32],
    pub options: PrecomputeOptions,
    pub levels: Vec<Level>,
    pub maps: Vec<LevelMap>,
}

/// Builds every level: each coarser mesh keeps a quarter of the vertices and doubles the
/// window radius.
pub fn precompute(mesh: &TriangleMesh, opts: PrecomputeOptions) -> Result<PrecomputeContainer> {
    opts.spec.validate()?;
    let mut levels = Vec::with_capacity(opts.levels + 1);
    let mut maps = Vec::with_capacity(opts.levels);
    let mut current = mesh.clone();
    let mut spec = opts.spec;
    for l in 0..=opts.levels {
        if l > 0 {
            let target = (current.n_vertices() / 4).max(4);
            let sm = simplify(&current, target)?;
            maps.push(LevelMap::from(&sm));
            current = sm.coarse;
            spec.radius *= 2.0;
        }
        let gpc = compute_all_gpc(&current, opts.r_max_factor * spec.radius, opts.eps)?;
        let windows = build_windows(&current, &gpc, spec)?;
        levels.push(Level { mesh: current.clone(), gpc, windows });
    }
    Ok(PrecomputeContainer { mesh_hash: mesh.content_hash(), options: opts, levels, maps })
}

impl PrecomputeContainer {
    pub fn mesh(&self) -> &TriangleMesh {
        &self.levels[0].mesh
    }

    pub fn n_theta(&self) -> usize {
        self.options.spec.n_theta
    }

    /// Errors unless `mesh` is the mesh this container was computed for.
    pub fn check_mesh(&self, mesh: &TriangleMesh) -> Result<()> {
        if mesh.content_hash() == self.mesh_hash {
            Ok(())
        } else {
            Err(ContainerError::HashMismatch)
        }
    }

    /// Window tensors and pooling maps in the form the network consumes.
    pub fn network_levels(&self) -> Levels {
        Levels {
            windows: self.levels.iter().map(|l| l.windows.clone()).collect(),
            pools: self.maps.iter().map(|m| m.pool_map(self.n_theta())).collect(),
        }
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LE>(VERSION)?;
        w.write_all(&self.mesh_hash)?;
        let o = &self.options;
        w.write_u32::<LE>(o.spec.n_rho as u32)?;
        w.write_u32::<LE>(o.spec.n_theta as u32)?;
        w.write_f64::<LE>(o.spec.radius)?;
        w.write_f64::<LE>(o.r_max_factor)?;
        w.write_f64::<LE>(o.eps)?;
        w.write_u32::<LE>(o.levels as u32)?;
        for level in &self.levels {
            write_mesh(&mut w, &level.mesh)?;
            w.write_f64::<LE>(level.windows.spec.radius)?;
            w.write_u64::<LE>(level.gpc.len() as u64)?;
            for map in &level.gpc {
                write_gpc(&mut w, map)?;
            }
            write_windows(&mut w, &level.windows)?;
        }
        for m in &self.maps {
            w.write_u64::<LE>(m.fine_to_coarse.len() as u64)?;
            for (&u, &a) in m.fine_to_coarse.iter().zip(&m.angle_offset) {
                w.write_u32::<LE>(u as u32)?;
                w.write_f64::<LE>(a)?;
            }
            w.write_u64::<LE>(m.representative.len() as u64)?;
            for &r in &m.representative {
                w.write_u32::<LE>(r as u32)?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        buf
    }

    /// Reads a container and checks that its finest mesh matches the stored hash.
    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = r.read_u32::<LE>()?;
        if version != VERSION {
            return Err(ContainerError::Version(version));
        }
        let mut mesh_hash = [0u8; 32];
        r.read_exact(&mut mesh_hash)?;
        let n_rho = r.read_u32::<LE>()? as usize;
        let n_theta = r.read_u32::<LE>()? as usize;
        let radius = r.read_f64::<LE>()?;
        let spec = WindowSpec::new(n_rho, n_theta, radius)?;
        let r_max_factor = r.read_f64::<LE>()?;
        let eps = r.read_f64::<LE>()?;
        let n_levels = r.read_u32::<LE>()? as usize;
        let options = PrecomputeOptions { spec, levels: n_levels, r_max_factor, eps };
        let mut levels = Vec::new();
        for _ in 0..=n_levels {
            let mesh = read_mesh(&mut r)?;
            let radius = r.read_f64::<LE>()?;
            let n_maps = read_len(&mut r, mesh.n_vertices())?;
            if n_maps != mesh.n_vertices() {
                return Err(ContainerError::Corrupt(format!("{n_maps} GPC maps for {} vertices", mesh.n_vertices())));
            }
            let gpc = (0..n_maps).map(|_| read_gpc(&mut r, mesh.n_vertices())).collect::<Result<_>>()?;
            let windows = read_windows(&mut r, WindowSpec::new(n_rho, n_theta, radius)?, mesh.n_vertices())?;
            levels.push(Level { mesh, gpc, windows });
        }
        let mut maps = Vec::new();
        for l in 0..n_levels {
            let (nf, nc) = (levels[l].mesh.n_vertices(), levels[l + 1].mesh.n_vertices());
            if read_len(&mut r, nf)? != nf {
                return Err(ContainerError::Corrupt("pooling map size".into()));
            }
            let mut fine_to_coarse = Vec::with_capacity(nf);
            let mut angle_offset = Vec::with_capacity(nf);
            for _ in 0..nf {
                fine_to_coarse.push(read_index(&mut r, nc)?);
                angle_offset.push(r.read_f64::<LE>()?);
            }
            if read_len(&mut r, nc)? != nc {
                return Err(ContainerError::Corrupt("representative count".into()));
            }
            let representative = (0..nc).map(|_| read_index(&mut r, nf)).collect::<Result<_>>()?;
            maps.push(LevelMap { fine_to_coarse, representative, angle_offset });
        }
        let c = PrecomputeContainer { mesh_hash, options, levels, maps };
        c.check_mesh(c.mesh())?;
        Ok(c)
    }
}

fn read_len<R: Read>(r: &mut R, limit: usize) -> Result<usize> {
    let n = r.read_u64::<LE>()? as usize;
    if n > limit {
        return Err(ContainerError::Corrupt(format!("length {n} exceeds {limit}")));
    }
    Ok(n)
}

fn read_index<R: Read>(r: &mut R, bound: usize) -> Result<usize> {
    let i = r.read_u32::<LE>()? as usize;
    if i >= bound {
        return Err(ContainerError::Corrupt(format!("index {i} out of range {bound}")));
    }
    Ok(i)
}

fn write_mesh<W: Write>(w: &mut W, mesh: &TriangleMesh) -> Result<()> {
    w.write_u64::<LE>(mesh.n_vertices() as u64)?;
    for p in mesh.positions() {
        for x in p {
            w.write_f64::<LE>(*x)?;
        }
    }
    w.write_u64::<LE>(mesh.n_faces() as u64)?;
    for f in mesh.faces() {
        for &i in f {
            w.write_u32::<LE>(i as u32)?;
        }
    }
    Ok(())
}

fn read_mesh<R: Read>(r: &mut R) -> Result<TriangleMesh> {
    let nv = read_len(r, u32::MAX as usize)?;
    let mut positions = Vec::with_capacity(nv.min(1 << 20));
    for _ in 0..nv {
        positions.push([r.read_f64::<LE>()?, r.read_f64::<LE>()?, r.read_f64::<LE>()?]);
    }
    let nf = read_len(r, u32::MAX as usize)?;
    let mut faces = Vec::with_capacity(nf.min(1 << 20));
    for _ in 0..nf {
        faces.push([read_index(r, nv)?, read_index(r, nv)?, read_index(r, nv)?]);
    }
    Ok(TriangleMesh::new(positions, faces)?)
}

fn write_gpc<W: Write>(w: &mut W, map: &GpcMap) -> Result<()> {
    w.write_u32::<LE>(map.source as u32)?;
    w.write_f64::<LE>(map.r_max)?;
    w.write_u64::<LE>(map.len() as u64)?;
    for e in map.entries() {
        w.write_u32::<LE>(e.vertex as u32)?;
        w.write_f64::<LE>(e.r)?;
        w.write_f64::<LE>(e.theta)?;
        w.write_f64::<LE>(e.gamma)?;
        w.write_u8(e.truncated as u8)?;
    }
    Ok(())
}

fn read_gpc<R: Read>(r: &mut R, nv: usize) -> Result<GpcMap> {
    let source = read_index(r, nv)?;
    let r_max = r.read_f64::<LE>()?;
    let n = read_len(r, nv)?;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        entries.push(GpcEntry {
            vertex: read_index(r, nv)?,
            r: r.read_f64::<LE>()?,
            theta: r.read_f64::<LE>()?,
            gamma: r.read_f64::<LE>()?,
            truncated: r.read_u8()? != 0,
        });
    }
    Ok(GpcMap::from_entries(source, r_max, entries))
}

fn write_windows<W: Write>(w: &mut W, t: &WindowTensors) -> Result<()> {
    w.write_u64::<LE>(t.support.len() as u64)?;
    for k in 0..t.support.len() {
        w.write_u32::<LE>(t.support[k])?;
        w.write_f64::<LE>(t.weight[k])?;
        w.write_u32::<LE>(t.bin[k])?;
        w.write_f64::<LE>(t.frac[k])?;
        w.write_u8(t.valid[k / 3] as u8)?;
    }
    Ok(())
}

fn read_windows<R: Read>(r: &mut R, spec: WindowSpec, nv: usize) -> Result<WindowTensors> {
    let points = nv * spec.points_per_window();
    if read_len(r, 3 * points)? != 3 * points {
        return Err(ContainerError::Corrupt("window tensor size".into()));
    }
    let mut t = WindowTensors {
        spec,
        n_vertices: nv,
        support: Vec::with_capacity(3 * points),
        weight: Vec::with_capacity(3 * points),
        bin: Vec::with_capacity(3 * points),
        frac: Vec::with_capacity(3 * points),
        valid: Vec::with_capacity(points),
    };
    for k in 0..3 * points {
        t.support.push(read_index(r, nv)? as u32);
        t.weight.push(r.read_f64::<LE>()?);
        t.bin.push(read_index(r, spec.n_theta)? as u32);
        t.frac.push(r.read_f64::<LE>()?);
        let valid = r.read_u8()? != 0;
        if k % 3 == 0 {
            t.valid.push(valid);
        }
    }
    Ok(t)
}
