//! Propagation of a point source by repeated convolution with a shifted Dirac template.
//!
//! The template is one at a single radial bin and angle zero. A directional convolution
//! moves the signal a fixed distance along geodesics and keeps going straight, so two
//! steps land on a circle of twice the radius. A geodesic convolution forgets the
//! direction and fills the whole disc instead.

use std::io::Write;
use std::str::FromStr;

use crate::conv::{angular_max_pool, dir_conv, geodesic_conv, lift, ConvError, PolarKernel, Result, Signal};
use crate::gpc::{compute_gpc, DEFAULT_EPS};
use crate::mesh::TriangleMesh;
use crate::windows::{WindowSpec, WindowTensors};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiracMode {
    Dir,
    Geo,
}

impl FromStr for DiracMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dir" => Ok(DiracMode::Dir),
            "geo" => Ok(DiracMode::Geo),
            _ => Err(format!("unknown mode `{s}` (expected dir or geo)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracResponse {
    /// Radius of the template bin actually used.
    pub t: f64,
    /// Response per vertex; the maximum over bins in directional mode.
    pub response: Vec<f64>,
    /// Geodesic distance of each vertex from the source.
    pub distance: Vec<f64>,
}

/// Radial bin whose radius is closest to `t`.
pub fn nearest_bin(spec: &WindowSpec, t: f64) -> usize {
    (0..spec.n_rho).min_by(|&a, &b| (spec.rho(a) - t).abs().total_cmp(&(spec.rho(b) - t).abs())).unwrap_or(0)
}

pub fn shifted_dirac_kernel(spec: &WindowSpec, radial_bin: usize) -> PolarKernel {
    PolarKernel::from_fn(spec.n_rho, spec.n_theta, 1, 1, |i, j, _, _| if i == radial_bin && j == 0 { 1.0 } else { 0.0 })
}

/// Applies the template centered at radius `t` `steps` times to a unit impulse at
/// `source`.
pub fn propagate(
    mesh: &TriangleMesh,
    windows: &WindowTensors,
    source: usize,
    t: f64,
    steps: usize,
    mode: DiracMode,
) -> Result<DiracResponse> {
    let n = windows.n_vertices;
    if steps == 0 || source >= n || mesh.n_vertices() != n {
        return Err(ConvError::ShapeMismatch(format!("need steps >= 1 and source < {n} on a matching mesh")));
    }
    let spec = windows.spec;
    let bin = nearest_bin(&spec, t);
    let k = shifted_dirac_kernel(&spec, bin);
    let impulse = Signal::from_fn(n, 1, |v, _| if v == source { 1.0 } else { 0.0 });
    let response = match mode {
        DiracMode::Dir => {
            let mut phi = lift(&impulse, spec.n_theta);
            for _ in 0..steps {
                phi = dir_conv(&phi, &k, windows)?;
            }
            angular_max_pool(&phi).0.data
        }
        DiracMode::Geo => {
            let mut f = impulse;
            for _ in 0..steps {
                f = geodesic_conv(&f, &k, windows)?;
            }
            f.data
        }
    };
    let gpc = compute_gpc(mesh, source, f64::MAX, DEFAULT_EPS).map_err(|e| ConvError::ShapeMismatch(e.to_string()))?;
    let distance = (0..n).map(|v| gpc.r(v)).collect();
    Ok(DiracResponse { t: spec.rho(bin), response, distance })
}

impl DiracResponse {
    /// Share of the area-weighted response within `half_width` of radius `center`.
    pub fn annulus_fraction(&self, areas: &[f64], center: f64, half_width: f64) -> f64 {
        let total: f64 = self.response.iter().zip(areas).map(|(r, a)| r * a).sum();
        let inside: f64 = self
            .response
            .iter()
            .zip(areas)
            .zip(&self.distance)
            .filter(|(_, d)| (*d - center).abs() <= half_width)
            .map(|((r, a), _)| r * a)
            .sum();
        if total > 0.0 {
            inside / total
        } else {
            0.0
        }
    }

    /// Share of vertices closer than `radius` to the source with a response above
    /// `rel_threshold` times the peak.
    pub fn coverage(&self, radius: f64, rel_threshold: f64) -> f64 {
        let peak = self.response.iter().cloned().fold(0.0, f64::max);
        let inside: Vec<f64> =
            self.distance.iter().zip(&self.response).filter(|(d, _)| **d < radius).map(|(_, r)| *r).collect();
        if inside.is_empty() {
            return 0.0;
        }
        inside.iter().filter(|&&r| r > rel_threshold * peak).count() as f64 / inside.len() as f64
    }

    /// `radius,response` rows sorted by radius.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut rows: Vec<(f64, f64)> = self.distance.iter().cloned().zip(self.response.iter().cloned()).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["radius", "response"])?;
        for (d, r) in rows {
            w.write_record([d.to_string(), r.to_string()])?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpc::compute_all_gpc;
    use crate::mesh::primitives;
    use crate::windows::build_windows;

    fn setup() -> (TriangleMesh, WindowTensors) {
        let mesh = primitives::icosphere(3);
        let spec = WindowSpec::new(3, 16, 0.6).unwrap();
        let w = build_windows(&mesh, &compute_all_gpc(&mesh, 0.9, DEFAULT_EPS).unwrap(), spec).unwrap();
        (mesh, w)
    }

    #[test]
    fn one_step_agrees_between_modes() {
        let (mesh, w) = setup();
        let a = propagate(&mesh, &w, 0, 0.3, 1, DiracMode::Dir).unwrap();
        let b = propagate(&mesh, &w, 0, 0.3, 1, DiracMode::Geo).unwrap();
        assert_eq!(a.t, 0.3);
        for (x, y) in a.response.iter().zip(&b.response) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(a.annulus_fraction(&mesh.vertex_areas(), 0.3, 0.15) > 0.9);
    }

    #[test]
    fn two_steps_separate_the_modes() {
        let (mesh, w) = setup();
        let areas = mesh.vertex_areas();
        let d = propagate(&mesh, &w, 5, 0.3, 2, DiracMode::Dir).unwrap();
        let g = propagate(&mesh, &w, 5, 0.3, 2, DiracMode::Geo).unwrap();
        let (fd, fg) = (d.annulus_fraction(&areas, 0.6, 0.15), g.annulus_fraction(&areas, 0.6, 0.15));
        assert!(fd > fg, "dir {fd} geo {fg}");
        assert!(g.coverage(0.45, 1e-6) > d.coverage(0.45, 1e-6));
    }

    #[test]
    fn csv_is_sorted_by_radius() {
        let r = DiracResponse { t: 1.0, response: vec![1.0, 2.0], distance: vec![0.5, 0.1] };
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "radius,response\n0.1,2\n0.5,1\n");
        assert!(propagate(&primitives::icosphere(0), &setup().1, 0, 0.3, 1, DiracMode::Dir).is_err());
    }
}
