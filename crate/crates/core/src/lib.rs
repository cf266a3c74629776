//! Multi-directional geodesic convolution on triangle meshes.

pub mod angle;
pub mod container;
pub mod conv;
pub mod dirac;
pub mod gpc;
pub mod mesh;
pub mod network;
pub mod synthetic;
pub mod vec3;
pub mod verify;
pub mod windows;
