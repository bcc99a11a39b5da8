//! Fixed inputs shared by the benchmarks.

use bpb_core::harness::{gen_instance, Instance, InstanceMode};
use bpb_core::SpaceDescriptor;

/// A deterministic attain-mode instance.
pub fn fixture(n: usize, p: f64, dim: usize, eps: f64) -> Instance {
    let space = SpaceDescriptor::lp(p, dim).expect("valid space");
    gen_instance(42, n, space, InstanceMode::Attain, eps).expect("fixture generation")
}
