//! Finite-scale experiments with cubic ergodic averages for commuting actions
//! of amenable groups: group models and Følner families, finite
//! measure-preserving systems, cube joinings and box seminorms, the magic
//! extension, cubic averages, and the combinatorial counting side.

pub mod averages;
pub mod cube;
mod cube_eval;
pub mod density;
pub mod error;
pub mod group;
pub mod joining;
pub mod magic;
pub mod perm;
pub mod random;
pub mod system;

pub use averages::{
    cube_average, cube_average_at, cube_average_limit, iterated_limit_check, khintchine_bound_check,
    khintchine_chain, return_set, CubeAverageRequest, CubeReport, IteratedReport, IteratedStatus,
    KhintchineReport, ReturnSetReport,
};
pub use cube::CubeIndex;
pub use density::{
    correspondence_system, cube_count, cube_points, density, density_schedule, good_shift_set,
    syndeticity_probe, Boundary, CountMethod, CubeCount, CubePattern, GoodShiftReport, Orientation,
    SubsetWindow,
};
pub use error::{Error, Result};
pub use group::{
    Anchor, Element, FiniteGroup, FolnerFamily, GroupKind, GroupModel, GroupSpec, ProductGroupModel, Side,
    Sidedness,
};
pub use joining::{
    box_seminorm, build_joining, build_joining_bounded, csg_check, joining_integral, order_independence_check,
    seminorm_bound_check, vdc_check, BoundStatus, Joining,
};
pub use magic::{magic_extension, structure_check, z_partition, MagicSystem};
pub use perm::Perm;
pub use system::{FiniteSystem, Observable, Partition, SystemSpec};
