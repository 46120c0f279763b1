//! Exact Minkowski functionals of finite disk unions.

mod arcs;
mod config;
mod disk;
mod functionals;
mod union_find;

pub use arcs::{boundary_arcs, Arc, ArcArrangement};
pub use config::{Configuration, RadiusBounds};
pub use disk::{
    circle_intersections, circle_intersections_tol, CircleIntersection, MarkedPoint, Rect,
    GEOM_REL_TOL,
};
pub use functionals::{
    component_labels, delta_functionals, energy, energy_in, functionals, functionals_of,
    local_delta, local_energy, local_radius, FunctionalDelta, Functionals, LocalDelta, Theta,
};
pub use union_find::UnionFind;

