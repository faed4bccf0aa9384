//! Planning engine for tabletop object retrieval from clutter and
//! multi-primitive rearrangement.
//!
//! The crate is organized in three layers:
//!
//! * scalar-generic math: [`geometry`], [`sim`], [`grasp`], [`sampling`],
//!   [`tree`] — all parameterized over a [`Real`] scalar (`f32` or `f64`);
//! * planners: [`retrieval`] (greedy lookahead, serial MCTS, guided MCTS),
//!   [`pmbs`] (parallel MCTS with batched simulation), [`motion`]
//!   (RRT-connect in SE(2)), [`remp`] (HBFS and PMMR rearrangement) — these
//!   run at the crate's working precision [`Scalar`];
//! * harness: [`scenefile`], [`generate`], [`bench`], [`render`], [`config`].

pub mod bench;
pub mod config;
pub mod generate;
pub mod geometry;
pub mod grasp;
pub mod motion;
pub mod pmbs;
pub mod remp;
pub mod render;
pub mod retrieval;
pub mod rng;
pub mod sampling;
pub mod scene;
pub mod scenefile;
pub mod sim;
pub mod tree;

/// Scalar type for geometry and planning math: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + std::fmt::Debug
    + std::fmt::Display
    + std::iter::Sum
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` (lossy for `f32` targets).
    fn of(v: f64) -> Self {
        num_traits::FromPrimitive::from_f64(v).unwrap()
    }
    /// Conversion to `f64` for reporting and serialization.
    fn f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Working precision of the planners and the CLI.
pub type Scalar = f64;
/// 2D point/vector at working precision.
pub type Point = geometry::Vec2<Scalar>;
/// SE(2) pose at working precision.
pub type Pose = geometry::Pose2<Scalar>;
/// Convex polygon at working precision.
pub type Polygon = geometry::ConvexPolygon<Scalar>;
/// Rigid shape (union of convex parts) at working precision.
pub type Shape = geometry::Shape<Scalar>;
/// Axis-aligned workspace rectangle at working precision.
pub type Workspace = geometry::Rect<Scalar>;
/// Scene state at working precision.
pub type Scene = scene::SceneState<Scalar>;
/// Push action at working precision.
pub type Push = scene::PushAction<Scalar>;
