//! Scene state: workspace, rigid objects with poses and movability, and the
//! manipulation primitives' parameter types.

use crate::geometry::{contains, ConvexPolygon, Pose2, Rect, Shape, Vec2};
use crate::Real;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Stable object identifier within a scene.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct ObjectId(pub u32);

impl std::fmt::Display for ObjectId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whether an object may be lifted or only pushed along the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Movability {
    PickOrPush,
    PushOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState<S> {
    pub id: ObjectId,
    pub shape: Arc<Shape<S>>,
    pub pose: Pose2<S>,
    pub movability: Movability,
    pub friction_scale: S,
    /// Set by the simulator when the centroid leaves the workspace.
    pub out_of_bounds: bool,
}

impl<S: Real> ObjectState<S> {
    pub fn world_parts(&self) -> Vec<ConvexPolygon<S>> {
        self.shape.transform(&self.pose)
    }

    pub fn world_centroid(&self) -> Vec2<S> {
        self.shape.centroid_at(&self.pose)
    }
}

/// Full scene: workspace bounds plus ordered objects. Values are cheap to
/// clone (shapes are shared).
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState<S> {
    pub workspace: Rect<S>,
    pub objects: Vec<ObjectState<S>>,
    pub target_id: Option<ObjectId>,
    pub rng_seed: u64,
}

impl<S: Real> SceneState<S> {
    pub fn object(&self, id: ObjectId) -> Option<&ObjectState<S>> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn index_of(&self, id: ObjectId) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn target(&self) -> Option<&ObjectState<S>> {
        self.target_id.and_then(|id| self.object(id))
    }

    pub fn any_out_of_bounds(&self) -> bool {
        self.objects.iter().any(|o| o.out_of_bounds)
    }

    /// Maximum pairwise penetration depth between objects; zero when all
    /// pairs are disjoint.
    pub fn max_penetration(&self) -> S {
        let polys: Vec<Vec<ConvexPolygon<S>>> = self.objects.iter().map(|o| o.world_parts()).collect();
        let centers: Vec<Vec2<S>> = self.objects.iter().map(|o| o.world_centroid()).collect();
        let radii: Vec<S> = self.objects.iter().map(|o| o.shape.bounding_radius()).collect();
        let mut worst = S::zero();
        for i in 0..self.objects.len() {
            for j in (i + 1)..self.objects.len() {
                if centers[i].dist(centers[j]) > radii[i] + radii[j] {
                    continue;
                }
                for a in &polys[i] {
                    for b in &polys[j] {
                        if let Some(p) = crate::geometry::overlap(a, b) {
                            worst = worst.max(p.depth);
                        }
                    }
                }
            }
        }
        worst
    }

    /// True when placing `shape` at `pose` collides with any object other
    /// than `exclude`, or leaves the workspace.
    pub fn placement_blocked(
        &self,
        shape: &Shape<S>,
        pose: &Pose2<S>,
        exclude: Option<ObjectId>,
    ) -> bool {
        if !contains(&self.workspace, shape, pose) {
            return true;
        }
        let parts = shape.transform(pose);
        let center = shape.centroid_at(pose);
        let radius = shape.bounding_radius();
        for o in &self.objects {
            if Some(o.id) == exclude {
                continue;
            }
            if center.dist(o.world_centroid()) > radius + o.shape.bounding_radius() {
                continue;
            }
            for b in o.world_parts() {
                for a in &parts {
                    if crate::geometry::overlap(a, &b).is_some() {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Compact, bit-exact fingerprint of the object poses and flags, for
    /// determinism checks.
    pub fn pose_digest(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.objects.len() * 4);
        for o in &self.objects {
            out.push(u64::from(o.id.0));
            out.push(o.pose.x.f64().to_bits());
            out.push(o.pose.y.f64().to_bits());
            out.push(o.pose.theta.f64().to_bits() ^ u64::from(o.out_of_bounds));
        }
        out
    }
}

/// Straight-line push of the gripper tip: start point, unit direction,
/// travel distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushAction<S> {
    pub start: Vec2<S>,
    pub direction: Vec2<S>,
    pub distance: S,
}

impl<S: Real> PushAction<S> {
    pub fn new(start: Vec2<S>, direction: Vec2<S>, distance: S) -> Self {
        Self {
            start,
            direction: direction.normalized().unwrap_or(Vec2::new(S::one(), S::zero())),
            distance,
        }
    }

    pub fn end(&self) -> Vec2<S> {
        self.start + self.direction * self.distance
    }
}

/// Indexed collection of independent scene states advanced in lockstep.
#[derive(Debug, Clone)]
pub struct SimBatch<S> {
    pub states: Vec<SceneState<S>>,
}

impl<S: Real> SimBatch<S> {
    pub fn new(states: Vec<SceneState<S>>) -> Self {
        Self { states }
    }

    pub fn size(&self) -> usize {
        self.states.len()
    }
}
