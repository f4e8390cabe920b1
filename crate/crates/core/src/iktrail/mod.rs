//! Joint chains solved toward an end locator on a curve, sampled over time
//! into one accumulated "long exposure" instance set.

mod curve;
mod fabrik;

pub use curve::ParamCurve;
pub use fabrik::{solve_ik, IkReport, JointChain};

use glam::{DMat4, DVec3, DVec4};

use crate::error::{Error, Result};
use crate::formout::{InstanceSet, Placement};
use crate::mesh::Mesh;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 50;

/// A mesh carried by one joint of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubShape {
    pub joint: usize,
    pub name: String,
    pub mesh: Mesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    pub chain: JointChain,
    pub effector_curve: ParamCurve,
    pub root_curve: Option<ParamCurve>,
    pub sub_shapes: Vec<SubShape>,
    pub frames: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl SweepJob {
    pub fn new(chain: JointChain, effector_curve: ParamCurve, frames: usize) -> Self {
        Self {
            chain,
            effector_curve,
            root_curve: None,
            sub_shapes: Vec::new(),
            frames,
            tol: DEFAULT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = JointChain::validate_lengths(self.chain.bone_lengths()) {
            problems.push(e);
        }
        if self.frames < 1 {
            problems.push("frames must be >= 1".to_string());
        }
        if !(self.tol > 0.0) {
            problems.push(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iters < 1 {
            problems.push("max_iters must be >= 1".to_string());
        }
        if let Err(e) = self.effector_curve.validate() {
            problems.push(format!("effector_curve: {e}"));
        }
        if let Some(Err(e)) = self.root_curve.as_ref().map(ParamCurve::validate) {
            problems.push(format!("root_curve: {e}"));
        }
        let joints = self.chain.bone_count() + 1;
        for s in &self.sub_shapes {
            if s.joint >= joints {
                problems.push(format!(
                    "sub-shape {:?} joint {} out of range (chain has {joints} joints)",
                    s.name, s.joint
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// Curve parameter of frame `m`.
    pub fn frame_t(&self, m: usize) -> f64 {
        if self.frames <= 1 {
            0.0
        } else {
            m as f64 / (self.frames - 1) as f64
        }
    }

    /// Solved chain for every frame, each solve warm-started from the last.
    pub fn poses(&self) -> Result<Vec<JointChain>> {
        self.validate()?;
        let root0 = match &self.root_curve {
            Some(c) => c.evaluate(0.0),
            None => self.chain.root(),
        };
        let mut chain = JointChain::straight(root0, self.chain.bone_lengths().to_vec(), DVec3::X);
        let mut out = Vec::with_capacity(self.frames);
        for m in 0..self.frames {
            let t = self.frame_t(m);
            if let Some(c) = &self.root_curve {
                chain.translate_root(c.evaluate(t));
            }
            chain.solve(self.effector_curve.evaluate(t), self.tol, self.max_iters);
            out.push(chain.clone());
        }
        Ok(out)
    }
}

/// Frame of joint `j`: x along the bone leaving it (the last bone for the
/// end effector), z from the up vector, origin at the joint.
pub fn joint_frame(chain: &JointChain, j: usize) -> DMat4 {
    let bone = j.min(chain.bone_count() - 1);
    let x = chain.bone_direction(bone);
    let up = if (x.dot(DVec3::Z).abs() - 1.0).abs() <= 1e-6 {
        DVec3::X
    } else {
        DVec3::Z
    };
    let z = (up - up.dot(x) * x).normalize();
    let y = z.cross(x);
    DMat4::from_cols(
        x.extend(0.0),
        y.extend(0.0),
        z.extend(0.0),
        DVec4::from((chain.joints()[j], 1.0)),
    )
}

/// Accumulates every sub-shape at every frame, ordered by frame, then by
/// joint (ties in sub-shape order).
pub fn snapshot_sweep(job: &SweepJob) -> Result<InstanceSet> {
    let poses = job.poses()?;
    let mut set = InstanceSet::default();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(job.sub_shapes.len());
    for s in &job.sub_shapes {
        let id = set.add_mesh(s.name.clone(), s.mesh.clone());
        order.push((s.joint, id));
    }
    order.sort_by_key(|&(joint, id)| (joint, id));
    for chain in &poses {
        for &(joint, id) in &order {
            set.instances.push(Placement {
                mesh: id,
                transform: joint_frame(chain, joint),
            });
        }
    }
    Ok(set)
}
