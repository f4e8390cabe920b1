//! FABRIK (Forward And Backward Reaching Inverse Kinematics) for a single
//! unbranched chain with a pinned root.
//!
//! Each iteration is one backward and one forward pass, followed by an
//! over-relaxation step: the pass displacement is extrapolated by factors
//! 1, 2, 4, .., 1024, each candidate is made rigid again with a forward
//! pass, and the candidate with the smallest end error is kept (the plain
//! pass result when none is better). Near full extension and tight folds
//! plain FABRIK converges linearly with a rate close to 1; the
//! extrapolation skips most of that tail.

use glam::DVec3;
use serde::{Deserialize, Serialize};

/// Joint positions from the root (index 0) to the end effector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointChain {
    bone_lengths: Vec<f64>,
    joints: Vec<DVec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkReport {
    pub iterations: usize,
    /// Distance from the end effector to the target after solving.
    pub error: f64,
    pub reachable: bool,
}

impl JointChain {
    /// A straight chain from `root` along `direction`.
    pub fn straight(root: DVec3, bone_lengths: Vec<f64>, direction: DVec3) -> Self {
        let dir = direction.try_normalize().unwrap_or(DVec3::X);
        let mut joints = Vec::with_capacity(bone_lengths.len() + 1);
        joints.push(root);
        for &len in &bone_lengths {
            let last = *joints.last().unwrap();
            joints.push(last + dir * len);
        }
        Self { bone_lengths, joints }
    }

    /// Chain with explicit joints; bone lengths are measured from them.
    pub fn from_joints(joints: Vec<DVec3>) -> Self {
        let bone_lengths = joints.windows(2).map(|w| (w[1] - w[0]).length()).collect();
        Self { bone_lengths, joints }
    }

    pub fn validate_lengths(lengths: &[f64]) -> Result<(), String> {
        if lengths.is_empty() {
            return Err("chain needs at least one bone".into());
        }
        if let Some(l) = lengths.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(format!("bone lengths must be > 0, got {l}"));
        }
        Ok(())
    }

    pub fn bone_lengths(&self) -> &[f64] {
        &self.bone_lengths
    }

    pub fn joints(&self) -> &[DVec3] {
        &self.joints
    }

    pub fn root(&self) -> DVec3 {
        self.joints[0]
    }

    pub fn end(&self) -> DVec3 {
        *self.joints.last().unwrap()
    }

    pub fn reach(&self) -> f64 {
        self.bone_lengths.iter().sum()
    }

    pub fn bone_count(&self) -> usize {
        self.bone_lengths.len()
    }

    /// Moves the whole chain rigidly so the root lands on `root`.
    pub fn translate_root(&mut self, root: DVec3) {
        let delta = root - self.joints[0];
        for j in &mut self.joints {
            *j += delta;
        }
    }

    /// Direction of bone `i` (joint `i` to `i + 1`).
    pub fn bone_direction(&self, i: usize) -> DVec3 {
        (self.joints[i + 1] - self.joints[i])
            .try_normalize()
            .unwrap_or(DVec3::X)
    }

    /// Solves toward `target` in place with the root pinned.
    pub fn solve(&mut self, target: DVec3, tol: f64, max_iters: usize) -> IkReport {
        let root = self.joints[0];
        let n = self.bone_lengths.len();

        if (target - root).length() >= self.reach() {
            let dir = (target - root).try_normalize().unwrap_or(DVec3::X);
            for i in 0..n {
                self.joints[i + 1] = self.joints[i] + dir * self.bone_lengths[i];
            }
            return IkReport {
                iterations: 0,
                error: (self.end() - target).length(),
                reachable: false,
            };
        }

        let mut error = (self.end() - target).length();
        let mut iterations = 0;
        let mut before = self.joints.clone();
        let mut trial = self.joints.clone();
        while error > tol && iterations < max_iters {
            before.copy_from_slice(&self.joints);
            // Backward: pin the end on the target and walk to the root.
            self.joints[n] = target;
            for i in (0..n).rev() {
                let d = place(self.joints[i + 1], self.joints[i], self.bone_lengths[i]);
                self.joints[i] = d;
            }
            // Forward: re-pin the root and walk back out.
            forward(&mut self.joints, &self.bone_lengths, root);
            iterations += 1;
            error = (self.end() - target).length();

            let mut best: Option<(f64, f64)> = None;
            for k in 0..=OVER_RELAX_STEPS {
                let w = f64::from(1u32 << k);
                extrapolate(&mut trial, &self.joints, &before, w);
                forward(&mut trial, &self.bone_lengths, root);
                let e = (trial[n] - target).length();
                if e < best.map_or(error, |b| b.1) {
                    best = Some((w, e));
                }
            }
            if let Some((w, e)) = best {
                extrapolate(&mut trial, &self.joints, &before, w);
                forward(&mut trial, &self.bone_lengths, root);
                self.joints.copy_from_slice(&trial);
                error = e;
            }
        }
        IkReport {
            iterations,
            error,
            reachable: true,
        }
    }
}

const OVER_RELAX_STEPS: u32 = 10;

/// `out = now + w * (now - before)`.
fn extrapolate(out: &mut [DVec3], now: &[DVec3], before: &[DVec3], w: f64) {
    for ((o, a), b) in out.iter_mut().zip(now).zip(before) {
        *o = *a + (*a - *b) * w;
    }
}

/// Re-pins `root` and restores every bone length walking outward.
fn forward(joints: &mut [DVec3], lengths: &[f64], root: DVec3) {
    joints[0] = root;
    for (i, &len) in lengths.iter().enumerate() {
        joints[i + 1] = place(joints[i], joints[i + 1], len);
    }
}

/// The point at distance `len` from `anchor` toward `toward`.
fn place(anchor: DVec3, toward: DVec3, len: f64) -> DVec3 {
    let dir = (toward - anchor).try_normalize().unwrap_or(DVec3::X);
    anchor + dir * len
}

/// Non-mutating form of [`JointChain::solve`].
pub fn solve_ik(chain: &JointChain, target: DVec3, tol: f64, max_iters: usize) -> JointChain {
    let mut out = chain.clone();
    out.solve(target, tol, max_iters);
    out
}
