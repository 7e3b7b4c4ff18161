//! Dual-rate frame timelines and reference-frame allocation.
//!
//! Audio is synthesized one frame per 20 ms unit, video one frame per
//! 40 ms, so each video frame takes the unit active at every second audio
//! frame. Video frames are then mapped onto the finite set of reference
//! frames taken from the source clip.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{ContinuousUnitSeq, UnitId};

pub const AUDIO_FRAME_MS: u32 = 20;
pub const VIDEO_FRAME_MS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameTimeline {
    pub audio_units: Vec<UnitId>,
    pub video_units: Vec<UnitId>,
    pub ref_indices: Vec<usize>,
}

/// Number of video frames covering `audio_frames` audio frames.
pub fn video_frames_for(audio_frames: usize) -> usize {
    audio_frames.div_ceil((VIDEO_FRAME_MS / AUDIO_FRAME_MS) as usize)
}

/// Samples the unit at every even audio frame. `ref_indices` is left empty.
pub fn build_timeline(z: &ContinuousUnitSeq) -> Result<FrameTimeline> {
    if z.frame_ms() != AUDIO_FRAME_MS {
        return Err(Error::WrongFrameRate(z.frame_ms()));
    }
    let step = (VIDEO_FRAME_MS / AUDIO_FRAME_MS) as usize;
    Ok(FrameTimeline {
        audio_units: z.units().to_vec(),
        video_units: z.units().iter().step_by(step).copied().collect(),
        ref_indices: Vec::new(),
    })
}

/// How video frames are mapped onto reference frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefPolicy {
    /// Frame i uses reference i; fails when there are more video frames than references.
    OneToOne,
    /// Cycle through the references from the start.
    Wrap,
    /// Bounce back and forth: 0, 1, .., n-1, n-2, .., 1, 0, 1, ..
    Pingpong,
}

impl RefPolicy {
    pub fn name(self) -> &'static str {
        match self {
            RefPolicy::OneToOne => "one_to_one",
            RefPolicy::Wrap => "wrap",
            RefPolicy::Pingpong => "pingpong",
        }
    }
}

impl fmt::Display for RefPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RefPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_to_one" | "one-to-one" => Ok(RefPolicy::OneToOne),
            "wrap" => Ok(RefPolicy::Wrap),
            "pingpong" => Ok(RefPolicy::Pingpong),
            other => Err(Error::InvalidArgument(format!(
                "unknown reference policy '{other}' (expected one_to_one, wrap or pingpong)"
            ))),
        }
    }
}

/// Reference index for every video frame, and how many frames reuse a
/// reference already shown.
pub fn assign_reference_frames(
    n_video: usize,
    n_ref: usize,
    policy: RefPolicy,
) -> Result<(Vec<usize>, usize)> {
    if n_ref == 0 {
        return Err(Error::InvalidArgument("need at least one reference frame".into()));
    }
    let indices: Vec<usize> = match policy {
        RefPolicy::OneToOne => {
            if n_video > n_ref {
                return Err(Error::NotIsometric { n_video, n_ref });
            }
            (0..n_video).collect()
        }
        RefPolicy::Wrap => (0..n_video).map(|i| i % n_ref).collect(),
        RefPolicy::Pingpong => {
            if n_ref == 1 {
                vec![0; n_video]
            } else {
                let period = 2 * (n_ref - 1);
                (0..n_video)
                    .map(|i| {
                        let phase = i % period;
                        if phase < n_ref {
                            phase
                        } else {
                            period - phase
                        }
                    })
                    .collect()
            }
        }
    };
    let repeats = count_repeats(&indices);
    Ok((indices, repeats))
}

/// Frames whose reference index has appeared earlier in the sequence.
pub fn count_repeats(indices: &[usize]) -> usize {
    let mut seen = HashSet::with_capacity(indices.len());
    indices.iter().filter(|&&i| !seen.insert(i)).count()
}

/// Builds the timeline and fills in reference indices.
pub fn schedule(z: &ContinuousUnitSeq, n_ref: usize, policy: RefPolicy) -> Result<(FrameTimeline, usize)> {
    let mut timeline = build_timeline(z)?;
    let (refs, repeats) = assign_reference_frames(timeline.video_units.len(), n_ref, policy)?;
    timeline.ref_indices = refs;
    Ok((timeline, repeats))
}
