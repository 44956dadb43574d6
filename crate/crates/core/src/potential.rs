//! Piecewise-constant multi-well profiles inside hard walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// N equal wells separated by N−1 identical rectangular barriers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiWellSpec {
    /// nm
    pub total_length: f64,
    pub well_count: usize,
    /// nm
    pub barrier_width: f64,
    /// eV
    pub barrier_height: f64,
    /// Potential inside the wells, eV.
    #[serde(default)]
    pub well_depth_reference: f64,
}

impl MultiWellSpec {
    pub fn new(total_length: f64, well_count: usize, barrier_width: f64, barrier_height: f64) -> Self {
        Self {
            total_length,
            well_count,
            barrier_width,
            barrier_height,
            well_depth_reference: 0.0,
        }
    }

    /// The infinite square well: one well spanning the whole length.
    pub fn single_well(total_length: f64) -> Self {
        Self::new(total_length, 1, 0.0, 0.0)
    }

    pub fn barrier_count(&self) -> usize {
        self.well_count.saturating_sub(1)
    }

    pub fn well_width(&self) -> f64 {
        (self.total_length - self.barrier_count() as f64 * self.barrier_width) / self.well_count as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.well_count == 0 {
            return Err(Error::Geometry("well_count must be at least 1".into()));
        }
        if !(self.total_length.is_finite() && self.total_length > 0.0) {
            return Err(Error::Geometry(format!(
                "total_length must be positive, got {} nm",
                self.total_length
            )));
        }
        if !(self.barrier_width.is_finite() && self.barrier_width >= 0.0) {
            return Err(Error::Geometry(format!(
                "barrier_width must be non-negative, got {} nm",
                self.barrier_width
            )));
        }
        if !(self.barrier_height.is_finite() && self.barrier_height >= 0.0) {
            return Err(Error::Geometry(format!(
                "barrier_height must be non-negative, got {} eV",
                self.barrier_height
            )));
        }
        if !self.well_depth_reference.is_finite() {
            return Err(Error::Geometry("well_depth_reference must be finite".into()));
        }
        let barriers = self.barrier_count() as f64 * self.barrier_width;
        if barriers >= self.total_length || self.well_width() <= 0.0 {
            return Err(Error::Geometry(format!(
                "barrier_width {} nm is too wide: {} barriers occupy {} nm of the {} nm total_length",
                self.barrier_width,
                self.barrier_count(),
                barriers,
                self.total_length
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

/// Which part of the profile a grid node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Well(usize),
    Barrier(usize),
}

/// How node values are taken from the piecewise-constant profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingRule {
    /// Average of the profile over the node's cell `[x − h/2, x + h/2]`.
    /// Nodes whose cell lies inside one segment get that segment's value.
    #[default]
    CellAverage,
    /// Value of the segment containing the node; edges go to the left segment.
    NodeMembership,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    spec: MultiWellSpec,
    segments: Vec<Segment>,
    well_regions: Vec<(f64, f64)>,
}

pub fn build_multiwell(spec: MultiWellSpec) -> Result<PotentialProfile> {
    spec.validate()?;
    let well = spec.well_width();
    let pitch = well + spec.barrier_width;
    let n = spec.well_count;

    let mut segments = Vec::with_capacity(2 * n - 1);
    let mut well_regions = Vec::with_capacity(n);
    for k in 0..n {
        let start = k as f64 * pitch;
        let end = if k + 1 == n { spec.total_length } else { start + well };
        segments.push(Segment {
            start,
            end,
            value: spec.well_depth_reference,
        });
        well_regions.push((start, end));
        if k + 1 < n {
            segments.push(Segment {
                start: end,
                end: (k + 1) as f64 * pitch,
                value: spec.barrier_height,
            });
        }
    }
    Ok(PotentialProfile {
        spec,
        segments,
        well_regions,
    })
}

impl PotentialProfile {
    pub fn spec(&self) -> &MultiWellSpec {
        &self.spec
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn well_regions(&self) -> &[(f64, f64)] {
        &self.well_regions
    }

    pub fn well_count(&self) -> usize {
        self.spec.well_count
    }

    pub fn total_length(&self) -> f64 {
        self.spec.total_length
    }

    /// Segment containing `x`; an edge belongs to the segment on its left.
    fn segment_index(&self, x: f64) -> usize {
        self.segments
            .iter()
            .position(|s| x <= s.end)
            .unwrap_or(self.segments.len() - 1)
    }

    fn mirrored_segment(&self, index: usize, mirrored: bool) -> usize {
        if mirrored {
            self.segments.len() - 1 - index
        } else {
            index
        }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.segments[self.segment_index(x)].value
    }

    /// Nodes right of centre are classified through their mirror image so
    /// that region membership is exactly symmetric.
    fn canonical_node(grid: &Grid, i: usize) -> (usize, bool) {
        let m = grid.mirror(i);
        if m < i {
            (m, true)
        } else {
            (i, false)
        }
    }

    pub fn region_of_node(&self, grid: &Grid, i: usize) -> Region {
        let (j, mirrored) = Self::canonical_node(grid, i);
        let s = self.mirrored_segment(self.segment_index(grid.x(j)), mirrored);
        if s.is_multiple_of(2) {
            Region::Well(s / 2)
        } else {
            Region::Barrier(s / 2)
        }
    }

    pub fn node_regions(&self, grid: &Grid) -> Result<Vec<Region>> {
        grid.ensure_length(self.total_length())?;
        Ok((0..grid.points()).map(|i| self.region_of_node(grid, i)).collect())
    }

    fn cell_average(&self, x: f64, h: f64) -> f64 {
        let (lo, hi) = (x - 0.5 * h, x + 0.5 * h);
        let first = self.segment_index(lo.max(0.0));
        let last = self.segment_index(hi.min(self.total_length()));
        if first == last {
            return self.segments[first].value;
        }
        self.segments[first..=last]
            .iter()
            .map(|s| s.value * (s.end.min(hi) - s.start.max(lo)).max(0.0))
            .sum::<f64>()
            / h
    }
}

pub fn sample(profile: &PotentialProfile, grid: &Grid) -> Result<Vec<f64>> {
    sample_with(profile, grid, SamplingRule::default())
}

/// Potential value (eV) at every interior node.
///
/// Values are computed on the left half and mirrored, so the sampled
/// profile is exactly symmetric.
pub fn sample_with(profile: &PotentialProfile, grid: &Grid, rule: SamplingRule) -> Result<Vec<f64>> {
    grid.ensure_length(profile.total_length())?;
    let h = grid.spacing();
    Ok((0..grid.points())
        .map(|i| {
            let (j, _) = PotentialProfile::canonical_node(grid, i);
            let x = grid.x(j);
            match rule {
                SamplingRule::NodeMembership => profile.value_at(x),
                SamplingRule::CellAverage => profile.cell_average(x, h),
            }
        })
        .collect())
}
