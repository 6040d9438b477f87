//! Measurement-angle policies: a fixed angle, the locally optimal
//! single-copy rule, or a solved per-stage angle table.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::qubit_model::{osm_angle, StateFamily};

/// Upper clamp for angles: the basis is parametrized on `[0, pi/2)`.
pub(crate) const ANGLE_MAX: f64 = FRAC_PI_2 - 1e-12;

/// A measurement strategy: how to pick the angle for the next copy
/// given how many copies remain and the current credulity.
#[derive(Debug, Clone)]
pub enum AnglePolicy {
    /// The same angle for every copy irrespective of the credulity.
    Fixed(f64),
    /// The locally optimal rule: measure each copy in the single-copy
    /// optimal basis for the current credulity.
    OsmRule,
    /// A solved table of angles indexed by (copies remaining, credulity
    /// sample), queried off-grid by cubic interpolation.
    Table(AngleTable),
}

impl AnglePolicy {
    /// The unbiased fixed policy `phi = pi/4`, i.e. the LOF scheme for
    /// equal priors.
    pub fn unbiased() -> AnglePolicy {
        AnglePolicy::Fixed(FRAC_PI_4)
    }

    /// Validating constructor for a fixed-angle policy.
    pub fn fixed(phi: f64) -> Result<AnglePolicy> {
        if !phi.is_finite() || !(0.0..FRAC_PI_2).contains(&phi) {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: phi,
                constraint: "0 <= phi < pi/2",
            });
        }
        Ok(AnglePolicy::Fixed(phi))
    }

    /// Angle for the next measurement when `copies_remaining` copies
    /// (including the one about to be measured) are left and the
    /// current credulity is `p`.
    pub fn angle(&self, family: &StateFamily, copies_remaining: usize, p: f64) -> f64 {
        debug_assert!(copies_remaining >= 1);
        match self {
            AnglePolicy::Fixed(phi) => *phi,
            AnglePolicy::OsmRule => osm_angle(p, family.alpha()),
            AnglePolicy::Table(table) => table.angle_at(copies_remaining, p),
        }
    }

    /// Largest number of copies this policy can serve, if bounded.
    pub fn max_copies(&self) -> Option<usize> {
        match self {
            AnglePolicy::Table(table) => Some(table.n_copies()),
            _ => None,
        }
    }

    /// Errors when the policy cannot resolve every stage of an
    /// `n_copies`-copy run.
    pub fn require_resolvable(&self, n_copies: usize) -> Result<()> {
        match self.max_copies() {
            Some(max) if n_copies > max => Err(Error::SizeLimit {
                what: "angle-table policy",
                requested: n_copies,
                ceiling: max,
            }),
            _ => Ok(()),
        }
    }

    /// True when the policy is symmetric under `p -> 1 - p`,
    /// `phi -> pi/2 - phi` (the equal-prior mirror).
    pub fn is_mirror_symmetric(&self) -> bool {
        match self {
            AnglePolicy::Fixed(phi) => *phi == FRAC_PI_4,
            AnglePolicy::OsmRule => true,
            AnglePolicy::Table(table) => table.mirror_symmetric,
        }
    }
}

/// Angle table over the credulity grid, one column per number of
/// copies remaining (column 1 is the final measurement).
#[derive(Debug, Clone)]
pub struct AngleTable {
    grid: GridSpec,
    /// `columns[m - 1][i]` is the angle with `m` copies remaining at
    /// grid sample `i`.
    columns: Vec<Vec<f64>>,
    /// Set when the table was built by a mirror-symmetric construction.
    pub(crate) mirror_symmetric: bool,
}

impl AngleTable {
    pub(crate) fn new(grid: GridSpec, columns: Vec<Vec<f64>>, mirror_symmetric: bool) -> Self {
        debug_assert!(columns.iter().all(|c| c.len() == grid.len()));
        AngleTable {
            grid,
            columns,
            mirror_symmetric,
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of stages (equals the `N` the table was solved for).
    pub fn n_copies(&self) -> usize {
        self.columns.len()
    }

    /// Raw column for `m` copies remaining.
    pub fn column(&self, copies_remaining: usize) -> &[f64] {
        &self.columns[copies_remaining - 1]
    }

    /// Interpolated angle at credulity `p` with `m` copies remaining,
    /// clamped to `[0, pi/2)`.
    pub fn angle_at(&self, copies_remaining: usize, p: f64) -> f64 {
        let column = self.column(copies_remaining);
        self.grid.interpolate(column, p).clamp(0.0, ANGLE_MAX)
    }

    /// Stage-major view for an `n`-copy run: stage 1 is measured first.
    pub fn to_stage_major(&self) -> AngleTableJson {
        let n = self.n_copies();
        AngleTableJson {
            s: self.grid.len(),
            n_copies: n,
            stages: (1..=n)
                .map(|stage| StageAngles {
                    stage,
                    copies_remaining: n - stage + 1,
                    angles: self.columns[n - stage].clone(),
                })
                .collect(),
        }
    }

    /// Rebuild a table from its stage-major serialization.
    pub fn from_stage_major(json: &AngleTableJson) -> Result<Self> {
        let grid = GridSpec::new(json.s)?;
        let n = json.n_copies;
        if json.stages.len() != n {
            return Err(Error::InvalidParameter {
                name: "stages",
                value: json.stages.len() as f64,
                constraint: "one entry per stage",
            });
        }
        let mut columns = vec![Vec::new(); n];
        for stage in &json.stages {
            if stage.copies_remaining == 0
                || stage.copies_remaining > n
                || stage.angles.len() != json.s
            {
                return Err(Error::InvalidParameter {
                    name: "stage",
                    value: stage.stage as f64,
                    constraint: "consistent stage shape",
                });
            }
            columns[stage.copies_remaining - 1] = stage.angles.clone();
        }
        Ok(AngleTable::new(grid, columns, false))
    }

    /// CSV export: `stage,sample_index,credulity,angle`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "stage,sample_index,credulity,angle")?;
        let n = self.n_copies();
        for stage in 1..=n {
            let column = &self.columns[n - stage];
            for (i, p) in self.grid.samples() {
                writeln!(w, "{},{},{:.16e},{:.16e}", stage, i, p, column[i])?;
            }
        }
        Ok(())
    }
}

/// Documented stage-major JSON structure for angle tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleTableJson {
    pub s: usize,
    pub n_copies: usize,
    pub stages: Vec<StageAngles>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageAngles {
    pub stage: usize,
    pub copies_remaining: usize,
    pub angles: Vec<f64>,
}
