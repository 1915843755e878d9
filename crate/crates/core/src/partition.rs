//! Level-k basic intervals on the uniform `T`-adic grid of one component, the
//! surviving index sets and the preimages under the owning map.
//!
//! A level holds `d * T^(k-1)` cells. Cell `i = (t - 1) T^(k-1) + j` is the
//! `j`-th of the equal pieces of `I_{a_t}`. Geometry is computed on demand from a
//! shared [`ComponentGrid`], so only the survivor flags are stored per level.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::Component;
use crate::rational::{ceil_int, floor_int, int, AffineMap, Interval, Rational};
use crate::spec::RfifSpec;

/// Default cap on the partition depth.
pub const MAX_LEVEL: usize = 14;

/// Geometry shared by every level of one component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentGrid {
    pub component: usize,
    pub members: Vec<usize>,
    pub t: u64,
    /// Left endpoint `x_{a_t - 1}` of each member interval.
    pub bases: Vec<Rational>,
    /// `|I_n|`, common to all maps under uniform spacing.
    pub step: Rational,
    /// Inverse of `L_{a_t}` for each member.
    pub inverses: Vec<AffineMap>,
}

impl ComponentGrid {
    pub fn new(spec: &RfifSpec, comp: &Component) -> Self {
        ComponentGrid {
            component: comp.index,
            members: comp.members.clone(),
            t: comp.t,
            bases: comp.members.iter().map(|&n| spec.x(n - 1)).collect(),
            step: spec.interval(comp.members[0]).len(),
            inverses: comp
                .members
                .iter()
                .map(|&n| spec.map(n).l.inverse())
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// `T^(k-1)`: cells per member interval at level `k`.
    pub fn per_member(&self, k: usize) -> usize {
        (self.t as usize).pow(k as u32 - 1)
    }

    pub fn cell_count(&self, k: usize) -> usize {
        self.size() * self.per_member(k)
    }

    /// Cell length `h_k = |I_n| / T^(k-1)`.
    pub fn cell_len(&self, k: usize) -> Rational {
        self.step / int(self.per_member(k) as i128)
    }

    fn check(&self, k: usize, i: usize) -> Result<()> {
        let max = self.cell_count(k);
        if i == 0 || i > max {
            return Err(Error::IndexOutOfRange {
                level: k,
                index: i,
                max,
            });
        }
        Ok(())
    }

    /// `(t, j)`, both 1-based, for cell `i` at level `k`.
    fn split(&self, k: usize, i: usize) -> (usize, usize) {
        let per = self.per_member(k);
        ((i - 1) / per + 1, (i - 1) % per + 1)
    }

    /// `I^k_i`.
    pub fn basic_interval(&self, k: usize, i: usize) -> Result<Interval> {
        self.check(k, i)?;
        Ok(self.cell(k, i))
    }

    pub(crate) fn cell(&self, k: usize, i: usize) -> Interval {
        let (t, j) = self.split(k, i);
        let h = self.cell_len(k);
        let lo = self.bases[t - 1] + h * int(j as i128 - 1);
        Interval::new(lo, lo + h)
    }

    /// Map index `n` with `I^k_i ⊆ I_n`.
    pub fn owner(&self, k: usize, i: usize) -> usize {
        self.members[self.split(k, i).0 - 1]
    }

    /// `D^k_i = L_n^{-1}(I^k_i)` for the owner `n`.
    pub fn preimage(&self, k: usize, i: usize) -> Interval {
        let (t, _) = self.split(k, i);
        self.inverses[t - 1].image(&self.cell(k, i))
    }

    /// Index of the level-`k` cell equal to `iv`, if any.
    pub fn locate(&self, k: usize, iv: &Interval) -> Option<usize> {
        let h = self.cell_len(k);
        if iv.len() != h {
            return None;
        }
        let per = self.per_member(k);
        for (t, base) in self.bases.iter().enumerate() {
            let off = (iv.lo - base) / h;
            if off.is_integer() {
                let j = *off.numer();
                if (0..per as i128).contains(&j) {
                    return Some(t * per + j as usize + 1);
                }
            }
        }
        None
    }

    /// Indices of all level-`k` cells contained in `iv`, ascending.
    pub fn cells_in(&self, k: usize, iv: &Interval) -> Vec<usize> {
        let h = self.cell_len(k);
        let per = self.per_member(k) as i128;
        let mut out = Vec::new();
        for (t, base) in self.bases.iter().enumerate() {
            let first = ceil_int(&((iv.lo - base) / h)).max(0);
            let last = (floor_int(&((iv.hi - base) / h)) - 1).min(per - 1);
            for j in first..=last {
                out.push(t * per as usize + j as usize + 1);
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct PartitionLevel {
    pub grid: Arc<ComponentGrid>,
    pub k: usize,
    /// `survives[i - 1]` iff `i ∈ Θ_k`.
    pub survives: Vec<bool>,
    /// Sorted `Θ_k`.
    pub theta: Vec<usize>,
}

impl PartitionLevel {
    pub fn component(&self) -> usize {
        self.grid.component
    }

    pub fn cell_count(&self) -> usize {
        self.grid.cell_count(self.k)
    }

    pub fn interval(&self, i: usize) -> Interval {
        self.grid.cell(self.k, i)
    }

    pub fn owner(&self, i: usize) -> usize {
        self.grid.owner(self.k, i)
    }

    pub fn preimage(&self, i: usize) -> Interval {
        self.grid.preimage(self.k, i)
    }

    pub fn is_survivor(&self, i: usize) -> bool {
        self.survives[i - 1]
    }

    /// `Θ̃_k = {(i - 1) T + s : i ∈ Θ_k, 1 <= s <= T}`, indices at level `k + 1`.
    pub fn theta_tilde(&self) -> Vec<usize> {
        let t = self.grid.t as usize;
        self.theta
            .iter()
            .flat_map(|&i| (1..=t).map(move |s| (i - 1) * t + s))
            .collect()
    }

    /// Children of cell `i` at level `k + 1`.
    pub fn children(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        let t = self.grid.t as usize;
        (i - 1) * t + 1..=i * t
    }

    /// `B_k` as maximal closed intervals.
    pub fn basic_set(&self) -> Vec<Interval> {
        let mut out: Vec<Interval> = Vec::new();
        for &i in &self.theta {
            let c = self.interval(i);
            match out.last_mut() {
                Some(last) if last.hi == c.lo => last.hi = c.hi,
                _ => out.push(c),
            }
        }
        out
    }
}

/// `D^k_i` for a level produced by [`build_partition`].
pub fn domain_interval(level: &PartitionLevel, i: usize) -> Result<Interval> {
    level.grid.check(level.k, i)?;
    Ok(level.preimage(i))
}

pub fn basic_interval(level: &PartitionLevel, i: usize) -> Result<GridInterval> {
    let interval = level.grid.basic_interval(level.k, i)?;
    Ok(GridInterval {
        component: level.component(),
        k: level.k,
        i,
        interval,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridInterval {
    pub component: usize,
    pub k: usize,
    pub i: usize,
    pub interval: Interval,
}

/// Levels `1..=kmax` for one component.
pub fn build_partition(
    spec: &RfifSpec,
    comp: &Component,
    kmax: usize,
) -> Result<Vec<PartitionLevel>> {
    build_partition_capped(spec, comp, kmax, MAX_LEVEL)
}

pub fn build_partition_capped(
    spec: &RfifSpec,
    comp: &Component,
    kmax: usize,
    cap: usize,
) -> Result<Vec<PartitionLevel>> {
    if kmax == 0 || kmax > cap {
        return Err(Error::LevelCap {
            requested: kmax,
            cap,
        });
    }
    let grid = Arc::new(ComponentGrid::new(spec, comp));
    let d = grid.size();
    let mut levels = vec![PartitionLevel {
        grid: grid.clone(),
        k: 1,
        survives: vec![true; d],
        theta: (1..=d).collect(),
    }];
    for k in 2..=kmax {
        let prev = levels.last().expect("level 1 present");
        let count = grid.cell_count(k);
        let survives: Vec<bool> = (1..=count)
            .map(|i| {
                grid.locate(k - 1, &grid.preimage(k, i))
                    .is_some_and(|j| prev.is_survivor(j))
            })
            .collect();
        let theta = (1..=count).filter(|&i| survives[i - 1]).collect();
        levels.push(PartitionLevel {
            grid: grid.clone(),
            k,
            survives,
            theta,
        });
    }
    Ok(levels)
}

/// True iff `Θ_2 = Θ̃_1`, in which case every level keeps all cells.
pub fn stationarity_check(levels: &[PartitionLevel]) -> bool {
    levels.len() >= 2 && levels[1].theta == levels[0].theta_tilde()
}
