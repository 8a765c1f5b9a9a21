//! Seeded generators for the two scenario families.

use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::config::rng;
use crate::maze::{CellKind, Maze, MazeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("{0}")]
    Spec(String),
    #[error("generated maze failed validation: {0}")]
    Invalid(#[from] MazeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MazeKind {
    /// Horizontal lanes joined by end stems; lane `i` (0 = shortest) carries
    /// `bump_step * (lane_count - 1 - i)` speed bumps.
    MultiLane { lane_count: usize, bump_step: usize },
    /// Independent scatter of walls, bumps and oil spills, start top-left,
    /// goal bottom-right.
    MultiModal {
        wall_density: f64,
        bump_density: f64,
        oil_density: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MazeSpec {
    pub kind: MazeKind,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl MazeSpec {
    pub fn multi_lane(width: usize, lane_count: usize, bump_step: usize, seed: u64) -> Self {
        MazeSpec {
            kind: MazeKind::MultiLane {
                lane_count,
                bump_step,
            },
            width,
            height: 2 * lane_count.max(1) - 1,
            seed,
        }
    }

    pub fn multi_modal(width: usize, height: usize, densities: (f64, f64, f64), seed: u64) -> Self {
        MazeSpec {
            kind: MazeKind::MultiModal {
                wall_density: densities.0,
                bump_density: densities.1,
                oil_density: densities.2,
            },
            width,
            height,
            seed,
        }
    }
}

pub fn generate_maze(spec: &MazeSpec) -> Result<Maze, GenerateError> {
    match spec.kind {
        MazeKind::MultiLane {
            lane_count,
            bump_step,
        } => multi_lane(spec.width, spec.height, lane_count, bump_step, spec.seed),
        MazeKind::MultiModal {
            wall_density,
            bump_density,
            oil_density,
        } => multi_modal(
            spec.width,
            spec.height,
            [wall_density, bump_density, oil_density],
            spec.seed,
        ),
    }
}

fn multi_lane(
    width: usize,
    height: usize,
    lanes: usize,
    bump_step: usize,
    seed: u64,
) -> Result<Maze, GenerateError> {
    if lanes < 1 {
        return Err(GenerateError::Spec("lane_count must be at least 1".into()));
    }
    if width < 5 {
        return Err(GenerateError::Spec(format!("width {width} below the minimum of 5")));
    }
    if height < 2 * lanes - 1 {
        return Err(GenerateError::Spec(format!(
            "height {height} cannot hold {lanes} lanes (need {})",
            2 * lanes - 1
        )));
    }
    let interior = width - 2;
    if bump_step * (lanes - 1) > interior {
        return Err(GenerateError::Spec(format!(
            "{} bumps do not fit in a lane with {interior} interior cells",
            bump_step * (lanes - 1)
        )));
    }
    let mut cells = vec![CellKind::Wall; width * height];
    let mut rng = rng(seed);
    for lane in 0..lanes {
        let row = 2 * lane;
        for col in 0..width {
            cells[row * width + col] = CellKind::Free;
        }
        if lane + 1 < lanes {
            cells[(row + 1) * width] = CellKind::Free;
            cells[(row + 1) * width + width - 1] = CellKind::Free;
        }
        let bumps = bump_step * (lanes - 1 - lane);
        for k in sample(&mut rng, interior, bumps).iter() {
            cells[row * width + 1 + k] = CellKind::SpeedBump;
        }
    }
    cells[0] = CellKind::Start;
    cells[width - 1] = CellKind::Goal;
    Ok(Maze::from_cells(width, height, cells)?)
}

fn multi_modal(width: usize, height: usize, densities: [f64; 3], seed: u64) -> Result<Maze, GenerateError> {
    if width * height < 2 {
        return Err(GenerateError::Spec("maze needs at least two cells".into()));
    }
    if densities.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(GenerateError::Spec(format!("densities {densities:?} outside [0, 1]")));
    }
    let total: f64 = densities.iter().sum();
    if total > 0.95 {
        return Err(GenerateError::Spec(format!("densities sum to {total}, above 0.95")));
    }
    let mut rng = rng(seed);
    let n = width * height;
    let (start, goal) = (0, n - 1);
    let mut cells: Vec<CellKind> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < densities[0] {
                CellKind::Wall
            } else if u < densities[0] + densities[1] {
                CellKind::SpeedBump
            } else if u < total {
                CellKind::OilSpill
            } else {
                CellKind::Free
            }
        })
        .collect();
    cells[start] = CellKind::Start;
    cells[goal] = CellKind::Goal;
    carve_path(&mut cells, width, height, start, goal);
    Ok(Maze::from_cells(width, height, cells)?)
}

/// Opens the fewest walls needed to connect `from` and `to` (0-1 BFS with
/// walls costing one).
fn carve_path(cells: &mut [CellKind], width: usize, height: usize, from: usize, to: usize) {
    let n = cells.len();
    let mut dist = vec![usize::MAX; n];
    let mut prev = vec![usize::MAX; n];
    let mut deque = VecDeque::from([from]);
    dist[from] = 0;
    while let Some(i) = deque.pop_front() {
        let (r, c) = (i / width, i % width);
        let mut neighbors = Vec::with_capacity(4);
        if r > 0 {
            neighbors.push(i - width);
        }
        if r + 1 < height {
            neighbors.push(i + width);
        }
        if c + 1 < width {
            neighbors.push(i + 1);
        }
        if c > 0 {
            neighbors.push(i - 1);
        }
        for j in neighbors {
            let w = usize::from(cells[j] == CellKind::Wall);
            if dist[i] + w < dist[j] {
                dist[j] = dist[i] + w;
                prev[j] = i;
                if w == 0 {
                    deque.push_front(j);
                } else {
                    deque.push_back(j);
                }
            }
        }
    }
    let mut i = to;
    while i != from {
        if cells[i] == CellKind::Wall {
            cells[i] = CellKind::Free;
        }
        i = prev[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorter_lane_has_more_bumps() {
        let m = generate_maze(&MazeSpec::multi_lane(9, 2, 2, 4)).unwrap();
        let row_bumps = |row: usize| {
            (0..m.width())
                .filter(|&c| m.cells()[row * m.width() + c] == CellKind::SpeedBump)
                .count()
        };
        assert!(row_bumps(0) > row_bumps(2));
        assert_eq!(m.height(), 3);
    }

    #[test]
    fn zero_densities_give_open_maze() {
        let m = generate_maze(&MazeSpec::multi_modal(10, 8, (0.0, 0.0, 0.0), 3)).unwrap();
        assert_eq!(m.traversable_count(), 80);
        assert_eq!(m.count_kind(CellKind::Free), 78);
    }

    #[test]
    fn same_seed_same_bytes() {
        for spec in [
            MazeSpec::multi_lane(12, 3, 2, 8),
            MazeSpec::multi_modal(15, 15, (0.3, 0.1, 0.05), 8),
        ] {
            assert_eq!(
                generate_maze(&spec).unwrap().to_text(),
                generate_maze(&spec).unwrap().to_text()
            );
        }
    }

    #[test]
    fn dense_walls_are_repaired() {
        let m = generate_maze(&MazeSpec::multi_modal(15, 15, (0.9, 0.0, 0.0), 1)).unwrap();
        assert!(m.count_kind(CellKind::Wall) > 100);
    }

    #[test]
    fn bad_specs() {
        assert!(generate_maze(&MazeSpec::multi_lane(4, 2, 1, 0)).is_err());
        assert!(generate_maze(&MazeSpec::multi_lane(6, 3, 3, 0)).is_err());
        assert!(generate_maze(&MazeSpec::multi_modal(5, 5, (0.5, 0.3, 0.2), 0)).is_err());
        assert!(generate_maze(&MazeSpec::multi_modal(5, 5, (-0.1, 0.0, 0.0), 0)).is_err());
        assert!(generate_maze(&MazeSpec::multi_modal(1, 1, (0.0, 0.0, 0.0), 0)).is_err());
    }
}
