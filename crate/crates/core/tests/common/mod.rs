#![allow(dead_code)]

use std::collections::VecDeque;

use mazepi::config::rng;
use mazepi::experiments::{generate_maze, MazeSpec};
use mazepi::solver::{policy_evaluation_exact, Policy};
use mazepi::{Action, Maze, RewardParams, StateId};
use rand::seq::SliceRandom;
use rand::Rng;

/// Seeded multi-modal maze with moderate obstacle densities.
pub fn random_maze(width: usize, height: usize, seed: u64) -> Maze {
    generate_maze(&MazeSpec::multi_modal(width, height, (0.2, 0.1, 0.05), seed)).unwrap()
}

/// Seeded reward parameters from the default tuning box.
pub fn random_params(seed: u64) -> RewardParams {
    let mut r = rng(seed);
    RewardParams::new(
        r.gen_range(-2.0..-0.2),
        r.gen_range(-20.0..0.0),
        r.gen_range(-30.0..0.0),
        r.gen_range(5.0..100.0),
        r.gen_range(0.5..0.99),
    )
    .unwrap()
}

/// A policy that reaches the goal from every state: each state points to its
/// parent in a BFS tree grown from the goal with shuffled expansion order.
pub fn proper_policy(maze: &Maze, seed: u64) -> Policy {
    let mut r = rng(seed);
    let mut pi = Policy::uniform(maze, Action::North);
    let mut seen = vec![false; maze.cell_count()];
    let mut queue = VecDeque::from([maze.goal()]);
    seen[maze.goal().0] = true;
    while let Some(s) = queue.pop_front() {
        let mut actions = Action::ALL;
        actions.shuffle(&mut r);
        for a in actions {
            // predecessor p moves into s by the opposite action
            let back = match a {
                Action::North => Action::South,
                Action::South => Action::North,
                Action::East => Action::West,
                Action::West => Action::East,
            };
            let (r0, c0) = maze.row_col(s);
            let (dr, dc) = a.delta();
            let (Some(row), Some(col)) = (r0.checked_add_signed(dr), c0.checked_add_signed(dc)) else {
                continue;
            };
            let Some(p) = maze.state_at(row, col) else {
                continue;
            };
            if !seen[p.0] && maze.transition(p, back) == s {
                seen[p.0] = true;
                pi.set(p, back);
                queue.push_back(p);
            }
        }
    }
    pi
}

/// Every deterministic policy over the non-goal states of `maze`.
pub fn all_policies(maze: &Maze) -> Vec<Policy> {
    let states: Vec<StateId> = maze.states().into_iter().filter(|&s| s != maze.goal()).collect();
    let total = 4usize.pow(states.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut pi = Policy::uniform(maze, Action::North);
            for &s in &states {
                pi.set(s, Action::from_index(code % 4).unwrap());
                code /= 4;
            }
            pi
        })
        .collect()
}

/// Best exact V(start) over all deterministic policies.
pub fn enumerated_optimum(maze: &Maze, params: &RewardParams) -> f64 {
    all_policies(maze)
        .iter()
        .map(|pi| policy_evaluation_exact(maze, params, pi).unwrap().get(maze.start()))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Small seeded maze with at most `max_states` non-goal states.
pub fn tiny_maze(seed: u64, max_states: usize) -> Maze {
    let shapes = [(2, 3), (3, 2), (1, 6), (2, 4), (3, 3), (4, 2), (1, 7)];
    let mut r = rng(seed);
    loop {
        let (w, h) = shapes[r.gen_range(0..shapes.len())];
        let cells: String = (0..h)
            .map(|_| {
                let row: String = (0..w)
                    .map(|_| match r.gen_range(0..10) {
                        0 | 1 => '#',
                        2 => 'B',
                        3 => 'O',
                        _ => '.',
                    })
                    .collect();
                row + "\n"
            })
            .collect();
        let mut chars: Vec<char> = cells.chars().collect();
        let idx: Vec<usize> = (0..chars.len()).filter(|&i| chars[i] != '\n').collect();
        let s = idx[r.gen_range(0..idx.len())];
        let g = idx[r.gen_range(0..idx.len())];
        if s == g {
            continue;
        }
        chars[s] = 'S';
        chars[g] = 'G';
        let text: String = chars.into_iter().collect();
        if let Ok(m) = Maze::parse(&text) {
            if m.traversable_count() - 1 <= max_states {
                return m;
            }
        }
    }
}

/// Linearly separable ranking data: `n` items with features spaced
/// `spacing` apart along a random unit direction plus orthogonal noise.
/// Returns the features (indexed by id) and the ids best first.
pub fn separable_items(seed: u64, n: usize, dim: usize, spacing: f64) -> (Vec<mazepi::tuner::FeatureVector>, Vec<usize>) {
    let mut r = rng(seed);
    let mut u: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut features = vec![mazepi::tuner::FeatureVector(vec![]); n];
    for (rank, &id) in order.iter().enumerate() {
        let t = spacing * (n - rank) as f64;
        let mut noise: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let along: f64 = noise.iter().zip(&u).map(|(a, b)| a * b).sum();
        noise.iter_mut().zip(&u).for_each(|(x, ui)| *x -= along * ui);
        features[id] = mazepi::tuner::FeatureVector(noise.iter().zip(&u).map(|(x, ui)| x + t * ui).collect());
    }
    (features, order)
}
