//! C ABI over the `mazepi` solver.
//!
//! Objects are opaque handles created by `mp_*` constructors and released by
//! the matching `*_free`. Every call returns an [`MpStatus`]; on failure
//! [`mp_last_error_message`] describes the error on the calling thread.
//! Status values 2 and 3 mean the same as the CLI exit codes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use mazepi::experiments::{generate_maze, MazeSpec};
use mazepi::solver::{self, Solution};
use mazepi::{Maze, RewardParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ComputeFailed = 3,
    Panic = 4,
    OutOfRange = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpRewardParams {
    pub step_cost: f64,
    pub bump_penalty: f64,
    pub oil_penalty: f64,
    pub goal_reward: f64,
    pub gamma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpStats {
    pub sweeps: u64,
    pub improvement_rounds: u64,
    pub residual: f64,
    pub evaluations: u64,
    /// Undiscounted return of the greedy rollout from the start.
    pub accumulated_reward: f64,
    /// Moves in that rollout.
    pub path_length: u64,
    /// 1 when the rollout reached the goal.
    pub reached_goal: i32,
}

/// Opaque maze handle.
pub struct MpMaze {
    maze: Maze,
}

/// Opaque solve result.
pub struct MpSolution {
    maze: Maze,
    solution: Solution,
    stats: MpStats,
}

/// Action codes returned by [`mp_solution_action`].
pub const MP_ACTION_NONE: i32 = -1;
pub const MP_ACTION_NORTH: i32 = 0;
pub const MP_ACTION_SOUTH: i32 = 1;
pub const MP_ACTION_EAST: i32 = 2;
pub const MP_ACTION_WEST: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Failure = (MpStatus, String);

fn guard<F>(f: F) -> MpStatus
where
    F: FnOnce() -> Result<(), Failure> + UnwindSafe,
{
    match catch_unwind(f) {
        Ok(Ok(())) => {
            set_error("");
            MpStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MpStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (MpStatus::NullPointer, format!("{what} is null"))
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    (MpStatus::InvalidInput, e.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn cell(maze: &Maze, row: usize, col: usize) -> Result<mazepi::StateId, Failure> {
    maze.state_at(row, col).ok_or_else(|| {
        (
            MpStatus::OutOfRange,
            format!("({row}, {col}) is outside the maze or a wall"),
        )
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `mp_*` call on the same thread.
#[no_mangle]
pub extern "C" fn mp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Writes the default reward parameters.
///
/// # Safety
/// `out` must be null or point to writable memory for one `MpRewardParams`.
#[no_mangle]
pub unsafe extern "C" fn mp_default_params(out: *mut MpRewardParams) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        let p = RewardParams::default();
        *out = MpRewardParams {
            step_cost: p.step_cost,
            bump_penalty: p.bump_penalty,
            oil_penalty: p.oil_penalty,
            goal_reward: p.goal_reward,
            gamma: p.gamma,
        };
        Ok(())
    })
}

fn publish_maze(maze: Maze, out: &mut *mut MpMaze) {
    *out = Box::into_raw(Box::new(MpMaze { maze }));
}

/// Parses maze text (`S`, `G`, `.`, `#`, `B`, `O`; one row per line).
///
/// # Safety
/// `text` must be null or a NUL-terminated string; `out` must be null or
/// writable. On success `*out` owns a maze to release with [`mp_maze_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_maze_parse(text: *const c_char, out: *mut *mut MpMaze) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let s = unsafe { CStr::from_ptr(text) }.to_str().map_err(invalid)?;
        publish_maze(Maze::parse(s).map_err(invalid)?, out);
        Ok(())
    })
}

/// Seeded multi-lane maze.
///
/// # Safety
/// `out` as for [`mp_maze_parse`].
#[no_mangle]
pub unsafe extern "C" fn mp_maze_generate_multi_lane(
    width: usize,
    lanes: usize,
    bump_step: usize,
    seed: u64,
    out: *mut *mut MpMaze,
) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        *out = ptr::null_mut();
        let maze = generate_maze(&MazeSpec::multi_lane(width, lanes, bump_step, seed)).map_err(invalid)?;
        publish_maze(maze, out);
        Ok(())
    })
}

/// Seeded multi-modal maze with the given obstacle densities.
///
/// # Safety
/// `out` as for [`mp_maze_parse`].
#[no_mangle]
pub unsafe extern "C" fn mp_maze_generate_multi_modal(
    width: usize,
    height: usize,
    wall_density: f64,
    bump_density: f64,
    oil_density: f64,
    seed: u64,
    out: *mut *mut MpMaze,
) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        *out = ptr::null_mut();
        let spec = MazeSpec::multi_modal(width, height, (wall_density, bump_density, oil_density), seed);
        publish_maze(generate_maze(&spec).map_err(invalid)?, out);
        Ok(())
    })
}

/// # Safety
/// `maze` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_maze_free(maze: *mut MpMaze) {
    if !maze.is_null() {
        drop(unsafe { Box::from_raw(maze) });
    }
}

/// # Safety
/// `maze` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_maze_dimensions(maze: *const MpMaze, width: *mut usize, height: *mut usize) -> MpStatus {
    guard(|| {
        let m = unsafe { deref(maze, "maze")? };
        let w = unsafe { out_ptr(width, "width")? };
        let h = unsafe { out_ptr(height, "height")? };
        *w = m.maze.width();
        *h = m.maze.height();
        Ok(())
    })
}

/// Zero-based start and goal coordinates.
///
/// # Safety
/// `maze` must be null or a live handle; outputs null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_maze_endpoints(
    maze: *const MpMaze,
    start_row: *mut usize,
    start_col: *mut usize,
    goal_row: *mut usize,
    goal_col: *mut usize,
) -> MpStatus {
    guard(|| {
        let m = unsafe { deref(maze, "maze")? };
        let outs = unsafe {
            [
                out_ptr(start_row, "start_row")?,
                out_ptr(start_col, "start_col")?,
                out_ptr(goal_row, "goal_row")?,
                out_ptr(goal_col, "goal_col")?,
            ]
        };
        let (sr, sc) = m.maze.row_col(m.maze.start());
        let (gr, gc) = m.maze.row_col(m.maze.goal());
        for (o, v) in outs.into_iter().zip([sr, sc, gr, gc]) {
            *o = v;
        }
        Ok(())
    })
}

/// Maze text; release with [`mp_string_free`].
///
/// # Safety
/// `maze` must be null or a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_maze_to_string(maze: *const MpMaze, out: *mut *mut c_char) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        *out = ptr::null_mut();
        let m = unsafe { deref(maze, "maze")? };
        let s = CString::new(m.maze.to_text()).map_err(invalid)?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Policy iteration from the all-North policy, evaluation threshold `theta`.
///
/// # Safety
/// `maze` and `params` must be null or valid; `out` null or writable. On
/// success `*out` owns a solution to release with [`mp_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_solve(
    maze: *const MpMaze,
    params: *const MpRewardParams,
    theta: f64,
    out: *mut *mut MpSolution,
) -> MpStatus {
    guard(|| {
        let out = unsafe { out_ptr(out, "out")? };
        *out = ptr::null_mut();
        let m = unsafe { deref(maze, "maze")? };
        let p = unsafe { deref(params, "params")? };
        let params = RewardParams::new(p.step_cost, p.bump_penalty, p.oil_penalty, p.goal_reward, p.gamma)
            .map_err(invalid)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid(format!("theta must be positive and finite, got {theta}")));
        }
        let compute = |e: solver::SolveError| (MpStatus::ComputeFailed, e.to_string());
        let solution = solver::solve(&m.maze, &params, theta).map_err(compute)?;
        let path = solver::extract_path(&m.maze, &solution.policy, solver::default_max_steps(&m.maze))
            .map_err(compute)?;
        let st = &solution.stats;
        let stats = MpStats {
            sweeps: st.sweeps as u64,
            improvement_rounds: st.improvement_rounds as u64,
            residual: st.residual,
            evaluations: st.evaluations,
            accumulated_reward: solver::path_reward(&m.maze, &params, &path, false),
            path_length: (path.len() - 1) as u64,
            reached_goal: i32::from(path.last() == Some(&m.maze.goal())),
        };
        *out = Box::into_raw(Box::new(MpSolution {
            maze: m.maze.clone(),
            solution,
            stats,
        }));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a live handle from [`mp_solve`].
#[no_mangle]
pub unsafe extern "C" fn mp_solution_free(solution: *mut MpSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// State value at a traversable cell; `MP_STATUS_OUT_OF_RANGE` for walls or
/// coordinates outside the grid.
///
/// # Safety
/// `solution` null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_solution_value(
    solution: *const MpSolution,
    row: usize,
    col: usize,
    out: *mut f64,
) -> MpStatus {
    guard(|| {
        let s = unsafe { deref(solution, "solution")? };
        let out = unsafe { out_ptr(out, "out")? };
        *out = s.solution.values.get(cell(&s.maze, row, col)?);
        Ok(())
    })
}

/// Policy action at a cell as an `MP_ACTION_*` code (`MP_ACTION_NONE` at
/// the goal).
///
/// # Safety
/// `solution` null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_solution_action(
    solution: *const MpSolution,
    row: usize,
    col: usize,
    out: *mut i32,
) -> MpStatus {
    guard(|| {
        let s = unsafe { deref(solution, "solution")? };
        let out = unsafe { out_ptr(out, "out")? };
        let st = cell(&s.maze, row, col)?;
        *out = s
            .solution
            .policy
            .get(st)
            .map_or(MP_ACTION_NONE, |a| a.index() as i32);
        Ok(())
    })
}

/// # Safety
/// `solution` null or live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn mp_solution_stats(solution: *const MpSolution, out: *mut MpStats) -> MpStatus {
    guard(|| {
        let s = unsafe { deref(solution, "solution")? };
        let out = unsafe { out_ptr(out, "out")? };
        *out = s.stats;
        Ok(())
    })
}
