#ifndef MAZEPI_H
#define MAZEPI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Action codes returned by [`mp_solution_action`].
 */
#define MP_ACTION_NONE -1

#define MP_ACTION_NORTH 0

#define MP_ACTION_SOUTH 1

#define MP_ACTION_EAST 2

#define MP_ACTION_WEST 3

typedef enum {
  MP_STATUS_OK = 0,
  MP_STATUS_NULL_POINTER = 1,
  MP_STATUS_INVALID_INPUT = 2,
  MP_STATUS_COMPUTE_FAILED = 3,
  MP_STATUS_PANIC = 4,
  MP_STATUS_OUT_OF_RANGE = 5,
} MpStatus;

/**
 * Opaque maze handle.
 */
typedef struct MpMaze MpMaze;

/**
 * Opaque solve result.
 */
typedef struct MpSolution MpSolution;

typedef struct {
  double step_cost;
  double bump_penalty;
  double oil_penalty;
  double goal_reward;
  double gamma;
} MpRewardParams;

typedef struct {
  uint64_t sweeps;
  uint64_t improvement_rounds;
  double residual;
  uint64_t evaluations;
  /**
   * Undiscounted return of the greedy rollout from the start.
   */
  double accumulated_reward;
  /**
   * Moves in that rollout.
   */
  uint64_t path_length;
  /**
   * 1 when the rollout reached the goal.
   */
  int32_t reached_goal;
} MpStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `mp_*` call on the same thread.
 */
const char *mp_last_error_message(void);

/**
 * Writes the default reward parameters.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `MpRewardParams`.
 */
MpStatus mp_default_params(MpRewardParams *out);

/**
 * Parses maze text (`S`, `G`, `.`, `#`, `B`, `O`; one row per line).
 *
 * # Safety
 * `text` must be null or a NUL-terminated string; `out` must be null or
 * writable. On success `*out` owns a maze to release with [`mp_maze_free`].
 */
MpStatus mp_maze_parse(const char *text, MpMaze **out);

/**
 * Seeded multi-lane maze.
 *
 * # Safety
 * `out` as for [`mp_maze_parse`].
 */
MpStatus mp_maze_generate_multi_lane(uintptr_t width,
                                     uintptr_t lanes,
                                     uintptr_t bump_step,
                                     uint64_t seed,
                                     MpMaze **out);

/**
 * Seeded multi-modal maze with the given obstacle densities.
 *
 * # Safety
 * `out` as for [`mp_maze_parse`].
 */
MpStatus mp_maze_generate_multi_modal(uintptr_t width,
                                      uintptr_t height,
                                      double wall_density,
                                      double bump_density,
                                      double oil_density,
                                      uint64_t seed,
                                      MpMaze **out);

/**
 * # Safety
 * `maze` must be null or a handle from this library not yet freed.
 */
void mp_maze_free(MpMaze *maze);

/**
 * # Safety
 * `maze` must be null or a live handle; outputs null or writable.
 */
MpStatus mp_maze_dimensions(const MpMaze *maze, uintptr_t *width, uintptr_t *height);

/**
 * Zero-based start and goal coordinates.
 *
 * # Safety
 * `maze` must be null or a live handle; outputs null or writable.
 */
MpStatus mp_maze_endpoints(const MpMaze *maze,
                           uintptr_t *start_row,
                           uintptr_t *start_col,
                           uintptr_t *goal_row,
                           uintptr_t *goal_col);

/**
 * Maze text; release with [`mp_string_free`].
 *
 * # Safety
 * `maze` must be null or a live handle; `out` null or writable.
 */
MpStatus mp_maze_to_string(const MpMaze *maze, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void mp_string_free(char *s);

/**
 * Policy iteration from the all-North policy, evaluation threshold `theta`.
 *
 * # Safety
 * `maze` and `params` must be null or valid; `out` null or writable. On
 * success `*out` owns a solution to release with [`mp_solution_free`].
 */
MpStatus mp_solve(const MpMaze *maze, const MpRewardParams *params, double theta, MpSolution **out);

/**
 * # Safety
 * `solution` must be null or a live handle from [`mp_solve`].
 */
void mp_solution_free(MpSolution *solution);

/**
 * State value at a traversable cell; `MP_STATUS_OUT_OF_RANGE` for walls or
 * coordinates outside the grid.
 *
 * # Safety
 * `solution` null or live; `out` null or writable.
 */
MpStatus mp_solution_value(const MpSolution *solution, uintptr_t row, uintptr_t col, double *out);

/**
 * Policy action at a cell as an `MP_ACTION_*` code (`MP_ACTION_NONE` at
 * the goal).
 *
 * # Safety
 * `solution` null or live; `out` null or writable.
 */
MpStatus mp_solution_action(const MpSolution *solution, uintptr_t row, uintptr_t col, int32_t *out);

/**
 * # Safety
 * `solution` null or live; `out` null or writable.
 */
MpStatus mp_solution_stats(const MpSolution *solution, MpStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAZEPI_H */
