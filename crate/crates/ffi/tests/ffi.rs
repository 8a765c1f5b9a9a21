use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mazepi_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(mp_last_error_message()) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> (MpStatus, *mut MpMaze) {
    let c = CString::new(text).unwrap();
    let mut maze = ptr::null_mut();
    let status = unsafe { mp_maze_parse(c.as_ptr(), &mut maze) };
    (status, maze)
}

fn defaults() -> MpRewardParams {
    let mut p = MpRewardParams {
        step_cost: 0.0,
        bump_penalty: 0.0,
        oil_penalty: 0.0,
        goal_reward: 0.0,
        gamma: 0.0,
    };
    assert_eq!(unsafe { mp_default_params(&mut p) }, MpStatus::Ok);
    p
}

#[test]
fn corridor_round_trip() {
    let (status, maze) = parse("S.G");
    assert_eq!(status, MpStatus::Ok);
    let (mut w, mut h) = (0, 0);
    assert_eq!(unsafe { mp_maze_dimensions(maze, &mut w, &mut h) }, MpStatus::Ok);
    assert_eq!((w, h), (3, 1));
    let mut e = [0usize; 4];
    let [a, b, c, d] = &mut e;
    assert_eq!(unsafe { mp_maze_endpoints(maze, a, b, c, d) }, MpStatus::Ok);
    assert_eq!(e, [0, 0, 0, 2]);

    let params = defaults();
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { mp_solve(maze, &params, 1e-9, &mut sol) }, MpStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { mp_solution_value(sol, 0, 0, &mut v) }, MpStatus::Ok);
    assert!((v - 7.1).abs() < 1e-8, "{v}");
    let mut a = 99;
    assert_eq!(unsafe { mp_solution_action(sol, 0, 0, &mut a) }, MpStatus::Ok);
    assert_eq!(a, MP_ACTION_EAST);
    assert_eq!(unsafe { mp_solution_action(sol, 0, 2, &mut a) }, MpStatus::Ok);
    assert_eq!(a, MP_ACTION_NONE);
    assert_eq!(unsafe { mp_solution_value(sol, 5, 0, &mut v) }, MpStatus::OutOfRange);
    assert!(!last_error().is_empty());

    let mut stats = std::mem::MaybeUninit::<MpStats>::uninit();
    assert_eq!(unsafe { mp_solution_stats(sol, stats.as_mut_ptr()) }, MpStatus::Ok);
    let stats = unsafe { stats.assume_init() };
    assert_eq!(stats.reached_goal, 1);
    assert_eq!(stats.path_length, 2);
    assert_eq!(stats.accumulated_reward, 8.0);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { mp_maze_to_string(maze, &mut text) }, MpStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(text) }.to_str().unwrap(), "S.G\n");
    unsafe {
        mp_string_free(text);
        mp_solution_free(sol);
        mp_maze_free(maze);
    }
}

#[test]
fn status_codes() {
    let (status, maze) = parse("S#\n#G");
    assert_eq!(status, MpStatus::InvalidInput);
    assert!(maze.is_null());
    assert!(last_error().contains("unreachable"), "{}", last_error());

    let (status, _) = parse("S.X\n..G");
    assert_eq!(status, MpStatus::InvalidInput);
    assert!(last_error().contains("row 1, column 3"), "{}", last_error());

    assert_eq!(unsafe { mp_maze_parse(ptr::null(), &mut ptr::null_mut()) }, MpStatus::NullPointer);
    let c = CString::new("SG").unwrap();
    assert_eq!(unsafe { mp_maze_parse(c.as_ptr(), ptr::null_mut()) }, MpStatus::NullPointer);

    let (_, maze) = parse("SG");
    let mut params = defaults();
    params.gamma = 1.0;
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { mp_solve(maze, &params, 1e-6, &mut sol) }, MpStatus::InvalidInput);
    assert!(sol.is_null());
    let params = defaults();
    assert_eq!(unsafe { mp_solve(maze, &params, 0.0, &mut sol) }, MpStatus::InvalidInput);
    assert_eq!(unsafe { mp_solve(ptr::null(), &params, 1e-6, &mut sol) }, MpStatus::NullPointer);
    assert_eq!(unsafe { mp_solve(maze, &params, 1e-6, &mut sol) }, MpStatus::Ok);
    assert!(last_error().is_empty());
    unsafe {
        mp_solution_free(sol);
        mp_maze_free(maze);
        mp_maze_free(ptr::null_mut());
        mp_solution_free(ptr::null_mut());
        mp_string_free(ptr::null_mut());
    }
}

#[test]
fn generators() {
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { mp_maze_generate_multi_modal(15, 15, 0.2, 0.1, 0.05, 3, &mut a) }, MpStatus::Ok);
    assert_eq!(unsafe { mp_maze_generate_multi_modal(15, 15, 0.2, 0.1, 0.05, 3, &mut b) }, MpStatus::Ok);
    let (mut ta, mut tb) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        mp_maze_to_string(a, &mut ta);
        mp_maze_to_string(b, &mut tb);
        assert_eq!(CStr::from_ptr(ta), CStr::from_ptr(tb));
        mp_string_free(ta);
        mp_string_free(tb);
        mp_maze_free(a);
        mp_maze_free(b);
    }
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { mp_maze_generate_multi_lane(9, 3, 2, 1, &mut m) }, MpStatus::Ok);
    unsafe { mp_maze_free(m) };
    assert_eq!(unsafe { mp_maze_generate_multi_lane(3, 3, 2, 1, &mut m) }, MpStatus::InvalidInput);
    assert_eq!(
        unsafe { mp_maze_generate_multi_modal(5, 5, 0.9, 0.9, 0.0, 1, &mut m) },
        MpStatus::InvalidInput
    );
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/mazepi.h")
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok()
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let h = header();
    assert!(h.exists(), "build script did not write {}", h.display());
    if !have_cc() {
        eprintln!("cc not found; header syntax check skipped");
        return;
    }
    for lang in ["c", "c++"] {
        let out = Command::new("cc")
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(&h)
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "mazepi.h"
int main(void) {
    MpMaze *maze = NULL;
    if (mp_maze_parse("S.G", &maze) != MP_STATUS_OK) return 10;
    MpRewardParams p;
    mp_default_params(&p);
    MpSolution *sol = NULL;
    if (mp_solve(maze, &p, 1e-9, &sol) != MP_STATUS_OK) return 11;
    double v = 0;
    mp_solution_value(sol, 0, 0, &v);
    int a = -2;
    mp_solution_action(sol, 0, 1, &a);
    MpMaze *bad = NULL;
    MpStatus s = mp_maze_parse("S#\n#G", &bad);
    printf("%.6f %d %d %d\n", v, a, (int)s, strlen(mp_last_error_message()) > 0);
    mp_solution_free(sol);
    mp_maze_free(maze);
    return 0;
}
"#;

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libmazepi_ffi.a");
    if !have_cc() || !lib.exists() {
        eprintln!("cc or {} missing; C link test skipped", lib.display());
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_SMOKE).unwrap();
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "7.100000 2 2 1\n");
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mazepi-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
