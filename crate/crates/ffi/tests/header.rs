//! Compiles a C client against the generated header and, when the static
//! library is present, links and runs it.

use std::path::{Path, PathBuf};
use std::process::Command;

const CLIENT: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "locbound.h"

int main(void) {
    LbChannel *ch = NULL;
    if (lb_channel_for_pulse(4.0, 3e8, 1e-6, 50.0, &ch) != LB_STATUS_OK) return 10;
    LbBounds b;
    if (lb_bounds(0.01, ch, 0.0, &b) != LB_STATUS_OK) return 11;
    if (fabs(b.crb_lb - 0.19352465368682399) > 1e-7 * b.crb_lb) return 12;
    LbChannel *bad = NULL;
    if (lb_channel_new(1.5, 3e8, 1.0, 1.0, &bad) != LB_STATUS_INVALID_PARAMETER) return 13;
    char msg[128];
    if (lb_last_error_message(msg, sizeof msg) == 0 || strlen(msg) == 0) return 14;
    lb_channel_free(ch);
    printf("%s %.17g\n", lb_version(), b.crb_lb);
    return 0;
}
"#;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn write_client(dir: &Path) -> PathBuf {
    let src = dir.join("client.c");
    std::fs::write(&src, CLIENT).unwrap();
    src
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_dir().join("locbound.h")).unwrap();
    for sym in [
        "lb_version",
        "lb_last_error_message",
        "lb_channel_new",
        "lb_channel_for_pulse",
        "lb_channel_free",
        "lb_field_sample",
        "lb_field_from_points",
        "lb_field_free",
        "lb_crb_realization",
        "lb_avg_crb",
        "lb_crb_lb",
        "lb_bounds",
        "typedef struct LbChannel LbChannel",
        "LB_STATUS_OK = 0",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = write_client(dir.path());
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header_dir())
        .arg(&src)
        .output()
        .expect("a C compiler is required");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_client_links_and_runs() {
    let lib = target_dir().join("liblocbound_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = write_client(dir.path());
    let bin = dir.path().join("client");
    let out = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
}
