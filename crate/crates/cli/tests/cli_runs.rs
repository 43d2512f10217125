//! End-to-end checks of the command-line driver and its file formats.

use std::fs;
use std::path::Path;
use std::process::Command;

fn topopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topopt"))
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    let base = "n=4\nalpha=5e-5\nrho0=1e-2\ngamma=2\nbeta=0.9\nzeta=0.5\nc=2\nv_max=0.4\ndelta_tol=1e-2\nmax_outer=80\n";
    fs::write(&path, format!("{base}{extra}")).unwrap();
    path
}

#[test]
fn solve_writes_expected_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    let status = topopt()
        .arg("solve")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let history = fs::read_to_string(out.join("history.csv")).unwrap();
    let mut lines = history.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("j,accepted,residual,tau,rho,"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in &rows {
        for (i, field) in row.split(',').enumerate() {
            if i == 0 || i == 1 {
                field.parse::<u64>().unwrap();
            } else {
                let x: f64 = field.parse().unwrap();
                assert!(x.is_finite(), "non-finite field in {row}");
            }
        }
    }
    // final row of a converged run has residual below the tolerance
    let last: Vec<&str> = rows.last().unwrap().split(',').collect();
    let final_residual: f64 = last[2].parse().unwrap();
    assert!(final_residual <= 1e-2);

    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("converged: true"), "{summary}");
    let summary_value = |key: &str| -> f64 {
        summary
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{key}: ")))
            .unwrap_or_else(|| panic!("{key} missing from summary"))
            .parse()
            .unwrap()
    };
    // one history row per executed iteration
    assert_eq!(rows.len(), summary_value("iterations") as usize);

    let final_w = fs::read_to_string(out.join("final_w.txt")).unwrap();
    assert_eq!(final_w.lines().count(), 32); // 2 * 4^2 elements
    let mut w = Vec::new();
    for line in final_w.lines() {
        let v: u8 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!(v == 0 || v == 1);
        w.push(v as f64);
    }

    // the reported objective is reproducible from the stored design alone
    let mesh = topopt::mesh::build_unit_square_mesh(4).unwrap();
    let graph = topopt::mesh::build_adjacency(&mesh);
    let ctx = topopt::fem::FemContext {
        mesh: &mesh,
        simp: topopt::fem::SimpParams::new(1e-3, 3.0).unwrap(),
        source: 1.0,
        tol_lin: 1e-10,
    };
    let field = topopt::field::DesignField::from_vec(w);
    let objective = ctx.compliance_at(&field).unwrap() + 5e-5 * 2.0 * graph.total_variation(&field);
    let reported = summary_value("original_objective");
    assert!(
        (objective - reported).abs() <= 1e-9 * reported.abs().max(1.0),
        "{objective} vs {reported}"
    );
}

#[test]
fn snapshots_have_correct_pgm_format_and_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "snapshot_stride=5\n");
    let out = tmp.path().join("out");
    assert!(topopt()
        .arg("solve")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let mut saw_v = false;
    let mut saw_w = false;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        if !name.ends_with(".pgm") {
            continue;
        }
        let bytes = fs::read(&path).unwrap();
        let header = b"P5\n16 16\n255\n";
        assert!(bytes.starts_with(header), "{name} header");
        let pixels = &bytes[header.len()..];
        assert_eq!(pixels.len(), 16 * 16, "{name} size");
        if name.starts_with("w_") {
            saw_w = true;
            assert!(
                pixels.iter().all(|&p| p == 0 || p == 255),
                "{name} must be binary"
            );
        }
        if name.starts_with("v_") {
            saw_v = true;
            if name == "v_000.pgm" {
                // initial field is uniform at the volume fraction: gray
                assert!(pixels.iter().all(|&p| p != 0 && p != 255), "{name}");
            }
        }
    }
    assert!(saw_v && saw_w);
}

#[test]
fn runs_are_deterministic_for_a_fixed_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "seed=7\n");
    let (out1, out2) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&out1, &out2] {
        assert!(topopt()
            .arg("solve")
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    let h1 = fs::read_to_string(out1.join("history.csv")).unwrap();
    let h2 = fs::read_to_string(out2.join("history.csv")).unwrap();
    // wall_time differs between runs; everything else must match
    let strip = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| {
                l.rsplit_once(',')
                    .map_or(l.to_string(), |(rest, _)| rest.to_string())
            })
            .collect()
    };
    assert_eq!(strip(&h1), strip(&h2));
    assert_eq!(
        fs::read_to_string(out1.join("final_w.txt")).unwrap(),
        fs::read_to_string(out2.join("final_w.txt")).unwrap()
    );
}

#[test]
fn sweep_rows_are_deterministic_and_bookkeeping_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "seed=3\n");
    let out = tmp.path().join("sweep");
    let status = topopt()
        .arg("sweep")
        .arg(&cfg)
        .arg("--rho")
        .arg("1e-2,1e-2")
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // identical rho0 and seed give identical rows
    assert_eq!(rows[0], rows[1]);

    // rho_ratio equals c^rejections, cross-checked against the run history
    for (idx, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        let rho_ratio: f64 = fields[5].parse().unwrap();
        let history = fs::read_to_string(
            out.join(format!("rho_{idx}_{:e}", 1e-2))
                .join("history.csv"),
        )
        .unwrap();
        let rejections = history
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(1) == Some("0"))
            .count();
        assert_eq!(rho_ratio, 2f64.powi(rejections as i32));
    }
}

#[test]
fn invalid_config_fails_with_named_parameter() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "beta=1.5\n").unwrap();
    let output = topopt().arg("solve").arg(&cfg).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("beta"), "{stderr}");
}

#[test]
fn unwritable_output_directory_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let blocker = tmp.path().join("blocker");
    fs::write(&blocker, "a file, not a directory").unwrap();
    let output = topopt()
        .arg("solve")
        .arg(&cfg)
        .arg("--out")
        .arg(blocker.join("nested"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("not writable"), "{stderr}");
}

#[test]
fn sweep_rejects_nonpositive_penalties() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let output = topopt()
        .arg("sweep")
        .arg(&cfg)
        .arg("--rho")
        .arg("1e-2,-1")
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("positive"), "{stderr}");
}

#[test]
fn unknown_key_fails_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "n=4\nnot_a_key=1\n").unwrap();
    let output = topopt().arg("solve").arg(&cfg).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
    assert!(stderr.contains("not_a_key"), "{stderr}");
}
