use std::process::Command;

use arms_bench::{emit_csv, parse_config, run_experiment, CSV_HEADER};

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

#[test]
fn tiny_matrix_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = bench()
        .args(["run", "--runs", "1", "--n", "1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(text.ends_with('\n'));
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 12);
        let support: f64 = f[5].parse().unwrap();
        let rs: f64 = f[6].parse().unwrap();
        let ctrl: f64 = f[7].parse().unwrap();
        assert_eq!(support, 4.0 + rs + ctrl, "{line}");
        assert_eq!(&f[9..], ["1", "1", "0"]);
    }
}

#[test]
fn same_seed_same_bytes_regardless_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "3", "1"].iter().enumerate() {
        let out = dir.path().join(format!("r{i}.csv"));
        let status = bench()
            .args(["run", "--runs", "6", "--n", "300", "--seed", "42", "--workers", workers, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(&cfg, "N = 200\nruns = 50\nsamplers = arms, a2rms\nprocedures = p1\n").unwrap();
    let out = dir.path().join("o.csv");
    let status = bench()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--runs", "4", "--samplers", "ia2rms", "--procedures", "p3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("ia2rms,p3,"));
    assert!(lines[1].ends_with(",4,200,0"));
}

#[test]
fn config_errors_exit_with_2() {
    let o = bench().args(["run", "--n=-5"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`N`"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "runs = 3\nsamplers = gibbs\n").unwrap();
    let o = bench().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("samplers") && err.contains("line 2"), "{err}");

    let o = bench().args(["run", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dump_proposal_writes_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let status = bench()
        .args(["dump-proposal", "--sampler", "ia2rms", "--procedure", "p4", "--at-iteration", "200", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("piece_index,lo,hi,form,params,area"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 4);
    assert!(rows[0].contains(",-inf,") && rows[0].contains("exp_linear"));
    assert!(rows.iter().any(|r| r.contains("linear_pdf")));
}

#[test]
fn one_cell_table_is_two_lines() {
    let mut cfg = parse_config("runs = 2\nN = 50\nsamplers = arms\nprocedures = p2\n").unwrap();
    cfg.workers = Some(1);
    let rows = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_csv(&rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(emit_csv(&rows, &dir.path().join("missing/dir/x.csv"))
        .unwrap_err()
        .to_string()
        .contains("missing"));
}
