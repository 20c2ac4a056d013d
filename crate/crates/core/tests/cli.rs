use std::path::Path;
use std::process::{Command, Output};
use surfspin::cli_io::*;
use surfspin::crystal::*;
use surfspin::Error;
use tempfile::TempDir;

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfspin"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn in_process(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("surfspin").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn readme() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap()
}

/// `surfspin …` lines and `# file:` blocks of the README, in order.
fn readme_examples(text: &str) -> (Vec<Vec<String>>, Vec<(String, String)>) {
    let mut commands = Vec::new();
    let mut files = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(line) = lines.next() {
        if let Some(rest) = line.strip_prefix("surfspin ") {
            commands.push(rest.split_whitespace().map(String::from).collect());
        } else if let Some(name) = line.strip_prefix("# file: ") {
            let mut body = String::new();
            while let Some(l) = lines.next_if(|l| !l.starts_with("```")) {
                body.push_str(l);
                body.push('\n');
            }
            files.push((name.trim().to_string(), body));
        }
    }
    (commands, files)
}

#[test]
fn readme_examples_run() {
    let (commands, files) = readme_examples(&readme());
    assert!(commands.len() >= 10);
    assert!(!files.is_empty());
    let dir = TempDir::new().unwrap();
    for (name, body) in &files {
        std::fs::write(dir.path().join(name), body).unwrap();
    }
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = bin(dir.path(), &args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(dir.path().join("scan-variant.csv").exists());
}

#[test]
fn build_preset_reports_one_bond_and_density() {
    let dir = TempDir::new().unwrap();
    let out = bin(dir.path(), &["build", "--preset", "paper-step", "--out", "model.xyz"]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("1 dangling bond(s)"), "{summary}");
    assert!(summary.contains("4.36e13"), "{summary}");
    let s = parse_structure(&dir.path().join("model.xyz")).unwrap();
    let report = enumerate_dbs(&s);
    assert_eq!(report.total(), 1);
    assert!(report.entries[0].direction.is_some());
}

#[test]
fn fit_prints_solution_table() {
    let (code, out, err) = in_process(&["fit", "--a", "4.0", "--b", "2.2", "--isotope", "1H"]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<f64> = lines[1].split(',').map(|f| f.parse().unwrap()).collect();
    assert!((fields[0] - 3.215).abs() < 1e-3 && (fields[1] - 19.03).abs() < 1e-2);
    assert!(err.contains("1 solution(s)"));
}

#[test]
fn sweep_family_is_ordered() {
    let (code, out, err) = in_process(&["sweep", "--barriers", "0.89,0.96,1.12", "--t-min-c", "300", "--t-max-c", "700"]);
    assert_eq!(code, 0);
    assert!(err.contains("lower barrier faster at every point: true"));
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["T_K", "T_C"]);
    assert_eq!(header.len(), 6);
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let r: Vec<f64> = f[2..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
        assert!(f[5].is_empty());
        let t_k: f64 = f[0].parse().unwrap();
        let t_c: f64 = f[1].parse().unwrap();
        assert!((t_k - t_c - 273.15).abs() < 1e-3);
    }
}

#[test]
fn single_barrier_sweep_has_plain_header() {
    let (code, out, _) = in_process(&["sweep", "--barriers", "1.12", "--t-min-k", "873.15", "--t-max-k", "873.15"]);
    assert_eq!(code, 0);
    assert_eq!(out, "T_K,T_C,rate_per_s,clamped\n8.73150e2,6.00000e2,3.43096e8,\n");
}

#[test]
fn interchange_round_trip_is_bit_exact() {
    let model = build_step_model(&StepModelSpec::default()).unwrap();
    let text = emit_interchange(&model.structure).unwrap();
    let back = parse_interchange(&text).unwrap();
    assert_eq!(back, model.structure);
    assert_eq!(emit_interchange(&back).unwrap(), text);

    let dir = TempDir::new().unwrap();
    let path = dir.path().join("m.toml");
    emit_structure(&model.structure, &path, StructureFormat::from_path(&path)).unwrap();
    assert_eq!(parse_structure(&path).unwrap(), model.structure);
}

#[test]
fn truncated_files_name_the_line() {
    let s = build_bulk(3.57, [1, 1, 1]).unwrap();
    let text = emit_interchange(&s).unwrap();
    let cut = &text[..text.len() * 2 / 3];
    let cut = &cut[..cut.rfind("position").unwrap() + 14];
    match parse_interchange(cut) {
        Err(Error::Parse { line, .. }) => assert!(line > 1 && line <= cut.lines().count(), "{line}"),
        other => panic!("{other:?}"),
    }

    let xyz = emit_xyz(&s);
    let short: String = xyz.lines().take(6).map(|l| format!("{l}\n")).collect();
    match parse_xyz(&short) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("{other:?}"),
    }
    let broken = xyz.replacen("C ", "C x", 1);
    match parse_xyz(&broken) {
        Err(Error::Parse { line, field, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(field, "x");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bulk_xyz_has_ten_lines() {
    let s = build_bulk(3.57, [1, 1, 1]).unwrap();
    let xyz = emit_xyz(&s);
    assert_eq!(xyz.lines().count(), 10);
    assert!(xyz.lines().nth(1).unwrap().contains("Lattice=\""));
    let back = parse_xyz(&xyz).unwrap();
    assert_eq!(back.len(), 8);
    for (a, b) in back.atoms.iter().zip(&s.atoms) {
        assert_eq!(a.species, b.species);
        for k in 0..3 {
            assert!((a.position[k] - b.position[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn interchange_rejects_unknown_keys_and_bad_species() {
    let s = build_bulk(3.57, [1, 1, 1]).unwrap();
    let text = emit_interchange(&s).unwrap();
    let extra = text.replacen("bond_cutoff", "colour = 1\nbond_cutoff", 1);
    assert!(matches!(parse_interchange(&extra), Err(Error::Parse { .. })));
    let bad = text.replacen("species = \"C\"", "species = \"Xe\"", 1);
    match parse_interchange(&bad) {
        Err(Error::Parse { line, .. }) => assert!(bad.lines().nth(line - 1).unwrap().contains("Xe"), "{line}"),
        other => panic!("{other:?}"),
    }
}

fn configs() -> Vec<RunConfig> {
    let argv: [&[&str]; 8] = [
        &["build", "--preset", "flat", "--out", "a.toml"],
        &["dbs", "--edge-variant", "OH/OH"],
        &["hfi", "--threshold", "5", "--field-dir", "0,1,1"],
        &["fit", "--a", "-4.3", "--b", "2.2", "--a-iso", "0.5"],
        &["eseem", "--a", "4", "--b", "2", "--omega-i", "10"],
        &["desorb", "--temp-c", "600"],
        &["anneal", "--barriers", "0.9,1.0"],
        &["sweep", "--t-min-k", "500", "--t-max-k", "900", "--steps", "5"],
    ];
    argv.iter()
        .map(|a| {
            use clap::Parser;
            Cli::try_parse_from(std::iter::once("surfspin").chain(a.iter().copied()))
                .unwrap()
                .command
                .unwrap()
        })
        .collect()
}

#[test]
fn configs_round_trip() {
    for c in configs() {
        let text = c.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c, "{text}");
        assert_eq!(back.to_toml().unwrap(), text);
    }
}

#[test]
fn config_errors_name_line_and_field() {
    let text = "command = \"fit\"\na = 4.3\nb = 2.2\nwidth = 3\n";
    match RunConfig::from_toml(text) {
        Err(Error::Parse { line, field, .. }) => {
            assert_eq!(line, 4);
            assert_eq!(field, "width");
        }
        other => panic!("{other:?}"),
    }
    let nested = "command = \"build\"\n[model]\npreset = \"flat\"\nlayer = 9\n";
    match RunConfig::from_toml(nested) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    assert!(RunConfig::from_toml("command = \"launch\"\n").is_err());
    assert!(RunConfig::from_toml("command = \"fit\"\na = 4.3\n").is_err());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = bin(dir.path(), &["bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = bin(dir.path(), &["fit", "--a", "1", "--b", "1", "--colour", "red"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = bin(dir.path(), &["build", "--input", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(dir.path(), &["desorb", "--barrier", "50", "--temp-k", "10"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bin(dir.path(), &["build", "--preset", "paper-step", "--terrace-width", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn data_goes_to_stdout_without_out() {
    let (code, out, err) = in_process(&["build", "--preset", "flat", "--nx", "1", "--ny", "1", "--layers", "8"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("8"));
    assert!(err.starts_with("build: flat"));
}

#[test]
fn every_subcommand_is_deterministic() {
    let runs: [&[&str]; 9] = [
        &["build", "--out", "m.xyz"],
        &["build", "--out", "m.toml"],
        &["dbs", "--out", "d.csv"],
        &["hfi", "--out", "h.csv"],
        &["fit", "--a", "4.3", "--b", "2.2", "--out", "f.csv"],
        &["eseem", "--a", "4", "--b", "2", "--omega-i", "10", "--out", "e.csv"],
        &["desorb", "--temp-c", "465", "--out", "k.csv"],
        &["anneal", "--out", "a.csv"],
        &["sweep", "--out", "s.csv"],
    ];
    let once = || {
        let dir = TempDir::new().unwrap();
        runs.iter()
            .map(|args| {
                let out = bin(dir.path(), args);
                assert!(out.status.success());
                let file = args.last().unwrap();
                (out.stdout, std::fs::read(dir.path().join(file)).unwrap())
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(once(), once());
}
