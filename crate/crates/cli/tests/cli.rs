use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use imbal_core::imaging::{crop_at, load_image, save_image, ImageBuffer};
use imbal_core::policy::read_plan_log;
use tempfile::TempDir;

fn imbal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imbal"))
        .current_dir(dir)
        .env_remove("IMBAL_CONFIG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = imbal(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    imbal(dir, args).status.code().unwrap()
}

fn image_set(dir: &Path, n: usize) -> PathBuf {
    let mut text = String::from("path,label\n");
    for i in 0..n {
        let img = ImageBuffer::from_fn(48, 40, |x, y| {
            [(x * 5 + i as u32) as u8, (y * 6) as u8, ((x ^ y) * 3) as u8]
        });
        let name = format!("img{i}.png");
        save_image(&img, &dir.join(&name), 95).unwrap();
        text.push_str(&format!("{name},c{}\n", i % 2));
    }
    let m = dir.join("manifest.csv");
    fs::write(&m, text).unwrap();
    m
}

const SMALL_TRAIN: &[&str] = &[
    "--set",
    "synthetic_counts=80,40,20",
    "--set",
    "synthetic_dim=4",
    "--set",
    "hidden_dim=8",
    "--set",
    "batch_size=32",
    "--set",
    "max_epochs=8",
    "--set",
    "e1=2",
    "--set",
    "e2=6",
    "--set",
    "lr=0.01",
];

fn train_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut a = vec!["train", "--out", out];
    a.extend_from_slice(SMALL_TRAIN);
    a.extend_from_slice(extra);
    a
}

#[test]
fn help_lists_every_key_with_its_default() {
    let d = TempDir::new().unwrap();
    let text = ok(d.path(), &["--help"]);
    for (key, default) in [
        ("alpha", "1.1"),
        ("gamma", "2.0"),
        ("clamp_t", "0.1"),
        ("e1", "20"),
        ("e2", "60"),
        ("p_exec", "0.7"),
        ("order", "color,shape"),
        ("crop_size", "224"),
        ("batch_size", "128"),
        ("lr", "0.001"),
        ("lr_decay", "0.1"),
        ("max_epochs", "70"),
        ("drop_prob", "0.1"),
        ("block_size", "5"),
        ("k_crops", "16"),
        ("seed", "0"),
    ] {
        let line = text
            .lines()
            .find(|l| l.split_whitespace().next() == Some(key))
            .unwrap_or_else(|| panic!("{key} missing from help"));
        assert!(line.contains(&format!("default {default}")), "{line}");
    }
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(d.path(), &["frobnicate"]), 1);
    assert_eq!(code(d.path(), &["schedule", "--set", "no_such_key=1"]), 1);
    assert_eq!(code(d.path(), &["schedule", "--set", "e1=80"]), 1);
    assert_eq!(code(d.path(), &["loss", "--logits", "missing.csv"]), 2);
    fs::write(d.path().join("bad.csv"), "a,0,0.5,0.5\nb,1,oops,0\n").unwrap();
    let out = imbal(d.path(), &["loss", "--logits", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let mut args = train_args("o", &["--set", "lr=1e300"]);
    args.push("--set");
    args.push("max_epochs=3");
    assert_eq!(code(d.path(), &args), 3);
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("run.conf"), "# test\nmax_epochs = 3\ne1 = 1\ne2 = 2\n").unwrap();
    let text = ok(d.path(), &["--config", "run.conf", "schedule"]);
    assert_eq!(text.lines().count(), 5);
    let text = ok(d.path(), &["--config", "run.conf", "--set", "max_epochs=2", "schedule"]);
    assert_eq!(text.lines().count(), 4);
    let out = Command::new(env!("CARGO_BIN_EXE_imbal"))
        .current_dir(d.path())
        .env("IMBAL_CONFIG", "run.conf")
        .arg("schedule")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}

#[test]
fn schedule_dump_has_the_default_curve() {
    let d = TempDir::new().unwrap();
    let text = ok(d.path(), &["schedule"]);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[20][1], "0");
    assert_eq!(rows[40][1], "0.275");
    assert_eq!(rows[60][1], "1.1");
    assert_eq!(rows[0][2], "0.001");
    let betas: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(betas.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn loss_command_rows() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("z.csv"), "sample_id,y,z0,z1\na,0,0,0\nb,1,2.5,-1\nc,0,-4,3\n").unwrap();
    let ce = ok(d.path(), &["loss", "--logits", "z.csv", "--set", "family=ce"]);
    assert!(ce.lines().next().unwrap().starts_with("a,0.693147181,"));
    let mwl = ok(d.path(), &["loss", "--logits", "z.csv", "--set", "family=mwl_focal"]);
    let mwnl = ok(
        d.path(),
        &["loss", "--logits", "z.csv", "--set", "family=mwnl", "--set", "clamp_t=0"],
    );
    assert_eq!(mwl, mwnl);
    let clamped = ok(d.path(), &["loss", "--logits", "z.csv", "--set", "family=mwnl"]);
    assert_ne!(clamped, mwl);
    for line in ce.lines() {
        for v in line.split(',').skip(1) {
            let x: f64 = v.parse().unwrap();
            assert_eq!(imbal_core::format::sig(x, 9), v);
        }
    }
}

#[test]
fn evaluate_perfect_and_crop_averaged_predictions() {
    let d = TempDir::new().unwrap();
    let single = "sample_id,true_class,s0,s1,s2\na,0,0.9,0.05,0.05\nb,1,0.1,0.8,0.1\nc,2,0.2,0.1,0.7\nd,2,0.3,0.3,0.4\n";
    fs::write(d.path().join("p.csv"), single).unwrap();
    let report = ok(d.path(), &["evaluate", "--predictions", "p.csv"]);
    assert!(report.starts_with("bacc=1\n"), "{report}");

    let mut crops = String::from("sample_id,true_class,s0,s1,s2\n");
    for line in single.lines().skip(1) {
        for _ in 0..16 {
            crops.push_str(line);
            crops.push('\n');
        }
    }
    fs::write(d.path().join("crops.csv"), crops).unwrap();
    let averaged = ok(d.path(), &["evaluate", "--predictions", "crops.csv"]);
    assert_eq!(averaged, report);
    assert_eq!(code(d.path(), &["evaluate", "--predictions", "crops.csv", "--k-crops", "8"]), 2);
}

#[test]
fn evaluate_checks_ids_against_the_manifest() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("m.csv"), "path,label\na.png,x\nb.png,y\n").unwrap();
    fs::write(d.path().join("p.csv"), "sample_id,true_class,s0,s1\na,0,0.9,0.1\nb,1,0.2,0.8\n").unwrap();
    ok(d.path(), &["evaluate", "--predictions", "p.csv", "--manifest", "m.csv"]);
    fs::write(d.path().join("q.csv"), "sample_id,true_class,s0,s1\na,0,0.9,0.1\nzz,1,0.2,0.8\n").unwrap();
    let out = imbal(d.path(), &["evaluate", "--predictions", "q.csv", "--manifest", "m.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
}

#[test]
fn augment_without_execution_is_a_pure_crop() {
    let d = TempDir::new().unwrap();
    let m = image_set(d.path(), 3);
    ok(
        d.path(),
        &["augment", "--manifest", m.to_str().unwrap(), "--out", "aug", "--set", "p_exec=0", "--set", "crop_size=32"],
    );
    let log = read_plan_log(fs::read_to_string(d.path().join("aug/plans.csv")).unwrap().as_bytes()).unwrap();
    assert_eq!(log.len(), 3);
    for r in &log {
        assert!(r.plan.draws.iter().all(|dr| !dr.executed));
        let src = load_image(&d.path().join(&r.id)).unwrap();
        let want = crop_at(&src, 32, r.plan.crop_offset.0, r.plan.crop_offset.1).unwrap();
        let stem = Path::new(&r.id).file_stem().unwrap().to_str().unwrap();
        let got = load_image(&d.path().join(format!("aug/{:06}_{stem}.png", r.index))).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn default_plans_have_two_draws_and_replay_exactly() {
    let d = TempDir::new().unwrap();
    let m = image_set(d.path(), 4);
    let m = m.to_str().unwrap();
    ok(d.path(), &["augment", "--manifest", m, "--out", "a", "--set", "crop_size=32"]);
    let log = read_plan_log(fs::read_to_string(d.path().join("a/plans.csv")).unwrap().as_bytes()).unwrap();
    assert!(log.iter().all(|r| r.plan.draws.len() == 2));
    ok(
        d.path(),
        &["augment", "--manifest", m, "--out", "b", "--replay", "a/plans.csv", "--set", "crop_size=32", "--set", "seed=77"],
    );
    for entry in fs::read_dir(d.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let a = fs::read(d.path().join("a").join(&name)).unwrap();
        let b = fs::read(d.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name:?} differs on replay");
    }
}

#[test]
fn augment_skips_unreadable_images() {
    let d = TempDir::new().unwrap();
    let m = image_set(d.path(), 2);
    fs::write(d.path().join("img1.png"), b"not an image").unwrap();
    let m = m.to_str().unwrap();
    let out = imbal(d.path(), &["augment", "--manifest", m, "--out", "a", "--set", "crop_size=32"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("img1.png"));
    fs::write(d.path().join("img0.png"), b"nor this").unwrap();
    assert_eq!(code(d.path(), &["augment", "--manifest", m, "--out", "b", "--set", "crop_size=32"]), 2);
}

#[test]
fn train_is_reproducible_and_logs_the_schedule() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &train_args("r1", &[]));
    ok(d.path(), &train_args("r2", &[]));
    for f in ["epoch_log.csv", "checkpoint.txt", "val_predictions.csv"] {
        assert_eq!(
            fs::read(d.path().join("r1").join(f)).unwrap(),
            fs::read(d.path().join("r2").join(f)).unwrap(),
            "{f}"
        );
    }
    let mut sched_args = vec!["schedule"];
    sched_args.extend_from_slice(SMALL_TRAIN);
    let dump = ok(d.path(), &sched_args);
    let log = fs::read_to_string(d.path().join("r1/epoch_log.csv")).unwrap();
    for (l, s) in log.lines().skip(1).zip(dump.lines().skip(1)) {
        let l: Vec<&str> = l.split(',').collect();
        let s: Vec<&str> = s.split(',').collect();
        assert_eq!(l[..3], s[..3]);
    }
}

#[test]
fn static_zero_alpha_reweighting_matches_plain_ce() {
    let d = TempDir::new().unwrap();
    ok(d.path(), &train_args("ce", &["--set", "family=ce", "--set", "schedule=static", "--set", "alpha=0"]));
    ok(d.path(), &train_args("rw", &["--set", "family=ce_rw", "--set", "schedule=static", "--set", "alpha=0"]));
    assert_eq!(
        fs::read(d.path().join("ce/epoch_log.csv")).unwrap(),
        fs::read(d.path().join("rw/epoch_log.csv")).unwrap()
    );
}

#[test]
fn train_reads_feature_files() {
    let d = TempDir::new().unwrap();
    let mut text = String::from("sample_id,label,f0,f1\n");
    for i in 0..60 {
        let y = usize::from(i % 3 == 0);
        let c = if y == 1 { 3.0 } else { -3.0 };
        text.push_str(&format!("s{i},{y},{},{}\n", c + (i % 7) as f64 * 0.1, c - (i % 5) as f64 * 0.1));
    }
    fs::write(d.path().join("feat.csv"), text).unwrap();
    let out = ok(
        d.path(),
        &train_args("o", &["--set", "train_data=feat.csv", "--set", "input_dim=2"]),
    );
    assert!(out.contains("val_bacc=1.000000"), "{out}");
    assert_eq!(code(d.path(), &train_args("o", &["--set", "train_data=feat.csv", "--set", "input_dim=3"])), 2);
}
