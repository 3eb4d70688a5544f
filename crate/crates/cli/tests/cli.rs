use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isac(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_isac"));
    c.args(args);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stdout:\n{}\nstderr:\n{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn assert_provenance(first: &str, seed: u64) {
    let prefix = format!("# seed={seed} config_hash=");
    assert!(first.starts_with(&prefix), "{first}");
    let hash = &first[prefix.len()..];
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn eval_comm_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = isac(&["eval", "--target", "comm", "--alloc", "12,1,0,1", "--out", out], &[]);
    ok(&o);
    let l = lines(&dir.path().join("eval_comm.csv"));
    assert_provenance(&l[0], 1);
    assert_eq!(l[1], "target,variant,route,k,l,j,q,rate,ase");
    let f: Vec<&str> = l[2].split(',').collect();
    assert_eq!(&f[..7], ["comm", "rederived", "comm", "12", "1", "0", "1"]);
    let t_c: f64 = f[8].parse().unwrap();
    assert!((t_c - 16.9732).abs() < 1e-3, "{t_c}");
}

#[test]
fn sense_dispatch_by_cluster_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let route = |alloc: &str| {
        ok(&isac(&["eval", "--target", "sense", "--alloc", alloc, "--out", out], &[]));
        lines(&dir.path().join("eval_sense.csv"))[2].split(',').nth(2).unwrap().to_string()
    };
    assert_eq!(route("1,1,2,1"), "sense_q1_closed_form");
    assert_eq!(route("1,1,2,2"), "sense_cluster_reduced");
}

#[test]
fn infeasible_allocation_exits_2_with_json_violations() {
    let o = isac(&["eval", "--target", "comm", "--alloc", "10,2,11,2"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    let json: Vec<&str> = err.lines().filter(|l| l.starts_with('{')).collect();
    assert_eq!(json.len(), 2, "{err}");
    assert!(json.iter().any(|l| l.contains("\"violation\":\"dof_exceeded\"")));
    assert!(json.iter().any(|l| l.contains("\"violation\":\"too_many_targets\"")));
}

#[test]
fn missing_allocation_and_bad_config_exit_2() {
    assert_eq!(isac(&["eval", "--target", "comm"], &[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[network]\nantennas = 4\n").unwrap();
    let o = isac(&["--config", cfg.to_str().unwrap(), "show-config"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn printed_formula_domain_error_exits_1() {
    let o = isac(&["eval", "--target", "sense", "--alloc", "1,1,2,2", "--variant", "as_written"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = isac(&["--seed", "9", "show-config"], &[]);
    ok(&o);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, &o.stdout).unwrap();
    let again = isac(&["--config", cfg.to_str().unwrap(), "show-config"], &[]);
    ok(&again);
    assert_eq!(o.stdout, again.stdout);
    assert!(String::from_utf8(o.stdout).unwrap().contains("seed = 9"));
}

#[test]
fn mc_cache_and_worker_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let run = |sub: &str, threads: &str, use_cache: bool| {
        let out = dir.path().join(sub);
        let mut args = vec!["--trials", "400", "--seed", "3", "--out", out.to_str().unwrap()];
        if use_cache {
            args.extend(["--cache-dir", cache.to_str().unwrap()]);
        }
        args.extend(["mc", "--target", "sense", "--alloc", "2,1,1,3", "--records"]);
        let o = isac(&args, &[("RAYON_NUM_THREADS", threads)]);
        ok(&o);
        let summary = fs::read(out.join("mc_sense.csv")).unwrap();
        let trials = fs::read(out.join("mc_sense_trials.csv")).unwrap();
        (summary, trials, String::from_utf8(o.stderr).unwrap())
    };
    let serial = run("a", "1", false);
    let parallel = run("b", "4", false);
    assert_eq!(serial.0, parallel.0);
    assert_eq!(serial.1, parallel.1);

    let cold = run("c", "2", true);
    let warm = run("d", "2", true);
    assert!(!cold.2.contains("cache hit"));
    assert!(warm.2.contains("cache hit"));
    assert_eq!(cold.0, warm.0);
    assert_eq!(cold.1, warm.1);
    assert_eq!(cold.0, serial.0);

    let text = String::from_utf8(serial.0).unwrap();
    let l: Vec<&str> = text.lines().collect();
    assert_provenance(l[0], 3);
    assert_eq!(
        l[1],
        "target,k,l,j,q,mean,half_width,ci_level,trials,seed,window_factor,half_window_mean,truncation_delta,analytic,capped,resampled"
    );
    let trials = String::from_utf8(serial.1).unwrap();
    assert_eq!(trials.lines().nth(1), Some("trial,R,SIR,rate"));
    assert_eq!(trials.lines().count(), 402);
}

#[test]
fn boundary_golden_header_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[network]\nm_t = 8\nj_max = 3\n").unwrap();
    let out = dir.path().to_str().unwrap();
    for extra in [&["--method", "enumerate"][..], &["--method", "paper_search"], &["--method", "paper_search", "--strict-paper"]] {
        let mut args = vec!["--config", cfg.to_str().unwrap(), "--out", out, "boundary"];
        args.extend(extra);
        ok(&isac(&args, &[]));
    }
    for name in ["boundary_enumerate.csv", "boundary_paper_search.csv", "boundary_paper_search_strict.csv"] {
        let l = lines(&dir.path().join(name));
        assert_provenance(&l[0], 1);
        assert_eq!(l[1], "k,l,j,q,r_c,r_s,t_c,t_s,t_sum,on_frontier,method");
        assert!(l[2..].iter().any(|r| r.contains(",1,")));
    }
    let o = isac(&["boundary", "--method", "binary"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn figure_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let want = [
        ("f4", "k,l,r_c,t_c,t_s,t_sum,mc_r_c,mc_half_width"),
        ("f5", "k,best_l,r_c,t_c,argmax"),
        ("f6", "m_r,q,j,r_s,t_s,mc_r_s,mc_half_width,mc_t_s"),
        ("f7", "m_r,q,j,t_c,t_s,t_sum,t_s_over_q1"),
    ];
    for (id, header) in want {
        ok(&isac(&["--trials", "50", "--out", out, "figure", id], &[]));
        let l = lines(&dir.path().join(format!("{id}.csv")));
        assert_provenance(&l[0], 1);
        assert_eq!(l[1], header, "{id}");
        assert!(l.len() > 3);
    }
    let f5 = lines(&dir.path().join("f5.csv"));
    let flagged: Vec<_> = f5[2..].iter().filter(|r| r.ends_with(",1")).collect();
    assert_eq!(flagged.len(), 1);
    assert!(flagged[0].starts_with("12,1,"), "{}", flagged[0]);
}

#[test]
fn frontier_figures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&isac(&["--out", out, "figure", "f9"], &[]));
    ok(&isac(&["--out", out, "figure", "f11"], &[]));
    assert_eq!(lines(&dir.path().join("f9.csv"))[1], "m_t,scheme,k,l,j,q,r_c,r_s");
    assert_eq!(lines(&dir.path().join("f11.csv"))[1], "m_t,scheme,k,l,j,q,t_c,t_s");
    let gains = lines(&dir.path().join("f11_gain.csv"));
    assert_eq!(gains[1], "m_t,comm_gain,grid_hits,grid_points");
    let g40: f64 = gains.iter().find(|r| r.starts_with("40,")).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(g40 > 0.0);
}
