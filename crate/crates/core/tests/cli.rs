use recurdim::cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

const EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/two_components.cfg");

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("recurdim").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scratch(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("recurdim-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_accepts_example() {
    let (code, out, _) = invoke(&["--quiet", "validate", EXAMPLE]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("T=3") && out.contains("T=2"), "{out}");
}

#[test]
fn validate_reports_violations() {
    let text = std::fs::read_to_string(EXAMPLE)
        .unwrap()
        .replace("S = [1/2]", "S = [3/2]");
    let path = scratch("bad.cfg", &text);
    let (code, out, _) = invoke(&["--quiet", "validate", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.lines().any(|l| l.starts_with("A2\tmap=1\t")), "{out}");
}

#[test]
fn parse_error_exits_one() {
    let path = scratch("syntax.cfg", "[data]\nx = [0, 1/2, oops]\n");
    let (code, _, err) = invoke(&["--quiet", "scc", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(invoke(&["--quiet", "frobnicate"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--quiet", "spectra", EXAMPLE]).0, EXIT_USAGE);
    assert_eq!(
        invoke(&["--quiet", "scc", "/nonexistent/spec.cfg"]).0,
        EXIT_USAGE
    );
    let (code, _, err) = invoke(&[
        "--quiet",
        "partition",
        EXAMPLE,
        "--component",
        "1",
        "--level",
        "15",
    ]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn scc_lists_components_and_positions() {
    let (code, out, err) = invoke(&["--quiet", "scc", EXAMPLE]);
    assert_eq!(code, EXIT_OK);
    assert!(err.is_empty());
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "r=1 members={2,3,4} T=3");
    assert_eq!(lines[1], "r=2 members={5,6} T=2");
    assert_eq!(
        &lines[2..],
        ["P(1)=3", "P(2)=2", "P(3)=2", "P(4)=2", "P(5)=1", "P(6)=1"]
    );
}

#[test]
fn banner_unless_quiet() {
    let (_, _, err) = invoke(&["scc", EXAMPLE]);
    assert!(err.starts_with("recurdim "));
}

#[test]
fn partition_prints_cells() {
    let (code, out, _) = invoke(&[
        "--quiet",
        "partition",
        EXAMPLE,
        "--component",
        "2",
        "--level",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "theta={1,2,3,4}");
    assert_eq!(
        lines[1],
        "i=1 I=[2/3,3/4] D=[2/3,5/6] owner=5 survives=true"
    );
    assert_eq!(lines.len(), 5);
}

#[test]
fn matrix_lists_nonzeros() {
    let (code, out, _) = invoke(&[
        "--quiet",
        "matrix",
        EXAMPLE,
        "--component",
        "2",
        "--level",
        "1",
        "--kind",
        "upper",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "i,j,value\n1,1,0.766667\n1,2,0.833333\n2,1,0.500000\n2,2,0.500000\n"
    );
}

#[test]
fn spectra_csv_and_json() {
    let (code, out, _) = invoke(&[
        "--quiet",
        "spectra",
        EXAMPLE,
        "--component",
        "2",
        "--kmax",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,rho_upper,rho_lower");
    assert!(lines[1].starts_with("1,1.2924"), "{}", lines[1]);
    assert!(lines[4].starts_with("# bracket=["));
    assert!(lines[4].ends_with("one_sided=false"));

    let (code, out, _) = invoke(&[
        "--quiet",
        "spectra",
        EXAMPLE,
        "--component",
        "2",
        "--kmax",
        "3",
        "--json",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["upper"].as_array().unwrap().len(), 3);
}

#[test]
fn render_writes_csv_and_svg() {
    let csv = std::env::temp_dir().join(format!("recurdim-{}-f.csv", std::process::id()));
    let svg = csv.with_extension("svg");
    let (code, _, err) = invoke(&[
        "--quiet",
        "render",
        EXAMPLE,
        "--resolution",
        "81",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,f(x)");
    assert_eq!(lines.len(), 1 + 6 * 81 + 1);
    assert!(lines[1].starts_with("0.000000000000,1"));
    assert!(std::fs::read_to_string(&svg)
        .unwrap()
        .contains("width=\"1000\""));
}

#[test]
fn dimension_report_is_deterministic() {
    let args = ["--quiet", "dimension", EXAMPLE];
    let (code, first, _) = invoke(&args);
    assert_eq!(code, EXIT_OK);
    assert!(first.contains("exact ≈ 1.535"), "{first}");
    assert_eq!(invoke(&args).1, first);

    let (_, json, _) = invoke(&["--quiet", "dimension", EXAMPLE, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["components"][1]["variation_status"], "certified_infinite");
}

#[test]
fn boxcount_and_oscillation() {
    let (code, out, _) = invoke(&[
        "--quiet",
        "boxcount",
        EXAMPLE,
        "--component",
        "2",
        "--pmin",
        "1",
        "--pmax",
        "4",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "p,epsilon,count");
    assert_eq!(lines.len(), 5);

    let (code, out, _) = invoke(&[
        "--quiet",
        "oscillation",
        EXAMPLE,
        "--component",
        "2",
        "--p",
        "3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("i=1 I=[2/3,5/6] O="), "{out}");
    assert!(out.lines().last().unwrap().starts_with("total="));
}
