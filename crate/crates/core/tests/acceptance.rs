use focklab::quadrature::QuadSpec;
use focklab::suite::{run_check, CHECKS};

#[test]
fn acceptance() {
    let spec = QuadSpec::default();
    let mut failed = Vec::new();
    for (i, (name, _)) in CHECKS.iter().enumerate() {
        let r = run_check(i, 7, &spec);
        let status = if r.passed { "PASS" } else { "FAIL" };
        let measured: Vec<String> = r.measured.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
        println!("[{status}] {:>2} {name}: {}", i + 1, measured.join(" "));
        for n in &r.notes {
            println!("       {n}");
        }
        if !r.passed {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed checks: {failed:?}");
}
