use overrun_lint::boundcheck::fuzz::generate_corpus;
use overrun_lint::boundcheck::run_bound_check;
use overrun_lint::frontend::parse_source;
use overrun_lint::runtime::{execute, FaultKind, RunOptions};

#[test]
fn fuzzed_faults_are_always_flagged() {
    let mut faulting = 0;
    let mut flagged = 0;
    let mut false_alarms = 0;
    for case in generate_corpus(2024, 600) {
        let unit = parse_source(&case.source, "fuzz.sl").unwrap();
        let findings = run_bound_check(&unit);
        let trace = execute(
            &unit,
            &RunOptions {
                stdin_script: case.stdin.clone(),
                ..RunOptions::default()
            },
        )
        .unwrap();
        let oob = trace.faults_of(FaultKind::OutOfBounds).next().cloned();
        if let Some(f) = &oob {
            faulting += 1;
            assert!(
                findings.iter().any(|x| x.array_name == "a"),
                "missed fault {} at line {}\n{}\nstdin {:?}",
                f.detail,
                f.span.line,
                case.source,
                case.stdin
            );
        }
        if !findings.is_empty() {
            flagged += 1;
            if oob.is_none() {
                false_alarms += 1;
            }
        }
    }
    let rate = false_alarms as f64 / flagged.max(1) as f64;
    println!(
        "faulting {faulting}, flagged {flagged}, false alarms {false_alarms} ({:.1}%)",
        rate * 100.0
    );
    assert!(faulting > 50);
    assert!(rate <= 0.30, "false-positive rate {rate}");
}
