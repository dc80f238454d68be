use adan::bench::{verify, FaultInjection, VerifyConfig};

#[test]
fn default_suite_passes() {
    let report = verify(&VerifyConfig::default()).unwrap();
    println!("{report}");
    assert!(report.all_passed(), "{report}");
    assert_eq!(report.lines.len(), 18);
}

#[test]
fn prox_fault_fails_the_suite() {
    let cfg = VerifyConfig {
        checks: vec!["prox_residual".into(), "descent_lemma".into()],
        fault: Some(FaultInjection {
            prox_perturbation: 1e-3,
            step: 100,
        }),
        ..VerifyConfig::default()
    };
    let report = verify(&cfg).unwrap();
    assert!(!report.all_passed());
    assert_eq!(report.failures().next().unwrap().name, "prox_residual");
}
