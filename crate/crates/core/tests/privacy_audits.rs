use mupir::constructions::{catalog, man_pda, ManParams};
use mupir::protocol::{PrivateQueries, SystemConfig};
use mupir::sim::{
    default_demands, privacy_audit_empirical, privacy_audit_exact, privacy_audit_exact_with,
    AuditScope, LeakyQueries, DEFAULT_CAP,
};
use mupir::SimError;

fn worked_config() -> SystemConfig {
    SystemConfig::new(3, 6, 6, 1, catalog("sec4a").unwrap(), 21).unwrap()
}

#[test]
fn worked_configuration_marginals_pass_at_1e5() {
    let config = worked_config();
    let demands = vec![vec![3, 1, 0, 4, 5, 1], vec![0; 6], vec![5; 6]];
    let r = privacy_audit_empirical(&config, &demands, 100_000, &PrivateQueries, false).unwrap();
    assert_eq!(r.scope, AuditScope::Marginal);
    assert!(r.passed, "{:#?}", r.servers);
    let mutant = privacy_audit_empirical(&config, &demands, 100_000, &LeakyQueries, false).unwrap();
    assert!(mutant.servers.iter().all(|s| s.flagged));
}

#[test]
fn empirical_audit_needs_samples() {
    let config = worked_config();
    let d = default_demands(&config);
    assert!(matches!(
        privacy_audit_empirical(&config, &d, 0, &PrivateQueries, false),
        Err(SimError::Plan(_))
    ));
}

#[test]
fn exact_audit_over_every_demand_vector() {
    // all N^K demand vectors at once
    let pda = man_pda(ManParams::new(3, 1).unwrap()).unwrap();
    let config = SystemConfig::new(2, 3, 3, 1, pda, 0).unwrap();
    let all: Vec<Vec<usize>> = (0..27).map(|i| vec![i % 3, i / 3 % 3, i / 9]).collect();
    let r = privacy_audit_exact(&config, &all, DEFAULT_CAP).unwrap();
    assert!(r.passed);
    assert_eq!(r.samples, 64);
    let leaky = privacy_audit_exact_with(&config, &all, DEFAULT_CAP, &LeakyQueries).unwrap();
    assert!(!leaky.passed);
}

#[test]
fn exact_audit_respects_the_cap() {
    let pda = man_pda(ManParams::new(3, 1).unwrap()).unwrap();
    let config = SystemConfig::new(2, 3, 3, 1, pda, 0).unwrap();
    let d = default_demands(&config);
    assert!(matches!(
        privacy_audit_exact(&config, &d, 63),
        Err(SimError::CapExceeded {
            needed: 64,
            cap: 63
        })
    ));
}
