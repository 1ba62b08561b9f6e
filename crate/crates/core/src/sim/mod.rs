//! Experiment plans, rate estimation, privacy audits and the regression
//! suite, all driven by the executable protocol.

mod plan;
mod privacy;
mod rate;
mod regress;
pub mod worked;

pub use plan::{
    realization_count, resolve_pda, AuditFlags, DemandPolicy, ExperimentPlan, Mode, PlanFile,
    DEFAULT_CAP,
};
pub use privacy::{
    default_demands, privacy_audit_empirical, privacy_audit_exact, privacy_audit_exact_with,
    AuditMethod, AuditScope, LeakyQueries, PrivacyReport, ServerPrivacy, FLAG_P, JOINT_DOMAIN_MAX,
};
pub use rate::{estimate_rate, exhaustive_mean, realization, trial_demands, RateEstimate};
pub use regress::{regression_suite, RegressionEntry, RegressionLedger};
