//! Scenario registry, report formatting, CSV trace export and the ad hoc
//! `density` / `classify` commands behind the `ddchaos` binary.

pub mod custom;
pub mod export;
pub mod report;
pub mod scenarios;
